//! CSV formats.
//!
//! Datasets: an optional `# key=value ...` sidecar line (`baseline=v1;...;vS`,
//! `negative=<class>`), then a header `sensor_1,...,sensor_S,label` and one
//! sample per line. Labels are class names, mapped to dense ids in order of
//! first appearance.
//!
//! Recordings: a sidecar `# class=<name> baseline=<v1;...;vS> sample_rate=<r>`
//! followed by a header `t,sensor_1,...,sensor_S`, with `t` in minutes.

use super::{DataError, LabeledDataset, OdourRecording, SAMPLE_RATE};
use ndarray::Array2;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const LABEL_COLUMN: &str = "label";

/// Reads a dataset file. Class ids follow first appearance of each label.
pub fn read_csv(path: impl AsRef<Path>) -> Result<LabeledDataset, DataError> {
    let text = fs::read_to_string(path)?;
    read_dataset_str(&text, None)
}

/// Reads a dataset whose labels must all belong to `classes`; ids follow the
/// order of `classes`.
pub fn read_csv_with_classes(path: impl AsRef<Path>, classes: &[String]) -> Result<LabeledDataset, DataError> {
    let text = fs::read_to_string(path)?;
    read_dataset_str(&text, Some(classes))
}

pub fn write_csv(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    write_dataset(dataset, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn write_dataset<W: Write>(dataset: &LabeledDataset, w: W) -> Result<(), DataError> {
    let columns: Vec<String> = (1..=dataset.n_features()).map(|i| format!("sensor_{i}")).collect();
    write_dataset_columns(dataset, &columns, w)
}

/// Like [`write_dataset`] with caller-chosen names for the value columns.
pub fn write_dataset_columns<W: Write>(
    dataset: &LabeledDataset,
    columns: &[String],
    mut w: W,
) -> Result<(), DataError> {
    if columns.len() != dataset.n_features() {
        return Err(DataError::InvalidConfig(format!(
            "{} column names for {} columns",
            columns.len(),
            dataset.n_features()
        )));
    }
    let mut sidecar = Vec::new();
    if let Some(b) = dataset.baseline() {
        sidecar.push(format!("baseline={}", join_values(b)));
    }
    if let Some(neg) = dataset.negative_class() {
        sidecar.push(format!("negative={}", dataset.class_names()[neg]));
    }
    if !sidecar.is_empty() {
        writeln!(w, "# {}", sidecar.join(" "))?;
    }
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let mut header = columns.to_vec();
    header.push(LABEL_COLUMN.into());
    csv.write_record(&header).map_err(csv_io)?;
    for (row, &label) in dataset.rows().outer_iter().zip(dataset.labels()) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(dataset.class_names()[label].clone());
        csv.write_record(&record).map_err(csv_io)?;
    }
    csv.flush()?;
    Ok(())
}

/// Parses dataset text. The header's last column must be `label`; the other
/// column names are free-form so feature and hybrid matrices share the format.
pub fn read_dataset_str(text: &str, classes: Option<&[String]>) -> Result<LabeledDataset, DataError> {
    let (sidecar, body, offset) = split_sidecar(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| parse_err(offset + 1, e))?.clone();
    if header.len() < 2 || header.get(header.len() - 1) != Some(LABEL_COLUMN) {
        return Err(DataError::Parse {
            line: offset + 1,
            message: format!("header must end with a '{LABEL_COLUMN}' column"),
        });
    }
    let width = header.len() - 1;

    let mut class_names: Vec<String> = classes.map(|c| c.to_vec()).unwrap_or_default();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(offset, e))?;
        let line = offset + record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != width + 1 {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} cells, found {}", width + 1, record.len()),
            });
        }
        for (col, cell) in record.iter().take(width).enumerate() {
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("column {}: '{cell}' is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    line,
                    message: format!("column {}: non-finite value", col + 1),
                });
            }
            values.push(v);
        }
        let name = &record[width];
        if name.is_empty() {
            return Err(DataError::Parse {
                line,
                message: "empty label".into(),
            });
        }
        let id = match class_names.iter().position(|c| c == name) {
            Some(id) => id,
            None if classes.is_some() => {
                return Err(DataError::Parse {
                    line,
                    message: format!("unknown label '{name}'"),
                })
            }
            None => {
                class_names.push(name.to_string());
                class_names.len() - 1
            }
        };
        labels.push(id);
    }
    let rows =
        Array2::from_shape_vec((labels.len(), width), values).map_err(|e| DataError::InvalidConfig(e.to_string()))?;
    let mut ds = LabeledDataset::new(rows, labels, class_names)?;
    if let Some(b) = sidecar.get("baseline") {
        ds = ds.with_baseline(parse_values(b, 1)?)?;
    }
    let negative = sidecar.get("negative").map(String::as_str).or_else(|| {
        ds.class_id(super::AMBIENT_CLASS_NAME)
            .map(|_| super::AMBIENT_CLASS_NAME)
    });
    if let Some(name) = negative {
        if let Some(id) = ds.class_id(name) {
            ds = ds.with_negative_class(id)?;
        }
    }
    Ok(ds)
}

pub fn write_recording<W: Write>(rec: &OdourRecording, class_names: &[String], mut w: W) -> Result<(), DataError> {
    let class = class_names.get(rec.class_id()).ok_or(DataError::LabelOutOfRange {
        label: rec.class_id(),
        n_classes: class_names.len(),
    })?;
    let mut sidecar = format!(
        "# class={} baseline={} sample_rate={}",
        sanitize(class),
        join_values(rec.baseline()),
        rec.sample_rate()
    );
    for (k, v) in rec.metadata() {
        if !matches!(k.as_str(), "class" | "baseline" | "sample_rate") {
            sidecar.push_str(&format!(" {}={}", sanitize(k), sanitize(v)));
        }
    }
    writeln!(w, "{sidecar}")?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=rec.n_sensors()).map(|i| format!("sensor_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for (t, row) in rec.values().outer_iter().enumerate() {
        let mut line = (t as f64 / rec.sample_rate()).to_string();
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Parses a recording. The class name is looked up in `classes` and appended
/// when new.
pub fn read_recording(text: &str, classes: &mut Vec<String>) -> Result<OdourRecording, DataError> {
    let (sidecar, body, offset) = split_sidecar(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| parse_err(offset + 1, e))?.clone();
    if header.len() < 2 || header.get(0) != Some("t") {
        return Err(DataError::Parse {
            line: offset + 1,
            message: "recording header must start with 't'".into(),
        });
    }
    let width = header.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(offset, e))?;
        let line = offset + record.position().map_or(0, |p| p.line());
        if record.len() != width + 1 {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} cells, found {}", width + 1, record.len()),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("column {}: '{cell}' is not a number", col + 1),
            })?;
            if col == 0 {
                times.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let rows =
        Array2::from_shape_vec((times.len(), width), values).map_err(|e| DataError::InvalidConfig(e.to_string()))?;
    let baseline = sidecar.get("baseline").map(|b| parse_values(b, 1)).transpose()?;
    let sample_rate = match sidecar.get("sample_rate") {
        Some(r) => r.parse().map_err(|_| DataError::Parse {
            line: 1,
            message: format!("bad sample_rate '{r}'"),
        })?,
        None if times.len() >= 2 && times[1] > times[0] => 1.0 / (times[1] - times[0]),
        None => SAMPLE_RATE,
    };
    let class_name = sidecar.get("class").cloned().unwrap_or_else(|| "unknown".into());
    let class_id = match classes.iter().position(|c| *c == class_name) {
        Some(id) => id,
        None => {
            classes.push(class_name);
            classes.len() - 1
        }
    };
    let mut rec = OdourRecording::new(rows, baseline, sample_rate, class_id)?;
    for (k, v) in sidecar {
        if !matches!(k.as_str(), "class" | "baseline" | "sample_rate") {
            rec = rec.with_metadata(k, v);
        }
    }
    Ok(rec)
}

/// Splits leading `#` lines off `text`, returning the parsed key/value pairs,
/// the remaining body and the number of lines consumed.
fn split_sidecar(text: &str) -> Result<(BTreeMap<String, String>, &str, u64), DataError> {
    let mut map = BTreeMap::new();
    let mut rest = text;
    let mut consumed = 0u64;
    while rest.starts_with('#') {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        consumed += 1;
        for token in line.trim_start_matches('#').split_whitespace() {
            let (k, v) = token.split_once('=').ok_or_else(|| DataError::Parse {
                line: consumed,
                message: format!("expected key=value, found '{token}'"),
            })?;
            map.insert(k.to_string(), v.to_string());
        }
        rest = tail;
    }
    Ok((map, rest, consumed))
}

fn parse_values(s: &str, line: u64) -> Result<Vec<f64>, DataError> {
    s.split(';')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| DataError::Parse {
                line,
                message: format!("'{v}' is not a number"),
            })
        })
        .collect()
}

fn join_values(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_whitespace() || c == '=' { '_' } else { c })
        .collect()
}

fn parse_err(offset: u64, e: csv::Error) -> DataError {
    let line = offset + e.position().map_or(0, |p| p.line());
    DataError::Parse {
        line,
        message: e.to_string(),
    }
}

fn csv_io(e: csv::Error) -> DataError {
    if !e.is_io_error() {
        return DataError::Io(std::io::Error::other(e));
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::Io(io),
        _ => unreachable!("is_io_error checked"),
    }
}
