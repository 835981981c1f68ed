//! Record files: JSON-lines and CSV.
//!
//! Both formats carry the schema's feature names as keys/columns plus the
//! reserved fields `mp`, `hmp`, `episode`, `frame` and the optional
//! `exemplar`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::record::{RawRecord, RawValue};
use super::{DataError, LineError};

const RESERVED: [&str; 5] = ["mp", "hmp", "episode", "frame", "exemplar"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    JsonLines,
    Csv,
}

impl Format {
    /// `.csv` selects CSV; anything else is read as JSON-lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::JsonLines,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReadMode {
    /// Stop at the first malformed line.
    #[default]
    FailFast,
    /// Skip malformed lines and report them alongside the good records.
    Collect,
}

#[derive(Debug, Default)]
pub struct ReadOutcome {
    pub records: Vec<RawRecord>,
    pub errors: Vec<LineError>,
}

/// Streams records from any reader in file order.
pub fn record_stream<'a, R: Read + 'a>(
    reader: R,
    format: Format,
) -> Box<dyn Iterator<Item = Result<RawRecord, LineError>> + 'a> {
    match format {
        Format::JsonLines => Box::new(
            BufReader::new(reader)
                .lines()
                .enumerate()
                .filter_map(|(i, line)| {
                    let line_no = i + 1;
                    match line {
                        Err(e) => Some(Err(LineError::new(line_no, e.to_string()))),
                        Ok(l) if l.trim().is_empty() => None,
                        Ok(l) => Some(parse_json_line(&l).map_err(|m| LineError::new(line_no, m))),
                    }
                }),
        ),
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .trim(csv::Trim::Fields)
                .from_reader(reader);
            let headers = match rdr.headers() {
                Ok(h) => h.clone(),
                Err(e) => return Box::new(std::iter::once(Err(LineError::new(1, e.to_string())))),
            };
            Box::new(rdr.into_records().map(move |row| {
                let row = row.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    LineError::new(line, e.to_string())
                })?;
                let line = row.position().map_or(0, |p| p.line() as usize);
                parse_csv_row(&headers, &row).map_err(|m| LineError::new(line, m))
            }))
        }
    }
}

/// Reads a whole record file.
pub fn read_records(path: &Path, format: Format, mode: ReadMode) -> Result<ReadOutcome, DataError> {
    let file = File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = ReadOutcome::default();
    for item in record_stream(file, format) {
        match item {
            Ok(r) => out.records.push(r),
            Err(e) if mode == ReadMode::FailFast => return Err(DataError::Parse(e)),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

fn flag(v: &Value, key: &str) -> Result<bool, String> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) => match n.as_u64() {
            Some(0) => Ok(false),
            Some(1) => Ok(true),
            _ => Err(format!("\"{key}\" must be 0 or 1, got {n}")),
        },
        other => Err(format!("\"{key}\" must be 0 or 1, got {other}")),
    }
}

fn index(v: &Value, key: &str) -> Result<u64, String> {
    v.as_u64()
        .ok_or_else(|| format!("\"{key}\" must be a non-negative integer, got {v}"))
}

fn parse_json_line(line: &str) -> Result<RawRecord, String> {
    let obj: Map<String, Value> = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let get = |k: &str| obj.get(k).ok_or_else(|| format!("missing \"{k}\""));
    let mp = flag(get("mp")?, "mp")?;
    let hmp = flag(get("hmp")?, "hmp")?;
    let episode = index(get("episode")?, "episode")?;
    let frame = index(get("frame")?, "frame")?;
    let exemplar = match obj.get("exemplar") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => return Err(format!("\"exemplar\" must be a string, got {other}")),
    };
    let mut values = IndexMap::new();
    for (k, v) in &obj {
        if RESERVED.contains(&k.as_str()) {
            continue;
        }
        let raw = match v {
            Value::Bool(b) => RawValue::Bool(*b),
            Value::Number(n) => RawValue::Number(n.as_f64().ok_or("non-finite number")?),
            Value::String(s) => RawValue::Text(s.clone()),
            other => return Err(format!("field \"{k}\" has unsupported value {other}")),
        };
        values.insert(k.clone(), raw);
    }
    let mut rec = RawRecord::new(values, mp, hmp, episode, frame).map_err(|e| e.to_string())?;
    rec.exemplar = exemplar;
    Ok(rec)
}

fn parse_csv_row(headers: &csv::StringRecord, row: &csv::StringRecord) -> Result<RawRecord, String> {
    let mut values = IndexMap::new();
    let (mut mp, mut hmp, mut episode, mut frame, mut exemplar) = (None, None, None, None, None);
    for (h, cell) in headers.iter().zip(row.iter()) {
        match h {
            "mp" | "hmp" => {
                let b = match cell {
                    "0" | "false" | "False" => false,
                    "1" | "true" | "True" => true,
                    _ => return Err(format!("\"{h}\" must be 0 or 1, got \"{cell}\"")),
                };
                if h == "mp" {
                    mp = Some(b)
                } else {
                    hmp = Some(b)
                }
            }
            "episode" | "frame" => {
                let n: u64 = cell
                    .parse()
                    .map_err(|_| format!("\"{h}\" must be a non-negative integer, got \"{cell}\""))?;
                if h == "episode" {
                    episode = Some(n)
                } else {
                    frame = Some(n)
                }
            }
            "exemplar" => exemplar = (!cell.is_empty()).then(|| cell.to_string()),
            _ => {
                values.insert(h.to_string(), RawValue::infer(cell));
            }
        }
    }
    let mut rec = RawRecord::new(
        values,
        need(mp, "mp")?,
        need(hmp, "hmp")?,
        need(episode, "episode")?,
        need(frame, "frame")?,
    )
    .map_err(|e| e.to_string())?;
    rec.exemplar = exemplar;
    Ok(rec)
}

fn need<T>(v: Option<T>, key: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("missing \"{key}\""))
}

fn json_value(v: &RawValue) -> Value {
    match v {
        RawValue::Bool(b) => Value::Bool(*b),
        RawValue::Number(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
        RawValue::Text(s) => Value::String(s.clone()),
    }
}

/// Serializes one record as a single JSON line (no trailing newline).
pub fn to_json_line(r: &RawRecord) -> String {
    let mut obj = Map::new();
    for (k, v) in &r.values {
        obj.insert(k.clone(), json_value(v));
    }
    obj.insert("mp".into(), Value::from(u8::from(r.mp)));
    obj.insert("hmp".into(), Value::from(u8::from(r.hmp)));
    obj.insert("episode".into(), Value::from(r.episode));
    obj.insert("frame".into(), Value::from(r.frame));
    if let Some(e) = &r.exemplar {
        obj.insert("exemplar".into(), Value::String(e.clone()));
    }
    Value::Object(obj).to_string()
}

/// Writes records; CSV columns follow the first record's feature order.
pub fn write_records<W: Write>(out: W, records: &[RawRecord], format: Format) -> Result<(), DataError> {
    match format {
        Format::JsonLines => {
            let mut w = BufWriter::new(out);
            for r in records {
                writeln!(w, "{}", to_json_line(r)).map_err(DataError::write)?;
            }
            w.flush().map_err(DataError::write)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let Some(first) = records.first() else {
                return Ok(());
            };
            let mut header: Vec<&str> = first.values.keys().map(String::as_str).collect();
            header.extend(RESERVED);
            w.write_record(&header).map_err(DataError::csv)?;
            for r in records {
                let mut row: Vec<String> = first
                    .values
                    .keys()
                    .map(|k| r.values.get(k).map(ToString::to_string).unwrap_or_default())
                    .collect();
                row.push(u8::from(r.mp).to_string());
                row.push(u8::from(r.hmp).to_string());
                row.push(r.episode.to_string());
                row.push(r.frame.to_string());
                row.push(r.exemplar.clone().unwrap_or_default());
                w.write_record(&row).map_err(DataError::csv)?;
            }
            w.flush().map_err(DataError::write)
        }
    }
}

/// Writes records to `path`, choosing the format from the extension.
pub fn write_records_to(path: &Path, records: &[RawRecord]) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_records(file, records, Format::from_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"weather":"clear","brightness":18.16,"blurry":false,"mp":1,"hmp":0,"episode":0,"frame":0}
{"weather":"snowy","brightness":120.5,"blurry":true,"mp":0,"hmp":0,"episode":0,"frame":1,"exemplar":"img/1.jpg"}
{"weather":"overcast","brightness":80,"blurry":false,"mp":1,"hmp":1,"episode":1,"frame":0}
"#;

    fn read_str(text: &str, format: Format, mode: ReadMode) -> Result<ReadOutcome, DataError> {
        let mut out = ReadOutcome::default();
        for item in record_stream(text.as_bytes(), format) {
            match item {
                Ok(r) => out.records.push(r),
                Err(e) if mode == ReadMode::FailFast => return Err(DataError::Parse(e)),
                Err(e) => out.errors.push(e),
            }
        }
        Ok(out)
    }

    #[test]
    fn three_lines_in_order() {
        let out = read_str(GOOD, Format::JsonLines, ReadMode::FailFast).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.records[1].values["weather"], RawValue::Text("snowy".into()));
        assert_eq!(out.records[1].exemplar.as_deref(), Some("img/1.jpg"));
        assert!(out.records[2].hmp);
    }

    #[test]
    fn bad_flag_names_line() {
        let text = GOOD.replacen("\"mp\":0", "\"mp\":2", 1);
        match read_str(&text, Format::JsonLines, ReadMode::FailFast) {
            Err(DataError::Parse(e)) => {
                assert_eq!(e.line, 2);
                assert!(e.message.contains("mp"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let out = read_str(&text, Format::JsonLines, ReadMode::Collect).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.errors.len(), 1);
        assert_eq!(out.errors[0].line, 2);
    }

    #[test]
    fn hazard_without_mp_rejected() {
        let text = r#"{"weather":"clear","mp":0,"hmp":1,"episode":0,"frame":0}"#;
        assert!(read_str(text, Format::JsonLines, ReadMode::FailFast).is_err());
    }

    #[test]
    fn empty_input_is_empty_stream() {
        let out = read_str("", Format::JsonLines, ReadMode::FailFast).unwrap();
        assert!(out.records.is_empty());
        let out = read_str("", Format::Csv, ReadMode::FailFast).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn csv_matches_jsonl() {
        let json = read_str(GOOD, Format::JsonLines, ReadMode::FailFast).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &json.records, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("weather,brightness,blurry,mp,hmp,episode,frame,exemplar"));
        let csv = read_str(&text, Format::Csv, ReadMode::FailFast).unwrap();
        assert_eq!(csv.records, json.records);
    }

    #[test]
    fn csv_quoting() {
        let text = "weather,mp,hmp,episode,frame\n\"partly cloudy\",0,0,3,4\n\"a,b\",1,0,3,5\n";
        let out = read_str(text, Format::Csv, ReadMode::FailFast).unwrap();
        assert_eq!(out.records[0].values["weather"], RawValue::Text("partly cloudy".into()));
        assert_eq!(out.records[1].values["weather"], RawValue::Text("a,b".into()));
    }

    #[test]
    fn jsonl_write_read_identity() {
        let json = read_str(GOOD, Format::JsonLines, ReadMode::FailFast).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &json.records, Format::JsonLines).unwrap();
        let again = read_str(std::str::from_utf8(&buf).unwrap(), Format::JsonLines, ReadMode::FailFast).unwrap();
        assert_eq!(again.records, json.records);
    }
}
