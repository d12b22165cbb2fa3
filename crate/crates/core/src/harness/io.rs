use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::oig::{ClassFile, FiniteClass};

#[derive(Serialize, Deserialize)]
struct Header {
    alphabet: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct Line {
    x: Instance,
    y: i64,
}

/// Parses JSON lines of `{"x": …, "y": …}`. An optional first line
/// `{"alphabet": […]}` fixes the label alphabet; otherwise it is the set
/// of observed labels.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    parse_dataset_with(text, None, &[])
}

/// Like [`parse_dataset`]; `alphabet` overrides any header, and without
/// either the `extra` labels join the observed ones.
pub fn parse_dataset_with(text: &str, alphabet: Option<&[i64]>, extra: &[i64]) -> Result<Dataset> {
    let forced = alphabet.map(<[i64]>::to_vec);
    let mut alphabet = None;
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if records.is_empty() && alphabet.is_none() {
            if let Ok(h) = serde_json::from_str::<Header>(line) {
                alphabet = Some(h.alphabet);
                continue;
            }
        }
        let l: Line = serde_json::from_str(line).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        records.push((l.x, l.y));
    }
    let alphabet = forced.or(alphabet).or_else(|| {
        (!extra.is_empty()).then(|| {
            let mut all: Vec<i64> = records.iter().map(|r| r.1).chain(extra.iter().copied()).collect();
            all.sort_unstable();
            all.dedup();
            all
        })
    });
    Dataset::from_external(records, alphabet)
}

pub fn render_dataset(dataset: &Dataset) -> String {
    let alphabet = dataset.alphabet();
    let mut out = serde_json::to_string(&Header {
        alphabet: alphabet.labels().map(|l| alphabet.external(l)).collect(),
    })
    .expect("header serializes");
    out.push('\n');
    for e in dataset.examples() {
        let line = Line {
            x: e.instance.clone(),
            y: alphabet.external(e.label),
        };
        out.push_str(&serde_json::to_string(&line).expect("line serializes"));
        out.push('\n');
    }
    out
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    for line in BufReader::new(File::open(path)?).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    Ok(text)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_text(path)?)
}

/// Reads a dataset whose alphabet must also cover the labels of `class`.
pub fn read_dataset_with(path: &Path, alphabet: Option<&[i64]>, class: Option<&ClassFile>) -> Result<Dataset> {
    let extra: Vec<i64> = class
        .map(|c| c.rows.iter().flatten().copied().collect())
        .unwrap_or_default();
    parse_dataset_with(&read_text(path)?, alphabet, &extra)
}

pub fn read_class_file(path: &Path) -> Result<ClassFile> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(render_dataset(dataset).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_class(path: &Path, dataset: &Dataset) -> Result<FiniteClass> {
    FiniteClass::from_file(read_class_file(path)?, dataset.alphabet())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_unused_labels() {
        let text = "{\"alphabet\":[1,2,3,7]}\n{\"x\":\"a\",\"y\":1}\n{\"x\":[0.5,1.0],\"y\":3}\n";
        let ds = parse_dataset(text).unwrap();
        assert_eq!(ds.alphabet_size(), 4);
        assert_eq!(ds.instance(1), &Instance::Point(vec![0.5, 1.0]));
        assert_eq!(parse_dataset(&render_dataset(&ds)).unwrap(), ds);
        assert!(parse_dataset("{\"x\":\"a\"}").is_err());
        let body = "{\"x\":\"a\",\"y\":5}\n";
        assert_eq!(parse_dataset_with(body, None, &[9, 5]).unwrap().alphabet_size(), 2);
        assert_eq!(
            parse_dataset_with(body, Some(&[1, 5, 6]), &[]).unwrap().alphabet_size(),
            3
        );
    }
}
