use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabeledDataset, LabeledExample, TaskInfo};
use crate::graph::Graph;
use crate::{Error, Result};

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: u32,
    tasks: Vec<TaskInfo>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    labels: BTreeMap<String, f64>,
}

/// Writes the header line followed by one JSON object per example.
pub fn write_dataset<W: Write>(ds: &LabeledDataset, out: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    let header = Header {
        format: DATASET_FORMAT_VERSION,
        tasks: ds.tasks.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for e in &ds.examples {
        let row = Row {
            n: e.graph.node_count(),
            edges: e.graph.edges().iter().map(|&(a, b)| [a, b]).collect(),
            labels: e.labels.clone(),
        };
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// `source` names the input in error messages.
pub fn read_dataset<R: Read>(input: R, source: &Path) -> Result<LabeledDataset> {
    let mut tasks = None;
    let mut examples = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: &dyn std::fmt::Display| Error::parse(source, line_no, e.to_string());
        if tasks.is_none() {
            let h: Header = serde_json::from_str(&line).map_err(|e| bad(&e))?;
            if h.format != DATASET_FORMAT_VERSION {
                return Err(bad(&format!("unsupported dataset format {}", h.format)));
            }
            tasks = Some(h.tasks);
            continue;
        }
        let row: Row = serde_json::from_str(&line).map_err(|e| bad(&e))?;
        let graph = Graph::new(row.n, row.edges.iter().map(|&[a, b]| (a, b))).map_err(|e| bad(&e))?;
        examples.push(LabeledExample {
            graph,
            labels: row.labels,
        });
    }
    let tasks = tasks.ok_or_else(|| Error::parse(source, 1, "missing header line"))?;
    LabeledDataset::new(tasks, examples)
}

pub fn save_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(ds, f).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(f, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_line_is_reported() {
        let text = "{\"format\":1,\"tasks\":[{\"name\":\"density\",\"type\":\"regression\"}]}\n\
                    {\"n\":2,\"edges\":[[0,1]],\"labels\":{\"density\":1.0}}\n\
                    {\"n\":3,\"edges\":[[0,1]\n";
        let e = read_dataset(text.as_bytes(), Path::new("x.jsonl")).unwrap_err();
        assert!(e.to_string().contains("x.jsonl:3"), "{e}");
    }

    #[test]
    fn header_required_and_versioned() {
        let e = read_dataset("".as_bytes(), Path::new("x")).unwrap_err();
        assert!(e.to_string().contains("header"));
        let e = read_dataset("{\"format\":2,\"tasks\":[]}\n".as_bytes(), Path::new("x")).unwrap_err();
        assert!(e.to_string().contains("format 2"));
    }

    #[test]
    fn invalid_graph_row() {
        let text = "{\"format\":1,\"tasks\":[]}\n{\"n\":2,\"edges\":[[0,5]]}\n";
        let e = read_dataset(text.as_bytes(), Path::new("x")).unwrap_err();
        assert!(e.to_string().contains("x:2"), "{e}");
    }
}
