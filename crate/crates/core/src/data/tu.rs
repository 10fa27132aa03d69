use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use super::{LabeledDataset, LabeledExample, TaskInfo, CLASS, DENSITY, DIAMETER};
use crate::graph::Graph;
use crate::nn::TaskKind;
use crate::{Error, Result};

fn read(dir: &Path, name: &str, suffix: &str) -> Result<(PathBuf, String)> {
    let path = dir.join(format!("{name}_{suffix}.txt"));
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, text))
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn int<T: std::str::FromStr>(path: &Path, line: usize, s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("{what} {:?} is not an integer", s.trim())))
}

/// Reads the `<name>_A.txt`, `<name>_graph_indicator.txt` and
/// `<name>_graph_labels.txt` files of a TU benchmark directory.
///
/// Node and edge attributes are ignored. Self-loops are dropped with a
/// warning. Class values are remapped to `0..C` in ascending order under
/// task `class`; `density` and `diameter` are computed for every graph.
pub fn parse_tu(dir: impl AsRef<Path>, name: &str) -> Result<LabeledDataset> {
    let dir = dir.as_ref();
    let (labels_path, labels_text) = read(dir, name, "graph_labels")?;
    let (ind_path, ind_text) = read(dir, name, "graph_indicator")?;
    let (a_path, a_text) = read(dir, name, "A")?;

    let mut raw_labels = Vec::new();
    for (line, l) in lines(&labels_text) {
        raw_labels.push(int::<i64>(&labels_path, line, l, "graph label")?);
    }
    let num_graphs = raw_labels.len();
    if num_graphs == 0 {
        return Err(Error::parse(&labels_path, 1, "no graph labels"));
    }

    // node (0-based global) -> (graph, local index)
    let mut node_of = Vec::new();
    let mut sizes = vec![0usize; num_graphs];
    for (line, l) in lines(&ind_text) {
        let g: usize = int(&ind_path, line, l, "graph id")?;
        if g == 0 || g > num_graphs {
            return Err(Error::parse(
                &ind_path,
                line,
                format!("node {} references absent graph id {g} (have 1..={num_graphs})", node_of.len() + 1),
            ));
        }
        node_of.push((g - 1, sizes[g - 1]));
        sizes[g - 1] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::parse(&ind_path, 1, format!("graph id {} has no nodes", g + 1)));
    }

    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); num_graphs];
    let mut self_loops = 0usize;
    for (line, l) in lines(&a_text) {
        let (a, b) = l
            .split_once(',')
            .ok_or_else(|| Error::parse(&a_path, line, format!("expected \"i, j\", got {l:?}")))?;
        let a: usize = int(&a_path, line, a, "node")?;
        let b: usize = int(&a_path, line, b, "node")?;
        let lookup = |v: usize| {
            if v == 0 || v > node_of.len() {
                Err(Error::parse(
                    &a_path,
                    line,
                    format!("node {v} out of range 1..={}", node_of.len()),
                ))
            } else {
                Ok(node_of[v - 1])
            }
        };
        let (ga, la) = lookup(a)?;
        let (gb, lb) = lookup(b)?;
        if ga != gb {
            return Err(Error::parse(
                &a_path,
                line,
                format!("edge ({a}, {b}) crosses graphs {} and {}", ga + 1, gb + 1),
            ));
        }
        if la == lb {
            self_loops += 1;
            continue;
        }
        edges[ga].insert((la.min(lb), la.max(lb)));
    }
    if self_loops > 0 {
        log::warn!("{name}: dropped {self_loops} self-loop(s)");
    }

    let classes: BTreeMap<i64, usize> = raw_labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();

    let mut examples = Vec::with_capacity(num_graphs);
    for (g, e) in edges.into_iter().enumerate() {
        let graph = Graph::new(sizes[g], e)?;
        let mut ex = LabeledExample::with_metric_labels(graph);
        ex.labels.insert(CLASS.to_string(), classes[&raw_labels[g]] as f64);
        examples.push(ex);
    }
    LabeledDataset::new(
        vec![
            TaskInfo {
                name: CLASS.into(),
                kind: TaskKind::Classification {
                    num_classes: classes.len(),
                },
            },
            TaskInfo::regression(DENSITY),
            TaskInfo::regression(DIAMETER),
        ],
        examples,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(a: &str, ind: &str, labels: &str) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("T_A.txt"), a).unwrap();
        std::fs::write(dir.path().join("T_graph_indicator.txt"), ind).unwrap();
        std::fs::write(dir.path().join("T_graph_labels.txt"), labels).unwrap();
        dir
    }

    fn err(dir: &tempfile::TempDir) -> String {
        parse_tu(dir.path(), "T").unwrap_err().to_string()
    }

    #[test]
    fn dedup_and_self_loops() {
        let d = fixture("1,2\n2 , 1\n1,1\n", "1\n1\n", "5\n");
        let ds = parse_tu(d.path(), "T").unwrap();
        assert_eq!(ds.examples[0].graph.edges(), &[(0, 1)]);
        assert_eq!(ds.examples[0].labels[CLASS], 0.0);
    }

    #[test]
    fn errors_name_lines() {
        let d = fixture("1,2\n", "1\n3\n", "0\n1\n");
        let e = err(&d);
        assert!(e.contains(":2") && e.contains("absent graph id 3"), "{e}");

        let d = fixture("1,2\n1,3\n", "1\n1\n2\n", "0\n1\n");
        let e = err(&d);
        assert!(e.contains(":2") && e.contains("crosses"), "{e}");

        let d = fixture("1,2\n", "1\n1\n", "0.5\n");
        let e = err(&d);
        assert!(e.contains(":1") && e.contains("not an integer"), "{e}");

        let d = fixture("1,2\n", "1\n1\n", "1\n");
        std::fs::remove_file(d.path().join("T_A.txt")).unwrap();
        assert!(err(&d).contains("T_A.txt"));
    }

    #[test]
    fn empty_graph_id_rejected() {
        let d = fixture("", "1\n1\n", "0\n1\n");
        assert!(err(&d).contains("graph id 2 has no nodes"));
    }
}
