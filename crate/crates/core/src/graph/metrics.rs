use std::collections::VecDeque;

use super::Graph;
use crate::{Error, Result};

/// Fraction of possible edges present, `2|E| / (n(n-1))`.
pub fn density(g: &Graph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Domain(format!("density undefined for {n} node(s)")));
    }
    Ok(2.0 * g.edge_count() as f64 / (n as f64 * (n - 1) as f64))
}

/// Maximal connected node sets, each sorted, ordered by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            members.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Longest shortest path (in hops) inside the largest connected component.
///
/// The largest component is chosen by node count; on ties the one holding
/// the smallest node index wins, which is the first in
/// [`connected_components`] order.
pub fn diameter(g: &Graph) -> Result<usize> {
    if g.node_count() == 0 {
        return Err(Error::Domain("diameter undefined for the empty graph".into()));
    }
    let components = connected_components(g);
    let mut largest = &components[0];
    for c in &components[1..] {
        if c.len() > largest.len() {
            largest = c;
        }
    }
    let mut dist = vec![usize::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    let mut best = 0;
    for &source in largest {
        for &v in largest {
            dist[v] = usize::MAX;
        }
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            best = best.max(d);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    Ok(best)
}
