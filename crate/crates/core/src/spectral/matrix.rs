use crate::graph::Graph;
use crate::{Error, Result};

/// Dense symmetric `f64` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl DenseSymMatrix {
    pub fn zeros(order: usize) -> Self {
        DenseSymMatrix {
            order,
            entries: vec![0.0; order * order],
        }
    }

    /// Builds from row-major entries; requires exact symmetry.
    pub fn from_row_major(order: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Shape(format!(
                "{} entries for a {order}x{order} matrix",
                entries.len()
            )));
        }
        for i in 0..order {
            for j in i + 1..order {
                if entries[i * order + j] != entries[j * order + i] {
                    return Err(Error::Domain(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DenseSymMatrix { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    /// Sets `(i, j)` and `(j, i)` together.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.order + j] = value;
        self.entries[j * self.order + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.order)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Combinatorial Laplacian `L = D - W` with `W` the 0/1 adjacency matrix.
pub fn laplacian(g: &Graph) -> DenseSymMatrix {
    let n = g.node_count();
    let mut m = DenseSymMatrix::zeros(n);
    for &(i, j) in g.edges() {
        m.set(i, j, -1.0);
    }
    for i in 0..n {
        m.set(i, i, g.degree(i) as f64);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_examples() {
        assert_eq!(laplacian(&Graph::complete(2)).as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(
            laplacian(&Graph::path(3)).as_slice(),
            &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]
        );
        assert!(laplacian(&Graph::empty(3)).as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let g = Graph::new(5, [(0, 1), (0, 2), (2, 3), (3, 4), (1, 4), (1, 3)]).unwrap();
        let l = laplacian(&g);
        for i in 0..5 {
            assert_eq!(l.row(i).iter().sum::<f64>(), 0.0);
        }
        assert_eq!(l.inf_norm(), 6.0);
    }

    #[test]
    fn asymmetric_input_rejected() {
        assert!(DenseSymMatrix::from_row_major(2, vec![1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(DenseSymMatrix::from_row_major(2, vec![1.0, 2.0, 2.0]).is_err());
        assert!(DenseSymMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 4.0]).is_ok());
    }
}
