//! Radial and momentum discretizations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default geometric ratio between consecutive steps of a graded grid.
pub const DEFAULT_GRADING: f64 = 1.05;

/// Nodes `0 = r_0 < r_1 < ... < r_N = R_max` on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// Validates and wraps an explicit node list.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 intervals, got {} nodes",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("first node must be 0, got {}", nodes[0])));
        }
        check_increasing(&nodes)?;
        Ok(Self { nodes })
    }

    /// `n` equal intervals on `[0, r_max]`.
    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2 intervals, got {n}")));
        }
        let h = r_max / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        nodes[n] = r_max;
        Ok(Self { nodes })
    }

    /// `n` intervals whose widths grow by `ratio`, so nodes cluster near the origin.
    pub fn graded(r_max: f64, n: usize, ratio: f64) -> Result<Self> {
        if !(ratio >= 1.0 && ratio.is_finite()) {
            return Err(Error::InvalidGrid(format!("grading ratio must be >= 1, got {ratio}")));
        }
        if (ratio - 1.0).abs() < 1e-14 {
            return Self::uniform(r_max, n);
        }
        if !(r_max > 0.0 && r_max.is_finite()) || n < 2 {
            return Err(Error::InvalidGrid(format!("bad graded grid r_max={r_max}, n={n}")));
        }
        let h0 = r_max * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut r = 0.0;
        let mut h = h0;
        nodes.push(0.0);
        for _ in 0..n {
            r += h;
            h *= ratio;
            nodes.push(r);
        }
        nodes[n] = r_max;
        check_increasing(&nodes)?;
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    /// Step of a uniform grid, `None` when the spacing varies.
    pub fn uniform_step(&self) -> Option<f64> {
        let h = self.nodes[1] - self.nodes[0];
        let uniform = self
            .nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if (r - self.nodes[i - 1]) <= (self.nodes[i] - r) {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// Momentum nodes `0 <= k_0 < ... < k_M = K_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    nodes: Vec<f64>,
}

impl KGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "k-grid needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] < 0.0 {
            return Err(Error::InvalidGrid(format!("k-grid starts below zero: {}", nodes[0])));
        }
        check_increasing(&nodes)?;
        Ok(Self { nodes })
    }

    /// `m + 1` equally spaced nodes on `[k_min, k_max]`.
    pub fn uniform(k_min: f64, k_max: f64, m: usize) -> Result<Self> {
        if m < 2 || !(k_max > k_min) {
            return Err(Error::InvalidGrid(format!(
                "bad k-grid [{k_min}, {k_max}] with {m} intervals"
            )));
        }
        let h = (k_max - k_min) / m as f64;
        let mut nodes: Vec<f64> = (0..=m).map(|i| k_min + i as f64 * h).collect();
        nodes[m] = k_max;
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn k_max(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }
}

fn check_increasing(nodes: &[f64]) -> Result<()> {
    for (i, w) in nodes.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {}: {} -> {}",
                i + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints() {
        let g = RadialGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.uniform_step(), Some(0.5));
    }

    #[test]
    fn graded_grid_clusters_near_origin() {
        let g = RadialGrid::graded(10.0, 50, DEFAULT_GRADING).unwrap();
        let n = g.nodes();
        assert_eq!(n[0], 0.0);
        assert_eq!(g.r_max(), 10.0);
        assert!(n[1] - n[0] < n[50] - n[49]);
        assert!(g.uniform_step().is_none());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::uniform(1.0, 1).is_err());
        assert!(RadialGrid::from_nodes(vec![0.1, 0.2, 0.3]).is_err());
        assert!(RadialGrid::from_nodes(vec![0.0, 0.2, 0.2]).is_err());
        assert!(KGrid::from_nodes(vec![-1.0, 0.0, 1.0]).is_err());
        assert!(KGrid::uniform(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn nearest_node() {
        let g = RadialGrid::uniform(1.0, 10).unwrap();
        assert_eq!(g.nearest(0.31), 3);
        assert_eq!(g.nearest(-5.0), 0);
        assert_eq!(g.nearest(7.0), 10);
    }
}
