//! Adapted and predictable processes on a [`FiltrationTree`].

use serde::{Deserialize, Serialize};

use crate::tree::FiltrationTree;

/// One `dim`-vector per tree node (times `0..=T`). Serialised as a list of
/// per-node rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct AdaptedProcess {
    dim: usize,
    values: Vec<f64>,
}

impl AdaptedProcess {
    pub fn zeros(tree: &FiltrationTree, dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; tree.num_nodes() * dim],
        }
    }

    /// Scalar process from one value per node.
    pub fn scalar(values: Vec<f64>) -> Self {
        Self { dim: 1, values }
    }

    pub fn from_rows(rows: &[Vec<f64>], dim: usize) -> Option<Self> {
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(Self {
            dim,
            values: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(tree: &FiltrationTree, dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(tree, dim);
        for n in 0..tree.num_nodes() {
            for j in 0..dim {
                out.values[n * dim + j] = f(n, j);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn get(&self, node: usize, j: usize) -> f64 {
        self.values[node * self.dim + j]
    }

    pub fn set(&mut self, node: usize, j: usize, v: f64) {
        self.values[node * self.dim + j] = v;
    }

    /// Value of a scalar process.
    pub fn value(&self, node: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.values[node]
    }

    pub fn component(&self, j: usize) -> AdaptedProcess {
        AdaptedProcess::scalar(self.values.iter().skip(j).step_by(self.dim).copied().collect())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Terminal values of component `j`, indexed by leaf.
    pub fn terminal(&self, tree: &FiltrationTree, j: usize) -> Vec<f64> {
        (tree.num_inner()..tree.num_nodes())
            .map(|n| self.get(n, j))
            .collect()
    }

    /// Stacks processes of equal length side by side.
    pub fn stack(parts: &[&AdaptedProcess]) -> AdaptedProcess {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let nodes = parts.iter().map(|p| p.num_nodes()).find(|&n| n > 0).unwrap_or(0);
        let mut values = Vec::with_capacity(nodes * dim);
        for n in 0..nodes {
            for p in parts {
                values.extend_from_slice(p.at(n));
            }
        }
        AdaptedProcess { dim, values }
    }

    /// Nodewise product of two scalar processes.
    pub fn mul(&self, other: &AdaptedProcess) -> AdaptedProcess {
        AdaptedProcess::scalar(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &AdaptedProcess) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One `dim`-vector per non-terminal node; the value stored at a time-`(t−1)`
/// node applies to the increment over `(t−1, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct PredictableProcess {
    dim: usize,
    values: Vec<f64>,
}

impl PredictableProcess {
    pub fn zeros(tree: &FiltrationTree, dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; tree.num_inner() * dim],
        }
    }

    /// Buy-and-hold of a fixed position vector.
    pub fn constant(tree: &FiltrationTree, position: &[f64]) -> Self {
        Self {
            dim: position.len(),
            values: position.repeat(tree.num_inner()),
        }
    }

    /// Coordinates laid out node-major, as used by the gains operator.
    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Self {
        Self { dim, values: coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn get(&self, node: usize, j: usize) -> f64 {
        self.values[node * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &PredictableProcess) -> PredictableProcess {
        PredictableProcess {
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    pub fn scaled(&self, scale: f64) -> PredictableProcess {
        PredictableProcess {
            dim: self.dim,
            values: self.values.iter().map(|v| scale * v).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &PredictableProcess) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn flatten_rows(rows: Vec<Vec<f64>>) -> Result<(usize, Vec<f64>), String> {
    let dim = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(format!("every row must have length {dim}"));
    }
    Ok((dim, rows.into_iter().flatten().collect()))
}

impl From<AdaptedProcess> for Vec<Vec<f64>> {
    fn from(p: AdaptedProcess) -> Self {
        p.rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for AdaptedProcess {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let (dim, values) = flatten_rows(rows)?;
        Ok(Self { dim, values })
    }
}

impl From<PredictableProcess> for Vec<Vec<f64>> {
    fn from(p: PredictableProcess) -> Self {
        p.rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for PredictableProcess {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let (dim, values) = flatten_rows(rows)?;
        Ok(Self { dim, values })
    }
}
