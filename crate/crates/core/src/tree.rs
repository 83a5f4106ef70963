//! Finite event trees encoding (Ω, P, 𝔽).
//!
//! Nodes are stored in canonical order: time-major, and within a time layer
//! ordered by parent and then by child position. Under this order the
//! children of a node and the leaves below it occupy contiguous index ranges,
//! and the non-terminal nodes are exactly the ids `0..num_inner()`.

use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Node {
    time: usize,
    parent: Option<usize>,
    children: Range<usize>,
    leaves: Range<usize>,
    prob: f64,
}

/// A finite filtration tree with horizon `T ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationTree {
    horizon: usize,
    nodes: Vec<Node>,
    offsets: Vec<usize>,
    branching: Vec<Vec<usize>>,
}

impl FiltrationTree {
    /// Builds a tree from per-time child counts and leaf probabilities.
    ///
    /// `children[t][i]` is the number of children of the `i`-th node at time
    /// `t`; `children[0]` must hold exactly one entry (the root). Only the
    /// shape is checked here; probability violations are left to scenario
    /// validation so they can be reported rather than rejected.
    pub fn new(children: &[Vec<usize>], leaf_probs: &[f64]) -> Result<Self> {
        let horizon = children.len();
        if horizon == 0 {
            return Err(Error::InvalidTree("horizon must be at least 1".into()));
        }
        if children[0].len() != 1 {
            return Err(Error::InvalidTree(format!(
                "time 0 must have exactly one node, got {}",
                children[0].len()
            )));
        }
        let mut offsets = vec![0usize, 1];
        for (t, layer) in children.iter().enumerate() {
            let width = offsets[t + 1] - offsets[t];
            if layer.len() != width {
                return Err(Error::InvalidTree(format!(
                    "time {t} has {width} nodes but {} child counts",
                    layer.len()
                )));
            }
            if let Some(i) = layer.iter().position(|&c| c == 0) {
                return Err(Error::InvalidTree(format!(
                    "node {i} at time {t} has no children"
                )));
            }
            let next: usize = layer.iter().sum();
            offsets.push(offsets[t + 1] + next);
        }
        let total = offsets[horizon + 1];
        let num_leaves = total - offsets[horizon];
        if leaf_probs.len() != num_leaves {
            return Err(Error::InvalidTree(format!(
                "{num_leaves} leaves but {} probabilities",
                leaf_probs.len()
            )));
        }

        let mut nodes = Vec::with_capacity(total);
        nodes.push(Node {
            time: 0,
            parent: None,
            children: 0..0,
            leaves: 0..0,
            prob: 0.0,
        });
        for (t, layer) in children.iter().enumerate() {
            let mut next = offsets[t + 1];
            for (i, &count) in layer.iter().enumerate() {
                let id = offsets[t] + i;
                nodes[id].children = next..next + count;
                for _ in 0..count {
                    nodes.push(Node {
                        time: t + 1,
                        parent: Some(id),
                        children: 0..0,
                        leaves: 0..0,
                        prob: 0.0,
                    });
                }
                next += count;
            }
        }

        let leaf_base = offsets[horizon];
        for id in (0..total).rev() {
            if nodes[id].time == horizon {
                let leaf = id - leaf_base;
                nodes[id].leaves = leaf..leaf + 1;
                nodes[id].prob = leaf_probs[leaf];
            } else {
                let ch = nodes[id].children.clone();
                let lo = nodes[ch.start].leaves.start;
                let hi = nodes[ch.end - 1].leaves.end;
                let prob = ch.clone().map(|c| nodes[c].prob).sum();
                nodes[id].leaves = lo..hi;
                nodes[id].prob = prob;
            }
        }

        Ok(Self {
            horizon,
            nodes,
            offsets,
            branching: children.to_vec(),
        })
    }

    /// One-period tree with the given leaf probabilities.
    pub fn one_period(probs: &[f64]) -> Result<Self> {
        Self::new(&[vec![probs.len()]], probs)
    }

    /// Homogeneous tree with `branching` children per node and uniform leaf probabilities.
    pub fn uniform(horizon: usize, branching: usize) -> Result<Self> {
        let children: Vec<Vec<usize>> = (0..horizon)
            .map(|t| vec![branching; branching.pow(t as u32)])
            .collect();
        let n = branching.pow(horizon as u32);
        Self::new(&children, &vec![1.0 / n as f64; n])
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of non-terminal nodes; these carry predictable values.
    pub fn num_inner(&self) -> usize {
        self.offsets[self.horizon]
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.len() - self.num_inner()
    }

    /// Per-time child counts as passed to [`FiltrationTree::new`].
    pub fn branching(&self) -> &[Vec<usize>] {
        &self.branching
    }

    pub fn nodes_at(&self, t: usize) -> Range<usize> {
        self.offsets[t]..self.offsets[t + 1]
    }

    pub fn check_time(&self, t: usize) -> Result<()> {
        if t > self.horizon {
            Err(Error::TimeOutOfRange {
                time: t,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    pub fn time(&self, node: usize) -> usize {
        self.nodes[node].time
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.nodes[node].parent
    }

    pub fn children(&self, node: usize) -> Range<usize> {
        self.nodes[node].children.clone()
    }

    /// Leaf indices (not node ids) below `node`.
    pub fn leaves_under(&self, node: usize) -> Range<usize> {
        self.nodes[node].leaves.clone()
    }

    pub fn leaf_node(&self, leaf: usize) -> usize {
        self.num_inner() + leaf
    }

    /// Unconditional probability of the atom `node`.
    pub fn prob(&self, node: usize) -> f64 {
        self.nodes[node].prob
    }

    /// P(child | parent).
    pub fn cond_prob(&self, child: usize) -> f64 {
        let parent = self.nodes[child].parent.expect("root has no parent");
        self.nodes[child].prob / self.nodes[parent].prob
    }

    pub fn leaf_probs(&self) -> Vec<f64> {
        (self.num_inner()..self.num_nodes())
            .map(|n| self.nodes[n].prob)
            .collect()
    }

    /// The time-`t` ancestor of `node` (itself when `t` equals its time).
    pub fn ancestor_at(&self, mut node: usize, t: usize) -> usize {
        assert!(t <= self.nodes[node].time, "ancestor time after node time");
        while self.nodes[node].time > t {
            node = self.nodes[node].parent.unwrap();
        }
        node
    }

    /// Inner nodes of the subtree rooted at `node`, including `node` itself if inner.
    pub fn inner_subtree(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut layer = node..node + 1;
        while layer.start < self.num_inner() {
            out.extend(layer.clone());
            let lo = self.nodes[layer.start].children.start;
            let hi = self.nodes[layer.end - 1].children.end;
            layer = lo..hi;
        }
        out
    }

    /// E[x] for a leaf-indexed random variable.
    pub fn expect(&self, x: &[f64]) -> f64 {
        let base = self.num_inner();
        x.iter()
            .enumerate()
            .map(|(i, v)| self.nodes[base + i].prob * v)
            .sum()
    }

    /// Weighted average of a leaf vector over the leaves under `node`.
    pub fn expect_at(&self, node: usize, x: &[f64]) -> f64 {
        let base = self.num_inner();
        let sum: f64 = self
            .leaves_under(node)
            .map(|l| self.nodes[base + l].prob * x[l])
            .sum();
        sum / self.nodes[node].prob
    }
}
