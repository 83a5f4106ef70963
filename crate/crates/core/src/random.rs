//! Seeded random scenarios and candidate price systems.
//!
//! Everything is driven by `ChaCha8Rng`, so a seed fixes the output bit for bit
//! on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::AdaptedProcess;
use crate::scenario::{AgentSpec, Preference, PreferenceKind, Scenario};
use crate::tree::FiltrationTree;

pub const MAX_HORIZON: usize = 6;
pub const MAX_BRANCHING: usize = 4;
pub const MAX_ASSETS: usize = 4;
pub const MAX_AGENTS: usize = 5;

/// Shape of a random scenario. Each inner node gets between 2 and
/// `max_branching` children (exactly 1 when `max_branching` is 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub horizon: usize,
    pub max_branching: usize,
    pub d1: usize,
    pub d2: usize,
    pub agents: usize,
    pub kind: PreferenceKind,
}

impl RandomParams {
    pub fn check(&self) -> Result<()> {
        let fail = |what: String| Err(Error::Bounds(what));
        if !(1..=MAX_HORIZON).contains(&self.horizon) {
            return fail(format!("horizon {} not in 1..={MAX_HORIZON}", self.horizon));
        }
        if !(1..=MAX_BRANCHING).contains(&self.max_branching) {
            return fail(format!("branching {} not in 1..={MAX_BRANCHING}", self.max_branching));
        }
        if self.d1 > MAX_ASSETS || self.d2 > MAX_ASSETS || self.d1 + self.d2 == 0 {
            return fail(format!("asset counts d1 = {}, d2 = {} must be ≤ {MAX_ASSETS} with d1 + d2 ≥ 1", self.d1, self.d2));
        }
        if !(1..=MAX_AGENTS).contains(&self.agents) {
            return fail(format!("agent count {} not in 1..={MAX_AGENTS}", self.agents));
        }
        Ok(())
    }

    /// Random shape with every dimension at most the given caps.
    pub fn sample(rng: &mut impl Rng, horizon: usize, branching: usize, assets: usize, agents: usize, kind: PreferenceKind) -> Self {
        let d1 = rng.random_range(0..=assets);
        let d2 = if d1 == 0 {
            rng.random_range(1..=assets)
        } else {
            rng.random_range(0..=assets)
        };
        Self {
            horizon: rng.random_range(1..=horizon),
            max_branching: if branching <= 1 { 1 } else { rng.random_range(2..=branching) },
            d1,
            d2,
            agents: rng.random_range(1..=agents),
            kind,
        }
    }
}

/// Splits `total` into `k` positive shares.
fn split(rng: &mut impl Rng, total: f64, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let sum: f64 = w.iter().sum();
    w.iter().map(|x| total * x / sum).collect()
}

fn random_tree(rng: &mut impl Rng, horizon: usize, max_branching: usize) -> Result<FiltrationTree> {
    let mut children = Vec::with_capacity(horizon);
    let mut width = 1;
    for _ in 0..horizon {
        let layer: Vec<usize> = (0..width)
            .map(|_| if max_branching == 1 { 1 } else { rng.random_range(2..=max_branching) })
            .collect();
        width = layer.iter().sum();
        children.push(layer);
    }
    // Leaf probabilities as products of conditional probabilities.
    let mut probs = vec![1.0];
    for layer in &children {
        let mut next = Vec::new();
        for (p, &c) in probs.iter().zip(layer) {
            let w: Vec<f64> = (0..c).map(|_| rng.random_range(0.5..1.5)).collect();
            let sum: f64 = w.iter().sum();
            next.extend(w.iter().map(|x| p * x / sum));
        }
        probs = next;
    }
    FiltrationTree::new(&children, &probs)
}

/// Martingale with nodewise-centred Gaussian increments.
fn random_martingale(rng: &mut impl Rng, tree: &FiltrationTree, dim: usize) -> AdaptedProcess {
    let mut m = AdaptedProcess::zeros(tree, dim);
    let scales: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..1.0)).collect();
    for n in 0..tree.num_inner() {
        let kids: Vec<usize> = tree.children(n).collect();
        for (j, scale) in scales.iter().enumerate() {
            let normal = Normal::new(0.0, *scale).expect("positive scale");
            let inc: Vec<f64> = kids.iter().map(|_| normal.sample(rng)).collect();
            let mean: f64 = kids.iter().zip(&inc).map(|(&c, x)| tree.cond_prob(c) * x).sum();
            for (&c, x) in kids.iter().zip(&inc) {
                m.set(c, j, m.get(n, j) + x - mean);
            }
        }
    }
    m
}

pub fn generate_random_scenario(seed: u64, params: &RandomParams) -> Result<Scenario> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = random_tree(&mut rng, params.horizon, params.max_branching)?;
    let leaves = tree.num_leaves();
    let m_fin = random_martingale(&mut rng, &tree, params.d1);
    let s0_fin: Vec<f64> = (0..params.d1).map(|_| rng.random_range(0.5..2.0)).collect();
    let dividends: Vec<Vec<f64>> = (0..leaves)
        .map(|_| (0..params.d2).map(|_| rng.random_range(0.0..3.0)).collect())
        .collect();
    let mut agents: Vec<AgentSpec> = (0..params.agents)
        .map(|_| AgentSpec {
            eta2: (0..params.d2).map(|_| rng.random_range(0.0..2.0)).collect(),
            xi_n: (0..leaves).map(|_| rng.random_range(0.0..2.0)).collect(),
            preference: Preference::Quadratic { gamma: 0.0 },
        })
        .collect();

    let mut s = Scenario {
        tree,
        d1: params.d1,
        d2: params.d2,
        s0_fin,
        m_fin,
        dividends,
        agents: agents.clone(),
    };
    let xi_bar = s.aggregate_endowment();
    let max = xi_bar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match params.kind {
        PreferenceKind::Quadratic => {
            let gamma_bar = max + rng.random_range(0.5..3.0);
            for (a, g) in agents.iter_mut().zip(split(&mut rng, gamma_bar, params.agents)) {
                a.preference = Preference::Quadratic { gamma: g };
            }
        }
        PreferenceKind::LinearMv => {
            let spread = (max - s.tree.expect(&xi_bar)).max(1e-3);
            let total = if rng.random_bool(0.8) {
                spread * rng.random_range(1.05..3.0)
            } else {
                spread * rng.random_range(0.1..0.95)
            };
            for (a, l) in agents.iter_mut().zip(split(&mut rng, total, params.agents)) {
                a.preference = Preference::LinearMv { lambda: l };
            }
        }
    }
    s.agents = agents;
    Ok(s)
}

/// Sub-seed for the `index`-th scenario of a stream; independent of scheduling.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.random()
}

/// A random price system consistent with the primitives: S⁽¹⁾ = S⁽¹⁾_0 + M⁽¹⁾ + A with a
/// random predictable drift A, and S⁽²⁾ random before T with S⁽²⁾_T = D⁽²⁾.
pub fn random_candidate_prices(rng: &mut impl Rng, s: &Scenario, scale: f64) -> AdaptedProcess {
    let tree = &s.tree;
    let mut p = AdaptedProcess::zeros(tree, s.dim());
    for j in 0..s.d1 {
        p.set(0, j, s.s0_fin[j]);
    }
    for n in 0..tree.num_inner() {
        let drift: Vec<f64> = (0..s.d1).map(|_| rng.random_range(-scale..scale)).collect();
        for c in tree.children(n) {
            for (j, a) in drift.iter().enumerate() {
                p.set(c, j, p.get(n, j) + s.m_fin.get(c, j) - s.m_fin.get(n, j) + a);
            }
        }
        for j in 0..s.d2 {
            p.set(n, s.d1 + j, rng.random_range(-scale..scale) + 1.0);
        }
    }
    for leaf in 0..tree.num_leaves() {
        for j in 0..s.d2 {
            p.set(tree.leaf_node(leaf), s.d1 + j, s.dividends[leaf][j]);
        }
    }
    p
}

/// Perturbs `prices` while keeping the primitives: a random predictable drift on the
/// financial assets and random shifts of productive prices before T.
pub fn perturb_prices(rng: &mut impl Rng, s: &Scenario, prices: &AdaptedProcess, scale: f64) -> AdaptedProcess {
    let tree = &s.tree;
    let mut p = prices.clone();
    let mut shift = AdaptedProcess::zeros(tree, s.d1);
    for n in 0..tree.num_inner() {
        let drift: Vec<f64> = (0..s.d1).map(|_| rng.random_range(-scale..scale)).collect();
        for c in tree.children(n) {
            for (j, a) in drift.iter().enumerate() {
                shift.set(c, j, shift.get(n, j) + a);
            }
        }
        for j in 0..s.d2 {
            p.set(n, s.d1 + j, p.get(n, s.d1 + j) + rng.random_range(-scale..scale));
        }
    }
    for n in 0..tree.num_nodes() {
        for j in 0..s.d1 {
            p.set(n, j, p.get(n, j) + shift.get(n, j));
        }
    }
    p
}
