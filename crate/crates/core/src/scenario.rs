//! Market primitives and agents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::AdaptedProcess;
use crate::stoch;
use crate::tree::FiltrationTree;
use crate::Tolerances;

/// Preference functional of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preference {
    /// E[2γV − V²] with bliss point γ (any sign).
    Quadratic { gamma: f64 },
    /// E[V] − Var[V]/(2λ) with risk tolerance λ > 0.
    LinearMv { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    /// Units of each productive asset held at time 0.
    pub eta2: Vec<f64>,
    /// Non-traded terminal endowment, one value per leaf. Initial cash and
    /// financial-asset holdings are folded in here.
    pub xi_n: Vec<f64>,
    pub preference: Preference,
}

/// A finite market: the tree, `d1` financial assets given by initial price and
/// martingale part, `d2` productive assets given by terminal dividends, and the agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tree: FiltrationTree,
    pub d1: usize,
    pub d2: usize,
    pub s0_fin: Vec<f64>,
    /// Martingale parts M⁽¹⁾, dimension `d1`, null at the root.
    pub m_fin: AdaptedProcess,
    /// D⁽²⁾ per leaf, each of length `d2`.
    pub dividends: Vec<Vec<f64>>,
    pub agents: Vec<AgentSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Preference family shared by all agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceKind {
    Quadratic,
    LinearMv,
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.d1 + self.d2
    }

    /// Reports every violated invariant; an empty list means the scenario is usable.
    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut v = Vec::new();
        let tree = &self.tree;
        let leaves = tree.num_leaves();

        let probs = tree.leaf_probs();
        if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p <= 0.0) {
            v.push(format!("leaf probability {i} must be positive, got {}", probs[i]));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol.tol {
            v.push(format!("leaf probabilities sum to {total}, not 1"));
        }
        if self.d1 + self.d2 == 0 {
            v.push("at least one risky asset is required (d1 + d2 ≥ 1)".into());
        }
        if self.s0_fin.len() != self.d1 {
            v.push(format!("s0_fin has length {}, expected d1 = {}", self.s0_fin.len(), self.d1));
        }
        let m_ok = self.m_fin.dim() == self.d1
            && (self.d1 == 0 || self.m_fin.num_nodes() == tree.num_nodes());
        if !m_ok {
            v.push(format!(
                "m_fin must hold a {}-vector for each of the {} nodes",
                self.d1,
                tree.num_nodes()
            ));
        } else if self.d1 > 0 {
            if self.m_fin.at(0).iter().any(|x| x.abs() > tol.tol) {
                v.push("M_fin must be null at time 0".into());
            }
            // A martingale test is only meaningful once probabilities are sane.
            if total.is_finite() && total > 0.0 {
                let check = stoch::is_martingale(tree, &self.m_fin, tol);
                if !check.pass {
                    v.push(format!(
                        "M_fin not a martingale (max conditional drift {:.3e})",
                        check.max_residual
                    ));
                }
            }
        }
        if self.dividends.len() != leaves {
            v.push(format!("dividends has {} rows, expected one per leaf ({leaves})", self.dividends.len()));
        } else if let Some(i) = self.dividends.iter().position(|r| r.len() != self.d2) {
            v.push(format!("dividend row {i} has length {}, expected d2 = {}", self.dividends[i].len(), self.d2));
        }
        if self.agents.is_empty() {
            v.push("at least one agent is required".into());
        }
        for (k, a) in self.agents.iter().enumerate() {
            if a.eta2.len() != self.d2 {
                v.push(format!("agent {k}: eta2 has length {}, expected d2 = {}", a.eta2.len(), self.d2));
            }
            if a.xi_n.len() != leaves {
                v.push(format!("agent {k}: xi_n has length {}, expected {leaves}", a.xi_n.len()));
            }
            match a.preference {
                Preference::LinearMv { lambda } if lambda.is_nan() || lambda <= 0.0 => {
                    v.push(format!("agent {k}: lambda must be positive, got {lambda}"));
                }
                Preference::Quadratic { gamma } if !gamma.is_finite() => {
                    v.push(format!("agent {k}: gamma must be finite"));
                }
                _ => {}
            }
        }
        let finite = self.s0_fin.iter().all(|x| x.is_finite())
            && self.dividends.iter().flatten().all(|x| x.is_finite())
            && self.agents.iter().all(|a| {
                a.eta2.iter().chain(&a.xi_n).all(|x| x.is_finite())
            });
        if !finite {
            v.push("all numeric inputs must be finite".into());
        }
        ValidationReport { violations: v }
    }

    /// Common preference family, or an error when agents mix families.
    pub fn preference_kind(&self) -> Result<PreferenceKind> {
        let mut kinds = self.agents.iter().map(|a| match a.preference {
            Preference::Quadratic { .. } => PreferenceKind::Quadratic,
            Preference::LinearMv { .. } => PreferenceKind::LinearMv,
        });
        let first = kinds
            .next()
            .ok_or_else(|| Error::Preferences("no agents".into()))?;
        if kinds.any(|k| k != first) {
            return Err(Error::Preferences("agents mix quadratic and linear mean-variance preferences".into()));
        }
        Ok(first)
    }

    /// Ξ^k = η^{k,(2)}·D⁽²⁾ + Ξ^{k,n}, per leaf.
    pub fn total_endowment(&self, k: usize) -> Result<Vec<f64>> {
        let agent = self.agents.get(k).ok_or(Error::AgentIndex {
            index: k,
            count: self.agents.len(),
        })?;
        Ok(self
            .dividends
            .iter()
            .zip(&agent.xi_n)
            .map(|(d, xn)| d.iter().zip(&agent.eta2).map(|(a, b)| a * b).sum::<f64>() + xn)
            .collect())
    }

    /// Ξ̄ = Σ_k Ξ^k.
    pub fn aggregate_endowment(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.tree.num_leaves()];
        for k in 0..self.agents.len() {
            for (o, x) in out.iter_mut().zip(self.total_endowment(k).expect("valid index")) {
                *o += x;
            }
        }
        out
    }

    /// η^k as a full position vector (zeros on the financial assets).
    pub fn eta(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d1];
        out.extend_from_slice(&self.agents[k].eta2);
        out
    }

    /// η̄ = Σ_k η^k.
    pub fn eta_bar(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for a in &self.agents {
            for (o, e) in out[self.d1..].iter_mut().zip(&a.eta2) {
                *o += e;
            }
        }
        out
    }

    /// Terminal dividend of productive asset `j` (0-based within D⁽²⁾), per leaf.
    pub fn dividend(&self, j: usize) -> Vec<f64> {
        self.dividends.iter().map(|r| r[j]).collect()
    }

    /// Martingale part of every asset: M⁽¹⁾ for financial assets and
    /// E[D^j | F_t] for productive ones.
    pub fn martingale_parts(&self) -> AdaptedProcess {
        let mut parts: Vec<AdaptedProcess> = Vec::with_capacity(self.dim());
        for j in 0..self.d1 {
            parts.push(self.m_fin.component(j));
        }
        for j in 0..self.d2 {
            parts.push(stoch::martingale_from_terminal(&self.tree, &self.dividend(j)));
        }
        let refs: Vec<&AdaptedProcess> = parts.iter().collect();
        AdaptedProcess::stack(&refs)
    }
}
