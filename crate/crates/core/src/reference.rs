//! Small hand-checkable markets used by tests, the acceptance suite and documentation.

use crate::process::AdaptedProcess;
use crate::scenario::{AgentSpec, Preference, Scenario};
use crate::tree::FiltrationTree;

pub fn quadratic_agent(eta2: &[f64], xi_n: &[f64], gamma: f64) -> AgentSpec {
    AgentSpec {
        eta2: eta2.to_vec(),
        xi_n: xi_n.to_vec(),
        preference: Preference::Quadratic { gamma },
    }
}

pub fn mv_agent(eta2: &[f64], xi_n: &[f64], lambda: f64) -> AgentSpec {
    AgentSpec {
        eta2: eta2.to_vec(),
        xi_n: xi_n.to_vec(),
        preference: Preference::LinearMv { lambda },
    }
}

/// One period, no financial asset, one productive asset paying `dividends`.
pub fn single_productive(probs: &[f64], dividends: &[f64], agents: Vec<AgentSpec>) -> Scenario {
    let tree = FiltrationTree::one_period(probs).expect("valid one-period tree");
    Scenario {
        m_fin: AdaptedProcess::zeros(&tree, 0),
        tree,
        d1: 0,
        d2: 1,
        s0_fin: vec![],
        dividends: dividends.iter().map(|d| vec![*d]).collect(),
        agents,
    }
}

/// One period, one financial asset with initial price `s0` and martingale increments `dm`.
pub fn single_financial(probs: &[f64], s0: f64, dm: &[f64], agents: Vec<AgentSpec>) -> Scenario {
    let tree = FiltrationTree::one_period(probs).expect("valid one-period tree");
    let m = AdaptedProcess::scalar(std::iter::once(0.0).chain(dm.iter().copied()).collect());
    Scenario {
        dividends: vec![vec![]; tree.num_leaves()],
        tree,
        d1: 1,
        d2: 0,
        s0_fin: vec![s0],
        m_fin: m,
        agents,
    }
}

/// Coin toss with D = (2, 1), one agent holding the asset with bliss point 10.
pub fn coin_toss() -> Scenario {
    single_productive(&[0.5, 0.5], &[2.0, 1.0], vec![quadratic_agent(&[1.0], &[0.0, 0.0], 10.0)])
}

/// The coin-toss market with a linear mean–variance agent of risk tolerance 1.
pub fn coin_toss_mv() -> Scenario {
    single_productive(&[0.5, 0.5], &[2.0, 1.0], vec![mv_agent(&[1.0], &[0.0, 0.0], 1.0)])
}

/// Aggregate density null at time 0: γ̄ = 2, Ξ̄ = (3, 1), with a riskless dividend.
pub fn vanishing_density() -> Scenario {
    single_productive(&[0.5, 0.5], &[1.0, 1.0], vec![quadratic_agent(&[1.0], &[2.0, 0.0], 2.0)])
}

/// As [`vanishing_density`] but with D = (2, 1), so E[H̄ D] ≠ 0 and no equilibrium exists.
pub fn vanishing_density_risky() -> Scenario {
    single_productive(&[0.5, 0.5], &[2.0, 1.0], vec![quadratic_agent(&[1.0], &[1.0, 0.0], 2.0)])
}

/// One financial asset with ΔM = ±1, γ̄ = 4 and Ξ̄ = 2 + M₁.
pub fn financial_coin() -> Scenario {
    single_financial(&[0.5, 0.5], 0.0, &[1.0, -1.0], vec![quadratic_agent(&[], &[3.0, 1.0], 4.0)])
}

/// Two-period binary tree with ΔS₂ = −ΔS₁ on every path: holding one unit
/// throughout has zero terminal gains but a nonzero gains path.
pub fn cancellation_market() -> (FiltrationTree, AdaptedProcess) {
    let tree = FiltrationTree::uniform(2, 2).expect("valid binary tree");
    let prices = AdaptedProcess::scalar(vec![0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    (tree, prices)
}
