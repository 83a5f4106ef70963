//! Quadratic-utility equilibria.
//!
//! Agents maximise E[2γ_k V − V²]. Prices are built from the aggregate
//! density Z̄_t = E[H̄ | F_t], H̄ = γ̄ − Ξ̄, either by the explicit formulas
//! (Z̄ never vanishes) or by the restarted-exponential construction, and any
//! candidate price system can be verified from first principles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mvh::MvhMarket;
use crate::process::{AdaptedProcess, PredictableProcess};
use crate::scenario::{Preference, Scenario};
use crate::stoch::{self, bracket_at};
use crate::Tolerances;

/// Aggregate quantities of the representative agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateState {
    pub gamma_bar: f64,
    pub xi_bar: Vec<f64>,
    pub h_bar: Vec<f64>,
    pub z_bar: AdaptedProcess,
    /// Aggregate traded endowment; zero on the financial assets.
    pub eta_bar: Vec<f64>,
}

pub fn aggregate(s: &Scenario) -> Result<AggregateState> {
    let mut gamma_bar = 0.0;
    for a in &s.agents {
        match a.preference {
            Preference::Quadratic { gamma } => gamma_bar += gamma,
            Preference::LinearMv { .. } => {
                return Err(Error::Preferences("quadratic construction needs quadratic agents".into()))
            }
        }
    }
    Ok(aggregate_with_gamma(s, gamma_bar))
}

/// Aggregate state for a given total bliss point, regardless of the agents' preference family.
pub fn aggregate_with_gamma(s: &Scenario, gamma_bar: f64) -> AggregateState {
    let xi_bar = s.aggregate_endowment();
    let h_bar: Vec<f64> = xi_bar.iter().map(|x| gamma_bar - x).collect();
    AggregateState {
        gamma_bar,
        z_bar: stoch::martingale_from_terminal(&s.tree, &h_bar),
        xi_bar,
        h_bar,
        eta_bar: s.eta_bar(),
    }
}

/// Financial price paths S^j = S^j_0 + M^j + A^j, with the drift increment at each
/// inner node supplied by `drift(node, j)`.
fn financial_prices(s: &Scenario, mut drift: impl FnMut(usize, usize) -> f64) -> AdaptedProcess {
    let tree = &s.tree;
    let mut out = AdaptedProcess::zeros(tree, s.d1);
    out.at_mut(0).copy_from_slice(&s.s0_fin);
    for c in 1..tree.num_nodes() {
        let n = tree.parent(c).unwrap();
        for j in 0..s.d1 {
            let v = out.get(n, j) + s.m_fin.get(c, j) - s.m_fin.get(n, j) + drift(n, j);
            out.set(c, j, v);
        }
    }
    out
}

/// −Σ_i ξ^i/Z̄ Δ⟨M^i, M^j⟩ at `node`, or zero where Z̄ vanishes.
fn drift_increment(s: &Scenario, agg: &AggregateState, xi: &PredictableProcess, node: usize, j: usize, tol: &Tolerances) -> f64 {
    let z = agg.z_bar.value(node);
    if tol.is_zero(z) {
        return 0.0;
    }
    let sum: f64 = (0..s.d1)
        .map(|i| xi.get(node, i) * bracket_at(&s.tree, &s.m_fin, i, &s.m_fin, j, node))
        .sum();
    -sum / z
}

/// Explicit equilibrium prices when Z̄ is nonzero at every node.
pub fn construct_regular(s: &Scenario, tol: &Tolerances) -> Result<AdaptedProcess> {
    let agg = aggregate(s)?;
    construct_regular_from(s, &agg, tol)
}

pub(crate) fn construct_regular_from(s: &Scenario, agg: &AggregateState, tol: &Tolerances) -> Result<AdaptedProcess> {
    let tree = &s.tree;
    if let Some(node) = (0..tree.num_nodes()).find(|&n| tol.is_zero(agg.z_bar.value(n))) {
        return Err(Error::DensityVanishes {
            node,
            value: agg.z_bar.value(node),
        });
    }
    let gkw = stoch::gkw_decompose(tree, &agg.z_bar, &s.m_fin, tol);
    let fin = financial_prices(s, |n, j| drift_increment(s, agg, &gkw.xi, n, j, tol));
    let mut parts = vec![fin];
    for j in 0..s.d2 {
        let hd: Vec<f64> = agg.h_bar.iter().zip(s.dividend(j)).map(|(h, d)| h * d).collect();
        let num = stoch::martingale_from_terminal(tree, &hd);
        parts.push(AdaptedProcess::scalar(
            (0..tree.num_nodes()).map(|n| num.value(n) / agg.z_bar.value(n)).collect(),
        ));
    }
    let refs: Vec<&AdaptedProcess> = parts.iter().collect();
    Ok(AdaptedProcess::stack(&refs))
}

/// Outcome of one necessary-condition test at a given asset and time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub asset: usize,
    pub time: usize,
    pub pass: bool,
    /// Largest offending value over the nodes where Z̄ vanishes (0 if none).
    pub worst: f64,
    /// Nodes where the condition is tested.
    pub tested_nodes: usize,
}

/// Nodewise necessary conditions for existence when Z̄ may vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryConditions {
    /// On {Z̄_{t−1} = 0}: ξ̄^i_t Δ⟨M^i⟩_t = 0, for financial asset `i` and t = 1..T.
    pub cond_xi: Vec<ConditionEntry>,
    /// On {Z̄_t = 0}: E[H̄ D^j | F_t] = 0, for productive asset `j` (0-based among
    /// productive assets) and t = 0..T−1.
    pub cond_g: Vec<ConditionEntry>,
}

impl NecessaryConditions {
    pub fn pass(&self) -> bool {
        self.cond_xi.iter().chain(&self.cond_g).all(|e| e.pass)
    }

    /// Human-readable description of the first failing condition.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(e) = self.cond_xi.iter().find(|e| !e.pass) {
            return Some(format!(
                "financial asset {} at time {}: xi * d<M> = {:.3e} where the aggregate density vanishes",
                e.asset, e.time, e.worst
            ));
        }
        self.cond_g.iter().find(|e| !e.pass).map(|e| {
            format!(
                "productive asset {} at time {}: E[H D | F] = {:.3e} where the aggregate density vanishes",
                e.asset, e.time, e.worst
            )
        })
    }

    pub fn density_vanishes(&self) -> bool {
        self.cond_xi.iter().chain(&self.cond_g).any(|e| e.tested_nodes > 0)
    }
}

pub fn check_necessary_conditions(s: &Scenario, tol: &Tolerances) -> Result<NecessaryConditions> {
    let agg = aggregate(s)?;
    Ok(necessary_conditions_from(s, &agg, tol))
}

pub(crate) fn necessary_conditions_from(s: &Scenario, agg: &AggregateState, tol: &Tolerances) -> NecessaryConditions {
    let tree = &s.tree;
    let horizon = tree.horizon();
    let zero_nodes = |t: usize| tree.nodes_at(t).filter(|&n| tol.is_zero(agg.z_bar.value(n))).collect::<Vec<_>>();

    let gkw = stoch::gkw_decompose(tree, &agg.z_bar, &s.m_fin, tol);
    let mut cond_xi = Vec::new();
    for t in 1..=horizon {
        let nodes = zero_nodes(t - 1);
        for i in 0..s.d1 {
            let worst = nodes
                .iter()
                .map(|&n| (gkw.xi.get(n, i) * bracket_at(tree, &s.m_fin, i, &s.m_fin, i, n)).abs())
                .fold(0.0, f64::max);
            cond_xi.push(ConditionEntry {
                asset: i,
                time: t,
                pass: worst <= tol.tol,
                worst,
                tested_nodes: nodes.len(),
            });
        }
    }

    let mut cond_g = Vec::new();
    let hd: Vec<AdaptedProcess> = (0..s.d2)
        .map(|j| {
            let x: Vec<f64> = agg.h_bar.iter().zip(s.dividend(j)).map(|(h, d)| h * d).collect();
            stoch::martingale_from_terminal(tree, &x)
        })
        .collect();
    for t in 0..horizon {
        let nodes = zero_nodes(t);
        for (j, g) in hd.iter().enumerate() {
            let worst = nodes.iter().map(|&n| g.value(n).abs()).fold(0.0, f64::max);
            cond_g.push(ConditionEntry {
                asset: j,
                time: t,
                pass: worst <= tol.tol,
                worst,
                tested_nodes: nodes.len(),
            });
        }
    }
    NecessaryConditions { cond_xi, cond_g }
}

/// Equilibrium prices built with the restarted exponentials of N̄; valid whenever
/// the necessary conditions hold, including when Z̄ hits zero.
pub fn construct_degenerate(s: &Scenario, tol: &Tolerances) -> Result<AdaptedProcess> {
    let agg = aggregate(s)?;
    construct_degenerate_from(s, &agg, tol)
}

pub(crate) fn construct_degenerate_from(s: &Scenario, agg: &AggregateState, tol: &Tolerances) -> Result<AdaptedProcess> {
    let tree = &s.tree;
    let conditions = necessary_conditions_from(s, agg, tol);
    if let Some(msg) = conditions.first_failure() {
        return Err(Error::NecessaryConditions(msg));
    }
    let gkw = stoch::gkw_decompose(tree, &agg.z_bar, &s.m_fin, tol);
    let fin = financial_prices(s, |n, j| drift_increment(s, agg, &gkw.xi, n, j, tol));

    let mut prod = AdaptedProcess::zeros(tree, s.d2);
    for t in 0..=tree.horizon() {
        let restarted = stoch::restarted_exponential(tree, &agg.z_bar, t, tol);
        let check = stoch::is_martingale(tree, &restarted, tol);
        if !check.pass {
            return Err(Error::Precondition(format!(
                "restarted exponential from time {t} is not a martingale (drift {:.3e})",
                check.max_residual
            )));
        }
        let terminal = restarted.terminal(tree, 0);
        for j in 0..s.d2 {
            let x: Vec<f64> = terminal.iter().zip(s.dividend(j)).map(|(e, d)| e * d).collect();
            for n in tree.nodes_at(t) {
                prod.set(n, j, tree.expect_at(n, &x));
            }
        }
    }
    Ok(AdaptedProcess::stack(&[&fin, &prod]))
}

/// Which formula produced a price system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Regular,
    Degenerate,
}

/// Agent k's optimal strategy ϑ̂^k = η^k + ϑ^MVH(γ_k − Ξ^k) and its hedging/investment split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndividualOptimum {
    pub strategy: PredictableProcess,
    /// ϑ^MVH(H^k).
    pub mvh_part: PredictableProcess,
    /// Conditional first-order residual of the MVH problem at the returned solution.
    pub optimality_gap: f64,
    pub decomposition: Option<Decomposition>,
}

/// ϑ̂^k =_S η^k − ϑ^ex(Ξ^k) + (γ_k − c_k) ϑ^MVH(1); available when ℓ > 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub c: f64,
    pub hedge: PredictableProcess,
    pub investment_weight: f64,
    /// Max gains-path distance between the decomposition and the direct optimum.
    pub gains_gap: f64,
}

fn bliss(s: &Scenario, k: usize) -> Result<f64> {
    match s.agents.get(k).map(|a| a.preference) {
        Some(Preference::Quadratic { gamma }) => Ok(gamma),
        Some(Preference::LinearMv { .. }) => Err(Error::Preferences(format!("agent {k} is not quadratic"))),
        None => Err(Error::AgentIndex {
            index: k,
            count: s.agents.len(),
        }),
    }
}

pub fn individual_optimal(s: &Scenario, prices: &AdaptedProcess, k: usize, tol: &Tolerances) -> Result<IndividualOptimum> {
    check_prices_shape(s, prices)?;
    let market = MvhMarket::new(&s.tree, prices, *tol);
    individual_optimal_in(s, &market, k, bliss(s, k)?)
}

/// Optimum of agent `k` with bliss point `gamma` in a prepared market.
pub fn individual_optimal_in(s: &Scenario, market: &MvhMarket, k: usize, gamma: f64) -> Result<IndividualOptimum> {
    let xi = s.total_endowment(k)?;
    let h: Vec<f64> = xi.iter().map(|x| gamma - x).collect();
    let sol = market.solve_mvh(&h);
    let eta = PredictableProcess::constant(&s.tree, &s.eta(k));
    let strategy = eta.axpy(1.0, &sol.theta);
    let optimality_gap = market.first_order_residual(&sol.theta, &h);

    let decomposition = if market.uniqueness_of_values() {
        let ex = market.solve_exmvh(&xi);
        let c = ex.c.unwrap_or(0.0);
        let weight = gamma - c;
        let (pure, _) = market.pure_investment();
        let composed = eta.axpy(-1.0, &ex.theta).axpy(weight, pure);
        let gains_gap = market.gains_path(&composed.axpy(-1.0, &strategy)).max_abs();
        Some(Decomposition {
            c,
            hedge: ex.theta,
            investment_weight: weight,
            gains_gap,
        })
    } else {
        None
    };

    Ok(IndividualOptimum {
        strategy,
        mvh_part: sol.theta,
        optimality_gap,
        decomposition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentativeCheck {
    /// Max gains-path distance between Σ_k ϑ̂^k and η̄ + ϑ^MVH(H̄).
    pub residual: f64,
    pub pass: bool,
    /// Max gains-path size of ϑ^MVH(H̄); zero at an equilibrium.
    pub representative_mvh_size: f64,
}

pub fn representative_check(s: &Scenario, prices: &AdaptedProcess, tol: &Tolerances) -> Result<RepresentativeCheck> {
    check_prices_shape(s, prices)?;
    let agg = aggregate(s)?;
    let market = MvhMarket::new(&s.tree, prices, *tol);
    let mut total = PredictableProcess::zeros(&s.tree, s.dim());
    for k in 0..s.agents.len() {
        total = total.axpy(1.0, &individual_optimal_in(s, &market, k, bliss(s, k)?)?.strategy);
    }
    Ok(representative_from(s, &market, &agg, &total))
}

fn representative_from(s: &Scenario, market: &MvhMarket, agg: &AggregateState, total: &PredictableProcess) -> RepresentativeCheck {
    let rep = market.solve_mvh(&agg.h_bar).theta;
    let target = PredictableProcess::constant(&s.tree, &agg.eta_bar).axpy(1.0, &rep);
    let residual = market.gains_path(&total.axpy(-1.0, &target)).max_abs();
    RepresentativeCheck {
        residual,
        pass: residual <= market.tolerances().tol,
        representative_mvh_size: market.gains_path(&rep).max_abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Verdict {
    Equilibrium,
    NotEquilibrium(String),
    NonexistenceProven(String),
}

impl Verdict {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, Verdict::Equilibrium)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equilibrium => "Equilibrium",
            Verdict::NotEquilibrium(_) => "NotEquilibrium",
            Verdict::NonexistenceProven(_) => "NonexistenceProven",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Equilibrium => None,
            Verdict::NotEquilibrium(r) | Verdict::NonexistenceProven(r) => Some(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessFlags {
    pub gains: bool,
    pub values: bool,
}

/// Per-agent diagnostics in an equilibrium report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentDiagnostics {
    pub optimality_gap: f64,
    pub decomposition: Option<Decomposition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub prices: AdaptedProcess,
    pub z_bar: AdaptedProcess,
    pub agent_strategies: Vec<PredictableProcess>,
    pub agents: Vec<AgentDiagnostics>,
    /// Max gains-path distance between Σ_k ϑ̂^k and η̄.
    pub clearing_residual: f64,
    /// Max coordinate distance between Σ_k ϑ̂^k and η̄ (informative only).
    pub clearing_coordinate_residual: f64,
    /// Max over j of the martingale residual of Z̄ S^j.
    pub martingale_residual: f64,
    /// Distance of the prices from the primitives (initial financial prices,
    /// martingale parts, terminal dividends).
    pub primitives_residual: f64,
    pub representative: RepresentativeCheck,
    pub uniqueness: UniquenessFlags,
    /// Finite Ω: square integrability holds automatically.
    pub integrability: bool,
    /// Finite Ω: buy-and-hold strategies are always admissible.
    pub buy_and_hold_admissible: bool,
    pub necessary_conditions: NecessaryConditions,
    pub verdict: Verdict,
}

fn check_prices_shape(s: &Scenario, prices: &AdaptedProcess) -> Result<()> {
    if prices.dim() != s.dim() || prices.num_nodes() != s.tree.num_nodes() {
        return Err(Error::Dimension(format!(
            "prices must hold a {}-vector for each of the {} nodes",
            s.dim(),
            s.tree.num_nodes()
        )));
    }
    Ok(())
}

/// How far `prices` is from respecting the primitives: S⁽¹⁾_0, predictable
/// drift around M⁽¹⁾, and S⁽²⁾_T = D⁽²⁾.
pub fn primitives_residual(s: &Scenario, prices: &AdaptedProcess) -> f64 {
    let tree = &s.tree;
    let mut worst = 0.0f64;
    for j in 0..s.d1 {
        worst = worst.max((prices.get(0, j) - s.s0_fin[j]).abs());
        for n in 0..tree.num_inner() {
            let drifts: Vec<f64> = tree
                .children(n)
                .map(|c| (prices.get(c, j) - prices.get(n, j)) - (s.m_fin.get(c, j) - s.m_fin.get(n, j)))
                .collect();
            let lo = drifts.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = drifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
    }
    for j in 0..s.d2 {
        for (leaf, d) in s.dividend(j).iter().enumerate() {
            worst = worst.max((prices.get(tree.leaf_node(leaf), s.d1 + j) - d).abs());
        }
    }
    worst
}

/// Checks a candidate price system against the definition of an equilibrium:
/// unique individual optima, market clearing up to S-equivalence, and the
/// martingale property of Z̄ S.
pub fn verify_equilibrium(s: &Scenario, prices: &AdaptedProcess, tol: &Tolerances) -> Result<EquilibriumReport> {
    let agg = aggregate(s)?;
    verify_with_aggregate(s, prices, &agg, &|k| bliss(s, k), tol)
}

/// Verification against quadratic agents with bliss points `gammas(k)`;
/// shared with the linear mean–variance solver.
pub(crate) fn verify_with_aggregate(
    s: &Scenario,
    prices: &AdaptedProcess,
    agg: &AggregateState,
    gammas: &dyn Fn(usize) -> Result<f64>,
    tol: &Tolerances,
) -> Result<EquilibriumReport> {
    check_prices_shape(s, prices)?;
    let tree = &s.tree;
    let market = MvhMarket::new(tree, prices, *tol);

    let mut agent_strategies = Vec::with_capacity(s.agents.len());
    let mut agents = Vec::with_capacity(s.agents.len());
    let mut total = PredictableProcess::zeros(tree, s.dim());
    for k in 0..s.agents.len() {
        let opt = individual_optimal_in(s, &market, k, gammas(k)?)?;
        total = total.axpy(1.0, &opt.strategy);
        agents.push(AgentDiagnostics {
            optimality_gap: opt.optimality_gap,
            decomposition: opt.decomposition,
        });
        agent_strategies.push(opt.strategy);
    }

    let eta_bar = PredictableProcess::constant(tree, &agg.eta_bar);
    let excess = total.axpy(-1.0, &eta_bar);
    let clearing_residual = market.gains_path(&excess).max_abs();
    let clearing_coordinate_residual = excess.coords().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let martingale_residual = (0..s.dim())
        .map(|j| stoch::martingale_residual(tree, &agg.z_bar.mul(&prices.component(j))))
        .fold(0.0, f64::max);
    let primitives_residual = primitives_residual(s, prices);
    let representative = representative_from(s, &market, agg, &total);
    let uniqueness = UniquenessFlags {
        gains: market.uniqueness_of_gains(),
        values: market.uniqueness_of_values(),
    };
    let necessary_conditions = necessary_conditions_from(s, agg, tol);

    let worst_gap = agents.iter().map(|a| a.optimality_gap).fold(0.0, f64::max);
    let verdict = if primitives_residual > tol.tol {
        Verdict::NotEquilibrium(format!(
            "prices do not match the primitives (residual {primitives_residual:.3e})"
        ))
    } else if !uniqueness.gains {
        Verdict::NotEquilibrium("individual optima are not unique up to S-equivalence".into())
    } else if worst_gap > tol.tol {
        Verdict::NotEquilibrium(format!("individual optimisation did not converge (gap {worst_gap:.3e})"))
    } else if clearing_residual > tol.tol {
        Verdict::NotEquilibrium(format!("clearing fails (residual {clearing_residual:.3e})"))
    } else if martingale_residual > tol.tol {
        Verdict::NotEquilibrium(format!(
            "Z S is not a martingale (residual {martingale_residual:.3e})"
        ))
    } else {
        Verdict::Equilibrium
    };

    Ok(EquilibriumReport {
        prices: prices.clone(),
        z_bar: agg.z_bar.clone(),
        agent_strategies,
        agents,
        clearing_residual,
        clearing_coordinate_residual,
        martingale_residual,
        primitives_residual,
        representative,
        uniqueness,
        integrability: true,
        buy_and_hold_admissible: true,
        necessary_conditions,
        verdict,
    })
}

/// Result of the end-to-end quadratic solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum QuadraticOutcome {
    Constructed {
        construction: Construction,
        report: Box<EquilibriumReport>,
    },
    /// The necessary conditions fail, so no equilibrium exists.
    NonexistenceProven {
        reason: String,
        conditions: NecessaryConditions,
    },
}

/// Builds the equilibrium (regular formula when Z̄ never vanishes, restarted
/// construction otherwise) and verifies it.
pub fn solve_quadratic(s: &Scenario, tol: &Tolerances) -> Result<QuadraticOutcome> {
    let agg = aggregate(s)?;
    let conditions = necessary_conditions_from(s, &agg, tol);
    if let Some(reason) = conditions.first_failure() {
        return Ok(QuadraticOutcome::NonexistenceProven { reason, conditions });
    }
    let (construction, prices) = if conditions.density_vanishes() {
        (Construction::Degenerate, construct_degenerate_from(s, &agg, tol)?)
    } else {
        match construct_regular_from(s, &agg, tol) {
            Ok(p) => (Construction::Regular, p),
            Err(Error::DensityVanishes { .. }) => (Construction::Degenerate, construct_degenerate_from(s, &agg, tol)?),
            Err(e) => return Err(e),
        }
    };
    let report = verify_with_aggregate(s, &prices, &agg, &|k| bliss(s, k), tol)?;
    Ok(QuadraticOutcome::Constructed {
        construction,
        report: Box::new(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{self, quadratic_agent};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn with_s0(s: &Scenario, s0: f64) -> AdaptedProcess {
        AdaptedProcess::scalar(vec![s0, s.dividends[0][0], s.dividends[1][0]])
    }

    #[test]
    fn aggregate_examples() {
        let a = aggregate(&reference::coin_toss()).unwrap();
        assert_eq!(a.gamma_bar, 10.0);
        assert_eq!(a.h_bar, vec![8.0, 9.0]);
        assert_abs_diff_eq!(a.z_bar.value(0), 8.5);

        let s = reference::single_productive(&[0.5, 0.5], &[2.0, 1.0], vec![quadratic_agent(&[0.0], &[0.0, 0.0], 5.0)]);
        let a = aggregate(&s).unwrap();
        assert!((0..3).all(|n| a.z_bar.value(n) == 5.0));

        let a = aggregate(&reference::vanishing_density()).unwrap();
        assert_eq!(a.h_bar, vec![-1.0, 1.0]);
        assert_eq!(a.z_bar.value(0), 0.0);

        assert!(aggregate(&reference::coin_toss_mv()).is_err());
    }

    #[test]
    fn construct_regular_examples() {
        let s = reference::coin_toss();
        let p = construct_regular(&s, &tol()).unwrap();
        // one-period clearing: E[(D − S₀)(γ̄ − D)] = 0
        let oracle = (0.5 * 2.0 * 8.0 + 0.5 * 1.0 * 9.0) / (0.5 * 8.0 + 0.5 * 9.0);
        assert_abs_diff_eq!(oracle, 25.0 / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.value(0), 25.0 / 17.0, epsilon = 1e-14);
        assert_eq!((p.value(1), p.value(2)), (2.0, 1.0));

        // deterministic endowment: martingale prices
        let s = reference::single_productive(&[0.3, 0.7], &[2.0, 1.0], vec![quadratic_agent(&[0.0], &[1.0, 1.0], 5.0)]);
        let p = construct_regular(&s, &tol()).unwrap();
        assert_abs_diff_eq!(p.value(0), 0.3 * 2.0 + 0.7, epsilon = 1e-14);

        let s = reference::financial_coin();
        let p = construct_regular(&s, &tol()).unwrap();
        assert_abs_diff_eq!(p.value(0), 0.0);
        assert_abs_diff_eq!(p.value(1), 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p.value(2), -0.5, epsilon = 1e-14);

        assert!(matches!(
            construct_regular(&reference::vanishing_density(), &tol()),
            Err(Error::DensityVanishes { node: 0, .. })
        ));
    }

    #[test]
    fn necessary_conditions_examples() {
        let c = check_necessary_conditions(&reference::coin_toss(), &tol()).unwrap();
        assert!(c.pass() && !c.density_vanishes());

        let c = check_necessary_conditions(&reference::vanishing_density_risky(), &tol()).unwrap();
        assert!(!c.pass());
        assert_eq!(c.cond_g[0].time, 0);
        assert_abs_diff_eq!(c.cond_g[0].worst, 0.5);

        let c = check_necessary_conditions(&reference::vanishing_density(), &tol()).unwrap();
        assert!(c.pass() && c.density_vanishes());

        // financial asset correlated with H̄ while Z̄₀ = 0
        let s = reference::single_financial(&[0.5, 0.5], 0.0, &[1.0, -1.0], vec![quadratic_agent(&[], &[3.0, 1.0], 2.0)]);
        let c = check_necessary_conditions(&s, &tol()).unwrap();
        assert!(!c.cond_xi[0].pass);
        assert!(c.first_failure().unwrap().contains("financial asset 0"));
    }

    #[test]
    fn construct_degenerate_examples() {
        for s in [reference::coin_toss(), reference::financial_coin()] {
            let a = construct_regular(&s, &tol()).unwrap();
            let b = construct_degenerate(&s, &tol()).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-13);
        }
        let p = construct_degenerate(&reference::vanishing_density(), &tol()).unwrap();
        assert_abs_diff_eq!(p.value(0), 1.0, epsilon = 1e-15);
        assert!(matches!(
            construct_degenerate(&reference::vanishing_density_risky(), &tol()),
            Err(Error::NecessaryConditions(_))
        ));
    }

    #[test]
    fn individual_optimal_examples() {
        let s = reference::coin_toss();
        let p = construct_regular(&s, &tol()).unwrap();
        let opt = individual_optimal(&s, &p, 0, &tol()).unwrap();
        assert_abs_diff_eq!(opt.strategy.get(0, 0), 1.0, epsilon = 1e-12);
        let dec = opt.decomposition.unwrap();
        assert!(dec.gains_gap < 1e-12);

        let s = reference::financial_coin();
        let p = construct_regular(&s, &tol()).unwrap();
        let opt = individual_optimal(&s, &p, 0, &tol()).unwrap();
        assert_abs_diff_eq!(opt.strategy.get(0, 0), 0.0, epsilon = 1e-12);
        // E[ΔS H¹] computed directly
        assert_abs_diff_eq!(0.5 * 1.5 * 1.0 + 0.5 * -0.5 * 3.0, 0.0);

        // γ = c and attainable endowment: no speculative part
        let s = reference::single_productive(&[0.5, 0.5], &[2.0, 1.0], vec![quadratic_agent(&[0.0], &[2.0, 1.0], 0.0)]);
        let prices = with_s0(&s, 1.25);
        let market = MvhMarket::new(&s.tree, &prices, tol());
        let c = market.solve_exmvh(&[2.0, 1.0]).c.unwrap();
        let opt = individual_optimal_in(&s, &market, 0, c).unwrap();
        let dec = opt.decomposition.unwrap();
        assert_abs_diff_eq!(dec.investment_weight, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(opt.strategy.get(0, 0), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn representative_examples() {
        let base = reference::coin_toss();
        let p = construct_regular(&base, &tol()).unwrap();
        assert!(representative_check(&base, &p, &tol()).unwrap().pass);

        let split = reference::single_productive(
            &[0.5, 0.5],
            &[2.0, 1.0],
            vec![quadratic_agent(&[1.0], &[0.0, 0.0], 4.0), quadratic_agent(&[0.0], &[0.0, 0.0], 6.0)],
        );
        let p2 = construct_regular(&split, &tol()).unwrap();
        assert!(p.max_abs_diff(&p2) < 1e-14);
        let r = verify_equilibrium(&split, &p2, &tol()).unwrap();
        assert!(r.representative.pass);
        assert!(r.agent_strategies[0].max_abs_diff(&r.agent_strategies[1]) > 0.1);

        let off = with_s0(&base, 1.6);
        let r = representative_check(&base, &off, &tol()).unwrap();
        assert!(r.pass);
        assert!(r.representative_mvh_size > 1e-3);
    }

    #[test]
    fn verify_examples() {
        let s = reference::coin_toss();
        let r = verify_equilibrium(&s, &construct_regular(&s, &tol()).unwrap(), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Equilibrium);

        let r = verify_equilibrium(&s, &with_s0(&s, 1.6), &tol()).unwrap();
        match &r.verdict {
            Verdict::NotEquilibrium(reason) => assert!(reason.contains("clearing fails")),
            v => panic!("unexpected verdict {v:?}"),
        }
        // one-period demand: 1 + E[ΔS H]/E[ΔS²] with ΔS = (0.4, −0.6)
        let demand: f64 = 1.0 + (0.5 * 0.4 * 8.0 - 0.5 * 0.6 * 9.0) / (0.5 * 0.16 + 0.5 * 0.36);
        assert_abs_diff_eq!(r.clearing_coordinate_residual, (1.0 - demand).abs(), epsilon = 1e-12);

        let s = reference::vanishing_density();
        for s0 in [1.0, 0.5] {
            let r = verify_equilibrium(&s, &with_s0(&s, s0), &tol()).unwrap();
            assert_eq!(r.verdict, Verdict::Equilibrium, "S0 = {s0}");
        }

        // terminal condition violated
        let s = reference::coin_toss();
        let bad = AdaptedProcess::scalar(vec![25.0 / 17.0, 2.5, 1.0]);
        assert!(matches!(
            verify_equilibrium(&s, &bad, &tol()).unwrap().verdict,
            Verdict::NotEquilibrium(r) if r.contains("primitives")
        ));
    }

    #[test]
    fn solve_quadratic_outcomes() {
        match solve_quadratic(&reference::vanishing_density_risky(), &tol()).unwrap() {
            QuadraticOutcome::NonexistenceProven { reason, .. } => assert!(reason.contains("productive asset 0")),
            o => panic!("unexpected {o:?}"),
        }
        match solve_quadratic(&reference::vanishing_density(), &tol()).unwrap() {
            QuadraticOutcome::Constructed { construction, report } => {
                assert_eq!(construction, Construction::Degenerate);
                assert!(report.verdict.is_equilibrium());
            }
            o => panic!("unexpected {o:?}"),
        }
        match solve_quadratic(&reference::coin_toss(), &tol()).unwrap() {
            QuadraticOutcome::Constructed { construction, report } => {
                assert_eq!(construction, Construction::Regular);
                assert!(report.verdict.is_equilibrium());
            }
            o => panic!("unexpected {o:?}"),
        }
    }
}
