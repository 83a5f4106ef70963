//! Linear mean–variance equilibria.
//!
//! Agents maximise E[V] − Var[V]/(2λ_k). The equilibrium is the quadratic
//! equilibrium S(γ̄) for the aggregate bliss point γ̄ = Σλ_k + E[Ξ̄], provided
//! γ̄ exceeds γ̄₀ = max Ξ̄.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mvh::MvhMarket;
use crate::process::{AdaptedProcess, PredictableProcess};
use crate::quadratic::{self, Verdict};
use crate::scenario::{Preference, Scenario};
use crate::stoch::{self, bracket_at};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaBar {
    pub gamma_bar: f64,
    pub gamma_bar_0: f64,
    pub lambda_sum: f64,
    pub mean_xi_bar: f64,
    pub exists: bool,
}

fn lambdas(s: &Scenario) -> Result<Vec<f64>> {
    s.agents
        .iter()
        .enumerate()
        .map(|(k, a)| match a.preference {
            Preference::LinearMv { lambda } => Ok(lambda),
            Preference::Quadratic { .. } => Err(Error::Preferences(format!(
                "agent {k} has quadratic preferences; linear mean-variance agents expected"
            ))),
        })
        .collect()
}

fn lambda_of(s: &Scenario, k: usize) -> Result<f64> {
    if k >= s.agents.len() {
        return Err(Error::AgentIndex {
            index: k,
            count: s.agents.len(),
        });
    }
    match s.agents[k].preference {
        Preference::LinearMv { lambda } => Ok(lambda),
        Preference::Quadratic { .. } => Err(Error::Preferences(format!("agent {k} is not a mean-variance agent"))),
    }
}

/// γ̄ = Σλ_k + E[Ξ̄] and γ̄₀ = max Ξ̄; an equilibrium of the solved class exists iff γ̄ > γ̄₀.
pub fn gamma_bar_fixed_point(s: &Scenario, tol: &Tolerances) -> Result<GammaBar> {
    let lambda_sum: f64 = lambdas(s)?.iter().sum();
    let xi_bar = s.aggregate_endowment();
    if let Some((leaf, &value)) = xi_bar.iter().enumerate().find(|(_, v)| **v < -tol.tol) {
        return Err(Error::NegativeEndowment { leaf, value });
    }
    let mean_xi_bar = s.tree.expect(&xi_bar);
    let gamma_bar = lambda_sum + mean_xi_bar;
    let gamma_bar_0 = xi_bar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GammaBar {
        gamma_bar,
        gamma_bar_0,
        lambda_sum,
        mean_xi_bar,
        exists: gamma_bar > gamma_bar_0 + tol.tol,
    })
}

/// Whether the assets are strongly orthogonal to Z̄(γ̄₀); in that case prices are
/// martingales for every γ̄ and every λ profile is an equilibrium.
pub fn trivial_regime(s: &Scenario, gamma_bar_0: f64, tol: &Tolerances) -> bool {
    let agg = quadratic::aggregate_with_gamma(s, gamma_bar_0);
    let m = s.martingale_parts();
    (0..s.tree.num_inner()).all(|n| {
        (0..s.dim()).all(|j| tol.is_zero(bracket_at(&s.tree, &agg.z_bar, 0, &m, j, n)))
    })
}

/// (ℓ, c_k, ε_k²) and the efficient frontier y ↦ (c_k + (1−ℓ)y, sqrt(ε_k² + ℓ(1−ℓ)y²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierData {
    pub ell: f64,
    pub c: f64,
    pub eps2: f64,
}

impl FrontierData {
    pub fn mu(&self, y: f64) -> f64 {
        self.c + (1.0 - self.ell) * y
    }

    pub fn sigma(&self, y: f64) -> f64 {
        (self.eps2 + self.ell * (1.0 - self.ell) * y * y).max(0.0).sqrt()
    }

    pub fn point(&self, y: f64) -> (f64, f64) {
        (self.mu(y), self.sigma(y))
    }

    /// Frontier points at `n` evenly spaced y in [0, y_max].
    pub fn sample(&self, y_max: f64, n: usize) -> Vec<FrontierPoint> {
        (0..n)
            .map(|i| {
                let y = if n > 1 { y_max * i as f64 / (n - 1) as f64 } else { 0.0 };
                FrontierPoint {
                    y,
                    mean: self.mu(y),
                    std_dev: self.sigma(y),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub y: f64,
    pub mean: f64,
    pub std_dev: f64,
}

fn require_unique_values(market: &MvhMarket) -> Result<()> {
    if !market.uniqueness_of_values() {
        return Err(Error::Precondition(
            "prices violate uniqueness of value processes (pure investment replicates 1 or gains are not unique)".into(),
        ));
    }
    Ok(())
}

pub fn agent_frontier(s: &Scenario, prices: &AdaptedProcess, k: usize, tol: &Tolerances) -> Result<FrontierData> {
    let market = MvhMarket::new(&s.tree, prices, *tol);
    frontier_in(s, &market, k)
}

pub fn frontier_in(s: &Scenario, market: &MvhMarket, k: usize) -> Result<FrontierData> {
    require_unique_values(market)?;
    let xi = s.total_endowment(k)?;
    let ex = market.solve_exmvh(&xi);
    Ok(FrontierData {
        ell: market.ell(),
        c: ex.c.unwrap_or(0.0),
        eps2: ex.sq_error,
    })
}

/// ϑ^k(y) = y ϑ^MVH(1) + η^k − ϑ^ex(Ξ^k).
pub fn efficient_strategy(s: &Scenario, market: &MvhMarket, k: usize, y: f64) -> Result<PredictableProcess> {
    let xi = s.total_endowment(k)?;
    let ex = market.solve_exmvh(&xi);
    let eta = PredictableProcess::constant(&s.tree, &s.eta(k));
    let (pure, _) = market.pure_investment();
    Ok(eta.axpy(-1.0, &ex.theta).axpy(y, pure))
}

/// The optimal strategy ϑ^k(λ_k/ℓ) and y_k = λ_k/ℓ.
pub fn optimal_mv_strategy(s: &Scenario, prices: &AdaptedProcess, k: usize, tol: &Tolerances) -> Result<(f64, PredictableProcess)> {
    let market = MvhMarket::new(&s.tree, prices, *tol);
    optimal_in(s, &market, k)
}

fn optimal_in(s: &Scenario, market: &MvhMarket, k: usize) -> Result<(f64, PredictableProcess)> {
    require_unique_values(market)?;
    let y = lambda_of(s, k)? / market.ell();
    Ok((y, efficient_strategy(s, market, k, y)?))
}

/// Mean and variance of terminal wealth (ϑ − η^k)·S_T + Ξ^k.
pub fn wealth_moments(s: &Scenario, market: &MvhMarket, k: usize, theta: &PredictableProcess) -> Result<(f64, f64)> {
    let xi = s.total_endowment(k)?;
    let eta = PredictableProcess::constant(&s.tree, &s.eta(k));
    let g = market.terminal_gains(&theta.axpy(-1.0, &eta));
    let v: Vec<f64> = g.iter().zip(&xi).map(|(a, b)| a + b).collect();
    let mean = s.tree.expect(&v);
    let var = s.tree.expect(&v.iter().map(|x| (x - mean) * (x - mean)).collect::<Vec<_>>());
    Ok((mean, var))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyCheck {
    /// Recovered investment level y.
    pub y: f64,
    /// Gains-path distance between θ − η^k + ϑ^ex(Ξ^k) and y ϑ^MVH(1).
    pub path_residual: f64,
    /// max(|E[V] − μ(y)|, |Var[V] − σ(y)²|).
    pub frontier_residual: f64,
    pub pass: bool,
}

/// Tests whether `theta` is mean–variance efficient for agent `k`.
pub fn mv_efficiency_check(
    s: &Scenario,
    prices: &AdaptedProcess,
    theta: &PredictableProcess,
    k: usize,
    tol: &Tolerances,
) -> Result<EfficiencyCheck> {
    let market = MvhMarket::new(&s.tree, prices, *tol);
    efficiency_in(s, &market, theta, k)
}

pub fn efficiency_in(s: &Scenario, market: &MvhMarket, theta: &PredictableProcess, k: usize) -> Result<EfficiencyCheck> {
    let frontier = frontier_in(s, market, k)?;
    let tol = market.tolerances();
    let base = efficient_strategy(s, market, k, 0.0)?;
    let centred = theta.axpy(-1.0, &base);
    let (pure, _) = market.pure_investment();
    let g = market.terminal_gains(&centred);
    let g1 = market.terminal_gains(pure);
    let denom = s.tree.expect(&g1.iter().map(|x| x * x).collect::<Vec<_>>());
    let y = if denom > tol.tol {
        s.tree.expect(&g.iter().zip(&g1).map(|(a, b)| a * b).collect::<Vec<_>>()) / denom
    } else {
        0.0
    };
    let path_residual = market.gains_path(&centred.axpy(-y, pure)).max_abs();
    let (mean, var) = wealth_moments(s, market, k, theta)?;
    let sigma = frontier.sigma(y);
    let frontier_residual = (mean - frontier.mu(y)).abs().max((var - sigma * sigma).abs());
    Ok(EfficiencyCheck {
        y,
        path_residual,
        frontier_residual,
        pass: path_residual <= tol.tol && y >= -tol.tol && frontier_residual <= tol.tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointCheck {
    pub ell: f64,
    pub c_sum: f64,
    /// |γ̄ − Σ_k (c_k + λ_k/ℓ)|.
    pub fp_residual: f64,
    /// |(γ̄ − E[Ξ̄]) − (γ̄ − Σ_k c_k) ℓ|.
    pub identity_residual: f64,
    /// L₀ from the opportunity process, which must coincide with ℓ.
    pub opportunity_l0: f64,
}

pub fn verify_fixed_point(s: &Scenario, prices: &AdaptedProcess, gamma_bar: f64, tol: &Tolerances) -> Result<FixedPointCheck> {
    let market = MvhMarket::new(&s.tree, prices, *tol);
    fixed_point_in(s, &market, gamma_bar)
}

fn fixed_point_in(s: &Scenario, market: &MvhMarket, gamma_bar: f64) -> Result<FixedPointCheck> {
    require_unique_values(market)?;
    let lambdas = lambdas(s)?;
    let ell = market.ell();
    let mut c_sum = 0.0;
    let mut tilde = 0.0;
    for (k, lambda) in lambdas.iter().enumerate() {
        let c = market.solve_exmvh(&s.total_endowment(k)?).c.unwrap_or(0.0);
        c_sum += c;
        tilde += c + lambda / ell;
    }
    let xi_bar = s.aggregate_endowment();
    let mean_xi = s.tree.expect(&xi_bar);
    let h_bar: Vec<f64> = xi_bar.iter().map(|x| gamma_bar - x).collect();
    let opportunity = market.opportunity_process(&h_bar)?;
    Ok(FixedPointCheck {
        ell,
        c_sum,
        fp_residual: (gamma_bar - tilde).abs(),
        identity_residual: ((gamma_bar - mean_xi) - (gamma_bar - c_sum) * ell).abs(),
        opportunity_l0: opportunity.l.value(0),
    })
}

/// Which case of the linear mean–variance theory applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MvRegime {
    /// Some asset is not strongly orthogonal to Z̄(γ̄₀): S(γ̄) is injective in γ̄
    /// and the equilibrium of the solved class is unique.
    Unique,
    /// All assets are strongly orthogonal to Z̄(γ̄₀): prices are martingales
    /// and every λ profile equilibrates.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MvAgentReport {
    pub lambda: f64,
    pub c: f64,
    pub eps2: f64,
    /// y_k = λ_k/ℓ.
    pub y: f64,
    /// Equivalent quadratic bliss point c_k + y_k.
    pub gamma: f64,
    pub strategy: PredictableProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MvEquilibriumReport {
    pub gamma_bar: f64,
    pub gamma_bar_0: f64,
    pub exists: bool,
    pub regime: MvRegime,
    pub prices: Option<AdaptedProcess>,
    pub ell: Option<f64>,
    pub agents: Vec<MvAgentReport>,
    pub fixed_point: Option<FixedPointCheck>,
    /// Max gains-path distance between Σ_k ϑ^k(y_k) and η̄.
    pub clearing_residual: Option<f64>,
    /// Verdict of the quadratic verifier with bliss points γ_k = c_k + λ_k/ℓ.
    pub quadratic_verdict: Option<Verdict>,
    pub note: Option<String>,
}

pub fn solve_linear_mv(s: &Scenario, tol: &Tolerances) -> Result<MvEquilibriumReport> {
    let gb = gamma_bar_fixed_point(s, tol)?;
    let regime = if trivial_regime(s, gb.gamma_bar_0, tol) {
        MvRegime::Trivial
    } else {
        MvRegime::Unique
    };
    let mut report = MvEquilibriumReport {
        gamma_bar: gb.gamma_bar,
        gamma_bar_0: gb.gamma_bar_0,
        exists: gb.exists,
        regime,
        prices: None,
        ell: None,
        agents: Vec::new(),
        fixed_point: None,
        clearing_residual: None,
        quadratic_verdict: None,
        note: None,
    };
    if !gb.exists {
        report.note = Some(format!(
            "gamma_bar {} does not exceed gamma_bar_0 {}: no equilibrium of the form S(gamma_bar) with gamma_bar > gamma_bar_0",
            gb.gamma_bar, gb.gamma_bar_0
        ));
        return Ok(report);
    }

    let agg = quadratic::aggregate_with_gamma(s, gb.gamma_bar);
    let prices = quadratic::construct_regular_from(s, &agg, tol)?;
    let market = MvhMarket::new(&s.tree, &prices, *tol);
    require_unique_values(&market)?;
    let ell = market.ell();

    let mut total = PredictableProcess::zeros(&s.tree, s.dim());
    for (k, lambda) in lambdas(s)?.into_iter().enumerate() {
        let frontier = frontier_in(s, &market, k)?;
        let (y, strategy) = optimal_in(s, &market, k)?;
        total = total.axpy(1.0, &strategy);
        report.agents.push(MvAgentReport {
            lambda,
            c: frontier.c,
            eps2: frontier.eps2,
            y,
            gamma: frontier.c + y,
            strategy,
        });
    }
    let eta_bar = PredictableProcess::constant(&s.tree, &agg.eta_bar);
    report.clearing_residual = Some(market.gains_path(&total.axpy(-1.0, &eta_bar)).max_abs());
    report.fixed_point = Some(fixed_point_in(s, &market, gb.gamma_bar)?);

    let gammas: Vec<f64> = report.agents.iter().map(|a| a.gamma).collect();
    let quad = quadratic::verify_with_aggregate(s, &prices, &agg, &|k| Ok(gammas[k]), tol)?;
    report.quadratic_verdict = Some(quad.verdict);
    if regime == MvRegime::Trivial {
        report.note = Some("assets strongly orthogonal to the aggregate density: martingale prices, every risk-tolerance profile equilibrates".into());
    }
    report.ell = Some(ell);
    report.prices = Some(prices);
    Ok(report)
}

/// S(γ̄) for an arbitrary aggregate bliss point γ̄ > γ̄₀.
pub fn prices_for_gamma(s: &Scenario, gamma_bar: f64, tol: &Tolerances) -> Result<AdaptedProcess> {
    let agg = quadratic::aggregate_with_gamma(s, gamma_bar);
    quadratic::construct_regular_from(s, &agg, tol)
}

/// Martingale residual of every asset price; zero in the trivial regime.
pub fn price_drift(s: &Scenario, prices: &AdaptedProcess) -> f64 {
    (0..s.dim())
        .map(|j| stoch::martingale_residual(&s.tree, &prices.component(j)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{self, mv_agent};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn coin_mv(lambdas: &[f64]) -> Scenario {
        let agents = lambdas
            .iter()
            .enumerate()
            .map(|(k, l)| mv_agent(&[if k == 0 { 1.0 } else { 0.0 }], &[0.0, 0.0], *l))
            .collect();
        reference::single_productive(&[0.5, 0.5], &[2.0, 1.0], agents)
    }

    #[test]
    fn gamma_bar_examples() {
        let g = gamma_bar_fixed_point(&reference::coin_toss_mv(), &tol()).unwrap();
        assert_eq!((g.gamma_bar, g.gamma_bar_0, g.exists), (2.5, 2.0, true));

        let g = gamma_bar_fixed_point(&coin_mv(&[0.1]), &tol()).unwrap();
        assert_abs_diff_eq!(g.gamma_bar, 1.6);
        assert!(!g.exists);

        let s = reference::single_productive(&[0.2, 0.8], &[2.0, 1.0], vec![mv_agent(&[0.0], &[3.0, 3.0], 0.01)]);
        let g = gamma_bar_fixed_point(&s, &tol()).unwrap();
        assert_eq!(g.gamma_bar_0, 3.0);
        assert!(g.exists);

        let s = reference::single_productive(&[0.5, 0.5], &[2.0, 1.0], vec![mv_agent(&[0.0], &[-1.0, 0.0], 1.0)]);
        assert!(matches!(gamma_bar_fixed_point(&s, &tol()), Err(Error::NegativeEndowment { leaf: 0, .. })));
        assert!(matches!(gamma_bar_fixed_point(&reference::coin_toss(), &tol()), Err(Error::Preferences(_))));
    }

    #[test]
    fn solve_examples() {
        let r = solve_linear_mv(&reference::coin_toss_mv(), &tol()).unwrap();
        assert_eq!(r.regime, MvRegime::Unique);
        let p = r.prices.as_ref().unwrap();
        assert_abs_diff_eq!(p.value(0), 1.25, epsilon = 1e-13);
        assert_abs_diff_eq!(r.ell.unwrap(), 0.8, epsilon = 1e-13);
        assert_abs_diff_eq!(r.agents[0].c, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(r.agents[0].y, 1.25, epsilon = 1e-12);
        assert!(r.fixed_point.unwrap().fp_residual < 1e-12);
        assert!(r.clearing_residual.unwrap() < 1e-12);
        assert_eq!(r.quadratic_verdict, Some(Verdict::Equilibrium));

        // two agents sharing the market
        let s = reference::single_productive(
            &[0.5, 0.5],
            &[2.0, 1.0],
            vec![mv_agent(&[1.0], &[0.0, 0.0], 0.5), mv_agent(&[0.0], &[0.0, 0.0], 0.5)],
        );
        let r2 = solve_linear_mv(&s, &tol()).unwrap();
        assert_eq!(r2.gamma_bar, 2.5);
        assert!(r2.prices.unwrap().max_abs_diff(p) < 1e-14);
        assert!(r2.clearing_residual.unwrap() < 1e-12);
        let sum = r2.agents[0].strategy.get(0, 0) + r2.agents[1].strategy.get(0, 0);
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);

        let r = solve_linear_mv(&coin_mv(&[0.1]), &tol()).unwrap();
        assert!(!r.exists && r.prices.is_none());
    }

    #[test]
    fn deterministic_endowment_is_trivial() {
        let s = reference::single_productive(&[0.3, 0.7], &[2.0, 1.0], vec![mv_agent(&[0.0], &[1.0, 1.0], 0.7)]);
        let r = solve_linear_mv(&s, &tol()).unwrap();
        assert_eq!(r.regime, MvRegime::Trivial);
        assert_abs_diff_eq!(r.ell.unwrap(), 1.0, epsilon = 1e-13);
        assert!(price_drift(&s, r.prices.as_ref().unwrap()) < 1e-14);
        assert!(r.agents[0].strategy.coords().iter().all(|x| x.abs() < 1e-12));
        assert_eq!(r.quadratic_verdict, Some(Verdict::Equilibrium));
        let fp = r.fixed_point.unwrap();
        assert!(fp.identity_residual < 1e-12);
    }

    #[test]
    fn frontier_examples() {
        let s = reference::coin_toss_mv();
        let p = AdaptedProcess::scalar(vec![1.25, 2.0, 1.0]);
        let f = agent_frontier(&s, &p, 0, &tol()).unwrap();
        assert_abs_diff_eq!(f.ell, 0.8, epsilon = 1e-13);
        assert_abs_diff_eq!(f.c, 1.25, epsilon = 1e-12);
        assert!(f.eps2.abs() < 1e-20);
        for y in [0.0, 1.0, 3.0] {
            assert_abs_diff_eq!(f.mu(y), 1.25 + 0.2 * y, epsilon = 1e-12);
            assert_abs_diff_eq!(f.sigma(y), 0.4 * y, epsilon = 1e-9);
        }

        // martingale prices: the frontier is one point
        let mart = AdaptedProcess::scalar(vec![1.5, 2.0, 1.0]);
        let f = agent_frontier(&s, &mart, 0, &tol()).unwrap();
        assert_abs_diff_eq!(f.ell, 1.0, epsilon = 1e-13);
        assert_eq!(f.point(0.0), f.point(5.0));

        // endowment orthogonal to gains and constants
        let s4 = Scenario {
            agents: vec![mv_agent(&[0.0], &[1.0, -1.0, 1.0, -1.0], 1.0)],
            ..reference::single_productive(&[0.25; 4], &[2.0, 2.0, 0.0, 0.0], vec![])
        };
        let p4 = AdaptedProcess::scalar(vec![1.0, 2.0, 2.0, 0.0, 0.0]);
        let f = agent_frontier(&s4, &p4, 0, &tol()).unwrap();
        assert_abs_diff_eq!(f.c, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.eps2, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn optimal_strategy_examples() {
        let s = reference::coin_toss_mv();
        let p = AdaptedProcess::scalar(vec![1.25, 2.0, 1.0]);
        let (y, theta) = optimal_mv_strategy(&s, &p, 0, &tol()).unwrap();
        assert_abs_diff_eq!(y, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(theta.get(0, 0), 1.0, epsilon = 1e-12);

        let (y2, _) = optimal_mv_strategy(&coin_mv(&[2.0]), &p, 0, &tol()).unwrap();
        assert_abs_diff_eq!(y2, 2.0 * y, epsilon = 1e-12);

        let mart = AdaptedProcess::scalar(vec![1.5, 2.0, 1.0]);
        let (y, theta) = optimal_mv_strategy(&s, &mart, 0, &tol()).unwrap();
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-12);
        let market = MvhMarket::new(&s.tree, &mart, tol());
        assert!(market.pure_investment().0.coords().iter().all(|x| x.abs() < 1e-14));
        assert_abs_diff_eq!(theta.get(0, 0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn efficiency_examples() {
        let s = reference::coin_toss_mv();
        let p = AdaptedProcess::scalar(vec![1.3, 2.0, 1.0]);
        let market = MvhMarket::new(&s.tree, &p, tol());
        let (y, theta) = optimal_in(&s, &market, 0).unwrap();
        let c = efficiency_in(&s, &market, &theta, 0).unwrap();
        assert!(c.pass);
        assert_abs_diff_eq!(c.y, y, epsilon = 1e-10);

        let base = efficient_strategy(&s, &market, 0, 0.0).unwrap();
        let c = efficiency_in(&s, &market, &base, 0).unwrap();
        assert!(c.pass);
        assert!(c.y.abs() < 1e-12);

        let neg = efficient_strategy(&s, &market, 0, -1.0).unwrap();
        let c = efficiency_in(&s, &market, &neg, 0).unwrap();
        assert!(!c.pass);
        assert_abs_diff_eq!(c.y, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn fixed_point_examples() {
        let s = reference::coin_toss_mv();
        let p = AdaptedProcess::scalar(vec![1.25, 2.0, 1.0]);
        let fp = verify_fixed_point(&s, &p, 2.5, &tol()).unwrap();
        assert!(fp.fp_residual < 1e-12);
        assert!(fp.identity_residual < 1e-12);
        assert_abs_diff_eq!(fp.opportunity_l0, fp.ell, epsilon = 1e-12);
        // (2.5 − 1.5) = (2.5 − 1.25)·0.8
        assert_abs_diff_eq!(2.5 - 1.5, (2.5 - 1.25) * 0.8, epsilon = 1e-15);

        // off-equilibrium γ̄ breaks the fixed point
        let q = prices_for_gamma(&s, 3.0, &tol()).unwrap();
        assert!(verify_fixed_point(&s, &q, 3.0, &tol()).unwrap().fp_residual > 1e-3);
    }

    #[test]
    fn injective_in_gamma() {
        let s = reference::coin_toss_mv();
        let a = prices_for_gamma(&s, 2.5, &tol()).unwrap();
        let b = prices_for_gamma(&s, 2.6, &tol()).unwrap();
        assert!(a.max_abs_diff(&b) > 1e-4);
    }
}
