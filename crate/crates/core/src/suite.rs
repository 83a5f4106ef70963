//! Seeded property suites over random scenarios.
//!
//! Each suite draws its instances from independent ChaCha streams, evaluates
//! them in parallel and merges the results in instance order, so a report
//! depends only on its configuration. Numbers are compared against brute-force
//! oracles built here from the raw tree, not through [`MvhMarket`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linear_mv;
use crate::mvh::MvhMarket;
use crate::process::{AdaptedProcess, PredictableProcess};
use crate::quadratic::{self, QuadraticOutcome};
use crate::random::{self, RandomParams};
use crate::scenario::{Preference, PreferenceKind, Scenario};
use crate::tree::FiltrationTree;
use crate::Tolerances;

/// Thresholds of the suite checks.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
pub const SPLIT_TOL: f64 = 1e-10;
pub const FRONTIER_TOL: f64 = 1e-7;
pub const LINEARITY_TOL: f64 = 1e-9;
pub const C_FORMULA_TOL: f64 = 1e-10;

const PERTURBATIONS: usize = 20;
const COMPETITORS: usize = 500;
const PROJECTION_COMPETITORS: usize = 100;
const FRONTIER_GRID: usize = 10;
const MAX_LISTED_FAILURES: usize = 20;

/// Size caps and seed of a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: usize,
    pub horizon: usize,
    pub branching: usize,
    /// Cap on the total number of assets d₁ + d₂.
    pub assets: usize,
    pub agents: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 200,
            horizon: 4,
            branching: 3,
            assets: 3,
            agents: 3,
        }
    }
}

/// Aggregated outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub threshold: f64,
    /// Largest observed value; booleans are recorded as 0 (pass) or 1 (fail).
    pub worst: f64,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub instances: usize,
    /// Draws discarded because they fall outside the suite's class.
    pub skipped: usize,
    pub checks: Vec<Check>,
    /// The first failing observations, in instance order.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn total_passed(&self) -> usize {
        self.checks.iter().map(|c| c.passed).sum()
    }

    pub fn total_failed(&self) -> usize {
        self.checks.iter().map(|c| c.failed).sum()
    }
}

#[derive(Debug, Clone)]
struct Observation {
    name: &'static str,
    value: f64,
    threshold: f64,
}

#[derive(Default)]
struct Recorder {
    obs: Vec<Observation>,
}

impl Recorder {
    fn value(&mut self, name: &'static str, value: f64, threshold: f64) {
        // NaN must count as a failure
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.obs.push(Observation { name, value, threshold });
    }

    fn flag(&mut self, name: &'static str, ok: bool) {
        self.value(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn result(&mut self, name: &'static str, r: Result<()>) {
        self.flag(name, r.is_ok());
    }
}

fn merge(suite: &str, config: SuiteConfig, skipped: usize, seeds: &[u64], results: Vec<Vec<Observation>>) -> SuiteReport {
    let mut checks: Vec<Check> = Vec::new();
    let mut failures = Vec::new();
    for (i, obs) in results.iter().enumerate() {
        for o in obs {
            let idx = match checks.iter().position(|c| c.name == o.name) {
                Some(idx) => idx,
                None => {
                    checks.push(Check {
                        name: o.name.to_string(),
                        threshold: o.threshold,
                        worst: 0.0,
                        passed: 0,
                        failed: 0,
                    });
                    checks.len() - 1
                }
            };
            let c = &mut checks[idx];
            c.worst = c.worst.max(o.value);
            if o.value <= o.threshold {
                c.passed += 1;
            } else {
                c.failed += 1;
                if failures.len() < MAX_LISTED_FAILURES {
                    failures.push(format!(
                        "instance {i} (seed {}): {} = {:e} exceeds {:e}",
                        seeds[i], o.name, o.value, o.threshold
                    ));
                }
            }
        }
    }
    SuiteReport {
        suite: suite.to_string(),
        config,
        instances: results.len(),
        skipped,
        checks,
        failures,
    }
}

/// Shape of the `index`-th draw: total assets and agents capped by the config.
fn draw(cfg: &SuiteConfig, index: u64, kind: PreferenceKind) -> Result<(u64, Scenario)> {
    let seed = random::stream_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=cfg.assets.max(1));
    let d1 = rng.random_range(0..=d);
    let params = RandomParams {
        horizon: rng.random_range(1..=cfg.horizon.max(1)),
        max_branching: if cfg.branching <= 1 { 1 } else { rng.random_range(2..=cfg.branching) },
        d1,
        d2: d - d1,
        agents: rng.random_range(1..=cfg.agents.max(1)),
        kind,
    };
    let scenario = random::generate_random_scenario(rng.random(), &params)?;
    Ok((seed, scenario))
}

/// Draws until `count` instances pass `accept`; returns them with the number discarded.
fn select(cfg: &SuiteConfig, kind: PreferenceKind, accept: impl Fn(&Scenario) -> bool) -> (Vec<(u64, Scenario)>, usize) {
    let mut out = Vec::with_capacity(cfg.count);
    let mut skipped = 0;
    let mut index = 0u64;
    while out.len() < cfg.count {
        match draw(cfg, index, kind) {
            Ok((seed, s)) if accept(&s) => out.push((seed, s)),
            _ => skipped += 1,
        }
        index += 1;
    }
    (out, skipped)
}

/// Terminal gains of each strategy coordinate, built leaf by leaf from the
/// price paths. Column `node * d + j` holds the gains of one unit of asset j
/// held over the period after inner node `node`.
pub fn terminal_gains_matrix(tree: &FiltrationTree, prices: &AdaptedProcess) -> DMatrix<f64> {
    let d = prices.dim();
    let mut a = DMatrix::zeros(tree.num_leaves(), tree.num_inner() * d);
    for leaf in 0..tree.num_leaves() {
        let node = tree.leaf_node(leaf);
        for t in 0..tree.horizon() {
            let n = tree.ancestor_at(node, t);
            let c = tree.ancestor_at(node, t + 1);
            for j in 0..d {
                a[(leaf, n * d + j)] = prices.get(c, j) - prices.get(n, j);
            }
        }
    }
    a
}

fn moments(probs: &[f64], v: &[f64]) -> (f64, f64) {
    let mean: f64 = probs.iter().zip(v).map(|(p, x)| p * x).sum();
    let var: f64 = probs.iter().zip(v).map(|(p, x)| p * (x - mean) * (x - mean)).sum();
    (mean, var)
}

/// Minimal variance of Ξ + A φ subject to E[Ξ + A φ] = `target`, from the
/// KKT system of the equality-constrained quadratic programme. Returns the
/// achieved (mean, variance).
pub fn brute_force_min_variance(probs: &[f64], a: &DMatrix<f64>, xi: &[f64], target: Option<f64>) -> (f64, f64) {
    let m = a.ncols();
    let p = DVector::from_column_slice(probs);
    let mu = a.transpose() * &p;
    let xi_v = DVector::from_column_slice(xi);
    let mean_xi = p.dot(&xi_v);
    let mut centred = a.clone();
    for j in 0..m {
        for i in 0..a.nrows() {
            centred[(i, j)] -= mu[j];
        }
    }
    let weighted = DMatrix::from_fn(a.nrows(), m, |i, j| centred[(i, j)] * probs[i]);
    let cov = weighted.transpose() * &centred;
    let xi_c = xi_v.map(|x| x - mean_xi);
    let b = weighted.transpose() * &xi_c;

    let phi = match target {
        Some(target) => {
            let mut kkt = DMatrix::zeros(m + 1, m + 1);
            kkt.view_mut((0, 0), (m, m)).copy_from(&cov);
            for j in 0..m {
                kkt[(j, m)] = mu[j];
                kkt[(m, j)] = mu[j];
            }
            let mut rhs = DVector::zeros(m + 1);
            rhs.rows_mut(0, m).copy_from(&(-&b));
            rhs[m] = target - mean_xi;
            solve_pinv(kkt, rhs).rows(0, m).into_owned()
        }
        None => solve_pinv(cov, -b),
    };
    let v = a * phi + xi_v;
    moments(probs, v.as_slice())
}

fn solve_pinv(m: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    let scale = m.amax().max(1.0);
    let svd = m.svd(true, true);
    svd.solve(&rhs, 1e-12 * scale).expect("SVD with both factors")
}

// ---------------------------------------------------------------------------
// Quadratic suite

/// Splits agent 0 into two halves and reverses the agent order; aggregates are unchanged.
fn split_agents(s: &Scenario) -> Scenario {
    let mut out = s.clone();
    let first = out.agents.remove(0);
    let half = |x: &[f64]| x.iter().map(|v| v / 2.0).collect::<Vec<_>>();
    let mut a = first.clone();
    a.eta2 = half(&first.eta2);
    a.xi_n = half(&first.xi_n);
    if let Preference::Quadratic { gamma } = first.preference {
        a.preference = Preference::Quadratic { gamma: gamma / 2.0 };
    }
    out.agents.push(a.clone());
    out.agents.push(a);
    out.agents.reverse();
    out
}

fn quadratic_instance(seed: u64, s: &Scenario, tol: &Tolerances) -> Vec<Observation> {
    let mut r = Recorder::default();
    let report = match quadratic::solve_quadratic(s, tol) {
        Ok(QuadraticOutcome::Constructed { report, .. }) => report,
        Ok(QuadraticOutcome::NonexistenceProven { .. }) | Err(_) => {
            r.flag("constructed", false);
            return r.obs;
        }
    };
    r.flag("constructed", true);
    r.flag("verified", report.verdict.is_equilibrium());
    r.value("clearing", report.clearing_residual, EQUILIBRIUM_TOL);
    let gap = report.agents.iter().map(|a| a.optimality_gap).fold(0.0, f64::max);
    r.value("optimality_gap", gap, EQUILIBRIUM_TOL);
    r.value("martingale", report.martingale_residual, EQUILIBRIUM_TOL);
    r.value("representative", report.representative.residual, EQUILIBRIUM_TOL);

    match quadratic::construct_regular(&split_agents(s), tol) {
        Ok(p) => r.value("agent_split", p.max_abs_diff(&report.prices), SPLIT_TOL),
        Err(_) => r.flag("agent_split", false),
    }
    match quadratic::construct_degenerate(s, tol) {
        Ok(p) => r.value("degenerate_matches_regular", p.max_abs_diff(&report.prices), EQUILIBRIUM_TOL),
        Err(_) => r.flag("degenerate_matches_regular", false),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut rejected = true;
    for i in 0..PERTURBATIONS {
        let scale = 0.05 * (1 + i % 4) as f64;
        let p = random::perturb_prices(&mut rng, s, &report.prices, scale);
        match quadratic::verify_equilibrium(s, &p, tol) {
            Ok(rep) if rep.verdict.is_equilibrium() => rejected = false,
            _ => {}
        }
    }
    r.flag("perturbations_rejected", rejected);
    r.obs
}

/// Random quadratic economies with a nonvanishing aggregate density.
pub fn quadratic_suite(cfg: &SuiteConfig) -> SuiteReport {
    let tol = Tolerances::default();
    let (draws, skipped) = select(cfg, PreferenceKind::Quadratic, |s| {
        quadratic::check_necessary_conditions(s, &tol).is_ok_and(|c| !c.density_vanishes())
    });
    let results: Vec<Vec<Observation>> = draws.par_iter().map(|(seed, s)| quadratic_instance(*seed, s, &tol)).collect();
    let seeds: Vec<u64> = draws.iter().map(|(seed, _)| *seed).collect();
    merge("quadratic", *cfg, skipped, &seeds, results)
}

// ---------------------------------------------------------------------------
// Linear mean–variance suite

fn linear_mv_instance(seed: u64, s: &Scenario, tol: &Tolerances) -> Vec<Observation> {
    let mut r = Recorder::default();
    let report = match linear_mv::solve_linear_mv(s, tol) {
        Ok(rep) if rep.prices.is_some() => rep,
        _ => {
            r.flag("solved", false);
            return r.obs;
        }
    };
    r.flag("solved", true);
    let prices = report.prices.clone().expect("checked above");
    let fp = report.fixed_point.expect("present when prices are");
    let ell = report.ell.expect("present when prices are");
    r.value("fp_residual", fp.fp_residual, EQUILIBRIUM_TOL);
    r.value("identity_residual", fp.identity_residual, EQUILIBRIUM_TOL);
    r.value("opportunity_l0", (fp.opportunity_l0 - ell).abs(), EQUILIBRIUM_TOL);
    r.value("clearing", report.clearing_residual.unwrap_or(f64::INFINITY), EQUILIBRIUM_TOL);
    r.flag(
        "quadratic_equivalence",
        report.quadratic_verdict.as_ref().is_some_and(|v| v.is_equilibrium()) && report.agents.iter().all(|a| a.gamma >= a.c),
    );

    // S(γ̄) moves with γ̄ unless every asset is strongly orthogonal to Z̄(γ̄₀)
    let shifted = linear_mv::prices_for_gamma(s, report.gamma_bar + 0.5, tol);
    r.flag(
        "injectivity",
        shifted.is_ok_and(|p| {
            let moved = p.max_abs_diff(&prices) > 1e-6;
            moved == (report.regime == linear_mv::MvRegime::Unique)
        }),
    );

    let market = MvhMarket::new(&s.tree, &prices, *tol);
    let probs = s.tree.leaf_probs();
    let a = terminal_gains_matrix(&s.tree, &prices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
    for (k, agent) in report.agents.iter().enumerate() {
        let Ok(frontier) = linear_mv::frontier_in(s, &market, k) else {
            r.flag("frontier", false);
            continue;
        };
        let xi = s.total_endowment(k).expect("valid agent index");

        let mut worst: f64 = 0.0;
        if 1.0 - ell > 1e-9 {
            for i in 0..FRONTIER_GRID {
                let y = 2.0 * agent.y * i as f64 / (FRONTIER_GRID - 1) as f64;
                let (mean, var) = brute_force_min_variance(&probs, &a, &xi, Some(frontier.mu(y)));
                let sigma = frontier.sigma(y);
                worst = worst.max((var - sigma * sigma).abs()).max((mean - frontier.mu(y)).abs());
            }
        } else {
            let (mean, var) = brute_force_min_variance(&probs, &a, &xi, None);
            worst = (var - frontier.eps2).abs().max((mean - frontier.c).abs());
        }
        r.value("frontier_brute_force", worst, FRONTIER_TOL);

        // no competitor beats the optimum in mean–variance utility or dominates it
        let wealth = |theta: &PredictableProcess| {
            let eta = PredictableProcess::constant(&s.tree, &s.eta(k));
            let phi = DVector::from_column_slice(theta.axpy(-1.0, &eta).coords());
            let v: Vec<f64> = (&a * phi).iter().zip(&xi).map(|(g, x)| g + x).collect();
            moments(&probs, &v)
        };
        let (m_opt, v_opt) = wealth(&agent.strategy);
        let utility = |m: f64, v: f64| m - v / (2.0 * agent.lambda);
        let u_opt = utility(m_opt, v_opt);
        let slack = 1e-9 * (1.0 + u_opt.abs());
        let mut dominated = false;
        let mut excess: f64 = 0.0;
        for i in 0..COMPETITORS {
            let scale = [1e-3, 1e-2, 0.1, 1.0][i % 4];
            let coords: Vec<f64> = agent
                .strategy
                .coords()
                .iter()
                .map(|c| if i % 5 == 4 { rng.random_range(-2.0..2.0) } else { c + scale * rng.random_range(-1.0..1.0) })
                .collect();
            let (m, v) = wealth(&PredictableProcess::from_coords(s.dim(), coords));
            excess = excess.max(utility(m, v) - u_opt);
            if m >= m_opt + slack && v <= v_opt - slack {
                dominated = true;
            }
        }
        r.value("competitor_utility_excess", excess, slack);
        r.flag("not_dominated", !dominated);
    }
    r.obs
}

/// Random linear mean–variance economies for which γ̄ > γ̄₀.
pub fn linear_mv_suite(cfg: &SuiteConfig) -> SuiteReport {
    let tol = Tolerances::default();
    let (draws, skipped) = select(cfg, PreferenceKind::LinearMv, |s| {
        linear_mv::gamma_bar_fixed_point(s, &tol).is_ok_and(|g| g.exists)
    });
    let results: Vec<Vec<Observation>> = draws.par_iter().map(|(seed, s)| linear_mv_instance(*seed, s, &tol)).collect();
    let seeds: Vec<u64> = draws.iter().map(|(seed, _)| *seed).collect();
    merge("linear_mv", *cfg, skipped, &seeds, results)
}

// ---------------------------------------------------------------------------
// MVH suite

fn mvh_instance(seed: u64, s: &Scenario, tol: &Tolerances) -> Vec<Observation> {
    let mut r = Recorder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
    let tree = &s.tree;
    let leaves = tree.num_leaves();
    let agg = match quadratic::aggregate(s) {
        Ok(a) => a,
        Err(e) => {
            r.result("setup", Err(e));
            return r.obs;
        }
    };
    // Even draws pair equilibrium prices with H̄, odd ones random prices with random claims.
    let (prices, h) = if seed.is_multiple_of(2) {
        match quadratic::construct_regular(s, tol) {
            Ok(p) => (p, agg.h_bar.clone()),
            Err(e) => {
                r.result("setup", Err(e));
                return r.obs;
            }
        }
    } else {
        let p = random::random_candidate_prices(&mut rng, s, 0.5);
        let h: Vec<f64> = (0..leaves).map(|_| rng.random_range(-2.0..2.0)).collect();
        (p, h)
    };
    let market = MvhMarket::new(tree, &prices, *tol);

    let z = market.zero_solves_mvh_iff(&h);
    r.flag("zero_mvh_agreement", z.zero_optimal == z.zs_martingale);
    if seed.is_multiple_of(2) {
        r.flag("zero_optimal_at_equilibrium", z.zero_optimal && z.zs_martingale);
    } else {
        r.flag("zero_rejected_off_equilibrium", !z.zero_optimal && !z.zs_martingale);
    }

    let h1: Vec<f64> = (0..leaves).map(|_| rng.random_range(-2.0..2.0)).collect();
    let h2: Vec<f64> = (0..leaves).map(|_| rng.random_range(-2.0..2.0)).collect();
    let lambda = rng.random_range(-2.0..2.0);
    let combo: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| a + lambda * b).collect();
    let t1 = market.solve_mvh(&h1).theta;
    let t2 = market.solve_mvh(&h2).theta;
    let tc = market.solve_mvh(&combo).theta;
    let linear = market.gains_path(&tc.axpy(-1.0, &t1).axpy(-lambda, &t2)).max_abs();
    r.value("linearity", linear, LINEARITY_TOL);

    let sol = market.solve_mvh(&h1);
    r.value("first_order", market.first_order_residual(&sol.theta, &h1), EQUILIBRIUM_TOL);
    let probs = tree.leaf_probs();
    let a = terminal_gains_matrix(tree, &prices);
    let error = |coords: &[f64]| -> f64 {
        let g = &a * DVector::from_column_slice(coords);
        g.iter().zip(&h1).zip(&probs).map(|((g, h), p)| p * (g - h) * (g - h)).sum()
    };
    let best = error(sol.theta.coords());
    let mut beaten: f64 = 0.0;
    for _ in 0..PROJECTION_COMPETITORS {
        let scale = rng.random_range(0.001..1.0);
        let coords: Vec<f64> = sol.theta.coords().iter().map(|c| c + scale * rng.random_range(-1.0..1.0)).collect();
        beaten = beaten.max(best - error(&coords));
    }
    r.value("projection_optimality", beaten, 1e-12 * (1.0 + best));

    if market.uniqueness_of_values() {
        let ex = market.solve_exmvh(&h1);
        match market.c_of_h_formula(&h1) {
            Ok(c) => r.value("c_formula", (c - ex.c.unwrap_or(f64::NAN)).abs(), C_FORMULA_TOL),
            Err(e) => r.result("c_formula", Err(e)),
        }
        match market.opportunity_process(&h1) {
            Ok(op) => {
                r.value("opportunity_l0", (op.l.value(0) - market.ell()).abs(), LINEARITY_TOL);
                r.value("opportunity_submartingale", op.submartingale_violation(tree), LINEARITY_TOL);
            }
            Err(e) => r.result("opportunity_l0", Err(e)),
        }
    }
    r.obs
}

/// Random (S, H) pairs for the mean–variance hedging invariants, plus the
/// fixed two-period cancellation market that must fail uniqueness of gains.
pub fn mvh_suite(cfg: &SuiteConfig) -> SuiteReport {
    let tol = Tolerances::default();
    let (draws, skipped) = select(cfg, PreferenceKind::Quadratic, |_| true);
    let mut results: Vec<Vec<Observation>> = draws.par_iter().map(|(seed, s)| mvh_instance(*seed, s, &tol)).collect();
    let mut seeds: Vec<u64> = draws.iter().map(|(seed, _)| *seed).collect();

    let (tree, prices) = crate::reference::cancellation_market();
    let mut r = Recorder::default();
    r.flag("cancellation_flagged", !MvhMarket::new(&tree, &prices, tol).uniqueness_of_gains());
    results.push(r.obs);
    seeds.push(0);
    merge("mvh", *cfg, skipped, &seeds, results)
}

/// Defaults for the MVH suite: 500 pairs on smaller trees.
pub fn mvh_config(seed: u64) -> SuiteConfig {
    SuiteConfig {
        seed,
        count: 500,
        horizon: 3,
        ..SuiteConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Quadratic,
    LinearMv,
    Mvh,
}

pub fn run(kind: SuiteKind, cfg: &SuiteConfig) -> SuiteReport {
    match kind {
        SuiteKind::Quadratic => quadratic_suite(cfg),
        SuiteKind::LinearMv => linear_mv_suite(cfg),
        SuiteKind::Mvh => mvh_suite(cfg),
    }
}
