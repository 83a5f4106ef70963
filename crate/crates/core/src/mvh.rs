//! Mean–variance hedging on a finite tree.
//!
//! The attainable terminal gains form the column space of the gains operator,
//! so (extended) mean–variance hedging is a probability-weighted least-squares
//! projection. Strategies are identified only up to S-equivalence; solvers
//! always return the minimal-norm coordinates and expose uniqueness flags.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::process::{AdaptedProcess, PredictableProcess};
use crate::stoch;
use crate::tree::FiltrationTree;
use crate::Tolerances;

/// Linear map from strategy coordinates to terminal gains ϑ·S_T.
///
/// Column `node * d + j` holds the increment of asset `j` over the period
/// after `node`, on every leaf below `node`.
#[derive(Debug, Clone)]
pub struct GainsOperator {
    dim: usize,
    matrix: DMatrix<f64>,
}

impl GainsOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        self.matrix.clone().svd(false, false).rank(tol.tol)
    }
}

pub fn build_gains_operator(tree: &FiltrationTree, prices: &AdaptedProcess) -> GainsOperator {
    let d = prices.dim();
    let mut matrix = DMatrix::zeros(tree.num_leaves(), tree.num_inner() * d);
    for leaf in 0..tree.num_leaves() {
        let mut node = tree.leaf_node(leaf);
        while let Some(parent) = tree.parent(node) {
            for j in 0..d {
                matrix[(leaf, parent * d + j)] = prices.get(node, j) - prices.get(parent, j);
            }
            node = parent;
        }
    }
    GainsOperator { dim: d, matrix }
}

/// Solution of an (extended) mean–variance hedging problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MvhSolution {
    pub theta: PredictableProcess,
    /// Initial capital; present for the extended problem only.
    pub c: Option<f64>,
    /// E[(c + ϑ·S_T − H)²] at the returned solution.
    pub sq_error: f64,
    /// Whether the solution is unique (up to S-equivalence).
    pub unique: bool,
}

/// Outcome of testing both sides of the zero-strategy criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroMvhCheck {
    /// ϑ = 0 satisfies the first-order conditions of the MVH problem.
    pub zero_optimal: bool,
    /// Z·S^j is a martingale for every j, with Z_t = E[H | F_t].
    pub zs_martingale: bool,
    /// Largest conditional first-order residual E[ΔS^j H | F_t] over nodes and assets.
    pub first_order_residual: f64,
    pub martingale_residual: f64,
}

/// Opportunity process of the pure investment problem and the mean value process of a claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpportunityProcess {
    /// L_t, valued in (0, 1] with L_T = 1.
    pub l: AdaptedProcess,
    /// ϑ^{(t)}(1): optimal pure investment started at time t, for t = 0..T−1.
    pub strategies: Vec<PredictableProcess>,
    /// Mean value process V̄ of the claim.
    pub mean_value: AdaptedProcess,
}

/// Hedging problems for one fixed price system.
#[derive(Debug, Clone)]
pub struct MvhMarket<'a> {
    tree: &'a FiltrationTree,
    prices: &'a AdaptedProcess,
    tol: Tolerances,
    plain: LeastSquares,
    extended: LeastSquares,
    unique_gains: bool,
    pure: (PredictableProcess, f64),
}

impl<'a> MvhMarket<'a> {
    pub fn new(tree: &'a FiltrationTree, prices: &'a AdaptedProcess, tol: Tolerances) -> Self {
        let gains = build_gains_operator(tree, prices);
        let weights = tree.leaf_probs();
        let mut augmented = DMatrix::from_element(tree.num_leaves(), gains.matrix.ncols() + 1, 1.0);
        augmented.columns_mut(1, gains.matrix.ncols()).copy_from(&gains.matrix);
        let plain = LeastSquares::new(gains.matrix, &weights, tol.rank);
        let extended = LeastSquares::new(augmented, &weights, tol.rank);
        let mut market = Self {
            tree,
            prices,
            tol,
            plain,
            extended,
            unique_gains: true,
            pure: (PredictableProcess::zeros(tree, prices.dim()), 1.0),
        };
        market.unique_gains = market.compute_uniqueness_of_gains();
        let ones = vec![1.0; tree.num_leaves()];
        let sol = market.solve_mvh(&ones);
        market.pure = (sol.theta, sol.sq_error);
        market
    }

    pub fn tree(&self) -> &FiltrationTree {
        self.tree
    }

    pub fn prices(&self) -> &AdaptedProcess {
        self.prices
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.prices.dim()
    }

    pub fn gains_path(&self, theta: &PredictableProcess) -> AdaptedProcess {
        stoch::stoch_integral(self.tree, theta, self.prices)
    }

    pub fn terminal_gains(&self, theta: &PredictableProcess) -> Vec<f64> {
        self.plain
            .apply(&DVector::from_column_slice(theta.coords()))
    }

    /// Whether two strategies have the same gains path at every node.
    pub fn s_equivalent(&self, a: &PredictableProcess, b: &PredictableProcess) -> bool {
        self.gains_path(&a.axpy(-1.0, b)).max_abs() <= self.tol.tol
    }

    /// Minimises E[(ϑ·S_T − H)²].
    pub fn solve_mvh(&self, h: &[f64]) -> MvhSolution {
        let x = self.plain.solve(h);
        MvhSolution {
            sq_error: self.plain.weighted_sq_error(&x, h),
            theta: PredictableProcess::from_coords(self.dim(), x.iter().copied().collect()),
            c: None,
            unique: self.unique_gains,
        }
    }

    /// Minimises E[(c + ϑ·S_T − H)²] over (c, ϑ).
    pub fn solve_exmvh(&self, h: &[f64]) -> MvhSolution {
        let x = self.extended.solve(h);
        MvhSolution {
            sq_error: self.extended.weighted_sq_error(&x, h),
            theta: PredictableProcess::from_coords(self.dim(), x.iter().skip(1).copied().collect()),
            c: Some(x[0]),
            unique: self.uniqueness_of_values(),
        }
    }

    /// ϑ^MVH(1) and ℓ = E[(ϑ^MVH(1)·S_T − 1)²].
    pub fn pure_investment(&self) -> (&PredictableProcess, f64) {
        (&self.pure.0, self.pure.1)
    }

    pub fn ell(&self) -> f64 {
        self.pure.1
    }

    /// c(H) = E[H(1 − ϑ^MVH(1)·S_T)] / E[(1 − ϑ^MVH(1)·S_T)²].
    pub fn c_of_h_formula(&self, h: &[f64]) -> Result<f64> {
        let g1 = self.terminal_gains(&self.pure.0);
        let one_minus: Vec<f64> = g1.iter().map(|g| 1.0 - g).collect();
        let denominator = self.tree.expect(&one_minus.iter().map(|x| x * x).collect::<Vec<_>>());
        if denominator <= self.tol.tol {
            return Err(Error::ValueUniqueness { denominator });
        }
        let numerator = self
            .tree
            .expect(&h.iter().zip(&one_minus).map(|(a, b)| a * b).collect::<Vec<_>>());
        Ok(numerator / denominator)
    }

    pub fn uniqueness_of_gains(&self) -> bool {
        self.unique_gains
    }

    pub fn uniqueness_of_values(&self) -> bool {
        self.unique_gains && self.pure.1 > self.tol.tol
    }

    fn compute_uniqueness_of_gains(&self) -> bool {
        let scale = (1..self.tree.num_nodes())
            .flat_map(|c| {
                let n = self.tree.parent(c).unwrap();
                (0..self.dim()).map(move |j| (c, n, j))
            })
            .map(|(c, n, j)| (self.prices.get(c, j) - self.prices.get(n, j)).abs())
            .fold(0.0, f64::max);
        let path_tol = self.tol.tol.max(self.tol.rank.sqrt() * scale);
        self.plain.kernel().iter().all(|v| {
            let theta = PredictableProcess::from_coords(self.dim(), v.iter().copied().collect());
            self.gains_path(&theta).max_abs() <= path_tol
        })
    }

    /// E[(ϑ'·S_T)(ϑ·S_T − H)] / P(node) for the one-period basis strategies ϑ' = 1_{node} e_j.
    pub fn first_order_residual(&self, theta: &PredictableProcess, h: &[f64]) -> f64 {
        let g = self.terminal_gains(theta);
        let resid: Vec<f64> = g.iter().zip(h).map(|(a, b)| a - b).collect();
        self.conditional_inner(&resid)
    }

    fn conditional_inner(&self, v: &[f64]) -> f64 {
        let weights = self.tree.leaf_probs();
        let m = self.plain.design();
        let d = self.dim().max(1);
        let mut worst = 0.0f64;
        for col in 0..m.ncols() {
            let node = col / d;
            let s: f64 = (0..m.nrows()).map(|r| weights[r] * m[(r, col)] * v[r]).sum();
            worst = worst.max((s / self.tree.prob(node)).abs());
        }
        worst
    }

    /// Tests both "ϑ = 0 solves MVH for H" and "Z·S is a martingale".
    pub fn zero_solves_mvh_iff(&self, h: &[f64]) -> ZeroMvhCheck {
        let first_order_residual = self.conditional_inner(h);
        let z = stoch::martingale_from_terminal(self.tree, h);
        let mut martingale_residual = 0.0f64;
        for j in 0..self.dim() {
            let zs = z.mul(&self.prices.component(j));
            martingale_residual = martingale_residual.max(stoch::martingale_residual(self.tree, &zs));
        }
        ZeroMvhCheck {
            zero_optimal: first_order_residual <= self.tol.tol,
            zs_martingale: martingale_residual <= self.tol.tol,
            first_order_residual,
            martingale_residual,
        }
    }

    /// Opportunity process by per-subtree least squares, and the mean value process of `h`.
    pub fn opportunity_process(&self, h: &[f64]) -> Result<OpportunityProcess> {
        if !self.uniqueness_of_values() {
            return Err(Error::Precondition(
                "the opportunity process requires uniqueness of value processes".into(),
            ));
        }
        let tree = self.tree;
        let d = self.dim();
        let horizon = tree.horizon();
        let mut l = AdaptedProcess::scalar(vec![1.0; tree.num_nodes()]);
        let mut strategies = Vec::with_capacity(horizon);
        let mut mean_value = AdaptedProcess::scalar(vec![0.0; tree.num_nodes()]);
        let base = tree.num_inner();
        for (leaf, x) in h.iter().enumerate() {
            mean_value.set(base + leaf, 0, *x);
        }

        for t in 0..horizon {
            let mut theta = PredictableProcess::zeros(tree, d);
            for n in tree.nodes_at(t) {
                let inner = tree.inner_subtree(n);
                let leaves = tree.leaves_under(n);
                let mut design = DMatrix::zeros(leaves.len(), inner.len() * d);
                for (r, leaf) in leaves.clone().enumerate() {
                    let mut node = tree.leaf_node(leaf);
                    while let Some(parent) = tree.parent(node) {
                        if tree.time(parent) < t {
                            break;
                        }
                        let col = inner.iter().position(|&x| x == parent).unwrap();
                        for j in 0..d {
                            design[(r, col * d + j)] = self.prices.get(node, j) - self.prices.get(parent, j);
                        }
                        node = parent;
                    }
                }
                let weights: Vec<f64> = leaves
                    .clone()
                    .map(|leaf| tree.prob(tree.leaf_node(leaf)) / tree.prob(n))
                    .collect();
                let ls = LeastSquares::new(design, &weights, self.tol.rank);
                let ones = vec![1.0; leaves.len()];
                let x = ls.solve(&ones);
                l.set(n, 0, ls.weighted_sq_error(&x, &ones));
                for (col, &node) in inner.iter().enumerate() {
                    theta.at_mut(node).copy_from_slice(&x.as_slice()[col * d..(col + 1) * d]);
                }
            }
            let gains = self.gains_path(&theta);
            for n in tree.nodes_at(t) {
                let payoff: Vec<f64> = tree
                    .leaves_under(n)
                    .map(|leaf| h[leaf] * (1.0 - gains.value(tree.leaf_node(leaf))))
                    .collect();
                let lo = tree.leaves_under(n).start;
                let mut padded = vec![0.0; tree.num_leaves()];
                padded[lo..lo + payoff.len()].copy_from_slice(&payoff);
                mean_value.set(n, 0, tree.expect_at(n, &padded) / l.value(n));
            }
            strategies.push(theta);
        }

        Ok(OpportunityProcess {
            l,
            strategies,
            mean_value,
        })
    }
}

impl OpportunityProcess {
    /// Largest violation of the submartingale property of L.
    pub fn submartingale_violation(&self, tree: &FiltrationTree) -> f64 {
        (0..tree.num_inner())
            .map(|n| {
                let next: f64 = tree.children(n).map(|c| tree.cond_prob(c) * self.l.value(c)).sum();
                (self.l.value(n) - next).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// M^{(0)}_s = L_s (1 − (ϑ^{(0)}·S)_s).
    pub fn associated_martingale(&self, tree: &FiltrationTree, prices: &AdaptedProcess) -> AdaptedProcess {
        let gains = match self.strategies.first() {
            Some(theta) => stoch::stoch_integral(tree, theta, prices),
            None => AdaptedProcess::scalar(vec![0.0; tree.num_nodes()]),
        };
        AdaptedProcess::scalar(
            (0..tree.num_nodes())
                .map(|n| self.l.value(n) * (1.0 - gains.value(n)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_period(probs: &[f64], root: f64, leaves: &[f64]) -> (FiltrationTree, AdaptedProcess) {
        let tree = FiltrationTree::one_period(probs).unwrap();
        let mut v = vec![root];
        v.extend_from_slice(leaves);
        (tree, AdaptedProcess::scalar(v))
    }

    #[test]
    fn gains_operator_examples() {
        let (tree, s) = one_period(&[0.5, 0.5], 25.0 / 17.0, &[2.0, 1.0]);
        let g = build_gains_operator(&tree, &s);
        assert_eq!(g.matrix().shape(), (2, 1));
        assert_abs_diff_eq!(g.matrix()[(0, 0)], 9.0 / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.matrix()[(1, 0)], -8.0 / 17.0, epsilon = 1e-15);

        let tree = FiltrationTree::uniform(2, 2).unwrap();
        let flat = AdaptedProcess::from_fn(&tree, 2, |_, j| j as f64 + 1.0);
        let g = build_gains_operator(&tree, &flat);
        assert!(g.matrix().iter().all(|v| *v == 0.0));

        let twin = AdaptedProcess::from_fn(&tree, 2, |n, _| (n as f64).sin());
        assert_eq!(build_gains_operator(&tree, &twin).rank(&Tolerances::default()), 3);
        let single = AdaptedProcess::from_fn(&tree, 1, |n, _| (n as f64).sin());
        assert_eq!(build_gains_operator(&tree, &single).rank(&Tolerances::default()), 3);
    }

    #[test]
    fn solve_mvh_examples() {
        let tol = Tolerances::default();
        let (tree, s) = one_period(&[0.5, 0.5], 25.0 / 17.0, &[2.0, 1.0]);
        let m = MvhMarket::new(&tree, &s, tol);
        let zero = m.solve_mvh(&[0.0, 0.0]);
        assert_eq!(zero.theta.get(0, 0), 0.0);
        assert_eq!(zero.sq_error, 0.0);

        let sol = m.solve_mvh(&[8.0, 9.0]);
        assert_abs_diff_eq!(sol.theta.get(0, 0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.sq_error, 72.5, epsilon = 1e-10);
        assert!(sol.unique);

        // attainable payoff
        let tree = FiltrationTree::uniform(2, 2).unwrap();
        let s = AdaptedProcess::from_fn(&tree, 1, |n, _| [1.0, 1.5, 0.5, 2.0, 1.2, 0.9, 0.1][n]);
        let m = MvhMarket::new(&tree, &s, tol);
        let target = PredictableProcess::from_coords(1, vec![0.7, -1.3, 2.0]);
        let h = m.terminal_gains(&target);
        let sol = m.solve_mvh(&h);
        assert!(sol.sq_error < 1e-20);
        assert!(m.s_equivalent(&sol.theta, &target));
    }

    #[test]
    fn solve_exmvh_examples() {
        let tol = Tolerances::default();
        let (tree, s) = one_period(&[0.5, 0.5], 1.25, &[2.0, 1.0]);
        let m = MvhMarket::new(&tree, &s, tol);
        let sol = m.solve_exmvh(&[2.0, 1.0]);
        assert_abs_diff_eq!(sol.c.unwrap(), 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.theta.get(0, 0), 1.0, epsilon = 1e-12);
        assert!(sol.sq_error < 1e-20);
        assert_abs_diff_eq!(m.c_of_h_formula(&[2.0, 1.0]).unwrap(), 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(m.c_of_h_formula(&[3.5, 3.5]).unwrap(), 3.5, epsilon = 1e-12);

        // attainable c0 + ϑ0·S_T
        let sol = m.solve_exmvh(&[-1.0 + 2.0 * 0.75, -1.0 - 2.0 * 0.25]);
        assert_abs_diff_eq!(sol.c.unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.theta.get(0, 0), 2.0, epsilon = 1e-12);

        // h orthogonal to constants and to the gains
        let tree = FiltrationTree::one_period(&[0.25; 4]).unwrap();
        let s = AdaptedProcess::scalar(vec![0.0, 1.0, 1.0, -1.0, -1.0]);
        let m = MvhMarket::new(&tree, &s, tol);
        let h = [1.0, -1.0, 1.0, -1.0];
        let sol = m.solve_exmvh(&h);
        assert_abs_diff_eq!(sol.c.unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.theta.get(0, 0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.sq_error, 1.0, epsilon = 1e-14);
        // martingale prices: c(H) = E[H]
        assert_abs_diff_eq!(m.c_of_h_formula(&[4.0, 0.0, 2.0, 2.0]).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn pure_investment_examples() {
        let tol = Tolerances::default();
        let (tree, s) = one_period(&[0.5, 0.5], 0.0, &[1.0, -1.0]);
        let m = MvhMarket::new(&tree, &s, tol);
        assert_abs_diff_eq!(m.pure_investment().0.get(0, 0), 0.0);
        assert_abs_diff_eq!(m.ell(), 1.0);

        // ℓ = 1 − E[ΔS]²/E[ΔS²]
        let oracle = |ds: [f64; 2]| {
            let mean = 0.5 * (ds[0] + ds[1]);
            let sq = 0.5 * (ds[0] * ds[0] + ds[1] * ds[1]);
            1.0 - mean * mean / sq
        };
        let (tree, s) = one_period(&[0.5, 0.5], 25.0 / 17.0, &[2.0, 1.0]);
        let ell = MvhMarket::new(&tree, &s, tol).ell();
        assert_abs_diff_eq!(oracle([9.0 / 17.0, -8.0 / 17.0]), 289.0 / 290.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ell, 289.0 / 290.0, epsilon = 1e-13);
        let (tree, s) = one_period(&[0.5, 0.5], 1.25, &[2.0, 1.0]);
        assert_abs_diff_eq!(MvhMarket::new(&tree, &s, tol).ell(), 0.8, epsilon = 1e-13);
        assert_abs_diff_eq!(oracle([0.75, -0.25]), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn uniqueness_examples() {
        let tol = Tolerances::default();
        // two-period cancellation: ΔS₂ = −ΔS₁ on every path
        let tree = FiltrationTree::uniform(2, 2).unwrap();
        let s = AdaptedProcess::scalar(vec![0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let m = MvhMarket::new(&tree, &s, tol);
        assert!(!m.uniqueness_of_gains());
        let kernel = PredictableProcess::constant(&tree, &[1.0]);
        assert!(m.terminal_gains(&kernel).iter().all(|g| g.abs() < 1e-15));
        assert!(m.gains_path(&kernel).max_abs() > 0.5);
        assert!(!m.uniqueness_of_values());

        // one-period markets always have unique gains
        let (tree, s) = one_period(&[0.3, 0.7], 1.0, &[1.5, 1.5]);
        let m = MvhMarket::new(&tree, &s, tol);
        assert!(m.uniqueness_of_gains());
        // deterministic ΔS = 0.5 makes 1 attainable
        assert!(m.ell() < 1e-12);
        assert!(!m.uniqueness_of_values());

        let tree = tree_2();
        let flat = AdaptedProcess::scalar(vec![1.0; 7]);
        let m = MvhMarket::new(&tree, &flat, tol);
        assert!(m.uniqueness_of_gains());
        assert!(m.uniqueness_of_values());

        let (tree, s) = one_period(&[0.5, 0.5], 1.25, &[2.0, 1.0]);
        assert!(MvhMarket::new(&tree, &s, tol).uniqueness_of_values());
    }

    fn tree_2() -> FiltrationTree {
        FiltrationTree::uniform(2, 2).unwrap()
    }

    #[test]
    fn zero_solves_examples() {
        let tol = Tolerances::default();
        let (tree, s) = one_period(&[0.5, 0.5], 25.0 / 17.0, &[2.0, 1.0]);
        let c = MvhMarket::new(&tree, &s, tol).zero_solves_mvh_iff(&[8.0, 9.0]);
        assert!(c.zero_optimal && c.zs_martingale);

        let (tree, s) = one_period(&[0.5, 0.5], 0.0, &[1.0, -1.0]);
        let c = MvhMarket::new(&tree, &s, tol).zero_solves_mvh_iff(&[1.0, 1.0]);
        assert!(c.zero_optimal && c.zs_martingale);

        let (tree, s) = one_period(&[0.5, 0.5], 1.6, &[2.0, 1.0]);
        let c = MvhMarket::new(&tree, &s, tol).zero_solves_mvh_iff(&[8.0, 9.0]);
        assert!(!c.zero_optimal && !c.zs_martingale);
    }

    #[test]
    fn opportunity_process_examples() {
        let tol = Tolerances::default();
        let (tree, s) = one_period(&[0.5, 0.5], 1.25, &[2.0, 1.0]);
        let m = MvhMarket::new(&tree, &s, tol);
        let opp = m.opportunity_process(&[0.5, 1.5]).unwrap();
        assert_abs_diff_eq!(opp.l.value(0), 0.8, epsilon = 1e-13);
        assert_eq!(opp.l.value(1), 1.0);
        assert_eq!(opp.l.value(2), 1.0);
        assert_eq!(opp.mean_value.value(1), 0.5);

        // martingale prices: L ≡ 1 and V̄ = E[H | F]
        let tree = tree_2();
        let h = [1.0, 4.0, 2.0, 3.0];
        let s = stoch::martingale_from_terminal(&tree, &[0.3, -0.2, 1.0, 0.4]);
        let m = MvhMarket::new(&tree, &s, tol);
        let opp = m.opportunity_process(&h).unwrap();
        let z = stoch::martingale_from_terminal(&tree, &h);
        for n in 0..tree.num_nodes() {
            assert_abs_diff_eq!(opp.l.value(n), 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(opp.mean_value.value(n), z.value(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn opportunity_process_requires_unique_values() {
        let (tree, s) = one_period(&[0.3, 0.7], 1.0, &[1.5, 1.5]);
        let m = MvhMarket::new(&tree, &s, Tolerances::default());
        assert!(matches!(m.opportunity_process(&[1.0, 2.0]), Err(Error::Precondition(_))));
    }
}
