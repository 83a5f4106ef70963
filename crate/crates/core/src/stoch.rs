//! Martingale calculus on a filtration tree.
//!
//! Every conditional quantity at a node is a probability-weighted sum over its
//! children (or leaves); nothing is cached between calls.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::{AdaptedProcess, PredictableProcess};
use crate::tree::FiltrationTree;
use crate::Tolerances;

/// E[x | F_t] for a leaf-indexed `x`, one value per time-`t` node.
pub fn cond_expect(tree: &FiltrationTree, x: &[f64], t: usize) -> Result<Vec<f64>> {
    tree.check_time(t)?;
    check_leaf_len(tree, x)?;
    Ok(tree.nodes_at(t).map(|n| tree.expect_at(n, x)).collect())
}

/// The martingale Z_t = E[x | F_t].
pub fn martingale_from_terminal(tree: &FiltrationTree, x: &[f64]) -> AdaptedProcess {
    assert_eq!(x.len(), tree.num_leaves(), "terminal vector length");
    let mut out = vec![0.0; tree.num_nodes()];
    let base = tree.num_inner();
    out[base..].copy_from_slice(x);
    for n in (0..base).rev() {
        out[n] = tree
            .children(n)
            .map(|c| tree.cond_prob(c) * out[c])
            .sum();
    }
    AdaptedProcess::scalar(out)
}

/// Outcome of a martingale test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleCheck {
    pub max_residual: f64,
    pub pass: bool,
}

/// Largest |E[Δx_t | F_{t−1}]| over inner nodes and components.
pub fn martingale_residual(tree: &FiltrationTree, x: &AdaptedProcess) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..tree.num_inner() {
        for j in 0..x.dim() {
            let drift: f64 = tree
                .children(n)
                .map(|c| tree.cond_prob(c) * (x.get(c, j) - x.get(n, j)))
                .sum();
            worst = worst.max(drift.abs());
        }
    }
    worst
}

pub fn is_martingale(tree: &FiltrationTree, x: &AdaptedProcess, tol: &Tolerances) -> MartingaleCheck {
    let max_residual = martingale_residual(tree, x);
    MartingaleCheck {
        max_residual,
        pass: max_residual <= tol.tol,
    }
}

/// E[Δa Δb | F] at the inner node `node`, for scalar components `ja`, `jb`.
pub(crate) fn bracket_at(
    tree: &FiltrationTree,
    a: &AdaptedProcess,
    ja: usize,
    b: &AdaptedProcess,
    jb: usize,
    node: usize,
) -> f64 {
    tree.children(node)
        .map(|c| {
            tree.cond_prob(c) * (a.get(c, ja) - a.get(node, ja)) * (b.get(c, jb) - b.get(node, jb))
        })
        .sum()
}

/// Δ⟨a, b⟩_t for scalar martingales, one value per time-`(t−1)` node.
pub fn delta_bracket(
    tree: &FiltrationTree,
    a: &AdaptedProcess,
    b: &AdaptedProcess,
    t: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    if t == 0 || t > tree.horizon() {
        return Err(Error::TimeOutOfRange {
            time: t,
            horizon: tree.horizon(),
        });
    }
    for p in [a, b] {
        if p.dim() != 1 || p.num_nodes() != tree.num_nodes() {
            return Err(Error::Dimension("delta_bracket expects scalar processes on the tree".into()));
        }
        let residual = martingale_residual(tree, p);
        if residual > tol.tol {
            return Err(Error::NotMartingale { residual });
        }
    }
    Ok(tree
        .nodes_at(t - 1)
        .map(|n| bracket_at(tree, a, 0, b, 0, n))
        .collect())
}

/// Galtchouk–Kunita–Watanabe decomposition of a scalar martingale `z` with
/// respect to the `d1`-dimensional martingale `m`:
/// `z = z0 + ξ·m + residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct GkwDecomposition {
    pub z0: f64,
    /// Integrand against `m`; zero where the corresponding direction is degenerate.
    pub xi: PredictableProcess,
    /// The part of `z − z0` strongly orthogonal to every component of `m`.
    pub residual: AdaptedProcess,
    /// Gram–Schmidt pieces: component `i` integrates against the `i`-th
    /// orthogonalised direction. They sum to `ξ·m` and are mutually strongly
    /// orthogonal, and orthogonal to `residual`.
    pub components: AdaptedProcess,
}

/// Conditional Gram–Schmidt projection at each inner node.
///
/// The increments ΔM¹, …, ΔM^d are orthogonalised in the inner product
/// E[XY | F_{t−1}]; Δz is projected onto the orthogonal directions and the
/// coefficients are mapped back to the original basis by back-substitution.
/// Directions whose orthogonalised conditional variance vanishes get ξ = 0.
pub fn gkw_decompose(
    tree: &FiltrationTree,
    z: &AdaptedProcess,
    m: &AdaptedProcess,
    tol: &Tolerances,
) -> GkwDecomposition {
    let d = m.dim();
    let mut xi = PredictableProcess::zeros(tree, d);
    let mut residual = AdaptedProcess::zeros(tree, 1);
    let mut components = AdaptedProcess::zeros(tree, d);

    for n in 0..tree.num_inner() {
        let kids: Vec<usize> = tree.children(n).collect();
        let w: Vec<f64> = kids.iter().map(|&c| tree.cond_prob(c)).collect();
        let inner = |x: &[f64], y: &[f64]| -> f64 {
            w.iter().zip(x).zip(y).map(|((p, a), b)| p * a * b).sum()
        };
        let dz: Vec<f64> = kids.iter().map(|&c| z.value(c) - z.value(n)).collect();
        let dm: Vec<Vec<f64>> = (0..d)
            .map(|i| kids.iter().map(|&c| m.get(c, i) - m.get(n, i)).collect())
            .collect();

        // q_i = m_i − Σ_{k<i, k live} r[k][i] q_k
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut qq = vec![0.0; d];
        let mut live = vec![false; d];
        let mut r = vec![vec![0.0; d]; d];
        for i in 0..d {
            let mut qi = dm[i].clone();
            for k in 0..i {
                if live[k] {
                    r[k][i] = inner(&dm[i], &q[k]) / qq[k];
                    for (a, b) in qi.iter_mut().zip(&q[k]) {
                        *a -= r[k][i] * b;
                    }
                }
            }
            let norm = inner(&qi, &qi);
            let raw = inner(&dm[i], &dm[i]);
            qq[i] = norm;
            live[i] = norm > tol.tol && norm > tol.rank * raw;
            q.push(qi);
        }

        let coeff: Vec<f64> = (0..d)
            .map(|i| if live[i] { inner(&dz, &q[i]) / qq[i] } else { 0.0 })
            .collect();

        // R ξ = a restricted to live indices (R unit upper triangular).
        let slot = xi.at_mut(n);
        for i in (0..d).rev() {
            if !live[i] {
                continue;
            }
            let mut v = coeff[i];
            for k in i + 1..d {
                if live[k] {
                    v -= r[i][k] * slot[k];
                }
            }
            slot[i] = v;
        }

        for (ci, &c) in kids.iter().enumerate() {
            let mut explained = 0.0;
            for i in 0..d {
                let piece = coeff[i] * if live[i] { q[i][ci] } else { 0.0 };
                components.set(c, i, components.get(n, i) + piece);
                explained += piece;
            }
            residual.set(c, 0, residual.value(n) + dz[ci] - explained);
        }
    }

    GkwDecomposition {
        z0: z.value(0),
        xi,
        residual,
        components,
    }
}

/// (ϑ·S)_t = Σ_{u≤t} ϑ_u·(S_u − S_{u−1}), zero at the root.
pub fn stoch_integral(tree: &FiltrationTree, theta: &PredictableProcess, s: &AdaptedProcess) -> AdaptedProcess {
    assert_eq!(theta.dim(), s.dim(), "strategy and price dimensions differ");
    let mut out = vec![0.0; tree.num_nodes()];
    for c in 1..tree.num_nodes() {
        let n = tree.parent(c).unwrap();
        let inc: f64 = theta
            .at(n)
            .iter()
            .zip(s.at(c).iter().zip(s.at(n)))
            .map(|(th, (sc, sn))| th * (sc - sn))
            .sum();
        out[c] = out[n] + inc;
    }
    AdaptedProcess::scalar(out)
}

/// ΔN̄_t = (ΔZ_t / Z_{t−1}) · 1{Z_{t−1} ≠ 0}, stored on the time-`t` node (zero at the root).
pub fn restart_increments(tree: &FiltrationTree, z: &AdaptedProcess, tol: &Tolerances) -> AdaptedProcess {
    let mut out = vec![0.0; tree.num_nodes()];
    for (c, o) in out.iter_mut().enumerate().skip(1) {
        let n = tree.parent(c).unwrap();
        let zn = z.value(n);
        if !tol.is_zero(zn) {
            *o = (z.value(c) - zn) / zn;
        }
    }
    AdaptedProcess::scalar(out)
}

/// The restarted stochastic exponential ˢE(N̄)_t = Π_{k=s+1..t}(1 + ΔN̄_k).
///
/// Values at times `t ≤ s` are the empty product, 1.
pub fn restarted_exponential(tree: &FiltrationTree, z: &AdaptedProcess, s: usize, tol: &Tolerances) -> AdaptedProcess {
    let dn = restart_increments(tree, z, tol);
    let mut out = vec![1.0; tree.num_nodes()];
    for c in 1..tree.num_nodes() {
        if tree.time(c) > s {
            let n = tree.parent(c).unwrap();
            out[c] = out[n] * (1.0 + dn.value(c));
        }
    }
    AdaptedProcess::scalar(out)
}

fn check_leaf_len(tree: &FiltrationTree, x: &[f64]) -> Result<()> {
    if x.len() != tree.num_leaves() {
        return Err(Error::Dimension(format!(
            "expected {} leaf values, got {}",
            tree.num_leaves(),
            x.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn half() -> FiltrationTree {
        FiltrationTree::one_period(&[0.5, 0.5]).unwrap()
    }

    /// One-period, four equally likely leaves.
    fn four() -> FiltrationTree {
        FiltrationTree::one_period(&[0.25; 4]).unwrap()
    }

    fn one_period(tree: &FiltrationTree, root: f64, leaves: &[f64]) -> AdaptedProcess {
        let mut v = vec![root];
        v.extend_from_slice(leaves);
        assert_eq!(v.len(), tree.num_nodes());
        AdaptedProcess::scalar(v)
    }

    #[test]
    fn cond_expect_examples() {
        let tree = half();
        assert_eq!(cond_expect(&tree, &[3.0, 3.0], 0).unwrap(), vec![3.0]);
        assert_eq!(cond_expect(&tree, &[8.0, 9.0], 0).unwrap(), vec![8.5]);
        assert_eq!(cond_expect(&tree, &[1.0, 0.0], 0).unwrap(), vec![0.5]);
        assert_eq!(cond_expect(&tree, &[8.0, 9.0], 1).unwrap(), vec![8.0, 9.0]);
        assert!(cond_expect(&tree, &[8.0, 9.0], 2).is_err());
    }

    #[test]
    fn martingale_from_terminal_matches_cond_expect() {
        let tree = FiltrationTree::new(&[vec![2], vec![2, 3]], &[0.1, 0.2, 0.3, 0.15, 0.25]).unwrap();
        let x = [1.0, -2.0, 4.0, 0.5, 3.0];
        let z = martingale_from_terminal(&tree, &x);
        for t in 0..=2 {
            let ce = cond_expect(&tree, &x, t).unwrap();
            for (n, v) in tree.nodes_at(t).zip(ce) {
                assert_abs_diff_eq!(z.value(n), v, epsilon = 1e-14);
            }
        }
        assert!(is_martingale(&tree, &z, &tol()).pass);
    }

    #[test]
    fn is_martingale_rejects_drift() {
        let tree = FiltrationTree::uniform(2, 2).unwrap();
        let x = AdaptedProcess::from_fn(&tree, 1, |n, _| tree.time(n) as f64);
        let check = is_martingale(&tree, &x, &tol());
        assert!(!check.pass);
        assert_abs_diff_eq!(check.max_residual, 1.0);
    }

    #[test]
    fn delta_bracket_examples() {
        let tree = half();
        let m = one_period(&tree, 0.0, &[1.0, -1.0]);
        assert_eq!(delta_bracket(&tree, &m, &m, 1, &tol()).unwrap(), vec![1.0]);
        let c = one_period(&tree, 2.0, &[2.0, 2.0]);
        assert_eq!(delta_bracket(&tree, &c, &m, 1, &tol()).unwrap(), vec![0.0]);

        let tree = four();
        let a = one_period(&tree, 0.0, &[1.0, 1.0, -1.0, -1.0]);
        let b = one_period(&tree, 0.0, &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(delta_bracket(&tree, &a, &b, 1, &tol()).unwrap(), vec![0.0]);
    }

    #[test]
    fn delta_bracket_requires_martingales() {
        let tree = FiltrationTree::one_period(&[0.6, 0.4]).unwrap();
        let m = one_period(&tree, 0.0, &[1.0, -1.0]);
        assert!(matches!(
            delta_bracket(&tree, &m, &m, 1, &tol()),
            Err(Error::NotMartingale { .. })
        ));
        assert!(delta_bracket(&tree, &m, &m, 0, &tol()).is_err());
    }

    #[test]
    fn gkw_examples() {
        // Z̄ = 2 − M₁ with ΔM = ±1: ξ = −1, no residual.
        let tree = half();
        let m = one_period(&tree, 0.0, &[1.0, -1.0]);
        let z = one_period(&tree, 2.0, &[1.0, 3.0]);
        let g = gkw_decompose(&tree, &z, &m, &tol());
        assert_abs_diff_eq!(g.z0, 2.0);
        assert_abs_diff_eq!(g.xi.get(0, 0), -1.0);
        assert!(g.residual.max_abs() < 1e-15);

        // constant z
        let z = one_period(&tree, 5.0, &[5.0, 5.0]);
        let g = gkw_decompose(&tree, &z, &m, &tol());
        assert_eq!(g.xi.get(0, 0), 0.0);
        assert!(g.residual.max_abs() < 1e-15);

        // z strongly orthogonal to M
        let tree = four();
        let m = one_period(&tree, 0.0, &[1.0, 1.0, -1.0, -1.0]);
        let z = one_period(&tree, 3.0, &[4.0, 2.0, 4.0, 2.0]);
        let g = gkw_decompose(&tree, &z, &m, &tol());
        assert_eq!(g.xi.get(0, 0), 0.0);
        for n in 0..tree.num_nodes() {
            assert_abs_diff_eq!(g.residual.value(n), z.value(n) - 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gkw_zero_variance_tie_break() {
        let tree = half();
        let m = AdaptedProcess::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]], 2).unwrap();
        let z = one_period(&tree, 1.0, &[3.0, -1.0]);
        let g = gkw_decompose(&tree, &z, &m, &tol());
        assert_eq!(g.xi.get(0, 0), 0.0);
        assert_abs_diff_eq!(g.xi.get(0, 1), 2.0);
    }

    #[test]
    fn gkw_collinear_directions() {
        // M² = 2 M¹: only the first direction is used.
        let tree = four();
        let m = AdaptedProcess::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 2.0], vec![1.0, 2.0], vec![-1.0, -2.0], vec![-1.0, -2.0]],
            2,
        )
        .unwrap();
        let z = one_period(&tree, 0.0, &[3.0, 1.0, -1.0, -3.0]);
        let g = gkw_decompose(&tree, &z, &m, &tol());
        assert_abs_diff_eq!(g.xi.get(0, 0), 2.0, epsilon = 1e-14);
        assert_eq!(g.xi.get(0, 1), 0.0);
    }

    #[test]
    fn stoch_integral_examples() {
        let tree = FiltrationTree::uniform(2, 2).unwrap();
        let s = AdaptedProcess::from_fn(&tree, 2, |n, j| (n * (j + 1)) as f64 * 0.3 - 1.0);
        let zero = PredictableProcess::zeros(&tree, 2);
        assert_eq!(stoch_integral(&tree, &zero, &s).max_abs(), 0.0);
        let e1 = PredictableProcess::constant(&tree, &[0.0, 1.0]);
        let g = stoch_integral(&tree, &e1, &s);
        for n in 0..tree.num_nodes() {
            assert_abs_diff_eq!(g.value(n), s.get(n, 1) - s.get(0, 1), epsilon = 1e-14);
        }

        let tree = half();
        let s = one_period(&tree, 25.0 / 17.0, &[2.0, 1.0]);
        let g = stoch_integral(&tree, &PredictableProcess::constant(&tree, &[1.0]), &s);
        assert_abs_diff_eq!(g.value(1), 9.0 / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.value(2), -8.0 / 17.0, epsilon = 1e-15);
    }

    #[test]
    fn restarted_exponential_examples() {
        // nonvanishing z: ˢE(N̄)_t = z_t / z_s
        let tree = FiltrationTree::new(&[vec![2], vec![2, 2]], &[0.1, 0.3, 0.4, 0.2]).unwrap();
        let z = martingale_from_terminal(&tree, &[1.0, 2.0, 4.0, 3.0]);
        for s in 0..=2 {
            let e = restarted_exponential(&tree, &z, s, &tol());
            for n in 0..tree.num_nodes() {
                if tree.time(n) >= s {
                    let zs = z.value(tree.ancestor_at(n, s));
                    assert_abs_diff_eq!(e.value(n), z.value(n) / zs, epsilon = 1e-13);
                }
            }
        }

        let c = martingale_from_terminal(&tree, &[2.0; 4]);
        let e = restarted_exponential(&tree, &c, 0, &tol());
        assert!((0..tree.num_nodes()).all(|n| (e.value(n) - 1.0).abs() < 1e-15));

        // Z̄ = (0; −1, 1): the increment out of a zero is dropped.
        let tree = half();
        let z = one_period(&tree, 0.0, &[-1.0, 1.0]);
        let e = restarted_exponential(&tree, &z, 0, &tol());
        assert_eq!(e.value(1), 1.0);
        assert_eq!(e.value(2), 1.0);
    }

    #[test]
    fn restarted_exponential_absorbs_at_zero() {
        let tree = FiltrationTree::new(&[vec![2], vec![2, 2]], &[0.25; 4]).unwrap();
        // z hits zero on node 1 and stays there.
        let z = martingale_from_terminal(&tree, &[0.0, 0.0, 2.0, 4.0]);
        let e = restarted_exponential(&tree, &z, 0, &tol());
        assert_abs_diff_eq!(e.value(1), 0.0);
        assert_abs_diff_eq!(e.value(3), 0.0);
        assert_abs_diff_eq!(e.value(6), 4.0 / 1.5);
        assert!(is_martingale(&tree, &e, &tol()).pass);
    }
}
