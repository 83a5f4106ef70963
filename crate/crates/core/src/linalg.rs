//! Weighted minimal-norm least squares.
//!
//! Solves min_x Σ_ω w_ω ((A x)_ω − b_ω)² through the normal equations
//! AᵀWA x = AᵀW b. The Gram matrix is eigendecomposed once; eigenvalues below
//! `rank_tol · max diag(AᵀWA)` are treated as zero, which yields the
//! minimal-norm minimiser and an explicit kernel basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone)]
pub struct LeastSquares {
    design: DMatrix<f64>,
    weights: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    cutoff: f64,
}

impl LeastSquares {
    pub fn new(design: DMatrix<f64>, weights: &[f64], rank_tol: f64) -> Self {
        assert_eq!(design.nrows(), weights.len(), "one weight per row");
        let mut weighted = design.clone();
        for (mut row, w) in weighted.row_iter_mut().zip(weights) {
            row *= *w;
        }
        let gram = design.transpose() * &weighted;
        let max_diag = gram.diagonal().iter().fold(0.0f64, |m, v| m.max(*v));
        let (eigenvectors, eigenvalues) = if gram.is_empty() {
            (gram, DVector::zeros(0))
        } else {
            let eig = SymmetricEigen::new(gram);
            (eig.eigenvectors, eig.eigenvalues)
        };
        Self {
            design,
            weights: weights.to_vec(),
            eigenvectors,
            eigenvalues,
            cutoff: rank_tol * max_diag,
        }
    }

    pub fn ncols(&self) -> usize {
        self.design.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| self.live(l)).count()
    }

    fn live(&self, eigenvalue: f64) -> bool {
        eigenvalue > self.cutoff && eigenvalue > 0.0
    }

    fn pseudo_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.ncols());
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            if self.live(l) {
                let v = self.eigenvectors.column(i);
                x.axpy(v.dot(rhs) / l, &v, 1.0);
            }
        }
        x
    }

    fn normal_rhs(&self, residual: &DVector<f64>) -> DVector<f64> {
        let weighted = DVector::from_iterator(
            residual.len(),
            residual.iter().zip(&self.weights).map(|(r, w)| r * w),
        );
        self.design.transpose() * weighted
    }

    /// Minimal-norm minimiser, with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> DVector<f64> {
        assert_eq!(b.len(), self.design.nrows(), "right-hand side length");
        if self.ncols() == 0 {
            return DVector::zeros(0);
        }
        let b = DVector::from_column_slice(b);
        let mut x = self.pseudo_solve(&self.normal_rhs(&b));
        let r = &b - &self.design * &x;
        x += self.pseudo_solve(&self.normal_rhs(&r));
        x
    }

    /// Unit vectors spanning the numerical kernel of the design matrix.
    pub fn kernel(&self) -> Vec<DVector<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| !self.live(l))
            .map(|(i, _)| self.eigenvectors.column(i).into_owned())
            .collect()
    }

    pub fn apply(&self, x: &DVector<f64>) -> Vec<f64> {
        (&self.design * x).iter().copied().collect()
    }

    /// Σ w (A x − b)².
    pub fn weighted_sq_error(&self, x: &DVector<f64>, b: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(b)
            .zip(&self.weights)
            .map(|((ax, bb), w)| w * (ax - bb) * (ax - bb))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_rank_matches_closed_form() {
        // One regressor: x = Σ w a b / Σ w a².
        let a = DMatrix::from_column_slice(2, 1, &[9.0 / 17.0, -8.0 / 17.0]);
        let ls = LeastSquares::new(a, &[0.5, 0.5], 1e-10);
        let x = ls.solve(&[1.0, 1.0]);
        let expect = (0.5 * 9.0 / 17.0 - 0.5 * 8.0 / 17.0) / (0.5 * 81.0 / 289.0 + 0.5 * 64.0 / 289.0);
        assert_abs_diff_eq!(x[0], expect, epsilon = 1e-14);
        assert_eq!(ls.rank(), 1);
        assert!(ls.kernel().is_empty());
    }

    #[test]
    fn collinear_columns_give_minimal_norm() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let ls = LeastSquares::new(a, &[0.2, 0.3, 0.5], 1e-10);
        assert_eq!(ls.rank(), 1);
        let x = ls.solve(&[1.0, 2.0, -1.0]);
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-13);
        let k = ls.kernel();
        assert_eq!(k.len(), 1);
        assert_abs_diff_eq!(k[0][0] + k[0][1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn zero_design() {
        let ls = LeastSquares::new(DMatrix::zeros(2, 1), &[0.5, 0.5], 1e-10);
        assert_eq!(ls.rank(), 0);
        assert_eq!(ls.solve(&[3.0, 4.0])[0], 0.0);
        let empty = LeastSquares::new(DMatrix::zeros(2, 0), &[0.5, 0.5], 1e-10);
        assert_eq!(empty.solve(&[1.0, 2.0]).len(), 0);
    }
}
