//! Online ridge regression state.
//!
//! [`RidgeState`] keeps `M = (XᵀX + aI)⁻¹` current under rank-one
//! Sherman–Morrison updates, together with the label accumulator
//! `S = Σ x_k y_kᵀ` and the full example history that conformal prediction
//! needs. [`TestAugmentedView`] adds a test object to the design matrix
//! without touching the state.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::timeseries::SupervisedPair;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeState {
    ridge: f64,
    dim: usize,
    outputs: usize,
    /// `None` while `ridge == 0` and `XᵀX` is still singular.
    inverse: Option<DMatrix<f64>>,
    /// Raw `XᵀX`, kept only until `inverse` becomes available.
    gram: Option<DMatrix<f64>>,
    cross: DMatrix<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    count: usize,
}

/// Rounding lets Cholesky succeed on singular grams; ask for a sane spectrum.
fn well_conditioned(g: &DMatrix<f64>) -> bool {
    let ev = g.clone().symmetric_eigenvalues();
    let max = ev.max();
    max > 0.0 && ev.min() > max * 1e-12
}

fn sherman_morrison(m: &mut DMatrix<f64>, x: &[f64]) {
    let p = x.len();
    let mut u = vec![0.0; p];
    for (r, ur) in u.iter_mut().enumerate() {
        *ur = (0..p).map(|c| m[(r, c)] * x[c]).sum();
    }
    let denom = 1.0 + x.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
    for c in 0..p {
        for r in 0..p {
            m[(r, c)] -= u[r] * u[c] / denom;
        }
    }
    for c in 0..p {
        for r in 0..c {
            let avg = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = avg;
            m[(c, r)] = avg;
        }
    }
}

impl RidgeState {
    /// Empty state for `dim`-dimensional objects and `outputs`-dimensional labels.
    ///
    /// With `ridge > 0` the inverse starts at `I / ridge`. With `ridge == 0`
    /// queries fail until the absorbed objects span the whole space.
    pub fn new(ridge: f64, dim: usize, outputs: usize) -> Result<Self> {
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::Config(format!("ridge parameter must be finite and >= 0, got {ridge}")));
        }
        if dim == 0 || outputs == 0 {
            return Err(Error::Config("object and label dimensions must be positive".into()));
        }
        let (inverse, gram) = if ridge > 0.0 {
            (Some(DMatrix::identity(dim, dim) / ridge), None)
        } else {
            (None, Some(DMatrix::zeros(dim, dim)))
        };
        Ok(Self {
            ridge,
            dim,
            outputs,
            inverse,
            gram,
            cross: DMatrix::zeros(dim, outputs),
            xs: Vec::new(),
            ys: Vec::new(),
            count: 0,
        })
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Number of absorbed examples.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn object(&self, j: usize) -> &[f64] {
        &self.xs[j * self.dim..(j + 1) * self.dim]
    }

    pub fn label(&self, j: usize) -> &[f64] {
        &self.ys[j * self.outputs..(j + 1) * self.outputs]
    }

    /// `Σ x_k y_kᵀ` over absorbed examples, `dim × outputs`.
    pub fn label_accumulator(&self) -> &DMatrix<f64> {
        &self.cross
    }

    pub fn gram_inverse(&self) -> Result<&DMatrix<f64>> {
        self.inverse.as_ref().ok_or(Error::NotInvertible {
            absorbed: self.count,
            dim: self.dim,
        })
    }

    fn check_dims(&self, x: &[f64], y: Option<&[f64]>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                what: "object",
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some(y) = y {
            if y.len() != self.outputs {
                return Err(Error::Dimension {
                    what: "label",
                    expected: self.outputs,
                    got: y.len(),
                });
            }
        }
        Ok(())
    }

    pub fn absorb(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        self.check_dims(x, Some(y))?;
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite value in absorbed example".into()));
        }
        match (&mut self.inverse, &mut self.gram) {
            (Some(m), _) => sherman_morrison(m, x),
            (None, Some(g)) => {
                let xv = DVector::from_column_slice(x);
                *g += &xv * xv.transpose();
                if self.count + 1 >= self.dim && well_conditioned(g) {
                    if let Some(chol) = g.clone().cholesky() {
                        let inv = chol.inverse();
                        if inv.iter().all(|v| v.is_finite()) {
                            self.inverse = Some(inv);
                            self.gram = None;
                        }
                    }
                }
            }
            (None, None) => unreachable!("ridge state lost both gram and inverse"),
        }
        for (k, &yk) in y.iter().enumerate() {
            for (r, &xr) in x.iter().enumerate() {
                self.cross[(r, k)] += xr * yk;
            }
        }
        self.xs.extend_from_slice(x);
        self.ys.extend_from_slice(y);
        self.count += 1;
        Ok(())
    }

    pub fn absorb_pair(&mut self, pair: &SupervisedPair) -> Result<()> {
        self.absorb(&pair.x, &pair.y)
    }

    /// Non-mutating view of the design matrix extended by `x_test`.
    pub fn peek_with_test(&self, x_test: &[f64]) -> Result<TestAugmentedView<'_>> {
        self.check_dims(x_test, None)?;
        let m = self.gram_inverse()?;
        let p = self.dim;
        let mx: Vec<f64> = (0..p)
            .map(|r| (0..p).map(|c| m[(r, c)] * x_test[c]).sum())
            .collect();
        let q: f64 = mx.iter().zip(x_test).map(|(a, b)| a * b).sum();
        let denom = 1.0 + q;
        // M_aug x = M x / (1 + xᵀMx)
        let hat_dir: Vec<f64> = mx.iter().map(|v| v / denom).collect();
        // M_aug S = M S - (M x)(xᵀ M S) / (1 + xᵀMx)
        let ms = m * &self.cross;
        let mut weights = ms.clone();
        for k in 0..self.outputs {
            let xms: f64 = (0..p).map(|r| x_test[r] * ms[(r, k)]).sum();
            for r in 0..p {
                weights[(r, k)] -= mx[r] * xms / denom;
            }
        }
        if hat_dir.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite augmented ridge quantities".into()));
        }
        Ok(TestAugmentedView {
            state: self,
            x_test: x_test.to_vec(),
            hat_dir,
            weights,
        })
    }
}

/// The ridge state with one test object appended as row `n_train`.
#[derive(Debug, Clone)]
pub struct TestAugmentedView<'a> {
    state: &'a RidgeState,
    x_test: Vec<f64>,
    hat_dir: Vec<f64>,
    /// `M_aug S`, `dim × outputs`.
    weights: DMatrix<f64>,
}

impl<'a> TestAugmentedView<'a> {
    pub fn state(&self) -> &'a RidgeState {
        self.state
    }

    pub fn n_train(&self) -> usize {
        self.state.len()
    }

    /// Rows in the augmented design matrix.
    pub fn n(&self) -> usize {
        self.state.len() + 1
    }

    pub fn outputs(&self) -> usize {
        self.state.outputs
    }

    /// Object of row `j`; row `n_train` is the test object.
    pub fn object(&self, j: usize) -> &[f64] {
        if j == self.n_train() {
            &self.x_test
        } else {
            self.state.object(j)
        }
    }

    /// `M_aug x_n`.
    pub fn hat_direction(&self) -> &[f64] {
        &self.hat_dir
    }

    /// `M_aug S`, `dim × outputs`.
    pub fn label_weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// `x_jᵀ M_aug x_n`, i.e. entry `(j, n)` of the hat matrix.
    pub fn hat_test(&self, j: usize) -> f64 {
        self.object(j).iter().zip(&self.hat_dir).map(|(a, b)| a * b).sum()
    }

    /// `x_jᵀ M_aug S` written into `out` (length `outputs`).
    pub fn hat_labels_into(&self, j: usize, out: &mut [f64]) {
        let x = self.object(j);
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.weights.column(k).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn hat_labels(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs()];
        self.hat_labels_into(j, &mut out);
        out
    }

    /// Materialised `(X_nᵀX_n + aI)⁻¹` including the test row.
    pub fn augmented_inverse(&self) -> DMatrix<f64> {
        let mut m = self
            .state
            .inverse
            .clone()
            .expect("view exists only for invertible states");
        sherman_morrison(&mut m, &self.x_test);
        m
    }
}

/// Candidate ridge parameters for generalised cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct GcvGrid {
    values: Vec<f64>,
}

impl GcvGrid {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("GCV grid is empty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("GCV grid entries must be finite and positive".into()));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(Self { values })
    }

    /// `count` log-spaced points from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && count >= 1) {
            return Err(Error::Config(format!("bad GCV range [{lo}, {hi}] x {count}")));
        }
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (count - 1) as f64;
        Self::new((0..count).map(|k| 10f64.powf(a + step * k as f64)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Default for GcvGrid {
    fn default() -> Self {
        Self::log_spaced(1e-4, 1e4, 25).expect("static grid")
    }
}

/// Thin SVD of the training design matrix, reused across grid points.
pub struct GcvProblem {
    rows: usize,
    singular: Vec<f64>,
    left: DMatrix<f64>,
    labels: DMatrix<f64>,
}

impl GcvProblem {
    pub fn new(pairs: &[SupervisedPair]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::TooFewExamples {
                needed: 2,
                available: pairs.len(),
            });
        }
        let p = pairs[0].x.len();
        let h = pairs[0].y.len();
        for pair in pairs {
            if pair.x.len() != p || pair.y.len() != h {
                return Err(Error::Dimension {
                    what: "GCV example",
                    expected: p,
                    got: pair.x.len(),
                });
            }
        }
        let n = pairs.len();
        let x = DMatrix::from_fn(n, p, |r, c| pairs[r].x[c]);
        let labels = DMatrix::from_fn(n, h, |r, c| pairs[r].y[c]);
        let svd = x.svd(true, false);
        let left = svd
            .u
            .ok_or_else(|| Error::Numerical("SVD did not return left vectors".into()))?;
        Ok(Self {
            rows: n,
            singular: svd.singular_values.iter().copied().collect(),
            left,
            labels,
        })
    }

    /// `n ‖(I − H_a) Y‖²_F / tr(I − H_a)²`, or `None` when `H_a` is undefined.
    pub fn score(&self, ridge: f64) -> Option<f64> {
        let smax = self.singular.iter().copied().fold(0.0, f64::max);
        let tol = smax * f64::EPSILON * self.rows.max(self.singular.len()) as f64;
        let shrink: Vec<f64> = self
            .singular
            .iter()
            .map(|&s| {
                if ridge > 0.0 {
                    Some(s * s / (s * s + ridge))
                } else if s > tol {
                    Some(1.0)
                } else {
                    None
                }
            })
            .collect::<Option<_>>()?;
        let proj = self.left.transpose() * &self.labels;
        let mut fitted = proj;
        for (k, d) in shrink.iter().enumerate() {
            fitted.row_mut(k).scale_mut(*d);
        }
        let residual = &self.labels - &self.left * fitted;
        let trace = self.rows as f64 - shrink.iter().sum::<f64>();
        if trace <= 0.0 {
            return None;
        }
        Some(self.rows as f64 * residual.norm_squared() / (trace * trace))
    }
}

/// Grid point minimising the GCV score; ties go to the larger parameter.
pub fn gcv_tune(pairs: &[SupervisedPair], grid: &GcvGrid) -> Result<f64> {
    let problem = GcvProblem::new(pairs)?;
    let mut best: Option<(f64, f64)> = None;
    for &a in grid.values() {
        match problem.score(a) {
            Some(score) if score.is_finite() => {
                if best.is_none_or(|(_, b)| score <= b) {
                    best = Some((a, score));
                }
            }
            _ => warn!("skipping GCV grid point {a}: hat matrix undefined"),
        }
    }
    best.map(|(a, _)| a)
        .ok_or_else(|| Error::Numerical("no usable GCV grid point".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_rows(rng: &mut StdRng, n: usize, p: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    }

    fn direct_inverse(rows: &[Vec<f64>], p: usize, a: f64) -> DMatrix<f64> {
        let mut g = DMatrix::identity(p, p) * a;
        for x in rows {
            let v = DVector::from_column_slice(x);
            g += &v * v.transpose();
        }
        g.try_inverse().unwrap()
    }

    fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn fresh_state_is_scaled_identity() {
        let s = RidgeState::new(1.0, 2, 1).unwrap();
        assert_eq!(s.gram_inverse().unwrap(), &DMatrix::identity(2, 2));
        let s = RidgeState::new(4.0, 1, 1).unwrap();
        assert_eq!(s.gram_inverse().unwrap()[(0, 0)], 0.25);
        assert!(RidgeState::new(-1.0, 2, 1).is_err());
    }

    #[test]
    fn zero_ridge_rejects_rounding_rank() {
        // Repeated identical objects: rank one however many are absorbed.
        let mut s = RidgeState::new(0.0, 4, 1).unwrap();
        for _ in 0..50 {
            s.absorb(&[3.0, 3.0, 3.0, 3.0], &[3.0]).unwrap();
        }
        assert!(s.gram_inverse().is_err());
    }

    #[test]
    fn zero_ridge_defers_until_full_rank() {
        let mut s = RidgeState::new(0.0, 2, 1).unwrap();
        assert!(matches!(s.gram_inverse(), Err(Error::NotInvertible { .. })));
        assert!(s.peek_with_test(&[1.0, 0.0]).is_err());
        s.absorb(&[1.0, 1.0], &[1.0]).unwrap();
        s.absorb(&[2.0, 2.0], &[1.0]).unwrap();
        assert!(s.gram_inverse().is_err(), "collinear objects");
        s.absorb(&[1.0, -1.0], &[1.0]).unwrap();
        let m = s.gram_inverse().unwrap().clone();
        let direct = direct_inverse(
            &[vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, -1.0]],
            2,
            0.0,
        );
        assert!(rel_frobenius(&m, &direct) < 1e-12);
        s.absorb(&[0.5, 3.0], &[2.0]).unwrap();
        let direct = direct_inverse(
            &[vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, -1.0], vec![0.5, 3.0]],
            2,
            0.0,
        );
        assert!(rel_frobenius(s.gram_inverse().unwrap(), &direct) < 1e-10);
    }

    #[test]
    fn single_absorption() {
        let mut s = RidgeState::new(1.0, 2, 1).unwrap();
        s.absorb(&[1.0, 0.0], &[3.0]).unwrap();
        let m = s.gram_inverse().unwrap();
        assert_eq!(m, &DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]));
        assert_eq!(s.label_accumulator(), &DMatrix::from_row_slice(2, 1, &[3.0, 0.0]));

        let mut s = RidgeState::new(1.0, 1, 1).unwrap();
        s.absorb(&[1.0], &[0.0]).unwrap();
        assert_eq!(s.gram_inverse().unwrap()[(0, 0)], 0.5);
    }

    #[test]
    fn dimension_mismatch() {
        let mut s = RidgeState::new(1.0, 2, 2).unwrap();
        assert!(matches!(s.absorb(&[1.0], &[1.0, 2.0]), Err(Error::Dimension { what: "object", .. })));
        assert!(matches!(s.absorb(&[1.0, 1.0], &[1.0]), Err(Error::Dimension { what: "label", .. })));
        assert!(s.peek_with_test(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn five_random_examples_match_direct_inverse() {
        let mut rng = StdRng::seed_from_u64(5);
        let rows = random_rows(&mut rng, 5, 3);
        let mut s = RidgeState::new(0.7, 3, 1).unwrap();
        for x in &rows {
            s.absorb(x, &[0.0]).unwrap();
        }
        let direct = direct_inverse(&rows, 3, 0.7);
        assert!(rel_frobenius(s.gram_inverse().unwrap(), &direct) < 1e-8);
        let m = s.gram_inverse().unwrap();
        assert!(rel_frobenius(&m.transpose(), m) < 1e-10);
    }

    #[test]
    fn peek_on_empty_state() {
        let s = RidgeState::new(1.0, 2, 1).unwrap();
        let x = [1.0, 2.0];
        let view = s.peek_with_test(&x).unwrap();
        // (I + x xᵀ)⁻¹ = I − x xᵀ / (1 + |x|²)
        let expected = DMatrix::from_row_slice(2, 2, &[1.0 - 1.0 / 6.0, -2.0 / 6.0, -2.0 / 6.0, 1.0 - 4.0 / 6.0]);
        assert!(rel_frobenius(&view.augmented_inverse(), &expected) < 1e-14);
        assert!((view.hat_test(0) - 5.0 / 6.0).abs() < 1e-14);
        assert_eq!(view.n(), 1);
    }

    #[test]
    fn peek_then_absorb_agree() {
        let mut rng = StdRng::seed_from_u64(11);
        let mut s = RidgeState::new(0.5, 3, 2).unwrap();
        for x in random_rows(&mut rng, 4, 3) {
            s.absorb(&x, &[1.0, -1.0]).unwrap();
        }
        let x_n = [0.3, -1.2, 0.8];
        let peeked = s.peek_with_test(&x_n).unwrap().augmented_inverse();
        s.absorb(&x_n, &[0.0, 0.0]).unwrap();
        assert!(rel_frobenius(&peeked, s.gram_inverse().unwrap()) < 1e-10);
    }

    #[test]
    fn view_matches_dense_hat_matrix() {
        let mut rng = StdRng::seed_from_u64(3);
        let (p, n, h, a) = (3, 6, 2, 1.3);
        let rows = random_rows(&mut rng, n, p);
        let labels = random_rows(&mut rng, n - 1, h);
        let mut s = RidgeState::new(a, p, h).unwrap();
        for (x, y) in rows.iter().zip(&labels) {
            s.absorb(x, y).unwrap();
        }
        let view = s.peek_with_test(&rows[n - 1]).unwrap();

        let xmat = DMatrix::from_fn(n, p, |r, c| rows[r][c]);
        let inv = (xmat.transpose() * &xmat + DMatrix::identity(p, p) * a)
            .try_inverse()
            .unwrap();
        let hat = &xmat * inv * xmat.transpose();
        let y0 = DMatrix::from_fn(n, h, |r, c| if r < n - 1 { labels[r][c] } else { 0.0 });
        let hy = &hat * &y0;
        for j in 0..n {
            assert!((view.hat_test(j) - hat[(j, n - 1)]).abs() < 1e-10);
            let got = view.hat_labels(j);
            for k in 0..h {
                assert!((got[k] - hy[(j, k)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn peek_does_not_mutate() {
        let mut rng = StdRng::seed_from_u64(8);
        let mut s = RidgeState::new(2.0, 3, 1).unwrap();
        for x in random_rows(&mut rng, 7, 3) {
            s.absorb(&x, &[rng.random_range(-1.0..1.0)]).unwrap();
        }
        let before = s.gram_inverse().unwrap().clone();
        let a = s.peek_with_test(&[1.0, 2.0, 3.0]).unwrap().hat_labels(2);
        let _ = s.peek_with_test(&[-4.0, 0.5, 0.0]).unwrap();
        let b = s.peek_with_test(&[1.0, 2.0, 3.0]).unwrap().hat_labels(2);
        assert_eq!(a, b);
        assert_eq!(&before, s.gram_inverse().unwrap());
    }

    fn pairs_from(rows: &[Vec<f64>], labels: &[Vec<f64>]) -> Vec<SupervisedPair> {
        rows.iter()
            .zip(labels)
            .enumerate()
            .map(|(k, (x, y))| SupervisedPair {
                x: x.clone(),
                y: y.clone(),
                origin: k,
            })
            .collect()
    }

    fn dense_gcv(pairs: &[SupervisedPair], a: f64) -> f64 {
        let n = pairs.len();
        let p = pairs[0].x.len();
        let h = pairs[0].y.len();
        let x = DMatrix::from_fn(n, p, |r, c| pairs[r].x[c]);
        let y = DMatrix::from_fn(n, h, |r, c| pairs[r].y[c]);
        let inv = (x.transpose() * &x + DMatrix::identity(p, p) * a)
            .try_inverse()
            .unwrap();
        let resid_op = DMatrix::identity(n, n) - &x * inv * x.transpose();
        let r = &resid_op * &y;
        n as f64 * r.norm_squared() / resid_op.trace().powi(2)
    }

    #[test]
    fn gcv_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(20);
        for _ in 0..10 {
            let rows = random_rows(&mut rng, 20, 3);
            let labels: Vec<Vec<f64>> = rows
                .iter()
                .map(|x| {
                    vec![
                        x[0] - 0.5 * x[1] + rng.random_range(-1.0..1.0),
                        2.0 * x[2] + rng.random_range(-1.0..1.0),
                    ]
                })
                .collect();
            let pairs = pairs_from(&rows, &labels);
            let grid = GcvGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
            let problem = GcvProblem::new(&pairs).unwrap();
            let mut oracle_best = (0.0, f64::INFINITY);
            for &a in grid.values() {
                let dense = dense_gcv(&pairs, a);
                let fast = problem.score(a).unwrap();
                assert!((dense - fast).abs() <= 1e-9 * dense, "{dense} vs {fast}");
                if dense <= oracle_best.1 {
                    oracle_best = (a, dense);
                }
            }
            assert_eq!(gcv_tune(&pairs, &grid).unwrap(), oracle_best.0);
        }
    }

    #[test]
    fn gcv_large_ridge_limit() {
        let mut rng = StdRng::seed_from_u64(21);
        let rows = random_rows(&mut rng, 15, 2);
        let labels = random_rows(&mut rng, 15, 3);
        let pairs = pairs_from(&rows, &labels);
        let limit: f64 = labels.iter().flatten().map(|v| v * v).sum::<f64>() / 15.0;
        let score = GcvProblem::new(&pairs).unwrap().score(1e12).unwrap();
        assert!((score - limit).abs() < 1e-6 * limit);
    }

    #[test]
    fn gcv_single_point_and_errors() {
        let pairs = pairs_from(&[vec![1.0], vec![2.0]], &[vec![1.0], vec![3.0]]);
        let grid = GcvGrid::new(vec![3.5]).unwrap();
        assert_eq!(gcv_tune(&pairs, &grid).unwrap(), 3.5);
        assert!(gcv_tune(&pairs[..1], &grid).is_err());
        assert!(GcvGrid::new(vec![]).is_err());
        assert!(GcvGrid::new(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn gcv_zero_ridge_singular_is_skipped() {
        // Collinear columns: a = 0 is undefined.
        let pairs = pairs_from(
            &[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]],
            &[vec![1.0], vec![2.0], vec![2.5]],
        );
        let problem = GcvProblem::new(&pairs).unwrap();
        assert!(problem.score(0.0).is_none());
        assert!(problem.score(1.0).is_some());
    }

    #[test]
    fn default_grid_shape() {
        let g = GcvGrid::default();
        assert_eq!(g.values().len(), 25);
        assert!((g.values()[0] - 1e-4).abs() < 1e-18);
        assert!((g.values()[24] - 1e4).abs() < 1e-8);
        assert!((g.values()[12] - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gcv_invariant_under_label_column_permutation(seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rows = random_rows(&mut rng, 12, 3);
            let labels = random_rows(&mut rng, 12, 3);
            let swapped: Vec<Vec<f64>> = labels.iter().map(|y| vec![y[2], y[0], y[1]]).collect();
            let a = GcvProblem::new(&pairs_from(&rows, &labels)).unwrap().score(0.8).unwrap();
            let b = GcvProblem::new(&pairs_from(&rows, &swapped)).unwrap().score(0.8).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn sherman_morrison_tracks_direct_inverse(seed in 0u64..10_000, p in 1usize..=8, n in 0usize..=50) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = rng.random_range(0.1..5.0);
            let rows = random_rows(&mut rng, n, p);
            let mut s = RidgeState::new(a, p, 1).unwrap();
            for x in &rows {
                s.absorb(x, &[0.0]).unwrap();
            }
            let direct = direct_inverse(&rows, p, a);
            prop_assert!(rel_frobenius(s.gram_inverse().unwrap(), &direct) < 1e-8);
        }
    }
}
