//! MIMO conformalised ridge regression.
//!
//! For a test object `x_n` and a hypothetical label `y`, every ridge residual
//! on the augmented data is affine in `y`: `r_j(y) = a_j + b_j y`. With
//! `C = I − H_n`, the intercepts are `A = C (y_1, …, y_{n−1}, 0)ᵀ` and the
//! slopes `B = C e_n`. The prediction interval at step `i` is bounded by order
//! statistics of the critical points `(a_ji − a_ni) / (b_n − b_j)`.
//!
//! `A` and `B` are read off the ridge view (`M_aug` and `S`) row by row, so
//! the `n × n` hat matrix is never formed. `B` does not depend on the step,
//! so it is stored once.

use crate::error::{Error, Result};
use crate::ridge::TestAugmentedView;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualComponents {
    rows: usize,
    outputs: usize,
    /// Row-major `rows × outputs`.
    intercepts: Vec<f64>,
    slopes: Vec<f64>,
}

impl ResidualComponents {
    /// Rows in the augmented design, test row last.
    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// `a_{j,step}` with 0-based row and step.
    pub fn a(&self, j: usize, step: usize) -> f64 {
        self.intercepts[j * self.outputs + step]
    }

    /// `b_{j,step}`; identical for every step.
    pub fn b(&self, j: usize, _step: usize) -> f64 {
        self.slopes[j]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }
}

pub fn compute_components(view: &TestAugmentedView<'_>) -> Result<ResidualComponents> {
    let rows = view.n();
    if rows < 2 {
        return Err(Error::TooFewExamples {
            needed: 1,
            available: view.n_train(),
        });
    }
    let h = view.outputs();
    let test = rows - 1;
    let state = view.state();
    let mut intercepts = vec![0.0; rows * h];
    let mut slopes = vec![0.0; rows];
    for (j, chunk) in intercepts.chunks_exact_mut(h).enumerate() {
        view.hat_labels_into(j, chunk);
        if j < test {
            for (a, y) in chunk.iter_mut().zip(state.label(j)) {
                *a = y - *a;
            }
        } else {
            chunk.iter_mut().for_each(|a| *a = -*a);
        }
        let indicator = if j == test { 1.0 } else { 0.0 };
        slopes[j] = indicator - view.hat_test(j);
    }
    Ok(ResidualComponents {
        rows,
        outputs: h,
        intercepts,
        slopes,
    })
}

/// Closed interval; either bound may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    /// Contains nothing; produced when the significance level exceeds 1.
    pub const EMPTY: Interval = Interval {
        lower: f64::INFINITY,
        upper: f64::NEG_INFINITY,
    };

    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// `+inf` when either bound is infinite, 0 when empty.
    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else if self.is_finite() {
            self.upper - self.lower
        } else {
            f64::INFINITY
        }
    }
}

/// Prediction intervals for steps `1..=h` from one forecast origin.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalVector {
    pub origin: usize,
    pub intervals: Vec<Interval>,
    pub eps: Vec<f64>,
}

impl IntervalVector {
    pub fn horizon(&self) -> usize {
        self.intervals.len()
    }

    /// 1-based step.
    pub fn step(&self, step: usize) -> Interval {
        self.intervals[step - 1]
    }
}

// Slack for products like (2/n)·n that land a hair below an integer.
const INDEX_SLACK: f64 = 1e-9;

/// 1-based order-statistic indices `(⌊εn/2⌋, ⌈(1 − ε/2)n⌉)`, or `None`
/// when `ε < 2/n` or `ε > 1`.
pub fn order_indices(eps: f64, n: usize) -> Option<(usize, usize)> {
    let nf = n as f64;
    if !(eps.is_finite() && eps * nf >= 2.0 - INDEX_SLACK && eps <= 1.0 + INDEX_SLACK) {
        return None;
    }
    let lo = (eps / 2.0 * nf + INDEX_SLACK).floor() as usize;
    let hi = ((1.0 - eps / 2.0) * nf - INDEX_SLACK).ceil() as usize;
    Some((lo, hi.min(n - 1)))
}

/// Smallest significance level the interval is defined for.
pub fn min_significance(n: usize) -> f64 {
    2.0 / n as f64
}

fn kth_smallest(values: &mut [f64], k: usize) -> f64 {
    *values.select_nth_unstable_by(k - 1, f64::total_cmp).1
}

pub fn predict_intervals(
    comps: &ResidualComponents,
    eps: &[f64],
    origin: usize,
) -> Result<IntervalVector> {
    let h = comps.outputs();
    if eps.len() != h {
        return Err(Error::Dimension {
            what: "significance vector",
            expected: h,
            got: eps.len(),
        });
    }
    let n = comps.n();
    let test = n - 1;
    let indices = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            order_indices(e, n).ok_or(Error::Undefined {
                step: i + 1,
                eps: e,
                n,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let b_test = comps.slopes[test];
    let finite_rows: Vec<usize> = (0..test).filter(|&j| b_test > comps.slopes[j]).collect();
    // Rows with b_j >= b_n put −∞ into the lower list and +∞ into the upper list.
    let unbounded = test - finite_rows.len();

    let mut critical = Vec::with_capacity(finite_rows.len());
    let mut intervals = Vec::with_capacity(h);
    for (i, &(k_lo, k_hi)) in indices.iter().enumerate() {
        let a_test = comps.a(test, i);
        critical.clear();
        critical.extend(
            finite_rows
                .iter()
                .map(|&j| (comps.a(j, i) - a_test) / (b_test - comps.slopes[j])),
        );
        let lower = if k_lo <= unbounded {
            f64::NEG_INFINITY
        } else {
            kth_smallest(&mut critical, k_lo - unbounded)
        };
        let upper = if k_hi > critical.len() {
            f64::INFINITY
        } else {
            kth_smallest(&mut critical, k_hi)
        };
        intervals.push(Interval { lower, upper });
    }
    Ok(IntervalVector {
        origin,
        intervals,
        eps: eps.to_vec(),
    })
}

/// Like [`predict_intervals`], but a step whose level is below `2/n` gets
/// the whole real line and a step above 1 gets the empty set, the limits of
/// the two order statistics.
pub fn predict_intervals_total(
    comps: &ResidualComponents,
    eps: &[f64],
    origin: usize,
) -> Result<IntervalVector> {
    let n = comps.n();
    let clipped: Vec<f64> = eps
        .iter()
        .map(|&e| if order_indices(e, n).is_some() { e } else { 1.0 })
        .collect();
    let mut iv = predict_intervals(comps, &clipped, origin)?;
    for (i, &e) in eps.iter().enumerate() {
        if order_indices(e, n).is_none() {
            iv.intervals[i] = if e > 1.0 {
                Interval::EMPTY
            } else {
                Interval::UNBOUNDED
            };
        }
    }
    iv.eps = eps.to_vec();
    Ok(iv)
}


#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::ridge::RidgeState;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn state_with(a: f64, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> RidgeState {
        let mut s = RidgeState::new(a, xs[0].len(), ys[0].len()).unwrap();
        for (x, y) in xs.iter().zip(ys) {
            s.absorb(x, y).unwrap();
        }
        s
    }

    #[test]
    fn constant_feature_components() {
        // n = 4, c = 2: a_j = c/n, a_n = −(n−1)c/n, b_n = 1 − 1/n, b_j = −1/n.
        let xs = vec![vec![1.0]; 3];
        let ys = vec![vec![2.0]; 3];
        let s = state_with(0.0, &xs, &ys);
        let comps = compute_components(&s.peek_with_test(&[1.0]).unwrap()).unwrap();
        for j in 0..3 {
            assert!((comps.a(j, 0) - 0.5).abs() < 1e-14);
            assert!((comps.b(j, 0) + 0.25).abs() < 1e-14);
        }
        assert!((comps.a(3, 0) + 1.5).abs() < 1e-14);
        assert!((comps.b(3, 0) - 0.75).abs() < 1e-14);

        let iv = predict_intervals(&comps, &[0.5], 7).unwrap();
        assert_eq!(iv.step(1), Interval { lower: 2.0, upper: 2.0 });
        assert_eq!(iv.origin, 7);
    }

    #[test]
    fn zero_labels_give_zero_training_intercepts() {
        let mut rng = StdRng::seed_from_u64(1);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random(), rng.random()]).collect();
        let ys = vec![vec![0.0, 0.0]; 5];
        let s = state_with(1.0, &xs, &ys);
        let comps = compute_components(&s.peek_with_test(&[0.4, 0.9]).unwrap()).unwrap();
        for j in 0..6 {
            for i in 0..2 {
                assert_eq!(comps.a(j, i), 0.0);
            }
        }
    }

    #[test]
    fn components_match_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(2);
        let (n, p, h, a) = (6, 2, 3, 0.9);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let ys: Vec<Vec<f64>> = (0..n - 1)
            .map(|_| (0..h).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let s = state_with(a, &xs[..n - 1], &ys);
        let comps = compute_components(&s.peek_with_test(&xs[n - 1]).unwrap()).unwrap();
        let (da, db) = dense_components(&xs, &ys, a);
        for j in 0..n {
            for i in 0..h {
                assert!((comps.a(j, i) - da[(j, i)]).abs() < 1e-9);
                assert!((comps.b(j, i) - db[(j, i)]).abs() < 1e-9);
                // The dense B really has identical columns.
                assert!((db[(j, i)] - db[(j, 0)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn needs_a_training_example() {
        let s = RidgeState::new(1.0, 2, 1).unwrap();
        let view = s.peek_with_test(&[1.0, 1.0]).unwrap();
        assert!(matches!(compute_components(&view), Err(Error::TooFewExamples { .. })));
    }

    #[test]
    fn order_index_arithmetic() {
        assert_eq!(order_indices(0.4, 5), Some((1, 4)));
        assert_eq!(order_indices(2.0 / 7.0, 7), Some((1, 6)));
        assert_eq!(order_indices(0.1, 477), Some((23, 454)));
        assert_eq!(order_indices(0.39, 5), None);
        assert_eq!(order_indices(1.2, 5), None);
        for n in 2..200 {
            for k in 0..=100 {
                let eps = 2.0 / n as f64 + k as f64 * (1.0 - 2.0 / n as f64) / 100.0;
                let (lo, hi) = order_indices(eps, n).unwrap();
                assert!(1 <= lo && lo <= hi && hi < n, "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn undefined_significance_names_step() {
        let xs = vec![vec![1.0]; 3];
        let ys = vec![vec![1.0, 2.0]; 3];
        let s = state_with(1.0, &xs, &ys);
        let comps = compute_components(&s.peek_with_test(&[1.0]).unwrap()).unwrap();
        match predict_intervals(&comps, &[0.5, 0.3], 0) {
            Err(Error::Undefined { step, n, .. }) => {
                assert_eq!(step, 2);
                assert_eq!(n, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn total_prediction_extends_out_of_range_levels() {
        let xs = vec![vec![1.0]; 4];
        let ys = vec![vec![1.0, 2.0, 3.0]; 4];
        let s = state_with(1.0, &xs, &ys);
        let comps = compute_components(&s.peek_with_test(&[1.0]).unwrap()).unwrap();
        let strict = predict_intervals(&comps, &[0.5, 0.5, 0.5], 0).unwrap();
        let total = predict_intervals_total(&comps, &[0.5, -0.1, 1.3], 0).unwrap();
        assert_eq!(total.intervals[0], strict.intervals[0]);
        assert_eq!(total.intervals[1], Interval::UNBOUNDED);
        assert!(total.intervals[2].is_empty());
        assert!(!total.intervals[2].contains(3.0));
        assert_eq!(total.intervals[2].width(), 0.0);
        assert_eq!(total.eps, vec![0.5, -0.1, 1.3]);
    }

    #[test]
    fn random_instance_matches_full_conformal_grid() {
        let mut rng = StdRng::seed_from_u64(10);
        let (n, p, h, a) = (10, 2, 2, 1.0);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys: Vec<Vec<f64>> = xs[..n - 1]
            .iter()
            .map(|x| vec![x[0] + rng.random_range(-0.5..0.5), x[1] - rng.random_range(-0.5..0.5)])
            .collect();
        let s = state_with(a, &xs[..n - 1], &ys);
        let comps = compute_components(&s.peek_with_test(&xs[n - 1]).unwrap()).unwrap();
        let iv = predict_intervals(&comps, &[0.4, 0.4], 0).unwrap();
        let step = 1e-3;
        for i in 0..h {
            let Interval { lower, upper } = iv.intervals[i];
            assert!(lower.is_finite() && upper.is_finite());
            let col: Vec<f64> = ys.iter().map(|y| y[i]).collect();
            let (lo, hi) =
                full_conformal_bounds(&xs, &col, a, 0.4, (lower - 1.0, upper + 1.0), step).unwrap();
            assert!((lo - lower).abs() <= step + 1e-9, "{lo} vs {lower}");
            assert!((hi - upper).abs() <= step + 1e-9, "{hi} vs {upper}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn smaller_significance_gives_wider_interval(
            seed in 0u64..5000,
            n_train in 3usize..30,
            e1 in 0.0f64..1.0,
            e2 in 0.0f64..1.0,
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let xs: Vec<Vec<f64>> = (0..=n_train)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let ys: Vec<Vec<f64>> = (0..n_train)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)])
                .collect();
            let s = state_with(0.5, &xs[..n_train], &ys);
            let comps = compute_components(&s.peek_with_test(&xs[n_train]).unwrap()).unwrap();
            let floor = min_significance(n_train + 1);
            let lo_eps = floor + (1.0 - floor) * e1.min(e2);
            let hi_eps = floor + (1.0 - floor) * e1.max(e2);
            let wide = predict_intervals(&comps, &[lo_eps, lo_eps], 0).unwrap();
            let narrow = predict_intervals(&comps, &[hi_eps, hi_eps], 0).unwrap();
            for i in 0..2 {
                let (w, s) = (wide.intervals[i], narrow.intervals[i]);
                prop_assert!(w.lower <= s.lower && s.upper <= w.upper);
                prop_assert!(w.lower <= w.upper && s.lower <= s.upper);
            }
        }
    }
}
