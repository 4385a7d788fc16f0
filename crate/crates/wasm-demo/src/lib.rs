//! Browser bindings for the demo page.
//!
//! Three operations: an online run on a generated series, the deviation
//! bound as a function of the number of trials, and a one-dimensional
//! conformal ridge band. Each has a plain Rust core so it can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use msaci::config::{
    AciSection, ExperimentConfig, OutputSection, Refit, RidgeSection, Setting, SyntheticSection,
    TrainingSection,
};
use msaci::crr::{compute_components, predict_intervals_total};
use msaci::evaluation::step_bound;
use msaci::experiment::run_on_frame;
use msaci::ridge::RidgeState;
use msaci::synth::Generator;
use msaci::timeseries::WindowConfig;
use wasm_bindgen::prelude::*;

/// Result of an online run, laid out as flat arrays for plotting.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Simulation {
    horizon: usize,
    ticks: usize,
    actual: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    eps: Vec<f64>,
    deviation: Vec<f64>,
    error_rates: Vec<f64>,
    mean_widths: Vec<f64>,
    clamps: usize,
}

#[wasm_bindgen]
impl Simulation {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn ticks(&self) -> usize {
        self.ticks
    }

    /// Observed value at each tick.
    pub fn actual(&self) -> Vec<f64> {
        self.actual.clone()
    }

    /// Step-major `[step][tick]` lower bounds of the interval scored at that
    /// tick; NaN before the step's first forecast is due.
    pub fn lower(&self) -> Vec<f64> {
        self.lower.clone()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.upper.clone()
    }

    /// Step-major `[step][tick]` control inputs after each update.
    pub fn eps(&self) -> Vec<f64> {
        self.eps.clone()
    }

    /// Step-major `[step][tick]` running `|error rate − target|`.
    pub fn deviation(&self) -> Vec<f64> {
        self.deviation.clone()
    }

    pub fn error_rates(&self) -> Vec<f64> {
        self.error_rates.clone()
    }

    pub fn mean_widths(&self) -> Vec<f64> {
        self.mean_widths.clone()
    }

    pub fn clamps(&self) -> usize {
        self.clamps
    }
}

fn demo_config(horizon: usize, eps: f64, gamma: f64, rows: usize) -> ExperimentConfig {
    ExperimentConfig {
        version: msaci::config::CONFIG_VERSION,
        data: None,
        window: WindowConfig::new(6, horizon, vec![]),
        training: TrainingSection {
            rows,
            refit: Refit::Online,
            max_steps: None,
        },
        ridge: RidgeSection {
            a: Some(1.0),
            grid: None,
            values: None,
        },
        aci: AciSection {
            eps: vec![eps; horizon],
            gamma: vec![gamma; horizon],
            clamp_floor: Some(Setting::Name("off".into())),
            clamp_ceiling: Some(Setting::Name("off".into())),
        },
        output: OutputSection::default(),
        synthetic: SyntheticSection::default(),
    }
}

pub fn simulate_core(
    generator: &str,
    steps: usize,
    seed: u64,
    horizon: usize,
    eps: f64,
    gamma: f64,
) -> msaci::Result<Simulation> {
    let generator: Generator = generator.parse()?;
    let rows = 120;
    let cfg = demo_config(horizon, eps, gamma, rows);
    cfg.validate()?;
    let len = rows + steps + horizon - 1;
    let frame = generator.frame(len, seed)?;
    let out = run_on_frame(&frame, &cfg)?;

    let ticks = out.forecasts;
    let first = out.first_origin;
    let actual = frame.demand()[first + 1..first + 1 + ticks].to_vec();
    let mut lower = vec![f64::NAN; horizon * ticks];
    let mut upper = vec![f64::NAN; horizon * ticks];
    let mut deviation = vec![f64::NAN; horizon * ticks];
    let mut errors = vec![0usize; horizon];
    let mut trials = vec![0usize; horizon];
    let mut rows_sorted = out.trace.clone();
    rows_sorted.sort_by_key(|r| (r.t + r.step, r.step));
    for r in &rows_sorted {
        let i = r.step - 1;
        let tick = r.t + r.step - first - 1;
        lower[i * ticks + tick] = r.lower;
        upper[i * ticks + tick] = r.upper;
        trials[i] += 1;
        errors[i] += usize::from(!r.covered);
        deviation[i * ticks + tick] = (errors[i] as f64 / trials[i] as f64 - eps).abs();
    }
    let mut eps_flat = vec![0.0; horizon * ticks];
    for (tick, e) in out.eps_path.iter().enumerate() {
        for (i, v) in e.iter().enumerate() {
            eps_flat[i * ticks + tick] = *v;
        }
    }
    let steps_stats = out.metrics.steps();
    Ok(Simulation {
        horizon,
        ticks,
        actual,
        lower,
        upper,
        eps: eps_flat,
        deviation,
        error_rates: steps_stats.iter().map(|s| s.error_rate().unwrap_or(f64::NAN)).collect(),
        mean_widths: steps_stats.iter().map(|s| s.mean_width().unwrap_or(f64::NAN)).collect(),
        clamps: out.clamp_log().len(),
    })
}

/// Deviation bound for `T = 1..=t_max`.
pub fn bound_curve_core(eps: f64, gamma: f64, t_max: usize) -> Vec<f64> {
    (1..=t_max as u64).map(|t| step_bound(eps, gamma, t)).collect()
}

/// Conformal ridge band for the model `y ≈ β₀ + β₁ x`, evaluated at
/// `points` evenly spaced test inputs over `[x_lo, x_hi]`. Returns
/// `[x, lower, upper]` triples.
pub fn conformal_band_core(
    xs: &[f64],
    ys: &[f64],
    eps: f64,
    ridge: f64,
    x_lo: f64,
    x_hi: f64,
    points: usize,
) -> msaci::Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(msaci::Error::Dimension {
            what: "labels",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let mut state = RidgeState::new(ridge, 2, 1)?;
    for (&x, &y) in xs.iter().zip(ys) {
        state.absorb(&[1.0, x], &[y])?;
    }
    let mut out = Vec::with_capacity(points * 3);
    for k in 0..points {
        let x = if points == 1 {
            x_lo
        } else {
            x_lo + (x_hi - x_lo) * k as f64 / (points - 1) as f64
        };
        let comps = compute_components(&state.peek_with_test(&[1.0, x])?)?;
        let iv = predict_intervals_total(&comps, &[eps], 0)?;
        out.extend([x, iv.intervals[0].lower, iv.intervals[0].upper]);
    }
    Ok(out)
}

fn js(e: msaci::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn simulate(
    generator: &str,
    steps: usize,
    seed: u32,
    horizon: usize,
    eps: f64,
    gamma: f64,
) -> Result<Simulation, JsError> {
    simulate_core(generator, steps, u64::from(seed), horizon, eps, gamma).map_err(js)
}

#[wasm_bindgen]
pub fn bound_curve(eps: f64, gamma: f64, t_max: usize) -> Vec<f64> {
    bound_curve_core(eps, gamma, t_max)
}

#[wasm_bindgen]
pub fn conformal_band(
    xs: Vec<f64>,
    ys: Vec<f64>,
    eps: f64,
    ridge: f64,
    x_lo: f64,
    x_hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    conformal_band_core(&xs, &ys, eps, ridge, x_lo, x_hi, points).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulation_shapes() {
        let s = simulate_core("ar1", 200, 3, 3, 0.2, 0.02).unwrap();
        assert_eq!(s.ticks, 200);
        assert_eq!(s.actual.len(), 200);
        assert_eq!(s.lower.len(), 600);
        assert_eq!(s.eps.len(), 600);
        // Step 3 is first scored at the third tick.
        assert!(s.lower[2 * 200 + 1].is_nan());
        assert!(!s.lower[2 * 200 + 2].is_nan());
        for r in &s.error_rates {
            assert!((r - 0.2).abs() < 0.1);
        }
        assert_eq!(s.clamps, 0);
    }

    #[test]
    fn simulation_rejects_bad_input() {
        assert!(simulate_core("sine", 100, 0, 2, 0.1, 0.01).is_err());
        assert!(simulate_core("ar1", 100, 0, 2, 0.1, 0.0).is_err());
    }

    #[test]
    fn bound_curve_decays_as_one_over_t() {
        let c = bound_curve_core(0.1, 0.005, 100);
        assert_eq!(c.len(), 100);
        assert!((c[0] - 0.905 / 0.005).abs() < 1e-9);
        assert!((c[99] * 100.0 - c[0]).abs() < 1e-9);
    }

    #[test]
    fn band_covers_the_line() {
        let xs: Vec<f64> = (0..30).map(|k| k as f64 / 3.0).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(k, x)| 2.0 * x + 1.0 + 0.3 * ((k * 7 % 5) as f64 - 2.0)).collect();
        let band = conformal_band_core(&xs, &ys, 0.2, 0.1, 0.0, 10.0, 11).unwrap();
        assert_eq!(band.len(), 33);
        for tri in band.chunks(3) {
            let fit = 2.0 * tri[0] + 1.0;
            assert!(tri[1] < fit && fit < tri[2], "{tri:?}");
        }
        assert!(conformal_band_core(&xs, &ys[..3], 0.2, 0.1, 0.0, 1.0, 2).is_err());
    }
}
