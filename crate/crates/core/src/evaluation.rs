//! Error-rate and width accounting, finite-sample bound checks, and the
//! per-hour summary table.
//!
//! Step `i` is scored from its first available error onward. The overall
//! figures only use ticks from `h` on, where every step has an error.

use std::fmt;

use crate::aci::AciConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub trials: u64,
    pub errors: u64,
    pub finite: u64,
    pub infinite: u64,
    pub width_sum: f64,
}

impl StepStats {
    pub fn record(&mut self, err: bool, width: f64) {
        self.trials += 1;
        self.errors += u64::from(err);
        if width.is_finite() {
            self.finite += 1;
            self.width_sum += width;
        } else {
            self.infinite += 1;
        }
    }

    pub fn error_rate(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.errors as f64 / self.trials as f64)
    }

    /// Mean over finite widths only.
    pub fn mean_width(&self) -> Option<f64> {
        (self.finite > 0).then(|| self.width_sum / self.finite as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    targets: Vec<f64>,
    steps: Vec<StepStats>,
    overall: StepStats,
    /// Control inputs in effect when tick `h` is scored.
    eps_at_horizon: Option<Vec<f64>>,
    pub clamp_activations: usize,
}

impl RunMetrics {
    pub fn new(targets: &[f64]) -> Self {
        Self {
            targets: targets.to_vec(),
            steps: vec![StepStats::default(); targets.len()],
            overall: StepStats::default(),
            eps_at_horizon: None,
            clamp_activations: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// 1-based step.
    pub fn step(&self, step: usize) -> &StepStats {
        &self.steps[step - 1]
    }

    pub fn steps(&self) -> &[StepStats] {
        &self.steps
    }

    pub fn overall(&self) -> &StepStats {
        &self.overall
    }

    pub fn accumulate(&mut self, step: usize, err: bool, width: f64) {
        assert!((1..=self.steps.len()).contains(&step), "step {step} out of range");
        self.steps[step - 1].record(err, width);
    }

    pub fn accumulate_overall(&mut self, err: bool, width: f64) {
        self.overall.record(err, width);
    }

    pub fn set_eps_at_horizon(&mut self, eps: &[f64]) {
        self.eps_at_horizon = Some(eps.to_vec());
    }

    pub fn eps_at_horizon(&self) -> Option<&[f64]> {
        self.eps_at_horizon.as_deref()
    }
}

/// `(max{ε_start, 1 − ε_start} + γ) / (γ T)`.
pub fn step_bound(eps_start: f64, gamma: f64, trials: u64) -> f64 {
    (eps_start.max(1.0 - eps_start) + gamma) / (gamma * trials as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    /// 1-based step, or `None` for the overall rate.
    pub step: Option<usize>,
    pub trials: u64,
    pub error_rate: f64,
    pub target: f64,
    pub deviation: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub steps: Vec<BoundCheck>,
    pub overall: Option<BoundCheck>,
    /// Clamping was active, so the bounds are not guaranteed.
    pub advisory: bool,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.steps.iter().chain(&self.overall).all(|c| c.satisfied)
    }

    /// Violations that count as failures (none when advisory).
    pub fn hard_violations(&self) -> usize {
        if self.advisory {
            0
        } else {
            self.steps.iter().chain(&self.overall).filter(|c| !c.satisfied).count()
        }
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>8} {:>8} {:>10} {:>8} {:>10} {:>10}  status",
            "step", "trials", "err_rate", "target", "deviation", "bound"
        )?;
        for c in self.steps.iter().chain(&self.overall) {
            let label = c.step.map_or("overall".to_string(), |s| s.to_string());
            let status = match (c.satisfied, self.advisory) {
                (true, _) => "ok",
                (false, true) => "WARN",
                (false, false) => "VIOLATED",
            };
            writeln!(
                f,
                "{label:>8} {:>8} {:>10.5} {:>8.4} {:>10.6} {:>10.6}  {status}",
                c.trials, c.error_rate, c.target, c.deviation, c.bound
            )?;
        }
        if self.advisory {
            writeln!(f, "note: control inputs were clamped; bounds are advisory for this run")?;
        }
        Ok(())
    }
}

/// Per-step and overall deviation from target against the ACI bounds,
/// with `T` the number of scored trials.
pub fn check_bounds(metrics: &RunMetrics, cfg: &AciConfig) -> BoundReport {
    let targets = cfg.targets();
    let rates = cfg.rates();
    let steps = metrics
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.trials > 0)
        .map(|(i, s)| {
            let rate = s.error_rate().unwrap_or(0.0);
            let deviation = (rate - targets[i]).abs();
            // Warm-up keeps ε_{i,i} at the target.
            let bound = step_bound(targets[i], rates[i], s.trials);
            BoundCheck {
                step: Some(i + 1),
                trials: s.trials,
                error_rate: rate,
                target: targets[i],
                deviation,
                bound,
                satisfied: deviation <= bound,
            }
        })
        .collect();

    let h = metrics.horizon();
    let overall = metrics
        .overall
        .error_rate()
        .zip(metrics.eps_at_horizon.as_ref())
        .map(|(rate, start)| {
            let per_step = metrics.overall.trials / h as u64;
            let target = targets.iter().sum::<f64>() / h as f64;
            let bound = (0..h)
                .map(|i| step_bound(start[i], rates[i], per_step))
                .sum::<f64>()
                / h as f64;
            let deviation = (rate - target).abs();
            BoundCheck {
                step: None,
                trials: per_step,
                error_rate: rate,
                target,
                deviation,
                bound,
                satisfied: deviation <= bound,
            }
        });
    BoundReport {
        steps,
        overall,
        advisory: metrics.clamp_activations > 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// `"1"`, `"2"`, … or `"overall"`.
    pub hour: String,
    pub target_eps: f64,
    pub error_rate: Option<f64>,
    pub avg_length: Option<f64>,
    pub infinite_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

pub const SUMMARY_HEADER: &str = "hour,target_eps,error_rate,avg_length,infinite_count";

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Three significant figures.
pub fn sig3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.hour,
                r.target_eps,
                opt(r.error_rate),
                opt(r.avg_length),
                r.infinite_count
            ));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(SUMMARY_HEADER) {
            return Err(Error::Schema("summary CSV header mismatch".into()));
        }
        let parse_opt = |s: &str, row: usize| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Parse {
                    row,
                    message: format!("bad number {s:?}"),
                })
            }
        };
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row = k + 1;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Parse {
                    row,
                    message: "expected 5 fields".into(),
                });
            }
            rows.push(SummaryRow {
                hour: f[0].to_string(),
                target_eps: parse_opt(f[1], row)?.unwrap_or(f64::NAN),
                error_rate: parse_opt(f[2], row)?,
                avg_length: parse_opt(f[3], row)?,
                infinite_count: f[4].parse().map_err(|_| Error::Parse {
                    row,
                    message: format!("bad count {:?}", f[4]),
                })?,
            });
        }
        Ok(Self { rows })
    }

    /// Rows ε / error rate / avg length, one column per hour plus overall.
    pub fn to_text(&self) -> String {
        let cell = |v: Option<f64>| v.map(sig3).unwrap_or_else(|| "-".into());
        let mut lines = vec![
            vec!["hour".to_string()],
            vec!["eps".to_string()],
            vec!["error rate".to_string()],
            vec!["avg length".to_string()],
        ];
        for r in &self.rows {
            lines[0].push(r.hour.clone());
            lines[1].push(sig3(r.target_eps));
            lines[2].push(cell(r.error_rate));
            lines[3].push(cell(r.avg_length));
        }
        let cols = lines[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

pub fn render_table(metrics: &RunMetrics) -> SummaryTable {
    let mut rows: Vec<SummaryRow> = metrics
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| SummaryRow {
            hour: (i + 1).to_string(),
            target_eps: metrics.targets[i],
            error_rate: s.error_rate(),
            avg_length: s.mean_width(),
            infinite_count: s.infinite,
        })
        .collect();
    rows.push(SummaryRow {
        hour: "overall".into(),
        target_eps: metrics.targets.iter().sum::<f64>() / metrics.horizon() as f64,
        error_rate: metrics.overall.error_rate(),
        avg_length: metrics.overall.mean_width(),
        infinite_count: metrics.overall.infinite,
    });
    SummaryTable { rows }
}
