//! The online forecasting protocol.
//!
//! Row `r` of the series is observed at tick `r − first_origin`. Before each
//! observation the model forecasts steps `1..=h` from the latest row; after
//! it, the pending forecasts that targeted that row are scored, every pair
//! whose full label is now known is absorbed, and the controller updates.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::info;

use crate::aci::{AciConfig, AciState, ClampEvent, PendingBuffer};
use crate::config::{ExperimentConfig, Refit, RidgeChoice};
use crate::crr::{compute_components, predict_intervals_total};
use crate::error::{Error, Result};
use crate::evaluation::{check_bounds, render_table, BoundReport, RunMetrics, SummaryTable};
use crate::ridge::{gcv_tune, RidgeState};
use crate::synth::Generator;
use crate::timeseries::{load_csv, make_windows, SeriesFrame, SupervisedPair};

/// One scored forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// Forecast origin (row of the last lag); the target is row `t + step`.
    pub t: usize,
    pub step: usize,
    pub lower: f64,
    pub upper: f64,
    pub eps_t: f64,
    pub covered: bool,
    pub width: f64,
}

pub const TRACE_HEADER: &str = "t,step,lower,upper,eps_t,covered,width";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub ridge: f64,
    pub train_pairs: usize,
    pub forecasts: usize,
    pub first_origin: usize,
    pub metrics: RunMetrics,
    pub report: BoundReport,
    pub trace: Vec<TraceRow>,
    /// Control inputs after each tick.
    pub eps_path: Vec<Vec<f64>>,
    /// Errors fed to the controller at each tick.
    pub error_path: Vec<Vec<Option<bool>>>,
    /// `(pair origin, last observed row)` at each online absorption.
    pub absorptions: Vec<(usize, usize)>,
    pub aci: AciState,
}

impl RunOutcome {
    pub fn clamp_log(&self) -> &[ClampEvent] {
        self.aci.clamp_log()
    }

    pub fn summary(&self) -> SummaryTable {
        render_table(&self.metrics)
    }
}

fn choose_ridge(choice: &RidgeChoice, train: &[SupervisedPair]) -> Result<f64> {
    match choice {
        RidgeChoice::Fixed(a) => Ok(*a),
        RidgeChoice::Tune(grid) => gcv_tune(train, grid),
    }
}

/// Pairs whose labels end inside the first `rows` rows.
fn split_training(pairs: &[SupervisedPair], rows: usize, horizon: usize) -> usize {
    pairs.iter().take_while(|p| p.origin + horizon < rows).count()
}

/// Tunes the ridge parameter on the training prefix only.
pub fn tune_on_frame(frame: &SeriesFrame, cfg: &ExperimentConfig) -> Result<f64> {
    let pairs = make_windows(frame, &cfg.window)?;
    let n_train = split_training(&pairs, cfg.training.rows, cfg.window.horizon);
    choose_ridge(&cfg.ridge.choice()?, &pairs[..n_train])
}

pub fn run_on_frame(frame: &SeriesFrame, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let aci_cfg = cfg.aci_config();
    let window = &cfg.window;
    let h = window.horizon;
    let pairs = make_windows(frame, window)?;
    let rows = cfg.training.rows;
    let n_train = split_training(&pairs, rows, h);
    // The first forecast is made from the last training row.
    let first = rows - window.lags;
    if first >= pairs.len() {
        return Err(Error::InsufficientData {
            needed: rows + h + 1,
            available: frame.len(),
        });
    }
    let last = match cfg.training.max_steps {
        Some(m) => (first + m).min(pairs.len()),
        None => pairs.len(),
    };

    let ridge = choose_ridge(&cfg.ridge.choice()?, &pairs[..n_train])?;
    info!("ridge parameter {ridge} from {n_train} training pairs");
    let mut state = RidgeState::new(ridge, window.object_dim(), h)?;
    for pair in &pairs[..n_train] {
        state.absorb_pair(pair)?;
    }
    let mut next_absorb = n_train;

    let demand = frame.demand();
    let mut aci = AciState::new(&aci_cfg);
    let mut buffer = PendingBuffer::new(h);
    let mut metrics = RunMetrics::new(aci_cfg.targets());
    let mut trace = Vec::with_capacity((last - first) * h);
    let mut eps_path = Vec::with_capacity(last - first);
    let mut error_path = Vec::with_capacity(last - first);
    let mut absorptions = Vec::new();

    for (tick0, pair) in pairs[first..last].iter().enumerate() {
        let tick = tick0 + 1;
        let eps = aci.current_significance().to_vec();
        if tick == h {
            metrics.set_eps_at_horizon(&eps);
        }
        let view = state.peek_with_test(&pair.x)?;
        let comps = compute_components(&view)?;
        buffer.record(predict_intervals_total(&comps, &eps, pair.origin)?)?;

        let row = pair.origin + 1;
        let errs = buffer.extract_errors(row, demand[row])?;
        for (i, err) in errs.iter().enumerate() {
            let Some(err) = *err else { continue };
            let step = i + 1;
            let iv = buffer
                .lookup(row - step)
                .expect("scored origins are buffered");
            let interval = iv.step(step);
            let width = interval.width();
            metrics.accumulate(step, err, width);
            if tick >= h {
                metrics.accumulate_overall(err, width);
            }
            trace.push(TraceRow {
                t: iv.origin,
                step,
                lower: interval.lower,
                upper: interval.upper,
                eps_t: iv.eps[i],
                covered: !err,
                width,
            });
        }

        if cfg.training.refit == Refit::Online {
            while next_absorb < pairs.len() && pairs[next_absorb].origin + h <= row {
                state.absorb_pair(&pairs[next_absorb])?;
                absorptions.push((pairs[next_absorb].origin, row));
                next_absorb += 1;
            }
        }
        aci.update(&aci_cfg, &errs, state.len() + 1);
        eps_path.push(aci.current_significance().to_vec());
        error_path.push(errs);
    }

    metrics.clamp_activations = aci.clamp_log().len();
    let report = check_bounds(&metrics, &aci_cfg);
    Ok(RunOutcome {
        ridge,
        train_pairs: n_train,
        forecasts: last - first,
        first_origin: pairs[first].origin,
        metrics,
        report,
        trace,
        eps_path,
        error_path,
        absorptions,
        aci,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let data = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("missing [data] section".into()))?;
    let frame = load_csv(&data.path, &data.schema)?;
    run_on_frame(&frame, cfg)
}

/// Runs the protocol on a generated series with `steps` online forecasts.
pub fn run_synthetic(
    cfg: &ExperimentConfig,
    generator: Generator,
    steps: usize,
    seed: u64,
) -> Result<RunOutcome> {
    if steps == 0 {
        return Err(Error::Config("synthetic run needs at least one step".into()));
    }
    let len = cfg.training.rows + steps + cfg.window.horizon - 1;
    let frame = generator.frame(len, seed)?;
    run_on_frame(&frame, cfg)
}

fn bool01(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t,
            r.step,
            r.lower,
            r.upper,
            r.eps_t,
            bool01(r.covered),
            r.width
        );
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(TRACE_HEADER) {
        return Err(Error::Schema(format!("trace header must be {TRACE_HEADER:?}")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, line)| {
            let row = k + 1;
            let bad = |what: &str| Error::Parse {
                row,
                message: format!("bad {what}"),
            };
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 7 {
                return Err(bad("field count"));
            }
            let num = |i: usize, what: &str| f[i].parse::<f64>().map_err(|_| bad(what));
            Ok(TraceRow {
                t: f[0].parse().map_err(|_| bad("t"))?,
                step: f[1].parse().map_err(|_| bad("step"))?,
                lower: num(2, "lower")?,
                upper: num(3, "upper")?,
                eps_t: num(4, "eps_t")?,
                covered: match f[5] {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad("covered")),
                },
                width: num(6, "width")?,
            })
        })
        .collect()
}

/// Rebuilds metrics from a trace alone.
///
/// Targets are the first control input of each step (warm-up keeps it at
/// the target). Learning rates come from the first observed update unless
/// `known` supplies the config. Any update that does not match
/// `γ (ε − err)` is counted as a clamp activation.
pub fn metrics_from_trace(
    rows: &[TraceRow],
    known: Option<&AciConfig>,
) -> Result<(RunMetrics, AciConfig)> {
    let h = rows
        .iter()
        .map(|r| r.step)
        .max()
        .ok_or_else(|| Error::Schema("empty trace".into()))?;
    let first = rows.iter().map(|r| r.t).min().unwrap_or(0);
    let mut by_step: Vec<std::collections::BTreeMap<usize, TraceRow>> = vec![Default::default(); h];
    for r in rows {
        if r.step == 0 {
            return Err(Error::Schema("step indices start at 1".into()));
        }
        by_step[r.step - 1].insert(r.t, *r);
    }

    let mut targets = Vec::with_capacity(h);
    let mut rates = Vec::with_capacity(h);
    let mut clamps = 0usize;
    for (i, rows_i) in by_step.iter().enumerate() {
        let step = i + 1;
        let head = rows_i
            .get(&first)
            .ok_or_else(|| Error::Schema(format!("step {step} has no forecast from origin {first}")))?;
        let target = known.map_or(head.eps_t, |c| c.targets()[i]);
        // ε(o+1) − ε(o) = γ (ε − err of origin o + 1 − step).
        let increments: Vec<(f64, f64)> = rows_i
            .iter()
            .filter_map(|(&o, r)| {
                let next = rows_i.get(&(o + 1))?;
                let scored = rows_i.get(&(o + 1).checked_sub(step)?)?;
                let d = target - if scored.covered { 0.0 } else { 1.0 };
                Some((next.eps_t - r.eps_t, d))
            })
            .collect();
        let gamma = match known {
            Some(c) => c.rates()[i],
            None => increments
                .first()
                .map(|(delta, d)| delta / d)
                .ok_or_else(|| Error::Schema(format!("step {step}: trace too short to infer the learning rate")))?,
        };
        clamps += increments
            .iter()
            .filter(|(delta, d)| (delta - gamma * d).abs() > 1e-9)
            .count();
        targets.push(target);
        rates.push(gamma);
    }
    let mut cfg = AciConfig::new(targets, rates)?;
    if let Some(k) = known {
        cfg.clamp_floor = k.clamp_floor;
        cfg.clamp_ceiling = k.clamp_ceiling;
    }

    let mut metrics = RunMetrics::new(cfg.targets());
    let mut ordered: Vec<&TraceRow> = rows.iter().collect();
    ordered.sort_by_key(|r| (r.t + r.step, r.step));
    for r in ordered {
        let err = !r.covered;
        metrics.accumulate(r.step, err, r.width);
        if r.t + r.step - first >= h {
            metrics.accumulate_overall(err, r.width);
        }
    }
    let horizon_origin = first + h - 1;
    let eps_h: Option<Vec<f64>> = by_step
        .iter()
        .map(|m| m.get(&horizon_origin).map(|r| r.eps_t))
        .collect();
    if let Some(eps_h) = eps_h {
        metrics.set_eps_at_horizon(&eps_h);
    }
    metrics.clamp_activations = clamps;
    Ok((metrics, cfg))
}

pub fn check_trace(rows: &[TraceRow], known: Option<&AciConfig>) -> Result<BoundReport> {
    let (metrics, cfg) = metrics_from_trace(rows, known)?;
    Ok(check_bounds(&metrics, &cfg))
}

pub fn clamp_log_csv(events: &[ClampEvent]) -> String {
    let mut out = String::from("clock,step,raw,clamped\n");
    for e in events {
        let _ = writeln!(out, "{},{},{},{}", e.clock, e.step, e.raw, e.clamped);
    }
    out
}

/// `tick,eps_1,…,eps_h` after each update.
pub fn eps_path_csv(path: &[Vec<f64>]) -> String {
    let h = path.first().map_or(0, Vec::len);
    let mut out = String::from("tick");
    for i in 1..=h {
        let _ = write!(out, ",eps_{i}");
    }
    out.push('\n');
    for (k, eps) in path.iter().enumerate() {
        let _ = write!(out, "{}", k + 1);
        for e in eps {
            let _ = write!(out, ",{e}");
        }
        out.push('\n');
    }
    out
}

/// Writes trace, summary, bound report, clamp log, control path and the
/// final controller checkpoint into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let summary = outcome.summary();
    fs::write(dir.join("trace.csv"), trace_csv(&outcome.trace))?;
    fs::write(dir.join("summary.csv"), summary.to_csv())?;
    fs::write(dir.join("summary.txt"), summary.to_text())?;
    fs::write(
        dir.join("bounds.txt"),
        format!("ridge a = {}\n{}", outcome.ridge, outcome.report),
    )?;
    fs::write(dir.join("clamp_log.csv"), clamp_log_csv(outcome.clamp_log()))?;
    fs::write(dir.join("eps_path.csv"), eps_path_csv(&outcome.eps_path))?;
    fs::write(dir.join("aci_state.txt"), outcome.aci.to_checkpoint())?;
    Ok(())
}
