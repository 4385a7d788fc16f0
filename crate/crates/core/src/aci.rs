//! Multi-step-ahead adaptive conformal inference.
//!
//! One ACI recurrence per forecast step:
//!
//! ```text
//! ε_{t+1,i} = ε_{t,i} + γ_i (ε_i − err_{t,i})
//! ```
//!
//! The error for step `i` at time `t` comes from the prediction made `i`
//! ticks earlier, so the `[L_t | U_t]` matrices reduce to a ring buffer of
//! the last `h` interval vectors, read along the diagonal. A step stays at its
//! target until its first error arrives.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::crr::{min_significance, IntervalVector};
use crate::error::{Error, Result};

/// Lower clamp applied to control inputs after each update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampFloor {
    Off,
    Fixed(f64),
    /// `2/n` for the current conformal sample size `n`.
    Conformal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AciConfig {
    targets: Vec<f64>,
    rates: Vec<f64>,
    pub clamp_floor: ClampFloor,
    pub clamp_ceiling: Option<f64>,
}

pub const DEFAULT_CEILING: f64 = 1.0 - 1e-9;

impl AciConfig {
    /// Targets in `(0, 1)` and strictly positive learning rates, one per step.
    /// Clamping defaults to the conformal floor and [`DEFAULT_CEILING`].
    pub fn new(targets: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if targets.is_empty() || targets.len() != rates.len() {
            return Err(Error::Config(format!(
                "need one learning rate per target: {} targets, {} rates",
                targets.len(),
                rates.len()
            )));
        }
        if let Some(e) = targets.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("target miss-coverage {e} is not in (0, 1)")));
        }
        if let Some(g) = rates.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::Config(format!("learning rate {g} must be > 0")));
        }
        Ok(Self {
            targets,
            rates,
            clamp_floor: ClampFloor::Conformal,
            clamp_ceiling: Some(DEFAULT_CEILING),
        })
    }

    pub fn unclamped(mut self) -> Self {
        self.clamp_floor = ClampFloor::Off;
        self.clamp_ceiling = None;
        self
    }

    pub fn horizon(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    fn floor(&self, sample_size: usize) -> Option<f64> {
        match self.clamp_floor {
            ClampFloor::Off => None,
            ClampFloor::Fixed(v) => Some(v),
            ClampFloor::Conformal => Some(min_significance(sample_size)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampEvent {
    /// Clock value of the update that triggered the clamp.
    pub clock: u64,
    /// 1-based step.
    pub step: usize,
    pub raw: f64,
    pub clamped: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AciState {
    eps: Vec<f64>,
    /// Errors received per step; zero means the step is still warming up.
    received: Vec<u64>,
    clock: u64,
    clamp_log: Vec<ClampEvent>,
}

impl AciState {
    /// Starts every control input at its target.
    pub fn new(cfg: &AciConfig) -> Self {
        Self {
            eps: cfg.targets.clone(),
            received: vec![0; cfg.horizon()],
            clock: 0,
            clamp_log: Vec::new(),
        }
    }

    pub fn current_significance(&self) -> &[f64] {
        &self.eps
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn received(&self) -> &[u64] {
        &self.received
    }

    pub fn clamp_log(&self) -> &[ClampEvent] {
        &self.clamp_log
    }

    /// Applies one tick of errors (`None` = not yet observable for that step).
    /// `sample_size` feeds the conformal clamp floor for the next prediction.
    pub fn update(&mut self, cfg: &AciConfig, errs: &[Option<bool>], sample_size: usize) {
        assert_eq!(errs.len(), self.eps.len(), "error vector length");
        self.clock += 1;
        let floor = cfg.floor(sample_size);
        for (i, err) in errs.iter().enumerate() {
            let Some(err) = *err else { continue };
            self.received[i] += 1;
            let target = cfg.targets[i];
            let raw = self.eps[i] + cfg.rates[i] * (target - if err { 1.0 } else { 0.0 });
            let mut next = raw;
            if let Some(f) = floor {
                next = next.max(f);
            }
            if let Some(c) = cfg.clamp_ceiling {
                next = next.min(c);
            }
            if next != raw {
                self.clamp_log.push(ClampEvent {
                    clock: self.clock,
                    step: i + 1,
                    raw,
                    clamped: next,
                });
            }
            self.eps[i] = next;
        }
    }

    const CHECKPOINT_VERSION: u32 = 1;

    /// Line-oriented `key=value` text.
    pub fn to_checkpoint(&self) -> String {
        let mut out = format!("msaci-aci-state={}\n", Self::CHECKPOINT_VERSION);
        let _ = writeln!(out, "clock={}", self.clock);
        let _ = writeln!(out, "horizon={}", self.eps.len());
        for (i, (e, r)) in self.eps.iter().zip(&self.received).enumerate() {
            let _ = writeln!(out, "eps.{}={e:e}", i + 1);
            let _ = writeln!(out, "received.{}={r}", i + 1);
        }
        let _ = writeln!(out, "clamps={}", self.clamp_log.len());
        for (k, ev) in self.clamp_log.iter().enumerate() {
            let _ = writeln!(out, "clamp.{k}={},{},{:e},{:e}", ev.clock, ev.step, ev.raw, ev.clamped);
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Config(format!("checkpoint: {m}"));
        let mut map = std::collections::HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed line {line:?}")))?;
            map.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| map.get(k).ok_or_else(|| bad(format!("missing key {k}")));
        fn num<T: std::str::FromStr>(v: &str, k: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("checkpoint: bad value for {k}: {v:?}")))
        }
        let version: u32 = num(get("msaci-aci-state")?, "version")?;
        if version != Self::CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let horizon: usize = num(get("horizon")?, "horizon")?;
        let mut eps = Vec::with_capacity(horizon);
        let mut received = Vec::with_capacity(horizon);
        for i in 1..=horizon {
            let k = format!("eps.{i}");
            eps.push(num(get(&k)?, &k)?);
            let k = format!("received.{i}");
            received.push(num(get(&k)?, &k)?);
        }
        let clamps: usize = num(get("clamps")?, "clamps")?;
        let mut clamp_log = Vec::with_capacity(clamps);
        for k in 0..clamps {
            let key = format!("clamp.{k}");
            let fields: Vec<&str> = get(&key)?.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(format!("{key} needs 4 fields")));
            }
            clamp_log.push(ClampEvent {
                clock: num(fields[0], &key)?,
                step: num(fields[1], &key)?,
                raw: num(fields[2], &key)?,
                clamped: num(fields[3], &key)?,
            });
        }
        Ok(Self {
            eps,
            received,
            clock: num(get("clock")?, "clock")?,
            clamp_log,
        })
    }
}

/// The last `h` interval vectors, oldest first.
#[derive(Debug, Clone)]
pub struct PendingBuffer {
    capacity: usize,
    entries: VecDeque<IntervalVector>,
}

impl PendingBuffer {
    pub fn new(horizon: usize) -> Self {
        Self {
            capacity: horizon,
            entries: VecDeque::with_capacity(horizon + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn origins(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|iv| iv.origin)
    }

    pub fn record(&mut self, iv: IntervalVector) -> Result<()> {
        if iv.horizon() != self.capacity {
            return Err(Error::Dimension {
                what: "interval vector",
                expected: self.capacity,
                got: iv.horizon(),
            });
        }
        if let Some(latest) = self.entries.back().map(|e| e.origin) {
            if iv.origin <= latest {
                return Err(Error::OutOfOrder {
                    origin: iv.origin,
                    latest,
                });
            }
        }
        self.entries.push_back(iv);
        if self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
        Ok(())
    }

    fn get(&self, origin: usize) -> Option<&IntervalVector> {
        self.entries.iter().find(|iv| iv.origin == origin)
    }

    /// Scores the value observed at row `target` against the diagonal: step
    /// `i` is judged by the prediction from origin `target − i`.
    pub fn extract_errors(&self, target: usize, y_true: f64) -> Result<Vec<Option<bool>>> {
        if target == 0 || self.get(target - 1).is_none() {
            return Err(Error::MissingOrigin(target.wrapping_sub(1)));
        }
        Ok((1..=self.capacity)
            .map(|step| {
                target
                    .checked_sub(step)
                    .and_then(|origin| self.get(origin))
                    .map(|iv| !iv.step(step).contains(y_true))
            })
            .collect())
    }

    /// Interval vector recorded for `origin`, if still buffered.
    pub fn lookup(&self, origin: usize) -> Option<&IntervalVector> {
        self.get(origin)
    }
}
