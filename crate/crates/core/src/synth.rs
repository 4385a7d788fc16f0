//! Seeded synthetic series for coverage and bound checks.

use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::SeriesFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Independent N(10, 1) draws.
    IidGaussian,
    /// `w_t = 10 + 0.7 (w_{t-1} − 10) + N(0, 1)`.
    Ar1,
    /// Independent N(10, 1) draws, mean moves to 13 halfway through.
    MeanShift,
    /// `10 + 0.01 t + N(0, 1)`.
    Trend,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::IidGaussian,
        Generator::Ar1,
        Generator::MeanShift,
        Generator::Trend,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Generator::IidGaussian => "iid-gaussian",
            Generator::Ar1 => "ar1",
            Generator::MeanShift => "mean-shift",
            Generator::Trend => "trend",
        }
    }

    pub fn series(&self, len: usize, seed: u64) -> Vec<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).expect("unit normal");
        let mut out = Vec::with_capacity(len);
        let mut level = 0.0;
        for t in 0..len {
            let z = noise.sample(&mut rng);
            let v = match self {
                Generator::IidGaussian => 10.0 + z,
                Generator::Ar1 => {
                    level = 0.7 * level + z;
                    10.0 + level
                }
                Generator::MeanShift => {
                    if t < len / 2 {
                        10.0 + z
                    } else {
                        13.0 + z
                    }
                }
                Generator::Trend => 10.0 + 0.01 * t as f64 + z,
            };
            out.push(v);
        }
        out
    }

    pub fn frame(&self, len: usize, seed: u64) -> Result<SeriesFrame> {
        SeriesFrame::from_values(synthetic_epoch(), self.series(len, seed), vec![])
    }
}

pub fn synthetic_epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown generator {s:?}")))
    }
}
