//! Hourly series ingestion and MIMO windowing.
//!
//! A [`SeriesFrame`] holds the target series `w_0 … w_{N-1}`, any exogenous
//! columns read from the source file, and calendar columns derived from the
//! timestamps. [`make_windows`] turns it into supervised pairs: the object of
//! pair `k` is the lag block `(w_k, …, w_{k+p-1})` followed by the requested
//! exogenous features read at the forecast origin (row `k+p-1`), and its
//! label is `(w_{k+p}, …, w_{k+p+h-1})`.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDateTime, TimeDelta, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WEEK: &str = "week";
pub const WEEKDAY: &str = "weekday";
pub const HOUR: &str = "hour";

/// Column names used when reading a CSV file.
/// Missing names fall back to `Datetime`, `Demand` and `[Temperature]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub timestamp: String,
    pub demand: String,
    pub exogenous: Vec<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp: "Datetime".into(),
            demand: "Demand".into(),
            exogenous: vec!["Temperature".into()],
        }
    }
}

/// Calendar features of one timestamp, all as plain numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calendar {
    /// ISO week of year, 1–53.
    pub week: f64,
    /// Day of week, Monday = 0.
    pub weekday: f64,
    /// Hour of day, 0–23.
    pub hour: f64,
}

impl Calendar {
    pub fn of(ts: &NaiveDateTime) -> Self {
        Self {
            week: f64::from(ts.iso_week().week()),
            weekday: f64::from(ts.weekday().num_days_from_monday()),
            hour: f64::from(ts.hour()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeriesFrame {
    timestamps: Vec<NaiveDateTime>,
    demand: Vec<f64>,
    /// Exogenous columns from the source followed by `week`, `weekday`, `hour`.
    features: Vec<(String, Vec<f64>)>,
}

impl SeriesFrame {
    /// Validates hourly continuity and derives the calendar columns.
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        demand: Vec<f64>,
        exogenous: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let len = timestamps.len();
        if demand.len() != len {
            return Err(Error::Dimension {
                what: "demand column",
                expected: len,
                got: demand.len(),
            });
        }
        for (name, col) in &exogenous {
            if col.len() != len {
                return Err(Error::Schema(format!(
                    "column {name} has {} values, expected {len}",
                    col.len()
                )));
            }
            if [WEEK, WEEKDAY, HOUR].contains(&name.as_str()) {
                return Err(Error::Schema(format!("column name {name} is reserved")));
            }
        }
        let hour = TimeDelta::hours(1);
        for (row, pair) in timestamps.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if step != hour {
                let message = if step <= TimeDelta::zero() {
                    format!("timestamp {} does not follow {}", pair[1], pair[0])
                } else {
                    format!("gap between {} and {}", pair[0], pair[1])
                };
                return Err(Error::Continuity {
                    row: row + 1,
                    message,
                });
            }
        }
        if let Some(row) = demand.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row,
                message: "non-finite demand".into(),
            });
        }

        let calendar: Vec<Calendar> = timestamps.iter().map(Calendar::of).collect();
        let mut features = exogenous;
        features.push((WEEK.into(), calendar.iter().map(|c| c.week).collect()));
        features.push((WEEKDAY.into(), calendar.iter().map(|c| c.weekday).collect()));
        features.push((HOUR.into(), calendar.iter().map(|c| c.hour).collect()));
        Ok(Self {
            timestamps,
            demand,
            features,
        })
    }

    /// Frame with hourly stamps starting at `start`; used for generated series.
    pub fn from_values(
        start: NaiveDateTime,
        demand: Vec<f64>,
        exogenous: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let timestamps = (0..demand.len() as i64)
            .map(|k| start + TimeDelta::hours(k))
            .collect();
        Self::new(timestamps, demand, exogenous)
    }

    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn feature(&self, name: &str) -> Option<&[f64]> {
        self.features
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|(n, _)| n.as_str())
    }
}

fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M"] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(ts);
        }
    }
    DateTime::parse_from_rfc3339(raw).ok().map(|d| d.naive_local())
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<SeriesFrame> {
    read_csv(File::open(path)?, schema)
}

/// Parses a CSV with a header row. Row numbers in errors are 1-based data rows.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<SeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let ts_col = column(&schema.timestamp)?;
    let demand_col = column(&schema.demand)?;
    let exo_cols = schema
        .exogenous
        .iter()
        .map(|n| column(n))
        .collect::<Result<Vec<_>>>()?;

    let mut timestamps = Vec::new();
    let mut demand = Vec::new();
    let mut exo: Vec<Vec<f64>> = vec![Vec::new(); exo_cols.len()];
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        let cell = |col: usize| record.get(col).unwrap_or("");
        let number = |col: usize, name: &str| -> Result<f64> {
            let raw = cell(col);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    message: format!("column {name}: cannot parse {raw:?} as a number"),
                })
        };
        let ts = parse_timestamp(cell(ts_col)).ok_or_else(|| Error::Parse {
            row,
            message: format!("cannot parse timestamp {:?}", cell(ts_col)),
        })?;
        timestamps.push(ts);
        demand.push(number(demand_col, &schema.demand)?);
        for (k, &col) in exo_cols.iter().enumerate() {
            exo[k].push(number(col, &schema.exogenous[k])?);
        }
    }
    let exogenous = schema.exogenous.iter().cloned().zip(exo).collect();
    SeriesFrame::new(timestamps, demand, exogenous)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lags: usize,
    pub horizon: usize,
    /// Features appended after the lags, read at the forecast origin.
    #[serde(default)]
    pub features: Vec<String>,
}

impl WindowConfig {
    pub fn new(lags: usize, horizon: usize, features: Vec<String>) -> Self {
        Self {
            lags,
            horizon,
            features,
        }
    }

    pub fn object_dim(&self) -> usize {
        self.lags + self.features.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lags == 0 || self.horizon == 0 {
            return Err(Error::Config(
                "lags and horizon must both be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of pairs a series of `len` rows yields.
    pub fn pair_count(&self, len: usize) -> usize {
        (len + 1).saturating_sub(self.lags + self.horizon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row of the last lag. Step `i` (1-based) of the label is row `origin + i`.
    pub origin: usize,
}

fn feature_columns<'a>(frame: &'a SeriesFrame, cfg: &WindowConfig) -> Result<Vec<&'a [f64]>> {
    cfg.features
        .iter()
        .map(|name| {
            frame
                .feature(name)
                .ok_or_else(|| Error::Schema(format!("unknown feature {name:?}")))
        })
        .collect()
}

fn build_pair(frame: &SeriesFrame, cfg: &WindowConfig, cols: &[&[f64]], k: usize) -> SupervisedPair {
    let w = frame.demand();
    let origin = k + cfg.lags - 1;
    let mut x = Vec::with_capacity(cfg.object_dim());
    x.extend_from_slice(&w[k..=origin]);
    x.extend(cols.iter().map(|c| c[origin]));
    let y = w[origin + 1..=origin + cfg.horizon].to_vec();
    SupervisedPair { x, y, origin }
}

fn check_length(frame: &SeriesFrame, cfg: &WindowConfig) -> Result<()> {
    cfg.validate()?;
    let needed = cfg.lags + cfg.horizon;
    if frame.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            available: frame.len(),
        });
    }
    Ok(())
}

pub fn make_windows(frame: &SeriesFrame, cfg: &WindowConfig) -> Result<Vec<SupervisedPair>> {
    check_length(frame, cfg)?;
    let cols = feature_columns(frame, cfg)?;
    Ok((0..cfg.pair_count(frame.len()))
        .map(|k| build_pair(frame, cfg, &cols, k))
        .collect())
}

/// Lazily yields pairs `start, start+1, …` in time order.
pub struct PairStream<'a> {
    frame: &'a SeriesFrame,
    cfg: &'a WindowConfig,
    cols: Vec<&'a [f64]>,
    next: usize,
    end: usize,
}

impl Iterator for PairStream<'_> {
    type Item = SupervisedPair;

    fn next(&mut self) -> Option<SupervisedPair> {
        if self.next >= self.end {
            return None;
        }
        let pair = build_pair(self.frame, self.cfg, &self.cols, self.next);
        self.next += 1;
        Some(pair)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.end - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PairStream<'_> {}

pub fn stream_pairs<'a>(
    frame: &'a SeriesFrame,
    cfg: &'a WindowConfig,
    start: usize,
) -> Result<PairStream<'a>> {
    check_length(frame, cfg)?;
    let cols = feature_columns(frame, cfg)?;
    let end = cfg.pair_count(frame.len());
    if start >= end {
        return Err(Error::Config(format!(
            "stream start {start} is past the last pair index {}",
            end - 1
        )));
    }
    Ok(PairStream {
        frame,
        cfg,
        cols,
        next: start,
        end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn start() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2014, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn plain(values: &[f64]) -> SeriesFrame {
        SeriesFrame::from_values(start(), values.to_vec(), vec![]).unwrap()
    }

    #[test]
    fn three_row_csv() {
        let csv = "Datetime,Demand,Temperature\n\
                   2014-01-06 00:00:00,3.5,18.0\n\
                   2014-01-06T01:00:00,3.25,17.5\n\
                   2014-01-06 02:00:00,3.0,17.0\n";
        let frame = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap();
        assert_eq!(frame.len(), 3);
        assert_eq!(frame.demand(), &[3.5, 3.25, 3.0]);
        assert_eq!(frame.feature("Temperature").unwrap(), &[18.0, 17.5, 17.0]);
        // 2014-01-06 is the Monday of ISO week 2.
        assert_eq!(frame.feature(WEEK).unwrap(), &[2.0, 2.0, 2.0]);
        assert_eq!(frame.feature(WEEKDAY).unwrap(), &[0.0, 0.0, 0.0]);
        assert_eq!(frame.feature(HOUR).unwrap(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn duplicate_timestamp_is_continuity_error() {
        let csv = "Datetime,Demand,Temperature\n\
                   2014-01-01 00:00:00,1,1\n\
                   2014-01-01 00:00:00,2,1\n";
        let err = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Continuity { row: 1, .. }), "{err}");
    }

    #[test]
    fn gap_is_continuity_error() {
        let csv = "Datetime,Demand,Temperature\n\
                   2014-01-01 00:00:00,1,1\n\
                   2014-01-01 02:00:00,2,1\n";
        let err = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Continuity { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn missing_column_and_bad_cell() {
        let csv = "Datetime,Load\n2014-01-01 00:00:00,1\n";
        let err = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));

        let csv = "Datetime,Demand,Temperature\n\
                   2014-01-01 00:00:00,1,1\n\
                   2014-01-01 01:00:00,abc,1\n";
        let err = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap_err();
        match err {
            Error::Parse { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("Demand"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn windows_of_one_to_six() {
        let frame = plain(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let pairs = make_windows(&frame, &WindowConfig::new(2, 2, vec![])).unwrap();
        let got: Vec<_> = pairs.iter().map(|p| (p.x.clone(), p.y.clone())).collect();
        assert_eq!(
            got,
            vec![
                (vec![1.0, 2.0], vec![3.0, 4.0]),
                (vec![2.0, 3.0], vec![4.0, 5.0]),
                (vec![3.0, 4.0], vec![5.0, 6.0]),
            ]
        );
        assert_eq!(pairs[0].origin, 1);
    }

    #[test]
    fn exact_length_gives_one_pair_and_short_is_error() {
        let frame = plain(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let cfg = WindowConfig::new(3, 2, vec![]);
        assert_eq!(make_windows(&frame, &cfg).unwrap().len(), 1);
        let cfg = WindowConfig::new(4, 2, vec![]);
        assert!(matches!(
            make_windows(&frame, &cfg),
            Err(Error::InsufficientData { needed: 6, available: 5 })
        ));
    }

    #[test]
    fn features_read_at_origin() {
        let temp: Vec<f64> = (0..10).map(|v| 100.0 + v as f64).collect();
        let values: Vec<f64> = (0..10).map(f64::from).collect();
        let frame =
            SeriesFrame::from_values(start(), values, vec![("temp".into(), temp)]).unwrap();
        let cfg = WindowConfig::new(3, 2, vec!["temp".into(), HOUR.into()]);
        let pairs = make_windows(&frame, &cfg).unwrap();
        assert_eq!(pairs[2].x, vec![2.0, 3.0, 4.0, 104.0, 4.0]);
        assert_eq!(pairs[2].y, vec![5.0, 6.0]);
        let bad = WindowConfig::new(3, 2, vec!["humidity".into()]);
        assert!(matches!(make_windows(&frame, &bad), Err(Error::Schema(_))));
    }

    #[test]
    fn stream_counts() {
        let frame = plain(&(0..12).map(f64::from).collect::<Vec<_>>());
        let cfg = WindowConfig::new(2, 2, vec![]);
        let all = make_windows(&frame, &cfg).unwrap();
        let streamed: Vec<_> = stream_pairs(&frame, &cfg, 3).unwrap().collect();
        assert_eq!(streamed.len(), 6);
        assert_eq!(streamed, all[3..].to_vec());
        let last = stream_pairs(&frame, &cfg, all.len() - 1).unwrap();
        assert_eq!(last.len(), 1);
        assert!(stream_pairs(&frame, &cfg, all.len()).is_err());
    }

    proptest! {
        #[test]
        fn pair_count_and_round_trip(len in 1usize..40, lags in 1usize..8, horizon in 1usize..6) {
            prop_assume!(len >= lags + horizon);
            let values: Vec<f64> = (0..len).map(|v| (v as f64).sin()).collect();
            let frame = plain(&values);
            let pairs = make_windows(&frame, &WindowConfig::new(lags, horizon, vec![])).unwrap();
            prop_assert_eq!(pairs.len(), len - lags - horizon + 1);
            for (k, pair) in pairs.iter().enumerate() {
                let joined: Vec<f64> = pair.x.iter().chain(&pair.y).copied().collect();
                prop_assert_eq!(&joined[..], &values[k..k + lags + horizon]);
            }
        }

        #[test]
        fn calendar_is_pure(hours in 0i64..200_000) {
            let ts = start() + TimeDelta::hours(hours);
            let a = Calendar::of(&ts);
            prop_assert_eq!(a, Calendar::of(&ts));
            prop_assert!((1.0..=53.0).contains(&a.week));
            prop_assert!((0.0..=6.0).contains(&a.weekday));
            prop_assert!((0.0..=23.0).contains(&a.hour));
        }
    }
}
