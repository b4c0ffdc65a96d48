//! Growth curves over an ordered stream of class labels.
//!
//! Counts are maintained per event; the diversity statistic is only
//! evaluated at checkpoints, so a pass costs O(events + checkpoints × classes).

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::diversity::{hill_of_counts, DiversityOrder, FrequencyDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    TypeCount,
    Diversity,
    Richness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub year: Option<i32>,
}

/// Ordered `(n, value)` checkpoints of a growing statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationCurve {
    pub statistic: Statistic,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order: Option<DiversityOrder>,
    points: Vec<CurvePoint>,
}

impl AccumulationCurve {
    pub fn empty(statistic: Statistic, order: Option<DiversityOrder>) -> Self {
        AccumulationCurve { statistic, order, points: Vec::new() }
    }

    /// Validates `n ≥ 1`, strictly increasing `n`, finite values, and
    /// non-decreasing values for type-count and richness curves.
    pub fn from_points(
        statistic: Statistic,
        order: Option<DiversityOrder>,
        points: Vec<CurvePoint>,
    ) -> Result<Self> {
        let mut prev: Option<&CurvePoint> = None;
        for p in &points {
            if p.n == 0 {
                return Err(Error::Validation("curve checkpoint n must be at least 1".into()));
            }
            if !p.value.is_finite() {
                return Err(Error::Validation(format!("non-finite value at n={}", p.n)));
            }
            if let Some(q) = prev {
                if p.n <= q.n {
                    return Err(Error::Validation(format!(
                        "checkpoints must be strictly increasing ({} after {})",
                        p.n, q.n
                    )));
                }
                if statistic != Statistic::Diversity && p.value < q.value {
                    return Err(Error::Validation(format!(
                        "{statistic:?} curve decreases at n={}",
                        p.n
                    )));
                }
            }
            prev = Some(p);
        }
        Ok(AccumulationCurve { statistic, order, points })
    }

    /// Convenience for `(n, value)` pairs with no year column.
    pub fn from_pairs(statistic: Statistic, pairs: &[(u64, f64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(n, value)| CurvePoint { n, value, year: None })
            .collect();
        Self::from_points(statistic, None, points)
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&CurvePoint> {
        self.points.last()
    }

    /// Points with `n ≤ limit`.
    pub fn prefix(&self, limit: u64) -> AccumulationCurve {
        self.filtered(|p| p.n <= limit)
    }

    /// Points with `n > limit`.
    pub fn suffix(&self, limit: u64) -> AccumulationCurve {
        self.filtered(|p| p.n > limit)
    }

    fn filtered(&self, keep: impl Fn(&CurvePoint) -> bool) -> AccumulationCurve {
        AccumulationCurve {
            statistic: self.statistic,
            order: self.order,
            points: self.points.iter().copied().filter(|p| keep(p)).collect(),
        }
    }

    pub fn has_years(&self) -> bool {
        self.points.iter().any(|p| p.year.is_some())
    }

    /// Writes `n,value[,year]`. Type counts and richness print as integers,
    /// diversity with four decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let with_year = self.has_years();
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        if with_year {
            w.write_record(["n", "value", "year"]).map_err(csv_err)?;
        } else {
            w.write_record(["n", "value"]).map_err(csv_err)?;
        }
        for p in &self.points {
            let value = match self.statistic {
                Statistic::Diversity => format!("{:.4}", p.value),
                _ => format!("{}", p.value.round() as i64),
            };
            let mut row = vec![p.n.to_string(), value];
            if with_year {
                row.push(p.year.map(|y| y.to_string()).unwrap_or_default());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). The
    /// header must start with `n,value`.
    pub fn read_csv<R: Read>(input: R, statistic: Statistic) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| Error::Input(format!("curve CSV header: {e}")))?
            .clone();
        if headers.get(0) != Some("n") || headers.get(1) != Some("value") {
            return Err(Error::Input(format!(
                "curve CSV must have header n,value[,year], found {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut points = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input(format!("curve CSV row {}: {e}", line + 2)))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let n: u64 = field(0)
                .parse()
                .map_err(|_| Error::Input(format!("bad n {:?} on row {}", field(0), line + 2)))?;
            let value: f64 = field(1).parse().map_err(|_| {
                Error::Input(format!("bad value {:?} on row {}", field(1), line + 2))
            })?;
            let year = match field(2) {
                "" => None,
                y => Some(y.parse().map_err(|_| {
                    Error::Input(format!("bad year {y:?} on row {}", line + 2))
                })?),
            };
            points.push(CurvePoint { n, value, year });
        }
        Self::from_points(statistic, None, points).map_err(|e| match e {
            Error::Validation(m) => Error::Input(m),
            other => other,
        })
    }
}

/// Where along a stream the statistic is sampled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckpointSchedule {
    /// Every `m` events.
    Every(u64),
    /// `per_decade` roughly evenly spaced checkpoints per power of ten.
    Logarithmic(u32),
    /// A fixed, strictly increasing list.
    Explicit(Vec<u64>),
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        CheckpointSchedule::Every(100)
    }
}

impl CheckpointSchedule {
    pub fn every(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("checkpoint interval must be at least 1".into()));
        }
        Ok(CheckpointSchedule::Every(m))
    }

    pub fn logarithmic(per_decade: u32) -> Result<Self> {
        if per_decade == 0 {
            return Err(Error::Validation("need at least one checkpoint per decade".into()));
        }
        Ok(CheckpointSchedule::Logarithmic(per_decade))
    }

    pub fn explicit(mut list: Vec<u64>) -> Result<Self> {
        if list.first() == Some(&0) {
            return Err(Error::Validation("checkpoints start at n=1".into()));
        }
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("explicit checkpoints must be strictly increasing".into()));
        }
        list.shrink_to_fit();
        Ok(CheckpointSchedule::Explicit(list))
    }

    /// Checkpoints for a stream of `len` events; the stream end is always included.
    pub fn checkpoints(&self, len: u64) -> Vec<u64> {
        let mut cursor = self.cursor();
        let mut out = Vec::new();
        while let Some(n) = cursor.next_after(out.last().copied().unwrap_or(0)) {
            if n >= len {
                break;
            }
            out.push(n);
        }
        if len > 0 {
            out.push(len);
        }
        out
    }

    fn cursor(&self) -> ScheduleCursor<'_> {
        ScheduleCursor { schedule: self, index: 0 }
    }
}

struct ScheduleCursor<'a> {
    schedule: &'a CheckpointSchedule,
    index: u64,
}

impl ScheduleCursor<'_> {
    /// The smallest checkpoint strictly greater than `after`.
    fn next_after(&mut self, after: u64) -> Option<u64> {
        match self.schedule {
            CheckpointSchedule::Every(m) => Some((after / m + 1) * m),
            CheckpointSchedule::Logarithmic(per_decade) => loop {
                let exp = self.index as f64 / *per_decade as f64;
                self.index += 1;
                let n = 10f64.powf(exp).round() as u64;
                if n > after {
                    return Some(n);
                }
                if exp > 19.0 {
                    return None;
                }
            },
            CheckpointSchedule::Explicit(list) => {
                while let Some(&n) = list.get(self.index as usize) {
                    self.index += 1;
                    if n > after {
                        return Some(n);
                    }
                }
                None
            }
        }
    }
}

/// Single-writer label counter.
#[derive(Debug, Default, Clone)]
pub struct Accumulator {
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    events: u64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: &str) {
        match self.index.get(label) {
            Some(&i) => self.counts[i] += 1,
            None => {
                self.index.insert(label.to_owned(), self.counts.len());
                self.counts.push(1);
            }
        }
        self.events += 1;
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn types(&self) -> usize {
        self.counts.len()
    }

    /// Hill number of the events seen so far; `None` before the first event.
    pub fn diversity(&self, order: DiversityOrder) -> Option<f64> {
        if self.events == 0 {
            return None;
        }
        Some(hill_of_counts(self.counts.iter().copied(), self.events, order))
    }

    pub fn distribution(&self) -> FrequencyDistribution {
        let mut dist = FrequencyDistribution::new();
        for (label, &i) in &self.index {
            dist.add_n(label.clone(), self.counts[i]);
        }
        dist
    }
}

/// Vocabulary growth and diversity growth from one pass over the stream.
#[derive(Debug, Clone)]
pub struct GrowthCurves {
    pub types: AccumulationCurve,
    pub diversity: AccumulationCurve,
}

pub fn growth_curves<S: AsRef<str>>(
    events: &[S],
    schedule: &CheckpointSchedule,
    order: DiversityOrder,
) -> GrowthCurves {
    let checkpoints = schedule.checkpoints(events.len() as u64);
    let mut acc = Accumulator::new();
    let mut types = Vec::with_capacity(checkpoints.len());
    let mut diversity = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for event in events {
        acc.push(event.as_ref());
        if next.peek() == Some(&&acc.events()) {
            next.next();
            let n = acc.events();
            types.push(CurvePoint { n, value: acc.types() as f64, year: None });
            diversity.push(CurvePoint {
                n,
                value: acc.diversity(order).unwrap_or(0.0),
                year: None,
            });
        }
    }
    GrowthCurves {
        types: AccumulationCurve { statistic: Statistic::TypeCount, order: None, points: types },
        diversity: AccumulationCurve {
            statistic: Statistic::Diversity,
            order: Some(order),
            points: diversity,
        },
    }
}

/// Number of distinct labels among the first `n` events, at each checkpoint.
pub fn vocabulary_growth<S: AsRef<str>>(
    events: &[S],
    schedule: &CheckpointSchedule,
) -> AccumulationCurve {
    growth_curves(events, schedule, DiversityOrder::RICHNESS).types
}

/// Hill number of the first `n` events, at each checkpoint.
pub fn diversity_growth<S: AsRef<str>>(
    events: &[S],
    schedule: &CheckpointSchedule,
    order: DiversityOrder,
) -> AccumulationCurve {
    growth_curves(events, schedule, order).diversity
}

/// Cumulative richness and diversity per year.
#[derive(Debug, Clone)]
pub struct YearlyGrowth {
    pub richness: AccumulationCurve,
    pub diversity: AccumulationCurve,
}

/// Buckets `(year, label)` events by year and emits one checkpoint per
/// year present, with `n` the cumulative event count up to and including
/// that year. Input order is irrelevant.
pub fn yearly_growth<S: AsRef<str>>(events: &[(i32, S)], order: DiversityOrder) -> YearlyGrowth {
    let mut sorted: Vec<&(i32, S)> = events.iter().collect();
    sorted.sort_by_key(|(year, _)| *year);
    let mut acc = Accumulator::new();
    let mut richness = Vec::new();
    let mut diversity = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let year = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == year {
            acc.push(sorted[i].1.as_ref());
            i += 1;
        }
        let n = acc.events();
        richness.push(CurvePoint { n, value: acc.types() as f64, year: Some(year) });
        diversity.push(CurvePoint {
            n,
            value: acc.diversity(order).unwrap_or(0.0),
            year: Some(year),
        });
    }
    YearlyGrowth {
        richness: AccumulationCurve {
            statistic: Statistic::Richness,
            order: None,
            points: richness,
        },
        diversity: AccumulationCurve {
            statistic: Statistic::Diversity,
            order: Some(order),
            points: diversity,
        },
    }
}
