use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::accumulation::yearly_growth;
use crate::diversity::DiversityOrder;
use crate::error::{Error, Result};

use super::{MarcView, ParsedBatch, SplitPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Facet {
    Authors,
    /// Whole subject descriptors.
    Subjects,
    /// Individual subject subdivisions.
    Subdivisions,
}

impl Facet {
    /// Distinct facet values of one record, in first-seen order.
    pub fn values(self, view: &MarcView) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let all: Box<dyn Iterator<Item = &str>> = match self {
            Facet::Authors => Box::new(view.authors.iter().map(String::as_str)),
            Facet::Subjects => Box::new(view.headings.iter().map(|h| h.descriptor.as_str())),
            Facet::Subdivisions => Box::new(
                view.headings
                    .iter()
                    .flat_map(|h| h.subdivisions.iter().map(|s| s.text.as_str())),
            ),
        };
        all.filter(|v| seen.insert(*v)).collect()
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Facet::Authors => "authors",
            Facet::Subjects => "subjects",
            Facet::Subdivisions => "subdivisions",
        })
    }
}

impl FromStr for Facet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "authors" => Ok(Facet::Authors),
            "subjects" => Ok(Facet::Subjects),
            "subdivisions" => Ok(Facet::Subdivisions),
            other => Err(Error::Validation(format!("unknown facet {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FacetRow {
    pub year: i32,
    /// Facet events up to and including this year.
    pub events: u64,
    pub cum_richness: u64,
    pub cum_diversity: f64,
}

/// Cumulative richness and diversity of a facet by catalog-entry year.
#[derive(Debug, Clone, Serialize)]
pub struct FacetSeries {
    pub facet: Facet,
    pub order: DiversityOrder,
    pub rows: Vec<FacetRow>,
    /// Mean number of events per distinct value.
    pub mu: f64,
    pub total_events: u64,
    pub quality: QualitySummary,
}

/// Data-quality counters for a facet run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QualitySummary {
    /// Records read, including skipped ones.
    pub records: usize,
    /// Records dropped for broken MARC structure.
    pub skipped: usize,
    /// Parsed records without a decodable entry date.
    pub missing_year: usize,
    pub mu: f64,
    /// Subject headings by split path, for the subject facets.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub split_paths: BTreeMap<SplitPath, usize>,
}

/// Builds the per-year series. Each record contributes one event per
/// distinct facet value; records without an entry year are excluded and
/// counted. One row per year with at least one event.
pub fn facet_series(views: &[MarcView], facet: Facet, order: DiversityOrder) -> Result<FacetSeries> {
    let mut events: Vec<(i32, &str)> = Vec::new();
    let mut quality = QualitySummary { records: views.len(), ..QualitySummary::default() };
    let mut dated = 0usize;
    for view in views {
        if facet != Facet::Authors {
            for h in &view.headings {
                *quality.split_paths.entry(h.path).or_insert(0) += 1;
            }
        }
        let Some(year) = view.entry_year else {
            quality.missing_year += 1;
            continue;
        };
        dated += 1;
        events.extend(facet.values(view).into_iter().map(|v| (year, v)));
    }
    if dated == 0 {
        return Err(Error::EmptySeries("no record has a decodable entry year".into()));
    }
    if events.is_empty() {
        return Err(Error::EmptySeries(format!("dated records carry no {facet} values")));
    }
    let growth = yearly_growth(&events, order);
    let rows: Vec<FacetRow> = growth
        .richness
        .points()
        .iter()
        .zip(growth.diversity.points())
        .map(|(r, d)| FacetRow {
            year: r.year.expect("yearly curves carry years"),
            events: r.n,
            cum_richness: r.value as u64,
            cum_diversity: d.value,
        })
        .collect();
    let last = rows.last().expect("at least one event");
    let mu = last.events as f64 / last.cum_richness as f64;
    quality.mu = mu;
    Ok(FacetSeries {
        facet,
        order,
        total_events: last.events,
        mu,
        rows,
        quality,
    })
}

/// [`facet_series`] over a parsed batch, with the parser's record and skip
/// counts carried into the quality summary.
pub fn batch_series(batch: &ParsedBatch, facet: Facet, order: DiversityOrder) -> Result<FacetSeries> {
    let mut series = facet_series(&batch.views, facet, order)?;
    series.quality.records = batch.records;
    series.quality.skipped = batch.skipped;
    Ok(series)
}

impl FacetSeries {
    pub const CSV_HEADER: &'static str = "year,cum_richness,cum_diversity";

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(Self::CSV_HEADER.split(',')).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record([
                row.year.to_string(),
                row.cum_richness.to_string(),
                format!("{:.4}", row.cum_diversity),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
