//! Class, property and `owl:sameAs` usage of linked-open-data endpoints.
//!
//! A [`Harvester`] talks to one endpoint through a [`SparqlTransport`];
//! [`profile`] composes the three harvests into a [`LodProfile`] with the
//! diversity, richness and their ratio (order 1) for classes and properties.

mod harvest;
mod query;
mod transport;

pub mod fixture;

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize, Serializer};

use crate::diversity::{hill_diversity, DiversityOrder, FrequencyDistribution};
use crate::error::{Error, Result};
use crate::par::Execution;

pub use harvest::{counts_from, Harvester, Retrieval};
pub use query::{iri, literal, CountQuery, CLASS_QUERY, OWL_SAME_AS, PROPERTY_QUERY, RDF_TYPE, SAMEAS_HOST_QUERY};
pub use transport::{Bindings, Head, HttpTransport, SparqlResults, SparqlTransport, Term, RESULTS_JSON};

fn default_true() -> bool {
    true
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    500
}

/// One SPARQL endpoint and how politely to query it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Short code, also used as the `host` column of the summary table.
    pub name: String,
    pub url: String,
    /// Rows per page; a grouped result this long is assumed truncated.
    pub page_size: usize,
    pub timeout_secs: u64,
    /// Minimum pause between two requests to this endpoint.
    pub delay_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub institution: Option<String>,
    /// Landing page of the published dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homepage: Option<String>,
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// First retry delay; doubled on every further retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

impl EndpointConfig {
    pub fn new(name: impl Into<String>, url: impl Into<String>) -> Self {
        EndpointConfig {
            name: name.into(),
            url: url.into(),
            page_size: 10_000,
            timeout_secs: 60,
            delay_ms: 1000,
            institution: None,
            homepage: None,
            enabled: true,
            retries: default_retries(),
            backoff_ms: default_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("endpoint name is empty".into()));
        }
        if !(self.url.starts_with("http://") || self.url.starts_with("https://")) {
            return Err(Error::Validation(format!("{}: url {:?} is not http(s)", self.name, self.url)));
        }
        if self.page_size == 0 {
            return Err(Error::Validation(format!("{}: page_size must be at least 1", self.name)));
        }
        if self.timeout_secs == 0 {
            return Err(Error::Validation(format!("{}: timeout_secs must be at least 1", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RosterFile {
    #[serde(default)]
    endpoint: Vec<EndpointConfig>,
}

/// Parses a TOML roster of `[[endpoint]]` tables.
pub fn parse_roster(text: &str) -> Result<Vec<EndpointConfig>> {
    let file: RosterFile =
        toml::from_str(text).map_err(|e| Error::Input(format!("roster: {e}")))?;
    let mut names = HashSet::new();
    for cfg in &file.endpoint {
        cfg.validate().map_err(|e| Error::Input(format!("roster: {e}")))?;
        if !names.insert(cfg.name.as_str()) {
            return Err(Error::Input(format!("roster: duplicate endpoint {:?}", cfg.name)));
        }
    }
    Ok(file.endpoint)
}

pub fn load_roster(path: &Path) -> Result<Vec<EndpointConfig>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_roster(&text)
}

/// The shipped roster of library repositories.
pub fn default_roster() -> Vec<EndpointConfig> {
    parse_roster(include_str!("../../data/roster.toml")).expect("shipped roster is valid")
}

fn round2<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64((v * 100.0).round() / 100.0)
}

/// Diversity `D` (order 1), richness `R` and `D/R` of one distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiversityStats {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "D/R", serialize_with = "round2")]
    pub dr: f64,
}

impl DiversityStats {
    /// `None` for an empty distribution.
    pub fn of(dist: &FrequencyDistribution) -> Option<Self> {
        let d = hill_diversity(dist, DiversityOrder::SHANNON).ok()?;
        let r = dist.len() as u64;
        Some(DiversityStats { d, r, dr: d / r as f64 })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LodProfile {
    pub endpoint: String,
    /// When the harvest finished; the data may be older than this.
    pub retrieved_at: DateTime<Utc>,
    /// False when the sameAs harvest failed or may have been truncated.
    pub complete: bool,
    pub class_stats: Option<DiversityStats>,
    pub property_stats: Option<DiversityStats>,
    pub class_retrieval: Retrieval,
    pub property_retrieval: Retrieval,
    pub classes: FrequencyDistribution,
    pub properties: FrequencyDistribution,
    pub sameas_hosts: Option<FrequencyDistribution>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl LodProfile {
    /// Recomputes the derived statistics from the stored distributions.
    pub fn recompute(&self) -> (Option<DiversityStats>, Option<DiversityStats>) {
        (DiversityStats::of(&self.classes), DiversityStats::of(&self.properties))
    }
}

/// Harvests classes, properties and sameAs hosts. Class and property
/// failures are errors; a sameAs failure leaves the profile incomplete.
pub fn profile<T: SparqlTransport>(harvester: &mut Harvester<T>) -> Result<LodProfile> {
    let (classes, class_retrieval) = harvester.class_counts()?;
    let (properties, property_retrieval) = harvester.property_counts()?;
    let mut warnings = Vec::new();
    let (sameas_hosts, complete) = match harvester.sameas_host_counts() {
        Ok((hosts, true)) => (Some(hosts), true),
        Ok((hosts, false)) => {
            warnings.push(format!(
                "sameAs result reached page size {}; host counts may be truncated",
                harvester.config().page_size
            ));
            (Some(hosts), false)
        }
        Err(e) => {
            warnings.push(format!("sameAs harvest failed: {e}"));
            (None, false)
        }
    };
    Ok(LodProfile {
        endpoint: harvester.config().name.clone(),
        retrieved_at: Utc::now(),
        complete,
        class_stats: DiversityStats::of(&classes),
        property_stats: DiversityStats::of(&properties),
        class_retrieval,
        property_retrieval,
        classes,
        properties,
        sameas_hosts,
        warnings,
    })
}

/// Profiles the given endpoints over HTTP, endpoints in parallel, requests
/// to each endpoint strictly sequential. Results follow the input order.
pub fn harvest_endpoints(endpoints: &[EndpointConfig], exec: Execution) -> Vec<Result<LodProfile>> {
    exec.map(endpoints, |cfg| {
        HttpTransport::for_endpoint(cfg).and_then(|t| profile(&mut Harvester::new(cfg.clone(), t)))
    })
}

/// One row of the class/property summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table4Row {
    pub host: String,
    pub class: Option<DiversityStats>,
    pub property: Option<DiversityStats>,
}

impl From<&LodProfile> for Table4Row {
    fn from(p: &LodProfile) -> Self {
        Table4Row { host: p.endpoint.clone(), class: p.class_stats, property: p.property_stats }
    }
}

pub const TABLE4_HEADER: &str = "host,class_D,class_R,class_DR,prop_D,prop_R,prop_DR";

fn stats_cells(s: Option<DiversityStats>) -> [String; 3] {
    match s {
        Some(s) => [format!("{:.4}", s.d), s.r.to_string(), format!("{:.2}", s.dr)],
        None => [String::new(), String::new(), String::new()],
    }
}

/// Writes the summary table; empty cells where a distribution was empty.
pub fn write_table4<W: Write>(rows: &[Table4Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(TABLE4_HEADER.split(',')).map_err(csv_err)?;
    for row in rows {
        let [cd, cr, cdr] = stats_cells(row.class);
        let [pd, pr, pdr] = stats_cells(row.property);
        w.write_record([row.host.as_str(), &cd, &cr, &cdr, &pd, &pr, &pdr]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct Table4Record {
    host: String,
    #[serde(rename = "class_D")]
    class_d: f64,
    #[serde(rename = "class_R")]
    class_r: u64,
    #[serde(rename = "class_DR")]
    class_dr: f64,
    #[serde(rename = "prop_D")]
    prop_d: f64,
    #[serde(rename = "prop_R")]
    prop_r: u64,
    #[serde(rename = "prop_DR")]
    prop_dr: f64,
}

/// Reads a fully populated summary table.
pub fn read_table4<R: Read>(input: R) -> Result<Vec<Table4Row>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Input(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.join(",") != TABLE4_HEADER {
        return Err(Error::Input(format!("expected header {TABLE4_HEADER:?}")));
    }
    rdr.deserialize::<Table4Record>()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
            Ok(Table4Row {
                host: rec.host,
                class: Some(DiversityStats { d: rec.class_d, r: rec.class_r, dr: rec.class_dr }),
                property: Some(DiversityStats { d: rec.prop_d, r: rec.prop_r, dr: rec.prop_dr }),
            })
        })
        .collect()
}

/// Published values for eight of the roster's repositories. A snapshot
/// of drifting endpoints, useful for comparison, not as a target.
pub fn table4_snapshot() -> Vec<Table4Row> {
    read_table4(include_str!("../../data/table4.csv").as_bytes()).expect("shipped snapshot is valid")
}
