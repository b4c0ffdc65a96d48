//! Grouped-count harvesting with a partitioned fallback.
//!
//! The direct grouped query is tried first. If it fails, or returns at
//! least `page_size` rows (the endpoint may have cut the result), the keys
//! are enumerated page by page and counted in batches of `page_size` keys
//! through `VALUES` clauses.

use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::diversity::FrequencyDistribution;
use crate::error::{Error, Result};

use super::query::{iri, literal, CountQuery, SAMEAS_HOST_QUERY};
use super::transport::{SparqlResults, SparqlTransport, Term};
use super::EndpointConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Retrieval {
    Direct,
    Partitioned,
}

/// Issues queries against one endpoint, strictly one after another, with
/// the configured politeness delay between them.
pub struct Harvester<T: SparqlTransport> {
    cfg: EndpointConfig,
    transport: T,
    last_request: Option<Instant>,
    requests: usize,
}

impl<T: SparqlTransport> Harvester<T> {
    pub fn new(cfg: EndpointConfig, transport: T) -> Self {
        Harvester { cfg, transport, last_request: None, requests: 0 }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    /// Requests sent so far, retries included.
    pub fn requests(&self) -> usize {
        self.requests
    }

    pub fn into_transport(self) -> T {
        self.transport
    }

    fn wait_politely(&self) {
        if let Some(last) = self.last_request {
            let delay = Duration::from_millis(self.cfg.delay_ms);
            let elapsed = last.elapsed();
            if elapsed < delay {
                thread::sleep(delay - elapsed);
            }
        }
    }

    /// One query, retrying transport failures with exponential backoff.
    pub fn request(&mut self, query: &str) -> Result<SparqlResults> {
        let mut attempt = 0;
        loop {
            self.wait_politely();
            self.last_request = Some(Instant::now());
            self.requests += 1;
            match self.transport.query(&self.cfg, query) {
                Err(Error::Transport { message, .. }) if attempt < self.cfg.retries => {
                    let backoff = self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16));
                    attempt += 1;
                    log_retry(&self.cfg.name, attempt, &message);
                    thread::sleep(Duration::from_millis(backoff));
                }
                Err(Error::Transport { message, .. }) => {
                    return Err(Error::Transport { retries: attempt, message })
                }
                other => return other,
            }
        }
    }

    pub fn class_counts(&mut self) -> Result<(FrequencyDistribution, Retrieval)> {
        self.grouped_counts(CountQuery::Classes)
    }

    pub fn property_counts(&mut self) -> Result<(FrequencyDistribution, Retrieval)> {
        self.grouped_counts(CountQuery::Properties)
    }

    /// Links per target host. The host is whatever the endpoint computes
    /// for the `//`...`/` substring; rows without a bound host are ignored.
    /// The boolean is false when the result may have been truncated.
    pub fn sameas_host_counts(&mut self) -> Result<(FrequencyDistribution, bool)> {
        let results = self.request(SAMEAS_HOST_QUERY)?;
        let complete = results.rows().len() < self.cfg.page_size;
        Ok((counts_from(&results, "hostname")?, complete))
    }

    fn grouped_counts(&mut self, q: CountQuery) -> Result<(FrequencyDistribution, Retrieval)> {
        match self.request(q.direct()) {
            Ok(results) if results.rows().len() < self.cfg.page_size => {
                Ok((counts_from(&results, q.key_var())?, Retrieval::Direct))
            }
            Ok(_) | Err(Error::Transport { .. }) => {
                Ok((self.partitioned(q)?, Retrieval::Partitioned))
            }
            Err(Error::Endpoint { status, .. }) if status >= 500 => {
                Ok((self.partitioned(q)?, Retrieval::Partitioned))
            }
            Err(e) => Err(e),
        }
    }

    /// Two-phase retrieval: enumerate keys, then count per batch of keys.
    pub fn partitioned(&mut self, q: CountQuery) -> Result<FrequencyDistribution> {
        let page = self.cfg.page_size;
        let mut keys: Vec<Term> = Vec::new();
        loop {
            let results = self.request(&q.enumerate_keys(page, keys.len()))?;
            let before = keys.len();
            for row in results.rows() {
                if let Some(term) = row.get(q.key_var()) {
                    keys.push(term.clone());
                }
            }
            if results.rows().len() < page || keys.len() == before {
                break;
            }
        }
        let mut dist = FrequencyDistribution::new();
        let rendered: Vec<String> = keys.iter().filter_map(render_term).collect();
        for batch in rendered.chunks(page) {
            let results = self.request(&q.count_keys(batch))?;
            dist.merge(&counts_from(&results, q.key_var())?);
        }
        Ok(dist)
    }
}

fn log_retry(endpoint: &str, attempt: u32, message: &str) {
    eprintln!("warning: {endpoint}: retry {attempt} after transport error: {message}");
}

/// Blank nodes cannot be named in a VALUES clause and are dropped.
fn render_term(term: &Term) -> Option<String> {
    match term.kind.as_str() {
        "uri" => Some(iri(&term.value)),
        "literal" | "typed-literal" => Some(literal(&term.value)),
        _ => None,
    }
}

/// Reads `(key, ?count)` rows into a distribution.
pub fn counts_from(results: &SparqlResults, key_var: &str) -> Result<FrequencyDistribution> {
    let mut dist = FrequencyDistribution::new();
    for row in results.rows() {
        let Some(key) = row.get(key_var) else { continue };
        let count = row
            .get("count")
            .ok_or_else(|| Error::Protocol(format!("row for {:?} has no ?count", key.value)))?;
        let n: u64 = count.value.trim().parse().map_err(|_| {
            Error::Protocol(format!("count {:?} for {:?} is not a non-negative integer", count.value, key.value))
        })?;
        dist.add_n(key.value.clone(), n);
    }
    Ok(dist)
}
