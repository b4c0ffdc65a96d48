//! An in-memory SPARQL endpoint for tests.
//!
//! It answers exactly the query shapes the harvester sends: the three
//! grouped counts and the two partition queries. It can truncate results,
//! fail chosen queries, fail the first few requests at the transport
//! level, and records when each request arrived.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;
use std::time::Instant;

use regex::Regex;

use crate::error::{Error, Result};

use super::query::{OWL_SAME_AS, RDF_TYPE};
use super::transport::{SparqlResults, SparqlTransport, Term};
use super::{CountQuery, EndpointConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub s: String,
    pub p: String,
    pub o: Term,
}

#[derive(Debug, Default)]
pub struct FixtureGraph {
    triples: Vec<Triple>,
    truncate_at: Option<usize>,
    failing: HashSet<String>,
    transport_failures: usize,
    /// Arrival time and text of every request, failed ones included.
    pub log: Vec<(Instant, String)>,
}

fn enumerate_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^SELECT DISTINCT \?(\w+) WHERE \{ (.+) \} ORDER BY \?\w+ LIMIT (\d+) OFFSET (\d+)$").unwrap()
    })
}

fn count_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^SELECT \?(\w+) \(COUNT\((?:\?s|\*)\) AS \?count\) WHERE \{ VALUES \?\w+ \{ (.*) \} (.+) \} GROUP BY \?\w+$")
            .unwrap()
    })
}

fn term_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"<([^>]*)>|"((?:[^"\\]|\\.)*)""#).unwrap())
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

/// SPARQL `STRAFTER`: empty when the needle is absent.
fn strafter<'a>(s: &'a str, needle: &str) -> &'a str {
    s.find(needle).map_or("", |i| &s[i + needle.len()..])
}

/// SPARQL `STRBEFORE`: empty when the needle is absent.
fn strbefore<'a>(s: &'a str, needle: &str) -> &'a str {
    s.find(needle).map_or("", |i| &s[..i])
}

/// The host part the sameAs query computes for a link target.
pub fn sameas_host(target: &str) -> &str {
    strbefore(strafter(target, "//"), "/")
}

impl FixtureGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, s: &str, p: &str, o: Term) {
        self.triples.push(Triple { s: s.into(), p: p.into(), o });
    }

    pub fn add_type(&mut self, s: &str, class: &str) {
        self.add(s, RDF_TYPE, Term::uri(class));
    }

    pub fn add_same_as(&mut self, s: &str, target: &str) {
        self.add(s, OWL_SAME_AS, Term::uri(target));
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Returns at most `rows` rows for any query, like a server-side limit.
    pub fn truncate_at(&mut self, rows: usize) -> &mut Self {
        self.truncate_at = Some(rows);
        self
    }

    /// Answers this exact query text with HTTP 503.
    pub fn fail_query(&mut self, query: &str) -> &mut Self {
        self.failing.insert(query.to_owned());
        self
    }

    /// Fails the next `n` requests with a transport error.
    pub fn fail_transport(&mut self, n: usize) -> &mut Self {
        self.transport_failures = n;
        self
    }

    fn class_of(t: &Triple) -> Option<&Term> {
        (t.p == RDF_TYPE).then_some(&t.o)
    }

    fn key_of(q: CountQuery, t: &Triple) -> Option<Term> {
        match q {
            CountQuery::Classes => Self::class_of(t).cloned(),
            CountQuery::Properties => Some(Term::uri(&t.p)),
        }
    }

    fn grouped(&self, q: CountQuery, only: Option<&HashSet<String>>) -> SparqlResults {
        let mut counts: BTreeMap<String, (Term, u64)> = BTreeMap::new();
        for t in &self.triples {
            let Some(key) = Self::key_of(q, t) else { continue };
            if only.is_some_and(|keys| !keys.contains(&key.value)) {
                continue;
            }
            counts.entry(key.value.clone()).or_insert((key, 0)).1 += 1;
        }
        let var = q.key_var();
        let rows = counts
            .into_values()
            .map(|(key, n)| row(&[(var, key), ("count", Term::integer(n))]))
            .collect();
        SparqlResults::new(&[var, "count"], rows)
    }

    fn sameas(&self) -> SparqlResults {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for t in self.triples.iter().filter(|t| t.p == OWL_SAME_AS) {
            *counts.entry(sameas_host(&t.o.value).to_owned()).or_insert(0) += 1;
        }
        let rows = counts
            .into_iter()
            .map(|(host, n)| row(&[("hostname", Term::literal(host)), ("count", Term::integer(n))]))
            .collect();
        SparqlResults::new(&["hostname", "count"], rows)
    }

    fn enumerate(&self, q: CountQuery, limit: usize, offset: usize) -> SparqlResults {
        let mut keys: BTreeMap<String, Term> = BTreeMap::new();
        for t in &self.triples {
            if let Some(key) = Self::key_of(q, t) {
                keys.entry(key.value.clone()).or_insert(key);
            }
        }
        let var = q.key_var();
        let rows = keys.into_values().skip(offset).take(limit).map(|k| row(&[(var, k)])).collect();
        SparqlResults::new(&[var], rows)
    }

    fn answer(&self, query: &str) -> Result<SparqlResults> {
        if query == CountQuery::Classes.direct() {
            return Ok(self.grouped(CountQuery::Classes, None));
        }
        if query == CountQuery::Properties.direct() {
            return Ok(self.grouped(CountQuery::Properties, None));
        }
        if query == super::SAMEAS_HOST_QUERY {
            return Ok(self.sameas());
        }
        let kind = |var: &str| match var {
            "class" => Some(CountQuery::Classes),
            "p" => Some(CountQuery::Properties),
            _ => None,
        };
        if let Some(c) = enumerate_re().captures(query) {
            if let Some(q) = kind(&c[1]) {
                return Ok(self.enumerate(q, c[3].parse().unwrap(), c[4].parse().unwrap()));
            }
        }
        if let Some(c) = count_re().captures(query) {
            if let Some(q) = kind(&c[1]) {
                let keys: HashSet<String> = term_re()
                    .captures_iter(&c[2])
                    .map(|t| match t.get(1) {
                        Some(iri) => iri.as_str().to_owned(),
                        None => unescape(&t[2]),
                    })
                    .collect();
                return Ok(self.grouped(q, Some(&keys)));
            }
        }
        Err(Error::Endpoint { status: 400, message: format!("fixture cannot answer {query:?}") })
    }
}

fn row(pairs: &[(&str, Term)]) -> HashMap<String, Term> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

impl SparqlTransport for FixtureGraph {
    fn query(&mut self, _endpoint: &EndpointConfig, query: &str) -> Result<SparqlResults> {
        self.log.push((Instant::now(), query.to_owned()));
        if self.transport_failures > 0 {
            self.transport_failures -= 1;
            return Err(Error::Transport { retries: 0, message: "connection reset".into() });
        }
        if self.failing.contains(query) {
            return Err(Error::Endpoint { status: 503, message: "query timed out".into() });
        }
        let mut results = self.answer(query)?;
        if let Some(limit) = self.truncate_at {
            results.results.bindings.truncate(limit);
        }
        Ok(results)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::FrequencyDistribution;
    use crate::lod::{Harvester, Retrieval, CLASS_QUERY, PROPERTY_QUERY, SAMEAS_HOST_QUERY};

    fn cfg(page_size: usize) -> EndpointConfig {
        EndpointConfig { page_size, delay_ms: 0, backoff_ms: 0, ..EndpointConfig::new("F", "http://fixture/") }
    }

    fn people() -> FixtureGraph {
        let mut g = FixtureGraph::new();
        g.add_type("http://x/x", "http://x/Person");
        g.add_type("http://x/y", "http://x/Person");
        g.add_type("http://x/z", "http://x/Work");
        g
    }

    fn expected() -> FrequencyDistribution {
        FrequencyDistribution::from_counts([("http://x/Person", 2), ("http://x/Work", 1)]).unwrap()
    }

    #[test]
    fn direct_class_counts() {
        let mut g = people();
        let (d, path) = Harvester::new(cfg(100), &mut g).class_counts().unwrap();
        assert_eq!((d, path), (expected(), Retrieval::Direct));
        assert_eq!(g.log.len(), 1);
        assert_eq!(g.log[0].1, CLASS_QUERY);
    }

    #[test]
    fn empty_graph() {
        let mut g = FixtureGraph::new();
        let mut h = Harvester::new(cfg(100), &mut g);
        assert!(h.class_counts().unwrap().0.is_empty());
        assert!(h.property_counts().unwrap().0.is_empty());
        assert!(h.sameas_host_counts().unwrap().0.is_empty());
    }

    #[test]
    fn truncated_grouped_query_falls_back() {
        let mut g = people();
        g.truncate_at(1);
        let (d, path) = Harvester::new(cfg(1), &mut g).class_counts().unwrap();
        assert_eq!((d, path), (expected(), Retrieval::Partitioned));
    }

    #[test]
    fn failed_grouped_query_falls_back() {
        let mut g = people();
        g.fail_query(CLASS_QUERY);
        let (d, path) = Harvester::new(cfg(100), &mut g).class_counts().unwrap();
        assert_eq!((d, path), (expected(), Retrieval::Partitioned));
    }

    #[test]
    fn property_counts() {
        let mut g = FixtureGraph::new();
        g.add("http://x/a", "http://x/p", Term::literal("1"));
        g.add("http://x/b", "http://x/p", Term::literal("2"));
        g.add("http://x/a", "http://x/q", Term::uri("http://x/b"));
        let (d, _) = Harvester::new(cfg(100), &mut g).property_counts().unwrap();
        assert_eq!(d, FrequencyDistribution::from_counts([("http://x/p", 2), ("http://x/q", 1)]).unwrap());
        assert_eq!(g.log[0].1, PROPERTY_QUERY);

        let mut g = people();
        let (d, _) = Harvester::new(cfg(100), &mut g).property_counts().unwrap();
        assert_eq!(d, FrequencyDistribution::from_counts([(RDF_TYPE, 3)]).unwrap());
    }

    #[test]
    fn sameas_hosts() {
        assert_eq!(sameas_host("https://d-nb.info/gnd/x"), "d-nb.info");
        assert_eq!(sameas_host("http://viaf.org"), "");
        assert_eq!(sameas_host("urn:isbn:123"), "");

        let mut g = FixtureGraph::new();
        g.add_same_as("http://x/a", "http://viaf.org/viaf/1");
        g.add_same_as("http://x/b", "http://viaf.org/viaf/2");
        let (d, complete) = Harvester::new(cfg(100), &mut g).sameas_host_counts().unwrap();
        assert_eq!(d, FrequencyDistribution::from_counts([("viaf.org", 2)]).unwrap());
        assert!(complete);
        assert_eq!(g.log[0].1, SAMEAS_HOST_QUERY);
    }

    #[test]
    fn transport_retries() {
        let mut g = people();
        g.fail_transport(3);
        let mut h = Harvester::new(cfg(100), &mut g);
        assert_eq!(h.class_counts().unwrap().0, expected());
        assert_eq!(h.requests(), 4);

        let mut g = people();
        g.fail_transport(100);
        let err = Harvester::new(cfg(100), &mut g).sameas_host_counts().unwrap_err();
        assert!(matches!(err, Error::Transport { retries: 3, .. }), "{err}");
        assert_eq!(g.log.len(), 4);
    }

    #[test]
    fn client_errors_propagate() {
        let mut g = people();
        g.fail_query(CLASS_QUERY);
        g.fail_query(&CountQuery::Classes.enumerate_keys(100, 0));
        assert!(matches!(
            Harvester::new(cfg(100), &mut g).class_counts(),
            Err(Error::Endpoint { status: 503, .. })
        ));
    }

    #[test]
    fn literal_keys_in_values() {
        let mut g = FixtureGraph::new();
        g.add("http://x/a", RDF_TYPE, Term::literal("odd \"class\""));
        g.add("http://x/b", RDF_TYPE, Term::uri("http://x/C"));
        g.truncate_at(1);
        let (d, path) = Harvester::new(cfg(1), &mut g).class_counts().unwrap();
        assert_eq!(path, Retrieval::Partitioned);
        assert_eq!(d.get("odd \"class\""), 1);
        assert_eq!(d.get("http://x/C"), 1);
    }
}
