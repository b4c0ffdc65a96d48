//! SPARQL 1.1 Protocol client returning `application/sparql-results+json`.

use std::collections::HashMap;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::{ACCEPT, CONTENT_TYPE};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::EndpointConfig;

pub const RESULTS_JSON: &str = "application/sparql-results+json";

/// Queries longer than this go in a POST body instead of the URL.
const MAX_GET_QUERY_BYTES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub datatype: Option<String>,
    #[serde(rename = "xml:lang", skip_serializing_if = "Option::is_none", default)]
    pub lang: Option<String>,
}

impl Term {
    pub fn uri(value: impl Into<String>) -> Self {
        Term { kind: "uri".into(), value: value.into(), datatype: None, lang: None }
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term { kind: "literal".into(), value: value.into(), datatype: None, lang: None }
    }

    pub fn integer(value: u64) -> Self {
        Term {
            kind: "literal".into(),
            value: value.to_string(),
            datatype: Some("http://www.w3.org/2001/XMLSchema#integer".into()),
            lang: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Head {
    #[serde(default)]
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    pub bindings: Vec<HashMap<String, Term>>,
}

/// A SELECT result set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparqlResults {
    pub head: Head,
    pub results: Bindings,
}

impl SparqlResults {
    pub fn new(vars: &[&str], rows: Vec<HashMap<String, Term>>) -> Self {
        SparqlResults {
            head: Head { vars: vars.iter().map(|v| v.to_string()).collect() },
            results: Bindings { bindings: rows },
        }
    }

    pub fn rows(&self) -> &[HashMap<String, Term>] {
        &self.results.bindings
    }

    pub fn parse(body: &[u8]) -> Result<Self> {
        serde_json::from_slice(body)
            .map_err(|e| Error::Protocol(format!("not a SPARQL JSON result set: {e}")))
    }
}

/// Sends one query to one endpoint. Implementations are used by a single
/// harvester at a time, so at most one request is ever in flight.
pub trait SparqlTransport {
    fn query(&mut self, endpoint: &EndpointConfig, query: &str) -> Result<SparqlResults>;
}

impl<T: SparqlTransport + ?Sized> SparqlTransport for &mut T {
    fn query(&mut self, endpoint: &EndpointConfig, query: &str) -> Result<SparqlResults> {
        (**self).query(endpoint, query)
    }
}

impl<T: SparqlTransport + ?Sized> SparqlTransport for Box<T> {
    fn query(&mut self, endpoint: &EndpointConfig, query: &str) -> Result<SparqlResults> {
        (**self).query(endpoint, query)
    }
}

/// Blocking HTTP transport. Honors the usual `HTTP_PROXY`/`HTTPS_PROXY`
/// environment variables.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    client: Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self> {
        let client = Client::builder()
            .timeout(timeout)
            .user_agent(concat!("dldiv/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Error::Transport { retries: 0, message: e.to_string() })?;
        Ok(HttpTransport { client })
    }

    pub fn for_endpoint(cfg: &EndpointConfig) -> Result<Self> {
        Self::new(Duration::from_secs(cfg.timeout_secs))
    }
}

impl SparqlTransport for HttpTransport {
    fn query(&mut self, endpoint: &EndpointConfig, query: &str) -> Result<SparqlResults> {
        let request = if query.len() <= MAX_GET_QUERY_BYTES {
            self.client.get(&endpoint.url).query(&[("query", query)])
        } else {
            self.client
                .post(&endpoint.url)
                .header(CONTENT_TYPE, "application/sparql-query")
                .body(query.to_owned())
        };
        let response = request
            .header(ACCEPT, RESULTS_JSON)
            .send()
            .map_err(|e| Error::Transport { retries: 0, message: e.to_string() })?;
        let status = response.status();
        let body = response
            .bytes()
            .map_err(|e| Error::Transport { retries: 0, message: e.to_string() })?;
        if !status.is_success() {
            let text = String::from_utf8_lossy(&body);
            let message: String = text.chars().take(200).collect();
            return Err(Error::Endpoint { status: status.as_u16(), message });
        }
        SparqlResults::parse(&body)
    }
}
