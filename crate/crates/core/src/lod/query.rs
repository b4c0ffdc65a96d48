//! SPARQL query texts.
//!
//! The class and sameAs-host queries are kept verbatim, including their
//! whitespace. The property query is the same grouped count over `?p`.

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

/// Number of resources per class.
pub const CLASS_QUERY: &str = "SELECT ?class (COUNT(?s) AS ?count)
WHERE {
    ?s a ?class 
}
GROUP BY ?class";

/// Number of `owl:sameAs` links per target host.
pub const SAMEAS_HOST_QUERY: &str = "SELECT ?hostname (COUNT(?s) AS ?count)
WHERE{
   ?s owl:sameAs ?same . 
    bind(
       strbefore(strafter(
        str(?same),\"//\"),\"/\") 
        AS ?hostname)
}
GROUP BY ?hostname";

/// Number of triples per predicate.
pub const PROPERTY_QUERY: &str = "SELECT ?p (COUNT(*) AS ?count)
WHERE {
    ?s ?p ?o 
}
GROUP BY ?p";

/// A grouped count that can also be run key by key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountQuery {
    Classes,
    Properties,
}

impl CountQuery {
    pub fn key_var(self) -> &'static str {
        match self {
            CountQuery::Classes => "class",
            CountQuery::Properties => "p",
        }
    }

    fn pattern(self) -> &'static str {
        match self {
            CountQuery::Classes => "?s a ?class",
            CountQuery::Properties => "?s ?p ?o",
        }
    }

    fn aggregate(self) -> &'static str {
        match self {
            CountQuery::Classes => "COUNT(?s)",
            CountQuery::Properties => "COUNT(*)",
        }
    }

    pub fn direct(self) -> &'static str {
        match self {
            CountQuery::Classes => CLASS_QUERY,
            CountQuery::Properties => PROPERTY_QUERY,
        }
    }

    /// One page of the distinct keys, in a stable order.
    pub fn enumerate_keys(self, limit: usize, offset: usize) -> String {
        let var = self.key_var();
        format!(
            "SELECT DISTINCT ?{var} WHERE {{ {} }} ORDER BY ?{var} LIMIT {limit} OFFSET {offset}",
            self.pattern()
        )
    }

    /// Counts restricted to the given keys (already rendered as SPARQL terms).
    pub fn count_keys(self, keys: &[String]) -> String {
        let var = self.key_var();
        format!(
            "SELECT ?{var} ({} AS ?count) WHERE {{ VALUES ?{var} {{ {} }} {} }} GROUP BY ?{var}",
            self.aggregate(),
            keys.join(" "),
            self.pattern()
        )
    }
}

/// Renders an IRI for a VALUES clause.
pub fn iri(value: &str) -> String {
    format!("<{value}>")
}

/// Renders a plain string literal for a VALUES clause.
pub fn literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
