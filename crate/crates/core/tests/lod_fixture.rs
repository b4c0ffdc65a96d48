use std::time::Duration;

use dldiv::lod::fixture::FixtureGraph;
use dldiv::lod::{profile, CountQuery, EndpointConfig, Harvester, Retrieval, Term};
use proptest::prelude::*;

fn cfg(page_size: usize, delay_ms: u64) -> EndpointConfig {
    EndpointConfig { page_size, delay_ms, backoff_ms: 0, ..EndpointConfig::new("P", "http://fixture/") }
}

fn graph(triples: &[(u8, u8, u8)]) -> FixtureGraph {
    let mut g = FixtureGraph::new();
    for &(s, p, o) in triples {
        if p % 3 == 0 {
            g.add_type(&format!("http://s/{s}"), &format!("http://c/{o}"));
        } else {
            g.add(&format!("http://s/{s}"), &format!("http://p/{p}"), Term::literal(o.to_string()));
        }
    }
    g
}

proptest! {
    #[test]
    fn partitioned_equals_direct(
        triples in prop::collection::vec((0u8..20, 0u8..12, 0u8..15), 0..80),
        page in 1usize..6,
        limit in 1usize..6,
    ) {
        for q in [CountQuery::Classes, CountQuery::Properties] {
            let mut plain = graph(&triples);
            let direct = Harvester::new(cfg(10_000, 0), &mut plain).partitioned(q).unwrap();
            let mut h = Harvester::new(cfg(10_000, 0), &mut plain);
            let (reference, path) = match q {
                CountQuery::Classes => h.class_counts().unwrap(),
                CountQuery::Properties => h.property_counts().unwrap(),
            };
            prop_assert_eq!(path, Retrieval::Direct);
            prop_assert_eq!(&direct, &reference);

            let mut truncating = graph(&triples);
            truncating.truncate_at(limit.max(page));
            let mut h = Harvester::new(cfg(page, 0), &mut truncating);
            let (got, _) = match q {
                CountQuery::Classes => h.class_counts().unwrap(),
                CountQuery::Properties => h.property_counts().unwrap(),
            };
            prop_assert_eq!(&got, &reference);
        }
    }

    #[test]
    fn derived_stats_are_recomputable(triples in prop::collection::vec((0u8..20, 0u8..12, 0u8..15), 1..60)) {
        let mut g = graph(&triples);
        let p = profile(&mut Harvester::new(cfg(10_000, 0), &mut g)).unwrap();
        prop_assert_eq!(p.recompute(), (p.class_stats, p.property_stats));
        for s in [p.class_stats, p.property_stats].into_iter().flatten() {
            prop_assert!(s.dr > 0.0 && s.dr <= 1.0);
        }
    }
}

#[test]
fn requests_are_sequential_and_polite() {
    let mut g = graph(&[(1, 0, 1), (2, 0, 2), (3, 0, 3), (1, 1, 1)]);
    g.truncate_at(1);
    let delay = 25;
    let mut h = Harvester::new(cfg(1, delay), &mut g);
    profile(&mut h).unwrap();
    let n = h.requests();
    assert!(n > 5, "partitioned path should need several requests, got {n}");
    assert_eq!(g.log.len(), n);
    for pair in g.log.windows(2) {
        let gap = pair[1].0.duration_since(pair[0].0);
        assert!(gap >= Duration::from_millis(delay), "gap {gap:?}");
    }
}

#[test]
fn table4_ratios_against_published_d_and_r() {
    // Published D/R more than 0.005 away from published D ÷ R.
    let inconsistent = [("AT", "prop"), ("FI", "class"), ("KB", "prop")];
    let rows = dldiv::lod::table4_snapshot();
    assert_eq!(rows.len(), 8);
    for row in rows {
        for (column, s) in [("class", row.class.unwrap()), ("prop", row.property.unwrap())] {
            let gap = (s.dr - s.d / s.r as f64).abs();
            let known = inconsistent.contains(&(row.host.as_str(), column));
            assert_eq!(gap > 0.005 + 1e-12, known, "{} {column}: {}/{} vs {}", row.host, s.d, s.r, s.dr);
            assert!(gap < 0.01);
        }
    }
}
