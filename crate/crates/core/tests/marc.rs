use dldiv::diversity::{hill_diversity, DiversityOrder};
use dldiv::marc::{facet_series, read_marcxml, split_heading, Facet, MarcView, ViewOptions};
use dldiv::FrequencyDistribution;
use proptest::prelude::*;

fn part() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z ]{0,10}[A-Za-z]".prop_map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
}

proptest! {
    #[test]
    fn split_heading_round_trips(parts in prop::collection::vec(part(), 1..5)) {
        let joined = parts.join("--");
        let h = split_heading(&joined);
        let texts: Vec<&str> = h.subdivisions.iter().map(|s| s.text.as_str()).collect();
        prop_assert_eq!(texts, parts.iter().map(String::as_str).collect::<Vec<_>>());
        prop_assert_eq!(&h.descriptor, &joined);
        prop_assert_eq!(split_heading(&h.descriptor), h);
    }

    #[test]
    fn facet_series_matches_recount(
        records in prop::collection::vec((prop::option::of(1990i32..1996), prop::collection::vec(0u8..8, 0..4)), 1..40)
    ) {
        let views: Vec<MarcView> = records
            .iter()
            .map(|(year, authors)| MarcView {
                id: String::new(),
                entry_year: *year,
                authors: authors.iter().map(|a| format!("A{a}")).collect(),
                headings: vec![],
            })
            .collect();
        let Ok(series) = facet_series(&views, Facet::Authors, DiversityOrder::SHANNON) else {
            return Ok(());
        };
        let mut last_richness = 0;
        for row in &series.rows {
            let mut dist = FrequencyDistribution::new();
            for v in views.iter().filter(|v| v.entry_year.is_some_and(|y| y <= row.year)) {
                for a in Facet::Authors.values(v) {
                    dist.add(a);
                }
            }
            prop_assert_eq!(row.cum_richness, dist.len() as u64);
            prop_assert_eq!(row.events, dist.total());
            prop_assert!((row.cum_diversity - hill_diversity(&dist, DiversityOrder::SHANNON).unwrap()).abs() < 1e-9);
            prop_assert!(row.cum_diversity >= 1.0 && row.cum_diversity <= row.cum_richness as f64 + 1e-9);
            prop_assert!(row.cum_richness >= last_richness);
            last_richness = row.cum_richness;
        }
        prop_assert!(series.mu >= 1.0);
    }
}

#[test]
fn subfield_and_delimiter_paths_agree() {
    let xml = r#"<collection>
      <record><controlfield tag="008">100101s</controlfield>
        <datafield tag="650" ind1=" " ind2="0"><subfield code="a">Commerce</subfield><subfield code="x">History.</subfield></datafield></record>
      <record><controlfield tag="008">110101s</controlfield>
        <datafield tag="650" ind1=" " ind2="0"><subfield code="a">Commerce--History</subfield></datafield></record>
    </collection>"#;
    let batch = read_marcxml(xml.as_bytes(), "x", ViewOptions::default()).unwrap();
    let whole = facet_series(&batch.views, Facet::Subjects, DiversityOrder::SHANNON).unwrap();
    assert_eq!(whole.rows.last().unwrap().cum_richness, 1);
    let parts = facet_series(&batch.views, Facet::Subdivisions, DiversityOrder::SHANNON).unwrap();
    assert_eq!(parts.rows.last().unwrap().cum_richness, 2);
    assert_eq!(parts.total_events, 4);
    assert_eq!(whole.quality.split_paths.len(), 2);
}
