//! MARC 21 bibliographic records: authors, subject headings and the year
//! each record entered the catalog.

mod facet;
mod xml;

use serde::Serialize;

pub use facet::{batch_series, facet_series, Facet, FacetRow, FacetSeries, QualitySummary};
pub use xml::{read_marcxml, read_marcxml_file, read_marcxml_files, MarcXmlReader, ParsedBatch};

pub const AUTHOR_TAGS: [&str; 6] = ["100", "110", "111", "700", "710", "711"];
pub const PRIMARY_SUBJECT_TAG: &str = "650";
pub const EXTRA_SUBJECT_TAGS: [&str; 3] = ["600", "610", "651"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subfield {
    pub code: char,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataField {
    pub tag: String,
    pub ind1: char,
    pub ind2: char,
    pub subfields: Vec<Subfield>,
}

impl DataField {
    pub fn subfield(&self, code: char) -> Option<&str> {
        self.subfields.iter().find(|s| s.code == code).map(|s| s.value.as_str())
    }
}

/// A record as it appears in MARCXML, before any interpretation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarcRecord {
    pub leader: Option<String>,
    pub control_fields: Vec<(String, String)>,
    pub data_fields: Vec<DataField>,
}

impl MarcRecord {
    pub fn control(&self, tag: &str) -> Option<&str> {
        self.control_fields
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, v)| v.as_str())
    }

    pub fn fields<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a DataField> + 'a {
        self.data_fields.iter().filter(move |f| f.tag == tag)
    }
}

/// Date entered on file, from 008/00-05 (`YYMMDD`). Years 70-99 map to
/// the 1900s, 00-69 to the 2000s.
pub fn entry_year(record: &MarcRecord) -> Option<i32> {
    record.control("008").and_then(decode_entry_date)
}

pub fn decode_entry_date(field_008: &str) -> Option<i32> {
    let head = field_008.get(0..6)?;
    if !head.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let yy: i32 = head[0..2].parse().ok()?;
    let mm: u32 = head[2..4].parse().ok()?;
    let dd: u32 = head[4..6].parse().ok()?;
    if !(1..=12).contains(&mm) || !(1..=31).contains(&dd) {
        return None;
    }
    Some(if yy >= 70 { 1900 + yy } else { 2000 + yy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubdivisionKind {
    Topical,
    Chronological,
    Geographical,
    Form,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subdivision {
    pub kind: SubdivisionKind,
    pub text: String,
}

/// How a heading was broken into subdivisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPath {
    /// Separate `$x/$y/$z/$v` subfields.
    Subfields,
    /// A `--` delimiter inside the text.
    Delimiter,
    /// Nothing to split.
    Single,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubjectHeading {
    /// Subdivision texts joined with `--`.
    pub descriptor: String,
    pub subdivisions: Vec<Subdivision>,
    pub path: SplitPath,
}

impl SubjectHeading {
    fn from_parts(subdivisions: Vec<Subdivision>, path: SplitPath) -> Option<Self> {
        if subdivisions.is_empty() {
            return None;
        }
        let descriptor = subdivisions.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join("--");
        Some(SubjectHeading { descriptor, subdivisions, path })
    }
}

/// Splits a descriptor string on `--`. Parts are trimmed and empty parts
/// dropped; all subdivisions get kind `Other`.
pub fn split_heading(descriptor: &str) -> SubjectHeading {
    split_text(descriptor, SubdivisionKind::Other).unwrap_or(SubjectHeading {
        descriptor: String::new(),
        subdivisions: Vec::new(),
        path: SplitPath::Single,
    })
}

fn split_text(text: &str, first_kind: SubdivisionKind) -> Option<SubjectHeading> {
    let parts: Vec<&str> = text.split("--").map(str::trim).filter(|p| !p.is_empty()).collect();
    let path = if parts.len() > 1 { SplitPath::Delimiter } else { SplitPath::Single };
    let subdivisions = parts
        .iter()
        .enumerate()
        .map(|(i, p)| Subdivision {
            kind: if i == 0 { first_kind } else { SubdivisionKind::Other },
            text: (*p).to_owned(),
        })
        .collect();
    SubjectHeading::from_parts(subdivisions, path)
}

fn subdivision_kind(code: char) -> Option<SubdivisionKind> {
    match code {
        'x' => Some(SubdivisionKind::Topical),
        'y' => Some(SubdivisionKind::Chronological),
        'z' => Some(SubdivisionKind::Geographical),
        'v' => Some(SubdivisionKind::Form),
        _ => None,
    }
}

/// Builds a heading from a 6XX field. Main-term subfields (anything that
/// is not a subdivision or a numeric control subfield) form the first
/// subdivision; each `$x/$y/$z/$v` adds one more. A lone main term that
/// itself contains `--` falls back to string splitting.
pub fn heading_from_field(field: &DataField) -> Option<SubjectHeading> {
    let main_kind = match field.tag.as_str() {
        "650" => SubdivisionKind::Topical,
        "651" => SubdivisionKind::Geographical,
        _ => SubdivisionKind::Other,
    };
    let mut main = Vec::new();
    let mut subdivisions = Vec::new();
    for sf in &field.subfields {
        if sf.code.is_ascii_digit() {
            continue;
        }
        let text = clean_value(&sf.value);
        if text.is_empty() {
            continue;
        }
        match subdivision_kind(sf.code) {
            Some(kind) => subdivisions.push(Subdivision { kind, text }),
            None if subdivisions.is_empty() => main.push(text),
            // Stray main-term subfield after a subdivision.
            None => subdivisions.push(Subdivision { kind: SubdivisionKind::Other, text }),
        }
    }
    if !main.is_empty() {
        subdivisions.insert(0, Subdivision { kind: main_kind, text: main.join(" ") });
    }
    match subdivisions.len() {
        0 => None,
        1 if subdivisions[0].text.contains("--") => split_text(&subdivisions[0].text, subdivisions[0].kind),
        1 => SubjectHeading::from_parts(subdivisions, SplitPath::Single),
        _ => SubjectHeading::from_parts(subdivisions, SplitPath::Subfields),
    }
}

/// Trims whitespace and ISBD-style trailing punctuation, collapses internal whitespace.
pub fn clean_value(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| matches!(c, '.' | ',' | ';' | ':' | '/') || c.is_whitespace())
        .to_owned()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ViewOptions {
    /// Also read subjects from 600/610/651, not only 650.
    pub all_subject_fields: bool,
}

/// The parts of a record the facet series need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarcView {
    pub id: String,
    pub entry_year: Option<i32>,
    pub authors: Vec<String>,
    pub headings: Vec<SubjectHeading>,
}

impl MarcView {
    /// `fallback_id` is used when the record has no 001.
    pub fn from_record(record: &MarcRecord, fallback_id: &str, opts: ViewOptions) -> Self {
        let id = record
            .control("001")
            .map(|s| s.trim().to_owned())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| fallback_id.to_owned());
        let authors = record
            .data_fields
            .iter()
            .filter(|f| AUTHOR_TAGS.contains(&f.tag.as_str()))
            .filter_map(|f| f.subfield('a'))
            .map(clean_value)
            .filter(|a| !a.is_empty())
            .collect();
        let headings = record
            .data_fields
            .iter()
            .filter(|f| {
                f.tag == PRIMARY_SUBJECT_TAG
                    || (opts.all_subject_fields && EXTRA_SUBJECT_TAGS.contains(&f.tag.as_str()))
            })
            .filter_map(heading_from_field)
            .collect();
        MarcView { id, entry_year: entry_year(record), authors, headings }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(tag: &str, subs: &[(char, &str)]) -> DataField {
        DataField {
            tag: tag.into(),
            ind1: ' ',
            ind2: '0',
            subfields: subs.iter().map(|&(code, v)| Subfield { code, value: v.into() }).collect(),
        }
    }

    #[test]
    fn entry_dates() {
        assert_eq!(decode_entry_date("850315s1985    sp            000 0 spa d"), Some(1985));
        assert_eq!(decode_entry_date("200101"), Some(2020));
        assert_eq!(decode_entry_date("700101"), Some(1970));
        assert_eq!(decode_entry_date("691231"), Some(2069));
        assert_eq!(decode_entry_date("xx0101"), None);
        assert_eq!(decode_entry_date("851315"), None);
        assert_eq!(decode_entry_date("8503"), None);
    }

    #[test]
    fn string_split() {
        let h = split_heading("Commerce--History");
        let texts: Vec<_> = h.subdivisions.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["Commerce", "History"]);
        assert_eq!(h.path, SplitPath::Delimiter);

        let h = split_heading("Theater");
        assert_eq!(h.subdivisions.len(), 1);
        assert_eq!(h.path, SplitPath::Single);

        let h = split_heading(" Spain -- History --  ");
        assert_eq!(h.descriptor, "Spain--History");
    }

    #[test]
    fn subfield_split() {
        let h = heading_from_field(&field("650", &[('a', "Spain"), ('y', "16th century.")])).unwrap();
        assert_eq!(h.path, SplitPath::Subfields);
        assert_eq!(h.descriptor, "Spain--16th century");
        assert_eq!(h.subdivisions[0].kind, SubdivisionKind::Topical);
        assert_eq!(h.subdivisions[1].kind, SubdivisionKind::Chronological);

        let h = heading_from_field(&field(
            "651",
            &[('a', "Spain"), ('x', "History"), ('z', "Madrid"), ('v', "Maps"), ('2', "lcsh")],
        ))
        .unwrap();
        let kinds: Vec<_> = h.subdivisions.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            [
                SubdivisionKind::Geographical,
                SubdivisionKind::Topical,
                SubdivisionKind::Geographical,
                SubdivisionKind::Form
            ]
        );

        let h = heading_from_field(&field("650", &[('a', "Commerce--History")])).unwrap();
        assert_eq!(h.path, SplitPath::Delimiter);
        assert_eq!(h.subdivisions.len(), 2);

        assert!(heading_from_field(&field("650", &[('2', "lcsh")])).is_none());
    }

    #[test]
    fn view_mapping() {
        let rec = MarcRecord {
            leader: None,
            control_fields: vec![("001".into(), "b1".into()), ("008".into(), "850315s".into())],
            data_fields: vec![
                field("100", &[('a', "Cervantes Saavedra, Miguel de,"), ('d', "1547-1616")]),
                field("700", &[('a', "  Pardo   Bazán, Emilia ")]),
                field("245", &[('a', "Title")]),
                field("650", &[('a', "Theater")]),
                field("651", &[('a', "Spain")]),
            ],
        };
        let v = MarcView::from_record(&rec, "#0", ViewOptions::default());
        assert_eq!(v.id, "b1");
        assert_eq!(v.entry_year, Some(1985));
        assert_eq!(v.authors, ["Cervantes Saavedra, Miguel de", "Pardo Bazán, Emilia"]);
        assert_eq!(v.headings.len(), 1);
        let all = MarcView::from_record(&rec, "#0", ViewOptions { all_subject_fields: true });
        assert_eq!(all.headings.len(), 2);

        let bare = MarcView::from_record(&MarcRecord::default(), "#7", ViewOptions::default());
        assert_eq!(bare.id, "#7");
        assert!(bare.authors.is_empty() && bare.entry_year.is_none());
    }
}
