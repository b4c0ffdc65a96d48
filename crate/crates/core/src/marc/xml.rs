//! Streaming MARCXML reader.
//!
//! XML that is not well formed aborts the stream with an input error. A
//! well-formed `<record>` whose MARC structure is broken (a field without a
//! valid tag, a subfield without a code) is skipped and counted.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::bufread::MultiGzDecoder;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::error::{Error, Result};
use crate::par::Execution;

use super::{DataField, MarcRecord, MarcView, Subfield, ViewOptions};

/// Element subtree of one record.
#[derive(Debug, Default)]
struct Node {
    name: String,
    attrs: Vec<(String, String)>,
    text: String,
    children: Vec<Node>,
}

impl Node {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub struct MarcXmlReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    source: String,
}

impl<R: BufRead> MarcXmlReader<R> {
    pub fn new(inner: R, source: impl Into<String>) -> Self {
        let mut reader = Reader::from_reader(inner);
        reader.config_mut().trim_text(true);
        MarcXmlReader { reader, buf: Vec::new(), source: source.into() }
    }

    fn xml_error(&self, e: impl std::fmt::Display) -> Error {
        Error::Input(format!(
            "{}: malformed XML near byte {}: {e}",
            self.source,
            self.reader.buffer_position()
        ))
    }

    fn next_event(&mut self) -> Result<Event<'static>> {
        self.buf.clear();
        let event = self.reader.read_event_into(&mut self.buf).map(Event::into_owned);
        event.map_err(|e| self.xml_error(e))
    }

    /// The next `<record>`: `Ok(Some(Ok(record)))`, or `Ok(Some(Err(reason)))`
    /// for a record with broken MARC structure. `Ok(None)` at end of input.
    pub fn next_record(&mut self) -> Result<Option<std::result::Result<MarcRecord, String>>> {
        loop {
            match self.next_event()? {
                Event::Start(e) if e.local_name().as_ref() == b"record" => {
                    let start = self.node_from(&e)?;
                    let node = self.read_children(start)?;
                    return Ok(Some(interpret(&node)));
                }
                Event::Empty(e) if e.local_name().as_ref() == b"record" => {
                    return Ok(Some(Ok(MarcRecord::default())));
                }
                Event::Eof => return Ok(None),
                _ => {}
            }
        }
    }

    fn node_from(&self, e: &BytesStart<'_>) -> Result<Node> {
        let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
        let mut attrs = Vec::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| self.xml_error(err))?;
            let key = String::from_utf8_lossy(attr.key.local_name().as_ref()).into_owned();
            let value = attr.unescape_value().map_err(|err| self.xml_error(err))?.into_owned();
            attrs.push((key, value));
        }
        Ok(Node { name, attrs, ..Node::default() })
    }

    fn read_children(&mut self, mut node: Node) -> Result<Node> {
        loop {
            match self.next_event()? {
                Event::Start(e) => {
                    let child = self.node_from(&e)?;
                    let child = self.read_children(child)?;
                    node.children.push(child);
                }
                Event::Empty(e) => {
                    let child = self.node_from(&e)?;
                    node.children.push(child);
                }
                Event::Text(t) => {
                    let text = t.unescape().map_err(|e| self.xml_error(e))?;
                    node.text.push_str(&text);
                }
                Event::CData(t) => node.text.push_str(&String::from_utf8_lossy(&t)),
                Event::End(_) => return Ok(node),
                Event::Eof => {
                    return Err(self.xml_error(format!("unexpected end of input inside <{}>", node.name)))
                }
                _ => {}
            }
        }
    }
}

fn valid_tag(tag: &str) -> bool {
    tag.len() == 3 && tag.bytes().all(|b| b.is_ascii_alphanumeric())
}

fn indicator(node: &Node, key: &str) -> std::result::Result<char, String> {
    match node.attr(key) {
        None => Ok(' '),
        Some(v) => {
            let mut chars = v.chars();
            match (chars.next(), chars.next()) {
                (None, _) => Ok(' '),
                (Some(c), None) => Ok(c),
                _ => Err(format!("indicator {key}={v:?} is longer than one character")),
            }
        }
    }
}

fn interpret(node: &Node) -> std::result::Result<MarcRecord, String> {
    let mut record = MarcRecord::default();
    for child in &node.children {
        match child.name.as_str() {
            "leader" => record.leader = Some(child.text.clone()),
            "controlfield" => {
                let tag = child.attr("tag").unwrap_or_default();
                if !valid_tag(tag) {
                    return Err(format!("controlfield with invalid tag {tag:?}"));
                }
                record.control_fields.push((tag.to_owned(), child.text.clone()));
            }
            "datafield" => {
                let tag = child.attr("tag").unwrap_or_default();
                if !valid_tag(tag) {
                    return Err(format!("datafield with invalid tag {tag:?}"));
                }
                let mut field = DataField {
                    tag: tag.to_owned(),
                    ind1: indicator(child, "ind1")?,
                    ind2: indicator(child, "ind2")?,
                    subfields: Vec::new(),
                };
                for sf in child.children.iter().filter(|c| c.name == "subfield") {
                    let code = sf.attr("code").unwrap_or_default();
                    let mut chars = code.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => field.subfields.push(Subfield { code: c, value: sf.text.clone() }),
                        _ => return Err(format!("subfield of {tag} with invalid code {code:?}")),
                    }
                }
                record.data_fields.push(field);
            }
            _ => {}
        }
    }
    Ok(record)
}

/// Views and counters from one or more MARCXML sources.
#[derive(Debug, Clone, Default)]
pub struct ParsedBatch {
    pub views: Vec<MarcView>,
    /// Records seen, including skipped ones.
    pub records: usize,
    pub skipped: usize,
    pub warnings: Vec<String>,
}

impl ParsedBatch {
    pub fn merge(&mut self, other: ParsedBatch) {
        self.views.extend(other.views);
        self.records += other.records;
        self.skipped += other.skipped;
        self.warnings.extend(other.warnings);
    }
}

pub fn read_marcxml<R: BufRead>(input: R, source: &str, opts: ViewOptions) -> Result<ParsedBatch> {
    let mut reader = MarcXmlReader::new(input, source);
    let mut batch = ParsedBatch::default();
    while let Some(outcome) = reader.next_record()? {
        let ordinal = batch.records;
        batch.records += 1;
        match outcome {
            Ok(record) => {
                let fallback = format!("{source}#{ordinal}");
                batch.views.push(MarcView::from_record(&record, &fallback, opts));
            }
            Err(reason) => {
                batch.skipped += 1;
                batch.warnings.push(format!("{source}: record {ordinal} skipped: {reason}"));
            }
        }
    }
    Ok(batch)
}

/// Reads a MARCXML file, gunzipping it first if it starts with the gzip magic bytes.
pub fn read_marcxml_file(path: &Path, opts: ViewOptions) -> Result<ParsedBatch> {
    let source = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::Input(format!("{source}: {e}")))?;
    let mut reader = BufReader::new(file);
    let gzipped = reader
        .fill_buf()
        .map_err(|e| Error::Input(format!("{source}: {e}")))?
        .starts_with(&[0x1f, 0x8b]);
    if gzipped {
        read_marcxml(BufReader::new(MultiGzDecoder::new(reader)), &source, opts)
    } else {
        read_marcxml(reader, &source, opts)
    }
}

/// Parses several files, one task per file, and merges them in input order.
pub fn read_marcxml_files<P: AsRef<Path> + Sync>(
    paths: &[P],
    opts: ViewOptions,
    exec: Execution,
) -> Result<ParsedBatch> {
    let mut merged = ParsedBatch::default();
    for batch in exec.map(paths, |p| read_marcxml_file(p.as_ref(), opts)) {
        merged.merge(batch?);
    }
    Ok(merged)
}
