#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::thread;

use dldiv::accumulation::AccumulationCurve;
use dldiv::fit::{eval_model, ModelKind};
use dldiv::lod::fixture::FixtureGraph;
use dldiv::lod::{EndpointConfig, SparqlTransport, Term};
use dldiv::synth::ZipfCorpus;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn dldiv(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_dldiv"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
pub fn assert_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

/// Three Zipf documents of different lengths, written into `dir`.
pub fn write_corpus(dir: &Path) -> Vec<&'static str> {
    let docs = [("short.txt", 800, 1), ("medium.txt", 6_000, 2), ("long.txt", 14_000, 3)];
    let zipf = ZipfCorpus::new(3000, 1.0);
    for (name, len, seed) in docs {
        std::fs::write(dir.join(name), zipf.sample_text(len, seed)).unwrap();
    }
    docs.iter().map(|d| d.0).collect()
}

/// A noiseless M2 curve with D = 50, c = 1000.
pub fn write_m2_curve(path: &Path) {
    let pairs: Vec<(u64, f64)> = (1..=200u64)
        .map(|i| {
            let n = i * 100;
            (n, eval_model(ModelKind::M2, &[50.0, 1000.0], n as f64).unwrap())
        })
        .collect();
    let curve = AccumulationCurve::from_pairs(dldiv::Statistic::Diversity, &pairs).unwrap();
    curve.write_csv(std::fs::File::create(path).unwrap()).unwrap();
}

pub fn library_graph() -> FixtureGraph {
    let mut g = FixtureGraph::new();
    for (class, n) in [("Work", 8), ("Person", 4), ("Place", 4)] {
        for i in 0..n {
            let s = format!("http://lib.example/{class}/{i}");
            g.add_type(&s, &format!("http://schema.example/{class}"));
            g.add(&s, "http://schema.example/name", Term::literal(format!("{class} {i}")));
            if i % 2 == 0 {
                g.add_same_as(&s, &format!("http://viaf.org/viaf/{class}{i}"));
            }
        }
    }
    g.add_same_as("http://lib.example/Person/1", "https://d-nb.info/gnd/1");
    g
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => out.push(b' '),
            b'%' if i + 2 < bytes.len() => {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap();
                out.push(u8::from_str_radix(hex, 16).unwrap());
                i += 2;
            }
            b => out.push(b),
        }
        i += 1;
    }
    String::from_utf8(out).unwrap()
}

/// Serves `graph` as a SPARQL endpoint on localhost for `requests` requests.
pub fn serve_graph(mut graph: FixtureGraph, requests: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/sparql", listener.local_addr().unwrap());
    let cfg = EndpointConfig::new("srv", url.clone());
    thread::spawn(move || {
        for _ in 0..requests {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream);
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap() == 0 || h.trim().is_empty() {
                    break;
                }
            }
            let target = line.split(' ').nth(1).unwrap_or("");
            let query = target
                .split_once('?')
                .and_then(|(_, qs)| qs.split('&').find_map(|kv| kv.strip_prefix("query=")))
                .map(percent_decode)
                .unwrap_or_default();
            let (status, body) = match graph.query(&cfg, &query) {
                Ok(r) => (200, serde_json::to_string(&r).unwrap()),
                Err(e) => (400, e.to_string()),
            };
            let mut stream = reader.into_inner();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/sparql-results+json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    url
}
