//! Edge-stream files and detection artifacts.
//!
//! Edge input is one record per line, either delimiter-separated
//! `src,dst,timestamp` (an optional header line is skipped) or a JSON object
//! `{"src":..,"dst":..,"timestamp":..}`. Timestamps are epoch seconds or
//! ISO-8601. Malformed lines are skipped and counted.
//!
//! A detection run writes, into one directory:
//!
//! | file                      | record                                         |
//! |---------------------------|------------------------------------------------|
//! | `snapshots.jsonl`         | `{at, component_id, nodes[], node_count}`      |
//! | `snapshot_index.csv`      | `at,component_count,stored_elements`           |
//! | `global_components.jsonl` | `{component_id, nodes[], node_count, edge_count}` |
//! | `nodes.jsonl`             | `{node, first_seen, occurrences}`              |
//! | `size_series.csv`         | `time,lineage,component_id,size`               |
//! | `stats.json`              | counters                                       |

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CommunitySnapshot, Component, Edge, NodeRecord, StreamOutput, StreamStats};
use crate::error::{Error, Result};
use crate::timefmt::parse_timestamp;

pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const SNAPSHOT_INDEX_FILE: &str = "snapshot_index.csv";
pub const GLOBAL_FILE: &str = "global_components.jsonl";
pub const NODES_FILE: &str = "nodes.jsonl";
pub const SERIES_FILE: &str = "size_series.csv";
pub const STATS_FILE: &str = "stats.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Malformed {
    pub line: usize,
    pub reason: String,
}

/// Streams edges from a reader; only I/O failures are errors.
pub struct EdgeReader<R> {
    lines: std::io::Lines<R>,
    source: PathBuf,
    delimiter: char,
    line_no: usize,
    malformed: Vec<Malformed>,
    malformed_count: usize,
}

impl EdgeReader<BufReader<File>> {
    pub fn open(path: &Path, delimiter: char) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(BufReader::new(f), path, delimiter))
    }
}

impl<R: BufRead> EdgeReader<R> {
    const KEEP_MALFORMED: usize = 20;

    pub fn new(reader: R, source: &Path, delimiter: char) -> Self {
        EdgeReader {
            lines: reader.lines(),
            source: source.to_path_buf(),
            delimiter,
            line_no: 0,
            malformed: Vec::new(),
            malformed_count: 0,
        }
    }

    pub fn malformed_count(&self) -> usize {
        self.malformed_count
    }

    /// The first few malformed lines, for diagnostics.
    pub fn malformed(&self) -> &[Malformed] {
        &self.malformed
    }

    fn reject(&mut self, reason: String) {
        self.malformed_count += 1;
        if self.malformed.len() < Self::KEEP_MALFORMED {
            self.malformed.push(Malformed {
                line: self.line_no,
                reason,
            });
        }
    }

    fn parse(&self, line: &str) -> std::result::Result<Option<Edge>, String> {
        if line.starts_with('{') {
            #[derive(Deserialize)]
            struct Rec {
                src: String,
                dst: String,
                timestamp: serde_json::Value,
            }
            let r: Rec = serde_json::from_str(line).map_err(|e| e.to_string())?;
            let ts = match &r.timestamp {
                serde_json::Value::Number(n) => n.as_f64().map(|v| v.floor() as i64),
                serde_json::Value::String(s) => parse_timestamp(s),
                _ => None,
            }
            .ok_or_else(|| format!("bad timestamp {}", r.timestamp))?;
            return Ok(Some(Edge::new(r.src, r.dst, ts)));
        }
        let fields: Vec<&str> = line.split(self.delimiter).map(str::trim).collect();
        if fields.len() != 3 {
            return Err(format!("expected 3 fields, found {}", fields.len()));
        }
        match parse_timestamp(fields[2]) {
            Some(ts) => Ok(Some(Edge::new(fields[0], fields[1], ts))),
            None if self.line_no == 1 && fields[2].eq_ignore_ascii_case("timestamp") => Ok(None),
            None => Err(format!("bad timestamp `{}`", fields[2])),
        }
    }
}

impl<R: BufRead> Iterator for EdgeReader<R> {
    type Item = Result<Edge>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.source, e))),
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            match self.parse(trimmed) {
                Ok(Some(e)) => return Some(Ok(e)),
                Ok(None) => continue,
                Err(reason) => self.reject(reason),
            }
        }
    }
}

pub fn write_edges<'a, I>(path: &Path, edges: I) -> Result<()>
where
    I: IntoIterator<Item = &'a Edge>,
{
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "src,dst,timestamp").map_err(io)?;
    for e in edges {
        writeln!(w, "{},{},{}", e.src, e.dst, e.timestamp).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub at: i64,
    pub component_id: String,
    pub nodes: Vec<String>,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalComponentRecord {
    pub component_id: String,
    pub nodes: Vec<String>,
    pub node_count: usize,
    pub edge_count: usize,
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        serde_json::to_writer(&mut w, &r).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes all artifacts of a finished stream into `dir` (created if needed).
pub fn write_output(dir: &Path, out: &StreamOutput) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(
        &dir.join(SNAPSHOTS_FILE),
        out.snapshots.iter().flat_map(|s| {
            s.components.iter().map(move |c| SnapshotRecord {
                at: s.at,
                component_id: c.id.clone(),
                nodes: c.nodes.clone(),
                node_count: c.size(),
            })
        }),
    )?;
    let mut index = String::from("at,component_count,stored_elements\n");
    for s in &out.snapshots {
        index.push_str(&format!("{},{},{}\n", s.at, s.components.len(), s.stored_elements()));
    }
    write_text(&dir.join(SNAPSHOT_INDEX_FILE), &index)?;
    write_jsonl(
        &dir.join(GLOBAL_FILE),
        out.global_components.iter().map(|c| GlobalComponentRecord {
            component_id: c.id.clone(),
            nodes: c.nodes.clone(),
            node_count: c.size(),
            edge_count: c.edge_count,
        }),
    )?;
    write_jsonl(&dir.join(NODES_FILE), &out.nodes)?;
    let mut series = String::from("time,lineage,component_id,size\n");
    for p in &out.series {
        series.push_str(&format!("{},{},{},{}\n", p.at, p.lineage, p.component_id, p.size));
    }
    write_text(&dir.join(SERIES_FILE), &series)?;
    let stats = serde_json::to_string_pretty(&out.stats).expect("stats serialize");
    write_text(&dir.join(STATS_FILE), &(stats + "\n"))
}

/// What a detection directory holds, read back without any edge data.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRun {
    pub nodes: Vec<NodeRecord>,
    pub snapshots: Vec<CommunitySnapshot>,
    pub global_components: Vec<Component>,
    pub stats: Option<StreamStats>,
}

pub fn read_output(dir: &Path) -> Result<StoredRun> {
    let nodes: Vec<NodeRecord> = read_jsonl(&dir.join(NODES_FILE))?;
    let records: Vec<SnapshotRecord> = read_jsonl(&dir.join(SNAPSHOTS_FILE))?;

    // The index keeps snapshots that had no large component.
    let index_path = dir.join(SNAPSHOT_INDEX_FILE);
    let mut snapshots: Vec<CommunitySnapshot> = match std::fs::read_to_string(&index_path) {
        Ok(text) => text
            .lines()
            .skip(1)
            .filter_map(|l| l.split(',').next()?.parse().ok())
            .map(|at| CommunitySnapshot {
                at,
                components: Vec::new(),
            })
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(Error::io(index_path, e)),
    };
    for r in records {
        let comp = Component {
            id: r.component_id,
            nodes: r.nodes,
            edge_count: 0,
        };
        match snapshots.iter_mut().find(|s| s.at == r.at) {
            Some(s) => s.components.push(comp),
            None => snapshots.push(CommunitySnapshot {
                at: r.at,
                components: vec![comp],
            }),
        }
    }
    let global: Vec<GlobalComponentRecord> = read_jsonl(&dir.join(GLOBAL_FILE))?;
    let stats = match std::fs::read_to_string(dir.join(STATS_FILE)) {
        Ok(t) => serde_json::from_str(&t).ok(),
        Err(_) => None,
    };
    Ok(StoredRun {
        nodes,
        snapshots,
        global_components: global
            .into_iter()
            .map(|g| Component {
                id: g.component_id,
                nodes: g.nodes,
                edge_count: g.edge_count,
            })
            .collect(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> (Vec<Edge>, usize) {
        let mut r = EdgeReader::new(text.as_bytes(), Path::new("mem"), ',');
        let edges: Vec<Edge> = r.by_ref().collect::<Result<_>>().unwrap();
        (edges, r.malformed_count())
    }

    #[test]
    fn delimited_with_header() {
        let (e, bad) = read("src,dst,timestamp\na,b,10\nb,c,1970-01-01T00:00:20Z\n\n");
        assert_eq!(bad, 0);
        assert_eq!(e, vec![Edge::new("a", "b", 10), Edge::new("b", "c", 20)]);
    }

    #[test]
    fn json_lines_and_malformed() {
        let (e, bad) = read("{\"src\":\"@y\",\"dst\":\"#x\",\"timestamp\":5}\nnot,an\n{\"src\":\"a\"}\na,b,c\n");
        assert_eq!(e, vec![Edge::new("@y", "#x", 5)]);
        assert_eq!(bad, 3);
    }

    #[test]
    fn empty_input() {
        let (e, bad) = read("");
        assert!(e.is_empty());
        assert_eq!(bad, 0);
    }

    #[test]
    fn artifacts_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let edges = vec![
            Edge::new("a", "b", 0),
            Edge::new("b", "c", 1),
            Edge::new("x", "y", 2000),
        ];
        let cfg = super::super::DcConfig {
            k: 10,
            c: 1,
            window_length: 1000,
            ..Default::default()
        };
        let out = super::super::detect(edges, cfg, crate::rng::RngSeed(1)).unwrap();
        write_output(dir.path(), &out).unwrap();
        let back = read_output(dir.path()).unwrap();
        assert_eq!(back.nodes, out.nodes);
        assert_eq!(back.snapshots.len(), out.snapshots.len());
        assert_eq!(back.snapshots[0].components[0].nodes, vec!["a", "b", "c"]);
        assert!(back.snapshots[1].components.is_empty());
        assert_eq!(back.global_components, out.global_components);
    }
}
