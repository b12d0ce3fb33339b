//! Tweet records to edge streams.
//!
//! A tweet by `@y` tagging `#x` and `@z` yields the edges `(@y, #x)` and
//! `(@y, @z)`. Input is one JSON object per line:
//! `{"sender": "@y", "tags": ["#x", "@z"], "timestamp": 1700000000}`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphstream::io::Malformed;
use crate::graphstream::Edge;
use crate::rng::RngSeed;
use crate::timefmt::parse_timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub sender: String,
    #[serde(default)]
    pub tags: Vec<String>,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Normalized tags whose edges are dropped.
    pub excluded_tags: BTreeSet<String>,
    /// Half-open `[from, to)`; either end may be open.
    pub from: Option<i64>,
    pub to: Option<i64>,
}

impl FilterConfig {
    pub fn excluding<S: AsRef<str>>(tags: impl IntoIterator<Item = S>) -> Self {
        FilterConfig {
            excluded_tags: tags.into_iter().map(|t| normalize_tag(t.as_ref())).collect(),
            ..Default::default()
        }
    }

    pub fn in_range(&self, ts: i64) -> bool {
        self.from.is_none_or(|f| ts >= f) && self.to.is_none_or(|t| ts < t)
    }
}

/// Case-folds and trims; the `#`/`@` marker is kept.
pub fn normalize_tag(tag: &str) -> String {
    tag.trim().to_lowercase()
}

/// One edge per kept tag. Mentions of the sender itself are dropped.
pub fn tweet_to_edges(r: &TweetRecord, f: &FilterConfig) -> Vec<Edge> {
    if !f.in_range(r.timestamp) {
        return Vec::new();
    }
    let sender = normalize_tag(&r.sender);
    r.tags
        .iter()
        .map(|t| normalize_tag(t))
        .filter(|t| !t.is_empty() && *t != sender && !f.excluded_tags.contains(t))
        .map(|t| Edge::new(sender.clone(), t, r.timestamp))
        .collect()
}

#[derive(Deserialize)]
struct RawTweet {
    sender: String,
    #[serde(default)]
    tags: Vec<String>,
    timestamp: serde_json::Value,
}

fn parse_record(line: &str) -> std::result::Result<TweetRecord, String> {
    let raw: RawTweet = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.sender.trim().is_empty() {
        return Err("empty sender".into());
    }
    let timestamp = match &raw.timestamp {
        serde_json::Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f.floor() as i64)),
        serde_json::Value::String(s) => parse_timestamp(s),
        _ => None,
    }
    .ok_or_else(|| format!("bad timestamp {}", raw.timestamp))?;
    Ok(TweetRecord {
        sender: raw.sender,
        tags: raw.tags,
        timestamp,
    })
}

/// Streams the edges of a tweet file one record at a time.
pub struct Replay<R> {
    lines: std::io::Lines<R>,
    source: PathBuf,
    filter: FilterConfig,
    line_no: usize,
    pending: std::vec::IntoIter<Edge>,
    records: usize,
    skipped: Vec<Malformed>,
    skipped_count: usize,
}

impl Replay<BufReader<File>> {
    pub fn open(path: &Path, filter: FilterConfig) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(BufReader::new(f), path, filter))
    }
}

impl<R: BufRead> Replay<R> {
    pub fn new(reader: R, source: &Path, filter: FilterConfig) -> Self {
        Replay {
            lines: reader.lines(),
            source: source.to_path_buf(),
            filter,
            line_no: 0,
            pending: Vec::new().into_iter(),
            records: 0,
            skipped: Vec::new(),
            skipped_count: 0,
        }
    }

    /// Records parsed so far.
    pub fn records(&self) -> usize {
        self.records
    }

    pub fn skipped_count(&self) -> usize {
        self.skipped_count
    }

    /// The first few skipped lines.
    pub fn skipped(&self) -> &[Malformed] {
        &self.skipped
    }
}

impl<R: BufRead> Iterator for Replay<R> {
    type Item = Result<Edge>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(e) = self.pending.next() {
                return Some(Ok(e));
            }
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.source, e))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            match parse_record(&line) {
                Ok(r) => {
                    self.records += 1;
                    self.pending = tweet_to_edges(&r, &self.filter).into_iter();
                }
                Err(reason) => {
                    self.skipped_count += 1;
                    if self.skipped.len() < 20 {
                        self.skipped.push(Malformed {
                            line: self.line_no,
                            reason,
                        });
                    }
                }
            }
        }
    }
}

/// Parameters of a synthetic tweet session: every record carries the
/// selection tag plus `0..=2·extra_mean` further tags, uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTweets {
    pub records: usize,
    pub handles: usize,
    pub hashtags: usize,
    pub selection_tag: String,
    pub max_extra_tags: usize,
    pub start: i64,
    pub span: i64,
}

impl Default for SynthTweets {
    fn default() -> Self {
        SynthTweets {
            records: 10_000,
            handles: 3_000,
            hashtags: 500,
            selection_tag: "#onpc".into(),
            max_extra_tags: 3,
            start: 1_700_000_000,
            span: 4 * 3600,
        }
    }
}

impl SynthTweets {
    /// Record `i` has timestamp `start + ⌊i·span/records⌋`.
    pub fn generate(&self, seed: RngSeed) -> Vec<TweetRecord> {
        let mut rng = seed.rng();
        let handles: Vec<String> = (0..self.handles).map(|i| format!("@u{i}")).collect();
        let pool: Vec<String> = handles
            .iter()
            .cloned()
            .chain((0..self.hashtags).map(|i| format!("#t{i}")))
            .collect();
        (0..self.records)
            .map(|i| {
                let sender = handles.choose(&mut rng).expect("handles nonempty").clone();
                let extra = rng.random_range(0..=self.max_extra_tags);
                let mut tags = vec![self.selection_tag.clone()];
                while tags.len() < extra + 1 {
                    let t = pool.choose(&mut rng).expect("pool nonempty");
                    if *t != sender && !tags.contains(t) {
                        tags.push(t.clone());
                    }
                }
                TweetRecord {
                    sender,
                    tags,
                    timestamp: self.start + (i as i64 * self.span) / self.records.max(1) as i64,
                }
            })
            .collect()
    }
}

pub fn write_tweets(path: &Path, records: &[TweetRecord]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for r in records {
        serde_json::to_writer(&mut w, r).expect("record serializes");
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(sender: &str, tags: &[&str]) -> TweetRecord {
        TweetRecord {
            sender: sender.into(),
            tags: tags.iter().map(|s| s.to_string()).collect(),
            timestamp: 5,
        }
    }

    #[test]
    fn sender_to_each_tag() {
        let e = tweet_to_edges(&tweet("@y", &["#a", "@z"]), &FilterConfig::default());
        assert_eq!(e, vec![Edge::new("@y", "#a", 5), Edge::new("@y", "@z", 5)]);
    }

    #[test]
    fn exclusion_self_and_case() {
        let f = FilterConfig::excluding(["#ONPC"]);
        assert!(tweet_to_edges(&tweet("@y", &["#onpc"]), &f).is_empty());
        assert!(tweet_to_edges(&tweet("@Y", &["@y"]), &f).is_empty());
        let e = tweet_to_edges(&tweet("@y", &["#A", "@a"]), &f);
        assert_eq!(e.iter().map(|e| e.dst.as_str()).collect::<Vec<_>>(), vec!["#a", "@a"]);
    }

    #[test]
    fn time_range_is_half_open() {
        let f = FilterConfig {
            from: Some(5),
            to: Some(6),
            ..Default::default()
        };
        assert!(f.in_range(5) && !f.in_range(6) && !f.in_range(4));
    }

    #[test]
    fn replay_skips_malformed() {
        let text = "{\"sender\":\"@a\",\"tags\":[\"#x\",\"#y\"],\"timestamp\":1}\nnot json\n\n{\"sender\":\"\",\"timestamp\":2}\n";
        let mut r = Replay::new(text.as_bytes(), Path::new("t"), FilterConfig::default());
        let edges: Vec<Edge> = r.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(edges.len(), 2);
        assert_eq!(r.records(), 1);
        assert_eq!(r.skipped_count(), 2);
        assert_eq!(r.skipped()[0].line, 2);
        assert_eq!(r.skipped()[1].line, 4);
    }

    #[test]
    fn replay_empty_and_string_timestamps() {
        let mut r = Replay::new("".as_bytes(), Path::new("t"), FilterConfig::default());
        assert!(r.next().is_none());
        let text = "{\"sender\":\"@a\",\"tags\":[\"#x\"],\"timestamp\":\"1970-01-01T00:01:00Z\"}\n";
        let e: Vec<Edge> = Replay::new(text.as_bytes(), Path::new("t"), FilterConfig::default())
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(e[0].timestamp, 60);
    }

    #[test]
    fn synth_shape() {
        let s = SynthTweets {
            records: 1000,
            ..Default::default()
        };
        let recs = s.generate(RngSeed(1));
        assert_eq!(recs.len(), 1000);
        assert!(recs.iter().all(|r| r.tags[0] == "#onpc" && r.tags.len() <= 4));
        assert!(recs.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        assert_eq!(recs[999].timestamp, s.start + 999 * s.span / 1000);
        assert_eq!(recs, s.generate(RngSeed(1)));
    }
}
