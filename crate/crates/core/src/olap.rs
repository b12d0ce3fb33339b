//! Approximate OLAP density queries over a stream of measured tuples.
//!
//! The answer to a SUM query on dimension `C` is the density vector
//! `Q_{C=c} = Σ_{t.C=c} t.M / Σ_t t.M`. The estimate feeds the stream through a
//! weighted reservoir and reads the retained samples with unit measure, so the
//! estimated density of `c` is simply its share of the reservoir.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{Reservoir, WeightedItem};
use crate::rng::RngSeed;

/// Label used for the catch-all bucket when unknown values are collected.
pub const OTHER: &str = "OTHER";

/// Separator between component values of a composite dimension.
pub const COMPOSITE_SEP: char = '|';

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    pub dims: BTreeMap<String, String>,
    pub measure: f64,
}

impl Tuple {
    pub fn new<K, V>(dims: impl IntoIterator<Item = (K, V)>, measure: f64) -> Self
    where
        K: Into<String>,
        V: Into<String>,
    {
        Tuple {
            dims: dims.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            measure,
        }
    }
}

/// A (possibly composite) dimension and its finite, ordered value set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    /// Source columns; more than one for a composite dimension.
    pub columns: Vec<String>,
    pub values: Vec<String>,
}

impl DimensionSpec {
    pub fn new<S: Into<String>>(column: &str, values: impl IntoIterator<Item = S>) -> Result<Self> {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        let spec = DimensionSpec {
            name: column.to_string(),
            columns: vec![column.to_string()],
            values,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Product dimension `C1 × … × Cp`; its values are the `|`-joined tuples.
    pub fn composite(parts: &[DimensionSpec]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("dimensions", "at least one dimension required"));
        }
        let mut values = vec![String::new()];
        for (i, part) in parts.iter().enumerate() {
            values = values
                .iter()
                .flat_map(|prefix| {
                    part.values.iter().map(move |v| {
                        if i == 0 {
                            v.clone()
                        } else {
                            format!("{prefix}{COMPOSITE_SEP}{v}")
                        }
                    })
                })
                .collect();
        }
        let spec = DimensionSpec {
            name: parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("×"),
            columns: parts.iter().flat_map(|p| p.columns.iter().cloned()).collect(),
            values,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::domain("values", format!("dimension `{}` has no values", self.name)));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &self.values {
            if !seen.insert(v) {
                return Err(Error::domain("values", format!("duplicate value `{v}` in `{}`", self.name)));
            }
        }
        Ok(())
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn position(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }

    /// The tuple's value on this dimension (joined for composites).
    pub fn key_of(&self, t: &Tuple) -> Result<String> {
        let mut parts = Vec::with_capacity(self.columns.len());
        for c in &self.columns {
            let v = t
                .dims
                .get(c)
                .ok_or_else(|| Error::Schema(format!("tuple has no column `{c}`")))?;
            parts.push(v.as_str());
        }
        Ok(parts.join(&COMPOSITE_SEP.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownValues {
    /// A value outside the dimension is a schema error.
    #[default]
    Reject,
    /// Unknown values are counted under [`OTHER`].
    Other,
}

/// A density query: dimension, equality selection applied before sampling, and
/// handling of values outside the dimension.
#[derive(Debug, Clone)]
pub struct DensityQuery {
    dimension: DimensionSpec,
    selection: Vec<(String, String)>,
    unknown: UnknownValues,
    index: HashMap<String, usize>,
}

impl DensityQuery {
    pub fn new(dimension: DimensionSpec) -> Self {
        let index = dimension
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        DensityQuery {
            dimension,
            selection: Vec::new(),
            unknown: UnknownValues::Reject,
            index,
        }
    }

    pub fn with_selection(mut self, column: impl Into<String>, value: impl Into<String>) -> Self {
        self.selection.push((column.into(), value.into()));
        self
    }

    pub fn with_unknown(mut self, unknown: UnknownValues) -> Self {
        if unknown == UnknownValues::Other && self.dimension.position(OTHER).is_none() {
            self.index.insert(OTHER.to_string(), self.dimension.values.len());
            self.dimension.values.push(OTHER.to_string());
        }
        self.unknown = unknown;
        self
    }

    pub fn dimension(&self) -> &DimensionSpec {
        &self.dimension
    }

    /// Value slot of the tuple, or `None` if the selection filters it out.
    fn classify(&self, t: &Tuple) -> Result<Option<usize>> {
        if !(t.measure > 0.0 && t.measure.is_finite()) {
            return Err(Error::InvalidMeasure(t.measure));
        }
        for (c, v) in &self.selection {
            match t.dims.get(c) {
                Some(x) if x == v => {}
                Some(_) => return Ok(None),
                None => return Err(Error::Schema(format!("tuple has no column `{c}`"))),
            }
        }
        let key = self.dimension.key_of(t)?;
        match self.index.get(&key) {
            Some(&i) => Ok(Some(i)),
            None => match self.unknown {
                UnknownValues::Reject => Err(Error::Schema(format!(
                    "value `{key}` is not in dimension `{}`",
                    self.dimension.name
                ))),
                UnknownValues::Other => Ok(Some(self.index[OTHER])),
            },
        }
    }

    /// Exact densities from a full pass.
    pub fn exact<I>(&self, tuples: I) -> Result<DensityVector>
    where
        I: IntoIterator<Item = Result<Tuple>>,
    {
        let mut sums = vec![0.0f64; self.dimension.cardinality()];
        let mut any = false;
        for t in tuples {
            let t = t?;
            if let Some(i) = self.classify(&t)? {
                sums[i] += t.measure;
                any = true;
            }
        }
        if !any {
            return Err(Error::EmptyInput("no tuples to aggregate"));
        }
        let total: f64 = sums.iter().sum();
        Ok(DensityVector {
            dimension: self.dimension.name.clone(),
            values: self.dimension.values.clone(),
            densities: sums.iter().map(|s| s / total).collect(),
            sample_counts: None,
        })
    }

    /// Weighted-reservoir estimate with capacity `k`.
    pub fn estimate<I>(&self, tuples: I, k: usize, seed: RngSeed) -> Result<DensityVector>
    where
        I: IntoIterator<Item = Result<Tuple>>,
    {
        let mut reservoir = Reservoir::new(k, seed)?;
        for t in tuples {
            let t = t?;
            if let Some(i) = self.classify(&t)? {
                reservoir.offer(WeightedItem::new(i as u32, t.measure)?);
            }
        }
        if reservoir.is_empty() {
            return Err(Error::EmptyInput("no tuples to sample"));
        }
        let mut counts = vec![0u64; self.dimension.cardinality()];
        for &i in reservoir.payloads() {
            counts[i as usize] += 1;
        }
        let retained = reservoir.len() as f64;
        Ok(DensityVector {
            dimension: self.dimension.name.clone(),
            values: self.dimension.values.clone(),
            densities: counts.iter().map(|&c| c as f64 / retained).collect(),
            sample_counts: Some(counts),
        })
    }
}

pub fn exact_density<I>(tuples: I, dim: &DimensionSpec) -> Result<DensityVector>
where
    I: IntoIterator<Item = Tuple>,
{
    DensityQuery::new(dim.clone()).exact(tuples.into_iter().map(Ok))
}

pub fn estimate_density<I>(tuples: I, dim: &DimensionSpec, k: usize, seed: RngSeed) -> Result<DensityVector>
where
    I: IntoIterator<Item = Tuple>,
{
    DensityQuery::new(dim.clone()).estimate(tuples.into_iter().map(Ok), k, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    pub dimension: String,
    pub values: Vec<String>,
    pub densities: Vec<f64>,
    /// Per-value reservoir counts; `None` for exact vectors.
    pub sample_counts: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub value: String,
    pub density: f64,
    pub sample_count: Option<u64>,
}

impl DensityVector {
    pub fn get(&self, value: &str) -> Option<f64> {
        self.values.iter().position(|v| v == value).map(|i| self.densities[i])
    }

    pub fn l1_distance(&self, other: &DensityVector) -> f64 {
        self.densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn records(&self) -> Vec<DensityRecord> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| DensityRecord {
                value: v.clone(),
                density: self.densities[i],
                sample_count: self.sample_counts.as_ref().map(|c| c[i]),
            })
            .collect()
    }
}

/// Sample size for an (ε, δ) L1 guarantee on a dimension of the given cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationBudget {
    pub cardinality: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub required_k: usize,
}

impl ApproximationBudget {
    pub fn new(cardinality: usize, epsilon: f64, delta: f64) -> Result<Self> {
        Ok(ApproximationBudget {
            cardinality,
            epsilon,
            delta,
            required_k: required_sample_size(cardinality, epsilon, delta)?,
        })
    }
}

/// `⌈½·(|C|/ε)²·ln(1/δ)⌉`.
pub fn required_sample_size(cardinality: usize, epsilon: f64, delta: f64) -> Result<usize> {
    if cardinality == 0 {
        return Err(Error::domain("cardinality", "must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let ratio = cardinality as f64 / epsilon;
    let k = (0.5 * ratio * ratio * (1.0 / delta).ln()).ceil();
    Ok((k as usize).max(1))
}

/// Streams tuples from delimiter-separated text with a header row. Every
/// column except `measure_column` becomes a dimension.
pub struct TupleReader<R: Read> {
    inner: csv::StringRecordsIntoIter<R>,
    headers: Vec<String>,
    measure_idx: usize,
    source: PathBuf,
}

impl TupleReader<std::fs::File> {
    pub fn open(path: &Path, measure_column: &str, delimiter: u8) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::new(file, path, measure_column, delimiter)
    }
}

impl<R: Read> TupleReader<R> {
    pub fn new(reader: R, source: &Path, measure_column: &str, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_error(source, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let measure_idx = headers
            .iter()
            .position(|h| h == measure_column)
            .ok_or_else(|| Error::Schema(format!("no measure column `{measure_column}` in header")))?;
        Ok(TupleReader {
            inner: rdr.into_records(),
            headers,
            measure_idx,
            source: source.to_path_buf(),
        })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }
}

fn csv_error(source: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(source, io),
        other => Error::Parse {
            path: source.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

impl<R: Read> Iterator for TupleReader<R> {
    type Item = Result<Tuple>;

    fn next(&mut self) -> Option<Self::Item> {
        let rec = match self.inner.next()? {
            Ok(r) => r,
            Err(e) => return Some(Err(csv_error(&self.source, e))),
        };
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let raw = rec.get(self.measure_idx).unwrap_or("");
        let measure = match raw.parse::<f64>() {
            Ok(m) => m,
            Err(_) => {
                return Some(Err(Error::Parse {
                    path: self.source.clone(),
                    line,
                    message: format!("measure `{raw}` is not a number"),
                }))
            }
        };
        let dims = self
            .headers
            .iter()
            .zip(rec.iter())
            .enumerate()
            .filter(|(i, _)| *i != self.measure_idx)
            .map(|(_, (h, v))| (h.clone(), v.to_string()))
            .collect();
        Some(Ok(Tuple { dims, measure }))
    }
}
