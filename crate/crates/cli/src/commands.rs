use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::json;
use streamint::experiment::{self, BookkeepingParams, Lemma1Params, Theorem1Params, Theorem2Params};
use streamint::genmodels::{self, DegreeDistribution, GeneratedGraph};
use streamint::graphstream::io::{self as gio, EdgeReader};
use streamint::graphstream::{DcConfig, Edge, EdgeStreamState};
use streamint::ingest::{FilterConfig, Replay};
use streamint::integrate::{self, StreamSummary};
use streamint::olap::{self, DensityQuery, DimensionSpec, TupleReader, UnknownValues};
use streamint::reservoir::{LatePolicy, WindowMode};
use streamint::timefmt::parse_timestamp;
use streamint::{Executor, RngSeed};

use crate::config::{duration, ensure_dir, write_json, write_text, CliError, CliResult, ConfigFile};
use crate::{DetectFlags, ExperimentFlags, GenerateFlags, IntegrateFlags, OlapFlags};

pub struct Context {
    pub seed: RngSeed,
    pub out: PathBuf,
    pub file: ConfigFile,
}

impl Context {
    /// Creates the output directory and records the resolved configuration in it.
    fn start<T: Serialize>(&self, command: &str, resolved: &T) -> CliResult<PathBuf> {
        let dir = ensure_dir(&self.out)?;
        write_json(
            &dir.join("config.json"),
            &json!({ "command": command, "seed": self.seed.0, command: resolved }),
        )?;
        Ok(dir)
    }
}

fn opt_duration<'de, D: Deserializer<'de>>(d: D) -> Result<Option<i64>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "duration")] i64);
    Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
}

// ------------------------------------------------------------------ generate

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GenerateConfig {
    model: String,
    n: usize,
    p: f64,
    m: usize,
    delta: Option<Vec<u64>>,
    edges: u64,
    communities: usize,
    bridge_fraction: f64,
    concentrated: bool,
    #[serde(deserialize_with = "opt_duration")]
    span: Option<i64>,
    start: i64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            model: "ddelta2".into(),
            n: 1000,
            p: 0.01,
            m: 2,
            delta: None,
            edges: 10_000,
            communities: 2,
            bridge_fraction: 0.01,
            concentrated: true,
            span: None,
            start: 0,
        }
    }
}

pub fn generate(ctx: &Context, flags: &GenerateFlags) -> CliResult<()> {
    let cfg: GenerateConfig = ctx.file.resolve("generate", flags)?;
    let dir = ctx.start("generate", &cfg)?;
    let mut rng = ctx.seed.substream(0);
    let delta = || -> CliResult<DegreeDistribution> {
        Ok(match &cfg.delta {
            Some(d) => DegreeDistribution::new(d.clone())?,
            None => DegreeDistribution::power_law(cfg.edges)?,
        })
    };
    let mut concentration = None;
    let g: GeneratedGraph = match cfg.model.as_str() {
        "gnp" => genmodels::gen_gnp(cfg.n, cfg.p, &mut rng)?,
        "pa" => genmodels::gen_pa(cfg.n, cfg.m, &mut rng)?,
        "ddelta" => {
            let (g, report) = genmodels::gen_configuration(&delta()?, cfg.concentrated, &mut rng)?;
            concentration = Some(report);
            g
        }
        "ddelta2" => genmodels::gen_communities(&delta()?, cfg.communities, cfg.bridge_fraction, &mut rng)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown model `{other}` (expected gnp, pa, ddelta, ddelta2)"
            )))
        }
    };
    let span = cfg.span.unwrap_or(g.edges.len() as i64);
    let stream = g.to_stream(&mut ctx.seed.substream(1), cfg.start, span);
    gio::write_edges(&dir.join("edges.csv"), &stream)?;
    if !g.planted.is_empty() {
        g.write_planted(&dir.join("planted.jsonl"))?;
    }
    let summary = json!({
        "model": cfg.model,
        "nodes": g.n,
        "edges": g.edges.len(),
        "communities": g.planted.len(),
        "blocks": g.blocks.iter().map(|b| [b.start, b.end]).collect::<Vec<_>>(),
        "concentration": concentration,
    });
    write_json(&dir.join("graph.json"), &summary)?;
    println!(
        "{}: {} nodes, {} edges, {} planted communities -> {}",
        cfg.model,
        g.n,
        g.edges.len(),
        g.planted.len(),
        dir.display()
    );
    Ok(())
}

// ------------------------------------------------------------------ olap

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OlapConfig {
    input: Option<PathBuf>,
    dimension: Option<String>,
    values: Option<Vec<String>>,
    measure: String,
    delimiter: char,
    k: Option<usize>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    cardinality: Option<usize>,
    selection: Vec<String>,
    unknown: UnknownValues,
}

impl Default for OlapConfig {
    fn default() -> Self {
        OlapConfig {
            input: None,
            dimension: None,
            values: None,
            measure: "measure".into(),
            delimiter: ',',
            k: None,
            epsilon: None,
            delta: None,
            cardinality: None,
            selection: Vec::new(),
            unknown: UnknownValues::Reject,
        }
    }
}

fn delimiter_byte(c: char) -> CliResult<u8> {
    u8::try_from(c).map_err(|_| CliError::Config(format!("delimiter `{c}` is not a single byte")))
}

/// Sorted distinct values of each column.
fn scan_values(path: &Path, measure: &str, delimiter: u8, columns: &[&str]) -> CliResult<Vec<Vec<String>>> {
    let mut seen: Vec<BTreeSet<String>> = vec![BTreeSet::new(); columns.len()];
    for t in TupleReader::open(path, measure, delimiter)? {
        let t = t?;
        for (set, c) in seen.iter_mut().zip(columns) {
            match t.dims.get(*c) {
                Some(v) => {
                    set.insert(v.clone());
                }
                None => return Err(CliError::Config(format!("no column `{c}` in {}", path.display()))),
            }
        }
    }
    Ok(seen.into_iter().map(|s| s.into_iter().collect()).collect())
}

pub fn olap(ctx: &Context, flags: &OlapFlags) -> CliResult<()> {
    let mut cfg: OlapConfig = ctx.file.resolve("olap", flags)?;
    let Some(input) = cfg.input.clone() else {
        // Sizing only.
        let (Some(e), Some(d), Some(card)) = (cfg.epsilon, cfg.delta, cfg.cardinality) else {
            return Err(CliError::Config(
                "olap needs --input, or --epsilon, --delta and --cardinality to size k".into(),
            ));
        };
        let k = olap::required_sample_size(card, e, d)?;
        cfg.k = Some(k);
        let dir = ctx.start("olap", &cfg)?;
        write_json(&dir.join("report.json"), &json!({ "cardinality": card, "epsilon": e, "delta": d, "k": k }))?;
        println!("k = {k} for cardinality {card}, epsilon {e}, delta {d}");
        return Ok(());
    };
    let dimension = cfg
        .dimension
        .clone()
        .ok_or_else(|| CliError::Config("olap needs --dimension".into()))?;
    let delim = delimiter_byte(cfg.delimiter)?;
    let columns: Vec<&str> = dimension.split(',').map(str::trim).collect();
    let spec = match (&cfg.values, columns.as_slice()) {
        (Some(values), [col]) => DimensionSpec::new(col, values.clone())?,
        (Some(_), _) => return Err(CliError::Config("--values applies to a single-column dimension".into())),
        (None, _) => {
            let values = scan_values(&input, &cfg.measure, delim, &columns)?;
            let parts = columns
                .iter()
                .zip(values)
                .map(|(c, v)| DimensionSpec::new(c, v))
                .collect::<Result<Vec<_>, _>>()?;
            if parts.len() == 1 {
                parts.into_iter().next().expect("one part")
            } else {
                DimensionSpec::composite(&parts)?
            }
        }
    };
    if cfg.k.is_none() {
        if let (Some(e), Some(d)) = (cfg.epsilon, cfg.delta) {
            cfg.k = Some(olap::required_sample_size(cfg.cardinality.unwrap_or(spec.cardinality()), e, d)?);
        }
    }
    let mut query = DensityQuery::new(spec).with_unknown(cfg.unknown);
    for s in &cfg.selection {
        let (c, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("selection `{s}` is not column=value")))?;
        query = query.with_selection(c.trim(), v.trim());
    }
    let dir = ctx.start("olap", &cfg)?;
    let exact = query.exact(TupleReader::open(&input, &cfg.measure, delim)?)?;
    let estimate = match cfg.k {
        Some(k) => Some(query.estimate(TupleReader::open(&input, &cfg.measure, delim)?, k, ctx.seed)?),
        None => None,
    };
    let mut csv = String::from("value,exact,estimate,sample_count\n");
    for (i, v) in exact.values.iter().enumerate() {
        let (est, count) = match &estimate {
            Some(e) => (
                e.densities[i].to_string(),
                e.sample_counts.as_ref().map_or(String::new(), |c| c[i].to_string()),
            ),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!("{v},{},{est},{count}\n", exact.densities[i]));
    }
    write_text(&dir.join("density.csv"), &csv)?;
    let l1 = estimate.as_ref().map(|e| e.l1_distance(&exact));
    write_json(
        &dir.join("report.json"),
        &json!({
            "dimension": exact.dimension,
            "cardinality": exact.values.len(),
            "k": cfg.k,
            "epsilon": cfg.epsilon,
            "delta": cfg.delta,
            "exact": exact.records(),
            "estimate": estimate.as_ref().map(|e| e.records()),
            "l1_error": l1,
        }),
    )?;
    for (i, v) in exact.values.iter().enumerate() {
        match &estimate {
            Some(e) => println!("{v}: exact {:.4}, estimate {:.4}", exact.densities[i], e.densities[i]),
            None => println!("{v}: exact {:.4}", exact.densities[i]),
        }
    }
    Ok(())
}

// ------------------------------------------------------------------ detect

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DetectConfig {
    input: Option<PathBuf>,
    tweets: Option<PathBuf>,
    delimiter: char,
    k: usize,
    h: usize,
    c: usize,
    #[serde(deserialize_with = "duration")]
    tau: i64,
    #[serde(deserialize_with = "duration")]
    window: i64,
    window_mode: WindowMode,
    late: LatePolicy,
    exclude_tags: Vec<String>,
    from: Option<String>,
    to: Option<String>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        let dc = DcConfig::default();
        DetectConfig {
            input: None,
            tweets: None,
            delimiter: ',',
            k: dc.k,
            h: dc.h,
            c: dc.c,
            tau: dc.tau,
            window: dc.window_length,
            window_mode: dc.window_mode,
            late: dc.late,
            exclude_tags: Vec::new(),
            from: None,
            to: None,
        }
    }
}

impl DetectConfig {
    fn dc(&self) -> DcConfig {
        DcConfig {
            k: self.k,
            h: self.h,
            c: self.c,
            tau: self.tau,
            window_length: self.window,
            window_mode: self.window_mode,
            late: self.late,
        }
    }
}

fn bound(s: &Option<String>, name: &str) -> CliResult<Option<i64>> {
    s.as_deref()
        .map(|v| parse_timestamp(v).ok_or_else(|| CliError::Config(format!("bad --{name} timestamp `{v}`"))))
        .transpose()
}

fn feed<I>(state: &mut EdgeStreamState, edges: I) -> CliResult<()>
where
    I: Iterator<Item = streamint::Result<Edge>>,
{
    for e in edges {
        state.ingest(&e?)?;
    }
    Ok(())
}

pub fn detect(ctx: &Context, flags: &DetectFlags) -> CliResult<()> {
    let cfg: DetectConfig = ctx.file.resolve("detect", flags)?;
    let dc = cfg.dc();
    dc.validate()?;
    let filter = FilterConfig {
        from: bound(&cfg.from, "from")?,
        to: bound(&cfg.to, "to")?,
        ..FilterConfig::excluding(&cfg.exclude_tags)
    };
    let dir = ctx.start("detect", &cfg)?;
    let mut state = EdgeStreamState::new(dc, ctx.seed)?;
    let input_report = match (&cfg.input, &cfg.tweets) {
        (Some(path), None) => {
            let mut reader = EdgeReader::open(path, cfg.delimiter)?;
            let in_range = |e: &streamint::Result<Edge>| e.as_ref().map_or(true, |e| filter.in_range(e.timestamp));
            feed(&mut state, reader.by_ref().filter(in_range))?;
            json!({ "source": path, "malformed_lines": reader.malformed_count(), "first_malformed": reader.malformed().iter().map(|m| json!({"line": m.line, "reason": m.reason})).collect::<Vec<_>>() })
        }
        (None, Some(path)) => {
            let mut replay = Replay::open(path, filter.clone())?;
            feed(&mut state, replay.by_ref())?;
            json!({ "source": path, "records": replay.records(), "malformed_lines": replay.skipped_count(), "first_malformed": replay.skipped().iter().map(|m| json!({"line": m.line, "reason": m.reason})).collect::<Vec<_>>() })
        }
        _ => return Err(CliError::Config("detect needs exactly one of --input or --tweets".into())),
    };
    let out = state.finalize();
    gio::write_output(&dir, &out)?;
    write_json(&dir.join("input.json"), &input_report)?;
    println!(
        "{} edges accepted, {} nodes, {} snapshots, {} global communities -> {}",
        out.stats.accepted,
        out.nodes.len(),
        out.snapshots.len(),
        out.global_components.len(),
        dir.display()
    );
    Ok(())
}

// ------------------------------------------------------------------ integrate

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IntegrateConfig {
    inputs: Vec<PathBuf>,
    labels: Option<Vec<String>>,
}

pub fn integrate(ctx: &Context, flags: &IntegrateFlags) -> CliResult<()> {
    let cfg: IntegrateConfig = ctx.file.resolve("integrate", flags)?;
    if cfg.inputs.len() < 2 {
        return Err(CliError::Config("integrate needs at least two detection directories".into()));
    }
    let labels = match &cfg.labels {
        Some(l) if l.len() == cfg.inputs.len() => l.clone(),
        Some(_) => return Err(CliError::Config("one label per input".into())),
        None => (0..cfg.inputs.len()).map(|i| format!("s{i}")).collect(),
    };
    let summaries = cfg
        .inputs
        .iter()
        .map(|d| StreamSummary::load(d))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = ctx.start("integrate", &cfg)?;
    if let [a, b] = summaries.as_slice() {
        let r = integrate::integrate(a, b)?;
        write_json(&dir.join("integration.json"), &r)?;
        println!(
            "rho_v = {:.4}, rho_c = {:.4}, {} common nodes",
            r.rho_v,
            r.rho_c,
            r.common_nodes.len()
        );
    }
    let matrix = integrate::pairwise_matrix(labels, &summaries)?;
    write_text(&dir.join("matrix.csv"), &matrix.to_csv())?;
    Ok(())
}

// ------------------------------------------------------------------ experiment

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ExperimentConfig {
    name: String,
    seeds: Option<usize>,
    trials: Option<usize>,
    runs: Option<usize>,
    edges_per_community: Option<u64>,
    input: Option<PathBuf>,
    k: Option<usize>,
    h: Option<usize>,
    c: Option<usize>,
    #[serde(deserialize_with = "opt_duration")]
    tau: Option<i64>,
    #[serde(deserialize_with = "opt_duration")]
    window: Option<i64>,
    tolerance: Option<f64>,
    shared_graph: Option<bool>,
}

impl ExperimentConfig {
    fn dc(&self) -> DcConfig {
        let d = DcConfig::default();
        DcConfig {
            k: self.k.unwrap_or(d.k),
            h: self.h.unwrap_or(d.h),
            c: self.c.unwrap_or(d.c),
            tau: self.tau.unwrap_or(d.tau),
            window_length: self.window.unwrap_or(d.window_length),
            ..d
        }
    }

    fn theorem2(&self) -> Theorem2Params {
        let d = Theorem2Params::default();
        Theorem2Params {
            seeds: self.seeds.unwrap_or(d.seeds),
            edges_per_community: self.edges_per_community.unwrap_or(d.edges_per_community),
            dc: self.dc(),
            ..d
        }
    }

    fn bookkeeping(&self) -> BookkeepingParams {
        BookkeepingParams {
            dc: self.dc(),
            ..Default::default()
        }
    }

    /// The input edge file, or the synthetic tweet session.
    fn edges(&self, seed: RngSeed) -> CliResult<Vec<Edge>> {
        match &self.input {
            Some(path) => Ok(EdgeReader::open(path, ',')?.collect::<Result<Vec<_>, _>>()?),
            None => Ok(experiment::bookkeeping_edges(&self.bookkeeping(), seed).1),
        }
    }
}

fn verdict(passed: bool, name: &str) -> CliResult<()> {
    println!("{name}: {}", if passed { "PASS" } else { "FAIL" });
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("experiment `{name}` did not meet its criterion")))
    }
}

pub fn experiment(ctx: &Context, flags: &ExperimentFlags) -> CliResult<()> {
    let cfg: ExperimentConfig = ctx.file.resolve("experiment", flags)?;
    if !experiment::NAMES.contains(&cfg.name.as_str()) {
        return Err(CliError::Config(format!(
            "unknown experiment `{}` (expected one of {})",
            cfg.name,
            experiment::NAMES.join(", ")
        )));
    }
    let dir = ctx.start("experiment", &cfg)?;
    let exec = Executor::default();
    let seed = ctx.seed;
    let report = dir.join("report.json");
    match cfg.name.as_str() {
        "lemma1" => {
            let params = Lemma1Params {
                trials: cfg.trials.unwrap_or(Lemma1Params::default().trials),
                ..Default::default()
            };
            let r = experiment::lemma1(&params, seed, exec)?;
            write_json(&report, &r)?;
            println!("max |empirical - k t/T| = {:.5} ({:.2} sigma)", r.max_abs_deviation, r.max_z);
            verdict(r.passed, &cfg.name)
        }
        "theorem1" => {
            let params = Theorem1Params {
                runs: cfg.runs.unwrap_or(Theorem1Params::default().runs),
                ..Default::default()
            };
            let r = experiment::theorem1(&params, seed, exec)?;
            write_json(&report, &r)?;
            println!(
                "k = {}, failure fraction {:.3} (delta {})",
                r.k, r.failure_fraction, params.delta
            );
            verdict(r.passed, &cfg.name)
        }
        "theorem2" => {
            let r = experiment::theorem2(&cfg.theorem2(), seed, exec)?;
            write_json(&report, &r)?;
            println!(
                "detection {:.2} vs null {:.2} (z = {:.1}); max retained {}",
                r.primary.detection.rate, r.primary.null.rate, r.primary.z, r.max_retained
            );
            verdict(r.passed, &cfg.name)
        }
        "bookkeeping" => {
            let r = experiment::bookkeeping(&cfg.bookkeeping(), seed)?;
            write_json(&report, &r)?;
            println!("{} edges, {} nodes, {} snapshots", r.edges, r.nodes, r.snapshots);
            verdict(r.passed, &cfg.name)
        }
        "split-reservoir" => {
            let edges = cfg.edges(seed)?;
            let r = experiment::split_reservoir(&edges, &cfg.dc(), seed, exec)?;
            write_text(&dir.join("split_series.csv"), &r.to_csv())?;
            write_json(&report, &json!({ "k_half": r.k_half, "snapshots": r.snapshots }))?;
            println!("two reservoirs of {} edges; series in split_series.csv", r.k_half);
            Ok(())
        }
        "stability" => {
            let edges = cfg.edges(seed)?;
            let out = streamint::detect(edges, cfg.dc(), seed)?;
            let r = experiment::stability(&out.snapshots, &out.series);
            gio::write_output(&dir.join("detect"), &out)?;
            write_json(&report, &r)?;
            println!(
                "{} lineages over {} snapshots, {} transient, {} reappearances",
                r.lineages, r.snapshots, r.transient, r.reappearances
            );
            Ok(())
        }
        "integrate-planted" => {
            let params = Theorem2Params {
                seeds: cfg.seeds.unwrap_or(10),
                ..cfg.theorem2()
            };
            let r = experiment::integrate_planted(
                &params,
                cfg.shared_graph.unwrap_or(false),
                cfg.tolerance.unwrap_or(0.15),
                seed,
                exec,
            )?;
            write_json(&report, &r)?;
            println!(
                "rho_c {:.3} +/- {:.3}, planted overlap {:.3}, rho_c on planted nodes {:.3}",
                r.mean_rho_c, r.std_rho_c, r.planted_overlap, r.mean_rho_c_on_planted
            );
            verdict(r.passed, &cfg.name)
        }
        _ => unreachable!("names checked above"),
    }
}
