use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use log::{info, warn};
use quadrank_core::dialogue::flatten_sample;
use quadrank_core::ingest::{select_exemplars, write_graph_file};
use quadrank_core::{
    acceptability, corpus_stats, flatten_chronological, gold_ranking, pair_count, sample_topological_orders,
    split_corpus, CorpusSplit, Graph, QuartileKey,
};
use quadrank_harness::report::{write_aggregate_csv, write_per_graph_csv, write_records_csv};
use quadrank_harness::{
    bias_table, build_prompt, render_summary, run_evaluation, run_toposort_robustness, Backend, Backoff,
    Exemplar, GenerationParams, HttpBackend, MockBackend, MockKind, PromptStrategy, RecordingBackend,
    ReplayBackend, RunError, RunOptions, RunReport, TemplateSet,
};
use serde_json::{json, Value};

use crate::output::{self, flatten_loaded, load_all, prepare_dir, prepare_file, safe_name, score};
use crate::{usage, BiasArgs, EvaluateArgs, FlattenArgs, IngestArgs, KeyArg, MockArg, QuadArgs, StatsArgs};

pub fn quad(a: QuadArgs) -> anyhow::Result<()> {
    let graphs = flatten_loaded(load_all(&a.corpus.paths)?);
    if let Some(dir) = &a.out {
        prepare_dir(dir, a.out_args.force)?;
    }
    let mut scores_json = Vec::new();
    let mut rankings_json = Vec::new();
    for g in &graphs {
        let scores = acceptability(g);
        let ranking = gold_ranking(&scores);
        let mut rank_of = BTreeMap::new();
        for (i, group) in ranking.groups().iter().enumerate() {
            for id in group {
                rank_of.insert(*id, i + 1);
            }
        }
        let thetas = g.base_weights();
        println!("{} ({} arguments, {} relations)", g.name(), g.len(), g.relations().len());
        println!("{:>6} {:>8} {:>8} {:>5}", "id", "theta", "sigma", "rank");
        for arg in g.arguments() {
            println!(
                "{:>6} {:>8} {:>8} {:>5}",
                arg.id.to_string(),
                score(thetas[&arg.id]),
                score(scores.scores[&arg.id]),
                rank_of[&arg.id]
            );
        }
        println!();
        let map: BTreeMap<String, f64> = scores.iter().map(|(id, v)| (id.to_string(), *v)).collect();
        scores_json.push(json!({ "graph": g.name(), "scores": map }));
        rankings_json.push(json!({ "graph": g.name(), "ranking": ranking.groups() }));
    }
    if let Some(dir) = &a.out {
        output::write(&dir.join("scores.json"), pretty(&Value::Array(scores_json))?)?;
        output::write(&dir.join("rankings.json"), pretty(&Value::Array(rankings_json))?)?;
        info!("wrote {}", dir.display());
    }
    Ok(())
}

fn pretty(v: &Value) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

enum Ordering {
    Chronological,
    Toposort { k: usize, seed: u64 },
}

fn parse_ordering(s: &str) -> anyhow::Result<Ordering> {
    if s == "chronological" {
        return Ok(Ordering::Chronological);
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["toposort", k, seed] => {
            let k: usize = k.parse().map_err(|_| usage(format!("bad order count in {s:?}")))?;
            if k == 0 {
                return Err(usage("the order count must be at least 1"));
            }
            let seed = seed.parse().map_err(|_| usage(format!("bad seed in {s:?}")))?;
            Ok(Ordering::Toposort { k, seed })
        }
        ["toposort", ..] => Err(usage(format!(
            "{s:?}: toposort needs an explicit seed, use toposort:<k>:<seed>"
        ))),
        _ => Err(usage(format!("unknown ordering {s:?}; expected chronological or toposort:<k>:<seed>"))),
    }
}

pub fn flatten(a: FlattenArgs) -> anyhow::Result<()> {
    let ordering = parse_ordering(&a.ordering)?;
    let graphs = flatten_loaded(load_all(&a.corpus.paths)?);
    prepare_dir(&a.out, a.out_args.force)?;
    let mut written = 0;
    for g in &graphs {
        let name = safe_name(g.name());
        match ordering {
            Ordering::Chronological => {
                output::write(&a.out.join(format!("{name}.txt")), flatten_chronological(g).text())?;
                written += 1;
            }
            Ordering::Toposort { k, seed } => {
                let sample = sample_topological_orders(g, k, seed)?;
                if sample.not_enough_orders {
                    warn!("{} has only {} valid order(s), fewer than {k}", g.name(), sample.orders.len());
                }
                for (i, d) in flatten_sample(g, &sample).iter().enumerate() {
                    output::write(&a.out.join(format!("{name}.toposort-{i}.txt")), d.text())?;
                    written += 1;
                }
            }
        }
    }
    println!("wrote {written} dialogue(s) to {}", a.out.display());
    Ok(())
}

fn resolve_names(pool: &[Graph], requested: &[String]) -> anyhow::Result<Vec<String>> {
    if requested.len() == 1 && requested[0] == "auto" {
        let picked = select_exemplars(pool)
            .ok_or_else(|| usage("auto exemplar selection needs at least three graphs with relations"))?;
        return Ok(picked.into_iter().map(|(_, n)| n).collect());
    }
    if requested.iter().any(|n| n == "auto") {
        return Err(usage("`auto` cannot be combined with explicit exemplar names"));
    }
    Ok(requested.to_vec())
}

fn build_split(a: &EvaluateArgs) -> anyhow::Result<(CorpusSplit, Vec<String>)> {
    let loaded = load_all(&a.corpus.paths)?;
    let mut corpus_ids: Vec<String> = loaded.iter().map(|l| l.path.display().to_string()).collect();
    let graphs = flatten_loaded(loaded);
    let split = match &a.exemplar_corpus {
        Some(path) => {
            let pool_loaded = load_all(std::slice::from_ref(path))?;
            corpus_ids.push(path.display().to_string());
            let pool = flatten_loaded(pool_loaded);
            let names = if a.exemplars.is_empty() { vec!["auto".to_string()] } else { a.exemplars.clone() };
            let names = resolve_names(&pool, &names)?;
            let exemplars = split_corpus(pool, &names).map_err(|e| usage(e.to_string()))?.exemplars;
            CorpusSplit { exemplars, evaluation: graphs }
        }
        None => {
            let names = resolve_names(&graphs, &a.exemplars)?;
            split_corpus(graphs, &names).map_err(|e| usage(e.to_string()))?
        }
    };
    let mut seen = BTreeSet::new();
    for g in &split.evaluation {
        if !seen.insert(g.name()) {
            return Err(usage(format!("graph name {:?} occurs more than once in the evaluation set", g.name())));
        }
    }
    if split.evaluation.is_empty() {
        return Err(usage("no graphs left to evaluate"));
    }
    Ok((split, corpus_ids))
}

fn parse_strategies(list: &[String]) -> anyhow::Result<Vec<PromptStrategy>> {
    let mut out = Vec::new();
    for s in list {
        if s == "all" {
            out.extend(PromptStrategy::ALL);
        } else {
            out.push(s.parse::<PromptStrategy>().map_err(|e| usage(e.to_string()))?);
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|s| seen.insert(s.as_str()));
    Ok(out)
}

/// Build one prompt per strategy so missing exemplars or broken templates
/// surface before any request is sent.
fn precheck(split: &CorpusSplit, strategies: &[PromptStrategy], templates: &TemplateSet) -> anyhow::Result<()> {
    let probe = flatten_chronological(&split.evaluation[0]);
    for &s in strategies {
        let n = s.exemplar_count();
        if split.exemplars.len() < n {
            return Err(usage(format!(
                "{s} needs {n} exemplar(s) but {} were given; use --exemplars or --exemplar-corpus",
                split.exemplars.len()
            )));
        }
        let ex: Vec<Exemplar> = split.exemplars[..n].iter().map(Exemplar::from_graph).collect();
        build_prompt(s, &probe, &ex, templates).map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn make_backend(a: &EvaluateArgs, split: &CorpusSplit, params: &GenerationParams) -> anyhow::Result<Box<dyn Backend>> {
    let inner: Box<dyn Backend> = if let Some(kind) = a.mock {
        let kind = match kind {
            MockArg::GoldEcho => MockKind::GoldEcho,
            MockArg::Reversal => MockKind::Reversal,
            MockArg::Noisy => MockKind::Noisy,
        };
        Box::new(MockBackend::new(kind, &split.evaluation, a.seed))
    } else if let Some(path) = &a.replay {
        if !path.exists() {
            return Err(usage(format!("replay archive {} does not exist", path.display())));
        }
        Box::new(ReplayBackend::load(path)?)
    } else {
        let path = a.backend_config.as_ref().expect("clap enforces one backend");
        if !path.exists() {
            return Err(usage(format!("backend config {} does not exist", path.display())));
        }
        let config = quadrank_harness::backend::AdapterConfig::load(path)?;
        Box::new(HttpBackend::new(config, params)?)
    };
    Ok(match &a.record {
        Some(path) => Box::new(RecordingBackend::new(inner, path)?),
        None => inner,
    })
}

fn write_report(dir: &Path, report: &RunReport) -> anyhow::Result<()> {
    let tag = report.strategy.as_str();
    output::write(&dir.join(format!("report-{tag}.json")), report.to_json())?;
    let csv = |name: String, f: &dyn Fn(&mut BufWriter<File>) -> csv::Result<()>| -> anyhow::Result<()> {
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        f(&mut w).with_context(|| format!("writing {}", path.display()))
    };
    csv(format!("records-{tag}.csv"), &|w| write_records_csv(report, w))?;
    csv(format!("per-graph-{tag}.csv"), &|w| write_per_graph_csv(report, w))?;
    csv(format!("aggregate-{tag}.csv"), &|w| write_aggregate_csv(report, w))?;
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let strategies = parse_strategies(&a.strategy)?;
    if a.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        return Err(usage("--timeout must be a positive number of seconds"));
    }
    if a.toposort == Some(0) {
        return Err(usage("--toposort needs at least 1 order"));
    }
    let params = GenerationParams {
        temperature: a.temperature,
        repetitions: a.reps,
        max_output_tokens: a.max_tokens,
        request_timeout: Duration::from_secs_f64(a.timeout),
        retry_limit: a.retries,
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let templates = match &a.templates {
        Some(dir) => TemplateSet::with_overrides(dir).map_err(|e| usage(e.to_string()))?,
        None => TemplateSet::default(),
    };
    let (split, corpus_ids) = build_split(&a)?;
    precheck(&split, &strategies, &templates)?;
    prepare_dir(&a.out, a.out_args.force)?;
    let backend = make_backend(&a, &split, &params)?;
    let options = RunOptions { templates, parallelism: a.jobs, backoff: Backoff::default(), corpus_ids };

    let mut reports = Vec::new();
    for &s in &strategies {
        info!("running {s} on {} graph(s)", split.evaluation.len());
        let result = match a.toposort {
            Some(k) => run_toposort_robustness(&split, s, backend.as_ref(), &params, k, a.seed, &options),
            None => run_evaluation(&split, s, backend.as_ref(), &params, a.seed, &options),
        };
        match result {
            Ok(report) => {
                for g in report.graphs.iter().filter(|g| g.not_enough_orders) {
                    warn!("{} has only {} valid order(s)", g.name, g.orders);
                }
                write_report(&a.out, &report)?;
                reports.push(report);
            }
            Err(RunError::Backend { partial, source }) => {
                write_report(&a.out, &partial)?;
                reports.push(*partial);
                output::write(&a.out.join("summary.txt"), render_summary(&reports))?;
                return Err(anyhow::Error::new(source)
                    .context(format!("{s} stopped early; partial results are in {}", a.out.display())));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let summary = render_summary(&reports);
    output::write(&a.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn bias(a: BiasArgs) -> anyhow::Result<()> {
    if !a.report.exists() {
        return Err(usage(format!("report {} does not exist", a.report.display())));
    }
    let text = std::fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report: RunReport =
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", a.report.display()))?;
    let graphs = flatten_loaded(load_all(&a.corpus.paths)?);
    let key = match a.key {
        KeyArg::Length => QuartileKey::LengthTokens,
        KeyArg::Position => QuartileKey::Position,
    };
    if let Some(out) = &a.out {
        prepare_file(out, a.out_args.force)?;
    }
    let table = bias_table(&report, &graphs, key)?;
    print!("{}", table.render());
    if let Some(out) = &a.out {
        let w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
        table.write_csv(w).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

pub fn stats(a: StatsArgs) -> anyhow::Result<()> {
    let loaded = load_all(&a.corpus.paths)?;
    if let Some(out) = &a.out {
        prepare_file(out, a.out_args.force)?;
    }
    let mut rows = Vec::new();
    for l in &loaded {
        let s = corpus_stats(&l.graphs);
        let name = l.path.file_name().map_or_else(|| l.path.display().to_string(), |n| n.to_string_lossy().into_owned());
        println!("{name}");
        println!("  graphs {}  nodes {}  edges {}  support {}  attack {}", s.graph_count, s.node_count, s.edge_count, s.support_edges, s.attack_edges);
        println!(
            "  in-degree mean {:.3} sd {:.3} max {}  out-degree mean {:.3} sd {:.3} max {}",
            s.mean_in_degree, s.std_in_degree, s.max_in_degree, s.mean_out_degree, s.std_out_degree, s.max_out_degree
        );
        println!("  graphs with fan-in {}  argument pairs {}", s.graphs_with_fan_in, pair_count(&l.graphs));
        for g in &l.graphs {
            println!("    {:<24} {:>4} nodes {:>4} edges", g.name(), g.len(), g.relations().len());
        }
        rows.push((name, s, pair_count(&l.graphs)));
    }
    let graphs = flatten_loaded(loaded);
    let mut eval_pairs = None;
    if !a.exemplars.is_empty() {
        let names = resolve_names(&graphs, &a.exemplars)?;
        let split = split_corpus(graphs, &names).map_err(|e| usage(e.to_string()))?;
        let pairs = pair_count(&split.evaluation);
        println!("exemplars {}", names.join(", "));
        println!("evaluation graphs {}  argument pairs {}", split.evaluation.len(), pairs);
        eval_pairs = Some(pairs);
    }
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
        w.write_record([
            "corpus", "graphs", "nodes", "edges", "support", "attack", "mean_in", "sd_in", "max_in", "mean_out",
            "sd_out", "max_out", "fan_in_graphs", "pairs",
        ])?;
        for (name, s, pairs) in &rows {
            w.write_record([
                name.clone(),
                s.graph_count.to_string(),
                s.node_count.to_string(),
                s.edge_count.to_string(),
                s.support_edges.to_string(),
                s.attack_edges.to_string(),
                s.mean_in_degree.to_string(),
                s.std_in_degree.to_string(),
                s.max_in_degree.to_string(),
                s.mean_out_degree.to_string(),
                s.std_out_degree.to_string(),
                s.max_out_degree.to_string(),
                s.graphs_with_fan_in.to_string(),
                pairs.to_string(),
            ])?;
        }
        if let Some(p) = eval_pairs {
            let mut rec = vec!["evaluation".to_string()];
            rec.extend(std::iter::repeat_n(String::new(), 12));
            rec.push(p.to_string());
            w.write_record(rec)?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    let graphs = flatten_loaded(load_all(&a.corpus.paths)?);
    prepare_file(&a.out, a.out_args.force)?;
    let w = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    write_graph_file(&graphs, w)?;
    println!("wrote {} graph(s) to {}", graphs.len(), a.out.display());
    Ok(())
}
