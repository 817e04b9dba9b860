use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use graphtok::bpe::TokenSequence;
use graphtok::corpus::{
    load_jsonl, load_model, read_tokens, save_model, synthetic_molecules, write_graphs, write_sequences,
    write_tokens, CorpusError, GraphRecord, SequenceRecord, TokenRecord,
};
use graphtok::serialize::{Emission, GKind, Method, SerializationConfig, SerializeError};
use graphtok::stats::{aggregate_frequencies, GuidanceUnit, StatsError};
use graphtok::tokenizer::{train as train_model, TokenizerError, TokenizerModel, VOCAB_BUCKETS};
use graphtok::verify::{compression_report, determinism_report, equivalent, is_isomorphic};
use graphtok::{LabeledGraph, SymbolId};
use log::info;
use rayon::prelude::*;
use serde_json::json;

use crate::{CorpusArgs, MethodArgs};

const CHUNK: usize = 4096;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

type Res<T = ExitCode> = Result<T, Failure>;

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn io_fail(path: &Path, e: io::Error) -> Failure {
    Failure { code: 2, message: format!("{}: {e}", path.display()) }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        Failure { code: if e.is_io() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<TokenizerError> for Failure {
    fn from(e: TokenizerError) -> Self {
        invalid(e.to_string())
    }
}

impl From<SerializeError> for Failure {
    fn from(e: SerializeError) -> Self {
        invalid(e.to_string())
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        invalid(e.to_string())
    }
}

fn parse_method(name: &str, args: &MethodArgs, seed: Option<u64>) -> Res<Method> {
    let m: Method = name.parse()?;
    Ok(match m {
        Method::RandomWalk { .. } => Method::RandomWalk {
            walks: args.walks,
            length: args.length,
            seed: seed.ok_or_else(|| invalid(format!("method {name} is stochastic and needs --seed")))?,
        },
        m => m,
    })
}

fn config_of(args: &MethodArgs, method: &str) -> Res<(SerializationConfig, GuidanceUnit)> {
    let mut cfg = SerializationConfig::new(parse_method(method, args, args.seed)?);
    cfg.alpha = args.alpha;
    cfg.g_kind = args.g.parse::<GKind>()?;
    cfg.rotation_normalize = !args.no_rotation;
    cfg.emission = if args.label_only { Emission::LabelOnly } else { Emission::BackRef };
    cfg.validate()?;
    Ok((cfg, args.unit.parse()?))
}

fn load_records(path: &Path) -> Res<Vec<GraphRecord>> {
    Ok(load_jsonl(path)?.collect::<Result<Vec<_>, _>>()?)
}

fn load_graphs(c: &CorpusArgs) -> Res<Vec<LabeledGraph>> {
    match (&c.input, c.synthetic) {
        (Some(p), None) => Ok(load_records(p)?.into_iter().map(|r| r.graph).collect()),
        (None, Some(n)) => {
            let seed = c
                .corpus_seed
                .ok_or_else(|| invalid("--synthetic needs --corpus-seed"))?;
            Ok(synthetic_molecules(n, seed))
        }
        _ => Err(invalid("give exactly one of --in and --synthetic")),
    }
}

fn create(path: &Path) -> Res<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_fail(path, e))
}

fn describe(i: usize, id: &Option<String>) -> String {
    match id {
        Some(id) => format!("record {} ({id})", i + 1),
        None => format!("record {}", i + 1),
    }
}

pub fn train(input: &Path, k: usize, args: &MethodArgs, out: &Path) -> Res {
    let (cfg, unit) = config_of(args, &args.method)?;
    let graphs: Vec<LabeledGraph> = load_records(input)?.into_iter().map(|r| r.graph).collect();
    info!("training on {} graphs", graphs.len());
    let model = train_model(&graphs, k, cfg, unit)?;
    save_model(&model, out)?;
    println!(
        "trained {} merges (vocab {}) on {} graphs with {} guided by {} -> {}",
        model.codebook().k(),
        model.codebook().vocab_size(),
        graphs.len(),
        model.config().method,
        unit,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn encode(model: &Path, input: &Path, out: &Path, seqs: Option<&Path>, oov: bool) -> Res {
    let model = load_model(model)?;
    let mut reader = load_jsonl(input)?;
    let mut w = create(out)?;
    let mut sw = seqs.map(create).transpose()?;
    let (mut graphs, mut tokens, mut lossy_count) = (0usize, 0usize, 0usize);
    loop {
        let chunk: Vec<GraphRecord> = reader.by_ref().take(CHUNK).collect::<Result<_, _>>()?;
        if chunk.is_empty() {
            break;
        }
        let encoded: Vec<Result<(TokenRecord, Option<SequenceRecord>), Failure>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let seq = sw.as_ref().map(|_| SequenceRecord::from_sequence(r.id.clone(), &model.serialize(&r.graph)));
                let (mut t, lossy) = if oov {
                    model.encode_lossy(&r.graph)
                } else {
                    let t = model
                        .encode(&r.graph)
                        .map_err(|e| invalid(format!("{}: {e}", describe(graphs + i, &r.id))))?;
                    (t, false)
                };
                t.source_id = r.id.clone();
                Ok((TokenRecord::from_sequence(&t, lossy), seq))
            })
            .collect();
        let mut recs = Vec::with_capacity(encoded.len());
        let mut srecs = Vec::new();
        for e in encoded {
            let (t, s) = e?;
            tokens += t.tokens.len();
            lossy_count += t.lossy as usize;
            recs.push(t);
            srecs.extend(s);
        }
        write_tokens(&mut w, &recs).map_err(|e| io_fail(out, e))?;
        if let (Some(sw), Some(p)) = (sw.as_mut(), seqs) {
            write_sequences(sw, &srecs).map_err(|e| io_fail(p, e))?;
        }
        graphs += chunk.len();
    }
    if lossy_count > 0 {
        log::warn!("{lossy_count} graphs had out-of-vocabulary symbols; their tokens will not decode");
    }
    println!("encoded {graphs} graphs into {tokens} tokens -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn decode(model: &Path, input: &Path, out: &Path) -> Res {
    let model = load_model(model)?;
    let f = File::open(input).map_err(|e| io_fail(input, e))?;
    let mut reader = read_tokens(BufReader::new(f));
    let mut w = create(out)?;
    let mut done = 0usize;
    loop {
        let chunk: Vec<TokenRecord> = reader.by_ref().take(CHUNK).collect::<Result<_, _>>()?;
        if chunk.is_empty() {
            break;
        }
        let decoded: Vec<Res<GraphRecord>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, t)| {
                let what = describe(done + i, &t.id);
                if t.lossy {
                    return Err(invalid(format!("{what} was encoded with unknown tokens and cannot be decoded")));
                }
                let g = model
                    .decode(&t.to_sequence())
                    .map_err(|e| invalid(format!("{what}: {e}")))?;
                Ok(GraphRecord { graph: g, id: t.id.clone(), target: None })
            })
            .collect();
        let recs = decoded.into_iter().collect::<Res<Vec<_>>>()?;
        write_graphs(&mut w, &recs).map_err(|e| io_fail(out, e))?;
        done += chunk.len();
    }
    println!("decoded {done} graphs -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}

pub fn stats(input: &Path, unit: &str, top: Option<usize>) -> Res {
    let unit: GuidanceUnit = unit.parse()?;
    let graphs: Vec<LabeledGraph> = load_records(input)?.into_iter().map(|r| r.graph).collect();
    let freq = aggregate_frequencies(&graphs, unit)?;
    let rows = freq.top(top.unwrap_or(usize::MAX));
    let mut out = io::stdout().lock();
    let width = rows.first().map_or(0, |r| r.0.labels().len());
    let mut header: Vec<String> = (1..=width).map(|i| format!("label_{i}")).collect();
    header.extend(["count".to_string(), "frequency".to_string()]);
    let _ = writeln!(out, "{}", header.join("\t"));
    for (p, c, f) in rows {
        let _ = writeln!(out, "{p}\t{c}\t{f:.6}");
    }
    if freq.truncated() {
        log::warn!("path enumeration hit its per-graph budget; counts are partial");
    }
    Ok(ExitCode::SUCCESS)
}

fn token_text(model: &TokenizerModel, id: SymbolId) -> String {
    let cb = model.codebook();
    cb.expand(id)
        .map(|ids| {
            ids.iter()
                .map(|b| cb.alphabet()[b.index()].to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .unwrap_or_default()
}

pub fn vocab(model: &Path, tokens: bool) -> Res {
    let model = load_model(model)?;
    let st = model.vocab_stats();
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "nodes\tcount\tproportion");
    for (i, b) in VOCAB_BUCKETS.iter().enumerate() {
        let _ = writeln!(out, "{b}\t{}\t{:.4}", st.counts[i], st.proportions[i]);
    }
    if tokens {
        let _ = writeln!(out);
        let _ = writeln!(out, "id\tnodes\tsymbols");
        for i in 0..model.codebook().vocab_size() {
            let id = SymbolId(i as u32);
            let nodes = model.token_subgraph(id).map(|f| f.real_nodes).unwrap_or(0);
            let _ = writeln!(out, "{i}\t{nodes}\t{}", token_text(&model, id));
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub struct VerifyOpts<'a> {
    pub model: Option<&'a Path>,
    pub input: &'a Path,
    pub roundtrip: bool,
    pub decoded: Option<&'a Path>,
    pub determinism: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<&'a Path>,
}

const MAX_LISTED_FAILURES: usize = 20;

pub fn verify(o: VerifyOpts) -> Res {
    if !o.roundtrip && o.determinism.is_none() {
        return Err(invalid("nothing to verify: pass --roundtrip and/or --determinism N"));
    }
    let originals = load_records(o.input)?;
    let model = o.model.map(load_model).transpose()?;
    let mut report = json!({ "graphs": originals.len() });
    let mut ok = true;

    if o.roundtrip {
        let decoded: Vec<Result<LabeledGraph, String>> = match (o.decoded, &model) {
            (Some(p), _) => {
                let d = load_records(p)?;
                if d.len() != originals.len() {
                    return Err(invalid(format!(
                        "{} has {} graphs but {} has {}",
                        p.display(),
                        d.len(),
                        o.input.display(),
                        originals.len()
                    )));
                }
                d.into_iter().map(|r| Ok(r.graph)).collect()
            }
            (None, Some(m)) => originals
                .par_iter()
                .map(|r| {
                    let t: TokenSequence = m.encode(&r.graph).map_err(|e| e.to_string())?;
                    m.decode(&t).map_err(|e| e.to_string())
                })
                .collect(),
            (None, None) => return Err(invalid("--roundtrip needs --model or --decoded")),
        };
        let checks: Vec<(bool, bool, Option<String>)> = originals
            .par_iter()
            .zip(decoded.par_iter())
            .map(|(r, d)| match d {
                Err(e) => (false, false, Some(e.clone())),
                Ok(g) => {
                    let exact = is_isomorphic(&r.graph, g).is_ok();
                    let pass = equivalent(&r.graph, g);
                    (pass, exact, (!pass).then(|| "decoded graph differs".to_string()))
                }
            })
            .collect();
        let passed = checks.iter().filter(|c| c.0).count();
        let exact = checks.iter().filter(|c| c.1).count();
        let failures: Vec<_> = checks
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.0)
            .take(MAX_LISTED_FAILURES)
            .map(|(i, c)| json!({ "index": i, "id": originals[i].id, "reason": c.2 }))
            .collect();
        let n = checks.len();
        ok &= passed == n;
        report["roundtrip"] = json!({
            "checked": n,
            "passed": passed,
            "failed": n - passed,
            "exact": exact,
            "battery": n - exact,
            "pass_rate": if n == 0 { 1.0 } else { passed as f64 / n as f64 },
            "failures": failures,
        });
    }

    if let Some(perms) = o.determinism {
        let m = model.as_ref().ok_or_else(|| invalid("--determinism needs --model"))?;
        let seed = o.seed.ok_or_else(|| invalid("--determinism needs --seed"))?;
        let reps: Vec<_> = originals
            .par_iter()
            .enumerate()
            .map(|(i, r)| determinism_report(&r.graph, m, perms, seed.wrapping_add(i as u64)))
            .collect();
        let sum = |f: fn(&graphtok::verify::DeterminismReport) -> u64| reps.iter().map(f).sum::<u64>();
        let clean_runs = sum(|r| r.clean_runs as u64);
        let clean_identical = sum(|r| r.clean_identical as u64);
        ok &= clean_runs == clean_identical;
        report["determinism"] = json!({
            "runs": sum(|r| r.perms as u64),
            "identical": sum(|r| r.identical as u64),
            "fallback_invocations": sum(|r| r.fallback_invocations),
            "clean_runs": clean_runs,
            "clean_identical": clean_identical,
        });
    }

    report["ok"] = json!(ok);
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match o.out {
        Some(p) => std::fs::write(p, &text).map_err(|e| io_fail(p, e))?,
        None => print!("{text}"),
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn ablate(
    corpus: &CorpusArgs,
    methods: &[String],
    ks: &[usize],
    units: &[String],
    alpha: f64,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Res {
    let graphs = load_graphs(corpus)?;
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let mut lines = vec!["method\tunit\tk\tavg_raw_len\tavg_token_len\tratio".to_string()];
    for unit in units {
        for name in methods {
            let args = MethodArgs {
                method: name.clone(),
                unit: unit.clone(),
                alpha,
                g: "reciprocal".into(),
                no_rotation: false,
                label_only: false,
                walks: 1,
                length: 16,
                seed,
            };
            let (cfg, unit) = config_of(&args, name)?;
            info!("ablate {name} / {unit}");
            let model = train_model(&graphs, kmax, cfg, unit)?;
            for &k in ks {
                let r = compression_report(&graphs, &model.with_merge_prefix(k));
                lines.push(format!(
                    "{}\t{}\t{}\t{:.2}\t{:.2}\t{:.2}",
                    model.config().method,
                    unit,
                    k,
                    r.avg_raw_len,
                    r.avg_token_len,
                    r.ratio
                ));
            }
        }
    }
    let text = lines.join("\n") + "\n";
    match out {
        Some(p) => std::fs::write(p, &text).map_err(|e| io_fail(p, e))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn min_time(repeats: usize, mut f: impl FnMut()) -> f64 {
    (0..repeats.max(1))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn bench(corpus: &CorpusArgs, k: usize, args: &MethodArgs, repeats: usize) -> Res {
    let (cfg, unit) = config_of(args, &args.method)?;
    let graphs = load_graphs(corpus)?;
    let model = train_model(&graphs, k, cfg, unit)?;
    let nodes: usize = graphs.iter().map(|g| g.node_count()).sum();
    let ids: Vec<Vec<SymbolId>> = graphs
        .iter()
        .map(|g| model.codebook().symbols_to_ids(&model.serialize(g).symbols))
        .collect::<Result<_, _>>()
        .map_err(|e| invalid(e.to_string()))?;
    let ser = min_time(repeats, || {
        for g in &graphs {
            std::hint::black_box(model.serialize(g));
        }
    });
    let enc = min_time(repeats, || {
        for s in &ids {
            std::hint::black_box(model.codebook().encode_ids(s));
        }
    });
    let per = |t: f64| if nodes == 0 { 0.0 } else { t * 1e6 / nodes as f64 };
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "stage\tseconds\tnodes\tseconds_per_million_nodes");
    let _ = writeln!(out, "serialize\t{ser:.6}\t{nodes}\t{:.6}", per(ser));
    let _ = writeln!(out, "encode\t{enc:.6}\t{nodes}\t{:.6}", per(enc));
    Ok(ExitCode::SUCCESS)
}
