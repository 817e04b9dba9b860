//! `graphtok` command-line tool.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "graphtok", version, about = "Reversible graph tokenizer")]
struct Cli {
    /// Worker threads for per-graph stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    /// bfs, dfs, topo, randomwalk, eulerian, feuler, cpp or fcpp.
    #[arg(long, default_value = "feuler")]
    pub method: String,
    /// Guidance unit: node-node, node-edge, trigram or path-K.
    #[arg(long, default_value = "trigram")]
    pub unit: String,
    /// Unit/frequency mix for fcpp edge weights.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Frequency transform for fcpp: reciprocal or neglog.
    #[arg(long, default_value = "reciprocal")]
    pub g: String,
    #[arg(long)]
    pub no_rotation: bool,
    /// Emit labels at every node position instead of back-references.
    #[arg(long)]
    pub label_only: bool,
    /// Random walks per graph (randomwalk only).
    #[arg(long, default_value_t = 1)]
    pub walks: u32,
    /// Steps per random walk.
    #[arg(long, default_value_t = 16)]
    pub length: u32,
    /// Required by stochastic methods.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct CorpusArgs {
    /// Graph corpus (.graphs.jsonl).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Use this many synthetic molecule-like graphs instead of --in.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Seed for --synthetic.
    #[arg(long = "corpus-seed")]
    pub corpus_seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn guidance statistics and a BPE codebook.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2000)]
        k: usize,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graphs to token ids.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the serialized symbol sequences here.
        #[arg(long)]
        seqs: Option<PathBuf>,
        /// Map unknown labels to the reserved unknown token (output will not decode).
        #[arg(long)]
        oov_passthrough: bool,
    },
    /// Token ids back to graphs.
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pattern frequencies of a corpus as TSV.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "trigram")]
        unit: String,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Vocabulary summary of a model as TSV.
    Vocab {
        #[arg(long)]
        model: PathBuf,
        /// Also list every token with its node count and symbols.
        #[arg(long)]
        tokens: bool,
    },
    /// Correctness checks; prints a JSON report.
    Verify {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        /// Check decode(encode(g)) against g.
        #[arg(long)]
        roundtrip: bool,
        /// Compare with these decoded graphs instead of re-running the model.
        #[arg(long)]
        decoded: Option<PathBuf>,
        /// Permutations per graph for a determinism check.
        #[arg(long)]
        determinism: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compression over methods, merge counts and units as TSV.
    Ablate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_delimiter = ',', default_value = "bfs,dfs,topo,eulerian,feuler,cpp,fcpp")]
        methods: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0,100,500,1000,2000")]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "trigram")]
        units: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Required when a stochastic method is listed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serialization and encode time per million nodes.
    Bench {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 2000)]
        k: usize,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAPHTOK_LOG", "warn"))
        .format_timestamp(None)
        .init();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match cli.cmd {
        Command::Train { input, k, method, out } => commands::train(&input, k, &method, &out),
        Command::Encode { model, input, out, seqs, oov_passthrough } => {
            commands::encode(&model, &input, &out, seqs.as_deref(), oov_passthrough)
        }
        Command::Decode { model, input, out } => commands::decode(&model, &input, &out),
        Command::Stats { input, unit, top } => commands::stats(&input, &unit, top),
        Command::Vocab { model, tokens } => commands::vocab(&model, tokens),
        Command::Verify { model, input, roundtrip, decoded, determinism, seed, out } => commands::verify(
            commands::VerifyOpts {
                model: model.as_deref(),
                input: &input,
                roundtrip,
                decoded: decoded.as_deref(),
                determinism,
                seed,
                out: out.as_deref(),
            },
        ),
        Command::Ablate { corpus, methods, k, units, alpha, seed, out } => {
            commands::ablate(&corpus, &methods, &k, &units, alpha, seed, out.as_deref())
        }
        Command::Bench { corpus, k, method, repeats } => commands::bench(&corpus, k, &method, repeats),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
