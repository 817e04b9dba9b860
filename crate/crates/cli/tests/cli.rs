use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graphtok::corpus::{gen_random_multigraph, save_corpus, synthetic_molecules, GraphRecord};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphtok"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn corpus(dir: &Path) -> PathBuf {
    let mut recs: Vec<GraphRecord> = synthetic_molecules(60, 5)
        .into_iter()
        .enumerate()
        .map(|(i, g)| GraphRecord { id: Some(format!("m{i}")), ..GraphRecord::new(g) })
        .collect();
    for s in 0..20 {
        recs.push(GraphRecord::new(gen_random_multigraph(7, 0.5, &["C", "N"], &["-", "="], s)));
    }
    let path = dir.join("d.graphs.jsonl");
    save_corpus(&path, &recs).unwrap();
    path
}

#[test]
fn pipeline_smoke_roundtrip_passes() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path());
    let model = dir.path().join("m.gtok.json");
    let tokens = dir.path().join("d.tokens.jsonl");
    let decoded = dir.path().join("d.decoded.jsonl");

    let o = run(&["train", "--in", p(&data), "--k", "200", "--method", "feuler", "--unit", "trigram", "--out", p(&model)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("trained "));

    let o = run(&["encode", "--model", p(&model), "--in", p(&data), "--out", p(&tokens)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["decode", "--model", p(&model), "--in", p(&tokens), "--out", p(&decoded)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["verify", "--roundtrip", "--in", p(&data), "--decoded", p(&decoded)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["roundtrip"]["pass_rate"], 1.0);
    assert_eq!(report["roundtrip"]["checked"], 80);
    assert_eq!(report["ok"], true);
}

#[test]
fn verify_in_process_with_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path());
    let model = dir.path().join("m.gtok.json");
    assert!(run(&["train", "--in", p(&data), "--k", "50", "--method", "fcpp", "--out", p(&model)]).status.success());
    let o = run(&["verify", "--roundtrip", "--model", p(&model), "--in", p(&data), "--determinism", "3", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["determinism"]["runs"], 240);
    assert_eq!(report["determinism"]["clean_runs"], report["determinism"]["clean_identical"]);
}

#[test]
fn commands_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path());
    let mut outputs = Vec::new();
    for round in 0..2 {
        let model = dir.path().join(format!("m{round}.gtok.json"));
        let tokens = dir.path().join(format!("t{round}.tokens.jsonl"));
        let seqs = dir.path().join(format!("s{round}.seqs.jsonl"));
        assert!(run(&["--jobs", "2", "train", "--in", p(&data), "--k", "100", "--out", p(&model)]).status.success());
        assert!(run(&["encode", "--model", p(&model), "--in", p(&data), "--out", p(&tokens), "--seqs", p(&seqs)])
            .status
            .success());
        outputs.push([model, tokens, seqs].map(|f| std::fs::read(f).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.graphs.jsonl");
    let out = dir.path().join("m.gtok.json");
    let o = run(&["train", "--in", p(&missing), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.graphs.jsonl");
    std::fs::write(&bad, "{\"nodes\":[{\"label\":\"a\"}],\"edges\":[{\"u\":0,\"v\":3}]}\n").unwrap();
    let o = run(&["train", "--in", p(&bad), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let data = corpus(dir.path());
    let o = run(&["train", "--in", p(&data), "--method", "randomwalk", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));

    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_labels_fail_unless_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path());
    let model = dir.path().join("m.gtok.json");
    assert!(run(&["train", "--in", p(&data), "--k", "20", "--out", p(&model)]).status.success());
    let odd = dir.path().join("odd.graphs.jsonl");
    std::fs::write(&odd, "{\"nodes\":[{\"label\":\"Xe\"},{\"label\":\"C\"}],\"edges\":[{\"u\":0,\"v\":1,\"label\":\"-\"}]}\n").unwrap();
    let tokens = dir.path().join("t.tokens.jsonl");
    let o = run(&["encode", "--model", p(&model), "--in", p(&odd), "--out", p(&tokens)]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["encode", "--model", p(&model), "--in", p(&odd), "--out", p(&tokens), "--oov-passthrough"]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&tokens).unwrap().contains("\"lossy\":true"));
    let back = dir.path().join("b.graphs.jsonl");
    let o = run(&["decode", "--model", p(&model), "--in", p(&tokens), "--out", p(&back)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ablate_table_shape() {
    let o = run(&[
        "ablate", "--synthetic", "40", "--corpus-seed", "1", "--methods", "bfs,dfs,topo,eulerian,feuler,cpp,fcpp", "--k",
        "0,10,50",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0], ["method", "unit", "k", "avg_raw_len", "avg_token_len", "ratio"]);
    assert_eq!(rows.len(), 1 + 7 * 3);
    for r in rows[1..].iter().filter(|r| r[2] == "0") {
        assert_eq!(r[5], "1.00");
    }
    let o = run(&["ablate", "--synthetic", "5", "--methods", "feuler"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stats_vocab_and_bench_print_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = corpus(dir.path());
    let o = run(&["stats", "--in", p(&data), "--top", "5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("label_1\tlabel_2\tlabel_3\tcount\tfrequency"));
    assert_eq!(text.lines().count(), 6);

    let model = dir.path().join("m.gtok.json");
    assert!(run(&["train", "--in", p(&data), "--k", "30", "--out", p(&model)]).status.success());
    let o = run(&["vocab", "--model", p(&model), "--tokens"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("nodes\tcount\tproportion\n0-1\t"));

    let o = run(&["bench", "--in", p(&data), "--k", "30", "--repeats", "1"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
}
