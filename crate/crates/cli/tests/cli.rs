use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn wxbridge(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_wxbridge"))
        .args(args)
        .env_remove("WXBRIDGE_TABLES")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn encode_and_decode_through_stdio() {
    let wx = stdout(&wxbridge(&["encode"], Some("रविवार\nमैं Delhi में\n")));
    assert_eq!(wx, "ravivAra\nmEM Delhi meM\n");
    let back = stdout(&wxbridge(&["decode", "--script", "devanagari"], Some("ravivAra\n")));
    assert_eq!(back, "रविवार\n");
    let guj = stdout(&wxbridge(&["encode", "-s", "gujarati"], Some("રવિવાર\n")));
    assert_eq!(guj, "ravivAra\n");
}

#[test]
fn encode_writes_span_records() {
    let dir = tempfile::tempdir().unwrap();
    let spans = dir.path().join("x.spans");
    stdout(&wxbridge(&["encode", "--spans", p(&spans)], Some("ok रविवार\n")));
    let record: serde_json::Value = serde_json::from_str(fs::read_to_string(&spans).unwrap().trim()).unwrap();
    assert_eq!(record["wx"], "ok ravivAra");
    assert_eq!(record["spans"][0]["kind"], "passthrough");
}

#[test]
fn bpe_learn_apply_undo() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.wx");
    let model = dir.path().join("bpe.model");
    fs::write(&corpus, "ravivAra Aja hE\nAja ravivAra\n").unwrap();
    stdout(&wxbridge(
        &[
            "bpe",
            "learn",
            p(&corpus),
            "--merges",
            "20",
            "--min-frequency",
            "1",
            "-m",
            p(&model),
        ],
        None,
    ));
    assert!(fs::read_to_string(&model)
        .unwrap()
        .starts_with("#wxbridge-bpe version=1"));
    let tokens = stdout(&wxbridge(&["bpe", "apply", "-m", p(&model)], Some("ravivAra Aja\n")));
    assert!(tokens.starts_with('▁'));
    let undone = stdout(&wxbridge(&["bpe", "undo"], Some(&tokens)));
    assert_eq!(undone, "ravivAra Aja\n");
}

#[test]
fn lm_train_score_ppl() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let model = dir.path().join("lm.arpa");
    fs::write(&corpus, "abc\nabd\nca\n").unwrap();
    stdout(&wxbridge(
        &[
            "lm",
            "train",
            p(&corpus),
            "--order",
            "3",
            "--smoothing",
            "uniform",
            "-m",
            p(&model),
        ],
        None,
    ));
    // a b c d plus end of sentence and <unk>
    let ppl = stdout(&wxbridge(&["lm", "ppl", "-m", p(&model), "-i", p(&corpus)], None));
    assert_eq!(ppl.trim().parse::<f64>().unwrap(), 6.0);

    stdout(&wxbridge(
        &["lm", "train", p(&corpus), "--order", "2", "-m", p(&model)],
        None,
    ));
    let scores = stdout(&wxbridge(&["lm", "score", "-m", p(&model)], Some("ab\n")));
    let (logp, n) = scores.trim().split_once('\t').unwrap();
    assert!(logp.parse::<f64>().unwrap() < 0.0);
    assert_eq!(n, "3");
}

#[test]
fn evaluate_emits_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let hyp = dir.path().join("hyp");
    fs::write(&hyp, "the cat sat\non the mat\n").unwrap();
    let out = stdout(&wxbridge(&["evaluate", "--hyp", p(&hyp), "--ref", p(&hyp)], None));
    let records: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let scores: Vec<(String, f64)> = records
        .iter()
        .map(|r| (r["metric"].as_str().unwrap().to_string(), r["score"].as_f64().unwrap()))
        .collect();
    assert_eq!(
        scores,
        vec![
            ("bleu".into(), 100.0),
            ("char_bleu".into(), 100.0),
            ("chrf2".into(), 100.0),
            ("ter".into(), 0.0),
            ("wer".into(), 0.0)
        ]
    );
    assert!(records[0].get("signature").is_none());
    assert!(records[0].get("details").is_some());

    let out = stdout(&wxbridge(
        &[
            "evaluate",
            "--hyp",
            p(&hyp),
            "--ref",
            p(&hyp),
            "--metrics",
            "bleu",
            "--signature",
            "--literal-bleu",
        ],
        None,
    ));
    let r: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(r["signature"].as_str().unwrap().contains("mode:literal"), "{r}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let hyp = dir.path().join("hyp");
    let short = dir.path().join("short");
    fs::write(&hyp, "a\nb\n").unwrap();
    fs::write(&short, "a\n").unwrap();

    assert_eq!(wxbridge(&["--help"], None).status.code(), Some(0));
    assert_eq!(wxbridge(&["--version"], None).status.code(), Some(0));
    assert_eq!(wxbridge(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(
        wxbridge(&["decode", "--script", "klingon"], None).status.code(),
        Some(1)
    );

    let missing = wxbridge(&["evaluate", "--hyp", p(&hyp), "--ref", "/nonexistent/ref.txt"], None);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/ref.txt"));

    let misaligned = wxbridge(&["evaluate", "--hyp", p(&hyp), "--ref", p(&short)], None);
    assert_eq!(misaligned.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&misaligned.stderr).contains("line count mismatch"));
}

#[test]
fn tables_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("devanagari.tsv"), "not a table\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wxbridge"))
        .args(["encode", "-s", "devanagari", "-i", "/dev/null"])
        .env("WXBRIDGE_TABLES", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("devanagari.tsv"));
}

const MANIFEST: &str = r#"output_dir = "out"
[options.bpe]
merges = 30
min_frequency = 1

[[pairs]]
source_lang = "ne"
target_lang = "hi"
source_script = "devanagari"
target_script = "devanagari"
train = { source = "train.ne", target = "train.hi" }
"#;

#[test]
fn prepare_then_postprocess_restores_target() {
    let dir = tempfile::tempdir().unwrap();
    let hi = "आज रविवार है।\nमैं  Delhi में हूँ\n";
    fs::write(dir.path().join("train.ne"), "आज आइतबार हो\nम दिल्लीमा छु\n").unwrap();
    fs::write(dir.path().join("train.hi"), hi).unwrap();
    let manifest = dir.path().join("m.toml");
    fs::write(&manifest, MANIFEST).unwrap();

    let run = stdout(&wxbridge(&["prepare", p(&manifest), "--joint"], None));
    assert!(run.trim().ends_with("run.json"));
    let out = dir.path().join("out/ne-hi");
    assert!(out.join("bpe.joint.model").is_file());

    let restored = dir.path().join("restored");
    let spans = out.join("train.hi.spans");
    stdout(&wxbridge(
        &[
            "postprocess",
            "--hyp",
            p(&out.join("train.hi.bpe")),
            "-s",
            "devanagari",
            "--spans",
            p(&spans),
            "-o",
            p(&restored),
        ],
        None,
    ));
    assert_eq!(fs::read_to_string(&restored).unwrap(), hi);

    let report = dir.path().join("report");
    let written = stdout(&wxbridge(
        &[
            "analyze",
            "--manifest",
            p(&manifest),
            "--which",
            "entropy,ssnglm",
            "--order",
            "3",
            "-o",
            p(&report),
        ],
        None,
    ));
    assert!(written.contains("ssnglm.tsv"));
    let tsv = fs::read_to_string(report.join("ssnglm.tsv")).unwrap();
    assert!(tsv.starts_with("model\tne\thi\n"), "{tsv}");
}

#[test]
fn prepare_rejects_lossy_script_without_acknowledgement() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train.ne"), "آج\n").unwrap();
    fs::write(dir.path().join("train.hi"), "आज\n").unwrap();
    let manifest = dir.path().join("m.toml");
    fs::write(
        &manifest,
        MANIFEST.replace("source_script = \"devanagari\"", "source_script = \"perso-arabic\""),
    )
    .unwrap();
    let refused = wxbridge(&["prepare", p(&manifest)], None);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("allow_lossy"));
    stdout(&wxbridge(&["prepare", p(&manifest), "--allow-lossy"], None));
}

#[test]
fn analyze_corpus_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "aaaa\n").unwrap();
    fs::write(&b, "abab\n").unwrap();
    let report = dir.path().join("r");
    stdout(&wxbridge(
        &[
            "analyze",
            "--corpus",
            &format!("a={}", p(&a)),
            "--corpus",
            &format!("b={}", p(&b)),
            "--which",
            "entropy",
            "--raw",
            "-o",
            p(&report),
        ],
        None,
    ));
    let entropy: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report.join("entropy.json")).unwrap()).unwrap();
    assert_eq!(entropy[0]["raw"]["corpus_char_entropy"], 0.0);
    assert_eq!(entropy[1]["raw"]["corpus_char_entropy"], 1.0);
}
