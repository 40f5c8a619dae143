use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use subalign::signal::read_matrix;

fn subalign(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subalign"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUBALIGN_PROVIDER_URL")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const BLOCK_DIAG: &str = "4 6 40
1\t1\t1\t0\t0\t0
1\t1\t1\t0\t0\t0
0\t0\t0\t1\t1\t1
0\t0\t0\t1\t1\t1
";

#[test]
fn align_sbaam_block_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.tsv"), BLOCK_DIAG).unwrap();
    fs::write(dir.path().join("t.txt"), "Morgen <eob> Hallo <eob>\n").unwrap();
    let out = subalign(
        &["align", "--method", "sbaam", "--tokens", "t.txt", "--attention", "a.tsv", "-o", "out.srt", "--quiet"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
    assert_eq!(
        fs::read_to_string(dir.path().join("out.srt")).unwrap(),
        "1\n00:00:00,000 --> 00:00:00,080\nMorgen\n\n2\n00:00:00,080 --> 00:00:00,240\nHallo\n"
    );
}

#[test]
fn align_tsv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.tsv"), BLOCK_DIAG).unwrap();
    fs::write(dir.path().join("t.txt"), "a <eob> b <eob>\nx y <eol> z <eob>\n").unwrap();
    let out = subalign(
        &["align", "--method", "dtw", "--tokens", "t.txt", "--line", "1", "--attention", "a.tsv", "--frame-ms", "20", "-o", "-"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "index\tstart_frame\tend_frame\tstart_ms\tend_ms\n1\t0\t3\t0\t60\n2\t3\t6\t60\t120\n"
    );
    assert!(!out.stderr.is_empty(), "table expected on stderr");
}

#[test]
fn align_ctcseg() {
    let dir = tempfile::tempdir().unwrap();
    let p = |x: f64| x.ln();
    fs::write(
        dir.path().join("p.tsv"),
        format!(
            "3 3 0 40\n{}\t{}\t{}\n{}\t{}\t{}\n{}\t{}\t{}\n",
            p(0.05), p(0.9), p(0.05), p(0.05), p(0.05), p(0.9), p(0.9), p(0.05), p(0.05)
        ),
    )
    .unwrap();
    fs::write(dir.path().join("v.tsv"), "0\t<blank>\n1\ta\n2\t<eob>\n").unwrap();
    fs::write(dir.path().join("t.txt"), "a <eob>").unwrap();
    let out = subalign(
        &["align", "--method", "ctcseg", "--tokens", "t.txt", "--posterior", "p.tsv", "--vocab", "v.tsv", "-o", "o.srt", "-q"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("o.srt")).unwrap(), "1\n00:00:00,000 --> 00:00:00,080\na\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.tsv"), BLOCK_DIAG).unwrap();
    fs::write(dir.path().join("t.txt"), "a <eob> b <eob>").unwrap();
    let base = ["align", "--tokens", "t.txt", "-o", "x.srt"];
    let run = |extra: &[&str]| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        subalign(&args, dir.path())
    };
    assert_eq!(run(&["--method", "ctcseg", "--posterior", "a.tsv"]).status.code(), Some(2));
    assert_eq!(run(&["--method", "sbaam", "--attention", "a.tsv", "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["--method", "sbaam", "--posterior", "a.tsv"]).status.code(), Some(2));
    assert_eq!(subalign(&["frobnicate"], dir.path()).status.code(), Some(2));

    let missing = run(&["--method", "dtw", "--attention", "nope.tsv"]);
    assert_eq!(missing.status.code(), Some(1));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.contains("nope.tsv"));

    // three blocks cannot fit in two frames
    fs::write(dir.path().join("t3.txt"), "a <eob> b <eob> c <eob>").unwrap();
    fs::write(dir.path().join("small.tsv"), "6 2 40\n1 0\n1 0\n0 1\n0 1\n1 1\n1 1\n").unwrap();
    let out = subalign(&["align", "--method", "dtw", "--tokens", "t3.txt", "--attention", "small.tsv", "-o", "x.srt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("x.srt").exists());
}

#[test]
fn gen_is_deterministic_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["gen", "--blocks", "4", "--frames", "60", "--noise", "0.05", "--seed", "9", "-o", out];
    assert!(subalign(&args("one"), dir.path()).status.success());
    assert!(subalign(&args("two"), dir.path()).status.success());
    for f in ["attention.tsv", "tokens.txt", "spec.json"] {
        assert_eq!(
            fs::read(dir.path().join("one").join(f)).unwrap(),
            fs::read(dir.path().join("two").join(f)).unwrap(),
            "{f}"
        );
    }
    let a = read_matrix(dir.path().join("one/attention.tsv")).unwrap().into_attention().unwrap();
    let spec: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("one/spec.json")).unwrap()).unwrap();
    assert_eq!(a.frames(), 60);
    assert_eq!(spec["tokens"].as_u64().unwrap() as usize, a.tokens());
    assert_eq!(spec["seed"], 9);
    assert_eq!(spec["ends"].as_array().unwrap().len(), 4);

    let out = subalign(&["gen", "--blocks", "3", "--frames", "2", "-o", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

const TWO_BLOCKS: &str = "1\n00:00:01,000 --> 00:00:02,000\nA\n\n2\n00:00:03,000 --> 00:00:04,000\nB\n";
const EDITED: &str = "1\n00:00:01,000 --> 00:00:02,000\nA\n\n2\n00:00:02,800 --> 00:00:04,100\nB\n";

#[test]
fn eval_shift() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.srt"), TWO_BLOCKS).unwrap();
    fs::write(dir.path().join("r.srt"), EDITED).unwrap();
    let same = json(&subalign(&["eval", "shift", "--hyp", "h.srt", "--ref", "h.srt", "-q"], dir.path()));
    assert_eq!(same["edited_start_pct"], 0.0);
    assert_eq!(same["edited_end_pct"], 0.0);
    assert_eq!(same["mean_abs_shift_ms"], Value::Null);

    let out = subalign(&["eval", "shift", "--hyp", "h.srt", "--ref", "r.srt", "--threshold-ms", "120", "-q"], dir.path());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(
        text,
        "{\"blocks\":2,\"edited_avg_pct\":25.0,\"edited_end_pct\":0.0,\"edited_start_pct\":50.0,\"mean_abs_shift_ms\":200.0,\"std_abs_shift_ms\":0.0,\"threshold_ms\":120}\n"
    );
    assert!(out.stderr.is_empty());
}

#[test]
fn eval_conformity_and_kappa() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.srt"),
        format!("1\n00:00:00,000 --> 00:00:02,000\n{}\n", "a".repeat(42)),
    )
    .unwrap();
    let r = json(&subalign(&["eval", "conformity", "c.srt", "-q"], dir.path()));
    assert_eq!((r["cpl_conform_pct"].as_f64(), r["cps_conform_pct"].as_f64()), (Some(100.0), Some(100.0)));
    let r = json(&subalign(&["eval", "conformity", "c.srt", "--cpl", "41", "-q"], dir.path()));
    assert_eq!(r["cpl_conform_pct"], 0.0);

    fs::write(dir.path().join("a.txt"), "1 1 0 0\n").unwrap();
    fs::write(dir.path().join("b.txt"), "yes no yes no\n").unwrap();
    let r = json(&subalign(&["eval", "kappa", "--a", "a.txt", "--b", "b.txt", "-q"], dir.path()));
    assert_eq!(r["kappa"], 0.0);
    assert_eq!(r["n"], 4);
    fs::write(dir.path().join("short.txt"), "1\n").unwrap();
    let out = subalign(&["eval", "kappa", "--a", "a.txt", "--b", "short.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

const EMBEDDINGS: &str = r#"{"kind":"text","key":"A","vector":[1,0]}
{"kind":"text","key":"B","vector":[0,1]}
{"kind":"audio","key":"talk.wav:1000:2000","vector":[2,0]}
{"kind":"audio","key":"talk.wav:3000:4000","vector":[0,3]}
{"kind":"audio","key":"talk.wav:2800:4100","vector":[1,1]}
"#;

#[test]
fn eval_subsonar_file_provider() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.jsonl"), EMBEDDINGS).unwrap();
    fs::write(dir.path().join("h.srt"), TWO_BLOCKS).unwrap();
    fs::write(dir.path().join("r.srt"), EDITED).unwrap();
    let r = json(&subalign(
        &["eval", "subsonar", "--srt", "h.srt", "--srt", "r.srt", "--audio", "talk.wav", "--lang", "de", "--embeddings", "e.jsonl", "-q"],
        dir.path(),
    ));
    let s2 = 1.0 / 2f64.sqrt();
    let edited = (1.0 + s2) / 2.0;
    assert_eq!(r["files"][0]["score"], 1.0);
    assert!((r["files"][1]["score"].as_f64().unwrap() - edited).abs() < 1e-12);
    assert!((r["mean_per_file"].as_f64().unwrap() - (1.0 + edited) / 2.0).abs() < 1e-12);
    assert!((r["pooled_mean"].as_f64().unwrap() - (3.0 + s2) / 4.0).abs() < 1e-12);
    assert_eq!(r["blocks"], 4);

    // an audio slice missing from the file names the block
    fs::write(dir.path().join("x.srt"), "1\n00:00:05,000 --> 00:00:06,000\nA\n").unwrap();
    let out = subalign(
        &["eval", "subsonar", "--srt", "x.srt", "--audio", "talk.wav", "--lang", "de", "--embeddings", "e.jsonl"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("block 1"));

    let out = subalign(&["eval", "subsonar", "--srt", "h.srt", "--audio", "talk.wav", "--lang", "de"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_subsonar_remote_provider_from_env() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let server = std::thread::spawn(move || {
        // one text and one audio request for the single block
        for _ in 0..2 {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut len = 0;
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            assert!(request_line.starts_with("POST /embed "), "{request_line}");
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line.trim().is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let req: Value = serde_json::from_slice(&body).unwrap();
            let vector = if req["kind"] == "text" { "[1,0]" } else { "[1,1]" };
            let reply = format!("{{\"vector\":{vector}}}");
            write!(
                reader.get_mut(),
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
        }
    });
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.srt"), "1\n00:00:00,000 --> 00:00:01,000\nHallo\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_subalign"))
        .args(["eval", "subsonar", "--srt", "h.srt", "--audio", "talk.wav", "--lang", "de", "-q"])
        .current_dir(dir.path())
        .env("SUBALIGN_PROVIDER_URL", &url)
        .output()
        .unwrap();
    server.join().unwrap();
    let r = json(&out);
    assert!((r["pooled_mean"].as_f64().unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
}
