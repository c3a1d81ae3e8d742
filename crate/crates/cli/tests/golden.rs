use std::path::{Path, PathBuf};
use std::process::Command;

use fieldrank_cli::{parse, run, Mode, Options};

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn streams() -> Vec<(PathBuf, Mode)> {
    let mut out: Vec<(PathBuf, Mode)> = std::fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "stream"))
        .map(|p| {
            let stem = p.file_stem().unwrap().to_str().unwrap().to_owned();
            let mode = stem.split('.').nth(1).unwrap().parse().unwrap();
            (p, mode)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn golden_outputs_match() {
    let all = streams();
    assert!(all.len() >= 8);
    for (path, mode) in all {
        let text = std::fs::read_to_string(&path).unwrap();
        let stream = parse(&text).unwrap();
        let opts = Options {
            verify: true,
            ..Options::default()
        };
        let got = run(&stream, mode, &opts).unwrap().render();
        let want = std::fs::read_to_string(path.with_extension("out")).unwrap();
        assert_eq!(got, want, "{}", path.display());
    }
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fieldrank"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn binary_runs_are_byte_identical() {
    for (path, _) in streams() {
        let p = path.to_str().unwrap();
        let mode_name = path
            .file_stem()
            .unwrap()
            .to_str()
            .unwrap()
            .split('.')
            .nth(1)
            .unwrap()
            .to_owned();
        let args = [
            "--mode", &mode_name, "--input", p, "--seed", "42", "--stats",
        ];
        let a = binary(&args);
        let b = binary(&args);
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("fieldrank-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.stream");
    std::fs::write(&bad, "matrix 3\nbegin\nentry 0 1 5\n").unwrap();
    let out = binary(&["--mode", "rank", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let graph = golden_dir().join("path.match-general.stream");
    let out = binary(&["--mode", "rank", "--input", graph.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = binary(&["--mode", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));

    // in GF(5) the random Tutte values are often degenerate
    let churn = dir.join("churn.stream");
    let mut rng = fieldrank::FieldRng::new(3);
    let mut present = std::collections::BTreeSet::new();
    let mut text = String::from("graph 10\nbegin\n");
    for _ in 0..60 {
        let (u, v) = (rng.index(10) + 1, rng.index(10) + 1);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        let sign = if present.remove(&key) {
            "-"
        } else {
            present.insert(key);
            "+"
        };
        text.push_str(&format!("{sign} {} {}\n", key.0, key.1));
    }
    std::fs::write(&churn, &text).unwrap();
    let mut codes = Vec::new();
    for seed in 0..8 {
        let s = seed.to_string();
        let args = [
            "--mode",
            "match-general",
            "--input",
            churn.to_str().unwrap(),
            "--prime",
            "5",
            "--seed",
            &s,
            "--verify",
        ];
        codes.push(binary(&args).status.code());
    }
    assert!(codes.iter().all(|c| *c == Some(0) || *c == Some(2)));
    assert!(codes.contains(&Some(2)), "{codes:?}");

    let dot = dir.join("g.dot");
    let sub = golden_dir().join("ones.submatrix.stream");
    let out = binary(&[
        "--mode",
        "submatrix",
        "--input",
        sub.to_str().unwrap(),
        "--dump-gadget-dot",
        dot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&dot)
        .unwrap()
        .starts_with("graph gadget {"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn stats_block_is_json() {
    let path = golden_dir().join("ones.submatrix.stream");
    let out = binary(&[
        "--mode",
        "submatrix",
        "--input",
        path.to_str().unwrap(),
        "--stats",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let json_start = text.find('{').unwrap();
    let v: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(v["updates"], 10);
    assert!(v["counters"]["max_probes"].as_u64().unwrap() <= 5);
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_fieldrank"))
        .args(["--mode", "combi"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"bipartite 2 2\nbegin\n+ 1 1\n- 1 1\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "edges=1-1\nedges=\n"
    );
}
