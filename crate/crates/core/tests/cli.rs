use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_growthforge");
const N2: &str = r#"{"family":"polylog","t":"2"}"#;

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("GROWTHFORGE_THREADS");
    if let Some(t) = threads {
        cmd.env("GROWTHFORGE_THREADS", t);
    }
    cmd.output().unwrap()
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.path().is_file())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn construct_outputs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("target.json");
    fs::write(&target, r#"{"family":"polylog","t":"2","s":"1"}"#).unwrap();
    let target = target.to_str().unwrap();
    let mut runs = Vec::new();
    for (name, threads) in [("one", Some("1")), ("four", Some("4")), ("default", None)] {
        let out = tmp.path().join(name);
        let o = run(
            &[
                "construct",
                "--target",
                target,
                "--horizon",
                "96",
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        runs.push((o.stdout, read_dir(&out)));
    }
    let names: Vec<&str> = runs[0].1.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "counts.csv",
            "plan.csv",
            "plan.json",
            "plot.csv",
            "report.json"
        ]
    );
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn composite_and_estimate_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let n3 = r#"{"family":"polylog","t":"3"}"#;
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(
            &[
                "construct",
                "--target",
                N2,
                "--target",
                n3,
                "--horizon",
                "48",
                "--out",
                dir.to_str().unwrap(),
            ],
            Some(threads),
        );
        assert!(matches!(o.status.code(), Some(0 | 2)));
        let o = run(
            &[
                "estimate",
                "--system",
                "doubling:256",
                "--out",
                dir.join("est").to_str().unwrap(),
            ],
            Some(threads),
        );
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(read_dir(&a), read_dir(&b));
    assert_eq!(read_dir(&a.join("est")), read_dir(&b.join("est")));
    assert!(a.join("plan_stage2.json").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["growth", "--target", N2, "--against", N2], None)
            .status
            .code(),
        Some(0)
    );
    let tab = r#"{"family":"tabulated","values":[1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16]}"#;
    let o = run(&["growth", "--target", tab], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("bjp: C = 2"));

    assert_eq!(
        run(&["growth", "--target", "{not json"], None)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["construct", "--target", N2, "--L", "x"], None)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["growth", "--target", N2], Some("zero")).status.code(),
        Some(1)
    );
    let o = run(
        &["construct", "--target", r#"{"family":"polylog","t":"3/2"}"#],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis"));

    // Flat between multiples of 8: a sawtooth against n^2 with no trend.
    let saw: Vec<String> = (1..=64u64)
        .map(|n| (n / 8 * 8).max(1).pow(2).to_string())
        .collect();
    let tab = format!(r#"{{"family":"tabulated","values":[{}]}}"#, saw.join(","));
    let o = run(
        &[
            "growth",
            "--target",
            &tab,
            "--against",
            N2,
            "--horizon",
            "64",
            "--slack",
            "5/4",
        ],
        None,
    );
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}
