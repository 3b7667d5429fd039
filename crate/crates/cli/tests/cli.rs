use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdlab")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().into(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn transport_prints_both_routes() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdlab(&["transport", &fixture("three_point.toml"), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("= 3/2").count(), 2, "{text}");
    let plan = fs::read_to_string(dir.path().join("plan.csv")).unwrap();
    assert_eq!(plan, "from,to,mass\na,b,1/2\na,c,1/2\n");
}

#[test]
fn transport_reports_dynamical_distance() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.toml");
    let base = fs::read_to_string(fixture("three_point.toml")).unwrap();
    let extra = "\n[[action]]\ng = 0\ndistances = [[\"0\",\"1\",\"2\"],[\"1\",\"0\",\"1\"],[\"2\",\"1\",\"0\"]]\n\n\
                 [[action]]\ng = 1\ndistances = [[\"0\",\"2\",\"4\"],[\"2\",\"0\",\"2\"],[\"4\",\"2\",\"0\"]]\n";
    fs::write(&file, base + extra).unwrap();
    let o = mdlab(&["transport", file.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("W_F      = 3 (attained at g=1)"), "{}", stdout(&o));
}

#[test]
fn corrupted_tiling_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdlab(&["tile", &fixture("corrupted_tiling.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overlap {3}"), "{}", stdout(&o));
}

#[test]
fn bad_configuration_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "depht = 3\n").unwrap();
    let o = mdlab(&["tile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(&cfg, "depth = 1\n").unwrap();
    assert_eq!(mdlab(&["tile", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let missing = mdlab(&["transport", "/nonexistent/m.toml", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    let o = mdlab(&["independence", "--budget", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_instance_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "n = 3\nportion = 1\n").unwrap();
    let o = mdlab(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the instance cap"));
}

#[test]
fn golden_mean_independence_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdlab(&["independence", "--config", &fixture("golden.toml"), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("independence.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].starts_with("1,2,1,1/2,1/2,true"), "{csv}");
    assert!(rows[2].starts_with("3,8,4,1/2,1/2,true"), "{csv}");
}

#[test]
fn check_with_override_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "n = 3\nportion = 1\nj = [0, 1, 4, 5]\ncheck_samples = 4\n").unwrap();
    let o = mdlab(&["check", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ks=[4, 4]"));
}

#[test]
fn every_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, format!("check_samples = 4\nsamples = 200\nmeasures = \"{}\"\n", fixture("three_point.toml"))).unwrap();
    for cmd in ["tile", "folner", "independence", "transport", "lebesgue", "bound", "check"] {
        let runs: Vec<(String, Vec<(PathBuf, Vec<u8>)>)> = (0..2)
            .map(|i| {
                let out = dir.path().join(format!("{cmd}-{i}"));
                let o = mdlab(&[cmd, "--config", cfg.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()]);
                assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
                (stdout(&o), files(&out))
            })
            .collect();
        assert!(!runs[0].1.is_empty(), "{cmd} wrote nothing");
        assert_eq!(runs[0], runs[1], "{cmd}");
    }
}

#[test]
fn seed_changes_sampled_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "check_samples = 3\n").unwrap();
    let read = |seed: &str| {
        let out = dir.path().join(seed);
        let o = mdlab(&["check", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        fs::read(out.join("check.csv")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}
