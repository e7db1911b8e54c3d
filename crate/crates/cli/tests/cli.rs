use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use concentra::output::Report;
use concentra::selftest;
use concentra::tensor_io::{read_tensor, write_tensor};
use concentra::ExperimentConfig;
use concentra_core::chaos::CoefficientTensor;
use concentra_core::report::Verdict;
use tempfile::TempDir;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_concentra"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn load_report(path: &Path) -> Report {
    Report::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rows<'a>(
    r: &'a Report,
    result: &str,
    quantity: &str,
) -> Vec<&'a concentra_core::report::BoundRow> {
    r.results
        .iter()
        .filter(|e| e.name == result)
        .flat_map(|e| e.report.as_ref().unwrap().rows.iter())
        .filter(|row| row.quantity == quantity)
        .collect()
}

const GAUSS_CLASS_M: &str = r#"
kind = "class-m-check"
seed = 1
[class_m]
m = 1.0
sigma_sq = 1.0
distribution = { kind = "gaussian", mean = 0.0, sd = 1.0 }
grid = { lo = 1.0, hi = 6.0, points = 50 }
"#;

#[test]
fn class_m_gaussian_run_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "g.toml", GAUSS_CLASS_M);
    let out = bin(&["run", "--config", &cfg, "--out", "res"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = load_report(&dir.path().join("res/class-m-check.json"));
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.timing.is_some());
    let csv = fs::read_to_string(dir.path().join("res/class-m-check.csv")).unwrap();
    assert!(csv.starts_with('#'));
    assert!(csv.contains(
        "result,quantity,parameter,estimate,std_error,bound_lower,bound_upper,ratio,verdict"
    ));
}

#[test]
fn empty_family_moments_pass() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        r#"
kind = "chaos-moments"
seed = 0
[chaos]
family = []
order = 2
side = 3
[moments]
p_grid = [1.0, 2.0, 4.0]
"#,
    );
    let out = bin(&["run", "--config", &cfg, "--out", "."], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let r = load_report(&dir.path().join("chaos-moments.json"));
    for row in rows(&r, "chaos-moments", "moment") {
        assert_eq!(row.estimate, 0.0);
    }
}

#[test]
fn identity_exact_moments_match_enumeration() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "i.toml",
        r#"
kind = "chaos-moments"
seed = 0
exact = true
[chaos]
family = [{ source = "identity", side = 2 }]
[moments]
p_grid = [1.0, 2.0, 4.0]
growth = false
"#,
    );
    let out = bin(&["run", "--config", &cfg, "--out", "."], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = load_report(&dir.path().join("chaos-moments.json"));
    // Z takes 0 and 2 with probability 1/2 each
    let want = [1.0, 2f64.sqrt(), 8f64.powf(0.25)];
    let got = rows(&r, "chaos-moments", "moment");
    assert_eq!(got.len(), 3);
    for (row, w) in got.iter().zip(want) {
        assert!((row.estimate - w).abs() < 1e-12, "{} vs {w}", row.estimate);
        assert_eq!(row.std_error, 0.0);
    }
}

#[test]
fn check_lists_every_problem() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
kind = "herbst"
seed = 0
[herbst]
distributions = []
function = { form = "coordinate", index = 3 }
c = -1.0
t_grid = []
"#,
    );
    let out = bin(&["check", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    let listed = err
        .lines()
        .filter(|l| l.trim_start().starts_with("- "))
        .count();
    assert!(listed >= 3, "{err}");

    let unknown = write(
        dir.path(),
        "u.toml",
        "kind = \"herbst\"\nseed = 0\nbogus = 1\n",
    );
    let out = bin(&["check", "--config", &unknown], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn manifest_and_report_verbs() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "g.toml", GAUSS_CLASS_M);
    write(
        dir.path(),
        "l.toml",
        r#"
kind = "lsi-ratio"
seed = 0
samples = 5000
[output]
stem = "lsi"
[lsi]
distributions = [{ kind = "gaussian", mean = 0.0, sd = 1.0 }]
function = { form = "coordinate", index = 0 }
lambdas = [0.5]
"#,
    );
    let m = write(dir.path(), "m.txt", "# both\ng.toml\n\nl.toml\n");
    let out = bin(
        &["run", "--manifest", &m, "--out", "res", "--seed", "9"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let lsi = load_report(&dir.path().join("res/lsi.json"));
    assert_eq!(lsi.config.seed, 9);
    assert_eq!(lsi.verdict, Verdict::ReportOnly);

    let out = bin(&["report", "res/lsi.json", "--out", "again"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(
        fs::read(dir.path().join("res/lsi.csv")).unwrap(),
        fs::read(dir.path().join("again/lsi.csv")).unwrap()
    );
}

#[test]
fn tensor_files_feed_runs() {
    let dir = TempDir::new().unwrap();
    let t = CoefficientTensor::new(
        2,
        3,
        vec![1.0, -2.0, 0.0, 0.5, 0.0, 1.0, 0.0, 3.0, -1.0],
        false,
        false,
    )
    .unwrap();
    write_tensor(&dir.path().join("t.txt"), &t, false).unwrap();
    write_tensor(&dir.path().join("t.bin"), &t, true).unwrap();
    assert_eq!(read_tensor(&dir.path().join("t.txt")).unwrap(), t);
    assert_eq!(read_tensor(&dir.path().join("t.bin")).unwrap(), t);
    fs::create_dir(dir.path().join("cfg")).unwrap();
    let mut estimates = Vec::new();
    for (name, path) in [("a", "../t.txt"), ("b", "../t.bin")] {
        let cfg = write(
            &dir.path().join("cfg"),
            &format!("{name}.toml"),
            &format!(
                "kind = \"chaos-moments\"\nseed = 0\nexact = true\n[output]\nstem = \"{name}\"\n[chaos]\nfamily = [{{ source = \"file\", path = \"{path}\" }}]\n[moments]\np_grid = [2.0]\ngrowth = false\n"
            ),
        );
        let out = bin(&["run", "--config", &cfg, "--out", "."], dir.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = load_report(&dir.path().join(format!("{name}.json")));
        estimates.push(rows(&r, "chaos-moments", "moment")[0].estimate);
    }
    // E Z² is the squared Frobenius norm for a decoupled order-2 chaos
    let frob: f64 = t.entries().iter().map(|v| v * v).sum::<f64>().sqrt();
    for e in estimates {
        assert!((e - frob).abs() < 1e-12, "{e} vs {frob}");
    }
}

#[test]
fn oracle_verb_passes() {
    let dir = TempDir::new().unwrap();
    let out = bin(&["oracle"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn selftest_configs_round_trip_and_validate() {
    for cfg in selftest::configs(42) {
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg, "{text}");
        back.validate(Path::new(".")).unwrap();
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert_eq!(n, 9);
}
