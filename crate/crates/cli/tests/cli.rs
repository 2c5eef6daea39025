use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hybridsat::circuit::dump::parse;
use hybridsat::resource::QubitModel;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridsat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn suite() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances/n12");
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn solve_unit_clause() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "x.cnf", "p cnf 1 1\n1 0\n");
    let o = run(&["solve", "--strategy", "brute", &p]);
    assert_eq!(o.status.code(), Some(10));
    let text = stdout(&o);
    assert!(text.starts_with("SAT\n"));
    assert!(text.contains("witness 1\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(dir.path(), "u.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    assert_eq!(run(&["solve", "--strategy", "promise-ball", &u]).status.code(), Some(20));
    // plain Schöning cannot prove UNSAT
    assert_eq!(run(&["solve", "--strategy", "schoening", "--tries", "5", &u]).status.code(), Some(0));
    let bad = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 x 0\n");
    let o = run(&["solve", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    // qfast-ball without a qubit budget
    assert_eq!(run(&["solve", "--strategy", "qfastball", &u]).status.code(), Some(1));
}

#[test]
fn qfastball_report_schema() {
    let p = suite().into_iter().find(|p| p.to_string_lossy().contains("planted")).unwrap();
    let o = run(&["solve", "--strategy", "qfastball", "--qubits", "64", "--format", "json", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(10));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v.get("r_tilde").is_some() && v.get("oracle_queries").is_some());
    // 64 qubits do not fit r = 1 at n = 12
    assert_eq!(v["r_tilde"], 0);
    assert_eq!(v["oracle_queries"], 0);
}

#[test]
fn bundled_suite_agrees_with_brute_force() {
    let paths = suite();
    assert!(paths.len() >= 15);
    for p in &paths {
        let p = p.to_str().unwrap();
        let want = run(&["solve", "--strategy", "brute", p]).status.code();
        for s in [
            vec!["--strategy", "promise-ball"],
            vec!["--strategy", "fast-ball"],
            vec!["--strategy", "qball"],
            vec!["--strategy", "qfast-ball", "--qubits", "250"],
            vec!["--strategy", "naive", "--m", "4"],
        ] {
            let mut args = vec!["solve"];
            args.extend(s.iter());
            args.push(p);
            assert_eq!(run(&args).status.code(), want, "{p} {s:?}");
        }
    }
}

#[test]
fn solve_is_deterministic() {
    let p = suite()[0].clone();
    let args = ["solve", "--strategy", "schoening-pbs", "--seed", "9", "--format", "csv", p.to_str().unwrap()];
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(stdout(&run(&args))), strip(stdout(&run(&args))));
}

#[test]
fn estimate_table() {
    let o = run(&["estimate", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rd.headers().unwrap().clone();
    for col in ["c", "beta", "f", "exponent_classical", "exponent_hybrid", "r_tilde"] {
        assert!(headers.iter().any(|h| h == col), "missing {col}");
    }
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    let idx = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let first = &rows[0];
    assert_eq!(&first[idx("c")], "0.0");
    let g0: f64 = first[idx("exponent_hybrid")].parse().unwrap();
    assert!((g0 - 0.415037).abs() < 1e-6);
    let dantsin: f64 = first[idx("exponent_dantsin")].parse().unwrap();
    assert!((dantsin - 0.585).abs() < 1e-3);
    let last = rows.last().unwrap();
    assert_eq!(&last[idx("row")], "threshold_ratio");
    let t: f64 = last[idx("value")].parse().unwrap();
    assert_eq!(format!("{t:.4}"), "0.7381");
    assert_eq!(run(&["estimate", "--c", "0.1,oops"]).status.code(), Some(1));
}

#[test]
fn circuit_stats_verify_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(&suite()[0]).unwrap();
    let f = hybridsat::cnf::parse_dimacs(&src).unwrap();
    // lift the bundled 12-variable instance to n = 16
    let text = hybridsat::cnf::to_dimacs(&hybridsat::cnf::Formula::new(16, f.clauses().to_vec()).unwrap());
    let p = write(dir.path(), "f16.cnf", &text);
    let prefix = dir.path().join("prog");
    let o = run(&["circuit", &p, "--r", "3", "--verify", "all", "--dump", prefix.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cells = v["cells"].as_f64().unwrap();
    assert!(cells <= QubitModel::default().qubit_count(16, 3).unwrap());
    assert_eq!(v["checked_strings"], 27);
    let marked = v["marked"].as_array().unwrap();
    assert_eq!(marked[0], marked[1]);
    for tag in ["qball1", "qball2"] {
        let listing = fs::read_to_string(format!("{}.{tag}.txt", prefix.display())).unwrap();
        parse(&listing).unwrap();
    }
    assert_eq!(run(&["circuit", &p, "--r", "17"]).status.code(), Some(1));
}

#[test]
fn bench_sweep_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let g = run(&["gen", "--kind", "random", "--n", "40", "--clauses", "170", "--count", "12", "--seed", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(g.status.code(), Some(0));
    let files: Vec<String> = stdout(&g).lines().map(String::from).collect();
    let mut manifest = String::new();
    for (i, f) in files.iter().enumerate() {
        // random centers via the instance index
        let center: String = (0..40).map(|b| if (b * 7 + i * 13) % 5 < 2 { '1' } else { '0' }).collect();
        for r in 1..=5 {
            manifest += &format!("{{\"instance\": \"{f}\", \"strategy\": \"promise-ball\", \"radius\": {r}, \"center\": \"{center}\"}}\n");
        }
    }
    let m = write(dir.path(), "manifest.jsonl", &manifest);
    let fits = dir.path().join("fits.csv");
    let o = run(&["bench", &m, "--jobs", "4", "--fits", fits.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 60);
    let mut rd = csv::Reader::from_path(&fits).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    let leaves = rows.iter().find(|r| &r[2] == "leaves").unwrap();
    let growth: f64 = leaves[4].parse().unwrap();
    assert!((3.0 * 0.8..=3.0 * 1.2).contains(&growth), "growth {growth}");

    let empty = write(dir.path(), "empty.jsonl", "");
    let o = run(&["bench", &empty]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
    let bad = write(dir.path(), "bad.jsonl", "{\"instance\": \"x.cnf\"}\n");
    assert_eq!(run(&["bench", &bad]).status.code(), Some(1));
}

#[test]
fn paired_bench_totals() {
    let dir = tempfile::tempdir().unwrap();
    let g = run(&["gen", "--kind", "unsat", "--n", "14", "--clauses", "80", "--count", "4", "--seed", "5", "--out", dir.path().to_str().unwrap()]);
    let files: Vec<String> = stdout(&g).lines().map(String::from).collect();
    let m3 = QubitModel::default().qubit_count(14, 3).unwrap();
    let mut manifest = String::new();
    for f in &files {
        manifest += &format!("{{\"instance\": \"{f}\", \"strategy\": \"fast-ball\", \"radius\": 6}}\n");
        manifest += &format!("{{\"instance\": \"{f}\", \"strategy\": \"qfast-ball\", \"radius\": 6, \"qubits\": {m3}}}\n");
    }
    let m = write(dir.path(), "paired.jsonl", &manifest);
    let o = run(&["bench", &m]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    let work: Vec<u64> = rd.records().map(|r| r.unwrap()[12].parse().unwrap()).collect();
    assert_eq!(work.len(), 2 * files.len());
    // summed over the ensemble; the per-pair claim is acceptance criterion 7
    let (classical, hybrid): (u64, u64) = (work.iter().step_by(2).sum(), work.iter().skip(1).step_by(2).sum());
    assert!(hybrid < classical, "{hybrid} vs {classical}");
}

#[test]
fn cover_command() {
    let o = run(&["cover", "--n", "12", "--rho", "1/4", "--verify", "--centers"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["radius"], 3);
    assert_eq!(v["verified"], true);
    assert_eq!(v["centers"].as_array().unwrap().len(), v["size"].as_u64().unwrap() as usize);

    let cache = tempfile::tempdir().unwrap();
    let cached = |_: ()| {
        let o = bin().args(["cover", "--n", "10", "--rho", "1/3"]).env("HYBRIDSAT_CACHE", cache.path()).output().unwrap();
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    let a = cached(());
    assert_eq!(fs::read_dir(cache.path()).unwrap().count(), 1);
    assert_eq!(cached(()), a);
}
