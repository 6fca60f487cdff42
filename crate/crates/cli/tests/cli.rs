use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udcdma")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const C4X5: &str = "+++++\n+-+--\n++--+\n+--++\n";

#[test]
fn gen_prints_figures_and_csv() {
    let o = run(&["gen", "--l", "4", "--variant", "eq14", "--format", "figure"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), C4X5);

    let o = run(&["gen", "--l", "8", "--variant", "eq14", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 8);
    assert!(lines.iter().all(|l| l.split(',').count() == 13));

    let o = run(&["gen", "--l", "8", "--variant", "eq10"]);
    assert_eq!(stdout(&o), include_str!("../../core/fixtures/c8x13_eq10.txt"));
}

#[test]
fn gen_rejects_bad_arguments() {
    assert_eq!(code(&run(&["gen", "--l", "6"])), 2);
    assert_eq!(code(&run(&["gen", "--l", "8", "--variant", "eq12"])), 2);
    assert_eq!(code(&run(&["gen"])), 2);
    assert_eq!(code(&run(&["nonsense"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_modes() {
    assert_eq!(code(&run(&["verify", "--l", "8", "--variant", "eq14", "--mode", "exhaustive"])), 0);
    assert_eq!(code(&run(&["verify", "--l", "8", "--variant", "eq10"])), 0);
    let o = run(&["verify", "--l", "16", "--variant", "eq14", "--mode", "sampled", "--trials", "200000", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("verdict=pass"));
    // exhaustive enumeration cannot handle K = 33
    assert_eq!(code(&run(&["verify", "--l", "16", "--mode", "exhaustive"])), 2);
}

#[test]
fn verify_reports_witness_for_duplicate_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dup.txt");
    // column 5 repeats column 1
    std::fs::write(&path, "++++++\n+-+--+\n++--++\n+--+++\n").unwrap();
    let o = run(&["verify", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("verdict=fail"), "{out}");
    assert!(out.contains("witness z="), "{out}");

    let csv = dir.path().join("c4.csv");
    std::fs::write(&csv, "1,1,1,1,1\n1,-1,1,-1,-1\n1,1,-1,-1,1\n1,-1,-1,1,1\n").unwrap();
    assert_eq!(code(&run(&["verify", "--input", csv.to_str().unwrap(), "--mode", "mitm"])), 0);
}

#[test]
fn dmin_reports_witness() {
    let o = run(&["dmin", "--l", "8", "--variant", "eq10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "d_min=4 witness=(9,12)");
    let o = run(&["dmin", "--l", "8", "--variant", "eq14"]);
    assert!(stdout(&o).starts_with("d_min=4"));
    let o = run(&["dmin", "--l", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("d_min=4"));
    assert_eq!(code(&run(&["dmin", "--l", "16"])), 2);
}

#[test]
fn appendix_counts() {
    let o = run(&["appendix-c"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("pairs=7140 forbidden=308 classes=22 extensions_blocked=115/115"));
    let o = run(&["appendix-c", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pairs"], 7140);
    assert_eq!(v["forbidden"], 308);
    assert_eq!(v["classes"], 22);
    assert_eq!(v["extensions_blocked"], 115);
    assert_eq!(v["b8_plus"], 120);
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.join(","), "decoder,L,K,ebn0_db,bits,errors,ber,wall_seconds");
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn ber_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ml.csv");
    let args = ["ber", "--l", "4", "--variant", "eq14", "--decoder", "ml", "--ebn0", "0:2:12", "--bits", "20000", "--seed", "1"];
    let o = run(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 7);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[..3], ["ml", "4", "5"]);
        assert_eq!(row[3].parse::<f64>().unwrap(), 2.0 * i as f64);
        let (bits, errors): (u64, u64) = (row[4].parse().unwrap(), row[5].parse().unwrap());
        assert!(bits >= 20000);
        let ber: f64 = row[6].parse().unwrap();
        assert!((ber - errors as f64 / bits as f64).abs() <= 1e-6 * ber.max(1e-300));
    }

    let manifest = dir.path().join("ml.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "ber");
    assert_eq!(m["config"]["seed"], 1);
    assert_eq!(m["config"]["min_bits"], 20000);
    assert_eq!(m["config"]["max_errors"], 400);

    // same seed, same numbers; a rerun from the manifest matches too
    let again = dir.path().join("again.csv");
    assert_eq!(code(&run(&[&args[..], &["--out", again.to_str().unwrap()]].concat())), 0);
    let replay = dir.path().join("replay.csv");
    assert_eq!(code(&run(&["ber", "--from-manifest", manifest.to_str().unwrap(), "--out", replay.to_str().unwrap()])), 0);
    let strip = |rows: Vec<Vec<String>>| rows.into_iter().map(|r| r[..7].to_vec()).collect::<Vec<_>>();
    assert_eq!(strip(read_rows(&again)), strip(read_rows(&out)));
    assert_eq!(strip(read_rows(&replay)), strip(read_rows(&out)));
}

#[test]
fn ber_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = out.to_str().unwrap();
    assert_eq!(code(&run(&["ber", "--l", "4", "--bits", "0", "--out", o])), 2);
    assert_eq!(code(&run(&["ber", "--l", "4", "--ebn0", "0:2", "--out", o])), 2);
    assert_eq!(code(&run(&["ber", "--l", "4", "--ebn0", "4:1:0", "--out", o])), 2);
    // ML over 2^33 hypotheses is a budget violation
    assert_eq!(code(&run(&["ber", "--l", "16", "--decoder", "ml", "--out", o])), 1);
    // the recursive decoder needs a noiseless channel
    assert_eq!(code(&run(&["ber", "--l", "8", "--decoder", "nda", "--out", o])), 2);
    assert!(!out.exists());
}

#[test]
fn ber_noiseless_has_no_errors() {
    let dir = tempfile::tempdir().unwrap();
    for dec in ["nda", "fda", "ml"] {
        let out = dir.path().join(format!("{dec}.csv"));
        let o = run(&["ber", "--l", "8", "--decoder", dec, "--noiseless", "--ebn0", "5", "--bits", "50000", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{dec}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = read_rows(&out);
        assert_eq!(rows[0][5], "0", "{dec}");
    }
}

#[test]
fn manifest_flag_for_stdout_commands() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let o = run(&["--manifest", m.to_str().unwrap(), "dmin", "--l", "8", "--variant", "eq10"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(v["command"], "dmin");
    assert_eq!(v["config"]["L"], 8);
    assert_eq!(v["outputs"]["d_min"], 4);
    assert_eq!(v["outputs"]["witness"], serde_json::json!([9, 12]));
}
