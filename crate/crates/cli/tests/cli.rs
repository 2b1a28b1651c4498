use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gqss_cli::records::{layout, parse, serialize, Format, Table, Value};
use gqss_cli::{commands, EXIT_CHEAT, EXIT_OK, EXIT_USAGE};
use grover_qss::protocol::Transcript;

const HONEST: &str = r#"
qubits = 4
initial = ["plus", "plus", "plus", "plus"]
marked = ["0100", "0110", "1000", "1011"]
scheme = "multi-marked"
trials = 2000
seed = 11

[message]
halfA = "left"
halfB = "right"
"#;

fn gqss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqss")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json_tables(o: &Output) -> Vec<Table> {
    parse(&stdout(o), Format::StructuredText, &[]).unwrap()
}

fn f(t: &Table, row: usize, col: &str) -> f64 {
    t.get(row, col).and_then(Value::as_f64).unwrap_or_else(|| panic!("{col} at {row}"))
}

fn find_row(t: &Table, pred: impl Fn(usize) -> bool) -> usize {
    (0..t.rows.len()).find(|&r| pred(r)).expect("row present")
}

#[test]
fn grover_examples() {
    let o = gqss(&["grover", "--qubits", "3", "--marked", "110", "--iterations", "2", "--trace"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let text = stdout(&o);
    assert!(text.starts_with("iteration,marked_amplitude,unmarked_amplitude,success,simulated_success\n"));
    let t =
        &parse(&text, Format::Csv, &layout(&commands::grover(3, &["110".into()], 2, true).unwrap().tables)).unwrap()[0];
    assert_eq!(t.rows.len(), 3);
    assert!((f(t, 2, "success") - 121.0 / 128.0).abs() < 1e-12);
    assert!((f(t, 2, "simulated_success") - 121.0 / 128.0).abs() < 1e-12);

    let o = gqss(&["--format", "structured-text", "grover", "--qubits", "2", "--marked", "10"]);
    let t = &json_tables(&o)[0];
    assert_eq!(t.rows.len(), 1);
    assert!((f(t, 0, "success") - 1.0).abs() < 1e-12);

    let o = gqss(&["--format", "json", "grover", "--qubits", "4", "--marked", "1,2,0011", "--iterations", "0"]);
    assert!((f(&json_tables(&o)[0], 0, "success") - 3.0 / 16.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["grover", "--qubits", "3", "--marked", "1111"],
        vec!["grover", "--qubits", "3"],
        vec!["grover", "--qubits", "three", "--marked", "1"],
        vec!["sweep", "--samples", "1"],
        vec!["table1", "--marked", "1,2,3"],
        vec!["--format", "xml", "table2"],
        vec!["teleport"],
    ] {
        let o = gqss(&args);
        assert_eq!(o.status.code(), Some(EXIT_USAGE), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(gqss(&["--help"]).status.code(), Some(EXIT_OK));
}

#[test]
fn sweep_examples() {
    let o = gqss(&["--format", "structured-text", "sweep", "--samples", "8"]);
    let t = &json_tables(&o)[0];
    let at = |x: f64| f(t, find_row(t, |r| f(t, r, "fraction") == x), "success");
    assert!((at(0.25) - 1.0).abs() < 1e-12);
    assert!((at(1.0) - 1.0).abs() < 1e-12);
    assert!((at(0.125) - 0.78125).abs() < 1e-12);
    // 0.25 is present even when the grid misses it
    let t = &json_tables(&gqss(&["--format", "json", "sweep", "--samples", "5"]))[0];
    assert!((0..t.rows.len()).any(|r| f(t, r, "fraction") == 0.25));
}

#[test]
fn table2_examples() {
    let t = &json_tables(&gqss(&["--format", "json", "table2"]))[0];
    let row = |n: i64, k: i64| {
        find_row(t, |r| t.get(r, "qubits") == Some(&Value::Int(n)) && t.get(r, "iteration") == Some(&Value::Int(k)))
    };
    let r = row(5, 4);
    assert!((f(t, r, "success") - 0.99918).abs() < 1e-5);
    assert_eq!(t.get(r, "rendered").and_then(Value::as_str), Some("99.9%"));
    assert!((f(t, row(2, 1), "success") - 1.0).abs() < 1e-12);
    let r = row(3, 3);
    assert!((f(t, r, "success") - 169.0 / 512.0).abs() < 1e-12);
    assert_eq!(t.get(r, "reference_percent"), Some(&Value::Null));
    assert!(t.get(r, "note").and_then(Value::as_str).unwrap().contains("95%"));
    for r in 0..t.rows.len() {
        if let Some(reference) = t.get(r, "reference_percent").and_then(Value::as_f64) {
            assert_eq!(f(t, r, "truncated_percent"), reference, "row {r}");
        }
    }
}

#[test]
fn table1_examples() {
    let tables = json_tables(&gqss(&["--format", "json", "table1"]));
    let (rows, amps) = (&tables[0], &tables[1]);
    assert_eq!(rows.rows.len(), 10);
    assert_eq!(rows.get(1, "decoded").and_then(Value::as_str), Some("-P_w|S1>"));
    let r = find_row(amps, |r| {
        amps.get(r, "row") == Some(&Value::Int(7)) && amps.get(r, "basis").and_then(Value::as_str) == Some("0001")
    });
    assert!((f(amps, r, "amplitude_re") - 0.375).abs() < 1e-9);
    assert!((f(amps, r, "amplitude_im") - 0.125).abs() < 1e-9);
    assert!(rows.get(6, "decoded").and_then(Value::as_str).unwrap().contains("(3/8+1/8i)|0001>"));

    let tables = json_tables(&gqss(&["--format", "json", "table1", "--marked", "0100,0110,1000,1011"]));
    assert_eq!(
        tables[0].get(0, "decoded").and_then(Value::as_str),
        Some("+1/2|0100> +1/2|0110> +1/2|1000> +1/2|1011>")
    );
}

#[test]
fn protocol_honest_and_intercepted() {
    let dir = tempfile::tempdir().unwrap();
    let honest = scenario(dir.path(), "honest.toml", HONEST);
    let events = dir.path().join("honest.events.tsv");
    let o = gqss(&["--format", "json", "protocol", honest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let tables = json_tables(&o);
    let counts = &tables[0];
    let cheat = find_row(counts, |r| counts.get(r, "label").and_then(Value::as_str) == Some("cheat_signal"));
    assert_eq!(counts.get(cheat, "count"), Some(&Value::Int(0)));
    let log = std::fs::read_to_string(&events).unwrap();
    let transcript = Transcript::parse_event_log(4, &log).unwrap();
    transcript.check_order().unwrap();
    assert_eq!(transcript.to_event_log(), log);

    let fake = format!("{HONEST}\n[adversary]\nkind = \"intercept-resend\"\nfake_marked = [0, 1, 2, 3]\n");
    let path = scenario(dir.path(), "fake.toml", &fake);
    let ev = dir.path().join("custom.tsv");
    let o = gqss(&["protocol", path.to_str().unwrap(), "--events", ev.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CHEAT));
    assert!(ev.exists());

    let o = gqss(&["protocol", honest.to_str().unwrap(), "--trials", "0"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    let zero = scenario(dir.path(), "zero.toml", &HONEST.replace("trials = 2000", "trials = 0"));
    let o = gqss(&["protocol", zero.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`trials`"));
    let o = gqss(&["protocol", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
}

#[test]
fn cheat_examples() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "s.toml", HONEST);
    let p = path.to_str().unwrap();

    let o = gqss(&["--format", "json", "cheat", p, "--strategy", "guess-diffusion", "--guess", "uniform"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let tables = json_tables(&o);
    assert_eq!(f(&tables[0], 0, "space_size"), 256.0);
    assert!((f(&tables[0], 0, "detection") - 0.75).abs() < 1e-12);
    assert_eq!(tables[0].get(0, "mc_within_3sigma"), Some(&Value::Bool(true)));
    assert!(!tables[1].rows.is_empty());

    let o = gqss(&["--format", "json", "cheat", p, "--strategy", "intercept-resend", "--fake", "uniform"]);
    assert_eq!(f(&json_tables(&o)[0], 0, "space_size"), 1820.0);

    let o = gqss(&["--format", "json", "cheat", p, "--strategy", "honest"]);
    assert_eq!(f(&json_tables(&o)[0], 0, "detection"), 0.0);

    for bad in [
        vec!["cheat", p, "--strategy", "teleport"],
        vec!["cheat", p, "--strategy", "guess-diffusion"],
        vec!["cheat", p, "--strategy", "guess-diffusion", "--guess", "plus,minus"],
        vec!["cheat", p, "--strategy", "intercept-resend", "--fake", "1,2"],
        vec!["cheat", p, "--guess", "uniform"],
    ] {
        assert_eq!(gqss(&bad).status.code(), Some(EXIT_USAGE), "{bad:?}");
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "s.toml", HONEST);
    let p = path.to_str().unwrap();
    let ev = dir.path().join("e.tsv");
    let e = ev.to_str().unwrap();
    for format in ["csv", "structured-text"] {
        for args in [
            vec!["--format", format, "--seed", "5", "protocol", p, "--events", e],
            vec!["--format", format, "--seed", "5", "cheat", p, "--strategy", "capture-all"],
            vec!["--format", format, "table1"],
            vec!["--format", format, "table2"],
        ] {
            let a = gqss(&args);
            let log_a = std::fs::read(&ev).ok();
            let b = gqss(&args);
            assert_eq!(a.stdout, b.stdout, "{args:?}");
            assert_eq!(a.status.code(), b.status.code());
            assert_eq!(log_a, std::fs::read(&ev).ok());
        }
    }
    let a = gqss(&["--seed", "5", "protocol", p, "--events", e]);
    let b = gqss(&["--seed", "6", "protocol", p, "--events", e]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = gqss(&["--out", out.to_str().unwrap(), "sweep", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("fraction,success,failure\n"));

    // event log defaults to a sibling of --out
    let s = scenario(dir.path(), "s.toml", HONEST);
    let stats = dir.path().join("stats.csv");
    let o = gqss(&["--out", stats.to_str().unwrap(), "protocol", s.to_str().unwrap(), "--trials", "3"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(dir.path().join("stats.csv.events.tsv").exists());
}

#[test]
fn every_command_round_trips_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "s.toml", HONEST);
    let overrides = commands::RunOverrides { trials: Some(50), seed: Some(1) };
    let outputs = vec![
        commands::grover(5, &["3".into(), "17".into()], 4, true).unwrap(),
        commands::sweep(16).unwrap(),
        commands::table1(None).unwrap(),
        commands::table2().unwrap(),
        commands::protocol(&path, &overrides, &dir.path().join("e.tsv")).unwrap(),
        commands::cheat(&path, None, &overrides).unwrap(),
    ];
    for out in outputs {
        for format in [Format::Csv, Format::StructuredText] {
            let bytes = serialize(&out.tables, format).unwrap();
            let back = parse(std::str::from_utf8(&bytes).unwrap(), format, &layout(&out.tables)).unwrap();
            assert_eq!(back, out.tables, "{format:?}");
        }
    }
}

#[test]
fn bundled_scenarios_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            gqss_cli::scenario::load_scenario(&path).unwrap_or_else(|e| panic!("{e}"));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
