//! One function per subcommand; each returns the tables to emit and the exit code.

use std::path::{Path, PathBuf};

use grover_qss::adversary::{detection_report, table1_report, DetectionReport, TABLE1_DEFAULT_MARKED};
use grover_qss::grover::{
    closed_form_trace, grover_iterate, iteration_table, success_at_fraction, truncate_percent, SearchSpec,
    REFERENCE_SUCCESS_PERCENT,
};
use grover_qss::protocol::{run_session, session_schedule, OutcomeLabel, Scenario};
use grover_qss::statevec::{basis_label, Amplitude, MarkedSet, StateVector, MAX_QUBITS};

use crate::error::{CliError, EXIT_CHEAT, EXIT_OK};
use crate::records::{Column, Kind, Table};
use crate::scenario::{load_scenario, StrategySpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub tables: Vec<Table>,
    pub exit: i32,
}

impl Output {
    fn ok(tables: Vec<Table>) -> Self {
        Self { tables, exit: EXIT_OK }
    }
}

fn cols(spec: &[(&str, Kind)]) -> Vec<Column> {
    spec.iter().map(|(n, k)| Column::new(n, *k)).collect()
}

/// Closed-form amplitudes per iteration next to a full state-vector simulation.
/// Without `trace` only the final iteration is emitted.
pub fn grover(qubits: usize, marked: &[String], iterations: usize, trace: bool) -> Result<Output, CliError> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(CliError::Usage(format!("--qubits must lie in 1..={MAX_QUBITS}")));
    }
    let marked = MarkedSet::parse_entries(qubits, marked)?;
    let spec = SearchSpec::for_qubits(qubits, marked.len() as u64)?;
    let closed = closed_form_trace(spec, iterations);

    let mut table = Table::new(
        "grover",
        cols(&[
            ("iteration", Kind::Int),
            ("marked_amplitude", Kind::Float),
            ("unmarked_amplitude", Kind::Float),
            ("success", Kind::Float),
            ("simulated_success", Kind::Float),
        ]),
    );
    let uniform = StateVector::uniform(qubits)?;
    let mut state = uniform.clone();
    for record in &closed.records {
        if record.iteration > 0 {
            state = grover_iterate(&state, &marked, &uniform)?;
        }
        if trace || record.iteration == iterations {
            let simulated: f64 = marked.indices().iter().map(|&i| state.amplitude(i).norm_sqr()).sum();
            table.push(vec![
                record.iteration.into(),
                record.marked.into(),
                record.unmarked.into(),
                record.success.into(),
                simulated.into(),
            ]);
        }
    }
    Ok(Output::ok(vec![table]))
}

/// Grid `i / samples` for `i = 1..=samples` plus the certainty point 1/4.
pub fn sweep_fractions(samples: usize) -> Result<Vec<f64>, CliError> {
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let mut xs: Vec<f64> = (1..=samples).map(|i| i as f64 / samples as f64).collect();
    xs.push(0.25);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

pub fn sweep(samples: usize) -> Result<Output, CliError> {
    let mut table =
        Table::new("sweep", cols(&[("fraction", Kind::Float), ("success", Kind::Float), ("failure", Kind::Float)]));
    for x in sweep_fractions(samples)? {
        let p = success_at_fraction(x);
        table.push(vec![x.into(), p.into(), (1.0 - p).into()]);
    }
    Ok(Output::ok(vec![table]))
}

/// Qubit counts covered by the success table.
pub const TABLE2_QUBITS: [usize; 4] = [2, 3, 4, 5];
pub const TABLE2_ITERATIONS: usize = 4;

pub fn table2() -> Result<Output, CliError> {
    let mut table = Table::new(
        "table2",
        cols(&[
            ("qubits", Kind::Int),
            ("iteration", Kind::Int),
            ("success", Kind::Float),
            ("simulated", Kind::Float),
            ("percent", Kind::Float),
            ("reference_percent", Kind::Float),
            ("truncated_percent", Kind::Float),
            ("rendered", Kind::Text),
            ("note", Kind::Text),
        ]),
    );
    for e in iteration_table(&TABLE2_QUBITS, TABLE2_ITERATIONS)? {
        let reference = REFERENCE_SUCCESS_PERCENT.iter().find(|(n, k, _, _)| *n == e.qubits && *k == e.iteration);
        let (reference_percent, truncated, rendered) = match reference {
            Some(&(_, _, percent, decimals)) => {
                let t = truncate_percent(e.success, decimals);
                (Some(percent), Some(t), Some(format!("{t:.decimals$}%")))
            }
            None => (None, None, None),
        };
        let note = (e.qubits == 3 && e.iteration == 3).then(|| {
            format!(
                "reference text puts the residual after a third iteration at 95%; computed success {:.2}%, complement {:.2}%",
                e.success * 100.0,
                (1.0 - e.success) * 100.0
            )
        });
        table.push(vec![
            e.qubits.into(),
            e.iteration.into(),
            e.success.into(),
            e.simulated.into(),
            (e.success * 100.0).into(),
            reference_percent.into(),
            truncated.into(),
            rendered.into(),
            note.into(),
        ]);
    }
    Ok(Output::ok(vec![table]))
}

/// `p/q` for dyadic values with small denominators, decimal otherwise.
fn fraction(x: f64) -> String {
    for d in [1i64, 2, 4, 8, 16, 32, 64] {
        let n = (x * d as f64).round();
        if (x * d as f64 - n).abs() < 1e-9 {
            let n = n as i64;
            return if d == 1 { n.to_string() } else { format!("{n}/{d}") };
        }
    }
    format!("{x}")
}

/// Amplitude as `a`, `bi` or `(a+bi)`, with a leading sign when standalone.
fn amplitude_text(a: Amplitude) -> String {
    let re = (a.re.abs() > 1e-12).then_some(a.re);
    let im = (a.im.abs() > 1e-12).then_some(a.im);
    let signed = |x: f64| if x < 0.0 { format!("-{}", fraction(-x)) } else { format!("+{}", fraction(x)) };
    match (re, im) {
        (Some(r), None) => signed(r),
        (None, Some(i)) => format!("{}i", signed(i)),
        (Some(r), Some(i)) => format!("+({}{}i)", fraction(r), signed(i)),
        (None, None) => "+0".into(),
    }
}

fn state_text(s: &StateVector) -> String {
    let terms: Vec<String> = (0..s.dim())
        .filter(|&i| s.amplitude(i).norm() > 1e-12)
        .map(|i| format!("{}|{}>", amplitude_text(s.amplitude(i)), basis_label(i, s.qubits())))
        .collect();
    terms.join(" ")
}

pub fn table1(marked: Option<&[String]>) -> Result<Output, CliError> {
    let marked = match marked {
        Some(entries) => MarkedSet::parse_entries(4, entries)?,
        None => MarkedSet::new(TABLE1_DEFAULT_MARKED.to_vec())?,
    };
    let rows = table1_report(&marked)?;
    let mut summary = Table::new(
        "table1",
        cols(&[
            ("row", Kind::Int),
            ("preparation", Kind::Text),
            ("overlap_re", Kind::Float),
            ("overlap_im", Kind::Float),
            ("shorthand", Kind::Bool),
            ("decoded", Kind::Text),
        ]),
    );
    let mut amplitudes = Table::new(
        "table1_amplitudes",
        cols(&[
            ("row", Kind::Int),
            ("basis", Kind::Text),
            ("amplitude_re", Kind::Float),
            ("amplitude_im", Kind::Float),
        ]),
    );
    for r in &rows {
        let decoded = if r.shorthand { "-P_w|S1>".to_string() } else { state_text(&r.decoded) };
        summary.push(vec![
            r.row.into(),
            r.preparation.to_string().into(),
            r.overlap.re.into(),
            r.overlap.im.into(),
            r.shorthand.into(),
            decoded.into(),
        ]);
        for i in 0..r.decoded.dim() {
            let a = r.decoded.amplitude(i);
            if a.norm() > 1e-12 {
                amplitudes.push(vec![r.row.into(), basis_label(i, 4).into(), a.re.into(), a.im.into()]);
            }
        }
    }
    Ok(Output::ok(vec![summary, amplitudes]))
}

#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

fn apply_overrides(sc: &mut Scenario, o: &RunOverrides) -> Result<(), CliError> {
    if let Some(t) = o.trials {
        if t == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        sc.trials = t;
    }
    if let Some(s) = o.seed {
        sc.seed = s;
    }
    Ok(())
}

/// Where the event log goes when not given explicitly: next to `--out`, or next
/// to the scenario file.
pub fn default_event_log(scenario: &Path, out: Option<&Path>) -> PathBuf {
    match out {
        Some(o) => {
            let mut s = o.as_os_str().to_owned();
            s.push(".events.tsv");
            PathBuf::from(s)
        }
        None => scenario.with_extension("events.tsv"),
    }
}

pub fn protocol(scenario: &Path, overrides: &RunOverrides, events: &Path) -> Result<Output, CliError> {
    let mut sc = load_scenario(scenario)?;
    apply_overrides(&mut sc, overrides)?;
    let outcome = run_session(&sc)?;
    std::fs::write(events, outcome.first_transcript.to_event_log())?;

    let stats = outcome.stats;
    let mut counts =
        Table::new("outcomes", cols(&[("label", Kind::Text), ("count", Kind::Int), ("frequency", Kind::Float)]));
    for label in OutcomeLabel::ALL {
        counts.push(vec![label.name().into(), stats.count(label).into(), stats.frequency(label).into()]);
    }

    let per_set = sc.per_set_success()?;
    let sets = session_schedule(1, per_set)?.sets_per_unit;
    let mut summary = Table::new(
        "summary",
        cols(&[
            ("scheme", Kind::Text),
            ("qubits", Kind::Int),
            ("adversary", Kind::Text),
            ("trials", Kind::Int),
            ("seed", Kind::Int),
            ("per_set_success", Kind::Float),
            ("sets_per_unit", Kind::Int),
            ("cheating_detected", Kind::Bool),
            ("event_log", Kind::Text),
        ]),
    );
    summary.push(vec![
        sc.scheme.name().into(),
        sc.qubits.into(),
        sc.adversary.to_string().into(),
        sc.trials.into(),
        // seeds are u64; the column is signed, so keep the bit pattern
        (sc.seed as i64).into(),
        per_set.into(),
        (sets as i64).into(),
        stats.cheating_detected().into(),
        events.display().to_string().into(),
    ]);
    let exit = if stats.cheating_detected() { EXIT_CHEAT } else { EXIT_OK };
    Ok(Output { tables: vec![counts, summary], exit })
}

fn report_tables(r: &DetectionReport) -> Vec<Table> {
    let mut detection = Table::new(
        "detection",
        cols(&[
            ("strategy", Kind::Text),
            ("qubits", Kind::Int),
            ("marked", Kind::Int),
            ("detection", Kind::Float),
            ("undetected", Kind::Float),
            ("honest_miss", Kind::Float),
            ("cheater_success", Kind::Float),
            ("space_size", Kind::Float),
            ("mc_trials", Kind::Int),
            ("mc_detected", Kind::Int),
            ("mc_estimate", Kind::Float),
            ("mc_sigma", Kind::Float),
            ("mc_within_3sigma", Kind::Bool),
        ]),
    );
    let mc = r.monte_carlo;
    detection.push(vec![
        r.strategy.clone().into(),
        r.qubits.into(),
        r.marked.into(),
        r.detection.into(),
        r.undetected.into(),
        r.honest_miss.into(),
        r.cheater_success.into(),
        r.space_size.map(|s| s as f64).into(),
        mc.map(|m| m.trials).into(),
        mc.map(|m| m.detected).into(),
        mc.map(|m| m.estimate).into(),
        mc.map(|m| m.sigma).into(),
        mc.map(|m| m.within_three_sigma).into(),
    ]);
    let mut claims = Table::new(
        "claims",
        cols(&[("quantity", Kind::Text), ("claimed", Kind::Float), ("computed", Kind::Float), ("agrees", Kind::Bool)]),
    );
    for c in &r.claims {
        claims.push(vec![c.quantity.clone().into(), c.claimed.into(), c.computed.into(), c.agrees().into()]);
    }
    vec![detection, claims]
}

/// Exact and sampled detection statistics. The strategy comes from `strategy`
/// when given, otherwise from the scenario's adversary.
pub fn cheat(scenario: &Path, strategy: Option<&StrategySpec>, overrides: &RunOverrides) -> Result<Output, CliError> {
    let mut sc = load_scenario(scenario)?;
    apply_overrides(&mut sc, overrides)?;
    let strategy = match strategy {
        Some(spec) => spec.build(sc.qubits).map_err(CliError::Usage)?,
        None => sc.adversary.clone(),
    };
    strategy.check_dimensions(&sc)?;
    let report = detection_report(&sc, &strategy, sc.trials, sc.seed)?;
    Ok(Output::ok(report_tables(&report)))
}
