use grover_qss::adversary::{exact_detection_probability, CheatStrategy, GuessChoice};
use grover_qss::grover::{closed_form_trace, success_at_fraction, IterationRecord, SearchSpec};
use grover_qss::protocol::{collective_decode, dealer_prepare, Scenario};
use grover_qss::statevec::{basis_label, inner_product, Letter, MarkedSet, ProductState};
use serde::Serialize;

pub const DEMO_QUBITS: usize = 4;
/// Trace plots get unwieldy beyond this.
pub const MAX_TRACE_ITERATIONS: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub fraction: Vec<f64>,
    pub success: Vec<f64>,
}

pub fn success_curve(samples: usize) -> Result<Curve, String> {
    if !(2..=10_000).contains(&samples) {
        return Err("samples must lie in 2..=10000".into());
    }
    let mut fraction: Vec<f64> = (1..=samples).map(|i| i as f64 / samples as f64).collect();
    fraction.push(0.25);
    fraction.sort_by(f64::total_cmp);
    fraction.dedup();
    let success = fraction.iter().map(|&x| success_at_fraction(x)).collect();
    Ok(Curve { fraction, success })
}

pub fn iteration_trace(qubits: usize, marked: u64, iterations: usize) -> Result<Vec<IterationRecord>, String> {
    if iterations > MAX_TRACE_ITERATIONS {
        return Err(format!("at most {MAX_TRACE_ITERATIONS} iterations"));
    }
    let spec = SearchSpec::for_qubits(qubits, marked).map_err(|e| e.to_string())?;
    Ok(closed_form_trace(spec, iterations).records)
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub basis: String,
    pub probability: f64,
    pub marked: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decode {
    pub guess: String,
    pub overlap_re: f64,
    pub overlap_im: f64,
    pub outcomes: Vec<Outcome>,
    /// Probability of an outcome outside the marked set.
    pub detection: f64,
}

/// Letters separated by commas or spaces: `plus`, `minus`, `plus_i`, `minus_i`
/// or `+`, `-`, `+i`, `-i`.
pub fn parse_guess(text: &str) -> Result<ProductState, String> {
    let letters = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(Letter::parse)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    if letters.len() != DEMO_QUBITS {
        return Err(format!("guess needs {DEMO_QUBITS} letters, got {}", letters.len()));
    }
    ProductState::new(letters).map_err(|e| e.to_string())
}

pub fn decode_explorer(guess: &str, marked: &str) -> Result<Decode, String> {
    let guess = parse_guess(guess)?;
    let entries: Vec<&str> = marked.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let marked = MarkedSet::parse_entries(DEMO_QUBITS, &entries).map_err(|e| e.to_string())?;
    let sc = Scenario::multi_marked(DEMO_QUBITS, marked).map_err(|e| e.to_string())?;

    let register = dealer_prepare(&sc).map_err(|e| e.to_string())?;
    let overlap = inner_product(&guess.expand(), &register).map_err(|e| e.to_string())?;
    let decoded = collective_decode(&register, &guess).map_err(|e| e.to_string())?;
    let outcomes = decoded
        .probabilities()
        .into_iter()
        .enumerate()
        .map(|(i, p)| Outcome { basis: basis_label(i, DEMO_QUBITS), probability: p, marked: sc.marked.contains(i) })
        .collect();
    let strategy = CheatStrategy::GuessDiffusion { guess: GuessChoice::Fixed(guess.clone()) };
    let report = exact_detection_probability(&sc, &strategy).map_err(|e| e.to_string())?;
    Ok(Decode {
        guess: guess.to_string(),
        overlap_re: overlap.re,
        overlap_im: overlap.im,
        outcomes,
        detection: report.detection,
    })
}
