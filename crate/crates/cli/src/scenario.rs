//! TOML scenario files.
//!
//! ```toml
//! qubits = 4
//! initial = ["plus", "plus", "plus", "plus"]
//! marked = ["0100", "0110", "1000", "1011"]   # or integers
//! scheme = "multi-marked"
//! trials = 1000
//! seed = 7
//! adversary = "honest"
//!
//! [message]
//! halfA = "left"
//! halfB = "right"
//! ```
//!
//! A non-honest adversary is a table:
//!
//! ```toml
//! [adversary]
//! kind = "intercept-resend"       # guess-diffusion | intercept-resend | capture-all
//! fake_marked = [0, 1, 2, 3]      # or "uniform"
//! fake_initial = ["plus", "minus", "plus", "minus"]   # optional
//! # guess = "uniform" or a letter list (guess-diffusion)
//! # policy = "measure-immediately" (capture-all)
//! ```

use std::path::Path;

use grover_qss::adversary::{CapturePolicy, CheatStrategy, FakeChoice, GuessChoice};
use grover_qss::protocol::{Message, Scenario, Scheme};
use grover_qss::statevec::{MarkedSet, ProductState};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawIndex {
    Int(u64),
    Text(String),
}

impl RawIndex {
    fn into_text(self) -> String {
        match self {
            RawIndex::Int(i) => i.to_string(),
            RawIndex::Text(s) => s,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum WordOr<T> {
    Word(String),
    List(Vec<T>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    kind: String,
    guess: Option<WordOr<String>>,
    fake_marked: Option<WordOr<RawIndex>>,
    fake_initial: Option<Vec<String>>,
    policy: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAdversary {
    Name(String),
    Table(RawStrategy),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMessage {
    #[serde(rename = "halfA", default)]
    half_a: String,
    #[serde(rename = "halfB", default)]
    half_b: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    qubits: Spanned<usize>,
    initial: Option<Spanned<Vec<String>>>,
    marked: Spanned<Vec<RawIndex>>,
    scheme: Option<Spanned<String>>,
    iterations_before_send: Option<Spanned<usize>>,
    message: Option<RawMessage>,
    adversary: Option<Spanned<RawAdversary>>,
    trials: Option<Spanned<u64>>,
    seed: Option<u64>,
}

/// Strategy description shared by scenario files and command-line flags.
/// Lists hold letter names or marked-state entries; `["uniform"]` selects the
/// uniform family.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrategySpec {
    pub kind: String,
    pub guess: Option<Vec<String>>,
    pub fake_marked: Option<Vec<String>>,
    pub fake_initial: Option<Vec<String>>,
    pub policy: Option<String>,
}

fn is_uniform(list: &[String]) -> bool {
    matches!(list, [w] if w == "uniform")
}

impl StrategySpec {
    pub fn build(&self, qubits: usize) -> Result<CheatStrategy, String> {
        let unused = |name: &str, present: bool| {
            if present {
                Err(format!("`{name}` does not apply to strategy {:?}", self.kind))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "honest" => {
                unused("guess", self.guess.is_some())?;
                unused("fake_marked", self.fake_marked.is_some())?;
                unused("fake_initial", self.fake_initial.is_some())?;
                unused("policy", self.policy.is_some())?;
                Ok(CheatStrategy::Honest)
            }
            "guess-diffusion" => {
                unused("fake_marked", self.fake_marked.is_some())?;
                unused("fake_initial", self.fake_initial.is_some())?;
                unused("policy", self.policy.is_some())?;
                let guess = match self.guess.as_deref() {
                    None => return Err("guess-diffusion needs `guess` (\"uniform\" or a letter list)".into()),
                    Some(g) if is_uniform(g) => GuessChoice::Uniform,
                    Some(g) => GuessChoice::Fixed(product(g, qubits, "guess")?),
                };
                Ok(CheatStrategy::GuessDiffusion { guess })
            }
            "intercept-resend" => {
                unused("guess", self.guess.is_some())?;
                unused("policy", self.policy.is_some())?;
                let fake_marked = match self.fake_marked.as_deref() {
                    None => return Err("intercept-resend needs `fake_marked` (\"uniform\" or a list)".into()),
                    Some(f) if is_uniform(f) => FakeChoice::Uniform,
                    Some(f) => {
                        FakeChoice::Fixed(MarkedSet::parse_entries(qubits, f).map_err(|e| format!("fake_marked: {e}"))?)
                    }
                };
                let fake_initial =
                    self.fake_initial.as_deref().map(|p| product(p, qubits, "fake_initial")).transpose()?;
                Ok(CheatStrategy::InterceptResend { fake_marked, fake_initial })
            }
            "capture-all" => {
                unused("guess", self.guess.is_some())?;
                unused("fake_marked", self.fake_marked.is_some())?;
                unused("fake_initial", self.fake_initial.is_some())?;
                let policy = match self.policy.as_deref() {
                    None | Some("measure-immediately") => CapturePolicy::MeasureImmediately,
                    Some("guess-diffusion-then-measure") => CapturePolicy::GuessDiffusionThenMeasure,
                    Some(other) => {
                        return Err(format!(
                            "unknown policy {other:?}; expected measure-immediately or guess-diffusion-then-measure"
                        ))
                    }
                };
                Ok(CheatStrategy::CaptureAll { policy })
            }
            other => Err(format!(
                "unknown strategy {other:?}; expected honest, guess-diffusion, intercept-resend or capture-all"
            )),
        }
    }
}

fn product(letters: &[String], qubits: usize, field: &str) -> Result<ProductState, String> {
    let p = ProductState::parse_list(letters).map_err(|e| format!("{field}: {e}"))?;
    if p.qubits() != qubits {
        return Err(format!("{field}: {} letters for {qubits} qubits", p.qubits()));
    }
    Ok(p)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses scenario text; `origin` names the source in diagnostics.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let fail = |message: String| CliError::Scenario { path: origin.to_string(), message };
    let at = |span: std::ops::Range<usize>, field: &str, msg: String| {
        fail(format!("line {}, field `{field}`: {msg}", line_of(text, span.start)))
    };

    // toml's own messages already carry line and column
    let raw: RawScenario = toml::from_str(text).map_err(|e| fail(e.to_string().trim_end().to_string()))?;

    let qubits = *raw.qubits.get_ref();
    let initial = match &raw.initial {
        Some(s) => product(s.get_ref(), qubits, "initial").map_err(|m| at(s.span(), "initial", m))?,
        None => ProductState::uniform_plus(qubits).map_err(|e| at(raw.qubits.span(), "qubits", e.to_string()))?,
    };
    let entries: Vec<String> = raw.marked.get_ref().iter().cloned().map(RawIndex::into_text).collect();
    let marked =
        MarkedSet::parse_entries(qubits, &entries).map_err(|e| at(raw.marked.span(), "marked", e.to_string()))?;
    let scheme = match &raw.scheme {
        Some(s) => s.get_ref().parse::<Scheme>().map_err(|e| at(s.span(), "scheme", e.to_string()))?,
        None => Scheme::MultiMarked,
    };
    let iterations_before_send = match &raw.iterations_before_send {
        Some(s) if scheme == Scheme::MultiMarked && *s.get_ref() != 0 => {
            return Err(at(
                s.span(),
                "iterations_before_send",
                "only the single-marked scheme iterates before sending".into(),
            ))
        }
        Some(s) => *s.get_ref(),
        None => 0,
    };
    let message = raw
        .message
        .map(|m| Message { half_a: m.half_a.into_bytes(), half_b: m.half_b.into_bytes() })
        .unwrap_or_default();
    let adversary = match &raw.adversary {
        None => CheatStrategy::Honest,
        Some(s) => {
            let spec = match s.get_ref() {
                RawAdversary::Name(n) => StrategySpec { kind: n.clone(), ..Default::default() },
                RawAdversary::Table(t) => StrategySpec {
                    kind: t.kind.clone(),
                    guess: t.guess.as_ref().map(|g| match g {
                        WordOr::Word(w) => vec![w.clone()],
                        WordOr::List(l) => l.clone(),
                    }),
                    fake_marked: t.fake_marked.as_ref().map(|f| match f {
                        WordOr::Word(w) => vec![w.clone()],
                        WordOr::List(l) => l.iter().cloned().map(RawIndex::into_text).collect(),
                    }),
                    fake_initial: t.fake_initial.clone(),
                    policy: t.policy.clone(),
                },
            };
            spec.build(qubits).map_err(|m| at(s.span(), "adversary", m))?
        }
    };
    let trials = match &raw.trials {
        Some(s) if *s.get_ref() == 0 => return Err(at(s.span(), "trials", "must be at least 1".into())),
        Some(s) => *s.get_ref(),
        None => 1,
    };

    let sc = Scenario {
        qubits,
        initial,
        marked,
        message,
        scheme,
        iterations_before_send,
        adversary,
        trials,
        seed: raw.seed.unwrap_or(0),
    };
    sc.validate().map_err(|e| fail(e.to_string()))?;
    sc.adversary.check_dimensions(&sc).map_err(|e| fail(format!("adversary: {e}")))?;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Scenario { path: origin.clone(), message: format!("cannot read: {e}") })?;
    parse_scenario(&text, &origin)
}
