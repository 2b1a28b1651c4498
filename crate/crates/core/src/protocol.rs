//! Dealer/receiver secret-sharing sessions.
//!
//! A [`Session`] walks one repetition of the scheme through its phases:
//!
//! ```text
//! prepare → oracle → distribute → [intercept] → confirm × n → announce → decode → measure → classify
//! ```
//!
//! Each call checks the current phase and refuses to run out of order. The joint
//! register is a single [`StateVector`]; qubit ownership is only a label since the
//! post-oracle state is entangled.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{CapturePolicy, CheatStrategy, FakeChoice, GuessChoice};
use crate::error::{Error, Result};
use crate::grover::grover_iterate;
use crate::rng::{seeded, SimRng};
use crate::statevec::{
    apply_diffusion, apply_oracle, basis_label, parse_basis_label, sample_measurement, Letter, MarkedSet, ProductState,
    StateVector,
};

/// Cumulative success target used by [`session_schedule`].
pub const SCHEDULE_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `N/4` marked states, one iteration split between dealer and receivers.
    MultiMarked,
    /// One marked state; the dealer may run full iterations before sending.
    SingleMarked,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::MultiMarked => "multi-marked",
            Scheme::SingleMarked => "single-marked",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multi-marked" => Ok(Scheme::MultiMarked),
            "single-marked" => Ok(Scheme::SingleMarked),
            other => Err(Error::config(format!("unknown scheme {other:?}; expected multi-marked or single-marked"))),
        }
    }
}

/// The two opaque message halves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub half_a: Vec<u8>,
    pub half_b: Vec<u8>,
}

/// Full configuration of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub qubits: usize,
    pub initial: ProductState,
    pub marked: MarkedSet,
    pub message: Message,
    pub scheme: Scheme,
    /// Full Grover iterations the dealer runs before the final oracle
    /// (single-marked scheme; always 0 for multi-marked).
    pub iterations_before_send: usize,
    pub adversary: CheatStrategy,
    pub trials: u64,
    pub seed: u64,
}

impl Scenario {
    /// Honest multi-marked scenario with `|+⟩^⊗n` as the preparation.
    pub fn multi_marked(qubits: usize, marked: MarkedSet) -> Result<Self> {
        let sc = Scenario {
            qubits,
            initial: ProductState::uniform_plus(qubits)?,
            marked,
            message: Message::default(),
            scheme: Scheme::MultiMarked,
            iterations_before_send: 0,
            adversary: CheatStrategy::Honest,
            trials: 1,
            seed: 0,
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Honest single-marked scenario with `|+⟩^⊗n` as the preparation.
    pub fn single_marked(qubits: usize, target: usize, iterations_before_send: usize) -> Result<Self> {
        let sc = Scenario {
            qubits,
            initial: ProductState::uniform_plus(qubits)?,
            marked: MarkedSet::new(vec![target])?,
            message: Message::default(),
            scheme: Scheme::SingleMarked,
            iterations_before_send,
            adversary: CheatStrategy::Honest,
            trials: 1,
            seed: 0,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn with_adversary(mut self, adversary: CheatStrategy) -> Self {
        self.adversary = adversary;
        self
    }

    pub fn with_trials(mut self, trials: u64, seed: u64) -> Self {
        self.trials = trials;
        self.seed = seed;
        self
    }

    pub fn with_message(mut self, half_a: impl Into<Vec<u8>>, half_b: impl Into<Vec<u8>>) -> Self {
        self.message = Message { half_a: half_a.into(), half_b: half_b.into() };
        self
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial.qubits() != self.qubits {
            return Err(Error::config(format!(
                "initial state has {} qubits, scenario has {}",
                self.initial.qubits(),
                self.qubits
            )));
        }
        self.marked.check_range(self.qubits)?;
        match self.scheme {
            Scheme::MultiMarked => {
                if self.qubits < 2 {
                    return Err(Error::config("multi-marked scheme needs at least 2 qubits"));
                }
                if self.marked.len() != self.dim() / 4 {
                    return Err(Error::config(format!(
                        "multi-marked scheme on {} qubits needs {} marked states, got {}",
                        self.qubits,
                        self.dim() / 4,
                        self.marked.len()
                    )));
                }
                if self.iterations_before_send != 0 {
                    return Err(Error::config("iterations_before_send applies to the single-marked scheme only"));
                }
            }
            Scheme::SingleMarked => {
                if self.marked.len() != 1 {
                    return Err(Error::config(format!(
                        "single-marked scheme needs exactly one marked state, got {}",
                        self.marked.len()
                    )));
                }
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be positive"));
        }
        self.adversary.check_dimensions(self)
    }

    /// Probability that an honest repetition ends on a marked state.
    pub fn per_set_success(&self) -> Result<f64> {
        let decoded = collective_decode(&dealer_prepare(self)?, &self.initial)?;
        Ok(self.marked.indices().iter().map(|&i| decoded.amplitude(i).norm_sqr()).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Half {
    A,
    B,
}

/// Which message half each marked index carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedTagging {
    entries: Vec<(usize, Half)>,
    /// Single marked state carrying the whole message (tagged [`Half::A`]).
    whole_message: bool,
}

impl MarkedTagging {
    pub fn entries(&self) -> &[(usize, Half)] {
        &self.entries
    }

    pub fn tag(&self, index: usize) -> Option<Half> {
        self.entries.iter().find(|(i, _)| *i == index).map(|(_, h)| *h)
    }

    pub fn indices(&self, half: Half) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().filter(move |(_, h)| *h == half).map(|(i, _)| *i)
    }

    pub fn carries_whole_message(&self) -> bool {
        self.whole_message
    }
}

/// Ascending-index partition: the first half of the marked states carry `half_a`,
/// the rest `half_b`. A single marked state carries both halves.
///
/// The payload bytes do not influence the partition; choosing the marked set from
/// the message content is left to the caller.
pub fn encode_message(half_a: &[u8], half_b: &[u8], qubits: usize, marked: &MarkedSet) -> Result<MarkedTagging> {
    let _ = (half_a, half_b);
    marked.check_range(qubits)?;
    let m = marked.len();
    if m == 1 {
        return Ok(MarkedTagging { entries: vec![(marked.indices()[0], Half::A)], whole_message: true });
    }
    let quarter = (1usize << qubits) / 4;
    if m != quarter || !m.is_multiple_of(2) {
        return Err(Error::config(format!(
            "cannot split a message over {m} marked states on {qubits} qubits; need 1 or an even {quarter}"
        )));
    }
    let entries =
        marked.indices().iter().enumerate().map(|(k, &i)| (i, if k < m / 2 { Half::A } else { Half::B })).collect();
    Ok(MarkedTagging { entries, whole_message: false })
}

/// Register the dealer transmits: the oracle applied to the preparation, after
/// `iterations_before_send` complete iterations in the single-marked scheme.
pub fn dealer_prepare(sc: &Scenario) -> Result<StateVector> {
    let initial = sc.initial.expand();
    let mut state = initial.clone();
    for _ in 0..sc.iterations_before_send {
        state = grover_iterate(&state, &sc.marked, &initial)?;
    }
    apply_oracle(&state, &sc.marked)
}

pub type PartyId = String;

/// Party `k` holds qubit `k` (most significant first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitAssignment {
    owners: Vec<PartyId>,
}

impl QubitAssignment {
    pub fn owner(&self, qubit: usize) -> Option<&str> {
        self.owners.get(qubit).map(String::as_str)
    }

    pub fn qubit_of(&self, party: &str) -> Option<usize> {
        self.owners.iter().position(|p| p == party)
    }

    pub fn parties(&self) -> &[PartyId] {
        &self.owners
    }
}

pub fn distribute(register: &StateVector, parties: &[PartyId]) -> Result<QubitAssignment> {
    if parties.len() != register.qubits() {
        return Err(Error::config(format!("{} parties for a {}-qubit register", parties.len(), register.qubits())));
    }
    for (k, p) in parties.iter().enumerate() {
        if p.is_empty() || p.contains(['\t', '\n', ',', '=']) {
            return Err(Error::config(format!("invalid party id {p:?}")));
        }
        if parties[..k].contains(p) {
            return Err(Error::config(format!("party {p:?} listed twice")));
        }
    }
    Ok(QubitAssignment { owners: parties.to_vec() })
}

/// Receiver names used when a scenario does not name its parties.
pub fn default_parties(qubits: usize) -> Vec<PartyId> {
    const NAMES: [&str; 3] = ["bob", "charlie", "trent"];
    (0..qubits).map(|k| NAMES.get(k).map_or_else(|| format!("receiver{}", k + 1), |s| s.to_string())).collect()
}

/// Reflection of the shared register about the announced preparation.
pub fn collective_decode(register: &StateVector, announced: &ProductState) -> Result<StateVector> {
    apply_diffusion(register, &announced.expand())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeLabel {
    HalfA,
    HalfB,
    /// Unmarked outcome in the multi-marked scheme.
    CheatSignal,
    /// `|00⟩` or `|11⟩` in a two-qubit run.
    Correlated,
    /// Unmarked outcome in the single-marked scheme, where the search is not
    /// deterministic and a miss alone is not evidence of tampering.
    Miss,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 5] = [
        OutcomeLabel::HalfA,
        OutcomeLabel::HalfB,
        OutcomeLabel::CheatSignal,
        OutcomeLabel::Correlated,
        OutcomeLabel::Miss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutcomeLabel::HalfA => "half_a",
            OutcomeLabel::HalfB => "half_b",
            OutcomeLabel::CheatSignal => "cheat_signal",
            OutcomeLabel::Correlated => "correlated",
            OutcomeLabel::Miss => "miss",
        }
    }

    /// Outcomes that make the dealer abort.
    pub fn signals_cheating(self) -> bool {
        matches!(self, OutcomeLabel::CheatSignal | OutcomeLabel::Correlated)
    }
}

impl FromStr for OutcomeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OutcomeLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::config(format!("unknown outcome label {s:?}")))
    }
}

pub fn classify_outcome(index: usize, sc: &Scenario, tagging: &MarkedTagging) -> OutcomeLabel {
    match tagging.tag(index) {
        Some(Half::A) => OutcomeLabel::HalfA,
        Some(Half::B) => OutcomeLabel::HalfB,
        None if sc.qubits == 2 && (index == 0b00 || index == 0b11) => OutcomeLabel::Correlated,
        None => match sc.scheme {
            Scheme::MultiMarked => OutcomeLabel::CheatSignal,
            Scheme::SingleMarked => OutcomeLabel::Miss,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Prepared(ProductState),
    OracleApplied(MarkedSet),
    Distributed(Vec<PartyId>),
    /// Adversary action on the register between distribution and confirmation.
    Intercepted(String),
    Confirmed(PartyId),
    Announced(ProductState),
    /// Reflection axis actually used by the decoding parties.
    Decoded(ProductState),
    Measured(usize),
    Classified(OutcomeLabel),
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Prepared(_) => "prepared",
            Event::OracleApplied(_) => "oracle_applied",
            Event::Distributed(_) => "distributed",
            Event::Intercepted(_) => "intercepted",
            Event::Confirmed(_) => "confirmed",
            Event::Announced(_) => "announced",
            Event::Decoded(_) => "decoded",
            Event::Measured(_) => "measured",
            Event::Classified(_) => "classified",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Event::Prepared(_) => 0,
            Event::OracleApplied(_) => 1,
            Event::Distributed(_) => 2,
            Event::Intercepted(_) => 3,
            Event::Confirmed(_) => 4,
            Event::Announced(_) => 5,
            Event::Decoded(_) => 6,
            Event::Measured(_) => 7,
            Event::Classified(_) => 8,
        }
    }

    fn payload(&self, qubits: usize) -> String {
        fn letters(p: &ProductState) -> String {
            p.letters().iter().map(|l| l.name()).collect::<Vec<_>>().join(",")
        }
        match self {
            Event::Prepared(p) | Event::Announced(p) | Event::Decoded(p) => letters(p),
            Event::OracleApplied(m) => {
                m.indices().iter().map(|&i| basis_label(i, qubits)).collect::<Vec<_>>().join(",")
            }
            Event::Distributed(parties) => {
                parties.iter().enumerate().map(|(q, p)| format!("{p}={q}")).collect::<Vec<_>>().join(",")
            }
            Event::Intercepted(s) => s.clone(),
            Event::Confirmed(p) => p.clone(),
            Event::Measured(i) => basis_label(*i, qubits),
            Event::Classified(l) => l.name().to_string(),
        }
    }

    fn parse(name: &str, payload: &str, qubits: usize) -> Result<Event> {
        let letters = || -> Result<ProductState> { ProductState::parse_list(&payload.split(',').collect::<Vec<_>>()) };
        Ok(match name {
            "prepared" => Event::Prepared(letters()?),
            "announced" => Event::Announced(letters()?),
            "decoded" => Event::Decoded(letters()?),
            "oracle_applied" => {
                Event::OracleApplied(MarkedSet::parse_entries(qubits, &payload.split(',').collect::<Vec<_>>())?)
            }
            "distributed" => {
                let mut parties = Vec::new();
                for (q, entry) in payload.split(',').enumerate() {
                    let (party, qubit) =
                        entry.split_once('=').ok_or_else(|| Error::config(format!("bad assignment {entry:?}")))?;
                    if qubit.parse::<usize>().ok() != Some(q) {
                        return Err(Error::config(format!("assignment {entry:?} out of order")));
                    }
                    parties.push(party.to_string());
                }
                Event::Distributed(parties)
            }
            "intercepted" => Event::Intercepted(payload.to_string()),
            "confirmed" => Event::Confirmed(payload.to_string()),
            "measured" => Event::Measured(parse_basis_label(payload, qubits)?),
            "classified" => Event::Classified(payload.parse()?),
            other => return Err(Error::config(format!("unknown event {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub event: Event,
}

/// Ordered event log of one repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    qubits: usize,
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.entries.iter().map(|e| &e.event)
    }

    /// Sequence numbers increase, phases never go backwards, every confirmation
    /// precedes the announcement and each party confirms exactly once.
    pub fn check_order(&self) -> Result<()> {
        let mut last_seq = None;
        let mut last_rank: Option<u8> = None;
        let mut parties: Option<&[PartyId]> = None;
        let mut confirmed = Vec::new();
        for entry in &self.entries {
            if last_seq.is_some_and(|s| entry.seq <= s) {
                return Err(Error::config(format!("sequence number {} not increasing", entry.seq)));
            }
            last_seq = Some(entry.seq);
            let rank = entry.event.rank();
            if let Some(prev) = last_rank {
                if rank < prev {
                    return Err(Error::config(format!("{} logged after a later phase", entry.event.name())));
                }
                // confirmations are the only repeated phase
                if rank == prev && !matches!(entry.event, Event::Confirmed(_)) {
                    return Err(Error::config(format!("{} logged twice", entry.event.name())));
                }
            }
            last_rank = Some(rank);
            match &entry.event {
                Event::Distributed(p) => parties = Some(p),
                Event::Confirmed(p) => {
                    let known = parties.is_some_and(|ps| ps.contains(p));
                    if !known || confirmed.contains(&p) {
                        return Err(Error::config(format!("unexpected confirmation from {p:?}")));
                    }
                    confirmed.push(p);
                }
                Event::Announced(_) if parties.is_none_or(|ps| ps.len() != confirmed.len()) => {
                    return Err(Error::config("announcement before all confirmations"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// One event per line: `seq<TAB>event<TAB>payload`.
    pub fn to_event_log(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.seq, e.event.name(), e.event.payload(self.qubits)));
        }
        out
    }

    pub fn parse_event_log(qubits: usize, log: &str) -> Result<Transcript> {
        let mut entries = Vec::new();
        for (n, line) in log.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let mut fields = line.splitn(3, '\t');
            let (Some(seq), Some(name), Some(payload)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::config(format!("event log line {}: expected three fields", n + 1)));
            };
            let seq =
                seq.parse().map_err(|_| Error::config(format!("event log line {}: bad sequence number", n + 1)))?;
            let event = Event::parse(name, payload, qubits)
                .map_err(|e| Error::config(format!("event log line {}: {e}", n + 1)))?;
            entries.push(TranscriptEntry { seq, event });
        }
        Ok(Transcript { qubits, entries })
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_event_log())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Start,
    Prepared,
    Encoded,
    Distributed,
    Confirming,
    Announced,
    Decoded,
    Measured,
    Classified,
}

impl Phase {
    fn name(self) -> &'static str {
        match self {
            Phase::Start => "start",
            Phase::Prepared => "prepared",
            Phase::Encoded => "encoded",
            Phase::Distributed => "distributed",
            Phase::Confirming => "confirming",
            Phase::Announced => "announced",
            Phase::Decoded => "decoded",
            Phase::Measured => "measured",
            Phase::Classified => "classified",
        }
    }
}

/// One repetition of the protocol, driven phase by phase.
#[derive(Debug, Clone)]
pub struct Session<'a> {
    scenario: &'a Scenario,
    phase: Phase,
    register: Option<StateVector>,
    assignment: Option<QubitAssignment>,
    confirmed: Vec<bool>,
    decode_axis: Option<ProductState>,
    outcome: Option<usize>,
    next_seq: u64,
    entries: Vec<TranscriptEntry>,
}

impl<'a> Session<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            scenario,
            phase: Phase::Start,
            register: None,
            assignment: None,
            confirmed: Vec::new(),
            decode_axis: None,
            outcome: None,
            next_seq: 0,
            entries: Vec::new(),
        })
    }

    fn expect(&self, attempted: &'static str, allowed: &[Phase]) -> Result<()> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(Error::ProtocolOrder { attempted, current: self.phase.name() })
        }
    }

    fn log(&mut self, event: Event) {
        self.entries.push(TranscriptEntry { seq: self.next_seq, event });
        self.next_seq += 1;
    }

    pub fn register(&self) -> Option<&StateVector> {
        self.register.as_ref()
    }

    /// Dealer builds the preparation and runs any pre-send iterations.
    pub fn prepare(&mut self) -> Result<()> {
        self.expect("prepare", &[Phase::Start])?;
        let sc = self.scenario;
        let initial = sc.initial.expand();
        let mut state = initial.clone();
        for _ in 0..sc.iterations_before_send {
            state = grover_iterate(&state, &sc.marked, &initial)?;
        }
        self.register = Some(state);
        self.log(Event::Prepared(sc.initial.clone()));
        self.phase = Phase::Prepared;
        Ok(())
    }

    pub fn apply_oracle(&mut self) -> Result<()> {
        self.expect("oracle", &[Phase::Prepared])?;
        let reg = self.register.take().expect("prepared register");
        self.register = Some(apply_oracle(&reg, &self.scenario.marked)?);
        self.log(Event::OracleApplied(self.scenario.marked.clone()));
        self.phase = Phase::Encoded;
        Ok(())
    }

    pub fn distribute(&mut self, parties: &[PartyId]) -> Result<()> {
        self.expect("distribute", &[Phase::Encoded])?;
        let assignment = distribute(self.register.as_ref().expect("encoded register"), parties)?;
        self.confirmed = vec![false; parties.len()];
        self.log(Event::Distributed(assignment.parties().to_vec()));
        self.assignment = Some(assignment);
        self.phase = Phase::Distributed;
        Ok(())
    }

    /// Adversary hook: acts on the register while it is in transit.
    pub fn intercept<R: Rng + ?Sized>(&mut self, strategy: &CheatStrategy, rng: &mut R) -> Result<()> {
        self.expect("intercept", &[Phase::Distributed])?;
        let sc = self.scenario;
        let reg = self.register.take().expect("distributed register");
        let (register, note) = match strategy {
            CheatStrategy::Honest | CheatStrategy::GuessDiffusion { .. } => {
                self.register = Some(reg);
                return Ok(());
            }
            CheatStrategy::InterceptResend { fake_marked, fake_initial } => {
                let fake = match fake_marked {
                    FakeChoice::Fixed(m) => m.clone(),
                    FakeChoice::Uniform => random_marked_set(sc.dim(), sc.marked.len(), rng)?,
                };
                let fake_sc = Scenario {
                    initial: fake_initial.clone().unwrap_or_else(|| sc.initial.clone()),
                    marked: fake.clone(),
                    adversary: CheatStrategy::Honest,
                    ..sc.clone()
                };
                let note = format!(
                    "intercept-resend fake={}",
                    fake.indices().iter().map(|&i| basis_label(i, sc.qubits)).collect::<Vec<_>>().join("+")
                );
                (dealer_prepare(&fake_sc)?, note)
            }
            CheatStrategy::CaptureAll { policy } => {
                let (measured_from, note) = match policy {
                    CapturePolicy::MeasureImmediately => (reg, "capture-all measure".to_string()),
                    CapturePolicy::GuessDiffusionThenMeasure => {
                        let guess = random_product_state(sc.qubits, rng)?;
                        let note = format!("capture-all guess={}", guess);
                        (apply_diffusion(&reg, &guess.expand())?, note)
                    }
                };
                let j = sample_measurement(&measured_from, rng);
                let note = format!("{note} saw={}", basis_label(j, sc.qubits));
                (StateVector::basis(sc.qubits, j)?, note)
            }
        };
        self.register = Some(register);
        self.log(Event::Intercepted(note));
        Ok(())
    }

    pub fn confirm(&mut self, party: &str) -> Result<()> {
        self.expect("confirm", &[Phase::Distributed, Phase::Confirming])?;
        let qubit = self
            .assignment
            .as_ref()
            .and_then(|a| a.qubit_of(party))
            .ok_or_else(|| Error::config(format!("{party:?} holds no qubit")))?;
        if self.confirmed[qubit] {
            return Err(Error::config(format!("{party:?} already confirmed")));
        }
        self.confirmed[qubit] = true;
        self.log(Event::Confirmed(party.to_string()));
        self.phase = Phase::Confirming;
        Ok(())
    }

    pub fn all_confirmed(&self) -> bool {
        !self.confirmed.is_empty() && self.confirmed.iter().all(|&c| c)
    }

    /// Dealer publishes the preparation; only once every holder confirmed.
    pub fn announce(&mut self) -> Result<()> {
        if self.phase != Phase::Confirming || !self.all_confirmed() {
            return Err(Error::ProtocolOrder { attempted: "announce", current: self.phase.name() });
        }
        self.log(Event::Announced(self.scenario.initial.clone()));
        self.phase = Phase::Announced;
        Ok(())
    }

    /// Receivers reflect about `axis`; honest receivers pass the announced state.
    pub fn decode_about(&mut self, axis: &ProductState) -> Result<()> {
        self.expect("decode", &[Phase::Announced])?;
        let reg = self.register.take().expect("announced register");
        self.register = Some(apply_diffusion(&reg, &axis.expand())?);
        self.decode_axis = Some(axis.clone());
        self.log(Event::Decoded(axis.clone()));
        self.phase = Phase::Decoded;
        Ok(())
    }

    pub fn decode(&mut self) -> Result<()> {
        let announced = self.scenario.initial.clone();
        self.decode_about(&announced)
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        self.expect("measure", &[Phase::Decoded])?;
        let j = sample_measurement(self.register.as_ref().expect("decoded register"), rng);
        self.outcome = Some(j);
        self.log(Event::Measured(j));
        self.phase = Phase::Measured;
        Ok(j)
    }

    pub fn classify(&mut self, tagging: &MarkedTagging) -> Result<OutcomeLabel> {
        self.expect("classify", &[Phase::Measured])?;
        let label = classify_outcome(self.outcome.expect("measured"), self.scenario, tagging);
        self.log(Event::Classified(label));
        self.phase = Phase::Classified;
        Ok(label)
    }

    pub fn into_transcript(self) -> Transcript {
        Transcript { qubits: self.scenario.qubits, entries: self.entries }
    }
}

/// Per-label counts over a run of repetitions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStats {
    pub trials: u64,
    pub half_a: u64,
    pub half_b: u64,
    pub cheat_signal: u64,
    pub correlated: u64,
    pub miss: u64,
}

impl SessionStats {
    pub fn count(&self, label: OutcomeLabel) -> u64 {
        match label {
            OutcomeLabel::HalfA => self.half_a,
            OutcomeLabel::HalfB => self.half_b,
            OutcomeLabel::CheatSignal => self.cheat_signal,
            OutcomeLabel::Correlated => self.correlated,
            OutcomeLabel::Miss => self.miss,
        }
    }

    fn record(&mut self, label: OutcomeLabel) {
        self.trials += 1;
        *match label {
            OutcomeLabel::HalfA => &mut self.half_a,
            OutcomeLabel::HalfB => &mut self.half_b,
            OutcomeLabel::CheatSignal => &mut self.cheat_signal,
            OutcomeLabel::Correlated => &mut self.correlated,
            OutcomeLabel::Miss => &mut self.miss,
        } += 1;
    }

    pub fn frequency(&self, label: OutcomeLabel) -> f64 {
        self.count(label) as f64 / self.trials as f64
    }

    /// Trials that ended on one of the dealer's marked states.
    pub fn marked_hits(&self) -> u64 {
        self.half_a + self.half_b
    }

    pub fn cheating_detected(&self) -> bool {
        self.cheat_signal + self.correlated > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub first_transcript: Transcript,
    pub stats: SessionStats,
}

/// Runs `sc.trials` independent repetitions on one generator seeded with `sc.seed`.
pub fn run_session(sc: &Scenario) -> Result<SessionOutcome> {
    sc.validate()?;
    let tagging = encode_message(&sc.message.half_a, &sc.message.half_b, sc.qubits, &sc.marked)?;
    let parties = default_parties(sc.qubits);
    let mut rng = seeded(sc.seed);
    let mut stats = SessionStats::default();
    let mut first = None;
    for _ in 0..sc.trials {
        let (label, transcript) = run_once(sc, &tagging, &parties, &mut rng)?;
        stats.record(label);
        first.get_or_insert(transcript);
    }
    Ok(SessionOutcome { first_transcript: first.expect("trials > 0"), stats })
}

fn run_once(
    sc: &Scenario,
    tagging: &MarkedTagging,
    parties: &[PartyId],
    rng: &mut SimRng,
) -> Result<(OutcomeLabel, Transcript)> {
    let mut s = Session::new(sc)?;
    s.prepare()?;
    s.apply_oracle()?;
    s.distribute(parties)?;
    s.intercept(&sc.adversary, rng)?;
    for p in parties {
        s.confirm(p)?;
    }
    s.announce()?;
    match &sc.adversary {
        CheatStrategy::GuessDiffusion { guess } => {
            let axis = match guess {
                GuessChoice::Fixed(p) => p.clone(),
                GuessChoice::Uniform => random_product_state(sc.qubits, rng)?,
            };
            s.decode_about(&axis)?;
        }
        _ => s.decode()?,
    }
    s.measure(rng)?;
    let label = s.classify(tagging)?;
    Ok((label, s.into_transcript()))
}

pub(crate) fn random_product_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Result<ProductState> {
    ProductState::new((0..qubits).map(|_| Letter::ALL[rng.gen_range(0..4)]).collect())
}

pub(crate) fn random_marked_set<R: Rng + ?Sized>(dim: usize, size: usize, rng: &mut R) -> Result<MarkedSet> {
    MarkedSet::new(rand::seq::index::sample(rng, dim, size).into_vec())
}

/// How many identical registers to send per message unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub sets_per_unit: u32,
    pub total_sets: u64,
}

/// Smallest `k ≥ 1` with `1 − (1 − p)^k ≥ SCHEDULE_CONFIDENCE`, for `message_units`
/// units sent with per-set success probability `p`.
pub fn session_schedule(message_units: u64, per_set_success: f64) -> Result<SessionPlan> {
    if message_units == 0 {
        return Err(Error::config("message unit count must be positive"));
    }
    if !(per_set_success > 0.0 && per_set_success <= 1.0 + 1e-12) {
        return Err(Error::config(format!("per-set success {per_set_success} must lie in (0, 1]")));
    }
    let miss = (1.0 - per_set_success).max(0.0);
    let mut k = 1u32;
    let mut residual = miss;
    while 1.0 - residual < SCHEDULE_CONFIDENCE - 1e-12 {
        k += 1;
        residual *= miss;
    }
    Ok(SessionPlan { sets_per_unit: k, total_sets: message_units * u64::from(k) })
}
