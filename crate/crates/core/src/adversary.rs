//! Cheat strategies and detection statistics.
//!
//! Detection is always measured the same way: the final computational-basis
//! outcome falls outside the dealer's marked set. Exact values come from the
//! full output distribution (averaged exactly over a strategy family where one is
//! involved); Monte Carlo values come from running the protocol sessions with the
//! adversary hook switched on, so the two paths share only the state-vector kernel.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{collective_decode, dealer_prepare, run_session, Scenario};
use crate::statevec::{
    apply_diffusion, apply_oracle, inner_product, Amplitude, Letter, MarkedSet, ProductState, StateVector,
    NORM_TOLERANCE,
};

/// Largest register for which exact detection probabilities are computed.
pub const MAX_EXACT_QUBITS: usize = 10;
/// Largest register for which strategy families over all `4^n` guesses are averaged.
pub const MAX_GUESS_FAMILY_QUBITS: usize = 8;
/// Largest number of fake marked sets enumerated one by one.
pub const MAX_ENUMERATED_FAKES: u128 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuessChoice {
    Fixed(ProductState),
    /// Uniformly random over all `4^n` product preparations.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FakeChoice {
    Fixed(MarkedSet),
    /// Uniformly random over all marked sets of the dealer's size.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapturePolicy {
    MeasureImmediately,
    /// Reflect about a uniformly random product guess, then measure.
    GuessDiffusionThenMeasure,
}

impl CapturePolicy {
    pub fn name(self) -> &'static str {
        match self {
            CapturePolicy::MeasureImmediately => "measure-immediately",
            CapturePolicy::GuessDiffusionThenMeasure => "guess-diffusion-then-measure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CheatStrategy {
    #[default]
    Honest,
    /// A dishonest receiver decodes about a guessed preparation instead of the
    /// announced one and reports the outcome.
    GuessDiffusion { guess: GuessChoice },
    /// The register is captured in transit and replaced by the oracle applied to
    /// `fake_initial` (the dealer's preparation when `None`) with `fake_marked`.
    InterceptResend { fake_marked: FakeChoice, fake_initial: Option<ProductState> },
    /// The whole register is captured and measured; the collapsed basis state is
    /// forwarded to the receivers.
    CaptureAll { policy: CapturePolicy },
}

impl CheatStrategy {
    pub fn kind(&self) -> &'static str {
        match self {
            CheatStrategy::Honest => "honest",
            CheatStrategy::GuessDiffusion { .. } => "guess-diffusion",
            CheatStrategy::InterceptResend { .. } => "intercept-resend",
            CheatStrategy::CaptureAll { .. } => "capture-all",
        }
    }

    pub fn check_dimensions(&self, sc: &Scenario) -> Result<()> {
        let check_product = |p: &ProductState, what: &str| {
            if p.qubits() != sc.qubits {
                Err(Error::config(format!("{what} has {} qubits, scenario has {}", p.qubits(), sc.qubits)))
            } else {
                Ok(())
            }
        };
        match self {
            CheatStrategy::GuessDiffusion { guess: GuessChoice::Fixed(g) } => check_product(g, "guess"),
            CheatStrategy::InterceptResend { fake_marked, fake_initial } => {
                if let FakeChoice::Fixed(f) = fake_marked {
                    f.check_range(sc.qubits)?;
                    if f.len() != sc.marked.len() {
                        return Err(Error::config(format!(
                            "fake marked set has {} states, dealer uses {}",
                            f.len(),
                            sc.marked.len()
                        )));
                    }
                }
                match fake_initial {
                    Some(p) => check_product(p, "fake initial state"),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for CheatStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheatStrategy::Honest => f.write_str("honest"),
            CheatStrategy::GuessDiffusion { guess: GuessChoice::Fixed(g) } => write!(f, "guess-diffusion {g}"),
            CheatStrategy::GuessDiffusion { guess: GuessChoice::Uniform } => f.write_str("guess-diffusion uniform"),
            CheatStrategy::InterceptResend { fake_marked, fake_initial } => {
                f.write_str("intercept-resend ")?;
                match fake_marked {
                    FakeChoice::Fixed(m) => write!(f, "{:?}", m.indices())?,
                    FakeChoice::Uniform => f.write_str("uniform")?,
                }
                if let Some(p) = fake_initial {
                    write!(f, " from {p}")?;
                }
                Ok(())
            }
            CheatStrategy::CaptureAll { policy } => write!(f, "capture-all {}", policy.name()),
        }
    }
}

/// `4^n` product preparations.
pub fn guess_space_size(qubits: usize) -> u128 {
    4u128.pow(qubits as u32)
}

/// `C(n, k)`, or `None` when it does not fit in 128 bits.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i) is divisible by (i+1) after the multiplication
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Number of distinct marked sets of size `marked` in a space of `size`.
pub fn marked_set_space(size: u64, marked: u64) -> Option<u128> {
    binomial(size, marked)
}

/// Entry `k` counts the size-`M` subsets sharing exactly `k` elements with a
/// fixed size-`M` subset: `C(M, k)·C(N − M, M − k)`.
pub fn overlap_census(size: u64, marked: u64) -> Result<Vec<u128>> {
    if marked > size {
        return Err(Error::config(format!("marked count {marked} exceeds space size {size}")));
    }
    (0..=marked)
        .map(|k| {
            binomial(marked, k)
                .zip(binomial(size - marked, marked - k))
                .and_then(|(a, b)| a.checked_mul(b))
                .ok_or_else(|| Error::config("overlap census overflows 128 bits"))
        })
        .collect()
}

/// Hypergeometric overlap distribution in floating point; usable where the
/// integer census overflows.
pub fn overlap_probabilities(size: u64, marked: u64) -> Vec<f64> {
    let (n, m) = (size as f64, marked as f64);
    let mut p0 = 1.0;
    if 2 * marked > size {
        p0 = 0.0;
    } else {
        for i in 0..marked {
            p0 *= (n - m - i as f64) / (n - i as f64);
        }
    }
    let kmin = (2 * marked).saturating_sub(size);
    let mut probs = vec![0.0; marked as usize + 1];
    if p0 > 0.0 {
        probs[0] = p0;
        for k in 0..marked as usize {
            let kf = k as f64;
            probs[k + 1] = probs[k] * (m - kf) * (m - kf) / ((kf + 1.0) * (n - 2.0 * m + kf + 1.0));
        }
    } else {
        // support starts at kmin; normalise from there
        let mut w = vec![0.0; marked as usize + 1];
        w[kmin as usize] = 1.0;
        for k in kmin as usize..marked as usize {
            let kf = k as f64;
            w[k + 1] = w[k] * (m - kf) * (m - kf) / ((kf + 1.0) * (n - 2.0 * m + kf + 1.0));
        }
        let total: f64 = w.iter().sum();
        for (p, x) in probs.iter_mut().zip(w) {
            *p = x / total;
        }
    }
    probs
}

/// A quantitative statement from the reference literature next to the value the
/// stated model produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceClaim {
    pub quantity: String,
    pub claimed: f64,
    pub computed: f64,
}

impl ReferenceClaim {
    pub fn agrees(&self) -> bool {
        (self.claimed - self.computed).abs() < 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub detected: u64,
    pub estimate: f64,
    /// Binomial standard deviation at the exact value.
    pub sigma: f64,
    pub within_three_sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub strategy: String,
    pub qubits: usize,
    pub marked: usize,
    /// Probability the final outcome falls outside the dealer's marked set.
    pub detection: f64,
    pub undetected: f64,
    /// Same quantity with no adversary; non-zero only when the honest search
    /// itself is probabilistic.
    pub honest_miss: f64,
    /// Probability that the adversary's own measurement lands on a marked state.
    pub cheater_success: Option<f64>,
    /// Size of the family the adversary draws from (guesses or fake sets).
    pub space_size: Option<u128>,
    pub monte_carlo: Option<MonteCarloEstimate>,
    pub claims: Vec<ReferenceClaim>,
}

fn mass_on(state: &StateVector, marked: &MarkedSet) -> f64 {
    marked.indices().iter().map(|&i| state.amplitude(i).norm_sqr()).sum()
}

fn check_exact_size(sc: &Scenario) -> Result<()> {
    sc.validate()?;
    if sc.qubits > MAX_EXACT_QUBITS {
        return Err(Error::config(format!(
            "exact detection limited to {MAX_EXACT_QUBITS} qubits, scenario has {}",
            sc.qubits
        )));
    }
    Ok(())
}

fn guess_family(sc: &Scenario) -> Result<impl Iterator<Item = ProductState>> {
    if sc.qubits > MAX_GUESS_FAMILY_QUBITS {
        return Err(Error::config(format!("averaging over all guesses limited to {MAX_GUESS_FAMILY_QUBITS} qubits")));
    }
    Ok(ProductState::enumerate(sc.qubits))
}

/// Marked mass after the honest receivers decode each collapsed basis state.
fn collapsed_undetected(sc: &Scenario) -> Result<Vec<f64>> {
    let axis = sc.initial.expand();
    (0..sc.dim())
        .map(|j| Ok(mass_on(&apply_diffusion(&StateVector::basis(sc.qubits, j)?, &axis)?, &sc.marked)))
        .collect()
}

fn intercept_fixed(sc: &Scenario, fake: &MarkedSet, fake_initial: &ProductState) -> Result<f64> {
    let fake_register = apply_oracle(&fake_initial_register(sc, fake, fake_initial)?, fake)?;
    Ok(mass_on(&collective_decode(&fake_register, &sc.initial)?, &sc.marked))
}

/// The adversary's imitation of the dealer's pre-oracle register.
fn fake_initial_register(sc: &Scenario, fake: &MarkedSet, fake_initial: &ProductState) -> Result<StateVector> {
    let start = fake_initial.expand();
    let mut state = start.clone();
    for _ in 0..sc.iterations_before_send {
        state = crate::grover::grover_iterate(&state, fake, &start)?;
    }
    Ok(state)
}

/// Calls `f` on every `m`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, m: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if m > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx)?;
        let Some(pos) = (0..m).rev().find(|&i| idx[i] != i + n - m) else {
            return Ok(());
        };
        idx[pos] += 1;
        for j in pos + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct Exact {
    undetected: f64,
    cheater_success: Option<f64>,
    space_size: Option<u128>,
}

fn exact_undetected(sc: &Scenario, strategy: &CheatStrategy) -> Result<Exact> {
    let register = dealer_prepare(sc)?;
    let m = sc.marked.len() as u64;
    let n = sc.dim() as u64;
    Ok(match strategy {
        CheatStrategy::Honest => Exact {
            undetected: mass_on(&collective_decode(&register, &sc.initial)?, &sc.marked),
            cheater_success: None,
            space_size: None,
        },
        CheatStrategy::GuessDiffusion { guess } => {
            let (undetected, space) = match guess {
                GuessChoice::Fixed(g) => (mass_on(&collective_decode(&register, g)?, &sc.marked), None),
                GuessChoice::Uniform => {
                    let mut total = 0.0;
                    let mut count = 0u64;
                    for g in guess_family(sc)? {
                        total += mass_on(&collective_decode(&register, &g)?, &sc.marked);
                        count += 1;
                    }
                    (total / count as f64, Some(guess_space_size(sc.qubits)))
                }
            };
            Exact { undetected, cheater_success: Some(undetected), space_size: space }
        }
        CheatStrategy::InterceptResend { fake_marked, fake_initial } => {
            let fake_initial = fake_initial.as_ref().unwrap_or(&sc.initial);
            match fake_marked {
                FakeChoice::Fixed(f) => {
                    Exact { undetected: intercept_fixed(sc, f, fake_initial)?, cheater_success: None, space_size: None }
                }
                FakeChoice::Uniform => {
                    let space = marked_set_space(n, m);
                    let undetected = if fake_initial == &sc.initial {
                        intercept_uniform_by_overlap(sc)?
                    } else {
                        intercept_uniform_enumerated(sc, fake_initial)?
                    };
                    Exact { undetected, cheater_success: None, space_size: space }
                }
            }
        }
        CheatStrategy::CaptureAll { policy } => {
            let after = collapsed_undetected(sc)?;
            let forward =
                |state: &StateVector| -> f64 { state.probabilities().iter().zip(&after).map(|(p, u)| p * u).sum() };
            match policy {
                CapturePolicy::MeasureImmediately => Exact {
                    undetected: forward(&register),
                    cheater_success: Some(mass_on(&register, &sc.marked)),
                    space_size: None,
                },
                CapturePolicy::GuessDiffusionThenMeasure => {
                    let (mut und, mut learn, mut count) = (0.0, 0.0, 0u64);
                    for g in guess_family(sc)? {
                        let seen = collective_decode(&register, &g)?;
                        und += forward(&seen);
                        learn += mass_on(&seen, &sc.marked);
                        count += 1;
                    }
                    Exact {
                        undetected: und / count as f64,
                        cheater_success: Some(learn / count as f64),
                        space_size: Some(guess_space_size(sc.qubits)),
                    }
                }
            }
        }
    })
}

/// Average over all fake sets, grouped by overlap with the dealer's set. Valid
/// when the fake register is built from the dealer's own preparation: the
/// accepted mass then depends on the overlap size only.
fn intercept_uniform_by_overlap(sc: &Scenario) -> Result<f64> {
    let m = sc.marked.len();
    let unmarked: Vec<usize> = (0..sc.dim()).filter(|&i| !sc.marked.contains(i)).collect();
    let weights = overlap_probabilities(sc.dim() as u64, m as u64);
    let mut total = 0.0;
    for (k, w) in weights.into_iter().enumerate() {
        if w == 0.0 || m - k > unmarked.len() {
            continue;
        }
        let mut rep: Vec<usize> = sc.marked.indices()[..k].to_vec();
        rep.extend_from_slice(&unmarked[..m - k]);
        total += w * intercept_fixed(sc, &MarkedSet::new(rep)?, &sc.initial)?;
    }
    Ok(total)
}

fn intercept_uniform_enumerated(sc: &Scenario, fake_initial: &ProductState) -> Result<f64> {
    let count = marked_set_space(sc.dim() as u64, sc.marked.len() as u64)
        .filter(|&c| c <= MAX_ENUMERATED_FAKES)
        .ok_or_else(|| Error::config("too many fake marked sets to enumerate"))?;
    let mut total = 0.0;
    for_each_subset(sc.dim(), sc.marked.len(), |subset| {
        total += intercept_fixed(sc, &MarkedSet::new(subset.to_vec())?, fake_initial)?;
        Ok(())
    })?;
    Ok(total / count as f64)
}

/// Exact undetected probability for uniformly random fake sets, by enumerating
/// every subset. Independent of the overlap grouping; used to cross-check it.
pub fn intercept_uniform_by_enumeration(sc: &Scenario) -> Result<f64> {
    check_exact_size(sc)?;
    intercept_uniform_enumerated(sc, &sc.initial)
}

fn reference_claims(sc: &Scenario, strategy: &CheatStrategy, exact: &Exact) -> Vec<ReferenceClaim> {
    if sc.qubits != 4 || sc.marked.len() != 4 {
        return Vec::new();
    }
    match strategy {
        CheatStrategy::GuessDiffusion { guess: GuessChoice::Uniform } => vec![
            ReferenceClaim {
                quantity: "probability of guessing the preparation".into(),
                claimed: 1.0 / 256.0,
                computed: 1.0 / guess_space_size(4) as f64,
            },
            ReferenceClaim {
                quantity: "detection probability".into(),
                claimed: 11.0 / 16.0,
                computed: 1.0 - exact.undetected,
            },
        ],
        CheatStrategy::InterceptResend { fake_marked: FakeChoice::Uniform, .. } => vec![
            ReferenceClaim {
                quantity: "probability of resending the dealer's exact set".into(),
                claimed: 1.0 / 1820.0,
                computed: 1.0 / marked_set_space(16, 4).expect("small") as f64,
            },
            ReferenceClaim {
                quantity: "undetected probability".into(),
                claimed: 1.0 / 728.0,
                computed: exact.undetected,
            },
        ],
        _ => Vec::new(),
    }
}

/// Exact detection statistics of `strategy` against `sc` (the scenario's own
/// adversary field is ignored).
pub fn exact_detection_probability(sc: &Scenario, strategy: &CheatStrategy) -> Result<DetectionReport> {
    check_exact_size(sc)?;
    strategy.check_dimensions(sc)?;
    let exact = exact_undetected(sc, strategy)?;
    let honest = exact_undetected(sc, &CheatStrategy::Honest)?;
    let claims = reference_claims(sc, strategy, &exact);
    // summed probabilities can overshoot 1 by a few ulps
    let undetected = exact.undetected.clamp(0.0, 1.0);
    Ok(DetectionReport {
        strategy: strategy.to_string(),
        qubits: sc.qubits,
        marked: sc.marked.len(),
        detection: 1.0 - undetected,
        undetected,
        honest_miss: 1.0 - honest.undetected.clamp(0.0, 1.0),
        cheater_success: exact.cheater_success,
        space_size: exact.space_size,
        monte_carlo: None,
        claims,
    })
}

/// Runs `trials` protocol repetitions with the adversary hook set to `strategy`.
pub fn monte_carlo_detection(sc: &Scenario, strategy: &CheatStrategy, trials: u64, seed: u64) -> Result<(u64, u64)> {
    let run = sc.clone().with_adversary(strategy.clone()).with_trials(trials, seed);
    let stats = run_session(&run)?.stats;
    Ok((stats.trials - stats.marked_hits(), stats.trials))
}

/// Exact statistics plus a Monte Carlo estimate from `trials` sessions.
pub fn detection_report(sc: &Scenario, strategy: &CheatStrategy, trials: u64, seed: u64) -> Result<DetectionReport> {
    let mut report = exact_detection_probability(sc, strategy)?;
    if trials > 0 {
        let (detected, trials) = monte_carlo_detection(sc, strategy, trials, seed)?;
        let estimate = detected as f64 / trials as f64;
        let p = report.detection.clamp(0.0, 1.0);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        report.monte_carlo = Some(MonteCarloEstimate {
            trials,
            detected,
            estimate,
            sigma,
            within_three_sigma: (estimate - p).abs() <= (3.0 * sigma).max(NORM_TOLERANCE),
        });
    }
    Ok(report)
}

/// Intercept-resend with a specific fake marked set built on the dealer's preparation.
pub fn intercept_resend_report(sc: &Scenario, fake: &MarkedSet, trials: u64, seed: u64) -> Result<DetectionReport> {
    if fake.len() != sc.marked.len() {
        return Err(Error::config(format!(
            "fake marked set has {} states, dealer uses {}",
            fake.len(),
            sc.marked.len()
        )));
    }
    let strategy = CheatStrategy::InterceptResend { fake_marked: FakeChoice::Fixed(fake.clone()), fake_initial: None };
    detection_report(sc, &strategy, trials, seed)
}

/// The ten product preparations tabulated against the uniform-start oracle output.
pub const TABLE1_PREPARATIONS: [[Letter; 4]; 10] = {
    use Letter::*;
    [
        [Plus, Plus, Plus, Plus],
        [Plus, Minus, Plus, Minus],
        [Minus, Minus, Plus, Plus],
        [Minus, Minus, Minus, Minus],
        [PlusI, PlusI, PlusI, PlusI],
        [MinusI, MinusI, MinusI, MinusI],
        [Plus, Plus, PlusI, PlusI],
        [MinusI, PlusI, MinusI, PlusI],
        [Minus, Minus, MinusI, MinusI],
        [Plus, Minus, PlusI, MinusI],
    ]
};

/// Marked set that reproduces the tabulated rows.
pub const TABLE1_DEFAULT_MARKED: [usize; 4] = [1, 3, 5, 7];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    /// 1-based row number.
    pub row: usize,
    pub preparation: ProductState,
    /// `⟨S_i| P_w |S_1⟩`
    pub overlap: Amplitude,
    pub decoded: StateVector,
    /// Zero overlap: the decoded state is `−P_w|S_1⟩`.
    pub shorthand: bool,
}

/// Decodes `P_w|+⟩^⊗4` about each tabulated preparation.
pub fn table1_report(marked: &MarkedSet) -> Result<Vec<Table1Row>> {
    if marked.len() != 4 {
        return Err(Error::config(format!("table needs 4 marked states, got {}", marked.len())));
    }
    marked.check_range(4)?;
    let encoded = apply_oracle(&ProductState::uniform_plus(4)?.expand(), marked)?;
    TABLE1_PREPARATIONS
        .iter()
        .enumerate()
        .map(|(k, letters)| {
            let preparation = ProductState::new(letters.to_vec())?;
            let axis = preparation.expand();
            let overlap = inner_product(&axis, &encoded)?;
            Ok(Table1Row {
                row: k + 1,
                decoded: apply_diffusion(&encoded, &axis)?,
                shorthand: overlap.norm() < NORM_TOLERANCE,
                overlap,
                preparation,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq11_scenario() -> Scenario {
        Scenario::multi_marked(4, MarkedSet::new(vec![4, 6, 8, 11]).unwrap()).unwrap()
    }

    fn brute_census(n: usize, m: usize) -> Vec<u128> {
        let reference: Vec<usize> = (0..m).collect();
        let mut counts = vec![0u128; m + 1];
        for_each_subset(n, m, |s| {
            counts[s.iter().filter(|i| reference.contains(i)).count()] += 1;
            Ok(())
        })
        .unwrap();
        counts
    }

    #[test]
    fn space_sizes() {
        assert_eq!(guess_space_size(4), 256);
        assert_eq!(guess_space_size(1), 4);
        assert_eq!(guess_space_size(2), 16);
        assert_eq!(marked_set_space(16, 4), Some(1820));
        assert_eq!(marked_set_space(16, 0), Some(1));
        assert_eq!(marked_set_space(16, 1), Some(16));
        assert_eq!(marked_set_space(1024, 256), None);
    }

    #[test]
    fn census_sixteen_four() {
        let c = overlap_census(16, 4).unwrap();
        assert_eq!(c, vec![495, 880, 396, 48, 1]);
        assert_eq!(c, brute_census(16, 4));
        assert_eq!(c.iter().sum::<u128>(), 1820);
    }

    #[test]
    fn census_matches_enumeration_small() {
        for n in 1..=14usize {
            for m in 0..=n {
                assert_eq!(overlap_census(n as u64, m as u64).unwrap(), brute_census(n, m), "N={n} M={m}");
            }
        }
    }

    #[test]
    fn overlap_probabilities_match_census() {
        for (n, m) in [(16u64, 4u64), (8, 2), (10, 7), (20, 10)] {
            let census = overlap_census(n, m).unwrap();
            let total = binomial(n, m).unwrap() as f64;
            for (p, c) in overlap_probabilities(n, m).iter().zip(census) {
                assert!((p - c as f64 / total).abs() < 1e-14, "N={n} M={m}");
            }
        }
    }

    #[test]
    fn subsets_in_lexicographic_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn correct_guess_is_undetected() {
        let sc = eq11_scenario();
        let r = exact_detection_probability(
            &sc,
            &CheatStrategy::GuessDiffusion { guess: GuessChoice::Fixed(sc.initial.clone()) },
        )
        .unwrap();
        assert!(r.detection.abs() < 1e-12);
    }

    #[test]
    fn zero_overlap_guess_detects_three_quarters() {
        let sc = eq11_scenario();
        let register = dealer_prepare(&sc).unwrap();
        let guess = ProductState::enumerate(4)
            .find(|g| inner_product(&g.expand(), &register).unwrap().norm() < 1e-12)
            .expect("some preparation is orthogonal");
        let r = exact_detection_probability(&sc, &CheatStrategy::GuessDiffusion { guess: GuessChoice::Fixed(guess) })
            .unwrap();
        assert!((r.detection - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uniform_guess_average_and_claims() {
        let sc = eq11_scenario();
        let r =
            exact_detection_probability(&sc, &CheatStrategy::GuessDiffusion { guess: GuessChoice::Uniform }).unwrap();
        // 192/256, frozen from an independent numpy enumeration
        assert!((r.detection - 0.75).abs() < 1e-12);
        assert_eq!(r.space_size, Some(256));
        assert!(r.claims[0].agrees());
        assert!(!r.claims[1].agrees());
    }

    #[test]
    fn intercept_overlap_one() {
        let sc = eq11_scenario();
        let fake = MarkedSet::new(vec![4, 0, 1, 2]).unwrap();
        let r = intercept_resend_report(&sc, &fake, 0, 0).unwrap();
        assert!((r.undetected - 0.25).abs() < 1e-12);
        let own = intercept_resend_report(&sc, &sc.marked, 0, 0).unwrap();
        assert!((own.undetected - 1.0).abs() < 1e-12);
        assert!(intercept_resend_report(&sc, &MarkedSet::new(vec![1]).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn intercept_uniform_two_routes_agree() {
        let sc = eq11_scenario();
        let r = exact_detection_probability(
            &sc,
            &CheatStrategy::InterceptResend { fake_marked: FakeChoice::Uniform, fake_initial: None },
        )
        .unwrap();
        let enumerated = intercept_uniform_by_enumeration(&sc).unwrap();
        assert!((r.undetected - enumerated).abs() < 1e-12);
        assert!((r.undetected - 0.25).abs() < 1e-12);
        assert_eq!(r.space_size, Some(1820));
        assert!(!r.claims[1].agrees());
    }

    #[test]
    fn capture_all_measure_immediately() {
        let sc = eq11_scenario();
        let r =
            exact_detection_probability(&sc, &CheatStrategy::CaptureAll { policy: CapturePolicy::MeasureImmediately })
                .unwrap();
        // collapsed |j⟩ decoded about |+⟩^⊗4: 52/64 marked mass if j ∈ W, 4/64 otherwise
        let expected = (4.0 * 52.0 + 12.0 * 4.0) / (16.0 * 64.0);
        assert!((r.undetected - expected).abs() < 1e-12);
        assert!((r.cheater_success.unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn table1_default_rows() {
        let rows = table1_report(&MarkedSet::new(TABLE1_DEFAULT_MARKED.to_vec()).unwrap()).unwrap();
        let shorthand: Vec<usize> = rows.iter().filter(|r| r.shorthand).map(|r| r.row).collect();
        assert_eq!(shorthand, vec![2, 3, 4, 5, 6, 9, 10]);
        let first = &rows[0].decoded;
        for i in 0..16 {
            let e = if [1, 3, 5, 7].contains(&i) { 0.5 } else { 0.0 };
            assert!((first.amplitude(i).re - e).abs() < 1e-12 && first.amplitude(i).im.abs() < 1e-12);
        }
    }

    #[test]
    fn table1_rejects_bad_marked_sets() {
        assert!(table1_report(&MarkedSet::new(vec![1, 2, 3]).unwrap()).is_err());
        assert!(table1_report(&MarkedSet::new(vec![1, 2, 3, 16]).unwrap()).is_err());
    }
}
