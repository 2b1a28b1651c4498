use grover_qss::adversary::{
    detection_report, exact_detection_probability, overlap_census, table1_report, CapturePolicy, CheatStrategy,
    FakeChoice, GuessChoice,
};
use grover_qss::grover::{
    brute_force_check, closed_form_trace, failure_one_iteration, success_one_iteration, SearchSpec,
};
use grover_qss::protocol::{dealer_prepare, encode_message, run_session, Half, Scenario, Scheme};
use grover_qss::statevec::{
    apply_diffusion, apply_oracle, inner_product, measure_distribution, Letter, MarkedSet, ProductState, StateVector,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn random_state(qubits: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << qubits).prop_filter_map("zero vector", |v| {
        StateVector::normalized(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).ok()
    })
}

fn state_and_marked() -> impl Strategy<Value = (StateVector, MarkedSet)> {
    (1usize..=10).prop_flat_map(|n| {
        let dim = 1usize << n;
        (random_state(n), subsequence((0..dim).collect::<Vec<_>>(), 1..=dim.min(16)))
            .prop_map(|(s, idx)| (s, MarkedSet::new(idx).unwrap()))
    })
}

fn state_pair() -> impl Strategy<Value = (StateVector, StateVector)> {
    (1usize..=8).prop_flat_map(|n| (random_state(n), random_state(n)))
}

fn letter() -> impl Strategy<Value = Letter> {
    prop::sample::select(Letter::ALL.to_vec())
}

fn product(qubits: usize) -> impl Strategy<Value = ProductState> {
    prop::collection::vec(letter(), qubits).prop_map(|l| ProductState::new(l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn oracle_preserves_norm_and_is_involution((s, w) in state_and_marked()) {
        let once = apply_oracle(&s, &w).unwrap();
        prop_assert!((once.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        let twice = apply_oracle(&once, &w).unwrap();
        prop_assert!(twice.max_abs_diff(&s).unwrap() <= 1e-15);
    }

    #[test]
    fn diffusion_preserves_norm_and_is_involution((s, a) in state_pair()) {
        let once = apply_diffusion(&s, &a).unwrap();
        prop_assert!((once.norm_sqr() - 1.0).abs() < 1e-12);
        let twice = apply_diffusion(&once, &a).unwrap();
        prop_assert!(twice.max_abs_diff(&s).unwrap() < 1e-12);
    }

    #[test]
    fn distribution_sums_to_one((s, _) in state_pair()) {
        let total: f64 = measure_distribution(&s).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_overlap_reflection_negates(p in (1usize..=6).prop_flat_map(product), seed in any::<u64>()) {
        // Project a random state onto the complement of the axis, then normalise.
        let axis = p.expand();
        let mut rng = grover_qss::rng::seeded(seed);
        use rand::Rng;
        let raw: Vec<Complex64> = (0..axis.dim())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let v = StateVector::normalized(raw).unwrap();
        let ov = inner_product(&axis, &v).unwrap();
        let projected: Vec<Complex64> = v
            .amplitudes()
            .iter()
            .zip(axis.amplitudes())
            .map(|(x, a)| x - ov * a)
            .collect();
        if let Ok(s) = StateVector::normalized(projected) {
            prop_assert!(inner_product(&axis, &s).unwrap().norm() < 1e-12);
            let out = apply_diffusion(&s, &axis).unwrap();
            prop_assert!(out.max_abs_diff(&s.negated()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn product_expansion_unit_norm(p in (1usize..=10).prop_flat_map(product)) {
        prop_assert!((p.expand().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn honest_multi_marked_is_certain(
        (n, p, idx) in (2usize..=6).prop_flat_map(|n| {
            let dim = 1usize << n;
            (Just(n), product(n), subsequence((0..dim).collect::<Vec<_>>(), dim / 4))
        }),
        seed in any::<u64>(),
    ) {
        let mut sc = Scenario::multi_marked(n, MarkedSet::new(idx).unwrap()).unwrap();
        sc.initial = p;
        let decoded = apply_diffusion(&dealer_prepare(&sc).unwrap(), &sc.initial.expand()).unwrap();
        for i in 0..sc.dim() {
            if !sc.marked.contains(i) {
                prop_assert!(decoded.amplitude(i).norm() < 1e-12);
            }
        }
        let out = run_session(&sc.with_trials(50, seed)).unwrap();
        prop_assert_eq!(out.stats.marked_hits(), 50);
    }

    #[test]
    fn transcripts_respect_phase_order(
        (n, idx) in (2usize..=5).prop_flat_map(|n| {
            let dim = 1usize << n;
            (Just(n), subsequence((0..dim).collect::<Vec<_>>(), dim / 4))
        }),
        strategy_pick in 0usize..5,
        seed in any::<u64>(),
    ) {
        let base = Scenario::multi_marked(n, MarkedSet::new(idx).unwrap()).unwrap();
        let strategy = match strategy_pick {
            0 => CheatStrategy::Honest,
            1 => CheatStrategy::GuessDiffusion { guess: GuessChoice::Uniform },
            2 => CheatStrategy::InterceptResend { fake_marked: FakeChoice::Uniform, fake_initial: None },
            3 => CheatStrategy::CaptureAll { policy: CapturePolicy::MeasureImmediately },
            _ => CheatStrategy::CaptureAll { policy: CapturePolicy::GuessDiffusionThenMeasure },
        };
        let sc = base.with_adversary(strategy).with_trials(3, seed);
        let a = run_session(&sc).unwrap();
        a.first_transcript.check_order().unwrap();
        let b = run_session(&sc).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn encoding_is_exact_partition(
        (n, idx) in (3usize..=8).prop_flat_map(|n| {
            let dim = 1usize << n;
            (Just(n), subsequence((0..dim).collect::<Vec<_>>(), dim / 4))
        }),
    ) {
        let marked = MarkedSet::new(idx).unwrap();
        let t = encode_message(b"left", b"right", n, &marked).unwrap();
        let a: Vec<usize> = t.indices(Half::A).collect();
        let b: Vec<usize> = t.indices(Half::B).collect();
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(a.iter().all(|i| b.iter().all(|j| i < j)));
        let mut all = a.clone();
        all.extend(&b);
        prop_assert_eq!(all.as_slice(), marked.indices());
    }
}

#[test]
fn closed_form_matches_simulation_over_grid() {
    for n in 2..=8usize {
        let size = 1u64 << n;
        for m in [1, 2, size / 4, size / 2] {
            let spec = SearchSpec::new(size, m).unwrap();
            // spread the marked states instead of bunching them at the start
            let stride = (size / m) as usize;
            let marked = MarkedSet::new((0..m as usize).map(|k| k * stride + (k % stride.max(1))).collect()).unwrap();
            for k in 0..=5 {
                let dev = brute_force_check(spec, k, &marked).unwrap();
                assert!(dev < 1e-12, "n={n} M={m} k={k}: {dev}");
            }
        }
    }
}

#[test]
fn complement_identity_full_range() {
    let mut size = 4u64;
    while size <= 1024 {
        for m in 1..=size {
            let spec = SearchSpec::new(size, m).unwrap();
            let sum = success_one_iteration(spec) + failure_one_iteration(spec);
            assert!((sum - 1.0).abs() < 1e-12, "N={size} M={m}");
        }
        size *= 2;
    }
}

#[test]
fn certainty_only_at_quarter_or_everything() {
    let mut size = 4u64;
    while size <= 4096 {
        for m in 1..=size {
            let p = success_one_iteration(SearchSpec::new(size, m).unwrap());
            let certain = (p - 1.0).abs() < 1e-12;
            assert_eq!(certain, 4 * m == size || m == size, "N={size} M={m} p={p}");
        }
        size *= 2;
    }
}

#[test]
fn trace_rows_normalised() {
    for n in 1..=12usize {
        let size = 1u64 << n;
        for m in [1, size / 4, size / 2, size].into_iter().filter(|&m| m >= 1) {
            let trace = closed_form_trace(SearchSpec::new(size, m).unwrap(), 20);
            assert!(trace.normalization_error() < 1e-12, "N={size} M={m}");
            for r in &trace.records {
                let expected = m as f64 * r.marked * r.marked;
                assert!((r.success - expected).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn census_identities_against_enumeration() {
    fn choose(n: u64, k: u64) -> u128 {
        grover_qss::adversary::binomial(n, k).unwrap()
    }
    for n in 1..=20u64 {
        for m in 0..=n.min(8) {
            let census = overlap_census(n, m).unwrap();
            assert_eq!(census.iter().sum::<u128>(), choose(n, m));
            let weighted: u128 = census.iter().enumerate().map(|(k, c)| k as u128 * c).sum();
            // Σ k·count(k) = M·C(N−1, M−1)
            if m > 0 {
                assert_eq!(weighted, m as u128 * choose(n - 1, m - 1));
            }
        }
    }
    // brute force subset enumeration at N = 20, M = 4
    let reference = [0usize, 1, 2, 3];
    let mut counts = [0u128; 5];
    for a in 0..20usize {
        for b in a + 1..20 {
            for c in b + 1..20 {
                for d in c + 1..20 {
                    let k = [a, b, c, d].iter().filter(|x| reference.contains(x)).count();
                    counts[k] += 1;
                }
            }
        }
    }
    assert_eq!(overlap_census(20, 4).unwrap(), counts.to_vec());
}

#[test]
fn zero_overlap_rows_equal_negated_register() {
    for marked in [vec![1, 3, 5, 7], vec![4, 6, 8, 11], vec![0, 5, 10, 15]] {
        let marked = MarkedSet::new(marked).unwrap();
        let register = apply_oracle(&ProductState::uniform_plus(4).unwrap().expand(), &marked).unwrap();
        for row in table1_report(&marked).unwrap() {
            assert_eq!(row.shorthand, row.overlap.norm() < 1e-12);
            if row.shorthand {
                assert!(row.decoded.max_abs_diff(&register.negated()).unwrap() < 1e-12);
            }
        }
    }
}

#[test]
fn correct_guess_is_the_only_null() {
    for (initial, marked) in
        [(vec!["plus"; 4], vec![4, 6, 8, 11]), (vec!["plus_i", "minus", "plus", "minus_i"], vec![0, 3, 9, 14])]
    {
        let mut sc = Scenario::multi_marked(4, MarkedSet::new(marked).unwrap()).unwrap();
        sc.initial = ProductState::parse_list(&initial).unwrap();
        for guess in ProductState::enumerate(4) {
            let r = exact_detection_probability(
                &sc,
                &CheatStrategy::GuessDiffusion { guess: GuessChoice::Fixed(guess.clone()) },
            )
            .unwrap();
            let same = guess.expand().equal_up_to_phase(&sc.initial.expand(), 1e-12);
            assert_eq!(r.detection.abs() < 1e-12, same, "guess {guess}");
        }
    }
}

#[test]
fn monte_carlo_within_three_sigma() {
    let sc = Scenario::multi_marked(4, MarkedSet::new(vec![4, 6, 8, 11]).unwrap()).unwrap();
    let strategies = [
        CheatStrategy::Honest,
        CheatStrategy::GuessDiffusion { guess: GuessChoice::Uniform },
        CheatStrategy::InterceptResend { fake_marked: FakeChoice::Uniform, fake_initial: None },
        CheatStrategy::InterceptResend {
            fake_marked: FakeChoice::Fixed(MarkedSet::new(vec![4, 0, 1, 2]).unwrap()),
            fake_initial: None,
        },
        CheatStrategy::CaptureAll { policy: CapturePolicy::MeasureImmediately },
        CheatStrategy::CaptureAll { policy: CapturePolicy::GuessDiffusionThenMeasure },
    ];
    for (k, s) in strategies.iter().enumerate() {
        let r = detection_report(&sc, s, 100_000, 1000 + k as u64).unwrap();
        let mc = r.monte_carlo.unwrap();
        assert!(mc.within_three_sigma, "{s}: exact {} vs mc {}", r.detection, mc.estimate);
    }
}

#[test]
fn single_marked_scenario_validates_scheme() {
    let sc = Scenario::single_marked(3, 6, 1).unwrap();
    assert_eq!(sc.scheme, Scheme::SingleMarked);
    let out = run_session(&sc.with_trials(10_000, 5)).unwrap();
    let freq = out.stats.marked_hits() as f64 / 10_000.0;
    assert!((freq - 121.0 / 128.0).abs() < 0.02, "{freq}");
}
