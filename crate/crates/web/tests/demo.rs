use grover_qss_web::demo::{decode_explorer, iteration_trace, parse_guess, success_curve};

#[test]
fn curve_has_certainty_point() {
    let c = success_curve(10).unwrap();
    let i = c.fraction.iter().position(|&x| x == 0.25).unwrap();
    assert!((c.success[i] - 1.0).abs() < 1e-12);
    assert_eq!(c.fraction.len(), c.success.len());
    assert!(success_curve(1).is_err());
}

#[test]
fn trace_three_qubits() {
    let t = iteration_trace(3, 1, 3).unwrap();
    assert_eq!(t.len(), 4);
    assert!((t[2].success - 121.0 / 128.0).abs() < 1e-12);
    assert!((t[3].success - 169.0 / 512.0).abs() < 1e-12);
    assert!(iteration_trace(3, 9, 1).is_err());
}

#[test]
fn decode_correct_and_wrong_guess() {
    let d = decode_explorer("+ + + +", "0100,0110,1000,1011").unwrap();
    assert!(d.detection.abs() < 1e-12);
    let on_marked: f64 = d.outcomes.iter().filter(|o| o.marked).map(|o| o.probability).sum();
    assert!((on_marked - 1.0).abs() < 1e-12);

    // zero overlap with the uniform-start register: reflection leaves 3/4 off the marked set
    let d = decode_explorer("plus,minus,plus,minus", "1,3,5,7").unwrap();
    assert!(d.overlap_re.abs() < 1e-12 && d.overlap_im.abs() < 1e-12);
    assert!((d.detection - 0.75).abs() < 1e-12);
    let total: f64 = d.outcomes.iter().map(|o| o.probability).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn bad_input_is_reported() {
    assert!(parse_guess("+ + +").is_err());
    assert!(parse_guess("+ + + x").is_err());
    assert!(decode_explorer("+ + + +", "1,2").is_err());
}
