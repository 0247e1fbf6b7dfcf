use gravstat::correlations::{g2_cos_theta_form, g2_ideal, g2_sin2theta_form, g2_thermal_detector, s_ordered_moment};
use gravstat::counting::{closed_form_p012, prob_n_generating, prob_n_hafnian, theta_zero_p01};
use gravstat::fock::{
    bar_after_swap, build_gw_density, build_gw_density_adaptive, joint_after_swap, moments_and_g2,
    oracle_moments_and_g2, oracle_probabilities,
};
use gravstat::{Complex64, Error, GwSignalParams64, LadderMoments64, MomentRequest};
use proptest::prelude::*;

fn gw(alpha: Complex64, r: f64, theta: f64, nbar: f64) -> GwSignalParams64 {
    GwSignalParams64::new(alpha, r, theta, nbar).unwrap()
}

/// Detector moments in the Fock beamsplitter's phase frame, where `ā_bar = −i sin γt ā_gw`.
fn bar_moments_fock_frame(p: &GwSignalParams64, gamma_t: f64) -> LadderMoments64 {
    let s = gamma_t.sin();
    let (n, m) = p.fluctuation_moments();
    LadderMoments64::single_mode(s * s * n, -m * (s * s), Complex64::new(0.0, -s) * p.alpha)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, .. ProptestConfig::default() })]

    #[test]
    fn probability_routes_agree_with_oracle(
        am in 0.0..2.0f64, ap in 0.0..std::f64::consts::TAU, r in 0.0..1.0f64, th in 0.0..std::f64::consts::TAU,
        nbar in 0.0..2.0f64, gt in 0.05..1.5f64,
    ) {
        let p = gw(Complex64::from_polar(am, ap), r, th, nbar);
        let oracle = match oracle_probabilities(&p, gt, 5, None) {
            Ok(v) => v,
            Err(Error::Truncation { .. }) => return Err(TestCaseError::reject("beyond oracle cutoff")),
            Err(e) => panic!("{e}"),
        };
        let bar = LadderMoments64::detector_after_swap(&p, gt);
        for (n, o) in oracle.iter().enumerate() {
            let h = prob_n_hafnian(&bar, n).unwrap();
            let g = prob_n_generating(&bar, n).unwrap();
            prop_assert!((h - o).abs() < 1e-8, "n={n} hafnian {h} oracle {o}");
            prop_assert!((g - o).abs() < 1e-8, "n={n} generating {g} oracle {o}");
        }
    }

    #[test]
    fn normal_moments_agree_with_oracle(
        am in 0.0..1.2f64, ap in 0.0..std::f64::consts::TAU, r in 0.0..0.5f64, th in 0.0..std::f64::consts::TAU,
        nbar in 0.0..0.4f64, gt in 0.1..1.5f64,
    ) {
        let p = gw(Complex64::from_polar(am, ap), r, th, nbar);
        let state = match build_gw_density_adaptive(&p, 1e-13) {
            Ok(s) => s,
            Err(Error::Truncation { .. }) => return Err(TestCaseError::reject("beyond oracle cutoff")),
            Err(e) => panic!("{e}"),
        };
        let bar = bar_after_swap(&state, gt).unwrap();
        let gm = LadderMoments64::from_gw(&p);
        let bm = bar_moments_fock_frame(&p, gt);
        for k in 0..=4usize {
            for l in 0..=(4 - k) {
                let req = MomentRequest::normal(k, l).unwrap();
                let scale = 1.0 + state.normal_moment(k, k).unwrap().re.abs() + state.normal_moment(l, l).unwrap().re.abs();
                let d_gw = (s_ordered_moment(&gm, &req).unwrap() - state.normal_moment(k, l).unwrap()).norm();
                let d_bar = (s_ordered_moment(&bm, &req).unwrap() - bar.normal_moment(k, l).unwrap()).norm();
                prop_assert!(d_gw < 1e-8 * scale, "gw k={k} l={l} diff {d_gw}");
                prop_assert!(d_bar < 1e-8 * scale, "bar k={k} l={l} diff {d_bar}");
            }
        }
    }
}

#[test]
fn closed_form_low_counts_match_oracle() {
    for (alpha, r, theta, nbar, gt) in [
        (Complex64::new(0.8, 0.0), 0.3, 0.4, 0.2, 0.6),
        (Complex64::new(0.3, -0.5), 0.6, 2.0, 0.0, 1.1),
        (Complex64::new(0.0, 0.0), 0.5, 1.0, 0.5, 0.3),
    ] {
        let p = gw(alpha, r, theta, nbar);
        let o = oracle_probabilities(&p, gt, 2, None).unwrap();
        let (p0, p1, p2) = closed_form_p012(&p, gt).unwrap();
        assert!((p0 - o[0]).abs() < 1e-9 && (p1 - o[1]).abs() < 1e-9 && (p2 - o[2]).abs() < 1e-9);
    }
    let p = gw(Complex64::new(0.9, 0.0), 0.4, 0.0, 0.3);
    let o = oracle_probabilities(&p, 0.7, 1, None).unwrap();
    let (p0, p1) = theta_zero_p01(&p, 0.7);
    assert!((p0 - o[0]).abs() < 1e-9 && (p1 - o[1]).abs() < 1e-9);
}

#[test]
fn g2_cross_term_convention_is_cos_theta() {
    let p = gw(Complex64::new(1.2, 0.0), 0.5, 0.6, 0.3);
    let oracle = oracle_moments_and_g2(&p, 0.8, None).unwrap().g2;
    assert!((g2_ideal(&p).unwrap().g2.unwrap() - oracle).abs() < 1e-9);
    assert!((g2_cos_theta_form(&p) - oracle).abs() < 1e-9);
    assert!((g2_sin2theta_form(&p) - oracle).abs() > 1e-3);

    let complex_alpha = gw(Complex64::from_polar(1.0, 0.9), 0.4, 1.3, 0.1);
    let oracle = oracle_moments_and_g2(&complex_alpha, 0.5, None).unwrap().g2;
    assert!((g2_ideal(&complex_alpha).unwrap().g2.unwrap() - oracle).abs() < 1e-9);
}

#[test]
fn thermal_detector_g2_matches_oracle() {
    let dim = 24;
    let p = gw(Complex64::new(0.6, 0.2), 0.25, 0.8, 0.1);
    let gw_state = build_gw_density(&p, dim).unwrap();
    for (n_th, gt) in [(0.2, 0.4), (0.05, 1.1)] {
        let bar0 = build_gw_density(&GwSignalParams64::thermal(n_th), dim).unwrap();
        let joint = joint_after_swap(&gw_state, Some(&bar0), gt).unwrap();
        assert!(joint.diagnostics().valid());
        let m = moments_and_g2(&joint.partial_trace(1).unwrap()).unwrap();
        let rep = g2_thermal_detector(&p, n_th, gt).unwrap();
        assert!((rep.mean_n - m.mean_n).abs() < 1e-9);
        assert!((rep.g2.unwrap() - m.g2).abs() < 1e-8, "{} vs {}", rep.g2.unwrap(), m.g2);
    }
}
