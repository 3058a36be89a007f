use num_complex::Complex64;
use qunet_core::accelerometer::*;
use qunet_core::amplifier::{Feedback, OpAmpStage, SourceLabels};
use qunet_core::spectra::K_B;

fn actuator(params: &AcceleroParams) -> OpAmpStage {
    let r = params.noise_impedance;
    OpAmpStage::new(r, r, r, Feedback::Capacitor(20e-12))
        .unwrap()
        .with_temperatures(300.0, 300.0, 300.0)
        .unwrap()
        .with_labels(SourceLabels::new("x", "act.r", "act.a", "act.a'"))
        .unwrap()
}

#[test]
fn langevin_row_reproduces_the_force_spectrum() {
    let p = AcceleroParams::microscope();
    let det = default_detection_stage(&p).unwrap();
    let b = accelerometer_budget(&p, &det, Some(DEFAULT_TRANSDUCTION_GAIN)).unwrap();
    let expected = 2.0 * 1.3e-5 * K_B * 300.0;
    assert!(((b.langevin - expected) / expected).abs() < 1e-12);
    assert!(((langevin_force_psd(&p) - expected) / expected).abs() < 1e-15);
}

#[test]
fn budget_adds_up() {
    let p = AcceleroParams::microscope();
    let det = default_detection_stage(&p).unwrap();
    for kappa in [1e-20, 1e-18, 1e-15, 1e-12] {
        let b = accelerometer_budget(&p, &det, Some(kappa)).unwrap();
        let sum: f64 = b.budget.entries.iter().map(|e| e.contribution).sum();
        assert!(((b.langevin + b.detection - b.total()) / b.total()).abs() < 1e-12);
        assert!(((sum - b.total()) / b.total()).abs() < 1e-12);
        // detection noise scales as kappa^2
        let half = accelerometer_budget(&p, &det, Some(kappa / 2.0)).unwrap();
        assert!((b.detection / half.detection - 4.0).abs() < 1e-9);
    }
}

#[test]
fn large_transduction_gain_makes_detection_dominate() {
    let p = AcceleroParams::microscope();
    let det = default_detection_stage(&p).unwrap();
    assert!(!accelerometer_budget(&p, &det, Some(1e-18)).unwrap().is_detection_limited());
    assert!(accelerometer_budget(&p, &det, Some(1e-10)).unwrap().is_detection_limited());
}

#[test]
fn servo_readout_keeps_the_free_estimator_at_high_loop_gain() {
    let p = AcceleroParams::microscope();
    let det = default_detection_stage(&p).unwrap();
    let act = actuator(&p);
    let names = ["act.r", "act.a", "act.a'"];
    let free = free_force_estimator(&p, &det, Some(1.0)).unwrap().extended_with_zeros(names).unwrap();
    let act_mu = act.estimator(p.carrier_omega).unwrap();
    let worst = act_mu.weights().iter().map(|(_, m)| m.norm()).fold(0.0, f64::max);

    let tight = servo_force_estimator(&p, &det, &act, Some(1.0), Complex64::new(1e6, 0.0)).unwrap();
    assert!(servo_invariance_check(&free, &tight, 1e-5).unwrap());
    let diff = free.coefficients().max_weight_difference(tight.coefficients()).unwrap();
    assert!(diff <= worst / 1e6 * (1.0 + 1e-9));

    let loose = servo_force_estimator(&p, &det, &act, Some(1.0), Complex64::new(1.0, 0.0)).unwrap();
    assert!(!servo_invariance_check(&free, &loose, 1e-5).unwrap());
}

#[test]
fn cold_damping_lowers_the_effective_temperature() {
    let p = AcceleroParams::microscope();
    let det = default_detection_stage(&p).unwrap();
    let total = accelerometer_budget(&p, &det, Some(DEFAULT_TRANSDUCTION_GAIN)).unwrap().total();
    let passive = cold_damping_temperature(total, p.mechanical_damping, 0.0).unwrap();
    assert!((passive / p.mechanical_theta - 1.0).abs() < 1e-3);
    for ratio in [1.0, 10.0, 1e3] {
        let theta = cold_damping_temperature(total, p.mechanical_damping, ratio * p.mechanical_damping).unwrap();
        assert!(theta < p.mechanical_theta);
    }
}

#[test]
fn zero_damping_or_temperature_removes_the_langevin_term() {
    let det = default_detection_stage(&AcceleroParams::microscope()).unwrap();
    for p in [
        AcceleroParams { mechanical_damping: 0.0, ..AcceleroParams::microscope() },
        AcceleroParams { mechanical_theta: 0.0, ..AcceleroParams::microscope() },
    ] {
        let b = accelerometer_budget(&p, &det, Some(DEFAULT_TRANSDUCTION_GAIN)).unwrap();
        assert_eq!(b.langevin, 0.0);
        assert!(b.detection > 0.0);
    }
}
