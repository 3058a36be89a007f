//! Acceptance suite. Run with `cargo test -p qunet --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

mod common;

use std::cell::Cell;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use qunet::netlist::{parse, parse_with, serialize, ParseErrorKind, ParseOptions, Position};
use qunet_core::accelerometer::{acceleration_sensitivity_for, accelerometer_budget, default_detection_stage, AcceleroParams};
use qunet_core::amplifier::{matching_scan, Feedback, OpAmpStage, SourceLabels};
use qunet_core::cascade::{downstream_noise_fraction, StageChain};
use qunet_core::linalg::CMatrix;
use qunet_core::network::{Element, Network, PortSpec, GROUND};
use qunet_core::spectra::{johnson_voltage_psd, thermal_occupation, HBAR, K_B};
use qunet_core::Complex64;

use common::{document, log_uniform, render, Noise};

type Check = Result<String, String>;

struct Outcome {
    pass: bool,
    line: String,
}

fn criterion(id: u32, name: &str, limit_s: f64, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < Duration::from_secs_f64(limit_s);
    let (pass, detail) = match result {
        Ok(d) if in_time => (true, d),
        Ok(d) => (false, format!("{d}; too slow")),
        Err(d) => (false, d),
    };
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("{verdict} {id} {name}: {detail} [{:.3} s, limit {limit_s} s]", elapsed.as_secs_f64());
    Outcome { pass, line }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn matched_stage(gain: f64, omega: f64) -> OpAmpStage {
    let r = 50.0;
    // |G| = 2|Z|/R with Z = 1/(-i omega C)
    let c = 2.0 / (gain * r * omega);
    OpAmpStage::new(r, r, r, Feedback::Capacitor(c)).unwrap()
}

fn quantum_limit() -> Check {
    let omega = 2.0 * std::f64::consts::PI * 1e6;
    let mut detail = Vec::new();
    for (g, tol) in [(1e4, 2e-4), (1e6, 2e-6)] {
        let stage = matched_stage(g, omega);
        ensure((stage.gain(omega).norm() / g - 1.0).abs() < 1e-12, || format!("|G| = {}", stage.gain(omega).norm()))?;
        let sigma = stage.added_noise(omega).map_err(|e| e.to_string())?.total;
        ensure((sigma - 0.5).abs() < tol, || format!("|G| = {g:e}: Σ = {sigma}"))?;
        detail.push(format!("|G|={g:e}: Σ-1/2={:.3e}", sigma - 0.5));
    }
    Ok(detail.join(", "))
}

fn noise_matching() -> Check {
    let omega = 2.0 * std::f64::consts::PI * 1e6;
    let rl = 50.0;
    let stage = matched_stage(1e4, omega).with_temperatures(4.2, 4.2, 4.2).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..100).map(|k| rl / 100.0 * 10f64.powf(4.0 * k as f64 / 99.0)).collect();
    let scan = matching_scan(&stage, &grid, omega).map_err(|e| e.to_string())?;
    let best = scan.best_noise_impedance();
    let step = 10f64.powf(4.0 / 99.0);
    ensure((best / rl).ln().abs() <= step.ln() * (1.0 + 1e-9), || format!("argmin at R_a = {best}"))?;
    Ok(format!("argmin R_a = {best:.4} ohm, grid step x{step:.4}"))
}

fn cascade_suppression() -> Check {
    let omega = 2.0 * std::f64::consts::PI * 1e6;
    let labels2 = SourceLabels::new("m", "r", "b", "b'");
    let second = matched_stage(10.0, omega).with_labels(labels2).map_err(|e| e.to_string())?;
    let points = (0..=30)
        .map(|k| {
            let g = 10f64.powf(2.0 + 3.0 * k as f64 / 30.0);
            let first = matched_stage(g, omega).with_labels(SourceLabels::new("l", "m", "a", "a'"))?;
            let chain = StageChain::new(vec![first, second.clone()])?;
            Ok((g.ln(), downstream_noise_fraction(&chain, omega)?.ln()))
        })
        .collect::<qunet_core::Result<Vec<(f64, f64)>>>()
        .map_err(|e| e.to_string())?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = num / den;
    ensure((slope + 2.0).abs() <= 0.02, || format!("slope {slope}"))?;
    Ok(format!("log-log slope {slope:.6}"))
}

fn passive_network() -> impl Strategy<Value = (Network, usize, f64)> {
    (1usize..=4, log_uniform(1e3, 1e9)).prop_flat_map(|(nodes, omega)| {
        let port = (log_uniform(10.0, 1e3), 0..=nodes, 0..=nodes);
        let elem = (any::<bool>(), log_uniform(10.0, 1e3), 0..=nodes, 0..=nodes);
        (prop::collection::vec(port, 0..3), prop::collection::vec(elem, 0..6)).prop_map(move |(ports, elems)| {
            let mut net = Network::new();
            let mut lines = 0;
            for k in 1..=nodes {
                let port = PortSpec::new(format!("p{k}"), 50.0 * k as f64, 0.0).unwrap();
                net.add_line(port, k, GROUND).unwrap();
                net.add_element(format!("g{k}"), k, GROUND, Element::Capacitor(1.0 / (omega * 100.0 * k as f64))).unwrap();
                lines += 1;
            }
            for (i, (z, a, b)) in ports.into_iter().enumerate().filter(|(_, p)| p.1 != p.2) {
                net.add_line(PortSpec::new(format!("q{i}"), z, 0.0).unwrap(), a, b).unwrap();
                lines += 1;
            }
            for (i, (cap, mag, a, b)) in elems.into_iter().enumerate().filter(|(_, e)| e.2 != e.3) {
                let e = if cap { Element::Capacitor(1.0 / (omega * mag)) } else { Element::Inductor(mag / omega) };
                net.add_element(format!("e{i}"), a, b, e).unwrap();
            }
            (net, lines, omega)
        })
    })
}

/// |G| from 0.5 to 50 and all three feedback kinds.
fn random_stage() -> impl Strategy<Value = (OpAmpStage, f64)> {
    let imp = || log_uniform(10.0, 1e3);
    (imp(), imp(), imp(), log_uniform(0.5, 50.0), 0usize..3, log_uniform(1e3, 1e9)).prop_map(|(rl, rr, ra, g, kind, w)| {
        let z = g * (rl * rr).sqrt() / 2.0;
        let fb = match kind {
            0 => Feedback::Capacitor(1.0 / (w * z)),
            1 => Feedback::Inductor(z / w),
            _ => Feedback::Impedance(Complex64::new(0.0, -z)),
        };
        (OpAmpStage::new(rl, rr, ra, fb).unwrap(), w)
    })
}

fn commutators() -> Check {
    let worst_passive = Cell::new(0.0f64);
    runner(100)
        .run(&passive_network(), |(net, n, omega)| {
            let s = net.scattering(omega).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let r = (&s.matrix.adjoint() * &s.matrix).max_abs_diff(&CMatrix::identity(n));
            worst_passive.set(worst_passive.get().max(r));
            prop_assert!(r < 1e-10, "residual {r:e}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let worst_active = Cell::new(0.0f64);
    runner(100)
        .run(&random_stage(), |(stage, omega)| {
            let closed = stage.scattering(omega).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let solved = stage
                .to_network("amp", omega)
                .and_then(|n| n.scattering(omega))
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let r = closed.commutator_residual().max(solved.commutator_residual());
            worst_active.set(worst_active.get().max(r));
            prop_assert!(r < 1e-10, "residual {r:e}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("passive max |S†S-I| = {:.2e}, op-amp max |SJS†-J| = {:.2e}", worst_passive.get(), worst_active.get()))
}

fn microscope() -> Check {
    let p = AcceleroParams::microscope();
    let det = default_detection_stage(&p).map_err(|e| e.to_string())?;
    let b = accelerometer_budget(&p, &det, Some(1e-18)).map_err(|e| e.to_string())?;
    let sff = b.langevin;
    let sens = acceleration_sensitivity_for(b.total(), p.mass);
    ensure((sff / 1.1e-25 - 1.0).abs() < 0.05, || format!("Σ_FF = {sff:e}"))?;
    ensure((sens / 1.2e-12 - 1.0).abs() < 0.05, || format!("sensitivity = {sens:e}"))?;
    Ok(format!("Σ_FF = {sff:.4e} N^2/Hz, sensitivity = {sens:.4e} m s^-2/sqrt(Hz)"))
}

fn thermal_law() -> Check {
    let omega = 2.0 * std::f64::consts::PI * 1e6;
    let t = HBAR * omega / (K_B * 1e-3);
    let s = thermal_occupation(omega, t).map_err(|e| e.to_string())?;
    let classical = K_B * t / (HBAR * omega);
    let rel = ((s - classical) / s).abs();
    ensure(rel < 1e-6, || format!("classical limit off by {rel:e}"))?;
    for w in [1.0, omega, -omega, 1e15] {
        let zero = thermal_occupation(w, 0.0).map_err(|e| e.to_string())?;
        ensure(zero == 0.5, || format!("sigma(T=0) = {zero}"))?;
    }
    for t in [0.0, 0.01, 4.2, 300.0] {
        let base = johnson_voltage_psd(1.0, omega, t).map_err(|e| e.to_string())?;
        for r in [0.5, 50.0, 1e6] {
            let v = johnson_voltage_psd(r, omega, t).map_err(|e| e.to_string())?;
            ensure((v / (r * base) - 1.0).abs() < 1e-14, || format!("Johnson PSD not linear at R = {r}, T = {t}"))?;
        }
    }
    Ok(format!("classical rel. error {rel:.2e}, sigma(0 K) = 0.5, Johnson linear in R"))
}

fn estimator_oracle() -> Check {
    let worst_row = Cell::new(0.0f64);
    let worst_sigma = Cell::new(0.0f64);
    let temps = (0.0..300.0f64, 0.0..300.0f64, 0.0..300.0f64);
    runner(100)
        .run(&(random_stage(), temps), |((stage, omega), (ta, tc, tr))| {
            let fail = |e: qunet_core::Error| TestCaseError::fail(e.to_string());
            let stage = stage.with_temperatures(ta, tc, tr).map_err(fail)?;
            let l = stage.labels().clone();
            let est = stage.estimator(omega).map_err(fail)?;
            let row = stage.scattering(omega).map_err(fail)?.estimator(&l.signal, &l.readout).map_err(fail)?;
            for name in [&l.readout, &l.noise, &l.conj] {
                let (x, y) = (est.mu(name).unwrap(), row.mu(name).unwrap());
                let d = (x - y).norm() / (1.0 + x.norm());
                worst_row.set(worst_row.get().max(d));
                prop_assert!(d <= 1e-12, "{name}: {x} vs {y}");
            }
            // closed form, written out independently of the estimator
            let (rl, rr, ra) = (stage.left_impedance(), stage.right_impedance(), stage.noise_impedance(omega));
            let z = stage.feedback_impedance(omega);
            let sig = |t: f64| if t == 0.0 { 0.5 } else { 0.5 / (HBAR * omega / (2.0 * K_B * t)).tanh() };
            let closed = rl * rr / (4.0 * z.norm_sqr()) * sig(tr)
                + (1.0 / z + 1.0 / rl - 1.0 / ra).norm_sqr() * rl * ra / 4.0 * sig(ta)
                + (1.0 / z + 1.0 / rl + 1.0 / ra).norm_sqr() * rl * ra / 4.0 * sig(tc);
            let got = stage.added_noise(omega).map_err(fail)?.total;
            let d = ((got - closed) / closed).abs();
            worst_sigma.set(worst_sigma.get().max(d));
            prop_assert!(d <= 1e-12, "Σ {got} vs {closed}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("max mu mismatch {:.2e}, max Σ mismatch {:.2e}", worst_row.get(), worst_sigma.get()))
}

fn parser_round_trip() -> Check {
    let lenient = ParseOptions { strict: false };
    let noise = prop::collection::vec(any::<u8>(), 1..64);
    runner(500)
        .run(&(document(), noise, any::<prop::sample::Index>()), |(doc, noise, at)| {
            let canonical = serialize(&doc);
            let back = parse_with(&canonical, lenient).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(serialize(&back), canonical.clone());

            let text = render(&doc, &mut Noise::new(&noise));
            let back = parse_with(&text, lenient).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&back, &doc);

            // a bad line anywhere is reported where it is
            let mut lines: Vec<&str> = canonical.lines().collect();
            let k = at.index(lines.len() + 1);
            lines.insert(k, "  frobnicate 1");
            let errors = parse_with(&lines.join("\n"), lenient).unwrap_err().0;
            let expected = Position { line: k + 1, column: 3 };
            prop_assert!(
                errors.iter().any(|e| e.position == expected && matches!(e.kind, ParseErrorKind::UnknownKeyword(_))),
                "{errors:?}"
            );
            prop_assert!(errors.iter().all(|e| e.position.line >= 1 && e.position.column >= 1));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let errors = parse("line a impedance=-5 temperature=0\n").unwrap_err().0;
    ensure(errors[0].position == Position { line: 1, column: 18 }, || format!("{errors:?}"))?;
    Ok("500 documents round-trip; error positions located".into())
}

#[test]
fn acceptance() {
    let outcomes = [
        criterion(1, "quantum limit", 1.0, quantum_limit),
        criterion(2, "noise matching", 1.0, noise_matching),
        criterion(3, "cascade suppression", 1.0, cascade_suppression),
        criterion(4, "commutator preservation", 5.0, commutators),
        criterion(5, "accelerometer numbers", 1.0, microscope),
        criterion(6, "thermal-law limits", 1.0, thermal_law),
        criterion(7, "estimator consistency", 2.0, estimator_oracle),
        criterion(8, "parser round-trip", 5.0, parser_round_trip),
    ];
    for o in &outcomes {
        println!("{}", o.line);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.line.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
