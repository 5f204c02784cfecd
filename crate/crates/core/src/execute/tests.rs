use super::*;
use crate::noise::{mcm_channel, McmNoiseSpec, QubitNoiseParams};
use crate::sequences::{alap_schedule, insert_dd, Circuit, DDKind, DDSequenceSpec, GateDurations};
use crate::simcore::PauliObservable;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn bell() -> Vec<Complex64> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    vec![h, 0.0.into(), 0.0.into(), h]
}

fn noisy() -> NoiseModel {
    let mut m = NoiseModel::uniform(
        6,
        QubitNoiseParams {
            t1: 245_000.0,
            t2: 175_000.0,
            static_z_rate: 2e-4,
            static_x_rate: 5e-5,
        },
    );
    m.pulse.over_rotation = 0.02;
    m
}

fn mcm_circuit(r: usize, measure: bool) -> Circuit {
    let mut c = Circuit::new(3);
    c.h(0).cx(0, 2).barrier();
    for _ in 0..r {
        if measure {
            c.measure(1, 5600);
        } else {
            c.delay(1, 5600);
        }
    }
    c.barrier();
    c
}

fn ladder(chain: usize) -> Circuit {
    let mut c = Circuit::new(chain + 2);
    c.h(0).cx(0, 1);
    for k in 1..=chain {
        c.cx(k, k + 1).cx(k + 1, k);
    }
    c
}

#[test]
fn ideal_bell_preparation() {
    let dur = GateDurations::default();
    let (s, _) = alap_schedule(&mcm_circuit(3, true), &dur).unwrap();
    let rho = simulate(&s, &NoiseModel::ideal(3), &[0, 2]).unwrap();
    assert!((rho.state_fidelity(&bell()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn dropping_qubits_matches_full_register() {
    let dur = GateDurations::default();
    for circuit in [mcm_circuit(2, true), ladder(3)] {
        let n = circuit.n_qubits;
        let (s, w) = alap_schedule(&circuit, &dur).unwrap();
        let targets: Vec<_> = w.iter().filter(|w| !w.leading).copied().collect();
        let s = insert_dd(&s, &targets, &DDSequenceSpec::new(DDKind::Xy4, 1), &dur)
            .unwrap()
            .schedule;
        let noise = noisy();
        let observed = [0, n - 1];
        let small = simulate(&s, &noise, &observed).unwrap();
        let full = simulate_from(&s, &noise, &DensityMatrix::ground_state(n).unwrap()).unwrap();
        let reference = full.reduced(&observed).unwrap();
        let diff = gates::max_abs_diff(small.matrix(), reference.matrix());
        assert!(diff < 1e-12, "diff {diff}");
    }
}

#[test]
fn quiet_measurement_acts_like_delay() {
    let dur = GateDurations::default();
    let mut noise = noisy();
    noise.mcm = McmNoiseSpec::quiet(5600);
    let (with_mcm, _) = alap_schedule(&mcm_circuit(3, true), &dur).unwrap();
    let (with_delay, _) = alap_schedule(&mcm_circuit(3, false), &dur).unwrap();
    let a = simulate(&with_mcm, &noise, &[0, 2]).unwrap();
    let b = simulate(&with_delay, &noise, &[0, 2]).unwrap();
    assert!(gates::max_abs_diff(a.matrix(), b.matrix()) < 1e-14);
}

#[test]
fn neighbour_sees_the_mcm_channel() {
    let dur = GateDurations::instantaneous();
    let mut noise = noisy();
    noise.pulse = Default::default();
    let mut c = Circuit::new(2);
    c.h(0).barrier().measure(1, 5600).barrier();
    let (s, _) = alap_schedule(&c, &dur).unwrap();
    let got = simulate(&s, &noise, &[0]).unwrap();

    let plus = vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2];
    let start = DensityMatrix::from_pure(&plus).unwrap();
    let expected = start
        .apply_channel(&mcm_channel(&noise.mcm, &noise.qubits[0], noise.dt_ns).unwrap())
        .unwrap();
    assert!(gates::max_abs_diff(got.matrix(), expected.matrix()) < 1e-10);
}

#[test]
fn pi_kick_flips_neighbour_phase() {
    let dur = GateDurations::instantaneous();
    let mut noise = NoiseModel::ideal(3);
    noise.mcm = McmNoiseSpec {
        duration_dt: 5600,
        neighbor_z_kick: PI,
        neighbor_extra_dephasing: 0.0,
        drive_fraction: 0.5,
    };
    let mut c = Circuit::new(3);
    c.h(0).h(2).barrier().measure(1, 5600).barrier();
    let (s, _) = alap_schedule(&c, &dur).unwrap();
    let rho = simulate(&s, &noise, &[0, 2]).unwrap();
    let xx: PauliObservable = "XX".parse().unwrap();
    let xi: PauliObservable = "XI".parse().unwrap();
    assert!((rho.expectation(&xx).unwrap() - 1.0).abs() < 1e-12);
    assert!((rho.expectation(&xi).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn cpmg_refocuses_static_detuning() {
    let dur = GateDurations::default();
    for angle in [0.3, 1.0, PI] {
        let mut noise = NoiseModel::ideal(1);
        let window = 5600u64;
        noise.qubits[0].static_z_rate = angle / (window as f64 * noise.dt_ns);
        let base = TimedSchedule::from_ops(1, window, Vec::new()).unwrap();
        let w = base.idle_windows();
        let filled = insert_dd(&base, &w, &DDSequenceSpec::new(DDKind::Cpmg, 1), &dur).unwrap();
        let plus = vec![Complex64::new(FRAC_1_SQRT_2, 0.0); 2];
        let start = DensityMatrix::from_pure(&plus).unwrap();
        let end = simulate_from(&filled.schedule, &noise, &start).unwrap();
        assert!((end.state_fidelity(&plus).unwrap() - 1.0).abs() < 1e-9);
        let bare = simulate_from(&base, &noise, &start).unwrap();
        assert!(bare.state_fidelity(&plus).unwrap() < 1.0 - 1e-3);
    }
}

#[test]
fn rejects_short_noise_model() {
    let dur = GateDurations::default();
    let (s, _) = alap_schedule(&ladder(2), &dur).unwrap();
    assert!(simulate(&s, &NoiseModel::ideal(2), &[0, 3]).is_err());
}
