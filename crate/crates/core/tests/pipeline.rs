use std::f64::consts::PI;

use ddlab::cost::phi_plus;
use ddlab::execute::simulate_from;
use ddlab::noise::NoiseModel;
use ddlab::sequences::{insert_dd, DDKind, DDSequenceSpec, EulerAngles, GateDurations, TimedSchedule};
use ddlab::simcore::DensityMatrix;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = DDKind> {
    prop_oneof![
        Just(DDKind::Cpmg),
        Just(DDKind::Xy4),
        Just(DDKind::Ur6),
        Just(DDKind::Ldd)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filled_windows_keep_time_and_state(
        kind in kind(),
        window in 2100u64..20_000,
        reps in 1usize..3,
        angles in prop::array::uniform3(-PI..PI),
    ) {
        let dur = GateDurations::default();
        let spec = match kind {
            DDKind::Ldd => DDSequenceSpec::ldd(EulerAngles::new(angles[0], angles[1], angles[2]), reps, 4),
            k => DDSequenceSpec::new(k, reps),
        };
        let base = TimedSchedule::from_ops(2, window, Vec::new()).unwrap();
        let out = insert_dd(&base, &base.idle_windows(), &spec, &dur).unwrap();
        prop_assert!(out.skipped.is_empty() || kind == DDKind::Ldd || kind == DDKind::Ur6);
        for q in 0..2 {
            let lane: u64 = out.schedule.lane(q).iter().map(|s| s.duration_dt).sum();
            prop_assert_eq!(lane, window);
        }
        let bell = DensityMatrix::from_pure(&phi_plus()).unwrap();
        let end = simulate_from(&out.schedule, &NoiseModel::ideal(2), &bell).unwrap();
        prop_assert!((end.state_fidelity(&phi_plus()).unwrap() - 1.0).abs() < 1e-9);
    }
}
