use num_complex::Complex;
use proptest::prelude::*;

use cebit_core::bench::{apply_sagnac_cnot, recombine_bs2};
use cebit_core::cebit::{
    apply_cnot_ca, apply_hadamard_c, correction_for, fidelity, prepare_input, project_ca, teleport_transform,
    CebitState, PayloadCoeffs,
};
use cebit_core::field::{decode_overlaps, encode_cebit_state, GridSpec, ModeBasis};
use cebit_core::harness::Config;
use cebit_core::measure::{phase_from_interference, ratio_from_angle};
use cebit_core::scalar::wrap_phase;
use cebit_core::BellOutcome;

type C64 = Complex<f64>;

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn payload() -> impl Strategy<Value = PayloadCoeffs<f64>> {
    (complex(), complex())
        .prop_filter("non-zero", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-3)
        .prop_map(|(a, b)| PayloadCoeffs::new(a, b).unwrap())
}

fn state() -> impl Strategy<Value = CebitState<f64>> {
    prop::array::uniform8(complex())
        .prop_filter("non-zero", |a| a.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|a| CebitState::from_amplitudes(a).unwrap())
}

fn outcome() -> impl Strategy<Value = BellOutcome> {
    (0u8..2, 0u8..2).prop_map(|(c, a)| BellOutcome::new(c, a).unwrap())
}

fn dist(a: &CebitState<f64>, b: &CebitState<f64>) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn grid() -> GridSpec<f64> {
    GridSpec::with_window(64, 8.0, 1e-3).unwrap()
}

proptest! {
    #[test]
    fn gates_are_unitary(s in state(), t in state()) {
        for g in [apply_cnot_ca::<f64>, apply_hadamard_c::<f64>, teleport_transform::<f64>] {
            let (gs, gt) = (g(&s), g(&t));
            prop_assert!((gs.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((gs.inner(&gt) - s.inner(&t)).norm() < 1e-12);
        }
    }

    #[test]
    fn gates_are_involutions(s in state()) {
        prop_assert!(dist(&apply_cnot_ca(&apply_cnot_ca(&s)), &s) < 1e-12);
        prop_assert!(dist(&apply_hadamard_c(&apply_hadamard_c(&s)), &s) < 1e-12);
    }

    #[test]
    fn teleportation_identity(p in payload(), o in outcome()) {
        let proj = project_ca(&teleport_transform(&prepare_input(&p)), o);
        prop_assert!((proj.probability - 0.25).abs() < 1e-12);
        let b = correction_for(o).apply(proj.b_state.unwrap());
        prop_assert!(fidelity(&b, &p).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn encode_decode_round_trip(s in state()) {
        let g = grid();
        let back = decode_overlaps(&encode_cebit_state(&s, &g).unwrap()).unwrap();
        prop_assert!(dist(&back, &s) < 1e-9);
    }

    #[test]
    fn encoding_is_linear(c0 in complex(), c1 in complex(), k in complex()) {
        prop_assume!(k.norm() > 1e-3);
        let basis = ModeBasis::new(&grid()).unwrap();
        let a = basis.combine(c0 * k, c1 * k);
        let b = basis.combine(c0, c1).scaled(k);
        let diff = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9);
    }

    #[test]
    fn bench_elements_commute_with_gates(s in state()) {
        let g = grid();
        let beam = encode_cebit_state(&s, &g).unwrap();
        let sagnac = decode_overlaps(&apply_sagnac_cnot(&beam)).unwrap();
        prop_assert!(dist(&sagnac, &apply_cnot_ca(&s)) < 1e-9);
        let bs2 = decode_overlaps(&recombine_bs2(&beam)).unwrap();
        prop_assert!(dist(&bs2, &apply_hadamard_c(&s)) < 1e-9);
    }

    #[test]
    fn interference_recovers_relative_phase(a in complex(), b in complex()) {
        prop_assume!(a.norm() > 1e-2 && b.norm() > 1e-2);
        let i = C64::i();
        let dphi = phase_from_interference(
            a.norm_sqr(),
            b.norm_sqr(),
            (a + b).norm_sqr() / 2.0,
            (a + i * b).norm_sqr() / 2.0,
        )
        .unwrap();
        prop_assert!(wrap_phase(dphi - (b.arg() - a.arg())).abs() < 1e-9);
        prop_assert!(dphi > -std::f64::consts::PI && dphi <= std::f64::consts::PI);
    }

    #[test]
    fn angle_ratio_inverse(theta in 1.0f64..90.0) {
        let r = ratio_from_angle(theta).unwrap();
        prop_assert!((r.atan2(1.0).to_degrees() - (90.0 - theta)).abs() < 1e-9);
    }

    #[test]
    fn config_canonical_round_trip(seed in any::<u64>(), frames in 1usize..100, sigma in 0.0f64..0.5) {
        let cfg = Config { seed, frames, noise_sigma: sigma, ..Config::default() };
        prop_assert_eq!(Config::parse_str(&cfg.canonical()).unwrap(), cfg);
    }
}
