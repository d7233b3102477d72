use std::f64::consts::TAU;

use ppuf_core::dataset::NoiseConfig;
use ppuf_core::encoding::{decode12_fraction, decode12_phase, BITS};
use ppuf_core::{
    build_interpretation, encode_response, encode_state, quantize12_fraction, quantize12_phase, Bitstring24,
    CrpDataset, GridConfig, Observables, Output, PufInstance,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn fraction_encoder_is_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize12_fraction(lo).unwrap() <= quantize12_fraction(hi).unwrap());
    }

    #[test]
    fn phase_encoder_is_monotone(a in 0.0..TAU, b in 0.0..TAU) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize12_phase(lo).unwrap() <= quantize12_phase(hi).unwrap());
    }

    #[test]
    fn fraction_error_is_below_one_step(x in 0.0..1.0f64) {
        let err = x - decode12_fraction(quantize12_fraction(x).unwrap());
        prop_assert!((0.0..1.0 / 4096.0).contains(&err), "error {err}");
    }

    #[test]
    fn phase_error_is_below_one_step(x in 0.0..TAU) {
        let q = quantize12_phase(x).unwrap();
        prop_assert_eq!(f64::from(q >> 9), x.floor());
        let err = x - decode12_phase(q);
        prop_assert!((0.0..1.0 / 512.0).contains(&err), "error {err}");
    }

    #[test]
    fn state_fields_concatenate(ex2 in 0.0..1.0f64, dphi in 0.0..TAU) {
        let b = encode_state(ex2, dphi).unwrap();
        prop_assert_eq!(b.ex2_code(), quantize12_fraction(ex2).unwrap());
        prop_assert_eq!(b.phase_code(), quantize12_phase(dphi).unwrap());
        prop_assert_eq!(b.to_string().parse::<Bitstring24>().unwrap(), b);
    }

    #[test]
    fn responses_always_encode(ex2 in -1e-12..1.0 + 1e-12, dphi in -1e-12..TAU + 1e-12) {
        let b = encode_response(Observables::new(ex2, dphi));
        prop_assert!(b.value() <= Bitstring24::MAX);
    }

    /// Flipping one interim bit changes exactly the matching bit of the
    /// matching interpretation.
    #[test]
    fn bit_provenance(challenge in 0usize..6, cell in 0usize..5, out in 1usize..=2, bit in 0usize..BITS) {
        let grid = GridConfig::with_counts(3, 2);
        let base = CrpDataset::generate(&PufInstance::build(11, 5).unwrap(), &grid).unwrap();
        let output = Output::from_index(out).unwrap();
        let mut flipped = base.clone();
        let v = base.interim(challenge, cell, output);
        flipped.set_interim(challenge, cell, output, v.with_bit_flipped(bit));
        for o in Output::ALL {
            for k in 0..BITS {
                let a = build_interpretation(&base, o, k).unwrap().responses;
                let b = build_interpretation(&flipped, o, k).unwrap().responses;
                for c in 0..base.len() {
                    let diff = a.values()[c] ^ b.values()[c];
                    if (o, k, c) == (output, bit, challenge) {
                        prop_assert_eq!(diff, 1 << (5 - 1 - cell));
                    } else {
                        prop_assert_eq!(diff, 0);
                    }
                }
            }
        }
    }
}

#[test]
fn zero_noise_repeat_matches_baseline() {
    let grid = GridConfig::with_counts(20, 10);
    let puf = PufInstance::build(3, 6).unwrap();
    let clean = CrpDataset::generate(&puf, &grid).unwrap();
    let noisy = CrpDataset::generate_noisy(&puf, &grid, NoiseConfig { sigma_ex2: 0.0, sigma_phase: 0.0, seed: 9 }).unwrap();
    assert_eq!(clean, noisy);
}

#[test]
fn noisy_repeats_are_seeded() {
    let grid = GridConfig::with_counts(20, 10);
    let puf = PufInstance::build(3, 6).unwrap();
    let noise = NoiseConfig { sigma_ex2: 0.01, sigma_phase: 0.01, seed: 9 };
    let a = CrpDataset::generate_noisy(&puf, &grid, noise).unwrap();
    let b = CrpDataset::generate_noisy(&puf, &grid, noise).unwrap();
    let c = CrpDataset::generate_noisy(&puf, &grid, NoiseConfig { seed: 10, ..noise }).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
