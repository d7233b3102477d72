use std::f64::consts::TAU;

use ppuf_core::attack::{correct_bits, shuffle_responses, Z_99_TWO_SIDED};
use ppuf_core::{
    encode_state, Bitstring24, evaluate_predictor, susceptibility_sweep, train_predictor, AttackConfig, Crp, Observables,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random challenges whose 24-bit response is the challenge itself.
fn identity_crps(n: usize, seed: u64) -> Vec<Crp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let obs = Observables::new(rng.random_range(0.0..1.0), rng.random_range(0.0..TAU));
            let challenge = encode_state(obs.ex2, obs.dphi).unwrap();
            Crp { challenge, observables: obs, response: challenge.value() }
        })
        .collect()
}

/// Every response bit exactly balanced over the whole dataset: odd records
/// carry the complement of the preceding record's response.
fn balanced_crps(n: usize, seed: u64) -> Vec<Crp> {
    let mut crps = identity_crps(n, seed);
    for i in (1..n).step_by(2) {
        crps[i].response = !crps[i - 1].response & Bitstring24::MAX;
    }
    crps
}

/// Random challenges with independent uniform 24-bit responses.
fn random_crps(n: usize, seed: u64) -> Vec<Crp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    identity_crps(n, seed)
        .into_iter()
        .map(|c| Crp { response: rng.random_range(0..1u32 << 24), ..c })
        .collect()
}

fn cfg(train_sizes: Vec<usize>, holdout: usize, seed: u64) -> AttackConfig {
    AttackConfig { train_sizes, holdout, seed, ..AttackConfig::default() }
}

#[test]
fn identity_mapping_is_learned() {
    let data = identity_crps(7_000, 1);
    let model = train_predictor(&data[..5_000], 24, &cfg(vec![], 0, 1)).unwrap();
    let acc = evaluate_predictor(&model, &data[5_000..]).unwrap();
    assert!(acc > 0.95, "identity accuracy {acc}");
}

#[test]
fn random_labels_stay_at_chance() {
    let data = random_crps(7_000, 2);
    let holdout = &data[5_000..];
    let model = train_predictor(&data[..5_000], 24, &cfg(vec![], 0, 2)).unwrap();
    let trials = (holdout.len() * 24) as f64;
    let acc = correct_bits(&model, holdout) as f64 / trials;
    let half_width = Z_99_TWO_SIDED * (0.25 / trials).sqrt();
    assert!((acc - 0.5).abs() <= half_width, "accuracy {acc} outside 0.5 ± {half_width}");
}

#[test]
fn sweep_on_identity_beats_chance_at_smallest_size() {
    let data = identity_crps(5_000, 3);
    let res = susceptibility_sweep(&data, 24, &cfg(vec![100, 300, 1_000], 2_000, 3)).unwrap();
    assert_eq!(res.points.len(), 3);
    assert_eq!(res.n_chance, Some(100), "{:?}", res.points);
}

#[test]
fn sweep_on_random_responses_never_beats_chance() {
    let data = random_crps(5_000, 4);
    let res = susceptibility_sweep(&data, 24, &cfg(vec![100, 300, 1_000], 2_000, 4)).unwrap();
    assert_eq!(res.points.len(), 3);
    assert_eq!(res.n_chance, None, "{:?}", res.points);
    assert_eq!(res.n_65, None);
}

/// Permuting responses against challenges destroys any learnable relation
/// while keeping per-bit marginals. Those must be balanced over the whole
/// dataset: train and holdout are drawn from it, so a skew (even a
/// finite-sample one) lets a predictor beat 0.5 with the majority value.
///
/// Each point is a 99% test, so over 5 seeds x 3 sizes an occasional false
/// positive is expected; three or more would have probability below 5e-4.
#[test]
fn shuffled_responses_stay_at_chance_floor() {
    let data = balanced_crps(8_000, 5);
    let mut points = Vec::new();
    for seed in 0..5 {
        let shuffled = shuffle_responses(&data, 100 + seed);
        let res = susceptibility_sweep(&shuffled, 24, &cfg(vec![100, 1_000, 3_000], 5_000, seed)).unwrap();
        assert!(res.n_65.is_none());
        points.extend(res.points);
    }
    let sigma = (0.25 / (5_000.0 * 24.0f64)).sqrt();
    let mean_z = points.iter().map(|p| (p.accuracy - 0.5) / sigma).sum::<f64>() / points.len() as f64;
    assert!(mean_z.abs() < 1.0, "mean z-score {mean_z}");
    let hits = points.iter().filter(|p| p.beats_chance).count();
    assert!(hits <= 2, "{hits} of {} points beat chance: {points:?}", points.len());
}

#[test]
fn sweeps_are_deterministic() {
    let data = identity_crps(2_000, 6);
    let c = cfg(vec![50, 200], 500, 9);
    assert_eq!(susceptibility_sweep(&data, 24, &c).unwrap(), susceptibility_sweep(&data, 24, &c).unwrap());
}

#[test]
fn sweep_reports_every_size_in_order() {
    let data = identity_crps(1_000, 7);
    let res = susceptibility_sweep(&data, 24, &cfg(vec![300, 10, 100], 200, 0)).unwrap();
    let sizes: Vec<usize> = res.points.iter().map(|p| p.train_size).collect();
    assert_eq!(sizes, vec![300, 10, 100]);
}
