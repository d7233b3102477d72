//! Metrics against a naive oracle that assembles responses as character
//! strings from the printed interim bitstrings and counts bits one by one.
//! Every metric is an exact ratio of integers, so the oracle keeps the
//! numerator and denominator and the comparison is exact.

use ppuf_core::encoding::BITS;
use ppuf_core::metrics::{bit_aliasing_profile, response_autocorrelation};
use ppuf_core::{
    autocorrelation, bit_aliasing, build_interpretation, reliability, uniformity, uniqueness, Bitstring24,
    CrpDataset, GridConfig, Observables, Output, ResponseSet,
};
use proptest::prelude::*;

/// `k` datasets of `m` challenges and `n` cells with arbitrary interim bits.
fn datasets() -> impl Strategy<Value = Vec<CrpDataset>> {
    (1usize..=4, 1usize..=16, 1usize..=8).prop_flat_map(|(k, m, n)| {
        prop::collection::vec(prop::collection::vec(0u32..1 << 24, m * n * 2), k).prop_map(move |all| {
            all.into_iter()
                .enumerate()
                .map(|(i, raw)| {
                    let challenges = (0..m).map(|c| Observables::new(c as f64 / 16.0, 0.0)).collect();
                    let bits = (0..m).map(|c| Bitstring24::new(c as u32).unwrap()).collect();
                    let interim = raw.into_iter().map(|v| Bitstring24::new(v).unwrap()).collect();
                    CrpDataset::from_parts(GridConfig::with_counts(m, 1), i as u64, n, challenges, bits, interim).unwrap()
                })
                .collect()
        })
    })
}

/// Response strings of interpretation `(output, bit)`, one per challenge.
fn oracle_responses(ds: &CrpDataset, output: Output, bit: usize) -> Vec<String> {
    (0..ds.len())
        .map(|c| {
            (0..ds.n_cells())
                .map(|cell| ds.interim(c, cell, output).to_string().chars().nth(bit).unwrap())
                .collect()
        })
        .collect()
}

fn diff_count(a: &str, b: &str) -> u64 {
    a.chars().zip(b.chars()).filter(|(x, y)| x != y).count() as u64
}

fn ones(s: &str) -> u64 {
    s.chars().filter(|&c| c == '1').count() as u64
}

fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

fn core_responses(ds: &CrpDataset, output: Output, bit: usize) -> ResponseSet {
    build_interpretation(ds, output, bit).unwrap().responses
}

fn selectors() -> impl Iterator<Item = (Output, usize)> {
    Output::ALL.into_iter().flat_map(|o| (0..BITS).map(move |b| (o, b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn interpretation_matches_string_assembly(sets in datasets()) {
        for ds in &sets {
            for (o, b) in selectors() {
                let r = core_responses(ds, o, b);
                for (c, s) in oracle_responses(ds, o, b).iter().enumerate() {
                    prop_assert_eq!(&format!("{:0w$b}", r.values()[c], w = ds.n_cells()), s);
                }
            }
        }
    }

    #[test]
    fn uniqueness_matches_oracle(sets in datasets()) {
        prop_assume!(sets.len() >= 2);
        let (k, m, n) = (sets.len() as u64, sets[0].len() as u64, sets[0].n_cells() as u64);
        for (o, b) in selectors() {
            let strs: Vec<Vec<String>> = sets.iter().map(|d| oracle_responses(d, o, b)).collect();
            let mut num = 0;
            for i in 0..strs.len() {
                for j in i + 1..strs.len() {
                    for c in 0..strs[i].len() {
                        num += diff_count(&strs[i][c], &strs[j][c]);
                    }
                }
            }
            let den = k * (k - 1) / 2 * m * n;
            let rs: Vec<ResponseSet> = sets.iter().map(|d| core_responses(d, o, b)).collect();
            let refs: Vec<&ResponseSet> = rs.iter().collect();
            prop_assert_eq!(uniqueness(&refs).unwrap(), ratio(num, den));
        }
    }

    #[test]
    fn uniformity_matches_oracle(sets in datasets()) {
        for ds in &sets {
            let (m, n) = (ds.len() as u64, ds.n_cells() as u64);
            for (o, b) in selectors() {
                let num: u64 = oracle_responses(ds, o, b).iter().map(|s| ones(s)).sum();
                prop_assert_eq!(uniformity(&core_responses(ds, o, b)).unwrap(), ratio(num, m * n));
            }
        }
    }

    #[test]
    fn bit_aliasing_matches_oracle(sets in datasets()) {
        let (k, m, n) = (sets.len() as u64, sets[0].len() as u64, sets[0].n_cells());
        for (o, b) in selectors() {
            let strs: Vec<Vec<String>> = sets.iter().map(|d| oracle_responses(d, o, b)).collect();
            let rs: Vec<ResponseSet> = sets.iter().map(|d| core_responses(d, o, b)).collect();
            let refs: Vec<&ResponseSet> = rs.iter().collect();
            let profile = bit_aliasing_profile(&refs).unwrap();
            prop_assert_eq!(profile.len(), n);
            for pos in 0..n {
                let num = strs.iter().flatten().filter(|s| s.as_bytes()[pos] == b'1').count() as u64;
                prop_assert_eq!(bit_aliasing(&refs, pos).unwrap(), ratio(num, k * m));
                prop_assert_eq!(profile[pos], ratio(num, k * m));
            }
        }
    }

    /// The first dataset is the baseline, the rest are repeats.
    #[test]
    fn reliability_matches_oracle(sets in datasets()) {
        prop_assume!(sets.len() >= 2);
        let (r, m, n) = (sets.len() as u64 - 1, sets[0].len() as u64, sets[0].n_cells() as u64);
        for (o, b) in selectors() {
            let strs: Vec<Vec<String>> = sets.iter().map(|d| oracle_responses(d, o, b)).collect();
            let mut same = 0;
            for rep in &strs[1..] {
                for c in 0..strs[0].len() {
                    same += n - diff_count(&strs[0][c], &rep[c]);
                }
            }
            let rs: Vec<ResponseSet> = sets.iter().map(|d| core_responses(d, o, b)).collect();
            let repeats: Vec<&ResponseSet> = rs[1..].iter().collect();
            prop_assert_eq!(reliability(&rs[0], &repeats).unwrap(), ratio(same, r * m * n));
        }
    }
}

fn response_sets() -> impl Strategy<Value = Vec<ResponseSet>> {
    (2usize..=5, 1usize..=20, 1usize..=32).prop_flat_map(|(k, m, n)| {
        let top = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        prop::collection::vec(prop::collection::vec(0..=top, m), k)
            .prop_map(move |v| v.into_iter().map(|vals| ResponseSet::new(n, vals).unwrap()).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn uniqueness_ignores_puf_order(sets in response_sets(), rot in 0usize..5) {
        let refs: Vec<&ResponseSet> = sets.iter().collect();
        let mut turned = refs.clone();
        turned.rotate_left(rot % refs.len());
        turned.reverse();
        prop_assert_eq!(uniqueness(&refs).unwrap(), uniqueness(&turned).unwrap());
    }

    #[test]
    fn complement_properties(sets in response_sets()) {
        let refs: Vec<&ResponseSet> = sets.iter().collect();
        let comp: Vec<ResponseSet> = sets.iter().map(ResponseSet::complement).collect();
        let crefs: Vec<&ResponseSet> = comp.iter().collect();
        prop_assert_eq!(uniqueness(&refs).unwrap(), uniqueness(&crefs).unwrap());
        for (s, c) in sets.iter().zip(&comp) {
            let (u, uc) = (uniformity(s).unwrap(), uniformity(c).unwrap());
            prop_assert!((u + uc - 1.0).abs() < 1e-12);
            // A PUF against its own complement differs in every bit.
            prop_assert_eq!(uniqueness(&[s, c]).unwrap(), 1.0);
            prop_assert_eq!(reliability(s, &[c]).unwrap(), 0.0);
            prop_assert_eq!(reliability(s, &[s]).unwrap(), 1.0);
        }
        for pos in 0..sets[0].width() {
            let (a, ac) = (bit_aliasing(&refs, pos).unwrap(), bit_aliasing(&crefs, pos).unwrap());
            prop_assert!((a + ac - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_stay_in_unit_interval(sets in response_sets()) {
        let refs: Vec<&ResponseSet> = sets.iter().collect();
        let u = uniqueness(&refs).unwrap();
        prop_assert!((0.0..=1.0).contains(&u));
        for s in &sets {
            prop_assert!((0.0..=1.0).contains(&uniformity(s).unwrap()));
        }
        for v in bit_aliasing_profile(&refs).unwrap() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn autocorrelation_is_bounded(xs in prop::collection::vec(-1e3..1e3f64, 2..200), frac in 0.0..1.0f64) {
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-6);
        let max_lag = ((xs.len() - 1) as f64 * frac) as usize;
        let acf = autocorrelation(&xs, max_lag).unwrap();
        prop_assert_eq!(acf.len(), max_lag + 1);
        prop_assert_eq!(acf[0], 1.0);
        for v in &acf {
            prop_assert!(v.abs() <= 1.0 + 1e-12, "acf value {v}");
        }
    }

    #[test]
    fn autocorrelation_ignores_offset_and_scale(xs in prop::collection::vec(-10.0..10.0f64, 3..100), shift in -1e3..1e3f64, scale in 0.01..100.0f64) {
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        let max_lag = xs.len() - 1;
        let a = autocorrelation(&xs, max_lag).unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| x * scale + shift).collect();
        let b = autocorrelation(&moved, max_lag).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn autocorrelation_matches_naive_definition() {
    let xs = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
    let mean = xs.iter().sum::<f64>() / 8.0;
    let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let acf = autocorrelation(&xs, 7).unwrap();
    for lag in 0..8 {
        let mut s = 0.0;
        for t in 0..8 - lag {
            s += (xs[t] - mean) * (xs[t + lag] - mean);
        }
        assert!((acf[lag] - s / var).abs() < 1e-15);
    }
}

#[test]
fn constant_responses_are_degenerate() {
    let challenges = vec![Observables::new(0.5, 1.0); 4];
    let bits = vec![Bitstring24::new(0).unwrap(); 4];
    let interim = vec![Bitstring24::new(0).unwrap(); 4 * 2 * 3];
    let ds = CrpDataset::from_parts(GridConfig::with_counts(4, 1), 0, 3, challenges, bits, interim).unwrap();
    let interp = build_interpretation(&ds, Output::One, 0).unwrap();
    assert!(matches!(
        response_autocorrelation(&interp, 2),
        Err(ppuf_core::Error::Degenerate(_))
    ));
}
