mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rankpursuit::metrics::{
    disagreement_error, evaluate_disagreement, normalized_disagreement, wilcoxon_signed_rank,
    wilcoxon_signed_rank_with_limit,
};
use rankpursuit::PreferenceGraph;

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(d, Z)` by scanning every ordered pair.
fn brute_disagreement(s: &[f64], f: &[f64], groups: &[u64]) -> (f64, usize) {
    let mut d = 0.0;
    let mut z = 0;
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i != j && groups[i] == groups[j] {
                d += 0.5 * (sign(s[i] - s[j]) - sign(f[i] - f[j])).abs();
                z += 1;
            }
        }
    }
    (d, z)
}

/// Small-integer values so that ties occur.
fn coarse<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-3..=3) as f64).collect()
}

/// Two-sided p from all `2^m` sign assignments of the mid-ranks.
fn enumerate_wilcoxon(diffs: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let m = d.len();
    let ranks: Vec<f64> = d
        .iter()
        .map(|x| {
            let below = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let w: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << m) {
        let t: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if t <= w {
            le += 1;
        }
        if t >= w {
            ge += 1;
        }
    }
    let total = (1u64 << m) as f64;
    (w, (2.0 * (le.min(ge) as f64) / total).min(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grouped_counts_match_pair_scan(seed in any::<u64>(), n in 1usize..=30) {
        let mut r = rng(seed);
        let groups = random_groups(&mut r, n);
        let s = coarse(&mut r, n);
        let f = coarse(&mut r, n);
        let g = PreferenceGraph::from_group_ids(groups.iter().copied());
        let (d, z) = brute_disagreement(&s, &f, &groups);
        let eval = evaluate_disagreement(&s, &f, &g).unwrap();
        prop_assert_eq!(eval.value, d);
        prop_assert_eq!(eval.pair_count, z);
        prop_assert_eq!(disagreement_error(&s, &f, &g).unwrap(), d);
        if z > 0 {
            let nd = normalized_disagreement(&s, &f, &g).unwrap();
            prop_assert_eq!(nd, d / z as f64);
            prop_assert!((0.0..=1.0).contains(&nd));
        } else {
            prop_assert!(normalized_disagreement(&s, &f, &g).is_err());
        }
    }

    #[test]
    fn invariant_under_increasing_transforms(seed in any::<u64>(), n in 2usize..=25) {
        let mut r = rng(seed);
        let groups = random_groups(&mut r, n);
        let s = coarse(&mut r, n);
        let f = random_vec(&mut r, n);
        let g = PreferenceGraph::from_group_ids(groups.iter().copied());
        let t: Vec<f64> = f.iter().map(|x| x.exp() * 3.0 + x.powi(3)).collect();
        prop_assert_eq!(disagreement_error(&s, &f, &g).unwrap(), disagreement_error(&s, &t, &g).unwrap());
    }

    #[test]
    fn reversal_complements_without_ties(seed in any::<u64>(), n in 2usize..=25) {
        let mut r = rng(seed);
        let mut groups = random_groups(&mut r, n);
        groups[1] = groups[0];
        let s = random_vec(&mut r, n);
        let f = random_vec(&mut r, n);
        let neg: Vec<f64> = f.iter().map(|x| -x).collect();
        let g = PreferenceGraph::from_group_ids(groups.iter().copied());
        let a = normalized_disagreement(&s, &f, &g).unwrap();
        let b = normalized_disagreement(&s, &neg, &g).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_wilcoxon_matches_enumeration(seed in any::<u64>(), m in 1usize..=12) {
        let mut r = rng(seed);
        let a = coarse(&mut r, m);
        let b = coarse(&mut r, m);
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        match wilcoxon_signed_rank(&a, &b) {
            Err(_) => prop_assert!(diffs.iter().all(|d| *d == 0.0)),
            Ok(res) => {
                let (w, p) = enumerate_wilcoxon(&diffs);
                prop_assert!(res.exact);
                prop_assert_eq!(res.statistic, w);
                prop_assert!((res.p_two_sided - p).abs() < 1e-12, "{} vs {}", res.p_two_sided, p);
            }
        }
    }
}

#[test]
fn normal_approximation_tracks_exact_at_twenty() {
    let mut worst: f64 = 0.0;
    for seed in 0..200 {
        let mut r = rng(seed);
        let a: Vec<f64> = (0..20).map(|_| r.gen_range(-1.0..1.0) + 0.2).collect();
        let b: Vec<f64> = (0..20).map(|_| r.gen_range(-1.0..1.0)).collect();
        let exact = wilcoxon_signed_rank(&a, &b).unwrap();
        let approx = wilcoxon_signed_rank_with_limit(&a, &b, 0).unwrap();
        assert!(exact.exact && !approx.exact);
        worst = worst.max((exact.p_two_sided - approx.p_two_sided).abs());
    }
    assert!(worst <= 0.02, "largest gap {worst}");
}

#[test]
fn wilcoxon_reference_values() {
    let zeros = [0.0; 6];
    let six = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let res = wilcoxon_signed_rank(&six, &zeros).unwrap();
    assert_eq!(res.statistic, 21.0);
    assert_eq!(res.p_two_sided, 0.03125);
    let res = wilcoxon_signed_rank(&six[..5], &zeros[..5]).unwrap();
    assert_eq!(res.p_two_sided, 0.0625);
    let sym = wilcoxon_signed_rank(&[1.0, -1.0, 2.0, -2.0], &[0.0; 4]).unwrap();
    assert_eq!(sym.p_two_sided, 1.0);
    assert!(wilcoxon_signed_rank(&six, &six).is_err());
}
