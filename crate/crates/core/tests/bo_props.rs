use std::collections::HashMap;

use pamle::bo::{bo_exact_loglik, bo_loglik, bo_mle, DegreeLaw};
use pamle::sim::{expected_degree_counts_bo, history_log_probability, simulate_bo, SimConfig};
use pamle::{BoDomain, GrowthHistory};

fn all_targets(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![1]];
    for k in 2..=n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=k).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

#[test]
fn exchangeable_up_to_six_nodes() {
    for a in [0.4f64, 1.0, 3.0] {
        for n in 1..=6 {
            let mut by_multiset: HashMap<Vec<u64>, f64> = HashMap::new();
            for t in all_targets(n) {
                let h = GrowthHistory::from_targets(&t).unwrap();
                let ll = n as f64 * bo_exact_loglik(&h.degree_counts(), a).unwrap();
                let lp = history_log_probability(&h, &SimConfig::bo(n, a, 0)).unwrap();
                assert!((ll - lp).abs() < 1e-12, "a={a} targets={t:?}");
                let mut degrees = h.degrees();
                degrees.sort_unstable();
                let seen = *by_multiset.entry(degrees).or_insert(ll);
                assert!((seen - ll).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn fit_beats_every_grid_point() {
    let domain = BoDomain::<f64>::default();
    for (a0, seed) in [(0.5, 11u64), (1.0, 12), (2.0, 13)] {
        let counts = simulate_bo(800, a0, seed).unwrap().degree_counts();
        let fit = bo_mle(&counts, domain).unwrap();
        assert!(fit.converged);
        let best = bo_loglik(&counts, fit.a_hat).unwrap();
        let mut a = 1e-3;
        while a <= 100.0 {
            assert!(
                best >= bo_loglik(&counts, a).unwrap() - 1e-12,
                "a0={a0} a={a}"
            );
            a += 1e-3;
        }
    }
}

#[test]
fn expected_counts_match_simulation() {
    let (n, a, reps) = (200, 0.8, 4000);
    let expected = expected_degree_counts_bo(n, a).unwrap();
    let mut mean = [0.0f64; 8];
    for seed in 0..reps {
        let c = simulate_bo(n, a, 50_000 + seed).unwrap().degree_counts();
        for (k, m) in mean.iter_mut().enumerate().skip(1) {
            *m += c.get(k as u64) as f64 / reps as f64;
        }
    }
    for k in 1..8 {
        // Counts at a fixed degree have standard deviation of order sqrt(n).
        let se = (n as f64).sqrt() / (reps as f64).sqrt();
        assert!(
            (mean[k] - expected[k]).abs() < 5.0 * se,
            "k={k}: simulated {} expected {}",
            mean[k],
            expected[k]
        );
    }
}

#[test]
fn variance_constants_stable_under_tolerance() {
    for a0 in [0.5f64, 1.0, 2.0] {
        let law = DegreeLaw::new(a0).unwrap();
        let (s1, b1) = law.sigma2_beta(1e-12);
        let (s2, b2) = law.sigma2_beta(5e-13);
        assert!(s1 > 0.0 && b1 > 0.0);
        assert!((s1 - s2).abs() < 1e-8 && (b1 - b2).abs() < 1e-8);
    }
}
