use pamle::hpam::{gamma_mle, hpam_loglik, limit_loglik_hpam, Denominator, HpamLimits};
use pamle::numeric::{golden_section_max, ln_factorial};
use pamle::sim::simulate_hpam;
use pamle::{GrowthHistory, HpamParams};

fn study_params() -> HpamParams {
    HpamParams::new(vec![0.3, 0.7], vec![1.0, 0.5, 0.5, 1.5]).unwrap()
}

fn loglik(h: &GrowthHistory, p: &HpamParams, mode: Denominator) -> f64 {
    hpam_loglik(&h.community_stats().unwrap(), p, mode).unwrap()
}

#[test]
fn likelihood_depends_on_arrival_order() {
    let a = GrowthHistory::from_targets_labeled(&[1, 1, 1], &[1, 2, 1], 2).unwrap();
    let b = GrowthHistory::from_targets_labeled(&[1, 1, 1], &[1, 1, 2], 2).unwrap();
    let (sa, sb) = (a.community_stats().unwrap(), b.community_stats().unwrap());
    assert_eq!(sa.t(), sb.t());
    assert_eq!(sa.mass_final(), sb.mass_final());
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        assert_eq!(sa.m(i, j), sb.m(i, j));
    }
    assert_eq!(a.degree_counts(), b.degree_counts());
    let p = study_params();
    let (la, lb) = (
        loglik(&a, &p, Denominator::Exact),
        loglik(&b, &p, Denominator::Exact),
    );
    assert!((la - lb).abs() > 1e-3, "{la} vs {lb}");
}

fn flip_last(h: &GrowthHistory) -> GrowthHistory {
    let targets = h.targets();
    let mut labels = h.labels().unwrap();
    let last = labels.len() - 1;
    labels[last] = 3 - labels[last];
    GrowthHistory::from_targets_labeled(&targets, &labels, 2).unwrap()
}

#[test]
fn misclassifying_the_last_node_costs_order_one_over_n() {
    let p = study_params();
    let shift = |n: usize, seed: u64| {
        let h = simulate_hpam(n, &p, seed).unwrap();
        (loglik(&flip_last(&h), &p, Denominator::Scaled) - loglik(&h, &p, Denominator::Scaled))
            .abs()
    };
    let c = (0..20).map(|s| 100.0 * shift(100, s)).fold(0.0, f64::max);
    assert!(c > 0.0);
    for s in 0..20 {
        let d = shift(1000, 100 + s);
        assert!(d < 2.0 * c / 1000.0, "seed {s}: {d} vs C = {c}");
    }
}

#[test]
fn denominator_modes_converge() {
    let p = study_params();
    let n = 1000;
    let h = simulate_hpam(n, &p, 5).unwrap();
    let stats = h.community_stats().unwrap();
    // The exact value carries Σ ln (d-1)! and divides by the unscaled
    // denominator; remove both so only the self-loop term remains.
    let factorials: f64 = h
        .degrees()
        .iter()
        .map(|&d| ln_factorial::<f64>(d - 1))
        .sum();
    let exact = loglik(&h, &p, Denominator::Exact) - factorials / n as f64;
    let scaled = loglik(&h, &p, Denominator::Scaled) - ln_factorial::<f64>(n as u64) / n as f64;
    let labels = stats.labels();
    let mut direct = 0.0;
    for k in 2..=n {
        let l = labels[k - 1] as usize;
        let mass = stats.mass_before(k);
        let d: f64 = (0..2).map(|j| p.gamma(l, j) * mass[j] as f64).sum();
        direct += (1.0 + p.gamma(l, l) / d).ln();
    }
    direct /= n as f64;
    assert!(((scaled - exact) - direct).abs() < 1e-12);
    assert!(direct < 0.02, "{direct}");
}

#[test]
fn uniform_gamma_data_fit_near_one() {
    let p = HpamParams::new(vec![0.4, 0.6], vec![1.0; 4]).unwrap();
    let h = simulate_hpam(2000, &p, 77).unwrap();
    let fit = gamma_mle(
        &h.community_stats().unwrap(),
        &HpamParams::<f64>::uniform(2),
        Denominator::Exact,
    )
    .unwrap();
    assert!(fit.converged);
    assert_eq!(fit.gamma(0, 0), 1.0);
    assert_eq!(fit.gamma(0, 1), fit.gamma(1, 0));
    for g in &fit.gamma_hat {
        assert!((g - 1.0).abs() < 0.2, "{:?}", fit.gamma_hat);
    }
}

#[test]
fn edge_shares_approach_theta() {
    let p = HpamParams::new(
        vec![0.2, 0.5, 0.3],
        vec![1.0, 0.4, 2.0, 0.4, 1.5, 0.7, 2.0, 0.7, 3.0],
    )
    .unwrap();
    let n = 100_000;
    let stats = simulate_hpam(n, &p, 31).unwrap().community_stats().unwrap();
    let lim = HpamLimits::compute(&p, 1e-12).unwrap();
    for i in 0..3 {
        for j in i..3 {
            let share = stats.m(i, j) as f64 / n as f64;
            assert!(
                (share - lim.theta(i, j)).abs() < 0.03,
                "({i},{j}): {share} vs {}",
                lim.theta(i, j)
            );
        }
    }
}

#[test]
fn limit_maximized_at_truth_on_slice() {
    let p = study_params();
    let value = |x: f64, y: f64| limit_loglik_hpam(&[1.0, x.exp(), x.exp(), y.exp()], &p).unwrap();
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let (nx, _, _) = golden_section_max(|t| value(t, y), x - 2.0, x + 2.0, 1e-12, 200);
        let (ny, _, _) = golden_section_max(|t| value(nx, t), y - 2.0, y + 2.0, 1e-12, 200);
        let step = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if step < 1e-10 {
            break;
        }
    }
    assert!((x.exp() - 0.5).abs() < 1e-4, "{}", x.exp());
    assert!((y.exp() - 1.5).abs() < 1e-4, "{}", y.exp());
}
