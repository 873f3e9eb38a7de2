use proptest::prelude::*;

use pamle::GrowthHistory;

/// Targets with `targets[k-1]` in `1..=k`, drawn from uniform fractions.
fn targets_from(fractions: &[f64]) -> Vec<usize> {
    fractions
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            if i == 0 {
                1
            } else {
                1 + ((u * (i + 1) as f64) as usize).min(i)
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn csv_round_trip_unlabeled(fr in prop::collection::vec(0.0f64..1.0, 1..200)) {
        let h = GrowthHistory::from_targets(&targets_from(&fr)).unwrap();
        let text = h.to_csv_string();
        prop_assert!(text.starts_with("node,target,membership,target_membership\n"));
        let back = GrowthHistory::read_csv(text.as_bytes(), None).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn csv_round_trip_labeled(
        fr in prop::collection::vec(0.0f64..1.0, 1..200),
        k in 1usize..5,
        seed in any::<u64>(),
    ) {
        let t = targets_from(&fr);
        let labels: Vec<u32> = (0..t.len())
            .map(|i| 1 + (seed.rotate_left(i as u32 * 7) % k as u64) as u32)
            .collect();
        let h = GrowthHistory::from_targets_labeled(&t, &labels, k).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let back = GrowthHistory::read_csv(buf.as_slice(), Some(k)).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn degree_sum_identities(
        fr in prop::collection::vec(0.0f64..1.0, 1..300),
        seed in any::<u64>(),
    ) {
        let t = targets_from(&fr);
        let n = t.len() as u64;
        let labels: Vec<u32> = (0..t.len()).map(|i| 1 + ((seed >> (i % 60)) & 1) as u32).collect();
        let h = GrowthHistory::from_targets_labeled(&t, &labels, 2).unwrap();
        let c = h.degree_counts();
        prop_assert_eq!(c.n(), n);
        prop_assert_eq!(c.degree_sum(), 2 * n);
        prop_assert_eq!(c.iter().map(|(_, z)| z).sum::<u64>(), n);
        let stats = h.community_stats().unwrap();
        prop_assert_eq!(stats.mass_final().iter().sum::<u64>(), c.degree_sum());
        prop_assert_eq!(stats.t().iter().sum::<u64>(), n);
    }
}
