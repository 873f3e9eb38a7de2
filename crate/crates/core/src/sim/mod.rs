//! Seeded samplers for the four growth dynamics.
//!
//! Every sampler starts from node 1 carrying a self-loop and adds one node
//! and one edge per step. At step `i + 1` the arriving node either attaches
//! to an existing node `v <= i` or closes a self-loop on itself; a self-loop
//! adds 2 to the node's degree.
//!
//! * LCD: weight `d(v)` for `v`, weight 1 for the self-loop.
//! * Buckley-Osthus: weight `d(v) + a - 1`, self-loop weight `a`.
//! * General attachment: weight `d(v)^δ + a - 1`, self-loop weight `a`.
//! * Hierarchical: the arriving node draws a community `c` from `π`, then
//!   uses weight `γ[c][l(v)] d(v)` and self-loop weight `γ[c][c]`.

mod expected;
mod fenwick;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use expected::expected_degree_counts_bo;
pub use fenwick::FenwickTree;

use crate::error::{Error, Result};
use crate::graph::{AttachEvent, GrowthHistory, HpamParams};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GrowthModel {
    Lcd,
    Bo,
    Hpam,
    GeneralF,
}

/// Everything a sampler needs; serialized with every field present
/// (unused parameters as `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: GrowthModel,
    pub n: usize,
    pub seed: u64,
    pub bo_a: Option<f64>,
    pub delta: Option<f64>,
    pub hpam: Option<HpamParams>,
}

impl SimConfig {
    pub fn lcd(n: usize, seed: u64) -> Self {
        Self {
            model: GrowthModel::Lcd,
            n,
            seed,
            bo_a: None,
            delta: None,
            hpam: None,
        }
    }

    pub fn bo(n: usize, a: f64, seed: u64) -> Self {
        Self {
            model: GrowthModel::Bo,
            bo_a: Some(a),
            ..Self::lcd(n, seed)
        }
    }

    pub fn general_f(n: usize, a: f64, delta: f64, seed: u64) -> Self {
        Self {
            model: GrowthModel::GeneralF,
            bo_a: Some(a),
            delta: Some(delta),
            ..Self::lcd(n, seed)
        }
    }

    pub fn hpam(n: usize, params: HpamParams, seed: u64) -> Self {
        Self {
            model: GrowthModel::Hpam,
            hpam: Some(params),
            ..Self::lcd(n, seed)
        }
    }

    /// Checks that the parameters the chosen model needs are present and
    /// valid.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        match self.model {
            GrowthModel::Lcd => Ok(()),
            GrowthModel::Bo => check_a(self.bo_a).map(|_| ()),
            GrowthModel::GeneralF => {
                check_a(self.bo_a)?;
                check_delta(self.delta).map(|_| ())
            }
            GrowthModel::Hpam => self
                .hpam
                .as_ref()
                .map(|_| ())
                .ok_or_else(|| Error::InvalidParameter("HPAM parameters missing".into())),
        }
    }

    pub fn simulate(&self) -> Result<GrowthHistory> {
        self.validate()?;
        match self.model {
            GrowthModel::Lcd => simulate_lcd(self.n, self.seed),
            GrowthModel::Bo => simulate_bo(self.n, self.bo_a.unwrap_or_default(), self.seed),
            GrowthModel::GeneralF => simulate_general_f(
                self.n,
                self.bo_a.unwrap_or_default(),
                self.delta.unwrap_or_default(),
                self.seed,
            ),
            GrowthModel::Hpam => {
                simulate_hpam(self.n, self.hpam.as_ref().expect("validated"), self.seed)
            }
        }
    }
}

fn check_a(a: Option<f64>) -> Result<f64> {
    match a {
        Some(a) if a > 0.0 && a.is_finite() => Ok(a),
        Some(a) => Err(Error::InvalidParameter(format!("a = {a} must be positive"))),
        None => Err(Error::InvalidParameter("parameter a missing".into())),
    }
}

fn check_delta(delta: Option<f64>) -> Result<f64> {
    match delta {
        Some(d) if d > 0.0 && d.is_finite() => Ok(d),
        Some(d) => Err(Error::InvalidParameter(format!(
            "delta = {d} must be positive"
        ))),
        None => Err(Error::InvalidParameter("parameter delta missing".into())),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Linearized chord diagram: the Buckley-Osthus law at `a = 1`.
pub fn simulate_lcd(n: usize, seed: u64) -> Result<GrowthHistory> {
    simulate_bo(n, 1.0, seed)
}

/// Buckley-Osthus growth.
///
/// The weight `d(v) + a - 1` splits into `d(v) - 1` "excess" endpoints plus
/// `a`. Every step adds exactly one excess endpoint, so after `i` steps the
/// excess list has length `i` and the step total `(a + 1) i + a` divides
/// into three blocks: excess endpoints (mass `i`), uniform node (mass
/// `a i`), self-loop (mass `a`). Each draw costs O(1) for every `a > 0`.
pub fn simulate_bo(n: usize, a: f64, seed: u64) -> Result<GrowthHistory> {
    check_n(n)?;
    let a = check_a(Some(a))?;
    let mut rng = rng_from_seed(seed);
    Ok(sample_bo(n, a, &mut rng))
}

pub(crate) fn sample_bo(n: usize, a: f64, rng: &mut SimRng) -> GrowthHistory {
    let mut targets = Vec::with_capacity(n);
    let mut excess: Vec<u32> = Vec::with_capacity(n);
    targets.push(1usize);
    excess.push(0);
    for i in 1..n {
        let nodes = i as f64;
        let total = (a + 1.0) * nodes + a;
        let u = rng.gen::<f64>() * total;
        let new = i as u32;
        if u < nodes {
            let t = excess[(u as usize).min(i - 1)];
            targets.push(t as usize + 1);
            excess.push(t);
        } else if u < nodes + a * nodes {
            let t = (((u - nodes) / a) as usize).min(i - 1) as u32;
            targets.push(t as usize + 1);
            excess.push(t);
        } else {
            targets.push(i + 1);
            excess.push(new);
        }
    }
    GrowthHistory::from_targets(&targets).expect("sampler emits valid histories")
}

/// Growth with attachment weight `d(v)^δ + a - 1` and self-loop weight `a`.
///
/// Weights are kept in a cumulative-sum tree; every weight is at least
/// `a > 0` because `d >= 1`, so the step total is always positive.
pub fn simulate_general_f(n: usize, a: f64, delta: f64, seed: u64) -> Result<GrowthHistory> {
    check_n(n)?;
    let a = check_a(Some(a))?;
    let delta = check_delta(Some(delta))?;
    let weight = |d: u64| (d as f64).powf(delta) + a - 1.0;
    let mut rng = rng_from_seed(seed);
    let mut tree = FenwickTree::with_capacity(n);
    let mut degree = vec![0u64; n];
    let mut targets = Vec::with_capacity(n);
    targets.push(1usize);
    degree[0] = 2;
    tree.set(0, weight(2));
    for i in 1..n {
        let attach_mass = tree.total();
        let u = rng.gen::<f64>() * (attach_mass + a);
        if u < attach_mass {
            let t = tree.find(u);
            targets.push(t + 1);
            degree[t] += 1;
            tree.set(t, weight(degree[t]));
            degree[i] = 1;
        } else {
            targets.push(i + 1);
            degree[i] = 2;
        }
        tree.set(i, weight(degree[i]));
    }
    GrowthHistory::from_targets(&targets)
}

/// Hierarchical preferential attachment with memberships drawn from `π`.
///
/// Node 1 draws its community from `π` and closes a self-loop. Each
/// community keeps a list holding every node once per unit of degree, so a
/// draw picks the target community with weight `γ[c][l] N_l` and then a
/// uniform entry of that list.
pub fn simulate_hpam(n: usize, params: &HpamParams, seed: u64) -> Result<GrowthHistory> {
    check_n(n)?;
    let mut rng = rng_from_seed(seed);
    Ok(sample_hpam(n, params, &mut rng))
}

pub(crate) fn sample_hpam(n: usize, params: &HpamParams, rng: &mut SimRng) -> GrowthHistory {
    let k = params.k();
    let draw_community = |rng: &mut SimRng| -> usize {
        let u = rng.gen::<f64>();
        let mut acc = 0.0;
        for (j, &p) in params.pi().iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        k - 1
    };
    let mut endpoints: Vec<Vec<u32>> = vec![Vec::new(); k];
    let mut labels: Vec<u32> = Vec::with_capacity(n);
    let mut targets: Vec<usize> = Vec::with_capacity(n);
    let mut weights = vec![0.0; k];

    let c0 = draw_community(rng);
    labels.push(c0 as u32 + 1);
    targets.push(1);
    endpoints[c0].extend([0, 0]);

    for i in 1..n {
        let c = draw_community(rng);
        let mut total = params.gamma(c, c);
        for l in 0..k {
            weights[l] = params.gamma(c, l) * endpoints[l].len() as f64;
            total += weights[l];
        }
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = None;
        for (l, &w) in weights.iter().enumerate() {
            if u < w {
                chosen = Some(l);
                break;
            }
            u -= w;
        }
        let new = i as u32;
        labels.push(c as u32 + 1);
        match chosen {
            Some(l) => {
                let list = &endpoints[l];
                let t = list[rng.gen_range(0..list.len())];
                targets.push(t as usize + 1);
                endpoints[c].push(new);
                endpoints[l].push(t);
            }
            None => {
                targets.push(i + 1);
                endpoints[c].extend([new, new]);
            }
        }
    }
    GrowthHistory::from_targets_labeled(&targets, &labels, k)
        .expect("sampler emits valid histories")
}

/// Exact conditional probability that `event` extends `prefix` under
/// `config`'s dynamics. For the hierarchical model this includes the
/// factor `π_c` for the arriving node's community.
pub fn step_probability(
    prefix: &[AttachEvent],
    event: &AttachEvent,
    config: &SimConfig,
) -> Result<f64> {
    config.validate()?;
    let i = prefix.len();
    for (idx, ev) in prefix.iter().enumerate() {
        if ev.node != idx + 1 || ev.target == 0 || ev.target > ev.node {
            return Err(Error::Structure(format!(
                "prefix event {} is malformed",
                idx + 1
            )));
        }
    }
    if event.node != i + 1 || event.target == 0 || event.target > event.node {
        return Err(Error::Structure(format!(
            "event ({} -> {}) does not extend a prefix of {i} nodes",
            event.node, event.target
        )));
    }
    let mut degree = vec![0u64; i];
    for ev in prefix {
        degree[ev.node - 1] += 1;
        degree[ev.target - 1] += 1;
    }
    let target_degree = (!event.is_self_loop()).then(|| degree[event.target - 1]);
    match config.model {
        GrowthModel::Lcd | GrowthModel::Bo => {
            let a = if config.model == GrowthModel::Lcd {
                1.0
            } else {
                config.bo_a.expect("validated")
            };
            let total = (a + 1.0) * i as f64 + a;
            Ok(match target_degree {
                Some(d) => (d as f64 + a - 1.0) / total,
                None => a / total,
            })
        }
        GrowthModel::GeneralF => {
            let a = config.bo_a.expect("validated");
            let delta = config.delta.expect("validated");
            let f = |d: u64| (d as f64).powf(delta);
            let total: f64 = degree.iter().map(|&d| f(d)).sum::<f64>() + i as f64 * (a - 1.0) + a;
            if !(total > 0.0) {
                return Err(Error::InvalidParameter(
                    "attachment weights sum to zero".into(),
                ));
            }
            Ok(match target_degree {
                Some(d) => (f(d) + a - 1.0) / total,
                None => a / total,
            })
        }
        GrowthModel::Hpam => {
            let params = config.hpam.as_ref().expect("validated");
            let k = params.k();
            let label = |ev: &AttachEvent| -> Result<(usize, usize)> {
                match (ev.membership, ev.target_membership) {
                    (Some(l), Some(t))
                        if l >= 1 && t >= 1 && l as usize <= k && t as usize <= k =>
                    {
                        Ok((l as usize - 1, t as usize - 1))
                    }
                    _ => Err(Error::Labeling(format!(
                        "event {} lacks valid labels for K = {k}",
                        ev.node
                    ))),
                }
            };
            let mut mass = vec![0u64; k];
            let mut node_label = Vec::with_capacity(i);
            for ev in prefix {
                let (l, t) = label(ev)?;
                node_label.push(l);
                if node_label[ev.target - 1] != t {
                    return Err(Error::Labeling(format!(
                        "prefix event {} has inconsistent target_membership",
                        ev.node
                    )));
                }
                mass[l] += 1;
                mass[t] += 1;
            }
            let (c, t) = label(event)?;
            let expected_t = if event.is_self_loop() {
                c
            } else {
                node_label[event.target - 1]
            };
            if t != expected_t {
                return Err(Error::Labeling(
                    "event target_membership is inconsistent".into(),
                ));
            }
            let denom: f64 = (0..k)
                .map(|j| params.gamma(c, j) * mass[j] as f64)
                .sum::<f64>()
                + params.gamma(c, c);
            let numer = match target_degree {
                Some(d) => params.gamma(c, t) * d as f64,
                None => params.gamma(c, c),
            };
            Ok(params.pi()[c] * numer / denom)
        }
    }
}

/// `Π_k step_probability` over a whole history, accumulated in log space.
pub fn history_log_probability(history: &GrowthHistory, config: &SimConfig) -> Result<f64> {
    let evs = history.events();
    let mut acc = 0.0;
    for k in 0..evs.len() {
        acc += step_probability(&evs[..k], &evs[k], config)?.ln();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hpam_example() -> HpamParams {
        HpamParams::new(vec![0.3, 0.7], vec![1.0, 0.5, 0.5, 1.5]).unwrap()
    }

    #[test]
    fn single_node_is_forced_self_loop() {
        let h = simulate_lcd(1, 99).unwrap();
        assert_eq!(h.targets(), vec![1]);
        let h = simulate_hpam(1, &hpam_example(), 99).unwrap();
        assert_eq!(h.targets(), vec![1]);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(simulate_lcd(0, 1).is_err());
        assert!(simulate_bo(5, 0.0, 1).is_err());
        assert!(simulate_bo(5, -1.0, 1).is_err());
        assert!(simulate_general_f(5, 1.0, 0.0, 1).is_err());
        assert!(simulate_general_f(5, 0.0, 1.0, 1).is_err());
        assert!(SimConfig {
            hpam: None,
            ..SimConfig::hpam(5, hpam_example(), 1)
        }
        .simulate()
        .is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        for cfg in [
            SimConfig::lcd(500, 3),
            SimConfig::bo(500, 0.4, 3),
            SimConfig::general_f(500, 1.5, 1.3, 3),
            SimConfig::hpam(500, hpam_example(), 3),
        ] {
            assert_eq!(cfg.simulate().unwrap(), cfg.simulate().unwrap());
        }
        assert_ne!(
            simulate_bo(500, 1.0, 3).unwrap(),
            simulate_bo(500, 1.0, 4).unwrap()
        );
    }

    #[test]
    fn first_steps_follow_closed_forms() {
        let loop1 = AttachEvent::unlabeled(1, 1);
        let lcd = SimConfig::lcd(2, 0);
        assert_eq!(step_probability(&[], &loop1, &lcd).unwrap(), 1.0);
        let p = step_probability(&[loop1], &AttachEvent::unlabeled(2, 1), &lcd).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
        for a in [0.3, 1.0, 4.0] {
            let bo = SimConfig::bo(2, a, 0);
            let p_loop = step_probability(&[loop1], &AttachEvent::unlabeled(2, 2), &bo).unwrap();
            assert!((p_loop - a / (2.0 * a + 1.0)).abs() < 1e-15);
            for delta in [0.5, 2.0, 3.0] {
                let g = SimConfig::general_f(2, a, delta, 0);
                let p = step_probability(&[loop1], &AttachEvent::unlabeled(2, 2), &g).unwrap();
                let want = a / (2f64.powf(delta) + 2.0 * a - 1.0);
                assert!((p - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn step_probability_rejects_bad_extension() {
        let lcd = SimConfig::lcd(3, 0);
        let loop1 = AttachEvent::unlabeled(1, 1);
        assert!(step_probability(&[loop1], &AttachEvent::unlabeled(3, 1), &lcd).is_err());
        assert!(step_probability(&[loop1], &AttachEvent::unlabeled(2, 3), &lcd).is_err());
    }

    #[test]
    fn json_keeps_every_field() {
        let s = serde_json::to_string(&SimConfig::bo(10, 0.5, 1)).unwrap();
        assert_eq!(
            s,
            r#"{"model":"BO","n":10,"seed":1,"bo_a":0.5,"delta":null,"hpam":null}"#
        );
        let back: SimConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, SimConfig::bo(10, 0.5, 1));
    }
}
