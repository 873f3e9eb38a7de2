//! Growth histories and the sufficient statistics accumulated from them.
//!
//! Node indices are 1-based and coincide with arrival time: event `k`
//! records the arrival of node `k`. Community labels are 1-based as well
//! (`1..=K`); the statistics in [`CommunityStats`] are indexed 0-based by
//! `label - 1`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Arrival of one node and the single edge it brings along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachEvent {
    pub node: usize,
    /// Equal to `node` for a self-loop.
    pub target: usize,
    pub membership: Option<u32>,
    pub target_membership: Option<u32>,
}

impl AttachEvent {
    pub fn unlabeled(node: usize, target: usize) -> Self {
        Self {
            node,
            target,
            membership: None,
            target_membership: None,
        }
    }

    pub fn labeled(node: usize, target: usize, membership: u32, target_membership: u32) -> Self {
        Self {
            node,
            target,
            membership: Some(membership),
            target_membership: Some(target_membership),
        }
    }

    #[inline]
    pub fn is_self_loop(&self) -> bool {
        self.node == self.target
    }
}

/// Ordered record of attachment events; the sufficient record for every
/// likelihood in this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthHistory {
    events: Vec<AttachEvent>,
    num_communities: usize,
}

impl GrowthHistory {
    /// Validates and wraps a list of events.
    ///
    /// Either every event carries labels or none does. Labels must lie in
    /// `1..=num_communities`, and each `target_membership` must agree with
    /// the label the target node received on arrival.
    pub fn new(events: Vec<AttachEvent>, num_communities: usize) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::Structure("history has no events".into()));
        }
        if num_communities == 0 {
            return Err(Error::Structure(
                "number of communities must be positive".into(),
            ));
        }
        let labeled = events[0].membership.is_some();
        let mut labels: Vec<u32> = Vec::with_capacity(if labeled { events.len() } else { 0 });
        for (i, ev) in events.iter().enumerate() {
            let k = i + 1;
            if ev.node != k {
                return Err(Error::Structure(format!(
                    "event {k} describes node {} (events must be in arrival order)",
                    ev.node
                )));
            }
            if ev.target == 0 || ev.target > ev.node {
                return Err(Error::Structure(format!(
                    "event {k}: target {} outside 1..={}",
                    ev.target, ev.node
                )));
            }
            if k == 1 && !ev.is_self_loop() {
                return Err(Error::Structure("event 1 must be a self-loop".into()));
            }
            match (ev.membership, ev.target_membership) {
                (None, None) if !labeled => {}
                (Some(l), Some(t)) if labeled => {
                    for lab in [l, t] {
                        if lab == 0 || lab as usize > num_communities {
                            return Err(Error::Labeling(format!(
                                "event {k}: label {lab} outside 1..={num_communities}"
                            )));
                        }
                    }
                    labels.push(l);
                    let expected = labels[ev.target - 1];
                    if t != expected {
                        return Err(Error::Labeling(format!(
                            "event {k}: target_membership {t} but node {} has label {expected}",
                            ev.target
                        )));
                    }
                }
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Error::Labeling(format!(
                        "event {k}: membership and target_membership must both be present or both absent"
                    )));
                }
                _ => {
                    return Err(Error::Labeling(format!(
                        "event {k}: histories must be labeled throughout or not at all"
                    )));
                }
            }
        }
        Ok(Self {
            events,
            num_communities,
        })
    }

    /// Builds a community-free history from a target list (`targets[k-1]`
    /// is the node that node `k` attached to).
    pub fn from_targets(targets: &[usize]) -> Result<Self> {
        let events = targets
            .iter()
            .enumerate()
            .map(|(i, &t)| AttachEvent::unlabeled(i + 1, t))
            .collect();
        Self::new(events, 1)
    }

    /// Builds a labeled history from targets and per-node labels.
    pub fn from_targets_labeled(
        targets: &[usize],
        labels: &[u32],
        num_communities: usize,
    ) -> Result<Self> {
        if targets.len() != labels.len() {
            return Err(Error::Dimension {
                expected: targets.len(),
                found: labels.len(),
            });
        }
        let mut events = Vec::with_capacity(targets.len());
        for (i, (&t, &l)) in targets.iter().zip(labels).enumerate() {
            let tl = *labels.get(t.wrapping_sub(1)).ok_or_else(|| {
                Error::Structure(format!("event {}: target {t} out of range", i + 1))
            })?;
            events.push(AttachEvent::labeled(i + 1, t, l, tl));
        }
        Self::new(events, num_communities)
    }

    pub fn events(&self) -> &[AttachEvent] {
        &self.events
    }

    /// Number of nodes (equivalently, events and edges).
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn is_labeled(&self) -> bool {
        self.events[0].membership.is_some()
    }

    /// Node labels (1-based), if the history is labeled.
    pub fn labels(&self) -> Option<Vec<u32>> {
        self.events.iter().map(|e| e.membership).collect()
    }

    pub fn targets(&self) -> Vec<usize> {
        self.events.iter().map(|e| e.target).collect()
    }

    /// The same attachments with every label removed.
    pub fn unlabeled(&self) -> GrowthHistory {
        GrowthHistory {
            events: self
                .events
                .iter()
                .map(|e| AttachEvent::unlabeled(e.node, e.target))
                .collect(),
            num_communities: 1,
        }
    }

    /// The first `n` events.
    pub fn prefix(&self, n: usize) -> Result<GrowthHistory> {
        if n == 0 || n > self.len() {
            return Err(Error::Structure(format!(
                "prefix length {n} outside 1..={}",
                self.len()
            )));
        }
        Ok(GrowthHistory {
            events: self.events[..n].to_vec(),
            num_communities: self.num_communities,
        })
    }

    /// Final degree of every node, 0-based by node index. A self-loop adds 2.
    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.len()];
        for ev in &self.events {
            deg[ev.node - 1] += 1;
            deg[ev.target - 1] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> u64 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn degree_counts(&self) -> DegreeCounts {
        DegreeCounts::from_degrees(self.degrees())
    }

    pub fn community_stats(&self) -> Result<CommunityStats> {
        CommunityStats::from_history(self)
    }

    /// Writes the `node,target,membership,target_membership` CSV format.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        for ev in &self.events {
            w.serialize(CsvEvent::from(*ev))?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Parses the CSV format. Without an explicit community count, `K` is
    /// the largest label present (1 for unlabeled files).
    pub fn read_csv<R: Read>(reader: R, num_communities: Option<usize>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut events = Vec::new();
        for (i, rec) in rdr.deserialize::<CsvEvent>().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: i as u64 + 2,
                message: e.to_string(),
            })?;
            events.push(AttachEvent::from(rec));
        }
        if events.is_empty() {
            return Err(Error::EmptyData("history CSV has no rows".into()));
        }
        let max_label = events
            .iter()
            .filter_map(|e| e.membership.into_iter().chain(e.target_membership).max())
            .max()
            .unwrap_or(1) as usize;
        let k = num_communities.unwrap_or(max_label.max(1));
        Self::new(events, k)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvEvent {
    node: usize,
    target: usize,
    membership: Option<u32>,
    target_membership: Option<u32>,
}

impl From<AttachEvent> for CsvEvent {
    fn from(e: AttachEvent) -> Self {
        Self {
            node: e.node,
            target: e.target,
            membership: e.membership,
            target_membership: e.target_membership,
        }
    }
}

impl From<CsvEvent> for AttachEvent {
    fn from(e: CsvEvent) -> Self {
        Self {
            node: e.node,
            target: e.target,
            membership: e.membership,
            target_membership: e.target_membership,
        }
    }
}

/// Degree frequencies `Z_k` of a graph, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCounts {
    n: u64,
    counts: BTreeMap<u64, u64>,
}

impl DegreeCounts {
    pub fn from_degrees<I: IntoIterator<Item = u64>>(degrees: I) -> Self {
        let mut counts = BTreeMap::new();
        let mut n = 0;
        for d in degrees {
            *counts.entry(d).or_insert(0) += 1;
            n += 1;
        }
        Self { n, counts }
    }

    /// Builds counts directly from a `degree -> count` map, checking that
    /// the degree sum equals twice the node count.
    pub fn from_map(counts: BTreeMap<u64, u64>) -> Result<Self> {
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        if counts.contains_key(&0) {
            return Err(Error::Structure(
                "degree 0 is impossible in a growth history".into(),
            ));
        }
        let n: u64 = counts.values().sum();
        let mass: u64 = counts.iter().map(|(k, c)| k * c).sum();
        if mass != 2 * n {
            return Err(Error::Structure(format!(
                "degree sum {mass} differs from 2n = {}",
                2 * n
            )));
        }
        Ok(Self { n, counts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `Z_k`, the number of nodes of degree `k`.
    pub fn get(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    pub fn max_degree(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn degree_sum(&self) -> u64 {
        self.iter().map(|(k, c)| k * c).sum()
    }

    /// `Z_{>k}` for `k = 0..=max_degree`, from a single suffix-sum pass.
    pub fn tail_counts(&self) -> Vec<u64> {
        let max = self.max_degree() as usize;
        let mut tail = vec![0u64; max + 1];
        let mut acc = 0;
        for k in (0..=max).rev() {
            tail[k] = acc;
            acc += self.get(k as u64);
        }
        tail
    }

    /// `Z_{>k}`.
    pub fn tail(&self, k: u64) -> u64 {
        self.counts.range(k + 1..).map(|(_, &c)| c).sum()
    }
}

/// Per-community statistics `T_j`, `N_j^k`, `M_ij` of a labeled history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityStats {
    n: usize,
    k: usize,
    t: Vec<u64>,
    /// Row `k-1` holds `N^{k-1}`, the degree mass per community just before
    /// step `k`; one extra final row holds `N^n`.
    n_path: Vec<u64>,
    m: Vec<u64>,
    labels: Vec<u32>,
    self_loops: Vec<bool>,
    degrees: DegreeCounts,
}

impl CommunityStats {
    pub fn from_history(history: &GrowthHistory) -> Result<Self> {
        if !history.is_labeled() {
            return Err(Error::Labeling(
                "community statistics need membership labels on every event".into(),
            ));
        }
        let n = history.len();
        let k = history.num_communities();
        let mut t = vec![0u64; k];
        let mut m = vec![0u64; k * k];
        let mut n_path = vec![0u64; (n + 1) * k];
        let mut labels = Vec::with_capacity(n);
        let mut self_loops = Vec::with_capacity(n);
        let mut mass = vec![0u64; k];
        for (step, ev) in history.events().iter().enumerate() {
            n_path[step * k..(step + 1) * k].copy_from_slice(&mass);
            let l = ev.membership.expect("labeled history") as usize - 1;
            let tl = ev.target_membership.expect("labeled history") as usize - 1;
            t[l] += 1;
            mass[l] += 1;
            mass[tl] += 1;
            if l == tl {
                m[l * k + l] += 1;
            } else {
                m[l * k + tl] += 1;
                m[tl * k + l] += 1;
            }
            labels.push(l as u32);
            self_loops.push(ev.is_self_loop());
        }
        n_path[n * k..].copy_from_slice(&mass);
        Ok(Self {
            n,
            k,
            t,
            n_path,
            m,
            labels,
            self_loops,
            degrees: history.degree_counts(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_communities(&self) -> usize {
        self.k
    }

    /// `T_j^n`, 0-based by community.
    pub fn t(&self) -> &[u64] {
        &self.t
    }

    /// `N^{step-1}`: degree mass per community before node `step` arrives.
    /// `step` runs over `1..=n+1`; `step = n+1` gives the final `N^n`.
    pub fn mass_before(&self, step: usize) -> &[u64] {
        let row = step - 1;
        &self.n_path[row * self.k..(row + 1) * self.k]
    }

    pub fn mass_final(&self) -> &[u64] {
        self.mass_before(self.n + 1)
    }

    /// `M_ij^n` (symmetric; a cross edge is counted once in each of `M_ij`
    /// and `M_ji`).
    pub fn m(&self, i: usize, j: usize) -> u64 {
        self.m[i * self.k + j]
    }

    /// 0-based label `l_k` of node `k` (index `k-1`).
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Whether node `k` (index `k-1`) arrived with a self-loop.
    pub fn self_loops(&self) -> &[bool] {
        &self.self_loops
    }

    pub fn degrees(&self) -> &DegreeCounts {
        &self.degrees
    }
}

/// Parameters `(pi, gamma)` of the hierarchical model.
///
/// `gamma` is stored row-major and is rescaled on construction so that
/// `gamma_11 = 1`; the attachment law is invariant under that rescaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HpamParamsRepr<T>", into = "HpamParamsRepr<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct HpamParams<T: Real = f64> {
    pi: Vec<T>,
    gamma: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct HpamParamsRepr<T> {
    k: usize,
    pi: Vec<T>,
    gamma: Vec<T>,
}

impl<T: Real> TryFrom<HpamParamsRepr<T>> for HpamParams<T> {
    type Error = Error;

    fn try_from(r: HpamParamsRepr<T>) -> Result<Self> {
        if r.pi.len() != r.k {
            return Err(Error::Dimension {
                expected: r.k,
                found: r.pi.len(),
            });
        }
        HpamParams::new(r.pi, r.gamma)
    }
}

impl<T: Real> From<HpamParams<T>> for HpamParamsRepr<T> {
    fn from(p: HpamParams<T>) -> Self {
        Self {
            k: p.k(),
            pi: p.pi,
            gamma: p.gamma,
        }
    }
}

impl<T: Real> HpamParams<T> {
    /// `gamma` is a row-major `K x K` matrix.
    pub fn new(pi: Vec<T>, gamma: Vec<T>) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::InvalidParameter("pi is empty".into()));
        }
        if gamma.len() != k * k {
            return Err(Error::Dimension {
                expected: k * k,
                found: gamma.len(),
            });
        }
        let tol = T::epsilon().sqrt();
        if pi.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "pi entries must be positive".into(),
            ));
        }
        let total: T = pi.iter().copied().sum();
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "pi sums to {total}, not 1"
            )));
        }
        if gamma.iter().any(|&g| !(g > T::zero()) || !g.is_finite()) {
            return Err(Error::InvalidParameter(
                "gamma entries must be positive".into(),
            ));
        }
        let mut gamma = gamma;
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = (gamma[i * k + j], gamma[j * k + i]);
                if (a - b).abs() > tol * a.max(b) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                let mid = (a + b) / T::lit(2.0);
                gamma[i * k + j] = mid;
                gamma[j * k + i] = mid;
            }
        }
        let g11 = gamma[0];
        for g in gamma.iter_mut() {
            *g = *g / g11;
        }
        gamma[0] = T::one();
        let pi = pi.into_iter().map(|p| p / total).collect();
        Ok(Self { pi, gamma })
    }

    /// Equal membership probabilities and a constant interaction matrix: the
    /// LCD law with labels attached.
    pub fn uniform(k: usize) -> Self {
        let w = T::one() / T::from_index(k);
        Self {
            pi: vec![w; k],
            gamma: vec![T::one(); k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    #[inline]
    pub fn gamma(&self, i: usize, j: usize) -> T {
        self.gamma[i * self.k() + j]
    }

    /// Row-major matrix.
    pub fn gamma_matrix(&self) -> &[T] {
        &self.gamma
    }

    /// Relabels communities: community `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        if perm.len() != k {
            return Err(Error::Dimension {
                expected: k,
                found: perm.len(),
            });
        }
        let mut pi = vec![T::zero(); k];
        let mut gamma = vec![T::zero(); k * k];
        for i in 0..k {
            pi[perm[i]] = self.pi[i];
            for j in 0..k {
                gamma[perm[i] * k + perm[j]] = self.gamma(i, j);
            }
        }
        Self::new(pi, gamma)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> HpamParams<U> {
        let conv = |x: &T| U::from_f64(x.to_f64().expect("finite")).expect("finite");
        HpamParams {
            pi: self.pi.iter().map(conv).collect(),
            gamma: self.gamma.iter().map(conv).collect(),
        }
    }
}

/// Closed search interval `[eps, max]` for the Buckley-Osthus parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoDomain<T: Real = f64> {
    pub eps: T,
    pub max: T,
}

impl<T: Real> BoDomain<T> {
    pub fn new(eps: T, max: T) -> Result<Self> {
        if !(eps > T::zero() && eps < max && max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "domain [{eps}, {max}] must satisfy 0 < eps < max < inf"
            )));
        }
        Ok(Self { eps, max })
    }

    pub fn contains(&self, a: T) -> bool {
        a >= self.eps && a <= self.max
    }
}

impl<T: Real> Default for BoDomain<T> {
    fn default() -> Self {
        Self {
            eps: T::lit(1e-3),
            max: T::lit(100.0),
        }
    }
}

/// A Buckley-Osthus parameter known to lie in its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoParam<T: Real = f64> {
    a: T,
    domain: BoDomain<T>,
}

impl<T: Real> BoParam<T> {
    pub fn new(a: T, domain: BoDomain<T>) -> Result<Self> {
        if !domain.contains(a) {
            return Err(Error::Domain(format!(
                "a = {a} outside [{}, {}]",
                domain.eps, domain.max
            )));
        }
        Ok(Self { a, domain })
    }

    pub fn value(&self) -> T {
        self.a
    }

    pub fn domain(&self) -> BoDomain<T> {
        self.domain
    }
}
