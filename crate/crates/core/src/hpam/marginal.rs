use crate::error::{Error, Result};
use crate::graph::{GrowthHistory, HpamParams};
use crate::scalar::{KahanSum, LogSumExp, Real};

/// Largest history the enumeration accepts.
pub const MAX_MARGINAL_NODES: usize = 14;
/// Largest number of labelings `K^n` the enumeration accepts.
pub const MAX_MARGINAL_LABELINGS: u64 = 1 << 24;

struct Walk<'a, T: Real> {
    params: &'a HpamParams<T>,
    targets: Vec<usize>,
    log_pi: Vec<T>,
    log_gamma: Vec<T>,
    labels: Vec<usize>,
    mass: Vec<T>,
    acc: LogSumExp<T>,
}

impl<T: Real> Walk<'_, T> {
    fn descend(&mut self, step: usize, partial: T) {
        let n = self.targets.len();
        if step == n {
            self.acc.push(partial);
            return;
        }
        let k = self.params.k();
        let target = self.targets[step];
        let self_loop = target == step + 1;
        for c in 0..k {
            let tl = if self_loop {
                c
            } else {
                self.labels[target - 1]
            };
            let denom: T = (0..k)
                .map(|j| self.params.gamma(c, j) * self.mass[j])
                .sum::<T>()
                + self.params.gamma(c, c);
            let term = self.log_pi[c] + self.log_gamma[c * k + tl] - denom.ln();
            self.labels.push(c);
            self.mass[c] = self.mass[c] + T::one();
            self.mass[tl] = self.mass[tl] + T::one();
            self.descend(step + 1, partial + term);
            self.mass[c] = self.mass[c] - T::one();
            self.mass[tl] = self.mass[tl] - T::one();
            self.labels.pop();
        }
    }
}

/// `ln Σ_l L(l; π, γ)` over every membership vector `l ∈ {1..K}^n`, using
/// only the attachment structure of `history` (any labels are ignored).
///
/// Labelings are visited in lexicographic order and combined with a
/// streaming log-sum-exp, so the result is reproducible bit for bit.
pub fn marginal_loglik_bruteforce<T: Real>(
    history: &GrowthHistory,
    params: &HpamParams<T>,
) -> Result<T> {
    let n = history.len();
    if n == 0 {
        return Err(Error::EmptyData("history is empty".into()));
    }
    let k = params.k();
    let labelings = (k as u64).checked_pow(n as u32);
    if n > MAX_MARGINAL_NODES || labelings.is_none_or(|c| c > MAX_MARGINAL_LABELINGS) {
        return Err(Error::SizeGuard(format!(
            "enumerating {k}^{n} labelings exceeds the limit of n <= {MAX_MARGINAL_NODES} and \
             {MAX_MARGINAL_LABELINGS} labelings"
        )));
    }
    // Degree factors do not depend on labels.
    let targets = history.targets();
    let mut degree = vec![0u64; n];
    let mut degree_term = KahanSum::new();
    for (i, &t) in targets.iter().enumerate() {
        if t == i + 1 {
            degree[i] += 2;
        } else {
            degree_term.add(T::from_count(degree[t - 1]).ln());
            degree[i] += 1;
            degree[t - 1] += 1;
        }
    }
    let mut walk = Walk {
        params,
        targets,
        log_pi: params.pi().iter().map(|p| p.ln()).collect(),
        log_gamma: params.gamma_matrix().iter().map(|g| g.ln()).collect(),
        labels: Vec::with_capacity(n),
        mass: vec![T::zero(); k],
        acc: LogSumExp::new(),
    };
    walk.descend(0, T::zero());
    Ok(walk.acc.value() + degree_term.total())
}
