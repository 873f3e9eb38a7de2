use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exact expectations `E Z_k^n` for the Buckley-Osthus process, by forward
/// iteration of the one-step recursions for the degree frequencies.
///
/// The result is indexed by degree: entry `k` holds `E Z_k^n` for
/// `k = 0..=n+1` (entry 0 is always zero).
pub fn expected_degree_counts_bo<T: Real>(n: usize, a: T) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must be positive")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let mut cur = vec![T::zero(); n + 2];
    let mut next = vec![T::zero(); n + 2];
    cur[2] = one;
    for t in 1..n {
        let nodes = T::from_index(t);
        let w = (a + one) * nodes + a;
        next[1] = cur[1] + ((a + one) * nodes - a * cur[1]) / w;
        next[2] = cur[2] + (a + a * cur[1] - (a + one) * cur[2]) / w;
        // Degrees above t+1 are unreachable at time t.
        for k in 3..=(t + 2) {
            let kk = T::from_index(k);
            next[k] = cur[k] + ((kk + a - two) * cur[k - 1] - (kk + a - one) * cur[k]) / w;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}
