use serde::{Deserialize, Serialize};

use super::likelihood::BoObjective;
use crate::error::{Error, Result};
use crate::graph::{BoDomain, DegreeCounts};
use crate::numeric::{bisect_root, golden_section_max};
use crate::scalar::Real;

const GRID: usize = 65;
const SCORE_TOL: f64 = 1e-9;
const WIDTH_TOL: f64 = 1e-10;
const MAX_ITER: usize = 500;

/// Which end of the domain the maximizer sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoFitResult<T: Real = f64> {
    pub a_hat: T,
    /// Scaled log-likelihood at `a_hat`.
    pub loglik: T,
    pub iterations: usize,
    pub converged: bool,
    pub boundary: Option<Boundary>,
}

/// Maximum-likelihood estimate of `a` over `domain`.
///
/// The score is evaluated on a log-spaced grid. A single `+ -> -` sign
/// change is refined by bisection on the score; any other pattern falls back
/// to golden-section search on the log-likelihood around the best grid point.
pub fn bo_mle<T: Real>(counts: &DegreeCounts, domain: BoDomain<T>) -> Result<BoFitResult<T>> {
    if counts.n() < 2 {
        return Err(Error::DegenerateData(format!(
            "the likelihood is constant for n = {}",
            counts.n()
        )));
    }
    let obj = BoObjective::new(counts)?;
    let (lo, hi) = (domain.eps, domain.max);
    let ratio = (hi / lo).ln();
    let grid: Vec<T> = (0..GRID)
        .map(|i| {
            if i == GRID - 1 {
                hi
            } else {
                lo * (ratio * T::from_index(i) / T::from_index(GRID - 1)).exp()
            }
        })
        .collect();
    let scores = grid
        .iter()
        .map(|&a| obj.score(a))
        .collect::<Result<Vec<T>>>()?;
    let mut iterations = GRID;

    let sign = |s: T| s > T::zero();
    let changes: Vec<usize> = (0..GRID - 1)
        .filter(|&i| sign(scores[i]) != sign(scores[i + 1]))
        .collect();

    let ll = |a: T| obj.loglik(a).expect("a inside a positive domain");
    let finish = |a: T, iterations: usize, converged: bool| -> BoFitResult<T> {
        let boundary = if a <= lo {
            Some(Boundary::Lower)
        } else if a >= hi {
            Some(Boundary::Upper)
        } else {
            None
        };
        BoFitResult {
            a_hat: a,
            loglik: ll(a),
            iterations,
            converged,
            boundary,
        }
    };

    if changes.is_empty() {
        let a = if sign(scores[0]) { hi } else { lo };
        return Ok(finish(a, iterations, true));
    }
    if changes.len() == 1 && sign(scores[changes[0]]) {
        let i = changes[0];
        let r = bisect_root(
            |a| obj.score(a).expect("a inside a positive domain"),
            grid[i],
            grid[i + 1],
            T::lit(SCORE_TOL),
            T::lit(WIDTH_TOL),
            MAX_ITER,
        );
        iterations += r.iterations;
        return Ok(finish(r.root, iterations, r.converged));
    }

    // Several sign changes: search around the best grid point, then compare
    // with the domain end points.
    let best = (0..GRID)
        .max_by(|&i, &j| {
            ll(grid[i])
                .partial_cmp(&ll(grid[j]))
                .expect("finite loglik")
        })
        .expect("non-empty grid");
    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(GRID - 1)];
    let (x, fx, it) = golden_section_max(ll, left, right, T::lit(WIDTH_TOL), MAX_ITER);
    iterations += it;
    let converged = it < MAX_ITER;
    let mut a = x;
    let mut fa = fx;
    for end in [lo, hi] {
        let fe = ll(end);
        if fe > fa {
            a = end;
            fa = fe;
        }
    }
    Ok(finish(a, iterations, converged))
}
