use crate::scalar::{KahanSum, Real};

// Stirling-series coefficients B_{2j} / (2j (2j - 1)).
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
];

/// `ln Γ(x)` for `x > 0`.
///
/// Arguments below 16 are shifted up with the recurrence before the
/// asymptotic series is applied; absolute error is near machine precision
/// for `f64`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "ln_gamma needs a positive argument");
    let shift_to = T::lit(16.0);
    let mut z = x;
    let mut log_prod = T::zero();
    while z < shift_to {
        log_prod = log_prod + z.ln();
        z = z + T::one();
    }
    let half = T::lit(0.5);
    let ln_sqrt_2pi = T::lit(0.918_938_533_204_672_8);
    (z - half) * z.ln() - z + ln_sqrt_2pi + stirling_correction(z) - log_prod
}

fn stirling_correction<T: Real>(z: T) -> T {
    let inv = z.recip();
    let inv2 = inv * inv;
    let mut corr = T::zero();
    let mut pow = inv;
    for &c in STIRLING.iter() {
        corr = corr + T::lit(c) * pow;
        pow = pow * inv2;
    }
    corr
}

/// `ln Γ(x + a) - ln Γ(x + b)` for `x + a > 0` and `x + b > 0`.
///
/// The offset difference `a - b` is kept exact, so the result stays
/// accurate when `x` is so large that `x + a` and `x + b` round together.
pub fn ln_gamma_ratio<T: Real>(x: T, a: T, b: T) -> T {
    let (mut zx, mut zy) = (x + a, x + b);
    assert!(
        zx > T::zero() && zy > T::zero(),
        "ln_gamma_ratio needs positive arguments"
    );
    let shift_to = T::lit(16.0);
    let d = a - b;
    let mut log_prod = T::zero();
    while zx < shift_to || zy < shift_to {
        log_prod = log_prod + zx.ln() - zy.ln();
        zx = zx + T::one();
        zy = zy + T::one();
    }
    let half = T::lit(0.5);
    (zx - half) * (d / zy).ln_1p() + d * (zy.ln() - T::one()) + stirling_correction(zx)
        - stirling_correction(zy)
        - log_prod
}

/// `ln n!`, summed exactly for small `n`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n <= 4096 {
        let mut s = KahanSum::new();
        for k in 2..=n {
            s.add(T::from_count(k).ln());
        }
        s.total()
    } else {
        ln_gamma(T::from_count(n) + T::one())
    }
}
