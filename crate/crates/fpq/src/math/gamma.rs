//! Gamma function and regularized incomplete gamma ratios.
//!
//! `gamma` evaluates Γ(x) for x > 0 by the Stirling series after shifting the
//! argument to z >= 21, where the series with twelve Bernoulli terms is
//! accurate far below f64 roundoff. Relative error on [1, 5] is ~1e-14,
//! within the 1e-13 contract required for the fractional service moments.

use crate::math::{exp, ln};

/// Stirling coefficients B_{2k} / (2k (2k-1)).
const STIRLING: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
    854_513.0 / 63_756.0,
    -236_364_091.0 / 1_506_960.0,
];

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// ln Γ(z) for z >= 21 by the Stirling series.
fn ln_gamma_stirling(z: f64) -> f64 {
    let mut series = 0.0;
    let z2 = z * z;
    let mut zp = z;
    for c in STIRLING {
        series += c / zp;
        zp *= z2;
    }
    (z - 0.5) * ln(z) - z + HALF_LN_TWO_PI + series
}

/// Γ(x) for x > 0.
pub(crate) fn gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 21.0 {
        return exp(ln_gamma_stirling(x));
    }
    // Γ(x) = Γ(x + m) / (x (x+1) ... (x+m-1)) with x + m >= 21.
    let mut prod = 1.0;
    let mut z = x;
    while z < 21.0 {
        prod *= z;
        z += 1.0;
    }
    exp(ln_gamma_stirling(z)) / prod
}

/// ln Γ(x) for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x >= 21.0 {
        return ln_gamma_stirling(x);
    }
    let mut log_prod = 0.0;
    let mut z = x;
    while z < 21.0 {
        log_prod += ln(z);
        z += 1.0;
    }
    ln_gamma_stirling(z) - log_prod
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
#[cfg(test)]
pub(crate) fn gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub(crate) fn gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_cf(a, x)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if libm::fabs(del) < libm::fabs(sum) * 1e-16 {
            break;
        }
    }
    sum * exp(-x + a * ln(x) - ln_gamma(a))
}

fn upper_cf(a: f64, x: f64) -> f64 {
    // modified Lentz continued fraction
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    h * exp(-x + a * ln(x) - ln_gamma(a))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // reference values to 25 significant digits
    const REFS: [(f64, f64); 8] = [
        (1.0 / 3.0, 2.678938534707747633655693),
        (2.0 / 3.0, 1.354117939426400416945288),
        (1.001, 0.9994237724845954661149822),
        (1.5, 0.8862269254527580136490837),
        (2.5, 1.329340388179137020473626),
        (3.5, 3.323350970447842551184064),
        (4.0, 6.0),
        (4.999, 23.96388303505555516882756),
    ];

    #[test]
    fn matches_references_to_1e13() {
        for (x, want) in REFS {
            let got = gamma(x);
            assert!(
                libm::fabs(got - want) / want < 1e-13,
                "gamma({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn recurrence_on_grid() {
        let mut x = 1.0;
        while x <= 4.0 {
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!(libm::fabs(lhs - rhs) / rhs < 1e-13);
            x += 0.0625;
        }
    }

    #[test]
    fn incomplete_gamma_basics() {
        // P(1, x) = 1 - e^{-x}
        for x in [0.1, 1.0, 3.0, 10.0] {
            let want = 1.0 - exp(-x);
            assert!(libm::fabs(gamma_p(1.0, x) - want) < 1e-14);
        }
        // complementarity
        for (a, x) in [(0.5, 0.3), (2.5, 4.0), (10.0, 7.5)] {
            let s = gamma_p(a, x) + gamma_q(a, x);
            assert!(libm::fabs(s - 1.0) < 1e-14);
        }
        // chi-square with 2 dof: Q(1, x/2) = e^{-x/2}
        assert!(libm::fabs(gamma_q(1.0, 2.0) - exp(-2.0)) < 1e-14);
    }
}
