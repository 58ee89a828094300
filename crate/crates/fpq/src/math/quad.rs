//! Quadrature rules: Gauss-Legendre panels and adaptive Simpson.

use alloc::vec::Vec;

use crate::math::{abs, cos};

/// A Gauss-Legendre rule of fixed degree. Nodes and weights are computed at
/// construction by Newton iteration on the Legendre polynomial, so no
/// coefficient tables are embedded.
#[derive(Clone, Debug)]
pub(crate) struct GaussLegendre {
    /// nodes on (-1, 1)
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        debug_assert!(n >= 2);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let m = n.div_euclid(2) + n.rem_euclid(2);
        for i in 0..m {
            // Tricomi-style initial guess, then Newton
            let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if abs(dx) < 1e-15 {
                    let (p2, d2) = legendre_and_deriv(n, x);
                    x -= p2 / d2;
                    dp = legendre_and_deriv(n, x).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(x);
            weights.push(w);
        }
        // mirror to the other half (skip the center for odd n)
        for i in (0..m).rev() {
            if nodes[i] != 0.0 {
                nodes.push(-nodes[i]);
                weights.push(weights[i]);
            }
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b] with a single panel of this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // degree 15 is integrated exactly by an 8-point rule
        let val = gl.integrate(0.0, 1.0, |x| 16.0 * libm::pow(x, 15.0));
        assert!(abs(val - 1.0) < 1e-13, "{val}");
        let gl20 = GaussLegendre::new(20);
        let val = gl20.integrate(-1.0, 2.0, |x| libm::pow(x, 30.0));
        let want = (libm::pow(2.0, 31.0) + 1.0) / 31.0;
        assert!(abs(val - want) / want < 1e-12);
    }

    #[test]
    fn gauss_legendre_smooth() {
        let gl = GaussLegendre::new(15);
        let val = gl.integrate(0.0, core::f64::consts::PI, libm::sin);
        assert!(abs(val - 2.0) < 1e-12);
    }

}
