//! Minimal double-double arithmetic (~31 significant digits).
//!
//! The Maclaurin series for the Airy functions suffer catastrophic
//! cancellation already for |x| around 5; accumulating the series in
//! double-double keeps the cancellation error near 1e-22 over the whole
//! series range so the crate needs no external multiprecision dependency.

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[cfg(test)]
    pub fn new(hi: f64, lo: f64) -> Dd {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, other.hi);
        let (s2, e2) = two_sum(self.lo, other.lo);
        let (s1, e1) = quick_two_sum(s1, e1 + s2);
        let (hi, lo) = quick_two_sum(s1, e1 + e2);
        Dd { hi, lo }
    }

    #[cfg(test)]
    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let s = ((self.hi - p) - e) + self.lo;
        let q2 = s / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Square root by one double-double Newton step from the f64 seed.
    #[cfg(test)]
    pub fn sqrt(self) -> Dd {
        let x0 = libm::sqrt(self.hi);
        if x0 == 0.0 {
            return Dd::ZERO;
        }
        let x0d = Dd::from_f64(x0);
        let r = self.sub(x0d.mul(x0d)).div_f64(2.0 * x0);
        x0d.add(r)
    }

    #[inline]
    pub fn abs(self) -> f64 {
        libm::fabs(self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::Dd;

    #[test]
    fn captures_bits_beyond_f64() {
        let a = Dd::from_f64(1e16).add(Dd::from_f64(1.0));
        let b = a.sub(Dd::from_f64(1e16));
        assert_eq!(b.value(), 1.0);
    }

    #[test]
    fn mul_div_roundtrip() {
        let x = Dd::new(core::f64::consts::PI, 1.2246467991473532e-16);
        let y = x.mul_f64(7.0).div_f64(7.0);
        assert!((y.hi - x.hi).abs() == 0.0);
        assert!((y.lo - x.lo).abs() < 1e-30);
    }

    #[test]
    fn sqrt_three() {
        let s = Dd::from_f64(3.0).sqrt();
        let sq = s.mul(s);
        assert!((sq.value() - 3.0).abs() < 1e-30);
        assert!((s.hi - 1.732_050_807_568_877_2).abs() < 1e-15);
    }
}
