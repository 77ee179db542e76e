//! Complex accumulation with an explicit power-of-two exponent, so partial
//! sums whose terms exceed the double range stay finite. All rescaling is by
//! exact powers of two.

use num_complex::Complex64;

const RENORM_HI: f64 = 1e150;
const RENORM_LO: f64 = 1e-150;

/// Exact `2^e` for `e` in the normal range.
fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// `x * 2^e`, stepping so intermediate factors stay normal.
pub(crate) fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= pow2(1000);
        e -= 1000;
        if !x.is_finite() {
            return x;
        }
    }
    while e < -1000 {
        x *= pow2(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2(e)
}

pub(crate) fn ldexp_c(z: Complex64, e: i32) -> Complex64 {
    Complex64::new(ldexp(z.re, e), ldexp(z.im, e))
}

/// A complex number `mantissa * 2^exp2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scaled {
    pub mantissa: Complex64,
    pub exp2: i32,
}

impl Scaled {
    pub fn one() -> Self {
        Scaled {
            mantissa: Complex64::new(1.0, 0.0),
            exp2: 0,
        }
    }

    pub fn new(mantissa: Complex64) -> Self {
        let mut s = Scaled { mantissa, exp2: 0 };
        s.normalize();
        s
    }

    pub fn mul(&mut self, factor: Complex64) {
        self.mantissa *= factor;
        self.normalize();
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    fn normalize(&mut self) {
        let m = self.mantissa.norm();
        if m > RENORM_HI || (m > 0.0 && m < RENORM_LO) {
            let e = m.log2().floor() as i32;
            self.mantissa = ldexp_c(self.mantissa, -e);
            self.exp2 += e;
        }
    }
}

/// Running sum with a shared exponent that only grows.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledSum {
    pub sum: Complex64,
    pub exp2: i32,
}

impl ScaledSum {
    pub fn zero() -> Self {
        ScaledSum {
            sum: Complex64::new(0.0, 0.0),
            exp2: 0,
        }
    }

    pub fn add(&mut self, term: &Scaled) {
        if term.is_zero() {
            return;
        }
        let d = term.exp2 - self.exp2;
        if d > 0 {
            self.sum = ldexp_c(self.sum, -d);
            self.exp2 = term.exp2;
            self.sum += term.mantissa;
        } else {
            self.sum += ldexp_c(term.mantissa, d);
        }
    }

    /// Modulus of `x` expressed in this sum's units.
    pub fn relative(&self, x: &Scaled) -> f64 {
        ldexp(x.mantissa.norm(), x.exp2 - self.exp2)
    }

    /// The value 1 expressed in this sum's units.
    pub fn unit(&self) -> f64 {
        ldexp(1.0, -self.exp2)
    }

    pub fn ln_abs(&self) -> f64 {
        self.sum.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }
}
