//! Double-double arithmetic with a separate binary exponent.
//!
//! Values are `(hi + lo) * 2^exp` with `|hi|` in `[0.5, 1)` (or zero), which
//! gives ~106 bits of mantissa and an effectively unbounded exponent range.
//! Binomial tails for `n` in the thousands fall far below `f64::MIN_POSITIVE`.

use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Xf {
    hi: f64,
    lo: f64,
    exp: i64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn dd_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (s1, s2) = two_sum(a.0, b.0);
    let (t1, t2) = two_sum(a.1, b.1);
    let (s1, s2) = quick_two_sum(s1, s2 + t1);
    quick_two_sum(s1, s2 + t2)
}

fn dd_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (p, e) = two_prod(a.0, b.0);
    quick_two_sum(p, e + (a.0 * b.1 + a.1 * b.0))
}

fn dd_mul_f64(a: (f64, f64), b: f64) -> (f64, f64) {
    let (p, e) = two_prod(a.0, b);
    quick_two_sum(p, e + a.1 * b)
}

fn dd_div(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let q1 = a.0 / b.0;
    let r = dd_add(a, dd_mul_f64(b, -q1));
    let q2 = r.0 / b.0;
    let r = dd_add(r, dd_mul_f64(b, -q2));
    let q3 = r.0 / b.0;
    let (q1, q2) = quick_two_sum(q1, q2);
    dd_add((q1, q2), (q3, 0.0))
}

/// `2^k` for `k` in the normal exponent range, 0 below it.
fn pow2(k: i64) -> f64 {
    if k < -1022 {
        if k < -1074 {
            0.0
        } else {
            f64::from_bits(1u64 << (k + 1074))
        }
    } else {
        assert!(k <= 1023, "pow2 overflow");
        f64::from_bits(((k + 1023) as u64) << 52)
    }
}

/// Splits a finite non-zero `x` into `m * 2^e` with `|m|` in `[0.5, 1)`.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 {
        return (0.0, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        let (m, e) = frexp(x * pow2(64));
        return (m, e - 64);
    }
    let e = raw - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e)
}

impl Xf {
    pub(crate) const ZERO: Xf = Xf { hi: 0.0, lo: 0.0, exp: 0 };
    pub(crate) const ONE: Xf = Xf { hi: 0.5, lo: 0.0, exp: 1 };

    fn normalized(hi: f64, lo: f64, exp: i64) -> Xf {
        let (hi, lo) = quick_two_sum(hi, lo);
        if hi == 0.0 {
            return Xf::ZERO;
        }
        let (m, e) = frexp(hi);
        let s = pow2(-e);
        Xf { hi: m, lo: lo * s, exp: exp + e }
    }

    pub(crate) fn from_f64(x: f64) -> Xf {
        Xf::normalized(x, 0.0, 0)
    }

    /// Exact `a - b` for two doubles.
    pub(crate) fn diff_of(a: f64, b: f64) -> Xf {
        let (s, e) = two_sum(a, -b);
        Xf::normalized(s, e, 0)
    }

    /// `self * 2^k`.
    #[cfg(test)]
    pub(crate) fn ldexp(self, k: i64) -> Xf {
        if self.is_zero() {
            return self;
        }
        Xf { exp: self.exp + k, ..self }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.hi == 0.0
    }

    pub(crate) fn mul(self, o: Xf) -> Xf {
        if self.is_zero() || o.is_zero() {
            return Xf::ZERO;
        }
        let (h, l) = dd_mul((self.hi, self.lo), (o.hi, o.lo));
        Xf::normalized(h, l, self.exp + o.exp)
    }

    pub(crate) fn mul_f64(self, x: f64) -> Xf {
        self.mul(Xf::from_f64(x))
    }

    pub(crate) fn div(self, o: Xf) -> Xf {
        assert!(!o.is_zero(), "division by zero");
        if self.is_zero() {
            return Xf::ZERO;
        }
        let (h, l) = dd_div((self.hi, self.lo), (o.hi, o.lo));
        Xf::normalized(h, l, self.exp - o.exp)
    }

    pub(crate) fn div_f64(self, x: f64) -> Xf {
        self.div(Xf::from_f64(x))
    }

    pub(crate) fn add(self, o: Xf) -> Xf {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let shift = small.exp - big.exp;
        if shift < -220 {
            return big;
        }
        let s = pow2(shift);
        let (h, l) = dd_add((big.hi, big.lo), (small.hi * s, small.lo * s));
        Xf::normalized(h, l, big.exp)
    }

    pub(crate) fn neg(self) -> Xf {
        Xf { hi: -self.hi, lo: -self.lo, exp: self.exp }
    }

    pub(crate) fn sub(self, o: Xf) -> Xf {
        self.add(o.neg())
    }

    pub(crate) fn powi(self, mut n: u64) -> Xf {
        let mut base = self;
        let mut acc = Xf::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            n >>= 1;
        }
        acc
    }

    /// Nearest double; underflows to zero below the subnormal range.
    pub(crate) fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = self.hi + self.lo;
        if self.exp > 1023 {
            return f64::INFINITY.copysign(v);
        }
        if self.exp < -1100 {
            return 0.0;
        }
        // split the scaling so intermediate factors stay normal
        let half = self.exp / 2;
        v * pow2(half) * pow2(self.exp - half)
    }

    /// `log2` of a positive value.
    pub(crate) fn log2(self) -> f64 {
        if self.hi <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.exp as f64 + self.hi.log2() + self.lo / (self.hi * std::f64::consts::LN_2)
    }

    pub(crate) fn cmp(&self, o: &Xf) -> Ordering {
        let d = self.sub(*o);
        if d.is_zero() {
            Ordering::Equal
        } else if d.hi > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    pub(crate) fn le(&self, o: &Xf) -> bool {
        self.cmp(o) != Ordering::Greater
    }
}
