//! Closed intervals with outward rounding.
//!
//! Results are rounded to nearest and then widened by one ulp on each side
//! unless the operation is known to be exact (checked with an error-free
//! transformation). `powf` and `sqrt` are widened by four ulps because the
//! platform `pow` is not guaranteed to be correctly rounded.

use std::fmt;
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const POW_ULPS: u32 = 4;

fn down_by(mut x: f64, ulps: u32) -> f64 {
    for _ in 0..ulps {
        x = x.next_down();
    }
    x
}

fn up_by(mut x: f64, ulps: u32) -> f64 {
    for _ in 0..ulps {
        x = x.next_up();
    }
    x
}

// Below this magnitude the rounding error of a product may itself underflow.
const TINY: f64 = 1e-280;

fn mul_bounds(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if p == 0.0 && (a == 0.0 || b == 0.0) {
        return (0.0, 0.0);
    }
    if p.is_finite() && p.abs() > TINY && a.mul_add(b, -p) == 0.0 {
        (p, p)
    } else {
        (p.next_down(), p.next_up())
    }
}

fn add_bounds(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s.next_down(), s.next_up());
    }
    // two-sum error term
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err == 0.0 {
        (s, s)
    } else {
        (s.next_down(), s.next_up())
    }
}

/// Enclosure of `x^p` for `x >= 0`.
fn pow_bounds(x: f64, p: f64) -> (f64, f64) {
    if p == 0.0 || x == 1.0 {
        return (1.0, 1.0);
    }
    if p == 1.0 {
        return (x, x);
    }
    if x == 0.0 {
        let v = 0f64.powf(p);
        return (v, v);
    }
    if p == 2.0 {
        return mul_bounds(x, x);
    }
    let v = x.powf(p);
    (down_by(v, POW_ULPS).max(0.0), up_by(v, POW_ULPS))
}

impl Interval {
    /// # Panics
    /// If `lo > hi` or either end is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            self.lo + 0.5 * (self.hi - self.lo)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Range of `max(x, y)` over `x` in `self`, `y` in `other`.
    pub fn max(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    /// Range of `|x|`.
    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            Interval::new(-self.hi, -self.lo)
        } else {
            Interval::new(0.0, (-self.lo).max(self.hi))
        }
    }

    /// Range of `|x|^p` for `p >= 0`. The lower end is 0 when the interval
    /// straddles zero (and `p > 0`).
    ///
    /// # Panics
    /// If `p` is negative or NaN.
    pub fn abs_pow(&self, p: f64) -> Interval {
        assert!(p >= 0.0, "abs_pow needs a nonnegative exponent, got {p}");
        let a = self.abs();
        Interval::new(pow_bounds(a.lo, p).0, pow_bounds(a.hi, p).1)
    }

    /// Range of `x^p` for an interval with `lo >= 0`; `p` may be negative.
    pub fn powf(&self, p: f64) -> Interval {
        assert!(self.lo >= 0.0, "powf needs a nonnegative base");
        if p >= 0.0 {
            return self.abs_pow(p);
        }
        Interval::new(pow_bounds(self.hi, p).0, pow_bounds(self.lo, p).1)
    }

    pub fn sqr(&self) -> Interval {
        self.abs_pow(2.0)
    }

    /// # Panics
    /// If the interval has a negative part.
    pub fn sqrt(&self) -> Interval {
        assert!(self.lo >= 0.0, "sqrt of negative interval");
        let lo = self.lo.sqrt();
        let hi = self.hi.sqrt();
        let lo = if lo * lo == self.lo && lo.mul_add(lo, -self.lo) == 0.0 {
            lo
        } else {
            down_by(lo, POW_ULPS).max(0.0)
        };
        let hi = if hi * hi == self.hi && hi.mul_add(hi, -self.hi) == 0.0 {
            hi
        } else {
            up_by(hi, POW_ULPS)
        };
        Interval::new(lo, hi)
    }

    /// Splits at the midpoint. Returns `None` if the midpoint is not
    /// strictly inside.
    pub fn bisect(&self) -> Option<(Interval, Interval)> {
        let m = self.mid();
        if m > self.lo && m < self.hi {
            Some((Interval::new(self.lo, m), Interval::new(m, self.hi)))
        } else {
            None
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(add_bounds(self.lo, o.lo).0, add_bounds(self.hi, o.hi).1)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(add_bounds(self.lo, -o.hi).0, add_bounds(self.hi, -o.lo).1)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let cands = [
            mul_bounds(self.lo, o.lo),
            mul_bounds(self.lo, o.hi),
            mul_bounds(self.hi, o.lo),
            mul_bounds(self.hi, o.hi),
        ];
        let lo = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn exact_cases_stay_exact() {
        assert_eq!(iv(1.0, 2.0) + iv(-1.0, 3.0), iv(0.0, 5.0));
        assert_eq!(iv(1.0, 2.0) - iv(-1.0, 3.0), iv(-2.0, 3.0));
        assert_eq!(iv(-2.0, 3.0).abs_pow(2.0), iv(0.0, 9.0));
        assert_eq!(iv(-1.0, 2.0) * iv(3.0, 4.0), iv(-4.0, 8.0));
        assert_eq!(iv(4.0, 9.0).sqrt(), iv(2.0, 3.0));
    }

    #[test]
    fn fractional_power() {
        let r = iv(-2.0, -1.0).abs_pow(1.852);
        assert_eq!(r.lo, 1.0);
        assert!(r.contains(2f64.powf(1.852)));
        assert!((r.hi - 3.61000290984972).abs() < 1e-13);
    }

    #[test]
    fn inexact_results_are_widened() {
        let s = iv(0.1, 0.1) + iv(0.2, 0.2);
        assert!(s.lo < s.hi);
        assert!(s.contains(0.1 + 0.2));
        let p = iv(0.1, 0.1) * iv(3.0, 3.0);
        assert!(p.lo < p.hi && p.contains(0.1 * 3.0));
    }

    #[test]
    fn negative_power_reverses_ends() {
        let r = iv(0.25, 4.0).powf(-0.5);
        assert!(r.contains(0.5) && r.contains(2.0));
        assert!(r.hi < 2.0 + 1e-12);
    }

    #[test]
    fn bisect_degenerate() {
        assert!(iv(1.0, 1.0).bisect().is_none());
        assert!(iv(1.0, 1f64.next_up()).bisect().is_none());
        let (a, b) = iv(0.0, 2.0).bisect().unwrap();
        assert_eq!((a, b), (iv(0.0, 1.0), iv(1.0, 2.0)));
    }
}
