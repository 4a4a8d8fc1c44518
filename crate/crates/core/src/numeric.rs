//! Midpoint-radius reals backed by `dashu-float` balls.

use std::fmt;

use dashu_float::round::mode;
use dashu_float::{Ball, Context, FBig, Mag, Repr};
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;

pub const DEFAULT_PRECISION: usize = 128;

/// A real number known to lie within `radius` of a binary midpoint.
#[derive(Clone, Debug)]
pub struct Real {
    ball: Ball<2>,
    prec: usize,
}

fn ibig(n: &BigInt) -> IBig {
    IBig::from_le_bytes(&n.to_signed_bytes_le())
}

fn repr_of_f64(x: f64) -> Repr<2> {
    Repr::<2>::try_from(x).expect("finite float")
}

/// Smallest `Mag` not below `|x|`.
fn mag_of_f64(x: f64) -> Mag {
    if x.is_infinite() {
        return Mag::INFINITY;
    }
    Mag::from_repr(&repr_of_f64(x.abs()))
}

impl Real {
    pub fn from_int(n: &BigInt, prec: usize) -> Real {
        Real {
            ball: Ball::exact(Repr::new(ibig(n), 0)),
            prec,
        }
    }

    pub fn from_rational(q: &BigRational, prec: usize) -> Real {
        let num = Real::from_int(q.numer(), prec);
        if q.denom() == &BigInt::from(1) {
            return num;
        }
        num.div(&Real::from_int(q.denom(), prec))
    }

    pub fn from_f64(x: f64, prec: usize) -> Real {
        Real {
            ball: Ball::exact(repr_of_f64(x)),
            prec,
        }
    }

    pub fn one(prec: usize) -> Real {
        Real::from_f64(1.0, prec)
    }

    pub fn zero(prec: usize) -> Real {
        Real::from_f64(0.0, prec)
    }

    /// A ball covering the closed interval `[lo, hi]`.
    pub fn from_bounds(lo: f64, hi: f64, prec: usize) -> Real {
        debug_assert!(lo <= hi);
        let mid = lo + (hi - lo) / 2.0;
        let half = (hi - mid).max(mid - lo);
        let mut r = Real::from_f64(mid, prec);
        // covers the rounding of `mid` and `half`
        r.add_error(half * (1.0 + 1e-15) + f64::EPSILON * mid.abs());
        r
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    fn wrap(&self, ball: Result<Ball<2>, dashu_float::FpError>) -> Real {
        Real {
            ball: ball.expect("finite ball arithmetic"),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &Real) -> Real {
        self.wrap(self.ball.add(&other.ball, self.prec.max(other.prec)))
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.wrap(self.ball.sub(&other.ball, self.prec.max(other.prec)))
    }

    pub fn mul(&self, other: &Real) -> Real {
        self.wrap(self.ball.mul(&other.ball, self.prec.max(other.prec)))
    }

    pub fn div(&self, other: &Real) -> Real {
        self.wrap(self.ball.div(&other.ball, self.prec.max(other.prec)))
    }

    pub fn neg(&self) -> Real {
        Real {
            ball: -self.ball.clone(),
            prec: self.prec,
        }
    }

    pub fn mul_rational(&self, q: &BigRational) -> Real {
        self.mul(&Real::from_rational(q, self.prec))
    }

    /// Widens the radius by `err >= 0`.
    pub fn add_error(&mut self, err: f64) {
        self.ball.add_error(mag_of_f64(err));
    }

    pub fn is_exact(&self) -> bool {
        self.ball.rad.is_zero()
    }

    /// Midpoint rounded to the nearest `f64`.
    pub fn value(&self) -> f64 {
        FBig::<mode::HalfEven, 2>::from_repr_const(self.ball.mid.clone())
            .to_f64()
            .value()
    }

    /// Radius rounded up to an `f64`.
    pub fn radius(&self) -> f64 {
        let (_, rad) = self
            .ball
            .to_value_radius(&Context::<mode::Up>::new(self.prec));
        rad.to_f64().value()
    }

    pub fn lower(&self) -> f64 {
        let (mid, _) = self
            .ball
            .to_value_radius(&Context::<mode::Down>::new(self.prec));
        mid.to_f64().value() - self.radius()
    }

    pub fn upper(&self) -> f64 {
        let (mid, _) = self
            .ball
            .to_value_radius(&Context::<mode::Up>::new(self.prec));
        mid.to_f64().value() + self.radius()
    }

    /// Upper bound on `|x|`.
    pub fn abs_upper(&self) -> f64 {
        self.upper().abs().max(self.lower().abs())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    /// `exp(x)` by argument halving and a Taylor series with an explicit remainder.
    pub fn exp(&self) -> Real {
        let mut halvings = 0u32;
        let mut x = self.clone();
        let half = Real::from_f64(0.5, self.prec);
        while x.abs_upper() > 0.25 {
            x = x.mul(&half);
            halvings += 1;
        }
        let bound = x.abs_upper();
        let mut sum = Real::one(self.prec);
        let mut term = Real::one(self.prec);
        let mut n = 1u64;
        let eps = 2f64.powi(-(self.prec as i32));
        loop {
            term = term.mul(&x).div(&Real::from_int(&BigInt::from(n), self.prec));
            sum = sum.add(&term);
            n += 1;
            // tail after this term: at most |x|^n/n! · 1/(1 - |x|)
            let tail = term.abs_upper() * bound / (n as f64) / (1.0 - bound);
            if tail < eps || n > 400 {
                sum.add_error(tail);
                break;
            }
        }
        for _ in 0..halvings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.value(), self.radius())
    }
}
