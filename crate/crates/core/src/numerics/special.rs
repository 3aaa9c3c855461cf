use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;
use std::ops::{Add, Div, Mul, Neg, Sub};

// Lanczos approximation, g = 7, n = 9.

/// A real number stored as `sign * exp(log_magnitude)`.
///
/// A zero sign means the value is exactly zero whatever `log_magnitude` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSignedReal {
    log_magnitude: f64,
    sign: i8,
}

impl LogSignedReal {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: Self = Self {
        log_magnitude: 0.0,
        sign: 1,
    };

    pub fn new(log_magnitude: f64, sign: i8) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            Self {
                log_magnitude,
                sign: sign.signum(),
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(x.abs().ln(), if x > 0.0 { 1 } else { -1 })
        }
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        Self::new(self.log_magnitude * f64::from(n), sign)
    }

    /// `self^(p)` for a non-negative value and real exponent.
    pub fn powf_abs(self, p: f64) -> Self {
        if self.sign == 0 {
            return Self::ZERO;
        }
        Self::new(self.log_magnitude * p, 1)
    }
}

impl Add for LogSignedReal {
    type Output = Self;
    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.log_magnitude - big.log_magnitude).exp();
        let scale = if big.sign == small.sign {
            1.0 + ratio
        } else {
            1.0 - ratio
        };
        if scale == 0.0 {
            Self::ZERO
        } else {
            Self::new(big.log_magnitude + scale.ln(), big.sign)
        }
    }
}

impl Sub for LogSignedReal {
    type Output = Self;
    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl Mul for LogSignedReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            Self::ZERO
        } else {
            Self::new(self.log_magnitude + rhs.log_magnitude, self.sign * rhs.sign)
        }
    }
}

impl Div for LogSignedReal {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.sign != 0, "division by an exact zero");
        if self.sign == 0 {
            Self::ZERO
        } else {
            Self::new(self.log_magnitude - rhs.log_magnitude, self.sign * rhs.sign)
        }
    }
}

impl Neg for LogSignedReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            log_magnitude: self.log_magnitude,
            sign: -self.sign,
        }
    }
}

fn is_nonpositive_integer(z: f64) -> bool {
    z <= 0.0 && z.fract() == 0.0
}

/// `sin(pi z)` with exact zeros at the integers.
fn sin_pi(z: f64) -> f64 {
    if z.fract() == 0.0 {
        return 0.0;
    }
    // reduce to [-1, 1]
    let r = z - 2.0 * (z / 2.0).round();
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

/// `(ln |Gamma(z)|, sign Gamma(z))`. At the poles the magnitude is `+inf` and the sign `0`.
pub fn ln_abs_gamma(z: f64) -> (f64, i8) {
    if is_nonpositive_integer(z) {
        return (f64::INFINITY, 0);
    }
    if z >= 0.5 {
        (ln_gamma(z), 1)
    } else {
        // Gamma(z) = pi / (sin(pi z) Gamma(1 - z)), with Gamma(1 - z) > 0 here.
        let s = sin_pi(z);
        let value = PI.ln() - s.abs().ln() - ln_gamma(1.0 - z);
        (value, if s > 0.0 { 1 } else { -1 })
    }
}

/// `1 / Gamma(z)` in log-signed form; exactly zero at the poles of Gamma.
pub fn reciprocal_gamma_log(z: f64) -> LogSignedReal {
    match ln_abs_gamma(z) {
        (_, 0) => LogSignedReal::ZERO,
        (ln, sign) => LogSignedReal::new(-ln, sign),
    }
}

/// `1 / Gamma(z)`, a total function with exact zeros at non-positive integers.
pub fn reciprocal_gamma(z: f64) -> f64 {
    if !z.is_finite() {
        return f64::NAN;
    }
    if is_nonpositive_integer(z) {
        return 0.0;
    }
    if z >= 0.5 {
        return (-ln_gamma(z)).exp();
    }
    // reflection: 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
    sin_pi(z) * ln_gamma(1.0 - z).exp() / PI
}
