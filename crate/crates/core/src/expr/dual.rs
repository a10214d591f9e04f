use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value paired with its first derivative with respect to the single variable.
///
/// Arithmetic follows the sum, product, quotient and chain rules, so evaluating
/// an expression on `DualValue::variable(x)` yields `(f(x), f'(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub derivative: f64,
}

impl DualValue {
    pub fn new(value: f64, derivative: f64) -> Self {
        DualValue { value, derivative }
    }

    pub fn constant(value: f64) -> Self {
        DualValue::new(value, 0.0)
    }

    /// The independent variable at `x` (derivative seed 1).
    pub fn variable(x: f64) -> Self {
        DualValue::new(x, 1.0)
    }

    fn chain(self, value: f64, outer_derivative: f64) -> Self {
        DualValue::new(value, outer_derivative * self.derivative)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }

    pub fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    /// `|u|` with the convention `abs'(0) = 0`.
    pub fn abs(self) -> Self {
        let slope = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.value.abs(), slope)
    }

    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }

    /// Integer power by repeated squaring; the derivative is `n u^(n-1) u'`.
    pub fn powi(self, n: i64) -> Self {
        let value = powi_exact(self.value, n);
        if n == 0 {
            return DualValue::constant(value);
        }
        self.chain(value, n as f64 * powi_exact(self.value, n - 1))
    }

    /// General power `u^v` for `u > 0`.
    pub fn powf(self, exponent: DualValue) -> Self {
        let value = self.value.powf(exponent.value);
        let derivative = value
            * (exponent.derivative * self.value.ln()
                + exponent.value * self.derivative / self.value);
        DualValue::new(value, derivative)
    }
}

/// `x^n` by binary exponentiation, so small integer powers are computed with
/// plain multiplications instead of `exp(n ln x)`.
pub fn powi_exact(x: f64, n: i64) -> f64 {
    let mut exp = n.unsigned_abs();
    let mut base = x;
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        exp >>= 1;
        if exp > 0 {
            base *= base;
        }
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}

impl Add for DualValue {
    type Output = DualValue;
    fn add(self, rhs: DualValue) -> DualValue {
        DualValue::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl Sub for DualValue {
    type Output = DualValue;
    fn sub(self, rhs: DualValue) -> DualValue {
        DualValue::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl Mul for DualValue {
    type Output = DualValue;
    fn mul(self, rhs: DualValue) -> DualValue {
        DualValue::new(
            self.value * rhs.value,
            self.derivative * rhs.value + self.value * rhs.derivative,
        )
    }
}

impl Div for DualValue {
    type Output = DualValue;
    fn div(self, rhs: DualValue) -> DualValue {
        let value = self.value / rhs.value;
        DualValue::new(
            value,
            (self.derivative - value * rhs.derivative) / rhs.value,
        )
    }
}

impl Neg for DualValue {
    type Output = DualValue;
    fn neg(self) -> DualValue {
        DualValue::new(-self.value, -self.derivative)
    }
}
