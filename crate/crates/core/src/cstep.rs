//! Complex-step differentiation for holomorphic functions of a complex
//! variable.
//!
//! The classical complex step `f'(x) = Im f(x + ih) / h` needs `f` real on
//! the real line. For functions that are already complex we add a second
//! imaginary unit `j` (with `j² = -1`, commuting with `i`) and evaluate
//! `f(z + jh)`. The `j` part of the result is `h f'(z) + O(h³)` with no
//! subtraction anywhere, so `h = 1e-100` gives the derivative to machine
//! precision.
//!
//! Code that needs derivatives is written once against [`Scalar`] and run
//! with either [`C64`] or [`Bicomplex`].

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::C64;

/// Step used by [`derivative`].
pub const STEP: f64 = 1e-100;

/// Field operations and the few transcendental functions the kernels use.
pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c(c: C64) -> Self;
    /// The ordinary complex value, dropping any perturbation.
    fn primal(self) -> C64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;

    fn zero() -> Self {
        Self::from_c(C64::new(0.0, 0.0))
    }

    fn one() -> Self {
        Self::from_c(C64::new(1.0, 0.0))
    }

    fn scale(self, c: C64) -> Self {
        self * Self::from_c(c)
    }
}

impl Scalar for C64 {
    fn from_c(c: C64) -> Self {
        c
    }
    fn primal(self) -> C64 {
        self
    }
    fn sin(self) -> Self {
        C64::sin(self)
    }
    fn cos(self) -> Self {
        C64::cos(self)
    }
    fn exp(self) -> Self {
        C64::exp(self)
    }
    fn scale(self, c: C64) -> Self {
        self * c
    }
}

/// `a + j b` with `a, b` complex and `j² = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bicomplex {
    pub a: C64,
    pub b: C64,
}

impl Bicomplex {
    pub fn new(a: C64, b: C64) -> Self {
        Self { a, b }
    }
}

impl Add for Bicomplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Bicomplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl Mul for Bicomplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.a * o.a - self.b * o.b, self.a * o.b + self.b * o.a)
    }
}

impl Div for Bicomplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        // (a + jb)(c - jd) / (c² + d²)
        let den = o.a * o.a + o.b * o.b;
        Self::new(
            (self.a * o.a + self.b * o.b) / den,
            (self.b * o.a - self.a * o.b) / den,
        )
    }
}

impl Neg for Bicomplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Scalar for Bicomplex {
    fn from_c(c: C64) -> Self {
        Self::new(c, C64::new(0.0, 0.0))
    }
    fn primal(self) -> C64 {
        self.a
    }
    fn sin(self) -> Self {
        // cos(jb) = cosh(b), sin(jb) = j sinh(b)
        Self::new(self.a.sin() * self.b.cosh(), self.a.cos() * self.b.sinh())
    }
    fn cos(self) -> Self {
        Self::new(self.a.cos() * self.b.cosh(), -(self.a.sin() * self.b.sinh()))
    }
    fn exp(self) -> Self {
        let e = self.a.exp();
        Self::new(e * self.b.cos(), e * self.b.sin())
    }
    fn scale(self, c: C64) -> Self {
        Self::new(self.a * c, self.b * c)
    }
}

/// Derivative of a holomorphic scalar function by bicomplex step.
pub fn derivative(f: impl Fn(Bicomplex) -> Bicomplex, z: C64) -> C64 {
    f(perturbed(z)).b / STEP
}

/// Derivative of a holomorphic vector-valued function, componentwise.
pub fn derivative_vec(f: impl Fn(Bicomplex) -> Vec<Bicomplex>, z: C64) -> Vec<C64> {
    f(perturbed(z)).into_iter().map(|w| w.b / STEP).collect()
}

/// `z + j·STEP`.
pub fn perturbed(z: C64) -> Bicomplex {
    Bicomplex::new(z, C64::new(STEP, 0.0))
}
