//! Complex polynomial algebra.
//!
//! Coefficients are stored low-to-high: `coeffs[j]` multiplies `z^j`. Every
//! constructor and arithmetic operation trims leading coefficients that are
//! numerically zero (at most `TRIM_REL` times the largest coefficient), so a
//! nonzero [`Polynomial`] always has a nonzero leading coefficient.

mod rational;
mod roots;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use rational::{MapValue, RationalMap, PAIRING_TOL};
pub use roots::{find_roots, reconstruction_residual, RootFinder, CLUSTER_TOL};

/// Relative threshold below which a leading coefficient counts as zero.
pub const TRIM_REL: f64 = 1e-12;

/// A root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl Root {
    pub fn new(value: Complex64, multiplicity: usize) -> Self {
        Root {
            value,
            multiplicity,
        }
    }

    pub fn simple(value: Complex64) -> Self {
        Root::new(value, 1)
    }
}

/// Serializes as the low-to-high coefficient list.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial from low-to-high coefficients, trimming
    /// numerically-zero leading terms.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `c * z^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    /// `z - r`
    pub fn linear_factor(r: Complex64) -> Self {
        Polynomial::new(vec![-r, Complex64::new(1.0, 0.0)])
    }

    /// Expands `leading * prod (z - r)^m`.
    pub fn from_roots(leading: Complex64, roots: &[Root]) -> Self {
        let mut coeffs = vec![leading];
        for root in roots {
            for _ in 0..root.multiplicity {
                coeffs.push(Complex64::new(0.0, 0.0));
                for j in (1..coeffs.len()).rev() {
                    coeffs[j] = coeffs[j - 1] - root.value * coeffs[j];
                }
                coeffs[0] = -root.value * coeffs[0];
            }
        }
        Polynomial::new(coeffs)
    }

    fn trim(&mut self) {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 || !max.is_finite() {
            if max == 0.0 {
                self.coeffs.clear();
            }
            return;
        }
        while let Some(last) = self.coeffs.last() {
            if last.norm() <= TRIM_REL * max {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs
            .last()
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs
            .get(j)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// Horner evaluation that reports overflow instead of returning a
    /// non-finite value.
    pub fn eval_checked(&self, z: Complex64) -> Result<Complex64> {
        let v = self.eval(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { at: z })
        }
    }

    /// Horner evaluation together with a bound on its rounding error.
    pub fn eval_with_noise(&self, z: Complex64) -> (Complex64, f64) {
        let r = z.norm();
        let mut v = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for a in self.coeffs.iter().rev() {
            v = v * z + a;
            s = s * r + a.norm();
        }
        (v, noise_factor(self.deg()) * s)
    }

    /// Evaluates `z^d p(1/z)` at `w`, i.e. the coefficient-reversed
    /// polynomial, with its rounding-error bound.
    pub fn eval_reversed_with_noise(&self, w: Complex64) -> (Complex64, f64) {
        let r = w.norm();
        let mut v = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for a in self.coeffs.iter() {
            v = v * w + a;
            s = s * r + a.norm();
        }
        (v, noise_factor(self.deg()) * s)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &a)| a * j as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Polynomial {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, lambda: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&a| a * lambda).collect())
    }

    pub fn scale_real(&self, lambda: f64) -> Polynomial {
        self.scale(Complex64::new(lambda, 0.0))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|j| self.coeff(j) + other.coeff(j)).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|j| self.coeff(j) - other.coeff(j)).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        (0..k).fold(Polynomial::constant(Complex64::new(1.0, 0.0)), |acc, _| {
            acc.mul(self)
        })
    }

    /// `p(a z + b)`.
    pub fn compose_affine(&self, a: Complex64, b: Complex64) -> Polynomial {
        let inner = Polynomial::new(vec![b, a]);
        self.coeffs.iter().rev().fold(Polynomial::zero(), |acc, &c| {
            acc.mul(&inner).add(&Polynomial::constant(c))
        })
    }

    /// Synthetic division by `z - r`: returns the quotient and `p(r)`.
    pub fn deflate(&self, r: Complex64) -> (Polynomial, Complex64) {
        if self.coeffs.len() <= 1 {
            return (Polynomial::zero(), self.coeff(0));
        }
        let mut q = vec![Complex64::new(0.0, 0.0); self.coeffs.len() - 1];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (0..self.coeffs.len()).rev() {
            acc = acc * r + self.coeffs[j];
            if j > 0 {
                q[j - 1] = acc;
            }
        }
        (Polynomial::new(q), acc)
    }

    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        self.scale(self.leading().inv())
    }

    /// True when all coefficients below the leading one are numerically zero
    /// relative to the largest coefficient.
    pub fn is_monomial(&self) -> bool {
        match self.degree() {
            None => false,
            Some(d) => {
                let max = self.max_coeff_norm();
                self.coeffs[..d].iter().all(|c| c.norm() <= 1e-10 * max)
            }
        }
    }

    /// Roots with multiplicities.
    pub fn roots(&self) -> Result<Vec<Root>> {
        find_roots(self)
    }
}

fn noise_factor(degree: usize) -> f64 {
    4.0 * (2 * degree + 1) as f64 * f64::EPSILON
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::sub(self, rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale_real(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            match j {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{j}")?,
            }
        }
        Ok(())
    }
}

/// A polynomial given as `leading * prod (z - r)^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredPolynomial {
    pub leading: Complex64,
    pub roots: Vec<Root>,
}

impl FactoredPolynomial {
    pub fn new(leading: Complex64, roots: Vec<Root>) -> Result<Self> {
        if leading.norm() == 0.0 {
            return Err(Error::InvalidInput("leading coefficient must be nonzero".into()));
        }
        if roots.iter().any(|r| r.multiplicity == 0) {
            return Err(Error::InvalidInput("root multiplicities must be positive".into()));
        }
        Ok(FactoredPolynomial { leading, roots })
    }

    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn expand(&self) -> Polynomial {
        Polynomial::from_roots(self.leading, &self.roots)
    }
}
