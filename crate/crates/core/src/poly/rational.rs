use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Polynomial, Root};
use crate::error::{Error, Result};

/// Shared roots of numerator and denominator closer than
/// `PAIRING_TOL * (1 + |r|)` cancel during reduction.
pub const PAIRING_TOL: f64 = 1e-7;

/// Value of a rational map on the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MapValue {
    Finite(Complex64),
    Infinity,
}

impl MapValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            MapValue::Finite(z) => Some(z),
            MapValue::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MapValue::Infinity)
    }
}

/// `num / den`. After [`RationalMap::reduce`] the denominator is monic and
/// shares no root with the numerator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    reduced: bool,
}

impl RationalMap {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("denominator is the zero polynomial".into()));
        }
        Ok(RationalMap {
            num,
            den,
            reduced: false,
        })
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// `max(deg num, deg den)`.
    pub fn degree(&self) -> usize {
        self.num.deg().max(self.den.deg())
    }

    /// Cancels the common roots of numerator and denominator.
    ///
    /// Roots are paired greedily (closest first, respecting multiplicities).
    /// When something cancels, both sides are rebuilt from their remaining
    /// roots; otherwise the original coefficients are kept. The result is
    /// scaled so the denominator is monic.
    pub fn reduce(&self) -> Result<RationalMap> {
        let lead = self.den.leading();
        let num = self.num.scale(lead.inv());
        let den = self.den.scale(lead.inv());
        let done = |num, den| RationalMap {
            num,
            den,
            reduced: true,
        };
        if num.is_zero() {
            return Ok(done(
                Polynomial::zero(),
                Polynomial::constant(Complex64::new(1.0, 0.0)),
            ));
        }
        if num.deg() == 0 || den.deg() == 0 {
            return Ok(done(num, den));
        }

        let mut num_roots = num.roots()?;
        let mut den_roots = den.roots()?;
        let mut cancelled = false;
        for nr in num_roots.iter_mut() {
            while nr.multiplicity > 0 {
                let tol = PAIRING_TOL * (1.0 + nr.value.norm());
                let partner = den_roots
                    .iter_mut()
                    .filter(|dr| dr.multiplicity > 0 && (dr.value - nr.value).norm() < tol)
                    .min_by(|a, b| {
                        (a.value - nr.value)
                            .norm()
                            .total_cmp(&(b.value - nr.value).norm())
                    });
                match partner {
                    Some(dr) => {
                        let k = dr.multiplicity.min(nr.multiplicity);
                        dr.multiplicity -= k;
                        nr.multiplicity -= k;
                        cancelled = true;
                    }
                    None => break,
                }
            }
        }
        if !cancelled {
            return Ok(done(num, den));
        }
        let keep = |roots: Vec<Root>| -> Vec<Root> {
            roots.into_iter().filter(|r| r.multiplicity > 0).collect()
        };
        let num_rebuilt = Polynomial::from_roots(num.leading(), &keep(num_roots));
        let den_rebuilt = Polynomial::from_roots(Complex64::new(1.0, 0.0), &keep(den_roots));
        Ok(done(num_rebuilt, den_rebuilt))
    }

    /// Divides numerator and denominator by `(z - r)^k` for each `(r, k)`.
    /// The factors must be known to be shared; remainders are discarded.
    pub fn cancel_at(&self, factors: &[(Complex64, usize)]) -> RationalMap {
        let lead = self.den.leading();
        let mut num = self.num.scale(lead.inv());
        let mut den = self.den.scale(lead.inv());
        for &(r, k) in factors {
            for _ in 0..k.min(num.deg()).min(den.deg()) {
                num = num.deflate(r).0;
                den = den.deflate(r).0;
            }
        }
        if num.is_zero() {
            return RationalMap {
                num: Polynomial::zero(),
                den: Polynomial::constant(Complex64::new(1.0, 0.0)),
                reduced: true,
            };
        }
        let lead = den.leading();
        RationalMap {
            num: num.scale(lead.inv()),
            den: den.monic(),
            reduced: true,
        }
    }

    /// Evaluates the map with projective rescaling.
    ///
    /// For `|z| > 1` both polynomials are evaluated in reversed form at
    /// `1/z`, so huge arguments do not overflow. A denominator below its
    /// rounding-error bound counts as zero: the result is
    /// [`MapValue::Infinity`], or an error when the numerator vanishes too.
    pub fn eval(&self, z: Complex64) -> Result<MapValue> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite argument {z}")));
        }
        let (n, n_noise, d, d_noise, shift) = if z.norm() <= 1.0 {
            let (n, nn) = self.num.eval_with_noise(z);
            let (d, dn) = self.den.eval_with_noise(z);
            (n, nn, d, dn, 0)
        } else {
            let w = z.inv();
            let (n, nn) = self.num.eval_reversed_with_noise(w);
            let (d, dn) = self.den.eval_reversed_with_noise(w);
            (n, nn, d, dn, self.num.deg() as i32 - self.den.deg() as i32)
        };
        let den_zero = d.norm() <= d_noise;
        let num_zero = self.num.is_zero() || n.norm() <= n_noise;
        if den_zero {
            if num_zero {
                return Err(Error::Indeterminate { at: z });
            }
            return Ok(MapValue::Infinity);
        }
        let v = if shift == 0 { n / d } else { n / d * z.powi(shift) };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(MapValue::Finite(v))
        } else {
            Ok(MapValue::Infinity)
        }
    }

    /// Unit direction of `num(z) / den(z)`, meaningful even when the value
    /// itself overflows or the denominator rounds to zero.
    pub fn direction(&self, z: Complex64) -> Complex64 {
        let n = self.num.eval(z);
        let d = self.den.eval(z);
        let raw = if d.norm() > 0.0 { n * d.conj() } else { n };
        let r = raw.norm();
        if r > 0.0 && r.is_finite() {
            raw / r
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    /// Finite value or `None` at poles and indeterminate points.
    pub fn eval_finite(&self, z: Complex64) -> Option<Complex64> {
        self.eval(z).ok().and_then(MapValue::finite)
    }

    /// Poles with multiplicities (roots of the denominator).
    pub fn poles(&self) -> Result<Vec<Root>> {
        if self.den.deg() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }

    /// Largest relative disagreement `|f(z) - g(z)| / (1 + |g(z)|)` over
    /// `samples` seeded points in `|z| <= radius` where both are finite and
    /// the denominators of both exceed `den_floor` in modulus.
    pub fn max_disagreement(
        &self,
        other: &RationalMap,
        samples: usize,
        radius: f64,
        den_floor: f64,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut taken = 0;
        let mut attempts = 0;
        while taken < samples && attempts < 100 * samples {
            attempts += 1;
            let z = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
            let floor_a = den_floor * self.den.max_coeff_norm();
            let floor_b = den_floor * other.den.max_coeff_norm();
            if self.den.eval(z).norm() <= floor_a || other.den.eval(z).norm() <= floor_b {
                continue;
            }
            let (Some(a), Some(b)) = (self.eval_finite(z), other.eval_finite(z)) else {
                continue;
            };
            taken += 1;
            worst = worst.max((a - b).norm() / (1.0 + b.norm()));
        }
        worst
    }
}
