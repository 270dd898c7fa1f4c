//! Affine conjugation: centroids, normalization and numerical checks of
//! `T^{-1} ∘ F_p ∘ T = F_{λ p∘T}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::method::{build, MethodKind};
use crate::poly::{Polynomial, CLUSTER_TOL};
use crate::symmetry::SymmetryGroup;

/// Samples with `|den(z)|` at or below this are skipped by
/// [`conjugacy_residual`].
pub const POLE_GUARD: f64 = 1e-3;

/// `z ↦ a z + b` with `a ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AffineMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl AffineMap {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if a.norm() == 0.0 || !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::InvalidInput(format!("affine map needs a finite nonzero slope, got a = {a}")));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity() -> Self {
        AffineMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn translation(b: Complex64) -> Self {
        AffineMap {
            a: Complex64::new(1.0, 0.0),
            b,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.a.inv();
        AffineMap { a: inv, b: -self.b * inv }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            a: self.a * other.a,
            b: self.a * other.b + self.b,
        }
    }
}

/// `-a_{d-1} / (d a_d)`, the mean of the roots.
pub fn centroid(p: &Polynomial) -> Result<Complex64> {
    let d = p.deg();
    if d == 0 {
        return Err(Error::InvalidInput("centroid needs degree at least 1".into()));
    }
    // adding zero turns -0.0 into 0.0
    Ok(-p.coeff(d - 1) / (p.leading() * d as f64) + Complex64::new(0.0, 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationResult {
    /// Monic and centered.
    pub g: Polynomial,
    #[serde(rename = "T")]
    pub t: AffineMap,
    pub lambda: Complex64,
}

/// `g = λ p∘T` with `T(z) = z + centroid(p)` and `λ = 1 / a_d`.
pub fn normalize(p: &Polynomial) -> Result<NormalizationResult> {
    if p.deg() < 2 {
        return Err(Error::InvalidInput("normalization needs degree at least 2".into()));
    }
    let t = AffineMap::translation(centroid(p)?);
    let lambda = p.leading().inv();
    let mut coeffs = p.compose_affine(t.a, t.b).scale(lambda).coeffs().to_vec();
    let d = coeffs.len() - 1;
    coeffs[d] = Complex64::new(1.0, 0.0);
    coeffs[d - 1] = Complex64::new(0.0, 0.0);
    Ok(NormalizationResult {
        g: Polynomial::new(coeffs),
        t,
        lambda,
    })
}

/// Largest relative gap `|T^{-1}(F_p(T z)) - F_g(z)| / (1 + |F_g(z)|)` with
/// `g = λ p∘T`, over `samples` seeded points of the disk of radius
/// `2 (1 + cauchy bound of g)`, skipping points where the denominator of
/// `F_g` is at most [`POLE_GUARD`].
pub fn conjugacy_residual(
    p: &Polynomial,
    t: &AffineMap,
    lambda: Complex64,
    samples: usize,
    kind: MethodKind,
    seed: u64,
) -> Result<f64> {
    if lambda.norm() == 0.0 {
        return Err(Error::InvalidInput("lambda must be nonzero".into()));
    }
    AffineMap::new(t.a, t.b)?;
    let g = p.compose_affine(t.a, t.b).scale(lambda);
    let fp = build(kind, p)?;
    let fg = build(kind, &g)?;
    let lead = g.leading();
    let bound = 1.0
        + g.coeffs()[..g.deg()]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let radius = 2.0 * bound;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    let mut attempts = 0;
    while points.len() < samples && attempts < 100 * samples.max(1) {
        attempts += 1;
        let z = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() > radius || fg.map.den().eval(z).norm() <= POLE_GUARD {
            continue;
        }
        points.push(z);
    }
    if points.is_empty() {
        return Err(Error::Numeric("no sample point clears the pole guard".into()));
    }
    let t_inv = t.inverse();
    let worst = points
        .par_iter()
        .map(|&z| {
            let (Some(lhs), Some(rhs)) = (fp.map.eval_finite(t.apply(z)), fg.map.eval_finite(z)) else {
                return 0.0;
            };
            (t_inv.apply(lhs) - rhs).norm() / (1.0 + rhs.norm())
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Moves the roots `r1, r2` of `p` to `1` and `-1`:
/// `T(z) = (r1 - r2)/2 z + (r1 + r2)/2`, `g = p∘T`.
pub fn two_roots_to_pm1(p: &Polynomial, r1: Complex64, r2: Complex64) -> Result<(Polynomial, AffineMap)> {
    if (r1 - r2).norm() <= CLUSTER_TOL * (1.0 + r1.norm().max(r2.norm())) {
        return Err(Error::InvalidInput("the two roots must be distinct".into()));
    }
    let roots = p.roots()?;
    for r in [r1, r2] {
        if !roots
            .iter()
            .any(|x| (x.value - r).norm() < CLUSTER_TOL * (1.0 + r.norm()))
        {
            return Err(Error::InvalidInput(format!("{r} is not a root of {p}")));
        }
    }
    let t = AffineMap::new((r1 - r2) / 2.0, (r1 + r2) / 2.0)?;
    Ok((p.compose_affine(t.a, t.b), t))
}

/// The group conjugated by `T`: `T ∘ σ ∘ T^{-1}` for each rotation `σ`,
/// i.e. the same order about `T(center)`.
pub fn symmetry_transport(group: &SymmetryGroup, t: &AffineMap) -> SymmetryGroup {
    SymmetryGroup::new(t.apply(group.center), group.order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Root;
    use proptest::prelude::*;

    fn real(c: &[f64]) -> Polynomial {
        Polynomial::from_real(c)
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_poly_close(p: &Polynomial, q: &Polynomial, rel: f64) {
        let scale = q.max_coeff_norm();
        for j in 0..=p.deg().max(q.deg()) {
            assert!((p.coeff(j) - q.coeff(j)).norm() <= rel * scale, "{p} vs {q}");
        }
    }

    #[test]
    fn affine_algebra() {
        let t = AffineMap::new(cx(2.0, 1.0), cx(-1.0, 3.0)).unwrap();
        let z = cx(0.3, -0.7);
        assert!((t.inverse().apply(t.apply(z)) - z).norm() < 1e-15);
        let u = AffineMap::new(cx(0.0, 1.0), cx(2.0, 0.0)).unwrap();
        assert!((t.compose(&u).apply(z) - t.apply(u.apply(z))).norm() < 1e-14);
        assert!(AffineMap::new(cx(0.0, 0.0), cx(1.0, 0.0)).is_err());
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid(&real(&[-1.0, 0.0, 1.0])).unwrap(), cx(0.0, 0.0));
        assert_eq!(centroid(&real(&[0.0, 0.0, -3.0, 1.0])).unwrap(), cx(1.0, 0.0));
        // mean of roots counted with multiplicity: (2·1 + 1·(-1)) / 3
        let p = Polynomial::from_roots(cx(1.0, 0.0), &[Root::new(cx(1.0, 0.0), 2), Root::new(cx(-1.0, 0.0), 1)]);
        assert!((centroid(&p).unwrap() - cx(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let c = centroid(&Polynomial::from_roots(cx(1.0, 0.0), &[Root::new(cx(1.0, 0.0), 1), Root::new(cx(-1.0, 0.0), 2)]))
            .unwrap();
        assert!((c - cx(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(centroid(&real(&[3.0])).is_err());
    }

    #[test]
    fn normalize_examples() {
        let n = normalize(&real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_poly_close(&n.g, &real(&[-1.0, 0.0, 1.0]), 1e-15);
        assert_eq!(n.t, AffineMap::identity());

        // 2 (z - 1)(z + 3) = 2 z^2 + 4 z - 6
        let n = normalize(&real(&[-6.0, 4.0, 2.0])).unwrap();
        assert_poly_close(&n.g, &real(&[-4.0, 0.0, 1.0]), 1e-12);
        assert!((n.t.b - cx(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(n.lambda, cx(0.5, 0.0));

        let n = normalize(&real(&[0.0, 0.0, -3.0, 1.0])).unwrap();
        assert_poly_close(&n.g, &real(&[-2.0, -3.0, 0.0, 1.0]), 1e-12);
        assert_eq!(n.t.b, cx(1.0, 0.0));
    }

    #[test]
    fn residual_examples() {
        let t = AffineMap::new(cx(2.0, 0.0), cx(1.0, 0.0)).unwrap();
        let p = real(&[-1.0, 0.0, 1.0]);
        for kind in [MethodKind::Chebyshev, MethodKind::Newton] {
            assert!(conjugacy_residual(&p, &t, cx(3.0, 0.0), 100, kind, 1).unwrap() < 1e-9);
        }
        let t = AffineMap::new(cx(0.0, 1.0), cx(-2.0, 0.0)).unwrap();
        let p = real(&[0.0, -1.0, 0.0, 0.0, 1.0]);
        for kind in [MethodKind::Chebyshev, MethodKind::Newton] {
            assert!(conjugacy_residual(&p, &t, cx(0.5, 0.0), 100, kind, 2).unwrap() < 1e-9);
        }
        assert!(conjugacy_residual(&p, &t, cx(0.0, 0.0), 10, MethodKind::Chebyshev, 0).is_err());
    }

    #[test]
    fn two_roots_examples() {
        let (g, _) = two_roots_to_pm1(&real(&[8.0, -6.0, 1.0]), cx(2.0, 0.0), cx(4.0, 0.0)).unwrap();
        assert!(g.eval(cx(1.0, 0.0)).norm() < 1e-12 && g.eval(cx(-1.0, 0.0)).norm() < 1e-12);
        let p = Polynomial::new(vec![cx(0.0, 0.0), cx(0.0, -2.0), cx(1.0, 0.0)]);
        let (g, _) = two_roots_to_pm1(&p, cx(0.0, 0.0), cx(0.0, 2.0)).unwrap();
        assert!(g.eval(cx(1.0, 0.0)).norm() < 1e-12 && g.eval(cx(-1.0, 0.0)).norm() < 1e-12);
        assert!(two_roots_to_pm1(&p, cx(0.0, 0.0), cx(0.0, 0.0)).is_err());
        assert!(two_roots_to_pm1(&p, cx(0.0, 0.0), cx(5.0, 0.0)).is_err());
    }

    #[test]
    fn transport_examples() {
        let g = symmetry_transport(&SymmetryGroup::new(cx(0.0, 0.0), 3), &AffineMap::translation(cx(1.0, 0.0)));
        assert_eq!((g.center, g.order), (cx(1.0, 0.0), 3));
        let g = symmetry_transport(&SymmetryGroup::new(cx(0.0, 0.0), 1), &AffineMap::translation(cx(1.0, 0.0)));
        assert!(g.trivial);
        let t = AffineMap::new(cx(2.0, 0.0), cx(0.0, 1.0)).unwrap();
        let g = symmetry_transport(&SymmetryGroup::new(cx(0.0, 0.0), 2), &t);
        assert_eq!((g.center, g.order), (cx(0.0, 1.0), 2));
    }

    fn arb_c() -> impl Strategy<Value = Complex64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| cx(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn conjugacy_residual_vanishes(
            roots in prop::collection::vec(arb_c(), 2..=5),
            lead in arb_c(),
            a_mod in 0.5..2.0f64,
            a_arg in 0.0..std::f64::consts::TAU,
            b in arb_c(),
            lambda in arb_c(),
        ) {
            prop_assume!(lead.norm() > 0.2 && lambda.norm() > 0.2);
            let rs: Vec<Root> = roots.iter().map(|&r| Root::simple(r)).collect();
            let p = Polynomial::from_roots(lead, &rs);
            prop_assume!(!crate::method::is_affine_monomial(&p));
            let t = AffineMap::new(Complex64::from_polar(a_mod, a_arg), b).unwrap();
            for kind in [MethodKind::Chebyshev, MethodKind::Newton] {
                let r = conjugacy_residual(&p, &t, lambda, 100, kind, 7).unwrap();
                prop_assert!(r < 1e-9, "{kind} residual {r}");
            }
        }

        #[test]
        fn normalize_is_idempotent(roots in prop::collection::vec(arb_c(), 2..=6), lead in arb_c()) {
            prop_assume!(lead.norm() > 0.2);
            let rs: Vec<Root> = roots.iter().map(|&r| Root::simple(r)).collect();
            let p = Polynomial::from_roots(lead, &rs);
            let once = normalize(&p).unwrap();
            let twice = normalize(&once.g).unwrap();
            let scale = once.g.max_coeff_norm();
            for j in 0..=once.g.deg() {
                prop_assert!((once.g.coeff(j) - twice.g.coeff(j)).norm() <= 1e-12 * scale);
            }
            // g = λ p∘T coefficient-wise
            let direct = p.compose_affine(once.t.a, once.t.b).scale(once.lambda);
            let scale = direct.max_coeff_norm();
            for j in 0..=direct.deg() {
                prop_assert!((once.g.coeff(j) - direct.coeff(j)).norm() <= 1e-10 * scale);
            }
        }

        #[test]
        fn centroid_is_equivariant(
            roots in prop::collection::vec(arb_c(), 2..=6),
            a in arb_c(),
            b in arb_c(),
            lambda in arb_c(),
        ) {
            prop_assume!(a.norm() > 0.2 && lambda.norm() > 0.2);
            let rs: Vec<Root> = roots.iter().map(|&r| Root::simple(r)).collect();
            let p = Polynomial::from_roots(cx(1.0, 0.0), &rs);
            let t = AffineMap::new(a, b).unwrap();
            let g = p.compose_affine(a, b).scale(lambda);
            let expect = t.inverse().apply(centroid(&p).unwrap());
            prop_assert!((centroid(&g).unwrap() - expect).norm() < 1e-9 * (1.0 + expect.norm()));
        }
    }
}
