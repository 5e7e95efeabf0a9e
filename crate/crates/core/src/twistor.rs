//! Chart-level checks of the glued twistor construction: the hyperplane
//! frame V_j = ∂/∂v_j + q_j·∂/∂z, its pushforward under the gluing
//! identification (z, v) ~ (−z, v ± φ(z)), the involution matrix A(z), and
//! the bracket coefficient certifying maximal non-integrability.

use crate::series::{Parity, ParitySeries, SeriesError};
use num_complex::Complex64;
use thiserror::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Error)]
pub enum TwistorError {
    #[error("q polynomials must be even of degree at most two")]
    BadQuadratic,
    #[error("q polynomials share a zero and do not span the az²+b pencil")]
    DegenerateQuadratics,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Evaluation data at a point z: the even quadratic pair and the seed pair.
pub struct FramePoint<'a> {
    pub z: Complex64,
    pub q: (&'a ParitySeries, &'a ParitySeries),
    pub phi: (&'a ParitySeries, &'a ParitySeries),
}

impl<'a> FramePoint<'a> {
    pub fn new(
        z: Complex64,
        q: (&'a ParitySeries, &'a ParitySeries),
        phi: (&'a ParitySeries, &'a ParitySeries),
    ) -> Result<FramePoint<'a>, TwistorError> {
        for qi in [q.0, q.1] {
            if qi.parity() != Parity::Even || qi.truncation() > 2 {
                return Err(TwistorError::BadQuadratic);
            }
        }
        // az²+b spanning test: the coefficient matrix must be invertible.
        let det = q.0.coefficient(0) * q.1.coefficient(1) - q.1.coefficient(0) * q.0.coefficient(1);
        if det.norm() < 1e-14 {
            return Err(TwistorError::DegenerateQuadratics);
        }
        Ok(FramePoint { z, q, phi })
    }
}

/// The standard quadratic pair q₁ = z²+1, q₂ = i(z²−1).
pub fn standard_quadratics() -> (ParitySeries, ParitySeries) {
    let one = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    (
        ParitySeries::even(vec![one, one], 1e12),
        ParitySeries::even(vec![-i, i], 1e12),
    )
}

/// The matrix A(z) with Q(−z)·A(z) = D(z)·Q(z):
/// [[1 − q₁φ₁', −q₂φ₁'], [−q₁φ₂', 1 − q₂φ₂']]. When the seed satisfies
/// q₁φ₁' + q₂φ₂' = 2 it squares to the identity.
pub fn involution_matrix(fp: &FramePoint) -> Result<[[Complex64; 2]; 2], TwistorError> {
    let q1 = fp.q.0.eval(fp.z)?.value;
    let q2 = fp.q.1.eval(fp.z)?.value;
    let d1 = fp.phi.0.derivative().eval(fp.z)?.value;
    let d2 = fp.phi.1.derivative().eval(fp.z)?.value;
    let one = c(1.0);
    Ok([
        [one - q1 * d1, -q2 * d1],
        [-q1 * d2, one - q2 * d2],
    ])
}

pub fn mat2_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_det(a: &[[Complex64; 2]; 2]) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Deviation of a 2×2 matrix from the identity, entrywise max.
pub fn identity_defect(a: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { c(1.0) } else { Complex64::default() };
            worst = worst.max((a[i][j] - target).norm());
        }
    }
    worst
}

/// Orientation of the gluing identification: whether crossing adds or
/// subtracts the seed, (z, v) ~ (−z, v + φ(z)) or (z, v) ~ (−z, v − φ(z)).
/// The ∂/∂z-component of the pushed frame vanishes when the combination
/// q₁φ₁' + q₂φ₂' equals the labelled constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanConstant {
    /// Subtract-seed gluing; the pushforward stays in the span iff the
    /// combination is +2.
    PlusTwo,
    /// Add-seed gluing (the displayed identification); span membership
    /// requires the combination −2.
    MinusTwo,
}

impl SpanConstant {
    pub fn value(&self) -> f64 {
        match self {
            SpanConstant::PlusTwo => 2.0,
            SpanConstant::MinusTwo => -2.0,
        }
    }
}

/// Magnitude of the ∂/∂z-component of g_*(V₁) expressed in the frame
/// (V₁, V₂, ∂/∂z) at −z, for the gluing orientation labelled by `kappa`.
pub fn span_residual(fp: &FramePoint, kappa: SpanConstant) -> Result<f64, TwistorError> {
    let q1 = fp.q.0.eval(fp.z)?.value;
    let q2 = fp.q.1.eval(fp.z)?.value;
    let d1 = fp.phi.0.derivative().eval(fp.z)?.value;
    let d2 = fp.phi.1.derivative().eval(fp.z)?.value;
    // Seed sign carried by the identification.
    let sgn = match kappa {
        SpanConstant::MinusTwo => c(1.0),
        SpanConstant::PlusTwo => c(-1.0),
    };
    // g_*(∂/∂z) = −∂/∂z ± φ'·∂/∂v, g_*(∂/∂v_j) = ∂/∂v_j, so
    // g_*(V₁) = (1 ± q₁φ₁')∂/∂v₁ ± q₁φ₂'·∂/∂v₂ − q₁∂/∂z.
    let alpha = c(1.0) + sgn * q1 * d1;
    let beta = sgn * q1 * d2;
    // Express in V(−z)-basis using q(−z) = q(z): the ∂/∂z-component is
    // −q₁ − (α q₁ + β q₂).
    let gamma = -q1 - (alpha * q1 + beta * q2);
    Ok(gamma.norm())
}

/// q₁q₂' − q₂q₁', the ∂/∂z-coefficient of [V₁, V₂]. For the standard pair it
/// equals 4iz, vanishing only at z = 0 (and infinity): the distribution is
/// maximally non-integrable on the charts.
pub fn bracket_coefficient(
    q: (&ParitySeries, &ParitySeries),
    z: Complex64,
) -> Result<Complex64, TwistorError> {
    let q1 = q.0.eval(z)?.value;
    let q2 = q.1.eval(z)?.value;
    let d1 = q.0.derivative().eval(z)?.value;
    let d2 = q.1.derivative().eval(z)?.value;
    Ok(q1 * d2 - q2 * d1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{solve_ode_constant, solve_phi2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn linear_pair() -> (ParitySeries, ParitySeries) {
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = solve_phi2(&phi1, 12).unwrap();
        (phi1, phi2)
    }

    #[test]
    fn involution_matrix_reference_value() {
        let (q1, q2) = standard_quadratics();
        let (p1, p2) = linear_pair();
        let fp = FramePoint::new(cx(0.5, 0.0), (&q1, &q2), (&p1, &p2)).unwrap();
        let a = involution_matrix(&fp).unwrap();
        assert!((a[0][0] - cx(-0.25, 0.0)).norm() < 1e-14);
        assert!((a[0][1] - cx(0.0, 0.75)).norm() < 1e-14);
        assert!((a[1][0] - cx(0.0, -1.25)).norm() < 1e-14);
        assert!((a[1][1] - cx(0.25, 0.0)).norm() < 1e-14);
        let sq = mat2_mul(&a, &a);
        assert!(identity_defect(&sq) < 1e-14);
        assert!((mat2_det(&a) + cx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn involution_matrix_of_zero_seed_is_identity() {
        let (q1, q2) = standard_quadratics();
        let zero = ParitySeries::odd_real(&[0.0], 10.0);
        let fp = FramePoint::new(cx(0.3, 0.1), (&q1, &q2), (&zero, &zero)).unwrap();
        let a = involution_matrix(&fp).unwrap();
        assert!(identity_defect(&a) < 1e-15);
    }

    #[test]
    fn broken_seed_breaks_the_involution() {
        let (q1, q2) = standard_quadratics();
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = ParitySeries::odd(vec![cx(0.0, 1.0), cx(0.1, 0.0)], 10.0);
        let fp = FramePoint::new(cx(0.5, 0.0), (&q1, &q2), (&phi1, &phi2)).unwrap();
        let a = involution_matrix(&fp).unwrap();
        let sq = mat2_mul(&a, &a);
        assert!(identity_defect(&sq) > 1e-3);
    }

    #[test]
    fn involution_consistency_at_random_points() {
        // A(z)·A(−z) = 1 and det A = −1 wherever the seed satisfies the ODE.
        let (q1, q2) = standard_quadratics();
        let phi1 = ParitySeries::odd(vec![cx(1.0, 0.0), cx(0.2, 0.0)], 10.0);
        let phi2 = solve_phi2(&phi1, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let z = Complex64::from_polar(
                0.1 + 0.4 * rng.gen::<f64>(),
                std::f64::consts::TAU * rng.gen::<f64>(),
            );
            let fp = FramePoint::new(z, (&q1, &q2), (&phi1, &phi2)).unwrap();
            let a = involution_matrix(&fp).unwrap();
            let fm = FramePoint::new(-z, (&q1, &q2), (&phi1, &phi2)).unwrap();
            let am = involution_matrix(&fm).unwrap();
            assert!(identity_defect(&mat2_mul(&a, &am)) < 1e-10);
            assert!((mat2_det(&a) + cx(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn span_residual_vanishes_for_exactly_one_constant() {
        let (q1, q2) = standard_quadratics();
        let phi1 = ParitySeries::odd(vec![cx(0.9, 0.1), cx(-0.2, 0.0)], 10.0);
        for (kappa, other) in [
            (SpanConstant::PlusTwo, SpanConstant::MinusTwo),
            (SpanConstant::MinusTwo, SpanConstant::PlusTwo),
        ] {
            let phi2 =
                solve_ode_constant(&phi1, cx(kappa.value(), 0.0), 48).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            for _ in 0..20 {
                let z = Complex64::from_polar(
                    0.05 + 0.4 * rng.gen::<f64>(),
                    std::f64::consts::TAU * rng.gen::<f64>(),
                );
                let fp = FramePoint::new(z, (&q1, &q2), (&phi1, &phi2)).unwrap();
                assert!(span_residual(&fp, kappa).unwrap() < 1e-12);
                assert!(span_residual(&fp, other).unwrap() > 1e-2);
            }
        }
    }

    #[test]
    fn span_residual_of_zero_seed_is_twice_q1() {
        let (q1, q2) = standard_quadratics();
        let zero = ParitySeries::odd_real(&[0.0], 10.0);
        let z = cx(0.3, 0.0);
        let fp = FramePoint::new(z, (&q1, &q2), (&zero, &zero)).unwrap();
        let expect = 2.0 * q1.eval(z).unwrap().value.norm();
        for kappa in [SpanConstant::PlusTwo, SpanConstant::MinusTwo] {
            assert!((span_residual(&fp, kappa).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn span_residual_lower_bound_on_circle() {
        // For a +2-pinned seed probed with the wrong orientation the
        // residual is |q₁(z)|·|2 − (−2)| = 4|q₁| ≥ 4(1 − |z|²) on |z| = 0.3.
        let (q1, q2) = standard_quadratics();
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = solve_phi2(&phi1, 12).unwrap();
        for k in 0..12 {
            let z = Complex64::from_polar(0.3, std::f64::consts::TAU * k as f64 / 12.0);
            let fp = FramePoint::new(z, (&q1, &q2), (&phi1, &phi2)).unwrap();
            assert!(span_residual(&fp, SpanConstant::MinusTwo).unwrap() > 1e-2);
        }
    }

    #[test]
    fn bracket_coefficient_reference_values() {
        let (q1, q2) = standard_quadratics();
        let b = bracket_coefficient((&q1, &q2), cx(1.0, 0.0)).unwrap();
        assert!((b - cx(0.0, 4.0)).norm() < 1e-14);
        let b0 = bracket_coefficient((&q1, &q2), cx(0.0, 0.0)).unwrap();
        assert!(b0.norm() < 1e-15);
        // Equal quadratics collapse the bracket everywhere.
        let b_eq = bracket_coefficient((&q1, &q1), cx(0.7, 0.2)).unwrap();
        assert!(b_eq.norm() < 1e-15);
    }

    #[test]
    fn bracket_coefficient_fits_a_linear_odd_function() {
        let (q1, q2) = standard_quadratics();
        let mut num = Complex64::default();
        let mut den = 0.0;
        let mut samples = Vec::new();
        for k in 0..16 {
            let z = Complex64::from_polar(0.4, std::f64::consts::TAU * k as f64 / 16.0);
            let b = bracket_coefficient((&q1, &q2), z).unwrap();
            num += b * z.conj();
            den += z.norm_sqr();
            samples.push((z, b));
        }
        let slope = num / den;
        assert!((slope - cx(0.0, 4.0)).norm() < 1e-12);
        for (z, b) in samples {
            assert!((b - slope * z).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_quadratics_are_rejected() {
        let (q1, _) = standard_quadratics();
        let zero = ParitySeries::odd_real(&[0.0], 10.0);
        let q1b = q1.clone();
        assert!(matches!(
            FramePoint::new(cx(0.1, 0.0), (&q1, &q1b), (&zero, &zero)),
            Err(TwistorError::DegenerateQuadratics)
        ));
        let odd = ParitySeries::odd_real(&[1.0], 10.0);
        assert!(matches!(
            FramePoint::new(cx(0.1, 0.0), (&odd, &q1), (&zero, &zero)),
            Err(TwistorError::BadQuadratic)
        ));
    }
}
