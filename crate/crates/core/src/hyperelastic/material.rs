//! Neo-Hookean stored energy and first Piola–Kirchhoff stress.

use crate::error::{Error, Result};
use crate::Mat2;

/// Shear modulus μ and Lamé parameter λ (`None` for the incompressible
/// limit λ = ∞).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub mu: f64,
    pub lambda: Option<f64>,
}

impl Material {
    pub fn new(mu: f64, lambda: Option<f64>) -> Result<Material> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidInput(format!("shear modulus must be positive, got {mu}")));
        }
        if let Some(l) = lambda {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidInput(format!("lambda must be positive and finite, got {l}")));
            }
        }
        Ok(Material { mu, lambda })
    }

    pub fn incompressible(mu: f64) -> Material {
        Material { mu, lambda: None }
    }

    pub fn compressible(mu: f64, lambda: f64) -> Material {
        Material { mu, lambda: Some(lambda) }
    }

    /// 1/λ, zero in the incompressible limit.
    pub fn inv_lambda(&self) -> f64 {
        self.lambda.map_or(0.0, |l| 1.0 / l)
    }

    fn finite_lambda(&self) -> Result<f64> {
        self.lambda.ok_or_else(|| Error::InvalidInput("displacement-only law needs a finite lambda".into()))
    }
}

fn inverse_transpose(f: &Mat2, det: f64) -> Mat2 {
    Mat2::new(f[(1, 1)], -f[(1, 0)], -f[(0, 1)], f[(0, 0)]) / det
}

fn positive_det(f: &Mat2) -> Result<f64> {
    let det = f.determinant();
    if det > 0.0 {
        Ok(det)
    } else {
        Err(Error::NonpositiveDet { element: None, det })
    }
}

/// ψ(B) = ½ (μ tr B + λ/2 det B − (μ + λ/2) ln det B).
pub fn energy_nh(b: &Mat2, mat: &Material) -> Result<f64> {
    let lambda = mat.finite_lambda()?;
    let det = b.determinant();
    if det <= 0.0 {
        return Err(Error::NonpositiveDet { element: None, det });
    }
    Ok(0.5 * (mat.mu * b.trace() + 0.5 * lambda * det - (mat.mu + 0.5 * lambda) * det.ln()))
}

/// P(F) = μ F + (λ/2 (det B − 1) − μ) F⁻ᵀ.
pub fn piola_stress(f: &Mat2, mat: &Material) -> Result<Mat2> {
    let lambda = mat.finite_lambda()?;
    let det = positive_det(f)?;
    let fit = inverse_transpose(f, det);
    Ok(f * mat.mu + fit * (0.5 * lambda * (det * det - 1.0) - mat.mu))
}

/// P(F, p) = μ F + (p (1 + p/(2λ)) − μ) F⁻ᵀ.
pub fn piola_stress_pressure(f: &Mat2, p: f64, mat: &Material) -> Result<Mat2> {
    let det = positive_det(f)?;
    Ok(stress_unchecked(f, det, p, mat))
}

pub(crate) fn stress_unchecked(f: &Mat2, det: f64, p: f64, mat: &Material) -> Mat2 {
    let fit = inverse_transpose(f, det);
    f * mat.mu + fit * (p * (1.0 + 0.5 * p * mat.inv_lambda()) - mat.mu)
}

/// Linearisation of P(F, p) in the direction (dH, dp).
pub fn stress_tangent(f: &Mat2, p: f64, dh: &Mat2, dp: f64, mat: &Material) -> Result<Mat2> {
    let det = positive_det(f)?;
    let fit = inverse_transpose(f, det);
    Ok(tangent_unchecked(&fit, p, dh, dp, mat))
}

pub(crate) fn tangent_unchecked(fit: &Mat2, p: f64, dh: &Mat2, dp: f64, mat: &Material) -> Mat2 {
    let il = mat.inv_lambda();
    let d_fit = -(fit * dh.transpose() * fit);
    dh * mat.mu + fit * ((1.0 + p * il) * dp) + d_fit * (p * (1.0 + 0.5 * p * il) - mat.mu)
}

/// F⁻ᵀ and det F, or an error for det F ≤ 0.
pub fn kinematics(f: &Mat2) -> Result<(Mat2, f64)> {
    let det = positive_det(f)?;
    Ok((inverse_transpose(f, det), det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_f(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
        Mat2::identity() + Mat2::new(a, b, c, d) * 0.3
    }

    #[test]
    fn energy_at_identity() {
        let mat = Material::compressible(1.0, 2.0);
        assert!((energy_nh(&Mat2::identity(), &mat).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn stress_free_reference() {
        let mat = Material::compressible(1.3, 4.0);
        assert!(piola_stress(&Mat2::identity(), &mat).unwrap().norm() < 1e-15);
        assert!(piola_stress_pressure(&Mat2::identity(), 0.0, &Material::incompressible(1.0)).unwrap().norm() == 0.0);
    }

    #[test]
    fn isochoric_stretch() {
        let f = Mat2::new(2.0, 0.0, 0.0, 0.5);
        for lambda in [0.5, 3.0, 100.0] {
            let p = piola_stress(&f, &Material::compressible(1.0, lambda)).unwrap();
            assert!((p - Mat2::new(1.5, 0.0, 0.0, -1.5)).norm() < 1e-14);
        }
    }

    #[test]
    fn incompressible_pressure_at_identity() {
        let p = piola_stress_pressure(&Mat2::identity(), 3.0, &Material::incompressible(1.0)).unwrap();
        assert!((p - Mat2::identity() * 3.0).norm() < 1e-15);
    }

    #[test]
    fn rejects_inverted_deformation() {
        let f = Mat2::new(-1.0, 0.0, 0.0, 1.0);
        assert!(matches!(piola_stress(&f, &Material::compressible(1.0, 1.0)), Err(Error::NonpositiveDet { .. })));
        assert!(matches!(
            piola_stress_pressure(&f, 0.0, &Material::incompressible(1.0)),
            Err(Error::NonpositiveDet { .. })
        ));
    }

    #[test]
    fn energy_gradient_is_stress() {
        // ∂ψ(F Fᵀ)/∂F by central differences; error is O(h²)
        let mat = Material::compressible(1.0, 2.5);
        let f = Mat2::new(1.2, 0.3, -0.1, 0.9);
        let p = piola_stress(&f, &mat).unwrap();
        let mut prev = f64::MAX;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let mut err: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let mut e = Mat2::zeros();
                    e[(i, j)] = h;
                    let psi = |g: Mat2| energy_nh(&(g * g.transpose()), &mat).unwrap();
                    let d = (psi(f + e) - psi(f - e)) / (2.0 * h);
                    err = err.max((d - p[(i, j)]).abs());
                }
            }
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn small_strain_limit_is_second_order() {
        let mat = Material::compressible(1.0, 3.0);
        let dir = Mat2::new(0.3, -0.7, 0.4, 0.2);
        let mut errs = Vec::new();
        for eps in [1e-2, 5e-3, 2.5e-3, 1.25e-3] {
            let h = dir * eps;
            let p = piola_stress(&(Mat2::identity() + h), &mat).unwrap();
            let lin = (h + h.transpose()) * mat.mu + Mat2::identity() * (3.0 * h.trace());
            errs.push((p - lin).norm());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    proptest! {
        #[test]
        fn pressure_form_matches_displacement_form(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64, lambda in 0.1..50.0f64) {
            let f = random_f(a, b, c, d);
            let mat = Material::compressible(1.0, lambda);
            let p = lambda * (f.determinant() - 1.0);
            let lhs = piola_stress(&f, &mat).unwrap();
            let rhs = piola_stress_pressure(&f, p, &mat).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }

        #[test]
        fn tangent_matches_finite_differences(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64,
                                               p in -2.0..2.0f64, h1 in -1.0..1.0f64, h2 in -1.0..1.0f64, dp in -1.0..1.0f64) {
            let f = random_f(a, b, c, d);
            let dh = Mat2::new(h1, h2, h2 - h1, 0.5);
            for mat in [Material::incompressible(1.0), Material::compressible(2.0, 5.0)] {
                let t = stress_tangent(&f, p, &dh, dp, &mat).unwrap();
                let e = 1e-6;
                let fd = (piola_stress_pressure(&(f + dh * e), p + dp * e, &mat).unwrap()
                    - piola_stress_pressure(&(f - dh * e), p - dp * e, &mat).unwrap()) / (2.0 * e);
                prop_assert!((t - fd).norm() <= 1e-6 * t.norm().max(1.0));
            }
        }

        #[test]
        fn stress_times_ft_is_symmetric(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64, p in -2.0..2.0f64) {
            let f = random_f(a, b, c, d);
            let s = piola_stress_pressure(&f, p, &Material::incompressible(1.0)).unwrap() * f.transpose();
            prop_assert!((s[(0, 1)] - s[(1, 0)]).abs() < 1e-13);
        }
    }
}
