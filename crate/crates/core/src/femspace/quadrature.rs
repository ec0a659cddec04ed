//! Gauss–Legendre rules on [0, 1] and collapsed (Duffy) product rules on
//! the reference triangle.

use std::sync::OnceLock;

/// Gauss–Legendre rule with `n` points on [0, 1]; weights sum to 1.
#[derive(Clone, Debug)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(n: usize) -> LineRule {
        assert!(n > 0);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = ((i as f64 + 0.75) / (n as f64 + 0.5) * std::f64::consts::PI).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        LineRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Rule on the reference triangle with barycentric points; weights sum to ½.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl TriangleRule {
    /// Collapsed Gauss product rule exact for total degree `order`.
    pub fn collapsed(order: usize) -> TriangleRule {
        let n = order / 2 + 1;
        let line = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in line.iter() {
            for (v, wv) in line.iter() {
                let x = u;
                let y = v * (1.0 - u);
                points.push([1.0 - x - y, x, y]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

const MAX_ORDER: usize = 16;

/// Shared triangle rule of exactness degree `order` (≤ 16).
pub fn triangle_rule(order: usize) -> &'static TriangleRule {
    static RULES: [OnceLock<TriangleRule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    assert!(order <= MAX_ORDER, "quadrature order {order} not supported");
    RULES[order].get_or_init(|| TriangleRule::collapsed(order))
}

/// Shared Gauss rule on [0, 1] exact for degree `order`.
pub fn line_rule(order: usize) -> &'static LineRule {
    static RULES: [OnceLock<LineRule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    assert!(order <= MAX_ORDER, "quadrature order {order} not supported");
    RULES[order].get_or_init(|| LineRule::gauss(order / 2 + 1))
}

/// Order used for non-polynomial integrands and everything feeding the
/// equilibration.
pub const NONLINEAR_ORDER: usize = 8;
/// Order used for polynomial integrands of degree ≤ 4.
pub const POLY_ORDER: usize = 4;

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn gauss_points_match_known_values() {
        let r = LineRule::gauss(2);
        let d = 0.5 / 3f64.sqrt();
        assert!((r.points[0] - (0.5 - d)).abs() < 1e-15);
        assert!((r.points[1] - (0.5 + d)).abs() < 1e-15);
        assert!((r.weights[0] - 0.5).abs() < 1e-15);
        let r = LineRule::gauss(3);
        assert!((r.points[1] - 0.5).abs() < 1e-15);
        assert!((r.weights[1] - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn line_rule_exactness() {
        for n in 1..8 {
            let r = LineRule::gauss(n);
            for k in 0..2 * n {
                let q: f64 = r.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = 1.0 / (k as f64 + 1.0);
                assert!((q - exact).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        // ∫_T x^a y^b = a! b! / (a + b + 2)!
        for order in [2, 4, 8] {
            let r = triangle_rule(order);
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            for a in 0..=order {
                for b in 0..=order - a {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = factorial(a as u32) * factorial(b as u32) / factorial((a + b + 2) as u32);
                    assert!((q - exact).abs() <= 1e-14 * exact.max(1e-3), "order={order} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn points_inside_reference_triangle() {
        for p in &triangle_rule(8).points {
            assert!(p.iter().all(|&l| l > 0.0 && l < 1.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
