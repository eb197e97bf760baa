//! Gauss rules on the reference triangle and the unit segment, and the P1
//! Lagrange basis.

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Points are reference coordinates: `(xi, eta)` in the triangle
/// `(0,0), (1,0), (0,1)`, or `(t, 0)` on `[0, 1]` for segment rules.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Triangle rule exact for total degree `order` (1 to 5). Weights sum to 1/2.
pub fn triangle_rule(order: usize) -> Result<QuadRule> {
    match order {
        1 => Ok(QuadRule { points: vec![[1.0 / 3.0, 1.0 / 3.0]], weights: vec![0.5] }),
        2 => {
            let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
            Ok(QuadRule {
                points: vec![[a, a], [b, a], [a, b]],
                weights: vec![1.0 / 6.0; 3],
            })
        }
        // Radon's 7-point degree-5 rule; all weights positive.
        3..=5 => {
            let s15 = 15f64.sqrt();
            let a1 = (6.0 - s15) / 21.0;
            let a2 = (6.0 + s15) / 21.0;
            let w1 = (155.0 - s15) / 2400.0;
            let w2 = (155.0 + s15) / 2400.0;
            let mut points = vec![[1.0 / 3.0, 1.0 / 3.0]];
            let mut weights = vec![9.0 / 80.0];
            for (a, w) in [(a1, w1), (a2, w2)] {
                let b = 1.0 - 2.0 * a;
                points.extend([[a, a], [b, a], [a, b]]);
                weights.extend([w; 3]);
            }
            Ok(QuadRule { points, weights })
        }
        _ => Err(Error::UnsupportedOrder(order)),
    }
}

/// Gauss-Legendre rule on `[0, 1]` exact for polynomials of degree `order`.
pub fn segment_rule(order: usize) -> QuadRule {
    let n = order / 2 + 1;
    let (nodes, weights) = gauss_legendre(n);
    QuadRule {
        points: nodes.iter().map(|&x| [0.5 * (x + 1.0), 0.0]).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
    }
}

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Linear Lagrange basis on the reference triangle.
#[derive(Debug, Clone, Copy, Default)]
pub struct P1Basis;

impl P1Basis {
    pub const N_LOCAL: usize = 3;

    /// Shape function values and reference gradients at `xi`.
    pub fn eval_basis(&self, xi: [f64; 2]) -> ([f64; 3], [Vector2<f64>; 3]) {
        (self.values(xi), self.reference_gradients())
    }

    pub fn values(&self, xi: [f64; 2]) -> [f64; 3] {
        [1.0 - xi[0] - xi[1], xi[0], xi[1]]
    }

    pub fn reference_gradients(&self) -> [Vector2<f64>; 3] {
        [Vector2::new(-1.0, -1.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of `x^p y^q` over the reference triangle.
    fn monomial_integral(p: u32, q: u32) -> f64 {
        factorial(p) * factorial(q) / factorial(p + q + 2)
    }

    fn integrate(rule: &QuadRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        rule.iter().map(|(x, w)| w * f(x[0], x[1])).sum()
    }

    #[test]
    fn midpoint_rule() {
        let r = triangle_rule(1).unwrap();
        assert_eq!(r.points, vec![[1.0 / 3.0, 1.0 / 3.0]]);
        assert_eq!(r.weights, vec![0.5]);
        assert_relative_eq!(integrate(&r, |x, _| x), 1.0 / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn x2y2_needs_order_four() {
        assert_relative_eq!(monomial_integral(2, 2), 1.0 / 180.0, max_relative = 1e-15);
        for order in 4..=5 {
            let r = triangle_rule(order).unwrap();
            assert_relative_eq!(
                integrate(&r, |x, y| x * x * y * y),
                1.0 / 180.0,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn all_monomials_up_to_order() {
        for order in 1..=5 {
            let r = triangle_rule(order).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 0.5, max_relative = 1e-15);
            for p in 0..=order as u32 {
                for q in 0..=(order as u32 - p) {
                    let got = integrate(&r, |x, y| x.powi(p as i32) * y.powi(q as i32));
                    assert_relative_eq!(got, monomial_integral(p, q), max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        assert_eq!(triangle_rule(0), Err(Error::UnsupportedOrder(0)));
        assert_eq!(triangle_rule(6), Err(Error::UnsupportedOrder(6)));
    }

    #[test]
    fn segment_rules() {
        let r = segment_rule(1);
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r.points[0][0], 0.5);
        assert_relative_eq!(r.weights[0], 1.0);

        let r2 = segment_rule(3);
        assert_eq!(r2.len(), 2);
        let got: f64 = r2.iter().map(|(t, w)| w * t[0] * t[0]).sum();
        assert_relative_eq!(got, 1.0 / 3.0, max_relative = 1e-15);

        let r3 = segment_rule(5);
        assert_eq!(r3.len(), 3);
        let got: f64 = r3.iter().map(|(t, w)| w * t[0].powi(5)).sum();
        assert_relative_eq!(got, 1.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn high_order_segment_rules() {
        for order in 0..=19 {
            let r = segment_rule(order);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for p in 0..=order as i32 {
                let got: f64 = r.iter().map(|(t, w)| w * t[0].powi(p)).sum();
                assert_relative_eq!(got, 1.0 / (p as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn basis_values() {
        let b = P1Basis;
        let (v, g) = b.eval_basis([1.0 / 3.0, 1.0 / 3.0]);
        for vi in v {
            assert_relative_eq!(vi, 1.0 / 3.0, max_relative = 1e-15);
        }
        assert_eq!(b.values([0.0, 0.0]), [1.0, 0.0, 0.0]);
        assert_eq!(b.values([1.0, 0.0]), [0.0, 1.0, 0.0]);
        assert_eq!(b.values([0.0, 1.0]), [0.0, 0.0, 1.0]);
        assert_eq!(g[0], Vector2::new(-1.0, -1.0));
        assert_eq!(g[1], Vector2::new(1.0, 0.0));
        assert_eq!(g[2], Vector2::new(0.0, 1.0));
    }

    #[test]
    fn affine_interpolant_has_exact_gradient() {
        use crate::mesh::{ElementGeometry, Point2};
        let geo = ElementGeometry::from_vertices([
            Point2::new(0.3, -0.2),
            Point2::new(1.7, 0.4),
            Point2::new(0.1, 1.3),
        ]);
        let f = |p: Point2| 2.5 * p.x - 0.75 * p.y + 1.0;
        let map = geo.gradient_map();
        let grad: Vector2<f64> = P1Basis
            .reference_gradients()
            .iter()
            .zip(geo.vertices)
            .map(|(g, v)| map * g * f(v))
            .sum();
        assert_relative_eq!(grad, Vector2::new(2.5, -0.75), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn random_polynomials_integrated_exactly(
            order in 1usize..=5,
            coeffs in proptest::collection::vec(-10.0f64..10.0, 21),
        ) {
            let r = triangle_rule(order).unwrap();
            let mut terms = Vec::new();
            for p in 0..=order as u32 {
                for q in 0..=(order as u32 - p) {
                    terms.push((p, q));
                }
            }
            let exact: f64 = terms.iter().zip(&coeffs).map(|(&(p, q), c)| c * monomial_integral(p, q)).sum();
            let scale: f64 = terms.iter().zip(&coeffs).map(|(&(p, q), c)| c.abs() * monomial_integral(p, q)).sum();
            let got = integrate(&r, |x, y| {
                terms.iter().zip(&coeffs).map(|(&(p, q), c)| c * x.powi(p as i32) * y.powi(q as i32)).sum()
            });
            prop_assert!((got - exact).abs() <= 1e-13 * scale.max(1e-300));
        }

        #[test]
        fn partition_of_unity(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let (x, y) = if x + y > 1.0 { (1.0 - x, 1.0 - y) } else { (x, y) };
            let (v, g) = P1Basis.eval_basis([x, y]);
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let gs: Vector2<f64> = g.iter().sum();
            prop_assert!(gs.norm() == 0.0);
        }
    }
}
