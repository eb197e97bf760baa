//! Manufactured solutions, discretization errors and convergence orders.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::assembly::{element_dofs, Field, Space};
use crate::cut::{interface_quadrature, Side};
use crate::mesh::{ElementGeometry, Mesh, Point2};
use crate::quadrature::{segment_rule, triangle_rule, P1Basis, QuadRule};

type ScalarFn = Arc<dyn Fn(Side, &Point2) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Side, &Point2) -> Vector2<f64> + Send + Sync>;

/// Exact solution with per-domain branches, its gradient and the source
/// `f = -alpha Laplace(u)`. Fitted solutions ignore the side argument.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub alpha: [f64; 2],
    u: ScalarFn,
    grad: VectorFn,
    f: ScalarFn,
}

impl fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedSolution").field("alpha", &self.alpha).finish_non_exhaustive()
    }
}

impl ManufacturedSolution {
    pub fn new(
        alpha: [f64; 2],
        u: impl Fn(Side, &Point2) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Side, &Point2) -> Vector2<f64> + Send + Sync + 'static,
        f: impl Fn(Side, &Point2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { alpha, u: Arc::new(u), grad: Arc::new(grad), f: Arc::new(f) }
    }

    pub fn u(&self, side: Side, p: &Point2) -> f64 {
        (self.u)(side, p)
    }

    pub fn grad(&self, side: Side, p: &Point2) -> Vector2<f64> {
        (self.grad)(side, p)
    }

    pub fn f(&self, side: Side, p: &Point2) -> f64 {
        (self.f)(side, p)
    }

    pub fn source_field(&self) -> Field {
        self.f.clone()
    }

    /// Boundary data: the trace of the exact solution.
    pub fn dirichlet_field(&self) -> Field {
        self.u.clone()
    }
}

/// Two-phase solution with a kink across `||x||_4 = 1` for
/// `(alpha_1, alpha_2) = (1, 2)`:
/// `u_1 = 1 + pi/2 - sqrt(2) cos(pi/4 s)` with `s = x^4 + y^4`, and
/// `u_2 = pi/2 ||x||_4`.
pub fn kink_solution() -> ManufacturedSolution {
    let alpha = [1.0, 2.0];
    let u = |side: Side, p: &Point2| {
        let s = p.x.powi(4) + p.y.powi(4);
        match side {
            Side::Neg => 1.0 + FRAC_PI_2 - SQRT_2 * (FRAC_PI_4 * s).cos(),
            Side::Pos => FRAC_PI_2 * s.powf(0.25),
        }
    };
    let grad = |side: Side, p: &Point2| {
        let s = p.x.powi(4) + p.y.powi(4);
        let cubes = Vector2::new(p.x.powi(3), p.y.powi(3));
        match side {
            Side::Neg => cubes * (SQRT_2 * PI * (FRAC_PI_4 * s).sin()),
            Side::Pos => {
                let r = s.powf(0.25);
                assert!(r > 0.0, "outer branch evaluated at the origin");
                cubes * (FRAC_PI_2 / r.powi(3))
            }
        }
    };
    let f = move |side: Side, p: &Point2| {
        let s = p.x.powi(4) + p.y.powi(4);
        let sq = p.x * p.x + p.y * p.y;
        let six = p.x.powi(6) + p.y.powi(6);
        let laplacian = match side {
            Side::Neg => SQRT_2 * PI * (PI * (FRAC_PI_4 * s).cos() * six + 3.0 * (FRAC_PI_4 * s).sin() * sq),
            Side::Pos => {
                let r = s.powf(0.25);
                assert!(r > 0.0, "outer branch evaluated at the origin");
                1.5 * PI * (sq / r.powi(3) - six / r.powi(7))
            }
        };
        -alpha[side.index()] * laplacian
    };
    ManufacturedSolution::new(alpha, u, grad, f)
}

/// `sin(pi x) sin(pi y)` on the unit square with `f = 2 pi^2 u`, `g = 0`.
pub fn smooth_fitted_solution() -> ManufacturedSolution {
    ManufacturedSolution::new(
        [1.0, 1.0],
        |_, p| (PI * p.x).sin() * (PI * p.y).sin(),
        |_, p| {
            Vector2::new(
                PI * (PI * p.x).cos() * (PI * p.y).sin(),
                PI * (PI * p.x).sin() * (PI * p.y).cos(),
            )
        },
        |_, p| 2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin(),
    )
}

/// `u = c0 + c1 x + c2 y` with `f = 0`.
pub fn affine_solution(c: [f64; 3]) -> ManufacturedSolution {
    ManufacturedSolution::new(
        [1.0, 1.0],
        move |_, p| c[0] + c[1] * p.x + c[2] * p.y,
        move |_, _| Vector2::new(c[1], c[2]),
        |_, _| 0.0,
    )
}

/// Piecewise affine solution across the line `x = x0` (domain 1 on the
/// left) with continuous value and flux: `u_i = (x - x0)/alpha_i + t y + c`.
pub fn planar_interface_solution(alpha: [f64; 2], x0: f64, tangential: f64, offset: f64) -> ManufacturedSolution {
    ManufacturedSolution::new(
        alpha,
        move |side, p| (p.x - x0) / alpha[side.index()] + tangential * p.y + offset,
        move |side, _| Vector2::new(1.0 / alpha[side.index()], tangential),
        |_, _| 0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l2: f64,
    pub h1_broken: f64,
    pub jump_l2_gamma: f64,
    pub n_dofs: usize,
    pub h: f64,
}

/// Errors of the finite element function with coefficients `x` against
/// `exact`. Each sub-triangle is compared with the exact branch of its own
/// side. The jump norm is `||u_h1 - u_h2||` over the reconstructed interface.
pub fn error_norms(mesh: &Mesh, space: Space<'_>, x: &[f64], exact: &ManufacturedSolution) -> ErrorReport {
    error_norms_with(mesh, space, x, exact, &triangle_rule(5).expect("order 5"), &segment_rule(5))
}

pub fn error_norms_with(
    mesh: &Mesh,
    space: Space<'_>,
    x: &[f64],
    exact: &ManufacturedSolution,
    volume: &QuadRule,
    facet: &QuadRule,
) -> ErrorReport {
    assert_eq!(x.len(), space.n_dofs(), "coefficient vector does not match the space");
    let basis = P1Basis;
    let (mut l2, mut h1, mut jump) = (0.0, 0.0, 0.0);
    for t in 0..mesh.n_triangles() {
        let geo = mesh.element_geometry(t);
        let map = geo.gradient_map();
        let grads = basis.reference_gradients().map(|g| map * g);
        let dofs = element_dofs(space, t);
        let regions: Vec<(Side, Vec<[Point2; 3]>)> = match space {
            Space::Fitted(_) => vec![(Side::Neg, vec![geo.vertices])],
            Space::Unfitted { cuts, .. } => cuts[t]
                .sides()
                .iter()
                .map(|&s| (s, cuts[t].sub_triangles(s).to_vec()))
                .collect(),
        };
        for (k, (side, tris)) in regions.iter().enumerate() {
            let coeffs = [x[dofs[3 * k]], x[dofs[3 * k + 1]], x[dofs[3 * k + 2]]];
            let grad_h: Vector2<f64> = (0..3).map(|i| grads[i] * coeffs[i]).sum();
            for tri in tris {
                let sub = ElementGeometry::from_vertices(*tri);
                for (xi, w) in volume.iter() {
                    let p = sub.to_physical(xi);
                    let phi = basis.values(geo.to_reference(&p));
                    let uh: f64 = (0..3).map(|i| phi[i] * coeffs[i]).sum();
                    let wq = w * 2.0 * sub.area;
                    l2 += wq * (uh - exact.u(*side, &p)).powi(2);
                    h1 += wq * (grad_h - exact.grad(*side, &p)).norm_squared();
                }
            }
        }
        if let Space::Unfitted { cuts, .. } = space {
            if cuts[t].is_cut() {
                for qp in interface_quadrature(&cuts[t], facet).expect("cut element") {
                    let phi = basis.values(geo.to_reference(&qp.point));
                    let u1: f64 = (0..3).map(|i| phi[i] * x[dofs[i]]).sum();
                    let u2: f64 = (0..3).map(|i| phi[i] * x[dofs[3 + i]]).sum();
                    jump += qp.weight * (u1 - u2).powi(2);
                }
            }
        }
    }
    ErrorReport {
        l2: l2.sqrt(),
        h1_broken: h1.sqrt(),
        jump_l2_gamma: jump.sqrt(),
        n_dofs: space.n_dofs(),
        h: mesh.h,
    }
}

/// Orders `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` between consecutive
/// levels (`log2` of the error ratio under halving). `None` where either
/// error is zero.
pub fn eoc(levels: &[(f64, f64)]) -> Vec<Option<f64>> {
    levels
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            (e0 > 0.0 && e1 > 0.0).then(|| (e0 / e1).ln() / (h0 / h1).ln())
        })
        .collect()
}
