//! Element kernels and global assembly for the symmetric Nitsche forms
//!
//! ```text
//! A(u, v) = a(u, v) + N^c(u, v) + N^c(v, u) + N^s(u, v)
//! ```
//!
//! with either the classical penalty `N^s = lambda N^s_1` or the lifted
//! stabilization `N^s = 2 a(L u, L v) + N^s_1`.
//!
//! Local matrices use row = test function, column = trial function, so the
//! consistency matrix is `(N_c)_ij = N^c(phi_j, phi_i)`. On cut elements the
//! six local unknowns are ordered `[side 1 (v0, v1, v2), side 2 (v0, v1, v2)]`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3x2, Vector2};

use crate::cut::{interface_quadrature, CutInfo, Side};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{ElementGeometry, Mesh, Point2};
use crate::quadrature::{segment_rule, triangle_rule, P1Basis, QuadRule};
use crate::spaces::{CutDofMap, DofMap};

/// Scalar data depending on the sub-domain (`Side::Neg` for fitted problems).
pub type Field = Arc<dyn Fn(Side, &Point2) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Method {
    Classical { lambda: f64 },
    ParameterFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ProblemKind {
    FittedPoisson,
    UnfittedInterface,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Diffusion coefficients `(alpha_1, alpha_2)`; `alpha_1` is used for
    /// fitted problems.
    pub alpha: [f64; 2],
    pub method: Method,
    pub source: Field,
    /// Dirichlet data on the outer boundary.
    pub dirichlet: Field,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("method", &self.method)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, alpha: [f64; 2], method: Method, source: Field, dirichlet: Field) -> Result<Self> {
        if !alpha.iter().all(|&a| a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("diffusion coefficients must be positive, got {alpha:?}")));
        }
        if let Method::Classical { lambda } = method {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidArgument(format!("penalty parameter must be positive, got {lambda}")));
            }
        }
        Ok(Self { kind, alpha, method, source, dirichlet })
    }

    pub fn with_method(&self, method: Method) -> Result<Self> {
        Self::new(self.kind, self.alpha, method, self.source.clone(), self.dirichlet.clone())
    }
}

/// Quadrature rules used by the kernels.
#[derive(Debug, Clone)]
pub struct Rules {
    pub volume: QuadRule,
    pub rhs: QuadRule,
    pub facet: QuadRule,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            volume: triangle_rule(2).expect("order 2"),
            rhs: triangle_rule(3).expect("order 3"),
            facet: segment_rule(5),
        }
    }
}

/// The discrete space an assembly runs over.
#[derive(Debug, Clone, Copy)]
pub enum Space<'a> {
    Fitted(&'a DofMap),
    Unfitted { dofs: &'a CutDofMap, cuts: &'a [CutInfo] },
}

impl Space<'_> {
    pub fn n_dofs(&self) -> usize {
        match self {
            Space::Fitted(d) => d.n_dofs,
            Space::Unfitted { dofs, .. } => dofs.n_dofs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Local matrices of one element. `k`, `l` and `s` are zero on elements
/// that carry no boundary or interface part.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub a: DMatrix<f64>,
    pub nc: DMatrix<f64>,
    /// Unit penalty `(1/h) (u, v)` on the boundary, or `(1/h) ([[u]], [[v]])`
    /// on the interface.
    pub ns1: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// Weight of `ns1` in the parameter-free method.
    pub penalty_weight: f64,
    pub participates: bool,
}

impl ElementMatrices {
    /// `A + N_c + N_c^T + N^s` for the given method.
    pub fn system_matrix(&self, method: Method) -> DMatrix<f64> {
        let base = &self.a + &self.nc + self.nc.transpose();
        match method {
            Method::Classical { lambda } => base + &self.ns1 * lambda,
            Method::ParameterFree => base + &self.s + &self.ns1 * self.penalty_weight,
        }
    }
}

/// Physical gradients of the three P1 shape functions, as rows.
fn physical_gradients(geo: &ElementGeometry, basis: &P1Basis) -> Matrix3x2<f64> {
    let map = geo.gradient_map();
    let g = basis.reference_gradients().map(|g| map * g);
    Matrix3x2::from_rows(&[g[0].transpose(), g[1].transpose(), g[2].transpose()])
}

fn stiffness(grads: &Matrix3x2<f64>, area: f64) -> DMatrix<f64> {
    let k = grads * grads.transpose() * area;
    DMatrix::from_fn(3, 3, |i, j| k[(i, j)])
}

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Stiffness, consistency and unit penalty on a fitted element. Only the
/// local edges listed in `boundary_edges` contribute to `nc` and `ns1`.
pub fn fitted_element_forms(
    geo: &ElementGeometry,
    boundary_edges: &[usize],
    h: f64,
    basis: &P1Basis,
    rules: &Rules,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let grads = physical_gradients(geo, basis);
    let a = stiffness(&grads, geo.area);
    let mut nc = DMatrix::zeros(3, 3);
    let mut ns1 = DMatrix::zeros(3, 3);
    for &e in boundary_edges {
        let n = geo.normals[e];
        let len = geo.edge_lengths[e];
        let (r0, r1) = (REF_VERTICES[e], REF_VERTICES[(e + 1) % 3]);
        let dn: Vec<f64> = (0..3).map(|j| grads.row(j).transpose().dot(&n)).collect();
        for (t, w) in rules.facet.iter() {
            let xi = [r0[0] + t[0] * (r1[0] - r0[0]), r0[1] + t[0] * (r1[1] - r0[1])];
            let phi = basis.values(xi);
            let wq = w * len;
            for i in 0..3 {
                for j in 0..3 {
                    nc[(i, j)] += wq * (-dn[j]) * phi[i];
                    ns1[(i, j)] += wq * phi[i] * phi[j] / h;
                }
            }
        }
    }
    (a, nc, ns1)
}

/// Local index of `(side, vertex)` on a cut element.
fn cut_local(side: Side, v: usize) -> usize {
    side.index() * 3 + v
}

/// Stiffness, consistency and unit penalty over the doubled local basis of a
/// cut element (6x6), or the single-side 3x3 stiffness on an uncut one.
pub fn interface_element_forms(
    geo: &ElementGeometry,
    cut: &CutInfo,
    alpha: [f64; 2],
    h: f64,
    basis: &P1Basis,
    rules: &Rules,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let grads = physical_gradients(geo, basis);
    if !cut.is_cut() {
        let side = cut.sides()[0];
        let a = stiffness(&grads, geo.area) * alpha[side.index()];
        return Ok((a, DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)));
    }
    let mut a = DMatrix::zeros(6, 6);
    for side in Side::BOTH {
        let s = side.index();
        let block = stiffness(&grads, cut.sub_areas[s]) * alpha[s];
        a.view_mut((3 * s, 3 * s), (3, 3)).copy_from(&block);
    }

    let mut nc = DMatrix::zeros(6, 6);
    let mut ns1 = DMatrix::zeros(6, 6);
    for qp in interface_quadrature(cut, &rules.facet)? {
        let phi = basis.values(geo.to_reference(&qp.point));
        let dn: Vec<f64> = (0..3).map(|j| grads.row(j).transpose().dot(&qp.normal)).collect();
        for test_side in Side::BOTH {
            for i in 0..3 {
                let jump_i = test_side.jump_sign() * phi[i];
                let row = cut_local(test_side, i);
                for trial_side in Side::BOTH {
                    let s = trial_side.index();
                    for j in 0..3 {
                        let col = cut_local(trial_side, j);
                        // {{-alpha d_n u}} with Hansbo weights
                        let flux = -cut.kappa[s] * alpha[s] * dn[j];
                        nc[(row, col)] += qp.weight * flux * jump_i;
                        let jump_j = trial_side.jump_sign() * phi[j];
                        ns1[(row, col)] += qp.weight * jump_i * jump_j / h;
                    }
                }
            }
        }
    }
    Ok((a, nc, ns1))
}

/// `m_i = int_region phi_i` for sub-triangles of `geo`.
fn basis_moments(geo: &ElementGeometry, region: &[[Point2; 3]], basis: &P1Basis, rule: &QuadRule) -> Vector3 {
    let mut m = Vector3::zeros();
    for tri in region {
        let sub = ElementGeometry::from_vertices(*tri);
        for (xi, w) in rule.iter() {
            let x = sub.to_physical(xi);
            let phi = basis.values(geo.to_reference(&x));
            for i in 0..3 {
                m[i] += w * 2.0 * sub.area * phi[i];
            }
        }
    }
    m
}

type Vector3 = nalgebra::Vector3<f64>;

/// Kernel fix `h^{-4} (w, 1)_T (v, 1)_T`: rank one on a fitted element, one
/// such term per sub-element on a cut element.
pub fn kernel_fix(geo: &ElementGeometry, cut: Option<&CutInfo>, h: f64, basis: &P1Basis, rules: &Rules) -> DMatrix<f64> {
    let scale = h.powi(-4);
    match cut.filter(|c| c.is_cut()) {
        None => {
            let m = basis_moments(geo, &[geo.vertices], basis, &rules.volume);
            let k = m * m.transpose() * scale;
            DMatrix::from_fn(3, 3, |i, j| k[(i, j)])
        }
        Some(cut) => {
            let mut k = DMatrix::zeros(6, 6);
            for side in Side::BOTH {
                let m = basis_moments(geo, cut.sub_triangles(side), basis, &rules.volume);
                let block = m * m.transpose() * scale;
                let o = 3 * side.index();
                for i in 0..3 {
                    for j in 0..3 {
                        k[(o + i, o + j)] = block[(i, j)];
                    }
                }
            }
            k
        }
    }
}

/// `L = (A + K)^{-1} N_c^T`, with one step of iterative refinement.
///
/// `A + K` is block diagonal in 3x3 side blocks and the columns of every
/// block of `N_c^T` sum to zero, so `L` solves `A x = r, m^T x = 0` and does
/// not depend on the magnitude of each kernel block. Each block of `K` is
/// rescaled to the size of its stiffness block, which keeps sliver
/// sub-elements (area far below `h^2`) solvable.
pub fn lifting_matrix(a: &DMatrix<f64>, k: &DMatrix<f64>, nc: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut system = a.clone();
    for o in (0..a.nrows()).step_by(3) {
        let kb = k.view((o, o), (3, 3));
        let (na, nk) = (a.view((o, o), (3, 3)).norm(), kb.norm());
        if !(na > 0.0 && nk > 0.0) {
            return None;
        }
        let mut block = system.view_mut((o, o), (3, 3));
        block += kb * (na / nk);
    }
    let lu = system.clone().lu();
    let rhs = nc.transpose();
    let mut l = lu.solve(&rhs)?;
    let residual = &rhs - &system * &l;
    l += lu.solve(&residual)?;
    l.iter().all(|v| v.is_finite()).then_some(l)
}

/// `S = 2 L^T A L`, symmetrized against round-off.
pub fn stabilization_matrix(a: &DMatrix<f64>, l: &DMatrix<f64>) -> DMatrix<f64> {
    let s = l.transpose() * a * l * 2.0;
    (&s + s.transpose()) * 0.5
}

/// All local matrices of element `t`.
pub fn element_matrices(mesh: &Mesh, space: Space<'_>, alpha: [f64; 2], t: usize, rules: &Rules) -> Result<ElementMatrices> {
    let basis = P1Basis;
    let geo = mesh.element_geometry(t);
    let h = mesh.h;
    let (a, nc, ns1, cut, penalty_weight) = match space {
        Space::Fitted(_) => {
            let edges: Vec<usize> = mesh.boundary_edges_of(t).collect();
            let (a, nc, ns1) = fitted_element_forms(&geo, &edges, h, &basis, rules);
            let a = a * alpha[0];
            let nc = nc * alpha[0];
            (a, nc, ns1, None, 1.0)
        }
        Space::Unfitted { cuts, .. } => {
            let cut = &cuts[t];
            let (a, nc, ns1) = interface_element_forms(&geo, cut, alpha, h, &basis, rules)?;
            let weight = cut.kappa[0] * alpha[0] + cut.kappa[1] * alpha[1];
            (a, nc, ns1, Some(cut), weight)
        }
    };
    let n = a.nrows();
    let participates = match space {
        Space::Fitted(_) => mesh.boundary_edges_of(t).next().is_some(),
        Space::Unfitted { cuts, .. } => cuts[t].is_cut(),
    };
    let (k, l, s) = if participates {
        let k = kernel_fix(&geo, cut, h, &basis, rules);
        let l = lifting_matrix(&a, &k, &nc).ok_or(Error::SingularMatrix { element: t })?;
        let s = stabilization_matrix(&a, &l);
        (k, l, s)
    } else {
        (DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n))
    };
    Ok(ElementMatrices { a, nc, ns1, k, l, s, penalty_weight, participates })
}

/// Global indices of the local unknowns of element `t`.
pub fn element_dofs(space: Space<'_>, t: usize) -> Vec<usize> {
    match space {
        Space::Fitted(d) => d.cells[t].to_vec(),
        Space::Unfitted { dofs, cuts } => cuts[t]
            .sides()
            .iter()
            .flat_map(|&s| dofs.local_dofs(t, s))
            .collect(),
    }
}

fn scatter(triplets: &mut Vec<(usize, usize, f64)>, dofs: &[usize], local: &DMatrix<f64>) {
    for (i, &gi) in dofs.iter().enumerate() {
        for (j, &gj) in dofs.iter().enumerate() {
            triplets.push((gi, gj, local[(i, j)]));
        }
    }
}

/// Global matrix for the chosen method plus the right-hand side.
pub fn assemble_global(mesh: &Mesh, space: Space<'_>, spec: &ProblemSpec, rules: &Rules) -> Result<GlobalSystem> {
    let n = space.n_dofs();
    let mut triplets = Vec::new();
    for t in 0..mesh.n_triangles() {
        let em = element_matrices(mesh, space, spec.alpha, t, rules)?;
        scatter(&mut triplets, &element_dofs(space, t), &em.system_matrix(spec.method));
    }
    let matrix = CsrMatrix::from_triplets(n, triplets)?;
    let rhs = assemble_rhs(mesh, space, spec, rules)?;
    Ok(GlobalSystem { matrix, rhs })
}

/// The individual bilinear forms assembled on the common pattern.
#[derive(Debug, Clone)]
pub struct GlobalParts {
    /// Broken stiffness `a`.
    pub a: CsrMatrix,
    pub nc: CsrMatrix,
    /// Unit penalty.
    pub ns1: CsrMatrix,
    /// Unit penalty with the parameter-free weights.
    pub ns1_weighted: CsrMatrix,
    /// `2 a(L u, L v)`.
    pub s: CsrMatrix,
}

pub fn assemble_parts(mesh: &Mesh, space: Space<'_>, alpha: [f64; 2], rules: &Rules) -> Result<GlobalParts> {
    let n = space.n_dofs();
    let mut parts: [Vec<(usize, usize, f64)>; 5] = Default::default();
    for t in 0..mesh.n_triangles() {
        let em = element_matrices(mesh, space, alpha, t, rules)?;
        let dofs = element_dofs(space, t);
        scatter(&mut parts[0], &dofs, &em.a);
        scatter(&mut parts[1], &dofs, &em.nc);
        scatter(&mut parts[2], &dofs, &em.ns1);
        scatter(&mut parts[3], &dofs, &(&em.ns1 * em.penalty_weight));
        scatter(&mut parts[4], &dofs, &em.s);
    }
    let [a, nc, ns1, ns1w, s] = parts.map(|p| CsrMatrix::from_triplets(n, p).expect("indices in range"));
    Ok(GlobalParts { a, nc, ns1, ns1_weighted: ns1w, s })
}

/// Right-hand side: `(f, v)` plus, for fitted problems, the boundary data
/// terms `N^c(v, g) + w/h (g, v)` and, for the lifted method,
/// `2 a(L_g, L v)` with the lifting of `g`. Interface data are homogeneous,
/// so unfitted problems get volume terms only.
pub fn assemble_rhs(mesh: &Mesh, space: Space<'_>, spec: &ProblemSpec, rules: &Rules) -> Result<Vec<f64>> {
    let basis = P1Basis;
    let mut rhs = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let geo = mesh.element_geometry(t);
        let dofs = element_dofs(space, t);
        // volume terms, side by side
        let regions: Vec<(Side, Vec<[Point2; 3]>)> = match space {
            Space::Fitted(_) => vec![(Side::Neg, vec![geo.vertices])],
            Space::Unfitted { cuts, .. } => cuts[t]
                .sides()
                .iter()
                .map(|&s| (s, cuts[t].sub_triangles(s).to_vec()))
                .collect(),
        };
        for (k, (side, tris)) in regions.iter().enumerate() {
            for tri in tris {
                let sub = ElementGeometry::from_vertices(*tri);
                for (xi, w) in rules.rhs.iter() {
                    let x = sub.to_physical(xi);
                    let phi = basis.values(geo.to_reference(&x));
                    let fx = (spec.source)(*side, &x);
                    for i in 0..3 {
                        rhs[dofs[3 * k + i]] += w * 2.0 * sub.area * fx * phi[i];
                    }
                }
            }
        }

        if let Space::Fitted(_) = space {
            let edges: Vec<usize> = mesh.boundary_edges_of(t).collect();
            if edges.is_empty() {
                continue;
            }
            let grads = physical_gradients(&geo, &basis);
            let mut flux_g = DVector::zeros(3);
            let mut mass_g = DVector::zeros(3);
            for &e in &edges {
                let n: Vector2<f64> = geo.normals[e];
                let len = geo.edge_lengths[e];
                let (r0, r1) = (REF_VERTICES[e], REF_VERTICES[(e + 1) % 3]);
                for (s, w) in rules.facet.iter() {
                    let xi = [r0[0] + s[0] * (r1[0] - r0[0]), r0[1] + s[0] * (r1[1] - r0[1])];
                    let x = geo.to_physical(xi);
                    let phi = basis.values(xi);
                    let gx = (spec.dirichlet)(Side::Neg, &x);
                    for i in 0..3 {
                        let dn = grads.row(i).transpose().dot(&n);
                        flux_g[i] += w * len * spec.alpha[0] * (-dn) * gx;
                        mass_g[i] += w * len * phi[i] * gx / mesh.h;
                    }
                }
            }
            let weight = match spec.method {
                Method::Classical { lambda } => lambda,
                Method::ParameterFree => 1.0,
            };
            let mut local = &flux_g + &mass_g * weight;
            if spec.method == Method::ParameterFree {
                let em = element_matrices(mesh, space, spec.alpha, t, rules)?;
                let lift_g = (&em.a + &em.k).lu().solve(&flux_g).ok_or(Error::SingularMatrix { element: t })?;
                local += em.l.transpose() * (&em.a * lift_g) * 2.0;
            }
            for i in 0..3 {
                rhs[dofs[i]] += local[i];
            }
        }
    }
    Ok(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut::{cut_triangle, Classification};
    use crate::mesh::{build_structured_mesh, BBox};
    use crate::spaces::build_cg_dofmap;
    use approx::assert_relative_eq;

    fn unit_triangle() -> ElementGeometry {
        ElementGeometry::from_vertices([Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)])
    }

    #[test]
    fn unit_triangle_stiffness() {
        let (a, nc, ns1) = fitted_element_forms(&unit_triangle(), &[], 1.0, &P1Basis, &Rules::default());
        let expect = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0]) * 0.5;
        assert_relative_eq!(a, expect, epsilon = 1e-15);
        assert_eq!(nc, DMatrix::zeros(3, 3));
        assert_eq!(ns1, DMatrix::zeros(3, 3));
    }

    #[test]
    fn constants_carry_no_flux() {
        let geo = ElementGeometry::from_vertices([Point2::new(0.2, 0.1), Point2::new(1.3, 0.4), Point2::new(0.5, 1.2)]);
        let (_, nc, ns1) = fitted_element_forms(&geo, &[0, 2], 0.7, &P1Basis, &Rules::default());
        // N_c * 1 = 0: the constant in the flux slot
        for i in 0..3 {
            let row_sum: f64 = (0..3).map(|j| nc[(i, j)]).sum();
            assert!(row_sum.abs() < 1e-14);
        }
        assert!(ns1.iter().any(|v| v.abs() > 0.0));
    }

    #[test]
    fn kernel_fix_moments() {
        let geo = unit_triangle();
        let k = kernel_fix(&geo, None, 1.0, &P1Basis, &Rules::default());
        for v in k.iter() {
            assert_relative_eq!(*v, 1.0 / 36.0, max_relative = 1e-14);
        }
        assert_eq!(k.rank(1e-12), 1);
        let a = stiffness(&physical_gradients(&geo, &P1Basis), geo.area);
        let ones = DVector::from_element(3, 1.0);
        assert!((&a * &ones).norm() < 1e-15);
        assert!((&k * &ones).norm() > 0.0);
    }

    #[test]
    fn cut_kernel_fix_has_rank_two() {
        let geo = unit_triangle();
        let cut = cut_triangle(geo.vertices, geo.vertices.map(|p| p.x - 0.5));
        let k = kernel_fix(&geo, Some(&cut), 1.0, &P1Basis, &Rules::default());
        assert_eq!(k.rank(1e-12), 2);
    }

    #[test]
    fn interface_mass_on_vertical_cut() {
        // Segment (0.5, 0) - (0.5, 0.5): phi_0 = 0.5 - y, phi_1 = 0.5, phi_2 = y.
        let geo = unit_triangle();
        let cut = cut_triangle(geo.vertices, geo.vertices.map(|p| p.x - 0.5));
        let (_, _, ns1) = interface_element_forms(&geo, &cut, [1.0, 1.0], 1.0, &P1Basis, &Rules::default()).unwrap();
        // analytic int_0^0.5 phi_i phi_j dy
        let exact = [
            [1.0 / 24.0, 1.0 / 16.0, 1.0 / 48.0],
            [1.0 / 16.0, 1.0 / 8.0, 1.0 / 16.0],
            [1.0 / 48.0, 1.0 / 16.0, 1.0 / 24.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(ns1[(i, j)], exact[i][j], max_relative = 1e-12);
                assert_relative_eq!(ns1[(i + 3, j + 3)], exact[i][j], max_relative = 1e-12);
                assert_relative_eq!(ns1[(i, j + 3)], -exact[i][j], max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn one_sided_average_degenerates() {
        let geo = unit_triangle();
        let mut cut = cut_triangle(geo.vertices, geo.vertices.map(|p| p.x - 0.5));
        cut.kappa = [1.0, 0.0];
        let (_, nc, _) = interface_element_forms(&geo, &cut, [1.0, 2.0], 1.0, &P1Basis, &Rules::default()).unwrap();
        // side-2 trial functions carry no flux
        for r in 0..6 {
            for c in 3..6 {
                assert_eq!(nc[(r, c)], 0.0);
            }
        }
        assert!(nc.columns(0, 3).iter().any(|v| v.abs() > 0.0));
    }

    #[test]
    fn uncut_interface_element_is_plain_stiffness() {
        let geo = unit_triangle();
        let cut = cut_triangle(geo.vertices, [1.0, 1.0, 1.0]);
        assert_eq!(cut.classification, Classification::Pos);
        let (a, nc, _) = interface_element_forms(&geo, &cut, [1.0, 2.0], 1.0, &P1Basis, &Rules::default()).unwrap();
        assert_eq!(a.nrows(), 3);
        let expect = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 1.0, 0.0, -1.0, 0.0, 1.0]);
        assert_relative_eq!(a, expect, epsilon = 1e-15);
        assert_eq!(nc, DMatrix::zeros(3, 3));
    }

    #[test]
    fn lifting_on_interior_is_zero_and_stabilization_vanishes() {
        let mesh = build_structured_mesh(3, 3, BBox::unit_square()).unwrap();
        let dofs = build_cg_dofmap(&mesh);
        let rules = Rules::default();
        let interior = (0..mesh.n_triangles()).find(|&t| mesh.boundary_edges_of(t).next().is_none()).unwrap();
        let em = element_matrices(&mesh, Space::Fitted(&dofs), [1.0, 1.0], interior, &rules).unwrap();
        assert!(!em.participates);
        assert_eq!(em.l, DMatrix::zeros(3, 3));
        assert_eq!(em.s, DMatrix::zeros(3, 3));
        assert_eq!(em.nc, DMatrix::zeros(3, 3));
        assert_eq!(stabilization_matrix(&em.a, &em.l), DMatrix::zeros(3, 3));
    }

    #[test]
    fn penalty_is_linear_in_lambda() {
        let mesh = build_structured_mesh(3, 3, BBox::unit_square()).unwrap();
        let dofs = build_cg_dofmap(&mesh);
        let zero: Field = Arc::new(|_, _| 0.0);
        let spec = |lambda| {
            ProblemSpec::new(ProblemKind::FittedPoisson, [1.0, 1.0], Method::Classical { lambda }, zero.clone(), zero.clone())
                .unwrap()
        };
        let rules = Rules::default();
        let m1 = assemble_global(&mesh, Space::Fitted(&dofs), &spec(1.0), &rules).unwrap().matrix;
        let m2 = assemble_global(&mesh, Space::Fitted(&dofs), &spec(2.0), &rules).unwrap().matrix;
        let m3 = assemble_global(&mesh, Space::Fitted(&dofs), &spec(3.0), &rules).unwrap().matrix;
        let d1 = m2.add_scaled(-1.0, &m1);
        let d2 = m3.add_scaled(-1.0, &m2);
        let parts = assemble_parts(&mesh, Space::Fitted(&dofs), [1.0, 1.0], &rules).unwrap();
        for ((x, y), z) in d1.values().iter().zip(d2.values()).zip(parts.ns1.values()) {
            assert!((x - y).abs() < 1e-13);
            assert!((x - z).abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let zero: Field = Arc::new(|_, _| 0.0);
        assert!(ProblemSpec::new(ProblemKind::FittedPoisson, [1.0, 1.0], Method::Classical { lambda: 0.0 }, zero.clone(), zero.clone()).is_err());
        assert!(ProblemSpec::new(ProblemKind::UnfittedInterface, [1.0, -2.0], Method::ParameterFree, zero.clone(), zero).is_err());
    }
}
