//! Level-set cut cells: classification, piecewise-planar interface
//! reconstruction, sub-triangulation and Hansbo weights.
//!
//! All geometry is derived from the vertex values of the level set, i.e.
//! from its P1 interpolant. `Neg` (phi < 0) is domain 1, `Pos` is domain 2.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, Mesh, Point2};
use crate::quadrature::{P1Basis, QuadRule};

/// Values with `|phi| < SNAP * h` are moved to `+SNAP * h`.
pub const SNAP: f64 = 1e-12;

#[derive(Clone)]
pub struct LevelSet {
    phi: Arc<dyn Fn(&Point2) -> f64 + Send + Sync>,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LevelSet(..)")
    }
}

impl LevelSet {
    pub fn new(phi: impl Fn(&Point2) -> f64 + Send + Sync + 'static) -> Self {
        Self { phi: Arc::new(phi) }
    }

    /// `phi = a x + b y + c`.
    pub fn planar(a: f64, b: f64, c: f64) -> Self {
        Self::new(move |p| a * p.x + b * p.y + c)
    }

    /// `(x^4 + y^4)^(1/4) - 1`; negative inside the unit 4-norm ball.
    pub fn l4_norm() -> Self {
        Self::new(|p| (p.x.powi(4) + p.y.powi(4)).powf(0.25) - 1.0)
    }

    pub fn eval(&self, p: &Point2) -> f64 {
        (self.phi)(p)
    }

    /// Raw (unsnapped) values at the mesh vertices.
    pub fn vertex_values(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.vertices.iter().map(|p| self.eval(p)).collect()
    }
}

pub fn levelset_l4_norm() -> LevelSet {
    LevelSet::l4_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Neg,
    Pos,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Neg, Side::Pos];

    pub fn index(self) -> usize {
        match self {
            Side::Neg => 0,
            Side::Pos => 1,
        }
    }

    /// Sign of this side's trace in the jump `v_1 - v_2`.
    pub fn jump_sign(self) -> f64 {
        match self {
            Side::Neg => 1.0,
            Side::Pos => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Neg,
    Pos,
    Cut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub p: Point2,
    pub q: Point2,
    /// Unit normal pointing from the `Neg` side to the `Pos` side.
    pub normal: Vector2<f64>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutInfo {
    pub classification: Classification,
    pub sub_triangles_neg: Vec<[Point2; 3]>,
    pub sub_triangles_pos: Vec<[Point2; 3]>,
    pub segment: Option<Segment>,
    pub kappa: [f64; 2],
    pub sub_areas: [f64; 2],
}

impl CutInfo {
    pub fn is_cut(&self) -> bool {
        self.classification == Classification::Cut
    }

    pub fn sub_triangles(&self, side: Side) -> &[[Point2; 3]] {
        match side {
            Side::Neg => &self.sub_triangles_neg,
            Side::Pos => &self.sub_triangles_pos,
        }
    }

    /// Sides with a non-empty part of the element.
    pub fn sides(&self) -> &'static [Side] {
        match self.classification {
            Classification::Neg => &[Side::Neg],
            Classification::Pos => &[Side::Pos],
            Classification::Cut => &Side::BOTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub point: Point2,
    pub weight: f64,
    pub normal: Vector2<f64>,
}

/// Applies the snapping rule to raw vertex values.
pub fn snap_values(values: &[f64], h: f64) -> Vec<f64> {
    let tol = SNAP * h;
    values.iter().map(|&v| if v.abs() < tol { tol } else { v }).collect()
}

pub fn classify_and_cut(mesh: &Mesh, levelset: &LevelSet) -> Result<Vec<CutInfo>> {
    classify_and_cut_values(mesh, &levelset.vertex_values(mesh))
}

/// Cuts every element using the given raw vertex values.
pub fn classify_and_cut_values(mesh: &Mesh, values: &[f64]) -> Result<Vec<CutInfo>> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "{} level-set values for {} vertices",
            values.len(),
            mesh.n_vertices()
        )));
    }
    let snapped = snap_values(values, mesh.h);
    mesh.triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            if tri.iter().all(|&v| values[v] == 0.0) {
                return Err(Error::DegenerateLevelSet { element: t });
            }
            Ok(cut_triangle(mesh.triangle_vertices(t), tri.map(|v| snapped[v])))
        })
        .collect()
}

/// Cuts a single counterclockwise triangle with already snapped, non-zero
/// vertex values.
pub fn cut_triangle(verts: [Point2; 3], phi: [f64; 3]) -> CutInfo {
    let area = ElementGeometry::from_vertices(verts).area;
    let neg = phi.map(|v| v < 0.0);
    let n_neg = neg.iter().filter(|&&b| b).count();
    match n_neg {
        3 => CutInfo {
            classification: Classification::Neg,
            sub_triangles_neg: vec![verts],
            sub_triangles_pos: vec![],
            segment: None,
            kappa: [1.0, 0.0],
            sub_areas: [area, 0.0],
        },
        0 => CutInfo {
            classification: Classification::Pos,
            sub_triangles_neg: vec![],
            sub_triangles_pos: vec![verts],
            segment: None,
            kappa: [0.0, 1.0],
            sub_areas: [0.0, area],
        },
        _ => {
            // The lone vertex is the one whose sign differs from the other two.
            let lone_is_neg = n_neg == 1;
            let i = (0..3).find(|&k| neg[k] == lone_is_neg).expect("lone vertex");
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let root = |a: usize, b: usize| {
                let t = phi[a] / (phi[a] - phi[b]);
                verts[a] + (verts[b] - verts[a]) * t
            };
            let pij = root(i, j);
            let pik = root(i, k);
            let lone = vec![[verts[i], pij, pik]];
            // Quadrilateral pij, vj, vk, pik split along its shorter diagonal.
            let quad = if (verts[k] - pij).norm() <= (pik - verts[j]).norm() {
                vec![[pij, verts[j], verts[k]], [pij, verts[k], pik]]
            } else {
                vec![[pij, verts[j], pik], [verts[j], verts[k], pik]]
            };
            let (sub_neg, sub_pos) = if lone_is_neg { (lone, quad) } else { (quad, lone) };
            let a_neg: f64 = sub_neg.iter().map(|&t| triangle_area(t)).sum();
            let a_pos: f64 = sub_pos.iter().map(|&t| triangle_area(t)).sum();

            let grad = interpolant_gradient(verts, phi);
            let normal = grad / grad.norm();
            let segment = Segment { p: pij, q: pik, normal, length: (pik - pij).norm() };
            CutInfo {
                classification: Classification::Cut,
                sub_triangles_neg: sub_neg,
                sub_triangles_pos: sub_pos,
                segment: Some(segment),
                kappa: [a_neg / area, a_pos / area],
                sub_areas: [a_neg, a_pos],
            }
        }
    }
}

pub(crate) fn triangle_area(t: [Point2; 3]) -> f64 {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    0.5 * (e1.x * e2.y - e1.y * e2.x)
}

fn interpolant_gradient(verts: [Point2; 3], phi: [f64; 3]) -> Vector2<f64> {
    let geo = ElementGeometry::from_vertices(verts);
    let map = geo.gradient_map();
    P1Basis
        .reference_gradients()
        .iter()
        .zip(phi)
        .map(|(g, v)| map * g * v)
        .sum()
}

/// Quadrature on the interface segment of a cut element, from a rule on
/// `[0, 1]`.
pub fn interface_quadrature(info: &CutInfo, rule: &QuadRule) -> Result<Vec<InterfacePoint>> {
    let seg = match (&info.segment, info.classification) {
        (Some(seg), Classification::Cut) => seg,
        _ => {
            return Err(Error::ContractViolation(
                "interface quadrature requested on an uncut element".into(),
            ))
        }
    };
    Ok(rule
        .iter()
        .map(|(t, w)| InterfacePoint {
            point: seg.p + (seg.q - seg.p) * t[0],
            weight: w * seg.length,
            normal: seg.normal,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, BBox};
    use crate::quadrature::segment_rule;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_triangle() -> [Point2; 3] {
        [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]
    }

    #[test]
    fn vertical_cut_of_unit_triangle() {
        let verts = unit_triangle();
        let phi = verts.map(|p| p.x - 0.5);
        let info = cut_triangle(verts, phi);
        assert_eq!(info.classification, Classification::Cut);
        assert_eq!(info.sub_triangles_neg.len() + info.sub_triangles_pos.len(), 3);
        assert_relative_eq!(info.sub_areas[0], 0.375, max_relative = 1e-14);
        assert_relative_eq!(info.kappa[0], 0.75, max_relative = 1e-14);
        assert_relative_eq!(info.kappa[1], 0.25, max_relative = 1e-14);
        let seg = info.segment.unwrap();
        assert_relative_eq!(seg.length, 0.5, max_relative = 1e-14);
        assert_relative_eq!(seg.normal, Vector2::new(1.0, 0.0), epsilon = 1e-15);
        let mut ends = [seg.p, seg.q];
        ends.sort_by(|a, b| a.y.total_cmp(&b.y));
        assert_relative_eq!(ends[0], Point2::new(0.5, 0.0), epsilon = 1e-15);
        assert_relative_eq!(ends[1], Point2::new(0.5, 0.5), epsilon = 1e-15);
    }

    #[test]
    fn uncut_classification() {
        let info = cut_triangle(unit_triangle(), [1.0, 2.0, 0.5]);
        assert_eq!(info.classification, Classification::Pos);
        assert_eq!(info.kappa, [0.0, 1.0]);
        assert!(info.segment.is_none());
        assert!(info.sub_triangles_neg.is_empty());

        let info = cut_triangle(unit_triangle(), [-1.0, -2.0, -0.5]);
        assert_eq!(info.classification, Classification::Neg);
        assert_eq!(info.kappa, [1.0, 0.0]);
    }

    #[test]
    fn interface_quadrature_midpoint() {
        let verts = unit_triangle();
        let info = cut_triangle(verts, verts.map(|p| p.x - 0.5));
        let qp = interface_quadrature(&info, &segment_rule(1)).unwrap();
        assert_eq!(qp.len(), 1);
        assert_relative_eq!(qp[0].weight, 0.5, max_relative = 1e-14);
        assert_relative_eq!(qp[0].point, Point2::new(0.5, 0.25), epsilon = 1e-15);

        let uncut = cut_triangle(verts, [1.0, 1.0, 1.0]);
        assert!(matches!(
            interface_quadrature(&uncut, &segment_rule(1)),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn vertical_line_through_mesh() {
        let bbox = BBox::new(-1.0, -0.5, 1.0, 1.5).unwrap();
        let mesh = build_structured_mesh(6, 5, bbox).unwrap();
        // c chosen away from grid lines
        let ls = LevelSet::planar(1.0, 0.0, -0.1234);
        let cuts = classify_and_cut(&mesh, &ls).unwrap();
        let rule = segment_rule(2);
        let mut length = 0.0;
        for info in cuts.iter().filter(|c| c.is_cut()) {
            for qp in interface_quadrature(info, &rule).unwrap() {
                length += qp.weight;
                assert_relative_eq!(qp.normal, Vector2::new(1.0, 0.0), epsilon = 1e-12);
                assert!((qp.point.x - 0.1234).abs() < 1e-13);
            }
        }
        assert_relative_eq!(length, bbox.height(), max_relative = 1e-12);
    }

    #[test]
    fn oblique_line_length_is_exact() {
        let bbox = BBox::unit_square();
        let mesh = build_structured_mesh(7, 7, bbox).unwrap();
        // y = 0.3 x + 0.21 crosses x = 0 and x = 1 inside the square
        let ls = LevelSet::planar(-0.3, 1.0, -0.21);
        let cuts = classify_and_cut(&mesh, &ls).unwrap();
        let total: f64 = cuts.iter().filter_map(|c| c.segment).map(|s| s.length).sum();
        assert_relative_eq!(total, (1.0f64 + 0.09).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn l4_levelset_values() {
        let ls = levelset_l4_norm();
        assert_eq!(ls.eval(&Point2::new(0.0, 0.0)), -1.0);
        assert_eq!(ls.eval(&Point2::new(1.0, 0.0)), 0.0);
        assert_relative_eq!(ls.eval(&Point2::new(1.0, 1.0)), 2f64.powf(0.25) - 1.0, max_relative = 1e-15);
        assert!((ls.eval(&Point2::new(1.0, 1.0)) - 0.18921).abs() < 1e-5);
    }

    #[test]
    fn area_conservation_on_l4_interface() {
        let bbox = BBox::centered_square(2.01).unwrap();
        let mesh = build_structured_mesh(16, 16, bbox).unwrap();
        let cuts = classify_and_cut(&mesh, &LevelSet::l4_norm()).unwrap();
        let mut total = 0.0;
        for (t, info) in cuts.iter().enumerate() {
            let area = mesh.element_geometry(t).area;
            assert_relative_eq!(info.sub_areas[0] + info.sub_areas[1], area, max_relative = 1e-12);
            assert_relative_eq!(info.kappa[0] + info.kappa[1], 1.0, max_relative = 1e-12);
            let sum: f64 = Side::BOTH
                .iter()
                .flat_map(|&s| info.sub_triangles(s).iter())
                .map(|&t| triangle_area(t))
                .sum();
            total += sum;
        }
        assert_relative_eq!(total, bbox.area(), max_relative = 1e-10);
        assert!(cuts.iter().any(|c| c.is_cut()));
    }

    #[test]
    fn all_zero_values_rejected() {
        let mesh = build_structured_mesh(1, 1, BBox::unit_square()).unwrap();
        let err = classify_and_cut_values(&mesh, &[0.0; 4]).unwrap_err();
        assert!(matches!(err, Error::DegenerateLevelSet { .. }));
    }

    #[test]
    fn zero_vertex_snaps_to_positive_side() {
        let mesh = build_structured_mesh(1, 1, BBox::unit_square()).unwrap();
        // phi = x - 0 vanishes on the left column: no cuts, everything positive
        let cuts = classify_and_cut(&mesh, &LevelSet::planar(1.0, 0.0, 0.0)).unwrap();
        assert!(cuts.iter().all(|c| c.classification == Classification::Pos));
    }

    fn arb_triangle() -> impl Strategy<Value = [Point2; 3]> {
        proptest::array::uniform6(-2.0f64..2.0).prop_filter_map("degenerate", |c| {
            let t = [Point2::new(c[0], c[1]), Point2::new(c[2], c[3]), Point2::new(c[4], c[5])];
            let a = triangle_area(t);
            if a.abs() < 1e-2 {
                None
            } else if a > 0.0 {
                Some(t)
            } else {
                Some([t[0], t[2], t[1]])
            }
        })
    }

    fn arb_values() -> impl Strategy<Value = [f64; 3]> {
        proptest::array::uniform3(prop_oneof![-1.0f64..-1e-3, 1e-3f64..1.0])
    }

    proptest! {
        #[test]
        fn cut_invariants(verts in arb_triangle(), phi in arb_values()) {
            let info = cut_triangle(verts, phi);
            let area = triangle_area(verts);
            prop_assert!((info.sub_areas[0] + info.sub_areas[1] - area).abs() <= 1e-12 * area);
            prop_assert!((info.kappa[0] + info.kappa[1] - 1.0).abs() <= 1e-12);
            prop_assert!(info.kappa.iter().all(|&k| (0.0..=1.0 + 1e-14).contains(&k)));
            for s in Side::BOTH {
                for &t in info.sub_triangles(s) {
                    prop_assert!(triangle_area(t) >= -1e-14 * area);
                }
            }
            if let Some(seg) = info.segment {
                prop_assert!((seg.normal.norm() - 1.0).abs() < 1e-12);
                let d = seg.q - seg.p;
                prop_assert!(d.dot(&seg.normal).abs() <= 1e-10 * d.norm().max(1e-300));
                // endpoints lie on edges of the element
                for end in [seg.p, seg.q] {
                    let on_edge = (0..3).any(|e| {
                        let (a, b) = (verts[e], verts[(e + 1) % 3]);
                        let cross = (b - a).perp(&(end - a));
                        cross.abs() <= 1e-10 * (b - a).norm_squared()
                    });
                    prop_assert!(on_edge);
                }
                // orientation: the interpolant increases along the normal
                let lin = |p: Point2| {
                    let geo = ElementGeometry::from_vertices(verts);
                    let xi = geo.to_reference(&p);
                    let v = P1Basis.values(xi);
                    v[0] * phi[0] + v[1] * phi[1] + v[2] * phi[2]
                };
                let mid = Point2::from((seg.p.coords + seg.q.coords) * 0.5);
                let eps = 1e-6;
                prop_assert!(lin(mid + seg.normal * eps) > lin(mid - seg.normal * eps));
            } else {
                prop_assert!(info.kappa == [1.0, 0.0] || info.kappa == [0.0, 1.0]);
            }
        }

        #[test]
        fn sign_flip_symmetry(verts in arb_triangle(), phi in arb_values()) {
            let a = cut_triangle(verts, phi);
            let b = cut_triangle(verts, phi.map(|v| -v));
            prop_assert!((a.kappa[0] - b.kappa[1]).abs() < 1e-14);
            prop_assert!((a.kappa[1] - b.kappa[0]).abs() < 1e-14);
            match (a.classification, b.classification) {
                (Classification::Neg, Classification::Pos) | (Classification::Pos, Classification::Neg) => {}
                (Classification::Cut, Classification::Cut) => {
                    let (sa, sb) = (a.segment.unwrap(), b.segment.unwrap());
                    prop_assert!((sa.normal + sb.normal).norm() < 1e-12);
                    prop_assert!((sa.length - sb.length).abs() < 1e-12);
                }
                other => prop_assert!(false, "unexpected pair {:?}", other),
            }
        }
    }
}
