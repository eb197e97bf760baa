//! Structured triangulations of axis-aligned rectangles.
//!
//! Local edge `e` of a triangle joins local vertices `e` and `(e + 1) % 3`.
//! Triangles are stored counterclockwise, so the outward normal of an edge
//! with direction `d` is `(d.y, -d.x) / |d|`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = nalgebra::Point2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite || xmax <= xmin || ymax <= ymin {
            return Err(Error::InvalidArgument(format!(
                "degenerate bounding box [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self { xmin, ymin, xmax, ymax })
    }

    pub fn unit_square() -> Self {
        Self { xmin: 0.0, ymin: 0.0, xmax: 1.0, ymax: 1.0 }
    }

    /// Origin-centred square `[-half, half]^2`.
    pub fn centered_square(half: f64) -> Result<Self> {
        Self::new(-half, -half, half, half)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Which diagonal splits each grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Forward,
    /// Upper-left to lower-right.
    Backward,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    /// `(triangle, local edge)` pairs covering the domain boundary once.
    pub boundary_facets: Vec<(usize, usize)>,
    pub bbox: BBox,
    /// Maximum edge length.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [Point2; 3],
    pub area: f64,
    pub edge_lengths: [f64; 3],
    pub normals: [Vector2<f64>; 3],
    /// Columns are `v1 - v0` and `v2 - v0`.
    pub jacobian: Matrix2<f64>,
}

impl ElementGeometry {
    pub fn from_vertices(vertices: [Point2; 3]) -> Self {
        let [v0, v1, v2] = vertices;
        let e1 = v1 - v0;
        let e2 = v2 - v0;
        let jacobian = Matrix2::new(e1.x, e2.x, e1.y, e2.y);
        let area = 0.5 * jacobian.determinant();
        let mut edge_lengths = [0.0; 3];
        let mut normals = [Vector2::zeros(); 3];
        for e in 0..3 {
            let d = vertices[(e + 1) % 3] - vertices[e];
            let len = d.norm();
            edge_lengths[e] = len;
            normals[e] = Vector2::new(d.y, -d.x) / len;
        }
        Self { vertices, area, edge_lengths, normals, jacobian }
    }

    /// Maps reference coordinates in the triangle `(0,0), (1,0), (0,1)` to
    /// physical coordinates.
    pub fn to_physical(&self, xi: [f64; 2]) -> Point2 {
        self.vertices[0] + self.jacobian * Vector2::new(xi[0], xi[1])
    }

    /// Inverse of [`Self::to_physical`].
    pub fn to_reference(&self, p: &Point2) -> [f64; 2] {
        let inv = self.jacobian.try_inverse().expect("non-degenerate element");
        let xi = inv * (p - self.vertices[0]);
        [xi.x, xi.y]
    }

    /// `J^{-T}`, which maps reference gradients to physical gradients.
    pub fn gradient_map(&self) -> Matrix2<f64> {
        self.jacobian
            .try_inverse()
            .expect("non-degenerate element")
            .transpose()
    }

    pub fn edge_endpoints(&self, edge: usize) -> (Point2, Point2) {
        (self.vertices[edge], self.vertices[(edge + 1) % 3])
    }
}

/// Builds an `nx` by `ny` grid of rectangles over `bbox`, each split along
/// the forward diagonal.
pub fn build_structured_mesh(nx: usize, ny: usize, bbox: BBox) -> Result<Mesh> {
    build_structured_mesh_with(nx, ny, bbox, Diagonal::Forward)
}

pub fn build_structured_mesh_with(
    nx: usize,
    ny: usize,
    bbox: BBox,
    diagonal: Diagonal,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least one cell per direction, got {nx} x {ny}"
        )));
    }
    let bbox = BBox::new(bbox.xmin, bbox.ymin, bbox.xmax, bbox.ymax)?;
    let dx = bbox.width() / nx as f64;
    let dy = bbox.height() / ny as f64;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        // Pin the last row/column to the box edge so the areas sum exactly.
        let y = if j == ny { bbox.ymax } else { bbox.ymin + j as f64 * dy };
        for i in 0..=nx {
            let x = if i == nx { bbox.xmax } else { bbox.xmin + i as f64 * dx };
            vertices.push(Point2::new(x, y));
        }
    }

    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            match diagonal {
                Diagonal::Forward => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
                Diagonal::Backward => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
            }
        }
    }

    Ok(Mesh::assemble(vertices, triangles, bbox))
}

impl Mesh {
    fn assemble(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>, bbox: BBox) -> Self {
        let boundary_facets = find_boundary_facets(&triangles);
        let mut h: f64 = 0.0;
        for tri in &triangles {
            for e in 0..3 {
                h = h.max((vertices[tri[(e + 1) % 3]] - vertices[tri[e]]).norm());
            }
        }
        Self { vertices, triangles, boundary_facets, bbox, h }
    }

    /// Validating constructor for externally supplied triangulations.
    pub fn from_parts(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidArgument("mesh has no triangles".into()));
        }
        if let Some(p) = vertices.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite vertex ({}, {})", p.x, p.y)));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} references vertex {v} but only {} exist",
                    vertices.len()
                )));
            }
            let geo = ElementGeometry::from_vertices(tri.map(|v| vertices[v]));
            if !(geo.area > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} has non-positive signed area {}",
                    geo.area
                )));
            }
        }
        let (mut xmin, mut ymin) = (f64::INFINITY, f64::INFINITY);
        let (mut xmax, mut ymax) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &vertices {
            xmin = xmin.min(p.x);
            ymin = ymin.min(p.y);
            xmax = xmax.max(p.x);
            ymax = ymax.max(p.y);
        }
        let bbox = BBox::new(xmin, ymin, xmax, ymax)?;
        Ok(Self::assemble(vertices, triangles, bbox))
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn element_geometry(&self, t: usize) -> ElementGeometry {
        ElementGeometry::from_vertices(self.triangle_vertices(t))
    }

    /// Local boundary edges of triangle `t`.
    pub fn boundary_edges_of(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.boundary_facets
            .iter()
            .filter(move |&&(tt, _)| tt == t)
            .map(|&(_, e)| e)
    }

    /// Sorted, deduplicated vertices lying on a boundary facet.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary_facets
            .iter()
            .flat_map(|&(t, e)| {
                let tri = self.triangles[t];
                [tri[e], tri[(e + 1) % 3]]
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Plain-text dump: `v x y` per vertex then `t i j k` per triangle.
    pub fn write_dump<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.dump_string().as_bytes())
    }

    pub fn dump_string(&self) -> String {
        let mut s = String::new();
        for p in &self.vertices {
            // {:?} round-trips f64 exactly
            let _ = writeln!(s, "v {:?} {:?}", p.x, p.y);
        }
        for [i, j, k] in &self.triangles {
            let _ = writeln!(s, "t {i} {j} {k}");
        }
        s
    }

    /// Parses the format written by [`Mesh::write_dump`]. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let tag = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let err = |message: String| Error::Parse { line, message };
            match tag {
                "v" => {
                    if rest.len() != 2 {
                        return Err(err(format!("expected 2 coordinates, found {}", rest.len())));
                    }
                    let mut xy = [0.0; 2];
                    for (slot, field) in xy.iter_mut().zip(&rest) {
                        *slot = field
                            .parse::<f64>()
                            .map_err(|e| err(format!("bad coordinate {field:?}: {e}")))?;
                    }
                    vertices.push(Point2::new(xy[0], xy[1]));
                }
                "t" => {
                    if rest.len() != 3 {
                        return Err(err(format!("expected 3 vertex indices, found {}", rest.len())));
                    }
                    let mut tri = [0usize; 3];
                    for (slot, field) in tri.iter_mut().zip(&rest) {
                        *slot = field
                            .parse::<usize>()
                            .map_err(|e| err(format!("bad index {field:?}: {e}")))?;
                    }
                    triangles.push(tri);
                }
                other => return Err(err(format!("unknown record tag {other:?}"))),
            }
        }
        Self::from_parts(vertices, triangles)
    }
}

fn find_boundary_facets(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in triangles {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut facets = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if counts[&(a.min(b), a.max(b))] == 1 {
                facets.push((t, e));
            }
        }
    }
    facets
}
