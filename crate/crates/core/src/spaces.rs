//! Degree-of-freedom maps for the continuous P1 space and the doubled
//! unfitted space, and elimination of essential boundary conditions.

use crate::assembly::GlobalSystem;
use crate::cut::{Classification, CutInfo, Side};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{Mesh, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub n_dofs: usize,
    pub cells: Vec<[usize; 3]>,
    /// Sorted dofs on the boundary.
    pub boundary_dofs: Vec<usize>,
}

pub fn build_cg_dofmap(mesh: &Mesh) -> DofMap {
    DofMap {
        n_dofs: mesh.n_vertices(),
        cells: mesh.triangles.clone(),
        boundary_dofs: mesh.boundary_vertices(),
    }
}

/// `V_h = V_h^1 + V_h^2`: a vertex carries a domain-`i` unknown when any of
/// its elements touches domain `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutDofMap {
    pub base: DofMap,
    /// `active[v][side.index()]`.
    pub active: Vec<[bool; 2]>,
    index: Vec<[Option<usize>; 2]>,
    owner: Vec<(usize, Side)>,
    pub n_dofs: usize,
}

pub fn build_cut_dofmap(mesh: &Mesh, cuts: &[CutInfo]) -> CutDofMap {
    assert_eq!(cuts.len(), mesh.n_triangles(), "one CutInfo per element");
    let mut active = vec![[false; 2]; mesh.n_vertices()];
    for (tri, info) in mesh.triangles.iter().zip(cuts) {
        let sides: &[usize] = match info.classification {
            Classification::Neg => &[0],
            Classification::Pos => &[1],
            Classification::Cut => &[0, 1],
        };
        for &v in tri {
            for &s in sides {
                active[v][s] = true;
            }
        }
    }
    let mut index = vec![[None; 2]; mesh.n_vertices()];
    let mut owner = Vec::new();
    for side in Side::BOTH {
        for v in 0..mesh.n_vertices() {
            if active[v][side.index()] {
                index[v][side.index()] = Some(owner.len());
                owner.push((v, side));
            }
        }
    }
    CutDofMap {
        base: build_cg_dofmap(mesh),
        active,
        index,
        n_dofs: owner.len(),
        owner,
    }
}

impl CutDofMap {
    pub fn dof(&self, vertex: usize, side: Side) -> Option<usize> {
        self.index[vertex][side.index()]
    }

    /// Global indices of the side-`side` unknowns of element `t`.
    ///
    /// Panics when the element does not touch that side.
    pub fn local_dofs(&self, t: usize, side: Side) -> [usize; 3] {
        self.base.cells[t].map(|v| {
            self.dof(v, side)
                .unwrap_or_else(|| panic!("vertex {v} of element {t} inactive on {side:?}"))
        })
    }

    pub fn owner(&self, dof: usize) -> (usize, Side) {
        self.owner[dof]
    }

    pub fn n_doubled(&self) -> usize {
        self.active.iter().filter(|a| a[0] && a[1]).count()
    }

    /// All unknowns living on boundary vertices, sorted.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .base
            .boundary_dofs
            .iter()
            .flat_map(|&v| Side::BOTH.into_iter().filter_map(move |s| self.dof(v, s)))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Nodal interpolation of `g` at the boundary vertices of a fitted space.
pub fn boundary_constraints(mesh: &Mesh, dofs: &DofMap, g: impl Fn(&Point2) -> f64) -> Vec<(usize, f64)> {
    dofs.boundary_dofs.iter().map(|&v| (v, g(&mesh.vertices[v]))).collect()
}

/// Nodal interpolation on boundary vertices of the doubled space, using the
/// branch `g(side, x)` that belongs to each unknown.
pub fn cut_boundary_constraints(
    mesh: &Mesh,
    dofs: &CutDofMap,
    g: impl Fn(Side, &Point2) -> f64,
) -> Vec<(usize, f64)> {
    dofs.boundary_dofs()
        .into_iter()
        .map(|d| {
            let (v, side) = dofs.owner(d);
            (d, g(side, &mesh.vertices[v]))
        })
        .collect()
}

/// System on the unconstrained unknowns after symmetric elimination.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Full-system index of each reduced unknown.
    pub free: Vec<usize>,
    pub constrained: Vec<(usize, f64)>,
    n_full: usize,
}

impl ReducedSystem {
    /// Scatters a reduced solution into a full coefficient vector that also
    /// carries the prescribed values.
    pub fn expand(&self, x_free: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_full];
        for (&i, &v) in self.free.iter().zip(x_free) {
            x[i] = v;
        }
        for &(i, v) in &self.constrained {
            x[i] = v;
        }
        x
    }
}

/// Eliminates `constrained` unknowns: the reduced right-hand side is
/// `b_f - M_fc g_c` and the matrix is the symmetric block `M_ff`.
pub fn apply_essential_bc(system: &GlobalSystem, constrained: &[(usize, f64)]) -> Result<ReducedSystem> {
    let n = system.matrix.n();
    let mut value: Vec<Option<f64>> = vec![None; n];
    for &(i, v) in constrained {
        if i >= n {
            return Err(Error::IndexOutOfRange { row: i, col: i, n });
        }
        value[i] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| value[i].is_none()).collect();
    if free.is_empty() {
        return Err(Error::EmptySystem);
    }
    let rhs = free
        .iter()
        .map(|&i| {
            let coupling: f64 = system
                .matrix
                .row(i)
                .filter_map(|(j, m)| value[j].map(|g| m * g))
                .sum();
            system.rhs[i] - coupling
        })
        .collect();
    let mut constrained: Vec<(usize, f64)> =
        (0..n).filter_map(|i| value[i].map(|v| (i, v))).collect();
    constrained.sort_by_key(|&(i, _)| i);
    Ok(ReducedSystem {
        matrix: system.matrix.principal_submatrix(&free),
        rhs,
        free,
        constrained,
        n_full: n,
    })
}
