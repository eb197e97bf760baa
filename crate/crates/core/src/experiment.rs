//! End-to-end runs: discretize, assemble, eliminate boundary unknowns, solve,
//! and measure errors and conditioning.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    affine_solution, error_norms, kink_solution, planar_interface_solution, smooth_fitted_solution, eoc,
    ErrorReport, ManufacturedSolution,
};
use crate::assembly::{assemble_global, Method, ProblemKind, ProblemSpec, Rules, Space};
use crate::cut::{classify_and_cut, CutInfo, LevelSet};
use crate::error::{Error, Result};
use crate::linalg::{cg_solve, condition_number, Conditioning, SpectralReport};
use crate::mesh::{build_structured_mesh, BBox, Mesh};
use crate::spaces::{apply_essential_bc, build_cg_dofmap, build_cut_dofmap, cut_boundary_constraints, CutDofMap, DofMap, ReducedSystem};

/// Half-width of the default interface domain `[-2.01, 2.01]^2`.
pub const INTERFACE_HALF_WIDTH: f64 = 2.01;
/// CG stopping tolerance on the relative residual.
pub const CG_TOL: f64 = 1e-10;
/// Largest system for which the dense eigensolve is attempted.
pub const MAX_DENSE: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemChoice {
    Fitted,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Classical,
    Lifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionChoice {
    /// Two-phase kink solution across `||x||_4 = 1`.
    Kink,
    /// `sin(pi x) sin(pi y)`.
    Smooth,
    /// `1 + x + y`, reproduced exactly.
    Affine,
    /// Flux-continuous piecewise affine solution across a vertical line.
    Planar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemChoice,
    pub method: MethodChoice,
    pub lambda: Option<f64>,
    pub nx: usize,
    pub bbox: BBox,
    pub solution: SolutionChoice,
}

impl RunConfig {
    /// Config with the problem's default domain and exact solution.
    pub fn new(problem: ProblemChoice, method: MethodChoice, lambda: Option<f64>, nx: usize) -> Result<Self> {
        let (bbox, solution) = match problem {
            ProblemChoice::Fitted => (BBox::unit_square(), SolutionChoice::Smooth),
            ProblemChoice::Interface => (BBox::centered_square(INTERFACE_HALF_WIDTH)?, SolutionChoice::Kink),
        };
        let cfg = Self { problem, method, lambda, nx, bbox, solution };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bbox(mut self, bbox: BBox) -> Self {
        self.bbox = bbox;
        self
    }

    pub fn with_solution(mut self, solution: SolutionChoice) -> Self {
        self.solution = solution;
        self
    }

    pub fn with_method(mut self, method: MethodChoice, lambda: Option<f64>) -> Self {
        self.method = method;
        self.lambda = lambda;
        self
    }

    pub fn with_nx(mut self, nx: usize) -> Self {
        self.nx = nx;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.method, self.lambda) {
            (MethodChoice::Classical, None) => {
                return Err(Error::InvalidArgument("the classical method needs a penalty parameter".into()))
            }
            (MethodChoice::Classical, Some(l)) if !(l > 0.0 && l.is_finite()) => {
                return Err(Error::InvalidArgument(format!("penalty parameter must be positive, got {l}")))
            }
            (MethodChoice::Lifted, Some(_)) => {
                return Err(Error::InvalidArgument("the lifted method takes no penalty parameter".into()))
            }
            _ => {}
        }
        if self.nx == 0 {
            return Err(Error::InvalidArgument("nx must be at least 1".into()));
        }
        let fits = matches!(
            (self.problem, self.solution),
            (ProblemChoice::Fitted, SolutionChoice::Smooth | SolutionChoice::Affine)
                | (ProblemChoice::Interface, SolutionChoice::Kink | SolutionChoice::Planar)
        );
        if !fits {
            return Err(Error::InvalidArgument(format!(
                "solution {:?} does not belong to the {:?} problem",
                self.solution, self.problem
            )));
        }
        BBox::new(self.bbox.xmin, self.bbox.ymin, self.bbox.xmax, self.bbox.ymax)?;
        Ok(())
    }

    pub fn discrete_method(&self) -> Method {
        match (self.method, self.lambda) {
            (MethodChoice::Classical, Some(lambda)) => Method::Classical { lambda },
            _ => Method::ParameterFree,
        }
    }

    /// The exact solution and, for interface problems, the level set.
    pub fn exact(&self) -> (ManufacturedSolution, Option<LevelSet>) {
        match self.solution {
            SolutionChoice::Kink => (kink_solution(), Some(LevelSet::l4_norm())),
            SolutionChoice::Smooth => (smooth_fitted_solution(), None),
            SolutionChoice::Affine => (affine_solution([1.0, 1.0, 1.0]), None),
            SolutionChoice::Planar => {
                // vertical line off the grid lines of any dyadic refinement
                let x0 = self.bbox.xmin + self.bbox.width() * (1.0 / 3.0 + 1e-3);
                (planar_interface_solution([1.0, 2.0], x0, 0.5, 1.0), Some(LevelSet::planar(1.0, 0.0, -x0)))
            }
        }
    }
}

/// Mesh plus the discrete space built on it.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub fitted: Option<DofMap>,
    pub cuts: Option<Vec<CutInfo>>,
    pub cut_dofs: Option<CutDofMap>,
}

impl Discretization {
    pub fn fitted(mesh: Mesh) -> Self {
        let dofs = build_cg_dofmap(&mesh);
        Self { mesh, fitted: Some(dofs), cuts: None, cut_dofs: None }
    }

    pub fn unfitted(mesh: Mesh, levelset: &LevelSet) -> Result<Self> {
        let cuts = classify_and_cut(&mesh, levelset)?;
        let dofs = build_cut_dofmap(&mesh, &cuts);
        Ok(Self { mesh, fitted: None, cuts: Some(cuts), cut_dofs: Some(dofs) })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let mesh = build_structured_mesh(cfg.nx, cfg.nx, cfg.bbox)?;
        match cfg.exact().1 {
            Some(ls) => Self::unfitted(mesh, &ls),
            None => Ok(Self::fitted(mesh)),
        }
    }

    pub fn space(&self) -> Space<'_> {
        match (&self.fitted, &self.cuts, &self.cut_dofs) {
            (Some(d), _, _) => Space::Fitted(d),
            (None, Some(cuts), Some(dofs)) => Space::Unfitted { dofs, cuts },
            _ => unreachable!("discretization without a space"),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.space().n_dofs()
    }

    /// Nodal interpolant of `exact`; each doubled unknown takes its own branch.
    pub fn interpolate(&self, exact: &ManufacturedSolution) -> Vec<f64> {
        match &self.cut_dofs {
            Some(dofs) => (0..dofs.n_dofs)
                .map(|d| {
                    let (v, side) = dofs.owner(d);
                    exact.u(side, &self.mesh.vertices[v])
                })
                .collect(),
            None => self.mesh.vertices.iter().map(|p| exact.u(crate::cut::Side::Neg, p)).collect(),
        }
    }
}

pub fn problem_spec(cfg: &RunConfig, exact: &ManufacturedSolution) -> Result<ProblemSpec> {
    let kind = match cfg.problem {
        ProblemChoice::Fitted => ProblemKind::FittedPoisson,
        ProblemChoice::Interface => ProblemKind::UnfittedInterface,
    };
    ProblemSpec::new(kind, exact.alpha, cfg.discrete_method(), exact.source_field(), exact.dirichlet_field())
}

/// Assembles and eliminates essential boundary unknowns (interface problem
/// only; the fitted problem imposes its data weakly).
pub fn reduced_system(cfg: &RunConfig, disc: &Discretization) -> Result<ReducedSystem> {
    let (exact, _) = cfg.exact();
    let spec = problem_spec(cfg, &exact)?;
    let system = assemble_global(&disc.mesh, disc.space(), &spec, &Rules::default())?;
    let constraints = match &disc.cut_dofs {
        Some(dofs) => cut_boundary_constraints(&disc.mesh, dofs, |s, p| exact.u(s, p)),
        None => Vec::new(),
    };
    apply_essential_bc(&system, &constraints)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub n_dofs: usize,
    pub n_free: usize,
    pub h: f64,
    pub spectral: Option<SpectralReport>,
    pub errors: Option<ErrorReport>,
    pub cg_iterations: Option<usize>,
}

impl SolveOutcome {
    pub fn is_unstable(&self) -> bool {
        self.spectral.is_some_and(|s| s.cond.is_unstable())
    }
}

/// Assemble, check conditioning, solve with CG and measure the error.
/// Unstable systems are reported without a solve.
pub fn solve(cfg: &RunConfig, with_condition: bool) -> Result<SolveOutcome> {
    cfg.validate()?;
    let disc = Discretization::from_config(cfg)?;
    let reduced = reduced_system(cfg, &disc)?;
    let n_free = reduced.free.len();
    let spectral = (with_condition && n_free <= MAX_DENSE).then(|| condition_number(&reduced.matrix));
    let mut outcome = SolveOutcome {
        n_dofs: disc.n_dofs(),
        n_free,
        h: disc.mesh.h,
        spectral,
        errors: None,
        cg_iterations: None,
    };
    if outcome.is_unstable() {
        return Ok(outcome);
    }
    let sol = cg_solve(&reduced.matrix, &reduced.rhs, CG_TOL, 20 * n_free.max(50))?;
    let x = reduced.expand(&sol.x);
    let (exact, _) = cfg.exact();
    outcome.errors = Some(error_norms(&disc.mesh, disc.space(), &x, &exact));
    outcome.cg_iterations = Some(sol.iterations);
    Ok(outcome)
}

/// Condition number of the reduced system matrix for `cfg`.
pub fn conditioning(cfg: &RunConfig) -> Result<(usize, SpectralReport)> {
    let disc = Discretization::from_config(cfg)?;
    let reduced = reduced_system(cfg, &disc)?;
    Ok((disc.n_dofs(), condition_number(&reduced.matrix)))
}

/// Penalty parameters of the published sweep.
pub const TABLE_LAMBDAS: [f64; 14] =
    [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `None` for the lifted method.
    pub lambda: Option<f64>,
    pub cond: Conditioning,
}

/// Conditioning of the classical method for each `lambda`, followed by a
/// row for the lifted method on the same mesh.
pub fn lambda_sweep(cfg: &RunConfig, lambdas: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(lambdas.len() + 1);
    for &lambda in lambdas {
        let c = cfg.clone().with_method(MethodChoice::Classical, Some(lambda));
        c.validate()?;
        rows.push(SweepRow { lambda: Some(lambda), cond: conditioning(&c)?.1.cond });
    }
    let lifted = cfg.clone().with_method(MethodChoice::Lifted, None);
    rows.push(SweepRow { lambda: None, cond: conditioning(&lifted)?.1.cond });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub l2: f64,
    pub eoc_l2: Option<f64>,
    pub h1: f64,
    pub eoc_h1: Option<f64>,
    pub jump: f64,
    pub eoc_jump: Option<f64>,
}

/// Errors on `levels` uniformly refined meshes starting at `cfg.nx`.
pub fn convergence(cfg: &RunConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 levels, got {levels}")));
    }
    let mut reports = Vec::with_capacity(levels);
    for k in 0..levels {
        let c = cfg.clone().with_nx(cfg.nx << k);
        let out = solve(&c, false)?;
        reports.push((c.nx, out.errors.expect("stable solve")));
    }
    let orders = |pick: fn(&ErrorReport) -> f64| {
        let mut o = vec![None];
        o.extend(eoc(&reports.iter().map(|(_, r)| (r.h, pick(r))).collect::<Vec<_>>()));
        o
    };
    let (el2, eh1, ejump) = (orders(|r| r.l2), orders(|r| r.h1_broken), orders(|r| r.jump_l2_gamma));
    Ok(reports
        .iter()
        .enumerate()
        .map(|(k, (nx, r))| ConvergenceRow {
            nx: *nx,
            h: r.h,
            n_dofs: r.n_dofs,
            l2: r.l2,
            eoc_l2: el2[k],
            h1: r.h1_broken,
            eoc_h1: eh1[k],
            jump: r.jump_l2_gamma,
            eoc_jump: ejump[k],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRow {
    pub lambda: f64,
    pub jump: f64,
    pub l2: f64,
    pub h1: f64,
}

/// Classical method on a fixed mesh for each `lambda`.
pub fn jump_sweep(cfg: &RunConfig, lambdas: &[f64]) -> Result<Vec<JumpRow>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let c = cfg.clone().with_method(MethodChoice::Classical, Some(lambda));
            let r = solve(&c, false)?.errors.expect("solved");
            Ok(JumpRow { lambda, jump: r.jump_l2_gamma, l2: r.l2, h1: r.h1_broken })
        })
        .collect()
}

/// Parses a comma- or whitespace-separated list of positive penalties.
pub fn parse_lambda_list(text: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Parse { line: 1, message: "empty penalty list".into() });
    }
    items
        .into_iter()
        .map(|item| match item.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            Ok(v) => Err(Error::InvalidArgument(format!("penalty parameter must be positive, got {v}"))),
            Err(e) => Err(Error::Parse { line: 1, message: format!("{item:?}: {e}") }),
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
