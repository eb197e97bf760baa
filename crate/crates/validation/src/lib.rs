//! Published reference values for the `||x||_4 = 1` interface experiment and
//! the tolerances the acceptance suite applies to them.

/// Penalty parameters of the conditioning table.
pub const LAMBDAS: [f64; 14] =
    [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0];

/// Published condition numbers of the classical method; `None` marks an
/// unstable (not positive definite) system.
pub const CONDITION_NUMBERS: [Option<f64>; 14] = [
    None,
    None,
    None,
    None,
    Some(86.3),
    Some(81.6),
    Some(79.2),
    Some(83.2),
    Some(88.0),
    Some(91.3),
    Some(116.0),
    Some(221.4),
    Some(427.4),
    Some(830.3),
];

/// Published condition number of the lifted method.
pub const LIFTED_CONDITION: f64 = 86.9;
/// Published number of unknowns on the 16x16 mesh.
pub const UNKNOWNS: usize = 512;
/// Mesh resolution of the experiment.
pub const NX: usize = 16;

/// Published value for `lambda`, if it is one of [`LAMBDAS`].
pub fn published(lambda: f64) -> Option<Option<f64>> {
    LAMBDAS.iter().position(|&l| l == lambda).map(|k| CONDITION_NUMBERS[k])
}

/// Acceptance tolerances.
pub mod tol {
    /// Relative band around the published plateau values (lambda 16..512).
    pub const PLATEAU: f64 = 0.30;
    /// Band for `cond(2 lambda) / cond(lambda)`, lambda in {2048, 4096, 8192}.
    pub const GROWTH: (f64, f64) = (1.7, 2.2);
    /// Band for lifted condition over the best classical one.
    pub const LIFTED: (f64, f64) = (0.7, 1.4);
    /// Minimal final (L2, H1) orders, fitted problem.
    pub const FITTED_EOC: (f64, f64) = (1.9, 0.95);
    /// Minimal final (L2, broken H1) orders, interface problem.
    pub const KINK_EOC: (f64, f64) = (1.8, 0.9);
    /// Maximal error ratio between classical (lambda = 32) and lifted.
    pub const CLASSICAL_FACTOR: f64 = 2.0;
    /// Band for the log-log slope of the interface jump against lambda.
    pub const JUMP_SLOPE: (f64, f64) = (-1.25, -0.75);
    /// Relative floor for the minimal eigenvalue of the coercivity matrix.
    pub const PSD: f64 = 1e-9;
    /// Relative residual of the local lifting identities.
    pub const LIFTING: f64 = 1e-11;
    /// Relative nodal error of the patch tests.
    pub const PATCH: f64 = 1e-9;
    /// Wall-clock budget of the conditioning sweep, seconds.
    pub const SWEEP_SECONDS: u64 = 30;
    /// Wall-clock budget of the fitted convergence study, seconds.
    pub const FITTED_SECONDS: u64 = 60;
}
