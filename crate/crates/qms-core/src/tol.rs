/// Numerical tolerances used throughout the library.
///
/// Every threshold is a configuration value with the documented default;
/// callers (in particular the CLI) may override individual fields per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance for `HermitianMatrix` inputs.
    pub hermitian_tol: f64,
    /// Slack allowed below zero for positive-semidefiniteness checks.
    pub psd_tol: f64,
    /// Slack for unit-trace checks on density matrices.
    pub trace_tol: f64,
    /// Eigenvalues below this cutoff are treated as outside the support.
    pub support_cutoff: f64,
    /// Cluster threshold for the eigenvalue-1 fixed-point space of a channel.
    pub fixed_point_cluster: f64,
    /// Cluster threshold separating the kernel of a generator from its gap.
    pub gap_cluster: f64,
    /// Relative width at which `t_cb`-style bisections stop.
    pub bisect_rel: f64,
    /// Absolute tolerance of adaptive quadrature.
    pub quad_abs_tol: f64,
    /// Maximum number of adaptive-quadrature subdivisions.
    pub quad_max_subdivisions: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian_tol: 1e-12,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            support_cutoff: 1e-14,
            fixed_point_cluster: 1e-8,
            gap_cluster: 1e-9,
            bisect_rel: 1e-6,
            quad_abs_tol: 1e-8,
            quad_max_subdivisions: 1 << 14,
        }
    }
}
