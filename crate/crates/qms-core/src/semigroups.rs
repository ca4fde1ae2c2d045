//! Lindbladian generators in GNS canonical form, semigroup evaluation,
//! spectral gap, Dirichlet/gradient forms, continuous CB return time,
//! subalgebra index, and modified log-Sobolev lower bounds with decay checks.

use nalgebra::DVector;

use crate::channels::{
    cp_leq, expectation_from_weighted_fixed_space, ConditionalExpectation, QuantumChannel,
};
use crate::entropy::relative_entropy;
use crate::error::QmsError;
use crate::matcore::{
    hermiticity_residual, identity, kms_weight, max_abs, vec_mat, CMat,
    DensityMatrix, SuperOperator,
};
use crate::tol::Tolerances;

/// A GNS-symmetric Lindbladian `L(x) = Σ_j e^{−w_j/2}({V_j*V_j, x} − 2 V_j* x V_j)`
/// with modular-compatible jumps (`d_φ V_j = e^{−w_j} V_j d_φ`) and the
/// cached Heisenberg generator together with its KMS eigendecomposition.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    pub dim: usize,
    pub jumps: Vec<CMat>,
    pub bohr_weights: Vec<f64>,
    pub reference: DensityMatrix,
    pub generator: SuperOperator,
    w: SuperOperator,
    winv: SuperOperator,
    hat_vals: DVector<f64>,
    hat_vecs: CMat,
}

/// Assemble a Lindbladian from modular-compatible jumps and Bohr weights.
///
/// Preconditions checked: the jump list is closed under adjoints with negated
/// weights, each jump satisfies `‖d_φ V_j − e^{−w_j} V_j d_φ‖ ≤ 1e-8‖V_j‖`,
/// `L(I) = 0` within `1e-10`, the KMS-symmetrized generator is Hermitian, and
/// `e^{−0.1 L}` passes the GNS symmetry check.
pub fn lindbladian_gns(
    jumps: &[CMat],
    bohr_weights: &[f64],
    reference: &DensityMatrix,
    tols: &Tolerances,
) -> Result<Lindbladian, QmsError> {
    let d = reference.dim();
    if jumps.len() != bohr_weights.len() {
        return Err(QmsError::DimensionMismatch(
            "jump and weight lists differ in length".into(),
        ));
    }
    for (idx, v) in jumps.iter().enumerate() {
        if v.nrows() != d || v.ncols() != d {
            return Err(QmsError::DimensionMismatch(format!(
                "jump {idx} has wrong dimension"
            )));
        }
        let scale = max_abs(v).max(1e-300);
        let res = max_abs(&(reference.mat() * v - (v * reference.mat()).scale((-bohr_weights[idx]).exp())));
        if res > 1e-8 * scale {
            return Err(QmsError::ModularMismatch {
                index: idx,
                residual: res / scale,
            });
        }
    }
    // Adjoint closure with negated weights.
    for (idx, v) in jumps.iter().enumerate() {
        let vadj = v.adjoint();
        let scale = max_abs(v).max(1e-300);
        let found = jumps.iter().zip(bohr_weights).any(|(u, &wu)| {
            (wu + bohr_weights[idx]).abs() <= 1e-10 && max_abs(&(u - &vadj)) <= 1e-10 * scale
        });
        if !found {
            return Err(QmsError::PreconditionFailed(format!(
                "jump list not closed under adjoints with negated weights (jump {idx})"
            )));
        }
    }
    let jumps_owned: Vec<CMat> = jumps.to_vec();
    let weights_owned: Vec<f64> = bohr_weights.to_vec();
    let generator = SuperOperator::from_action(d, |x| {
        let mut out = CMat::zeros(d, d);
        for (v, &wj) in jumps_owned.iter().zip(&weights_owned) {
            let vv = v.adjoint() * v;
            out += (&vv * x + x * &vv - (v.adjoint() * x * v).scale(2.0)).scale((-wj / 2.0).exp());
        }
        out
    });
    let id = identity(d);
    if max_abs(&generator.apply(&id)) > 1e-10 {
        return Err(QmsError::PreconditionFailed(
            "generator does not annihilate the identity".into(),
        ));
    }
    let (w, winv) = kms_weight(reference, tols)?;
    let hat = w.compose(&generator).compose(&winv);
    let scale = max_abs(&hat.mat).max(1.0);
    if hermiticity_residual(&hat.mat) > 1e-8 * scale {
        return Err(QmsError::NotSymmetric {
            residual: hermiticity_residual(&hat.mat) / scale,
        });
    }
    let (hat_vals, hat_vecs) = crate::matcore::eig_hermitian(&hat.mat)?;
    let l = Lindbladian {
        dim: d,
        jumps: jumps_owned,
        bohr_weights: weights_owned,
        reference: reference.clone(),
        generator,
        w,
        winv,
        hat_vals,
        hat_vecs,
    };
    // Spot-check GNS symmetry of the semigroup at t = 0.1.
    let spot = evolve(&l, 0.1, tols)?;
    if !spot.gns_verified || !spot.cp_verified || !spot.unital_verified {
        return Err(QmsError::NotSymmetric {
            residual: crate::channels::gns_residual(&spot.s, reference),
        });
    }
    Ok(l)
}

impl Lindbladian {
    /// `T_t = e^{−tL}` as a raw superoperator, via the KMS eigendecomposition.
    pub fn evolve_superop(&self, t: f64) -> SuperOperator {
        let n = self.dim * self.dim;
        let mut hat = CMat::zeros(n, n);
        for i in 0..n {
            let u = self.hat_vecs.column(i);
            let f = (-t * self.hat_vals[i]).exp();
            hat += (u * u.adjoint()).scale(f);
        }
        self.winv
            .compose(&SuperOperator {
                dim: self.dim,
                mat: hat,
            })
            .compose(&self.w)
    }

    /// Indices of the kernel cluster of the symmetrized generator.
    fn kernel_indices(&self, tols: &Tolerances) -> Vec<usize> {
        (0..self.dim * self.dim)
            .filter(|&i| self.hat_vals[i] < tols.gap_cluster)
            .collect()
    }

    /// Number of zero modes of the KMS-symmetrized generator.
    pub fn kernel_dimension(&self, tols: &Tolerances) -> usize {
        self.kernel_indices(tols).len()
    }

    /// `‖x‖²_{2,φ} = tr(d_φ^{1/2} x* d_φ^{1/2} x)`.
    pub fn kms_norm_sq(&self, x: &CMat) -> f64 {
        let wx = self.w.apply(x);
        vec_mat(&wx).norm_squared()
    }
}

/// Evolve the semigroup to time `t ≥ 0`, returning a fully verified channel.
pub fn evolve(l: &Lindbladian, t: f64, tols: &Tolerances) -> Result<QuantumChannel, QmsError> {
    if t < 0.0 {
        return Err(QmsError::DomainError("negative evolution time".into()));
    }
    QuantumChannel::from_superop(l.evolve_superop(t), Some(l.reference.clone()), tols)
}

/// Conditional expectation onto the fixed-point algebra `ker L`.
pub fn fixed_point_expectation(
    l: &Lindbladian,
    tols: &Tolerances,
) -> Result<ConditionalExpectation, QmsError> {
    let kernel = l.kernel_indices(tols);
    if kernel.is_empty() {
        return Err(QmsError::AlgebraClosureFailure { residual: 1.0 });
    }
    let vecs: Vec<crate::matcore::CVec> = kernel
        .iter()
        .map(|&i| l.hat_vecs.column(i).clone_owned())
        .collect();
    let e = expectation_from_weighted_fixed_space(
        &vecs,
        &l.w,
        &l.winv,
        l.reference.clone(),
        l.dim,
        tols,
    )?;
    // T_t ∘ E = E ∘ T_t = E at sampled times.
    for &t in &[0.3, 1.0] {
        let tt = l.evolve_superop(t);
        let scale = e.e.norm_max().max(1.0);
        if max_abs(&(&tt.compose(&e.e).mat - &e.e.mat)) > 1e-8 * scale
            || max_abs(&(&e.e.compose(&tt).mat - &e.e.mat)) > 1e-8 * scale
        {
            return Err(QmsError::PreconditionFailed(format!(
                "semigroup does not commute with its fixed-point expectation at t = {t}"
            )));
        }
    }
    Ok(e)
}

/// Smallest nonzero eigenvalue of the KMS-symmetrized generator.
pub fn spectral_gap(l: &Lindbladian, tols: &Tolerances) -> f64 {
    l.hat_vals
        .iter()
        .copied()
        .filter(|&v| v >= tols.gap_cluster)
        .fold(f64::INFINITY, f64::min)
        .min(f64::INFINITY)
}

/// Dirichlet form `E(x,x) = ⟨x, L(x)⟩_φ` in the KMS inner product.
pub fn dirichlet_form(l: &Lindbladian, x: &CMat) -> f64 {
    let wx = vec_mat(&l.w.apply(x));
    let wlx = vec_mat(&l.w.apply(&l.generator.apply(x)));
    wx.dotc(&wlx).re
}

/// Carré du champ `Γ(x,y) = ½(L(x*)y + x*L(y) − L(x*y))`.
pub fn gradient_form(l: &Lindbladian, x: &CMat, y: &CMat) -> CMat {
    let xs = x.adjoint();
    (l.generator.apply(&xs) * y + &xs * l.generator.apply(y) - l.generator.apply(&(&xs * y)))
        .scale(0.5)
}

/// `‖x‖_Lip² = max{‖Γ(x,x)‖, ‖Γ(x*,x*)‖}`; returns the seminorm itself.
pub fn lipschitz_seminorm(l: &Lindbladian, x: &CMat) -> f64 {
    let g1 = crate::matcore::op_norm(&gradient_form(l, x, x));
    let g2 = crate::matcore::op_norm(&gradient_form(l, &x.adjoint(), &x.adjoint()));
    g1.max(g2).sqrt()
}

fn sandwich_predicate(
    l: &Lindbladian,
    e: &ConditionalExpectation,
    eps: f64,
    t: f64,
    tols: &Tolerances,
) -> Result<bool, QmsError> {
    let tt = l.evolve_superop(t);
    Ok(cp_leq(&e.e.scale(1.0 - eps), &tt, tols.psd_tol)?
        && cp_leq(&tt, &e.e.scale(1.0 + eps), tols.psd_tol)?)
}

/// Continuous CB return time: `t_cb(ε) = inf{t > 0 : (1−ε)E ≤_cp T_t ≤_cp (1+ε)E}`
/// by doubling bracket search from `t_hint` and bisection to `1e-6` relative
/// width.  The sandwich predicate is re-validated at the bracket ends and at
/// 8 interior probes; non-monotonicity is reported as an error.
pub fn t_cb(
    l: &Lindbladian,
    e: &ConditionalExpectation,
    eps: f64,
    t_hint: f64,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(QmsError::PreconditionFailed("ε must lie in (0,1)".into()));
    }
    if !(t_hint > 0.0) {
        return Err(QmsError::PreconditionFailed("t_hint must be positive".into()));
    }
    let p = |t: f64| sandwich_predicate(l, e, eps, t, tols);
    // Bracket: find t_hi with P true, t_lo with P false.
    let (mut t_lo, mut t_hi);
    if p(t_hint)? {
        t_hi = t_hint;
        t_lo = t_hint / 2.0;
        let mut halvings = 0;
        while p(t_lo)? {
            t_hi = t_lo;
            t_lo /= 2.0;
            halvings += 1;
            if halvings > 60 {
                // Sandwich already holds at vanishing times: T_0 = id ≈ E.
                return Ok(t_lo);
            }
        }
    } else {
        t_lo = t_hint;
        t_hi = 2.0 * t_hint;
        let mut doublings = 1;
        while !p(t_hi)? {
            t_lo = t_hi;
            t_hi *= 2.0;
            doublings += 1;
            if doublings > 20 {
                return Err(QmsError::BracketNotFound(format!(
                    "CP sandwich never satisfied up to t = {t_hi:.3e}"
                )));
            }
        }
    }
    let (b_lo, b_hi) = (t_lo, t_hi);
    for _ in 0..60 {
        if t_hi - t_lo <= tols.bisect_rel * t_hi {
            break;
        }
        let mid = 0.5 * (t_lo + t_hi);
        if p(mid)? {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    let t_star = 0.5 * (t_lo + t_hi);
    // Monotonicity probes across the original bracket.
    for k in 1..=8 {
        let t = b_lo + (b_hi - b_lo) * (k as f64) / 9.0;
        let expect = t >= t_star;
        let got = p(t)?;
        if got != expect && (t - t_star).abs() > 10.0 * tols.bisect_rel * t_star {
            return Err(QmsError::PreconditionFailed(format!(
                "CP sandwich predicate non-monotone at t = {t:.6e} (threshold {t_star:.6e})"
            )));
        }
    }
    Ok(t_star)
}

/// Subalgebra index `C_cb(E) = inf{c > 0 : id ≤_cp c·E}` by bisection to
/// `1e-8` relative tolerance.
pub fn cb_index(e: &ConditionalExpectation, tols: &Tolerances) -> Result<f64, QmsError> {
    let d = e.dim();
    let id = SuperOperator::identity(d);
    let p = |c: f64| cp_leq(&id, &e.e.scale(c), tols.psd_tol);
    if p(1.0 + 1e-12)? {
        return Ok(1.0);
    }
    let mut c_lo = 1.0;
    let mut c_hi = 2.0;
    let mut doublings = 1;
    while !p(c_hi)? {
        c_lo = c_hi;
        c_hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(QmsError::BracketNotFound(
                "id ≤_cp c·E never satisfied (reference likely non-faithful)".into(),
            ));
        }
    }
    while c_hi - c_lo > 1e-8 * c_hi {
        let mid = 0.5 * (c_lo + c_hi);
        if p(mid)? {
            c_hi = mid;
        } else {
            c_lo = mid;
        }
    }
    Ok(0.5 * (c_lo + c_hi))
}

/// Report of the computable MLSI lower bounds for one model.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundReport {
    pub model: String,
    pub d: usize,
    pub lambda: f64,
    pub t_cb: f64,
    pub k_cb_of_snapshot: Option<usize>,
    pub c_cb: f64,
    pub bound_tcb: f64,
    pub bound_index: f64,
    pub best_lower: f64,
    pub decay_pass: bool,
    pub diagnostics: String,
}

impl BoundReport {
    pub const CSV_COLUMNS: [&'static str; 9] = [
        "model",
        "d",
        "lambda",
        "t_cb",
        "C_cb",
        "bound_tcb",
        "bound_index",
        "best_lower",
        "decay_pass",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.d.to_string(),
            format!("{:.12e}", self.lambda),
            format!("{:.12e}", self.t_cb),
            format!("{:.12e}", self.c_cb),
            format!("{:.12e}", self.bound_tcb),
            format!("{:.12e}", self.bound_index),
            format!("{:.12e}", self.best_lower),
            self.decay_pass.to_string(),
        ]
    }
}

/// One entry of a decay trajectory: time, entropy to equilibrium, and the
/// exponential bound it must respect.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    pub entropy: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DecayRecord {
    pub initial_entropy: f64,
    pub points: Vec<DecayPoint>,
    pub pass: bool,
}

/// Verify `D(T_{t,*}ρ ‖ E_*ρ) ≤ e^{−t/t_cb} D(ρ‖E_*ρ) + 1e-9` at the given
/// ascending times, and monotone nonincrease along the trajectory.
pub fn decay_check_with(
    l: &Lindbladian,
    e: &ConditionalExpectation,
    t_cb_value: f64,
    rho: &DensityMatrix,
    times: &[f64],
    tols: &Tolerances,
) -> Result<DecayRecord, QmsError> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|&t| t <= 0.0) {
        return Err(QmsError::PreconditionFailed(
            "times must be positive and strictly ascending".into(),
        ));
    }
    let rho = crate::channels::regularize(rho, &l.reference, 1e-9, tols)?;
    let sigma = crate::channels::density_from(e.e_star().apply(rho.mat()), tols)?;
    let d0 = relative_entropy(&rho, &sigma, tols)?;
    let mut points = Vec::with_capacity(times.len());
    let mut pass = true;
    let mut prev = d0;
    for &t in times {
        let tt_star = l.evolve_superop(t).adjoint_trace();
        let rho_t = crate::channels::density_from(tt_star.apply(rho.mat()), tols)?;
        let entropy = relative_entropy(&rho_t, &sigma, tols)?;
        let bound = (-t / t_cb_value).exp() * d0 + 1e-9;
        if entropy > bound || entropy > prev + 1e-9 {
            pass = false;
        }
        prev = entropy;
        points.push(DecayPoint { t, entropy, bound });
    }
    Ok(DecayRecord {
        initial_entropy: d0,
        points,
        pass,
    })
}

/// Convenience wrapper computing the fixed-point expectation and `t_cb(0.1)`
/// before running the trajectory check.
pub fn decay_check(
    l: &Lindbladian,
    rho: &DensityMatrix,
    times: &[f64],
    tols: &Tolerances,
) -> Result<DecayRecord, QmsError> {
    let e = fixed_point_expectation(l, tols)?;
    let lambda = spectral_gap(l, tols);
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(QmsError::NotErgodic(
            "zero spectral gap: no decay rate available".into(),
        ));
    }
    let tcb = t_cb(l, &e, 0.1, 1.0 / lambda, tols)?;
    decay_check_with(l, &e, tcb, rho, times, tols)
}

/// Assemble the full bound report for a model: spectral gap, `t_cb(0.1)`,
/// `C_cb`, the two MLSI lower bounds, their consistency inequality, and a
/// decay spot check over seeded random states.
pub fn mlsi_lower_bounds(
    l: &Lindbladian,
    model: &str,
    tols: &Tolerances,
) -> Result<BoundReport, QmsError> {
    let lambda = spectral_gap(l, tols);
    if !lambda.is_finite() || lambda < tols.gap_cluster {
        return Ok(BoundReport {
            model: model.to_string(),
            d: l.dim,
            lambda: 0.0,
            t_cb: f64::INFINITY,
            k_cb_of_snapshot: None,
            c_cb: f64::NAN,
            bound_tcb: 0.0,
            bound_index: 0.0,
            best_lower: 0.0,
            decay_pass: false,
            diagnostics: "no decay: zero spectral gap".into(),
        });
    }
    let e = fixed_point_expectation(l, tols)?;
    let tcb = t_cb(l, &e, 0.1, 1.0 / lambda, tols)?;
    let c_cb = cb_index(&e, tols)?;
    let bound_tcb = 1.0 / (2.0 * tcb);
    let bound_index = lambda / (2.0 * (10.0 * c_cb).ln());
    let best_lower = bound_tcb.max(bound_index);
    if tcb > (10.0 * c_cb).ln() / lambda + 1e-6 {
        return Err(QmsError::PreconditionFailed(format!(
            "t_cb consistency violated: t_cb = {tcb} > ln(10 C_cb)/λ = {}",
            (10.0 * c_cb).ln() / lambda
        )));
    }
    if best_lower > lambda + 1e-9 {
        return Err(QmsError::PreconditionFailed(format!(
            "ordering chain violated: best lower bound {best_lower} exceeds gap {lambda}"
        )));
    }
    let mut rng = crate::sampling::rng(0xdecaf);
    let times: Vec<f64> = (1..=4).map(|k| k as f64 * tcb / 2.0).collect();
    let mut decay_pass = true;
    for _ in 0..3 {
        let rho = crate::sampling::random_density(&mut rng, l.dim);
        let rec = decay_check_with(l, &e, tcb, &rho, &times, tols)?;
        decay_pass &= rec.pass;
    }
    Ok(BoundReport {
        model: model.to_string(),
        d: l.dim,
        lambda,
        t_cb: tcb,
        k_cb_of_snapshot: None,
        c_cb,
        bound_tcb,
        bound_index,
        best_lower,
        decay_pass,
        diagnostics: String::new(),
    })
}

/// Poincaré inequality check: returns
/// `(λ‖x − E(x)‖²_{2,φ}, E(x,x))`; the first must not exceed the second.
pub fn poincare_check(
    l: &Lindbladian,
    e: &ConditionalExpectation,
    x: &CMat,
    tols: &Tolerances,
) -> Result<(f64, f64), QmsError> {
    let lambda = spectral_gap(l, tols);
    let lambda = if lambda.is_finite() { lambda } else { 0.0 };
    let diff = x - e.e.apply(x);
    let lhs = lambda * l.kms_norm_sq(&diff);
    let rhs = dirichlet_form(l, x);
    Ok((lhs, rhs))
}

/// The zero generator on `M_d` (empty jump list) — fixed points everything.
pub fn zero_lindbladian(d: usize, tols: &Tolerances) -> Result<Lindbladian, QmsError> {
    lindbladian_gns(&[], &[], &DensityMatrix::maximally_mixed(d), tols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{cr, matrix_unit, unvec};
    use crate::sampling;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    /// Jumps realizing `L = id − E_τ` on `M_d`: all matrix units scaled by
    /// `1/sqrt(2d)`, zero weights, maximally mixed reference.
    fn depolarizing_lindbladian(d: usize) -> Lindbladian {
        let scale = 1.0 / (2.0 * d as f64).sqrt();
        let mut jumps = Vec::new();
        for k in 0..d {
            for l in 0..d {
                jumps.push(matrix_unit(d, k, l).scale(scale));
            }
        }
        let weights = vec![0.0; jumps.len()];
        lindbladian_gns(&jumps, &weights, &DensityMatrix::maximally_mixed(d), &tols()).unwrap()
    }

    fn pauli_x() -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = cr(1.0);
        m[(1, 0)] = cr(1.0);
        m
    }

    fn pauli_z() -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cr(1.0);
        m[(1, 1)] = cr(-1.0);
        m
    }

    /// Thermal weighted matrix units on a faithful diagonal reference.
    fn thermal_lindbladian(probs: &[f64]) -> Lindbladian {
        let d = probs.len();
        let reference = DensityMatrix::from_probs(probs).unwrap();
        let mut jumps = Vec::new();
        let mut weights = Vec::new();
        for k in 0..d {
            for l in 0..d {
                if k != l {
                    jumps.push(matrix_unit(d, k, l));
                    weights.push((probs[l] / probs[k]).ln());
                }
            }
        }
        lindbladian_gns(&jumps, &weights, &reference, &tols()).unwrap()
    }

    #[test]
    fn pauli_x_jump_generator_action() {
        let sx = pauli_x();
        let l = lindbladian_gns(&[sx.clone()], &[0.0], &DensityMatrix::maximally_mixed(2), &tols())
            .unwrap();
        assert!(max_abs(&l.generator.apply(&identity(2))) < 1e-12);
        assert!(max_abs(&l.generator.apply(&sx)) < 1e-12);
        let sz = pauli_z();
        assert!(max_abs(&(&l.generator.apply(&sz) - &sz.scale(4.0))) < 1e-12);
        assert!((spectral_gap(&l, &tols()) - 4.0).abs() < 1e-10);
        // Kernel = span{I, σ_x}, an abelian algebra.
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        assert_eq!(e.algebra_basis.len(), 2);
    }

    #[test]
    fn zero_generator_fixes_everything() {
        let l = zero_lindbladian(3, &tols()).unwrap();
        assert!(max_abs(&l.generator.mat) < 1e-15);
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        assert_eq!(e.algebra_basis.len(), 9);
        let t = evolve(&l, 1.7, &tols()).unwrap();
        assert!(max_abs(&(&t.s.mat - &SuperOperator::identity(3).mat)) < 1e-12);
        let report = mlsi_lower_bounds(&l, "zero", &tols()).unwrap();
        assert_eq!(report.lambda, 0.0);
        assert!(!report.decay_pass);
        assert!(report.diagnostics.contains("no decay"));
    }

    #[test]
    fn modular_mismatch_is_detected() {
        let reference = DensityMatrix::from_probs(&[0.7, 0.3]).unwrap();
        // σ_x is not a modular eigenvector of a non-flat reference at w = 0.
        let err = lindbladian_gns(&[pauli_x()], &[0.0], &reference, &tols()).unwrap_err();
        assert!(matches!(err, QmsError::ModularMismatch { .. }));
    }

    #[test]
    fn depolarizing_semigroup_closed_form() {
        let d = 3;
        let l = depolarizing_lindbladian(d);
        // Generator is id − E_τ.
        let e_tau = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
        let expect = SuperOperator::identity(d).sub(&e_tau);
        assert!(max_abs(&(&l.generator.mat - &expect.mat)) < 1e-12);
        for &t in &[0.0, 0.4, 1.3] {
            let tt = evolve(&l, t, &tols()).unwrap();
            let closed = SuperOperator::identity(d)
                .scale((-t).exp())
                .add(&e_tau.scale(1.0 - (-t).exp()));
            assert!(max_abs(&(&tt.s.mat - &closed.mat)) < 1e-10);
            assert!(tt.cp_verified && tt.unital_verified && tt.gns_verified);
        }
        // Semigroup law.
        let (s, t) = (0.35, 0.8);
        let lhs = l.evolve_superop(s).compose(&l.evolve_superop(t));
        let rhs = l.evolve_superop(s + t);
        assert!(max_abs(&(&lhs.mat - &rhs.mat)) < 1e-10);
    }

    #[test]
    fn depolarizing_gap_fixed_points_tcb_index() {
        let d = 2;
        let l = depolarizing_lindbladian(d);
        assert!((spectral_gap(&l, &tols()) - 1.0).abs() < 1e-10);
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        assert_eq!(e.algebra_basis.len(), 1);
        for &eps in &[0.05, 0.1, 0.2] {
            let t = t_cb(&l, &e, eps, 1.0, &tols()).unwrap();
            let closed = ((d * d - 1) as f64 / eps).ln();
            assert!((t - closed).abs() < 1e-6 * closed, "eps {eps}: {t} vs {closed}");
        }
        // Monotone in ε.
        let t1 = t_cb(&l, &e, 0.1, 1.0, &tols()).unwrap();
        let t2 = t_cb(&l, &e, 0.2, 1.0, &tols()).unwrap();
        assert!(t2 <= t1);
        let c = cb_index(&e, &tols()).unwrap();
        assert!((c - (d * d) as f64).abs() < 1e-6);
    }

    #[test]
    fn cb_index_of_identity_expectation_is_one() {
        let l = zero_lindbladian(2, &tols()).unwrap();
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        assert!((cb_index(&e, &tols()).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dirichlet_and_gradient_forms() {
        let d = 2;
        let l = depolarizing_lindbladian(d);
        // x = I: everything vanishes.
        assert!(dirichlet_form(&l, &identity(d)).abs() < 1e-12);
        assert!(max_abs(&gradient_form(&l, &identity(d), &identity(d))) < 1e-12);
        assert!(lipschitz_seminorm(&l, &identity(d)) < 1e-6);
        // Depolarizing on M_2, x = σ_z: L(σ_z) = σ_z, L(σ_z²) = L(I) = 0,
        // so Γ = σ_z² = I and ‖x‖_Lip = 1.
        let sz = pauli_z();
        let g = gradient_form(&l, &sz, &sz);
        assert!(max_abs(&(&g - &identity(d))) < 1e-12);
        assert!((lipschitz_seminorm(&l, &sz) - 1.0).abs() < 1e-10);
        // Dirichlet form of σ_z: ⟨σ_z, σ_z⟩_τ = 1 with trace reference.
        assert!((dirichlet_form(&l, &sz) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_model_invariants_and_decay() {
        let l = thermal_lindbladian(&[0.5, 0.3, 0.2]);
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        // Connected jumps: ergodic, kernel = C·I.
        assert_eq!(e.algebra_basis.len(), 1);
        let tt = evolve(&l, 0.25, &tols()).unwrap();
        assert!(tt.cp_verified && tt.unital_verified && tt.gns_verified);
        assert!(!tt.trace_preserving_verified, "thermal semigroup is unital, not trace-preserving");
        let report = mlsi_lower_bounds(&l, "thermal", &tols()).unwrap();
        assert!(report.lambda > 0.0);
        assert!(report.decay_pass);
        assert!(report.best_lower <= report.lambda + 1e-9);
        let mut rng = sampling::rng(21);
        let rho = sampling::random_density(&mut rng, 3);
        let rec = decay_check(&l, &rho, &[0.2, 0.5, 1.0, 2.0], &tols()).unwrap();
        assert!(rec.pass);
    }

    #[test]
    fn poincare_inequality_and_saturation() {
        let l = thermal_lindbladian(&[0.6, 0.4]);
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        // Kernel element: zero on both sides.
        let (lhs, rhs) = poincare_check(&l, &e, &identity(2), &tols()).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
        // Gap eigenvector saturates.
        let gap = spectral_gap(&l, &tols());
        let idx = (0..4).find(|&i| l.hat_vals[i] >= tols().gap_cluster).unwrap();
        assert!((l.hat_vals[idx] - gap).abs() < 1e-12);
        let x = unvec(&(&l.winv.mat * l.hat_vecs.column(idx).clone_owned()), 2);
        let (lhs, rhs) = poincare_check(&l, &e, &x, &tols()).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
        // Random samples.
        let mut rng = sampling::rng(22);
        for _ in 0..50 {
            let x = sampling::random_complex(&mut rng, 2);
            let (lhs, rhs) = poincare_check(&l, &e, &x, &tols()).unwrap();
            assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn depolarizing_bound_report_closed_forms() {
        let l = depolarizing_lindbladian(2);
        let report = mlsi_lower_bounds(&l, "depolarizing", &tols()).unwrap();
        assert!((report.lambda - 1.0).abs() < 1e-10);
        assert!((report.t_cb - 30.0_f64.ln()).abs() < 1e-5);
        assert!((report.c_cb - 4.0).abs() < 1e-6);
        assert!((report.bound_tcb - 1.0 / (2.0 * 30.0_f64.ln())).abs() < 1e-5);
        assert!((report.bound_index - 1.0 / (2.0 * 40.0_f64.ln())).abs() < 1e-6);
        assert!(report.decay_pass);
        assert!(report.best_lower <= report.lambda + 1e-9);
    }

    #[test]
    fn snapshot_discrete_return_time_consistency() {
        let l = depolarizing_lindbladian(2);
        let e_cont = fixed_point_expectation(&l, &tols()).unwrap();
        let tcb = t_cb(&l, &e_cont, 0.1, 1.0, &tols()).unwrap();
        // Nudge above the bisection midpoint so the snapshot lies on the
        // feasible side of the threshold within the 1e-6 relative tolerance.
        let tcb = tcb * (1.0 + 1e-5);
        for m in [2usize, 3] {
            let snap = evolve(&l, tcb / (2.0 * m as f64), &tols()).unwrap();
            let k = crate::channels::k_cb(&snap, &e_cont, 0.1, 4 * m, &tols()).unwrap();
            assert!(k <= m, "m = {m}: k_cb = {k}");
        }
    }

    #[test]
    fn decay_check_invariant_state_is_flat_zero() {
        let l = depolarizing_lindbladian(3);
        let rec = decay_check(&l, &DensityMatrix::maximally_mixed(3), &[0.5, 1.0, 2.0], &tols())
            .unwrap();
        assert!(rec.initial_entropy.abs() < 1e-9);
        assert!(rec.pass);
        for p in &rec.points {
            assert!(p.entropy.abs() < 1e-9);
        }
    }

    #[test]
    fn decay_rate_depolarizing_exceeds_one() {
        // α_c ≥ ½ for the depolarizing semigroup: entropy decays at rate ≥ 1.
        let l = depolarizing_lindbladian(2);
        let e = fixed_point_expectation(&l, &tols()).unwrap();
        let mut rng = sampling::rng(23);
        for _ in 0..5 {
            let rho = sampling::random_density(&mut rng, 2);
            let rec = decay_check_with(&l, &e, 1.0, &rho, &[0.3, 0.8, 1.5, 3.0], &tols()).unwrap();
            assert!(rec.pass, "decay slower than e^{{-t}} for depolarizing");
        }
    }
}
