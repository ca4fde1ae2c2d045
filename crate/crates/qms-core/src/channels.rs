//! Quantum Markov maps: construction and verification, CP-order comparison,
//! multiplicative domain and conditional expectation, discrete CB return time
//! `k_cb`, and entropy-contraction checks.

use crate::entropy::{k_of_c, relative_entropy};
use crate::error::QmsError;
use crate::matcore::{
    choi, eig_hermitian, hermitize, identity, kms_weight, max_abs, op_norm, trace, unvec, CMat,
    DensityMatrix, SuperOperator,
};
use crate::sampling;
use crate::tol::Tolerances;

/// `Φ ≤_cp Ψ` iff `Ψ − Φ` is completely positive, i.e. its Choi matrix is
/// positive semidefinite within `tol`.
pub fn cp_leq(a: &SuperOperator, b: &SuperOperator, tol: f64) -> Result<bool, QmsError> {
    choi(&b.sub(a)).is_psd(tol)
}

/// Residual of the GNS-symmetry identity `M_φ ∘ S = S_* ∘ M_φ` with
/// `M_φ(X) = d_φ X` and `S_*` the trace dual.
pub fn gns_residual(s: &SuperOperator, reference: &DensityMatrix) -> f64 {
    let d = s.dim;
    let m_phi = SuperOperator::sandwich(reference.mat(), &identity(d));
    max_abs(&(&m_phi.compose(s).mat - &s.adjoint_trace().compose(&m_phi).mat))
}

/// A Heisenberg-picture quantum Markov map together with its verified flags
/// and optional reference state.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    pub s: SuperOperator,
    pub reference: Option<DensityMatrix>,
    pub cp_verified: bool,
    pub unital_verified: bool,
    pub trace_preserving_verified: bool,
    pub gns_verified: bool,
}

impl QuantumChannel {
    /// Wrap a superoperator, computing every verification flag.  The GNS
    /// check runs against `reference`, or against the trace (maximally mixed
    /// reference) when absent — in which case it reduces to trace symmetry
    /// `S = S*`.
    pub fn from_superop(
        s: SuperOperator,
        reference: Option<DensityMatrix>,
        tols: &Tolerances,
    ) -> Result<Self, QmsError> {
        let d = s.dim;
        if let Some(r) = &reference {
            if r.dim() != d {
                return Err(QmsError::DimensionMismatch(
                    "reference dimension differs from channel dimension".into(),
                ));
            }
        }
        let cp_verified = choi(&s).is_psd(tols.psd_tol)?;
        let id = identity(d);
        let unital_verified = max_abs(&(&s.apply(&id) - &id)) <= 1e-10;
        let trace_preserving_verified = max_abs(&(&s.adjoint_trace().apply(&id) - &id)) <= 1e-10;
        let eff = reference
            .clone()
            .unwrap_or_else(|| DensityMatrix::maximally_mixed(d));
        let scale = s.norm_max().max(1.0);
        let gns_verified = gns_residual(&s, &eff) <= 1e-9 * scale;
        Ok(QuantumChannel {
            s,
            reference,
            cp_verified,
            unital_verified,
            trace_preserving_verified,
            gns_verified,
        })
    }

    /// `S(X) = Σ_j K_j* X K_j` (Heisenberg) or the trace dual of that map
    /// (Schrödinger input).
    pub fn from_kraus(
        kraus: &[CMat],
        direction: KrausDirection,
        reference: Option<DensityMatrix>,
        tols: &Tolerances,
    ) -> Result<Self, QmsError> {
        if kraus.is_empty() {
            return Err(QmsError::DimensionMismatch("empty Kraus list".into()));
        }
        let d = kraus[0].nrows();
        for k in kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(QmsError::DimensionMismatch(
                    "Kraus operators must share a common square dimension".into(),
                ));
            }
        }
        let heis = SuperOperator::from_action(d, |x| {
            let mut out = CMat::zeros(d, d);
            for k in kraus {
                out += k.adjoint() * x * k;
            }
            out
        });
        let s = match direction {
            KrausDirection::Heisenberg => heis,
            KrausDirection::Schrodinger => heis.adjoint_trace(),
        };
        Self::from_superop(s, reference, tols)
    }

    pub fn dim(&self) -> usize {
        self.s.dim
    }

    /// The reference state the symmetry notions are taken against: the
    /// declared one, or the trace.
    pub fn effective_reference(&self) -> DensityMatrix {
        self.reference
            .clone()
            .unwrap_or_else(|| DensityMatrix::maximally_mixed(self.dim()))
    }

    /// Schrödinger-picture pre-adjoint (trace dual).
    pub fn pre_adjoint(&self) -> SuperOperator {
        self.s.adjoint_trace()
    }

    /// The KMS symmetrization `W S W^{-1}`.
    pub fn kms_hat(&self, tols: &Tolerances) -> Result<SuperOperator, QmsError> {
        crate::matcore::kms_symmetrize(&self.s, &self.effective_reference(), tols)
    }

    /// The symmetrized square `P = W^{-1}(Ŝ*Ŝ)W`: equal to the trace-dual
    /// composition `Φ*Φ` for the trace reference and to `Φ²` for a
    /// GNS-symmetric `Φ` (which is self-adjoint in the φ-GNS inner product).
    /// `Ŝ*Ŝ` is Hermitian positive semidefinite unconditionally, so the
    /// fixed-point computation stays a Hermitian eigenproblem.
    pub fn symmetrized_square(&self, tols: &Tolerances) -> Result<SuperOperator, QmsError> {
        let reference = self.effective_reference();
        let (w, winv) = kms_weight(&reference, tols)?;
        let shat = w.compose(&self.s).compose(&winv);
        let phat = SuperOperator {
            dim: self.s.dim,
            mat: shat.mat.adjoint() * &shat.mat,
        };
        Ok(winv.compose(&phat).compose(&w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrausDirection {
    Heisenberg,
    Schrodinger,
}

/// A φ-preserving conditional expectation onto a subalgebra `N`, together
/// with a KMS-orthonormal operator basis of `N`.
#[derive(Debug, Clone)]
pub struct ConditionalExpectation {
    pub e: SuperOperator,
    pub algebra_basis: Vec<CMat>,
    pub reference: DensityMatrix,
}

impl ConditionalExpectation {
    /// The ergodic projection `X ↦ tr(d_φ X)·I`.
    pub fn ergodic(reference: DensityMatrix) -> Self {
        let e = SuperOperator::ergodic_expectation(&reference);
        let d = reference.dim();
        // KMS-normalized basis of C·I is I itself (‖I‖_{2,φ} = 1).
        ConditionalExpectation {
            e,
            algebra_basis: vec![identity(d)],
            reference,
        }
    }

    pub fn dim(&self) -> usize {
        self.e.dim
    }

    pub fn e_star(&self) -> SuperOperator {
        self.e.adjoint_trace()
    }

    /// Assert every structural invariant: idempotence, complete positivity,
    /// unitality, φ-preservation, product closure of the range, and the
    /// bimodule property on pseudo-random probes.
    pub fn validate(&self, tols: &Tolerances) -> Result<(), QmsError> {
        let d = self.dim();
        let scale = self.e.norm_max().max(1.0);
        let idem = max_abs(&(&self.e.compose(&self.e).mat - &self.e.mat));
        if idem > 1e-9 * scale {
            return Err(QmsError::PreconditionFailed(format!(
                "conditional expectation not idempotent (residual {idem:.3e})"
            )));
        }
        if !choi(&self.e).is_psd(tols.psd_tol)? {
            return Err(QmsError::PreconditionFailed(
                "conditional expectation is not completely positive".into(),
            ));
        }
        let id = identity(d);
        if max_abs(&(&self.e.apply(&id) - &id)) > 1e-10 {
            return Err(QmsError::PreconditionFailed(
                "conditional expectation is not unital".into(),
            ));
        }
        // φ-preservation: tr(d_φ E(X)) = tr(d_φ X) on probes.
        let mut rng = sampling::rng(0x5eed);
        for _ in 0..3 {
            let x = sampling::random_complex(&mut rng, d);
            let lhs = trace(&(self.reference.mat() * self.e.apply(&x)));
            let rhs = trace(&(self.reference.mat() * &x));
            if (lhs - rhs).norm() > 1e-8 * max_abs(&x).max(1.0) {
                return Err(QmsError::PreconditionFailed(format!(
                    "conditional expectation does not preserve φ (residual {:.3e})",
                    (lhs - rhs).norm()
                )));
            }
        }
        // Product closure of the range: E(ab) = ab for basis elements.
        let mut worst: f64 = 0.0;
        for a in &self.algebra_basis {
            for b in &self.algebra_basis {
                let ab = a * b;
                let res = max_abs(&(&self.e.apply(&ab) - &ab)) / max_abs(&ab).max(1.0);
                worst = worst.max(res);
            }
        }
        if worst > 1e-8 {
            return Err(QmsError::AlgebraClosureFailure { residual: worst });
        }
        // Bimodule property on pseudo-random probes.
        for _ in 0..2 {
            let x = sampling::random_complex(&mut rng, d);
            let ex = self.e.apply(&x);
            for a in &self.algebra_basis {
                for b in &self.algebra_basis {
                    let lhs = self.e.apply(&(a * &x * b));
                    let rhs = a * &ex * b;
                    let sc = max_abs(&rhs).max(1.0);
                    if max_abs(&(&lhs - &rhs)) > 1e-8 * sc {
                        return Err(QmsError::PreconditionFailed(format!(
                            "bimodule property violated (residual {:.3e})",
                            max_abs(&(&lhs - &rhs)) / sc
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Conditional expectation onto the multiplicative domain of a (GNS-)
/// symmetric channel: the eigenvalue-1 eigenspace of the Hermitian
/// symmetrized square `Ŝ*Ŝ`, transported back to the unweighted picture.
pub fn multiplicative_domain(
    phi: &QuantumChannel,
    tols: &Tolerances,
) -> Result<ConditionalExpectation, QmsError> {
    if !phi.unital_verified || !phi.cp_verified {
        return Err(QmsError::PreconditionFailed(
            "multiplicative domain requires a unital completely positive map".into(),
        ));
    }
    if !phi.gns_verified {
        return Err(QmsError::NotSymmetric {
            residual: gns_residual(&phi.s, &phi.effective_reference()),
        });
    }
    let reference = phi.effective_reference();
    let d = phi.dim();
    let (w, winv) = kms_weight(&reference, tols)?;
    let shat = w.compose(&phi.s).compose(&winv);
    let phat = shat.mat.adjoint() * &shat.mat;
    let (vals, vecs) = eig_hermitian(&phat)?;
    let cluster: Vec<usize> = (0..d * d)
        .filter(|&i| vals[i] > 1.0 - tols.fixed_point_cluster)
        .collect();
    if cluster.is_empty() {
        return Err(QmsError::AlgebraClosureFailure { residual: 1.0 });
    }
    expectation_from_weighted_fixed_space(
        &cluster.iter().map(|&i| vecs.column(i).clone_owned()).collect::<Vec<_>>(),
        &w,
        &winv,
        reference,
        d,
        tols,
    )
}

/// Build the φ-preserving conditional expectation whose range is spanned (in
/// the KMS-weighted picture) by the given orthonormal vectors, and validate
/// every invariant.
pub(crate) fn expectation_from_weighted_fixed_space(
    weighted_vectors: &[crate::matcore::CVec],
    w: &SuperOperator,
    winv: &SuperOperator,
    reference: DensityMatrix,
    d: usize,
    tols: &Tolerances,
) -> Result<ConditionalExpectation, QmsError> {
    // HS projection in the weighted picture.
    let mut pw = CMat::zeros(d * d, d * d);
    for u in weighted_vectors {
        pw += u * u.adjoint();
    }
    let pw = SuperOperator { dim: d, mat: pw };
    let e = winv.compose(&pw).compose(w);
    let basis: Vec<CMat> = weighted_vectors
        .iter()
        .map(|u| unvec(&(&winv.mat * u), d))
        .collect();
    let ce = ConditionalExpectation {
        e,
        algebra_basis: basis,
        reference,
    };
    ce.validate(tols)?;
    Ok(ce)
}

/// Smallest `k ≤ k_max` with `(1−ε)E ≤_cp P^k ≤_cp (1+ε)E`, where `P` is the
/// symmetrized square of `Φ` (`Φ*Φ` in the tracial case, `Φ²` in the GNS
/// case).
pub fn k_cb(
    phi: &QuantumChannel,
    e: &ConditionalExpectation,
    eps: f64,
    k_max: usize,
    tols: &Tolerances,
) -> Result<usize, QmsError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(QmsError::PreconditionFailed("ε must lie in (0,1)".into()));
    }
    let p = phi.symmetrized_square(tols)?;
    let lower = e.e.scale(1.0 - eps);
    let upper = e.e.scale(1.0 + eps);
    let mut pk = p.clone();
    for k in 1..=k_max {
        if cp_leq(&lower, &pk, tols.psd_tol)? && cp_leq(&pk, &upper, tols.psd_tol)? {
            return Ok(k);
        }
        pk = pk.compose(&p);
    }
    Err(QmsError::NotReached { k_max })
}

/// `(1−δ)ρ + δ·d_φ` — the faithfulness regularization applied before entropy
/// evaluations.
pub fn regularize(
    rho: &DensityMatrix,
    d_phi: &DensityMatrix,
    delta: f64,
    tols: &Tolerances,
) -> Result<DensityMatrix, QmsError> {
    DensityMatrix::new(
        rho.mat().scale(1.0 - delta) + d_phi.mat().scale(delta),
        tols,
    )
}

pub(crate) fn density_from(mat: CMat, tols: &Tolerances) -> Result<DensityMatrix, QmsError> {
    let h = hermitize(&mat);
    let tr = trace(&h).re;
    if (tr - 1.0).abs() > 1e-8 {
        return Err(QmsError::PreconditionFailed(format!(
            "state trace drifted to {tr}"
        )));
    }
    DensityMatrix::new(h.scale(1.0 / tr), tols)
}

#[derive(Debug, Clone, Copy)]
pub struct ContractionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// The entropy-contraction inequality
/// `D(Φ_*ρ ‖ Φ_*E_*ρ) ≤ (1 − 1/(2 k_cb)) · D(ρ ‖ E_*ρ)` evaluated on one
/// state (Schrödinger picture).  The input is regularized toward the
/// reference with weight `1e-9`.
pub fn entropy_contraction_check(
    phi: &QuantumChannel,
    e: &ConditionalExpectation,
    k_cb_value: usize,
    rho: &DensityMatrix,
    tols: &Tolerances,
) -> Result<ContractionCheck, QmsError> {
    let d_phi = phi.effective_reference();
    let rho = regularize(rho, &d_phi, 1e-9, tols)?;
    let phi_star = phi.pre_adjoint();
    let e_star = e.e_star();
    let sigma = density_from(e_star.apply(rho.mat()), tols)?;
    let lhs = relative_entropy(
        &density_from(phi_star.apply(rho.mat()), tols)?,
        &density_from(phi_star.apply(sigma.mat()), tols)?,
        tols,
    )?;
    let den = relative_entropy(&rho, &sigma, tols)?;
    let rhs = (1.0 - 1.0 / (2.0 * k_cb_value as f64)) * den;
    Ok(ContractionCheck {
        lhs,
        rhs,
        ratio: lhs / den.max(1e-12),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DifferenceCheck {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
}

/// The entropy-difference lemma chain for a unital, trace-preserving channel
/// applied to states:
/// `D(ρ‖Φ*Φ(ω)) ≤ [H(ρ) − H(Φρ)] + D(ρ‖ω) ≤ tr((id − Φ*Φ)(ρ) ln ρ) + D(ρ‖ω)`.
pub fn entropy_difference_check(
    phi: &QuantumChannel,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    tols: &Tolerances,
) -> Result<DifferenceCheck, QmsError> {
    if !phi.unital_verified || !phi.trace_preserving_verified {
        return Err(QmsError::PreconditionFailed(
            "entropy difference lemma needs a unital trace-preserving channel".into(),
        ));
    }
    let s = &phi.s;
    let s_star = phi.pre_adjoint();
    let ss = s_star.compose(s);
    let d_ro = relative_entropy(rho, omega, tols)?;
    let lhs = relative_entropy(rho, &density_from(ss.apply(omega.mat()), tols)?, tols)?;
    let h_rho = crate::entropy::entropy_functional(rho, tols)?;
    let h_phirho =
        crate::entropy::entropy_functional(&density_from(s.apply(rho.mat()), tols)?, tols)?;
    let mid = (h_rho - h_phirho) + d_ro;
    let ln_rho = crate::matcore::mat_ln(rho.mat(), tols)?;
    let moved = rho.mat() - ss.apply(rho.mat());
    let rhs = trace(&(&moved * &ln_rho)).re + d_ro;
    Ok(DifferenceCheck { lhs, mid, rhs })
}

/// The general-ε constant of the approximate-projection lemma:
/// `(1−ε)/(1+ε) − ε/((1−ε)·k(2))`.
pub fn approximate_projection_constant(eps: f64) -> Result<f64, QmsError> {
    let k2 = k_of_c(2.0)?;
    Ok((1.0 - eps) / (1.0 + eps) - eps / ((1.0 - eps) * k2))
}

#[derive(Debug, Clone, Copy)]
pub struct ProjectionCheck {
    pub lhs: f64,
    pub rhs: f64,
}

/// The approximate-projection lemma at ε = 0.1: for
/// `0.9·E ≤_cp Ψ ≤_cp 1.1·E` with `E∘Ψ = E`,
/// `D(ρ‖Ψ_*ρ) ≥ ½ D(ρ‖E_*ρ)`.
pub fn approximate_projection_check(
    psi: &QuantumChannel,
    e: &ConditionalExpectation,
    rho: &DensityMatrix,
    tols: &Tolerances,
) -> Result<ProjectionCheck, QmsError> {
    let eps = 0.1;
    if !cp_leq(&e.e.scale(1.0 - eps), &psi.s, tols.psd_tol)? {
        return Err(QmsError::PreconditionFailed(
            "lower CP ordering (1-ε)E ≤ Ψ fails".into(),
        ));
    }
    if !cp_leq(&psi.s, &e.e.scale(1.0 + eps), tols.psd_tol)? {
        return Err(QmsError::PreconditionFailed(
            "upper CP ordering Ψ ≤ (1+ε)E fails".into(),
        ));
    }
    let proj_residual = max_abs(&(&e.e.compose(&psi.s).mat - &e.e.mat));
    if proj_residual > 1e-9 * e.e.norm_max().max(1.0) {
        return Err(QmsError::PreconditionFailed(format!(
            "E∘Ψ ≠ E (residual {proj_residual:.3e})"
        )));
    }
    let d_phi = psi.effective_reference();
    let rho = regularize(rho, &d_phi, 1e-9, tols)?;
    let lhs = relative_entropy(
        &rho,
        &density_from(psi.pre_adjoint().apply(rho.mat()), tols)?,
        tols,
    )?;
    let rhs = 0.5 * relative_entropy(&rho, &density_from(e.e_star().apply(rho.mat()), tols)?, tols)?;
    Ok(ProjectionCheck { lhs, rhs })
}

/// Empirical lower bound of the entropy contraction coefficient
/// `α(Φ) = sup_ρ D(Φ_*ρ‖Φ_*E_*ρ)/D(ρ‖E_*ρ)` by multi-start coordinate
/// perturbation ascent over the state simplex.  Never a certificate.
pub fn contraction_coefficient_estimate(
    phi: &QuantumChannel,
    e: &ConditionalExpectation,
    restarts: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    let d = phi.dim();
    let phi_star = phi.pre_adjoint();
    let e_star = e.e_star();
    let eval = |rho: &DensityMatrix| -> Option<f64> {
        let sigma = density_from(e_star.apply(rho.mat()), tols).ok()?;
        let den = relative_entropy(rho, &sigma, tols).ok()?;
        if !(den > 1e-12) {
            return None;
        }
        let lhs = relative_entropy(
            &density_from(phi_star.apply(rho.mat()), tols).ok()?,
            &density_from(phi_star.apply(sigma.mat()), tols).ok()?,
            tols,
        )
        .ok()?;
        if !lhs.is_finite() {
            return None;
        }
        Some(lhs / den)
    };
    let project = |mat: &CMat| -> Option<DensityMatrix> {
        let (vals, vecs) = eig_hermitian(mat).ok()?;
        let clipped = vals.map(|v| v.max(1e-10));
        let total: f64 = clipped.iter().sum();
        let diag = CMat::from_diagonal(&clipped.map(|v| crate::matcore::cr(v / total)));
        DensityMatrix::new(&vecs * diag * vecs.adjoint(), tols).ok()
    };
    let mut rng = sampling::rng(seed);
    let mut best = 0.0_f64;
    for _ in 0..restarts.max(1) {
        let mut rho = sampling::random_density(&mut rng, d);
        let Some(mut cur) = eval(&rho) else { continue };
        let mut step = 0.3;
        for _ in 0..500 {
            let mut pert = sampling::random_hermitian(&mut rng, d);
            let tr = trace(&pert) / crate::matcore::cr(d as f64);
            pert -= identity(d) * tr;
            let Some(cand) = project(&(rho.mat() + pert.scale(step))) else {
                step *= 0.95;
                continue;
            };
            match eval(&cand) {
                Some(v) if v > cur => {
                    cur = v;
                    rho = cand;
                }
                _ => {
                    step *= 0.95;
                    if step < 1e-5 {
                        break;
                    }
                }
            }
        }
        best = best.max(cur);
    }
    Ok(best)
}

/// `λ(Φ) = ‖Φ(id − E): L₂(M,φ) → L₂(M,φ)‖`, the largest singular value of
/// the KMS-symmetrized `Φ∘(id−E)`.
pub fn l2_contraction(
    phi: &QuantumChannel,
    e: &ConditionalExpectation,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    let d = phi.dim();
    let diff = phi.s.compose(&SuperOperator::identity(d).sub(&e.e));
    let hat = crate::matcore::kms_symmetrize(&diff, &phi.effective_reference(), tols)?;
    Ok(op_norm(&hat.mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{cr, matrix_unit};

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn depolarizing_channel(d: usize, s: f64) -> QuantumChannel {
        let e = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
        let id = SuperOperator::identity(d);
        let map = id.scale((-s).exp()).add(&e.scale(1.0 - (-s).exp()));
        QuantumChannel::from_superop(map, None, &tols()).unwrap()
    }

    #[test]
    fn kraus_unitary_is_unital_and_trace_preserving() {
        let mut rng = sampling::rng(1);
        let u = sampling::random_unitary(&mut rng, 3);
        let ch = QuantumChannel::from_kraus(&[u], KrausDirection::Heisenberg, None, &tols()).unwrap();
        assert!(ch.cp_verified && ch.unital_verified && ch.trace_preserving_verified);
    }

    #[test]
    fn kraus_amplitude_damping_style_is_cp_unital() {
        let k1 = matrix_unit(2, 0, 0);
        let k2 = matrix_unit(2, 0, 1);
        let ch =
            QuantumChannel::from_kraus(&[k1, k2], KrausDirection::Heisenberg, None, &tols()).unwrap();
        assert!(ch.cp_verified);
        assert!(ch.unital_verified);
        assert!(!ch.trace_preserving_verified);
    }

    #[test]
    fn empty_kraus_list_errors() {
        assert!(QuantumChannel::from_kraus(&[], KrausDirection::Heisenberg, None, &tols()).is_err());
    }

    #[test]
    fn cp_leq_trace_expectation_thresholds() {
        for d in 2..=4usize {
            let id = SuperOperator::identity(d);
            let e = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
            let c = (d * d) as f64;
            assert!(cp_leq(&id, &e.scale(c), 1e-10).unwrap());
            assert!(!cp_leq(&id, &e.scale(c - 0.1), 1e-10).unwrap());
            assert!(cp_leq(&id, &id, 1e-10).unwrap());
        }
    }

    #[test]
    fn multiplicative_domain_of_identity_is_full_algebra() {
        let idch = QuantumChannel::from_superop(SuperOperator::identity(3), None, &tols()).unwrap();
        let e = multiplicative_domain(&idch, &tols()).unwrap();
        assert_eq!(e.algebra_basis.len(), 9);
        assert!(max_abs(&(&e.e.mat - &SuperOperator::identity(3).mat)) < 1e-8);
    }

    #[test]
    fn multiplicative_domain_of_trace_map_is_scalars() {
        let d = 3;
        let e_tau = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
        let ch = QuantumChannel::from_superop(e_tau.clone(), None, &tols()).unwrap();
        assert!(ch.gns_verified);
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        assert_eq!(e.algebra_basis.len(), 1);
        assert!(max_abs(&(&e.e.mat - &e_tau.mat)) < 1e-8);
    }

    #[test]
    fn multiplicative_domain_of_schur_multiplier_is_block_algebra() {
        // Correlation matrix with unit entries on the {0,1} block.
        let d = 3;
        let mut b = identity(d);
        b[(0, 1)] = cr(1.0);
        b[(1, 0)] = cr(1.0);
        b[(0, 2)] = cr(0.5);
        b[(2, 0)] = cr(0.5);
        b[(1, 2)] = cr(0.5);
        b[(2, 1)] = cr(0.5);
        let schur = SuperOperator::from_action(d, |x| {
            CMat::from_fn(d, d, |i, j| b[(i, j)] * x[(i, j)])
        });
        let ch = QuantumChannel::from_superop(schur, None, &tols()).unwrap();
        assert!(ch.cp_verified && ch.unital_verified && ch.gns_verified);
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        // Block-diagonal algebra M_2 ⊕ M_1: dimension 5.
        assert_eq!(e.algebra_basis.len(), 5);
        // E acts as identity on the block pattern and kills the rest.
        for (i, j) in [(0usize, 1usize), (1, 0), (0, 0), (2, 2)] {
            let x = matrix_unit(d, i, j);
            assert!(max_abs(&(&e.e.apply(&x) - &x)) < 1e-8);
        }
        for (i, j) in [(0usize, 2usize), (2, 0), (1, 2), (2, 1)] {
            let x = matrix_unit(d, i, j);
            assert!(max_abs(&e.e.apply(&x)) < 1e-8);
        }
    }

    #[test]
    fn k_cb_depolarizing_closed_form() {
        let d = 2;
        let s = 1.0;
        let eps = 0.1;
        let ch = depolarizing_channel(d, s);
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let k = k_cb(&ch, &e, eps, 64, &tols()).unwrap();
        let expect = (((d * d - 1) as f64 / eps).ln() / (2.0 * s)).ceil() as usize;
        assert_eq!(k, expect);
        assert_eq!(k, 2);
    }

    #[test]
    fn k_cb_of_expectation_itself_is_one() {
        let d = 3;
        let e_tau = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
        let ch = QuantumChannel::from_superop(e_tau, None, &tols()).unwrap();
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        assert_eq!(k_cb(&ch, &e, 0.1, 8, &tols()).unwrap(), 1);
    }

    #[test]
    fn k_cb_of_identity_channel_is_one() {
        let ch = QuantumChannel::from_superop(SuperOperator::identity(2), None, &tols()).unwrap();
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        assert_eq!(k_cb(&ch, &e, 0.1, 8, &tols()).unwrap(), 1);
    }

    #[test]
    fn symmetrized_square_agrees_with_phi_squared_for_trace_symmetric() {
        let mut rng = sampling::rng(3);
        let s = sampling::random_trace_symmetric(&mut rng, 3, 4);
        let ch = QuantumChannel::from_superop(s.clone(), None, &tols()).unwrap();
        assert!(ch.gns_verified, "trace-symmetrized channel should pass the GNS check");
        let p = ch.symmetrized_square(&tols()).unwrap();
        let phi2 = s.compose(&s);
        assert!(max_abs(&(&p.mat - &phi2.mat)) < 1e-9);
    }

    #[test]
    fn entropy_contraction_depolarizing_ratio_bounded() {
        let ch = depolarizing_channel(2, 1.0);
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let k = k_cb(&ch, &e, 0.1, 64, &tols()).unwrap();
        let mut rng = sampling::rng(4);
        for _ in 0..20 {
            let rho = sampling::random_density(&mut rng, 2);
            let chk = entropy_contraction_check(&ch, &e, k, &rho, &tols()).unwrap();
            assert!(chk.lhs <= chk.rhs + 1e-9, "lhs {} rhs {}", chk.lhs, chk.rhs);
            assert!(chk.ratio <= 0.75 + 1e-9);
        }
    }

    #[test]
    fn entropy_contraction_at_equilibrium_is_zero() {
        let ch = depolarizing_channel(3, 0.7);
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let rho = DensityMatrix::maximally_mixed(3);
        let chk = entropy_contraction_check(&ch, &e, 1, &rho, &tols()).unwrap();
        assert!(chk.lhs.abs() < 1e-9 && chk.rhs.abs() < 1e-9);
    }

    #[test]
    fn entropy_difference_chain_on_random_triples() {
        let mut rng = sampling::rng(5);
        for _ in 0..25 {
            let s = sampling::random_trace_symmetric(&mut rng, 3, 3);
            let ch = QuantumChannel::from_superop(s, None, &tols()).unwrap();
            let rho = sampling::random_faithful_density(&mut rng, 3);
            let omega = sampling::random_faithful_density(&mut rng, 3);
            let chk = entropy_difference_check(&ch, &rho, &omega, &tols()).unwrap();
            assert!(chk.lhs <= chk.mid + 1e-9, "lhs {} mid {}", chk.lhs, chk.mid);
            assert!(chk.mid <= chk.rhs + 2e-9, "mid {} rhs {}", chk.mid, chk.rhs);
        }
    }

    #[test]
    fn entropy_difference_unitary_collapses() {
        let mut rng = sampling::rng(6);
        let u = sampling::random_unitary(&mut rng, 3);
        let ch = QuantumChannel::from_kraus(&[u], KrausDirection::Heisenberg, None, &tols()).unwrap();
        let rho = sampling::random_faithful_density(&mut rng, 3);
        let omega = sampling::random_faithful_density(&mut rng, 3);
        let chk = entropy_difference_check(&ch, &rho, &omega, &tols()).unwrap();
        // Unitary conjugation: H is invariant and Φ*Φ = id, so the chain is
        // D(ρ‖ω) ≤ D(ρ‖ω) ≤ D(ρ‖ω).
        assert!((chk.lhs - chk.mid).abs() < 1e-8);
        assert!((chk.mid - chk.rhs).abs() < 1e-8);
    }

    #[test]
    fn approximate_projection_psi_equals_e() {
        let d = 3;
        let e_tau = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
        let ch = QuantumChannel::from_superop(e_tau, None, &tols()).unwrap();
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let mut rng = sampling::rng(7);
        let rho = sampling::random_faithful_density(&mut rng, d);
        let chk = approximate_projection_check(&ch, &e, &rho, &tols()).unwrap();
        assert!(chk.lhs >= chk.rhs - 1e-9);
        assert!((chk.lhs - 2.0 * chk.rhs).abs() < 1e-9);
    }

    #[test]
    fn approximate_projection_constant_at_point_one() {
        let c = approximate_projection_constant(0.1).unwrap();
        assert!(c > 0.5, "constant {c} must exceed 1/2");
        assert!((c - 0.53).abs() < 0.005, "constant {c} ≈ 0.53");
    }

    #[test]
    fn contraction_estimate_trivial_cases() {
        let d = 2;
        // Φ = E: numerator always 0.
        let e_tau = SuperOperator::ergodic_expectation(&DensityMatrix::maximally_mixed(d));
        let ch = QuantumChannel::from_superop(e_tau, None, &tols()).unwrap();
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let est = contraction_coefficient_estimate(&ch, &e, 2, 11, &tols()).unwrap();
        assert!(est < 1e-9);
        // Φ unitary against the trace projection: ratio identically 1.
        let mut rng = sampling::rng(8);
        let u = sampling::random_unitary(&mut rng, d);
        let uch =
            QuantumChannel::from_kraus(&[u], KrausDirection::Heisenberg, None, &tols()).unwrap();
        let est = contraction_coefficient_estimate(&uch, &e, 2, 12, &tols()).unwrap();
        assert!((est - 1.0).abs() < 1e-6, "estimate {est}");
    }

    #[test]
    fn l2_contraction_examples() {
        let d = 3;
        let s = 0.8;
        let ch = depolarizing_channel(d, s);
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let lam = l2_contraction(&ch, &e, &tols()).unwrap();
        assert!((lam - (-s).exp()).abs() < 1e-9);
        // Φ = E → 0.
        let ech = QuantumChannel::from_superop(e.e.clone(), None, &tols()).unwrap();
        let lam0 = l2_contraction(&ech, &e, &tols()).unwrap();
        assert!(lam0 < 1e-9);
    }

    #[test]
    fn iterated_contraction_and_power_convergence() {
        let mut rng = sampling::rng(9);
        let s = sampling::random_trace_symmetric(&mut rng, 3, 4);
        let ch = QuantumChannel::from_superop(s, None, &tols()).unwrap();
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let lam = l2_contraction(&ch, &e, &tols()).unwrap();
        assert!(lam < 1.0, "generic symmetric channel should have λ < 1");
        let p = ch.symmetrized_square(&tols()).unwrap();
        let id = SuperOperator::identity(3);
        let base = op_norm(&id.sub(&e.e).mat);
        let mut pk = p.clone();
        for n in 1..=5usize {
            let dist = op_norm(&pk.sub(&e.e).mat);
            assert!(
                dist <= lam.powi(2 * n as i32) * base + 1e-8,
                "n = {n}: ‖P^n − E‖ = {dist}, bound = {}",
                lam.powi(2 * n as i32) * base
            );
            pk = pk.compose(&p);
        }
    }

    #[test]
    fn expectation_commutes_with_channel() {
        let mut rng = sampling::rng(10);
        let s = sampling::random_trace_symmetric(&mut rng, 3, 4);
        let ch = QuantumChannel::from_superop(s, None, &tols()).unwrap();
        let e = multiplicative_domain(&ch, &tols()).unwrap();
        let fe = ch.s.compose(&e.e);
        let ef = e.e.compose(&ch.s);
        assert!(max_abs(&(&fe.mat - &e.e.mat)) < 1e-8);
        assert!(max_abs(&(&ef.mat - &e.e.mat)) < 1e-8);
        let p = ch.symmetrized_square(&tols()).unwrap();
        assert!(max_abs(&(&p.compose(&e.e).mat - &e.e.mat)) < 1e-8);
    }
}
