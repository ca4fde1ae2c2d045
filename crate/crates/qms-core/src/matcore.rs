//! Dense complex Hermitian linear algebra, matrix functions, vectorization,
//! superoperator and Choi-matrix transforms.
//!
//! Conventions, fixed once for the whole library:
//! * vectorization is column-stacking: `vec(X)[j*d + i] = X[(i, j)]`;
//! * a superoperator is the `d²×d²` matrix acting on `vec(X)`;
//! * the Choi matrix of a map `T` is the block matrix `C = Σ_{ij} e_ij ⊗ T(e_ij)`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::QmsError;
use crate::tol::Tolerances;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Complex number helpers.
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Largest entry magnitude; zero for empty matrices.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius inner product `tr(A* B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Operator (spectral) norm via singular values.
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |m, &s| m.max(s))
}

/// Trace norm (sum of singular values).
pub fn trace_norm(a: &CMat) -> f64 {
    a.clone().svd(false, false).singular_values.iter().sum()
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Matrix unit `e_ij` (1 in row `i`, column `j`).
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = cr(1.0);
    m
}

/// Column-stacked vectorization (nalgebra stores column-major, so this is the
/// raw data in order).
pub fn vec_mat(x: &CMat) -> CVec {
    CVec::from_column_slice(x.as_slice())
}

/// Inverse of [`vec_mat`].
pub fn unvec(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Asymmetry measure `‖A − A*‖_max`.
pub fn hermiticity_residual(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    let scale = max_abs(a).max(1.0);
    hermiticity_residual(a) <= tol * scale
}

/// `(A + A*)/2` — every operation expecting a Hermitian input symmetrizes
/// first; the asymmetry is cheap to remove and a whole bug class disappears.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Hermitian eigendecomposition with ascending eigenvalues and a
/// reconstruction check.
pub fn eig_hermitian(a: &CMat) -> Result<(DVector<f64>, CMat), QmsError> {
    let d = a.nrows();
    let h = hermitize(a);
    // The QR iteration can stall — or, worse, return an outright wrong
    // decomposition (residual ~1e-2) — at machine-epsilon tolerance on nearly
    // degenerate spectra.  Try progressively relaxed eps values, accept the
    // first decomposition that reconstructs the input tightly, and otherwise
    // keep the best attempt provided it is still orders of magnitude away
    // from the failure mode.
    let scale = max_abs(&h).max(1.0);
    let mut best: Option<(f64, DVector<f64>, CMat)> = None;
    for eps in [f64::EPSILON, 1e-14, 1e-13, 1e-12] {
        let Some(eig) = SymmetricEigen::try_new(h.clone(), eps, 0) else {
            continue;
        };
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let values = DVector::from_iterator(d, idx.iter().map(|&i| eig.eigenvalues[i]));
        let vectors = CMat::from_columns(
            &idx.iter()
                .map(|&i| eig.eigenvectors.column(i).clone_owned())
                .collect::<Vec<_>>(),
        );
        let recon = &vectors * CMat::from_diagonal(&values.map(cr)) * vectors.adjoint();
        let residual = max_abs(&(&recon - &h));
        if residual <= 1e-10 * scale {
            return Ok((values, vectors));
        }
        if best.as_ref().map_or(true, |(r, _, _)| residual < *r) {
            best = Some((residual, values, vectors));
        }
    }
    // Final fallback: cyclic Jacobi, which handles the high-multiplicity
    // spectra (e.g. Choi matrices of projection combinations) that the QR
    // iteration above resolves poorly.
    let (values, vectors) = jacobi_hermitian(&h);
    let recon = &vectors * CMat::from_diagonal(&values.map(cr)) * vectors.adjoint();
    let residual = max_abs(&(&recon - &h));
    if residual <= 1e-10 * scale {
        return Ok((values, vectors));
    }
    if best.as_ref().map_or(true, |(r, _, _)| residual < *r) {
        best = Some((residual, values, vectors));
    }
    match best {
        Some((residual, values, vectors)) if residual <= 1e-8 * scale => Ok((values, vectors)),
        _ => Err(QmsError::NonConvergence { dim: d }),
    }
}

/// Cyclic complex Jacobi eigensolver for a Hermitian matrix: each rotation
/// zeroes one off-diagonal entry with a phased Givens rotation.  Slower than
/// QR but robust on clustered spectra; eigenvalues returned ascending.
fn jacobi_hermitian(h: &CMat) -> (DVector<f64>, CMat) {
    let d = h.nrows();
    let mut a = h.clone();
    let mut v: CMat = CMat::identity(d, d);
    let scale = max_abs(h).max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..d {
            for q in p + 1..d {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let g = a[(p, q)];
                if g.norm() <= 1e-16 * scale {
                    continue;
                }
                // Unitary U = diag(1, e^{-iφ})·R(θ) zeroing a_pq, with
                // g = |g|e^{iφ} and the standard Jacobi angle for the real
                // symmetric block [[a_pp, |g|], [|g|, a_qq]].
                let phase = g.unscale(g.norm());
                let tau = (a[(p, p)].re - a[(q, q)].re) / (2.0 * g.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c0 = 1.0 / (1.0 + t * t).sqrt();
                let s0 = t * c0;
                // U columns: col_p = (c0, s0·e^{-iφ}), col_q = (-s0, c0·e^{-iφ}).
                let upp = cr(c0);
                let uqp = phase.conj().scale(s0);
                let upq = cr(-s0);
                let uqq = phase.conj().scale(c0);
                // A ← A·U and V ← V·U (columns p, q mix).
                for i in 0..d {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = aip * upp + aiq * uqp;
                    a[(i, q)] = aip * upq + aiq * uqq;
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = vip * upp + viq * uqp;
                    v[(i, q)] = vip * upq + viq * uqq;
                }
                // A ← U*·A (rows p, q mix with conjugated coefficients).
                for j in 0..d {
                    let (apj, aqj) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = apj * upp.conj() + aqj * uqp.conj();
                    a[(q, j)] = apj * upq.conj() + aqj * uqq.conj();
                }
                a[(p, q)] = cr(0.0);
                a[(q, p)] = cr(0.0);
            }
        }
    }
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = DVector::from_iterator(d, idx.iter().map(|&i| a[(i, i)].re));
    let vectors = CMat::from_columns(
        &idx.iter()
            .map(|&i| v.column(i).clone_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// `U diag(f(λ)) U*` for Hermitian `A = U diag(λ) U*`.
pub fn mat_func(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat, QmsError> {
    let (values, u) = eig_hermitian(a)?;
    let fv = values.map(&f);
    if fv.iter().any(|x| !x.is_finite()) {
        return Err(QmsError::DomainError(
            "scalar function returned a non-finite value on the spectrum".into(),
        ));
    }
    Ok(&u * CMat::from_diagonal(&fv.map(cr)) * u.adjoint())
}

/// Eigenvalue clamping policy for logarithms and negative powers: eigenvalues
/// in `(-psd_tol, support_cutoff)` are pushed up to `support_cutoff`;
/// anything below `-psd_tol` is a genuine domain violation.
pub fn clamp_spectrum(values: &DVector<f64>, tols: &Tolerances) -> Result<DVector<f64>, QmsError> {
    let mut out = values.clone();
    for v in out.iter_mut() {
        if *v < -tols.psd_tol {
            return Err(QmsError::DomainError(format!(
                "eigenvalue {v:.3e} below -psd_tol"
            )));
        }
        if *v < tols.support_cutoff {
            *v = tols.support_cutoff;
        }
    }
    Ok(out)
}

/// Matrix logarithm with the support-cutoff clamping policy.
pub fn mat_ln(a: &CMat, tols: &Tolerances) -> Result<CMat, QmsError> {
    let (values, u) = eig_hermitian(a)?;
    let clamped = clamp_spectrum(&values, tols)?;
    let fv = clamped.map(f64::ln);
    Ok(&u * CMat::from_diagonal(&fv.map(cr)) * u.adjoint())
}

/// Real power `A^p` with the same clamping policy (used for `d_φ^{±1/4}` etc.).
pub fn mat_pow(a: &CMat, p: f64, tols: &Tolerances) -> Result<CMat, QmsError> {
    let (values, u) = eig_hermitian(a)?;
    let clamped = clamp_spectrum(&values, tols)?;
    let fv = clamped.map(|x| x.powf(p));
    Ok(&u * CMat::from_diagonal(&fv.map(cr)) * u.adjoint())
}

pub fn min_eig(a: &CMat) -> Result<f64, QmsError> {
    let (values, _) = eig_hermitian(a)?;
    Ok(values[0])
}

/// `true` iff the minimum eigenvalue of (the Hermitian part of) `A` is
/// `≥ -tol`.
pub fn is_psd(a: &CMat, tol: f64) -> Result<bool, QmsError> {
    Ok(min_eig(a)? >= -tol)
}

/// A complex `d×d` positive semidefinite unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat, tols: &Tolerances) -> Result<Self, QmsError> {
        if mat.nrows() != mat.ncols() {
            return Err(QmsError::DimensionMismatch("density matrix must be square".into()));
        }
        let scale = max_abs(&mat).max(1.0);
        if hermiticity_residual(&mat) > tols.hermitian_tol.max(1e-12 * scale) * scale {
            return Err(QmsError::PreconditionFailed(
                "density matrix is not Hermitian within tolerance".into(),
            ));
        }
        let h = hermitize(&mat);
        let tr = trace(&h).re;
        if (tr - 1.0).abs() > tols.trace_tol {
            return Err(QmsError::PreconditionFailed(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        if !is_psd(&h, tols.psd_tol)? {
            return Err(QmsError::PreconditionFailed(
                "density matrix has an eigenvalue below -psd_tol".into(),
            ));
        }
        Ok(DensityMatrix { mat: h })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            mat: identity(d).scale(1.0 / d as f64),
        }
    }

    /// Diagonal density from a probability vector (renormalized defensively).
    pub fn from_probs(p: &[f64]) -> Result<Self, QmsError> {
        if p.iter().any(|&x| x < 0.0) {
            return Err(QmsError::PreconditionFailed("negative probability".into()));
        }
        let s: f64 = p.iter().sum();
        if s <= 0.0 {
            return Err(QmsError::PreconditionFailed("zero probability vector".into()));
        }
        let mat = CMat::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|&x| cr(x / s))));
        Ok(DensityMatrix { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn min_eig(&self) -> f64 {
        min_eig(&self.mat).unwrap_or(f64::NAN)
    }

    pub fn is_faithful(&self, cutoff: f64) -> bool {
        self.min_eig() > cutoff
    }
}

/// A linear map on `M_d` stored as its `d²×d²` matrix in the vec basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    pub dim: usize,
    pub mat: CMat,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, mat: CMat) -> Result<Self, QmsError> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(QmsError::DimensionMismatch(format!(
                "superoperator matrix must be {0}×{0}",
                dim * dim
            )));
        }
        Ok(SuperOperator { dim, mat })
    }

    pub fn identity(dim: usize) -> Self {
        SuperOperator {
            dim,
            mat: identity(dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        SuperOperator {
            dim,
            mat: CMat::zeros(dim * dim, dim * dim),
        }
    }

    /// Build the matrix column by column from the action on matrix units:
    /// column `j·d+i` is `vec(apply(e_ij))`.
    pub fn from_action(dim: usize, apply: impl Fn(&CMat) -> CMat) -> Self {
        let d2 = dim * dim;
        let mut mat = CMat::zeros(d2, d2);
        for j in 0..dim {
            for i in 0..dim {
                let col = vec_mat(&apply(&matrix_unit(dim, i, j)));
                mat.set_column(j * dim + i, &col);
            }
        }
        SuperOperator { dim, mat }
    }

    /// The map `X ↦ A X B`, whose matrix is `Bᵀ ⊗ A`.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        SuperOperator {
            dim: a.nrows(),
            mat: kron(&b.transpose(), a),
        }
    }

    /// The map `X ↦ tr(d_φ X)·I` (ergodic conditional expectation onto `C·I`).
    pub fn ergodic_expectation(reference: &DensityMatrix) -> Self {
        let d = reference.dim();
        let id = identity(d);
        let dphi = reference.mat().clone();
        SuperOperator::from_action(d, |x| id.scale(1.0) * trace(&(&dphi * x)))
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        unvec(&(&self.mat * vec_mat(x)), self.dim)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, s: f64) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            mat: self.mat.scale(s),
        }
    }

    pub fn pow(&self, k: usize) -> SuperOperator {
        let mut out = SuperOperator::identity(self.dim);
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }

    /// Trace-dual map: `⟨A, S(B)⟩_HS = ⟨S*(A), B⟩_HS`, i.e. the conjugate
    /// transpose of the matrix in the vec basis.  For adjoint-preserving maps
    /// this is also the Schrödinger-picture pre-adjoint under trace duality
    /// `tr(S(a) b) = tr(a S_*(b))`.
    pub fn adjoint_trace(&self) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            mat: self.mat.adjoint(),
        }
    }

    /// Whether the map sends Hermitian matrices to Hermitian matrices,
    /// probed on a Hermitian spanning set of matrix-unit combinations.
    pub fn is_adjoint_preserving(&self, tol: f64) -> bool {
        let d = self.dim;
        let scale = max_abs(&self.mat).max(1.0);
        for i in 0..d {
            for j in 0..=i {
                let probe = if i == j {
                    matrix_unit(d, i, i)
                } else {
                    let mut m = matrix_unit(d, i, j);
                    m += matrix_unit(d, j, i);
                    m
                };
                if hermiticity_residual(&self.apply(&probe)) > tol * scale {
                    return false;
                }
                if i != j {
                    let mut m = matrix_unit(d, i, j).scale(1.0) * c(0.0, 1.0);
                    m -= matrix_unit(d, j, i) * c(0.0, 1.0);
                    if hermiticity_residual(&self.apply(&m)) > tol * scale {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn norm_max(&self) -> f64 {
        max_abs(&self.mat)
    }
}

/// Block matrix `C = Σ_{ij} e_ij ⊗ T(e_ij)`; positive semidefinite iff the
/// map is completely positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub dim: usize,
    pub mat: CMat,
}

impl ChoiMatrix {
    pub fn min_eig(&self) -> Result<f64, QmsError> {
        min_eig(&self.mat)
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool, QmsError> {
        is_psd(&self.mat, tol)
    }
}

/// The reshuffling `C[(i·d+k, j·d+l)] = M[(l·d+k, j·d+i)]` between the
/// superoperator matrix and the Choi matrix; it is an involution, so the same
/// routine implements both directions.
fn reshuffle(m: &CMat, d: usize) -> CMat {
    let mut out = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    out[(i * d + k, j * d + l)] = m[(l * d + k, j * d + i)];
                }
            }
        }
    }
    out
}

pub fn choi(s: &SuperOperator) -> ChoiMatrix {
    ChoiMatrix {
        dim: s.dim,
        mat: reshuffle(&s.mat, s.dim),
    }
}

pub fn choi_inverse(c: &ChoiMatrix) -> SuperOperator {
    SuperOperator {
        dim: c.dim,
        mat: reshuffle(&c.mat, c.dim),
    }
}

/// The weighting map `W(X) = d_φ^{1/4} X d_φ^{1/4}` and its inverse, as
/// superoperators.
pub fn kms_weight(
    reference: &DensityMatrix,
    tols: &Tolerances,
) -> Result<(SuperOperator, SuperOperator), QmsError> {
    let min = reference.min_eig();
    if !(min > tols.support_cutoff) {
        return Err(QmsError::SingularReference { min_eig: min });
    }
    let q = mat_pow(reference.mat(), 0.25, tols)?;
    let qi = mat_pow(reference.mat(), -0.25, tols)?;
    Ok((SuperOperator::sandwich(&q, &q), SuperOperator::sandwich(&qi, &qi)))
}

/// `W S W^{-1}` with `W(X) = d_φ^{1/4} X d_φ^{1/4}`.  For maps that are
/// GNS-symmetric to `φ` the result is a Hermitian `d²×d²` matrix; callers
/// that rely on Hermiticity should check [`hermiticity_residual`] of the
/// result.
pub fn kms_symmetrize(
    s: &SuperOperator,
    reference: &DensityMatrix,
    tols: &Tolerances,
) -> Result<SuperOperator, QmsError> {
    let (w, winv) = kms_weight(reference, tols)?;
    Ok(w.compose(s).compose(&winv))
}

/// JSON wire format shared by every module: `{"dim": d, "re": [...], "im":
/// [...]}` with row-major flattening.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_mat(m: &CMat) -> Self {
        let d = m.nrows();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { dim: d, re, im }
    }

    pub fn to_mat(&self) -> Result<CMat, QmsError> {
        let d = self.dim;
        if self.re.len() != d * d || self.im.len() != d * d {
            return Err(QmsError::SpecParseError(format!(
                "matrix payload length must be dim² = {}",
                d * d
            )));
        }
        let mut m = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = c(self.re[i * d + j], self.im[i * d + j]);
            }
        }
        Ok(m)
    }
}
