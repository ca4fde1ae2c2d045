//! Weighted p-norms, MLSI-to-concentration ratio checks, Lipschitz data for
//! matrix-valued random variables on finite probability spaces, and the
//! matrix Bernstein Monte Carlo demonstration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::QmsError;
use crate::matcore::{cr, op_norm, CMat, DensityMatrix};
use crate::semigroups::{fixed_point_expectation, lipschitz_seminorm, Lindbladian};
use crate::tol::Tolerances;

/// Weighted p-norm `‖x‖_{p,φ} = ‖d_φ^{1/2p} x d_φ^{1/2p}‖_p` (Schatten p);
/// `p = ∞` gives the plain operator norm of `x`.
pub fn weighted_p_norm(
    x: &CMat,
    phi: &DensityMatrix,
    p: f64,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    if !(p >= 1.0) {
        return Err(QmsError::DomainError(format!("p = {p} outside [1, ∞]")));
    }
    if !phi.is_faithful(tols.support_cutoff) {
        return Err(QmsError::SingularReference {
            min_eig: phi.min_eig(),
        });
    }
    if p.is_infinite() {
        return Ok(op_norm(x));
    }
    let w = crate::matcore::mat_pow(phi.mat(), 1.0 / (2.0 * p), tols)?;
    let y = &w * x * &w;
    let sv = y.svd(false, false).singular_values;
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Ratios `r(p) = α·‖x−E(x)‖_{p,φ}/(√p·‖x‖_Lip)` over a p grid, together
/// with their supremum and the log-log growth exponent of `r` in `p`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConcentrationReport {
    pub p_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub growth_exponent: f64,
}

/// Evaluate the concentration ratios for a semigroup with MLSI lower bound
/// `alpha_lower` and observable `x`.  The universal constant in front of
/// `√p‖x‖_Lip` is unknown, so only boundedness is asserted: the fitted
/// log-log growth exponent of `r(p)` must not exceed 0.05.  An observable in
/// the fixed-point algebra has Lipschitz seminorm 0 and all ratios 0.
pub fn mlsi_concentration_ratios(
    l: &Lindbladian,
    alpha_lower: f64,
    x: &CMat,
    p_grid: &[f64],
    tols: &Tolerances,
) -> Result<ConcentrationReport, QmsError> {
    if alpha_lower <= 0.0 {
        return Err(QmsError::PreconditionFailed("α_lower must be positive".into()));
    }
    if p_grid.is_empty() || p_grid.iter().any(|&p| p < 1.0) {
        return Err(QmsError::DomainError("p grid must be nonempty with p ≥ 1".into()));
    }
    let e = fixed_point_expectation(l, tols)?;
    let xc = x - e.e.apply(x);
    let lip = lipschitz_seminorm(l, x);
    if lip <= 1e-10 {
        if op_norm(&xc) > 1e-8 * op_norm(x).max(1.0) {
            return Err(QmsError::PreconditionFailed(
                "‖x‖_Lip = 0 but x is not fixed by E".into(),
            ));
        }
        return Ok(ConcentrationReport {
            p_grid: p_grid.to_vec(),
            ratios: vec![0.0; p_grid.len()],
            sup_ratio: 0.0,
            growth_exponent: 0.0,
        });
    }
    let mut ratios = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let norm = weighted_p_norm(&xc, &l.reference, p, tols)?;
        ratios.push(alpha_lower * norm / (p.sqrt() * lip));
    }
    let sup_ratio = ratios.iter().copied().fold(0.0_f64, f64::max);
    let growth_exponent = if ratios.iter().all(|&r| r > 0.0) && p_grid.len() >= 2 {
        log_log_slope(p_grid, &ratios)
    } else {
        0.0
    };
    if growth_exponent > 0.05 {
        return Err(QmsError::PreconditionFailed(format!(
            "concentration ratio grows with p (exponent {growth_exponent:.3})"
        )));
    }
    if !(sup_ratio.is_finite() && ratios.iter().all(|r| r.is_finite() && *r >= 0.0)) {
        return Err(QmsError::DomainError("non-finite concentration ratio".into()));
    }
    Ok(ConcentrationReport {
        p_grid: p_grid.to_vec(),
        ratios,
        sup_ratio,
        growth_exponent,
    })
}

/// Monte Carlo summary of the matrix Bernstein demonstration.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BernsteinRecord {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    /// Estimate of `E‖Z − EZ‖_∞`.
    pub mean_norm: f64,
    /// Estimate of `v(Z) = ‖E((Z−EZ)*(Z−EZ))‖`.
    pub v: f64,
    /// `mean_norm / √((v + M²) ln d)`.
    pub ratio: f64,
}

impl BernsteinRecord {
    pub const CSV_COLUMNS: &'static str = "d,n,trials,mean_norm,v,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e}",
            self.d, self.n, self.trials, self.mean_norm, self.v, self.ratio
        )
    }
}

/// One bounded random summand: Hermitian with entries uniform on the unit
/// box (so the mean is exactly zero by symmetry), clipped to `‖S‖ ≤ m`.
fn sample_bounded_hermitian(rng: &mut ChaCha8Rng, d: usize, m: f64) -> CMat {
    let mut s = CMat::zeros(d, d);
    for i in 0..d {
        s[(i, i)] = cr(rng.gen_range(-1.0..1.0));
        for j in i + 1..d {
            let z = crate::matcore::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            s[(i, j)] = z;
            s[(j, i)] = z.conj();
        }
    }
    let norm = op_norm(&s);
    if norm > m {
        s.scale(m / norm.max(1e-300))
    } else {
        s
    }
}

/// Monte Carlo estimate of `E‖Z−EZ‖` and `v(Z)` for `Z = Σ_{k=1}^n S_k` with
/// independent bounded Hermitian summands, and the Bernstein-style ratio
/// `E‖Z−EZ‖/√((v+M²) ln d)`.  The paper's universal constant is unspecified,
/// so the assertion is boundedness: ratio ≤ 10.
pub fn matrix_bernstein_mc(
    d: usize,
    n: usize,
    m_bound: f64,
    trials: usize,
    seed: u64,
) -> Result<BernsteinRecord, QmsError> {
    if d < 2 || n == 0 || trials == 0 || m_bound < 0.0 {
        return Err(QmsError::PreconditionFailed(
            "need d ≥ 2, n ≥ 1, trials ≥ 1, M ≥ 0".into(),
        ));
    }
    let mut rng = crate::sampling::rng(seed);
    let mut mean_norm = 0.0;
    let mut second_moment = CMat::zeros(d, d);
    for _ in 0..trials {
        let mut z = CMat::zeros(d, d);
        for _ in 0..n {
            z += sample_bounded_hermitian(&mut rng, d, m_bound);
        }
        mean_norm += op_norm(&z);
        second_moment += z.adjoint() * &z;
    }
    mean_norm /= trials as f64;
    let v = op_norm(&second_moment.unscale(trials as f64));
    let denom = ((v + m_bound * m_bound) * (d as f64).ln()).sqrt();
    let ratio = if denom > 0.0 { mean_norm / denom } else { 0.0 };
    if ratio > 10.0 {
        return Err(QmsError::PreconditionFailed(format!(
            "Bernstein ratio {ratio:.3} exceeds 10"
        )));
    }
    Ok(BernsteinRecord {
        d,
        n,
        trials,
        mean_norm,
        v,
        ratio,
    })
}

/// Lipschitz data of a matrix-valued function `f: Ω → M_d` on a finite
/// probability space, for the depolarizing semigroup `L = id − E_μ` acting
/// on the Ω part: with `f̂ = f − E_μ f`,
/// `‖f‖²_Lip = ½ max{ max_ω ‖(f̂*f̂)(ω) + E_μ(f̂*f̂)‖, same with f̂f̂* }`,
/// `v(f) = max{‖E_μ(f̂*f̂)‖, ‖E_μ(f̂f̂*)‖}`, `‖f‖_∞ = max_ω ‖f(ω)‖`.
pub fn function_lipschitz_data(
    fs: &[CMat],
    probs: &[f64],
) -> Result<(f64, f64, f64), QmsError> {
    if fs.is_empty() || fs.len() != probs.len() {
        return Err(QmsError::DimensionMismatch(
            "need one matrix per probability weight".into(),
        ));
    }
    if probs.iter().any(|&p| p <= 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(QmsError::PreconditionFailed("weights must be a probability vector".into()));
    }
    let d = fs[0].nrows();
    if fs.iter().any(|f| f.nrows() != d || f.ncols() != d) {
        return Err(QmsError::DimensionMismatch("inconsistent matrix dimensions".into()));
    }
    let mut mean = CMat::zeros(d, d);
    for (f, &p) in fs.iter().zip(probs) {
        mean += f.scale(p);
    }
    let hats: Vec<CMat> = fs.iter().map(|f| f - &mean).collect();
    let grams: Vec<CMat> = hats.iter().map(|h| h.adjoint() * h).collect();
    let grams_star: Vec<CMat> = hats.iter().map(|h| h * h.adjoint()).collect();
    let avg = |ms: &[CMat]| -> CMat {
        let mut a = CMat::zeros(d, d);
        for (m, &p) in ms.iter().zip(probs) {
            a += m.scale(p);
        }
        a
    };
    let e_gram = avg(&grams);
    let e_gram_star = avg(&grams_star);
    let side = |ms: &[CMat], e: &CMat| -> f64 {
        ms.iter()
            .map(|m| op_norm(&(m + e)))
            .fold(0.0_f64, f64::max)
    };
    let lip_sq = 0.5 * side(&grams, &e_gram).max(side(&grams_star, &e_gram_star));
    let v = op_norm(&e_gram).max(op_norm(&e_gram_star));
    let sup_norm = fs.iter().map(op_norm).fold(0.0_f64, f64::max);
    Ok((lip_sq, v, sup_norm))
}

/// Build the product-space depolarizing Lindbladian `(id − E_μ) ⊗ id_{M_d}`
/// on `M_m ⊗ M_d` in GNS canonical form (jumps `V_kl ⊗ I`), used to
/// cross-check [`function_lipschitz_data`] against the generic machinery.
pub fn product_depolarizing(
    probs: &[f64],
    d: usize,
    tols: &Tolerances,
) -> Result<Lindbladian, QmsError> {
    let m = probs.len();
    if m == 0 || d == 0 {
        return Err(QmsError::DimensionMismatch("empty factor".into()));
    }
    let mut ref_probs = Vec::with_capacity(m * d);
    for &p in probs {
        for _ in 0..d {
            ref_probs.push(p / d as f64);
        }
    }
    let reference = DensityMatrix::from_probs(&ref_probs)?;
    let eye = crate::matcore::identity(d);
    let mut jumps = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for k in 0..m {
        for l in 0..m {
            let c = (probs[k] * probs[l]).sqrt() / 2.0;
            jumps.push(crate::matcore::kron(
                &crate::matcore::matrix_unit(m, k, l).scale(c.sqrt()),
                &eye,
            ));
            weights.push((probs[l] / probs[k]).ln());
        }
    }
    crate::semigroups::lindbladian_gns(&jumps, &weights, &reference, tols)
}

/// Embed a matrix-valued function as the block-diagonal element
/// `Σ_ω e_ωω ⊗ f(ω)` of `M_m ⊗ M_d`.
pub fn embed_function(fs: &[CMat]) -> CMat {
    let m = fs.len();
    let d = fs[0].nrows();
    let mut x = CMat::zeros(m * d, m * d);
    for (w, f) in fs.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                x[(w * d + i, w * d + j)] = f[(i, j)];
            }
        }
    }
    x
}

/// One point of the Gaussian-tail comparison: empirical `P(‖Z−EZ‖ > t)`
/// against `2d·exp(−t²/(64ec²(v+M²)))`.  The constant `c` is fitted once
/// from a Bernstein record and frozen; the comparison is reported, not
/// asserted, since the paper leaves `c` unspecified.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
}

/// Fit the universal constant from `E‖Z−EZ‖ = 2ce^{−1/2}√((v+M²) ln d)`,
/// i.e. `c = ratio·√e/2`.
pub fn fit_concentration_constant(record: &BernsteinRecord) -> f64 {
    record.ratio * (0.5_f64).exp() / 2.0
}

/// Commutative product-chain tail demo: `Z = Σ_k S_k` with independent
/// diagonal summands (entries uniform, clipped to `‖·‖ ≤ M`), so all
/// spectral data is classical and the exceedance projection is the
/// indicator of eigenvalues above `t`.
pub fn gaussian_tail_report(
    d: usize,
    n: usize,
    m_bound: f64,
    trials: usize,
    seed: u64,
    c: f64,
    t_grid: &[f64],
) -> Result<Vec<TailPoint>, QmsError> {
    if d == 0 || n == 0 || trials == 0 || c <= 0.0 {
        return Err(QmsError::PreconditionFailed(
            "need d, n, trials ≥ 1 and c > 0".into(),
        ));
    }
    let mut rng = crate::sampling::rng(seed);
    let mut norms = Vec::with_capacity(trials);
    let mut second = vec![0.0_f64; d];
    for _ in 0..trials {
        let mut z = vec![0.0_f64; d];
        for _ in 0..n {
            let mut s: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nrm = s.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
            if nrm > m_bound {
                for x in s.iter_mut() {
                    *x *= m_bound / nrm;
                }
            }
            for (zi, si) in z.iter_mut().zip(&s) {
                *zi += si;
            }
        }
        norms.push(z.iter().fold(0.0_f64, |a, &x| a.max(x.abs())));
        for (acc, &zi) in second.iter_mut().zip(&z) {
            *acc += zi * zi;
        }
    }
    let v = second
        .iter()
        .map(|&s| s / trials as f64)
        .fold(0.0_f64, f64::max);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let empirical =
                norms.iter().filter(|&&x| x > t).count() as f64 / trials as f64;
            let bound = 2.0
                * d as f64
                * (-t * t
                    / (64.0 * std::f64::consts::E * c * c * (v + m_bound * m_bound)))
                    .exp();
            TailPoint { t, empirical, bound }
        })
        .collect())
}
