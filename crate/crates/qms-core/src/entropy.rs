//! Entropic functionals of states: relative entropy, entropy functional, the
//! BKM metric with its integral identity, the `k(c)` comparison function and
//! entropy production.


use crate::error::QmsError;
use crate::matcore::{
    self, eig_hermitian, hermitize, identity, mat_ln, trace, CMat, DensityMatrix,
    SuperOperator,
};
use crate::tol::Tolerances;

/// Quadrature configuration for the integral identity of the relative
/// entropy.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        QuadratureSpec {
            abs_tol: t.quad_abs_tol,
            max_subdivisions: t.quad_max_subdivisions,
        }
    }
}

/// Adaptive Simpson quadrature with a subdivision budget.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64, QmsError> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }

    struct State<'a> {
        f: &'a dyn Fn(f64) -> f64,
        used: usize,
        budget: usize,
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        st: &mut State,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
    ) -> Result<f64, QmsError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (st.f)(lm);
        let frm = (st.f)(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        st.used += 1;
        if st.used > st.budget {
            return Err(QmsError::QuadratureBudgetExceeded {
                subdivisions: st.used,
                error: err.abs(),
            });
        }
        let l = recurse(st, a, m, fa, flm, fm, left, 0.5 * tol)?;
        let r = recurse(st, m, b, fm, frm, fb, right, 0.5 * tol)?;
        Ok(l + r)
    }

    let mut st = State {
        f,
        used: 0,
        budget: spec.max_subdivisions,
    };
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&mut st, a, b, fa, fm, fb, whole, spec.abs_tol)
}

/// Umegaki relative entropy `D(ρ‖σ) = tr(ρ ln ρ − ρ ln σ)`.
///
/// Returns `+∞` when the support of `ρ` is not contained in the support of
/// `σ` (support checked via the eigenvalue cutoff); this is a legitimate data
/// point, not an error.
pub fn relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    let (s_vals, s_vecs) = eig_hermitian(sigma.mat())?;
    // Support-inclusion surrogate: the block of ρ outside σ's support must
    // vanish within tolerance.
    let rho_in_sigma_basis = s_vecs.adjoint() * rho.mat() * &s_vecs;
    let d = sigma.dim();
    let outside: Vec<usize> = (0..d).filter(|&i| s_vals[i] <= tols.support_cutoff).collect();
    let mut outside_norm = 0.0_f64;
    for &i in &outside {
        for &j in &outside {
            outside_norm = outside_norm.max(rho_in_sigma_basis[(i, j)].norm());
        }
    }
    // Diagonal entries outside the support also count even when the
    // off-diagonal block is small.
    for &i in &outside {
        outside_norm = outside_norm.max(rho_in_sigma_basis[(i, i)].norm());
    }
    if outside_norm > 1e-10 {
        return Ok(f64::INFINITY);
    }

    let (r_vals, _) = eig_hermitian(rho.mat())?;
    let tr_rho_ln_rho: f64 = r_vals
        .iter()
        .filter(|&&p| p > tols.support_cutoff)
        .map(|&p| p * p.ln())
        .sum();
    let tr_rho_ln_sigma: f64 = (0..d)
        .filter(|&i| s_vals[i] > tols.support_cutoff)
        .map(|i| rho_in_sigma_basis[(i, i)].re * s_vals[i].ln())
        .sum();
    Ok(tr_rho_ln_rho - tr_rho_ln_sigma)
}

/// `H(ρ) = tr(ρ ln ρ)` (negative von Neumann entropy, the paper's sign
/// convention).
pub fn entropy_functional(rho: &DensityMatrix, tols: &Tolerances) -> Result<f64, QmsError> {
    let (vals, _) = eig_hermitian(rho.mat())?;
    Ok(vals
        .iter()
        .filter(|&&p| p > tols.support_cutoff)
        .map(|&p| p * p.ln())
        .sum())
}

/// The divided-difference kernel of the BKM metric:
/// `κ(a,b) = (ln a − ln b)/(a − b)`, `κ(a,a) = 1/a`.
pub fn bkm_kernel(a: f64, b: f64) -> f64 {
    if (a - b).abs() <= 1e-12 * a.max(b) {
        1.0 / (0.5 * (a + b))
    } else {
        (a.ln() - b.ln()) / (a - b)
    }
}

/// BKM metric against a faithful positive operator `σ` (not necessarily
/// normalized): `γ_σ(X) = Σ_{ij} |X̃_{ij}|² κ(λ_i, λ_j)` in the eigenbasis of
/// `σ`.  The unnormalized variant is what the Rothaus counterexample's
/// weighted trace needs; [`bkm_metric`] is the state-valued front end.
pub fn bkm_metric_general(sigma: &CMat, x: &CMat, tols: &Tolerances) -> Result<f64, QmsError> {
    let (vals, vecs) = eig_hermitian(sigma)?;
    if !(vals[0] > tols.support_cutoff) {
        return Err(QmsError::SingularReference { min_eig: vals[0] });
    }
    let xt = vecs.adjoint() * x * &vecs;
    let d = sigma.nrows();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            let w = xt[(i, j)].norm_sqr();
            if w > 0.0 {
                total += w * bkm_kernel(vals[i], vals[j]);
            }
        }
    }
    Ok(total)
}

/// BKM metric `γ_σ(X) = ∫₀^∞ tr(X*(σ+s)^{-1} X (σ+s)^{-1}) ds` evaluated by
/// the closed form in `σ`'s eigenbasis.
pub fn bkm_metric(sigma: &DensityMatrix, x: &CMat, tols: &Tolerances) -> Result<f64, QmsError> {
    bkm_metric_general(sigma.mat(), x, tols)
}

/// Relative entropy through the integral identity
/// `D(ρ‖σ) = ∫₀¹ (1−t) γ_{ρ_t}(ρ−σ) dt` with `ρ_t = tρ + (1−t)σ`.
pub fn relative_entropy_via_bkm(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: &QuadratureSpec,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    if !rho.is_faithful(tols.support_cutoff) || !sigma.is_faithful(tols.support_cutoff) {
        return Err(QmsError::SingularReference {
            min_eig: rho.min_eig().min(sigma.min_eig()),
        });
    }
    let diff = rho.mat() - sigma.mat();
    let integrand = |t: f64| -> f64 {
        let mix = rho.mat().scale(t) + sigma.mat().scale(1.0 - t);
        let gamma = bkm_metric_general(&mix, &diff, tols).unwrap_or(f64::NAN);
        (1.0 - t) * gamma
    };
    let value = adaptive_simpson(&integrand, 0.0, 1.0, q)?;
    if !value.is_finite() {
        return Err(QmsError::SingularReference {
            min_eig: rho.min_eig().min(sigma.min_eig()),
        });
    }
    Ok(value)
}

/// `k(c) = (c ln c − c + 1)/(c−1)²`, the comparison constant of the
/// entropy/metric sandwich; continuous extension `k(1) = 1/2`.
pub fn k_of_c(c: f64) -> Result<f64, QmsError> {
    if c <= 1.0 - 1e-6 {
        return Err(QmsError::DomainError(format!("k(c) requires c ≥ 1, got {c}")));
    }
    if (c - 1.0).abs() < 1e-6 {
        return Ok(0.5 - (c - 1.0) / 6.0);
    }
    Ok((c * c.ln() - c + 1.0) / ((c - 1.0) * (c - 1.0)))
}

/// Entropy production `I_L(ρ) = tr(L_*(ρ)(ln ρ − ln d_φ))` where `L_*` is
/// the Schrödinger-picture (pre-adjoint) generator.
pub fn entropy_production(
    l_star: &SuperOperator,
    d_phi: &DensityMatrix,
    rho: &DensityMatrix,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    if !rho.is_faithful(tols.support_cutoff) || !d_phi.is_faithful(tols.support_cutoff) {
        return Err(QmsError::SingularReference {
            min_eig: rho.min_eig().min(d_phi.min_eig()),
        });
    }
    let x = mat_ln(rho.mat(), tols)? - mat_ln(d_phi.mat(), tols)?;
    let lrho = l_star.apply(rho.mat());
    Ok(trace(&(&lrho * &x)).re)
}

/// The two formulas of the second-derivative lemma for a smooth state path:
/// `F′ = tr(ρ′(ln ρ + 1))` and `F″ = tr(ρ″(ln ρ + 1)) + γ_ρ(ρ′)`.
pub fn entropy_second_derivative_terms(
    rho: &DensityMatrix,
    rho_dot: &CMat,
    rho_ddot: &CMat,
    tols: &Tolerances,
) -> Result<(f64, f64), QmsError> {
    if !rho.is_faithful(tols.support_cutoff) {
        return Err(QmsError::SingularReference {
            min_eig: rho.min_eig(),
        });
    }
    let d = rho.dim();
    let ln_plus_one = mat_ln(rho.mat(), tols)? + identity(d);
    let first = trace(&(&hermitize(rho_dot) * &ln_plus_one)).re;
    let second =
        trace(&(&hermitize(rho_ddot) * &ln_plus_one)).re + bkm_metric(rho, rho_dot, tols)?;
    Ok((first, second))
}

/// Direct numerical evaluation of the defining BKM integral, truncated at
/// `s_max` with the `tr(X*X)/s_max` tail bound added.  Used as the
/// independent oracle against the closed form.
pub fn bkm_metric_quadrature(
    sigma: &DensityMatrix,
    x: &CMat,
    s_max: f64,
    q: &QuadratureSpec,
) -> Result<f64, QmsError> {
    let (vals, vecs) = eig_hermitian(sigma.mat())?;
    let xt = vecs.adjoint() * x * &vecs;
    let d = sigma.dim();
    let integrand = |s: f64| -> f64 {
        // tr(X*(σ+s)^{-1}X(σ+s)^{-1}) in the eigenbasis.
        let mut total = 0.0;
        for i in 0..d {
            for j in 0..d {
                total += xt[(i, j)].norm_sqr() / ((vals[i] + s) * (vals[j] + s));
            }
        }
        total
    };
    // Split at moderate scales so the adaptive scheme does not waste budget
    // resolving the tiny tail against the [0,1] bulk.
    let mut total = adaptive_simpson(&integrand, 0.0, 1.0, q)?;
    total += adaptive_simpson(&integrand, 1.0, 1e3, q)?;
    total += adaptive_simpson(&integrand, 1e3, s_max, q)?;
    let tail = matcore::hs_inner(x, x).re / s_max;
    Ok(total + tail)
}

/// Trace norm distance helper `‖ρ−σ‖₁` for the Pinsker property check.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    matcore::trace_norm(&(rho.mat() - sigma.mat()))
}

/// Smallest `c` with `ρ ≤ cσ`, for faithful `σ`: the top eigenvalue of
/// `σ^{-1/2} ρ σ^{-1/2}`.
pub fn domination_constant(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    let si = matcore::mat_pow(sigma.mat(), -0.5, tols)?;
    let m = &si * rho.mat() * &si;
    let (vals, _) = eig_hermitian(&m)?;
    Ok(vals[vals.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::cr;
    use crate::sampling;
    use nalgebra::DVector;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn diag2(a: f64, b: f64) -> DensityMatrix {
        DensityMatrix::from_probs(&[a, b]).unwrap()
    }

    #[test]
    fn relative_entropy_of_identical_states_vanishes() {
        let mut rng = sampling::rng(1);
        for _ in 0..5 {
            let rho = sampling::random_density(&mut rng, 4);
            let d = relative_entropy(&rho, &rho, &tols()).unwrap();
            assert!(d.abs() < 1e-10, "D(ρ‖ρ) = {d}");
        }
    }

    #[test]
    fn relative_entropy_scalar_formula() {
        let d = relative_entropy(&diag2(0.7, 0.3), &diag2(0.5, 0.5), &tols()).unwrap();
        let expect = 0.7 * (0.7f64 / 0.5).ln() + 0.3 * (0.3f64 / 0.5).ln();
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.0822828).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_disjoint_support_is_infinite() {
        let rho = DensityMatrix::from_probs(&[1.0, 0.0]).unwrap();
        let sigma = DensityMatrix::from_probs(&[0.0, 1.0]).unwrap();
        assert!(relative_entropy(&rho, &sigma, &tols()).unwrap().is_infinite());
    }

    #[test]
    fn entropy_functional_examples() {
        // Pure state.
        let pure = DensityMatrix::from_probs(&[1.0, 0.0, 0.0]).unwrap();
        assert!(entropy_functional(&pure, &tols()).unwrap().abs() < 1e-12);
        // Maximally mixed.
        let mixed = DensityMatrix::maximally_mixed(4);
        let h = entropy_functional(&mixed, &tols()).unwrap();
        assert!((h + (4.0f64).ln()).abs() < 1e-12);
        // Scalar evaluation.
        let h2 = entropy_functional(&diag2(0.7, 0.3), &tols()).unwrap();
        let expect = 0.7 * 0.7f64.ln() + 0.3 * 0.3f64.ln();
        assert!((h2 - expect).abs() < 1e-12);
        assert!((h2 + 0.6108643).abs() < 1e-6);
    }

    #[test]
    fn bkm_metric_trace_state_closed_form() {
        let mut rng = sampling::rng(2);
        let d = 3;
        let x = sampling::random_complex(&mut rng, d);
        let gamma = bkm_metric(&DensityMatrix::maximally_mixed(d), &x, &tols()).unwrap();
        let expect = d as f64 * matcore::hs_inner(&x, &x).re;
        assert!((gamma - expect).abs() < 1e-9 * expect.max(1.0));
    }

    #[test]
    fn bkm_metric_of_zero_vanishes() {
        let mut rng = sampling::rng(3);
        let sigma = sampling::random_faithful_density(&mut rng, 3);
        let gamma = bkm_metric(&sigma, &CMat::zeros(3, 3), &tols()).unwrap();
        assert_eq!(gamma, 0.0);
    }

    #[test]
    fn bkm_closed_form_matches_direct_quadrature() {
        let mut rng = sampling::rng(4);
        for _ in 0..3 {
            let sigma = sampling::random_faithful_density(&mut rng, 3);
            let x = sampling::random_complex(&mut rng, 3);
            let closed = bkm_metric(&sigma, &x, &tols()).unwrap();
            let spec = QuadratureSpec {
                abs_tol: 1e-9 * closed.max(1.0),
                max_subdivisions: 1 << 14,
            };
            let direct = bkm_metric_quadrature(&sigma, &x, 1e6, &spec).unwrap();
            assert!(
                (closed - direct).abs() <= 1e-6 * closed.max(1.0),
                "closed {closed} direct {direct}"
            );
        }
    }

    #[test]
    fn integral_identity_trivial_and_scalar_cases() {
        let q = QuadratureSpec::default();
        let same = relative_entropy_via_bkm(&diag2(0.5, 0.5), &diag2(0.5, 0.5), &q, &tols()).unwrap();
        assert!(same.abs() < 1e-10);
        let d = relative_entropy_via_bkm(&diag2(0.7, 0.3), &diag2(0.5, 0.5), &q, &tols()).unwrap();
        assert!((d - 0.0822828).abs() < 1e-6);
    }

    #[test]
    fn integral_identity_matches_relative_entropy_random() {
        let mut rng = sampling::rng(5);
        let q = QuadratureSpec::default();
        for _ in 0..3 {
            let rho = sampling::random_faithful_density(&mut rng, 3);
            let sigma = sampling::random_faithful_density(&mut rng, 3);
            let direct = relative_entropy(&rho, &sigma, &tols()).unwrap();
            let via = relative_entropy_via_bkm(&rho, &sigma, &q, &tols()).unwrap();
            assert!(
                (direct - via).abs() <= 1e-6 * direct.max(1.0),
                "direct {direct} via {via}"
            );
        }
    }

    #[test]
    fn k_of_c_values() {
        assert!((k_of_c(2.0).unwrap() - (2.0 * 2.0f64.ln() - 1.0)).abs() < 1e-12);
        assert!((k_of_c(1.0 + 1e-9).unwrap() - 0.5).abs() < 1e-6);
        let k10 = (10.0 * 10.0f64.ln() - 9.0) / 81.0;
        assert!((k_of_c(10.0).unwrap() - k10).abs() < 1e-12);
        assert!((k_of_c(10.0).unwrap() - 0.17316).abs() < 1e-5);
        assert!(k_of_c(0.5).is_err());
    }

    #[test]
    fn entropy_production_at_equilibrium_vanishes() {
        let mut rng = sampling::rng(6);
        let d_phi = sampling::random_faithful_density(&mut rng, 3);
        // Depolarizing toward d_φ, Schrödinger picture: ρ ↦ ρ − tr(ρ) d_φ.
        let dphi_mat = d_phi.mat().clone();
        let l_star = SuperOperator::from_action(3, |x| x - dphi_mat.scale(1.0) * trace(x));
        let i = entropy_production(&l_star, &d_phi, &d_phi, &tols()).unwrap();
        assert!(i.abs() < 1e-10);
    }

    #[test]
    fn entropy_production_depolarizing_scalar_value() {
        let d_phi = DensityMatrix::maximally_mixed(2);
        let dphi_mat = d_phi.mat().clone();
        let l_star = SuperOperator::from_action(2, |x| x - dphi_mat.scale(1.0) * trace(x));
        let rho = diag2(0.7, 0.3);
        let i = entropy_production(&l_star, &d_phi, &rho, &tols()).unwrap();
        let expect = 0.2 * (0.7f64.ln() - 0.3f64.ln());
        assert!((i - expect).abs() < 1e-12);
        assert!((i - 0.1694596).abs() < 1e-6);
    }

    #[test]
    fn second_derivative_constant_path() {
        let mut rng = sampling::rng(7);
        let rho = sampling::random_faithful_density(&mut rng, 3);
        let zero = CMat::zeros(3, 3);
        let (first, second) =
            entropy_second_derivative_terms(&rho, &zero, &zero, &tols()).unwrap();
        assert!(first.abs() < 1e-12);
        assert!(second.abs() < 1e-12);
    }

    #[test]
    fn second_derivative_linear_path_reduces_to_bkm() {
        let mut rng = sampling::rng(8);
        let sigma = sampling::random_faithful_density(&mut rng, 3);
        let rho = sampling::random_faithful_density(&mut rng, 3);
        let dot = rho.mat() - sigma.mat();
        let zero = CMat::zeros(3, 3);
        let (_, second) = entropy_second_derivative_terms(&sigma, &dot, &zero, &tols()).unwrap();
        let gamma = bkm_metric(&sigma, &dot, &tols()).unwrap();
        assert!((second - gamma).abs() < 1e-10 * gamma.max(1.0));
    }

    #[test]
    fn second_derivative_matches_scalar_calculus_on_diagonal_path() {
        // Path p(t) = (p1 + t a1, p2 + t a2) with Σa = 0; F(t) = Σ p_i ln p_i.
        let p = [0.6, 0.4];
        let a = [0.1, -0.1];
        let rho = diag2(p[0], p[1]);
        let dot = CMat::from_diagonal(&DVector::from_vec(vec![cr(a[0]), cr(a[1])]));
        let zero = CMat::zeros(2, 2);
        let (first, second) =
            entropy_second_derivative_terms(&rho, &dot, &zero, &tols()).unwrap();
        let first_scalar: f64 = (0..2).map(|i| a[i] * (p[i].ln() + 1.0)).sum();
        let second_scalar: f64 = (0..2).map(|i| a[i] * a[i] / p[i]).sum();
        assert!((first - first_scalar).abs() < 1e-12);
        assert!((second - second_scalar).abs() < 1e-12);
    }

    #[test]
    fn entropy_production_matches_decay_slope_finite_difference() {
        // -d/dt D(T_t(ρ)||E(ρ)) at t=0 for the depolarizing semigroup, whose
        // Schrödinger flow is ρ_t = e^{-t}ρ + (1-e^{-t})d_φ.
        let d_phi = DensityMatrix::maximally_mixed(2);
        let dphi_mat = d_phi.mat().clone();
        let l_star = SuperOperator::from_action(2, |x| x - dphi_mat.scale(1.0) * trace(x));
        let rho = diag2(0.8, 0.2);
        let i = entropy_production(&l_star, &d_phi, &rho, &tols()).unwrap();
        let h = 1e-5;
        let evolve = |t: f64| -> f64 {
            let e = (-t).exp();
            let mix = DensityMatrix::new(
                rho.mat().scale(e) + d_phi.mat().scale(1.0 - e),
                &tols(),
            )
            .unwrap();
            relative_entropy(&mix, &d_phi, &tols()).unwrap()
        };
        let slope = (evolve(h) - evolve(-h)) / (2.0 * h);
        assert!(
            (i + slope).abs() <= 1e-6 * i.abs().max(1.0),
            "I = {i}, -dD/dt = {}",
            -slope
        );
    }
}
