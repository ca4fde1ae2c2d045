//! Model constructors: classical random walks and their fast paths, the
//! depolarizing semigroup, noncommutative birth–death chains, SU(2)
//! transference generators, the Rothaus-failure computation, and seeded
//! random GNS models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::entropy::{bkm_metric_general, relative_entropy};
use crate::error::QmsError;
use crate::matcore::{cr, matrix_unit, CMat, DensityMatrix};
use crate::semigroups::{lindbladian_gns, Lindbladian};
use crate::tol::Tolerances;

pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// A reversible discrete-time random-walk kernel with its stationary law.
#[derive(Debug, Clone)]
pub struct StochasticKernel {
    pub n: usize,
    pub kernel: RMat,
    pub stationary: RVec,
    pub reversible: bool,
}

impl StochasticKernel {
    pub fn new(kernel: RMat, stationary: RVec) -> Result<Self, QmsError> {
        let n = kernel.nrows();
        if kernel.ncols() != n || stationary.len() != n {
            return Err(QmsError::DimensionMismatch("kernel/stationary size mismatch".into()));
        }
        for u in 0..n {
            let s: f64 = kernel.row(u).iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(QmsError::PreconditionFailed(format!(
                    "row {u} sums to {s}, not 1"
                )));
            }
        }
        for v in 0..n {
            let s: f64 = (0..n).map(|u| stationary[u] * kernel[(u, v)]).sum();
            if (s - stationary[v]).abs() > 1e-12 {
                return Err(QmsError::PreconditionFailed(format!(
                    "stationarity residual {:.3e} at state {v}",
                    (s - stationary[v]).abs()
                )));
            }
        }
        let reversible = (0..n).all(|u| {
            (0..n).all(|v| {
                (stationary[u] * kernel[(u, v)] - stationary[v] * kernel[(v, u)]).abs() <= 1e-10
            })
        });
        Ok(StochasticKernel {
            n,
            kernel,
            stationary,
            reversible,
        })
    }
}

/// A reversible continuous-time Markov generator `L` acting on functions
/// (`(Lf)(u) = Σ_v L[u,v] f(v)`, row sums zero) with its stationary law.
/// Classical chains are kept as plain vectors/matrices: the uniform quantum
/// machinery is available through the matching Lindbladian models, while
/// sweeps over large state spaces stay `n×n` instead of `n²×n²`.
#[derive(Debug, Clone)]
pub struct ClassicalChain {
    pub n: usize,
    pub generator: RMat,
    pub stationary: RVec,
}

impl ClassicalChain {
    pub fn new(generator: RMat, stationary: RVec) -> Result<Self, QmsError> {
        let n = generator.nrows();
        if generator.ncols() != n || stationary.len() != n {
            return Err(QmsError::DimensionMismatch("generator/stationary size mismatch".into()));
        }
        for u in 0..n {
            let s: f64 = generator.row(u).iter().sum();
            if s.abs() > 1e-12 {
                return Err(QmsError::PreconditionFailed(format!(
                    "generator row {u} sums to {s}, not 0"
                )));
            }
        }
        for u in 0..n {
            for v in 0..n {
                let res = stationary[u] * generator[(u, v)] - stationary[v] * generator[(v, u)];
                if res.abs() > 1e-10 {
                    return Err(QmsError::PreconditionFailed(format!(
                        "detailed balance residual {:.3e} at ({u},{v})",
                        res.abs()
                    )));
                }
            }
        }
        Ok(ClassicalChain {
            n,
            generator,
            stationary,
        })
    }

    /// Eigendecomposition of the symmetrized generator
    /// `S = D^{1/2} L D^{−1/2}`, `D = diag(μ)` (real symmetric).
    pub fn sym_eig(&self) -> Result<(RVec, RMat), QmsError> {
        let n = self.n;
        let s = RMat::from_fn(n, n, |u, v| {
            (self.stationary[u] / self.stationary[v]).sqrt() * self.generator[(u, v)]
        });
        let sym = (&s + s.transpose()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::try_new(sym.clone(), 1e-13, 0)
            .ok_or(QmsError::NonConvergence { dim: n })?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let vals = RVec::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
        let vecs = RMat::from_columns(
            &idx.iter()
                .map(|&i| eig.eigenvectors.column(i).clone_owned())
                .collect::<Vec<_>>(),
        );
        Ok((vals, vecs))
    }

    /// Smallest nonzero eigenvalue.
    pub fn spectral_gap(&self, tols: &Tolerances) -> Result<f64, QmsError> {
        let (vals, _) = self.sym_eig()?;
        Ok(vals
            .iter()
            .copied()
            .filter(|&v| v >= tols.gap_cluster)
            .fold(f64::INFINITY, f64::min))
    }

    /// `‖T_t − E: L₁(μ) → L_∞(μ)‖ = max_{u,v} |p_t(u,v)/μ(v) − 1|`.
    pub fn linf_distance(&self, t: f64) -> Result<f64, QmsError> {
        let (vals, vecs) = self.sym_eig()?;
        let n = self.n;
        let mut worst = 0.0_f64;
        for u in 0..n {
            for v in 0..n {
                // h_t(u,v) = Σ_k e^{−λ_k t} ψ_k(u)ψ_k(v)/√(μ_u μ_v); the
                // kernel eigenvector contributes exactly 1.
                let mut h = 0.0;
                for k in 0..n {
                    h += (-vals[k] * t).exp() * vecs[(u, k)] * vecs[(v, k)];
                }
                h /= (self.stationary[u] * self.stationary[v]).sqrt();
                worst = worst.max((h - 1.0).abs());
            }
        }
        Ok(worst)
    }
}

/// Cyclic nearest-neighbour walk on `d` points: `K(i,j) = ½` iff
/// `|i−j| = 1 (mod d)`.
pub fn cyclic_walk(d: usize) -> Result<StochasticKernel, QmsError> {
    if d < 3 {
        return Err(QmsError::PreconditionFailed("cyclic walk needs d ≥ 3".into()));
    }
    let kernel = RMat::from_fn(d, d, |i, j| {
        let diff = (i + d - j) % d;
        if diff == 1 || diff == d - 1 {
            0.5
        } else {
            0.0
        }
    });
    StochasticKernel::new(kernel, RVec::from_element(d, 1.0 / d as f64))
}

/// Exact spectrum of the cyclic walk: `cos(2πj/d)`, `j = 0..d−1`.
pub fn cyclic_walk_spectrum(d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| (2.0 * std::f64::consts::PI * j as f64 / d as f64).cos())
        .collect()
}

/// Cyclic graph Laplacian `L = 2(I − K_{C_d})` as a classical chain;
/// spectrum `2(1 − cos(2πj/d))`.
pub fn cyclic_laplacian(d: usize) -> Result<ClassicalChain, QmsError> {
    let walk = cyclic_walk(d)?;
    let gen = (RMat::identity(d, d) - &walk.kernel).scale(2.0);
    ClassicalChain::new(gen, walk.stationary)
}

/// `L_∞`-mixing time `inf{t > 0 : ‖T_t − E‖_{1→∞} ≤ ε}` by doubling bracket
/// and bisection.
pub fn classical_mixing_time(
    chain: &ClassicalChain,
    eps: f64,
    tols: &Tolerances,
) -> Result<f64, QmsError> {
    let (vals, _) = chain.sym_eig()?;
    let zero_count = vals.iter().filter(|&&v| v.abs() < tols.gap_cluster).count();
    if zero_count != 1 {
        return Err(QmsError::NotErgodic(format!(
            "kernel multiplicity {zero_count} ≠ 1: chain is not ergodic"
        )));
    }
    let gap = chain.spectral_gap(tols)?;
    let m = |t: f64| chain.linf_distance(t);
    let mut t_hi = 1.0 / gap;
    let mut doublings = 0;
    while m(t_hi)? > eps {
        t_hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(QmsError::BracketNotFound("L∞ distance never below ε".into()));
        }
    }
    let mut t_lo = t_hi / 2.0;
    let mut halvings = 0;
    while m(t_lo)? <= eps {
        t_hi = t_lo;
        t_lo /= 2.0;
        halvings += 1;
        if halvings > 80 {
            return Ok(t_lo);
        }
    }
    while t_hi - t_lo > tols.bisect_rel * t_hi {
        let mid = 0.5 * (t_lo + t_hi);
        if m(mid)? <= eps {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    Ok(0.5 * (t_lo + t_hi))
}

/// MLSI lower bounds available for a classical reversible chain.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ClassicalBounds {
    pub lambda: f64,
    /// `λ / (2(λt₀ + ln C₀ + ln 10))`.
    pub cmlsi_bound: f64,
    /// `λ / (λt₀ + ln C₀ + 1)`.
    pub dsc_bound: f64,
    /// `4 + ln ln ‖μ^{−1}‖_∞` comparison value.
    pub loglog: f64,
}

/// Evaluate the classical CMLSI/LSI lower bounds; `(t0, c0)` default to
/// `(0, ‖μ^{−1}‖_∞)`.
pub fn classical_bounds(
    chain: &ClassicalChain,
    t0: Option<f64>,
    c0: Option<f64>,
    tols: &Tolerances,
) -> Result<ClassicalBounds, QmsError> {
    let lambda = chain.spectral_gap(tols)?;
    let inv_mu_max = chain
        .stationary
        .iter()
        .map(|&m| 1.0 / m)
        .fold(0.0_f64, f64::max);
    let t0 = t0.unwrap_or(0.0);
    let c0 = c0.unwrap_or(inv_mu_max);
    let denom = lambda * t0 + c0.ln() + 10.0_f64.ln();
    let cmlsi_bound = lambda / (2.0 * denom);
    let dsc_bound = lambda / (lambda * t0 + c0.ln() + 1.0);
    if cmlsi_bound > lambda + 1e-9 {
        return Err(QmsError::PreconditionFailed(
            "classical CMLSI bound exceeds the spectral gap".into(),
        ));
    }
    Ok(ClassicalBounds {
        lambda,
        cmlsi_bound,
        dsc_bound,
        loglog: 4.0 + inv_mu_max.ln().ln(),
    })
}

/// Depolarizing Lindbladian `L = id − E_φ` for a faithful reference,
/// realized in GNS canonical form with weighted matrix-unit jumps
/// `V_kl = (√(μ_k μ_l)/2)^{1/2} e_kl` in the reference eigenbasis.
pub fn depolarizing(reference: &DensityMatrix, tols: &Tolerances) -> Result<Lindbladian, QmsError> {
    let d = reference.dim();
    let (mu, u) = crate::matcore::eig_hermitian(reference.mat())?;
    if mu[0] <= tols.support_cutoff {
        return Err(QmsError::SingularReference { min_eig: mu[0] });
    }
    let mut jumps = Vec::with_capacity(d * d);
    let mut weights = Vec::with_capacity(d * d);
    for k in 0..d {
        for l in 0..d {
            let c = (mu[k] * mu[l]).sqrt() / 2.0;
            jumps.push(&u * matrix_unit(d, k, l).scale(c.sqrt()) * u.adjoint());
            weights.push((mu[l] / mu[k]).ln());
        }
    }
    lindbladian_gns(&jumps, &weights, reference, tols)
}

/// A noncommutative birth–death chain on the path graph `0 — 1 — ⋯ — n−1`
/// with thermal stationary law `μ_j ∝ e^{−βj}` and edge weights `w`.
///
/// The struct itself stays lightweight (`O(n)` data): spectral quantities
/// are available through closed formulas and `n×n` blocks, while the dense
/// `n²×n²` Lindbladian is assembled on demand by [`BirthDeath::lindbladian`].
#[derive(Debug, Clone)]
pub struct BirthDeath {
    pub n: usize,
    pub beta: f64,
    pub weights: Vec<f64>,
    pub mu: Vec<f64>,
}

impl BirthDeath {
    /// Potential `β_{rs} = ln(μ_s/μ_r)` for adjacent `r, s`.
    fn beta_edge(&self, r: usize, s: usize) -> f64 {
        (self.mu[s] / self.mu[r]).ln()
    }

    fn edge_weight(&self, r: usize, s: usize) -> Option<f64> {
        if r + 1 == s {
            Some(self.weights[r])
        } else if s + 1 == r {
            Some(self.weights[s])
        } else {
            None
        }
    }

    /// Off-diagonal eigenvalue
    /// `γ_rs = 2(Σ_{(r,j)∈E} w e^{β_rj/2} + Σ_{(k,s)∈E} w e^{−β_ks/2})`.
    pub fn gamma(&self, r: usize, s: usize) -> f64 {
        let mut g = 0.0;
        for j in 0..self.n {
            if let Some(w) = self.edge_weight(r, j) {
                g += w * (self.beta_edge(r, j) / 2.0).exp();
            }
            if let Some(w) = self.edge_weight(j, s) {
                g += w * (-self.beta_edge(j, s) / 2.0).exp();
            }
        }
        2.0 * g
    }

    /// Generator of the classical diagonal block: `(Qf)(u) = Σ_m Q[u,m] f(m)`
    /// with `diag(Qf) = L(diag f)`.  Per edge `{r, s}` (with `s = r+1`):
    /// `Q[r,r] += 4w e^{β_rs/2}`, `Q[s,s] += 4w e^{−β_rs/2}`,
    /// `Q[r,s] = −4w e^{β_rs/2}`, `Q[s,r] = −4w e^{−β_rs/2}`.
    pub fn classical_block(&self) -> RMat {
        let n = self.n;
        let mut q = RMat::zeros(n, n);
        for r in 0..n - 1 {
            let s = r + 1;
            let w = self.weights[r];
            let b = self.beta_edge(r, s);
            q[(r, r)] += 4.0 * w * (b / 2.0).exp();
            q[(s, s)] += 4.0 * w * (-b / 2.0).exp();
            q[(r, s)] -= 4.0 * w * (b / 2.0).exp();
            q[(s, r)] -= 4.0 * w * (-b / 2.0).exp();
        }
        q
    }

    /// The canonical jump list: `√(2w)·e_{rs}` with Bohr weight `β_rs` and
    /// its adjoint with `−β_rs` for every edge.
    pub fn jump_data(&self) -> (Vec<CMat>, Vec<f64>) {
        let n = self.n;
        let mut jumps = Vec::with_capacity(2 * (n - 1));
        let mut bohr = Vec::with_capacity(2 * (n - 1));
        for r in 0..n - 1 {
            let s = r + 1;
            let beta_rs = self.beta_edge(r, s);
            let scale = (2.0 * self.weights[r]).sqrt();
            jumps.push(matrix_unit(n, r, s).scale(scale));
            bohr.push(beta_rs);
            jumps.push(matrix_unit(n, s, r).scale(scale));
            bohr.push(-beta_rs);
        }
        (jumps, bohr)
    }

    /// Assemble the dense Lindbladian and verify the structure facts:
    /// diagonal invariance with the closed-form classical block, matrix
    /// units as `γ_rs`-eigenvectors, and one-dimensional kernel (GNS symmetry
    /// is checked inside `lindbladian_gns`).
    pub fn lindbladian(&self, tols: &Tolerances) -> Result<Lindbladian, QmsError> {
        let n = self.n;
        let reference = DensityMatrix::from_probs(&self.mu)?;
        let (jumps, bohr) = self.jump_data();
        let lind = lindbladian_gns(&jumps, &bohr, &reference, tols)?;
        let q_closed = self.classical_block();
        for m in 0..n {
            let img = lind.generator.apply(&matrix_unit(n, m, m));
            for u in 0..n {
                for v in 0..n {
                    let expect = if u == v { q_closed[(u, m)] } else { 0.0 };
                    if (img[(u, v)] - cr(expect)).norm() > 1e-10 * q_closed[(u, u)].abs().max(1.0) {
                        return Err(QmsError::PreconditionFailed(
                            "diagonal block disagrees with the closed-form rates".into(),
                        ));
                    }
                }
            }
        }
        for r in 0..n {
            for s in 0..n {
                if r == s {
                    continue;
                }
                let e_rs = matrix_unit(n, r, s);
                let img = lind.generator.apply(&e_rs);
                let expected = e_rs.scale(self.gamma(r, s));
                if crate::matcore::max_abs(&(&img - &expected)) > 1e-10 * self.gamma(r, s).max(1.0)
                {
                    return Err(QmsError::PreconditionFailed(format!(
                        "matrix unit e_{r}{s} is not a γ-eigenvector"
                    )));
                }
            }
        }
        if lind.kernel_dimension(tols) != 1 {
            return Err(QmsError::NotErgodic(format!(
                "birth–death kernel dimension {} ≠ 1",
                lind.kernel_dimension(tols)
            )));
        }
        Ok(lind)
    }
}

/// Validate parameters and build the lightweight birth–death model.
pub fn nc_birth_death(n: usize, beta: f64, weights: Option<&[f64]>) -> Result<BirthDeath, QmsError> {
    if n < 2 {
        return Err(QmsError::PreconditionFailed("birth–death chain needs n ≥ 2".into()));
    }
    let w: Vec<f64> = match weights {
        Some(ws) => {
            if ws.len() != n - 1 || ws.iter().any(|&x| x <= 0.0) {
                return Err(QmsError::PreconditionFailed(
                    "need n−1 strictly positive edge weights".into(),
                ));
            }
            ws.to_vec()
        }
        None => vec![1.0; n - 1],
    };
    let z: f64 = (0..n).map(|j| (-beta * j as f64).exp()).sum();
    let mu: Vec<f64> = (0..n).map(|j| (-beta * j as f64).exp() / z).collect();
    Ok(BirthDeath {
        n,
        beta,
        weights: w,
        mu,
    })
}

/// Diagonal/off-diagonal decomposition norms of `T_t − E`:
/// classical `L₁→L_∞` norm of the diagonal block, the exact operator norm of
/// the off-diagonal Schur matrix
/// `A_t = Σ_{r≠s} μ_r^{−1/2} e^{−γ_rs t} μ_s^{−1/2} e_rs`, and its Schur-test
/// row-sum upper bound.
pub fn bd_decomposition_bound(bd: &BirthDeath, t: f64) -> Result<(f64, f64, f64), QmsError> {
    let n = bd.n;
    let chain = ClassicalChain::new(bd.classical_block(), RVec::from_vec(bd.mu.clone()))?;
    let diag_norm = chain.linf_distance(t)?;
    let a = RMat::from_fn(n, n, |r, s| {
        if r == s {
            0.0
        } else {
            (-bd.gamma(r, s) * t).exp() / (bd.mu[r] * bd.mu[s]).sqrt()
        }
    });
    let offdiag_norm = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0_f64, f64::max);
    let schur_bound = (0..n)
        .map(|r| a.row(r).iter().sum::<f64>())
        .fold(0.0_f64, f64::max);
    if offdiag_norm > schur_bound + 1e-9 * schur_bound.max(1.0) {
        return Err(QmsError::PreconditionFailed(
            "Schur test violated by the exact norm".into(),
        ));
    }
    Ok((diag_norm, offdiag_norm, schur_bound))
}

/// Structured fast path for the birth–death CB return time: the Choi matrix
/// of `T_t − cE` decomposes into one `n×n` central block (off-diagonal
/// entries `e^{−γ_ij t}`, diagonal `q_t(i,i) − cμ_i`) plus scalar entries
/// `q_t(u,i) − cμ_i` for `u ≠ i`, so the CP-sandwich predicate needs only
/// `n×n` eigenproblems.
pub fn bd_tcb_structured(bd: &BirthDeath, eps: f64, tols: &Tolerances) -> Result<f64, QmsError> {
    let n = bd.n;
    let l_cl = bd.classical_block();
    let chain = ClassicalChain::new(l_cl, RVec::from_vec(bd.mu.clone()))?;
    let (vals, vecs) = chain.sym_eig()?;
    let q_t = |t: f64| -> RMat {
        // q_t(u,m) = T_t(e_mm)[u,u] = [e^{−tQ}][u,m]; with S = D^{1/2}QD^{−1/2}
        // this is Σ_k e^{−λ_k t} ψ_k(u) ψ_k(m) √(μ_m/μ_u).
        RMat::from_fn(n, n, |u, m| {
            let mut s = 0.0;
            for k in 0..n {
                s += (-vals[k] * t).exp() * vecs[(u, k)] * vecs[(m, k)];
            }
            s * (bd.mu[m] / bd.mu[u]).sqrt()
        })
    };
    // Minimum eigenvalue of Choi(T_t − cE).
    let choi_min = |t: f64, c: f64| -> Result<f64, QmsError> {
        let q = q_t(t);
        let mut central = RMat::from_fn(n, n, |i, j| {
            if i == j {
                q[(i, i)] - c * bd.mu[i]
            } else {
                (-bd.gamma(i, j) * t).exp()
            }
        });
        central = (&central + central.transpose()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::try_new(central, 1e-13, 0)
            .ok_or(QmsError::NonConvergence { dim: n })?;
        let mut min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        for i in 0..n {
            for u in 0..n {
                if u != i {
                    min = min.min(q[(u, i)] - c * bd.mu[i]);
                }
            }
        }
        Ok(min)
    };
    let p = |t: f64| -> Result<bool, QmsError> {
        // (1−ε)E ≤ T_t  ⟺  Choi(T_t − (1−ε)E) PSD;  T_t ≤ (1+ε)E likewise.
        Ok(choi_min(t, 1.0 - eps)? >= -tols.psd_tol && {
            // Choi((1+ε)E − T_t): negate and swap.
            let q = q_t(t);
            let mut central = RMat::from_fn(n, n, |i, j| {
                if i == j {
                    (1.0 + eps) * bd.mu[i] - q[(i, i)]
                } else {
                    -(-bd.gamma(i, j) * t).exp()
                }
            });
            central = (&central + central.transpose()).scale(0.5);
            let eig = nalgebra::SymmetricEigen::try_new(central, 1e-13, 0)
                .ok_or(QmsError::NonConvergence { dim: n })?;
            let mut min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            for i in 0..n {
                for u in 0..n {
                    if u != i {
                        min = min.min((1.0 + eps) * bd.mu[i] - q[(u, i)]);
                    }
                }
            }
            min >= -tols.psd_tol
        })
    };
    let gap = chain.spectral_gap(tols)?;
    let mut t_hi = 1.0 / gap;
    let mut doublings = 0;
    while !p(t_hi)? {
        t_hi *= 2.0;
        doublings += 1;
        if doublings > 40 {
            return Err(QmsError::BracketNotFound("CP sandwich never satisfied".into()));
        }
    }
    let mut t_lo = t_hi / 2.0;
    let mut halvings = 0;
    while p(t_lo)? {
        t_hi = t_lo;
        t_lo /= 2.0;
        halvings += 1;
        if halvings > 80 {
            return Ok(t_lo);
        }
    }
    while t_hi - t_lo > tols.bisect_rel * t_hi {
        let mid = 0.5 * (t_lo + t_hi);
        if p(mid)? {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    Ok(0.5 * (t_lo + t_hi))
}

/// Entropy production `I_L(I/n) = tr(L_*(I/n)(ln(I/n) − ln diag μ))` for a
/// birth–death model, from the per-edge closed form: `L_*(I/n)` is diagonal
/// with `v_r += (4w/n)(e^{β_rs/2} − e^{−β_rs/2})`, `v_s −=` the same, per
/// edge `{r, s}`.
pub fn bd_entropy_production_uniform(bd: &BirthDeath) -> f64 {
    let n = bd.n;
    let mut v = vec![0.0_f64; n];
    for r in 0..n - 1 {
        let s = r + 1;
        let b = bd.beta_edge(r, s);
        let dv = 4.0 * bd.weights[r] / n as f64 * ((b / 2.0).exp() - (-b / 2.0).exp());
        v[r] += dv;
        v[s] -= dv;
    }
    (0..n)
        .map(|u| v[u] * (-(n as f64).ln() - bd.mu[u].ln()))
        .sum()
}

/// Upper witness for the birth–death MLSI constant: the uniform test state
/// `ρ = I/n` (i.e. `f(k) ∝ e^{βk}` relative to `μ`) gives
/// `D(ρ‖μ) = ln Z − ln n + β(n−1)/2` (0-based levels) and witness `2I(ρ)/D`.
/// Everything here is `O(n)`; the closed forms are cross-checked against the
/// dense generator in the tests.
pub fn bd_upper_witness(n: usize, beta: f64, tols: &Tolerances) -> Result<f64, QmsError> {
    if n < 3 || beta <= 0.0 {
        return Err(QmsError::PreconditionFailed(
            "witness needs n ≥ 3 and β > 0".into(),
        ));
    }
    let bd = nc_birth_death(n, beta, None)?;
    let reference = DensityMatrix::from_probs(&bd.mu)?;
    let rho = DensityMatrix::maximally_mixed(n);
    let z: f64 = (0..n).map(|j| (-beta * j as f64).exp()).sum();
    let d_closed = z.ln() - (n as f64).ln() + beta * (n as f64 - 1.0) / 2.0;
    // Cross-check the closed form numerically while the smallest thermal
    // weight is still well inside double-precision support.
    if *bd.mu.last().unwrap() > 1e-12 {
        let d_numeric = relative_entropy(&rho, &reference, tols)?;
        if (d_closed - d_numeric).abs() > 1e-10 * d_closed.max(1.0) {
            return Err(QmsError::PreconditionFailed(format!(
                "witness entropy mismatch: closed {d_closed} vs numeric {d_numeric}"
            )));
        }
    }
    Ok(2.0 * bd_entropy_production_uniform(&bd) / d_closed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Spin-`j` angular momentum matrix for one axis (`two_j = 2j`), built from
/// the standard ladder operators.
pub fn spin_matrix(two_j: usize, axis: Axis) -> CMat {
    let d = two_j + 1;
    let j = two_j as f64 / 2.0;
    // Basis row i ↦ m = j − i.
    let mut plus = CMat::zeros(d, d);
    for i in 1..d {
        let m = j - i as f64; // J+ |m⟩ = √(j(j+1) − m(m+1)) |m+1⟩
        plus[(i - 1, i)] = cr((j * (j + 1.0) - m * (m + 1.0)).sqrt());
    }
    let minus = plus.adjoint();
    match axis {
        Axis::X => (&plus + &minus).scale(0.5),
        Axis::Y => (&plus - &minus) * crate::matcore::c(0.0, -0.5),
        Axis::Z => CMat::from_fn(d, d, |r, c_| {
            if r == c_ {
                cr(j - r as f64)
            } else {
                cr(0.0)
            }
        }),
    }
}

/// SU(2) transference generator `L(x) = Σ_A ({V_A², x} − 2 V_A x V_A)` with
/// Hermitian jumps `V_A = 2J_A` (weight 0, trace reference) for the chosen
/// generator subset; the skew-Hermitian derivations `d(A) = −2iJ_A` satisfy
/// `[d(X), d(Y)] = 2 d(Z)`.
pub fn su2_transference(
    two_j: usize,
    axes: &[Axis],
    tols: &Tolerances,
) -> Result<Lindbladian, QmsError> {
    if axes.is_empty() {
        return Err(QmsError::PreconditionFailed("need at least one generator".into()));
    }
    let d = two_j + 1;
    // Lie bracket sanity: [d(X), d(Y)] = 2 d(Z) and cyclic.
    let dx = spin_matrix(two_j, Axis::X) * crate::matcore::c(0.0, -2.0);
    let dy = spin_matrix(two_j, Axis::Y) * crate::matcore::c(0.0, -2.0);
    let dz = spin_matrix(two_j, Axis::Z) * crate::matcore::c(0.0, -2.0);
    let bracket = &dx * &dy - &dy * &dx;
    if crate::matcore::max_abs(&(&bracket - &dz.scale(2.0))) > 1e-10 {
        return Err(QmsError::PreconditionFailed(
            "Lie bracket relation [d(X), d(Y)] = 2 d(Z) failed".into(),
        ));
    }
    let jumps: Vec<CMat> = axes
        .iter()
        .map(|&a| spin_matrix(two_j, a).scale(2.0))
        .collect();
    let weights = vec![0.0; jumps.len()];
    lindbladian_gns(&jumps, &weights, &DensityMatrix::maximally_mixed(d), tols)
}

/// Result of the Rothaus-failure computation on the two-atom `M₂`-valued
/// model.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RothausRecord {
    /// BKM metric value `γ_f(2h)` computed numerically.
    pub bkm_numeric: f64,
    /// Closed form `(2/η) ln((1+η)/(1−η)) · ‖h‖₂²`.
    pub closed_form: f64,
    /// `D(h²‖E_μ h²) + ‖h‖₂²`.
    pub rothaus_rhs: f64,
    /// `rothaus_rhs / bkm_numeric` — the effective constant at second order.
    pub ratio: f64,
    pub h_norm_sq: f64,
}

/// The Rothaus-inequality failure: as `η → 1` the BKM (Fisher) side blows up
/// logarithmically while the entropy side stays bounded, so the ratio tends
/// to zero.  Model: two atoms of mass `r`, `1−r`, each carrying an `M₂`
/// factor, embedded block-diagonally in `M₄` with weighted trace
/// `τ(g) = tr(Dg)`, `D = diag(r, r, 1−r, 1−r)/2`.
pub fn rothaus_counterexample(
    eta: f64,
    r: f64,
    tols: &Tolerances,
) -> Result<RothausRecord, QmsError> {
    if !(0.0 < eta && eta < 1.0 && 0.0 < r && r < 1.0) {
        return Err(QmsError::DomainError("η and r must lie in (0,1)".into()));
    }
    // f = diag(1+η, 1−η) ⊗ 1, h = [[0,h₀],[h₀,0]] with h₀ = (1−r)1_X − r1_{X^c}.
    let mut f = CMat::zeros(4, 4);
    f[(0, 0)] = cr(1.0 + eta);
    f[(1, 1)] = cr(1.0 - eta);
    f[(2, 2)] = cr(1.0 + eta);
    f[(3, 3)] = cr(1.0 - eta);
    let mut h = CMat::zeros(4, 4);
    h[(0, 1)] = cr(1.0 - r);
    h[(1, 0)] = cr(1.0 - r);
    h[(2, 3)] = cr(-r);
    h[(3, 2)] = cr(-r);
    let dw = [r / 2.0, r / 2.0, (1.0 - r) / 2.0, (1.0 - r) / 2.0];
    let sqrt_d = CMat::from_fn(4, 4, |i, j| if i == j { cr(dw[i].sqrt()) } else { cr(0.0) });
    let h_norm_sq = r * (1.0 - r);
    // Weighted BKM metric: D commutes with f and h, so
    // γ^τ_f(X) = γ_f(X·√D) in the plain trace.
    let x = h.scale(2.0) * &sqrt_d;
    let bkm_numeric = bkm_metric_general(&f, &x, tols)?;
    let closed_form = (2.0 / eta) * ((1.0 + eta) / (1.0 - eta)).ln() * h_norm_sq;
    if (bkm_numeric - closed_form).abs() > 1e-8 * closed_form {
        return Err(QmsError::PreconditionFailed(format!(
            "BKM closed form mismatch: {bkm_numeric} vs {closed_form}"
        )));
    }
    // D(h²‖E_μ h²) with respect to the weighted trace: h² is diagonal, so
    // this is a scalar computation over the four weighted atoms.
    let c = h_norm_sq; // E_μ h² = τ(h²) · 1 = r(1−r) · 1
    let mut rel = 0.0;
    for i in 0..4 {
        let a = h[(i, [1usize, 0, 3, 2][i])].norm().powi(2); // (h²)_{ii}
        rel += dw[i] * a * (a.ln() - c.ln());
    }
    let rothaus_rhs = rel + h_norm_sq;
    Ok(RothausRecord {
        bkm_numeric,
        closed_form,
        rothaus_rhs,
        ratio: rothaus_rhs / bkm_numeric,
        h_norm_sq,
    })
}

/// Seeded random GNS Lindbladian with weighted matrix-unit jumps on a
/// diagonal faithful reference.
pub fn random_gns_lindbladian(
    d: usize,
    num_jumps: usize,
    probs: &[f64],
    seed: u64,
    tols: &Tolerances,
) -> Result<Lindbladian, QmsError> {
    if probs.len() != d || num_jumps == 0 {
        return Err(QmsError::PreconditionFailed(
            "need d probabilities and at least one jump".into(),
        ));
    }
    let reference = DensityMatrix::from_probs(probs)?;
    let mut rng = crate::sampling::rng(seed);
    let mut jumps = Vec::with_capacity(2 * num_jumps);
    let mut weights = Vec::with_capacity(2 * num_jumps);
    for _ in 0..num_jumps {
        let k = rng.gen_range(0..d);
        let l = loop {
            let l = rng.gen_range(0..d);
            if l != k {
                break l;
            }
        };
        let s: f64 = rng.gen_range(0.5..1.5);
        let w = (probs[l] / probs[k]).ln();
        jumps.push(matrix_unit(d, k, l).scale(s));
        weights.push(w);
        jumps.push(matrix_unit(d, l, k).scale(s));
        weights.push(-w);
    }
    lindbladian_gns(&jumps, &weights, &reference, tols)
}
