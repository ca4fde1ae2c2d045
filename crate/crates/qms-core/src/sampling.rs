//! Seeded random generators for matrices, states and channels used by the
//! property suites and the CLI `verify`/`sweep` commands.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matcore::{c, cr, hermitize, identity, trace, CMat, DensityMatrix, SuperOperator};
use crate::tol::Tolerances;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex Ginibre matrix (iid standard complex Gaussian entries).
pub fn random_complex(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| c(gauss(rng), gauss(rng)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    hermitize(&random_complex(rng, d))
}

/// Haar-ish unitary via QR of a Ginibre matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let qr = random_complex(rng, d).qr();
    qr.q()
}

/// Full-rank random density `(GG* + δI)/tr`, generically faithful.
pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let g = random_complex(rng, d);
    let mut p = &g * g.adjoint();
    p += identity(d).scale(1e-6);
    let tr = trace(&p).re;
    DensityMatrix::new(p.scale(1.0 / tr), &Tolerances::default()).expect("construction is PSD")
}

/// Faithful density with eigenvalues bounded away from zero.
pub fn random_faithful_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let g = random_complex(rng, d);
    let mut p = &g * g.adjoint();
    p += identity(d).scale(0.1);
    let tr = trace(&p).re;
    DensityMatrix::new(p.scale(1.0 / tr), &Tolerances::default()).expect("construction is PSD")
}

/// Diagonal faithful density (a classical probability vector), entries
/// bounded below.
pub fn random_diagonal_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let mut p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= s;
    }
    DensityMatrix::from_probs(&p).expect("valid probability vector")
}

/// Random unital CP map `X ↦ Σ K_j* X K_j` (Heisenberg picture) from Gaussian
/// Kraus operators completed to unitality: with `A = Σ K_j* K_j`, replace
/// `K_j ← K_j A^{-1/2}`.
pub fn random_cp_unital(rng: &mut ChaCha8Rng, d: usize, num_kraus: usize) -> SuperOperator {
    let raw: Vec<CMat> = (0..num_kraus).map(|_| random_complex(rng, d)).collect();
    let mut a = CMat::zeros(d, d);
    for k in &raw {
        a += k.adjoint() * k;
    }
    let a_inv_sqrt = crate::matcore::mat_pow(&a, -0.5, &Tolerances::default())
        .expect("Gram matrix of Gaussian Kraus set is positive definite");
    let kraus: Vec<CMat> = raw.iter().map(|k| k * &a_inv_sqrt).collect();
    SuperOperator::from_action(d, |x| {
        let mut out = CMat::zeros(d, d);
        for k in &kraus {
            out += k.adjoint() * x * k;
        }
        out
    })
}

/// Random trace-symmetric quantum Markov map: a random mixed-unitary channel
/// (unital and trace-preserving) symmetrized as `½(Φ + Φ*)`.
pub fn random_trace_symmetric(rng: &mut ChaCha8Rng, d: usize, num_kraus: usize) -> SuperOperator {
    let probs = random_probs(rng, num_kraus);
    let unitaries: Vec<CMat> = (0..num_kraus).map(|_| random_unitary(rng, d)).collect();
    let s = SuperOperator::from_action(d, |x| {
        let mut out = CMat::zeros(d, d);
        for (p, u) in probs.iter().zip(&unitaries) {
            out += (u.adjoint() * x * u).scale(*p);
        }
        out
    });
    s.add(&s.adjoint_trace()).scale(0.5)
}

/// Random probability vector with entries bounded below (for classical
/// chains and thermal references).
pub fn random_probs(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= s;
    }
    p
}

/// Random real vector with iid standard normal entries.
pub fn random_real_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| gauss(rng))
}

/// Random Hermitian matrix rescaled to unit operator norm, then scaled by `s`.
pub fn random_hermitian_scaled(rng: &mut ChaCha8Rng, d: usize, s: f64) -> CMat {
    let h = random_hermitian(rng, d);
    let n = crate::matcore::op_norm(&h).max(1e-300);
    h.scale(s / n)
}

pub fn cr_vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn constant(v: f64) -> num_complex::Complex<f64> {
    cr(v)
}
