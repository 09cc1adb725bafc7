//! Sampling, the exact log-likelihood ratio, and per-draw diagnostics.
//!
//! The MLE of the categorical model is the empirical pmf, so the statistic
//! has the closed form Lambda_n = 2 sum_j k_j ln(k_j / (n theta_j)) with the
//! 0 ln 0 := 0 convention. The diagnostic quantities (standardized score,
//! empirical information matrix, remainder matrix, Neumann-similar matrix B,
//! and the third-derivative envelope G) feed the lemma test suites.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::model::{Model, SymMatrix};

/// A multinomial outcome: category counts summing to n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    n: u64,
    k: Vec<u64>,
}

impl Counts {
    pub fn new(n: u64, k: Vec<u64>) -> Result<Self> {
        if k.len() < 2 {
            return Err(Error::DomainError("need at least two categories".into()));
        }
        let sum: u64 = k.iter().sum();
        if sum != n {
            return Err(Error::DomainError(format!(
                "counts sum to {sum}, expected n={n}"
            )));
        }
        Ok(Counts { n, k })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    pub fn all_positive(&self) -> bool {
        self.k.iter().all(|&k| k > 0)
    }
}

/// Per-draw quantities consumed by the lemma suites.
#[derive(Debug, Clone)]
pub struct DrawDiagnostics {
    /// Lambda_n, the log-likelihood ratio.
    pub lambda_n: f64,
    /// t_n^T J_n^{-1} t_n.
    pub quad_form: f64,
    /// ||l_n||_2 with l_n = sqrt(n) (theta* - theta0).
    pub l_norm: f64,
    /// Spectral norm of R_n = J_n - Sigma.
    pub r_norm: f64,
    /// Spectral norm of B = Sigma^{-1/2} R_n Sigma^{-1/2}.
    pub b_norm: f64,
    /// Spectral norm of J_n^{-1}.
    pub jinv_norm: f64,
    /// Exact Gbar_n.
    pub gbar_exact: f64,
    /// Closed-form upper bound on Gbar_n, +inf when its precondition fails.
    pub gbar_upper: f64,
    /// Bound on |Lambda_n - quad_form| from the Taylor remainders.
    pub remainder_bound: f64,
}

/// Draws multinomial counts, deterministic in `seed`.
///
/// Sampling uses the binomial-chain decomposition: category j receives a
/// Binomial(remaining, theta_j / remaining mass) count, so a draw costs O(r)
/// independent of n. The generator is ChaCha8 seeded directly with `seed`;
/// this mapping is part of the stable output contract.
pub fn sample_counts(m: &Model, n: u64, seed: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_counts_rng(m, n, &mut rng)
}

/// Binomial-chain draw with a caller-provided generator.
pub fn sample_counts_rng<R: Rng + ?Sized>(m: &Model, n: u64, rng: &mut R) -> Counts {
    let theta = m.theta();
    let cats = theta.len();
    let mut k = vec![0u64; cats];
    let mut remaining = n;
    let mut mass = 1.0;
    for j in 0..cats - 1 {
        if remaining == 0 {
            break;
        }
        let p = (theta[j] / mass).clamp(0.0, 1.0);
        let kj = Binomial::new(remaining, p)
            .expect("probability in [0,1]")
            .sample(rng);
        k[j] = kj;
        remaining -= kj;
        mass -= theta[j];
    }
    k[cats - 1] = remaining;
    Counts { n, k }
}

pub(crate) fn llr_raw(theta: &[f64], n: u64, k: &[u64]) -> f64 {
    let nf = n as f64;
    let mut s = 0.0;
    for (&kj, &tj) in k.iter().zip(theta) {
        if kj > 0 {
            let kf = kj as f64;
            s += kf * (kf / (nf * tj)).ln();
        }
    }
    // Gibbs: non-negative up to round-off
    (2.0 * s).max(0.0)
}

/// Exact log-likelihood ratio Lambda_n = 2n KL(theta* || theta0).
pub fn llr(m: &Model, c: &Counts) -> f64 {
    llr_raw(m.theta(), c.n(), c.k())
}

/// Standardized score t_n, length r.
pub fn score(m: &Model, c: &Counts) -> DVector<f64> {
    let theta = m.theta();
    let r = m.r();
    let n = c.n() as f64;
    let k = c.k();
    let last = k[r] as f64 / (n * theta[r]);
    DVector::from_fn(r, |u, _| n.sqrt() * (k[u] as f64 / (n * theta[u]) - last))
}

/// Empirical information matrix J_n; singular iff some count is zero.
pub fn empirical_info(m: &Model, c: &Counts) -> SymMatrix {
    let theta = m.theta();
    let r = m.r();
    let n = c.n() as f64;
    let k = c.k();
    let rank1 = k[r] as f64 / (n * theta[r] * theta[r]);
    let mut j = DMatrix::from_element(r, r, rank1);
    for u in 0..r {
        j[(u, u)] += k[u] as f64 / (n * theta[u] * theta[u]);
    }
    SymMatrix::new_unchecked(j)
}

/// Exact Gbar_n. The supremum of the third derivative along the segment from
/// theta0 to theta* is attained at an endpoint (each coordinate is affine on
/// the segment), so G(j) = 2 / min(theta0_j, theta*_j)^3.
pub fn g_sup(m: &Model, c: &Counts) -> f64 {
    let theta = m.theta();
    let n = c.n() as f64;
    let mut acc = 0.0;
    for (&kj, &tj) in c.k().iter().zip(theta) {
        if kj == 0 {
            continue;
        }
        let emp = kj as f64 / n;
        let lo = tj.min(emp);
        if lo <= 0.0 {
            return f64::INFINITY;
        }
        acc += kj as f64 * 2.0 / (lo * lo * lo);
    }
    acc / n
}

/// Closed-form bound Gbar_n <= 2 / (theta_min - sqrt(r/n) ||l_n||)^3,
/// valid when ||l_n|| <= sqrt(n/r) theta_min.
pub fn gbar_upper(m: &Model, l_norm: f64, n: u64) -> Result<f64> {
    let r = m.r() as f64;
    let nf = n as f64;
    let cap = (nf / r).sqrt() * m.theta_min();
    if l_norm > cap {
        return Err(Error::PreconditionViolated(format!(
            "||l_n|| = {l_norm} exceeds sqrt(n/r) theta_min = {cap}"
        )));
    }
    let den = m.theta_min() - (r / nf).sqrt() * l_norm;
    Ok(2.0 / (den * den * den))
}

/// Populates every per-draw diagnostic. Requires all counts positive so J_n
/// is invertible.
pub fn diagnostics(m: &Model, c: &Counts) -> Result<DrawDiagnostics> {
    if let Some(idx) = c.k().iter().position(|&k| k == 0) {
        return Err(Error::SingularEmpiricalInfo(idx));
    }
    let r = m.r();
    let n = c.n() as f64;
    let theta = m.theta();

    let lambda_n = llr(m, c);
    let t = score(m, c);
    let j = empirical_info(m, c);
    let jinv = j
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::SingularEmpiricalInfo(0))?;
    let jinv = SymMatrix::new_unchecked((&jinv + jinv.transpose()) * 0.5);
    let quad_form = (t.transpose() * jinv.as_matrix() * &t)[(0, 0)];

    let l = DVector::from_fn(r, |u, _| n.sqrt() * (c.k()[u] as f64 / n - theta[u]));
    let l_norm = l.norm();

    let sigma = m.fisher();
    let rn = SymMatrix::new_unchecked(j.as_matrix() - sigma.as_matrix());
    let r_norm = rn.spectral_norm();

    let s = m.fisher_inv_sqrt()?;
    let b = s.as_matrix() * rn.as_matrix() * s.as_matrix();
    let b = SymMatrix::new_unchecked((&b + b.transpose()) * 0.5);
    let b_norm = b.spectral_norm();

    let jinv_norm = jinv.spectral_norm();
    let gbar_exact = g_sup(m, c);
    let gbar_ub = gbar_upper(m, l_norm, c.n());
    let gbar_upper_val = gbar_ub.clone().unwrap_or(f64::INFINITY);
    let g_for_bound = gbar_ub.unwrap_or(gbar_exact);

    let rf = r as f64;
    let remainder_bound = rf.powi(3) / 4.0 * l_norm.powi(4) / n * g_for_bound * g_for_bound
        * jinv_norm
        + rf.powf(1.5) / 3.0 * l_norm.powi(3) / n.sqrt() * g_for_bound;

    Ok(DrawDiagnostics {
        lambda_n,
        quad_form,
        l_norm,
        r_norm,
        b_norm,
        jinv_norm,
        gbar_exact,
        gbar_upper: gbar_upper_val,
        remainder_bound,
    })
}
