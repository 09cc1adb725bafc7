//! Explicit finite-sample bounds on the CDF of the log-likelihood ratio.
//!
//! Everything here is a closed-form function of (n, a, delta, delta') and the
//! model: the constants omega, nu, epsilon, h, delta_s, Delta(n), the slack mu,
//! the two-sided CDF sandwich, its compact one-sided relaxation, the T1/T2
//! comparator, and the convergence-rate probe.
//!
//! The probability slack uses the n-dependent tail term 2r exp(-2 n delta / r)
//! everywhere (the Hoeffding route fixes the exponent; the n-free variant that
//! appears in two displayed equations is a typo).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::optimizer;
use crate::special::chi2_cdf;

/// All bound-level constants for a given (n, a, delta, delta').
#[derive(Debug, Clone, Serialize)]
pub struct TableOneValues {
    pub omega: f64,
    pub nu: f64,
    pub h_theta: f64,
    pub epsilon: f64,
    pub delta_s: f64,
    pub delta_n: f64,
    pub mu: f64,
}

/// Inputs a bound was evaluated at.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundInputs {
    pub n: u64,
    pub a: f64,
    pub delta: f64,
    pub delta_prime: f64,
}

/// Clamped and raw CDF sandwich plus the constants behind it.
#[derive(Debug, Clone, Serialize)]
pub struct BoundResult {
    pub lower: f64,
    pub upper: f64,
    pub raw_lower: f64,
    pub raw_upper: f64,
    pub inputs: BoundInputs,
    pub table: TableOneValues,
}

impl BoundResult {
    /// True when the raw bounds leave [0, 1] entirely, i.e. the clamped
    /// sandwich is the trivial [0, 1].
    pub fn is_vacuous(&self) -> bool {
        self.raw_lower <= 0.0 && self.raw_upper >= 1.0
    }
}

/// Gap curves T1 (this work) and T2 (bracketing route) at one point.
#[derive(Debug, Clone, Serialize)]
pub struct ComparatorResult {
    pub t1: f64,
    pub t2: f64,
    pub k: f64,
    pub a_s: f64,
}

/// One optimized point of the rate probe.
#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub n: u64,
    pub mu_star: f64,
    pub delta: f64,
    pub delta_prime: f64,
}

/// Least-squares slope of ln mu* against ln n.
#[derive(Debug, Clone, Serialize)]
pub struct RateProfile {
    pub slope: f64,
    pub points: Vec<RatePoint>,
    /// Set when the fitted slope is steeper than -0.55, i.e. the exponential
    /// terms rather than h/sqrt(n) dominate the optimized slack.
    pub epsilon_dominated: bool,
}

/// Matrix-Bernstein constants: variance proxy omega and norm cap nu.
pub fn omega_nu(m: &Model) -> (f64, f64) {
    let tm = m.theta_min();
    let r = m.r() as f64;
    let omega = tm.powi(-3) * (1.0 - tm * (r - 1.0) * (r - 1.0) + r * r);
    let nu = ((r + 1.0) / tm)
        .max(r * (tm.powi(-2) - tm.powi(-1)) - 1.0)
        .max(tm.powi(-2) - tm.powi(-1));
    (omega, nu)
}

/// Third-moment constant h(theta0) of the chi-square approximation penalty.
pub fn h_of_theta(m: &Model) -> f64 {
    let r = m.r();
    let theta = m.theta();
    let mut s = theta[r].powf(-0.5) * (1.0 - theta[r]).powf(1.5);
    for &t in &theta[..r] {
        s += t.powf(-0.5) * (1.0 - t).powf(1.5);
    }
    400.0 * (r as f64).powf(0.25) * s
}

/// Tail bound epsilon(n, delta') = 2r exp(-delta'^2 n / (2 (omega + delta' nu / 3))).
pub fn epsilon_bound(n: u64, delta_prime: f64, omega: f64, nu: f64, r: usize) -> Result<f64> {
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::DomainError(format!(
            "require delta' in (0,1), got {delta_prime}"
        )));
    }
    let exponent = -0.5 * delta_prime * delta_prime * n as f64 / (omega + delta_prime * nu / 3.0);
    Ok(2.0 * r as f64 * exponent.exp())
}

fn check_delta(m: &Model, delta: f64) -> Result<()> {
    let cap = m.theta_min() * m.theta_min() / m.r() as f64;
    if !(delta > 0.0 && delta < cap) {
        return Err(Error::DomainError(format!(
            "require 0 < delta < theta_min^2/r = {cap}, got {delta}"
        )));
    }
    Ok(())
}

/// Threshold shift Delta(n).
pub fn delta_fn(m: &Model, n: u64, a: f64, delta: f64, delta_prime: f64) -> Result<f64> {
    check_delta(m, delta)?;
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::DomainError(format!(
            "require delta' in (0,1), got {delta_prime}"
        )));
    }
    let r = m.r() as f64;
    let nf = n as f64;
    let delta_s = delta_prime / (1.0 - delta_prime);
    let den = m.theta_min() - (r * delta).sqrt();
    Ok(delta_s * a
        + nf * r.powi(3) * delta * delta / ((1.0 - delta_prime) * den.powi(6))
        + 2.0 * nf * r.powf(1.5) * delta.powf(1.5) / (3.0 * den.powi(3)))
}

/// Assembles every Table-level constant at (n, a, delta, delta').
pub fn table_one(m: &Model, n: u64, a: f64, delta: f64, delta_prime: f64) -> Result<TableOneValues> {
    if n == 0 {
        return Err(Error::DomainError("require n >= 1".into()));
    }
    if a < 0.0 {
        return Err(Error::DomainError(format!("require a >= 0, got {a}")));
    }
    let r = m.r();
    let (omega, nu) = omega_nu(m);
    let h_theta = h_of_theta(m);
    let epsilon = epsilon_bound(n, delta_prime, omega, nu, r)?;
    let delta_s = delta_prime / (1.0 - delta_prime);
    let delta_n = delta_fn(m, n, a, delta, delta_prime)?;
    let nf = n as f64;
    let mu = epsilon + 2.0 * r as f64 * (-2.0 * nf * delta / r as f64).exp() + h_theta / nf.sqrt();
    Ok(TableOneValues {
        omega,
        nu,
        h_theta,
        epsilon,
        delta_s,
        delta_n,
        mu,
    })
}

/// Two-sided CDF sandwich for P*_n = P(Lambda_n < a).
///
/// The chi-square argument is floored at 0 on the lower side; delta' >= 1/2
/// makes 1 - delta_s non-positive and the raw upper bound +inf (clamped to 1).
pub fn theorem_bounds(m: &Model, n: u64, a: f64, delta: f64, delta_prime: f64) -> Result<BoundResult> {
    let table = table_one(m, n, a, delta, delta_prime)?;
    let r = m.r();
    let lo_arg = (a - table.delta_n / (1.0 + table.delta_s)).max(0.0);
    let raw_lower = chi2_cdf(r, lo_arg)? - table.mu;
    let raw_upper = if table.delta_s < 1.0 {
        chi2_cdf(r, a + table.delta_n / (1.0 - table.delta_s))? + table.mu
    } else {
        f64::INFINITY
    };
    Ok(BoundResult {
        lower: raw_lower.clamp(0.0, 1.0),
        upper: raw_upper.clamp(0.0, 1.0),
        raw_lower,
        raw_upper,
        inputs: BoundInputs {
            n,
            a,
            delta,
            delta_prime,
        },
        table,
    })
}

/// Compact one-sided bound |P*_n - F(r, a)| <= min(mu', 1), valid once
/// Delta(n) < a (1 + delta_s).
pub fn corollary_compact(m: &Model, n: u64, a: f64, delta: f64, delta_prime: f64) -> Result<f64> {
    let table = table_one(m, n, a, delta, delta_prime)?;
    let ds = table.delta_s;
    let dn = table.delta_n;
    if dn >= a * (1.0 + ds) {
        return Err(Error::ConditionViolated);
    }
    let r = m.r();
    let mu_prime = if r == 1 {
        let branch_plus = if ds < 1.0 {
            (a / 2.0).powf(-0.5) / (1.0 - ds)
        } else {
            f64::INFINITY
        };
        let branch_minus = (a / 2.0 - dn / (2.0 * (1.0 + ds))).powf(-0.5) / (1.0 + ds);
        table.mu + dn / 2.0 * branch_plus.max(branch_minus)
    } else if ds < 1.0 {
        let shift = dn / (2.0 * (1.0 - ds));
        table.mu + shift * (a / 2.0 + shift).powf(r as f64 / 2.0 - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(mu_prime.min(1.0))
}

/// Gap curves T1 and T2 at a single (delta, delta', k) point.
///
/// T1 is the sandwich's upper bound (clamped at 1) minus F(r, a); T2 is the
/// bracketing bound F(r, a_s) + 5 n^{-k} - F(r, a) with
/// a_s = a + k sqrt((r + k ln n)^3 / n). Requires k > 1.85.
pub fn comparator_t1_t2(
    m: &Model,
    n: u64,
    a: f64,
    delta: f64,
    delta_prime: f64,
    k: f64,
) -> Result<ComparatorResult> {
    if k.is_nan() || k <= 1.85 {
        return Err(Error::DomainError(format!("require k > 1.85, got {k}")));
    }
    if n < 2 {
        return Err(Error::DomainError("require n >= 2".into()));
    }
    let bound = theorem_bounds(m, n, a, delta, delta_prime)?;
    let r = m.r();
    let f_a = chi2_cdf(r, a)?;
    let t1 = bound.raw_upper.min(1.0) - f_a;
    let nf = n as f64;
    let a_s = a + k * ((r as f64 + k * nf.ln()).powi(3) / nf).sqrt();
    let t2 = chi2_cdf(r, a_s)? + 5.0 * (-k * nf.ln()).exp() - f_a;
    Ok(ComparatorResult { t1, t2, k, a_s })
}

/// Minimizes mu over (delta, delta') per grid point and fits the slope of
/// ln mu* against ln n. A slope near -1/2 reflects the h/sqrt(n) term
/// dominating the optimized slack.
pub fn rate_probe(m: &Model, n_grid: &[u64], _a: f64) -> Result<RateProfile> {
    if n_grid.len() < 2 {
        return Err(Error::InfeasibleGrid(
            "need at least two grid points to fit a slope".into(),
        ));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InfeasibleGrid("grid must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let opt = optimizer::minimize_mu(m, n);
        points.push(RatePoint {
            n,
            mu_star: opt.objective,
            delta: opt.delta,
            delta_prime: opt.delta_prime,
        });
    }
    if points[0].mu_star >= 1.0 {
        return Err(Error::InfeasibleGrid(format!(
            "optimized mu = {} >= 1 at n = {}",
            points[0].mu_star, points[0].n
        )));
    }
    // least squares on (ln n, ln mu*)
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mu_star.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateProfile {
        slope,
        points,
        epsilon_dominated: slope < -0.55,
    })
}
