//! End-to-end acceptance gate. Each test prints a single pass/fail line for
//! its criterion (visible with `--nocapture`; failures always surface).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use wilks::bounds::{self, epsilon_bound, omega_nu};
use wilks::llr;
use wilks::model::Model;
use wilks::optimizer::{self, Direction};
use wilks::oracle::{self, BoundCase};
use wilks::special::chi2_cdf;
use wilks::Counts;

fn report(criterion: &str, ok: bool) {
    println!("criterion {criterion}: {}", if ok { "pass" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed");
}

fn binary() -> Model {
    Model::new(&[0.4, 0.6]).unwrap()
}

fn random_model(rng: &mut impl Rng, r: usize) -> Model {
    let w: Vec<f64> = (0..=r).map(|_| -rng.gen::<f64>().ln() + 0.05).collect();
    let s: f64 = w.iter().sum();
    Model::new(&w.iter().map(|x| x / s).collect::<Vec<_>>()).unwrap()
}

#[test]
fn criterion_1_fisher_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = rng.gen_range(1..=50);
        let m = random_model(&mut rng, r);
        let prod = m.fisher().as_matrix() * m.fisher_inverse().as_matrix();
        let eye = nalgebra::DMatrix::<f64>::identity(r, r);
        worst = worst.max((&prod - eye).abs().max());
    }
    report("1 (Fisher algebra)", worst < 1e-10);
}

#[test]
fn criterion_2_chi2_cdf() {
    let mut ok = true;
    for i in 0..1000 {
        // log grid over a in [1e-6, 1e3]
        let a = 1e-6 * 10f64.powf(9.0 * i as f64 / 999.0);
        let f = chi2_cdf(2, a).unwrap();
        ok &= (f - (1.0 - (-a / 2.0).exp())).abs() < 1e-12;
    }
    ok &= (chi2_cdf(1, 1.0).unwrap() - 0.682_689_492_1).abs() < 1e-9;
    report("2 (chi-square CDF)", ok);
}

#[test]
fn criterion_3_exact_oracle() {
    let m = binary();
    // independent route: binomial pmf with integer-exact coefficients
    let mut reference = 0.0;
    let mut coef = 1.0f64;
    for k in 0..=20u64 {
        if k > 0 {
            coef *= (21 - k) as f64 / k as f64;
        }
        let kf = k as f64;
        let mut lambda = 0.0;
        if k > 0 {
            lambda += kf * (kf / (20.0 * 0.4)).ln();
        }
        if k < 20 {
            lambda += (20.0 - kf) * ((20.0 - kf) / (20.0 * 0.6)).ln();
        }
        if 2.0 * lambda < 1.0 {
            reference += coef * 0.4f64.powi(k as i32) * 0.6f64.powi(20 - k as i32);
        }
    }
    let exact = oracle::exact_cdf(&m, 20, 1.0).unwrap();
    let mc = oracle::mc_cdf(&m, 20, 1.0, 1_000_000, 20_260_824, 0.01).unwrap();
    let ok = (exact.value - 0.7469).abs() < 5e-4
        && (exact.value - reference).abs() < 1e-12
        && (mc.value - exact.value).abs() < 3.0 * mc.half_width
        && (3.0 * mc.half_width - 4.9e-3).abs() < 1e-4;
    report("3 (exact oracle vs independent sum and MC)", ok);
}

#[test]
fn criterion_4_theorem_sandwich() {
    let m = binary();
    let deltas = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];
    let dps = [0.05, 0.15, 0.3, 0.45];
    let mut grid = Vec::new();
    for n in [50u64, 100, 200] {
        for a in [0.5, 1.0, 2.0, 4.0] {
            for &delta in &deltas {
                for &delta_prime in &dps {
                    grid.push(BoundCase {
                        n,
                        a,
                        delta,
                        delta_prime,
                    });
                }
            }
        }
    }
    let report_out = oracle::validate_bounds(&m, &grid);
    let errored = report_out.cases.iter().filter(|c| c.error.is_some()).count();
    report(
        "4 (sandwich validation, 0 violations)",
        report_out.violations == 0 && errored == 0 && report_out.cases.len() == 240,
    );
}

#[test]
fn criterion_5_informative_regime() {
    let m = binary();
    let b = bounds::theorem_bounds(&m, 100_000_000, 1.0, 1e-7, 0.01).unwrap();
    let f = chi2_cdf(1, 1.0).unwrap();
    let up = optimizer::optimize_theorem(&m, 100_000_000, 1.0, Direction::UpperMin);
    let lo = optimizer::optimize_theorem(&m, 100_000_000, 1.0, Direction::LowerMax);
    let ok = (b.lower - 0.630).abs() < 5e-3
        && (b.upper - 0.736).abs() < 5e-3
        && b.lower < f
        && f < b.upper
        && up.objective <= b.raw_upper + 1e-12
        && lo.objective >= b.raw_lower - 1e-12;
    report("5 (informative regime, optimizer no worse)", ok);
}

#[test]
fn criterion_6_lemma_suites() {
    let mut ok = true;

    // residual, similarity, Neumann inversion, and G-envelope checks per draw
    for theta in [vec![0.4, 0.6], vec![0.25, 0.25, 0.5], vec![0.2, 0.3, 0.2, 0.3]] {
        let m = Model::new(&theta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cap = (1000.0 / m.r() as f64).sqrt() * m.theta_min();
        for _ in 0..1000 {
            let c = llr::sample_counts_rng(&m, 1000, &mut rng);
            if !c.all_positive() {
                continue;
            }
            let d = llr::diagnostics(&m, &c).unwrap();
            if d.l_norm <= cap {
                ok &= (d.lambda_n - d.quad_form).abs() <= d.remainder_bound;
                ok &= d.gbar_exact <= d.gbar_upper * (1.0 + 1e-12);
            }
            ok &= d.b_norm <= d.r_norm + 1e-12;
            // similarity: ||B|| equals the spectral radius of Sigma^{-1} R_n
            let j = llr::empirical_info(&m, &c);
            let rn = j.as_matrix() - m.fisher().as_matrix();
            let sir = m.fisher_inverse().as_matrix() * rn;
            let rho = sir
                .complex_eigenvalues()
                .iter()
                .fold(0.0f64, |acc, l| acc.max(l.norm()));
            ok &= (d.b_norm - rho).abs() < 1e-9;
            if d.r_norm < 1.0 {
                ok &= d.jinv_norm <= 1.0 / (1.0 - d.r_norm) + 1e-12;
            }
        }
    }

    // score-vector tail (Hoeffding form), 1e5 draws per grid point
    let m = binary();
    for (n, delta) in [(30u64, 0.02), (30, 0.05), (100, 0.02), (100, 0.05)] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 100_000u64;
        let mut hits = 0u64;
        for _ in 0..trials {
            let c = llr::sample_counts_rng(&m, n, &mut rng);
            let l = (n as f64).sqrt() * (c.k()[0] as f64 / n as f64 - 0.4);
            if l * l / n as f64 > delta {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let bound = 2.0 * (-2.0 * n as f64 * delta).exp();
        let sigma = (bound.min(1.0) / trials as f64).sqrt();
        ok &= freq <= bound + 3.0 * sigma;
    }

    // remainder-matrix tail against epsilon
    let (omega, nu) = omega_nu(&m);
    for (n, dp) in [(500u64, 0.3), (2000, 0.3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let trials = 10_000u64;
        let mut hits = 0u64;
        for _ in 0..trials {
            let c = llr::sample_counts_rng(&m, n, &mut rng);
            if !c.all_positive() {
                continue;
            }
            if llr::diagnostics(&m, &c).unwrap().r_norm > dp {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        let bound = epsilon_bound(n, dp, omega, nu, 1).unwrap();
        let sigma = (bound.min(1.0) / trials as f64).sqrt();
        ok &= freq <= bound + 3.0 * sigma;
    }

    report("6 (lemma suites, zero violations)", ok);
}

#[test]
fn criterion_7_wilks_convergence() {
    let m = binary();
    let a_grid: Vec<f64> = (0..160).map(|i| 0.05 + 7.95 * i as f64 / 159.0).collect();
    let rows = oracle::wilks_curve(&m, 100_000, 200_000, 2024, &a_grid).unwrap();
    let sup_gap = rows
        .iter()
        .map(|&(_, fhat, f)| (fhat - f).abs())
        .fold(0.0f64, f64::max);
    println!("  sup gap = {sup_gap:.5}");
    report("7 (Wilks convergence, sup gap < 0.01)", sup_gap < 0.01);
}

#[test]
fn criterion_8_rate_probe() {
    let m = binary();
    let n_grid: Vec<u64> = (6..=10).map(|e| 10u64.pow(e)).collect();
    let profile = bounds::rate_probe(&m, &n_grid, 1.0).unwrap();
    println!("  fitted slope = {:.4}", profile.slope);
    report(
        "8 (rate probe slope in [-0.55, -0.45])",
        profile.slope > -0.55 && profile.slope < -0.45 && !profile.epsilon_dominated,
    );
}

#[test]
fn criterion_9_comparison_crossing() {
    let m = binary();
    let n_grid: Vec<u64> = (0..25)
        .map(|i| 10f64.powf(4.0 + 8.0 * i as f64 / 24.0) as u64)
        .collect();
    let rows = oracle::compare_curves(&m, &n_grid, 1.0).unwrap();
    let crossing = rows.iter().any(|&(_, t1, t2)| t2 < t1);
    for &(n, t1, t2) in &rows {
        if t2 < t1 {
            println!("  crossing at n = {n}: T1 = {t1:.5}, T2 = {t2:.5}");
            break;
        }
    }
    report("9 (T2 < T1 for some n)", crossing);
}

#[test]
fn strict_inequality_atoms() {
    // the CDF uses a strict inequality; an atom exactly at a must be excluded
    let m = binary();
    let c = Counts::new(20, vec![10, 10]).unwrap();
    let atom = llr::llr(&m, &c);
    let below = oracle::exact_cdf(&m, 20, atom).unwrap().value;
    let above = oracle::exact_cdf(&m, 20, atom + 1e-9).unwrap().value;
    assert!(above > below + 0.1, "atom not excluded: {below} vs {above}");
}
