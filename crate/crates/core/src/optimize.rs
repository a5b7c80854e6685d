//! Success-probability optimization over the real preparation angle `ω` and
//! measurement angle `κ` for the ideal PPBS coupling.
//!
//! Each search is a coarse grid over `[0, π/2]` followed by golden-section
//! refinement inside the best grid cell.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{feed_forward_plan, simplified_success, InteractionSpec, PureQubit};

/// Coarse grid step, 0.5°.
pub const GRID_STEP: f64 = 0.5 * std::f64::consts::PI / 180.0;
/// Refinement tolerance in radians.
pub const REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_omega: f64,
    pub best_kappa: f64,
    pub best_p: f64,
    pub grid_resolution: f64,
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSample {
    pub tv_squared: f64,
    pub p: Option<f64>,
    pub omega_star: Option<f64>,
    pub p_tilde: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub samples: Vec<SweepSample>,
}

fn check_tv(tv: f64) -> Result<InteractionSpec> {
    if !(0.0..=1.0).contains(&tv) {
        return Err(Error::out_of_range("t_V", tv, "[0, 1]"));
    }
    InteractionSpec::ppbs(tv)
}

/// Total feed-forward success `p(ω, κ)` for amplitude transmittance `tv`, or
/// `None` when neither branch admits a filter.
pub fn success_probability(tv: f64, omega: f64, kappa: f64) -> Result<Option<f64>> {
    let v = check_tv(tv)?;
    Ok(feed_forward_plan(&v, &PureQubit::from_angle(omega), kappa)
        .ok()
        .map(|plan| plan.total_success))
}

/// Maximizes a unimodal function on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid search over `[0, π/2]` with golden-section refinement. Returns the
/// maximizing angle and value.
fn grid_then_refine(objective: impl Fn(f64) -> Option<f64>) -> Result<(f64, f64, bool)> {
    let steps = (FRAC_PI_2 / GRID_STEP).round() as usize;
    let mut best: Option<(usize, f64)> = None;
    for i in 0..=steps {
        let x = (i as f64 * GRID_STEP).min(FRAC_PI_2);
        if let Some(p) = objective(x) {
            // strict comparison: ties go to the smaller angle
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
    }
    let (i, grid_p) = best.ok_or(Error::AllBranchesDegenerate)?;
    let grid_x = (i as f64 * GRID_STEP).min(FRAC_PI_2);
    let lo = (grid_x - GRID_STEP).max(0.0);
    let hi = (grid_x + GRID_STEP).min(FRAC_PI_2);
    let (x, p) = golden_section_max(|x| objective(x).unwrap_or(f64::NEG_INFINITY), lo, hi, REFINE_TOL);
    if p >= grid_p {
        Ok((x, p, true))
    } else {
        Ok((grid_x, grid_p, false))
    }
}

/// Best measurement angle for fixed `tv` and `ω`.
pub fn maximize_kappa(tv: f64, omega: f64) -> Result<OptimizationResult> {
    let v = check_tv(tv)?;
    let g = PureQubit::from_angle(omega);
    let (kappa, p, refined) =
        grid_then_refine(|k| feed_forward_plan(&v, &g, k).ok().map(|plan| plan.total_success))?;
    Ok(OptimizationResult {
        best_omega: omega,
        best_kappa: kappa,
        best_p: p,
        grid_resolution: GRID_STEP,
        refined,
    })
}

/// Best preparation angle for fixed `tv` and `κ` (use `π/4`).
pub fn maximize_omega(tv: f64, kappa: f64) -> Result<OptimizationResult> {
    let v = check_tv(tv)?;
    let (omega, p, refined) = grid_then_refine(|w| {
        feed_forward_plan(&v, &PureQubit::from_angle(w), kappa)
            .ok()
            .map(|plan| plan.total_success)
    })?;
    Ok(OptimizationResult {
        best_omega: omega,
        best_kappa: kappa,
        best_p: p,
        grid_resolution: GRID_STEP,
        refined,
    })
}

fn sweep_point(tv_squared: f64) -> SweepSample {
    let mut sample = SweepSample {
        tv_squared,
        p: None,
        omega_star: None,
        p_tilde: None,
        error: None,
    };
    if !(tv_squared > 0.0 && tv_squared < 1.0) {
        sample.error = Some(format!("T_V = {tv_squared} outside (0, 1)"));
        return sample;
    }
    let tv = tv_squared.sqrt();
    match maximize_omega(tv, FRAC_PI_4) {
        Ok(r) => {
            sample.p = Some(r.best_p);
            sample.omega_star = Some(r.best_omega);
        }
        Err(e) => sample.error = Some(e.to_string()),
    }
    sample.p_tilde = simplified_success(tv).ok();
    sample
}

/// Optimal and unfiltered success probabilities over a grid of intensity
/// transmittances `T_V`. Failing points are recorded, not fatal. Runs on the
/// current rayon pool; output order follows `grid`.
pub fn sweep_tv(grid: &[f64]) -> SweepCurve {
    SweepCurve {
        samples: grid.par_iter().map(|&t| sweep_point(t)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TV2: f64 = 0.334;

    /// Dense brute-force maximum over a uniform grid of `n` + 1 points.
    fn dense_oracle(f: impl Fn(f64) -> Option<f64>, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|i| FRAC_PI_2 * i as f64 / n as f64)
            .filter_map(|x| f(x).map(|p| (x, p)))
            .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8 && fx.abs() < 1e-15);
    }

    #[test]
    fn omega_optimum_near_55_degrees() {
        let r = maximize_omega(TV2.sqrt(), FRAC_PI_4).unwrap();
        assert!((r.best_omega.to_degrees() - 55.2).abs() < 0.1, "{}", r.best_omega.to_degrees());
        assert!(r.refined);
        assert!((r.best_p - 0.173920687).abs() < 1e-8);
    }

    #[test]
    fn kappa_optimum_is_balanced_basis() {
        for (tv2, deg) in [(0.334, 55.0), (0.1, 30.0)] {
            let r = maximize_kappa(f64::sqrt(tv2), f64::to_radians(deg)).unwrap();
            assert!((r.best_kappa.to_degrees() - 45.0).abs() < 0.5);
        }
    }

    #[test]
    fn kappa_reflection_symmetry_at_balanced_target() {
        let tv = 0.5;
        let omega = FRAC_PI_4;
        for k in [0.1, 0.4, 0.7] {
            let a = success_probability(tv, omega, k).unwrap().unwrap();
            let b = success_probability(tv, omega, FRAC_PI_2 - k).unwrap().unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_check_limit() {
        let r = maximize_omega(0.0, FRAC_PI_4).unwrap();
        assert!((r.best_omega.to_degrees() - 45.0).abs() < 1e-3);
        assert!((r.best_p - 0.5).abs() < 1e-9);
    }

    #[test]
    fn vanishing_coupling_limit() {
        let p = |tv2: f64| maximize_omega(tv2.sqrt(), FRAC_PI_4).unwrap().best_p;
        let (a, b, c) = (p(0.9), p(0.99), p(0.999));
        assert!(a > b && b > c && c < 2e-6);
        assert!(matches!(maximize_omega(1.0, FRAC_PI_4), Err(Error::AllBranchesDegenerate)));
    }

    #[test]
    fn refinement_agrees_with_dense_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let tv: f64 = rng.random_range(0.05..0.95);
            let r = maximize_omega(tv, FRAC_PI_4).unwrap();
            let (x, p) = dense_oracle(|w| success_probability(tv, w, FRAC_PI_4).unwrap(), 9000);
            assert!((r.best_p - p).abs() < 1e-6);
            assert!(r.best_p >= p - 1e-12);
            assert!((r.best_omega - x).to_degrees().abs() < 0.05);
        }
    }

    #[test]
    fn refinement_never_degrades_grid_optimum() {
        for tv2 in [0.05, 0.334, 0.6, 0.9] {
            let tv = f64::sqrt(tv2);
            let r = maximize_omega(tv, FRAC_PI_4).unwrap();
            let grid_best = (0..=180)
                .filter_map(|i| success_probability(tv, f64::from(i) * GRID_STEP, FRAC_PI_4).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(r.best_p >= grid_best - 1e-12);
        }
    }

    #[test]
    fn sweep_records_failures_and_orders_output() {
        let curve = sweep_tv(&[0.334, 0.6, 1.5, 0.01]);
        let t: Vec<f64> = curve.samples.iter().map(|s| s.tv_squared).collect();
        assert_eq!(t, vec![0.334, 0.6, 1.5, 0.01]);
        let s = &curve.samples[0];
        assert!((s.p_tilde.unwrap() - 0.124624624624).abs() < 1e-11);
        assert!((s.omega_star.unwrap().to_degrees() - 55.2).abs() < 0.1);
        assert!(curve.samples[1].p_tilde.is_none() && curve.samples[1].p.is_some());
        assert!(curve.samples[2].error.is_some() && curve.samples[2].p.is_none());
        assert!((curve.samples[3].p_tilde.unwrap() - 0.25).abs() < 0.01);
        assert!((curve.samples[3].p.unwrap() - 0.5).abs() < 0.02);
    }

    #[test]
    fn optimal_dominates_unfiltered() {
        let grid: Vec<f64> = (1..=100).map(|i| 0.4999 * f64::from(i) / 100.0).collect();
        for s in sweep_tv(&grid).samples {
            assert!(s.p.unwrap() >= s.p_tilde.unwrap(), "{s:?}");
        }
    }
}
