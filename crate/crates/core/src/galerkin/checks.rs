//! Energy inequalities, weak residual, time-shift scaling and the
//! two-discretization agreement of Galerkin solutions.

use super::problem::{GalerkinProblem, SolveMethod};
use super::solve::{solve, squared_norms, GalerkinSolution};
use crate::error::{domain, Result};
use crate::fracops::{caputo_derivative, riemann_liouville_integral};
use crate::grid::{FracOrder, TimeGrid, Trajectory};
use crate::report::CheckReport;
use crate::specfun::rgamma;

/// Relative tolerance of the energy checks.
pub const ENERGY_REL_TOL: f64 = 1e-6;
const ENERGY_ABS_TOL: f64 = 1e-14;

/// Budget of [`two_discretization_agreement`].
pub const AGREEMENT_BUDGET: f64 = 5e-3;
/// Panels used by [`two_discretization_agreement`].
pub const AGREEMENT_N: usize = 2048;

fn tagged(name: &str, p: &GalerkinProblem) -> String {
    match p.seed() {
        Some(s) => format!("{name}[seed={s}]"),
        None => name.to_string(),
    }
}

/// `Σ_j f_j(t)²/λ_j` at every node.
fn dual_norm_sq(f: &Trajectory, lambdas: &[f64]) -> Vec<f64> {
    f.rows().map(|r| r.iter().zip(lambdas).map(|(x, l)| x * x / l).sum()).collect()
}

fn cumulative_trapezoid(nodes: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..v.len() {
        acc += 0.5 * (nodes[i] - nodes[i - 1]) * (v[i] + v[i - 1]);
        out.push(acc);
    }
    out
}

/// Four checks, all at every node from t₁ on:
/// * `energy_pointwise`: `cD^α‖u‖²_H + ν‖u‖²_V ≤ ‖f‖²_{V′}/ν`;
/// * `energy_integrated`: `J^{1−α}‖u‖²_H + ν∫₀ᵗ‖u‖²_V ≤ t^{1−α}/Γ(2−α)‖u₀‖²_H + ν⁻¹∫₀ᵗ‖f‖²_{V′}`;
/// * `energy_terminal`: the same at t = T;
/// * `chain_inequality`: `cD^α‖u‖²_H ≤ 2 Σ_j g_j cD^α g_j`.
///
/// Caputo derivatives use the solver's L1 weights, `J^{1−α}` product
/// integration, and time integrals the trapezoid rule.
pub fn energy_report(sol: &GalerkinSolution) -> Result<Vec<CheckReport>> {
    let p = &sol.problem;
    let grid = sol.g.grid();
    let t = grid.nodes();
    let a = p.alpha().value();
    let nu = p.nu();
    let lambdas = p.lambdas();
    let (h2, v2) = squared_norms(&sol.g, &lambdas);
    let f2 = dual_norm_sq(p.f_coeffs(), &lambdas);
    let h2t = Trajectory::scalar(grid, h2, "H^2")?;
    let dh2 = caputo_derivative(&h2t, p.alpha())?.component(0);
    let dg = caputo_derivative(&sol.g, p.alpha())?;
    let jh2 = riemann_liouville_integral(&h2t, FracOrder::new(1.0 - a)?)?.component(0);
    let iv = cumulative_trapezoid(t, &v2);
    let if2 = cumulative_trapezoid(t, &f2);
    let u0sq: f64 = p.u0_coeffs().iter().map(|x| x * x).sum();
    let c0 = rgamma(2.0 - a) * u0sq;

    let pointwise = CheckReport::pointwise(
        tagged("energy_pointwise", p),
        (1..t.len()).map(|j| (t[j], dh2[j] + nu * v2[j], f2[j] / nu)),
        ENERGY_REL_TOL,
        ENERGY_ABS_TOL,
    );
    let integrated_at = |j: usize| (jh2[j] + nu * iv[j], c0 * t[j].powf(1.0 - a) + if2[j] / nu);
    let integrated = CheckReport::pointwise(
        tagged("energy_integrated", p),
        (1..t.len()).map(|j| {
            let (l, r) = integrated_at(j);
            (t[j], l, r)
        }),
        ENERGY_REL_TOL,
        ENERGY_ABS_TOL,
    );
    let last = t.len() - 1;
    let (l, r) = integrated_at(last);
    let terminal = CheckReport::new(
        tagged("energy_terminal", p),
        l,
        r,
        ENERGY_REL_TOL * l.abs().max(r.abs()) + ENERGY_ABS_TOL,
        Some(t[last]),
    );
    let chain = CheckReport::pointwise(
        tagged("chain_inequality", p),
        (1..t.len()).map(|j| {
            let rhs: f64 = sol.g.row(j).iter().zip(dg.row(j)).map(|(g, d)| 2.0 * g * d).sum();
            (t[j], dh2[j], rhs)
        }),
        ENERGY_REL_TOL,
        ENERGY_ABS_TOL,
    );
    Ok(vec![pointwise, integrated, terminal, chain])
}

/// `max_{j, i≥1} |cD^α g_j + νλ_j g_j − f_j|` with L1 Caputo derivatives.
pub fn weak_residual(sol: &GalerkinSolution) -> Result<f64> {
    let p = &sol.problem;
    let dg = caputo_derivative(&sol.g, p.alpha())?;
    let lambdas = p.lambdas();
    let mut worst = 0.0f64;
    for i in 1..sol.g.grid().len() {
        for (k, l) in lambdas.iter().enumerate() {
            let r = dg.row(i)[k] + p.nu() * l * sol.g.row(i)[k] - p.f_coeffs().row(i)[k];
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Result of [`shift_scaling`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftFit {
    /// Least-squares slope of log‖τ_h u − u‖ against log h; `None` when all
    /// shift norms vanish.
    pub slope: Option<f64>,
    /// `α + 1/r − 1`.
    pub bound: f64,
    /// `(h, ‖τ_h u − u‖_{L^r(0,T−h;V′)})`.
    pub norms: Vec<(f64, f64)>,
    pub report: CheckReport,
}

/// Slack allowed below the exponent `α + 1/r − 1`.
pub const SHIFT_SLOPE_SLACK: f64 = 0.1;

/// Fits the exponent of `‖u(·+h) − u‖_{L^r(0,T−h;V′)}` in h. Needs a uniform
/// grid whose step divides every h, and `1 ≤ r < 1/(1−α)`.
pub fn shift_scaling(sol: &GalerkinSolution, r: f64, h_list: &[f64]) -> Result<ShiftFit> {
    let a = sol.problem.alpha().value();
    if !(r >= 1.0 && r < 1.0 / (1.0 - a)) {
        return domain(format!("need 1 <= r < 1/(1-alpha) = {}, got r = {r}", 1.0 / (1.0 - a)));
    }
    let grid = sol.g.grid();
    let Some(dt) = grid.uniform_step() else {
        return domain("shift scaling needs a uniform grid");
    };
    let lambdas = sol.problem.lambdas();
    let n = grid.panels();
    let t = grid.nodes();
    let mut norms = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let k = (h / dt).round();
        if !(k >= 1.0) || (k * dt - h).abs() > 1e-9 * h || k as usize >= n {
            return domain(format!("shift {h} is not a positive multiple of the step {dt} below the horizon"));
        }
        let k = k as usize;
        let d: Vec<f64> = (0..=n - k)
            .map(|i| {
                let (a0, a1) = (sol.g.row(i), sol.g.row(i + k));
                let s: f64 = a0.iter().zip(a1).zip(&lambdas).map(|((x, y), l)| (y - x) * (y - x) / l).sum();
                s.powf(0.5 * r)
            })
            .collect();
        let integral = cumulative_trapezoid(&t[..=n - k], &d).last().copied().unwrap_or(0.0);
        norms.push((h, integral.powf(1.0 / r)));
    }
    let bound = a + 1.0 / r - 1.0;
    let pts: Vec<(f64, f64)> = norms.iter().filter(|(_, v)| *v > 0.0).map(|(h, v)| (h.ln(), v.ln())).collect();
    let (slope, report) = if pts.len() < 2 {
        (None, CheckReport::degenerate("shift_scaling"))
    } else {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let s = sxy / sxx;
        (Some(s), CheckReport::new("shift_scaling", bound - SHIFT_SLOPE_SLACK, s, 0.0, None))
    };
    let report = CheckReport { name: tagged(&report.name, &sol.problem), ..report };
    Ok(ShiftFit { slope, bound, norms, report })
}

/// Sup distance between the H-norm trajectories of two independent
/// discretizations on [`AGREEMENT_N`] panels: L1 on a graded grid and the
/// closed form on a uniform grid, compared on the uniform nodes.
pub fn two_discretization_agreement(problem: &GalerkinProblem) -> Result<CheckReport> {
    let a = problem.alpha().value();
    let t_end = problem.grid().horizon();
    let uniform = TimeGrid::uniform(t_end, AGREEMENT_N)?;
    let graded = TimeGrid::graded(t_end, AGREEMENT_N, ((2.0 - a) / a).max(3.0))?;
    let fine = solve(&problem.with_grid(graded)?, SolveMethod::L1)?;
    let exact = solve(&problem.with_grid(uniform.clone())?, SolveMethod::ClosedForm)?;
    let moved = fine.g.resample(&uniform)?;
    let (ha, _) = squared_norms(&moved, &problem.lambdas());
    let (hb, _) = squared_norms(&exact.g, &problem.lambdas());
    let (mut worst, mut at) = (0.0f64, None);
    for (i, (x, y)) in ha.iter().zip(&hb).enumerate() {
        let d = (x.sqrt() - y.sqrt()).abs();
        if d > worst || at.is_none() {
            worst = d;
            at = Some(uniform.nodes()[i]);
        }
    }
    Ok(CheckReport::new(tagged("two_discretization_agreement", problem), worst, AGREEMENT_BUDGET, 0.0, at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::modes::{torus_modes, ModeSet};
    use crate::galerkin::problem::random_instance;

    fn first_mode(grid: TimeGrid, alpha: f64, m: usize) -> GalerkinProblem {
        let mut u0 = vec![0.0; 12];
        u0[0] = 1.0;
        GalerkinProblem::new(alpha, 1.0, torus_modes(2), m, u0, vec![vec![]; 12], grid).unwrap()
    }

    #[test]
    fn zero_data_is_trivially_fine() {
        let g = TimeGrid::uniform(1.0, 64).unwrap();
        let p = GalerkinProblem::new(0.7, 1.0, torus_modes(1), 4, vec![0.0; 4], vec![vec![]; 4], g).unwrap();
        let s = solve(&p, SolveMethod::L1).unwrap();
        for r in energy_report(&s).unwrap() {
            assert!(r.passed && r.lhs == 0.0 && r.rhs == 0.0, "{r}");
        }
        assert_eq!(weak_residual(&s).unwrap(), 0.0);
        let fit = shift_scaling(&s, 2.0, &[1.0 / 32.0, 1.0 / 16.0]).unwrap();
        assert!(fit.slope.is_none() && fit.report.passed);
        let agree = two_discretization_agreement(&p).unwrap();
        assert!(agree.passed && agree.lhs == 0.0);
    }

    #[test]
    fn free_decay_energy_has_positive_terminal_margin() {
        let p = first_mode(TimeGrid::graded(1.0, 512, 5.0 / 3.0).unwrap(), 0.75, 12);
        let s = solve(&p, SolveMethod::L1).unwrap();
        let reps = energy_report(&s).unwrap();
        assert!(reps.iter().all(|r| r.passed));
        assert!(reps[2].margin > 0.1);
        assert!(weak_residual(&s).unwrap() < 1e-10);
    }

    #[test]
    fn random_instances_pass() {
        for seed in 0..5 {
            let p = random_instance(seed).unwrap();
            let s = solve(&p, SolveMethod::L1).unwrap();
            for r in energy_report(&s).unwrap() {
                assert!(r.passed, "{r}");
            }
        }
    }

    #[test]
    fn closed_form_residual_shrinks() {
        let res = |n| {
            let p = first_mode(TimeGrid::uniform(1.0, n).unwrap(), 0.75, 1);
            weak_residual(&solve(&p, SolveMethod::ClosedForm).unwrap()).unwrap()
        };
        let (a, b) = (res(128), res(512));
        assert!(b < a);
    }

    #[test]
    fn shift_slope_of_decay() {
        let p = first_mode(TimeGrid::uniform(1.0, 1024).unwrap(), 0.75, 1);
        let s = solve(&p, SolveMethod::ClosedForm).unwrap();
        let hs: Vec<f64> = [256.0, 128.0, 64.0, 32.0, 16.0].iter().map(|d| 1.0 / d).collect();
        let fit = shift_scaling(&s, 2.0, &hs).unwrap();
        assert!(fit.report.passed, "{}", fit.report);
        assert!(fit.slope.unwrap() >= 0.15);
        assert!(shift_scaling(&s, 4.0, &hs).is_err());
        assert!(shift_scaling(&s, 2.0, &[0.3e-3]).is_err());
    }

    #[test]
    fn agreement_on_decay() {
        let p = GalerkinProblem::new(0.6, 1.0, ModeSet::from_eigenvalues(&[1.0]).unwrap(), 1, vec![1.0], vec![vec![]], TimeGrid::uniform(1.0, 8).unwrap()).unwrap();
        let r = two_discretization_agreement(&p).unwrap();
        assert!(r.passed, "{r}");
    }
}
