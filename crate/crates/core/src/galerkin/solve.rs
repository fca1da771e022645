use std::io::Write;

use rayon::prelude::*;

use super::problem::{GalerkinProblem, SolveMethod};
use crate::error::Result;
use crate::fracode::{duhamel_closed_form, l1_implicit_solve, picard_solve, FracIVP, SystemMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::grid::{fmt_f64, Trajectory};

/// Per-mode coefficient trajectories `g_j`, one column per retained mode.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSolution {
    pub problem: GalerkinProblem,
    pub g: Trajectory,
    pub method: SolveMethod,
}

/// Solves the diagonal system. The closed-form and Picard paths run the
/// modes in parallel; L1 marches all modes together.
pub fn solve(problem: &GalerkinProblem, method: SolveMethod) -> Result<GalerkinSolution> {
    let sys = problem.assemble();
    let grid = problem.grid();
    let alpha = problem.alpha();
    let nu = problem.nu();
    let m = problem.m();
    let mut values = if method == SolveMethod::L1 {
        // one diagonal solve shares the L1 weights across modes
        let a = sys.matrix(nu);
        l1_implicit_solve(alpha, &a, &sys.f_coeffs, &sys.u0)?.values().to_vec()
    } else {
        let columns: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|j| -> Result<Vec<f64>> {
                let f = Trajectory::scalar(grid, sys.f_coeffs.component(j), "f")?;
                let (lambda, g0) = (sys.lambdas[j], sys.u0[j]);
                let g = if method == SolveMethod::ClosedForm {
                    duhamel_closed_form(lambda, nu, &f, g0, alpha)?
                } else {
                    let terms = problem.forcing_terms(j).to_vec();
                    let f_sup: f64 = terms.iter().map(|x| x.a.abs()).sum();
                    let c = nu * lambda;
                    let forcing = move |t: f64, out: &mut [f64]| out[0] = terms.iter().map(|x| x.eval(t)).sum();
                    let ivp = FracIVP::affine(alpha, SystemMatrix::Diagonal(vec![c]), forcing, f_sup, vec![g0], grid.horizon())?
                        .with_radius(4.0 * (1.0 + g0.abs() + f_sup + f_sup / c))?;
                    picard_solve(&ivp, grid, DEFAULT_TOL, DEFAULT_MAX_ITER)?.0
                };
                Ok(g.component(0))
            })
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; m * grid.len()];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * m + j] = *v;
            }
        }
        values
    };
    // the initial row is the data itself
    values[..m].copy_from_slice(&sys.u0);
    let g = Trajectory::new(grid.clone(), m, values, method.to_string())?;
    Ok(GalerkinSolution { problem: problem.clone(), g, method })
}

impl GalerkinSolution {
    /// Nodewise `‖u_m‖_H = (Σ g_j²)^{1/2}` and `‖u_m‖_V = (Σ λ_j g_j²)^{1/2}`.
    pub fn norms(&self) -> Result<(Trajectory, Trajectory)> {
        let (h2, v2) = squared_norms(&self.g, &self.problem.lambdas());
        let grid = self.g.grid();
        Ok((
            Trajectory::scalar(grid, h2.iter().map(|x| x.sqrt()).collect(), "H_norm")?,
            Trajectory::scalar(grid, v2.iter().map(|x| x.sqrt()).collect(), "V_norm")?,
        ))
    }

    /// CSV with columns `t,g_1..g_m,H_norm,V_norm`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.g.dim();
        let mut header = String::from("t");
        for j in 1..=m {
            header.push_str(&format!(",g_{j}"));
        }
        writeln!(w, "{header},H_norm,V_norm")?;
        let (h2, v2) = squared_norms(&self.g, &self.problem.lambdas());
        for (i, (t, row)) in self.g.grid().nodes().iter().zip(self.g.rows()).enumerate() {
            let mut line = fmt_f64(*t);
            for v in row.iter().chain([h2[i].sqrt(), v2[i].sqrt()].iter()) {
                line.push(',');
                line.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// `(Σ g_j², Σ λ_j g_j²)` per node, summed in ascending mode order.
pub(crate) fn squared_norms(g: &Trajectory, lambdas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    g.rows()
        .map(|row| {
            let h: f64 = row.iter().map(|x| x * x).sum();
            let v: f64 = row.iter().zip(lambdas).map(|(x, l)| l * x * x).sum();
            (h, v)
        })
        .unzip()
}
