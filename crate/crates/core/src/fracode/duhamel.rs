use rayon::prelude::*;

use crate::error::{domain, invalid, Result};
use crate::grid::{FracOrder, GridKind, Trajectory};
use crate::specfun::{mittag_leffler, MlParams};
use crate::sum::CompensatedSum;

/// Antiderivatives of the resolvent kernel `K(τ) = τ^{α−1} E_{α,α}(−cτ^α)`:
/// `P1(τ) = τ^α E_{α,α+1}(−cτ^α)` with `P1' = K`, and
/// `P2(τ) = τ^{α+1} E_{α,α+2}(−cτ^α)` with `P2' = P1`.
#[derive(Clone, Copy)]
struct Kernel {
    alpha: f64,
    c: f64,
    p1: MlParams,
    p2: MlParams,
}

impl Kernel {
    fn new(alpha: f64, c: f64) -> Result<Self> {
        Ok(Kernel {
            alpha,
            c,
            p1: MlParams::new(alpha, alpha + 1.0)?,
            p2: MlParams::new(alpha, alpha + 2.0)?,
        })
    }

    fn moments(&self, tau: f64) -> Result<(f64, f64)> {
        if tau <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let ta = tau.powf(self.alpha);
        let z = -self.c * ta;
        Ok((ta * mittag_leffler(self.p1, z)?, tau * ta * mittag_leffler(self.p2, z)?))
    }
}

/// Exact solution of `cD^α g = −νλ g + f`, `g(0) = g₀`, for piecewise-linear f:
/// `g(t) = g₀ E_α(−νλ t^α) + ∫₀ᵗ (t−s)^{α−1} E_{α,α}(−νλ(t−s)^α) f(s) ds`,
/// with the convolution integrated exactly panel by panel.
pub fn duhamel_closed_form(lambda: f64, nu: f64, f: &Trajectory, g0: f64, alpha: FracOrder) -> Result<Trajectory> {
    if !(lambda >= 0.0) || !(nu > 0.0) {
        return domain(format!("need lambda >= 0 and nu > 0, got {lambda}, {nu}"));
    }
    if f.dim() != 1 {
        return invalid("the closed form handles one scalar mode");
    }
    let a = alpha.value();
    let c = nu * lambda;
    let kernel = Kernel::new(a, c)?;
    let grid = f.grid();
    let t = grid.nodes();
    let n = grid.len();
    let fv = f.component(0);
    let e1 = MlParams::one(a)?;

    // panel contribution for distances A = t_j − t_i ≥ B = t_j − t_{i+1}
    let panel = |pa: (f64, f64), pb: (f64, f64), da: f64, db: f64, fi: f64, fi1: f64| {
        let h = da - db;
        let i0 = pa.0 - pb.0;
        let i1 = (da * pa.0 - pa.1) - (db * pb.0 - pb.1);
        let right = (da * i0 - i1) / h;
        fi * (i0 - right) + fi1 * right
    };

    let values: Vec<f64> = if grid.kind() == GridKind::Uniform {
        let h = grid.horizon() / grid.panels() as f64;
        let taus: Vec<f64> = (0..n).map(|k| if k == n - 1 { grid.horizon() } else { h * k as f64 }).collect();
        let mom: Vec<(f64, f64)> = taus.par_iter().map(|&s| kernel.moments(s)).collect::<Result<_>>()?;
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut acc = CompensatedSum::new();
                acc.add(g0 * mittag_leffler(e1, -c * t[j].powf(a))?);
                for i in 0..j {
                    let (ka, kb) = (j - i, j - i - 1);
                    acc.add(panel(mom[ka], mom[kb], taus[ka], taus[kb], fv[i], fv[i + 1]));
                }
                Ok(acc.value())
            })
            .collect::<Result<_>>()?
    } else {
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut acc = CompensatedSum::new();
                acc.add(g0 * mittag_leffler(e1, -c * t[j].powf(a))?);
                let mut prev = kernel.moments(t[j])?;
                for i in 0..j {
                    let db = t[j] - t[i + 1];
                    let next = kernel.moments(db)?;
                    acc.add(panel(prev, next, t[j] - t[i], db, fv[i], fv[i + 1]));
                    prev = next;
                }
                Ok(acc.value())
            })
            .collect::<Result<_>>()?
    };
    Trajectory::new(grid.clone(), 1, values, "closed_form")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::quad::{integrate, QuadOptions};
    use crate::specfun::tgamma;

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn ml(a: f64, z: f64) -> f64 {
        mittag_leffler(MlParams::one(a).unwrap(), z).unwrap()
    }

    #[test]
    fn free_decay() {
        let g = TimeGrid::graded(1.0, 40, 2.0).unwrap();
        let f = Trajectory::constant(&g, &[0.0], "0").unwrap();
        let u = duhamel_closed_form(2.0, 1.5, &f, 0.7, order(0.8)).unwrap();
        for (t, r) in g.nodes().iter().zip(u.rows()) {
            assert!((r[0] - 0.7 * ml(0.8, -3.0 * t.powf(0.8))).abs() < 1e-13);
        }
    }

    #[test]
    fn no_dissipation_is_fractional_integral() {
        let a = 0.65;
        let g = TimeGrid::uniform(2.0, 16).unwrap();
        let f = Trajectory::constant(&g, &[1.5], "c").unwrap();
        let u = duhamel_closed_form(0.0, 1.0, &f, 0.25, order(a)).unwrap();
        for (t, r) in g.nodes().iter().zip(u.rows()) {
            assert!((r[0] - (0.25 + 1.5 * t.powf(a) / tgamma(a + 1.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_integral_identity() {
        // ∫₀ᵗ s^{α−1} E_{α,α}(−s^α) ds = 1 − E_α(−t^α), checked by quadrature
        let a = 0.7;
        let pa = MlParams::new(a, a).unwrap();
        let t: f64 = 1.3;
        let y_end = t.powf(a);
        // s = y^{1/α} removes the endpoint singularity: ds s^{α−1} = dy/α
        let (q, _) = integrate(
            |y: f64| mittag_leffler(pa, -y).unwrap() / a,
            &[0.0, y_end],
            QuadOptions::default(),
        )
        .unwrap();
        assert!((q - (1.0 - ml(a, -t.powf(a)))).abs() < 1e-12);
    }

    #[test]
    fn constant_forcing_approaches_steady_state() {
        let a = 0.75;
        for grid in [TimeGrid::uniform(1.0, 32).unwrap(), TimeGrid::graded(1.0, 32, 2.0).unwrap()] {
            let f = Trajectory::constant(&grid, &[2.0], "c").unwrap();
            let u = duhamel_closed_form(1.0, 1.0, &f, 0.5, order(a)).unwrap();
            for (t, r) in grid.nodes().iter().zip(u.rows()) {
                let e = ml(a, -t.powf(a));
                assert!((r[0] - (0.5 * e + 2.0 * (1.0 - e))).abs() < 1e-12, "{t}");
            }
        }
    }

    #[test]
    fn linear_forcing_is_exact() {
        // f(t) = t with c = 0: g = J^α t = t^{α+1}/Γ(α+2)
        let a = 0.55;
        let g = TimeGrid::graded(1.0, 20, 1.7).unwrap();
        let f = Trajectory::scalar_fn(&g, "t", |t| t).unwrap();
        let u = duhamel_closed_form(0.0, 1.0, &f, 0.0, order(a)).unwrap();
        for (t, r) in g.nodes().iter().zip(u.rows()) {
            assert!((r[0] - t.powf(a + 1.0) / tgamma(a + 2.0)).abs() < 1e-13);
        }
    }
}
