//! Riemann–Liouville integration and Caputo differentiation of sampled
//! trajectories.
//!
//! `J^α` uses product integration: on each panel the trajectory is replaced
//! by its linear interpolant and the kernel moments `∫ (t_j − s)^{α−1}{1, s} ds`
//! are integrated in closed form. The Caputo derivative uses the L1 scheme,
//! which is the exact Caputo derivative of the same piecewise-linear
//! interpolant evaluated at the nodes. Both sum their history in ascending
//! panel order with compensation, so results do not depend on how output
//! nodes are distributed over threads.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{FracOrder, TimeGrid, Trajectory};
use crate::specfun::{rgamma, tgamma};
use crate::sum::CompensatedSum;

/// Below this many nodes the operators run sequentially.
const PAR_THRESHOLD: usize = 256;

/// `(1 − (1 − x)^a) / a` without cancellation for small x.
#[inline]
fn one_minus_pow(x: f64, a: f64) -> f64 {
    -(a * (-x).ln_1p()).exp_m1() / a
}

/// `∫_0^x (1 − w)^{α−1} w dw` for 0 < x ≤ 1.
#[inline]
fn first_moment(x: f64, alpha: f64) -> f64 {
    if x < 0.1 {
        // Σ_k (1−α)_k/k! · x^{k+2}/(k+2)
        let mut c = 1.0;
        let mut xp = x * x;
        let mut s = 0.0;
        for k in 0..40 {
            let t = c * xp / (k as f64 + 2.0);
            s += t;
            if t.abs() < 1e-18 * s.abs() {
                break;
            }
            c *= (k as f64 + 1.0 - alpha) / (k as f64 + 1.0);
            xp *= x;
        }
        s
    } else {
        one_minus_pow(x, alpha) - one_minus_pow(x, alpha + 1.0)
    }
}

/// Coefficients of `v_i` and `v_{i+1}` in `∫_{t_i}^{t_{i+1}} (t − s)^{α−1} Πv(s) ds`,
/// where `dist = t − t_i` and `h = t_{i+1} − t_i` (so `h ≤ dist`).
#[inline]
pub(crate) fn panel_coefficients(alpha: f64, dist: f64, h: f64) -> (f64, f64) {
    let x = (h / dist).min(1.0);
    let scale = dist.powf(alpha);
    let m0 = one_minus_pow(x, alpha);
    let m1 = first_moment(x, alpha);
    let right = scale * m1 / x;
    (scale * m0 - right, right)
}

/// Product-integration weights `w_{j,i}`, i = 0..=j, such that
/// `(J^α v)(t_j) = Σ_i w_{j,i} v_i` for piecewise-linear v.
pub fn rl_node_weights(grid: &TimeGrid, alpha: f64, j: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(j + 1, 0.0);
    if j == 0 {
        return;
    }
    let t = grid.nodes();
    let inv_gamma = 1.0 / tgamma(alpha);
    for i in 0..j {
        let (l, r) = panel_coefficients(alpha, t[j] - t[i], t[i + 1] - t[i]);
        out[i] += l * inv_gamma;
        out[i + 1] += r * inv_gamma;
    }
}

/// L1 weights `b_{i,j}`, i = 0..j−1, with
/// `cD^α v(t_j) ≈ Σ_i b_{i,j} (v_{i+1} − v_i)`.
pub fn l1_weights(grid: &TimeGrid, alpha: f64, j: usize, out: &mut Vec<f64>) {
    out.clear();
    let t = grid.nodes();
    let a = 1.0 - alpha;
    let c = 1.0 / tgamma(2.0 - alpha);
    for i in 0..j {
        let dist = t[j] - t[i];
        let h = t[i + 1] - t[i];
        // [(t_j − t_i)^{1−α} − (t_j − t_{i+1})^{1−α}] / h
        let diff = dist.powf(a) * a * one_minus_pow((h / dist).min(1.0), a);
        out.push(c * diff / h);
    }
}

fn map_nodes<F>(n: usize, f: F) -> Vec<Vec<f64>>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// `(J^α v)(t_j)` at every node by product integration; node 0 maps to zero.
pub fn riemann_liouville_integral(v: &Trajectory, alpha: FracOrder) -> Result<Trajectory> {
    let grid = v.grid();
    let dim = v.dim();
    let a = alpha.value();
    let rows = map_nodes(grid.len(), |j| {
        let mut w = Vec::new();
        rl_node_weights(grid, a, j, &mut w);
        let mut acc = vec![CompensatedSum::new(); dim];
        for (i, wi) in w.iter().enumerate() {
            for (k, x) in v.row(i).iter().enumerate() {
                acc[k].add(wi * x);
            }
        }
        acc.iter().map(|s| s.value()).collect()
    });
    Trajectory::new(grid.clone(), dim, rows.concat(), format!("J^{a} {}", v.label()))
}

/// L1 approximation of the Caputo derivative at nodes t_1..t_N.
///
/// Node 0 is undefined and carries NaN; consumers must skip it.
pub fn caputo_derivative(v: &Trajectory, alpha: FracOrder) -> Result<Trajectory> {
    let alpha = alpha.require_proper()?;
    let grid = v.grid();
    let dim = v.dim();
    let a = alpha.value();
    let rows = map_nodes(grid.len(), |j| {
        if j == 0 {
            return vec![f64::NAN; dim];
        }
        let mut b = Vec::new();
        l1_weights(grid, a, j, &mut b);
        let mut acc = vec![CompensatedSum::new(); dim];
        for (i, bi) in b.iter().enumerate() {
            let (lo, hi) = (v.row(i), v.row(i + 1));
            for k in 0..dim {
                acc[k].add(bi * (hi[k] - lo[k]));
            }
        }
        acc.iter().map(|s| s.value()).collect()
    });
    Trajectory::with_sentinels(grid.clone(), dim, rows.concat(), format!("cD^{a} {}", v.label()))
}

/// Riemann–Liouville derivative through the shifted definition,
/// `D^α v = cD^α v + v(0) t^{−α} / Γ(1−α)`. Node 0 is NaN.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn riemann_liouville_derivative(v: &Trajectory, alpha: FracOrder) -> Result<Trajectory> {
    let c = caputo_derivative(v, alpha)?;
    let a = alpha.value();
    let v0 = v.row(0).to_vec();
    let mut values = c.values().to_vec();
    let dim = v.dim();
    for (j, t) in v.grid().nodes().iter().enumerate().skip(1) {
        let s = t.powf(-a) * rgamma(1.0 - a);
        for k in 0..dim {
            values[j * dim + k] += v0[k] * s;
        }
    }
    Trajectory::with_sentinels(v.grid().clone(), dim, values, format!("D^{a} {}", v.label()))
}

/// `v = v0 + J^α g`. A NaN sentinel at node 0 of `g` is replaced by `g(t_1)`,
/// i.e. `g` is held constant on the first panel.
pub fn reconstruct_from_caputo(g: &Trajectory, v0: &[f64], alpha: FracOrder) -> Result<Trajectory> {
    if v0.len() != g.dim() {
        return domain(format!("initial value has {} components, trajectory has {}", v0.len(), g.dim()));
    }
    let dim = g.dim();
    let mut values = g.values().to_vec();
    if values[..dim].iter().any(|x| !x.is_finite()) {
        let (head, tail) = values.split_at_mut(dim);
        head.copy_from_slice(&tail[..dim]);
    }
    let g = Trajectory::new(g.grid().clone(), dim, values, g.label())?;
    let j = riemann_liouville_integral(&g, alpha)?;
    let out: Vec<f64> = j
        .rows()
        .flat_map(|r| r.iter().zip(v0).map(|(a, b)| a + b).collect::<Vec<_>>())
        .collect();
    Trajectory::new(g.grid().clone(), dim, out, "reconstruction")
}

/// Exact Riemann–Liouville derivative of `c t^β`:
/// `c Γ(β+1)/Γ(1−α+β) t^{β−α}`.
pub fn power_rule_reference(c: f64, beta: f64, alpha: FracOrder, t: f64) -> Result<f64> {
    if !(beta > -1.0) {
        return domain(format!("power rule requires beta > -1, got {beta}"));
    }
    if !(t > 0.0) {
        return domain(format!("power rule requires t > 0, got {t}"));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    Ok(c * tgamma(beta + 1.0) * rgamma(1.0 - a + beta) * t.powf(beta - a))
}
