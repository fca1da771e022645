//! Terminal-weighted Bochner spaces `L^p_α(0,T;R^m)`.
//!
//! The norm is `(∫_0^T (T−s)^{α−1}/Γ(α) ‖v(s)‖^p ds)^{1/p}` for α ∈ (0,1],
//! with α = 0 meaning the sup norm and α = 1 the plain `L^p` norm.
//! Trajectory norms use product integration: `‖v‖^p` is interpolated
//! linearly between nodes and integrated against the exact weight moments.
//! Functions with endpoint singularities go through [`catalog`] instead.

pub mod catalog;
pub mod embedding;

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::fracops::{panel_coefficients, rl_node_weights};
use crate::grid::{euclid, FracOrder, Trajectory};
use crate::report::CheckReport;
use crate::specfun::tgamma;
use crate::sum::compensated_sum;

pub use catalog::{catalog_norm, strictness_witnesses, CatalogFunction, CatalogNorm};
pub use embedding::{check_embedding, embedding_constant, Embedding};

const PAR_PANELS: usize = 2048;

/// Parameters of `L^p_α(0,T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSpaceSpec {
    pub alpha: f64,
    pub p: f64,
    pub t_end: f64,
}

impl WeightedSpaceSpec {
    pub fn new(alpha: f64, p: f64, t_end: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("weight order must lie in [0,1], got {alpha}"));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return domain(format!("exponent p must lie in [1,inf), got {p}"));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return domain(format!("horizon must be positive, got {t_end}"));
        }
        Ok(Self { alpha, p, t_end })
    }

    /// Plain `L^p(0,T)`.
    pub fn plain(p: f64, t_end: f64) -> Result<Self> {
        Self::new(1.0, p, t_end)
    }

    pub fn is_sup(&self) -> bool {
        self.alpha == 0.0
    }

    /// Total mass of the weight, `T^α/Γ(α+1)`.
    pub fn mass(&self) -> f64 {
        self.t_end.powf(self.alpha) / tgamma(self.alpha + 1.0)
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.alpha, self.p, self.t_end).map(|_| ())
    }
}

/// `∫ weight · ‖v‖^p` where `‖v‖^p` is interpolated linearly between nodes.
/// If the grid stops before `T`, the last value is held on `[t_N, T]`.
pub(crate) fn weighted_integral(norms_p: &[f64], nodes: &[f64], alpha: f64, t_end: f64) -> f64 {
    let inv_g = 1.0 / tgamma(alpha);
    let panel = |i: usize| {
        let (l, r) = panel_coefficients(alpha, t_end - nodes[i], nodes[i + 1] - nodes[i]);
        (l * norms_p[i] + r * norms_p[i + 1]) * inv_g
    };
    let n = nodes.len() - 1;
    let parts: Vec<f64> = if n >= PAR_PANELS {
        (0..n).into_par_iter().map(panel).collect()
    } else {
        (0..n).map(panel).collect()
    };
    let tail = t_end - nodes[n];
    let tail = if tail > 0.0 { norms_p[n] * tail.powf(alpha) / tgamma(alpha + 1.0) } else { 0.0 };
    compensated_sum(parts.into_iter().chain(std::iter::once(tail)))
}

/// `‖v‖_{L^p_α(0,T)}`. The grid may stop short of `T` but not pass it.
pub fn weighted_norm(v: &Trajectory, spec: WeightedSpaceSpec) -> Result<f64> {
    spec.validate()?;
    let nodes = v.grid().nodes();
    if v.grid().horizon() > spec.t_end * (1.0 + 1e-14) {
        return domain(format!(
            "trajectory extends to {} beyond the horizon {}",
            v.grid().horizon(),
            spec.t_end
        ));
    }
    if spec.is_sup() {
        return Ok(v.sup_norm());
    }
    let np: Vec<f64> = v.rows().map(|r| euclid(r).powf(spec.p)).collect();
    Ok(weighted_integral(&np, nodes, spec.alpha, spec.t_end).powf(1.0 / spec.p))
}

/// Plain `L^p(0,t_N)` norm (trapezoidal on `‖v‖^p`).
pub fn lp_norm(v: &Trajectory, p: f64) -> Result<f64> {
    weighted_norm(v, WeightedSpaceSpec::plain(p, v.grid().horizon())?)
}

/// Multiplication by `((T−t)^{α−1}/Γ(α))^{1/p}`, the isometry of
/// `L^p_α(0,T)` onto `L^p(0,T)`.
pub fn weight_isometry(v: &Trajectory, spec: WeightedSpaceSpec) -> Result<Trajectory> {
    spec.validate()?;
    if spec.alpha == 0.0 {
        return domain("the isometry needs a weight order in (0,1]");
    }
    let last = v.grid().horizon();
    if spec.alpha < 1.0 && last >= spec.t_end {
        return domain(format!(
            "the weight is singular at T = {}; use a grid graded toward T that stops before it (last node {last})",
            spec.t_end
        ));
    }
    if last > spec.t_end {
        return domain("grid extends beyond the horizon");
    }
    let inv_g = 1.0 / tgamma(spec.alpha);
    let dim = v.dim();
    let mut out = Vec::with_capacity(v.values().len());
    for (t, row) in v.grid().nodes().iter().zip(v.rows()) {
        let w = if spec.alpha == 1.0 {
            1.0
        } else {
            ((spec.t_end - t).powf(spec.alpha - 1.0) * inv_g).powf(1.0 / spec.p)
        };
        out.extend(row.iter().map(|x| x * w));
    }
    Trajectory::new(v.grid().clone(), dim, out, format!("G_p {}", v.label()))
}

/// Grid for the isometry: graded toward `T` with exponent `2/α`, capped so
/// that the last node stays at least about `1e-15·T` away from `T`.
pub fn isometry_grid(t_end: f64, n: usize, alpha: f64) -> Result<crate::grid::TimeGrid> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("weight order must lie in (0,1], got {alpha}"));
    }
    let cap = (1e-15f64).ln() / (1.0 / (n as f64 + 1.0)).ln();
    crate::grid::TimeGrid::graded_toward(t_end, n, (2.0 / alpha).min(cap).max(1.0))
}

/// Compares `‖G_p v‖_{L^p}` with `‖v‖_{L^p_α}`; passes when the relative
/// gap is at most `rel_tol`.
pub fn isometry_check(v: &Trajectory, spec: WeightedSpaceSpec, rel_tol: f64) -> Result<CheckReport> {
    let g = weight_isometry(v, spec)?;
    let plain = lp_norm(&g, spec.p)?;
    let weighted = weighted_norm(v, spec)?;
    let gap = (plain - weighted).abs();
    Ok(CheckReport::new("isometry", gap, rel_tol * weighted, 0.0, None))
}

/// Hölder-type bound at every node t ≥ t_1:
/// `‖J^{1−α}v(t)‖ ≤ (t^{1−α}/Γ(2−α))^{(p−1)/p} [J^{1−α}‖v‖^p(t)]^{1/p}`.
pub fn holder_lemma_check(v: &Trajectory, alpha: FracOrder, p: f64) -> Result<CheckReport> {
    let alpha = alpha.require_proper()?;
    if !(p >= 1.0) {
        return domain(format!("exponent p must be >= 1, got {p}"));
    }
    let beta = 1.0 - alpha.value();
    let grid = v.grid();
    let np: Vec<f64> = v.rows().map(|r| euclid(r).powf(p)).collect();
    let items: Vec<(f64, f64, f64)> = (1..grid.len())
        .into_par_iter()
        .map(|j| {
            let mut w = Vec::new();
            rl_node_weights(grid, beta, j, &mut w);
            let mut vec_sum = vec![0.0; v.dim()];
            for (i, wi) in w.iter().enumerate() {
                for (s, x) in vec_sum.iter_mut().zip(v.row(i)) {
                    *s += wi * x;
                }
            }
            let scalar = compensated_sum(w.iter().zip(&np).map(|(a, b)| a * b));
            let t = grid.nodes()[j];
            let c = (t.powf(beta) / tgamma(1.0 + beta)).powf((p - 1.0) / p);
            (t, euclid(&vec_sum), c * scalar.powf(1.0 / p))
        })
        .collect();
    Ok(CheckReport::pointwise("holder_lemma", items, 1e-9, 1e-300))
}

/// Result of the refinement-growth heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceDiagnostic {
    pub norms: [f64; 3],
    pub suspected_divergent: bool,
}

/// Recomputes the weighted norm of `f` on uniform grids with `n`, `2n`, `4n`
/// panels and flags growth of at least 10% per refinement. Non-finite
/// samples are replaced by a value a quarter panel inward. Diagnostic only.
pub fn divergence_heuristic<F: Fn(f64) -> f64>(f: F, spec: WeightedSpaceSpec, n: usize) -> Result<DivergenceDiagnostic> {
    let mut norms = [0.0; 3];
    for (k, norm) in norms.iter_mut().enumerate() {
        let panels = n << k;
        let grid = crate::grid::TimeGrid::uniform(spec.t_end, panels)?;
        let h = spec.t_end / panels as f64;
        let v = Trajectory::scalar_fn(&grid, "probe", |t| {
            let y = f(t);
            if y.is_finite() {
                y
            } else if t <= 0.0 {
                f(0.25 * h)
            } else {
                f(t - 0.25 * h)
            }
        })?;
        *norm = weighted_norm(&v, spec)?;
    }
    let grows = |a: f64, b: f64| b >= 1.1 * a;
    Ok(DivergenceDiagnostic {
        norms,
        suspected_divergent: grows(norms[0], norms[1]) && grows(norms[1], norms[2]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    #[test]
    fn constant_one_half_weight() {
        let g = TimeGrid::uniform(1.0, 64).unwrap();
        let v = Trajectory::constant(&g, &[1.0], "1").unwrap();
        let n = weighted_norm(&v, WeightedSpaceSpec::new(0.5, 2.0, 1.0).unwrap()).unwrap();
        assert!((n - 1.062_251_932_027_197).abs() < 1e-13, "{n}");
    }

    #[test]
    fn alpha_one_is_trapezoid() {
        let g = TimeGrid::graded(2.0, 50, 1.5).unwrap();
        let v = Trajectory::from_fn(&g, 2, "v", |t, o| {
            o[0] = t.sin();
            o[1] = 1.0 + t;
        })
        .unwrap();
        let p = 3.0;
        let y: Vec<f64> = v.rows().map(|r| euclid(r).powf(p)).collect();
        let n = g.nodes();
        let trap: f64 = (0..50).map(|i| 0.5 * (n[i + 1] - n[i]) * (y[i] + y[i + 1])).sum();
        let w = weighted_norm(&v, WeightedSpaceSpec::new(1.0, p, 2.0).unwrap()).unwrap();
        assert!((w - trap.powf(1.0 / p)).abs() < 1e-12 * w);
    }

    #[test]
    fn alpha_zero_is_sup() {
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        let v = Trajectory::scalar_fn(&g, "v", |t| 3.0 * t - 1.0).unwrap();
        assert_eq!(weighted_norm(&v, WeightedSpaceSpec::new(0.0, 2.0, 1.0).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn grid_past_horizon_is_rejected() {
        let g = TimeGrid::uniform(2.0, 10).unwrap();
        let v = Trajectory::constant(&g, &[1.0], "1").unwrap();
        assert!(weighted_norm(&v, WeightedSpaceSpec::new(0.5, 2.0, 1.0).unwrap()).is_err());
        assert!(WeightedSpaceSpec::new(1.5, 2.0, 1.0).is_err());
        assert!(WeightedSpaceSpec::new(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn isometry_rejects_endpoint() {
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        let v = Trajectory::constant(&g, &[1.0], "1").unwrap();
        let spec = WeightedSpaceSpec::new(0.5, 2.0, 1.0).unwrap();
        assert!(matches!(weight_isometry(&v, spec), Err(crate::Error::Domain(_))));
        let id = weight_isometry(&v, WeightedSpaceSpec::new(1.0, 2.0, 1.0).unwrap()).unwrap();
        assert_eq!(id.values(), v.values());
    }

    #[test]
    fn isometry_of_constant() {
        let spec = WeightedSpaceSpec::new(0.5, 2.0, 1.0).unwrap();
        let g = isometry_grid(1.0, 4096, 0.5).unwrap();
        assert_eq!(g.kind(), crate::GridKind::GradedToward { r: 4.0, target: 1.0 });
        let v = Trajectory::constant(&g, &[1.0], "1").unwrap();
        let gv = weight_isometry(&v, spec).unwrap();
        let t = g.nodes()[7];
        assert!((gv.row(7)[0] - (std::f64::consts::PI * (1.0 - t)).powf(-0.25)).abs() < 1e-12);
        let rep = isometry_check(&v, spec, 1e-6).unwrap();
        assert!(rep.passed, "{rep}");
    }

    #[test]
    fn holder_lemma_holds_for_oscillating_vector() {
        let g = TimeGrid::uniform(1.5, 200).unwrap();
        let v = Trajectory::from_fn(&g, 3, "v", |t, o| {
            o[0] = (7.0 * t).sin();
            o[1] = (3.0 * t).cos() - 0.5;
            o[2] = t * t - 1.0;
        })
        .unwrap();
        for p in [1.0, 2.0, 3.5] {
            let r = holder_lemma_check(&v, FracOrder::new(0.6).unwrap(), p).unwrap();
            assert!(r.passed, "{r}");
        }
        // p = 1 is an equality for a scalar of fixed sign
        let pos = Trajectory::scalar_fn(&g, "pos", |t| 1.0 + t).unwrap();
        let r = holder_lemma_check(&pos, FracOrder::new(0.6).unwrap(), 1.0).unwrap();
        assert!(r.margin.abs() < 1e-12 * r.rhs);
    }

    #[test]
    fn heuristic_flags_right_singularity() {
        let spec = WeightedSpaceSpec::new(0.5, 2.0, 1.0).unwrap();
        let div = divergence_heuristic(|t| (1.0 - t).powf(-0.7), spec, 256).unwrap();
        assert!(div.suspected_divergent, "{div:?}");
        let fine = divergence_heuristic(|t| (1.0 - t).powf(-0.1), spec, 256).unwrap();
        assert!(!fine.suspected_divergent, "{fine:?}");
    }
}
