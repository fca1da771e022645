//! Caputo initial-value problems `cD^α u = G(t, u)`, `u(0) = u₀`.
//!
//! Three solution paths:
//! * [`picard_solve`]: fixed-point iteration on `u = u₀ + J^α G(·, u)`,
//!   segment by segment with contraction-based step lengths and full memory;
//! * [`l1_implicit_solve`]: L1 time marching for affine `G = f − A u`;
//! * [`duhamel_closed_form`]: Mittag-Leffler variation of constants for a
//!   scalar dissipative mode.

mod duhamel;
mod l1;
mod picard;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, invalid, Error, Result};
use crate::grid::{euclid, euclid_diff, FracOrder, Trajectory};
use crate::report::CheckReport;
use crate::specfun::{gronwall_envelope, tgamma, EnvelopeVariant};

pub use duhamel::duhamel_closed_form;
pub use l1::{l1_implicit_solve, SystemMatrix};
pub use picard::{picard_solve, SegmentRecord, SolveTrace};

pub type RhsFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
/// `(center, radius) → L` on the ball of that radius.
pub type LipschitzFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Growth bound `‖G(t,x)‖ ≤ γ(t) + C‖x‖^{q/p}` with `‖γ‖_{L^p} = gamma_norm`.
/// `p = ∞` is accepted and stands for bounded γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub gamma_norm: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

impl Growth {
    pub fn new(gamma_norm: f64, c: f64, p: f64) -> Self {
        Growth { gamma_norm, c, p, q: p }
    }

    /// `((p−1)/(αp−1))^{1−1/p}`, tending to `1/α` as p → ∞.
    pub fn holder_factor(&self, alpha: f64) -> f64 {
        holder_factor(alpha, self.p)
    }

    /// The constant M of the global a priori bound.
    pub fn envelope_m(&self, u0: &[f64], alpha: f64, t_end: f64) -> f64 {
        euclid(u0) + holder_factor(alpha, self.p) / tgamma(alpha) * t_end.powf(alpha - 1.0 / self.p) * self.gamma_norm
    }
}

pub(crate) fn holder_factor(alpha: f64, p: f64) -> f64 {
    if p.is_infinite() {
        1.0 / alpha
    } else {
        ((p - 1.0) / (alpha * p - 1.0)).powf(1.0 - 1.0 / p)
    }
}

/// A Caputo initial-value problem.
#[derive(Clone)]
pub struct FracIVP {
    alpha: FracOrder,
    u0: Vec<f64>,
    t_end: f64,
    rhs: RhsFn,
    lipschitz: Option<LipschitzFn>,
    growth: Growth,
    radius: f64,
}

impl std::fmt::Debug for FracIVP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FracIVP")
            .field("alpha", &self.alpha)
            .field("u0", &self.u0)
            .field("t_end", &self.t_end)
            .field("growth", &self.growth)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl FracIVP {
    pub fn new<F>(alpha: FracOrder, u0: Vec<f64>, t_end: f64, rhs: F, growth: Growth) -> Result<Self>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let alpha = alpha.require_proper()?;
        if u0.is_empty() || u0.iter().any(|x| !x.is_finite()) {
            return invalid("initial state must be a non-empty finite vector");
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return domain(format!("horizon must be positive, got {t_end}"));
        }
        if !(growth.p > 1.0) {
            return domain(format!("growth exponent p must exceed 1, got {}", growth.p));
        }
        if growth.q != growth.p {
            return invalid(format!(
                "growth metadata with q != p (q={}, p={}) is not covered by the global theorem",
                growth.q, growth.p
            ));
        }
        if !(alpha.value() * growth.p > 1.0) {
            return domain(format!("need alpha*p > 1, got alpha={} p={}", alpha.value(), growth.p));
        }
        if !(growth.gamma_norm >= 0.0) || !(growth.c >= 0.0) {
            return domain("growth constants must be non-negative");
        }
        Ok(FracIVP {
            alpha,
            u0,
            t_end,
            rhs: Arc::new(rhs),
            lipschitz: None,
            growth,
            radius: 1.0,
        })
    }

    /// Affine problem `G(t,x) = f(t) − A x`, with exact Lipschitz and growth data.
    /// `f_sup` must bound `sup_t ‖f(t)‖`.
    pub fn affine<F>(alpha: FracOrder, a: SystemMatrix, forcing: F, f_sup: f64, u0: Vec<f64>, t_end: f64) -> Result<Self>
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        if a.dim() != u0.len() {
            return invalid(format!("matrix has dimension {}, initial state {}", a.dim(), u0.len()));
        }
        let lip = a.norm_bound();
        let a2 = a.clone();
        let rhs = move |t: f64, x: &[f64], out: &mut [f64]| {
            forcing(t, out);
            let mut ax = vec![0.0; x.len()];
            a2.apply(x, &mut ax);
            for (o, v) in out.iter_mut().zip(ax) {
                *o -= v;
            }
        };
        let ivp = Self::new(alpha, u0, t_end, rhs, Growth::new(f_sup, lip, f64::INFINITY))?;
        Ok(ivp.with_lipschitz(move |_, _| lip))
    }

    pub fn with_lipschitz<L>(mut self, l: L) -> Self
    where
        L: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        self.lipschitz = Some(Arc::new(l));
        self
    }

    /// Radius r of the Lipschitz ball; iterates stay within r/2 of the
    /// segment's starting state.
    pub fn with_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("radius must be positive, got {r}"));
        }
        self.radius = r;
        Ok(self)
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.rhs)(t, x, out)
    }

    /// Caller-supplied L, or a finite-difference probe along 8 fixed
    /// pseudo-random directions of length `radius/2` at the given times.
    pub fn lipschitz_at(&self, center: &[f64], radius: f64, times: &[f64]) -> f64 {
        if let Some(l) = &self.lipschitz {
            return l(center, radius);
        }
        let m = self.dim();
        let h = 0.5 * radius;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut base = vec![0.0; m];
        let mut moved = vec![0.0; m];
        let mut x = vec![0.0; m];
        let mut best = 0.0f64;
        for _ in 0..8 {
            let mut d: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = euclid(&d).max(1e-300);
            d.iter_mut().for_each(|v| *v /= n);
            for (xi, (c, di)) in x.iter_mut().zip(center.iter().zip(&d)) {
                *xi = c + h * di;
            }
            for &t in times {
                self.eval(t, center, &mut base);
                self.eval(t, &x, &mut moved);
                best = best.max(euclid_diff(&moved, &base) / h);
            }
        }
        best
    }
}

/// Largest τ with `τ^α L/Γ(α+1) ≤ frac` and
/// `(1/Γ(α)) K_p τ^{α−1/p} g ≤ frac·β`, where `K_p = ((p−1)/(αp−1))^{1−1/p}`.
fn step_with_fraction(l: f64, alpha: f64, p: f64, g: f64, beta: f64, frac: f64) -> Result<f64> {
    let tau1 = if l > 0.0 { (frac * tgamma(alpha + 1.0) / l).powf(1.0 / alpha) } else { f64::INFINITY };
    let e = if p.is_infinite() { alpha } else { alpha - 1.0 / p };
    let tau2 = if g > 0.0 {
        (frac * beta * tgamma(alpha) / (holder_factor(alpha, p) * g)).powf(1.0 / e)
    } else {
        f64::INFINITY
    };
    let tau = tau1.min(tau2);
    if !(tau > 0.0) {
        return Err(Error::StepDegeneration { t: 0.0, step: tau, panel: f64::MIN_POSITIVE });
    }
    Ok(tau)
}

/// Local existence step: the largest τ with `τ^α L/Γ(α+1) ≤ 1/2` and
/// `(1/Γ(α)) ((p−1)/(αp−1))^{1−1/p} τ^{α−1/p} ‖G(·,u₀)‖_{L^p} ≤ β/2`.
/// Returns infinity when neither condition binds.
pub fn contraction_step(l: f64, alpha: FracOrder, p: f64, gamma_local_norm: f64, beta: f64) -> Result<f64> {
    let a = alpha.require_proper()?.value();
    if !(p > 1.0) || !(a * p > 1.0) {
        return domain(format!("need p > 1 and alpha*p > 1, got alpha={a} p={p}"));
    }
    if !(l >= 0.0) || !(gamma_local_norm >= 0.0) || !(beta > 0.0) {
        return domain("need L >= 0, a non-negative forcing norm and beta > 0");
    }
    step_with_fraction(l, a, p, gamma_local_norm, beta, 0.5)
}

/// Checks `‖u(t_j)‖ ≤ M·E_α(C t_j^α)` and the literal variant
/// `M·E_α(C^{1/α} t_j)` at every node, with relative slack `rel_tol`.
pub fn gronwall_check(u: &Trajectory, m: f64, c: f64, alpha: FracOrder, rel_tol: f64) -> Result<[CheckReport; 2]> {
    let a = alpha.value();
    let mut out = Vec::with_capacity(2);
    for (variant, name) in [(EnvelopeVariant::Standard, "gronwall_standard"), (EnvelopeVariant::Literal, "gronwall_literal")] {
        let mut items = Vec::with_capacity(u.grid().len());
        for (t, row) in u.grid().nodes().iter().zip(u.rows()) {
            items.push((*t, euclid(row), gronwall_envelope(m, c, a, *t, variant)?));
        }
        out.push(CheckReport::pointwise(name, items, rel_tol, 0.0));
    }
    let [s, l]: [CheckReport; 2] = out.try_into().expect("two variants");
    Ok([s, l])
}

/// Checks `‖u(t_{j+1}) − u(t_j)‖ ≤ (2/Γ(α)) K_p Δt^{α−1/p} ‖G(·,u)‖_{L^p(0,T)}`
/// on all adjacent node pairs.
pub fn shift_continuity_check(ivp: &FracIVP, u: &Trajectory, rel_tol: f64) -> Result<CheckReport> {
    let a = ivp.alpha.value();
    let p = ivp.growth.p;
    let dim = ivp.dim();
    let mut g = vec![0.0; dim];
    let gn: Vec<f64> = u
        .grid()
        .nodes()
        .iter()
        .zip(u.rows())
        .map(|(t, row)| {
            ivp.eval(*t, row, &mut g);
            euclid(&g)
        })
        .collect();
    let norm = lp_of_samples(u.grid().nodes(), &gn, p);
    let e = if p.is_infinite() { a } else { a - 1.0 / p };
    let k = 2.0 / tgamma(a) * holder_factor(a, p) * norm;
    let nodes = u.grid().nodes();
    let items = (0..nodes.len() - 1).map(|j| {
        let dt = nodes[j + 1] - nodes[j];
        (nodes[j + 1], euclid_diff(u.row(j + 1), u.row(j)), k * dt.powf(e))
    });
    Ok(CheckReport::pointwise("shift_continuity", items, rel_tol, 0.0))
}

/// `L^p` norm of node samples over the nodes given (trapezoid on `|x|^p`;
/// max for p = ∞).
pub(crate) fn lp_of_samples(nodes: &[f64], values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = crate::sum::compensated_sum(
        nodes
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].abs().powf(p) + v[1].abs().powf(p))),
    );
    s.powf(1.0 / p)
}

/// Sup-distance at the nodes shared with the coarse solution (every other
/// fine node), a conservative estimate of the fine solution's error.
pub fn refinement_error_estimate(fine: &Trajectory, coarse: &Trajectory) -> Result<f64> {
    let nf = fine.grid().panels();
    if fine.dim() != coarse.dim() || coarse.grid().panels() * 2 != nf {
        return invalid("coarse trajectory must live on every other fine node");
    }
    let mut worst = 0.0f64;
    for j in 0..coarse.grid().len() {
        if (fine.grid().nodes()[2 * j] - coarse.grid().nodes()[j]).abs() > 1e-14 * fine.grid().horizon() {
            return invalid("coarse grid nodes do not coincide with fine nodes");
        }
        worst = worst.max(euclid_diff(fine.row(2 * j), coarse.row(j)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::specfun::{mittag_leffler, MlParams};

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn step_limited_by_forcing_only_without_lipschitz() {
        let tau = contraction_step(0.0, order(0.75), 4.0, 1.0, 0.5).unwrap();
        let k = holder_factor(0.75, 4.0);
        let e = 0.75 - 0.25;
        assert!((k / tgamma(0.75) * tau.powf(e) - 0.25).abs() < 1e-13);
        assert!(contraction_step(0.0, order(0.75), 4.0, 0.0, 0.5).unwrap().is_infinite());
    }

    #[test]
    fn step_from_lipschitz_condition() {
        let tau = contraction_step(1.0, order(0.75), 2.0, 0.0, 0.5).unwrap();
        let want = (tgamma(1.75) / 2.0).powf(1.0 / 0.75);
        assert!((tau - want).abs() < 1e-15);
        // substituting back gives exactly 1/2
        assert!((tau.powf(0.75) / tgamma(1.75) - 0.5).abs() < 1e-15);
        let tau2 = contraction_step(2.0, order(0.75), 2.0, 0.0, 0.5).unwrap();
        assert!((tau2 - tau / 2f64.powf(1.0 / 0.75)).abs() < 1e-15);
    }

    #[test]
    fn step_rejects_bad_exponents() {
        assert!(contraction_step(1.0, order(0.4), 2.0, 1.0, 0.5).is_err());
        assert!(contraction_step(1.0, order(1.0), 2.0, 1.0, 0.5).is_err());
        assert!(contraction_step(-1.0, order(0.7), 2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn ivp_rejects_q_different_from_p() {
        let mut g = Growth::new(1.0, 1.0, 2.0);
        g.q = 3.0;
        let r = FracIVP::new(order(0.7), vec![1.0], 1.0, |_, _, o| o[0] = 0.0, g);
        assert!(matches!(r, Err(Error::Invalid(_))));
        let r = FracIVP::new(order(0.4), vec![1.0], 1.0, |_, _, o| o[0] = 0.0, Growth::new(1.0, 1.0, 2.0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn finite_difference_lipschitz() {
        let ivp = FracIVP::new(order(0.7), vec![1.0, 0.0], 1.0, |_, x, o| {
            o[0] = -3.0 * x[0];
            o[1] = x[1];
        }, Growth::new(0.0, 3.0, f64::INFINITY))
        .unwrap();
        let l = ivp.lipschitz_at(&[1.0, 0.0], 1.0, &[0.0, 0.5]);
        assert!(l > 1.0 && l <= 3.0 + 1e-12, "{l}");
    }

    #[test]
    fn gronwall_variants_on_decay() {
        let g = TimeGrid::uniform(2.0, 50).unwrap();
        let p = MlParams::one(0.6).unwrap();
        let u = Trajectory::scalar_fn(&g, "decay", |t| mittag_leffler(p, -t.powf(0.6)).unwrap()).unwrap();
        let [s, l] = gronwall_check(&u, 1.0, 1.0, order(0.6), 1e-12).unwrap();
        assert!(s.passed && l.passed);
    }

    #[test]
    fn lp_of_samples_cases() {
        let nodes = [0.0, 0.5, 1.0];
        assert_eq!(lp_of_samples(&nodes, &[1.0, -3.0, 2.0], f64::INFINITY), 3.0);
        assert!((lp_of_samples(&nodes, &[1.0, 1.0, 1.0], 2.0) - 1.0).abs() < 1e-15);
    }
}
