//! Inclusions between `L^p_α`, `L^q_α` and `L^q` with explicit constants.

use crate::error::{domain, Result};
use crate::grid::Trajectory;
use crate::report::CheckReport;
use crate::specfun::tgamma;

use super::{weighted_norm, WeightedSpaceSpec};

/// Relative slack for comparing two exactly ordered norms.
pub const EMBEDDING_REL_TOL: f64 = 1e-9;

/// One of the three norm inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Embedding {
    /// `‖v‖_{L^p_β} ≤ C ‖v‖_{L^p_α}` for `0 ≤ α < β ≤ 1`.
    AlphaToBeta { alpha: f64, beta: f64, p: f64, t_end: f64 },
    /// `‖v‖_{L^p_α} ≤ C ‖v‖_{L^q_α}` for `p ≤ q`.
    PToQ { alpha: f64, p: f64, q: f64, t_end: f64 },
    /// `‖v‖_{L^p_α} ≤ C ‖v‖_{L^q}` for `q > p/α`.
    LqIntoLpAlpha { alpha: f64, p: f64, q: f64, t_end: f64 },
}

impl Embedding {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Embedding::AlphaToBeta { .. } => "alpha_to_beta",
            Embedding::PToQ { .. } => "p_to_q",
            Embedding::LqIntoLpAlpha { .. } => "Lq_into_Lpalpha",
        }
    }

    pub fn t_end(&self) -> f64 {
        match *self {
            Embedding::AlphaToBeta { t_end, .. }
            | Embedding::PToQ { t_end, .. }
            | Embedding::LqIntoLpAlpha { t_end, .. } => t_end,
        }
    }

    /// (larger space, smaller space) as (lhs spec, rhs spec).
    fn spaces(&self) -> Result<(WeightedSpaceSpec, WeightedSpaceSpec)> {
        match *self {
            Embedding::AlphaToBeta { alpha, beta, p, t_end } => {
                if !(0.0 <= alpha && alpha < beta && beta <= 1.0) {
                    return domain(format!("need 0 <= alpha < beta <= 1, got alpha={alpha}, beta={beta}"));
                }
                Ok((WeightedSpaceSpec::new(beta, p, t_end)?, WeightedSpaceSpec::new(alpha, p, t_end)?))
            }
            Embedding::PToQ { alpha, p, q, t_end } => {
                if !(q >= p) || !q.is_finite() {
                    return domain(format!("need 1 <= p <= q < inf, got p={p}, q={q}"));
                }
                Ok((WeightedSpaceSpec::new(alpha, p, t_end)?, WeightedSpaceSpec::new(alpha, q, t_end)?))
            }
            Embedding::LqIntoLpAlpha { alpha, p, q, t_end } => {
                if !(alpha > 0.0) {
                    return domain(format!("need alpha in (0,1], got {alpha}"));
                }
                let lhs = WeightedSpaceSpec::new(alpha, p, t_end)?;
                if !(q > p / alpha) || !q.is_finite() {
                    return domain(format!("need q > p/alpha = {}, got q={q}", p / alpha));
                }
                Ok((lhs, WeightedSpaceSpec::plain(q, t_end)?))
            }
        }
    }
}

/// The constant `C` of the inequality.
pub fn embedding_constant(e: Embedding) -> Result<f64> {
    e.spaces()?;
    Ok(match e {
        Embedding::AlphaToBeta { alpha, beta, p, t_end } => {
            if alpha == 0.0 {
                (t_end.powf(beta) / tgamma(beta + 1.0)).powf(1.0 / p)
            } else {
                (t_end.powf(beta - alpha) * tgamma(alpha) / tgamma(beta)).powf(1.0 / p)
            }
        }
        Embedding::PToQ { alpha, p, q, t_end } => {
            (t_end.powf(alpha) / tgamma(alpha + 1.0)).powf((q - p) / (p * q))
        }
        Embedding::LqIntoLpAlpha { alpha, p, q, t_end } => {
            ((q - p) / (alpha * q - p)).powf((q - p) / (p * q)) * t_end.powf((alpha * q - p) / (p * q))
                / tgamma(alpha).powf(1.0 / p)
        }
    })
}

/// Evaluates both sides of the inequality for `v`, whose grid must end at T.
pub fn check_embedding(v: &Trajectory, e: Embedding) -> Result<CheckReport> {
    let (big, small) = e.spaces()?;
    let horizon = v.grid().horizon();
    if (horizon - e.t_end()).abs() > 1e-14 * e.t_end() {
        return domain(format!("trajectory ends at {horizon}, the embedding horizon is {}", e.t_end()));
    }
    let c = embedding_constant(e)?;
    let lhs = weighted_norm(v, big)?;
    let rhs = c * weighted_norm(v, small)?;
    Ok(CheckReport::new(e.kind_name(), lhs, rhs, EMBEDDING_REL_TOL * rhs, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    #[test]
    fn published_constants() {
        let c = embedding_constant(Embedding::AlphaToBeta { alpha: 0.5, beta: 1.0, p: 2.0, t_end: 1.0 }).unwrap();
        assert!((c - std::f64::consts::PI.powf(0.25)).abs() < 1e-14);
        assert!((c - 1.331_335_363_800_389_7).abs() < 1e-14);
        let c = embedding_constant(Embedding::PToQ { alpha: 0.3, p: 2.0, q: 2.0, t_end: 5.0 }).unwrap();
        assert_eq!(c, 1.0);
        // (1/0.2)^{1/2} / Γ(0.6)
        let c = embedding_constant(Embedding::LqIntoLpAlpha { alpha: 0.6, p: 1.0, q: 2.0, t_end: 1.0 }).unwrap();
        assert!((c - 5f64.sqrt() / 1.489_192_248_812_817_1).abs() < 1e-14);
    }

    #[test]
    fn hypotheses_are_enforced() {
        assert!(embedding_constant(Embedding::AlphaToBeta { alpha: 0.6, beta: 0.5, p: 2.0, t_end: 1.0 }).is_err());
        assert!(embedding_constant(Embedding::PToQ { alpha: 0.5, p: 3.0, q: 2.0, t_end: 1.0 }).is_err());
        assert!(embedding_constant(Embedding::LqIntoLpAlpha { alpha: 0.5, p: 2.0, q: 4.0, t_end: 1.0 }).is_err());
    }

    #[test]
    fn constants_saturate_p_to_q() {
        let g = TimeGrid::uniform(2.0, 32).unwrap();
        let v = Trajectory::constant(&g, &[1.0], "1").unwrap();
        let r = check_embedding(&v, Embedding::PToQ { alpha: 0.4, p: 1.5, q: 4.0, t_end: 2.0 }).unwrap();
        assert!(r.passed);
        assert!(r.margin.abs() < 1e-13 * r.rhs);
    }

    #[test]
    fn zero_trajectory() {
        let g = TimeGrid::uniform(1.0, 8).unwrap();
        let v = Trajectory::constant(&g, &[0.0, 0.0], "0").unwrap();
        let r = check_embedding(&v, Embedding::AlphaToBeta { alpha: 0.3, beta: 0.8, p: 2.0, t_end: 1.0 }).unwrap();
        assert_eq!((r.lhs, r.rhs, r.passed), (0.0, 0.0, true));
    }
}
