use crate::error::{domain, Error, Result};
use crate::fracops::rl_node_weights;
use crate::grid::{euclid, euclid_diff, TimeGrid, Trajectory};
use crate::specfun::{gronwall_envelope, EnvelopeVariant};
use crate::sum::CompensatedSum;

use super::{lp_of_samples, step_with_fraction, FracIVP};

/// Per-segment record of a Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub start: f64,
    pub end: f64,
    /// Step length allowed by the contraction conditions.
    pub step_bound: f64,
    pub iterations: usize,
    /// Largest ratio of successive sup-differences above the noise floor.
    pub contraction_factor: Option<f64>,
    pub diffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveTrace {
    pub segments: Vec<SegmentRecord>,
    /// Nodes where ‖u‖ exceeds the standard Gronwall envelope; `None` when
    /// the envelope could not be evaluated.
    pub envelope_violations: Option<usize>,
}

impl SolveTrace {
    pub fn max_contraction(&self) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| s.contraction_factor)
            .fold(0.0, f64::max)
    }

    pub fn total_iterations(&self) -> usize {
        self.segments.iter().map(|s| s.iterations).sum()
    }
}

/// Picard iteration `φ_{k+1} = u₀ + J^α G(·, φ_k)` with product integration.
///
/// The first segment uses the local existence conditions with constant 1/2;
/// each continuation segment starts at the last accepted node, centres the
/// Lipschitz ball at the current state and uses constant 1/3, while the
/// history integral always runs from 0.
pub fn picard_solve(ivp: &FracIVP, grid: &TimeGrid, tol: f64, max_iter: usize) -> Result<(Trajectory, SolveTrace)> {
    if (grid.horizon() - ivp.t_end()).abs() > 1e-12 * ivp.t_end() {
        return domain(format!("grid ends at {}, the problem horizon is {}", grid.horizon(), ivp.t_end()));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return domain("need tol > 0 and max_iter >= 1");
    }
    let alpha = ivp.alpha().value();
    let p = ivp.growth().p;
    let m = ivp.dim();
    let t = grid.nodes();
    let n = grid.len();
    let radius = ivp.radius();
    let beta = 0.5 * radius;
    let u0 = ivp.u0().to_vec();

    let mut phi = vec![0.0; n * m];
    let mut gv = vec![0.0; n * m];
    phi[..m].copy_from_slice(&u0);
    ivp.eval(t[0], &u0, &mut gv[..m]);

    let mut trace = SolveTrace::default();
    let mut buf = vec![0.0; m];
    let mut w = Vec::new();
    let mut s = 0;
    while s + 1 < n {
        let center = phi[s * m..(s + 1) * m].to_vec();
        let l = ivp.lipschitz_at(&center, radius, t);
        // ‖G(·, centre)‖ over the whole interval
        let frozen: Vec<f64> = t
            .iter()
            .map(|&ti| {
                ivp.eval(ti, &center, &mut buf);
                euclid(&buf)
            })
            .collect();
        let mut g = lp_of_samples(t, &frozen, p);
        let frac = if s == 0 {
            0.5
        } else {
            let along: Vec<f64> = gv[..(s + 1) * m].chunks_exact(m).map(euclid).collect();
            g = g.max(lp_of_samples(&t[..=s], &along, p));
            1.0 / 3.0
        };
        let tau = step_with_fraction(l, alpha, p, g, beta, frac).map_err(|_| Error::StepDegeneration {
            t: t[s],
            step: 0.0,
            panel: t[s + 1] - t[s],
        })?;
        let mut e = s;
        while e + 1 < n && t[e + 1] - t[s] <= tau {
            e += 1;
        }
        if e == s {
            return Err(Error::StepDegeneration { t: t[s], step: tau, panel: t[s + 1] - t[s] });
        }

        // history over nodes ≤ s is frozen during the segment
        let mut history = vec![0.0; (e - s) * m];
        let mut tails: Vec<Vec<f64>> = Vec::with_capacity(e - s);
        for j in s + 1..=e {
            rl_node_weights(grid, alpha, j, &mut w);
            let row = &mut history[(j - s - 1) * m..(j - s) * m];
            for k in 0..m {
                let mut acc = CompensatedSum::new();
                for (i, wi) in w.iter().enumerate().take(s + 1) {
                    acc.add(wi * gv[i * m + k]);
                }
                row[k] = acc.value();
            }
            tails.push(w[s + 1..].to_vec());
        }

        for j in s + 1..=e {
            phi[j * m..(j + 1) * m].copy_from_slice(&center);
            ivp.eval(t[j], &center, &mut gv[j * m..(j + 1) * m]);
        }
        let mut next = vec![0.0; (e - s) * m];
        let mut diffs = Vec::new();
        let mut converged = false;
        for _ in 0..max_iter {
            for j in s + 1..=e {
                let tail = &tails[j - s - 1];
                for k in 0..m {
                    let mut acc = CompensatedSum::new();
                    acc.add(history[(j - s - 1) * m + k]);
                    for (o, wi) in tail.iter().enumerate() {
                        acc.add(wi * gv[(s + 1 + o) * m + k]);
                    }
                    next[(j - s - 1) * m + k] = u0[k] + acc.value();
                }
            }
            let mut d = 0.0f64;
            for j in s + 1..=e {
                let new = &next[(j - s - 1) * m..(j - s) * m];
                d = d.max(euclid_diff(new, &phi[j * m..(j + 1) * m]));
                phi[j * m..(j + 1) * m].copy_from_slice(new);
            }
            for j in s + 1..=e {
                let (x, out) = (&phi[j * m..(j + 1) * m], &mut gv[j * m..(j + 1) * m]);
                ivp.eval(t[j], x, out);
            }
            diffs.push(d);
            if !d.is_finite() {
                break;
            }
            if d <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: diffs.len(),
                last_diff: diffs.last().copied().unwrap_or(f64::NAN),
            });
        }
        let scale = phi[s * m..(e + 1) * m].iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let floor = 1e-11 * scale;
        let contraction_factor = diffs
            .windows(2)
            .filter(|d| d[0] > floor)
            .map(|d| d[1] / d[0])
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        trace.segments.push(SegmentRecord {
            start: t[s],
            end: t[e],
            step_bound: tau,
            iterations: diffs.len(),
            contraction_factor,
            diffs,
        });
        s = e;
    }

    let u = Trajectory::new(grid.clone(), m, phi, "picard")?;
    trace.envelope_violations = envelope_violations(ivp, &u);
    Ok((u, trace))
}

fn envelope_violations(ivp: &FracIVP, u: &Trajectory) -> Option<usize> {
    let growth = ivp.growth();
    let alpha = ivp.alpha().value();
    let m = growth.envelope_m(ivp.u0(), alpha, ivp.t_end());
    let mut count = 0;
    for (t, row) in u.grid().nodes().iter().zip(u.rows()) {
        let env = gronwall_envelope(m, growth.c, alpha, *t, EnvelopeVariant::Standard).ok()?;
        if euclid(row) > env * (1.0 + 1e-9) {
            count += 1;
        }
    }
    Some(count)
}
