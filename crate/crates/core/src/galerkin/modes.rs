//! Divergence-free spectral bases: Fourier modes on the 2-torus, or bare
//! eigenvalue lists.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// 1-based position in the ordered set.
    pub id: usize,
    pub lambda: f64,
    pub wavevector: Option<[i64; 2]>,
    pub trig: Option<Trig>,
}

impl Mode {
    /// Velocity `(k^⊥/|k|)·trig(k·x)/(π√2)` at `(x, y)`; `None` for abstract modes.
    pub fn velocity(&self, x: f64, y: f64) -> Option<[f64; 2]> {
        let [k1, k2] = self.wavevector?;
        let (k1, k2) = (k1 as f64, k2 as f64);
        let phase = k1 * x + k2 * y;
        let s = match self.trig? {
            Trig::Cos => phase.cos(),
            Trig::Sin => phase.sin(),
        };
        let amp = s / (self.lambda.sqrt() * PI * std::f64::consts::SQRT_2);
        Some([-k2 * amp, k1 * amp])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
}

impl ModeSet {
    /// Abstract modes from eigenvalues that must be positive and ascending.
    pub fn from_eigenvalues(lambdas: &[f64]) -> Result<Self> {
        if lambdas.is_empty() {
            return invalid("need at least one eigenvalue");
        }
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return invalid("eigenvalues must be positive and finite");
        }
        if lambdas.windows(2).any(|w| w[1] < w[0]) {
            return invalid("eigenvalues must be sorted ascending");
        }
        let modes = lambdas
            .iter()
            .enumerate()
            .map(|(i, &lambda)| Mode { id: i + 1, lambda, wavevector: None, trig: None })
            .collect();
        Ok(ModeSet { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }
}

/// Torus modes with `0 < |k|² ≤ K²`, one wavevector per ±k pair, each giving
/// a cosine and a sine mode. Ordered by λ, then k, cosine first.
pub fn torus_modes(k_max: usize) -> ModeSet {
    let k = k_max as i64;
    let mut wv = Vec::new();
    for k1 in 0..=k {
        for k2 in -k..=k {
            let n2 = k1 * k1 + k2 * k2;
            let canonical = k1 > 0 || (k1 == 0 && k2 > 0);
            if canonical && n2 > 0 && n2 <= k * k {
                wv.push([k1, k2]);
            }
        }
    }
    wv.sort_by_key(|&[a, b]| (a * a + b * b, a, b));
    let modes = wv
        .iter()
        .flat_map(|&w| [Trig::Cos, Trig::Sin].map(move |t| (w, t)))
        .enumerate()
        .map(|(i, (w, t))| Mode {
            id: i + 1,
            lambda: (w[0] * w[0] + w[1] * w[1]) as f64,
            wavevector: Some(w),
            trig: Some(t),
        })
        .collect();
    ModeSet { modes }
}
