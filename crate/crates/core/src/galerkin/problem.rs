//! Projected problem data: coefficients of u₀ and of the forcing on the basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::modes::{torus_modes, ModeSet};
use crate::config::{parse_grid, Config};
use crate::error::{invalid, Error, Result};
use crate::grid::{FracOrder, TimeGrid, Trajectory};
use crate::fracode::SystemMatrix;

/// `a·sin(w t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub a: f64,
    pub w: f64,
    pub phi: f64,
}

impl TrigTerm {
    pub fn eval(&self, t: f64) -> f64 {
        self.a * (self.w * t + self.phi).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    L1,
    ClosedForm,
    Picard,
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l1" => Ok(SolveMethod::L1),
            "closed_form" => Ok(SolveMethod::ClosedForm),
            "picard" => Ok(SolveMethod::Picard),
            other => invalid(format!("key 'method': expected l1, closed_form or picard, got '{other}'")),
        }
    }
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::L1 => "l1",
            SolveMethod::ClosedForm => "closed_form",
            SolveMethod::Picard => "picard",
        })
    }
}

/// `cD^α g_j + νλ_j g_j = f_j`, `g_j(0) = u0[j]`, for the first m modes.
///
/// `u0` and `forcing` cover every mode of the set; truncation only selects
/// the leading m of them.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinProblem {
    alpha: FracOrder,
    nu: f64,
    modes: ModeSet,
    m: usize,
    u0: Vec<f64>,
    forcing: Vec<Vec<TrigTerm>>,
    grid: TimeGrid,
    f_coeffs: Trajectory,
    seed: Option<u64>,
}

/// Data of the diagonal affine system for the retained modes.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub lambdas: Vec<f64>,
    pub f_coeffs: Trajectory,
    pub u0: Vec<f64>,
}

impl AssembledSystem {
    pub fn matrix(&self, nu: f64) -> SystemMatrix {
        SystemMatrix::Diagonal(self.lambdas.iter().map(|l| nu * l).collect())
    }
}

impl GalerkinProblem {
    pub fn new(
        alpha: f64,
        nu: f64,
        modes: ModeSet,
        m: usize,
        u0: Vec<f64>,
        forcing: Vec<Vec<TrigTerm>>,
        grid: TimeGrid,
    ) -> Result<Self> {
        let alpha = FracOrder::new(alpha)?.require_above_half()?;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Domain(format!("viscosity must be positive, got {nu}")));
        }
        if m == 0 || m > modes.len() {
            return invalid(format!("truncation m = {m} must lie in 1..={}", modes.len()));
        }
        if u0.len() != modes.len() || forcing.len() != modes.len() {
            return invalid("u0 and forcing need one entry per mode");
        }
        let f_coeffs = sample_forcing(&forcing[..m], &grid)?;
        Ok(GalerkinProblem { alpha, nu, modes, m, u0, forcing, grid, f_coeffs, seed: None })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Same data on another grid.
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        let f_coeffs = sample_forcing(&self.forcing[..self.m], &grid)?;
        Ok(GalerkinProblem { grid, f_coeffs, ..self.clone() })
    }

    /// Same data kept on the leading m modes.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        let p = Self::new(self.alpha.value(), self.nu, self.modes.clone(), m, self.u0.clone(), self.forcing.clone(), self.grid.clone())?;
        Ok(GalerkinProblem { seed: self.seed, ..p })
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Coefficients of u₀ on the retained modes.
    pub fn u0_coeffs(&self) -> &[f64] {
        &self.u0[..self.m]
    }

    /// Forcing coefficients sampled on the grid, one column per retained mode.
    pub fn f_coeffs(&self) -> &Trajectory {
        &self.f_coeffs
    }

    pub fn forcing_terms(&self, j: usize) -> &[TrigTerm] {
        &self.forcing[j]
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.lambdas()[..self.m].to_vec()
    }

    pub fn assemble(&self) -> AssembledSystem {
        AssembledSystem { lambdas: self.lambdas(), f_coeffs: self.f_coeffs.clone(), u0: self.u0_coeffs().to_vec() }
    }

    /// Build from flat config keys:
    /// `alpha, nu, K | lambdas, m, T, N, grid, u0, forcing, method, seed`.
    pub fn from_config(cfg: &Config) -> Result<(Self, SolveMethod)> {
        let alpha: f64 = cfg.required("alpha")?;
        let nu: f64 = cfg.or("nu", 1.0)?;
        let modes = match (cfg.get("K"), cfg.list_f64("lambdas")?) {
            (Some(_), Some(_)) => return invalid("keys 'K' and 'lambdas' are mutually exclusive"),
            (_, Some(l)) => ModeSet::from_eigenvalues(&l)?,
            _ => {
                let k: usize = cfg.or("K", 2)?;
                if k == 0 {
                    return invalid("key 'K': torus cutoff must be at least 1");
                }
                torus_modes(k)
            }
        };
        let m: usize = cfg.or("m", modes.len())?;
        let t_end: f64 = cfg.or("T", 1.0)?;
        let n: usize = cfg.or("N", 1024)?;
        let default_grid = format!("graded:{}", (2.0 - alpha) / alpha);
        let grid = parse_grid(cfg.get("grid").unwrap_or(&default_grid), t_end, n)?;
        let nm = modes.len();
        let mut u0 = vec![0.0; nm];
        if let Some(spec) = cfg.get("u0") {
            for item in items(spec) {
                let rest = item.strip_prefix("mode:").ok_or_else(|| bad("u0", item))?;
                let (id, val) = rest.split_once('=').ok_or_else(|| bad("u0", item))?;
                let j = mode_index(id, nm, "u0")?;
                u0[j] = val.parse().map_err(|_| bad("u0", item))?;
            }
        }
        let mut forcing = vec![Vec::new(); nm];
        if let Some(spec) = cfg.get("forcing") {
            for item in items(spec) {
                let rest = item.strip_prefix("mode:").ok_or_else(|| bad("forcing", item))?;
                let (id, tail) = rest.split_once(":trig:").ok_or_else(|| bad("forcing", item))?;
                let j = mode_index(id, nm, "forcing")?;
                let v: Vec<f64> = tail
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("forcing", item))?;
                let [a, w, phi] = v[..] else { return Err(bad("forcing", item)) };
                forcing[j].push(TrigTerm { a, w, phi });
            }
        }
        let method: SolveMethod = cfg.or("method", SolveMethod::L1)?;
        let mut p = Self::new(alpha, nu, modes, m, u0, forcing, grid)?;
        if let Some(seed) = cfg.parsed::<u64>("seed")? {
            p = p.with_seed(seed);
        }
        Ok((p, method))
    }
}

fn items(spec: &str) -> impl Iterator<Item = &str> {
    spec.split(|c: char| c == ';' || c.is_whitespace()).filter(|s| !s.is_empty())
}

fn bad(key: &str, item: &str) -> Error {
    Error::Invalid(format!("key '{key}': cannot parse '{item}'"))
}

fn mode_index(id: &str, n: usize, key: &str) -> Result<usize> {
    match id.trim().parse::<usize>() {
        Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
        _ => invalid(format!("key '{key}': mode id '{id}' outside 1..={n}")),
    }
}

fn sample_forcing(terms: &[Vec<TrigTerm>], grid: &TimeGrid) -> Result<Trajectory> {
    Trajectory::from_fn(grid, terms.len(), "f", |t, out| {
        for (o, ts) in out.iter_mut().zip(terms) {
            *o = ts.iter().map(|x| x.eval(t)).sum();
        }
    })
}

/// Panels used for random instances.
pub const RANDOM_INSTANCE_N: usize = 1024;

/// Seeded random instance on the K = 2 torus set, T = 1: ν log-uniform in
/// [0.1, 10], α uniform in [0.55, 0.95], m uniform in 1..=12, standard normal
/// u₀ coefficients and three trig terms per mode. The grid is graded with
/// exponent (2−α)/α.
pub fn random_instance(seed: u64) -> Result<GalerkinProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = rng.gen_range(0.1f64.ln()..10.0f64.ln()).exp();
    let alpha = rng.gen_range(0.55..0.95);
    let modes = torus_modes(2);
    let m = rng.gen_range(1..=modes.len());
    let u0: Vec<f64> = (0..modes.len()).map(|_| rng.sample(StandardNormal)).collect();
    let forcing = (0..modes.len())
        .map(|_| {
            (0..3)
                .map(|_| TrigTerm {
                    a: rng.sample(StandardNormal),
                    w: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                    phi: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                })
                .collect()
        })
        .collect();
    let grid = TimeGrid::graded(1.0, RANDOM_INSTANCE_N, (2.0 - alpha) / alpha)?;
    Ok(GalerkinProblem::new(alpha, nu, modes, m, u0, forcing, grid)?.with_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = Config::parse(
            "alpha = 0.75\nnu = 2\nK = 1\nm = 3\nN = 16\ngrid = uniform\n\
             u0 = mode:1=0.5 mode:3=-1\nforcing = mode:2:trig:1,2,0; mode:2:trig:0.5,0,1\nmethod = closed_form\nseed = 7",
        )
        .unwrap();
        let (p, method) = GalerkinProblem::from_config(&cfg).unwrap();
        assert_eq!(method, SolveMethod::ClosedForm);
        assert_eq!(p.m(), 3);
        assert_eq!(p.u0_coeffs(), &[0.5, 0.0, -1.0]);
        assert_eq!(p.forcing_terms(1).len(), 2);
        assert_eq!(p.seed(), Some(7));
        let t = p.grid().nodes()[5];
        let want = (2.0 * t).sin() + 0.5 * 1f64.sin();
        assert!((p.f_coeffs().row(5)[1] - want).abs() < 1e-15);
    }

    #[test]
    fn config_errors_name_keys() {
        for (text, key) in [
            ("alpha = 0.75\nu0 = mode:13=1", "u0"),
            ("alpha = 0.75\nforcing = mode:1:trig:1,2", "forcing"),
            ("alpha = 0.75\nmethod = euler", "method"),
            ("alpha = 0.75\ngrid = weird", "grid"),
            ("nu = 1", "alpha"),
        ] {
            let e = GalerkinProblem::from_config(&Config::parse(text).unwrap()).unwrap_err();
            assert!(e.to_string().contains(key), "{text}: {e}");
        }
        let e = GalerkinProblem::from_config(&Config::parse("alpha = 0.4").unwrap()).unwrap_err();
        assert!(matches!(e, Error::Domain(_)));
    }

    #[test]
    fn zero_forcing_and_m1() {
        let g = TimeGrid::uniform(1.0, 8).unwrap();
        let p = GalerkinProblem::new(0.7, 1.0, torus_modes(2), 1, vec![1.0; 12], vec![vec![]; 12], g).unwrap();
        let sys = p.assemble();
        assert_eq!(sys.lambdas, vec![1.0]);
        assert!(sys.f_coeffs.values().iter().all(|&v| v == 0.0));
        assert!(GalerkinProblem::new(0.7, 1.0, torus_modes(1), 5, vec![0.0; 4], vec![vec![]; 4], p.grid().clone()).is_err());
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_instance(42).unwrap();
        assert_eq!(a, random_instance(42).unwrap());
        assert_ne!(a, random_instance(43).unwrap());
        assert!(a.alpha().value() >= 0.55 && a.alpha().value() < 0.95);
        assert!(a.nu() >= 0.1 && a.nu() <= 10.0);
    }
}
