use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fracstokes::config::{parse_grid, Config};
use fracstokes::fracode::{duhamel_closed_form, l1_implicit_solve, picard_solve, shift_continuity_check, FracIVP, SystemMatrix};
use fracstokes::fracops::{caputo_derivative, riemann_liouville_integral};
use fracstokes::galerkin::{
    energy_report, random_instance, shift_scaling, solve, weak_residual, GalerkinProblem, SolveMethod,
};
use fracstokes::grid::fmt_f64;
use fracstokes::specfun::{mittag_leffler, tgamma, MlParams};
use fracstokes::weighted::{check_embedding, strictness_witnesses, Embedding};
use fracstokes::{CheckReport, FracOrder, TimeGrid, Trajectory};

use crate::{run_err, selftest, usage, CliError, CliResult, Output, COMMON_KEYS};

/// Parses `key`, storing `default` in the config when absent so the manifest
/// records the resolved value.
fn resolve<T: FromStr + ToString>(cfg: &mut Config, key: &str, default: T) -> CliResult<T> {
    if !cfg.contains(key) {
        cfg.set(key, &default.to_string());
    }
    usage(cfg.required(key))
}

fn allow(cfg: &Config, keys: &[&str]) -> CliResult<()> {
    let all: Vec<&str> = keys.iter().chain(COMMON_KEYS).copied().collect();
    usage(cfg.check_keys(&all))
}

fn csv<F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>>(f: F) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn dispatch(sub: &str, cfg: &mut Config) -> CliResult<Output> {
    match sub {
        "ml" => ml(cfg),
        "fracint" => operator(cfg, false),
        "fracdiff" => operator(cfg, true),
        "solve-ode" => solve_ode(cfg),
        "solve-stokes" => solve_stokes(cfg),
        "verify-embeddings" => verify_embeddings(cfg),
        "verify-energy" => verify_energy(cfg),
        "shift-scaling" => shift(cfg),
        "convergence" => convergence(cfg),
        "selftest" => {
            allow(cfg, &[])?;
            Ok(Output { reports: run_err(selftest::run())?, ..Output::default() })
        }
        other => Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    }
}

fn ml(cfg: &mut Config) -> CliResult<Output> {
    allow(cfg, &["alpha", "beta", "z"])?;
    let alpha: f64 = usage(cfg.required("alpha"))?;
    let beta = resolve(cfg, "beta", 1.0)?;
    let z: f64 = usage(cfg.required("z"))?;
    let p = usage(MlParams::new(alpha, beta))?;
    let v = run_err(mittag_leffler(p, z))?;
    Ok(Output { lines: vec![format!("{v}")], ..Output::default() })
}

fn test_function(spec: &str) -> CliResult<Box<dyn Fn(f64) -> f64>> {
    let bad = || CliError::Usage(format!("key 'function': expected cos, sin, exp, one, power:<b> or affine:<c0>,<c1>, got '{spec}'"));
    Ok(match spec {
        "cos" => Box::new(f64::cos),
        "sin" => Box::new(f64::sin),
        "exp" => Box::new(f64::exp),
        "one" => Box::new(|_| 1.0),
        s => {
            if let Some(b) = s.strip_prefix("power:") {
                let b: f64 = b.parse().map_err(|_| bad())?;
                if b < 0.0 {
                    return Err(bad());
                }
                Box::new(move |t: f64| t.powf(b))
            } else if let Some(c) = s.strip_prefix("affine:") {
                let (a, b) = c.split_once(',').ok_or_else(bad)?;
                let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                Box::new(move |t: f64| a + b * t)
            } else {
                return Err(bad());
            }
        }
    })
}

/// `fracint` / `fracdiff`: J^α or the L1 Caputo derivative of a sampled function.
fn operator(cfg: &mut Config, caputo: bool) -> CliResult<Output> {
    allow(cfg, &["alpha", "T", "N", "grid", "function", "input"])?;
    let alpha: f64 = usage(cfg.required("alpha"))?;
    let mut order = usage(FracOrder::new(alpha))?;
    if caputo {
        order = usage(order.require_proper())?;
    }
    let v = if let Some(path) = cfg.get("input") {
        if cfg.contains("function") {
            return Err(CliError::Usage("keys 'input' and 'function' are mutually exclusive".into()));
        }
        let file = std::fs::File::open(path).map_err(|e| CliError::Usage(format!("key 'input': cannot open '{path}': {e}")))?;
        usage(Trajectory::read_csv(std::io::BufReader::new(file), "input"))?
    } else {
        let t_end = resolve(cfg, "T", 1.0)?;
        let n = resolve(cfg, "N", 256usize)?;
        let grid_spec = resolve(cfg, "grid", "uniform".to_string())?;
        let grid = usage(parse_grid(&grid_spec, t_end, n))?;
        let f = test_function(&resolve(cfg, "function", "cos".to_string())?)?;
        usage(Trajectory::scalar_fn(&grid, "v", f))?
    };
    let (out, name) = if caputo {
        (run_err(caputo_derivative(&v, order))?, "fracdiff.csv")
    } else {
        (run_err(riemann_liouville_integral(&v, order))?, "fracint.csv")
    };
    let last = out.row(out.grid().len() - 1).iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
    Ok(Output {
        files: vec![(name.to_string(), csv(|b| out.write_csv(b))?)],
        lines: vec![format!("value at t={}: {last}", fmt_f64(out.grid().horizon()))],
        ..Output::default()
    })
}

fn oracle(alpha: f64, lambda: f64, forcing: f64, u0: f64, t: f64) -> fracstokes::Result<f64> {
    if lambda == 0.0 {
        return Ok(u0 + forcing * t.powf(alpha) / tgamma(alpha + 1.0));
    }
    let e = mittag_leffler(MlParams::one(alpha)?, -lambda * t.powf(alpha))?;
    Ok(u0 * e + forcing / lambda * (1.0 - e))
}

/// Scalar `cD^α u = −λu + f`, with the Mittag-Leffler closed form as oracle.
fn solve_ode(cfg: &mut Config) -> CliResult<Output> {
    allow(
        cfg,
        &["alpha", "T", "N", "grid", "method", "lambda", "forcing", "u0", "radius", "tol", "max_iter", "oracle_tol"],
    )?;
    let alpha: f64 = usage(cfg.required("alpha"))?;
    let order = usage(FracOrder::new(alpha).and_then(|o| o.require_proper()))?;
    let t_end = resolve(cfg, "T", 1.0)?;
    let n = resolve(cfg, "N", 1024usize)?;
    let grid = usage(parse_grid(&resolve(cfg, "grid", format!("graded:{}", (2.0 - alpha) / alpha))?, t_end, n))?;
    let method = resolve(cfg, "method", "picard".to_string())?;
    let lambda: f64 = resolve(cfg, "lambda", 1.0)?;
    let forcing: f64 = resolve(cfg, "forcing", 0.0)?;
    let u0: f64 = resolve(cfg, "u0", 1.0)?;
    let oracle_tol = resolve(cfg, "oracle_tol", 1e-3)?;
    if lambda < 0.0 {
        return Err(CliError::Usage(format!("key 'lambda': must be non-negative, got {lambda}")));
    }
    let a = SystemMatrix::Diagonal(vec![lambda]);
    let mut out = Output::default();
    let u = match method.as_str() {
        "picard" => {
            let radius = resolve(cfg, "radius", 4.0 * (1.0 + u0.abs() + forcing.abs()))?;
            let tol = resolve(cfg, "tol", 1e-10)?;
            let max_iter = resolve(cfg, "max_iter", 200usize)?;
            let ivp = usage(
                FracIVP::affine(order, a, move |_, o| o[0] = forcing, forcing.abs(), vec![u0], t_end).and_then(|i| i.with_radius(radius)),
            )?;
            let (u, trace) = run_err(picard_solve(&ivp, &grid, tol, max_iter))?;
            let mut seg = String::from("start,end,step_bound,iterations,contraction_factor\n");
            for s in &trace.segments {
                seg.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f64(s.start),
                    fmt_f64(s.end),
                    fmt_f64(s.step_bound),
                    s.iterations,
                    s.contraction_factor.map(fmt_f64).unwrap_or_default()
                ));
            }
            out.files.push(("segments.csv".into(), seg.into_bytes()));
            out.reports.push(CheckReport::new("contraction_factor", trace.max_contraction(), 0.55, 0.0, None));
            out.reports.push(run_err(shift_continuity_check(&ivp, &u, 1e-6))?);
            u
        }
        "l1" => {
            let f = usage(Trajectory::constant(&grid, &[forcing], "f"))?;
            run_err(l1_implicit_solve(order, &a, &f, &[u0]))?
        }
        "closed_form" => {
            let f = usage(Trajectory::constant(&grid, &[forcing], "f"))?;
            run_err(duhamel_closed_form(lambda, 1.0, &f, u0, order))?
        }
        other => return Err(CliError::Usage(format!("key 'method': expected picard, l1 or closed_form, got '{other}'"))),
    };
    let mut worst = (0.0f64, 0.0);
    for (t, r) in grid.nodes().iter().zip(u.rows()) {
        let d = (r[0] - run_err(oracle(alpha, lambda, forcing, u0, *t))?).abs();
        if d > worst.0 {
            worst = (d, *t);
        }
    }
    out.reports.push(CheckReport::new("mittag_leffler_oracle", worst.0, oracle_tol, 0.0, Some(worst.1)));
    out.files.push(("solution.csv".into(), csv(|b| u.write_csv(b))?));
    Ok(out)
}

const GALERKIN_KEYS: &[&str] = &["alpha", "nu", "K", "lambdas", "m", "T", "N", "grid", "u0", "forcing", "method"];

/// Fills the defaults of the problem keys so the manifest shows them.
fn galerkin_problem(cfg: &mut Config, grid_default: Option<&str>, method_default: &str) -> CliResult<(GalerkinProblem, SolveMethod)> {
    let alpha: f64 = usage(cfg.required("alpha"))?;
    resolve(cfg, "nu", 1.0)?;
    if !cfg.contains("lambdas") {
        resolve(cfg, "K", 2usize)?;
    }
    resolve(cfg, "T", 1.0)?;
    resolve(cfg, "N", 1024usize)?;
    let g = grid_default.map(str::to_string).unwrap_or_else(|| format!("graded:{}", (2.0 - alpha) / alpha));
    resolve(cfg, "grid", g)?;
    resolve(cfg, "method", method_default.to_string())?;
    let (p, m) = usage(GalerkinProblem::from_config(cfg))?;
    resolve(cfg, "m", p.m())?;
    Ok((p, m))
}

fn solve_stokes(cfg: &mut Config) -> CliResult<Output> {
    allow(cfg, GALERKIN_KEYS)?;
    let (p, method) = galerkin_problem(cfg, None, "l1")?;
    let sol = run_err(solve(&p, method))?;
    let res = run_err(weak_residual(&sol))?;
    Ok(Output {
        files: vec![("solution.csv".into(), csv(|b| sol.write_csv(b))?)],
        lines: vec![format!("solved {} modes with {method} on {} nodes; weak residual {}", p.m(), p.grid().len(), fmt_f64(res))],
        ..Output::default()
    })
}

fn verify_energy(cfg: &mut Config) -> CliResult<Output> {
    let mut keys = GALERKIN_KEYS.to_vec();
    keys.push("instances");
    allow(cfg, &keys)?;
    let mut reports = Vec::new();
    if cfg.contains("instances") {
        if let Some(k) = GALERKIN_KEYS.iter().find(|k| **k != "method" && cfg.contains(k)) {
            return Err(CliError::Usage(format!("key '{k}' cannot be combined with 'instances'")));
        }
        let count: u64 = usage(cfg.required("instances"))?;
        let seed = resolve(cfg, "seed", 0u64)?;
        let method: SolveMethod = usage(resolve(cfg, "method", "l1".to_string())?.parse())?;
        for s in seed..seed + count {
            let p = run_err(random_instance(s))?;
            reports.extend(run_err(solve(&p, method).and_then(|sol| energy_report(&sol)))?);
        }
    } else {
        let (p, method) = galerkin_problem(cfg, None, "l1")?;
        reports = run_err(solve(&p, method).and_then(|sol| energy_report(&sol)))?;
    }
    Ok(Output { reports, ..Output::default() })
}

fn shift(cfg: &mut Config) -> CliResult<Output> {
    let mut keys = GALERKIN_KEYS.to_vec();
    keys.extend(["r", "h_list"]);
    allow(cfg, &keys)?;
    let r = resolve(cfg, "r", 2.0)?;
    let (p, method) = galerkin_problem(cfg, Some("uniform"), "closed_form")?;
    let t_end = p.grid().horizon();
    let hs = match usage(cfg.list_f64("h_list"))? {
        Some(h) => h,
        None => {
            let h: Vec<f64> = [256.0, 128.0, 64.0, 32.0, 16.0].iter().map(|d| t_end / d).collect();
            cfg.set("h_list", &h.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            h
        }
    };
    let sol = run_err(solve(&p, method))?;
    let fit = usage(shift_scaling(&sol, r, &hs))?;
    let mut table = String::from("h,shift_norm\n");
    for (h, v) in &fit.norms {
        table.push_str(&format!("{},{}\n", fmt_f64(*h), fmt_f64(*v)));
    }
    Ok(Output {
        files: vec![("shift.csv".into(), table.into_bytes())],
        lines: vec![format!(
            "fitted slope {} against alpha + 1/r - 1 = {}",
            fit.slope.map(fmt_f64).unwrap_or_else(|| "undefined".into()),
            fmt_f64(fit.bound)
        )],
        reports: vec![fit.report],
    })
}

pub(crate) fn smooth_trajectory(rng: &mut ChaCha8Rng, g: &TimeGrid, dim: usize) -> fracstokes::Result<Trajectory> {
    let coef: Vec<[f64; 3]> = (0..dim * 3)
        .map(|_| [rng.sample(StandardNormal), rng.gen_range(0.0..8.0), rng.gen_range(0.0..6.3)])
        .collect();
    Trajectory::from_fn(g, dim, "v", |t, out| {
        for (k, o) in out.iter_mut().enumerate() {
            *o = coef[k * 3..k * 3 + 3].iter().map(|[a, w, p]| a * (w * t + p).sin()).sum();
        }
    })
}

pub(crate) fn random_embedding(rng: &mut ChaCha8Rng, kind: usize) -> Embedding {
    let t_end: f64 = rng.gen_range(0.5..3.0);
    match kind {
        0 => {
            let alpha = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..0.95) };
            let beta = rng.gen_range(alpha + 0.01..=1.0);
            Embedding::AlphaToBeta { alpha, beta, p: rng.gen_range(1.0..4.0), t_end }
        }
        1 => {
            let p = rng.gen_range(1.0..4.0);
            Embedding::PToQ { alpha: rng.gen_range(0.05..=1.0), p, q: p + rng.gen_range(0.0..4.0), t_end }
        }
        _ => {
            let alpha: f64 = rng.gen_range(0.1..=1.0);
            let p = rng.gen_range(1.0..3.0);
            Embedding::LqIntoLpAlpha { alpha, p, q: p / alpha + rng.gen_range(0.01..4.0), t_end }
        }
    }
}

/// Worst draw per embedding kind, then the catalog witnesses.
pub(crate) fn embedding_sweep(seed: u64, draws: usize, n: usize, kinds: &[usize]) -> fracstokes::Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &kind in kinds {
        let mut worst: Option<CheckReport> = None;
        for _ in 0..draws {
            let e = random_embedding(&mut rng, kind);
            let g = TimeGrid::uniform(e.t_end(), n)?;
            let v = smooth_trajectory(&mut rng, &g, 2)?;
            let r = check_embedding(&v, e)?;
            let rel = |r: &CheckReport| if r.passed { r.margin / r.rhs.abs().max(f64::MIN_POSITIVE) } else { f64::NEG_INFINITY };
            if worst.as_ref().is_none_or(|w| rel(&r) < rel(w)) {
                worst = Some(r);
            }
        }
        if let Some(mut w) = worst {
            w.name = format!("{} (worst of {draws})", w.name);
            out.push(w);
        }
    }
    Ok(out)
}

fn verify_embeddings(cfg: &mut Config) -> CliResult<Output> {
    allow(cfg, &["kind", "draws", "N"])?;
    let kind = resolve(cfg, "kind", "all".to_string())?;
    let kinds: Vec<usize> = match kind.as_str() {
        "all" => vec![0, 1, 2],
        "alpha_to_beta" => vec![0],
        "p_to_q" => vec![1],
        "Lq_into_Lpalpha" => vec![2],
        other => {
            return Err(CliError::Usage(format!(
                "key 'kind': expected all, alpha_to_beta, p_to_q or Lq_into_Lpalpha, got '{other}'"
            )))
        }
    };
    let draws = resolve(cfg, "draws", 100usize)?;
    let n = resolve(cfg, "N", 256usize)?;
    let seed = resolve(cfg, "seed", 0u64)?;
    let mut reports = run_err(embedding_sweep(seed, draws, n, &kinds))?;
    reports.extend(run_err(strictness_witnesses(0.4, 0.8, 2.0, 3.0, 1.0))?);
    Ok(Output { reports, ..Output::default() })
}

/// Sup error against the Mittag-Leffler decay oracle under grid refinement.
fn convergence(cfg: &mut Config) -> CliResult<Output> {
    allow(cfg, &["alpha", "method", "levels", "N0", "r", "lambda", "min_order"])?;
    let alpha = resolve(cfg, "alpha", 0.6)?;
    let order = usage(FracOrder::new(alpha).and_then(|o| o.require_proper()))?;
    let method = resolve(cfg, "method", "l1".to_string())?;
    let levels = resolve(cfg, "levels", 5usize)?;
    let n0 = resolve(cfg, "N0", 128usize)?;
    let r = resolve(cfg, "r", (2.0 - alpha) / alpha)?;
    let lambda = resolve(cfg, "lambda", 1.0)?;
    let min_order = resolve(cfg, "min_order", 1.2)?;
    if levels < 2 {
        return Err(CliError::Usage("key 'levels': need at least 2".into()));
    }
    if !matches!(method.as_str(), "l1" | "picard" | "closed_form") {
        return Err(CliError::Usage(format!("key 'method': expected l1, picard or closed_form, got '{method}'")));
    }
    let mut rows = Vec::new();
    for k in 0..levels {
        let n = n0 << k;
        let grid = usage(TimeGrid::graded(1.0, n, r))?;
        let u = run_err((|| {
            let a = SystemMatrix::Diagonal(vec![lambda]);
            let zero = Trajectory::constant(&grid, &[0.0], "0")?;
            match method.as_str() {
                "l1" => l1_implicit_solve(order, &a, &zero, &[1.0]),
                "closed_form" => duhamel_closed_form(lambda, 1.0, &zero, 1.0, order),
                _ => {
                    let ivp = FracIVP::affine(order, a, |_, o| o[0] = 0.0, 0.0, vec![1.0], 1.0)?.with_radius(4.0)?;
                    Ok(picard_solve(&ivp, &grid, 1e-12, 200)?.0)
                }
            }
        })())?;
        let mut err = 0.0f64;
        for (t, row) in grid.nodes().iter().zip(u.rows()) {
            err = err.max((row[0] - run_err(oracle(alpha, lambda, 0.0, 1.0, *t))?).abs());
        }
        rows.push((n, err));
    }
    let mut table = String::from("N,sup_error,order\n");
    let mut worst = f64::INFINITY;
    for (i, (n, e)) in rows.iter().enumerate() {
        let ord = if i == 0 { f64::NAN } else { (rows[i - 1].1 / e).log2() };
        if i > 0 {
            worst = worst.min(ord);
        }
        table.push_str(&format!("{n},{},{}\n", fmt_f64(*e), fmt_f64(ord)));
    }
    Ok(Output {
        files: vec![("convergence.csv".into(), table.into_bytes())],
        reports: vec![CheckReport::new("convergence_order", min_order, worst, 0.0, None)],
        ..Output::default()
    })
}
