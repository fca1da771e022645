//! Reduced invariant suite: one report per property, sized to run in seconds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fracstokes::fracode::{gronwall_check, l1_implicit_solve, picard_solve, FracIVP, SystemMatrix};
use fracstokes::fracops::riemann_liouville_integral;
use fracstokes::galerkin::{
    energy_report, random_instance, shift_scaling, solve, two_discretization_agreement, GalerkinProblem, ModeSet,
    SolveMethod,
};
use fracstokes::specfun::{mittag_leffler, tgamma, MlParams};
use fracstokes::weighted::{isometry_check, isometry_grid, strictness_witnesses, WeightedSpaceSpec};
use fracstokes::{CheckReport, FracOrder, Result, TimeGrid, Trajectory};

use crate::commands::{embedding_sweep, smooth_trajectory};

fn ml(a: f64, b: f64, z: f64) -> Result<f64> {
    mittag_leffler(MlParams::new(a, b)?, z)
}

pub fn run() -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for i in 0..=100 {
        let z = -5.0 + 0.1 * i as f64;
        worst = worst.max((ml(1.0, 1.0, z)? - z.exp()).abs() / z.exp());
    }
    out.push(CheckReport::new("ml_exponential", worst, 1e-12, 0.0, None));
    out.push(CheckReport::new("ml_cosh", (ml(2.0, 1.0, 1.0)? - 1f64.cosh()).abs(), 1e-12, 0.0, None));

    let g = TimeGrid::graded(1.0, 512, 3.0)?;
    let v = Trajectory::scalar_fn(&g, "cos", f64::cos)?;
    let o = |a| FracOrder::new(a);
    let lhs = riemann_liouville_integral(&riemann_liouville_integral(&v, o(0.4)?)?, o(0.3)?)?;
    let rhs = riemann_liouville_integral(&v, o(0.7)?)?;
    out.push(CheckReport::new("semigroup", lhs.sup_distance(&rhs)?, 1e-4, 0.0, None));

    let a = 0.37;
    let aff = Trajectory::scalar_fn(&g, "affine", |t| 1.5 - 2.0 * t)?;
    let j = riemann_liouville_integral(&aff, o(a)?)?;
    let mut worst = 0.0f64;
    for (t, r) in g.nodes().iter().zip(j.rows()).skip(1) {
        let (p0, p1) = (1.5 * t.powf(a) / tgamma(a + 1.0), -2.0 * t.powf(a + 1.0) / tgamma(a + 2.0));
        worst = worst.max((r[0] - p0 - p1).abs() / (p0.abs() + p1.abs()));
    }
    out.push(CheckReport::new("power_rule", worst, 1e-12, 0.0, None));

    let a = 0.6;
    let g = TimeGrid::graded(1.0, 512, (2.0 - a) / a)?;
    let exact = Trajectory::scalar_fn(&g, "E", |t| ml(a, 1.0, -t.powf(a)).unwrap_or(f64::NAN))?;
    let ivp = FracIVP::affine(o(a)?, SystemMatrix::Diagonal(vec![1.0]), |_, x| x[0] = 0.0, 0.0, vec![1.0], 1.0)?.with_radius(4.0)?;
    let (u, trace) = picard_solve(&ivp, &g, 1e-12, 200)?;
    out.push(CheckReport::new("decay_oracle_picard", u.sup_distance(&exact)?, 1e-3, 0.0, None));
    out.push(CheckReport::new("contraction_factor", trace.max_contraction(), 0.55, 0.0, None));
    let zero = Trajectory::constant(&g, &[0.0], "0")?;
    let w = l1_implicit_solve(o(a)?, &SystemMatrix::Diagonal(vec![1.0]), &zero, &[1.0])?;
    out.push(CheckReport::new("decay_oracle_l1", w.sup_distance(&exact)?, 1e-3, 0.0, None));

    out.extend(embedding_sweep(1, 20, 128, &[0, 1, 2])?);
    out.extend(strictness_witnesses(0.4, 0.8, 2.0, 3.0, 1.0)?);

    let spec = WeightedSpaceSpec::new(0.5, 2.0, 1.0)?;
    let ig = isometry_grid(1.0, 4096, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..3 {
        out.push(isometry_check(&smooth_trajectory(&mut rng, &ig, 2)?, spec, 1e-4)?);
    }

    for seed in 0..5 {
        out.extend(energy_report(&solve(&random_instance(seed)?, SolveMethod::L1)?)?);
    }

    let decay = GalerkinProblem::new(0.75, 1.0, ModeSet::from_eigenvalues(&[1.0])?, 1, vec![1.0], vec![vec![]], TimeGrid::uniform(1.0, 1024)?)?;
    let hs: Vec<f64> = [256.0, 128.0, 64.0, 32.0, 16.0].iter().map(|d| 1.0 / d).collect();
    out.push(shift_scaling(&solve(&decay, SolveMethod::ClosedForm)?, 2.0, &hs)?.report);
    out.push(two_discretization_agreement(&random_instance(1000)?)?);

    let ivp = FracIVP::affine(o(a)?, SystemMatrix::Diagonal(vec![-1.0]), |_, x| x[0] = 0.0, 0.0, vec![1.0], 1.0)?.with_radius(8.0)?;
    let (u, _) = picard_solve(&ivp, &g, 1e-12, 200)?;
    let [standard, _] = gronwall_check(&u, 1.0, 1.0, o(a)?, 1e-3)?;
    out.push(standard);
    Ok(out)
}
