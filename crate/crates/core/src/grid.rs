//! Time grids, sampled vector trajectories and fractional orders.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{domain, invalid, Error, Result};

/// How the nodes of a [`TimeGrid`] were generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Uniform,
    /// `t_j = T (j/N)^r`, clustered at 0.
    Graded(f64),
    /// `t_j = S (1 − (1 − j/(N+1))^r)`, clustered toward `S` without reaching it.
    GradedToward { r: f64, target: f64 },
    Custom,
}

/// Strictly increasing time nodes `0 = t_0 < t_1 < … < t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    kind: GridKind,
}

impl TimeGrid {
    pub fn uniform(t_end: f64, n: usize) -> Result<Self> {
        check_horizon(t_end, n)?;
        let nodes = (0..=n)
            .map(|j| if j == n { t_end } else { t_end * j as f64 / n as f64 })
            .collect();
        Ok(Self {
            nodes,
            kind: GridKind::Uniform,
        })
    }

    pub fn graded(t_end: f64, n: usize, r: f64) -> Result<Self> {
        check_horizon(t_end, n)?;
        if !(r >= 1.0) || !r.is_finite() {
            return domain(format!("grading exponent must be >= 1, got {r}"));
        }
        let nodes = (0..=n)
            .map(|j| if j == n { t_end } else { t_end * (j as f64 / n as f64).powf(r) })
            .collect();
        Self::checked(nodes, GridKind::Graded(r))
    }

    /// Grid on `[0, t_N]` with `t_N < target`, clustered toward `target`.
    pub fn graded_toward(target: f64, n: usize, r: f64) -> Result<Self> {
        check_horizon(target, n)?;
        if !(r >= 1.0) || !r.is_finite() {
            return domain(format!("grading exponent must be >= 1, got {r}"));
        }
        let m = (n + 1) as f64;
        let nodes = (0..=n)
            .map(|j| target * (1.0 - (1.0 - j as f64 / m).powf(r)))
            .collect();
        Self::checked(nodes, GridKind::GradedToward { r, target })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::checked(nodes, GridKind::Custom)
    }

    fn checked(nodes: Vec<f64>, kind: GridKind) -> Result<Self> {
        if nodes.len() < 3 {
            return invalid(format!("a time grid needs N >= 2 panels, got {} nodes", nodes.len()));
        }
        if nodes[0] != 0.0 {
            return invalid(format!("time grids start at 0, got {}", nodes[0]));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return invalid(format!("time grid nodes must be strictly increasing ({} then {})", w[0], w[1]));
        }
        Ok(Self { nodes, kind })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Number of nodes, N + 1.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of panels N.
    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("grid has nodes")
    }

    /// Width of panel `i`, `t_{i+1} − t_i`.
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// The constant step of a uniform grid.
    pub fn uniform_step(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some(self.horizon() / self.panels() as f64),
            _ => None,
        }
    }

    /// Every other node of a grid with an even panel count; the kind is kept
    /// because the retained nodes coincide with the regenerated coarse grid.
    pub fn coarsen(&self) -> Result<TimeGrid> {
        let n = self.panels();
        if !n.is_multiple_of(2) || n < 4 {
            return invalid(format!("cannot coarsen a grid with {n} panels"));
        }
        let nodes = self.nodes.iter().step_by(2).copied().collect();
        Self::checked(nodes, self.kind)
    }

    /// Index `i` of the panel `[t_i, t_{i+1}]` containing `t` (clamped).
    pub fn locate(&self, t: f64) -> usize {
        let n = self.panels();
        match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(j) => j.min(n - 1),
            Err(j) => j.saturating_sub(1).min(n - 1),
        }
    }
}

fn check_horizon(t_end: f64, n: usize) -> Result<()> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return domain(format!("time horizon must be positive, got {t_end}"));
    }
    if n < 2 {
        return invalid(format!("a time grid needs N >= 2 panels, got {n}"));
    }
    Ok(())
}

/// Fractional order α ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("fractional order must lie in (0, 1], got {alpha}"));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Asserts α ∈ (0, 1).
    pub fn require_proper(self) -> Result<Self> {
        if self.0 >= 1.0 {
            return domain(format!("order must lie in (0, 1), got {}", self.0));
        }
        Ok(self)
    }

    /// Asserts α ∈ (1/2, 1).
    pub fn require_above_half(self) -> Result<Self> {
        if !(self.0 > 0.5 && self.0 < 1.0) {
            return domain(format!("order must lie in (1/2, 1), got {}", self.0));
        }
        Ok(self)
    }
}

/// Vector-valued samples `v(t_j) ∈ R^m` on a [`TimeGrid`].
///
/// Values are stored row-major, one row of `dim` entries per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
    label: String,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let t = Self::with_sentinels(grid, dim, values, label)?;
        if let Some(pos) = t.values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("trajectory value at node {} is not finite", pos / dim));
        }
        Ok(t)
    }

    /// Like [`Trajectory::new`] but admits NaN sentinels (used for the
    /// undefined node 0 of a Caputo derivative).
    pub(crate) fn with_sentinels(grid: TimeGrid, dim: usize, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return invalid("trajectory dimension must be >= 1");
        }
        if values.len() != dim * grid.len() {
            return invalid(format!(
                "trajectory has {} values, expected {} nodes x {} components",
                values.len(),
                grid.len(),
                dim
            ));
        }
        Ok(Self {
            grid,
            dim,
            values,
            label: label.into(),
        })
    }

    pub fn from_fn(grid: &TimeGrid, dim: usize, label: impl Into<String>, mut f: impl FnMut(f64, &mut [f64])) -> Result<Self> {
        let mut values = vec![0.0; dim * grid.len()];
        for (t, row) in grid.nodes().iter().zip(values.chunks_mut(dim)) {
            f(*t, row);
        }
        Self::new(grid.clone(), dim, values, label)
    }

    pub fn scalar(grid: &TimeGrid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        Self::new(grid.clone(), 1, values, label)
    }

    pub fn scalar_fn(grid: &TimeGrid, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, 1, label, |t, out| out[0] = f(t))
    }

    pub fn constant(grid: &TimeGrid, value: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::from_fn(grid, value.len(), label, |_, out| out.copy_from_slice(value))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Euclidean norm of each row.
    pub fn node_norms(&self) -> Vec<f64> {
        self.rows().map(euclid).collect()
    }

    /// max_j ‖v(t_j)‖, skipping non-finite sentinel rows.
    pub fn sup_norm(&self) -> f64 {
        self.node_norms().into_iter().filter(|x| x.is_finite()).fold(0.0, f64::max)
    }

    /// max_j ‖v(t_j) − w(t_j)‖ on a shared grid, skipping sentinel rows.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .rows()
            .zip(other.rows())
            .map(|(a, b)| euclid_diff(a, b))
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.dim != other.dim || self.grid.nodes() != other.grid.nodes() {
            return invalid("trajectories live on different grids or dimensions");
        }
        Ok(())
    }

    /// Piecewise-linear interpolation at time `t` (clamped to the grid).
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.interpolate_into(t, &mut out);
        out
    }

    pub fn interpolate_into(&self, t: f64, out: &mut [f64]) {
        let nodes = self.grid.nodes();
        let i = self.grid.locate(t);
        let (a, b) = (nodes[i], nodes[i + 1]);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        let (ra, rb) = (self.row(i), self.row(i + 1));
        for k in 0..self.dim {
            out[k] = if w == 0.0 {
                ra[k]
            } else if w == 1.0 {
                rb[k]
            } else {
                ra[k] + w * (rb[k] - ra[k])
            };
        }
    }

    /// Resamples onto another grid by piecewise-linear interpolation.
    pub fn resample(&self, grid: &TimeGrid) -> Result<Trajectory> {
        let dim = self.dim;
        Trajectory::from_fn(grid, dim, self.label.clone(), |t, out| self.interpolate_into(t, out))
    }

    /// Writes `t,v0,...,v{m-1}` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = String::from("t");
        for k in 0..self.dim {
            let _ = write!(header, ",v{k}");
        }
        writeln!(w, "{header}")?;
        for (t, row) in self.grid.nodes().iter().zip(self.rows()) {
            let mut line = fmt_f64(*t);
            for v in row {
                line.push(',');
                line.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Reads the CSV layout produced by [`Trajectory::write_csv`].
    pub fn read_csv<R: BufRead>(r: R, label: impl Into<String>) -> Result<Trajectory> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("empty trajectory CSV".into()))?
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return invalid(format!("unexpected trajectory CSV header `{header}`"));
        }
        let dim = cols.len() - 1;
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Invalid(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 1 {
                return invalid(format!("row {} has {} fields, expected {}", lineno + 2, fields.len(), dim + 1));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Invalid(format!("row {}: cannot parse `{s}`", lineno + 2)))
            };
            nodes.push(parse(fields[0])?);
            for f in &fields[1..] {
                values.push(parse(f)?);
            }
        }
        let grid = TimeGrid::from_nodes(nodes)?;
        Trajectory::with_sentinels(grid, dim, values, label)
    }
}

/// 17 significant digits, `NaN` for sentinels.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn euclid_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarsen_matches_regenerated_grid() {
        let fine = TimeGrid::graded(1.0, 64, 7.0 / 3.0).unwrap();
        assert_eq!(fine.coarsen().unwrap(), TimeGrid::graded(1.0, 32, 7.0 / 3.0).unwrap());
        let fine = TimeGrid::uniform(2.0, 10).unwrap();
        assert_eq!(fine.coarsen().unwrap(), TimeGrid::uniform(2.0, 5).unwrap());
        assert!(TimeGrid::uniform(1.0, 5).unwrap().coarsen().is_err());
    }

    #[test]
    fn graded_nodes_follow_power_law() {
        let g = TimeGrid::graded(2.0, 8, 2.5).unwrap();
        for (j, t) in g.nodes().iter().enumerate() {
            assert_eq!(*t, if j == 8 { 2.0 } else { 2.0 * (j as f64 / 8.0).powf(2.5) });
        }
        assert_eq!(g.kind(), GridKind::Graded(2.5));
    }

    #[test]
    fn graded_toward_stays_below_target() {
        let g = TimeGrid::graded_toward(1.0, 100, 6.0).unwrap();
        assert!(g.horizon() < 1.0);
        assert!(1.0 - g.horizon() < 1e-12);
        assert!(g.step(0) > g.step(99));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        assert!(TimeGrid::uniform(0.0, 4).is_err());
        assert!(TimeGrid::graded(1.0, 4, 0.5).is_err());
        assert!(TimeGrid::from_nodes(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::from_nodes(vec![0.1, 0.5, 1.0]).is_err());
    }

    #[test]
    fn trajectory_validation() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(Trajectory::new(g.clone(), 2, vec![0.0; 9], "x").is_err());
        let mut v = vec![0.0; 10];
        v[3] = f64::INFINITY;
        assert!(Trajectory::new(g.clone(), 2, v, "x").is_err());
        assert!(Trajectory::new(g, 0, vec![], "x").is_err());
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_linear_between() {
        let g = TimeGrid::graded(1.0, 10, 2.0).unwrap();
        let tr = Trajectory::scalar_fn(&g, "lin", |t| 3.0 * t - 1.0).unwrap();
        for &t in g.nodes() {
            assert_eq!(tr.interpolate(t)[0], 3.0 * t - 1.0);
        }
        assert!((tr.interpolate(0.333)[0] - (3.0 * 0.333 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = TimeGrid::graded(1.0, 7, 1.7).unwrap();
        let tr = Trajectory::from_fn(&g, 2, "s", |t, o| {
            o[0] = (t * 3.1).sin() / 7.0;
            o[1] = (1.0 + t).ln();
        })
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,v0,v1\n"));
        let back = Trajectory::read_csv(&buf[..], "s").unwrap();
        assert_eq!(back.values(), tr.values());
        assert_eq!(back.grid().nodes(), tr.grid().nodes());
    }
}
