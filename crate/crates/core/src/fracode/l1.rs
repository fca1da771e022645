use crate::error::{invalid, Error, Result};
use crate::fracops::l1_weights;
use crate::grid::{FracOrder, Trajectory};
use crate::sum::CompensatedSum;

/// Coefficient matrix of an affine system `cD^α u = f − A u`.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemMatrix {
    Diagonal(Vec<f64>),
    /// Row-major `n × n`.
    Dense { n: usize, data: Vec<f64> },
}

impl SystemMatrix {
    pub fn dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return invalid(format!("dense matrix needs {} entries, got {}", n * n, data.len()));
        }
        Ok(SystemMatrix::Dense { n, data })
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemMatrix::Diagonal(d) => d.len(),
            SystemMatrix::Dense { n, .. } => *n,
        }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self {
            SystemMatrix::Diagonal(d) => {
                for ((o, a), v) in out.iter_mut().zip(d).zip(x) {
                    *o = a * v;
                }
            }
            SystemMatrix::Dense { n, data } => {
                for (i, o) in out.iter_mut().enumerate().take(*n) {
                    *o = data[i * n..(i + 1) * n].iter().zip(x).map(|(a, v)| a * v).sum();
                }
            }
        }
    }

    /// An upper bound on the operator 2-norm (exact for diagonal matrices).
    pub fn norm_bound(&self) -> f64 {
        match self {
            SystemMatrix::Diagonal(d) => d.iter().fold(0.0, |m, v| m.max(v.abs())),
            SystemMatrix::Dense { data, .. } => data.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    /// Solves `(b I + A) x = rhs` in place of `rhs`.
    fn solve_shifted(&self, b: f64, rhs: &mut [f64], work: &mut Vec<f64>, node: usize) -> Result<()> {
        match self {
            SystemMatrix::Diagonal(d) => {
                for (r, a) in rhs.iter_mut().zip(d) {
                    let piv = b + a;
                    if !(piv.abs() > 1e-14 * b) {
                        return Err(Error::Singular { node });
                    }
                    *r /= piv;
                }
                Ok(())
            }
            SystemMatrix::Dense { n, data } => {
                let n = *n;
                work.clear();
                work.extend_from_slice(data);
                for i in 0..n {
                    work[i * n + i] += b;
                }
                // Gaussian elimination with partial pivoting
                for k in 0..n {
                    let piv_row = (k..n)
                        .max_by(|&i, &j| work[i * n + k].abs().total_cmp(&work[j * n + k].abs()))
                        .expect("non-empty range");
                    if !(work[piv_row * n + k].abs() > 1e-14 * b) {
                        return Err(Error::Singular { node });
                    }
                    if piv_row != k {
                        for c in 0..n {
                            work.swap(k * n + c, piv_row * n + c);
                        }
                        rhs.swap(k, piv_row);
                    }
                    let p = work[k * n + k];
                    for i in k + 1..n {
                        let f = work[i * n + k] / p;
                        if f != 0.0 {
                            for c in k..n {
                                work[i * n + c] -= f * work[k * n + c];
                            }
                            rhs[i] -= f * rhs[k];
                        }
                    }
                }
                for k in (0..n).rev() {
                    let s: f64 = (k + 1..n).map(|c| work[k * n + c] * rhs[c]).sum();
                    rhs[k] = (rhs[k] - s) / work[k * n + k];
                }
                Ok(())
            }
        }
    }
}

/// L1 time marching for `cD^α u = f(t) − A u`, `u(0) = u₀`:
/// `(b_{j−1,j} I + A) u_j = b_{j−1,j} u_{j−1} − Σ_{i<j−1} b_{i,j}(u_{i+1} − u_i) + f_j`.
pub fn l1_implicit_solve(alpha: FracOrder, a: &SystemMatrix, f: &Trajectory, u0: &[f64]) -> Result<Trajectory> {
    let alpha = alpha.require_proper()?.value();
    let m = u0.len();
    if a.dim() != m || f.dim() != m {
        return invalid(format!("dimensions disagree: A {}, f {}, u0 {m}", a.dim(), f.dim()));
    }
    let grid = f.grid();
    let n = grid.len();
    let mut u = vec![0.0; n * m];
    u[..m].copy_from_slice(u0);
    let mut b = Vec::new();
    let mut work = Vec::new();
    let mut rhs = vec![0.0; m];
    let mut acc = vec![CompensatedSum::new(); m];
    for j in 1..n {
        l1_weights(grid, alpha, j, &mut b);
        acc.iter_mut().for_each(|s| *s = CompensatedSum::new());
        for (i, bi) in b.iter().enumerate().take(j - 1) {
            for k in 0..m {
                acc[k].add(bi * (u[(i + 1) * m + k] - u[i * m + k]));
            }
        }
        let bj = b[j - 1];
        let fj = f.row(j);
        for k in 0..m {
            rhs[k] = bj * u[(j - 1) * m + k] - acc[k].value() + fj[k];
        }
        a.solve_shifted(bj, &mut rhs, &mut work, j)?;
        u[j * m..(j + 1) * m].copy_from_slice(&rhs);
    }
    Trajectory::new(grid.clone(), m, u, "l1")
}
