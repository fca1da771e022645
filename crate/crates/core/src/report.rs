//! Pass/fail records for checked inequalities.

use std::fmt;
use std::io::Write;

use crate::grid::fmt_f64;

/// Outcome of checking one inequality `lhs ≤ rhs + tol`.
///
/// When the inequality is checked at many nodes, `lhs` and `rhs` are taken
/// at the node with the smallest margin and `worst_location` records its time.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
    pub worst_location: Option<f64>,
    pub tol: f64,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64, worst_location: Option<f64>) -> Self {
        let margin = rhs - lhs;
        CheckReport {
            name: name.into(),
            lhs,
            rhs,
            margin,
            passed: lhs <= rhs + tol,
            worst_location,
            tol,
        }
    }

    /// A check whose content is vacuous (e.g. a degenerate fit); always passes.
    pub fn degenerate(name: impl Into<String>) -> Self {
        CheckReport::new(name, 0.0, 0.0, 0.0, None)
    }

    /// Pointwise check over `(t, lhs, rhs)` triples with per-node tolerance
    /// `tol_rel·max(|lhs|,|rhs|) + tol_abs`. Keeps the node with the worst
    /// slack `rhs + tol − lhs`.
    pub fn pointwise<I>(name: impl Into<String>, items: I, tol_rel: f64, tol_abs: f64) -> Self
    where
        I: IntoIterator<Item = (f64, f64, f64)>,
    {
        let mut worst: Option<(f64, f64, f64, f64, f64)> = None;
        for (t, l, r) in items {
            let tol = tol_rel * l.abs().max(r.abs()) + tol_abs;
            let slack = if l.is_nan() || r.is_nan() { f64::NEG_INFINITY } else { r + tol - l };
            if worst.is_none_or(|w| slack < w.0) {
                worst = Some((slack, t, l, r, tol));
            }
        }
        match worst {
            Some((_, t, l, r, tol)) => {
                let mut rep = CheckReport::new(name, l, r, tol, Some(t));
                if l.is_nan() || r.is_nan() {
                    rep.passed = false;
                }
                rep
            }
            None => CheckReport::degenerate(name),
        }
    }

    pub const CSV_HEADER: &'static str = "name,lhs,rhs,margin,passed,worst_location";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.name,
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            fmt_f64(self.margin),
            self.passed,
            self.worst_location.map(fmt_f64).unwrap_or_default()
        )
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: lhs={:.6e} rhs={:.6e} margin={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            self.rhs,
            self.margin
        )?;
        if let Some(t) = self.worst_location {
            write!(f, " at t={t:.6e}")?;
        }
        Ok(())
    }
}

pub fn write_reports_csv<W: Write>(mut w: W, reports: &[CheckReport]) -> std::io::Result<()> {
    writeln!(w, "{}", CheckReport::CSV_HEADER)?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_and_fail() {
        assert!(CheckReport::new("a", 1.0, 1.0, 0.0, None).passed);
        assert!(CheckReport::new("a", 1.0 + 1e-12, 1.0, 1e-11, None).passed);
        let r = CheckReport::new("b", 2.0, 1.0, 1e-9, Some(0.5));
        assert!(!r.passed);
        assert_eq!(r.margin, -1.0);
    }

    #[test]
    fn pointwise_picks_worst_node() {
        let r = CheckReport::pointwise("p", vec![(0.1, 0.0, 1.0), (0.2, 0.9, 1.0), (0.3, 0.5, 1.0)], 0.0, 0.0);
        assert_eq!(r.worst_location, Some(0.2));
        assert!(r.passed);
        let r = CheckReport::pointwise("p", vec![(0.1, f64::NAN, 1.0)], 0.0, 0.0);
        assert!(!r.passed);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &[CheckReport::new("x", 0.5, 1.0, 0.0, None)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(CheckReport::CSV_HEADER));
        let row: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 6);
        assert_eq!(row[4], "true");
        assert_eq!(row[5], "");
    }
}
