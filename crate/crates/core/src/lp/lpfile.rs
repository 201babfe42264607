use std::fmt::Write;

use super::{LpProblem, Relation};

fn term(out: &mut String, first: bool, coeff: f64, var: usize) {
    let sign = if coeff < 0.0 { " -" } else if first { "" } else { " +" };
    let _ = write!(out, "{sign} {} x{var}", coeff.abs());
}

/// Renders `problem` in the CPLEX LP text layout, with variables named
/// `x0, x1, ...` and the given indices declared binary.
pub fn write_lp_format(problem: &LpProblem, binaries: &[usize]) -> String {
    let mut out = String::from("Maximize\n obj:");
    let mut first = true;
    for (j, &c) in problem.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, j);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (r, row) in problem.rows.iter().enumerate() {
        let _ = write!(out, " c{r}:");
        let mut first = true;
        for &(j, a) in &row.coeffs {
            term(&mut out, first, a, j);
            first = false;
        }
        if first {
            out.push_str(" 0 x0");
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (j, &(lo, hi)) in problem.bounds.iter().enumerate() {
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => {
                let _ = writeln!(out, " x{j} = {lo}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
            }
            (true, false) => {
                let _ = writeln!(out, " x{j} >= {lo}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= x{j} <= {hi}");
            }
            (false, false) => {
                let _ = writeln!(out, " x{j} free");
            }
        }
    }
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for &j in binaries {
            let _ = writeln!(out, " x{j}");
        }
    }
    out.push_str("End\n");
    out
}
