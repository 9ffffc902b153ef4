//! Fixed-format MPS writer. Row and column names are replaced by short
//! positional codes; the mapping back to model names is returned alongside.

use std::fmt::Write;

use super::model::{Model, RowSense, Sense, VarKind};

#[derive(Debug, Clone, PartialEq)]
pub struct MpsExport {
    pub text: String,
    /// `(code, model name)` for every row then every column.
    pub names: Vec<(String, String)>,
}

impl MpsExport {
    pub fn name_map(&self) -> String {
        let mut s = String::new();
        for (code, name) in &self.names {
            let _ = writeln!(s, "{code} {name}");
        }
        s
    }
}

fn row_code(i: usize) -> String {
    format!("R{i:07}")
}

fn col_code(j: usize) -> String {
    format!("C{j:07}")
}

/// Shortest rendering of `v` that fits the 12-character numeric field.
fn num(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        return s;
    }
    for prec in (0..=6).rev() {
        let s = format!("{v:.prec$e}");
        if s.len() <= 12 {
            return s;
        }
    }
    format!("{v:.0e}")
}

fn line(out: &mut String, code: &str, name: &str, field: &str, value: Option<f64>) {
    // columns 2-3, 5-12, 15-22, 25-36
    let mut s = format!(" {code:<2} {name:<8}");
    if !field.is_empty() || value.is_some() {
        let _ = write!(s, "  {field:<8}");
        if let Some(v) = value {
            let _ = write!(s, "  {:>12}", num(v));
        }
    }
    out.push_str(s.trim_end());
    out.push('\n');
}

pub fn export_mps(model: &Model) -> MpsExport {
    let mut out = String::new();
    let mut names = Vec::with_capacity(model.num_rows() + model.num_vars());
    let _ = writeln!(out, "NAME          {}", model.name.chars().take(8).collect::<String>());
    if model.sense == Sense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    line(&mut out, "N", "OBJ", "", None);
    for (i, r) in model.rows.iter().enumerate() {
        let code = match r.sense {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        };
        line(&mut out, code, &row_code(i), "", None);
        names.push((row_code(i), r.name.clone()));
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, r) in model.rows.iter().enumerate() {
        for &(j, a) in &r.coeffs {
            by_col[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (j, v) in model.vars.iter().enumerate() {
        let bin = v.kind == VarKind::Binary;
        if bin != in_int {
            let tag = if bin { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER    'MARKER'                 {tag}");
            in_int = bin;
        }
        let c = col_code(j);
        names.push((c.clone(), v.name.clone()));
        let mut wrote = false;
        if model.objective[j] != 0.0 {
            line(&mut out, "", &c, "OBJ", Some(model.objective[j]));
            wrote = true;
        }
        for &(i, a) in &by_col[j] {
            line(&mut out, "", &c, &row_code(i), Some(a));
            wrote = true;
        }
        if !wrote {
            // keep empty columns visible to readers
            line(&mut out, "", &c, "OBJ", Some(0.0));
        }
    }
    if in_int {
        out.push_str("    MARKER    'MARKER'                 'INTEND'\n");
    }

    out.push_str("RHS\n");
    if model.obj_constant != 0.0 {
        line(&mut out, "", "RHS", "OBJ", Some(-model.obj_constant));
    }
    for (i, r) in model.rows.iter().enumerate() {
        if r.rhs != 0.0 {
            line(&mut out, "", "RHS", &row_code(i), Some(r.rhs));
        }
    }
    out.push_str("RANGES\n");

    out.push_str("BOUNDS\n");
    for (j, v) in model.vars.iter().enumerate() {
        let c = col_code(j);
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            line(&mut out, "BV", "BND", &c, None);
            continue;
        }
        let (lo, hi) = (v.lower, v.upper);
        if lo == hi {
            line(&mut out, "FX", "BND", &c, Some(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => line(&mut out, "FR", "BND", &c, None),
            (false, true) => {
                line(&mut out, "MI", "BND", &c, None);
                line(&mut out, "UP", "BND", &c, Some(hi));
            }
            (true, _) => {
                if lo != 0.0 || (hi.is_finite() && hi < 0.0) {
                    line(&mut out, "LO", "BND", &c, Some(lo));
                }
                if hi.is_finite() {
                    line(&mut out, "UP", "BND", &c, Some(hi));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    MpsExport { text: out, names }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_binary_gets_bv_bound() {
        let mut m = Model::new("t", Sense::Minimize);
        let z = m.add_binary("z_pair");
        let x = m.add_var("x", -1.0, f64::INFINITY);
        m.add_row("r", [(x, 1.0), (z, 2.5)], RowSense::Le, 3.0);
        let e = export_mps(&m);
        assert!(e.text.contains(" BV BND       C0000000"));
        assert!(e.text.lines().any(|l| l.starts_with(" LO BND       C0000001") && l.ends_with(" -1")));
        assert!(e.name_map().contains("C0000000 z_pair"));
    }

    #[test]
    fn numbers_fit_the_field() {
        for v in [1.0 / 3.0, -123456789.123, 1e-17, 2.0e300, 0.1] {
            assert!(num(v).len() <= 12, "{v}");
            let back: f64 = num(v).parse().unwrap();
            assert!((back - v).abs() <= 1e-5 * v.abs());
        }
    }
}
