//! Report primitives shared by the check suites: named residual tables and
//! deterministic CSV/JSON rendering.
//!
//! Floats are serialized with 17 significant digits so that emitted reports
//! round-trip exactly and identical runs produce byte-identical files.

use std::fmt::Write as _;

/// 17-significant-digit scientific notation; round-trip safe for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal JSON string escaping (ASCII control, quote, backslash).
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// One named residual with the tolerance it is judged against (if any).
#[derive(Debug, Clone)]
pub struct ResidualRow {
    pub name: String,
    pub residual: f64,
    /// Upper bound the residual is expected to satisfy; `None` for rows that
    /// are reported without a pass/fail judgement (e.g. deliberately nonzero
    /// commutators).
    pub tolerance: Option<f64>,
}

impl ResidualRow {
    pub fn checked(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        ResidualRow {
            name: name.into(),
            residual,
            tolerance: Some(tolerance),
        }
    }

    pub fn reported(name: impl Into<String>, residual: f64) -> Self {
        ResidualRow {
            name: name.into(),
            residual,
            tolerance: None,
        }
    }

    pub fn passes(&self) -> bool {
        match self.tolerance {
            Some(tol) => self.residual < tol,
            None => true,
        }
    }
}

/// Ordered collection of named residuals.
#[derive(Debug, Clone, Default)]
pub struct ResidualTable {
    pub rows: Vec<ResidualRow>,
}

impl ResidualTable {
    pub fn new() -> Self {
        ResidualTable { rows: Vec::new() }
    }

    pub fn push(&mut self, row: ResidualRow) {
        self.rows.push(row);
    }

    pub fn get(&self, name: &str) -> Option<&ResidualRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("no residual row named {name}"))
            .residual
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(ResidualRow::passes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,residual,tolerance,pass\n");
        for r in &self.rows {
            let tol = r.tolerance.map(fmt_f64).unwrap_or_default();
            let pass = if r.tolerance.is_some() {
                if r.passes() { "1" } else { "0" }
            } else {
                ""
            };
            let _ = writeln!(out, "{},{},{},{}", r.name, fmt_f64(r.residual), tol, pass);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "  {{\"name\": \"{}\", \"residual\": {}",
                json_escape(&r.name),
                fmt_f64(r.residual)
            );
            if let Some(tol) = r.tolerance {
                let _ = write!(
                    out,
                    ", \"tolerance\": {}, \"pass\": {}",
                    fmt_f64(tol),
                    r.passes()
                );
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push(']');
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -1.0,
            0.05,
            std::f64::consts::PI,
            1.2345678901234567e-123,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s} did not round-trip");
        }
    }

    #[test]
    fn csv_and_json_are_deterministic() {
        let mut t = ResidualTable::new();
        t.push(ResidualRow::checked("alpha", 1e-13, 1e-10));
        t.push(ResidualRow::reported("beta", 0.25));
        assert_eq!(t.to_csv(), t.clone().to_csv());
        assert_eq!(t.to_json(), t.to_json());
        assert!(t.all_pass());
        assert!(t.get("beta").is_some());
    }

    #[test]
    fn json_escaping_handles_specials() {
        assert_eq!(json_escape("a\"b\\c\nd"), "a\\\"b\\\\c\\nd");
    }
}
