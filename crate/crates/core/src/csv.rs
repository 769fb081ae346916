//! Trajectory tables: one row per grid point, fixed header, 12 significant
//! digits in scientific notation, LF line endings.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::firstlaw::EnergeticsLedger;

pub const BASE_HEADER: &str = "tau,delta_u,work,heat,coherence";
pub const ORACLE_HEADER: &str = "tau,delta_u,work,heat,coherence,heat_oracle,coherence_oracle";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub tau: f64,
    pub delta_u: f64,
    pub work: f64,
    pub heat: f64,
    pub coherence: f64,
    pub oracle: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryCsv {
    rows: Vec<CsvRow>,
    with_oracle: bool,
}

/// `{:.11e}` keeps 12 significant digits; negative zero is written as zero.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

impl TrajectoryCsv {
    pub fn from_ledger(ledger: &EnergeticsLedger) -> Self {
        let rows = ledger
            .rows
            .iter()
            .map(|r| CsvRow {
                tau: r.tau,
                delta_u: r.delta_u,
                work: r.work,
                heat: r.heat,
                coherence: r.coherence,
                oracle: None,
            })
            .collect();
        Self { rows, with_oracle: false }
    }

    /// Attaches (heat, coherence) reference values computed from τ.
    pub fn with_oracle<E>(mut self, mut f: impl FnMut(f64) -> Result<(f64, f64), E>) -> Result<Self, E> {
        for row in &mut self.rows {
            row.oracle = Some(f(row.tau)?);
        }
        self.with_oracle = true;
        Ok(self)
    }

    pub fn rows(&self) -> &[CsvRow] {
        &self.rows
    }

    pub fn has_oracle(&self) -> bool {
        self.with_oracle
    }

    pub fn header(&self) -> &'static str {
        if self.with_oracle {
            ORACLE_HEADER
        } else {
            BASE_HEADER
        }
    }

    pub fn render(&self) -> String {
        let cols = if self.with_oracle { 7 } else { 5 };
        let mut out = String::with_capacity((self.rows.len() + 1) * cols * 19);
        out.push_str(self.header());
        out.push('\n');
        for r in &self.rows {
            let mut fields = vec![r.tau, r.delta_u, r.work, r.heat, r.coherence];
            if let (true, Some((q, c))) = (self.with_oracle, r.oracle) {
                fields.extend([q, c]);
            }
            let line = fields.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(",");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firstlaw::LedgerRow;

    fn ledger() -> EnergeticsLedger {
        EnergeticsLedger {
            rows: vec![
                LedgerRow { tau: 0.0, delta_u: 0.0, work: -0.0, heat: 0.0, coherence: 0.0 },
                LedgerRow { tau: 0.5, delta_u: 1e-17, work: 0.0, heat: 0.123456789012345, coherence: -0.123456789012345 },
            ],
        }
    }

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(format_number(0.123456789012345), "1.23456789012e-1");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(format_number(8.0), "8.00000000000e0");
    }

    #[test]
    fn render_base() {
        let text = TrajectoryCsv::from_ledger(&ledger()).render();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], BASE_HEADER);
        assert_eq!(lines[2], "5.00000000000e-1,1.00000000000e-17,0.00000000000e0,1.23456789012e-1,-1.23456789012e-1");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn render_with_oracle() {
        let csv = TrajectoryCsv::from_ledger(&ledger())
            .with_oracle(|tau| Ok::<_, ()>((tau, -tau)))
            .unwrap();
        let text = csv.render();
        assert!(text.starts_with(&format!("{ORACLE_HEADER}\n")));
        assert!(text.lines().nth(2).unwrap().ends_with(",5.00000000000e-1,-5.00000000000e-1"));
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 7));
    }
}
