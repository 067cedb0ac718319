//! Sweep axes and CSV assembly shared by all subcommands.

use std::io::Write;

use anyhow::{bail, Result};

/// Spacing rule for an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log,
}

/// One sweep axis: a closed interval with a point count.
#[derive(Debug, Clone)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn linear(name: &'static str, start: f64, stop: f64, count: usize) -> Result<Self> {
        Self::new(name, start, stop, count, AxisScale::Linear)
    }

    pub fn new(
        name: &'static str,
        start: f64,
        stop: f64,
        count: usize,
        scale: AxisScale,
    ) -> Result<Self> {
        if count < 2 {
            bail!("axis {name}: need at least 2 points, got {count}");
        }
        if !(start < stop) {
            bail!("axis {name}: start must be below stop, got [{start}, {stop}]");
        }
        if scale == AxisScale::Log && start <= 0.0 {
            bail!("axis {name}: log spacing needs a positive start");
        }
        Ok(Self {
            start,
            stop,
            count,
            scale,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                let t = i as f64 / (self.count - 1) as f64;
                match self.scale {
                    AxisScale::Linear => self.start + (self.stop - self.start) * t,
                    AxisScale::Log => {
                        (self.start.ln() + (self.stop.ln() - self.start.ln()) * t).exp()
                    }
                }
            })
            .collect()
    }
}

/// A rectangular table of numbers with a fixed header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: Vec<Vec<f64>>) {
        for row in rows {
            self.push_row(row);
        }
    }

    /// True if any cell is NaN (the marker for a failed point).
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.iter().any(|v| v.is_nan()))
    }

    /// Comma-separated output, LF line endings, fixed significant digits.
    pub fn write<W: Write>(&self, w: &mut W, sig_digits: usize) -> std::io::Result<()> {
        w.write_all(self.header.join(",").as_bytes())?;
        w.write_all(b"\n")?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format_sig(*v, sig_digits)).collect();
            w.write_all(line.join(",").as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Decimal formatting with a fixed number of significant digits, no locale.
pub fn format_sig(v: f64, sig_digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    format!("{:.*e}", sig_digits.saturating_sub(1), v)
}

/// Per-point seed derivation: deterministic regardless of worker scheduling.
pub fn point_seed(base: u64, index: u64) -> u64 {
    base ^ index
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(0xd1b5_4a32_d192_ed03)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_validation() {
        assert!(Axis::linear("q", 0.0, 1.0, 1).is_err());
        assert!(Axis::linear("q", 1.0, 1.0, 5).is_err());
        assert!(Axis::new("q", 0.0, 1.0, 5, AxisScale::Log).is_err());
        let a = Axis::linear("q", 0.0, 1.0, 5).unwrap();
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.5, 9), "5.00000000e-1");
        assert_eq!(format_sig(1.3862943611, 9), "1.38629436e0");
        assert_eq!(format_sig(f64::NAN, 9), "nan");
        assert_eq!(format_sig(0.0, 9), "0.00000000e0");
    }

    #[test]
    fn nan_cells_mark_failures() {
        let mut t = CsvTable::new(vec!["a"]);
        t.push_row(vec![1.0]);
        assert!(!t.has_failures());
        t.push_row(vec![f64::NAN]);
        assert!(t.has_failures());
    }

    #[test]
    fn table_rejects_ragged_rows() {
        let mut t = CsvTable::new(vec!["a", "b"]);
        t.push_row(vec![1.0, 2.0]);
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            t.push_row(vec![1.0]);
        }));
        assert!(result.is_err());
    }
}
