use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Column names of the time-series CSV, in order.
pub const COLUMNS: [&str; 11] = [
    "t",
    "v_crit",
    "v_high",
    "int_v_high",
    "e_crit",
    "e_hybrid_inf",
    "int_e_crit_sq",
    "int_e_hybrid_1",
    "det_drift",
    "div_et",
    "curl_compat",
];

/// One diagnostic row; norm indices are relative to the dimension `N`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LogRow {
    pub t: f64,
    /// `‖v‖_{B^{N/2-1}}`
    pub v_crit: f64,
    /// `‖v‖_{B^{N/2+1}}`
    pub v_high: f64,
    /// `∫_0^t ‖v‖_{B^{N/2+1}}`
    pub int_v_high: f64,
    /// `‖E‖_{B^{N/2}}`
    pub e_crit: f64,
    /// `‖E‖_{B̃^{N/2,∞}_μ}`
    pub e_hybrid_inf: f64,
    /// `∫_0^t ‖E‖²_{B^{N/2}}`
    pub int_e_crit_sq: f64,
    /// `∫_0^t ‖E‖_{B̃^{N/2,1}_μ}`
    pub int_e_hybrid_1: f64,
    pub det_drift: f64,
    pub div_et: f64,
    pub curl_compat: f64,
}

impl LogRow {
    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.v_crit,
            self.v_high,
            self.int_v_high,
            self.e_crit,
            self.e_hybrid_inf,
            self.int_e_crit_sq,
            self.int_e_hybrid_1,
            self.det_drift,
            self.div_et,
            self.curl_compat,
        ]
    }

    fn from_values(v: &[f64]) -> Self {
        LogRow {
            t: v[0],
            v_crit: v[1],
            v_high: v[2],
            int_v_high: v[3],
            e_crit: v[4],
            e_hybrid_inf: v[5],
            int_e_crit_sq: v[6],
            int_e_hybrid_1: v[7],
            det_drift: v[8],
            div_et: v[9],
            curl_compat: v[10],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeriesLog {
    pub rows: Vec<LogRow>,
}

impl TimeSeriesLog {
    pub fn push(&mut self, row: LogRow) {
        self.rows.push(row);
    }

    /// Integral columns never decrease.
    pub fn integrals_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].int_v_high >= w[0].int_v_high
                && w[1].int_e_crit_sq >= w[0].int_e_crit_sq
                && w[1].int_e_hybrid_1 >= w[0].int_e_hybrid_1
        })
    }

    /// Header row, then one row per record with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", COLUMNS.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.values().iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != COLUMNS.join(",") {
            return Err(Error::InvalidParameter(format!("unexpected CSV header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidParameter(format!("CSV row {}: {e}", i + 1)))?;
            if vals.len() != COLUMNS.len() {
                return Err(Error::InvalidParameter(format!(
                    "CSV row {} has {} cells",
                    i + 1,
                    vals.len()
                )));
            }
            rows.push(LogRow::from_values(&vals));
        }
        Ok(TimeSeriesLog { rows })
    }
}
