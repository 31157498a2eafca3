use std::io::Write;

use crate::{InvertError, Result};

/// One recorded point of an inversion run. `data_misfit` is the value
/// measured by the physics evaluation of that step (before the update it
/// drove); the image metrics describe the model emitted after the update.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub physics_step: usize,
    pub data_misfit: f64,
    pub rel_l2: Option<f64>,
    pub ssim: Option<f64>,
    pub effective_rank: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    rows: Vec<RecordRow>,
}

impl ConvergenceRecord {
    pub fn new() -> Self {
        ConvergenceRecord::default()
    }

    pub fn push(&mut self, row: RecordRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.physics_step <= last.physics_step {
                return Err(InvertError::invalid(format!(
                    "record steps must increase strictly: {} after {}",
                    row.physics_step, last.physics_step
                )));
            }
        }
        let finite = row.data_misfit.is_finite()
            && row.wall_seconds.is_finite()
            && row.rel_l2.map_or(true, f64::is_finite)
            && row.ssim.map_or(true, f64::is_finite);
        if !finite {
            return Err(InvertError::invalid(format!(
                "record row at step {} contains non-finite entries",
                row.physics_step
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[RecordRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&RecordRow> {
        self.rows.last()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Plain CSV, one row per record point. Floats use the shortest exact
    /// representation, so equal runs produce byte-identical files;
    /// `zero_seconds` blanks the one wall-clock column for comparisons.
    pub fn write_csv<W: Write>(&self, mut w: W, zero_seconds: bool) -> std::io::Result<()> {
        writeln!(w, "step,misfit,rel_l2,ssim,rank,seconds")?;
        for row in &self.rows {
            let rel = row.rel_l2.map(|v| v.to_string()).unwrap_or_default();
            let ssim = row.ssim.map(|v| v.to_string()).unwrap_or_default();
            let seconds = if zero_seconds { 0.0 } else { row.wall_seconds };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.physics_step, row.data_misfit, rel, ssim, row.effective_rank, seconds
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, zero_seconds: bool) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out, zero_seconds).expect("write to Vec cannot fail");
        String::from_utf8(out).expect("csv is ascii")
    }
}
