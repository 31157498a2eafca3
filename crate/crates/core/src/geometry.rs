use crate::{CoreError, Grid2D, Result};

/// Source and receiver placement on the grid, as `(ix, iz)` index pairs.
///
/// Every experiment fires each source in turn and records at the full
/// receiver line, so the layout is shared across shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcquisitionGeometry {
    pub sources: Vec<(usize, usize)>,
    pub receivers: Vec<(usize, usize)>,
}

impl AcquisitionGeometry {
    pub fn new(
        grid: &Grid2D,
        sources: Vec<(usize, usize)>,
        receivers: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if sources.is_empty() {
            return Err(CoreError::invalid("acquisition needs at least one source"));
        }
        if receivers.is_empty() {
            return Err(CoreError::invalid("acquisition needs at least one receiver"));
        }
        for &(ix, iz) in sources.iter().chain(receivers.iter()) {
            if !grid.contains(ix, iz) {
                return Err(CoreError::invalid(format!(
                    "position (ix={ix}, iz={iz}) outside grid {}x{}",
                    grid.nx, grid.nz
                )));
            }
        }
        Ok(AcquisitionGeometry { sources, receivers })
    }

    pub fn n_shots(&self) -> usize {
        self.sources.len()
    }

    pub fn n_receivers(&self) -> usize {
        self.receivers.len()
    }

    /// Horizontal line of `n` positions at depth `iz`, spread as evenly as
    /// possible across `[0, nx-1]`. With `n = 1` the single position sits at
    /// the middle column.
    pub fn surface_line(grid: &Grid2D, n: usize, iz: usize) -> Result<Vec<(usize, usize)>> {
        if n == 0 {
            return Err(CoreError::invalid("surface line needs at least one position"));
        }
        if iz >= grid.nz {
            return Err(CoreError::invalid(format!(
                "surface line depth iz={iz} outside grid nz={}",
                grid.nz
            )));
        }
        if n > grid.nx {
            return Err(CoreError::invalid(format!(
                "cannot place {n} distinct positions on {} columns",
                grid.nx
            )));
        }
        let line = (0..n)
            .map(|i| {
                let ix = if n == 1 {
                    (grid.nx - 1) / 2
                } else {
                    // round(i * (nx-1) / (n-1)) without floating error
                    (i * (grid.nx - 1) + (n - 1) / 2) / (n - 1)
                };
                (ix, iz)
            })
            .collect();
        Ok(line)
    }
}
