use crate::{CoreError, Result};

/// Regular 2D grid on which velocity models and wavefields are discretized.
///
/// `nx` counts horizontal cells, `nz` depth cells; `dx`/`dz` are the cell
/// spacings in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
}

impl Grid2D {
    /// Minimum grid extent per axis. Smaller grids cannot support the
    /// 8th-order stencil of the wave solver.
    pub const MIN_CELLS: usize = 8;

    pub fn new(nx: usize, nz: usize, dx: f64, dz: f64) -> Result<Self> {
        if nx < Self::MIN_CELLS || nz < Self::MIN_CELLS {
            return Err(CoreError::invalid(format!(
                "grid must be at least {0}x{0} cells, got {1}x{2}",
                Self::MIN_CELLS,
                nx,
                nz
            )));
        }
        if !(dx > 0.0) || !(dz > 0.0) {
            return Err(CoreError::invalid(format!(
                "cell spacings must be positive, got dx={dx}, dz={dz}"
            )));
        }
        Ok(Grid2D { nx, nz, dx, dz })
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.nz
    }

    /// True if `(ix, iz)` addresses a cell inside the grid.
    pub fn contains(&self, ix: usize, iz: usize) -> bool {
        ix < self.nx && iz < self.nz
    }

    /// Physical width of the model in meters.
    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    /// Physical depth of the model in meters.
    pub fn depth(&self) -> f64 {
        self.nz as f64 * self.dz
    }
}
