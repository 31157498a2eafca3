//! Synthetic truth models. All generators keep velocities inside
//! [1500, 4500] m/s and are bit-deterministic under their seed.

use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfwi_core::{Grid2D, VelocityModel};

use crate::{CliError, Result};

pub const BENCHMARK_KINDS: [&str; 4] = ["two_layer", "three_layer", "lens", "random_layers"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    TwoLayer,
    ThreeLayer,
    Lens,
    RandomLayers,
}

impl FromStr for BenchmarkKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "two_layer" => Ok(BenchmarkKind::TwoLayer),
            "three_layer" => Ok(BenchmarkKind::ThreeLayer),
            "lens" => Ok(BenchmarkKind::Lens),
            "random_layers" => Ok(BenchmarkKind::RandomLayers),
            other => Err(CliError::config_one(format!(
                "unknown benchmark kind '{other}' (known: {})",
                BENCHMARK_KINDS.join(", ")
            ))),
        }
    }
}

impl BenchmarkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchmarkKind::TwoLayer => "two_layer",
            BenchmarkKind::ThreeLayer => "three_layer",
            BenchmarkKind::Lens => "lens",
            BenchmarkKind::RandomLayers => "random_layers",
        }
    }
}

pub fn generate_synthetic_benchmark(
    kind: BenchmarkKind,
    grid: Grid2D,
    seed: u64,
) -> Result<VelocityModel> {
    let values = match kind {
        BenchmarkKind::TwoLayer => two_layer(grid),
        BenchmarkKind::ThreeLayer => three_layer(grid),
        BenchmarkKind::Lens => lens(grid),
        BenchmarkKind::RandomLayers => random_layers(grid, seed),
    };
    Ok(VelocityModel::new(grid, values)?)
}

/// 1500 over 2500 m/s with the interface at depth index nz/2.
fn two_layer(grid: Grid2D) -> Array2<f64> {
    Array2::from_shape_fn((grid.nz, grid.nx), |(iz, _)| {
        if iz < grid.nz / 2 {
            1500.0
        } else {
            2500.0
        }
    })
}

/// 1500 / 2200 / 3200 m/s in equal-thirds depth bands.
fn three_layer(grid: Grid2D) -> Array2<f64> {
    Array2::from_shape_fn((grid.nz, grid.nx), |(iz, _)| {
        if iz < grid.nz / 3 {
            1500.0
        } else if iz < 2 * grid.nz / 3 {
            2200.0
        } else {
            3200.0
        }
    })
}

/// Linear 1500 -> 3000 m/s background with a 4500 m/s elliptical inclusion
/// centred mid-grid, the high-contrast analogue of a salt body.
fn lens(grid: Grid2D) -> Array2<f64> {
    let (nx, nz) = (grid.nx as f64, grid.nz as f64);
    let (cx, cz) = ((nx - 1.0) / 2.0, (nz - 1.0) / 2.0);
    let (ax, az) = (nx / 5.0, nz / 6.0);
    Array2::from_shape_fn((grid.nz, grid.nx), |(iz, ix)| {
        let ex = (ix as f64 - cx) / ax;
        let ez = (iz as f64 - cz) / az;
        if ex * ex + ez * ez <= 1.0 {
            4500.0
        } else {
            1500.0 + 1500.0 * iz as f64 / (nz - 1.0)
        }
    })
}

/// 4 to 8 flat layers with random thickness, velocities drawn in
/// [1500, 4500] and sorted increasing with depth.
fn random_layers(grid: Grid2D, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_layers: usize = rng.gen_range(4..=8);

    // Interior boundaries as distinct sorted depth indices.
    let mut boundaries: Vec<usize> = Vec::new();
    while boundaries.len() < n_layers - 1 {
        let b = rng.gen_range(1..grid.nz);
        if !boundaries.contains(&b) {
            boundaries.push(b);
        }
    }
    boundaries.sort_unstable();

    let mut velocities: Vec<f64> =
        (0..n_layers).map(|_| rng.gen_range(1500.0..=4500.0)).collect();
    velocities.sort_by(|a, b| a.partial_cmp(b).expect("finite velocities"));

    Array2::from_shape_fn((grid.nz, grid.nx), |(iz, _)| {
        let layer = boundaries.iter().take_while(|&&b| b <= iz).count();
        velocities[layer]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sfwi_metrics::effective_rank;
    use std::collections::BTreeSet;

    fn grid64() -> Grid2D {
        Grid2D::new(64, 64, 10.0, 10.0).unwrap()
    }

    fn distinct(m: &VelocityModel) -> BTreeSet<u64> {
        m.values().iter().map(|v| v.to_bits()).collect()
    }

    #[test]
    fn two_layer_has_two_values_with_interface_at_half_depth() {
        let m = generate_synthetic_benchmark(BenchmarkKind::TwoLayer, grid64(), 0).unwrap();
        assert_eq!(distinct(&m).len(), 2);
        assert_eq!(m.values()[(31, 0)], 1500.0);
        assert_eq!(m.values()[(32, 0)], 2500.0);
    }

    #[test]
    fn three_layer_has_three_values() {
        let m = generate_synthetic_benchmark(BenchmarkKind::ThreeLayer, grid64(), 0).unwrap();
        assert_eq!(distinct(&m).len(), 3);
    }

    #[test]
    fn same_seed_is_bit_identical_and_seeds_differ() {
        let a = generate_synthetic_benchmark(BenchmarkKind::RandomLayers, grid64(), 7).unwrap();
        let b = generate_synthetic_benchmark(BenchmarkKind::RandomLayers, grid64(), 7).unwrap();
        assert_eq!(a.values(), b.values());
        let c = generate_synthetic_benchmark(BenchmarkKind::RandomLayers, grid64(), 8).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn all_kinds_stay_inside_the_velocity_range() {
        for kind in [
            BenchmarkKind::TwoLayer,
            BenchmarkKind::ThreeLayer,
            BenchmarkKind::Lens,
            BenchmarkKind::RandomLayers,
        ] {
            for seed in [0, 3, 11] {
                let m = generate_synthetic_benchmark(kind, grid64(), seed).unwrap();
                assert!(m.min_velocity() >= 1500.0, "{kind:?} seed {seed}");
                assert!(m.max_velocity() <= 4500.0, "{kind:?} seed {seed}");
            }
        }
    }

    #[test]
    fn lens_is_structurally_richer_than_two_layer() {
        let g = grid64();
        let lens = generate_synthetic_benchmark(BenchmarkKind::Lens, g, 0).unwrap();
        let two = generate_synthetic_benchmark(BenchmarkKind::TwoLayer, g, 0).unwrap();
        let r_lens = effective_rank(lens.values(), None).unwrap();
        let r_two = effective_rank(two.values(), None).unwrap();
        assert!(r_lens > r_two, "lens rank {r_lens} vs two_layer rank {r_two}");
    }

    #[test]
    fn lens_embeds_the_high_contrast_inclusion() {
        let m = generate_synthetic_benchmark(BenchmarkKind::Lens, grid64(), 0).unwrap();
        assert_eq!(m.values()[(32, 32)], 4500.0);
        assert_eq!(m.values()[(0, 0)], 1500.0);
    }

    #[test]
    fn random_layers_are_monotone_with_depth() {
        let m = generate_synthetic_benchmark(BenchmarkKind::RandomLayers, grid64(), 5).unwrap();
        for iz in 1..64 {
            assert!(m.values()[(iz, 0)] >= m.values()[(iz - 1, 0)]);
        }
    }

    #[test]
    fn unknown_kind_is_a_config_error() {
        let err = "pyramid".parse::<BenchmarkKind>().unwrap_err();
        assert!(err.to_string().contains("two_layer"));
    }
}
