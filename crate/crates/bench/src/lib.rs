//! Shared scenario builders for the pipeline benchmarks.

use detopt_core::fields::{MembraneConfig, OpticalParams};
use detopt_core::membrane::{FarGridSpec, MembraneScenario};

pub fn params() -> OpticalParams {
    OpticalParams::new(1.064e-6, 1.0).unwrap()
}

/// Tabletop geometry with the mode index selectable.
pub fn tabletop(m: u32) -> MembraneConfig {
    let p = params();
    let w0 = 100e-6;
    let zd = 560e-6 * p.wavenumber() * w0;
    MembraneConfig::new(1.5e-3, 3.5e-3, m, 1, w0, zd).unwrap()
}

/// Long-membrane tilting-mirror scenario on a grid of the given width.
pub fn lever_scenario(nx: usize, ny: usize) -> MembraneScenario {
    let p = params();
    let w0 = 100e-6;
    let km = 0.1 / w0;
    let zd = 560e-6 * p.wavenumber() * w0;
    let cfg = MembraneConfig::new(std::f64::consts::PI * 2.0 / km, 3.5e-3, 2, 1, w0, zd).unwrap();
    MembraneScenario::optical_lever(
        cfg,
        p,
        &FarGridSpec {
            nx,
            ny,
            pad_waists: 6.0,
        },
    )
    .unwrap()
}
