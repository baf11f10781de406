//! Phase-contrast detection of membrane modes.
//!
//! Imaging with a π/2-shifted stationary mode turns the phase pattern
//! `2kΨ` into first-order intensity modulation, `I ∝ |u_in|²(1 + 4kAψ)`.
//! Two practical readouts are modeled:
//!
//! * a linear photodiode array with two elements per mechanical period,
//!   weighted ±1 — equivalent to `f_w = signum(ψ)` at zero gap, reaching
//!   `η = 8/π²`; shrinking the elements symmetrically about the intensity
//!   antinodes removes the noisy low-signal borders and raises η further;
//! * a single photodetector behind a binary mask transmitting where
//!   `ψ > ψ_threshold`, for modes oscillating along both axes.
//!
//! In the short-mechanical-wavelength (grating) limit these efficiencies
//! depend only on the phase statistics of ψ, not on the mode indices.

use crate::detection::{budget, scan_1d, DetectionBudget, ScanResult, WeightFunction};
use crate::error::{Error, Result};
use crate::fields::{
    gaussian_input, membrane_mode, phase_contrast_image, FieldPair, MembraneConfig, OpticalParams,
};
use crate::quadrature::CartesianGrid2D;

/// Below this `k_m w0` the grating-limit closed forms pick up visible
/// finite-beam corrections; the budgets are still computed, with a warning.
pub const DEFAULT_GRATING_THRESHOLD: f64 = 2.0;

/// Grid for the photodiode-array scenario. The spacing divides the array
/// pitch so every element edge lands on a cell boundary, and the domain is
/// a whole number of pitches covering the Gaussian envelope.
#[derive(Debug, Clone, Copy)]
pub struct ArrayGridSpec {
    /// Cells per array pitch; also sets the gap-fraction quantization 2/N.
    pub cells_per_pitch: usize,
    pub ny: usize,
    pub pad_waists: f64,
}

impl Default for ArrayGridSpec {
    fn default() -> Self {
        Self {
            cells_per_pitch: 512,
            ny: 96,
            pad_waists: 6.0,
        }
    }
}

/// Grid for the 2-D threshold-mask scenario; the mask boundary is a curve,
/// so the weighting is rasterized at cell centers and accuracy is set by
/// the cell count.
#[derive(Debug, Clone, Copy)]
pub struct MaskGridSpec {
    pub nx: usize,
    pub ny: usize,
    pub pad_waists: f64,
}

impl Default for MaskGridSpec {
    fn default() -> Self {
        Self {
            nx: 2048,
            ny: 2048,
            pad_waists: 6.0,
        }
    }
}

/// Image-plane field pair for the configured mode (unit magnification).
pub fn image_fields(
    cfg: &MembraneConfig,
    grid: &CartesianGrid2D,
) -> Result<FieldPair> {
    let u_in = gaussian_input(cfg, grid)?;
    let psi = membrane_mode(cfg, grid)?;
    phase_contrast_image(&u_in, &psi)
}

fn array_grid(cfg: &MembraneConfig, spec: &ArrayGridSpec) -> Result<(CartesianGrid2D, f64)> {
    let pitch = std::f64::consts::PI / cfg.mode_wavenumber_x();
    let needed = spec.pad_waists * cfg.waist();
    let pitches = (needed / pitch - 1e-12).ceil().max(1.0);
    let half_x = pitches * pitch;
    let nx = 2.0 * pitches * spec.cells_per_pitch as f64;
    let grid = CartesianGrid2D::centered(half_x, needed, nx as usize, spec.ny)?;
    Ok((grid, pitch))
}

/// Array weighting with the gap snapped to the grid; element centers sit on
/// the antinodes of ψ.
fn array_weighting(
    spec: &ArrayGridSpec,
    gap_fraction: f64,
    pitch: f64,
) -> Result<(WeightFunction, f64)> {
    if !(0.0..1.0).contains(&gap_fraction) {
        return Err(Error::InvalidParameter(format!(
            "gap fraction must lie in [0, 1), got {gap_fraction}"
        )));
    }
    let n = spec.cells_per_pitch as f64;
    // Half-width in cells; keeping it ≥ 1 cell avoids an empty array.
    let hw_cells = ((1.0 - gap_fraction) * n / 2.0).round().max(1.0);
    let effective_gap = 1.0 - 2.0 * hw_cells / n;
    let fw = WeightFunction::array_1d(pitch, effective_gap, pitch / 2.0);
    Ok((fw, effective_gap))
}

/// Budget of the ±1 photodiode array with the given gap fraction.
///
/// Returns the budget and the gap fraction actually applied after snapping
/// to the grid.
pub fn array_budget(
    cfg: &MembraneConfig,
    params: &OpticalParams,
    gap_fraction: f64,
    spec: &ArrayGridSpec,
) -> Result<(DetectionBudget, f64)> {
    if cfg.mode_n() != 1 {
        return Err(Error::UnsupportedMode {
            m: cfg.mode_m(),
            n: cfg.mode_n(),
        });
    }
    if cfg.grating_parameter_x() < DEFAULT_GRATING_THRESHOLD {
        log::warn!(
            "k_m w0 = {:.2} is below the grating threshold {DEFAULT_GRATING_THRESHOLD}; finite-beam corrections apply",
            cfg.grating_parameter_x()
        );
    }
    let (grid, pitch) = array_grid(cfg, spec)?;
    let fields = image_fields(cfg, &grid)?;
    let (fw, effective_gap) = array_weighting(spec, gap_fraction, pitch)?;
    Ok((budget(&fields, &fw, params)?, effective_gap))
}

/// Scans the array gap fraction, maximizing η. Returns the scan and the
/// budget at the refined optimum.
pub fn gap_scan(
    cfg: &MembraneConfig,
    params: &OpticalParams,
    g_lo: f64,
    g_hi: f64,
    n_samples: usize,
    spec: &ArrayGridSpec,
) -> Result<(ScanResult, DetectionBudget, f64)> {
    let (grid, pitch) = array_grid(cfg, spec)?;
    let fields = image_fields(cfg, &grid)?;
    let scan = scan_1d(
        |g| {
            let (fw, _) = array_weighting(spec, g, pitch)?;
            Ok(budget(&fields, &fw, params)?.efficiency)
        },
        g_lo,
        g_hi,
        n_samples,
    )?;
    let (fw, effective_gap) = array_weighting(spec, scan.argmax, pitch)?;
    let best = budget(&fields, &fw, params)?;
    Ok((scan, best, effective_gap))
}

/// Budget of the single-detector threshold mask `f_w = 1_{ψ > t}`.
pub fn threshold_mask_budget(
    cfg: &MembraneConfig,
    params: &OpticalParams,
    threshold: f64,
    spec: &MaskGridSpec,
) -> Result<DetectionBudget> {
    if cfg.grating_parameter_x() < DEFAULT_GRATING_THRESHOLD
        || cfg.grating_parameter_y() < DEFAULT_GRATING_THRESHOLD
    {
        log::warn!(
            "mode ({}, {}) is not deep in the grating limit (k_m w0 = {:.2}, k_n w0 = {:.2})",
            cfg.mode_m(),
            cfg.mode_n(),
            cfg.grating_parameter_x(),
            cfg.grating_parameter_y()
        );
    }
    let half = spec.pad_waists * cfg.waist();
    let grid = CartesianGrid2D::centered(half, half, spec.nx, spec.ny)?;
    let fields = image_fields(cfg, &grid)?;
    let fw = WeightFunction::threshold_mask(
        cfg.mode_wavenumber_x(),
        cfg.mode_wavenumber_y(),
        threshold,
    );
    budget(&fields, &fw, params)
}

/// Scans the mask threshold, maximizing η.
pub fn threshold_scan(
    cfg: &MembraneConfig,
    params: &OpticalParams,
    t_lo: f64,
    t_hi: f64,
    n_samples: usize,
    spec: &MaskGridSpec,
) -> Result<ScanResult> {
    let half = spec.pad_waists * cfg.waist();
    let grid = CartesianGrid2D::centered(half, half, spec.nx, spec.ny)?;
    let fields = image_fields(cfg, &grid)?;
    scan_1d(
        |t| {
            let fw = WeightFunction::threshold_mask(
                cfg.mode_wavenumber_x(),
                cfg.mode_wavenumber_y(),
                t,
            );
            Ok(budget(&fields, &fw, params)?.efficiency)
        },
        t_lo,
        t_hi,
        n_samples,
    )
}

/// Binary mask raster: 1 where the mask transmits (`ψ > threshold`),
/// 0 where it is opaque.
#[derive(Debug, Clone)]
pub struct MaskRaster {
    pub grid: CartesianGrid2D,
    pub cells: Vec<u8>,
}

impl MaskRaster {
    /// Fraction of cells that transmit.
    pub fn open_fraction(&self) -> f64 {
        self.cells.iter().map(|&c| c as usize).sum::<usize>() as f64 / self.cells.len() as f64
    }
}

/// Rasterizes the transmission mask for the configured mode on `grid`.
pub fn emit_mask(
    cfg: &MembraneConfig,
    threshold: f64,
    grid: &CartesianGrid2D,
) -> Result<MaskRaster> {
    if threshold >= 1.0 {
        return Err(Error::DegenerateWeighting);
    }
    let km = cfg.mode_wavenumber_x();
    let kn = cfg.mode_wavenumber_y();
    let cells = grid.sample(|x, y| u8::from((km * x).sin() * (kn * y).cos() > threshold));
    Ok(MaskRaster {
        grid: grid.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::ideal_information;
    use crate::fields::{propagate_pair, reflect};
    use crate::membrane::{DeviceGridSpec, FarGridSpec};
    use approx::assert_relative_eq;

    fn params() -> OpticalParams {
        OpticalParams::new(1.064e-6, 1.0).unwrap()
    }

    /// Imaging geometry: 200 um waist so m = 14 sits in the grating limit.
    fn cfg(m: u32, n: u32) -> MembraneConfig {
        MembraneConfig::new(1.5e-3, 3.5e-3, m, n, 200e-6, 0.33).unwrap()
    }

    #[test]
    fn array_without_gaps_reaches_eight_over_pi_squared() {
        let (b, g) = array_budget(&cfg(14, 1), &params(), 0.0, &ArrayGridSpec::default()).unwrap();
        assert_eq!(g, 0.0);
        let target = 8.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((b.efficiency - target).abs() < 0.01, "η = {}", b.efficiency);
    }

    #[test]
    fn array_efficiency_is_mode_independent() {
        let p = params();
        let spec = ArrayGridSpec::default();
        let (b14, _) = array_budget(&cfg(14, 1), &p, 0.0, &spec).unwrap();
        let (b20, _) = array_budget(&cfg(20, 1), &p, 0.0, &spec).unwrap();
        assert!(
            (b14.efficiency - b20.efficiency).abs() < 0.005,
            "m=14: {}, m=20: {}",
            b14.efficiency,
            b20.efficiency
        );
    }

    #[test]
    fn optimized_gap_raises_efficiency() {
        let (scan, best, g) = gap_scan(
            &cfg(14, 1),
            &params(),
            0.0,
            0.8,
            161,
            &ArrayGridSpec::default(),
        )
        .unwrap();
        assert!(
            (best.efficiency - 0.92).abs() < 0.01,
            "η(g*) = {} at g = {g}",
            best.efficiency
        );
        // Single-peaked in the gap fraction.
        let values: Vec<f64> = scan.samples.iter().map(|s| s.value).collect();
        let peak = values.iter().cloned().fold(0.0f64, f64::max);
        let mut sign_changes = 0;
        let mut last = 0.0f64;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            if d.abs() > 1e-4 * peak {
                if last != 0.0 && d.signum() != last {
                    sign_changes += 1;
                }
                last = d.signum();
            }
        }
        assert!(sign_changes <= 1, "η(g) has {sign_changes} derivative sign changes");
    }

    #[test]
    fn gap_zero_matches_signum_weighting() {
        // At g = 0 the array is signum(sin k_m x): the efficiency of the
        // closed-form grating limit appears with finite-k_n corrections,
        // independent of amplitude.
        let p1 = params();
        let p2 = OpticalParams::new(1.064e-6, 3.0).unwrap();
        let (b1, _) = array_budget(&cfg(14, 1), &p1, 0.0, &ArrayGridSpec::default()).unwrap();
        let (b2, _) = array_budget(&cfg(14, 1), &p2, 0.0, &ArrayGridSpec::default()).unwrap();
        assert_relative_eq!(b1.efficiency, b2.efficiency, max_relative = 1e-12);
    }

    #[test]
    fn array_requires_single_transverse_antinode() {
        assert!(matches!(
            array_budget(&cfg(14, 3), &params(), 0.0, &ArrayGridSpec::default()),
            Err(Error::UnsupportedMode { .. })
        ));
    }

    #[test]
    fn threshold_mask_known_point() {
        let b = threshold_mask_budget(&cfg(14, 15), &params(), 0.29, &MaskGridSpec::default())
            .unwrap();
        assert!((b.efficiency - 0.43).abs() < 0.01, "η = {}", b.efficiency);
    }

    #[test]
    fn threshold_scan_finds_flat_optimum() {
        // The peak is a plateau: η varies by ~1e-3 over t ∈ [0.27, 0.33].
        // A fine uniform-phase quadrature of the grating-limit statistics
        // puts the true argmax at t* = 0.315 with η* = 0.4328; the reported
        // operating point t = 0.29 sits on the same plateau.
        let scan = threshold_scan(
            &cfg(14, 15),
            &params(),
            0.05,
            0.6,
            56,
            &MaskGridSpec {
                nx: 1024,
                ny: 1024,
                pad_waists: 6.0,
            },
        )
        .unwrap();
        assert!(
            (scan.argmax - 0.315).abs() < 0.01,
            "argmax {} (η = {})",
            scan.argmax,
            scan.value
        );
        assert!((scan.value - 0.4328).abs() < 1e-3);
        let at_reported = threshold_mask_budget(
            &cfg(14, 15),
            &params(),
            0.29,
            &MaskGridSpec {
                nx: 1024,
                ny: 1024,
                pad_waists: 6.0,
            },
        )
        .unwrap();
        assert!(scan.value - at_reported.efficiency < 1.5e-3);
    }

    #[test]
    fn near_unity_threshold_degenerates() {
        let b = threshold_mask_budget(
            &cfg(14, 15),
            &params(),
            0.999,
            &MaskGridSpec {
                nx: 1024,
                ny: 1024,
                pad_waists: 6.0,
            },
        );
        // Either almost nothing transmits (tiny η) or no cell does.
        match b {
            Ok(budget) => assert!(budget.efficiency < 0.1),
            Err(Error::DegenerateWeighting) => {}
            Err(other) => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            threshold_mask_budget(&cfg(14, 15), &params(), 1.0, &MaskGridSpec::default()),
            Err(Error::DegenerateWeighting)
        ));
    }

    #[test]
    fn mask_raster_properties() {
        let c = cfg(14, 15);
        // 504 cells over ±1.2 mm make both mode periods exact multiples of
        // the spacing (45 and 98 cells).
        let grid = CartesianGrid2D::centered(1.2e-3, 1.2e-3, 504, 504).unwrap();
        let open_half = emit_mask(&c, 0.0, &grid).unwrap();
        assert!((open_half.open_fraction() - 0.5).abs() < 0.01);
        // Periodic along both axes.
        let mask = emit_mask(&c, 0.29, &grid).unwrap();
        let px = std::f64::consts::TAU / c.mode_wavenumber_x();
        let shift_cells = (px / grid.dx()).round() as usize;
        assert!((px / grid.dx() - shift_cells as f64).abs() < 1e-9);
        for i in 0..grid.nx() - shift_cells {
            for j in [0, grid.ny() / 3, grid.ny() - 1] {
                assert_eq!(
                    mask.cells[grid.index(i, j)],
                    mask.cells[grid.index(i + shift_cells, j)]
                );
            }
        }
        // Open fraction equals a direct recount and the uniform-phase
        // estimate of P(ψ > t).
        let recount = mask.cells.iter().filter(|&&c| c == 1).count() as f64
            / mask.cells.len() as f64;
        assert_eq!(recount, mask.open_fraction());
        let n = 1500;
        let mut hits = 0usize;
        for a in 0..n {
            let u = (a as f64 + 0.5) / n as f64 * std::f64::consts::TAU;
            for b in 0..n {
                let v = (b as f64 + 0.5) / n as f64 * std::f64::consts::TAU;
                if u.sin() * v.cos() > 0.29 {
                    hits += 1;
                }
            }
        }
        let uniform = hits as f64 / (n * n) as f64;
        assert!(
            (mask.open_fraction() - uniform).abs() < 0.01,
            "raster {} vs uniform-phase {}",
            mask.open_fraction(),
            uniform
        );
    }

    #[test]
    fn image_plane_information_matches_far_field() {
        // Information is conserved under free propagation: the image-plane
        // rate equals the far-field rate for the same mode.
        let p = params();
        let c = cfg(14, 1);
        let igrid = CartesianGrid2D::centered(1.3e-3, 1.3e-3, 768, 256).unwrap();
        let image = image_fields(&c, &igrid).unwrap();
        let image_info = ideal_information(&image, &p).unwrap();

        let dev = DeviceGridSpec {
            nx: 768,
            ny: 256,
            pad_waists: 6.0,
        }
        .build(&c)
        .unwrap();
        let u_in = gaussian_input(&c, &dev).unwrap();
        let psi = membrane_mode(&c, &dev).unwrap();
        let device_pair = reflect(&u_in, &psi).unwrap();
        let far_grid = FarGridSpec {
            nx: 1024,
            ny: 96,
            pad_waists: 6.0,
        }
        .build(&c, &p)
        .unwrap();
        let far = propagate_pair(&device_pair, &c, &p, &far_grid).unwrap();
        let far_info = ideal_information(&far, &p).unwrap();
        assert_relative_eq!(image_info, far_info, max_relative = 1e-3);
    }
}
