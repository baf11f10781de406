//! End-to-end membrane measurement scenarios.
//!
//! A scenario owns the far-field pair for one mode and geometry, so repeated
//! budget evaluations (block scans, wire scans) reuse one propagation. The
//! closed forms for the split detector,
//!
//! ```text
//! S = −4α²k erf(k_m w0/2) e^{−k_m²w0²/4} e^{−k_n²w0²/4}
//! N = α²
//! I = 4α²k² (1 − e^{−k_m²w0²})(1 + e^{−k_n²w0²})
//! ```
//!
//! serve as the analytic cross-check of the numeric pipeline, and the
//! benchmark is a single-mode interferometer with the same reflected power
//! (beam focused on an antinode, matched local oscillator), which saturates
//! the uncertainty product with `S_imp = 1/(16α²k²)`.

use crate::detection::{
    budget, dde_by_exclusion, dde_map, scan_1d, DdeProfile, DetectionBudget, ScanResult,
    SplitAxis, WeightFunction, XStrip,
};
use crate::error::{Error, Result};
use crate::fields::{
    gaussian_input, membrane_mode, optical_lever_fields, propagate_pair, reflect, FieldPair,
    MembraneConfig, OpticalParams, RealField, ScalarFieldGrid,
};
use crate::quadrature::{compensated_sum, CartesianGrid2D};

/// Resolution of the device-plane grid (spans ±`pad_waists`·w0).
#[derive(Debug, Clone, Copy)]
pub struct DeviceGridSpec {
    pub nx: usize,
    pub ny: usize,
    pub pad_waists: f64,
}

impl Default for DeviceGridSpec {
    fn default() -> Self {
        Self {
            nx: 1024,
            ny: 256,
            pad_waists: 6.0,
        }
    }
}

impl DeviceGridSpec {
    pub fn build(&self, cfg: &MembraneConfig) -> Result<CartesianGrid2D> {
        let half = self.pad_waists * cfg.waist();
        CartesianGrid2D::centered(half, half, self.nx, self.ny)
    }
}

/// Resolution of the far-field grid. The x extent reaches
/// `z_d k_m/k + pad_waists·w_d` so both first-order diffraction lobes fit;
/// y spans `±pad_waists·w_d`.
#[derive(Debug, Clone, Copy)]
pub struct FarGridSpec {
    pub nx: usize,
    pub ny: usize,
    pub pad_waists: f64,
}

impl Default for FarGridSpec {
    fn default() -> Self {
        Self {
            nx: 1024,
            ny: 256,
            pad_waists: 6.0,
        }
    }
}

impl FarGridSpec {
    pub fn build(&self, cfg: &MembraneConfig, params: &OpticalParams) -> Result<CartesianGrid2D> {
        let wd = cfg.far_field_waist(params);
        let lobe = cfg.detection_distance() * cfg.mode_wavenumber_x() / params.wavenumber();
        CartesianGrid2D::centered(
            lobe + self.pad_waists * wd,
            self.pad_waists * wd,
            self.nx,
            self.ny,
        )
    }
}

/// One mode, one geometry, far-field pair ready for budget evaluation.
#[derive(Debug, Clone)]
pub struct MembraneScenario {
    cfg: MembraneConfig,
    params: OpticalParams,
    fields: FieldPair,
}

impl MembraneScenario {
    /// Full numeric pipeline: Gaussian probe, phase-imprinted reflection,
    /// far-field propagation.
    pub fn propagate(
        cfg: MembraneConfig,
        params: OpticalParams,
        device: &DeviceGridSpec,
        far: &FarGridSpec,
    ) -> Result<Self> {
        let dev_grid = device.build(&cfg)?;
        let u_in = gaussian_input(&cfg, &dev_grid)?;
        let psi = membrane_mode(&cfg, &dev_grid)?;
        let device_pair = reflect(&u_in, &psi)?;
        let far_grid = far.build(&cfg, &params)?;
        let fields = propagate_pair(&device_pair, &cfg, &params, &far_grid)?;
        Ok(Self {
            cfg,
            params,
            fields,
        })
    }

    /// Analytic tilting-mirror fields, bypassing propagation. Valid only in
    /// the long-mechanical-wavelength regime.
    pub fn optical_lever(
        cfg: MembraneConfig,
        params: OpticalParams,
        far: &FarGridSpec,
    ) -> Result<Self> {
        let wd = cfg.far_field_waist(&params);
        let grid =
            CartesianGrid2D::centered(far.pad_waists * wd, far.pad_waists * wd, far.nx, far.ny)?;
        let fields = optical_lever_fields(&cfg, &params, &grid)?;
        Ok(Self {
            cfg,
            params,
            fields,
        })
    }

    pub fn cfg(&self) -> &MembraneConfig {
        &self.cfg
    }
    pub fn params(&self) -> &OpticalParams {
        &self.params
    }
    pub fn fields(&self) -> &FieldPair {
        &self.fields
    }
    pub fn grid(&self) -> &CartesianGrid2D {
        self.fields.grid()
    }
    pub fn far_field_waist(&self) -> f64 {
        self.cfg.far_field_waist(&self.params)
    }

    pub fn budget(&self, fw: &WeightFunction) -> Result<DetectionBudget> {
        budget(&self.fields, fw, &self.params)
    }

    pub fn dde(&self, fw: &WeightFunction) -> Result<(DetectionBudget, DdeProfile)> {
        let b = self.budget(fw)?;
        let profile = dde_map(&self.fields, fw, &self.params, &b)?;
        Ok((b, profile))
    }

    /// Fraction of the stationary power falling inside `|x| < width/2`.
    pub fn power_fraction_in_strip(&self, width: f64) -> f64 {
        let grid = self.grid();
        let u0 = self.fields.u0().values();
        let half = width / 2.0;
        let total = compensated_sum(u0.iter().map(|v| v.norm_sqr()));
        if total == 0.0 {
            return 0.0;
        }
        let mut inside = 0.0;
        for i in 0..grid.nx() {
            if grid.x_at(i).abs() < half {
                let lo = i * grid.ny();
                inside += compensated_sum(u0[lo..lo + grid.ny()].iter().map(|v| v.norm_sqr()));
            }
        }
        inside / total
    }
}

/// Closed-form split-detector budget for a membrane mode.
pub fn analytic_budget(cfg: &MembraneConfig, params: &OpticalParams) -> Result<DetectionBudget> {
    if !cfg.mode_m().is_multiple_of(2) || cfg.mode_n().is_multiple_of(2) {
        return Err(Error::UnsupportedMode {
            m: cfg.mode_m(),
            n: cfg.mode_n(),
        });
    }
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    let a = cfg.grating_parameter_x();
    let b = cfg.grating_parameter_y();
    let sensitivity =
        -4.0 * alpha2 * k * libm::erf(a / 2.0) * (-a * a / 4.0).exp() * (-b * b / 4.0).exp();
    let information = 4.0 * alpha2 * k * k * (1.0 - (-a * a).exp()) * (1.0 + (-b * b).exp());
    DetectionBudget::from_parts(sensitivity, alpha2, information)
}

/// Single-mode interferometer with the same reflected power: beam focused
/// on an antinode, matched local oscillator reading the phase quadrature.
/// Saturates the uncertainty product (`η = 1`).
///
/// Assembled from its closed forms, so `imprecision` is exactly
/// `1/(16 α² k²)`.
pub fn interferometer_benchmark(params: &OpticalParams) -> DetectionBudget {
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    let information = 16.0 * alpha2 * k * k;
    let ideal = 1.0 / information;
    DetectionBudget {
        sensitivity: 4.0 * alpha2 * k,
        noise: alpha2,
        information,
        imprecision: ideal,
        ideal_imprecision: ideal,
        efficiency: 1.0,
        back_action: 0.25 * crate::fields::HBAR * crate::fields::HBAR * information,
    }
}

/// Back-action force noise evaluated at the device plane,
/// `4 α² (ħk)² ∫ |u_in|² ψ² da` — the incoherent sum of local radiation
/// pressure fluctuations over the reflecting surface.
pub fn back_action_device_plane(
    cfg: &MembraneConfig,
    params: &OpticalParams,
    grid: &CartesianGrid2D,
) -> Result<f64> {
    let u_in = gaussian_input(cfg, grid)?;
    let psi = membrane_mode(cfg, grid)?;
    Ok(back_action_of(&u_in, &psi, params))
}

/// Device-plane back action for an arbitrary surface profile.
pub fn back_action_of(u_in: &ScalarFieldGrid, psi: &RealField, params: &OpticalParams) -> f64 {
    let hk = crate::fields::HBAR * params.wavenumber();
    let integral = compensated_sum(
        u_in.values()
            .iter()
            .zip(psi.values())
            .map(|(u, p)| u.norm_sqr() * p * p),
    ) * u_in.grid().cell_area();
    4.0 * params.photon_rate() * hk * hk * integral
}

/// Result of a block-width scan on one scenario.
#[derive(Debug, Clone)]
pub struct BlockOptimization {
    pub scan: ScanResult,
    /// Block width actually applied at the optimum (snapped to the grid).
    pub optimal_width: f64,
    pub budget_at_optimum: DetectionBudget,
    /// Fraction of the stationary power absorbed by the optimal block.
    pub blocked_power_fraction: f64,
}

/// Scans the centered block width over `[b_lo, b_hi]`, maximizing η.
///
/// Each sample is snapped so the block edges lie on grid cell boundaries;
/// the objective is therefore exact at every sampled width.
pub fn block_optimization(
    scenario: &MembraneScenario,
    b_lo: f64,
    b_hi: f64,
    n_samples: usize,
) -> Result<BlockOptimization> {
    let grid = scenario.grid();
    let eta_of = |b: f64| -> Result<f64> {
        let (fw, _) = WeightFunction::blocked_qpd_snapped(SplitAxis::X, b, grid);
        Ok(scenario.budget(&fw)?.efficiency)
    };
    let scan = scan_1d(eta_of, b_lo, b_hi, n_samples)?;
    let (fw, optimal_width) = WeightFunction::blocked_qpd_snapped(SplitAxis::X, scan.argmax, grid);
    let budget_at_optimum = scenario.budget(&fw)?;
    let blocked_power_fraction = scenario.power_fraction_in_strip(optimal_width);
    Ok(BlockOptimization {
        scan,
        optimal_width,
        budget_at_optimum,
        blocked_power_fraction,
    })
}

/// Per-mode row of the sensitivity comparison against the single-mode
/// interferometer benchmark.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub mode_m: u32,
    pub mode_n: u32,
    /// `k_m w0`.
    pub grating_parameter: f64,
    /// Standard split-detector efficiency.
    pub efficiency: f64,
    /// `S_imp / S_imp_interferometer` for the standard split detector.
    pub imprecision_ratio: f64,
    /// `S_ba / S_ba_interferometer` (weighting-independent).
    pub back_action_ratio: f64,
    /// Populated when the sweep also optimizes a centered block per mode.
    pub blocked: Option<BlockedRow>,
}

#[derive(Debug, Clone)]
pub struct BlockedRow {
    pub efficiency: f64,
    pub imprecision_ratio: f64,
    pub optimal_width_over_waist: f64,
    pub blocked_power_fraction: f64,
}

/// Block-scan settings for [`relative_sensitivity_sweep`].
#[derive(Debug, Clone, Copy)]
pub struct BlockScanSpec {
    /// Upper scan limit in units of the far-field waist.
    pub max_width_waists: f64,
    pub n_samples: usize,
}

impl Default for BlockScanSpec {
    fn default() -> Self {
        Self {
            max_width_waists: 3.0,
            n_samples: 201,
        }
    }
}

/// Runs the numeric pipeline for a list of modes and reports imprecision,
/// efficiency and back action relative to the interferometer benchmark,
/// optionally with a per-mode optimized block.
pub fn relative_sensitivity_sweep(
    modes: &[(u32, u32)],
    cfg_template: &MembraneConfig,
    params: &OpticalParams,
    device: &DeviceGridSpec,
    far: &FarGridSpec,
    block: Option<BlockScanSpec>,
) -> Result<Vec<SweepRow>> {
    let bench = interferometer_benchmark(params);
    let mut rows = Vec::with_capacity(modes.len());
    for &(m, n) in modes {
        let cfg = cfg_template.with_mode(m, n)?;
        let scenario = MembraneScenario::propagate(cfg, *params, device, far)?;
        let standard = scenario.budget(&WeightFunction::qpd(SplitAxis::X))?;
        let blocked = match block {
            Some(spec) => {
                let wd = scenario.far_field_waist();
                let opt = block_optimization(
                    &scenario,
                    0.0,
                    spec.max_width_waists * wd,
                    spec.n_samples,
                )?;
                Some(BlockedRow {
                    efficiency: opt.budget_at_optimum.efficiency,
                    imprecision_ratio: opt.budget_at_optimum.imprecision / bench.imprecision,
                    optimal_width_over_waist: opt.optimal_width / wd,
                    blocked_power_fraction: opt.blocked_power_fraction,
                })
            }
            None => None,
        };
        rows.push(SweepRow {
            mode_m: m,
            mode_n: n,
            grating_parameter: cfg.grating_parameter_x(),
            efficiency: standard.efficiency,
            imprecision_ratio: standard.imprecision / bench.imprecision,
            back_action_ratio: standard.back_action / bench.back_action,
            blocked,
        });
    }
    rows.sort_by(|a, b| {
        a.grating_parameter
            .partial_cmp(&b.grating_parameter)
            .expect("finite grating parameters")
    });
    Ok(rows)
}

/// Simulated wire scan: the measured points of a finite-difference
/// efficiency profile.
#[derive(Debug, Clone)]
pub struct WireScan {
    /// Wire centers actually used (snapped to the grid).
    pub x: Vec<f64>,
    /// Exclusion estimates `(η − η_wire)/Δx`, 1/m.
    pub estimate: Vec<f64>,
    /// Wire width actually used (snapped to the grid).
    pub width: f64,
}

/// Scans an opaque wire of the given width across the detection plane and
/// records the finite-difference efficiency estimate at each position.
///
/// The wire width must stay below the far-field waist for the estimate to
/// resolve the profile.
pub fn wire_scan_sim(
    scenario: &MembraneScenario,
    fw: &WeightFunction,
    wire_width: f64,
    positions: &[f64],
) -> Result<WireScan> {
    if !(wire_width > 0.0 && wire_width < scenario.far_field_waist()) {
        return Err(Error::InvalidParameter(format!(
            "wire width {wire_width:.3e} must be positive and below the far-field waist {:.3e}",
            scenario.far_field_waist()
        )));
    }
    let grid = scenario.grid();
    let mut x = Vec::with_capacity(positions.len());
    let mut estimate = Vec::with_capacity(positions.len());
    let mut width = wire_width;
    for &pos in positions {
        let strip = XStrip::snapped(pos, wire_width, grid);
        width = strip.width;
        x.push(strip.center);
        estimate.push(dde_by_exclusion(
            &scenario.fields,
            fw,
            &scenario.params,
            &strip,
        )?);
    }
    Ok(WireScan { x, estimate, width })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> OpticalParams {
        OpticalParams::new(1.064e-6, 1.0).unwrap()
    }

    /// Tabletop geometry: modes run along the 1.5 mm side, 100 um waist,
    /// 560 um far-field waist.
    fn cfg(m: u32, n: u32) -> MembraneConfig {
        let w0 = 100e-6;
        let zd = 560e-6 * params().wavenumber() * w0;
        MembraneConfig::new(1.5e-3, 3.5e-3, m, n, w0, zd).unwrap()
    }

    fn lever_cfg(km_w0: f64) -> MembraneConfig {
        let w0 = 100e-6;
        let km = km_w0 / w0;
        let lx = std::f64::consts::PI * 2.0 / km;
        let zd = 560e-6 * params().wavenumber() * w0;
        MembraneConfig::new(lx, 3.5e-3, 2, 1, w0, zd).unwrap()
    }

    fn small_device() -> DeviceGridSpec {
        DeviceGridSpec {
            nx: 512,
            ny: 192,
            pad_waists: 6.0,
        }
    }

    fn small_far() -> FarGridSpec {
        FarGridSpec {
            nx: 768,
            ny: 96,
            pad_waists: 6.0,
        }
    }

    #[test]
    fn analytic_matches_numeric_pipeline() {
        let p = params();
        let c = cfg(2, 1);
        let scenario = MembraneScenario::propagate(c, p, &small_device(), &small_far()).unwrap();
        let numeric = scenario.budget(&WeightFunction::qpd(SplitAxis::X)).unwrap();
        let analytic = analytic_budget(&c, &p).unwrap();
        assert_relative_eq!(numeric.sensitivity, analytic.sensitivity, max_relative = 1e-3);
        assert_relative_eq!(numeric.noise, analytic.noise, max_relative = 1e-3);
        assert_relative_eq!(numeric.information, analytic.information, max_relative = 1e-3);
        assert_relative_eq!(numeric.efficiency, analytic.efficiency, max_relative = 1e-3);
    }

    #[test]
    fn analytic_limits() {
        let p = params();
        // Long-wavelength limit -> 2/pi.
        let c = lever_cfg(0.02);
        let b = analytic_budget(&c, &p).unwrap();
        assert_relative_eq!(b.efficiency, 2.0 / std::f64::consts::PI, max_relative = 1e-3);
        // Deep grating limit: information saturates at 4 α² k².
        let c = MembraneConfig::new(1.5e-3, 3.5e-3, 40, 21, 400e-6, 0.33).unwrap();
        let b = analytic_budget(&c, &p).unwrap();
        assert_relative_eq!(
            b.information,
            4.0 * p.photon_rate() * p.wavenumber() * p.wavenumber(),
            max_relative = 1e-6
        );
        assert!(matches!(
            analytic_budget(&cfg(3, 1), &p),
            Err(Error::UnsupportedMode { .. })
        ));
    }

    #[test]
    fn interferometer_saturates_uncertainty() {
        let p = OpticalParams::new(1.064e-6, 2.5).unwrap();
        let b = interferometer_benchmark(&p);
        let expected = 1.0 / (16.0 * p.photon_rate() * p.wavenumber() * p.wavenumber());
        assert_eq!(b.imprecision, expected);
        assert_eq!(b.efficiency, 1.0);
        assert_relative_eq!(
            b.uncertainty_product(),
            0.25 * crate::fields::HBAR * crate::fields::HBAR,
            max_relative = 1e-15
        );
        let hk = crate::fields::HBAR * p.wavenumber();
        assert_relative_eq!(
            b.back_action,
            4.0 * p.photon_rate() * hk * hk,
            max_relative = 1e-12
        );
    }

    #[test]
    fn back_action_plane_independence() {
        let p = params();
        let c = cfg(4, 1);
        let dev = small_device().build(&c).unwrap();
        let device_value = back_action_device_plane(&c, &p, &dev).unwrap();
        let scenario = MembraneScenario::propagate(c, p, &small_device(), &small_far()).unwrap();
        let far_value = scenario
            .budget(&WeightFunction::qpd(SplitAxis::X))
            .unwrap()
            .back_action;
        assert_relative_eq!(device_value, far_value, max_relative = 1e-3);
    }

    #[test]
    fn back_action_flat_and_null_profiles() {
        let p = params();
        let c = cfg(2, 1);
        let grid = small_device().build(&c).unwrap();
        let u_in = gaussian_input(&c, &grid).unwrap();
        // Focus on an antinode: psi = 1 reproduces the interferometer value.
        let flat = RealField::constant(&grid, 1.0);
        let hk = crate::fields::HBAR * p.wavenumber();
        assert_relative_eq!(
            back_action_of(&u_in, &flat, &p),
            4.0 * p.photon_rate() * hk * hk,
            max_relative = 1e-9
        );
        let zero = RealField::constant(&grid, 0.0);
        assert_eq!(back_action_of(&u_in, &zero, &p), 0.0);
    }

    #[test]
    fn lever_block_scan_hits_known_optimum() {
        let p = params();
        let c = lever_cfg(0.1);
        let far = FarGridSpec {
            nx: 4096,
            ny: 64,
            pad_waists: 8.0,
        };
        let scenario = MembraneScenario::optical_lever(c, p, &far).unwrap();
        let wd = scenario.far_field_waist();
        let opt = block_optimization(&scenario, 0.0, 3.0 * wd, 201).unwrap();
        assert!((opt.scan.argmax / wd - 0.87).abs() < 0.02);
        assert!((opt.budget_at_optimum.efficiency - 0.81).abs() < 0.01);
        assert!((opt.blocked_power_fraction - 0.46).abs() < 0.01);
        // Closed form over the scanned range.
        for s in opt.scan.samples.iter().step_by(20) {
            let (_, b_snap) =
                WeightFunction::blocked_qpd_snapped(SplitAxis::X, s.x, scenario.grid());
            let u = b_snap / wd;
            let expected = 2.0 / std::f64::consts::PI * (-u * u / 2.0).exp()
                / (1.0 - libm::erf(u / 2.0));
            assert_relative_eq!(s.value, expected, max_relative = 1e-3);
        }
        // Single-peaked: at most one sign change of the discrete derivative.
        let values: Vec<f64> = opt.scan.samples.iter().map(|s| s.value).collect();
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
        assert!(sign_changes <= 1, "η(B) has {sign_changes} derivative sign changes");
    }

    #[test]
    fn optimal_block_removes_negative_profile() {
        // After blocking at the optimum the efficiency profile is no longer
        // negative anywhere (to 1e-3 of its peak).
        let p = params();
        let far = FarGridSpec {
            nx: 2048,
            ny: 64,
            pad_waists: 8.0,
        };
        let lever = MembraneScenario::optical_lever(lever_cfg(0.1), p, &far).unwrap();
        let wd = lever.far_field_waist();
        let opt = block_optimization(&lever, 0.0, 3.0 * wd, 101).unwrap();
        let (fw, _) = WeightFunction::blocked_qpd_snapped(
            SplitAxis::X,
            opt.optimal_width,
            lever.grid(),
        );
        let (_, profile) = lever.dde(&fw).unwrap();
        let peak = profile.peak();
        let min = profile.actual.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-3 * peak, "min/peak = {}", min / peak);

        // Same statement for a propagated mode in the grating regime.
        let scenario = MembraneScenario::propagate(
            cfg(6, 1),
            p,
            &small_device(),
            &FarGridSpec {
                nx: 1024,
                ny: 64,
                pad_waists: 6.0,
            },
        )
        .unwrap();
        let wd = scenario.far_field_waist();
        let opt = block_optimization(&scenario, 0.0, 3.0 * wd, 101).unwrap();
        let (fw, _) = WeightFunction::blocked_qpd_snapped(
            SplitAxis::X,
            opt.optimal_width,
            scenario.grid(),
        );
        let (_, profile) = scenario.dde(&fw).unwrap();
        let peak = profile.peak();
        let min = profile.actual.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-3 * peak, "(6,1) min/peak = {}", min / peak);
    }

    #[test]
    fn blocked_sweep_rows_beat_standard() {
        let p = params();
        let rows = relative_sensitivity_sweep(
            &[(2, 1), (6, 1)],
            &cfg(2, 1),
            &p,
            &small_device(),
            &FarGridSpec {
                nx: 1024,
                ny: 64,
                pad_waists: 6.0,
            },
            Some(BlockScanSpec {
                max_width_waists: 3.0,
                n_samples: 61,
            }),
        )
        .unwrap();
        for r in &rows {
            let b = r.blocked.as_ref().unwrap();
            assert!(
                b.efficiency >= r.efficiency,
                "({},{}) blocked {} < standard {}",
                r.mode_m,
                r.mode_n,
                b.efficiency,
                r.efficiency
            );
        }
    }

    #[test]
    fn zero_block_range_returns_standard_budget() {
        let p = params();
        let c = lever_cfg(0.1);
        let scenario = MembraneScenario::optical_lever(c, p, &small_far()).unwrap();
        let opt = block_optimization(&scenario, 0.0, 0.5 * scenario.grid().dx(), 3).unwrap();
        let standard = scenario.budget(&WeightFunction::qpd(SplitAxis::X)).unwrap();
        assert_relative_eq!(
            opt.budget_at_optimum.efficiency,
            standard.efficiency,
            max_relative = 1e-12
        );
        assert_eq!(opt.optimal_width, 0.0);
    }

    #[test]
    fn sweep_lever_row_matches_ratio() {
        let p = params();
        let w0 = 100e-6;
        let zd = 560e-6 * p.wavenumber() * w0;
        // Long side keeps (2,1) deep in the tilting-mirror regime where the
        // imprecision ratio reduces to π/(k_m w0)².
        let template = MembraneConfig::new(14e-3, 3.5e-3, 2, 1, w0, zd).unwrap();
        let rows = relative_sensitivity_sweep(
            &[(2, 1)],
            &template,
            &p,
            &small_device(),
            &small_far(),
            None,
        )
        .unwrap();
        let g = rows[0].grating_parameter;
        assert_relative_eq!(
            rows[0].imprecision_ratio,
            std::f64::consts::PI / (g * g),
            max_relative = 0.02
        );
    }

    #[test]
    fn sweep_efficiency_decreases_past_crossover() {
        let p = params();
        let template = cfg(2, 1);
        let rows = relative_sensitivity_sweep(
            &[(6, 1), (8, 1), (10, 1)],
            &template,
            &p,
            &small_device(),
            &FarGridSpec {
                nx: 1024,
                ny: 96,
                pad_waists: 6.0,
            },
            None,
        )
        .unwrap();
        // Beyond k_m w0 ≈ 1 the standard split detector loses efficiency.
        assert!(rows[0].grating_parameter > 1.0);
        assert!(rows[0].efficiency > rows[1].efficiency);
        assert!(rows[1].efficiency > rows[2].efficiency);
    }

    #[test]
    fn wire_scan_matches_fine_limit() {
        let p = params();
        let c = lever_cfg(0.1);
        let far = FarGridSpec {
            nx: 2048,
            ny: 64,
            pad_waists: 6.0,
        };
        let scenario = MembraneScenario::optical_lever(c, p, &far).unwrap();
        let wd = scenario.far_field_waist();
        let fw = WeightFunction::qpd(SplitAxis::X);
        let (_, profile) = scenario.dde(&fw).unwrap();
        let positions: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.2 * wd).collect();
        let scan = wire_scan_sim(&scenario, &fw, wd / 200.0, &positions).unwrap();
        let peak = profile.peak();
        for (x, est) in scan.x.iter().zip(&scan.estimate) {
            let i = profile
                .x
                .iter()
                .position(|&px| (px - x).abs() < 0.5 * profile.dx)
                .unwrap();
            assert!(
                (est - profile.actual[i]).abs() <= 0.01 * peak,
                "x = {x}: {est} vs {}",
                profile.actual[i]
            );
        }
    }

    #[test]
    fn wire_scan_rejects_wide_wire_and_outside_positions() {
        let p = params();
        let c = lever_cfg(0.1);
        let scenario = MembraneScenario::optical_lever(c, p, &small_far()).unwrap();
        let wd = scenario.far_field_waist();
        let fw = WeightFunction::qpd(SplitAxis::X);
        assert!(wire_scan_sim(&scenario, &fw, 2.0 * wd, &[0.0]).is_err());
        let outside = scenario.grid().x_max() + wd;
        assert!(wire_scan_sim(&scenario, &fw, wd / 10.0, &[outside]).is_err());
    }
}
