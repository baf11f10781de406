//! Transverse position detection of a Rayleigh-regime dipolar scatterer.
//!
//! A focused, x-polarized probe drives a subwavelength particle at the
//! origin; the forward light is the sum of the diverging probe and the
//! dipole radiation pattern, collected by a lens of numerical aperture
//! `NA_cl` and split on a quadrant detector. On the collection sphere the
//! stationary and signal modes are
//!
//! ```text
//! u∞  = (1/√π) (−sinφ φ̂ + cosφ θ̂) √cosθ
//! u_dip = √(3/8π) (r̂(r̂·x̂) − x̂)
//! u_s,x0 = (r̂·x̂) u_dip,   u_s,y0 = (r̂·ŷ) u_dip
//! ```
//!
//! and the budget integrals run over solid angle with polarization dot
//! products. The ideal information is fixed by the dipole pattern alone:
//! `I_x0 = (4/5) k²α_dip²` and `I_y0 = (8/5) k²α_dip²` over the full
//! sphere, which the quadrature reproduces via the forward/backward mirror
//! symmetry of the radiation pattern.

use num_complex::Complex64;

use crate::detection::{scan_1d, DetectionBudget, ScanResult};
use crate::error::{Error, Result};
use crate::quadrature::{compensated_sum, SolidAngleGrid};

/// Transverse coordinate being tracked. Axial (optical-axis) motion is not
/// supported by this forward-scattering scheme: nearly all of its
/// information sits in the back-scattered field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipoleAxis {
    X0,
    Y0,
}

/// Probe and collection geometry for the dipole scenario.
#[derive(Debug, Clone, Copy)]
pub struct DipoleConfig {
    na_collection: f64,
    amplitude_main: f64,
    amplitude_dipole: f64,
    wavelength: f64,
    axis: DipoleAxis,
    /// Focused-beam phase correction entering only the (unsupported) axial
    /// signal term; stored for completeness, unused by the transverse axes.
    gouy_correction: f64,
}

impl DipoleConfig {
    pub fn new(
        na_collection: f64,
        amplitude_main: f64,
        amplitude_dipole: f64,
        wavelength: f64,
        axis: DipoleAxis,
        gouy_correction: f64,
    ) -> Result<Self> {
        if !(na_collection > 0.0 && na_collection <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "collection NA must lie in (0, 1], got {na_collection}"
            )));
        }
        if !(amplitude_main > 0.0) || !(amplitude_dipole > 0.0) {
            return Err(Error::InvalidParameter(
                "amplitudes must be positive".into(),
            ));
        }
        if !(wavelength > 0.0) {
            return Err(Error::InvalidParameter(
                "wavelength must be positive".into(),
            ));
        }
        Ok(Self {
            na_collection,
            amplitude_main,
            amplitude_dipole,
            wavelength,
            axis,
            gouy_correction,
        })
    }

    pub fn na_collection(&self) -> f64 {
        self.na_collection
    }
    pub fn amplitude_main(&self) -> f64 {
        self.amplitude_main
    }
    pub fn amplitude_dipole(&self) -> f64 {
        self.amplitude_dipole
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn axis(&self) -> DipoleAxis {
        self.axis
    }
    pub fn gouy_correction(&self) -> f64 {
        self.gouy_correction
    }
    pub fn wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.wavelength
    }
}

/// Transverse vector field on a solid-angle grid (θ̂ and φ̂ components).
#[derive(Debug, Clone)]
pub struct VectorFarField {
    grid: SolidAngleGrid,
    e_theta: Vec<Complex64>,
    e_phi: Vec<Complex64>,
}

impl VectorFarField {
    pub fn from_fn(
        grid: &SolidAngleGrid,
        mut f: impl FnMut(f64, f64) -> (Complex64, Complex64),
    ) -> Self {
        let mut e_theta = Vec::with_capacity(grid.len());
        let mut e_phi = Vec::with_capacity(grid.len());
        for i in 0..grid.n_theta() {
            let t = grid.theta_at(i);
            for j in 0..grid.n_phi() {
                let (et, ep) = f(t, grid.phi_at(j));
                e_theta.push(et);
                e_phi.push(ep);
            }
        }
        Self {
            grid: grid.clone(),
            e_theta,
            e_phi,
        }
    }

    pub fn grid(&self) -> &SolidAngleGrid {
        &self.grid
    }
    pub fn e_theta(&self) -> &[Complex64] {
        &self.e_theta
    }
    pub fn e_phi(&self) -> &[Complex64] {
        &self.e_phi
    }

    /// `|u|²` at node `idx`.
    pub fn norm_sqr_at(&self, idx: usize) -> f64 {
        self.e_theta[idx].norm_sqr() + self.e_phi[idx].norm_sqr()
    }

    /// `Re[u* · v]` at node `idx`.
    pub fn dot_re_at(&self, other: &Self, idx: usize) -> f64 {
        (self.e_theta[idx].conj() * other.e_theta[idx]).re
            + (self.e_phi[idx].conj() * other.e_phi[idx]).re
    }

    /// `∫ |u|² dΩ` over the grid.
    pub fn norm_sqr_integral(&self) -> f64 {
        let n_phi = self.grid.n_phi();
        compensated_sum(
            (0..self.grid.len())
                .map(|idx| self.norm_sqr_at(idx) * self.grid.weight_at(idx / n_phi)),
        )
    }
}

/// Collimated-probe mode on the sphere; normalized so the photon rate
/// through a cap of aperture NA is `NA²`.
pub fn u_infinity(grid: &SolidAngleGrid) -> VectorFarField {
    let norm = 1.0 / std::f64::consts::PI.sqrt();
    VectorFarField::from_fn(grid, |theta, phi| {
        let a = norm * theta.cos().sqrt();
        (
            Complex64::new(a * phi.cos(), 0.0),
            Complex64::new(-a * phi.sin(), 0.0),
        )
    })
}

/// Unit-power radiation pattern of an x-oriented dipole at the origin.
pub fn u_dipole(grid: &SolidAngleGrid) -> VectorFarField {
    let norm = (3.0 / (8.0 * std::f64::consts::PI)).sqrt();
    VectorFarField::from_fn(grid, |theta, phi| {
        (
            Complex64::new(-norm * theta.cos() * phi.cos(), 0.0),
            Complex64::new(norm * phi.sin(), 0.0),
        )
    })
}

/// Signal mode for the chosen transverse coordinate,
/// `(r̂·x̂) u_dip` or `(r̂·ŷ) u_dip`.
pub fn signal_field(axis: DipoleAxis, grid: &SolidAngleGrid) -> VectorFarField {
    let norm = (3.0 / (8.0 * std::f64::consts::PI)).sqrt();
    VectorFarField::from_fn(grid, |theta, phi| {
        let proj = match axis {
            DipoleAxis::X0 => theta.sin() * phi.cos(),
            DipoleAxis::Y0 => theta.sin() * phi.sin(),
        };
        (
            Complex64::new(-norm * proj * theta.cos() * phi.cos(), 0.0),
            Complex64::new(norm * proj * phi.sin(), 0.0),
        )
    })
}

/// Stationary and signal modes on one grid.
#[derive(Debug, Clone)]
pub struct DipoleFields {
    pub u0: VectorFarField,
    pub us: VectorFarField,
}

/// Builds the stationary branch and the signal mode for the configured axis
/// on the given cap grid.
pub fn build_fields(cfg: &DipoleConfig, grid: &SolidAngleGrid) -> Result<DipoleFields> {
    Ok(DipoleFields {
        u0: u_infinity(grid),
        us: signal_field(cfg.axis(), grid),
    })
}

/// Azimuthal sign function of a split detector on the sphere. The lens
/// collimates the cap onto a planar quadrant detector, and azimuthal sign
/// survives that mapping: detecting y0 splits on `sign(sinφ)`, x0 on
/// `sign(cosφ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AzimuthalSplit {
    SinPhi,
    CosPhi,
}

impl AzimuthalSplit {
    pub fn for_axis(axis: DipoleAxis) -> Self {
        match axis {
            DipoleAxis::X0 => Self::CosPhi,
            DipoleAxis::Y0 => Self::SinPhi,
        }
    }

    fn value(&self, phi: f64) -> f64 {
        match self {
            Self::SinPhi => phi.sin(),
            Self::CosPhi => phi.cos(),
        }
    }
}

/// Block geometry for a partially blocked split detector on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockShape {
    /// Opaque disc about the optical axis; parameter is the cap half-angle
    /// θ_B (snapped to a θ cell boundary when sampled).
    Cap,
    /// Opaque bar covering the split line of the collimated beam; parameter
    /// is the sine-space half-width s, blocking `|sinθ·split(φ)| < s`.
    Strip,
}

/// Detector weighting over the collection cap.
#[derive(Debug, Clone, Copy)]
pub enum SphereWeight {
    /// Split detector, ±1 on the two azimuthal halves.
    Qpd { split: AzimuthalSplit },
    /// Split detector with a blocked region.
    BlockedQpd {
        split: AzimuthalSplit,
        shape: BlockShape,
        /// Cap half-angle (radians) or sine-space half-width, per `shape`.
        parameter: f64,
    },
    /// Spatially resolved homodyne on the collected light.
    IdealHomodyne,
}

impl SphereWeight {
    pub fn qpd_for(axis: DipoleAxis) -> Self {
        Self::Qpd {
            split: AzimuthalSplit::for_axis(axis),
        }
    }

    fn sample(&self, grid: &SolidAngleGrid) -> Result<Vec<f64>> {
        if !grid.n_phi().is_multiple_of(4) {
            return Err(Error::Misaligned(
                "azimuthal splits require a φ count divisible by 4".into(),
            ));
        }
        match *self {
            Self::Qpd { split } => Ok(grid.sample(|_, phi| split.value(phi).signum())),
            Self::BlockedQpd {
                split,
                shape,
                parameter,
            } => {
                if parameter < 0.0 {
                    return Err(Error::InvalidParameter(
                        "block parameter must be non-negative".into(),
                    ));
                }
                match shape {
                    BlockShape::Cap => {
                        if parameter >= grid.theta_max() {
                            return Err(Error::DomainTooSmall(format!(
                                "cap block {parameter} rad exceeds the collection cap {} rad",
                                grid.theta_max()
                            )));
                        }
                        let snapped = grid.nearest_theta_boundary(parameter);
                        Ok(grid.sample(|theta, phi| {
                            if theta < snapped {
                                0.0
                            } else {
                                split.value(phi).signum()
                            }
                        }))
                    }
                    BlockShape::Strip => {
                        if parameter >= 1.0 {
                            return Err(Error::DomainTooSmall(
                                "strip block covers the entire aperture".into(),
                            ));
                        }
                        Ok(grid.sample(|theta, phi| {
                            let coord = theta.sin() * split.value(phi);
                            if coord.abs() < parameter {
                                0.0
                            } else {
                                coord.signum()
                            }
                        }))
                    }
                }
            }
            Self::IdealHomodyne => Err(Error::InvalidParameter(
                "ideal homodyne weighting has no standalone samples".into(),
            )),
        }
    }
}

/// One collection geometry with its fields and the full-sphere information
/// rate, ready for repeated budget evaluation.
#[derive(Debug, Clone)]
pub struct DipoleScenario {
    cfg: DipoleConfig,
    cap: SolidAngleGrid,
    fields: DipoleFields,
    hemisphere: SolidAngleGrid,
    hemisphere_fields: DipoleFields,
    /// `4 k² α_dip² ∫_{4π} |us|² dΩ`.
    information: f64,
}

impl DipoleScenario {
    pub fn new(cfg: DipoleConfig, n_theta: usize, n_phi: usize) -> Result<Self> {
        let cap = SolidAngleGrid::from_numerical_aperture(cfg.na_collection(), n_theta, n_phi)?;
        let fields = build_fields(&cfg, &cap)?;
        let hemisphere = SolidAngleGrid::new(std::f64::consts::FRAC_PI_2, n_theta, n_phi)?;
        let hemisphere_fields = build_fields(&cfg, &hemisphere)?;
        let k = cfg.wavenumber();
        let ad2 = cfg.amplitude_dipole() * cfg.amplitude_dipole();
        // Forward/backward mirror symmetry of the dipole pattern doubles the
        // forward-hemisphere integral into the full-sphere one.
        let information = 4.0 * k * k * ad2 * 2.0 * hemisphere_fields.us.norm_sqr_integral();
        Ok(Self {
            cfg,
            cap,
            fields,
            hemisphere,
            hemisphere_fields,
            information,
        })
    }

    pub fn cfg(&self) -> &DipoleConfig {
        &self.cfg
    }
    pub fn cap(&self) -> &SolidAngleGrid {
        &self.cap
    }
    pub fn fields(&self) -> &DipoleFields {
        &self.fields
    }
    pub fn hemisphere(&self) -> &SolidAngleGrid {
        &self.hemisphere
    }
    pub fn hemisphere_fields(&self) -> &DipoleFields {
        &self.hemisphere_fields
    }
    /// Full-sphere ideal information rate for the configured axis.
    pub fn information(&self) -> f64 {
        self.information
    }

    /// Detection budget for a weighting over the collection cap. The
    /// information (and hence back action and ideal imprecision) refers to
    /// the full scattered field, not just the collected part.
    pub fn budget(&self, fw: &SphereWeight) -> Result<DetectionBudget> {
        let k = self.cfg.wavenumber();
        let a0 = self.cfg.amplitude_main();
        let ad = self.cfg.amplitude_dipole();
        let grid = &self.cap;
        let n_phi = grid.n_phi();

        if matches!(fw, SphereWeight::IdealHomodyne) {
            // Homodyne against |us| on the collected light only.
            let collected = self.fields.us.norm_sqr_integral();
            if !(collected > 0.0) {
                return Err(Error::DegenerateWeighting);
            }
            return DetectionBudget::from_parts(
                2.0 * ad * ad * k * collected,
                ad * ad * collected,
                self.information,
            );
        }

        let f = fw.sample(grid)?;
        let sensitivity = 2.0
            * k
            * a0
            * ad
            * compensated_sum((0..grid.len()).map(|idx| {
                f[idx] * self.fields.u0.dot_re_at(&self.fields.us, idx)
                    * grid.weight_at(idx / n_phi)
            }));
        let scale = 2.0
            * k
            * a0
            * ad
            * compensated_sum((0..grid.len()).map(|idx| {
                (f[idx] * self.fields.u0.dot_re_at(&self.fields.us, idx)).abs()
                    * grid.weight_at(idx / n_phi)
            }));
        let noise = a0
            * a0
            * compensated_sum((0..grid.len()).map(|idx| {
                f[idx] * f[idx] * self.fields.u0.norm_sqr_at(idx) * grid.weight_at(idx / n_phi)
            }));
        if scale <= 0.0 || sensitivity.abs() < 1e-9 * scale {
            return Err(Error::DegenerateWeighting);
        }
        DetectionBudget::from_parts(sensitivity, noise, self.information)
    }

    /// Fraction of the collected photon rate absorbed by the blocked region
    /// of `fw` (zero for an unblocked weighting).
    pub fn blocked_power_fraction(&self, fw: &SphereWeight) -> Result<f64> {
        let grid = &self.cap;
        let n_phi = grid.n_phi();
        let f = fw.sample(grid)?;
        let total = compensated_sum(
            (0..grid.len())
                .map(|idx| self.fields.u0.norm_sqr_at(idx) * grid.weight_at(idx / n_phi)),
        );
        let open = compensated_sum((0..grid.len()).map(|idx| {
            f[idx] * f[idx] * self.fields.u0.norm_sqr_at(idx) * grid.weight_at(idx / n_phi)
        }));
        Ok(1.0 - open / total)
    }
}

/// Ideal angular efficiency density over the forward hemisphere,
/// `dη/dΩ = 4 k² α_dip² S_ideal |us|²`; the full-sphere integral is 1.
#[derive(Debug, Clone)]
pub struct IrpMap {
    pub grid: SolidAngleGrid,
    pub values: Vec<f64>,
}

impl IrpMap {
    /// Integral over the full sphere (both hemispheres by symmetry).
    pub fn full_sphere_integral(&self) -> f64 {
        let n_phi = self.grid.n_phi();
        2.0 * compensated_sum(
            (0..self.grid.len()).map(|idx| self.values[idx] * self.grid.weight_at(idx / n_phi)),
        )
    }
}

/// Information radiation pattern of the configured axis on the forward
/// hemisphere.
pub fn irp(scenario: &DipoleScenario) -> IrpMap {
    let k = scenario.cfg.wavenumber();
    let ad2 = scenario.cfg.amplitude_dipole() * scenario.cfg.amplitude_dipole();
    let scale = 4.0 * k * k * ad2 / scenario.information;
    let grid = scenario.hemisphere.clone();
    let values = (0..grid.len())
        .map(|idx| scale * scenario.hemisphere_fields.us.norm_sqr_at(idx))
        .collect();
    IrpMap { grid, values }
}

/// Fraction of the information passing the collection aperture,
/// `∫_cap (dη/dΩ)_ideal dΩ`.
pub fn collection_efficiency(scenario: &DipoleScenario) -> f64 {
    let k = scenario.cfg.wavenumber();
    let ad2 = scenario.cfg.amplitude_dipole() * scenario.cfg.amplitude_dipole();
    let scale = 4.0 * k * k * ad2 / scenario.information;
    let grid = &scenario.cap;
    let n_phi = grid.n_phi();
    scale
        * compensated_sum((0..grid.len()).map(|idx| {
            scenario.fields.us.norm_sqr_at(idx) * grid.weight_at(idx / n_phi)
        }))
}

/// Efficiency split into collection and detector parts, `η = η_col·η_det`.
#[derive(Debug, Clone, Copy)]
pub struct EtaSplit {
    pub efficiency: f64,
    pub collection: f64,
    pub detector: f64,
}

pub fn eta_factorization(scenario: &DipoleScenario, fw: &SphereWeight) -> Result<EtaSplit> {
    let efficiency = scenario.budget(fw)?.efficiency;
    let collection = collection_efficiency(scenario);
    Ok(EtaSplit {
        efficiency,
        collection,
        detector: efficiency / collection,
    })
}

/// Angular efficiency density of an explicit weighting over the cap,
/// alongside its ideal counterpart; integrates to the budget's η.
#[derive(Debug, Clone)]
pub struct SphereDdeMap {
    pub grid: SolidAngleGrid,
    pub actual: Vec<f64>,
    pub ideal: Vec<f64>,
}

impl SphereDdeMap {
    pub fn integral(&self) -> f64 {
        let n_phi = self.grid.n_phi();
        compensated_sum(
            (0..self.grid.len()).map(|idx| self.actual[idx] * self.grid.weight_at(idx / n_phi)),
        )
    }
}

pub fn dde_sphere(scenario: &DipoleScenario, fw: &SphereWeight) -> Result<SphereDdeMap> {
    let b = scenario.budget(fw)?;
    let grid = scenario.cap.clone();
    let k = scenario.cfg.wavenumber();
    let a0 = scenario.cfg.amplitude_main();
    let ad = scenario.cfg.amplitude_dipole();
    let s_over_n = b.sensitivity / b.noise;
    let s_ideal = b.ideal_imprecision;
    let ideal_scale = 4.0 * k * k * ad * ad * s_ideal;
    let mut actual = Vec::with_capacity(grid.len());
    let mut ideal = Vec::with_capacity(grid.len());
    if matches!(fw, SphereWeight::IdealHomodyne) {
        for idx in 0..grid.len() {
            let v = ideal_scale * scenario.fields.us.norm_sqr_at(idx);
            actual.push(v);
            ideal.push(v);
        }
    } else {
        let f = fw.sample(&grid)?;
        for (idx, fv) in f.iter().enumerate() {
            ideal.push(ideal_scale * scenario.fields.us.norm_sqr_at(idx));
            let signal = 2.0
                * k
                * a0
                * ad
                * fv
                * scenario.fields.u0.dot_re_at(&scenario.fields.us, idx);
            let noise = a0 * a0 * fv * fv * scenario.fields.u0.norm_sqr_at(idx);
            actual.push(s_ideal * (2.0 * s_over_n * signal - s_over_n * s_over_n * noise));
        }
    }
    Ok(SphereDdeMap {
        grid,
        actual,
        ideal,
    })
}

/// Result of a block-parameter scan on the sphere.
#[derive(Debug, Clone)]
pub struct SphereBlockOptimization {
    pub scan: ScanResult,
    pub shape: BlockShape,
    pub optimal_parameter: f64,
    pub budget_at_optimum: DetectionBudget,
    pub blocked_power_fraction: f64,
}

/// Scans the block parameter (cap half-angle or strip half-width) over
/// `[lo, hi]`, maximizing η for the configured axis.
pub fn block_angle_optimization(
    scenario: &DipoleScenario,
    shape: BlockShape,
    lo: f64,
    hi: f64,
    n_samples: usize,
) -> Result<SphereBlockOptimization> {
    let split = AzimuthalSplit::for_axis(scenario.cfg.axis());
    let weight_of = |p: f64| SphereWeight::BlockedQpd {
        split,
        shape,
        parameter: p,
    };
    let scan = scan_1d(
        |p| Ok(scenario.budget(&weight_of(p))?.efficiency),
        lo,
        hi,
        n_samples,
    )?;
    let best = weight_of(scan.argmax);
    Ok(SphereBlockOptimization {
        scan: scan.clone(),
        shape,
        optimal_parameter: scan.argmax,
        budget_at_optimum: scenario.budget(&best)?,
        blocked_power_fraction: scenario.blocked_power_fraction(&best)?,
    })
}
