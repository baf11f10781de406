//! Detector weightings and the detection budget.
//!
//! A detection scheme is a real weight function `f_w` over the detection
//! plane. For a field pair `(u0, us)` and amplitude α the scheme has
//!
//! ```text
//! sensitivity  S = 2 α² k ∫ f_w Re[u0 us*] da        (signal slope dV/dA)
//! shot noise   N = α² ∫ |u0|² f_w² da                 (white noise power)
//! information  I = 4 α² k² ∫ |us|² da                 (ideal signal rate)
//! ```
//!
//! from which the imprecision `N/S²`, the ideal imprecision `1/I`, the
//! efficiency `η = S²/(N·I) ∈ [0, 1]` and the back-action force noise
//! `(ħ/2)²·I` follow. The differential efficiency profile maps each
//! detection-plane location's contribution to η; its integral recovers η,
//! and regions where it is negative flag detector area whose shot noise
//! outweighs its signal.


use crate::error::{Error, Result};
use crate::fields::{FieldPair, OpticalParams, RealField, HBAR};
use crate::quadrature::{compensated_sum, CartesianGrid2D};

/// Relative threshold below which a sensitivity is treated as an exact
/// cancellation (wrong split axis, vanishing signal).
const DEGENERACY_RATIO: f64 = 1e-9;

/// Which coordinate a split detector separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitAxis {
    X,
    Y,
}

/// Detector weight function over a Cartesian detection plane.
#[derive(Debug, Clone)]
pub enum WeightFunction {
    /// Split detector: ±1 on the two halves.
    Qpd { axis: SplitAxis },
    /// Split detector with a centered opaque strip of the given width.
    BlockedQpd { axis: SplitAxis, block_width: f64 },
    /// Proportional weighting `f = x / scale` (position-sensing diode).
    Linear { scale: f64 },
    /// 1-D array of alternating ±1 elements of the given pitch, with a
    /// symmetric gap fraction removed around each element boundary.
    /// `phase` is the center of the first positive element.
    Array1d {
        pitch: f64,
        gap_fraction: f64,
        phase: f64,
    },
    /// Single-detector mask transmitting where `sin(kx·x)·cos(ky·y)`
    /// exceeds the threshold.
    ThresholdMask {
        wavenumber_x: f64,
        wavenumber_y: f64,
        threshold: f64,
    },
    /// Arbitrary per-node weighting.
    Custom(RealField),
    /// Spatially resolved homodyne with `f_w = |us|`; saturates η = 1.
    IdealHomodyne,
}

fn is_on_step(v: f64, dx: f64) -> bool {
    let steps = v / dx;
    (steps - steps.round()).abs() <= 1e-6 * steps.abs().max(1.0)
}

impl WeightFunction {
    pub fn qpd(axis: SplitAxis) -> Self {
        Self::Qpd { axis }
    }

    pub fn blocked_qpd(axis: SplitAxis, block_width: f64) -> Self {
        Self::BlockedQpd { axis, block_width }
    }

    /// Blocked split detector with the block width snapped so its edges lie
    /// on cell boundaries of `grid`. Returns the weighting and the width
    /// actually used.
    pub fn blocked_qpd_snapped(
        axis: SplitAxis,
        block_width: f64,
        grid: &CartesianGrid2D,
    ) -> (Self, f64) {
        let d = match axis {
            SplitAxis::X => grid.dx(),
            SplitAxis::Y => grid.dy(),
        };
        let half = (block_width / 2.0 / d).round() * d;
        let snapped = (2.0 * half).max(0.0);
        (
            Self::BlockedQpd {
                axis,
                block_width: snapped,
            },
            snapped,
        )
    }

    pub fn linear(scale: f64) -> Self {
        Self::Linear { scale }
    }

    pub fn array_1d(pitch: f64, gap_fraction: f64, phase: f64) -> Self {
        Self::Array1d {
            pitch,
            gap_fraction,
            phase,
        }
    }

    pub fn threshold_mask(wavenumber_x: f64, wavenumber_y: f64, threshold: f64) -> Self {
        Self::ThresholdMask {
            wavenumber_x,
            wavenumber_y,
            threshold,
        }
    }

    pub fn custom(samples: RealField) -> Self {
        Self::Custom(samples)
    }

    pub fn ideal_homodyne() -> Self {
        Self::IdealHomodyne
    }

    /// Samples the weighting at every node of `grid`.
    ///
    /// Step discontinuities must lie on cell boundaries; constructors are
    /// expected to snap their geometry (`blocked_qpd_snapped`) or the call
    /// refuses. The ideal-homodyne weighting has no explicit samples and is
    /// rejected here; budget evaluation special-cases it.
    pub fn sample(&self, grid: &CartesianGrid2D) -> Result<RealField> {
        match self {
            Self::Qpd { axis } => {
                self.check_split_alignment(*axis, grid, 0.0)?;
                Ok(match axis {
                    SplitAxis::X => RealField::from_fn(grid, |x, _| x.signum()),
                    SplitAxis::Y => RealField::from_fn(grid, |_, y| y.signum()),
                })
            }
            Self::BlockedQpd { axis, block_width } => {
                if *block_width < 0.0 {
                    return Err(Error::InvalidParameter(
                        "block width must be non-negative".into(),
                    ));
                }
                self.check_split_alignment(*axis, grid, *block_width)?;
                let half = block_width / 2.0;
                Ok(match axis {
                    SplitAxis::X => RealField::from_fn(grid, |x, _| {
                        if x.abs() < half {
                            0.0
                        } else {
                            x.signum()
                        }
                    }),
                    SplitAxis::Y => RealField::from_fn(grid, |_, y| {
                        if y.abs() < half {
                            0.0
                        } else {
                            y.signum()
                        }
                    }),
                })
            }
            Self::Linear { scale } => {
                if !(*scale != 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "linear weighting scale must be non-zero".into(),
                    ));
                }
                let s = *scale;
                Ok(RealField::from_fn(grid, |x, _| x / s))
            }
            Self::Array1d {
                pitch,
                gap_fraction,
                phase,
            } => {
                if !(*pitch > 0.0) {
                    return Err(Error::InvalidParameter("array pitch must be positive".into()));
                }
                if !(0.0..1.0).contains(gap_fraction) {
                    return Err(Error::InvalidParameter(format!(
                        "gap fraction must lie in [0, 1), got {gap_fraction}"
                    )));
                }
                let dx = grid.dx();
                let half_width = (1.0 - gap_fraction) * pitch / 2.0;
                for (name, v) in [
                    ("pitch", *pitch),
                    ("phase - half width", phase - half_width),
                    ("phase + half width", phase + half_width),
                ] {
                    if !is_on_step(v, dx) {
                        return Err(Error::Misaligned(format!(
                            "array {name} = {v:.6e} is not commensurate with dx = {dx:.6e}"
                        )));
                    }
                }
                let (p, hw, ph) = (*pitch, half_width, *phase);
                Ok(RealField::from_fn(grid, |x, _| {
                    let j = ((x - ph) / p).round();
                    let center = ph + j * p;
                    if (x - center).abs() < hw {
                        if (j as i64).rem_euclid(2) == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        0.0
                    }
                }))
            }
            Self::ThresholdMask {
                wavenumber_x,
                wavenumber_y,
                threshold,
            } => {
                if *threshold >= 1.0 {
                    return Err(Error::DegenerateWeighting);
                }
                let (kx, ky, t) = (*wavenumber_x, *wavenumber_y, *threshold);
                Ok(RealField::from_fn(grid, |x, y| {
                    if (kx * x).sin() * (ky * y).cos() > t {
                        1.0
                    } else {
                        0.0
                    }
                }))
            }
            Self::Custom(samples) => {
                if samples.grid() != grid {
                    return Err(Error::InvalidGrid(
                        "custom weighting sampled on a different grid".into(),
                    ));
                }
                Ok(samples.clone())
            }
            Self::IdealHomodyne => Err(Error::InvalidParameter(
                "ideal homodyne weighting has no standalone samples".into(),
            )),
        }
    }

    fn check_split_alignment(
        &self,
        axis: SplitAxis,
        grid: &CartesianGrid2D,
        block_width: f64,
    ) -> Result<()> {
        let (lo, hi, d, n) = match axis {
            SplitAxis::X => (grid.x_min(), grid.x_max(), grid.dx(), grid.nx()),
            SplitAxis::Y => (grid.y_min(), grid.y_max(), grid.dy(), grid.ny()),
        };
        if (lo + hi).abs() > 1e-9 * d || n % 2 != 0 {
            return Err(Error::Misaligned(
                "split detector requires a symmetric grid with the split on a cell boundary"
                    .into(),
            ));
        }
        if block_width > 0.0 && !is_on_step(block_width / 2.0, d) {
            return Err(Error::Misaligned(format!(
                "block edge at {:.6e} is not on a cell boundary (spacing {:.6e})",
                block_width / 2.0,
                d
            )));
        }
        Ok(())
    }
}

/// All detection functionals of one scheme for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBudget {
    /// Signed signal slope `S`, photons/(s·m).
    pub sensitivity: f64,
    /// Shot-noise power `N`, photons/s.
    pub noise: f64,
    /// Ideal information rate `I = 4α²k²∫|us|²`, 1/(s·m²).
    pub information: f64,
    /// Imprecision spectral density `N/S²`, m²/Hz.
    pub imprecision: f64,
    /// Best reachable imprecision `1/I`, m²/Hz.
    pub ideal_imprecision: f64,
    /// Detection efficiency `η = S²/(N·I)`.
    pub efficiency: f64,
    /// Back-action force noise `(ħ/2)²·I`, N²/Hz.
    pub back_action: f64,
}

impl DetectionBudget {
    /// Assembles the derived quantities from the three raw integrals.
    pub fn from_parts(sensitivity: f64, noise: f64, information: f64) -> Result<Self> {
        if sensitivity == 0.0 || !sensitivity.is_finite() {
            return Err(Error::DegenerateWeighting);
        }
        if !(noise > 0.0) || !(information > 0.0) {
            return Err(Error::DegenerateWeighting);
        }
        let imprecision = noise / (sensitivity * sensitivity);
        let ideal_imprecision = 1.0 / information;
        Ok(Self {
            sensitivity,
            noise,
            information,
            imprecision,
            ideal_imprecision,
            efficiency: sensitivity * sensitivity / (noise * information),
            back_action: 0.25 * HBAR * HBAR * information,
        })
    }

    /// `S_ideal · S_ba`; equals `(ħ/2)²` by construction.
    pub fn heisenberg_product(&self) -> f64 {
        self.ideal_imprecision * self.back_action
    }

    /// `S_imp · S_ba = (ħ/2)²/η ≥ (ħ/2)²`.
    pub fn uncertainty_product(&self) -> f64 {
        self.imprecision * self.back_action
    }
}

struct RawIntegrals {
    sensitivity: f64,
    sensitivity_scale: f64,
    noise: f64,
    information: f64,
}

fn raw_integrals(
    fields: &FieldPair,
    fw: &WeightFunction,
    params: &OpticalParams,
) -> Result<RawIntegrals> {
    let grid = fields.grid();
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    let da = grid.cell_area();
    let u0 = fields.u0().values();
    let us = fields.us().values();

    let information =
        4.0 * alpha2 * k * k * compensated_sum(us.iter().map(|v| v.norm_sqr())) * da;

    if matches!(fw, WeightFunction::IdealHomodyne) {
        // f_w = |us| against a strong matched local oscillator: the noise is
        // the oscillator shot noise weighted the same way, so S²/N collapses
        // to the information rate.
        let p = compensated_sum(us.iter().map(|v| v.norm_sqr())) * da;
        if p <= 0.0 {
            return Err(Error::DegenerateWeighting);
        }
        return Ok(RawIntegrals {
            sensitivity: 2.0 * alpha2 * k * p,
            sensitivity_scale: 2.0 * alpha2 * k * p,
            noise: alpha2 * p,
            information,
        });
    }

    let f = fw.sample(grid)?;
    let fv = f.values();
    let sensitivity = 2.0
        * alpha2
        * k
        * compensated_sum(
            fv.iter()
                .zip(u0.iter().zip(us))
                .map(|(f, (a, b))| f * (a * b.conj()).re),
        )
        * da;
    let sensitivity_scale = 2.0
        * alpha2
        * k
        * compensated_sum(
            fv.iter()
                .zip(u0.iter().zip(us))
                .map(|(f, (a, b))| (f * (a * b.conj()).re).abs()),
        )
        * da;
    let noise = alpha2
        * compensated_sum(
            fv.iter()
                .zip(u0)
                .map(|(f, a)| f * f * a.norm_sqr()),
        )
        * da;
    Ok(RawIntegrals {
        sensitivity,
        sensitivity_scale,
        noise,
        information,
    })
}

/// Signal slope `S = 2α²k ∫ f_w Re[u0 us*] da`. The sign follows the field
/// conventions and is meaningful; efficiencies only ever use `S²`.
pub fn sensitivity(
    fields: &FieldPair,
    fw: &WeightFunction,
    params: &OpticalParams,
) -> Result<f64> {
    Ok(raw_integrals(fields, fw, params)?.sensitivity)
}

/// Shot-noise power `N = α² ∫ |u0|² f_w² da ≥ 0`.
pub fn noise(fields: &FieldPair, fw: &WeightFunction, params: &OpticalParams) -> Result<f64> {
    Ok(raw_integrals(fields, fw, params)?.noise)
}

/// Ideal information rate `I = 4α²k² ∫ |us|² da ≥ 0`.
pub fn ideal_information(fields: &FieldPair, params: &OpticalParams) -> Result<f64> {
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    Ok(4.0 * alpha2 * k * k * fields.us().norm_sqr_integral())
}

/// Full detection budget for one weighting.
///
/// A sensitivity that cancels to numerical noise (wrong split axis, no
/// signal) is a degenerate weighting: the imprecision diverges, so this is
/// an error rather than a silent `η = 0`.
pub fn budget(
    fields: &FieldPair,
    fw: &WeightFunction,
    params: &OpticalParams,
) -> Result<DetectionBudget> {
    let raw = raw_integrals(fields, fw, params)?;
    if raw.sensitivity_scale <= 0.0
        || raw.sensitivity.abs() < DEGENERACY_RATIO * raw.sensitivity_scale
    {
        return Err(Error::DegenerateWeighting);
    }
    DetectionBudget::from_parts(raw.sensitivity, raw.noise, raw.information)
}

/// One-dimensional differential-efficiency profile `dη/dx` (the transverse
/// coordinate is integrated out) together with its ideal counterpart.
#[derive(Debug, Clone)]
pub struct DdeProfile {
    /// Column abscissas.
    pub x: Vec<f64>,
    /// Column spacing.
    pub dx: f64,
    /// Actual profile, 1/m.
    pub actual: Vec<f64>,
    /// Ideal (spatially resolved homodyne) profile, 1/m; non-negative.
    pub ideal: Vec<f64>,
}

impl DdeProfile {
    /// `∫ (dη/dx) dx`; recovers the budget's η.
    pub fn integral(&self) -> f64 {
        compensated_sum(self.actual.iter().copied()) * self.dx
    }

    /// Integral of the ideal profile; 1 when all light reaches the plane.
    pub fn ideal_integral(&self) -> f64 {
        compensated_sum(self.ideal.iter().copied()) * self.dx
    }

    /// Largest |actual| value.
    pub fn peak(&self) -> f64 {
        self.actual.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Differential detection efficiency reduced to 1-D:
///
/// `dη/dx = α² S_ideal [ 4k (S/N) ∫Re[u0 us* f_w] dy − (S/N)² ∫|u0 f_w|² dy ]`
///
/// The first term is the local signal contribution, the second the local
/// shot-noise penalty; the profile can be negative where noise dominates.
pub fn dde_map(
    fields: &FieldPair,
    fw: &WeightFunction,
    params: &OpticalParams,
    budget: &DetectionBudget,
) -> Result<DdeProfile> {
    if matches!(fw, WeightFunction::IdealHomodyne) {
        return ideal_dde(fields, params);
    }
    let grid = fields.grid();
    let f = fw.sample(grid)?;
    let fv = f.values();
    let u0 = fields.u0().values();
    let us = fields.us().values();
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    let dy = grid.dy();
    let s_over_n = budget.sensitivity / budget.noise;
    let s_ideal = budget.ideal_imprecision;

    let nx = grid.nx();
    let ny = grid.ny();
    let mut x = Vec::with_capacity(nx);
    let mut actual = Vec::with_capacity(nx);
    let mut ideal = Vec::with_capacity(nx);
    for i in 0..nx {
        let lo = i * ny;
        let cols = lo..lo + ny;
        let signal = compensated_sum(
            cols.clone()
                .map(|idx| fv[idx] * (u0[idx] * us[idx].conj()).re),
        ) * dy;
        let noise = compensated_sum(
            cols.clone()
                .map(|idx| fv[idx] * fv[idx] * u0[idx].norm_sqr()),
        ) * dy;
        let info = compensated_sum(cols.map(|idx| us[idx].norm_sqr())) * dy;
        x.push(grid.x_at(i));
        actual.push(alpha2 * s_ideal * (4.0 * k * s_over_n * signal - s_over_n * s_over_n * noise));
        ideal.push(4.0 * alpha2 * k * k * s_ideal * info);
    }
    Ok(DdeProfile {
        x,
        dx: grid.dx(),
        actual,
        ideal,
    })
}

/// Ideal differential efficiency `4α²k² S_ideal ∫|us|² dy`: non-negative,
/// integrates to 1 when all light reaches the plane. In the far field this
/// is the information radiation pattern.
pub fn ideal_dde(fields: &FieldPair, params: &OpticalParams) -> Result<DdeProfile> {
    let info = ideal_information(fields, params)?;
    if !(info > 0.0) {
        return Err(Error::DegenerateWeighting);
    }
    let grid = fields.grid();
    let us = fields.us().values();
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    let dy = grid.dy();
    let ny = grid.ny();
    let scale = 4.0 * alpha2 * k * k / info;
    let mut x = Vec::with_capacity(grid.nx());
    let mut ideal = Vec::with_capacity(grid.nx());
    for i in 0..grid.nx() {
        let lo = i * ny;
        let col = compensated_sum((lo..lo + ny).map(|idx| us[idx].norm_sqr())) * dy;
        x.push(grid.x_at(i));
        ideal.push(scale * col);
    }
    Ok(DdeProfile {
        x,
        dx: grid.dx(),
        actual: ideal.clone(),
        ideal,
    })
}

/// A vertical strip `[center − width/2, center + width/2]` spanning the full
/// transverse extent of the detection plane.
#[derive(Debug, Clone, Copy)]
pub struct XStrip {
    pub center: f64,
    pub width: f64,
}

impl XStrip {
    pub fn new(center: f64, width: f64) -> Self {
        Self { center, width }
    }

    /// Snaps both edges to cell boundaries of `grid`, preserving the width
    /// as closely as possible.
    pub fn snapped(center: f64, width: f64, grid: &CartesianGrid2D) -> Self {
        let dx = grid.dx();
        let cells = (width / dx).round().max(1.0);
        let lo = grid.nearest_x_boundary(center - cells * dx / 2.0);
        Self {
            center: lo + cells * dx / 2.0,
            width: cells * dx,
        }
    }
}

/// Exclusion estimate of the differential efficiency: the efficiency is
/// recomputed with the weighting zeroed on the strip, and the change is
/// divided by the strip width,
///
/// `(η − η_excluded) / Δx`.
///
/// As `Δx → 0` this converges to [`dde_map`] at the strip center. At finite
/// width it is the quantity a physical wire scan measures: both the signal
/// and the shot noise of the strip are removed, so the remaining scheme is
/// renormalized, which deepens the estimate relative to a plain box average
/// of the differential profile.
pub fn dde_by_exclusion(
    fields: &FieldPair,
    fw: &WeightFunction,
    params: &OpticalParams,
    strip: &XStrip,
) -> Result<f64> {
    let grid = fields.grid();
    let a = strip.center - strip.width / 2.0;
    let b = strip.center + strip.width / 2.0;
    if !(strip.width > 0.0) {
        return Err(Error::InvalidParameter("strip width must be positive".into()));
    }
    if a < grid.x_min() - 1e-9 * grid.dx() || b > grid.x_max() + 1e-9 * grid.dx() {
        return Err(Error::DomainTooSmall(format!(
            "strip [{a:.3e}, {b:.3e}] lies outside the detection domain"
        )));
    }
    let (i_lo, i_hi) = grid.x_cell_range(a, b)?;

    let f = fw.sample(grid)?;
    let fv = f.values();
    let u0 = fields.u0().values();
    let us = fields.us().values();
    let alpha2 = params.photon_rate();
    let k = params.wavenumber();
    let da = grid.cell_area();
    let ny = grid.ny();

    let full = budget(fields, fw, params)?;
    let strip_idx = (i_lo * ny)..(i_hi * ny);
    let d_sens = 2.0
        * alpha2
        * k
        * compensated_sum(
            strip_idx
                .clone()
                .map(|idx| fv[idx] * (u0[idx] * us[idx].conj()).re),
        )
        * da;
    let d_noise = alpha2
        * compensated_sum(strip_idx.map(|idx| fv[idx] * fv[idx] * u0[idx].norm_sqr()))
        * da;

    let s_left = full.sensitivity - d_sens;
    let n_left = full.noise - d_noise;
    if !(n_left > 0.0) {
        return Err(Error::DegenerateWeighting);
    }
    let eta_excluded = s_left * s_left / (n_left * full.information);
    Ok((full.efficiency - eta_excluded) / strip.width)
}

/// Convolves a sampled profile (piecewise constant on its cells) with a
/// normalized box of the given width; the profile is taken as zero outside
/// its domain.
pub fn box_convolve(profile: &DdeProfile, width: f64) -> DdeProfile {
    let n = profile.x.len();
    let dx = profile.dx;
    let mut actual = vec![0.0; n];
    let cell_lo = |i: usize| profile.x[i] - dx / 2.0;
    let cell_hi = |i: usize| profile.x[i] + dx / 2.0;
    for (cell, x) in actual.iter_mut().zip(&profile.x) {
        let lo = x - width / 2.0;
        let hi = x + width / 2.0;
        let j_lo = (((lo - cell_lo(0)) / dx).floor().max(0.0)) as usize;
        let mut acc = 0.0;
        let mut j = j_lo.min(n - 1);
        while j < n && cell_lo(j) < hi {
            let overlap = (cell_hi(j).min(hi) - cell_lo(j).max(lo)).max(0.0);
            acc += profile.actual[j] * overlap;
            j += 1;
        }
        *cell = acc / width;
    }
    DdeProfile {
        x: profile.x.clone(),
        dx,
        actual,
        ideal: profile.ideal.clone(),
    }
}

/// One evaluated scan point.
#[derive(Debug, Clone, Copy)]
pub struct ScanSample {
    pub x: f64,
    pub value: f64,
}

/// Result of a 1-D parameter scan.
#[derive(Debug, Clone)]
pub struct ScanResult {
    /// Parabolic-refined maximizer.
    pub argmax: f64,
    /// Objective value at `argmax`.
    pub value: f64,
    pub samples: Vec<ScanSample>,
}

/// Deterministic grid scan of a scalar objective over `[lo, hi]` with
/// parabolic refinement of the best three samples.
///
/// Ties between equal maxima resolve to the sample nearest the range
/// midpoint (so a constant objective reports the midpoint). A boundary
/// maximum is returned as-is.
pub fn scan_1d(
    mut objective: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    n_samples: usize,
) -> Result<ScanResult> {
    if n_samples < 3 {
        return Err(Error::InvalidParameter(format!(
            "scan needs at least 3 samples, got {n_samples}"
        )));
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "empty scan range [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (n_samples - 1) as f64;
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x = if i + 1 == n_samples { hi } else { lo + i as f64 * step };
        samples.push(ScanSample {
            x,
            value: objective(x)?,
        });
    }

    let mid = (lo + hi) / 2.0;
    let mut best = 0usize;
    for i in 1..n_samples {
        let better = samples[i].value > samples[best].value;
        let tie = samples[i].value == samples[best].value
            && (samples[i].x - mid).abs() < (samples[best].x - mid).abs();
        if better || tie {
            best = i;
        }
    }

    let mut argmax = samples[best].x;
    if best > 0 && best + 1 < n_samples {
        let fm = samples[best - 1].value;
        let f0 = samples[best].value;
        let fp = samples[best + 1].value;
        let denom = fm - 2.0 * f0 + fp;
        let scale = fm.abs().max(f0.abs()).max(fp.abs()).max(f64::MIN_POSITIVE);
        if denom < -1e-12 * scale {
            let offset = 0.5 * (fm - fp) / denom * step;
            if offset.abs() <= step {
                argmax = (samples[best].x + offset).clamp(lo, hi);
            }
        }
    }
    let value = objective(argmax)?;
    // Never report less than the best sample actually seen.
    let (argmax, value) = if value >= samples[best].value {
        (argmax, value)
    } else {
        (samples[best].x, samples[best].value)
    };
    Ok(ScanResult {
        argmax,
        value,
        samples,
    })
}
