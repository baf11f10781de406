//! Scenario configuration: JSON file plus `--set key=value` overrides.
//!
//! Unknown keys are rejected everywhere, every section has physical
//! defaults, and all values are SI. Overrides use dotted paths
//! (`--set membrane.mode_m=8`); values parse as JSON scalars first and fall
//! back to strings.

use detopt_core::dipole::{DipoleAxis, DipoleConfig};
use detopt_core::fields::{MembraneConfig, OpticalParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    MembraneDde,
    MembraneBlockScan,
    MembraneSweep,
    DipoleIrp,
    DipoleBlockScan,
    PhaseContrast,
    FisherCheck,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::MembraneDde,
        ScenarioKind::MembraneBlockScan,
        ScenarioKind::MembraneSweep,
        ScenarioKind::DipoleIrp,
        ScenarioKind::DipoleBlockScan,
        ScenarioKind::PhaseContrast,
        ScenarioKind::FisherCheck,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            ScenarioKind::MembraneDde => "membrane-dde",
            ScenarioKind::MembraneBlockScan => "membrane-block-scan",
            ScenarioKind::MembraneSweep => "membrane-sweep",
            ScenarioKind::DipoleIrp => "dipole-irp",
            ScenarioKind::DipoleBlockScan => "dipole-block-scan",
            ScenarioKind::PhaseContrast => "phase-contrast",
            ScenarioKind::FisherCheck => "fisher-check",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpticsSection {
    pub wavelength_m: f64,
    /// Coherent amplitude in sqrt(photons/s).
    pub amplitude_sqrt_per_s: f64,
    /// Optional photodetector conversion efficiency multiplying the
    /// reported efficiency; geometric results are quoted without it.
    pub quantum_efficiency: Option<f64>,
}

impl Default for OpticsSection {
    fn default() -> Self {
        Self {
            wavelength_m: 1.064e-6,
            amplitude_sqrt_per_s: 1.0,
            quantum_efficiency: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembranePipeline {
    /// Full device-plane reflection and far-field propagation.
    Propagate,
    /// Analytic tilting-mirror far fields (long mechanical wavelength).
    OpticalLever,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MembraneSection {
    pub length_x_m: f64,
    pub length_y_m: f64,
    pub mode_m: u32,
    pub mode_n: u32,
    pub waist_m: f64,
    pub detection_distance_m: f64,
    pub pipeline: MembranePipeline,
}

impl Default for MembraneSection {
    fn default() -> Self {
        // Tabletop geometry: addressed modes run along the 1.5 mm side and
        // the far-field waist is 560 um for a 1064 nm probe.
        Self {
            length_x_m: 1.5e-3,
            length_y_m: 3.5e-3,
            mode_m: 2,
            mode_n: 1,
            waist_m: 100e-6,
            detection_distance_m: 0.33069,
            pipeline: MembranePipeline::Propagate,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DipoleSection {
    pub na_collection: f64,
    pub amplitude_main: f64,
    pub amplitude_dipole: f64,
    /// "x0" or "y0".
    pub axis: String,
    pub gouy_correction: f64,
}

impl Default for DipoleSection {
    fn default() -> Self {
        Self {
            na_collection: 1.0,
            amplitude_main: 1.0,
            amplitude_dipole: 1e-3,
            axis: "y0".into(),
            gouy_correction: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightingSection {
    /// "qpd", "blocked-qpd", "linear" or "ideal".
    pub kind: String,
    pub block_width_m: f64,
}

impl Default for WeightingSection {
    fn default() -> Self {
        Self {
            kind: "qpd".into(),
            block_width_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockScanSection {
    /// Membrane scans run over block widths `[0, max_over_waist·w_d]`.
    pub max_over_waist: f64,
    /// Dipole scans run over the block parameter `[0, max_parameter]`
    /// (cap half-angle in radians or strip half-width in sine space).
    pub max_parameter: f64,
    pub samples: usize,
    /// Dipole block geometry: "strip" (bar over the split line) or "cap".
    pub shape: String,
}

impl Default for BlockScanSection {
    fn default() -> Self {
        Self {
            max_over_waist: 3.0,
            max_parameter: 0.9,
            samples: 201,
            shape: "strip".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub device_nx: usize,
    pub device_ny: usize,
    pub far_nx: usize,
    pub far_ny: usize,
    pub pad_waists: f64,
    pub sphere_n_theta: usize,
    pub sphere_n_phi: usize,
    /// Resolution of the emitted angular maps (display only; budgets use
    /// the full sphere resolution).
    pub map_n_theta: usize,
    pub map_n_phi: usize,
    pub mask_nx: usize,
    pub mask_ny: usize,
    pub array_cells_per_pitch: usize,
    pub array_ny: usize,
    /// Resolution of the emitted mask raster.
    pub mask_raster_n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            device_nx: 1024,
            device_ny: 256,
            far_nx: 1024,
            far_ny: 256,
            pad_waists: 6.0,
            sphere_n_theta: 1024,
            sphere_n_phi: 512,
            map_n_theta: 90,
            map_n_phi: 180,
            mask_nx: 2048,
            mask_ny: 2048,
            array_cells_per_pitch: 512,
            array_ny: 96,
            mask_raster_n: 1024,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseContrastSection {
    pub gap_fraction: f64,
    pub gap_scan_max: f64,
    pub gap_scan_samples: usize,
    pub psi_threshold: f64,
    pub threshold_scan_min: f64,
    pub threshold_scan_max: f64,
    pub threshold_scan_samples: usize,
    pub emit_mask: bool,
}

impl Default for PhaseContrastSection {
    fn default() -> Self {
        Self {
            gap_fraction: 0.0,
            gap_scan_max: 0.8,
            gap_scan_samples: 161,
            psi_threshold: 0.29,
            threshold_scan_min: 0.05,
            threshold_scan_max: 0.6,
            threshold_scan_samples: 56,
            emit_mask: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub modes_m: Vec<u32>,
    pub mode_n: u32,
    pub include_blocked: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            modes_m: vec![2, 4, 6, 8, 10],
            mode_n: 1,
            include_blocked: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub optics: OpticsSection,
    #[serde(default)]
    pub membrane: MembraneSection,
    #[serde(default)]
    pub dipole: DipoleSection,
    #[serde(default)]
    pub weighting: WeightingSection,
    #[serde(default)]
    pub block_scan: BlockScanSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub phase_contrast: PhaseContrastSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl ScenarioConfig {
    /// Parses a JSON document and applies dotted-path overrides before the
    /// typed (unknown-key-rejecting) decode.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let cfg: ScenarioConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(q) = self.optics.quantum_efficiency {
            if !(q > 0.0 && q <= 1.0) {
                return Err(CliError::Config(format!(
                    "optics.quantum_efficiency must lie in (0, 1], got {q}"
                )));
            }
        }
        // Positivity of the physical parameters is enforced by the typed
        // constructors below.
        self.optical_params()?;
        self.membrane_config()?;
        self.dipole_config()?;
        Ok(())
    }

    pub fn optical_params(&self) -> Result<OpticalParams, CliError> {
        OpticalParams::new(self.optics.wavelength_m, self.optics.amplitude_sqrt_per_s)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn membrane_config(&self) -> Result<MembraneConfig, CliError> {
        let m = &self.membrane;
        MembraneConfig::new(
            m.length_x_m,
            m.length_y_m,
            m.mode_m,
            m.mode_n,
            m.waist_m,
            m.detection_distance_m,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn dipole_axis(&self) -> Result<DipoleAxis, CliError> {
        match self.dipole.axis.as_str() {
            "x0" => Ok(DipoleAxis::X0),
            "y0" => Ok(DipoleAxis::Y0),
            other => Err(CliError::Config(format!(
                "dipole.axis must be \"x0\" or \"y0\" (axial motion is not detectable in this forward-scattering scheme), got {other:?}"
            ))),
        }
    }

    pub fn dipole_config(&self) -> Result<DipoleConfig, CliError> {
        DipoleConfig::new(
            self.dipole.na_collection,
            self.dipole.amplitude_main,
            self.dipole.amplitude_dipole,
            self.optics.wavelength_m,
            self.dipole_axis()?,
            self.dipole.gouy_correction,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn apply_override(root: &mut serde_json::Value, item: &str) -> Result<(), CliError> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {item:?} is not of the form key=value")))?;
    if path.is_empty() {
        return Err(CliError::Config("override path is empty".into()));
    }
    let value: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            return Err(CliError::Config(format!(
                "override path {path:?} crosses a non-object value"
            )));
        }
        node = node
            .as_object_mut()
            .unwrap()
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override path {path:?} crosses a non-object value")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = ScenarioConfig::from_json(r#"{"scenario": "membrane-dde"}"#, &[]).unwrap();
        assert_eq!(cfg.membrane.mode_m, 2);
        assert_eq!(cfg.grid.far_nx, 1024);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ScenarioConfig::from_json(
            r#"{"scenario": "membrane-dde", "membrane": {"mode_q": 3}}"#,
            &[],
        )
        .unwrap_err();
        assert!(err.to_string().contains("mode_q"));
    }

    #[test]
    fn overrides_apply_and_are_validated() {
        let cfg = ScenarioConfig::from_json(
            r#"{"scenario": "membrane-dde"}"#,
            &["membrane.mode_m=8".into(), "optics.amplitude_sqrt_per_s=2.0".into()],
        )
        .unwrap();
        assert_eq!(cfg.membrane.mode_m, 8);
        assert_eq!(cfg.optics.amplitude_sqrt_per_s, 2.0);

        let err = ScenarioConfig::from_json(
            r#"{"scenario": "membrane-dde"}"#,
            &["membrane.waist_m=-1.0".into()],
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn axis_parsing() {
        let err = ScenarioConfig::from_json(
            r#"{"scenario": "dipole-irp", "dipole": {"axis": "z0"}}"#,
            &[],
        )
        .unwrap_err();
        assert!(err.to_string().contains("z0"));
    }
}
