//! Scenario execution: builds the physics objects from the config, runs the
//! computation, and writes the CSV/JSON outputs.

use std::path::Path;

use detopt_core::detection::{DetectionBudget, SplitAxis, WeightFunction};
use detopt_core::dipole::{
    block_angle_optimization, collection_efficiency, dde_sphere, eta_factorization, irp,
    AzimuthalSplit, BlockShape, DipoleScenario, SphereWeight,
};
use detopt_core::fields::{gaussian_input, membrane_mode, reflect, RealField};
use detopt_core::fisher::{decompose, decompose_dipole, qfi, qfi_dipole};
use detopt_core::membrane::{
    block_optimization, interferometer_benchmark, relative_sensitivity_sweep, BlockScanSpec,
    DeviceGridSpec, FarGridSpec, MembraneScenario,
};
use detopt_core::phase_contrast::{
    array_budget, emit_mask, gap_scan, threshold_mask_budget, threshold_scan, ArrayGridSpec,
    MaskGridSpec,
};
use detopt_core::quadrature::CartesianGrid2D;
use serde::Serialize;

use crate::config::{MembranePipeline, ScenarioConfig, ScenarioKind};
use crate::output::{write_summary, write_table, write_text, BudgetSummary, Cell, Summary};
use crate::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    match cfg.scenario {
        ScenarioKind::MembraneDde => membrane_dde(cfg, out_dir),
        ScenarioKind::MembraneBlockScan => membrane_block_scan(cfg, out_dir),
        ScenarioKind::MembraneSweep => membrane_sweep(cfg, out_dir),
        ScenarioKind::DipoleIrp => dipole_irp(cfg, out_dir),
        ScenarioKind::DipoleBlockScan => dipole_block_scan(cfg, out_dir),
        ScenarioKind::PhaseContrast => phase_contrast(cfg, out_dir),
        ScenarioKind::FisherCheck => fisher_check(cfg, out_dir),
    }
}

fn device_spec(cfg: &ScenarioConfig) -> DeviceGridSpec {
    DeviceGridSpec {
        nx: cfg.grid.device_nx,
        ny: cfg.grid.device_ny,
        pad_waists: cfg.grid.pad_waists,
    }
}

fn far_spec(cfg: &ScenarioConfig) -> FarGridSpec {
    FarGridSpec {
        nx: cfg.grid.far_nx,
        ny: cfg.grid.far_ny,
        pad_waists: cfg.grid.pad_waists,
    }
}

fn membrane_scenario(cfg: &ScenarioConfig) -> Result<MembraneScenario, CliError> {
    let params = cfg.optical_params()?;
    let mc = cfg.membrane_config()?;
    match cfg.membrane.pipeline {
        MembranePipeline::Propagate => {
            MembraneScenario::propagate(mc, params, &device_spec(cfg), &far_spec(cfg))
        }
        MembranePipeline::OpticalLever => {
            MembraneScenario::optical_lever(mc, params, &far_spec(cfg))
        }
    }
    .map_err(CliError::Numerical)
}

fn plane_weighting(
    cfg: &ScenarioConfig,
    scenario: &MembraneScenario,
) -> Result<WeightFunction, CliError> {
    match cfg.weighting.kind.as_str() {
        "qpd" => Ok(WeightFunction::qpd(SplitAxis::X)),
        "blocked-qpd" => Ok(WeightFunction::blocked_qpd_snapped(
            SplitAxis::X,
            cfg.weighting.block_width_m,
            scenario.grid(),
        )
        .0),
        "linear" => Ok(WeightFunction::linear(scenario.far_field_waist())),
        "ideal" => Ok(WeightFunction::ideal_homodyne()),
        other => Err(CliError::Config(format!(
            "weighting.kind must be qpd | blocked-qpd | linear | ideal, got {other:?}"
        ))),
    }
}

fn block_shape(cfg: &ScenarioConfig) -> Result<BlockShape, CliError> {
    match cfg.block_scan.shape.as_str() {
        "strip" => Ok(BlockShape::Strip),
        "cap" => Ok(BlockShape::Cap),
        other => Err(CliError::Config(format!(
            "block_scan.shape must be strip | cap, got {other:?}"
        ))),
    }
}

fn dipole_scenario(cfg: &ScenarioConfig) -> Result<DipoleScenario, CliError> {
    DipoleScenario::new(
        cfg.dipole_config()?,
        cfg.grid.sphere_n_theta,
        cfg.grid.sphere_n_phi,
    )
    .map_err(CliError::Numerical)
}

fn membrane_dde(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let scenario = membrane_scenario(cfg)?;
    let fw = plane_weighting(cfg, &scenario)?;
    let (budget, profile) = scenario.dde(&fw).map_err(CliError::Numerical)?;

    let mut rows: Vec<Vec<Cell>> = profile
        .x
        .iter()
        .zip(profile.actual.iter().zip(&profile.ideal))
        .map(|(x, (a, i))| vec![Cell::Num(*x), Cell::Num(*a), Cell::Num(*i)])
        .collect();
    // Trailing summary row: label, profile integral, budget efficiency.
    rows.push(vec![
        Cell::Text("eta".into()),
        Cell::Num(profile.integral()),
        Cell::Num(budget.efficiency),
    ]);
    write_table(
        &out.join("membrane_dde.csv"),
        &["x_m", "dde_per_m", "ideal_dde_per_m"],
        &rows,
    )?;

    #[derive(Serialize)]
    struct Extra {
        far_field_waist_m: f64,
        weighting: String,
        ideal_profile_integral: f64,
    }
    write_summary(
        &out.join("membrane_dde_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::MembraneDde.slug(),
            config: cfg,
            budget: Some(BudgetSummary::new(&budget, cfg.optics.quantum_efficiency)),
            dde_integral_residual: Some((profile.integral() - budget.efficiency).abs()),
            extra: Extra {
                far_field_waist_m: scenario.far_field_waist(),
                weighting: cfg.weighting.kind.clone(),
                ideal_profile_integral: profile.ideal_integral(),
            },
        },
    )
}

fn membrane_block_scan(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let scenario = membrane_scenario(cfg)?;
    let wd = scenario.far_field_waist();
    let opt = block_optimization(
        &scenario,
        0.0,
        cfg.block_scan.max_over_waist * wd,
        cfg.block_scan.samples,
    )
    .map_err(CliError::Numerical)?;

    let mut rows = Vec::with_capacity(opt.scan.samples.len());
    for s in &opt.scan.samples {
        let (_, snapped) =
            WeightFunction::blocked_qpd_snapped(SplitAxis::X, s.x, scenario.grid());
        rows.push(vec![
            Cell::Num(snapped),
            Cell::Num(snapped / wd),
            Cell::Num(s.value),
            Cell::Num(scenario.power_fraction_in_strip(snapped)),
        ]);
    }
    write_table(
        &out.join("membrane_block_scan.csv"),
        &["B_m", "B_over_wd", "eta", "blocked_power_fraction"],
        &rows,
    )?;

    #[derive(Serialize)]
    struct Extra {
        far_field_waist_m: f64,
        #[serde(rename = "B_opt_m")]
        b_opt_m: f64,
        #[serde(rename = "B_opt_over_wd")]
        b_opt_over_wd: f64,
        blocked_power_fraction: f64,
    }
    write_summary(
        &out.join("membrane_block_scan_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::MembraneBlockScan.slug(),
            config: cfg,
            budget: Some(BudgetSummary::new(
                &opt.budget_at_optimum,
                cfg.optics.quantum_efficiency,
            )),
            dde_integral_residual: None,
            extra: Extra {
                far_field_waist_m: wd,
                b_opt_m: opt.optimal_width,
                b_opt_over_wd: opt.optimal_width / wd,
                blocked_power_fraction: opt.blocked_power_fraction,
            },
        },
    )
}

fn membrane_sweep(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let params = cfg.optical_params()?;
    let template = cfg.membrane_config()?;
    let modes: Vec<(u32, u32)> = cfg
        .sweep
        .modes_m
        .iter()
        .map(|&m| (m, cfg.sweep.mode_n))
        .collect();
    let block = cfg.sweep.include_blocked.then_some(BlockScanSpec {
        max_width_waists: cfg.block_scan.max_over_waist,
        n_samples: cfg.block_scan.samples,
    });
    let rows = relative_sensitivity_sweep(
        &modes,
        &template,
        &params,
        &device_spec(cfg),
        &far_spec(cfg),
        block,
    )
    .map_err(CliError::Numerical)?;

    let bench = interferometer_benchmark(&params);
    let (headers, table): (Vec<&str>, Vec<Vec<Cell>>) = if cfg.sweep.include_blocked {
        (
            vec![
                "m",
                "n",
                "km_w0",
                "eta",
                "S_imp_rel_interferometer",
                "S_ba_rel_interferometer",
                "eta_blocked",
                "S_imp_blocked_rel_interferometer",
                "B_opt_over_wd",
                "blocked_power_fraction",
            ],
            rows.iter()
                .map(|r| {
                    let b = r.blocked.as_ref().expect("blocked rows requested");
                    vec![
                        Cell::Int(r.mode_m as u64),
                        Cell::Int(r.mode_n as u64),
                        Cell::Num(r.grating_parameter),
                        Cell::Num(r.efficiency),
                        Cell::Num(r.imprecision_ratio),
                        Cell::Num(r.back_action_ratio),
                        Cell::Num(b.efficiency),
                        Cell::Num(b.imprecision_ratio),
                        Cell::Num(b.optimal_width_over_waist),
                        Cell::Num(b.blocked_power_fraction),
                    ]
                })
                .collect(),
        )
    } else {
        (
            vec![
                "m",
                "n",
                "km_w0",
                "eta",
                "S_imp_rel_interferometer",
                "S_ba_rel_interferometer",
            ],
            rows.iter()
                .map(|r| {
                    vec![
                        Cell::Int(r.mode_m as u64),
                        Cell::Int(r.mode_n as u64),
                        Cell::Num(r.grating_parameter),
                        Cell::Num(r.efficiency),
                        Cell::Num(r.imprecision_ratio),
                        Cell::Num(r.back_action_ratio),
                    ]
                })
                .collect(),
        )
    };
    write_table(&out.join("membrane_sweep.csv"), &headers, &table)?;

    #[derive(Serialize)]
    struct Extra {
        interferometer_s_imp_m2_per_hz: f64,
        interferometer_s_ba_n2_per_hz: f64,
        modes: usize,
    }
    write_summary(
        &out.join("membrane_sweep_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::MembraneSweep.slug(),
            config: cfg,
            budget: None,
            dde_integral_residual: None,
            extra: Extra {
                interferometer_s_imp_m2_per_hz: bench.imprecision,
                interferometer_s_ba_n2_per_hz: bench.back_action,
                modes: rows.len(),
            },
        },
    )
}

fn dipole_irp(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let scenario = dipole_scenario(cfg)?;
    let axis = cfg.dipole_axis()?;
    let fw = SphereWeight::qpd_for(axis);
    let budget = scenario.budget(&fw).map_err(CliError::Numerical)?;
    let split = eta_factorization(&scenario, &fw).map_err(CliError::Numerical)?;
    let full_map = dde_sphere(&scenario, &fw).map_err(CliError::Numerical)?;
    let residual = (full_map.integral() - budget.efficiency).abs();
    let pattern = irp(&scenario);
    let pattern_total = pattern.full_sphere_integral();

    // Display-resolution map for plotting.
    let display = DipoleScenario::new(
        cfg.dipole_config()?,
        cfg.grid.map_n_theta,
        cfg.grid.map_n_phi,
    )
    .map_err(CliError::Numerical)?;
    let display_map = dde_sphere(&display, &fw).map_err(CliError::Numerical)?;
    let grid = &display_map.grid;
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..grid.n_theta() {
        for j in 0..grid.n_phi() {
            let idx = grid.index(i, j);
            rows.push(vec![
                Cell::Num(grid.theta_at(i)),
                Cell::Num(grid.phi_at(j)),
                Cell::Num(display_map.ideal[idx]),
                Cell::Num(display_map.actual[idx]),
            ]);
        }
    }
    write_table(
        &out.join("dipole_irp.csv"),
        &["theta_rad", "phi_rad", "irp_per_sr", "dde_per_sr"],
        &rows,
    )?;

    #[derive(Serialize)]
    struct Extra {
        eta_col: f64,
        eta_detector: f64,
        irp_full_sphere_integral: f64,
        information_per_s_per_m2: f64,
    }
    write_summary(
        &out.join("dipole_irp_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::DipoleIrp.slug(),
            config: cfg,
            budget: Some(BudgetSummary::new(&budget, cfg.optics.quantum_efficiency)),
            dde_integral_residual: Some(residual),
            extra: Extra {
                eta_col: split.collection,
                eta_detector: split.detector,
                irp_full_sphere_integral: pattern_total,
                information_per_s_per_m2: scenario.information(),
            },
        },
    )
}

fn dipole_block_scan(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let scenario = dipole_scenario(cfg)?;
    let axis = cfg.dipole_axis()?;
    let shape = block_shape(cfg)?;
    let opt = block_angle_optimization(
        &scenario,
        shape,
        0.0,
        cfg.block_scan.max_parameter,
        cfg.block_scan.samples,
    )
    .map_err(CliError::Numerical)?;

    let split = AzimuthalSplit::for_axis(axis);
    let mut rows = Vec::with_capacity(opt.scan.samples.len());
    for s in &opt.scan.samples {
        let fw = SphereWeight::BlockedQpd {
            split,
            shape,
            parameter: s.x,
        };
        let blocked = scenario
            .blocked_power_fraction(&fw)
            .map_err(CliError::Numerical)?;
        rows.push(vec![Cell::Num(s.x), Cell::Num(blocked), Cell::Num(s.value)]);
    }
    write_table(
        &out.join("dipole_block_scan.csv"),
        &["block_parameter", "blocked_power_fraction", "eta"],
        &rows,
    )?;

    let factorized = eta_factorization(
        &scenario,
        &SphereWeight::BlockedQpd {
            split,
            shape,
            parameter: opt.optimal_parameter,
        },
    )
    .map_err(CliError::Numerical)?;

    #[derive(Serialize)]
    struct Extra {
        block_shape: String,
        optimal_parameter: f64,
        blocked_power_fraction: f64,
        eta_standard: f64,
        eta_col: f64,
        eta_detector_at_optimum: f64,
    }
    let standard = scenario
        .budget(&SphereWeight::qpd_for(axis))
        .map_err(CliError::Numerical)?;
    write_summary(
        &out.join("dipole_block_scan_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::DipoleBlockScan.slug(),
            config: cfg,
            budget: Some(BudgetSummary::new(
                &opt.budget_at_optimum,
                cfg.optics.quantum_efficiency,
            )),
            dde_integral_residual: None,
            extra: Extra {
                block_shape: cfg.block_scan.shape.clone(),
                optimal_parameter: opt.optimal_parameter,
                blocked_power_fraction: opt.blocked_power_fraction,
                eta_standard: standard.efficiency,
                eta_col: collection_efficiency(&scenario),
                eta_detector_at_optimum: factorized.detector,
            },
        },
    )
}

fn phase_contrast(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let params = cfg.optical_params()?;
    let mask_cfg = cfg.membrane_config()?;
    // The photodiode array addresses the single-transverse-antinode family.
    let array_cfg = mask_cfg
        .with_mode(mask_cfg.mode_m(), 1)
        .map_err(CliError::Numerical)?;
    let array_spec = ArrayGridSpec {
        cells_per_pitch: cfg.grid.array_cells_per_pitch,
        ny: cfg.grid.array_ny,
        pad_waists: cfg.grid.pad_waists,
    };
    let mask_spec = MaskGridSpec {
        nx: cfg.grid.mask_nx,
        ny: cfg.grid.mask_ny,
        pad_waists: cfg.grid.pad_waists,
    };
    let pc = &cfg.phase_contrast;

    let (at_gap, effective_gap) =
        array_budget(&array_cfg, &params, pc.gap_fraction, &array_spec)
            .map_err(CliError::Numerical)?;
    let (scan, best, g_opt) = gap_scan(
        &array_cfg,
        &params,
        0.0,
        pc.gap_scan_max,
        pc.gap_scan_samples,
        &array_spec,
    )
    .map_err(CliError::Numerical)?;
    write_table(
        &out.join("phase_contrast_gap_scan.csv"),
        &["gap_fraction", "eta"],
        &scan
            .samples
            .iter()
            .map(|s| vec![Cell::Num(s.x), Cell::Num(s.value)])
            .collect::<Vec<_>>(),
    )?;

    let mask_at = threshold_mask_budget(&mask_cfg, &params, pc.psi_threshold, &mask_spec)
        .map_err(CliError::Numerical)?;
    let tscan = threshold_scan(
        &mask_cfg,
        &params,
        pc.threshold_scan_min,
        pc.threshold_scan_max,
        pc.threshold_scan_samples,
        &mask_spec,
    )
    .map_err(CliError::Numerical)?;
    write_table(
        &out.join("phase_contrast_threshold_scan.csv"),
        &["psi_threshold", "eta"],
        &tscan
            .samples
            .iter()
            .map(|s| vec![Cell::Num(s.x), Cell::Num(s.value)])
            .collect::<Vec<_>>(),
    )?;

    let mut mask_open_fraction = None;
    if pc.emit_mask {
        let n = cfg.grid.mask_raster_n;
        let half = cfg.grid.pad_waists * mask_cfg.waist();
        let grid =
            CartesianGrid2D::centered(half, half, n, n).map_err(CliError::Numerical)?;
        let raster =
            emit_mask(&mask_cfg, pc.psi_threshold, &grid).map_err(CliError::Numerical)?;
        // Headerless 0/1 matrix: one line per y row, x left to right.
        let mut text = String::with_capacity(grid.len() * 2);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if i > 0 {
                    text.push(',');
                }
                text.push(if raster.cells[grid.index(i, j)] == 1 {
                    '1'
                } else {
                    '0'
                });
            }
            text.push('\n');
        }
        write_text(&out.join("phase_contrast_mask.csv"), &text)?;
        mask_open_fraction = Some(raster.open_fraction());
    }

    #[derive(Serialize)]
    struct Extra {
        effective_gap_fraction: f64,
        gap_opt: f64,
        eta_at_gap_opt: f64,
        mask_eta_at_threshold: f64,
        threshold_opt: f64,
        eta_at_threshold_opt: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        mask_open_fraction: Option<f64>,
    }
    write_summary(
        &out.join("phase_contrast_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::PhaseContrast.slug(),
            config: cfg,
            budget: Some(BudgetSummary::new(&at_gap, cfg.optics.quantum_efficiency)),
            dde_integral_residual: None,
            extra: Extra {
                effective_gap_fraction: effective_gap,
                gap_opt: g_opt,
                eta_at_gap_opt: best.efficiency,
                mask_eta_at_threshold: mask_at.efficiency,
                threshold_opt: tscan.argmax,
                eta_at_threshold_opt: tscan.value,
                mask_open_fraction,
            },
        },
    )
}

fn fisher_check(cfg: &ScenarioConfig, out: &Path) -> Result<(), CliError> {
    let params = cfg.optical_params()?;
    let mc = cfg.membrane_config()?;
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let mut worst: f64 = 0.0;
    let mut push = |case: &str, phi: f64, n_perp: f64, rate: f64, s_ideal: f64| {
        let residual = (rate * s_ideal - 1.0).abs();
        rows.push(vec![
            Cell::Text(case.into()),
            Cell::Num(phi),
            Cell::Num(n_perp),
            Cell::Num(rate),
            Cell::Num(s_ideal),
            Cell::Num(residual),
        ]);
        residual
    };

    // Membrane mode at the device plane.
    let half = cfg.grid.pad_waists * mc.waist();
    let grid = CartesianGrid2D::centered(half, half, cfg.grid.device_nx, cfg.grid.device_ny)
        .map_err(CliError::Numerical)?;
    let u_in = gaussian_input(&mc, &grid).map_err(CliError::Numerical)?;
    let psi = membrane_mode(&mc, &grid).map_err(CliError::Numerical)?;
    let pair = reflect(&u_in, &psi).map_err(CliError::Numerical)?;
    let d = decompose(&pair).map_err(CliError::Numerical)?;
    let f = qfi(&pair, &params).map_err(CliError::Numerical)?;
    let s_ideal = 1.0
        / detopt_core::detection::ideal_information(&pair, &params)
            .map_err(CliError::Numerical)?;
    worst = worst.max(push(
        "membrane_device",
        d.phase_sensitivity,
        d.orthogonal_power,
        f.rate,
        s_ideal,
    ));

    // Interferometer: probe on an antinode.
    let flat = RealField::constant(&grid, 1.0);
    let ipair = reflect(&u_in, &flat).map_err(CliError::Numerical)?;
    let d = decompose(&ipair).map_err(CliError::Numerical)?;
    let f = qfi(&ipair, &params).map_err(CliError::Numerical)?;
    let bench = interferometer_benchmark(&params);
    worst = worst.max(push(
        "interferometer",
        d.phase_sensitivity,
        d.orthogonal_power,
        f.rate,
        bench.ideal_imprecision,
    ));

    // Dipole axes.
    for (name, axis) in [("dipole_x0", "x0"), ("dipole_y0", "y0")] {
        let mut sub = cfg.clone();
        sub.dipole.axis = axis.into();
        let scenario = dipole_scenario(&sub)?;
        let d = decompose_dipole(&scenario).map_err(CliError::Numerical)?;
        let f = qfi_dipole(&scenario).map_err(CliError::Numerical)?;
        worst = worst.max(push(
            name,
            d.phase_sensitivity,
            d.orthogonal_power,
            f.rate,
            1.0 / scenario.information(),
        ));
    }

    write_table(
        &out.join("fisher_check.csv"),
        &[
            "case",
            "phase_sensitivity",
            "orthogonal_power",
            "F_Q_per_s_per_m2",
            "S_ideal_m2_per_Hz",
            "product_residual",
        ],
        &rows,
    )?;

    #[derive(Serialize)]
    struct Extra {
        cases: usize,
        max_product_residual: f64,
    }
    write_summary(
        &out.join("fisher_check_summary.json"),
        &Summary {
            tool_version: VERSION,
            scenario: ScenarioKind::FisherCheck.slug(),
            config: cfg,
            // Reference scheme for the reported noise quantities.
            budget: Some(BudgetSummary::new(&bench_budget(&params), None)),
            dde_integral_residual: None,
            extra: Extra {
                cases: rows.len(),
                max_product_residual: worst,
            },
        },
    )
}

fn bench_budget(params: &detopt_core::fields::OpticalParams) -> DetectionBudget {
    interferometer_benchmark(params)
}
