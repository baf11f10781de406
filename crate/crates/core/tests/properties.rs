//! Property tests for the budget invariants: no weighting beats the ideal
//! scheme, efficiencies ignore weighting scale, and the quadrature is
//! linear.

use std::sync::OnceLock;

use detopt_core::detection::WeightFunction;
use detopt_core::fields::{MembraneConfig, OpticalParams, RealField};
use detopt_core::membrane::{FarGridSpec, MembraneScenario};
use detopt_core::quadrature::{integrate_2d, CartesianGrid2D};
use detopt_core::Error;
use proptest::prelude::*;

fn lever() -> &'static MembraneScenario {
    static SCENARIO: OnceLock<MembraneScenario> = OnceLock::new();
    SCENARIO.get_or_init(|| {
        let params = OpticalParams::new(1.064e-6, 1.0).unwrap();
        let w0 = 100e-6;
        let km = 0.1 / w0;
        let zd = 560e-6 * params.wavenumber() * w0;
        let cfg =
            MembraneConfig::new(std::f64::consts::PI * 2.0 / km, 3.5e-3, 2, 1, w0, zd).unwrap();
        MembraneScenario::optical_lever(
            cfg,
            params,
            &FarGridSpec {
                nx: 512,
                ny: 32,
                pad_waists: 6.0,
            },
        )
        .unwrap()
    })
}

fn piecewise_weight(edges: &[usize], values: &[f64], grid: &CartesianGrid2D) -> RealField {
    let mut columns = vec![0.0f64; grid.nx()];
    let mut sorted = edges.to_vec();
    sorted.push(0);
    sorted.push(grid.nx());
    sorted.sort_unstable();
    sorted.dedup();
    for (seg, w) in sorted.windows(2).enumerate() {
        let v = values[seg % values.len()];
        for col in columns.iter_mut().take(w[1]).skip(w[0]) {
            *col = v;
        }
    }
    let nx = grid.nx();
    let x_min = grid.x_min();
    let dx = grid.dx();
    RealField::from_fn(grid, move |x, _| {
        columns[(((x - x_min) / dx).floor() as usize).min(nx - 1)]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    /// No piecewise weighting exceeds unit efficiency.
    #[test]
    fn efficiency_never_exceeds_one(
        edges in prop::collection::vec(1usize..512, 1..14),
        values in prop::collection::vec(-3.0f64..3.0, 1..14),
    ) {
        let scenario = lever();
        let grid = scenario.grid();
        let field = piecewise_weight(&edges, &values, grid);
        match scenario.budget(&WeightFunction::custom(field)) {
            Ok(b) => prop_assert!(b.efficiency <= 1.0 + 1e-9, "η = {}", b.efficiency),
            Err(Error::DegenerateWeighting) => {}
            Err(other) => return Err(TestCaseError::fail(format!("unexpected error {other:?}"))),
        }
    }

    /// Scaling a weighting leaves the efficiency unchanged.
    #[test]
    fn efficiency_ignores_weighting_scale(
        edges in prop::collection::vec(1usize..512, 1..10),
        values in prop::collection::vec(-2.0f64..2.0, 1..10),
        scale in prop::sample::select(vec![-7.0f64, -0.3, 0.02, 1.0, 42.0]),
    ) {
        let scenario = lever();
        let grid = scenario.grid();
        let field = piecewise_weight(&edges, &values, grid);
        let scaled = RealField::from_fn(grid, |x, y| {
            let i = (((x - grid.x_min()) / grid.dx()).floor() as usize).min(grid.nx() - 1);
            let j = (((y - grid.y_min()) / grid.dy()).floor() as usize).min(grid.ny() - 1);
            field.values()[grid.index(i, j)] * scale
        });
        let b1 = scenario.budget(&WeightFunction::custom(field));
        let b2 = scenario.budget(&WeightFunction::custom(scaled));
        match (b1, b2) {
            (Ok(a), Ok(b)) => {
                prop_assert!(
                    (a.efficiency - b.efficiency).abs() <= 1e-9 * a.efficiency.abs().max(1e-300),
                    "{} vs {}", a.efficiency, b.efficiency
                );
            }
            (Err(Error::DegenerateWeighting), Err(Error::DegenerateWeighting)) => {}
            (a, b) => return Err(TestCaseError::fail(format!("inconsistent outcomes {a:?} vs {b:?}"))),
        }
    }

    /// Quadrature linearity on smooth fields.
    #[test]
    fn integration_is_linear(
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        kx in 0.2f64..4.0,
        ky in 0.2f64..4.0,
    ) {
        let grid = CartesianGrid2D::centered(1.5, 1.5, 48, 48).unwrap();
        let f = grid.sample(|x, y| (kx * x).sin() * (ky * y).cos() + 0.1 * x);
        let g = grid.sample(|x, y| (-(x * x + y * y)).exp());
        let combo: Vec<f64> = f.iter().zip(&g).map(|(u, v)| a * u + b * v).collect();
        let lhs = integrate_2d(&combo, &grid).unwrap();
        let rhs = a * integrate_2d(&f, &grid).unwrap() + b * integrate_2d(&g, &grid).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1e-12);
        prop_assert!((lhs - rhs).abs() / scale <= 1e-12);
    }
}
