//! Deterministic composite quadrature on Cartesian and solid-angle grids.
//!
//! Every integral in this crate goes through the two rules defined here:
//!
//! * [`CartesianGrid2D`] — uniform midpoint rule: nodes sit at cell centers
//!   `x_i = x_min + (i + 1/2) dx`, every node carries weight `dx·dy`.
//!   Placing nodes at midpoints means a step discontinuity that falls on a
//!   cell *boundary* never lands on a node, and each cell is integrated
//!   entirely on one side of the step. Constructors that build detector
//!   geometry are expected to snap their discontinuities to cell boundaries.
//! * [`SolidAngleGrid`] — nodes uniform in θ and φ, offset half a cell from
//!   the poles; each node carries the exact solid angle of its cell,
//!   `Δφ·(cos(θ−Δθ/2) − cos(θ+Δθ/2))`, so the weights telescope and sum to
//!   `2π(1 − cos θ_max)` to rounding.
//!
//! Sums are accumulated with Neumaier compensation in a fixed order, so
//! results are deterministic and accurate to ~1 ulp independent of any
//! caller-side parallelism.

use crate::error::{Error, Result};

/// Compensated (Neumaier) summation over an iterator, in iteration order.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Uniform 2-D Cartesian grid with midpoint-rule nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid2D {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
}

impl CartesianGrid2D {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples per axis, got {nx}x{ny}"
            )));
        }
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidGrid(format!(
                "empty extent: x [{x_min}, {x_max}], y [{y_min}, {y_max}]"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite()) {
            return Err(Error::InvalidGrid("non-finite extent".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        })
    }

    /// Grid centered on the origin, spanning `±half_x` by `±half_y`.
    pub fn centered(half_x: f64, half_y: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(-half_x, half_x, -half_y, half_y, nx, ny)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Node abscissa (cell midpoint) of column `i`.
    pub fn x_at(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }
    /// Node ordinate (cell midpoint) of row `j`.
    pub fn y_at(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 0.5) * self.dy()
    }

    /// Flat index of node `(i, j)`; values are stored row-major in `j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Sample `f(x, y)` at every node, in index order.
    pub fn sample<T>(&self, mut f: impl FnMut(f64, f64) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.nx {
            let x = self.x_at(i);
            for j in 0..self.ny {
                out.push(f(x, self.y_at(j)));
            }
        }
        out
    }

    /// Same grid extent with both sample counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            nx: self.nx * 2,
            ny: self.ny * 2,
            ..self.clone()
        }
    }

    /// Nearest cell boundary to `x` along the first axis.
    pub fn nearest_x_boundary(&self, x: f64) -> f64 {
        let steps = ((x - self.x_min) / self.dx()).round();
        let clamped = steps.clamp(0.0, self.nx as f64);
        self.x_min + clamped * self.dx()
    }

    /// Whether `x` lies on a cell boundary (within a relative tolerance of
    /// the spacing).
    pub fn is_x_boundary(&self, x: f64) -> bool {
        (x - self.nearest_x_boundary(x)).abs() <= 1e-9 * self.dx()
    }

    /// Column range `[i_lo, i_hi)` of cells fully inside `[a, b]`.
    /// Errors unless both edges lie on cell boundaries.
    pub(crate) fn x_cell_range(&self, a: f64, b: f64) -> Result<(usize, usize)> {
        for edge in [a, b] {
            if !self.is_x_boundary(edge) {
                return Err(Error::Misaligned(format!(
                    "edge at x = {edge} is not on a cell boundary (dx = {})",
                    self.dx()
                )));
            }
        }
        let i_lo = ((a - self.x_min) / self.dx()).round().max(0.0) as usize;
        let i_hi = (((b - self.x_min) / self.dx()).round() as usize).min(self.nx);
        Ok((i_lo.min(i_hi), i_hi))
    }
}

/// Midpoint-rule integral of real samples over the grid.
///
/// Deterministic: fixed summation order with Neumaier compensation.
pub fn integrate_2d(values: &[f64], grid: &CartesianGrid2D) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(compensated_sum(values.iter().copied()) * grid.cell_area())
}

/// Solid-angle grid over the polar cap `θ ∈ (0, θ_max]`, uniform in θ and φ
/// with half-cell offsets; per-node weights carry the sinθ Jacobian as the
/// exact solid angle of each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidAngleGrid {
    theta_max: f64,
    n_theta: usize,
    n_phi: usize,
}

impl SolidAngleGrid {
    pub fn new(theta_max: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(theta_max > 0.0 && theta_max <= std::f64::consts::FRAC_PI_2 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "theta_max must lie in (0, pi/2], got {theta_max}"
            )));
        }
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples per angle, got {n_theta}x{n_phi}"
            )));
        }
        Ok(Self {
            theta_max: theta_max.min(std::f64::consts::FRAC_PI_2),
            n_theta,
            n_phi,
        })
    }

    /// Cap subtended by a collection lens: `θ_max = arcsin(NA)`.
    pub fn from_numerical_aperture(na: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(na > 0.0 && na <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "numerical aperture must lie in (0, 1], got {na}"
            )));
        }
        Self::new(na.asin(), n_theta, n_phi)
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_theta(&self) -> f64 {
        self.theta_max / self.n_theta as f64
    }
    pub fn d_phi(&self) -> f64 {
        std::f64::consts::TAU / self.n_phi as f64
    }

    pub fn theta_at(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.d_theta()
    }
    pub fn phi_at(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_phi()
    }

    /// Exact solid angle of the cell in θ-row `i` (independent of φ).
    pub fn weight_at(&self, i: usize) -> f64 {
        let h = self.d_theta();
        let t = self.theta_at(i);
        self.d_phi() * ((t - 0.5 * h).cos() - (t + 0.5 * h).cos())
    }

    /// Flat index of node `(i, j)`; row-major in φ.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    /// Sample `f(θ, φ)` at every node, in index order.
    pub fn sample<T>(&self, mut f: impl FnMut(f64, f64) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta {
            let t = self.theta_at(i);
            for j in 0..self.n_phi {
                out.push(f(t, self.phi_at(j)));
            }
        }
        out
    }

    /// Total solid angle covered by the grid, `2π(1 − cos θ_max)`.
    pub fn solid_angle(&self) -> f64 {
        std::f64::consts::TAU * (1.0 - self.theta_max.cos())
    }

    pub fn refined(&self) -> Self {
        Self {
            n_theta: self.n_theta * 2,
            n_phi: self.n_phi * 2,
            ..*self
        }
    }

    /// Nearest θ cell boundary to `theta`.
    pub fn nearest_theta_boundary(&self, theta: f64) -> f64 {
        let steps = (theta / self.d_theta()).round().clamp(0.0, self.n_theta as f64);
        steps * self.d_theta()
    }
}

/// Solid-angle integral of real samples including the sinθ Jacobian.
pub fn integrate_sphere(values: &[f64], grid: &SolidAngleGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let n_phi = grid.n_phi();
    Ok(compensated_sum(values.iter().enumerate().map(|(idx, v)| {
        let i = idx / n_phi;
        v * grid.weight_at(i)
    })))
}

/// Outcome of a successful grid-refinement loop.
#[derive(Debug, Clone)]
pub struct Refined<G> {
    /// Value on the finest grid reached.
    pub value: f64,
    /// Value on the next-coarser grid (for error estimates).
    pub previous: f64,
    /// Number of refinements performed.
    pub refinements: u32,
    /// The grid that achieved convergence.
    pub grid: G,
}

/// Doubles resolution until two successive evaluations agree to `rel_tol`
/// relative, returning the finer value and the achieved grid.
pub fn refine_until<G: Clone>(
    base: G,
    refine: impl Fn(&G) -> G,
    eval: impl Fn(&G) -> Result<f64>,
    rel_tol: f64,
    max_refinements: u32,
) -> Result<Refined<G>> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    let mut grid = base;
    let mut value = eval(&grid)?;
    for level in 1..=max_refinements {
        let finer = refine(&grid);
        let next = eval(&finer)?;
        let scale = next.abs().max(value.abs()).max(f64::MIN_POSITIVE);
        if (next - value).abs() < rel_tol * scale {
            return Ok(Refined {
                value: next,
                previous: value,
                refinements: level,
                grid: finer,
            });
        }
        value = next;
        grid = finer;
    }
    let coarse = value;
    let finer = refine(&grid);
    let fine = eval(&finer)?;
    let scale = fine.abs().max(coarse.abs()).max(f64::MIN_POSITIVE);
    if (fine - coarse).abs() < rel_tol * scale {
        return Ok(Refined {
            value: fine,
            previous: coarse,
            refinements: max_refinements,
            grid: finer,
        });
    }
    Err(Error::NonConvergence {
        refinements: max_refinements,
        coarse,
        fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_integrates_to_area() {
        let grid = CartesianGrid2D::new(0.0, 1.0, 0.0, 1.0, 64, 64).unwrap();
        let ones = vec![1.0; grid.len()];
        let v = integrate_2d(&ones, &grid).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integrates_to_pi() {
        let grid = CartesianGrid2D::centered(6.0, 6.0, 256, 256).unwrap();
        let f = grid.sample(|x, y| (-(x * x + y * y)).exp());
        let v = integrate_2d(&f, &grid).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn odd_integrand_cancels() {
        let grid = CartesianGrid2D::new(-1.0, 1.0, 0.0, 1.0, 128, 16).unwrap();
        let f = grid.sample(|x, _| x);
        let v = integrate_2d(&f, &grid).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn integrate_rejects_wrong_length() {
        let grid = CartesianGrid2D::new(0.0, 1.0, 0.0, 1.0, 8, 8).unwrap();
        let err = integrate_2d(&[0.0; 5], &grid).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn linearity_of_integration() {
        let grid = CartesianGrid2D::centered(2.0, 2.0, 96, 96).unwrap();
        let f = grid.sample(|x, y| (x - 0.3).cos() * (y * 0.7).sin() + 0.2);
        let g = grid.sample(|x, y| (x * y).tanh());
        let (a, b) = (1.7, -0.45);
        let combined: Vec<f64> = f.iter().zip(&g).map(|(u, v)| a * u + b * v).collect();
        let lhs = integrate_2d(&combined, &grid).unwrap();
        let rhs = a * integrate_2d(&f, &grid).unwrap() + b * integrate_2d(&g, &grid).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        assert!((lhs - rhs).abs() / scale < 1e-12);
    }

    #[test]
    fn refinement_error_shrinks_for_smooth_integrand() {
        // |I(2n) - I(n)| decreases with n for a Gaussian test field.
        let mut grid = CartesianGrid2D::centered(4.0, 4.0, 8, 8).unwrap();
        let eval = |g: &CartesianGrid2D| {
            let f = g.sample(|x, y| (-(x * x + y * y) / 2.0).exp());
            integrate_2d(&f, g).unwrap()
        };
        let mut prev = eval(&grid);
        let mut last_jump = f64::INFINITY;
        for _ in 0..4 {
            let finer = grid.refined();
            let next = eval(&finer);
            let jump = (next - prev).abs();
            assert!(jump <= last_jump);
            last_jump = jump;
            prev = next;
            grid = finer;
        }
    }

    #[test]
    fn hemisphere_weights_sum_exactly() {
        let grid = SolidAngleGrid::new(std::f64::consts::FRAC_PI_2, 256, 512).unwrap();
        let ones = vec![1.0; grid.len()];
        let v = integrate_sphere(&ones, &grid).unwrap();
        assert!((v - std::f64::consts::TAU).abs() < 1e-9);
        // Cap invariant: weights telescope to 2π(1 − cos θ_max).
        let cap = SolidAngleGrid::from_numerical_aperture(0.62, 200, 64).unwrap();
        let ones = vec![1.0; cap.len()];
        let v = integrate_sphere(&ones, &cap).unwrap();
        assert_relative_eq!(v, cap.solid_angle(), max_relative = 1e-12);
    }

    #[test]
    fn lens_photon_rate_is_na_squared() {
        // ∫ cosθ/π over the cap θ ≤ arcsin(NA) equals NA².
        for na in [0.5, 0.8, 1.0] {
            let grid = SolidAngleGrid::from_numerical_aperture(na, 2048, 16).unwrap();
            let f = grid.sample(|t, _| t.cos() / std::f64::consts::PI);
            let v = integrate_sphere(&f, &grid).unwrap();
            assert!(
                (v - na * na).abs() < 1e-6,
                "NA={na}: got {v}, want {}",
                na * na
            );
        }
    }

    #[test]
    fn dipole_information_pattern_normalizes() {
        // Closed-form transverse-coordinate pattern integrated over the full
        // sphere (two hemispheres by symmetry) is unity.
        let grid = SolidAngleGrid::new(std::f64::consts::FRAC_PI_2, 1024, 1024).unwrap();
        let f = grid.sample(|t, p| {
            let (st, ct) = (t.sin(), t.cos());
            let _ = ct;
            15.0 / (16.0 * std::f64::consts::PI)
                * (1.0 - st * st * p.cos() * p.cos())
                * st
                * st
                * p.sin()
                * p.sin()
        });
        let v = 2.0 * integrate_sphere(&f, &grid).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn refine_until_converges_on_gaussian() {
        let base = CartesianGrid2D::centered(6.0, 6.0, 32, 32).unwrap();
        let out = refine_until(
            base,
            |g| g.refined(),
            |g| {
                let f = g.sample(|x, y| (-(x * x + y * y)).exp());
                integrate_2d(&f, g)
            },
            1e-6,
            4,
        )
        .unwrap();
        assert!(out.refinements <= 4);
        assert_relative_eq!(out.value, std::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn refine_until_handles_aligned_step() {
        // Sign step at x = 0 lies on a boundary of every refinement level,
        // so each half is a smooth integrand and convergence is immediate.
        let base = CartesianGrid2D::new(-1.0, 1.0, 0.0, 1.0, 16, 4).unwrap();
        let out = refine_until(
            base,
            |g| g.refined(),
            |g| {
                let f = g.sample(|x, _| x.signum() * (2.0 + x));
                integrate_2d(&f, g)
            },
            1e-4,
            6,
        )
        .unwrap();
        assert_relative_eq!(out.value, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn refine_until_rejects_zero_tolerance() {
        let base = CartesianGrid2D::new(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        let err = refine_until(base, |g| g.refined(), |_| Ok(1.0), 0.0, 4).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn refine_until_reports_both_values_on_failure() {
        let base = CartesianGrid2D::new(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
        // Alternating evaluator never settles.
        let flip = std::cell::Cell::new(1.0f64);
        let err = refine_until(
            base,
            |g| g.refined(),
            |_| {
                flip.set(-flip.get());
                Ok(flip.get())
            },
            1e-6,
            3,
        )
        .unwrap_err();
        match err {
            Error::NonConvergence { coarse, fine, .. } => {
                assert_ne!(coarse, fine);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn boundary_snapping() {
        let grid = CartesianGrid2D::centered(1.0, 1.0, 8, 8).unwrap();
        assert!(grid.is_x_boundary(0.0));
        assert!(grid.is_x_boundary(0.25));
        assert!(!grid.is_x_boundary(0.3));
        assert_relative_eq!(grid.nearest_x_boundary(0.3), 0.25);
        assert_relative_eq!(grid.nearest_x_boundary(5.0), 1.0);
    }

    #[test]
    fn grid_validation() {
        assert!(CartesianGrid2D::new(0.0, 1.0, 0.0, 1.0, 1, 8).is_err());
        assert!(CartesianGrid2D::new(1.0, 0.0, 0.0, 1.0, 8, 8).is_err());
        assert!(SolidAngleGrid::new(0.0, 8, 8).is_err());
        assert!(SolidAngleGrid::new(2.0, 8, 8).is_err());
        assert!(SolidAngleGrid::from_numerical_aperture(1.2, 8, 8).is_err());
    }
}
