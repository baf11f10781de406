//! Closed-form oracle for membrane far-field budgets.
//!
//! Independent of the library's quadrature/propagation pipeline: everything
//! here is erf algebra on the Gaussian-mixture form of the far fields.
//! With `c = z_d k_m / (2k)` (half the lobe offset), `w_d` the far-field
//! waist and `E = exp(−(k_m² + k_n²) w0²/4)`, the y-integrated densities
//! for amplitude α = 1 are
//!
//! ```text
//! n1d(x) = (1/√π w_d) e^{−x²/w_d²}
//! s1d(x) = (E/√π w_d) [e^{−(x+c)²/w_d²} − e^{−(x−c)²/w_d²}]
//! I      = 4 k² (1 − e^{−k_m²w0²})(1 + e^{−k_n²w0²})
//! ```
//!
//! so any union of x-intervals (split halves, blocks, wires) has an exact
//! sensitivity and noise, and the finite-wire exclusion estimate has a
//! closed form.

use detopt_core::fields::{MembraneConfig, OpticalParams};

pub struct MembraneOracle {
    k: f64,
    wd: f64,
    /// Half the diffraction-lobe offset, `z_d k_m / (2k)`.
    c: f64,
    /// Envelope factor `exp(−(k_m² + k_n²) w0² / 4)`.
    env: f64,
    information: f64,
}

#[allow(dead_code)]
impl MembraneOracle {
    pub fn new(cfg: &MembraneConfig, params: &OpticalParams) -> Self {
        let k = params.wavenumber();
        let wd = cfg.far_field_waist(params);
        let a = cfg.grating_parameter_x();
        let b = cfg.grating_parameter_y();
        Self {
            k,
            wd,
            c: cfg.detection_distance() * cfg.mode_wavenumber_x() / (2.0 * k),
            env: (-(a * a + b * b) / 4.0).exp(),
            information: 4.0 * k * k * (1.0 - (-a * a).exp()) * (1.0 + (-b * b).exp()),
        }
    }

    pub fn information(&self) -> f64 {
        self.information
    }

    /// `∫_a^b n1d dx` (fraction of the total photon rate).
    pub fn noise_in(&self, a: f64, b: f64) -> f64 {
        0.5 * (libm::erf(b / self.wd) - libm::erf(a / self.wd))
    }

    /// `∫_a^b s1d dx`.
    pub fn signal_in(&self, a: f64, b: f64) -> f64 {
        let g = |x: f64| libm::erf((x + self.c) / self.wd) - libm::erf((x - self.c) / self.wd);
        0.5 * self.env * (g(b) - g(a))
    }

    /// Sensitivity and noise of a split detector (±1 on sign of x) with the
    /// given blocked intervals, for α = 1.
    pub fn split_with_blocks(&self, blocks: &[(f64, f64)]) -> (f64, f64) {
        // Full split detector: closed form −4k E erf(c/wd).
        let mut s = -4.0 * self.k * self.env * libm::erf(self.c / self.wd);
        let mut n = 1.0;
        for &(a, b) in blocks {
            assert!(b > a);
            // Split at zero so each piece carries one sign.
            for (lo, hi) in [(a.min(0.0), b.min(0.0)), (a.max(0.0), b.max(0.0))] {
                if hi > lo {
                    let sign = if hi <= 0.0 { -1.0 } else { 1.0 };
                    s -= 2.0 * self.k * sign * self.signal_in(lo, hi);
                    n -= self.noise_in(lo, hi);
                }
            }
        }
        (s, n)
    }

    /// Efficiency of the blocked split detector.
    pub fn eta_with_blocks(&self, blocks: &[(f64, f64)]) -> f64 {
        let (s, n) = self.split_with_blocks(blocks);
        s * s / (n * self.information)
    }

    pub fn eta_split(&self) -> f64 {
        self.eta_with_blocks(&[])
    }

    pub fn eta_blocked(&self, width: f64) -> f64 {
        self.eta_with_blocks(&[(-width / 2.0, width / 2.0)])
    }

    /// Finite-wire exclusion estimate `(η − η_wire)/Δx` at wire center `x0`.
    pub fn wire_estimate(&self, x0: f64, width: f64) -> f64 {
        let eta = self.eta_split();
        let eta_wire = self.eta_with_blocks(&[(x0 - width / 2.0, x0 + width / 2.0)]);
        (eta - eta_wire) / width
    }

    /// Analytic split-detector efficiency profile `dη/dx` (infinitesimal
    /// exclusion).
    pub fn dde(&self, x: f64) -> f64 {
        let (s_full, n_full) = self.split_with_blocks(&[]);
        let s_over_n = s_full / n_full;
        let s_ideal = 1.0 / self.information;
        let s1d = self.env / (std::f64::consts::PI.sqrt() * self.wd)
            * ((-(x + self.c) * (x + self.c) / (self.wd * self.wd)).exp()
                - (-(x - self.c) * (x - self.c) / (self.wd * self.wd)).exp());
        let n1d = 1.0 / (std::f64::consts::PI.sqrt() * self.wd)
            * (-(x * x) / (self.wd * self.wd)).exp();
        s_ideal * (4.0 * self.k * s_over_n * s1d * x.signum() - s_over_n * s_over_n * n1d)
    }
}
