//! Shared resolution and tolerance knobs for grids, quadrature and ODE
//! integration, with a single multiplier for convergence studies.

use serde::{Deserialize, Serialize};

use crate::ode::OdeOptions;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolutions {
    /// Rays in geodesic polar grids.
    pub n_theta: usize,
    /// Radial samples per ray (kept even for Simpson weights).
    pub n_r: usize,
    /// Quadtree levels below the initial grid for smooth interior cells.
    pub interior_depth: u32,
    /// Quadtree levels for cells crossed by a region boundary.
    pub boundary_depth: u32,
    /// Per-axis Gauss points on interior cells.
    pub gauss_n: usize,
    /// Nodes for one-dimensional radius integrals.
    pub radial_gauss_n: usize,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// Relative tolerance for integrand-adaptive chart integrals.
    pub adaptive_tol: f64,
    pub adaptive_max_depth: u32,
}

impl Default for Resolutions {
    fn default() -> Self {
        Resolutions {
            n_theta: 48,
            n_r: 96,
            interior_depth: 4,
            boundary_depth: 8,
            gauss_n: 3,
            radial_gauss_n: 16,
            ode_rel_tol: 1e-11,
            ode_abs_tol: 1e-11,
            adaptive_tol: 1e-8,
            adaptive_max_depth: 24,
        }
    }
}

impl Resolutions {
    /// Scale every resolution by `k` (>= 1 refines). Doubling `k` doubles
    /// sample counts, deepens subdivision by one level and tightens the
    /// ODE and adaptive tolerances so that no fixed floor hides the
    /// quadrature convergence.
    pub fn scaled(&self, k: f64) -> Resolutions {
        assert!(k > 0.0);
        let depth_delta = k.log2().round() as i64;
        let bump = |d: u32| -> u32 { (d as i64 + depth_delta).clamp(1, 14) as u32 };
        let even = |n: usize| if n % 2 == 0 { n } else { n + 1 };
        Resolutions {
            n_theta: ((self.n_theta as f64 * k).round() as usize).max(8),
            n_r: even(((self.n_r as f64 * k).round() as usize).max(8)),
            interior_depth: bump(self.interior_depth),
            boundary_depth: bump(self.boundary_depth),
            gauss_n: self.gauss_n,
            radial_gauss_n: ((self.radial_gauss_n as f64 * k).round() as usize).clamp(4, 64),
            ode_rel_tol: self.ode_rel_tol / k.powi(4),
            ode_abs_tol: self.ode_abs_tol / k.powi(4),
            adaptive_tol: self.adaptive_tol / k.powi(4),
            adaptive_max_depth: (self.adaptive_max_depth as i64 + depth_delta).clamp(4, 30) as u32,
        }
    }

    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.ode_rel_tol,
            abs_tol: self.ode_abs_tol,
            max_steps: 2_000_000,
        }
    }
}

/// Default check tolerances: identities at 1e-3 relative, inequality
/// slack at -1e-3 of the scale of both sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity_rel: f64,
    pub inequality_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity_rel: 1e-3,
            inequality_rel: 1e-3,
        }
    }
}

impl Tolerances {
    pub fn identity(&self, scale: f64) -> f64 {
        self.identity_rel * (1.0 + scale.abs())
    }

    pub fn inequality(&self, lhs: f64, rhs: f64) -> f64 {
        self.inequality_rel * (1.0 + lhs.abs().max(rhs.abs()))
    }
}
