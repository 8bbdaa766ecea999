//! Geodesics, geodesic polar grids and intrinsic-ball integration.
//!
//! An intrinsic ball around a base point is realized as a fan of
//! unit-speed geodesic rays together with the radial metric coefficient
//! J(r, theta) (ds^2 = dr^2 + J^2 dtheta^2), integrated along each ray
//! from J'' + K J = 0, J(0) = 0, J'(0) = 1. This gives direct access to
//! areas, boundary length and geodesic curvature of intrinsic circles
//! with controlled accuracy.

use rayon::prelude::*;

use crate::chart::SurfaceChart;
use crate::geometry::{fundamental_forms, GeomError, ScalarField};
use crate::ode::{integrate_outputs, OdeError, OdeOptions};
use crate::quad::{cumulative_simpson, simpson, trapezoid_periodic};
use crate::record::{CheckKind, VerificationRecord};

#[derive(Debug, thiserror::Error)]
pub enum IntrinsicError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("geodesic integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("conjugate point on ray {ray} near radius {radius:.6}: J <= 0 inside the grid")]
    ConjugatePoint { ray: usize, radius: f64 },
    #[error("ray {ray} left the chart domain near radius {radius:.6}")]
    DomainExit { ray: usize, radius: f64 },
    #[error("requested radius {requested:.6} exceeds the injectivity lower bound {bound:.6}")]
    InjectivityBound { requested: f64, bound: f64 },
    #[error("direction has zero length in the metric")]
    ZeroDirection,
}

/// One sample along a geodesic.
#[derive(Debug, Clone, Copy)]
pub struct PathSample {
    pub arclength: f64,
    pub point: [f64; 2],
    /// Parameter velocity (du/dt, dv/dt).
    pub velocity: [f64; 2],
    pub ambient: [f64; 3],
    /// Unit tangent in ambient coordinates.
    pub tangent: [f64; 3],
    /// Radial Jacobi coefficient and its radial derivative.
    pub jacobi: f64,
    pub jacobi_deriv: f64,
}

/// A unit-speed geodesic traced from a starting point.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub samples: Vec<PathSample>,
    pub total_length: f64,
    /// True when the path stopped early at the domain boundary.
    pub truncated: bool,
    /// First radius where J crossed zero, if it did.
    pub conjugate_at: Option<f64>,
}

impl GeodesicPath {
    pub fn start(&self) -> &PathSample {
        &self.samples[0]
    }

    pub fn end(&self) -> &PathSample {
        self.samples.last().expect("paths have at least one sample")
    }
}

// State layout for the geodesic + Jacobi system.
const IU: usize = 0;
const IV: usize = 1;
const IP: usize = 2;
const IQ: usize = 3;
const IJ: usize = 4;
const IDJ: usize = 5;

fn geodesic_rhs(chart: &SurfaceChart, y: &[f64; 6]) -> Result<[f64; 6], OdeError> {
    let p = [y[IU], y[IV]];
    if !chart.domain().contains(p) {
        return Err(OdeError::Rhs {
            t: 0.0,
            message: "left domain".into(),
        });
    }
    let data = fundamental_forms(chart, p).map_err(|e| OdeError::Rhs {
        t: 0.0,
        message: e.to_string(),
    })?;
    let w = [y[IP], y[IQ]];
    let mut acc = [0.0; 2];
    for k in 0..2 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += data.christoffel[k][i][j] * w[i] * w[j];
            }
        }
        acc[k] = -s;
    }
    Ok([
        w[0],
        w[1],
        acc[0],
        acc[1],
        y[IDJ],
        -data.gauss_curv * y[IJ],
    ])
}

/// Normalize a parameter-space direction to unit length in the metric.
fn unit_direction(
    chart: &SurfaceChart,
    p: [f64; 2],
    dir: [f64; 2],
) -> Result<[f64; 2], IntrinsicError> {
    let data = fundamental_forms(chart, p)?;
    let g = data.metric;
    let n2 = g[0][0] * dir[0] * dir[0] + 2.0 * g[0][1] * dir[0] * dir[1] + g[1][1] * dir[1] * dir[1];
    if n2 <= 0.0 || !n2.is_finite() {
        return Err(IntrinsicError::ZeroDirection);
    }
    let inv = 1.0 / n2.sqrt();
    Ok([dir[0] * inv, dir[1] * inv])
}

fn sample_from_state(
    chart: &SurfaceChart,
    t: f64,
    y: &[f64; 6],
) -> Result<PathSample, IntrinsicError> {
    let p = [y[IU], y[IV]];
    let jets = chart
        .jets_unchecked(p)
        .map_err(crate::geometry::GeomError::Eval)?;
    let ambient = [jets[0].value(), jets[1].value(), jets[2].value()];
    let mut tangent = [0.0; 3];
    for c in 0..3 {
        tangent[c] = jets[c].partial(1, 0) * y[IP] + jets[c].partial(0, 1) * y[IQ];
    }
    let n = (tangent[0] * tangent[0] + tangent[1] * tangent[1] + tangent[2] * tangent[2]).sqrt();
    if n > 0.0 {
        for t in &mut tangent {
            *t /= n;
        }
    }
    Ok(PathSample {
        arclength: t,
        point: p,
        velocity: [y[IP], y[IQ]],
        ambient,
        tangent,
        jacobi: y[IJ],
        jacobi_deriv: y[IDJ],
    })
}

/// Shoot a single ray with the augmented Jacobi system, sampling at
/// uniform arclength stride. Stops early (without error) at the domain
/// boundary; the returned path is then flagged truncated.
fn shoot_ray(
    chart: &SurfaceChart,
    start: [f64; 2],
    dir_unit: [f64; 2],
    length: f64,
    n_samples: usize,
    opts: &OdeOptions,
) -> Result<GeodesicPath, IntrinsicError> {
    let y0 = [start[0], start[1], dir_unit[0], dir_unit[1], 0.0, 1.0];
    let base_sample = sample_from_state(chart, 0.0, &y0)?;
    let mut samples = vec![base_sample];
    let outputs: Vec<f64> = (1..=n_samples)
        .map(|i| length * i as f64 / n_samples as f64)
        .collect();

    let mut states: Vec<(f64, [f64; 6])> = vec![(0.0, y0)];
    let run = integrate_outputs(
        |_t, y: &[f64; 6]| geodesic_rhs(chart, y),
        0.0,
        y0,
        &outputs,
        opts,
        |_idx, t, y| {
            states.push((t, *y));
            true
        },
    );

    let truncated = match run {
        Ok(_) => false,
        Err(OdeError::Rhs { .. }) | Err(OdeError::StepUnderflow { .. }) => {
            // bisect the failing segment to land just inside the boundary
            let (mut t_ok, mut y_ok) = *states.last().expect("at least the start");
            let remaining = length - t_ok;
            let mut span = remaining;
            for _ in 0..60 {
                span *= 0.5;
                if span < 1e-12 * length.max(1.0) {
                    break;
                }
                let target = t_ok + span;
                let mut captured: Option<[f64; 6]> = None;
                let attempt = integrate_outputs(
                    |_t, y: &[f64; 6]| geodesic_rhs(chart, y),
                    t_ok,
                    y_ok,
                    &[target],
                    opts,
                    |_, _, y| {
                        captured = Some(*y);
                        true
                    },
                );
                if attempt.is_ok() {
                    if let Some(y) = captured {
                        t_ok = target;
                        y_ok = y;
                    }
                }
            }
            if t_ok > states.last().unwrap().0 {
                states.push((t_ok, y_ok));
            }
            true
        }
        Err(e) => return Err(IntrinsicError::Ode(e)),
    };

    let mut conjugate_at = None;
    for (i, (t, y)) in states.iter().enumerate().skip(1) {
        if conjugate_at.is_none() && y[IJ] <= 0.0 && *t > 0.0 {
            // linear interpolation of the J zero crossing
            let (t_prev, j_prev) = (states[i - 1].0, states[i - 1].1[IJ]);
            let denom = j_prev - y[IJ];
            let frac = if denom.abs() > 0.0 { j_prev / denom } else { 0.0 };
            conjugate_at = Some(t_prev + frac * (t - t_prev));
        }
        samples.push(sample_from_state(chart, *t, y)?);
    }

    let total_length = samples.last().map(|s| s.arclength).unwrap_or(0.0);
    Ok(GeodesicPath {
        samples,
        total_length,
        truncated,
        conjugate_at,
    })
}

/// Shoot a unit-speed geodesic of the requested length from `p`.
///
/// `direction` is a parameter-space direction, normalized internally to
/// unit metric length. `step` bounds the output stride (the integrator
/// substeps adaptively underneath). A path hitting the domain boundary is
/// returned truncated rather than failing.
pub fn shoot_geodesic(
    chart: &SurfaceChart,
    p: [f64; 2],
    direction: [f64; 2],
    length: f64,
    step: f64,
    opts: &OdeOptions,
) -> Result<GeodesicPath, IntrinsicError> {
    let dir = unit_direction(chart, p, direction)?;
    let n = ((length / step).ceil() as usize).max(4);
    shoot_ray(chart, p, dir, length, n, opts)
}

/// One ray of a polar grid.
#[derive(Debug, Clone)]
pub struct Ray {
    pub theta: f64,
    pub path: GeodesicPath,
}

/// Geodesic polar discretization of an intrinsic ball.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub base: [f64; 2],
    pub base_ambient: [f64; 3],
    pub r_max: f64,
    pub n_theta: usize,
    pub n_r: usize,
    pub rays: Vec<Ray>,
}

impl PolarGrid {
    /// Radial stride.
    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    /// J at (ray index, radial index); index 0 is the base (J = 0).
    pub fn jacobi(&self, ray: usize, ir: usize) -> f64 {
        self.rays[ray].path.samples[ir].jacobi
    }
}

/// Orthonormal tangent basis at a point, as parameter-space vectors.
fn orthonormal_basis(
    chart: &SurfaceChart,
    p: [f64; 2],
) -> Result<([f64; 2], [f64; 2]), IntrinsicError> {
    let data = fundamental_forms(chart, p)?;
    let g = data.metric;
    let e1 = [1.0 / g[0][0].sqrt(), 0.0];
    let det = data.det_metric;
    let c = (g[0][0] / det).sqrt();
    let e2 = [-g[0][1] / g[0][0] * c, c];
    Ok((e1, e2))
}

/// Build a geodesic polar grid of radius `r_max` around `base`.
///
/// Errors if any ray meets a conjugate point (J <= 0) or exits the chart
/// domain before `r_max`; the caller is responsible for keeping `r_max`
/// below the injectivity lower bound (see [`inj_radius_lower_bound`]).
pub fn polar_grid(
    chart: &SurfaceChart,
    base: [f64; 2],
    r_max: f64,
    n_theta: usize,
    n_r: usize,
    opts: &OdeOptions,
) -> Result<PolarGrid, IntrinsicError> {
    assert!(r_max > 0.0 && n_theta >= 4 && n_r >= 2);
    let (e1, e2) = orthonormal_basis(chart, base)?;
    let jets = chart.evaluate_jet(base, 1).map_err(GeomError::Chart)?;
    let base_ambient = [jets[0].value(), jets[1].value(), jets[2].value()];

    let ray_results: Vec<Result<Ray, IntrinsicError>> = (0..n_theta)
        .into_par_iter()
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
            let dir = [
                theta.cos() * e1[0] + theta.sin() * e2[0],
                theta.cos() * e1[1] + theta.sin() * e2[1],
            ];
            let dir = unit_direction(chart, base, dir)?;
            let path = shoot_ray(chart, base, dir, r_max, n_r, opts)?;
            if let Some(radius) = path.conjugate_at {
                return Err(IntrinsicError::ConjugatePoint { ray: k, radius });
            }
            if path.truncated || path.samples.len() != n_r + 1 {
                return Err(IntrinsicError::DomainExit {
                    ray: k,
                    radius: path.total_length,
                });
            }
            Ok(Ray { theta, path })
        })
        .collect();

    let mut rays = Vec::with_capacity(n_theta);
    for r in ray_results {
        rays.push(r?);
    }
    Ok(PolarGrid {
        base,
        base_ambient,
        r_max,
        n_theta,
        n_r,
        rays,
    })
}

/// An intrinsic ball of radius `radius` realized on a polar grid with
/// r_max = radius.
#[derive(Debug, Clone)]
pub struct IntrinsicBall {
    pub grid: PolarGrid,
}

impl IntrinsicBall {
    pub fn radius(&self) -> f64 {
        self.grid.r_max
    }

    pub fn chart_base(&self) -> [f64; 2] {
        self.grid.base
    }
}

/// Build an intrinsic ball, gated by the injectivity lower bound unless
/// `override_inj` acknowledges the risk explicitly.
pub fn intrinsic_ball(
    chart: &SurfaceChart,
    base: [f64; 2],
    radius: f64,
    n_theta: usize,
    n_r: usize,
    override_inj: bool,
    opts: &OdeOptions,
) -> Result<IntrinsicBall, IntrinsicError> {
    if !override_inj {
        let bound = inj_radius_lower_bound(chart, base, radius * 1.0001, n_theta, opts)?;
        if bound < radius {
            return Err(IntrinsicError::InjectivityBound {
                requested: radius,
                bound,
            });
        }
    }
    let grid = polar_grid(chart, base, radius, n_theta, n_r, opts)?;
    Ok(IntrinsicBall { grid })
}

// ---------------------------------------------------------------------------
// Integration over intrinsic balls
// ---------------------------------------------------------------------------

/// Integral of a scalar field over an intrinsic ball.
pub fn intrinsic_integral(
    chart: &SurfaceChart,
    ball: &IntrinsicBall,
    field: &dyn ScalarField,
) -> Result<f64, GeomError> {
    ball_integral(chart, ball, |c, p| field.value(c, p))
}

/// Integral over the ball of an arbitrary pointwise function.
pub fn ball_integral<F>(
    chart: &SurfaceChart,
    ball: &IntrinsicBall,
    f: F,
) -> Result<f64, GeomError>
where
    F: Fn(&SurfaceChart, [f64; 2]) -> Result<f64, GeomError> + Sync,
{
    let profile = shell_profile(chart, ball, f)?;
    Ok(simpson(ball.grid.dr(), &profile))
}

/// Shell profile with the chart passed explicitly.
pub fn shell_profile<F>(
    chart: &SurfaceChart,
    ball: &IntrinsicBall,
    f: F,
) -> Result<Vec<f64>, GeomError>
where
    F: Fn(&SurfaceChart, [f64; 2]) -> Result<f64, GeomError> + Sync,
{
    let grid = &ball.grid;
    let shells: Vec<Result<f64, GeomError>> = (0..=grid.n_r)
        .into_par_iter()
        .map(|ir| {
            if ir == 0 {
                return Ok(0.0);
            }
            let mut vals = Vec::with_capacity(grid.n_theta);
            for ray in &grid.rays {
                let s = &ray.path.samples[ir];
                vals.push(f(chart, s.point)? * s.jacobi);
            }
            Ok(trapezoid_periodic(2.0 * std::f64::consts::PI, &vals))
        })
        .collect();
    let mut out = Vec::with_capacity(grid.n_r + 1);
    for s in shells {
        out.push(s?);
    }
    Ok(out)
}

/// Length of the boundary circle and geodesic curvature samples along it
/// (k_g = J'/J at r = s in polar coordinates).
pub fn boundary_circle(ball: &IntrinsicBall) -> Result<(f64, Vec<f64>), IntrinsicError> {
    let grid = &ball.grid;
    let last = grid.n_r;
    let mut j_vals = Vec::with_capacity(grid.n_theta);
    let mut kg = Vec::with_capacity(grid.n_theta);
    for (k, ray) in grid.rays.iter().enumerate() {
        let s = &ray.path.samples[last];
        if s.jacobi <= 0.0 {
            return Err(IntrinsicError::ConjugatePoint {
                ray: k,
                radius: grid.r_max,
            });
        }
        j_vals.push(s.jacobi);
        kg.push(s.jacobi_deriv / s.jacobi);
    }
    let length = trapezoid_periodic(2.0 * std::f64::consts::PI, &j_vals);
    Ok((length, kg))
}

/// Area deficit identity on the ball: area - pi s^2 against the nested
/// triple integral of the Gaussian curvature, plus the first-derivative
/// version length(boundary at t) - 2 pi t against the double integral.
/// The record passes only when both residuals stay within `tol`.
pub fn gauss_bonnet_deficit(
    chart: &SurfaceChart,
    ball: &IntrinsicBall,
    tol: f64,
) -> Result<VerificationRecord, GeomError> {
    let grid = &ball.grid;
    let s = grid.r_max;
    let dr = grid.dr();

    let area_profile = shell_profile(chart, ball, |_c, _p| Ok(1.0))?;
    let k_profile = shell_profile(chart, ball, |c, p| Ok(fundamental_forms(c, p)?.gauss_curv))?;

    let area = simpson(dr, &area_profile);
    // I1(t) = integral over the ball of radius t of K
    let i1 = cumulative_simpson(dr, &k_profile);
    // I2(s) = int_0^s I1(t) dt
    let i2 = cumulative_simpson(dr, &i1);
    // I3(s) = int_0^s I2(t) dt  (triple integral)
    let i3 = cumulative_simpson(dr, &i2);

    let lhs = area - std::f64::consts::PI * s * s;
    let rhs = -i3[grid.n_r];

    // first-derivative version at t = s: boundary length - 2 pi t = -I2(t)
    let mut j_vals = Vec::with_capacity(grid.n_theta);
    for ray in &grid.rays {
        j_vals.push(ray.path.samples[grid.n_r].jacobi);
    }
    let boundary_len = trapezoid_periodic(2.0 * std::f64::consts::PI, &j_vals);
    let boundary_residual = (boundary_len - 2.0 * std::f64::consts::PI * s) - (-i2[grid.n_r]);

    let mut rec = VerificationRecord::identity("gauss_bonnet_area_deficit", lhs, rhs, tol)
        .with_meta("area", area)
        .with_meta("boundary_length", boundary_len)
        .with_meta("boundary_residual", boundary_residual)
        .with_meta("n_theta", grid.n_theta as f64)
        .with_meta("n_r", grid.n_r as f64);
    if boundary_residual.abs() > tol {
        rec.verdict = crate::record::Verdict::Fail;
    }
    Ok(rec)
}

// ---------------------------------------------------------------------------
// Injectivity radius lower bound
// ---------------------------------------------------------------------------

const COLLISION_DIST_FACTOR: f64 = 1e-3;
const COLLISION_ANGLE_DEG: f64 = 150.0;

/// Heuristic lower bound for the injectivity radius at `p`, valid for the
/// builtin families: the minimum of the first conjugate distance over a
/// ray fan (first zero of J) and the first detected ray collision (two
/// rays' points at equal arclength within 1e-3 r of each other in ambient
/// space with near-opposite tangents). Rays leaving the domain are
/// ignored for the scan; `r_probe` is returned when nothing is detected.
pub fn inj_radius_lower_bound(
    chart: &SurfaceChart,
    p: [f64; 2],
    r_probe: f64,
    n_theta: usize,
    opts: &OdeOptions,
) -> Result<f64, IntrinsicError> {
    if fundamental_forms(chart, p).is_err() {
        return Ok(0.0);
    }
    let (e1, e2) = match orthonormal_basis(chart, p) {
        Ok(b) => b,
        Err(_) => return Ok(0.0),
    };
    let n_r = ((r_probe / 0.02).ceil() as usize).clamp(64, 4000);

    let rays: Vec<GeodesicPath> = {
        let results: Vec<Result<GeodesicPath, IntrinsicError>> = (0..n_theta)
            .into_par_iter()
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
                let dir = [
                    theta.cos() * e1[0] + theta.sin() * e2[0],
                    theta.cos() * e1[1] + theta.sin() * e2[1],
                ];
                let dir = unit_direction(chart, p, dir)?;
                shoot_ray(chart, p, dir, r_probe, n_r, opts)
            })
            .collect();
        let mut rays = Vec::with_capacity(n_theta);
        for r in results {
            rays.push(r?);
        }
        rays
    };

    let mut best = r_probe;
    for ray in &rays {
        if let Some(r) = ray.conjugate_at {
            best = best.min(r);
        }
    }

    // collision scan at equal arclength
    let angle_cos = (COLLISION_ANGLE_DEG.to_radians()).cos();
    for a in 0..rays.len() {
        for b in (a + 1)..rays.len() {
            let ra = &rays[a].samples;
            let rb = &rays[b].samples;
            let m = ra.len().min(rb.len());
            let mut best_pair: Option<(usize, f64)> = None;
            for i in 1..m {
                let d = dist3(ra[i].ambient, rb[i].ambient);
                if best_pair.map(|(_, bd)| d < bd).unwrap_or(true) {
                    best_pair = Some((i, d));
                }
            }
            if let Some((i, d)) = best_pair {
                let r_here = ra[i].arclength;
                // refine the minimum of the squared distance parabolically
                let (r_min, d_min) = if i > 0 && i + 1 < m {
                    refine_min(
                        [ra[i - 1].arclength, ra[i].arclength, ra[i + 1].arclength],
                        [
                            dist3(ra[i - 1].ambient, rb[i - 1].ambient),
                            d,
                            dist3(ra[i + 1].ambient, rb[i + 1].ambient),
                        ],
                    )
                } else {
                    (r_here, d)
                };
                let tangent_dot = dot3(ra[i].tangent, rb[i].tangent);
                if d_min < COLLISION_DIST_FACTOR * r_min && tangent_dot < angle_cos {
                    best = best.min(r_min);
                }
            }
        }
    }
    Ok(best)
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Vertex of the parabola through three (x, y) samples, clamped to the
/// bracket; returns (x*, y*) with y evaluated on the parabola.
fn refine_min(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if curv <= 0.0 {
        return (x[1], y[1]);
    }
    let xs = (0.5 * (x[0] + x[1]) - d1 / (2.0 * curv)).clamp(x[0], x[2]);
    // evaluate the parabola at xs via its Newton form
    let ys = y[0] + d1 * (xs - x[0]) + curv * (xs - x[0]) * (xs - x[1]);
    (xs, ys.max(0.0))
}

// ---------------------------------------------------------------------------
// Chord bound for geodesics
// ---------------------------------------------------------------------------

/// Chord-versus-arclength bound along a geodesic: with
/// alpha = length * sup |A| along the path, the ambient chord between the
/// endpoints is at least length (1 - alpha). Vacuous when alpha >= 1.
pub fn chord_bound_check(
    chart: &SurfaceChart,
    path: &GeodesicPath,
) -> Result<VerificationRecord, GeomError> {
    let lambda = path.total_length;
    let mut sup_a: f64 = 0.0;
    for s in &path.samples {
        let d = fundamental_forms(chart, s.point)?;
        sup_a = sup_a.max(d.second_form_norm2.sqrt());
    }
    let alpha = lambda * sup_a;
    let chord = dist3(path.end().ambient, path.start().ambient);
    let bound = lambda * (1.0 - alpha);
    let rec = VerificationRecord::inequality("geodesic_chord_bound", chord, bound, 1e-6 * lambda)
        .with_meta("alpha", alpha)
        .with_meta("sup_a", sup_a)
        .with_meta("length", lambda);
    if alpha >= 1.0 {
        Ok(rec.into_vacuous())
    } else {
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{builtin_surface, Builtin};
    use crate::geometry::ConstField;

    fn opts() -> OdeOptions {
        OdeOptions::default()
    }

    fn unit_sphere() -> SurfaceChart {
        builtin_surface(&Builtin::Sphere {
            radius: 1.0,
            center: [0.0, 0.0, 0.0],
        })
        .unwrap()
    }

    #[test]
    fn plane_geodesics_are_straight() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let path = shoot_geodesic(&plane, [0.0, 0.0], [1.0, 0.0], 2.0, 0.05, &opts()).unwrap();
        assert!(!path.truncated);
        let chord = {
            let a = path.start().ambient;
            let b = path.end().ambient;
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        };
        assert!((chord - 2.0).abs() < 1e-9, "chord {chord}");
        // unit speed along the way
        for s in &path.samples {
            let jets = plane.jets_unchecked(s.point).unwrap();
            let mut v = [0.0; 3];
            for c in 0..3 {
                v[c] = jets[c].partial(1, 0) * s.velocity[0] + jets[c].partial(0, 1) * s.velocity[1];
            }
            let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((speed - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sphere_geodesic_reaches_antipode() {
        let sphere = unit_sphere();
        let start = [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2];
        let path = shoot_geodesic(
            &sphere,
            start,
            [0.3, 1.0],
            std::f64::consts::PI,
            0.02,
            &opts(),
        )
        .unwrap();
        assert!(!path.truncated);
        let a = path.start().ambient;
        let b = path.end().ambient;
        let chord =
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        assert!((chord - 2.0).abs() < 1e-6, "chord {chord}");
    }

    #[test]
    fn cylinder_ruling_is_straight() {
        let cyl = builtin_surface(&Builtin::Cylinder { radius: 1.0 }).unwrap();
        let path = shoot_geodesic(&cyl, [0.5, 0.0], [0.0, 1.0], 3.0, 0.05, &opts()).unwrap();
        let a = path.start().ambient;
        let b = path.end().ambient;
        let chord =
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        assert!((chord - 3.0).abs() < 1e-9, "chord {chord}");
    }

    #[test]
    fn jacobi_coefficient_matches_closed_forms() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let grid = polar_grid(&plane, [0.0, 0.0], 1.0, 8, 16, &opts()).unwrap();
        for ray in &grid.rays {
            for s in &ray.path.samples {
                assert!((s.jacobi - s.arclength).abs() < 1e-9);
            }
        }
        let sphere = unit_sphere();
        let grid = polar_grid(
            &sphere,
            [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            1.0,
            8,
            16,
            &opts(),
        )
        .unwrap();
        for ray in &grid.rays {
            for s in &ray.path.samples {
                assert!(
                    (s.jacobi - s.arclength.sin()).abs() < 1e-6,
                    "J {} vs sin r {}",
                    s.jacobi,
                    s.arclength.sin()
                );
            }
        }
        let cyl = builtin_surface(&Builtin::Cylinder { radius: 1.0 }).unwrap();
        let grid = polar_grid(&cyl, [0.0, 0.0], 2.0, 8, 16, &opts()).unwrap();
        for ray in &grid.rays {
            for s in &ray.path.samples {
                assert!((s.jacobi - s.arclength).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn polar_normalization_at_origin() {
        let sphere = unit_sphere();
        let grid = polar_grid(
            &sphere,
            [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            0.5,
            8,
            64,
            &opts(),
        )
        .unwrap();
        for ray in &grid.rays {
            let s0 = &ray.path.samples[0];
            assert_eq!(s0.jacobi, 0.0);
            assert!((s0.jacobi_deriv - 1.0).abs() < 1e-4);
            // J(h)/h -> 1
            let s1 = &ray.path.samples[1];
            assert!((s1.jacobi / s1.arclength - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn ball_area_examples() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let ball = intrinsic_ball(&plane, [0.0, 0.0], 1.0, 32, 32, false, &opts()).unwrap();
        let area = intrinsic_integral(&plane, &ball, &ConstField(1.0)).unwrap();
        assert!((area - std::f64::consts::PI).abs() < 1e-6, "area {area}");

        let sphere = unit_sphere();
        let ball = intrinsic_ball(
            &sphere,
            [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            1.0,
            32,
            32,
            false,
            &opts(),
        )
        .unwrap();
        let area = intrinsic_integral(&sphere, &ball, &ConstField(1.0)).unwrap();
        let exact = 2.0 * std::f64::consts::PI * (1.0 - 1.0f64.cos());
        assert!((area - exact).abs() < 1e-3, "area {area} vs {exact}");
        let a2 = intrinsic_integral(&sphere, &ball, &ConstField(2.0)).unwrap();
        assert!((a2 - 2.0 * exact).abs() < 2e-3);
    }

    #[test]
    fn boundary_circle_examples() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let ball = intrinsic_ball(&plane, [0.0, 0.0], 1.0, 16, 16, false, &opts()).unwrap();
        let (len, kg) = boundary_circle(&ball).unwrap();
        assert!((len - 2.0 * std::f64::consts::PI).abs() < 1e-8);
        for k in kg {
            assert!((k - 1.0).abs() < 1e-7);
        }

        let sphere = unit_sphere();
        let ball = intrinsic_ball(
            &sphere,
            [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            1.0,
            16,
            16,
            false,
            &opts(),
        )
        .unwrap();
        let (len, kg) = boundary_circle(&ball).unwrap();
        assert!((len - 2.0 * std::f64::consts::PI * 1.0f64.sin()).abs() < 1e-6);
        let expected_kg = 1.0f64.cos() / 1.0f64.sin();
        for k in kg {
            assert!((k - expected_kg).abs() < 1e-6, "kg {k} vs {expected_kg}");
        }

        let cyl = builtin_surface(&Builtin::Cylinder { radius: 1.0 }).unwrap();
        let ball = intrinsic_ball(&cyl, [0.0, 0.0], 1.0, 16, 16, false, &opts()).unwrap();
        let (len, kg) = boundary_circle(&ball).unwrap();
        assert!((len - 2.0 * std::f64::consts::PI).abs() < 1e-7);
        for k in kg {
            assert!((k - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn gauss_bonnet_records() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let ball = intrinsic_ball(&plane, [0.0, 0.0], 1.0, 16, 32, false, &opts()).unwrap();
        let rec = gauss_bonnet_deficit(&plane, &ball, 1e-6).unwrap();
        assert!(rec.passed(), "{rec:?}");
        assert!(rec.lhs.abs() < 1e-7);

        let sphere = unit_sphere();
        let ball = intrinsic_ball(
            &sphere,
            [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            1.0,
            32,
            64,
            false,
            &opts(),
        )
        .unwrap();
        let rec = gauss_bonnet_deficit(&sphere, &ball, 1e-3).unwrap();
        assert!(rec.passed(), "{rec:?}");
        // closed form: area - pi = 2 pi (1 - cos 1) - pi
        let exact = 2.0 * std::f64::consts::PI * (1.0 - 1.0f64.cos()) - std::f64::consts::PI;
        assert!((rec.lhs - exact).abs() < 1e-3, "lhs {} vs {exact}", rec.lhs);
    }

    #[test]
    fn inj_bound_examples() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        // domain is [-2,2]^2 so rays truncate, but nothing is detected
        let b = inj_radius_lower_bound(&plane, [0.0, 0.0], 10.0, 16, &opts()).unwrap();
        assert_eq!(b, 10.0);

        let sphere = unit_sphere();
        let b = inj_radius_lower_bound(
            &sphere,
            [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
            4.0,
            32,
            &opts(),
        )
        .unwrap();
        assert!(
            (b - std::f64::consts::PI).abs() < 1e-2,
            "sphere bound {b} vs pi"
        );

        let cyl = builtin_surface(&Builtin::Cylinder { radius: 1.0 }).unwrap();
        let b = inj_radius_lower_bound(&cyl, [0.0, 0.0], 4.0, 32, &opts()).unwrap();
        assert!(
            (b - std::f64::consts::PI).abs() < 1e-1,
            "cylinder bound {b} vs pi"
        );
    }

    #[test]
    fn ball_respects_inj_gate() {
        let sphere = unit_sphere();
        let base = [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2];
        let err = intrinsic_ball(&sphere, base, 3.5, 16, 16, false, &opts());
        assert!(matches!(err, Err(IntrinsicError::InjectivityBound { .. })));
    }

    #[test]
    fn chord_bound_examples() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let path = shoot_geodesic(&plane, [0.0, 0.0], [0.6, 0.8], 1.5, 0.05, &opts()).unwrap();
        let rec = chord_bound_check(&plane, &path).unwrap();
        assert!(rec.passed());
        assert!((rec.lhs - 1.5).abs() < 1e-9);
        assert!((rec.rhs - 1.5).abs() < 1e-9); // equality case

        let sphere = unit_sphere();
        let start = [std::f64::consts::FRAC_PI_2, 1.0];
        let path = shoot_geodesic(&sphere, start, [1.0, 0.4], 0.5, 0.01, &opts()).unwrap();
        let rec = chord_bound_check(&sphere, &path).unwrap();
        assert!(rec.passed());
        let alpha = rec.metadata["alpha"];
        assert!((alpha - std::f64::consts::SQRT_2 * 0.5).abs() < 1e-9);
        assert!((rec.rhs - 0.5 * (1.0 - alpha)).abs() < 1e-12);
        assert!((rec.lhs - 2.0 * (0.25f64).sin()).abs() < 1e-6);

        // vacuous case: alpha >= 1
        let long_path = shoot_geodesic(
            &sphere,
            start,
            [1.0, 0.4],
            std::f64::consts::FRAC_PI_2,
            0.01,
            &opts(),
        )
        .unwrap();
        let rec = chord_bound_check(&sphere, &long_path).unwrap();
        assert_eq!(rec.verdict, crate::record::Verdict::Vacuous);
    }
}
