//! Parametric surface charts: a 2-D parameter domain plus three component
//! expressions, evaluated together with all partial derivatives up to
//! order 4 through jet arithmetic (never finite differences).

use crate::expr::{parse_expression, Expr, ParseError};
use crate::jet::Taylor4;

pub use crate::expr::EvalError;

/// Parameter domain of a chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain2D {
    Rectangle {
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
}

impl Domain2D {
    pub fn rectangle(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self, ChartError> {
        if !(u_min < u_max && v_min < v_max) {
            return Err(ChartError::EmptyDomain);
        }
        Ok(Domain2D::Rectangle {
            u_min,
            u_max,
            v_min,
            v_max,
        })
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self, ChartError> {
        if !(radius > 0.0) {
            return Err(ChartError::EmptyDomain);
        }
        Ok(Domain2D::Disk { center, radius })
    }

    /// Strict interior membership, with an optional inward margin.
    pub fn contains_inner(&self, p: [f64; 2], margin: f64) -> bool {
        match *self {
            Domain2D::Rectangle {
                u_min,
                u_max,
                v_min,
                v_max,
            } => {
                p[0] > u_min + margin
                    && p[0] < u_max - margin
                    && p[1] > v_min + margin
                    && p[1] < v_max - margin
            }
            Domain2D::Disk { center, radius } => {
                let du = p[0] - center[0];
                let dv = p[1] - center[1];
                (du * du + dv * dv).sqrt() < radius - margin
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.contains_inner(p, 0.0)
    }

    /// Axis-aligned bounding box (u_min, u_max, v_min, v_max).
    pub fn bbox(&self) -> [f64; 4] {
        match *self {
            Domain2D::Rectangle {
                u_min,
                u_max,
                v_min,
                v_max,
            } => [u_min, u_max, v_min, v_max],
            Domain2D::Disk { center, radius } => [
                center[0] - radius,
                center[0] + radius,
                center[1] - radius,
                center[1] + radius,
            ],
        }
    }

    /// Characteristic length scale, used for probe margins.
    pub fn scale(&self) -> f64 {
        let b = self.bbox();
        (b[1] - b[0]).max(b[3] - b[2])
    }

    /// Deterministic lattice of interior probe points.
    pub fn probe_points(&self, n: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(n * n);
        match *self {
            Domain2D::Rectangle {
                u_min,
                u_max,
                v_min,
                v_max,
            } => {
                for i in 0..n {
                    let fu = (i as f64 + 0.5) / n as f64;
                    for j in 0..n {
                        let fv = (j as f64 + 0.5) / n as f64;
                        pts.push([u_min + fu * (u_max - u_min), v_min + fv * (v_max - v_min)]);
                    }
                }
            }
            Domain2D::Disk { center, radius } => {
                pts.push(center);
                for i in 1..n {
                    let r = radius * (i as f64 + 0.5) / (n as f64 + 0.5);
                    for j in 0..(2 * n) {
                        let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.3) / (2 * n) as f64;
                        pts.push([center[0] + r * th.cos(), center[1] + r * th.sin()]);
                    }
                }
            }
        }
        pts
    }

    /// Points tracing the domain boundary.
    pub fn boundary_points(&self, n: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(4 * n);
        match *self {
            Domain2D::Rectangle {
                u_min,
                u_max,
                v_min,
                v_max,
            } => {
                for i in 0..n {
                    let f = i as f64 / n as f64;
                    pts.push([u_min + f * (u_max - u_min), v_min]);
                    pts.push([u_min + f * (u_max - u_min), v_max]);
                    pts.push([u_min, v_min + f * (v_max - v_min)]);
                    pts.push([u_max, v_min + f * (v_max - v_min)]);
                }
            }
            Domain2D::Disk { center, radius } => {
                for i in 0..(4 * n) {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / (4 * n) as f64;
                    pts.push([center[0] + radius * th.cos(), center[1] + radius * th.sin()]);
                }
            }
        }
        pts
    }
}

/// Value and all mixed partials of one chart component up to order 4.
#[derive(Debug, Clone, Copy)]
pub struct Jet4(Taylor4);

impl Jet4 {
    pub fn value(&self) -> f64 {
        self.0.value()
    }

    /// d^{a+b} F / du^a dv^b with a + b <= 4.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        self.0.partial(a, b)
    }

    pub fn taylor(&self) -> Taylor4 {
        self.0
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ChartError {
    #[error("domain has empty interior")]
    EmptyDomain,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("expression not evaluable on the domain: {0}")]
    ProbeFailure(EvalError),
    #[error("immersion condition fails at ({0}, {1}): |F_u x F_v| = {2:.3e}")]
    DegenerateImmersion(f64, f64, f64),
    #[error("invalid parameter for builtin surface: {0}")]
    InvalidParameter(String),
    #[error("point ({0}, {1}) is outside the chart domain")]
    OutsideDomain(f64, f64),
    #[error("rotation matrix is not orthogonal (||R^T R - I|| = {0:.3e})")]
    NotOrthogonal(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

const IMMERSION_FLOOR: f64 = 1e-12;

/// A parametric immersion of a 2-D domain into 3-space.
#[derive(Debug, Clone)]
pub struct SurfaceChart {
    components: [Expr; 3],
    domain: Domain2D,
    label: String,
}

impl SurfaceChart {
    /// Build a chart and run the construction probe pass: every sampled
    /// interior point must evaluate without domain faults and satisfy the
    /// immersion condition |F_u x F_v| > 1e-12.
    pub fn new(
        components: [Expr; 3],
        domain: Domain2D,
        label: impl Into<String>,
    ) -> Result<Self, ChartError> {
        let chart = SurfaceChart {
            components,
            domain,
            label: label.into(),
        };
        let margin = 1e-9 * chart.domain.scale();
        for p in chart.domain.probe_points(16) {
            if !chart.domain.contains_inner(p, margin) {
                continue;
            }
            let jets = chart.jets_at(p).map_err(ChartError::ProbeFailure)?;
            let fu = [
                jets[0].partial(1, 0),
                jets[1].partial(1, 0),
                jets[2].partial(1, 0),
            ];
            let fv = [
                jets[0].partial(0, 1),
                jets[1].partial(0, 1),
                jets[2].partial(0, 1),
            ];
            let cross = [
                fu[1] * fv[2] - fu[2] * fv[1],
                fu[2] * fv[0] - fu[0] * fv[2],
                fu[0] * fv[1] - fu[1] * fv[0],
            ];
            let norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
            if norm <= IMMERSION_FLOOR {
                return Err(ChartError::DegenerateImmersion(p[0], p[1], norm));
            }
        }
        Ok(chart)
    }

    /// Parse three component expressions and build the chart.
    pub fn parametric(
        exprs: [&str; 3],
        domain: Domain2D,
        label: impl Into<String>,
    ) -> Result<Self, ChartError> {
        let components = [
            parse_expression(exprs[0])?,
            parse_expression(exprs[1])?,
            parse_expression(exprs[2])?,
        ];
        SurfaceChart::new(components, domain, label)
    }

    /// Graph chart (u, v, w(u, v)).
    pub fn graph(height: &str, domain: Domain2D, label: impl Into<String>) -> Result<Self, ChartError> {
        let components = [
            Expr::Var(crate::expr::Var::U),
            Expr::Var(crate::expr::Var::V),
            parse_expression(height)?,
        ];
        SurfaceChart::new(components, domain, label)
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.components
    }

    pub fn domain(&self) -> &Domain2D {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when the chart is a graph (u, v, w(u, v)).
    pub fn is_graph(&self) -> bool {
        self.components[0] == Expr::Var(crate::expr::Var::U)
            && self.components[1] == Expr::Var(crate::expr::Var::V)
    }

    fn jets_at(&self, p: [f64; 2]) -> Result<[Jet4; 3], EvalError> {
        Ok([
            Jet4(self.components[0].eval_jet(p[0], p[1])?),
            Jet4(self.components[1].eval_jet(p[0], p[1])?),
            Jet4(self.components[2].eval_jet(p[0], p[1])?),
        ])
    }

    /// Evaluate the three component jets at an interior point. `order` is
    /// the highest derivative order the caller intends to read (1..=4);
    /// all partials up to 4 are computed exactly regardless.
    pub fn evaluate_jet(&self, p: [f64; 2], order: usize) -> Result<[Jet4; 3], ChartError> {
        if !(1..=4).contains(&order) {
            return Err(ChartError::InvalidParameter(format!(
                "jet order must be in 1..=4, got {order}"
            )));
        }
        if !self.domain.contains(p) {
            return Err(ChartError::OutsideDomain(p[0], p[1]));
        }
        Ok(self.jets_at(p)?)
    }

    /// Component jets without the domain-membership guard; used internally
    /// where points may sit on the closed boundary.
    pub(crate) fn jets_unchecked(&self, p: [f64; 2]) -> Result<[Jet4; 3], EvalError> {
        self.jets_at(p)
    }

    /// Ambient position at a parameter point.
    pub fn position(&self, p: [f64; 2]) -> Result<[f64; 3], EvalError> {
        Ok([
            self.components[0].eval(p[0], p[1])?,
            self.components[1].eval(p[0], p[1])?,
            self.components[2].eval(p[0], p[1])?,
        ])
    }

    /// Search for a parameter point whose image is `target`, within
    /// ambient distance `tol`. Scans a closed lattice (including the
    /// boundary) and polishes with Newton steps on |F - target|^2.
    pub fn find_preimage(&self, target: [f64; 3], tol: f64) -> Option<[f64; 2]> {
        let b = self.bbox_closed_lattice(48);
        let dist2 = |p: [f64; 2]| -> f64 {
            match self.position(p) {
                Ok(f) => {
                    let d = [f[0] - target[0], f[1] - target[1], f[2] - target[2]];
                    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                }
                Err(_) => f64::INFINITY,
            }
        };
        let mut best = b[0];
        let mut best_d = dist2(best);
        for &p in &b {
            let d = dist2(p);
            if d < best_d {
                best_d = d;
                best = p;
            }
        }
        // Gauss-Newton polish on the closed domain
        let mut p = best;
        for _ in 0..60 {
            let jets = self.jets_at(p).ok()?;
            let f = [
                jets[0].value() - target[0],
                jets[1].value() - target[1],
                jets[2].value() - target[2],
            ];
            let fu = [
                jets[0].partial(1, 0),
                jets[1].partial(1, 0),
                jets[2].partial(1, 0),
            ];
            let fv = [
                jets[0].partial(0, 1),
                jets[1].partial(0, 1),
                jets[2].partial(0, 1),
            ];
            let g = [dot3(f, fu), dot3(f, fv)];
            let a = dot3(fu, fu);
            let bb = dot3(fu, fv);
            let c = dot3(fv, fv);
            let det = a * c - bb * bb;
            if det.abs() < 1e-30 {
                break;
            }
            let du = (-c * g[0] + bb * g[1]) / det;
            let dv = (bb * g[0] - a * g[1]) / det;
            let mut q = [p[0] + du, p[1] + dv];
            self.clamp_to_closed_domain(&mut q);
            if dist2(q) >= dist2(p) - 1e-30 {
                p = if dist2(q) < dist2(p) { q } else { p };
                break;
            }
            p = q;
        }
        if dist2(p).sqrt() < tol {
            Some(p)
        } else {
            None
        }
    }

    fn bbox_closed_lattice(&self, n: usize) -> Vec<[f64; 2]> {
        let bb = self.domain.bbox();
        let mut pts = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            let u = bb[0] + (bb[1] - bb[0]) * i as f64 / n as f64;
            for j in 0..=n {
                let v = bb[2] + (bb[3] - bb[2]) * j as f64 / n as f64;
                let mut p = [u, v];
                self.clamp_to_closed_domain(&mut p);
                pts.push(p);
            }
        }
        pts
    }

    fn clamp_to_closed_domain(&self, p: &mut [f64; 2]) {
        match self.domain {
            Domain2D::Rectangle {
                u_min,
                u_max,
                v_min,
                v_max,
            } => {
                p[0] = p[0].clamp(u_min, u_max);
                p[1] = p[1].clamp(v_min, v_max);
            }
            Domain2D::Disk { center, radius } => {
                let d = [p[0] - center[0], p[1] - center[1]];
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if r > radius {
                    p[0] = center[0] + d[0] * radius / r;
                    p[1] = center[1] + d[1] * radius / r;
                }
            }
        }
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Wrap an f64 as a literal, keeping negative values printable/reparsable.
fn literal(x: f64) -> Expr {
    if x < 0.0 {
        Expr::Neg(Box::new(Expr::Num(-x)))
    } else {
        Expr::Num(x)
    }
}

/// Scale every component by `lambda` (an ambient homothety).
pub fn scale_chart(chart: &SurfaceChart, lambda: f64) -> Result<SurfaceChart, ChartError> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(ChartError::InvalidParameter("scale must be nonzero".into()));
    }
    let comp = chart.components();
    let scaled = [
        Expr::Bin(
            crate::expr::BinOp::Mul,
            Box::new(literal(lambda)),
            Box::new(comp[0].clone()),
        ),
        Expr::Bin(
            crate::expr::BinOp::Mul,
            Box::new(literal(lambda)),
            Box::new(comp[1].clone()),
        ),
        Expr::Bin(
            crate::expr::BinOp::Mul,
            Box::new(literal(lambda)),
            Box::new(comp[2].clone()),
        ),
    ];
    SurfaceChart::new(
        scaled,
        chart.domain().clone(),
        format!("{}|x{}", chart.label(), lambda),
    )
}

/// Swap the two parameters, reversing the chart orientation.
pub fn swap_orientation(chart: &SurfaceChart) -> Result<SurfaceChart, ChartError> {
    let comp = chart.components();
    let swapped = [
        comp[0].swap_vars(),
        comp[1].swap_vars(),
        comp[2].swap_vars(),
    ];
    let domain = match *chart.domain() {
        Domain2D::Rectangle {
            u_min,
            u_max,
            v_min,
            v_max,
        } => Domain2D::Rectangle {
            u_min: v_min,
            u_max: v_max,
            v_min: u_min,
            v_max: u_max,
        },
        Domain2D::Disk { center, radius } => Domain2D::Disk {
            center: [center[1], center[0]],
            radius,
        },
    };
    SurfaceChart::new(swapped, domain, format!("{}|swapped", chart.label()))
}

// ---------------------------------------------------------------------------
// Builtin surfaces
// ---------------------------------------------------------------------------

/// Test-fixture surface families.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// Horizontal plane (u, v, 0) over [-2, 2]^2.
    Plane,
    /// Round sphere of radius `radius` centered at `center`, classical
    /// polar parametrization, u in (0, pi), v in (0, 2 pi).
    Sphere { radius: f64, center: [f64; 3] },
    /// Cylinder of radius `radius` around the x3 axis.
    Cylinder { radius: f64 },
    /// Standard catenoid (cosh v cos u, cosh v sin u, v).
    Catenoid,
    /// Graph over a domain.
    Graph { height: String, domain: Domain2D },
    /// The sharpness example: graph of
    /// x*y*(log(x^2+y^2+eps)/log(eps))^alpha over the disk of radius 1/2.
    /// On that disk both logs are negative, so the ratio is positive and
    /// the fractional power is real; eps <= 1/2 guarantees this.
    LogSaddle { alpha: f64, eps: f64 },
}

/// Construct a builtin surface chart.
pub fn builtin_surface(b: &Builtin) -> Result<SurfaceChart, ChartError> {
    match b {
        Builtin::Plane => SurfaceChart::parametric(
            ["u", "v", "0"],
            Domain2D::rectangle(-2.0, 2.0, -2.0, 2.0)?,
            "plane",
        ),
        Builtin::Sphere { radius, center } => {
            if !(*radius > 0.0) {
                return Err(ChartError::InvalidParameter(format!(
                    "sphere radius must be positive, got {radius}"
                )));
            }
            let r = *radius;
            let fmt = |c: f64, trig: &str| -> String { format!("{c:?}+{r:?}*{trig}") };
            let components = [
                fmt(center[0], "(sin(u)*cos(v))"),
                fmt(center[1], "(sin(u)*sin(v))"),
                fmt(center[2], "cos(u)"),
            ];
            SurfaceChart::parametric(
                [&components[0], &components[1], &components[2]],
                Domain2D::rectangle(0.0, std::f64::consts::PI, 0.0, 2.0 * std::f64::consts::PI)?,
                format!("sphere_r{radius}"),
            )
        }
        Builtin::Cylinder { radius } => {
            if !(*radius > 0.0) {
                return Err(ChartError::InvalidParameter(format!(
                    "cylinder radius must be positive, got {radius}"
                )));
            }
            let r = *radius;
            SurfaceChart::parametric(
                [
                    &format!("{r:?}*cos(u)"),
                    &format!("{r:?}*sin(u)"),
                    "v",
                ],
                Domain2D::rectangle(
                    -2.0 * std::f64::consts::PI,
                    2.0 * std::f64::consts::PI,
                    -6.0,
                    6.0,
                )?,
                format!("cylinder_r{radius}"),
            )
        }
        Builtin::Catenoid => SurfaceChart::parametric(
            [
                "((exp(v)+exp(-v))/2)*cos(u)",
                "((exp(v)+exp(-v))/2)*sin(u)",
                "v",
            ],
            Domain2D::rectangle(-std::f64::consts::PI, std::f64::consts::PI, -2.0, 2.0)?,
            "catenoid",
        ),
        Builtin::Graph { height, domain } => {
            SurfaceChart::graph(height, domain.clone(), format!("graph({height})"))
        }
        Builtin::LogSaddle { alpha, eps } => {
            if !(*alpha > 0.0 && *alpha < 0.5) {
                return Err(ChartError::InvalidParameter(format!(
                    "alpha must lie in (0, 1/2), got {alpha}"
                )));
            }
            if !(*eps > 0.0 && *eps <= 0.5) {
                return Err(ChartError::InvalidParameter(format!(
                    "eps must lie in (0, 1/2], got {eps}"
                )));
            }
            let height = format!(
                "x*y*(log(x^2+y^2+{:?})/log({:?}))^{:?}",
                eps, eps, alpha
            );
            SurfaceChart::graph(
                &height,
                Domain2D::disk([0.0, 0.0], 0.5)?,
                format!("log_saddle_a{alpha}_e{eps}"),
            )
        }
    }
}
