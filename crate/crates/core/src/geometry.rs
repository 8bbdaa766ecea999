//! Pointwise differential geometry of a chart: fundamental forms,
//! curvature scalars, Christoffel symbols, tangential gradient and
//! covariant Hessian of the mean curvature, and the Laplacian of |A|^2.
//!
//! Everything is computed by running the chart's order-4 jets through
//! truncated Taylor arithmetic, so every derivative below is exact up to
//! roundoff. Sign conventions: n = F_u x F_v / |F_u x F_v|, h_ij is the
//! normal component of the second derivatives, H = g^{ij} h_ij (sum of
//! principal curvatures, not the average), and the mean curvature vector
//! H n equals the surface Laplacian of the position. |A|^2 contracts h
//! with the inverse metric on both index pairs, so K = (H^2 - |A|^2)/2.
//! |grad H|^2 and the covariant Hessian norm contract with the inverse
//! metric as well.

use crate::chart::{ChartError, SurfaceChart};
use crate::expr::{parse_expression, Expr, EvalError};
use crate::jet::Taylor4;

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("degenerate metric at ({0}, {1}): condition number {2:.3e}")]
    DegenerateMetric(f64, f64, f64),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("field `{0}` does not support derivatives of order {1}")]
    FieldOrder(String, usize),
}

pub(crate) const METRIC_COND_LIMIT: f64 = 1e12;

// ---------------------------------------------------------------------------
// Jet-valued linear algebra helpers
// ---------------------------------------------------------------------------

type JVec3 = [Taylor4; 3];

fn jdot(a: &JVec3, b: &JVec3) -> Taylor4 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn jcross(a: &JVec3, b: &JVec3) -> JVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// All jet-level quantities shared by the pointwise operations.
pub(crate) struct JetFrame {
    pub pos: JVec3,
    pub fu: JVec3,
    pub fv: JVec3,
    pub g: [[Taylor4; 2]; 2],
    pub ginv: [[Taylor4; 2]; 2],
    pub det_g: Taylor4,
    pub normal: JVec3,
    pub h: [[Taylor4; 2]; 2],
    pub mean: Taylor4,
    pub a2: Taylor4,
    pub gauss: Taylor4,
}

impl JetFrame {
    pub(crate) fn compute(chart: &SurfaceChart, p: [f64; 2]) -> Result<JetFrame, GeomError> {
        let jets = chart.jets_unchecked(p)?;
        let pos = [jets[0].taylor(), jets[1].taylor(), jets[2].taylor()];
        let fu = [pos[0].d_du(), pos[1].d_du(), pos[2].d_du()];
        let fv = [pos[0].d_dv(), pos[1].d_dv(), pos[2].d_dv()];
        let g = [
            [jdot(&fu, &fu), jdot(&fu, &fv)],
            [jdot(&fv, &fu), jdot(&fv, &fv)],
        ];

        // condition number of the 2x2 symmetric positive matrix, from values
        let (a, b, c) = (g[0][0].value(), g[0][1].value(), g[1][1].value());
        let tr = a + c;
        let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
        let lam_max = 0.5 * (tr + disc);
        let lam_min = 0.5 * (tr - disc);
        let cond = if lam_min > 0.0 {
            lam_max / lam_min
        } else {
            f64::INFINITY
        };
        if !cond.is_finite() || cond > METRIC_COND_LIMIT {
            return Err(GeomError::DegenerateMetric(p[0], p[1], cond));
        }

        let det_g = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let inv_det = det_g.recip().expect("determinant checked above");
        let ginv = [
            [g[1][1] * inv_det, -(g[0][1] * inv_det)],
            [-(g[1][0] * inv_det), g[0][0] * inv_det],
        ];

        let cross = jcross(&fu, &fv);
        let cross_norm = jdot(&cross, &cross)
            .sqrt()
            .expect("immersion holds where the metric is non-degenerate");
        let inv_norm = cross_norm.recip().expect("norm positive");
        let normal = [
            cross[0] * inv_norm,
            cross[1] * inv_norm,
            cross[2] * inv_norm,
        ];

        let fuu = [fu[0].d_du(), fu[1].d_du(), fu[2].d_du()];
        let fuv = [fu[0].d_dv(), fu[1].d_dv(), fu[2].d_dv()];
        let fvv = [fv[0].d_dv(), fv[1].d_dv(), fv[2].d_dv()];
        let h = [
            [jdot(&fuu, &normal), jdot(&fuv, &normal)],
            [jdot(&fuv, &normal), jdot(&fvv, &normal)],
        ];

        let mut mean = Taylor4::zero();
        for i in 0..2 {
            for j in 0..2 {
                mean = mean + ginv[i][j] * h[i][j];
            }
        }
        // raised-index contraction |A|^2 = g^{ik} g^{jl} h_ij h_kl
        let mut a2 = Taylor4::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        a2 = a2 + ginv[i][k] * ginv[j][l] * h[i][j] * h[k][l];
                    }
                }
            }
        }
        let det_h = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let gauss = det_h * inv_det;

        Ok(JetFrame {
            pos,
            fu,
            fv,
            g,
            ginv,
            det_g,
            normal,
            h,
            mean,
            a2,
            gauss,
        })
    }

    fn g_values(&self) -> [[f64; 2]; 2] {
        [
            [self.g[0][0].value(), self.g[0][1].value()],
            [self.g[1][0].value(), self.g[1][1].value()],
        ]
    }

    fn ginv_values(&self) -> [[f64; 2]; 2] {
        [
            [self.ginv[0][0].value(), self.ginv[0][1].value()],
            [self.ginv[1][0].value(), self.ginv[1][1].value()],
        ]
    }

    /// Christoffel symbols (values) from the metric jets.
    pub(crate) fn christoffel(&self) -> [[[f64; 2]; 2]; 2] {
        // dg[l][i][j] = d_l g_ij
        let mut dg = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dg[0][i][j] = self.g[i][j].partial(1, 0);
                dg[1][i][j] = self.g[i][j].partial(0, 1);
            }
        }
        let ginv = self.ginv_values();
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut sum = 0.0;
                    for l in 0..2 {
                        sum += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * sum;
                }
            }
        }
        gamma
    }

    /// Laplace-Beltrami of a scalar jet (valid to order 2) at this point.
    pub(crate) fn laplacian_of(&self, field: &Taylor4) -> f64 {
        let gamma = self.christoffel();
        self.laplacian_with_gamma(field, &gamma)
    }

    pub(crate) fn laplacian_with_gamma(
        &self,
        field: &Taylor4,
        gamma: &[[[f64; 2]; 2]; 2],
    ) -> f64 {
        let df = [field.partial(1, 0), field.partial(0, 1)];
        let d2f = [
            [field.partial(2, 0), field.partial(1, 1)],
            [field.partial(1, 1), field.partial(0, 2)],
        ];
        let ginv = self.ginv_values();
        let mut lap = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut hess = d2f[i][j];
                for k in 0..2 {
                    hess -= gamma[k][i][j] * df[k];
                }
                lap += ginv[i][j] * hess;
            }
        }
        lap
    }
}

// ---------------------------------------------------------------------------
// FundamentalData
// ---------------------------------------------------------------------------

/// Pointwise geometric state of a chart.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    pub position: [f64; 3],
    pub tangent_u: [f64; 3],
    pub tangent_v: [f64; 3],
    /// First fundamental form g_ij.
    pub metric: [[f64; 2]; 2],
    pub metric_inv: [[f64; 2]; 2],
    pub det_metric: f64,
    /// sqrt(det g), the area element of the parametrization.
    pub area_element: f64,
    pub normal: [f64; 3],
    /// Second fundamental form h_ij.
    pub second_form: [[f64; 2]; 2],
    /// H = g^{ij} h_ij (sum of the principal curvatures).
    pub mean_curv: f64,
    /// H n, equal to the surface Laplacian of the position.
    pub mean_curv_vec: [f64; 3],
    /// |A|^2 with both index pairs raised by the inverse metric.
    pub second_form_norm2: f64,
    /// Gaussian curvature det h / det g.
    pub gauss_curv: f64,
    /// Christoffel symbols, christoffel[k][i][j].
    pub christoffel: [[[f64; 2]; 2]; 2],
    /// Parameter partials of H.
    pub mean_curv_grad: [f64; 2],
    /// Tangential gradient of H as an ambient vector.
    pub grad_h_ambient: [f64; 3],
    /// |grad H|.
    pub grad_h_norm: f64,
    /// Covariant Hessian of H.
    pub hess_h: [[f64; 2]; 2],
    /// |Hess H| (inverse metric on both pairs).
    pub hess_h_norm: f64,
    /// Covariant derivative of the second form, nabla_second_form[i][j][k].
    pub nabla_second_form: [[[f64; 2]; 2]; 2],
}

/// Compute all pointwise quantities at an interior point.
pub fn fundamental_forms(chart: &SurfaceChart, p: [f64; 2]) -> Result<FundamentalData, GeomError> {
    let frame = JetFrame::compute(chart, p)?;
    let gamma = frame.christoffel();
    let g = frame.g_values();
    let ginv = frame.ginv_values();
    let det_metric = frame.det_g.value();
    let normal = [
        frame.normal[0].value(),
        frame.normal[1].value(),
        frame.normal[2].value(),
    ];
    let h = [
        [frame.h[0][0].value(), frame.h[0][1].value()],
        [frame.h[1][0].value(), frame.h[1][1].value()],
    ];
    let mean = frame.mean.value();

    let dh = [frame.mean.partial(1, 0), frame.mean.partial(0, 1)];
    let d2h = [
        [frame.mean.partial(2, 0), frame.mean.partial(1, 1)],
        [frame.mean.partial(1, 1), frame.mean.partial(0, 2)],
    ];
    let mut hess = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut v = d2h[i][j];
            for k in 0..2 {
                v -= gamma[k][i][j] * dh[k];
            }
            hess[i][j] = v;
        }
    }
    let mut grad_h_norm2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            grad_h_norm2 += ginv[i][j] * dh[i] * dh[j];
        }
    }
    let mut hess_norm2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    hess_norm2 += ginv[i][k] * ginv[j][l] * hess[i][j] * hess[k][l];
                }
            }
        }
    }

    // nabla_i h_jk = d_i h_jk - Gamma^l_ij h_lk - Gamma^l_ik h_jl
    let mut dh_form = [[[0.0; 2]; 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            dh_form[0][j][k] = frame.h[j][k].partial(1, 0);
            dh_form[1][j][k] = frame.h[j][k].partial(0, 1);
        }
    }
    let mut nabla_h = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut v = dh_form[i][j][k];
                for l in 0..2 {
                    v -= gamma[l][i][j] * h[l][k] + gamma[l][i][k] * h[j][l];
                }
                nabla_h[i][j][k] = v;
            }
        }
    }

    let fu = [
        frame.fu[0].value(),
        frame.fu[1].value(),
        frame.fu[2].value(),
    ];
    let fv = [
        frame.fv[0].value(),
        frame.fv[1].value(),
        frame.fv[2].value(),
    ];
    // grad H = g^{ij} d_i H  d_j F
    let mut grad_amb = [0.0; 3];
    for c in 0..3 {
        let basis = [fu[c], fv[c]];
        for i in 0..2 {
            for j in 0..2 {
                grad_amb[c] += ginv[i][j] * dh[i] * basis[j];
            }
        }
    }

    Ok(FundamentalData {
        position: [
            frame.pos[0].value(),
            frame.pos[1].value(),
            frame.pos[2].value(),
        ],
        tangent_u: fu,
        tangent_v: fv,
        metric: g,
        metric_inv: ginv,
        det_metric,
        area_element: det_metric.sqrt(),
        normal,
        second_form: h,
        mean_curv: mean,
        mean_curv_vec: [mean * normal[0], mean * normal[1], mean * normal[2]],
        second_form_norm2: frame.a2.value(),
        gauss_curv: frame.gauss.value(),
        christoffel: gamma,
        mean_curv_grad: dh,
        grad_h_ambient: grad_amb,
        grad_h_norm: grad_h_norm2.max(0.0).sqrt(),
        hess_h: hess,
        hess_h_norm: hess_norm2.max(0.0).sqrt(),
        nabla_second_form: nabla_h,
    })
}

impl FundamentalData {
    /// Residual of the Gauss identity K - (H^2 - |A|^2)/2.
    pub fn gauss_residual(&self) -> f64 {
        self.gauss_curv - 0.5 * (self.mean_curv * self.mean_curv - self.second_form_norm2)
    }

    /// Largest component residual of nabla_i h_jk - nabla_j h_ik.
    pub fn codazzi_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let r = self.nabla_second_form[i][j][k] - self.nabla_second_form[j][i][k];
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// Residual of the traced identity g^{ij} nabla_i h_jk = d_k H.
    pub fn codazzi_trace_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let mut tr = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    tr += self.metric_inv[i][j] * self.nabla_second_form[i][j][k];
                }
            }
            worst = worst.max((tr - self.mean_curv_grad[k]).abs());
        }
        worst
    }

    /// Scale used to normalize curvature-derivative residuals.
    pub fn derivative_scale(&self) -> f64 {
        let mut m: f64 = 1.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    m = m.max(self.nabla_second_form[i][j][k].abs());
                }
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Scalar fields on a chart
// ---------------------------------------------------------------------------

/// A scalar function on the surface with jet access through the chart.
pub trait ScalarField: Sync {
    /// Jet in chart parameters, with coefficients valid to `valid_order()`.
    fn jet(&self, chart: &SurfaceChart, p: [f64; 2]) -> Result<Taylor4, GeomError>;

    /// Highest derivative order the jet is exact to (0, 1 or 2).
    fn valid_order(&self) -> usize {
        2
    }

    fn describe(&self) -> String;

    fn value(&self, chart: &SurfaceChart, p: [f64; 2]) -> Result<f64, GeomError> {
        Ok(self.jet(chart, p)?.value())
    }
}

/// Constant field.
pub struct ConstField(pub f64);

impl ScalarField for ConstField {
    fn jet(&self, _chart: &SurfaceChart, _p: [f64; 2]) -> Result<Taylor4, GeomError> {
        Ok(Taylor4::constant(self.0))
    }
    fn describe(&self) -> String {
        format!("{}", self.0)
    }
}

/// Field given by an expression in the chart parameters.
pub struct ExprField(pub Expr);

impl ExprField {
    pub fn parse(source: &str) -> Result<Self, ChartError> {
        Ok(ExprField(parse_expression(source)?))
    }
}

impl ScalarField for ExprField {
    fn jet(&self, _chart: &SurfaceChart, p: [f64; 2]) -> Result<Taylor4, GeomError> {
        Ok(self.0.eval_jet(p[0], p[1])?)
    }
    fn describe(&self) -> String {
        self.0.to_string()
    }
}

/// Restriction of an ambient coordinate function to the surface.
pub struct AmbientCoordField(pub usize);

impl ScalarField for AmbientCoordField {
    fn jet(&self, chart: &SurfaceChart, p: [f64; 2]) -> Result<Taylor4, GeomError> {
        let jets = chart.jets_unchecked(p)?;
        Ok(jets[self.0].taylor())
    }
    fn describe(&self) -> String {
        format!("x{}", self.0 + 1)
    }
}

/// |A|^2 as a field (jet valid to order 2 through the chart's 4-jets).
pub struct SecondFormNorm2Field;

impl ScalarField for SecondFormNorm2Field {
    fn jet(&self, chart: &SurfaceChart, p: [f64; 2]) -> Result<Taylor4, GeomError> {
        Ok(JetFrame::compute(chart, p)?.a2)
    }
    fn describe(&self) -> String {
        "|A|^2".into()
    }
}

/// The remainder c |grad H|^2 - 2 h^{ij} (Hess H)_ij; value-only access.
pub struct CurvatureRemainderField {
    pub c: f64,
}

impl ScalarField for CurvatureRemainderField {
    fn jet(&self, chart: &SurfaceChart, p: [f64; 2]) -> Result<Taylor4, GeomError> {
        let data = fundamental_forms(chart, p)?;
        let mut contraction = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut raised = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        raised += data.metric_inv[i][k]
                            * data.metric_inv[j][l]
                            * data.second_form[k][l];
                    }
                }
                contraction += raised * data.hess_h[i][j];
            }
        }
        let value = self.c * data.grad_h_norm * data.grad_h_norm - 2.0 * contraction;
        Ok(Taylor4::constant(value))
    }
    fn valid_order(&self) -> usize {
        0
    }
    fn describe(&self) -> String {
        format!("{}|gradH|^2 - 2h^ij HessH_ij", self.c)
    }
}

// ---------------------------------------------------------------------------
// Pointwise operations
// ---------------------------------------------------------------------------

/// Laplace-Beltrami operator applied to a scalar field at a point.
pub fn laplace_beltrami(
    chart: &SurfaceChart,
    field: &dyn ScalarField,
    p: [f64; 2],
) -> Result<f64, GeomError> {
    if field.valid_order() < 2 {
        return Err(GeomError::FieldOrder(field.describe(), 2));
    }
    let frame = JetFrame::compute(chart, p)?;
    let jet = field.jet(chart, p)?;
    Ok(frame.laplacian_of(&jet))
}

/// Defect of the curvature differential inequality at a point:
/// Lap|A|^2 - 2 h^{ij} (Hess H)_ij + 2 |A|^4 + c |grad H|^2.
/// Nonnegative iff the inequality holds at the point with constant c.
pub fn simons_defect(chart: &SurfaceChart, p: [f64; 2], c: f64) -> Result<f64, GeomError> {
    let parts = simons_defect_parts(chart, p)?;
    Ok(parts.0 + c * parts.1)
}

/// (defect at c = 0, |grad H|^2) so sweeps over c reuse one evaluation.
pub fn simons_defect_parts(chart: &SurfaceChart, p: [f64; 2]) -> Result<(f64, f64), GeomError> {
    let frame = JetFrame::compute(chart, p)?;
    let data = fundamental_forms(chart, p)?;
    let lap_a2 = frame.laplacian_of(&frame.a2);
    let mut contraction = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut raised = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    raised +=
                        data.metric_inv[i][k] * data.metric_inv[j][l] * data.second_form[k][l];
                }
            }
            contraction += raised * data.hess_h[i][j];
        }
    }
    let a2 = data.second_form_norm2;
    let base = lap_a2 - 2.0 * contraction + 2.0 * a2 * a2;
    Ok((base, data.grad_h_norm * data.grad_h_norm))
}

/// Compose the chart with a rigid motion x -> R x + t.
pub fn ambient_isometry(
    chart: &SurfaceChart,
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
) -> Result<SurfaceChart, ChartError> {
    // orthogonality residual ||R^T R - I||_max
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut dot = 0.0;
            for k in 0..3 {
                dot += rotation[k][i] * rotation[k][j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    if worst > 1e-12 {
        return Err(ChartError::NotOrthogonal(worst));
    }
    let comp = chart.components();
    let mut moved = Vec::with_capacity(3);
    for i in 0..3 {
        let mut acc: Option<Expr> = None;
        for (j, component) in comp.iter().enumerate() {
            let coef = rotation[i][j];
            if coef == 0.0 {
                continue;
            }
            let term = if coef == 1.0 {
                component.clone()
            } else {
                Expr::Bin(
                    crate::expr::BinOp::Mul,
                    Box::new(num_literal(coef)),
                    Box::new(component.clone()),
                )
            };
            acc = Some(match acc {
                None => term,
                Some(prev) => Expr::Bin(crate::expr::BinOp::Add, Box::new(prev), Box::new(term)),
            });
        }
        let mut expr = acc.unwrap_or(Expr::Num(0.0));
        if translation[i] != 0.0 {
            expr = Expr::Bin(
                crate::expr::BinOp::Add,
                Box::new(expr),
                Box::new(num_literal(translation[i])),
            );
        }
        moved.push(expr);
    }
    let components = [
        moved[0].clone(),
        moved[1].clone(),
        moved[2].clone(),
    ];
    SurfaceChart::new(
        components,
        chart.domain().clone(),
        format!("{}|moved", chart.label()),
    )
}

fn num_literal(x: f64) -> Expr {
    if x < 0.0 {
        Expr::Neg(Box::new(Expr::Num(-x)))
    } else {
        Expr::Num(x)
    }
}

/// Interior point of the chart mapping to the ambient origin.
///
/// Returns (certifying point, evaluation point): the first satisfies
/// |F(p)| < tol and may sit on the closed domain boundary; the second is
/// pulled to the strict interior so that downstream geometry stays
/// non-degenerate (identical to the first when it is already interior).
pub fn origin_points(
    chart: &SurfaceChart,
    center: [f64; 3],
    tol: f64,
) -> Option<([f64; 2], [f64; 2])> {
    let witness = chart.find_preimage(center, tol)?;
    let margin = 2e-5 * chart.domain().scale();
    if chart.domain().contains_inner(witness, margin) {
        return Some((witness, witness));
    }
    // pull inward toward the domain midpoint
    let bb = chart.domain().bbox();
    let mid = [0.5 * (bb[0] + bb[1]), 0.5 * (bb[2] + bb[3])];
    let dir = [mid[0] - witness[0], mid[1] - witness[1]];
    let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    if n == 0.0 {
        return Some((witness, witness));
    }
    let mut step = margin;
    for _ in 0..30 {
        let candidate = [
            witness[0] + dir[0] / n * step,
            witness[1] + dir[1] / n * step,
        ];
        if chart.domain().contains_inner(candidate, 0.5 * margin)
            && JetFrame::compute(chart, candidate).is_ok()
        {
            return Some((witness, candidate));
        }
        step *= 1.7;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{builtin_surface, Builtin};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn plane_is_flat() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let d = fundamental_forms(&plane, [0.3, -0.8]).unwrap();
        assert!(d.second_form_norm2.abs() < 1e-15);
        assert!(d.mean_curv.abs() < 1e-15);
        assert!(d.gauss_curv.abs() < 1e-15);
        assert!(d.grad_h_norm.abs() < 1e-15);
        assert!(d.hess_h_norm.abs() < 1e-15);
    }

    #[test]
    fn unit_sphere_curvatures() {
        let sphere = builtin_surface(&Builtin::Sphere {
            radius: 1.0,
            center: [0.0, 0.0, 0.0],
        })
        .unwrap();
        for p in [[1.0, 0.5], [2.0, 3.0], [0.7, 5.5]] {
            let d = fundamental_forms(&sphere, p).unwrap();
            assert!(close(d.second_form_norm2, 2.0, 1e-12));
            assert!(close(d.mean_curv.abs(), 2.0, 1e-12));
            assert!(close(d.gauss_curv, 1.0, 1e-12));
            assert!(d.grad_h_norm.abs() < 1e-9);
            assert!(d.hess_h_norm.abs() < 1e-8);
        }
    }

    #[test]
    fn cylinder_curvatures() {
        let cyl = builtin_surface(&Builtin::Cylinder { radius: 2.0 }).unwrap();
        let d = fundamental_forms(&cyl, [0.4, 1.2]).unwrap();
        assert!(close(d.second_form_norm2, 0.25, 1e-12));
        assert!(close(d.mean_curv.abs(), 0.5, 1e-12));
        assert!(d.gauss_curv.abs() < 1e-13);
    }

    #[test]
    fn catenoid_is_minimal_with_known_a2() {
        let cat = builtin_surface(&Builtin::Catenoid).unwrap();
        let d = fundamental_forms(&cat, [0.0, 1.0]).unwrap();
        assert!(d.mean_curv.abs() < 1e-12, "H = {}", d.mean_curv);
        let expected = 2.0 / 1.0f64.cosh().powi(4);
        assert!(close(d.second_form_norm2, expected, 1e-12));
        // and at a second point
        let d2 = fundamental_forms(&cat, [1.3, -0.7]).unwrap();
        assert!(d2.mean_curv.abs() < 1e-12);
        assert!(close(
            d2.second_form_norm2,
            2.0 / (-0.7f64).cosh().powi(4),
            1e-12
        ));
    }

    #[test]
    fn gauss_and_codazzi_hold_on_log_saddle() {
        let chart = builtin_surface(&Builtin::LogSaddle {
            alpha: 0.3,
            eps: 0.01,
        })
        .unwrap();
        for p in [[0.1, 0.2], [-0.3, 0.05], [0.02, -0.01], [0.31, 0.17]] {
            let d = fundamental_forms(&chart, p).unwrap();
            assert!(
                d.gauss_residual().abs() < 1e-9 * (1.0 + d.gauss_curv.abs()),
                "gauss residual {} at {:?}",
                d.gauss_residual(),
                p
            );
            let scale = d.derivative_scale();
            assert!(d.codazzi_residual() / scale < 1e-8);
            assert!(d.codazzi_trace_residual() / scale < 1e-8);
        }
    }

    #[test]
    fn laplacian_examples() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        let f = ExprField::parse("u^2+v^2").unwrap();
        let lap = laplace_beltrami(&plane, &f, [0.3, 0.4]).unwrap();
        assert!(close(lap, 4.0, 1e-12));

        // constant field
        let c = ConstField(3.5);
        assert!(laplace_beltrami(&plane, &c, [0.1, 0.1]).unwrap().abs() < 1e-15);

        // ambient z restricted to the unit sphere is an eigenfunction:
        // Lap z = -2 z
        let sphere = builtin_surface(&Builtin::Sphere {
            radius: 1.0,
            center: [0.0, 0.0, 0.0],
        })
        .unwrap();
        let zf = AmbientCoordField(2);
        for p in [[0.8, 0.3], [1.9, 4.0]] {
            let z = zf.value(&sphere, p).unwrap();
            let lap = laplace_beltrami(&sphere, &zf, p).unwrap();
            assert!(close(lap, -2.0 * z, 1e-10), "lap={lap} z={z}");
        }
    }

    #[test]
    fn curvature_defect_examples() {
        let plane = builtin_surface(&Builtin::Plane).unwrap();
        for c in [0.0, 1.0, 10.0] {
            assert!(simons_defect(&plane, [0.2, 0.7], c).unwrap().abs() < 1e-14);
        }
        // round sphere: |A|^2 constant, H derivatives vanish, defect = 2|A|^4
        let sphere = builtin_surface(&Builtin::Sphere {
            radius: 1.0,
            center: [0.0, 0.0, 0.0],
        })
        .unwrap();
        let defect = simons_defect(&sphere, [1.2, 0.6], 0.0).unwrap();
        assert!(close(defect, 8.0, 1e-8), "defect = {defect}");
        // catenoid: minimal, defect(0) = Lap|A|^2 + 2|A|^4 >= 0
        let cat = builtin_surface(&Builtin::Catenoid).unwrap();
        let d = simons_defect(&cat, [0.0, 0.0], 0.0).unwrap();
        assert!(d >= -1e-10, "defect = {d}");
    }

    #[test]
    fn rigid_motion_preserves_curvature() {
        let cat = builtin_surface(&Builtin::Catenoid).unwrap();
        let angle = 0.83f64;
        let (s, c) = angle.sin_cos();
        let rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let moved = ambient_isometry(&cat, rot, [0.4, -1.0, 2.5]).unwrap();
        for p in [[0.5, 0.6], [-1.0, -0.4]] {
            let a = fundamental_forms(&cat, p).unwrap();
            let b = fundamental_forms(&moved, p).unwrap();
            assert!(close(a.second_form_norm2, b.second_form_norm2, 1e-9));
            assert!(close(a.mean_curv * a.mean_curv, b.mean_curv * b.mean_curv, 1e-9));
            assert!(close(a.gauss_curv, b.gauss_curv, 1e-9));
            assert!(close(a.grad_h_norm, b.grad_h_norm, 1e-9));
            assert!(close(a.hess_h_norm, b.hess_h_norm, 1e-9));
        }
        // identity motion keeps the jets pointwise
        let id = ambient_isometry(&cat, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3])
            .unwrap();
        let p = [0.2, 0.3];
        let a = cat.evaluate_jet(p, 4).unwrap();
        let b = id.evaluate_jet(p, 4).unwrap();
        for c in 0..3 {
            assert!(close(a[c].partial(2, 1), b[c].partial(2, 1), 1e-13));
        }
        // non-orthogonal matrices are rejected
        let bad = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            ambient_isometry(&cat, bad, [0.0; 3]),
            Err(ChartError::NotOrthogonal(_))
        ));
    }

    #[test]
    fn scaling_covariance() {
        let cat = builtin_surface(&Builtin::Catenoid).unwrap();
        for lambda in [0.5, 3.0] {
            let scaled = crate::chart::scale_chart(&cat, lambda).unwrap();
            for p in [[0.4, 0.9], [-0.8, -0.2]] {
                let a = fundamental_forms(&cat, p).unwrap();
                let b = fundamental_forms(&scaled, p).unwrap();
                let l2 = lambda * lambda;
                assert!(close(b.second_form_norm2, a.second_form_norm2 / l2, 1e-9));
                assert!(close(
                    b.mean_curv * b.mean_curv,
                    a.mean_curv * a.mean_curv / l2,
                    1e-9
                ));
                assert!(close(
                    b.grad_h_norm * b.grad_h_norm,
                    a.grad_h_norm * a.grad_h_norm / l2 / l2,
                    1e-9
                ));
                assert!(close(
                    b.hess_h_norm * b.hess_h_norm,
                    a.hess_h_norm * a.hess_h_norm / l2 / l2 / l2,
                    1e-9
                ));
            }
        }
    }

    #[test]
    fn orientation_flip_covariance() {
        let sphere = builtin_surface(&Builtin::Sphere {
            radius: 2.0,
            center: [0.0, 0.0, 0.0],
        })
        .unwrap();
        let flipped = crate::chart::swap_orientation(&sphere).unwrap();
        let p = [1.1, 0.8];
        let q = [0.8, 1.1]; // same surface point in the swapped chart
        let a = fundamental_forms(&sphere, p).unwrap();
        let b = fundamental_forms(&flipped, q).unwrap();
        assert!(close(a.mean_curv, -b.mean_curv, 1e-12));
        assert!(close(a.second_form_norm2, b.second_form_norm2, 1e-12));
        assert!(close(a.gauss_curv, b.gauss_curv, 1e-12));
        for c in 0..3 {
            assert!(close(a.mean_curv_vec[c], b.mean_curv_vec[c], 1e-12));
        }
    }

    #[test]
    fn degenerate_metric_is_reported() {
        // sphere chart at the parametrization pole
        let sphere = builtin_surface(&Builtin::Sphere {
            radius: 1.0,
            center: [0.0, 0.0, 1.0],
        })
        .unwrap();
        let near_pole = [std::f64::consts::PI - 1e-12, 1.0];
        assert!(matches!(
            fundamental_forms(&sphere, near_pole),
            Err(GeomError::DegenerateMetric(..))
        ));
    }

    #[test]
    fn origin_points_on_through_origin_sphere() {
        let sphere = builtin_surface(&Builtin::Sphere {
            radius: 1.0,
            center: [0.0, 0.0, 1.0],
        })
        .unwrap();
        let (witness, eval) = origin_points(&sphere, [0.0; 3], 1e-9).unwrap();
        let f = sphere.position(witness).unwrap();
        assert!((f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt() < 1e-9);
        // the evaluation point supports geometry
        let d = fundamental_forms(&sphere, eval).unwrap();
        assert!(close(d.second_form_norm2, 2.0, 1e-6));
    }
}
