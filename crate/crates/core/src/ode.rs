//! Embedded Dormand-Prince 5(4) integrator with adaptive step control.
//!
//! Small and self-contained: the geodesic and Jacobi systems are 4- and
//! 6-dimensional, integration intervals are short, and the drivers need
//! tight control over output points and early stopping (domain exit),
//! which is easier to guarantee here than through a general-purpose crate.

/// Right-hand side evaluation failure (e.g. the state left the region
/// where the chart is defined).
#[derive(Debug, thiserror::Error)]
pub enum OdeError {
    #[error("right-hand side failed at t = {t}: {message}")]
    Rhs { t: f64, message: String },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-11,
            abs_tol: 1e-11,
            max_steps: 2_000_000,
        }
    }
}

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted adaptive step outcome.
enum StepOutcome<const N: usize> {
    Accepted { y: [f64; N], h_next: f64 },
    Rejected { h_next: f64 },
}

fn try_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    h: f64,
    opts: &OdeOptions,
) -> Result<StepOutcome<N>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, y)?;
    for stage in 1..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for (yi_n, kj_n) in yi.iter_mut().zip(kj.iter()) {
                    *yi_n += h * a * kj_n;
                }
            }
        }
        k[stage] = f(t + C[stage] * h, &yi)?;
    }
    let mut y5 = *y;
    let mut y4 = *y;
    for (j, kj) in k.iter().enumerate() {
        for n in 0..N {
            y5[n] += h * B5[j] * kj[n];
            y4[n] += h * B4[j] * kj[n];
        }
    }
    // weighted RMS error
    let mut err: f64 = 0.0;
    for n in 0..N {
        let scale = opts.abs_tol + opts.rel_tol * y[n].abs().max(y5[n].abs());
        let e = (y5[n] - y4[n]) / scale;
        err += e * e;
    }
    let err = (err / N as f64).sqrt();
    let order = 5.0;
    let factor = if err > 0.0 {
        (0.9 * err.powf(-1.0 / order)).clamp(0.2, 5.0)
    } else {
        5.0
    };
    if err <= 1.0 {
        Ok(StepOutcome::Accepted {
            y: y5,
            h_next: h * factor,
        })
    } else {
        Ok(StepOutcome::Rejected { h_next: h * factor })
    }
}

/// Integrate from `t0`, producing the state at each of the increasing
/// output times. `inspect` sees every accepted output state and may stop
/// the run early by returning `false`; the integration then ends at that
/// output index. Returns the number of outputs produced.
pub fn integrate_outputs<const N: usize, F, V>(
    f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: &OdeOptions,
    mut visit: V,
) -> Result<usize, OdeError>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
    V: FnMut(usize, f64, &[f64; N]) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut produced = 0;
    if outputs.is_empty() {
        return Ok(0);
    }
    let span = outputs[outputs.len() - 1] - t0;
    let mut h = (span / 100.0).max(1e-12);
    let mut steps = 0usize;
    for (idx, &t_out) in outputs.iter().enumerate() {
        while t < t_out {
            if steps >= opts.max_steps {
                return Err(OdeError::TooManySteps { t });
            }
            steps += 1;
            let h_try = h.min(t_out - t);
            match try_step(&f, t, &y, h_try, opts)? {
                StepOutcome::Accepted { y: y_new, h_next } => {
                    t += h_try;
                    y = y_new;
                    h = h_next.max(1e-14 * span.abs());
                }
                StepOutcome::Rejected { h_next } => {
                    h = h_next;
                    if h < 1e-14 * span.abs().max(1.0) {
                        return Err(OdeError::StepUnderflow { t });
                    }
                }
            }
        }
        produced = idx + 1;
        if !visit(idx, t_out, &y) {
            return Ok(produced);
        }
    }
    Ok(produced)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let outputs: Vec<f64> = (1..=10).map(|i| i as f64 * 0.3).collect();
        let mut last = (0.0, [0.0f64; 1]);
        integrate_outputs(
            |_t, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            &outputs,
            &OdeOptions::default(),
            |_, t, y| {
                last = (t, *y);
                true
            },
        )
        .unwrap();
        assert!((last.1[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn circular_orbit_preserves_radius() {
        // y'' = -y as a first-order system: exact circle in phase space
        let outputs: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        let mut worst: f64 = 0.0;
        integrate_outputs(
            |_t, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            &outputs,
            &OdeOptions::default(),
            |_, _, y| {
                worst = worst.max((y[0] * y[0] + y[1] * y[1] - 1.0).abs());
                true
            },
        )
        .unwrap();
        assert!(worst < 1e-9, "energy drift {worst}");
    }

    #[test]
    fn early_stop_returns_partial_count() {
        let outputs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let n = integrate_outputs(
            |_t, _y: &[f64; 1]| Ok([1.0]),
            0.0,
            [0.0],
            &outputs,
            &OdeOptions::default(),
            |idx, _, _| idx < 4,
        )
        .unwrap();
        assert_eq!(n, 5);
    }

    #[test]
    fn rhs_failure_propagates() {
        let outputs = [1.0];
        let r = integrate_outputs(
            |t, _y: &[f64; 1]| {
                if t > 0.5 {
                    Err(OdeError::Rhs {
                        t,
                        message: "left region".into(),
                    })
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            &outputs,
            &OdeOptions::default(),
            |_, _, _| true,
        );
        assert!(matches!(r, Err(OdeError::Rhs { .. })));
    }
}
