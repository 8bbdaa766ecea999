//! One-dimensional quadrature helpers: composite and cumulative Simpson,
//! periodic trapezoid, Gauss-Legendre nodes and adaptive Simpson.

/// Cumulative integral on a uniform grid with spacing `h`: returns I with
/// I[i] = integral from x_0 to x_i. Simpson pairs, with a quadratic
/// correction at odd indices, so the result is third-order accurate at
/// every node.
pub fn cumulative_simpson(h: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    for i in 1..n {
        if i == 1 {
            // quadratic through the first three points, integrated over [x0, x1]
            out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
        } else if i % 2 == 0 {
            out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else {
            out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        }
    }
    out
}

/// Composite Simpson over the whole uniform grid (len must be odd so the
/// interval count is even).
pub fn simpson(h: f64, f: &[f64]) -> f64 {
    assert!(f.len() >= 3 && f.len() % 2 == 1, "need an even interval count");
    let mut s = f[0] + f[f.len() - 1];
    for (i, v) in f.iter().enumerate().skip(1).take(f.len() - 2) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Trapezoid rule for a periodic function sampled at n equispaced points
/// over a period of length `period` (spectrally accurate for smooth data).
pub fn trapezoid_periodic(period: f64, f: &[f64]) -> f64 {
    let h = period / f.len() as f64;
    f.iter().sum::<f64>() * h
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' at x via recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2.0 * k as f64 - 1.0) * x * p1 - (k as f64 - 1.0) * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Map Gauss-Legendre points to [a, b] and integrate `f`.
pub fn gauss_integrate<E>(
    a: f64,
    b: f64,
    n: usize,
    mut f: impl FnMut(f64) -> Result<f64, E>,
) -> Result<f64, E> {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        total += w * f(mid + half * x)?;
    }
    Ok(total * half)
}

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
) -> Result<f64, E> {
    let fa = f(a)?;
    let fm = f(0.5 * (a + b))?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, E> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let l = adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_simpson_matches_antiderivative() {
        let n = 65;
        let h = 1.0 / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
        let cum = cumulative_simpson(h, &f);
        for (i, c) in cum.iter().enumerate() {
            let exact = (i as f64 * h).exp() - 1.0;
            assert!((c - exact).abs() < 1e-8, "i={i}: {c} vs {exact}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n-point rule is exact to degree 2n-1
        let value: f64 = gauss_integrate(0.0, 1.0, 8, |x| Ok::<f64, ()>(x.powi(15))).unwrap();
        assert!((value - 1.0 / 16.0).abs() < 1e-14);
        let sin_int: f64 = gauss_integrate(0.0, std::f64::consts::PI, 16, |x| Ok::<f64, ()>(x.sin())).unwrap();
        assert!((sin_int - 2.0).abs() < 1e-13);
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        let n = 32;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (1.0 + 0.3 * t.cos()).powi(2)
            })
            .collect();
        let integral = trapezoid_periodic(2.0 * std::f64::consts::PI, &vals);
        let exact = 2.0 * std::f64::consts::PI * (1.0 + 0.045);
        assert!((integral - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_simpson_controls_error() {
        let mut f = |x: f64| Ok::<f64, ()>((5.0 * x).sin() / (1.0 + x * x));
        let v = adaptive_simpson(&mut f, 0.0, 2.0, 1e-11, 30).unwrap();
        // reference from a fine Gauss rule
        let reference: f64 =
            gauss_integrate(0.0, 2.0, 64, |x| Ok::<f64, ()>((5.0 * x).sin() / (1.0 + x * x)))
                .unwrap();
        assert!((v - reference).abs() < 1e-9);
    }
}
