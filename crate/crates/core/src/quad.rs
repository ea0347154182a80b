//! Gauss-Legendre quadrature on an interval, with composite panels for
//! integrands much narrower than the domain.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Roots of the Legendre polynomial P_n by Newton iteration from the
/// Chebyshev initial guess; weights w = 2 / ((1 - x^2) P_n'(x)^2).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
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

/// Nodes and weights for integrating over [a, b] with `n` points per panel,
/// the interval split into `panels` equal panels.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x0, w0) = gauss_legendre(n);
    let mut xs = Vec::with_capacity(n * panels);
    let mut ws = Vec::with_capacity(n * panels);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for i in 0..n {
            xs.push(mid + 0.5 * h * x0[i]);
            ws.push(0.5 * h * w0[i]);
        }
    }
    (xs, ws)
}

/// Panel count so that each panel is no wider than ~4 times `scale`,
/// keeping an n-point rule accurate for integrands of width `scale`.
pub fn panels_for(halfwidth: f64, scale: f64) -> usize {
    if scale <= 0.0 || !scale.is_finite() {
        return 1;
    }
    ((2.0 * halfwidth / (4.0 * scale)).ceil() as usize).max(1)
}

/// Average of `exp(-1/2 c mu^T M^{-1} mu) / sqrt(det M)` over the square
/// `|mu_x|, |mu_p| <= d`, for a symmetric positive definite 2x2 `M`.
///
/// Factorizes into two one-dimensional integrals when `M` is diagonal;
/// otherwise a composite tensor rule sized to the integrand width.
/// `nodes` is the Gauss-Legendre order per panel and axis.
pub fn gaussian_square_average(
    m: &nalgebra::Matrix2<f64>,
    c: f64,
    d: f64,
    nodes: usize,
) -> Option<f64> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det <= 0.0 {
        return None;
    }
    let prefactor = 1.0 / det.sqrt();
    if d == 0.0 || c == 0.0 {
        return Some(prefactor);
    }
    if m[(0, 1)].abs() < 1e-12 {
        return Some(
            prefactor
                * axis_average(d, c / (2.0 * m[(0, 0)]), nodes)
                * axis_average(d, c / (2.0 * m[(1, 1)]), nodes),
        );
    }
    let half_trace = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let lambda_min = half_trace - (half_trace * half_trace - det).sqrt();
    let scale = (lambda_min / c).sqrt();
    let panels = panels_for(d, scale);
    let (xs, ws) = gauss_legendre_on(-d, d, nodes.max(8), panels);
    let inv = [m[(1, 1)] / det, -m[(0, 1)] / det, m[(0, 0)] / det];
    let mut sum = 0.0;
    for (ix, &x) in xs.iter().enumerate() {
        for (ip, &p) in xs.iter().enumerate() {
            let q = inv[0] * x * x + 2.0 * inv[1] * x * p + inv[2] * p * p;
            sum += ws[ix] * ws[ip] * (-0.5 * c * q).exp();
        }
    }
    Some(prefactor * sum / (4.0 * d * d))
}

fn axis_average(d: f64, a: f64, nodes: usize) -> f64 {
    let scale = 1.0 / (2.0 * a).sqrt();
    let panels = panels_for(d, scale);
    let (xs, ws) = gauss_legendre_on(-d, d, nodes, panels);
    xs.iter().zip(&ws).map(|(&t, &w)| w * (-a * t * t).exp()).sum::<f64>() / (2.0 * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn degree_3_reference_values() {
        let (x, w) = gauss_legendre(3);
        assert_abs_diff_eq!(x[0], -0.774596669241483, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.888888888888889, epsilon = 1e-14);
        assert_abs_diff_eq!(w[0], 0.555555555555556, epsilon = 1e-14);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // degree-2n-1 polynomial is exact for an n-point rule
        let (x, w) = gauss_legendre(5);
        let integral: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(8)).sum();
        assert_abs_diff_eq!(integral, 2.0 / 9.0, epsilon = 1e-13);
    }

    #[test]
    fn composite_narrow_gaussian() {
        // integrate a narrow Gaussian over a wide interval
        let s = 0.5;
        let panels = panels_for(50.0, s);
        let (x, w) = gauss_legendre_on(-50.0, 50.0, 16, panels);
        let integral: f64 = x
            .iter()
            .zip(&w)
            .map(|(&t, &wt)| wt * (-t * t / (2.0 * s * s)).exp())
            .sum();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(integral, exact, epsilon = 1e-10);
    }
}
