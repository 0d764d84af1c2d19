//! Small statistics toolbox: Wilson intervals, weighted fits, hashing.

/// 97.5% standard normal quantile (95% two-sided).
pub const Z95: f64 = 1.959963984540054;

/// Wilson 95% score interval for a binomial proportion.
///
/// For zero successes the lower edge is 0 and the upper edge is the usual
/// one-sided Wilson bound, so zero-event rows still carry information.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Weighted least squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// Maximum |residual| relative to |y| over the fitted points.
    pub max_rel_residual: f64,
}

pub fn weighted_ols(x: &[f64], y: &[f64], w: &[f64]) -> LineFit {
    assert!(x.len() == y.len() && y.len() == w.len() && x.len() >= 2);
    let sw: f64 = w.iter().sum();
    let xb = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let yb = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
    }
    let slope = sxy / sxx;
    let intercept = yb - slope * xb;
    // Weighted residual variance -> slope standard error.
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let mut s2 = 0.0;
    let mut max_rel = 0.0f64;
    for i in 0..x.len() {
        let r = y[i] - slope * x[i] - intercept;
        s2 += w[i] * r * r;
        max_rel = max_rel.max(r.abs() / y[i].abs().max(1e-300));
    }
    s2 /= dof;
    let slope_se = (s2 / sxx).sqrt();
    LineFit { slope, intercept, slope_se, max_rel_residual: max_rel }
}

/// Least squares with an additional `1/x`-type nuisance column:
/// `y = slope * x + intercept + d * g(x)`. Returns the slope and its SE.
///
/// Used for exponent extraction from desk-scale data where the pure power
/// law carries a known finite-size correction.
pub fn ols_with_nuisance(x: &[f64], y: &[f64], g: &[f64]) -> (f64, f64) {
    let n = x.len();
    assert!(n >= 3 && y.len() == n && g.len() == n);
    // Normal equations for columns [x, 1, g].
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    let cols = |i: usize| [x[i], 1.0, g[i]];
    for i in 0..n {
        let c = cols(i);
        for r in 0..3 {
            for s in 0..3 {
                a[r][s] += c[r] * c[s];
            }
            b[r] += c[r] * y[i];
        }
    }
    // Solve 3x3 by Gaussian elimination.
    let mut m = a;
    let mut v = b;
    for k in 0..3 {
        let piv = (k..3).max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap()).unwrap();
        m.swap(k, piv);
        v.swap(k, piv);
        for i in (k + 1)..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            v[i] -= f * v[k];
        }
    }
    let mut sol = [0.0; 3];
    for k in (0..3).rev() {
        let mut s = v[k];
        for j in (k + 1)..3 {
            s -= m[k][j] * sol[j];
        }
        sol[k] = s / m[k][k];
    }
    // Residual-based SE of the slope via the (0,0) entry of (A^T A)^{-1}.
    let mut rss = 0.0;
    for i in 0..n {
        let c = cols(i);
        let fit = sol[0] * c[0] + sol[1] * c[1] + sol[2] * c[2];
        rss += (y[i] - fit) * (y[i] - fit);
    }
    let dof = (n as f64 - 3.0).max(1.0);
    // Invert A (3x3) for the variance factor.
    let inv00 = invert3(&a)[0][0];
    let se = ((rss / dof) * inv00).max(0.0).sqrt();
    (sol[0], se)
}

fn invert3(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let mut inv = [[0.0; 3]; 3];
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1];
    inv[0][0] = cof(1, 1, 2, 2) / det;
    inv[0][1] = -cof(0, 1, 2, 2) / det;
    inv[0][2] = cof(0, 1, 1, 2) / det;
    inv[1][0] = -cof(1, 0, 2, 2) / det;
    inv[1][1] = cof(0, 0, 2, 2) / det;
    inv[1][2] = -cof(0, 0, 1, 2) / det;
    inv[2][0] = cof(1, 0, 2, 1) / det;
    inv[2][1] = -cof(0, 0, 2, 1) / det;
    inv[2][2] = cof(0, 0, 1, 1) / det;
    inv
}

/// FNV-1a 64-bit hash, hex-encoded; used to stamp configs into reports.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_basics() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((lo - 0.40383).abs() < 1e-4);
        let (lo0, hi0) = wilson_interval(0, 1000);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.005);
    }

    #[test]
    fn ols_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let w = [1.0, 2.0, 1.0, 0.5];
        let f = weighted_ols(&x, &y, &w);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nuisance_fit_recovers_exponent() {
        // y = -1 * x + 0.3 + 2/e^x style correction.
        let x: Vec<f64> = (1..=6).map(|i| (i as f64).ln() + 1.0).collect();
        let g: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| -1.0 * a + 0.3 + 2.0 * b).collect();
        let (slope, _se) = ols_with_nuisance(&x, &y, &g);
        assert!((slope + 1.0).abs() < 1e-10);
    }
}
