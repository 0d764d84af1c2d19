//! Complex polynomial evaluation and simultaneous root finding.

use num_complex::Complex64;

/// Horner evaluation of `a_0 + a_1 z + ... + a_n z^n`.
#[inline]
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in coeffs.iter().rev() {
        acc = acc * z + a;
    }
    acc
}

/// Value and first derivative in one Horner pass.
#[inline]
pub fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Outcome of the Aberth-Ehrlich iteration.
#[derive(Debug, Clone)]
pub struct AberthResult {
    pub roots: Vec<Complex64>,
    pub iterations: u32,
    pub converged: bool,
}

/// Simultaneous root finding by Aberth-Ehrlich.
///
/// Initialization on a circle of radius `|a_0/a_n|^{1/n}` with angular
/// jitter; convergence when every correction is below `tol` relative to the
/// root magnitude.
pub fn aberth(coeffs: &[Complex64], max_iterations: u32, tol: f64) -> AberthResult {
    // Trim trailing zero leading coefficients (degree reduction).
    let mut hi = coeffs.len();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while hi > 1 && coeffs[hi - 1].norm() <= scale * 1e-300 {
        hi -= 1;
    }
    let coeffs = &coeffs[..hi];
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return AberthResult { roots: vec![], iterations: 0, converged: true };
    }
    // Roots exactly at the origin from vanishing low coefficients.
    let mut lo = 0usize;
    while lo < n && coeffs[lo].norm() <= scale * 1e-300 {
        lo += 1;
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    let work = &coeffs[lo..];
    let deg = work.len() - 1;
    if deg == 0 {
        return AberthResult { roots, iterations: 0, converged: true };
    }

    let r0 = {
        let ratio = work[0].norm() / work[deg].norm();
        let r = ratio.powf(1.0 / deg as f64);
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    };
    let mut zs: Vec<Complex64> = (0..deg)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / deg as f64 + 0.437;
            Complex64::from_polar(r0 * (1.0 + 0.05 * ((i % 7) as f64 - 3.0) / 7.0), theta)
        })
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let zi = zs[i];
            let (p, dp) = horner_with_derivative(work, zi);
            if p.norm() == 0.0 {
                continue;
            }
            let w = if dp.norm_sqr() > 0.0 { p / dp } else { Complex64::new(1e-3, 0.0) };
            let mut sum = Complex64::new(0.0, 0.0);
            for (j, zj) in zs.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d.norm_sqr() > 0.0 {
                        sum += d.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * sum;
            let step = if denom.norm_sqr() > 0.0 { w / denom } else { w };
            if !step.is_finite() {
                continue;
            }
            zs[i] = zi - step;
            let rel = step.norm() / zs[i].norm().max(1.0);
            max_step = max_step.max(rel);
        }
        if max_step <= tol {
            converged = true;
            break;
        }
        // Near multiple roots the steps stagnate at the rounding-noise level
        // above `tol`; accept once every residual is at backward-error size.
        if max_step <= 1e-6 && backward_error_ok(work, &zs) {
            converged = true;
            break;
        }
    }
    roots.extend(zs);
    AberthResult { roots, iterations, converged }
}

/// True when every tentative root has residual within a small multiple of
/// the evaluation rounding bound `eps * sum |a_k| |z|^k`.
fn backward_error_ok(coeffs: &[Complex64], zs: &[Complex64]) -> bool {
    for z in zs {
        let mut p = Complex64::new(0.0, 0.0);
        let mut s = 0.0f64;
        let r = z.norm();
        for a in coeffs.iter().rev() {
            p = p * z + a;
            s = s * r + a.norm();
        }
        if p.norm() > 64.0 * f64::EPSILON * s {
            return false;
        }
    }
    true
}

/// A few Newton steps to polish one root.
pub fn newton_polish(coeffs: &[Complex64], mut z: Complex64, steps: usize) -> Complex64 {
    for _ in 0..steps {
        let (p, dp) = horner_with_derivative(coeffs, z);
        if dp.norm_sqr() == 0.0 || !p.is_finite() {
            break;
        }
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sort_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn linear_and_quadratic() {
        let r = aberth(&[c(-1.0, 0.0), c(1.0, 0.0)], 100, 1e-13);
        assert!(r.converged);
        assert!((r.roots[0] - c(1.0, 0.0)).norm() < 1e-12);

        // (z-2)(z+3) = z^2 + z - 6
        let r = aberth(&[c(-6.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], 200, 1e-13);
        let roots = sort_by_re(r.roots);
        assert!((roots[0] - c(-3.0, 0.0)).norm() < 1e-10);
        assert!((roots[1] - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn random_polynomial_reconstructs() {
        // Verify by reconstruction: product of (z - r_i) matches coefficients.
        let mut st = crate::randgauss::RngStream::new(314, 0);
        for _ in 0..20 {
            let n = 12;
            let coeffs: Vec<Complex64> = (0..=n).map(|_| st.complex_gaussian()).collect();
            let res = aberth(&coeffs, 200, 1e-13);
            assert!(res.converged);
            let lead = coeffs[n];
            let mut rec = vec![Complex64::new(0.0, 0.0); n + 1];
            rec[0] = lead;
            let mut deg = 0usize;
            for r in &res.roots {
                deg += 1;
                for i in (1..=deg).rev() {
                    let lower = rec[i - 1];
                    rec[i] = rec[i] - lower * r;
                }
                // rec holds coefficients of lead * prod (z - r) in descending order
            }
            // rec is in descending order; compare reversed.
            let max_c = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for i in 0..=n {
                let got = rec[n - i];
                assert!((got - coeffs[i]).norm() < 1e-7 * max_c.max(1.0), "i={i}");
            }
        }
    }

    #[test]
    fn multiple_root_cluster() {
        // (z - 0.3)^2 (z + 0.4) = z^3 - 0.2 z^2 - 0.15 z + 0.036
        let coeffs = [c(0.036, 0.0), c(-0.15, 0.0), c(-0.2, 0.0), c(1.0, 0.0)];
        let res = aberth(&coeffs, 400, 1e-13);
        let roots = sort_by_re(res.roots);
        assert!((roots[0] - c(-0.4, 0.0)).norm() < 1e-8);
        // The double root splits at ~sqrt(eps); both halves stay within 1e-6.
        assert!((roots[1] - c(0.3, 0.0)).norm() < 1e-5);
        assert!((roots[2] - c(0.3, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn zero_roots_at_origin() {
        // z^2 (z - 1): low coefficients vanish.
        let coeffs = [c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        let res = aberth(&coeffs, 200, 1e-13);
        let roots = sort_by_re(res.roots);
        assert!((roots[0]).norm() < 1e-14);
        assert!((roots[1]).norm() < 1e-14);
        assert!((roots[2] - c(1.0, 0.0)).norm() < 1e-10);
    }
}
