//! Model Bergman spaces: bases, weights, kernels, densities, truncation.
//!
//! Three geometries are supported, all with monomial orthonormal bases
//! `f_k(z) = c_k z^k` in the holomorphic frame:
//!
//! * **Fock(p)** — the Bargmann-Fock space at level `p`: trivial bundle on C
//!   with metric weight `e^{-p|z|^2}` and volume `dV = dA/pi`. Basis
//!   coefficient `c_k = p^{(k+1)/2}/sqrt(k!)`, kernel function `P_p(z,z) = p`.
//! * **Disc** — the Bergman space of the unit disc with Lebesgue measure and
//!   trivial weight. `c_k = sqrt((k+1)/pi)`, kernel `1/(pi (1-|z|^2)^2)`.
//! * **CustomSpan(w)** — a finite span with user weights, trivial metric:
//!   `f_k(z) = w_k z^k`.
//!
//! All expected-zero densities are reported with respect to Lebesgue area.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Hard cap on truncation degrees (desk-scale scope).
pub const DEGREE_CAP: usize = 512;

/// Natural log of the largest finite f64; used by the overflow guards.
const LN_MAX: f64 = 709.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Bargmann-Fock space at tensor level `p >= 1`.
    Fock { level: u32 },
    /// Bergman space of the unit disc (Lebesgue measure, trivial weight).
    Disc,
    /// Finite span with monomial coefficients given by `weights`.
    CustomSpan { weights: Vec<f64> },
}

/// A weighted Bergman space together with its metric metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub kind: SpaceKind,
}

/// Explicit tail control for the `d = infinity` truncation.
///
/// Guarantees `sup_{|z| <= radius} sum_{k > order} |f_k(z)|^2 e^{-2 phi(z)}
/// <= tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub order: usize,
    pub radius: f64,
    pub tail_bound: f64,
}

/// Evaluation mode for the Bergman kernel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelMode {
    ClosedForm,
    Truncated(usize),
}

impl ModelSpace {
    pub fn fock(level: u32) -> Result<Self> {
        if level < 1 {
            return Err(Error::Argument("Fock level must be >= 1".into()));
        }
        Ok(ModelSpace { kind: SpaceKind::Fock { level } })
    }

    pub fn disc() -> Self {
        ModelSpace { kind: SpaceKind::Disc }
    }

    /// Finite custom span. Warns (via the returned flag) when the weight at
    /// index 0 vanishes, since the base locus is then nonempty at z = 0.
    pub fn custom_span(weights: Vec<f64>) -> Result<(Self, bool)> {
        if weights.is_empty() {
            return Err(Error::Argument("custom span needs at least one weight".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Argument("custom span weights must be finite and nonnegative".into()));
        }
        let base_point_warning = weights[0] == 0.0;
        Ok((ModelSpace { kind: SpaceKind::CustomSpan { weights } }, base_point_warning))
    }

    /// Complex dimension of the base (always 1 here; closed-form evaluators
    /// that generalize take `n` as an explicit argument).
    pub fn complex_dimension(&self) -> u32 {
        1
    }

    /// Scalar curvature `r^X` of the base metric (0 on the flat Fock model).
    pub fn scalar_curvature(&self) -> f64 {
        match self.kind {
            SpaceKind::Fock { .. } => 0.0,
            // Hyperbolic-type metadata for the disc is out of numeric scope;
            // only the flat value is consumed downstream.
            SpaceKind::Disc | SpaceKind::CustomSpan { .. } => f64::NAN,
        }
    }

    /// Curvature eigenvalue of the line bundle (2*pi*p for Fock level p).
    pub fn curvature_eigenvalue(&self) -> f64 {
        match self.kind {
            SpaceKind::Fock { level } => 2.0 * std::f64::consts::PI * level as f64,
            SpaceKind::Disc | SpaceKind::CustomSpan { .. } => f64::NAN,
        }
    }

    /// Lebesgue density of the first Chern form (p/pi for Fock level p).
    pub fn chern_density(&self) -> f64 {
        match self.kind {
            SpaceKind::Fock { level } => level as f64 / std::f64::consts::PI,
            SpaceKind::Disc | SpaceKind::CustomSpan { .. } => f64::NAN,
        }
    }

    /// True when `z` lies in the domain of the space.
    pub fn in_domain(&self, z: Complex64) -> bool {
        match self.kind {
            SpaceKind::Disc => z.norm() < 1.0,
            _ => z.is_finite(),
        }
    }

    /// Highest admissible basis index (`None` for the infinite families).
    pub fn max_index(&self) -> Option<usize> {
        match &self.kind {
            SpaceKind::CustomSpan { weights } => Some(weights.len() - 1),
            _ => None,
        }
    }

    /// Monomial coefficient `c_k` of the k-th orthonormal basis element
    /// (`f_k(z) = c_k z^k` in the holomorphic frame), as `ln c_k`.
    ///
    /// Returned in log form because Fock coefficients overflow quickly.
    pub fn basis_log_coeff(&self, k: usize) -> f64 {
        match &self.kind {
            SpaceKind::Fock { level } => {
                let p = *level as f64;
                0.5 * (k as f64 + 1.0) * p.ln() - 0.5 * ln_factorial(k)
            }
            SpaceKind::Disc => 0.5 * ((k as f64 + 1.0) / std::f64::consts::PI).ln(),
            SpaceKind::CustomSpan { weights } => {
                if k < weights.len() && weights[k] > 0.0 {
                    weights[k].ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Monomial coefficient `c_k` as a plain f64 (may overflow to inf for
    /// extreme Fock parameters; callers needing safety use the log form).
    pub fn basis_coeff(&self, k: usize) -> f64 {
        self.basis_log_coeff(k).exp()
    }

    /// Evaluates the holomorphic frame coefficient `f_k(z)` of the k-th
    /// orthonormal basis element.
    ///
    /// Falls back to log-magnitude + phase evaluation when the direct product
    /// would overflow, and reports a structured overflow error only if the
    /// log-domain value itself exceeds the representable range.
    pub fn basis_eval(&self, k: usize, z: Complex64) -> Result<Complex64> {
        if !z.is_finite() {
            return Err(Error::Argument("basis_eval requires finite z".into()));
        }
        let log_c = self.basis_log_coeff(k);
        if log_c == f64::NEG_INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if k == 0 {
            return Ok(Complex64::new(log_c.exp(), 0.0));
        }
        let r = z.norm();
        if r == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let log_mag = log_c + k as f64 * r.ln();
        if log_mag.abs() < 650.0 {
            // Direct path: c_k * z^k via powi.
            let zk = z.powu(k as u32);
            let v = log_c.exp() * zk;
            if v.is_finite() && v.norm_sqr() > 0.0 {
                return Ok(v);
            }
        }
        if log_mag > LN_MAX {
            return Err(Error::Overflow(format!(
                "basis element {k} at |z| = {r:.3e}: log-magnitude {log_mag:.1}"
            )));
        }
        let phase = k as f64 * z.arg();
        Ok(Complex64::from_polar(log_mag.exp(), phase))
    }

    /// Metric weight `e^{-2 phi(z)}` of the frame.
    pub fn frame_weight(&self, z: Complex64) -> f64 {
        (-2.0 * self.phi(z)).exp()
    }

    /// Local weight function `phi` with `|1|^2_h = e^{-2 phi}`.
    pub fn phi(&self, z: Complex64) -> f64 {
        match self.kind {
            SpaceKind::Fock { level } => 0.5 * level as f64 * z.norm_sqr(),
            SpaceKind::Disc | SpaceKind::CustomSpan { .. } => 0.0,
        }
    }

    /// Bergman kernel function `P(z,z)` in the metric sense.
    pub fn kernel_diag(&self, z: Complex64, mode: KernelMode) -> Result<f64> {
        self.check_domain(z)?;
        match mode {
            KernelMode::ClosedForm => match &self.kind {
                SpaceKind::Fock { level } => Ok(*level as f64),
                SpaceKind::Disc => {
                    let s = z.norm_sqr();
                    Ok(1.0 / (std::f64::consts::PI * (1.0 - s) * (1.0 - s)))
                }
                SpaceKind::CustomSpan { weights } => {
                    Ok(self.kernel_frame_sum(z, weights.len() - 1))
                }
            },
            KernelMode::Truncated(n) => {
                Ok(self.kernel_frame_sum(z, n) * self.frame_weight(z))
            }
        }
    }

    /// Frame-coefficient partial sum `sum_{k<=n} |f_k(z)|^2` (no weight).
    pub fn kernel_frame_sum(&self, z: Complex64, n: usize) -> f64 {
        let s = z.norm_sqr();
        let mut total = 0.0;
        let mut term; // |c_k|^2 s^k, updated incrementally where possible
        match &self.kind {
            SpaceKind::Fock { level } => {
                let p = *level as f64;
                term = p; // k=0: c_0^2 = p
                total = term;
                for k in 1..=n {
                    term *= p * s / k as f64;
                    total += term;
                }
            }
            SpaceKind::Disc => {
                let mut sk = 1.0;
                for k in 0..=n {
                    total += (k as f64 + 1.0) / std::f64::consts::PI * sk;
                    sk *= s;
                }
            }
            SpaceKind::CustomSpan { weights } => {
                let mut sk = 1.0;
                for (k, w) in weights.iter().enumerate() {
                    if k > n {
                        break;
                    }
                    total += w * w * sk;
                    sk *= s;
                }
            }
        }
        total
    }

    /// Normalized Bergman kernel `N(z,w) = |P(z,w)| / sqrt(P(z,z) P(w,w))`,
    /// in closed form where available (finite sums for custom spans).
    pub fn normalized_kernel(&self, z: Complex64, w: Complex64) -> Result<f64> {
        self.check_domain(z)?;
        self.check_domain(w)?;
        match &self.kind {
            SpaceKind::Fock { level } => {
                let p = *level as f64;
                Ok((-0.5 * p * (z - w).norm_sqr()).exp())
            }
            SpaceKind::Disc => {
                let num = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
                let den = (Complex64::new(1.0, 0.0) - z * w.conj()).norm_sqr();
                Ok(num / den)
            }
            SpaceKind::CustomSpan { weights } => {
                self.normalized_kernel_truncated(z, w, weights.len() - 1)
            }
        }
    }

    /// Normalized kernel from truncated sums; the independent oracle for the
    /// closed forms.
    pub fn normalized_kernel_truncated(&self, z: Complex64, w: Complex64, n: usize) -> Result<f64> {
        self.check_domain(z)?;
        self.check_domain(w)?;
        let mut off = Complex64::new(0.0, 0.0);
        let zw = z * w.conj();
        let mut zwk = Complex64::new(1.0, 0.0);
        for k in 0..=n {
            let c2 = (2.0 * self.basis_log_coeff(k)).exp();
            off += c2 * zwk;
            zwk *= zw;
        }
        let pz = self.kernel_frame_sum(z, n);
        let pw = self.kernel_frame_sum(w, n);
        if pz <= 0.0 || pw <= 0.0 {
            return Err(Error::BasePoint(format!("kernel sum vanished at {z} or {w}")));
        }
        Ok(off.norm() / (pz * pw).sqrt())
    }

    /// Expected-zero density of the standard Gaussian section with respect to
    /// Lebesgue area: `rho(z) = (1/4 pi) Lap log K(z)` with
    /// `K = sum_k |f_k|^2`.
    pub fn ek_density(&self, z: Complex64) -> Result<f64> {
        self.check_domain(z)?;
        match &self.kind {
            SpaceKind::Fock { level } => Ok(*level as f64 / std::f64::consts::PI),
            SpaceKind::Disc => {
                let s = z.norm_sqr();
                Ok(2.0 / (std::f64::consts::PI * (1.0 - s) * (1.0 - s)))
            }
            SpaceKind::CustomSpan { .. } => self.ek_density_fd(z, 1e-3),
        }
    }

    /// Finite-difference fallback: 5-point Laplacian of `log K` at step `h`.
    pub fn ek_density_fd(&self, z: Complex64, h: f64) -> Result<f64> {
        self.check_domain(z)?;
        let n = match self.max_index() {
            Some(m) => m,
            None => {
                let r = z.norm() + 2.0 * h;
                self.truncation_order(r.max(0.1), 1e-14)?.order
            }
        };
        let mut vals = [0.0; 5];
        let stencil = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
        ];
        for (i, dz) in stencil.iter().enumerate() {
            let k = self.kernel_frame_sum(z + dz, n);
            if k <= 0.0 {
                return Err(Error::BasePoint(format!("kernel sum vanished near {z}")));
            }
            vals[i] = k.ln();
        }
        let lap = (vals[1] + vals[2] + vals[3] + vals[4] - 4.0 * vals[0]) / (h * h);
        Ok(lap / (4.0 * std::f64::consts::PI))
    }

    /// Minimal truncation order `N` with
    /// `sup_{|z| <= r} sum_{k > N} |f_k(z)|^2 e^{-2 phi} <= eps`.
    ///
    /// The tail is radial and monotone in |z| for all three models, so the
    /// supremum is attained at |z| = r.
    pub fn truncation_order(&self, r: f64, eps: f64) -> Result<TruncationCertificate> {
        if !(eps > 0.0) {
            return Err(Error::Argument("truncation tolerance must be > 0".into()));
        }
        if !(r > 0.0) {
            return Err(Error::Argument("truncation radius must be > 0".into()));
        }
        if matches!(self.kind, SpaceKind::Disc) && r >= 1.0 {
            return Err(Error::Domain("disc truncation radius must be < 1".into()));
        }
        let mut n = 0usize;
        loop {
            let tail = self.metric_tail(r, n);
            if tail <= eps {
                return Ok(TruncationCertificate { order: n, radius: r, tail_bound: eps });
            }
            n += 1;
            if n > DEGREE_CAP {
                return Err(Error::DegreeCap { requested: n, cap: DEGREE_CAP });
            }
        }
    }

    /// Metric tail `sum_{k > n} |f_k(r)|^2 e^{-2 phi(r)}` at radius `r`.
    pub fn metric_tail(&self, r: f64, n: usize) -> f64 {
        let s = r * r;
        match &self.kind {
            SpaceKind::Fock { level } => {
                // p * Poisson(p s) upper tail beyond n.
                let p = *level as f64;
                let lambda = p * s;
                p * poisson_tail_gt(lambda, n)
            }
            SpaceKind::Disc => {
                // sum_{k>n} (k+1) s^k / pi, closed geometric-series form.
                let m = n as f64 + 1.0;
                s.powi(n as i32 + 1) * ((m + 1.0) - m * s)
                    / (std::f64::consts::PI * (1.0 - s) * (1.0 - s))
            }
            SpaceKind::CustomSpan { weights } => {
                let mut total = 0.0;
                for (k, w) in weights.iter().enumerate().skip(n + 1) {
                    total += w * w * s.powi(k as i32);
                }
                total
            }
        }
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if !self.in_domain(z) {
            return Err(Error::Domain(format!("{z} outside the domain of {:?}", self.kind)));
        }
        Ok(())
    }
}

/// `ln(k!)` via `lgamma`.
pub fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Lanczos log-gamma (sufficient accuracy for factorial scaling; the basis
/// normalizations it feeds are validated against quadrature oracles).
pub fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Poisson upper tail `P(Pois(lambda) > n)` by stable forward summation.
pub fn poisson_tail_gt(lambda: f64, n: usize) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let m = n + 1;
    let log_first = m as f64 * lambda.ln() - lambda - ln_factorial(m);
    if log_first < -745.0 {
        return 0.0;
    }
    let mut term = log_first.exp();
    let mut total = 0.0;
    let mut k = m;
    loop {
        total += term;
        k += 1;
        term *= lambda / k as f64;
        if term < total * 1e-18 || term < 1e-320 {
            break;
        }
    }
    total
}
