//! Reproducible complex Gaussian streams and random holomorphic sections.
//!
//! The generator is counter-based: every `(master_seed, stream_index)` pair
//! derives an independent key by strong 64-bit mixing, and each output is a
//! pure function of `(key, counter)`. Streams never share state, so any
//! number of workers can draw from disjoint streams and reproduce a single
//! sequential run bit for bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{ModelSpace, TruncationCertificate};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic, independently seeded Gaussian stream.
///
/// Single-owner mutable state: clone-with-new-index for parallel work, never
/// share one stream across workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        // Two mixing rounds over (seed, index) decorrelate nearby pairs.
        let key = mix64(mix64(master_seed ^ GOLDEN).wrapping_add(mix64(
            stream_index.wrapping_mul(GOLDEN) ^ 0xD1B5_4A32_D192_ED03,
        )));
        RngStream { master_seed, stream_index, key, counter: 0 }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in (0, 1]: safe to feed into `ln`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (((self.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
    }

    /// A pair of independent standard real normals (Box-Muller; both outputs
    /// consumed, no cached spare, so the draw count per call is fixed).
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let mag = (-2.0 * u1.ln()).sqrt();
        let ang = 2.0 * std::f64::consts::PI * u2;
        (mag * ang.cos(), mag * ang.sin())
    }

    /// One standard complex Gaussian: `(X + iY)/sqrt(2)`, mean 0, E|eta|^2 = 1.
    #[inline]
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let (x, y) = self.normal_pair();
        Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Seed/stream labels carried into every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
}

/// A truncated random holomorphic section `psi = sum_{k<=N} eta_k S_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSample {
    pub space: ModelSpace,
    pub coefficients: Vec<Complex64>,
    pub certificate: TruncationCertificate,
    pub provenance: Provenance,
}

/// Draws `N+1` i.i.d. standard complex Gaussian coefficients in ascending
/// index order (the draw order is part of the reproducibility contract).
pub fn sample_section(
    space: &ModelSpace,
    certificate: &TruncationCertificate,
    stream: &mut RngStream,
) -> SectionSample {
    let provenance = Provenance { seed: stream.master_seed(), stream: stream.stream_index() };
    let coefficients = (0..=certificate.order).map(|_| stream.complex_gaussian()).collect();
    SectionSample { space: space.clone(), coefficients, certificate: *certificate, provenance }
}

/// Pointwise evaluation of a sampled section.
#[derive(Debug, Clone, Copy)]
pub struct EvalResult {
    /// Frame coefficient `sum eta_k f_k(z)`.
    pub frame_value: Complex64,
    /// `|frame_value| e^{-phi(z)}`; may underflow to 0 or overflow to inf at
    /// extreme magnitudes, in which case `log_metric_norm` stays reliable.
    pub metric_norm: f64,
    /// `ln(metric_norm)`, computed in the log domain (`-inf` at zeros).
    pub log_metric_norm: f64,
    /// Set when `z` lies outside the certificate radius.
    pub outside_certificate: bool,
}

impl SectionSample {
    /// Monomial coefficients `eta_k c_k` of the frame polynomial.
    pub fn frame_polynomial(&self) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, eta)| eta * self.space.basis_coeff(k))
            .collect()
    }

    /// Evaluates frame value, metric norm and log metric norm at `z`.
    pub fn eval(&self, z: Complex64) -> EvalResult {
        let outside = z.norm() > self.certificate.radius * (1.0 + 1e-12);
        let n = self.coefficients.len() - 1;
        let r = z.norm();
        // Magnitude of the largest term decides between the direct Horner
        // path and the rescaled log-domain path.
        let mut max_log = f64::NEG_INFINITY;
        for (k, eta) in self.coefficients.iter().enumerate() {
            let m = eta.norm();
            if m == 0.0 {
                continue;
            }
            let lt = m.ln()
                + self.space.basis_log_coeff(k)
                + if k == 0 { 0.0 } else { k as f64 * r.max(1e-300).ln() };
            max_log = max_log.max(lt);
        }
        let phi = self.space.phi(z);
        if max_log < 650.0 && n as f64 * r.max(1e-300).ln().abs() < 650.0 {
            // Direct Horner on the frame polynomial.
            let coeffs = self.frame_polynomial();
            let fv = crate::poly::horner(&coeffs, z);
            let log_metric = if fv.norm_sqr() > 0.0 { fv.norm().ln() - phi } else { f64::NEG_INFINITY };
            return EvalResult {
                frame_value: fv,
                metric_norm: (fv.norm().ln() - phi).exp(),
                log_metric_norm: log_metric,
                outside_certificate: outside,
            };
        }
        // Log-domain path: factor out the dominant term.
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, eta) in self.coefficients.iter().enumerate() {
            let m = eta.norm();
            if m == 0.0 {
                continue;
            }
            let lt = m.ln()
                + self.space.basis_log_coeff(k)
                + if k == 0 { 0.0 } else { k as f64 * r.max(1e-300).ln() };
            let phase = eta.arg() + k as f64 * z.arg();
            acc += Complex64::from_polar((lt - max_log).exp(), phase);
        }
        let log_abs = max_log + acc.norm().max(1e-300).ln();
        let frame_value = if log_abs < 700.0 {
            Complex64::from_polar(log_abs.exp(), acc.arg())
        } else {
            Complex64::from_polar(f64::INFINITY, acc.arg())
        };
        let log_metric = if acc.norm_sqr() > 0.0 { log_abs - phi } else { f64::NEG_INFINITY };
        EvalResult {
            frame_value,
            metric_norm: log_metric.exp(),
            log_metric_norm: log_metric,
            outside_certificate: outside,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpace;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn determinism_and_stream_independence() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        for _ in 0..256 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut d = RngStream::new(42, 4);
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| d.next_u64()).collect();
        assert_ne!(xs, ys);
        let mut e = RngStream::new(43, 3);
        let zs: Vec<u64> = (0..16).map(|_| e.next_u64()).collect();
        assert_ne!(ys, zs);
    }

    #[test]
    fn complex_gaussian_moments() {
        let mut s = RngStream::new(7, 0);
        let n = 1_000_000usize;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut second = 0.0;
        let mut pseudo = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let g = s.complex_gaussian();
            mean += g;
            second += g.norm_sqr();
            pseudo += g * g;
        }
        mean /= n as f64;
        second /= n as f64;
        pseudo /= n as f64;
        assert!(mean.norm() < 0.005, "mean {mean}");
        assert!((second - 1.0).abs() < 0.01, "E|eta|^2 {second}");
        assert!(pseudo.norm() < 0.005, "E[eta^2] {pseudo}");
    }

    #[test]
    fn sample_matches_certificate_and_reproduces() {
        let sp = ModelSpace::fock(1).unwrap();
        let cert = sp.truncation_order(1.0, 1e-12).unwrap();
        let s1 = sample_section(&sp, &cert, &mut RngStream::new(1, 9));
        let s2 = sample_section(&sp, &cert, &mut RngStream::new(1, 9));
        assert_eq!(s1.coefficients.len(), cert.order + 1);
        assert_eq!(s1.coefficients, s2.coefficients);
    }

    #[test]
    fn coefficient_variance() {
        let sp = ModelSpace::fock(1).unwrap();
        let cert = sp.truncation_order(0.5, 1e-6).unwrap();
        let trials = 100_000u64;
        let mut acc = 0.0;
        for i in 0..trials {
            let s = sample_section(&sp, &cert, &mut RngStream::new(11, i));
            let k = 3.min(cert.order);
            acc += s.coefficients[k].norm_sqr();
        }
        let var = acc / trials as f64;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn eval_constant_and_linear_sections() {
        let sp = ModelSpace::fock(1).unwrap();
        let cert = TruncationCertificate { order: 2, radius: 3.0, tail_bound: 1.0 };
        let mut s = sample_section(&sp, &cert, &mut RngStream::new(0, 0));
        s.coefficients = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let r = s.eval(c(2.0, 0.0));
        assert!((r.frame_value - c(1.0, 0.0)).norm() < 1e-14);
        assert!((r.metric_norm - (-2.0f64).exp()).abs() < 1e-15);

        let sp4 = ModelSpace::fock(4).unwrap();
        let mut s4 = sample_section(&sp4, &cert, &mut RngStream::new(0, 0));
        s4.coefficients = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let r4 = s4.eval(c(1.0, 0.0));
        assert!((r4.frame_value - c(4.0, 0.0)).norm() < 1e-12);
        assert!((r4.metric_norm - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rescaling_identity_pointwise() {
        // Level-p evaluation equals p^{1/2} psi_1(sqrt(p) z) in frame value
        // for identical coefficients: exact identity on monomials.
        let p = 9u32;
        let sp1 = ModelSpace::fock(1).unwrap();
        let spp = ModelSpace::fock(p).unwrap();
        let cert1 = TruncationCertificate { order: 18, radius: 4.0, tail_bound: 1.0 };
        let certp = TruncationCertificate { order: 18, radius: 4.0 / 3.0, tail_bound: 1.0 };
        let coeffs: Vec<Complex64> = {
            let mut st = RngStream::new(5, 77);
            (0..=18).map(|_| st.complex_gaussian()).collect()
        };
        let mut s1 = sample_section(&sp1, &cert1, &mut RngStream::new(0, 0));
        s1.coefficients = coeffs.clone();
        let mut sp_ = sample_section(&spp, &certp, &mut RngStream::new(0, 0));
        sp_.coefficients = coeffs;
        let root_p = (p as f64).sqrt();
        for &(re, im) in &[(0.2, 0.1), (0.5, -0.3), (0.0, 0.4), (1.0, 0.0)] {
            let z = c(re, im);
            let lhs = sp_.eval(z).frame_value;
            let rhs = root_p * s1.eval(root_p * z).frame_value;
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0), "{z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn metric_second_moment_matches_kernel() {
        // E |psi(z)|_h^2 = truncated kernel diagonal, by Monte Carlo.
        let sp = ModelSpace::fock(1).unwrap();
        let cert = sp.truncation_order(1.0, 1e-10).unwrap();
        let z = c(0.8, -0.2);
        let trials = 100_000u64;
        let mut acc = 0.0;
        for i in 0..trials {
            let s = sample_section(&sp, &cert, &mut RngStream::new(3, i));
            let e = s.eval(z);
            acc += e.metric_norm * e.metric_norm;
        }
        let mean = acc / trials as f64;
        let target = sp
            .kernel_diag(z, crate::model::KernelMode::Truncated(cert.order))
            .unwrap();
        // CLT tolerance: sd of |psi|_h^2 is ~target (exponential), 5 sigma.
        let tol = 5.0 * target / (trials as f64).sqrt();
        assert!((mean - target).abs() < tol, "{mean} vs {target}");
    }

    #[test]
    fn non_l2_diagnostic_linear_growth() {
        // Partial sums of |eta_k|^2 grow linearly in N: slope 1 +- 0.05
        // between N = 1e3 and N = 1e4 on one stream.
        let mut s = RngStream::new(99, 0);
        let mut partial = 0.0;
        let mut at_1k = 0.0;
        for k in 1..=10_000usize {
            partial += s.complex_gaussian().norm_sqr();
            if k == 1000 {
                at_1k = partial;
            }
        }
        let slope = (partial - at_1k) / 9000.0;
        assert!((slope - 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn log_metric_norm_at_zero_is_neg_infinity() {
        let sp = ModelSpace::fock(1).unwrap();
        let cert = TruncationCertificate { order: 1, radius: 3.0, tail_bound: 1.0 };
        let mut s = sample_section(&sp, &cert, &mut RngStream::new(0, 0));
        s.coefficients = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let e = s.eval(c(1.0, 0.0));
        assert_eq!(e.log_metric_norm, f64::NEG_INFINITY);
        let outside = s.eval(c(5.0, 0.0));
        assert!(outside.outside_certificate);
    }
}
