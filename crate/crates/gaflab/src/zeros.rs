//! Zeros of sampled sections: location, counting, validation, pairing.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Error;
use crate::model::DEGREE_CAP;
use crate::poly;
use crate::randgauss::SectionSample;
use crate::Result;

/// Validation outcome of a root-finding run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ZeroSetStatus {
    /// Aberth and argument-principle counts agree and residuals pass.
    Valid,
    /// A root lies within `1e-8 * r` of the circle `|z| = r`.
    BoundaryAmbiguous,
    /// Aberth did not converge.
    NonConverged,
    /// Counts disagree or residuals fail.
    Invalid,
}

/// Located zeros with multiplicities and validation diagnostics.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    pub roots: Vec<(Complex64, u32)>,
    pub domain_radius: f64,
    pub argument_count: i64,
    pub max_newton_residual: f64,
    pub status: ZeroSetStatus,
}

impl ZeroSet {
    /// Total multiplicity of the located roots.
    pub fn total_multiplicity(&self) -> u64 {
        self.roots.iter().map(|(_, m)| *m as u64).sum()
    }

    /// JSON value with positions as [re, im] pairs plus the validation block.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "roots": self.roots.iter().map(|(z, m)| serde_json::json!({
                "position": [z.re, z.im],
                "multiplicity": m,
            })).collect::<Vec<_>>(),
            "domain_radius": self.domain_radius,
            "validation": {
                "argument_count": self.argument_count,
                "max_newton_residual": self.max_newton_residual,
                "status": format!("{:?}", self.status),
            },
        })
    }
}

/// A real compactly supported test function on C.
#[derive(Clone)]
pub struct TestForm {
    eval: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
    pub support_radius: f64,
}

impl TestForm {
    pub fn new(support_radius: f64, eval: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        TestForm { eval: Arc::new(eval), support_radius }
    }

    /// The radial bump `(1 - |z|^2/R^2)^2` on `|z| <= R`, 0 outside.
    pub fn radial_bump(radius: f64) -> Self {
        TestForm::new(radius, move |z| {
            let t = 1.0 - z.norm_sqr() / (radius * radius);
            if t > 0.0 {
                t * t
            } else {
                0.0
            }
        })
    }

    pub fn value(&self, z: Complex64) -> f64 {
        if z.norm() >= self.support_radius {
            0.0
        } else {
            (self.eval)(z)
        }
    }

    /// `int phi dA / pi` (the Fock-level-1 expected pairing target) by
    /// radial-angular quadrature.
    pub fn expected_pairing_fock(&self) -> Result<f64> {
        let r = self.support_radius;
        let angular = 64usize;
        let f = |rad: f64| -> f64 {
            let mut acc = 0.0;
            for a in 0..angular {
                let th = 2.0 * std::f64::consts::PI * a as f64 / angular as f64;
                acc += self.value(Complex64::from_polar(rad, th));
            }
            acc / angular as f64 * rad
        };
        let v = crate::quad::integrate_adaptive(&f, 0.0, r, 1e-11, 1e-14, 24)?;
        Ok(2.0 * v)
    }
}

/// Divisor pairing `sum_i m_i phi(z_i)`.
#[derive(Debug, Clone, Copy)]
pub struct PairingResult {
    pub value: f64,
    /// Set when `phi.support_radius > zs.domain_radius`.
    pub truncated_support: bool,
}

/// All roots of the truncated frame polynomial inside `|z| <= r`.
///
/// Aberth-Ehrlich followed by Newton polishing, disk filtering, multiplicity
/// clustering at `1e-8 * r`, and validation against the argument principle.
pub fn roots_in_disk(sample: &SectionSample, r: f64) -> Result<ZeroSet> {
    let n = sample.coefficients.len() - 1;
    if n > DEGREE_CAP {
        return Err(Error::DegreeCap { requested: n, cap: DEGREE_CAP });
    }
    if !(r > 0.0) {
        return Err(Error::Argument("disk radius must be positive".into()));
    }
    let coeffs = sample.frame_polynomial();
    if coeffs.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::Argument("section is identically zero".into()));
    }
    let res = poly::aberth(&coeffs, 200, 1e-13);
    if !res.converged {
        return Ok(ZeroSet {
            roots: vec![],
            domain_radius: r,
            argument_count: 0,
            max_newton_residual: f64::INFINITY,
            status: ZeroSetStatus::NonConverged,
        });
    }
    // Polish, then filter to the closed disk.
    let tol_cluster = 1e-8 * r;
    let mut inside: Vec<Complex64> = Vec::new();
    let mut boundary_ambiguous = false;
    for root in res.roots {
        let z = poly::newton_polish(&coeffs, root, 20);
        let dist_to_circle = (z.norm() - r).abs();
        if dist_to_circle < tol_cluster {
            boundary_ambiguous = true;
        }
        if z.norm() <= r {
            inside.push(z);
        }
    }
    // Cluster into multiplicities.
    inside.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut clustered: Vec<(Complex64, u32)> = Vec::new();
    'outer: for z in inside {
        for (c, m) in clustered.iter_mut() {
            if (*c - z).norm() <= tol_cluster {
                // running mean of the cluster
                let mf = *m as f64;
                *c = (*c * mf + z) / (mf + 1.0);
                *m += 1;
                continue 'outer;
            }
        }
        clustered.push((z, 1));
    }

    // Residual scale: max |psi| on the contour.
    let contour_max = contour_max_modulus(&coeffs, r);
    let mut max_resid = 0.0f64;
    for (z, _) in &clustered {
        let v = poly::horner(&coeffs, *z).norm();
        max_resid = max_resid.max(v);
    }
    let residual_ok = max_resid <= 1e-9 * contour_max;

    let argument_count = match count_zeros_argument(sample, r) {
        Ok(c) => c,
        Err(_) if boundary_ambiguous => -1,
        Err(e) => return Err(e),
    };
    let total: u64 = clustered.iter().map(|(_, m)| *m as u64).sum();
    let status = if boundary_ambiguous {
        ZeroSetStatus::BoundaryAmbiguous
    } else if argument_count == total as i64 && residual_ok {
        ZeroSetStatus::Valid
    } else {
        ZeroSetStatus::Invalid
    };
    Ok(ZeroSet {
        roots: clustered,
        domain_radius: r,
        argument_count,
        max_newton_residual: max_resid,
        status,
    })
}

fn contour_max_modulus(coeffs: &[Complex64], r: f64) -> f64 {
    let m = 128usize;
    let mut best = 0.0f64;
    for j in 0..m {
        let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        best = best.max(poly::horner(coeffs, Complex64::from_polar(r, th)).norm());
    }
    best
}

/// Zero count in `|z| < r` by the argument principle:
/// `(1/2 pi i) oint psi'/psi dz` on `M = max(256, 32 N)` trapezoid nodes.
pub fn count_zeros_argument(sample: &SectionSample, r: f64) -> Result<i64> {
    let n = sample.coefficients.len() - 1;
    count_zeros_argument_with(sample, r, (256usize).max(32 * n))
}

/// Argument-principle count with an explicit node count (callers double `m`
/// on `ContourUnresolved`).
pub fn count_zeros_argument_with(sample: &SectionSample, r: f64, m: usize) -> Result<i64> {
    let coeffs = sample.frame_polynomial();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut min_newton = f64::INFINITY;
    for j in 0..m {
        let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let z = Complex64::from_polar(r, th);
        let (p, dp) = poly::horner_with_derivative(&coeffs, z);
        if p.norm() == 0.0 {
            return Err(Error::ContourNearZero { dist: 0.0, radius: r });
        }
        // Newton-step length approximates the distance to the nearest zero.
        if dp.norm() > 0.0 {
            min_newton = min_newton.min((p / dp).norm());
        }
        acc += dp / p * z;
    }
    if min_newton < 1e-8 * r {
        return Err(Error::ContourNearZero { dist: min_newton, radius: r });
    }
    let value = acc / m as f64;
    let rounded = value.re.round();
    let deviation = (value - Complex64::new(rounded, 0.0)).norm();
    if deviation >= 0.1 {
        return Err(Error::ContourUnresolved { deviation });
    }
    Ok(rounded as i64)
}

/// Pairing of the divisor against a test function: `sum m_i phi(z_i)`.
///
/// Precondition: `zs.status == Valid`. Sets `truncated_support` when the
/// test function's support extends beyond the located-roots radius.
pub fn pair_divisor(zs: &ZeroSet, phi: &TestForm) -> PairingResult {
    debug_assert_eq!(zs.status, ZeroSetStatus::Valid);
    let value = zs.roots.iter().map(|(z, m)| *m as f64 * phi.value(*z)).sum();
    PairingResult { value, truncated_support: phi.support_radius > zs.domain_radius + 1e-12 }
}

/// True iff the section has no zeros in `|z| < r`.
pub fn hole_indicator(sample: &SectionSample, r: f64) -> Result<bool> {
    Ok(count_zeros_argument(sample, r)? == 0)
}

/// Codimension-1 weighted volume of the divisor inside `|z| <= rr`.
///
/// In complex dimension 1 this reduces to the multiplicity count (the
/// `c_1^0/0! = 1` factor); returned as a real for forward compatibility.
pub fn volume_codim1(zs: &ZeroSet, region_radius: f64) -> f64 {
    zs.roots
        .iter()
        .filter(|(z, _)| z.norm() <= region_radius)
        .map(|(_, m)| *m as f64)
        .sum()
}
