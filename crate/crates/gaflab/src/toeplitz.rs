//! Truncated Toeplitz operators `T_f = P f P` on the model spaces.
//!
//! The operator on the infinite space is represented by its `(N+1) x (N+1)`
//! compression in the monomial orthonormal basis. Radial symbols take a fast
//! diagonal path (the angular integral is exact); general symbols use a
//! polar tensor rule: trapezoid in angle with `4(N+1)` nodes, adaptive
//! Gauss-Legendre radially.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::linalg::{self, HermitianEigen};
use crate::model::{ModelSpace, SpaceKind, TruncationCertificate, DEGREE_CAP};
use crate::randgauss::{Provenance, RngStream, SectionSample};
use crate::Result;

/// Derivative data of a real symbol at a point, in ambient coordinates:
/// Wirtinger derivatives and Euclidean Laplacians.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeBundle {
    pub f: f64,
    /// `d f / d z`
    pub fz: Complex64,
    /// `d^2 f / d z^2`
    pub fzz: Complex64,
    /// Euclidean Laplacian `f_xx + f_yy`
    pub lap: f64,
    /// `d (lap f) / d z`
    pub dz_lap: Complex64,
    /// Euclidean bi-Laplacian
    pub lap2: f64,
}

type RealFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;
type BundleFn = Arc<dyn Fn(Complex64) -> DerivativeBundle + Send + Sync>;

/// A real symbol with evaluation, decay information and derivative oracles
/// up to total order 4 (analytic for the built-in families, Richardson
/// finite differences otherwise).
#[derive(Clone)]
pub struct SymbolDescriptor {
    pub name: String,
    eval: RealFn,
    pub radial: bool,
    pub nonnegative: bool,
    /// Declared sup-norm bound.
    pub sup_bound: f64,
    /// Effective support radius `R_f`: `|f| <= decay_bound` outside.
    pub support_radius: f64,
    pub decay_bound: f64,
    analytic: Option<BundleFn>,
    pub fd_step: f64,
}

impl std::fmt::Debug for SymbolDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolDescriptor")
            .field("name", &self.name)
            .field("radial", &self.radial)
            .field("sup_bound", &self.sup_bound)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

/// Builds the derivative bundle of a radial symbol from `g(s)` and its four
/// derivatives in `s = |z|^2`.
fn radial_bundle(g: &[f64; 5], z: Complex64) -> DerivativeBundle {
    let s = z.norm_sqr();
    let zb = z.conj();
    let (g0, g1, g2, g3, g4) = (g[0], g[1], g[2], g[3], g[4]);
    let _ = (g0, s);
    DerivativeBundle {
        f: g[0],
        fz: g1 * zb,
        fzz: g2 * zb * zb,
        lap: 4.0 * (g1 + s * g2),
        dz_lap: 4.0 * zb * (2.0 * g2 + s * g3),
        lap2: 16.0 * (2.0 * g2 + 4.0 * s * g3 + s * s * g4),
    }
}

impl SymbolDescriptor {
    /// `f(z) = e^{-a |z|^2}`.
    pub fn gaussian(a: f64) -> Self {
        assert!(a > 0.0);
        let eval: RealFn = Arc::new(move |z: Complex64| (-a * z.norm_sqr()).exp());
        let analytic: BundleFn = Arc::new(move |z: Complex64| {
            let s = z.norm_sqr();
            let e = (-a * s).exp();
            let g = [e, -a * e, a * a * e, -a * a * a * e, a * a * a * a * e];
            radial_bundle(&g, z)
        });
        SymbolDescriptor {
            name: format!("exp(-{a}|z|^2)"),
            eval,
            radial: true,
            nonnegative: true,
            sup_bound: 1.0,
            support_radius: (40.0 / a).sqrt(),
            decay_bound: (-40.0f64).exp(),
            analytic: Some(analytic),
            fd_step: 1e-3,
        }
    }

    /// `f(z) = |z|^{2m} e^{-a |z|^2}`.
    pub fn radial_poly_gaussian(m: u32, a: f64) -> Self {
        assert!(a > 0.0);
        let eval: RealFn =
            Arc::new(move |z: Complex64| z.norm_sqr().powi(m as i32) * (-a * z.norm_sqr()).exp());
        // g_j(s) e^{-a s} with polynomial prefactors: q_{j+1} = q_j' - a q_j.
        let mut polys: Vec<Vec<f64>> = Vec::with_capacity(5);
        let mut q = vec![0.0; m as usize + 1];
        q[m as usize] = 1.0;
        polys.push(q.clone());
        for _ in 0..4 {
            let prev = polys.last().unwrap().clone();
            let mut next = vec![0.0; prev.len()];
            for (i, cval) in prev.iter().enumerate() {
                if i >= 1 {
                    next[i - 1] += i as f64 * cval;
                }
            }
            for (i, cval) in prev.iter().enumerate() {
                next[i] -= a * cval;
            }
            polys.push(next);
        }
        let analytic: BundleFn = Arc::new(move |z: Complex64| {
            let s = z.norm_sqr();
            let e = (-a * s).exp();
            let mut g = [0.0; 5];
            for (j, poly) in polys.iter().enumerate() {
                let mut acc = 0.0;
                for coef in poly.iter().rev() {
                    acc = acc * s + coef;
                }
                g[j] = acc * e;
            }
            radial_bundle(&g, z)
        });
        let sup = if m == 0 { 1.0 } else { (m as f64 / a).powi(m as i32) * (-(m as f64)).exp() };
        SymbolDescriptor {
            name: format!("|z|^{}exp(-{a}|z|^2)", 2 * m),
            eval,
            radial: true,
            nonnegative: true,
            sup_bound: sup,
            support_radius: ((40.0 + 3.0 * m as f64) / a).sqrt(),
            decay_bound: 1e-14,
            analytic: Some(analytic),
            fd_step: 1e-3,
        }
    }

    /// `f(z) = Re(z) e^{-|z|^2}` — odd under z -> -z, sign-changing.
    pub fn re_z_gaussian() -> Self {
        let eval: RealFn = Arc::new(|z: Complex64| z.re * (-z.norm_sqr()).exp());
        let analytic: BundleFn = Arc::new(|z: Complex64| {
            let s = z.norm_sqr();
            let e = (-s).exp();
            let zb = z.conj();
            let x = z.re;
            let sum = z + zb; // 2x
            DerivativeBundle {
                f: x * e,
                fz: e * (Complex64::new(0.5, 0.0) - zb * sum * 0.5),
                fzz: e * zb * (sum * zb * 0.25 + zb * zb * 0.25 - Complex64::new(1.0, 0.0)),
                lap: (4.0 * x * s - 8.0 * x) * e,
                dz_lap: e * (Complex64::new(2.0 * (s - 2.0), 0.0) + zb * sum * (3.0 - s)),
                lap2: 16.0 * x * (s * s - 6.0 * s + 6.0) * e,
            }
        });
        SymbolDescriptor {
            name: "Re(z)exp(-|z|^2)".into(),
            eval,
            radial: false,
            nonnegative: false,
            sup_bound: (0.5f64).exp().recip() / 2.0f64.sqrt(),
            support_radius: 7.0,
            decay_bound: 1e-14,
            analytic: Some(analytic),
            fd_step: 1e-3,
        }
    }

    /// Constant symbol. On Fock this is only formally admissible: the class-Q
    /// integral diverges, but the truncated compression is well defined
    /// (supported by construction).
    pub fn constant(c: f64) -> Self {
        let eval: RealFn = Arc::new(move |_| c);
        let analytic: BundleFn = Arc::new(move |_| DerivativeBundle {
            f: c,
            fz: Complex64::new(0.0, 0.0),
            fzz: Complex64::new(0.0, 0.0),
            lap: 0.0,
            dz_lap: Complex64::new(0.0, 0.0),
            lap2: 0.0,
        });
        SymbolDescriptor {
            name: format!("const({c})"),
            eval,
            radial: true,
            nonnegative: c >= 0.0,
            sup_bound: c.abs(),
            support_radius: f64::INFINITY,
            decay_bound: c.abs(),
            analytic: Some(analytic),
            fd_step: 1e-3,
        }
    }

    /// General symbol with finite-difference derivative oracles.
    pub fn from_fn(
        name: &str,
        radial: bool,
        nonnegative: bool,
        sup_bound: f64,
        support_radius: f64,
        f: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SymbolDescriptor {
            name: name.into(),
            eval: Arc::new(f),
            radial,
            nonnegative,
            sup_bound,
            support_radius,
            decay_bound: 1e-12,
            analytic: None,
            fd_step: 1e-3,
        }
    }

    pub fn value(&self, z: Complex64) -> f64 {
        (self.eval)(z)
    }

    /// Derivative bundle at `z`: analytic when available, otherwise nested
    /// Richardson finite differences (wider steps for orders 3-4, where the
    /// rounding/truncation tradeoff forces `h ~ 1e-2`).
    pub fn derivatives(&self, z: Complex64) -> DerivativeBundle {
        if let Some(a) = &self.analytic {
            return a(z);
        }
        let f = &self.eval;
        let h = self.fd_step;
        let dx = |g: &dyn Fn(Complex64) -> f64, z: Complex64, h: f64| {
            (g(z + Complex64::new(h, 0.0)) - g(z - Complex64::new(h, 0.0))) / (2.0 * h)
        };
        let dy = |g: &dyn Fn(Complex64) -> f64, z: Complex64, h: f64| {
            (g(z + Complex64::new(0.0, h)) - g(z - Complex64::new(0.0, h))) / (2.0 * h)
        };
        let rich = |v_h: f64, v_h2: f64| (4.0 * v_h2 - v_h) / 3.0;
        let lap_fd = |g: &dyn Fn(Complex64) -> f64, z: Complex64, h: f64| {
            (g(z + Complex64::new(h, 0.0))
                + g(z - Complex64::new(h, 0.0))
                + g(z + Complex64::new(0.0, h))
                + g(z - Complex64::new(0.0, h))
                - 4.0 * g(z))
                / (h * h)
        };
        let geval = |z: Complex64| f(z);
        let fz = {
            let gx = rich(dx(&geval, z, h), dx(&geval, z, h / 2.0));
            let gy = rich(dy(&geval, z, h), dy(&geval, z, h / 2.0));
            Complex64::new(gx, -gy) * 0.5
        };
        let fzz = {
            let fxx_h = |h: f64| {
                (geval(z + Complex64::new(h, 0.0)) - 2.0 * geval(z) + geval(z - Complex64::new(h, 0.0)))
                    / (h * h)
            };
            let fyy_h = |h: f64| {
                (geval(z + Complex64::new(0.0, h)) - 2.0 * geval(z) + geval(z - Complex64::new(0.0, h)))
                    / (h * h)
            };
            let fxy_h = |h: f64| {
                (geval(z + Complex64::new(h, h)) - geval(z + Complex64::new(h, -h))
                    - geval(z + Complex64::new(-h, h))
                    + geval(z + Complex64::new(-h, -h)))
                    / (4.0 * h * h)
            };
            let fxx = rich(fxx_h(h), fxx_h(h / 2.0));
            let fyy = rich(fyy_h(h), fyy_h(h / 2.0));
            let fxy = rich(fxy_h(h), fxy_h(h / 2.0));
            Complex64::new(fxx - fyy, -2.0 * fxy) * 0.25
        };
        let lap = rich(lap_fd(&geval, z, h), lap_fd(&geval, z, h / 2.0));
        // Orders 3-4: nested stencils at a wider outer step.
        let h_in = h;
        let lap_at = |z: Complex64| rich(lap_fd(&geval, z, h_in), lap_fd(&geval, z, h_in / 2.0));
        let ho = (h * 20.0).max(0.02);
        let dz_lap = {
            let gx = rich(dx(&lap_at, z, ho), dx(&lap_at, z, ho / 2.0));
            let gy = rich(dy(&lap_at, z, ho), dy(&lap_at, z, ho / 2.0));
            Complex64::new(gx, -gy) * 0.5
        };
        let lap2 = rich(lap_fd(&lap_at, z, ho), lap_fd(&lap_at, z, ho / 2.0));
        DerivativeBundle { f: f(z), fz, fzz, lap, dz_lap, lap2 }
    }

    /// `g(s)` derivatives in `s = |z|^2` for radial symbols (0..=4), via the
    /// analytic bundle when present.
    fn radial_g(&self, r: f64) -> f64 {
        (self.eval)(Complex64::new(r, 0.0))
    }
}

/// Build/quadrature diagnostics stored with each operator.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureDiagnostics {
    /// Quadrature of `|f| P dV` over the compression domain.
    pub integrability_value: f64,
    /// Relative change between the last two refinements.
    pub integrability_rel_change: f64,
    /// Radial cut used for the compression domain.
    pub radial_cut: f64,
}

/// Spectral data of a built operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Column-major orthonormal eigenvectors in the model basis.
    pub eigenvectors: Vec<Complex64>,
    /// Number of tiny negatives clamped to zero (nonnegative symbols only).
    pub clamped: usize,
}

/// Truncated Toeplitz operator with optional spectral decomposition.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    pub space: ModelSpace,
    pub symbol: SymbolDescriptor,
    pub n_trunc: usize,
    /// Hermitian matrix, row-major, `(n_trunc + 1)^2` entries.
    pub matrix: Vec<Complex64>,
    pub spectral: Option<SpectralData>,
    pub diagnostics: QuadratureDiagnostics,
}

/// Trace data of a built operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceHs {
    pub trace: f64,
    pub hs_norm: f64,
    /// Direct quadrature of `f(z) P(z,z) dV` with the closed-form kernel.
    pub independent_trace: f64,
}

/// Measure density against Lebesgue area (dV = kappa dA).
fn measure_density(space: &ModelSpace) -> f64 {
    match space.kind {
        SpaceKind::Fock { .. } => 1.0 / std::f64::consts::PI,
        SpaceKind::Disc | SpaceKind::CustomSpan { .. } => 1.0,
    }
}

/// Radial cut for the compression domain: covers the weight decay around the
/// outermost basis element plus the symbol's effective support.
fn radial_cut(space: &ModelSpace, symbol: &SymbolDescriptor, n: usize) -> f64 {
    match space.kind {
        SpaceKind::Disc => 1.0,
        SpaceKind::Fock { level } => {
            let p = level as f64;
            let peak = ((2.0 * n as f64 + 1.0) / (2.0 * p)).sqrt();
            let cut = peak + 16.0 / p.sqrt();
            if symbol.support_radius.is_finite() {
                cut.min(symbol.support_radius + 16.0 / p.sqrt()).max(cut)
            } else {
                cut
            }
        }
        SpaceKind::CustomSpan { .. } => symbol.support_radius.min(50.0).max(4.0),
    }
}

/// Basis frame values `f_k(z)` for `k = 0..=n`, computed incrementally (the
/// ratio `c_k/c_{k-1}` is stable even where `c_k` itself overflows).
pub fn basis_values(space: &ModelSpace, z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut lc_prev = space.basis_log_coeff(0);
    let mut v = Complex64::new(lc_prev.exp(), 0.0);
    out.push(v);
    for k in 1..=n {
        let lc = space.basis_log_coeff(k);
        let ratio = (lc - lc_prev).exp();
        v = v * z * ratio;
        out.push(v);
        lc_prev = lc;
    }
    out
}

/// Builds the `(N+1) x (N+1)` compression `T[j,k] = <f S_k, S_j>`.
pub fn build_toeplitz(space: &ModelSpace, symbol: &SymbolDescriptor, n: usize) -> Result<ToeplitzOperator> {
    if n > DEGREE_CAP {
        return Err(Error::DegreeCap { requested: n, cap: DEGREE_CAP });
    }
    let dim = n + 1;
    let kappa = measure_density(space);
    let rcut = radial_cut(space, symbol, n);

    // Class-Q integrability check over the compression domain: quadrature of
    // |f| P dV at two refinements must agree to relative 1e-8.
    let kernel_diag_closed = |r: f64| -> f64 {
        match space.kind {
            SpaceKind::Fock { level } => level as f64,
            SpaceKind::Disc => {
                let s = r * r;
                1.0 / (std::f64::consts::PI * (1.0 - s) * (1.0 - s))
            }
            SpaceKind::CustomSpan { .. } => space.kernel_frame_sum(Complex64::new(r, 0.0), n),
        }
    };
    let integr = |panels: usize| -> f64 {
        let angular = if symbol.radial { 1 } else { 64 };
        let f = |r: f64| -> f64 {
            let mut acc = 0.0;
            for a in 0..angular {
                let th = 2.0 * std::f64::consts::PI * a as f64 / angular as f64;
                acc += symbol.value(Complex64::from_polar(r, th)).abs();
            }
            acc / angular as f64 * kernel_diag_closed(r) * r
        };
        let hi = if matches!(space.kind, SpaceKind::Disc) { 1.0 - 1e-6 } else { rcut };
        crate::quad::integrate_panels(&f, 0.0, hi, panels, 24) * 2.0 * std::f64::consts::PI * kappa
    };
    let i1 = integr(64);
    let i2 = integr(128);
    let rel = (i2 - i1).abs() / i2.abs().max(1e-300);
    if rel > 1e-8 {
        return Err(Error::QuadratureFail { achieved: rel, requested: 1e-8 });
    }
    let diagnostics = QuadratureDiagnostics {
        integrability_value: i2,
        integrability_rel_change: rel,
        radial_cut: rcut,
    };

    let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
    if symbol.radial {
        // Diagonal fast path: lambda_alpha from a 1-D radial integral with
        // the basis normalization assembled in the log domain.
        for alpha in 0..dim {
            let lc2 = 2.0 * space.basis_log_coeff(alpha);
            let g = |r: f64| -> f64 {
                if r <= 0.0 {
                    return 0.0;
                }
                let logw = lc2 + (2.0 * alpha as f64 + 1.0) * r.ln() - 2.0 * space.phi(Complex64::new(r, 0.0));
                if logw < -720.0 {
                    return 0.0;
                }
                symbol.radial_g(r) * logw.exp()
            };
            let hi = if matches!(space.kind, SpaceKind::Disc) { 1.0 } else { rcut };
            let atol = 1e-16 * (1.0 + symbol.sup_bound);
            let v = crate::quad::integrate_adaptive(&g, 0.0, hi, 1e-12, atol, 24)?;
            matrix[alpha + alpha * dim] = Complex64::new(2.0 * std::f64::consts::PI * kappa * v, 0.0);
        }
    } else {
        // Polar tensor rule: exact trapezoid in angle, adaptive panels in r.
        let m_theta = 4 * dim;
        let build_with_panels = |panels: usize| -> Vec<Complex64> {
            let (gx, gw) = crate::quad::gauss_legendre(24);
            let hi = if matches!(space.kind, SpaceKind::Disc) { 1.0 - 1e-9 } else { rcut };
            let h = hi / panels as f64;
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            // Angular Fourier transform of f at each radius: t_m(r) =
            // (1/M) sum_theta f(r e^{i theta}) e^{-i m theta}; then
            // T[j,k] += weight * b_j b_k t_{j-k}(r).
            for panel in 0..panels {
                let lo = panel as f64 * h;
                for (xi, wi) in gx.iter().zip(&gw) {
                    let r = lo + 0.5 * h * (xi + 1.0);
                    let wr = 0.5 * h * wi * r * 2.0 * std::f64::consts::PI * kappa;
                    // f on the angular grid
                    let fvals: Vec<f64> = (0..m_theta)
                        .map(|a| {
                            let th = 2.0 * std::f64::consts::PI * a as f64 / m_theta as f64;
                            symbol.value(Complex64::from_polar(r, th))
                        })
                        .collect();
                    // angular modes needed: |m| <= n
                    let mut modes = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
                    for (im, mode) in modes.iter_mut().enumerate() {
                        let m = im as i64 - n as i64;
                        let mut s = Complex64::new(0.0, 0.0);
                        for (a, fv) in fvals.iter().enumerate() {
                            let th = 2.0 * std::f64::consts::PI * a as f64 / m_theta as f64;
                            s += fv * Complex64::from_polar(1.0, -(m as f64) * th);
                        }
                        *mode = s / m_theta as f64;
                    }
                    // radial basis magnitudes with weight split evenly
                    let phi = space.phi(Complex64::new(r, 0.0));
                    let b: Vec<f64> = (0..dim)
                        .map(|k| {
                            let lb = space.basis_log_coeff(k) + k as f64 * r.max(1e-300).ln() - phi;
                            if lb < -360.0 {
                                0.0
                            } else {
                                lb.exp()
                            }
                        })
                        .collect();
                    for j in 0..dim {
                        if b[j] == 0.0 {
                            continue;
                        }
                        for k in 0..dim {
                            if b[k] == 0.0 {
                                continue;
                            }
                            // angle integral of f e^{i(k-j)theta}
                            let mode = modes[(k as i64 - j as i64 + n as i64) as usize];
                            acc[k + j * dim] += wr * b[j] * b[k] * mode;
                        }
                    }
                }
            }
            acc
        };
        let mut panels = 16;
        let mut prev = build_with_panels(panels);
        loop {
            panels *= 2;
            let cur = build_with_panels(panels);
            let mut diff = 0.0;
            let mut norm = 0.0;
            for (a, b) in cur.iter().zip(&prev) {
                diff += (a - b).norm_sqr();
                norm += a.norm_sqr();
            }
            let rel = (diff / norm.max(1e-300)).sqrt();
            if rel <= 1e-10 {
                matrix = cur;
                break;
            }
            if panels >= 256 {
                return Err(Error::QuadratureFail { achieved: rel, requested: 1e-10 });
            }
            prev = cur;
        }
        // Hermitize against rounding.
        for j in 0..dim {
            for k in (j + 1)..dim {
                let avg = 0.5 * (matrix[k + j * dim] + matrix[j + k * dim].conj());
                matrix[k + j * dim] = avg;
                matrix[j + k * dim] = avg.conj();
            }
            matrix[j + j * dim] = Complex64::new(matrix[j + j * dim].re, 0.0);
        }
    }

    Ok(ToeplitzOperator {
        space: space.clone(),
        symbol: symbol.clone(),
        n_trunc: n,
        matrix,
        spectral: None,
        diagnostics,
    })
}

impl ToeplitzOperator {
    pub fn dim(&self) -> usize {
        self.n_trunc + 1
    }

    /// Hermiticity defect `max |T[j,k] - conj(T[k,j])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for j in 0..dim {
            for k in 0..dim {
                worst = worst.max((self.matrix[k + j * dim] - self.matrix[j + k * dim].conj()).norm());
            }
        }
        worst
    }

    /// Trace, Hilbert-Schmidt norm, and the truncation-free trace check
    /// `int f P dV` with the closed-form kernel.
    pub fn trace_and_hs(&self) -> Result<TraceHs> {
        let dim = self.dim();
        let trace: f64 = (0..dim).map(|j| self.matrix[j + j * dim].re).sum();
        let hs_norm = self.matrix.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let kappa = measure_density(&self.space);
        let angular = if self.symbol.radial { 1 } else { 128 };
        let f = |r: f64| -> f64 {
            let mut acc = 0.0;
            for a in 0..angular {
                let th = 2.0 * std::f64::consts::PI * a as f64 / angular as f64;
                acc += self.symbol.value(Complex64::from_polar(r, th));
            }
            let p = match self.space.kind {
                SpaceKind::Fock { level } => level as f64,
                SpaceKind::Disc => {
                    let s = r * r;
                    1.0 / (std::f64::consts::PI * (1.0 - s) * (1.0 - s))
                }
                SpaceKind::CustomSpan { .. } => {
                    self.space.kernel_frame_sum(Complex64::new(r, 0.0), self.n_trunc)
                }
            };
            acc / angular as f64 * p * r
        };
        let hi = match self.space.kind {
            SpaceKind::Disc => 1.0 - 1e-7,
            _ => self.diagnostics.radial_cut,
        };
        // Absolute floor tied to the |f| P mass: the signed integral may
        // vanish by symmetry while the integrand does not.
        let atol = 1e-12 * (1.0 + self.diagnostics.integrability_value.abs());
        let v = crate::quad::integrate_adaptive(&f, 0.0, hi, 1e-12, atol, 24)?;
        let independent_trace = 2.0 * std::f64::consts::PI * kappa * v;
        Ok(TraceHs { trace, hs_norm, independent_trace })
    }

    /// Full eigendecomposition (cyclic Jacobi). For nonnegative symbols,
    /// eigenvalues in `[-1e-10, 0)` are clamped to zero with a warning.
    pub fn spectrum(&mut self) -> Result<()> {
        let dim = self.dim();
        let HermitianEigen { mut values, vectors, .. } =
            linalg::jacobi_hermitian(&self.matrix, dim, 100)?;
        let mut clamped = 0usize;
        if self.symbol.nonnegative {
            for v in values.iter_mut() {
                if *v < 0.0 && *v >= -1e-10 {
                    *v = 0.0;
                    clamped += 1;
                }
            }
        }
        if clamped > 0 {
            eprintln!(
                "warning: clamped {clamped} tiny negative eigenvalues for nonnegative symbol {}",
                self.symbol.name
            );
        }
        self.spectral = Some(SpectralData { eigenvalues: values, eigenvectors: vectors, clamped });
        Ok(())
    }

    fn spectral_ref(&self) -> Result<&SpectralData> {
        self.spectral
            .as_ref()
            .ok_or_else(|| Error::Argument("spectrum not computed; call spectrum() first".into()))
    }

    /// Eigen-section frame values `\tilde S_j(z) = sum_k V[k,j] f_k(z)`.
    fn eigensection_values(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let sd = self.spectral_ref()?;
        let dim = self.dim();
        let basis = basis_values(&self.space, z, self.n_trunc);
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += sd.eigenvectors[k + j * dim] * basis[k];
            }
            *o = acc;
        }
        Ok(out)
    }

    /// On-diagonal squared kernel `T^2_f(z,z) = sum_j lambda_j^2 |S_j(z)|_h^2`.
    pub fn t2_diag(&self, z: Complex64) -> Result<f64> {
        Ok(self.t2_frame_sum(z)? * self.space.frame_weight(z))
    }

    /// Frame-coefficient sum `sum_j lambda_j^2 |\tilde S_j(z)|^2` (no weight).
    pub fn t2_frame_sum(&self, z: Complex64) -> Result<f64> {
        let sd = self.spectral_ref()?;
        let vals = self.eigensection_values(z)?;
        Ok(vals
            .iter()
            .zip(&sd.eigenvalues)
            .map(|(v, l)| l * l * v.norm_sqr())
            .sum())
    }

    /// Expected-zero Lebesgue density of the Wiener-randomized section:
    /// `(1/4 pi) Lap log (T^2 frame sum)`.
    ///
    /// The frame-weight and first-Chern contributions cancel exactly in this
    /// combination (tested on the `f = 1` case, where the density reduces to
    /// the Fubini-Study density of the model). Radial symbols use radial
    /// differencing so the density is exactly constant on circles; general
    /// symbols use the 5-point stencil.
    pub fn gamma_f_density(&self, z: Complex64, fd_step: f64) -> Result<f64> {
        let h = if fd_step > 0.0 { fd_step } else { 1e-3 };
        if self.symbol.radial {
            let r = z.norm();
            let u = |rr: f64| -> Result<f64> {
                let v = self.t2_frame_sum(Complex64::new(rr.abs(), 0.0))?;
                if v <= 0.0 {
                    return Err(Error::BaseLocusNear(format!("{z}")));
                }
                Ok(v.ln())
            };
            let lap = if r < h {
                4.0 * (u(h)? - u(0.0)?) / (h * h)
            } else {
                let (um, u0, up) = (u(r - h)?, u(r)?, u(r + h)?);
                (up - 2.0 * u0 + um) / (h * h) + (up - um) / (2.0 * h * r)
            };
            return Ok(lap / (4.0 * std::f64::consts::PI));
        }
        let stencil = [
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
        ];
        let mut vals = [0.0; 5];
        for (i, dz) in stencil.iter().enumerate() {
            let v = self.t2_frame_sum(z + dz)?;
            if v <= 0.0 {
                return Err(Error::BaseLocusNear(format!("{z}")));
            }
            vals[i] = v.ln();
        }
        let lap = (vals[1] + vals[2] + vals[3] + vals[4] - 4.0 * vals[0]) / (h * h);
        Ok(lap / (4.0 * std::f64::consts::PI))
    }

    /// Draws a Wiener-randomized section `sum_j eta_j lambda_j \tilde S_j`,
    /// returned as coefficients in the model basis.
    pub fn sample_wiener_section(&self, stream: &mut RngStream) -> Result<SectionSample> {
        let sd = self.spectral_ref()?;
        let dim = self.dim();
        let provenance = Provenance { seed: stream.master_seed(), stream: stream.stream_index() };
        let etas: Vec<Complex64> = (0..dim).map(|_| stream.complex_gaussian()).collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                acc += sd.eigenvectors[k + j * dim] * sd.eigenvalues[j] * etas[j];
            }
            *c = acc;
        }
        let radius = match self.space.kind {
            SpaceKind::Disc => 1.0,
            _ => self.diagnostics.radial_cut,
        };
        Ok(SectionSample {
            space: self.space.clone(),
            coefficients: coeffs,
            // The sample is exactly polynomial: zero tail by construction.
            certificate: TruncationCertificate { order: self.n_trunc, radius, tail_bound: 0.0 },
            provenance,
        })
    }

    /// Splits the spectrum at `eps_null` (default `1e-8 * lambda_max`) into a
    /// null cluster and its complement.
    pub fn kernel_split(&self, eps_null: Option<f64>) -> Result<KernelSplit<'_>> {
        let sd = self.spectral_ref()?;
        let lmax = sd.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let eps = eps_null.unwrap_or(1e-8 * lmax);
        let null_indices: Vec<usize> = (0..sd.eigenvalues.len())
            .filter(|&j| sd.eigenvalues[j].abs() <= eps)
            .collect();
        let max_below = null_indices
            .iter()
            .map(|&j| sd.eigenvalues[j].abs())
            .fold(0.0f64, f64::max);
        let min_above = sd
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .filter(|a| *a > eps)
            .fold(f64::INFINITY, f64::min);
        // Gap guard: the null cluster must be separated by a factor >= 10.
        let gap_ratio = if null_indices.is_empty() {
            min_above / eps
        } else if min_above.is_infinite() {
            f64::INFINITY
        } else {
            min_above / max_below.max(eps * 1e-6)
        };
        if gap_ratio < 10.0 {
            return Err(Error::SplitAmbiguous { gap_ratio, eps_null: eps });
        }
        Ok(KernelSplit { op: self, null_indices, eps_null: eps })
    }
}

/// Kernel split of a sign-changing symbol's operator: the null cluster,
/// the kernel-projection diagonal, and the combined zero density.
pub struct KernelSplit<'a> {
    op: &'a ToeplitzOperator,
    null_indices: Vec<usize>,
    pub eps_null: f64,
}

impl KernelSplit<'_> {
    /// Null rank `m(f)`.
    pub fn null_rank(&self) -> usize {
        self.null_indices.len()
    }

    /// `P_ker(z,z) = sum_{null j} |S_j(z)|_h^2` (metric diagonal).
    pub fn p_ker_diag(&self, z: Complex64) -> Result<f64> {
        Ok(self.p_ker_frame_sum(z)? * self.op.space.frame_weight(z))
    }

    fn p_ker_frame_sum(&self, z: Complex64) -> Result<f64> {
        let vals = self.op.eigensection_values(z)?;
        Ok(self.null_indices.iter().map(|&j| vals[j].norm_sqr()).sum())
    }

    /// Combined expected-zero density
    /// `(1/4 pi) Lap log (T^2 sum + P_ker sum)` in frame coefficients.
    pub fn combined_density(&self, z: Complex64, fd_step: f64) -> Result<f64> {
        let h = if fd_step > 0.0 { fd_step } else { 1e-3 };
        let u = |w: Complex64| -> Result<f64> {
            let v = self.op.t2_frame_sum(w)? + self.p_ker_frame_sum(w)?;
            if v <= 0.0 {
                return Err(Error::BaseLocusNear(format!("{w}")));
            }
            Ok(v.ln())
        };
        if self.op.symbol.radial {
            let r = z.norm();
            let ur = |rr: f64| u(Complex64::new(rr.abs(), 0.0));
            let lap = if r < h {
                4.0 * (ur(h)? - ur(0.0)?) / (h * h)
            } else {
                let (um, u0, up) = (ur(r - h)?, ur(r)?, ur(r + h)?);
                (up - 2.0 * u0 + um) / (h * h) + (up - um) / (2.0 * h * r)
            };
            return Ok(lap / (4.0 * std::f64::consts::PI));
        }
        let vals = [
            u(z)?,
            u(z + Complex64::new(h, 0.0))?,
            u(z - Complex64::new(h, 0.0))?,
            u(z + Complex64::new(0.0, h))?,
            u(z - Complex64::new(0.0, h))?,
        ];
        let lap = (vals[1] + vals[2] + vals[3] + vals[4] - 4.0 * vals[0]) / (h * h);
        Ok(lap / (4.0 * std::f64::consts::PI))
    }

    /// Pointwise sandwich `T^2 <= T^2 + P_ker <= max(||f||^2, 1) P` on a grid.
    pub fn sandwich_check(&self, points: &[Complex64]) -> Result<bool> {
        let bound = self.op.symbol.sup_bound * self.op.symbol.sup_bound;
        let cap = bound.max(1.0);
        for &z in points {
            let t2 = self.op.t2_diag(z)?;
            let combined = t2 + self.p_ker_diag(z)?;
            let p = self.op.space.kernel_diag(z, crate::model::KernelMode::ClosedForm)?;
            if !(t2 <= combined + 1e-12 && combined <= cap * p * (1.0 + 1e-9) + 1e-12) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Serializes an operator to the binary-free JSON schema (matrix row-major
/// as [re, im] pairs, spectral block, symbol metadata, diagnostics).
pub fn operator_to_json(op: &ToeplitzOperator) -> serde_json::Value {
    let dim = op.dim();
    serde_json::json!({
        "space": op.space,
        "symbol": {
            "name": op.symbol.name,
            "radial": op.symbol.radial,
            "nonnegative": op.symbol.nonnegative,
            "sup_bound": op.symbol.sup_bound,
            "support_radius": op.symbol.support_radius,
        },
        "truncation": op.n_trunc,
        "matrix": (0..dim).map(|j| {
            (0..dim).map(|k| {
                let v = op.matrix[k + j * dim];
                serde_json::json!([v.re, v.im])
            }).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "spectral": op.spectral.as_ref().map(|sd| serde_json::json!({
            "eigenvalues": sd.eigenvalues,
            "clamped": sd.clamped,
        })),
        "quadrature": op.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpace;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_symbol_diagonal_closed_form() {
        // lambda_alpha = 2^{-(alpha+1)} for f = e^{-|z|^2}, Fock p = 1.
        let sp = ModelSpace::fock(1).unwrap();
        let f = SymbolDescriptor::gaussian(1.0);
        let op = build_toeplitz(&sp, &f, 20).unwrap();
        for alpha in 0..=20usize {
            let want = 0.5f64.powi(alpha as i32 + 1);
            let got = op.matrix[alpha + alpha * 21].re;
            assert!((got - want).abs() < 1e-10, "alpha={alpha}: {got} vs {want}");
        }
        assert!(op.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn quadratic_symbol_diagonal_closed_form() {
        // lambda_{alpha,p} = (alpha+1) p^{alpha+1} / (p+1)^{alpha+2}.
        for p in [1u32, 5] {
            let sp = ModelSpace::fock(p).unwrap();
            let f = SymbolDescriptor::radial_poly_gaussian(1, 1.0);
            let op = build_toeplitz(&sp, &f, 30).unwrap();
            let pf = p as f64;
            for alpha in 0..=30usize {
                let a = alpha as f64;
                let want = (a + 1.0) * pf.powf(a + 1.0) / (pf + 1.0).powf(a + 2.0);
                let got = op.matrix[alpha + alpha * 31].re;
                assert!((got - want).abs() < 1e-10, "p={p} alpha={alpha}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn constant_symbol_is_identity() {
        let sp = ModelSpace::fock(1).unwrap();
        let f = SymbolDescriptor::constant(1.0);
        let op = build_toeplitz(&sp, &f, 12).unwrap();
        for j in 0..=12usize {
            for k in 0..=12usize {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((op.matrix[k + j * 13] - c(want, 0.0)).norm() < 1e-10, "{j},{k}");
            }
        }
    }

    #[test]
    fn trace_and_hs_identities() {
        let sp = ModelSpace::fock(1).unwrap();
        let f = SymbolDescriptor::gaussian(1.0);
        let n = 30usize;
        let op = build_toeplitz(&sp, &f, n).unwrap();
        let t = op.trace_and_hs().unwrap();
        let want_trace = 1.0 - 0.5f64.powi(n as i32 + 1);
        assert!((t.trace - want_trace).abs() < 1e-10);
        assert!((t.independent_trace - 1.0).abs() < 1e-10);
        let want_hs2 = (1.0 - 0.25f64.powi(n as i32 + 1)) / 3.0;
        assert!((t.hs_norm * t.hs_norm - want_hs2).abs() < 1e-10);
        // Zero symbol.
        let z = build_toeplitz(&sp, &SymbolDescriptor::constant(0.0), 8).unwrap();
        let tz = z.trace_and_hs().unwrap();
        assert_eq!(tz.trace, 0.0);
        assert_eq!(tz.hs_norm, 0.0);
        assert_eq!(tz.independent_trace, 0.0);
    }

    #[test]
    fn independent_trace_quadratic_symbol() {
        // int |z|^2 e^{-|z|^2} p dV = p.
        for p in [1u32, 4] {
            let sp = ModelSpace::fock(p).unwrap();
            let f = SymbolDescriptor::radial_poly_gaussian(1, 1.0);
            let op = build_toeplitz(&sp, &f, 40).unwrap();
            let t = op.trace_and_hs().unwrap();
            assert!((t.independent_trace - p as f64).abs() < 1e-9, "{}", t.independent_trace);
            // Truncated trace approaches p as N grows.
            assert!((t.trace - p as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn spectrum_diagonal_and_t2() {
        let sp = ModelSpace::fock(3).unwrap();
        let p = 3.0f64;
        let f = SymbolDescriptor::radial_poly_gaussian(1, 1.0);
        let mut op = build_toeplitz(&sp, &f, 25).unwrap();
        op.spectrum().unwrap();
        let sd = op.spectral.as_ref().unwrap();
        // Sorted descending; top eigenvalue is max over alpha.
        let lmax = (0..=25usize)
            .map(|a| (a as f64 + 1.0) * p.powi(a as i32 + 1) / (p + 1.0).powi(a as i32 + 2))
            .fold(0.0f64, f64::max);
        assert!((sd.eigenvalues[0] - lmax).abs() < 1e-11);
        // T^2(0,0) = p^3/(p+1)^4.
        let got = op.t2_diag(c(0.0, 0.0)).unwrap();
        assert!((got - p.powi(3) / (p + 1.0).powi(4)).abs() < 1e-11, "{got}");

        let g = SymbolDescriptor::gaussian(1.0);
        let mut opg = build_toeplitz(&sp, &g, 25).unwrap();
        opg.spectrum().unwrap();
        let got = opg.t2_diag(c(0.0, 0.0)).unwrap();
        assert!((got - p.powi(3) / (p + 1.0).powi(2)).abs() < 1e-10, "{got}");
    }

    #[test]
    fn t2_of_identity_is_truncated_kernel() {
        let sp = ModelSpace::fock(2).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::constant(1.0), 18).unwrap();
        op.spectrum().unwrap();
        for &z in &[c(0.0, 0.0), c(0.5, 0.2), c(1.0, -0.7)] {
            let t2 = op.t2_diag(z).unwrap();
            let kd = sp.kernel_diag(z, crate::model::KernelMode::Truncated(18)).unwrap();
            assert!((t2 - kd).abs() < 1e-9 * kd, "{t2} vs {kd}");
        }
    }

    #[test]
    fn gamma_density_constant_symbol_reduces_to_ek() {
        let sp = ModelSpace::fock(2).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::constant(1.0), 60).unwrap();
        op.spectrum().unwrap();
        for &z in &[c(0.0, 0.0), c(0.4, 0.3), c(0.9, 0.0)] {
            let d = op.gamma_f_density(z, 1e-3).unwrap();
            assert!((d - 2.0 / std::f64::consts::PI).abs() < 1e-5, "{d}");
        }
    }

    #[test]
    fn gamma_density_rotationally_invariant_for_radial_symbols() {
        let sp = ModelSpace::fock(1).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::gaussian(1.0), 24).unwrap();
        op.spectrum().unwrap();
        let r = 0.8;
        let base = op.gamma_f_density(c(r, 0.0), 1e-3).unwrap();
        for k in 1..8 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 8.0 + 0.1;
            let d = op.gamma_f_density(Complex64::from_polar(r, th), 1e-3).unwrap();
            assert!((d - base).abs() < 1e-8, "{d} vs {base}");
        }
    }

    #[test]
    fn wiener_sampler_law() {
        // Covariance of the model-basis coefficients is T^2 (diagonal here):
        // E |c_j|^2 = lambda_j^2; cross moments vanish.
        let sp = ModelSpace::fock(1).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::gaussian(1.0), 12).unwrap();
        op.spectrum().unwrap();
        let trials = 40_000u64;
        let dim = op.dim();
        let mut second = vec![0.0f64; dim];
        let mut cross = Complex64::new(0.0, 0.0);
        for i in 0..trials {
            let mut st = RngStream::new(21, i);
            let s = op.sample_wiener_section(&mut st).unwrap();
            for (j, cj) in s.coefficients.iter().enumerate() {
                second[j] += cj.norm_sqr();
            }
            cross += s.coefficients[0] * s.coefficients[1].conj();
        }
        for (j, tot) in second.iter().enumerate().take(6) {
            let want = 0.25f64.powi(j as i32 + 1);
            let got = tot / trials as f64;
            let se = want / (trials as f64).sqrt();
            assert!((got - want).abs() < 4.0 * se, "j={j}: {got} vs {want}");
        }
        assert!((cross / trials as f64).norm() < 4.0 * 0.125 / (trials as f64).sqrt());
    }

    #[test]
    fn wiener_l2_mass_sane() {
        // sum lambda_j^2 |eta_j|^2 stays below 10 * hs^2 across seeded draws.
        let sp = ModelSpace::fock(1).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::gaussian(1.0), 20).unwrap();
        op.spectrum().unwrap();
        let hs2 = {
            let t = op.trace_and_hs().unwrap();
            t.hs_norm * t.hs_norm
        };
        for i in 0..1000u64 {
            let mut st = RngStream::new(4, i);
            let s = op.sample_wiener_section(&mut st).unwrap();
            let mass: f64 = s.coefficients.iter().map(|c| c.norm_sqr()).sum();
            assert!(mass <= 10.0 * hs2, "trial {i}: {mass} vs {hs2}");
        }
    }

    #[test]
    fn kernel_split_nonnegative_symbol_has_empty_kernel() {
        let sp = ModelSpace::fock(1).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::gaussian(1.0), 20).unwrap();
        op.spectrum().unwrap();
        let split = op.kernel_split(None).unwrap();
        assert_eq!(split.null_rank(), 0);
        let grid: Vec<Complex64> = (0..12).map(|i| c(0.15 * i as f64, 0.05 * i as f64)).collect();
        assert!(split.sandwich_check(&grid).unwrap());
    }

    #[test]
    fn kernel_split_odd_symbol() {
        // f = Re(z) e^{-|z|^2} on Fock p=1: signed spectrum with zero trace;
        // odd dimension forces one exactly-null eigenvalue.
        let sp = ModelSpace::fock(1).unwrap();
        let f = SymbolDescriptor::re_z_gaussian();
        let mut op = build_toeplitz(&sp, &f, 14).unwrap(); // dim 15, odd
        op.spectrum().unwrap();
        let t = op.trace_and_hs().unwrap();
        assert!(t.trace.abs() < 1e-10, "{}", t.trace);
        assert!(t.independent_trace.abs() < 1e-10);
        let sd = op.spectral.as_ref().unwrap();
        assert!(sd.eigenvalues.iter().any(|l| *l < -1e-4));
        let split = op.kernel_split(None).unwrap();
        assert_eq!(split.null_rank() % 2, 1);
        assert!(split.p_ker_diag(c(0.3, 0.2)).unwrap() >= 0.0);
        let grid: Vec<Complex64> = (0..10).map(|i| c(0.2 * i as f64 - 1.0, 0.1)).collect();
        assert!(split.sandwich_check(&grid).unwrap());
    }

    #[test]
    fn kernel_split_combined_density_identity_symbol() {
        let sp = ModelSpace::fock(1).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::constant(1.0), 50).unwrap();
        op.spectrum().unwrap();
        let split = op.kernel_split(None).unwrap();
        assert_eq!(split.null_rank(), 0);
        let d = split.combined_density(c(0.3, -0.2), 1e-3).unwrap();
        assert!((d - 1.0 / std::f64::consts::PI).abs() < 1e-5);
    }

    #[test]
    fn kernel_split_ambiguous_without_gap() {
        // Geometric spectrum 2^{-k} has no factor-10 gap at the default
        // threshold once N is large enough for lambda_min < eps_null.
        let sp = ModelSpace::fock(1).unwrap();
        let mut op = build_toeplitz(&sp, &SymbolDescriptor::gaussian(1.0), 40).unwrap();
        op.spectrum().unwrap();
        assert!(matches!(op.kernel_split(None), Err(Error::SplitAmbiguous { .. })));
    }

    #[test]
    fn eigenvalue_truncation_stability() {
        // lambda_j(N) moves by <= 1e-8 for j <= N/2 as N grows.
        let sp = ModelSpace::fock(1).unwrap();
        let f = SymbolDescriptor::gaussian(1.0);
        let mut small = build_toeplitz(&sp, &f, 16).unwrap();
        let mut large = build_toeplitz(&sp, &f, 32).unwrap();
        small.spectrum().unwrap();
        large.spectrum().unwrap();
        let a = &small.spectral.as_ref().unwrap().eigenvalues;
        let b = &large.spectral.as_ref().unwrap().eigenvalues;
        for j in 0..=8 {
            assert!((a[j] - b[j]).abs() <= 1e-8, "j={j}");
        }
    }

    #[test]
    fn general_path_matches_radial_path() {
        // Build the Gaussian symbol through the tensor quadrature (radial
        // flag off) and compare with the diagonal fast path.
        let sp = ModelSpace::fock(1).unwrap();
        let f = SymbolDescriptor::from_fn("gauss-generic", false, true, 1.0, 6.5, |z| {
            (-z.norm_sqr()).exp()
        });
        let op = build_toeplitz(&sp, &f, 10).unwrap();
        for alpha in 0..=10usize {
            let want = 0.5f64.powi(alpha as i32 + 1);
            let got = op.matrix[alpha + alpha * 11].re;
            assert!((got - want).abs() < 1e-9, "alpha={alpha}: {got}");
        }
        // Off-diagonal entries vanish for radial symbols.
        for j in 0..=10usize {
            for k in 0..=10usize {
                if j != k {
                    assert!(op.matrix[k + j * 11].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn fd_derivative_oracles_match_analytic() {
        let exact = SymbolDescriptor::gaussian(1.0);
        let fd = SymbolDescriptor::from_fn("gauss-fd", true, true, 1.0, 6.5, |z| {
            (-z.norm_sqr()).exp()
        });
        for &z in &[c(0.0, 0.0), c(0.3, -0.2), c(0.7, 0.4)] {
            let a = exact.derivatives(z);
            let b = fd.derivatives(z);
            assert!((a.f - b.f).abs() < 1e-12);
            assert!((a.fz - b.fz).norm() < 1e-8, "fz {z}");
            assert!((a.fzz - b.fzz).norm() < 1e-7, "fzz {z}");
            assert!((a.lap - b.lap).abs() < 1e-7, "lap {z}");
            assert!((a.dz_lap - b.dz_lap).norm() < 1e-4, "dz_lap {z}: {:?} vs {:?}", a.dz_lap, b.dz_lap);
            assert!((a.lap2 - b.lap2).abs() < 1e-3, "lap2 {z}: {} vs {}", a.lap2, b.lap2);
        }
    }
}
