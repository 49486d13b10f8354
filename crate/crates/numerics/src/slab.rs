//! Beltrami fields on the slab `T² × [−L, 0]` with a metric that depends only
//! on the normal coordinate.
//!
//! The boundary face is `xⁿ = 0` and the field is sought on `xⁿ ∈ [−L, 0]`,
//! the side towards which the symbol pipeline's solutions decay. A single
//! Fourier mode `u = U(xⁿ) e^{iξ·x′}` reduces `curl u = λu` to a 2×2 linear
//! ODE for the tangential components `(U₁, U₂)`, with the normal component
//! given algebraically by `U₃ = i(ξ₁U₂ − ξ₂U₁)/(λ√|g|)`. The fundamental
//! matrix is integrated from the far face to the boundary and the boundary
//! conditions `U₃(0) = 1`, `U₃(−L) = 0` select the solution. At `λ = 0` the
//! field is the gradient of the solution of the corresponding Neumann
//! problem.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use beltrami_core::jets::{Jet3, MetricJet};
use beltrami_core::nt_map::{NTSymbol, NtMode};
use beltrami_core::Scalar;

use crate::error::{NumericsError, Result};
use crate::fit::{fit_loglog, LogLogFit};
use crate::ode::{integrate, OdeOptions, OdeStats};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Condition number above which the boundary system is declared singular.
pub const SINGULAR_CONDITION: f64 = 1e10;

/// Closed-form tangential metric profiles `g_αβ(xⁿ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Profile {
    /// `δ_αβ`.
    Euclidean,
    /// `(1 + a xⁿ)² δ_αβ`.
    Conformal { a: f64 },
    /// `g₁₁ = g₂₂ = 1`, `g₁₂ = s xⁿ`.
    Sheared { s: f64 },
    /// Polynomial coefficients in `xⁿ` of `g₁₁`, `g₁₂`, `g₂₂`.
    Polynomial {
        g11: Vec<f64>,
        g12: Vec<f64>,
        g22: Vec<f64>,
    },
}

/// Metric data at one height.
#[derive(Clone, Copy, Debug)]
struct Local {
    g: [[f64; 2]; 2],
    g_inv: [[f64; 2]; 2],
    sqrt_det: f64,
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

impl Profile {
    /// Polynomial coefficients in `xⁿ` of `[g₁₁, g₁₂, g₂₂]`.
    pub fn coefficients(&self) -> [Vec<f64>; 3] {
        match self {
            Profile::Euclidean => [vec![1.0], vec![0.0], vec![1.0]],
            Profile::Conformal { a } => {
                let c = vec![1.0, 2.0 * a, a * a];
                [c.clone(), vec![0.0], c]
            }
            Profile::Sheared { s } => [vec![1.0], vec![0.0, *s], vec![1.0]],
            Profile::Polynomial { g11, g12, g22 } => [g11.clone(), g12.clone(), g22.clone()],
        }
    }

    /// `g_αβ(xⁿ)`.
    pub fn metric(&self, xn: f64) -> [[f64; 2]; 2] {
        let [a, b, c] = self.coefficients().map(|p| horner(&p, xn));
        [[a, b], [b, c]]
    }

    fn local(&self, xn: f64) -> Result<Local> {
        let g = self.metric(xn);
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if !(g[0][0] > 0.0 && det > 0.0) {
            return Err(NumericsError::NotPositiveDefinite { at: xn });
        }
        let g_inv = [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ];
        Ok(Local {
            g,
            g_inv,
            sqrt_det: det.sqrt(),
        })
    }

    /// Taylor jet of the slab metric at the origin, for the symbol pipeline.
    pub fn metric_jet(&self, order: usize) -> Result<MetricJet<f64>> {
        let jet = |c: &[f64]| {
            Jet3::from_terms(
                order,
                c.iter()
                    .enumerate()
                    .filter(|(k, _)| *k <= order)
                    .map(|(k, v)| ([0, 0, k], *v)),
            )
        };
        let [a, b, c] = self.coefficients();
        Ok(MetricJet::from_tangential(jet(&a), jet(&b), jet(&c))?)
    }
}

/// Slab problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabConfig {
    pub profile: Profile,
    /// Thickness `L`.
    pub thickness: f64,
    pub lambda: f64,
    /// Fourier modes `ξ`; all nonzero.
    pub modes: Vec<[f64; 2]>,
    /// Number of uniform sample intervals on `[−L, 0]`.
    pub ode_steps: usize,
    pub mode: NtMode,
}

impl SlabConfig {
    /// Euclidean slab of thickness 1 with 2000 sample intervals.
    pub fn euclidean(lambda: f64, modes: Vec<[f64; 2]>) -> Self {
        Self {
            profile: Profile::Euclidean,
            thickness: 1.0,
            lambda,
            modes,
            ode_steps: 2000,
            mode: NtMode::for_lambda(&lambda),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NumericsError::InvalidConfig(m.into()));
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return bad("thickness must be positive");
        }
        if self.ode_steps < 8 {
            return bad("ode_steps must be at least 8");
        }
        if !self.lambda.is_finite() {
            return bad("λ must be finite");
        }
        match self.mode {
            NtMode::Beltrami if self.lambda == 0.0 => return bad("beltrami mode needs λ ≠ 0"),
            NtMode::Harmonic if self.lambda != 0.0 => return bad("harmonic mode needs λ = 0"),
            _ => {}
        }
        if self.modes.iter().any(|xi| xi[0] == 0.0 && xi[1] == 0.0) {
            return bad("the zero mode is excluded");
        }
        for j in 0..=self.ode_steps {
            self.profile.local(self.node(j))?;
        }
        Ok(())
    }

    fn spacing(&self) -> f64 {
        self.thickness / self.ode_steps as f64
    }

    /// Height of sample `j`; `j = 0` is the boundary face.
    pub fn node(&self, j: usize) -> f64 {
        -(j as f64) * self.spacing()
    }
}

/// One solved Fourier mode, sampled at heights `xn[j] = −jL/steps`.
#[derive(Clone, Debug)]
pub struct SlabModeSolution {
    pub xi: [f64; 2],
    pub mode: NtMode,
    pub xn: Vec<f64>,
    /// Covariant `(U₁, U₂)` at each sample.
    pub u_t_profile: Vec<[Complex64; 2]>,
    /// `U₃` at each sample.
    pub u_n_profile: Vec<Complex64>,
    /// Tangential trace at the boundary face.
    pub nt_value: [Complex64; 2],
    /// Condition number of the row-normalized 2×2 boundary system.
    pub condition: f64,
    pub ode: OdeStats,
}

fn xi_norm2(l: &Local, xi: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            s += l.g_inv[a][b] * xi[a] * xi[b];
        }
    }
    s
}

/// Right-hand side for one column `(U₁, U₂)`.
fn beltrami_rhs(l: &Local, lambda: f64, xi: [f64; 2], u: [Complex64; 2]) -> [Complex64; 2] {
    let u3 = normal_component(l, lambda, xi, u);
    std::array::from_fn(|c| {
        (u[1] * l.g[0][c] - u[0] * l.g[1][c]) * (lambda / l.sqrt_det) + I * xi[c] * u3
    })
}

fn normal_component(l: &Local, lambda: f64, xi: [f64; 2], u: [Complex64; 2]) -> Complex64 {
    I * (u[1] * xi[0] - u[0] * xi[1]) / (lambda * l.sqrt_det)
}

/// Right-hand side for one column `(Φ, √|g| Φ′)`.
fn harmonic_rhs(l: &Local, xi: [f64; 2], y: [Complex64; 2]) -> [Complex64; 2] {
    [y[1] / l.sqrt_det, y[0] * (l.sqrt_det * xi_norm2(l, xi))]
}

/// Singular values of a 2×2 complex matrix, largest first.
fn singular_values(m: [[Complex64; 2]; 2]) -> (f64, f64) {
    let fro2: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((fro2 + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smax, smin)
}

struct Fundamental {
    /// Scaled fundamental matrix at each node (columns are solutions).
    y: Vec<[[Complex64; 2]; 2]>,
    /// `ln` of the scale removed at each node.
    log_scale: Vec<f64>,
    stats: OdeStats,
}

fn fundamental(c: &SlabConfig, xi: [f64; 2]) -> Result<Fundamental> {
    let n = c.ode_steps;
    let opts = OdeOptions::default();
    let rate = (xi[0].hypot(xi[1]) + c.lambda.abs() + 1.0).recip();
    let profile = &c.profile;
    let lambda = c.lambda;
    let harmonic = c.mode == NtMode::Harmonic;
    let rhs = |x: f64, y: &[Complex64; 4]| -> [Complex64; 4] {
        let l = profile
            .local(x)
            .expect("profile validated on the sample grid");
        let step = |u: [Complex64; 2]| {
            if harmonic {
                harmonic_rhs(&l, xi, u)
            } else {
                beltrami_rhs(&l, lambda, xi, u)
            }
        };
        let a = step([y[0], y[1]]);
        let b = step([y[2], y[3]]);
        [a[0], a[1], b[0], b[1]]
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut y = vec![[[zero; 2]; 2]; n + 1];
    let mut log_scale = vec![0.0; n + 1];
    let mut state = [one, zero, zero, one];
    let mut acc = 0.0;
    let mut stats = OdeStats::default();
    let pack = |s: &[Complex64; 4]| [[s[0], s[2]], [s[1], s[3]]];
    y[n] = pack(&state);
    let h0 = (0.05 * rate).min(c.spacing());
    for j in (0..n).rev() {
        let (next, st) = integrate(&rhs, c.node(j + 1), c.node(j), state, h0, &opts)?;
        stats.merge(&st);
        let size = next.iter().map(|z| z.norm()).fold(0.0, f64::max);
        state = next;
        if size > 1e50 {
            for z in state.iter_mut() {
                *z /= size;
            }
            acc += size.ln();
        }
        y[j] = pack(&state);
        log_scale[j] = acc;
    }
    Ok(Fundamental {
        y,
        log_scale,
        stats,
    })
}

fn boundary_row(c: &SlabConfig, l: &Local, xi: [f64; 2]) -> [Complex64; 2] {
    if c.mode == NtMode::Harmonic {
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0 / l.sqrt_det, 0.0),
        ]
    } else {
        let k = I / (c.lambda * l.sqrt_det);
        [k * -xi[1], k * xi[0]]
    }
}

fn normalize(r: [Complex64; 2]) -> [Complex64; 2] {
    let n = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
    [r[0] / n, r[1] / n]
}

struct BoundarySystem {
    fun: Fundamental,
    coeffs: [Complex64; 2],
    condition: f64,
}

fn boundary_system(c: &SlabConfig, xi: [f64; 2]) -> Result<BoundarySystem> {
    let fun = fundamental(c, xi)?;
    let top = c.profile.local(0.0)?;
    let bottom = c.profile.local(-c.thickness)?;
    let r0 = boundary_row(c, &top, xi);
    let y0 = fun.y[0];
    let a0 = [
        r0[0] * y0[0][0] + r0[1] * y0[1][0],
        r0[0] * y0[0][1] + r0[1] * y0[1][1],
    ];
    let a_l = boundary_row(c, &bottom, xi);
    let (s_max, s_min) = singular_values([normalize(a0), normalize(a_l)]);
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    let det = a0[0] * a_l[1] - a0[1] * a_l[0];
    let coeffs = [a_l[1] / det, -a_l[0] / det];
    Ok(BoundarySystem {
        fun,
        coeffs,
        condition,
    })
}

/// Solves one Fourier mode of the slab problem.
pub fn solve_mode(c: &SlabConfig, xi: [f64; 2]) -> Result<SlabModeSolution> {
    c.validate()?;
    if xi == [0.0, 0.0] {
        return Err(NumericsError::InvalidConfig(
            "the zero mode is excluded".into(),
        ));
    }
    let sys = boundary_system(c, xi)?;
    if !(sys.condition < SINGULAR_CONDITION) {
        return Err(NumericsError::BeltramiSingular {
            lambda: c.lambda,
            xi,
            condition: sys.condition,
        });
    }
    let n = c.ode_steps;
    let mut xn = Vec::with_capacity(n + 1);
    let mut u_t = Vec::with_capacity(n + 1);
    let mut u_n = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let x = c.node(j);
        let l = c.profile.local(x)?;
        let y = sys.fun.y[j];
        let w = (sys.fun.log_scale[j] - sys.fun.log_scale[0]).exp();
        let v: [Complex64; 2] =
            std::array::from_fn(|r| (y[r][0] * sys.coeffs[0] + y[r][1] * sys.coeffs[1]) * w);
        xn.push(x);
        if c.mode == NtMode::Harmonic {
            u_t.push([I * xi[0] * v[0], I * xi[1] * v[0]]);
            u_n.push(v[1] / l.sqrt_det);
        } else {
            u_t.push(v);
            u_n.push(normal_component(&l, c.lambda, xi, v));
        }
    }
    Ok(SlabModeSolution {
        xi,
        mode: c.mode,
        xn,
        nt_value: u_t[0],
        u_t_profile: u_t,
        u_n_profile: u_n,
        condition: sys.condition,
        ode: sys.fun.stats,
    })
}

/// The discrete normal-to-tangential map on the mode `e^{iξ·x′}`.
pub fn nt_mode(c: &SlabConfig, xi: [f64; 2]) -> Result<[Complex64; 2]> {
    Ok(solve_mode(c, xi)?.nt_value)
}

/// Solves every configured mode.
pub fn solve_modes(c: &SlabConfig) -> Vec<Result<SlabModeSolution>> {
    c.modes.par_iter().map(|xi| solve_mode(c, *xi)).collect()
}

/// Condition of the boundary system at one λ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub condition: f64,
    pub singular: bool,
}

/// Boundary-system conditioning over a list of frequencies for one mode.
pub fn lambda_sweep(c: &SlabConfig, xi: [f64; 2], lambdas: &[f64]) -> Result<Vec<SweepPoint>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let cfg = SlabConfig {
                lambda,
                mode: NtMode::for_lambda(&lambda),
                ..c.clone()
            };
            cfg.validate()?;
            let condition = boundary_system(&cfg, xi)?.condition;
            Ok(SweepPoint {
                lambda,
                condition,
                singular: !(condition < SINGULAR_CONDITION),
            })
        })
        .collect()
}

/// Relative finite-difference residuals of a reconstructed mode field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldResiduals {
    /// `curl u − λu`, relative to `max |λu|` (or `|ξ| max |u|` at `λ = 0`).
    pub curl: f64,
    /// `d*u`, relative to `|ξ| max |u|`.
    pub divergence: f64,
    /// `Δ_d u − λ²u`, relative to `(|ξ|² + λ²) max |u|`.
    pub hodge: f64,
}

type Field = Vec<[Complex64; 3]>;

/// Fourth-order difference along the sample index, as a derivative in `−xⁿ`.
fn d_index(v: &[Complex64], j: usize, h: f64) -> Complex64 {
    (v[j - 2] - v[j - 1] * 8.0 + v[j + 1] * 8.0 - v[j + 2]) / (12.0 * h)
}

/// Fourth-order difference of `e^{ikx}` with step `h`, divided by `e^{ikx}`.
fn d_mode(k: f64, h: f64) -> Complex64 {
    I * ((8.0 * (k * h).sin() - (2.0 * k * h).sin()) / (6.0 * h))
}

struct Grid<'a> {
    c: &'a SlabConfig,
    h: f64,
    dx: [Complex64; 2],
}

impl Grid<'_> {
    fn dn(&self, v: &[Complex64], j: usize) -> Complex64 {
        -d_index(v, j, self.h)
    }

    fn column(f: &Field, i: usize) -> Vec<Complex64> {
        f.iter().map(|v| v[i]).collect()
    }

    /// Curl at interior samples; entries outside `lo..hi` are zero.
    fn curl(&self, f: &Field, lo: usize, hi: usize) -> Result<Field> {
        let cols: Vec<Vec<Complex64>> = (0..3).map(|i| Self::column(f, i)).collect();
        let mut out = vec![[Complex64::new(0.0, 0.0); 3]; f.len()];
        for j in lo..hi {
            let l = self.c.profile.local(self.c.node(j))?;
            let v = f[j];
            let w = [
                self.dx[1] * v[2] - self.dn(&cols[1], j),
                self.dn(&cols[0], j) - self.dx[0] * v[2],
                self.dx[0] * v[1] - self.dx[1] * v[0],
            ];
            out[j] = [
                (w[0] * l.g[0][0] + w[1] * l.g[0][1]) / l.sqrt_det,
                (w[0] * l.g[1][0] + w[1] * l.g[1][1]) / l.sqrt_det,
                w[2] / l.sqrt_det,
            ];
        }
        Ok(out)
    }

    fn divergence(&self, f: &Field, lo: usize, hi: usize) -> Result<Vec<Complex64>> {
        let mut weighted = Vec::with_capacity(f.len());
        for (j, v) in f.iter().enumerate() {
            weighted.push(v[2] * self.c.profile.local(self.c.node(j))?.sqrt_det);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        for j in lo..hi {
            let l = self.c.profile.local(self.c.node(j))?;
            let mut s = self.dn(&weighted, j) / l.sqrt_det;
            for a in 0..2 {
                for b in 0..2 {
                    s += self.dx[a] * f[j][b] * l.g_inv[a][b];
                }
            }
            out[j] = s;
        }
        Ok(out)
    }

    fn gradient(&self, p: &[Complex64], lo: usize, hi: usize) -> Field {
        let mut out = vec![[Complex64::new(0.0, 0.0); 3]; p.len()];
        for j in lo..hi {
            out[j] = [self.dx[0] * p[j], self.dx[1] * p[j], self.dn(p, j)];
        }
        out
    }
}

/// Finite-difference residuals of `curl u = λu`, `d*u = 0` and
/// `Δ_d u = λ²u` for a solved mode, on the interior samples.
///
/// Tangential differences are taken with the same spacing as the normal
/// samples, applied to the Fourier factor.
pub fn field_residuals(c: &SlabConfig, sol: &SlabModeSolution) -> Result<FieldResiduals> {
    let n = sol.xn.len();
    if n < 13 {
        return Err(NumericsError::InvalidConfig(
            "too few samples for residuals".into(),
        ));
    }
    let h = c.spacing();
    let grid = Grid {
        c,
        h,
        dx: [d_mode(sol.xi[0], h), d_mode(sol.xi[1], h)],
    };
    let u: Field = sol
        .u_t_profile
        .iter()
        .zip(&sol.u_n_profile)
        .map(|(t, n)| [t[0], t[1], *n])
        .collect();
    let umax = u.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let k = sol.xi[0].hypot(sol.xi[1]);
    let lambda = c.lambda;
    let sup = |f: &[[Complex64; 3]],
               range: std::ops::Range<usize>,
               sub: &dyn Fn(usize) -> [Complex64; 3]| {
        range
            .map(|j| {
                (0..3)
                    .map(|i| (f[j][i] - sub(j)[i]).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };

    let curl = grid.curl(&u, 2, n - 2)?;
    let scale = if lambda != 0.0 {
        lambda.abs() * umax
    } else {
        k * umax
    };
    let curl_res = sup(&curl, 2..n - 2, &|j| u[j].map(|z| z * lambda)) / scale;

    let div = grid.divergence(&u, 2, n - 2)?;
    let div_res = div[2..n - 2].iter().map(|z| z.norm()).fold(0.0, f64::max) / (k * umax);

    let cc = grid.curl(&curl, 4, n - 4)?;
    let gd = grid.gradient(&div, 4, n - 4);
    let lap: Field = cc
        .iter()
        .zip(&gd)
        .map(|(a, b)| std::array::from_fn(|i| a[i] - b[i]))
        .collect();
    let hodge = sup(&lap, 4..n - 4, &|j| u[j].map(|z| z * (lambda * lambda)))
        / ((k * k + lambda * lambda) * umax);

    Ok(FieldResiduals {
        curl: curl_res,
        divergence: div_res,
        hodge,
    })
}

/// One point of a symbol decay fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub xi_norm: f64,
    /// `|nt_mode(ξ) − Σ_{m ≥ −M} σ_m(ξ)|`.
    pub error: f64,
}

/// Result of [`symbol_decay_fit`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Number of subprincipal terms `M` subtracted.
    pub terms: usize,
    pub points: Vec<DecayPoint>,
    pub fit: LogLogFit,
    /// `max |e(ξ)| |ξ|^{M+1}` over the points.
    pub scaled_bound: f64,
    /// `slope ≤ −(M + 1) + 0.2`.
    pub passes: bool,
}

/// Fits `log |nt_mode(ξ) − Σ_{m=−M}^{0} σ_m(ξ)|` against `log |ξ|`.
///
/// The modes must lie on one ray through the origin; σ is evaluated at
/// `x = 0`.
pub fn symbol_decay_fit<S: Scalar>(
    c: &SlabConfig,
    xis: &[[f64; 2]],
    sigma: &NTSymbol<S>,
    terms: usize,
) -> Result<DecayFit> {
    const NEEDED: usize = 6;
    if xis.len() < NEEDED {
        return Err(NumericsError::InsufficientModes {
            needed: NEEDED,
            got: xis.len(),
        });
    }
    let d = xis[0];
    let dn = d[0].hypot(d[1]);
    for xi in xis {
        let cross = (xi[0] * d[1] - xi[1] * d[0]).abs();
        let dot = xi[0] * d[0] + xi[1] * d[1];
        if cross > 1e-12 * dn * xi[0].hypot(xi[1]) || dot <= 0.0 {
            return Err(NumericsError::InvalidConfig(
                "decay-fit modes must share one direction".into(),
            ));
        }
    }
    let values: Vec<Result<[Complex64; 2]>> = xis.par_iter().map(|xi| nt_mode(c, *xi)).collect();
    let mut points = Vec::with_capacity(xis.len());
    for (xi, v) in xis.iter().zip(values) {
        let v = v?;
        let mut e = v;
        for m in 0..=terms as i32 {
            let s = sigma.sigma.eval_degree(-m, [0.0; 3], *xi)?;
            e[0] -= s[0];
            e[1] -= s[1];
        }
        points.push(DecayPoint {
            xi_norm: xi[0].hypot(xi[1]),
            error: e[0].norm().hypot(e[1].norm()),
        });
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.xi_norm, p.error)).collect();
    let fit = fit_loglog(&pairs).ok_or_else(|| {
        NumericsError::InvalidConfig(
            "decay data are degenerate (zero error or repeated |ξ|)".into(),
        )
    })?;
    let scaled_bound = points
        .iter()
        .map(|p| p.error * p.xi_norm.powi(terms as i32 + 1))
        .fold(0.0, f64::max);
    Ok(DecayFit {
        terms,
        passes: fit.slope <= -((terms + 1) as f64) + 0.2,
        points,
        fit,
        scaled_bound,
    })
}
