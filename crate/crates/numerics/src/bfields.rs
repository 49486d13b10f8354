//! Current loops and the Beltrami fields they generate in free space.
//!
//! A loop of radius `δ` about `center`, orthogonal to the unit vector `ω`,
//! defines the line current `J(A) = ∫ γ*A`. Its b-field is
//! `b = (curl + λ)(φ_λ * J)` with `φ_λ(r) = cos(λr)/(4πr)`, a real
//! fundamental solution of `−Δ − λ²`; since `J` is divergence-free,
//! `curl b − λb = J`. At `λ = 0` this is the Biot–Savart field of a unit
//! current. All integrals over the loop use the periodic trapezoid rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NumericsError, Result};
use crate::fit::{fit_loglog, LogLogFit};
use crate::ode::{integrate, OdeOptions};

pub type Vec3 = [f64; 3];

/// Agreement required between successive node doublings in [`bfield_eval`].
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Node count at which [`bfield_eval`] stops doubling.
pub const MAX_NODES: usize = 1 << 21;

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn axpy(a: Vec3, s: f64, b: Vec3) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Metric in which the loop is built.
#[derive(Clone)]
pub enum LoopMetric {
    Euclidean,
    /// `x ↦ g_ij(x)`; nodes are exponential-mapped from the center.
    Analytic(Arc<dyn Fn(Vec3) -> [[f64; 3]; 3] + Send + Sync>),
}

impl fmt::Debug for LoopMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopMetric::Euclidean => f.write_str("Euclidean"),
            LoopMetric::Analytic(_) => f.write_str("Analytic(..)"),
        }
    }
}

impl LoopMetric {
    fn at(&self, x: Vec3) -> [[f64; 3]; 3] {
        match self {
            LoopMetric::Euclidean => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            LoopMetric::Analytic(g) => g(x),
        }
    }

    fn inner(&self, x: Vec3, a: Vec3, b: Vec3) -> f64 {
        let g = self.at(x);
        (0..3)
            .map(|i| (0..3).map(|j| g[i][j] * a[i] * b[j]).sum::<f64>())
            .sum()
    }

    /// `Γ^k_ij(x)` from fourth-order differences of the metric.
    fn christoffel(&self, x: Vec3) -> [[[f64; 3]; 3]; 3] {
        let h = 1e-4;
        let dg: Vec<[[f64; 3]; 3]> = (0..3)
            .map(|l| {
                let at = |s: f64| {
                    let mut y = x;
                    y[l] += s * h;
                    self.at(y)
                };
                let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
                std::array::from_fn(|i| {
                    std::array::from_fn(|j| {
                        (m2[i][j] - 8.0 * m1[i][j] + 8.0 * p1[i][j] - p2[i][j]) / (12.0 * h)
                    })
                })
            })
            .collect();
        let g = self.at(x);
        let inv = DMatrix::from_fn(3, 3, |i, j| g[i][j])
            .try_inverse()
            .expect("metric callable must be invertible");
        std::array::from_fn(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    0.5 * (0..3)
                        .map(|l| inv[(k, l)] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]))
                        .sum::<f64>()
                })
            })
        })
    }

    /// `exp_p(v)` by integrating the geodesic equation for unit time.
    fn exp(&self, p: Vec3, v: Vec3) -> Result<Vec3> {
        let c = |x: f64| Complex64::new(x, 0.0);
        let rhs = |_t: f64, y: &[Complex64; 6]| -> [Complex64; 6] {
            let x = [y[0].re, y[1].re, y[2].re];
            let u = [y[3].re, y[4].re, y[5].re];
            let gam = self.christoffel(x);
            let acc: Vec3 = std::array::from_fn(|k| {
                -(0..3)
                    .map(|i| (0..3).map(|j| gam[k][i][j] * u[i] * u[j]).sum::<f64>())
                    .sum::<f64>()
            });
            [c(u[0]), c(u[1]), c(u[2]), c(acc[0]), c(acc[1]), c(acc[2])]
        };
        let y0 = [c(p[0]), c(p[1]), c(p[2]), c(v[0]), c(v[1]), c(v[2])];
        let opts = OdeOptions {
            tol: 1e-13,
            ..Default::default()
        };
        let (y, _) = integrate(&rhs, 0.0, 1.0, y0, 0.05, &opts)?;
        Ok([y[0].re, y[1].re, y[2].re])
    }
}

/// A sampled current loop `γ_{ω,δ}`.
#[derive(Clone, Debug)]
pub struct CurrentLoop {
    pub center: Vec3,
    pub omega: Vec3,
    pub delta: f64,
    /// `(e₁, e₂)` with `(e₁, e₂, ω)` positively oriented and orthonormal.
    pub frame: [Vec3; 2],
    pub metric: LoopMetric,
    /// `γ(t_k)` at `t_k = 2πk/N`.
    pub nodes: Vec<Vec3>,
    /// `γ′(t_k)`.
    pub tangents: Vec<Vec3>,
}

fn default_first_axis(omega: Vec3) -> Vec3 {
    let k = (0..3)
        .min_by(|&a, &b| omega[a].abs().total_cmp(&omega[b].abs()))
        .expect("three axes");
    let mut e = [0.0; 3];
    e[k] = 1.0;
    e
}

/// Builds a loop with the default frame.
pub fn make_loop(
    center: Vec3,
    omega: Vec3,
    delta: f64,
    n: usize,
    metric: LoopMetric,
) -> Result<CurrentLoop> {
    make_loop_with_axis(center, omega, delta, n, metric, default_first_axis(omega))
}

/// Builds a loop whose frame starts from the projection of `axis`
/// orthogonal to `ω`.
pub fn make_loop_with_axis(
    center: Vec3,
    omega: Vec3,
    delta: f64,
    n: usize,
    metric: LoopMetric,
    axis: Vec3,
) -> Result<CurrentLoop> {
    if !(delta > 0.0) {
        return Err(NumericsError::InvalidConfig(
            "loop radius must be positive".into(),
        ));
    }
    if n < 16 {
        return Err(NumericsError::InvalidConfig(
            "a loop needs at least 16 nodes".into(),
        ));
    }
    let len = metric.inner(center, omega, omega).sqrt();
    if (len - 1.0).abs() > 1e-9 {
        return Err(NumericsError::InvalidConfig(format!(
            "ω must be a unit vector, |ω| = {len}"
        )));
    }
    let ip = |a: Vec3, b: Vec3| metric.inner(center, a, b);
    let e1 = axpy(axis, -ip(axis, omega), omega);
    let l1 = ip(e1, e1).sqrt();
    if l1 < 1e-8 {
        return Err(NumericsError::InvalidConfig(
            "frame axis is parallel to ω".into(),
        ));
    }
    let e1 = e1.map(|v| v / l1);
    let e2 = match &metric {
        LoopMetric::Euclidean => cross(omega, e1),
        LoopMetric::Analytic(_) => {
            // Metric-orthonormal completion with (e₁, e₂, ω) positively oriented.
            let trial = cross(omega, e1);
            let t = axpy(axpy(trial, -ip(trial, omega), omega), -ip(trial, e1), e1);
            let lt = ip(t, t).sqrt();
            t.map(|v| v / lt)
        }
    };
    let mut lp = CurrentLoop {
        center,
        omega,
        delta,
        frame: [e1, e2],
        metric,
        nodes: Vec::new(),
        tangents: Vec::new(),
    };
    lp.sample(n)?;
    Ok(lp)
}

impl CurrentLoop {
    fn alpha(&self, t: f64) -> Vec3 {
        let [e1, e2] = self.frame;
        std::array::from_fn(|i| self.delta * (t.cos() * e1[i] + t.sin() * e2[i]))
    }

    fn point(&self, t: f64) -> Result<Vec3> {
        match &self.metric {
            LoopMetric::Euclidean => Ok(axpy(self.center, 1.0, self.alpha(t))),
            LoopMetric::Analytic(_) => self.metric.exp(self.center, self.alpha(t)),
        }
    }

    fn sample(&mut self, n: usize) -> Result<()> {
        let ts: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let [e1, e2] = self.frame;
        let sampled: Vec<Result<(Vec3, Vec3)>> = ts
            .par_iter()
            .map(|&t| match &self.metric {
                LoopMetric::Euclidean => {
                    let p = self.point(t)?;
                    let d =
                        std::array::from_fn(|i| self.delta * (-t.sin() * e1[i] + t.cos() * e2[i]));
                    Ok((p, d))
                }
                LoopMetric::Analytic(_) => {
                    let h = 1e-3;
                    let (m2, m1) = (self.point(t - 2.0 * h)?, self.point(t - h)?);
                    let (p1, p2) = (self.point(t + h)?, self.point(t + 2.0 * h)?);
                    let d = std::array::from_fn(|i| {
                        (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)
                    });
                    Ok((self.point(t)?, d))
                }
            })
            .collect();
        let (nodes, tangents) = sampled
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        self.nodes = nodes;
        self.tangents = tangents;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Trapezoid weight `2π/N`.
    pub fn weight(&self) -> f64 {
        2.0 * PI / self.n() as f64
    }

    /// The same loop with `n` nodes.
    pub fn resampled(&self, n: usize) -> Result<CurrentLoop> {
        let mut lp = self.clone();
        lp.sample(n)?;
        Ok(lp)
    }

    /// `|Σ wₖ γ′(tₖ)|`.
    pub fn closure_defect(&self) -> f64 {
        let mut s = [0.0; 3];
        for t in &self.tangents {
            s = axpy(s, self.weight(), *t);
        }
        norm(s)
    }

    /// Arc length between neighbouring nodes, approximately.
    pub fn spacing(&self) -> f64 {
        self.weight() * self.tangents.iter().map(|t| norm(*t)).fold(0.0, f64::max)
    }

    /// Euclidean distance from `x` to the loop; exact for Euclidean loops,
    /// the nearest node otherwise.
    pub fn distance(&self, x: Vec3) -> f64 {
        match self.metric {
            LoopMetric::Euclidean => {
                let r = sub(x, self.center);
                let z = dot(r, self.omega);
                let rho = norm(axpy(r, -z, self.omega));
                (rho - self.delta).hypot(z)
            }
            LoopMetric::Analytic(_) => self
                .nodes
                .iter()
                .map(|p| norm(sub(x, *p)))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// `∫ γ*A` by the trapezoid rule.
pub fn loop_functional(lp: &CurrentLoop, a: impl Fn(Vec3) -> Vec3) -> f64 {
    lp.nodes
        .iter()
        .zip(&lp.tangents)
        .map(|(p, t)| dot(a(*p), *t))
        .sum::<f64>()
        * lp.weight()
}

/// One evaluated b-field value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BFieldSample {
    pub x: Vec3,
    pub value: Vec3,
    pub dist_to_loop: f64,
    /// `x` lies within three node spacings of the input loop.
    pub near_singular: bool,
    /// Node count of the accepted quadrature.
    pub nodes_used: usize,
    /// Successive doublings agreed to the requested tolerance.
    pub converged: bool,
}

fn bfield_sum(lp: &CurrentLoop, lambda: f64, x: Vec3) -> Vec3 {
    let mut b = [0.0; 3];
    for (p, t) in lp.nodes.iter().zip(&lp.tangents) {
        let d = sub(x, *p);
        let r = norm(d);
        let (s, c) = (lambda * r).sin_cos();
        let phi = c / (4.0 * PI * r);
        // φ′(r)/r
        let dphi = -(lambda * r * s + c) / (4.0 * PI * r * r * r);
        b = axpy(b, dphi, cross(d, *t));
        b = axpy(b, lambda * phi, *t);
    }
    b.map(|v| v * lp.weight())
}

/// `b(x) = (curl + λ)(φ_λ * J)(x)`, doubling the node count until two
/// successive values agree to [`QUADRATURE_TOL`].
pub fn bfield_eval(lp: &CurrentLoop, lambda: f64, x: Vec3) -> Result<BFieldSample> {
    bfield_eval_with(lp, lambda, x, QUADRATURE_TOL)
}

/// [`bfield_eval`] with a caller-chosen relative agreement tolerance.
pub fn bfield_eval_with(lp: &CurrentLoop, lambda: f64, x: Vec3, tol: f64) -> Result<BFieldSample> {
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidConfig(
            "quadrature tolerance must be positive".into(),
        ));
    }
    let dist = lp.distance(x);
    let near_singular = dist < 3.0 * lp.spacing();
    let mut cur = lp.clone();
    let mut prev = bfield_sum(&cur, lambda, x);
    let mut converged = false;
    while cur.n() < MAX_NODES {
        cur = cur.resampled(2 * cur.n())?;
        let next = bfield_sum(&cur, lambda, x);
        let diff = norm(sub(next, prev));
        prev = next;
        if diff <= tol * norm(next).max(1e-300) {
            converged = true;
            break;
        }
    }
    Ok(BFieldSample {
        x,
        value: prev,
        dist_to_loop: dist,
        near_singular,
        nodes_used: cur.n(),
        converged,
    })
}

/// Straight approach towards the loop: `x(s) = target + s·direction`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproachPath {
    pub target: Vec3,
    pub direction: Vec3,
}

/// Result of [`asymptotic_fit`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticFit {
    /// `(distance to loop, |b|)` samples.
    pub points: Vec<(f64, f64)>,
    pub fit: LogLogFit,
    /// `|slope + 1| ≤ 0.05`.
    pub passes: bool,
}

/// Fits `log |b|` against `log d` along a path approaching the loop, with
/// path parameters spread geometrically over `[10⁻³δ, 10⁻¹δ]`.
pub fn asymptotic_fit(lp: &CurrentLoop, lambda: f64, path: ApproachPath) -> Result<AsymptoticFit> {
    const SAMPLES: usize = 12;
    let dir = norm(path.direction);
    if dir == 0.0 {
        return Err(NumericsError::InvalidConfig(
            "approach direction is zero".into(),
        ));
    }
    let unit = path.direction.map(|v| v / dir);
    let (lo, hi) = (1e-3 * lp.delta, 1e-1 * lp.delta);
    let xs: Vec<Vec3> = (0..SAMPLES)
        .map(|k| {
            let s = lo * (hi / lo).powf(k as f64 / (SAMPLES - 1) as f64);
            axpy(path.target, s, unit)
        })
        .collect();
    let dists: Vec<f64> = xs.iter().map(|x| lp.distance(*x)).collect();
    let closest = dists[0];
    if !(closest <= 2.0 * lo && dists[SAMPLES - 1] > 10.0 * closest) {
        return Err(NumericsError::NotApproaching { closest });
    }
    let samples: Vec<Result<BFieldSample>> =
        xs.par_iter().map(|x| bfield_eval(lp, lambda, *x)).collect();
    let mut points = Vec::with_capacity(SAMPLES);
    for s in samples {
        let s = s?;
        points.push((s.dist_to_loop, norm(s.value)));
    }
    let fit = fit_loglog(&points)
        .ok_or_else(|| NumericsError::InvalidConfig("degenerate approach samples".into()))?;
    Ok(AsymptoticFit {
        passes: (fit.slope + 1.0).abs() <= 0.05,
        points,
        fit,
    })
}

/// Curl and divergence of the b-field at `x` by fourth-order central
/// differences with step `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldCheck {
    /// `|curl b − λb| / |∇b|`.
    pub curl_residual: f64,
    /// `|div b| / |∇b|`.
    pub divergence_residual: f64,
}

pub fn field_check(lp: &CurrentLoop, lambda: f64, x: Vec3, h: f64) -> Result<FieldCheck> {
    let mut jac = [[0.0; 3]; 3];
    for k in 0..3 {
        let at = |s: f64| -> Result<Vec3> {
            let mut y = x;
            y[k] += s * h;
            Ok(bfield_eval(lp, lambda, y)?.value)
        };
        let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        for i in 0..3 {
            jac[i][k] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
        }
    }
    let b = bfield_eval(lp, lambda, x)?.value;
    let curl = [
        jac[2][1] - jac[1][2],
        jac[0][2] - jac[2][0],
        jac[1][0] - jac[0][1],
    ];
    let div = jac[0][0] + jac[1][1] + jac[2][2];
    let grad = jac.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    Ok(FieldCheck {
        curl_residual: norm(sub(curl, b.map(|v| v * lambda))) / grad.max(1e-300),
        divergence_residual: div.abs() / grad.max(1e-300),
    })
}

/// One point of the sphere bundle: a loop center and its axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BundlePoint {
    pub center: Vec3,
    pub theta: f64,
    pub phi: f64,
}

impl BundlePoint {
    pub fn omega(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    fn coords(&self) -> [f64; 5] {
        [
            self.center[0],
            self.center[1],
            self.center[2],
            self.theta,
            self.phi,
        ]
    }

    fn from_coords(c: [f64; 5]) -> Self {
        Self {
            center: [c[0], c[1], c[2]],
            theta: c[3],
            phi: c[4],
        }
    }
}

/// Tensor grid over the sphere bundle: every center with every `(θ, φ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub centers: Vec<Vec3>,
}

impl BundleGrid {
    /// Points in `(θ, φ, center)` order.
    pub fn points(&self) -> Vec<BundlePoint> {
        let mut out = Vec::new();
        for &theta in &self.thetas {
            for &phi in &self.phis {
                for &center in &self.centers {
                    out.push(BundlePoint { center, theta, phi });
                }
            }
        }
        out
    }

    /// Points whose `(θ, φ)` are interior to the angular grid.
    pub fn interior_points(&self) -> Vec<BundlePoint> {
        let mut out = Vec::new();
        for &theta in self
            .thetas
            .iter()
            .skip(1)
            .take(self.thetas.len().saturating_sub(2))
        {
            for &phi in self
                .phis
                .iter()
                .skip(1)
                .take(self.phis.len().saturating_sub(2))
            {
                for &center in &self.centers {
                    out.push(BundlePoint { center, theta, phi });
                }
            }
        }
        out
    }
}

/// Settings shared by every loop of an embedding probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeSettings {
    pub delta: f64,
    pub lambda: f64,
    pub nodes: usize,
    /// Step of the central differences in the five bundle coordinates.
    pub step: f64,
}

/// Injectivity and immersion proxies for `ω ↦ b_ω|_patch`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub grid_points: usize,
    pub patch_points: usize,
    /// Smallest `‖B[ω] − B[ω′]‖` over distinct grid points.
    pub min_pair_distance: f64,
    pub closest_pair: (usize, usize),
    /// Smallest singular value over all Jacobians.
    pub min_singular_value: f64,
    /// Smallest numerical rank over all Jacobians.
    pub min_rank: usize,
    pub jacobians: usize,
    /// Closest approach of a patch point to any loop.
    pub min_patch_distance: f64,
}

impl EmbeddingReport {
    pub fn passes(&self) -> bool {
        self.min_pair_distance > 0.0 && self.min_singular_value > 0.0 && self.min_rank == 5
    }
}

/// The sample vector `(b_ω(y₁), …, b_ω(y_m))`.
pub fn field_samples(p: &BundlePoint, patch: &[Vec3], s: &ProbeSettings) -> Result<Vec<f64>> {
    let lp = make_loop(p.center, p.omega(), s.delta, s.nodes, LoopMetric::Euclidean)?;
    let mut out = Vec::with_capacity(3 * patch.len());
    for y in patch {
        let d = lp.distance(*y);
        if d < 1e-6 * s.delta {
            return Err(NumericsError::PatchIntersectsLoop { distance: d });
        }
        out.extend(bfield_eval(&lp, s.lambda, *y)?.value);
    }
    Ok(out)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Builds the sample matrix over the grid and probes injectivity and the
/// rank of the central-difference Jacobians at interior grid points.
pub fn embedding_probe(
    grid: &BundleGrid,
    patch: &[Vec3],
    s: &ProbeSettings,
) -> Result<EmbeddingReport> {
    let points = grid.points();
    let mut min_patch_distance = f64::INFINITY;
    for p in &points {
        let lp = make_loop(p.center, p.omega(), s.delta, 16, LoopMetric::Euclidean)?;
        for y in patch {
            min_patch_distance = min_patch_distance.min(lp.distance(*y));
        }
    }
    let samples: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| field_samples(p, patch, s))
        .collect::<Result<_>>()?;
    let mut min_pair_distance = f64::INFINITY;
    let mut closest_pair = (0, 0);
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let d = distance(&samples[i], &samples[j]);
            if d < min_pair_distance {
                min_pair_distance = d;
                closest_pair = (i, j);
            }
        }
    }

    let interior = grid.interior_points();
    let spectra: Vec<Vec<f64>> = interior
        .par_iter()
        .map(|p| jacobian_singular_values(p, patch, s))
        .collect::<Result<_>>()?;
    let mut min_singular_value = f64::INFINITY;
    let mut min_rank = 5;
    for sv in &spectra {
        let top = sv.iter().cloned().fold(0.0, f64::max);
        let rank = sv.iter().filter(|v| **v > 1e-8 * top).count();
        min_rank = min_rank.min(rank);
        min_singular_value =
            min_singular_value.min(sv.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    if spectra.is_empty() {
        min_rank = 0;
        min_singular_value = 0.0;
    }
    Ok(EmbeddingReport {
        grid_points: points.len(),
        patch_points: patch.len(),
        min_pair_distance,
        closest_pair,
        min_singular_value,
        min_rank,
        jacobians: spectra.len(),
        min_patch_distance,
    })
}

/// Singular values of the Jacobian of the sample vector in the bundle
/// coordinates `(center, θ, φ)`.
pub fn jacobian_singular_values(
    p: &BundlePoint,
    patch: &[Vec3],
    s: &ProbeSettings,
) -> Result<Vec<f64>> {
    let base = p.coords();
    let mut cols = Vec::with_capacity(5);
    for k in 0..5 {
        let shifted = |sign: f64| {
            let mut c = base;
            c[k] += sign * s.step;
            field_samples(&BundlePoint::from_coords(c), patch, s)
        };
        let (plus, minus) = (shifted(1.0)?, shifted(-1.0)?);
        cols.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * s.step))
                .collect::<Vec<f64>>(),
        );
    }
    let rows = cols[0].len();
    let m = DMatrix::from_fn(rows, 5, |i, j| cols[j][i]);
    Ok(m.singular_values().iter().cloned().collect())
}

#[cfg(test)]
mod tests;
