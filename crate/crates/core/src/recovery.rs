//! Recovery of the boundary metric jet from the normal-to-tangential symbol.
//!
//! The boundary metric is read off the principal symbol `σ₀ = iξ/|ξ|_g`.
//! Normal derivatives are then recovered one order at a time: with every
//! normal derivative below order `k + 1` known, the degree `−k−1` component
//! of σ is affine in `∂ₙ^{k+1}g^{αβ}`. [`recover_jet`] probes the exact
//! forward map (metric jet → DN symbol → σ) at the zero guess and at unit
//! perturbations of each unknown Taylor coefficient, assembles that affine
//! system and solves it. [`recover_first_orders_explicit`] recovers the first
//! two orders independently through closed-form contractions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodge_dn::factorize_dn;
use crate::jets::{Jet3, MetricJet, MultiIndex, N};
use crate::nt_map::{nt_symbol, NTSymbol};
use crate::scalar::Scalar;
use crate::symbols::{jet_to_doc, Component, Entry, JetDoc, Key, SurdComplex, SymbolSeries};

/// Default probe directions `(1, 0)`, `(0, 1)` and `(3/5, 4/5)`.
pub fn default_directions<S: Scalar>() -> Vec<[S; 2]> {
    vec![
        [S::one(), S::zero()],
        [S::zero(), S::one()],
        [S::from_ratio(3, 5), S::from_ratio(4, 5)],
    ]
}

/// The principal symbol evaluated exactly at one rational covector.
#[derive(Clone, Debug)]
pub struct SigmaSample<S: Scalar> {
    pub xi: [S; 2],
    pub value: [SurdComplex<S>; 2],
}

/// Evaluates `σ₀` at each direction as a tangential jet.
pub fn sample_principal<S: Scalar>(
    sigma: &SymbolSeries<S>,
    directions: &[[S; 2]],
) -> Result<Vec<SigmaSample<S>>> {
    directions
        .iter()
        .map(|xi| {
            let v = sigma.eval_surd(0, xi.clone())?;
            let [a, b]: [SurdComplex<S>; 2] = v
                .try_into()
                .map_err(|_| Error::ShapeMismatch("σ must be a 2×1 symbol".into()))?;
            Ok(SigmaSample {
                xi: xi.clone(),
                value: [a, b],
            })
        })
        .collect()
}

fn tol_zero<S: Scalar>(x: &S, scale: f64) -> bool {
    if S::EXACT {
        x.is_zero()
    } else {
        x.abs_f64() <= 1e-12 * scale.max(1.0)
    }
}

/// `|ξ|²_g(x)` from one sample of `σ₀ = iξ/|ξ|_g`.
fn squared_norm<S: Scalar>(s: &SigmaSample<S>) -> Result<Jet3<S>> {
    let nu = if s.xi[0].abs_f64() >= s.xi[1].abs_f64() {
        0
    } else {
        1
    };
    let v = &s.value[nu];
    let stray = |j: &Jet3<S>| {
        if S::EXACT {
            !j.is_zero()
        } else {
            j.max_abs() > 1e-12
        }
    };
    if stray(&v.re.rational) || stray(&v.re.surd) || stray(&v.im.rational) {
        return Err(Error::Inconsistent(
            "principal symbol is not of the form iξ/|ξ|".into(),
        ));
    }
    // Im σ₀,ν = ξ_ν / |ξ| = s·√q₀, so |ξ|² = ξ_ν² / (q₀ s²).
    let surd = &v.im.surd;
    let denom = surd.mul(surd).scale(&v.im.q0);
    let xi2 = s.xi[nu].clone() * s.xi[nu].clone();
    Ok(denom.reciprocal()?.scale(&xi2))
}

fn det3<S: Scalar>(m: &[[S; 3]; 3]) -> S {
    let c = |i: usize, j: usize| m[i][j].clone();
    c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1))
        - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0))
}

fn inverse3<S: Scalar>(m: &[[S; 3]; 3], det: &S) -> [[S; 3]; 3] {
    let c = |i: usize, j: usize| m[i % 3][j % 3].clone();
    let mut out: [[S; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let cof = c(j + 1, i + 1) * c(j + 2, i + 2) - c(j + 1, i + 2) * c(j + 2, i + 1);
            *slot = cof / det.clone();
        }
    }
    out
}

/// Recovers `[g^{11}, g^{12}, g^{22}]` on the boundary, as tangential jets,
/// from samples of `σ₀` at three or more pairwise non-parallel directions.
///
/// Samples beyond the first non-degenerate triple are checked for
/// consistency.
pub fn recover_boundary_metric<S: Scalar>(samples: &[SigmaSample<S>]) -> Result<[Jet3<S>; 3]> {
    if samples.len() < 3 {
        return Err(Error::DegenerateDirections(format!(
            "{} direction(s) given, at least 3 needed",
            samples.len()
        )));
    }
    let row = |xi: &[S; 2]| {
        [
            xi[0].clone() * xi[0].clone(),
            S::from_int(2) * xi[0].clone() * xi[1].clone(),
            xi[1].clone() * xi[1].clone(),
        ]
    };
    let norms: Vec<Jet3<S>> = samples.iter().map(squared_norm).collect::<Result<_>>()?;
    let n = samples.len();
    let mut chosen = None;
    'search: for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [
                    row(&samples[i].xi),
                    row(&samples[j].xi),
                    row(&samples[k].xi),
                ];
                let scale: f64 = [i, j, k]
                    .iter()
                    .map(|&t| {
                        samples[t]
                            .xi
                            .iter()
                            .map(|x| x.to_f64().powi(2))
                            .sum::<f64>()
                    })
                    .product();
                let det = det3(&m);
                if !tol_zero(&det, scale) {
                    chosen = Some(([i, j, k], m, det));
                    break 'search;
                }
            }
        }
    }
    let Some((idx, m, det)) = chosen else {
        return Err(Error::DegenerateDirections(
            "all directions are pairwise parallel".into(),
        ));
    };
    let inv = inverse3(&m, &det);
    let order = norms.iter().map(Jet3::order).min().unwrap_or(0);
    let metric: [Jet3<S>; 3] = std::array::from_fn(|c| {
        let mut acc = Jet3::zero(order);
        for (t, &s) in idx.iter().enumerate() {
            acc.add_scaled(&inv[c][t], &norms[s].truncate(order));
        }
        acc
    });
    for (s, q) in samples.iter().zip(&norms) {
        let r = row(&s.xi);
        let mut predicted = Jet3::zero(order);
        for c in 0..3 {
            predicted.add_scaled(&r[c], &metric[c]);
        }
        if !predicted.close_to(&q.truncate(order), 1e-9) {
            return Err(Error::Inconsistent(
                "principal symbol samples do not come from one quadratic form".into(),
            ));
        }
    }
    if metric[0].constant_term().to_f64() <= 0.0
        || (metric[0].constant_term().clone() * metric[2].constant_term().clone()
            - metric[1].constant_term().clone() * metric[1].constant_term().clone())
        .to_f64()
            <= 0.0
    {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(metric)
}

/// Options for [`recover_jet_with`].
#[derive(Clone, Debug)]
pub struct RecoveryOptions {
    /// Highest normal derivative to recover.
    pub kmax: usize,
    /// Tangential depth `T`; `∂ₙᵏg` is recovered to tangential order `T − k`.
    /// Defaults to `kmax + 1`.
    pub tangential_order: Option<usize>,
    /// Seed for the random affinity probes.
    pub seed: u64,
}

impl RecoveryOptions {
    pub fn new(kmax: usize) -> Self {
        Self {
            kmax,
            tangential_order: None,
            seed: 0x5eed,
        }
    }

    fn depth(&self) -> usize {
        self.tangential_order.unwrap_or(self.kmax + 1)
    }
}

/// Diagnostics of one recovery stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// Order of the recovered normal derivative.
    pub normal_order: usize,
    /// Degree of σ used as data.
    pub degree: i32,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    /// Largest mismatch between the data and the forward map at the solution.
    pub residual: f64,
    /// Largest violation of `F(u₁) + F(u₂) = F(u₁ + u₂) + F(0)` on random probes.
    pub affinity_defect: f64,
    pub forward_runs: usize,
}

/// Recovered boundary jet of the inverse metric.
#[derive(Clone, Debug)]
pub struct RecoveredJet<S: Scalar> {
    pub lambda: S,
    /// Tangential depth `T`.
    pub tangential_order: usize,
    /// `[g^{11}, g^{12}, g^{22}]` at `xⁿ = 0`, to tangential order `T`.
    pub boundary_metric: [Jet3<S>; 3],
    /// Entry `k − 1` holds `∂ₙᵏ[g^{11}, g^{12}, g^{22}]` at `xⁿ = 0`, to
    /// tangential order `T − k`.
    pub normal_derivs: Vec<[Jet3<S>; 3]>,
    pub stages: Vec<StageReport>,
    /// `true` when the data carried more tangential depth than `T` used.
    pub depth_binding: bool,
}

/// JSON form of a [`RecoveredJet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredDoc {
    pub scalar: String,
    pub lambda: String,
    pub tangential_order: usize,
    /// `[g^{11}, g^{12}, g^{22}]` as tangential jets.
    pub boundary_metric: Vec<JetDoc>,
    /// `normal_derivs[k − 1]` is `∂ₙᵏ` of the same three entries.
    pub normal_derivs: Vec<Vec<JetDoc>>,
    pub stages: Vec<StageReport>,
    pub depth_binding: bool,
}

impl<S: Scalar> RecoveredJet<S> {
    /// `∂ₙᵏ[g^{11}, g^{12}, g^{22}]`, with `k = 0` the boundary metric.
    pub fn table(&self, k: usize) -> Option<&[Jet3<S>; 3]> {
        if k == 0 {
            Some(&self.boundary_metric)
        } else {
            self.normal_derivs.get(k - 1)
        }
    }

    /// The metric jet of order `T` with the recovered normal derivatives and
    /// every unrecovered one set to zero.
    pub fn metric_jet(&self) -> Result<MetricJet<S>> {
        let mut tables = vec![self.boundary_metric.clone()];
        tables.extend(self.normal_derivs.iter().cloned());
        lift_inverse(&tables, self.tangential_order)
    }

    pub fn to_doc(&self) -> RecoveredDoc {
        let table = |t: &[Jet3<S>; 3]| t.iter().map(jet_to_doc).collect();
        RecoveredDoc {
            scalar: S::MODE.to_string(),
            lambda: self.lambda.to_text(),
            tangential_order: self.tangential_order,
            boundary_metric: table(&self.boundary_metric),
            normal_derivs: self.normal_derivs.iter().map(table).collect(),
            stages: self.stages.clone(),
            depth_binding: self.depth_binding,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("reports serialize")
    }
}

/// `[g^{11}, g^{12}, g^{22}]` restricted to the boundary, at its own order.
pub fn boundary_table<S: Scalar>(m: &MetricJet<S>) -> [Jet3<S>; 3] {
    m.inverse_block().map(|j| j.restrict_boundary())
}

/// `∂ₙᵏ[g^{11}, g^{12}, g^{22}]` at the boundary, to tangential order
/// `order − k`.
pub fn normal_derivative_table<S: Scalar>(m: &MetricJet<S>, k: usize) -> Result<[Jet3<S>; 3]> {
    let mut t = m.inverse_block();
    for _ in 0..k {
        t = [
            t[0].derivative(N)?,
            t[1].derivative(N)?,
            t[2].derivative(N)?,
        ];
    }
    Ok(t.map(|j| j.restrict_boundary()))
}

/// Metric jet of order `order` whose inverse block is
/// `Σ_k (xⁿ)ᵏ/k! · tables[k](x′)`.
fn lift_inverse<S: Scalar>(tables: &[[Jet3<S>; 3]], order: usize) -> Result<MetricJet<S>> {
    let entries: Vec<Jet3<S>> = (0..3)
        .map(|c| {
            let mut terms: Vec<(MultiIndex, S)> = Vec::new();
            let mut fact = S::one();
            for (k, t) in tables.iter().enumerate() {
                if k > 0 {
                    fact = fact * S::from_int(k as i64);
                }
                for (e, v) in t[c].terms() {
                    if e[0] + e[1] + k <= order && !v.is_zero() {
                        terms.push(([e[0], e[1], k], v.clone() / fact.clone()));
                    }
                }
            }
            Jet3::from_terms(order, terms)
        })
        .collect();
    MetricJet::from_inverse(entries[0].clone(), entries[1].clone(), entries[2].clone())
}

/// Component of σ at `degree` for the metric with the given normal tables.
fn forward_component<S: Scalar>(
    tables: &[[Jet3<S>; 3]],
    order: usize,
    lambda: &S,
    degree: i32,
) -> Result<Component<S>> {
    let m = lift_inverse(tables, order)?;
    let b = factorize_dn(&m, lambda, degree + 1)?;
    let s = nt_symbol(&b, degree)?;
    Ok(s.sigma.component(degree).expect("computed degree").clone())
}

type Flat<S> = BTreeMap<(usize, Key, usize, usize), S>;

fn flatten<S: Scalar>(c: &Component<S>, order: usize) -> Flat<S> {
    let mut out = Flat::new();
    for (i, e) in c.entries.iter().enumerate() {
        for (k, j) in e {
            for (mi, v) in j.truncate(order).terms() {
                if !v.is_zero() {
                    out.insert((i, *k, mi[0], mi[1]), v.clone());
                }
            }
        }
    }
    out
}

fn flat_combine<S: Scalar>(terms: &[(&Flat<S>, S)]) -> Flat<S> {
    let mut out = Flat::new();
    for (f, c) in terms {
        for (k, v) in f.iter() {
            let slot = out.entry(*k).or_insert_with(S::zero);
            *slot = slot.clone() + c.clone() * v.clone();
        }
    }
    out
}

fn flat_max<S: Scalar>(f: &Flat<S>) -> f64 {
    f.values().map(Scalar::abs_f64).fold(0.0, f64::max)
}

fn tangential_monomials(order: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for d in 0..=order {
        for a in (0..=d).rev() {
            out.push([a, d - a]);
        }
    }
    out
}

fn table_from_vector<S: Scalar>(x: &[S], monos: &[[usize; 2]], order: usize) -> [Jet3<S>; 3] {
    std::array::from_fn(|c| {
        Jet3::from_terms(
            order,
            monos
                .iter()
                .enumerate()
                .map(|(i, m)| ([m[0], m[1], 0], x[c * monos.len() + i].clone())),
        )
    })
}

/// Result of Gaussian elimination on `A x = y`.
struct Solution<S> {
    rank: usize,
    free: Vec<usize>,
    x: Vec<S>,
    /// Largest right-hand side left over in the eliminated zero rows.
    leftover: f64,
}

fn gauss<S: Scalar>(mut a: Vec<Vec<S>>, mut y: Vec<S>, ncols: usize) -> Solution<S> {
    let scale = a
        .iter()
        .flatten()
        .map(Scalar::abs_f64)
        .fold(0.0, f64::max)
        .max(1.0);
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let best =
            (row..nrows).max_by(|&i, &j| a[i][col].abs_f64().total_cmp(&a[j][col].abs_f64()));
        let Some(p) = best else { break };
        if tol_zero(&a[p][col], scale) || (!S::EXACT && a[p][col].abs_f64() <= 1e-10 * scale) {
            continue;
        }
        a.swap(row, p);
        y.swap(row, p);
        let piv = a[row][col].clone();
        for i in 0..nrows {
            if i == row || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone() / piv.clone();
            for c in col..ncols {
                let v = a[i][c].clone() - f.clone() * a[row][c].clone();
                a[i][c] = v;
            }
            y[i] = y[i].clone() - f * y[row].clone();
        }
        pivots.push(col);
        row += 1;
        if row == nrows {
            break;
        }
    }
    let rank = pivots.len();
    let mut x = vec![S::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = y[r].clone() / a[r][c].clone();
    }
    let leftover = y[rank..].iter().map(Scalar::abs_f64).fold(0.0, f64::max);
    let free = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    Solution {
        rank,
        free,
        x,
        leftover,
    }
}

const ENTRY_NAMES: [&str; 3] = ["11", "12", "22"];

fn check_data_depth<S: Scalar>(
    sigma: &SymbolSeries<S>,
    degree: i32,
    order: usize,
) -> Result<usize> {
    let comp = sigma.component(degree).ok_or(Error::InsufficientDepth {
        needed: degree,
        bottom: sigma.bottom(),
    })?;
    if comp.order < order {
        return Err(Error::OrderTooLow {
            what: "normal-to-tangential data",
            needed: order,
            available: comp.order,
        });
    }
    Ok(comp.order)
}

/// Recovers the boundary metric and `∂ₙᵏg^{αβ}` for `k = 1..=kmax` with the
/// default tangential depth `kmax + 1`.
pub fn recover_jet<S: Scalar>(sigma: &NTSymbol<S>, kmax: usize) -> Result<RecoveredJet<S>> {
    recover_jet_with(sigma, &RecoveryOptions::new(kmax))
}

/// Affine-probing recovery.
///
/// Needs σ down to degree `−kmax`, with the degree `−k` component known to
/// tangential order `T − k`.
pub fn recover_jet_with<S: Scalar>(
    sigma: &NTSymbol<S>,
    opts: &RecoveryOptions,
) -> Result<RecoveredJet<S>> {
    let kmax = opts.kmax;
    let t = opts.depth();
    if kmax == 0 || t <= kmax {
        return Err(Error::ShapeMismatch(format!(
            "need kmax ≥ 1 and tangential order above kmax, got kmax = {kmax}, T = {t}"
        )));
    }
    let lambda = &sigma.lambda;
    let data = &sigma.sigma;
    let mut binding = check_data_depth(data, 0, t)? > t;
    let samples = sample_principal(&data.truncate_bottom(0), &default_directions())?;
    let boundary = recover_boundary_metric(&samples)?.map(|j| j.truncate(t));
    let mut tables = vec![boundary.clone()];
    let mut stages = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    for k in 0..kmax {
        let degree = -(k as i32) - 1;
        let depth = t - k - 1;
        binding |= check_data_depth(data, degree, depth)? > depth;
        let observed = flatten(data.component(degree).expect("depth checked"), depth);

        let monos = tangential_monomials(depth);
        let n = 3 * monos.len();
        let mut runs = 0usize;
        let mut eval = |x: &[S]| -> Result<Flat<S>> {
            let mut trial = tables.clone();
            trial.push(table_from_vector(x, &monos, depth));
            runs += 1;
            Ok(flatten(
                &forward_component(&trial, t, lambda, degree)?,
                depth,
            ))
        };

        let zero = vec![S::zero(); n];
        let f0 = eval(&zero)?;
        let mut columns = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = zero.clone();
            e[i] = S::one();
            let fi = eval(&e)?;
            columns.push(flat_combine(&[(&fi, S::one()), (&f0, -S::one())]));
        }

        let probe = |rng: &mut ChaCha8Rng| -> Vec<S> {
            (0..n)
                .map(|_| S::from_ratio(rng.gen_range(-3..=3), 4))
                .collect()
        };
        let u1 = probe(&mut rng);
        let u2 = probe(&mut rng);
        let u12: Vec<S> = u1
            .iter()
            .zip(&u2)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        let (f1, f2, f12) = (eval(&u1)?, eval(&u2)?, eval(&u12)?);
        let defect = flat_combine(&[
            (&f1, S::one()),
            (&f2, S::one()),
            (&f12, -S::one()),
            (&f0, -S::one()),
        ]);
        let affinity_defect = flat_max(&defect);
        let fscale = flat_max(&f12).max(1.0);
        if (S::EXACT && affinity_defect != 0.0) || affinity_defect > 1e-8 * fscale {
            return Err(Error::NotAffine { stage: k });
        }

        let rhs = flat_combine(&[(&observed, S::one()), (&f0, -S::one())]);
        let mut keys: Vec<_> = rhs.keys().copied().collect();
        for c in &columns {
            keys.extend(c.keys().copied());
        }
        keys.sort();
        keys.dedup();
        let a: Vec<Vec<S>> = keys
            .iter()
            .map(|key| {
                columns
                    .iter()
                    .map(|c| c.get(key).cloned().unwrap_or_else(S::zero))
                    .collect()
            })
            .collect();
        let y: Vec<S> = keys
            .iter()
            .map(|key| rhs.get(key).cloned().unwrap_or_else(S::zero))
            .collect();
        let sol = gauss(a, y, n);
        if sol.rank < n {
            let undetermined = sol
                .free
                .iter()
                .map(|&i| {
                    let m = monos[i % monos.len()];
                    format!(
                        "∂ₙ^{} g^{} · x1^{} x2^{}",
                        k + 1,
                        ENTRY_NAMES[i / monos.len()],
                        m[0],
                        m[1]
                    )
                })
                .collect();
            return Err(Error::RankDeficient {
                stage: k,
                undetermined,
            });
        }
        let yscale = flat_max(&observed).max(1.0);
        if (S::EXACT && sol.leftover != 0.0) || sol.leftover > 1e-8 * yscale {
            return Err(Error::InconsistentData {
                stage: k,
                detail: format!(
                    "affine system has no solution (leftover {:.3e})",
                    sol.leftover
                ),
            });
        }

        let fsol = eval(&sol.x)?;
        let mismatch = flat_combine(&[(&fsol, S::one()), (&observed, -S::one())]);
        let residual = flat_max(&mismatch);
        if (S::EXACT && residual != 0.0) || residual > 1e-8 * yscale {
            return Err(Error::InconsistentData {
                stage: k,
                detail: format!("forward map misses the data by {residual:.3e}"),
            });
        }
        stages.push(StageReport {
            normal_order: k + 1,
            degree,
            unknowns: n,
            equations: keys.len(),
            rank: sol.rank,
            residual,
            affinity_defect,
            forward_runs: runs,
        });
        tables.push(table_from_vector(&sol.x, &monos, depth));
    }

    let normal_derivs = tables.split_off(1);
    Ok(RecoveredJet {
        lambda: lambda.clone(),
        tangential_order: t,
        boundary_metric: boundary,
        normal_derivs,
        stages,
        depth_binding: binding,
    })
}

/// First and second normal derivatives recovered by closed-form
/// contractions, with the boundary mean-curvature scalar `𝒟`.
#[derive(Clone, Debug)]
pub struct ExplicitRecovery<S: Scalar> {
    pub boundary_metric: [Jet3<S>; 3],
    /// `∂ₙ[g^{11}, g^{12}, g^{22}]` to tangential order `T − 1`.
    pub first: [Jet3<S>; 3],
    /// `∂ₙ²[g^{11}, g^{12}, g^{22}]` to tangential order `T − 2`.
    pub second: [Jet3<S>; 3],
    /// `𝒟 = ½ g_{αβ} ∂ₙg^{αβ}` at the boundary.
    pub mean_curvature: Jet3<S>,
}

/// The 1×2 row `Σ_μ g^{νμ} ζ_μ` over the norm of `like`.
fn contraction_row<S: Scalar>(g: &[Jet3<S>; 3], like: &SymbolSeries<S>) -> Result<SymbolSeries<S>> {
    let order = like.norm().order();
    let entry = |a: &Jet3<S>, b: &Jet3<S>| {
        let mut e = Entry::new();
        e.insert((1, 0), a.truncate(order));
        e.insert((0, 1), b.truncate(order));
        e
    };
    let comp = Component {
        order,
        entries: vec![entry(&g[0], &g[1]), entry(&g[1], &g[2])],
    };
    SymbolSeries::from_components(like.norm().clone(), 1, 2, 1, vec![comp])
}

/// Solves `f = tr_g w + w(ζ, ζ)/r²` for the symmetric table `w`, given the
/// canonical degree-0 form of `f`.
fn solve_trace_form<S: Scalar>(
    f: &Entry<S>,
    g: &[Jet3<S>; 3],
    order: usize,
) -> Result<[Jet3<S>; 3]> {
    let get = |k: Key| {
        f.get(&k)
            .map(|j| j.truncate(order))
            .unwrap_or_else(|| Jet3::zero(order))
    };
    let scale = f.values().map(Jet3::max_abs).fold(1.0, f64::max);
    for (k, j) in f {
        let stray = if S::EXACT {
            !j.is_zero()
        } else {
            j.max_abs() > 1e-9 * scale
        };
        if !matches!(k, (0, 0) | (1, 1) | (0, 2)) && stray {
            return Err(Error::Inconsistent(format!(
                "contracted symbol has an unexpected ζ-monomial {k:?}"
            )));
        }
    }
    let (c0, c1, c2) = (get((0, 0)), get((1, 1)), get((0, 2)));
    let g = g.clone().map(|j| j.truncate(order));
    let det = &g[0].mul(&g[2]) - &g[1].mul(&g[1]);
    let inv_det = det.reciprocal()?;
    let inv_g11 = g[0].reciprocal()?;
    let inner = (&g[0].mul(&c2) - &g[1].mul(&c1)).mul(&inv_det);
    let w11 = g[0].mul(&(&c0 - &inner));
    let w12 = &c1.scale(&S::from_ratio(1, 2)) + &g[1].mul(&inv_g11).mul(&w11);
    let w22 = &c2 + &g[2].mul(&inv_g11).mul(&w11);
    Ok([w11, w12, w22])
}

/// Recovers `∂ₙg^{αβ}` and `∂ₙ²g^{αβ}` from σ down to degree −2 at
/// tangential depth `T ≥ 2`.
///
/// With `F₀` the symbol of the metric whose unknown normal derivative is set
/// to zero, the difference `Δ = σ − F₀` is linear in that derivative `w`:
/// `Σ g^{νμ}ζ_μ Δ_ν` equals `¼ f` at degree 0 for the first derivative and
/// `−f/(8r)` at degree −1 for the second, with `f = tr_g w + w(ζ,ζ)/r²`.
pub fn recover_first_orders_explicit<S: Scalar>(
    sigma: &NTSymbol<S>,
    tangential_order: usize,
) -> Result<ExplicitRecovery<S>> {
    let t = tangential_order;
    if t < 2 {
        return Err(Error::ShapeMismatch(
            "tangential order must be at least 2".into(),
        ));
    }
    let data = &sigma.sigma;
    check_data_depth(data, 0, t)?;
    check_data_depth(data, -1, t - 1)?;
    check_data_depth(data, -2, t - 2)?;
    let lambda = &sigma.lambda;
    let samples = sample_principal(&data.truncate_bottom(0), &default_directions())?;
    let g = recover_boundary_metric(&samples)?.map(|j| j.truncate(t));

    let mut tables = vec![g.clone()];
    let mut found = Vec::new();
    for (k, factor) in [(1usize, S::from_int(4)), (2, S::from_int(-8))] {
        let degree = -(k as i32);
        let depth = t - k;
        let mut trial = tables.clone();
        trial.push(std::array::from_fn(|_| Jet3::zero(depth)));
        let m = lift_inverse(&trial, t)?;
        let b = factorize_dn(&m, lambda, degree + 1)?;
        let model = nt_symbol(&b, degree)?.sigma;
        let observed = data
            .component(degree)
            .expect("depth checked")
            .truncate(depth);
        let mut delta = observed;
        delta.add_scaled(
            &-S::one(),
            model.component(degree).expect("computed degree"),
        );
        let delta = SymbolSeries::from_components(model.norm().clone(), 2, 1, degree, vec![delta])?;
        let contracted = contraction_row(&g, &model)?.mul(&delta, degree + 1)?;
        let f = contracted.shift_degree(k as i32 - 1).scale(&factor);
        let f_entry = f.entry(0, 0, 0).cloned().unwrap_or_default();
        let w = solve_trace_form(&f_entry, &g, depth)?;
        tables.push(w.clone());
        found.push(w);
    }
    let second = found.pop().expect("two stages");
    let first = found.pop().expect("two stages");
    let gd = g.clone().map(|j| j.truncate(t - 1));
    let det = &gd[0].mul(&gd[2]) - &gd[1].mul(&gd[1]);
    let trace = &(&gd[2].mul(&first[0]) - &gd[1].mul(&first[1]).scale(&S::from_int(2)))
        + &gd[0].mul(&first[2]);
    let mean_curvature = trace.mul(&det.reciprocal()?).scale(&S::from_ratio(1, 2));
    Ok(ExplicitRecovery {
        boundary_metric: g,
        first,
        second,
        mean_curvature,
    })
}

/// Runs the forward pipeline: metric jet → DN symbol → σ down to `bottom`.
pub fn forward_nt<S: Scalar>(m: &MetricJet<S>, lambda: &S, bottom: i32) -> Result<NTSymbol<S>> {
    let b = factorize_dn(m, lambda, bottom + 1)?;
    nt_symbol(&b, bottom)
}
