use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jet::{Jet3, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbols::{jet_from_doc, jet_to_doc, JetDoc};

/// Index of the normal coordinate xⁿ.
pub const N: usize = 2;

/// Truncated Taylor series of a metric in boundary normal coordinates,
/// `g_nn = 1`, `g_αn = 0`.
#[derive(Clone, Debug)]
pub struct MetricJet<S: Scalar> {
    order: usize,
    g: [[Jet3<S>; 3]; 3],
    g_inv: [[Jet3<S>; 3]; 3],
    det: Jet3<S>,
    sqrt_det: Option<Jet3<S>>,
}

impl<S: Scalar> MetricJet<S> {
    /// Validates a full 3×3 jet array. Inputs violating boundary normal form
    /// are rejected, not projected.
    pub fn new(g: [[Jet3<S>; 3]; 3]) -> Result<Self> {
        let order = g[0][0].order();
        for (i, row) in g.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if entry.order() != order {
                    return Err(Error::OrderMismatch {
                        left: order,
                        right: entry.order(),
                    });
                }
                if !entry.close_to(&g[j][i], 1e-13) {
                    return Err(Error::NotBoundaryNormal(format!(
                        "g_{i}{j} is not symmetric"
                    )));
                }
            }
        }
        if !g[N][N].close_to(&Jet3::one(order), 1e-13) {
            return Err(Error::NotBoundaryNormal("g_nn differs from 1".into()));
        }
        for a in 0..2 {
            if !g[a][N].close_to(&Jet3::zero(order), 1e-13) {
                return Err(Error::NotBoundaryNormal(format!("g_{a}n is nonzero")));
            }
        }
        Self::from_tangential(g[0][0].clone(), g[0][1].clone(), g[1][1].clone())
    }

    /// Builds the metric from the tangential block `g_αβ(x)`.
    pub fn from_tangential(g11: Jet3<S>, g12: Jet3<S>, g22: Jet3<S>) -> Result<Self> {
        let order = g11.order().min(g12.order()).min(g22.order());
        let (g11, g12, g22) = (
            g11.truncate(order),
            g12.truncate(order),
            g22.truncate(order),
        );
        let det = &g11.mul(&g22) - &g12.mul(&g12);
        let d0 = det.constant_term().to_f64();
        if g11.constant_term().to_f64() <= 0.0 || d0 <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let inv_det = det.reciprocal()?;
        let h11 = g22.mul(&inv_det);
        let h22 = g11.mul(&inv_det);
        let h12 = -&g12.mul(&inv_det);
        Ok(Self::assemble(order, [g11, g12, g22], [h11, h12, h22], det))
    }

    /// Builds the metric from the inverse tangential block `g^{αβ}(x)`.
    pub fn from_inverse(h11: Jet3<S>, h12: Jet3<S>, h22: Jet3<S>) -> Result<Self> {
        let order = h11.order().min(h12.order()).min(h22.order());
        let (h11, h12, h22) = (
            h11.truncate(order),
            h12.truncate(order),
            h22.truncate(order),
        );
        let det_inv = &h11.mul(&h22) - &h12.mul(&h12);
        if h11.constant_term().to_f64() <= 0.0 || det_inv.constant_term().to_f64() <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let det = det_inv.reciprocal()?;
        let g11 = h22.mul(&det);
        let g22 = h11.mul(&det);
        let g12 = -&h12.mul(&det);
        Ok(Self::assemble(order, [g11, g12, g22], [h11, h12, h22], det))
    }

    fn assemble(order: usize, low: [Jet3<S>; 3], up: [Jet3<S>; 3], det: Jet3<S>) -> Self {
        let zero = Jet3::zero(order);
        let one = Jet3::one(order);
        let block = |t: &[Jet3<S>; 3]| {
            [
                [t[0].clone(), t[1].clone(), zero.clone()],
                [t[1].clone(), t[2].clone(), zero.clone()],
                [zero.clone(), zero.clone(), one.clone()],
            ]
        };
        let sqrt_det = det.sqrt().ok();
        Self {
            order,
            g: block(&low),
            g_inv: block(&up),
            det,
            sqrt_det,
        }
    }

    pub fn euclidean(order: usize) -> Self {
        let one = Jet3::one(order);
        let zero = Jet3::zero(order);
        Self::from_tangential(one.clone(), zero, one).expect("identity metric is valid")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Lower-index component `g_ij`.
    pub fn g(&self, i: usize, j: usize) -> &Jet3<S> {
        &self.g[i][j]
    }

    /// Upper-index component `g^{ij}`.
    pub fn g_inv(&self, i: usize, j: usize) -> &Jet3<S> {
        &self.g_inv[i][j]
    }

    /// Determinant `|g|` (equal to the tangential 2×2 determinant).
    pub fn det(&self) -> &Jet3<S> {
        &self.det
    }

    /// `|g|^{1/2}`; unavailable in exact mode unless `|g|(0)` is a square.
    pub fn sqrt_det(&self) -> Result<&Jet3<S>> {
        self.sqrt_det
            .as_ref()
            .ok_or_else(|| Error::NotASquare(self.det.constant_term().to_text()))
    }

    /// `|g|^{-1/2}`.
    pub fn inv_sqrt_det(&self) -> Result<Jet3<S>> {
        self.sqrt_det()?.reciprocal()
    }

    /// Tangential inverse block `[g^{11}, g^{12}, g^{22}]`.
    pub fn inverse_block(&self) -> [Jet3<S>; 3] {
        [
            self.g_inv[0][0].clone(),
            self.g_inv[0][1].clone(),
            self.g_inv[1][1].clone(),
        ]
    }

    /// Same metric truncated to a lower order.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        Self::from_tangential(
            self.g[0][0].truncate(order),
            self.g[0][1].truncate(order),
            self.g[1][1].truncate(order),
        )
    }

    /// `Σ_{ij} g_ik g^{kj} − δ_i^j`, largest coefficient; zero for a valid jet.
    pub fn inverse_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Jet3::zero(self.order);
                for k in 0..3 {
                    acc.add_product(&self.g[i][k], &self.g_inv[k][j]);
                }
                if i == j {
                    acc = acc.add_scalar(&-S::one());
                }
                worst = worst.max(acc.max_abs());
            }
        }
        worst
    }

    /// Entrywise conversion to another scalar field.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Result<MetricJet<T>> {
        MetricJet::from_tangential(
            self.g[0][0].map(f),
            self.g[0][1].map(f),
            self.g[1][1].map(f),
        )
    }
}

/// Which tangential block a [`MetricDoc`] stores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricBlock {
    /// `g_αβ`.
    #[default]
    Covariant,
    /// `g^{αβ}`.
    Inverse,
}

/// JSON form of a [`MetricJet`]: one tangential block as three jets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDoc {
    pub order: usize,
    #[serde(default)]
    pub block: MetricBlock,
    pub g11: JetDoc,
    pub g12: JetDoc,
    pub g22: JetDoc,
}

impl<S: Scalar> MetricJet<S> {
    /// The covariant tangential block as a document.
    pub fn to_doc(&self) -> MetricDoc {
        MetricDoc {
            order: self.order,
            block: MetricBlock::Covariant,
            g11: jet_to_doc(&self.g[0][0]),
            g12: jet_to_doc(&self.g[0][1]),
            g22: jet_to_doc(&self.g[1][1]),
        }
    }

    pub fn from_doc(doc: &MetricDoc) -> Result<Self> {
        let j = |d: &JetDoc| jet_from_doc::<S>(d, doc.order);
        let (a, b, c) = (j(&doc.g11)?, j(&doc.g12)?, j(&doc.g22)?);
        match doc.block {
            MetricBlock::Covariant => Self::from_tangential(a, b, c),
            MetricBlock::Inverse => Self::from_inverse(a, b, c),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("metric documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MetricDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

/// Options for [`random_metric_jet`].
#[derive(Clone, Copy, Debug)]
pub struct RandomJetSpec {
    pub order: usize,
    /// Coefficients above degree zero are `n / denominator` with
    /// `|n| ≤ numerator_bound`.
    pub numerator_bound: i64,
    pub denominator: i64,
}

impl Default for RandomJetSpec {
    fn default() -> Self {
        Self {
            order: 6,
            numerator_bound: 2,
            denominator: 4,
        }
    }
}

/// Random metric jet with rational coefficients whose base-point block is
/// `AᵀA` for a random unimodular integer matrix `A`, so `|g|(0) = 1` and
/// every square root needed downstream is rational.
pub fn random_metric_jet<S: Scalar, R: Rng>(rng: &mut R, spec: RandomJetSpec) -> MetricJet<S> {
    let p: i64 = rng.gen_range(-1..=1);
    let q: i64 = rng.gen_range(-1..=1);
    // [[1, p], [0, 1]] · [[1, 0], [q, 1]] has determinant one.
    let a = [[1 + p * q, p], [q, 1]];
    let base = [
        a[0][0] * a[0][0] + a[1][0] * a[1][0],
        a[0][0] * a[0][1] + a[1][0] * a[1][1],
        a[0][1] * a[0][1] + a[1][1] * a[1][1],
    ];
    let order = spec.order;
    let mut entries: Vec<Jet3<S>> = Vec::with_capacity(3);
    for &b in &base {
        let mut terms: Vec<(MultiIndex, S)> = vec![([0, 0, 0], S::from_int(b))];
        for d in 1..=order {
            for a1 in 0..=d {
                for a2 in 0..=d - a1 {
                    let n = rng.gen_range(-spec.numerator_bound..=spec.numerator_bound);
                    if n != 0 {
                        terms.push(([a1, a2, d - a1 - a2], S::from_ratio(n, spec.denominator)));
                    }
                }
            }
        }
        entries.push(Jet3::from_terms(order, terms));
    }
    let g22 = entries.pop().unwrap();
    let g12 = entries.pop().unwrap();
    let g11 = entries.pop().unwrap();
    MetricJet::from_tangential(g11, g12, g22).expect("unimodular base block is positive definite")
}
