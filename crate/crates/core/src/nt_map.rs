//! Total symbol of the Beltrami normal-to-tangential map.
//!
//! A Beltrami field `curl u = λu` in boundary normal coordinates satisfies,
//! at the boundary, the tangential relation
//!
//! ```text
//! Λ^{tt} Σ(f) + Λ^{tn} f = λ|g|^{−1/2} G J Σ(f) + d f
//! ```
//!
//! with `G = (g_αβ)` and `J = (ε^{αβ})`, `ε¹² = +1`. Passing to symbols gives
//! `(b^{tt} − λ|g|^{−1/2}GJ) # σ = ζ − b^{tn}`, which is solved degree by
//! degree starting from `σ₀ = ζ/r = iξ/|ξ|_g`. The normal relation is kept
//! as an independent consistency check.
//!
//! With `λ = 0` the same tangential relation describes harmonic fields
//! (`du = 0`, `d*u = 0`); the normal check then comes from `d*u = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hodge_dn::DNSymbol;
use crate::jets::{Jet3, MetricJet, N};
use crate::scalar::Scalar;
use crate::symbols::{
    compose_component, BlockSymbol, Component, DerivativeCache, Entry, HeaderedDoc, Norm,
    SymbolSeries,
};

/// Which field equation the symbol describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NtMode {
    /// `curl u = λu` with `λ ≠ 0`.
    Beltrami,
    /// `du = 0`, `d*u = 0`; the frequency is zero.
    Harmonic,
}

impl NtMode {
    pub fn for_lambda<S: Scalar>(lambda: &S) -> Self {
        if lambda.is_zero() {
            NtMode::Harmonic
        } else {
            NtMode::Beltrami
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NtMode::Beltrami => "beltrami",
            NtMode::Harmonic => "harmonic",
        }
    }
}

impl fmt::Display for NtMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The normal-to-tangential symbol `σ = Σ_{bottom ≤ m ≤ 0} σ_m`, a 2×1
/// symbol over the boundary-restricted norm.
#[derive(Clone, Debug)]
pub struct NTSymbol<S: Scalar> {
    pub sigma: SymbolSeries<S>,
    pub lambda: S,
    pub mode: NtMode,
    /// Truncation order of the metric jet the symbol was computed from.
    pub order: usize,
    /// Source metric; absent for symbols read from a document.
    pub source: Option<Arc<MetricJet<S>>>,
}

#[derive(Serialize, Deserialize)]
struct NtHeader {
    lambda: String,
    mode: NtMode,
    #[serde(rename = "K")]
    order: usize,
}

impl<S: Scalar> NTSymbol<S> {
    pub fn bottom(&self) -> i32 {
        self.sigma.bottom()
    }

    /// Pretty JSON with header `{K, lambda, mode}`.
    pub fn to_json(&self) -> String {
        let mut header = BTreeMap::new();
        header.insert("K".to_string(), Value::from(self.order));
        header.insert("lambda".to_string(), Value::from(self.lambda.to_text()));
        header.insert("mode".to_string(), Value::from(self.mode.as_str()));
        let doc = HeaderedDoc {
            header,
            symbol: self.sigma.to_doc(),
        };
        serde_json::to_string_pretty(&doc).expect("symbol documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HeaderedDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let header: NtHeader = serde_json::to_value(&doc.header)
            .and_then(serde_json::from_value)
            .map_err(|e| Error::Format(format!("header: {e}")))?;
        let lambda = S::parse_text(&header.lambda)
            .ok_or_else(|| Error::Format(format!("bad lambda '{}'", header.lambda)))?;
        if header.mode != NtMode::for_lambda(&lambda) {
            return Err(Error::Format(format!(
                "mode '{}' does not match lambda {}",
                header.mode, header.lambda
            )));
        }
        let sigma = SymbolSeries::from_doc(&doc.symbol)?;
        if sigma.rows() != 2 || sigma.cols() != 1 || sigma.top() != 0 {
            return Err(Error::Format(
                "expected a 2×1 symbol of top degree 0".into(),
            ));
        }
        if !sigma.norm().is_restricted() {
            return Err(Error::Format(
                "symbol norm must be restricted to the boundary".into(),
            ));
        }
        Ok(Self {
            sigma,
            lambda,
            mode: header.mode,
            order: header.order,
            source: None,
        })
    }
}

/// Boundary data shared by the tangential solve and the normal check.
struct BoundaryData<S: Scalar> {
    norm: Arc<Norm<S>>,
    blocks: BlockSymbol<S>,
    source: Arc<MetricJet<S>>,
}

fn boundary_data<S: Scalar>(b: &DNSymbol<S>) -> BoundaryData<S> {
    let norm = Arc::new(b.b.norm().restrict());
    let restricted = b.b.restrict_with(norm.clone());
    BoundaryData {
        norm,
        blocks: BlockSymbol::split(&restricted).expect("DN symbols are 3×3"),
        source: b.source.clone(),
    }
}

/// `λ|g|^{−1/2} g_{να} ε^{αβ}` as a 2×2 matrix symbol (row ν, column β).
fn rotation_term<S: Scalar>(d: &BoundaryData<S>, lambda: &S) -> Result<SymbolSeries<S>> {
    let m = &d.source;
    let s = m.inv_sqrt_det()?.scale(lambda);
    let mut jets = Vec::with_capacity(4);
    for nu in 0..2 {
        jets.push(-&s.mul(m.g(nu, 1)).restrict_boundary());
        jets.push(s.mul(m.g(nu, 0)).restrict_boundary());
    }
    Ok(SymbolSeries::from_jets(d.norm.clone(), 2, 2, jets))
}

/// Solves the tangential relation for `σ` down to degree `bottom`.
///
/// `σ_{m−1}` is determined by `b_m`, so `bottom ≥ b.bottom() − 1`. In
/// Beltrami mode the frequency is taken from `b`; `λ = 0` selects the
/// harmonic mode.
pub fn nt_symbol<S: Scalar>(b: &DNSymbol<S>, bottom: i32) -> Result<NTSymbol<S>> {
    if bottom > 0 {
        return Err(Error::ShapeMismatch(format!(
            "bottom degree {bottom} above 0"
        )));
    }
    if bottom < b.bottom() - 1 {
        return Err(Error::InsufficientDepth {
            needed: bottom + 1,
            bottom: b.bottom(),
        });
    }
    let data = boundary_data(b);
    let p = data.blocks.tt.sub(&rotation_term(&data, &b.lambda)?)?;
    let rhs = SymbolSeries::zeta(data.norm.clone()).sub(&data.blocks.tn)?;

    let first = rhs.component(1).expect("ζ has degree 1").clone();
    let mut sigma = SymbolSeries::from_components(data.norm.clone(), 2, 1, 0, vec![first])?;
    let mut cp = DerivativeCache::new();
    let mut cs = DerivativeCache::new();
    for deg in (bottom + 1..=0).rev() {
        let mut bracket = match rhs.component(deg) {
            Some(c) => c.clone(),
            None => Component::zero(2, usize::MAX),
        };
        let known = compose_component(&p, &mut cp, &sigma, &mut cs, deg, |_, _, _| true)?;
        bracket.add_scaled(&-S::one(), &known);
        if bracket.order == usize::MAX {
            bracket.order = data.norm.order();
        }
        sigma.set_component(deg - 1, bracket)?;
    }
    Ok(NTSymbol {
        sigma,
        lambda: b.lambda.clone(),
        mode: NtMode::for_lambda(&b.lambda),
        order: b.order,
        source: Some(b.source.clone()),
    })
}

fn tangential_linear<S: Scalar>(coeffs: [Jet3<S>; 2]) -> Entry<S> {
    let mut e = Entry::new();
    let [c1, c2] = coeffs;
    if !c1.is_zero() {
        e.insert((1, 0), c1);
    }
    if !c2.is_zero() {
        e.insert((0, 1), c2);
    }
    e
}

fn constant_entry<S: Scalar>(c: Jet3<S>) -> Entry<S> {
    let mut e = Entry::new();
    if !c.is_zero() {
        e.insert((0, 0), c);
    }
    e
}

/// The operator acting on `Σ(f)` on the right-hand side of the normal
/// relation, as a 1×2 symbol of degree 1, together with the scalar
/// multiplying `f`.
fn normal_operator<S: Scalar>(
    d: &BoundaryData<S>,
    lambda: &S,
    mode: NtMode,
) -> Result<(SymbolSeries<S>, Jet3<S>)> {
    let m = &d.source;
    let s = m.inv_sqrt_det()?;
    let dn_s = s.derivative(N)?;
    let k1 = dn_s.order();
    let gi = |a: usize, b: usize| m.g_inv(a, b).truncate(k1);
    let (top, low, scalar) = match mode {
        NtMode::Beltrami => {
            // C(ζ)^β = −g^{δβ}ζ_δ, c = λ⁻¹ ∂ₙ|g|^{−1/2},
            // A^β = |g|^{−1/2} ε^{δγ} ε^{αβ} ∂_δ(|g|^{−1/2} g_{αγ}).
            let c = dn_s.scale(&(S::one() / lambda.clone()));
            let top = [
                tangential_linear([-&gi(0, 0), -&(&gi(1, 0) + &c)]),
                tangential_linear([&c - &gi(0, 1), -&gi(1, 1)]),
            ];
            let eps = |a: usize, b: usize| match (a, b) {
                (0, 1) => 1,
                (1, 0) => -1,
                _ => 0,
            };
            let mut low = Vec::with_capacity(2);
            for beta in 0..2 {
                let mut acc = Jet3::zero(k1);
                for delta in 0..2 {
                    for gamma in 0..2 {
                        for alpha in 0..2 {
                            let sign = eps(delta, gamma) * eps(alpha, beta);
                            if sign != 0 {
                                let t = s.mul(m.g(alpha, gamma)).derivative(delta)?;
                                acc.add_scaled(&S::from_int(sign), &t);
                            }
                        }
                    }
                }
                low.push(constant_entry(s.truncate(k1).mul(&acc)));
            }
            (top, low, Jet3::zero(k1))
        }
        NtMode::Harmonic => {
            // −h^β with h^β = g^{αβ}ζ_α + |g|^{−1/2}∂_α(|g|^{1/2}g^{αβ}),
            // and the scalar 𝒟 = −|g|^{−1/2}∂ₙ|g|^{1/2}.
            let root = m.sqrt_det()?;
            let top = [
                tangential_linear([-&gi(0, 0), -&gi(1, 0)]),
                tangential_linear([-&gi(0, 1), -&gi(1, 1)]),
            ];
            let mut low = Vec::with_capacity(2);
            for beta in 0..2 {
                let mut acc = Jet3::zero(k1);
                for alpha in 0..2 {
                    acc = &acc + &root.mul(m.g_inv(alpha, beta)).derivative(alpha)?;
                }
                low.push(constant_entry(-&s.truncate(k1).mul(&acc)));
            }
            (top, low, root.truncate(k1).mul(&dn_s))
        }
    };
    let restrict = |e: Entry<S>| -> Entry<S> {
        e.into_iter()
            .map(|(k, j)| (k, j.restrict_boundary()))
            .collect()
    };
    let comps = vec![
        Component {
            order: k1,
            entries: top.into_iter().map(restrict).collect(),
        },
        Component {
            order: k1,
            entries: low.into_iter().map(restrict).collect(),
        },
    ];
    let op = SymbolSeries::from_components(d.norm.clone(), 1, 2, 1, comps)?;
    Ok((op, scalar.restrict_boundary()))
}

/// `b^{nt} # σ + b^{nn} − (right-hand side of the normal relation)` on the
/// degrees `1 ..= max(b.bottom(), σ.bottom() + 1)`.
///
/// In Beltrami mode the right-hand side is
/// `A^β σ_β + C(ζ)^β # σ_β + λ⁻¹ ∂ₙ(|g|^{−1/2}) ε^{αγ} ζ_α # σ_γ`; in harmonic
/// mode it is `𝒟 − h^β # σ_β`. A correct pair `(σ, b)` gives zero.
pub fn nt_normal_residual<S: Scalar>(
    sigma: &NTSymbol<S>,
    b: &DNSymbol<S>,
) -> Result<SymbolSeries<S>> {
    if sigma.lambda != b.lambda {
        return Err(Error::Inconsistent(
            "σ and b were computed at different λ".into(),
        ));
    }
    let data = boundary_data(b);
    let sig = sigma.sigma.with_norm(data.norm.clone())?;
    let low = b.bottom().max(sig.bottom() + 1);
    let (op, scalar) = normal_operator(&data, &b.lambda, sigma.mode)?;
    let lhs = data.blocks.nt.compose(&sig, low)?.add(&data.blocks.nn)?;
    let rhs = op.compose(&sig, low)?;
    let rhs = if scalar.is_zero() {
        rhs
    } else {
        rhs.add(&SymbolSeries::from_jets(
            data.norm.clone(),
            1,
            1,
            vec![scalar],
        ))?
    };
    Ok(lhs.sub(&rhs)?.truncate_bottom(low))
}

#[cfg(test)]
mod tests;
