//! Total symbol of the Hodge Dirichlet-to-Neumann map on 1-forms.
//!
//! In boundary normal coordinates the Hodge Laplacian factors as
//! `Δ_d − λ² = (D_n + iE − iB)(D_n + iB)` modulo smoothing operators, and the
//! total symbol `b` of `B` solves
//!
//! ```text
//! ∂ₙb − E b + Σ_α (1/α!) ∂_ξ^α b D_x^α b = q₂ + q₁ + q₀
//! ```
//!
//! degree by degree, starting from `b₁ = |ξ|_g Id`. Matrices act on covector
//! components: entry `[l][p]` multiplies `u_p` and contributes to output
//! component `l`, with index order `(x¹, x², xⁿ)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::jets::{GeometryCache, Jet3, MetricJet, N};
use crate::scalar::Scalar;
use crate::symbols::{
    compose_component, dx_component, mul_components, BlockSymbol, Component, DerivativeCache,
    Entry, HeaderedDoc, Norm, SymbolSeries,
};

/// Symbols of the operators in the factorized Hodge Laplacian.
#[derive(Clone, Debug)]
pub struct OperatorSymbols<S: Scalar> {
    /// `E[l][p] = 2Γ^p_{nl} + δ^p_l 𝒟`, degree 0.
    pub e: SymbolSeries<S>,
    /// `|ξ|² Id`, degree 2.
    pub q2: SymbolSeries<S>,
    /// Degree 1.
    pub q1: SymbolSeries<S>,
    /// Degree 0, including the Ricci endomorphism and `−λ² Id`.
    pub q0: SymbolSeries<S>,
}

/// The DN symbol `b = Σ_{bottom ≤ m ≤ 1} b_m` for one metric jet and frequency.
#[derive(Clone, Debug)]
pub struct DNSymbol<S: Scalar> {
    pub b: SymbolSeries<S>,
    pub lambda: S,
    /// Truncation order `K` of the source metric jet.
    pub order: usize,
    pub source: Arc<MetricJet<S>>,
}

impl<S: Scalar> DNSymbol<S> {
    pub fn bottom(&self) -> i32 {
        self.b.bottom()
    }

    /// Taylor order to which `b_m` is determined by the source jet.
    pub fn valid_order(&self, m: i32) -> Option<usize> {
        usize::try_from(self.order as i32 - 1 + m.min(0)).ok()
    }

    pub fn to_json(&self) -> String {
        let mut header = BTreeMap::new();
        header.insert("K".to_string(), Value::from(self.order));
        header.insert("bottom".to_string(), Value::from(self.bottom()));
        header.insert("lambda".to_string(), Value::from(self.lambda.to_text()));
        let doc = HeaderedDoc {
            header,
            symbol: self.b.to_doc(),
        };
        serde_json::to_string_pretty(&doc).expect("symbol documents serialize")
    }
}

fn zero_jets<S: Scalar>(order: usize) -> Vec<Jet3<S>> {
    vec![Jet3::zero(order); 9]
}

/// Builds `E`, `q₂`, `q₁` and `q₀` from a metric jet of order `K ≥ 2`.
pub fn build_operator_symbols<S: Scalar>(
    m: &MetricJet<S>,
    lambda: &S,
) -> Result<OperatorSymbols<S>> {
    let norm = Arc::new(Norm::from_metric(m)?);
    build_with_norm(m, &GeometryCache::new(m)?, norm, lambda)
}

fn build_with_norm<S: Scalar>(
    m: &MetricJet<S>,
    geo: &GeometryCache<S>,
    norm: Arc<Norm<S>>,
    lambda: &S,
) -> Result<OperatorSymbols<S>> {
    if m.order() < 2 {
        return Err(Error::OrderTooLow {
            what: "operator symbols",
            needed: 2,
            available: m.order(),
        });
    }
    let k1 = m.order() - 1;
    let k2 = m.order() - 2;
    let two = S::from_int(2);
    let gam = |k: usize, i: usize, j: usize| geo.gamma(k, i, j);
    let d = &geo.mean_curvature;

    let mut e = zero_jets::<S>(k1);
    for l in 0..3 {
        for p in 0..3 {
            let mut v = gam(p, N, l).scale(&two);
            if l == p {
                v = &v + d;
            }
            e[l * 3 + p] = v;
        }
    }

    // q₁[l][p] = Σ_β (2 g^{αβ} Γ^p_{αl} + δ^p_l g^{γκ} Γ^β_{γκ}) ζ_β
    let mut trace_gamma: [Jet3<S>; 2] = std::array::from_fn(|_| Jet3::zero(k1));
    for (beta, t) in trace_gamma.iter_mut().enumerate() {
        for g in 0..2 {
            for k in 0..2 {
                t.add_product(m.g_inv(g, k), gam(beta, g, k));
            }
        }
    }
    let mut q1 = Component::zero(9, k1);
    for l in 0..3 {
        for p in 0..3 {
            let mut entry = Entry::new();
            for beta in 0..2 {
                let mut c = Jet3::zero(k1);
                for alpha in 0..2 {
                    c.add_product(m.g_inv(alpha, beta), gam(p, alpha, l));
                }
                c = c.scale(&two);
                if l == p {
                    c = &c + &trace_gamma[beta];
                }
                if !c.is_zero() {
                    entry.insert(if beta == 0 { (1, 0) } else { (0, 1) }, c);
                }
            }
            q1.entries[l * 3 + p] = entry;
        }
    }

    // q₀[l][p] = ∂ₙΓ^p_{nl} + g^{αβ}∂_αΓ^p_{βl} − g^{ij}Γ^q_{il}Γ^p_{jq}
    //           − g^{ij}Γ^k_{ij}Γ^p_{kl} + Ric^p_l − λ²δ^p_l
    let mut contracted: [Jet3<S>; 3] = std::array::from_fn(|_| Jet3::zero(k1));
    for (k, c) in contracted.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                if !m.g_inv(i, j).is_zero() {
                    c.add_product(m.g_inv(i, j), gam(k, i, j));
                }
            }
        }
    }
    let lambda2 = lambda.clone() * lambda.clone();
    let mut q0 = zero_jets::<S>(k2);
    for l in 0..3 {
        for p in 0..3 {
            let mut v = gam(p, N, l).derivative(N)?;
            for a in 0..2 {
                for b in 0..2 {
                    v.add_product(m.g_inv(a, b), &gam(p, b, l).derivative(a)?);
                }
            }
            let mut quad = Jet3::zero(k2);
            for i in 0..3 {
                for j in 0..3 {
                    if m.g_inv(i, j).is_zero() {
                        continue;
                    }
                    let mut inner = Jet3::zero(k2);
                    for q in 0..3 {
                        inner.add_product(gam(q, i, l), gam(p, j, q));
                    }
                    quad.add_product(m.g_inv(i, j), &inner);
                }
            }
            for k in 0..3 {
                quad.add_product(&contracted[k], gam(p, k, l));
            }
            v = &(&v - &quad) + &geo.ricci[p][l];
            if l == p {
                v = v.add_scalar(&-lambda2.clone());
            }
            q0[l * 3 + p] = v;
        }
    }

    let e = SymbolSeries::from_jets(norm.clone(), 3, 3, e);
    let q2 = SymbolSeries::r_power(norm.clone(), 3, 2);
    let q1 = SymbolSeries::from_components(norm.clone(), 3, 3, 1, vec![q1])?;
    let q0 = SymbolSeries::from_jets(norm, 3, 3, q0);
    Ok(OperatorSymbols { e, q2, q1, q0 })
}

impl<S: Scalar> OperatorSymbols<S> {
    /// `q_k` as a component (zero for `k < 0`).
    fn q(&self, k: i32) -> Option<&Component<S>> {
        match k {
            2 => self.q2.component(2),
            1 => self.q1.component(1),
            0 => self.q0.component(0),
            _ => None,
        }
    }

    /// `q₂ + q₁ + q₀`.
    pub fn total(&self) -> Result<SymbolSeries<S>> {
        self.q2.add(&self.q1)?.add(&self.q0)
    }
}

/// Runs the factorization recursion down to degree `bottom`.
///
/// `b_m` is determined to Taylor order `K − 1 + m`, so `bottom ≥ 1 − K`.
pub fn factorize_dn<S: Scalar>(m: &MetricJet<S>, lambda: &S, bottom: i32) -> Result<DNSymbol<S>> {
    let ops = build_operator_symbols(m, lambda)?;
    factorize_with(&ops, m, lambda, bottom)
}

/// [`factorize_dn`] with precomputed operator symbols.
pub fn factorize_with<S: Scalar>(
    ops: &OperatorSymbols<S>,
    m: &MetricJet<S>,
    lambda: &S,
    bottom: i32,
) -> Result<DNSymbol<S>> {
    let k = m.order() as i32;
    if bottom > 1 {
        return Err(Error::ShapeMismatch(format!(
            "bottom degree {bottom} above 1"
        )));
    }
    if bottom < 1 - k {
        return Err(Error::OrderTooLow {
            what: "DN symbol recursion",
            needed: (1 - bottom) as usize,
            available: m.order(),
        });
    }
    let norm = ops.q2.norm().clone();
    let e = ops.e.component(0).expect("E has degree 0");
    let mut b = SymbolSeries::r_power(norm.clone(), 3, 1);
    let mut ca = DerivativeCache::new();
    let mut cb = DerivativeCache::new();
    let half = S::from_ratio(1, 2);
    for deg in (bottom..=0).rev() {
        let top = deg + 1;
        let prev = b.component(top).expect("previous degree computed");
        let mut bracket = match ops.q(top) {
            Some(q) => q.clone(),
            None => Component::zero(9, usize::MAX),
        };
        bracket.add_scaled(&-S::one(), &dx_component(&norm, prev, top, N)?);
        bracket.add_scaled(&S::one(), &mul_components(&norm, e, (3, 3), prev, 3));
        let bb = compose_component(&b, &mut ca, &b, &mut cb, top, |_, _, _| true)?;
        bracket.add_scaled(&-S::one(), &bb);
        let order = (k - 1 + deg) as usize;
        let next = bracket.truncate(order).map_jets(|j| j.scale(&half));
        b.set_component(deg, next)?;
    }
    Ok(DNSymbol {
        b,
        lambda: lambda.clone(),
        order: m.order(),
        source: Arc::new(m.clone()),
    })
}

/// `∂ₙb − E b + b # b − (q₂ + q₁ + q₀)` on the degrees `2 ..= bottom + 1`,
/// where every term is determined by the computed components.
pub fn factorization_residual<S: Scalar>(
    d: &DNSymbol<S>,
    ops: &OperatorSymbols<S>,
) -> Result<SymbolSeries<S>> {
    let low = d.bottom() + 1;
    let upper = d.b.truncate_bottom(low);
    let dn = upper.dx(N)?;
    let eb = ops.e.mul(&upper, low)?;
    let bb = d.b.compose(&d.b, low)?;
    let lhs = dn.sub(&eb)?.add(&bb)?;
    Ok(lhs.sub(&ops.total()?)?.truncate_bottom(low))
}

/// Tangential/normal blocks of the DN symbol.
pub fn dn_blocks<S: Scalar>(d: &DNSymbol<S>) -> BlockSymbol<S> {
    BlockSymbol::split(&d.b).expect("DN symbols are 3×3")
}

#[cfg(test)]
mod tests;
