use crate::error::{Error, Result};
use crate::jets::{Jet3, MetricJet, N};
use crate::scalar::Scalar;

/// The tangential inverse metric `g^{αβ}(x)` that defines `r = |ξ|_g`, with
/// the ratios used to rewrite `ζ₁²` and the first derivatives used by `∂ₓ r`.
///
/// Symbols are written in the variables `ζ = iξ`, so that
/// `r² = −g^{αβ} ζ_α ζ_β` and
/// `ζ₁² = −(r² + 2g^{12}ζ₁ζ₂ + g^{22}ζ₂²) / g^{11}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Norm<S: Scalar> {
    order: usize,
    restricted: bool,
    inv: [Jet3<S>; 3],
    /// `[1/g^{11}, 2g^{12}/g^{11}, g^{22}/g^{11}]`.
    ratios: [Jet3<S>; 3],
    /// `∂_i g^{αβ}` for i = x¹, x², xⁿ (the last is absent when restricted).
    d_inv: [Option<[Jet3<S>; 3]>; 3],
}

impl<S: Scalar> Norm<S> {
    /// Builds the norm from `[g^{11}, g^{12}, g^{22}]`.
    pub fn new(inv: [Jet3<S>; 3]) -> Result<Self> {
        Self::build(inv, false)
    }

    pub fn from_metric(m: &MetricJet<S>) -> Result<Self> {
        Self::new(m.inverse_block())
    }

    fn build(inv: [Jet3<S>; 3], restricted: bool) -> Result<Self> {
        let order = inv.iter().map(Jet3::order).min().unwrap_or(0);
        let inv = inv.map(|j| j.truncate(order));
        let h = inv[0].reciprocal()?;
        let two = S::from_int(2);
        let ratios = [h.clone(), inv[1].mul(&h).scale(&two), inv[2].mul(&h)];
        let mut d_inv: [Option<[Jet3<S>; 3]>; 3] = [None, None, None];
        if order >= 1 {
            for (i, slot) in d_inv.iter_mut().enumerate() {
                if restricted && i == N {
                    continue;
                }
                *slot = Some([
                    inv[0].derivative(i)?,
                    inv[1].derivative(i)?,
                    inv[2].derivative(i)?,
                ]);
            }
        }
        Ok(Self {
            order,
            restricted,
            inv,
            ratios,
            d_inv,
        })
    }

    /// The same norm restricted to the boundary `xⁿ = 0`. Normal derivatives
    /// are unavailable afterwards.
    pub fn restrict(&self) -> Self {
        Self::build(self.inv.clone().map(|j| j.restrict_boundary()), true)
            .expect("restriction keeps the constant term")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_restricted(&self) -> bool {
        self.restricted
    }

    /// `[g^{11}, g^{12}, g^{22}]`.
    pub fn inverse(&self) -> &[Jet3<S>; 3] {
        &self.inv
    }

    /// `g^{αβ}` for tangential indices.
    pub fn g_inv(&self, a: usize, b: usize) -> &Jet3<S> {
        &self.inv[a + b]
    }

    pub(crate) fn ratios(&self) -> &[Jet3<S>; 3] {
        &self.ratios
    }

    pub(crate) fn d_inv(&self, dir: usize) -> Result<&[Jet3<S>; 3]> {
        if dir == N && self.restricted {
            return Err(Error::ShapeMismatch(
                "normal derivative of a boundary-restricted symbol".into(),
            ));
        }
        self.d_inv[dir].as_ref().ok_or(Error::OrderTooLow {
            what: "derivative of the symbol norm",
            needed: 1,
            available: self.order,
        })
    }

    /// The same norm truncated to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        Self::build(self.inv.clone().map(|j| j.truncate(order)), self.restricted)
            .expect("truncation keeps the constant term")
    }

    /// `true` when both norms agree up to the smaller truncation order.
    pub fn compatible(&self, other: &Self) -> bool {
        self.restricted == other.restricted
            && self
                .inv
                .iter()
                .zip(&other.inv)
                .all(|(a, b)| a.close_to(b, 1e-13))
    }

    /// Entrywise conversion to another scalar field.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Result<Norm<T>> {
        Norm::build(self.inv.clone().map(|j| j.map(f)), self.restricted)
    }

    pub(crate) fn from_parts(inv: [Jet3<S>; 3], restricted: bool) -> Result<Self> {
        Self::build(inv, restricted)
    }
}
