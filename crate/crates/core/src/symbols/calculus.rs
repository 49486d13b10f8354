use std::collections::HashMap;

use super::norm::Norm;
use super::series::{canonicalize, Component, Entry, Key, SymbolSeries};
use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::scalar::Scalar;

fn add_product_at<S: Scalar>(raw: &mut Entry<S>, key: Key, x: &Jet3<S>, y: &Jet3<S>) {
    match raw.get_mut(&key) {
        Some(d) => d.add_product(x, y),
        None => {
            raw.insert(key, x.mul(y));
        }
    }
}

fn add_scaled_at<S: Scalar>(raw: &mut Entry<S>, key: Key, c: &S, x: &Jet3<S>) {
    match raw.get_mut(&key) {
        Some(d) => d.add_scaled(c, x),
        None => {
            raw.insert(key, x.scale(c));
        }
    }
}

fn finish<S: Scalar>(norm: &Norm<S>, mut raw: Entry<S>, order: usize) -> Entry<S> {
    canonicalize(norm, &mut raw);
    raw.into_iter()
        .map(|(k, j)| (k, j.truncate(order)))
        .filter(|(_, j)| !j.is_zero())
        .collect()
}

/// Pointwise matrix product of two homogeneous components.
pub(crate) fn mul_components<S: Scalar>(
    norm: &Norm<S>,
    a: &Component<S>,
    (rows, inner): (usize, usize),
    b: &Component<S>,
    cols: usize,
) -> Component<S> {
    let order = a.order.min(b.order).min(norm.order());
    let mut out = Component::zero(rows * cols, order);
    for i in 0..rows {
        for j in 0..cols {
            let mut raw = Entry::new();
            for k in 0..inner {
                let ea = &a.entries[i * inner + k];
                let eb = &b.entries[k * cols + j];
                for (ka, ja) in ea {
                    for (kb, jb) in eb {
                        add_product_at(&mut raw, (ka.0 + kb.0, ka.1 + kb.1), ja, jb);
                    }
                }
            }
            out.entries[i * cols + j] = finish(norm, raw, order);
        }
    }
    out
}

/// `∂_{ζ_α}` of a degree-`m` component (result has degree `m − 1`).
pub(crate) fn dxi_component<S: Scalar>(
    norm: &Norm<S>,
    comp: &Component<S>,
    m: i32,
    alpha: usize,
) -> Component<S> {
    let order = comp.order.min(norm.order());
    let inv = norm.inverse();
    let (g1, g2) = if alpha == 0 {
        (&inv[0], &inv[1])
    } else {
        (&inv[1], &inv[2])
    };
    let mut out = Component::zero(comp.entries.len(), order);
    for (dst, entry) in out.entries.iter_mut().zip(&comp.entries) {
        let mut raw = Entry::new();
        for (&(a, b), c) in entry {
            let p = m - a as i32 - b as i32;
            if alpha == 0 && a > 0 {
                add_scaled_at(&mut raw, (a - 1, b), &S::from_int(a as i64), c);
            }
            if alpha == 1 && b > 0 {
                add_scaled_at(&mut raw, (a, b - 1), &S::from_int(b as i64), c);
            }
            if p != 0 {
                let mp = c.scale(&S::from_int(-(p as i64)));
                add_product_at(&mut raw, (a + 1, b), &mp, g1);
                add_product_at(&mut raw, (a, b + 1), &mp, g2);
            }
        }
        *dst = finish(norm, raw, order);
    }
    out
}

/// `∂_{x^i}` of a degree-`m` component, including the x-dependence of
/// `r = |ξ|_g`.
pub(crate) fn dx_component<S: Scalar>(
    norm: &Norm<S>,
    comp: &Component<S>,
    m: i32,
    dir: usize,
) -> Result<Component<S>> {
    if comp.order == 0 {
        return Err(Error::OrderTooLow {
            what: "x-derivative of a symbol",
            needed: 1,
            available: 0,
        });
    }
    let dg = norm.d_inv(dir)?;
    let order = (comp.order - 1).min(dg[0].order());
    let half = S::from_ratio(1, 2);
    let mut out = Component::zero(comp.entries.len(), order);
    for (dst, entry) in out.entries.iter_mut().zip(&comp.entries) {
        let mut raw = Entry::new();
        for (&(a, b), c) in entry {
            let dc = c.derivative(dir)?;
            if !dc.is_zero() {
                add_scaled_at(&mut raw, (a, b), &S::one(), &dc);
            }
            let p = m - a as i32 - b as i32;
            if p != 0 {
                let hp = c.scale(&(S::from_int(-(p as i64)) * half.clone()));
                let fp = c.scale(&S::from_int(-(p as i64)));
                add_product_at(&mut raw, (a + 2, b), &hp, &dg[0]);
                add_product_at(&mut raw, (a + 1, b + 1), &fp, &dg[1]);
                add_product_at(&mut raw, (a, b + 2), &hp, &dg[2]);
            }
        }
        *dst = finish(norm, raw, order);
    }
    Ok(out)
}

/// Memoized mixed derivatives `∂_ζ^α` or `∂_x^α` (tangential α) of the
/// components of one symbol.
#[derive(Default)]
pub(crate) struct DerivativeCache<S: Scalar> {
    xi: HashMap<(i32, usize, usize), Component<S>>,
    x: HashMap<(i32, usize, usize), Component<S>>,
}

impl<S: Scalar> DerivativeCache<S> {
    pub(crate) fn new() -> Self {
        Self {
            xi: HashMap::new(),
            x: HashMap::new(),
        }
    }

    /// `∂_ζ^α` of the degree-`m` component (degree `m − |α|`).
    pub(crate) fn xi(
        &mut self,
        s: &SymbolSeries<S>,
        m: i32,
        alpha: (usize, usize),
    ) -> Option<&Component<S>> {
        let base = s.component(m)?;
        if !self.xi.contains_key(&(m, alpha.0, alpha.1)) {
            let comp = if alpha == (0, 0) {
                base.clone()
            } else {
                let (prev, dir) = if alpha.0 > 0 {
                    ((alpha.0 - 1, alpha.1), 0)
                } else {
                    ((alpha.0, alpha.1 - 1), 1)
                };
                let deg = m - (prev.0 + prev.1) as i32;
                let p = self.xi(s, m, prev)?.clone();
                dxi_component(s.norm(), &p, deg, dir)
            };
            self.xi.insert((m, alpha.0, alpha.1), comp);
        }
        self.xi.get(&(m, alpha.0, alpha.1))
    }

    /// `∂_x^α` of the degree-`m` component (same degree).
    pub(crate) fn x(
        &mut self,
        s: &SymbolSeries<S>,
        m: i32,
        alpha: (usize, usize),
    ) -> Result<Option<&Component<S>>> {
        let Some(base) = s.component(m) else {
            return Ok(None);
        };
        if !self.x.contains_key(&(m, alpha.0, alpha.1)) {
            let comp = if alpha == (0, 0) {
                base.clone()
            } else {
                let (prev, dir) = if alpha.0 > 0 {
                    ((alpha.0 - 1, alpha.1), 0)
                } else {
                    ((alpha.0, alpha.1 - 1), 1)
                };
                let p = self.x(s, m, prev)?.expect("base exists").clone();
                dx_component(s.norm(), &p, m, dir)?
            };
            self.x.insert((m, alpha.0, alpha.1), comp);
        }
        Ok(self.x.get(&(m, alpha.0, alpha.1)))
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}

/// Degree-`m` component of `a # b = Σ_α (1/α!) ∂_ζ^α a · ∂_x^α b`, summing
/// only over pairs of degrees present in both operands and accepted by
/// `keep(i, j, |α|)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn compose_component<S: Scalar>(
    a: &SymbolSeries<S>,
    ca: &mut DerivativeCache<S>,
    b: &SymbolSeries<S>,
    cb: &mut DerivativeCache<S>,
    m: i32,
    keep: impl Fn(i32, i32, usize) -> bool,
) -> Result<Component<S>> {
    let norm = a.norm().clone();
    let len = a.rows() * b.cols();
    let max_alpha = (a.top() + b.top() - m).max(0) as usize;
    let mut acc: Option<Component<S>> = None;
    for total in 0..=max_alpha {
        for a1 in 0..=total {
            let alpha = (a1, total - a1);
            let weight = S::from_ratio(1, factorial(alpha.0) * factorial(alpha.1));
            for i in a.degrees().collect::<Vec<_>>() {
                let j = m + total as i32 - i;
                if j > b.top() || j < b.bottom() || !keep(i, j, total) {
                    continue;
                }
                let Some(db) = cb.x(b, j, alpha)? else {
                    continue;
                };
                if db.is_zero() {
                    continue;
                }
                let Some(da) = ca.xi(a, i, alpha) else {
                    continue;
                };
                let term = mul_components(&norm, da, (a.rows(), a.cols()), db, b.cols());
                match acc.as_mut() {
                    Some(sum) => sum.add_scaled(&weight, &term),
                    None => {
                        let mut first = Component::zero(len, term.order);
                        first.add_scaled(&weight, &term);
                        acc = Some(first);
                    }
                }
            }
        }
    }
    Ok(acc.unwrap_or_else(|| Component::zero(len, norm.order())))
}

impl<S: Scalar> SymbolSeries<S> {
    fn check_product(&self, other: &Self) -> Result<()> {
        if self.cols() != other.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        self.check_norm(other)
    }

    fn product_range(&self, other: &Self, bottom: i32) -> (i32, i32) {
        let top = self.top() + other.top();
        (top, bottom.min(top))
    }

    /// Pointwise matrix product down to degree `bottom`. Degrees outside
    /// the stored range of an operand count as zero, so a truncated series
    /// yields a product that is reliable only down to
    /// `max(bottom_a + top_b, top_a + bottom_b)`.
    pub fn mul(&self, other: &Self, bottom: i32) -> Result<Self> {
        self.check_product(other)?;
        let (top, bottom) = self.product_range(other, bottom);
        let norm = self.norm().clone();
        let mut comps = Vec::new();
        for m in (bottom..=top).rev() {
            let mut acc: Option<Component<S>> = None;
            for i in self.degrees() {
                let j = m - i;
                let (Some(x), Some(y)) = (self.component(i), other.component(j)) else {
                    continue;
                };
                let term = mul_components(&norm, x, (self.rows(), self.cols()), y, other.cols());
                match acc.as_mut() {
                    Some(sum) => sum.add_scaled(&S::one(), &term),
                    None => acc = Some(term),
                }
            }
            comps.push(
                acc.unwrap_or_else(|| Component::zero(self.rows() * other.cols(), norm.order())),
            );
        }
        Self::from_components(norm, self.rows(), other.cols(), top, comps)
    }

    /// `∂_{ζ_α}` (equivalently `D_{ξ_α}`); every degree drops by one.
    pub fn dxi(&self, alpha: usize) -> Self {
        assert!(alpha < 2, "tangential index expected");
        let comps = self
            .components()
            .map(|(m, c)| dxi_component(self.norm(), c, m, alpha))
            .collect();
        Self::from_components(
            self.norm().clone(),
            self.rows(),
            self.cols(),
            self.top() - 1,
            comps,
        )
        .expect("shape preserved")
    }

    /// `∂_{x^i}` for i = 0, 1 (tangential) or 2 (normal); truncation order
    /// drops by one.
    pub fn dx(&self, dir: usize) -> Result<Self> {
        let comps = self
            .components()
            .map(|(m, c)| dx_component(self.norm(), c, m, dir))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(
            self.norm().clone(),
            self.rows(),
            self.cols(),
            self.top(),
            comps,
        )
    }

    /// Symbol composition `a # b = Σ_α (1/α!) ∂_ξ^α a · D_x^α b` over
    /// tangential α, down to degree `bottom`, with the same truncation
    /// caveat as [`SymbolSeries::mul`]. In the `ζ = iξ` variables the
    /// factors `i^{|α|}` and `(−i)^{|α|}` cancel, so the sum is real.
    pub fn compose(&self, other: &Self, bottom: i32) -> Result<Self> {
        self.check_product(other)?;
        let (top, bottom) = self.product_range(other, bottom);
        let mut ca = DerivativeCache::new();
        let mut cb = DerivativeCache::new();
        let mut comps = Vec::new();
        for m in (bottom..=top).rev() {
            comps.push(compose_component(
                self,
                &mut ca,
                other,
                &mut cb,
                m,
                |_, _, _| true,
            )?);
        }
        Self::from_components(self.norm().clone(), self.rows(), other.cols(), top, comps)
    }
}
