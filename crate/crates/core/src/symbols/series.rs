use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use super::norm::Norm;
use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::scalar::Scalar;

/// Exponents `(a, b)` of the monomial `ζ₁^a ζ₂^b r^p`; the power `p` is
/// implied by the degree slot, `p = m − a − b`.
pub type Key = (u8, u16);

/// One matrix entry of a homogeneous component: a canonical sum of jet
/// coefficients times monomials, with `a ∈ {0, 1}` after canonicalization.
pub type Entry<S> = BTreeMap<Key, Jet3<S>>;

/// The homogeneous part of a symbol at one degree, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<S: Scalar> {
    /// Truncation order shared by every coefficient of this component.
    pub order: usize,
    pub entries: Vec<Entry<S>>,
}

impl<S: Scalar> Component<S> {
    pub fn zero(len: usize, order: usize) -> Self {
        Self {
            order,
            entries: vec![Entry::new(); len],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.values().all(Jet3::is_zero))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            order,
            entries: self
                .entries
                .iter()
                .map(|e| e.iter().map(|(k, j)| (*k, j.truncate(order))).collect())
                .collect(),
        }
    }

    /// `self += c · other`, entrywise.
    pub fn add_scaled(&mut self, c: &S, other: &Self) {
        let order = self.order.min(other.order);
        if order < self.order {
            *self = self.truncate(order);
        }
        for (dst, src) in self.entries.iter_mut().zip(&other.entries) {
            for (k, j) in src {
                match dst.get_mut(k) {
                    Some(d) => d.add_scaled(c, j),
                    None => {
                        dst.insert(*k, j.truncate(order).scale(c));
                    }
                }
            }
        }
        self.prune();
    }

    /// Removes coefficients that are exactly zero.
    pub fn prune(&mut self) {
        for e in &mut self.entries {
            e.retain(|_, j| !j.is_zero());
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.values())
            .map(Jet3::max_abs)
            .fold(0.0, f64::max)
    }

    pub(crate) fn map_jets(&self, f: impl Fn(&Jet3<S>) -> Jet3<S>) -> Self {
        let mut out = Self {
            order: self.order,
            entries: self
                .entries
                .iter()
                .map(|e| e.iter().map(|(k, j)| (*k, f(j))).collect())
                .collect(),
        };
        out.order = out
            .entries
            .iter()
            .flat_map(|e| e.values())
            .map(Jet3::order)
            .fold(self.order, usize::min);
        out.prune();
        out
    }
}

/// Adds `c · ζ₁^a ζ₂^b r^p` (with `p` implicit) to a raw accumulator.
pub(crate) fn accumulate<S: Scalar>(raw: &mut Entry<S>, key: Key, c: Jet3<S>) {
    match raw.get_mut(&key) {
        Some(d) => *d = &*d + &c,
        None => {
            raw.insert(key, c);
        }
    }
}

/// Rewrites every monomial with `a ≥ 2` using
/// `ζ₁² = −(1/g^{11}) r² − (2g^{12}/g^{11}) ζ₁ζ₂ − (g^{22}/g^{11}) ζ₂²`.
pub(crate) fn canonicalize<S: Scalar>(norm: &Norm<S>, raw: &mut Entry<S>) {
    let [h, k2, l] = norm.ratios();
    loop {
        let Some((&(a, b), _)) = raw.iter().rev().find(|((a, _), _)| *a >= 2) else {
            break;
        };
        let c = raw.remove(&(a, b)).expect("key present");
        accumulate(raw, (a - 2, b), -&c.mul(h));
        accumulate(raw, (a - 1, b + 1), -&c.mul(k2));
        accumulate(raw, (a - 2, b + 2), -&c.mul(l));
    }
    raw.retain(|_, j| !j.is_zero());
}

/// A graded matrix-valued symbol `Σ_{bottom ≤ m ≤ top} a_m(x, ζ)` on the
/// two-dimensional boundary. Components outside `bottom..=top` are zero.
#[derive(Clone, Debug)]
pub struct SymbolSeries<S: Scalar> {
    norm: Arc<Norm<S>>,
    rows: usize,
    cols: usize,
    top: i32,
    /// `comps[k]` is the component of degree `top − k`.
    comps: Vec<Component<S>>,
}

impl<S: Scalar> SymbolSeries<S> {
    /// Zero symbol with all degrees in `bottom..=top` present.
    pub fn zero(
        norm: Arc<Norm<S>>,
        rows: usize,
        cols: usize,
        top: i32,
        bottom: i32,
        order: usize,
    ) -> Self {
        assert!(bottom <= top, "bottom degree above top degree");
        let n = (top - bottom + 1) as usize;
        Self {
            norm,
            rows,
            cols,
            top,
            comps: vec![Component::zero(rows * cols, order); n],
        }
    }

    /// Assembles a symbol from its components, highest degree first.
    pub fn from_components(
        norm: Arc<Norm<S>>,
        rows: usize,
        cols: usize,
        top: i32,
        comps: Vec<Component<S>>,
    ) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::ShapeMismatch("symbol without components".into()));
        }
        if comps.iter().any(|c| c.entries.len() != rows * cols) {
            return Err(Error::ShapeMismatch(format!(
                "component size differs from {rows}×{cols}"
            )));
        }
        Ok(Self {
            norm,
            rows,
            cols,
            top,
            comps,
        })
    }

    /// The degree-0 symbol whose coefficients are the given jets (row-major),
    /// i.e. multiplication by an x-dependent matrix.
    pub fn from_jets(norm: Arc<Norm<S>>, rows: usize, cols: usize, jets: Vec<Jet3<S>>) -> Self {
        assert_eq!(jets.len(), rows * cols, "jet matrix has the wrong size");
        let order = jets.iter().map(Jet3::order).min().unwrap_or(norm.order());
        let entries = jets
            .into_iter()
            .map(|j| {
                let mut e = Entry::new();
                if !j.is_zero() {
                    e.insert((0, 0), j.truncate(order));
                }
                e
            })
            .collect();
        Self {
            norm,
            rows,
            cols,
            top: 0,
            comps: vec![Component { order, entries }],
        }
    }

    /// `r^p · Id_n`, homogeneous of degree `p`.
    pub fn r_power(norm: Arc<Norm<S>>, n: usize, p: i32) -> Self {
        let order = norm.order();
        let mut comp = Component::zero(n * n, order);
        for i in 0..n {
            comp.entries[i * n + i].insert((0, 0), Jet3::one(order));
        }
        Self {
            norm,
            rows: n,
            cols: n,
            top: p,
            comps: vec![comp],
        }
    }

    pub fn identity(norm: Arc<Norm<S>>, n: usize) -> Self {
        Self::r_power(norm, n, 0)
    }

    /// The column `ζ = iξ`, homogeneous of degree one.
    pub fn zeta(norm: Arc<Norm<S>>) -> Self {
        let order = norm.order();
        let mut comp = Component::zero(2, order);
        comp.entries[0].insert((1, 0), Jet3::one(order));
        comp.entries[1].insert((0, 1), Jet3::one(order));
        Self {
            norm,
            rows: 2,
            cols: 1,
            top: 1,
            comps: vec![comp],
        }
    }

    pub fn norm(&self) -> &Arc<Norm<S>> {
        &self.norm
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn top(&self) -> i32 {
        self.top
    }

    pub fn bottom(&self) -> i32 {
        self.top - self.comps.len() as i32 + 1
    }

    /// Degrees from top to bottom.
    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        (self.bottom()..=self.top).rev()
    }

    pub fn component(&self, m: i32) -> Option<&Component<S>> {
        if m > self.top || m < self.bottom() {
            return None;
        }
        self.comps.get((self.top - m) as usize)
    }

    pub fn component_mut(&mut self, m: i32) -> Option<&mut Component<S>> {
        if m > self.top || m < self.bottom() {
            return None;
        }
        self.comps.get_mut((self.top - m) as usize)
    }

    pub fn components(&self) -> impl Iterator<Item = (i32, &Component<S>)> {
        self.comps
            .iter()
            .enumerate()
            .map(move |(k, c)| (self.top - k as i32, c))
    }

    /// Entry `(i, j)` of the degree-`m` component.
    pub fn entry(&self, m: i32, i: usize, j: usize) -> Option<&Entry<S>> {
        self.component(m).map(|c| &c.entries[i * self.cols + j])
    }

    /// Replaces the degree-`m` component, extending the range downward with
    /// zero components when `m` lies below the current bottom.
    pub fn set_component(&mut self, m: i32, comp: Component<S>) -> Result<()> {
        if comp.entries.len() != self.rows * self.cols {
            return Err(Error::ShapeMismatch("component size".into()));
        }
        if m > self.top {
            let extra = (m - self.top) as usize;
            let filler = Component::zero(self.rows * self.cols, comp.order);
            let mut comps = vec![filler; extra];
            comps.append(&mut self.comps);
            self.comps = comps;
            self.top = m;
        }
        while m < self.bottom() {
            let order = comp.order;
            self.comps
                .push(Component::zero(self.rows * self.cols, order));
        }
        let idx = (self.top - m) as usize;
        self.comps[idx] = comp;
        Ok(())
    }

    /// Drops every component below `bottom`.
    pub fn truncate_bottom(&self, bottom: i32) -> Self {
        let mut out = self.clone();
        let keep = (self.top - bottom + 1).max(1) as usize;
        out.comps.truncate(keep);
        out
    }

    /// Multiplication by `r^k`: relabels degrees, coefficients unchanged.
    pub fn shift_degree(&self, k: i32) -> Self {
        let mut out = self.clone();
        out.top += k;
        out
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.check_norm(other)
    }

    pub(crate) fn check_norm(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.norm, &other.norm) || self.norm.compatible(&other.norm) {
            Ok(())
        } else {
            Err(Error::NormMismatch)
        }
    }

    /// `self + c · other` over the union of the degree ranges.
    pub fn add_scaled(&self, c: &S, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let top = self.top.max(other.top);
        let bottom = self.bottom().min(other.bottom());
        let len = self.rows * self.cols;
        let mut comps = Vec::new();
        for m in (bottom..=top).rev() {
            let mut comp = match self.component(m) {
                Some(a) => a.clone(),
                None => Component::zero(len, usize::MAX),
            };
            match other.component(m) {
                Some(b) => comp.add_scaled(c, b),
                None => comp.order = comp.order.min(self.norm.order()),
            }
            if comp.order == usize::MAX {
                comp.order = self.norm.order();
            }
            comps.push(comp);
        }
        Self::from_components(self.norm.clone(), self.rows, self.cols, top, comps)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(&S::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(&-S::one(), other)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.clone();
        for comp in &mut out.comps {
            *comp = comp.map_jets(|j| j.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Restriction of every coefficient (and of the norm) to `xⁿ = 0`.
    pub fn restrict_boundary(&self) -> Self {
        let norm = Arc::new(self.norm.restrict());
        self.restrict_with(norm)
    }

    /// Restriction to `xⁿ = 0` reusing an already restricted norm.
    pub fn restrict_with(&self, norm: Arc<Norm<S>>) -> Self {
        let mut out = self.clone();
        out.norm = norm;
        for comp in &mut out.comps {
            *comp = comp.map_jets(Jet3::restrict_boundary);
        }
        out
    }

    /// The same coefficients over another (compatible) norm object.
    pub fn with_norm(&self, norm: Arc<Norm<S>>) -> Result<Self> {
        if !self.norm.compatible(&norm) {
            return Err(Error::NormMismatch);
        }
        let mut out = self.clone();
        out.norm = norm;
        Ok(out)
    }

    /// Rows `r` and columns `c` of every component.
    pub fn block(&self, r: Range<usize>, c: Range<usize>) -> Self {
        let (nr, nc) = (r.len(), c.len());
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let mut entries = Vec::with_capacity(nr * nc);
                for i in r.clone() {
                    for j in c.clone() {
                        entries.push(comp.entries[i * self.cols + j].clone());
                    }
                }
                Component {
                    order: comp.order,
                    entries,
                }
            })
            .collect();
        Self {
            norm: self.norm.clone(),
            rows: nr,
            cols: nc,
            top: self.top,
            comps,
        }
    }

    /// Transposed symbol.
    pub fn transpose(&self) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|comp| {
                let mut entries = Vec::with_capacity(comp.entries.len());
                for j in 0..self.cols {
                    for i in 0..self.rows {
                        entries.push(comp.entries[i * self.cols + j].clone());
                    }
                }
                Component {
                    order: comp.order,
                    entries,
                }
            })
            .collect();
        Self {
            norm: self.norm.clone(),
            rows: self.cols,
            cols: self.rows,
            top: self.top,
            comps,
        }
    }

    /// Largest coefficient magnitude over all degrees.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .map(Component::max_abs)
            .fold(0.0, f64::max)
    }

    /// `true` when every component down to `bottom` vanishes.
    pub fn is_zero_to(&self, bottom: i32) -> bool {
        self.components()
            .filter(|(m, _)| *m >= bottom)
            .all(|(_, c)| c.is_zero())
    }

    /// Componentwise comparison over the common degree range and the smaller
    /// truncation order of each pair of components.
    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let top = self.top.min(other.top);
        let bottom = self.bottom().max(other.bottom());
        let len = self.rows * self.cols;
        let empty = Component::zero(len, usize::MAX);
        for m in bottom..=self.top.max(other.top) {
            let a = self.component(m).unwrap_or(&empty);
            let b = other.component(m).unwrap_or(&empty);
            if m > top && a.is_zero() && b.is_zero() {
                continue;
            }
            let order = a.order.min(b.order);
            for (ea, eb) in a.entries.iter().zip(&b.entries) {
                for key in ea.keys().chain(eb.keys()) {
                    let ja = ea.get(key).map(|j| j.truncate(order));
                    let jb = eb.get(key).map(|j| j.truncate(order));
                    let same = match (ja, jb) {
                        (Some(x), Some(y)) => x.close_to(&y, tol),
                        (Some(x), None) | (None, Some(x)) => x.max_abs() <= tol,
                        (None, None) => true,
                    };
                    if !same {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Entrywise conversion of the coefficients to another scalar field.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Result<SymbolSeries<T>> {
        let norm = Arc::new(self.norm.map(f)?);
        let comps = self
            .comps
            .iter()
            .map(|c| Component {
                order: c.order,
                entries: c
                    .entries
                    .iter()
                    .map(|e| e.iter().map(|(k, j)| (*k, j.map(f))).collect())
                    .collect(),
            })
            .collect();
        SymbolSeries::from_components(norm, self.rows, self.cols, self.top, comps)
    }

    /// Stacks symbols laid out as a block matrix (all over the same norm).
    pub fn assemble(blocks: &[Vec<&Self>]) -> Result<Self> {
        let first = blocks
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| Error::ShapeMismatch("empty block layout".into()))?;
        let row_heights: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let col_widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        let rows: usize = row_heights.iter().sum();
        let cols: usize = col_widths.iter().sum();
        let top = blocks.iter().flatten().map(|b| b.top).max().unwrap();
        let bottom = blocks.iter().flatten().map(|b| b.bottom()).min().unwrap();
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != col_widths.len() {
                return Err(Error::ShapeMismatch("ragged block layout".into()));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(Error::ShapeMismatch("block sizes disagree".into()));
                }
                first.check_norm(b)?;
            }
        }
        let mut comps = Vec::new();
        for m in (bottom..=top).rev() {
            let mut comp = Component::zero(rows * cols, usize::MAX);
            let mut r0 = 0;
            for (bi, row) in blocks.iter().enumerate() {
                let mut c0 = 0;
                for (bj, b) in row.iter().enumerate() {
                    if let Some(bc) = b.component(m) {
                        comp.order = comp.order.min(bc.order);
                        for i in 0..b.rows {
                            for j in 0..b.cols {
                                comp.entries[(r0 + i) * cols + c0 + j] =
                                    bc.entries[i * b.cols + j].clone();
                            }
                        }
                    }
                    c0 += col_widths[bj];
                }
                r0 += row_heights[bi];
            }
            if comp.order == usize::MAX {
                comp.order = first.norm.order();
            }
            let order = comp.order;
            comps.push(comp.truncate(order));
        }
        Self::from_components(first.norm.clone(), rows, cols, top, comps)
    }
}
