use std::collections::BTreeMap;

use num_complex::Complex64;

use super::series::{Component, SymbolSeries};
use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::scalar::Scalar;

/// A jet-valued number `p + s·√q₀` with a fixed positive rational `q₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurdJet<S: Scalar> {
    pub rational: Jet3<S>,
    pub surd: Jet3<S>,
    pub q0: S,
}

impl<S: Scalar> SurdJet<S> {
    pub fn zero(order: usize, q0: S) -> Self {
        Self {
            rational: Jet3::zero(order),
            surd: Jet3::zero(order),
            q0,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            rational: &self.rational + &o.rational,
            surd: &self.surd + &o.surd,
            q0: self.q0.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            rational: &self.rational - &o.rational,
            surd: &self.surd - &o.surd,
            q0: self.q0.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut rational = self.rational.mul(&o.rational);
        rational.add_scaled(&self.q0, &self.surd.mul(&o.surd));
        let surd = &self.rational.mul(&o.surd) + &self.surd.mul(&o.rational);
        Self {
            rational,
            surd,
            q0: self.q0.clone(),
        }
    }

    pub fn to_f64(&self, x: [f64; 3]) -> f64 {
        self.rational.eval(x) + self.surd.eval(x) * self.q0.to_f64().sqrt()
    }
}

/// A complex jet-surd `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurdComplex<S: Scalar> {
    pub re: SurdJet<S>,
    pub im: SurdJet<S>,
}

impl<S: Scalar> SurdComplex<S> {
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn to_complex(&self, x: [f64; 3]) -> Complex64 {
        Complex64::new(self.re.to_f64(x), self.im.to_f64(x))
    }
}

fn check_covector(xi: [f64; 2]) -> Result<()> {
    if xi[0] == 0.0 && xi[1] == 0.0 {
        Err(Error::ZeroCovector)
    } else {
        Ok(())
    }
}

/// `i^k` for k ≥ 0.
fn i_power(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn eval_component<S: Scalar>(
    comp: &Component<S>,
    m: i32,
    x: [f64; 3],
    xi: [f64; 2],
    r: f64,
) -> Vec<Complex64> {
    comp.entries
        .iter()
        .map(|e| {
            e.iter()
                .map(|(&(a, b), c)| {
                    let p = m - a as i32 - b as i32;
                    let mono = xi[0].powi(a as i32) * xi[1].powi(b as i32) * r.powi(p);
                    i_power(a as usize + b as usize) * (c.eval(x) * mono)
                })
                .sum()
        })
        .collect()
}

impl<S: Scalar> SymbolSeries<S> {
    /// `|ξ|_g` at a point, from the Taylor polynomial of the norm.
    pub fn xi_norm(&self, x: [f64; 3], xi: [f64; 2]) -> f64 {
        let g = self.norm().inverse();
        (g[0].eval(x) * xi[0] * xi[0]
            + 2.0 * g[1].eval(x) * xi[0] * xi[1]
            + g[2].eval(x) * xi[1] * xi[1])
            .sqrt()
    }

    /// Numeric value of the degree-`m` component at `(x, ξ)`, row-major.
    ///
    /// Coefficients and the norm are evaluated as Taylor polynomials, so
    /// identities that hold to the truncation order are exact at `x = 0`
    /// and accurate to `O(|x|^{K+1})` elsewhere.
    pub fn eval_degree(&self, m: i32, x: [f64; 3], xi: [f64; 2]) -> Result<Vec<Complex64>> {
        check_covector(xi)?;
        let comp = self.component(m).ok_or(Error::InsufficientDepth {
            needed: m,
            bottom: self.bottom(),
        })?;
        Ok(eval_component(comp, m, x, xi, self.xi_norm(x, xi)))
    }

    /// Numeric value of the whole series at `(x, ξ)`, row-major.
    pub fn eval(&self, x: [f64; 3], xi: [f64; 2]) -> Result<Vec<Complex64>> {
        check_covector(xi)?;
        let r = self.xi_norm(x, xi);
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows() * self.cols()];
        for (m, comp) in self.components() {
            for (o, v) in out.iter_mut().zip(eval_component(comp, m, x, xi, r)) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Exact value of the degree-`m` component at a rational covector, as a
    /// jet in `x`: each entry is returned as `re + i·im` with both parts of
    /// the form `p(x) + s(x)·√q₀`, `q₀ = |ξ|²_g(0)`.
    pub fn eval_surd(&self, m: i32, xi: [S; 2]) -> Result<Vec<SurdComplex<S>>> {
        if xi[0].is_zero() && xi[1].is_zero() {
            return Err(Error::ZeroCovector);
        }
        let comp = self.component(m).ok_or(Error::InsufficientDepth {
            needed: m,
            bottom: self.bottom(),
        })?;
        let order = comp.order;
        let g = self.norm().inverse();
        let two = S::from_int(2);
        let mut q = g[0].scale(&(xi[0].clone() * xi[0].clone())).truncate(order);
        q.add_scaled(&(two * xi[0].clone() * xi[1].clone()), &g[1]);
        q.add_scaled(&(xi[1].clone() * xi[1].clone()), &g[2]);
        let q0 = q.constant_term().clone();
        // r = √q₀ · j with j = (q/q₀)^{1/2} a rational jet.
        let j = q.scale(&(S::one() / q0.clone())).sqrt()?;
        let j_inv = j.reciprocal()?;
        let mut r_pow: BTreeMap<i32, (Jet3<S>, bool)> = BTreeMap::new();
        let mut power = |p: i32| -> (Jet3<S>, bool) {
            r_pow
                .entry(p)
                .or_insert_with(|| {
                    // r^p = q₀^{⌊p/2⌋} j^p · (√q₀ if p is odd)
                    let base = if p >= 0 { &j } else { &j_inv };
                    let mut jp = Jet3::one(order);
                    for _ in 0..p.unsigned_abs() {
                        jp = jp.mul(base);
                    }
                    let half = p.div_euclid(2);
                    let mut scale = S::one();
                    for _ in 0..half.unsigned_abs() {
                        scale = scale * q0.clone();
                    }
                    if half < 0 {
                        scale = S::one() / scale;
                    }
                    (jp.scale(&scale), p.rem_euclid(2) == 1)
                })
                .clone()
        };
        let mut out = Vec::with_capacity(comp.entries.len());
        for e in &comp.entries {
            let mut val = SurdComplex {
                re: SurdJet::zero(order, q0.clone()),
                im: SurdJet::zero(order, q0.clone()),
            };
            for (&(a, b), c) in e {
                let p = m - a as i32 - b as i32;
                let mut mono = S::one();
                for _ in 0..a {
                    mono = mono * xi[0].clone();
                }
                for _ in 0..b {
                    mono = mono * xi[1].clone();
                }
                let k = a as usize + b as usize;
                if k % 4 >= 2 {
                    mono = -mono;
                }
                let (rp, odd) = power(p);
                let term = c.mul(&rp).scale(&mono);
                let part = if k % 2 == 0 { &mut val.re } else { &mut val.im };
                if odd {
                    part.surd = &part.surd + &term;
                } else {
                    part.rational = &part.rational + &term;
                }
            }
            out.push(val);
        }
        Ok(out)
    }
}

/// Canonical ω-coefficients of one homogeneous component at the base point.
///
/// With `ω = ξ/|ξ|_g` the degree-`m` component equals `|ξ|^m` times a
/// polynomial in ω; after rewriting `ω₁²` through `g^{αβ}ω_αω_β = 1` the
/// representation `Σ c_{ab} (iω₁)^a (iω₂)^b` with `a ∈ {0, 1}` is unique.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaCoefficients<S: Scalar> {
    pub degree: i32,
    /// Per matrix entry, `(a, b) → c_{ab}` as a tangential jet.
    pub entries: Vec<BTreeMap<(u8, u16), Jet3<S>>>,
}

impl<S: Scalar> OmegaCoefficients<S> {
    /// Coefficient of `(iω₁)^a (iω₂)^b` in entry `k`, zero when absent.
    pub fn get(&self, k: usize, a: u8, b: u16) -> Option<&Jet3<S>> {
        self.entries[k].get(&(a, b))
    }

    /// Symmetric rank-`rank` tensor of entry `k`, flattened over index
    /// tuples in `{0, 1}^rank` (first index most significant): the canonical
    /// monomials of total degree `rank` spread evenly over the permutations
    /// of their indices, so that `Σ T_{i…} (iω)_{i₁}⋯(iω)_{i_r}` reproduces
    /// them.
    pub fn tensor(&self, k: usize, rank: usize) -> Vec<Jet3<S>> {
        let order = self.entries[k].values().map(Jet3::order).min().unwrap_or(0);
        let mut out = vec![Jet3::zero(order); 1 << rank];
        for (&(a, b), c) in &self.entries[k] {
            if a as usize + b as usize != rank {
                continue;
            }
            let mut ways: i64 = 1;
            for t in 0..a as i64 {
                ways = ways * (rank as i64 - t) / (t + 1);
            }
            let share = c.scale(&S::from_ratio(1, ways));
            for (idx, slot) in out.iter_mut().enumerate() {
                if (rank - idx.count_ones() as usize) == a as usize {
                    *slot = &*slot + &share;
                }
            }
        }
        out
    }
}

/// Extracts the canonical ω-coefficients of the degree-`m` component,
/// restricted to the boundary, requiring polynomial degree at most
/// `max_degree` in ω.
pub fn omega_coeffs<S: Scalar>(
    s: &SymbolSeries<S>,
    m: i32,
    max_degree: usize,
) -> Result<OmegaCoefficients<S>> {
    let comp = s.component(m).ok_or(Error::InsufficientDepth {
        needed: m,
        bottom: s.bottom(),
    })?;
    let mut entries = Vec::with_capacity(comp.entries.len());
    for e in &comp.entries {
        let mut out = BTreeMap::new();
        for (&(a, b), c) in e {
            if a as usize + b as usize > max_degree {
                return Err(Error::NotPolynomial { max_degree });
            }
            let c = c.restrict_boundary();
            if !c.is_zero() {
                out.insert((a, b), c);
            }
        }
        entries.push(out);
    }
    Ok(OmegaCoefficients { degree: m, entries })
}
