use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest truncation order supported by the index tables.
pub const MAX_ORDER: usize = 12;

/// Exponent triple `(a1, a2, an)` of a monomial `(x¹)^a1 (x²)^a2 (xⁿ)^an`.
pub type MultiIndex = [usize; 3];

/// Number of monomials in three variables of total degree at most `order`.
pub const fn monomial_count(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

/// Position of a multi-index in graded order: degree first, then decreasing
/// `a1`, then decreasing `a2`.
pub fn monomial_index(a: MultiIndex) -> usize {
    let d = a[0] + a[1] + a[2];
    let s = d - a[0];
    d * (d + 1) * (d + 2) / 6 + s * (s + 1) / 2 + (s - a[1])
}

struct Tables {
    exps: Vec<MultiIndex>,
    degree: Vec<usize>,
    sum: Vec<u32>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let n = monomial_count(MAX_ORDER);
        let mut exps = vec![[0; 3]; n];
        for d in 0..=MAX_ORDER {
            for a1 in (0..=d).rev() {
                for a2 in (0..=d - a1).rev() {
                    let e = [a1, a2, d - a1 - a2];
                    exps[monomial_index(e)] = e;
                }
            }
        }
        let degree: Vec<usize> = exps.iter().map(|e| e[0] + e[1] + e[2]).collect();
        let mut sum = vec![u32::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                if degree[i] + degree[j] <= MAX_ORDER {
                    let (a, b) = (exps[i], exps[j]);
                    sum[i * n + j] = monomial_index([a[0] + b[0], a[1] + b[1], a[2] + b[2]]) as u32;
                }
            }
        }
        Tables { exps, degree, sum }
    })
}

/// Multi-index stored at a graded position.
pub fn exponent_at(index: usize) -> MultiIndex {
    tables().exps[index]
}

/// Truncated Taylor series in `(x¹, x², xⁿ)` about the origin.
///
/// `order` is the truncation order: coefficients of total degree above it are
/// not stored and are unknown. Sums and products carry the smaller order of
/// their operands, derivatives lose one order.
#[derive(Clone, PartialEq)]
pub struct Jet3<S> {
    order: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet3<S> {
    pub fn zero(order: usize) -> Self {
        assert!(
            order <= MAX_ORDER,
            "truncation order {order} exceeds {MAX_ORDER}"
        );
        Self {
            order,
            coeffs: vec![S::zero(); monomial_count(order)],
        }
    }

    pub fn constant(value: S, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    pub fn one(order: usize) -> Self {
        Self::constant(S::one(), order)
    }

    /// The coordinate function `x^i` (`i` = 0, 1, 2 for x¹, x², xⁿ).
    pub fn variable(i: usize, order: usize) -> Self {
        let mut j = Self::zero(order);
        if order >= 1 {
            let mut e = [0; 3];
            e[i] = 1;
            j.coeffs[monomial_index(e)] = S::one();
        }
        j
    }

    /// Builds a jet from `(multi-index, value)` pairs; entries above `order`
    /// are dropped.
    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, S)>>(order: usize, terms: I) -> Self {
        let mut j = Self::zero(order);
        for (e, v) in terms {
            if e[0] + e[1] + e[2] <= order {
                j.coeffs[monomial_index(e)] += &v;
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, e: MultiIndex) -> S {
        if e[0] + e[1] + e[2] > self.order {
            return S::zero();
        }
        self.coeffs[monomial_index(e)].clone()
    }

    pub fn set_coeff(&mut self, e: MultiIndex, value: S) {
        assert!(
            e[0] + e[1] + e[2] <= self.order,
            "multi-index above truncation order"
        );
        self.coeffs[monomial_index(e)] = value;
    }

    pub fn constant_term(&self) -> &S {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Nonzero coefficients with their multi-indices, in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &S)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (exponent_at(i), c))
    }

    /// Drops every coefficient above `order` (idempotent).
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            order,
            coeffs: self.coeffs[..monomial_count(order)].to_vec(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn add_scalar(&self, s: &S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `self += c * other`, truncated to the smaller order.
    pub fn add_scaled(&mut self, c: &S, other: &Self) {
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a.add_mul(c, b);
        }
    }

    /// Product truncated at the smaller order of the operands.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = vec![S::zero(); monomial_count(order)];
        mul_into(&mut out, order, &self.coeffs, &other.coeffs);
        Self { order, coeffs: out }
    }

    /// `self += a * b` without materializing the product.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            *self = self.truncate(order);
        }
        mul_into(&mut self.coeffs, order, &a.coeffs, &b.coeffs);
    }

    /// Cauchy product of two jets with the same truncation order.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(self.mul(other))
    }

    /// Multiplicative inverse, `self · result = 1` to the truncation order.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0].clone();
        if a0.is_zero() {
            return Err(Error::SingularJet);
        }
        let inv0 = S::one() / a0;
        // 1/a = inv0 · Σ (−u)^k with u = inv0·a − 1, a nilpotent jet.
        let mut neg_u = self.scale(&-inv0.clone());
        neg_u.coeffs[0] = S::zero();
        let mut sum = Self::one(self.order);
        let mut power = Self::one(self.order);
        for _ in 0..self.order {
            power = power.mul(&neg_u);
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&inv0))
    }

    /// `(1 + u)^q` for a jet `u` with zero constant term and rational `q`.
    fn binomial_series(u: &Self, q_num: i64, q_den: i64) -> Self {
        let q = S::from_ratio(q_num, q_den);
        let mut sum = Self::one(u.order);
        let mut power = Self::one(u.order);
        let mut coef = S::one();
        for k in 0..u.order {
            power = power.mul(u);
            if power.is_zero() {
                break;
            }
            coef = coef * (q.clone() - S::from_int(k as i64)) / S::from_int(k as i64 + 1);
            sum.add_scaled(&coef, &power);
        }
        sum
    }

    /// Square root with positive constant term. Exact scalars require the
    /// constant term to be a rational square.
    pub fn sqrt(&self) -> Result<Self> {
        self.rational_power(1, 2)
    }

    /// `self^(num/den)` via the binomial series about the constant term;
    /// requires an exact `den`-th root of the constant term for `den` = 1, 2.
    pub fn rational_power(&self, num: i64, den: i64) -> Result<Self> {
        let a0 = self.coeffs[0].clone();
        if a0.is_zero() {
            return Err(Error::SingularJet);
        }
        let root = match den {
            1 => a0.clone(),
            2 => a0
                .sqrt_checked()
                .ok_or_else(|| Error::NotASquare(a0.to_text()))?,
            _ => {
                return Err(Error::Inconsistent(format!(
                    "unsupported root degree {den}"
                )))
            }
        };
        let mut lead = S::one();
        for _ in 0..num.unsigned_abs() {
            lead = lead * root.clone();
        }
        if num < 0 {
            lead = S::one() / lead;
        }
        let mut u = self.scale(&(S::one() / a0));
        u.coeffs[0] = S::zero();
        Ok(Self::binomial_series(&u, num, den).scale(&lead))
    }

    /// Exponential of a jet with zero constant term (the series terminates).
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Inconsistent(
                "exponential needs a zero constant term".into(),
            ));
        }
        let mut sum = Self::one(self.order);
        let mut term = Self::one(self.order);
        for k in 1..=self.order {
            term = term.mul(self).scale(&(S::one() / S::from_int(k as i64)));
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum)
    }

    /// Partial derivative in variable `i`; the result has order one lower.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::OrderTooLow {
                what: "jet derivative",
                needed: 1,
                available: 0,
            });
        }
        let order = self.order - 1;
        let mut out = vec![S::zero(); monomial_count(order)];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut e = exponent_at(k);
            e[i] += 1;
            let factor = e[i] as i64;
            let c = &self.coeffs[monomial_index(e)];
            if !c.is_zero() {
                *slot = c.clone() * S::from_int(factor);
            }
        }
        Ok(Self { order, coeffs: out })
    }

    /// Restriction to the boundary `xⁿ = 0`: drops every monomial containing
    /// xⁿ.
    pub fn restrict_boundary(&self) -> Self {
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            if exponent_at(k)[2] > 0 {
                *c = S::zero();
            }
        }
        out
    }

    pub fn depends_on_normal(&self) -> bool {
        self.terms().any(|(e, _)| e[2] > 0)
    }

    /// Evaluates the Taylor polynomial at a point.
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let mut powers = [[1.0; MAX_ORDER + 1]; 3];
        for (v, row) in powers.iter_mut().enumerate() {
            for k in 1..=self.order {
                row[k] = row[k - 1] * x[v];
            }
        }
        self.terms()
            .map(|(e, c)| c.to_f64() * powers[0][e[0]] * powers[1][e[1]] * powers[2][e[2]])
            .sum()
    }

    /// Evaluates the Taylor polynomial at a point with scalar coordinates.
    pub fn eval_scalar(&self, x: &[S; 3]) -> S {
        let mut acc = S::zero();
        for (e, c) in self.terms() {
            let mut t = c.clone();
            for v in 0..3 {
                for _ in 0..e[v] {
                    t = t * x[v].clone();
                }
            }
            acc += t;
        }
        acc
    }

    /// Entrywise conversion to another scalar field.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet3<T> {
        Jet3 {
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Coefficientwise tolerant comparison up to the smaller order.
    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        let n = monomial_count(self.order.min(other.order));
        self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .all(|(a, b)| a.close_to(b, tol))
    }
}

fn mul_into<S: Scalar>(out: &mut [S], order: usize, a: &[S], b: &[S]) {
    let t = tables();
    let n = t.exps.len();
    let na = monomial_count(order).min(a.len());
    let nb = monomial_count(order).min(b.len());
    for (i, ai) in a[..na].iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let budget = order - t.degree[i];
        let jmax = monomial_count(budget).min(nb);
        let row = &t.sum[i * n..i * n + jmax];
        for (j, bj) in b[..jmax].iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[row[j] as usize].add_mul(ai, bj);
        }
    }
}

use num_traits::Zero;

impl<S: Scalar> std::ops::Add for &Jet3<S> {
    type Output = Jet3<S>;
    fn add(self, rhs: Self) -> Jet3<S> {
        let order = self.order.min(rhs.order);
        let n = monomial_count(order);
        Jet3 {
            order,
            coeffs: self.coeffs[..n]
                .iter()
                .zip(&rhs.coeffs[..n])
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> std::ops::Sub for &Jet3<S> {
    type Output = Jet3<S>;
    fn sub(self, rhs: Self) -> Jet3<S> {
        let order = self.order.min(rhs.order);
        let n = monomial_count(order);
        Jet3 {
            order,
            coeffs: self.coeffs[..n]
                .iter()
                .zip(&rhs.coeffs[..n])
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> std::ops::Mul for &Jet3<S> {
    type Output = Jet3<S>;
    fn mul(self, rhs: Self) -> Jet3<S> {
        Jet3::mul(self, rhs)
    }
}

impl<S: Scalar> std::ops::Neg for &Jet3<S> {
    type Output = Jet3<S>;
    fn neg(self) -> Jet3<S> {
        Jet3 {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for Jet3<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet3[K={}](", self.order)?;
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}·x^{:?}", e)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type J = Jet3<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn index_round_trip() {
        for k in 0..monomial_count(MAX_ORDER) {
            assert_eq!(monomial_index(exponent_at(k)), k);
        }
        assert_eq!(monomial_index([0, 0, 0]), 0);
        assert_eq!(monomial_count(6), 84);
    }

    #[test]
    fn difference_of_squares() {
        let one = J::one(2);
        let xn = J::variable(2, 2);
        let p = (&one + &xn).product(&(&one - &xn)).unwrap();
        let expected = J::from_terms(2, [([0, 0, 0], q(1, 1)), ([0, 0, 2], q(-1, 1))]);
        assert_eq!(p, expected);
    }

    #[test]
    fn truncation_kills_cubic() {
        let x = J::variable(0, 2);
        let y = J::variable(1, 2);
        let z = J::variable(2, 2);
        assert!(x.mul(&y).mul(&z).is_zero());
    }

    #[test]
    fn mismatched_orders_are_rejected() {
        let a = J::one(2);
        let b = J::one(3);
        assert_eq!(
            a.product(&b),
            Err(Error::OrderMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn geometric_series() {
        let a = &J::one(2) + &J::variable(2, 2);
        let inv = a.reciprocal().unwrap();
        let expected = J::from_terms(
            2,
            [
                ([0, 0, 0], q(1, 1)),
                ([0, 0, 1], q(-1, 1)),
                ([0, 0, 2], q(1, 1)),
            ],
        );
        assert_eq!(inv, expected);
        assert_eq!(J::one(3).reciprocal().unwrap(), J::one(3));
        assert_eq!(J::zero(2).reciprocal(), Err(Error::SingularJet));
    }

    #[test]
    fn square_root_of_a_square() {
        let a = J::from_terms(
            4,
            [
                ([0, 0, 0], q(9, 4)),
                ([1, 0, 1], q(3, 1)),
                ([0, 2, 0], q(-1, 2)),
            ],
        );
        let s = a.mul(&a);
        let r = s.sqrt().unwrap();
        assert_eq!(r, a);
        assert!(matches!(
            J::constant(q(2, 1), 3).sqrt(),
            Err(Error::NotASquare(_))
        ));
    }

    #[test]
    fn exponential_of_linear_jet() {
        let z = J::variable(2, 4);
        let e = z.exp_nilpotent().unwrap();
        for k in 0..=4 {
            let mut fact = 1i64;
            for i in 1..=k {
                fact *= i as i64;
            }
            assert_eq!(e.coeff([0, 0, k]), q(1, fact));
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let a = J::from_terms(3, [([2, 1, 0], q(5, 1)), ([0, 0, 3], q(1, 1))]);
        let d = a.derivative(0).unwrap();
        assert_eq!(d.order(), 2);
        assert_eq!(d.coeff([1, 1, 0]), q(10, 1));
        assert!(J::one(0).derivative(1).is_err());
    }

    #[test]
    fn restriction_drops_normal_terms() {
        let a = J::from_terms(3, [([1, 0, 0], q(1, 1)), ([0, 1, 1], q(2, 1))]);
        let r = a.restrict_boundary();
        assert!(!r.depends_on_normal());
        assert_eq!(r.coeff([1, 0, 0]), q(1, 1));
    }
}
