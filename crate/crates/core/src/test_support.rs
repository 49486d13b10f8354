//! Helpers shared by the unit tests.

use crate::jets::{Jet3, MetricJet, N};
use crate::scalar::{Rational, Scalar};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Metric whose inverse tangential block is `G + xⁿ u + ½(xⁿ)² v`, exactly.
pub fn polynomial_inverse_metric(
    order: usize,
    g: [i64; 3],
    u: [i64; 3],
    v: [i64; 3],
) -> MetricJet<Rational> {
    let xn = Jet3::<Rational>::variable(N, order);
    let xn2 = xn.mul(&xn);
    let entry = |k: usize| {
        let mut j = Jet3::constant(q(g[k], 1), order);
        j.add_scaled(&q(u[k], 1), &xn);
        j.add_scaled(&q(v[k], 2), &xn2);
        j
    };
    MetricJet::from_inverse(entry(0), entry(1), entry(2)).unwrap()
}
