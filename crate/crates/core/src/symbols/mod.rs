//! Graded matrix-valued pseudodifferential symbols on the two-dimensional
//! boundary with jet coefficients.
//!
//! A symbol is stored as a finite sum of homogeneous components. Each
//! component entry is a sum of monomials `c(x) ζ₁^a ζ₂^b r^p`, where
//! `ζ = iξ` and `r = |ξ|_g = (g^{αβ}(x) ξ_α ξ_β)^{1/2}`. In these variables
//! every symbol arising from real operators has real coefficients, and
//! rewriting `ζ₁²` through `r² = −g^{αβ}ζ_αζ_β` gives a canonical form in
//! which equality is coefficientwise equality.

mod calculus;
mod eval;
mod io;
mod norm;
mod series;

use std::ops::Range;

pub use eval::{omega_coeffs, OmegaCoefficients, SurdComplex, SurdJet};
pub use io::{
    jet_from_doc, jet_to_doc, ComponentDoc, HeaderedDoc, JetDoc, NormDoc, SymbolDoc, TermDoc,
};
pub use norm::Norm;
pub use series::{Component, Entry, Key, SymbolSeries};

pub(crate) use calculus::{compose_component, dx_component, mul_components, DerivativeCache};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const TANGENTIAL: Range<usize> = 0..2;
const NORMAL: Range<usize> = 2..3;

/// Tangential/normal views of a 3×3 symbol.
#[derive(Clone, Debug)]
pub struct BlockSymbol<S: Scalar> {
    /// 2×2.
    pub tt: SymbolSeries<S>,
    /// 2×1.
    pub tn: SymbolSeries<S>,
    /// 1×2.
    pub nt: SymbolSeries<S>,
    /// 1×1.
    pub nn: SymbolSeries<S>,
}

impl<S: Scalar> BlockSymbol<S> {
    pub fn split(s: &SymbolSeries<S>) -> Result<Self> {
        if s.rows() != 3 || s.cols() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "block split needs a 3×3 symbol, got {}×{}",
                s.rows(),
                s.cols()
            )));
        }
        Ok(Self {
            tt: s.block(TANGENTIAL, TANGENTIAL),
            tn: s.block(TANGENTIAL, NORMAL),
            nt: s.block(NORMAL, TANGENTIAL),
            nn: s.block(NORMAL, NORMAL),
        })
    }

    pub fn reassemble(&self) -> Result<SymbolSeries<S>> {
        SymbolSeries::assemble(&[vec![&self.tt, &self.tn], vec![&self.nt, &self.nn]])
    }
}
