use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::norm::Norm;
use super::series::{Component, Entry, SymbolSeries};
use crate::error::{Error, Result};
use crate::jets::{Jet3, MultiIndex};
use crate::scalar::Scalar;

/// Serialized jet: `"a1,a2,an" → coefficient text`, nonzero terms only.
pub type JetDoc = BTreeMap<String, String>;

/// One monomial `c(x) · ζ₁^a ζ₂^b |ξ|^p` with `ζ = iξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub a: u8,
    pub b: u16,
    pub p: i32,
    pub coeff: JetDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDoc {
    pub order: usize,
    /// Row-major matrix entries.
    pub entries: Vec<Vec<TermDoc>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormDoc {
    pub order: usize,
    pub restricted: bool,
    /// `[g^{11}, g^{12}, g^{22}]`.
    pub g_inv: Vec<JetDoc>,
}

/// JSON form of a [`SymbolSeries`]; object keys serialize in sorted order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolDoc {
    pub scalar: String,
    /// Monomials are written in `ζ = iξ`, so `ξ₁^a ξ₂^b` carries `i^{a+b}`.
    pub basis: String,
    pub rows: usize,
    pub cols: usize,
    pub top: i32,
    pub bottom: i32,
    pub norm: NormDoc,
    /// Degree (as text) → component.
    pub degrees: BTreeMap<String, ComponentDoc>,
}

pub fn jet_to_doc<S: Scalar>(j: &Jet3<S>) -> JetDoc {
    j.terms()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (format!("{},{},{}", e[0], e[1], e[2]), c.to_text()))
        .collect()
}

pub fn jet_from_doc<S: Scalar>(doc: &JetDoc, order: usize) -> Result<Jet3<S>> {
    let mut terms: Vec<(MultiIndex, S)> = Vec::with_capacity(doc.len());
    for (k, v) in doc {
        let parts: Vec<usize> = k
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format(format!("bad multi-index '{k}'")))?;
        let [a1, a2, an] = parts[..] else {
            return Err(Error::Format(format!(
                "multi-index '{k}' needs three entries"
            )));
        };
        if a1 + a2 + an > order {
            return Err(Error::Format(format!("term '{k}' exceeds order {order}")));
        }
        let c = S::parse_text(v).ok_or_else(|| Error::Format(format!("bad coefficient '{v}'")))?;
        terms.push(([a1, a2, an], c));
    }
    Ok(Jet3::from_terms(order, terms))
}

impl<S: Scalar> SymbolSeries<S> {
    pub fn to_doc(&self) -> SymbolDoc {
        let norm = self.norm();
        let degrees = self
            .components()
            .map(|(m, comp)| {
                let entries = comp
                    .entries
                    .iter()
                    .map(|e| {
                        e.iter()
                            .map(|(&(a, b), c)| TermDoc {
                                a,
                                b,
                                p: m - a as i32 - b as i32,
                                coeff: jet_to_doc(c),
                            })
                            .collect()
                    })
                    .collect();
                (
                    m.to_string(),
                    ComponentDoc {
                        order: comp.order,
                        entries,
                    },
                )
            })
            .collect();
        SymbolDoc {
            scalar: S::MODE.to_string(),
            basis: "zeta".to_string(),
            rows: self.rows(),
            cols: self.cols(),
            top: self.top(),
            bottom: self.bottom(),
            norm: NormDoc {
                order: norm.order(),
                restricted: norm.is_restricted(),
                g_inv: norm.inverse().iter().map(jet_to_doc).collect(),
            },
            degrees,
        }
    }

    pub fn from_doc(doc: &SymbolDoc) -> Result<Self> {
        if doc.scalar != S::MODE {
            return Err(Error::Format(format!(
                "document holds '{}' scalars, expected '{}'",
                doc.scalar,
                S::MODE
            )));
        }
        if doc.basis != "zeta" {
            return Err(Error::Format(format!("unknown basis '{}'", doc.basis)));
        }
        if doc.bottom > doc.top {
            return Err(Error::Format("bottom degree above top degree".into()));
        }
        let [g11, g12, g22] = &doc.norm.g_inv[..] else {
            return Err(Error::Format(
                "norm needs three inverse-metric entries".into(),
            ));
        };
        let order = doc.norm.order;
        let inv = [
            jet_from_doc(g11, order)?,
            jet_from_doc(g12, order)?,
            jet_from_doc(g22, order)?,
        ];
        let norm = Arc::new(Norm::from_parts(inv, doc.norm.restricted)?);
        let len = doc.rows * doc.cols;
        let mut comps = Vec::new();
        for m in (doc.bottom..=doc.top).rev() {
            let Some(cd) = doc.degrees.get(&m.to_string()) else {
                comps.push(Component::zero(len, norm.order()));
                continue;
            };
            if cd.entries.len() != len {
                return Err(Error::Format(format!(
                    "degree {m} has the wrong entry count"
                )));
            }
            let mut entries = Vec::with_capacity(len);
            for terms in &cd.entries {
                let mut e = Entry::new();
                for t in terms {
                    if t.a as i32 + t.b as i32 + t.p != m {
                        return Err(Error::Format(format!(
                            "term ({}, {}, {}) is not homogeneous of degree {m}",
                            t.a, t.b, t.p
                        )));
                    }
                    e.insert((t.a, t.b), jet_from_doc(&t.coeff, cd.order)?);
                }
                entries.push(e);
            }
            comps.push(Component {
                order: cd.order,
                entries,
            });
        }
        Self::from_components(norm, doc.rows, doc.cols, doc.top, comps)
    }

    /// Pretty JSON text with sorted keys.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("symbol documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SymbolDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

/// A symbol together with a free-form header object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeaderedDoc {
    pub header: BTreeMap<String, Value>,
    pub symbol: SymbolDoc,
}
