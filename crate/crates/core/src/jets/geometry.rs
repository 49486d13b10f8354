use super::jet::Jet3;
use super::metric::{MetricJet, N};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Christoffel symbols indexed `[k][i][j]` for `Γ^k_ij`.
pub type Christoffel<S> = [[[Jet3<S>; 3]; 3]; 3];

/// Curvature data derived from a metric jet.
#[derive(Clone, Debug)]
pub struct GeometryCache<S: Scalar> {
    /// `Γ^k_ij`, order `K − 1`.
    pub christoffel: Christoffel<S>,
    /// Mixed Ricci tensor `Ric^i_j` stored as `ricci[i][j]`, order `K − 2`.
    pub ricci: [[Jet3<S>; 3]; 3],
    /// `𝒟 = g^{αβ}Γ^n_αβ`, order `K − 1`.
    pub mean_curvature: Jet3<S>,
}

impl<S: Scalar> GeometryCache<S> {
    pub fn new(m: &MetricJet<S>) -> Result<Self> {
        let christoffel = christoffel(m)?;
        let ricci = ricci_from(m, &christoffel)?;
        let mean_curvature = mean_curvature_from(m, &christoffel)?;
        Ok(Self {
            christoffel,
            ricci,
            mean_curvature,
        })
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet3<S> {
        &self.christoffel[k][i][j]
    }
}

fn require_order<S: Scalar>(m: &MetricJet<S>, needed: usize, what: &'static str) -> Result<()> {
    if m.order() < needed {
        return Err(Error::OrderTooLow {
            what,
            needed,
            available: m.order(),
        });
    }
    Ok(())
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn christoffel<S: Scalar>(m: &MetricJet<S>) -> Result<Christoffel<S>> {
    require_order(m, 1, "Christoffel symbols")?;
    let order = m.order() - 1;
    let mut dg: Vec<Vec<Vec<Jet3<S>>>> = Vec::with_capacity(3);
    for l in 0..3 {
        let mut per = Vec::with_capacity(3);
        for i in 0..3 {
            let mut row = Vec::with_capacity(3);
            for j in 0..3 {
                row.push(m.g(i, j).derivative(l)?);
            }
            per.push(row);
        }
        dg.push(per);
    }
    let half = S::from_ratio(1, 2);
    let mut lowered: Vec<Vec<Vec<Jet3<S>>>> = vec![vec![vec![Jet3::zero(order); 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let t = &(&dg[i][j][l] + &dg[j][i][l]) - &dg[l][i][j];
                lowered[l][i][j] = t.scale(&half);
                lowered[l][j][i] = lowered[l][i][j].clone();
            }
        }
    }
    let mut out: Christoffel<S> = std::array::from_fn(|_| {
        std::array::from_fn(|_| std::array::from_fn(|_| Jet3::zero(order)))
    });
    for k in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut acc = Jet3::zero(order);
                for (l, low) in lowered.iter().enumerate() {
                    if !m.g_inv(k, l).is_zero() {
                        acc.add_product(m.g_inv(k, l), &low[i][j]);
                    }
                }
                out[k][j][i] = acc.clone();
                out[k][i][j] = acc;
            }
        }
    }
    Ok(out)
}

/// Mixed Ricci tensor from
/// `Ric^p_l = g^{pj}(∂_kΓ^k_lj − ∂_lΓ^k_kj + Γ^k_kq Γ^q_lj − Γ^k_lq Γ^q_kj)`.
pub fn ricci<S: Scalar>(m: &MetricJet<S>) -> Result<[[Jet3<S>; 3]; 3]> {
    ricci_from(m, &christoffel(m)?)
}

fn ricci_from<S: Scalar>(m: &MetricJet<S>, gam: &Christoffel<S>) -> Result<[[Jet3<S>; 3]; 3]> {
    require_order(m, 2, "Ricci tensor")?;
    let order = m.order() - 2;
    // Lower Ricci R_lj first.
    let trace: Vec<Jet3<S>> = (0..3)
        .map(|q| {
            let mut acc = Jet3::zero(order + 1);
            for k in 0..3 {
                acc = &acc + &gam[k][k][q];
            }
            acc
        })
        .collect();
    let mut low: Vec<Vec<Jet3<S>>> = vec![vec![Jet3::zero(order); 3]; 3];
    for l in 0..3 {
        for j in l..3 {
            let mut acc = Jet3::zero(order);
            for k in 0..3 {
                acc = &acc + &gam[k][l][j].derivative(k)?;
            }
            acc = &acc - &trace[j].derivative(l)?;
            for q in 0..3 {
                acc.add_product(&trace[q], &gam[q][l][j]);
                for k in 0..3 {
                    acc.add_product(&-&gam[k][l][q], &gam[q][k][j]);
                }
            }
            low[l][j] = acc.clone();
            low[j][l] = acc;
        }
    }
    let mut out: [[Jet3<S>; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| Jet3::zero(order)));
    for p in 0..3 {
        for l in 0..3 {
            let mut acc = Jet3::zero(order);
            for (j, row) in low.iter().enumerate() {
                if !m.g_inv(p, j).is_zero() {
                    acc.add_product(m.g_inv(p, j), &row[l]);
                }
            }
            out[p][l] = acc;
        }
    }
    Ok(out)
}

/// The five equivalent expressions for `𝒟`, in the order
/// `g^{αβ}Γ^n_αβ`, `−Γ^α_nα`, `−½g^{αβ}∂ₙg_αβ`, `½g_αβ∂ₙg^{αβ}`,
/// `−|g|^{−1/2}∂ₙ|g|^{1/2}`. The last is omitted when `|g|^{1/2}` has no
/// exact representation.
pub fn mean_curvature_forms<S: Scalar>(
    m: &MetricJet<S>,
    gam: &Christoffel<S>,
) -> Result<Vec<Jet3<S>>> {
    require_order(m, 1, "mean curvature")?;
    let order = m.order() - 1;
    let half = S::from_ratio(1, 2);
    let mut f1 = Jet3::zero(order);
    let mut f2 = Jet3::zero(order);
    let mut f3 = Jet3::zero(order);
    let mut f4 = Jet3::zero(order);
    for a in 0..2 {
        f2 = &f2 - &gam[a][N][a];
        for b in 0..2 {
            f1.add_product(m.g_inv(a, b), &gam[N][a][b]);
            f3.add_product(m.g_inv(a, b), &m.g(a, b).derivative(N)?);
            f4.add_product(m.g(a, b), &m.g_inv(a, b).derivative(N)?);
        }
    }
    let mut forms = vec![f1, f2, f3.scale(&-half.clone()), f4.scale(&half)];
    if let Ok(root) = m.sqrt_det() {
        let f5 = -&root.reciprocal()?.mul(&root.derivative(N)?);
        forms.push(f5);
    }
    Ok(forms)
}

/// `𝒟` with all defining expressions cross-checked against each other.
pub fn mean_curvature<S: Scalar>(m: &MetricJet<S>) -> Result<Jet3<S>> {
    mean_curvature_from(m, &christoffel(m)?)
}

fn mean_curvature_from<S: Scalar>(m: &MetricJet<S>, gam: &Christoffel<S>) -> Result<Jet3<S>> {
    let forms = mean_curvature_forms(m, gam)?;
    for (i, f) in forms.iter().enumerate().skip(1) {
        if !f.close_to(&forms[0], 1e-10) {
            return Err(Error::Inconsistent(format!(
                "mean curvature expression {} disagrees with expression 1",
                i + 1
            )));
        }
    }
    Ok(forms.into_iter().next().unwrap())
}
