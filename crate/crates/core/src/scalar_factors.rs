//! Scalar factors: overlaps between the coupled states of a product and the
//! subgroup-coupled uncoupled states, checked to be independent of the
//! subgroup state; exchange phases; full CG coefficients as products down a
//! chain; orthogonality checks.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposer::spin_flavor::{self, build_sf_irrep, couple_sf, SfCoupling, SfIrrep};
use crate::decomposer::{
    couple, highest_vectors, standard_irrep, Attend, Coupling, DecompError, GtState, MuLabel,
};
use crate::exact_arith::{rat, srad_mul, ArithError, Rational, Scalar, SignedRadical};
use crate::irrep_catalog::{Chain, IrrepId};
use crate::sparse_linalg::SparseVec;
use crate::tensor_rep::{build_space, Alg, Factor, ProductSpace, Rep, Space};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("scalar factor depends on the subgroup state: {0}")]
    ZetaDependence(String),
    #[error("inconsistent quantum numbers: {0}")]
    IndexMismatch(String),
    #[error("no construction for {0} in {1}")]
    UnknownFactor(String, String),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Scalars that can report a normalized overlap `num / sqrt(den)`.
pub trait SfScalar: Scalar {
    type Value: Clone + std::fmt::Debug + PartialEq + Send + Sync + Serialize;
    fn sf_value(num: &Self, den: &Self) -> Self::Value;
    fn value_is_zero(v: &Self::Value) -> bool;
}

impl SfScalar for Rational {
    type Value = SignedRadical;
    fn sf_value(num: &Self, den: &Self) -> SignedRadical {
        SignedRadical::from_overlap(num, den)
    }
    fn value_is_zero(v: &SignedRadical) -> bool {
        v.is_zero()
    }
}

impl SfScalar for f64 {
    type Value = f64;
    fn sf_value(num: &Self, den: &Self) -> f64 {
        num / den.sqrt()
    }
    fn value_is_zero(v: &f64) -> bool {
        Scalar::is_zero(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfColumn<V> {
    pub mu1: MuLabel,
    pub mu2: MuLabel,
    pub gamma_prime: Option<char>,
    pub value: V,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfRow<V> {
    pub r: String,
    pub sigma: Option<char>,
    pub mu: MuLabel,
    pub gamma: Option<char>,
    pub xi: i8,
    /// Nonzero entries in the order of the uncoupled states.
    pub cols: Vec<SfColumn<V>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfTable<V> {
    pub chain: Chain,
    pub r1: String,
    pub r2: String,
    pub rows: Vec<SfRow<V>>,
}

/// One scalar factor with its full labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SfEntry<V> {
    pub r: String,
    pub sigma: Option<char>,
    pub mu: MuLabel,
    pub gamma: Option<char>,
    pub mu1: MuLabel,
    pub mu2: MuLabel,
    pub gamma_prime: Option<char>,
    pub value: V,
    pub xi: i8,
}

impl<V: Clone> SfTable<V> {
    pub fn entries(&self) -> Vec<SfEntry<V>> {
        let mut out = Vec::new();
        for r in &self.rows {
            for c in &r.cols {
                out.push(SfEntry {
                    r: r.r.clone(),
                    sigma: r.sigma,
                    mu: r.mu.clone(),
                    gamma: r.gamma,
                    mu1: c.mu1.clone(),
                    mu2: c.mu2.clone(),
                    gamma_prime: c.gamma_prime,
                    value: c.value.clone(),
                    xi: r.xi,
                });
            }
        }
        out
    }
}

/// Multiplicity letter: none for a single copy, then s, a, b, ...
pub fn letter(idx: usize, mult: usize) -> Option<char> {
    if mult <= 1 {
        None
    } else {
        Some(['s', 'a', 'b', 'c', 'd'][idx])
    }
}

/// Standard-basis representation of the irrep with highest weight `hw`
/// found in the given tensor space.
pub fn irrep_in_space<S: Scalar>(n: usize, factors: &[Factor], hw: &[i32]) -> Result<Rep<S>, ScalarError> {
    let sp = build_space(n, factors);
    let id = Alg::identity(n);
    let basis: Vec<SparseVec<S>> = Space::<S>::weight_space(&sp, hw).into_iter().map(SparseVec::unit).collect();
    let hv = highest_vectors(&sp, &id, &basis);
    let (h, _) = hv.into_iter().next().ok_or_else(|| ScalarError::UnknownFactor(format!("{hw:?}"), format!("SU({n})")))?;
    let st = standard_irrep(&sp, &id, &h)?;
    Ok(rep_of(&sp, &id, &st))
}

pub fn rep_of<S: Scalar>(sp: &dyn Space<S>, alg: &Alg, st: &[GtState<S>]) -> Rep<S> {
    let states: Vec<(SparseVec<S>, S)> = st.iter().map(|s| (s.vec.clone(), s.norm.clone())).collect();
    let mut r = Rep::from_states(sp, alg, &states, st.iter().map(|s| s.pattern.clone()).collect());
    r.normalize_top();
    r
}

/// Factor irreps of the flavor chains, realized with their quark content:
/// mesons in 3* x 3 or 4* x 4, baryons in the cube of the fundamental.
pub fn canonical_factor<S: Scalar>(chain: Chain, label: &str) -> Result<Rep<S>, ScalarError> {
    use Factor::{AntiFund as A, Fund as F};
    let n = chain.rank();
    let (factors, hw): (Vec<Factor>, Vec<i32>) = match (n, label) {
        (3, "3") => (vec![F], vec![1, 0, 0]),
        (3, "3*") => (vec![A], vec![0, 0, -1]),
        (3, "8") => (vec![A, F], vec![1, 0, -1]),
        (3, "6") => (vec![F, F], vec![2, 0, 0]),
        (3, "6*") => (vec![A, A], vec![0, 0, -2]),
        (3, "10") => (vec![F; 3], vec![3, 0, 0]),
        (3, "1") => (vec![A, F], vec![0, 0, 0]),
        (4, "4") => (vec![F], vec![1, 0, 0, 0]),
        (4, "4*") => (vec![A], vec![0, 0, 0, -1]),
        (4, "15") => (vec![A, F], vec![1, 0, 0, -1]),
        (4, "20") => (vec![F; 3], vec![2, 1, 0, 0]),
        (4, "20'") => (vec![F; 3], vec![3, 0, 0, 0]),
        _ => return Err(ScalarError::UnknownFactor(label.into(), chain.name().into())),
    };
    irrep_in_space(n, &factors, &hw)
}

/// Compares `x` with the exchanged copy of `y` (a state of B (x) A); returns
/// the sign relating them.
fn exchange_sign<S: Scalar>(x: &SparseVec<S>, y: &SparseVec<S>, dim_a: usize, dim_b: usize) -> Option<i8> {
    let z = y.map_indices(|i| (i % dim_a) * dim_b + i / dim_a);
    x.ratio_to(&z).map(|r| r.signum() as i8)
}

/// Exchange phases of every irrep of `c` (A (x) B), from the resolution `d`
/// of B (x) A; constant over all states of the irrep.
pub fn exchange_phases<S: Scalar>(c: &Coupling<S>, d: Option<&Coupling<S>>, dim_a: usize) -> Result<Vec<i8>, ScalarError> {
    c.irreps
        .iter()
        .map(|ir| {
            if let Some(e) = ir.exchange {
                return Ok(e as i8);
            }
            let d = d.expect("swapped coupling required");
            let other = d
                .irreps
                .iter()
                .find(|o| o.hw == ir.hw && o.sigma == ir.sigma)
                .ok_or_else(|| DecompError::InconsistentXi(format!("{:?} missing in swapped product", ir.hw)))?;
            let mut xi = None;
            for (s, t) in ir.states.iter().zip(&other.states) {
                let e = exchange_sign(&s.vec, &t.vec, dim_a, c.dim_b);
                if e.is_none() || (xi.is_some() && xi != e) {
                    return Err(DecompError::InconsistentXi(format!("{:?}", ir.hw)).into());
                }
                xi = e;
            }
            Ok(xi.unwrap())
        })
        .collect()
}

fn same_overlap<S: Scalar>(a: &(S, S), b: &(S, S)) -> bool {
    a.0.signum() == b.0.signum() && a.0.mul(&a.0).mul(&b.1).approx_eq(&b.0.mul(&b.0).mul(&a.1))
}

/// Scalar-factor rows of a canonical-chain coupling, every subgroup state
/// checked.
pub fn extract_sf<S: SfScalar>(
    c: &Coupling<S>,
    ps: &ProductSpace<'_, S>,
    xi: &[i8],
) -> Result<Vec<SfRow<S::Value>>, ScalarError> {
    let k = c.k;
    let rows: Vec<Vec<SfRow<S::Value>>> = c
        .irreps
        .par_iter()
        .zip(xi.par_iter())
        .map(|(ir, xi)| {
            let r = IrrepId::from_weight(&ir.hw).map_err(DecompError::from)?.label;
            let total: i32 = ir.hw.iter().sum();
            let mut blocks: Vec<(MuLabel, Vec<i32>, Vec<&GtState<S>>)> = Vec::new();
            let mut pos: HashMap<Vec<i32>, usize> = HashMap::new();
            for s in &ir.states {
                let p = *pos.entry(s.pattern[1].clone()).or_insert_with(|| {
                    blocks.push((
                        MuLabel::canonical(k, &s.pattern[1], total).expect("labelled block"),
                        s.pattern[1].clone(),
                        Vec::new(),
                    ));
                    blocks.len() - 1
                });
                blocks[p].2.push(s);
            }
            blocks.sort_by_key(|b| b.0.order_key());
            let mut out = Vec::new();
            for (mu, row, states) in blocks {
                let mut cols = Vec::new();
                for u in c.uncoupled.iter().filter(|u| u.hw == row) {
                    let mut first: Option<(S, S)> = None;
                    for (x, y) in states.iter().zip(&u.states) {
                        if x.pattern[1..] != y.pattern[..] {
                            return Err(ScalarError::IndexMismatch(format!("{:?} vs {:?}", x.pattern, y.pattern)));
                        }
                        let o = (ps.inner(&x.vec, &y.vec), x.norm.mul(&y.norm));
                        match &first {
                            None => first = Some(o),
                            Some(f) if !same_overlap(f, &o) => {
                                return Err(ScalarError::ZetaDependence(format!("{r};{mu} at {:?}", x.pattern)))
                            }
                            _ => {}
                        }
                    }
                    let (num, den) = first.unwrap();
                    if num.is_zero() {
                        continue;
                    }
                    cols.push(SfColumn {
                        mu1: c.blocks_a[u.b1].label.clone(),
                        mu2: c.blocks_b[u.b2].label.clone(),
                        gamma_prime: letter(u.gamma, u.mult),
                        value: S::sf_value(&num, &den),
                    });
                }
                out.push(SfRow { r: r.clone(), sigma: letter(ir.sigma, ir.mult), mu, gamma: None, xi: *xi, cols });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, ScalarError>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Scalar factors of R1 (x) R2 for the flavor chains SU(4) > SU(3) x U(1)
/// and SU(3) > SU(2) x U(1).
pub fn sf_canonical<S: SfScalar>(chain: Chain, r1: &str, r2: &str) -> Result<SfTable<S::Value>, ScalarError> {
    let a: Rep<S> = canonical_factor(chain, r1)?;
    let b: Rep<S> = canonical_factor(chain, r2)?;
    let c = couple(&a, &b, Attend::FirstFactor)?;
    let d = if c.symmetric { None } else { Some(couple(&b, &a, Attend::FirstFactor)?) };
    let xi = exchange_phases(&c, d.as_ref(), a.dim())?;
    let ps = ProductSpace::new(&a, &b);
    let rows = extract_sf(&c, &ps, &xi)?;
    Ok(SfTable { chain, r1: r1.into(), r2: r2.into(), rows })
}

/// Scalar factors of a spin-flavor product (SU(8) or SU(6) level).
pub fn sf_spin_flavor<S: SfScalar>(chain: Chain, r1: &str, r2: &str) -> Result<SfTable<S::Value>, ScalarError> {
    let nf = chain.flavors().ok_or_else(|| ScalarError::UnknownFactor(r1.into(), chain.name().into()))?;
    let factor = |l: &str| -> Result<SfIrrep<S>, ScalarError> {
        let kind = spin_flavor::kind_of(nf, l).ok_or_else(|| ScalarError::UnknownFactor(l.into(), chain.name().into()))?;
        Ok(build_sf_irrep(nf, kind)?)
    };
    let a = factor(r1)?;
    let b = if r2 == r1 { a.clone() } else { factor(r2)? };
    let c = couple_sf(&a, &b, Attend::FirstFactor)?;
    c.rows
        .par_iter()
        .try_for_each(|r| spin_flavor::check_zeta(&a, &b, &c, r))
        .map_err(|e| ScalarError::ZetaDependence(e.to_string()))?;
    let xi: Vec<i8> = if c.symmetric {
        c.rows.iter().map(|r| r.exchange.unwrap_or(1) as i8).collect()
    } else {
        let d = couple_sf(&b, &a, Attend::SecondFactor)?;
        spin_flavor::exchange_phases(&c, &d)?
    };
    Ok(SfTable { chain, r1: r1.into(), r2: r2.into(), rows: sf_rows::<S>(&c, &xi) })
}

/// Scalar factors of the resolved rows: the coefficient of each uncoupled
/// state, normalized.
pub fn sf_rows<S: SfScalar>(c: &SfCoupling<S>, xi: &[i8]) -> Vec<SfRow<S::Value>> {
    c.rows
        .iter()
        .zip(xi)
        .map(|(r, &xi)| {
            let mut total = S::zero();
            for (&k, x) in r.cols.iter().zip(&r.coeffs) {
                total.add_mul(&x.mul(x), &c.uncoupled[k].norm);
            }
            let cols = r
                .cols
                .iter()
                .zip(&r.coeffs)
                .filter(|(_, x)| !x.is_zero())
                .map(|(&k, x)| {
                    let u = &c.uncoupled[k];
                    SfColumn {
                        mu1: c.labels_a[u.b1].clone(),
                        mu2: c.labels_b[u.b2].clone(),
                        gamma_prime: letter(u.gamma, u.mult),
                        value: S::sf_value(&x.mul(&u.norm), &u.norm.mul(&total)),
                    }
                })
                .collect();
            let gamma = match &r.mu {
                MuLabel::NuJ { gamma, .. } => *gamma,
                _ => None,
            };
            SfRow { r: r.r.clone(), sigma: letter(r.sigma, r.mult), mu: r.mu.clone(), gamma, xi, cols }
        })
        .collect()
}

/// Scalar factors of any supported product.
pub fn sf_table<S: SfScalar>(chain: Chain, r1: &str, r2: &str) -> Result<SfTable<S::Value>, ScalarError> {
    match chain {
        Chain::Su8 | Chain::Su6 => sf_spin_flavor::<S>(chain, r1, r2),
        Chain::Su4 | Chain::Su3 => sf_canonical::<S>(chain, r1, r2),
    }
}

/// Columns of the transposed relation: for fixed (mu, gamma', mu1, mu2), the
/// coefficients on every coupled state (R, sigma, gamma).
pub fn invert_sf<V: Clone>(
    table: &SfTable<V>,
    mu: &MuLabel,
    gamma_prime: Option<char>,
    mu1: &MuLabel,
    mu2: &MuLabel,
) -> Vec<(String, Option<char>, Option<char>, V)> {
    let mut out = Vec::new();
    for r in table.rows.iter().filter(|r| &r.mu == mu) {
        for c in &r.cols {
            if &c.mu1 == mu1 && &c.mu2 == mu2 && c.gamma_prime == gamma_prime {
                out.push((r.r.clone(), r.sigma, r.gamma, c.value.clone()));
            }
        }
    }
    out
}

/// First violation of row normalization or of orthogonality between rows
/// sharing the same subgroup label, if any.
pub fn verify_unitarity(table: &SfTable<SignedRadical>) -> Option<String> {
    let one = rat(1, 1);
    for r in &table.rows {
        let s: Rational = r.cols.iter().map(|c| c.value.radicand().clone()).sum();
        if s != one {
            return Some(format!("row {};{} has squared norm {s}", r.r, r.mu));
        }
    }
    let key = |c: &SfColumn<SignedRadical>| (c.mu1.clone(), c.mu2.clone(), c.gamma_prime);
    for (i, p) in table.rows.iter().enumerate() {
        for q in table.rows.iter().skip(i + 1).filter(|q| q.mu == p.mu) {
            // products of two radicals: group by the rational factor of the square root
            let mut terms: Vec<SignedRadical> = Vec::new();
            for c in &p.cols {
                if let Some(d) = q.cols.iter().find(|d| key(d) == key(c)) {
                    terms.push(srad_mul(&c.value, &d.value));
                }
            }
            if !radical_sum_is_zero(&terms) {
                return Some(format!("rows {}{:?};{} and {}{:?};{} not orthogonal", p.r, p.sigma, p.mu, q.r, q.sigma, q.mu));
            }
        }
    }
    None
}

/// Whether a sum of signed square roots vanishes exactly: terms are grouped
/// by their square-free part, which is rationally independent.
pub fn radical_sum_is_zero(terms: &[SignedRadical]) -> bool {
    let mut groups: Vec<(SignedRadical, Rational)> = Vec::new();
    'outer: for t in terms.iter().filter(|t| !t.is_zero()) {
        for (rep, acc) in groups.iter_mut() {
            if let Ok(r) = crate::exact_arith::srad_ratio_as_rational(t, rep) {
                *acc += r;
                continue 'outer;
            }
        }
        groups.push((t.clone(), rat(1, 1)));
    }
    groups.iter().all(|(_, a)| *a == rat(0, 1))
}

/// One level of a chain: rows of the product at that level and the labels
/// selecting a coefficient (R, sigma, mu, mu1, mu2, gamma').
pub type Level<'a> = (&'a [SfRow<SignedRadical>], &'a str, Option<char>, &'a MuLabel, &'a MuLabel, &'a MuLabel, Option<char>);

/// Full CG coefficient as the product of the scalar factors of the levels
/// of a chain, the last level being SU(2) > U(1).
pub fn full_cg(levels: &[Level<'_>]) -> Result<SignedRadical, ScalarError> {
    let mut acc = SignedRadical::new(1, rat(1, 1));
    for (rows, r, sigma, mu, mu1, mu2, gp) in levels {
        if !mu_additive(mu, mu1, mu2) {
            return Err(ScalarError::IndexMismatch(format!("{mu1} + {mu2} cannot give {mu}")));
        }
        let row = rows
            .iter()
            .find(|x| x.r == *r && x.sigma == *sigma && &x.mu == *mu)
            .ok_or_else(|| ScalarError::IndexMismatch(format!("no coupled state {r};{mu}")))?;
        let v = row
            .cols
            .iter()
            .find(|c| &c.mu1 == *mu1 && &c.mu2 == *mu2 && c.gamma_prime == *gp)
            .map(|c| c.value.clone())
            .unwrap_or_else(SignedRadical::zero);
        acc = srad_mul(&acc, &v);
    }
    Ok(acc)
}

/// SU(2) coefficients of (2j1+1) x (2j2+1), labelled by dimensions.
pub fn sf_su2_rows(d1: &str, d2: &str) -> Result<Vec<SfRow<SignedRadical>>, ScalarError> {
    let rep = |d: &str| -> Result<Rep<Rational>, ScalarError> {
        let k: usize = d.parse().ok().filter(|&k| k >= 1).ok_or_else(|| ScalarError::UnknownFactor(d.into(), "SU2".into()))?;
        if k == 1 {
            irrep_in_space(2, &[Factor::AntiFund, Factor::Fund], &[0, 0])
        } else {
            irrep_in_space(2, &vec![Factor::Fund; k - 1], &[k as i32 - 1, 0])
        }
    };
    let (a, b) = (rep(d1)?, rep(d2)?);
    let c = couple(&a, &b, Attend::FirstFactor)?;
    let d = if c.symmetric { None } else { Some(couple(&b, &a, Attend::FirstFactor)?) };
    let xi = exchange_phases(&c, d.as_ref(), a.dim())?;
    extract_sf(&c, &ProductSpace::new(&a, &b), &xi)
}

/// U(1) charges must add.
fn mu_additive(mu: &MuLabel, a: &MuLabel, b: &MuLabel) -> bool {
    match (mu, a, b) {
        (MuLabel::M { m2 }, MuLabel::M { m2: x }, MuLabel::M { m2: y }) => *m2 == x + y,
        (MuLabel::IY { y3, .. }, MuLabel::IY { y3: x, .. }, MuLabel::IY { y3: y, .. }) => *y3 == x + y,
        (MuLabel::NuC { c, .. }, MuLabel::NuC { c: x, .. }, MuLabel::NuC { c: y, .. }) => *c == x + y,
        (MuLabel::NuJ { .. }, MuLabel::NuJ { .. }, MuLabel::NuJ { .. }) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row<'a>(t: &'a SfTable<SignedRadical>, r: &str, mu: &str) -> &'a SfRow<SignedRadical> {
        t.rows
            .iter()
            .find(|x| format!("{}{}", x.r, x.sigma.map(|c| format!("_{c}")).unwrap_or_default()) == r && x.mu.to_string() == mu)
            .unwrap_or_else(|| panic!("no row {r};{mu}"))
    }

    fn vals(r: &SfRow<SignedRadical>) -> Vec<String> {
        r.cols.iter().map(|c| c.value.to_string()).collect()
    }

    #[test]
    fn su3_singlet_row() {
        let t = sf_canonical::<Rational>(Chain::Su3, "3", "3*").unwrap();
        assert_eq!(vals(row(&t, "1", "0,0")), vec!["+sqrt(2/3)", "+sqrt(1/3)"]);
        assert!(verify_unitarity(&t).is_none());
    }

    #[test]
    fn su2_singlet_is_condon_shortley() {
        // the SU(2) level of the isospin chain: 1/2 x 1/2 -> 0
        let a: Rep<Rational> = irrep_in_space(2, &[Factor::Fund], &[1, 0]).unwrap();
        let c = couple(&a, &a, Attend::FirstFactor).unwrap();
        let ps = ProductSpace::new(&a, &a);
        let rows = extract_sf(&c, &ps, &[1, -1]).unwrap();
        let singlet = rows.iter().find(|r| r.r == "1").unwrap();
        let v: Vec<String> = singlet.cols.iter().map(|c| c.value.to_string()).collect();
        assert_eq!(v, vec!["+sqrt(1/2)", "-sqrt(1/2)"]);
        let triplet_top = rows.iter().find(|r| r.r == "3" && r.mu == MuLabel::M { m2: 2 }).unwrap();
        assert_eq!(triplet_top.cols[0].value, SignedRadical::new(1, rat(1, 1)));
    }

    #[test]
    fn su2_table_matches_closed_form() {
        // <1 1; 1 -1 | 1 0> = +sqrt(1/2), <1/2 1/2; 1/2 -1/2 | 1 0> = +sqrt(1/2)
        let rows = sf_su2_rows("3", "3").unwrap();
        let r = rows.iter().find(|r| r.r == "3" && r.mu == MuLabel::M { m2: 0 }).unwrap();
        assert_eq!(r.cols[0].value, SignedRadical::new(1, rat(1, 2)));
        assert_eq!(r.cols[0].mu1, MuLabel::M { m2: 2 });
        let rows = sf_su2_rows("2", "1").unwrap();
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn radical_sums() {
        let a = SignedRadical::new(1, rat(1, 2));
        let b = SignedRadical::new(-1, rat(2, 4));
        assert!(radical_sum_is_zero(&[a.clone(), b]));
        assert!(!radical_sum_is_zero(&[a, SignedRadical::new(-1, rat(1, 3))]));
    }
}
