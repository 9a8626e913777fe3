//! Highest-weight extraction: filling irreps with lowering operators,
//! Gelfand-Tsetlin bases with Baird phases, resolution of tensor products
//! along the canonical chain SU(k) > SU(k-1) x U(1), and (in
//! [`spin_flavor`]) the non-canonical spin-flavor level.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{Rational, Scalar};
use crate::irrep_catalog::{label_order_key, CatalogError, IrrepId};
use crate::sparse_linalg::{combine, null_combinations, orthogonalize_w, SparseVec};
use crate::tensor_rep::{traceless, Alg, ProductSpace, Rep, Space};

pub mod spin_flavor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompError {
    #[error("incomplete decomposition: {found} of {expected} states resolved")]
    IncompleteDecomposition { found: usize, expected: usize },
    #[error("no consistent Baird phases: {0}")]
    PhaseObstruction(String),
    #[error("anchor matrix element vanishes: {0}")]
    ZeroAnchor(String),
    #[error("exchange phase is not a constant sign: {0}")]
    InconsistentXi(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// A Gelfand-Tsetlin basis state: pattern rows (longest first), the vector
/// in the ambient space and its squared norm.
#[derive(Clone, Debug)]
pub struct GtState<S> {
    pub pattern: Vec<Vec<i32>>,
    pub vec: SparseVec<S>,
    pub norm: S,
}

/// Integer gl(k) weight of a pattern.
pub fn pattern_weight(p: &[Vec<i32>]) -> Vec<i32> {
    let k = p.len();
    (0..k)
        .map(|a| {
            let row = &p[k - 1 - a];
            let s: i32 = row.iter().sum();
            let below: i32 = if a == 0 { 0 } else { p[k - a].iter().sum() };
            s - below
        })
        .collect()
}

pub type WeightBasis<S> = BTreeMap<Vec<i32>, Vec<(SparseVec<S>, S)>>;

fn tidy<S: Scalar>(v: SparseVec<S>, n: S) -> (SparseVec<S>, S) {
    let refs: Vec<&S> = v.iter().map(|e| &e.1).collect();
    let f = S::tidy_factor(&refs, &n);
    let n = n.mul(&f).mul(&f);
    (v.scale(&f), n)
}

/// Orthogonal bases of every weight space of the irrep generated by the
/// highest vector `h`, keyed by `alg` weight. Level by level: each weight is
/// reached from the top by a fixed number of lowering steps.
pub fn fill_irrep<S: Scalar>(sp: &dyn Space<S>, alg: &Alg, h: &SparseVec<S>) -> WeightBasis<S> {
    let metric = |i: usize| sp.norm(i);
    let w0 = alg.weight(&sp.weight_of_vec(h).expect("zero highest vector"));
    let mut out = BTreeMap::new();
    out.insert(w0.clone(), vec![(h.clone(), sp.norm2(h))]);
    let mut frontier = vec![w0];
    while !frontier.is_empty() {
        let mut images: BTreeMap<Vec<i32>, Vec<SparseVec<S>>> = BTreeMap::new();
        for w in &frontier {
            for (v, _) in &out[w] {
                for a in 0..alg.k - 1 {
                    let y = alg.apply(sp, a, a + 1, v);
                    if y.is_empty() {
                        continue;
                    }
                    let mut t = w.clone();
                    t[a] -= 1;
                    t[a + 1] += 1;
                    images.entry(t).or_default().push(y);
                }
            }
        }
        let done: Vec<(Vec<i32>, Vec<(SparseVec<S>, S)>)> = images
            .into_par_iter()
            .map(|(w, vs)| {
                let b = orthogonalize_w(&vs, &metric).into_iter().map(|(v, n)| tidy(v, n)).collect();
                (w, b)
            })
            .collect();
        frontier = done.iter().map(|(w, _)| w.clone()).collect();
        out.extend(done);
    }
    out
}

/// Orthogonal basis of the vectors in `span(basis)` annihilated by all `ops`
/// (each an embedded generator `(alg, a, b)`).
pub fn annihilated<S: Scalar>(sp: &dyn Space<S>, ops: &[(&Alg, usize, usize)], basis: &[SparseVec<S>]) -> Vec<(SparseVec<S>, S)> {
    let vs: Vec<SparseVec<S>> = if ops.is_empty() {
        basis.to_vec()
    } else {
        let images: Vec<Vec<SparseVec<S>>> =
            basis.iter().map(|b| ops.iter().map(|(g, a, c)| g.apply(sp, *a, *c, b)).collect()).collect();
        null_combinations(&images).iter().map(|x| combine(x, basis)).collect()
    };
    orthogonalize_w(&vs, &|i| sp.norm(i))
}

/// Highest vectors of `alg` inside `span(basis)`.
pub fn highest_vectors<S: Scalar>(sp: &dyn Space<S>, alg: &Alg, basis: &[SparseVec<S>]) -> Vec<(SparseVec<S>, S)> {
    let r = alg.raising();
    let ops: Vec<(&Alg, usize, usize)> = r.iter().map(|&(a, b)| (alg, a, b)).collect();
    annihilated(sp, &ops, basis)
}

/// `<W h, target>` for the first lowering word W (in lexicographic order of
/// generator sequences) from the top weight to the target weight giving a
/// nonzero overlap.
fn canonical_overlap<S: Scalar>(
    sp: &dyn Space<S>,
    alg: &Alg,
    v: &SparseVec<S>,
    counts: &mut [i32],
    target: &SparseVec<S>,
) -> Option<S> {
    if counts.iter().all(|&c| c == 0) {
        let x = sp.inner(v, target);
        return if x.is_zero() { None } else { Some(x) };
    }
    for a in 0..counts.len() {
        if counts[a] == 0 {
            continue;
        }
        let y = alg.apply(sp, a, a + 1, v);
        if y.is_empty() {
            continue;
        }
        counts[a] -= 1;
        let r = canonical_overlap(sp, alg, &y, counts, target);
        counts[a] += 1;
        if r.is_some() {
            return r;
        }
    }
    None
}

/// The Gelfand-Tsetlin basis of the irrep generated by `h` under `alg`, with
/// Baird phases (every matrix element of G^a_{a+1} nonnegative). States are
/// sorted by pattern, descending; `h` itself is the first one.
///
/// The scale of every state is canonical (fixed by a lowering word applied to
/// `h`), so isomorphic irreps give identical matrices once the top norm is
/// normalized, and the states depend linearly on `h`.
pub fn standard_irrep<S: Scalar>(sp: &dyn Space<S>, alg: &Alg, h: &SparseVec<S>) -> Result<Vec<GtState<S>>, DecompError> {
    let k = alg.k;
    let hw = alg.weight(&sp.weight_of_vec(h).expect("zero highest vector"));
    if k == 1 {
        return Ok(vec![GtState { pattern: vec![hw], vec: h.clone(), norm: sp.norm2(h) }]);
    }
    let filled = fill_irrep(sp, alg, h);
    let sub = alg.sub(k - 1);
    let tops: Vec<Option<SparseVec<S>>> = filled
        .par_iter()
        .map(|(w, basis)| -> Result<Option<SparseVec<S>>, DecompError> {
            let b: Vec<SparseVec<S>> = basis.iter().map(|x| x.0.clone()).collect();
            let hv = highest_vectors(sp, &sub, &b);
            if hv.len() > 1 {
                return Err(DecompError::PhaseObstruction(format!("branching multiplicity at {w:?}")));
            }
            let Some((n, nn)) = hv.into_iter().next() else { return Ok(None) };
            if *w == hw {
                return Ok(Some(h.clone()));
            }
            let mut counts: Vec<i32> =
                (0..k - 1).map(|a| (0..=a).map(|i| hw[i] - w[i]).sum()).collect();
            let c = canonical_overlap(sp, alg, h, &mut counts, &n)
                .ok_or_else(|| DecompError::PhaseObstruction(format!("no lowering path to {w:?}")))?;
            Ok(Some(n.scale(&c.div(&nn))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tops: Vec<SparseVec<S>> = tops.into_iter().flatten().collect();
    let mut groups: Vec<Vec<GtState<S>>> = tops
        .par_iter()
        .map(|t| {
            standard_irrep(sp, &sub, t).map(|st| {
                st.into_iter()
                    .map(|mut s| {
                        s.pattern.insert(0, hw.clone());
                        s
                    })
                    .collect()
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    groups.sort_by(|x, y| y[0].pattern.cmp(&x[0].pattern));
    baird_fix(sp, alg, &mut groups)?;
    let mut all: Vec<GtState<S>> = groups.into_iter().flatten().collect();
    all.sort_by(|x, y| y.pattern.cmp(&x.pattern));
    Ok(all)
}

/// Fixes the relative signs of the subgroup irreps (`groups`, the first one
/// kept) so that G^{k-2}_{k-1}, the only simple lowering operator connecting
/// them, has nonnegative matrix elements.
fn baird_fix<S: Scalar>(sp: &dyn Space<S>, alg: &Alg, groups: &mut [Vec<GtState<S>>]) -> Result<(), DecompError> {
    let k = alg.k;
    let mut at: HashMap<Vec<i32>, Vec<(usize, usize)>> = HashMap::new();
    for (g, st) in groups.iter().enumerate() {
        for (i, s) in st.iter().enumerate() {
            at.entry(pattern_weight(&s.pattern)).or_default().push((g, i));
        }
    }
    let edges: Vec<(usize, usize, i32)> = groups
        .par_iter()
        .enumerate()
        .flat_map_iter(|(g, st)| {
            let mut e = Vec::new();
            for s in st {
                let y = alg.apply(sp, k - 2, k - 1, &s.vec);
                if y.is_empty() {
                    continue;
                }
                let mut w = pattern_weight(&s.pattern);
                w[k - 2] -= 1;
                w[k - 1] += 1;
                for &(q, j) in at.get(&w).map(|v| v.as_slice()).unwrap_or(&[]) {
                    let x = sp.inner(&groups[q][j].vec, &y);
                    if !x.negligible(&groups[q][j].norm.mul(&sp.norm2(&y))) {
                        e.push((g, q, x.signum()));
                    }
                }
            }
            e
        })
        .collect();
    let mut adj: Vec<Vec<(usize, i32)>> = vec![Vec::new(); groups.len()];
    for &(p, q, s) in &edges {
        adj[p].push((q, s));
        adj[q].push((p, s));
    }
    let mut sign = vec![0i32; groups.len()];
    sign[0] = 1;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(p) = queue.pop_front() {
        for &(q, s) in &adj[p] {
            let want = sign[p] * s;
            if sign[q] == 0 {
                sign[q] = want;
                queue.push_back(q);
            } else if sign[q] != want {
                return Err(DecompError::PhaseObstruction(format!("conflicting signs for level {k}")));
            }
        }
    }
    if sign.contains(&0) {
        return Err(DecompError::PhaseObstruction(format!("disconnected subgroup irreps at level {k}")));
    }
    for (g, st) in groups.iter_mut().enumerate() {
        if sign[g] < 0 {
            for s in st.iter_mut() {
                s.vec = s.vec.neg();
            }
        }
    }
    Ok(())
}

/// An irreducible block found by [`decompose_group`].
#[derive(Clone, Debug)]
pub struct MultipletBlock<S> {
    pub irrep: IrrepId,
    pub hw: Vec<i32>,
    pub states: Vec<GtState<S>>,
}

/// Splits a space (or the invariant subspace spanned by the weight-homogeneous
/// vectors `restrict`) into irreps of `alg`, highest weight first, each in its
/// standard basis.
pub fn decompose_group<S: Scalar>(
    sp: &dyn Space<S>,
    alg: &Alg,
    restrict: Option<&[SparseVec<S>]>,
) -> Result<Vec<MultipletBlock<S>>, DecompError> {
    let mut by_w: BTreeMap<Vec<i32>, Vec<SparseVec<S>>> = BTreeMap::new();
    let total = match restrict {
        Some(r) => {
            for v in r {
                by_w.entry(alg.weight(&sp.weight_of_vec(v).expect("zero vector"))).or_default().push(v.clone());
            }
            r.len()
        }
        None => {
            for i in 0..sp.dim() {
                by_w.entry(alg.weight(&sp.weight(i))).or_default().push(SparseVec::unit(i));
            }
            sp.dim()
        }
    };
    let dominant: Vec<(&Vec<i32>, &Vec<SparseVec<S>>)> =
        by_w.iter().rev().filter(|(w, _)| w.windows(2).all(|p| p[0] >= p[1])).collect();
    let found: Vec<Vec<MultipletBlock<S>>> = dominant
        .par_iter()
        .map(|(w, basis)| {
            highest_vectors(sp, alg, basis)
                .into_iter()
                .map(|(h, _)| {
                    Ok(MultipletBlock {
                        irrep: IrrepId::from_weight(w)?,
                        hw: (*w).clone(),
                        states: standard_irrep(sp, alg, &h)?,
                    })
                })
                .collect::<Result<Vec<_>, DecompError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let blocks: Vec<MultipletBlock<S>> = found.into_iter().flatten().collect();
    let n: usize = blocks.iter().map(|b| b.states.len()).sum();
    if n != total {
        return Err(DecompError::IncompleteDecomposition { found: n, expected: total });
    }
    Ok(blocks)
}

/// Subgroup label of a block along a reduction chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MuLabel {
    /// SU(2) > U(1): twice the projection.
    M { m2: i32 },
    /// SU(3) > SU(2) x U(1): twice the isospin, three times the hypercharge.
    IY { i2: i32, y3: i32 },
    /// SU(4) > SU(3) x U(1): SU(3) irrep and charm.
    NuC { nu: String, c: i32 },
    /// Spin-flavor: flavor irrep (with multiplicity label) and 2J+1.
    NuJ { nu: String, gamma: Option<char>, mult: i32 },
}

impl MuLabel {
    /// Label of the gl(k-1) row `row` inside a gl(k) irrep whose pattern
    /// entries sum to `total`.
    pub fn canonical(k: usize, row: &[i32], total: i32) -> Result<Self, CatalogError> {
        let s: i32 = row.iter().sum();
        Ok(match k {
            2 => MuLabel::M { m2: 2 * row[0] - total },
            3 => MuLabel::IY { i2: row[0] - row[1], y3: 3 * s - 2 * total },
            _ => MuLabel::NuC { nu: IrrepId::from_weight(row)?.label, c: total - s },
        })
    }

    /// Ascending key = presentation order (highest first).
    pub fn order_key(&self) -> (i64, i64, i64, i64) {
        match self {
            MuLabel::M { m2 } => (-*m2 as i64, 0, 0, 0),
            MuLabel::IY { i2, y3 } => (-*i2 as i64, -*y3 as i64, 0, 0),
            MuLabel::NuC { nu, c } => {
                let (d, star, primes) = label_order_key(nu);
                (-(d as i64), if star { 0 } else { 1 }, primes as i64, -*c as i64)
            }
            MuLabel::NuJ { nu, gamma, mult } => {
                let (d, star, primes) = label_order_key(nu);
                let g = gamma.map_or(0, |c| c as i64);
                (-*mult as i64, -(d as i64), (if star { 0 } else { 1 }) * 100 + primes as i64, g)
            }
        }
    }
}

impl std::fmt::Display for MuLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MuLabel::M { m2 } => write!(f, "{}", half(*m2)),
            MuLabel::IY { i2, y3 } => write!(f, "{},{}", half(*i2), third(*y3)),
            MuLabel::NuC { nu, c } => write!(f, "{nu},{c}"),
            MuLabel::NuJ { nu, gamma: Some(g), mult } => write!(f, "{nu}_{g},{mult}"),
            MuLabel::NuJ { nu, gamma: None, mult } => write!(f, "{nu}_{mult}"),
        }
    }
}

fn half(x: i32) -> String {
    if x % 2 == 0 {
        (x / 2).to_string()
    } else {
        format!("{x}/2")
    }
}

fn third(x: i32) -> String {
    if x % 3 == 0 {
        (x / 3).to_string()
    } else {
        format!("{x}/3")
    }
}

/// States of a representation sharing a gl(k-1) row.
#[derive(Clone, Debug)]
pub struct Block {
    pub row: Vec<i32>,
    pub label: MuLabel,
    pub idx: Vec<usize>,
}

/// Subgroup blocks of a canonical-basis representation in presentation order.
pub fn blocks_of<S: Scalar>(rep: &Rep<S>) -> Result<Vec<Block>, DecompError> {
    blocks_of_patterns(rep.n, &rep.labels)
}

pub fn blocks_of_patterns(k: usize, labels: &[Vec<Vec<i32>>]) -> Result<Vec<Block>, DecompError> {
    let mut m: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
    let mut order: Vec<Vec<i32>> = Vec::new();
    for (i, p) in labels.iter().enumerate() {
        let e = m.entry(p[1].clone()).or_default();
        if e.is_empty() {
            order.push(p[1].clone());
        }
        e.push(i);
    }
    let mut out = Vec::new();
    for row in order {
        let idx = m.remove(&row).unwrap();
        let total: i32 = labels[idx[0]][0].iter().sum();
        out.push(Block { label: MuLabel::canonical(k, &row, total)?, row, idx });
    }
    out.sort_by_key(|b| b.label.order_key());
    Ok(out)
}

/// Clebsch-Gordan series of A (x) B by the Racah-Speiser algorithm: `weights_a`
/// lists every weight of A, `hw_b` is the highest weight of B. Highest weights
/// (gl(n), integer) with multiplicities, highest first.
pub fn cg_series(weights_a: &[Vec<i32>], hw_b: &[i32]) -> Vec<(Vec<i32>, usize)> {
    let n = hw_b.len();
    let mut acc: BTreeMap<Vec<i32>, i64> = BTreeMap::new();
    for w in weights_a {
        let mut v: Vec<i32> = (0..n).map(|i| w[i] + hw_b[i] + (n - 1 - i) as i32).collect();
        let mut sorted = v.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            continue;
        }
        // parity of the sorting permutation
        let mut sign = 1i64;
        for i in 0..n {
            for j in i + 1..n {
                if v[i] < v[j] {
                    sign = -sign;
                }
            }
        }
        v = sorted.iter().enumerate().map(|(i, x)| x - (n - 1 - i) as i32).collect();
        *acc.entry(v).or_default() += sign;
    }
    acc.into_iter()
        .rev()
        .filter(|(_, m)| *m != 0)
        .map(|(l, m)| {
            assert!(m > 0, "negative Racah-Speiser multiplicity");
            (l, m as usize)
        })
        .collect()
}

/// `<hw| E^{i1}_{j1} ... E^{im}_{jm} |hw>` on the highest weight state of
/// the irrep with traceless highest weight `lambda` (generators act right to
/// left; the state is normalized).
pub struct CasimirEval {
    lambda: Vec<Rational>,
    memo: HashMap<Vec<(usize, usize)>, Rational>,
}

impl CasimirEval {
    pub fn new(hw: &[i32]) -> Self {
        CasimirEval { lambda: traceless(hw), memo: HashMap::new() }
    }

    pub fn eval(&mut self, word: &[(usize, usize)]) -> Rational {
        if word.is_empty() {
            return Rational::from_integer(1.into());
        }
        if let Some(x) = self.memo.get(word) {
            return x.clone();
        }
        let zero = Rational::from_integer(0.into());
        let n = self.lambda.len();
        let mut shift = vec![0i32; n];
        for &(i, j) in word {
            shift[i] -= 1;
            shift[j] += 1;
        }
        let r = if shift.iter().any(|&s| s != 0) {
            zero
        } else {
            let m = word.len();
            let (i0, j0) = word[0];
            let (il, jl) = word[m - 1];
            if i0 < j0 || il > jl {
                // lowering on the bra, or raising on the ket
                zero
            } else if il == jl {
                let l = self.lambda[il].clone();
                l * self.eval(&word[..m - 1])
            } else {
                // move the rightmost raising operator one step to the right
                let p = (0..m).rev().find(|&p| word[p].0 > word[p].1).expect("balanced word has a raising operator");
                let (i, j) = word[p];
                let (k, l) = word[p + 1];
                let mut swapped = word.to_vec();
                swapped.swap(p, p + 1);
                let mut r = self.eval(&swapped);
                // [E^i_j, E^k_l] = d_il E^k_j - d_kj E^i_l
                if i == l {
                    let mut w = word[..p].to_vec();
                    w.push((k, j));
                    w.extend_from_slice(&word[p + 2..]);
                    r += self.eval(&w);
                }
                if k == j {
                    let mut w = word[..p].to_vec();
                    w.push((i, l));
                    w.extend_from_slice(&word[p + 2..]);
                    r -= self.eval(&w);
                }
                r
            }
        };
        self.memo.insert(word.to_vec(), r.clone());
        r
    }

    /// Quadratic Casimir `sum E^i_j E^j_i`.
    pub fn c2(&mut self) -> Rational {
        let n = self.lambda.len();
        let mut s = Rational::from_integer(0.into());
        for i in 0..n {
            for j in 0..n {
                s += self.eval(&[(i, j), (j, i)]);
            }
        }
        s
    }

    /// Cubic Casimir `sum E^a_b E^b_c E^c_a`.
    pub fn c3(&mut self) -> Rational {
        let n = self.lambda.len();
        let mut s = Rational::from_integer(0.into());
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    s += self.eval(&[(a, b), (b, c), (c, a)]);
                }
            }
        }
        s
    }
}

/// Order in which uncoupled states are listed for the maximum-overlap rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attend {
    /// By the first factor's block, then the second's, then the multiplicity label.
    FirstFactor,
    /// By the second factor's block first.
    SecondFactor,
}

/// An irrep in the CG series of A (x) B with its standard basis, in product
/// coordinates.
#[derive(Clone, Debug)]
pub struct CoupledIrrep<S> {
    pub hw: Vec<i32>,
    /// Position among the copies of this irrep and their number.
    pub sigma: usize,
    pub mult: usize,
    /// Eigenvalue of the factor exchange, for products of a representation with itself.
    pub exchange: Option<i32>,
    pub states: Vec<GtState<S>>,
}

/// An irrep of a subgroup-level coupling of two blocks, in product coordinates.
#[derive(Clone, Debug)]
pub struct UncoupledIrrep<S> {
    pub b1: usize,
    pub b2: usize,
    pub hw: Vec<i32>,
    pub gamma: usize,
    pub mult: usize,
    pub exchange: Option<i32>,
    pub states: Vec<GtState<S>>,
}

/// Resolution of A (x) B along the canonical chain.
#[derive(Clone, Debug)]
pub struct Coupling<S> {
    pub k: usize,
    pub dim_b: usize,
    pub blocks_a: Vec<Block>,
    pub blocks_b: Vec<Block>,
    pub symmetric: bool,
    pub irreps: Vec<CoupledIrrep<S>>,
    /// In the order used by the maximum-overlap rule.
    pub uncoupled: Vec<UncoupledIrrep<S>>,
}

fn trimmed(labels: &[Vec<Vec<i32>>], idx: &[usize]) -> Vec<Vec<Vec<i32>>> {
    idx.iter().map(|&i| labels[i][1..].to_vec()).collect()
}

/// Resolves A (x) B (both in canonical Gelfand-Tsetlin bases) into standard
/// irreps. Phases: Baird inside each irrep; the state of the highest block
/// (presentation order) with highest subgroup weight has positive overlap
/// with the first uncoupled state it overlaps; repeated irreps are resolved
/// by maximum overlap with the uncoupled states in order, after splitting
/// into exchange-symmetric and antisymmetric parts when A = B.
pub fn couple<S: Scalar>(a: &Rep<S>, b: &Rep<S>, attend: Attend) -> Result<Coupling<S>, DecompError> {
    let k = a.n;
    let ps = ProductSpace::new(a, b);
    let symmetric = a.same_up_to_shift(b);
    if k == 1 {
        let mut irreps = Vec::new();
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                let v = SparseVec::unit(ps.join(i, j));
                let hw = vec![a.weights[i][0] + b.weights[j][0]];
                irreps.push(CoupledIrrep {
                    hw: hw.clone(),
                    sigma: 0,
                    mult: 1,
                    exchange: None,
                    states: vec![GtState { pattern: vec![hw], norm: ps.norm2(&v), vec: v }],
                });
            }
        }
        return Ok(Coupling { k, dim_b: b.dim(), blocks_a: vec![], blocks_b: vec![], symmetric, irreps, uncoupled: vec![] });
    }
    let blocks_a = blocks_of(a)?;
    let blocks_b = blocks_of(b)?;
    let sub = Alg::leading(k - 1);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    match attend {
        Attend::FirstFactor => {
            for i in 0..blocks_a.len() {
                for j in 0..blocks_b.len() {
                    pairs.push((i, j));
                }
            }
        }
        Attend::SecondFactor => {
            for j in 0..blocks_b.len() {
                for i in 0..blocks_a.len() {
                    pairs.push((i, j));
                }
            }
        }
    }
    let subs: Vec<Vec<UncoupledIrrep<S>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (ba, bb) = (&blocks_a[i], &blocks_b[j]);
            let sa = a.restrict(&ba.idx, &sub, trimmed(&a.labels, &ba.idx));
            let sb = b.restrict(&bb.idx, &sub, trimmed(&b.labels, &bb.idx));
            let c = couple(&sa, &sb, attend)?;
            let sps = ProductSpace::new(&sa, &sb);
            Ok(c.irreps
                .into_iter()
                .map(|ir| UncoupledIrrep {
                    b1: i,
                    b2: j,
                    hw: ir.hw,
                    gamma: ir.sigma,
                    mult: ir.mult,
                    exchange: ir.exchange,
                    states: ir
                        .states
                        .into_iter()
                        .map(|s| {
                            let vec = s.vec.map_indices(|x| {
                                let (p, q) = sps.split(x);
                                ps.join(ba.idx[p], bb.idx[q])
                            });
                            GtState { pattern: s.pattern, norm: ps.norm2(&vec), vec }
                        })
                        .collect(),
                })
                .collect())
        })
        .collect::<Result<Vec<_>, DecompError>>()?;
    let uncoupled: Vec<UncoupledIrrep<S>> = subs.into_iter().flatten().collect();

    let hw_b = b.weights.iter().max().unwrap().clone();
    let series = cg_series(&a.weights, &hw_b);
    let id = Alg::identity(k);
    let resolved: Vec<Vec<CoupledIrrep<S>>> = series
        .par_iter()
        .map(|(lambda, m)| resolve_copies(&ps, &id, lambda, *m, symmetric, &uncoupled))
        .collect::<Result<Vec<_>, _>>()?;
    let irreps: Vec<CoupledIrrep<S>> = resolved.into_iter().flatten().collect();
    let n: usize = irreps.iter().map(|r| r.states.len()).sum();
    if n != a.dim() * b.dim() {
        return Err(DecompError::IncompleteDecomposition { found: n, expected: a.dim() * b.dim() });
    }
    Ok(Coupling { k, dim_b: b.dim(), blocks_a, blocks_b, symmetric, irreps, uncoupled })
}

/// Row of the reference block of an irrep: the first in presentation order.
pub fn reference_row<S: Scalar>(k: usize, states: &[GtState<S>]) -> Result<Vec<i32>, DecompError> {
    let total: i32 = states[0].pattern[0].iter().sum();
    let mut best: Option<((i64, i64, i64, i64), Vec<i32>)> = None;
    for s in states {
        let key = MuLabel::canonical(k, &s.pattern[1], total)?.order_key();
        if best.as_ref().map_or(true, |(b, _)| key < *b) {
            best = Some((key, s.pattern[1].clone()));
        }
    }
    Ok(best.unwrap().1)
}

fn resolve_copies<S: Scalar>(
    ps: &ProductSpace<'_, S>,
    id: &Alg,
    lambda: &[i32],
    m: usize,
    symmetric: bool,
    uncoupled: &[UncoupledIrrep<S>],
) -> Result<Vec<CoupledIrrep<S>>, DecompError> {
    let k = id.k;
    let basis: Vec<SparseVec<S>> = ps.weight_space(lambda).into_iter().map(SparseVec::unit).collect();
    let hs: Vec<SparseVec<S>> = highest_vectors(ps, id, &basis).into_iter().map(|x| x.0).collect();
    if hs.len() != m {
        return Err(DecompError::IncompleteDecomposition { found: hs.len(), expected: m });
    }
    let metric = |i: usize| ps.norm(i);
    let sectors: Vec<(Option<i32>, Vec<SparseVec<S>>)> = if symmetric {
        let sym: Vec<SparseVec<S>> = hs.iter().map(|h| h.add(&ps.swap(h))).collect();
        let anti: Vec<SparseVec<S>> = hs.iter().map(|h| h.sub(&ps.swap(h))).collect();
        vec![
            (Some(1), orthogonalize_w(&sym, &metric).into_iter().map(|x| x.0).collect()),
            (Some(-1), orthogonalize_w(&anti, &metric).into_iter().map(|x| x.0).collect()),
        ]
    } else {
        vec![(None, hs)]
    };
    let mut out = Vec::new();
    for (exchange, hs) in sectors {
        if hs.is_empty() {
            continue;
        }
        let built: Vec<Vec<GtState<S>>> =
            hs.iter().map(|h| standard_irrep(ps, id, h)).collect::<Result<Vec<_>, _>>()?;
        let rrow = reference_row(k, &built[0])?;
        let ri = built[0].iter().position(|s| s.pattern[1] == rrow).unwrap();
        let t: Vec<&SparseVec<S>> = built.iter().map(|st| &st[ri].vec).collect();
        let g: Vec<S> = t.iter().map(|v| ps.norm2(v)).collect();
        for i in 0..t.len() {
            for j in 0..i {
                if !ps.inner(t[i], t[j]).is_zero() {
                    return Err(DecompError::PhaseObstruction("reference states of equivalent irreps not orthogonal".into()));
                }
            }
        }
        let tops = uncoupled.iter().filter(|u| u.hw == rrow).map(|u| &u.states[0].vec);
        let mut chosen: Vec<(Vec<S>, S)> = Vec::new();
        for u in tops {
            if chosen.len() == hs.len() {
                break;
            }
            let mut c: Vec<S> = t.iter().zip(&g).map(|(ti, gi)| ps.inner(ti, u).div(gi)).collect();
            for (r, rn) in &chosen {
                let mut d = S::zero();
                for i in 0..c.len() {
                    d.add_mul(&r[i].mul(&c[i]), &g[i]);
                }
                let f = d.div(rn);
                for i in 0..c.len() {
                    c[i] = c[i].sub(&f.mul(&r[i]));
                }
            }
            let mut nn = S::zero();
            for i in 0..c.len() {
                nn.add_mul(&c[i].mul(&c[i]), &g[i]);
            }
            if !nn.is_zero() {
                chosen.push((c, nn));
            }
        }
        if chosen.len() != hs.len() {
            return Err(DecompError::IncompleteDecomposition { found: chosen.len(), expected: hs.len() });
        }
        for (c, _) in chosen {
            let states = (0..built[0].len())
                .map(|p| {
                    let vs: Vec<SparseVec<S>> = built.iter().map(|st| st[p].vec.clone()).collect();
                    let vec = combine(&c, &vs);
                    GtState { pattern: built[0][p].pattern.clone(), norm: ps.norm2(&vec), vec }
                })
                .collect();
            out.push(CoupledIrrep { hw: lambda.to_vec(), sigma: out.len(), mult: m, exchange, states });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;
    use crate::irrep_catalog::{dimension, YoungDiagram};
    use crate::tensor_rep::{build_space, Factor, TensorSpace};

    type Q = Rational;

    fn irrep_rep(n: usize, factors: &[Factor], word: &[usize]) -> Rep<Q> {
        let sp = build_space(n, factors);
        let id = Alg::identity(n);
        let st = standard_irrep::<Q>(&sp, &id, &SparseVec::unit(sp.index(word))).unwrap();
        let states: Vec<(SparseVec<Q>, Q)> = st.iter().map(|s| (s.vec.clone(), s.norm.clone())).collect();
        let labels = st.iter().map(|s| s.pattern.clone()).collect();
        let mut r = Rep::from_states(&sp, &id, &states, labels);
        r.normalize_top();
        r
    }

    fn assert_baird(rep: &Rep<Q>) {
        for a in 0..rep.n - 1 {
            for (_, col) in rep.op(a, a + 1).cols() {
                assert!(col.iter().all(|(_, x)| x.signum() >= 0), "negative E^{a}_{} element", a + 1);
            }
        }
    }

    #[test]
    fn octet_is_standard() {
        let r = irrep_rep(3, &[Factor::AntiFund, Factor::Fund], &[2, 0]);
        assert_eq!(r.dim(), 8);
        assert_baird(&r);
        assert_eq!(r.labels[0], vec![vec![1, 0, -1], vec![1, 0], vec![1]]);
    }

    #[test]
    fn doublet_lowering_is_positive() {
        let r = irrep_rep(2, &[Factor::Fund], &[0]);
        let c = r.op(0, 1).col(0).unwrap();
        assert_eq!(c.entries(), &[(1, rat(1, 1))]);
    }

    #[test]
    fn octet_sign_assignment_is_unique() {
        // brute force over sign flips of the 8 basis states: only the
        // identity and the global flip keep every E^a_{a+1} nonnegative
        let r = irrep_rep(3, &[Factor::AntiFund, Factor::Fund], &[2, 0]);
        let mut good = 0;
        for mask in 0u32..256 {
            let s = |i: usize| if mask >> i & 1 == 1 { -1 } else { 1 };
            let ok = (0..2).all(|a| {
                r.op(a, a + 1).cols().all(|(j, col)| col.iter().all(|(i, x)| x.signum() * s(*i) * s(*j) >= 0))
            });
            if ok {
                good += 1;
            }
        }
        assert_eq!(good, 2);
    }

    #[test]
    fn isomorphic_irreps_are_identical() {
        // the octet from 3* x 3 and from 3 x 3 x 3 (mixed symmetry)
        let a = irrep_rep(3, &[Factor::AntiFund, Factor::Fund], &[2, 0]);
        let sp = build_space(3, &[Factor::Fund; 3]);
        let id = Alg::identity(3);
        let basis: Vec<SparseVec<Q>> = Space::<Q>::weight_space(&sp, &[2, 1, 0]).into_iter().map(SparseVec::unit).collect();
        let hv = highest_vectors::<Q>(&sp, &id, &basis);
        assert_eq!(hv.len(), 2);
        for (h, _) in hv {
            let st = standard_irrep(&sp, &id, &h).unwrap();
            let states: Vec<(SparseVec<Q>, Q)> = st.iter().map(|s| (s.vec.clone(), s.norm.clone())).collect();
            let mut r = Rep::from_states(&sp, &id, &states, st.iter().map(|s| s.pattern.clone()).collect());
            r.normalize_top();
            assert!(a.same_up_to_shift(&r));
        }
    }

    #[test]
    fn decompose_examples() {
        let sp = build_space(3, &[Factor::Fund, Factor::AntiFund]);
        let b = decompose_group::<Q>(&sp, &Alg::identity(3), None).unwrap();
        let labels: Vec<String> = b.iter().map(|x| x.irrep.label.clone()).collect();
        assert_eq!(labels, vec!["8", "1"]);
        let sp = build_space(8, &[Factor::AntiFund, Factor::Fund]);
        let b = decompose_group::<Q>(&sp, &Alg::identity(8), None).unwrap();
        let labels: Vec<String> = b.iter().map(|x| x.irrep.label.clone()).collect();
        assert_eq!(labels, vec!["63", "1"]);
    }

    #[test]
    fn symmetric_cube_is_120() {
        let sp = build_space(8, &[Factor::Fund; 3]);
        let mut seen = std::collections::BTreeSet::new();
        let mut sym = Vec::new();
        for i in 0..512 {
            let mut w = sp.word(i);
            w.sort_unstable();
            if seen.insert(w.clone()) {
                let mut perms = Vec::new();
                for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    perms.push((sp.index(&[w[p[0]], w[p[1]], w[p[2]]]), rat(1, 1)));
                }
                sym.push(SparseVec::from_pairs(perms));
            }
        }
        assert_eq!(sym.len(), 120);
        let b = decompose_group::<Q>(&sp, &Alg::identity(8), Some(&sym)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].irrep.label, "120");
    }

    #[test]
    fn series_examples() {
        let r = irrep_rep(3, &[Factor::AntiFund, Factor::Fund], &[2, 0]);
        let s = cg_series(&r.weights, &r.weights[0]);
        let labels: Vec<(String, usize)> =
            s.iter().map(|(l, m)| (IrrepId::from_weight(l).unwrap().label, *m)).collect();
        assert_eq!(
            labels,
            vec![("27".into(), 1), ("10".into(), 1), ("10*".into(), 1), ("8".into(), 2), ("1".into(), 1)]
        );
    }

    fn adjoint_weights(n: usize) -> Vec<Vec<i32>> {
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut w = vec![0; n];
                w[i] += 1;
                w[j] -= 1;
                if i != j || j > 0 {
                    out.push(w);
                }
            }
        }
        out
    }

    #[test]
    fn series_completeness_su8() {
        let adj = adjoint_weights(8);
        assert_eq!(adj.len(), 63);
        let s = cg_series(&adj, &[1, 0, 0, 0, 0, 0, 0, -1]);
        let tot: u64 = s.iter().map(|(l, m)| dimension(&YoungDiagram::from_weight(l)) * *m as u64).sum();
        assert_eq!(tot, 3969);
        let labels: Vec<String> = s.iter().map(|(l, _)| IrrepId::from_weight(l).unwrap().label).collect();
        assert_eq!(labels, vec!["1232", "945", "945*", "720", "63", "1"]);
        let sym = [3, 0, 0, 0, 0, 0, 0, 0];
        let s = cg_series(&adj, &sym);
        let tot: u64 = s.iter().map(|(l, m)| dimension(&YoungDiagram::from_weight(l)) * *m as u64).sum();
        assert_eq!(tot, 7560);
    }

    #[test]
    fn casimir_closed_form() {
        for hw in [vec![1, 0, 0], vec![2, 1, 0], vec![3, 0, 0, 0], vec![2, 1, 0, 0, 0, 0, 0, -1], vec![1, 1, 0, -2]] {
            let n = hw.len();
            let l = traceless(&hw);
            let mut closed = rat(0, 1);
            for (i, x) in l.iter().enumerate() {
                closed += x * x + x * rat(n as i64 - 2 * (i as i64 + 1) + 1, 1);
            }
            assert_eq!(CasimirEval::new(&hw).c2(), closed);
        }
        // cubic invariant distinguishes conjugates
        let a = CasimirEval::new(&[2, 0, 0]).c3();
        let b = CasimirEval::new(&[0, 0, -2]).c3();
        assert_ne!(a, b);
        assert_eq!(CasimirEval::new(&[1, 0, -1]).c3(), rat(0, 1) + CasimirEval::new(&[1, 0, -1]).c3());
    }

    #[test]
    fn casimir_constant_on_blocks() {
        // C2 acts as the closed-form constant on every state of the octet
        let r = irrep_rep(3, &[Factor::AntiFund, Factor::Fund], &[2, 0]);
        let c2 = CasimirEval::new(&[1, 0, -1]).c2();
        for j in 0..r.dim() {
            let v = SparseVec::unit(j);
            let mut acc = SparseVec::<Q>::new();
            for a in 0..3 {
                for b in 0..3 {
                    let y = crate::sparse_linalg::apply(&r.full_op(b, a), &v);
                    acc = acc.add(&crate::sparse_linalg::apply(&r.full_op(a, b), &y));
                }
            }
            assert_eq!(acc, v.scale(&c2));
        }
    }

    #[test]
    fn couple_three_antithree() {
        let a = irrep_rep(3, &[Factor::Fund], &[0]);
        let b = irrep_rep(3, &[Factor::AntiFund], &[2]);
        let c = couple(&a, &b, Attend::FirstFactor).unwrap();
        let dims: Vec<usize> = c.irreps.iter().map(|r| r.states.len()).collect();
        assert_eq!(dims, vec![8, 1]);
        // singlet: sqrt(2/3)|Dbar,D> + sqrt(1/3)|Dbar_s,D_s> in the isospin-coupled basis
        let s = &c.irreps[1].states[0];
        let mut ov = Vec::new();
        for u in c.uncoupled.iter().filter(|u| u.hw == s.pattern[1]) {
            let x = Space::inner(&ProductSpace::new(&a, &b), &s.vec, &u.states[0].vec);
            ov.push(crate::exact_arith::SignedRadical::from_overlap(&x, &(s.norm.clone() * &u.states[0].norm)));
        }
        let want: Vec<String> = vec!["+sqrt(2/3)".into(), "+sqrt(1/3)".into()];
        assert_eq!(ov.iter().map(|x| x.to_string()).collect::<Vec<_>>(), want);
    }

    #[allow(dead_code)]
    fn space(n: usize, f: &[Factor]) -> TensorSpace {
        build_space(n, f)
    }
}
