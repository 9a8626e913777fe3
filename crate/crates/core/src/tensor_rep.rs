//! Carrier spaces for the ladder operators E^i_j (E^i_j moves index i to j):
//! tensor products of fundamental / antifundamental factors, representations
//! in their own (orthogonal, unnormalized) bases, products of those, and the
//! subalgebra embeddings of the reduction chains.
//!
//! Indices are 0-based throughout. Weights are kept as integer gl(n) weights
//! (letter counts); the traceless su(n) weight is `w - N/n`.

use std::collections::HashMap;

use num_bigint::BigInt;

use rayon::prelude::*;

use crate::exact_arith::{Rational, Scalar};
use crate::sparse_linalg::{Accum, SparseOp, SparseVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Fund,
    AntiFund,
}

/// Anything the ladder operators act on, with an orthogonal basis and a
/// diagonal metric.
pub trait Space<S: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn rank(&self) -> usize;
    fn norm(&self, i: usize) -> S;
    fn weight(&self, i: usize) -> Vec<i32>;
    /// Basis indices of the given integer weight.
    fn weight_space(&self, w: &[i32]) -> Vec<usize>;
    /// Off-diagonal generator E^a_b (a != b) applied to `v`.
    fn apply_e(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S>;

    fn inner(&self, v: &SparseVec<S>, w: &SparseVec<S>) -> S {
        v.dot_w(w, |i| self.norm(i))
    }
    fn norm2(&self, v: &SparseVec<S>) -> S {
        self.inner(v, v)
    }
    fn weight_of_vec(&self, v: &SparseVec<S>) -> Option<Vec<i32>> {
        v.first().map(|(i, _)| self.weight(*i))
    }
    /// Any generator, diagonal ones included, on a weight-homogeneous vector.
    fn apply_full(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        if a != b {
            return self.apply_e(a, b, v);
        }
        match self.weight_of_vec(v) {
            None => SparseVec::new(),
            Some(w) => v.scale(&traceless_component::<S>(&w, a)),
        }
    }
}

/// `w_a - (sum w)/n` as a scalar.
pub fn traceless_component<S: Scalar>(w: &[i32], a: usize) -> S {
    let n = w.len() as i64;
    let tot: i64 = w.iter().map(|&x| x as i64).sum();
    S::from_frac(w[a] as i64 * n - tot, n)
}

pub fn traceless(w: &[i32]) -> Vec<Rational> {
    (0..w.len()).map(|a| traceless_component::<Rational>(w, a)).collect()
}

/// Tensor product of (anti)fundamental factors. Basis index is the
/// mixed-radix value of the letter word, first factor most significant.
#[derive(Clone, Debug)]
pub struct TensorSpace {
    pub n: usize,
    pub factors: Vec<Factor>,
}

pub fn build_space(n: usize, factors: &[Factor]) -> TensorSpace {
    assert!(n >= 2 && !factors.is_empty());
    TensorSpace { n, factors: factors.to_vec() }
}

impl TensorSpace {
    pub fn word(&self, mut idx: usize) -> Vec<usize> {
        let mut w = vec![0; self.factors.len()];
        for p in (0..w.len()).rev() {
            w[p] = idx % self.n;
            idx /= self.n;
        }
        w
    }

    pub fn index(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &l| acc * self.n + l)
    }

    fn size(&self) -> usize {
        self.n.pow(self.factors.len() as u32)
    }

    /// Sparse matrix of E^i_j, diagonal corrections included.
    pub fn generator<S: Scalar>(&self, i: usize, j: usize) -> SparseOp<S> {
        let mut op = SparseOp::new();
        for k in 0..self.size() {
            let mut col = if i != j {
                self.apply_e(i, j, &SparseVec::unit(k))
            } else {
                SparseVec::new()
            };
            if i == j {
                let w = self.int_weight(k);
                col = SparseVec::from_pairs([(k, traceless_component::<S>(&w, i))]);
            }
            op.set_col(k, col);
        }
        op
    }

    pub fn int_weight(&self, idx: usize) -> Vec<i32> {
        let mut w = vec![0i32; self.n];
        for (l, f) in self.word(idx).iter().zip(&self.factors) {
            match f {
                Factor::Fund => w[*l] += 1,
                Factor::AntiFund => w[*l] -= 1,
            }
        }
        w
    }
}

/// Traceless weight of a basis word.
pub fn weight_of(space: &TensorSpace, idx: usize) -> Vec<Rational> {
    traceless(&space.int_weight(idx))
}

impl<S: Scalar> Space<S> for TensorSpace {
    fn dim(&self) -> usize {
        self.size()
    }
    fn rank(&self) -> usize {
        self.n
    }
    fn norm(&self, _i: usize) -> S {
        S::one()
    }
    fn weight(&self, i: usize) -> Vec<i32> {
        self.int_weight(i)
    }
    fn weight_space(&self, w: &[i32]) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.int_weight(i) == w).collect()
    }
    fn apply_full(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        if a != b {
            return self.apply_e(a, b, v);
        }
        SparseVec::from_pairs(v.iter().map(|(i, x)| (*i, x.mul(&traceless_component::<S>(&self.int_weight(*i), a)))))
    }
    fn apply_e(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        debug_assert!(a != b);
        let mut acc = Accum::new();
        let stride: Vec<usize> =
            (0..self.factors.len()).map(|p| self.n.pow((self.factors.len() - 1 - p) as u32)).collect();
        for (idx, x) in v.iter() {
            let word = self.word(*idx);
            for (p, f) in self.factors.iter().enumerate() {
                let l = word[p];
                match f {
                    // E^a_b |a> = |b>
                    Factor::Fund if l == a => {
                        acc.add(idx - a * stride[p] + b * stride[p], x.clone());
                    }
                    // E^a_b |b-bar> = -|a-bar>
                    Factor::AntiFund if l == b => {
                        acc.add(idx - b * stride[p] + a * stride[p], x.neg());
                    }
                    _ => {}
                }
            }
        }
        acc.finish()
    }
}

/// A representation in its own orthogonal basis: explicit matrices of the
/// off-diagonal generators, squared norms, integer weights and (optionally)
/// Gelfand-Tsetlin labels.
#[derive(Clone, Debug)]
pub struct Rep<S> {
    pub n: usize,
    pub norms: Vec<S>,
    pub weights: Vec<Vec<i32>>,
    pub labels: Vec<Vec<Vec<i32>>>,
    ops: Vec<SparseOp<S>>,
    /// Traceless diagonal generators, when the basis states are not weight
    /// vectors of the full algebra (e.g. a basis adapted to a subgroup).
    diag: Option<Vec<SparseOp<S>>>,
    by_weight: HashMap<Vec<i32>, Vec<usize>>,
}

impl<S: Scalar> Rep<S> {
    pub fn new(n: usize, norms: Vec<S>, weights: Vec<Vec<i32>>, labels: Vec<Vec<Vec<i32>>>, ops: Vec<SparseOp<S>>) -> Self {
        let mut by_weight: HashMap<Vec<i32>, Vec<usize>> = HashMap::new();
        for (i, w) in weights.iter().enumerate() {
            by_weight.entry(w.clone()).or_default().push(i);
        }
        Rep { n, norms, weights, labels, ops, diag: None, by_weight }
    }

    /// Matrices of an embedded algebra on the span of orthogonal `states`
    /// (which must span an invariant subspace).
    pub fn from_states(
        sp: &dyn Space<S>,
        alg: &Alg,
        states: &[(SparseVec<S>, S)],
        labels: Vec<Vec<Vec<i32>>>,
    ) -> Self {
        let k = alg.k;
        let mixed = states.iter().any(|(v, _)| {
            let w0 = sp.weight_of_vec(v).map(|w| alg.weight(&w));
            v.iter().any(|(i, _)| Some(alg.weight(&sp.weight(*i))) != w0)
        });
        if mixed {
            return Self::from_mixed_states(sp, alg, states, labels);
        }
        let weights: Vec<Vec<i32>> = states
            .iter()
            .map(|(v, _)| alg.weight(&sp.weight_of_vec(v).expect("empty state")))
            .collect();
        let mut by_w: HashMap<&[i32], Vec<usize>> = HashMap::new();
        for (i, w) in weights.iter().enumerate() {
            by_w.entry(w.as_slice()).or_default().push(i);
        }
        let mut ops = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                let mut op = SparseOp::new();
                if a != b {
                    for (j, (v, _)) in states.iter().enumerate() {
                        let y = alg.apply(sp, a, b, v);
                        if y.is_empty() {
                            continue;
                        }
                        let mut tw = weights[j].clone();
                        tw[a] -= 1;
                        tw[b] += 1;
                        let mut col = Vec::new();
                        let mut rest = y.clone();
                        for &i in by_w.get(tw.as_slice()).map(|v| v.as_slice()).unwrap_or(&[]) {
                            let c = sp.inner(&states[i].0, &y).div(&states[i].1);
                            if !c.is_zero() {
                                rest = rest.axpy(&c.neg(), &states[i].0);
                                col.push((i, c));
                            }
                        }
                        assert!(
                            rest.iter().all(|(_, x)| x.is_zero()) || rest.is_empty(),
                            "states do not span an invariant subspace"
                        );
                        op.set_col(j, SparseVec::from_pairs(col));
                    }
                }
                ops.push(op);
            }
        }
        let norms = states.iter().map(|(_, n)| n.clone()).collect();
        Rep::new(k, norms, weights, labels, ops)
    }

    /// As `from_states` for states that are not weight vectors of `alg`
    /// (only the identity embedding): every generator, diagonal ones
    /// included, is expanded on all states. `weights` then holds the weight
    /// of each state's leading component only.
    fn from_mixed_states(sp: &dyn Space<S>, alg: &Alg, states: &[(SparseVec<S>, S)], labels: Vec<Vec<Vec<i32>>>) -> Self {
        let k = alg.k;
        assert!(*alg == Alg::identity(sp.rank()), "mixed-weight states need the full algebra");
        let expand = |y: SparseVec<S>| -> SparseVec<S> {
            let mut col = Vec::new();
            let mut rest = y.clone();
            for (i, (s, n)) in states.iter().enumerate() {
                let c = sp.inner(s, &y).div(n);
                if !c.is_zero() {
                    rest = rest.axpy(&c.neg(), s);
                    col.push((i, c));
                }
            }
            assert!(rest.iter().all(|(_, x)| x.is_zero()), "states do not span an invariant subspace");
            SparseVec::from_pairs(col)
        };
        let gen = |a: usize, b: usize| -> SparseOp<S> {
            let cols: Vec<SparseVec<S>> = states.par_iter().map(|(v, _)| expand(sp.apply_full(a, b, v))).collect();
            let mut op = SparseOp::new();
            for (j, c) in cols.into_iter().enumerate() {
                if !c.is_empty() {
                    op.set_col(j, c);
                }
            }
            op
        };
        let mut ops = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                ops.push(if a == b { SparseOp::new() } else { gen(a, b) });
            }
        }
        let diag = (0..k).map(|a| gen(a, a)).collect();
        let weights = states.iter().map(|(v, _)| sp.weight_of_vec(v).expect("empty state")).collect();
        let norms = states.iter().map(|(_, n)| n.clone()).collect();
        let mut r = Rep::new(k, norms, weights, labels, ops);
        r.diag = Some(diag);
        r
    }

    /// Whether the basis states are weight vectors.
    pub fn is_weight_basis(&self) -> bool {
        self.diag.is_none()
    }

    pub fn op(&self, a: usize, b: usize) -> &SparseOp<S> {
        &self.ops[a * self.n + b]
    }

    pub fn dim(&self) -> usize {
        self.norms.len()
    }

    /// Generator including the diagonal (traceless) part.
    pub fn full_op(&self, a: usize, b: usize) -> SparseOp<S> {
        if a != b {
            return self.op(a, b).clone();
        }
        if let Some(d) = &self.diag {
            return d[a].clone();
        }
        let mut op = SparseOp::new();
        for (i, w) in self.weights.iter().enumerate() {
            op.set_col(i, SparseVec::from_pairs([(i, traceless_component::<S>(w, a))]));
        }
        op
    }

    /// `sum_b E^a_b E^b_c`.
    pub fn square_op(&self, a: usize, c: usize) -> SparseOp<S> {
        let mut op = SparseOp::new();
        let inner: Vec<SparseOp<S>> = (0..self.n).map(|b| self.full_op(b, c)).collect();
        let outer: Vec<SparseOp<S>> = (0..self.n).map(|b| self.full_op(a, b)).collect();
        for j in 0..self.dim() {
            let mut acc = Accum::new();
            for b in 0..self.n {
                if let Some(col) = inner[b].col(j) {
                    let y = crate::sparse_linalg::apply(&outer[b], col);
                    for (i, x) in y.iter() {
                        acc.add(*i, x.clone());
                    }
                }
            }
            op.set_col(j, acc.finish());
        }
        op
    }

    /// Sub-representation on basis indices `idx` for the embedded algebra
    /// `alg`; norms rescaled so that the first listed state has norm 1.
    pub fn restrict(&self, idx: &[usize], alg: &Alg, labels: Vec<Vec<Vec<i32>>>) -> Rep<S> {
        let states: Vec<(SparseVec<S>, S)> =
            idx.iter().map(|&i| (SparseVec::unit(i), self.norms[i].clone())).collect();
        let mut r = Rep::from_states(self, alg, &states, labels);
        r.normalize_top();
        r
    }

    pub fn normalize_top(&mut self) {
        if let Some(t) = self.norms.first().cloned() {
            for x in self.norms.iter_mut() {
                *x = x.div(&t);
            }
        }
    }

    /// Same matrices and norms, weights differing by a multiple of (1,...,1):
    /// the same su(n) representation carrying a different U(1) charge.
    pub fn same_up_to_shift(&self, o: &Rep<S>) -> bool {
        if self.n != o.n || self.dim() != o.dim() || self.dim() == 0 {
            return false;
        }
        let d = o.weights[0][0] - self.weights[0][0];
        let shifted = self.weights.iter().zip(&o.weights).all(|(x, y)| x.iter().zip(y).all(|(p, q)| q - p == d));
        shifted && self.same_matrices(o)
    }

    /// Structural identity (same matrices, norms and weights).
    pub fn same_as(&self, o: &Rep<S>) -> bool {
        self.weights == o.weights && self.same_matrices(o)
    }

    fn same_matrices(&self, o: &Rep<S>) -> bool {
        self.n == o.n
            && self.norms.len() == o.norms.len()
            && self.norms.iter().zip(&o.norms).all(|(a, b)| a.approx_eq(b))
            && self.ops.iter().zip(&o.ops).all(|(p, q)| {
                p.nnz() == q.nnz()
                    && p.cols().all(|(j, c)| match q.col(*j) {
                        Some(d) => c.len() == d.len() && c.iter().zip(d.iter()).all(|(x, y)| x.0 == y.0 && x.1.approx_eq(&y.1)),
                        None => c.is_empty(),
                    })
            })
    }
}

impl<S: Scalar> Space<S> for Rep<S> {
    fn dim(&self) -> usize {
        self.norms.len()
    }
    fn rank(&self) -> usize {
        self.n
    }
    fn norm(&self, i: usize) -> S {
        self.norms[i].clone()
    }
    fn weight(&self, i: usize) -> Vec<i32> {
        self.weights[i].clone()
    }
    fn weight_space(&self, w: &[i32]) -> Vec<usize> {
        self.by_weight.get(w).cloned().unwrap_or_default()
    }
    fn apply_e(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        crate::sparse_linalg::apply(self.op(a, b), v)
    }
    fn apply_full(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        match &self.diag {
            Some(d) if a == b => crate::sparse_linalg::apply(&d[a], v),
            _ if a == b => SparseVec::from_pairs(v.iter().map(|(i, x)| (*i, x.mul(&traceless_component::<S>(&self.weights[*i], a))))),
            _ => self.apply_e(a, b, v),
        }
    }
}

/// `A (x) B` of two own-basis representations; index `i * dim(B) + j`.
pub struct ProductSpace<'a, S> {
    pub a: &'a Rep<S>,
    pub b: &'a Rep<S>,
}

impl<'a, S: Scalar> ProductSpace<'a, S> {
    pub fn new(a: &'a Rep<S>, b: &'a Rep<S>) -> Self {
        assert_eq!(a.n, b.n);
        ProductSpace { a, b }
    }
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.b.dim(), i % self.b.dim())
    }
    pub fn join(&self, i: usize, j: usize) -> usize {
        i * self.b.dim() + j
    }
    /// `(X (x) Y) v`.
    pub fn apply_kron(&self, x: &SparseOp<S>, y: &SparseOp<S>, v: &SparseVec<S>) -> SparseVec<S> {
        let mut acc = Accum::new();
        for (idx, c) in v.iter() {
            let (i, j) = self.split(*idx);
            let (Some(cx), Some(cy)) = (x.col(i), y.col(j)) else { continue };
            for (p, xp) in cx.iter() {
                let cxp = c.mul(xp);
                for (q, yq) in cy.iter() {
                    acc.add_mul(self.join(*p, *q), &cxp, yq);
                }
            }
        }
        acc.finish()
    }
    /// Exchange of factors, valid when both factors are the same representation.
    pub fn swap(&self, v: &SparseVec<S>) -> SparseVec<S> {
        v.map_indices(|idx| {
            let (i, j) = self.split(idx);
            j * self.a.dim() + i
        })
    }
}

impl<'a, S: Scalar> Space<S> for ProductSpace<'a, S> {
    fn dim(&self) -> usize {
        self.a.dim() * self.b.dim()
    }
    fn rank(&self) -> usize {
        self.a.n
    }
    fn norm(&self, i: usize) -> S {
        let (p, q) = self.split(i);
        self.a.norms[p].mul(&self.b.norms[q])
    }
    fn weight(&self, i: usize) -> Vec<i32> {
        let (p, q) = self.split(i);
        self.a.weights[p].iter().zip(&self.b.weights[q]).map(|(x, y)| x + y).collect()
    }
    fn weight_space(&self, w: &[i32]) -> Vec<usize> {
        let mut out = Vec::new();
        for (p, wa) in self.a.weights.iter().enumerate() {
            let wb: Vec<i32> = w.iter().zip(wa).map(|(x, y)| x - y).collect();
            for q in self.b.weight_space(&wb) {
                out.push(self.join(p, q));
            }
        }
        out.sort_unstable();
        out
    }
    fn apply_e(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        let opa = self.a.op(a, b);
        let opb = self.b.op(a, b);
        let mut acc = Accum::new();
        for (idx, c) in v.iter() {
            let (i, j) = self.split(*idx);
            if let Some(col) = opa.col(i) {
                for (p, x) in col.iter() {
                    acc.add_mul(self.join(*p, j), c, x);
                }
            }
            if let Some(col) = opb.col(j) {
                for (q, y) in col.iter() {
                    acc.add_mul(self.join(i, *q), c, y);
                }
            }
        }
        acc.finish()
    }
    fn apply_full(&self, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        if a != b {
            return self.apply_e(a, b, v);
        }
        let mut acc = Accum::new();
        for (idx, c) in v.iter() {
            let (i, j) = self.split(*idx);
            for (p, x) in self.a.apply_full(a, a, &SparseVec::unit(i)).iter() {
                acc.add_mul(self.join(*p, j), c, x);
            }
            for (q, y) in self.b.apply_full(a, a, &SparseVec::unit(j)).iter() {
                acc.add_mul(self.join(i, *q), c, y);
            }
        }
        acc.finish()
    }
}

/// Embedding of gl(k) into the generators of a space: G^a_b is the sum of
/// the listed E^i_j.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alg {
    pub k: usize,
    terms: Vec<Vec<(usize, usize)>>,
}

impl Alg {
    pub fn identity(n: usize) -> Self {
        Self::leading(n)
    }

    /// gl(k) on the first k indices.
    pub fn leading(k: usize) -> Self {
        let mut terms = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                terms.push(vec![(a, b)]);
            }
        }
        Alg { k, terms }
    }

    /// Flavor gl(nf) inside gl(2 nf): F^a_b = E^(a,+)_(b,+) + E^(a,-)_(b,-).
    pub fn flavor(nf: usize) -> Self {
        let emb = product_embedding(nf);
        let mut terms = Vec::new();
        for a in 0..nf {
            for b in 0..nf {
                terms.push((0..2).map(|s| (emb.index(a, s), emb.index(b, s))).collect());
            }
        }
        Alg { k: nf, terms }
    }

    /// Spin gl(2) inside gl(2 nf): S^s_t = sum_f E^(f,s)_(f,t).
    pub fn spin(nf: usize) -> Self {
        let emb = product_embedding(nf);
        let mut terms = Vec::new();
        for s in 0..2 {
            for t in 0..2 {
                terms.push((0..nf).map(|f| (emb.index(f, s), emb.index(f, t))).collect());
            }
        }
        Alg { k: 2, terms }
    }

    /// The first `k` generators of this embedding (gl(k) subalgebra).
    pub fn sub(&self, k: usize) -> Self {
        let mut terms = Vec::new();
        for a in 0..k {
            for b in 0..k {
                terms.push(self.terms[a * self.k + b].clone());
            }
        }
        Alg { k, terms }
    }

    pub fn terms(&self, a: usize, b: usize) -> &[(usize, usize)] {
        &self.terms[a * self.k + b]
    }

    pub fn apply<S: Scalar>(&self, sp: &dyn Space<S>, a: usize, b: usize, v: &SparseVec<S>) -> SparseVec<S> {
        let t = self.terms(a, b);
        if t.len() == 1 {
            return sp.apply_e(t[0].0, t[0].1, v);
        }
        let mut acc = Accum::new();
        for &(i, j) in t {
            for (idx, x) in sp.apply_e(i, j, v).iter() {
                acc.add(*idx, x.clone());
            }
        }
        acc.finish()
    }

    /// Integer weight under the embedded Cartan generators.
    pub fn weight(&self, base: &[i32]) -> Vec<i32> {
        (0..self.k).map(|a| self.terms(a, a).iter().map(|&(i, _)| base[i]).sum()).collect()
    }

    /// Raising operators G^{a+1}_a.
    pub fn raising(&self) -> Vec<(usize, usize)> {
        (0..self.k.saturating_sub(1)).map(|a| (a + 1, a)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    /// SU(nf) x SU(2) inside SU(2 nf)
    ProductSu,
    /// SU(n-1) x U(1) inside SU(n)
    ChainU1,
}

/// Composite labels <-> generator indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingMap {
    pub kind: EmbeddingKind,
    pub n: usize,
    pub nf: usize,
}

impl EmbeddingMap {
    /// Index of (flavor f, spin s) with s = 0 for "+" and 1 for "-".
    pub fn index(&self, f: usize, s: usize) -> usize {
        match self.kind {
            EmbeddingKind::ProductSu => s * self.nf + f,
            EmbeddingKind::ChainU1 => f,
        }
    }
    pub fn label(&self, i: usize) -> (usize, usize) {
        match self.kind {
            EmbeddingKind::ProductSu => (i % self.nf, i / self.nf),
            EmbeddingKind::ChainU1 => (i, 0),
        }
    }
}

/// Spin-major ordering: (u,+),(d,+),...,(u,-),(d,-),...
pub fn product_embedding(nf: usize) -> EmbeddingMap {
    EmbeddingMap { kind: EmbeddingKind::ProductSu, n: 2 * nf, nf }
}

pub fn chain_embedding(n: usize) -> EmbeddingMap {
    EmbeddingMap { kind: EmbeddingKind::ChainU1, n, nf: n }
}

/// Charges (C, Y, I_z) of an integer flavor weight (u, d, s, c order).
pub fn flavor_charges(fw: &[i32]) -> (Rational, Rational, Rational) {
    let g = |i: usize| fw.get(i).copied().unwrap_or(0) as i64;
    let c = Rational::from_integer(BigInt::from(g(3)));
    let y = Rational::new(BigInt::from(g(0) + g(1) - 2 * g(2)), BigInt::from(3));
    let iz = Rational::new(BigInt::from(g(0) - g(1)), BigInt::from(2));
    (c, y, iz)
}

/// (C, Y, I_z, J_z) of a basis state. `spin_flavor` selects the SU(2 nf)
/// interpretation of the indices; otherwise the indices are plain flavors.
pub fn chain_charges(space: &TensorSpace, idx: usize, spin_flavor: bool) -> (Rational, Rational, Rational, Rational) {
    let w = space.int_weight(idx);
    if spin_flavor {
        let nf = space.n / 2;
        let fw = Alg::flavor(nf).weight(&w);
        let sw = Alg::spin(nf).weight(&w);
        let (c, y, iz) = flavor_charges(&fw);
        (c, y, iz, Rational::new(BigInt::from(sw[0] - sw[1]), BigInt::from(2)))
    } else {
        let (c, y, iz) = flavor_charges(&w);
        (c, y, iz, Rational::from_integer(BigInt::from(0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{rat, Rational};
    use crate::sparse_linalg::apply;
    use proptest::prelude::*;

    type Q = Rational;

    fn commutator_residual(sp: &TensorSpace, i: usize, j: usize, k: usize, l: usize, v: &SparseVec<Q>) -> SparseVec<Q> {
        let g = |a, b| sp.generator::<Q>(a, b);
        let (eij, ekl) = (g(i, j), g(k, l));
        let lhs = apply(&eij, &apply(&ekl, v)).sub(&apply(&ekl, &apply(&eij, v)));
        let mut rhs = SparseVec::new();
        if i == l {
            rhs = rhs.add(&apply(&g(k, j), v));
        }
        if k == j {
            rhs = rhs.sub(&apply(&g(i, l), v));
        }
        lhs.sub(&rhs)
    }

    #[test]
    fn generator_examples() {
        let f = build_space(3, &[Factor::Fund]);
        let e = f.generator::<Q>(0, 0);
        assert_eq!(apply(&e, &SparseVec::unit(0)), SparseVec::from_pairs([(0, rat(2, 3))]));
        let a = build_space(3, &[Factor::AntiFund]);
        let e = a.generator::<Q>(0, 0);
        assert_eq!(apply(&e, &SparseVec::unit(0)), SparseVec::from_pairs([(0, rat(-2, 3))]));
        let a2 = build_space(2, &[Factor::AntiFund]);
        let e = a2.generator::<Q>(0, 1);
        assert!(apply(&e, &SparseVec::unit(0)).is_empty());
        assert_eq!(apply(&e, &SparseVec::unit(1)), SparseVec::from_pairs([(0, rat(-1, 1))]));
        let f2 = build_space(2, &[Factor::Fund]);
        assert_eq!(apply(&f2.generator::<Q>(0, 1), &SparseVec::unit(0)), SparseVec::unit(1));
        let f = build_space(2, &[Factor::Fund, Factor::Fund]);
        assert!(commutator_residual(&f, 0, 1, 1, 0, &SparseVec::unit(1)).is_empty());
    }

    #[test]
    fn build_examples() {
        assert_eq!(Space::<Q>::dim(&build_space(8, &[Factor::AntiFund, Factor::Fund])), 64);
        assert_eq!(Space::<Q>::dim(&build_space(8, &[Factor::Fund; 3])), 512);
        assert_eq!(Space::<Q>::dim(&build_space(2, &[Factor::Fund])), 2);
    }

    #[test]
    fn weight_examples() {
        let f = build_space(2, &[Factor::Fund]);
        assert_eq!(weight_of(&f, 0), vec![rat(1, 2), rat(-1, 2)]);
        let a = build_space(2, &[Factor::AntiFund]);
        assert_eq!(weight_of(&a, 0), vec![rat(-1, 2), rat(1, 2)]);
        let s = build_space(8, &[Factor::Fund; 3]);
        let w = weight_of(&s, 0);
        assert_eq!(w[0], rat(21, 8));
        assert!(w[1..].iter().all(|x| *x == rat(-3, 8)));
    }

    #[test]
    fn embedding_examples() {
        let e = product_embedding(4);
        let order: Vec<usize> = (0..2).flat_map(|s| (0..4).map(move |f| (f, s))).map(|(f, s)| e.index(f, s)).collect();
        assert_eq!(order, (0..8).collect::<Vec<_>>());
        // E^{u,+}_{u,-} is E^1_5 in 1-based labels.
        assert_eq!((e.index(0, 0), e.index(0, 1)), (0, 4));
        assert_eq!(e.label(6), (2, 1));
    }

    #[test]
    fn charges_examples() {
        // D+ = c dbar in 4bar (x) 4 with the antiquark first.
        let sp = build_space(4, &[Factor::AntiFund, Factor::Fund]);
        let (c, y, iz, _) = chain_charges(&sp, sp.index(&[1, 3]), false);
        assert_eq!((c, y, iz), (rat(1, 1), rat(-1, 3), rat(1, 2)));
        // pi+ = u dbar
        let (c, y, iz, _) = chain_charges(&sp, sp.index(&[1, 0]), false);
        assert_eq!((c, y, iz), (rat(0, 1), rat(0, 1), rat(1, 1)));
        // ccc with all spins up in SU(8)
        let sp = build_space(8, &[Factor::Fund; 3]);
        let (c, y, iz, jz) = chain_charges(&sp, sp.index(&[3, 3, 3]), true);
        assert_eq!((c, y, iz, jz), (rat(3, 1), rat(0, 1), rat(0, 1), rat(3, 2)));
    }

    fn sampled_commutators(sp: &TensorSpace, seed: u64) {
        let d = Space::<Q>::dim(sp);
        let n = sp.n;
        let mut x = seed;
        let mut next = move |m: usize| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) as usize) % m
        };
        for _ in 0..50 {
            let v = SparseVec::unit(next(d));
            let (i, j, k, l) = (next(n), next(n), next(n), next(n));
            assert!(commutator_residual(sp, i, j, k, l, &v).is_empty());
        }
    }

    #[test]
    fn commutators_on_pipeline_spaces() {
        sampled_commutators(&build_space(8, &[Factor::AntiFund, Factor::Fund]), 1);
        sampled_commutators(&build_space(6, &[Factor::Fund; 3]), 2);
        sampled_commutators(&build_space(4, &[Factor::AntiFund, Factor::Fund]), 3);
        sampled_commutators(&build_space(3, &[Factor::Fund, Factor::Fund]), 4);
    }

    #[test]
    fn flavor_and_spin_commute() {
        let sp = build_space(8, &[Factor::AntiFund, Factor::Fund]);
        let (f, s) = (Alg::flavor(4), Alg::spin(4));
        for idx in [0, 9, 17, 63] {
            let v: SparseVec<Q> = SparseVec::unit(idx);
            for (a, b) in [(0, 1), (2, 3), (3, 0)] {
                for (p, q) in [(0, 1), (1, 0)] {
                    let x = f.apply(&sp, a, b, &s.apply(&sp, p, q, &v));
                    let y = s.apply(&sp, p, q, &f.apply(&sp, a, b, &v));
                    assert_eq!(x, y);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn weights_are_traceless(idx in 0usize..512) {
            let sp = build_space(8, &[Factor::Fund; 3]);
            let w = weight_of(&sp, idx);
            let s: Rational = w.iter().sum();
            prop_assert_eq!(s, rat(0, 1));
        }

        #[test]
        fn commutators_random(i in 0usize..4, j in 0usize..4, k in 0usize..4, l in 0usize..4, idx in 0usize..64) {
            let sp = build_space(4, &[Factor::Fund, Factor::AntiFund, Factor::Fund]);
            prop_assert!(commutator_residual(&sp, i, j, k, l, &SparseVec::unit(idx)).is_empty());
        }
    }
}
