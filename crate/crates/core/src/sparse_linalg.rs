//! Sparse linear algebra over an exact (or, for the cross-check, approximate)
//! scalar field. Vectors stay unnormalized; squared norms travel alongside.

use std::collections::{BTreeMap, HashMap};

use crate::exact_arith::Scalar;

/// Ordered index -> nonzero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec<S> {
    entries: Vec<(usize, S)>,
}

impl<S: Scalar> Default for SparseVec<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> SparseVec<S> {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, S::one())] }
    }

    /// Builds from arbitrary (index, value) pairs; duplicates are summed, zeros dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, S)>>(pairs: I) -> Self {
        let mut m: BTreeMap<usize, S> = BTreeMap::new();
        for (i, v) in pairs {
            match m.get_mut(&i) {
                Some(x) => x.add_assign(&v),
                None => {
                    m.insert(i, v);
                }
            }
        }
        Self::from_sorted(m.into_iter())
    }

    fn from_sorted<I: Iterator<Item = (usize, S)>>(it: I) -> Self {
        SparseVec { entries: it.filter(|(_, v)| !v.is_zero()).collect() }
    }

    pub fn from_map(m: HashMap<usize, S>) -> Self {
        let mut v: Vec<(usize, S)> = m.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        v.sort_unstable_by_key(|e| e.0);
        SparseVec { entries: v }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, S)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[(usize, S)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&S> {
        self.entries.binary_search_by_key(&i, |e| e.0).ok().map(|k| &self.entries[k].1)
    }

    pub fn first(&self) -> Option<&(usize, S)> {
        self.entries.first()
    }

    pub fn scale(&self, a: &S) -> Self {
        if a.is_zero() {
            return Self::new();
        }
        SparseVec { entries: self.entries.iter().map(|(i, v)| (*i, v.mul(a))).collect() }
    }

    pub fn neg(&self) -> Self {
        SparseVec { entries: self.entries.iter().map(|(i, v)| (*i, v.neg())).collect() }
    }

    /// `self + a * w`
    pub fn axpy(&self, a: &S, w: &Self) -> Self {
        if a.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + w.entries.len());
        let (mut p, mut q) = (0, 0);
        while p < self.entries.len() || q < w.entries.len() {
            let ip = self.entries.get(p).map(|e| e.0).unwrap_or(usize::MAX);
            let iq = w.entries.get(q).map(|e| e.0).unwrap_or(usize::MAX);
            if ip < iq {
                out.push(self.entries[p].clone());
                p += 1;
            } else if iq < ip {
                out.push((iq, a.mul(&w.entries[q].1)));
                q += 1;
            } else {
                let mut v = self.entries[p].1.clone();
                v.add_mul(a, &w.entries[q].1);
                if !v.is_zero() {
                    out.push((ip, v));
                }
                p += 1;
                q += 1;
            }
        }
        SparseVec { entries: out }
    }

    pub fn add(&self, w: &Self) -> Self {
        self.axpy(&S::one(), w)
    }

    pub fn sub(&self, w: &Self) -> Self {
        self.axpy(&S::one().neg(), w)
    }

    /// Relabels indices through `f` (must be injective).
    pub fn map_indices(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut e: Vec<(usize, S)> = self.entries.iter().map(|(i, v)| (f(*i), v.clone())).collect();
        e.sort_unstable_by_key(|x| x.0);
        SparseVec { entries: e }
    }

    /// Weighted dot with a diagonal metric.
    pub fn dot_w(&self, w: &Self, metric: impl Fn(usize) -> S) -> S {
        let mut acc = S::zero();
        let (mut p, mut q) = (0, 0);
        while p < self.entries.len() && q < w.entries.len() {
            let (ip, iq) = (self.entries[p].0, w.entries[q].0);
            if ip < iq {
                p += 1;
            } else if iq < ip {
                q += 1;
            } else {
                let t = self.entries[p].1.mul(&w.entries[q].1);
                acc.add_mul(&t, &metric(ip));
                p += 1;
                q += 1;
            }
        }
        acc
    }

    /// If `self = c * w` for a scalar `c`, returns it.
    pub fn ratio_to(&self, w: &Self) -> Option<S> {
        if self.entries.len() != w.entries.len() || w.is_empty() {
            return None;
        }
        let c = self.entries[0].1.div(&w.entries[0].1);
        for ((i, a), (j, b)) in self.entries.iter().zip(w.entries.iter()) {
            if i != j || !a.approx_eq(&c.mul(b)) {
                return None;
            }
        }
        Some(c)
    }
}

pub fn dot<S: Scalar>(v: &SparseVec<S>, w: &SparseVec<S>) -> S {
    v.dot_w(w, |_| S::one())
}

/// Accumulator for building sparse vectors from many contributions.
pub struct Accum<S> {
    m: HashMap<usize, S>,
}

impl<S: Scalar> Default for Accum<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Accum<S> {
    pub fn new() -> Self {
        Accum { m: HashMap::new() }
    }
    pub fn add(&mut self, i: usize, v: S) {
        match self.m.get_mut(&i) {
            Some(x) => x.add_assign(&v),
            None => {
                self.m.insert(i, v);
            }
        }
    }
    pub fn add_mul(&mut self, i: usize, a: &S, b: &S) {
        match self.m.get_mut(&i) {
            Some(x) => x.add_mul(a, b),
            None => {
                self.m.insert(i, a.mul(b));
            }
        }
    }
    pub fn finish(self) -> SparseVec<S> {
        SparseVec::from_map(self.m)
    }
}

/// Column-major sparse matrix: input index -> output vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp<S> {
    cols: BTreeMap<usize, SparseVec<S>>,
}

impl<S: Scalar> Default for SparseOp<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> SparseOp<S> {
    pub fn new() -> Self {
        SparseOp { cols: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::new();
        for i in 0..dim {
            op.set_col(i, SparseVec::unit(i));
        }
        op
    }

    pub fn set_col(&mut self, i: usize, v: SparseVec<S>) {
        if v.is_empty() {
            self.cols.remove(&i);
        } else {
            self.cols.insert(i, v);
        }
    }

    pub fn col(&self, i: usize) -> Option<&SparseVec<S>> {
        self.cols.get(&i)
    }

    pub fn cols(&self) -> impl Iterator<Item = (&usize, &SparseVec<S>)> {
        self.cols.iter()
    }

    pub fn nnz(&self) -> usize {
        self.cols.values().map(|c| c.len()).sum()
    }
}

pub fn apply<S: Scalar>(op: &SparseOp<S>, v: &SparseVec<S>) -> SparseVec<S> {
    let mut acc = Accum::new();
    for (i, x) in v.iter() {
        if let Some(c) = op.col(*i) {
            for (j, m) in c.iter() {
                acc.add_mul(*j, x, m);
            }
        }
    }
    acc.finish()
}

/// Classical Gram-Schmidt without normalization, under a diagonal metric.
pub fn orthogonalize_w<S: Scalar>(
    vs: &[SparseVec<S>],
    metric: &dyn Fn(usize) -> S,
) -> Vec<(SparseVec<S>, S)> {
    let mut out: Vec<(SparseVec<S>, S)> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for (o, n) in &out {
            let c = v.dot_w(o, metric);
            if !c.is_zero() {
                w = w.axpy(&c.div(n).neg(), o);
            }
        }
        let n = w.dot_w(&w, metric);
        if !w.is_empty() && !n.is_zero() {
            out.push((w, n));
        }
    }
    out
}

pub fn orthogonalize<S: Scalar>(vs: &[SparseVec<S>]) -> Vec<(SparseVec<S>, S)> {
    orthogonalize_w(vs, &|_| S::one())
}

/// Reduced row echelon form of sparse rows (keyed by column). Returns the
/// reduced nonzero rows together with their pivot columns. The result is
/// independent of the pivot strategy: RREF is unique.
pub fn rref<S: Scalar>(rows: Vec<SparseVec<S>>, ncols: usize) -> Vec<(usize, SparseVec<S>)> {
    let mut pending: Vec<SparseVec<S>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    let mut done: Vec<(usize, SparseVec<S>)> = Vec::new();
    for col in 0..ncols {
        let mut best: Option<(usize, f64)> = None;
        for (k, r) in pending.iter().enumerate() {
            if let Some(x) = r.get(col) {
                let c = x.pivot_cost();
                if best.map_or(true, |(_, bc)| c < bc) {
                    best = Some((k, c));
                }
            }
        }
        let Some((k, _)) = best else { continue };
        let p = pending.swap_remove(k);
        let inv = S::one().div(p.get(col).unwrap());
        let p = p.scale(&inv);
        for r in pending.iter_mut() {
            if let Some(x) = r.get(col) {
                let f = x.neg();
                *r = r.axpy(&f, &p);
            }
        }
        pending.retain(|r| !r.is_empty());
        for (_, r) in done.iter_mut() {
            if let Some(x) = r.get(col) {
                let f = x.neg();
                *r = r.axpy(&f, &p);
            }
        }
        done.push((col, p));
    }
    done
}

/// Null space of a matrix given by sparse rows over `ncols` columns; basis
/// vectors have a single 1 at their free column.
pub fn null_space_rows<S: Scalar>(rows: Vec<SparseVec<S>>, ncols: usize) -> Vec<Vec<S>> {
    let red = rref(rows, ncols);
    let pivots: HashMap<usize, usize> = red.iter().enumerate().map(|(k, (c, _))| (*c, k)).collect();
    let mut out = Vec::new();
    for f in 0..ncols {
        if pivots.contains_key(&f) {
            continue;
        }
        let mut x = vec![S::zero(); ncols];
        x[f] = S::one();
        for (c, r) in &red {
            if let Some(v) = r.get(f) {
                x[*c] = v.neg();
            }
        }
        out.push(x);
    }
    out
}

/// Coefficient vectors `x` with `sum_j x_j images[j][k] = 0` for every `k`.
/// `images[j]` lists the images of basis vector `j` under each operator.
pub fn null_combinations<S: Scalar>(images: &[Vec<SparseVec<S>>]) -> Vec<Vec<S>> {
    let m = images.len();
    if m == 0 {
        return Vec::new();
    }
    let nops = images[0].len();
    // Row key: (op, coordinate).
    let mut rowmap: BTreeMap<(usize, usize), Vec<(usize, S)>> = BTreeMap::new();
    for (j, imgs) in images.iter().enumerate() {
        for (k, v) in imgs.iter().enumerate() {
            for (i, x) in v.iter() {
                rowmap.entry((k, *i)).or_default().push((j, x.clone()));
            }
        }
    }
    let _ = nops;
    let rows: Vec<SparseVec<S>> = rowmap.into_values().map(SparseVec::from_pairs).collect();
    null_space_rows(rows, m)
}

pub fn combine<S: Scalar>(coeffs: &[S], basis: &[SparseVec<S>]) -> SparseVec<S> {
    let mut acc = Accum::new();
    for (c, b) in coeffs.iter().zip(basis) {
        if c.is_zero() {
            continue;
        }
        for (i, x) in b.iter() {
            acc.add_mul(*i, c, x);
        }
    }
    acc.finish()
}

/// Rational basis of `{v in span(restricted_to) : op(v) = 0 for all ops}`.
pub fn joint_null_space<S: Scalar>(ops: &[SparseOp<S>], restricted_to: &[SparseVec<S>]) -> Vec<SparseVec<S>> {
    if ops.is_empty() {
        return restricted_to.to_vec();
    }
    let images: Vec<Vec<SparseVec<S>>> =
        restricted_to.iter().map(|b| ops.iter().map(|op| apply(op, b)).collect()).collect();
    null_combinations(&images).iter().map(|x| combine(x, restricted_to)).collect()
}

/// Small dense matrices for work inside low-dimensional coupling spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<S> {
    pub n: usize,
    pub m: usize,
    pub a: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Dense { n, m, a: vec![S::zero(); n * m] }
    }
    pub fn identity(n: usize) -> Self {
        let mut d = Self::zeros(n, n);
        for i in 0..n {
            d.a[i * n + i] = S::one();
        }
        d
    }
    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.a[i * self.m + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.a[i * self.m + j] = v;
    }
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.n);
        let mut r = Self::zeros(self.n, o.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let x = self.at(i, k);
                if x.is_zero() {
                    continue;
                }
                for j in 0..o.m {
                    let y = o.at(k, j);
                    if !y.is_zero() {
                        r.a[i * o.m + j].add_mul(x, y);
                    }
                }
            }
        }
        r
    }
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..self.m {
                    acc.add_mul(self.at(i, j), &v[j]);
                }
                acc
            })
            .collect()
    }
    /// `self - c * I`
    pub fn shift(&self, c: &S) -> Self {
        let mut r = self.clone();
        for i in 0..self.n.min(self.m) {
            let v = r.at(i, i).sub(c);
            r.set(i, i, v);
        }
        r
    }
    pub fn scale(&self, c: &S) -> Self {
        Dense { n: self.n, m: self.m, a: self.a.iter().map(|x| x.mul(c)).collect() }
    }
    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.n).map(|i| self.at(i, j).clone()).collect()
    }
    pub fn rows_sparse(&self) -> Vec<SparseVec<S>> {
        (0..self.n)
            .map(|i| SparseVec::from_pairs((0..self.m).map(|j| (j, self.at(i, j).clone()))))
            .collect()
    }
    pub fn null_space(&self) -> Vec<Vec<S>> {
        null_space_rows(self.rows_sparse(), self.m)
    }
}
