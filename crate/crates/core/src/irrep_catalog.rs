//! Young-diagram bookkeeping: dimensions, conjugates, weights, display labels,
//! and the reference reduction data for the spin-flavor irreps.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{rat_int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("no unambiguous label for diagram {0:?} of SU({1})")]
    UnlabeledDiagram(Vec<u32>, usize),
    #[error("irrep {0} has no reference reduction")]
    UnknownIrrep(String),
    #[error("unknown irrep label `{0}` for SU({1})")]
    UnknownLabel(String, usize),
}

/// Partition plus rank; canonical form drops full columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct YoungDiagram {
    pub rows: Vec<u32>,
    pub n: usize,
}

impl YoungDiagram {
    pub fn new(rows: &[u32], n: usize) -> Self {
        assert!(n >= 2);
        let mut r: Vec<u32> = rows.iter().copied().filter(|&x| x > 0).collect();
        assert!(r.windows(2).all(|w| w[0] >= w[1]), "rows must be weakly decreasing");
        assert!(r.len() <= n, "too many rows for SU({n})");
        if r.len() == n {
            let m = r[n - 1];
            r = r.iter().map(|x| x - m).filter(|&x| x > 0).collect();
        }
        YoungDiagram { rows: r, n }
    }

    /// From a gl(n) highest weight (any integer shift).
    pub fn from_weight(w: &[i32]) -> Self {
        let n = w.len();
        let m = *w.iter().min().unwrap();
        let rows: Vec<u32> = w.iter().map(|x| (x - m) as u32).collect();
        Self::new(&rows, n)
    }

    pub fn boxes(&self) -> u32 {
        self.rows.iter().sum()
    }

    pub fn row(&self, i: usize) -> u32 {
        self.rows.get(i).copied().unwrap_or(0)
    }

    pub fn first_column(&self) -> usize {
        self.rows.len()
    }

    pub fn padded(&self) -> Vec<u32> {
        (0..self.n).map(|i| self.row(i)).collect()
    }
}

impl fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

/// Hook-content formula.
pub fn dimension(d: &YoungDiagram) -> u64 {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    let n = d.n as i64;
    for (r, &len) in d.rows.iter().enumerate() {
        for c in 0..len as usize {
            let content = c as i64 - r as i64;
            num *= n + content;
            let arm = len as i64 - c as i64 - 1;
            let leg = d.rows.iter().skip(r + 1).filter(|&&l| l as usize > c).count() as i64;
            den *= arm + leg + 1;
        }
    }
    let q = &num / &den;
    debug_assert!((&num % &den).is_zero());
    q.to_u64().expect("dimension overflow")
}

pub fn conjugate(d: &YoungDiagram) -> YoungDiagram {
    let w = d.row(0);
    let rows: Vec<u32> = (0..d.n).map(|i| w - d.row(d.n - 1 - i)).collect();
    YoungDiagram::new(&rows, d.n)
}

/// Traceless highest weight.
pub fn highest_weight(d: &YoungDiagram) -> Vec<Rational> {
    let p = d.padded();
    let mean = Rational::new(BigInt::from(d.boxes()), BigInt::from(d.n));
    p.iter().map(|&x| rat_int(x as i64) - &mean).collect()
}

/// Fixed labels (SU(n), partition, label).
const TABLE: &[(usize, &[u32], &str)] = &[
    (8, &[1], "8"),
    (8, &[1, 1, 1, 1, 1, 1, 1], "8*"),
    (8, &[2, 1, 1, 1, 1, 1, 1], "63"),
    (8, &[3], "120"),
    (8, &[2, 1], "168"),
    (8, &[2, 2, 1, 1, 1, 1], "720"),
    (8, &[3, 1, 1, 1, 1, 1], "945"),
    (8, &[3, 3, 2, 2, 2, 2, 2], "945*"),
    (8, &[4, 2, 2, 2, 2, 2, 2], "1232"),
    (8, &[5, 1, 1, 1, 1, 1, 1], "2520"),
    (8, &[4, 2, 1, 1, 1, 1, 1], "4752"),
    (6, &[1], "6"),
    (6, &[1, 1, 1, 1, 1], "6*"),
    (6, &[2, 1, 1, 1, 1], "35"),
    (6, &[3], "56"),
    (6, &[2, 1], "70"),
    (6, &[2, 2, 1, 1], "189"),
    (6, &[3, 1, 1, 1], "280"),
    (6, &[3, 3, 2, 2, 2], "280*"),
    (6, &[4, 2, 2, 2, 2], "405"),
    (6, &[5, 1, 1, 1, 1], "700"),
    (6, &[4, 2, 1, 1, 1], "1134"),
    (4, &[1], "4"),
    (4, &[1, 1, 1], "4*"),
    (4, &[2, 1, 1], "15"),
    (4, &[2, 1], "20"),
    (4, &[3], "20'"),
    (4, &[2, 2], "20''"),
    (4, &[3, 2, 2], "36*"),
    (4, &[3, 1], "45"),
    (4, &[3, 3, 2], "45*"),
    (4, &[3, 3, 1], "60*"),
    (4, &[4, 2, 2], "84"),
    (4, &[5, 1, 1], "120"),
    (4, &[4, 2, 1], "140"),
    (3, &[1], "3"),
    (3, &[1, 1], "3*"),
    (3, &[2], "6"),
    (3, &[2, 2], "6*"),
    (3, &[2, 1], "8"),
    (3, &[3], "10"),
    (3, &[3, 3], "10*"),
    (3, &[3, 1], "15"),
    (3, &[3, 2], "15*"),
    (3, &[4], "15'"),
    (3, &[4, 1], "24*"),
    (3, &[4, 2], "27"),
    (3, &[5, 1], "35"),
];

fn table_label(d: &YoungDiagram) -> Option<&'static str> {
    TABLE.iter().find(|(n, r, _)| *n == d.n && YoungDiagram::new(r, *n) == *d).map(|t| t.2)
}

/// All canonical diagrams of SU(n) with at most `max_boxes` boxes.
pub fn diagrams_up_to(n: usize, max_boxes: u32) -> Vec<YoungDiagram> {
    fn rec(n: usize, left: u32, maxpart: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        if cur.len() == n - 1 {
            return;
        }
        for p in (1..=maxpart.min(left)).rev() {
            cur.push(p);
            rec(n, left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_boxes, max_boxes, &mut Vec::new(), &mut out);
    out.into_iter().map(|r| YoungDiagram::new(&r, n)).collect()
}

pub fn display_label(d: &YoungDiagram) -> Result<String, CatalogError> {
    if d.rows.is_empty() {
        return Ok("1".into());
    }
    if let Some(l) = table_label(d) {
        return Ok(l.to_string());
    }
    let dim = dimension(d);
    let c = conjugate(d);
    let bound = d.boxes().max(c.boxes()) + d.n as u32;
    let collision = diagrams_up_to(d.n, bound)
        .into_iter()
        .any(|e| e != *d && e != c && dimension(&e) == dim);
    if collision {
        return Err(CatalogError::UnlabeledDiagram(d.rows.clone(), d.n));
    }
    if c == *d {
        return Ok(dim.to_string());
    }
    match d.first_column().cmp(&c.first_column()) {
        std::cmp::Ordering::Greater => Ok(format!("{dim}*")),
        std::cmp::Ordering::Less => Ok(dim.to_string()),
        std::cmp::Ordering::Equal => Err(CatalogError::UnlabeledDiagram(d.rows.clone(), d.n)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IrrepId {
    pub diagram: YoungDiagram,
    pub dimension: u64,
    pub label: String,
}

impl IrrepId {
    pub fn new(d: YoungDiagram) -> Result<Self, CatalogError> {
        let label = display_label(&d)?;
        Ok(IrrepId { dimension: dimension(&d), label, diagram: d })
    }

    pub fn from_weight(w: &[i32]) -> Result<Self, CatalogError> {
        Self::new(YoungDiagram::from_weight(w))
    }

    pub fn parse(n: usize, label: &str) -> Result<Self, CatalogError> {
        if label == "1" {
            return Self::new(YoungDiagram::new(&[], n));
        }
        if let Some((_, r, _)) = TABLE.iter().find(|(m, _, l)| *m == n && *l == label) {
            return Self::new(YoungDiagram::new(r, n));
        }
        let dim: u64 = label
            .trim_end_matches(['*', '\''])
            .parse()
            .map_err(|_| CatalogError::UnknownLabel(label.into(), n))?;
        for d in diagrams_up_to(n, 3 * n as u32) {
            if dimension(&d) == dim && display_label(&d).as_deref() == Ok(label) {
                return Self::new(d);
            }
        }
        Err(CatalogError::UnknownLabel(label.into(), n))
    }
}

impl fmt::Display for IrrepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Weights (with multiplicity) of the irrep, one per Gelfand-Tsetlin pattern.
pub fn weights_of(d: &YoungDiagram) -> Vec<Vec<i32>> {
    fn rec(row: &[i32], sums: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        let prev: i32 = row.iter().sum();
        if row.len() == 1 {
            let mut w = vec![row[0]];
            let mut p = row[0];
            for s in sums.iter().rev() {
                w.push(s - p);
                p = *s;
            }
            out.push(w);
            return;
        }
        sums.push(prev);
        let k = row.len() - 1;
        let mut cur = vec![0; k];
        fn fill(i: usize, row: &[i32], cur: &mut Vec<i32>, sums: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
            if i == cur.len() {
                let c = cur.clone();
                rec(&c, sums, out);
                return;
            }
            for x in row[i + 1]..=row[i] {
                cur[i] = x;
                fill(i + 1, row, cur, sums, out);
            }
        }
        fill(0, row, &mut cur, sums, out);
        sums.pop();
    }
    let top: Vec<i32> = d.padded().iter().map(|&x| x as i32).collect();
    let mut out = Vec::new();
    rec(&top, &mut Vec::new(), &mut out);
    out
}

/// Presentation order of labels: dimension, then unstarred before starred,
/// then by number of primes.
pub fn label_order_key(label: &str) -> (u64, bool, usize) {
    let dim = label.trim_end_matches(['*', '\'']).parse().unwrap_or(u64::MAX);
    (dim, label.contains('*'), label.matches('\'').count())
}

/// Subgroup irrep of a spin-flavor reduction: flavor irrep, multiplicity
/// label and spin multiplicity 2J+1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubIrrep {
    pub flavor: String,
    pub gamma: Option<char>,
    pub spin_mult: u32,
}

impl SubIrrep {
    pub fn parse(s: &str) -> Option<Self> {
        let (f, rest) = s.rsplit_once('_')?;
        let (gamma, m) = match rest.split_once(',') {
            Some((g, m)) => (g.chars().next(), m),
            None => (None, rest),
        };
        Some(SubIrrep { flavor: f.to_string(), gamma, spin_mult: m.parse().ok()? })
    }
}

impl fmt::Display for SubIrrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma {
            Some(g) => write!(f, "{}_{},{}", self.flavor, g, self.spin_mult),
            None => write!(f, "{}_{}", self.flavor, self.spin_mult),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chain {
    /// SU(8) > SU(4) x SU(2)
    Su8,
    /// SU(6) > SU(3) x SU(2)
    Su6,
    /// SU(4) > SU(3) x U(1)
    Su4,
    /// SU(3) > SU(2) x U(1)
    Su3,
}

impl Chain {
    pub fn rank(self) -> usize {
        match self {
            Chain::Su8 => 8,
            Chain::Su6 => 6,
            Chain::Su4 => 4,
            Chain::Su3 => 3,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Chain::Su8 => "SU8",
            Chain::Su6 => "SU6",
            Chain::Su4 => "SU4",
            Chain::Su3 => "SU3",
        }
    }
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().replace(['(', ')'], "").as_str() {
            "SU8" => Some(Chain::Su8),
            "SU6" => Some(Chain::Su6),
            "SU4" => Some(Chain::Su4),
            "SU3" => Some(Chain::Su3),
            _ => None,
        }
    }
    /// Flavor rank of a spin-flavor chain.
    pub fn flavors(self) -> Option<usize> {
        match self {
            Chain::Su8 => Some(4),
            Chain::Su6 => Some(3),
            _ => None,
        }
    }
}

pub const REDUCTIONS: &str = include_str!("../fixtures/reductions.txt");

/// Reference reduction content of a spin-flavor irrep.
pub fn expected_reduction(r: &IrrepId, chain: Chain) -> Result<Vec<SubIrrep>, CatalogError> {
    for line in REDUCTIONS.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut f = line.split_whitespace();
        let (Some(g), Some(l)) = (f.next(), f.next()) else { continue };
        if g == chain.name() && l == r.label {
            return Ok(f.filter_map(SubIrrep::parse).collect());
        }
    }
    Err(CatalogError::UnknownIrrep(r.label.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    fn yd(r: &[u32], n: usize) -> YoungDiagram {
        YoungDiagram::new(r, n)
    }

    #[test]
    fn weight_multiset() {
        let w = weights_of(&yd(&[2, 1], 3));
        assert_eq!(w.len(), 8);
        assert_eq!(w.iter().filter(|x| **x == vec![1, 1, 1]).count(), 2);
        assert!(w.contains(&vec![2, 1, 0]) && w.contains(&vec![0, 1, 2]));
        assert_eq!(weights_of(&yd(&[1, 1], 8)).len(), 28);
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(&yd(&[2, 1, 1, 1, 1, 1, 1], 8)), 63);
        assert_eq!(dimension(&yd(&[1], 8)), 8);
        assert_eq!(dimension(&yd(&[4, 2, 1, 1, 1, 1, 1], 8)), 4752);
        assert_eq!(dimension(&yd(&[2, 1], 3)), 8);
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate(&yd(&[3, 1], 4)), yd(&[3, 3, 2], 4));
        assert_eq!(conjugate(&yd(&[2, 1], 3)), yd(&[2, 1], 3));
        assert_eq!(conjugate(&yd(&[1], 3)), yd(&[1, 1], 3));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(highest_weight(&yd(&[1], 2)), vec![rat(1, 2), rat(-1, 2)]);
        assert!(highest_weight(&yd(&[], 3)).iter().all(|x| x.is_zero()));
        let w = highest_weight(&yd(&[2, 1, 1, 1, 1, 1, 1], 8));
        assert_eq!(w[0], rat(1, 1));
        assert_eq!(w[7], rat(-1, 1));
        assert!(w[1..7].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn label_examples() {
        assert_eq!(display_label(&yd(&[2, 2], 4)).unwrap(), "20''");
        assert_eq!(display_label(&yd(&[3, 3, 2, 2, 2, 2, 2], 8)).unwrap(), "945*");
        assert_eq!(display_label(&yd(&[3, 2], 3)).unwrap(), "15*");
    }

    #[test]
    fn table_roundtrip() {
        for (n, r, l) in TABLE {
            let d = yd(r, *n);
            assert_eq!(display_label(&d).unwrap(), *l);
            let dim: u64 = l.trim_end_matches(['*', '\'']).parse().unwrap();
            assert_eq!(dimension(&d), dim);
            assert_eq!(IrrepId::parse(*n, l).unwrap().diagram, d);
        }
    }

    #[test]
    fn conjugation_properties() {
        for n in [3, 4, 6, 8] {
            for d in diagrams_up_to(n, 6) {
                let c = conjugate(&d);
                assert_eq!(dimension(&c), dimension(&d));
                assert_eq!(conjugate(&c), d);
            }
        }
    }

    #[test]
    fn reduction_examples() {
        let r = expected_reduction(&IrrepId::parse(8, "63").unwrap(), Chain::Su8).unwrap();
        let s: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["1_3", "15_1", "15_3"]);
        let r = expected_reduction(&IrrepId::parse(8, "120").unwrap(), Chain::Su8).unwrap();
        assert_eq!(r.len(), 2);
        let r = expected_reduction(&IrrepId::parse(6, "1134").unwrap(), Chain::Su6).unwrap();
        assert_eq!(r.len(), 23);
        assert!(r.iter().any(|x| x.to_string() == "8_b,2"));
        assert!(expected_reduction(&IrrepId::parse(8, "8").unwrap(), Chain::Su8).is_err());
    }

    #[test]
    fn reduction_dimension_sums() {
        for line in REDUCTIONS.lines().filter(|l| !l.starts_with('#')) {
            let mut f = line.split_whitespace();
            let chain = Chain::parse(f.next().unwrap()).unwrap();
            let big = IrrepId::parse(chain.rank(), f.next().unwrap()).unwrap();
            let nf = chain.flavors().unwrap();
            let total: u64 = f
                .map(|e| {
                    let s = SubIrrep::parse(e).unwrap();
                    IrrepId::parse(nf, &s.flavor).unwrap().dimension * s.spin_mult as u64
                })
                .sum();
            assert_eq!(total, big.dimension, "{}", big.label);
        }
    }
}
