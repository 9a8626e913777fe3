//! Particle names, the golden-table text format, emitters, fixture
//! comparison and the command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposer::spin_flavor::decompose_product_subgroup;
use crate::decomposer::{cg_series, MuLabel};
use crate::exact_arith::{rat, set_pivot_strategy, srad_ratio_as_rational, ArithError, PivotStrategy, Rational, SignedRadical};
use crate::irrep_catalog::{Chain, IrrepId};
use crate::scalar_factors::{self, full_cg, sf_table, verify_unitarity, ScalarError, SfTable};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("no particle symbol for {0}")]
    UnknownMultiplet(String),
    #[error("fixture parse error at line {0}: {1}")]
    Parse(usize, String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

const PARTICLES: &str = include_str!("../fixtures/particles.txt");

/// Directory of the golden tables; `LIECG_FIXTURES` overrides.
pub fn fixture_dir() -> PathBuf {
    std::env::var_os("LIECG_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub name: String,
    pub su8: Option<String>,
    pub su6: Option<String>,
    pub su4: String,
    pub su3: String,
    /// 2I, 3Y, C, 2J
    pub i2: i32,
    pub y3: i32,
    pub c: i32,
    pub j2: i32,
}

fn frac_times(s: &str, k: i32) -> Option<i32> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.parse::<i32>().ok()?, q.parse::<i32>().ok()?),
        None => (s.parse::<i32>().ok()?, 1),
    };
    (p * k % q == 0).then_some(p * k / q)
}

pub fn parse_particles(text: &str) -> Result<Vec<Particle>, TableError> {
    let opt = |s: &str| (s != "-").then(|| s.to_string());
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || TableError::Parse(n + 1, line.to_string());
        if f.len() != 9 {
            return Err(bad());
        }
        out.push(Particle {
            name: f[0].into(),
            su8: opt(f[1]),
            su6: opt(f[2]),
            su4: f[3].into(),
            su3: f[4].into(),
            i2: frac_times(f[5], 2).ok_or_else(bad)?,
            y3: frac_times(f[6], 3).ok_or_else(bad)?,
            c: f[7].parse().map_err(|_| bad())?,
            j2: frac_times(f[8], 2).ok_or_else(bad)?,
        });
    }
    Ok(out)
}

pub fn particles() -> Vec<Particle> {
    parse_particles(PARTICLES).expect("bundled particle list")
}

/// Symbol of the subgroup multiplet `mu` of the factor irrep `factor`: the
/// highest-weight member, preferring the lowest spin at the flavor levels.
pub fn name_state(ps: &[Particle], chain: Chain, factor: &str, mu: &MuLabel) -> Result<String, TableError> {
    let pick = |f: &dyn Fn(&Particle) -> bool| {
        ps.iter().filter(|p| f(p)).min_by_key(|p| p.j2).map(|p| p.name.clone())
    };
    let found = match (chain, mu) {
        (Chain::Su3, MuLabel::IY { i2, y3 }) => pick(&|p| p.su3 == factor && p.i2 == *i2 && p.y3 == *y3),
        (Chain::Su4, MuLabel::NuC { nu, c }) => pick(&|p| p.su4 == factor && p.su3 == *nu && p.c == *c),
        (Chain::Su6, MuLabel::NuJ { nu, mult, .. }) => {
            ps.iter().find(|p| p.su6.as_deref() == Some(factor) && p.su3 == *nu && p.j2 + 1 == *mult).map(|p| p.name.clone())
        }
        (Chain::Su8, MuLabel::NuJ { nu, mult, .. }) => {
            ps.iter().find(|p| p.su8.as_deref() == Some(factor) && p.su4 == *nu && p.j2 + 1 == *mult).map(|p| p.name.clone())
        }
        _ => None,
    };
    found.ok_or_else(|| TableError::UnknownMultiplet(format!("{} {factor} {mu}", chain.name())))
}

pub fn chain_name(c: Chain) -> &'static str {
    match c {
        Chain::Su8 => "SU8>SU4xSU2",
        Chain::Su6 => "SU6>SU3xSU2",
        Chain::Su4 => "SU4>SU3xU1",
        Chain::Su3 => "SU3>SU2xU1",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Product {
    pub group: String,
    #[serde(rename = "R1")]
    pub r1: String,
    #[serde(rename = "R2")]
    pub r2: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedCol {
    pub mu1: String,
    pub mu2: String,
    pub gammap: Option<String>,
    /// "S" or "A" for exchange-(anti)symmetrized pairs.
    pub sym: Option<String>,
    pub sign: i8,
    pub p: String,
    pub q: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedRow {
    #[serde(rename = "R")]
    pub r: String,
    pub sigma: Option<String>,
    pub mu: String,
    pub gamma: Option<String>,
    pub xi: i8,
    pub cols: Vec<NamedCol>,
}

/// A scalar-factor table with particle symbols, as printed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedTable {
    pub product: Product,
    pub chain: String,
    pub rows: Vec<NamedRow>,
}

impl NamedCol {
    pub fn label(&self) -> String {
        let mut s = match &self.gammap {
            Some(g) => format!("({},{})_{g}", self.mu1, self.mu2),
            None => format!("{},{}", self.mu1, self.mu2),
        };
        if let Some(t) = &self.sym {
            let _ = write!(s, "|{t}");
        }
        s
    }
    pub fn value(&self) -> SignedRadical {
        let p: num_bigint::BigInt = self.p.parse().expect("integer");
        let q: num_bigint::BigInt = self.q.parse().expect("integer");
        SignedRadical::new(self.sign, Rational::new(p, q))
    }
}

impl NamedRow {
    pub fn lhs(&self) -> String {
        match &self.sigma {
            Some(s) => format!("{}_{s};{}", self.r, self.mu),
            None => format!("{};{}", self.r, self.mu),
        }
    }
}

fn col_of(mu1: String, mu2: String, gp: Option<char>, sym: Option<&str>, v: &SignedRadical) -> NamedCol {
    NamedCol {
        mu1,
        mu2,
        gammap: gp.map(String::from),
        sym: sym.map(String::from),
        sign: v.sign(),
        p: v.radicand().numer().to_string(),
        q: v.radicand().denom().to_string(),
    }
}

/// Attaches particle symbols; for a product of an irrep with itself, pairs
/// (x,y) and (y,x) are merged into (|x,y> +- |y,x>)/sqrt(2), x being the one
/// listed first.
pub fn name_table(t: &SfTable<SignedRadical>, ps: &[Particle]) -> Result<NamedTable, TableError> {
    let fold = t.r1 == t.r2;
    let mut rows = Vec::new();
    for r in &t.rows {
        let mut cols = Vec::new();
        let mut used = vec![false; r.cols.len()];
        for (i, c) in r.cols.iter().enumerate() {
            if used[i] {
                continue;
            }
            let n1 = name_state(ps, t.chain, &t.r1, &c.mu1)?;
            let n2 = name_state(ps, t.chain, &t.r2, &c.mu2)?;
            let partner = (fold && c.mu1 != c.mu2)
                .then(|| {
                    r.cols
                        .iter()
                        .enumerate()
                        .find(|(j, d)| !used[*j] && d.mu1 == c.mu2 && d.mu2 == c.mu1 && d.gamma_prime == c.gamma_prime)
                })
                .flatten();
            match partner.map(|(j, d)| (j, srad_ratio_as_rational(&d.value, &c.value))) {
                Some((j, Ok(q))) if q == rat(1, 1) || q == rat(-1, 1) => {
                    used[j] = true;
                    let v = SignedRadical::new(c.value.sign(), c.value.radicand() * rat(2, 1));
                    let tag = if q == rat(1, 1) { "S" } else { "A" };
                    cols.push(col_of(n1, n2, c.gamma_prime, Some(tag), &v));
                }
                _ => cols.push(col_of(n1, n2, c.gamma_prime, None, &c.value)),
            }
        }
        rows.push(NamedRow {
            r: r.r.clone(),
            sigma: r.sigma.map(String::from),
            mu: r.mu.to_string(),
            gamma: r.gamma.map(String::from),
            xi: r.xi,
            cols,
        });
    }
    Ok(NamedTable {
        product: Product { group: t.chain.name().into(), r1: t.r1.clone(), r2: t.r2.clone() },
        chain: chain_name(t.chain).into(),
        rows,
    })
}

/// A golden table as transcribed.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub group: String,
    pub r1: String,
    pub r2: String,
    pub rows: Vec<FixtureRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureRow {
    pub xi: i8,
    pub lhs: String,
    pub cols: Vec<(String, SignedRadical)>,
}

pub fn parse_fixture(text: &str) -> Result<Fixture, TableError> {
    let mut fx: Option<Fixture> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |m: &str| TableError::Parse(n + 1, format!("{m}: {line}"));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f[0] == "PRODUCT" {
            if f.len() != 4 || fx.is_some() {
                return Err(bad("product header"));
            }
            fx = Some(Fixture { group: f[1].into(), r1: f[2].into(), r2: f[3].into(), rows: Vec::new() });
            continue;
        }
        let fx = fx.as_mut().ok_or_else(|| bad("missing PRODUCT"))?;
        if f[0] == "ROW" {
            let xi = match f.get(1) {
                Some(&"+") => 1,
                Some(&"-") => -1,
                _ => return Err(bad("exchange sign")),
            };
            let lhs = f.get(2).ok_or_else(|| bad("row label"))?;
            fx.rows.push(FixtureRow { xi, lhs: lhs.to_string(), cols: Vec::new() });
        } else if raw.starts_with(' ') && f.len() == 2 {
            let row = fx.rows.last_mut().ok_or_else(|| bad("column before row"))?;
            row.cols.push((f[0].to_string(), SignedRadical::parse(f[1]).map_err(|_| bad("coefficient"))?));
        } else {
            return Err(bad("unrecognized line"));
        }
    }
    fx.ok_or_else(|| TableError::Parse(0, "empty fixture".into()))
}

pub fn load_fixture(path: &Path) -> Result<Fixture, TableError> {
    parse_fixture(&std::fs::read_to_string(path)?)
}

/// Every golden table under `dir` (files starting with "su").
pub fn fixture_files(dir: &Path) -> Result<Vec<PathBuf>, TableError> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with("su") && s.ends_with(".txt"))
        })
        .collect();
    v.sort();
    Ok(v)
}

/// Rows whose squared coefficients do not sum to one.
pub fn fixture_normalization_errors(fx: &Fixture) -> Vec<String> {
    fx.rows
        .iter()
        .filter(|r| r.cols.iter().map(|(_, v)| v.radicand().clone()).sum::<Rational>() != rat(1, 1))
        .map(|r| r.lhs.clone())
        .collect()
}

pub fn to_fixture(t: &NamedTable) -> Fixture {
    Fixture {
        group: t.product.group.clone(),
        r1: t.product.r1.clone(),
        r2: t.product.r2.clone(),
        rows: t
            .rows
            .iter()
            .map(|r| FixtureRow { xi: r.xi, lhs: r.lhs(), cols: r.cols.iter().map(|c| (c.label(), c.value())).collect() })
            .collect(),
    }
}

/// Differences between a computed table and a golden one; empty when every
/// golden row is reproduced (sign, columns in order, values).
pub fn verify_against_fixture(t: &NamedTable, fx: &Fixture) -> Vec<String> {
    let mut diff = Vec::new();
    if t.product.group != fx.group || t.product.r1 != fx.r1 || t.product.r2 != fx.r2 {
        diff.push(format!(
            "product {} {} {} vs fixture {} {} {}",
            t.product.group, t.product.r1, t.product.r2, fx.group, fx.r1, fx.r2
        ));
        return diff;
    }
    let mine = to_fixture(t);
    for row in &fx.rows {
        let Some(m) = mine.rows.iter().find(|r| r.lhs == row.lhs) else {
            diff.push(format!("{}: row missing", row.lhs));
            continue;
        };
        if m.xi != row.xi {
            diff.push(format!("{}: xi {} expected {}", row.lhs, m.xi, row.xi));
        }
        for (i, (lab, v)) in row.cols.iter().enumerate() {
            match m.cols.get(i) {
                Some((l, w)) if l == lab && w == v => {}
                Some((l, w)) if l == lab => diff.push(format!("{}: column {lab} is {w} expected {v}", row.lhs)),
                Some((l, w)) => diff.push(format!("{}: column {} is {l} {w} expected {lab} {v}", row.lhs, i + 1)),
                None => diff.push(format!("{}: column {lab} missing", row.lhs)),
            }
        }
        for (l, w) in m.cols.iter().skip(row.cols.len()) {
            diff.push(format!("{}: extra column {l} {w}", row.lhs));
        }
    }
    diff
}

/// Fixture-format rendering.
pub fn emit_text(t: &NamedTable) -> String {
    render_fixture(&to_fixture(t))
}

pub fn render_fixture(fx: &Fixture) -> String {
    let mut s = format!("PRODUCT {} {} {}\n", fx.group, fx.r1, fx.r2);
    for r in &fx.rows {
        let _ = writeln!(s, "ROW {} {}", if r.xi > 0 { '+' } else { '-' }, r.lhs);
        for (l, v) in &r.cols {
            let _ = writeln!(s, "  {l} {v}");
        }
    }
    s
}

pub fn emit_json(t: &NamedTable) -> String {
    serde_json::to_string_pretty(t).expect("serializable") + "\n"
}

pub fn parse_json(s: &str) -> Result<NamedTable, serde_json::Error> {
    serde_json::from_str(s)
}

fn latex_name(n: &str) -> String {
    const GREEK: [&str; 10] = ["Delta", "Sigma", "Xi", "Omega", "Lambda", "rho", "pi", "eta", "omega", "psi"];
    let (base, star) = match n.strip_suffix('*') {
        Some(b) => (b, "^*"),
        None => (n, ""),
    };
    let (stem, sub) = match base.split_once('_') {
        Some((a, b)) => (a, format!("_{{{}}}", b.replace('\'', "^\\prime"))),
        None => (base, String::new()),
    };
    let (stem, prime) = match stem.strip_suffix('\'') {
        Some(s) => (s, "'"),
        None => (stem, ""),
    };
    let stem = match stem {
        "Dbar" => "\\bar{D}".to_string(),
        "Kbar" => "\\bar{K}".to_string(),
        s if GREEK.contains(&s) => format!("\\{s}"),
        s => s.to_string(),
    };
    format!("{stem}{prime}{sub}{star}")
}

fn latex_label(l: &str) -> String {
    let mut out = String::new();
    for (i, part) in l.split(';').enumerate() {
        if i > 0 {
            out.push(';');
        }
        match part.split_once('_') {
            Some((a, b)) => {
                let _ = write!(out, "{a}_{{{b}}}");
            }
            None => out.push_str(part),
        }
    }
    out
}

fn latex_radical(v: &SignedRadical) -> String {
    let (p, q) = (v.radicand().numer(), v.radicand().denom());
    let sign = if v.sign() < 0 { "-" } else { "+" };
    if q.to_string() == "1" {
        format!("{sign}\\sqrt{{{p}}}")
    } else {
        format!("{sign}\\sqrt{{\\frac{{{p}}}{{{q}}}}}")
    }
}

/// eqnarray layout: exchange sign, coupled ket, then the expansion.
pub fn emit_latex(t: &NamedTable) -> String {
    let mut s = format!(
        "% {} {} x {}\n\\begin{{eqnarray}}\n",
        t.product.group, t.product.r1, t.product.r2
    );
    for r in &t.rows {
        let terms: Vec<String> = r
            .cols
            .iter()
            .map(|c| {
                let pair = format!("{},{}", latex_name(&c.mu1), latex_name(&c.mu2));
                let ket = match (&c.gammap, &c.sym) {
                    (Some(g), Some(y)) => format!("|({pair})_{{{g}}}\\rangle_{{{y}}}"),
                    (Some(g), None) => format!("|({pair})_{{{g}}}\\rangle"),
                    (None, Some(y)) => format!("|{pair}\\rangle_{{{y}}}"),
                    (None, None) => format!("|{pair}\\rangle"),
                };
                format!("{}{ket}", latex_radical(&c.value()))
            })
            .collect();
        let _ = writeln!(
            s,
            "({})~~ |{}\\rangle &=& {} \\\\",
            if r.xi > 0 { '+' } else { '-' },
            latex_label(&r.lhs()),
            terms.join(" ")
        );
    }
    s.push_str("\\end{eqnarray}\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Latex,
}

pub fn emit(t: &NamedTable, f: Format) -> String {
    match f {
        Format::Text => emit_text(t),
        Format::Json => emit_json(t),
        Format::Latex => emit_latex(t),
    }
}

/// Computes and names the table of a product.
pub fn compute_named(chain: Chain, r1: &str, r2: &str) -> Result<NamedTable, TableError> {
    let t = sf_table::<Rational>(chain, r1, r2)?;
    name_table(&t, &particles())
}

/// Compares a golden file against a fresh computation.
pub fn verify_file(path: &Path) -> Result<Vec<String>, TableError> {
    let fx = load_fixture(path)?;
    let mut diff: Vec<String> = fixture_normalization_errors(&fx).into_iter().map(|l| format!("{l}: fixture row not normalized")).collect();
    let chain = Chain::parse(&fx.group).ok_or_else(|| TableError::Parse(1, fx.group.clone()))?;
    let t = sf_table::<Rational>(chain, &fx.r1, &fx.r2)?;
    if let Some(e) = verify_unitarity(&t) {
        diff.push(e);
    }
    diff.extend(verify_against_fixture(&name_table(&t, &particles())?, &fx));
    Ok(diff)
}

#[derive(Parser, Debug)]
#[command(name = "liecg", about = "Clebsch-Gordan series and scalar factors for spin-flavor chains")]
pub struct Cli {
    /// Worker threads (output does not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Pivot choice in exact elimination.
    #[arg(long, global = true, value_enum)]
    pub pivot: Option<PivotArg>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PivotArg {
    Smallest,
    First,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Subgroup content of a spin-flavor irrep.
    Decompose { group: String, irrep: String },
    /// Clebsch-Gordan series of a product.
    Couple { group: String, r1: String, r2: String },
    /// Scalar-factor table of a product.
    Sf {
        group: String,
        r1: String,
        r2: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Full CG coefficient along SU(3) > SU(2) > U(1) or SU(4) > SU(3) > SU(2) > U(1).
    ///
    /// States are ';'-separated labels from the top level down, e.g. for
    /// SU3: coupled "27;1,0;0", factors "1,0;1" and "1,0;-1"; a level label may
    /// carry a multiplicity letter ("8_s,0" at the SU4 level).
    Cg {
        group: String,
        r1: String,
        r2: String,
        /// Coupled irrep with its copy letter, e.g. 8_s.
        r: String,
        state: String,
        state1: String,
        state2: String,
    },
    /// Compare computed tables with the golden files.
    Verify {
        /// Also run the exact property checks on every table.
        #[arg(long)]
        all: bool,
        /// Golden files (default: all in the fixture directory).
        files: Vec<PathBuf>,
    },
    /// Re-emit a table (computed, or read from a golden file) in a format.
    Emit {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Golden file to render.
        #[arg(long)]
        fixture: Option<PathBuf>,
        group: Option<String>,
        r1: Option<String>,
        r2: Option<String>,
    },
}

fn fixture_as_named(fx: &Fixture) -> Result<NamedTable, TableError> {
    let chain = Chain::parse(&fx.group).ok_or_else(|| TableError::Parse(1, fx.group.clone()))?;
    let mut rows = Vec::new();
    for r in &fx.rows {
        let (head, mu) = r.lhs.split_once(';').ok_or_else(|| TableError::Parse(0, r.lhs.clone()))?;
        let (rr, sigma) = match head.split_once('_') {
            Some((a, b)) => (a.to_string(), Some(b.to_string())),
            None => (head.to_string(), None),
        };
        let gamma = mu.split_once('_').and_then(|(_, g)| g.split_once(',')).map(|(g, _)| g.to_string());
        let mut cols = Vec::new();
        for (l, v) in &r.cols {
            let (pair, sym) = match l.split_once('|') {
                Some((a, b)) => (a, Some(b.to_string())),
                None => (l.as_str(), None),
            };
            let (pair, gp) = match pair.strip_prefix('(').and_then(|p| p.split_once(")_")) {
                Some((p, g)) => (p, Some(g.to_string())),
                None => (pair, None),
            };
            let (a, b) = pair.split_once(',').ok_or_else(|| TableError::Parse(0, l.clone()))?;
            cols.push(NamedCol {
                mu1: a.into(),
                mu2: b.into(),
                gammap: gp,
                sym,
                sign: v.sign(),
                p: v.radicand().numer().to_string(),
                q: v.radicand().denom().to_string(),
            });
        }
        rows.push(NamedRow { r: rr, sigma, mu: mu.into(), gamma, xi: r.xi, cols });
    }
    Ok(NamedTable {
        product: Product { group: fx.group.clone(), r1: fx.r1.clone(), r2: fx.r2.clone() },
        chain: chain_name(chain).into(),
        rows,
    })
}

fn parse_level(k: usize, s: &str) -> Option<(MuLabel, Option<char>)> {
    match k {
        2 => Some((MuLabel::M { m2: frac_times(s, 2)? }, None)),
        3 => {
            let (i, y) = s.split_once(',')?;
            Some((MuLabel::IY { i2: frac_times(i, 2)?, y3: frac_times(y, 3)? }, None))
        }
        _ => {
            let (nu, c) = s.split_once(',')?;
            let (nu, g) = match nu.split_once('_') {
                Some((a, b)) => (a, b.chars().next()),
                None => (nu, None),
            };
            Some((MuLabel::NuC { nu: nu.into(), c: c.parse().ok()? }, g))
        }
    }
}

/// Label of the subgroup irrep selected by a level label.
fn sub_irrep(mu: &MuLabel) -> String {
    match mu {
        MuLabel::NuC { nu, .. } => nu.clone(),
        MuLabel::IY { i2, .. } => (i2 + 1).to_string(),
        _ => String::new(),
    }
}

/// Full CG coefficient of canonical-chain states, e.g.
/// `cg_canonical(Su3, "8", "8", "27", "1,0;0", "1,0;1", "1,0;-1")`.
pub fn cg_canonical(
    chain: Chain,
    r1: &str,
    r2: &str,
    r: &str,
    state: &str,
    state1: &str,
    state2: &str,
) -> Result<SignedRadical, TableError> {
    let bad = |s: &str| TableError::Parse(0, s.to_string());
    let top = r.split_once('_').map_or(r, |(a, _)| a);
    let sigma = r.split_once('_').and_then(|(_, s)| s.chars().next());
    let levels: Vec<&str> = state.split(';').collect();
    let l1: Vec<&str> = state1.split(';').collect();
    let l2: Vec<&str> = state2.split(';').collect();
    let n = chain.rank();
    if levels.len() != n - 1 || l1.len() != n - 1 || l2.len() != n - 1 {
        return Err(bad("one label per level expected"));
    }
    let mut tables = Vec::new();
    let (mut a, mut b, mut c, mut sg) = (r1.to_string(), r2.to_string(), top.to_string(), sigma);
    for (lvl, k) in (2..=n).rev().enumerate() {
        let (mu, g) = parse_level(k, levels[lvl]).ok_or_else(|| bad(levels[lvl]))?;
        let (mu1, _) = parse_level(k, l1[lvl]).ok_or_else(|| bad(l1[lvl]))?;
        let (mu2, _) = parse_level(k, l2[lvl]).ok_or_else(|| bad(l2[lvl]))?;
        let rows = match k {
            2 => scalar_factors::sf_su2_rows(&a, &b)?,
            3 => scalar_factors::sf_canonical::<Rational>(Chain::Su3, &a, &b)?.rows,
            _ => scalar_factors::sf_canonical::<Rational>(Chain::Su4, &a, &b)?.rows,
        };
        a = sub_irrep(&mu1);
        b = sub_irrep(&mu2);
        let next = sub_irrep(&mu);
        tables.push((rows, std::mem::replace(&mut c, next), sg, mu, mu1, mu2, g));
        sg = g;
    }
    let levels: Vec<scalar_factors::Level<'_>> =
        tables.iter().map(|(rows, c, sg, mu, mu1, mu2, g)| (rows.as_slice(), c.as_str(), *sg, mu, mu1, mu2, *g)).collect();
    Ok(full_cg(&levels)?)
}

fn run(cli: Cli) -> Result<i32, TableError> {
    if let Some(p) = cli.pivot {
        set_pivot_strategy(match p {
            PivotArg::Smallest => PivotStrategy::SmallestBits,
            PivotArg::First => PivotStrategy::FirstNonzero,
        });
    }
    let chain_of = |g: &str| Chain::parse(g).ok_or_else(|| TableError::Parse(0, format!("unknown group {g}")));
    match cli.cmd {
        Cmd::Decompose { group, irrep } => {
            let chain = chain_of(&group)?;
            let id = IrrepId::parse(chain.rank(), &irrep).map_err(|e| TableError::Parse(0, e.to_string()))?;
            let subs = decompose_product_subgroup(chain, &id).map_err(ScalarError::from)?;
            let parts: Vec<String> = subs.iter().map(|s| s.to_string()).collect();
            println!("{} {} {}", chain.name(), id.label, parts.join(" "));
        }
        Cmd::Couple { group, r1, r2 } => {
            let chain = chain_of(&group)?;
            let n = chain.rank();
            let parse = |l: &str| IrrepId::parse(n, l).map_err(|e| TableError::Parse(0, e.to_string()));
            let (a, b) = (parse(&r1)?, parse(&r2)?);
            let wa = crate::irrep_catalog::weights_of(&a.diagram);
            let hb: Vec<i32> = b.diagram.padded().iter().map(|&x| x as i32).collect();
            let mut total = 0;
            let mut parts = Vec::new();
            for (hw, m) in cg_series(&wa, &hb) {
                let id = IrrepId::from_weight(&hw).map_err(|e| TableError::Parse(0, e.to_string()))?;
                total += id.dimension as usize * m;
                parts.push(if m > 1 { format!("{}x{}", m, id.label) } else { id.label });
            }
            println!("{} x {} = {}  ({} states)", a.label, b.label, parts.join(" + "), total);
        }
        Cmd::Sf { group, r1, r2, format } => {
            let t = compute_named(chain_of(&group)?, &r1, &r2)?;
            print!("{}", emit(&t, format));
        }
        Cmd::Cg { group, r1, r2, r, state, state1, state2 } => {
            let chain = chain_of(&group)?;
            println!("{}", cg_canonical(chain, &r1, &r2, &r, &state, &state1, &state2)?);
        }
        Cmd::Verify { all, files } => {
            let files = if files.is_empty() { fixture_files(&fixture_dir())? } else { files };
            let mut failed = false;
            for f in files {
                let diff = verify_file(&f)?;
                let name = f.file_name().and_then(|s| s.to_str()).unwrap_or("?").to_string();
                if diff.is_empty() {
                    println!("ok   {name}");
                } else {
                    failed = true;
                    println!("FAIL {name}");
                    for d in diff {
                        println!("     {d}");
                    }
                }
            }
            if all {
                for (chain, a, b) in PRODUCTS {
                    let t = sf_table::<Rational>(*chain, a, b)?;
                    if let Some(e) = verify_unitarity(&t) {
                        failed = true;
                        println!("FAIL unitarity {} {a} x {b}: {e}", chain.name());
                    }
                }
            }
            return Ok(if failed { 1 } else { 0 });
        }
        Cmd::Emit { format, fixture, group, r1, r2 } => {
            let t = match (fixture, group, r1, r2) {
                (Some(f), None, None, None) => fixture_as_named(&load_fixture(&f)?)?,
                (None, Some(g), Some(a), Some(b)) => compute_named(chain_of(&g)?, &a, &b)?,
                _ => return Ok(2),
            };
            print!("{}", emit(&t, format));
        }
    }
    Ok(0)
}

/// Products with published tables.
pub const PRODUCTS: &[(Chain, &str, &str)] = &[
    (Chain::Su3, "3", "3"),
    (Chain::Su3, "3", "3*"),
    (Chain::Su3, "3*", "3*"),
    (Chain::Su3, "6", "3"),
    (Chain::Su3, "6", "3*"),
    (Chain::Su3, "8", "3"),
    (Chain::Su3, "8", "3*"),
    (Chain::Su3, "8", "8"),
    (Chain::Su3, "6", "8"),
    (Chain::Su3, "10", "3"),
    (Chain::Su3, "10", "3*"),
    (Chain::Su3, "10", "8"),
    (Chain::Su4, "15", "15"),
    (Chain::Su4, "20", "15"),
    (Chain::Su4, "20'", "15"),
    (Chain::Su6, "35", "35"),
    (Chain::Su6, "56", "35"),
    (Chain::Su8, "63", "63"),
    (Chain::Su8, "120", "63"),
];

/// Entry point of the binary; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(p) => p,
            Err(e) => {
                eprintln!("liecg: {e}");
                return 2;
            }
        };
        return pool.install(|| finish(run(cli)));
    }
    finish(run(cli))
}

fn finish(r: Result<i32, TableError>) -> i32 {
    match r {
        Ok(2) => {
            eprintln!("liecg: give either --fixture FILE or GROUP R1 R2");
            2
        }
        Ok(c) => c,
        Err(e @ TableError::Parse(..)) => {
            eprintln!("liecg: {e}");
            2
        }
        Err(e) => {
            eprintln!("liecg: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_from_particle_list() {
        let ps = particles();
        let nj = |nu: &str, mult| MuLabel::NuJ { nu: nu.into(), gamma: None, mult };
        assert_eq!(name_state(&ps, Chain::Su8, "63", &nj("15", 3)).unwrap(), "rho");
        assert_eq!(name_state(&ps, Chain::Su8, "120", &nj("20", 2)).unwrap(), "Sigma");
        assert_eq!(name_state(&ps, Chain::Su8, "120", &nj("20'", 4)).unwrap(), "Delta");
        assert_eq!(name_state(&ps, Chain::Su6, "35", &nj("8", 3)).unwrap(), "rho");
        assert_eq!(name_state(&ps, Chain::Su3, "8", &MuLabel::IY { i2: 1, y3: 3 }).unwrap(), "K");
        assert_eq!(name_state(&ps, Chain::Su4, "20'", &MuLabel::NuC { nu: "6".into(), c: 1 }).unwrap(), "Sigma_c*");
        assert_eq!(name_state(&ps, Chain::Su4, "15", &MuLabel::NuC { nu: "1".into(), c: 0 }).unwrap(), "eta_c");
        assert!(matches!(
            name_state(&ps, Chain::Su8, "63", &nj("20", 2)),
            Err(TableError::UnknownMultiplet(_))
        ));
    }

    #[test]
    fn names_are_injective() {
        let ps = particles();
        let mut seen = std::collections::HashSet::new();
        for p in &ps {
            if let Some(r) = &p.su8 {
                assert!(seen.insert((r.clone(), p.su4.clone(), p.su3.clone(), p.i2, p.y3, p.c, p.j2)), "{}", p.name);
            }
        }
        let names: std::collections::HashSet<_> = ps.iter().map(|p| &p.name).collect();
        assert_eq!(names.len(), ps.len());
    }

    #[test]
    fn fixture_roundtrip() {
        let text = "# c\nPRODUCT SU3 8 8\nROW + 1;0,0\n  pi,pi +sqrt(3/8)\n  K,Kbar|A -sqrt(1/2)\n  eta,eta -sqrt(1/8)\n";
        let fx = parse_fixture(text).unwrap();
        assert_eq!(fx.rows[0].cols.len(), 3);
        assert!(fixture_normalization_errors(&fx).is_empty());
        assert_eq!(render_fixture(&fx), text.replace("# c\n", ""));
        let named = fixture_as_named(&fx).unwrap();
        assert_eq!(to_fixture(&named), fx);
        assert_eq!(parse_json(&emit_json(&named)).unwrap(), named);
    }

    #[test]
    fn latex_layout() {
        let fx = parse_fixture("PRODUCT SU8 63 63\nROW + 1;1_1\n  rho,rho +sqrt(5/7)\n").unwrap();
        let l = emit_latex(&fixture_as_named(&fx).unwrap());
        assert!(l.contains("\\sqrt{\\frac{5}{7}}|\\rho,\\rho\\rangle"), "{l}");
        assert!(l.contains("(+)~~ |1;1_{1}\\rangle"), "{l}");
    }

    #[test]
    fn injected_sign_flip_is_reported() {
        let fx = parse_fixture("PRODUCT SU3 3 3*\nROW + 1;0,0\n  Dbar,D +sqrt(2/3)\n  Dbar_s,D_s +sqrt(1/3)\n").unwrap();
        let mut t = fixture_as_named(&fx).unwrap();
        assert!(verify_against_fixture(&t, &fx).is_empty());
        t.rows[0].cols[1].sign = -1;
        let d = verify_against_fixture(&t, &fx);
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("1;0,0") && d[0].contains("Dbar_s,D_s"), "{d:?}");
    }
}
