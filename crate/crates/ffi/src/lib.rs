//! C interface to the scalar-factor engine.
//!
//! Every call returns a [`LiecgStatus`]; on failure a message is kept per
//! thread and read with [`liecg_last_error`]. Tables are opaque handles
//! released with [`liecg_table_free`]; strings handed out are released with
//! [`liecg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use liecg::decomposer::spin_flavor::decompose_product_subgroup;
use liecg::decomposer::DecompError;
use liecg::exact_arith::{set_pivot_strategy, PivotStrategy, Rational};
use liecg::irrep_catalog::{CatalogError, Chain, IrrepId};
use liecg::scalar_factors::{sf_table, ScalarError};
use liecg::table_cli::{emit_json, emit_text, name_table, particles, NamedTable, TableError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiecgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownGroup = 3,
    UnknownIrrep = 4,
    /// An irrep of the series has no catalog label.
    Unlabeled = 5,
    /// The decomposition or a phase convention failed.
    Computation = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiecgPivot {
    Smallest = 0,
    First = 1,
}

/// Opaque scalar-factor table.
pub struct LiecgTable {
    named: NamedTable,
}

/// A coefficient as its sign (-1, 0, 1) and magnitude.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiecgCoefficient {
    pub sign: i32,
    pub value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

struct Fail(LiecgStatus, String);

impl From<TableError> for Fail {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Scalar(s) => s.into(),
            e => Fail(LiecgStatus::Computation, e.to_string()),
        }
    }
}

impl From<ScalarError> for Fail {
    fn from(e: ScalarError) -> Self {
        let msg = e.to_string();
        let code = match &e {
            ScalarError::UnknownFactor(..) => LiecgStatus::UnknownIrrep,
            ScalarError::Decomp(d) => return Fail::from_decomp(d, msg),
            _ => LiecgStatus::Computation,
        };
        Fail(code, msg)
    }
}

impl From<CatalogError> for Fail {
    fn from(e: CatalogError) -> Self {
        let code = match e {
            CatalogError::UnlabeledDiagram(..) => LiecgStatus::Unlabeled,
            CatalogError::UnknownIrrep(_) | CatalogError::UnknownLabel(..) => LiecgStatus::UnknownIrrep,
        };
        Fail(code, e.to_string())
    }
}

impl Fail {
    fn from_decomp(d: &DecompError, msg: String) -> Self {
        match d {
            DecompError::Catalog(c) => Fail(Fail::from(c.clone()).0, msg),
            _ => Fail(LiecgStatus::Computation, msg),
        }
    }
}

/// Runs `f`, recording its error and turning panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LiecgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LiecgStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            set_error(format!("internal error: {}", msg.unwrap_or_default()));
            LiecgStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(LiecgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(LiecgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn chain(group: &str) -> Result<Chain, Fail> {
    Chain::parse(group).ok_or_else(|| Fail(LiecgStatus::UnknownGroup, format!("unknown group {group}")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(LiecgStatus::NullPointer, "output pointer is null".into()));
    }
    *out = CString::new(s).map_err(|e| Fail(LiecgStatus::Computation, e.to_string()))?.into_raw();
    Ok(())
}

unsafe fn table<'a>(t: *const LiecgTable) -> Result<&'a LiecgTable, Fail> {
    t.as_ref().ok_or_else(|| Fail(LiecgStatus::NullPointer, "table is null".into()))
}

fn row(t: &LiecgTable, i: usize) -> Result<&liecg::table_cli::NamedRow, Fail> {
    t.named.rows.get(i).ok_or_else(|| Fail(LiecgStatus::OutOfRange, format!("row {i} of {}", t.named.rows.len())))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn liecg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Pivot choice for exact elimination (process-wide; results do not depend on it).
#[no_mangle]
pub extern "C" fn liecg_set_pivot(p: LiecgPivot) {
    set_pivot_strategy(match p {
        LiecgPivot::Smallest => PivotStrategy::SmallestBits,
        LiecgPivot::First => PivotStrategy::FirstNonzero,
    });
}

/// Computes the exact scalar-factor table of `r1 x r2` in `group`
/// ("SU3", "SU4", "SU6", "SU8").
///
/// # Safety
/// The strings must be null or NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn liecg_sf_table(
    group: *const c_char,
    r1: *const c_char,
    r2: *const c_char,
    out: *mut *mut LiecgTable,
) -> LiecgStatus {
    guard(|| {
        let (g, a, b) = (read_str(group, "group")?, read_str(r1, "r1")?, read_str(r2, "r2")?);
        if out.is_null() {
            return Err(Fail(LiecgStatus::NullPointer, "output pointer is null".into()));
        }
        let t = sf_table::<Rational>(chain(g)?, a, b)?;
        let named = name_table(&t, &particles())?;
        *out = Box::into_raw(Box::new(LiecgTable { named }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from [`liecg_sf_table`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn liecg_table_free(t: *mut LiecgTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn liecg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The table as JSON (same bytes as the command-line tool).
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn liecg_table_json(t: *const LiecgTable, out: *mut *mut c_char) -> LiecgStatus {
    guard(|| put_string(out, emit_json(&table(t)?.named)))
}

/// The table in the line-oriented golden-file format.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn liecg_table_text(t: *const LiecgTable, out: *mut *mut c_char) -> LiecgStatus {
    guard(|| put_string(out, emit_text(&table(t)?.named)))
}

/// Number of rows (coupled states).
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn liecg_table_rows(t: *const LiecgTable) -> usize {
    t.as_ref().map_or(0, |t| t.named.rows.len())
}

/// Label `R_sigma;mu_gamma`, exchange sign and column count of row `i`.
///
/// # Safety
/// `t` must be a live handle; each output must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn liecg_table_row(
    t: *const LiecgTable,
    i: usize,
    label: *mut *mut c_char,
    xi: *mut i32,
    cols: *mut usize,
) -> LiecgStatus {
    guard(|| {
        let r = row(table(t)?, i)?;
        if !xi.is_null() {
            *xi = r.xi as i32;
        }
        if !cols.is_null() {
            *cols = r.cols.len();
        }
        if !label.is_null() {
            put_string(label, r.lhs())?;
        }
        Ok(())
    })
}

/// Column `j` of row `i`: particle-pair label, exact value as
/// `+sqrt(p/q)` text, and its sign and magnitude.
///
/// # Safety
/// `t` must be a live handle; each output must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn liecg_table_coefficient(
    t: *const LiecgTable,
    i: usize,
    j: usize,
    label: *mut *mut c_char,
    exact: *mut *mut c_char,
    value: *mut LiecgCoefficient,
) -> LiecgStatus {
    guard(|| {
        let r = row(table(t)?, i)?;
        let c = r.cols.get(j).ok_or_else(|| Fail(LiecgStatus::OutOfRange, format!("column {j} of {}", r.cols.len())))?;
        let v = c.value();
        if !value.is_null() {
            *value = LiecgCoefficient { sign: v.sign() as i32, value: v.to_f64().abs() };
        }
        if !label.is_null() {
            put_string(label, c.label())?;
        }
        if !exact.is_null() {
            put_string(exact, v.to_string())?;
        }
        Ok(())
    })
}

/// Subgroup content of a spin-flavor irrep ("SU6", "56" gives "8_2 10_4").
///
/// # Safety
/// The strings must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn liecg_decompose(group: *const c_char, irrep: *const c_char, out: *mut *mut c_char) -> LiecgStatus {
    guard(|| {
        let c = chain(read_str(group, "group")?)?;
        let id = IrrepId::parse(c.rank(), read_str(irrep, "irrep")?)?;
        let subs = decompose_product_subgroup(c, &id).map_err(|e| Fail::from(ScalarError::from(e)))?;
        put_string(out, subs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_mapping() {
        let f = Fail::from(ScalarError::Decomp(DecompError::Catalog(CatalogError::UnlabeledDiagram(vec![4, 4], 3))));
        assert_eq!(f.0, LiecgStatus::Unlabeled);
        let f = Fail::from(TableError::Scalar(ScalarError::UnknownFactor("15".into(), "SU3".into())));
        assert_eq!(f.0, LiecgStatus::UnknownIrrep);
        assert_eq!(Fail::from(ScalarError::ZetaDependence("x".into())).0, LiecgStatus::Computation);
    }

    #[test]
    fn panics_become_a_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, LiecgStatus::Panic);
        let msg = unsafe { CStr::from_ptr(liecg_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }
}
