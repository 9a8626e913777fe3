// Double-precision run of the whole pipeline against the exact tables.

use std::collections::HashMap;

use liecg::scalar_factors::{sf_table, SfEntry};
use liecg::table_cli::PRODUCTS;

type Key = (String, Option<char>, String, Option<char>, String, String, Option<char>);

fn key<V>(e: &SfEntry<V>) -> Key {
    (e.r.clone(), e.sigma, e.mu.to_string(), e.gamma, e.mu1.to_string(), e.mu2.to_string(), e.gamma_prime)
}

#[test]
fn float_pipeline_matches_exact() {
    let mut worst = 0.0f64;
    for &(chain, r1, r2) in PRODUCTS {
        let exact = sf_table::<liecg::exact_arith::Rational>(chain, r1, r2).unwrap();
        let float = sf_table::<f64>(chain, r1, r2).unwrap_or_else(|e| panic!("{r1} x {r2}: {e}"));
        let fx: HashMap<Key, (f64, i8)> = float.entries().iter().map(|e| (key(e), (e.value, e.xi))).collect();
        let ex = exact.entries();
        assert_eq!(ex.len(), fx.len(), "{r1} x {r2}: entry count");
        for e in &ex {
            let (v, xi) = fx.get(&key(e)).unwrap_or_else(|| panic!("{r1} x {r2}: missing {:?}", key(e)));
            let d = (v - e.value.to_f64()).abs();
            worst = worst.max(d);
            assert!(d < 1e-9, "{r1} x {r2} {:?}: {v} vs {}", key(e), e.value.to_f64());
            assert_eq!(*xi, e.xi, "{r1} x {r2} {:?}: xi", key(e));
        }
    }
    eprintln!("largest deviation {worst:e}");
}
