use std::collections::BTreeMap;

use proptest::prelude::*;

use liecg::decomposer::{cg_series, DecompError};
use liecg::exact_arith::Rational;
use liecg::irrep_catalog::{dimension, weights_of, CatalogError, Chain, YoungDiagram};
use liecg::scalar_factors::{sf_table, verify_unitarity, ScalarError, SfTable};

fn arb_diagram(n: usize) -> impl Strategy<Value = YoungDiagram> {
    proptest::collection::vec(0u32..4, n - 1).prop_map(move |mut rows| {
        rows.sort_unstable_by(|a, b| b.cmp(a));
        YoungDiagram::new(&rows, n)
    })
}

fn hw(d: &YoungDiagram) -> Vec<i32> {
    d.padded().iter().map(|&x| x as i32).collect()
}

fn series(a: &YoungDiagram, b: &YoungDiagram) -> BTreeMap<Vec<i32>, usize> {
    cg_series(&weights_of(a), &hw(b)).into_iter().collect()
}

fn arb_pair() -> impl Strategy<Value = (YoungDiagram, YoungDiagram)> {
    (2usize..=5).prop_flat_map(|n| (arb_diagram(n), arb_diagram(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weight_count_is_dimension(d in (2usize..=6).prop_flat_map(arb_diagram)) {
        prop_assert_eq!(weights_of(&d).len() as u64, dimension(&d));
    }

    #[test]
    fn series_exhausts_the_product((a, b) in arb_pair()) {
        let total: u64 = series(&a, &b).iter().map(|(w, m)| dimension(&YoungDiagram::from_weight(w)) * *m as u64).sum();
        prop_assert_eq!(total, dimension(&a) * dimension(&b));
    }

    #[test]
    fn series_is_symmetric((a, b) in arb_pair()) {
        prop_assert_eq!(series(&a, &b), series(&b, &a));
    }
}

/// Products whose series contains an irrep without a catalog label are out of
/// scope: labels are never guessed.
fn labeled<V>(r: Result<SfTable<V>, ScalarError>) -> Option<SfTable<V>> {
    match r {
        Err(ScalarError::Decomp(DecompError::Catalog(CatalogError::UnlabeledDiagram(..)))) => None,
        r => Some(r.unwrap()),
    }
}

const SU3: &[&str] = &["3", "3*", "6", "6*", "8", "10"];
const SU4: &[&str] = &["4", "4*", "15"];

fn arb_product() -> impl Strategy<Value = (Chain, &'static str, &'static str)> {
    prop_oneof![
        (proptest::sample::select(SU3), proptest::sample::select(SU3)).prop_map(|(a, b)| (Chain::Su3, a, b)),
        (proptest::sample::select(SU4), proptest::sample::select(SU4)).prop_map(|(a, b)| (Chain::Su4, a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_tables_are_orthogonal((chain, a, b) in arb_product()) {
        let t = labeled(sf_table::<Rational>(chain, a, b));
        prop_assume!(t.is_some());
        let t = t.unwrap();
        prop_assert_eq!(verify_unitarity(&t), None);
        prop_assert!(t.rows.iter().all(|r| r.xi == 1 || r.xi == -1));
        if a == b {
            // rows of a symmetric product are exchange eigenstates labelled by sigma
            prop_assert!(t.rows.iter().filter(|r| r.sigma.is_some()).all(|r| (r.sigma == Some('s')) == (r.xi == 1)));
        }
    }

    #[test]
    fn float_tables_agree((chain, a, b) in arb_product()) {
        let x = labeled(sf_table::<Rational>(chain, a, b));
        prop_assume!(x.is_some());
        let x = x.unwrap().entries();
        let f = sf_table::<f64>(chain, a, b).unwrap().entries();
        prop_assert_eq!(x.len(), f.len());
        for (x, f) in x.iter().zip(&f) {
            prop_assert!((x.value.to_f64() - f.value).abs() < 1e-9);
            prop_assert_eq!(x.xi, f.xi);
        }
    }
}
