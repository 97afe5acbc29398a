use std::sync::Arc;

use proptest::prelude::*;

use asfm::bip::{solve, CutMode, CutRow, ReducedBipModel};
use asfm::instances::Modular;
use asfm::oracle::brute_force_bip;
use asfm::{EvaluatedFunction, Subset};

#[test]
fn four_element_row_by_hand() {
    let f = EvaluatedFunction::new(Arc::new(Modular::new(vec![2.0, 1.0, 2.5, 0.25])), 0.5);
    let row = CutRow::generate(&f, Subset::from_elements([0]), CutMode::Asfm);
    assert_eq!(row.base(), 2.0);
    assert_eq!(row.j_star(), Some(2));
    assert_eq!(row.coeff(), &[0.0, 2.0, 2.5, 0.5]);
    assert!((row.value(&Subset::from_elements([1, 2, 3])) - 7.0).abs() < 1e-12);
    assert!((row.value(&Subset::from_elements([0, 3])) - 2.5).abs() < 1e-12);
    assert_eq!(row.value(&Subset::empty()), 2.0);

    let sfm = CutRow::generate(&f, Subset::from_elements([0]), CutMode::Sfm);
    assert_eq!(sfm.coeff(), &[0.0, 1.0, 2.5, 0.25]);
}

#[test]
fn crossing_rows_cap_the_optimum() {
    let a = CutRow::new(Subset::empty(), None, 0.0, vec![3.0, 3.0, 3.0, 0.0, 0.0, 0.0]).unwrap();
    let b = CutRow::new(Subset::empty(), None, 0.0, vec![0.0, 0.0, 0.0, 3.0, 3.0, 3.0]).unwrap();
    let rows = vec![a, b];
    let model = ReducedBipModel::new(6, 2, rows.as_slice(), Subset::empty(), Subset::empty()).unwrap();
    let sol = solve(&model, None).unwrap();
    assert_eq!(sol.z, 3.0);
    assert_eq!(brute_force_bip(&model).unwrap().0, 3.0);
    assert!(sol.z < 6.0);
}

fn model_strategy() -> impl Strategy<Value = (usize, usize, Vec<(u64, f64, Vec<f64>)>, u64, u64)> {
    (2usize..=10).prop_flat_map(|n| {
        let full = (1u64 << n) - 1;
        (
            Just(n),
            1..=n,
            prop::collection::vec((0..=full, 0.0f64..5.0, prop::collection::vec(0.0f64..3.0, n)), 1..12),
            0..=full,
            0..=full,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn branch_and_bound_matches_enumeration((n, k, raw, zero, one) in model_strategy()) {
        let rows: Vec<CutRow> = raw
            .into_iter()
            .map(|(src, base, coeff)| CutRow::new(Subset::from_mask(src), None, base, coeff).unwrap())
            .collect();
        let one = Subset::from_mask(one & !zero);
        prop_assume!(one.len() <= k);
        let model = ReducedBipModel::new(n, k, rows.as_slice(), Subset::from_mask(zero), one).unwrap();
        let sol = solve(&model, None).unwrap();
        let (z, ys) = brute_force_bip(&model).unwrap();
        prop_assert_eq!(sol.z, z);
        prop_assert!(model.is_feasible(&sol.y));
        prop_assert!(ys.contains(&sol.y));
        prop_assert_eq!(model.objective(&sol.y), sol.z);
        prop_assert!(!sol.tight_rows.is_empty());

        let hinted = solve(&model, Some(z - 0.5)).unwrap();
        prop_assert_eq!(hinted.z, z);
        let above = solve(&model, Some(z + 1.0)).unwrap();
        prop_assert_eq!(above.z, z);
    }
}
