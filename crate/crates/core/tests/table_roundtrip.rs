use mazer_core::config::{parse_config, parse_grid};
use mazer_core::master::Method;
use mazer_core::table::*;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn key() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,8}"
}

fn table() -> impl Strategy<Value = Table> {
    (1usize..6, 0usize..8).prop_flat_map(|(ncol, nrow)| {
        (
            proptest::collection::btree_set(key(), ncol),
            proptest::collection::vec(proptest::collection::vec(finite(), ncol), nrow),
            proptest::collection::btree_map(key(), "[A-Za-z0-9.+-]{1,12}", 0..5),
            proptest::collection::btree_map(key(), finite(), 0..4),
            proptest::option::of((any::<bool>(), 0usize..1_000_000, finite(), finite(), any::<bool>())),
        )
            .prop_map(|(cols, rows, config, summary, conv)| Table {
                config,
                columns: cols.into_iter().collect(),
                rows,
                summary,
                convergence: conv.map(|(rk4, iterations, time, residual, accepted)| Convergence {
                    method: if rk4 { Method::Rk4 } else { Method::Direct },
                    iterations,
                    time,
                    dt: 2e-3,
                    residual,
                    tail_leak: 1e-30,
                    tail_mass: 3.5e-17,
                    accepted,
                }),
            })
    })
}

/// -0.0 and 0.0 compare equal, so equality alone would miss a lost sign.
fn bits(t: &Table) -> Vec<u64> {
    t.rows.iter().flatten().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn csv_round_trip(t in table()) {
        let text = to_csv(&t).unwrap();
        let back = from_csv(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(bits(&back), bits(&t));
        prop_assert_eq!(to_csv(&back).unwrap(), text);
    }

    #[test]
    fn json_round_trip(t in table()) {
        let text = to_json(&t).unwrap();
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(bits(&back), bits(&t));
        prop_assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn parsers_never_panic(s in "\\PC{0,200}") {
        let _ = from_csv(&s);
        let _ = from_json(&s);
        let _ = parse_config(&s);
        let _ = parse_grid(&s);
    }
}

#[test]
fn non_finite_values_are_refused() {
    let mut t = Table::new(&["x"]);
    t.rows.push(vec![f64::NAN]);
    assert!(to_csv(&t).is_err());
    assert!(to_json(&t).is_err());
    assert!(from_csv("# config:\nx\nNaN\n").is_err());
    assert!(from_csv("# config:\n# summary: m=inf\nx\n").is_err());
    assert!(from_csv("# config:\nx\n1.5\n").is_ok());
}
