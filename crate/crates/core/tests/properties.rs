use proptest::prelude::*;

use sheafconv::cli::{oracle_compare, perturb_vertex_function, random_vertex_function};
use sheafconv::distance::bottleneck_distance;
use sheafconv::exactalg::Field;
use sheafconv::interval::{convolve_barcodes, Barcode, Ext, GradedBarcode, Interval, Mode, Rational};
use sheafconv::random;
use sheafconv::stability::{h0_union_find, stability_check, sublevel_persistence};

fn bars(max: usize) -> impl Strategy<Value = Barcode> {
    prop::collection::vec((0i64..8, 1i64..5), 0..=max)
        .prop_map(|v| Barcode::from_intervals(v.into_iter().map(|(a, l)| Interval::co_int(a, a + l))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multi_bar_oracle(a in bars(3), b in bars(2), p in prop::sample::select(vec![2u32, 3, 5])) {
        let field = Field::new(p).unwrap();
        for mode in [Mode::Sheaf, Mode::Cosheaf] {
            let c = oracle_compare(field, &a, &b, mode, None, None).unwrap();
            prop_assert!(c.pass, "{:?}: {} vs {}", mode, c.expected.to_json(), c.got.to_json());
        }
    }

    #[test]
    fn convolution_is_bilinear(a in bars(3), b in bars(3), c in bars(2)) {
        for mode in [Mode::Sheaf, Mode::Cosheaf] {
            let whole = convolve_barcodes(&a.union(&b), &c, mode, true).unwrap();
            let (x, y) = (convolve_barcodes(&a, &c, mode, true).unwrap(), convolve_barcodes(&b, &c, mode, true).unwrap());
            let mut sum = GradedBarcode::new();
            for (d, bc) in x.degrees().chain(y.degrees()) {
                sum.add(d, bc);
            }
            prop_assert_eq!(whole, sum);
        }
    }

    #[test]
    fn barcode_json_round_trip(a in bars(5), shift in -3i64..3) {
        let a = sheafconv::interval::translate(&a, Rational::new(shift, 2));
        prop_assert_eq!(Barcode::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn sublevel_stability(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let k = random::simplicial_complex(&mut rng, 7, 16);
        let f = random_vertex_function(&mut rng, &k);
        let g = perturb_vertex_function(&mut rng, &f);
        prop_assert_eq!(h0_union_find(&k, &f).unwrap(), sublevel_persistence(&k, &f, 0).unwrap());
        for d in [0, 1, 2] {
            let rep = stability_check(&k, &f, &g, d).unwrap();
            prop_assert!(rep.holds);
            prop_assert!(rep.distance <= Ext::Fin(rep.sup_norm));
        }
        prop_assert_eq!(bottleneck_distance(&sublevel_persistence(&k, &f, 1).unwrap(), &sublevel_persistence(&k, &f, 1).unwrap()).value, Ext::int(0));
    }
}
