mod common;

use common::{loewner_oracle, op, psd_oracle, random_mixed, rng};
use proptest::prelude::*;
use semidensity::opalg::is_psd_matrix;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn elimination_matches_char_poly_oracle(seed in any::<u64>(), n in 1usize..=4) {
        let m = random_mixed(&mut rng(seed), n, 8);
        let expected = psd_oracle(&m);
        prop_assert_eq!(op(&m).is_psd(), expected);
        prop_assert_eq!(is_psd_matrix(&m).unwrap(), expected);
    }

    #[test]
    fn loewner_matches_oracle(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let (a, b) = (op(&random_mixed(&mut r, n, 8)), op(&random_mixed(&mut r, n, 8)));
        prop_assert_eq!(a.loewner_leq(&b), loewner_oracle(&a, &b));
    }

    #[test]
    fn loewner_order_axioms(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let a = op(&random_mixed(&mut r, n, 6));
        let p = op(&common::random_gram(&mut r, n, 2, 6));
        let q = op(&common::random_gram(&mut r, n, 1, 6));
        prop_assert!(a.loewner_leq(&a));
        let b = &a + &p;
        let c = &b + &q;
        prop_assert!(a.loewner_leq(&b));
        prop_assert!(b.loewner_leq(&c));
        prop_assert!(a.loewner_leq(&c));
        if b.loewner_leq(&a) {
            prop_assert_eq!(&a, &b);
        }
    }

    #[test]
    fn psd_is_closed_under_positive_scaling_and_sums(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let a = op(&common::random_gram(&mut r, n, n, 6));
        let b = op(&common::random_gram(&mut r, n, 1, 6));
        let c = common::random_rational(&mut r, 8);
        prop_assert!((&a + &b).is_psd());
        prop_assert_eq!(a.scale(&c).is_psd(), c >= num_rational::BigRational::from_integer(0.into()) || a.is_zero());
    }
}
