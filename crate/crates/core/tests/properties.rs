use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

use ncflow::car_fock::{normal_order, CARMonomial, CARPolynomial, FockSpace};
use ncflow::flows::{average_series, rotation_flow};
use ncflow::free_words::{cumulants_to_moments, moments_to_cumulants, ReducedWord};
use ncflow::linalg::seeded_rng;
use ncflow::moebius::{frac_times_int, MoebiusTable};

fn word() -> impl Strategy<Value = ReducedWord> {
    prop::collection::vec((-3i64..=3, prop::bool::ANY), 0..12).prop_map(|ls| {
        let letters: Vec<(i64, i8)> = ls.into_iter().map(|(i, s)| (i, if s { 1 } else { -1 })).collect();
        ReducedWord::from_letters(&letters).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_form_a_group(a in word(), b in word(), c in word()) {
        prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
        prop_assert!(a.multiply(&a.inverse()).is_identity());
        prop_assert!(a.multiply(&b).len() <= a.len() + b.len());
        prop_assert_eq!(a.multiply(&b).shift(4), a.shift(4).multiply(&b.shift(4)));
        prop_assert_eq!(a.shift(3).shift(-3), a);
    }

    #[test]
    fn frac_times_int_matches_exact_rational(a in -10.0f64..10.0, m in 1u64..1u64 << 40) {
        let exact = BigRational::from_float(a).unwrap() * BigRational::from_integer(BigInt::from(m));
        let frac = &exact - exact.floor();
        let got = frac_times_int(a, m, m as f64);
        prop_assert!((0.0..1.0).contains(&got));
        let want = frac.to_f64().unwrap();
        // the two agree modulo 1
        let d = (got - want).abs();
        prop_assert!(d.min(1.0 - d) < 1e-15, "a = {a}, m = {m}: {got} vs {want}");
    }

    #[test]
    fn parallel_sums_are_bitwise_serial(theta in 0.0f64..1.0, workers in 2usize..6) {
        let table = MoebiusTable::build(20_000).unwrap();
        let cps = [17, 1024, 1025, 5000, 20_000];
        let flow = rotation_flow(theta);
        let serial = average_series(&flow, &table, &cps, 1).unwrap();
        let par = average_series(&flow, &table, &cps, workers).unwrap();
        prop_assert_eq!(serial, par);
    }

    #[test]
    fn normal_order_preserves_fock_matrix(seed in any::<u64>(), d in 1usize..4, degree in 1usize..6) {
        let mut rng = seeded_rng(seed);
        let space = FockSpace::new(d).unwrap();
        let p = CARPolynomial::from_monomial(CARMonomial::random(d, degree, &mut rng));
        let q = normal_order(&p);
        prop_assert!(q.is_normal_ordered());
        prop_assert!(p.matrix(&space).unwrap().max_abs_diff(&q.matrix(&space).unwrap()) < 1e-12);
    }

    #[test]
    fn cumulant_round_trip_is_exact(nums in prop::collection::vec(-20i64..20, 1..8)) {
        let moments: Vec<BigRational> = nums.iter().map(|&n| BigRational::new(n.into(), 7.into())).collect();
        let kappa = moments_to_cumulants(&moments).unwrap();
        let ks: Vec<BigRational> = (1..=moments.len()).map(|k| kappa.kappa(k).clone()).collect();
        let back = cumulants_to_moments(&ks).unwrap();
        for (k, m) in moments.iter().enumerate() {
            prop_assert_eq!(back.moment(k + 1), m);
        }
        prop_assert!(ks[0].clone() - &moments[0] == BigRational::zero());
    }

    #[test]
    fn sieve_cache_round_trips(n in 1u64..5000) {
        let table = MoebiusTable::build(n).unwrap();
        let mut buf = Vec::new();
        table.write_cache(&mut buf).unwrap();
        let back = MoebiusTable::read_cache(buf.as_slice()).unwrap();
        prop_assert_eq!(back.mu_slice(), table.mu_slice());
        prop_assert_eq!(back.primes(), table.primes());
    }
}
