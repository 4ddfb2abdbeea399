//! Property tests over the analytic laws and special functions.

use htlab::laws::{
    bessel3_cdf, bessel3_density, bessel_laplace, gbm_hitting_laplace, gbm_laplace, honest_time_cdf, law_via_hitting,
    BesselParams, GbmParams, LawModel,
};
use htlab::maxima::{conditional_max_expectation, conditional_max_expectation_sum_form, MaxPayoffSpec};
use htlab::numerics::{bessel_k, RngStream};
use proptest::prelude::*;
use rand::RngCore;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gbm_transform_is_a_decreasing_convex_map_into_the_unit_interval(sigma in 0.05..1.0f64, l in 0.01..5.0f64) {
        let p = GbmParams::new(sigma).unwrap();
        let h = 0.05 * l;
        let (a, b, c) = (gbm_laplace(&p, l - h).unwrap(), gbm_laplace(&p, l).unwrap(), gbm_laplace(&p, l + h).unwrap());
        prop_assert!(0.0 < c && c < b && b < a && a <= 1.0);
        prop_assert!(a + c - 2.0 * b > 0.0);
    }

    #[test]
    fn gbm_hitting_chain_reproduces_the_closed_form(sigma in 0.1..0.6f64, l in 0.01..2.0f64) {
        let p = GbmParams::new(sigma).unwrap();
        let chain = law_via_hitting(|a, x| gbm_hitting_laplace(&p, a, x), l).unwrap();
        prop_assert!((chain - gbm_laplace(&p, l).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn bessel_transform_is_decreasing_and_convex(delta in 2.6..6.0f64, x in 0.2..3.0f64, l in 0.05..4.0f64) {
        let p = BesselParams::new(delta, x).unwrap();
        let h = 0.1 * l;
        let (a, b, c) = (bessel_laplace(&p, l - h).unwrap(), bessel_laplace(&p, l).unwrap(), bessel_laplace(&p, l + h).unwrap());
        prop_assert!(0.0 < c && c < b && b < a && a <= 1.0);
        prop_assert!(a + c - 2.0 * b > -1e-12);
    }

    #[test]
    fn bessel3_cdf_is_the_integral_of_the_density(x in 0.3..3.0f64, t in 0.05..5.0f64) {
        let h = 1e-4 * t;
        let fd = (bessel3_cdf(x, t + h).unwrap() - bessel3_cdf(x, t - h).unwrap()) / (2.0 * h);
        let p = bessel3_density(x, t).unwrap();
        prop_assert!(p >= 0.0);
        prop_assert!((fd - p).abs() < 1e-6 * (1.0 + p));
    }

    #[test]
    fn inverted_gbm_cdf_is_monotone(sigma in 0.1..0.5f64, t in 0.1..20.0f64) {
        let m = LawModel::Gbm(GbmParams::new(sigma).unwrap());
        let (a, b) = (honest_time_cdf(&m, t).unwrap(), honest_time_cdf(&m, 1.5 * t).unwrap());
        prop_assert!(0.0 <= a && a < b && b <= 1.0);
    }

    #[test]
    fn conditional_max_forms_agree(k in 1.2..5.0f64, sigma in 1.0..4.0f64, z in 0.01..1.0f64) {
        let n = z * sigma;
        for spec in [MaxPayoffSpec::put(k).unwrap(), MaxPayoffSpec::indicator(k).unwrap(), MaxPayoffSpec::log()] {
            let a = conditional_max_expectation(&spec, n, sigma).unwrap();
            let b = conditional_max_expectation_sum_form(&spec, n, sigma).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} {a} {b}", spec.label);
        }
    }

    #[test]
    fn half_order_bessel_k_is_elementary(z in 1e-4..50.0f64) {
        let k = bessel_k(0.5, z).unwrap();
        prop_assert!((k * (2.0 * z / std::f64::consts::PI).sqrt() * z.exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bessel_k_decreases_in_z(nu in 0.0..3.0f64, z in 0.01..30.0f64) {
        prop_assert!(bessel_k(nu, 1.01 * z).unwrap() < bessel_k(nu, z).unwrap());
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>(), id in any::<u64>()) {
        let (mut a, mut b) = (RngStream::new(seed, id).rng(), RngStream::new(seed, id).rng());
        for _ in 0..16 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(seed, id.wrapping_add(1)).rng();
        prop_assert_ne!(RngStream::new(seed, id).rng().next_u64(), c.next_u64());
    }
}
