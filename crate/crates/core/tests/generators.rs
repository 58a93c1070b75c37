use proptest::prelude::*;
use sdorder::gamma::{min_constant_epsilon, min_constant_gamma, ConstantBound};
use sdorder::generators::{
    example_identical_means, example_local_interpolation, example_squares, example_squares_reverse, example_strict_inclusion,
    example_theta_family, example_two_touch, theta_mf_components, ThetaVariant,
};
use sdorder::piecewise::crossings;
use sdorder::utility::{ExclusionVerdict, MemberReason};
use sdorder::{
    certify_combination, check_dpm_gamma, check_fractional, check_mfsd, mfsd_exclusion, validate_gamma, Distribution, Error,
    GammaFn, PairAreas, PiecewiseFn, Poly,
};

fn plateau() -> GammaFn {
    GammaFn::step(0.5, vec![-1.0], vec![0.75]).unwrap()
}

#[test]
fn identical_means_golden() {
    let (f, g, gamma) = example_identical_means(2.0, 1.0).unwrap();
    assert_eq!(f.atoms().unwrap(), vec![(1.0, 0.5), (3.0, 0.5)]);
    assert_eq!(g.atoms().unwrap(), vec![(2.0, 1.0)]);
    for t in [0.0, 1.0, 2.0, 2.25, 2.5, 3.0, 4.0] {
        assert_eq!(gamma.eval(t), (t - 2.0).clamp(0.0, 1.0));
    }
    assert!(check_mfsd(&f, &g, &gamma).holds);
    assert!(!check_fractional(&f, &g, 0.999).unwrap().holds);
    assert!(matches!(example_identical_means(1.0, 2.0), Err(Error::ParameterViolation(_))));
}

#[test]
fn local_interpolation_golden() {
    let gamma = example_local_interpolation(0.0, 1.0, 0.5).unwrap();
    assert_eq!((gamma.eval(-0.1), gamma.eval(0.0), gamma.eval(0.99), gamma.eval(1.0)), (0.0, 0.5, 0.5, 1.0));
    assert_eq!((gamma.lower(), gamma.upper()), (0.0, 1.0));
    assert!(validate_gamma(gamma.carrier().clone()).is_ok());
    assert!(example_local_interpolation(1.0, 0.0, 0.5).is_err());
    assert!(example_local_interpolation(0.0, 1.0, 1.0).is_err());
}

#[test]
fn squares_golden() {
    let g = plateau();
    let s = example_squares(0.5, &g, 0.0).unwrap();
    assert_eq!((s.m, s.n), (3, 5));
    assert!((s.cell - 0.05).abs() < 1e-15);
    let a = PairAreas::new(&s.f, &s.g);
    assert!((a.neg.total / a.pos.total - 3.0 / 5.0).abs() < 1e-12);
    assert!(check_mfsd(&s.f, &s.g, &g).holds);
    assert!(!check_fractional(&s.f, &s.g, 0.5).unwrap().holds);
}

#[test]
fn squares_without_flat_neighbourhood() {
    // Gamma rises linearly through t0, so the construction starts at t0.
    let g = validate_gamma(
        PiecewiseFn::new(0.5, vec![0.0, 1.0], vec![Poly::linear(0.5, 0.4), Poly::constant(0.9)]).unwrap(),
    )
    .unwrap();
    let s = example_squares(0.5, &g, 0.5).unwrap();
    assert_eq!(s.t_star, 0.5);
    assert!(check_mfsd(&s.f, &s.g, &g).holds);
    assert!(!check_fractional(&s.f, &s.g, 0.5).unwrap().holds);
}

#[test]
fn reverse_squares_golden() {
    let g = GammaFn::step(0.3, vec![1.0], vec![0.9]).unwrap();
    let s = example_squares_reverse(0.5, &g, 0.0).unwrap();
    assert!(check_fractional(&s.f, &s.g, 0.5).unwrap().holds);
    let v = check_mfsd(&s.f, &s.g, &g);
    assert!(!v.holds);
    assert!(g.eval(v.witness_t.unwrap()) < 0.5);
}

#[test]
fn strict_inclusion_golden() {
    let half = GammaFn::constant(0.5).unwrap();
    let (f, g) = example_strict_inclusion(0.0, &half, 0.25).unwrap();
    assert_eq!(f.atoms().unwrap(), vec![(-0.5, 0.5), (0.5, 0.5)]);
    assert_eq!(g.atoms().unwrap(), vec![(0.0, 0.75), (0.5, 0.25)]);
    let a = PairAreas::new(&f, &g);
    assert_eq!((a.pos.total, a.neg.total), (0.25, 0.125));
    assert!((min_constant_gamma(&f, &g).raw() - 0.5).abs() < 1e-12);
    assert!((min_constant_epsilon(&f, &g).raw() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(crossings(&f, &g), vec![0.0]);
    let v = check_mfsd(&f, &g, &half);
    assert!(v.holds && v.margin.abs() < 1e-12);
    assert!(!check_fractional(&f, &g, 0.49).unwrap().holds);
    assert!(matches!(example_strict_inclusion(0.0, &half, 0.5), Err(Error::ParameterViolation(_))));
}

#[test]
fn theta_family_golden() {
    let (u, gamma) = example_theta_family(3.0, ThetaVariant::Mf, 8).unwrap();
    let e = (-2.0f64).exp();
    let gt = 1.0 - e;
    assert_eq!(u.knots(), &[gt, 3.0]);
    for (got, want) in u.slopes().iter().zip([2.0 * (1.0 - e), 2.0 - e, 1.0 - e]) {
        assert!((got - want).abs() < 1e-15);
    }
    assert!((gamma.eval(3.0) - gt).abs() < 1e-15);

    let (u, gamma) = example_theta_family(1.01, ThetaVariant::Mf, 4).unwrap();
    let (v, w) = theta_mf_components(1.01).unwrap();
    let sum = sdorder::combine(&[(1.0, v.clone()), (1.0, w.clone())]).unwrap();
    assert_eq!(sum.slopes(), u.slopes());
    let reasons = certify_combination(&[(1.0, v), (1.0, w)], &gamma).unwrap();
    assert_eq!(reasons[0], MemberReason::Concave);
    assert_eq!(reasons[1], MemberReason::BaseClass { t: 1.01 });

    let (u, gamma) = example_theta_family(0.25, ThetaVariant::Ff, 8).unwrap();
    assert!(check_dpm_gamma(&u, &gamma).member);
    assert!(matches!(mfsd_exclusion(&u, &gamma), ExclusionVerdict::ExcludedByStrictIncrease { x0, .. } if x0 < 0.25));
    assert!(example_theta_family(0.5, ThetaVariant::Mf, 4).is_err());
    assert!(example_theta_family(1.5, ThetaVariant::Ff, 4).is_err());
    assert!(example_theta_family(0.5, ThetaVariant::Ff, 1).is_err());
}

#[test]
fn two_touch_golden() {
    let (u, gamma) = example_two_touch();
    assert_eq!(mfsd_exclusion(&u, &gamma), ExclusionVerdict::ExcludedByTwoTouches { x0: -3.0, x1: 0.5 });
    let concave = sdorder::UtilityPWL::new((0.0, 0.0), vec![0.0], vec![1.0, 0.5]).unwrap();
    assert_eq!(mfsd_exclusion(&concave, &gamma), ExclusionVerdict::MemberByConstruction(MemberReason::Concave));
}

#[test]
fn generators_are_deterministic() {
    let a = example_squares(0.5, &plateau(), 0.0).unwrap();
    let b = example_squares(0.5, &plateau(), 0.0).unwrap();
    assert_eq!(a, b);
    assert_eq!(example_theta_family(0.25, ThetaVariant::Ff, 8).unwrap(), example_theta_family(0.25, ThetaVariant::Ff, 8).unwrap());
}

fn assert_cdf(f: &Distribution) {
    assert!(Distribution::new(f.carrier().clone()).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_validate(mu in 0.5f64..5.0, frac in 0.05f64..0.95, target in 0.0f64..0.7, lift in 0.05f64..0.3) {
        let (f, g, gamma) = example_identical_means(mu, mu * frac).unwrap();
        assert_cdf(&f);
        assert_cdf(&g);
        prop_assert!(validate_gamma(gamma.carrier().clone()).is_ok());
        prop_assert!(check_mfsd(&f, &g, &gamma).holds);

        let g0 = (target + lift).min(1.0);
        let step = GammaFn::step(target * 0.5, vec![-1.0], vec![g0]).unwrap();
        let s = example_squares(target, &step, 0.0).unwrap();
        assert_cdf(&s.f);
        assert_cdf(&s.g);
        prop_assert!(check_mfsd(&s.f, &s.g, &step).holds);
        prop_assert!(!check_fractional(&s.f, &s.g, target).unwrap().holds);

        let c = 0.2 * frac * frac;
        let gc = GammaFn::constant(target).unwrap();
        let (f, g) = example_strict_inclusion(mu, &gc, c).unwrap();
        let v = check_mfsd(&f, &g, &gc);
        prop_assert!(v.holds && v.margin.abs() < 1e-9);
        if target > 0.01 {
            prop_assert!(!check_fractional(&f, &g, target - 0.01).unwrap().holds);
        }
        match min_constant_gamma(&f, &g) {
            ConstantBound::Value(v) => prop_assert!((v - target).abs() < 1e-12),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }
}
