use isocube::bounds::{
    gaussian_isoperimetry_margin, slicing_bound, strip_bound_check, strip_constant, strip_mass, IsoperimetricInput,
    MonotoneFn, Perturbation, SlicingConfig,
};
use isocube::fuzz;
use isocube::gaussian::{std_normal_cdf, std_normal_pdf};
use isocube::transport::{analytic_halfspace_surface, HalfspaceSpec};

#[test]
fn slicing_margins_nonnegative() {
    for (i, cfg) in fuzz::slicing_configs(1000, 1).iter().enumerate() {
        let rep = slicing_bound(cfg).unwrap();
        assert!(rep.margin >= -1e-9, "config {i}: {}", rep.to_json());
    }
}

#[test]
fn slicing_is_tight_for_the_halfspace_itself() {
    for cfg in fuzz::slicing_configs(200, 2) {
        let exact = SlicingConfig { perturbation: Perturbation::none(), ..cfg };
        let rep = slicing_bound(&exact).unwrap();
        assert_eq!(rep.margin, 0.0);
        assert_eq!(rep.config["sym_diff"].as_f64(), Some(0.0));
    }
}

#[test]
fn strip_margins_nonnegative() {
    for (i, case) in fuzz::strip_cases(1000, 3).iter().enumerate() {
        let rep = strip_bound_check(case.ell, case.q, case.deficit, &case.f).unwrap();
        assert!(rep.margin >= -1e-9, "case {i}: {}", rep.to_json());
    }
}

#[test]
fn strip_constant_is_positive_and_maximal() {
    for k in 1..=40 {
        let ell = 0.1 * k as f64;
        let c = strip_constant(ell).unwrap();
        assert!(c.value > 0.0 && c.value <= c.grid_value + 1e-15);
        for j in 0..=200 {
            let q = -1.0 + 0.01 * j as f64;
            assert!(std_normal_pdf(ell) - strip_mass(ell, q).unwrap() >= c.value - 1e-12);
        }
    }
}

#[test]
fn decreasing_test_functions_are_rejected() {
    let f = MonotoneFn::custom("1/(1+s)", vec![], |s| 1.0 / (1.0 + s));
    assert!(strip_bound_check(1.0, 0.2, 0.0, &f).is_err());
    assert!(MonotoneFn::piecewise_exp(vec![(-1.0, 0.0, 1.0)]).is_err());
}

#[test]
fn halfspaces_attain_gaussian_isoperimetry() {
    for k in 1..20 {
        let lambda = k as f64 / 20.0;
        let offset = isocube::gaussian::std_normal_quantile(lambda).unwrap();
        let nu = fuzz::random_unit(k, 3);
        let h = HalfspaceSpec::new(nu, offset).unwrap();
        assert!((std_normal_cdf(h.offset) - lambda).abs() < 1e-12);
        let rep = gaussian_isoperimetry_margin(IsoperimetricInput::Halfspace(&h), lambda).unwrap();
        assert!(rep.margin.abs() < 1e-15);
        let surface = analytic_halfspace_surface(&h, 3, 8.0, 48).unwrap();
        let sampled = gaussian_isoperimetry_margin(IsoperimetricInput::Surface(&surface), lambda).unwrap();
        assert!(sampled.margin.abs() < 1e-9, "{}", sampled.margin);
    }
}
