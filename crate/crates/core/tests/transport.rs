use isocube::candidates::{best_candidate, AxisDirection, CandidateSpec};
use isocube::fuzz;
use isocube::transport::{
    decomposition_check, pushforward_ks_test, restriction_area_monte_carlo, restriction_jacobian,
    transported_candidate_surface, DecompositionMethod,
};
use isocube::Error;

#[test]
fn curved_candidates_decompose() {
    let cases = [
        CandidateSpec::vertex_ball(2, 0.2),
        CandidateSpec::vertex_ball(3, 0.1),
        CandidateSpec::edge_cylinder(0.2),
        CandidateSpec::product_lift(CandidateSpec::vertex_ball(2, 0.15), 4),
        CandidateSpec::vertex_ball(2, 0.2).complemented(),
    ];
    for c in cases {
        let rep = decomposition_check(&c, DecompositionMethod::Quadrature { resolution: 400 }).unwrap();
        assert!(rep.margin.abs() < 1e-3 * rep.lhs, "{c:?}: {}", rep.to_json());
        assert!(rep.config["penalty"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn closed_form_is_slab_only() {
    let ball = CandidateSpec::vertex_ball(2, 0.2);
    assert!(matches!(decomposition_check(&ball, DecompositionMethod::ClosedForm), Err(Error::Unsupported(_))));
    let lifted =
        CandidateSpec::product_lift(CandidateSpec::axis_slab(2, 0.3, AxisDirection { axis: 1, positive: false }), 5);
    let rep = decomposition_check(&lifted, DecompositionMethod::ClosedForm).unwrap();
    assert!(rep.margin.abs() < 1e-12);
}

#[test]
fn best_candidates_have_positive_penalty_below_half() {
    for d in 1..=3 {
        for lambda in [0.05, 0.15, 0.3] {
            let (_, c) = best_candidate(d, lambda).unwrap();
            let surface = transported_candidate_surface(&c, 200).unwrap();
            assert!(surface.area() > 0.0);
            let rep = decomposition_check(&c, DecompositionMethod::Quadrature { resolution: 200 }).unwrap();
            assert!(rep.config["penalty"].as_f64().unwrap() > 1e-3, "d={d} lambda={lambda}");
        }
    }
    // Four-dimensional balls have no sampled surface.
    let (_, ball) = best_candidate(4, 0.05).unwrap();
    assert!(matches!(transported_candidate_surface(&ball, 10), Err(Error::Unsupported(_))));
}

#[test]
fn area_oracle_agrees_with_formula() {
    for d in [2, 3, 4] {
        for (k, a) in fuzz::invertible_matrices(d, 4, 40 + d as u64).iter().enumerate() {
            let nu = fuzz::random_unit(k as u64, d);
            let exact = restriction_jacobian(a, &nu).unwrap();
            let mc = restriction_area_monte_carlo(a, &nu, 200_000, 3).unwrap();
            assert!((mc / exact - 1.0).abs() < 0.02, "d={d}: {mc} vs {exact}");
        }
    }
}

#[test]
fn pushforward_is_uniform_across_seeds() {
    for seed in 0..5 {
        let n = 20_000;
        let stats = pushforward_ks_test(2, n, seed).unwrap();
        assert!(stats.iter().all(|&s| s < 1.95 / (n as f64).sqrt()), "{stats:?}");
    }
    assert!(pushforward_ks_test(2, 999, 0).is_err());
}
