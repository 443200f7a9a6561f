use isocube::bounds::{cs_pointwise, jensen_gap, soft_threshold};
use isocube::candidates::{
    best_candidate, envelope_value, exact_profile_2d, lower_bound_profile, AxisDirection, CandidateSpec,
};
use isocube::discrete::VoxelSet;
use isocube::gaussian::{gaussian_profile, std_normal_cdf, std_normal_quantile};
use isocube::optimizer::project_volume;
use isocube::transport::{boundary_weight, restriction_jacobian, to_cube, to_gauss};
use proptest::prelude::*;

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect())
}

proptest! {
    #[test]
    fn quantile_inverts_cdf(p in 1e-300f64..1.0) {
        let x = std_normal_quantile(p).unwrap();
        let back = std_normal_cdf(x);
        prop_assert!((back - p).abs() <= 1e-13 * p.max(1e-300) + 1e-15, "p={p} back={back}");
    }

    #[test]
    fn profile_is_symmetric_and_bounded(lambda in 0.0f64..=1.0) {
        let v = gaussian_profile(lambda).unwrap();
        prop_assert!((0.0..=isocube::INV_SQRT_2PI + 1e-16).contains(&v));
        if lambda > 0.5 {
            prop_assert_eq!(v, gaussian_profile(1.0 - lambda).unwrap());
        }
    }

    // Above x ≈ 5 the image crowds against 1 and f64 cannot resolve it; the
    // lower tail stays accurate far out.
    #[test]
    fn cube_map_round_trip(x in prop::collection::vec(-30.0f64..5.0, 1..6)) {
        let y = to_cube(&x);
        prop_assert!(y.iter().all(|v| *v > 0.0 && *v < 1.0));
        let back = to_gauss(&y).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn boundary_weight_at_least_sqrt_2pi(
        x in prop::collection::vec(-6.0f64..6.0, 3),
        nu in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        if let Some(nu) = unit(nu) {
            prop_assert!(boundary_weight(&x, &nu).unwrap() >= isocube::SQRT_2PI * (1.0 - 1e-15));
        }
    }

    #[test]
    fn jacobian_scales_homogeneously(
        a in prop::collection::vec(-2.0f64..2.0, 9),
        nu in prop::collection::vec(-1.0f64..1.0, 3),
        t in 0.1f64..10.0,
    ) {
        let Some(nu) = unit(nu) else { return Ok(()) };
        let Ok(j) = restriction_jacobian(&a, &nu) else { return Ok(()) };
        let scaled: Vec<f64> = a.iter().map(|v| v * t).collect();
        let js = restriction_jacobian(&scaled, &nu).unwrap();
        // A (d−1)-dimensional area scales like t^{d−1}.
        prop_assert!((js / (j * t * t) - 1.0).abs() < 1e-9, "{js} vs {}", j * t * t);
    }

    #[test]
    fn envelope_sandwich(d in 1usize..=8, lambda in 0.0f64..=1.0) {
        let env = envelope_value(d, lambda).unwrap();
        prop_assert!(env >= lower_bound_profile(lambda).unwrap() - 1e-12);
        prop_assert!(env <= 1.0);
        if d == 2 {
            prop_assert!((env - exact_profile_2d(lambda).unwrap()).abs() < 1e-15);
        }
        if d < 8 {
            prop_assert!(envelope_value(d + 1, lambda).unwrap() <= env + 1e-12);
        }
    }

    #[test]
    fn best_candidate_has_requested_volume(d in 1usize..=4, lambda in 0.01f64..0.99) {
        let (value, c) = best_candidate(d, lambda).unwrap();
        c.validate().unwrap();
        prop_assert!((c.perimeter().unwrap().unwrap() - value).abs() < 1e-12);
        // Nodal volume of the level set on a coarse grid tracks λ.
        let n = if d <= 2 { 200 } else if d == 3 { 40 } else { 16 };
        let inside = VoxelSet::from_fn(d, n, |y| c.contains(y)).unwrap();
        let tol = 3.0 * d as f64 / n as f64;
        prop_assert!((inside.discrete_volume() - lambda).abs() < tol, "{} vs {lambda}", inside.discrete_volume());
    }

    #[test]
    fn slab_perimeter_is_one_inside(d in 1usize..=5, lambda in 0.0f64..=1.0, axis_seed in 0usize..5, positive: bool) {
        let dir = AxisDirection { axis: axis_seed % d, positive };
        let slab = CandidateSpec::axis_slab(d, lambda, dir);
        prop_assert_eq!(slab.perimeter().unwrap(), Some(if lambda == 0.0 || lambda == 1.0 { 0.0 } else { 1.0 }));
    }

    #[test]
    fn flips_track_face_count(cells in prop::collection::vec(any::<bool>(), 27), flips in prop::collection::vec(0usize..27, 0..40)) {
        let mut v = VoxelSet::from_cells(3, 3, cells).unwrap();
        for i in flips {
            let before = v.face_count() as i64;
            let delta = v.flip(i).unwrap();
            prop_assert_eq!(v.face_count() as i64, before + delta);
            prop_assert_eq!(v.face_count(), v.recompute_face_count());
        }
        prop_assert_eq!(v.complement().face_count(), v.face_count());
    }

    #[test]
    fn jensen_gap_nonnegative(
        nu in prop::collection::vec(-1.0f64..1.0, 1..6),
        scale in prop::sample::select(vec![0.1, 1.0, 5.0, 40.0]),
        seed in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let Some(nu) = unit(nu) else { return Ok(()) };
        let x: Vec<f64> = seed.iter().take(nu.len()).map(|s| s * scale).collect();
        prop_assert!(jensen_gap(&nu, &x).unwrap() >= 0.0);
    }

    #[test]
    fn cauchy_schwarz_holds(u in prop::collection::vec(-100.0f64..100.0, 1..10), shift in -5.0f64..5.0) {
        let v: Vec<f64> = u.iter().map(|x| x * 0.5 + shift).collect();
        let rep = cs_pointwise(&u, &v).unwrap();
        prop_assert!(rep.margin >= -1e-12 * rep.rhs.max(1.0));
    }

    #[test]
    fn soft_threshold_is_a_contraction(s in -10.0f64..10.0, t in -10.0f64..10.0, kappa in 0.0f64..3.0) {
        let (a, b) = (soft_threshold(s, kappa).unwrap(), soft_threshold(t, kappa).unwrap());
        prop_assert!((a - b).abs() <= (s - t).abs() + 1e-15);
        prop_assert!(a.abs() <= s.abs());
    }

    #[test]
    fn projection_is_exact(values in prop::collection::vec(-0.5f64..1.5, 2..200), lambda in 0.01f64..0.99) {
        let mut v = values;
        project_volume(&mut v, lambda).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        prop_assert!((mean - lambda).abs() < 1e-12);
        prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
