use ising_topo::berry::{chern_number, BerryField, ChernMethod, ExtensionKind, SignConvention};
use ising_topo::majorana::{
    analyze, build_majorana, charge_weights, eigensolve, majorana_charge, zero_mode_summary, DEFAULT_ZERO_THRESHOLD,
};
use ising_topo::model::{critical_fields, dispersion, loop_point, sample_loop, CouplingSet};
use ising_topo::sweep::toy_couplings;
use ising_topo::winding::winding_of_coupling;
use proptest::prelude::*;
use std::f64::consts::PI;

fn coupling(max_range: usize) -> impl Strategy<Value = CouplingSet> {
    (1..=max_range)
        .prop_flat_map(|r| {
            (
                prop::collection::vec(-1.0..1.0f64, r),
                prop::collection::vec(-1.0..1.0f64, r),
                -1.0..1.0f64,
            )
        })
        .prop_map(|(jx, jy, g)| CouplingSet::new(jx, jy, g).unwrap())
}

fn gapped(max_range: usize, min_gap: f64) -> impl Strategy<Value = CouplingSet> {
    coupling(max_range).prop_filter("loop too close to the origin", move |c| {
        sample_loop(c, 4096).map_or(false, |l| l.r_min() > min_gap)
    })
}

fn ulps_close(a: f64, b: f64, ulps: f64) -> bool {
    (a - b).abs() <= ulps * f64::EPSILON * a.abs().max(b.abs()) / 2.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dispersion_is_even(c in coupling(5), k in -PI..PI) {
        let (a, b) = (dispersion(&c, k).epsilon, dispersion(&c, -k).epsilon);
        prop_assert!(ulps_close(a, b, 4.0), "{a} vs {b}");
    }

    #[test]
    fn energy_is_twice_loop_radius(c in coupling(5), k in -PI..PI) {
        let s = dispersion(&c, k);
        let (x, y) = loop_point(&c, k);
        prop_assert!(s.epsilon >= 0.0);
        prop_assert!(ulps_close(s.epsilon, 2.0 * x.hypot(y), 4.0));
        if s.epsilon > 1e-9 {
            prop_assert!((s.theta.cos().powi(2) + s.theta.sin().powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_closes_at_critical_fields(c in coupling(5)) {
        let (g_plus, g_minus) = critical_fields(&c);
        prop_assert_eq!(dispersion(&c.with_g(g_plus).unwrap(), 0.0).epsilon, 0.0);
        prop_assert_eq!(dispersion(&c.with_g(g_minus).unwrap(), PI).epsilon, 0.0);
    }

    #[test]
    fn winding_stable_under_refinement(c in gapped(5, 1e-3), p in 6..11u32) {
        let m = 1usize << p;
        let coarse = winding_of_coupling(&c, m);
        let fine = winding_of_coupling(&c, 2 * m);
        if let (Ok(a), Ok(b)) = (&coarse, &fine) {
            prop_assert_eq!(a.n, b.n);
        }
        if sample_loop(&c, 4096).unwrap().r_min() > 0.02 {
            prop_assert!(winding_of_coupling(&c, 4096).is_ok());
        }
    }

    #[test]
    fn swapping_channels_negates_winding(c in gapped(5, 1e-3)) {
        let n = winding_of_coupling(&c, 4096).unwrap().n;
        let m = winding_of_coupling(&c.swapped(), 4096).unwrap().n;
        prop_assert_eq!(m, -n);
    }

    #[test]
    fn single_range_sign_rule(jx in -1.0..1.0f64, jy in -1.0..1.0f64, frac in -0.95..0.95f64) {
        let g = frac * (jx + jy).abs();
        prop_assume!((jx * jx - jy * jy).abs() > 1e-3);
        let c = CouplingSet::new(vec![jx], vec![jy], g).unwrap();
        prop_assume!(sample_loop(&c, 4096).unwrap().r_min() > 1e-6);
        let n = winding_of_coupling(&c, 4096).unwrap().n;
        prop_assert_eq!(n, (jx * jx - jy * jy).signum() as i64);
    }

    #[test]
    fn pure_x_loops_wind_by_their_range(n0 in 1..=8usize, j in 0.05..2.0f64) {
        let mut jx = vec![0.0; n0];
        jx[n0 - 1] = j;
        let c = CouplingSet::pure_x(jx, 0.0).unwrap();
        prop_assert_eq!(winding_of_coupling(&c, 4096).unwrap().n, n0 as i64);
    }

    #[test]
    fn coupling_json_round_trip(c in coupling(5)) {
        let text = serde_json::to_string(&c).unwrap();
        let back: CouplingSet = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chern_equals_winding(c in gapped(5, 0.05)) {
        let n = winding_of_coupling(&c, 4096).unwrap().n;
        for conv in [SignConvention::ThetaFlipped, SignConvention::AsWritten] {
            let field = BerryField::new(c.clone(), ExtensionKind::UnitSphereAngle, conv);
            for method in [ChernMethod::AnalyticBoundary, ChernMethod::Quadrature2D] {
                let r = chern_number(&field, method, (4096, 128)).unwrap();
                prop_assert_eq!(r.c.abs(), n.abs());
                if conv == SignConvention::ThetaFlipped {
                    prop_assert_eq!(r.c, n);
                }
            }
        }
    }

    #[test]
    fn majorana_structure(c in coupling(5), extra in 1..30usize) {
        let n_sites = c.range() + extra;
        let h = build_majorana(&c, n_sites).unwrap();
        prop_assert!(h.is_chiral());
        prop_assert_eq!(h.trace(), 0.0);
        let s = eigensolve(&h).unwrap();
        let v = s.values();
        let d = v.len();
        for i in 0..d {
            prop_assert!((v[i] + v[d - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn charge_is_complete_over_all_states(c in coupling(5), half in 3..15usize) {
        let n_sites = 2 * half;
        prop_assume!(n_sites > c.range());
        let s = eigensolve(&build_majorana(&c, n_sites).unwrap()).unwrap();
        let w = charge_weights(n_sites, None).unwrap();
        let total: f64 = s.pairs().map(|(_, v)| w.iter().zip(v).map(|(a, b)| a * b * b).sum::<f64>()).sum();
        prop_assert!(total.abs() < 1e-9);
    }

    #[test]
    fn zero_mode_set_invariants(c in gapped(4, 0.05), n_sites in 30..80usize) {
        let (_, zms) = analyze(&c, n_sites, DEFAULT_ZERO_THRESHOLD, None).unwrap();
        let q = zms.charge.unwrap();
        prop_assert!(q.abs() <= zms.n_zero as f64 + 1e-9);
        for (i, m) in zms.modes.iter().enumerate() {
            prop_assert!(m.eigenvalue.abs() < DEFAULT_ZERO_THRESHOLD);
            for (j, o) in zms.modes.iter().enumerate().take(i + 1) {
                let dot: f64 = m.vector.iter().zip(&o.vector).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn swapping_channels_negates_charge(c in gapped(4, 0.05), n_sites in 30..80usize) {
        let (n, q) = zero_mode_summary(&c, n_sites, DEFAULT_ZERO_THRESHOLD).unwrap();
        let (m, p) = zero_mode_summary(&c.swapped(), n_sites, DEFAULT_ZERO_THRESHOLD).unwrap();
        prop_assert_eq!(n, m);
        prop_assert!((q + p).abs() < 1e-9, "{q} vs {p}");
    }

    #[test]
    fn exchanging_projectors_negates_charge(c in gapped(4, 0.05), n_sites in 30..80usize) {
        let (_, zms) = analyze(&c, n_sites, DEFAULT_ZERO_THRESHOLD, None).unwrap();
        let q = majorana_charge(&zms, n_sites, None).unwrap();
        let w = charge_weights(n_sites, None).unwrap();
        let swapped: f64 = zms
            .modes
            .iter()
            .map(|m| w.iter().zip(&m.vector).map(|(a, b)| -a * b * b).sum::<f64>())
            .sum();
        prop_assert!((q + swapped).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selected_solver_agrees_with_full_on_toy_models(x in -0.5..2.5f64, y in -0.5..2.5f64) {
        let c = toy_couplings(x, y, 5).unwrap();
        let (_, zms) = analyze(&c, 120, DEFAULT_ZERO_THRESHOLD, None).unwrap();
        let (n, q) = zero_mode_summary(&c, 120, DEFAULT_ZERO_THRESHOLD).unwrap();
        prop_assert_eq!(n, zms.n_zero);
        prop_assert!((q - zms.charge.unwrap()).abs() < 1e-8, "{q} vs {:?}", zms.charge);
    }
}
