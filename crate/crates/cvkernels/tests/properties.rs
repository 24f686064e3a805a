//! Property-based invariants for the closed-form kernels and the
//! learning layer.

use cvkernels::geometry::feature_distance;
use cvkernels::kernels::{classical_bound, evaluate, gram, witness, KernelSpec, ScanGrid};
use cvkernels::learning::{fit_krr, norm_bound};
use cvkernels::states::{DataPoint, StateFamily, StateSpec};
use proptest::prelude::*;

fn families(eta: f64) -> Vec<StateSpec> {
    [
        StateFamily::Coherent,
        StateFamily::Squeezed { r: 1.0 },
        StateFamily::SinglePhoton,
        StateFamily::Thermal { nbar: 0.7 },
    ]
    .iter()
    .map(|&f| StateSpec::single_mode(f, eta).unwrap())
    .collect()
}

fn pt(x1: f64, x2: f64) -> DataPoint {
    DataPoint::single_mode(x1, x2).unwrap()
}

proptest! {
    #[test]
    fn kernels_are_symmetric(
        x1 in -2.0..2.0f64, x2 in -2.0..2.0f64,
        y1 in -2.0..2.0f64, y2 in -2.0..2.0f64,
        eta in 0.0..=1.0f64,
    ) {
        for spec in families(eta) {
            let k = KernelSpec::analytic(spec);
            let a = evaluate(&k, &pt(x1, x2), &pt(y1, y2)).unwrap();
            let b = evaluate(&k, &pt(y1, y2), &pt(x1, x2)).unwrap();
            prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn kernels_are_normalized_on_the_diagonal(
        x1 in -2.0..2.0f64, x2 in -2.0..2.0f64,
        eta in 0.0..=1.0f64,
    ) {
        for spec in families(eta) {
            let k = KernelSpec::analytic(spec);
            let v = evaluate(&k, &pt(x1, x2), &pt(x1, x2)).unwrap();
            prop_assert!((v - 1.0).abs() < 1e-14, "{v}");
        }
    }

    #[test]
    fn kernels_are_translation_invariant(
        x1 in -1.5..1.5f64, x2 in -1.5..1.5f64,
        y1 in -1.5..1.5f64, y2 in -1.5..1.5f64,
        t1 in -1.0..1.0f64, t2 in -1.0..1.0f64,
        eta in 0.0..=1.0f64,
    ) {
        for spec in families(eta) {
            let k = KernelSpec::analytic(spec);
            let base = evaluate(&k, &pt(x1, x2), &pt(y1, y2)).unwrap();
            let moved = evaluate(
                &k,
                &pt(x1 + t1, x2 + t2),
                &pt(y1 + t1, y2 + t2),
            )
            .unwrap();
            prop_assert!((base - moved).abs() <= 1e-12 * base.abs().max(1e-30));
        }
    }

    #[test]
    fn loss_broadens_the_squeezed_kernel(
        d1 in 0.1..1.5f64,
        eta_hi in 0.55..=1.0f64,
        gap in 0.05..0.5f64,
    ) {
        let eta_lo = (eta_hi - gap).max(0.0);
        let x = pt(0.0, 0.0);
        let y = pt(d1, 0.0);
        let hi = KernelSpec::analytic(StateSpec::single_mode(StateFamily::Squeezed { r: 1.0 }, eta_hi).unwrap());
        let lo = KernelSpec::analytic(StateSpec::single_mode(StateFamily::Squeezed { r: 1.0 }, eta_lo).unwrap());
        let k_hi = evaluate(&hi, &x, &y).unwrap();
        let k_lo = evaluate(&lo, &x, &y).unwrap();
        prop_assert!(k_lo > k_hi, "more loss must widen the narrow axis: {k_lo} vs {k_hi}");
    }

    #[test]
    fn single_photon_negativity_needs_more_than_half_transmission(
        eta_low in 0.0..=0.5f64,
        eta_high in 0.56..=1.0f64,
    ) {
        let grid = ScanGrid::dist_sq_axis(4.0, 200).unwrap();
        let scan = |eta: f64| {
            let spec = KernelSpec::analytic(
                StateSpec::single_mode(StateFamily::SinglePhoton, eta).unwrap(),
            );
            grid.offsets()
                .iter()
                .map(|p| witness(&spec, p, &pt(0.0, 0.0)).unwrap())
                .fold(f64::INFINITY, f64::min)
        };
        prop_assert!(scan(eta_low) >= -1e-12);
        prop_assert!(scan(eta_high) < -1e-4);
    }

    #[test]
    fn witness_is_kernel_minus_bound(
        x1 in -2.0..2.0f64, x2 in -2.0..2.0f64,
        y1 in -2.0..2.0f64, y2 in -2.0..2.0f64,
        eta in 0.0..=1.0f64,
    ) {
        for spec in families(eta) {
            let k = KernelSpec::analytic(spec);
            let x = pt(x1, x2);
            let y = pt(y1, y2);
            let w = witness(&k, &x, &y).unwrap();
            let direct = evaluate(&k, &x, &y).unwrap() - classical_bound(&x, &y).unwrap();
            prop_assert_eq!(w, direct);
        }
    }

    #[test]
    fn feature_distances_satisfy_the_triangle_inequality(
        x1 in -2.0..2.0f64, x2 in -2.0..2.0f64,
        y1 in -2.0..2.0f64, y2 in -2.0..2.0f64,
        z1 in -2.0..2.0f64, z2 in -2.0..2.0f64,
        eta in 0.0..=1.0f64,
    ) {
        for spec in families(eta) {
            let k = KernelSpec::analytic(spec);
            let x = pt(x1, x2);
            let y = pt(y1, y2);
            let z = pt(z1, z2);
            let dxz = feature_distance(&k, &x, &z).unwrap().sqrt();
            let dxy = feature_distance(&k, &x, &y).unwrap().sqrt();
            let dyz = feature_distance(&k, &y, &z).unwrap().sqrt();
            prop_assert!(dxz <= dxy + dyz + 1e-12);
        }
    }

    #[test]
    fn negative_witness_and_excess_distance_coincide(
        x1 in -1.5..1.5f64, x2 in -1.5..1.5f64,
        y1 in -1.5..1.5f64, y2 in -1.5..1.5f64,
        eta in 0.0..=1.0f64,
    ) {
        for spec in families(eta) {
            let k = KernelSpec::analytic(spec);
            let x = pt(x1, x2);
            let y = pt(y1, y2);
            let w = witness(&k, &x, &y).unwrap();
            let d_spec = feature_distance(&k, &x, &y).unwrap();
            let d_classical = 2.0 * (1.0 - classical_bound(&x, &y).unwrap());
            if w < 0.0 {
                prop_assert!(d_spec > d_classical);
            } else if w > 0.0 {
                prop_assert!(d_spec < d_classical);
            }
        }
    }

    #[test]
    fn squared_feature_distance_matches_the_kernel(
        x1 in -2.0..2.0f64, x2 in -2.0..2.0f64,
        y1 in -2.0..2.0f64, y2 in -2.0..2.0f64,
    ) {
        let spec = KernelSpec::analytic(
            StateSpec::single_mode(StateFamily::Squeezed { r: 0.6 }, 0.8).unwrap(),
        );
        let x = pt(x1, x2);
        let y = pt(y1, y2);
        let d = feature_distance(&spec, &x, &y).unwrap();
        let k = evaluate(&spec, &x, &y).unwrap();
        prop_assert_eq!(d, 2.0 * (1.0 - k));
        prop_assert!((0.0..=2.0).contains(&d));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_gram_matrices_are_positive_semidefinite(
        coords in prop::collection::vec(-2.0..2.0f64, 4..16),
        eta in 0.0..=1.0f64,
        family_pick in 0usize..4,
    ) {
        let points: Vec<DataPoint> = coords
            .chunks_exact(2)
            .map(|c| pt(c[0], c[1]))
            .collect();
        let spec = KernelSpec::analytic(families(eta)[family_pick]);
        let g = gram(&spec, &points).unwrap();
        prop_assert!(g.min_eigenvalue() >= -1e-9, "{}", g.min_eigenvalue());
    }

    #[test]
    fn ridge_fits_have_small_residual_and_nonnegative_norm(
        coords in prop::collection::vec(-1.5..1.5f64, 6..20),
        labels_seed in prop::collection::vec(-1.0..1.0f64, 10),
        lambda in 0.01..1.0f64,
    ) {
        let points: Vec<DataPoint> = coords
            .chunks_exact(2)
            .map(|c| pt(c[0], c[1]))
            .collect();
        let m = points.len().min(labels_seed.len());
        let points = &points[..m];
        let labels = &labels_seed[..m];
        let spec = KernelSpec::analytic(
            StateSpec::single_mode(StateFamily::Coherent, 1.0).unwrap(),
        );
        let g = gram(&spec, points).unwrap();
        let model = fit_krr(&g, labels, lambda).unwrap();
        prop_assert!(norm_bound(&model) >= 0.0);
        let k = g.entries();
        let c = nalgebra::DVector::from_column_slice(model.coefficients());
        let residual = (k * &c + lambda * m as f64 * &c
            - nalgebra::DVector::from_column_slice(labels))
        .amax();
        prop_assert!(residual < 1e-10, "residual {residual:.3e}");
    }
}
