//! Property suites for the module invariants: channel maps stay
//! symplectic, losses compose, uncertainty is preserved, overlaps are
//! rotation invariant, the Duan sum ignores displacements.

use cvmem::epr::{duan_e, eof_lower_bound, SignConvention};
use cvmem::fidelity::gaussian_overlap;
use cvmem::gaussian::{
    apply_loss, apply_symplectic, squeezed_state, two_mode_squeezed, vacuum, GaussianState,
    SymplecticMap,
};
use cvmem::memory::{basis_transform, interaction_map, store_noisy, MemoryParams, ModeBasis};
use nalgebra::DVector;
use proptest::prelude::*;

const CASES: u32 = 1000;

fn squeezing() -> impl Strategy<Value = f64> {
    0.05f64..20.0
}

fn phase() -> impl Strategy<Value = f64> {
    0.0f64..360.0
}

fn transmission() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

fn displacement() -> impl Strategy<Value = (f64, f64)> {
    ((-8.0f64..8.0), (-8.0f64..8.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn interaction_map_symplectic_for_all_couplings(kappa_frac in 1e-6f64..1.0) {
        let z2: f64 = 6.4;
        let params = MemoryParams {
            kappa: kappa_frac * z2.sqrt(),
            ..MemoryParams::paper_2010()
        };
        let map = interaction_map(&params).unwrap();
        prop_assert!(map.verify().is_ok());
    }

    #[test]
    fn loss_composition_law(
        s in squeezing(),
        phi in phase(),
        d in displacement(),
        eta1 in transmission(),
        eta2 in transmission(),
    ) {
        let state = squeezed_state(s, phi, d).unwrap();
        let chained = apply_loss(&apply_loss(&state, 0, eta1).unwrap(), 0, eta2).unwrap();
        let direct = apply_loss(&state, 0, eta1 * eta2).unwrap();
        prop_assert!((chained.cov() - direct.cov()).abs().max() < 1e-12);
        prop_assert!((chained.mean() - direct.mean()).abs().max() < 1e-12);
    }

    #[test]
    fn channel_chains_preserve_uncertainty(
        s in squeezing(),
        phi in phase(),
        d in displacement(),
        eta in transmission(),
        angle in phase(),
        kappa_frac in 0.05f64..1.0,
    ) {
        let z2: f64 = 6.4;
        let params = MemoryParams { kappa: kappa_frac * z2.sqrt(), ..MemoryParams::paper_2010() };
        let light = squeezed_state(s, phi, d).unwrap();
        let light = apply_loss(&light, 0, eta).unwrap();
        let light = apply_symplectic(&light, &SymplecticMap::rotation(1, 0, angle)).unwrap();
        let joint = light.tensor(&vacuum(1));
        let joint = apply_symplectic(&joint, &interaction_map(&params).unwrap()).unwrap();
        let min_nu = joint
            .symplectic_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        prop_assert!(min_nu >= 0.5 - 1e-9, "min symplectic eigenvalue {min_nu}");
        // covariance symmetry is preserved as well
        prop_assert!((joint.cov() - joint.cov().transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn stored_states_remain_physical(
        s in 0.2f64..10.0,
        phi in phase(),
        d in displacement(),
    ) {
        let params = MemoryParams::paper_2010();
        let stored = store_noisy(&squeezed_state(s, phi, d).unwrap(), &params).unwrap();
        prop_assert!(
            GaussianState::new(stored.mean().clone(), stored.cov().clone()).is_ok()
        );
    }

    #[test]
    fn overlap_invariant_under_joint_rotation(
        s1 in squeezing(),
        s2 in squeezing(),
        phi1 in phase(),
        phi2 in phase(),
        d1 in displacement(),
        d2 in displacement(),
        angle in phase(),
    ) {
        let a = squeezed_state(s1, phi1, d1).unwrap();
        let b = squeezed_state(s2, phi2, d2).unwrap();
        let rot = SymplecticMap::rotation(1, 0, angle);
        let base = gaussian_overlap(&a, &b).unwrap();
        let rotated = gaussian_overlap(
            &apply_symplectic(&a, &rot).unwrap(),
            &apply_symplectic(&b, &rot).unwrap(),
        )
        .unwrap();
        prop_assert!((base - rotated).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&base));
    }

    #[test]
    fn duan_sum_ignores_displacements(
        s in squeezing(),
        dx in -6.0f64..6.0,
        dp in -6.0f64..6.0,
    ) {
        let tms = two_mode_squeezed(s).unwrap();
        let mut shift = DVector::zeros(4);
        shift[0] = dx;
        shift[3] = dp;
        let displaced = apply_symplectic(&tms, &SymplecticMap::displacement(shift)).unwrap();
        let base = duan_e(&tms, SignConvention::PlusMinus).unwrap();
        let shifted = duan_e(&displaced, SignConvention::PlusMinus).unwrap();
        prop_assert!((base - shifted).abs() < 1e-12);
        prop_assert!((base - 2.0 / s).abs() < 1e-12);
    }

    #[test]
    fn eof_bound_properties(e in 0.0f64..4.0) {
        let bound = eof_lower_bound(e);
        prop_assert!(bound >= 0.0);
        if e >= 2.0 {
            prop_assert!(bound == 0.0);
        } else if e > 1e-6 {
            // strictly decreasing inside (0, 2)
            prop_assert!(bound > eof_lower_bound((e + 1e-4).min(2.0)));
        }
    }

    #[test]
    fn basis_transforms_roundtrip(s in squeezing()) {
        let tms = two_mode_squeezed(s).unwrap();
        for (from, to) in [
            (ModeBasis::Sideband, ModeBasis::CosSin),
            (ModeBasis::CosSin, ModeBasis::Local),
            (ModeBasis::Local, ModeBasis::Sideband),
        ] {
            let back = basis_transform(
                &basis_transform(&tms, from, to).unwrap(),
                to,
                from,
            )
            .unwrap();
            prop_assert!((back.cov() - tms.cov()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn pure_constructions_have_unit_purity(
        s in squeezing(),
        phi in phase(),
        d in displacement(),
    ) {
        let single = squeezed_state(s, phi, d).unwrap();
        prop_assert!((single.det_2cov() - 1.0).abs() < 1e-9);
        let pair = two_mode_squeezed(s).unwrap();
        prop_assert!((pair.det_2cov() - 1.0).abs() < 1e-9);
    }
}
