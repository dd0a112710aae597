use faer::Mat;
use hlt_core::brown_ravenhall::kernel_sandwich;
use hlt_core::hardy_constants::{psi_function, psi_function_b_form, DimParams};
use hlt_core::remainder::power_split;
use hlt_core::spectral::bs::direct_count_matrix;
use hlt_core::spectral::potential::ensemble_member;
use hlt_core::spectral::{build_operator, EnsembleSpec, GridSpec, SpectrumResult};
use proptest::prelude::*;

fn schrodinger(grid: GridSpec, seed: u64) -> Mat<f64> {
    let v = ensemble_member(&EnsembleSpec::new(grid.d, 1, seed), 0).sample(&grid);
    build_operator(grid, 0.6, 0.0, &v).unwrap().dense()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Weyl: N(-τ, (A+B)/2) ≤ N(-τ, A) + N(-τ, B).
    #[test]
    fn count_is_subadditive(seed_a in 0u64..10_000, seed_b in 0u64..10_000, tau in 0.01f64..1.0) {
        let grid = GridSpec::staggered(1, 32, 6.0).unwrap();
        let a = schrodinger(grid, seed_a);
        let b = schrodinger(grid, seed_b);
        let mid = Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + b[(i, j)]));
        let (n_mid, _) = direct_count_matrix(&mid, tau).unwrap();
        let (n_a, _) = direct_count_matrix(&a, tau).unwrap();
        let (n_b, _) = direct_count_matrix(&b, tau).unwrap();
        prop_assert!(n_mid <= n_a + n_b, "{n_mid} > {n_a} + {n_b}");
    }

    #[test]
    fn power_split_dominates(a in 0.0f64..3.0, gap in 0.05f64..3.0, eps in 1e-3f64..1e3, lr in -20.0f64..20.0) {
        let b = a + gap;
        let sp = power_split(a, b).unwrap();
        let r = lr.exp();
        let lhs = r.powf(a);
        let rhs = eps * r.powf(b) + sp.remainder(eps);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "r^a = {lhs} > {rhs}");
    }

    #[test]
    fn psi_is_even_and_forms_agree(d in 1u32..=3, s_frac in 0.05f64..0.95, a_frac in 0.02f64..0.98) {
        let s = s_frac * d as f64 / 2.0;
        let p = DimParams::new(d, s).unwrap();
        let alpha = 2.0 * s + a_frac * (d as f64 - 2.0 * s);
        let mirror = d as f64 + 2.0 * s - alpha;
        let psi = psi_function(&p, alpha).unwrap();
        prop_assert!((psi - psi_function(&p, mirror).unwrap()).abs() <= 1e-10 * psi.abs());
        prop_assert!((psi - psi_function_b_form(&p, alpha).unwrap()).abs() <= 1e-10 * psi.abs());
    }

    #[test]
    fn kernel_sandwich_holds(log_excess in -25.0f64..6.0) {
        let t = 1.0 + log_excess.exp();
        for (gap, q1) in kernel_sandwich(&[t]).unwrap() {
            prop_assert!(gap >= 0.0 && q1 >= 0.0, "t = {t}: Q0 - Q1 = {gap}, Q1 = {q1}");
        }
    }

    #[test]
    fn layer_cake_identity(vals in prop::collection::vec(-10.0f64..-1e-6, 1..40), gamma in 0.05f64..3.0) {
        let spec = SpectrumResult::from_eigenvalues(vals, gamma).unwrap();
        prop_assert!(spec.layer_cake_error <= 1e-10, "{}", spec.layer_cake_error);
    }
}
