use proptest::prelude::*;

use steinctrl::bandwidth::{golden_section_max, split_index};
use steinctrl::experiment::{run_experiment, ExperimentConfig};
use steinctrl::{BaseKernel, BoundaryWeight, Estimator, GramKind, ModifiedKernel, RadialProfile, SteinKernel};

fn kernel(b: u32, d: usize, h: f64) -> SteinKernel {
    let base = BaseKernel::new(RadialProfile::wendland(b, d).unwrap(), h).unwrap();
    SteinKernel::uniform(ModifiedKernel::new(base, BoundaryWeight::unit_cube(d)).unwrap())
}

fn points(d: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..=1.0f64, d), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stein_kernel_is_symmetric(b in 0u32..=2, h in 0.1..2.0f64, pts in points(2, 3)) {
        let k = kernel(b, 2, h);
        let (x, y) = (&pts[0], pts.last().unwrap());
        prop_assert_eq!(k.k0(x, y).unwrap().to_bits(), k.k0(y, x).unwrap().to_bits());
    }

    #[test]
    fn gram_is_symmetric_psd(b in 0u32..=2, h in 0.2..1.5f64, pts in points(1, 12)) {
        let g = kernel(b, 1, h).gram(&pts, GramKind::KPlus).unwrap().matrix;
        prop_assert_eq!(&g, &g.transpose());
        let scale = g.trace().max(1.0);
        let min = g.symmetric_eigen().eigenvalues.min();
        prop_assert!(min >= -1e-9 * scale, "min eigenvalue {}", min);
    }

    #[test]
    fn split_index_leaves_both_halves(n in 2usize..5000, rho in 0.0..=1.0f64) {
        let m = split_index(n, rho);
        prop_assert!(m >= 1 && m < n);
    }

    #[test]
    fn golden_stays_in_bracket(peak in -1.0..12.0f64, iters in 0usize..30) {
        let r = golden_section_max(|h| -(h - peak).abs(), 0.0, 10.0, iters);
        prop_assert!(r.x > 0.0 && r.x <= 10.0);
        prop_assert_eq!(r.evaluations, iters + 2);
    }
}

#[test]
fn harness_estimates_are_centred_and_cf_beats_mc() {
    let reps = 100;
    let cfg = ExperimentConfig { n_list: vec![16, 48], replicates: reps, seed: 11, ..Default::default() };
    let rows = run_experiment(&cfg).unwrap();
    for r in &rows {
        let bias = r.mean_estimate - 1.0;
        let se = ((r.mse - bias * bias).max(0.0) / (reps as f64 - 1.0)).sqrt();
        assert!(bias.abs() <= 4.0 * se + 1e-12, "{r:?}");
        assert!(r.mse >= 0.0 && r.se >= 0.0);
    }
    let mse = |e| rows.iter().find(|r| r.n == 48 && r.estimator == e).unwrap().mse;
    assert!(mse(Estimator::CF) < mse(Estimator::MC));
}
