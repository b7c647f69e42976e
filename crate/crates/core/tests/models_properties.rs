use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use tempered::dists::DensityKernel;
use tempered::experiments::TrueModel;
use tempered::models::{BetaBernoulliSpec, Dataset, LinRegSpec, ModelSpec, NormalLocationSpec, PosteriorSummary};
use tempered::rng::{seeded, stream, StreamTag};

fn replicate<T: Clone>(values: &[T], k: usize) -> Vec<T> {
    (0..k).flat_map(|_| values.iter().cloned()).collect()
}

fn replicate_rows(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let rows: Vec<_> = (0..k).flat_map(|_| x.row_iter().map(|r| r.into_owned())).collect();
    DMatrix::from_rows(&rows)
}

/// Dyadic values keep every sum exact so replicated and tempered fits can be
/// compared bit for bit.
fn dyadic(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-64i32..64).prop_map(|v| v as f64 / 8.0), 1..max_len)
}

fn normal_params(k: &DensityKernel) -> (f64, f64) {
    match k {
        DensityKernel::Normal(n) => (n.mean(), n.sd()),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tempering_matches_replication_normal(values in dyadic(20), k in 1usize..6, prior_var in prop_oneof![Just(f64::INFINITY), Just(1.0), Just(4.0)]) {
        let spec = NormalLocationSpec::new(1.0, 0.5, prior_var).unwrap();
        let tempered = spec.posterior(&Dataset::univariate(values.clone()).unwrap(), k as f64).unwrap();
        let replicated = spec.posterior(&Dataset::univariate(replicate(&values, k)).unwrap(), 1.0).unwrap();
        prop_assert_eq!(tempered, replicated);
    }

    #[test]
    fn tempering_matches_replication_beta(bits in prop::collection::vec(0u8..2, 1..30), k in 1usize..6, a in 0.5f64..3.0, b in 0.5f64..3.0) {
        let values: Vec<f64> = bits.iter().map(|v| *v as f64).collect();
        let spec = BetaBernoulliSpec::new(a, b).unwrap();
        let tempered = spec.posterior(&Dataset::univariate(values.clone()).unwrap(), k as f64).unwrap();
        let replicated = spec.posterior(&Dataset::univariate(replicate(&values, k)).unwrap(), 1.0).unwrap();
        prop_assert_eq!(tempered, replicated);
    }

    #[test]
    fn tempering_matches_replication_linreg(entries in prop::collection::vec((-16i32..16).prop_map(|v| v as f64 / 4.0), 24), k in 1usize..5) {
        let x = DMatrix::from_row_slice(8, 3, &entries[..24]);
        let y = DVector::from_iterator(8, entries.iter().take(8).map(|v| v * 0.5 + 0.25));
        let spec = LinRegSpec::isotropic(1.0, 3, 2.0).unwrap();
        let tempered = spec.posterior(&Dataset::regression(x.clone(), y.clone()).unwrap(), k as f64);
        let rep_y = DVector::from_vec(replicate(y.as_slice(), k));
        let replicated = spec.posterior(&Dataset::regression(replicate_rows(&x, k), rep_y).unwrap(), 1.0);
        prop_assert_eq!(tempered, replicated);
    }

    #[test]
    fn loo_is_refit_on_deleted_data(values in prop::collection::vec(-5.0f64..5.0, 2..20), tau in 0.01f64..100.0, pick in any::<prop::sample::Index>()) {
        let spec = ModelSpec::from(NormalLocationSpec::new(1.3, 0.2, 2.0).unwrap());
        let data = Dataset::univariate(values.clone()).unwrap();
        let i = pick.index(values.len());
        let mut kept = values.clone();
        kept.remove(i);
        let refit = spec.predictive(&Dataset::univariate(kept).unwrap(), tau, None).unwrap();
        prop_assert_eq!(spec.loo_predictive(&data, tau, i).unwrap(), refit);
    }

    #[test]
    fn posterior_is_always_proper(values in prop::collection::vec(-5.0f64..5.0, 6..30), tau in 1e-6f64..1e6) {
        let n = values.len();
        let normal = NormalLocationSpec::new(1.0, 0.0, 1.0).unwrap();
        match normal.posterior(&Dataset::univariate(values.clone()).unwrap(), tau).unwrap() {
            PosteriorSummary::NormalLocation { var, .. } => prop_assert!(var > 0.0),
            _ => unreachable!(),
        }
        let bits: Vec<f64> = values.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect();
        match BetaBernoulliSpec::new(1.0, 1.0).unwrap().posterior(&Dataset::univariate(bits).unwrap(), tau).unwrap() {
            PosteriorSummary::BetaBernoulli { a, b } => prop_assert!(a > 0.0 && b > 0.0),
            _ => unreachable!(),
        }
        let x = DMatrix::from_fn(n, 2, |i, j| values[(i + j) % n]);
        let y = DVector::from_column_slice(&values);
        let spec = LinRegSpec::isotropic(1.0, 2, 1.0).unwrap();
        if let Ok(PosteriorSummary::LinReg { cov, .. }) = spec.posterior(&Dataset::regression(x, y).unwrap(), tau) {
            prop_assert!(cov.clone().cholesky().is_some());
        }
    }
}

#[test]
fn loo_linreg_is_refit_on_deleted_rows() {
    let mut rng = seeded(5);
    let data = TrueModel::default_regression().generate(12, &mut rng).unwrap();
    let spec = LinRegSpec::isotropic(1.0, 5, 3.0).unwrap();
    let (x, y) = match &data {
        Dataset::Regression { x, y } => (x.clone(), y.clone()),
        _ => unreachable!(),
    };
    for i in 0..12 {
        let deleted = Dataset::regression(x.clone().remove_row(i), y.clone().remove_row(i)).unwrap();
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        assert_eq!(spec.loo_predictive(&data, 0.7, i).unwrap(), spec.predictive(&deleted, 0.7, &row).unwrap());
    }
}

#[test]
fn loo_beta_is_refit_on_deleted_data() {
    let spec = ModelSpec::from(BetaBernoulliSpec::new(2.0, 0.5).unwrap());
    let values = vec![1.0, 0.0, 0.0, 1.0, 1.0];
    let data = Dataset::univariate(values.clone()).unwrap();
    for i in 0..values.len() {
        let mut kept = values.clone();
        kept.remove(i);
        let refit = spec.predictive(&Dataset::univariate(kept).unwrap(), 3.0, None).unwrap();
        assert_eq!(spec.loo_predictive(&data, 3.0, i).unwrap(), refit);
    }
}

#[test]
fn predictive_mean_moves_monotonically_from_prior_to_sample_mean() {
    let values = vec![2.1, 1.7, 3.4, 2.9, 2.2];
    let ybar = values.iter().sum::<f64>() / 5.0;
    let data = Dataset::univariate(values).unwrap();
    let taus: Vec<f64> = (-8..=8).map(|e| 10f64.powi(e)).collect();

    let proper = NormalLocationSpec::new(1.0, -1.0, 0.5).unwrap();
    let means: Vec<f64> = taus.iter().map(|t| normal_params(&proper.predictive(&data, *t).unwrap()).0).collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
    assert!((means[0] + 1.0).abs() < 1e-6);
    assert!((means[16] - ybar).abs() < 1e-6);

    let flat = NormalLocationSpec::flat(1.0).unwrap();
    for t in &taus {
        assert_eq!(normal_params(&flat.predictive(&data, *t).unwrap()).0, ybar);
    }
}

#[test]
fn regression_reduces_to_normal_location() {
    let mut rng = seeded(17);
    for n in [2, 10, 100] {
        let values: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let uni = Dataset::univariate(values.clone()).unwrap();
        let reg = Dataset::regression(DMatrix::from_element(n, 1, 1.0), DVector::from_vec(values)).unwrap();
        let normal = ModelSpec::from(NormalLocationSpec::flat(1.0).unwrap());
        let linreg = ModelSpec::from(LinRegSpec::new(1.0, DMatrix::from_element(1, 1, 1e12)).unwrap());
        for tau in [0.05, 1.0, 20.0] {
            let (m1, s1) = normal_params(&normal.predictive(&uni, tau, None).unwrap());
            let (m2, s2) = normal_params(&linreg.predictive(&reg, tau, Some(&[1.0])).unwrap());
            assert!((m1 - m2).abs() < 1e-8 && (s1 - s2).abs() < 1e-8, "n={n} τ={tau}");
            for i in [0, n - 1] {
                let (m1, s1) = normal_params(&normal.loo_predictive(&uni, tau, i).unwrap());
                let (m2, s2) = normal_params(&linreg.loo_predictive(&reg, tau, i).unwrap());
                assert!((m1 - m2).abs() < 1e-8 && (s1 - s2).abs() < 1e-8, "loo n={n} τ={tau} i={i}");
            }
        }
    }
}

#[test]
fn plug_in_predictive_for_regression_uses_least_squares() {
    let mut rng = seeded(3);
    let data = TrueModel::default_regression().generate(40, &mut rng).unwrap();
    let spec = ModelSpec::from(LinRegSpec::isotropic(1.0, 5, 1.0).unwrap());
    let at = [0.3, -0.2, 1.0, 0.0, 0.5];
    let plug = normal_params(&spec.plug_in_predictive(&data, Some(&at)).unwrap());
    let sharp = normal_params(&spec.predictive(&data, 1e9, Some(&at)).unwrap());
    assert!((plug.0 - sharp.0).abs() < 1e-6);
    assert_eq!(plug.1, 1.0);
}

#[test]
fn mass_outside_fixed_radius_decreases_with_n_on_average() {
    let spec = ModelSpec::from(NormalLocationSpec::new(1.0, 0.0, 1.0).unwrap());
    let beta = ModelSpec::from(BetaBernoulliSpec::new(1.0, 1.0).unwrap());
    let normal_truth = TrueModel::normal_iid(0.0, 1.0).unwrap();
    let coin = TrueModel::bernoulli_iid(0.3).unwrap();
    let ns = [10usize, 40, 160, 640];
    let mut normal_means = Vec::new();
    let mut beta_means = Vec::new();
    for (j, n) in ns.iter().enumerate() {
        let (mut a, mut b) = (0.0, 0.0);
        for r in 0..200u64 {
            let mut rng = stream(99, StreamTag::Data, r, j as u64);
            a += spec.posterior_mass_outside(&normal_truth.generate(*n, &mut rng).unwrap(), 1.0, 0.0, 0.2).unwrap();
            b += beta.posterior_mass_outside(&coin.generate(*n, &mut rng).unwrap(), 1.0, 0.3, 0.1).unwrap();
        }
        normal_means.push(a / 200.0);
        beta_means.push(b / 200.0);
    }
    assert!(normal_means.windows(2).all(|w| w[1] < w[0]), "{normal_means:?}");
    assert!(beta_means.windows(2).all(|w| w[1] < w[0]), "{beta_means:?}");
}
