use proptest::prelude::*;
use rayon::prelude::*;
use semireg::estimator::weights::j_star;
use semireg::estimator::{
    build_weight_family, pinsker_weights, select, select_model, sigma_hat, theta_hat, weighted_coefficients,
    CoefficientEstimates, WeightFamily, WeightLabel,
};
use semireg::noise::{sample_observations, InterarrivalLaw, NoiseSpec, ObservationPath, RngStream};
use semireg::signal::{discrete_norm_sq, FourierCoefficients, SignalSpec, TrigTransform};

fn poisson_noise() -> NoiseSpec {
    NoiseSpec {
        interarrival: InterarrivalLaw::Exponential { rate: 1.0 / 3.0 },
        ..NoiseSpec::default()
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn coefficient_noise_moments() {
    let (n, p) = (20, 41);
    let zero = SignalSpec::constant(0.0);
    let est: Vec<CoefficientEstimates> = (0..10_000u64)
        .into_par_iter()
        .map(|r| theta_hat(&sample_observations(&zero, &poisson_noise(), n, p, &RngStream::new(21, r)).unwrap()).unwrap())
        .collect();
    for j in [1, 2, 3, 10, 40] {
        let xs: Vec<f64> = est.iter().map(|e| e.get(j)).collect();
        let (m, se) = mean_se(&xs);
        assert!(m.abs() <= 3.0 * se, "j = {j}: mean {m} (se {se})");
        let scaled: Vec<f64> = xs.iter().map(|x| n as f64 * x * x).collect();
        let (v, se) = mean_se(&scaled);
        assert!((v - 1.0 / 3.0).abs() <= 3.0 * se, "j = {j}: n Var = {v} (se {se})");
    }
}

#[test]
fn noiseless_basis_element_is_recovered() {
    // phi_3 sits below j_* for every candidate, so its weight is one
    let (n, p) = (100, 101);
    let signal = SignalSpec::basis_element(3);
    let obs = sample_observations(&signal, &NoiseSpec::silent(), n, p, &RngStream::new(0, 0)).unwrap();
    let est = theta_hat(&obs).unwrap();
    let family = build_weight_family(3, 0.5, n as f64, p).unwrap();
    assert!(3 < j_star(n as f64));
    let res = select_model(&est, &family, 0.05).unwrap();
    let theta_bar = FourierCoefficients::compute(&signal, p).unwrap().theta_bar;
    assert!((res.coefficients[2] - theta_bar[2]).abs() < 1e-12);
}

#[test]
fn noiseless_selection_beats_candidates_on_cosine() {
    let (n, p) = (200, 257);
    let signal = SignalSpec::basis_element(2);
    let obs = sample_observations(&signal, &NoiseSpec::silent(), n, p, &RngStream::new(0, 0)).unwrap();
    let est = theta_hat(&obs).unwrap();
    // every Pinsker candidate keeps j = 2 at weight one; candidates differ
    // only on coordinates carrying discretization residue h_{j,p}
    let family = build_weight_family(2, 0.5, n as f64, p).unwrap();
    let res = select_model(&est, &family, 0.05).unwrap();
    let truth = signal.grid_values(p);
    let transform = TrigTransform::new(p);
    let err = |values: &[f64]| {
        let d: Vec<f64> = values.iter().zip(&truth).map(|(a, b)| a - b).collect();
        discrete_norm_sq(&d)
    };
    let selected = err(&res.estimate);
    for w in &family.weights {
        let other = err(&transform.synthesize(&weighted_coefficients(w, &est)));
        assert!(selected <= other + 1e-9, "{:?}: {selected} > {other}", w.alpha);
    }
}

#[test]
fn sigma_hat_error_scales_as_predicted() {
    // MC mean |sigma_hat - sigma_Q| / (sqrt(n)/p_check + 1/sqrt(p_check))
    let p = 1001;
    let zero = SignalSpec::constant(0.0);
    let fitted: Vec<f64> = [100usize, 200]
        .iter()
        .map(|&n| {
            let errs: Vec<f64> = (0..300u64)
                .into_par_iter()
                .map(|r| {
                    let obs = sample_observations(&zero, &poisson_noise(), n, p, &RngStream::new(22, r)).unwrap();
                    (sigma_hat(&theta_hat(&obs).unwrap()) - 1.0 / 3.0).abs()
                })
                .collect();
            let pc = n.min(p) as f64;
            mean_se(&errs).0 / ((n as f64).sqrt() / pc + 1.0 / pc.sqrt())
        })
        .collect();
    let ratio = fitted[1] / fitted[0];
    assert!((0.5..=2.0).contains(&ratio), "constants {fitted:?}");
}

fn path_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..5, 3usize..12).prop_flat_map(|(n, p)| {
        proptest::collection::vec(-2.0f64..2.0, n * p).prop_map(move |inc| (n, p, inc))
    })
}

fn estimates_strategy() -> impl Strategy<Value = CoefficientEstimates> {
    (5usize..200, 8usize..64).prop_flat_map(|(n, p)| {
        proptest::collection::vec(-1.0f64..1.0, p - 1)
            .prop_map(move |t| CoefficientEstimates::new(n, p, t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_are_linear((n, p, inc) in path_strategy(), a in -3.0f64..3.0) {
        let base = theta_hat(&ObservationPath::from_increments(n, p, &inc).unwrap()).unwrap();
        let scaled_inc: Vec<f64> = inc.iter().map(|d| a * d).collect();
        let scaled = theta_hat(&ObservationPath::from_increments(n, p, &scaled_inc).unwrap()).unwrap();
        for (x, y) in base.theta_hat.iter().zip(&scaled.theta_hat) {
            prop_assert!((a * x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn pinsker_weight_invariants(beta in 1u32..8, l in 0.01f64..20.0, upsilon in 1.5f64..1e5, p in 3usize..300) {
        let w = pinsker_weights(beta, l, upsilon, p).unwrap();
        prop_assert_eq!(w.to_dense().len(), p - 1);
        prop_assert!(w.support() <= p - 1);
        let dense = w.to_dense();
        for (i, v) in dense.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(v));
            if i > 0 {
                prop_assert!(*v <= dense[i - 1]);
            }
            if i + 1 < j_star(upsilon) {
                prop_assert_eq!(*v, 1.0);
            }
        }
        prop_assert_eq!(w.get(p), 0.0);
    }

    #[test]
    fn selection_attains_minimum(est in estimates_strategy(), k in 1usize..4, eps in 0.2f64..0.7, delta in 0.01f64..0.16) {
        let family = build_weight_family(k, eps, est.n as f64, est.p).unwrap();
        let sel = select(&est, &family, delta).unwrap();
        let min = sel.costs.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(sel.costs[sel.index], min);
        prop_assert!(sel.costs[..sel.index].iter().all(|c| *c > min));
    }

    #[test]
    fn selection_permutation_invariant(est in estimates_strategy(), seed in any::<u64>(), delta in 0.01f64..0.16) {
        let family = build_weight_family(3, 0.4, est.n as f64, est.p).unwrap();
        let base = select(&est, &family, delta).unwrap();
        let mut order: Vec<usize> = (0..family.weights.len()).collect();
        // deterministic shuffle driven by the seed
        let mut s = seed | 1;
        for i in (1..order.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            order.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let permuted = WeightFamily::from_weights(order.iter().map(|&i| family.weights[i].clone()).collect()).unwrap();
        let other = select(&est, &permuted, delta).unwrap();
        prop_assert_eq!(base.costs[base.index], other.costs[other.index]);
    }

    #[test]
    fn family_shape(k in 1usize..6, eps in 0.15f64..0.95, upsilon in 3.0f64..1e4, p in 3usize..200) {
        let family = build_weight_family(k, eps, upsilon, p).unwrap();
        prop_assert_eq!(family.nu, k * family.m);
        prop_assert_eq!(family.weights.len(), family.nu);
        prop_assert!(family.lambda_star >= 1.0);
        prop_assert!(family.lambda_star <= family.lambda_star_bound());
        for w in &family.weights {
            let is_pinsker = matches!(w.alpha, WeightLabel::Pinsker { .. });
            prop_assert!(is_pinsker);
        }
    }
}
