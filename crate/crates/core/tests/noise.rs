use rayon::prelude::*;
use semireg::noise::{
    observation_grid, sample_noise_increments, sample_renewal_times, sample_semimarkov_increments,
    InterarrivalLaw, LevyJumps, NoiseSpec, RngStream,
};
use semireg::renewal::{solve_renewal_density, NoiseScalars};
use semireg::signal::trig_basis_on_grid;

/// Mean and standard error of a sample.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// `I_n(f) = sum_l f(t_l) (xi_{t_l} - xi_{t_{l-1}})` for step `f = Psi_{j,p}`.
fn stochastic_integrals(spec: &NoiseSpec, n: usize, p: usize, js: &[usize], paths: u64, seed: u64) -> Vec<Vec<f64>> {
    let grid = observation_grid(n, p);
    (0..paths)
        .into_par_iter()
        .map(|r| {
            let inc = sample_noise_increments(&grid, spec, &RngStream::new(seed, r)).unwrap();
            js.iter()
                .map(|&j| {
                    inc.iter()
                        .enumerate()
                        .map(|(k, d)| trig_basis_on_grid(j, k + 1, p) * d)
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn poisson_noise() -> NoiseSpec {
    NoiseSpec {
        interarrival: InterarrivalLaw::Exponential { rate: 1.0 / 3.0 },
        ..NoiseSpec::default()
    }
}

#[test]
fn covariance_identity_poisson_epochs() {
    let (n, p) = (50, 101);
    let ints = stochastic_integrals(&poisson_noise(), n, p, &[2, 3], 20_000, 11);
    let sq: Vec<f64> = ints.iter().map(|v| v[0] * v[0] / n as f64).collect();
    let cross: Vec<f64> = ints.iter().map(|v| v[0] * v[1] / n as f64).collect();
    let (m, se) = mean_se(&sq);
    assert!((m - 1.0 / 3.0).abs() <= 3.0 * se, "E I^2/n = {m} (se {se})");
    let (m, se) = mean_se(&cross);
    assert!(m.abs() <= 3.0 * se, "E I(f) I(g)/n = {m} (se {se})");
}

#[test]
fn covariance_identity_with_levy_jumps() {
    let spec = NoiseSpec {
        rho_check: 0.5,
        levy_jumps: Some(LevyJumps::symmetric(4.0)),
        ..poisson_noise()
    };
    let n = 40;
    let ints = stochastic_integrals(&spec, n, 31, &[2], 20_000, 12);
    let sq: Vec<f64> = ints.iter().map(|v| v[0] * v[0] / n as f64).collect();
    let (m, se) = mean_se(&sq);
    assert!((m - 1.0 / 3.0).abs() <= 3.0 * se, "E I^2/n = {m} (se {se})");
}

#[test]
fn integrals_are_centred() {
    let ints = stochastic_integrals(&NoiseSpec::default(), 30, 31, &[1, 2, 5], 10_000, 13);
    for col in 0..3 {
        let xs: Vec<f64> = ints.iter().map(|v| v[col]).collect();
        let (m, se) = mean_se(&xs);
        assert!(m.abs() <= 3.0 * se, "column {col}: mean {m} (se {se})");
    }
}

#[test]
fn variance_bounded_by_kappa() {
    let spec = NoiseSpec::default();
    let sol = solve_renewal_density(&spec.interarrival.renewal_kernel().unwrap(), 0.01, 100.0).unwrap();
    let kappa = NoiseScalars::new(spec.rho1, spec.rho2, &sol, 1.0).kappa_q;
    let n = 30;
    for j in [1, 2, 7] {
        let ints = stochastic_integrals(&spec, n, 31, &[j], 10_000, 14 + j as u64);
        let sq: Vec<f64> = ints.iter().map(|v| v[0] * v[0] / n as f64).collect();
        let (m, se) = mean_se(&sq);
        assert!(m <= kappa + 3.0 * se, "j = {j}: E I^2/n = {m} exceeds kappa = {kappa}");
    }
}

#[test]
fn semimarkov_variance_grows_like_n_over_tau() {
    // Var z_n = E N_n E Y^2 and E N_n / n -> 1/3 for chi-squared(3) gaps
    let n = 200;
    let spec = NoiseSpec::default();
    let grid = vec![0.0, n as f64];
    let z: Vec<f64> = (0..20_000u64)
        .into_par_iter()
        .map(|r| sample_semimarkov_increments(&grid, &spec, &RngStream::new(15, r)).unwrap()[0])
        .collect();
    let (m, _) = mean_se(&z);
    let var: f64 = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
    // kurtosis of a compound sum of normals is close to 3
    let se = var * (2.0 / z.len() as f64).sqrt();
    assert!((var / n as f64 - 1.0 / 3.0).abs() <= 3.0 * se / n as f64, "Var z_n / n = {}", var / n as f64);
}

#[test]
fn renewal_counts_match_elementary_renewal() {
    let law = InterarrivalLaw::ChiSquared { df: 3.0 };
    let counts: Vec<f64> = (0..20_000u64)
        .into_par_iter()
        .map(|r| sample_renewal_times(&law, 300.0, &RngStream::new(16, r)).unwrap().len() as f64)
        .collect();
    let (m, se) = mean_se(&counts);
    // E N_t = t/tau + E tau^2 / (2 tau^2) - 1 + o(1)
    let expected = 100.0 + 15.0 / 18.0 - 1.0;
    assert!((m - expected).abs() <= 3.0 * se, "E N = {m} vs {expected} (se {se})");
}
