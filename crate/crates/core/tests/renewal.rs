use semireg::noise::{sample_renewal_times, InterarrivalLaw, RngStream};
use semireg::renewal::{solve_renewal_density, GammaKernel, NoiseScalars};
use statrs::function::gamma::ln_gamma;

/// Renewal density of a gamma law as the series of its convolution powers,
/// `sum_l Gamma(l * shape, scale)` density; independent of the solver.
fn series_density(shape: f64, scale: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if shape == 1.0 { 1.0 / scale } else { 0.0 };
    }
    let z = x / scale;
    (1..2000)
        .map(|l| {
            let k = l as f64 * shape;
            ((k - 1.0) * z.ln() - z - ln_gamma(k)).exp() / scale
        })
        .sum()
}

#[test]
fn exponential_renewal_is_constant() {
    let law = InterarrivalLaw::Exponential { rate: 1.0 };
    let sol = solve_renewal_density(&law.renewal_kernel().unwrap(), 1e-3, 20.0).unwrap();
    let worst = sol.rho.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "max |rho - 1| = {worst}");
    assert!(sol.upsilon_l1 < 1e-4);
    assert!(sol.tail_converged);
}

#[test]
fn gamma_two_closed_form() {
    let k = GammaKernel { shape: 2.0, scale: 1.0 };
    let sol = solve_renewal_density(&k, 1e-3, 40.0).unwrap();
    let worst = sol
        .rho
        .iter()
        .enumerate()
        .map(|(i, r)| (r - 0.5 * (1.0 - (-2.0 * sol.x(i)).exp())).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "max error {worst}");
    assert!((sol.rho[1000] - 0.432332).abs() < 1e-5);
    assert!((sol.upsilon_l1 - 0.25).abs() < 1e-3, "{}", sol.upsilon_l1);
    assert!(sol.tail_converged);
    assert!(sol.rho.iter().all(|r| *r >= 0.0));
}

#[test]
fn chi_squared_matches_series_and_converges() {
    let law = InterarrivalLaw::ChiSquared { df: 3.0 };
    let sol = solve_renewal_density(&law.renewal_kernel().unwrap(), 0.01, 100.0).unwrap();
    assert!(sol.tail_deviation < 1e-6, "tail deviation {}", sol.tail_deviation);
    assert!(sol.tail_converged);
    assert!(sol.upsilon_l1.is_finite());
    for &x in &[0.05, 0.5, 1.0, 2.5, 5.0, 10.0, 25.0] {
        let i = (x / sol.step).round() as usize;
        let oracle = series_density(1.5, 2.0, x);
        assert!((sol.rho[i] - oracle).abs() < 1e-5, "x = {x}: {} vs {oracle}", sol.rho[i]);
    }
    assert!(sol.rho.iter().all(|r| *r >= 0.0));
    // rho increases monotonically to 1/3 for chi-squared(3), so |rho|_* = 1/tau
    assert!((sol.rho_sup - 1.0 / 3.0).abs() < 1e-6, "{}", sol.rho_sup);
    let scalars = NoiseScalars::new(0.5, 0.5, &sol, 1.0);
    assert!((scalars.kappa_q - scalars.sigma_q).abs() < 1e-6);
}

#[test]
fn admissible_families_have_finite_upsilon() {
    let laws = [
        InterarrivalLaw::Exponential { rate: 0.5 },
        InterarrivalLaw::Gamma { shape: 3.0, scale: 0.5 },
        InterarrivalLaw::Gamma { shape: 1.7, scale: 1.0 },
        InterarrivalLaw::ChiSquared { df: 4.0 },
    ];
    for law in laws {
        let tau = law.mean();
        let sol = solve_renewal_density(&law.renewal_kernel().unwrap(), tau / 100.0, 40.0 * tau).unwrap();
        assert!(sol.upsilon_l1.is_finite(), "{law:?}");
        assert!(
            sol.tail_converged,
            "{law:?}: deviation {}, tail {}",
            sol.tail_deviation,
            sol.upsilon_tail
        );
    }
}

#[test]
fn refinement_is_consistent() {
    let k = GammaKernel { shape: 1.5, scale: 2.0 };
    let u = |h: f64| solve_renewal_density(&k, h, 60.0).unwrap().upsilon_l1;
    let (coarse, mid, fine) = (u(0.04), u(0.02), u(0.01));
    let estimated_error = (mid - coarse).abs() / 3.0;
    assert!(
        (fine - mid).abs() < 4.0 * estimated_error,
        "coarse {coarse}, mid {mid}, fine {fine}"
    );
}

#[test]
fn epoch_histogram_matches_solver() {
    // empirical renewal intensity over bins of width 0.25 on [0, 5]
    let law = InterarrivalLaw::Gamma { shape: 2.0, scale: 1.0 };
    let sol = solve_renewal_density(&law.renewal_kernel().unwrap(), 0.005, 40.0).unwrap();
    let paths = 100_000u64;
    let width = 0.25;
    let bins = 20;
    let mut counts = vec![0u64; bins];
    let mut counts_sq = vec![0u64; bins];
    for r in 0..paths {
        let epochs = sample_renewal_times(&law, bins as f64 * width, &RngStream::new(2024, r)).unwrap();
        let mut local = vec![0u64; bins];
        for t in epochs {
            let b = ((t / width) as usize).min(bins - 1);
            local[b] += 1;
        }
        for b in 0..bins {
            counts[b] += local[b];
            counts_sq[b] += local[b] * local[b];
        }
    }
    let per_bin = (width / sol.step).round() as usize;
    for b in 0..bins {
        let mean = counts[b] as f64 / paths as f64;
        let var = counts_sq[b] as f64 / paths as f64 - mean * mean;
        let se = (var / paths as f64).sqrt();
        // exact integral of the solver's piecewise-linear density over the bin
        let lo = b * per_bin;
        let expected: f64 = (lo..lo + per_bin)
            .map(|i| 0.5 * sol.step * (sol.rho[i] + sol.rho[i + 1]))
            .sum();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "bin {b}: mc {mean} vs solver {expected} (se {se})"
        );
    }
}
