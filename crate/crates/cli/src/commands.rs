use std::fs;
use std::io::Write;
use std::path::Path;

use semireg::estimator::{select_model, theta_hat, SelectionResult, WeightLabel};
use semireg::noise::{ObservationPath, ObservationSampler, RngStream};
use semireg::renewal::solve_renewal_density;
use semireg::risk::{empirical_risk, ExperimentConfig, RiskHarness};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::manifest::RunManifest;
use crate::{CliError, Command};

pub fn run(command: &Command, config: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let manifest = match command {
        Command::Simulate { n, replication } => simulate(config, out, n.unwrap_or(default_n(config)), *replication)?,
        Command::Estimate { n, replication, input } => {
            estimate(config, out, n.unwrap_or(default_n(config)), *replication, input.as_deref())?
        }
        Command::RiskTable { record_timing } => risk_table(config, out, threads, *record_timing)?,
        Command::RenewalDensity { step, horizon } => renewal_density(config, out, *step, *horizon)?,
        Command::Figures { replication } => figures(config, out, *replication)?,
    };
    manifest.finish(out)?;
    for name in &manifest.outputs {
        log::info!("wrote {}", out.join(name).display());
    }
    Ok(())
}

fn default_n(config: &ExperimentConfig) -> usize {
    config.n_values[0]
}

fn int(v: impl TryInto<i64>) -> Value {
    Value::Integer(v.try_into().unwrap_or(i64::MAX))
}

fn simulate(config: &ExperimentConfig, out: &Path, n: usize, replication: u64) -> Result<RunManifest, CliError> {
    let p = config.frequency(n);
    config.check_h5(n, p)?;
    let mut options = Table::new();
    options.insert("n".into(), int(n));
    options.insert("replication".into(), int(replication));
    let mut manifest = RunManifest::new("simulate", options, config)?;
    let sampler = ObservationSampler::new(config.signal.clone(), p)?;
    let path = sampler.sample(n, &config.noise, &RngStream::new(config.base_seed, replication))?;
    manifest.write_csv(out, "path.csv", |w| path.write_csv(w))?;
    Ok(manifest)
}

/// Reads the `y_j` column of a path CSV, skipping comments and the header.
fn read_path(file: &Path) -> Result<(Vec<f64>, String), CliError> {
    let text = fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    let sha = hex::encode(Sha256::digest(text.as_bytes()));
    let mut y = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("j,") {
            continue;
        }
        let bad = || CliError::Input(format!("{}:{}: expected `j,t_j,y_j`", file.display(), lineno + 1));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad());
        }
        let j: usize = fields[0].trim().parse().map_err(|_| bad())?;
        if j != y.len() {
            return Err(CliError::Input(format!(
                "{}:{}: index {j} out of sequence",
                file.display(),
                lineno + 1
            )));
        }
        y.push(fields[2].trim().parse().map_err(|_| bad())?);
    }
    Ok((y, sha))
}

fn estimate(
    config: &ExperimentConfig,
    out: &Path,
    n: usize,
    replication: u64,
    input: Option<&Path>,
) -> Result<RunManifest, CliError> {
    let harness = RiskHarness::new(config, n)?;
    let mut options = Table::new();
    options.insert("n".into(), int(n));
    let est = match input {
        Some(file) => {
            let (y, sha) = read_path(file)?;
            options.insert("input_sha256".into(), Value::String(sha));
            theta_hat(&ObservationPath::new(n, harness.p, y)?)?
        }
        None => {
            options.insert("replication".into(), int(replication));
            harness.replicate(replication)?.estimates
        }
    };
    let mut manifest = RunManifest::new("estimate", options, config)?;
    let res = select_model(&est, &harness.family, harness.params.delta)?;
    log::info!("selected candidate {} with sigma_hat = {}", res.index, res.sigma_hat);
    let truth = config.signal.grid_values(harness.p);
    manifest.write_csv(out, "estimate.csv", |w| write_curve(w, &truth, &res.estimate))?;
    manifest.write_csv(out, "selection.csv", |w| write_selection(w, &harness, &res))?;
    Ok(manifest)
}

fn write_curve(w: &mut Vec<u8>, truth: &[f64], estimate: &[f64]) -> std::io::Result<()> {
    let p = truth.len();
    writeln!(w, "t,S,S_hat")?;
    for (i, (s, e)) in truth.iter().zip(estimate).enumerate() {
        writeln!(w, "{},{},{}", (i + 1) as f64 / p as f64, s, e)?;
    }
    Ok(())
}

fn write_selection(w: &mut Vec<u8>, harness: &RiskHarness, res: &SelectionResult) -> std::io::Result<()> {
    writeln!(w, "index,beta,l,J,selected")?;
    for (i, (lambda, j)) in harness.family.weights.iter().zip(&res.costs).enumerate() {
        let (beta, l) = match lambda.alpha {
            WeightLabel::Pinsker { beta, l } => (beta.to_string(), l.to_string()),
            WeightLabel::Custom => (String::new(), String::new()),
        };
        writeln!(w, "{i},{beta},{l},{j},{}", u8::from(i == res.index))?;
    }
    Ok(())
}

fn risk_table(
    config: &ExperimentConfig,
    out: &Path,
    threads: Option<usize>,
    record_timing: bool,
) -> Result<RunManifest, CliError> {
    let mut options = Table::new();
    options.insert("record_timing".into(), Value::Boolean(record_timing));
    let mut manifest = RunManifest::new("risk-table", options, config)?;
    let report = empirical_risk(config, threads)?;
    manifest.write_csv(out, "risk_table.csv", |w| report.write_csv(w, record_timing))?;
    Ok(manifest)
}

fn renewal_density(
    config: &ExperimentConfig,
    out: &Path,
    step: Option<f64>,
    horizon: Option<f64>,
) -> Result<RunManifest, CliError> {
    config.noise.interarrival.validate()?;
    let kernel = config.noise.interarrival.renewal_kernel()?;
    let tau = config.noise.interarrival.mean();
    let step = step.unwrap_or(tau / 100.0);
    let horizon = horizon.unwrap_or(40.0 * tau);
    let mut options = Table::new();
    options.insert("step".into(), Value::Float(step));
    options.insert("horizon".into(), Value::Float(horizon));
    let mut manifest = RunManifest::new("renewal-density", options, config)?;
    let sol = solve_renewal_density(&kernel, step, horizon)?;
    if !sol.tail_converged {
        log::warn!(
            "rho has not settled by x = {horizon}: |rho - 1/tau| = {:e}",
            sol.tail_deviation
        );
    }
    log::info!("|Upsilon|_1 = {}, |rho|_* = {}", sol.upsilon_l1, sol.rho_sup);
    manifest.write_csv(out, "renewal_density.csv", |w| sol.write_csv(w))?;
    Ok(manifest)
}

fn figures(config: &ExperimentConfig, out: &Path, replication: u64) -> Result<RunManifest, CliError> {
    let mut options = Table::new();
    options.insert("replication".into(), int(replication));
    let mut manifest = RunManifest::new("figures", options, config)?;
    for &n in &config.n_values {
        let harness = RiskHarness::new(config, n)?;
        let rep = harness.replicate(replication)?;
        let coeffs = rep.selection.coefficients(&rep.estimates, &harness.family);
        let estimate = harness.transform().synthesize(&coeffs);
        let truth = config.signal.grid_values(harness.p);
        manifest.write_csv(out, &format!("figure_n{n}.csv"), |w| write_curve(w, &truth, &estimate))?;
    }
    Ok(manifest)
}
