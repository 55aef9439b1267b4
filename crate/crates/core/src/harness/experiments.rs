use std::time::Instant;

use super::config::{db_to_linear, Ensemble, Experiment, ExperimentConfig, Resolved};
use super::table::{Metadata, ResultTable};
use super::HarnessError;
use crate::asymptotics::{deviation_iid, deviation_product_iid, LossQuery, Side};
use crate::infotheory::{multiplexing_rate_finite, mutual_info_finite, MutualInformation};
use crate::montecarlo::{
    apply_projector, ergodic_deviation, ergodic_loss, ergodic_vector, paired_loss, EnsembleSpec, ErgodicEstimate,
    ProjectorSpec,
};
use crate::spectra::{harmonic_mean_measure, SpectralMeasure};
use crate::Error;

fn numeric<T>(context: impl Fn() -> String, r: crate::Result<T>) -> Result<T, HarnessError> {
    r.map_err(|source| HarnessError::Numeric {
        context: context(),
        source,
    })
}

/// Runs one experiment and returns its table. `verify` is handled by
/// [`super::acceptance::run_all`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable, HarnessError> {
    let started = Instant::now();
    let r = config.resolve()?;
    let mut echo = config.clone();
    echo.parameters = r.to_parameters();
    let metadata = Metadata {
        config: echo,
        master_seed: r.master_seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: 0.0,
    };
    let e = config.experiment;
    let mut table = ResultTable::new(e.columns(), metadata);
    match e {
        Experiment::LossCurve => loss_curve(&r, &mut table)?,
        Experiment::LossConvergence => loss_convergence(&r, &mut table)?,
        Experiment::DeviationSweep => deviation_sweep(&r, &mut table)?,
        Experiment::ProductAdditivity => product_additivity(&r, &mut table)?,
        Experiment::Monotonicity => monotonicity(&r, &mut table)?,
        Experiment::Transforms => transforms(&r, &mut table)?,
        Experiment::Verify => {
            return Err(HarnessError::Config(vec![
                "experiment: verify produces an acceptance report, not a table".into(),
            ]))
        }
    }
    table.metadata.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(table)
}

fn asymptotic_loss(side: Side, phi: f64, beta: f64) -> crate::Result<f64> {
    match side {
        Side::Receive => LossQuery::receive(phi, beta)?.loss(),
        Side::Transmit => LossQuery::transmit(phi, beta)?.loss(),
    }
}

fn loss_curve(r: &Resolved, table: &mut ResultTable) -> Result<(), HarnessError> {
    let (n, beta) = (r.n[0], r.beta[0]);
    let cols = r.cols_for(n);
    let ctx = || format!("loss-curve n={n}");
    let spec = numeric(ctx, r.ensemble_spec(Experiment::LossCurve, n, cols, r.m[0]))?;
    let proj = numeric(ctx, ProjectorSpec::new(r.side, beta))?;
    let gammas: Vec<f64> = r.gamma_db.iter().map(|&g| db_to_linear(g)).collect();
    let est = numeric(
        ctx,
        ergodic_vector(&spec, 5 * gammas.len(), r.trials, r.master_seed, |h| {
            let hp = apply_projector(h, &proj)?;
            let mut v = Vec::with_capacity(5 * gammas.len());
            for &g in &gammas {
                v.push(mutual_info_finite(h, g)?);
                v.push(multiplexing_rate_finite(h, g)?);
                v.push(mutual_info_finite(&hp, g)?);
                v.push(multiplexing_rate_finite(&hp, g)?);
                v.push(paired_loss(h, &proj, g)?);
            }
            Ok(v)
        }),
    )?;
    let t = cols as f64;
    for (k, &db) in r.gamma_db.iter().enumerate() {
        let s = &est[5 * k..5 * k + 5];
        table.push(vec![
            db,
            s[0].mean,
            s[1].mean,
            s[2].mean,
            s[3].mean,
            t * s[4].mean,
            t * s[4].stderr,
        ]);
    }
    Ok(())
}

fn loss_convergence(r: &Resolved, table: &mut ResultTable) -> Result<(), HarnessError> {
    for &n in &r.n {
        let cols = r.cols_for(n);
        let phi = cols as f64 / n as f64;
        for &beta in &r.beta {
            for &db in &r.gamma_db {
                let ctx = || format!("loss-convergence n={n} beta={beta} gamma_db={db}");
                let spec = numeric(ctx, r.ensemble_spec(Experiment::LossConvergence, n, cols, r.m[0]))?;
                let proj = numeric(ctx, ProjectorSpec::new(r.side, beta))?;
                let est = numeric(ctx, ergodic_loss(&spec, &proj, db_to_linear(db), r.trials, r.master_seed))?;
                let asym = numeric(ctx, asymptotic_loss(r.side, phi, beta))?;
                table.push(vec![
                    n as f64,
                    phi,
                    beta,
                    db,
                    est.mean,
                    est.stderr,
                    asym,
                    (est.mean - asym).abs(),
                ]);
            }
        }
    }
    Ok(())
}

fn asymptotic_deviation(ensemble: Ensemble, m: usize, beta: f64) -> crate::Result<f64> {
    match ensemble {
        Ensemble::HaarUnitary => Ok(0.0),
        Ensemble::ProductIid => deviation_product_iid(m, beta),
        _ => deviation_iid(beta),
    }
}

fn deviation_sweep(r: &Resolved, table: &mut ResultTable) -> Result<(), HarnessError> {
    let m = r.m[0];
    for &beta in &r.beta {
        for &n in &r.n {
            for &db in &r.gamma_db {
                let ctx = || format!("deviation-sweep beta={beta} n={n} gamma_db={db}");
                let spec = numeric(ctx, r.ensemble_spec(Experiment::DeviationSweep, n, n, m))?;
                let est = numeric(ctx, ergodic_deviation(&spec, beta, db_to_linear(db), r.trials, r.master_seed))?;
                let asym = numeric(ctx, asymptotic_deviation(r.ensemble, m, beta))?;
                table.push(vec![beta, n as f64, db, est.mean, est.stderr, asym, (est.mean - asym).abs()]);
            }
        }
    }
    Ok(())
}

/// Master seed of the `k`-th independent single-factor estimate.
pub fn factor_seed(master_seed: u64, k: usize) -> u64 {
    master_seed.wrapping_add(k as u64 + 1)
}

fn product_additivity(r: &Resolved, table: &mut ResultTable) -> Result<(), HarnessError> {
    let gamma = db_to_linear(r.gamma_db[0]);
    for &m in &r.m {
        for &n in &r.n {
            for &beta in &r.beta {
                let ctx = || format!("product-additivity m={m} n={n} beta={beta}");
                let spec = numeric(ctx, r.ensemble_spec(Experiment::ProductAdditivity, n, n, m))?;
                let product = numeric(ctx, ergodic_deviation(&spec, beta, gamma, r.trials, r.master_seed))?;
                let factor = numeric(ctx, EnsembleSpec::new(crate::montecarlo::EnsembleKind::IidComplexGaussian, n, n, spec.variance))?;
                let mut sum = 0.0;
                let mut var = 0.0;
                for k in 0..m {
                    let est = numeric(
                        ctx,
                        ergodic_deviation(&factor, beta, gamma, r.trials, factor_seed(r.master_seed, k)),
                    )?;
                    sum += est.mean;
                    var += est.stderr * est.stderr;
                }
                let closed = numeric(ctx, deviation_product_iid(m, beta))?;
                table.push(vec![
                    m as f64,
                    n as f64,
                    beta,
                    product.mean,
                    product.stderr,
                    sum,
                    var.sqrt(),
                    closed,
                    (product.mean - closed).abs(),
                    (product.mean - sum).abs(),
                ]);
            }
        }
    }
    Ok(())
}

/// Paired losses of one ensemble over an SNR grid, all from the same draws.
pub fn loss_over_grid(
    spec: &EnsembleSpec,
    proj: &ProjectorSpec,
    gammas: &[f64],
    trials: usize,
    master_seed: u64,
) -> crate::Result<Vec<ErgodicEstimate>> {
    ergodic_vector(spec, gammas.len(), trials, master_seed, |h| {
        gammas.iter().map(|&g| paired_loss(h, proj, g)).collect()
    })
}

/// Row flags: `mean[k] >= mean[k-1] - 3 max(stderr[k], stderr[k-1])`.
pub fn nondecreasing_flags(est: &[ErgodicEstimate]) -> Vec<bool> {
    (0..est.len())
        .map(|k| k == 0 || est[k].mean >= est[k - 1].mean - 3.0 * est[k].stderr.max(est[k - 1].stderr))
        .collect()
}

fn monotonicity(r: &Resolved, table: &mut ResultTable) -> Result<(), HarnessError> {
    let (n, beta) = (r.n[0], r.beta[0]);
    let cols = r.cols_for(n);
    let ctx = || format!("monotonicity n={n} beta={beta}");
    let spec = numeric(ctx, r.ensemble_spec(Experiment::Monotonicity, n, cols, r.m[0]))?;
    let proj = numeric(ctx, ProjectorSpec::new(r.side, beta))?;
    let gammas: Vec<f64> = r.gamma_db.iter().map(|&g| db_to_linear(g)).collect();
    let est = numeric(ctx, loss_over_grid(&spec, &proj, &gammas, r.trials, r.master_seed))?;
    let asym = numeric(ctx, asymptotic_loss(r.side, cols as f64 / n as f64, beta))?;
    for ((&db, e), ok) in r.gamma_db.iter().zip(&est).zip(nondecreasing_flags(&est)) {
        table.push(vec![db, e.mean, e.stderr, asym, if ok { 1.0 } else { 0.0 }]);
    }
    Ok(())
}

fn transforms(r: &Resolved, table: &mut ResultTable) -> Result<(), HarnessError> {
    let f = &r.family;
    for &t in &r.t {
        let ctx = || format!("transforms t={t}");
        let row = (|| -> crate::Result<Vec<f64>> {
            let gamma = -f.psi_inverse(-t)?;
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::Bracketing(format!("gamma = {gamma}")));
            }
            Ok(vec![
                t,
                gamma,
                f.psi(-gamma)?,
                f.eta(gamma)?,
                f.s_transform(-t)?,
                harmonic_mean_measure(f, t)?,
                f.mutual_info(gamma)?,
            ])
        })();
        table.push(numeric(ctx, row)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Parameters;

    fn config(e: Experiment, p: Parameters) -> ExperimentConfig {
        ExperimentConfig {
            parameters: p,
            ..ExperimentConfig::new(e)
        }
    }

    #[test]
    fn zero_ensemble_curve_is_zero() {
        let t = run_experiment(&config(
            Experiment::LossCurve,
            Parameters {
                variance: Some(0.0),
                trials: Some(10),
                gamma_db: Some(vec![0.0, 20.0]),
                ..Default::default()
            },
        ))
        .unwrap();
        assert_eq!(t.rows.len(), 2);
        for row in &t.rows {
            assert!(row[1..].iter().all(|&x| x == 0.0), "{row:?}");
        }
    }

    #[test]
    fn transforms_table() {
        let t = run_experiment(&ExperimentConfig::new(Experiment::Transforms)).unwrap();
        assert_eq!(t.rows.len(), 9);
        for row in &t.rows {
            // psi(-gamma) = -t, eta = 1 - t, harmonic mean = 1 - t for the square iid law
            assert!((row[2] + row[0]).abs() < 1e-10);
            assert!((row[3] - 1.0 + row[0]).abs() < 1e-10);
            assert!((row[5] - 1.0 + row[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn small_monotonicity_run() {
        let t = run_experiment(&config(
            Experiment::Monotonicity,
            Parameters {
                trials: Some(200),
                ..Default::default()
            },
        ))
        .unwrap();
        assert!(t.column("nondecreasing").unwrap().iter().all(|&f| f == 1.0));
        assert_eq!(t.column("asymptotic_bits").unwrap()[0], 2.0);
    }

    #[test]
    fn discrepancy_is_recomputable() {
        let t = run_experiment(&config(
            Experiment::LossConvergence,
            Parameters {
                n: Some(vec![8, 16]),
                trials: Some(20),
                ..Default::default()
            },
        ))
        .unwrap();
        for row in &t.rows {
            assert_eq!(row[7], (row[4] - row[6]).abs());
        }
    }
}
