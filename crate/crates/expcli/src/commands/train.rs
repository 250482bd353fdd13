use std::io::Write as _;
use std::sync::Arc;

use dqfim::ansatz::{AnsatzCircuit, AnsatzFamily, ParameterVector};
use dqfim::ensembles::{build_training_set, EnsembleSpec};
use dqfim::rng::derive_rng;
use dqfim::train::{train, OptimizerKind, TrainConfig, TrainResult};

use super::{experiment_id, stream, CmdResult, CommandError};
use crate::config::{ensure_out_dir, ConfigError, Settings};
use crate::exit_codes;
use crate::rows::{write_csv, ResultRow, COLUMNS};

pub fn train_config_from(settings: &Settings) -> Result<TrainConfig, ConfigError> {
    let d = TrainConfig::default();
    let optimizer = match settings.get("optimizer") {
        None => d.optimizer,
        Some(raw) => raw
            .parse::<OptimizerKind>()
            .map_err(|e| ConfigError(e.to_string()))?,
    };
    Ok(TrainConfig {
        optimizer,
        learning_rate: settings.parse_or("learning_rate", d.learning_rate)?,
        max_steps: settings.parse_or("max_steps", d.max_steps)?,
        convergence_threshold: settings.parse_or("convergence_threshold", d.convergence_threshold)?,
        stop_threshold: settings.parse::<f64>("stop_threshold")?,
        gradient_threshold: settings.parse_or("gradient_threshold", d.gradient_threshold)?,
        n_test: settings.parse_or("n_test", d.n_test)?,
    })
}

/// Everything needed to run one independent training cell.
pub struct CellContext {
    pub family: AnsatzFamily,
    pub n: usize,
    pub master_seed: u64,
    pub target: Arc<(AnsatzCircuit, ParameterVector)>,
    pub train_spec: EnsembleSpec,
    pub test_spec: EnsembleSpec,
    pub config: TrainConfig,
    pub theta0_from_target: bool,
}

/// One seeded run; streams derive from (master, M, L, rep) so results are
/// independent of scheduling order.
pub fn run_cell(
    ctx: &CellContext,
    g: usize,
    l: usize,
    rep: usize,
) -> dqfim::Result<(usize, TrainResult)> {
    let ansatz = AnsatzCircuit::new(ctx.family, ctx.n, g)?;
    let m = ansatz.total_params();
    let tags = |which: u64| [m as u64, l as u64, rep as u64, which];
    let mut data_rng = derive_rng(ctx.master_seed, &tags(stream::DATA));
    let set = build_training_set(
        &ctx.target.0,
        &ctx.target.1,
        &ctx.train_spec,
        l,
        &mut data_rng,
    )?;
    let theta0 = if ctx.theta0_from_target {
        ctx.target.1.clone()
    } else {
        let mut rng = derive_rng(ctx.master_seed, &tags(stream::THETA0));
        ParameterVector::random_uniform(m, &mut rng)
    };
    let mut test_rng = derive_rng(ctx.master_seed, &tags(stream::TEST));
    let result = train(
        &ansatz,
        &theta0,
        &set,
        &ctx.target.0,
        &ctx.target.1,
        &ctx.test_spec,
        &ctx.config,
        &mut test_rng,
    )?;
    Ok((m, result))
}

/// Builds the fixed target `(circuit, θ_g)` for a run.
pub fn build_target(
    family: AnsatzFamily,
    n: usize,
    target_g: usize,
    master_seed: u64,
) -> dqfim::Result<Arc<(AnsatzCircuit, ParameterVector)>> {
    let circuit = AnsatzCircuit::new(family, n, target_g)?;
    let mut rng = derive_rng(master_seed, &[stream::TARGET]);
    let theta_g = ParameterVector::random_uniform(circuit.total_params(), &mut rng);
    Ok(Arc::new((circuit, theta_g)))
}

pub fn result_to_row(
    id: &str,
    family: AnsatzFamily,
    n: usize,
    m: usize,
    g: usize,
    l: usize,
    rep: usize,
    result: &TrainResult,
    wall_time_s: Option<f64>,
) -> ResultRow {
    ResultRow {
        experiment_id: id.to_string(),
        family: family.as_str().into(),
        n,
        m,
        g,
        l,
        seed: rep,
        c_train: Some(result.c_train_final),
        c_test: Some(result.c_test_final),
        steps_e: Some(result.steps_e),
        converged: Some(result.converged),
        empirical_risk: Some(result.empirical_risk),
        wall_time_s,
        status: result.status.to_string(),
        ..Default::default()
    }
}

pub fn run(settings: &Settings) -> CmdResult {
    let family = super::rank::parse_family(settings)?;
    let n: usize = settings.require("n")?;
    let g: usize = settings.require("g")?;
    let l: usize = settings.require("l")?;
    let reps: usize = settings.parse_or("reps", 1)?;
    if reps == 0 {
        return Err(ConfigError("reps must be at least 1".into()).into());
    }
    let seed: u64 = settings.parse_or("seed", 0)?;
    let train_spec = super::rank::parse_ensemble(settings, "ensemble", n)?;
    let test_spec = if settings.get("test_ensemble").is_some() {
        super::rank::parse_ensemble(settings, "test_ensemble", n)?
    } else {
        train_spec
    };
    let target_g: usize = settings.parse_or("target_g", g)?;
    let theta0_from_target: bool = settings.parse_or("theta0_from_target", false)?;
    if theta0_from_target && target_g != g {
        return Err(ConfigError(
            "theta0_from_target requires target_g == g (parameter counts differ)".into(),
        )
        .into());
    }
    let config = train_config_from(settings)?;
    let target = build_target(family, n, target_g, seed).map_err(CommandError::Core)?;
    let ctx = CellContext {
        family,
        n,
        master_seed: seed,
        target,
        train_spec,
        test_spec,
        config,
        theta0_from_target,
    };

    let id = experiment_id("train", family.as_str(), n, seed);
    let mut rows = Vec::with_capacity(reps);
    for rep in 0..reps {
        let t0 = std::time::Instant::now();
        let (m, result) = run_cell(&ctx, g, l, rep).map_err(CommandError::Core)?;
        let wall = t0.elapsed().as_secs_f64();
        rows.push(result_to_row(
            &id,
            family,
            n,
            m,
            g,
            l,
            rep,
            &result,
            Some(wall),
        ));
    }

    let out = ensure_out_dir(settings)?;
    write_csv(&out.join("train_rows.csv"), &rows)?;
    settings.write_resolved(&out.join("train_config.txt"))?;

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    writeln!(lock, "{}", COLUMNS.join(","))
        .map_err(|e| ConfigError(format!("stdout: {e}")))?;
    for row in &rows {
        writeln!(lock, "{}", row.to_record().join(","))
            .map_err(|e| ConfigError(format!("stdout: {e}")))?;
    }
    Ok(exit_codes::OK)
}
