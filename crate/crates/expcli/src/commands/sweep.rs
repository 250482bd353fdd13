use dqfim::rank::saturation_profile;
use rayon::prelude::*;
use serde::Serialize;

use super::train::{build_target, result_to_row, run_cell, train_config_from, CellContext};
use super::{experiment_id, CmdResult, CommandError};
use crate::config::{build_pool, ensure_out_dir, ConfigError, Settings};
use crate::exit_codes;
use crate::rows::{write_csv, ResultRow};

/// Predicted phase boundary, written so external plot tools can draw the
/// dashed lines: overparameterization at M = R_L per L, data completeness
/// at L = L_c.
#[derive(Serialize)]
pub struct BoundaryOverlay {
    pub family: String,
    pub n: usize,
    pub ensemble: String,
    pub master_seed: u64,
    pub boundary: Vec<BoundaryPoint>,
    pub r_inf: usize,
    pub l_c: usize,
    pub l_c_approx: f64,
}

#[derive(Serialize)]
pub struct BoundaryPoint {
    pub l: usize,
    pub r_l: usize,
    /// Critical parameter count M_c(L) = R_L.
    pub m_c: usize,
    /// Smallest sampled M that attained R_L in the scan (depth-grid coarse).
    pub m_c_sampled: usize,
}

pub fn run(settings: &Settings) -> CmdResult {
    let family = super::rank::parse_family(settings)?;
    let n: usize = settings.require("n")?;
    let g_grid = settings
        .parse_list("g_grid")?
        .ok_or_else(|| ConfigError("missing required setting 'g_grid'".into()))?;
    let l_grid = settings
        .parse_list("l_grid")?
        .ok_or_else(|| ConfigError("missing required setting 'l_grid'".into()))?;
    if g_grid.is_empty() || l_grid.is_empty() {
        return Err(ConfigError("g_grid and l_grid must be nonempty".into()).into());
    }
    if g_grid.contains(&0) || l_grid.contains(&0) {
        return Err(ConfigError("grid entries must be at least 1".into()).into());
    }
    let reps: usize = settings.parse_or("reps", 1)?;
    if reps == 0 {
        return Err(ConfigError("reps must be at least 1".into()).into());
    }
    let seed: u64 = settings.parse_or("seed", 0)?;
    let workers: usize = settings.parse_or("workers", 0)?;
    let train_spec = super::rank::parse_ensemble(settings, "ensemble", n)?;
    let test_spec = if settings.get("test_ensemble").is_some() {
        super::rank::parse_ensemble(settings, "test_ensemble", n)?
    } else {
        train_spec
    };
    let target_g: usize = settings.parse_or("target_g", *g_grid.iter().max().unwrap())?;
    let config = train_config_from(settings)?;
    let no_overlay: bool = settings.parse_or("no_overlay", false)?;

    let pool = build_pool(workers);
    let out = ensure_out_dir(settings)?;
    let id = experiment_id("sweep", family.as_str(), n, seed);

    // Predicted boundary from the rank engine, on the sweep's L grid
    // (extended with L = 1, which anchors L_c ≈ 2R_∞/R_1).
    let overlay = if no_overlay {
        None
    } else {
        let mut l_values: Vec<usize> = l_grid.clone();
        l_values.push(1);
        // One L past the grid so the saturation check can certify R_∞ even
        // when the grid itself is sparse.
        l_values.push(l_grid.iter().max().unwrap() + 1);
        l_values.sort_unstable();
        l_values.dedup();
        let mut protocol = super::rank::protocol_from(settings)?;
        if let Some(gm) = settings.parse::<usize>("overlay_g_max")? {
            protocol.g_max = gm;
        }
        let profile = match pool
            .install(|| saturation_profile(family, n, &train_spec, &l_values, &protocol, seed))
        {
            Ok(p) => p,
            Err(e @ (dqfim::Error::NoPlateau { .. } | dqfim::Error::NoPlateauInL { .. })) => {
                eprintln!("boundary overlay failed: {e}");
                return Ok(exit_codes::NO_PLATEAU);
            }
            Err(e) => return Err(CommandError::Core(e)),
        };
        Some(BoundaryOverlay {
            family: family.as_str().into(),
            n,
            ensemble: train_spec.kind.as_str(),
            master_seed: seed,
            boundary: profile
                .records
                .iter()
                .filter(|r| r.l == 1 || l_grid.contains(&r.l))
                .map(|r| BoundaryPoint {
                    l: r.l,
                    r_l: r.r_l,
                    m_c: r.r_l,
                    m_c_sampled: r.m_c,
                })
                .collect(),
            r_inf: profile.r_inf,
            l_c: profile.l_c,
            l_c_approx: profile.l_c_approx,
        })
    };

    let target = build_target(family, n, target_g, seed).map_err(CommandError::Core)?;
    let ctx = CellContext {
        family,
        n,
        master_seed: seed,
        target,
        train_spec,
        test_spec,
        config,
        theta0_from_target: false,
    };

    let cells: Vec<(usize, usize, usize)> = g_grid
        .iter()
        .flat_map(|&g| {
            l_grid
                .iter()
                .flat_map(move |&l| (0..reps).map(move |rep| (g, l, rep)))
        })
        .collect();

    let t0 = std::time::Instant::now();
    let mut rows: Vec<ResultRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(g, l, rep)| match run_cell(&ctx, g, l, rep) {
                Ok((m, result)) => {
                    // Wall time is reported in the log, not per row: the grid
                    // CSV is byte-identical across reruns by contract.
                    result_to_row(&id, family, n, m, g, l, rep, &result, Some(0.0))
                }
                Err(e) => ResultRow {
                    experiment_id: id.clone(),
                    family: family.as_str().into(),
                    n,
                    m: 0,
                    g,
                    l,
                    seed: rep,
                    wall_time_s: Some(0.0),
                    status: format!("failed: {e}"),
                    ..Default::default()
                },
            })
            .collect()
    });
    rows.sort_by_key(|r| (r.m, r.l, r.seed));
    let elapsed = t0.elapsed().as_secs_f64();

    let failed = rows.iter().filter(|r| r.status.starts_with("failed")).count();
    let total = rows.len();
    log::info!("sweep: {total} cells in {elapsed:.1}s ({failed} failed)");

    write_csv(&out.join("sweep_rows.csv"), &rows)?;
    if let Some(overlay) = &overlay {
        let json = serde_json::to_string_pretty(overlay)
            .map_err(|e| ConfigError(format!("overlay json: {e}")))?;
        std::fs::write(out.join("boundary_overlay.json"), json)
            .map_err(|e| ConfigError(format!("cannot write overlay: {e}")))?;
    }
    settings.write_resolved(&out.join("sweep_config.txt"))?;
    println!(
        "sweep {id}: {total} cells, {failed} failed, {:.1}s, outputs in {}",
        elapsed,
        out.display()
    );

    if (failed as f64) / (total as f64) > 0.05 {
        Ok(exit_codes::SWEEP_PARTIAL)
    } else {
        Ok(exit_codes::OK)
    }
}
