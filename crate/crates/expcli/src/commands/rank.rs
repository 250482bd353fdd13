use std::str::FromStr;

use dqfim::ansatz::{generator_set, AnsatzCircuit, AnsatzFamily};
use dqfim::dla::lie_closure;
use dqfim::ensembles::{EnsembleKind, EnsembleSpec};
use dqfim::rank::{saturation_profile, RankProtocol, SaturationProfile};
use serde::Serialize;

use super::{experiment_id, CmdResult, CommandError};
use crate::config::{build_pool, ensure_out_dir, ConfigError, Settings};
use crate::exit_codes;
use crate::rows::{write_csv, ResultRow};

#[derive(Serialize)]
struct RankSummary<'a> {
    experiment_id: String,
    family: String,
    n: usize,
    ensemble: String,
    master_seed: u64,
    l_values: Vec<usize>,
    r_1: usize,
    records: Vec<SummaryRecord>,
    r_inf: usize,
    l_c: usize,
    l_c_approx: f64,
    dla_dim: Option<usize>,
    dla_truncated: Option<bool>,
    protocol: &'a RankProtocol,
}

#[derive(Serialize)]
struct SummaryRecord {
    l: usize,
    r_l: usize,
    m_c: usize,
}

pub(crate) fn protocol_from(settings: &Settings) -> Result<RankProtocol, ConfigError> {
    let d = RankProtocol::default();
    Ok(RankProtocol {
        n_theta: settings.parse_or("n_theta", d.n_theta)?,
        plateau_window: settings.parse_or("plateau_window", d.plateau_window)?,
        n_data: settings.parse_or("n_data", d.n_data)?,
        g_max: settings.parse_or("g_max", d.g_max)?,
        rank_rel_tol: settings.parse_or("rank_rel_tol", d.rank_rel_tol)?,
        rank_abs_tol: settings.parse_or("rank_abs_tol", d.rank_abs_tol)?,
        projector_tol: settings.parse_or("projector_tol", d.projector_tol)?,
        gap_warn: settings.parse_or("gap_warn", d.gap_warn)?,
    })
}

pub(crate) fn parse_family(settings: &Settings) -> Result<AnsatzFamily, ConfigError> {
    let raw: String = settings.require("family")?;
    AnsatzFamily::from_str(&raw).map_err(|e| ConfigError(e.to_string()))
}

pub(crate) fn parse_ensemble(
    settings: &Settings,
    key: &str,
    n: usize,
) -> Result<EnsembleSpec, ConfigError> {
    let raw: String = settings.require(key)?;
    let kind = EnsembleKind::from_str(&raw).map_err(|e| ConfigError(e.to_string()))?;
    EnsembleSpec::new(kind, n).map_err(|e| ConfigError(e.to_string()))
}

pub fn run(settings: &Settings) -> CmdResult {
    let family = parse_family(settings)?;
    let n: usize = settings.require("n")?;
    let spec = parse_ensemble(settings, "ensemble", n)?;
    let seed: u64 = settings.parse_or("seed", 0)?;
    let protocol = protocol_from(settings)?;
    let workers: usize = settings.parse_or("workers", 0)?;
    let l_values: Vec<usize> = match settings.parse_list("l_grid")? {
        Some(grid) if !grid.is_empty() => grid,
        _ => {
            let lmax: usize = settings.require("lmax")?;
            if lmax == 0 {
                return Err(ConfigError("lmax must be at least 1".into()).into());
            }
            (1..=lmax).collect()
        }
    };

    let pool = build_pool(workers);
    let profile: SaturationProfile = match pool
        .install(|| saturation_profile(family, n, &spec, &l_values, &protocol, seed))
    {
        Ok(p) => p,
        Err(e @ (dqfim::Error::NoPlateau { .. } | dqfim::Error::NoPlateauInL { .. })) => {
            eprintln!("{e}");
            return Ok(exit_codes::NO_PLATEAU);
        }
        Err(e) => return Err(CommandError::Core(e)),
    };

    // Companion closure for the Lie-algebra-bound column; skipped when capped out.
    let dla_cap: usize = settings.parse_or(
        "dla_cap",
        if 2 * n < usize::BITS as usize {
            ((1usize << (2 * n)) - 1).min(4096)
        } else {
            4096
        },
    )?;
    let (dla_dim, dla_truncated) = if dla_cap == 0 {
        (None, None)
    } else {
        let circuit = AnsatzCircuit::new(family, n, 1).map_err(CommandError::Core)?;
        let span = lie_closure(&generator_set(&circuit), dla_cap, 1e-10)
            .map_err(CommandError::Core)?;
        if span.truncated() {
            (None, Some(true))
        } else {
            (Some(span.dim()), Some(false))
        }
    };

    let id = experiment_id("rank", family.as_str(), n, seed);
    let by_l: std::collections::BTreeMap<usize, (usize, usize)> = profile
        .records
        .iter()
        .map(|r| (r.l, (r.r_l, r.m_c)))
        .collect();
    let mut rows: Vec<ResultRow> = profile
        .curve
        .iter()
        .map(|c| {
            let (r_l, m_c) = by_l[&c.l];
            ResultRow {
                experiment_id: id.clone(),
                family: family.as_str().into(),
                n,
                m: c.m,
                g: c.g,
                l: c.l,
                seed: c.redraw * protocol.n_theta + c.theta_draw,
                d_l: Some(c.d_l),
                r_l: Some(r_l),
                m_c: Some(m_c),
                r_inf: Some(profile.r_inf),
                l_c: Some(profile.l_c),
                l_c_approx: Some(profile.l_c_approx),
                dla_dim,
                spectral_gap: c.spectral_gap,
                status: "ok".into(),
                ..Default::default()
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.l, r.m, r.seed));

    let summary = RankSummary {
        experiment_id: id,
        family: family.as_str().into(),
        n,
        ensemble: spec.kind.as_str(),
        master_seed: seed,
        l_values,
        r_1: profile.records[0].r_l,
        records: profile
            .records
            .iter()
            .map(|r| SummaryRecord {
                l: r.l,
                r_l: r.r_l,
                m_c: r.m_c,
            })
            .collect(),
        r_inf: profile.r_inf,
        l_c: profile.l_c,
        l_c_approx: profile.l_c_approx,
        dla_dim,
        dla_truncated,
        protocol: &profile.protocol,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| ConfigError(format!("summary json: {e}")))?;

    let out = ensure_out_dir(settings)?;
    write_csv(&out.join("rank_rows.csv"), &rows)?;
    std::fs::write(out.join("rank_summary.json"), &json)
        .map_err(|e| ConfigError(format!("cannot write summary: {e}")))?;
    settings.write_resolved(&out.join("rank_config.txt"))?;
    println!("{json}");
    Ok(exit_codes::OK)
}
