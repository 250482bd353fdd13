//! Saturation protocols: plateau ranks `R_L` over circuit depth, their
//! plateau `R_∞` over training-set size, and the critical sizes `M_c`, `L_c`.

use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::{AnsatzCircuit, AnsatzFamily, ParameterVector};
use crate::ensembles::{sample_state, EnsembleSpec};
use crate::metric::{build_projector, effective_dimension_with_gap, RankTolerances};
use crate::rng::derive_rng;
use crate::sim::StateVector;
use crate::{Error, Result};

const TAG_DATA: u64 = 0xdead_0001;

/// Protocol knobs for the rank scans.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RankProtocol {
    /// Random parameter draws per depth; generic draws reach maximal rank
    /// almost surely, the window below guards against unlucky ones.
    pub n_theta: usize,
    /// Consecutive unchanged depth increments that close the scan.
    pub plateau_window: usize,
    /// Dataset redraws; the maximum rank over redraws is kept.
    pub n_data: usize,
    /// Hard cap on the depth schedule.
    pub g_max: usize,
    /// Eigenvalue cutoffs for the numerical rank.
    pub rank_rel_tol: f64,
    pub rank_abs_tol: f64,
    /// Relative cutoff when ranking the data Gram matrix.
    pub projector_tol: f64,
    /// Spectral gaps below this trigger a warning log.
    pub gap_warn: f64,
}

impl Default for RankProtocol {
    fn default() -> Self {
        Self {
            n_theta: 5,
            plateau_window: 3,
            n_data: 3,
            g_max: 96,
            rank_rel_tol: crate::sim::DEFAULT_RANK_REL_TOL,
            rank_abs_tol: crate::sim::DEFAULT_RANK_ABS_TOL,
            projector_tol: crate::metric::DEFAULT_PROJECTOR_TOL,
            gap_warn: 1e3,
        }
    }
}

impl RankProtocol {
    fn tolerances(&self) -> RankTolerances {
        RankTolerances {
            rel: self.rank_rel_tol,
            abs: self.rank_abs_tol,
        }
    }
}

/// One (depth, draw) rank evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RankSample {
    pub g: usize,
    pub m: usize,
    pub theta_draw: usize,
    pub d_l: usize,
    pub spectral_gap: Option<f64>,
}

/// Result of one depth scan at fixed data.
#[derive(Debug, Clone, Serialize)]
pub struct MaxRankOutcome {
    pub r_l: usize,
    /// Smallest sampled parameter count attaining the plateau value.
    pub m_c: usize,
    pub b_l: usize,
    pub samples: Vec<RankSample>,
}

/// Depths grow by +1 up to 12, then ×1.5 rounded, capped at `g_max`; the
/// rank rises linearly and then plateaus, so coarse late steps are safe.
pub fn depth_schedule(g_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=12.min(g_max)).collect();
    let mut g = 12usize;
    while g < g_max {
        g = ((g as f64) * 1.5).round() as usize;
        out.push(g.min(g_max));
        if *out.last().unwrap() == g_max {
            break;
        }
    }
    out.dedup();
    out
}

/// Scans depth for the circuits delivered by `build`, with the projector
/// fixed, until the maximal rank over `n_theta` draws is unchanged for
/// `plateau_window` consecutive depths.
pub fn max_rank_with_builder(
    build: &dyn Fn(usize) -> Result<AnsatzCircuit>,
    states: &[StateVector],
    protocol: &RankProtocol,
    seed: u64,
) -> Result<MaxRankOutcome> {
    if protocol.n_theta == 0 || protocol.plateau_window == 0 || protocol.n_data == 0 {
        return Err(Error::InvalidArgument(
            "n_theta, plateau_window and n_data must be at least 1".into(),
        ));
    }
    let proj = build_projector(states, protocol.projector_tol)?;
    let b_l = proj.rank();
    let dim = states[0].dim();
    let hard_ceiling = dim * dim - 1;

    let mut samples: Vec<RankSample> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut streak = 0usize;
    let mut first_m_of_value = 0usize;

    for g in depth_schedule(protocol.g_max) {
        let ansatz = build(g)?;
        let m = ansatz.total_params();
        let ceiling = m.min(hard_ceiling);
        let mut depth_rank = 0usize;
        for draw in 0..protocol.n_theta {
            let mut rng = derive_rng(seed, &[0x7e7a, g as u64, draw as u64]);
            let theta = ParameterVector::random_uniform(m, &mut rng);
            let outcome =
                effective_dimension_with_gap(&ansatz, &theta, &proj, protocol.tolerances())?;
            if let Some(gap) = outcome.spectral_gap {
                if gap < protocol.gap_warn {
                    log::warn!(
                        "rank spectral gap {gap:.1e} below {:.0e} at g={g}, draw={draw}",
                        protocol.gap_warn
                    );
                }
            }
            samples.push(RankSample {
                g,
                m,
                theta_draw: draw,
                d_l: outcome.rank,
                spectral_gap: outcome.spectral_gap,
            });
            depth_rank = depth_rank.max(outcome.rank);
            if depth_rank == ceiling {
                break;
            }
        }

        match prev {
            Some(p) if p == depth_rank => streak += 1,
            _ => {
                streak = 0;
                first_m_of_value = m;
            }
        }
        prev = Some(depth_rank);
        if streak >= protocol.plateau_window {
            return Ok(MaxRankOutcome {
                r_l: depth_rank,
                m_c: first_m_of_value,
                b_l,
                samples,
            });
        }
    }

    Err(Error::NoPlateau {
        last_rank: prev.unwrap_or(0),
        partial: samples,
    })
}

/// `R_L` and `M_c` for one family, system size and data draw.
pub fn estimate_max_rank(
    family: AnsatzFamily,
    n_qubits: usize,
    spec: &EnsembleSpec,
    l: usize,
    protocol: &RankProtocol,
    seed: u64,
) -> Result<MaxRankOutcome> {
    if l == 0 {
        return Err(Error::EmptyInput("rank scan with L = 0"));
    }
    let mut rng = derive_rng(seed, &[TAG_DATA]);
    let states: Vec<StateVector> = (0..l)
        .map(|_| sample_state(spec, &mut rng))
        .collect::<Result<_>>()?;
    let build = move |g: usize| AnsatzCircuit::new(family, n_qubits, g);
    max_rank_with_builder(&build, &states, protocol, seed)
}

/// Per-L summary entry of a saturation profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LRecord {
    pub l: usize,
    pub r_l: usize,
    pub m_c: usize,
}

/// One rank-curve row for CSV emission.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RankRow {
    pub l: usize,
    pub redraw: usize,
    pub g: usize,
    pub m: usize,
    pub theta_draw: usize,
    pub d_l: usize,
    pub spectral_gap: Option<f64>,
}

/// The phase-boundary prediction: `R_L` per recorded L, its plateau `R_∞`,
/// the first L attaining it, and the ratio estimate `2·R_∞/R_1`.
#[derive(Debug, Clone, Serialize)]
pub struct SaturationProfile {
    pub records: Vec<LRecord>,
    pub r_inf: usize,
    pub l_c: usize,
    pub l_c_approx: f64,
    pub protocol: RankProtocol,
    pub curve: Vec<RankRow>,
}

/// Runs the depth scan for each `L` in `l_values` (ascending, starting at
/// 1) with nested training samples: within one redraw, the states for L are
/// the states for L−1 plus fresh ones. Ranks are maximized over `n_data`
/// redraws.
pub fn saturation_profile(
    family: AnsatzFamily,
    n_qubits: usize,
    spec: &EnsembleSpec,
    l_values: &[usize],
    protocol: &RankProtocol,
    seed: u64,
) -> Result<SaturationProfile> {
    if l_values.is_empty() {
        return Err(Error::EmptyInput("no L values"));
    }
    if l_values[0] != 1 || l_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "L values must be ascending and start at 1".into(),
        ));
    }
    let l_max = *l_values.last().unwrap();

    // Nested sample lists, one per redraw.
    let mut nested: Vec<Vec<StateVector>> = Vec::with_capacity(protocol.n_data);
    for r in 0..protocol.n_data {
        let mut rng = derive_rng(seed, &[TAG_DATA, r as u64]);
        let states: Vec<StateVector> = (0..l_max)
            .map(|_| sample_state(spec, &mut rng))
            .collect::<Result<_>>()?;
        nested.push(states);
    }

    // (redraw, L) cells are independent; collect deterministically.
    let cells: Vec<(usize, usize)> = (0..protocol.n_data)
        .flat_map(|r| l_values.iter().map(move |&l| (r, l)))
        .collect();
    let outcomes: Vec<((usize, usize), Result<MaxRankOutcome>)> = cells
        .par_iter()
        .map(|&(r, l)| {
            let build = move |g: usize| AnsatzCircuit::new(family, n_qubits, g);
            let out = max_rank_with_builder(
                &build,
                &nested[r][..l],
                protocol,
                crate::rng::derive_seed(seed, &[r as u64, l as u64]),
            );
            ((r, l), out)
        })
        .collect();

    let mut records: Vec<LRecord> = Vec::with_capacity(l_values.len());
    let mut curve: Vec<RankRow> = Vec::new();
    for &l in l_values {
        let mut best: Option<LRecord> = None;
        for ((r, cl), out) in &outcomes {
            if *cl != l {
                continue;
            }
            let out = out.as_ref().map_err(Clone::clone)?;
            for s in &out.samples {
                curve.push(RankRow {
                    l,
                    redraw: *r,
                    g: s.g,
                    m: s.m,
                    theta_draw: s.theta_draw,
                    d_l: s.d_l,
                    spectral_gap: s.spectral_gap,
                });
            }
            let cand = LRecord {
                l,
                r_l: out.r_l,
                m_c: out.m_c,
            };
            best = Some(match best {
                None => cand,
                Some(b) if cand.r_l > b.r_l || (cand.r_l == b.r_l && cand.m_c < b.m_c) => cand,
                Some(b) => b,
            });
        }
        records.push(best.expect("at least one redraw per L"));
    }

    let r_inf = records.iter().map(|r| r.r_l).max().unwrap();
    let last = records.last().unwrap();
    if records.len() >= 2 {
        let prev = &records[records.len() - 2];
        if last.r_l > prev.r_l {
            return Err(Error::NoPlateauInL {
                l_max,
                last_rank: last.r_l,
                partial: records,
            });
        }
    }
    let l_c = records
        .iter()
        .find(|r| r.r_l == r_inf)
        .map(|r| r.l)
        .unwrap();
    let r_1 = records[0].r_l;
    let l_c_approx = if r_1 > 0 {
        2.0 * r_inf as f64 / r_1 as f64
    } else {
        f64::NAN
    };

    Ok(SaturationProfile {
        records,
        r_inf,
        l_c,
        l_c_approx,
        protocol: *protocol,
        curve,
    })
}
