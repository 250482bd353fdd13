//! The data projector `Π_L` and the data quantum Fisher information metric.
//!
//! `Q_nm = 4·Re[ tr(∂_n U† Π̃ ∂_m U) − tr(∂_n U† Π̃ U)·tr(U† Π̃ ∂_m U) ]`
//! with `Π̃ = Π_L / B_L`, expanded over the projector basis so it costs `B_L`
//! Jacobian bundles and never touches a `2^N × 2^N` matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::ansatz::{circuit_jacobian, AnsatzCircuit, JacobianBundle, ParameterVector};
use crate::sim::{
    psd_rank, raw_inner_product, RankOutcome, StateVector, SymmetricMatrix,
    DEFAULT_RANK_ABS_TOL, DEFAULT_RANK_REL_TOL,
};
use crate::{Error, Result};

/// Default relative eigenvalue cutoff when ranking `ρ_L`.
pub const DEFAULT_PROJECTOR_TOL: f64 = 1e-10;

/// Orthonormal basis of the span of the training inputs.
#[derive(Debug, Clone)]
pub struct DataProjector {
    basis: Vec<StateVector>,
}

impl DataProjector {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    /// Wraps an already orthonormal basis (checked to 1e-10).
    pub fn from_orthonormal(basis: Vec<StateVector>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyInput("projector basis"));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let overlap = raw_inner_product(a.amplitudes(), b.amplitudes());
                let expect = if i == j { 1.0 } else { 0.0 };
                if (overlap - expect).norm() > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "basis not orthonormal at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { basis })
    }
}

/// Diagonalizes `ρ_L = L⁻¹ Σ |ψ_ℓ⟩⟨ψ_ℓ|` through the L×L Gram matrix and
/// keeps eigenvectors with eigenvalue above `tol · λ_max`.
pub fn build_projector(states: &[StateVector], tol: f64) -> Result<DataProjector> {
    if states.is_empty() {
        return Err(Error::EmptyInput("projector from no states"));
    }
    let l = states.len();
    let dim = states[0].dim();
    for s in states {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: s.dim(),
                right: dim,
            });
        }
    }
    let gram = DMatrix::from_fn(l, l, |i, j| {
        raw_inner_product(states[i].amplitudes(), states[j].amplitudes()) / l as f64
    });
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let cut = tol * lambda_max;

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for &k in &order {
        let lambda = eig.eigenvalues[k];
        if lambda <= cut || lambda <= 0.0 {
            break;
        }
        let col = eig.eigenvectors.column(k);
        let scale = 1.0 / (l as f64 * lambda).sqrt();
        let mut phi = vec![Complex64::new(0.0, 0.0); dim];
        for (ell, state) in states.iter().enumerate() {
            let coeff = col[ell] * scale;
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            for (p, a) in phi.iter_mut().zip(state.amplitudes()) {
                *p += coeff * a;
            }
        }
        basis.push(phi);
    }

    // One polishing pass keeps the basis orthonormal to well below 1e-10
    // even with near-degenerate Gram eigenvalues.
    let mut polished: Vec<Vec<Complex64>> = Vec::with_capacity(basis.len());
    for mut v in basis {
        for b in &polished {
            let overlap = raw_inner_product(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= overlap * y;
            }
        }
        let norm = raw_inner_product(&v, &v).re.sqrt();
        if norm > 1e-12 {
            for x in &mut v {
                *x /= norm;
            }
            polished.push(v);
        }
    }

    let n_qubits = states[0].n_qubits();
    let basis = polished
        .into_iter()
        .map(|v| StateVector::from_amplitudes(n_qubits, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(DataProjector { basis })
}

/// The metric matrix with the context it was computed in.
#[derive(Debug, Clone)]
pub struct DqfimMatrix {
    pub matrix: SymmetricMatrix,
    pub ansatz_id: String,
    pub theta_hash: u64,
    pub projector_rank: usize,
}

impl DqfimMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn hash_theta(theta: &ParameterVector) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in theta.values() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Evaluates the metric from precomputed Jacobian bundles, one per projector
/// basis state. Split out so gauge tests can phase the bundles directly.
pub fn dqfim_from_bundles(bundles: &[JacobianBundle]) -> Result<SymmetricMatrix> {
    if bundles.is_empty() {
        return Err(Error::EmptyInput("no jacobian bundles"));
    }
    let b_l = bundles.len() as f64;
    let m = bundles[0].derivatives.len();
    for b in bundles {
        if b.derivatives.len() != m {
            return Err(Error::DimensionMismatch {
                left: b.derivatives.len(),
                right: m,
            });
        }
    }
    // s_n = tr(U† Π̃ ∂_n U) = B⁻¹ Σ_k ⟨Uφ_k|∂_n Uφ_k⟩
    let mut s = vec![Complex64::new(0.0, 0.0); m];
    for bundle in bundles {
        for (n, d) in bundle.derivatives.iter().enumerate() {
            s[n] += raw_inner_product(bundle.output.amplitudes(), d);
        }
    }
    for v in &mut s {
        *v /= b_l;
    }

    let mut q = SymmetricMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            let mut t = Complex64::new(0.0, 0.0);
            for bundle in bundles {
                t += raw_inner_product(&bundle.derivatives[i], &bundle.derivatives[j]);
            }
            let val = 4.0 * (t / b_l - s[i].conj() * s[j]).re;
            q.set(i, j, val);
        }
    }
    Ok(q)
}

/// `Q(S_L, U(θ))` for the given circuit, parameters and data projector.
pub fn compute_dqfim(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    proj: &DataProjector,
) -> Result<DqfimMatrix> {
    if theta.len() != ansatz.total_params() {
        return Err(Error::ParameterLength {
            got: theta.len(),
            expected: ansatz.total_params(),
        });
    }
    let bundles = proj
        .basis()
        .iter()
        .map(|phi| circuit_jacobian(ansatz, theta, phi))
        .collect::<Result<Vec<_>>>()?;
    let matrix = dqfim_from_bundles(&bundles)?;
    Ok(DqfimMatrix {
        matrix,
        ansatz_id: format!(
            "{}-n{}-g{}",
            ansatz.family(),
            ansatz.n_qubits(),
            ansatz.n_layers()
        ),
        theta_hash: hash_theta(theta),
        projector_rank: proj.rank(),
    })
}

/// Rank tolerances for the effective dimension.
#[derive(Debug, Clone, Copy)]
pub struct RankTolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for RankTolerances {
    fn default() -> Self {
        Self {
            rel: DEFAULT_RANK_REL_TOL,
            abs: DEFAULT_RANK_ABS_TOL,
        }
    }
}

/// `D_L = rank(Q)`.
pub fn effective_dimension(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    proj: &DataProjector,
    tol: RankTolerances,
) -> Result<usize> {
    let q = compute_dqfim(ansatz, theta, proj)?;
    psd_rank(&q.matrix, tol.rel, tol.abs)
}

/// Like [`effective_dimension`] but reporting the spectral-gap diagnostic.
pub fn effective_dimension_with_gap(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    proj: &DataProjector,
    tol: RankTolerances,
) -> Result<RankOutcome> {
    let q = compute_dqfim(ansatz, theta, proj)?;
    crate::sim::psd_rank_with_gap(&q.matrix, tol.rel, tol.abs)
}

/// Independent-parameter count of a d-dimensional isometry learned from L
/// states: `2dL − L² − 1` for `L ≤ d`, saturating at `d² − 1`.
pub fn unitary_bound(d: usize, l: usize) -> usize {
    if l >= d {
        d * d - 1
    } else {
        2 * d * l - l * l - 1
    }
}
