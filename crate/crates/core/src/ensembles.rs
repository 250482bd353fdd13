//! Training-state distributions and training sets with targets `V|ψ⟩`,
//! `V = U(θ_g)`.

use num_complex::Complex64;
use rand::Rng;

use crate::ansatz::{apply_circuit, AnsatzCircuit, ParameterVector};
use crate::rng::derive_rng;
use crate::sim::{sample_haar_vector, StateVector};
use crate::{Error, Result};

/// The state distributions W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    /// Haar-uniform on the full `2^N`-dimensional sphere.
    Haar,
    /// Tensor product of independent Haar single-qubit states.
    Product,
    /// Haar-uniform on the Hamming-weight-`p` subspace.
    SymmetricSector(usize),
    /// Uniformly random computational basis state.
    ComputationalBasis,
}

impl EnsembleKind {
    pub fn as_str(&self) -> String {
        match self {
            EnsembleKind::Haar => "haar".into(),
            EnsembleKind::Product => "product".into(),
            EnsembleKind::SymmetricSector(p) => format!("sector:{p}"),
            EnsembleKind::ComputationalBasis => "comp".into(),
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "haar" => Ok(EnsembleKind::Haar),
            "product" | "prod" => Ok(EnsembleKind::Product),
            "comp" | "computational" | "basis" => Ok(EnsembleKind::ComputationalBasis),
            other => {
                if let Some(p) = other.strip_prefix("sector:") {
                    let p: usize = p.parse().map_err(|_| {
                        Error::InvalidArgument(format!("bad sector index in '{s}'"))
                    })?;
                    Ok(EnsembleKind::SymmetricSector(p))
                } else {
                    Err(Error::InvalidArgument(format!("unknown ensemble '{s}'")))
                }
            }
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.as_str())
    }
}

/// A distribution bound to a system size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n_qubits: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n_qubits: usize) -> Result<Self> {
        if let EnsembleKind::SymmetricSector(p) = kind {
            if p > n_qubits {
                return Err(Error::InvalidSector { p, n_qubits });
            }
        }
        Ok(Self { kind, n_qubits })
    }
}

/// Draws one state from the distribution.
pub fn sample_state<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<StateVector> {
    let n = spec.n_qubits;
    let dim = 1usize << n;
    match spec.kind {
        EnsembleKind::Haar => {
            StateVector::from_amplitudes(n, sample_haar_vector(dim, rng)?)
        }
        EnsembleKind::Product => {
            let mut amps = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..n {
                let q = sample_haar_vector(2, rng)?;
                let mut next = Vec::with_capacity(amps.len() * 2);
                // Little-endian: the new qubit becomes the highest bit so far.
                for &b in &q {
                    for &a in &amps {
                        next.push(a * b);
                    }
                }
                amps = next;
            }
            StateVector::from_amplitudes(n, amps)
        }
        EnsembleKind::SymmetricSector(p) => {
            if p > n {
                return Err(Error::InvalidSector { p, n_qubits: n });
            }
            let support: Vec<usize> =
                (0..dim).filter(|i| i.count_ones() as usize == p).collect();
            let coeffs = sample_haar_vector(support.len(), rng)?;
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            for (idx, c) in support.into_iter().zip(coeffs) {
                amps[idx] = c;
            }
            StateVector::from_amplitudes(n, amps)
        }
        EnsembleKind::ComputationalBasis => {
            StateVector::basis_state(n, rng.gen_range(0..dim))
        }
    }
}

/// Where a training set came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub ensemble: EnsembleSpec,
    pub l: usize,
    pub seed: Option<u64>,
}

/// `S_L = {|ψ_ℓ⟩, V|ψ_ℓ⟩}` with `V = U(θ_g)` applied by the target circuit.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub inputs: Vec<StateVector>,
    pub targets: Vec<StateVector>,
    pub provenance: Provenance,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Draws `l` i.i.d. inputs and maps them through the target circuit.
pub fn build_training_set<R: Rng + ?Sized>(
    target: &AnsatzCircuit,
    theta_g: &ParameterVector,
    spec: &EnsembleSpec,
    l: usize,
    rng: &mut R,
) -> Result<TrainingSet> {
    if l == 0 {
        return Err(Error::EmptyInput("training set of size 0"));
    }
    let mut inputs = Vec::with_capacity(l);
    let mut targets = Vec::with_capacity(l);
    for _ in 0..l {
        let input = sample_state(spec, rng)?;
        targets.push(apply_circuit(target, theta_g, &input)?);
        inputs.push(input);
    }
    Ok(TrainingSet {
        inputs,
        targets,
        provenance: Provenance {
            ensemble: *spec,
            l,
            seed: None,
        },
    })
}

/// Seeded variant recording the seed in the provenance.
pub fn build_training_set_seeded(
    target: &AnsatzCircuit,
    theta_g: &ParameterVector,
    spec: &EnsembleSpec,
    l: usize,
    seed: u64,
) -> Result<TrainingSet> {
    let mut rng = derive_rng(seed, &[]);
    let mut set = build_training_set(target, theta_g, spec, l, &mut rng)?;
    set.provenance.seed = Some(seed);
    Ok(set)
}

/// `⟨P⟩ = Σ_i |amp_i|² · weight(i)` for `P = Σ_k (1+σ^z_k)/2`.
pub fn particle_number_expectation(state: &StateVector) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * i.count_ones() as f64)
        .sum()
}
