//! Exact complex statevector mathematics.
//!
//! Conventions used throughout the crate:
//!
//! * Amplitude ordering is little-endian: qubit `k` is bit `k` of the basis
//!   index, so `|q_{N-1} … q_1 q_0⟩` has index `Σ_k q_k 2^k`.
//! * Gate matrices on `targets = [a, b]` are indexed little-endian within the
//!   target list: column `j` addresses the target configuration with
//!   `bit(a) = j & 1`, `bit(b) = (j >> 1) & 1`.
//! * Rotations follow `exp(-iθH)` with `H` a bare Pauli (eigenvalues ±1), so
//!   the parameter period is 2π and no 1/2 factor appears anywhere.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Tolerance on `U†U = I` when admitting a gate matrix.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Default relative eigenvalue cutoff for numerical PSD ranks. Structural and
/// noise eigenvalues of exactly-simulated metrics are separated by many
/// orders of magnitude; 1e-8 sits safely inside that gap at desk scale.
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-8;

/// Default absolute eigenvalue cutoff for numerical PSD ranks.
pub const DEFAULT_RANK_ABS_TOL: f64 = 1e-12;

const NORM_TOL: f64 = 1e-9;

/// Normalized complex amplitude vector of dimension `2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis_state(n_qubits, 0).expect("index 0 always valid")
    }

    /// The computational basis state with the given little-endian index.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that are already normalized (within 1e-9).
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: 1 << n_qubits,
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes and wraps an arbitrary nonzero amplitude vector.
    pub fn from_unnormalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: 1 << n_qubits,
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm_sq == 0.0 {
            return Err(Error::NotNormalized { norm_sq });
        }
        let inv = 1.0 / norm_sq.sqrt();
        for a in &mut amps {
            *a *= inv;
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Consumes the state, handing out the raw amplitudes.
    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }
}

/// `⟨a|b⟩` with conjugation on `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(raw_inner_product(&a.amps, &b.amps))
}

/// `Σ conj(a_i)·b_i` on raw slices; callers guarantee equal lengths.
pub fn raw_inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

/// A 1- or 2-qubit unitary acting on named target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGate {
    targets: Vec<usize>,
    matrix: GateMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    One([[Complex64; 2]; 2]),
    Two([[Complex64; 4]; 4]),
}

impl LocalGate {
    /// Admits a single-qubit gate after checking unitarity.
    pub fn one_qubit(matrix: [[Complex64; 2]; 2], target: usize) -> Result<Self> {
        check_unitary_2(&matrix)?;
        Ok(Self {
            targets: vec![target],
            matrix: GateMatrix::One(matrix),
        })
    }

    /// Admits a two-qubit gate after checking unitarity. The matrix is
    /// little-endian in `[a, b]`: index bit 0 is qubit `a`, bit 1 is qubit `b`.
    pub fn two_qubit(matrix: [[Complex64; 4]; 4], a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::DuplicateTargets);
        }
        check_unitary_4(&matrix)?;
        Ok(Self {
            targets: vec![a, b],
            matrix: GateMatrix::Two(matrix),
        })
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &GateMatrix {
        &self.matrix
    }

    /// The inverse gate (conjugate transpose on the same targets).
    pub fn dagger(&self) -> Self {
        let matrix = match &self.matrix {
            GateMatrix::One(m) => {
                let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        out[i][j] = m[j][i].conj();
                    }
                }
                GateMatrix::One(out)
            }
            GateMatrix::Two(m) => {
                let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        out[i][j] = m[j][i].conj();
                    }
                }
                GateMatrix::Two(out)
            }
        };
        Self {
            targets: self.targets.clone(),
            matrix,
        }
    }

    /// `exp(-iθ σ_y) = [[cos θ, −sin θ], [sin θ, cos θ]]`.
    pub fn ry(theta: f64, target: usize) -> Self {
        let (s, c) = theta.sin_cos();
        let m = [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ];
        Self {
            targets: vec![target],
            matrix: GateMatrix::One(m),
        }
    }

    /// `exp(-iθ σ_z) = diag(e^{-iθ}, e^{iθ})`.
    pub fn rz(theta: f64, target: usize) -> Self {
        let m = [
            [Complex64::from_polar(1.0, -theta), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, theta)],
        ];
        Self {
            targets: vec![target],
            matrix: GateMatrix::One(m),
        }
    }

    /// CNOT with `control`, `target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        // Columns are inputs, little-endian in [control, target]: input
        // j = ctrl + 2·tgt flips tgt when ctrl = 1, so col 1 ↔ row 3.
        let m = [
            [o, z, z, z],
            [z, z, z, o],
            [z, z, o, z],
            [z, o, z, z],
        ];
        Self {
            targets: vec![control, target],
            matrix: GateMatrix::Two(m),
        }
    }

    /// CZ = diag(1, 1, 1, −1); symmetric in its targets.
    pub fn cz(a: usize, b: usize) -> Self {
        Self::diag_two([1.0.into(), 1.0.into(), 1.0.into(), (-1.0).into()], a, b)
    }

    /// √CZ = diag(1, 1, 1, i).
    pub fn sqrt_cz(a: usize, b: usize) -> Self {
        Self::diag_two(
            [1.0.into(), 1.0.into(), 1.0.into(), Complex64::new(0.0, 1.0)],
            a,
            b,
        )
    }

    /// √iSWAP = exp(iπ/8 (XX + YY)); acts as [[1/√2, i/√2], [i/√2, 1/√2]] on
    /// the span of |01⟩, |10⟩.
    pub fn sqrt_iswap(a: usize, b: usize) -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let is = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let m = [
            [o, z, z, z],
            [z, c, is, z],
            [z, is, c, z],
            [z, z, z, o],
        ];
        Self {
            targets: vec![a, b],
            matrix: GateMatrix::Two(m),
        }
    }

    /// √iSWAPz = √CZ · √iSWAP applied as one fixed gate.
    pub fn sqrt_iswap_z(a: usize, b: usize) -> Self {
        let s = Self::sqrt_iswap(a, b);
        let GateMatrix::Two(m) = s.matrix else {
            unreachable!()
        };
        let mut out = m;
        // Left-multiplying by diag(1,1,1,i) scales the |11⟩ row.
        for j in 0..4 {
            out[3][j] *= Complex64::new(0.0, 1.0);
        }
        Self {
            targets: vec![a, b],
            matrix: GateMatrix::Two(out),
        }
    }

    fn diag_two(d: [Complex64; 4], a: usize, b: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let mut m = [[z; 4]; 4];
        for (k, v) in d.into_iter().enumerate() {
            m[k][k] = v;
        }
        Self {
            targets: vec![a, b],
            matrix: GateMatrix::Two(m),
        }
    }
}

fn check_unitary_2(m: &[[Complex64; 2]; 2]) -> Result<()> {
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += m[k][i].conj() * m[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((acc - expect).norm());
        }
    }
    if !dev.is_finite() {
        return Err(Error::NonFinite);
    }
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

fn check_unitary_4(m: &[[Complex64; 4]; 4]) -> Result<()> {
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                acc += m[k][i].conj() * m[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((acc - expect).norm());
        }
    }
    if !dev.is_finite() {
        return Err(Error::NonFinite);
    }
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

/// Applies `gate` to `state`, returning the new state.
pub fn apply_local_gate(state: &StateVector, gate: &LocalGate) -> Result<StateVector> {
    let mut out = state.clone();
    apply_gate_in_place(out.amps_mut(), state.n_qubits, gate)?;
    Ok(out)
}

/// In-place gate application on raw amplitudes; the workhorse of every sweep.
pub fn apply_gate_in_place(
    amps: &mut [Complex64],
    n_qubits: usize,
    gate: &LocalGate,
) -> Result<()> {
    for &t in gate.targets() {
        if t >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: t,
                n_qubits,
            });
        }
    }
    match gate.matrix() {
        GateMatrix::One(m) => {
            apply_one_qubit(amps, gate.targets()[0], m);
            Ok(())
        }
        GateMatrix::Two(m) => {
            let (a, b) = (gate.targets()[0], gate.targets()[1]);
            if a == b {
                return Err(Error::DuplicateTargets);
            }
            apply_two_qubit(amps, a, b, m);
            Ok(())
        }
    }
}

#[inline]
pub(crate) fn apply_one_qubit(amps: &mut [Complex64], target: usize, m: &[[Complex64; 2]; 2]) {
    let step = 1usize << target;
    let mut base = 0;
    while base < amps.len() {
        for offset in base..base + step {
            let j = offset;
            let k = offset + step;
            let a = amps[j];
            let b = amps[k];
            amps[j] = m[0][0] * a + m[0][1] * b;
            amps[k] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * step;
    }
}

#[inline]
pub(crate) fn apply_two_qubit(
    amps: &mut [Complex64],
    a: usize,
    b: usize,
    m: &[[Complex64; 4]; 4],
) {
    let ma = 1usize << a;
    let mb = 1usize << b;
    for i in 0..amps.len() {
        if i & ma == 0 && i & mb == 0 {
            let i00 = i;
            let i01 = i | ma;
            let i10 = i | mb;
            let i11 = i | ma | mb;
            let v = [amps[i00], amps[i01], amps[i10], amps[i11]];
            for (row, idx) in [i00, i01, i10, i11].into_iter().enumerate() {
                amps[idx] =
                    m[row][0] * v[0] + m[row][1] * v[1] + m[row][2] * v[2] + m[row][3] * v[3];
            }
        }
    }
}

/// Real symmetric matrix stored as a packed upper triangle, so
/// `entry(i,j) == entry(j,i)` holds exactly by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    /// Builds from an entry function evaluated on the upper triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                out.set(i, j, v);
            }
        }
        out
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        r * self.dim - r * (r + 1) / 2 + c
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let o = self.offset(i, j);
        self.data[o] = value;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.dim == 0 {
            return Ok(Vec::new());
        }
        let eig = SymmetricEigen::new(self.to_dmatrix());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Ok(vals)
    }
}

/// Numerical rank outcome together with the kept/discarded spectral gap.
#[derive(Debug, Clone, Copy)]
pub struct RankOutcome {
    pub rank: usize,
    /// Ratio smallest-kept / largest-discarded; `None` when one side is empty
    /// or the discarded side is non-positive.
    pub spectral_gap: Option<f64>,
}

/// Counts eigenvalues `λ > max(rel_tol·λ_max, abs_tol)`.
pub fn psd_rank(m: &SymmetricMatrix, rel_tol: f64, abs_tol: f64) -> Result<usize> {
    Ok(psd_rank_with_gap(m, rel_tol, abs_tol)?.rank)
}

/// Like [`psd_rank`] but also reports the spectral-gap diagnostic.
pub fn psd_rank_with_gap(m: &SymmetricMatrix, rel_tol: f64, abs_tol: f64) -> Result<RankOutcome> {
    if rel_tol <= 0.0 || abs_tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "rank tolerances must be positive".into(),
        ));
    }
    let vals = m.eigenvalues()?;
    let lambda_max = vals.first().copied().unwrap_or(0.0).max(0.0);
    let cut = (rel_tol * lambda_max).max(abs_tol);
    let rank = vals.iter().take_while(|&&v| v > cut).count();
    let gap = if rank > 0 && rank < vals.len() {
        let smallest_kept = vals[rank - 1];
        let largest_discarded = vals[rank];
        if largest_discarded > 0.0 {
            Some(smallest_kept / largest_discarded)
        } else {
            None
        }
    } else {
        None
    };
    Ok(RankOutcome {
        rank,
        spectral_gap: gap,
    })
}

/// Unit-norm vector distributed Haar-uniformly on the complex sphere:
/// two independent standard normals per component, then normalized.
pub fn sample_haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    if dim == 0 {
        return Err(Error::EmptyInput("haar sample of dimension 0"));
    }
    loop {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm_sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 0.0 {
            let inv = 1.0 / norm_sq.sqrt();
            for a in &mut v {
                *a *= inv;
            }
            return Ok(v);
        }
    }
}
