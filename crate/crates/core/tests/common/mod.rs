#![allow(dead_code)] // each test target compiles this module separately

//! Dense-matrix oracles shared by the integration tests. Everything here
//! goes through full `2^N × 2^N` matrices and stays independent of the
//! statevector sweeps it is used to check.

use dqfim::ansatz::{AnsatzCircuit, LayerElement, ParameterVector, RotationAxis};
use dqfim::dla::{PauliLetter, PauliSum, PauliWord};
use dqfim::sim::{GateMatrix, LocalGate};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Embeds a single-qubit matrix at qubit `q` of an `n`-qubit register.
pub fn embed_one(n: usize, m: &[[Complex64; 2]; 2], q: usize) -> CMat {
    let dim = 1usize << n;
    CMat::from_fn(dim, dim, |r, col| {
        if r & !(1 << q) != col & !(1 << q) {
            c(0.0, 0.0)
        } else {
            m[(r >> q) & 1][(col >> q) & 1]
        }
    })
}

/// Embeds a two-qubit matrix (little-endian in `[a, b]`).
pub fn embed_two(n: usize, m: &[[Complex64; 4]; 4], a: usize, b: usize) -> CMat {
    let dim = 1usize << n;
    let free = !(1usize << a) & !(1usize << b);
    CMat::from_fn(dim, dim, |r, col| {
        if r & free != col & free {
            c(0.0, 0.0)
        } else {
            let ri = ((r >> a) & 1) | (((r >> b) & 1) << 1);
            let ci = ((col >> a) & 1) | (((col >> b) & 1) << 1);
            m[ri][ci]
        }
    })
}

pub fn gate_dense(n: usize, gate: &LocalGate) -> CMat {
    match gate.matrix() {
        GateMatrix::One(m) => embed_one(n, m, gate.targets()[0]),
        GateMatrix::Two(m) => embed_two(n, m, gate.targets()[0], gate.targets()[1]),
    }
}

pub fn rotation_dense(n: usize, axis: RotationAxis, theta: f64, q: usize) -> CMat {
    let m = match axis {
        RotationAxis::Y => {
            let (s, co) = theta.sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        RotationAxis::Z => [
            [Complex64::from_polar(1.0, -theta), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::from_polar(1.0, theta)],
        ],
    };
    embed_one(n, &m, q)
}

pub fn pauli_dense_letter(letter: PauliLetter) -> [[Complex64; 2]; 2] {
    match letter {
        PauliLetter::I => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        PauliLetter::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        PauliLetter::Y => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        PauliLetter::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

pub fn word_dense(n: usize, w: &PauliWord) -> CMat {
    let mut out = CMat::identity(1 << n, 1 << n);
    for q in 0..n {
        let letter = w.letter(q);
        if letter != PauliLetter::I {
            out = embed_one(n, &pauli_dense_letter(letter), q) * out;
        }
    }
    out
}

pub fn sum_dense(n: usize, s: &PauliSum) -> CMat {
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for (w, coeff) in s.terms() {
        out += word_dense(n, w) * c(*coeff, 0.0);
    }
    out
}

/// Scaling-and-squaring Taylor exponential; plenty for the small dense
/// oracles used here.
pub fn matrix_exp(m: &CMat) -> CMat {
    let norm = m.iter().map(|x| x.norm()).fold(0.0f64, f64::max) * m.nrows() as f64;
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = m / c(2f64.powi(squarings as i32), 0.0);
    let dim = m.nrows();
    let mut term = CMat::identity(dim, dim);
    let mut acc = CMat::identity(dim, dim);
    for k in 1..=24 {
        term = &term * &scaled / c(k as f64, 0.0);
        acc += &term;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Full circuit unitary as an ordered dense product.
pub fn circuit_unitary(ansatz: &AnsatzCircuit, theta: &ParameterVector) -> CMat {
    let n = ansatz.n_qubits();
    let mut u = CMat::identity(1 << n, 1 << n);
    for el in ansatz.elements() {
        let m = match el {
            LayerElement::Rotation { axis, qubit, param } => {
                rotation_dense(n, *axis, theta.values()[*param], *qubit)
            }
            LayerElement::Fixed(g) => gate_dense(n, g),
        };
        u = m * u;
    }
    u
}

/// `∂_k U(θ)` as a dense product with `-iH_k` inserted at its slot.
pub fn circuit_derivative(ansatz: &AnsatzCircuit, theta: &ParameterVector, param: usize) -> CMat {
    let n = ansatz.n_qubits();
    let dim = 1usize << n;
    let mut u = CMat::identity(dim, dim);
    for el in ansatz.elements() {
        let m = match el {
            LayerElement::Rotation { axis, qubit, param: p } => {
                let rot = rotation_dense(n, *axis, theta.values()[*p], *qubit);
                if *p == param {
                    let letter = match axis {
                        RotationAxis::Y => PauliLetter::Y,
                        RotationAxis::Z => PauliLetter::Z,
                    };
                    let h = embed_one(n, &pauli_dense_letter(letter), *qubit);
                    h * rot * c(0.0, -1.0)
                } else {
                    rot
                }
            }
            LayerElement::Fixed(g) => gate_dense(n, g),
        };
        u = m * u;
    }
    u
}
