use std::fmt;

use crate::{Error, Result};

/// One of I, X, Y, Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn bits(self) -> (u64, u64) {
        match self {
            PauliLetter::I => (0, 0),
            PauliLetter::X => (1, 0),
            PauliLetter::Y => (1, 1),
            PauliLetter::Z => (0, 1),
        }
    }

    fn from_bits(x: u64, z: u64) -> Self {
        match (x, z) {
            (0, 0) => PauliLetter::I,
            (1, 0) => PauliLetter::X,
            (1, 1) => PauliLetter::Y,
            (0, 1) => PauliLetter::Z,
            _ => unreachable!(),
        }
    }
}

/// A length-N word over {I, X, Y, Z} in the symplectic (x, z) encoding:
/// bit k of `x`/`z` selects the letter on qubit k (X = 10, Z = 01, Y = 11).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliWord {
    pub x: u64,
    pub z: u64,
}

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord { x: 0, z: 0 };

    pub fn single(letter: PauliLetter, qubit: usize) -> Self {
        let (x, z) = letter.bits();
        PauliWord {
            x: x << qubit,
            z: z << qubit,
        }
    }

    /// Builds a word from letters listed qubit 0 first: `"XZ"` is X on
    /// qubit 0, Z on qubit 1.
    pub fn from_letters(letters: &str) -> Result<Self> {
        let mut w = PauliWord::IDENTITY;
        for (k, ch) in letters.chars().enumerate() {
            if k >= 64 {
                return Err(Error::InvalidArgument("word longer than 64 qubits".into()));
            }
            let letter = match ch {
                'I' | 'i' => PauliLetter::I,
                'X' | 'x' => PauliLetter::X,
                'Y' | 'y' => PauliLetter::Y,
                'Z' | 'z' => PauliLetter::Z,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown Pauli letter '{other}'"
                    )))
                }
            };
            let (x, z) = letter.bits();
            w.x |= x << k;
            w.z |= z << k;
        }
        Ok(w)
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        PauliLetter::from_bits((self.x >> qubit) & 1, (self.z >> qubit) & 1)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the two words commute as operators.
    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        let cross = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        cross % 2 == 0
    }

    /// Operator product `self · other = i^k · word`; returns `(word, k mod 4)`.
    ///
    /// Uses the canonical form `P(x, z) = i^{|x∧z|} X^x Z^z`.
    pub fn product(&self, other: &PauliWord) -> (PauliWord, u8) {
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let y1 = (self.x & self.z).count_ones();
        let y2 = (other.x & other.z).count_ones();
        let y3 = (x3 & z3).count_ones();
        let swaps = (self.z & other.x).count_ones();
        // i^{y1 + y2 - y3 + 2·swaps}; offset keeps the sum non-negative.
        let k = (y1 + y2 + 2 * swaps + 256 - y3) % 4;
        (PauliWord { x: x3, z: z3 }, k as u8)
    }

    fn render(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|k| match self.letter(k) {
                PauliLetter::I => 'I',
                PauliLetter::X => 'X',
                PauliLetter::Y => 'Y',
                PauliLetter::Z => 'Z',
            })
            .collect()
    }
}

/// Real linear combination of Pauli words on `n_qubits` qubits, held sorted
/// with exact-zero terms dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(PauliWord, f64)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_qubits: usize, raw: Vec<(PauliWord, f64)>) -> Result<Self> {
        if n_qubits > 64 {
            return Err(Error::InvalidArgument("more than 64 qubits".into()));
        }
        let mask = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        for (w, c) in &raw {
            if w.x & !mask != 0 || w.z & !mask != 0 {
                return Err(Error::QubitOutOfRange {
                    index: 64 - (w.x | w.z).leading_zeros() as usize,
                    n_qubits,
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let mut terms = raw;
        terms.sort_by_key(|(w, _)| *w);
        let mut out: Vec<(PauliWord, f64)> = Vec::with_capacity(terms.len());
        for (w, c) in terms {
            match out.last_mut() {
                Some((lw, lc)) if *lw == w => *lc += c,
                _ => out.push((w, c)),
            }
        }
        out.retain(|(_, c)| *c != 0.0);
        Ok(PauliSum {
            n_qubits,
            terms: out,
        })
    }

    /// Single Pauli letter with coefficient 1.
    pub fn single(n_qubits: usize, letter: PauliLetter, qubit: usize) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits,
            });
        }
        Self::from_terms(n_qubits, vec![(PauliWord::single(letter, qubit), 1.0)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(PauliWord, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Hilbert–Schmidt inner product `tr(A†B)/2^N`, which for real Pauli
    /// combinations is the coefficient dot product.
    pub fn hs_inner(&self, other: &PauliSum) -> f64 {
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.terms[i].1 * other.terms[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, c) in &mut self.terms {
            *c *= factor;
        }
    }

    /// `self -= factor · other`, dropping exact zeros.
    pub fn sub_scaled(&mut self, factor: f64, other: &PauliSum) {
        if factor == 0.0 || other.is_zero() {
            return;
        }
        let mut out: Vec<(PauliWord, f64)> =
            Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_left = match (self.terms.get(i), other.terms.get(j)) {
                (Some((wi, _)), Some((wj, _))) => match wi.cmp(wj) {
                    std::cmp::Ordering::Less => Some(true),
                    std::cmp::Ordering::Greater => Some(false),
                    std::cmp::Ordering::Equal => None,
                },
                (Some(_), None) => Some(true),
                (None, Some(_)) => Some(false),
                (None, None) => unreachable!(),
            };
            match take_left {
                Some(true) => {
                    out.push(self.terms[i]);
                    i += 1;
                }
                Some(false) => {
                    out.push((other.terms[j].0, -factor * other.terms[j].1));
                    j += 1;
                }
                None => {
                    let c = self.terms[i].1 - factor * other.terms[j].1;
                    if c != 0.0 {
                        out.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        self.terms = out;
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{:+}·{}", c, w.render(self.n_qubits))?;
        }
        Ok(())
    }
}

/// Commutator in the i-basis: for Hermitian inputs `A`, `B`, returns the real
/// combination `C` with `[A, B] = i·C`. Commuting word pairs contribute
/// nothing; anticommuting pairs contribute ±2 times the product word.
pub fn pauli_commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch {
            left: a.n_qubits,
            right: b.n_qubits,
        });
    }
    let mut raw: Vec<(PauliWord, f64)> = Vec::new();
    for (wa, ca) in &a.terms {
        for (wb, cb) in &b.terms {
            if wa.commutes_with(wb) {
                continue;
            }
            let (word, k) = wa.product(wb);
            // [A, B] = 2·i^k·word, so C = [A,B]/i = 2·i^{k-1}·word; k is odd
            // for anticommuting words, making i^{k-1} = ±1.
            debug_assert!(k % 2 == 1);
            let sign = if k == 1 { 1.0 } else { -1.0 };
            raw.push((word, 2.0 * sign * ca * cb));
        }
    }
    PauliSum::from_terms(a.n_qubits, raw)
}
