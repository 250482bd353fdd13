use std::collections::VecDeque;

use super::pauli::{pauli_commutator, PauliSum};
use crate::{Error, Result};

/// Span of mutually orthogonal, Hilbert–Schmidt-normalized Pauli sums.
#[derive(Debug, Clone)]
pub struct OperatorSpan {
    basis: Vec<PauliSum>,
    truncated: bool,
}

impl OperatorSpan {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[PauliSum] {
        &self.basis
    }

    /// True when the closure stopped at the dimension cap before the
    /// frontier emptied; the dimension is then only a lower bound.
    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Orthogonalizes `cand` against `basis` (modified Gram–Schmidt, two passes)
/// and returns the residual if its norm exceeds `tol`.
fn mgs_residual(mut cand: PauliSum, basis: &[PauliSum], tol: f64) -> Option<PauliSum> {
    let scale = cand.norm();
    if scale == 0.0 {
        return None;
    }
    cand.scale(1.0 / scale);
    for _ in 0..2 {
        for b in basis {
            let overlap = b.hs_inner(&cand);
            if overlap != 0.0 {
                cand.sub_scaled(overlap, b);
            }
        }
    }
    let residual = cand.norm();
    if residual > tol {
        cand.scale(1.0 / residual);
        Some(cand)
    } else {
        None
    }
}

/// Lie closure of `generators` under nested commutators.
///
/// Newly admitted elements form a breadth-first frontier; each is commuted
/// against every element admitted before it, so every unordered pair is
/// visited exactly once. Commutators are taken between the raw sparse
/// representatives (bilinearity makes this equivalent to commuting the
/// orthogonalized basis), while admission is decided by the orthogonalized
/// residual. Stops early once the span is intrinsically full (all traceless
/// words on N qubits), which cannot grow further.
pub fn lie_closure(generators: &[PauliSum], cap: usize, tol: f64) -> Result<OperatorSpan> {
    if generators.is_empty() {
        return Err(Error::EmptyInput("no generators"));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be at least 1".into()));
    }
    let n = generators[0].n_qubits();
    for g in generators {
        if g.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                left: g.n_qubits(),
                right: n,
            });
        }
    }

    let has_identity = generators
        .iter()
        .any(|g| g.terms().iter().any(|(w, _)| w.is_identity()));
    let full_dim: Option<usize> = if 2 * n < usize::BITS as usize {
        let words = 1usize << (2 * n);
        Some(if has_identity { words } else { words - 1 })
    } else {
        None
    };

    let mut basis: Vec<PauliSum> = Vec::new();
    let mut raw: Vec<PauliSum> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut truncated = false;

    let admit = |cand: PauliSum,
                     basis: &mut Vec<PauliSum>,
                     raw: &mut Vec<PauliSum>,
                     queue: &mut VecDeque<usize>|
     -> bool {
        if let Some(ortho) = mgs_residual(cand.clone(), basis, tol) {
            basis.push(ortho);
            raw.push(cand);
            queue.push_back(raw.len() - 1);
            true
        } else {
            false
        }
    };

    let mut closed = false;
    for g in generators {
        if admit(g.clone(), &mut basis, &mut raw, &mut queue) {
            if Some(basis.len()) == full_dim {
                closed = true;
                break;
            }
            if basis.len() >= cap {
                truncated = true;
                break;
            }
        }
    }

    if !closed && !truncated {
        // Pair each popped element against everything admitted before it;
        // later admissions pair with it when they pop, so every unordered
        // pair is visited exactly once (self-commutators vanish).
        'outer: while let Some(idx) = queue.pop_front() {
            for other in 0..idx {
                let comm = pauli_commutator(&raw[idx], &raw[other])?;
                if comm.is_zero() {
                    continue;
                }
                if admit(comm, &mut basis, &mut raw, &mut queue) {
                    if Some(basis.len()) == full_dim {
                        break 'outer;
                    }
                    if basis.len() >= cap {
                        truncated = true;
                        break 'outer;
                    }
                }
            }
        }
    }

    if Some(basis.len()) == full_dim {
        truncated = false;
    }
    Ok(OperatorSpan { basis, truncated })
}

/// Bound check `R ≤ dim 𝔤`; refuses to certify against a truncated span.
pub fn check_rank_bound(r: usize, span: &OperatorSpan) -> Result<bool> {
    if span.truncated() {
        return Err(Error::TruncatedSpan { dim: span.dim() });
    }
    Ok(r <= span.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dla::{PauliLetter, PauliSum};

    fn single(n: usize, letter: PauliLetter, q: usize) -> PauliSum {
        PauliSum::single(n, letter, q).unwrap()
    }

    #[test]
    fn abelian_generator_closes_at_one() {
        let span = lie_closure(&[single(1, PauliLetter::Z, 0)], 16, 1e-10).unwrap();
        assert_eq!(span.dim(), 1);
        assert!(!span.truncated());
    }

    #[test]
    fn x_and_y_close_to_su2() {
        let gens = [single(1, PauliLetter::X, 0), single(1, PauliLetter::Y, 0)];
        let span = lie_closure(&gens, 16, 1e-10).unwrap();
        assert_eq!(span.dim(), 3);
    }

    #[test]
    fn closure_dim_invariant_under_order_and_scaling() {
        // Rotations plus a CNOT-type entangler on two qubits close to su(4).
        let cnot_gen = PauliSum::from_terms(
            2,
            vec![
                (crate::dla::PauliWord::from_letters("IX").unwrap(), -1.0),
                (crate::dla::PauliWord::from_letters("ZI").unwrap(), -1.0),
                (crate::dla::PauliWord::from_letters("ZX").unwrap(), 1.0),
            ],
        )
        .unwrap();
        let mut gens = vec![
            single(2, PauliLetter::Y, 0),
            single(2, PauliLetter::Z, 0),
            single(2, PauliLetter::Y, 1),
            single(2, PauliLetter::Z, 1),
            cnot_gen,
        ];
        let dim = lie_closure(&gens, 4096, 1e-10).unwrap().dim();
        assert_eq!(dim, 15);
        gens.reverse();
        for g in &mut gens {
            g.scale(-0.37);
        }
        assert_eq!(lie_closure(&gens, 4096, 1e-10).unwrap().dim(), dim);
    }

    #[test]
    fn basis_is_orthonormal() {
        let gens = [
            single(2, PauliLetter::Y, 0),
            single(2, PauliLetter::Z, 0),
            single(2, PauliLetter::Y, 1),
            single(2, PauliLetter::Z, 1),
        ];
        let span = lie_closure(&gens, 4096, 1e-10).unwrap();
        for (i, a) in span.basis().iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-10);
            for b in span.basis().iter().skip(i + 1) {
                assert!(a.hs_inner(b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cap_truncates_and_bound_check_refuses() {
        let gens = [single(1, PauliLetter::X, 0), single(1, PauliLetter::Y, 0)];
        let span = lie_closure(&gens, 2, 1e-10).unwrap();
        assert!(span.truncated());
        assert_eq!(span.dim(), 2);
        assert!(matches!(
            check_rank_bound(1, &span),
            Err(Error::TruncatedSpan { .. })
        ));
    }

    #[test]
    fn rank_bound_comparisons() {
        let gens = [single(1, PauliLetter::X, 0), single(1, PauliLetter::Y, 0)];
        let span = lie_closure(&gens, 16, 1e-10).unwrap();
        assert!(check_rank_bound(3, &span).unwrap());
        assert!(!check_rank_bound(4, &span).unwrap());
    }

    #[test]
    fn empty_generators_rejected() {
        assert!(lie_closure(&[], 4, 1e-10).is_err());
    }
}
