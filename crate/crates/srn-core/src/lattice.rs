//! Exact integer/rational lattice machinery.
//!
//! Everything here is exact: arbitrary-precision rationals for rank and
//! feasibility questions, arbitrary-precision integers for lattice
//! membership. No floating point.

use crate::model::ReactionNetwork;
use crate::rational::{rat, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A common direction of a set of collinear integer vectors.
///
/// `vector` is the gcd of the set (sign-normalized so its first nonzero
/// coordinate is positive), `coord_gcd` the gcd of the absolute values of
/// its coordinates, and `support` the indices of nonzero coordinates.
/// `vector / coord_gcd` is the primitive step of the induced lattice lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveDirection {
    pub vector: Vec<i64>,
    pub coord_gcd: u64,
    pub support: Vec<usize>,
}

impl PrimitiveDirection {
    /// Primitive step `vector / coord_gcd`.
    pub fn step(&self) -> Vec<i64> {
        self.vector
            .iter()
            .map(|&v| v / self.coord_gcd as i64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    EmptySet,
    ZeroVector,
}

impl std::fmt::Display for LatticeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatticeError::EmptySet => write!(f, "empty vector set"),
            LatticeError::ZeroVector => write!(f, "vector set contains the zero vector"),
        }
    }
}

impl std::error::Error for LatticeError {}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// Greatest common divisor of a set of nonzero integer vectors.
///
/// Returns `None` when no common divisor exists, i.e. when the set does not
/// span a line. Otherwise the result divides every element of the set and
/// is divisible by every common divisor; its first nonzero coordinate is
/// positive.
pub fn gcd_vector_set(vectors: &[Vec<i64>]) -> Result<Option<PrimitiveDirection>, LatticeError> {
    if vectors.is_empty() {
        return Err(LatticeError::EmptySet);
    }
    if vectors.iter().any(|v| v.iter().all(|&c| c == 0)) {
        return Err(LatticeError::ZeroVector);
    }
    if span_dimension(vectors) != 1 {
        return Ok(None);
    }
    // Primitive direction from the first vector, sign-normalized.
    let a = &vectors[0];
    let g = a.iter().map(|&c| c.unsigned_abs()).fold(0, gcd_u64);
    let mut step: Vec<i64> = a.iter().map(|&c| c / g as i64).collect();
    let first_nonzero = step.iter().find(|&&c| c != 0).copied().unwrap();
    if first_nonzero < 0 {
        for c in &mut step {
            *c = -*c;
        }
    }
    let pivot = step.iter().position(|&c| c != 0).unwrap();
    // Every vector must be an integer multiple of the primitive step.
    let mut multiples = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v[pivot] % step[pivot] != 0 {
            return Ok(None);
        }
        let n = v[pivot] / step[pivot];
        if v.iter().zip(&step).any(|(&vi, &si)| vi != n * si) {
            return Ok(None);
        }
        multiples.push(n);
    }
    let scale = multiples.iter().map(|&n| n.unsigned_abs()).fold(0, gcd_u64);
    let vector: Vec<i64> = step.iter().map(|&s| s * scale as i64).collect();
    let support: Vec<usize> = vector
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, _)| j)
        .collect();
    let coord_gcd = vector.iter().map(|&c| c.unsigned_abs()).fold(0, gcd_u64);
    Ok(Some(PrimitiveDirection { vector, coord_gcd, support }))
}

/// Componentwise `a >= b`.
fn ge(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// The minimal set (antichain) of a finite set of points: all elements not
/// dominating another element. The upward closure is unchanged.
pub fn minimal_set(points: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut uniq: Vec<Vec<u64>> = points.to_vec();
    uniq.sort();
    uniq.dedup();
    uniq.iter()
        .filter(|p| !uniq.iter().any(|q| *q != **p && ge(p, q)))
        .cloned()
        .collect()
}

/// Membership of `x` in the upward closure of `antichain`.
pub fn upward_contains(antichain: &[Vec<u64>], x: &[u64]) -> bool {
    antichain.iter().any(|a| ge(x, a))
}

/// Dimension of the rational span, by exact Gaussian elimination.
pub fn span_dimension(vectors: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<Rat>> = vectors
        .iter()
        .map(|v| v.iter().map(|&c| rat(c)).collect())
        .collect();
    let d = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..d {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let lead = rows[rank][col].clone();
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone() / lead.clone();
                for j in col..d {
                    let sub = factor.clone() * rows[rank][j].clone();
                    rows[i][j] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Answer to the positive-linear-independence question, with a certificate
/// either way (Gordan's alternative).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositiveDependence {
    /// No nontrivial non-negative combination vanishes; `separator` is an
    /// integer vector with `separator . w > 0` for every input vector.
    Independent { separator: Vec<i64> },
    /// `witness` gives non-negative integers, not all zero, whose weighted
    /// sum of the input vectors is the zero vector.
    Dependent { witness: Vec<u64> },
}

/// Decide whether the vectors are positively linearly independent, i.e.
/// whether `sum c_w w = 0` with non-negative integers `c_w` forces all
/// `c_w = 0`.
pub fn positively_linearly_independent(
    vectors: &[Vec<i64>],
) -> Result<PositiveDependence, LatticeError> {
    if vectors.is_empty() {
        return Err(LatticeError::EmptySet);
    }
    let d = vectors[0].len();
    // Feasibility of { w . v >= 1 } decides the alternative.
    let rows: Vec<(Vec<Rat>, Rat)> = vectors
        .iter()
        .map(|w| (w.iter().map(|&c| rat(c)).collect(), rat(1)))
        .collect();
    match fourier_motzkin(rows, d) {
        FmOutcome::Feasible(v) => {
            let separator = scale_to_integers(&v);
            debug_assert!(vectors.iter().all(|w| {
                w.iter()
                    .zip(&separator)
                    .map(|(&a, &b)| a as i128 * b as i128)
                    .sum::<i128>()
                    > 0
            }));
            Ok(PositiveDependence::Independent { separator })
        }
        FmOutcome::Infeasible(mults) => {
            // Farkas: the multipliers combine the rows into 0 . v >= b > 0,
            // so sum mults_w * w = 0 with some mult positive.
            let witness = scale_nonneg_to_integers(&mults);
            debug_assert!(witness.iter().any(|&c| c > 0));
            debug_assert!((0..d).all(|j| {
                witness
                    .iter()
                    .zip(vectors)
                    .map(|(&c, w)| c as i128 * w[j] as i128)
                    .sum::<i128>()
                    == 0
            }));
            Ok(PositiveDependence::Dependent { witness })
        }
    }
}

/// A strictly positive integer conservation law (`law . w = 0` for every
/// jump vector `w`), if one exists.
pub fn conservation_law(omegas: &[Vec<i64>], dim: usize) -> Option<Vec<u64>> {
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for j in 0..dim {
        let mut e = vec![rat(0); dim];
        e[j] = rat(1);
        rows.push((e, rat(1)));
    }
    for w in omegas {
        let r: Vec<Rat> = w.iter().map(|&c| rat(c)).collect();
        let neg: Vec<Rat> = r.iter().map(|c| -c.clone()).collect();
        rows.push((r, rat(0)));
        rows.push((neg, rat(0)));
    }
    match fourier_motzkin(rows, dim) {
        FmOutcome::Feasible(v) => {
            let law = scale_to_integers(&v);
            let law: Vec<u64> = law.iter().map(|&c| c as u64).collect();
            debug_assert!(law.iter().all(|&c| c >= 1));
            debug_assert!(omegas.iter().all(|w| {
                w.iter()
                    .zip(&law)
                    .map(|(&a, &b)| a as i128 * b as i128)
                    .sum::<i128>()
                    == 0
            }));
            Some(law)
        }
        FmOutcome::Infeasible(_) => None,
    }
}

/// True when the network admits a strictly positive integer vector
/// orthogonal to all its reaction vectors.
pub fn is_conservative(network: &ReactionNetwork) -> bool {
    conservation_law(&network.jump_vectors(), network.dim()).is_some()
}

/// Whether `target` lies in the integer lattice generated by `generators`
/// (integer combinations, coefficients of any sign).
pub fn integer_lattice_contains(generators: &[Vec<i64>], target: &[i64]) -> bool {
    let d = target.len();
    let m = generators.len();
    // Columns of the matrix are the generators; reduce to a column echelon
    // form by unimodular column operations (lattice-preserving).
    let mut mat: Vec<Vec<BigInt>> = (0..d)
        .map(|i| (0..m).map(|j| BigInt::from(generators[j][i])).collect())
        .collect();
    let mut t: Vec<BigInt> = target.iter().map(|&c| BigInt::from(c)).collect();
    let mut pivot_col = 0usize;
    for row in 0..d {
        if pivot_col >= m {
            break;
        }
        // Euclidean reduction across columns pivot_col.. on this row.
        loop {
            let mut nonzero: Vec<usize> = (pivot_col..m)
                .filter(|&j| !mat[row][j].is_zero())
                .collect();
            if nonzero.is_empty() {
                break;
            }
            nonzero.sort_by_key(|&j| mat[row][j].abs());
            let jmin = nonzero[0];
            mat.iter_mut().for_each(|r| r.swap(pivot_col, jmin));
            if nonzero.len() == 1 {
                break;
            }
            let head = mat[row][pivot_col].clone();
            for j in (pivot_col + 1)..m {
                if mat[row][j].is_zero() {
                    continue;
                }
                let q = mat[row][j].div_floor(&head);
                for r in mat.iter_mut() {
                    let sub = &q * &r[pivot_col];
                    r[j] -= sub;
                }
            }
        }
        if !mat[row][pivot_col].is_zero() {
            // Use the pivot to clear the target coordinate on this row.
            let head = mat[row][pivot_col].clone();
            if (&t[row] % &head).is_zero() {
                let q = &t[row] / &head;
                for (r, row_vals) in mat.iter().enumerate() {
                    let sub = &q * &row_vals[pivot_col];
                    t[r] -= sub;
                }
            } else {
                return false;
            }
            pivot_col += 1;
        } else if !t[row].is_zero() {
            return false;
        }
    }
    t.iter().all(Zero::is_zero)
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin elimination with certificate tracking.

enum FmOutcome {
    /// A rational point satisfying every inequality.
    Feasible(Vec<Rat>),
    /// Non-negative multipliers over the original rows combining to the
    /// contradiction `0 >= b` with `b > 0`.
    Infeasible(Vec<Rat>),
}

struct FmRow {
    coeffs: Vec<Rat>,
    rhs: Rat,
    /// Provenance: non-negative multipliers over the original inequalities.
    mults: Vec<Rat>,
}

/// Decide feasibility of `{ coeffs . v >= rhs }` over the rationals.
fn fourier_motzkin(original: Vec<(Vec<Rat>, Rat)>, dim: usize) -> FmOutcome {
    let n = original.len();
    let mut rows: Vec<FmRow> = original
        .iter()
        .enumerate()
        .map(|(i, (coeffs, rhs))| {
            let mut mults = vec![rat(0); n];
            mults[i] = rat(1);
            FmRow { coeffs: coeffs.clone(), rhs: rhs.clone(), mults }
        })
        .collect();

    // Rows before eliminating each variable, for back-substitution.
    let mut levels: Vec<Vec<(Vec<Rat>, Rat)>> = Vec::with_capacity(dim);

    for var in 0..dim {
        levels.push(rows.iter().map(|r| (r.coeffs.clone(), r.rhs.clone())).collect());
        let mut zero = Vec::new();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in rows {
            if r.coeffs[var].is_zero() {
                zero.push(r);
            } else if r.coeffs[var].is_positive() {
                pos.push(r);
            } else {
                neg.push(r);
            }
        }
        let mut next = zero;
        for p in &pos {
            for q in &neg {
                // Combine to cancel `var`: q scaled by p_c, p scaled by -q_c.
                let pc = p.coeffs[var].clone();
                let qc = -q.coeffs[var].clone();
                let coeffs: Vec<Rat> = p
                    .coeffs
                    .iter()
                    .zip(&q.coeffs)
                    .map(|(a, b)| a.clone() * qc.clone() + b.clone() * pc.clone())
                    .collect();
                let rhs = p.rhs.clone() * qc.clone() + q.rhs.clone() * pc.clone();
                let mults: Vec<Rat> = p
                    .mults
                    .iter()
                    .zip(&q.mults)
                    .map(|(a, b)| a.clone() * qc.clone() + b.clone() * pc.clone())
                    .collect();
                next.push(FmRow { coeffs, rhs, mults });
            }
        }
        dedupe_rows(&mut next);
        rows = next;
    }

    // Only constants remain: `0 >= rhs` must have rhs <= 0 throughout.
    for r in &rows {
        if r.rhs.is_positive() {
            return FmOutcome::Infeasible(r.mults.clone());
        }
    }

    // Back-substitute, last eliminated variable first.
    let mut solution = vec![rat(0); dim];
    for var in (0..dim).rev() {
        let mut lower: Option<Rat> = None;
        let mut upper: Option<Rat> = None;
        for (coeffs, rhs) in &levels[var] {
            let c = &coeffs[var];
            if c.is_zero() {
                continue;
            }
            let mut rest = rhs.clone();
            for j in (var + 1)..dim {
                rest -= coeffs[j].clone() * solution[j].clone();
            }
            let bound = rest / c.clone();
            if c.is_positive() {
                lower = Some(match lower {
                    Some(l) if l >= bound => l,
                    _ => bound,
                });
            } else {
                upper = Some(match upper {
                    Some(u) if u <= bound => u,
                    _ => bound,
                });
            }
        }
        solution[var] = match (lower, upper) {
            (Some(l), _) => l,
            (None, Some(u)) => u,
            (None, None) => rat(0),
        };
    }
    FmOutcome::Feasible(solution)
}

/// Normalize row scale and drop duplicates (keeps certificates consistent).
fn dedupe_rows(rows: &mut Vec<FmRow>) {
    for r in rows.iter_mut() {
        let scale = r
            .coeffs
            .iter()
            .chain(std::iter::once(&r.rhs))
            .find(|c| !c.is_zero())
            .cloned();
        if let Some(s) = scale {
            let s = if s.is_negative() { -s } else { s };
            for c in &mut r.coeffs {
                *c /= s.clone();
            }
            r.rhs /= s.clone();
            for m in &mut r.mults {
                *m /= s.clone();
            }
        }
    }
    let mut seen: Vec<(Vec<Rat>, Rat)> = Vec::new();
    rows.retain(|r| {
        let key = (r.coeffs.clone(), r.rhs.clone());
        if seen.contains(&key) {
            false
        } else {
            seen.push(key);
            true
        }
    });
}

/// Scale a rational vector to integers (multiply by the common denominator).
fn scale_to_integers(v: &[Rat]) -> Vec<i64> {
    let mut lcm = BigInt::one();
    for r in v {
        lcm = lcm.lcm(r.denom());
    }
    v.iter()
        .map(|r| {
            let scaled = r.numer() * (&lcm / r.denom());
            i64::try_from(&scaled).expect("certificate exceeds i64")
        })
        .collect()
}

fn scale_nonneg_to_integers(v: &[Rat]) -> Vec<u64> {
    let ints = scale_to_integers(v);
    // Certificates of non-negative provenance stay non-negative; reduce by
    // the common gcd for a tidy witness.
    let g = ints.iter().map(|&c| c.unsigned_abs()).fold(0, gcd_u64).max(1);
    ints.iter().map(|&c| (c as u64) / g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Complex, Reaction, ReactionNetwork};

    #[test]
    fn gcd_examples() {
        // Not on a line: no gcd.
        assert_eq!(gcd_vector_set(&[vec![1, 2], vec![2, 1]]).unwrap(), None);
        // {(2,4),(4,8)}: primitive (1,2) scaled by gcd(2,4) = 2.
        let g = gcd_vector_set(&[vec![2, 4], vec![4, 8]]).unwrap().unwrap();
        assert_eq!(g.vector, vec![2, 4]);
        assert_eq!(g.coord_gcd, 2);
        assert_eq!(g.step(), vec![1, 2]);
        // Single element, sign-normalized.
        let g = gcd_vector_set(&[vec![-3]]).unwrap().unwrap();
        assert_eq!(g.vector, vec![3]);
        // Mixed signs on a line.
        let g = gcd_vector_set(&[vec![1, -1], vec![-4, 4]]).unwrap().unwrap();
        assert_eq!(g.vector, vec![1, -1]);
        assert_eq!(g.support, vec![0, 1]);
        assert_eq!(g.coord_gcd, 1);
        // Errors.
        assert_eq!(gcd_vector_set(&[]).unwrap_err(), LatticeError::EmptySet);
        assert_eq!(
            gcd_vector_set(&[vec![0, 0]]).unwrap_err(),
            LatticeError::ZeroVector
        );
    }

    /// Brute-force divisor oracle over small vectors: x | y iff y = a x with
    /// integer a.
    fn divides(x: &[i64], y: &[i64]) -> bool {
        let Some(j) = x.iter().position(|&c| c != 0) else {
            return false;
        };
        if y[j] % x[j] != 0 {
            return false;
        }
        let a = y[j] / x[j];
        x.iter().zip(y).all(|(&xi, &yi)| a * xi == yi)
    }

    #[test]
    fn gcd_agrees_with_exhaustive_divisor_search() {
        let sets: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![2, 4], vec![4, 8], vec![-6, -12]],
            vec![vec![3, 0], vec![-6, 0]],
            vec![vec![2, -2], vec![6, -6]],
            vec![vec![5]],
            vec![vec![0, 4], vec![0, -8], vec![0, 12]],
        ];
        for set in &sets {
            let g = gcd_vector_set(set).unwrap().unwrap();
            // g divides every element.
            for v in set {
                assert!(divides(&g.vector, v), "{:?} should divide {v:?}", g.vector);
            }
            // Every common divisor within a small box divides g.
            let d = set[0].len();
            let bound = 13i64;
            let mut cand = vec![-bound; d];
            loop {
                if cand.iter().any(|&c| c != 0)
                    && set.iter().all(|v| divides(&cand, v))
                {
                    assert!(
                        divides(&cand, &g.vector),
                        "common divisor {cand:?} must divide {:?}",
                        g.vector
                    );
                }
                let mut k = 0;
                loop {
                    if k == d {
                        break;
                    }
                    cand[k] += 1;
                    if cand[k] > bound {
                        cand[k] = -bound;
                        k += 1;
                    } else {
                        break;
                    }
                }
                if k == d {
                    break;
                }
            }
        }
    }

    #[test]
    fn minimal_set_examples() {
        assert_eq!(
            minimal_set(&[vec![1, 0], vec![0, 1], vec![1, 1]]),
            vec![vec![0, 1], vec![1, 0]]
        );
        assert_eq!(minimal_set(&[vec![2, 3]]), vec![vec![2, 3]]);
        assert_eq!(
            minimal_set(&[vec![1, 1], vec![2, 2], vec![3, 3]]),
            vec![vec![1, 1]]
        );
    }

    #[test]
    fn upward_contains_examples() {
        let a = vec![vec![1, 2]];
        assert!(upward_contains(&a, &[2, 2]));
        assert!(!upward_contains(&a, &[0, 5]));
        assert!(!upward_contains(&[], &[0, 0]));
    }

    #[test]
    fn span_dimension_examples() {
        assert_eq!(span_dimension(&[vec![1, -1], vec![-2, 2]]), 1);
        assert_eq!(
            span_dimension(&[vec![0, -2], vec![-2, 2], vec![2, 0]]),
            2
        );
        assert_eq!(span_dimension(&[]), 0);
        assert_eq!(span_dimension(&[vec![0, 0, 0]]), 0);
    }

    #[test]
    fn gordan_alternative_with_verified_certificates() {
        // Dependent: 3(-1,-1) + (2,1) + (1,2) = 0.
        let omega = vec![vec![-1, -1], vec![2, 1], vec![1, 2]];
        match positively_linearly_independent(&omega).unwrap() {
            PositiveDependence::Dependent { witness } => {
                assert!(witness.iter().any(|&c| c > 0));
                for j in 0..2 {
                    let s: i64 = witness
                        .iter()
                        .zip(&omega)
                        .map(|(&c, w)| c as i64 * w[j])
                        .sum();
                    assert_eq!(s, 0);
                }
            }
            other => panic!("expected dependent, got {other:?}"),
        }

        // Independent variant from the same family.
        let omega2 = vec![vec![-1, -3], vec![2, 1], vec![1, 2]];
        match positively_linearly_independent(&omega2).unwrap() {
            PositiveDependence::Independent { separator } => {
                for w in &omega2 {
                    let dot: i64 = separator.iter().zip(w).map(|(&a, &b)| a * b).sum();
                    assert!(dot > 0, "separator fails on {w:?}");
                }
            }
            other => panic!("expected independent, got {other:?}"),
        }

        // Trivial d = 1 case.
        match positively_linearly_independent(&[vec![1]]).unwrap() {
            PositiveDependence::Independent { separator } => assert!(separator[0] > 0),
            other => panic!("expected independent, got {other:?}"),
        }
    }

    fn network(reactions: &[(&[u64], &[u64])]) -> ReactionNetwork {
        let d = reactions[0].0.len();
        ReactionNetwork::new(
            (0..d).map(|i| format!("S{}", i + 1)).collect(),
            reactions
                .iter()
                .map(|(y, yp)| {
                    Reaction::new(Complex(y.to_vec()), Complex(yp.to_vec()), rat(1))
                })
                .collect(),
        )
    }

    #[test]
    fn conservativity_examples() {
        // Two-species chain with direction (1,-1): conservative, law (1,1).
        let conservative = network(&[(&[1, 2], &[2, 1]), (&[6, 2], &[2, 6])]);
        assert!(is_conservative(&conservative));
        let law = conservation_law(&conservative.jump_vectors(), 2).unwrap();
        assert!(law.iter().all(|&c| c >= 1));

        // S <-> 2S: direction 1 is non-negative, not conservative.
        let updown = network(&[(&[1], &[2]), (&[2], &[1])]);
        assert!(!is_conservative(&updown));

        // Neither conservative nor positively independent.
        let mixed = network(&[(&[1, 1], &[0, 0]), (&[1, 1], &[3, 2]), (&[3, 2], &[4, 4])]);
        assert!(!is_conservative(&mixed));
        assert!(matches!(
            positively_linearly_independent(&mixed.jump_vectors()).unwrap(),
            PositiveDependence::Dependent { .. }
        ));
    }

    #[test]
    fn conservativity_matches_direction_sign_test_on_lines() {
        // When the jump vectors lie on a line, conservativity is equivalent
        // to the direction having a negative coordinate.
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![1, -1], vec![-2, 2]],
            vec![vec![1, 2], vec![2, 4]],
            vec![vec![-1, -2], vec![2, 4]],
            vec![vec![2]],
            vec![vec![-3]],
            vec![vec![0, 1, 0], vec![0, -2, 0]],
            vec![vec![1, 0, -2], vec![-3, 0, 6]],
        ];
        for omegas in &cases {
            let dir = gcd_vector_set(omegas).unwrap().unwrap();
            let has_negative = dir.vector.iter().any(|&c| c < 0);
            let d = omegas[0].len();
            assert_eq!(
                conservation_law(omegas, d).is_some(),
                has_negative,
                "sign test disagrees with LP on {omegas:?}"
            );
        }
    }

    #[test]
    fn lattice_membership() {
        // Step-2 lattice on the line.
        assert!(integer_lattice_contains(&[vec![2]], &[4]));
        assert!(!integer_lattice_contains(&[vec![2]], &[1]));
        // {(1,1),(0,2)} generates pairs of even sum.
        let gens = vec![vec![1, 1], vec![0, 2]];
        assert!(integer_lattice_contains(&gens, &[1, 3]));
        assert!(integer_lattice_contains(&gens, &[2, 0]));
        assert!(!integer_lattice_contains(&gens, &[1, 2]));
        // Zero target is always a member.
        assert!(integer_lattice_contains(&gens, &[0, 0]));
    }
}
