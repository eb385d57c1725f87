//! Property tests: parser round-trips, vector-gcd divisibility against a
//! brute-force divisor oracle, minimal-set/upward-closure agreement, and
//! certificate checks for the exact feasibility questions.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use srn_core::lattice::{
    conservation_law, gcd_vector_set, integer_lattice_contains, minimal_set,
    positively_linearly_independent, upward_contains, PositiveDependence,
};
use srn_core::model::{Complex, Reaction, ReactionNetwork};
use srn_core::parser::{parse, serialize};

fn rate_strategy() -> impl Strategy<Value = BigRational> {
    (1i64..40, 1i64..12)
        .prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn complex_strategy(dim: usize) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0u64..4, dim)
}

fn network_strategy() -> impl Strategy<Value = ReactionNetwork> {
    (1usize..4)
        .prop_flat_map(|dim| {
            let reaction = (complex_strategy(dim), complex_strategy(dim), rate_strategy())
                .prop_filter("no self loops", |(y, yp, _)| y != yp)
                .prop_map(|(y, yp, k)| Reaction::new(Complex(y), Complex(yp), k));
            (
                Just(dim),
                proptest::collection::vec(reaction, 1..6),
            )
        })
        .prop_map(|(dim, reactions)| {
            let species = (0..dim).map(|j| format!("S{}", j + 1)).collect();
            ReactionNetwork::new(species, reactions)
        })
        // Keep only networks every species of which appears somewhere, so
        // declaration order is recoverable (orphans are a validation error
        // anyway).
        .prop_filter("no orphan species", |n| {
            srn_core::model::validate(n).is_ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parse_serialize_round_trip(network in network_strategy()) {
        let text = serialize(&network);
        let parsed = parse(&text).expect("serialized form parses");
        prop_assert_eq!(parsed, network);
    }

    #[test]
    fn gcd_divides_and_is_divided(
        base in proptest::collection::vec(-3i64..4, 1..4),
        multiples in proptest::collection::vec(
            (1i64..7).prop_flat_map(|m| prop_oneof![Just(m), Just(-m)]),
            1..5,
        ),
    ) {
        prop_assume!(base.iter().any(|&c| c != 0));
        let set: Vec<Vec<i64>> = multiples
            .iter()
            .map(|&m| base.iter().map(|&b| m * b).collect())
            .collect();
        let g = gcd_vector_set(&set).unwrap().expect("collinear set has a gcd");

        let divides = |x: &[i64], y: &[i64]| -> bool {
            let Some(j) = x.iter().position(|&c| c != 0) else { return false };
            if y[j] % x[j] != 0 {
                return false;
            }
            let a = y[j] / x[j];
            x.iter().zip(y).all(|(&xi, &yi)| a * xi == yi)
        };

        // The gcd divides every element.
        for v in &set {
            prop_assert!(divides(&g.vector, v));
        }
        // Every common divisor from a brute-force search divides the gcd.
        let d = base.len();
        let bound = 9i64;
        let mut cand = vec![-bound; d];
        loop {
            if cand.iter().any(|&c| c != 0) && set.iter().all(|v| divides(&cand, v)) {
                prop_assert!(divides(&cand, &g.vector), "{cand:?} should divide {:?}", g.vector);
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
        // Sign normalization.
        prop_assert!(*g.vector.iter().find(|&&c| c != 0).unwrap() > 0);
    }

    #[test]
    fn positive_dependence_certificates_verify(
        vectors in proptest::collection::vec(
            proptest::collection::vec(-3i64..4, 2..4)
                .prop_filter("nonzero", |v| v.iter().any(|&c| c != 0)),
            1..6,
        ),
    ) {
        prop_assume!(vectors.iter().all(|v| v.len() == vectors[0].len()));
        let d = vectors[0].len();
        match positively_linearly_independent(&vectors).unwrap() {
            PositiveDependence::Independent { separator } => {
                // The separator strictly increases along every vector, so
                // no nontrivial non-negative combination can vanish.
                for w in &vectors {
                    let dot: i64 = separator.iter().zip(w).map(|(&a, &b)| a * b).sum();
                    prop_assert!(dot > 0, "separator {separator:?} fails on {w:?}");
                }
            }
            PositiveDependence::Dependent { witness } => {
                prop_assert_eq!(witness.len(), vectors.len());
                prop_assert!(witness.iter().any(|&c| c > 0));
                for j in 0..d {
                    let sum: i64 = witness
                        .iter()
                        .zip(&vectors)
                        .map(|(&c, w)| c as i64 * w[j])
                        .sum();
                    prop_assert_eq!(sum, 0, "witness combination nonzero at coord {}", j);
                }
            }
        }
    }

    #[test]
    fn conservation_law_agrees_with_small_box_search(
        vectors in proptest::collection::vec(
            proptest::collection::vec(-2i64..3, 2..4)
                .prop_filter("nonzero", |v| v.iter().any(|&c| c != 0)),
            1..5,
        ),
    ) {
        prop_assume!(vectors.iter().all(|v| v.len() == vectors[0].len()));
        let d = vectors[0].len();
        let law = conservation_law(&vectors, d);
        if let Some(v) = &law {
            prop_assert!(v.iter().all(|&c| c >= 1));
            for w in &vectors {
                let dot: i64 = v.iter().zip(w).map(|(&a, &b)| a as i64 * b).sum();
                prop_assert_eq!(dot, 0);
            }
        }
        // Brute force over a small positive box: any law found there must
        // be matched by the solver.
        let bound = 5u64;
        let mut cand = vec![1u64; d];
        let mut brute_found = false;
        'outer: loop {
            if vectors.iter().all(|w| {
                cand.iter().zip(w).map(|(&a, &b)| a as i64 * b).sum::<i64>() == 0
            }) {
                brute_found = true;
                break;
            }
            let mut k = 0;
            loop {
                if k == d {
                    break 'outer;
                }
                cand[k] += 1;
                if cand[k] > bound {
                    cand[k] = 1;
                    k += 1;
                } else {
                    break;
                }
            }
        }
        if brute_found {
            prop_assert!(law.is_some(), "solver missed a conservation law for {vectors:?}");
        }
    }

    #[test]
    fn lattice_membership_agrees_with_coefficient_enumeration(
        generators in proptest::collection::vec(
            proptest::collection::vec(-2i64..3, 2),
            1..4,
        ),
        target in proptest::collection::vec(-4i64..5, 2),
    ) {
        let claimed = integer_lattice_contains(&generators, &target);
        // Enumerate small coefficient combinations.
        let bound = 6i64;
        let m = generators.len();
        let mut coeffs = vec![-bound; m];
        let mut brute = false;
        'outer: loop {
            let mut ok = true;
            for j in 0..2 {
                let s: i64 = coeffs.iter().zip(&generators).map(|(&n, g)| n * g[j]).sum();
                if s != target[j] {
                    ok = false;
                    break;
                }
            }
            if ok {
                brute = true;
                break;
            }
            let mut k = 0;
            loop {
                if k == m {
                    break 'outer;
                }
                coeffs[k] += 1;
                if coeffs[k] > bound {
                    coeffs[k] = -bound;
                    k += 1;
                } else {
                    break;
                }
            }
        }
        if brute {
            prop_assert!(claimed, "membership missed for {target:?} over {generators:?}");
        }
        if !claimed {
            prop_assert!(!brute);
        }
    }

    #[test]
    fn minimal_set_is_antichain_with_same_closure(
        points in proptest::collection::vec(proptest::collection::vec(0u64..6, 2), 1..12),
        probes in proptest::collection::vec(proptest::collection::vec(0u64..8, 2), 8),
    ) {
        let min = minimal_set(&points);
        for a in &min {
            for b in &min {
                if a != b {
                    prop_assert!(!a.iter().zip(b).all(|(x, y)| x >= y));
                }
            }
        }
        for x in &probes {
            let in_full = points.iter().any(|p| x.iter().zip(p).all(|(a, b)| a >= b));
            prop_assert_eq!(upward_contains(&min, x), in_full);
        }
    }
}
