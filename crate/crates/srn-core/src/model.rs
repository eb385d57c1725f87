//! Reaction networks with stochastic mass-action kinetics.
//!
//! A network is a list of species names and a list of reactions between
//! complexes (non-negative integer combinations of species). Under
//! mass-action kinetics each reaction `y -> y'` fires at rate
//! `k * x(x-1)...(x-y+1)` (coordinatewise falling factorials), which is
//! positive exactly when the current state dominates the reactant.

use crate::lattice;
use crate::rational::{rat, Rat};
use crate::scc;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// A complex: species multiplicities, indexed by declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Complex(pub Vec<u64>);

/// A state of the chain: species counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<u64>);

impl Complex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn is_empty_complex(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl State {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &[u64]) -> bool {
        dominates(&self.0, other)
    }
}

/// Componentwise `a >= b`.
pub fn dominates(a: &[u64], b: &[u64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x >= y)
}

/// `x + w`, or `None` if any coordinate would become negative.
pub fn add_jump(x: &[u64], w: &[i64]) -> Option<Vec<u64>> {
    let mut out = Vec::with_capacity(x.len());
    for (&xi, &wi) in x.iter().zip(w) {
        let v = xi as i128 + wi as i128;
        if v < 0 {
            return None;
        }
        out.push(v as u64);
    }
    Some(out)
}

/// A reaction `reactant -> product` with mass-action rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactant: Complex,
    pub product: Complex,
    pub rate: Rat,
}

impl Reaction {
    pub fn new(reactant: Complex, product: Complex, rate: Rat) -> Self {
        Reaction { reactant, product, rate }
    }

    /// Reaction vector `product - reactant`.
    pub fn vector(&self) -> Vec<i64> {
        self.product
            .0
            .iter()
            .zip(&self.reactant.0)
            .map(|(&p, &r)| p as i64 - r as i64)
            .collect()
    }

    /// Mass-action propensity at `x`: `rate * prod_i x_i (x_i-1) ... (x_i-y_i+1)`.
    ///
    /// Zero exactly when `x` does not dominate the reactant.
    pub fn propensity(&self, x: &State) -> Rat {
        let w = falling_factorial_weight(&self.reactant.0, &x.0);
        Rat::from_integer(w) * self.rate.clone()
    }
}

/// `prod_i (x_i)(x_i - 1)...(x_i - y_i + 1)` as an exact integer.
pub fn falling_factorial_weight(y: &[u64], x: &[u64]) -> BigInt {
    let mut acc = BigInt::one();
    for (&yi, &xi) in y.iter().zip(x) {
        if xi < yi {
            return BigInt::zero();
        }
        for k in 0..yi {
            acc *= BigInt::from(xi - k);
        }
    }
    acc
}

/// A reaction network: ordered species plus reactions.
///
/// Construction merges duplicate `(reactant, product)` pairs by summing
/// their rate constants; the induced transition rates are unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<String>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Self {
        let mut merged: Vec<Reaction> = Vec::new();
        let mut index: BTreeMap<(Vec<u64>, Vec<u64>), usize> = BTreeMap::new();
        for r in reactions {
            let key = (r.reactant.0.clone(), r.product.0.clone());
            match index.get(&key) {
                Some(&i) => {
                    let rate = merged[i].rate.clone() + r.rate;
                    merged[i].rate = rate;
                }
                None => {
                    index.insert(key, merged.len());
                    merged.push(r);
                }
            }
        }
        ReactionNetwork { species, reactions: merged }
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn dim(&self) -> usize {
        self.species.len()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Deduplicated reaction vectors, in first-occurrence order.
    pub fn jump_vectors(&self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = Vec::new();
        for r in &self.reactions {
            let v = r.vector();
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Total propensity at `x` (sum over reactions).
    pub fn total_propensity(&self, x: &State) -> Rat {
        let mut acc = rat(0);
        for r in &self.reactions {
            acc += r.propensity(x);
        }
        acc
    }
}

/// A single validation problem found in a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Reaction `index` has equal reactant and product.
    SelfLoop { index: usize },
    /// Species `index` occurs in no complex.
    OrphanSpecies { index: usize, name: String },
    /// Reaction `index` has rate <= 0.
    NonPositiveRate { index: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SelfLoop { index } => {
                write!(f, "reaction {index}: reactant equals product")
            }
            Violation::OrphanSpecies { index, name } => {
                write!(f, "species {name} (index {index}) occurs in no complex")
            }
            Violation::NonPositiveRate { index } => {
                write!(f, "reaction {index}: rate is not positive")
            }
        }
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the definitional invariants: no self-loop reactions, no orphan
/// species, positive rates.
pub fn validate(network: &ReactionNetwork) -> ValidationReport {
    let mut violations = Vec::new();
    let d = network.dim();
    let mut seen = vec![false; d];
    for (i, r) in network.reactions.iter().enumerate() {
        if r.reactant == r.product {
            violations.push(Violation::SelfLoop { index: i });
        }
        if !r.rate.is_positive() {
            violations.push(Violation::NonPositiveRate { index: i });
        }
        for (j, seen_j) in seen.iter_mut().enumerate() {
            if r.reactant.0[j] > 0 || r.product.0[j] > 0 {
                *seen_j = true;
            }
        }
    }
    for (j, &s) in seen.iter().enumerate() {
        if !s {
            violations.push(Violation::OrphanSpecies {
                index: j,
                name: network.species.get(j).cloned().unwrap_or_default(),
            });
        }
    }
    ValidationReport { violations }
}

/// Reactant/product minimal sets split by the sign of the jump against the
/// common direction (only defined when the jump vectors span a line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSets {
    /// Direction all jumps are multiples of (the gcd of the jump set).
    pub direction: lattice::PrimitiveDirection,
    pub reactants_plus_min: Vec<Complex>,
    pub reactants_minus_min: Vec<Complex>,
    pub products_plus_min: Vec<Complex>,
    pub products_minus_min: Vec<Complex>,
}

/// Jump vectors with their minimal reactant/product sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpStructure {
    /// Distinct jump vectors, first-occurrence order.
    pub vectors: Vec<Vec<i64>>,
    /// Minimal set (antichain) of reactants of reactions with each vector.
    pub reactants_min_by_vector: Vec<Vec<Complex>>,
    /// `reactants_min_by_vector + vector`, elementwise.
    pub products_min_by_vector: Vec<Vec<Complex>>,
    /// Minimal set of all reactants.
    pub reactants_min: Vec<Complex>,
    /// Minimal set of all products.
    pub products_min: Vec<Complex>,
    /// Sign-split sets, when the jump vectors lie on a line.
    pub signed: Option<SignedSets>,
}

impl JumpStructure {
    pub fn vector_index(&self, w: &[i64]) -> Option<usize> {
        self.vectors.iter().position(|v| v == w)
    }
}

fn minimal_complexes(mut items: Vec<Complex>) -> Vec<Complex> {
    items.sort();
    items.dedup();
    let keep: Vec<Complex> = items
        .iter()
        .filter(|c| {
            !items
                .iter()
                .any(|other| *other != **c && dominates(&c.0, &other.0))
        })
        .cloned()
        .collect();
    keep
}

/// Compute the jump structure of a network.
pub fn jump_structure(network: &ReactionNetwork) -> JumpStructure {
    let vectors = network.jump_vectors();
    let mut reactants_min_by_vector = Vec::with_capacity(vectors.len());
    let mut products_min_by_vector = Vec::with_capacity(vectors.len());
    for w in &vectors {
        let reactants: Vec<Complex> = network
            .reactions
            .iter()
            .filter(|r| &r.vector() == w)
            .map(|r| r.reactant.clone())
            .collect();
        let mins = minimal_complexes(reactants);
        let prods = mins
            .iter()
            .map(|c| Complex(add_jump(&c.0, w).expect("product of a valid reaction")))
            .collect();
        reactants_min_by_vector.push(mins);
        products_min_by_vector.push(prods);
    }
    let reactants_min =
        minimal_complexes(network.reactions.iter().map(|r| r.reactant.clone()).collect());
    let products_min =
        minimal_complexes(network.reactions.iter().map(|r| r.product.clone()).collect());

    let signed = lattice::gcd_vector_set(&vectors).ok().flatten().map(|direction| {
        let dir_vec = direction.vector.clone();
        let sign_of = move |w: &[i64]| -> i64 {
            let dot: i128 = w
                .iter()
                .zip(&dir_vec)
                .map(|(&a, &b)| a as i128 * b as i128)
                .sum();
            dot.signum() as i64
        };
        let split = |want: i64, products: bool| -> Vec<Complex> {
            minimal_complexes(
                network
                    .reactions
                    .iter()
                    .filter(|r| sign_of(&r.vector()) == want)
                    .map(|r| if products { r.product.clone() } else { r.reactant.clone() })
                    .collect(),
            )
        };
        SignedSets {
            direction,
            reactants_plus_min: split(1, false),
            reactants_minus_min: split(-1, false),
            products_plus_min: split(1, true),
            products_minus_min: split(-1, true),
        }
    });

    JumpStructure {
        vectors,
        reactants_min_by_vector,
        products_min_by_vector,
        reactants_min,
        products_min,
        signed,
    }
}

/// True when every reaction lies on a cycle of the reaction graph
/// (complexes as nodes, reactions as edges).
pub fn is_weakly_reversible(network: &ReactionNetwork) -> bool {
    let mut uniq: Vec<Complex> = Vec::new();
    for r in &network.reactions {
        if !uniq.contains(&r.reactant) {
            uniq.push(r.reactant.clone());
        }
        if !uniq.contains(&r.product) {
            uniq.push(r.product.clone());
        }
    }
    let idx = |c: &Complex| uniq.iter().position(|n| n == c).unwrap();
    let mut adj = vec![Vec::new(); uniq.len()];
    for r in &network.reactions {
        adj[idx(&r.reactant)].push(idx(&r.product));
    }
    let comp = scc::tarjan(&adj);
    network
        .reactions
        .iter()
        .all(|r| comp[idx(&r.reactant)] == comp[idx(&r.product)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn c(v: &[u64]) -> Complex {
        Complex(v.to_vec())
    }

    fn net1(reactions: &[(&[u64], &[u64], Rat)]) -> ReactionNetwork {
        let d = reactions[0].0.len();
        let species = (0..d).map(|i| format!("S{}", i + 1)).collect();
        ReactionNetwork::new(
            species,
            reactions
                .iter()
                .map(|(y, yp, k)| Reaction::new(c(y), c(yp), k.clone()))
                .collect(),
        )
    }

    #[test]
    fn validate_flags_self_loop_and_orphans() {
        let ok = net1(&[(&[1], &[2], rat(1))]);
        assert!(validate(&ok).is_ok());

        let self_loop = net1(&[(&[1], &[1], rat(1))]);
        assert_eq!(
            validate(&self_loop).violations,
            vec![Violation::SelfLoop { index: 0 }]
        );

        let orphan = ReactionNetwork::new(
            vec!["S1".into(), "S2".into()],
            vec![Reaction::new(c(&[1, 0]), c(&[2, 0]), rat(1))],
        );
        assert_eq!(
            validate(&orphan).violations,
            vec![Violation::OrphanSpecies { index: 1, name: "S2".into() }]
        );
    }

    #[test]
    fn propensity_is_falling_factorial() {
        // 2S -> S at rate 2, evaluated at x = 3: 2 * 3 * 2 = 12.
        let r = Reaction::new(c(&[2]), c(&[1]), rat(2));
        assert_eq!(r.propensity(&State(vec![3])), rat(12));
        // Inactive when the state does not dominate the reactant.
        assert_eq!(r.propensity(&State(vec![1])), rat(0));
        // S1 + 2 S2 at x = (2, 3): 2 * (3 * 2) = 12.
        let r2 = Reaction::new(c(&[1, 2]), c(&[0, 0]), rat(1));
        assert_eq!(r2.propensity(&State(vec![2, 3])), rat(12));
    }

    #[test]
    fn propensity_positive_iff_dominates() {
        let r = Reaction::new(c(&[1, 2]), c(&[3, 0]), frac(1, 3));
        for a in 0..4u64 {
            for b in 0..4u64 {
                let x = State(vec![a, b]);
                let active = x.dominates(&[1, 2]);
                assert_eq!(r.propensity(&x) > rat(0), active, "at ({a},{b})");
            }
        }
    }

    #[test]
    fn jump_vectors_match_known_networks() {
        // S <-> 2S, S -> 3S has jumps {1, 2, -1}.
        let n = net1(&[
            (&[1], &[2], rat(1)),
            (&[2], &[1], rat(1)),
            (&[1], &[3], rat(1)),
        ]);
        let js = jump_structure(&n);
        assert_eq!(js.vectors, vec![vec![1], vec![-1], vec![2]]);

        // Two-species example: jumps {(0,-2), (-2,2), (2,0)}.
        let n2 = net1(&[
            (&[2, 2], &[2, 0], rat(1)),
            (&[2, 0], &[0, 2], rat(1)),
            (&[1, 2], &[3, 2], rat(1)),
        ]);
        let js2 = jump_structure(&n2);
        assert_eq!(js2.vectors, vec![vec![0, -2], vec![-2, 2], vec![2, 0]]);

        // 0 -> S: single jump with minimal reactant 0.
        let n3 = net1(&[(&[0], &[1], rat(1))]);
        let js3 = jump_structure(&n3);
        assert_eq!(js3.vectors, vec![vec![1]]);
        assert_eq!(js3.reactants_min_by_vector[0], vec![c(&[0])]);
    }

    #[test]
    fn per_vector_minimal_sets_are_antichains_dominated_by_all_reactants() {
        let n = net1(&[
            (&[1, 0], &[2, 1], rat(1)),
            (&[2, 2], &[3, 3], rat(1)),
            (&[0, 3], &[1, 4], rat(1)),
        ]);
        let js = jump_structure(&n);
        assert_eq!(js.vectors, vec![vec![1, 1]]);
        let min = &js.reactants_min_by_vector[0];
        // Antichain.
        for a in min {
            for b in min {
                if a != b {
                    assert!(!dominates(&a.0, &b.0));
                }
            }
        }
        // Every reactant with this vector dominates some minimal element.
        for r in n.reactions() {
            assert!(min.iter().any(|m| dominates(&r.reactant.0, &m.0)));
        }
    }

    #[test]
    fn duplicate_pairs_merge_by_summing_rates() {
        let n = net1(&[
            (&[1], &[2], rat(1)),
            (&[1], &[2], frac(1, 2)),
            (&[2], &[1], rat(3)),
        ]);
        assert_eq!(n.reactions().len(), 2);
        assert_eq!(n.reactions()[0].rate, frac(3, 2));
        // Total propensity is preserved at sampled states.
        let raw = [
            Reaction::new(c(&[1]), c(&[2]), rat(1)),
            Reaction::new(c(&[1]), c(&[2]), frac(1, 2)),
            Reaction::new(c(&[2]), c(&[1]), rat(3)),
        ];
        for x in 0..6u64 {
            let s = State(vec![x]);
            let total_raw: Rat = raw.iter().map(|r| r.propensity(&s)).sum();
            assert_eq!(total_raw, n.total_propensity(&s));
        }
    }

    #[test]
    fn weak_reversibility() {
        // 3-cycle S -> 2S -> 3S -> S.
        let cycle = net1(&[
            (&[1], &[2], rat(1)),
            (&[2], &[3], rat(1)),
            (&[3], &[1], rat(1)),
        ]);
        assert!(is_weakly_reversible(&cycle));

        // S <-> 2S, S -> 3S: 3S is a sink complex.
        let sink = net1(&[
            (&[1], &[2], rat(1)),
            (&[2], &[1], rat(1)),
            (&[1], &[3], rat(1)),
        ]);
        assert!(!is_weakly_reversible(&sink));

        // 0 -> S.
        let birth = net1(&[(&[0], &[1], rat(1))]);
        assert!(!is_weakly_reversible(&birth));
    }
}
