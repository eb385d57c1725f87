//! Structural classification of the ambient space and core networks.
//!
//! The neutral and trapping sets have exact closed forms in terms of upward
//! closures of the minimal reactant/product sets. Escaping states and
//! non-singleton classes additionally need reachability answers, so those
//! parts of the report are tri-state: bounded search never silently decides.

use crate::lattice;
use crate::model::{
    add_jump, is_weakly_reversible, jump_structure, Complex, JumpStructure, ReactionNetwork,
    State,
};
use crate::reach::{self, Reachability3, Window};
use crate::TriState;
use serde::Serialize;

/// Symbolic description of a subset of the ambient space: boolean
/// combinations of upward closures of finite generator sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum SetExpr {
    /// The whole ambient space.
    All,
    /// The empty set.
    Empty,
    /// Upward closure of a finite antichain.
    Upset { generators: Vec<Vec<u64>> },
    Union { parts: Vec<SetExpr> },
    /// `left` minus `right`.
    Diff { left: Box<SetExpr>, right: Box<SetExpr> },
}

impl SetExpr {
    pub fn upset(generators: &[Complex]) -> SetExpr {
        if generators.is_empty() {
            SetExpr::Empty
        } else {
            SetExpr::Upset {
                generators: generators.iter().map(|c| c.0.clone()).collect(),
            }
        }
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        match self {
            SetExpr::All => true,
            SetExpr::Empty => false,
            SetExpr::Upset { generators } => {
                generators.iter().any(|g| x.iter().zip(g).all(|(a, b)| a >= b))
            }
            SetExpr::Union { parts } => parts.iter().any(|p| p.contains(x)),
            SetExpr::Diff { left, right } => left.contains(x) && !right.contains(x),
        }
    }
}

/// Options controlling bounded searches in this module.
#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Node-expansion budget per reachability query.
    pub budget: u64,
    /// Padding added around query endpoints to form search windows.
    pub pad: u64,
    /// Per-coordinate bound of the window on which the extinction
    /// condition is sampled.
    pub extinct_sample_bound: u64,
    /// Per-coordinate bound of the (larger) window inside which drain
    /// paths may wander.
    pub extinct_search_bound: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            budget: 1_000_000,
            pad: 8,
            extinct_sample_bound: 4,
            extinct_search_bound: 20,
        }
    }
}

/// Is the trapping set empty? Exact test on minimal sets.
pub fn trap_set_empty(network: &ReactionNetwork) -> bool {
    let js = jump_structure(network);
    js.products_min.iter().all(|x| {
        js.reactants_min
            .iter()
            .any(|y| x.0.iter().zip(&y.0).all(|(a, b)| a >= b))
    })
}

/// Is the trapping set finite? Exact test: drop one coordinate at a time
/// and compare on the rest.
pub fn trap_set_finite(network: &ReactionNetwork) -> bool {
    let js = jump_structure(network);
    let d = network.dim();
    (0..d).all(|drop| {
        js.products_min.iter().all(|x| {
            js.reactants_min.iter().any(|y| {
                x.0.iter()
                    .zip(&y.0)
                    .enumerate()
                    .all(|(j, (a, b))| j == drop || a >= b)
            })
        })
    })
}

fn bounding_window(points: &[&[u64]], pad: u64) -> Window {
    let d = points[0].len();
    let mut bounds = vec![0u64; d];
    for p in points {
        for (b, &v) in bounds.iter_mut().zip(*p) {
            *b = (*b).max(v);
        }
    }
    for b in &mut bounds {
        *b += pad;
    }
    Window { bounds }
}

/// Per-jump-vector return test: is `x + w ~> x` for every `x` in the
/// minimal reactant set of `w`? By translation monotonicity (a returning
/// path replays from any larger state) this decides whether the whole
/// upward closure returns.
pub fn omega_o(network: &ReactionNetwork, options: &ClassifyOptions) -> Vec<TriState> {
    let js = jump_structure(network);
    omega_o_with(network, &js, options)
}

fn omega_o_with(
    network: &ReactionNetwork,
    js: &JumpStructure,
    options: &ClassifyOptions,
) -> Vec<TriState> {
    if is_weakly_reversible(network) {
        // Every reaction sits on a cycle of the reaction graph, whose
        // reactions replay from any reactant of the cycle.
        return vec![TriState::Yes; js.vectors.len()];
    }
    js.vectors
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut verdict = TriState::Yes;
            for x in &js.reactants_min_by_vector[i] {
                let from = State(add_jump(&x.0, w).expect("valid reaction product"));
                let to = State(x.0.clone());
                let window = bounding_window(&[from.as_slice(), to.as_slice()], options.pad);
                match reach::reachable(network, &from, &to, options.budget, &window) {
                    Reachability3::Yes { .. } => {}
                    Reachability3::No => return TriState::No,
                    Reachability3::Unknown => verdict = TriState::Unknown,
                }
            }
            verdict
        })
        .collect()
}

/// Detail of the windowed extinction-condition check.
#[derive(Debug, Clone, Serialize)]
pub struct ExtinctDetail {
    pub sources_checked: u64,
    pub sources_unverified: u64,
    /// A source state that definitively cannot drain, when one exists.
    pub counterexample: Option<Vec<u64>>,
    pub sample_bound: u64,
    pub search_bound: u64,
}

/// Exact-and-tri-state classification of the ambient space.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub jumps: JumpStructure,
    /// Neutral states: complement of the union of reactant/product closures.
    pub n_set: SetExpr,
    /// Trapping states: product closure minus reactant closure.
    pub t_set: SetExpr,
    /// Per jump vector: does its reactant closure return (tri-state)?
    pub omega_o: Vec<TriState>,
    /// All jump vectors returning = every class closed.
    pub essential: TriState,
    /// Sufficient extinction condition verified on a window (never a proof).
    pub extinct_sufficient: TriState,
    pub extinct_detail: ExtinctDetail,
}

impl ClassificationReport {
    /// Exact neutral-state membership.
    pub fn n_contains(&self, x: &[u64]) -> bool {
        self.n_set.contains(x)
    }

    /// Exact trapping-state membership.
    pub fn t_contains(&self, x: &[u64]) -> bool {
        self.t_set.contains(x)
    }

    /// Membership of `x` in the union of returning reactant closures
    /// (the non-singleton classes). Tri-state: per-state reachability is
    /// consulted for jump vectors without a blanket `Yes`.
    pub fn pq_contains(
        &self,
        network: &ReactionNetwork,
        x: &[u64],
        options: &ClassifyOptions,
    ) -> TriState {
        let mut verdict = TriState::No;
        for (i, w) in self.jumps.vectors.iter().enumerate() {
            let in_closure = self.jumps.reactants_min_by_vector[i]
                .iter()
                .any(|g| x.iter().zip(&g.0).all(|(a, b)| a >= b));
            if !in_closure {
                continue;
            }
            match self.omega_o[i] {
                TriState::Yes => return TriState::Yes,
                _ => {
                    let from = State(add_jump(x, w).expect("x dominates the reactant"));
                    let to = State(x.to_vec());
                    let window =
                        bounding_window(&[from.as_slice(), to.as_slice()], options.pad);
                    match reach::reachable(network, &from, &to, options.budget, &window) {
                        Reachability3::Yes { .. } => return TriState::Yes,
                        Reachability3::No => {}
                        Reachability3::Unknown => verdict = TriState::Unknown,
                    }
                }
            }
        }
        verdict
    }

    /// Escaping-state membership: in the reactant closure but in no
    /// returning closure.
    pub fn e_contains(
        &self,
        network: &ReactionNetwork,
        x: &[u64],
        options: &ClassifyOptions,
    ) -> TriState {
        let in_reactants = self
            .jumps
            .reactants_min
            .iter()
            .any(|g| x.iter().zip(&g.0).all(|(a, b)| a >= b));
        if !in_reactants {
            return TriState::No;
        }
        match self.pq_contains(network, x, options) {
            TriState::Yes => TriState::No,
            TriState::No => TriState::Yes,
            TriState::Unknown => TriState::Unknown,
        }
    }
}

/// Classify the ambient space of a network.
pub fn classify(network: &ReactionNetwork, options: &ClassifyOptions) -> ClassificationReport {
    let js = jump_structure(network);
    let i_up = SetExpr::upset(&js.reactants_min);
    let o_up = SetExpr::upset(&js.products_min);
    let n_set = SetExpr::Diff {
        left: Box::new(SetExpr::All),
        right: Box::new(SetExpr::Union { parts: vec![o_up.clone(), i_up.clone()] }),
    };
    let t_set = SetExpr::Diff { left: Box::new(o_up), right: Box::new(i_up) };

    let omega = omega_o_with(network, &js, options);
    let essential = if omega.iter().all(|&t| t == TriState::Yes) {
        TriState::Yes
    } else if omega.iter().any(|&t| t == TriState::No) {
        TriState::No
    } else {
        TriState::Unknown
    };

    let (extinct_sufficient, extinct_detail) = extinct_check(network, &js, &omega, options);

    ClassificationReport {
        jumps: js,
        n_set,
        t_set,
        omega_o: omega,
        essential,
        extinct_sufficient,
        extinct_detail,
    }
}

/// Windowed test of the sufficient extinction condition: every state in
/// the union of returning closures drains to its complement.
fn extinct_check(
    network: &ReactionNetwork,
    js: &JumpStructure,
    omega: &[TriState],
    options: &ClassifyOptions,
) -> (TriState, ExtinctDetail) {
    let d = network.dim();
    let sample = Window::cube(d, options.extinct_sample_bound);
    let search = Window::cube(d, options.extinct_search_bound);

    // Yes-closures cover most member states; jump vectors without a blanket
    // Yes need a per-state return test unless their closure is inside the
    // Yes-union anyway.
    let yes_gens: Vec<Vec<u64>> = js
        .vectors
        .iter()
        .enumerate()
        .filter(|&(i, _)| omega[i] == TriState::Yes)
        .flat_map(|(i, _)| js.reactants_min_by_vector[i].iter().map(|c| c.0.clone()))
        .collect();
    let other: Vec<usize> = (0..js.vectors.len())
        .filter(|&i| omega[i] != TriState::Yes)
        .collect();
    let other_covered: Vec<bool> = other
        .iter()
        .map(|&i| {
            js.reactants_min_by_vector[i]
                .iter()
                .all(|g| lattice::upward_contains(&yes_gens, &g.0))
        })
        .collect();

    // Tri-state membership in the union of returning closures.
    let membership = |x: &[u64]| -> TriState {
        if lattice::upward_contains(&yes_gens, x) {
            return TriState::Yes;
        }
        let mut verdict = TriState::No;
        for (pos, &i) in other.iter().enumerate() {
            if other_covered[pos] {
                continue;
            }
            let in_closure = js.reactants_min_by_vector[i]
                .iter()
                .any(|g| x.iter().zip(&g.0).all(|(a, b)| a >= b));
            if !in_closure {
                continue;
            }
            let w = &js.vectors[i];
            let from = State(add_jump(x, w).expect("x dominates the reactant"));
            let to = State(x.to_vec());
            let window = bounding_window(&[from.as_slice(), to.as_slice()], options.pad);
            match reach::reachable(network, &from, &to, options.budget, &window) {
                Reachability3::Yes { .. } => return TriState::Yes,
                Reachability3::No => {}
                Reachability3::Unknown => verdict = TriState::Unknown,
            }
        }
        verdict
    };

    // Drain targets: states certainly outside the union.
    let reached = match reach::backward_reachable_set(network, &search, |x| {
        membership(x) == TriState::No
    }) {
        Ok(r) => r,
        Err(_) => {
            return (
                TriState::Unknown,
                ExtinctDetail {
                    sources_checked: 0,
                    sources_unverified: 0,
                    counterexample: None,
                    sample_bound: options.extinct_sample_bound,
                    search_bound: options.extinct_search_bound,
                },
            );
        }
    };

    let mut checked = 0u64;
    let mut unverified = 0u64;
    let mut counterexample = None;
    let mut verdict = TriState::Yes;
    let sample_states = sample.state_count().unwrap_or(0);
    for idx in 0..sample_states {
        let x = sample_state_at(&sample, idx);
        if membership(&x) != TriState::Yes {
            continue;
        }
        checked += 1;
        let sidx = reach::window_index(&search, &x).expect("sample inside search window");
        if reached[sidx] {
            continue;
        }
        // Not drained inside the search window: decide No vs Unknown.
        // A closed in-window forward closure that misses every target is a
        // definitive failure; so is pairwise unreachability of all targets
        // when the complement is confined to the window (the complement is
        // downward closed, so confinement reduces to one probe per axis).
        let closure = forward_closure_misses(network, &x, &search, options.budget, |y| {
            membership(y) == TriState::No
        });
        let definitive_no = match closure {
            Some(true) => true,
            _ => complement_confined(&membership, d, options.extinct_search_bound)
                && all_targets_unreachable(network, &x, &search, &membership, options),
        };
        if definitive_no {
            verdict = TriState::No;
            counterexample = Some(x);
            break;
        }
        unverified += 1;
        if verdict == TriState::Yes {
            verdict = TriState::Unknown;
        }
    }

    (
        verdict,
        ExtinctDetail {
            sources_checked: checked,
            sources_unverified: unverified,
            counterexample,
            sample_bound: options.extinct_sample_bound,
            search_bound: options.extinct_search_bound,
        },
    )
}

/// The complement of the returning union is downward closed, so it stays
/// inside `[0, bound]^d` exactly when each axis probe just past the bound
/// is back in the union.
fn complement_confined(
    membership: &impl Fn(&[u64]) -> TriState,
    d: usize,
    bound: u64,
) -> bool {
    (0..d).all(|j| {
        let mut probe = vec![0u64; d];
        probe[j] = bound + 1;
        membership(&probe) == TriState::Yes
    })
}

/// Every complement state in the window is definitively unreachable from
/// `x` (this pulls in the algebraic obstructions, not just closure).
fn all_targets_unreachable(
    network: &ReactionNetwork,
    x: &[u64],
    search: &Window,
    membership: &impl Fn(&[u64]) -> TriState,
    options: &ClassifyOptions,
) -> bool {
    const TARGET_CAP: u64 = 4096;
    let total = search.state_count().unwrap_or(u64::MAX);
    if total > 2_000_000 {
        return false;
    }
    let mut targets = Vec::new();
    for idx in 0..total {
        let y = sample_state_at(search, idx);
        if membership(&y) == TriState::No {
            targets.push(y);
            if targets.len() as u64 > TARGET_CAP {
                return false;
            }
        }
    }
    targets.iter().all(|y| {
        reach::reachable(network, &State(x.to_vec()), &State(y.clone()), options.budget, search)
            == Reachability3::No
    })
}

fn sample_state_at(window: &Window, mut idx: u64) -> Vec<u64> {
    let mut x = vec![0u64; window.bounds.len()];
    for j in (0..x.len()).rev() {
        let size = window.bounds[j] + 1;
        x[j] = idx % size;
        idx /= size;
    }
    x
}

/// `Some(true)` when the forward closure of `x` stays inside `window`,
/// completes within `budget`, and never meets `target` (a definitive
/// failure to drain). `Some(false)` when a target is met; `None` when the
/// search is inconclusive.
fn forward_closure_misses(
    network: &ReactionNetwork,
    x: &[u64],
    window: &Window,
    budget: u64,
    target: impl Fn(&[u64]) -> bool,
) -> Option<bool> {
    use std::collections::{HashSet, VecDeque};
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(x.to_vec());
    queue.push_back(x.to_vec());
    let mut expansions = 0u64;
    while let Some(cur) = queue.pop_front() {
        if expansions >= budget {
            return None;
        }
        expansions += 1;
        for (next, _) in reach::successors(network, &State(cur)) {
            if target(next.as_slice()) {
                return Some(false);
            }
            if !window.contains(next.as_slice()) {
                return None;
            }
            if seen.insert(next.0.clone()) {
                queue.push_back(next.0);
            }
        }
    }
    Some(true)
}

/// Answer to "is this reaction subset a core network?".
#[derive(Debug, Clone)]
pub struct CoreAnswer {
    pub verdict: TriState,
    /// Per removed reaction: its index and, when found, a realization path
    /// (indices into the full network's reaction list, all within the
    /// subset) from its reactant to its product.
    pub realizations: Vec<(usize, Option<Vec<usize>>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    NotASubset { index: usize },
    CapExceeded { reactions: usize, cap: usize },
}

impl std::fmt::Display for CoreError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoreError::NotASubset { index } => {
                write!(f, "reaction index {index} is out of range")
            }
            CoreError::CapExceeded { reactions, cap } => {
                write!(f, "{reactions} reactions exceed the subset-search cap {cap}")
            }
        }
    }
}

impl std::error::Error for CoreError {}

/// Options for core-network searches.
#[derive(Debug, Clone)]
pub struct CoreOptions {
    pub budget: u64,
    pub pad: u64,
    /// Maximum reaction count for exhaustive minimal-core enumeration.
    pub cap: usize,
}

impl Default for CoreOptions {
    fn default() -> Self {
        CoreOptions { budget: 200_000, pad: 8, cap: 16 }
    }
}

fn sub_network(network: &ReactionNetwork, keep: &[usize]) -> ReactionNetwork {
    ReactionNetwork::new(
        network.species().to_vec(),
        keep.iter().map(|&i| network.reactions()[i].clone()).collect(),
    )
}

/// Decide whether the subset `sub` (reaction indices) is a core network:
/// every removed reaction's net change must be realizable by a feasible
/// chain of subset reactions starting from its reactant.
pub fn is_core_network(
    network: &ReactionNetwork,
    sub: &[usize],
    options: &CoreOptions,
) -> Result<CoreAnswer, CoreError> {
    let m = network.reactions().len();
    if let Some(&bad) = sub.iter().find(|&&i| i >= m) {
        return Err(CoreError::NotASubset { index: bad });
    }
    let subnet = sub_network(network, sub);
    let mut verdict = TriState::Yes;
    let mut realizations = Vec::new();
    for i in 0..m {
        if sub.contains(&i) {
            continue;
        }
        let r = &network.reactions()[i];
        let from = State(r.reactant.0.clone());
        let to = State(r.product.0.clone());
        let window = bounding_window(&[from.as_slice(), to.as_slice()], options.pad);
        match reach::reachable(&subnet, &from, &to, options.budget, &window) {
            Reachability3::Yes { path } => {
                let full_path: Vec<usize> = path.iter().map(|&j| sub[j]).collect();
                realizations.push((i, Some(full_path)));
            }
            Reachability3::No => {
                verdict = TriState::No;
                realizations.push((i, None));
            }
            Reachability3::Unknown => {
                if verdict == TriState::Yes {
                    verdict = TriState::Unknown;
                }
                realizations.push((i, None));
            }
        }
    }
    Ok(CoreAnswer { verdict, realizations })
}

/// All inclusion-minimal core subnetworks.
#[derive(Debug, Clone)]
pub struct CoreReport {
    /// Reaction-index subsets, each sorted ascending.
    pub minimal: Vec<Vec<usize>>,
    /// Some subset answer was `Unknown`; the enumeration may be incomplete.
    pub incomplete: bool,
}

/// Enumerate all minimal core networks by descending search from the full
/// reaction set, memoizing subset verdicts.
pub fn minimal_core_networks(
    network: &ReactionNetwork,
    options: &CoreOptions,
) -> Result<CoreReport, CoreError> {
    let m = network.reactions().len();
    if m > options.cap {
        return Err(CoreError::CapExceeded { reactions: m, cap: options.cap });
    }
    use std::collections::{HashMap, HashSet};
    let mut memo: HashMap<u32, TriState> = HashMap::new();
    let mut incomplete = false;

    // Removal order heuristic: drop reactions with the largest jump first.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| {
        let w = network.reactions()[i].vector();
        std::cmp::Reverse(w.iter().map(|c| c.unsigned_abs()).sum::<u64>())
    });

    let full_mask: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let verdict_of = |mask: u32,
                      memo: &mut HashMap<u32, TriState>,
                      incomplete: &mut bool|
     -> TriState {
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let sub: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let ans = is_core_network(network, &sub, options)
            .expect("indices in range")
            .verdict;
        if ans == TriState::Unknown {
            *incomplete = true;
        }
        memo.insert(mask, ans);
        ans
    };

    let mut minimal: Vec<u32> = Vec::new();
    let mut stack = vec![full_mask];
    let mut visited: HashSet<u32> = HashSet::new();
    while let Some(mask) = stack.pop() {
        if !visited.insert(mask) {
            continue;
        }
        if verdict_of(mask, &mut memo, &mut incomplete) != TriState::Yes {
            continue;
        }
        let mut any_child_core = false;
        for &i in &order {
            if mask & (1 << i) == 0 {
                continue;
            }
            let child = mask & !(1 << i);
            if child == 0 {
                continue;
            }
            if verdict_of(child, &mut memo, &mut incomplete) == TriState::Yes {
                any_child_core = true;
                stack.push(child);
            }
        }
        if !any_child_core && !minimal.contains(&mask) {
            minimal.push(mask);
        }
    }

    let mut out: Vec<Vec<usize>> = minimal
        .into_iter()
        .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    out.sort();
    out.dedup();
    Ok(CoreReport { minimal: out, incomplete })
}
