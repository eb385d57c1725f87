//! Bounded reachability and windowed communicating-class decomposition.
//!
//! Reachability on the full lattice is undecidable by bounded search, so
//! every negative answer here is backed by one of three sound arguments:
//! the in-window forward closure is closed and misses the target, the
//! target is not in the integer lattice spanned by the jump vectors, or a
//! separating vector (from the Gordan alternative) strictly increases along
//! every jump while the target does not. Anything else is `Unknown`.

use crate::lattice::{self, PositiveDependence};
use crate::model::{add_jump, ReactionNetwork, State};
use crate::scc;
use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

/// Box window `0 <= x_j <= bounds[j]` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub bounds: Vec<u64>,
}

impl Window {
    pub fn cube(dim: usize, bound: u64) -> Self {
        Window { bounds: vec![bound; dim] }
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.bounds.len() && x.iter().zip(&self.bounds).all(|(a, b)| a <= b)
    }

    /// Number of lattice points, checking for overflow.
    pub fn state_count(&self) -> Option<u64> {
        let mut n: u64 = 1;
        for &b in &self.bounds {
            n = n.checked_mul(b.checked_add(1)?)?;
        }
        Some(n)
    }

    fn index_of(&self, x: &[u64]) -> usize {
        let mut idx: usize = 0;
        for (j, &b) in self.bounds.iter().enumerate() {
            idx = idx * (b as usize + 1) + x[j] as usize;
        }
        idx
    }

    fn state_at(&self, mut idx: usize) -> Vec<u64> {
        let mut x = vec![0u64; self.bounds.len()];
        for j in (0..self.bounds.len()).rev() {
            let size = self.bounds[j] as usize + 1;
            x[j] = (idx % size) as u64;
            idx /= size;
        }
        x
    }
}

/// Tri-state reachability answer. `Yes` carries a replayable certificate:
/// the sequence of reaction indices applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reachability3 {
    Yes { path: Vec<usize> },
    No,
    Unknown,
}

impl Reachability3 {
    pub fn is_yes(&self) -> bool {
        matches!(self, Reachability3::Yes { .. })
    }
}

/// All one-step successors of `x` with the reaction that produces each.
pub fn successors(network: &ReactionNetwork, x: &State) -> Vec<(State, usize)> {
    let mut out = Vec::new();
    for (i, r) in network.reactions().iter().enumerate() {
        if x.dominates(r.reactant.as_slice()) {
            if let Some(next) = add_jump(x.as_slice(), &r.vector()) {
                out.push((State(next), i));
            }
        }
    }
    out
}

/// Replay a reaction path from `x`; `None` when some step is inactive.
pub fn replay(network: &ReactionNetwork, x: &State, path: &[usize]) -> Option<State> {
    let mut cur = x.clone();
    for &i in path {
        let r = network.reactions().get(i)?;
        if !cur.dominates(r.reactant.as_slice()) {
            return None;
        }
        cur = State(add_jump(cur.as_slice(), &r.vector())?);
    }
    Some(cur)
}

/// Decide `x leads-to y` by breadth-first search inside `window`, with at
/// most `budget` node expansions.
pub fn reachable(
    network: &ReactionNetwork,
    x: &State,
    y: &State,
    budget: u64,
    window: &Window,
) -> Reachability3 {
    if x == y {
        return Reachability3::Yes { path: Vec::new() };
    }
    let omegas = network.jump_vectors();
    if !omegas.is_empty() {
        // Algebraic obstructions make `No` window-independent.
        let diff: Vec<i64> = y
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        if !lattice::integer_lattice_contains(&omegas, &diff) {
            return Reachability3::No;
        }
        if let Ok(PositiveDependence::Independent { separator }) =
            lattice::positively_linearly_independent(&omegas)
        {
            let progress: i128 = separator
                .iter()
                .zip(&diff)
                .map(|(&a, &b)| a as i128 * b as i128)
                .sum();
            if progress <= 0 {
                return Reachability3::No;
            }
        }
    } else {
        return Reachability3::No;
    }
    // A target with no active one-step predecessor is unreachable from
    // anywhere else, regardless of window.
    if !has_predecessor(network, y.as_slice()) {
        return Reachability3::No;
    }

    let mut parent: HashMap<Vec<u64>, (Vec<u64>, usize)> = HashMap::new();
    let mut queue: VecDeque<Vec<u64>> = VecDeque::new();
    queue.push_back(x.as_slice().to_vec());
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    seen.insert(x.as_slice().to_vec(), ());
    let mut expansions: u64 = 0;
    let mut frontier_left_window = false;

    while let Some(cur) = queue.pop_front() {
        if expansions >= budget {
            return Reachability3::Unknown;
        }
        expansions += 1;
        let cur_state = State(cur.clone());
        for (next, reaction) in successors(network, &cur_state) {
            let next_vec = next.0;
            if next_vec == *y.as_slice() {
                // Rebuild the path.
                let mut path = vec![reaction];
                let mut back = cur.clone();
                while let Some((prev, r)) = parent.get(&back) {
                    path.push(*r);
                    back = prev.clone();
                }
                path.reverse();
                return Reachability3::Yes { path };
            }
            if !window.contains(&next_vec) {
                frontier_left_window = true;
                continue;
            }
            if let Entry::Vacant(e) = seen.entry(next_vec.clone()) {
                e.insert(());
                parent.insert(next_vec.clone(), (cur.clone(), reaction));
                queue.push_back(next_vec);
            }
        }
    }
    if frontier_left_window {
        Reachability3::Unknown
    } else {
        Reachability3::No
    }
}

/// Label of a window state in the communicating-class decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateLabel {
    /// Absorbing and not reachable from any other state.
    Neutral,
    /// Absorbing and reachable from some other state.
    Trapping,
    /// Open singleton class.
    Escaping,
    /// Member of a non-singleton closed class.
    PicMember,
    /// Member of a non-singleton open class.
    QicMember,
    /// The class can reach beyond the window; its label is not certified.
    BoundaryUncertain,
}

/// Communicating-class decomposition of the states of a window.
///
/// Absorbing states are labelled neutral/trapping exactly (the direct
/// predecessor test is window-free). Any class whose forward closure
/// touches the window boundary is `BoundaryUncertain`; certified labels
/// are stable under window enlargement.
#[derive(Debug, Clone)]
pub struct WindowDecomposition {
    pub window: Window,
    labels: Vec<StateLabel>,
    class_ids: Vec<u32>,
}

impl WindowDecomposition {
    pub fn label(&self, x: &[u64]) -> Option<StateLabel> {
        self.window.contains(x).then(|| self.labels[self.window.index_of(x)])
    }

    pub fn class_id(&self, x: &[u64]) -> Option<u32> {
        self.window.contains(x).then(|| self.class_ids[self.window.index_of(x)])
    }

    /// Iterate all `(state, label, class id)` rows.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u64>, StateLabel, u32)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (self.window.state_at(i), l, self.class_ids[i]))
    }

    pub fn states_with_label(&self, want: StateLabel) -> Vec<Vec<u64>> {
        self.iter()
            .filter(|&(_, l, _)| l == want)
            .map(|(x, _, _)| x)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowTooLarge {
    pub states: Option<u64>,
    pub max: u64,
}

impl std::fmt::Display for WindowTooLarge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "window has {:?} states, limit {}", self.states, self.max)
    }
}

impl std::error::Error for WindowTooLarge {}

const MAX_WINDOW_STATES: u64 = 20_000_000;

/// True when some state other than `x` one-step reaches `x`. Exact: the
/// candidate predecessors `x - w` are finitely many and checked directly.
fn has_predecessor(network: &ReactionNetwork, x: &[u64]) -> bool {
    for r in network.reactions() {
        let w = r.vector();
        let neg: Vec<i64> = w.iter().map(|&c| -c).collect();
        if let Some(prev) = add_jump(x, &neg) {
            if prev.iter().zip(&r.reactant.0).all(|(a, b)| a >= b) {
                return true;
            }
        }
    }
    false
}

/// Decompose all states of `window` into communicating classes and label
/// them.
pub fn decompose_window(
    network: &ReactionNetwork,
    window: &Window,
) -> Result<WindowDecomposition, WindowTooLarge> {
    let count = window.state_count();
    let n = match count {
        Some(n) if n <= MAX_WINDOW_STATES => n as usize,
        _ => return Err(WindowTooLarge { states: count, max: MAX_WINDOW_STATES }),
    };

    let vectors: Vec<Vec<i64>> = network.reactions().iter().map(|r| r.vector()).collect();
    let reactants: Vec<&[u64]> = network.reactions().iter().map(|r| r.reactant.as_slice()).collect();

    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut has_exit = vec![false; n];
    let mut x = vec![0u64; window.bounds.len()];
    for idx in 0..n {
        for (w, y) in vectors.iter().zip(&reactants) {
            if !x.iter().zip(*y).all(|(a, b)| a >= b) {
                continue;
            }
            match add_jump(&x, w) {
                Some(next) if window.contains(&next) => {
                    adj[idx].push(window.index_of(&next) as u32);
                }
                Some(_) => has_exit[idx] = true,
                None => {}
            }
        }
        // Row-major increment.
        for j in (0..x.len()).rev() {
            if x[j] < window.bounds[j] {
                x[j] += 1;
                break;
            }
            x[j] = 0;
        }
    }

    let adj_usize: Vec<Vec<usize>> = adj
        .iter()
        .map(|row| row.iter().map(|&v| v as usize).collect())
        .collect();
    let comp = scc::tarjan(&adj_usize);
    let n_comps = comp.iter().copied().max().map_or(0, |m| m + 1);

    // Component ids come out in reverse topological order (successor
    // components have smaller ids), so one ascending pass propagates taint.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comps];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    let mut tainted = vec![false; n_comps];
    let mut comp_has_outedge = vec![false; n_comps];
    for c in 0..n_comps {
        for &v in &members[c] {
            if has_exit[v] {
                tainted[c] = true;
            }
            for &w in &adj_usize[v] {
                let cw = comp[w];
                if cw != c {
                    comp_has_outedge[c] = true;
                    if tainted[cw] {
                        tainted[c] = true;
                    }
                }
            }
        }
    }

    let mut labels = vec![StateLabel::Neutral; n];
    let mut class_ids = vec![0u32; n];
    for c in 0..n_comps {
        let label = if tainted[c] {
            StateLabel::BoundaryUncertain
        } else if members[c].len() == 1 {
            let v = members[c][0];
            if adj_usize[v].is_empty() && !has_exit[v] {
                if has_predecessor(network, &window.state_at(v)) {
                    StateLabel::Trapping
                } else {
                    StateLabel::Neutral
                }
            } else {
                StateLabel::Escaping
            }
        } else if comp_has_outedge[c] {
            StateLabel::QicMember
        } else {
            StateLabel::PicMember
        };
        for &v in &members[c] {
            labels[v] = label;
            class_ids[v] = c as u32;
        }
    }

    Ok(WindowDecomposition {
        window: window.clone(),
        labels,
        class_ids,
    })
}

/// States of `window` from which some state satisfying `target` is
/// reachable without leaving the window. Backward breadth-first closure.
pub fn backward_reachable_set(
    network: &ReactionNetwork,
    window: &Window,
    target: impl Fn(&[u64]) -> bool,
) -> Result<Vec<bool>, WindowTooLarge> {
    let count = window.state_count();
    let n = match count {
        Some(n) if n <= 40_000_000 => n as usize,
        _ => return Err(WindowTooLarge { states: count, max: 40_000_000 }),
    };
    let vectors: Vec<Vec<i64>> = network.reactions().iter().map(|r| r.vector()).collect();
    let neg_vectors: Vec<Vec<i64>> = vectors
        .iter()
        .map(|w| w.iter().map(|&c| -c).collect())
        .collect();
    let reactants: Vec<&[u64]> = network.reactions().iter().map(|r| r.reactant.as_slice()).collect();

    let mut reached = vec![false; n];
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut x = vec![0u64; window.bounds.len()];
    for idx in 0..n {
        if target(&x) {
            reached[idx] = true;
            queue.push_back(idx as u32);
        }
        for j in (0..x.len()).rev() {
            if x[j] < window.bounds[j] {
                x[j] += 1;
                break;
            }
            x[j] = 0;
        }
    }
    while let Some(idx) = queue.pop_front() {
        let state = window.state_at(idx as usize);
        for (nw, y) in neg_vectors.iter().zip(&reactants) {
            let Some(prev) = add_jump(&state, nw) else { continue };
            if !window.contains(&prev) {
                continue;
            }
            if !prev.iter().zip(*y).all(|(a, b)| a >= b) {
                continue;
            }
            let pidx = window.index_of(&prev);
            if !reached[pidx] {
                reached[pidx] = true;
                queue.push_back(pidx as u32);
            }
        }
    }
    Ok(reached)
}

/// Index of a window state (public for bulk lookups into
/// [`backward_reachable_set`] results).
pub fn window_index(window: &Window, x: &[u64]) -> Option<usize> {
    window.contains(x).then(|| window.index_of(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Complex, Reaction};
    use crate::rational::rat;

    fn net(reactions: &[(&[u64], &[u64])]) -> ReactionNetwork {
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

    fn updown() -> ReactionNetwork {
        net(&[(&[1], &[2]), (&[2], &[1])])
    }

    #[test]
    fn successors_examples() {
        let n = updown();
        assert!(successors(&n, &State(vec![0])).is_empty());
        let s1: Vec<Vec<u64>> = successors(&n, &State(vec![1]))
            .into_iter()
            .map(|(s, _)| s.0)
            .collect();
        assert_eq!(s1, vec![vec![2]]);
        let mut s2: Vec<Vec<u64>> = successors(&n, &State(vec![2]))
            .into_iter()
            .map(|(s, _)| s.0)
            .collect();
        s2.sort();
        assert_eq!(s2, vec![vec![1], vec![3]]);
    }

    #[test]
    fn reachable_yes_with_replayable_path() {
        let n = updown();
        let w = Window::cube(1, 50);
        match reachable(&n, &State(vec![1]), &State(vec![5]), 10_000, &w) {
            Reachability3::Yes { path } => {
                assert_eq!(replay(&n, &State(vec![1]), &path), Some(State(vec![5])));
            }
            other => panic!("expected yes, got {other:?}"),
        }
    }

    #[test]
    fn reachable_no_by_closure() {
        // 1 cannot reach 0: every product has at least one S.
        let n = updown();
        let w = Window::cube(1, 50);
        assert_eq!(
            reachable(&n, &State(vec![1]), &State(vec![0]), 10_000, &w),
            Reachability3::No
        );
    }

    #[test]
    fn reachable_no_by_lattice_residue() {
        // S <-> 3S only: states stay in 1 + 2N.
        let n = net(&[(&[1], &[3]), (&[3], &[1])]);
        let w = Window::cube(1, 9);
        assert_eq!(
            reachable(&n, &State(vec![1]), &State(vec![2]), 10_000, &w),
            Reachability3::No
        );
    }

    #[test]
    fn reachable_no_by_separator() {
        // 0 -> S only increases; 1 cannot lead back to 0.
        let n = net(&[(&[0], &[1])]);
        let w = Window::cube(1, 9);
        assert_eq!(
            reachable(&n, &State(vec![1]), &State(vec![0]), 10_000, &w),
            Reachability3::No
        );
        // And an unknown when the window is the only obstacle.
        let grow = net(&[(&[1], &[2])]);
        assert_eq!(
            reachable(&grow, &State(vec![1]), &State(vec![0]), 10_000, &Window::cube(1, 9)),
            Reachability3::No
        );
    }

    #[test]
    fn reachable_unknown_on_budget() {
        let n = updown();
        let w = Window::cube(1, 50);
        assert_eq!(
            reachable(&n, &State(vec![1]), &State(vec![49]), 3, &w),
            Reachability3::Unknown
        );
    }

    #[test]
    fn decompose_updown_plus_escape() {
        // S <-> 2S, S -> 3S on [0, 50]: 0 is neutral, the rest is one
        // boundary-uncertain component.
        let n = net(&[(&[1], &[2]), (&[2], &[1]), (&[1], &[3])]);
        let d = decompose_window(&n, &Window::cube(1, 50)).unwrap();
        assert_eq!(d.label(&[0]), Some(StateLabel::Neutral));
        for k in 1..=50u64 {
            assert_eq!(d.label(&[k]), Some(StateLabel::BoundaryUncertain), "at {k}");
        }
        let c1 = d.class_id(&[1]).unwrap();
        assert!((2..=48).all(|k| d.class_id(&[k]) == Some(c1)));
    }

    #[test]
    fn decompose_coexistence_traps() {
        // Interior states of {0} x (N \ {1}) are trapping.
        let n = net(&[
            (&[2, 2], &[2, 0]),
            (&[2, 0], &[0, 2]),
            (&[1, 2], &[3, 2]),
        ]);
        let d = decompose_window(&n, &Window::cube(2, 12)).unwrap();
        for k in 2..=12u64 {
            assert_eq!(d.label(&[0, k]), Some(StateLabel::Trapping), "at (0,{k})");
        }
        assert_eq!(d.label(&[0, 0]), Some(StateLabel::Neutral));
        assert_eq!(d.label(&[0, 1]), Some(StateLabel::Neutral));
    }

    #[test]
    fn decompose_empty_network_is_all_neutral() {
        let n = ReactionNetwork::new(vec!["S".to_string()], Vec::new());
        let d = decompose_window(&n, &Window::cube(1, 5)).unwrap();
        for k in 0..=5u64 {
            assert_eq!(d.label(&[k]), Some(StateLabel::Neutral));
        }
    }

    #[test]
    fn interior_labels_stable_under_enlargement() {
        let n = net(&[
            (&[2, 2], &[2, 0]),
            (&[2, 0], &[0, 2]),
            (&[1, 2], &[3, 2]),
        ]);
        let small = decompose_window(&n, &Window::cube(2, 8)).unwrap();
        let big = decompose_window(&n, &Window::cube(2, 14)).unwrap();
        for (x, label, _) in small.iter() {
            if label != StateLabel::BoundaryUncertain {
                assert_eq!(big.label(&x), Some(label), "state {x:?}");
            }
        }
    }

    #[test]
    fn translation_monotone_replay() {
        // A path from x replays from x + z for z >= 0.
        let n = net(&[(&[1, 1], &[0, 0]), (&[1, 0], &[2, 1])]);
        let x = State(vec![2, 1]);
        let y = State(vec![3, 2]);
        let w = Window { bounds: vec![10, 10] };
        if let Reachability3::Yes { path } = reachable(&n, &x, &y, 10_000, &w) {
            for z in [[0u64, 1], [2, 0], [3, 3]] {
                let shifted = State(vec![x.0[0] + z[0], x.0[1] + z[1]]);
                let end = replay(&n, &shifted, &path).expect("path must stay active");
                assert_eq!(end.0, vec![y.0[0] + z[0], y.0[1] + z[1]]);
            }
        } else {
            panic!("expected reachable");
        }
    }

    #[test]
    fn backward_closure_finds_drains() {
        let n = updown();
        let w = Window::cube(1, 10);
        // Target: state 3. Everything >= 1 can reach it in-window; 0 cannot.
        let reached = backward_reachable_set(&n, &w, |x| x[0] == 3).unwrap();
        assert!(!reached[window_index(&w, &[0]).unwrap()]);
        for k in 1..=10u64 {
            assert!(reached[window_index(&w, &[k]).unwrap()], "state {k}");
        }
    }
}
