//! Stochastic simulation: exact trajectories (direct method), stationary
//! and quasi-stationary estimators, an exact birth-death solver, and
//! empirical tail fitting.
//!
//! Rate constants are converted to `f64` once per run; everything upstream
//! of this module stays exact. Trajectories are deterministic given
//! `(network, x0, seed, stream, limits)`: the generator is ChaCha8 with the
//! trajectory index as its stream, so batches are reproducible and
//! embarrassingly parallel.
//!
//! Explosion cannot be observed in finite simulation. A trajectory is
//! reported `ExplosionSuspected` on circumstantial evidence only: the event
//! budget fills before the time horizon while the state shows net growth,
//! or the state norm overruns its cap. The threshold analysis owns the
//! verdict; the simulator corroborates.

use crate::model::{ReactionNetwork, State};
use crate::onedim::{compatibility_line, LatticeLine};
use crate::rational::rat_to_f64;
use crate::reach::Window;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Stopping limits for a single trajectory.
#[derive(Debug, Clone)]
pub struct SimLimits {
    pub max_events: u64,
    pub max_time: f64,
    pub max_state_norm: u64,
}

impl Default for SimLimits {
    fn default() -> Self {
        SimLimits {
            max_events: 1_000_000,
            max_time: 100.0,
            max_state_norm: 100_000_000,
        }
    }
}

/// Why a trajectory stopped.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    /// No active reaction (or a user-supplied absorbing state was hit).
    Absorbed,
    /// A limit was reached without evidence of explosion.
    Censored,
    /// Event budget filled with time to spare and net state growth, or the
    /// state norm overran its cap.
    ExplosionSuspected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    pub kind: OutcomeKind,
    pub time: f64,
    pub state: State,
    pub events: u64,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// The particle system lost its last survivor.
    AllParticlesAbsorbed { particles: usize },
    InsufficientSupport { needed: usize, got: usize },
    NotBirthDeath(String),
    NotSummable,
}

impl std::fmt::Display for SimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimError::AllParticlesAbsorbed { particles } => write!(
                f,
                "all {particles} particles absorbed simultaneously; rerun with a larger \
                 particle count"
            ),
            SimError::InsufficientSupport { needed, got } => {
                write!(f, "tail fit needs {needed} support points, got {got}")
            }
            SimError::NotBirthDeath(msg) => write!(f, "not a birth-death structure: {msg}"),
            SimError::NotSummable => write!(f, "stationary weights did not converge"),
        }
    }
}

impl std::error::Error for SimError {}

/// Predicate marking user-designated absorbing states.
pub type AbsorbingFn<'a> = &'a dyn Fn(&[u64]) -> bool;

struct Compiled {
    reactants: Vec<Vec<u64>>,
    vectors: Vec<Vec<i64>>,
    rates: Vec<f64>,
}

impl Compiled {
    fn new(network: &ReactionNetwork) -> Self {
        Compiled {
            reactants: network.reactions().iter().map(|r| r.reactant.0.clone()).collect(),
            vectors: network.reactions().iter().map(|r| r.vector()).collect(),
            rates: network.reactions().iter().map(|r| rat_to_f64(&r.rate)).collect(),
        }
    }

    #[inline]
    fn propensity(&self, i: usize, x: &[u64]) -> f64 {
        let mut acc = self.rates[i];
        for (&y, &xv) in self.reactants[i].iter().zip(x) {
            if xv < y {
                return 0.0;
            }
            for k in 0..y {
                acc *= (xv - k) as f64;
            }
        }
        acc
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
fn exp_variate(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let mut u: f64 = rng.gen();
    if u <= 0.0 {
        u = f64::MIN_POSITIVE;
    }
    -u.ln() / rate
}

/// Core direct-method loop. The recorder sees every dwell interval
/// `(state, from_time, to_time)` clipped to the horizon.
fn run_core<F: FnMut(&[u64], f64, f64)>(
    compiled: &Compiled,
    x0: &[u64],
    rng: &mut ChaCha8Rng,
    limits: &SimLimits,
    absorbing: Option<AbsorbingFn>,
    recorder: &mut F,
) -> (OutcomeKind, f64, Vec<u64>, u64) {
    let mut state = x0.to_vec();
    let mut t = 0.0_f64;
    let mut events = 0u64;
    let mut norm: u64 = state.iter().sum();
    let init_norm: u64 = norm;
    let growth_floor = (4 * init_norm).max(32);
    let mut props = vec![0.0_f64; compiled.rates.len()];

    loop {
        if let Some(pred) = absorbing {
            if pred(&state) {
                recorder(&state, t, limits.max_time);
                return (OutcomeKind::Absorbed, t, state, events);
            }
        }
        let mut total = 0.0;
        for i in 0..props.len() {
            props[i] = compiled.propensity(i, &state);
            total += props[i];
        }
        if total <= 0.0 {
            recorder(&state, t, limits.max_time);
            return (OutcomeKind::Absorbed, t, state, events);
        }
        let dt = exp_variate(rng, total);
        if t + dt >= limits.max_time {
            recorder(&state, t, limits.max_time);
            return (OutcomeKind::Censored, limits.max_time, state, events);
        }
        recorder(&state, t, t + dt);
        t += dt;
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = props.len() - 1;
        for (i, &p) in props.iter().enumerate() {
            if pick < p {
                chosen = i;
                break;
            }
            pick -= p;
        }
        for (s, &w) in state.iter_mut().zip(&compiled.vectors[chosen]) {
            *s = (*s as i64 + w) as u64;
        }
        norm = (norm as i64 + compiled.vectors[chosen].iter().sum::<i64>()) as u64;
        events += 1;

        if norm >= limits.max_state_norm {
            return (OutcomeKind::ExplosionSuspected, t, state, events);
        }
        if events >= limits.max_events {
            let kind = if norm >= growth_floor {
                OutcomeKind::ExplosionSuspected
            } else {
                OutcomeKind::Censored
            };
            return (kind, t, state, events);
        }
    }
}

/// Run one trajectory on stream 0.
pub fn simulate(
    network: &ReactionNetwork,
    x0: &State,
    seed: u64,
    limits: &SimLimits,
) -> TrajectoryOutcome {
    simulate_stream(network, x0, seed, 0, limits)
}

/// Run one trajectory on a given RNG stream (for independent batches).
pub fn simulate_stream(
    network: &ReactionNetwork,
    x0: &State,
    seed: u64,
    stream: u64,
    limits: &SimLimits,
) -> TrajectoryOutcome {
    let compiled = Compiled::new(network);
    let mut rng = rng_for(seed, stream);
    let (kind, time, state, events) =
        run_core(&compiled, &x0.0, &mut rng, limits, None, &mut |_, _, _| {});
    TrajectoryOutcome { kind, time, state: State(state), events, seed, stream }
}

/// Run trajectories on streams `0..count` in parallel.
pub fn simulate_batch(
    network: &ReactionNetwork,
    x0: &State,
    seed: u64,
    count: u64,
    limits: &SimLimits,
) -> Vec<TrajectoryOutcome> {
    (0..count)
        .into_par_iter()
        .map(|stream| simulate_stream(network, x0, seed, stream, limits))
        .collect()
}

/// Empirical probability mass function over first-coordinate values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPMF {
    pub probs: BTreeMap<u64, f64>,
    pub samples: u64,
}

impl EmpiricalPMF {
    pub fn from_weights(weights: BTreeMap<u64, f64>, samples: u64) -> Self {
        let total: f64 = weights.values().sum();
        let probs = if total > 0.0 {
            weights.into_iter().map(|(k, v)| (k, v / total)).collect()
        } else {
            weights
        };
        EmpiricalPMF { probs, samples }
    }

    pub fn prob(&self, k: u64) -> f64 {
        self.probs.get(&k).copied().unwrap_or(0.0)
    }

    /// Total variation distance to another pmf.
    pub fn total_variation(&self, other: &EmpiricalPMF) -> f64 {
        let keys: std::collections::BTreeSet<u64> =
            self.probs.keys().chain(other.probs.keys()).copied().collect();
        0.5 * keys
            .into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum::<f64>()
    }

    /// `value,probability` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,probability\n");
        for (k, p) in &self.probs {
            out.push_str(&format!("{k},{p}\n"));
        }
        out
    }
}

/// Time-weighted occupation measure of the first coordinate on
/// `[burn_in, horizon]`.
pub fn estimate_stationary(
    network: &ReactionNetwork,
    x0: &State,
    seed: u64,
    burn_in: f64,
    horizon: f64,
) -> EmpiricalPMF {
    let compiled = Compiled::new(network);
    let mut rng = rng_for(seed, 0);
    let limits = SimLimits {
        max_events: u64::MAX / 2,
        max_time: horizon,
        max_state_norm: u64::MAX / 2,
    };
    let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
    let mut events = 0u64;
    {
        let mut recorder = |state: &[u64], from: f64, to: f64| {
            let lo = from.max(burn_in);
            let hi = to.min(horizon);
            if hi > lo {
                *weights.entry(state[0]).or_insert(0.0) += hi - lo;
            }
            events += 1;
        };
        let _ = run_core(&compiled, &x0.0, &mut rng, &limits, None, &mut recorder);
    }
    EmpiricalPMF::from_weights(weights, events)
}

/// Quasi-stationary estimate by a particle scheme: `particles` chains run
/// jointly; an absorbed chain restarts from a uniformly chosen survivor.
/// Returns the empirical law of the first coordinate at the horizon.
///
/// `absorbing` extends the built-in rule (zero total propensity); with no
/// absorbing states in range the estimate degenerates to a plain
/// stationary snapshot.
pub fn estimate_qsd(
    network: &ReactionNetwork,
    x0: &State,
    particles: usize,
    seed: u64,
    horizon: f64,
    absorbing: Option<AbsorbingFn>,
) -> Result<EmpiricalPMF, SimError> {
    let compiled = Compiled::new(network);
    let mut rng = rng_for(seed, 0);
    let is_absorbed = |x: &[u64], compiled: &Compiled| -> bool {
        if let Some(pred) = absorbing {
            if pred(x) {
                return true;
            }
        }
        (0..compiled.rates.len()).all(|i| compiled.propensity(i, x) == 0.0)
    };

    let mut states: Vec<Vec<u64>> = vec![x0.0.clone(); particles];
    let mut totals: Vec<f64> = Vec::with_capacity(particles);
    for s in &states {
        let total: f64 = (0..compiled.rates.len()).map(|i| compiled.propensity(i, s)).sum();
        totals.push(total);
    }

    let respawn = |i: usize,
                   states: &mut Vec<Vec<u64>>,
                   totals: &mut Vec<f64>,
                   rng: &mut ChaCha8Rng,
                   compiled: &Compiled|
     -> Result<(), SimError> {
        let alive: Vec<usize> = (0..states.len())
            .filter(|&j| j != i && !is_absorbed(&states[j], compiled))
            .collect();
        if alive.is_empty() {
            return Err(SimError::AllParticlesAbsorbed { particles: states.len() });
        }
        let donor = alive[rng.gen_range(0..alive.len())];
        states[i] = states[donor].clone();
        totals[i] = totals[donor];
        Ok(())
    };

    // Initial absorption check.
    for i in 0..particles {
        if is_absorbed(&states[i], &compiled) {
            respawn(i, &mut states, &mut totals, &mut rng, &compiled)?;
        }
    }

    let mut t = 0.0;
    loop {
        let grand: f64 = totals.iter().sum();
        if grand <= 0.0 {
            return Err(SimError::AllParticlesAbsorbed { particles });
        }
        let dt = exp_variate(&mut rng, grand);
        if t + dt >= horizon {
            break;
        }
        t += dt;
        // Pick a particle proportional to its total rate.
        let mut pick = rng.gen::<f64>() * grand;
        let mut who = particles - 1;
        for (i, &tot) in totals.iter().enumerate() {
            if pick < tot {
                who = i;
                break;
            }
            pick -= tot;
        }
        // Fire one reaction inside that particle.
        let state = &mut states[who];
        let mut pick_r = rng.gen::<f64>() * totals[who];
        let mut chosen = compiled.rates.len() - 1;
        for i in 0..compiled.rates.len() {
            let p = compiled.propensity(i, state);
            if pick_r < p {
                chosen = i;
                break;
            }
            pick_r -= p;
        }
        for (s, &w) in state.iter_mut().zip(&compiled.vectors[chosen]) {
            *s = (*s as i64 + w) as u64;
        }
        totals[who] = (0..compiled.rates.len())
            .map(|i| compiled.propensity(i, &states[who]))
            .sum();
        if is_absorbed(&states[who], &compiled) {
            respawn(who, &mut states, &mut totals, &mut rng, &compiled)?;
        }
    }

    let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
    for s in &states {
        *weights.entry(s[0]).or_insert(0.0) += 1.0;
    }
    Ok(EmpiricalPMF::from_weights(weights, particles as u64))
}

/// Dense-iteration oracle for quasi-stationary distributions: the
/// principal left eigenvector of the generator truncated to the
/// non-absorbed states of `[0, cap]^d`, as a first-coordinate marginal.
pub fn truncated_qsd(
    network: &ReactionNetwork,
    cap: u64,
    absorbing: Option<AbsorbingFn>,
) -> EmpiricalPMF {
    let d = network.dim();
    let window = Window::cube(d, cap);
    let n = window.state_count().expect("window fits in u64") as usize;
    let compiled = Compiled::new(network);

    let mut states: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut x = vec![0u64; d];
    for _ in 0..n {
        states.push(x.clone());
        for j in (0..d).rev() {
            if x[j] < cap {
                x[j] += 1;
                break;
            }
            x[j] = 0;
        }
    }
    let absorbed: Vec<bool> = states
        .iter()
        .map(|s| {
            if let Some(pred) = absorbing {
                if pred(s) {
                    return true;
                }
            }
            (0..compiled.rates.len()).all(|i| compiled.propensity(i, s) == 0.0)
        })
        .collect();

    // Transitions within the transient block; jumps to absorbed states or
    // out of the window are killing.
    let mut trans: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut out_rate = vec![0.0_f64; n];
    let mut max_rate = 0.0_f64;
    for (idx, s) in states.iter().enumerate() {
        if absorbed[idx] {
            continue;
        }
        let mut total = 0.0;
        for i in 0..compiled.rates.len() {
            let p = compiled.propensity(i, s);
            if p == 0.0 {
                continue;
            }
            total += p;
            if let Some(next) = crate::model::add_jump(s, &compiled.vectors[i]) {
                if window.contains(&next) {
                    let nidx = crate::reach::window_index(&window, &next).unwrap();
                    if !absorbed[nidx] {
                        trans[idx].push((nidx, p));
                    }
                }
            }
        }
        out_rate[idx] = total;
        max_rate = max_rate.max(total);
    }

    let h = 0.9 / max_rate.max(1e-12);
    let mut nu: Vec<f64> = absorbed.iter().map(|&a| if a { 0.0 } else { 1.0 }).collect();
    let mass: f64 = nu.iter().sum();
    for v in &mut nu {
        *v /= mass;
    }
    for _ in 0..200_000 {
        let mut next = vec![0.0_f64; n];
        for idx in 0..n {
            if nu[idx] == 0.0 {
                continue;
            }
            next[idx] += nu[idx] * (1.0 - h * out_rate[idx]);
            for &(to, p) in &trans[idx] {
                next[to] += nu[idx] * h * p;
            }
        }
        let total: f64 = next.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut delta = 0.0;
        for (idx, v) in next.iter_mut().enumerate() {
            *v /= total;
            delta += (*v - nu[idx]).abs();
        }
        nu = next;
        if delta < 1e-13 {
            break;
        }
    }

    let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
    for (idx, s) in states.iter().enumerate() {
        if nu[idx] > 0.0 {
            *weights.entry(s[0]).or_insert(0.0) += nu[idx];
        }
    }
    EmpiricalPMF::from_weights(weights, n as u64)
}

/// Exact stationary distribution of a birth-death walk on a lattice line,
/// by the detailed-balance product formula, truncated at relative tail
/// mass `1e-15` and normalized. Keyed by the first coordinate.
pub fn bdp_stationary_exact(
    network: &ReactionNetwork,
    c: &State,
) -> Result<EmpiricalPMF, SimError> {
    let line: LatticeLine = compatibility_line(network, c)
        .map_err(|e| SimError::NotBirthDeath(e.to_string()))?;
    let pivot = line.direction.support[0];
    let step_pivot = line.step()[pivot];

    // Every jump must be one lattice step up or down.
    let mut up_reactions = Vec::new();
    let mut down_reactions = Vec::new();
    for (i, r) in network.reactions().iter().enumerate() {
        let w = r.vector();
        let m = w[pivot] / step_pivot;
        match m {
            1 => up_reactions.push(i),
            -1 => down_reactions.push(i),
            other => {
                return Err(SimError::NotBirthDeath(format!(
                    "jump of {other} lattice steps"
                )))
            }
        }
    }
    if down_reactions.is_empty() {
        return Err(SimError::NotBirthDeath("no downward jumps".to_string()));
    }

    let rate_at = |reactions: &[usize], t: i64| -> Option<crate::rational::Rat> {
        let x = line.point(t)?;
        let mut acc = crate::rational::rat(0);
        for &i in reactions {
            acc += network.reactions()[i].propensity(&x);
        }
        Some(acc)
    };

    const SCAN: i64 = 100_000;
    let mut t_up = None;
    let mut t_down = None;
    for t in line.t_min..line.t_min + SCAN {
        if line.point(t).is_none() {
            break;
        }
        if t_up.is_none() {
            if let Some(u) = rate_at(&up_reactions, t) {
                if !u.is_zero() {
                    t_up = Some(t);
                }
            }
        }
        if t_down.is_none() {
            if let Some(dn) = rate_at(&down_reactions, t) {
                if !dn.is_zero() {
                    t_down = Some(t);
                }
            }
        }
        if t_up.is_some() && t_down.is_some() {
            break;
        }
    }
    let (Some(t_up), Some(t_down)) = (t_up, t_down) else {
        return Err(SimError::NotBirthDeath("one-sided walk on the line".to_string()));
    };
    if t_down <= t_up {
        return Err(SimError::NotBirthDeath(
            "no closed class floor on the line".to_string(),
        ));
    }
    let floor = (t_down - 1).max(line.t_min);

    let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
    let mut w = 1.0_f64;
    let mut sum = 0.0_f64;
    let mut t = floor;
    let mut truncated_tail = 0.0_f64;
    loop {
        let point = line.point(t).ok_or(SimError::NotSummable)?;
        *weights.entry(point.0[0]).or_insert(0.0) += w;
        sum += w;
        let up = rate_at(&up_reactions, t).ok_or(SimError::NotSummable)?;
        let down_next = rate_at(&down_reactions, t + 1);
        let Some(down_next) = down_next else { break };
        if up.is_zero() {
            break;
        }
        let ratio = rat_to_f64(&(up / down_next));
        w *= ratio;
        // Stop once the geometric bound puts the remaining mass below the
        // target resolution; account for it so survival stays exact to
        // first order.
        if (ratio < 0.95 && w / (1.0 - ratio) < 1e-15 * sum) || w < 1e-305 {
            truncated_tail = (w / (1.0 - ratio.min(0.999))).max(0.0);
            break;
        }
        if t - floor > 5_000_000 {
            return Err(SimError::NotSummable);
        }
        t += 1;
    }
    let norm = sum + truncated_tail;
    let probs = weights.into_iter().map(|(k, v)| (k, v / norm)).collect();
    Ok(EmpiricalPMF { probs, samples: 0 })
}

/// Shape families for empirical tail fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailShape {
    /// `log T(x) ~ c + b x - a x log x` (super-exponential).
    CmpLike,
    /// `log T(x) ~ c - a x` (exponential).
    Geometric,
    /// `log T(x) ~ c - a log x` (power law).
    PowerLaw,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ModelFit {
    pub shape: TailShape,
    /// The decay coefficient `a` of the shape.
    pub decay: f64,
    pub sse: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TailFit {
    pub best: TailShape,
    pub fits: Vec<ModelFit>,
}

/// Least-squares fit of the log survival function against the three
/// shapes. The best model is chosen by residual, preferring fewer
/// parameters on near ties.
pub fn fit_tail(pmf: &EmpiricalPMF) -> Result<TailFit, SimError> {
    // Survival T(x) = P(X >= x). Mass not listed in the pmf (a truncated
    // reference distribution) is attributed to the far tail, so exact
    // truncations keep their exact survival; empirical pmfs sum to one and
    // are unaffected.
    let entries: Vec<(u64, f64)> = pmf.probs.iter().map(|(&k, &p)| (k, p)).collect();
    let total: f64 = entries.iter().map(|&(_, p)| p).sum();
    // Empirical pmfs carry a sample count; survival levels near the
    // sampling resolution are noise and would bias the shape comparison.
    let noise_floor = if pmf.samples > 0 {
        (50.0 / pmf.samples as f64).max(1e-290)
    } else {
        1e-290
    };
    let mut survival: Vec<(f64, f64)> = Vec::new();
    let mut acc = (1.0 - total).max(0.0);
    for &(k, p) in entries.iter().rev() {
        acc += p;
        if k >= 1 && acc > noise_floor && acc < 1.0 - 1e-12 {
            survival.push((k as f64, acc.ln()));
        }
    }
    survival.reverse();
    if survival.len() < 10 {
        return Err(SimError::InsufficientSupport { needed: 10, got: survival.len() });
    }

    let design = |shape: TailShape, x: f64| -> Vec<f64> {
        match shape {
            TailShape::CmpLike => vec![1.0, x, x * x.ln()],
            TailShape::Geometric => vec![1.0, x],
            TailShape::PowerLaw => vec![1.0, x.ln()],
        }
    };
    let fit_one = |shape: TailShape| -> ModelFit {
        let cols = design(shape, 1.0).len();
        // Normal equations.
        let mut ata = vec![vec![0.0_f64; cols]; cols];
        let mut atb = vec![0.0_f64; cols];
        for &(x, y) in &survival {
            let row = design(shape, x);
            for i in 0..cols {
                for j in 0..cols {
                    ata[i][j] += row[i] * row[j];
                }
                atb[i] += row[i] * y;
            }
        }
        let coeffs = solve_dense(&mut ata, &mut atb);
        let mut sse = 0.0;
        for &(x, y) in &survival {
            let row = design(shape, x);
            let pred: f64 = row.iter().zip(&coeffs).map(|(r, c)| r * c).sum();
            sse += (y - pred) * (y - pred);
        }
        let decay = match shape {
            TailShape::CmpLike => -coeffs[2],
            TailShape::Geometric => -coeffs[1],
            TailShape::PowerLaw => -coeffs[1],
        };
        ModelFit { shape, decay, sse }
    };

    let fits = vec![
        fit_one(TailShape::CmpLike),
        fit_one(TailShape::Geometric),
        fit_one(TailShape::PowerLaw),
    ];
    let params = |s: TailShape| match s {
        TailShape::CmpLike => 3,
        _ => 2,
    };
    // Prefer the two-parameter shapes unless the extra parameter buys a
    // residual reduction beyond what sampling noise produces. The shapes
    // separate by orders of magnitude on clean data, while finite-horizon
    // tail undersampling bends log survival by a factor of a few.
    let best_sse = fits.iter().map(|f| f.sse).fold(f64::INFINITY, f64::min);
    let tolerance = best_sse * 10.0 + 1e-9;
    let best = fits
        .iter()
        .filter(|f| f.sse <= tolerance)
        .min_by(|a, b| {
            params(a.shape)
                .cmp(&params(b.shape))
                .then(a.sse.partial_cmp(&b.sse).unwrap())
        })
        .map(|f| f.shape)
        .unwrap();
    Ok(TailFit { best, fits })
}

/// Gaussian elimination with partial pivoting (tiny systems only).
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let head = a[col][col];
        if head.abs() < 1e-300 {
            continue;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / head;
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    (0..n)
        .map(|i| if a[i][i].abs() < 1e-300 { 0.0 } else { b[i] / a[i][i] })
        .collect()
}

/// Trajectory CSV (`time,species...` per event), capped at `max_rows`
/// recorded transitions.
pub fn trajectory_csv(
    network: &ReactionNetwork,
    x0: &State,
    seed: u64,
    limits: &SimLimits,
    max_rows: u64,
) -> (TrajectoryOutcome, String) {
    let compiled = Compiled::new(network);
    let mut rng = rng_for(seed, 0);
    let mut csv = String::from("time");
    for s in network.species() {
        csv.push(',');
        csv.push_str(s);
    }
    csv.push('\n');
    let mut rows = 0u64;
    let mut recorder = |state: &[u64], from: f64, _to: f64| {
        if rows <= max_rows {
            csv.push_str(&format!("{from}"));
            for v in state {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
            rows += 1;
        }
    };
    let (kind, time, state, events) =
        run_core(&compiled, &x0.0, &mut rng, limits, None, &mut recorder);
    (
        TrajectoryOutcome { kind, time, state: State(state), events, seed, stream: 0 },
        csv,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn pure_death() -> ReactionNetwork {
        parse("S -> 0 @ 1").unwrap()
    }

    #[test]
    fn pure_death_absorbs_in_exactly_five_events() {
        let n = pure_death();
        for seed in 0..20 {
            let out = simulate(&n, &State(vec![5]), seed, &SimLimits::default());
            assert_eq!(out.kind, OutcomeKind::Absorbed);
            assert_eq!(out.events, 5);
            assert_eq!(out.state.0, vec![0]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let n = parse("S <-> 2 S @ 1, 1\n2 S -> 3 S @ 1\n3 S -> S @ 2").unwrap();
        let limits = SimLimits { max_events: 5_000, ..SimLimits::default() };
        let a = simulate(&n, &State(vec![3]), 42, &limits);
        let b = simulate(&n, &State(vec![3]), 42, &limits);
        assert_eq!(a, b);
        // Bit-for-bit identical event sequences.
        let (_, csv_a) = trajectory_csv(&n, &State(vec![3]), 42, &limits, u64::MAX);
        let (_, csv_b) = trajectory_csv(&n, &State(vec![3]), 42, &limits, u64::MAX);
        assert_eq!(csv_a, csv_b);
        let c = simulate_stream(&n, &State(vec![3]), 42, 1, &limits);
        assert_ne!(a.events, 0);
        // Different stream, different path (with overwhelming probability).
        assert!(a.time != c.time || a.state != c.state || a.events != c.events);
    }

    #[test]
    fn batch_matches_individual_streams() {
        let n = parse("0 <-> S @ 2, 1").unwrap();
        let limits = SimLimits { max_time: 5.0, ..SimLimits::default() };
        let batch = simulate_batch(&n, &State(vec![0]), 7, 8, &limits);
        for (stream, out) in batch.iter().enumerate() {
            let solo = simulate_stream(&n, &State(vec![0]), 7, stream as u64, &limits);
            assert_eq!(*out, solo);
        }
    }

    #[test]
    fn explosion_heuristic_never_fires_on_pure_death() {
        let n = pure_death();
        for seed in 0..100 {
            let out = simulate(&n, &State(vec![50]), seed, &SimLimits::default());
            assert_eq!(out.kind, OutcomeKind::Absorbed, "seed {seed}");
        }
        // Even with a tiny event budget the outcome is censoring.
        let tight = SimLimits { max_events: 3, ..SimLimits::default() };
        for seed in 0..20 {
            let out = simulate(&n, &State(vec![50]), seed, &tight);
            assert_eq!(out.kind, OutcomeKind::Censored, "seed {seed}");
        }
    }

    #[test]
    fn ballistic_growth_trips_the_norm_cap() {
        // 0 <-> S @ 1,3 with S -> 2S and 2S -> 3S: quadratic upward drift,
        // so the state runs away ballistically and crosses any norm cap
        // long before the time horizon.
        let n = parse("0 <-> S @ 1, 3\nS -> 2 S @ 1\n2 S -> 3 S @ 1").unwrap();
        let limits = SimLimits {
            max_events: 10_000_000,
            max_time: 50.0,
            max_state_norm: 100_000,
        };
        for seed in 0..10 {
            let out = simulate(&n, &State(vec![10]), seed, &limits);
            assert_eq!(out.kind, OutcomeKind::ExplosionSuspected, "seed {seed}");
            assert!(out.state.0[0] >= limits.max_state_norm);
            assert!(out.time < limits.max_time);
        }
    }

    #[test]
    fn birth_death_stationary_is_poisson() {
        // 0 <-> S @ lambda=3, mu=1: stationary Poisson(3).
        let n = parse("0 <-> S @ 3, 1").unwrap();
        let exact = bdp_stationary_exact(&n, &State(vec![0])).unwrap();
        let mut expected = 3.0_f64.powi(0) * (-3.0_f64).exp();
        assert!((exact.prob(0) - expected).abs() < 1e-12);
        for k in 1..20u64 {
            expected *= 3.0 / k as f64;
            assert!((exact.prob(k) - expected).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn bdp_supply_chain_has_exact_half_ratios() {
        // 0 <-> S @ 1,2 with S -> 2S @ 1: up(k) = 1 + k, down(k) = 2k, so
        // successive stationary weights halve exactly.
        let n = parse("0 <-> S @ 1, 2\nS -> 2 S @ 1").unwrap();
        let pmf = bdp_stationary_exact(&n, &State(vec![0])).unwrap();
        for k in 0..12u64 {
            let ratio = pmf.prob(k + 1) / pmf.prob(k);
            assert!((ratio - 0.5).abs() < 1e-12, "ratio at {k} = {ratio}");
        }
    }

    #[test]
    fn bdp_rejects_long_jumps() {
        let cycle = parse("S -> 2 S @ 1\n2 S -> 3 S @ 1\n3 S -> S @ 1").unwrap();
        assert!(matches!(
            bdp_stationary_exact(&cycle, &State(vec![0])),
            Err(SimError::NotBirthDeath(_))
        ));
    }

    #[test]
    fn bdp_floor_skips_unreachable_low_states() {
        // S <-> 2S: the closed class is the positive integers.
        let n = parse("S <-> 2 S @ 1, 3").unwrap();
        let pmf = bdp_stationary_exact(&n, &State(vec![0])).unwrap();
        assert_eq!(pmf.prob(0), 0.0);
        assert!(pmf.prob(1) > 0.0);
    }

    #[test]
    fn stationary_estimate_converges_to_exact_bdp() {
        let n = parse("0 <-> S @ 3, 1").unwrap();
        let exact = bdp_stationary_exact(&n, &State(vec![0])).unwrap();
        let short = estimate_stationary(&n, &State(vec![0]), 11, 10.0, 2_000.0);
        let long = estimate_stationary(&n, &State(vec![0]), 11, 10.0, 40_000.0);
        let tv_short = exact.total_variation(&short);
        let tv_long = exact.total_variation(&long);
        assert!(tv_long < tv_short, "tv {tv_long} !< {tv_short}");
        assert!(tv_long < 0.02, "tv {tv_long}");
    }

    #[test]
    fn stationary_estimate_of_pure_death_is_degenerate() {
        let n = pure_death();
        let pmf = estimate_stationary(&n, &State(vec![5]), 3, 10.0, 100.0);
        assert!((pmf.prob(0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pmf_probabilities_sum_to_one() {
        let n = parse("0 <-> S @ 3, 1").unwrap();
        let pmf = estimate_stationary(&n, &State(vec![0]), 5, 1.0, 500.0);
        let total: f64 = pmf.probs.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qsd_particle_estimate_matches_truncated_eigenvector() {
        // Subcritical branching with absorption at 0.
        let n = parse("S -> 0 @ 1\nS -> 2 S @ 1/2\n2 S -> S @ 1").unwrap();
        let oracle = truncated_qsd(&n, 60, None);
        let est = estimate_qsd(&n, &State(vec![3]), 600, 9, 60.0, None).unwrap();
        let tv = oracle.total_variation(&est);
        assert!(tv < 0.05, "tv = {tv}");
    }

    #[test]
    fn qsd_single_particle_errors_on_first_absorption() {
        let n = pure_death();
        let err = estimate_qsd(&n, &State(vec![2]), 1, 1, 100.0, None).unwrap_err();
        assert!(matches!(err, SimError::AllParticlesAbsorbed { particles: 1 }));
    }

    fn poisson_pmf(lambda: f64, upto: u64) -> EmpiricalPMF {
        let mut probs = BTreeMap::new();
        let mut p = (-lambda).exp();
        probs.insert(0, p);
        for k in 1..=upto {
            p *= lambda / k as f64;
            probs.insert(k, p);
        }
        EmpiricalPMF { probs, samples: 0 }
    }

    fn geometric_pmf(q: f64, upto: u64) -> EmpiricalPMF {
        let mut probs = BTreeMap::new();
        let mut p = 1.0 - q;
        for k in 0..=upto {
            probs.insert(k, p);
            p *= q;
        }
        EmpiricalPMF { probs, samples: 0 }
    }

    fn zeta_pmf(s: f64, upto: u64) -> EmpiricalPMF {
        let norm: f64 = (1..=200_000u64).map(|k| (k as f64).powf(-s)).sum();
        let probs = (1..=upto)
            .map(|k| (k, (k as f64).powf(-s) / norm))
            .collect();
        EmpiricalPMF { probs, samples: 0 }
    }

    #[test]
    fn tail_fit_recovers_the_three_reference_shapes() {
        let fit = fit_tail(&poisson_pmf(5.0, 40)).unwrap();
        assert_eq!(fit.best, TailShape::CmpLike);

        let fit = fit_tail(&geometric_pmf(0.5, 40)).unwrap();
        assert_eq!(fit.best, TailShape::Geometric);
        let geo = fit.fits.iter().find(|f| f.shape == TailShape::Geometric).unwrap();
        assert!((geo.decay - 0.5_f64.ln().abs()).abs() < 1e-6);

        let fit = fit_tail(&zeta_pmf(3.0, 60)).unwrap();
        assert_eq!(fit.best, TailShape::PowerLaw);
    }

    #[test]
    fn tail_fit_requires_support() {
        let small = poisson_pmf(1.0, 5);
        assert!(matches!(
            fit_tail(&small),
            Err(SimError::InsufficientSupport { .. })
        ));
    }

    #[test]
    fn trajectory_csv_shape() {
        let n = pure_death();
        let (out, csv) = trajectory_csv(
            &n,
            &State(vec![3]),
            1,
            &SimLimits::default(),
            1000,
        );
        assert_eq!(out.kind, OutcomeKind::Absorbed);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "time,S");
        // Initial state plus one row per event... plus the absorbed dwell row.
        assert_eq!(lines.len(), 1 + 3 + 1);
        assert!(lines[1].starts_with("0,3"));
    }
}
