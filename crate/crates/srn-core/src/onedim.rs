//! Analysis of networks whose jump vectors span a line.
//!
//! On each compatibility line the chain is a one-dimensional walk indexed
//! by the first coordinate. Its long-run behaviour is decided by four
//! exact rationals: the two leading drift coefficients, half the leading
//! second-moment coefficient, and their difference. These are read off as
//! polynomial coefficients after an exact substitution along the line;
//! no numeric limits are taken anywhere.

use crate::lattice::{self, PrimitiveDirection};
use crate::model::{jump_structure, ReactionNetwork, State};
use crate::poly::Poly;
use crate::rational::{rat, Rat};
use crate::TriState;
use num_traits::{Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OneDimError {
    EmptyNetwork,
    NotOneDimensional { span_dim: usize },
    /// The first species is a catalyst (or off the direction's support).
    /// Moving the suggested species first would restore the hypothesis.
    FirstSpeciesCatalyst { suggested_first: Option<usize> },
    /// No drift-decreasing or no drift-increasing reactions.
    OneSidedDrift { missing_negative: bool },
    /// The direction has a negative coordinate (conservative network).
    Conservative,
    /// A state expected on the lattice line has a non-integral index.
    NonIntegralIndex { state: Vec<u64> },
}

impl std::fmt::Display for OneDimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OneDimError::EmptyNetwork => write!(f, "network has no reactions"),
            OneDimError::NotOneDimensional { span_dim } => {
                write!(f, "jump vectors span dimension {span_dim}, not 1")
            }
            OneDimError::FirstSpeciesCatalyst { suggested_first } => match suggested_first {
                Some(j) => write!(
                    f,
                    "first species is a catalyst; reorder species so index {j} comes first"
                ),
                None => write!(f, "first species is a catalyst"),
            },
            OneDimError::OneSidedDrift { missing_negative } => {
                if *missing_negative {
                    write!(f, "no drift-decreasing reactions")
                } else {
                    write!(f, "no drift-increasing reactions")
                }
            }
            OneDimError::Conservative => {
                write!(f, "direction has a negative coordinate (conservative network)")
            }
            OneDimError::NonIntegralIndex { state } => {
                write!(f, "state {state:?} is not on the lattice line")
            }
        }
    }
}

impl std::error::Error for OneDimError {}

/// Hypotheses and semi-norm data for a one-dimensional network.
#[derive(Debug, Clone)]
pub struct OneDimProfile {
    /// Common direction of all jumps (gcd of the jump set).
    pub direction: PrimitiveDirection,
    /// Species whose count is required but unchanged in some reaction.
    pub catalysts: Vec<usize>,
    /// Max reactant semi-norm over all reactions (sum over the support).
    pub r_norm: u64,
    /// Same, restricted to drift-increasing reactions.
    pub r_plus: Option<u64>,
    /// Same, restricted to drift-decreasing reactions.
    pub r_minus: Option<u64>,
    pub h2_ok: bool,
    pub h3_ok: bool,
    pub h4_ok: bool,
    pub weakly_reversible: bool,
}

impl OneDimProfile {
    fn require_h3(&self) -> Result<(), OneDimError> {
        if !self.h3_ok {
            return Err(OneDimError::OneSidedDrift {
                missing_negative: self.r_minus.is_none(),
            });
        }
        Ok(())
    }

    fn require_h4(&self) -> Result<(), OneDimError> {
        if !self.h4_ok {
            return Err(OneDimError::Conservative);
        }
        Ok(())
    }
}

fn semi_norm(y: &[u64], support: &[usize]) -> u64 {
    support.iter().map(|&j| y[j]).sum()
}

/// Sign of a reaction against the direction: +1 drift-increasing, -1
/// drift-decreasing.
fn reaction_sign(vector: &[i64], direction: &[i64]) -> i64 {
    let dot: i128 = vector
        .iter()
        .zip(direction)
        .map(|(&a, &b)| a as i128 * b as i128)
        .sum();
    dot.signum() as i64
}

/// Compute the one-dimensional profile of a network.
pub fn profile(network: &ReactionNetwork) -> Result<OneDimProfile, OneDimError> {
    if network.reactions().is_empty() {
        return Err(OneDimError::EmptyNetwork);
    }
    let vectors = network.jump_vectors();
    let direction = match lattice::gcd_vector_set(&vectors) {
        Ok(Some(d)) => d,
        Ok(None) => {
            return Err(OneDimError::NotOneDimensional {
                span_dim: lattice::span_dimension(&vectors),
            })
        }
        Err(_) => return Err(OneDimError::EmptyNetwork),
    };

    let mut catalysts: Vec<usize> = Vec::new();
    for r in network.reactions() {
        for j in 0..network.dim() {
            if r.reactant.0[j] == r.product.0[j] && r.reactant.0[j] > 0 && !catalysts.contains(&j)
            {
                catalysts.push(j);
            }
        }
    }
    catalysts.sort();

    if catalysts.contains(&0) || direction.vector[0] == 0 {
        return Err(OneDimError::FirstSpeciesCatalyst {
            suggested_first: direction.support.first().copied(),
        });
    }

    let mut r_norm = 0u64;
    let mut r_plus: Option<u64> = None;
    let mut r_minus: Option<u64> = None;
    for r in network.reactions() {
        let norm = semi_norm(&r.reactant.0, &direction.support);
        r_norm = r_norm.max(norm);
        match reaction_sign(&r.vector(), &direction.vector) {
            1 => r_plus = Some(r_plus.map_or(norm, |m: u64| m.max(norm))),
            -1 => r_minus = Some(r_minus.map_or(norm, |m: u64| m.max(norm))),
            _ => unreachable!("jump orthogonal to its own direction"),
        }
    }

    let h3_ok = r_plus.is_some() && r_minus.is_some();
    let h4_ok = direction.vector.iter().all(|&c| c >= 0);
    Ok(OneDimProfile {
        weakly_reversible: crate::model::is_weakly_reversible(network),
        direction,
        catalysts,
        r_norm,
        r_plus,
        r_minus,
        h2_ok: true,
        h3_ok,
        h4_ok,
    })
}

/// A stochastic compatibility class: the lattice line through `base` with
/// the primitive step of `direction`, intersected with the ambient space.
/// Points are indexed by integers `t` with `point(t) = base + t * step`.
#[derive(Debug, Clone)]
pub struct LatticeLine {
    pub base: State,
    pub direction: PrimitiveDirection,
    step: Vec<i64>,
    pub t_min: i64,
    /// `None` when the line is unbounded upward.
    pub t_max: Option<i64>,
}

impl LatticeLine {
    pub fn step(&self) -> &[i64] {
        &self.step
    }

    pub fn point(&self, t: i64) -> Option<State> {
        if t < self.t_min {
            return None;
        }
        if let Some(m) = self.t_max {
            if t > m {
                return None;
            }
        }
        let coords: Vec<u64> = self
            .base
            .0
            .iter()
            .zip(&self.step)
            .map(|(&c, &s)| (c as i64 + t * s) as u64)
            .collect();
        Some(State(coords))
    }

    /// Index of a state on the line, or an error when it is off the line.
    pub fn index_of(&self, x: &[u64]) -> Result<i64, OneDimError> {
        let err = || OneDimError::NonIntegralIndex { state: x.to_vec() };
        let pivot = self.direction.support[0];
        let diff = x[pivot] as i64 - self.base.0[pivot] as i64;
        if diff % self.step[pivot] != 0 {
            return Err(err());
        }
        let t = diff / self.step[pivot];
        for j in 0..x.len() {
            if x[j] as i64 != self.base.0[j] as i64 + t * self.step[j] {
                return Err(err());
            }
        }
        Ok(t)
    }

    /// Residue class of an index: `1 + (t mod coord_gcd)`, in `1..=coord_gcd`.
    pub fn residue(&self, t: i64) -> u32 {
        1 + t.rem_euclid(self.direction.coord_gcd as i64) as u32
    }
}

/// The compatibility line through `c` for a network with a well-defined
/// jump direction.
pub fn compatibility_line(
    network: &ReactionNetwork,
    c: &State,
) -> Result<LatticeLine, OneDimError> {
    if network.reactions().is_empty() {
        return Err(OneDimError::EmptyNetwork);
    }
    let vectors = network.jump_vectors();
    let direction = match lattice::gcd_vector_set(&vectors) {
        Ok(Some(d)) => d,
        _ => {
            return Err(OneDimError::NotOneDimensional {
                span_dim: lattice::span_dimension(&vectors),
            })
        }
    };
    Ok(line_through(c, direction))
}

fn line_through(c: &State, direction: PrimitiveDirection) -> LatticeLine {
    let step = direction.step();
    let mut t_min = i64::MIN;
    let mut t_max: Option<i64> = None;
    for (j, &s) in step.iter().enumerate() {
        let cj = c.0[j] as i64;
        if s > 0 {
            // c_j + t s >= 0  =>  t >= -floor(c_j / s)
            t_min = t_min.max(-(cj.div_euclid(s)));
        } else if s < 0 {
            // c_j + t s >= 0  =>  t <= floor(c_j / -s)
            let bound = cj.div_euclid(-s);
            t_max = Some(t_max.map_or(bound, |m| m.min(bound)));
        }
    }
    if t_min == i64::MIN {
        t_min = 0; // no positive step: degenerate, base only
    }
    LatticeLine { base: c.clone(), direction, step, t_min, t_max }
}

/// First line index whose point dominates some generator, under a
/// non-negative step (membership is then monotone in the index).
fn first_index_in_upset(line: &LatticeLine, generators: &[Vec<u64>]) -> Option<i64> {
    let mut best: Option<i64> = None;
    'gens: for g in generators {
        let mut t_g = line.t_min;
        for j in 0..g.len() {
            let cj = line.base.0[j] as i64;
            let s = line.step[j];
            let need = g[j] as i64;
            if s == 0 {
                if cj < need {
                    continue 'gens;
                }
            } else {
                // c_j + t s >= need  =>  t >= ceil((need - c_j)/s), s > 0.
                let num = need - cj;
                let t_j = num.div_euclid(s) + if num.rem_euclid(s) != 0 { 1 } else { 0 };
                t_g = t_g.max(t_j);
            }
        }
        if let Some(m) = line.t_max {
            if t_g > m {
                continue 'gens;
            }
        }
        best = Some(best.map_or(t_g, |b: i64| b.min(t_g)));
    }
    best
}

/// Exact drift and second-moment polynomials of the first coordinate
/// along the line through `c`.
///
/// Every reactant coordinate is substituted by its affine expression in
/// `x_1` on the line (`c_j` for catalysts), the falling factorials are
/// expanded exactly, and reactions are summed weighted by the first
/// coordinate of their jump (squared for the second moment).
pub fn directional_polynomials(
    network: &ReactionNetwork,
    profile: &OneDimProfile,
    c: &State,
) -> Result<(Poly, Poly), OneDimError> {
    let dir = &profile.direction.vector;
    let dir1 = rat(dir[0]);
    let mut drift = Poly::zero();
    let mut second = Poly::zero();
    for r in network.reactions() {
        let mut weight = Poly::constant(r.rate.clone());
        for (j, &yj) in r.reactant.0.iter().enumerate() {
            if yj == 0 {
                continue;
            }
            if dir[j] == 0 {
                // Catalyst coordinate: frozen at c_j on the whole line.
                let mut k = rat(1);
                let cj = rat(c.0[j] as i64);
                for step in 0..yj {
                    k *= cj.clone() - rat(step as i64);
                }
                weight = weight.scale(&k);
            } else {
                // x_j = c_j + (dir_j / dir_1)(x_1 - c_1), affine in x_1.
                let slope = rat(dir[j]) / dir1.clone();
                let intercept = rat(c.0[j] as i64) - slope.clone() * rat(c.0[0] as i64);
                for step in 0..yj {
                    weight = weight
                        * Poly::linear(intercept.clone() - rat(step as i64), slope.clone());
                }
            }
        }
        let w1 = r.vector()[0];
        drift += weight.scale(&rat(w1));
        second += weight.scale(&rat(w1 * w1));
    }
    Ok((drift, second))
}

/// The four threshold parameters at `c`, as exact rationals.
///
/// `r_norm` and the sign-split norms are line-effective: a reaction whose
/// reactant needs more of a catalyst species than the line carries never
/// fires on the line, so it is excluded from the norms that set the
/// degree of the directional limits. Without catalysts (in particular in
/// one dimension) these coincide with the profile's global norms.
#[derive(Debug, Clone)]
pub struct ThresholdParams {
    pub base: State,
    pub r_norm: u64,
    /// Max reactant norm over drift-increasing reactions live on the line.
    pub r_plus: Option<u64>,
    /// Max reactant norm over drift-decreasing reactions live on the line.
    pub r_minus: Option<u64>,
    pub alpha: Rat,
    pub gamma: Rat,
    pub theta: Rat,
    pub beta: Rat,
    pub drift: Poly,
    pub second_moment: Poly,
}

/// A reaction fires somewhere (and then for all large indices) on the line
/// through `c` exactly when the line carries enough of every catalyst
/// coordinate.
fn live_on_line(reactant: &[u64], direction: &[i64], c: &State) -> bool {
    reactant
        .iter()
        .zip(direction)
        .zip(&c.0)
        .all(|((&y, &dir), &cj)| dir != 0 || cj >= y)
}

pub fn threshold_params(
    network: &ReactionNetwork,
    profile: &OneDimProfile,
    c: &State,
) -> Result<ThresholdParams, OneDimError> {
    // The coefficients only carry their threshold meaning when both drift
    // directions are present and the compatibility classes are unbounded.
    profile.require_h3()?;
    profile.require_h4()?;
    let (drift, second_moment) = directional_polynomials(network, profile, c)?;
    let dir = &profile.direction.vector;
    let mut r_norm = 0u64;
    let mut r_plus: Option<u64> = None;
    let mut r_minus: Option<u64> = None;
    for reaction in network.reactions() {
        if !live_on_line(&reaction.reactant.0, dir, c) {
            continue;
        }
        let norm = semi_norm(&reaction.reactant.0, &profile.direction.support);
        r_norm = r_norm.max(norm);
        match reaction_sign(&reaction.vector(), dir) {
            1 => r_plus = Some(r_plus.map_or(norm, |m: u64| m.max(norm))),
            -1 => r_minus = Some(r_minus.map_or(norm, |m: u64| m.max(norm))),
            _ => unreachable!("jump orthogonal to its own direction"),
        }
    }
    let r = r_norm as usize;
    let alpha = drift.coeff(r);
    let gamma = if r >= 1 { drift.coeff(r - 1) } else { rat(0) };
    let theta = second_moment.coeff(r) / rat(2);
    let beta = gamma.clone() - theta.clone();
    Ok(ThresholdParams {
        base: c.clone(),
        r_norm,
        r_plus,
        r_minus,
        alpha,
        gamma,
        theta,
        beta,
        drift,
        second_moment,
    })
}

/// Recurrence verdict on the compatibility line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recurrence {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
    /// Recurrent, but positive vs null is not determined here.
    RecurrentPositivityUndetermined,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum YesNoNa {
    Yes,
    No,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpErgodic {
    Yes,
    NotImplied,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuasiErgodic {
    UniformlyExponentially,
    NotQuasiErgodic,
    NotImplied,
    NotApplicable,
}

/// Dynamics verdicts on a compatibility line, each tagged with the
/// condition that fired.
#[derive(Debug, Clone, Serialize)]
pub struct DynamicsVerdict {
    pub explosive: bool,
    pub explosive_clause: String,
    pub recurrence: Recurrence,
    pub recurrence_clause: String,
    pub exp_ergodic: ExpErgodic,
    pub extinction_as: YesNoNa,
    pub quasi_ergodic: QuasiErgodic,
    pub note: Option<String>,
}

/// Apply the threshold decision table.
///
/// `has_pic`/`has_qic` gate the class-conditional verdicts; they normally
/// come from [`class_geometry`].
pub fn classify_dynamics(
    params: &ThresholdParams,
    has_pic: TriState,
    has_qic: TriState,
) -> DynamicsVerdict {
    let r = params.r_norm;
    let alpha = &params.alpha;
    let beta = &params.beta;
    let gamma = &params.gamma;
    let a_neg = alpha.is_negative();
    let a_zero = alpha.is_zero();

    let (explosive, explosive_clause) = if r > 1 && alpha.is_positive() {
        (true, "R>1 and alpha>0".to_string())
    } else if r > 2 && a_zero && beta.is_positive() {
        (true, "R>2, alpha=0 and beta>0".to_string())
    } else {
        (false, "neither explosive condition holds".to_string())
    };

    let recurrent_cond = a_neg || (a_zero && !beta.is_positive());
    let positive_cond = a_neg
        || (a_zero && !beta.is_positive() && r > 2)
        || (a_zero && beta.is_negative() && r > 1);
    let null_cond = a_zero && !beta.is_positive() && gamma.is_positive() && r == 1;

    let mut note = None;
    let (recurrence, recurrence_clause) = match has_pic {
        TriState::Yes => {
            if !recurrent_cond {
                (Recurrence::Transient, "alpha>0 or (alpha=0 and beta>0)".to_string())
            } else if positive_cond {
                let clause = if a_neg {
                    "alpha<0"
                } else if !beta.is_positive() && r > 2 {
                    "alpha=0, beta<=0, R>2"
                } else {
                    "alpha=0, beta<0, R>1"
                };
                (Recurrence::PositiveRecurrent, clause.to_string())
            } else if null_cond {
                (Recurrence::NullRecurrent, "alpha=0, beta<=0, gamma>0, R=1".to_string())
            } else {
                note = Some(
                    "alpha=0, beta=0, R=2: recurrence holds but positivity is not decided; \
                     essential networks are conjectured null recurrent in this regime"
                        .to_string(),
                );
                (
                    Recurrence::RecurrentPositivityUndetermined,
                    "alpha=0, beta=0, R=2".to_string(),
                )
            }
        }
        TriState::No => {
            (Recurrence::NotApplicable, "no closed non-singleton class".to_string())
        }
        TriState::Unknown => {
            (Recurrence::NotApplicable, "class structure undetermined".to_string())
        }
    };

    let exp_ergodic = match has_pic {
        TriState::Yes => {
            if a_neg || (a_zero && !beta.is_positive() && r > 2) {
                ExpErgodic::Yes
            } else {
                ExpErgodic::NotImplied
            }
        }
        _ => ExpErgodic::NotApplicable,
    };

    let (extinction_as, quasi_ergodic) = match has_qic {
        TriState::Yes => {
            let ext = if recurrent_cond { YesNoNa::Yes } else { YesNoNa::No };
            let quasi = if (a_zero && !beta.is_positive() && r > 2) || (a_neg && r > 1) {
                QuasiErgodic::UniformlyExponentially
            } else if null_cond || !recurrent_cond {
                QuasiErgodic::NotQuasiErgodic
            } else {
                QuasiErgodic::NotImplied
            };
            (ext, quasi)
        }
        _ => (YesNoNa::NotApplicable, QuasiErgodic::NotApplicable),
    };

    DynamicsVerdict {
        explosive,
        explosive_clause,
        recurrence,
        recurrence_clause,
        exp_ergodic,
        extinction_as,
        quasi_ergodic,
        note,
    }
}

/// Stationary/QSD tail classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailClass {
    CmpLike,
    Geometric,
    ZetaLike,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailVerdict {
    pub stationary: TailClass,
    pub stationary_clause: String,
    pub qsd: TailClass,
    pub qsd_clause: String,
}

/// Tail trichotomy from the line-effective reactant norms and the leading
/// drift sign.
pub fn tail_class(params: &ThresholdParams) -> TailVerdict {
    let (stationary, clause) = match (params.r_plus, params.r_minus) {
        (Some(rp), Some(rm)) if rp < rm => (TailClass::CmpLike, "R+ < R-".to_string()),
        (Some(rp), Some(rm)) if rp == rm && params.alpha.is_negative() => {
            (TailClass::Geometric, "R+ = R- and alpha<0".to_string())
        }
        _ if params.alpha.is_zero() => (TailClass::ZetaLike, "alpha=0".to_string()),
        _ => (TailClass::NotApplicable, "no tail clause fires".to_string()),
    };
    let (qsd, qsd_clause) = if params.r_norm > 1 {
        (stationary, format!("{clause}, R>1"))
    } else {
        (TailClass::NotApplicable, "requires R>1".to_string())
    };
    TailVerdict { stationary, stationary_clause: clause, qsd, qsd_clause }
}

/// Check the implications that must hold among the computed parameters.
/// A non-empty result indicates an internal inconsistency (a bug), not a
/// property of the network.
///
/// All checks are against the line-effective structure: reactions starved
/// of a catalyst on this line do not participate. A line on which no
/// reaction ever fires satisfies everything vacuously.
pub fn consistency_check(
    network: &ReactionNetwork,
    profile: &OneDimProfile,
    params: &ThresholdParams,
) -> Vec<String> {
    let mut violations = Vec::new();
    let dir = &profile.direction.vector;
    let live: Vec<usize> = (0..network.reactions().len())
        .filter(|&i| live_on_line(&network.reactions()[i].reactant.0, dir, &params.base))
        .collect();
    if live.is_empty() {
        return violations;
    }
    let r = params.r_norm;
    let line_h3 = params.r_plus.is_some() && params.r_minus.is_some();
    if line_h3 && r < 1 {
        violations.push("both drift signs live but R = 0".to_string());
    }
    if !params.gamma.is_positive() && !params.beta.is_negative() {
        violations.push("gamma <= 0 but beta >= 0".to_string());
    }
    if r == 0 && !params.alpha.is_positive() {
        violations.push("R = 0 but alpha <= 0".to_string());
    }
    if !params.alpha.is_positive() && r < 1 {
        violations.push("alpha <= 0 but R = 0".to_string());
    }
    if r == 1 && line_h3 {
        if profile.direction.support != vec![0] {
            violations.push("R = 1 but the direction's support is not the first species".into());
        }
        for j in 1..network.dim() {
            if !profile.catalysts.contains(&j) && profile.direction.vector[j] != 0 {
                violations.push(format!("R = 1 but species index {j} is not a catalyst"));
            }
        }
    }
    if r == 1 {
        if params.alpha.is_zero() && params.gamma.is_negative() {
            violations.push("R = 1 and alpha = 0 but gamma < 0".to_string());
        }
        if params.gamma.is_zero() {
            for &i in &live {
                if network.reactions()[i].reactant.0[0] != 1 {
                    violations.push(format!(
                        "gamma = 0 but reactant of reaction {i} does not contain exactly one \
                         unit of the first species"
                    ));
                }
            }
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKind {
    Pic,
    Qic,
}

/// An arithmetic progression of line indices forming one non-singleton
/// class.
#[derive(Debug, Clone, Serialize)]
pub struct Progression {
    /// Residue class in `1..=coord_gcd`.
    pub residue: u32,
    pub start_t: i64,
    pub start: Vec<u64>,
    pub kind: ClassKind,
}

/// Index range `[start, end)`; `end = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexRange {
    pub start: i64,
    pub end: Option<i64>,
}

impl IndexRange {
    pub fn is_empty(&self) -> bool {
        matches!(self.end, Some(e) if e <= self.start)
    }
}

/// Exact geometry of a compatibility line under the full hypotheses.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub line: LatticeLine,
    /// First line index in the reactant closure.
    pub t_reactants: Option<i64>,
    /// First line index in the product closure.
    pub t_products: Option<i64>,
    pub t_reactants_plus: Option<i64>,
    pub t_products_minus: Option<i64>,
    /// First index of the non-singleton region.
    pub class_floor_t: Option<i64>,
    /// Per-coordinate sup of the non-singleton region: the base value on
    /// catalyst coordinates, unbounded on the support.
    pub c_sup: Vec<Option<u64>>,
    pub neutral_range: IndexRange,
    pub trapping_range: IndexRange,
    pub escaping_range: IndexRange,
    pub neutral: Vec<State>,
    pub trapping: Vec<State>,
    pub escaping: Vec<State>,
    /// Residues whose progression is a QIC.
    pub sigma_plus: Vec<u32>,
    /// Residues whose progression is a PIC (the complement).
    pub sigma_minus: Vec<u32>,
    /// Closed-formula value for the QIC count, kept for cross-checking.
    pub sigma_plus_count_formula: u64,
    pub progressions: Vec<Progression>,
}

impl GeometryReport {
    pub fn has_pic(&self) -> TriState {
        TriState::from_bool(self.class_floor_t.is_some() && !self.sigma_minus.is_empty())
    }

    pub fn has_qic(&self) -> TriState {
        TriState::from_bool(self.class_floor_t.is_some() && !self.sigma_plus.is_empty())
    }
}

fn materialize(line: &LatticeLine, range: &IndexRange) -> Vec<State> {
    const CAP: i64 = 10_000;
    let Some(end) = range.end else { return Vec::new() };
    let mut out = Vec::new();
    let mut t = range.start;
    while t < end && (t - range.start) < CAP {
        if let Some(p) = line.point(t) {
            out.push(p);
        }
        t += 1;
    }
    out
}

/// Compute the class geometry of the line through `c`.
pub fn class_geometry(
    network: &ReactionNetwork,
    profile: &OneDimProfile,
    c: &State,
) -> Result<GeometryReport, OneDimError> {
    profile.require_h3()?;
    profile.require_h4()?;
    let js = jump_structure(network);
    let signed = js.signed.as_ref().expect("profile established a direction");
    let line = line_through(c, profile.direction.clone());

    let gens = |set: &[crate::model::Complex]| -> Vec<Vec<u64>> {
        set.iter().map(|x| x.0.clone()).collect()
    };
    let t_reactants = first_index_in_upset(&line, &gens(&js.reactants_min));
    let t_products = first_index_in_upset(&line, &gens(&js.products_min));
    let t_reactants_plus = first_index_in_upset(&line, &gens(&signed.reactants_plus_min));
    let t_products_minus = first_index_in_upset(&line, &gens(&signed.products_minus_min));
    let t_reactants_minus = first_index_in_upset(&line, &gens(&signed.reactants_minus_min));
    let t_products_plus = first_index_in_upset(&line, &gens(&signed.products_plus_min));

    // Non-singleton region: first index of
    // (up(I+) n up(O-)) u (up(I-) n up(O+)) on the line.
    let part_a = t_reactants_plus.zip(t_products_minus).map(|(a, b)| a.max(b));
    let part_b = t_reactants_minus.zip(t_products_plus).map(|(a, b)| a.max(b));
    let class_floor_t = match (part_a, part_b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };

    let singleton_end = min_opt(t_reactants, t_products);
    let neutral_range = IndexRange { start: line.t_min, end: singleton_end };
    let trapping_range = match (t_products, t_reactants) {
        (Some(o), Some(i)) if o < i => IndexRange { start: o, end: Some(i) },
        (Some(o), None) => IndexRange { start: o, end: None },
        _ => IndexRange { start: line.t_min, end: Some(line.t_min) },
    };
    let escaping_range = match t_reactants {
        Some(i) => IndexRange { start: i, end: class_floor_t },
        None => IndexRange { start: line.t_min, end: Some(line.t_min) },
    };

    let w = profile.direction.coord_gcd;
    let mut sigma_plus: Vec<u32> = Vec::new();
    if let (Some(o), Some(i)) = (t_products, t_reactants) {
        let mut t = o;
        while t < i && (t - o) < w as i64 {
            let k = line.residue(t);
            if !sigma_plus.contains(&k) {
                sigma_plus.push(k);
            }
            t += 1;
        }
    }
    sigma_plus.sort();
    let sigma_minus: Vec<u32> = (1..=w as u32).filter(|k| !sigma_plus.contains(k)).collect();
    let sigma_plus_count_formula = match (t_products, t_reactants) {
        (Some(o), Some(i)) => (w as i64).min((i - o).max(0)) as u64,
        _ => 0,
    };

    let mut progressions = Vec::new();
    if let Some(floor) = class_floor_t {
        for offset in 0..w as i64 {
            let start_t = floor + offset;
            let k = line.residue(start_t);
            let kind = if sigma_plus.contains(&k) { ClassKind::Qic } else { ClassKind::Pic };
            if let Some(start) = line.point(start_t) {
                progressions.push(Progression { residue: k, start_t, start: start.0, kind });
            }
        }
        progressions.sort_by_key(|p| p.residue);
    }

    let c_sup: Vec<Option<u64>> = (0..network.dim())
        .map(|j| {
            if profile.direction.vector[j] == 0 {
                Some(c.0[j])
            } else {
                None
            }
        })
        .collect();

    let neutral = materialize(&line, &neutral_range);
    let trapping = materialize(&line, &trapping_range);
    let escaping = materialize(&line, &escaping_range);

    Ok(GeometryReport {
        line,
        t_reactants,
        t_products,
        t_reactants_plus,
        t_products_minus,
        class_floor_t,
        c_sup,
        neutral_range,
        trapping_range,
        escaping_range,
        neutral,
        trapping,
        escaping,
        sigma_plus,
        sigma_minus,
        sigma_plus_count_formula,
        progressions,
    })
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Scan a compatibility line (no hypotheses needed beyond a well-defined
/// direction) and return the states in the candidate non-singleton set
/// `(up(I+) n up(O-)) u (up(I-) n up(O+))`, up to `scan_cap` indices.
pub fn k_set_on_line(network: &ReactionNetwork, line: &LatticeLine, scan_cap: u64) -> Vec<State> {
    let js = jump_structure(network);
    let Some(signed) = js.signed.as_ref() else { return Vec::new() };
    let gens = |set: &[crate::model::Complex]| -> Vec<Vec<u64>> {
        set.iter().map(|x| x.0.clone()).collect()
    };
    let ip = gens(&signed.reactants_plus_min);
    let im = gens(&signed.reactants_minus_min);
    let op = gens(&signed.products_plus_min);
    let om = gens(&signed.products_minus_min);
    let mut out = Vec::new();
    let mut t = line.t_min;
    let mut scanned = 0u64;
    while scanned < scan_cap {
        let Some(p) = line.point(t) else { break };
        let x = p.as_slice();
        let in_k = (lattice::upward_contains(&ip, x) && lattice::upward_contains(&om, x))
            || (lattice::upward_contains(&im, x) && lattice::upward_contains(&op, x));
        if in_k {
            out.push(p);
        }
        t += 1;
        scanned += 1;
    }
    out
}
