//! State based potential games: SEP-1/SEP-2 state transition synthesis,
//! state-depending utility design, better-reply-with-inertia dynamics,
//! recurrent state equilibria and the exact joint (state, action) chain.
//!
//! Column order everywhere is state-major then profile-lexicographic,
//! matching the x ⋉ a vector form: column (x, a) has index (x-1)·k + idx(a).

use crate::dynamics::{substream, SimulationTrace, TraceStep};
use crate::game::{NetworkTopology, ObjectiveFunction, StrategyProfile};
use crate::potential::{design_utilities, UtilityDesign};
use crate::ratmat::{MatError, Rat, RatMatrix};
use crate::stp::StochasticMatrix;
use num::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sep {
    /// Remaining priority: stay put unless a strictly better state exists,
    /// then move uniformly among the strict improvers.
    Sep1,
    /// Equal probability: move uniformly among the weak improvers (the
    /// current state always qualifies).
    Sep2,
}

/// Distribution over states after one SEP-1 step from (x, a).
pub fn sep1_distribution(
    phi: &ObjectiveFunction,
    k: &[usize],
    x: usize,
    a: &StrategyProfile,
) -> Result<Vec<Rat>, MatError> {
    let r = phi.state_count();
    let here = phi.eval(Some(x), a, k)?;
    let better: Vec<usize> = (1..=r)
        .filter(|&j| phi.eval(Some(j), a, k).map(|v| v > here).unwrap_or(false))
        .collect();
    let mut dist = vec![Rat::zero(); r];
    if better.is_empty() {
        dist[x - 1] = Rat::one();
    } else {
        let p = Rat::new(1.into(), (better.len() as i64).into());
        for j in better {
            dist[j - 1] = p.clone();
        }
    }
    Ok(dist)
}

/// Distribution over states after one SEP-2 step from (x, a).
pub fn sep2_distribution(
    phi: &ObjectiveFunction,
    k: &[usize],
    x: usize,
    a: &StrategyProfile,
) -> Result<Vec<Rat>, MatError> {
    let r = phi.state_count();
    let here = phi.eval(Some(x), a, k)?;
    let weak: Vec<usize> = (1..=r)
        .filter(|&j| phi.eval(Some(j), a, k).map(|v| v >= here).unwrap_or(false))
        .collect();
    let p = Rat::new(1.into(), (weak.len() as i64).into());
    let mut dist = vec![Rat::zero(); r];
    for j in weak {
        dist[j - 1] = p.clone();
    }
    Ok(dist)
}

/// Assembles M_P, the r x (r·k) state transition matrix, from the chosen SEP.
pub fn build_mp(
    phi: &ObjectiveFunction,
    k: &[usize],
    sep: Sep,
) -> Result<StochasticMatrix, MatError> {
    let r = phi.state_count();
    let total: usize = k.iter().product();
    let mut m = RatMatrix::zeros(r, r * total);
    for x in 1..=r {
        for a in StrategyProfile::all(k) {
            let dist = match sep {
                Sep::Sep1 => sep1_distribution(phi, k, x, &a)?,
                Sep::Sep2 => sep2_distribution(phi, k, x, &a)?,
            };
            let col = (x - 1) * total + a.index(k) - 1;
            for (j, p) in dist.into_iter().enumerate() {
                m[(j, col)] = p;
            }
        }
    }
    StochasticMatrix::new(m)
}

/// True iff every objective block is designable under its state's topology.
pub fn check_state_designability(
    phi: &ObjectiveFunction,
    per_state_neighborhoods: &[Vec<Vec<usize>>],
    k: &[usize],
) -> Result<bool, MatError> {
    if phi.state_count() != per_state_neighborhoods.len() {
        return Err(MatError::DimMismatch(format!(
            "{} objective blocks for {} per-state topologies",
            phi.state_count(),
            per_state_neighborhoods.len()
        )));
    }
    for (x, nb) in per_state_neighborhoods.iter().enumerate() {
        let block = ObjectiveFunction::fixed(phi.block(x + 1).to_vec());
        if !crate::potential::check_designability(&block, nb, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First (state, player) pair failing the membership test, 1-based.
pub fn first_state_designability_failure(
    phi: &ObjectiveFunction,
    per_state_neighborhoods: &[Vec<Vec<usize>>],
    k: &[usize],
) -> Result<Option<(usize, usize)>, MatError> {
    for (x, nb) in per_state_neighborhoods.iter().enumerate() {
        if let Some(p) =
            crate::potential::first_designability_failure(phi.block(x + 1), nb, k)?
        {
            return Ok(Some((x + 1, p)));
        }
    }
    Ok(None)
}

/// Per-state local utility design; `None` iff some state fails the
/// designability condition.
pub fn design_state_utilities(
    phi: &ObjectiveFunction,
    per_state_neighborhoods: &[Vec<Vec<usize>>],
    k: &[usize],
) -> Result<Option<Vec<UtilityDesign>>, MatError> {
    let mut designs = Vec::with_capacity(phi.state_count());
    for (x, nb) in per_state_neighborhoods.iter().enumerate() {
        let block = ObjectiveFunction::fixed(phi.block(x + 1).to_vec());
        match design_utilities(&block, nb, k)? {
            Some(d) => designs.push(d),
            None => return Ok(None),
        }
    }
    Ok(Some(designs))
}

/// A state based game with designed (or user-supplied) utilities, a SEP-built
/// state process and an inertia parameter for the better-reply dynamics.
#[derive(Debug, Clone)]
pub struct StateBasedGame {
    k: Vec<usize>,
    state_labels: Vec<String>,
    per_state_topologies: Vec<NetworkTopology>,
    objective: ObjectiveFunction,
    /// utilities[x-1][i-1]: full-length structure vector of c_i(x, ·).
    utilities: Vec<Vec<Vec<Rat>>>,
    m_p: StochasticMatrix,
    epsilon: Rat,
}

impl StateBasedGame {
    pub fn new(
        k: Vec<usize>,
        state_labels: Vec<String>,
        per_state_topologies: Vec<NetworkTopology>,
        objective: ObjectiveFunction,
        utilities: Vec<Vec<Vec<Rat>>>,
        m_p: StochasticMatrix,
        epsilon: Rat,
    ) -> Result<Self, MatError> {
        let r = state_labels.len();
        let total: usize = k.iter().product();
        if objective.state_count() != r || per_state_topologies.len() != r {
            return Err(MatError::DimMismatch(
                "state count disagreement between labels, topologies and objective".into(),
            ));
        }
        if utilities.len() != r
            || utilities
                .iter()
                .any(|per| per.len() != k.len() || per.iter().any(|v| v.len() != total))
        {
            return Err(MatError::DimMismatch(
                "utilities must be one full-length vector per (state, player)".into(),
            ));
        }
        if m_p.matrix().rows() != r || m_p.matrix().cols() != r * total {
            return Err(MatError::DimMismatch(format!(
                "M_P must be {} x {}",
                r,
                r * total
            )));
        }
        if epsilon <= Rat::zero() || epsilon >= Rat::one() {
            return Err(MatError::BadRational(format!(
                "inertia epsilon {} not in (0, 1)",
                epsilon
            )));
        }
        Ok(StateBasedGame {
            k,
            state_labels,
            per_state_topologies,
            objective,
            utilities,
            m_p,
            epsilon,
        })
    }

    /// Designs utilities from the objective and builds M_P with the chosen
    /// SEP; `None` iff the objective is not designable.
    pub fn design(
        k: Vec<usize>,
        state_labels: Vec<String>,
        per_state_topologies: Vec<NetworkTopology>,
        objective: ObjectiveFunction,
        sep: Sep,
        epsilon: Rat,
    ) -> Result<Option<Self>, MatError> {
        let neighborhoods: Vec<Vec<Vec<usize>>> = per_state_topologies
            .iter()
            .map(|t| (1..=k.len()).map(|i| t.neighborhood(i)).collect())
            .collect();
        let Some(designs) = design_state_utilities(&objective, &neighborhoods, &k)? else {
            return Ok(None);
        };
        let mut utilities = Vec::with_capacity(designs.len());
        for (x, d) in designs.iter().enumerate() {
            utilities.push(d.lifted_utilities(&neighborhoods[x], &k)?);
        }
        let m_p = build_mp(&objective, &k, sep)?;
        Ok(Some(Self::new(
            k,
            state_labels,
            per_state_topologies,
            objective,
            utilities,
            m_p,
            epsilon,
        )?))
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn profile_count(&self) -> usize {
        self.k.iter().product()
    }

    pub fn state_count(&self) -> usize {
        self.state_labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn objective(&self) -> &ObjectiveFunction {
        &self.objective
    }

    pub fn m_p(&self) -> &StochasticMatrix {
        &self.m_p
    }

    pub fn epsilon(&self) -> &Rat {
        &self.epsilon
    }

    pub fn topology(&self, state: usize) -> &NetworkTopology {
        &self.per_state_topologies[state - 1]
    }

    pub fn utility_vector(&self, state: usize, i: usize) -> &[Rat] {
        &self.utilities[state - 1][i - 1]
    }

    /// c_i(x, a).
    pub fn payoff(&self, state: usize, i: usize, a: &StrategyProfile) -> Rat {
        self.utilities[state - 1][i - 1][a.index(&self.k) - 1].clone()
    }

    /// 1-based column index of the pair (x, a) in x ⋉ a order.
    pub fn pair_index(&self, state: usize, a: &StrategyProfile) -> usize {
        (state - 1) * self.profile_count() + a.index(&self.k)
    }

    pub fn pair_from_index(&self, idx: usize) -> (usize, StrategyProfile) {
        let total = self.profile_count();
        let state = (idx - 1) / total + 1;
        let profile = StrategyProfile::from_index((idx - 1) % total + 1, &self.k);
        (state, profile)
    }

    /// Strict better replies B_i(x, a).
    pub fn better_reply_set(&self, state: usize, i: usize, a: &StrategyProfile) -> Vec<usize> {
        let here = self.payoff(state, i, a);
        (1..=self.k[i - 1])
            .filter(|&s| s != a.0[i - 1] && self.payoff(state, i, &a.with_strategy(i, s)) > here)
            .collect()
    }

    /// Better reply with inertia: stay with probability 1 when no strict
    /// better reply exists, otherwise keep with mass ε and spread 1-ε
    /// uniformly over the strict better replies.
    pub fn better_reply_distribution(
        &self,
        i: usize,
        state: usize,
        a: &StrategyProfile,
    ) -> Vec<Rat> {
        let ki = self.k[i - 1];
        let mut dist = vec![Rat::zero(); ki];
        let better = self.better_reply_set(state, i, a);
        if better.is_empty() {
            dist[a.0[i - 1] - 1] = Rat::one();
        } else {
            dist[a.0[i - 1] - 1] = self.epsilon.clone();
            let share =
                (Rat::one() - &self.epsilon) / Rat::from_integer((better.len() as i64).into());
            for s in better {
                dist[s - 1] = share.clone();
            }
        }
        dist
    }

    /// M_F: k x (r·k); column (x, a) is the product distribution of all
    /// players' independent better-reply updates at state x given previous
    /// action a.
    pub fn build_mf(&self) -> Result<StochasticMatrix, MatError> {
        let total = self.profile_count();
        let r = self.state_count();
        let mut m = RatMatrix::zeros(total, r * total);
        for x in 1..=r {
            for a in StrategyProfile::all(&self.k) {
                let per_player: Vec<Vec<Rat>> = (1..=self.n())
                    .map(|i| self.better_reply_distribution(i, x, &a))
                    .collect();
                let col = (x - 1) * total + a.index(&self.k) - 1;
                for b in StrategyProfile::all(&self.k) {
                    let mut p = Rat::one();
                    for (i, dist) in per_player.iter().enumerate() {
                        p *= &dist[b.0[i] - 1];
                        if p.is_zero() {
                            break;
                        }
                    }
                    if !p.is_zero() {
                        m[(b.index(&self.k) - 1, col)] = p;
                    }
                }
            }
        }
        StochasticMatrix::new(m)
    }

    /// X(a|x): least set containing x and closed under positive-probability
    /// M_P transitions with the action frozen at a.
    pub fn reachable_states(&self, a: &StrategyProfile, x: usize) -> BTreeSet<usize> {
        let total = self.profile_count();
        let m = self.m_p.matrix();
        let a_idx = a.index(&self.k);
        let mut reach: BTreeSet<usize> = [x].into();
        let mut frontier = vec![x];
        while let Some(s) = frontier.pop() {
            let col = (s - 1) * total + a_idx - 1;
            for next in 1..=self.state_count() {
                if !m[(next - 1, col)].is_zero() && reach.insert(next) {
                    frontier.push(next);
                }
            }
        }
        reach
    }

    /// Exhaustive scan for recurrent state equilibria, grouped by action.
    pub fn recurrent_state_equilibria(&self) -> Vec<RecurrentStateEquilibrium> {
        let mut out: Vec<RecurrentStateEquilibrium> = Vec::new();
        for a in StrategyProfile::all(&self.k) {
            let reach: Vec<BTreeSet<usize>> = (1..=self.state_count())
                .map(|x| self.reachable_states(&a, x))
                .collect();
            let mut states = BTreeSet::new();
            for x_star in 1..=self.state_count() {
                let set = &reach[x_star - 1];
                let recurrent = set.iter().all(|&x| reach[x - 1].contains(&x_star));
                if !recurrent {
                    continue;
                }
                let stable = set.iter().all(|&x| {
                    (1..=self.n()).all(|i| {
                        let here = self.payoff(x, i, &a);
                        (1..=self.k[i - 1])
                            .all(|s| self.payoff(x, i, &a.with_strategy(i, s)) <= here)
                    })
                });
                if stable {
                    states.insert(x_star);
                }
            }
            if !states.is_empty() {
                out.push(RecurrentStateEquilibrium {
                    action: a,
                    state_set: states,
                });
            }
        }
        out
    }

    /// Exact (r·k)^2 transition matrix of the pair process: state step by
    /// M_P, then action step by the better-reply update at the new state.
    pub fn joint_chain(&self) -> Result<JointChain, MatError> {
        let total = self.profile_count();
        let r = self.state_count();
        let dim = r * total;
        let mp = self.m_p.matrix();
        let mf = self.build_mf()?;
        let mf = mf.matrix();
        let mut m = RatMatrix::zeros(dim, dim);
        for col in 0..dim {
            let x = col / total + 1;
            let a_idx = col % total;
            for x_next in 1..=r {
                let p_state = &mp[(x_next - 1, (x - 1) * total + a_idx)];
                if p_state.is_zero() {
                    continue;
                }
                let mf_col = (x_next - 1) * total + a_idx;
                for b in 0..total {
                    let p_act = &mf[(b, mf_col)];
                    if p_act.is_zero() {
                        continue;
                    }
                    let row = (x_next - 1) * total + b;
                    let v = &m[(row, col)] + p_state * p_act;
                    m[(row, col)] = v;
                }
            }
        }
        Ok(JointChain(StochasticMatrix::new(m)?))
    }

    /// Runs the state/action dynamics: x(t+1) ~ M_P(x(t), a(t)), then
    /// a(t+1) from the better-reply update at (x(t+1), a(t)).
    /// Deterministic per seed.
    pub fn simulate(
        &self,
        x0: usize,
        a0: StrategyProfile,
        max_steps: usize,
        seed: u64,
    ) -> Result<SimulationTrace, MatError> {
        assert!(max_steps >= 1, "max_steps must be at least 1");
        let n = self.n();
        let mut x = x0;
        let mut a = a0;
        let mut steps = Vec::new();
        let mut converged_at = None;
        let total = self.profile_count();
        for t in 0..=max_steps {
            steps.push(TraceStep {
                t,
                state: Some(x),
                profile: a.clone(),
                phi: Some(self.objective.eval(Some(x), &a, &self.k)?),
            });
            if t == max_steps {
                break;
            }
            // state step
            let col = self.m_p.column((x - 1) * total + a.index(&self.k) - 1);
            let mut rng = substream(seed, n + 1, t);
            x = sample_rational(&col, &mut rng) + 1;
            // action step: simultaneous independent better replies at (x, a)
            let mut next = a.clone();
            for i in 1..=n {
                let dist = self.better_reply_distribution(i, x, &a);
                let mut rng = substream(seed, i, t);
                next.0[i - 1] = sample_rational(&dist, &mut rng) + 1;
            }
            a = next;
            if converged_at.is_none() && self.is_pair_equilibrium(x, &a) {
                converged_at = Some(t + 1);
            }
        }
        Ok(SimulationTrace {
            seed,
            steps,
            converged_at,
            cycle_detected: false,
        })
    }

    /// a is a state-wise Nash profile at x (no strict better reply for anyone).
    pub fn is_pair_equilibrium(&self, x: usize, a: &StrategyProfile) -> bool {
        (1..=self.n()).all(|i| self.better_reply_set(x, i, a).is_empty())
    }

    /// Every unilateral utility difference equals the objective difference,
    /// exhaustively over states, profiles and deviations.
    pub fn potential_matches_utilities(&self) -> Result<bool, MatError> {
        for x in 1..=self.state_count() {
            for a in StrategyProfile::all(&self.k) {
                let phi_here = self.objective.eval(Some(x), &a, &self.k)?;
                for i in 1..=self.n() {
                    let c_here = self.payoff(x, i, &a);
                    for s in 1..=self.k[i - 1] {
                        if s == a.0[i - 1] {
                            continue;
                        }
                        let b = a.with_strategy(i, s);
                        let dc = self.payoff(x, i, &b) - &c_here;
                        let dphi = self.objective.eval(Some(x), &b, &self.k)? - &phi_here;
                        if dc != dphi {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// The state process never decreases the objective: every positive-mass
    /// M_P entry moves to a state with weakly larger objective value.
    pub fn state_process_monotone(&self) -> Result<bool, MatError> {
        let total = self.profile_count();
        for x in 1..=self.state_count() {
            for a in StrategyProfile::all(&self.k) {
                let phi_here = self.objective.eval(Some(x), &a, &self.k)?;
                let col = (x - 1) * total + a.index(&self.k) - 1;
                for x_next in 1..=self.state_count() {
                    if self.m_p.matrix()[(x_next - 1, col)].is_zero() {
                        continue;
                    }
                    if self.objective.eval(Some(x_next), &a, &self.k)? < phi_here {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Both defining conditions of a state based potential game.
    pub fn verify_state_based_potential(&self) -> Result<bool, MatError> {
        Ok(self.potential_matches_utilities()? && self.state_process_monotone()?)
    }
}

/// Equilibrium action together with its action-invariant state set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrentStateEquilibrium {
    pub action: StrategyProfile,
    pub state_set: BTreeSet<usize>,
}

/// Column-stochastic transition matrix of the joint (state, action) process.
#[derive(Debug, Clone)]
pub struct JointChain(pub StochasticMatrix);

/// Samples an index from a rational distribution using one uniform draw.
/// Sampling is approximate in the last ulp but deterministic per RNG state.
fn sample_rational<R: Rng>(dist: &[Rat], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in dist.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        last_positive = i;
        acc += p.to_f64().unwrap_or(0.0);
        if u < acc {
            return i;
        }
    }
    last_positive
}
