//! Fixed-topology MBRA dynamics: best-response sets under global or local
//! information, the exact profile transition matrix L, and seeded simulation.

use crate::game::{FiniteGame, NetworkTopology, ObjectiveFunction, StrategyProfile};
use crate::ratmat::{MatError, Rat, RatMatrix};
use crate::stp::StochasticMatrix;
use num::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cadence {
    /// All players update at once (the Markov profile dynamics form).
    Simultaneous,
    /// One player per step, in player order. MBRA convergence in potential
    /// games is guaranteed on sequential improvement paths, so this is the
    /// default.
    RoundRobin,
    /// One uniformly chosen player per step.
    #[serde(rename = "random")]
    RandomPlayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoMode {
    Global,
    Local,
}

#[derive(Debug, Clone)]
pub struct SurConfig {
    pub cadence: Cadence,
    pub info: InfoMode,
    pub seed: u64,
}

impl Default for SurConfig {
    fn default() -> Self {
        SurConfig {
            cadence: Cadence::RoundRobin,
            info: InfoMode::Global,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub state: Option<usize>,
    pub profile: StrategyProfile,
    pub phi: Option<Rat>,
}

/// Time-indexed simulation record; `seed` reproduces it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub converged_at: Option<usize>,
    /// Set when a profile revisit is detected without reaching a fixed point.
    pub cycle_detected: bool,
}

/// Per-(player, time) substream so a cadence change never silently
/// reshuffles another player's draws.
pub fn substream(seed: u64, player: usize, t: usize) -> ChaCha8Rng {
    let mix = (player as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((t as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    ChaCha8Rng::seed_from_u64(seed ^ mix)
}

/// Best responses of player i at profile a (sorted, never empty).
///
/// In local mode only the strategies of U(i) may influence the answer: the
/// profile is masked by pinning every non-neighbor to strategy 1 before
/// evaluating, so a utility leaking information from outside U(i) is cut off.
pub fn best_response_set(
    g: &FiniteGame,
    i: usize,
    a: &StrategyProfile,
    info: InfoMode,
    topology: Option<&NetworkTopology>,
) -> Result<Vec<usize>, MatError> {
    let base = match info {
        InfoMode::Global => a.clone(),
        InfoMode::Local => {
            let topo = topology.ok_or_else(|| {
                MatError::DimMismatch("local information mode requires a topology".into())
            })?;
            let u = topo.neighborhood(i);
            let mut masked = a.clone();
            for j in 1..=g.n() {
                if !u.contains(&j) {
                    masked.0[j - 1] = 1;
                }
            }
            masked
        }
    };
    let ki = g.k()[i - 1];
    let payoffs: Vec<Rat> = (1..=ki)
        .map(|s| g.payoff(i, &base.with_strategy(i, s)))
        .collect();
    let best = payoffs.iter().max().expect("k_i >= 2").clone();
    Ok((1..=ki).filter(|&s| payoffs[s - 1] == best).collect())
}

/// Per-player MBRA distribution at profile a: keep when current is a best
/// response, otherwise uniform over the best-response set.
fn mbra_distribution(
    g: &FiniteGame,
    i: usize,
    a: &StrategyProfile,
    info: InfoMode,
    topology: Option<&NetworkTopology>,
) -> Result<Vec<(usize, Rat)>, MatError> {
    let br = best_response_set(g, i, a, info, topology)?;
    let current = a.0[i - 1];
    if br.contains(&current) {
        return Ok(vec![(current, Rat::one())]);
    }
    let p = Rat::new(1.into(), (br.len() as i64).into());
    Ok(br.into_iter().map(|s| (s, p.clone())).collect())
}

fn sample<R: Rng>(dist: &[(usize, Rat)], rng: &mut R) -> usize {
    if dist.len() == 1 {
        return dist[0].0;
    }
    // all masses here are uniform over the support
    dist[rng.gen_range(0..dist.len())].0
}

/// One MBRA transition from a(t); which players move is set by the cadence.
pub fn mbra_step(
    g: &FiniteGame,
    a: &StrategyProfile,
    config: &SurConfig,
    topology: Option<&NetworkTopology>,
    t: usize,
) -> Result<StrategyProfile, MatError> {
    let n = g.n();
    let movers: Vec<usize> = match config.cadence {
        Cadence::Simultaneous => (1..=n).collect(),
        Cadence::RoundRobin => vec![t % n + 1],
        Cadence::RandomPlayer => {
            let mut rng = substream(config.seed, 0, t);
            vec![rng.gen_range(1..=n)]
        }
    };
    let mut next = a.clone();
    for i in movers {
        let dist = mbra_distribution(g, i, a, config.info, topology)?;
        let mut rng = substream(config.seed, i, t);
        next.0[i - 1] = sample(&dist, &mut rng);
    }
    Ok(next)
}

/// True when every player's current strategy is already a best response;
/// such profiles are exactly the pure Nash equilibria.
pub fn is_fixed_point(
    g: &FiniteGame,
    a: &StrategyProfile,
    info: InfoMode,
    topology: Option<&NetworkTopology>,
) -> Result<bool, MatError> {
    for i in 1..=g.n() {
        if !best_response_set(g, i, a, info, topology)?.contains(&a.0[i - 1]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact k x k transition matrix of a(t+1) = L a(t). Defined for the
/// simultaneous cadence and the uniform random-player cadence; round-robin
/// is time-inhomogeneous and has no single L.
pub fn transition_matrix_l(
    g: &FiniteGame,
    cadence: Cadence,
    info: InfoMode,
    topology: Option<&NetworkTopology>,
) -> Result<StochasticMatrix, MatError> {
    let k = g.k();
    let total = g.profile_count();
    let mut m = RatMatrix::zeros(total, total);
    for j in 1..=total {
        let a = StrategyProfile::from_index(j, k);
        match cadence {
            Cadence::Simultaneous => {
                let dists: Vec<Vec<(usize, Rat)>> = (1..=g.n())
                    .map(|i| mbra_distribution(g, i, &a, info, topology))
                    .collect::<Result<_, _>>()?;
                let mut outcomes: Vec<(StrategyProfile, Rat)> = vec![(a.clone(), Rat::one())];
                for (idx, dist) in dists.iter().enumerate() {
                    let mut next_outcomes = Vec::new();
                    for (profile, p) in &outcomes {
                        for (s, q) in dist {
                            next_outcomes.push((profile.with_strategy(idx + 1, *s), p * q));
                        }
                    }
                    outcomes = next_outcomes;
                }
                for (profile, p) in outcomes {
                    let r = profile.index(k) - 1;
                    let v = &m[(r, j - 1)] + p;
                    m[(r, j - 1)] = v;
                }
            }
            Cadence::RandomPlayer => {
                let pick = Rat::new(1.into(), (g.n() as i64).into());
                for i in 1..=g.n() {
                    for (s, p) in mbra_distribution(g, i, &a, info, topology)? {
                        let r = a.with_strategy(i, s).index(k) - 1;
                        let v = &m[(r, j - 1)] + &pick * p;
                        m[(r, j - 1)] = v;
                    }
                }
            }
            Cadence::RoundRobin => {
                return Err(MatError::DimMismatch(
                    "round-robin cadence has no time-homogeneous L".into(),
                ))
            }
        }
    }
    StochasticMatrix::new(m)
}

/// Runs MBRA from a(0); stops early at a fixed point. Deterministic per seed.
pub fn simulate(
    g: &FiniteGame,
    objective: Option<&ObjectiveFunction>,
    config: &SurConfig,
    topology: Option<&NetworkTopology>,
    a0: StrategyProfile,
    max_steps: usize,
) -> Result<SimulationTrace, MatError> {
    assert!(max_steps >= 1, "max_steps must be at least 1");
    let k = g.k();
    let phi_of = |a: &StrategyProfile| -> Result<Option<Rat>, MatError> {
        objective.map(|o| o.eval(None, a, k)).transpose()
    };
    let mut steps = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut converged_at = None;
    let mut cycle_detected = false;
    let mut a = a0;
    for t in 0..=max_steps {
        steps.push(TraceStep {
            t,
            state: None,
            profile: a.clone(),
            phi: phi_of(&a)?,
        });
        if is_fixed_point(g, &a, config.info, topology)? {
            converged_at = Some(t);
            break;
        }
        if t == max_steps {
            break;
        }
        if config.cadence == Cadence::Simultaneous && !seen.insert(a.clone()) {
            cycle_detected = true;
        }
        a = mbra_step(g, &a, config, topology, t)?;
    }
    Ok(SimulationTrace {
        seed: config.seed,
        steps,
        converged_at,
        cycle_detected,
    })
}
