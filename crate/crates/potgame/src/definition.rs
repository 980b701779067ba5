//! File format for game/system definitions: a JSON document describing
//! players, (per-state) interaction graphs, the objective, utilities and the
//! dynamics settings. Rationals are carried as "p/q" strings (or bare
//! integers) so exactness survives serialization.

use crate::dynamics::{Cadence, InfoMode};
use crate::game::{
    consensus_objective, Fng, FiniteGame, NetworkTopology, ObjectiveFunction, StrategyProfile,
};
use crate::potential::is_potential;
use crate::ratmat::{format_rat, parse_rat, MatError, Rat};
use crate::scenarios::edge_potential_sum;
use crate::state_based::{build_mp, Sep, StateBasedGame};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DefError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("missing prerequisite: {0}")]
    Missing(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

fn schema(field: &str, message: impl Into<String>) -> DefError {
    DefError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

/// An exact rational that serializes as "p/q" (or a bare integer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatValue(pub Rat);

impl Serialize for RatValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rat(&self.0))
    }
}

impl<'de> Deserialize<'de> for RatValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatVisitor;
        impl<'de> Visitor<'de> for RatVisitor {
            type Value = RatValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational \"p/q\" string or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<RatValue, E> {
                parse_rat(v)
                    .map(RatValue)
                    .map_err(|e| E::custom(e.to_string()))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RatValue, E> {
                Ok(RatValue(crate::ratmat::rat(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RatValue, E> {
                i64::try_from(v)
                    .map(|x| RatValue(crate::ratmat::rat(x)))
                    .map_err(|_| E::custom("integer too large"))
            }
        }
        deserializer.deserialize_any(RatVisitor)
    }
}

fn unwrap_rats(v: &[RatValue]) -> Vec<Rat> {
    v.iter().map(|r| r.0.clone()).collect()
}

fn wrap_rats(v: &[Rat]) -> Vec<RatValue> {
    v.iter().map(|r| RatValue(r.clone())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Fixed,
    StateBased,
}

/// One state of a switched-topology system: a label and its edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDef {
    pub label: String,
    pub edges: Vec<(usize, usize)>,
}

/// The objective, either spelled out block-by-block or built from a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    /// One structure-vector block per state (a single block in fixed mode),
    /// profile-lexicographic with player 1 most significant.
    Explicit { blocks: Vec<Vec<RatValue>> },
    /// Binary consensus: 2 per agent playing strategy 1, plus 1 per graph
    /// edge whose endpoints agree.
    Consensus,
    /// Sum over graph edges of the potential of a symmetric two-player game
    /// given as a bimatrix; that game must itself admit a potential.
    EdgePotentialSum {
        row_payoffs: Vec<RatValue>,
        col_payoffs: Vec<RatValue>,
    },
}

/// Utilities: per player in fixed mode, per state and player otherwise.
/// All vectors are full-length structure vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UtilitySpec {
    StateBased(Vec<Vec<Vec<RatValue>>>),
    Fixed(Vec<Vec<RatValue>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurSpec {
    pub cadence: Cadence,
    pub information: InfoMode,
}

impl Default for SurSpec {
    fn default() -> Self {
        SurSpec {
            cadence: Cadence::RoundRobin,
            information: InfoMode::Global,
        }
    }
}

fn default_sep() -> Sep {
    Sep::Sep2
}

fn default_epsilon() -> RatValue {
    RatValue(crate::ratmat::ratq(1, 10))
}

/// The on-disk system description. `validate` checks every invariant the
/// schema cannot express; the `build_*` methods produce in-memory models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDefinition {
    pub players: usize,
    pub cardinalities: Vec<usize>,
    pub mode: Mode,
    /// Fixed-mode interaction graph; omitted means the complete graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    /// State-based mode only: labels and per-state edge lists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<StateDef>>,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<UtilitySpec>,
    #[serde(default = "default_sep")]
    pub sep: Sep,
    #[serde(default = "default_epsilon")]
    pub epsilon: RatValue,
    #[serde(default)]
    pub sur: SurSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Optional simulation start: 1-based state index (state-based mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<usize>,
    /// Optional simulation start: 1-based strategy per player.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_profile: Option<Vec<usize>>,
}

impl SystemDefinition {
    pub fn from_json(text: &str) -> Result<Self, DefError> {
        let def: SystemDefinition = serde_json::from_str(text)?;
        def.validate()?;
        Ok(def)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DefError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DefError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("definition serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DefError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_pretty() + "\n").map_err(|source| DefError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn profile_count(&self) -> usize {
        self.cardinalities.iter().product()
    }

    pub fn state_count(&self) -> usize {
        match self.mode {
            Mode::Fixed => 1,
            Mode::StateBased => self.states.as_ref().map_or(0, |s| s.len()),
        }
    }

    fn check_edges(&self, field: &str, edges: &[(usize, usize)]) -> Result<(), DefError> {
        for &(i, j) in edges {
            if i < 1 || j < 1 || i > self.players || j > self.players || i == j {
                return Err(schema(
                    field,
                    format!("edge ({i}, {j}) does not join two distinct players in 1..={}", self.players),
                ));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DefError> {
        if self.players == 0 {
            return Err(schema("players", "at least one player required"));
        }
        if self.cardinalities.len() != self.players {
            return Err(schema(
                "cardinalities",
                format!(
                    "{} entries for {} players",
                    self.cardinalities.len(),
                    self.players
                ),
            ));
        }
        if self.cardinalities.iter().any(|&k| k < 2) {
            return Err(schema("cardinalities", "every player needs >= 2 strategies"));
        }
        match self.mode {
            Mode::Fixed => {
                if self.states.is_some() {
                    return Err(schema("states", "states are only valid in state_based mode"));
                }
                if let Some(edges) = &self.edges {
                    self.check_edges("edges", edges)?;
                }
            }
            Mode::StateBased => {
                if self.edges.is_some() {
                    return Err(schema("edges", "use per-state edge lists in state_based mode"));
                }
                let states = self
                    .states
                    .as_ref()
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| schema("states", "state_based mode needs >= 1 state"))?;
                for (idx, st) in states.iter().enumerate() {
                    self.check_edges(&format!("states[{idx}].edges"), &st.edges)?;
                }
            }
        }
        let total = self.profile_count();
        let r = self.state_count();
        if let ObjectiveSpec::Explicit { blocks } = &self.objective {
            if blocks.len() != r {
                return Err(schema(
                    "objective.blocks",
                    format!("{} blocks for {} states", blocks.len(), r),
                ));
            }
            if blocks.iter().any(|b| b.len() != total) {
                return Err(schema(
                    "objective.blocks",
                    format!("every block must have {total} entries"),
                ));
            }
        }
        if let ObjectiveSpec::EdgePotentialSum {
            row_payoffs,
            col_payoffs,
        } = &self.objective
        {
            let card = self.cardinalities[0];
            if self.cardinalities.iter().any(|&k| k != card) {
                return Err(schema(
                    "objective",
                    "edge_potential_sum needs equal cardinalities",
                ));
            }
            if row_payoffs.len() != card * card || col_payoffs.len() != card * card {
                return Err(schema(
                    "objective",
                    format!("bimatrix payoff vectors must have {} entries", card * card),
                ));
            }
        }
        match (&self.utilities, self.mode) {
            (Some(UtilitySpec::Fixed(per_player)), Mode::Fixed) => {
                if per_player.len() != self.players
                    || per_player.iter().any(|v| v.len() != total)
                {
                    return Err(schema(
                        "utilities",
                        format!("need {} vectors of {} entries", self.players, total),
                    ));
                }
            }
            (Some(UtilitySpec::StateBased(per_state)), Mode::StateBased) => {
                if per_state.len() != r
                    || per_state
                        .iter()
                        .any(|p| p.len() != self.players || p.iter().any(|v| v.len() != total))
                {
                    return Err(schema(
                        "utilities",
                        format!("need {r} x {} vectors of {total} entries", self.players),
                    ));
                }
            }
            (Some(_), _) => {
                return Err(schema("utilities", "utility nesting does not match mode"));
            }
            (None, _) => {}
        }
        let eps = &self.epsilon.0;
        if *eps <= Rat::from_integer(0.into()) || *eps >= Rat::from_integer(1.into()) {
            return Err(schema("epsilon", format!("{} not in (0, 1)", format_rat(eps))));
        }
        if let Some(x0) = self.initial_state {
            if self.mode == Mode::Fixed {
                return Err(schema("initial_state", "only valid in state_based mode"));
            }
            if x0 < 1 || x0 > r {
                return Err(schema("initial_state", format!("{x0} not in 1..={r}")));
            }
        }
        if let Some(a0) = &self.initial_profile {
            if a0.len() != self.players {
                return Err(schema("initial_profile", "one strategy per player"));
            }
            for (i, (&s, &k)) in a0.iter().zip(&self.cardinalities).enumerate() {
                if s < 1 || s > k {
                    return Err(schema(
                        "initial_profile",
                        format!("strategy {s} for player {} not in 1..={k}", i + 1),
                    ));
                }
            }
        }
        Ok(())
    }

    /// One topology per state (a single one in fixed mode).
    pub fn topologies(&self) -> Result<Vec<NetworkTopology>, DefError> {
        match self.mode {
            Mode::Fixed => {
                let topo = match &self.edges {
                    Some(edges) => NetworkTopology::new(self.players, edges)?,
                    None => NetworkTopology::complete(self.players),
                };
                Ok(vec![topo])
            }
            Mode::StateBased => self
                .states
                .as_ref()
                .expect("validated")
                .iter()
                .map(|st| Ok(NetworkTopology::new(self.players, &st.edges)?))
                .collect(),
        }
    }

    pub fn state_labels(&self) -> Vec<String> {
        match &self.states {
            Some(states) => states.iter().map(|s| s.label.clone()).collect(),
            None => vec!["-".to_string()],
        }
    }

    /// Materializes the objective; recipe objectives are expanded against
    /// the (per-state) topologies.
    pub fn build_objective(&self) -> Result<ObjectiveFunction, DefError> {
        let k = &self.cardinalities;
        match &self.objective {
            ObjectiveSpec::Explicit { blocks } => {
                let blocks: Vec<Vec<Rat>> = blocks.iter().map(|b| unwrap_rats(b)).collect();
                if self.mode == Mode::Fixed {
                    Ok(ObjectiveFunction::fixed(blocks.into_iter().next().unwrap()))
                } else {
                    Ok(ObjectiveFunction::state_based(blocks)?)
                }
            }
            ObjectiveSpec::Consensus => {
                let topos = self.topologies()?;
                let obj = consensus_objective(&topos, k)?;
                if self.mode == Mode::Fixed {
                    Ok(ObjectiveFunction::fixed(obj.block(1).to_vec()))
                } else {
                    Ok(obj)
                }
            }
            ObjectiveSpec::EdgePotentialSum {
                row_payoffs,
                col_payoffs,
            } => {
                let card = k[0];
                let fng = Fng::new(card, unwrap_rats(row_payoffs), unwrap_rats(col_payoffs))?;
                let pair_game = FiniteGame::new(
                    vec![card, card],
                    vec![
                        (0..card * card).map(|p| fng.row_payoff(p / card + 1, p % card + 1)).collect(),
                        (0..card * card).map(|p| fng.col_payoff(p / card + 1, p % card + 1)).collect(),
                    ],
                )?;
                let cert = is_potential(&pair_game).ok_or_else(|| {
                    schema("objective", "the edge bimatrix game admits no potential")
                })?;
                let topos = self.topologies()?;
                let blocks: Vec<Vec<Rat>> = topos
                    .iter()
                    .map(|t| edge_potential_sum(t, &cert.v_p, k).block(1).to_vec())
                    .collect();
                if self.mode == Mode::Fixed {
                    Ok(ObjectiveFunction::fixed(blocks.into_iter().next().unwrap()))
                } else {
                    Ok(ObjectiveFunction::state_based(blocks)?)
                }
            }
        }
    }

    /// The fixed-mode game from the stored utilities; `Missing` if absent.
    pub fn fixed_game(&self) -> Result<FiniteGame, DefError> {
        if self.mode != Mode::Fixed {
            return Err(schema("mode", "fixed_game needs fixed mode"));
        }
        match &self.utilities {
            Some(UtilitySpec::Fixed(per_player)) => Ok(FiniteGame::new(
                self.cardinalities.clone(),
                per_player.iter().map(|v| unwrap_rats(v)).collect(),
            )?),
            _ => Err(DefError::Missing(
                "no utilities in the definition (run `design` first)".into(),
            )),
        }
    }

    /// The state-based game from the stored utilities; `Missing` if absent.
    pub fn state_based_game(&self) -> Result<StateBasedGame, DefError> {
        if self.mode != Mode::StateBased {
            return Err(schema("mode", "state_based_game needs state_based mode"));
        }
        let Some(UtilitySpec::StateBased(per_state)) = &self.utilities else {
            return Err(DefError::Missing(
                "no utilities in the definition (run `design` first)".into(),
            ));
        };
        let objective = self.build_objective()?;
        let m_p = build_mp(&objective, &self.cardinalities, self.sep)?;
        Ok(StateBasedGame::new(
            self.cardinalities.clone(),
            self.state_labels(),
            self.topologies()?,
            objective,
            per_state
                .iter()
                .map(|p| p.iter().map(|v| unwrap_rats(v)).collect())
                .collect(),
            m_p,
            self.epsilon.0.clone(),
        )?)
    }

    /// Stores designed utilities back into the definition so the file
    /// round-trips as simulate/verify input.
    pub fn with_utilities_fixed(&self, per_player: &[Vec<Rat>]) -> SystemDefinition {
        let mut out = self.clone();
        out.utilities = Some(UtilitySpec::Fixed(
            per_player.iter().map(|v| wrap_rats(v)).collect(),
        ));
        out
    }

    pub fn with_utilities_state_based(&self, per_state: &[Vec<Vec<Rat>>]) -> SystemDefinition {
        let mut out = self.clone();
        out.utilities = Some(UtilitySpec::StateBased(
            per_state
                .iter()
                .map(|p| p.iter().map(|v| wrap_rats(v)).collect())
                .collect(),
        ));
        out
    }

    /// Simulation start, defaulting to state 1 and the all-ones profile.
    pub fn initial_condition(&self) -> (usize, StrategyProfile) {
        let x0 = self.initial_state.unwrap_or(1);
        let a0 = self
            .initial_profile
            .clone()
            .unwrap_or_else(|| vec![1; self.players]);
        (x0, StrategyProfile(a0))
    }
}
