//! Finite games in structure-vector form, network topologies, objective
//! functions, payoff evaluation and brute-force Nash enumeration.
//!
//! Profile indexing convention used everywhere (files, traces, matrices):
//! player 1 is most significant, indices are 1-based, so profile (1,...,1)
//! maps to index 1 and (k_1,...,k_n) to index k.

use crate::ratmat::{MatError, Rat, RatMatrix};
use crate::stp::{delta_product, DeltaVector};
use num::Zero;
use std::collections::BTreeSet;

/// One pure strategy per player, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(pub Vec<usize>);

impl StrategyProfile {
    pub fn new(a: Vec<usize>, k: &[usize]) -> Result<Self, MatError> {
        if a.len() != k.len() {
            return Err(MatError::DimMismatch(format!(
                "profile of length {} for {} players",
                a.len(),
                k.len()
            )));
        }
        for (i, (&ai, &ki)) in a.iter().zip(k).enumerate() {
            if ai < 1 || ai > ki {
                return Err(MatError::IndexOutOfRange(format!(
                    "strategy {} of player {} (k_i = {})",
                    ai,
                    i + 1,
                    ki
                )));
            }
        }
        Ok(StrategyProfile(a))
    }

    /// 1-based lexicographic index, player 1 most significant.
    pub fn index(&self, k: &[usize]) -> usize {
        let factors: Vec<DeltaVector> = self
            .0
            .iter()
            .zip(k)
            .map(|(&a, &ki)| DeltaVector::new(ki, a).expect("validated at construction"))
            .collect();
        delta_product(&factors).expect("nonempty").index
    }

    /// Inverse of `index`.
    pub fn from_index(mut idx: usize, k: &[usize]) -> Self {
        debug_assert!(idx >= 1);
        idx -= 1;
        let mut a = vec![0usize; k.len()];
        for (i, &ki) in k.iter().enumerate().rev() {
            a[i] = idx % ki + 1;
            idx /= ki;
        }
        StrategyProfile(a)
    }

    /// Iterates over all profiles in index order.
    pub fn all(k: &[usize]) -> impl Iterator<Item = StrategyProfile> + '_ {
        let total: usize = k.iter().product();
        (1..=total).map(move |i| StrategyProfile::from_index(i, k))
    }

    pub fn with_strategy(&self, player: usize, strategy: usize) -> StrategyProfile {
        let mut a = self.0.clone();
        a[player - 1] = strategy;
        StrategyProfile(a)
    }
}

/// Finite game given by per-player structure vectors V^c_i of length
/// k = prod k_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGame {
    k: Vec<usize>,
    utilities: Vec<Vec<Rat>>,
}

impl FiniteGame {
    pub fn new(k: Vec<usize>, utilities: Vec<Vec<Rat>>) -> Result<Self, MatError> {
        if k.is_empty() {
            return Err(MatError::DimMismatch("no players".into()));
        }
        if let Some(&bad) = k.iter().find(|&&ki| ki < 2) {
            return Err(MatError::DimMismatch(format!(
                "strategy cardinality {} < 2",
                bad
            )));
        }
        let total: usize = k.iter().product();
        if utilities.len() != k.len() {
            return Err(MatError::DimMismatch(format!(
                "{} utility vectors for {} players",
                utilities.len(),
                k.len()
            )));
        }
        if let Some(v) = utilities.iter().find(|v| v.len() != total) {
            return Err(MatError::DimMismatch(format!(
                "utility vector of length {} (profile space is {})",
                v.len(),
                total
            )));
        }
        Ok(FiniteGame { k, utilities })
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

    pub fn utility_vector(&self, i: usize) -> &[Rat] {
        &self.utilities[i - 1]
    }

    /// c_i(a): entry of V^c_i at the profile's lexicographic index.
    pub fn payoff(&self, i: usize, a: &StrategyProfile) -> Rat {
        self.utilities[i - 1][a.index(&self.k) - 1].clone()
    }

    /// Exhaustive scan for pure Nash equilibria: profiles with no strictly
    /// improving unilateral deviation.
    pub fn pure_nash_equilibria(&self) -> BTreeSet<StrategyProfile> {
        StrategyProfile::all(&self.k)
            .filter(|a| self.is_nash(a))
            .collect()
    }

    pub fn is_nash(&self, a: &StrategyProfile) -> bool {
        for i in 1..=self.n() {
            let current = self.payoff(i, a);
            for s in 1..=self.k[i - 1] {
                if s == a.0[i - 1] {
                    continue;
                }
                if self.payoff(i, &a.with_strategy(i, s)) > current {
                    return false;
                }
            }
        }
        true
    }
}

/// Undirected graph on players 1..n; neighborhoods always include self.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl NetworkTopology {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, MatError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a < 1 || a > n || b < 1 || b > n {
                return Err(MatError::IndexOutOfRange(format!("edge ({}, {})", a, b)));
            }
            if a == b {
                continue; // self-loops carry no information; i ∈ U(i) is implied
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(NetworkTopology { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = BTreeSet::new();
        for a in 1..=n {
            for b in a + 1..=n {
                edges.insert((a, b));
            }
        }
        NetworkTopology { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    /// U(i) = {i} ∪ neighbors of i.
    pub fn neighborhood(&self, i: usize) -> Vec<usize> {
        let mut u: BTreeSet<usize> = [i].into();
        for &(a, b) in &self.edges {
            if a == i {
                u.insert(b);
            } else if b == i {
                u.insert(a);
            }
        }
        u.into_iter().collect()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.neighborhood(i).into_iter().filter(|&j| j != i).collect()
    }
}

/// Two-player fundamental network game; all nodes share one cardinality.
/// `row_payoffs`/`col_payoffs` are structure vectors over (row, col) pairs,
/// row player most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fng {
    card: usize,
    row_payoffs: Vec<Rat>,
    col_payoffs: Vec<Rat>,
}

impl Fng {
    pub fn new(card: usize, row_payoffs: Vec<Rat>, col_payoffs: Vec<Rat>) -> Result<Self, MatError> {
        if row_payoffs.len() != card * card || col_payoffs.len() != card * card {
            return Err(MatError::DimMismatch(format!(
                "bimatrix vectors must have length {}",
                card * card
            )));
        }
        Ok(Fng {
            card,
            row_payoffs,
            col_payoffs,
        })
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn is_symmetric(&self) -> bool {
        for a in 1..=self.card {
            for b in 1..=self.card {
                if self.row_payoff(a, b) != self.col_payoff(b, a) {
                    return false;
                }
            }
        }
        true
    }

    pub fn row_payoff(&self, row_strat: usize, col_strat: usize) -> Rat {
        self.row_payoffs[(row_strat - 1) * self.card + (col_strat - 1)].clone()
    }

    pub fn col_payoff(&self, row_strat: usize, col_strat: usize) -> Rat {
        self.col_payoffs[(row_strat - 1) * self.card + (col_strat - 1)].clone()
    }
}

/// Overall payoff of player i: sum of its FNG payoffs against each neighbor,
/// with i in the row role of every pairwise game.
pub fn aggregate_utility(
    topology: &NetworkTopology,
    fng: &Fng,
    i: usize,
    a: &StrategyProfile,
) -> Rat {
    let mut total = Rat::zero();
    for j in topology.neighbors(i) {
        total += fng.row_payoff(a.0[i - 1], a.0[j - 1]);
    }
    total
}

/// Assembles the full FiniteGame whose utilities agree with
/// `aggregate_utility` on every profile.
pub fn network_game(topology: &NetworkTopology, fng: &Fng) -> FiniteGame {
    let n = topology.n();
    let k = vec![fng.card(); n];
    let total: usize = k.iter().product();
    let mut utilities = Vec::with_capacity(n);
    for i in 1..=n {
        let mut v = Vec::with_capacity(total);
        for a in StrategyProfile::all(&k) {
            v.push(aggregate_utility(topology, fng, i, &a));
        }
        utilities.push(v);
    }
    FiniteGame::new(k, utilities).expect("lengths consistent by construction")
}

/// System objective in structure-vector form: one block per state
/// (fixed-topology objectives have a single block).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveFunction {
    profile_count: usize,
    blocks: Vec<Vec<Rat>>,
}

impl ObjectiveFunction {
    pub fn fixed(v: Vec<Rat>) -> Self {
        ObjectiveFunction {
            profile_count: v.len(),
            blocks: vec![v],
        }
    }

    pub fn state_based(blocks: Vec<Vec<Rat>>) -> Result<Self, MatError> {
        let Some(first) = blocks.first() else {
            return Err(MatError::DimMismatch("no objective blocks".into()));
        };
        let len = first.len();
        if blocks.iter().any(|b| b.len() != len) {
            return Err(MatError::DimMismatch("unequal objective block lengths".into()));
        }
        Ok(ObjectiveFunction {
            profile_count: len,
            blocks,
        })
    }

    pub fn state_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_state_based(&self) -> bool {
        self.blocks.len() > 1
    }

    pub fn profile_count(&self) -> usize {
        self.profile_count
    }

    /// Structure vector of φ(x_i, ·) (1-based state).
    pub fn block(&self, state: usize) -> &[Rat] {
        &self.blocks[state - 1]
    }

    pub fn blocks(&self) -> &[Vec<Rat>] {
        &self.blocks
    }

    /// Flat r·k structure vector, state-major.
    pub fn flat(&self) -> Vec<Rat> {
        self.blocks.iter().flatten().cloned().collect()
    }

    /// φ(x, a); `state` must be given iff the objective is state based
    /// (for single-block objectives `None` reads the only block).
    pub fn eval(
        &self,
        state: Option<usize>,
        a: &StrategyProfile,
        k: &[usize],
    ) -> Result<Rat, MatError> {
        let block = match (state, self.blocks.len()) {
            (None, 1) => &self.blocks[0],
            (Some(x), r) if x >= 1 && x <= r => &self.blocks[x - 1],
            (Some(x), r) => {
                return Err(MatError::IndexOutOfRange(format!("state {} of {}", x, r)))
            }
            (None, _) => {
                return Err(MatError::DimMismatch(
                    "state index required for a state based objective".into(),
                ))
            }
        };
        Ok(block[a.index(k) - 1].clone())
    }
}

/// Consensus objective of a switched-topology system with binary agents:
/// φ(x, a) = 2·|{i : a_i = 1}| + Σ over ordered adjacent pairs of
/// 1{a_i = a_j}/2 (each undirected edge contributes twice).
pub fn consensus_objective(
    per_state_topologies: &[NetworkTopology],
    k: &[usize],
) -> Result<ObjectiveFunction, MatError> {
    if k.iter().any(|&ki| ki != 2) {
        return Err(MatError::DimMismatch(
            "consensus objective requires binary agents".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(per_state_topologies.len());
    for topo in per_state_topologies {
        if topo.n() != k.len() {
            return Err(MatError::DimMismatch(format!(
                "topology on {} nodes for {} players",
                topo.n(),
                k.len()
            )));
        }
        let mut block = Vec::new();
        for a in StrategyProfile::all(k) {
            let ones = a.0.iter().filter(|&&ai| ai == 1).count() as i64;
            let mut agree = Rat::zero();
            for &(i, j) in topo.edges() {
                if a.0[i - 1] == a.0[j - 1] {
                    // ordered pairs: 2 * (1/2) per undirected edge
                    agree += crate::ratmat::rat(1);
                }
            }
            block.push(crate::ratmat::rat(2 * ones) + agree);
        }
        blocks.push(block);
    }
    ObjectiveFunction::state_based(blocks)
}

/// Expands a structure vector to a 1 x k RatMatrix row.
pub fn row_vector(v: &[Rat]) -> RatMatrix {
    RatMatrix::row_from_vec(v.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::rat;

    fn prisoners_dilemma() -> Fng {
        // Table: (1,1) -> 3,3; (1,2) -> 0,5; (2,1) -> 5,0; (2,2) -> 1,1
        Fng::new(
            2,
            vec![rat(3), rat(0), rat(5), rat(1)],
            vec![rat(3), rat(5), rat(0), rat(1)],
        )
        .unwrap()
    }

    fn pd_game() -> FiniteGame {
        let topo = NetworkTopology::new(2, &[(1, 2)]).unwrap();
        network_game(&topo, &prisoners_dilemma())
    }

    #[test]
    fn profile_index_roundtrip() {
        let k = [2usize, 3, 2];
        for a in StrategyProfile::all(&k) {
            let idx = a.index(&k);
            assert_eq!(StrategyProfile::from_index(idx, &k), a);
        }
    }

    #[test]
    fn payoff_reads_structure_vector() {
        // Example game: V^c_1 = [2,2,1,1,1,1,0,0]
        let k = vec![2, 2, 2];
        let v1: Vec<Rat> = [2, 2, 1, 1, 1, 1, 0, 0].iter().map(|&x| rat(x)).collect();
        let g = FiniteGame::new(k.clone(), vec![v1.clone(), v1.clone(), v1]).unwrap();
        let a = StrategyProfile::new(vec![1, 1, 1], &k).unwrap();
        assert_eq!(g.payoff(1, &a), rat(2));
    }

    #[test]
    fn pd_row_payoff() {
        let g = pd_game();
        let a = StrategyProfile::new(vec![2, 1], &[2, 2]).unwrap();
        assert_eq!(g.payoff(1, &a), rat(5));
    }

    #[test]
    fn constant_game_payoff() {
        let k = vec![2, 2];
        let v: Vec<Rat> = vec![rat(7); 4];
        let g = FiniteGame::new(k.clone(), vec![v.clone(), v]).unwrap();
        for a in StrategyProfile::all(&k) {
            assert_eq!(g.payoff(1, &a), rat(7));
            assert_eq!(g.payoff(2, &a), rat(7));
        }
    }

    #[test]
    fn aggregate_utility_fig3() {
        // square network: edges {1-2, 1-3, 2-4, 3-4}
        let topo = NetworkTopology::new(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let fng = prisoners_dilemma();
        let k = [2usize; 4];
        let all_coop = StrategyProfile::new(vec![1, 1, 1, 1], &k).unwrap();
        assert_eq!(aggregate_utility(&topo, &fng, 1, &all_coop), rat(6));
        let defect1 = StrategyProfile::new(vec![2, 1, 1, 1], &k).unwrap();
        assert_eq!(aggregate_utility(&topo, &fng, 1, &defect1), rat(10));
    }

    #[test]
    fn aggregate_isolated_node() {
        let topo = NetworkTopology::new(3, &[(1, 2)]).unwrap();
        let fng = prisoners_dilemma();
        let a = StrategyProfile::new(vec![1, 1, 1], &[2, 2, 2]).unwrap();
        assert_eq!(aggregate_utility(&topo, &fng, 3, &a), rat(0));
    }

    #[test]
    fn network_game_matches_aggregate() {
        let topo = NetworkTopology::new(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let fng = prisoners_dilemma();
        let g = network_game(&topo, &fng);
        for a in StrategyProfile::all(g.k()) {
            for i in 1..=4 {
                assert_eq!(g.payoff(i, &a), aggregate_utility(&topo, &fng, i, &a));
            }
        }
    }

    #[test]
    fn network_game_single_edge_and_empty() {
        let fng = prisoners_dilemma();
        let single = network_game(&NetworkTopology::new(2, &[(1, 2)]).unwrap(), &fng);
        let k = [2usize, 2];
        for a in StrategyProfile::all(&k) {
            assert_eq!(single.payoff(1, &a), fng.row_payoff(a.0[0], a.0[1]));
            assert_eq!(single.payoff(2, &a), fng.row_payoff(a.0[1], a.0[0]));
        }
        let empty = network_game(&NetworkTopology::new(2, &[]).unwrap(), &fng);
        for a in StrategyProfile::all(&k) {
            assert_eq!(empty.payoff(1, &a), rat(0));
        }
    }

    #[test]
    fn network_game_payoff_depends_only_on_neighborhood() {
        let topo = NetworkTopology::new(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let g = network_game(&topo, &prisoners_dilemma());
        for i in 1..=4 {
            let u = topo.neighborhood(i);
            for a in StrategyProfile::all(g.k()) {
                for b in StrategyProfile::all(g.k()) {
                    if u.iter().all(|&j| a.0[j - 1] == b.0[j - 1]) {
                        assert_eq!(g.payoff(i, &a), g.payoff(i, &b));
                    }
                }
            }
        }
    }

    #[test]
    fn pd_nash_is_defect_defect() {
        let g = pd_game();
        let nash = g.pure_nash_equilibria();
        let dd = StrategyProfile::new(vec![2, 2], &[2, 2]).unwrap();
        assert_eq!(nash, [dd].into_iter().collect());
    }

    #[test]
    fn constant_game_all_nash() {
        let k = vec![2, 2];
        let v: Vec<Rat> = vec![rat(0); 4];
        let g = FiniteGame::new(k, vec![v.clone(), v]).unwrap();
        assert_eq!(g.pure_nash_equilibria().len(), 4);
    }

    #[test]
    fn objective_eval_modes() {
        let k = [2usize, 2, 2];
        let v: Vec<Rat> = [3, 2, 2, 1, 2, 1, 1, 0].iter().map(|&x| rat(x)).collect();
        let phi = ObjectiveFunction::fixed(v);
        let a111 = StrategyProfile::new(vec![1, 1, 1], &k).unwrap();
        assert_eq!(phi.eval(None, &a111, &k).unwrap(), rat(3));
        let a222 = StrategyProfile::new(vec![2, 2, 2], &k).unwrap();
        assert_eq!(phi.eval(None, &a222, &k).unwrap(), rat(0));

        let sb = ObjectiveFunction::state_based(vec![vec![rat(1); 4], vec![rat(2); 4]]).unwrap();
        let a = StrategyProfile::new(vec![1, 1], &[2, 2]).unwrap();
        assert_eq!(sb.eval(Some(2), &a, &[2, 2]).unwrap(), rat(2));
        assert!(sb.eval(None, &a, &[2, 2]).is_err());
        assert!(sb.eval(Some(3), &a, &[2, 2]).is_err());
    }
}
