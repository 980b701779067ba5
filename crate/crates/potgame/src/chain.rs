//! Exact analysis of finite Markov chains given as column-stochastic
//! rational matrices: closed communicating classes, absorption
//! probabilities and expected hitting times via the fundamental matrix,
//! all over exact rationals.

use crate::ratmat::{MatError, Rat, RatMatrix};
use crate::stp::StochasticMatrix;
use num::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// Full decomposition of a finite chain. States are 0-based here; callers
/// map them back to their own (state, profile) labels.
#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    pub n: usize,
    /// Closed communicating classes (sorted member lists).
    pub closed_classes: Vec<Vec<usize>>,
    /// States outside every closed class.
    pub transient: Vec<usize>,
    /// absorption[s][c] = probability that the chain started at s is
    /// eventually absorbed into closed class c. Rows sum to 1.
    pub absorption: Vec<Vec<Rat>>,
    /// Expected number of steps until a closed class is entered (0 for
    /// states already inside one).
    pub expected_steps: Vec<Rat>,
}

/// p(from -> to) read off a column-stochastic matrix.
fn prob(m: &RatMatrix, from: usize, to: usize) -> &Rat {
    &m[(to, from)]
}

pub fn analyze(chain: &StochasticMatrix) -> Result<ChainAnalysis, MatError> {
    let m = chain.matrix();
    let n = m.rows();
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for from in 0..n {
        for to in 0..n {
            if !prob(m, from, to).is_zero() {
                graph.add_edge(nodes[from], nodes[to], ());
            }
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut closed_classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![usize::MAX; n];
    for scc in &sccs {
        let members: Vec<usize> = scc.iter().map(|ix| ix.index()).collect();
        let closed = members.iter().all(|&s| {
            (0..n).all(|to| members.contains(&to) || prob(m, s, to).is_zero())
        });
        if closed {
            let mut sorted = members.clone();
            sorted.sort_unstable();
            for &s in &sorted {
                class_of[s] = closed_classes.len();
            }
            closed_classes.push(sorted);
        }
    }
    closed_classes.sort();
    // re-index after sorting
    let mut class_of = vec![usize::MAX; n];
    for (c, members) in closed_classes.iter().enumerate() {
        for &s in members {
            class_of[s] = c;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| class_of[s] == usize::MAX).collect();
    let nt = transient.len();
    let nc = closed_classes.len();

    // fundamental-matrix step: solve (I - Q) X = [R | 1] exactly
    let mut q = RatMatrix::zeros(nt, nt);
    let mut r = RatMatrix::zeros(nt, nc);
    for (a, &s) in transient.iter().enumerate() {
        for (b, &t) in transient.iter().enumerate() {
            q[(a, b)] = prob(m, s, t).clone();
        }
        for to in 0..n {
            let c = class_of[to];
            if c != usize::MAX {
                let v = &r[(a, c)] + prob(m, s, to);
                r[(a, c)] = v;
            }
        }
    }
    let i_minus_q = RatMatrix::identity(nt).sub(&q)?;
    let mut absorption = vec![vec![Rat::zero(); nc]; n];
    let mut expected_steps = vec![Rat::zero(); n];
    for s in 0..n {
        if class_of[s] != usize::MAX {
            absorption[s][class_of[s]] = Rat::one();
        }
    }
    for c in 0..nc {
        let col = r.col(c);
        let sol = i_minus_q
            .solve_linear(&col)?
            .expect("I - Q is nonsingular for transient states");
        for (a, &s) in transient.iter().enumerate() {
            absorption[s][c] = sol[a].clone();
        }
    }
    let ones = vec![Rat::one(); nt];
    let steps = i_minus_q
        .solve_linear(&ones)?
        .expect("I - Q is nonsingular for transient states");
    for (a, &s) in transient.iter().enumerate() {
        expected_steps[s] = steps[a].clone();
    }
    Ok(ChainAnalysis {
        n,
        closed_classes,
        transient,
        absorption,
        expected_steps,
    })
}

/// Stationary distribution of a unichain (exactly one closed class):
/// the unique π with Pπ = π, Σπ = 1. `None` when several closed classes
/// make it non-unique.
pub fn stationary_distribution(chain: &StochasticMatrix) -> Result<Option<Vec<Rat>>, MatError> {
    let analysis = analyze(chain)?;
    if analysis.closed_classes.len() != 1 {
        return Ok(None);
    }
    let m = chain.matrix();
    let n = m.rows();
    let system = m
        .sub(&RatMatrix::identity(n))?
        .vstack(&RatMatrix::ones(1, n))?;
    let mut rhs = vec![Rat::zero(); n];
    rhs.push(Rat::one());
    Ok(system.solve_linear(&rhs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::{rat, ratq};

    fn stoch(cols: &[Vec<Rat>]) -> StochasticMatrix {
        let n = cols.len();
        let mut m = RatMatrix::zeros(cols[0].len(), n);
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = v.clone();
            }
        }
        StochasticMatrix::new(m).unwrap()
    }

    #[test]
    fn two_absorbing_states() {
        // 0 and 2 absorbing; 1 splits 1/3 to 0, 1/6 to 2, stays with 1/2
        let chain = stoch(&[
            vec![rat(1), rat(0), rat(0)],
            vec![ratq(1, 3), ratq(1, 2), ratq(1, 6)],
            vec![rat(0), rat(0), rat(1)],
        ]);
        let a = analyze(&chain).unwrap();
        assert_eq!(a.closed_classes, vec![vec![0], vec![2]]);
        assert_eq!(a.transient, vec![1]);
        assert_eq!(a.absorption[1], vec![ratq(2, 3), ratq(1, 3)]);
        assert_eq!(a.expected_steps[1], rat(2));
        assert_eq!(stationary_distribution(&chain).unwrap(), None);
    }

    #[test]
    fn single_closed_class_stationary() {
        // two states swapping mass: stationary is (1/2, 1/2)
        let chain = stoch(&[
            vec![ratq(1, 2), ratq(1, 2)],
            vec![ratq(1, 2), ratq(1, 2)],
        ]);
        let pi = stationary_distribution(&chain).unwrap().unwrap();
        assert_eq!(pi, vec![ratq(1, 2), ratq(1, 2)]);
    }

    #[test]
    fn closed_class_with_two_members() {
        // states {1, 2} cycle between themselves; 0 leaks into them
        let chain = stoch(&[
            vec![ratq(1, 2), ratq(1, 4), ratq(1, 4)],
            vec![rat(0), rat(0), rat(1)],
            vec![rat(0), rat(1), rat(0)],
        ]);
        let a = analyze(&chain).unwrap();
        assert_eq!(a.closed_classes, vec![vec![1, 2]]);
        assert_eq!(a.absorption[0], vec![rat(1)]);
        assert_eq!(a.expected_steps[0], rat(2));
    }
}
