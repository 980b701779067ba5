//! Potential-game verification via the potential equation and fixed-topology
//! local-information utility design.
//!
//! A game with structure vectors V^c_i is potential iff the block system
//! [-E_1 E_i ...] ξ = (V^c_i - V^c_1)^T is consistent; the potential's
//! structure vector is then V^P = V^c_1 - ξ_1^T E_1^T. Utility design inverts
//! the decomposition V^φ = V^c_i Γ_{U(i)} + V^d_i E_i^T per player.

use crate::game::{FiniteGame, ObjectiveFunction, StrategyProfile};
use crate::ratmat::{MatError, Rat, RatMatrix};
use crate::stp::{drawing_matrix, e_matrix};
use num::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PotentialError {
    #[error("the potential equation is undefined for a single-player game")]
    SinglePlayer,
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Witness that a game is potential: the ξ blocks solving the potential
/// equation and the resulting potential structure vector V^P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialCertificate {
    /// ξ_i blocks, each of length k/k_i.
    pub xi: Vec<Vec<Rat>>,
    /// Structure vector of the potential function, length k.
    pub v_p: Vec<Rat>,
}

impl PotentialCertificate {
    /// V^P shifted so the potential vanishes at profile (1,...,1); potentials
    /// are unique up to a constant, so this is the canonical representative.
    pub fn normalized_v_p(&self) -> Vec<Rat> {
        normalize_at_first(&self.v_p)
    }
}

/// Subtracts the first entry from every entry.
pub fn normalize_at_first(v: &[Rat]) -> Vec<Rat> {
    let c = v[0].clone();
    v.iter().map(|x| x - &c).collect()
}

/// Coefficient matrix and right-hand side of the potential equation.
/// Shape: ((n-1)·k) x (Σ_i k/k_i); block row for player i = 2..n is
/// [-E_1, 0, ..., E_i, ..., 0] with rhs (V^c_i - V^c_1)^T.
pub fn build_potential_equation(
    g: &FiniteGame,
) -> Result<(RatMatrix, Vec<Rat>), PotentialError> {
    let n = g.n();
    if n < 2 {
        return Err(PotentialError::SinglePlayer);
    }
    let k = g.k();
    let total = g.profile_count();
    let e: Vec<RatMatrix> = (1..=n).map(|i| e_matrix(i, k).unwrap()).collect();
    let col_widths: Vec<usize> = (0..n).map(|i| total / k[i]).collect();

    let mut block_rows: Vec<RatMatrix> = Vec::with_capacity(n - 1);
    let mut rhs: Vec<Rat> = Vec::with_capacity((n - 1) * total);
    for i in 2..=n {
        let mut row = e[0].scale(&crate::ratmat::rat(-1));
        for j in 2..=n {
            let block = if j == i {
                e[i - 1].clone()
            } else {
                RatMatrix::zeros(total, col_widths[j - 1])
            };
            row = row.hstack(&block)?;
        }
        block_rows.push(row);
        let vi = g.utility_vector(i);
        let v1 = g.utility_vector(1);
        rhs.extend(vi.iter().zip(v1).map(|(a, b)| a - b));
    }
    let mut mat = block_rows.remove(0);
    for b in block_rows {
        mat = mat.vstack(&b)?;
    }
    Ok((mat, rhs))
}

/// Solves the potential equation. `None` means "not a potential game".
/// Single-player games are potential with V^P = V^c_1 by convention.
pub fn is_potential(g: &FiniteGame) -> Option<PotentialCertificate> {
    if g.n() == 1 {
        return Some(PotentialCertificate {
            xi: vec![vec![Rat::zero(); 1]],
            v_p: g.utility_vector(1).to_vec(),
        });
    }
    let (mat, rhs) = build_potential_equation(g).expect("n >= 2");
    let xi_flat = mat.solve_linear(&rhs).expect("dims consistent")?;
    let k = g.k();
    let total = g.profile_count();
    let mut xi = Vec::with_capacity(g.n());
    let mut offset = 0;
    for i in 0..g.n() {
        let w = total / k[i];
        xi.push(xi_flat[offset..offset + w].to_vec());
        offset += w;
    }
    // V^P = V^c_1 - ξ_1^T E_1^T
    let e1 = e_matrix(1, k).unwrap();
    let xi1_row = RatMatrix::row_from_vec(xi[0].clone());
    let correction = xi1_row.mul(&e1.transpose()).unwrap();
    let v_p: Vec<Rat> = g
        .utility_vector(1)
        .iter()
        .enumerate()
        .map(|(j, v)| v - &correction[(0, j)])
        .collect();
    Some(PotentialCertificate { xi, v_p })
}

/// Exhaustive check of the potential definition: every unilateral deviation
/// changes c_i and P by the same amount.
pub fn verify_potential_def(g: &FiniteGame, v_p: &[Rat]) -> Result<bool, MatError> {
    if v_p.len() != g.profile_count() {
        return Err(MatError::DimMismatch(format!(
            "potential vector of length {} for {} profiles",
            v_p.len(),
            g.profile_count()
        )));
    }
    let k = g.k();
    for a in StrategyProfile::all(k) {
        let ia = a.index(k);
        for i in 1..=g.n() {
            for alt in 1..=k[i - 1] {
                if alt == a.0[i - 1] {
                    continue;
                }
                let b = a.with_strategy(i, alt);
                let ib = b.index(k);
                let dc = g.payoff(i, &b) - g.payoff(i, &a);
                let dp = &v_p[ib - 1] - &v_p[ia - 1];
                if dc != dp {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Stacked [Γ_{U(i)}; E_i^T] for one player.
pub fn player_span_matrix(u: &[usize], i: usize, k: &[usize]) -> Result<RatMatrix, MatError> {
    let gamma = drawing_matrix(u, k)?;
    let ei_t = e_matrix(i, k)?.transpose();
    gamma.vstack(&ei_t)
}

/// Basis of the n-fold intersection of the per-player row spaces
/// [Γ_{U(i)}; E_i^T]; the designable objectives are exactly its row span.
pub fn designability_basis(
    neighborhoods: &[Vec<usize>],
    k: &[usize],
) -> Result<RatMatrix, MatError> {
    let mut basis: Option<RatMatrix> = None;
    for (idx, u) in neighborhoods.iter().enumerate() {
        let span = player_span_matrix(u, idx + 1, k)?;
        basis = Some(match basis {
            None => span.row_space_basis(),
            Some(b) => b.row_space_intersection(&span)?,
        });
    }
    Ok(basis.expect("at least one player"))
}

/// True iff V^φ lies in rowspace([Γ_{U(i)}; E_i^T]) for every player
/// (membership in the intersection, tested per player).
pub fn check_designability(
    phi: &ObjectiveFunction,
    neighborhoods: &[Vec<usize>],
    k: &[usize],
) -> Result<bool, MatError> {
    let total: usize = k.iter().product();
    let v = phi.block(1);
    if v.len() != total || phi.is_state_based() {
        return Err(MatError::DimMismatch(
            "check_designability expects a fixed-topology objective".into(),
        ));
    }
    for (idx, u) in neighborhoods.iter().enumerate() {
        let span = player_span_matrix(u, idx + 1, k)?;
        if !span.in_row_space(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First player (1-based) failing the membership test, if any.
pub fn first_designability_failure(
    phi_block: &[Rat],
    neighborhoods: &[Vec<usize>],
    k: &[usize],
) -> Result<Option<usize>, MatError> {
    for (idx, u) in neighborhoods.iter().enumerate() {
        let span = player_span_matrix(u, idx + 1, k)?;
        if !span.in_row_space(phi_block)? {
            return Ok(Some(idx + 1));
        }
    }
    Ok(None)
}

/// Local-information utilities realizing a system objective as the game's
/// potential: V^φ = V^c_i Γ_{U(i)} + V^d_i E_i^T per player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityDesign {
    /// Per-player local structure vectors, length prod_{j in U(i)} k_j.
    pub utilities: Vec<Vec<Rat>>,
    /// Per-player residuals V^d_i, length k/k_i (functions of a_{-i}).
    pub residuals: Vec<Vec<Rat>>,
}

impl UtilityDesign {
    /// Lifts the local vectors to full-length structure vectors V^c_i Γ_{U(i)}.
    pub fn lifted_utilities(
        &self,
        neighborhoods: &[Vec<usize>],
        k: &[usize],
    ) -> Result<Vec<Vec<Rat>>, MatError> {
        let mut out = Vec::with_capacity(self.utilities.len());
        for (idx, local) in self.utilities.iter().enumerate() {
            let gamma = drawing_matrix(&neighborhoods[idx], k)?;
            let row = RatMatrix::row_from_vec(local.clone()).mul(&gamma)?;
            out.push(row.row(0));
        }
        Ok(out)
    }

    /// The induced full game; its potential is the designed objective.
    pub fn lifted_game(
        &self,
        neighborhoods: &[Vec<usize>],
        k: &[usize],
    ) -> Result<FiniteGame, MatError> {
        FiniteGame::new(k.to_vec(), self.lifted_utilities(neighborhoods, k)?)
    }
}

/// Solves V^c_i Γ_{U(i)} + V^d_i E_i^T = V^φ for every player, with free
/// variables pinned to 0. `None` iff the objective is not designable.
pub fn design_utilities(
    phi: &ObjectiveFunction,
    neighborhoods: &[Vec<usize>],
    k: &[usize],
) -> Result<Option<UtilityDesign>, MatError> {
    let total: usize = k.iter().product();
    let v = phi.block(1);
    if v.len() != total || phi.is_state_based() {
        return Err(MatError::DimMismatch(
            "design_utilities expects a fixed-topology objective".into(),
        ));
    }
    let mut utilities = Vec::with_capacity(neighborhoods.len());
    let mut residuals = Vec::with_capacity(neighborhoods.len());
    for (idx, u) in neighborhoods.iter().enumerate() {
        let i = idx + 1;
        let gamma = drawing_matrix(u, k)?;
        let ei = e_matrix(i, k)?;
        // transpose the row equation: [Γ^T | E_i] [c^T; d^T] = φ^T
        let system = gamma.transpose().hstack(&ei)?;
        let Some(sol) = system.solve_linear(v)? else {
            return Ok(None);
        };
        let local_len = gamma.rows();
        utilities.push(sol[..local_len].to_vec());
        residuals.push(sol[local_len..].to_vec());
    }
    Ok(Some(UtilityDesign {
        utilities,
        residuals,
    }))
}
