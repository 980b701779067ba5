//! Semi-tensor product algebra and the structural matrices built on it:
//! swap matrices, delta vectors, logical/stochastic matrices, the E_i
//! "lift from a_{-i}" matrices and the U-drawing matrices Γ_U.

use crate::ratmat::{MatError, Rat, RatMatrix};
use num::{One, Zero};

/// Least common multiple of two positive integers.
fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Left semi-tensor product (A ⊗ I_{t/n})(B ⊗ I_{t/p}) with t = lcm(n, p).
/// Degenerates to the conventional product when cols(A) = rows(B).
pub fn stp(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.cols();
    let p = b.rows();
    if n == p {
        return a.mul(b).expect("dims match by construction");
    }
    let t = lcm(n, p);
    let left = a.kron(&RatMatrix::identity(t / n));
    let right = b.kron(&RatMatrix::identity(t / p));
    left.mul(&right).expect("lcm padding makes dims match")
}

/// A column basis vector δ_m^i (1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeltaVector {
    pub dim: usize,
    pub index: usize,
}

impl DeltaVector {
    pub fn new(dim: usize, index: usize) -> Result<Self, MatError> {
        if index < 1 || index > dim {
            return Err(MatError::IndexOutOfRange(format!(
                "delta_{}^{}",
                dim, index
            )));
        }
        Ok(DeltaVector { dim, index })
    }

    /// Expands to the dim x 1 column matrix.
    pub fn to_column(self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.dim, 1);
        m[(self.index - 1, 0)] = Rat::one();
        m
    }
}

/// STP of a list of delta vectors, computed in closed form: the first factor
/// is most significant, indices are 1-based.
pub fn delta_product(factors: &[DeltaVector]) -> Result<DeltaVector, MatError> {
    let Some(first) = factors.first() else {
        return Err(MatError::IndexOutOfRange("empty delta product".into()));
    };
    let mut dim = first.dim;
    let mut index = first.index;
    for f in &factors[1..] {
        dim *= f.dim;
        index = (index - 1) * f.dim + f.index;
    }
    Ok(DeltaVector { dim, index })
}

/// Logical matrix in compressed δ_m[i_1 ... i_r] form: one unit column per
/// entry of `col_indices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalMatrix {
    pub rows: usize,
    pub col_indices: Vec<usize>,
}

impl LogicalMatrix {
    pub fn new(rows: usize, col_indices: Vec<usize>) -> Result<Self, MatError> {
        if let Some(&bad) = col_indices.iter().find(|&&i| i < 1 || i > rows) {
            return Err(MatError::IndexOutOfRange(format!(
                "logical matrix column index {} not in 1..={}",
                bad, rows
            )));
        }
        Ok(LogicalMatrix { rows, col_indices })
    }

    pub fn cols(&self) -> usize {
        self.col_indices.len()
    }

    pub fn to_matrix(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows, self.cols());
        for (c, &i) in self.col_indices.iter().enumerate() {
            m[(i - 1, c)] = Rat::one();
        }
        m
    }
}

/// Swap matrix W_{[m,n]}: columns δ_{mn}[1, m+1, ..., (n-1)m+1; 2, m+2, ...; m, 2m, ..., nm].
pub fn swap_matrix(m: usize, n: usize) -> LogicalMatrix {
    assert!(m >= 1 && n >= 1);
    let mut idx = Vec::with_capacity(m * n);
    for i in 1..=m {
        for j in 0..n {
            idx.push(j * m + i);
        }
    }
    LogicalMatrix::new(m * n, idx).expect("indices in range by construction")
}

/// Column-stochastic rational matrix: entries ≥ 0, every column sums to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticMatrix(RatMatrix);

impl StochasticMatrix {
    pub fn new(m: RatMatrix) -> Result<Self, MatError> {
        for c in 0..m.cols() {
            let mut sum = Rat::zero();
            for r in 0..m.rows() {
                let e = &m[(r, c)];
                if e < &Rat::zero() {
                    return Err(MatError::BadRational(format!(
                        "negative entry at ({}, {})",
                        r, c
                    )));
                }
                sum += e;
            }
            if !sum.is_one() {
                return Err(MatError::BadRational(format!(
                    "column {} sums to {}, not 1",
                    c, sum
                )));
            }
        }
        Ok(StochasticMatrix(m))
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RatMatrix {
        self.0
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        self.0.col(c)
    }
}

/// Product of a prefix/suffix slice of cardinalities (the k^{[p,q]} shorthand,
/// empty product = 1).
pub fn card_product(k: &[usize]) -> usize {
    k.iter().product()
}

/// E_i = I_{k_1..k_{i-1}} ⊗ 1_{k_i} ⊗ I_{k_{i+1}..k_n}, of shape k x (k/k_i).
/// Its transpose lifts a function of a_{-i} to the full profile.
pub fn e_matrix(i: usize, k: &[usize]) -> Result<RatMatrix, MatError> {
    let n = k.len();
    if i < 1 || i > n {
        return Err(MatError::IndexOutOfRange(format!(
            "player {} of {}",
            i, n
        )));
    }
    let before = card_product(&k[..i - 1]);
    let after = card_product(&k[i..]);
    let m = RatMatrix::identity(before)
        .kron(&RatMatrix::ones(k[i - 1], 1))
        .kron(&RatMatrix::identity(after));
    Ok(m)
}

/// Γ_U = ⊗_i γ_i with γ_i = I_{k_i} for i ∈ U and 1_{k_i}^T otherwise.
/// Projects a full profile onto the sub-profile of players in U.
pub fn drawing_matrix(u: &[usize], k: &[usize]) -> Result<RatMatrix, MatError> {
    let n = k.len();
    if let Some(&bad) = u.iter().find(|&&i| i < 1 || i > n) {
        return Err(MatError::IndexOutOfRange(format!(
            "player {} of {}",
            bad, n
        )));
    }
    let mut m = RatMatrix::identity(1);
    for (idx, &ki) in k.iter().enumerate() {
        let factor = if u.contains(&(idx + 1)) {
            RatMatrix::identity(ki)
        } else {
            RatMatrix::ones(ki, 1).transpose()
        };
        m = m.kron(&factor);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::rat;

    #[test]
    fn kron_identity() {
        let i2 = RatMatrix::identity(2);
        assert_eq!(i2.kron(&i2), RatMatrix::identity(4));
    }

    #[test]
    fn kron_mixed_product() {
        let a = RatMatrix::from_int_rows(&[&[1, 2], &[3, 4]]);
        let b = RatMatrix::from_int_rows(&[&[0, 1], &[1, 1]]);
        let c = RatMatrix::from_int_rows(&[&[2, 0], &[1, 1]]);
        let d = RatMatrix::from_int_rows(&[&[1, 1], &[0, 2]]);
        let lhs = a.kron(&b).mul(&c.kron(&d)).unwrap();
        let rhs = a.mul(&c).unwrap().kron(&b.mul(&d).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn stp_degenerates_to_product() {
        let a = RatMatrix::from_int_rows(&[&[1, 2], &[3, 4]]);
        let b = RatMatrix::from_int_rows(&[&[5, 6], &[7, 8]]);
        assert_eq!(stp(&a, &b), a.mul(&b).unwrap());
    }

    #[test]
    fn stp_row_times_tall_vector() {
        // [1 2] ⋉ (1,2,3,4)^T = (A ⊗ I_2)x = (7, 10)^T
        let a = RatMatrix::from_int_rows(&[&[1, 2]]);
        let x = RatMatrix::col_from_vec(vec![rat(1), rat(2), rat(3), rat(4)]);
        let r = stp(&a, &x);
        assert_eq!(r, RatMatrix::col_from_vec(vec![rat(7), rat(10)]));
    }

    #[test]
    fn swap_2_2() {
        assert_eq!(swap_matrix(2, 2).col_indices, vec![1, 3, 2, 4]);
    }

    #[test]
    fn swap_1_n_is_identity() {
        let w = swap_matrix(1, 5);
        assert_eq!(w.to_matrix(), RatMatrix::identity(5));
    }

    #[test]
    fn swap_swaps_factors() {
        for m in 1..=4 {
            for n in 1..=4 {
                let w = swap_matrix(m, n).to_matrix();
                for i in 1..=m {
                    for j in 1..=n {
                        let x = DeltaVector::new(m, i).unwrap().to_column();
                        let y = DeltaVector::new(n, j).unwrap().to_column();
                        let xy = stp(&x, &y);
                        let yx = stp(&y, &x);
                        assert_eq!(w.mul(&xy).unwrap(), yx);
                    }
                }
            }
        }
    }

    #[test]
    fn delta_product_examples() {
        let d = |dim, idx| DeltaVector::new(dim, idx).unwrap();
        assert_eq!(delta_product(&[d(2, 1), d(2, 2)]).unwrap(), d(4, 2));
        assert_eq!(delta_product(&[d(2, 2), d(2, 2)]).unwrap(), d(4, 4));
        assert!(delta_product(&[]).is_err());
    }

    #[test]
    fn delta_product_matches_expanded_stp() {
        for &k in &[[2usize, 2, 2], [2, 3, 2]] {
            for a1 in 1..=k[0] {
                for a2 in 1..=k[1] {
                    for a3 in 1..=k[2] {
                        let ds = [
                            DeltaVector::new(k[0], a1).unwrap(),
                            DeltaVector::new(k[1], a2).unwrap(),
                            DeltaVector::new(k[2], a3).unwrap(),
                        ];
                        let folded = delta_product(&ds).unwrap();
                        let expanded = stp(
                            &stp(&ds[0].to_column(), &ds[1].to_column()),
                            &ds[2].to_column(),
                        );
                        assert_eq!(folded.to_column(), expanded);
                    }
                }
            }
        }
    }

    #[test]
    fn e_matrix_reference_shapes() {
        let k = [2, 2, 2];
        let e2 = e_matrix(2, &k).unwrap();
        let expected = RatMatrix::identity(2)
            .kron(&RatMatrix::ones(2, 1))
            .kron(&RatMatrix::identity(2));
        assert_eq!(e2, expected);
        let e3 = e_matrix(3, &k).unwrap();
        assert_eq!(e3, RatMatrix::identity(4).kron(&RatMatrix::ones(2, 1)));
        let e1_single = e_matrix(1, &[3]).unwrap();
        assert_eq!(e1_single, RatMatrix::ones(3, 1));
        assert!(e_matrix(4, &k).is_err());
    }

    #[test]
    fn drawing_matrix_examples() {
        let k = [2, 2, 2, 2];
        let g = drawing_matrix(&[1, 2, 3], &k).unwrap();
        let expected = RatMatrix::identity(8).kron(&RatMatrix::ones(2, 1).transpose());
        assert_eq!(g, expected);
        let all = drawing_matrix(&[1, 2, 3, 4], &k).unwrap();
        assert_eq!(all, RatMatrix::identity(16));
        let g2 = drawing_matrix(&[2], &[2, 2]).unwrap();
        let expected2 = RatMatrix::ones(2, 1).transpose().kron(&RatMatrix::identity(2));
        assert_eq!(g2, expected2);
        assert!(drawing_matrix(&[5], &k).is_err());
    }

    #[test]
    fn stochastic_validation() {
        let ok = RatMatrix::from_rows(vec![
            vec![crate::ratmat::ratq(1, 2), rat(1)],
            vec![crate::ratmat::ratq(1, 2), rat(0)],
        ]);
        assert!(StochasticMatrix::new(ok).is_ok());
        let bad = RatMatrix::from_int_rows(&[&[1, 1], &[1, 0]]);
        assert!(StochasticMatrix::new(bad).is_err());
    }
}
