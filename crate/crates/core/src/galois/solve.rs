use super::{FieldElement, FieldError, Matrix};

/// Outcome of row-reducing `A x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Rank of `A`.
    pub rank: usize,
    /// One solution with every free variable set to zero; `None` when the
    /// system is inconsistent.
    pub particular: Option<Vec<FieldElement>>,
    /// Basis of `{x : A x = 0}`, one vector per free column.
    pub nullspace: Vec<Vec<FieldElement>>,
    /// Column index of each pivot, in row order.
    pub pivots: Vec<usize>,
}

impl Solution {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }

    pub fn nullspace_dim(&self) -> usize {
        self.nullspace.len()
    }
}

/// Gauss-Jordan elimination of `[A | b]` over `Z_q`.
///
/// Pivots are the first nonzero entry found scanning down from the current
/// row, so the result is a pure function of the input.
pub fn gauss_solve(a: &Matrix, b: &[FieldElement]) -> Result<Solution, FieldError> {
    if a.rows() != b.len() {
        return Err(FieldError::DimensionMismatch { expected: (a.rows(), 1), found: (b.len(), 1) });
    }
    let f = a.modulus();
    let q = f.value();
    let (rows, cols) = (a.rows(), a.cols());
    let width = cols + 1;

    let mut aug: Vec<Vec<u64>> = (0..rows)
        .map(|r| {
            let mut row: Vec<u64> = a.row(r).iter().map(|e| e.value()).collect();
            row.push(b[r].value());
            row
        })
        .collect();

    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows {
            break;
        }
        let Some(p) = (next..rows).find(|&r| aug[r][col] != 0) else {
            continue;
        };
        aug.swap(next, p);
        let inv = f.inv(FieldElement(aug[next][col]))?.value();
        for v in &mut aug[next][col..width] {
            *v = *v * inv % q;
        }
        let pivot_row = aug[next].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == next || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for c in col..width {
                if pivot_row[c] != 0 {
                    row[c] = (row[c] + (q - factor) * pivot_row[c]) % q;
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    let rank = pivots.len();

    let consistent = aug[rank..].iter().all(|row| row[cols] == 0);
    let particular = consistent.then(|| {
        let mut x = vec![FieldElement::default(); cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = FieldElement(aug[r][cols]);
        }
        x
    });

    let mut is_pivot = vec![false; cols];
    for &pc in &pivots {
        is_pivot[pc] = true;
    }
    let nullspace = (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![FieldElement::default(); cols];
            v[free] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(FieldElement(aug[r][free]));
            }
            v
        })
        .collect();

    Ok(Solution { rank, particular, nullspace, pivots })
}

/// Rank of `a` by elimination.
pub fn rank(a: &Matrix) -> usize {
    let zeros = vec![FieldElement::default(); a.rows()];
    gauss_solve(a, &zeros).map(|s| s.rank).expect("rhs length matches by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::Modulus;
    use crate::rng::seeded_rng;

    fn check_solution(a: &Matrix, b: &[FieldElement], s: &Solution) {
        let zero = vec![FieldElement::default(); a.rows()];
        if let Some(x) = &s.particular {
            assert_eq!(a.mul_vec(x), b);
        }
        for v in &s.nullspace {
            assert_eq!(a.mul_vec(v), zero);
        }
        assert_eq!(s.rank + s.nullspace_dim(), a.cols());
    }

    #[test]
    fn identity_system() {
        let f = Modulus::new(13).unwrap();
        let b: Vec<_> = [4, 0, 12].iter().map(|&v| f.elem(v)).collect();
        let s = gauss_solve(&Matrix::identity(3, f), &b).unwrap();
        assert_eq!(s.rank, 3);
        assert_eq!(s.particular.as_deref(), Some(&b[..]));
        assert!(s.nullspace.is_empty());
    }

    #[test]
    fn dependent_rows_mod_5() {
        let f = Modulus::new(5).unwrap();
        let a = Matrix::from_rows(&[[1, 2], [2, 4]], f);
        let b = [f.elem(1), f.elem(2)];
        let s = gauss_solve(&a, &b).unwrap();
        assert_eq!(s.rank, 1);
        assert_eq!(s.nullspace_dim(), 1);
        check_solution(&a, &b, &s);
    }

    #[test]
    fn inconsistent_system_has_no_particular() {
        let f = Modulus::new(5).unwrap();
        let a = Matrix::from_rows(&[[1, 2], [2, 4]], f);
        let s = gauss_solve(&a, &[f.elem(1), f.elem(3)]).unwrap();
        assert_eq!(s.rank, 1);
        assert!(!s.is_consistent());
    }

    #[test]
    fn rhs_length_mismatch() {
        let f = Modulus::new(5).unwrap();
        let a = Matrix::identity(2, f);
        assert!(matches!(gauss_solve(&a, &[f.one()]), Err(FieldError::DimensionMismatch { .. })));
    }

    #[test]
    fn random_systems_satisfy_postconditions() {
        let f = Modulus::new(13).unwrap();
        for seed in 0..200u64 {
            let mut rng = seeded_rng(seed);
            let rows = 1 + (seed % 6) as usize;
            let cols = 1 + (seed / 6 % 6) as usize;
            let mut a = Matrix::random(rows, cols, &mut rng, f);
            if seed % 3 == 0 && rows > 1 {
                // force a dependency
                for c in 0..cols {
                    let v = f.mul(a.get(0, c), f.elem(3));
                    a.set(rows - 1, c, v);
                }
            }
            let x: Vec<_> = (0..cols).map(|_| f.sample(&mut rng, false)).collect();
            let b = a.mul_vec(&x);
            let s = gauss_solve(&a, &b).unwrap();
            assert!(s.is_consistent());
            check_solution(&a, &b, &s);
        }
    }

    #[test]
    fn zero_matrix_has_full_nullspace() {
        let f = Modulus::new(7).unwrap();
        let a = Matrix::zeros(3, 4, f);
        let s = gauss_solve(&a, &[f.zero(); 3]).unwrap();
        assert_eq!(s.rank, 0);
        assert_eq!(s.nullspace_dim(), 4);
        assert_eq!(rank(&a), 0);
    }
}
