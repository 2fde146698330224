use rand::RngCore;

use super::{FieldElement, FieldError, Modulus, MulCounter};

/// Dense row-major matrix over `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
    modulus: Modulus,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, modulus: Modulus) -> Self {
        Self { rows, cols, entries: vec![FieldElement::default(); rows * cols], modulus }
    }

    pub fn identity(order: usize, modulus: Modulus) -> Self {
        let mut m = Self::zeros(order, order, modulus);
        for i in 0..order {
            m.set(i, i, modulus.one());
        }
        m
    }

    /// Builds a matrix from row-major entries, which must already be reduced.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<FieldElement>,
        modulus: Modulus,
    ) -> Result<Self, FieldError> {
        if entries.len() != rows * cols {
            return Err(FieldError::DimensionMismatch {
                expected: (rows, cols),
                found: (entries.len(), 1),
            });
        }
        if let Some(bad) = entries.iter().find(|e| e.value() >= modulus.value()) {
            return Err(FieldError::OutOfRange { value: bad.value(), q: modulus.value() });
        }
        Ok(Self { rows, cols, entries, modulus })
    }

    /// Convenience constructor from integer rows; values are reduced mod q.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R], modulus: Modulus) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            entries.extend(r.iter().map(|&v| modulus.elem(v)));
        }
        Self { rows: rows.len(), cols, entries, modulus }
    }

    /// A column vector.
    pub fn column(values: &[FieldElement], modulus: Modulus) -> Self {
        Self { rows: values.len(), cols: 1, entries: values.to_vec(), modulus }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        debug_assert!(v.value() < self.modulus.value());
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.modulus);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Product `self · rhs`; charges `rows · inner · cols` multiplications.
    pub fn mul(&self, rhs: &Matrix, counter: &mut MulCounter) -> Result<Matrix, FieldError> {
        if self.modulus != rhs.modulus {
            return Err(FieldError::ModulusMismatch(self.modulus.value(), rhs.modulus.value()));
        }
        if self.cols != rhs.rows {
            return Err(FieldError::DimensionMismatch {
                expected: (self.cols, rhs.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        let f = self.modulus;
        let mut out = Matrix::zeros(self.rows, rhs.cols, f);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    acc = f.add(acc, f.mul_counted(self.get(i, k), rhs.get(k, j), counter));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Product without metering, for oracles and authority-side work.
    pub fn mul_uncounted(&self, rhs: &Matrix) -> Result<Matrix, FieldError> {
        self.mul(rhs, &mut MulCounter::new())
    }

    /// Symmetric matrix whose upper triangle (diagonal included) is sampled
    /// row by row and mirrored below the diagonal.
    pub fn random_symmetric<R: RngCore + ?Sized>(order: usize, rng: &mut R, modulus: Modulus) -> Self {
        let mut m = Self::zeros(order, order, modulus);
        for i in 0..order {
            for j in i..order {
                let v = modulus.sample(rng, false);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R, modulus: Modulus) -> Self {
        let entries = (0..rows * cols).map(|_| modulus.sample(rng, false)).collect();
        Self { rows, cols, entries, modulus }
    }

    /// Row vector times matrix: `v · self`, uncounted.
    pub fn left_mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.rows);
        let f = self.modulus;
        (0..self.cols)
            .map(|c| (0..self.rows).fold(f.zero(), |acc, r| f.add(acc, f.mul(v[r], self.get(r, c)))))
            .collect()
    }

    /// Matrix times column vector: `self · v`, uncounted.
    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        let f = self.modulus;
        (0..self.rows)
            .map(|r| dot(f, self.row(r), v))
            .collect()
    }
}

/// Uncounted inner product.
pub fn dot(f: Modulus, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(f.zero(), |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn f13() -> Modulus {
        Modulus::new(13).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let f = f13();
        let mut rng = seeded_rng(1);
        let m = Matrix::random(3, 3, &mut rng, f);
        assert_eq!(Matrix::identity(3, f).mul_uncounted(&m).unwrap(), m);
        assert_eq!(m.mul_uncounted(&Matrix::zeros(3, 2, f)).unwrap(), Matrix::zeros(3, 2, f));
    }

    #[test]
    fn small_product_mod_13() {
        let f = f13();
        let a = Matrix::from_rows(&[[1, 2], [2, 3]], f);
        let b = Matrix::from_rows(&[[6], [4]], f);
        let mut c = MulCounter::new();
        let p = a.mul(&b, &mut c).unwrap();
        assert_eq!(p, Matrix::from_rows(&[[1], [11]], f));
        assert_eq!(c.count(), 4);
    }

    #[test]
    fn counter_charges_r_k_c() {
        let f = f13();
        let mut rng = seeded_rng(3);
        let a = Matrix::random(3, 4, &mut rng, f);
        let b = Matrix::random(4, 5, &mut rng, f);
        let mut c = MulCounter::new();
        a.mul(&b, &mut c).unwrap();
        assert_eq!(c.count(), 3 * 4 * 5);
    }

    #[test]
    fn dimension_and_modulus_mismatch() {
        let f = f13();
        let a = Matrix::zeros(2, 3, f);
        assert!(matches!(a.mul_uncounted(&Matrix::zeros(2, 3, f)), Err(FieldError::DimensionMismatch { .. })));
        let g = Modulus::new(7).unwrap();
        assert_eq!(a.mul_uncounted(&Matrix::zeros(3, 1, g)), Err(FieldError::ModulusMismatch(13, 7)));
        assert!(Matrix::from_entries(2, 2, vec![FieldElement::default(); 3], f).is_err());
        assert!(Matrix::from_entries(1, 1, vec![f.elem(12)], f).is_ok());
    }

    #[test]
    fn transpose_shape_and_involution() {
        let f = f13();
        let mut rng = seeded_rng(5);
        let m = Matrix::random(2, 3, &mut rng, f);
        let t = m.transpose();
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.transpose(), m);
        assert_eq!(Matrix::identity(4, f).transpose(), Matrix::identity(4, f));
    }

    #[test]
    fn associativity_on_random_triples() {
        let f = f13();
        for seed in 0..100 {
            let mut rng = seeded_rng(seed);
            let dims: Vec<usize> = (0..4).map(|_| 1 + (rng.next_u64() % 5) as usize).collect();
            let a = Matrix::random(dims[0], dims[1], &mut rng, f);
            let b = Matrix::random(dims[1], dims[2], &mut rng, f);
            let c = Matrix::random(dims[2], dims[3], &mut rng, f);
            let left = a.mul_uncounted(&b).unwrap().mul_uncounted(&c).unwrap();
            let right = a.mul_uncounted(&b.mul_uncounted(&c).unwrap()).unwrap();
            assert_eq!(left, right, "seed {seed}");
        }
    }

    #[test]
    fn random_symmetric_is_symmetric_and_reproducible() {
        let f = Modulus::new(65537).unwrap();
        for order in 1..8 {
            let m = Matrix::random_symmetric(order, &mut seeded_rng(11), f);
            assert!(m.is_symmetric());
            assert_eq!(m, Matrix::random_symmetric(order, &mut seeded_rng(11), f));
        }
    }

    #[test]
    fn vector_products_agree_with_matrix_products() {
        let f = f13();
        let mut rng = seeded_rng(8);
        let m = Matrix::random(3, 4, &mut rng, f);
        let v: Vec<_> = (0..3).map(|_| f.sample(&mut rng, false)).collect();
        let w: Vec<_> = (0..4).map(|_| f.sample(&mut rng, false)).collect();
        let row = Matrix::column(&v, f).transpose();
        assert_eq!(m.left_mul_vec(&v), row.mul_uncounted(&m).unwrap().entries().to_vec());
        assert_eq!(m.mul_vec(&w), m.mul_uncounted(&Matrix::column(&w, f)).unwrap().entries().to_vec());
    }
}
