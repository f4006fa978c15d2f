//! Dense matrices over an exact base ring with division-free determinant and
//! characteristic-polynomial routines, usable over the integers and over
//! polynomial rings where no division is available.

use crate::error::{Error, Result};
use crate::ring::{BaseRing, Scalar};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    ring: BaseRing,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} over {}", self.rows, self.cols, self.ring)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(ring: &BaseRing, rows: usize, cols: usize) -> Mat {
        Mat { ring: ring.clone(), rows, cols, data: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: &BaseRing, n: usize) -> Mat {
        let mut m = Mat::zeros(ring, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ring.one();
        }
        m
    }

    pub fn from_rows(ring: &BaseRing, rows: Vec<Vec<Scalar>>) -> Result<Mat> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch("ragged rows".into()));
            }
            for x in row {
                if x.ring() != ring {
                    return Err(Error::RingMismatch {
                        expected: ring.to_string(),
                        got: x.ring().to_string(),
                    });
                }
                data.push(x);
            }
        }
        Ok(Mat { ring: ring.clone(), rows: r, cols: c, data })
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix addition".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        Mat {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch("matrix product".into()));
        }
        let mut out = Mat::zeros(&self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b);
                    let cur = out.at(i, j).add(&prod);
                    *out.at_mut(i, j) = cur;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch("matrix-vector product".into()));
        }
        let mut out = vec![self.ring.zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i] = out[i].add(&self.at(i, j).mul(&v[j]));
            }
        }
        Ok(out)
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn from_columns(ring: &BaseRing, cols: Vec<Vec<Scalar>>) -> Result<Mat> {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        let mut m = Mat::zeros(ring, r, c);
        for (j, col) in cols.into_iter().enumerate() {
            if col.len() != r {
                return Err(Error::ShapeMismatch("ragged columns".into()));
            }
            for (i, x) in col.into_iter().enumerate() {
                *m.at_mut(i, j) = x;
            }
        }
        Ok(m)
    }

    /// Entry-wise image under a ring homomorphism.
    pub fn map(&self, f: impl Fn(&Scalar) -> Result<Scalar>) -> Result<Mat> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        let ring = data
            .first()
            .map(|s| s.ring().clone())
            .unwrap_or_else(|| self.ring.clone());
        Ok(Mat { ring, rows: self.rows, cols: self.cols, data })
    }

    /// Kronecker product with left-factor index varying fastest, matching the
    /// grid identification (x, y) -> x + m(y - 1).
    pub fn kronecker(&self, other: &Mat) -> Mat {
        let m = self.rows;
        let p = other.rows;
        let mut out = Mat::zeros(&self.ring, m * p, self.cols * other.cols);
        for i in 0..m {
            for j in 0..self.cols {
                for k in 0..p {
                    for l in 0..other.cols {
                        *out.at_mut(i + m * k, j + self.cols * l) =
                            self.at(i, j).mul(other.at(k, l));
                    }
                }
            }
        }
        out
    }

    /// Division-free determinant via the characteristic polynomial.
    pub fn det(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("determinant of non-square matrix".into()));
        }
        match self.rows {
            0 => Ok(self.ring.one()),
            1 => Ok(self.at(0, 0).clone()),
            2 => Ok(self
                .at(0, 0)
                .mul(self.at(1, 1))
                .sub(&self.at(0, 1).mul(self.at(1, 0)))),
            3 => {
                let m = |i: usize, j: usize| self.at(i, j);
                let mut acc = m(0, 0).mul(&m(1, 1).mul(m(2, 2)).sub(&m(1, 2).mul(m(2, 1))));
                acc = acc.sub(&m(0, 1).mul(&m(1, 0).mul(m(2, 2)).sub(&m(1, 2).mul(m(2, 0)))));
                acc = acc.add(&m(0, 2).mul(&m(1, 0).mul(m(2, 1)).sub(&m(1, 1).mul(m(2, 0)))));
                Ok(acc)
            }
            _ => {
                // det(M) = (-1)^n * c_0 where char_poly(M) = sum c_k x^k
                let chi = self.charpoly_monic()?;
                let c0 = chi[0].clone();
                Ok(if self.rows % 2 == 0 { c0 } else { c0.neg() })
            }
        }
    }

    /// Berkowitz' division-free characteristic polynomial of a square matrix.
    /// Returns the coefficients `c_0, ..., c_n` of `det(xI - M) = sum c_k x^k`
    /// with `c_n = 1`.
    pub fn charpoly_monic(&self) -> Result<Vec<Scalar>> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("characteristic polynomial".into()));
        }
        let n = self.rows;
        let ring = &self.ring;
        if n == 0 {
            return Ok(vec![ring.one()]);
        }
        // Berkowitz iteration: the vector of coefficients, highest first.
        let mut coeffs = vec![ring.one(), self.at(0, 0).neg()];
        for k in 1..n {
            // principal k+1 x k+1 leading submatrix split as
            //   [ A  c ]
            //   [ r  d ]  with A = k x k, column c, row r, scalar d = M[k][k]
            let d = self.at(k, k).clone();
            // powers: r * A^i * c for i = 0..k-1
            let mut col: Vec<Scalar> = (0..k).map(|i| self.at(i, k).clone()).collect();
            let mut prods = Vec::with_capacity(k + 1);
            prods.push(d.neg());
            for _ in 0..k {
                let mut dot = ring.zero();
                for j in 0..k {
                    dot = dot.add(&self.at(k, j).mul(&col[j]));
                }
                prods.push(dot.neg());
                // col <- A * col
                let mut next = vec![ring.zero(); k];
                for i in 0..k {
                    for j in 0..k {
                        next[i] = next[i].add(&self.at(i, j).mul(&col[j]));
                    }
                }
                col = next;
            }
            // Toeplitz multiply: new[i] = coeffs[i] + sum_{j>=1} prods[j-1]*coeffs[i-j]
            let mut next = vec![ring.zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] = next[i].add(c);
            }
            for (j, p) in prods.iter().enumerate() {
                for (i, c) in coeffs.iter().enumerate() {
                    let idx = i + j + 1;
                    if idx < next.len() {
                        next[idx] = next[idx].add(&p.mul(c));
                    }
                }
            }
            coeffs = next;
        }
        coeffs.reverse(); // now c_0 .. c_n
        Ok(coeffs)
    }

    /// Coefficients `chi_0 = 1, chi_1, ..., chi_n` of the alternating
    /// characteristic polynomial `det(xI + M) = sum chi_k x^{n-k}`.
    pub fn alternating_charpoly(&self) -> Result<Vec<Scalar>> {
        let neg = self.scale(&self.ring.from_i64(-1));
        let mut c = neg.charpoly_monic()?; // det(xI + M), coefficients of x^k, k = 0..n
        c.reverse(); // chi_k = coefficient of x^{n-k}
        Ok(c)
    }

    /// Adjugate-based inverse; defined exactly when the determinant is a unit.
    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let det = self.det()?;
        let det_inv = det
            .inverse()
            .ok_or_else(|| Error::NotInvertible(format!("matrix with det {det}")))?;
        let n = self.rows;
        let mut adj = Mat::zeros(&self.ring, n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.delete_row_col(i, j);
                let c = minor.det()?;
                let sign = if (i + j) % 2 == 0 { c } else { c.neg() };
                *adj.at_mut(j, i) = sign;
            }
        }
        Ok(adj.scale(&det_inv))
    }

    fn delete_row_col(&self, row: usize, col: usize) -> Mat {
        let mut rows = Vec::with_capacity(self.rows - 1);
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let mut r = Vec::with_capacity(self.cols - 1);
            for j in 0..self.cols {
                if j == col {
                    continue;
                }
                r.push(self.at(i, j).clone());
            }
            rows.push(r);
        }
        Mat::from_rows(&self.ring, rows).expect("minor shape")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::BaseRing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn imat(rows: Vec<Vec<i64>>) -> Mat {
        let ring = BaseRing::Int;
        Mat::from_rows(
            &ring,
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| ring.from_i64(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Leibniz-formula determinant, used as the independent oracle.
    fn det_leibniz(m: &Mat) -> Scalar {
        let n = m.nrows();
        let ring = m.ring().clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut acc = ring.zero();
        permute(&mut perm, 0, &mut |p, sign| {
            let mut prod = ring.one();
            for (i, &j) in p.iter().enumerate() {
                prod = prod.mul(m.at(i, j));
            }
            if sign {
                prod = prod.neg();
            }
            acc = acc.add(&prod);
        });
        acc
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], bool)) {
        let n = p.len();
        if k == n {
            let mut sign = false;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        sign = !sign;
                    }
                }
            }
            f(p, sign);
            return;
        }
        for i in k..n {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn determinant_matches_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5usize {
            for _ in 0..10 {
                let ring = BaseRing::Int;
                let rows: Vec<Vec<Scalar>> = (0..n)
                    .map(|_| (0..n).map(|_| ring.sample(&mut rng)).collect())
                    .collect();
                let m = Mat::from_rows(&ring, rows).unwrap();
                assert_eq!(m.det().unwrap(), det_leibniz(&m));
            }
        }
    }

    #[test]
    fn charpoly_of_companion() {
        // companion matrix of x^3 - 2x - 5
        let m = imat(vec![vec![0, 0, 5], vec![1, 0, 2], vec![0, 1, 0]]);
        let chi = m.charpoly_monic().unwrap();
        let z = BaseRing::Int;
        assert_eq!(chi, vec![z.from_i64(-5), z.from_i64(-2), z.from_i64(0), z.from_i64(1)]);
    }

    #[test]
    fn alternating_charpoly_of_rotation() {
        // multiplication by i on Z[i]: det(x + M) = x^2 + 1
        let m = imat(vec![vec![0, -1], vec![1, 0]]);
        let chi = m.alternating_charpoly().unwrap();
        let z = BaseRing::Int;
        assert_eq!(chi, vec![z.from_i64(1), z.from_i64(0), z.from_i64(1)]);
    }

    #[test]
    fn charpoly_over_polynomial_ring() {
        let ring = BaseRing::poly(BaseRing::Int, vec!["t".into()]).unwrap();
        let t = ring.var("t").unwrap();
        let rows = vec![
            vec![t.clone(), ring.one()],
            vec![ring.zero(), t.clone()],
        ];
        let m = Mat::from_rows(&ring, rows).unwrap();
        // det(xI - M) = (x - t)^2 = x^2 - 2t x + t^2
        let chi = m.charpoly_monic().unwrap();
        assert_eq!(chi[2], ring.one());
        assert_eq!(chi[1], t.scale_int(&(-2).into()));
        assert_eq!(chi[0], t.pow(2));
    }

    #[test]
    fn inverse_of_unimodular() {
        let m = imat(vec![vec![1, 2], vec![0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), Mat::identity(&BaseRing::Int, 2));
        let singular = imat(vec![vec![2, 0], vec![0, 1]]);
        assert!(singular.inverse().is_err()); // det 2 is not a unit of Z
    }

    #[test]
    fn kronecker_grid_convention() {
        let a = imat(vec![vec![1, 2], vec![3, 4]]);
        let b = imat(vec![vec![0, 1], vec![1, 0]]);
        let k = a.kronecker(&b);
        // entry ((x,y),(x',y')) = a[x][x'] * b[y][y'] with flat index x + 2y
        assert_eq!(k.at(0 + 2 * 1, 1 + 2 * 0), &BaseRing::Int.from_i64(2));
        assert_eq!(k.nrows(), 4);
    }
}
