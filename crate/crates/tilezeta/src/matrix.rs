//! Small dense matrices over the scalar domains the zeta machinery needs:
//! nonnegative integer counts, exact rationals, complex doubles, and
//! integer polynomials. Dimensions are alphabet-sized, so cubic algorithms
//! and even cofactor expansion for polynomial determinants are fine.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::IntPoly;

/// Occurrence-count matrix M[a][b] = number of edges a -> b in the child
/// graph (= occurrences of b in sigma(a)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix(pub Vec<Vec<u64>>);

impl CountMatrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn identity(n: usize) -> Self {
        CountMatrix((0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect())
    }

    pub fn mul(&self, o: &CountMatrix) -> CountMatrix {
        let n = self.dim();
        let mut out = vec![vec![0u64; n]; n];
        for (out_row, row) in out.iter_mut().zip(&self.0) {
            for (k, &a) in row.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (cell, &b) in out_row.iter_mut().zip(&o.0[k]) {
                    *cell = cell
                        .checked_add(a.checked_mul(b).expect("count overflow"))
                        .expect("count overflow");
                }
            }
        }
        CountMatrix(out)
    }

    pub fn pow(&self, e: u32) -> CountMatrix {
        let mut acc = CountMatrix::identity(self.dim());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn trace(&self) -> u64 {
        (0..self.dim()).map(|i| self.0[i][i]).sum()
    }

    /// Entrywise positive?
    pub fn positive(&self) -> bool {
        self.0.iter().all(|row| row.iter().all(|&e| e > 0))
    }

    /// Characteristic polynomial det(xI - M) by the Faddeev-LeVerrier
    /// recurrence; all coefficients are integers for an integer matrix and
    /// that is asserted on the way out.
    pub fn charpoly(&self) -> IntPoly {
        let n = self.dim();
        let to_rat = |m: &CountMatrix| -> Vec<Vec<BigRational>> {
            m.0.iter()
                .map(|r| r.iter().map(|&e| BigRational::from_integer(BigInt::from(e))).collect())
                .collect()
        };
        let a = to_rat(self);
        let mut m = vec![vec![BigRational::zero(); n]; n]; // M_0 = 0
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        let mut c = BigRational::one();
        for k in 1..=n {
            // M_k = A (M_{k-1} + c_{k-1} I)
            let mut t = m.clone();
            for (i, row) in t.iter_mut().enumerate() {
                row[i] += &c;
            }
            let mut mk = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for l in 0..n {
                    if a[i][l].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        let prod = &a[i][l] * &t[l][j];
                        mk[i][j] += prod;
                    }
                }
            }
            let tr: BigRational = (0..n).map(|i| mk[i][i].clone()).fold(BigRational::zero(), |s, v| s + v);
            c = -tr / BigRational::from_integer(BigInt::from(k as i64));
            coeffs[n - k] = c.clone();
            m = mk;
        }
        let ints: Vec<BigInt> = coeffs
            .into_iter()
            .map(|r| {
                assert!(r.denom().is_one(), "characteristic polynomial must be integral");
                r.numer().clone()
            })
            .collect();
        IntPoly::new(ints)
    }
}

/// Exact rational matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix(pub Vec<Vec<BigRational>>);

impl RatMatrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn identity(n: usize) -> Self {
        RatMatrix(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &RatMatrix) -> RatMatrix {
        let n = self.dim();
        let mut out = vec![vec![BigRational::zero(); n]; n];
        for (out_row, row) in out.iter_mut().zip(&self.0) {
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (cell, b) in out_row.iter_mut().zip(&o.0[k]) {
                    let p = a * b;
                    *cell += p;
                }
            }
        }
        RatMatrix(out)
    }

    pub fn trace(&self) -> BigRational {
        (0..self.dim()).map(|i| self.0[i][i].clone()).fold(BigRational::zero(), |s, v| s + v)
    }

    /// Determinant by fraction Gaussian elimination with exact pivots.
    pub fn det(&self) -> BigRational {
        let n = self.dim();
        let mut m = self.0.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return BigRational::zero();
            };
            if p != col {
                m.swap(p, col);
                det = -det;
            }
            det *= &m[col][col];
            let inv = m[col][col].recip();
            let (pivot_rows, rest) = m.split_at_mut(col + 1);
            let pivot = &pivot_rows[col][col..];
            for row in rest {
                if row[col].is_zero() {
                    continue;
                }
                let f = &row[col] * &inv;
                for (cell, p) in row[col..].iter_mut().zip(pivot) {
                    let t = p * &f;
                    *cell -= t;
                }
            }
        }
        det
    }
}

/// Complex double matrix, used for zeta evaluation at complex exponents.
#[derive(Clone, Debug)]
pub struct CMatrix(pub Vec<Vec<Complex64>>);

impl CMatrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn zero(n: usize) -> Self {
        CMatrix(vec![vec![Complex64::new(0.0, 0.0); n]; n])
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.0[i][k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.0[i][j] += a * o.0[k][j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.0[i][i]).sum()
    }

    /// det(I - self) via LU with partial pivoting.
    pub fn det_one_minus(&self) -> Complex64 {
        let n = self.dim();
        let mut m: Vec<Vec<Complex64>> = self
            .0
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| Complex64::new(f64::from(i == j), 0.0) - v)
                    .collect()
            })
            .collect();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let p = (col..n)
                .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap())
                .unwrap();
            if m[p][col].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if p != col {
                m.swap(p, col);
                det = -det;
            }
            det *= m[col][col];
            let inv = m[col][col].inv();
            let (pivot_rows, rest) = m.split_at_mut(col + 1);
            let pivot = &pivot_rows[col][col..];
            for row in rest {
                let f = row[col] * inv;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for (cell, &p) in row[col..].iter_mut().zip(pivot) {
                    *cell -= p * f;
                }
            }
        }
        det
    }
}

/// Matrix with integer-polynomial entries; only the determinant is needed.
pub struct PolyMatrix(pub Vec<Vec<IntPoly>>);

impl PolyMatrix {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// det(I - self) by cofactor expansion, exact over Z[z].
    pub fn det_one_minus(&self) -> Result<IntPoly> {
        let n = self.dim();
        if n > 10 {
            return Err(Error::Unsupported(
                "polynomial determinant limited to alphabets of at most 10 colors".into(),
            ));
        }
        let mut m = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let id = if i == j { IntPoly::one() } else { IntPoly::zero() };
                row.push(id.sub(&self.0[i][j]));
            }
            m.push(row);
        }
        Ok(cofactor_det(&m))
    }
}

fn cofactor_det(m: &[Vec<IntPoly>]) -> IntPoly {
    let n = m.len();
    if n == 0 {
        return IntPoly::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = IntPoly::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<IntPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&cofactor_det(&minor));
        det = if j % 2 == 0 { det.add(&term) } else { det.sub(&term) };
    }
    det
}
