//! Gram matrices, exact determinants and signatures, Smith normal form,
//! and extraction of discriminant forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::discform::{FiniteQuadraticForm, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not square or empty")]
    BadShape,
    #[error("odd diagonal entry at {0}; lattice is not even")]
    Odd(usize),
    #[error("degenerate Gram matrix")]
    Degenerate,
    #[error("rescale factor must be nonzero")]
    ZeroScale,
}

/// Symmetric integer Gram matrix of a nondegenerate lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GramMatrix {
    entries: Vec<Vec<i64>>,
    even: bool,
}

pub type ZMatrix = Vec<Vec<BigInt>>;

impl GramMatrix {
    /// Even, nondegenerate lattice.
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        Self::build(entries, true)
    }

    /// Odd lattices are allowed here; only meant for oracle tests.
    pub fn new_odd(entries: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        Self::build(entries, false)
    }

    fn build(entries: Vec<Vec<i64>>, require_even: bool) -> Result<Self, LatticeError> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(LatticeError::BadShape);
        }
        for i in 0..n {
            for j in 0..n {
                if entries[i][j] != entries[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
            }
        }
        let odd_at = (0..n).find(|&i| entries[i][i] % 2 != 0);
        if require_even {
            if let Some(i) = odd_at {
                return Err(LatticeError::Odd(i));
            }
        }
        let g = GramMatrix { entries, even: odd_at.is_none() };
        if g.det_big().is_zero() {
            return Err(LatticeError::Degenerate);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn to_big(&self) -> ZMatrix {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    pub fn det_big(&self) -> BigInt {
        bareiss_det(self.to_big())
    }

    /// Rank-1 lattice ⟨m⟩.
    pub fn rank_one(m: i64) -> Result<Self, LatticeError> {
        Self::new(vec![vec![m]])
    }

    /// Hyperbolic plane U.
    pub fn hyperbolic() -> Self {
        GramMatrix { entries: vec![vec![0, 1], vec![1, 0]], even: true }
    }

    /// Root lattice A_n, negative definite unless `positive`.
    pub fn a_n(n: usize, positive: bool) -> Self {
        let s = if positive { 1 } else { -1 };
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            m[i][i] = 2 * s;
            if i + 1 < n {
                m[i][i + 1] = -s;
                m[i + 1][i] = -s;
            }
        }
        GramMatrix { entries: m, even: true }
    }

    /// Root lattice D_n (n ≥ 4).
    pub fn d_n(n: usize, positive: bool) -> Self {
        assert!(n >= 4);
        let mut g = Self::a_n(n, positive);
        let s = if positive { 1 } else { -1 };
        // branch node n-1 attaches to n-3 instead of n-2
        g.entries[n - 1][n - 2] = 0;
        g.entries[n - 2][n - 1] = 0;
        g.entries[n - 1][n - 3] = -s;
        g.entries[n - 3][n - 1] = -s;
        g
    }

    /// Root lattice E_n for n ∈ {6,7,8}.
    pub fn e_n(n: usize, positive: bool) -> Self {
        assert!((6..=8).contains(&n));
        let s = if positive { 1 } else { -1 };
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            m[i][i] = 2 * s;
        }
        // chain 0-1-...-(n-2), node n-1 attached to node 2
        for i in 0..n - 2 {
            m[i][i + 1] = -s;
            m[i + 1][i] = -s;
        }
        m[n - 1][2] = -s;
        m[2][n - 1] = -s;
        GramMatrix { entries: m, even: true }
    }

    pub fn direct_sum(&self, other: &GramMatrix) -> GramMatrix {
        let (a, b) = (self.dim(), other.dim());
        let mut m = vec![vec![0i64; a + b]; a + b];
        for i in 0..a {
            m[i][..a].copy_from_slice(&self.entries[i]);
        }
        for i in 0..b {
            m[a + i][a..].copy_from_slice(&other.entries[i]);
        }
        GramMatrix { entries: m, even: self.even && other.even }
    }

    pub fn rescale(&self, k: i64) -> Result<GramMatrix, LatticeError> {
        if k == 0 {
            return Err(LatticeError::ZeroScale);
        }
        let entries: Vec<Vec<i64>> =
            self.entries.iter().map(|r| r.iter().map(|&x| x * k).collect()).collect();
        let even = (0..entries.len()).all(|i| entries[i][i] % 2 == 0);
        Ok(GramMatrix { entries, even })
    }

    /// Conjugate by an integer matrix: P^T G P.
    pub fn conjugate(&self, p: &[Vec<i64>]) -> Result<GramMatrix, LatticeError> {
        let n = self.dim();
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i64;
                for k in 0..n {
                    for l in 0..n {
                        s += p[k][i] * self.entries[k][l] * p[l][j];
                    }
                }
                m[i][j] = s;
            }
        }
        if self.even {
            GramMatrix::new(m)
        } else {
            GramMatrix::new_odd(m)
        }
    }
}

/// Fraction-free determinant.
pub fn bareiss_det(mut m: ZMatrix) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

pub fn determinant(g: &GramMatrix) -> BigInt {
    g.det_big()
}

/// Inertia (n+, n−) by symmetric elimination over Q.
pub fn signature(g: &GramMatrix) -> Result<(usize, usize), LatticeError> {
    let mut m: Vec<Vec<BigRational>> = g
        .to_big()
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from_integer).collect())
        .collect();
    let (mut pos, mut neg) = (0, 0);
    while !m.is_empty() {
        let n = m.len();
        let piv = match (0..n).find(|&i| !m[i][i].is_zero()) {
            Some(i) => i,
            None => {
                let (i, j) = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !m[i][j].is_zero())
                    .ok_or(LatticeError::Degenerate)?;
                // e_i <- e_i + e_j makes the diagonal 2 m_ij ≠ 0
                add_basis(&mut m, i, j, &BigRational::one());
                i
            }
        };
        let a = m[piv][piv].clone();
        if a.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        m = schur_1(&m, piv);
    }
    Ok((pos, neg))
}

/// Symmetric basis change e_i <- e_i + c e_j.
pub(crate) fn add_basis(m: &mut [Vec<BigRational>], i: usize, j: usize, c: &BigRational) {
    let n = m.len();
    for k in 0..n {
        let v = &m[j][k] * c;
        m[i][k] = &m[i][k] + v;
    }
    for k in 0..n {
        let v = &m[k][j] * c;
        m[k][i] = &m[k][i] + v;
    }
}

/// Schur complement after pivoting on the diagonal entry `piv`.
pub(crate) fn schur_1(m: &[Vec<BigRational>], piv: usize) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let a = &m[piv][piv];
    let rest: Vec<usize> = (0..n).filter(|&k| k != piv).collect();
    rest.iter()
        .map(|&i| {
            rest.iter()
                .map(|&j| &m[i][j] - &m[i][piv] * &m[piv][j] / a)
                .collect()
        })
        .collect()
}

/// Schur complement after pivoting on the 2×2 block (i, j).
pub(crate) fn schur_2(m: &[Vec<BigRational>], i: usize, j: usize) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let (a, b, c) = (&m[i][i], &m[i][j], &m[j][j]);
    let det = a * c - b * b;
    // inverse of [[a,b],[b,c]]
    let inv = [[c / &det, -b / &det], [-b / &det, a / &det]];
    let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    rest.iter()
        .map(|&r| {
            rest.iter()
                .map(|&s| {
                    let x = [&m[r][i], &m[r][j]];
                    let y = [&m[i][s], &m[j][s]];
                    let mut acc = m[r][s].clone();
                    for u in 0..2 {
                        for v in 0..2 {
                            acc -= x[u] * &inv[u][v] * y[v];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// left · M · right = diag, with the divisibility chain on the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub left: ZMatrix,
    pub diag: ZMatrix,
    pub right: ZMatrix,
}

impl SnfDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.diag.len().min(self.diag.first().map_or(0, |r| r.len()));
        (0..k).map(|i| self.diag[i][i].clone()).collect()
    }
}

pub fn identity(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn smith_normal_form(m: &[Vec<BigInt>]) -> SnfDecomposition {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut d: ZMatrix = m.to_vec();
    let mut left = identity(rows);
    let mut right = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // pick the nonzero entry of least absolute value in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        left.swap(t, pi);
        for r in d.iter_mut() {
            r.swap(t, pj);
        }
        for r in right.iter_mut() {
            r.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if d[i][t].is_zero() {
                continue;
            }
            let q = d[i][t].div_floor(&d[t][t]);
            row_sub(&mut d, i, t, &q);
            row_sub(&mut left, i, t, &q);
            if !d[i][t].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            if d[t][j].is_zero() {
                continue;
            }
            let q = d[t][j].div_floor(&d[t][t]);
            col_sub(&mut d, j, t, &q);
            col_sub(&mut right, j, t, &q);
            if !d[t][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // enforce divisibility of the rest by the pivot
        let mut fix = None;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&d[i][j] % &d[t][t]).is_zero() {
                    fix = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = fix {
            let one = BigInt::from(-1);
            row_sub(&mut d, t, i, &one);
            row_sub(&mut left, t, i, &one);
            continue;
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in left[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    SnfDecomposition { left, diag: d, right }
}

fn row_sub(m: &mut ZMatrix, i: usize, src: usize, q: &BigInt) {
    let s = m[src].clone();
    for (x, y) in m[i].iter_mut().zip(s.iter()) {
        *x -= q * y;
    }
}

fn col_sub(m: &mut ZMatrix, j: usize, src: usize, q: &BigInt) {
    for r in m.iter_mut() {
        let y = r[src].clone();
        r[j] -= q * y;
    }
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> ZMatrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|l| &a[i][l] * &b[l][j]).sum())
                .collect()
        })
        .collect()
}

/// Inverse of a square rational matrix.
pub fn rational_inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c].clone();
        for j in 0..n {
            a[c][j] = &a[c][j] / &piv;
            inv[c][j] = &inv[c][j] / &piv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let x = &f * &a[c][j];
                    a[r][j] = &a[r][j] - x;
                    let y = &f * &inv[c][j];
                    inv[r][j] = &inv[r][j] - y;
                }
            }
        }
    }
    Some(inv)
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(m: &[Vec<BigInt>]) -> ZMatrix {
    let r: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    rational_inverse(&r)
        .expect("unimodular matrix is invertible")
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "matrix is not unimodular");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

fn to_small(x: &BigRational) -> Q {
    Q::new(
        x.numer().to_i64().expect("numerator fits i64"),
        x.denom().to_i64().expect("denominator fits i64"),
    )
}

/// Reduce a rational modulo m (m = 1 or 2).
pub(crate) fn reduce_mod(x: &BigRational, m: i64) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(m));
    let k = (x / &m).floor();
    x - k * m
}

/// A(L) = L∨/L with q in Q/2Z, generators from the SNF of the Gram matrix.
pub fn discriminant_form(g: &GramMatrix) -> Result<FiniteQuadraticForm, LatticeError> {
    if !g.is_even() {
        return Err(LatticeError::Odd((0..g.dim()).find(|&i| g.entries[i][i] % 2 != 0).unwrap()));
    }
    let big = g.to_big();
    let snf = smith_normal_form(&big);
    let diag = snf.diagonal();
    let ginv = rational_inverse(
        &big.iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
    .ok_or(LatticeError::Degenerate)?;
    // generator i of Z^n / G Z^n is column i of left^{-1}
    let linv = unimodular_inverse(&snf.left);
    let n = g.dim();
    let keep: Vec<usize> = (0..n).filter(|&i| diag[i] > BigInt::one()).collect();
    let gens: Vec<Vec<BigRational>> = keep
        .iter()
        .map(|&i| (0..n).map(|r| BigRational::from_integer(linv[r][i].clone())).collect())
        .collect();
    let pair = |x: &[BigRational], y: &[BigRational]| -> BigRational {
        let mut s = BigRational::zero();
        for a in 0..n {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..n {
                s += &x[a] * &ginv[a][b] * &y[b];
            }
        }
        s
    };
    let k = keep.len();
    let mut gram = vec![vec![Q::from_integer(0); k]; k];
    for i in 0..k {
        for j in 0..k {
            let v = pair(&gens[i], &gens[j]);
            let r = if i == j { reduce_mod(&v, 2) } else { reduce_mod(&v, 1) };
            gram[i][j] = to_small(&r);
        }
    }
    let orders: Vec<u64> = keep.iter().map(|&i| diag[i].to_u64().expect("order fits u64")).collect();
    Ok(FiniteQuadraticForm::new(orders, gram).expect("discriminant form is well defined"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(m: &[&[i64]]) -> ZMatrix {
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn determinants() {
        assert_eq!(determinant(&GramMatrix::hyperbolic()), BigInt::from(-1));
        assert_eq!(determinant(&GramMatrix::d_n(4, false)), BigInt::from(4));
        let g = GramMatrix::new(vec![vec![-4, 8], vec![8, -8]]).unwrap();
        assert_eq!(determinant(&g), BigInt::from(-32));
        assert_eq!(determinant(&GramMatrix::e_n(8, false)), BigInt::from(1));
        assert_eq!(determinant(&GramMatrix::e_n(7, false)), BigInt::from(-2));
        assert_eq!(determinant(&GramMatrix::e_n(6, true)), BigInt::from(3));
        assert_eq!(determinant(&GramMatrix::a_n(2, false)), BigInt::from(3));
    }

    #[test]
    fn cofactor_oracle_d4() {
        // Laplace expansion as an independent check
        fn cof(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                        .collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * cof(&minor)
                })
                .sum()
        }
        for g in [GramMatrix::d_n(4, false), GramMatrix::d_n(5, true), GramMatrix::e_n(6, false)] {
            assert_eq!(determinant(&g), BigInt::from(cof(g.entries())));
        }
    }

    #[test]
    fn signatures() {
        assert_eq!(signature(&GramMatrix::hyperbolic()).unwrap(), (1, 1));
        assert_eq!(signature(&GramMatrix::d_n(4, false)).unwrap(), (0, 4));
        let g = GramMatrix::new(vec![vec![-4, 8], vec![8, -8]]).unwrap();
        assert_eq!(signature(&g).unwrap(), (1, 1));
        let uu = GramMatrix::hyperbolic().direct_sum(&GramMatrix::hyperbolic());
        assert_eq!(signature(&uu).unwrap(), (2, 2));
    }

    #[test]
    fn snf_examples() {
        let id = smith_normal_form(&big(&[&[1, 0], &[0, 1]]));
        assert_eq!(id.diagonal(), vec![BigInt::from(1), BigInt::from(1)]);
        let d = smith_normal_form(&big(&[&[2, 0], &[0, 4]]));
        assert_eq!(d.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
        let a2 = big(&[&[-2, 1], &[1, -2]]);
        let s = smith_normal_form(&a2);
        assert_eq!(s.diagonal(), vec![BigInt::from(1), BigInt::from(3)]);
        assert_eq!(mat_mul(&mat_mul(&s.left, &a2), &s.right), s.diag);
    }

    #[test]
    fn rescale_and_errors() {
        let u2 = GramMatrix::hyperbolic().rescale(2).unwrap();
        assert_eq!(determinant(&u2), BigInt::from(-4));
        assert_eq!(GramMatrix::hyperbolic().rescale(0), Err(LatticeError::ZeroScale));
        assert!(GramMatrix::new(vec![vec![1]]).is_err());
        assert!(GramMatrix::new(vec![vec![0, 0], vec![0, 2]]).is_err());
        assert!(signature(&GramMatrix::new_odd(vec![vec![1]]).unwrap()).is_ok());
    }
}
