//! Dense matrices over GF(q), matrix-code helpers and exact subspace counts.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

use crate::codec::{self, BitReader, BitWriter, CodecError};
use crate::gf::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is rank deficient (rank {rank}, expected {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("linear system has no solution")]
    NoSolution,
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Row-major matrix over a base field, one `u8` per entry in memory.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<u8>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows.min(16) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(32)])?;
        }
        Ok(())
    }
}

/// Reduced row echelon form together with the pivot columns.
#[derive(Debug, Clone)]
pub struct Rref {
    pub rank: usize,
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, field: field.clone(), data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<u8>) -> Result<Matrix, MatError> {
        if data.len() != rows * cols {
            return Err(MatError::Dimension(format!("{} entries for {rows}x{cols}", data.len())));
        }
        if let Some(&bad) = data.iter().find(|&&v| v as usize >= field.order()) {
            return Err(MatError::InvalidArgs(format!("entry {bad} outside GF({})", field.order())));
        }
        Ok(Matrix { rows, cols, field: field.clone(), data })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u8>]) -> Result<Matrix, MatError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatError::Dimension("ragged rows".into()));
        }
        Matrix::from_vec(field, rows.len(), cols, rows.concat())
    }

    pub fn random<R: RngCore + ?Sized>(field: &Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let data = (0..rows * cols).map(|_| field.sample(rng)).collect();
        Matrix { rows, cols, field: field.clone(), data }
    }

    /// Uniform element of GL_n(q) by rejection on the rank.
    pub fn sample_gl<R: RngCore + ?Sized>(field: &Field, n: usize, rng: &mut R) -> Matrix {
        assert!(n >= 1);
        loop {
            let m = Matrix::random(field, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        debug_assert!((v as usize) < self.field.order());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_field(&self, other: &Matrix) -> Result<(), MatError> {
        if self.field != other.field {
            return Err(MatError::Dimension("matrices over different fields".into()));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MatError::Dimension("add".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.field.add(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.add(&other.scale(self.field.neg(1)))
    }

    pub fn scale(&self, s: u8) -> Matrix {
        let row = self.field.mul_row(s);
        let data = self.data.iter().map(|&a| row[a as usize]).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(MatError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let n = other.cols;
        let mut out = Matrix::zeros(f, self.rows, n);
        for i in 0..self.rows {
            let acc = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let row = f.mul_row(a);
                for (o, &b) in acc.iter_mut().zip(other.row(k)) {
                    *o = f.add(*o, row[b as usize]);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product: block (i, j) equals self[i, j] · other.
    pub fn kron(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_field(other)?;
        let (p, r, s, t) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Matrix::zeros(&self.field, p * s, r * t);
        for i in 0..p {
            for j in 0..r {
                let row = self.field.mul_row(self.get(i, j));
                for a in 0..s {
                    for b in 0..t {
                        out.data[(i * s + a) * (r * t) + j * t + b] = row[other.get(a, b) as usize];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Concatenation of the rows, as a 1 × (rows·cols) matrix.
    pub fn vec_row(&self) -> Matrix {
        Matrix { rows: 1, cols: self.rows * self.cols, field: self.field.clone(), data: self.data.clone() }
    }

    /// Inverse of [`Matrix::vec_row`].
    pub fn unvec(v: &Matrix, rows: usize, cols: usize) -> Result<Matrix, MatError> {
        if v.data.len() != rows * cols {
            return Err(MatError::Dimension("unvec".into()));
        }
        Ok(Matrix { rows, cols, field: v.field.clone(), data: v.data.clone() })
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_field(other)?;
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(MatError::Dimension("vstack".into()));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols, field: self.field.clone(), data })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, MatError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(MatError::Dimension("hstack".into()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix { rows: self.rows, cols, field: self.field.clone(), data })
    }

    /// Gauss-Jordan elimination, pivoting on the first non-zero entry in
    /// column order.
    pub fn rref(&self) -> Rref {
        let f = &self.field;
        let mut m = self.clone();
        let cols = m.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    m.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is non-zero");
            let inv_row = f.mul_row(inv);
            for j in 0..cols {
                m.data[r * cols + j] = inv_row[m.data[r * cols + j] as usize];
            }
            let pivot_row: Vec<u8> = m.row(r).to_vec();
            for i in 0..m.rows {
                let factor = m.get(i, c);
                if i == r || factor == 0 {
                    continue;
                }
                let row = f.mul_row(f.neg(factor));
                for j in c..cols {
                    let idx = i * cols + j;
                    m.data[idx] = f.add(m.data[idx], row[pivot_row[j] as usize]);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { rank: r, matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    pub fn inverse(&self) -> Result<Matrix, MatError> {
        if self.rows != self.cols {
            return Err(MatError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(&self.field, n))?;
        let red = aug.rref();
        if red.pivots.iter().take(n).enumerate().any(|(i, &p)| p != i) || red.rank < n {
            return Err(MatError::RankDeficient { rank: self.rank(), expected: n });
        }
        let mut inv = Matrix::zeros(&self.field, n, n);
        for r in 0..n {
            inv.data[r * n..(r + 1) * n].copy_from_slice(&red.matrix.row(r)[n..]);
        }
        Ok(inv)
    }

    /// A particular solution X of `X · self = rhs` (free variables set to 0).
    pub fn solve_left(&self, rhs: &Matrix) -> Result<Matrix, MatError> {
        self.check_field(rhs)?;
        if rhs.cols != self.cols {
            return Err(MatError::Dimension("solve_left".into()));
        }
        // self^T X^T = rhs^T
        let a = self.transpose();
        let b = rhs.transpose();
        let aug = a.hstack(&b)?;
        let red = aug.rref();
        let nvars = a.cols;
        if red.pivots.iter().any(|&p| p >= nvars) {
            return Err(MatError::NoSolution);
        }
        let mut xt = Matrix::zeros(&self.field, nvars, b.cols);
        for (i, &p) in red.pivots.iter().enumerate() {
            xt.data[p * b.cols..(p + 1) * b.cols].copy_from_slice(&red.matrix.row(i)[nvars..]);
        }
        Ok(xt.transpose())
    }

    /// Row space basis equality test.
    pub fn same_row_space(&self, other: &Matrix) -> bool {
        let a = self.rref();
        let b = other.rref();
        a.rank == b.rank && a.matrix.data[..a.rank * self.cols] == b.matrix.data[..b.rank * other.cols]
    }

    /// Entries bit-packed row-major, `bits()` per entry, with no header.
    pub fn pack_entries(&self, w: &mut BitWriter) {
        let width = self.field.bits();
        for &v in &self.data {
            w.write(v as u32, width);
        }
    }

    pub fn unpack_entries(field: &Field, rows: usize, cols: usize, r: &mut BitReader) -> Result<Matrix, MatError> {
        let width = field.bits();
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let v = r.read(width)?;
            if v as usize >= field.order() {
                return Err(CodecError::OutOfRange { value: v, order: field.order() }.into());
            }
            data.push(v as u8);
        }
        Ok(Matrix { rows, cols, field: field.clone(), data })
    }

    /// 4-byte LE rows ‖ 4-byte LE cols ‖ packed entries, padded to a byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        out.extend_from_slice(&codec::pack(&self.data, self.field.bits()));
        out
    }

    /// Parses [`Matrix::to_bytes`] output; returns the matrix and bytes consumed.
    pub fn from_bytes(field: &Field, bytes: &[u8]) -> Result<(Matrix, usize), MatError> {
        if bytes.len() < 8 {
            return Err(CodecError::Truncated.into());
        }
        let rows = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let count = rows.checked_mul(cols).ok_or(CodecError::Truncated)?;
        let len = count.checked_mul(field.bits() as usize).ok_or(CodecError::Truncated)?.div_ceil(8);
        if bytes.len() < 8 + len {
            return Err(CodecError::Truncated.into());
        }
        let data = codec::unpack(&bytes[8..8 + len], count, field.bits(), field.order())?;
        Ok((Matrix { rows, cols, field: field.clone(), data }, 8 + len))
    }
}

/// Parity-check matrix of the code generated by `gen`: full rank mn−k with
/// `gen · Hᵀ = 0`.
pub fn dual(gen: &Matrix) -> Result<Matrix, MatError> {
    let f = gen.field();
    let red = gen.rref();
    if red.rank != gen.rows() {
        return Err(MatError::RankDeficient { rank: red.rank, expected: gen.rows() });
    }
    let n = gen.cols();
    let mut is_pivot = vec![false; n];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let mut h = Matrix::zeros(f, free.len(), n);
    for (row, &fc) in free.iter().enumerate() {
        h.set(row, fc, 1);
        for (i, &p) in red.pivots.iter().enumerate() {
            h.set(row, p, f.neg(red.matrix.get(i, fc)));
        }
    }
    Ok(h)
}

/// A matrix code given by a generator and, optionally, a parity-check matrix.
#[derive(Debug, Clone)]
pub struct CodeBasis {
    pub gen: Matrix,
    pub parity: Option<Matrix>,
}

impl CodeBasis {
    pub fn new(gen: Matrix) -> Result<CodeBasis, MatError> {
        let rank = gen.rank();
        if rank != gen.rows() {
            return Err(MatError::RankDeficient { rank, expected: gen.rows() });
        }
        Ok(CodeBasis { gen, parity: None })
    }

    pub fn with_parity(mut self) -> Result<CodeBasis, MatError> {
        self.parity = Some(dual(&self.gen)?);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.gen.rows()
    }
}

fn q_big(q: u64) -> BigUint {
    BigUint::from(q)
}

/// Gaussian binomial coefficient [m choose r]_q, exact.
pub fn gauss_binom(m: u32, r: u32, q: u64) -> Result<BigUint, MatError> {
    if r > m {
        return Err(MatError::InvalidArgs(format!("gauss_binom({m}, {r})")));
    }
    let qb = q_big(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..r {
        num *= qb.pow(m) - qb.pow(i);
        den *= qb.pow(r) - qb.pow(i);
    }
    Ok(num / den)
}

/// Number of m × n matrices of rank r over GF(q), exact.
pub fn count_rank_matrices(m: u32, n: u32, r: u32, q: u64) -> Result<BigUint, MatError> {
    if r > m.min(n) {
        return Err(MatError::InvalidArgs(format!("rank {r} for {m}x{n}")));
    }
    let qb = q_big(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..r {
        num *= (qb.pow(m) - qb.pow(i)) * (qb.pow(n) - qb.pow(i));
        den *= qb.pow(r) - qb.pow(i);
    }
    Ok(num / den)
}

pub fn gl_order(n: u32, q: u64) -> BigUint {
    count_rank_matrices(n, n, n, q).expect("r = n is in range")
}

pub fn pgl_order(n: u32, q: u64) -> BigUint {
    gl_order(n, q) / q_big(q - 1)
}

/// log2 of a positive big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    (top.iter_u64_digits().next().unwrap() as f64).log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::{HashMap, HashSet};

    fn gf(q: u32) -> Field {
        Field::with_order(q).unwrap()
    }

    #[test]
    fn vec_row_basics() {
        let f = gf(2);
        assert_eq!(Matrix::identity(&f, 2).vec_row().data(), &[1, 0, 0, 1]);
        assert!(Matrix::zeros(&f, 3, 2).vec_row().is_zero());
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = Matrix::random(&gf(64), 3, 5, &mut rng);
            assert_eq!(Matrix::unvec(&m.vec_row(), 3, 5).unwrap(), m);
        }
    }

    #[test]
    fn kron_basics() {
        let f = gf(4);
        assert_eq!(Matrix::identity(&f, 2).kron(&Matrix::identity(&f, 3)).unwrap(), Matrix::identity(&f, 6));
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let b = Matrix::random(&f, 2, 3, &mut rng);
        assert!(Matrix::zeros(&f, 2, 2).kron(&b).unwrap().is_zero());
    }

    #[test]
    fn kron_mixed_product() {
        let f = gf(4);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = Matrix::random(&f, 2, 3, &mut rng);
            let c = Matrix::random(&f, 3, 2, &mut rng);
            let b = Matrix::random(&f, 2, 2, &mut rng);
            let d = Matrix::random(&f, 2, 3, &mut rng);
            let lhs = a.kron(&b).unwrap().mul(&c.kron(&d).unwrap()).unwrap();
            let rhs = a.mul(&c).unwrap().kron(&b.mul(&d).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn rref_basics() {
        let f = gf(64);
        let id = Matrix::identity(&f, 5);
        let r = id.rref();
        assert_eq!(r.rank, 5);
        assert_eq!(r.matrix, id);
        assert_eq!(Matrix::zeros(&f, 3, 4).rank(), 0);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..50 {
            let m = Matrix::random(&f, 4, 7, &mut rng);
            let once = m.rref().matrix;
            assert_eq!(once.rref().matrix, once);
            assert!(once.same_row_space(&m));
        }
    }

    /// Rank via brute-force span size: |span| = 2^rank over GF(2).
    fn span_rank_gf2(m: &Matrix) -> usize {
        let mut span: HashSet<Vec<u8>> = HashSet::new();
        for mask in 0u32..(1 << m.rows()) {
            let mut v = vec![0u8; m.cols()];
            for r in 0..m.rows() {
                if (mask >> r) & 1 == 1 {
                    for (x, &y) in v.iter_mut().zip(m.row(r)) {
                        *x ^= y;
                    }
                }
            }
            span.insert(v);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn rank_matches_span_enumeration() {
        let f = gf(2);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let m = Matrix::random(&f, 6, 9, &mut rng);
            assert_eq!(m.rank(), span_rank_gf2(&m));
        }
    }

    #[test]
    fn dual_standard_form() {
        let f = gf(64);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let p = Matrix::random(&f, 3, 4, &mut rng);
        let g = Matrix::identity(&f, 3).hstack(&p).unwrap();
        let h = dual(&g).unwrap();
        let expected = p.transpose().scale(f.neg(1)).hstack(&Matrix::identity(&f, 4)).unwrap();
        assert_eq!(h, expected);
        let full = Matrix::identity(&f, 4);
        assert_eq!(dual(&full).unwrap().rows(), 0);
        let deficient = Matrix::zeros(&f, 2, 4);
        assert!(dual(&deficient).is_err());
    }

    #[test]
    fn dual_contract_random() {
        let f = gf(64);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = Matrix::random(&f, 5, 12, &mut rng);
            if g.rank() < 5 {
                continue;
            }
            let h = dual(&g).unwrap();
            assert!(g.mul(&h.transpose()).unwrap().is_zero());
            assert_eq!(h.rank(), 7);
            assert!(dual(&h).unwrap().same_row_space(&g));
        }
        let f3 = gf(3);
        let g = Matrix::random(&f3, 2, 5, &mut rng);
        if g.rank() == 2 {
            assert!(g.mul(&dual(&g).unwrap().transpose()).unwrap().is_zero());
        }
    }

    #[test]
    fn vec_row_kron_identity() {
        let f = gf(4);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..100 {
            let a = Matrix::random(&f, 3, 3, &mut rng);
            let m = Matrix::random(&f, 3, 2, &mut rng);
            let b = Matrix::random(&f, 2, 2, &mut rng);
            let lhs = a.mul(&m).unwrap().mul(&b).unwrap().vec_row();
            let rhs = m.vec_row().mul(&a.transpose().kron(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sample_gl_properties() {
        let f2 = gf(2);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..20 {
            assert_eq!(Matrix::sample_gl(&f2, 1, &mut rng).data(), &[1]);
        }
        for _ in 0..1000 {
            assert_eq!(Matrix::sample_gl(&gf(64), 4, &mut rng).rank(), 4);
        }
    }

    #[test]
    fn sample_gl_uniform_over_gl2_f2() {
        let f2 = gf(2);
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let draws = 60_000;
        let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(Matrix::sample_gl(&f2, 2, &mut rng).data().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p: f64 = 1.0 / 6.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - mean).abs() < 5.0 * sigma, "{c}");
        }
    }

    #[test]
    fn inverse_and_solve() {
        let f = gf(64);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let a = Matrix::sample_gl(&f, 5, &mut rng);
        let ai = a.inverse().unwrap();
        assert_eq!(a.mul(&ai).unwrap(), Matrix::identity(&f, 5));
        assert!(Matrix::zeros(&f, 3, 3).inverse().is_err());

        let h = Matrix::random(&f, 4, 9, &mut rng);
        let y = Matrix::random(&f, 2, 4, &mut rng);
        let x = h.transpose().solve_left(&y).unwrap();
        assert_eq!(x.mul(&h.transpose()).unwrap(), y);
        let mut bad = Matrix::zeros(&f, 1, 2);
        bad.set(0, 0, 1);
        assert_eq!(Matrix::zeros(&f, 3, 2).solve_left(&bad), Err(MatError::NoSolution));
    }

    #[test]
    fn serialization_roundtrip() {
        let f = gf(64);
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let m = Matrix::random(&f, 3, 5, &mut rng);
        let bytes = m.to_bytes();
        assert_eq!(bytes.len(), 8 + (15 * 6usize).div_ceil(8));
        assert_eq!(&bytes[0..4], &[3, 0, 0, 0]);
        let (back, used) = Matrix::from_bytes(&f, &bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(used, bytes.len());
        assert!(Matrix::from_bytes(&f, &bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn gaussian_coefficients() {
        assert_eq!(gauss_binom(7, 0, 64).unwrap(), BigUint::one());
        assert_eq!(gauss_binom(2, 1, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(log2_big(&gauss_binom(12, 3, 64).unwrap()).floor(), 162.0);
        assert!(gauss_binom(2, 3, 2).is_err());
        // three 1-dimensional subspaces of GF(2)^2 by enumeration of nonzero vectors / (q-1)
        let lines: HashSet<[u8; 2]> = [[0u8, 1], [1, 0], [1, 1]].into_iter().collect();
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn rank_counts_by_enumeration() {
        let f = gf(2);
        let mut by_rank = [0u32; 3];
        for bits in 0u8..16 {
            let data = (0..4).map(|i| (bits >> i) & 1).collect();
            let m = Matrix::from_vec(&f, 2, 2, data).unwrap();
            by_rank[m.rank()] += 1;
        }
        for r in 0..3u32 {
            assert_eq!(count_rank_matrices(2, 2, r, 2).unwrap(), BigUint::from(by_rank[r as usize]));
        }
        assert_eq!(by_rank, [1, 9, 6]);
        assert_eq!(gl_order(2, 3), BigUint::from(48u32));
        assert_eq!(pgl_order(2, 3), BigUint::from(24u32));
        assert!(count_rank_matrices(2, 3, 3, 2).is_err());
    }

    #[test]
    fn rank_counts_sum_to_total() {
        for q in [2u64, 3, 4, 64] {
            for m in 1..=6u32 {
                for n in 1..=6u32 {
                    let total: BigUint = (0..=m.min(n)).map(|r| count_rank_matrices(m, n, r, q).unwrap()).sum();
                    assert_eq!(total, BigUint::from(q).pow(m * n), "q={q} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn log2_of_big_values() {
        assert_eq!(log2_big(&BigUint::from(1u32)), 0.0);
        assert!((log2_big(&(BigUint::one() << 300u32)) - 300.0).abs() < 1e-12);
        assert!((log2_big(&BigUint::from(3u32).pow(200)) - 200.0 * 3f64.log2()).abs() < 1e-9);
    }
}
