//! MCPKP instances: parameter sets, key generation, witness checks, the
//! reduction to Matrix Subcode Equivalence and solution-count formulas.
//!
//! Throughout, a witness (A, B) for the public key (H, G′, Y) satisfies
//!
//! ```text
//! G′ (Aᵀ ⊗ B) Hᵀ = Y
//! ```
//!
//! and Y is stored exactly as computed. Row `l` of G′(Aᵀ⊗B) equals
//! vec_row(A·M_l·B) where M_l is row `l` of G′ reshaped to m × n, which is how
//! it is evaluated.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{BitReader, BitWriter, CodecError};
use crate::gf::Field;
use crate::matcode::{self, dual, gauss_binom, log2_big, pgl_order, MatError, Matrix};
use crate::xof::{Hasher, TAG_EXPAND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McpkpError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Y is zero: the instance is already homogeneous")]
    DegenerateY,
    #[error("key derivation produced a rank-deficient instance")]
    RankDeficient,
    #[error("search space of {0} candidate pairs exceeds the 2^26 guard")]
    GuardExceeded(BigUint),
}

/// A named parameter set (q, m, n, k, k′, λ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSet {
    pub name: String,
    /// Serialization identifier; 0 for ad-hoc parameters.
    pub id: u8,
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub kp: usize,
    pub lambda: usize,
    /// Skips the k′ ≥ 3 and binary-field requirements (toy oracles only).
    pub relaxed: bool,
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (q={}, m={}, n={}, k={}, k'={}, lambda={})",
            self.name, self.q, self.m, self.n, self.k, self.kp, self.lambda
        )
    }
}

impl ParamSet {
    fn preset(name: &str, id: u8, q: u32, m: usize, k: usize, lambda: usize) -> ParamSet {
        ParamSet { name: name.into(), id, q, m, n: m, k, kp: 3, lambda, relaxed: false }
    }

    pub fn ia() -> ParamSet {
        Self::preset("MCPKP-Ia", 1, 64, 12, 32, 128)
    }

    pub fn ib() -> ParamSet {
        Self::preset("MCPKP-Ib", 2, 128, 11, 30, 128)
    }

    pub fn iii() -> ParamSet {
        Self::preset("MCPKP-III", 3, 64, 18, 50, 192)
    }

    pub fn v() -> ParamSet {
        Self::preset("MCPKP-V", 4, 64, 22, 67, 256)
    }

    pub fn presets() -> Vec<ParamSet> {
        vec![Self::ia(), Self::ib(), Self::iii(), Self::v()]
    }

    /// Looks up a preset by CLI name (`mcpkp-ia`, `ia`, `MCPKP-Ia`, ...).
    pub fn by_name(name: &str) -> Option<ParamSet> {
        let lower = name.to_ascii_lowercase();
        let short = lower.strip_prefix("mcpkp-").unwrap_or(&lower);
        Self::presets().into_iter().find(|p| p.name.to_ascii_lowercase().ends_with(&format!("-{short}")))
    }

    pub fn by_id(id: u8) -> Option<ParamSet> {
        Self::presets().into_iter().find(|p| p.id == id)
    }

    /// Ad-hoc parameters with relaxed validation, for brute-force scale tests.
    pub fn toy(q: u32, m: usize, n: usize, k: usize, kp: usize) -> Result<ParamSet, McpkpError> {
        let p = ParamSet {
            name: format!("toy-q{q}-{m}x{n}-k{k}-k'{kp}"),
            id: 0,
            q,
            m,
            n,
            k,
            kp,
            lambda: 128,
            relaxed: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), McpkpError> {
        let bad = |s: String| Err(McpkpError::Params(s));
        let mn = self.m * self.n;
        if self.m == 0 || self.n == 0 || self.m > 64 || self.n > 64 {
            return bad(format!("unsupported matrix shape {}x{}", self.m, self.n));
        }
        if !(self.kp < self.k && self.k < mn) {
            return bad(format!("need k' < k < mn, got k'={} k={} mn={mn}", self.kp, self.k));
        }
        if self.kp == 0 {
            return bad("k' must be positive".into());
        }
        if self.lambda == 0 || !self.lambda.is_multiple_of(8) {
            return bad(format!("lambda {} is not a positive multiple of 8", self.lambda));
        }
        if self.relaxed {
            Field::with_order(self.q).map_err(|e| McpkpError::Params(e.to_string()))?;
            return Ok(());
        }
        if !(self.q.is_power_of_two() && (2..=256).contains(&self.q)) {
            return bad(format!("q = {} is not 2^e with 1 <= e <= 8", self.q));
        }
        if self.kp < 3 {
            return bad(format!("k' = {} < 3 leaves too many solutions", self.kp));
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        Field::with_order(self.q).expect("validated parameters")
    }

    pub fn log2q(&self) -> f64 {
        (self.q as f64).log2()
    }

    /// Bits per serialized field element.
    pub fn elem_bits(&self) -> usize {
        self.field().bits() as usize
    }

    pub fn mn(&self) -> usize {
        self.m * self.n
    }

    /// Number of scalar constraints k′(mn−k).
    pub fn num_constraints(&self) -> usize {
        self.kp * (self.mn() - self.k)
    }

    pub fn seed_bytes(&self) -> usize {
        self.lambda / 8
    }

    pub fn pk_seed_bytes(&self) -> usize {
        2 * self.lambda / 8
    }
}

/// Public key: (H, G′, Y) plus the seed that regenerates H and G′.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McpkpInstance {
    pub params: ParamSet,
    pub h: Matrix,
    pub gprime: Matrix,
    pub y: Matrix,
    pub seed: Vec<u8>,
}

/// Secret key: the isometry (A, B) and the seed it was derived from.
#[derive(Clone, PartialEq, Eq)]
pub struct Witness {
    pub a: Matrix,
    pub b: Matrix,
    pub seed: Vec<u8>,
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Witness({}x{}, {}x{})", self.a.rows(), self.a.cols(), self.b.rows(), self.b.cols())
    }
}

/// Matrix Subcode Equivalence instance: is G′ mapped into the code of G?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MseInstance {
    pub m: usize,
    pub n: usize,
    pub g: Matrix,
    pub gprime: Matrix,
}

/// G′(Aᵀ⊗B) computed row by row as vec_row(A·M_l·B).
pub fn isometry_rows(gprime: &Matrix, a: &Matrix, b: &Matrix) -> Result<Matrix, McpkpError> {
    let (m, n) = (a.rows(), b.rows());
    if gprime.cols() != m * n || a.cols() != m || b.cols() != n {
        return Err(McpkpError::Dimension("G' against (A, B)".into()));
    }
    let f = gprime.field();
    let mut data = Vec::with_capacity(gprime.rows() * m * n);
    for l in 0..gprime.rows() {
        let ml = Matrix::from_vec(f, m, n, gprime.row(l).to_vec())?;
        data.extend_from_slice(a.mul(&ml)?.mul(b)?.data());
    }
    Ok(Matrix::from_vec(f, gprime.rows(), m * n, data)?)
}

/// G′(Aᵀ⊗B)Hᵀ given Hᵀ.
pub fn project(gprime: &Matrix, ht: &Matrix, a: &Matrix, b: &Matrix) -> Result<Matrix, McpkpError> {
    Ok(isometry_rows(gprime, a, b)?.mul(ht)?)
}

/// Reference evaluation with an explicit Kronecker product.
pub fn project_literal(gprime: &Matrix, h: &Matrix, a: &Matrix, b: &Matrix) -> Result<Matrix, McpkpError> {
    Ok(gprime.mul(&a.transpose().kron(b)?)?.mul(&h.transpose())?)
}

/// Expands H ((mn−k) × mn, full rank) and G′ (k′ × mn) from the public seed.
pub fn expand_public(params: &ParamSet, pk_seed: &[u8]) -> Result<(Matrix, Matrix), McpkpError> {
    let f = params.field();
    let (mn, k) = (params.mn(), params.k);
    let mut rng = Hasher::new(TAG_EXPAND).absorb(b"public").absorb(pk_seed).clone().into_rng();
    let r = Matrix::random(&f, mn - k, k, &mut rng);
    let s = Matrix::sample_gl(&f, mn - k, &mut rng);
    let h = s.mul(&r.hstack(&Matrix::identity(&f, mn - k))?)?;
    let gprime = Matrix::random(&f, params.kp, mn, &mut rng);
    Ok((h, gprime))
}

/// Rebuilds the whole key pair from a λ-bit secret seed.
pub fn keypair_from_seed(params: &ParamSet, sk_seed: &[u8]) -> Result<(McpkpInstance, Witness), McpkpError> {
    params.validate()?;
    if sk_seed.len() != params.seed_bytes() {
        return Err(McpkpError::Params(format!("secret seed must be {} bytes", params.seed_bytes())));
    }
    let f = params.field();
    let pk_seed = Hasher::new(TAG_EXPAND).absorb(b"pk-seed").absorb(sk_seed).clone().digest(params.pk_seed_bytes());
    let mut wrng = Hasher::new(TAG_EXPAND).absorb(b"witness").absorb(sk_seed).clone().into_rng();
    let a = Matrix::sample_gl(&f, params.m, &mut wrng);
    let b = Matrix::sample_gl(&f, params.n, &mut wrng);
    let (h, gprime) = expand_public(params, &pk_seed)?;
    if gprime.rank() != params.kp {
        return Err(McpkpError::RankDeficient);
    }
    let y = project(&gprime, &h.transpose(), &a, &b)?;
    if y.rank() != params.kp {
        return Err(McpkpError::RankDeficient);
    }
    let inst = McpkpInstance { params: params.clone(), h, gprime, y, seed: pk_seed };
    Ok((inst, Witness { a, b, seed: sk_seed.to_vec() }))
}

/// Deterministic key generation; rank failures restart with the next counter.
pub fn keygen(params: &ParamSet, master_seed: &[u8]) -> Result<(McpkpInstance, Witness), McpkpError> {
    params.validate()?;
    for counter in 0u32.. {
        let sk_seed = Hasher::new(TAG_EXPAND)
            .absorb(b"keygen")
            .absorb_u32(counter)
            .absorb(master_seed)
            .clone()
            .digest(params.seed_bytes());
        match keypair_from_seed(params, &sk_seed) {
            Err(McpkpError::RankDeficient) => continue,
            other => return other,
        }
    }
    unreachable!("counter space exhausted")
}

fn check_shapes(inst: &McpkpInstance, w: &Witness) -> Result<(), McpkpError> {
    let p = &inst.params;
    let ok = w.a.rows() == p.m
        && w.a.cols() == p.m
        && w.b.rows() == p.n
        && w.b.cols() == p.n
        && inst.gprime.cols() == p.mn()
        && inst.h.cols() == p.mn()
        && inst.y.rows() == inst.gprime.rows()
        && inst.y.cols() == inst.h.rows();
    if !ok {
        return Err(McpkpError::Dimension("witness against instance".into()));
    }
    Ok(())
}

/// True iff A, B are invertible and G′(Aᵀ⊗B)Hᵀ = Y.
pub fn verify_witness(inst: &McpkpInstance, w: &Witness) -> Result<bool, McpkpError> {
    check_shapes(inst, w)?;
    if w.a.rank() != inst.params.m || w.b.rank() != inst.params.n {
        return Ok(false);
    }
    Ok(project(&inst.gprime, &inst.h.transpose(), &w.a, &w.b)? == inst.y)
}

/// Augments the code dual to H with a particular solution G″ of G″Hᵀ = Y.
pub fn reduce_to_mse(inst: &McpkpInstance) -> Result<MseInstance, McpkpError> {
    if inst.y.is_zero() {
        return Err(McpkpError::DegenerateY);
    }
    let g2 = inst.h.transpose().solve_left(&inst.y)?;
    let g = dual(&inst.h)?.vstack(&g2)?;
    Ok(MseInstance { m: inst.params.m, n: inst.params.n, g, gprime: inst.gprime.clone() })
}

impl MseInstance {
    /// Whether (A, B) maps the code of G′ into the code of G.
    pub fn is_solution(&self, a: &Matrix, b: &Matrix) -> Result<bool, McpkpError> {
        let parity = dual(&self.g)?;
        self.is_solution_with_parity(&parity.transpose(), a, b)
    }

    fn is_solution_with_parity(&self, parity_t: &Matrix, a: &Matrix, b: &Matrix) -> Result<bool, McpkpError> {
        if a.rank() != self.m || b.rank() != self.n {
            return Ok(false);
        }
        Ok(project(&self.gprime, parity_t, a, b)?.is_zero())
    }
}

/// Every invertible n × n matrix over `field`, in lexicographic entry order.
pub fn enumerate_gl(field: &Field, n: usize) -> Vec<Matrix> {
    let q = field.order();
    let total = (q as u64).pow((n * n) as u32);
    (0..total)
        .into_par_iter()
        .filter_map(|mut idx| {
            let mut data = vec![0u8; n * n];
            for d in data.iter_mut().rev() {
                *d = (idx % q as u64) as u8;
                idx /= q as u64;
            }
            let m = Matrix::from_vec(field, n, n, data).ok()?;
            (m.rank() == n).then_some(m)
        })
        .collect()
}

const BRUTE_FORCE_GUARD: u64 = 1 << 26;

fn guard(field: &Field, m: usize, n: usize) -> Result<(), McpkpError> {
    let q = field.order() as u64;
    let pairs = matcode::gl_order(m as u32, q) * matcode::gl_order(n as u32, q);
    let raw = BigUint::from(q).pow((m * m) as u32) + BigUint::from(q).pow((n * n) as u32);
    if pairs > BigUint::from(BRUTE_FORCE_GUARD) || raw > BigUint::from(BRUTE_FORCE_GUARD) {
        return Err(McpkpError::GuardExceeded(pairs));
    }
    Ok(())
}

fn search<F>(field: &Field, m: usize, n: usize, accept: F) -> Result<Vec<(Matrix, Matrix)>, McpkpError>
where
    F: Fn(&Matrix, &Matrix) -> Result<bool, McpkpError> + Sync,
{
    guard(field, m, n)?;
    let gl_m = enumerate_gl(field, m);
    let gl_n = enumerate_gl(field, n);
    let found: Result<Vec<Vec<(Matrix, Matrix)>>, McpkpError> = gl_m
        .par_iter()
        .map(|a| {
            let mut hits = Vec::new();
            for b in &gl_n {
                if accept(a, b)? {
                    hits.push((a.clone(), b.clone()));
                }
            }
            Ok(hits)
        })
        .collect();
    Ok(found?.into_iter().flatten().collect())
}

/// All (A, B) ∈ GL_m × GL_n with G′(Aᵀ⊗B)Hᵀ = Y.
pub fn brute_force_mcpkp(inst: &McpkpInstance) -> Result<Vec<(Matrix, Matrix)>, McpkpError> {
    let ht = inst.h.transpose();
    search(inst.gprime.field(), inst.params.m, inst.params.n, |a, b| Ok(project(&inst.gprime, &ht, a, b)? == inst.y))
}

/// All (A, B) ∈ GL_m × GL_n with G′(Aᵀ⊗B)·dual(G)ᵀ = 0.
pub fn brute_force_mse(inst: &MseInstance) -> Result<Vec<(Matrix, Matrix)>, McpkpError> {
    let parity_t = dual(&inst.g)?.transpose();
    search(inst.g.field(), inst.m, inst.n, |a, b| inst.is_solution_with_parity(&parity_t, a, b))
}

/// An exact positive rational together with its log2.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub numerator: BigUint,
    pub denominator: BigUint,
    pub log2: f64,
}

impl RatioReport {
    fn new(numerator: BigUint, denominator: BigUint) -> RatioReport {
        let log2 = log2_big(&numerator) - log2_big(&denominator);
        RatioReport { numerator, denominator, log2 }
    }
}

fn gb(m: usize, r: usize, q: u32) -> BigUint {
    gauss_binom(m as u32, r as u32, q as u64).expect("r <= m")
}

/// Average number of MSE solutions up to scalars:
/// |PGL_m|·|PGL_n|·[k, k′]_q / [mn, k′]_q.
pub fn expected_solutions(p: &ParamSet) -> RatioReport {
    let q = p.q as u64;
    let num = pgl_order(p.m as u32, q) * pgl_order(p.n as u32, q) * gb(p.k, p.kp, p.q);
    RatioReport::new(num, gb(p.mn(), p.kp, p.q))
}

/// Expected number of spurious witnesses:
/// q^(m²+n²)/(q−1)² · [k, k′]_q / Σ_{i=1..k′} [mn, i]_q.
pub fn spurious_solutions(p: &ParamSet) -> RatioReport {
    let q = BigUint::from(p.q);
    let num = q.pow((p.m * p.m + p.n * p.n) as u32) * gb(p.k, p.kp, p.q);
    let qm1 = BigUint::from(p.q - 1);
    let sum: BigUint = (1..=p.kp).map(|i| gb(p.mn(), i, p.q)).fold(BigUint::zero(), |a, b| a + b);
    RatioReport::new(num, &qm1 * &qm1 * sum)
}

/// One line of a parameter validation report.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn validation_report(p: &ParamSet) -> Vec<Check> {
    let exp = expected_solutions(p);
    let spur = spurious_solutions(p);
    vec![
        Check {
            name: "structure",
            passed: p.validate().is_ok(),
            detail: p.validate().err().map_or_else(|| "k' < k < mn, q = 2^e".to_string(), |e| e.to_string()),
        },
        Check { name: "k' >= 3", passed: p.kp >= 3, detail: format!("k' = {}", p.kp) },
        Check { name: "expected solutions <= 1", passed: exp.log2 <= 0.0, detail: format!("log2 = {:.2}", exp.log2) },
        Check {
            name: "spurious solutions < 2^-lambda",
            passed: spur.log2 < -(p.lambda as f64),
            detail: format!("log2 = {:.2}", spur.log2),
        },
    ]
}

impl McpkpInstance {
    /// id ‖ 2λ-bit seed ‖ Y packed row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = BitWriter::new();
        w.write(self.params.id as u32, 8);
        w.write_bytes(&self.seed);
        self.y.pack_entries(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<McpkpInstance, McpkpError> {
        let first = *bytes.first().ok_or(CodecError::Truncated)?;
        let params = ParamSet::by_id(first).ok_or(CodecError::BadHeader)?;
        let mut r = BitReader::new(&bytes[1..]);
        let seed = r.read_bytes(params.pk_seed_bytes())?;
        let y = Matrix::unpack_entries(&params.field(), params.kp, params.mn() - params.k, &mut r)?;
        r.finish()?;
        let (h, gprime) = expand_public(&params, &seed)?;
        Ok(McpkpInstance { params, h, gprime, y, seed })
    }

    /// Byte length of [`McpkpInstance::to_bytes`] for `params`.
    pub fn encoded_len(params: &ParamSet) -> usize {
        1 + params.pk_seed_bytes() + (params.num_constraints() * params.elem_bits()).div_ceil(8)
    }
}

impl Witness {
    /// id ‖ λ-bit seed.
    pub fn to_bytes(&self, params: &ParamSet) -> Vec<u8> {
        let mut out = vec![params.id];
        out.extend_from_slice(&self.seed);
        out
    }

    /// Parses a secret key and regenerates both halves of the key pair.
    pub fn from_bytes(bytes: &[u8]) -> Result<(McpkpInstance, Witness), McpkpError> {
        let first = *bytes.first().ok_or(CodecError::Truncated)?;
        let params = ParamSet::by_id(first).ok_or(CodecError::BadHeader)?;
        match bytes.len().cmp(&(1 + params.seed_bytes())) {
            std::cmp::Ordering::Less => return Err(CodecError::Truncated.into()),
            std::cmp::Ordering::Greater => return Err(CodecError::TrailingData.into()),
            _ => {}
        }
        keypair_from_seed(&params, &bytes[1..])
    }
}

/// Scales both halves of a solution: (λA, λ′B).
pub fn scale_pair(a: &Matrix, b: &Matrix, la: u8, lb: u8) -> (Matrix, Matrix) {
    (a.scale(la), b.scale(lb))
}

/// True when a and b are equal up to a non-zero scalar.
pub fn proportional(a: &Matrix, b: &Matrix) -> bool {
    let f = a.field();
    (1..f.order() as u8).any(|s| &a.scale(s) == b)
}
