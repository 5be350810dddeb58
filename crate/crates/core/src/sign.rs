//! Threshold-computation-in-the-head signatures over an MCPKP key pair.
//!
//! Per repetition the signer expands a GGM tree into N leaves. Leaf j yields
//! base-field vectors u_A,j, u_B,j and ρ/η extension elements u_v,j, and the
//! sharings are
//!
//! ```text
//! P_x(X) = Δx + Σ_j u_x,j · (1 − X/e_j)      (degree 1, P_x(0) = x)
//! v(X)   = X · Σ_j u_v,j · (1 − X/e_j)       (degree 2, v(0) = 0)
//! ```
//!
//! so party i's share never depends on leaf i, and a verifier holding every
//! leaf but i* can evaluate party i*'s share. The MPC output α(X) has
//! α(0) = 0 for an honest witness; the signer sends its X² coefficient and the
//! verifier recovers the X coefficient from α(e_{i*}).
//!
//! Byte layout (one little-endian bit stream, padded once at the end):
//! `salt ‖ h2 ‖ τ × (Δx ‖ α X²-coefficients ‖ com_{i*} ‖ co-path)`. The first
//! digest h1 is recomputed by the verifier and not transmitted.

use std::sync::Arc;

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{self, BitReader, BitWriter, CodecError};
use crate::gf::{Ext, ExtField};
use crate::mcpkp::{verify_witness, McpkpError, McpkpInstance, ParamSet, Witness};
use crate::mpc::{Challenge, MpcContext, MpcError};
use crate::sharing::{commit, EvalPoints, SeedTree, SharingError};
use crate::xof::{Hasher, XofRng, TAG_CHALLENGE1, TAG_CHALLENGE2, TAG_EXPAND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignError {
    #[error("invalid signature parameters: {0}")]
    Params(String),
    #[error("the secret key does not solve the public instance")]
    InvalidWitness,
    #[error("malformed signature: {0}")]
    Malformed(#[from] CodecError),
    #[error(transparent)]
    Instance(#[from] McpkpError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Sharing(#[from] SharingError),
}

/// Constraint degree of the MPC check.
pub const DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigParams {
    pub base: ParamSet,
    /// Number of parties N.
    pub parties: usize,
    pub tau: usize,
    /// Parallel checks in base-field units; ρ/η checks run over GF(q^η).
    pub rho: usize,
    pub eta: u32,
    pub d: usize,
    /// Soundness requirements waived (reduced test profiles).
    pub insecure: bool,
}

/// Smallest ρ that is a multiple of lcm(2, η) with ρ·log2(q) ≥ λ.
pub fn default_rho(base: &ParamSet, eta: u32) -> usize {
    let step = if eta.is_multiple_of(2) { eta as usize } else { 2 * eta as usize };
    let bits = base.elem_bits();
    let mut rho = step;
    while rho * bits < base.lambda {
        rho += step;
    }
    rho
}

impl SigParams {
    pub fn new(base: &ParamSet, parties: usize, tau: usize, rho: Option<usize>) -> Result<SigParams, SignError> {
        let sp = SigParams::unchecked(base, parties, tau, rho, false)?;
        sp.validate()?;
        Ok(sp)
    }

    /// Reduced-cost parameters that skip the λ-bit soundness requirements.
    pub fn insecure(base: &ParamSet, parties: usize, tau: usize, rho: Option<usize>) -> Result<SigParams, SignError> {
        let sp = SigParams::unchecked(base, parties, tau, rho, true)?;
        sp.validate()?;
        Ok(sp)
    }

    fn unchecked(
        base: &ParamSet,
        parties: usize,
        tau: usize,
        rho: Option<usize>,
        insecure: bool,
    ) -> Result<SigParams, SignError> {
        base.validate()?;
        if !base.field().is_binary() {
            return Err(SignError::Params("signing needs a binary base field".into()));
        }
        let eta = ExtField::minimal_degree(&base.field(), parties);
        let rho = rho.unwrap_or_else(|| default_rho(base, eta));
        Ok(SigParams { base: base.clone(), parties, tau, rho, eta, d: DEGREE, insecure })
    }

    /// N = 256 with the tabulated τ for the preset levels, raised if needed
    /// to the smallest τ whose forgery cost reaches λ.
    pub fn fast(base: &ParamSet) -> Result<SigParams, SignError> {
        let min = minimal_tau(base, 256, None)?;
        let tau = match base.lambda {
            128 => 20,
            192 => 30,
            256 => 39,
            _ => min,
        };
        SigParams::new(base, 256, tau.max(min), None)
    }

    /// N = 2048 with the smallest τ whose forgery cost reaches λ, no grinding.
    pub fn short(base: &ParamSet) -> Result<SigParams, SignError> {
        SigParams::new(base, 2048, minimal_tau(base, 2048, None)?, None)
    }

    pub fn validate(&self) -> Result<(), SignError> {
        let bad = |s: String| Err(SignError::Params(s));
        if self.parties < 2 || !self.parties.is_power_of_two() || self.parties > 1 << 16 {
            return bad(format!("N = {} must be a power of two in [2, 65536]", self.parties));
        }
        if self.tau == 0 || self.tau > u16::MAX as usize {
            return bad(format!("tau = {} out of range", self.tau));
        }
        let q = self.base.q as u64;
        if (self.parties as u64) >= q.pow(self.eta) {
            return bad(format!("N = {} needs q^eta > N", self.parties));
        }
        if self.rho == 0 || !self.rho.is_multiple_of(self.eta as usize) {
            return bad(format!("rho = {} is not a positive multiple of eta = {}", self.rho, self.eta));
        }
        if self.insecure {
            return Ok(());
        }
        if !self.rho.is_multiple_of(2) {
            return bad(format!("rho = {} must be even", self.rho));
        }
        let lambda = self.base.lambda as f64;
        if self.rho as f64 * self.base.log2q() < lambda {
            return bad(format!("q^rho = 2^{} < 2^lambda", self.rho as f64 * self.base.log2q()));
        }
        if self.parties <= self.d {
            return bad(format!("N = {} gives per-round soundness error 1", self.parties));
        }
        let tree_bits = self.tau as f64 * (self.parties as f64 / self.d as f64).log2();
        if tree_bits < lambda {
            return bad(format!("(d/N)^tau = 2^-{tree_bits:.1} exceeds 2^-lambda"));
        }
        let forgery = soundness_check(self).forgery_bits;
        if forgery < lambda {
            return bad(format!("forgery cost 2^{forgery:.1} below 2^lambda"));
        }
        Ok(())
    }

    pub fn checks(&self) -> usize {
        self.rho / self.eta as usize
    }

    pub fn ext_field(&self) -> Result<ExtField, SignError> {
        ExtField::new(&self.base.field(), self.eta).map_err(|e| SignError::Params(e.to_string()))
    }

    pub fn depth(&self) -> usize {
        self.parties.trailing_zeros() as usize
    }

    /// |x| in bits: the witness offset (m² + n² field elements).
    pub fn witness_bits(&self) -> usize {
        (self.base.m * self.base.m + self.base.n * self.base.n) * self.base.elem_bits()
    }

    /// Exact bit length of an encoded signature.
    pub fn signature_bits(&self) -> usize {
        let lambda = self.base.lambda;
        let per_rep =
            self.witness_bits() + (self.d - 1) * self.rho * self.base.elem_bits() + 2 * lambda + lambda * self.depth();
        4 * lambda + self.tau * per_rep
    }

    pub fn signature_bytes(&self) -> usize {
        self.signature_bits().div_ceil(8)
    }
}

/// Smallest τ for which [`soundness_check`] reaches λ bits.
pub fn minimal_tau(base: &ParamSet, parties: usize, rho: Option<usize>) -> Result<usize, SignError> {
    let mut sp = SigParams::unchecked(base, parties, 1, rho, false)?;
    let per = (parties as f64 / DEGREE as f64).log2();
    if per <= 0.0 {
        return Err(SignError::Params(format!("N = {parties} gives per-round soundness error 1")));
    }
    sp.tau = (base.lambda as f64 / per).ceil() as usize;
    while !soundness_check(&sp).meets_lambda {
        if sp.tau >= 4 * base.lambda {
            return Err(SignError::Params("no tau reaches the security level".into()));
        }
        sp.tau += 1;
    }
    Ok(sp.tau)
}

/// One repetition of the proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepProof {
    /// Δx for A then B, m² + n² base-field elements.
    pub delta: Vec<u8>,
    /// X² coefficient of α, one per check.
    pub alpha_top: Vec<Ext>,
    pub commitment: Vec<u8>,
    pub copath: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub salt: Vec<u8>,
    pub h2: Vec<u8>,
    pub reps: Vec<RepProof>,
}

impl Signature {
    pub fn to_bytes(&self, sp: &SigParams) -> Vec<u8> {
        let bits = sp.base.elem_bits() as u32;
        let ext_bits = bits * sp.eta;
        let mut w = BitWriter::new();
        w.write_bytes(&self.salt);
        w.write_bytes(&self.h2);
        for rep in &self.reps {
            for &v in &rep.delta {
                w.write(v as u32, bits);
            }
            for a in &rep.alpha_top {
                w.write(a.0, ext_bits);
            }
            w.write_bytes(&rep.commitment);
            for seed in &rep.copath {
                w.write_bytes(seed);
            }
        }
        debug_assert_eq!(w.bit_len(), sp.signature_bits());
        w.finish()
    }

    /// Parses a signature; the total length is checked before anything else.
    pub fn from_bytes(bytes: &[u8], sp: &SigParams) -> Result<Signature, SignError> {
        let expected = sp.signature_bytes();
        if bytes.len() < expected {
            return Err(CodecError::Truncated.into());
        }
        if bytes.len() > expected {
            return Err(CodecError::TrailingData.into());
        }
        let lam = sp.base.lambda / 8;
        let bits = sp.base.elem_bits() as u32;
        let order = sp.base.q;
        let wlen = sp.base.m * sp.base.m + sp.base.n * sp.base.n;
        let mut r = BitReader::new(bytes);
        let salt = r.read_bytes(2 * lam)?;
        let h2 = r.read_bytes(2 * lam)?;
        let mut reps = Vec::with_capacity(sp.tau);
        for _ in 0..sp.tau {
            let delta = (0..wlen)
                .map(|_| {
                    let v = r.read(bits)?;
                    if v >= order {
                        return Err(CodecError::OutOfRange { value: v, order: order as usize });
                    }
                    Ok(v as u8)
                })
                .collect::<Result<Vec<u8>, CodecError>>()?;
            let alpha_top = (0..sp.checks()).map(|_| r.read(bits * sp.eta).map(Ext)).collect::<Result<_, _>>()?;
            let commitment = r.read_bytes(2 * lam)?;
            let copath = (0..sp.depth()).map(|_| r.read_bytes(lam)).collect::<Result<_, _>>()?;
            reps.push(RepProof { delta, alpha_top, commitment, copath });
        }
        r.finish()?;
        Ok(Signature { salt, h2, reps })
    }
}

/// Pseudorandom contribution of one leaf.
struct Leaf {
    ua: Vec<u8>,
    ub: Vec<u8>,
    uv: Vec<Ext>,
}

struct Setup {
    ext: ExtField,
    points: Arc<EvalPoints>,
    ctx: MpcContext,
    pk_bytes: Vec<u8>,
    /// 1/e_j for every party.
    inv_points: Vec<Ext>,
}

impl Setup {
    fn new(pk: &McpkpInstance, sp: &SigParams) -> Result<Setup, SignError> {
        sp.validate()?;
        if pk.params != sp.base {
            return Err(SignError::Params("public key and signature parameters disagree".into()));
        }
        let ext = sp.ext_field()?;
        let points = Arc::new(EvalPoints::new(&ext, sp.parties)?);
        let ctx = MpcContext::new(pk, &ext)?;
        let inv_points = points.points.iter().map(|&e| ext.inv(e).expect("non-zero point")).collect();
        Ok(Setup { ext, points, ctx, pk_bytes: pk.to_bytes(), inv_points })
    }
}

fn expand_leaf(sp: &SigParams, ext: &ExtField, salt: &[u8], rep: usize, j: usize, seed: &[u8]) -> Leaf {
    let f = sp.base.field();
    let mut rng = Hasher::new(TAG_EXPAND)
        .absorb(b"leaf")
        .absorb(salt)
        .absorb_u16(rep as u16)
        .absorb_u32(j as u32)
        .absorb(seed)
        .clone()
        .into_rng();
    let ua = (0..sp.base.m * sp.base.m).map(|_| f.sample(&mut rng)).collect();
    let ub = (0..sp.base.n * sp.base.n).map(|_| f.sample(&mut rng)).collect();
    let uv = (0..sp.checks()).map(|_| ext.sample(&mut rng)).collect();
    Leaf { ua, ub, uv }
}

fn leaf_commitment(sp: &SigParams, salt: &[u8], rep: usize, j: usize, seed: &[u8]) -> Vec<u8> {
    commit(sp.base.lambda, salt, &[rep as u32, j as u32], seed).0
}

fn hash_h1(
    sp: &SigParams,
    setup: &Setup,
    salt: &[u8],
    msg: &[u8],
    deltas: &[&[u8]],
    commitments: &[Vec<Vec<u8>>],
) -> Vec<u8> {
    let mut h = Hasher::new(TAG_CHALLENGE1);
    h.absorb(&[0]).absorb(&setup.pk_bytes).absorb(salt).absorb_u64(msg.len() as u64).absorb(msg);
    let bits = sp.base.elem_bits() as u32;
    for (delta, coms) in deltas.iter().zip(commitments) {
        h.absorb(&codec::pack(delta, bits));
        for c in coms {
            h.absorb(c);
        }
    }
    h.digest(2 * sp.base.lambda / 8)
}

fn derive_gammas(sp: &SigParams, setup: &Setup, h1: &[u8]) -> Vec<Challenge> {
    let mut rng = Hasher::new(TAG_CHALLENGE1).absorb(&[1]).absorb(h1).clone().into_rng();
    let count = setup.ctx.num_constraints();
    (0..sp.tau).map(|_| Challenge::random_ext(&setup.ext, sp.checks(), count, &mut rng)).collect()
}

fn hash_h2(sp: &SigParams, h1: &[u8], alphas: &[Vec<(Ext, Ext)>]) -> Vec<u8> {
    let mut h = Hasher::new(TAG_CHALLENGE2);
    h.absorb(&[0]).absorb(h1);
    for rep in alphas {
        for (a1, a2) in rep {
            h.absorb_u32(a1.0).absorb_u32(a2.0);
        }
    }
    h.digest(2 * sp.base.lambda / 8)
}

/// Hidden party per repetition, rejection-sampled from h2.
pub fn hidden_parties(sp: &SigParams, h2: &[u8]) -> Vec<usize> {
    let mut rng: XofRng = Hasher::new(TAG_CHALLENGE2).absorb(&[1]).absorb(h2).clone().into_rng();
    (0..sp.tau).map(|_| index_below(&mut rng, sp.parties)).collect()
}

fn index_below(rng: &mut XofRng, bound: usize) -> usize {
    if bound <= u16::MAX as usize {
        return rng.read_u16_below(bound as u16) as usize;
    }
    // bound = 65536
    (rng.next_u32() & 0xffff) as usize
}

/// Prover-side data of one repetition before the second challenge.
struct RepWitness {
    tree: SeedTree,
    commitments: Vec<Vec<u8>>,
    delta: Vec<u8>,
    /// Linear coefficients of P_A, P_B: P(X) = x − X·R.
    ra: Vec<Ext>,
    rb: Vec<Ext>,
    /// v(X) = X·sv − X²·tv.
    sv: Vec<Ext>,
    tv: Vec<Ext>,
}

fn prepare_rep(
    sp: &SigParams,
    setup: &Setup,
    sk: &Witness,
    salt: &[u8],
    rep: usize,
    root: &[u8],
) -> Result<RepWitness, SignError> {
    let ext = &setup.ext;
    let tree = SeedTree::expand(root, sp.parties, salt, rep as u16)?;
    let (m2, n2, c) = (sp.base.m * sp.base.m, sp.base.n * sp.base.n, sp.checks());
    let f = sp.base.field();
    let mut sa = vec![0u8; m2];
    let mut sb = vec![0u8; n2];
    let mut ra = vec![Ext::ZERO; m2];
    let mut rb = vec![Ext::ZERO; n2];
    let mut sv = vec![Ext::ZERO; c];
    let mut tv = vec![Ext::ZERO; c];
    let mut commitments = Vec::with_capacity(sp.parties);
    for j in 0..sp.parties {
        let seed = tree.leaf(j);
        commitments.push(leaf_commitment(sp, salt, rep, j, seed));
        let leaf = expand_leaf(sp, ext, salt, rep, j, seed);
        let inv = setup.inv_points[j];
        for (i, &u) in leaf.ua.iter().enumerate() {
            sa[i] = f.add(sa[i], u);
            ra[i] = ext.add(ra[i], ext.scale(inv, u));
        }
        for (i, &u) in leaf.ub.iter().enumerate() {
            sb[i] = f.add(sb[i], u);
            rb[i] = ext.add(rb[i], ext.scale(inv, u));
        }
        for (i, &u) in leaf.uv.iter().enumerate() {
            sv[i] = ext.add(sv[i], u);
            tv[i] = ext.add(tv[i], ext.mul(u, inv));
        }
    }
    let mut delta: Vec<u8> = sk.a.data().iter().zip(&sa).map(|(&x, &s)| f.sub(x, s)).collect();
    delta.extend(sk.b.data().iter().zip(&sb).map(|(&x, &s)| f.sub(x, s)));
    Ok(RepWitness { tree, commitments, delta, ra, rb, sv, tv })
}

impl RepWitness {
    /// Shares of (A, B, v) at the point x.
    fn shares_at(&self, ext: &ExtField, sk: &Witness, x: Ext) -> (Vec<Ext>, Vec<Ext>, Vec<Ext>) {
        let lin = |secret: &[u8], r: &[Ext]| -> Vec<Ext> {
            secret.iter().zip(r).map(|(&s, &ri)| ext.sub(ext.embed(s), ext.mul(x, ri))).collect()
        };
        let x2 = ext.mul(x, x);
        let v = self.sv.iter().zip(&self.tv).map(|(&s, &t)| ext.sub(ext.mul(x, s), ext.mul(x2, t))).collect();
        (lin(sk.a.data(), &self.ra), lin(sk.b.data(), &self.rb), v)
    }
}

/// α(X) = a1·X + a2·X² recovered from evaluations at 1 and t = 2.
fn alpha_coefficients(
    setup: &Setup,
    rep: &RepWitness,
    sk: &Witness,
    ch: &Challenge,
) -> Result<Vec<(Ext, Ext)>, SignError> {
    let ext = &setup.ext;
    let t = Ext(2);
    let (a1s, b1s, v1s) = rep.shares_at(ext, sk, Ext::ONE);
    let (ats, bts, vts) = rep.shares_at(ext, sk, t);
    let alpha1 = setup.ctx.alpha_at(&a1s, &b1s, &v1s, ch)?;
    let alphat = setup.ctx.alpha_at(&ats, &bts, &vts, ch)?;
    let den_inv = ext.inv(ext.sub(ext.mul(t, t), t)).expect("t^2 != t");
    Ok(alpha1
        .iter()
        .zip(&alphat)
        .map(|(&y1, &yt)| {
            let a2 = ext.mul(ext.sub(yt, ext.mul(t, y1)), den_inv);
            (ext.sub(y1, a2), a2)
        })
        .collect())
}

/// Signs `msg`; randomness (salt and tree roots) comes from `rng`.
pub fn sign<R: RngCore + CryptoRng>(
    sk: &Witness,
    pk: &McpkpInstance,
    msg: &[u8],
    sp: &SigParams,
    rng: &mut R,
) -> Result<Signature, SignError> {
    let setup = Setup::new(pk, sp)?;
    if !verify_witness(pk, sk)? {
        return Err(SignError::InvalidWitness);
    }
    let lam = sp.base.lambda / 8;
    let mut salt = vec![0u8; 2 * lam];
    rng.fill_bytes(&mut salt);
    let roots: Vec<Vec<u8>> = (0..sp.tau)
        .map(|_| {
            let mut r = vec![0u8; lam];
            rng.fill_bytes(&mut r);
            r
        })
        .collect();

    let reps: Vec<RepWitness> = roots
        .par_iter()
        .enumerate()
        .map(|(e, root)| prepare_rep(sp, &setup, sk, &salt, e, root))
        .collect::<Result<_, _>>()?;

    let deltas: Vec<&[u8]> = reps.iter().map(|r| r.delta.as_slice()).collect();
    let coms: Vec<Vec<Vec<u8>>> = reps.iter().map(|r| r.commitments.clone()).collect();
    let h1 = hash_h1(sp, &setup, &salt, msg, &deltas, &coms);
    let gammas = derive_gammas(sp, &setup, &h1);

    let alphas: Vec<Vec<(Ext, Ext)>> = reps
        .par_iter()
        .zip(&gammas)
        .map(|(rep, ch)| alpha_coefficients(&setup, rep, sk, ch))
        .collect::<Result<_, _>>()?;
    let h2 = hash_h2(sp, &h1, &alphas);
    let hidden = hidden_parties(sp, &h2);

    let proofs = reps
        .into_iter()
        .zip(alphas)
        .zip(hidden)
        .map(|((rep, alpha), i)| {
            Ok(RepProof {
                delta: rep.delta,
                alpha_top: alpha.iter().map(|&(_, a2)| a2).collect(),
                commitment: rep.commitments[i].clone(),
                copath: rep.tree.open(i)?,
            })
        })
        .collect::<Result<Vec<_>, SignError>>()?;
    Ok(Signature { salt, h2, reps: proofs })
}

/// Deterministic signing: the randomness is derived from the secret seed and
/// the message, so equal inputs give byte-identical signatures.
pub fn sign_deterministic(
    sk: &Witness,
    pk: &McpkpInstance,
    msg: &[u8],
    sp: &SigParams,
) -> Result<Signature, SignError> {
    let seed: [u8; 32] = Hasher::new(TAG_EXPAND)
        .absorb(b"sign")
        .absorb(&sk.seed)
        .absorb_u64(msg.len() as u64)
        .absorb(msg)
        .clone()
        .digest(32)
        .try_into()
        .expect("32 bytes");
    sign(sk, pk, msg, sp, &mut ChaCha20Rng::from_seed(seed))
}

/// Verifier-side view of one repetition after regenerating the open leaves.
struct RepCheck {
    commitments: Vec<Vec<u8>>,
    /// Shares of A, B and v of the hidden party.
    a: Vec<Ext>,
    b: Vec<Ext>,
    v: Vec<Ext>,
}

fn regenerate_rep(
    sp: &SigParams,
    setup: &Setup,
    salt: &[u8],
    rep_idx: usize,
    rep: &RepProof,
    hidden: usize,
) -> Result<RepCheck, SignError> {
    let ext = &setup.ext;
    let leaves = SeedTree::from_copath(&rep.copath, hidden, sp.parties, salt, rep_idx as u16)?;
    let (m2, n2) = (sp.base.m * sp.base.m, sp.base.n * sp.base.n);
    let e_star = setup.points.points[hidden];
    let mut a: Vec<Ext> = rep.delta[..m2].iter().map(|&d| ext.embed(d)).collect();
    let mut b: Vec<Ext> = rep.delta[m2..].iter().map(|&d| ext.embed(d)).collect();
    let mut v = vec![Ext::ZERO; sp.checks()];
    debug_assert_eq!(b.len(), n2);
    let mut commitments = Vec::with_capacity(sp.parties);
    for (j, seed) in leaves.iter().enumerate() {
        let Some(seed) = seed else {
            debug_assert_eq!(j, hidden);
            commitments.push(rep.commitment.clone());
            continue;
        };
        commitments.push(leaf_commitment(sp, salt, rep_idx, j, seed));
        let leaf = expand_leaf(sp, ext, salt, rep_idx, j, seed);
        // 1 − e*/e_j
        let c = ext.sub(Ext::ONE, ext.mul(e_star, setup.inv_points[j]));
        for (x, &u) in a.iter_mut().zip(&leaf.ua) {
            *x = ext.add(*x, ext.scale(c, u));
        }
        for (x, &u) in b.iter_mut().zip(&leaf.ub) {
            *x = ext.add(*x, ext.scale(c, u));
        }
        for (x, &u) in v.iter_mut().zip(&leaf.uv) {
            *x = ext.add(*x, ext.mul(c, u));
        }
    }
    for x in v.iter_mut() {
        *x = ext.mul(*x, e_star);
    }
    Ok(RepCheck { commitments, a, b, v })
}

/// Verifies a parsed signature.
pub fn verify(pk: &McpkpInstance, msg: &[u8], sig: &Signature, sp: &SigParams) -> Result<bool, SignError> {
    let setup = Setup::new(pk, sp)?;
    let lam = sp.base.lambda / 8;
    let wlen = sp.base.m * sp.base.m + sp.base.n * sp.base.n;
    let shape_ok = sig.salt.len() == 2 * lam
        && sig.h2.len() == 2 * lam
        && sig.reps.len() == sp.tau
        && sig.reps.iter().all(|r| {
            r.delta.len() == wlen
                && r.alpha_top.len() == sp.checks()
                && r.alpha_top.iter().all(|a| setup.ext.contains(*a))
                && r.commitment.len() == 2 * lam
                && r.copath.len() == sp.depth()
                && r.copath.iter().all(|s| s.len() == lam)
                && r.delta.iter().all(|&d| (d as u32) < sp.base.q)
        });
    if !shape_ok {
        return Err(CodecError::BadHeader.into());
    }
    let hidden = hidden_parties(sp, &sig.h2);
    let checks: Vec<RepCheck> = sig
        .reps
        .par_iter()
        .enumerate()
        .map(|(e, rep)| regenerate_rep(sp, &setup, &sig.salt, e, rep, hidden[e]))
        .collect::<Result<_, _>>()?;
    let deltas: Vec<&[u8]> = sig.reps.iter().map(|r| r.delta.as_slice()).collect();
    let coms: Vec<Vec<Vec<u8>>> = checks.iter().map(|c| c.commitments.clone()).collect();
    let h1 = hash_h1(sp, &setup, &sig.salt, msg, &deltas, &coms);
    let gammas = derive_gammas(sp, &setup, &h1);
    let ext = &setup.ext;
    let alphas: Vec<Vec<(Ext, Ext)>> = checks
        .par_iter()
        .zip(&gammas)
        .zip(&sig.reps)
        .zip(&hidden)
        .map(|(((c, ch), rep), &i)| {
            let e = setup.points.points[i];
            let at = setup.ctx.alpha_at(&c.a, &c.b, &c.v, ch)?;
            let e2 = ext.mul(e, e);
            let inv_e = setup.inv_points[i];
            Ok(at
                .iter()
                .zip(&rep.alpha_top)
                .map(|(&y, &a2)| (ext.mul(ext.sub(y, ext.mul(a2, e2)), inv_e), a2))
                .collect())
        })
        .collect::<Result<_, SignError>>()?;
    Ok(hash_h2(sp, &h1, &alphas) == sig.h2)
}

/// Parses and verifies; `Err` means malformed input, `Ok(false)` a rejection.
pub fn verify_bytes(pk: &McpkpInstance, msg: &[u8], bytes: &[u8], sp: &SigParams) -> Result<bool, SignError> {
    let sig = Signature::from_bytes(bytes, sp)?;
    verify(pk, msg, &sig, sp)
}

/// Soundness summary of a parameter choice.
#[derive(Debug, Clone)]
pub struct SoundnessReport {
    /// log2 of q^−ρ, the false-positive probability of the ρ checks.
    pub log2_false_positive: f64,
    /// log2 of d/N.
    pub log2_tree_term: f64,
    /// log2 of q^−ρ + (1 − q^−ρ)·d/N.
    pub log2_round_error: f64,
    /// Bits of work of the best forgery splitting the τ rounds between
    /// guessing the first and the second challenge.
    pub forgery_bits: f64,
    pub lambda: usize,
    /// False when a single round is sound with probability 1 (N ≤ d).
    pub valid: bool,
    pub meets_lambda: bool,
}

fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

fn log2_binom(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2()).sum()
}

pub fn soundness_check(sp: &SigParams) -> SoundnessReport {
    let p_log = -(sp.rho as f64) * sp.base.log2q();
    let tree = (sp.d as f64 / sp.parties as f64).log2();
    let p = p_log.exp2();
    let round = log2_add(p_log, (1.0 - p).log2() + tree);
    let valid = sp.parties > sp.d;
    let tau = sp.tau;
    let log1mp = (-p).ln_1p() / std::f64::consts::LN_2;
    let forgery_bits = if !valid {
        0.0
    } else {
        (0..=tau)
            .map(|t1| {
                let tail = (t1..=tau).fold(f64::NEG_INFINITY, |acc, i| {
                    log2_add(acc, log2_binom(tau, i) + i as f64 * p_log + (tau - i) as f64 * log1mp)
                });
                log2_add(-tail, (tau - t1) as f64 * -tree)
            })
            .fold(f64::INFINITY, f64::min)
    };
    SoundnessReport {
        log2_false_positive: p_log,
        log2_tree_term: tree,
        log2_round_error: round,
        forgery_bits,
        lambda: sp.base.lambda,
        valid,
        meets_lambda: valid && forgery_bits >= sp.base.lambda as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcpkp::keygen;

    fn small() -> (McpkpInstance, Witness, SigParams) {
        let p = ParamSet::ia();
        let (pk, sk) = keygen(&p, b"sign-tests").unwrap();
        let sp = SigParams::insecure(&p, 16, 3, Some(22)).unwrap();
        (pk, sk, sp)
    }

    #[test]
    fn default_rho_values() {
        for (p, rho) in ParamSet::presets().iter().zip([22, 20, 32, 44]) {
            assert_eq!(default_rho(p, 2), rho, "{}", p.name);
            assert_eq!(SigParams::fast(p).unwrap().rho, rho);
        }
    }

    #[test]
    fn params_validation() {
        let p = ParamSet::ia();
        assert!(SigParams::new(&p, 256, 20, Some(22)).is_ok());
        assert!(SigParams::new(&p, 256, 20, Some(21)).is_err());
        assert!(SigParams::new(&p, 256, 20, Some(20)).is_err());
        assert!(SigParams::new(&p, 256, 18, Some(22)).is_err());
        assert!(SigParams::new(&p, 200, 20, Some(22)).is_err());
        assert!(SigParams::new(&p, 2, 200, Some(22)).is_err());
        assert!(SigParams::insecure(&p, 16, 2, Some(2)).is_ok());
        assert_eq!(SigParams::short(&p).unwrap().tau, 13);
        // ρ·log2 q = λ exactly, so splitting rounds between challenges costs one repetition
        assert_eq!(SigParams::short(&ParamSet::iii()).unwrap().tau, 21);
        assert!(SigParams::new(&ParamSet::iii(), 2048, 20, None).is_err());
    }

    #[test]
    fn size_formula() {
        let sp = SigParams::new(&ParamSet::ia(), 256, 20, Some(22)).unwrap();
        assert_eq!(sp.signature_bits(), 512 + 20 * (1728 + 132 + 256 + 1024));
        assert_eq!(sp.signature_bytes(), 7914);
    }

    #[test]
    fn roundtrip_and_tamper() {
        let (pk, sk, sp) = small();
        let sig = sign_deterministic(&sk, &pk, b"hello", &sp).unwrap();
        assert!(verify(&pk, b"hello", &sig, &sp).unwrap());
        assert!(!verify(&pk, b"hellp", &sig, &sp).unwrap());
        let bytes = sig.to_bytes(&sp);
        assert_eq!(bytes.len(), sp.signature_bytes());
        assert_eq!(Signature::from_bytes(&bytes, &sp).unwrap(), sig);
        assert_eq!(sign_deterministic(&sk, &pk, b"hello", &sp).unwrap(), sig);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let other = sign(&sk, &pk, b"hello", &sp, &mut rng).unwrap();
        assert_ne!(other, sig);
        assert!(verify(&pk, b"hello", &other, &sp).unwrap());
        assert!(verify_bytes(&pk, b"hello", &bytes[..bytes.len() - 1], &sp).is_err());
        for bit in [0usize, 300, 257 * 8 + 3, bytes.len() * 8 - 20] {
            let mut t = bytes.clone();
            t[bit / 8] ^= 1 << (bit % 8);
            assert!(!matches!(verify_bytes(&pk, b"hello", &t, &sp), Ok(true)), "bit {bit}");
        }
    }

    #[test]
    fn invalid_witness_refused() {
        let (pk, mut sk, sp) = small();
        sk.a = sk.a.scale(2);
        assert_eq!(sign_deterministic(&sk, &pk, b"m", &sp), Err(SignError::InvalidWitness));
    }

    #[test]
    fn hidden_share_matches_prover_polynomial() {
        let (pk, sk, sp) = small();
        let setup = Setup::new(&pk, &sp).unwrap();
        let salt = vec![3u8; 32];
        let rep = prepare_rep(&sp, &setup, &sk, &salt, 1, &[9u8; 16]).unwrap();
        for hidden in [0usize, 5, 15] {
            let proof = RepProof {
                delta: rep.delta.clone(),
                alpha_top: vec![Ext::ZERO; sp.checks()],
                commitment: rep.commitments[hidden].clone(),
                copath: rep.tree.open(hidden).unwrap(),
            };
            let check = regenerate_rep(&sp, &setup, &salt, 1, &proof, hidden).unwrap();
            let (a, b, v) = rep.shares_at(&setup.ext, &sk, setup.points.points[hidden]);
            assert_eq!((check.a, check.b, check.v), (a, b, v));
            assert_eq!(check.commitments, rep.commitments);
        }
    }

    #[test]
    fn soundness_reports() {
        let sp = SigParams::new(&ParamSet::ia(), 256, 20, Some(22)).unwrap();
        let r = soundness_check(&sp);
        assert!(r.meets_lambda && r.forgery_bits >= 128.0, "{r:?}");
        assert_eq!(r.log2_tree_term, -7.0);
        let deg = SigParams::insecure(&ParamSet::ia(), 2, 20, Some(22)).unwrap();
        let r2 = soundness_check(&deg);
        assert!(!r2.valid && !r2.meets_lambda);
        assert!(r2.log2_round_error.abs() < 1e-12);
        let doubled = SigParams::new(&ParamSet::ia(), 512, 20, Some(22)).unwrap();
        assert_eq!(soundness_check(&doubled).log2_tree_term, r.log2_tree_term - 1.0);
    }
}
