//! The degree-2 MPC check that a shared (A, B) satisfies G′(Aᵀ⊗B)Hᵀ = Y.
//!
//! Each party holds degree-1 shares of A and B and a degree-2 share of v = 0.
//! Locally it computes f = G′(Aᵀ⊗B)Hᵀ − Y (a degree-2 share of the k′(mn−k)
//! constraint values) and, for every check, α = v + Σ_j γ_j f_j. Opening α
//! gives zero for an honest witness.

use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::gf::{Ext, ExtField, Field};
use crate::matcode::Matrix;
use crate::mcpkp::{keygen, McpkpError, McpkpInstance, ParamSet, Witness};
use crate::sharing::{reconstruct, EvalPoints, ShamirSharing, SharingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpcError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error(transparent)]
    Instance(#[from] McpkpError),
}

/// Public data each party needs, laid out for the local computation.
#[derive(Debug, Clone)]
pub struct MpcContext {
    pub ext: ExtField,
    pub m: usize,
    pub n: usize,
    pub kp: usize,
    /// Number of parity rows mn − k.
    pub r: usize,
    gprime: Matrix,
    ht: Matrix,
    y: Vec<Ext>,
}

/// Per check, k′(mn−k) coefficients γ_j in GF(q^η), ordered as vec_row of the
/// k′ × (mn−k) constraint matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    pub gammas: Vec<Vec<Ext>>,
}

impl Challenge {
    /// Base-field challenges, embedded into the extension.
    pub fn from_base(gammas: &[Vec<u8>]) -> Challenge {
        Challenge { gammas: gammas.iter().map(|g| g.iter().map(|&x| Ext(x as u32)).collect()).collect() }
    }

    pub fn random_base<R: RngCore + ?Sized>(field: &Field, checks: usize, count: usize, rng: &mut R) -> Challenge {
        Challenge { gammas: (0..checks).map(|_| (0..count).map(|_| Ext(field.sample(rng) as u32)).collect()).collect() }
    }

    pub fn random_ext<R: RngCore + ?Sized>(ext: &ExtField, checks: usize, count: usize, rng: &mut R) -> Challenge {
        Challenge { gammas: (0..checks).map(|_| (0..count).map(|_| ext.sample(rng)).collect()).collect() }
    }

    pub fn checks(&self) -> usize {
        self.gammas.len()
    }
}

/// Sharings handed to the parties.
#[derive(Debug, Clone)]
pub struct MpcInput {
    pub a: ShamirSharing,
    pub b: ShamirSharing,
    pub v: ShamirSharing,
}

impl MpcInput {
    /// Fresh sharings of (A, B) of degree 1 and of `checks` zeros of degree 2.
    pub fn share<R: RngCore + ?Sized>(
        a: &Matrix,
        b: &Matrix,
        checks: usize,
        points: &Arc<EvalPoints>,
        rng: &mut R,
    ) -> Result<MpcInput, MpcError> {
        Ok(MpcInput {
            a: ShamirSharing::share(a.data(), 1, points, rng)?,
            b: ShamirSharing::share(b.data(), 1, points, rng)?,
            v: ShamirSharing::share(&vec![0u8; checks], 2, points, rng)?,
        })
    }
}

/// One party's share of α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaShare {
    pub party: usize,
    pub degree: usize,
    pub value: Vec<Ext>,
}

/// `out[i][j] += Σ_t x[i][t] · base[t][j]` with x over GF(q^η).
fn ext_times_base(ext: &ExtField, x: &[Ext], rows: usize, base: &Matrix, out: &mut [Ext]) {
    let inner = base.rows();
    let cols = base.cols();
    let f = ext.base();
    let eta = ext.degree();
    let w = f.bits();
    for i in 0..rows {
        let acc = &mut out[i * cols..(i + 1) * cols];
        for t in 0..inner {
            let a = x[i * inner + t];
            if a.is_zero() {
                continue;
            }
            let brow = base.row(t);
            if eta == 1 {
                let row = f.mul_row(a.0 as u8);
                for (o, &b) in acc.iter_mut().zip(brow) {
                    o.0 ^= row[b as usize] as u32;
                }
                continue;
            }
            for c in 0..eta {
                let coeff = ext.coeff(a, c);
                if coeff == 0 {
                    continue;
                }
                let row = f.mul_row(coeff);
                let shift = c * w;
                for (o, &b) in acc.iter_mut().zip(brow) {
                    o.0 ^= (row[b as usize] as u32) << shift;
                }
            }
        }
    }
}

impl MpcContext {
    pub fn new(inst: &McpkpInstance, ext: &ExtField) -> Result<MpcContext, MpcError> {
        let p = &inst.params;
        if ext.base() != inst.h.field() || !ext.base().is_binary() {
            return Err(MpcError::Shape("extension field does not extend the instance field".into()));
        }
        Ok(MpcContext {
            ext: ext.clone(),
            m: p.m,
            n: p.n,
            kp: p.kp,
            r: p.mn() - p.k,
            gprime: inst.gprime.clone(),
            ht: inst.h.transpose(),
            y: inst.y.data().iter().map(|&v| Ext(v as u32)).collect(),
        })
    }

    pub fn num_constraints(&self) -> usize {
        self.kp * self.r
    }

    /// Steps 4–5: the party's share of f = vec_row(G′(Aᵀ⊗B)Hᵀ − Y).
    pub fn constraint_values(&self, a: &[Ext], b: &[Ext]) -> Result<Vec<Ext>, MpcError> {
        let (m, n) = (self.m, self.n);
        if a.len() != m * m || b.len() != n * n {
            return Err(MpcError::Shape(format!("share lengths {} and {}", a.len(), b.len())));
        }
        let ext = &self.ext;
        let mut w = vec![Ext::ZERO; self.kp * m * n];
        let mut am = vec![Ext::ZERO; m * n];
        for l in 0..self.kp {
            let ml = Matrix::from_vec(self.gprime.field(), m, n, self.gprime.row(l).to_vec())
                .expect("row reshapes to m x n");
            am.iter_mut().for_each(|v| *v = Ext::ZERO);
            ext_times_base(ext, a, m, &ml, &mut am);
            // (A·M_l)·B
            let wl = &mut w[l * m * n..(l + 1) * m * n];
            for i in 0..m {
                for t in 0..n {
                    let x = am[i * n + t];
                    if x.is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        wl[i * n + j] = ext.add(wl[i * n + j], ext.mul(x, b[t * n + j]));
                    }
                }
            }
        }
        let mut f = vec![Ext::ZERO; self.kp * self.r];
        ext_times_base(ext, &w, self.kp, &self.ht, &mut f);
        for (v, &y) in f.iter_mut().zip(&self.y) {
            *v = ext.sub(*v, y);
        }
        Ok(f)
    }

    /// Step 6: α = v + Σ_j γ_j f_j for every check.
    pub fn combine_alpha(&self, f: &[Ext], v: &[Ext], ch: &Challenge) -> Result<Vec<Ext>, MpcError> {
        if v.len() != ch.checks() {
            return Err(MpcError::Shape(format!("{} v shares for {} checks", v.len(), ch.checks())));
        }
        let ext = &self.ext;
        ch.gammas
            .iter()
            .zip(v)
            .map(|(g, &vi)| {
                if g.len() != f.len() {
                    return Err(MpcError::Shape(format!("{} gammas for {} constraints", g.len(), f.len())));
                }
                Ok(g.iter().zip(f).fold(vi, |acc, (&gj, &fj)| ext.add(acc, ext.mul(gj, fj))))
            })
            .collect()
    }

    /// α share from raw share values.
    pub fn alpha_at(&self, a: &[Ext], b: &[Ext], v: &[Ext], ch: &Challenge) -> Result<Vec<Ext>, MpcError> {
        let f = self.constraint_values(a, b)?;
        self.combine_alpha(&f, v, ch)
    }
}

/// The computation of party `party` (0-based) on its shares.
pub fn mpc_party_compute(
    ctx: &MpcContext,
    party: usize,
    input: &MpcInput,
    ch: &Challenge,
) -> Result<AlphaShare, MpcError> {
    if party >= input.a.shares.len() {
        return Err(MpcError::Shape(format!("party {party} out of range")));
    }
    let value = ctx.alpha_at(input.a.share_of(party), input.b.share_of(party), input.v.share_of(party), ch)?;
    Ok(AlphaShare { party, degree: input.a.degree + input.b.degree, value })
}

/// Opens α from at least three shares (interpolation at 0).
pub fn mpc_reconstruct_alpha(points: &EvalPoints, shares: &[AlphaShare]) -> Result<Vec<Ext>, MpcError> {
    let degree = shares.iter().map(|s| s.degree).max().unwrap_or(2);
    let view: Vec<(usize, &[Ext])> = shares.iter().map(|s| (s.party, s.value.as_slice())).collect();
    Ok(reconstruct(points, &view, degree)?)
}

/// Outcome of a false-positive measurement.
#[derive(Debug, Clone)]
pub struct FalsePositiveStats {
    pub q: u32,
    pub checks: usize,
    pub trials: u64,
    pub accepted: u64,
    pub expected_rate: f64,
}

impl FalsePositiveStats {
    pub fn rate(&self) -> f64 {
        self.accepted as f64 / self.trials as f64
    }

    pub fn sigma(&self) -> f64 {
        (self.expected_rate * (1.0 - self.expected_rate) / self.trials as f64).sqrt()
    }

    /// |rate − expected| in binomial standard deviations.
    pub fn deviation(&self) -> f64 {
        (self.rate() - self.expected_rate).abs() / self.sigma()
    }
}

/// Runs the protocol with a cheating witness on a small instance over GF(q),
/// drawing a fresh base-field challenge each trial, and counts acceptances.
pub fn measure_false_positive<R: RngCore + ?Sized>(
    q: u32,
    checks: usize,
    trials: u64,
    rng: &mut R,
) -> Result<FalsePositiveStats, MpcError> {
    let params = ParamSet::toy(q, 2, 2, 2, 1)?;
    let field = params.field();
    let mut seed = [0u8; 16];
    rng.fill_bytes(&mut seed);
    let (inst, _) = keygen(&params, &seed)?;
    let parties = 3;
    let points = Arc::new(EvalPoints::minimal(&field, parties)?);
    let ctx = MpcContext::new(&inst, &points.ext)?;
    // A random pair that violates at least one constraint.
    let cheat = loop {
        let a = Matrix::sample_gl(&field, 2, rng);
        let b = Matrix::sample_gl(&field, 2, rng);
        let w = Witness { a, b, seed: vec![] };
        if !crate::mcpkp::verify_witness(&inst, &w)? {
            break w;
        }
    };
    let input = MpcInput::share(&cheat.a, &cheat.b, checks, &points, rng)?;
    let mut accepted = 0;
    for _ in 0..trials {
        let ch = Challenge::random_base(&field, checks, ctx.num_constraints(), rng);
        let shares: Vec<AlphaShare> =
            (0..parties).map(|i| mpc_party_compute(&ctx, i, &input, &ch)).collect::<Result<_, _>>()?;
        if mpc_reconstruct_alpha(&points, &shares)?.iter().all(|v| v.is_zero()) {
            accepted += 1;
        }
    }
    Ok(FalsePositiveStats { q, checks, trials, accepted, expected_rate: (q as f64).powi(-(checks as i32)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcpkp::{keygen, project_literal};
    use crate::sharing::exact_degree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(parties: usize) -> (McpkpInstance, Witness, Arc<EvalPoints>, MpcContext) {
        let p = ParamSet::toy(64, 3, 3, 4, 2).unwrap();
        let (inst, w) = keygen(&p, b"mpc").unwrap();
        let points = Arc::new(EvalPoints::minimal(&p.field(), parties).unwrap());
        let ctx = MpcContext::new(&inst, &points.ext).unwrap();
        (inst, w, points, ctx)
    }

    #[test]
    fn constraint_values_match_literal_formula() {
        let (inst, w, _, ctx) = setup(8);
        let lift = |m: &Matrix| m.data().iter().map(|&v| Ext(v as u32)).collect::<Vec<_>>();
        assert!(ctx.constraint_values(&lift(&w.a), &lift(&w.b)).unwrap().iter().all(|v| v.is_zero()));
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = inst.params.field();
        for _ in 0..20 {
            let a = Matrix::random(&f, 3, 3, &mut rng);
            let b = Matrix::random(&f, 3, 3, &mut rng);
            let lit = project_literal(&inst.gprime, &inst.h, &a, &b).unwrap().sub(&inst.y).unwrap();
            let fast = ctx.constraint_values(&lift(&a), &lift(&b)).unwrap();
            assert_eq!(fast, lift(&lit));
        }
    }

    #[test]
    fn honest_alpha_opens_to_zero() {
        let (_, w, points, ctx) = setup(200);
        assert_eq!(points.ext.degree(), 2);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let input = MpcInput::share(&w.a, &w.b, 3, &points, &mut rng).unwrap();
        let ch = Challenge::random_ext(&points.ext, 3, ctx.num_constraints(), &mut rng);
        let all: Vec<AlphaShare> = (0..200).map(|i| mpc_party_compute(&ctx, i, &input, &ch).unwrap()).collect();
        let pick = |idx: &[usize]| idx.iter().map(|&i| all[i].clone()).collect::<Vec<_>>();
        assert!(mpc_reconstruct_alpha(&points, &pick(&[0, 1, 2])).unwrap().iter().all(|v| v.is_zero()));
        assert!(mpc_reconstruct_alpha(&points, &pick(&[1, 4, 6])).unwrap().iter().all(|v| v.is_zero()));
        for check in 0..3 {
            let ys: Vec<Ext> = all.iter().map(|s| s.value[check]).collect();
            assert!(exact_degree(&points.ext, &points.points, &ys).unwrap().unwrap() <= 2);
        }
        let mut corrupt = pick(&[0, 1, 2]);
        corrupt[1].value[0] = points.ext.add(corrupt[1].value[0], Ext::ONE);
        assert!(!mpc_reconstruct_alpha(&points, &corrupt).unwrap()[0].is_zero());
        assert!(mpc_reconstruct_alpha(&points, &pick(&[0, 1])).is_err());
    }

    #[test]
    fn zero_challenge_gives_zero_alpha() {
        let (inst, _, points, ctx) = setup(5);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let f = inst.params.field();
        let a = Matrix::random(&f, 3, 3, &mut rng);
        let b = Matrix::random(&f, 3, 3, &mut rng);
        let input = MpcInput::share(&a, &b, 2, &points, &mut rng).unwrap();
        let ch = Challenge::from_base(&vec![vec![0u8; ctx.num_constraints()]; 2]);
        let shares: Vec<AlphaShare> = (0..3).map(|i| mpc_party_compute(&ctx, i, &input, &ch).unwrap()).collect();
        assert!(mpc_reconstruct_alpha(&points, &shares).unwrap().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn false_positive_rate_small_run() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let stats = measure_false_positive(4, 1, 4000, &mut rng).unwrap();
        assert!(stats.deviation() < 4.0, "{stats:?}");
    }

    #[test]
    fn shape_errors() {
        let (_, _, _, ctx) = setup(4);
        assert!(ctx.constraint_values(&[Ext::ZERO; 4], &[Ext::ZERO; 9]).is_err());
        let f = vec![Ext::ZERO; ctx.num_constraints()];
        let ch = Challenge::from_base(&[vec![0u8; 3]]);
        assert!(ctx.combine_alpha(&f, &[Ext::ZERO], &ch).is_err());
    }
}
