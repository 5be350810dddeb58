//! Shamir sharings over GF(q^η), GGM seed trees and hash commitments.

use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::gf::{Ext, ExtField, Field, GfError};
use crate::xof::{Hasher, TAG_COMMIT, TAG_TREE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SharingError {
    #[error("{parties} parties need more than {available} non-zero evaluation points")]
    TooManyParties { parties: usize, available: u64 },
    #[error("sharings use different evaluation points")]
    PointMismatch,
    #[error("need at least {needed} shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("share subsets interpolate to different secrets")]
    Inconsistent,
    #[error("party index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("number of leaves {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("duplicate party index {0}")]
    DuplicateIndex(usize),
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// The public evaluation points e_1..e_N: the first N non-zero elements of
/// GF(q^η) in integer-encoding order, i.e. e_i = i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPoints {
    pub ext: ExtField,
    pub points: Vec<Ext>,
}

impl EvalPoints {
    pub fn new(ext: &ExtField, parties: usize) -> Result<EvalPoints, SharingError> {
        let available = ext.order() - 1;
        if parties as u64 > available {
            return Err(SharingError::TooManyParties { parties, available });
        }
        Ok(EvalPoints { ext: ext.clone(), points: (1..=parties as u32).map(Ext).collect() })
    }

    /// Smallest extension with enough points for `parties`.
    pub fn minimal(base: &Field, parties: usize) -> Result<EvalPoints, SharingError> {
        let ext = ExtField::new(base, ExtField::minimal_degree(base, parties))?;
        EvalPoints::new(&ext, parties)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Lagrange coefficients for evaluating at `x` from values at `xs`.
pub fn lagrange_coeffs(ext: &ExtField, xs: &[Ext], x: Ext) -> Result<Vec<Ext>, SharingError> {
    let mut out = Vec::with_capacity(xs.len());
    for (j, &xj) in xs.iter().enumerate() {
        let mut num = Ext::ONE;
        let mut den = Ext::ONE;
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                num = ext.mul(num, ext.sub(x, xm));
                den = ext.mul(den, ext.sub(xj, xm));
            }
        }
        out.push(ext.div(num, den)?);
    }
    Ok(out)
}

/// Coefficients (low degree first) of the polynomial through (xs, ys).
pub fn interpolate(ext: &ExtField, xs: &[Ext], ys: &[Ext]) -> Result<Vec<Ext>, SharingError> {
    let n = xs.len();
    let mut coeffs = vec![Ext::ZERO; n];
    for j in 0..n {
        // basis polynomial ∏_{m≠j} (X − x_m) / (x_j − x_m)
        let mut basis = vec![Ext::ONE];
        let mut den = Ext::ONE;
        for m in 0..n {
            if m == j {
                continue;
            }
            let mut next = vec![Ext::ZERO; basis.len() + 1];
            for (d, &c) in basis.iter().enumerate() {
                next[d + 1] = ext.add(next[d + 1], c);
                next[d] = ext.sub(next[d], ext.mul(c, xs[m]));
            }
            basis = next;
            den = ext.mul(den, ext.sub(xs[j], xs[m]));
        }
        let scale = ext.div(ys[j], den)?;
        for (d, &c) in basis.iter().enumerate() {
            coeffs[d] = ext.add(coeffs[d], ext.mul(c, scale));
        }
    }
    Ok(coeffs)
}

/// Degree of the lowest-degree polynomial through all points.
pub fn exact_degree(ext: &ExtField, xs: &[Ext], ys: &[Ext]) -> Result<Option<usize>, SharingError> {
    let c = interpolate(ext, xs, ys)?;
    Ok(c.iter().rposition(|v| !v.is_zero()))
}

/// A degree-ℓ Shamir sharing of a vector, secret in the constant term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShamirSharing {
    pub degree: usize,
    pub secret: Vec<Ext>,
    /// `coeffs[d]` holds the degree-(d+1) coefficients, one per secret slot.
    pub coeffs: Vec<Vec<Ext>>,
    pub points: Arc<EvalPoints>,
    /// `shares[i]` is the evaluation at e_{i+1}.
    pub shares: Vec<Vec<Ext>>,
}

fn evaluate(ext: &ExtField, constant: &[Ext], coeffs: &[Vec<Ext>], x: Ext) -> Vec<Ext> {
    constant
        .iter()
        .enumerate()
        .map(|(slot, &c0)| {
            // Horner, highest degree first
            let mut acc = Ext::ZERO;
            for row in coeffs.iter().rev() {
                acc = ext.add(ext.mul(acc, x), row[slot]);
            }
            ext.add(ext.mul(acc, x), c0)
        })
        .collect()
}

impl ShamirSharing {
    /// Shares base-field secrets with fresh random coefficients in GF(q^η).
    pub fn share<R: RngCore + ?Sized>(
        secret: &[u8],
        degree: usize,
        points: &Arc<EvalPoints>,
        rng: &mut R,
    ) -> Result<ShamirSharing, SharingError> {
        let ext = &points.ext;
        let lifted: Vec<Ext> = secret.iter().map(|&s| ext.embed(s)).collect();
        let coeffs = (0..degree).map(|_| lifted.iter().map(|_| ext.sample(rng)).collect()).collect();
        ShamirSharing::from_coeffs(lifted, coeffs, points)
    }

    pub fn from_coeffs(
        secret: Vec<Ext>,
        coeffs: Vec<Vec<Ext>>,
        points: &Arc<EvalPoints>,
    ) -> Result<ShamirSharing, SharingError> {
        if coeffs.is_empty() {
            return Err(SharingError::ZeroDegree);
        }
        let ext = &points.ext;
        let shares = points.points.iter().map(|&x| evaluate(ext, &secret, &coeffs, x)).collect();
        Ok(ShamirSharing { degree: coeffs.len(), secret, coeffs, points: points.clone(), shares })
    }

    pub fn share_of(&self, party: usize) -> &[Ext] {
        &self.shares[party]
    }

    fn same_points(&self, other: &ShamirSharing) -> Result<(), SharingError> {
        if self.points != other.points {
            return Err(SharingError::PointMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &ShamirSharing) -> Result<ShamirSharing, SharingError> {
        self.same_points(other)?;
        let ext = &self.points.ext;
        let zip = |a: &[Ext], b: &[Ext]| a.iter().zip(b).map(|(&x, &y)| ext.add(x, y)).collect::<Vec<_>>();
        let degree = self.degree.max(other.degree);
        let mut coeffs = vec![vec![Ext::ZERO; self.secret.len()]; degree];
        for (d, row) in coeffs.iter_mut().enumerate() {
            if let Some(a) = self.coeffs.get(d) {
                *row = zip(row, a);
            }
            if let Some(b) = other.coeffs.get(d) {
                *row = zip(row, b);
            }
        }
        let shares = self.shares.iter().zip(&other.shares).map(|(a, b)| zip(a, b)).collect();
        Ok(ShamirSharing {
            degree,
            secret: zip(&self.secret, &other.secret),
            coeffs,
            points: self.points.clone(),
            shares,
        })
    }

    pub fn scale(&self, s: Ext) -> ShamirSharing {
        let ext = &self.points.ext;
        let sc = |v: &[Ext]| v.iter().map(|&x| ext.mul(x, s)).collect::<Vec<_>>();
        ShamirSharing {
            degree: self.degree,
            secret: sc(&self.secret),
            coeffs: self.coeffs.iter().map(|r| sc(r)).collect(),
            points: self.points.clone(),
            shares: self.shares.iter().map(|r| sc(r)).collect(),
        }
    }

    /// Pointwise product; the degree is the sum of the degrees.
    pub fn mul(&self, other: &ShamirSharing) -> Result<ShamirSharing, SharingError> {
        self.same_points(other)?;
        let ext = &self.points.ext;
        let len = self.secret.len();
        if other.secret.len() != len {
            return Err(SharingError::PointMismatch);
        }
        let degree = self.degree + other.degree;
        let full = |s: &ShamirSharing| -> Vec<Vec<Ext>> {
            let mut all = vec![s.secret.clone()];
            all.extend(s.coeffs.iter().cloned());
            all
        };
        let (pa, pb) = (full(self), full(other));
        let mut prod = vec![vec![Ext::ZERO; len]; degree + 1];
        for (i, ra) in pa.iter().enumerate() {
            for (j, rb) in pb.iter().enumerate() {
                for slot in 0..len {
                    prod[i + j][slot] = ext.add(prod[i + j][slot], ext.mul(ra[slot], rb[slot]));
                }
            }
        }
        let secret = prod.remove(0);
        let shares = self
            .shares
            .iter()
            .zip(&other.shares)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| ext.mul(x, y)).collect())
            .collect();
        Ok(ShamirSharing { degree, secret, coeffs: prod, points: self.points.clone(), shares })
    }
}

/// Interpolates at 0 from `(party index, share)` pairs (indices are 0-based).
pub fn reconstruct(points: &EvalPoints, shares: &[(usize, &[Ext])], degree: usize) -> Result<Vec<Ext>, SharingError> {
    if shares.len() < degree + 1 {
        return Err(SharingError::InsufficientShares { needed: degree + 1, got: shares.len() });
    }
    let mut seen = std::collections::HashSet::new();
    for &(i, _) in shares {
        if i >= points.len() {
            return Err(SharingError::IndexOutOfRange(i));
        }
        if !seen.insert(i) {
            return Err(SharingError::DuplicateIndex(i));
        }
    }
    let ext = &points.ext;
    let xs: Vec<Ext> = shares.iter().map(|&(i, _)| points.points[i]).collect();
    let lam = lagrange_coeffs(ext, &xs[..degree + 1], Ext::ZERO)?;
    let len = shares[0].1.len();
    let mut out = vec![Ext::ZERO; len];
    for (c, &(_, sh)) in lam.iter().zip(shares) {
        for (o, &v) in out.iter_mut().zip(sh) {
            *o = ext.add(*o, ext.mul(*c, v));
        }
    }
    // Extra shares must lie on the same polynomial.
    if shares.len() > degree + 1 {
        let base: Vec<Ext> = xs[..degree + 1].to_vec();
        for (k, &(_, sh)) in shares.iter().enumerate().skip(degree + 1) {
            let lk = lagrange_coeffs(ext, &base, xs[k])?;
            for slot in 0..len {
                let mut v = Ext::ZERO;
                for (c, &(_, s)) in lk.iter().zip(shares) {
                    v = ext.add(v, ext.mul(*c, s[slot]));
                }
                if v != sh[slot] {
                    return Err(SharingError::Inconsistent);
                }
            }
        }
    }
    Ok(out)
}

/// A full GGM tree: node 0 is the root, node i has children 2i+1 and 2i+2,
/// leaf j is node N−1+j.
#[derive(Debug, Clone)]
pub struct SeedTree {
    pub leaves: usize,
    pub nodes: Vec<Vec<u8>>,
}

fn derive_children(salt: &[u8], rep: u16, node: usize, parent: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let len = parent.len();
    let out = Hasher::new(TAG_TREE)
        .absorb(salt)
        .absorb_u16(rep)
        .absorb_u32(node as u32)
        .absorb(parent)
        .clone()
        .digest(2 * len);
    (out[..len].to_vec(), out[len..].to_vec())
}

fn check_leaves(n: usize) -> Result<usize, SharingError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(SharingError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

impl SeedTree {
    /// Expands `root` into N leaves; `rep` separates trees that share a salt.
    pub fn expand(root: &[u8], leaves: usize, salt: &[u8], rep: u16) -> Result<SeedTree, SharingError> {
        check_leaves(leaves)?;
        let mut nodes = vec![Vec::new(); 2 * leaves - 1];
        nodes[0] = root.to_vec();
        for i in 0..leaves - 1 {
            let (l, r) = derive_children(salt, rep, i, &nodes[i]);
            nodes[2 * i + 1] = l;
            nodes[2 * i + 2] = r;
        }
        Ok(SeedTree { leaves, nodes })
    }

    pub fn leaf(&self, j: usize) -> &[u8] {
        &self.nodes[self.leaves - 1 + j]
    }

    pub fn depth(&self) -> usize {
        self.leaves.trailing_zeros() as usize
    }

    /// Siblings of the path from the root to leaf `hidden`, root side first.
    pub fn open(&self, hidden: usize) -> Result<Vec<Vec<u8>>, SharingError> {
        if hidden >= self.leaves {
            return Err(SharingError::IndexOutOfRange(hidden));
        }
        let mut node = self.leaves - 1 + hidden;
        let mut path = Vec::with_capacity(self.depth());
        while node > 0 {
            let sibling = if node % 2 == 1 { node + 1 } else { node - 1 };
            path.push(self.nodes[sibling].clone());
            node = (node - 1) / 2;
        }
        path.reverse();
        Ok(path)
    }

    /// Rebuilds every leaf except `hidden` from its co-path; the hidden slot is `None`.
    pub fn from_copath(
        copath: &[Vec<u8>],
        hidden: usize,
        leaves: usize,
        salt: &[u8],
        rep: u16,
    ) -> Result<Vec<Option<Vec<u8>>>, SharingError> {
        let depth = check_leaves(leaves)?;
        if hidden >= leaves {
            return Err(SharingError::IndexOutOfRange(hidden));
        }
        if copath.len() != depth {
            return Err(SharingError::InsufficientShares { needed: depth, got: copath.len() });
        }
        let mut nodes: Vec<Option<Vec<u8>>> = vec![None; 2 * leaves - 1];
        // nodes on the hidden path, root first
        let mut path = Vec::with_capacity(depth + 1);
        let mut node = leaves - 1 + hidden;
        while node > 0 {
            path.push(node);
            node = (node - 1) / 2;
        }
        path.reverse();
        for (seed, &on_path) in copath.iter().zip(&path) {
            let sibling = if on_path % 2 == 1 { on_path + 1 } else { on_path - 1 };
            nodes[sibling] = Some(seed.clone());
        }
        for i in 0..leaves - 1 {
            if let Some(parent) = nodes[i].clone() {
                let (l, r) = derive_children(salt, rep, i, &parent);
                nodes[2 * i + 1] = Some(l);
                nodes[2 * i + 2] = Some(r);
            }
        }
        Ok(nodes.split_off(leaves - 1))
    }
}

/// 2λ-bit commitment digest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment(pub Vec<u8>);

/// Digest of tag ‖ salt ‖ indices ‖ data, 2λ bits long.
pub fn commit(lambda: usize, salt: &[u8], indices: &[u32], data: &[u8]) -> Commitment {
    let mut h = Hasher::new(TAG_COMMIT);
    h.absorb(salt);
    for &i in indices {
        h.absorb_u32(i);
    }
    h.absorb(data);
    Commitment(h.digest(2 * lambda / 8))
}
