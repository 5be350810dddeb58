//! Arithmetic over small finite fields and their extensions.
//!
//! Base fields are GF(2^e) for 1 ≤ e ≤ 8, plus small prime fields GF(p) used by
//! the toy-scale oracles. Elements are stored as `u8` in their integer encoding
//! (bit i of a binary element is the coefficient of x^i).
//!
//! Multiplication and inversion use full precomputed tables: every product is a
//! single indexed load, with no branches on the operand values.
//!
//! Extension fields GF(q^η) are only built over binary base fields. Their
//! elements are packed into a `u32`, coefficient i occupying bits
//! `[i·e, (i+1)·e)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("unsupported field: {0}")]
    Unsupported(String),
    #[error("polynomial {0:#x} is not irreducible of degree {1}")]
    Reducible(u32, u32),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {0} is out of range for the field")]
    OutOfRange(u32),
}

struct FieldInner {
    p: u8,
    e: u8,
    q: usize,
    modulus: u32,
    mul: Vec<u8>,
    inv: Vec<u8>,
    add: Vec<u8>,
    neg: Vec<u8>,
}

/// Handle to a base field GF(q). Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.e == other.0.e && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.p == 2 {
            write!(f, "GF(2^{}; {:#x})", self.0.e, self.0.modulus)
        } else {
            write!(f, "GF({})", self.0.p)
        }
    }
}

/// Carry-less product of two GF(2) polynomials.
fn clmul(a: u32, b: u32) -> u32 {
    let mut r = 0;
    for i in 0..16 {
        if (b >> i) & 1 == 1 {
            r ^= a << i;
        }
    }
    r
}

fn poly_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u32, m: u32) -> u32 {
    let dm = poly_degree(m);
    while a != 0 && poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

/// Irreducibility over GF(2) by trial division against every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible_gf2(poly: u32) -> bool {
    let d = poly_degree(poly);
    if d < 1 {
        return false;
    }
    for dd in 1..=(d / 2) {
        for low in 0..(1u32 << dd) {
            let f = (1u32 << dd) | low;
            if poly_mod(poly, f) == 0 {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least irreducible polynomial of degree `e` over GF(2).
pub fn default_binary_modulus(e: u32) -> u32 {
    assert!((1..=8).contains(&e));
    (1u32 << e..1u32 << (e + 1))
        .find(|&p| is_irreducible_gf2(p))
        .expect("irreducible polynomials exist in every degree")
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

type FieldCache = Mutex<HashMap<(u8, u8, u32), Field>>;

fn cache() -> &'static FieldCache {
    static CACHE: OnceLock<FieldCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Field {
    /// GF(2^e) with the default (lexicographically least) reduction polynomial.
    pub fn binary(e: u32) -> Result<Field, GfError> {
        if !(1..=8).contains(&e) {
            return Err(GfError::Unsupported(format!("binary field degree {e}")));
        }
        Field::binary_with_modulus(e, default_binary_modulus(e))
    }

    pub fn binary_with_modulus(e: u32, modulus: u32) -> Result<Field, GfError> {
        if !(1..=8).contains(&e) {
            return Err(GfError::Unsupported(format!("binary field degree {e}")));
        }
        if poly_degree(modulus) != e as i32 || !is_irreducible_gf2(modulus) {
            return Err(GfError::Reducible(modulus, e));
        }
        let key = (2u8, e as u8, modulus);
        if let Some(f) = cache().lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let q = 1usize << e;
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                mul[a * q + b] = poly_mod(clmul(a as u32, b as u32), modulus) as u8;
            }
        }
        let add = (0..q * q).map(|i| ((i / q) ^ (i % q)) as u8).collect();
        let neg = (0..q).map(|a| a as u8).collect();
        let f = Field::finish(2, e as u8, q, modulus, mul, add, neg);
        cache().lock().unwrap().insert(key, f.clone());
        Ok(f)
    }

    /// Prime field GF(p), p < 256. Only used for toy-scale oracles.
    pub fn prime(p: u32) -> Result<Field, GfError> {
        if !is_prime(p) || p > 251 {
            return Err(GfError::Unsupported(format!("prime field of order {p}")));
        }
        if p == 2 {
            return Field::binary(1);
        }
        let key = (p as u8, 1u8, 0u32);
        if let Some(f) = cache().lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let q = p as usize;
        let mut mul = vec![0u8; q * q];
        let mut add = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                mul[a * q + b] = ((a * b) % q) as u8;
                add[a * q + b] = ((a + b) % q) as u8;
            }
        }
        let neg = (0..q).map(|a| ((q - a) % q) as u8).collect();
        let f = Field::finish(p as u8, 1, q, 0, mul, add, neg);
        cache().lock().unwrap().insert(key, f.clone());
        Ok(f)
    }

    /// GF(q) for q a power of two (default modulus) or a small prime.
    pub fn with_order(q: u32) -> Result<Field, GfError> {
        if q.is_power_of_two() && q >= 2 {
            Field::binary(q.trailing_zeros())
        } else {
            Field::prime(q)
        }
    }

    fn finish(p: u8, e: u8, q: usize, modulus: u32, mul: Vec<u8>, add: Vec<u8>, neg: Vec<u8>) -> Field {
        let mut inv = vec![0u8; q];
        for a in 1..q {
            for b in 1..q {
                if mul[a * q + b] == 1 {
                    inv[a] = b as u8;
                    break;
                }
            }
        }
        Field(Arc::new(FieldInner { p, e, q, modulus, mul, inv, add, neg }))
    }

    pub fn order(&self) -> usize {
        self.0.q
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p as u32
    }

    pub fn degree(&self) -> u32 {
        self.0.e as u32
    }

    pub fn modulus(&self) -> u32 {
        self.0.modulus
    }

    pub fn is_binary(&self) -> bool {
        self.0.p == 2
    }

    /// Bits needed to serialize one element.
    pub fn bits(&self) -> u32 {
        usize::BITS - (self.0.q - 1).leading_zeros()
    }

    #[inline(always)]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        if self.0.p == 2 {
            a ^ b
        } else {
            self.0.add[a as usize * self.0.q + b as usize]
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u8) -> u8 {
        self.0.neg[a as usize]
    }

    #[inline(always)]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline(always)]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.0.mul[a as usize * self.0.q + b as usize]
    }

    /// Row of the multiplication table: `mul_row(a)[b] == a·b`.
    #[inline(always)]
    pub fn mul_row(&self, a: u8) -> &[u8] {
        let q = self.0.q;
        &self.0.mul[a as usize * q..(a as usize + 1) * q]
    }

    pub fn inv(&self, a: u8) -> Result<u8, GfError> {
        if a == 0 {
            return Err(GfError::DivisionByZero);
        }
        Ok(self.0.inv[a as usize])
    }

    pub fn div(&self, a: u8, b: u8) -> Result<u8, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem, GfError> {
        if value as usize >= self.0.q {
            return Err(GfError::OutOfRange(value));
        }
        Ok(FieldElem { value: value as u8, field: self.clone() })
    }

    /// Uniform element drawn from `rng`, one byte per attempt.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u8 {
        let q = self.0.q;
        let mut b = [0u8; 1];
        if q.is_power_of_two() {
            rng.fill_bytes(&mut b);
            return b[0] & (q - 1) as u8;
        }
        let limit = (256 / q) * q;
        loop {
            rng.fill_bytes(&mut b);
            if (b[0] as usize) < limit {
                return (b[0] as usize % q) as u8;
            }
        }
    }

    pub fn sample_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> u8 {
        loop {
            let x = self.sample(rng);
            if x != 0 {
                return x;
            }
        }
    }
}

/// A base-field element bundled with its field; arithmetic is checked.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElem {
    value: u8,
    field: Field,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElem {
    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn same(&self, other: &FieldElem) -> Result<(), GfError> {
        if self.field != other.field {
            return Err(GfError::FieldMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem, GfError> {
        self.same(other)?;
        Ok(FieldElem { value: self.field.add(self.value, other.value), field: self.field.clone() })
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem, GfError> {
        self.same(other)?;
        Ok(FieldElem { value: self.field.mul(self.value, other.value), field: self.field.clone() })
    }

    pub fn inv(&self) -> Result<FieldElem, GfError> {
        Ok(FieldElem { value: self.field.inv(self.value)?, field: self.field.clone() })
    }

    pub fn lift(&self, ext: &ExtField) -> Result<Ext, GfError> {
        ext.lift(self)
    }
}

/// Element of an extension field, packed coefficient-wise into a `u32`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Ext(pub u32);

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext({:#x})", self.0)
    }
}

impl Ext {
    pub const ZERO: Ext = Ext(0);
    pub const ONE: Ext = Ext(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct ExtInner {
    base: Field,
    eta: u32,
    /// Low coefficients of the monic extension polynomial (degree `eta`).
    poly: Vec<u8>,
    width: u32,
    mask: u32,
}

/// Handle to GF(q^η) over a binary base field.
#[derive(Clone)]
pub struct ExtField(Arc<ExtInner>);

impl PartialEq for ExtField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.base == other.0.base && self.0.eta == other.0.eta && self.0.poly == other.0.poly)
    }
}

impl Eq for ExtField {}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[y]/({:?}, eta={})", self.0.base, self.0.poly, self.0.eta)
    }
}

const MAX_ETA: usize = 32;

/// Coefficient-vector polynomials over a base field, used to search for the
/// extension modulus.
fn poly_rem(field: &Field, a: &[u8], m: &[u8]) -> Vec<u8> {
    // `m` is monic, stored low-degree first including the leading 1.
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (j, &c) in m.iter().enumerate() {
                r[shift + j] = field.sub(r[shift + j], field.mul(lead, c));
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible_over(field: &Field, poly: &[u8]) -> bool {
    let d = poly.len() - 1;
    let q = field.order();
    for dd in 1..=d / 2 {
        let count = q.pow(dd as u32);
        for low in 0..count {
            let mut f = Vec::with_capacity(dd + 1);
            let mut x = low;
            for _ in 0..dd {
                f.push((x % q) as u8);
                x /= q;
            }
            f.push(1);
            if poly_rem(field, poly, &f).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl ExtField {
    /// GF(q^η) using the least monic irreducible polynomial of degree η (ordered
    /// by the integer encoding of its low coefficients).
    pub fn new(base: &Field, eta: u32) -> Result<ExtField, GfError> {
        if !base.is_binary() {
            return Err(GfError::Unsupported("extension of an odd-characteristic field".into()));
        }
        let width = base.bits();
        if eta == 0 || eta as usize > MAX_ETA || eta * width > 32 {
            return Err(GfError::Unsupported(format!("extension degree {eta} over {base:?}")));
        }
        if eta == 1 {
            return ExtField::with_poly(base, vec![0]);
        }
        let q = base.order() as u64;
        let total = q.pow(eta);
        for low in 0..total {
            let mut f = Vec::with_capacity(eta as usize + 1);
            let mut x = low;
            for _ in 0..eta {
                f.push((x % q) as u8);
                x /= q;
            }
            if f[0] == 0 {
                continue;
            }
            f.push(1);
            if is_irreducible_over(base, &f) {
                f.pop();
                return ExtField::with_poly(base, f);
            }
        }
        Err(GfError::Unsupported(format!("no irreducible polynomial of degree {eta}")))
    }

    /// `low` holds the η low coefficients of the monic modulus.
    pub fn with_poly(base: &Field, low: Vec<u8>) -> Result<ExtField, GfError> {
        let eta = low.len() as u32;
        let width = base.bits();
        if !base.is_binary() || eta == 0 || eta * width > 32 {
            return Err(GfError::Unsupported(format!("extension degree {eta} over {base:?}")));
        }
        let mut full = low.clone();
        full.push(1);
        if eta > 1 && !is_irreducible_over(base, &full) {
            return Err(GfError::Reducible(0, eta));
        }
        let mask = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        Ok(ExtField(Arc::new(ExtInner { base: base.clone(), eta, poly: low, width, mask })))
    }

    /// Smallest η with q^η > `parties`, i.e. enough distinct non-zero points.
    pub fn minimal_degree(base: &Field, parties: usize) -> u32 {
        let q = base.order() as u128;
        let mut eta = 1;
        while q.pow(eta) <= parties as u128 {
            eta += 1;
        }
        eta
    }

    pub fn base(&self) -> &Field {
        &self.0.base
    }

    pub fn degree(&self) -> u32 {
        self.0.eta
    }

    pub fn order(&self) -> u64 {
        (self.0.base.order() as u64).pow(self.0.eta)
    }

    /// Bits of one packed element.
    pub fn bits(&self) -> u32 {
        self.0.width * self.0.eta
    }

    pub fn contains(&self, x: Ext) -> bool {
        (x.0 as u64) < (1u64 << self.bits())
    }

    #[inline(always)]
    pub fn coeff(&self, x: Ext, i: u32) -> u8 {
        ((x.0 >> (i * self.0.width)) & self.0.mask) as u8
    }

    pub fn from_coeffs(&self, coeffs: &[u8]) -> Result<Ext, GfError> {
        if coeffs.len() != self.0.eta as usize {
            return Err(GfError::FieldMismatch);
        }
        let mut v = 0u32;
        for (i, &c) in coeffs.iter().enumerate() {
            if c as usize >= self.0.base.order() {
                return Err(GfError::OutOfRange(c as u32));
            }
            v |= (c as u32) << (i as u32 * self.0.width);
        }
        Ok(Ext(v))
    }

    pub fn coeffs(&self, x: Ext) -> Vec<u8> {
        (0..self.0.eta).map(|i| self.coeff(x, i)).collect()
    }

    /// Canonical embedding of a base element as a constant polynomial.
    pub fn lift(&self, a: &FieldElem) -> Result<Ext, GfError> {
        if a.field() != &self.0.base {
            return Err(GfError::FieldMismatch);
        }
        Ok(Ext(a.value() as u32))
    }

    #[inline(always)]
    pub fn embed(&self, a: u8) -> Ext {
        Ext(a as u32)
    }

    #[inline(always)]
    pub fn add(&self, a: Ext, b: Ext) -> Ext {
        Ext(a.0 ^ b.0)
    }

    #[inline(always)]
    pub fn sub(&self, a: Ext, b: Ext) -> Ext {
        Ext(a.0 ^ b.0)
    }

    /// Product with a base-field scalar.
    #[inline(always)]
    pub fn scale(&self, a: Ext, s: u8) -> Ext {
        let row = self.0.base.mul_row(s);
        let w = self.0.width;
        let mut r = 0u32;
        for i in 0..self.0.eta {
            let c = (a.0 >> (i * w)) & self.0.mask;
            r |= (row[c as usize] as u32) << (i * w);
        }
        Ext(r)
    }

    pub fn mul(&self, a: Ext, b: Ext) -> Ext {
        let eta = self.0.eta as usize;
        if eta == 1 {
            return Ext(self.0.base.mul(a.0 as u8, b.0 as u8) as u32);
        }
        let base = &self.0.base;
        let mut ac = [0u8; MAX_ETA];
        let mut bc = [0u8; MAX_ETA];
        for i in 0..eta {
            ac[i] = self.coeff(a, i as u32);
            bc[i] = self.coeff(b, i as u32);
        }
        let mut prod = [0u8; 2 * MAX_ETA];
        for i in 0..eta {
            if ac[i] == 0 {
                continue;
            }
            let row = base.mul_row(ac[i]);
            for j in 0..eta {
                prod[i + j] ^= row[bc[j] as usize];
            }
        }
        for d in (eta..2 * eta - 1).rev() {
            let lead = prod[d];
            if lead == 0 {
                continue;
            }
            let row = base.mul_row(lead);
            for (j, &c) in self.0.poly.iter().enumerate() {
                prod[d - eta + j] ^= row[c as usize];
            }
            prod[d] = 0;
        }
        let mut r = 0u32;
        for (i, &c) in prod.iter().enumerate().take(eta) {
            r |= (c as u32) << (i as u32 * self.0.width);
        }
        Ext(r)
    }

    pub fn pow(&self, a: Ext, mut exp: u64) -> Ext {
        let mut result = Ext::ONE;
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        result
    }

    /// Inverse by exponentiation to q^η − 2.
    pub fn inv(&self, a: Ext) -> Result<Ext, GfError> {
        if a.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn div(&self, a: Ext, b: Ext) -> Result<Ext, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Ext {
        let mut v = 0u32;
        for i in 0..self.0.eta {
            v |= (self.0.base.sample(rng) as u32) << (i * self.0.width);
        }
        Ext(v)
    }
}
