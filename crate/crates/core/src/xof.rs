//! SHAKE-256 helpers with one-byte domain separation.

use rand::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake256, Shake256Reader};

pub const TAG_TREE: u8 = 0;
pub const TAG_COMMIT: u8 = 1;
pub const TAG_CHALLENGE1: u8 = 2;
pub const TAG_CHALLENGE2: u8 = 3;
pub const TAG_EXPAND: u8 = 4;

/// Incremental absorb-then-squeeze hasher starting with a domain tag.
#[derive(Clone)]
pub struct Hasher(Shake256);

impl Hasher {
    pub fn new(tag: u8) -> Self {
        let mut h = Shake256::default();
        h.update(&[tag]);
        Hasher(h)
    }

    pub fn absorb(&mut self, data: &[u8]) -> &mut Self {
        self.0.update(data);
        self
    }

    pub fn absorb_u16(&mut self, v: u16) -> &mut Self {
        self.absorb(&v.to_le_bytes())
    }

    pub fn absorb_u32(&mut self, v: u32) -> &mut Self {
        self.absorb(&v.to_le_bytes())
    }

    pub fn absorb_u64(&mut self, v: u64) -> &mut Self {
        self.absorb(&v.to_le_bytes())
    }

    pub fn digest(self, len: usize) -> Vec<u8> {
        let mut out = vec![0u8; len];
        self.0.finalize_xof().read(&mut out);
        out
    }

    pub fn into_rng(self) -> XofRng {
        XofRng(self.0.finalize_xof())
    }
}

/// An XOF output stream usable wherever an `RngCore` is expected.
pub struct XofRng(Shake256Reader);

impl XofRng {
    pub fn read_u16_below(&mut self, bound: u16) -> u16 {
        assert!(bound > 0);
        let limit = (65536 / bound as u32) * bound as u32;
        loop {
            let mut b = [0u8; 2];
            self.0.read(&mut b);
            let v = u16::from_le_bytes(b) as u32;
            if v < limit {
                return (v % bound as u32) as u16;
            }
        }
    }
}

impl RngCore for XofRng {
    fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.0.read(&mut b);
        u32::from_le_bytes(b)
    }

    fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.0.read(&mut b);
        u64::from_le_bytes(b)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.read(dest);
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.read(dest);
        Ok(())
    }
}

impl CryptoRng for XofRng {}
