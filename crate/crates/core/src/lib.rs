//! Signatures from the Matrix Code Permuted Kernel Problem (MCPKP).
//!
//! The crate covers the whole pipeline at desk scale:
//!
//! * [`gf`], [`matcode`]: finite-field and matrix-code arithmetic,
//! * [`mcpkp`]: parameter sets, key generation, witness checks, the reduction
//!   to Matrix Subcode Equivalence and a brute-force oracle for toy sizes,
//! * [`sharing`], [`mpc`], [`sign`]: the threshold-computation-in-the-head
//!   proof turned into a signature with Fiat-Shamir,
//! * [`sizes`], [`attacks`]: closed-form size and attack-cost calculators.

pub mod attacks;
pub mod codec;
pub mod gf;
pub mod matcode;
pub mod mcpkp;
pub mod mpc;
pub mod sharing;
pub mod sign;
pub mod sizes;
pub mod xof;

pub use gf::{Ext, ExtField, Field, FieldElem};
pub use matcode::Matrix;
pub use mcpkp::{McpkpInstance, MseInstance, ParamSet, Witness};
pub use sign::{SigParams, Signature};
