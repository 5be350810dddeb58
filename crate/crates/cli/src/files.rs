//! On-disk formats owned by the command-line tool.
//!
//! * detached signature: magic (`MCPK`, or `MCPX` for reduced profiles) ‖ paramset id ‖ raw signature
//! * toy instance: `MCPI` ‖ q (u16) ‖ m ‖ n ‖ k (u16) ‖ k′ ‖ H ‖ G′ ‖ Y
//! * toy witness: `MCPW` ‖ A ‖ B
//!
//! Integers are little-endian; matrices use the library's row/column-prefixed packing.

use mcpkp::matcode::Matrix;
use mcpkp::mcpkp::{McpkpInstance, ParamSet, Witness};

pub const SIG_MAGIC: &[u8; 4] = b"MCPK";
pub const SIG_MAGIC_INSECURE: &[u8; 4] = b"MCPX";
const INSTANCE_MAGIC: &[u8; 4] = b"MCPI";
const WITNESS_MAGIC: &[u8; 4] = b"MCPW";

pub struct SignatureFile<'a> {
    pub insecure: bool,
    pub id: u8,
    pub body: &'a [u8],
}

pub fn wrap_signature(insecure: bool, id: u8, body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 5);
    out.extend_from_slice(if insecure { SIG_MAGIC_INSECURE } else { SIG_MAGIC });
    out.push(id);
    out.extend_from_slice(body);
    out
}

pub fn unwrap_signature(bytes: &[u8]) -> Result<SignatureFile<'_>, String> {
    if bytes.len() < 5 {
        return Err("signature file shorter than its header".into());
    }
    let insecure = match &bytes[..4] {
        m if m == SIG_MAGIC => false,
        m if m == SIG_MAGIC_INSECURE => true,
        _ => return Err("bad signature magic".into()),
    };
    Ok(SignatureFile { insecure, id: bytes[4], body: &bytes[5..] })
}

pub fn write_instance(inst: &McpkpInstance) -> Vec<u8> {
    let p = &inst.params;
    let mut out = INSTANCE_MAGIC.to_vec();
    out.extend_from_slice(&(p.q as u16).to_le_bytes());
    out.push(p.m as u8);
    out.push(p.n as u8);
    out.extend_from_slice(&(p.k as u16).to_le_bytes());
    out.push(p.kp as u8);
    for m in [&inst.h, &inst.gprime, &inst.y] {
        out.extend_from_slice(&m.to_bytes());
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8], String> {
    if bytes.len() < n {
        return Err("truncated file".into());
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn take_matrix(params: &ParamSet, bytes: &mut &[u8], rows: usize, cols: usize) -> Result<Matrix, String> {
    let (m, used) = Matrix::from_bytes(&params.field(), bytes).map_err(|e| e.to_string())?;
    if m.rows() != rows || m.cols() != cols {
        return Err(format!("matrix is {}x{}, expected {rows}x{cols}", m.rows(), m.cols()));
    }
    *bytes = &bytes[used..];
    Ok(m)
}

pub fn read_instance(mut bytes: &[u8]) -> Result<McpkpInstance, String> {
    if take(&mut bytes, 4)? != INSTANCE_MAGIC {
        return Err("bad instance magic".into());
    }
    let q = u16::from_le_bytes(take(&mut bytes, 2)?.try_into().unwrap()) as u32;
    let dims = take(&mut bytes, 2)?;
    let k = u16::from_le_bytes(take(&mut bytes, 2)?.try_into().unwrap()) as usize;
    let kp = take(&mut bytes, 1)?[0] as usize;
    let params = ParamSet::toy(q, dims[0] as usize, dims[1] as usize, k, kp).map_err(|e| e.to_string())?;
    let c = params.mn() - params.k;
    let h = take_matrix(&params, &mut bytes, c, params.mn())?;
    let gprime = take_matrix(&params, &mut bytes, params.kp, params.mn())?;
    let y = take_matrix(&params, &mut bytes, params.kp, c)?;
    if !bytes.is_empty() {
        return Err("trailing bytes after instance".into());
    }
    Ok(McpkpInstance { params, h, gprime, y, seed: Vec::new() })
}

pub fn write_witness(w: &Witness) -> Vec<u8> {
    let mut out = WITNESS_MAGIC.to_vec();
    out.extend_from_slice(&w.a.to_bytes());
    out.extend_from_slice(&w.b.to_bytes());
    out
}

pub fn read_witness(params: &ParamSet, mut bytes: &[u8]) -> Result<Witness, String> {
    if take(&mut bytes, 4)? != WITNESS_MAGIC {
        return Err("bad witness magic".into());
    }
    let a = take_matrix(params, &mut bytes, params.m, params.m)?;
    let b = take_matrix(params, &mut bytes, params.n, params.n)?;
    if !bytes.is_empty() {
        return Err("trailing bytes after witness".into());
    }
    Ok(Witness { a, b, seed: Vec::new() })
}
