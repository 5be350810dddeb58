use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use mcpkp::codec::CodecError;
use mcpkp::mcpkp::{keygen, ParamSet};
use mcpkp::sign::{self, hidden_parties, soundness_check, SigParams, SignError, Signature};
use mcpkp::xof::{Hasher, TAG_EXPAND};

const KAT_DIGEST: &str = "9ca9822889b8c08c77bd56c4a62cb6a0b9fb7e54a3b02dbcdd4401199679bb75";

fn digest(bytes: &[u8]) -> String {
    Hasher::new(TAG_EXPAND).absorb(b"kat").absorb(bytes).clone().digest(32).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn known_answer_ia_fast() {
    let p = ParamSet::ia();
    let (pk, sk) = keygen(&p, &[0x01]).unwrap();
    let sp = SigParams::new(&p, 256, 20, Some(22)).unwrap();
    let sig = sign::sign_deterministic(&sk, &pk, b"", &sp).unwrap();
    let bytes = sig.to_bytes(&sp);
    assert_eq!(bytes.len(), 7914);
    assert_eq!(digest(&bytes), KAT_DIGEST);
}

#[test]
fn completeness_reduced_profiles() {
    let mut rng = ChaCha20Rng::seed_from_u64(1000);
    for p in ParamSet::presets() {
        let (pk, sk) = keygen(&p, p.name.as_bytes()).unwrap();
        let sp = SigParams::insecure(&p, 4, 1, None).unwrap();
        for i in 0..1000u32 {
            let msg = i.to_le_bytes();
            let sig = sign::sign(&sk, &pk, &msg, &sp, &mut rng).unwrap();
            assert!(sign::verify(&pk, &msg, &sig, &sp).unwrap(), "{} #{i}", p.name);
        }
    }
}

#[test]
fn every_preset_full_profile_roundtrip() {
    for p in ParamSet::presets() {
        let (pk, sk) = keygen(&p, b"full").unwrap();
        for sp in [SigParams::fast(&p).unwrap(), SigParams::short(&p).unwrap()] {
            assert!(soundness_check(&sp).meets_lambda, "{} N={}", p.name, sp.parties);
            let sig = sign::sign_deterministic(&sk, &pk, b"msg", &sp).unwrap();
            let bytes = sig.to_bytes(&sp);
            assert_eq!(bytes.len(), sp.signature_bytes());
            assert_eq!(sign::verify_bytes(&pk, b"msg", &bytes, &sp), Ok(true), "{} N={}", p.name, sp.parties);
        }
    }
}

#[test]
fn message_and_key_binding() {
    let p = ParamSet::ib();
    let (pk, sk) = keygen(&p, b"alice").unwrap();
    let (other, _) = keygen(&p, b"bob").unwrap();
    let sp = SigParams::insecure(&p, 16, 4, None).unwrap();
    let sig = sign::sign_deterministic(&sk, &pk, b"pay 10", &sp).unwrap();
    assert!(sign::verify(&pk, b"pay 10", &sig, &sp).unwrap());
    assert!(!sign::verify(&pk, b"pay 100", &sig, &sp).unwrap());
    assert!(!sign::verify(&other, b"pay 10", &sig, &sp).unwrap());
}

#[test]
fn deterministic_mode_is_byte_identical() {
    let p = ParamSet::ia();
    let (pk, sk) = keygen(&p, b"det").unwrap();
    let sp = SigParams::insecure(&p, 32, 3, None).unwrap();
    let a = sign::sign_deterministic(&sk, &pk, b"m", &sp).unwrap().to_bytes(&sp);
    let b = sign::sign_deterministic(&sk, &pk, b"m", &sp).unwrap().to_bytes(&sp);
    let c = sign::sign_deterministic(&sk, &pk, b"n", &sp).unwrap().to_bytes(&sp);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn malformed_lengths_are_errors_not_rejections() {
    let p = ParamSet::ia();
    let (pk, sk) = keygen(&p, b"len").unwrap();
    let sp = SigParams::insecure(&p, 16, 2, None).unwrap();
    let bytes = sign::sign_deterministic(&sk, &pk, b"m", &sp).unwrap().to_bytes(&sp);
    let short = &bytes[..bytes.len() - 1];
    assert_eq!(sign::verify_bytes(&pk, b"m", short, &sp), Err(SignError::Malformed(CodecError::Truncated)));
    let mut long = bytes.clone();
    long.push(0);
    assert_eq!(sign::verify_bytes(&pk, b"m", &long, &sp), Err(SignError::Malformed(CodecError::TrailingData)));
    assert!(sign::verify_bytes(&pk, b"m", &[], &sp).is_err());
}

#[test]
fn padding_bits_must_be_zero() {
    // q = 128 leaves a partial final byte
    let p = ParamSet::ib();
    let (pk, sk) = keygen(&p, b"pad").unwrap();
    let sp = SigParams::insecure(&p, 16, 1, None).unwrap();
    assert_ne!(sp.signature_bits() % 8, 0);
    let mut bytes = sign::sign_deterministic(&sk, &pk, b"m", &sp).unwrap().to_bytes(&sp);
    *bytes.last_mut().unwrap() ^= 0x80;
    assert_eq!(sign::verify_bytes(&pk, b"m", &bytes, &sp), Err(SignError::Malformed(CodecError::NonZeroPadding)));
}

#[test]
fn fuzzed_bits_reject_at_reduced_profile() {
    let p = ParamSet::iii();
    let (pk, sk) = keygen(&p, b"fuzz").unwrap();
    let sp = SigParams::insecure(&p, 8, 2, None).unwrap();
    let bytes = sign::sign_deterministic(&sk, &pk, b"m", &sp).unwrap().to_bytes(&sp);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..300 {
        let bit = rng.gen_range(0..bytes.len() * 8);
        let mut t = bytes.clone();
        t[bit / 8] ^= 1 << (bit % 8);
        assert!(!matches!(sign::verify_bytes(&pk, b"m", &t, &sp), Ok(true)), "bit {bit}");
    }
}

#[test]
fn hidden_indices_are_uniform_and_in_range() {
    let sp = SigParams::new(&ParamSet::ia(), 256, 20, Some(22)).unwrap();
    let mut counts = vec![0u32; 256];
    for i in 0..2000u32 {
        for h in hidden_parties(&sp, &i.to_le_bytes()) {
            counts[h] += 1;
        }
    }
    // 40000 draws, mean 156.25 per cell
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - 156.25).powi(2) / 156.25).sum();
    assert!(chi2 < 360.0, "chi2 = {chi2}");
}

#[test]
fn parameter_mismatch_is_rejected() {
    let p = ParamSet::ia();
    let (pk, sk) = keygen(&p, b"mismatch").unwrap();
    let sp = SigParams::insecure(&p, 16, 2, None).unwrap();
    let sig = sign::sign_deterministic(&sk, &pk, b"m", &sp).unwrap();
    let other = SigParams::insecure(&ParamSet::ib(), 16, 2, None).unwrap();
    assert!(matches!(sign::verify(&pk, b"m", &sig, &other), Err(SignError::Params(_))));
    let sp3 = SigParams::insecure(&p, 16, 3, None).unwrap();
    assert!(Signature::from_bytes(&sig.to_bytes(&sp), &sp3).is_err());
}
