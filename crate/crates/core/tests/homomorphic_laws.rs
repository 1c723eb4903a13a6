//! Property tests for the cryptosystem's algebraic laws and the wire
//! encodings. Expensive key generation happens once; the properties draw
//! plaintexts, scalars, and payloads.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;
use std::sync::OnceLock;

use privpath_core::paillier::{
    add, decrypt, decrypt_signed, encrypt, encrypt_signed, keygen, rerandomize, scalar_mul,
    PrivateKey, PublicKey,
};
use privpath_core::wire;

fn test_key() -> &'static (PublicKey, PrivateKey) {
    static KEY: OnceLock<(PublicKey, PrivateKey)> = OnceLock::new();
    KEY.get_or_init(|| keygen(1024).expect("test keygen"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roundtrip_random_residues(seed in any::<u64>()) {
        let (pk, sk) = test_key();
        let m = BigUint::from(seed) % pk.n();
        let c = encrypt(pk, &m).unwrap();
        prop_assert_eq!(decrypt(sk, &c).unwrap(), m);
    }

    #[test]
    fn addition_matches_plain_sum(a in -(1i64 << 40)..(1i64 << 40), b in -(1i64 << 40)..(1i64 << 40)) {
        let (pk, sk) = test_key();
        let ca = encrypt_signed(pk, &BigInt::from(a)).unwrap();
        let cb = encrypt_signed(pk, &BigInt::from(b)).unwrap();
        let sum = add(pk, &ca, &cb).unwrap();
        prop_assert_eq!(decrypt_signed(sk, &sum).unwrap(), BigInt::from(a) + b);
    }

    #[test]
    fn scalar_matches_plain_product(a in -(1i64 << 40)..(1i64 << 40), k in -(1i64 << 20)..(1i64 << 20)) {
        let (pk, sk) = test_key();
        let ca = encrypt_signed(pk, &BigInt::from(a)).unwrap();
        let prod = scalar_mul(pk, &ca, &BigInt::from(k)).unwrap();
        prop_assert_eq!(decrypt_signed(sk, &prod).unwrap(), BigInt::from(a) * k);
    }

    #[test]
    fn encode_decode_bijection(v in any::<i64>()) {
        let (pk, _) = test_key();
        let encoded = pk.encode(&BigInt::from(v)).unwrap();
        prop_assert!(&encoded < pk.n());
        prop_assert_eq!(pk.decode(&encoded), BigInt::from(v));
    }

    #[test]
    fn rerandomize_is_plaintext_stable(v in -(1i64 << 40)..(1i64 << 40)) {
        let (pk, sk) = test_key();
        let c = encrypt_signed(pk, &BigInt::from(v)).unwrap();
        let r = rerandomize(pk, &c).unwrap();
        prop_assert_ne!(c.value(), r.value());
        prop_assert_eq!(decrypt_signed(sk, &r).unwrap(), BigInt::from(v));
    }

    #[test]
    fn bigint_wire_roundtrip(bytes in proptest::collection::vec(any::<u8>(), 0..60)) {
        let v = BigUint::from_bytes_be(&bytes);
        let mut buf = Vec::new();
        wire::write_bigint(&mut buf, &v);
        let mut r = wire::ByteReader::new(&buf);
        prop_assert_eq!(r.read_bigint().unwrap(), v);
        r.finish().unwrap();
    }

    #[test]
    fn ciphertext_wire_roundtrip(v in -(1i64 << 40)..(1i64 << 40)) {
        let (pk, _) = test_key();
        let c = encrypt_signed(pk, &BigInt::from(v)).unwrap();
        let bytes = wire::serialize_ciphertext(pk, &c);
        prop_assert_eq!(bytes.len(), 4 + wire::ciphertext_width(pk));
        let back = wire::deserialize_ciphertext(pk, &bytes).unwrap();
        prop_assert_eq!(&back, &c);
    }
}

#[test]
fn roundtrip_edge_residues() {
    let (pk, sk) = test_key();
    for m in [BigUint::zero(), BigUint::one(), pk.n() - 1u32] {
        let c = encrypt(pk, &m).unwrap();
        assert_eq!(decrypt(sk, &c).unwrap(), m);
    }
}

#[test]
fn pubkey_wire_roundtrip() {
    let (pk, _) = test_key();
    let bytes = wire::serialize_pubkey(pk);
    let back = wire::deserialize_pubkey(&bytes).unwrap();
    assert_eq!(&back, pk);
}

#[test]
fn enc_path_roundtrip_and_empty_rejection() {
    use privpath_core::geometry::{EncPath, Path, Point};
    let (pk, sk) = test_key();
    let path = Path::new(vec![
        Point::new(-99, 17).unwrap(),
        Point::new(42, -3).unwrap(),
    ])
    .unwrap();
    let enc = EncPath::encrypt(pk, &path).unwrap();
    let bytes = wire::serialize_enc_path(pk, &enc);
    let back = wire::deserialize_enc_path(pk, &bytes).unwrap();
    assert_eq!(back.points().len(), 2);
    for (orig, got) in path.points().iter().zip(back.points()) {
        assert_eq!(
            decrypt_signed(sk, &got.x).unwrap(),
            BigInt::from(orig.x.value())
        );
        assert_eq!(
            decrypt_signed(sk, &got.y).unwrap(),
            BigInt::from(orig.y.value())
        );
    }

    let empty = 0u32.to_be_bytes();
    assert!(matches!(
        wire::deserialize_enc_path(pk, &empty),
        Err(privpath_core::Error::EmptyPath)
    ));
}

/// Frame payload size for an encrypted route is fixed by the key size:
/// 4-byte point count plus two residues of width n^2 per point, each with a
/// 4-byte length prefix. Checked against a synthetic 2048-bit modulus so no
/// slow keygen is needed.
#[test]
fn enc_route_payload_size_is_deterministic_at_2048_bits() {
    use privpath_core::geometry::{EncPath, EncPoint};
    use privpath_core::paillier::trivial_encrypt;

    let mut n = BigUint::one() << 2047u32;
    n |= BigUint::from(0xdeadbeefu32) << 128u32;
    n |= BigUint::one(); // odd
    let pk = PublicKey::from_modulus(n).unwrap();
    assert_eq!(pk.bits(), 2048);
    assert_eq!(wire::ciphertext_width(&pk), 512);

    let ct = trivial_encrypt(&pk, &BigUint::from(7u32)).unwrap();
    let point = EncPoint::new(ct.clone(), ct).unwrap();
    let path = EncPath::new(vec![point.clone(), point]).unwrap();
    let payload = wire::serialize_enc_path(&pk, &path);
    assert_eq!(payload.len(), 4 + 2 * 2 * (4 + 512));
}
