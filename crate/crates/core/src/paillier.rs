//! Paillier cryptosystem with the homomorphic operations the protocol needs:
//! ciphertext addition, plaintext scalar multiplication, negation, and
//! rerandomization, plus a signed-integer encoding into the residue space.
//!
//! The scheme fixes `g = n + 1`, so encryption is one modular exponentiation
//! (`r^n mod n^2`) and one multiplication. Decryption runs mod `p^2` and
//! `q^2` separately and recombines by CRT.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_prime::nt_funcs::is_prime;
use num_traits::{One, Signed, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Smallest key size accepted by [`keygen`]. Anything below this is refused
/// as insecure rather than silently produced.
pub const MIN_KEY_BITS: u64 = 1024;

/// Bit bound on a [`SignedCoord`]: coordinates satisfy `|v| < 2^COORD_BITS`.
pub const COORD_BITS: u32 = 32;

/// Fingerprint of a public key (truncated SHA-256 of the modulus). Every
/// cross-key operation checks it; mixing ciphertexts from different keys is
/// the worst silent failure mode in two-party code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct KeyId([u8; 8]);

impl KeyId {
    fn of_modulus(n: &BigUint) -> KeyId {
        let digest = Sha256::digest(n.to_bytes_be());
        let mut id = [0u8; 8];
        id.copy_from_slice(&digest[..8]);
        KeyId(id)
    }

    pub fn as_bytes(&self) -> &[u8; 8] {
        &self.0
    }
}

/// Public half of a key pair: modulus `n = p*q`, cached `n^2`, generator
/// `g = n + 1`, and the advertised key size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_sq: BigUint,
    g: BigUint,
    half_n: BigUint,
    bits: u64,
    key_id: KeyId,
}

impl PublicKey {
    /// Rebuild a public key from a received modulus. Rejects moduli shorter
    /// than [`MIN_KEY_BITS`] or with trivial small factors (n must be odd).
    pub fn from_modulus(n: BigUint) -> Result<PublicKey> {
        let bits = n.bits();
        if bits < MIN_KEY_BITS {
            return Err(Error::KeySize { bits });
        }
        if n.is_even() {
            return Err(Error::Malformed("public modulus must be odd"));
        }
        let n_sq = &n * &n;
        let g = &n + 1u32;
        let half_n = &n >> 1;
        let key_id = KeyId::of_modulus(&n);
        Ok(PublicKey {
            n,
            n_sq,
            g,
            half_n,
            bits,
            key_id,
        })
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_sq(&self) -> &BigUint {
        &self.n_sq
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn key_id(&self) -> KeyId {
        self.key_id
    }

    /// Map a signed integer into the plaintext residue space. Negative
    /// values land in the upper half of `[0, n)`; the mapping is a bijection
    /// on `(-n/2, n/2)`.
    pub fn encode(&self, v: &BigInt) -> Result<BigUint> {
        let magnitude = v.magnitude();
        if magnitude >= &self.half_n {
            return Err(Error::SignedRange {
                bits: magnitude.bits(),
                bound: self.half_n.bits(),
            });
        }
        if v.is_negative() {
            Ok(&self.n - magnitude)
        } else {
            Ok(magnitude.clone())
        }
    }

    /// Inverse of [`PublicKey::encode`]: residues above `n/2` decode as
    /// negative.
    pub fn decode(&self, r: &BigUint) -> BigInt {
        if r > &self.half_n {
            BigInt::from(r.clone()) - BigInt::from(self.n.clone())
        } else {
            BigInt::from(r.clone())
        }
    }
}

/// CRT decryption constants, derived once at key generation.
#[derive(Clone, Debug)]
struct CrtParams {
    p_sq: BigUint,
    q_sq: BigUint,
    p_minus_one: BigUint,
    q_minus_one: BigUint,
    hp: BigUint,
    hq: BigUint,
    p_inv_q: BigUint,
}

/// Private half of a key pair. Holds the prime factors, the Carmichael value
/// `lambda = lcm(p-1, q-1)` and its inverse `mu`, and the matching public key.
#[derive(Clone, Debug)]
pub struct PrivateKey {
    p: BigUint,
    q: BigUint,
    lambda: BigUint,
    mu: BigUint,
    pk: PublicKey,
    crt: CrtParams,
}

impl PrivateKey {
    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    pub fn public(&self) -> &PublicKey {
        &self.pk
    }
}

/// An encrypted residue, bound to the public key that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    value: BigUint,
    key_id: KeyId,
}

impl Ciphertext {
    /// Wrap a raw residue. Used by deserialization, which has already
    /// checked `value < n^2`.
    pub(crate) fn from_parts(value: BigUint, key_id: KeyId) -> Ciphertext {
        Ciphertext { value, key_id }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key_id(&self) -> KeyId {
        self.key_id
    }

    fn check_key(&self, pk: &PublicKey) -> Result<()> {
        if self.key_id != pk.key_id {
            return Err(Error::KeyMismatch);
        }
        Ok(())
    }
}

/// Bounded signed coordinate, `|v| < 2^COORD_BITS`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SignedCoord(i64);

impl SignedCoord {
    pub fn new(v: i64) -> Result<SignedCoord> {
        if v.unsigned_abs() >= 1u64 << COORD_BITS {
            return Err(Error::CoordRange {
                value: v,
                bound: COORD_BITS,
            });
        }
        Ok(SignedCoord(v))
    }

    pub fn value(&self) -> i64 {
        self.0
    }
}

impl std::fmt::Display for SignedCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn gen_prime<R: CryptoRng + RngCore>(bits: u64, rng: &mut R) -> BigUint {
    loop {
        let mut candidate = rng.gen_biguint(bits);
        // Top two bits set so the product of two such primes has exactly
        // 2*bits significant bits; low bit set for oddness.
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(bits - 2, true);
        candidate.set_bit(0, true);
        if is_prime(&candidate, None).probably() {
            return candidate;
        }
    }
}

/// Generate a key pair of the given modulus size using the OS entropy source.
pub fn keygen(bits: u64) -> Result<(PublicKey, PrivateKey)> {
    keygen_with_rng(bits, &mut rand::rngs::OsRng)
}

/// Key generation with a caller-chosen RNG. The bound `R: CryptoRng` keeps
/// non-cryptographic generators out at the type level; seedable generators
/// such as ChaCha are accepted for reproducible test keys.
pub fn keygen_with_rng<R: CryptoRng + RngCore>(
    bits: u64,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey)> {
    if bits < MIN_KEY_BITS || bits % 2 != 0 {
        return Err(Error::KeySize { bits });
    }
    loop {
        let p = gen_prime(bits / 2, rng);
        let q = gen_prime(bits / 2, rng);
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() != bits {
            continue;
        }
        let pk = PublicKey::from_modulus(n)?;
        let p_minus_one = &p - 1u32;
        let q_minus_one = &q - 1u32;
        let lambda = p_minus_one.lcm(&q_minus_one);
        // g = n + 1 makes g^lambda = 1 + lambda*n (mod n^2), so mu is just
        // the inverse of lambda mod n.
        let mu = match (&lambda % pk.n()).modinv(pk.n()) {
            Some(mu) => mu,
            None => continue,
        };
        let crt = match derive_crt(&pk, &p, &q, &p_minus_one, &q_minus_one) {
            Some(crt) => crt,
            None => continue,
        };
        let sk = PrivateKey {
            p,
            q,
            lambda,
            mu,
            pk: pk.clone(),
            crt,
        };
        return Ok((pk, sk));
    }
}

fn derive_crt(
    pk: &PublicKey,
    p: &BigUint,
    q: &BigUint,
    p_minus_one: &BigUint,
    q_minus_one: &BigUint,
) -> Option<CrtParams> {
    let p_sq = p * p;
    let q_sq = q * q;
    let gp = pk.g().modpow(p_minus_one, &p_sq);
    let gq = pk.g().modpow(q_minus_one, &q_sq);
    let hp = l_function(&gp, p).modinv(p)?;
    let hq = l_function(&gq, q).modinv(q)?;
    let p_inv_q = (p % q).modinv(q)?;
    Some(CrtParams {
        p_sq,
        q_sq,
        p_minus_one: p_minus_one.clone(),
        q_minus_one: q_minus_one.clone(),
        hp,
        hq,
        p_inv_q,
    })
}

// L(x) = (x - 1) / d, exact by construction for x = 1 mod d.
fn l_function(x: &BigUint, d: &BigUint) -> BigUint {
    (x - 1u32) / d
}

fn sample_unit<R: CryptoRng + RngCore>(pk: &PublicKey, rng: &mut R) -> BigUint {
    loop {
        let r = rng.gen_biguint_below(pk.n());
        if !r.is_zero() && r.gcd(pk.n()).is_one() {
            return r;
        }
    }
}

/// Uniform residue in `[0, n)`, used for additive blinds.
pub fn sample_residue<R: CryptoRng + RngCore>(pk: &PublicKey, rng: &mut R) -> BigUint {
    rng.gen_biguint_below(pk.n())
}

/// Encrypt a residue `m` in `[0, n)` under fresh randomness from the OS
/// entropy source.
pub fn encrypt(pk: &PublicKey, m: &BigUint) -> Result<Ciphertext> {
    encrypt_with_rng(pk, m, &mut rand::rngs::OsRng)
}

/// Encrypt with a caller-chosen cryptographic RNG.
pub fn encrypt_with_rng<R: CryptoRng + RngCore>(
    pk: &PublicKey,
    m: &BigUint,
    rng: &mut R,
) -> Result<Ciphertext> {
    if m >= pk.n() {
        return Err(Error::PlaintextRange);
    }
    let r = sample_unit(pk, rng);
    let gm = (1u32 + m * pk.n()) % pk.n_sq();
    let value = (gm * r.modpow(pk.n(), pk.n_sq())) % pk.n_sq();
    Ok(Ciphertext {
        value,
        key_id: pk.key_id,
    })
}

/// Encrypt a signed integer via the upper-half encoding.
pub fn encrypt_signed(pk: &PublicKey, v: &BigInt) -> Result<Ciphertext> {
    encrypt(pk, &pk.encode(v)?)
}

/// Deterministic encryption with unit randomness (`r = 1`). The result is
/// *not* semantically secure on its own; it exists to lift public plaintext
/// constants into homomorphic expressions, and every transmission path
/// rerandomizes before the ciphertext leaves the process.
pub fn trivial_encrypt(pk: &PublicKey, m: &BigUint) -> Result<Ciphertext> {
    if m >= pk.n() {
        return Err(Error::PlaintextRange);
    }
    Ok(Ciphertext {
        value: (1u32 + m * pk.n()) % pk.n_sq(),
        key_id: pk.key_id,
    })
}

/// Decrypt to the plaintext residue in `[0, n)`.
pub fn decrypt(sk: &PrivateKey, c: &Ciphertext) -> Result<BigUint> {
    c.check_key(&sk.pk)?;
    let crt = &sk.crt;
    let cp = c.value.mod_floor(&crt.p_sq);
    let cq = c.value.mod_floor(&crt.q_sq);
    let mp = (l_function(&cp.modpow(&crt.p_minus_one, &crt.p_sq), &sk.p) * &crt.hp) % &sk.p;
    let mq = (l_function(&cq.modpow(&crt.q_minus_one, &crt.q_sq), &sk.q) * &crt.hq) % &sk.q;
    // Garner recombination: m = mp + p * ((mq - mp) * p^-1 mod q).
    let mp_mod_q = &mp % &sk.q;
    let diff = if mq >= mp_mod_q {
        &mq - &mp_mod_q
    } else {
        &sk.q + &mq - &mp_mod_q
    };
    let m = &mp + &sk.p * ((diff * &crt.p_inv_q) % &sk.q);
    Ok(m)
}

/// Decrypt and decode as a signed integer.
pub fn decrypt_signed(sk: &PrivateKey, c: &Ciphertext) -> Result<BigInt> {
    Ok(sk.pk.decode(&decrypt(sk, c)?))
}

/// Homomorphic addition: the returned ciphertext decrypts to `m1 + m2 mod n`.
pub fn add(pk: &PublicKey, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    c1.check_key(pk)?;
    c2.check_key(pk)?;
    Ok(Ciphertext {
        value: (&c1.value * &c2.value) % pk.n_sq(),
        key_id: pk.key_id,
    })
}

/// Add a plaintext residue into a ciphertext without touching randomness:
/// `c * g^m mod n^2`.
pub fn add_plain(pk: &PublicKey, c: &Ciphertext, m: &BigUint) -> Result<Ciphertext> {
    c.check_key(pk)?;
    if m >= pk.n() {
        return Err(Error::PlaintextRange);
    }
    Ok(Ciphertext {
        value: (&c.value * ((1u32 + m * pk.n()) % pk.n_sq())) % pk.n_sq(),
        key_id: pk.key_id,
    })
}

/// Homomorphic scalar multiplication by a signed integer: the result
/// decrypts to `k*m mod n`. `k = -1` is negation; negative scalars go
/// through a modular inverse instead of a full-width exponent.
pub fn scalar_mul(pk: &PublicKey, c: &Ciphertext, k: &BigInt) -> Result<Ciphertext> {
    c.check_key(pk)?;
    let exp = k.magnitude() % pk.n();
    let powered = c.value.modpow(&exp, pk.n_sq());
    let value = if k.is_negative() {
        powered
            .modinv(pk.n_sq())
            .ok_or_else(|| Error::Protocol("ciphertext not invertible mod n^2".into()))?
    } else {
        powered
    };
    Ok(Ciphertext {
        value,
        key_id: pk.key_id,
    })
}

/// Negation shorthand: decrypts to `-m mod n`.
pub fn neg(pk: &PublicKey, c: &Ciphertext) -> Result<Ciphertext> {
    scalar_mul(pk, c, &BigInt::from(-1))
}

/// Refresh a ciphertext's randomness without changing its plaintext. Hides
/// the homomorphic history of a ciphertext before it is transmitted.
pub fn rerandomize(pk: &PublicKey, c: &Ciphertext) -> Result<Ciphertext> {
    rerandomize_with_rng(pk, c, &mut rand::rngs::OsRng)
}

pub fn rerandomize_with_rng<R: CryptoRng + RngCore>(
    pk: &PublicKey,
    c: &Ciphertext,
    rng: &mut R,
) -> Result<Ciphertext> {
    c.check_key(pk)?;
    let r = sample_unit(pk, rng);
    Ok(Ciphertext {
        value: (&c.value * r.modpow(pk.n(), pk.n_sq())) % pk.n_sq(),
        key_id: pk.key_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::sync::OnceLock;

    fn test_key() -> &'static (PublicKey, PrivateKey) {
        static KEY: OnceLock<(PublicKey, PrivateKey)> = OnceLock::new();
        KEY.get_or_init(|| keygen(1024).expect("test keygen"))
    }

    #[test]
    fn keygen_rejects_small_or_odd_bits() {
        assert!(matches!(keygen(1023), Err(Error::KeySize { bits: 1023 })));
        assert!(matches!(keygen(512), Err(Error::KeySize { .. })));
        assert!(matches!(keygen(1025), Err(Error::KeySize { .. })));
    }

    #[test]
    fn roundtrip_zero_and_edges() {
        let (pk, sk) = test_key();
        for m in [
            BigUint::zero(),
            BigUint::one(),
            pk.n() - 1u32,
            pk.n() >> 1,
        ] {
            let c = encrypt(pk, &m).unwrap();
            assert_eq!(decrypt(sk, &c).unwrap(), m);
        }
    }

    #[test]
    fn encrypt_rejects_out_of_range() {
        let (pk, _) = test_key();
        assert!(matches!(
            encrypt(pk, pk.n()),
            Err(Error::PlaintextRange)
        ));
    }

    #[test]
    fn ciphertexts_of_same_message_differ() {
        let (pk, sk) = test_key();
        let m = BigUint::from(7u32);
        let c1 = encrypt(pk, &m).unwrap();
        let c2 = encrypt(pk, &m).unwrap();
        assert_ne!(c1.value(), c2.value());
        assert_eq!(decrypt(sk, &c1).unwrap(), m);
        assert_eq!(decrypt(sk, &c2).unwrap(), m);
    }

    #[test]
    fn signed_encoding_covers_paper_range() {
        let (pk, sk) = test_key();
        let c = encrypt_signed(pk, &BigInt::from(-99)).unwrap();
        assert_eq!(decrypt_signed(sk, &c).unwrap(), BigInt::from(-99));
    }

    #[test]
    fn addition_law() {
        let (pk, sk) = test_key();
        let c3 = encrypt_signed(pk, &BigInt::from(3)).unwrap();
        let c4 = encrypt_signed(pk, &BigInt::from(4)).unwrap();
        let sum = add(pk, &c3, &c4).unwrap();
        assert_eq!(decrypt_signed(sk, &sum).unwrap(), BigInt::from(7));

        let m = encrypt_signed(pk, &BigInt::from(1234)).unwrap();
        let zero = encrypt_signed(pk, &BigInt::zero()).unwrap();
        let same = add(pk, &m, &zero).unwrap();
        assert_eq!(decrypt_signed(sk, &same).unwrap(), BigInt::from(1234));

        let cn = encrypt_signed(pk, &BigInt::from(-5)).unwrap();
        let cp = encrypt_signed(pk, &BigInt::from(5)).unwrap();
        let cancel = add(pk, &cn, &cp).unwrap();
        assert_eq!(decrypt_signed(sk, &cancel).unwrap(), BigInt::zero());
    }

    #[test]
    fn scalar_law() {
        let (pk, sk) = test_key();
        let c = encrypt_signed(pk, &BigInt::from(6)).unwrap();
        let prod = scalar_mul(pk, &c, &BigInt::from(7)).unwrap();
        assert_eq!(decrypt_signed(sk, &prod).unwrap(), BigInt::from(42));

        let ident = scalar_mul(pk, &c, &BigInt::one()).unwrap();
        assert_eq!(decrypt_signed(sk, &ident).unwrap(), BigInt::from(6));

        let c3 = encrypt_signed(pk, &BigInt::from(3)).unwrap();
        let neg2 = scalar_mul(pk, &c3, &BigInt::from(-2)).unwrap();
        assert_eq!(decrypt_signed(sk, &neg2).unwrap(), BigInt::from(-6));
    }

    #[test]
    fn rerandomize_preserves_plaintext_changes_value() {
        let (pk, sk) = test_key();
        let c = encrypt_signed(pk, &BigInt::from(31)).unwrap();
        let r = rerandomize(pk, &c).unwrap();
        assert_ne!(c.value(), r.value());
        assert_eq!(decrypt_signed(sk, &r).unwrap(), BigInt::from(31));
    }

    #[test]
    fn key_mismatch_is_detected() {
        let (pk, sk) = test_key();
        let (other_pk, _) = keygen(1024).unwrap();
        let c = encrypt(&other_pk, &BigUint::from(5u32)).unwrap();
        assert!(matches!(decrypt(sk, &c), Err(Error::KeyMismatch)));
        let ours = encrypt(pk, &BigUint::from(5u32)).unwrap();
        assert!(matches!(add(pk, &ours, &c), Err(Error::KeyMismatch)));
    }

    #[test]
    fn crt_decrypt_matches_lambda_route() {
        // Independent oracle: the textbook decryption
        // m = L(c^lambda mod n^2) * mu mod n.
        let (pk, sk) = test_key();
        let mut rng = rand::thread_rng();
        for _ in 0..25 {
            let m = rng.gen_biguint_below(pk.n());
            let c = encrypt(pk, &m).unwrap();
            let via_crt = decrypt(sk, &c).unwrap();
            let u = c.value().modpow(sk.lambda(), pk.n_sq());
            let via_lambda = (l_function(&u, pk.n()) * sk.mu()) % pk.n();
            assert_eq!(via_crt, via_lambda);
            assert_eq!(via_crt, m);
        }
    }

    #[test]
    fn random_signed_arithmetic_against_plain_oracle() {
        let (pk, sk) = test_key();
        let mut rng = rand::thread_rng();
        for _ in 0..50 {
            let a: i64 = rng.gen_range(-(1i64 << 32)..(1i64 << 32));
            let b: i64 = rng.gen_range(-(1i64 << 32)..(1i64 << 32));
            let k: i64 = rng.gen_range(-1000..1000);
            let ca = encrypt_signed(pk, &BigInt::from(a)).unwrap();
            let cb = encrypt_signed(pk, &BigInt::from(b)).unwrap();
            let sum = add(pk, &ca, &cb).unwrap();
            assert_eq!(decrypt_signed(sk, &sum).unwrap(), BigInt::from(a) + b);
            let prod = scalar_mul(pk, &ca, &BigInt::from(k)).unwrap();
            assert_eq!(
                decrypt_signed(sk, &prod).unwrap(),
                BigInt::from(a) * k,
                "scalar {k} * {a}"
            );
        }
    }

    #[test]
    fn signed_coord_bounds() {
        assert!(SignedCoord::new((1 << 32) - 1).is_ok());
        assert!(SignedCoord::new(-((1 << 32) - 1)).is_ok());
        assert!(matches!(
            SignedCoord::new(1 << 32),
            Err(Error::CoordRange { .. })
        ));
    }
}
