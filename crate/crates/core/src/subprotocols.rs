//! Interactive two-party primitives.
//!
//! Both run between a requester (Alice, who holds only ciphertexts under the
//! responder's key) and a responder (Bob, who holds the private key):
//!
//! * `secure_mult` — ciphertext×ciphertext multiplication by additive
//!   blinding: Alice sends `[[x+a]]`, `[[y+b]]`; Bob decrypts, multiplies and
//!   returns `[[(x+a)(y+b)]]`; Alice strips the cross terms homomorphically.
//! * `secure_sign` — three-way sign of an encrypted bounded value: Alice
//!   multiplies by a random `s in [1, 2^KAPPA]` and a uniform sign flip, Bob
//!   decrypts the blinded value and answers with its sign, Alice un-flips.
//!
//! What each side can observe is deliberate and documented: Bob sees
//! uniformly blinded residues in `secure_mult`, and in `secure_sign` a value
//! whose magnitude is multiplicatively blinded and whose sign is a coin
//! flip — except that a zero operand is visibly zero (counted as a
//! `zero_event`). Alice learns exactly the sign outcomes she asks for.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::paillier::{
    self, add, add_plain, decrypt, decrypt_signed, encrypt, neg, rerandomize, scalar_mul,
    trivial_encrypt, Ciphertext, PrivateKey, PublicKey,
};
use crate::wire::{self, tag, CountedChannel};

/// Statistical blinding bits for the sign protocol's multiplicative blind.
pub const KAPPA: u32 = 40;

/// Default bit bound on subprotocol operand magnitude. Covers orientation
/// determinants of 32-bit coordinates (2t + 2 bits) with headroom.
pub const T_MAX_DEFAULT: u32 = 72;

/// Additive blinds for one `secure_mult` invocation; fresh uniform residues,
/// never reused, never transmitted in the clear.
struct MultBlinding {
    a: BigUint,
    b: BigUint,
}

/// Multiplicative blind and sign flip for one `secure_sign` invocation.
struct SignBlinding {
    s: BigUint,
    flip: bool,
}

/// Requester/responder context: the peer's public key, the counted channel
/// all subprotocol traffic flows through, and the operand bit bound both
/// parties agreed on.
pub struct ProtocolCtx<S> {
    pk: PublicKey,
    channel: CountedChannel<S>,
    t_max: u32,
    mult_calls: u64,
    sign_calls: u64,
    zero_events: u64,
    blind_audit: Option<Vec<BigUint>>,
}

impl<S: std::io::Read + std::io::Write> ProtocolCtx<S> {
    pub fn new(pk: PublicKey, channel: CountedChannel<S>, t_max: u32) -> Result<ProtocolCtx<S>> {
        check_blinding_bound(&pk, t_max)?;
        Ok(ProtocolCtx {
            pk,
            channel,
            t_max,
            mult_calls: 0,
            sign_calls: 0,
            zero_events: 0,
            blind_audit: None,
        })
    }

    pub fn pk(&self) -> &PublicKey {
        &self.pk
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    pub fn channel(&self) -> &CountedChannel<S> {
        &self.channel
    }

    pub fn channel_mut(&mut self) -> &mut CountedChannel<S> {
        &mut self.channel
    }

    pub fn mult_calls(&self) -> u64 {
        self.mult_calls
    }

    pub fn sign_calls(&self) -> u64 {
        self.sign_calls
    }

    pub fn zero_events(&self) -> u64 {
        self.zero_events
    }

    /// Record every blind drawn from here on; test hook for the
    /// freshness invariant.
    pub fn enable_blind_audit(&mut self) {
        self.blind_audit = Some(Vec::new());
    }

    pub fn blind_audit(&self) -> Option<&[BigUint]> {
        self.blind_audit.as_deref()
    }

    fn record_blind(&mut self, v: &BigUint) {
        if let Some(log) = self.blind_audit.as_mut() {
            log.push(v.clone());
        }
    }

    // ----- requester (Alice) side -----

    /// Product of two ciphertexts via one blinded round trip. Both operands
    /// must encode signed values within the `t_max` bound.
    pub fn secure_mult(&mut self, cx: &Ciphertext, cy: &Ciphertext) -> Result<Ciphertext> {
        check_blinding_bound(&self.pk, self.t_max)?;
        let blinding = self.sample_mult_blinding();
        let ca = rerandomize(&self.pk, &add_plain(&self.pk, cx, &blinding.a)?)?;
        let cb = rerandomize(&self.pk, &add_plain(&self.pk, cy, &blinding.b)?)?;

        let mut payload = Vec::new();
        wire::write_ciphertext(&mut payload, &self.pk, &ca);
        wire::write_ciphertext(&mut payload, &self.pk, &cb);
        self.channel.send_frame(tag::MUL_REQ, &payload)?;

        let resp = self.channel.expect_frame(tag::MUL_RESP)?;
        let blinded_product = wire::deserialize_ciphertext(&self.pk, &resp)?;

        // [[xy]] = [[(x+a)(y+b)]] + [[-b*x]] + [[-a*y]] + [[-ab]]
        let minus_bx = scalar_mul(&self.pk, cx, &-BigInt::from(blinding.b.clone()))?;
        let minus_ay = scalar_mul(&self.pk, cy, &-BigInt::from(blinding.a.clone()))?;
        let ab = (&blinding.a * &blinding.b) % self.pk.n();
        let minus_ab = trivial_encrypt(&self.pk, &((self.pk.n() - &ab) % self.pk.n()))?;

        let mut acc = add(&self.pk, &blinded_product, &minus_bx)?;
        acc = add(&self.pk, &acc, &minus_ay)?;
        acc = add(&self.pk, &acc, &minus_ab)?;
        self.mult_calls += 1;
        Ok(acc)
    }

    /// Sign of an encrypted value `d` with `|d| < 2^t_max`; returns -1, 0 or
    /// +1 to the requester only.
    pub fn secure_sign(&mut self, cd: &Ciphertext) -> Result<i8> {
        check_blinding_bound(&self.pk, self.t_max)?;
        let blinding = self.sample_sign_blinding();
        let k = if blinding.flip {
            -BigInt::from(blinding.s.clone())
        } else {
            BigInt::from(blinding.s.clone())
        };
        let masked = rerandomize(&self.pk, &scalar_mul(&self.pk, cd, &k)?)?;

        let payload = wire::serialize_ciphertext(&self.pk, &masked);
        self.channel.send_frame(tag::SIGN_REQ, &payload)?;

        let resp = self.channel.expect_frame(tag::SIGN_RESP)?;
        if resp.len() != 1 {
            return Err(Error::Malformed("sign response must be one byte"));
        }
        let sign = resp[0] as i8;
        if !(-1..=1).contains(&sign) {
            return Err(Error::Malformed("sign response outside {-1,0,+1}"));
        }
        self.sign_calls += 1;
        Ok(if blinding.flip { -sign } else { sign })
    }

    /// `1{x <= y}`, computed as `secure_sign(x - y) <= 0`.
    pub fn secure_leq(&mut self, cx: &Ciphertext, cy: &Ciphertext) -> Result<bool> {
        let diff = add(&self.pk, cx, &neg(&self.pk, cy)?)?;
        Ok(self.secure_sign(&diff)? <= 0)
    }

    /// `1{x = y}`, computed as `secure_sign(x - y) = 0`.
    pub fn secure_equal(&mut self, cx: &Ciphertext, cy: &Ciphertext) -> Result<bool> {
        let diff = add(&self.pk, cx, &neg(&self.pk, cy)?)?;
        Ok(self.secure_sign(&diff)? == 0)
    }

    /// Finish the requester side of a session.
    pub fn send_done(&mut self) -> Result<()> {
        self.channel.send_frame(tag::DONE, &[])
    }

    fn sample_mult_blinding(&mut self) -> MultBlinding {
        let a = paillier::sample_residue(&self.pk, &mut rand::rngs::OsRng);
        let b = paillier::sample_residue(&self.pk, &mut rand::rngs::OsRng);
        self.record_blind(&a);
        self.record_blind(&b);
        MultBlinding { a, b }
    }

    fn sample_sign_blinding(&mut self) -> SignBlinding {
        let mut rng = rand::rngs::OsRng;
        // s uniform in [1, 2^KAPPA]
        let s = BigUint::from(rng.gen_range(1u64..=(1u64 << KAPPA)));
        let flip = rng.gen::<bool>();
        self.record_blind(&s);
        SignBlinding { s, flip }
    }

    // ----- responder (Bob) side -----

    /// One blinded-multiplication round: decrypt both operands, multiply
    /// mod n, reply with a fresh encryption. Retains nothing.
    pub fn mult_responder(&mut self, sk: &PrivateKey, payload: &[u8]) -> Result<()> {
        let mut r = wire::ByteReader::new(payload);
        let ca = wire::read_ciphertext(&mut r, &self.pk)?;
        let cb = wire::read_ciphertext(&mut r, &self.pk)?;
        r.finish()?;
        let u = decrypt(sk, &ca)?;
        let v = decrypt(sk, &cb)?;
        let product = (u * v) % self.pk.n();
        let reply = encrypt(&self.pk, &product)?;
        let out = wire::serialize_ciphertext(&self.pk, &reply);
        self.channel.send_frame(tag::MUL_RESP, &out)?;
        self.mult_calls += 1;
        Ok(())
    }

    /// One sign round: decrypt the blinded operand, answer with its sign.
    /// The only event worth logging is whether it was exactly zero.
    pub fn sign_responder(&mut self, sk: &PrivateKey, payload: &[u8]) -> Result<()> {
        let masked = wire::deserialize_ciphertext(&self.pk, payload)?;
        let d = decrypt_signed(sk, &masked)?;
        let sign: i8 = if d.is_zero() {
            self.zero_events += 1;
            0
        } else if d.sign() == num_bigint::Sign::Minus {
            -1
        } else {
            1
        };
        self.channel.send_frame(tag::SIGN_RESP, &[sign as u8])?;
        self.sign_calls += 1;
        Ok(())
    }

    /// Responder service loop: answer MUL_REQ and SIGN_REQ frames until the
    /// peer signals DONE. Any other tag aborts with a diagnostic.
    pub fn serve_requests(&mut self, sk: &PrivateKey) -> Result<()> {
        loop {
            let frame = self.channel.recv_frame()?;
            match frame.tag {
                tag::MUL_REQ => self.mult_responder(sk, &frame.payload)?,
                tag::SIGN_REQ => self.sign_responder(sk, &frame.payload)?,
                tag::DONE => return Ok(()),
                other => {
                    return Err(Error::Protocol(format!(
                        "responder got unexpected tag 0x{other:02x}"
                    )))
                }
            }
        }
    }
}

fn check_blinding_bound(pk: &PublicKey, t_max: u32) -> Result<()> {
    // s*|d| must stay clear of the encoding threshold: t_max + KAPPA + 2
    // bits below the modulus.
    if u64::from(t_max) + u64::from(KAPPA) + 2 >= pk.bits() {
        return Err(Error::BlindingBound {
            t_max,
            kappa: KAPPA,
            n_bits: pk.bits(),
        });
    }
    Ok(())
}
