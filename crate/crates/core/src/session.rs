//! Alice/Bob protocol sessions over a counted channel.
//!
//! Bob encrypts his route under his own key, sends `PUBKEY` then
//! `ENC_ROUTE`, and serves blinded multiplication/sign requests until Alice
//! signals `DONE`. Alice receives both, runs the encrypted intersection
//! procedure against her plaintext route, and keeps the collision set to
//! herself: no frame toward Bob ever encodes a comparison outcome. A party
//! that wants the symmetric answer runs the protocol again with roles
//! switched.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{compare_paths, EncPath, Path};
use crate::metrics::Metrics;
use crate::paillier::PrivateKey;
use crate::subprotocols::{ProtocolCtx, T_MAX_DEFAULT};
use crate::wire::{self, tag, CountedChannel};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BobState {
    AwaitConnect,
    SentRoute,
    Serving,
    Done,
}

/// Responder role: owns the key pair and the plaintext route.
pub struct BobSession<'a> {
    sk: &'a PrivateKey,
    path: &'a Path,
    state: BobState,
}

impl<'a> BobSession<'a> {
    pub fn new(sk: &'a PrivateKey, path: &'a Path) -> BobSession<'a> {
        BobSession {
            sk,
            path,
            state: BobState::AwaitConnect,
        }
    }

    /// Run one full session over an established connection.
    pub fn run<S: Read + Write>(mut self, channel: CountedChannel<S>) -> Result<BobOutcome> {
        let started = Instant::now();
        let pk = self.sk.public().clone();
        let enc_route = EncPath::encrypt(&pk, self.path)?;

        let mut ctx = ProtocolCtx::new(pk.clone(), channel, T_MAX_DEFAULT)?;
        ctx.channel_mut()
            .send_frame(tag::PUBKEY, &wire::serialize_pubkey(&pk))?;
        ctx.channel_mut()
            .send_frame(tag::ENC_ROUTE, &wire::serialize_enc_path(&pk, &enc_route))?;
        self.state = BobState::SentRoute;

        self.state = BobState::Serving;
        ctx.serve_requests(self.sk)
            .map_err(|e| Error::Protocol(format!("session aborted: {e}")))?;
        self.state = BobState::Done;

        Ok(BobOutcome {
            metrics: Metrics {
                wall_time_s: started.elapsed().as_secs_f64(),
                bytes_out: ctx.channel().bytes_out(),
                bytes_in: ctx.channel().bytes_in(),
                mult_calls: ctx.mult_calls(),
                sign_calls: ctx.sign_calls(),
                zero_events: ctx.zero_events(),
            },
            tags_in: ctx.channel().tags_in().to_vec(),
        })
    }
}

/// What Bob is left with after a session: transcript metrics and the tags of
/// every frame he received. Note what is absent — there is no collision
/// information on this side.
#[derive(Clone, Debug)]
pub struct BobOutcome {
    pub metrics: Metrics,
    pub tags_in: Vec<u8>,
}

/// Everything Alice knows after a session: which of her segments collide,
/// the transcript metrics, and the phase split (receiving the peer key and
/// route vs. running the comparison).
#[derive(Clone, Debug)]
pub struct AliceOutcome {
    pub collisions: BTreeSet<usize>,
    pub metrics: Metrics,
    pub setup_s: f64,
    pub compare_s: f64,
    /// Tags of every frame received, for transcript audits.
    pub tags_in: Vec<u8>,
}

/// Requester role: holds only her own plaintext route; learns the peer's
/// public key and encrypted route over the wire.
pub struct AliceSession<'a> {
    path: &'a Path,
}

impl<'a> AliceSession<'a> {
    pub fn new(path: &'a Path) -> AliceSession<'a> {
        AliceSession { path }
    }

    pub fn run<S: Read + Write>(self, mut channel: CountedChannel<S>) -> Result<AliceOutcome> {
        let started = Instant::now();
        let pk_bytes = channel.expect_frame(tag::PUBKEY)?;
        let pk = wire::deserialize_pubkey(&pk_bytes)?;
        let route_bytes = channel.expect_frame(tag::ENC_ROUTE)?;
        let enc_route = wire::deserialize_enc_path(&pk, &route_bytes)?;
        let setup_s = started.elapsed().as_secs_f64();

        let compare_started = Instant::now();
        let mut ctx = ProtocolCtx::new(pk, channel, T_MAX_DEFAULT)?;
        let collisions = compare_paths(&mut ctx, self.path, &enc_route)?;
        ctx.send_done()?;
        let compare_s = compare_started.elapsed().as_secs_f64();

        Ok(AliceOutcome {
            collisions,
            metrics: Metrics {
                wall_time_s: started.elapsed().as_secs_f64(),
                bytes_out: ctx.channel().bytes_out(),
                bytes_in: ctx.channel().bytes_in(),
                mult_calls: ctx.mult_calls(),
                sign_calls: ctx.sign_calls(),
                zero_events: ctx.zero_events(),
            },
            setup_s,
            compare_s,
            tags_in: ctx.channel().tags_in().to_vec(),
        })
    }
}
