//! Two-party privacy-preserving comparison of polyline flight paths.
//!
//! Bob holds a Paillier key pair and a route; Alice holds her own route.
//! Bob ships his public key and an encrypted copy of his route to Alice,
//! who evaluates the segment-intersection decision procedure on ciphertexts,
//! calling back to Bob only for blinded multiplications and blinded sign
//! checks. At the end Alice knows which of *her* segments would collide;
//! Bob learns nothing beyond the fact that the protocol ran.
//!
//! Crate layout mirrors the protocol stack:
//!
//! * [`paillier`] — the additively homomorphic cryptosystem and the signed
//!   plaintext encoding.
//! * [`wire`] — length-prefixed binary framing with exact byte accounting.
//! * [`subprotocols`] — interactive primitives: ciphertext×ciphertext
//!   multiplication and the blinded sign/comparison round.
//! * [`geometry`] — the plaintext intersection oracle and its encrypted
//!   counterpart.
//! * [`session`] — Alice/Bob session state machines over a counted channel.
//! * [`sim`] — desk-scale flight simulation with altitude deconfliction and
//!   the raster brute-force probe analysis.

pub mod error;
pub mod geometry;
pub mod metrics;
pub mod paillier;
pub mod session;
pub mod sim;
pub mod subprotocols;
pub mod wire;

pub use error::{Error, Result};
pub use geometry::{
    compare_paths, determinant_plain, enc_intersect, enc_on_segment, enc_orientation,
    intersect_plain, on_segment_plain, orientation_plain, EncPath, EncPoint, EncSegment,
    Orientation, Path, Point, PointRef, Segment, SegmentRef,
};
pub use metrics::Metrics;
pub use paillier::{
    keygen, keygen_with_rng, Ciphertext, KeyId, PrivateKey, PublicKey, SignedCoord, COORD_BITS,
    MIN_KEY_BITS,
};
pub use session::{AliceOutcome, AliceSession, BobOutcome, BobSession};
pub use sim::{
    brute_force_probe, flight_sim, raster_line_count, raster_path, DroneSpec, FlightConfig,
    ProbeConfig, ProbeReport, TraceLog, TraceRecord,
};
pub use subprotocols::{ProtocolCtx, KAPPA, T_MAX_DEFAULT};
pub use wire::{duplex, tag, CountedChannel, DuplexStream, Frame, MAX_FRAME_LEN};
