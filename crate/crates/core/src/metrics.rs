use serde::{Deserialize, Serialize};

/// Per-session accounting: wall time, both traffic directions, and
/// subprotocol call counts. The headline traffic number is
/// `bytes_out + bytes_in`, i.e. the total both parties wrote to the socket,
/// which both ends agree on by conservation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub wall_time_s: f64,
    pub bytes_out: u64,
    pub bytes_in: u64,
    pub mult_calls: u64,
    pub sign_calls: u64,
    /// Blinded sign operands that decrypted to exactly zero on the responder
    /// side (collinearity/equality events); the only thing the responder
    /// learns beyond traffic shape.
    pub zero_events: u64,
}

impl Metrics {
    pub fn bytes_total(&self) -> u64 {
        self.bytes_out + self.bytes_in
    }
}
