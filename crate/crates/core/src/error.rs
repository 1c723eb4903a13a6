use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("key size {bits} unsupported: need an even bit length >= 1024")]
    KeySize { bits: u64 },

    #[error("plaintext out of range [0, n)")]
    PlaintextRange,

    #[error("signed value needs {bits} bits, exceeding the bound of {bound} bits")]
    SignedRange { bits: u64, bound: u64 },

    #[error("ciphertext bound to a different public key")]
    KeyMismatch,

    #[error("blinding bound violated: t_max {t_max} + kappa {kappa} + 2 must stay below {n_bits}-bit modulus")]
    BlindingBound { t_max: u32, kappa: u32, n_bits: u64 },

    #[error("coordinate {value} outside |v| < 2^{bound}")]
    CoordRange { value: i64, bound: u32 },

    #[error("a path needs at least one point")]
    EmptyPath,

    #[error("frame of {len} bytes exceeds the 1 MiB cap")]
    FrameTooLarge { len: u32 },

    #[error("unknown message tag 0x{tag:02x}")]
    UnknownTag { tag: u8 },

    #[error("expected tag 0x{expected:02x}, got 0x{got:02x}")]
    UnexpectedTag { expected: u8, got: u8 },

    #[error("malformed payload: {0}")]
    Malformed(&'static str),

    #[error("protocol failure: {0}")]
    Protocol(String),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
