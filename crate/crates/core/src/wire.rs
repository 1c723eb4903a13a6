//! Length-prefixed binary framing with exact byte accounting.
//!
//! Every frame is `4-byte big-endian payload length | 1-byte tag | payload`.
//! Counters include the 5 header bytes, so totals reported at session end
//! are exactly the bytes each party wrote to its transport.

use std::io::{Read, Write};
use std::sync::mpsc::{channel, Receiver, Sender};

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::geometry::{EncPath, EncPoint};
use crate::paillier::{Ciphertext, PublicKey};

/// Message tags. Unknown tags are a protocol error, never skipped.
pub mod tag {
    pub const PUBKEY: u8 = 0x01;
    pub const ENC_ROUTE: u8 = 0x02;
    pub const MUL_REQ: u8 = 0x10;
    pub const MUL_RESP: u8 = 0x11;
    pub const SIGN_REQ: u8 = 0x20;
    pub const SIGN_RESP: u8 = 0x21;
    pub const DONE: u8 = 0x7F;

    pub fn is_known(t: u8) -> bool {
        matches!(t, PUBKEY | ENC_ROUTE | MUL_REQ | MUL_RESP | SIGN_REQ | SIGN_RESP | DONE)
    }
}

/// Largest accepted payload. The biggest legal frame is an encrypted route;
/// the cap bounds memory exposure to a dishonest peer.
pub const MAX_FRAME_LEN: u32 = 1 << 20;

pub const FRAME_HEADER_LEN: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub tag: u8,
    pub payload: Vec<u8>,
}

/// A bidirectional byte stream with monotone byte counters and a tag journal
/// for transcript audits. Counters never reset mid-session.
pub struct CountedChannel<S> {
    stream: S,
    bytes_out: u64,
    bytes_in: u64,
    tags_out: Vec<u8>,
    tags_in: Vec<u8>,
}

impl<S: Read + Write> CountedChannel<S> {
    pub fn new(stream: S) -> CountedChannel<S> {
        CountedChannel {
            stream,
            bytes_out: 0,
            bytes_in: 0,
            tags_out: Vec::new(),
            tags_in: Vec::new(),
        }
    }

    pub fn send_frame(&mut self, tag: u8, payload: &[u8]) -> Result<()> {
        if payload.len() as u64 > MAX_FRAME_LEN as u64 {
            return Err(Error::FrameTooLarge {
                len: payload.len() as u32,
            });
        }
        let len = payload.len() as u32;
        self.stream.write_all(&len.to_be_bytes())?;
        self.stream.write_all(&[tag])?;
        self.stream.write_all(payload)?;
        self.stream.flush()?;
        self.bytes_out += FRAME_HEADER_LEN + payload.len() as u64;
        self.tags_out.push(tag);
        Ok(())
    }

    pub fn recv_frame(&mut self) -> Result<Frame> {
        let mut len_buf = [0u8; 4];
        self.stream.read_exact(&mut len_buf)?;
        let len = u32::from_be_bytes(len_buf);
        if len > MAX_FRAME_LEN {
            return Err(Error::FrameTooLarge { len });
        }
        let mut tag_buf = [0u8; 1];
        self.stream.read_exact(&mut tag_buf)?;
        let tag = tag_buf[0];
        if !tag::is_known(tag) {
            return Err(Error::UnknownTag { tag });
        }
        let mut payload = vec![0u8; len as usize];
        self.stream.read_exact(&mut payload)?;
        self.bytes_in += FRAME_HEADER_LEN + len as u64;
        self.tags_in.push(tag);
        Ok(Frame { tag, payload })
    }

    /// Receive a frame and require a specific tag.
    pub fn expect_frame(&mut self, expected: u8) -> Result<Vec<u8>> {
        let frame = self.recv_frame()?;
        if frame.tag != expected {
            return Err(Error::UnexpectedTag {
                expected,
                got: frame.tag,
            });
        }
        Ok(frame.payload)
    }

    pub fn bytes_out(&self) -> u64 {
        self.bytes_out
    }

    pub fn bytes_in(&self) -> u64 {
        self.bytes_in
    }

    pub fn tags_out(&self) -> &[u8] {
        &self.tags_out
    }

    pub fn tags_in(&self) -> &[u8] {
        &self.tags_in
    }
}

// ---------------------------------------------------------------------------
// Big-integer and protocol-object serialization.
//
// Big integers travel as a 4-byte big-endian length prefix followed by the
// big-endian magnitude. Residues carry no sign; signedness lives entirely in
// the plaintext encoding. Ciphertext residues are padded to the width of n^2
// so frame sizes are deterministic for a given key size.
// ---------------------------------------------------------------------------

pub fn write_bigint(buf: &mut Vec<u8>, v: &BigUint) {
    let bytes = v.to_bytes_be();
    buf.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    buf.extend_from_slice(&bytes);
}

fn write_bigint_padded(buf: &mut Vec<u8>, v: &BigUint, width: usize) {
    let bytes = v.to_bytes_be();
    debug_assert!(bytes.len() <= width);
    buf.extend_from_slice(&(width as u32).to_be_bytes());
    buf.resize(buf.len() + (width - bytes.len()), 0);
    buf.extend_from_slice(&bytes);
}

/// Byte width of one serialized ciphertext residue under `pk` (the width of
/// n^2), excluding the 4-byte length prefix.
pub fn ciphertext_width(pk: &PublicKey) -> usize {
    ((2 * pk.bits() + 7) / 8) as usize
}

pub struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> ByteReader<'a> {
        ByteReader { data, pos: 0 }
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.data.len() {
            return Err(Error::Malformed("truncated payload"));
        }
        let slice = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    pub fn read_u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn read_bigint(&mut self) -> Result<BigUint> {
        let len = self.read_u32()? as usize;
        Ok(BigUint::from_bytes_be(self.take(len)?))
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Malformed("trailing bytes in payload"));
        }
        Ok(())
    }
}

pub fn serialize_pubkey(pk: &PublicKey) -> Vec<u8> {
    let mut buf = Vec::new();
    write_bigint(&mut buf, pk.n());
    buf
}

pub fn deserialize_pubkey(payload: &[u8]) -> Result<PublicKey> {
    let mut r = ByteReader::new(payload);
    let n = r.read_bigint()?;
    r.finish()?;
    PublicKey::from_modulus(n)
}

pub fn serialize_ciphertext(pk: &PublicKey, c: &Ciphertext) -> Vec<u8> {
    let mut buf = Vec::new();
    write_ciphertext(&mut buf, pk, c);
    buf
}

pub fn write_ciphertext(buf: &mut Vec<u8>, pk: &PublicKey, c: &Ciphertext) {
    write_bigint_padded(buf, c.value(), ciphertext_width(pk));
}

pub fn read_ciphertext(r: &mut ByteReader<'_>, pk: &PublicKey) -> Result<Ciphertext> {
    let value = r.read_bigint()?;
    if &value >= pk.n_sq() {
        return Err(Error::Malformed("ciphertext residue >= n^2"));
    }
    Ok(Ciphertext::from_parts(value, pk.key_id()))
}

pub fn deserialize_ciphertext(pk: &PublicKey, payload: &[u8]) -> Result<Ciphertext> {
    let mut r = ByteReader::new(payload);
    let c = read_ciphertext(&mut r, pk)?;
    r.finish()?;
    Ok(c)
}

/// Encrypted route layout: 4-byte point count, then x and y ciphertexts per
/// point.
pub fn serialize_enc_path(pk: &PublicKey, path: &EncPath) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&(path.points().len() as u32).to_be_bytes());
    for point in path.points() {
        write_ciphertext(&mut buf, pk, &point.x);
        write_ciphertext(&mut buf, pk, &point.y);
    }
    buf
}

pub fn deserialize_enc_path(pk: &PublicKey, payload: &[u8]) -> Result<EncPath> {
    let mut r = ByteReader::new(payload);
    let count = r.read_u32()? as usize;
    if count == 0 {
        return Err(Error::EmptyPath);
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let x = read_ciphertext(&mut r, pk)?;
        let y = read_ciphertext(&mut r, pk)?;
        points.push(EncPoint::new(x, y)?);
    }
    r.finish()?;
    EncPath::new(points)
}

// ---------------------------------------------------------------------------
// In-memory duplex stream for loopback sessions and tests.
// ---------------------------------------------------------------------------

/// One end of an in-process bidirectional byte pipe. Reads block until the
/// peer writes or hangs up; a closed peer reads as EOF.
pub struct DuplexStream {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    buf: Vec<u8>,
    pos: usize,
}

/// Create a connected pair of in-memory streams.
pub fn duplex() -> (DuplexStream, DuplexStream) {
    let (tx_a, rx_b) = channel();
    let (tx_b, rx_a) = channel();
    (
        DuplexStream {
            tx: tx_a,
            rx: rx_a,
            buf: Vec::new(),
            pos: 0,
        },
        DuplexStream {
            tx: tx_b,
            rx: rx_b,
            buf: Vec::new(),
            pos: 0,
        },
    )
}

impl Read for DuplexStream {
    fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
        if self.pos >= self.buf.len() {
            match self.rx.recv() {
                Ok(chunk) => {
                    self.buf = chunk;
                    self.pos = 0;
                }
                Err(_) => return Ok(0), // peer hung up
            }
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

impl Write for DuplexStream {
    fn write(&mut self, data: &[u8]) -> std::io::Result<usize> {
        self.tx.send(data.to_vec()).map_err(|_| {
            std::io::Error::new(std::io::ErrorKind::BrokenPipe, "duplex peer hung up")
        })?;
        Ok(data.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_roundtrip_and_counting() {
        let (a, b) = duplex();
        let mut alice = CountedChannel::new(a);
        let mut bob = CountedChannel::new(b);
        alice.send_frame(tag::DONE, b"xyz").unwrap();
        assert_eq!(alice.bytes_out(), 5 + 3);
        let frame = bob.recv_frame().unwrap();
        assert_eq!(frame.tag, tag::DONE);
        assert_eq!(frame.payload, b"xyz");
        assert_eq!(bob.bytes_in(), 5 + 3);
        assert_eq!(bob.tags_in(), &[tag::DONE]);
    }

    #[test]
    fn unknown_tag_is_rejected() {
        let (mut a, b) = duplex();
        let mut bob = CountedChannel::new(b);
        // 0x55 is not a protocol tag; craft the raw frame by hand.
        a.write_all(&3u32.to_be_bytes()).unwrap();
        a.write_all(&[0x55]).unwrap();
        a.write_all(b"abc").unwrap();
        assert!(matches!(
            bob.recv_frame(),
            Err(Error::UnknownTag { tag: 0x55 })
        ));
    }

    #[test]
    fn oversized_frame_is_rejected_on_recv() {
        let (mut a, b) = duplex();
        let mut bob = CountedChannel::new(b);
        let len = (MAX_FRAME_LEN + 1).to_be_bytes();
        a.write_all(&len).unwrap();
        a.write_all(&[tag::DONE]).unwrap();
        assert!(matches!(
            bob.recv_frame(),
            Err(Error::FrameTooLarge { .. })
        ));
    }

    #[test]
    fn closed_peer_reads_as_error() {
        let (a, b) = duplex();
        let mut bob = CountedChannel::new(b);
        drop(a);
        assert!(matches!(bob.recv_frame(), Err(Error::Io(_))));
    }

    #[test]
    fn bigint_roundtrip() {
        use num_bigint::BigUint;
        let v = BigUint::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let mut buf = Vec::new();
        write_bigint(&mut buf, &v);
        let mut r = ByteReader::new(&buf);
        assert_eq!(r.read_bigint().unwrap(), v);
        r.finish().unwrap();
    }
}
