//! Binary serialization of sketches.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "BBMH"
//! 4       1     format version (currently 1)
//! 5       1     kind: 0 full-width, 1 b-bit, 2 xor-folded
//! 6       1     m, universe width in bits
//! 7       1     b, bits per sample (= m for kind 0, = 1 for kind 2)
//! 8       4     k, sample count
//! 12      8     f, size of the sketched set
//! 20      8     permutation family seed
//! 28      ...   payload: kind 0 stores k u64 minima, kinds 1 and 2 store
//!               the packed sample stream (pad bits zero)
//! end-4   4     CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! Corruption anywhere in header or payload fails the checksum; decode never
//! panics on arbitrary input.

use alloc::vec::Vec;

use crate::error::{Error, ParseError, Result};
use crate::sketch::{BbitSketch, HalfBitSketch, MinwiseSketch, Sketch};

const MAGIC: [u8; 4] = *b"BBMH";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 28;

const KIND_MINWISE: u8 = 0;
const KIND_BBIT: u8 = 1;
const KIND_HALF: u8 = 2;

const fn crc_table() -> [u32; 16] {
    let mut table = [0u32; 16];
    let mut i = 0;
    while i < 16 {
        let mut c = i as u32;
        let mut j = 0;
        while j < 4 {
            c = if c & 1 == 1 { (c >> 1) ^ 0xEDB8_8320 } else { c >> 1 };
            j += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
}

const CRC_TABLE: [u32; 16] = crc_table();

/// CRC-32 (IEEE reflected polynomial), nibble at a time.
pub(crate) fn crc32(data: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &byte in data {
        crc ^= u32::from(byte);
        crc = (crc >> 4) ^ CRC_TABLE[(crc & 0xF) as usize];
        crc = (crc >> 4) ^ CRC_TABLE[(crc & 0xF) as usize];
    }
    !crc
}

struct Header {
    kind: u8,
    domain_bits: u32,
    b: u32,
    k: u32,
    f: u64,
    seed: u64,
}

fn encode(kind: u8, domain_bits: u32, b: u32, k: u32, f: u64, seed: u64, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(kind);
    out.push(domain_bits as u8);
    out.push(b as u8);
    out.extend_from_slice(&k.to_le_bytes());
    out.extend_from_slice(&f.to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(payload);
    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("slice length"))
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("slice length"))
}

fn parse_header(bytes: &[u8]) -> core::result::Result<Header, ParseError> {
    if bytes.len() < HEADER_LEN + 4 {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(ParseError::BadMagic);
        }
        return Err(ParseError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(ParseError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(ParseError::UnsupportedVersion(bytes[4]));
    }
    let stored = read_u32(bytes, bytes.len() - 4);
    if crc32(&bytes[..bytes.len() - 4]) != stored {
        return Err(ParseError::ChecksumMismatch);
    }
    let kind = bytes[5];
    if kind > KIND_HALF {
        return Err(ParseError::BadKind(kind));
    }
    let domain_bits = u32::from(bytes[6]);
    let b = u32::from(bytes[7]);
    let k = read_u32(bytes, 8);
    let f = read_u64(bytes, 12);
    let seed = read_u64(bytes, 20);
    if domain_bits == 0 || domain_bits > 64 {
        return Err(ParseError::BadHeader("universe width outside 1..=64"));
    }
    if k == 0 {
        return Err(ParseError::BadHeader("zero sample count"));
    }
    if f == 0 {
        return Err(ParseError::BadHeader("zero set size"));
    }
    match kind {
        KIND_MINWISE if b != domain_bits => {
            return Err(ParseError::BadHeader("full-width sketch with b != m"))
        }
        KIND_BBIT if b == 0 || b > domain_bits => {
            return Err(ParseError::BadHeader("bits per sample outside 1..=m"))
        }
        KIND_HALF if b != 1 => {
            return Err(ParseError::BadHeader("xor-folded sketch with b != 1"))
        }
        _ => {}
    }
    let payload_len = match kind {
        KIND_MINWISE => u64::from(k) * 8,
        _ => (u64::from(k) * u64::from(b)).div_ceil(8),
    };
    let actual = (bytes.len() - HEADER_LEN - 4) as u64;
    if actual < payload_len {
        return Err(ParseError::Truncated);
    }
    if actual > payload_len {
        return Err(ParseError::BadHeader("trailing data after payload"));
    }
    Ok(Header { kind, domain_bits, b, k, f, seed })
}

/// Pad bits past `k * b` must be zero so layouts compare byte-for-byte.
fn check_padding(packed: &[u8], k: u32, b: u32) -> core::result::Result<(), ParseError> {
    let used = k as usize * b as usize;
    let last_bits = used % 8;
    if last_bits != 0 {
        let last = packed[packed.len() - 1];
        if last >> last_bits != 0 {
            return Err(ParseError::BadHeader("nonzero padding bits"));
        }
    }
    Ok(())
}

impl Sketch {
    /// Serializes any sketch to the framed byte format.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Sketch::Minwise(s) => {
                let mut payload = Vec::with_capacity(s.mins.len() * 8);
                for &min in &s.mins {
                    payload.extend_from_slice(&min.to_le_bytes());
                }
                encode(KIND_MINWISE, s.domain_bits, s.domain_bits, s.k(), s.f, s.seed, &payload)
            }
            Sketch::Bbit(s) => {
                encode(KIND_BBIT, s.domain_bits, s.b, s.k, s.f, s.seed, &s.packed)
            }
            Sketch::Half(s) => encode(KIND_HALF, s.domain_bits, 1, s.k, s.f, s.seed, &s.packed),
        }
    }

    /// Decodes any sketch, validating framing, checksum and invariants.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = parse_header(bytes)?;
        let payload = &bytes[HEADER_LEN..bytes.len() - 4];
        match header.kind {
            KIND_MINWISE => {
                let mut mins = Vec::with_capacity(header.k as usize);
                for t in 0..header.k as usize {
                    let min = read_u64(payload, t * 8);
                    if header.domain_bits < 64 && min >> header.domain_bits != 0 {
                        return Err(ParseError::BadHeader("minimum outside the universe").into());
                    }
                    mins.push(min);
                }
                Ok(Sketch::Minwise(MinwiseSketch {
                    domain_bits: header.domain_bits,
                    seed: header.seed,
                    f: header.f,
                    mins,
                }))
            }
            KIND_BBIT => {
                check_padding(payload, header.k, header.b)?;
                Ok(Sketch::Bbit(BbitSketch {
                    domain_bits: header.domain_bits,
                    seed: header.seed,
                    k: header.k,
                    b: header.b,
                    f: header.f,
                    packed: payload.to_vec(),
                }))
            }
            KIND_HALF => {
                check_padding(payload, header.k, 1)?;
                Ok(Sketch::Half(HalfBitSketch {
                    domain_bits: header.domain_bits,
                    seed: header.seed,
                    k: header.k,
                    f: header.f,
                    packed: payload.to_vec(),
                }))
            }
            _ => unreachable!("kind validated by parse_header"),
        }
    }
}

impl MinwiseSketch {
    /// Serializes as a full-width sketch frame.
    pub fn to_bytes(&self) -> Vec<u8> {
        Sketch::Minwise(self.clone()).to_bytes()
    }

    /// Decodes, insisting the frame holds a full-width sketch.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match Sketch::from_bytes(bytes)? {
            Sketch::Minwise(s) => Ok(s),
            _ => Err(Error::Incompatible("expected a full-width sketch")),
        }
    }
}

impl BbitSketch {
    /// Serializes as a b-bit sketch frame.
    pub fn to_bytes(&self) -> Vec<u8> {
        Sketch::Bbit(self.clone()).to_bytes()
    }

    /// Decodes, insisting the frame holds a b-bit sketch.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match Sketch::from_bytes(bytes)? {
            Sketch::Bbit(s) => Ok(s),
            _ => Err(Error::Incompatible("expected a b-bit sketch")),
        }
    }
}

impl HalfBitSketch {
    /// Serializes as an xor-folded sketch frame.
    pub fn to_bytes(&self) -> Vec<u8> {
        Sketch::Half(self.clone()).to_bytes()
    }

    /// Decodes, insisting the frame holds an xor-folded sketch.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match Sketch::from_bytes(bytes)? {
            Sketch::Half(s) => Ok(s),
            _ => Err(Error::Incompatible("expected an xor-folded sketch")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permute::PermutationFamily;

    fn sketches() -> (MinwiseSketch, BbitSketch, HalfBitSketch) {
        let family = PermutationFamily::new(16, 0x5eed, 8).unwrap();
        let minwise = MinwiseSketch::build(&family, &[3, 17, 900, 40_000]).unwrap();
        let bbit = minwise.lowest_bits(3).unwrap();
        let half = minwise.lowest_bits(1).unwrap().xor_combine().unwrap();
        (minwise, bbit, half)
    }

    fn refresh_crc(bytes: &mut [u8]) {
        let n = bytes.len();
        let crc = crc32(&bytes[..n - 4]);
        bytes[n - 4..].copy_from_slice(&crc.to_le_bytes());
    }

    #[test]
    fn crc_reference_vectors() {
        assert_eq!(crc32(b""), 0);
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
    }

    #[test]
    fn round_trips_preserve_every_field() {
        let (minwise, bbit, half) = sketches();
        assert_eq!(MinwiseSketch::from_bytes(&minwise.to_bytes()).unwrap(), minwise);
        assert_eq!(BbitSketch::from_bytes(&bbit.to_bytes()).unwrap(), bbit);
        assert_eq!(HalfBitSketch::from_bytes(&half.to_bytes()).unwrap(), half);
        let as_enum = Sketch::Bbit(bbit.clone());
        assert_eq!(Sketch::from_bytes(&as_enum.to_bytes()).unwrap(), as_enum);
    }

    #[test]
    fn every_single_byte_flip_is_detected() {
        let (_, bbit, _) = sketches();
        let bytes = bbit.to_bytes();
        for i in 0..bytes.len() {
            let mut corrupt = bytes.clone();
            corrupt[i] ^= 0x40;
            assert!(Sketch::from_bytes(&corrupt).is_err(), "flip at byte {i} accepted");
        }
    }

    #[test]
    fn payload_flip_reports_checksum_mismatch() {
        let (minwise, _, _) = sketches();
        let mut bytes = minwise.to_bytes();
        bytes[HEADER_LEN + 2] ^= 1;
        assert!(matches!(
            Sketch::from_bytes(&bytes),
            Err(Error::Parse(ParseError::ChecksumMismatch))
        ));
    }

    #[test]
    fn truncation_never_panics() {
        let (minwise, bbit, _) = sketches();
        let bytes = bbit.to_bytes();
        for len in 0..bytes.len() {
            assert!(Sketch::from_bytes(&bytes[..len]).is_err(), "prefix of {len} accepted");
        }
        assert!(matches!(
            Sketch::from_bytes(&[]),
            Err(Error::Parse(ParseError::Truncated))
        ));
        // A long frame cut mid-payload still has room for the header, so the
        // shifted checksum window is what catches it.
        let long = minwise.to_bytes();
        assert!(matches!(
            Sketch::from_bytes(&long[..long.len() - 5]),
            Err(Error::Parse(ParseError::ChecksumMismatch))
        ));
    }

    #[test]
    fn header_faults_report_distinct_errors() {
        let (_, bbit, _) = sketches();
        let good = bbit.to_bytes();

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        refresh_crc(&mut bad_magic);
        assert!(matches!(
            Sketch::from_bytes(&bad_magic),
            Err(Error::Parse(ParseError::BadMagic))
        ));

        let mut bad_version = good.clone();
        bad_version[4] = 9;
        refresh_crc(&mut bad_version);
        assert!(matches!(
            Sketch::from_bytes(&bad_version),
            Err(Error::Parse(ParseError::UnsupportedVersion(9)))
        ));

        let mut bad_kind = good.clone();
        bad_kind[5] = 7;
        refresh_crc(&mut bad_kind);
        assert!(matches!(
            Sketch::from_bytes(&bad_kind),
            Err(Error::Parse(ParseError::BadKind(7)))
        ));

        let mut bad_width = good.clone();
        bad_width[6] = 0;
        refresh_crc(&mut bad_width);
        assert!(matches!(
            Sketch::from_bytes(&bad_width),
            Err(Error::Parse(ParseError::BadHeader(_)))
        ));

        let mut bad_bits = good.clone();
        bad_bits[7] = 65;
        refresh_crc(&mut bad_bits);
        assert!(Sketch::from_bytes(&bad_bits).is_err());

        let mut trailing = good.clone();
        let crc_at = trailing.len() - 4;
        trailing.insert(crc_at, 0);
        refresh_crc(&mut trailing);
        assert!(matches!(
            Sketch::from_bytes(&trailing),
            Err(Error::Parse(ParseError::BadHeader("trailing data after payload")))
        ));
    }

    #[test]
    fn nonzero_padding_rejected() {
        // 5 samples of 5 bits = 25 bits = 4 bytes with 7 pad bits.
        let family = PermutationFamily::new(16, 0x5eed, 5).unwrap();
        let minwise = MinwiseSketch::build(&family, &[3, 17, 900, 40_000]).unwrap();
        let bbit = minwise.lowest_bits(5).unwrap();
        let mut bytes = bbit.to_bytes();
        let last_payload = bytes.len() - 5;
        bytes[last_payload] |= 0x80;
        refresh_crc(&mut bytes);
        assert!(matches!(
            Sketch::from_bytes(&bytes),
            Err(Error::Parse(ParseError::BadHeader("nonzero padding bits")))
        ));
    }

    #[test]
    fn typed_decoders_reject_other_kinds() {
        let (minwise, bbit, half) = sketches();
        assert!(MinwiseSketch::from_bytes(&bbit.to_bytes()).is_err());
        assert!(BbitSketch::from_bytes(&half.to_bytes()).is_err());
        assert!(HalfBitSketch::from_bytes(&minwise.to_bytes()).is_err());
    }

    #[test]
    fn out_of_universe_minima_rejected() {
        let (minwise, _, _) = sketches();
        let mut bytes = minwise.to_bytes();
        // Overwrite the first stored minimum with a value >= 2^16.
        bytes[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&(1u64 << 20).to_le_bytes());
        refresh_crc(&mut bytes);
        assert!(matches!(
            Sketch::from_bytes(&bytes),
            Err(Error::Parse(ParseError::BadHeader("minimum outside the universe")))
        ));
    }
}
