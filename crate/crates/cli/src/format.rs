//! Trit stream encodings.

use clap::ValueEnum;
use serde::Serialize;
use thiserror::Error;

pub const ASCII_LINE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StreamFormat {
    /// '0', '1', '2', newline every 64 symbols.
    Ascii,
    /// One byte per trit, 0x00..0x02.
    Raw,
    /// `{"trits": [...], "report": {...}}`.
    Json,
}

impl std::str::FromStr for StreamFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("byte {byte:#04x} at offset {offset} is not a trit symbol")]
    BadSymbol { offset: usize, byte: u8 },
}

pub fn encode_ascii(trits: &[u8]) -> String {
    let mut s = String::with_capacity(trits.len() + trits.len() / ASCII_LINE + 1);
    for line in trits.chunks(ASCII_LINE) {
        s.extend(line.iter().map(|t| char::from(b'0' + t)));
        s.push('\n');
    }
    s
}

/// Inverse of [`encode_ascii`]; ASCII whitespace is ignored.
pub fn decode_ascii(bytes: &[u8]) -> Result<Vec<u8>, DecodeError> {
    let mut out = Vec::with_capacity(bytes.len());
    for (offset, &byte) in bytes.iter().enumerate() {
        match byte {
            b'0'..=b'2' => out.push(byte - b'0'),
            b if b.is_ascii_whitespace() => {}
            _ => return Err(DecodeError::BadSymbol { offset, byte }),
        }
    }
    Ok(out)
}

pub fn encode_raw(trits: &[u8]) -> Vec<u8> {
    trits.to_vec()
}

#[derive(Serialize)]
struct JsonDoc<'a, R: Serialize> {
    trits: &'a [u8],
    report: &'a R,
}

pub fn encode_json<R: Serialize>(trits: &[u8], report: &R) -> serde_json::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(&JsonDoc { trits, report })?;
    v.push(b'\n');
    Ok(v)
}
