//! Binary lambda calculus codec.
//!
//! `00` abstraction, `01` application, `1^n 0` index `n`. The bit length
//! of a code word equals the term size under weights (2, 1, 2, 2).

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Node, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bit string ends before the term is complete")]
    Truncated,
    #[error("trailing bits after a complete term at position {at}")]
    TrailingBits { at: usize },
    #[error("invalid symbol {symbol:?} at position {at}, expected '0' or '1'")]
    BadPrefix { at: usize, symbol: char },
}

#[derive(Debug, Error)]
pub enum PackedError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed packed header: {0:?}")]
    Header(String),
    #[error("packed body holds {have} bytes, header needs {need}")]
    ShortBody { have: usize, need: usize },
    #[error("non-zero padding bits in final byte")]
    Padding,
}

pub fn encode_blc(t: &Term) -> String {
    let mut out = String::with_capacity(t.nodes().len() * 3);
    for node in t.nodes() {
        match *node {
            Node::Abs => out.push_str("00"),
            Node::App => out.push_str("01"),
            Node::Var(s) => {
                out.extend(std::iter::repeat_n('1', s as usize + 1));
                out.push('0');
            }
        }
    }
    out
}

pub fn decode_blc(bits: &str) -> Result<Term, DecodeError> {
    let bytes = bits.as_bytes();
    let bit = |at: usize| -> Result<bool, DecodeError> {
        match bytes.get(at) {
            None => Err(DecodeError::Truncated),
            Some(b'0') => Ok(false),
            Some(b'1') => Ok(true),
            Some(_) => Err(DecodeError::BadPrefix {
                at,
                symbol: bits[at..].chars().next().unwrap_or('?'),
            }),
        }
    };
    let mut nodes = Vec::new();
    let mut pending = 1usize;
    let mut at = 0usize;
    while pending > 0 {
        if bit(at)? {
            let mut ones = 0u64;
            while bit(at)? {
                ones += 1;
                at += 1;
            }
            at += 1;
            nodes.push(Node::Var(ones - 1));
            pending -= 1;
        } else {
            if bit(at + 1)? {
                nodes.push(Node::App);
                pending += 1;
            } else {
                nodes.push(Node::Abs);
            }
            at += 2;
        }
    }
    if at < bytes.len() {
        // report bad symbols ahead of trailing data
        for i in at..bytes.len() {
            bit(i)?;
        }
        return Err(DecodeError::TrailingBits { at });
    }
    Ok(Term::from_nodes_unchecked(nodes))
}

/// Packed form: a header line `blc bits=<n>` followed by the bits, most
/// significant bit first, final byte zero-padded.
pub fn write_packed<W: Write>(mut w: W, bits: &str) -> Result<(), PackedError> {
    if let Some((at, symbol)) = bits.char_indices().find(|&(_, c)| c != '0' && c != '1') {
        return Err(PackedError::Header(format!("invalid bit {symbol:?} at {at}")));
    }
    writeln!(w, "blc bits={}", bits.len())?;
    let mut body = vec![0u8; bits.len().div_ceil(8)];
    for (i, c) in bits.bytes().enumerate() {
        if c == b'1' {
            body[i / 8] |= 0x80 >> (i % 8);
        }
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_packed<R: BufRead>(mut r: R) -> Result<String, PackedError> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let line = header.trim_end_matches('\n');
    let len: usize = line
        .strip_prefix("blc bits=")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| PackedError::Header(line.to_string()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    let need = len.div_ceil(8);
    if body.len() != need {
        return Err(PackedError::ShortBody { have: body.len(), need });
    }
    if !len.is_multiple_of(8) {
        let mask = 0xffu8 >> (len % 8);
        if body[need - 1] & mask != 0 {
            return Err(PackedError::Padding);
        }
    }
    Ok((0..len)
        .map(|i| if body[i / 8] & (0x80 >> (i % 8)) != 0 { '1' } else { '0' })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size_model::Preset;

    #[test]
    fn encodes_examples() {
        assert_eq!(encode_blc(&Term::abs(Term::var(0))), "0010");
        let k: Term = "\\\\((S0) 0)".parse().unwrap();
        let bits = encode_blc(&k);
        assert_eq!(bits, "00000111010");
        assert_eq!(bits.len() as u128, Preset::Binary.spec().term_size(&k));
        assert_eq!(encode_blc(&Term::var(0)), "10");
    }

    #[test]
    fn decodes_and_rejects() {
        assert_eq!(decode_blc("0010").unwrap(), Term::abs(Term::var(0)));
        assert_eq!(decode_blc("00"), Err(DecodeError::Truncated));
        assert_eq!(decode_blc(""), Err(DecodeError::Truncated));
        assert_eq!(decode_blc("111"), Err(DecodeError::Truncated));
        assert_eq!(decode_blc("00100"), Err(DecodeError::TrailingBits { at: 4 }));
        assert_eq!(decode_blc("0x10"), Err(DecodeError::BadPrefix { at: 1, symbol: 'x' }));
    }

    #[test]
    fn packed_round_trip() {
        let bits = "00000111010";
        let mut buf = Vec::new();
        write_packed(&mut buf, bits).unwrap();
        assert_eq!(buf, b"blc bits=11\n\x07\x40");
        let back = read_packed(&buf[..]).unwrap();
        assert_eq!(back, bits);
    }

    #[test]
    fn packed_rejects_bad_input() {
        assert!(matches!(read_packed(&b"nope\n"[..]), Err(PackedError::Header(_))));
        assert!(matches!(
            read_packed(&b"blc bits=9\n\x00"[..]),
            Err(PackedError::ShortBody { have: 1, need: 2 })
        ));
        assert!(matches!(read_packed(&b"blc bits=4\n\x01"[..]), Err(PackedError::Padding)));
    }
}
