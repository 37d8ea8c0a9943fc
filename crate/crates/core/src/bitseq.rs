//! Finite binary sequences and the triple operators.
//!
//! Indices are grouped in triples `(3i, 3i+1, 3i+2)`. Extraction uses the
//! offsets 0, 2, 1 for `nu = 0, 1, 2` respectively, so `extract_p(a, 1)`
//! reads the *last* element of each triple. All operators act on finite
//! prefixes and discard incomplete trailing triples where the output is
//! defined per triple.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::Rational;

const WORD: usize = 64;

/// A finite binary sequence, packed 64 bits per word.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitSeq {
            words: Vec::with_capacity(bits.div_ceil(WORD)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        BitSeq {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = BitSeq {
            words: vec![u64::MAX; len.div_ceil(WORD)],
            len,
        };
        s.clear_tail();
        s
    }

    /// Repeats `pattern` until `len` bits have been produced.
    pub fn periodic(pattern: &BitSeq, len: usize) -> Self {
        assert!(!pattern.is_empty() || len == 0, "empty pattern");
        (0..len).map(|i| pattern.get(i % pattern.len())).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at `index`. Panics when out of range.
    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range for length {}", self.len);
        (self.words[index / WORD] >> (index % WORD)) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let (w, b) = (self.len / WORD, self.len % WORD);
        if b == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[w] |= 1 << b;
        }
        self.len += 1;
    }

    pub fn extend_from(&mut self, other: &BitSeq) {
        for bit in other.iter() {
            self.push(bit);
        }
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter { seq: self, pos: 0 }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones among the first `n` bits.
    pub fn count_ones_prefix(&self, n: usize) -> usize {
        assert!(n <= self.len);
        let full = n / WORD;
        let mut total: usize = self.words[..full].iter().map(|w| w.count_ones() as usize).sum();
        let rem = n % WORD;
        if rem > 0 {
            total += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        total
    }

    /// The first `n` bits (or the whole sequence if shorter).
    pub fn prefix(&self, n: usize) -> BitSeq {
        let n = n.min(self.len);
        let mut words = self.words[..n.div_ceil(WORD)].to_vec();
        let rem = n % WORD;
        if rem > 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
        BitSeq { words, len: n }
    }

    /// Bits `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> BitSeq {
        assert!(start <= end && end <= self.len);
        (start..end).map(|i| self.get(i)).collect()
    }

    /// Bitwise complement.
    pub fn complement(&self) -> BitSeq {
        let mut s = BitSeq {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        s.clear_tail();
        s
    }

    /// Parses the bit file format: `'0'`/`'1'` bytes, ASCII whitespace
    /// ignored, anything else rejected with its byte offset.
    pub fn parse_bytes(bytes: &[u8]) -> Result<BitSeq> {
        let mut s = BitSeq::with_capacity(bytes.len());
        for (offset, &b) in bytes.iter().enumerate() {
            match b {
                b'0' => s.push(false),
                b'1' => s.push(true),
                b if b.is_ascii_whitespace() => {}
                other => {
                    return Err(Error::Parse {
                        location: format!("byte {offset}"),
                        message: format!("unexpected byte 0x{other:02x}"),
                    })
                }
            }
        }
        Ok(s)
    }

    /// Serializes to the bit file format: one line of digits plus a newline.
    pub fn to_file_string(&self) -> String {
        let mut out = self.to_string();
        out.push('\n');
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

pub struct Iter<'a> {
    seq: &'a BitSeq,
    pos: usize,
}

impl Iterator for Iter<'_> {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        if self.pos >= self.seq.len {
            return None;
        }
        let bit = (self.seq.words[self.pos / WORD] >> (self.pos % WORD)) & 1 == 1;
        self.pos += 1;
        Some(bit)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.seq.len - self.pos;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Iter<'_> {}

impl<'a> IntoIterator for &'a BitSeq {
    type Item = bool;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut s = BitSeq::with_capacity(iter.size_hint().0);
        for bit in iter {
            s.push(bit);
        }
        s
    }
}

impl FromStr for BitSeq {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BitSeq::parse_bytes(s.as_bytes())
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 96 {
            write!(f, "BitSeq({self})")
        } else {
            write!(f, "BitSeq(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

/// Index offset inside a triple read by `extract_p(_, nu)`.
pub fn p_offset(nu: usize) -> Result<usize> {
    match nu {
        0 => Ok(0),
        1 => Ok(2),
        2 => Ok(1),
        _ => Err(Error::invalid(format!("extraction index must be 0, 1 or 2, got {nu}"))),
    }
}

/// Number of indices `3i + offset` below `len`.
pub(crate) fn phase_count(len: usize, offset: usize) -> usize {
    if len > offset {
        (len - offset).div_ceil(3)
    } else {
        0
    }
}

/// Subsequence extraction: `nu = 0` keeps `a[3i]`, `nu = 1` keeps
/// `a[3i+2]`, `nu = 2` keeps `a[3i+1]`.
pub fn extract_p(a: &BitSeq, nu: usize) -> Result<BitSeq> {
    let offset = p_offset(nu)?;
    let count = phase_count(a.len(), offset);
    Ok((0..count).map(|i| a.get(3 * i + offset)).collect())
}

/// Subsequence summation: `nu = 1` gives `a[3i] ^ a[3i+2]`, `nu = 2` gives
/// `a[3i+1] ^ a[3i+2]`, one bit per complete triple.
pub fn sum_s(a: &BitSeq, nu: usize) -> Result<BitSeq> {
    let first = match nu {
        1 => 0,
        2 => 1,
        _ => return Err(Error::invalid(format!("summation index must be 1 or 2, got {nu}"))),
    };
    let triples = a.len() / 3;
    Ok((0..triples)
        .map(|i| a.get(3 * i + first) ^ a.get(3 * i + 2))
        .collect())
}

/// Inverse of extraction: `r[3i] = x[i]`, `r[3i+2] = y[i]`, `r[3i+1] = z[i]`.
pub fn interleave(x: &BitSeq, y: &BitSeq, z: &BitSeq) -> Result<BitSeq> {
    if x.len() != y.len() || y.len() != z.len() {
        return Err(Error::invalid(format!(
            "interleave needs equal lengths, got {}, {}, {}",
            x.len(),
            y.len(),
            z.len()
        )));
    }
    let mut r = BitSeq::with_capacity(3 * x.len());
    for i in 0..x.len() {
        r.push(x.get(i));
        r.push(z.get(i));
        r.push(y.get(i));
    }
    Ok(r)
}

/// Exact fraction of ones among the first `n` bits.
pub fn fraction_ones(a: &BitSeq, n: usize) -> Result<Rational> {
    if n == 0 || n > a.len() {
        return Err(Error::invalid(format!(
            "prefix length must be in 1..={}, got {n}",
            a.len()
        )));
    }
    Ok(Rational::new(a.count_ones_prefix(n) as i64, n as i64))
}

/// Elementwise XOR of equal-length sequences.
pub fn xor_seq(a: &BitSeq, b: &BitSeq) -> Result<BitSeq> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "xor needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(BitSeq {
        words: a.words.iter().zip(&b.words).map(|(x, y)| x ^ y).collect(),
        len: a.len,
    })
}
