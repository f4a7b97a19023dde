//! Finite words over `{0,1}` and over `ω`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite binary word, an element of `2^<ω`.
///
/// Ordering is lexicographic with a proper prefix sorting before its
/// extensions, which fixes the enumeration order used everywhere else.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinWord(Vec<u8>);

impl BinWord {
    pub fn empty() -> Self {
        BinWord(Vec::new())
    }

    /// Builds a word from bits; every entry must be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BinWord(bits)
    }

    /// The word of length `len` with every bit equal to `bit`.
    pub fn repeat(bit: u8, len: usize) -> Self {
        BinWord::from_bits(vec![bit; len])
    }

    /// `ε^len_pos`: length `len`, a single 1 at `pos`.
    pub fn unit(pos: usize, len: usize) -> Self {
        assert!(pos < len);
        let mut bits = vec![0; len];
        bits[pos] = 1;
        BinWord(bits)
    }

    /// All words of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BinWord> {
        assert!(len < 64);
        (0u64..(1u64 << len)).map(move |n| BinWord::from_value(n, len))
    }

    /// The length-`len` binary notation of `value`, most significant bit first.
    pub fn from_value(value: u64, len: usize) -> Self {
        BinWord((0..len).rev().map(|i| ((value >> i) & 1) as u8).collect())
    }

    /// The natural number whose binary notation (most significant bit first)
    /// is this word; the empty word denotes 0.
    pub fn value(&self) -> u64 {
        assert!(self.len() <= 64);
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn push(&mut self, bit: u8) {
        assert!(bit <= 1);
        self.0.push(bit);
    }

    /// `self⌢bit`.
    pub fn child(&self, bit: u8) -> BinWord {
        let mut w = self.clone();
        w.push(bit);
        w
    }

    /// `self⌢other`.
    pub fn concat(&self, other: &BinWord) -> BinWord {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        BinWord(bits)
    }

    /// The restriction `self↾n`.
    pub fn prefix(&self, n: usize) -> BinWord {
        BinWord(self.0[..n].to_vec())
    }

    pub fn is_prefix_of(&self, other: &BinWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `u ⊆ v` or `v ⊆ u`.
    pub fn comparable(&self, other: &BinWord) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// `w[a,b]`: the bits at positions `a..=b`.
    pub fn subword(&self, a: usize, b: usize) -> Result<BinWord> {
        if b >= self.len() {
            return Err(Error::IndexOutOfRange { index: b, len: self.len() });
        }
        if a > b {
            return Err(Error::IndexOutOfRange { index: a, len: b + 1 });
        }
        Ok(BinWord(self.0[a..=b].to_vec()))
    }

    /// `w⟨s_0,…,s_k⟩`: the bits at the listed positions, in order.
    pub fn select(&self, idx: &[usize]) -> Result<BinWord> {
        idx.iter()
            .map(|&i| self.0.get(i).copied().ok_or(Error::IndexOutOfRange { index: i, len: self.len() }))
            .collect::<Result<Vec<u8>>>()
            .map(BinWord)
    }

    /// Bitwise sum over `Z₂` of two words of equal length.
    pub fn xor_sum(&self, other: &BinWord) -> Result<BinWord> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(format!("xor of lengths {} and {}", self.len(), other.len())));
        }
        Ok(BinWord(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// `⟨u(0),v(0),u(1),v(1),…⟩`; `u` may be one bit longer than `v`.
    pub fn interleave(u: &BinWord, v: &BinWord) -> Result<BinWord> {
        if u.len() != v.len() && u.len() != v.len() + 1 {
            return Err(Error::LengthMismatch(format!("interleave of lengths {} and {}", u.len(), v.len())));
        }
        let mut bits = Vec::with_capacity(u.len() + v.len());
        for i in 0..u.len() {
            bits.push(u.0[i]);
            if i < v.len() {
                bits.push(v.0[i]);
            }
        }
        Ok(BinWord(bits))
    }

    /// Splits into the even-position and odd-position subsequences.
    pub fn deinterleave(&self) -> (BinWord, BinWord) {
        let even = self.0.iter().step_by(2).copied().collect();
        let odd = self.0.iter().skip(1).step_by(2).copied().collect();
        (BinWord(even), BinWord(odd))
    }
}

impl fmt::Display for BinWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinWord({self})")
    }
}

impl FromStr for BinWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(BinWord::empty());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidPresentation(format!("not a binary word: {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BinWord)
    }
}

/// A finite word over the naturals, an element of `ω^<ω`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NatWord(Vec<u64>);

impl NatWord {
    pub fn empty() -> Self {
        NatWord(Vec::new())
    }

    pub fn new(entries: Vec<u64>) -> Self {
        NatWord(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, k: u64) -> NatWord {
        let mut entries = self.0.clone();
        entries.push(k);
        NatWord(entries)
    }
}

impl fmt::Display for NatWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for NatWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NatWord({self})")
    }
}

impl FromStr for NatWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPresentation(format!("not a natural word: {s:?}"));
        let inner = s.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        if inner.trim().is_empty() {
            return Ok(NatWord::empty());
        }
        inner
            .split(',')
            .map(|e| e.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()
            .map(NatWord)
    }
}
