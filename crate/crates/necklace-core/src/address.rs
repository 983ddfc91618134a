//! Symbols, finite words, and eventually periodic addresses.
//!
//! A point of the attractor is named by an infinite symbol sequence; every
//! point this library manipulates (main nodes and their images, cut points)
//! is eventually periodic, so an [`Address`] stores a finite preperiod plus
//! a repeating period. Construction always normalizes, making structural
//! equality coincide with equality of the infinite sequences.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::errors::{Error, Result};

/// Map index, 1-based: the copies of a spec with `n` maps are numbered
/// `1..=n` and index arithmetic wraps cyclically (`n + 1 ≡ 1`).
pub type Symbol = u8;

/// Next index clockwise: `k + 1`, wrapping `n → 1`.
pub fn next_symbol(k: Symbol, n: u8) -> Symbol {
    if k == n {
        1
    } else {
        k + 1
    }
}

/// Previous index: `k - 1`, wrapping `1 → n`.
pub fn prev_symbol(k: Symbol, n: u8) -> Symbol {
    if k == 1 {
        n
    } else {
        k - 1
    }
}

/// A finite (possibly empty) sequence of symbols naming a copy: the word
/// `i1 i2 … im` names the image of the whole attractor under
/// `f_{i1} ∘ … ∘ f_{im}`. The empty word names the attractor itself.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn starts_with(&self, prefix: &[Symbol]) -> bool {
        self.0.starts_with(prefix)
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

/// Renders symbols as concatenated digits, switching to dot-separated
/// decimals as soon as any symbol exceeds 9 so the text form always
/// round-trips.
fn fmt_symbols(f: &mut fmt::Formatter<'_>, symbols: &[Symbol], dotted: bool) -> fmt::Result {
    for (i, s) in symbols.iter().enumerate() {
        if dotted && i > 0 {
            write!(f, ".")?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_symbols(f, &self.0, self.0.iter().any(|&s| s > 9))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

fn parse_symbols(s: &str) -> Result<Vec<Symbol>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |_| Error::MalformedAddress(format!("cannot parse symbols from {s:?}"));
    if s.contains('.') {
        s.split('.')
            .map(|tok| tok.parse::<u8>().map_err(bad))
            .collect()
    } else {
        s.chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| {
                Error::MalformedAddress(format!("cannot parse symbols from {s:?}"))
            }))
            .collect()
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = parse_symbols(s)?;
        if symbols.iter().any(|&x| x == 0) {
            return Err(Error::MalformedAddress(format!("symbol 0 in {s:?}")));
        }
        Ok(Word(symbols))
    }
}

/// An eventually periodic infinite symbol sequence in normal form:
/// `pre · per · per · per · …` where the period is primitive (not a power of
/// a shorter word) and the preperiod cannot be shortened by absorbing its
/// last symbol into a rotation of the period. Two addresses denote the same
/// sequence iff they are structurally equal.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAddress", into = "RawAddress")]
pub struct Address {
    pre: Word,
    per: Word,
}

/// Wire form of an [`Address`]; deserialization re-normalizes.
#[derive(Serialize, Deserialize)]
struct RawAddress {
    pre: Vec<Symbol>,
    per: Vec<Symbol>,
}

impl TryFrom<RawAddress> for Address {
    type Error = Error;

    fn try_from(raw: RawAddress) -> Result<Self> {
        Address::new(Word(raw.pre), Word(raw.per))
    }
}

impl From<Address> for RawAddress {
    fn from(a: Address) -> Self {
        RawAddress {
            pre: a.pre.0,
            per: a.per.0,
        }
    }
}

/// Length of the shortest word whose repetition produces `w`.
fn primitive_root_len(w: &[Symbol]) -> usize {
    let n = w.len();
    for d in 1..=n {
        if n % d == 0 && w.iter().enumerate().all(|(i, &s)| s == w[i % d]) {
            return d;
        }
    }
    n
}

impl Address {
    /// Builds the normal form of `pre · per^ω`.
    ///
    /// Normalization first truncates the period to its primitive root, then
    /// repeatedly absorbs the last preperiod symbol whenever it equals the
    /// last period symbol (rotating the period right to compensate), e.g.
    /// `12(2) → 1(2)` and `(22) → (2)`.
    pub fn new(pre: Word, per: Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::MalformedAddress("empty period".into()));
        }
        if pre.0.iter().chain(per.0.iter()).any(|&s| s == 0) {
            return Err(Error::MalformedAddress("symbol 0 (symbols are 1-based)".into()));
        }
        Ok(Self::normalized(pre.0, per.0))
    }

    /// Normalizes already-validated symbol vectors.
    fn normalized(mut pre: Vec<Symbol>, mut per: Vec<Symbol>) -> Self {
        debug_assert!(!per.is_empty());
        per.truncate(primitive_root_len(&per));
        while let Some(&last) = pre.last() {
            if last == *per.last().expect("period nonempty") {
                pre.pop();
                per.rotate_right(1);
            } else {
                break;
            }
        }
        Address {
            pre: Word(pre),
            per: Word(per),
        }
    }

    /// The purely periodic address `w^ω`.
    pub fn periodic(per: Word) -> Result<Self> {
        Self::new(Word::empty(), per)
    }

    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    pub fn period(&self) -> &Word {
        &self.per
    }

    /// Symbol at position `i` (0-based) of the infinite sequence.
    pub fn symbol_at(&self, i: usize) -> Symbol {
        if i < self.pre.len() {
            self.pre.0[i]
        } else {
            self.per.0[(i - self.pre.len()) % self.per.len()]
        }
    }

    pub fn first_symbol(&self) -> Symbol {
        self.symbol_at(0)
    }

    /// The first `j` symbols as a word.
    pub fn prefix(&self, j: usize) -> Word {
        Word((0..j).map(|i| self.symbol_at(i)).collect())
    }

    /// The address obtained by dropping the first `j` symbols.
    pub fn tail(&self, j: usize) -> Address {
        if j <= self.pre.len() {
            Self::normalized(self.pre.0[j..].to_vec(), self.per.0.clone())
        } else {
            let mut per = self.per.0.clone();
            per.rotate_left((j - self.pre.len()) % self.per.len());
            Self::normalized(Vec::new(), per)
        }
    }

    /// The address `w · self`.
    pub fn prepend(&self, w: &Word) -> Address {
        let mut pre = w.0.clone();
        pre.extend_from_slice(&self.pre.0);
        Self::normalized(pre, self.per.0.clone())
    }

    /// Does the sequence starting at offset `j` equal `other`?
    pub fn tail_equals(&self, j: usize, other: &Address) -> bool {
        self.tail(j) == *other
    }

    /// Does the infinite sequence start with `prefix`?
    pub fn starts_with(&self, prefix: &[Symbol]) -> bool {
        prefix
            .iter()
            .enumerate()
            .all(|(i, &s)| self.symbol_at(i) == s)
    }

    /// Largest symbol appearing anywhere in the sequence.
    pub fn max_symbol(&self) -> Symbol {
        self.pre
            .0
            .iter()
            .chain(self.per.0.iter())
            .copied()
            .max()
            .expect("period nonempty")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Ord for Address {
    /// Lexicographic order of the infinite sequences. Two distinct
    /// eventually periodic sequences must differ within
    /// `max(preperiods) + lcm(periods)` symbols, so the scan is finite.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let lcm = self.per.len() / gcd(self.per.len(), other.per.len()) * other.per.len();
        let bound = self.pre.len().max(other.pre.len()) + lcm;
        for i in 0..bound {
            match self.symbol_at(i).cmp(&other.symbol_at(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Address {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Address {
    /// `pre(per)`, e.g. `1(2)` for 1·2·2·2·… and `(21)` for 2·1·2·1·…
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dotted = self
            .pre
            .0
            .iter()
            .chain(self.per.0.iter())
            .any(|&s| s > 9);
        fmt_symbols(f, &self.pre.0, dotted)?;
        write!(f, "(")?;
        fmt_symbols(f, &self.per.0, dotted)?;
        write!(f, ")")
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Address {
    type Err = Error;

    /// Parses the display form `pre(per)`, e.g. `13(21)`.
    fn from_str(s: &str) -> Result<Self> {
        let open = s
            .find('(')
            .ok_or_else(|| Error::MalformedAddress(format!("missing '(' in {s:?}")))?;
        let close = s
            .rfind(')')
            .filter(|&c| c == s.len() - 1 && c > open)
            .ok_or_else(|| Error::MalformedAddress(format!("missing trailing ')' in {s:?}")))?;
        let pre: Word = s[..open].parse()?;
        let per: Word = s[open + 1..close].parse()?;
        Address::new(pre, per)
    }
}
