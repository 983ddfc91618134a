//! Identification classes: all addresses naming one point.
//!
//! The glue table's base identifications propagate by prefixing (a rule
//! applied at offset `j` rewrites the tail of an address), and the class of
//! an address is the closure of these rewrites. Classes are the library's
//! point representation: main nodes, cut candidates, and contact vertices
//! are all [`PointClass`] values.

use std::collections::{BTreeSet, VecDeque};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::address::{Address, Symbol, Word};
use crate::errors::{Error, Result};
use crate::spec::NecklaceSpec;

/// Truncation limits for the identification closure.
#[derive(Clone, Copy, Debug)]
pub struct ClassOptions {
    /// Largest offset at which base rules are applied. Rewrites at offsets
    /// `> depth` cannot change the first `depth` symbols, so depth `d` is
    /// exact for questions about words of length `<= d`.
    pub depth: usize,
    /// Largest class size before giving up with a cap error (a genuine
    /// necklace point has finitely many names; unbounded growth is evidence
    /// of a degenerate glue table).
    pub cap: usize,
}

impl Default for ClassOptions {
    fn default() -> Self {
        ClassOptions { depth: 12, cap: 64 }
    }
}

/// The set of addresses identified with one point, with the
/// lexicographically least one singled out as the canonical name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PointClass {
    canonical: Address,
    representatives: Vec<Address>,
}

impl PointClass {
    fn from_set(reps: BTreeSet<Address>) -> Self {
        let representatives: Vec<Address> = reps.into_iter().collect();
        PointClass {
            canonical: representatives[0].clone(),
            representatives,
        }
    }

    pub fn canonical(&self) -> &Address {
        &self.canonical
    }

    /// All known names of the point, sorted, least first.
    pub fn representatives(&self) -> &[Address] {
        &self.representatives
    }

    pub fn contains(&self, a: &Address) -> bool {
        self.representatives.binary_search(a).is_ok()
    }

    /// First symbols of all representatives: the first-level copies the
    /// point belongs to.
    pub fn first_symbols(&self) -> BTreeSet<Symbol> {
        self.representatives.iter().map(|r| r.first_symbol()).collect()
    }

    /// Distinct length-`m` prefixes of the representatives: the level-`m`
    /// cylinders the point belongs to.
    pub fn prefixes(&self, m: usize) -> BTreeSet<Word> {
        self.representatives.iter().map(|r| r.prefix(m)).collect()
    }

    /// Smallest level at which the point lies in two distinct cylinders
    /// (one more than the longest common prefix of its names); points with
    /// a single name never become contacts and report `None`.
    pub fn defining_level(&self) -> Option<usize> {
        if self.representatives.len() < 2 {
            return None;
        }
        let mut m = 0;
        loop {
            m += 1;
            if self.prefixes(m).len() >= 2 {
                return Some(m);
            }
        }
    }
}

impl std::fmt::Display for PointClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.canonical)
    }
}

/// Reports serialize classes as display strings (`"21(3)"`), which is the
/// readable form; the array-based wire form is reserved for spec files.
impl Serialize for PointClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PointClass", 2)?;
        s.serialize_field("canonical", &self.canonical.to_string())?;
        s.serialize_field(
            "representatives",
            &self
                .representatives
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>(),
        )?;
        s.end()
    }
}

/// Closure of the identification relation around `a`: breadth-first
/// application of every glue rule at every offset `<= depth`, in both
/// directions, until no new address appears.
pub fn point_class(spec: &NecklaceSpec, a: &Address, opts: &ClassOptions) -> Result<PointClass> {
    let sides: Vec<(Address, Address)> = (1..=spec.n()).map(|k| spec.node_pair(k)).collect();

    let mut seen: BTreeSet<Address> = BTreeSet::new();
    let mut queue: VecDeque<Address> = VecDeque::new();
    seen.insert(a.clone());
    queue.push_back(a.clone());

    while let Some(x) = queue.pop_front() {
        for j in 0..=opts.depth {
            let tail = x.tail(j);
            let emit = |replacement: &Address, seen: &mut BTreeSet<Address>,
                            queue: &mut VecDeque<Address>| {
                let y = replacement.prepend(&x.prefix(j));
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            };
            for (left, right) in &sides {
                if tail == *left {
                    emit(right, &mut seen, &mut queue);
                }
                if tail == *right {
                    emit(left, &mut seen, &mut queue);
                }
            }
            if seen.len() > opts.cap {
                return Err(Error::ClassCap {
                    address: a.to_string(),
                    cap: opts.cap,
                });
            }
        }
    }
    Ok(PointClass::from_set(seen))
}

/// The `n` main nodes of the copy named by `w`: the `k`-th entry is the
/// class of `w·k·u_k`, the point shared by the sub-copies `w·k` and
/// `w·(k+1)`.
pub fn main_nodes(spec: &NecklaceSpec, w: &Word, opts: &ClassOptions) -> Result<Vec<PointClass>> {
    (1..=spec.n())
        .map(|k| {
            let (left, _) = spec.node_pair(k);
            point_class(spec, &left.prepend(w), opts)
        })
        .collect()
}

/// Longest word `w` such that every given point has at least one name with
/// prefix `w` — the smallest copy containing all of them. Extension is
/// greedy by least symbol; the `cap` bounds the answer length because a
/// single point lies in an infinite nested chain of copies.
pub fn smallest_copy_containing(
    spec: &NecklaceSpec,
    pts: &[PointClass],
    cap: usize,
) -> Word {
    assert!(!pts.is_empty(), "need at least one point");
    let mut w = Word::empty();
    while w.len() < cap {
        let next = (1..=spec.n()).find(|&s| {
            let mut candidate = w.0.clone();
            candidate.push(s);
            pts.iter().all(|c| {
                c.representatives()
                    .iter()
                    .any(|r| r.starts_with(&candidate))
            })
        });
        match next {
            Some(s) => w.push(s),
            None => break,
        }
    }
    w
}

/// Which sub-copies of `F_k` contain each of its two boundary nodes.
#[derive(Clone, Serialize)]
pub struct BoundaryInCopy {
    pub k: Symbol,
    /// `j` values with `z_{k-1} ∈ F_{kj}`.
    pub prev_in: Vec<Symbol>,
    /// `j` values with `z_k ∈ F_{kj}`.
    pub next_in: Vec<Symbol>,
}

/// Goodness verdict: a spec is good when no sub-copy `F_{kj}` contains both
/// boundary nodes of `F_k`.
#[derive(Clone, Serialize)]
pub struct GoodnessReport {
    pub v: u32,
    pub label: String,
    pub good: bool,
    /// Violating `(k, j)` pairs.
    pub witnesses: Vec<(Symbol, Symbol)>,
    pub boundary: Vec<BoundaryInCopy>,
}

/// Checks goodness: for each `k`, the boundary of `F_k` is
/// `{z_{k-1}, z_k}`, and `z ∈ F_{kj}` exactly when some name of `z` starts
/// with `k·j`. Good means the two `j`-sets are disjoint for every `k`.
pub fn check_goodness(spec: &NecklaceSpec, opts: &ClassOptions) -> Result<GoodnessReport> {
    let nodes = main_nodes(spec, &Word::empty(), opts)?;
    let n = spec.n();
    let mut witnesses = Vec::new();
    let mut boundary = Vec::new();
    for k in 1..=n {
        let prev = &nodes[(if k == 1 { n } else { k - 1 }) as usize - 1];
        let next = &nodes[k as usize - 1];
        let second_symbols = |class: &PointClass| -> Vec<Symbol> {
            let mut js: Vec<Symbol> = class
                .representatives()
                .iter()
                .filter(|r| r.first_symbol() == k)
                .map(|r| r.symbol_at(1))
                .collect();
            js.sort_unstable();
            js.dedup();
            js
        };
        let prev_in = second_symbols(prev);
        let next_in = second_symbols(next);
        for j in prev_in.iter().filter(|j| next_in.contains(j)) {
            witnesses.push((k, *j));
        }
        boundary.push(BoundaryInCopy { k, prev_in, next_in });
    }
    witnesses.sort_unstable();
    Ok(GoodnessReport {
        v: 1,
        label: spec.label().to_string(),
        good: witnesses.is_empty(),
        witnesses,
        boundary,
    })
}
