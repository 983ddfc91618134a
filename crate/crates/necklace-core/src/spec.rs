//! The symbolic model of a necklace: a glue table identifying, for each
//! `k`, the address `k·u_k` with `(k+1)·v_k` — the two names of the single
//! point shared by the adjacent first-level copies `F_k` and `F_{k+1}`.

use serde::{Deserialize, Serialize};

use crate::address::{next_symbol, Address, Symbol, Word};
use crate::class::{point_class, ClassOptions};
use crate::errors::{Error, Result};

/// One identification rule: the main node `z_k` seen from both sides,
/// `z_k = f_k(point at u) = f_{k+1}(point at v)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlueRule {
    pub k: Symbol,
    pub u: Address,
    pub v: Address,
}

/// A complete symbolic necklace: `n ≥ 3` plus one glue rule per `k ∈ 1..=n`.
///
/// Structural equality (and [`PartialEq`]) compares `n` and the glue table
/// and deliberately ignores the label, so relabeled-but-identical specs
/// compare equal.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct NecklaceSpec {
    n: u8,
    label: String,
    glue: Vec<GlueRule>,
}

impl PartialEq for NecklaceSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.glue == other.glue
    }
}

impl Eq for NecklaceSpec {}

/// Wire form, schema version 1:
/// `{"v": 1, "n": .., "label": .., "glue": [{"k", "u": {"pre", "per"}, "v": ..}]}`.
#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(default = "schema_version")]
    v: u32,
    n: u8,
    label: String,
    glue: Vec<GlueRule>,
}

fn schema_version() -> u32 {
    1
}

impl TryFrom<RawSpec> for NecklaceSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        if raw.v != 1 {
            return Err(Error::Parse(format!("unsupported schema version {}", raw.v)));
        }
        NecklaceSpec::new(raw.n, &raw.label, raw.glue)
    }
}

impl From<NecklaceSpec> for RawSpec {
    fn from(s: NecklaceSpec) -> Self {
        RawSpec {
            v: 1,
            n: s.n,
            label: s.label,
            glue: s.glue,
        }
    }
}

impl NecklaceSpec {
    /// Checks shape invariants (`n ≥ 3`, one rule per index, symbols in
    /// range) and stores rules sorted by `k`. Whether the glue table
    /// actually describes a necklace is the business of [`Self::validate`].
    pub fn new(n: u8, label: &str, mut glue: Vec<GlueRule>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSpec(format!("n = {n}, need n >= 3")));
        }
        glue.sort_by_key(|r| r.k);
        let mut seen = vec![false; n as usize + 1];
        for rule in &glue {
            if rule.k == 0 || rule.k > n {
                return Err(Error::SymbolOutOfRange { value: rule.k, n });
            }
            if seen[rule.k as usize] {
                return Err(Error::InvalidSpec(format!("duplicate glue index {}", rule.k)));
            }
            seen[rule.k as usize] = true;
            for addr in [&rule.u, &rule.v] {
                let max = addr.max_symbol();
                if max > n {
                    return Err(Error::SymbolOutOfRange { value: max, n });
                }
            }
        }
        if glue.len() != n as usize {
            return Err(Error::InvalidSpec(format!(
                "{} glue rules for n = {n}, need exactly one per index",
                glue.len()
            )));
        }
        Ok(NecklaceSpec {
            n,
            label: label.to_string(),
            glue,
        })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// Rules sorted by `k`.
    pub fn glue(&self) -> &[GlueRule] {
        &self.glue
    }

    pub fn rule(&self, k: Symbol) -> &GlueRule {
        &self.glue[(k - 1) as usize]
    }

    /// The two level-0 addresses of the main node `z_k`:
    /// `(k·u_k, (k+1)·v_k)`.
    pub fn node_pair(&self, k: Symbol) -> (Address, Address) {
        let rule = self.rule(k);
        let left = rule.u.prepend(&Word(vec![k]));
        let right = rule.v.prepend(&Word(vec![next_symbol(k, self.n)]));
        (left, right)
    }

    /// All `2n` rule-side addresses, i.e. both names of every `z_k`.
    pub fn node_addresses(&self) -> Vec<Address> {
        (1..=self.n)
            .flat_map(|k| {
                let (a, b) = self.node_pair(k);
                [a, b]
            })
            .collect()
    }

    /// Longest rule side measured in symbols of certain prefix
    /// (`1 + preperiod + period`); used to size identification-closure
    /// depths.
    pub fn max_side_len(&self) -> usize {
        self.glue
            .iter()
            .flat_map(|r| [&r.u, &r.v])
            .map(|a| 1 + a.preperiod().len() + a.period().len())
            .max()
            .expect("n >= 3 rules")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Checks that the glue table has the contact pattern of a necklace:
    /// every identification class spanning two first-level copies joins a
    /// cyclically adjacent pair, each adjacent pair is joined by exactly one
    /// class, and the `n` node classes are pairwise distinct.
    ///
    /// Classes spanning two copies necessarily contain a `k·u_k` address
    /// (only offset-0 rule applications change the first symbol), so
    /// checking the `n` node classes is exhaustive.
    pub fn validate(&self, depth: usize) -> Result<ValidationReport> {
        let opts = ClassOptions {
            depth: depth.max(self.max_side_len() + 2),
            ..ClassOptions::default()
        };
        let mut node_classes = Vec::new();
        for k in 1..=self.n {
            let (left, _) = self.node_pair(k);
            node_classes.push(point_class(self, &left, &opts)?);
        }

        let mut witnesses: Vec<String> = Vec::new();

        // Distinctness of the n main nodes.
        for k in 1..=self.n as usize {
            for m in k + 1..=self.n as usize {
                if node_classes[k - 1] == node_classes[m - 1] {
                    witnesses.push(format!(
                        "main nodes z_{k} and z_{m} coincide at {}",
                        node_classes[k - 1].canonical()
                    ));
                }
            }
        }

        // Contact classes per unordered pair of first-level copies.
        let mut pairs = Vec::new();
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                let adjacent = j - i == 1 || j - i == self.n - 1;
                let mut classes: Vec<String> = node_classes
                    .iter()
                    .filter(|c| {
                        let firsts = c.first_symbols();
                        firsts.contains(&i) && firsts.contains(&j)
                    })
                    .map(|c| c.canonical().to_string())
                    .collect();
                classes.sort();
                classes.dedup();
                let expected = usize::from(adjacent);
                if classes.len() != expected {
                    witnesses.push(format!(
                        "copies (F_{i}, F_{j}) are {}adjacent but share {} contact class(es): [{}]",
                        if adjacent { "" } else { "non-" },
                        classes.len(),
                        classes.join(", ")
                    ));
                }
                pairs.push(PairContacts {
                    i,
                    j,
                    adjacent,
                    classes,
                });
            }
        }

        witnesses.sort();
        Ok(ValidationReport {
            v: 1,
            label: self.label.clone(),
            n: self.n,
            depth: opts.depth,
            pass: witnesses.is_empty(),
            nodes: node_classes
                .iter()
                .map(|c| c.canonical().to_string())
                .collect(),
            pairs,
            witnesses,
        })
    }
}

/// Contact classes discovered between one unordered pair of first-level
/// copies.
#[derive(Clone, Serialize)]
pub struct PairContacts {
    pub i: Symbol,
    pub j: Symbol,
    pub adjacent: bool,
    pub classes: Vec<String>,
}

/// Outcome of [`NecklaceSpec::validate`]: the per-pair contact sets, the
/// canonical address of each main node, and failure witnesses if the
/// pattern is not that of a necklace.
#[derive(Clone, Serialize)]
pub struct ValidationReport {
    pub v: u32,
    pub label: String,
    pub n: u8,
    pub depth: usize,
    pub pass: bool,
    pub nodes: Vec<String>,
    pub pairs: Vec<PairContacts>,
    pub witnesses: Vec<String>,
}
