//! The dihedral relabeling action on specs, spec isomorphism, and the
//! enumeration of rigid homeomorphism skeletons between two specs.
//!
//! A rigid map sends every level-`m` copy to a level-`m` copy, so on
//! addresses it acts symbolwise through a single dihedral permutation of
//! the alphabet. A permutation is admitted when it carries the gluing
//! identifications of the source onto identifications of the target and,
//! via its inverse, vice versa. The per-copy consistency contexts of the
//! search all coincide (every copy is glued exactly like its spec), so the
//! closure is an automaton with one state per admitted permutation and
//! self-loop transitions on every symbol.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::address::{next_symbol, Address, Symbol, Word};
use crate::class::check_goodness;
use crate::cuts::survey_extremal;
use crate::errors::{Error, Result};
use crate::graph::{Engine, EngineLimits};
use crate::spec::{GlueRule, NecklaceSpec};

/// One element of the dihedral group on the cyclically ordered alphabet
/// `1..=n`: a rotation, optionally composed with the reversal
/// `k ↦ n − k + 1`.
///
/// Field order gives the canonical enumeration: the `n` rotations
/// (identity first), then the `n` reversal-composed elements.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct DihedralElement {
    n: u8,
    reflected: bool,
    rotation: u8,
}

impl DihedralElement {
    pub fn new(n: u8, rotation: u8, reflected: bool) -> Self {
        assert!(n >= 3, "alphabet has at least three symbols");
        DihedralElement {
            n,
            reflected,
            rotation: rotation % n,
        }
    }

    pub fn identity(n: u8) -> Self {
        Self::new(n, 0, false)
    }

    /// The full group in canonical order.
    pub fn group(n: u8) -> Vec<Self> {
        let mut out = Vec::with_capacity(2 * n as usize);
        for reflected in [false, true] {
            for rotation in 0..n {
                out.push(Self::new(n, rotation, reflected));
            }
        }
        out
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn rotation(&self) -> u8 {
        self.rotation
    }

    pub fn reflected(&self) -> bool {
        self.reflected
    }

    pub fn is_identity(&self) -> bool {
        !self.reflected && self.rotation == 0
    }

    /// Affine form on 0-based residues: `k ↦ a·k + b (mod n)` with
    /// `a = ±1`.
    fn affine(&self) -> (i32, i32) {
        let n = self.n as i32;
        if self.reflected {
            (-1, n - 1 - self.rotation as i32)
        } else {
            (1, self.rotation as i32)
        }
    }

    fn from_affine(n: u8, a: i32, b: i32) -> Self {
        let b = b.rem_euclid(n as i32);
        if a == 1 {
            Self::new(n, b as u8, false)
        } else {
            Self::new(n, ((n as i32 - 1 - b).rem_euclid(n as i32)) as u8, true)
        }
    }

    pub fn apply(&self, k: Symbol) -> Symbol {
        debug_assert!(k >= 1 && k <= self.n);
        let (a, b) = self.affine();
        let j = (a * (k as i32 - 1) + b).rem_euclid(self.n as i32);
        (j + 1) as Symbol
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "group elements share one alphabet");
        let (a1, b1) = other.affine();
        let (a2, b2) = self.affine();
        Self::from_affine(self.n, a2 * a1, a2 * b1 + b2)
    }

    pub fn inverse(&self) -> Self {
        let (a, b) = self.affine();
        Self::from_affine(self.n, a, -a * b)
    }

    pub fn apply_word(&self, w: &Word) -> Word {
        Word::new(w.as_slice().iter().map(|&s| self.apply(s)).collect())
    }

    /// Symbolwise relabeling; the result is renormalized.
    pub fn apply_address(&self, a: &Address) -> Address {
        Address::new(self.apply_word(a.preperiod()), self.apply_word(a.period()))
            .expect("relabeling a valid address stays valid")
    }

    /// Parse the display form `r<rot>` or `s<rot>`.
    pub fn parse(text: &str, n: u8) -> Result<Self> {
        let bad = || Error::Param(format!("bad group element '{text}' (expected r<k> or s<k>)"));
        let mut chars = text.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let reflected = match kind {
            'r' => false,
            's' => true,
            _ => return Err(bad()),
        };
        let rot: u8 = chars.as_str().parse().map_err(|_| bad())?;
        if rot >= n {
            return Err(Error::Param(format!(
                "rotation {rot} out of range for alphabet size {n}"
            )));
        }
        Ok(Self::new(n, rot, reflected))
    }
}

impl fmt::Display for DihedralElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.reflected { 's' } else { 'r' }, self.rotation)
    }
}

impl Serialize for DihedralElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DihedralElement", 3)?;
        s.serialize_field("name", &self.to_string())?;
        s.serialize_field("rotation", &self.rotation)?;
        s.serialize_field("reflected", &self.reflected)?;
        s.end()
    }
}

/// Relabel a spec by `σ`: the new map `k` is the old map `σ(k)`. Rotations
/// re-index the glue table; reversal-composed elements additionally swap
/// the two sides of each rule, because they reverse the cyclic order of
/// the copies.
pub fn apply_sigma(spec: &NecklaceSpec, sigma: &DihedralElement) -> NecklaceSpec {
    assert_eq!(sigma.n(), spec.n(), "group element matches the spec's n");
    let n = spec.n();
    let inv = sigma.inverse();
    let glue: Vec<GlueRule> = (1..=n)
        .map(|k| {
            if !sigma.reflected() {
                let src = spec.rule(sigma.apply(k));
                GlueRule {
                    k,
                    u: inv.apply_address(&src.u),
                    v: inv.apply_address(&src.v),
                }
            } else {
                let src = spec.rule(sigma.apply(next_symbol(k, n)));
                GlueRule {
                    k,
                    u: inv.apply_address(&src.v),
                    v: inv.apply_address(&src.u),
                }
            }
        })
        .collect();
    NecklaceSpec::new(n, &format!("{}~{}", spec.label(), sigma), glue)
        .expect("relabeling a valid spec stays valid")
}

/// Least group element (canonical order) relabeling `a` into `b`, if any.
pub fn spec_isomorphic(a: &NecklaceSpec, b: &NecklaceSpec) -> Option<DihedralElement> {
    if a.n() != b.n() {
        return None;
    }
    DihedralElement::group(a.n())
        .into_iter()
        .find(|sigma| &apply_sigma(a, sigma) == b)
}

/// Self-loop automaton describing an admitted set of symbolwise maps.
#[derive(Clone, Serialize)]
pub struct AutomatonTransition {
    pub from: usize,
    pub symbol: Symbol,
    pub to: usize,
}

#[derive(Clone, Serialize)]
pub struct Automaton {
    pub states: Vec<String>,
    pub transitions: Vec<AutomatonTransition>,
    pub accepting: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum ClosureVerdict {
    /// Every candidate was decided.
    Closed,
    /// Some candidates hit resource caps before a verdict.
    OpenAtDepth { depth: usize },
}

/// The admitted rigid maps between two specs, with the consistency
/// automaton and the verification depth used.
#[derive(Clone, Serialize)]
pub struct RigidMapClosure {
    pub v: u32,
    pub from: String,
    pub to: String,
    pub n_from: u8,
    pub n_to: u8,
    pub depth: usize,
    pub maps: Vec<DihedralElement>,
    pub undecided: Vec<DihedralElement>,
    pub verdict: ClosureVerdict,
    pub automaton: Automaton,
}

fn level_words(n: u8, len: usize) -> Vec<Word> {
    let mut words = vec![Word::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(words.len() * n as usize);
        for w in &words {
            for s in 1..=n {
                let mut w2 = w.clone();
                w2.push(s);
                next.push(w2);
            }
        }
        words = next;
    }
    words
}

/// Check that `sigma` sends every identification of `from` (instantiated
/// at every copy up to `depth − 1`) onto an identification of `to`. The
/// instances at proper copies are implied by the root ones, but verifying
/// them exercises the same consistency the per-copy search would.
fn direction_admits(
    from: &Engine,
    to: &Engine,
    sigma: &DihedralElement,
    depth: usize,
) -> Result<bool> {
    let n = from.spec().n();
    let mut words = vec![Word::empty()];
    for level in 0..depth {
        for w in &words {
            for k in 1..=n {
                let (left, right) = from.spec().node_pair(k);
                let image_left = sigma.apply_address(&left.prepend(w));
                let image_right = sigma.apply_address(&right.prepend(w));
                let class = to.class(&image_left)?;
                if !class.contains(&image_right) {
                    return Ok(false);
                }
            }
        }
        if level + 1 < depth {
            let mut next = Vec::with_capacity(words.len() * n as usize);
            for w in &words {
                for s in 1..=n {
                    let mut w2 = w.clone();
                    w2.push(s);
                    next.push(w2);
                }
            }
            words = next;
        }
    }
    Ok(true)
}

/// Enumerate the rigid homeomorphism skeletons from `f` onto `g`,
/// verifying admissibility down to `depth` levels of copies.
pub fn rigid_maps(f: &NecklaceSpec, g: &NecklaceSpec, depth: usize) -> Result<RigidMapClosure> {
    if depth == 0 {
        return Err(Error::Param("verification depth must be at least 1".into()));
    }
    let mut maps: Vec<DihedralElement> = Vec::new();
    let mut undecided: Vec<DihedralElement> = Vec::new();
    if f.n() == g.n() {
        let ef = Engine::new(f.clone(), EngineLimits::default());
        let eg = Engine::new(g.clone(), EngineLimits::default());
        for sigma in DihedralElement::group(f.n()) {
            let forward = direction_admits(&ef, &eg, &sigma, depth);
            let admitted = match forward {
                Ok(true) => direction_admits(&eg, &ef, &sigma.inverse(), depth),
                other => other,
            };
            match admitted {
                Ok(true) => maps.push(sigma),
                Ok(false) => {}
                Err(e) if e.is_resource_cap() => undecided.push(sigma),
                Err(e) => return Err(e),
            }
        }
    }

    let verdict = if undecided.is_empty() {
        ClosureVerdict::Closed
    } else {
        ClosureVerdict::OpenAtDepth { depth }
    };
    let states: Vec<String> = maps.iter().map(|m| m.to_string()).collect();
    let mut transitions = Vec::new();
    for (i, _) in maps.iter().enumerate() {
        for s in 1..=f.n() {
            transitions.push(AutomatonTransition {
                from: i,
                symbol: s,
                to: i,
            });
        }
    }
    Ok(RigidMapClosure {
        v: 1,
        from: f.label().to_string(),
        to: g.label().to_string(),
        n_from: f.n(),
        n_to: g.n(),
        depth,
        undecided,
        verdict,
        automaton: Automaton {
            accepting: (0..states.len()).collect(),
            states,
            transitions,
        },
        maps,
    })
}

/// Per-element verdicts for the relabeling-uniqueness suite.
#[derive(Clone, Debug, Serialize)]
pub struct UniquenessEntry {
    pub sigma: String,
    pub isomorphic: bool,
    pub validates: bool,
    pub good: bool,
    pub survey_matches: bool,
    pub pass: bool,
}

/// Result of checking that every dihedral relabeling of a spec is an
/// equivalent spec: isomorphic, valid, good, and with the same extremal
/// survey up to relabeling.
#[derive(Clone, Serialize)]
pub struct UniquenessReport {
    pub v: u32,
    pub label: String,
    pub n: u8,
    pub good: bool,
    pub applicable: bool,
    pub warning: Option<String>,
    pub level_cap: usize,
    pub entries: Vec<UniquenessEntry>,
    pub pass: bool,
}

pub fn verify_nifs_uniqueness(
    spec: &NecklaceSpec,
    level_cap: usize,
    threads: usize,
) -> Result<UniquenessReport> {
    let base = Engine::new(spec.clone(), EngineLimits::default());
    let goodness = check_goodness(spec, base.class_options())?;
    if !goodness.good {
        return Ok(UniquenessReport {
            v: 1,
            label: spec.label().to_string(),
            n: spec.n(),
            good: false,
            applicable: false,
            warning: Some(
                "uniqueness guarantees hold for well-separated specs only; suite skipped".into(),
            ),
            level_cap,
            entries: Vec::new(),
            pass: true,
        });
    }

    let base_survey = survey_extremal(&base, level_cap, threads)?;
    let validate_depth = 6.max(spec.max_side_len() + 2);
    let mut entries = Vec::new();
    for sigma in DihedralElement::group(spec.n()) {
        let relabeled = apply_sigma(spec, &sigma);
        let isomorphic = spec_isomorphic(&relabeled, spec).is_some();
        let validates = relabeled
            .validate(validate_depth)
            .map(|r| r.pass)
            .unwrap_or(false);
        let engine = Engine::new(relabeled.clone(), EngineLimits::default());
        let relabeled_good = check_goodness(&relabeled, engine.class_options())?.good;
        let survey = survey_extremal(&engine, level_cap, threads)?;

        // A point named α in the original is named σ⁻¹*(α) after
        // relabeling, so the relabeled extremal set must be the inverse
        // image of the original one.
        let inv = sigma.inverse();
        let mut expected: BTreeSet<Vec<String>> = BTreeSet::new();
        for report in &base_survey.extremal {
            let mut pair = Vec::with_capacity(2);
            for point in &report.points {
                let addr: Address = point.parse().expect("canonical address parses");
                pair.push(engine.class(&inv.apply_address(&addr))?.canonical().to_string());
            }
            pair.sort();
            expected.insert(pair);
        }
        let computed: BTreeSet<Vec<String>> = survey
            .extremal
            .iter()
            .map(|r| {
                let mut pair = r.points.clone();
                pair.sort();
                pair
            })
            .collect();
        let survey_matches = computed == expected && survey.n2 == base_survey.n2;

        let pass = isomorphic && validates && relabeled_good && survey_matches;
        entries.push(UniquenessEntry {
            sigma: sigma.to_string(),
            isomorphic,
            validates,
            good: relabeled_good,
            survey_matches,
            pass,
        });
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(UniquenessReport {
        v: 1,
        label: spec.label().to_string(),
        n: spec.n(),
        good: true,
        applicable: true,
        warning: None,
        level_cap,
        entries,
        pass,
    })
}

/// Verdict for one structured embedding: inclusion of copy `w` composed
/// with an admitted self-map.
#[derive(Clone, Serialize)]
pub struct EmbeddingCheck {
    pub v: u32,
    pub label: String,
    pub copy: String,
    pub sigma: String,
    pub admitted: bool,
    pub depth: usize,
    pub pass: bool,
}

/// Verify that the embedding `x ↦ w·σ*(x)` maps the level-`j` cylinder
/// set onto exactly the cylinders of copy `w`, for every `j ≤ depth`.
pub fn embedding_image_copy_check(
    f: &NecklaceSpec,
    w: &Word,
    sigma: &DihedralElement,
    depth: usize,
) -> Result<EmbeddingCheck> {
    let n = f.n();
    if w.as_slice().iter().any(|&s| s == 0 || s > n) {
        return Err(Error::Param(format!("word '{w}' uses symbols outside 1..={n}")));
    }
    let closure = rigid_maps(f, f, depth.max(1))?;
    let admitted = closure.maps.contains(sigma);

    let mut cylinders_match = true;
    for j in 0..=depth {
        let words = level_words(n, j);
        let image: BTreeSet<Word> = words
            .iter()
            .map(|u| w.concat(&sigma.apply_word(u)))
            .collect();
        let target: BTreeSet<Word> = words.iter().map(|u| w.concat(u)).collect();
        if image != target {
            cylinders_match = false;
            break;
        }
    }

    Ok(EmbeddingCheck {
        v: 1,
        label: f.label().to_string(),
        copy: w.to_string(),
        sigma: sigma.to_string(),
        admitted,
        depth,
        pass: admitted && cylinders_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn dihedral_group_laws_hold() {
        for n in [3u8, 4, 5, 7] {
            let tau = DihedralElement::new(n, 1, false);
            let s = DihedralElement::new(n, 0, true);
            let id = DihedralElement::identity(n);

            let mut power = id;
            for _ in 0..n {
                power = tau.compose(&power);
            }
            assert_eq!(power, id, "rotation has order n");
            assert_eq!(s.compose(&s), id, "reversal has order 2");
            assert_eq!(
                s.compose(&tau.compose(&s)),
                tau.inverse(),
                "conjugating a rotation by the reversal inverts it"
            );

            let group = DihedralElement::group(n);
            assert_eq!(group.len(), 2 * n as usize);
            let distinct: BTreeSet<_> = group.iter().copied().collect();
            assert_eq!(distinct.len(), 2 * n as usize);
            for a in &group {
                assert_eq!(a.compose(&a.inverse()), id);
                for b in &group {
                    assert!(group.contains(&a.compose(b)));
                }
            }
        }
    }

    #[test]
    fn canonical_order_lists_rotations_first() {
        let group = DihedralElement::group(4);
        let names: Vec<String> = group.iter().map(|g| g.to_string()).collect();
        assert_eq!(names, ["r0", "r1", "r2", "r3", "s0", "s1", "s2", "s3"]);
        assert!(group[0].is_identity());
    }

    #[test]
    fn reversal_maps_symbols_like_n_minus_k_plus_1() {
        let s = DihedralElement::new(4, 0, true);
        assert_eq!((1..=4).map(|k| s.apply(k)).collect::<Vec<_>>(), [4, 3, 2, 1]);
        let tau = DihedralElement::new(4, 1, false);
        assert_eq!((1..=4).map(|k| tau.apply(k)).collect::<Vec<_>>(), [2, 3, 4, 1]);
    }

    #[test]
    fn parse_round_trips_display() {
        for g in DihedralElement::group(5) {
            let back = DihedralElement::parse(&g.to_string(), 5).unwrap();
            assert_eq!(back, g);
        }
        assert!(DihedralElement::parse("x1", 4).is_err());
        assert!(DihedralElement::parse("r9", 4).is_err());
    }

    #[test]
    fn identity_relabeling_is_a_fixed_point() {
        for spec in [builtins::gasket(), builtins::good4(), builtins::crowded4()] {
            let id = DihedralElement::identity(spec.n());
            assert_eq!(apply_sigma(&spec, &id), spec);
        }
    }

    #[test]
    fn symmetric_specs_are_fixed_by_the_whole_group() {
        let g4 = builtins::good4();
        for sigma in DihedralElement::group(4) {
            let relabeled = apply_sigma(&g4, &sigma);
            assert_eq!(relabeled, g4, "relabeling by {sigma} changes nothing");
            assert!(relabeled.validate(6).unwrap().pass);
        }
        let gasket = builtins::gasket();
        for sigma in DihedralElement::group(3) {
            assert_eq!(apply_sigma(&gasket, &sigma), gasket);
        }
    }

    #[test]
    fn asymmetric_spec_relabelings_are_isomorphic_but_distinct() {
        let crowded4 = builtins::crowded4();
        let tau = DihedralElement::new(4, 1, false);
        let relabeled = apply_sigma(&crowded4, &tau);
        assert_ne!(relabeled, crowded4);
        assert!(relabeled.validate(8).unwrap().pass);
        // The only self-map is the identity, so the isomorphism found must
        // be the inverse rotation.
        assert_eq!(
            spec_isomorphic(&relabeled, &crowded4),
            Some(DihedralElement::new(4, 3, false))
        );
    }

    #[test]
    fn isomorphism_requires_matching_alphabet_size() {
        assert_eq!(spec_isomorphic(&builtins::gasket(), &builtins::good4()), None);
    }

    #[test]
    fn gasket_self_maps_form_the_full_dihedral_group() {
        let gasket = builtins::gasket();
        let closure = rigid_maps(&gasket, &gasket, 4).unwrap();
        assert_eq!(closure.maps.len(), 6);
        assert_eq!(closure.verdict, ClosureVerdict::Closed);
        assert!(closure.maps[0].is_identity());
        for a in &closure.maps {
            assert!(closure.maps.contains(&a.inverse()));
            for b in &closure.maps {
                assert!(closure.maps.contains(&a.compose(b)));
            }
        }
        assert_eq!(closure.automaton.states.len(), 6);
        assert_eq!(closure.automaton.transitions.len(), 6 * 3);
    }

    #[test]
    fn four_ring_self_maps_count_eight() {
        let g4 = builtins::good4();
        let closure = rigid_maps(&g4, &g4, 4).unwrap();
        assert_eq!(closure.maps.len(), 8);
        assert_eq!(closure.verdict, ClosureVerdict::Closed);
    }

    #[test]
    fn mismatched_alphabets_admit_no_maps() {
        let closure = rigid_maps(&builtins::gasket(), &builtins::good4(), 4).unwrap();
        assert!(closure.maps.is_empty());
        assert_eq!(closure.verdict, ClosureVerdict::Closed);
        assert!(closure.automaton.states.is_empty());
    }

    #[test]
    fn chain_spec_admits_only_the_identity() {
        let crowded4 = builtins::crowded4();
        let closure = rigid_maps(&crowded4, &crowded4, 4).unwrap();
        let names: Vec<String> = closure.maps.iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["r0"]);
    }

    #[test]
    fn relabeled_specs_admit_the_relating_maps() {
        let crowded4 = builtins::crowded4();
        let tau = DihedralElement::new(4, 1, false);
        let relabeled = apply_sigma(&crowded4, &tau);
        let closure = rigid_maps(&crowded4, &relabeled, 3).unwrap();
        assert_eq!(closure.maps.len(), 1, "one map relates the two labelings");
    }

    #[test]
    fn uniqueness_suite_passes_on_well_separated_specs() {
        let report = verify_nifs_uniqueness(&builtins::gasket(), 1, 2).unwrap();
        assert!(report.applicable);
        assert!(report.pass);
        assert_eq!(report.entries.len(), 6);
        for entry in &report.entries {
            assert!(entry.pass, "relabeling {} failed", entry.sigma);
        }
    }

    #[test]
    fn uniqueness_suite_skips_non_separated_specs() {
        let report = verify_nifs_uniqueness(&builtins::crowded4(), 1, 1).unwrap();
        assert!(!report.applicable);
        assert!(report.warning.is_some());
        assert!(report.entries.is_empty());
        assert!(report.pass);
    }

    #[test]
    fn structured_embeddings_land_on_their_copy() {
        let gasket = builtins::gasket();
        let id = DihedralElement::identity(3);
        let check =
            embedding_image_copy_check(&gasket, &"12".parse().unwrap(), &id, 4).unwrap();
        assert!(check.admitted);
        assert!(check.pass);

        let rot = DihedralElement::new(3, 1, false);
        let check = embedding_image_copy_check(&gasket, &"1".parse().unwrap(), &rot, 4).unwrap();
        assert!(check.pass);

        let s = DihedralElement::new(4, 0, true);
        let check =
            embedding_image_copy_check(&builtins::good4(), &Word::empty(), &s, 3).unwrap();
        assert!(check.pass);
    }
}
