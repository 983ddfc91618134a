//! Finite level-`m` models of the attractor.
//!
//! The level-`m` contact graph is bipartite: one vertex per length-`m` word
//! (a cylinder, i.e. an `m`-level copy) and one per identification class
//! that touches at least two distinct cylinders (a contact point). Two
//! distinct same-level cylinders meet in at most one point, and every such
//! point is the image of a main node under a shorter word, so the graph
//! captures the complete adjacency structure at its level.
//!
//! Questions about `F` minus a finite point set are answered on these
//! graphs under *level escalation*: the analysis is re-run at increasing
//! levels until its topological signature (component count, boundary
//! assignments, per-component cut-point counts) is unchanged for a window
//! of consecutive levels. Graph component counts only grow with the level
//! and never exceed the true count, so a stabilized plateau is the value it
//! stabilized to; the window itself is a heuristic and is recorded in every
//! report.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::address::{Address, Word};
use crate::class::{point_class, ClassOptions, PointClass};
use crate::errors::{Error, Result};
use crate::spec::NecklaceSpec;

/// Resource limits and escalation defaults for one [`Engine`].
#[derive(Clone, Debug)]
pub struct EngineLimits {
    /// Identification-closure offset depth; `None` derives
    /// `max(12, max_level + longest rule side + 2)`, enough that every
    /// class is exact for prefixes up to `max_level`.
    pub class_depth: Option<usize>,
    /// Cap on representatives per class.
    pub class_cap: usize,
    /// Cap on cylinders per level (`n^m`).
    pub max_cells: u64,
    /// Highest level the escalation loop may visit.
    pub max_level: usize,
    /// Number of consecutive identical level signatures required.
    pub window: usize,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            class_depth: None,
            class_cap: 64,
            max_cells: 1 << 20,
            max_level: 10,
            window: 2,
        }
    }
}

/// One contact vertex: an identification class together with the level-`m`
/// cylinders containing the point.
#[derive(Clone, Debug)]
pub struct ContactNode {
    pub class: Arc<PointClass>,
    /// Sorted indices of incident cylinders (always ≥ 2).
    pub incident: Vec<u32>,
}

/// Immutable bipartite graph at one level.
#[derive(Debug)]
pub struct ContactGraph {
    level: usize,
    n: u8,
    num_cylinders: usize,
    /// Contact vertices sorted by canonical address.
    contacts: Vec<ContactNode>,
    /// CSR cylinder → contact adjacency.
    cyl_off: Vec<u32>,
    cyl_adj: Vec<u32>,
    /// Canonical address → contact index.
    by_canonical: BTreeMap<Address, u32>,
}

impl ContactGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn num_cylinders(&self) -> usize {
        self.num_cylinders
    }

    pub fn contacts(&self) -> &[ContactNode] {
        &self.contacts
    }

    /// Lexicographic index of a length-`level` word.
    pub fn index_of(&self, w: &[u8]) -> u32 {
        debug_assert_eq!(w.len(), self.level);
        let mut idx: u64 = 0;
        for &s in w {
            idx = idx * self.n as u64 + (s - 1) as u64;
        }
        idx as u32
    }

    /// Word of a cylinder index (inverse of [`Self::index_of`]).
    pub fn word_of(&self, mut idx: u32) -> Word {
        let mut symbols = vec![0u8; self.level];
        for slot in symbols.iter_mut().rev() {
            *slot = (idx % self.n as u32) as u8 + 1;
            idx /= self.n as u32;
        }
        Word(symbols)
    }

    pub fn contact_by_canonical(&self, canonical: &Address) -> Option<u32> {
        self.by_canonical.get(canonical).copied()
    }

    /// Contact indices adjacent to one cylinder.
    pub fn contacts_of(&self, cyl: u32) -> &[u32] {
        &self.cyl_adj[self.cyl_off[cyl as usize] as usize..self.cyl_off[cyl as usize + 1] as usize]
    }

    /// Connected components of the cylinder set `in_set` after deleting the
    /// contact vertices flagged in `removed`. Components are sorted by
    /// least cylinder index and partition the selected cylinders.
    pub fn components(&self, in_set: &[bool], removed: &[bool]) -> Vec<Vec<u32>> {
        debug_assert_eq!(in_set.len(), self.num_cylinders);
        debug_assert_eq!(removed.len(), self.contacts.len());
        let mut seen_cyl = vec![false; self.num_cylinders];
        let mut seen_con = vec![false; self.contacts.len()];
        let mut components = Vec::new();
        for start in 0..self.num_cylinders as u32 {
            if !in_set[start as usize] || seen_cyl[start as usize] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen_cyl[start as usize] = true;
            while let Some(c) = queue.pop_front() {
                comp.push(c);
                for &t in self.contacts_of(c) {
                    if removed[t as usize] || seen_con[t as usize] {
                        continue;
                    }
                    seen_con[t as usize] = true;
                    for &c2 in &self.contacts[t as usize].incident {
                        if in_set[c2 as usize] && !seen_cyl[c2 as usize] {
                            seen_cyl[c2 as usize] = true;
                            queue.push_back(c2);
                        }
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    /// Contact vertices whose deletion disconnects the subgraph induced by
    /// the cylinders `in_set` and the contacts flagged `present`. Returns
    /// indices of articulation contacts that are also flagged `candidate`.
    ///
    /// Separating the graph at a contact separates the underlying space at
    /// that point, so candidate articulations count cut points; cylinders
    /// are point *sets* and are never counted.
    pub fn articulation_contacts(
        &self,
        in_set: &[bool],
        present: &[bool],
        candidate: &[bool],
    ) -> Vec<u32> {
        // Compact vertex space: selected cylinders first, then present
        // contacts with at least one selected incident cylinder.
        let mut cyl_map = vec![u32::MAX; self.num_cylinders];
        let mut vertices: Vec<(bool, u32)> = Vec::new();
        for c in 0..self.num_cylinders as u32 {
            if in_set[c as usize] {
                cyl_map[c as usize] = vertices.len() as u32;
                vertices.push((false, c));
            }
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
        let mut contact_vertex = vec![u32::MAX; self.contacts.len()];
        for (t, node) in self.contacts.iter().enumerate() {
            if !present[t] {
                continue;
            }
            let touching: Vec<u32> = node
                .incident
                .iter()
                .copied()
                .filter(|&c| in_set[c as usize])
                .collect();
            if touching.is_empty() {
                continue;
            }
            let tv = vertices.len() as u32;
            contact_vertex[t] = tv;
            vertices.push((true, t as u32));
            adj.push(Vec::new());
            for c in touching {
                let cv = cyl_map[c as usize];
                adj[cv as usize].push(tv);
                adj[tv as usize].push(cv);
            }
        }

        let art = articulation_points(&adj);
        (0..self.contacts.len() as u32)
            .filter(|&t| {
                candidate[t as usize]
                    && contact_vertex[t as usize] != u32::MAX
                    && art[contact_vertex[t as usize] as usize]
            })
            .collect()
    }

    /// Adjacency-list JSON export: cylinders and contacts in lexicographic
    /// order, addresses as display strings.
    pub fn export_json(&self) -> serde_json::Value {
        serde_json::json!({
            "v": 1,
            "level": self.level,
            "cylinders": (0..self.num_cylinders as u32)
                .map(|c| self.word_of(c).to_string())
                .collect::<Vec<_>>(),
            "contacts": self.contacts.iter().map(|t| serde_json::json!({
                "canonical": t.class.canonical().to_string(),
                "incident": t.incident.iter().map(|&c| self.word_of(c).to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// GraphViz export with cylinders as boxes and contacts as dots.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("graph contact {\n  node [shape=box];\n");
        for c in 0..self.num_cylinders as u32 {
            out.push_str(&format!("  cyl_{0} [label=\"{0}\"];\n", self.word_of(c)));
        }
        for (i, t) in self.contacts.iter().enumerate() {
            out.push_str(&format!(
                "  con_{i} [shape=point, xlabel=\"{}\"];\n",
                t.class.canonical()
            ));
        }
        for (i, t) in self.contacts.iter().enumerate() {
            for &c in &t.incident {
                out.push_str(&format!("  cyl_{} -- con_{i};\n", self.word_of(c)));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Iterative lowlink articulation-point scan over an undirected simple
/// graph given as adjacency lists.
fn articulation_points(adj: &[Vec<u32>]) -> Vec<bool> {
    let n = adj.len();
    let mut disc = vec![0u32; n];
    let mut low = vec![0u32; n];
    let mut is_art = vec![false; n];
    let mut timer = 1u32;
    // (vertex, parent, next-neighbor position)
    let mut stack: Vec<(u32, u32, u32)> = Vec::new();
    for root in 0..n as u32 {
        if disc[root as usize] != 0 {
            continue;
        }
        let mut root_children = 0u32;
        disc[root as usize] = timer;
        low[root as usize] = timer;
        timer += 1;
        stack.push((root, u32::MAX, 0));
        while let Some(frame) = stack.last_mut() {
            let (v, parent, ci) = (frame.0, frame.1, frame.2);
            if (ci as usize) < adj[v as usize].len() {
                frame.2 += 1;
                let to = adj[v as usize][ci as usize];
                if disc[to as usize] == 0 {
                    disc[to as usize] = timer;
                    low[to as usize] = timer;
                    timer += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((to, v, 0));
                } else if to != parent {
                    low[v as usize] = low[v as usize].min(disc[to as usize]);
                }
            } else {
                stack.pop();
                if let Some(pframe) = stack.last() {
                    let p = pframe.0;
                    low[p as usize] = low[p as usize].min(low[v as usize]);
                    if p != root && low[v as usize] >= disc[p as usize] {
                        is_art[p as usize] = true;
                    }
                }
            }
        }
        if root_children >= 2 {
            is_art[root as usize] = true;
        }
    }
    is_art
}

/// One component of `F` minus a removed point set, at the stabilized level.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentData {
    /// Cylinder words at the stabilized level, sorted.
    pub cylinders: Vec<String>,
    /// Distinct first symbols of the component's cylinders, sorted. A
    /// component confined to one top-level copy lists exactly one symbol.
    pub first_symbols: Vec<u8>,
    /// Canonical addresses of removed classes adjacent to the component.
    pub boundary: Vec<String>,
    /// Number of cut points of the component's closure.
    pub ncp: usize,
}

/// Stabilized decomposition of `F` minus a finite set of point classes.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentSet {
    /// Canonical addresses of the removed classes.
    pub removed: Vec<String>,
    /// Level at which the signature first repeated for a full window.
    pub stable_at: usize,
    /// Window length used (consecutive identical signatures required).
    pub window: usize,
    /// Components in canonical order (least cylinder word first).
    pub components: Vec<ComponentData>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Largest per-component closure cut-point count (0 when there are no
    /// components at all, which cannot happen for nonempty graphs).
    pub fn max_ncp(&self) -> usize {
        self.components.iter().map(|c| c.ncp).max().unwrap_or(0)
    }
}

/// Minimality evidence for one proper subset of a candidate cut.
#[derive(Clone, Serialize)]
pub struct SubsetEvidence {
    pub subset: Vec<String>,
    pub component_count: usize,
}

/// Verdict of the cut test: disconnects, and minimally so.
#[derive(Clone, Serialize)]
pub struct CutVerdict {
    pub removed: Vec<String>,
    pub cut: bool,
    pub component_count: usize,
    pub proper_subsets_connected: bool,
    pub subsets: Vec<SubsetEvidence>,
}

/// Shared analysis context: one spec plus memoized classes and level
/// graphs. All methods take `&self`; the engine is `Sync` and is shared
/// freely across worker threads.
pub struct Engine {
    spec: Arc<NecklaceSpec>,
    limits: EngineLimits,
    class_opts: ClassOptions,
    graphs: Mutex<BTreeMap<usize, Arc<ContactGraph>>>,
    classes: Mutex<BTreeMap<Address, Arc<PointClass>>>,
}

impl Engine {
    pub fn new(spec: NecklaceSpec, limits: EngineLimits) -> Self {
        let depth = limits
            .class_depth
            .unwrap_or_else(|| 12.max(limits.max_level + spec.max_side_len() + 2));
        let class_opts = ClassOptions {
            depth,
            cap: limits.class_cap,
        };
        Engine {
            spec: Arc::new(spec),
            limits,
            class_opts,
            graphs: Mutex::new(BTreeMap::new()),
            classes: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn spec(&self) -> &NecklaceSpec {
        &self.spec
    }

    pub fn limits(&self) -> &EngineLimits {
        &self.limits
    }

    pub fn class_options(&self) -> &ClassOptions {
        &self.class_opts
    }

    /// Memoized identification class of `a` at the engine's uniform depth.
    pub fn class(&self, a: &Address) -> Result<Arc<PointClass>> {
        if let Some(hit) = self.classes.lock().expect("class memo").get(a) {
            return Ok(hit.clone());
        }
        let class = Arc::new(point_class(&self.spec, a, &self.class_opts)?);
        let mut memo = self.classes.lock().expect("class memo");
        for rep in class.representatives() {
            memo.entry(rep.clone()).or_insert_with(|| class.clone());
        }
        Ok(memo.get(a).expect("just inserted").clone())
    }

    /// Memoized main-node classes of the copy `w`.
    pub fn main_nodes(&self, w: &Word) -> Result<Vec<Arc<PointClass>>> {
        (1..=self.spec.n())
            .map(|k| {
                let (left, _) = self.spec.node_pair(k);
                self.class(&left.prepend(w))
            })
            .collect()
    }

    /// Memoized contact graph at one level.
    pub fn contact_graph(&self, m: usize) -> Result<Arc<ContactGraph>> {
        if let Some(hit) = self.graphs.lock().expect("graph memo").get(&m) {
            return Ok(hit.clone());
        }
        let graph = Arc::new(self.build_graph(m)?);
        self.graphs
            .lock()
            .expect("graph memo")
            .entry(m)
            .or_insert_with(|| graph.clone());
        Ok(graph)
    }

    fn build_graph(&self, m: usize) -> Result<ContactGraph> {
        let n = self.spec.n();
        let cells = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        if cells > self.limits.max_cells as u128 {
            return Err(Error::CellCap {
                level: m,
                cells,
                cap: self.limits.max_cells,
            });
        }
        let num_cylinders = cells as usize;

        // Every contact at level m is the class of w·k·u_k for some word w
        // shorter than m; walk all of them, keeping classes that span at
        // least two level-m cylinders.
        let mut chosen: BTreeMap<Address, ContactNode> = BTreeMap::new();
        let mut frontier: Vec<Word> = vec![Word::empty()];
        for _len in 0..m {
            for w in &frontier {
                for k in 1..=n {
                    let (left, _) = self.spec.node_pair(k);
                    let class = self.class(&left.prepend(w))?;
                    if chosen.contains_key(class.canonical()) {
                        continue;
                    }
                    let prefixes = class.prefixes(m);
                    if prefixes.len() < 2 {
                        continue;
                    }
                    let mut incident: Vec<u32> = prefixes
                        .iter()
                        .map(|p| {
                            let mut idx: u64 = 0;
                            for &s in p.as_slice() {
                                idx = idx * n as u64 + (s - 1) as u64;
                            }
                            idx as u32
                        })
                        .collect();
                    incident.sort_unstable();
                    chosen.insert(
                        class.canonical().clone(),
                        ContactNode {
                            class: class.clone(),
                            incident,
                        },
                    );
                }
            }
            if _len + 1 < m {
                let mut next = Vec::with_capacity(frontier.len() * n as usize);
                for w in &frontier {
                    for s in 1..=n {
                        let mut w2 = w.clone();
                        w2.push(s);
                        next.push(w2);
                    }
                }
                frontier = next;
            }
        }

        let contacts: Vec<ContactNode> = chosen.values().cloned().collect();
        let by_canonical: BTreeMap<Address, u32> = contacts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.class.canonical().clone(), i as u32))
            .collect();

        // CSR cylinder → contact adjacency.
        let mut counts = vec![0u32; num_cylinders + 1];
        for t in &contacts {
            for &c in &t.incident {
                counts[c as usize + 1] += 1;
            }
        }
        for i in 0..num_cylinders {
            counts[i + 1] += counts[i];
        }
        let mut cyl_adj = vec![0u32; counts[num_cylinders] as usize];
        let mut cursor = counts.clone();
        for (i, t) in contacts.iter().enumerate() {
            for &c in &t.incident {
                cyl_adj[cursor[c as usize] as usize] = i as u32;
                cursor[c as usize] += 1;
            }
        }

        Ok(ContactGraph {
            level: m,
            n,
            num_cylinders,
            contacts,
            cyl_off: counts,
            cyl_adj,
            by_canonical,
        })
    }

    /// Level at which every class in `S` is visible as a contact, plus the
    /// escalation head start.
    fn start_level(&self, removed: &[Arc<PointClass>], m0: Option<usize>) -> usize {
        let defining = removed
            .iter()
            .filter_map(|c| c.defining_level())
            .max()
            .unwrap_or(1);
        m0.unwrap_or(defining + 2).max(defining).max(1)
    }

    /// Components of `F` minus the points of `S`, with per-component
    /// boundary and closure cut-point count, stabilized over the engine's
    /// window.
    pub fn components_minus(
        &self,
        s: &[Arc<PointClass>],
        m0: Option<usize>,
    ) -> Result<ComponentSet> {
        let start = self.start_level(s, m0);
        let window = self.limits.window.max(1);
        // Signature: sorted multiset of (boundary canonicals, ncp).
        let mut history: VecDeque<Vec<(Vec<String>, usize)>> = VecDeque::new();
        for m in start..=self.limits.max_level {
            let graph = self.contact_graph(m)?;
            let level = self.analyze_level(&graph, s)?;
            let mut signature: Vec<(Vec<String>, usize)> = level
                .iter()
                .map(|(_, boundary, ncp)| (boundary.clone(), *ncp))
                .collect();
            signature.sort();
            history.push_back(signature);
            if history.len() > window {
                history.pop_front();
            }
            if history.len() == window && history.iter().all(|sig| *sig == history[0]) {
                let components = level
                    .into_iter()
                    .map(|(cyls, boundary, ncp)| {
                        let words: Vec<Word> = cyls.iter().map(|&c| graph.word_of(c)).collect();
                        let first_symbols: Vec<u8> = words
                            .iter()
                            .map(|w| w.as_slice()[0])
                            .collect::<BTreeSet<u8>>()
                            .into_iter()
                            .collect();
                        ComponentData {
                            cylinders: words.iter().map(|w| w.to_string()).collect(),
                            first_symbols,
                            boundary,
                            ncp,
                        }
                    })
                    .collect();
                return Ok(ComponentSet {
                    removed: s.iter().map(|c| c.canonical().to_string()).collect(),
                    stable_at: m,
                    window,
                    components,
                });
            }
        }
        Err(Error::LevelCap {
            max_level: self.limits.max_level,
            window,
        })
    }

    /// One level of the decomposition: per component, its cylinders, the
    /// removed classes on its boundary, and the closure cut-point count.
    #[allow(clippy::type_complexity)]
    fn analyze_level(
        &self,
        graph: &ContactGraph,
        s: &[Arc<PointClass>],
    ) -> Result<Vec<(Vec<u32>, Vec<String>, usize)>> {
        let mut removed = vec![false; graph.contacts().len()];
        for class in s {
            if let Some(idx) = graph.contact_by_canonical(class.canonical()) {
                removed[idx as usize] = true;
            }
            // A class not visible at this level is either not yet a contact
            // (the start level prevents that) or has a single name and its
            // removal never separates anything.
        }
        let all = vec![true; graph.num_cylinders()];
        let comps = graph.components(&all, &removed);

        let mut out = Vec::with_capacity(comps.len());
        for comp in comps {
            let mut in_comp = vec![false; graph.num_cylinders()];
            for &c in &comp {
                in_comp[c as usize] = true;
            }
            // Closure subgraph: the component's cylinders plus every
            // contact touching them. Removed classes on the boundary are
            // limit points of the component, so they stay as connecting
            // vertices, but as boundary points they can never be cut
            // points of the closure — only interior contacts are
            // candidates.
            let mut present = vec![false; graph.contacts().len()];
            let mut candidate = vec![false; graph.contacts().len()];
            let mut boundary: BTreeSet<String> = BTreeSet::new();
            for (t, node) in graph.contacts().iter().enumerate() {
                let touches = node.incident.iter().any(|&c| in_comp[c as usize]);
                if !touches {
                    continue;
                }
                present[t] = true;
                if removed[t] {
                    boundary.insert(node.class.canonical().to_string());
                } else {
                    candidate[t] = true;
                }
            }
            let ncp = graph
                .articulation_contacts(&in_comp, &present, &candidate)
                .len();
            out.push((comp, boundary.into_iter().collect(), ncp));
        }
        Ok(out)
    }

    /// Is `S` a cut: does removing it disconnect, while every proper
    /// nonempty subset leaves the space connected?
    pub fn is_cut(&self, s: &[Arc<PointClass>]) -> Result<CutVerdict> {
        assert!(!s.is_empty(), "cut candidate must be nonempty");
        assert!(s.len() <= 8, "cut candidates are small finite sets");
        let full = self.components_minus(s, None)?;
        let mut subsets = Vec::new();
        let mut minimal = true;
        for mask in 1..(1u32 << s.len()) - 1 {
            let subset: Vec<Arc<PointClass>> = (0..s.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| s[i].clone())
                .collect();
            let result = self.components_minus(&subset, None)?;
            if result.len() != 1 {
                minimal = false;
            }
            subsets.push(SubsetEvidence {
                subset: subset.iter().map(|c| c.canonical().to_string()).collect(),
                component_count: result.len(),
            });
        }
        Ok(CutVerdict {
            removed: s.iter().map(|c| c.canonical().to_string()).collect(),
            cut: full.len() >= 2 && minimal,
            component_count: full.len(),
            proper_subsets_connected: minimal,
            subsets,
        })
    }

    /// Stabilized analysis of `F` minus the copy named `w` (a set-level
    /// deletion): connectivity of the complement and the cut-point count of
    /// its closure.
    pub fn copy_complement(&self, w: &Word) -> Result<CopyComplement> {
        assert!(!w.is_empty(), "removing the root leaves nothing");
        let window = self.limits.window.max(1);
        let mut history: VecDeque<(usize, usize, Vec<String>)> = VecDeque::new();
        for m in (w.len() + 2).max(2)..=self.limits.max_level {
            let graph = self.contact_graph(m)?;
            // Cylinders outside the subtree of w.
            let mut outside = vec![false; graph.num_cylinders()];
            for c in 0..graph.num_cylinders() as u32 {
                outside[c as usize] = !graph.word_of(c).starts_with(w.as_slice());
            }
            // A contact is a point of the copy iff one of its names starts
            // with w; such points on the closure boundary connect but are
            // never cut candidates.
            let mut present = vec![false; graph.contacts().len()];
            let mut candidate = vec![false; graph.contacts().len()];
            let mut boundary: BTreeSet<String> = BTreeSet::new();
            let mut removed = vec![false; graph.contacts().len()];
            for (t, node) in graph.contacts().iter().enumerate() {
                let touches_outside = node.incident.iter().any(|&c| outside[c as usize]);
                if !touches_outside {
                    continue;
                }
                let in_copy = node
                    .class
                    .representatives()
                    .iter()
                    .any(|r| r.starts_with(w.as_slice()));
                present[t] = true;
                if in_copy {
                    boundary.insert(node.class.canonical().to_string());
                    removed[t] = true;
                } else {
                    candidate[t] = true;
                }
            }
            let comps = graph.components(&outside, &removed);
            let ncp = graph
                .articulation_contacts(&outside, &present, &candidate)
                .len();
            let boundary: Vec<String> = boundary.into_iter().collect();
            let sig = (comps.len(), ncp, boundary.clone());
            history.push_back(sig);
            if history.len() > window {
                history.pop_front();
            }
            if history.len() == window && history.iter().all(|s| *s == history[0]) {
                return Ok(CopyComplement {
                    copy: w.to_string(),
                    stable_at: m,
                    connected: comps.len() == 1,
                    component_count: comps.len(),
                    closure_ncp: ncp,
                    boundary,
                });
            }
        }
        Err(Error::LevelCap {
            max_level: self.limits.max_level,
            window,
        })
    }
}

/// Stabilized facts about `F` minus one copy.
#[derive(Clone, Serialize)]
pub struct CopyComplement {
    pub copy: String,
    pub stable_at: usize,
    pub connected: bool,
    pub component_count: usize,
    /// Cut points of the closure of the complement.
    pub closure_ncp: usize,
    /// Canonical addresses of the copy's boundary (points shared with the
    /// complement).
    pub boundary: Vec<String>,
}
