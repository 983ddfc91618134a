//! Two-point cut analysis: verified cut reports, the boundary-pair survey
//! with its extremal verdicts, and the aggregated structure-theorem checks.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::address::{prev_symbol, Address, Symbol, Word};
use crate::class::{check_goodness, PointClass};
use crate::errors::{Error, Result};
use crate::graph::{ComponentSet, Engine};

/// Full report for one candidate cut: minimality evidence, the stabilized
/// component decomposition, and per-component closure cut-point counts.
#[derive(Clone, Debug, Serialize)]
pub struct CutReport {
    /// Canonical addresses of the removed points.
    pub points: Vec<String>,
    pub is_cut: bool,
    pub proper_subsets_connected: bool,
    pub components: ComponentSet,
    /// Closure cut-point counts in component order (least cylinder word
    /// first).
    pub ncp_per_component: Vec<usize>,
    /// Largest entry of `ncp_per_component`.
    #[serde(rename = "N")]
    pub n: usize,
}

/// Evaluate a candidate cut without demanding that it is one.
pub fn cut_report(engine: &Engine, s: &[Arc<PointClass>]) -> Result<CutReport> {
    let verdict = engine.is_cut(s)?;
    let set = engine.components_minus(s, None)?;
    let ncp_per_component: Vec<usize> = set.components.iter().map(|c| c.ncp).collect();
    let n = ncp_per_component.iter().copied().max().unwrap_or(0);
    Ok(CutReport {
        points: verdict.removed,
        is_cut: verdict.cut,
        proper_subsets_connected: verdict.proper_subsets_connected,
        components: set,
        ncp_per_component,
        n,
    })
}

/// Like [`cut_report`], but refuses sets that are not minimal cuts.
pub fn n_of_cut(engine: &Engine, s: &[Arc<PointClass>]) -> Result<CutReport> {
    let report = cut_report(engine, s)?;
    if !report.is_cut {
        let reason = if report.components.len() < 2 {
            "removal leaves the space connected"
        } else {
            "a proper subset already disconnects"
        };
        return Err(Error::NotACut(report.points.join(", "), reason.into()));
    }
    Ok(report)
}

/// Candidate two-point cuts: all unordered pairs of main-node classes
/// taken within a common copy.
pub struct CandidatePairs {
    /// Pairs enumerated before deduplication (`C(n,2)` per copy).
    pub pre_dedup: usize,
    /// Distinct pairs, ordered by canonical addresses.
    pub pairs: Vec<(Arc<PointClass>, Arc<PointClass>)>,
}

/// Enumerate candidate pairs over all copies of level at most `level_cap`.
/// Every two-point cut consists of two main nodes of a single copy, so
/// this candidate set is exhaustive up to the cap.
pub fn candidate_2cuts(engine: &Engine, level_cap: usize) -> Result<CandidatePairs> {
    let n = engine.spec().n();
    let copy_count = (n as u128).checked_pow(level_cap as u32).unwrap_or(u128::MAX);
    if copy_count > engine.limits().max_cells as u128 {
        return Err(Error::CellCap {
            level: level_cap,
            cells: copy_count,
            cap: engine.limits().max_cells,
        });
    }

    let mut pre_dedup = 0usize;
    let mut seen: BTreeMap<(Address, Address), (Arc<PointClass>, Arc<PointClass>)> =
        BTreeMap::new();
    let mut copies = vec![Word::empty()];
    for level in 0..=level_cap {
        for w in &copies {
            let nodes = engine.main_nodes(w)?;
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    pre_dedup += 1;
                    let (a, b) = (&nodes[i], &nodes[j]);
                    if a.canonical() == b.canonical() {
                        continue;
                    }
                    let (first, second) = if a.canonical() < b.canonical() {
                        (a, b)
                    } else {
                        (b, a)
                    };
                    seen.entry((first.canonical().clone(), second.canonical().clone()))
                        .or_insert_with(|| (first.clone(), second.clone()));
                }
            }
        }
        if level < level_cap {
            let mut next = Vec::with_capacity(copies.len() * n as usize);
            for w in &copies {
                for s in 1..=n {
                    let mut w2 = w.clone();
                    w2.push(s);
                    next.push(w2);
                }
            }
            copies = next;
        }
    }
    Ok(CandidatePairs {
        pre_dedup,
        pairs: seen.into_values().collect(),
    })
}

/// One surveyed candidate pair.
#[derive(Clone, Serialize)]
pub struct SurveyEntry {
    pub points: Vec<String>,
    pub is_cut: bool,
    pub component_count: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub stable_at: usize,
}

/// Resource parameters a survey ran under.
#[derive(Clone, Serialize)]
pub struct SurveyCaps {
    pub level_cap: usize,
    pub max_level: usize,
    pub window: usize,
    pub class_cap: usize,
    pub max_cells: u64,
}

/// Comparison of the computed extremal set against the prediction for
/// well-separated specs: the boundary pairs of the top-level copies.
#[derive(Clone, Serialize)]
pub struct SurveyVerdicts {
    pub good: bool,
    /// The predicted extremal pairs (adjacent main nodes), sorted.
    pub predicted_extremal: Vec<Vec<String>>,
    /// Whether the computed extremal set equals the prediction exactly.
    pub matches_prediction: bool,
}

/// Outcome of the extremal survey over candidate two-point cuts.
#[derive(Clone, Serialize)]
pub struct ExtremalSurvey {
    pub v: u32,
    pub label: String,
    /// Largest `N` over all surveyed cuts.
    #[serde(rename = "N2")]
    pub n2: usize,
    /// Full reports for the cuts attaining `N2`, in candidate order.
    pub extremal: Vec<CutReport>,
    /// For each extremal cut, indices of its components attaining `N2`.
    pub extremal_components: Vec<Vec<usize>>,
    /// Distinct candidate pairs examined.
    pub candidates: usize,
    pub candidates_pre_dedup: usize,
    /// How many candidates are minimal cuts.
    pub cut_count: usize,
    pub caps: SurveyCaps,
    pub verdicts: SurveyVerdicts,
    /// Verdict for every candidate, in candidate order.
    pub entries: Vec<SurveyEntry>,
}

fn evaluate_pair(
    engine: &Engine,
    a: &Arc<PointClass>,
    b: &Arc<PointClass>,
) -> Result<SurveyEntry> {
    let s = [a.clone(), b.clone()];
    let verdict = engine.is_cut(&s)?;
    let set = engine.components_minus(&s, None)?;
    Ok(SurveyEntry {
        points: vec![a.canonical().to_string(), b.canonical().to_string()],
        is_cut: verdict.cut,
        component_count: set.len(),
        n: set.max_ncp(),
        stable_at: set.stable_at,
    })
}

/// The boundary pairs of the top-level copies, each as a sorted
/// two-element list of canonical addresses; the whole list sorted.
fn predicted_extremal_pairs(engine: &Engine) -> Result<Vec<Vec<String>>> {
    let n = engine.spec().n();
    let nodes = engine.main_nodes(&Word::empty())?;
    let mut out: BTreeSet<Vec<String>> = BTreeSet::new();
    for k in 1..=n {
        let prev = prev_symbol(k, n);
        let mut pair = vec![
            nodes[prev as usize - 1].canonical().clone(),
            nodes[k as usize - 1].canonical().clone(),
        ];
        pair.sort();
        out.insert(pair.into_iter().map(|a| a.to_string()).collect());
    }
    Ok(out.into_iter().collect())
}

/// Survey every candidate pair up to `level_cap`, evaluating candidates in
/// parallel when `threads > 1`. The reduction is order-insensitive and the
/// report is deterministic regardless of thread count.
pub fn survey_extremal(engine: &Engine, level_cap: usize, threads: usize) -> Result<ExtremalSurvey> {
    let cands = candidate_2cuts(engine, level_cap)?;
    let pairs = &cands.pairs;

    let results: Vec<Result<SurveyEntry>> = if threads <= 1 || pairs.len() <= 1 {
        pairs
            .iter()
            .map(|(a, b)| evaluate_pair(engine, a, b))
            .collect()
    } else {
        let workers = threads.min(pairs.len());
        let mut slots: Vec<Option<Result<SurveyEntry>>> =
            (0..pairs.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|t| {
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        let mut i = t;
                        while i < pairs.len() {
                            let (a, b) = &pairs[i];
                            out.push((i, evaluate_pair(engine, a, b)));
                            i += workers;
                        }
                        out
                    })
                })
                .collect();
            for handle in handles {
                for (i, r) in handle.join().expect("survey worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("slot filled")).collect()
    };

    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        entries.push(r?);
    }

    let cut_count = entries.iter().filter(|e| e.is_cut).count();
    let n2 = entries
        .iter()
        .filter(|e| e.is_cut)
        .map(|e| e.n)
        .max()
        .unwrap_or(0);

    let mut extremal = Vec::new();
    let mut extremal_components = Vec::new();
    let mut extremal_points: BTreeSet<Vec<String>> = BTreeSet::new();
    if cut_count > 0 {
        for (i, entry) in entries.iter().enumerate() {
            if !entry.is_cut || entry.n != n2 {
                continue;
            }
            let (a, b) = &pairs[i];
            let report = cut_report(engine, &[a.clone(), b.clone()])?;
            let indices: Vec<usize> = report
                .ncp_per_component
                .iter()
                .enumerate()
                .filter(|(_, &ncp)| ncp == n2)
                .map(|(idx, _)| idx)
                .collect();
            extremal_points.insert(entry.points.clone());
            extremal.push(report);
            extremal_components.push(indices);
        }
    }

    let goodness = check_goodness(engine.spec(), engine.class_options())?;
    let predicted = predicted_extremal_pairs(engine)?;
    let matches_prediction = extremal_points == predicted.iter().cloned().collect::<BTreeSet<_>>();

    Ok(ExtremalSurvey {
        v: 1,
        label: engine.spec().label().to_string(),
        n2,
        extremal,
        extremal_components,
        candidates: pairs.len(),
        candidates_pre_dedup: cands.pre_dedup,
        cut_count,
        caps: SurveyCaps {
            level_cap,
            max_level: engine.limits().max_level,
            window: engine.limits().window,
            class_cap: engine.limits().class_cap,
            max_cells: engine.limits().max_cells,
        },
        verdicts: SurveyVerdicts {
            good: goodness.good,
            predicted_extremal: predicted,
            matches_prediction,
        },
        entries,
    })
}

/// Per-component verdict for the boundary-pair cut of one top-level copy.
#[derive(Clone, Serialize)]
pub struct ComponentVerdict {
    pub least_word: String,
    pub size: usize,
    pub ncp: usize,
    /// True when no cylinder of the component lies inside copy `k`.
    pub external: bool,
    /// True when the component attains the cut's `N`.
    pub extremal: bool,
}

/// Which components of `F` minus the boundary pair of copy `k` attain the
/// maximum closure cut-point count.
#[derive(Clone, Serialize)]
pub struct ExtremalComponentsReport {
    pub k: Symbol,
    pub points: Vec<String>,
    #[serde(rename = "N")]
    pub n: usize,
    pub components: Vec<ComponentVerdict>,
    /// Every external component attains `N`.
    pub external_extremal: bool,
    /// Exactly one component attains `N`.
    pub unique_extremal: bool,
    pub stable_at: usize,
}

/// Analyze the cut formed by the two boundary nodes of top-level copy `k`.
pub fn extremal_components(engine: &Engine, k: Symbol) -> Result<ExtremalComponentsReport> {
    let n = engine.spec().n();
    if k == 0 || k > n {
        return Err(Error::Param(format!("copy index {k} out of range 1..={n}")));
    }
    let nodes = engine.main_nodes(&Word::empty())?;
    let prev = prev_symbol(k, n);
    let s = [
        nodes[prev as usize - 1].clone(),
        nodes[k as usize - 1].clone(),
    ];
    let report = n_of_cut(engine, &s)?;

    let components: Vec<ComponentVerdict> = report
        .components
        .components
        .iter()
        .map(|c| ComponentVerdict {
            least_word: c.cylinders.first().cloned().unwrap_or_default(),
            size: c.cylinders.len(),
            ncp: c.ncp,
            external: !c.first_symbols.contains(&k),
            extremal: c.ncp == report.n,
        })
        .collect();
    let external_extremal = components.iter().any(|c| c.external)
        && components.iter().filter(|c| c.external).all(|c| c.extremal);
    let unique_extremal = components.iter().filter(|c| c.extremal).count() == 1;

    Ok(ExtremalComponentsReport {
        k,
        points: report.points.clone(),
        n: report.n,
        components,
        external_extremal,
        unique_extremal,
        stable_at: report.components.stable_at,
    })
}

/// One aggregated claim check.
#[derive(Clone, Serialize)]
pub struct SuiteClaim {
    pub name: String,
    /// False when the claim's hypothesis does not hold for this spec (for
    /// example a claim that requires goodness, on a non-good spec); such
    /// claims are reported but never asserted.
    pub applicable: bool,
    pub pass: bool,
    pub details: String,
    pub witnesses: Vec<String>,
}

/// Aggregated verdicts for the structure theorems on one spec.
#[derive(Clone, Serialize)]
pub struct SuiteReport {
    pub v: u32,
    pub label: String,
    pub n: u8,
    pub good: bool,
    pub level_cap: usize,
    pub copy_level_max: usize,
    /// All applicable claims pass.
    pub pass: bool,
    pub claims: Vec<SuiteClaim>,
}

/// Run the full claim suite:
///
/// 1. no candidate node is a cut point;
/// 2. every surveyed cut has `N ≤ n − 2`;
/// 3. (good specs) the extremal cuts are exactly the copy-boundary pairs;
/// 4. (good specs) each such cut has a unique extremal component, the
///    external one;
/// 5. (good specs) removing any copy of level `1..=copy_level_max` with a
///    two-point boundary leaves the space connected;
/// 6. (good specs) for such copies of level `≥ 2`, the closure of the
///    complement has fewer than `n − 2` cut points.
pub fn verify_theorem_suite(
    engine: &Engine,
    level_cap: usize,
    copy_level_max: usize,
    threads: usize,
) -> Result<SuiteReport> {
    let spec = engine.spec();
    let n = spec.n();
    let goodness = check_goodness(spec, engine.class_options())?;
    let good = goodness.good;
    let mut claims = Vec::new();

    // Claim 1: no single candidate node disconnects the space.
    let cands = candidate_2cuts(engine, level_cap)?;
    let mut singles: BTreeMap<Address, Arc<PointClass>> = BTreeMap::new();
    for (a, b) in &cands.pairs {
        singles.entry(a.canonical().clone()).or_insert_with(|| a.clone());
        singles.entry(b.canonical().clone()).or_insert_with(|| b.clone());
    }
    let mut cut_point_witnesses = Vec::new();
    for class in singles.values() {
        let set = engine.components_minus(&[class.clone()], None)?;
        if set.len() > 1 {
            cut_point_witnesses.push(class.canonical().to_string());
        }
    }
    let no_cut_points = cut_point_witnesses.is_empty();
    claims.push(SuiteClaim {
        name: "no_cut_points".into(),
        applicable: true,
        pass: no_cut_points,
        details: format!(
            "checked {} candidate nodes from copies of level <= {level_cap}",
            singles.len()
        ),
        witnesses: cut_point_witnesses,
    });

    // Claim 2: N <= n - 2 over the survey (hypothesis: no cut points).
    let survey = survey_extremal(engine, level_cap, threads)?;
    let bound = (n - 2) as usize;
    let bound_witnesses: Vec<String> = survey
        .entries
        .iter()
        .filter(|e| e.is_cut && e.n > bound)
        .map(|e| format!("{{{}}} has N={}", e.points.join(", "), e.n))
        .collect();
    claims.push(SuiteClaim {
        name: "two_point_cut_bound".into(),
        applicable: no_cut_points,
        pass: bound_witnesses.is_empty(),
        details: format!(
            "N2={} over {} candidates, bound n-2={bound}",
            survey.n2, survey.candidates
        ),
        witnesses: bound_witnesses,
    });

    // Claim 3: extremal set matches the boundary-pair prediction.
    claims.push(SuiteClaim {
        name: "extremal_set_is_boundary_pairs".into(),
        applicable: good,
        pass: survey.verdicts.matches_prediction,
        details: format!(
            "{} extremal cuts computed, {} predicted",
            survey.extremal.len(),
            survey.verdicts.predicted_extremal.len()
        ),
        witnesses: if survey.verdicts.matches_prediction {
            Vec::new()
        } else {
            survey
                .extremal
                .iter()
                .map(|r| format!("{{{}}}", r.points.join(", ")))
                .collect()
        },
    });

    // Claim 4: each boundary-pair cut has a unique extremal component, the
    // external one.
    let mut external_witnesses = Vec::new();
    if good {
        for k in 1..=n {
            let report = extremal_components(engine, k)?;
            if !(report.external_extremal && report.unique_extremal) {
                external_witnesses.push(format!(
                    "copy {k}: external_extremal={}, unique_extremal={}",
                    report.external_extremal, report.unique_extremal
                ));
            }
        }
    }
    claims.push(SuiteClaim {
        name: "external_component_unique_extremal".into(),
        applicable: good,
        pass: external_witnesses.is_empty(),
        details: format!("checked boundary pairs of all {n} top-level copies"),
        witnesses: external_witnesses,
    });

    // Claims 5 and 6: copy complements, over copies with two boundary
    // points.
    let mut complement_checked = 0usize;
    let mut ncp_checked = 0usize;
    let mut connect_witnesses = Vec::new();
    let mut ncp_witnesses = Vec::new();
    if good {
        let mut copies = vec![Word::empty()];
        for level in 1..=copy_level_max {
            let mut next = Vec::with_capacity(copies.len() * n as usize);
            for w in &copies {
                for s in 1..=n {
                    let mut w2 = w.clone();
                    w2.push(s);
                    next.push(w2);
                }
            }
            copies = next;
            for w in &copies {
                let cc = engine.copy_complement(w)?;
                if cc.boundary.len() != 2 {
                    continue;
                }
                complement_checked += 1;
                if !cc.connected {
                    connect_witnesses.push(format!(
                        "copy {w}: {} components",
                        cc.component_count
                    ));
                }
                if level >= 2 {
                    ncp_checked += 1;
                    if cc.closure_ncp >= bound {
                        ncp_witnesses.push(format!(
                            "copy {w}: closure ncp={} >= {bound}",
                            cc.closure_ncp
                        ));
                    }
                }
            }
        }
    }
    claims.push(SuiteClaim {
        name: "copy_complement_connected".into(),
        applicable: good,
        pass: connect_witnesses.is_empty(),
        details: format!(
            "checked {complement_checked} two-boundary copies of level 1..={copy_level_max}"
        ),
        witnesses: connect_witnesses,
    });
    claims.push(SuiteClaim {
        name: "complement_closure_ncp_below_bound".into(),
        applicable: good,
        pass: ncp_witnesses.is_empty(),
        details: format!(
            "checked {ncp_checked} two-boundary copies of level 2..={copy_level_max}"
        ),
        witnesses: ncp_witnesses,
    });

    let pass = claims.iter().all(|c| !c.applicable || c.pass);
    Ok(SuiteReport {
        v: 1,
        label: spec.label().to_string(),
        n,
        good,
        level_cap,
        copy_level_max,
        pass,
        claims,
    })
}
