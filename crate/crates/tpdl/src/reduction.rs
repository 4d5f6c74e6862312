//! Reduction sets.
//!
//! Each α/β formula reduces to one or more *reduction sets*: joint
//! replacements that preserve satisfiability. For a non-eventuality the sets
//! come straight off the classification table — α gives the single set
//! `{α1, α2}`, β gives the two singletons `{β1}` and `{β2}`.
//!
//! Eventualities need more care: naively unfolding `~[A*]f` regenerates the
//! formula itself, so instead the diamond is *decomposed to a fixpoint*. The
//! decomposition walks triples `(P, T, focus)` — `P` the eventuality foci
//! already unfolded on this branch, `T` the tests collected from the
//! programs' test positions, `focus` the current diamond — and rewrites the
//! focus by its outermost program constructor until no rule applies. A branch
//! whose focus reappears in `P` is dropped: re-deriving the same diamond adds
//! nothing. Every surviving branch contributes the reduction set
//! `T ∪ {focus}`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{LazyLock, Mutex};

use crate::syntax::{
    self, boxf, canon_cmp_f, classify, fview, is_eventuality, not, omega, pview, test,
    Classification, FId, FView, PView,
};

/// A decomposition endpoint: the collected tests and the final focus.
pub type FinalPair = (BTreeSet<FId>, FId);

/// Decompose an eventuality diamond to its finalized pairs `(tests, focus)`.
///
/// The result is deterministic: pairs are sorted by the canonical structural
/// order of their focus, then of their test sets.
///
/// # Panics
///
/// Panics when `f` is not an α/β eventuality.
pub fn finalized_decomposition(f: FId) -> Vec<FinalPair> {
    assert!(
        is_eventuality(f) && syntax::is_alpha_beta(f),
        "finalized decomposition requires an alpha/beta eventuality"
    );
    struct Triple {
        p: BTreeSet<FId>,
        t: BTreeSet<FId>,
        focus: FId,
    }
    let mut pairs: BTreeSet<FinalPair> = BTreeSet::new();
    let mut work = vec![Triple {
        p: BTreeSet::new(),
        t: BTreeSet::new(),
        focus: f,
    }];
    while let Some(Triple { p, t, focus }) = work.pop() {
        if !is_eventuality(focus) {
            pairs.insert((t, focus));
            continue;
        }
        if p.contains(&focus) {
            continue;
        }
        let FView::Not(body) = fview(focus) else {
            unreachable!("eventualities are negated box chains");
        };
        let FView::Box(prog, chi) = fview(body) else {
            unreachable!("eventualities are negated box chains");
        };
        if syntax::in_atp_omega(prog) {
            // No rule rewrites a diamond whose outermost program is atomic
            // or the universal process: the branch is final.
            pairs.insert((t, focus));
            continue;
        }
        let mut p2 = p;
        p2.insert(focus);
        match pview(prog) {
            PView::Star(b) => {
                // ~[B*]chi: either chi fails now, or after one more B step.
                work.push(Triple {
                    p: p2.clone(),
                    t: t.clone(),
                    focus: not(chi),
                });
                work.push(Triple {
                    p: p2,
                    t,
                    focus: not(boxf(b, body)),
                });
            }
            PView::Seq(b1, b2) => {
                let inner = boxf(b2, chi);
                work.push(Triple {
                    p: p2,
                    t,
                    focus: not(boxf(b1, inner)),
                });
            }
            PView::Choice(b1, b2) => {
                work.push(Triple {
                    p: p2.clone(),
                    t: t.clone(),
                    focus: not(boxf(b1, chi)),
                });
                work.push(Triple {
                    p: p2,
                    t,
                    focus: not(boxf(b2, chi)),
                });
            }
            PView::Test(th) => {
                let mut t2 = t;
                t2.insert(th);
                work.push(Triple {
                    p: p2,
                    t: t2,
                    focus: not(chi),
                });
            }
            PView::Arrow(pre, post) => {
                // ~[(pre => post)]chi: either pre fails here and chi fails
                // somewhere reachable, or chi fails at a reachable state
                // satisfying post.
                let om = omega();
                let tnpre = test(not(pre));
                let b1 = not(boxf(tnpre, boxf(om, chi)));
                let tpost = test(post);
                let b2 = not(boxf(om, boxf(tpost, chi)));
                work.push(Triple {
                    p: p2.clone(),
                    t: t.clone(),
                    focus: b1,
                });
                work.push(Triple {
                    p: p2,
                    t,
                    focus: b2,
                });
            }
            PView::Atomic(_) => unreachable!("handled by the AtP-Omega case"),
        }
    }
    let mut out: Vec<FinalPair> = pairs.into_iter().collect();
    out.sort_by(|(t1, f1), (t2, f2)| {
        canon_cmp_f(*f1, *f2).then_with(|| {
            let v1: Vec<FId> = sorted_canon(t1);
            let v2: Vec<FId> = sorted_canon(t2);
            for (a, b) in v1.iter().zip(v2.iter()) {
                let c = canon_cmp_f(*a, *b);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            v1.len().cmp(&v2.len())
        })
    });
    out
}

fn sorted_canon(s: &BTreeSet<FId>) -> Vec<FId> {
    let mut v: Vec<FId> = s.iter().copied().collect();
    syntax::canon_sort(&mut v);
    v
}

static RED_MEMO: LazyLock<Mutex<HashMap<FId, Vec<BTreeSet<FId>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The reduction sets of an α/β formula, in the order the static rule tries
/// them; `None` when the formula is not α/β.
///
/// * non-eventuality α: the single set `{α1, α2}`;
/// * non-eventuality β: the two sets `{β1}`, `{β2}`;
/// * eventuality: one set `T ∪ {focus}` per finalized decomposition pair.
pub fn reduction_sets(f: FId) -> Option<Vec<BTreeSet<FId>>> {
    if let Some(v) = RED_MEMO.lock().unwrap_or_else(|e| e.into_inner()).get(&f) {
        return Some(v.clone());
    }
    let sets: Vec<BTreeSet<FId>> = if is_eventuality(f) {
        match classify(f) {
            Classification::NotAlphaBeta => return None,
            _ => {
                let mut out: Vec<BTreeSet<FId>> = Vec::new();
                for (t, focus) in finalized_decomposition(f) {
                    let mut set = t;
                    set.insert(focus);
                    if !out.contains(&set) {
                        out.push(set);
                    }
                }
                out
            }
        }
    } else {
        match classify(f) {
            Classification::NotAlphaBeta => return None,
            Classification::Alpha(a1, a2) => {
                let mut set = BTreeSet::from([a1]);
                if let Some(a2) = a2 {
                    set.insert(a2);
                }
                vec![set]
            }
            Classification::Beta(b1, b2) => {
                vec![BTreeSet::from([b1]), BTreeSet::from([b2])]
            }
        }
    };
    RED_MEMO
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(f, sets.clone());
    Some(sets)
}

/// Number of reduction sets (the branching degree of the static rule).
pub fn reduction_degree(f: FId) -> Option<usize> {
    reduction_sets(f).map(|v| v.len())
}

/// Virtual-reduction successor relation on diamonds.
///
/// For a non-eventuality diamond the successors follow the classification
/// table in the direction the diamond actually moves (α to `α1`; β to both
/// branches); for an eventuality they are the finalized decomposition foci.
pub fn vtrd(f: FId, g: FId) -> bool {
    vtrd_successors(f).contains(&g)
}

/// All virtual-reduction successors of a diamond, deduplicated, in canonical
/// order. Empty for formulas that are not α/β diamonds.
pub fn vtrd_successors(f: FId) -> Vec<FId> {
    if !matches!(fview(f), FView::Not(body) if matches!(fview(body), FView::Box(_, _))) {
        return Vec::new();
    }
    let mut out: Vec<FId> = if is_eventuality(f) {
        match classify(f) {
            Classification::NotAlphaBeta => Vec::new(),
            _ => finalized_decomposition(f)
                .into_iter()
                .map(|(_, focus)| focus)
                .collect(),
        }
    } else {
        match classify(f) {
            Classification::NotAlphaBeta => Vec::new(),
            Classification::Alpha(a1, _) => vec![a1],
            Classification::Beta(b1, b2) => vec![b1, b2],
        }
    };
    syntax::canon_sort(&mut out);
    out.dedup();
    out
}
