//! Independent verification of satisfiable verdicts.
//!
//! From a finished satisfiable tableau this module extracts a Hintikka
//! structure (a model graph): its states are the saturated nodes of the fat
//! path — the subgraph keeping every satisfiable branch — and a transition
//! `s ~A~> s'` exists when a diamond-tagged edge leaves `s` and runs through
//! partial nodes to the saturated node `s'`. Pairs of states connected by
//! more than one process symbol are split apart by introducing shadow states
//! (same label, same outgoing transitions) so that each ordered pair is
//! connected by at most one symbol.
//!
//! The structure is then checked against the model-graph conditions, turned
//! into an explicit model (atomic relations are the transitions; the
//! universal relation is the reflexive-transitive closure of everything;
//! precondition-effect relations and capability sets are derived), and every
//! requested formula is evaluated in that model by a direct semantic model
//! checker. A satisfiable verdict is only as good as this pipeline: it must
//! confirm the root formulas at the start state.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde_json::json;
use thiserror::Error;

use crate::engine::atp_diamond_parts;
use crate::parser::{print_f, print_p};
use crate::reduction::reduction_sets;
use crate::syntax::{
    boxf, canon_cmp_p, cap, cap_demand_set, conj, ev_target, fview, in_atp_omega, in_sigma_tilde,
    is_alpha_beta, is_eventuality, norm_top, not, pview, red_set_in, FId, FView, FormulaSet, PId,
    PView,
};
use crate::tableau::{NodeId, Status, Tableau};

#[derive(Error, Debug)]
pub enum WitnessError {
    #[error("the tableau root is not satisfiable; nothing to extract")]
    RootNotSat,
    #[error("no saturated node is reachable from the root")]
    NoStartState,
    #[error("model-graph condition violated: {0}")]
    Hintikka(String),
    #[error("capability interpretation is circular: evaluating {0} requires itself")]
    Circular(String),
    #[error("model check refuted {formula} at state {state}")]
    Refuted { formula: String, state: usize },
}

/// One state of the extracted structure.
#[derive(Clone, Debug)]
pub struct HState {
    pub label: FormulaSet,
    /// The tableau node this state came from, if any.
    pub origin: Option<NodeId>,
    /// Set when this state is a shadow copy introduced to keep transition
    /// symbols unique per ordered pair.
    pub shadow_of: Option<usize>,
}

/// A labelled transition structure over atomic process symbols and Ω.
#[derive(Clone, Debug, Default)]
pub struct Hintikka {
    pub states: Vec<HState>,
    /// Transition rows, keyed by the process (atomic or Ω).
    pub trans: BTreeMap<PId, BTreeSet<(usize, usize)>>,
    /// The state carrying the root formulas.
    pub start: usize,
}

impl Hintikka {
    pub fn shadow_count(&self) -> usize {
        self.states.iter().filter(|s| s.shadow_of.is_some()).count()
    }

    pub fn transition_count(&self) -> usize {
        self.trans.values().map(|r| r.len()).sum()
    }

    /// Symbols connecting the ordered pair `(s1, s2)`.
    fn symbols_between(&self, s1: usize, s2: usize) -> Vec<PId> {
        self.trans
            .iter()
            .filter(|(_, row)| row.contains(&(s1, s2)))
            .map(|(&p, _)| p)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                json!({
                    "id": i,
                    "formulas": s.label.iter().map(|&f| print_f(f)).collect::<Vec<_>>(),
                    "shadow_of": s.shadow_of,
                })
            })
            .collect();
        let transitions: Vec<serde_json::Value> = self
            .trans
            .iter()
            .flat_map(|(&p, row)| {
                row.iter()
                    .map(move |&(s1, s2)| json!({"from": s1, "program": print_p(p), "to": s2}))
            })
            .collect();
        json!({
            "start": self.start,
            "states": states,
            "transitions": transitions,
        })
    }
}

/// Nodes kept by the fat path: the root, every satisfiable child of a kept
/// partial node, and every child of a kept saturated node.
fn fat_path(tab: &Tableau) -> BTreeSet<NodeId> {
    let root = tab.root.expect("extraction needs a rooted tableau");
    let mut keep = BTreeSet::from([root]);
    let mut work = vec![root];
    while let Some(v) = work.pop() {
        let node = tab.node(v);
        for e in &node.children {
            let include = if node.partial {
                tab.node(e.to).status == Some(Status::Sat)
            } else {
                true
            };
            if include && keep.insert(e.to) {
                work.push(e.to);
            }
        }
    }
    keep
}

/// The saturated nodes a node runs into along fat-path edges through partial
/// nodes (the node itself when it is already saturated).
fn end_states(tab: &Tableau, from: NodeId) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::from([from]);
    let mut work = vec![from];
    while let Some(v) = work.pop() {
        if !tab.node(v).partial {
            out.insert(v);
            continue;
        }
        for e in &tab.node(v).children {
            if tab.node(e.to).status == Some(Status::Sat) && seen.insert(e.to) {
                work.push(e.to);
            }
        }
    }
    out
}

/// Extract the labelled structure from a satisfiable tableau and make its
/// transition symbols unique per ordered state pair.
pub fn extract_hintikka(tab: &Tableau) -> Result<Hintikka, WitnessError> {
    let root = tab.root.ok_or(WitnessError::RootNotSat)?;
    if tab.node(root).status != Some(Status::Sat) {
        return Err(WitnessError::RootNotSat);
    }
    let fp = fat_path(tab);
    debug_assert!(
        fp.iter().all(|&v| tab.node(v).status == Some(Status::Sat)),
        "every fat-path node is satisfiable"
    );

    let state_nodes: Vec<NodeId> = fp
        .iter()
        .copied()
        .filter(|&v| !tab.node(v).partial)
        .collect();
    let index: BTreeMap<NodeId, usize> = state_nodes
        .iter()
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let mut states: Vec<HState> = state_nodes
        .iter()
        .map(|&v| HState {
            label: tab.node(v).label.phi.clone(),
            origin: Some(v),
            shadow_of: None,
        })
        .collect();

    let mut trans: BTreeMap<PId, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for &v in &state_nodes {
        for e in &tab.node(v).children {
            let Some(tag) = e.tag else { continue };
            // capability-tagged edges witness a refutation; they are not
            // transitions of the structure
            let Some((prog, _)) = atp_diamond_parts(tag) else {
                continue;
            };
            for s in end_states(tab, e.to) {
                trans
                    .entry(prog)
                    .or_default()
                    .insert((index[&v], index[&s]));
            }
        }
    }

    let start_node = end_states(tab, root)
        .into_iter()
        .min()
        .ok_or(WitnessError::NoStartState)?;
    let start = index[&start_node];

    // shadow repair: where one ordered pair carries several symbols, keep the
    // canonically smallest and redirect each other symbol to a fresh copy of
    // the target
    let mut by_pair: BTreeMap<(usize, usize), Vec<PId>> = BTreeMap::new();
    for (&p, row) in &trans {
        for &pair in row {
            by_pair.entry(pair).or_default().push(p);
        }
    }
    let mut redirects: Vec<(usize, usize, PId)> = Vec::new();
    for ((s1, s2), mut progs) in by_pair {
        if progs.len() > 1 {
            progs.sort_by(|&a, &b| canon_cmp_p(a, b));
            for &extra in &progs[1..] {
                redirects.push((s1, s2, extra));
            }
        }
    }
    for (s1, s2, prog) in redirects {
        let row = trans.get_mut(&prog).expect("symbol has a row");
        row.remove(&(s1, s2));
        let sid = states.len();
        states.push(HState {
            label: states[s2].label.clone(),
            origin: states[s2].origin,
            shadow_of: Some(s2),
        });
        row.insert((s1, sid));
    }
    // shadows take over the (repaired) outgoing transitions of their original
    let shadows: Vec<(usize, usize)> = states
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.shadow_of.map(|o| (i, o)))
        .collect();
    for row in trans.values_mut() {
        let mut additions: Vec<(usize, usize)> = Vec::new();
        for &(sid, orig) in &shadows {
            for &(s1, s2) in row.iter() {
                if s1 == orig {
                    additions.push((sid, s2));
                }
            }
        }
        row.extend(additions);
    }

    Ok(Hintikka {
        states,
        trans,
        start,
    })
}

/// Check every model-graph condition, reporting the first violation.
pub fn check_hintikka(h: &Hintikka) -> Result<(), WitnessError> {
    let fail = |msg: String| Err(WitnessError::Hintikka(msg));
    for (i, st) in h.states.iter().enumerate() {
        let label = &st.label;
        for &f in label.iter() {
            match fview(f) {
                // no contradictory literal or primitive capability pairs
                FView::Atom(_) => {
                    if label.contains(&not(f)) {
                        return fail(format!(
                            "state {i} holds both {} and its negation",
                            print_f(f)
                        ));
                    }
                }
                FView::Cap(_, p) if in_sigma_tilde(p) && label.contains(&not(f)) => {
                    return fail(format!(
                        "state {i} both grants and denies the capability {}",
                        print_f(f)
                    ));
                }
                _ => {}
            }
            // test capabilities can never be denied
            if let FView::Not(g) = fview(f) {
                if let FView::Cap(_, p) = fview(g) {
                    if matches!(pview(p), PView::Test(_)) {
                        return fail(format!(
                            "state {i} denies the test capability {}",
                            print_f(g)
                        ));
                    }
                }
            }
            // every alpha/beta formula is reduced within the label
            if is_alpha_beta(f) {
                let sets = reduction_sets(f).expect("alpha/beta formula");
                if !sets.iter().any(|r| red_set_in(r, label)) {
                    return fail(format!(
                        "state {i} holds the unreduced formula {}",
                        print_f(f)
                    ));
                }
            }
            // denied capabilities have a global refutation witness
            if let Some((agent, _)) = crate::engine::neg_cap_parts(f) {
                let mut gamma: Vec<FId> = label
                    .iter()
                    .copied()
                    .filter(|&g| match fview(g) {
                        FView::Cap(ag, p) => ag == agent && matches!(pview(p), PView::Arrow(_, _)),
                        _ => false,
                    })
                    .collect();
                crate::syntax::canon_sort(&mut gamma);
                let demand = cap_demand_set(f, &gamma)
                    .map_err(|e| WitnessError::Hintikka(format!("state {i}: {e}")))?;
                let witnessed = h
                    .states
                    .iter()
                    .any(|s| demand.iter().all(|m| s.label.contains(m)));
                if !witnessed {
                    return fail(format!(
                        "no state witnesses the denial {} made at state {i}",
                        print_f(f)
                    ));
                }
            }
            // diamonds have a matching successor
            if let Some((prog, chi)) = atp_diamond_parts(f) {
                let target = norm_top(not(chi));
                let row = h.trans.get(&prog);
                let witnessed = row.is_some_and(|r| {
                    r.iter()
                        .any(|&(s1, s2)| s1 == i && h.states[s2].label.contains(&target))
                });
                if !witnessed {
                    return fail(format!(
                        "state {i} holds {} but no successor carries {}",
                        print_f(f),
                        print_f(target)
                    ));
                }
            }
            // boxes propagate along their transitions
            if let FView::Box(p, body) = fview(f) {
                if in_atp_omega(p) {
                    let nb = norm_top(body);
                    if crate::syntax::is_omega(p) {
                        // a one-step universal box reproduces an iterated one...
                        let shape_ok = matches!(
                            fview(body),
                            FView::Box(q, _) if matches!(pview(q), PView::Star(q2) if crate::syntax::is_omega(q2))
                        );
                        if !shape_ok || !label.contains(&nb) {
                            return fail(format!(
                                "state {i} holds {} whose body is not a locally-held iterated universal box",
                                print_f(f)
                            ));
                        }
                        // ...and its body crosses every transition
                        for row in h.trans.values() {
                            for &(s1, s2) in row.iter() {
                                if s1 == i && !h.states[s2].label.contains(&nb) {
                                    return fail(format!(
                                        "{} at state {i} does not reach state {s2}",
                                        print_f(f)
                                    ));
                                }
                            }
                        }
                    } else if let Some(row) = h.trans.get(&p) {
                        for &(s1, s2) in row.iter() {
                            if s1 == i && !h.states[s2].label.contains(&nb) {
                                return fail(format!(
                                    "{} at state {i} does not reach state {s2}",
                                    print_f(f)
                                ));
                            }
                        }
                    }
                }
            }
            // alpha/beta eventualities are fulfilled along a structure path
            if is_alpha_beta(f) && is_eventuality(f) && !eventuality_fulfilled(h, i, f) {
                return fail(format!(
                    "the eventuality {} at state {i} is never fulfilled",
                    print_f(f)
                ));
            }
        }
    }
    // at most one symbol between any ordered pair of states
    for s1 in 0..h.states.len() {
        for s2 in 0..h.states.len() {
            let syms = h.symbols_between(s1, s2);
            if syms.len() > 1 {
                return fail(format!(
                    "states {s1} -> {s2} are connected by several symbols: {}",
                    syms.iter()
                        .map(|&p| print_p(p))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
        }
    }
    Ok(())
}

/// Search for a structure path from `(state, phi)` to the non-iterated core
/// of the eventuality: local steps follow reduction sets present in the
/// label, diamond steps cross transitions.
fn eventuality_fulfilled(h: &Hintikka, state: usize, phi: FId) -> bool {
    let target = ev_target(phi).expect("eventuality");
    let mut seen: BTreeSet<(usize, FId)> = BTreeSet::new();
    let mut work: Vec<(usize, FId)> = vec![(state, phi)];
    seen.insert((state, phi));
    while let Some((u, psi)) = work.pop() {
        if psi == target {
            return true;
        }
        if let Some((prog, chi)) = atp_diamond_parts(psi) {
            let next = norm_top(not(chi));
            if let Some(row) = h.trans.get(&prog) {
                for &(s1, s2) in row.iter() {
                    if s1 == u && h.states[s2].label.contains(&next) && seen.insert((s2, next)) {
                        work.push((s2, next));
                    }
                }
            }
        } else if is_alpha_beta(psi) {
            for g in crate::tableau::dsucc_in(psi, &h.states[u].label) {
                if seen.insert((u, g)) {
                    work.push((u, g));
                }
            }
        }
    }
    false
}

type Mat = Vec<Vec<bool>>;

fn empty_mat(n: usize) -> Mat {
    vec![vec![false; n]; n]
}

fn union_mat(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = empty_mat(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[i][j] || b[i][j];
        }
    }
    out
}

fn compose_mat(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = empty_mat(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    if b[k][j] {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

fn refl_trans_closure(a: &Mat) -> Mat {
    let n = a.len();
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        // snapshot of row k; it cannot grow during its own pass
        let via_k = out[k].clone();
        for row in out.iter_mut() {
            if row[k] {
                for (j, &step) in via_k.iter().enumerate() {
                    if step {
                        row[j] = true;
                    }
                }
            }
        }
    }
    out
}

/// The explicit model corresponding to an extracted structure: atomic
/// relations are the structure's transitions and the universal relation is
/// the reflexive-transitive closure of all of them.
#[derive(Clone, Debug)]
pub struct Model {
    pub labels: Vec<FormulaSet>,
    pub atomic_rows: BTreeMap<PId, Mat>,
    pub omega: Mat,
    pub start: usize,
}

pub fn build_model(h: &Hintikka) -> Model {
    let n = h.states.len();
    let mut atomic_rows: BTreeMap<PId, Mat> = BTreeMap::new();
    let mut all = empty_mat(n);
    for (&p, row) in &h.trans {
        let mut m = empty_mat(n);
        for &(s1, s2) in row {
            m[s1][s2] = true;
            all[s1][s2] = true;
        }
        if !crate::syntax::is_omega(p) {
            atomic_rows.insert(p, m);
        }
    }
    Model {
        labels: h.states.iter().map(|s| s.label.clone()).collect(),
        atomic_rows,
        omega: refl_trans_closure(&all),
        start: h.start,
    }
}

/// A memoising semantic evaluator over an explicit model. Capability
/// interpretations are unions of the relations granted by the labels, which
/// can in principle refer back to the formula being evaluated; such cycles
/// are detected and reported rather than resolved.
pub struct Checker<'m> {
    model: &'m Model,
    fmemo: HashMap<FId, Vec<bool>>,
    pmemo: HashMap<PId, Mat>,
    fstack: HashSet<FId>,
    pstack: HashSet<PId>,
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m Model) -> Self {
        Checker {
            model,
            fmemo: HashMap::new(),
            pmemo: HashMap::new(),
            fstack: HashSet::new(),
            pstack: HashSet::new(),
        }
    }

    pub fn holds(&mut self, f: FId, w: usize) -> Result<bool, WitnessError> {
        Ok(self.eval_f(f)?[w])
    }

    fn eval_f(&mut self, f: FId) -> Result<Vec<bool>, WitnessError> {
        if let Some(v) = self.fmemo.get(&f) {
            return Ok(v.clone());
        }
        if !self.fstack.insert(f) {
            return Err(WitnessError::Circular(print_f(f)));
        }
        let n = self.model.labels.len();
        let out: Vec<bool> = match fview(f) {
            FView::True => vec![true; n],
            FView::False => vec![false; n],
            FView::Atom(_) => (0..n).map(|w| self.model.labels[w].contains(&f)).collect(),
            FView::Not(g) => {
                let inner = self.eval_f(g)?;
                inner.into_iter().map(|b| !b).collect()
            }
            FView::Box(p, body) => {
                let rel = self.eval_p(p)?;
                let tv = self.eval_f(body)?;
                (0..n)
                    .map(|w| (0..n).all(|w2| !rel[w][w2] || tv[w2]))
                    .collect()
            }
            FView::Cap(agent, prog) => match pview(prog) {
                // every agent can perform every test
                PView::Test(_) => vec![true; n],
                PView::Atomic(_) | PView::Arrow(_, _) => {
                    let rel = self.eval_p(prog)?;
                    let mut out = vec![false; n];
                    for (w, slot) in out.iter_mut().enumerate() {
                        let granted: Vec<PId> = self.model.labels[w]
                            .iter()
                            .filter_map(|&g| match fview(g) {
                                FView::Cap(ag, b) if ag == agent && in_sigma_tilde(b) => Some(b),
                                _ => None,
                            })
                            .collect();
                        let mut rels: Vec<Mat> = Vec::with_capacity(granted.len());
                        for b in granted {
                            rels.push(self.eval_p(b)?);
                        }
                        *slot = (0..n)
                            .all(|x| (0..n).all(|y| !rel[x][y] || rels.iter().any(|r| r[x][y])));
                    }
                    out
                }
                // composite capabilities reduce to capabilities over parts
                PView::Seq(a1, a2) => {
                    let g = conj(cap(agent, a1), boxf(a1, cap(agent, a2)));
                    self.eval_f(g)?
                }
                PView::Choice(a1, a2) => {
                    let g = conj(cap(agent, a1), cap(agent, a2));
                    self.eval_f(g)?
                }
                PView::Star(b) => {
                    let g = boxf(prog, cap(agent, b));
                    self.eval_f(g)?
                }
            },
        };
        self.fstack.remove(&f);
        self.fmemo.insert(f, out.clone());
        Ok(out)
    }

    fn eval_p(&mut self, p: PId) -> Result<Mat, WitnessError> {
        if let Some(m) = self.pmemo.get(&p) {
            return Ok(m.clone());
        }
        if !self.pstack.insert(p) {
            return Err(WitnessError::Circular(print_p(p)));
        }
        let n = self.model.labels.len();
        let out: Mat = match pview(p) {
            PView::Atomic(_) => self
                .model
                .atomic_rows
                .get(&p)
                .cloned()
                .unwrap_or_else(|| empty_mat(n)),
            PView::Test(f) => {
                let tv = self.eval_f(f)?;
                let mut m = empty_mat(n);
                for (w, row) in m.iter_mut().enumerate() {
                    row[w] = tv[w];
                }
                m
            }
            PView::Arrow(pre, post) => {
                let pv = self.eval_f(pre)?;
                let qv = self.eval_f(post)?;
                let mut m = empty_mat(n);
                for w in 0..n {
                    for w2 in 0..n {
                        m[w][w2] = self.model.omega[w][w2] && (!pv[w] || qv[w2]);
                    }
                }
                m
            }
            PView::Seq(a, b) => {
                let ma = self.eval_p(a)?;
                let mb = self.eval_p(b)?;
                compose_mat(&ma, &mb)
            }
            PView::Choice(a, b) => {
                let ma = self.eval_p(a)?;
                let mb = self.eval_p(b)?;
                union_mat(&ma, &mb)
            }
            PView::Star(a) => {
                let ma = self.eval_p(a)?;
                refl_trans_closure(&ma)
            }
        };
        self.pstack.remove(&p);
        self.pmemo.insert(p, out.clone());
        Ok(out)
    }
}

/// Summary of a successful verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub states: usize,
    pub shadows: usize,
    pub transitions: usize,
    pub checked_formulas: usize,
}

/// Full verification pipeline for a satisfiable tableau: extract, check the
/// structural conditions, build the model, and confirm the root formulas at
/// the start state (and optionally every label formula at its own state).
pub fn verify_sat(
    tab: &Tableau,
    roots: &[FId],
    check_all_labels: bool,
) -> Result<(Hintikka, WitnessReport), WitnessError> {
    let h = extract_hintikka(tab)?;
    check_hintikka(&h)?;
    let model = build_model(&h);
    let mut checker = Checker::new(&model);
    let mut checked = 0usize;
    for &r in roots {
        let nr = norm_top(r);
        if !checker.holds(nr, model.start)? {
            return Err(WitnessError::Refuted {
                formula: print_f(nr),
                state: model.start,
            });
        }
        checked += 1;
    }
    if check_all_labels {
        for (i, st) in h.states.iter().enumerate() {
            for &f in &st.label {
                if !checker.holds(f, i)? {
                    return Err(WitnessError::Refuted {
                        formula: print_f(f),
                        state: i,
                    });
                }
                checked += 1;
            }
        }
    }
    let report = WitnessReport {
        states: h.states.len(),
        shadows: h.shadow_count(),
        transitions: h.transition_count(),
        checked_formulas: checked,
    };
    Ok((h, report))
}
