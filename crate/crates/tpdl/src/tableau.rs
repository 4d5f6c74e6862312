//! Tableau graph: labelled nodes, typed edges, and eventuality tracking.
//!
//! A node's label is a formula set together with a *reduction flag* for each
//! α/β eventuality it contains: eventualities record explicitly whether the
//! static rule has already expanded them, because their reduction sets can
//! regenerate the very formula being reduced and a subset check alone cannot
//! tell "not yet expanded" from "expanded and regenerated".
//!
//! Edges are forward (parent created the child), backward (the child already
//! existed with a final status), or cyclic (the child is a forward-ancestor
//! of the parent and is still being processed). Diamonds that demand a
//! successor state tag the edge they caused.
//!
//! Eventualities are tracked across nodes by the `⋈` relation: a pair
//! `(v, φ)` is linked to the pairs in `v`'s children that continue `φ`'s
//! unfolding. Fulfillment and dependency queries are breadth-first searches
//! over that relation.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::parser::print_f;
use crate::reduction::{reduction_sets, vtrd_successors};
use crate::syntax::{is_alpha_beta, is_eventuality, norm_top, red_set_in, FId, FormulaSet};

/// Final or provisional verdict of a node.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Status {
    Sat,
    Unsat,
    /// Satisfiable so far, pending the nodes recorded in `deps`.
    TempSat,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::TempSat => "tempsat",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Forward,
    Backward,
    Cyclic,
}

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A node label: the formula set and the reduction flags of its α/β
/// eventualities (`true` means the static rule has already expanded the
/// eventuality at this node or an ancestor it was inherited from).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Label {
    pub phi: FormulaSet,
    pub rd: BTreeMap<FId, bool>,
}

impl Label {
    /// Build a label with the given flags, completing the flag domain so it
    /// covers exactly the α/β eventualities of `phi` (missing entries start
    /// unexpanded, spurious entries are dropped).
    pub fn new(phi: FormulaSet, rd: BTreeMap<FId, bool>) -> Self {
        let mut label = Label { phi, rd };
        label.sync_rd_domain();
        label
    }

    /// Label with all eventualities unexpanded.
    pub fn fresh(phi: FormulaSet) -> Self {
        Self::new(phi, BTreeMap::new())
    }

    fn sync_rd_domain(&mut self) {
        let domain: FormulaSet = self
            .phi
            .iter()
            .copied()
            .filter(|&f| is_alpha_beta(f) && is_eventuality(f))
            .collect();
        self.rd.retain(|f, _| domain.contains(f));
        for &f in &domain {
            self.rd.entry(f).or_insert(false);
        }
    }

    /// Whether `f` (a member of `phi`) is still awaiting the static rule.
    ///
    /// Formulas the static rule never touches count as active; an α/β
    /// non-eventuality is active until one of its reduction sets is wholly
    /// present; an α/β eventuality is active until its flag is set.
    pub fn is_active(&self, f: FId) -> bool {
        if !is_alpha_beta(f) {
            return true;
        }
        if is_eventuality(f) {
            return !self.rd.get(&f).copied().unwrap_or(false);
        }
        let sets = reduction_sets(f).expect("alpha/beta formula has reduction sets");
        !sets.iter().any(|r| red_set_in(r, &self.phi))
    }

    pub fn is_reduced(&self, f: FId) -> bool {
        !self.is_active(f)
    }

    pub fn active_set(&self) -> FormulaSet {
        self.phi
            .iter()
            .copied()
            .filter(|&f| self.is_active(f))
            .collect()
    }

    pub fn reduced_set(&self) -> FormulaSet {
        self.phi
            .iter()
            .copied()
            .filter(|&f| self.is_reduced(f))
            .collect()
    }

    /// A label is partial while its active part still contains α/β work.
    pub fn is_partial(&self) -> bool {
        self.phi
            .iter()
            .any(|&f| is_alpha_beta(f) && self.is_active(f))
    }

    /// Flag consistency: an expanded eventuality must have a reduction set
    /// inside the label.
    #[cfg(debug_assertions)]
    pub fn check_flag_invariant(&self) {
        for (&f, &flag) in &self.rd {
            if flag {
                let sets = reduction_sets(f).expect("flag domain is alpha/beta");
                assert!(
                    sets.iter().any(|r| red_set_in(r, &self.phi)),
                    "eventuality {} flagged as expanded but no reduction set is present",
                    print_f(f)
                );
            }
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub kind: EdgeKind,
    /// The diamond or negated capability that demanded this edge, for edges
    /// created by the transitional rules.
    pub tag: Option<FId>,
    pub to: NodeId,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub label: Label,
    /// Cached active part of the label; refreshed after merges.
    pub active: FormulaSet,
    pub partial: bool,
    pub status: Option<Status>,
    /// Nodes this node's provisional status depends on.
    pub deps: Option<BTreeSet<NodeId>>,
    pub children: Vec<Edge>,
    pub parents: Vec<(EdgeKind, NodeId)>,
    /// The unique parent that created this node, if any.
    pub fparent: Option<NodeId>,
}

impl Node {
    pub fn new(label: Label) -> Self {
        let active = label.active_set();
        let partial = label.is_partial();
        Node {
            label,
            active,
            partial,
            status: None,
            deps: None,
            children: Vec::new(),
            parents: Vec::new(),
            fparent: None,
        }
    }

    /// Recompute the cached views after the label changed.
    pub fn refresh(&mut self) {
        self.label.sync_rd_domain();
        self.active = self.label.active_set();
        self.partial = self.label.is_partial();
    }
}

/// The tracking relation `⋈` and the node graph.
#[derive(Clone, Debug, Default)]
pub struct Tableau {
    pub nodes: Vec<Node>,
    pub root: Option<NodeId>,
    pub bowtie: BTreeMap<(NodeId, FId), BTreeSet<(NodeId, FId)>>,
}

impl Tableau {
    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.index()]
    }

    pub fn node_mut(&mut self, v: NodeId) -> &mut Node {
        &mut self.nodes[v.index()]
    }

    pub fn add_node(&mut self, label: Label) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::new(label));
        id
    }

    pub fn add_edge(&mut self, from: NodeId, kind: EdgeKind, tag: Option<FId>, to: NodeId) {
        self.node_mut(from).children.push(Edge { kind, tag, to });
        self.node_mut(to).parents.push((kind, from));
        if kind == EdgeKind::Forward {
            let prev = self.node_mut(to).fparent.replace(from);
            debug_assert!(prev.is_none(), "a node has at most one forward parent");
        }
    }

    pub fn add_bowtie(&mut self, from: (NodeId, FId), to: (NodeId, FId)) {
        self.bowtie.entry(from).or_default().insert(to);
    }

    /// Whether `anc` lies on the forward-parent chain of `v` (reflexively:
    /// `anc == v` counts).
    pub fn is_forward_ancestor(&self, anc: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(u) = cur {
            if u == anc {
                return true;
            }
            cur = self.node(u).fparent;
        }
        false
    }

    /// Child targets with duplicates collapsed, in first-edge order.
    pub fn distinct_child_targets(&self, v: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in &self.node(v).children {
            if seen.insert(e.to) {
                out.push(e.to);
            }
        }
        out
    }

    /// Whether the eventuality `phi` tracked from `v` reaches a pair whose
    /// formula is no longer an eventuality, travelling only through nodes
    /// that are `v` itself or already (provisionally) satisfiable.
    pub fn is_fulfilled(&self, v: NodeId, phi: FId) -> bool {
        let mut seen: BTreeSet<(NodeId, FId)> = BTreeSet::new();
        let mut queue: Vec<(NodeId, FId)> = vec![(v, phi)];
        while let Some((u, psi)) = queue.pop() {
            if !seen.insert((u, psi)) {
                continue;
            }
            if u != v
                && !matches!(
                    self.node(u).status,
                    Some(Status::Sat) | Some(Status::TempSat)
                )
            {
                continue;
            }
            if !is_eventuality(psi) {
                return true;
            }
            if let Some(succs) = self.bowtie.get(&(u, psi)) {
                queue.extend(succs.iter().copied());
            }
        }
        false
    }

    /// The nodes whose pending verdicts the eventuality `phi` tracked from
    /// `v` is waiting on: endpoints of `⋈`-paths that stop at an active
    /// eventuality in a node whose status is still undefined.
    pub fn dependent_nodes(&self, v: NodeId, phi: FId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        let mut seen: BTreeSet<(NodeId, FId)> = BTreeSet::new();
        let mut queue: Vec<(NodeId, FId)> = vec![(v, phi)];
        while let Some((u, psi)) = queue.pop() {
            if !seen.insert((u, psi)) {
                continue;
            }
            if !is_eventuality(psi) {
                continue;
            }
            match self.bowtie.get(&(u, psi)) {
                None => {
                    if self.node(u).status.is_none() && self.node(u).active.contains(&psi) {
                        out.insert(u);
                    }
                }
                Some(succs) if succs.is_empty() => {
                    if self.node(u).status.is_none() && self.node(u).active.contains(&psi) {
                        out.insert(u);
                    }
                }
                Some(succs) => {
                    if u == v || self.node(u).status == Some(Status::TempSat) {
                        queue.extend(succs.iter().copied());
                    }
                }
            }
        }
        out
    }

    /// Render the graph in DOT format: boxes are saturated nodes, ellipses
    /// partial ones; dashed edges are backward, dotted edges cyclic; fill
    /// colours follow the status.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from(
            "digraph tableau {\n  rankdir=TB;\n  node [fontname=\"monospace\", fontsize=10];\n",
        );
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if n.partial { "ellipse" } else { "box" };
            let color = match n.status {
                Some(Status::Sat) => "#c8e6c9",
                Some(Status::Unsat) => "#ffcdd2",
                Some(Status::TempSat) => "#ffe0b2",
                None => "#eeeeee",
            };
            let mut body = format!("v{i}");
            if let Some(st) = n.status {
                let _ = write!(body, " [{}]", st.as_str());
            }
            body.push_str("\\l");
            for &f in &n.label.phi {
                let printed = print_f(f).replace('\\', "\\\\").replace('"', "\\\"");
                body.push_str(&printed);
                body.push_str("\\l");
            }
            let _ = writeln!(
                s,
                "  v{i} [shape={shape}, style=filled, fillcolor=\"{color}\", label=\"{body}\"];"
            );
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for e in &n.children {
                let style = match e.kind {
                    EdgeKind::Forward => "solid",
                    EdgeKind::Backward => "dashed",
                    EdgeKind::Cyclic => "dotted",
                };
                let label = match e.tag {
                    Some(f) => print_f(f).replace('\\', "\\\\").replace('"', "\\\""),
                    None => String::new(),
                };
                let _ = writeln!(
                    s,
                    "  v{i} -> v{} [style={style}, label=\"{label}\"];",
                    e.to.index()
                );
            }
        }
        s.push_str("}\n");
        s
    }

    /// Structured dump of the graph (formulas rendered in concrete syntax).
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                serde_json::json!({
                    "id": i,
                    "partial": n.partial,
                    "status": n.status.map(Status::as_str),
                    "formulas": n.label.phi.iter().map(|&f| print_f(f)).collect::<Vec<_>>(),
                    "expanded": n.label.rd.iter()
                        .filter(|(_, &b)| b)
                        .map(|(&f, _)| print_f(f))
                        .collect::<Vec<_>>(),
                    "deps": n.deps.as_ref().map(|d| d.iter().map(|x| x.index()).collect::<Vec<_>>()),
                    "children": n.children.iter().map(|e| serde_json::json!({
                        "to": e.to.index(),
                        "kind": match e.kind {
                            EdgeKind::Forward => "forward",
                            EdgeKind::Backward => "backward",
                            EdgeKind::Cyclic => "cyclic",
                        },
                        "tag": e.tag.map(print_f),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let tracking: Vec<serde_json::Value> = self
            .bowtie
            .iter()
            .map(|(&(v, f), succs)| {
                serde_json::json!({
                    "from": {"node": v.index(), "formula": print_f(f)},
                    "to": succs.iter().map(|&(u, g)| serde_json::json!({
                        "node": u.index(), "formula": print_f(g),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "root": self.root.map(NodeId::index),
            "nodes": nodes,
            "tracking": tracking,
        })
    }
}

/// Successors of `f` under the label-restricted virtual reduction: the
/// virtual-reduction successors that appear in a reduction set wholly
/// contained in `set`.
pub fn dsucc_in(f: FId, set: &FormulaSet) -> Vec<FId> {
    let succs = vtrd_successors(f);
    if succs.is_empty() {
        return succs;
    }
    let Some(sets) = reduction_sets(f) else {
        return Vec::new();
    };
    succs
        .into_iter()
        .filter(|g| sets.iter().any(|r| r.contains(g) && red_set_in(r, set)))
        .collect()
}

/// The formulas of `label` where the unfolding of the eventuality `start`
/// currently stands: expanded eventualities are traversed through their
/// label-restricted successors; the search stops at active eventualities and
/// at non-eventualities.
pub fn reach(start: FId, label: &Label) -> FormulaSet {
    let mut out = FormulaSet::new();
    let mut seen = FormulaSet::new();
    let mut queue = vec![start];
    while let Some(f) = queue.pop() {
        if !seen.insert(f) {
            continue;
        }
        if !label.phi.contains(&norm_top(f)) {
            continue;
        }
        if is_eventuality(f) && is_alpha_beta(f) && label.is_reduced(f) {
            queue.extend(dsucc_in(f, &label.phi));
        } else {
            out.insert(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{aprog, atom, boxf, choice, not, star};

    fn looping_eventuality_fixture() -> (FId, FId, FId, FId) {
        // ~[(a+b)*]p and its stepped forms
        let p = atom("p");
        let a = aprog("a");
        let b = aprog("b");
        let c = star(choice(a, b));
        let f = not(boxf(c, p));
        let fa = not(boxf(a, boxf(c, p)));
        let fb = not(boxf(b, boxf(c, p)));
        (f, fa, fb, not(p))
    }

    #[test]
    fn reduced_alpha_leaves_only_its_components_active() {
        // {[a+b]p, [a]p, [b]p}: the choice box is reduced (its single
        // reduction set is present), the component boxes stay active.
        let p = atom("p");
        let a = aprog("a");
        let b = aprog("b");
        let f = boxf(choice(a, b), p);
        let phi = FormulaSet::from([f, boxf(a, p), boxf(b, p)]);
        let label = Label::fresh(phi);
        assert_eq!(
            label.active_set(),
            FormulaSet::from([boxf(a, p), boxf(b, p)])
        );
        assert_eq!(label.reduced_set(), FormulaSet::from([f]));
        // nothing alpha/beta is active, so the label is saturated
        assert!(!label.is_partial());
    }

    #[test]
    fn unreduced_alpha_makes_the_label_partial() {
        let p = atom("p");
        let f = boxf(choice(aprog("a"), aprog("b")), p);
        let label = Label::fresh(FormulaSet::from([f]));
        assert!(label.is_active(f));
        assert!(label.is_partial());
    }

    #[test]
    fn eventuality_activity_follows_the_flag() {
        let (f, fa, _, _) = looping_eventuality_fixture();
        // flag unset: active even though a reduction set is present
        let phi = FormulaSet::from([f, fa]);
        let label = Label::new(phi.clone(), BTreeMap::from([(f, false)]));
        assert!(label.is_active(f));
        assert!(label.is_partial());
        // flag set: reduced
        let label = Label::new(phi, BTreeMap::from([(f, true)]));
        assert!(label.is_reduced(f));
        // the stepped diamond has an atomic head, so the static rule leaves
        // it alone and the label is saturated
        assert!(!label.is_partial());
        #[cfg(debug_assertions)]
        label.check_flag_invariant();
    }

    #[test]
    fn rd_domain_tracks_the_formula_set() {
        let (f, fa, _, _) = looping_eventuality_fixture();
        let label = Label::new(
            FormulaSet::from([f, fa]),
            BTreeMap::from([(fa, true), (atom("zz"), true)]),
        );
        // fa is an eventuality but not alpha/beta (atomic head): not in the
        // domain; zz is not in phi at all; f joins with the default flag.
        assert_eq!(label.rd, BTreeMap::from([(f, false)]));
    }

    #[test]
    fn reach_walks_expanded_eventualities_to_their_frontier() {
        let (f, fa, _fb, np) = looping_eventuality_fixture();
        // the label chose the a-step reduction set
        let label = Label::new(FormulaSet::from([f, fa]), BTreeMap::from([(f, true)]));
        assert_eq!(reach(f, &label), FormulaSet::from([fa]));
        // an unexpanded eventuality is its own frontier
        let label = Label::new(FormulaSet::from([f, fa]), BTreeMap::from([(f, false)]));
        assert_eq!(reach(f, &label), FormulaSet::from([f]));
        // with the immediate set chosen, the frontier is the non-eventuality
        let label = Label::new(FormulaSet::from([f, np]), BTreeMap::from([(f, true)]));
        assert_eq!(reach(f, &label), FormulaSet::from([np]));
        // formulas outside the label have empty frontiers
        let label = Label::fresh(FormulaSet::from([np]));
        assert_eq!(reach(f, &label), FormulaSet::new());
    }

    #[test]
    fn dsucc_is_cut_by_set_membership() {
        let (f, fa, fb, np) = looping_eventuality_fixture();
        let all = FormulaSet::from([f, fa, fb, np]);
        assert_eq!(dsucc_in(f, &all), vec![np, fa, fb]);
        let only_a = FormulaSet::from([f, fa]);
        assert_eq!(dsucc_in(f, &only_a), vec![fa]);
        assert!(dsucc_in(np, &all).is_empty());
    }

    #[test]
    fn fulfillment_traverses_only_settled_nodes() {
        let (f, fa, _, np) = looping_eventuality_fixture();
        let mut tab = Tableau::default();
        let v0 = tab.add_node(Label::fresh(FormulaSet::from([f])));
        let v1 = tab.add_node(Label::fresh(FormulaSet::from([fa])));
        let v2 = tab.add_node(Label::fresh(FormulaSet::from([np])));
        tab.add_edge(v0, EdgeKind::Forward, None, v1);
        tab.add_edge(v1, EdgeKind::Forward, Some(fa), v2);
        tab.add_bowtie((v0, f), (v1, fa));
        tab.add_bowtie((v1, fa), (v2, np));
        // v1/v2 unsettled: the chain may not be traversed
        assert!(!tab.is_fulfilled(v0, f));
        tab.node_mut(v1).status = Some(Status::TempSat);
        assert!(!tab.is_fulfilled(v0, f));
        tab.node_mut(v2).status = Some(Status::Sat);
        assert!(tab.is_fulfilled(v0, f));
        // an unsat node on the path blocks fulfillment
        tab.node_mut(v2).status = Some(Status::Unsat);
        assert!(!tab.is_fulfilled(v0, f));
    }

    #[test]
    fn dependencies_are_undefined_endpoints_with_active_eventualities() {
        let (f, fa, _, _) = looping_eventuality_fixture();
        let mut tab = Tableau::default();
        let v0 = tab.add_node(Label::fresh(FormulaSet::from([f])));
        let v1 = tab.add_node(Label::fresh(FormulaSet::from([fa])));
        // v1 has no status yet, fa is active there, and (v1, fa) has no
        // outgoing tracking edges: v1 is what (v0, f) waits on.
        tab.add_bowtie((v0, f), (v1, fa));
        assert_eq!(tab.dependent_nodes(v0, f), BTreeSet::from([v1]));
        assert!(!tab.is_fulfilled(v0, f));
        // once v1 is settled it is no longer a dependency
        tab.node_mut(v1).status = Some(Status::Sat);
        assert_eq!(tab.dependent_nodes(v0, f), BTreeSet::new());
    }

    #[test]
    fn forward_ancestry_is_reflexive_and_follows_creation_edges() {
        let p = atom("p");
        let mut tab = Tableau::default();
        let v0 = tab.add_node(Label::fresh(FormulaSet::from([p])));
        let v1 = tab.add_node(Label::fresh(FormulaSet::from([not(p)])));
        let v2 = tab.add_node(Label::fresh(FormulaSet::from([p, not(p)])));
        tab.add_edge(v0, EdgeKind::Forward, None, v1);
        tab.add_edge(v1, EdgeKind::Forward, None, v2);
        assert!(tab.is_forward_ancestor(v0, v2));
        assert!(tab.is_forward_ancestor(v2, v2));
        assert!(!tab.is_forward_ancestor(v2, v0));
        // backward edges do not create ancestry
        tab.add_edge(v2, EdgeKind::Backward, None, v0);
        assert!(!tab.is_forward_ancestor(v2, v0));
    }

    #[test]
    fn exports_mention_every_node() {
        let p = atom("p");
        let mut tab = Tableau::default();
        let v0 = tab.add_node(Label::fresh(FormulaSet::from([p])));
        let v1 = tab.add_node(Label::fresh(FormulaSet::from([not(p)])));
        tab.add_edge(v0, EdgeKind::Forward, None, v1);
        tab.add_edge(v1, EdgeKind::Cyclic, None, v0);
        tab.root = Some(v0);
        tab.node_mut(v0).status = Some(Status::Sat);
        let dot = tab.to_dot();
        assert!(dot.contains("v0"));
        assert!(dot.contains("v1"));
        assert!(dot.contains("dotted"));
        let json = tab.to_json();
        assert_eq!(json["nodes"].as_array().unwrap().len(), 2);
        assert_eq!(json["root"], 0);
    }
}
