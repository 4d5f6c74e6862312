//! Helpers shared by the integration suites: traced solving, the structural
//! invariants of a finished proof graph, and corpus collection.

// each suite uses the subset it needs
#![allow(dead_code)]

use tpdl::engine::{solve, Config, TraceEvent, Verdict};
use tpdl::parser::parse_lines;
use tpdl::reduction::{reduction_degree, reduction_sets, vtrd_successors};
use tpdl::syntax::{
    ev_target, fview, in_atp_omega, is_alpha_beta, is_eventuality, pview, FId, FView, PId, PView,
};
use tpdl::tableau::{EdgeKind, NodeId, Status, Tableau};

pub fn solve_traced(input: &str) -> (Vec<FId>, Verdict) {
    let roots = parse_lines(input).expect("input parses");
    let verdict = solve(
        &roots,
        Config {
            trace: true,
            ..Config::default()
        },
    )
    .expect("solver finishes");
    (roots, verdict)
}

/// Every node of a finished run carries a settled verdict.
pub fn check_statuses_final(tab: &Tableau) -> Result<(), String> {
    for (i, node) in tab.nodes.iter().enumerate() {
        match node.status {
            Some(Status::Sat) | Some(Status::Unsat) => {}
            other => return Err(format!("node {i} finished with status {other:?}")),
        }
    }
    Ok(())
}

/// A satisfiable partial node has at least one satisfiable child; a
/// satisfiable saturated node has only satisfiable children.
pub fn check_sat_children(tab: &Tableau) -> Result<(), String> {
    for (i, node) in tab.nodes.iter().enumerate() {
        if node.status != Some(Status::Sat) {
            continue;
        }
        let child_statuses: Vec<Option<Status>> = node
            .children
            .iter()
            .map(|e| tab.node(e.to).status)
            .collect();
        if node.partial {
            if !child_statuses.contains(&Some(Status::Sat)) {
                return Err(format!(
                    "satisfiable partial node {i} has no satisfiable child"
                ));
            }
        } else if !child_statuses.iter().all(|&s| s == Some(Status::Sat)) {
            return Err(format!(
                "satisfiable saturated node {i} has an unsatisfiable child"
            ));
        }
    }
    Ok(())
}

/// Every cycle closed by a cyclic edge passes through a saturated node: the
/// forward chain from the edge's source up to its target never consists of
/// partial nodes alone.
pub fn check_cycles_hit_states(tab: &Tableau) -> Result<(), String> {
    for (i, node) in tab.nodes.iter().enumerate() {
        for e in &node.children {
            if e.kind != EdgeKind::Cyclic {
                continue;
            }
            let mut cur = Some(NodeId(i as u32));
            let mut saw_state = false;
            let mut reached_target = false;
            while let Some(u) = cur {
                saw_state |= !tab.node(u).partial;
                if u == e.to {
                    reached_target = true;
                    break;
                }
                cur = tab.node(u).fparent;
            }
            if !reached_target {
                return Err(format!(
                    "cyclic edge {i} -> {} does not close over the construction path",
                    e.to.0
                ));
            }
            if !saw_state {
                return Err(format!(
                    "the cycle {} -> ... -> {i} -> {} consists of partial nodes only",
                    e.to.0, e.to.0
                ));
            }
        }
    }
    Ok(())
}

/// Dependency sets only ever contain forward ancestors of their node, at
/// every point they were assigned during the run.
pub fn check_deps_are_forward_ancestors(trace: &[TraceEvent], tab: &Tableau) -> Result<(), String> {
    for ev in trace {
        let TraceEvent::DepsSet { node, deps } = ev else {
            continue;
        };
        for &d in deps {
            if !tab.is_forward_ancestor(NodeId(d), NodeId(*node)) {
                return Err(format!(
                    "node {node} recorded dependency {d}, which is not a forward ancestor"
                ));
            }
        }
    }
    Ok(())
}

/// True when the trace contains a static rule application with the given
/// principal formula that expanded `expanded` of its `degree` reduction sets.
pub fn has_rule_application(
    trace: &[TraceEvent],
    principal: &str,
    degree: usize,
    expanded: usize,
) -> bool {
    trace.iter().any(|ev| {
        matches!(ev, TraceEvent::RuleApplied { principal: Some(p), degree: d, expanded: e, .. }
            if p == principal && *d == degree && *e == expanded)
    })
}

/// The decomposition-shape invariant for one eventuality: every reduction
/// set is non-empty, the family size matches the reduction degree, and every
/// tracked successor is either the fulfilment target or again an eventuality
/// with the same iterated tail, headed by an atomic-or-universal box.
pub fn check_eventuality_shape(phi: FId) -> Result<(), String> {
    let target = ev_target(phi).ok_or("eventuality without a target")?;
    if is_eventuality(target) {
        return Err(format!("target of {phi:?} is itself an eventuality"));
    }
    let sets = reduction_sets(phi).ok_or("no reduction sets")?;
    let degree = reduction_degree(phi).ok_or("no degree")?;
    if sets.len() != degree || degree == 0 {
        return Err(format!(
            "family size {} does not match degree {degree}",
            sets.len()
        ));
    }
    if sets.iter().any(|r| r.is_empty()) {
        return Err("empty reduction set".into());
    }
    let tail = star_tail(phi).ok_or("eventuality without an iterated tail")?;
    for psi in vtrd_successors(phi) {
        if psi == target {
            continue;
        }
        if !is_eventuality(psi) {
            return Err("successor is neither the target nor an eventuality".into());
        }
        let Some((head, psi_tail)) = head_and_tail(psi) else {
            return Err("successor has no box chain".into());
        };
        if !in_atp_omega(head) {
            return Err("successor's leading box is not atomic or universal".into());
        }
        if psi_tail != tail {
            return Err("successor tracks a different iterated tail".into());
        }
    }
    Ok(())
}

/// The final `[A*]χ` box of an eventuality's chain, as `(A, χ)`.
fn star_tail(phi: FId) -> Option<(PId, FId)> {
    let FView::Not(mut cur) = fview(phi) else {
        return None;
    };
    let mut tail = None;
    loop {
        let FView::Box(p, body) = fview(cur) else {
            return tail;
        };
        if matches!(pview(p), PView::Star(_)) {
            tail = Some((p, body));
        }
        cur = body;
    }
}

/// The first box program of an eventuality's chain together with its
/// iterated tail.
fn head_and_tail(phi: FId) -> Option<(PId, (PId, FId))> {
    let FView::Not(cur) = fview(phi) else {
        return None;
    };
    let FView::Box(head, _) = fview(cur) else {
        return None;
    };
    Some((head, star_tail(phi)?))
}

/// Collect distinct alpha/beta eventualities appearing anywhere inside `f`.
pub fn collect_eventualities(f: FId, out: &mut std::collections::BTreeSet<FId>) {
    if is_alpha_beta(f) && is_eventuality(f) {
        out.insert(f);
    }
    match fview(f) {
        FView::Not(g) => collect_eventualities(g, out),
        FView::Box(p, g) => {
            collect_eventualities_p(p, out);
            collect_eventualities(g, out);
        }
        FView::Cap(_, p) => collect_eventualities_p(p, out),
        _ => {}
    }
}

fn collect_eventualities_p(p: PId, out: &mut std::collections::BTreeSet<FId>) {
    match pview(p) {
        PView::Test(g) => collect_eventualities(g, out),
        PView::Arrow(g, h) => {
            collect_eventualities(g, out);
            collect_eventualities(h, out);
        }
        PView::Seq(a, b) | PView::Choice(a, b) => {
            collect_eventualities_p(a, out);
            collect_eventualities_p(b, out);
        }
        PView::Star(a) => collect_eventualities_p(a, out),
        PView::Atomic(_) => {}
    }
}
