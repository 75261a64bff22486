//! Graphviz export of execution graphs.
//!
//! Nodes are labeled `tid:kind var=val`. Edge styles: sb solid (shown as
//! its transitive reduction), rf dashed, mo dotted (consecutive pairs),
//! and, when derived edges are requested, sw bold and fr colored.

use crate::candidates::CandidateExecution;
use crate::event::{Action, Event, VarTable};
use crate::rel::Rel;
use std::fmt::Write;

fn node_id(e: &Event) -> String {
    format!("e{}_{}", e.tag.tid, e.tag.idx)
}

fn node_label(e: &Event, vars: &VarTable) -> String {
    let name = vars.name(e.var());
    match e.action {
        Action::Read { val, .. } | Action::Write { val, .. } => {
            format!("{}:{} {}={}", e.tag.tid, e.action.kind(), name, val)
        }
        Action::Update { rdval, wrval, .. } => {
            format!("{}:{} {}={}>{}", e.tag.tid, e.action.kind(), name, rdval, wrval)
        }
    }
}

/// Render an execution as deterministic DOT text.
pub fn export_dot(c: &CandidateExecution, vars: &VarTable, derived: bool) -> String {
    let n = c.events.len();
    let mut out = String::new();
    writeln!(out, "digraph execution {{").unwrap();
    writeln!(out, "    rankdir=TB;").unwrap();
    writeln!(out, "    node [shape=box fontname=\"monospace\"];").unwrap();
    for e in &c.events {
        writeln!(out, "    {} [label=\"{}\"];", node_id(e), node_label(e, vars)).unwrap();
    }

    // sb as a transitive reduction (acyclic by SB-Total; if the input is
    // malformed the full relation is emitted)
    let mut sb = Rel::new(n);
    for &(a, b) in &c.sb {
        sb.insert(a as usize, b as usize);
    }
    let reduced: Vec<(usize, usize)> = if sb.closure().is_irreflexive() {
        sb.pairs()
            .into_iter()
            .filter(|&(a, b)| !(0..n).any(|m| m != a && m != b && sb.contains(a, m) && sb.contains(m, b)))
            .collect()
    } else {
        sb.pairs()
    };
    for (a, b) in reduced {
        writeln!(
            out,
            "    {} -> {} [label=\"sb\"];",
            node_id(&c.events[a]),
            node_id(&c.events[b])
        )
        .unwrap();
    }

    for &(w, r) in &c.rf {
        writeln!(
            out,
            "    {} -> {} [label=\"rf\" style=dashed];",
            node_id(&c.events[w as usize]),
            node_id(&c.events[r as usize])
        )
        .unwrap();
    }

    for seq in &c.mo {
        for pair in seq.windows(2) {
            writeln!(
                out,
                "    {} -> {} [label=\"mo\" style=dotted];",
                node_id(&c.events[pair[0] as usize]),
                node_id(&c.events[pair[1] as usize])
            )
            .unwrap();
        }
    }

    if derived {
        let rels = c.relations();
        for (a, b) in rels.sw.pairs() {
            writeln!(
                out,
                "    {} -> {} [label=\"sw\" style=bold];",
                node_id(&c.events[a]),
                node_id(&c.events[b])
            )
            .unwrap();
        }
        for (a, b) in rels.fr.pairs() {
            writeln!(
                out,
                "    {} -> {} [label=\"fr\" color=red];",
                node_id(&c.events[a]),
                node_id(&c.events[b])
            )
            .unwrap();
        }
    }

    writeln!(out, "}}").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::state::C11State;

    #[test]
    fn initial_state_has_nodes_and_no_edges() {
        let spec = parse(
            "init flag1 = 0, flag2 = 0, turn = 1;\nthread 1 { flag1 := 1; }",
        )
        .unwrap();
        let st = C11State::initial(&spec);
        let dot = export_dot(&CandidateExecution::from_state(&st), &spec.vars, false);
        assert_eq!(dot.matches("label=\"0:wr").count(), 3);
        assert!(!dot.contains("->"));
    }

    #[test]
    fn output_is_deterministic() {
        let spec = parse("init x = 0;\nthread 1 { x := 1; }").unwrap();
        let st = C11State::initial(&spec);
        let c = CandidateExecution::from_state(&st);
        assert_eq!(
            export_dot(&c, &spec.vars, true),
            export_dot(&c, &spec.vars, true)
        );
    }
}
