//! Property tests for the uninterpreted semantics (value irrelevance,
//! commutation, left-to-right evaluation) and the restriction coherence of
//! operational traces.

use proptest::prelude::*;
use rar_core::ast::{Command, Expr, LitmusSpec, Pos, Program, ReadAnn, UnOp, WriteAnn};
use rar_core::candidates::CandidateExecution;
use rar_core::event::{Tag, Val, VarId, VarTable};
use rar_core::explore::{pe_successors, successors, Configuration, TransitionEvent};
use rar_core::state::PreExecution;
use rar_core::step::{apply_program_step, command_step, eval_expr_step, StepLabel};
use std::collections::BTreeMap;
use std::collections::HashSet;

const P: Pos = Pos { line: 1, col: 1 };
const NVARS: u16 = 3;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..4i64).prop_map(|value| Expr::Literal { value, pos: P }),
        (0..NVARS, any::<bool>()).prop_map(|(v, acq)| Expr::VarRead {
            var: VarId(v),
            ann: if acq { ReadAnn::Acquire } else { ReadAnn::Relaxed },
            pos: P,
        }),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (any::<bool>(), inner.clone()).prop_map(|(neg, arg)| Expr::Unary {
                op: if neg { UnOp::Neg } else { UnOp::Not },
                arg: Box::new(arg),
                pos: P,
            }),
            (0..7u8, inner.clone(), inner).prop_map(|(op, lhs, rhs)| {
                use rar_core::ast::BinOp::*;
                let op = [And, Or, Eq, Neq, Lt, Add, Sub][op as usize];
                Expr::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    pos: P,
                }
            }),
        ]
    })
}

fn arb_command() -> impl Strategy<Value = Command> {
    let leaf = prop_oneof![
        Just(Command::Skip),
        (0..NVARS, any::<bool>(), arb_expr()).prop_map(|(v, rel, expr)| Command::Assign {
            var: VarId(v),
            ann: if rel { WriteAnn::Release } else { WriteAnn::Relaxed },
            expr,
            pos: P,
        }),
        (0..NVARS, 0..4i64).prop_map(|(v, value)| Command::Swap {
            var: VarId(v),
            value,
            pos: P,
        }),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Command::seq(a, b)),
            (arb_expr(), inner.clone(), inner.clone()).prop_map(|(guard, t, e)| Command::If {
                guard,
                then_branch: Box::new(t),
                else_branch: Box::new(e),
                pos: P,
            }),
            (arb_expr(), inner.clone()).prop_map(|(guard, body)| Command::While {
                guard,
                partial: None,
                body: Box::new(body),
                pos: P,
            }),
            inner.clone().prop_map(|body| Command::Label {
                name: "l".to_string(),
                body: Box::new(body),
                pos: P,
            }),
        ]
    })
}

/// Count positions where the trees differ; only `Literal(a)` vs
/// `Literal(b)` leaves may differ. Returns None on any other difference.
fn literal_diff(a: &Expr, b: &Expr, va: Val, vb: Val) -> Option<u32> {
    match (a, b) {
        (Expr::Literal { value: x, .. }, Expr::Literal { value: y, .. }) => {
            if x == y {
                Some(0)
            } else if *x == va && *y == vb {
                Some(1)
            } else {
                None
            }
        }
        (Expr::VarRead { var: x, ann: ax, .. }, Expr::VarRead { var: y, ann: ay, .. }) => {
            (x == y && ax == ay).then_some(0)
        }
        (Expr::Unary { op: oa, arg: aa, .. }, Expr::Unary { op: ob, arg: ab, .. }) => {
            (oa == ob).then_some(())?;
            literal_diff(aa, ab, va, vb)
        }
        (
            Expr::Binary { op: oa, lhs: la, rhs: ra, .. },
            Expr::Binary { op: ob, lhs: lb, rhs: rb, .. },
        ) => {
            (oa == ob).then_some(())?;
            Some(literal_diff(la, lb, va, vb)? + literal_diff(ra, rb, va, vb)?)
        }
        _ => None,
    }
}

fn command_literal_diff(a: &Command, b: &Command, va: Val, vb: Val) -> Option<u32> {
    match (a, b) {
        (Command::Skip, Command::Skip) => Some(0),
        (
            Command::Assign { var: x, ann: ax, expr: ea, .. },
            Command::Assign { var: y, ann: ay, expr: eb, .. },
        ) => {
            (x == y && ax == ay).then_some(())?;
            literal_diff(ea, eb, va, vb)
        }
        (Command::Swap { var: x, value: na, .. }, Command::Swap { var: y, value: nb, .. }) => {
            (x == y && na == nb).then_some(0)
        }
        (Command::Seq(a1, a2), Command::Seq(b1, b2)) => {
            Some(command_literal_diff(a1, b1, va, vb)? + command_literal_diff(a2, b2, va, vb)?)
        }
        (
            Command::If { guard: ga, then_branch: ta, else_branch: ea, .. },
            Command::If { guard: gb, then_branch: tb, else_branch: eb, .. },
        ) => Some(
            literal_diff(ga, gb, va, vb)?
                + command_literal_diff(ta, tb, va, vb)?
                + command_literal_diff(ea, eb, va, vb)?,
        ),
        (
            Command::While { guard: ga, partial: pa, body: ba, .. },
            Command::While { guard: gb, partial: pb, body: bb, .. },
        ) => {
            let partial = match (pa, pb) {
                (None, None) => 0,
                (Some(x), Some(y)) => literal_diff(x, y, va, vb)?,
                _ => return None,
            };
            Some(
                literal_diff(ga, gb, va, vb)?
                    + partial
                    + command_literal_diff(ba, bb, va, vb)?,
            )
        }
        (
            Command::Label { name: na, body: ba, .. },
            Command::Label { name: nb, body: bb, .. },
        ) => {
            (na == nb).then_some(())?;
            command_literal_diff(ba, bb, va, vb)
        }
        _ => None,
    }
}

fn spec_for(threads: BTreeMap<u32, Command>) -> LitmusSpec {
    LitmusSpec {
        name: "prop".to_string(),
        vars: VarTable::from_names((0..NVARS).map(|i| format!("v{i}"))),
        init: vec![0; NVARS as usize],
        threads,
        assertions: Vec::new(),
        bound: 8,
    }
}

proptest! {
    /// The residual of a read or update step does not depend on the value
    /// read, beyond the substituted literal itself.
    #[test]
    fn value_irrelevance(cmd in arb_command(), m in 0..4i64, m2 in 4..8i64) {
        let a = command_step(&cmd, m);
        let b = command_step(&cmd, m2);
        match (a, b) {
            (None, None) => {}
            (Some((la, ca)), Some((lb, cb))) => {
                let reads = match (la, lb) {
                    (StepLabel::Tau, StepLabel::Tau) => false,
                    (StepLabel::Act(x), StepLabel::Act(y)) => {
                        // labels agree up to the read value
                        prop_assert_eq!(x.var(), y.var());
                        prop_assert_eq!(x.wrval(), y.wrval());
                        prop_assert_eq!(x.is_update(), y.is_update());
                        prop_assert_eq!(x.is_acquire(), y.is_acquire());
                        x.rdval().is_some()
                    }
                    _ => {
                        prop_assert!(false, "step kinds diverged");
                        false
                    }
                };
                let diff = command_literal_diff(&ca, &cb, m, m2);
                prop_assert!(diff.is_some(), "residual shapes diverged");
                let expected = if reads && !la_is_update(&la) { 1 } else { 0 };
                // an update substitutes no literal into the residual
                prop_assert!(diff.unwrap() <= expected.max(0) && diff.unwrap() <= 1);
            }
            _ => prop_assert!(false, "one value stepped, the other did not"),
        }
    }

    /// Steps of distinct threads commute on the program component.
    #[test]
    fn program_commutation(c1 in arb_command(), c2 in arb_command(), v1 in 0..4i64, v2 in 0..4i64) {
        let prog = Program::new(BTreeMap::from([(1, c1), (2, c2)]));
        let s1 = apply_program_step(&prog, 1, v1);
        let s2 = apply_program_step(&prog, 2, v2);
        if let (Some((_, p1)), Some((_, _))) = (&s1, &s2) {
            let p12 = apply_program_step(p1, 2, v2).map(|(_, p)| p);
            let p21 = apply_program_step(&apply_program_step(&prog, 2, v2).unwrap().1, 1, v1)
                .map(|(_, p)| p);
            prop_assert_eq!(p12, p21);
        }
    }

    /// Expression evaluation emits exactly one read per variable
    /// occurrence, in left-to-right order.
    #[test]
    fn left_to_right_determinism(e in arb_expr()) {
        let expected = e.read_occurrences();
        let mut cur = e;
        let mut seen = Vec::new();
        while let Some((action, next)) = eval_expr_step(&cur, 1) {
            if let rar_core::event::Action::Read { var, acq, .. } = action {
                seen.push((var, if acq { ReadAnn::Acquire } else { ReadAnn::Relaxed }));
            }
            cur = next;
        }
        prop_assert!(cur.is_variable_free());
        prop_assert_eq!(seen, expected);
    }

    /// Pre-execution steps of distinct threads commute.
    #[test]
    fn pe_commutation(c1 in arb_command(), c2 in arb_command()) {
        let spec = spec_for(BTreeMap::from([(1, c1), (2, c2)]));
        let config = Configuration::initial(&spec);
        let domain = [0, 1];
        let succ = pe_successors(&config, &domain);
        let of_thread = |tid: u32| -> Vec<&(TransitionEvent, Configuration)> {
            succ.iter()
                .filter(|(e, _)| match e {
                    TransitionEvent::Tau { tid: t } => *t == tid,
                    TransitionEvent::Event(e) => e.tid() == tid,
                })
                .collect()
        };
        for (e1, after1) in of_thread(1) {
            for (e2, _) in of_thread(2) {
                // replay e2 from after1 and e1 from after2
                let step2 = pe_successors(after1, &domain)
                    .into_iter()
                    .find(|(e, _)| e == e2)
                    .map(|(_, c)| c);
                let after2 = pe_successors(&config, &domain)
                    .into_iter()
                    .find(|(e, _)| e == e2)
                    .map(|(_, c)| c)
                    .unwrap();
                let step1 = pe_successors(&after2, &domain)
                    .into_iter()
                    .find(|(e, _)| e == e1)
                    .map(|(_, c)| c);
                prop_assert!(step2.is_some());
                prop_assert_eq!(step2, step1);
            }
        }
    }
}

fn la_is_update(l: &StepLabel) -> bool {
    matches!(l, StepLabel::Act(a) if a.is_update())
}

/// The canonical sb derived from tags equals the sb built by the extend
/// operator along any interpreted run.
#[test]
fn extend_agrees_with_tag_derived_sb() {
    let spec = rar_core::parse(
        "init x = 0, y = 0;\nthread 1 { x := 1; y := x; }\nthread 2 { swap(x, 2); }",
    )
    .unwrap();
    let mut stack = vec![(
        Configuration::initial(&spec),
        PreExecution::new(rar_core::state::C11State::initial(&spec).events, Vec::new()),
    )];
    while let Some((config, pre)) = stack.pop() {
        // compare sb pair sets
        let mut derived = config.state.sb_pairs();
        derived.sort_unstable();
        let tag_of = |i: u32| config.state.event(i).tag;
        let mut derived_tags: Vec<(Tag, Tag)> =
            derived.iter().map(|&(a, b)| (tag_of(a), tag_of(b))).collect();
        derived_tags.sort();
        let pre_tag = |i: u32| pre.events[i as usize].tag;
        let mut extended_tags: Vec<(Tag, Tag)> =
            pre.sb.iter().map(|&(a, b)| (pre_tag(a), pre_tag(b))).collect();
        extended_tags.sort();
        assert_eq!(derived_tags, extended_tags);

        for (label, next) in successors(&config) {
            if next.state.thread_event_count() > 5 {
                continue;
            }
            match label.event {
                TransitionEvent::Tau { .. } => stack.push((next, pre.clone())),
                TransitionEvent::Event(e) => {
                    stack.push((next, pre.extend(e).unwrap()));
                }
            }
        }
    }
}

/// Along any explored trace, the state after i events equals the trace's
/// final state restricted to its first i events.
#[test]
fn restriction_coherence_along_traces() {
    let spec = rar_core::parse(
        "init f = 0, d = 0;\nthread 1 { d := 5; f :=[rel] 1; }\nthread 2 { d := acq(f); }",
    )
    .unwrap();
    // walk every path up to 5 events, remembering the state sequence
    fn walk(config: &Configuration, prefix: &mut Vec<rar_core::C11State>) {
        prefix.push(config.state.clone());
        // check the invariant on the current path
        let last = CandidateExecution::from_state(prefix.last().unwrap());
        for (i, st) in prefix.iter().enumerate() {
            let events: HashSet<Tag> = st
                .events
                .iter()
                .filter(|e| !e.is_initial())
                .map(|e| e.tag)
                .collect();
            let _ = i;
            assert_eq!(CandidateExecution::from_state(st), last.restrict(&events));
        }
        for (_, next) in successors(config) {
            if next.state.thread_event_count() <= 5 {
                walk(&next, prefix);
            }
        }
        prefix.pop();
    }
    let mut prefix = Vec::new();
    walk(&Configuration::initial(&spec), &mut prefix);
}
