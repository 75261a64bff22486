//! Determinate-value and variable-order assertions, assertion evaluation
//! over configurations, and the per-transition audit of the inference
//! rules.

use crate::analysis::Analysis;
use crate::ast::{Assertion, Program};
use crate::event::{Event, Tag, Tid, Val, VarId};
use crate::explore::Configuration;
use crate::rel::BitSet;
use crate::state::C11State;
use std::fmt;

/// Determinate value of `x` for thread `t` in `σ`: `Some(wrval(last(x)))`
/// iff the only observable write of `x` for `t` is `last(x)` and `last(x)`
/// lies in `t`'s happens-before cone.
pub fn det_val(state: &C11State, t: Tid, x: VarId) -> Option<Val> {
    Analysis::new(state, &[t]).det_val(t, x)
}

/// Variable-order assertion `x →σ y`: `(last(x), last(y)) ∈ hb`.
pub fn var_ord(state: &C11State, x: VarId, y: VarId) -> bool {
    Analysis::new(state, &[]).var_ord(x, y)
}

/// Happens-before cone of `t`: initialisers, events of `t`, and events
/// hb-before an event of `t`.
pub fn hb_cone(state: &C11State, t: Tid) -> BitSet {
    Analysis::new(state, &[t]).hb_cone(t)
}

/// True iff every modification of `x` is an update or initialising write.
pub fn update_only(state: &C11State, x: VarId) -> bool {
    Analysis::new(state, &[]).update_only(x)
}

/// Evaluate an assertion over a configuration.
pub fn eval_assertion(config: &Configuration, a: &Assertion) -> bool {
    let analysis = Analysis::new(&config.state, &[]);
    eval_assertion_with(&config.program, &analysis, a)
}

/// Evaluate with a precomputed analysis of the configuration's state.
pub fn eval_assertion_with(program: &Program, analysis: &Analysis, a: &Assertion) -> bool {
    match a {
        Assertion::DetVal { t, var, v } => analysis.det_val(*t, *var) == Some(*v),
        Assertion::VarOrd { x, y } => analysis.var_ord(*x, *y),
        Assertion::UpdateOnly { var } => analysis.update_only(*var),
        Assertion::At { t, label } => program.at_label(*t, label),
        Assertion::OutcomeEq { var, v } => analysis.last_val(*var) == Some(*v),
        Assertion::Not(inner) => !eval_assertion_with(program, analysis, inner),
        Assertion::And(p, q) => {
            eval_assertion_with(program, analysis, p) && eval_assertion_with(program, analysis, q)
        }
        Assertion::Or(p, q) => {
            eval_assertion_with(program, analysis, p) || eval_assertion_with(program, analysis, q)
        }
        Assertion::Implies(p, q) => {
            !eval_assertion_with(program, analysis, p) || eval_assertion_with(program, analysis, q)
        }
    }
}

/// The eight inference rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleName {
    Init,
    ModLast,
    Transfer,
    UOrd,
    NoMod,
    AcqRd,
    WOrd,
    NoModOrd,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::Init => "Init",
            RuleName::ModLast => "ModLast",
            RuleName::Transfer => "Transfer",
            RuleName::UOrd => "UOrd",
            RuleName::NoMod => "NoMod",
            RuleName::AcqRd => "AcqRd",
            RuleName::WOrd => "WOrd",
            RuleName::NoModOrd => "NoModOrd",
        };
        write!(f, "{s}")
    }
}

/// One audited rule instantiation. A violation is `premises_held` together
/// with `!conclusion_held`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleAuditRecord {
    pub rule: RuleName,
    pub premises_held: bool,
    pub conclusion_held: bool,
    /// The transition's fresh event (identifies the transition).
    pub event: Tag,
    pub x: VarId,
    pub y: Option<VarId>,
    pub t: Option<Tid>,
    pub v: Option<Val>,
}

impl RuleAuditRecord {
    pub fn violated(&self) -> bool {
        self.premises_held && !self.conclusion_held
    }
}

/// A memory transition `(σ, m, e, σ')` prepared for auditing.
pub struct AuditedTransition<'a> {
    pub pre_state: &'a C11State,
    pub pre: &'a Analysis,
    pub post: &'a Analysis,
    pub observed: Event,
    pub event: Event,
}

impl AuditedTransition<'_> {
    fn last_tag_before(&self, x: VarId) -> Option<Tag> {
        self.pre.last[x.0 as usize].map(|i| self.pre_state.event(i).tag)
    }
}

/// Audit every rule over all instantiations of its free metavariables
/// (`x`, `y` over the given variable count, `t` over `threads`; `v` is
/// bound by the determinate values of the pre-state). The sink receives
/// one record per instantiation.
pub fn rule_audit_into(
    tr: &AuditedTransition,
    threads: &[Tid],
    nvars: usize,
    sink: &mut impl FnMut(RuleAuditRecord),
) {
    let m = tr.observed;
    let e = tr.event;
    let e_var = e.var();
    let e_writes = e.action.is_write();

    for xi in 0..nvars {
        let x = VarId(xi as u16);

        // ModLast: e modifies x and observes the last modification.
        {
            let premises =
                e_writes && e_var == x && tr.last_tag_before(x) == Some(m.tag);
            let conclusion = tr.post.det_val(e.tid(), x) == e.wrval();
            sink(RuleAuditRecord {
                rule: RuleName::ModLast,
                premises_held: premises,
                conclusion_held: conclusion,
                event: e.tag,
                x,
                y: None,
                t: Some(e.tid()),
                v: e.wrval(),
            });
        }

        // AcqRd: a pure acquiring read of x from a releasing last write.
        // Updates are excluded: they modify x themselves, so last(x)
        // becomes e and ModLast applies instead.
        {
            let premises = e_var == x
                && e.action.is_read()
                && !e.action.is_update()
                && e.action.is_acquire()
                && m.action.is_release()
                && m.var() == x
                && tr.last_tag_before(x) == Some(m.tag);
            let conclusion = tr.post.det_val(e.tid(), x) == e.rdval();
            sink(RuleAuditRecord {
                rule: RuleName::AcqRd,
                premises_held: premises,
                conclusion_held: conclusion,
                event: e.tag,
                x,
                y: None,
                t: Some(e.tid()),
                v: e.rdval(),
            });
        }

        // NoMod: e does not modify x; determinate values persist, for
        // every thread (v ranges over the pre-state's determinate values).
        for &t in threads {
            let Some(v) = tr.pre.det_val(t, x) else {
                continue;
            };
            let premises = !(e_writes && e_var == x);
            let conclusion = tr.post.det_val(t, x) == Some(v);
            sink(RuleAuditRecord {
                rule: RuleName::NoMod,
                premises_held: premises,
                conclusion_held: conclusion,
                event: e.tag,
                x,
                y: None,
                t: Some(t),
                v: Some(v),
            });
        }

        // Transfer: x →σ y and a synchronising read of last(y) copies
        // x's determinate value to the reading thread (y = var(e)).
        for &t in threads {
            let y = e_var;
            let Some(v) = tr.pre.det_val(t, x) else {
                continue;
            };
            let premises = tr.pre.var_ord(x, y)
                && e.action.is_read()
                && e.action.is_acquire()
                && m.action.is_release()
                && tr.last_tag_before(y) == Some(m.tag);
            let conclusion = tr.post.det_val(e.tid(), x) == Some(v);
            sink(RuleAuditRecord {
                rule: RuleName::Transfer,
                premises_held: premises,
                conclusion_held: conclusion,
                event: e.tag,
                x,
                y: Some(y),
                t: Some(t),
                v: Some(v),
            });
        }

        // UOrd: an update of y reading a releasing write preserves
        // x →σ y (no premise on m being last(y); the soundness proof
        // covers both cases).
        {
            let y = e_var;
            let premises = m.action.is_release()
                && m.var() == y
                && e.action.is_update()
                && tr.pre.var_ord(x, y);
            let conclusion = tr.post.var_ord(x, y);
            sink(RuleAuditRecord {
                rule: RuleName::UOrd,
                premises_held: premises,
                conclusion_held: conclusion,
                event: e.tag,
                x,
                y: Some(y),
                t: None,
                v: None,
            });
        }

        // WOrd: a write to y by a thread holding a determinate value of x
        // orders x before y.
        {
            let y = e_var;
            let v = tr.pre.det_val(e.tid(), x);
            if let Some(v) = v {
                let premises = x != y
                    && e_writes
                    && tr.last_tag_before(y) == Some(m.tag);
                let conclusion = tr.post.var_ord(x, y);
                sink(RuleAuditRecord {
                    rule: RuleName::WOrd,
                    premises_held: premises,
                    conclusion_held: conclusion,
                    event: e.tag,
                    x,
                    y: Some(y),
                    t: Some(e.tid()),
                    v: Some(v),
                });
            }
        }

        // NoModOrd: e modifies neither x nor y; variable order persists.
        for yi in 0..nvars {
            let y = VarId(yi as u16);
            let premises = !(e_writes && (e_var == x || e_var == y)) && tr.pre.var_ord(x, y);
            let conclusion = tr.post.var_ord(x, y);
            sink(RuleAuditRecord {
                rule: RuleName::NoModOrd,
                premises_held: premises,
                conclusion_held: conclusion,
                event: e.tag,
                x,
                y: Some(y),
                t: None,
                v: None,
            });
        }
    }
}

/// Audit a transition, collecting all records.
pub fn rule_audit(
    tr: &AuditedTransition,
    threads: &[Tid],
    nvars: usize,
) -> Vec<RuleAuditRecord> {
    let mut out = Vec::new();
    rule_audit_into(tr, threads, nvars, &mut |r| out.push(r));
    out
}

/// The Init rule, audited over an initial state: every thread holds the
/// initial determinate value of every variable.
pub fn audit_init(state: &C11State, threads: &[Tid], nvars: usize) -> Vec<RuleAuditRecord> {
    let analysis = Analysis::new(state, threads);
    let is_initial = state.events.iter().all(|e| e.is_initial())
        && state.rf.is_empty()
        && state.mo.iter().all(|seq| seq.len() <= 1);
    let mut out = Vec::new();
    for &t in threads {
        for xi in 0..nvars {
            let x = VarId(xi as u16);
            let expected = analysis.last[xi].and_then(|i| state.event(i).wrval());
            out.push(RuleAuditRecord {
                rule: RuleName::Init,
                premises_held: is_initial && expected.is_some(),
                conclusion_held: expected.is_none() || analysis.det_val(t, x) == expected,
                event: Tag::new(0, 0),
                x,
                y: None,
                t: Some(t),
                v: expected,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Action;
    use crate::state::C11State;

    fn wr(tid: Tid, idx: u32, var: u16, val: Val, rel: bool) -> Event {
        Event::new(Tag::new(tid, idx), Action::Write { var: VarId(var), val, rel })
    }

    fn rd(tid: Tid, idx: u32, var: u16, val: Val, acq: bool) -> Event {
        Event::new(Tag::new(tid, idx), Action::Read { var: VarId(var), val, acq })
    }

    /// The left state of the determinate-value illustration: after the
    /// boxed acquire read, thread 2 holds x = 2.
    fn example4_left() -> C11State {
        // x = var 0, y = var 1; thread 1 writes x then y (release),
        // thread 2 performs the boxed acquire read of y.
        let events = vec![
            wr(0, 0, 0, 0, false),
            wr(0, 1, 1, 0, false),
            wr(1, 0, 0, 2, false),
            wr(1, 1, 1, 1, true),
            rd(2, 0, 1, 1, true),
        ];
        C11State::from_tagged(
            events,
            &[(Tag::new(1, 1), Tag::new(2, 0))],
            &[
                (VarId(0), vec![Tag::new(0, 0), Tag::new(1, 0)]),
                (VarId(1), vec![Tag::new(0, 1), Tag::new(1, 1)]),
            ],
            2,
        )
        .unwrap()
    }

    /// The right-hand variant: the write to x sits on another thread and
    /// reaches thread 1 through an unsynchronised rf, so no hb edge makes
    /// it into thread 2's cone.
    fn example4_right() -> C11State {
        let events = vec![
            wr(0, 0, 0, 0, false),
            wr(0, 1, 1, 0, false),
            wr(3, 0, 0, 2, false),
            rd(1, 0, 0, 2, false),
            wr(1, 1, 1, 1, true),
            rd(2, 0, 1, 1, true),
        ];
        C11State::from_tagged(
            events,
            &[
                (Tag::new(3, 0), Tag::new(1, 0)),
                (Tag::new(1, 1), Tag::new(2, 0)),
            ],
            &[
                (VarId(0), vec![Tag::new(0, 0), Tag::new(3, 0)]),
                (VarId(1), vec![Tag::new(0, 1), Tag::new(1, 1)]),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn synchronised_read_transfers_determinate_value() {
        let st = example4_left();
        assert_eq!(det_val(&st, 2, VarId(0)), Some(2));
        assert_eq!(det_val(&st, 1, VarId(0)), Some(2));
    }

    #[test]
    fn unsynchronised_chain_yields_no_determinate_value() {
        let st = example4_right();
        // conditions (1) and (2) hold, but last(x) is outside thread 2's
        // happens-before cone
        let analysis = Analysis::new(&st, &[2]);
        let last_x = analysis.last[0].unwrap();
        assert!(analysis.observable_writes(2).contains(last_x as usize));
        assert_eq!(det_val(&st, 2, VarId(0)), None);
    }

    #[test]
    fn hb_cone_includes_synchronised_writer() {
        let st = example4_left();
        let cone = hb_cone(&st, 2);
        let wx = st.index_of(Tag::new(1, 0)).unwrap();
        assert!(cone.contains(wx as usize));
    }

    #[test]
    fn var_ord_through_release_chain() {
        // the left state without the boxed event satisfies x → y
        let events = vec![
            wr(0, 0, 0, 0, false),
            wr(0, 1, 1, 0, false),
            wr(1, 0, 0, 2, false),
            wr(1, 1, 1, 1, true),
        ];
        let st = C11State::from_tagged(
            events,
            &[],
            &[
                (VarId(0), vec![Tag::new(0, 0), Tag::new(1, 0)]),
                (VarId(1), vec![Tag::new(0, 1), Tag::new(1, 1)]),
            ],
            2,
        )
        .unwrap();
        assert!(var_ord(&st, VarId(0), VarId(1)));
        assert!(!var_ord(&st, VarId(1), VarId(0)));
    }

    /// The boxed acquire read copies thread 1's determinate value of x to
    /// thread 2: Transfer's premises and conclusion both hold, and the
    /// audit reports no violation on the transition.
    #[test]
    fn transfer_rule_fires_on_the_synchronising_read() {
        use crate::step::ActionTemplate;
        // the left state without the boxed event
        let events = vec![
            wr(0, 0, 0, 0, false),
            wr(0, 1, 1, 0, false),
            wr(1, 0, 0, 2, false),
            wr(1, 1, 1, 1, true),
        ];
        let pre_state = C11State::from_tagged(
            events,
            &[],
            &[
                (VarId(0), vec![Tag::new(0, 0), Tag::new(1, 0)]),
                (VarId(1), vec![Tag::new(0, 1), Tag::new(1, 1)]),
            ],
            2,
        )
        .unwrap();
        let pre = Analysis::new(&pre_state, &[1, 2]);
        assert!(pre.var_ord(VarId(0), VarId(1)));
        assert_eq!(pre.det_val(1, VarId(0)), Some(2));

        let steps = pre_state.ra_step(2, &ActionTemplate::Rd { var: VarId(1), acq: true });
        let boxed = steps
            .iter()
            .find(|t| t.observed.tag == Tag::new(1, 1))
            .unwrap();
        let post = Analysis::new(&boxed.next, &[1, 2]);
        let tr = AuditedTransition {
            pre_state: &pre_state,
            pre: &pre,
            post: &post,
            observed: boxed.observed,
            event: boxed.event,
        };
        let records = rule_audit(&tr, &[1, 2], 2);
        let transfer: Vec<&RuleAuditRecord> = records
            .iter()
            .filter(|r| r.rule == RuleName::Transfer && r.x == VarId(0) && r.t == Some(1))
            .collect();
        assert_eq!(transfer.len(), 1);
        assert!(transfer[0].premises_held);
        assert!(transfer[0].conclusion_held);
        assert!(records.iter().all(|r| !r.violated()));
        // and indeed thread 2 now holds x's determinate value
        assert_eq!(post.det_val(2, VarId(0)), Some(2));
    }

    #[test]
    fn init_rule_holds_on_initial_states() {
        let spec = crate::parse::parse("init x = 3, y = 7;\nthread 1 { x := 1; }").unwrap();
        let st = C11State::initial(&spec);
        let records = audit_init(&st, &[1], 2);
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.premises_held && r.conclusion_held));
        assert_eq!(records[0].v, Some(3));
        assert_eq!(records[1].v, Some(7));
    }

    #[test]
    fn update_only_flips_after_plain_write() {
        let events = vec![wr(0, 0, 0, 0, false), wr(1, 0, 0, 3, false)];
        let st = C11State::from_tagged(
            events,
            &[],
            &[(VarId(0), vec![Tag::new(0, 0), Tag::new(1, 0)])],
            1,
        )
        .unwrap();
        assert!(!update_only(&st, VarId(0)));
    }
}
