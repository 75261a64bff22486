//! Bounded exhaustive exploration of the interpreted semantics.
//!
//! Every reachable configuration within the event bound is visited exactly
//! once (configurations deduplicate structurally thanks to the canonical
//! event tagging). Alongside the litmus assertions, each visited state runs
//! the full axiom battery and the eco closed form, and each memory
//! transition runs the inference-rule audit and the determinate-value
//! lemmas, so a soundness bug in the semantics surfaces as an oracle
//! failure rather than a wrong verdict.

use crate::analysis::Analysis;
use crate::assertions::{
    audit_init, eval_assertion_with, rule_audit_into, AuditedTransition, RuleAuditRecord,
};
use crate::ast::{Assertion, LitmusSpec, Program, Scope};

use crate::candidates::CandidateExecution;
use crate::event::{Event, Tid, Val, VarId};
use crate::state::C11State;
use crate::step::{program_steps, ActionTemplate, StepLabel};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::{Hash, Hasher};

/// A unit of state-space exploration: residual program plus C11 state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub program: Program,
    pub state: C11State,
}

impl Configuration {
    pub fn initial(spec: &LitmusSpec) -> Configuration {
        Configuration {
            program: spec.program(),
            state: C11State::initial(spec),
        }
    }

    pub fn is_final(&self) -> bool {
        self.program.is_final()
    }
}

/// The event part of a transition label; silent steps carry the stepping
/// thread.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionEvent {
    Tau { tid: Tid },
    Event(Event),
}

/// Label of an interpreted transition: the observed write (absent exactly
/// for silent steps) and the event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TransitionLabel {
    pub observed: Option<Event>,
    pub event: TransitionEvent,
}

impl TransitionLabel {
    pub fn display<'a>(&'a self, vars: &'a crate::event::VarTable) -> String {
        match &self.event {
            TransitionEvent::Tau { tid } => format!("tau(thread {tid})"),
            TransitionEvent::Event(e) => match self.observed {
                Some(w) => format!("{} observing {}", e.display(vars), w.display(vars)),
                None => format!("{}", e.display(vars)),
            },
        }
    }
}

/// Deterministic fingerprint of a configuration: equal configurations have
/// equal keys. Exploration resolves hash collisions by full structural
/// comparison of the configurations themselves.
pub fn canonical_key(c: &Configuration) -> u64 {
    let mut h = DefaultHasher::new();
    c.hash(&mut h);
    h.finish()
}

/// All interpreted successors of a configuration, deterministically ordered
/// by thread id, then observed-write tag.
pub fn successors(c: &Configuration) -> Vec<(TransitionLabel, Configuration)> {
    let threads: Vec<Tid> = c.program.threads.keys().copied().collect();
    let analysis = Analysis::new(&c.state, &threads);
    successors_with(c, &analysis)
}

/// Like [`successors`] but reusing a precomputed analysis of the state.
pub fn successors_with(
    c: &Configuration,
    analysis: &Analysis,
) -> Vec<(TransitionLabel, Configuration)> {
    let mut out = Vec::new();
    for (tid, template) in program_steps(&c.program) {
        if template.is_tau() {
            let (label, program) =
                crate::step::apply_program_step(&c.program, tid, 0).expect("tau step");
            debug_assert_eq!(label, StepLabel::Tau);
            out.push((
                TransitionLabel {
                    observed: None,
                    event: TransitionEvent::Tau { tid },
                },
                Configuration {
                    program,
                    state: c.state.clone(),
                },
            ));
            continue;
        }
        for tr in c.state.ra_step_with(analysis, tid, &template) {
            let chosen = tr.event.rdval().unwrap_or(0);
            let (label, program) = crate::step::apply_program_step(&c.program, tid, chosen)
                .expect("enabled template");
            debug_assert_eq!(label, StepLabel::Act(tr.event.action));
            out.push((
                TransitionLabel {
                    observed: Some(tr.observed),
                    event: TransitionEvent::Event(tr.event),
                },
                Configuration {
                    program,
                    state: tr.next,
                },
            ));
        }
    }
    out
}

/// Pre-execution successors: reads and updates fan out over the value
/// domain with no rf/mo bookkeeping; writes and silent steps behave as in
/// the interpreted semantics but without memory constraints.
pub fn pe_successors(
    c: &Configuration,
    value_domain: &[Val],
) -> Vec<(TransitionEvent, Configuration)> {
    let mut out = Vec::new();
    for (tid, template) in program_steps(&c.program) {
        match template {
            ActionTemplate::Tau => {
                let (_, program) =
                    crate::step::apply_program_step(&c.program, tid, 0).expect("tau step");
                out.push((
                    TransitionEvent::Tau { tid },
                    Configuration {
                        program,
                        state: c.state.clone(),
                    },
                ));
            }
            ActionTemplate::Wr { .. } => {
                let (label, program) =
                    crate::step::apply_program_step(&c.program, tid, 0).expect("write step");
                let StepLabel::Act(action) = label else { unreachable!() };
                let event = Event::new(
                    crate::event::Tag::new(tid, c.state.next_index(tid)),
                    action,
                );
                let mut state = c.state.clone();
                state.pe_insert(event);
                out.push((
                    TransitionEvent::Event(event),
                    Configuration { program, state },
                ));
            }
            ActionTemplate::Rd { .. } | ActionTemplate::UpdRA { .. } => {
                for &v in value_domain {
                    let (label, program) = crate::step::apply_program_step(&c.program, tid, v)
                        .expect("read step");
                    let StepLabel::Act(action) = label else { unreachable!() };
                    let event = Event::new(
                        crate::event::Tag::new(tid, c.state.next_index(tid)),
                        action,
                    );
                    let mut state = c.state.clone();
                    state.pe_insert(event);
                    out.push((
                        TransitionEvent::Event(event),
                        Configuration { program, state },
                    ));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Bfs,
    Dfs,
}

#[derive(Clone, Debug)]
pub struct ExploreOpts {
    /// Max non-initialising events per execution path; silent steps are
    /// free.
    pub max_events: u32,
    pub mode: Mode,
    /// Disabling deduplication revisits configurations (test hook; only
    /// sensible at small bounds).
    pub dedup: bool,
    /// Keep the set of visited canonical keys in the result.
    pub collect_keys: bool,
}

impl ExploreOpts {
    pub fn new(max_events: u32) -> Self {
        ExploreOpts {
            max_events,
            mode: Mode::Bfs,
            dedup: true,
            collect_keys: false,
        }
    }
}

/// A failed assertion with its counterexample trace (shortest under BFS).
#[derive(Clone, Debug)]
pub struct Violation {
    pub scope: Scope,
    pub assertion: Assertion,
    pub trace: Vec<TransitionLabel>,
}

/// A reachability witness: the trace that satisfied a `reachable`
/// assertion.
#[derive(Clone, Debug)]
pub struct WitnessTrace {
    pub assertion: Assertion,
    pub trace: Vec<TransitionLabel>,
}

/// Counters and first-failure evidence for the built-in oracles. All
/// counts are expected to stay zero on every run.
#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub validity_failures: usize,
    pub first_validity_failure: Option<String>,
    pub eco_closed_form_mismatches: usize,
    pub state_invariant_failures: usize,
    pub first_state_invariant_failure: Option<String>,
    pub audit_records: usize,
    pub audit_violations: Vec<RuleAuditRecord>,
    pub audit_violation_count: usize,
    pub lemma_failures: Vec<String>,
    pub lemma_failure_count: usize,
}

impl OracleReport {
    pub fn clean(&self) -> bool {
        self.validity_failures == 0
            && self.eco_closed_form_mismatches == 0
            && self.state_invariant_failures == 0
            && self.audit_violation_count == 0
            && self.lemma_failure_count == 0
    }
}

#[derive(Clone, Debug)]
pub struct ExplorationResult {
    pub states_visited: usize,
    pub transitions: usize,
    pub frontier_truncated: bool,
    pub violations: Vec<Violation>,
    pub witnesses: Vec<WitnessTrace>,
    /// Per-variable last-write valuations of final configurations.
    pub final_outcomes: BTreeSet<Vec<Val>>,
    pub final_configurations: usize,
    pub oracle: OracleReport,
    pub visited_keys: BTreeSet<u64>,
}

struct NodeInfo {
    parent: Option<u32>,
    label: Option<TransitionLabel>,
}

struct Search<'a> {
    spec: &'a LitmusSpec,
    opts: &'a ExploreOpts,
    threads: Vec<Tid>,
    nvars: usize,
    visited: HashMap<Configuration, u32>,
    info: Vec<NodeInfo>,
    result: ExplorationResult,
    /// Assertions still waiting for their first violation/witness.
    pending_always: Vec<usize>,
    pending_finally: Vec<usize>,
    pending_reachable: Vec<usize>,
}

impl Search<'_> {
    fn trace_to(&self, id: u32) -> Vec<TransitionLabel> {
        let mut labels = Vec::new();
        let mut cur = id;
        while let Some(info) = self.info.get(cur as usize) {
            match (info.parent, info.label) {
                (Some(p), Some(l)) => {
                    labels.push(l);
                    cur = p;
                }
                _ => break,
            }
        }
        labels.reverse();
        labels
    }

    /// State-level oracles and assertions, run once when a configuration is
    /// first visited.
    fn visit(&mut self, config: &Configuration, analysis: &Analysis, id: u32) {
        self.result.states_visited += 1;
        if self.opts.collect_keys {
            self.result.visited_keys.insert(canonical_key(config));
        }

        // Theorem-1 oracle: every reachable state satisfies the axioms.
        let cand = CandidateExecution::from_state(&config.state);
        let report = crate::axioms::check_validity_with(&cand, &analysis.rels);
        if !report.pass() {
            self.result.oracle.validity_failures += 1;
            if self.result.oracle.first_validity_failure.is_none() {
                let failed = report.first_failure().unwrap();
                self.result.oracle.first_validity_failure =
                    Some(format!("{}: {:?}", failed.name, failed.witness));
            }
        }

        // eco closed form agrees with the transitive closure.
        if analysis.rels.eco_closed_form() != analysis.rels.eco {
            self.result.oracle.eco_closed_form_mismatches += 1;
        }

        self.check_state_invariants(config, analysis);

        // litmus assertions
        let spec = self.spec;
        let newly_violated: Vec<usize> = self
            .pending_always
            .iter()
            .copied()
            .filter(|&ai| !eval_assertion_with(&config.program, analysis, &spec.assertions[ai].1))
            .collect();
        for &ai in &newly_violated {
            let trace = self.trace_to(id);
            self.result.violations.push(Violation {
                scope: Scope::Always,
                assertion: spec.assertions[ai].1.clone(),
                trace,
            });
        }
        self.pending_always.retain(|ai| !newly_violated.contains(ai));

        if config.is_final() {
            self.result.final_configurations += 1;
            let outcome: Vec<Val> = analysis
                .last_vals
                .iter()
                .map(|v| v.expect("every variable has a last write"))
                .collect();
            self.result.final_outcomes.insert(outcome);

            let newly: Vec<usize> = self
                .pending_finally
                .iter()
                .copied()
                .filter(|&ai| {
                    !eval_assertion_with(&config.program, analysis, &spec.assertions[ai].1)
                })
                .collect();
            for &ai in &newly {
                let trace = self.trace_to(id);
                self.result.violations.push(Violation {
                    scope: Scope::FinallyAll,
                    assertion: spec.assertions[ai].1.clone(),
                    trace,
                });
            }
            self.pending_finally.retain(|ai| !newly.contains(ai));
        }

        let newly_found: Vec<usize> = self
            .pending_reachable
            .iter()
            .copied()
            .filter(|&ai| eval_assertion_with(&config.program, analysis, &spec.assertions[ai].1))
            .collect();
        for &ai in &newly_found {
            let trace = self.trace_to(id);
            self.result.witnesses.push(WitnessTrace {
                assertion: spec.assertions[ai].1.clone(),
                trace,
            });
        }
        self.pending_reachable.retain(|ai| !newly_found.contains(ai));
    }

    fn check_state_invariants(&mut self, config: &Configuration, analysis: &Analysis) {
        let fail = |msg: String, report: &mut OracleReport| {
            report.state_invariant_failures += 1;
            report.first_state_invariant_failure.get_or_insert(msg);
        };
        let report = &mut self.result.oracle;
        for x in 0..self.nvars {
            let Some(last) = analysis.last[x] else {
                fail(format!("variable #{x} has no last write"), report);
                continue;
            };
            // last(x) can always be observed, by every thread
            for &t in &self.threads {
                if !analysis.observable_writes(t).contains(last as usize) {
                    fail(
                        format!("last write of #{x} not observable to thread {t}"),
                        report,
                    );
                }
            }
            // last(x) is never covered
            if analysis.covered.contains(last as usize) {
                fail(format!("last write of #{x} is covered"), report);
            }
        }
        if !analysis.rels.hb.is_irreflexive() {
            fail("hb is reflexive".to_string(), report);
        }
        // update-order properties: (u,x) ∈ fr ⇒ (u,x) ∈ mo and
        // (x,u) ∈ rf ⇒ (x,u) ∈ mo for updates u
        for u in analysis.updates.iter() {
            for x in analysis.rels.fr.row_iter(u) {
                if !analysis.rels.mo.contains(u, x) {
                    fail(format!("fr edge from update not in mo"), report);
                }
            }
        }
        for &(w, r) in &config.state.rf {
            if config.state.event(r).action.is_update()
                && !analysis.rels.mo.contains(w as usize, r as usize)
            {
                fail("rf into update not in mo".to_string(), report);
            }
        }
        // Determinate-Value Agreement: threads never disagree on a
        // determinate value.
        for x in 0..self.nvars {
            let mut seen: Option<Val> = None;
            for &t in &self.threads {
                if let Some(v) = analysis.det_val(t, VarId(x as u16)) {
                    if let Some(prev) = seen {
                        if prev != v {
                            report.lemma_failure_count += 1;
                            if report.lemma_failures.len() < 32 {
                                report.lemma_failures.push(format!(
                                    "agreement: threads disagree on determinate value of #{x}"
                                ));
                            }
                        }
                    }
                    seen = Some(v);
                }
            }
        }
    }

    /// Transition-level oracles: the rule audit and the determinate-value
    /// lemmas.
    fn audit_transition(
        &mut self,
        pre_state: &C11State,
        pre: &Analysis,
        post: &Analysis,
        observed: Event,
        event: Event,
    ) {
        let tr = AuditedTransition {
            pre_state,
            pre,
            post,
            observed,
            event,
        };
        let report = &mut self.result.oracle;
        rule_audit_into(&tr, &self.threads, self.nvars, &mut |rec| {
            report.audit_records += 1;
            if rec.violated() {
                report.audit_violation_count += 1;
                if report.audit_violations.len() < 32 {
                    report.audit_violations.push(rec);
                }
            }
        });

        let mut lemma_fail = |msg: String| {
            report.lemma_failure_count += 1;
            if report.lemma_failures.len() < 32 {
                report.lemma_failures.push(msg);
            }
        };

        // Determinate-Value Read: a read in a state with a determinate
        // value returns it.
        if event.action.is_read() {
            if let Some(v) = pre.det_val(event.tid(), event.var()) {
                if event.rdval() != Some(v) {
                    lemma_fail(format!(
                        "det-val read: {:?} read {:?}, determinate value {v}",
                        event,
                        event.rdval()
                    ));
                }
            }
        }

        // Last Modification Transition: a determinate value forces any
        // access to observe the last modification; an update-only variable
        // forces it for modifications (they must avoid covered writes;
        // plain reads may still read a covered non-last write).
        let x = event.var();
        let has_det = pre.det_val(event.tid(), x).is_some();
        if has_det || (pre.update_only(x) && event.action.is_write()) {
            let last_tag = pre.last[x.0 as usize].map(|i| pre_state.event(i).tag);
            if last_tag != Some(observed.tag) {
                lemma_fail(format!(
                    "last-mod transition: {:?} observed {}, last is {:?}",
                    event, observed.tag, last_tag
                ));
            }
        }
    }
}

/// Bounded exhaustive exploration. Visits every configuration reachable
/// with at most `max_events` non-initialising events exactly once,
/// evaluates `always` assertions at every state, `reachable` as existence
/// and `finally` on final configurations, and reports truncation when some
/// configuration at the bound still had memory successors.
pub fn explore(spec: &LitmusSpec, opts: &ExploreOpts) -> ExplorationResult {
    let threads: Vec<Tid> = spec.threads.keys().copied().collect();
    let nvars = spec.vars.len();
    let mut search = Search {
        spec,
        opts,
        threads: threads.clone(),
        nvars,
        visited: HashMap::new(),
        info: Vec::new(),
        result: ExplorationResult {
            states_visited: 0,
            transitions: 0,
            frontier_truncated: false,
            violations: Vec::new(),
            witnesses: Vec::new(),
            final_outcomes: BTreeSet::new(),
            final_configurations: 0,
            oracle: OracleReport::default(),
            visited_keys: BTreeSet::new(),
        },
        pending_always: Vec::new(),
        pending_finally: Vec::new(),
        pending_reachable: Vec::new(),
    };
    for (i, (scope, _)) in spec.assertions.iter().enumerate() {
        match scope {
            Scope::Always => search.pending_always.push(i),
            Scope::FinallyAll => search.pending_finally.push(i),
            Scope::Reachable => search.pending_reachable.push(i),
        }
    }

    // Init-rule audit on the initial state.
    let initial = Configuration::initial(spec);
    for rec in audit_init(&initial.state, &threads, nvars) {
        search.result.oracle.audit_records += 1;
        if rec.violated() {
            search.result.oracle.audit_violation_count += 1;
            if search.result.oracle.audit_violations.len() < 32 {
                search.result.oracle.audit_violations.push(rec);
            }
        }
    }

    let mut frontier: VecDeque<(Configuration, u32)> = VecDeque::new();
    let init_analysis = Analysis::new(&initial.state, &threads);
    search.visited.insert(initial.clone(), 0);
    search.info.push(NodeInfo {
        parent: None,
        label: None,
    });
    search.visit(&initial, &init_analysis, 0);
    frontier.push_back((initial, 0));

    while let Some((config, id)) = match opts.mode {
        Mode::Bfs => frontier.pop_front(),
        Mode::Dfs => frontier.pop_back(),
    } {
        let analysis = Analysis::new(&config.state, &threads);
        for (label, next) in successors_with(&config, &analysis) {
            // bound: count non-initialising events per path
            if next.state.thread_event_count() as u32 > opts.max_events {
                search.result.frontier_truncated = true;
                continue;
            }
            search.result.transitions += 1;

            if let (Some(observed), TransitionEvent::Event(event)) = (label.observed, label.event)
            {
                let post_analysis = Analysis::new(&next.state, &threads);
                search.audit_transition(&config.state, &analysis, &post_analysis, observed, event);

                let known = search.visited.contains_key(&next);
                if !known || !opts.dedup {
                    let id2 = search.info.len() as u32;
                    search.info.push(NodeInfo {
                        parent: Some(id),
                        label: Some(label),
                    });
                    if !known {
                        search.visited.insert(next.clone(), id2);
                        search.visit(&next, &post_analysis, id2);
                    }
                    frontier.push_back((next, id2));
                }
            } else {
                // silent step
                let known = search.visited.contains_key(&next);
                if !known || !opts.dedup {
                    let id2 = search.info.len() as u32;
                    search.info.push(NodeInfo {
                        parent: Some(id),
                        label: Some(label),
                    });
                    if !known {
                        let post_analysis = Analysis::new(&next.state, &threads);
                        search.visited.insert(next.clone(), id2);
                        search.visit(&next, &post_analysis, id2);
                    }
                    frontier.push_back((next, id2));
                }
            }
        }
    }

    // unsatisfied reachability queries are violations
    let pending = std::mem::take(&mut search.pending_reachable);
    for ai in pending {
        let (_, a) = &spec.assertions[ai];
        search.result.violations.push(Violation {
            scope: Scope::Reachable,
            assertion: a.clone(),
            trace: Vec::new(),
        });
    }

    search.result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn final_configuration_has_no_successors() {
        let spec = parse("init x = 0;\nthread 1 { }").unwrap();
        let c = Configuration::initial(&spec);
        assert!(c.is_final());
        assert!(successors(&c).is_empty());
        assert!(pe_successors(&c, &[0, 1]).is_empty());
    }

    #[test]
    fn pe_reads_fan_out_over_domain_including_unwritten_values() {
        let spec = parse("init x = 0, z = 0;\nthread 1 { z := x; }\nthread 2 { x := 5; }")
            .unwrap();
        let c = Configuration::initial(&spec);
        let succ = pe_successors(&c, &spec.value_domain());
        // thread 1: one read per domain value {0, 5}; thread 2: one write
        let reads = succ
            .iter()
            .filter(|(e, _)| matches!(e, TransitionEvent::Event(e) if e.action.is_read()))
            .count();
        let writes = succ
            .iter()
            .filter(|(e, _)| matches!(e, TransitionEvent::Event(e) if e.action.is_write()))
            .count();
        assert_eq!(reads, 2);
        assert_eq!(writes, 1);
    }

    #[test]
    fn canonical_keys_deduplicate_interleavings() {
        let spec = parse("init x = 0, y = 0;\nthread 1 { x := 1; }\nthread 2 { y := 1; }")
            .unwrap();
        let c = Configuration::initial(&spec);
        let succ = successors(&c);
        assert_eq!(succ.len(), 2);
        let after_1_then_2 = successors(&succ[0].1)
            .into_iter()
            .find(|(l, _)| matches!(l.event, TransitionEvent::Event(e) if e.tid() == 2))
            .unwrap()
            .1;
        let after_2_then_1 = successors(&succ[1].1)
            .into_iter()
            .find(|(l, _)| matches!(l.event, TransitionEvent::Event(e) if e.tid() == 1))
            .unwrap()
            .1;
        assert_eq!(after_1_then_2, after_2_then_1);
        assert_eq!(
            canonical_key(&after_1_then_2),
            canonical_key(&after_2_then_1)
        );
        // different mo (same events) gives a different key
        assert_ne!(canonical_key(&succ[0].1), canonical_key(&succ[1].1));
    }

    #[test]
    fn explore_counts_and_outcomes_for_store_buffer() {
        let spec = parse(
            "init x = 0, y = 0, a = 0, b = 0;\n\
             thread 1 { x := 1; a := y; }\n\
             thread 2 { y := 1; b := x; }",
        )
        .unwrap();
        let res = explore(&spec, &ExploreOpts::new(8));
        assert!(!res.frontier_truncated);
        assert!(res.oracle.clean(), "{:?}", res.oracle);
        assert!(res.violations.is_empty());
        // all four read combinations reach final states
        let outcomes: BTreeSet<(Val, Val)> = res
            .final_outcomes
            .iter()
            .map(|o| (o[2], o[3]))
            .collect();
        assert_eq!(
            outcomes,
            BTreeSet::from([(0, 0), (0, 1), (1, 0), (1, 1)])
        );
    }

    #[test]
    fn bfs_and_dfs_agree_on_keys_and_verdicts() {
        let spec = parse(
            "init x = 0, y = 0;\nthread 1 { x := 1; y := x; }\nthread 2 { y := 2; }\n\
             assert always updonly(x) || last(x) == 1;",
        )
        .unwrap();
        let mut opts = ExploreOpts::new(6);
        opts.collect_keys = true;
        let bfs = explore(&spec, &opts);
        opts.mode = Mode::Dfs;
        let dfs = explore(&spec, &opts);
        assert_eq!(bfs.visited_keys, dfs.visited_keys);
        assert_eq!(bfs.violations.len(), dfs.violations.len());
        assert_eq!(bfs.final_outcomes, dfs.final_outcomes);
    }

    #[test]
    fn dedup_disabled_visits_superset_with_same_key_set() {
        let spec = parse("init x = 0, y = 0;\nthread 1 { x := 1; }\nthread 2 { y := 1; }")
            .unwrap();
        let mut opts = ExploreOpts::new(4);
        opts.collect_keys = true;
        let with = explore(&spec, &opts);
        opts.dedup = false;
        let without = explore(&spec, &opts);
        assert_eq!(with.visited_keys, without.visited_keys);
        assert!(without.transitions >= with.transitions);
    }
}
