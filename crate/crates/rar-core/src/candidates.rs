//! Candidate executions, their enumeration from litmus programs, and the
//! linearize/replay pipeline that exercises the soundness and completeness
//! theorems as executable oracles.

use crate::analysis::Relations;
use crate::ast::LitmusSpec;
use crate::axioms::check_validity;
use crate::event::{Event, Tag, Val};
use crate::explore::{pe_successors, Configuration};
use crate::rel::Rel;
use crate::state::C11State;
use crate::step::{command_template, ActionTemplate};
use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

/// A candidate execution `((D, sb), rf, mo)`: the same shape as a C11
/// state, but with sb stored explicitly and no reachability pedigree.
/// Events are kept sorted by tag, and sb/rf pair lists sorted, so equal
/// candidates compare structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CandidateExecution {
    pub events: Vec<Event>,
    pub sb: Vec<(u32, u32)>,
    pub rf: Vec<(u32, u32)>,
    /// Per-variable modification sequences (indexed by `VarId`).
    pub mo: Vec<Vec<u32>>,
}

impl CandidateExecution {
    /// View an operational state as a candidate, materialising its sb.
    pub fn from_state(state: &C11State) -> CandidateExecution {
        CandidateExecution {
            events: state.events.clone(),
            sb: state.sb_pairs(),
            rf: state.rf.clone(),
            mo: state.mo.clone(),
        }
    }

    pub fn relations(&self) -> Relations {
        let n = self.events.len();
        let mut sb = Rel::new(n);
        for &(a, b) in &self.sb {
            sb.insert(a as usize, b as usize);
        }
        Relations::compute(&self.events, &self.rf, &self.mo, sb)
    }

    pub fn index_of(&self, t: Tag) -> Option<u32> {
        self.events
            .binary_search_by_key(&t, |e| e.tag)
            .ok()
            .map(|i| i as u32)
    }

    /// Restriction to an event subset. Initialising writes are always
    /// kept: they belong to the initial state, not to the run.
    pub fn restrict(&self, keep: &HashSet<Tag>) -> CandidateExecution {
        let mut map = vec![None; self.events.len()];
        let mut events = Vec::new();
        for (i, e) in self.events.iter().enumerate() {
            if e.is_initial() || keep.contains(&e.tag) {
                map[i] = Some(events.len() as u32);
                events.push(*e);
            }
        }
        let remap = |pairs: &[(u32, u32)]| -> Vec<(u32, u32)> {
            let mut out: Vec<(u32, u32)> = pairs
                .iter()
                .filter_map(|&(a, b)| Some((map[a as usize]?, map[b as usize]?)))
                .collect();
            out.sort_unstable();
            out
        };
        CandidateExecution {
            events,
            sb: remap(&self.sb),
            rf: remap(&self.rf),
            mo: self
                .mo
                .iter()
                .map(|seq| seq.iter().filter_map(|&i| map[i as usize]).collect())
                .collect(),
        }
    }

    /// Convert to an operational state, dropping the explicit sb. Only
    /// meaningful when sb is the canonical tag order.
    pub fn to_state(&self) -> C11State {
        C11State {
            events: self.events.clone(),
            rf: self.rf.clone(),
            mo: self.mo.clone(),
        }
    }

    /// Final per-variable last-write valuation, for outcome comparison.
    pub fn outcome(&self) -> Vec<Option<Val>> {
        self.mo
            .iter()
            .map(|seq| seq.last().and_then(|&i| self.events[i as usize].wrval()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizeError {
    pub cycle: Vec<Tag>,
}

impl fmt::Display for LinearizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sb ∪ rf has a cycle:")?;
        for t in &self.cycle {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

impl std::error::Error for LinearizeError {}

/// Deterministic topological sort of `sb ∪ rf` over the non-initialising
/// events, ties broken by ascending `(tid, index)` tag. Initialising writes
/// are excluded; they are part of the initial state.
pub fn linearize(c: &CandidateExecution) -> Result<Vec<Event>, LinearizeError> {
    let n = c.events.len();
    let mut edges = Rel::new(n);
    for &(a, b) in c.sb.iter().chain(c.rf.iter()) {
        if !c.events[a as usize].is_initial() && !c.events[b as usize].is_initial() {
            edges.insert(a as usize, b as usize);
        }
    }
    let nodes: Vec<usize> = (0..n).filter(|&i| !c.events[i].is_initial()).collect();
    let mut indegree = vec![0usize; n];
    for &(_, b) in edges.pairs().iter() {
        indegree[b] += 1;
    }
    let mut order = Vec::with_capacity(nodes.len());
    let mut done = vec![false; n];
    while order.len() < nodes.len() {
        // smallest-tag available node; events are tag-sorted so index
        // order is tag order
        let next = nodes
            .iter()
            .copied()
            .find(|&i| !done[i] && indegree[i] == 0);
        let Some(i) = next else {
            // cycle among the remaining nodes
            let mut residue = Rel::new(n);
            for (a, b) in edges.pairs() {
                if !done[a] && !done[b] {
                    residue.insert(a, b);
                }
            }
            let cycle = residue
                .shortest_cycle()
                .unwrap_or_default()
                .into_iter()
                .map(|i| c.events[i].tag)
                .collect();
            return Err(LinearizeError { cycle });
        };
        done[i] = true;
        order.push(c.events[i]);
        for b in edges.row_iter(i) {
            indegree[b] -= 1;
        }
    }
    Ok(order)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayFailure {
    /// Index into the replayed order where no matching transition was
    /// enabled (or the state diverged from the candidate's restriction).
    pub index: usize,
    pub reason: String,
}

impl fmt::Display for ReplayFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "replay failed at event {}: {}", self.index, self.reason)
    }
}

impl std::error::Error for ReplayFailure {}

fn fail(index: usize, reason: impl Into<String>) -> ReplayFailure {
    ReplayFailure {
        index,
        reason: reason.into(),
    }
}

/// Drive the interpreted semantics along `order`, at each step taking the
/// unique transition whose event matches `order[i]` and whose observed
/// write matches the candidate's rf/mo. Succeeds iff every step is enabled
/// and each intermediate state equals the candidate restricted to the
/// events replayed so far. Expects `order` to be a linearization of the
/// candidate's `sb ∪ rf`.
pub fn replay(
    spec: &LitmusSpec,
    cand: &CandidateExecution,
    order: &[Event],
) -> Result<Vec<Configuration>, ReplayFailure> {
    let mut config = Configuration::initial(spec);
    let mut trace = vec![config.clone()];
    let mut replayed: HashSet<Tag> = HashSet::new();

    for (i, e) in order.iter().enumerate() {
        let t = e.tid();
        // consume pending silent steps of this thread
        let mut tau_budget = 10_000u32;
        let template = loop {
            let Some(cmd) = config.program.threads.get(&t) else {
                return Err(fail(i, format!("thread {t} does not exist")));
            };
            match command_template(cmd) {
                None => return Err(fail(i, format!("thread {t} has terminated"))),
                Some(ActionTemplate::Tau) => {
                    let (_, p2) = crate::step::apply_program_step(&config.program, t, 0)
                        .expect("tau step exists");
                    config.program = p2;
                    tau_budget -= 1;
                    if tau_budget == 0 {
                        return Err(fail(i, format!("thread {t} diverges silently")));
                    }
                }
                Some(tmpl) => break tmpl,
            }
        };

        // the program's next action must have the shape of the event
        let shape_ok = match (template, e.action) {
            (ActionTemplate::Rd { var, acq }, crate::event::Action::Read { var: v, acq: a, .. }) => {
                var == v && acq == a
            }
            (
                ActionTemplate::Wr { var, rel, val },
                crate::event::Action::Write { var: v, rel: r, val: n },
            ) => var == v && rel == r && val == n,
            (
                ActionTemplate::UpdRA { var, wrval },
                crate::event::Action::Update { var: v, wrval: n, .. },
            ) => var == v && wrval == n,
            _ => false,
        };
        if !shape_ok {
            return Err(fail(
                i,
                format!("program offers {template:?}, candidate expects {e:?}"),
            ));
        }

        // the observed write dictated by the candidate's rf/mo
        let e_idx = cand
            .index_of(e.tag)
            .ok_or_else(|| fail(i, format!("event {e:?} not in candidate")))?;
        let observed_tag = if e.action.is_read() {
            let src = cand
                .rf
                .iter()
                .find(|&&(_, r)| r == e_idx)
                .map(|&(w, _)| cand.events[w as usize].tag)
                .ok_or_else(|| fail(i, "read has no rf edge in candidate"))?;
            src
        } else {
            // mo predecessor among initialisers and already-replayed events
            let seq = &cand.mo[e.var().0 as usize];
            let pos = seq
                .iter()
                .position(|&j| j == e_idx)
                .ok_or_else(|| fail(i, "write missing from candidate mo"))?;
            seq[..pos]
                .iter()
                .rev()
                .map(|&j| cand.events[j as usize])
                .find(|w| w.is_initial() || replayed.contains(&w.tag))
                .map(|w| w.tag)
                .ok_or_else(|| fail(i, "write has no mo predecessor in restriction"))?
        };

        let chosen = e.rdval().unwrap_or(0);
        let (label, program2) = crate::step::apply_program_step(&config.program, t, chosen)
            .expect("non-tau template implies a step");
        let crate::step::StepLabel::Act(act) = label else {
            unreachable!("template was not tau");
        };
        if act != e.action {
            return Err(fail(i, format!("step emitted {act:?}, expected {:?}", e.action)));
        }

        let transitions = config.state.ra_step(t, &template);
        let matching = transitions
            .into_iter()
            .find(|tr| tr.observed.tag == observed_tag && tr.event.action == e.action);
        let Some(tr) = matching else {
            return Err(fail(
                i,
                format!("no enabled transition observes {observed_tag} for {e:?}"),
            ));
        };
        if tr.event.tag != e.tag {
            return Err(fail(
                i,
                format!("tag mismatch: stepped {}, candidate has {}", tr.event.tag, e.tag),
            ));
        }

        replayed.insert(e.tag);
        config = Configuration {
            program: program2,
            state: tr.next,
        };
        trace.push(config.clone());

        // σ_i must equal the candidate restricted to the replayed prefix
        let reached = CandidateExecution::from_state(&config.state);
        let expected = cand.restrict(&replayed);
        if reached != expected {
            return Err(fail(i, "intermediate state differs from restriction"));
        }
    }
    Ok(trace)
}

/// A candidate produced by enumeration, with a flag telling whether the
/// generating pre-execution ran the program to completion.
#[derive(Clone, Debug)]
pub struct EnumeratedCandidate {
    pub execution: CandidateExecution,
    pub complete: bool,
}

#[derive(Clone, Debug, Default)]
pub struct EnumerationOutcome {
    pub candidates: Vec<EnumeratedCandidate>,
    /// Set when some pre-execution at the event bound still had successors.
    pub truncated: bool,
    /// Distinct pre-executions considered.
    pub pre_executions: usize,
}

/// Enumerate the valid candidate executions of a litmus program: explore
/// pre-execution traces (reads draw values from the program's literal/init
/// domain), then for each distinct pre-execution enumerate every rf
/// assignment and every per-variable mo order with the initialiser first,
/// keeping exactly those passing [`check_validity`]. Candidates are
/// deduplicated by their canonical `(tid, index)` tagging.
pub fn enumerate_candidates(spec: &LitmusSpec, max_events: u32) -> EnumerationOutcome {
    let domain = spec.value_domain();
    let mut queue = VecDeque::new();
    let mut seen: HashSet<Configuration> = HashSet::new();
    // pre-execution states plus whether some run completed the program
    let mut pre_execs: BTreeMap<C11State, bool> = BTreeMap::new();
    let mut truncated = false;

    let initial = Configuration::initial(spec);
    seen.insert(initial.clone());
    queue.push_back(initial);

    while let Some(config) = queue.pop_front() {
        let complete = config.program.is_final();
        let entry = pre_execs.entry(config.state.clone()).or_insert(false);
        *entry = *entry || complete;

        for (_, next) in pe_successors(&config, &domain) {
            if next.state.thread_event_count() as u32 > max_events {
                truncated = true;
                continue;
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }

    let mut candidates = Vec::new();
    let n_pre = pre_execs.len();
    for (pre, complete) in pre_execs {
        enumerate_rf_mo(&pre, |cand| {
            if check_validity(cand).pass() {
                candidates.push(EnumeratedCandidate {
                    execution: cand.clone(),
                    complete,
                });
            }
        });
    }

    EnumerationOutcome {
        candidates,
        truncated,
        pre_executions: n_pre,
    }
}

/// Enumerate rf assignments and per-variable mo permutations over a fixed
/// event set, calling `f` with each combination.
fn enumerate_rf_mo(pre: &C11State, mut f: impl FnMut(&CandidateExecution)) {
    let events = &pre.events;
    let n = events.len();

    let reads: Vec<u32> = (0..n as u32)
        .filter(|&i| events[i as usize].action.is_read())
        .collect();
    // per read: candidate sources (same variable, matching value)
    let sources: Vec<Vec<u32>> = reads
        .iter()
        .map(|&r| {
            let re = &events[r as usize];
            (0..n as u32)
                .filter(|&w| {
                    let we = &events[w as usize];
                    we.action.is_write() && we.var() == re.var() && we.wrval() == re.rdval()
                })
                .collect()
        })
        .collect();
    if sources.iter().any(|s| s.is_empty()) {
        return; // some read can match no write: no RF-complete assignment
    }

    // per variable: the non-initialising modifications to permute
    let nvars = pre.mo.len();
    let mods: Vec<Vec<u32>> = (0..nvars)
        .map(|x| {
            (0..n as u32)
                .filter(|&i| {
                    let e = &events[i as usize];
                    e.action.is_write() && e.var().0 as usize == x && !e.is_initial()
                })
                .collect()
        })
        .collect();
    let init_of: Vec<Option<u32>> = (0..nvars)
        .map(|x| {
            (0..n as u32).find(|&i| {
                let e = &events[i as usize];
                e.is_initial() && e.var().0 as usize == x
            })
        })
        .collect();

    let mut cand = CandidateExecution {
        events: events.clone(),
        sb: pre.sb_pairs(),
        rf: Vec::new(),
        mo: vec![Vec::new(); nvars],
    };

    // iterate rf choices (mixed-radix counter over sources)
    let mut rf_choice = vec![0usize; reads.len()];
    loop {
        cand.rf.clear();
        for (k, &r) in reads.iter().enumerate() {
            cand.rf.push((sources[k][rf_choice[k]], r));
        }
        cand.rf.sort_unstable();

        // iterate mo permutations per variable
        let mut perms: Vec<Vec<Vec<u32>>> = Vec::with_capacity(nvars);
        for m in &mods {
            perms.push(permutations(m));
        }
        let mut mo_choice = vec![0usize; nvars];
        loop {
            for x in 0..nvars {
                let seq = &mut cand.mo[x];
                seq.clear();
                if let Some(init) = init_of[x] {
                    seq.push(init);
                }
                seq.extend_from_slice(&perms[x][mo_choice[x]]);
            }
            f(&cand);

            // advance mo counter
            let mut x = 0;
            loop {
                if x == nvars {
                    break;
                }
                mo_choice[x] += 1;
                if mo_choice[x] < perms[x].len() {
                    break;
                }
                mo_choice[x] = 0;
                x += 1;
            }
            if x == nvars {
                break;
            }
        }

        // advance rf counter
        let mut k = 0;
        loop {
            if k == reads.len() {
                return;
            }
            rf_choice[k] += 1;
            if rf_choice[k] < sources[k].len() {
                break;
            }
            rf_choice[k] = 0;
            k += 1;
        }
        if k == reads.len() {
            return;
        }
    }
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest: Vec<u32> = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}
