//! C11 states and the three event-semantics transition rules.
//!
//! A state is `((D, sb), rf, mo)`. Events carry `(tid, index)` tags where
//! the index is the event's position in its thread's sequenced-before
//! order, so sb needs no explicit storage here: initialising writes (thread
//! 0) precede all non-initialising events and are unordered amongst
//! themselves, and same-thread events are ordered by index. The event list
//! is kept sorted by tag, which makes states reached by different
//! interleavings of the same per-thread histories structurally equal.

use crate::analysis::Analysis;
use crate::ast::LitmusSpec;
use crate::event::{Action, Event, Tag, Tid, VarId};
use crate::step::ActionTemplate;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateError {
    DuplicateTag(Tag),
    VariableMismatch { w: Tag, e: Tag },
    NotInMo(Tag),
    AlreadyInMo(Tag),
    UnknownVariable(VarId),
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::DuplicateTag(t) => write!(f, "event tag {t} already present"),
            StateError::VariableMismatch { w, e } => {
                write!(f, "events {w} and {e} modify different variables")
            }
            StateError::NotInMo(t) => write!(f, "event {t} is not in the modification order"),
            StateError::AlreadyInMo(t) => write!(f, "event {t} is already in the modification order"),
            StateError::UnknownVariable(v) => write!(f, "variable #{} is not declared", v.0),
        }
    }
}

impl std::error::Error for StateError {}

/// An interpreted C11 state. `rf` pairs are `(write, read)` event indices;
/// `mo` holds one index sequence per variable, headed by the variable's
/// initialising write.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct C11State {
    pub events: Vec<Event>,
    pub rf: Vec<(u32, u32)>,
    pub mo: Vec<Vec<u32>>,
}

impl C11State {
    /// The initial state: one initialising write per declared variable,
    /// tagged `(0, declaration-index)`; rf and mo-order are empty (each mo
    /// sequence is a singleton, so it contains no pairs).
    pub fn initial(spec: &LitmusSpec) -> C11State {
        let events: Vec<Event> = spec
            .init
            .iter()
            .enumerate()
            .map(|(i, &val)| {
                Event::new(
                    Tag::new(0, i as u32),
                    Action::Write {
                        var: VarId(i as u16),
                        val,
                        rel: false,
                    },
                )
            })
            .collect();
        let mo = (0..events.len()).map(|i| vec![i as u32]).collect();
        C11State {
            events,
            rf: Vec::new(),
            mo,
        }
    }

    /// Build a state from events in arbitrary order with rf and mo given by
    /// tags; events are sorted by tag and indices remapped.
    pub fn from_tagged(
        events: Vec<Event>,
        rf: &[(Tag, Tag)],
        mo: &[(VarId, Vec<Tag>)],
        nvars: usize,
    ) -> Result<C11State, StateError> {
        let mut sorted = events;
        sorted.sort_by_key(|e| e.tag);
        for w in sorted.windows(2) {
            if w[0].tag == w[1].tag {
                return Err(StateError::DuplicateTag(w[0].tag));
            }
        }
        let index_of = |t: Tag| -> Result<u32, StateError> {
            sorted
                .binary_search_by_key(&t, |e| e.tag)
                .map(|i| i as u32)
                .map_err(|_| StateError::NotInMo(t))
        };
        let mut rf_idx = Vec::with_capacity(rf.len());
        for &(w, r) in rf {
            rf_idx.push((index_of(w)?, index_of(r)?));
        }
        rf_idx.sort_unstable();
        let mut mo_idx = vec![Vec::new(); nvars];
        for (var, seq) in mo {
            let mut s = Vec::with_capacity(seq.len());
            for &t in seq {
                s.push(index_of(t)?);
            }
            mo_idx[var.0 as usize] = s;
        }
        Ok(C11State {
            events: sorted,
            rf: rf_idx,
            mo: mo_idx,
        })
    }

    pub fn index_of(&self, tag: Tag) -> Option<u32> {
        self.events
            .binary_search_by_key(&tag, |e| e.tag)
            .ok()
            .map(|i| i as u32)
    }

    pub fn event(&self, idx: u32) -> &Event {
        &self.events[idx as usize]
    }

    /// Number of non-initialising events.
    pub fn thread_event_count(&self) -> usize {
        self.events.iter().filter(|e| !e.is_initial()).count()
    }

    /// Next per-thread sb index for `tid`.
    pub fn next_index(&self, tid: Tid) -> u32 {
        self.events.iter().filter(|e| e.tid() == tid).count() as u32
    }

    /// Sequenced-before as derived from tags: initialising writes precede
    /// every non-initialising event and are unordered amongst themselves;
    /// same-thread events are ordered by index.
    pub fn sb_contains(&self, a: u32, b: u32) -> bool {
        let ea = self.event(a);
        let eb = self.event(b);
        (ea.is_initial() && !eb.is_initial())
            || (!ea.is_initial() && ea.tid() == eb.tid() && ea.tag.idx < eb.tag.idx)
    }

    pub fn sb_pairs(&self) -> Vec<(u32, u32)> {
        let n = self.events.len() as u32;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.sb_contains(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Insert an event keeping the tag order; all stored indices at or
    /// beyond the insertion point shift by one. Returns the new index.
    fn insert_event(&mut self, e: Event) -> Result<u32, StateError> {
        if self.index_of(e.tag).is_some() {
            return Err(StateError::DuplicateTag(e.tag));
        }
        let pos = self.events.partition_point(|x| x.tag < e.tag) as u32;
        self.events.insert(pos as usize, e);
        for (w, r) in self.rf.iter_mut() {
            if *w >= pos {
                *w += 1;
            }
            if *r >= pos {
                *r += 1;
            }
        }
        for seq in self.mo.iter_mut() {
            for i in seq.iter_mut() {
                if *i >= pos {
                    *i += 1;
                }
            }
        }
        Ok(pos)
    }

    fn add_rf(&mut self, w: u32, r: u32) {
        let pos = self.rf.partition_point(|&p| p < (w, r));
        self.rf.insert(pos, (w, r));
    }

    /// Pre-execution insertion: add the event to `(D, sb)` with no rf/mo
    /// bookkeeping. Panics on a duplicate tag.
    pub fn pe_insert(&mut self, e: Event) {
        self.insert_event(e).expect("fresh tag");
    }

    /// The mo-maximal modification of `x`; well-defined in any valid state.
    pub fn last_write(&self, x: VarId) -> Result<&Event, StateError> {
        let seq = self
            .mo
            .get(x.0 as usize)
            .ok_or(StateError::UnknownVariable(x))?;
        let idx = seq.last().ok_or(StateError::UnknownVariable(x))?;
        Ok(self.event(*idx))
    }

    pub fn last_write_index(&self, x: VarId) -> Option<u32> {
        self.mo.get(x.0 as usize)?.last().copied()
    }

    /// Insert modification `e_idx` directly after `w_idx` in the
    /// per-variable order: `mo' = mo ∪ (mo_⇓w × {e}) ∪ ({e} × mo[w])`.
    pub fn mo_insert(&mut self, w_idx: u32, e_idx: u32) -> Result<(), StateError> {
        let w = *self.event(w_idx);
        let e = *self.event(e_idx);
        if w.var() != e.var() {
            return Err(StateError::VariableMismatch { w: w.tag, e: e.tag });
        }
        let seq = &mut self.mo[w.var().0 as usize];
        if seq.contains(&e_idx) {
            return Err(StateError::AlreadyInMo(e.tag));
        }
        let pos = seq
            .iter()
            .position(|&i| i == w_idx)
            .ok_or(StateError::NotInMo(w.tag))?;
        seq.insert(pos + 1, e_idx);
        Ok(())
    }

    /// All enabled event-semantics transitions of thread `tid` for an
    /// action template, one per admissible observed write, ordered by the
    /// observed write's tag. An empty result means the action is disabled.
    pub fn ra_step(&self, tid: Tid, template: &ActionTemplate) -> Vec<RaTransition> {
        let analysis = Analysis::new(self, &[tid]);
        self.ra_step_with(&analysis, tid, template)
    }

    /// Like [`C11State::ra_step`] but reusing a precomputed analysis of
    /// this state.
    pub fn ra_step_with(
        &self,
        analysis: &Analysis,
        tid: Tid,
        template: &ActionTemplate,
    ) -> Vec<RaTransition> {
        let (var, needs_uncovered) = match *template {
            ActionTemplate::Rd { var, .. } => (var, false),
            ActionTemplate::Wr { var, .. } => (var, true),
            ActionTemplate::UpdRA { var, .. } => (var, true),
            ActionTemplate::Tau => return Vec::new(),
        };
        let ow = analysis.observable_writes(tid);
        let mut candidates: Vec<u32> = ow
            .iter()
            .filter(|&i| {
                self.event(i as u32).var() == var
                    && !(needs_uncovered && analysis.covered.contains(i))
            })
            .map(|i| i as u32)
            .collect();
        candidates.sort_by_key(|&i| self.event(i).tag);

        let tag = Tag::new(tid, self.next_index(tid));
        let mut out = Vec::new();
        for w_idx in candidates {
            let w = *self.event(w_idx);
            let action = match *template {
                ActionTemplate::Rd { var, acq } => Action::Read {
                    var,
                    val: w.wrval().expect("observed event is a write"),
                    acq,
                },
                ActionTemplate::Wr { var, rel, val } => Action::Write { var, val, rel },
                ActionTemplate::UpdRA { var, wrval } => Action::Update {
                    var,
                    rdval: w.wrval().expect("observed event is a write"),
                    wrval,
                },
                ActionTemplate::Tau => unreachable!(),
            };
            let e = Event::new(tag, action);
            let mut next = self.clone();
            let e_idx = next.insert_event(e).expect("fresh tag");
            let w_new = if w_idx >= e_idx { w_idx + 1 } else { w_idx };
            if action.is_read() {
                next.add_rf(w_new, e_idx);
            }
            if action.is_write() {
                next.mo_insert(w_new, e_idx).expect("same variable, fresh event");
            }
            out.push(RaTransition {
                observed: w,
                event: e,
                next,
            });
        }
        out
    }
}

/// One event-semantics transition: the observed write, the fresh event and
/// the successor state.
#[derive(Clone, Debug)]
pub struct RaTransition {
    pub observed: Event,
    pub event: Event,
    pub next: C11State,
}

/// A pre-execution state `(D, sb)` with sb stored explicitly, extended with
/// the `+` operator of the event semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreExecution {
    pub events: Vec<Event>,
    pub sb: Vec<(u32, u32)>,
}

impl PreExecution {
    pub fn new(events: Vec<Event>, sb: Vec<(u32, u32)>) -> Self {
        PreExecution { events, sb }
    }

    /// `(D, sb) + e`: adds `e` with sb edges from every event of `e`'s
    /// thread and every initialising write.
    pub fn extend(&self, e: Event) -> Result<PreExecution, StateError> {
        if self.events.iter().any(|x| x.tag == e.tag) {
            return Err(StateError::DuplicateTag(e.tag));
        }
        let mut next = self.clone();
        let idx = next.events.len() as u32;
        for (i, old) in next.events.iter().enumerate() {
            if old.tid() == e.tid() || old.tid() == 0 {
                next.sb.push((i as u32, idx));
            }
        }
        next.events.push(e);
        next.sb.sort_unstable();
        Ok(next)
    }
}
