//! Derived relations and the thread-observation machinery.
//!
//! `Relations` holds the exact derived orders of a state: sw, hb, fr and
//! eco, all computed by closure with no approximation. `Analysis` builds on
//! top of them: encountered/observable/covered writes, happens-before
//! cones, last modifications and the determinate-value table, shared by the
//! explorer, the assertion calculus and the rule audit.

use crate::event::{Tid, Val, VarId};
use crate::rel::{BitSet, Rel};
use crate::state::C11State;

/// sw, hb, fr and eco of a state:
/// `sw = rf ∩ (Wr_R × Rd_A)`, `hb = (sb ∪ sw)⁺`,
/// `fr = (rf⁻¹ ; mo) \ Id`, `eco = (fr ∪ mo ∪ rf)⁺`.
#[derive(Clone, Debug)]
pub struct Relations {
    pub sb: Rel,
    pub rf: Rel,
    pub mo: Rel,
    pub sw: Rel,
    pub hb: Rel,
    pub fr: Rel,
    pub eco: Rel,
}

impl Relations {
    pub fn of(state: &C11State) -> Relations {
        let n = state.events.len();
        let mut sb = Rel::new(n);
        for a in 0..n as u32 {
            for b in 0..n as u32 {
                if state.sb_contains(a, b) {
                    sb.insert(a as usize, b as usize);
                }
            }
        }
        Self::compute(&state.events, &state.rf, &state.mo, sb)
    }

    /// Build from raw parts; `sb` may be any relation (candidate executions
    /// carry one explicitly).
    pub fn compute(
        events: &[crate::event::Event],
        rf_pairs: &[(u32, u32)],
        mo_seqs: &[Vec<u32>],
        sb: Rel,
    ) -> Relations {
        let n = events.len();
        let mut rf = Rel::new(n);
        let mut sw = Rel::new(n);
        for &(w, r) in rf_pairs {
            rf.insert(w as usize, r as usize);
            if events[w as usize].action.is_release() && events[r as usize].action.is_acquire() {
                sw.insert(w as usize, r as usize);
            }
        }
        let mut mo = Rel::new(n);
        for seq in mo_seqs {
            for i in 0..seq.len() {
                for j in i + 1..seq.len() {
                    mo.insert(seq[i] as usize, seq[j] as usize);
                }
            }
        }
        let hb = sb.union(&sw).closure();
        let mut fr = rf.inverse().compose(&mo);
        if !fr.is_irreflexive() {
            // updates can induce reflexive edges; fr subtracts identity
            let mut without = Rel::new(n);
            for (a, b) in fr.pairs() {
                if a != b {
                    without.insert(a, b);
                }
            }
            fr = without;
        }
        let eco = fr.union(&mo).union(&rf).closure();
        Relations {
            sb,
            rf,
            mo,
            sw,
            hb,
            fr,
            eco,
        }
    }

    /// The closed form `rf ∪ mo ∪ fr ∪ (mo;rf) ∪ (fr;rf)`; equals `eco`
    /// whenever updates read from their immediate mo predecessors.
    pub fn eco_closed_form(&self) -> Rel {
        self.rf
            .union(&self.mo)
            .union(&self.fr)
            .union(&self.mo.compose(&self.rf))
            .union(&self.fr.compose(&self.rf))
    }
}

/// Per-state caches for the observation machinery. Thread tables cover the
/// threads passed to [`Analysis::new`] plus every thread with an event.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub rels: Relations,
    pub n: usize,
    pub writes: BitSet,
    pub updates: BitSet,
    pub initials: BitSet,
    pub by_var: Vec<BitSet>,
    pub covered: BitSet,
    /// Mo-maximal modification per variable.
    pub last: Vec<Option<u32>>,
    /// Value written by the mo-maximal modification per variable.
    pub last_vals: Vec<Option<Val>>,
    threads: Vec<Tid>,
    encountered: Vec<BitSet>,
    observable: Vec<BitSet>,
    hb_cone: Vec<BitSet>,
    /// `det[t][x]`: the determinate value of `x` for thread `t`, if any.
    det: Vec<Vec<Option<Val>>>,
    /// Determinate values for threads with no events (cone = initialisers).
    det_untracked: Vec<Option<Val>>,
}

impl Analysis {
    pub fn new(state: &C11State, extra_threads: &[Tid]) -> Analysis {
        Self::with_relations(state, Relations::of(state), extra_threads)
    }

    pub fn with_relations(
        state: &C11State,
        rels: Relations,
        extra_threads: &[Tid],
    ) -> Analysis {
        let n = state.events.len();
        let nvars = state.mo.len();

        let mut writes = BitSet::new(n);
        let mut updates = BitSet::new(n);
        let mut initials = BitSet::new(n);
        let mut by_var = vec![BitSet::new(n); nvars];
        for (i, e) in state.events.iter().enumerate() {
            if e.action.is_write() {
                writes.insert(i);
            }
            if e.action.is_update() {
                updates.insert(i);
            }
            if e.is_initial() {
                initials.insert(i);
            }
            if (e.var().0 as usize) < nvars {
                by_var[e.var().0 as usize].insert(i);
            }
        }

        let mut covered = BitSet::new(n);
        for &(w, r) in &state.rf {
            if state.event(r).action.is_update() {
                covered.insert(w as usize);
            }
        }

        let last: Vec<Option<u32>> = state.mo.iter().map(|seq| seq.last().copied()).collect();
        let last_vals: Vec<Option<Val>> = last
            .iter()
            .map(|l| l.and_then(|i| state.event(i).wrval()))
            .collect();

        let mut threads: Vec<Tid> = state
            .events
            .iter()
            .map(|e| e.tid())
            .filter(|&t| t != 0)
            .chain(extra_threads.iter().copied())
            .collect();
        threads.sort_unstable();
        threads.dedup();

        let thread_events: Vec<BitSet> = threads
            .iter()
            .map(|&t| {
                let mut s = BitSet::new(n);
                for (i, e) in state.events.iter().enumerate() {
                    if e.tid() == t {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();

        // EW(t) = { w ∈ Wr | ∃e. tid(e) = t ∧ (w, e) ∈ eco? ; hb? }
        let reach = rels.eco.reflexive().compose(&rels.hb.reflexive());
        let encountered: Vec<BitSet> = thread_events
            .iter()
            .map(|tmask| {
                let mut s = BitSet::new(n);
                for w in writes.iter() {
                    if reach.row_set(w).intersects(tmask) {
                        s.insert(w);
                    }
                }
                s
            })
            .collect();

        // OW(t) = { w ∈ Wr | ∀w' ∈ EW(t). (w, w') ∉ mo }
        let observable: Vec<BitSet> = encountered
            .iter()
            .map(|ew| {
                let mut s = BitSet::new(n);
                for w in writes.iter() {
                    if !rels.mo.row_set(w).intersects(ew) {
                        s.insert(w);
                    }
                }
                s
            })
            .collect();

        // hbc(t) = I ∪ { e | ∃e'. tid(e') = t ∧ (e, e') ∈ hb? }
        let hbq = rels.hb.reflexive();
        let hb_cone: Vec<BitSet> = thread_events
            .iter()
            .map(|tmask| {
                let mut s = initials.clone();
                for e in 0..n {
                    if hbq.row_set(e).intersects(tmask) {
                        s.insert(e);
                    }
                }
                s
            })
            .collect();

        let det: Vec<Vec<Option<Val>>> = (0..threads.len())
            .map(|ti| {
                (0..nvars)
                    .map(|x| {
                        let last_x = last[x]?;
                        // (1) OW(t)|x = { last(x) }
                        let mut seen_last = false;
                        for w in observable[ti].iter() {
                            if !by_var[x].contains(w) {
                                continue;
                            }
                            if w as u32 != last_x {
                                return None;
                            }
                            seen_last = true;
                        }
                        if !seen_last {
                            return None;
                        }
                        // (3) last(x) ∈ hbc(t)
                        if !hb_cone[ti].contains(last_x as usize) {
                            return None;
                        }
                        // (2) v = wrval(last(x))
                        state.event(last_x).wrval()
                    })
                    .collect()
            })
            .collect();

        // For a thread with no events every write is observable and the
        // happens-before cone is just the initialisers.
        let det_untracked: Vec<Option<Val>> = (0..nvars)
            .map(|x| {
                let last_x = last[x]?;
                for w in writes.iter() {
                    if by_var[x].contains(w) && w as u32 != last_x {
                        return None;
                    }
                }
                if !initials.contains(last_x as usize) {
                    return None;
                }
                state.event(last_x).wrval()
            })
            .collect();

        Analysis {
            rels,
            n,
            writes,
            updates,
            initials,
            by_var,
            covered,
            last,
            last_vals,
            threads,
            encountered,
            observable,
            hb_cone,
            det,
            det_untracked,
        }
    }

    fn thread_slot(&self, t: Tid) -> Option<usize> {
        self.threads.binary_search(&t).ok()
    }

    /// Writes thread `t` is aware of; empty for a thread with no events.
    pub fn encountered_writes(&self, t: Tid) -> BitSet {
        match self.thread_slot(t) {
            Some(i) => self.encountered[i].clone(),
            None => BitSet::new(self.n),
        }
    }

    /// Writes thread `t` may still read: not mo-before any encountered
    /// write. For a thread with no events this is every write.
    pub fn observable_writes(&self, t: Tid) -> BitSet {
        match self.thread_slot(t) {
            Some(i) => self.observable[i].clone(),
            None => self.writes.clone(),
        }
    }

    /// Writes read by some update.
    pub fn covered_writes(&self) -> &BitSet {
        &self.covered
    }

    /// Happens-before cone of `t`: initialisers, events of `t`, and events
    /// hb-before an event of `t`.
    pub fn hb_cone(&self, t: Tid) -> BitSet {
        match self.thread_slot(t) {
            Some(i) => self.hb_cone[i].clone(),
            None => self.initials.clone(),
        }
    }

    /// Determinate value of `x` for thread `t`: `Some(wrval(last(x)))` iff
    /// `OW(t)|x = {last(x)}` and `last(x)` is in `t`'s happens-before cone.
    pub fn det_val(&self, t: Tid, x: VarId) -> Option<Val> {
        match self.thread_slot(t) {
            Some(i) => self.det[i][x.0 as usize],
            None => self.det_untracked[x.0 as usize],
        }
    }

    /// Value written by the mo-maximal modification of `x`.
    pub fn last_val(&self, x: VarId) -> Option<Val> {
        self.last_vals[x.0 as usize]
    }

    /// Variable-order assertion: `(last(x), last(y)) ∈ hb`.
    pub fn var_ord(&self, x: VarId, y: VarId) -> bool {
        match (self.last[x.0 as usize], self.last[y.0 as usize]) {
            (Some(a), Some(b)) => self.rels.hb.contains(a as usize, b as usize),
            _ => false,
        }
    }

    /// Every modification of `x` is an update or an initialising write.
    pub fn update_only(&self, x: VarId) -> bool {
        self.by_var[x.0 as usize].iter().all(|i| {
            !self.writes.contains(i) || self.updates.contains(i) || self.initials.contains(i)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::LitmusSpec;
    use crate::parse::parse;

    fn mp_spec() -> LitmusSpec {
        parse(
            "init f = 0, d = 0;\nthread 1 { d := 5; f :=[rel] 1; }\nthread 2 { while (!acq(f)) { } }",
        )
        .unwrap()
    }

    #[test]
    fn initial_state_relations_are_empty() {
        let spec = mp_spec();
        let st = C11State::initial(&spec);
        let rels = Relations::of(&st);
        assert!(rels.sw.is_empty());
        assert!(rels.hb.is_empty());
        assert!(rels.fr.is_empty());
        assert!(rels.eco.is_empty());
        assert!(rels.eco_closed_form().is_empty());
    }

    #[test]
    fn initial_observation_sets() {
        let spec = mp_spec();
        let st = C11State::initial(&spec);
        let a = Analysis::new(&st, &[1, 2]);
        // no thread has executed anything: EW empty, OW all initialisers
        assert!(a.encountered_writes(1).is_empty());
        assert_eq!(a.observable_writes(2).count(), 2);
        assert!(a.covered_writes().is_empty());
        // Init rule: every variable has its initial determinate value
        assert_eq!(a.det_val(1, VarId(0)), Some(0));
        assert_eq!(a.det_val(2, VarId(1)), Some(0));
        assert!(!a.var_ord(VarId(0), VarId(1)));
        assert!(a.update_only(VarId(0)));
    }
}
