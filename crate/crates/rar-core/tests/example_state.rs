//! The four-thread example state used throughout the unit tests of the
//! observation machinery: three initialisers plus six thread events, with
//! an update on x reading from a releasing write and an update on y
//! reading from the initialiser.
//!
//! Threads: 1: updRA(x,2,4); 2: wr(y,1), wrR(x,2); 3: wr(z,3), rdA(x,2);
//! 4: rd(z,3), updRA(y,0,5). Modification orders:
//! x: [init, wrR(x,2), updRA(x,2,4)], y: [init, updRA(y,0,5), wr(y,1)],
//! z: [init, wr(z,3)].

use rar_core::analysis::{Analysis, Relations};
use rar_core::assertions::{det_val, update_only};
use rar_core::axioms::{check_validity, check_weak_canonical};
use rar_core::candidates::CandidateExecution;
use rar_core::event::{Action, Event, Tag, VarId, VarTable};
use rar_core::state::C11State;

const X: VarId = VarId(0);
const Y: VarId = VarId(1);
const Z: VarId = VarId(2);

// tags
const INIT_X: Tag = Tag { tid: 0, idx: 0 };
const INIT_Y: Tag = Tag { tid: 0, idx: 1 };
const INIT_Z: Tag = Tag { tid: 0, idx: 2 };
const UPD_X: Tag = Tag { tid: 1, idx: 0 }; // upd^RA(x,2,4)
const WR_Y1: Tag = Tag { tid: 2, idx: 0 }; // wr(y,1)
const WR_X2: Tag = Tag { tid: 2, idx: 1 }; // wr^R(x,2)
const WR_Z3: Tag = Tag { tid: 3, idx: 0 }; // wr(z,3)
const RD_X2: Tag = Tag { tid: 3, idx: 1 }; // rd^A(x,2)
const RD_Z3: Tag = Tag { tid: 4, idx: 0 }; // rd(z,3)
const UPD_Y: Tag = Tag { tid: 4, idx: 1 }; // upd^RA(y,0,5)

pub fn example_state() -> (C11State, VarTable) {
    let events = vec![
        Event::new(INIT_X, Action::Write { var: X, val: 0, rel: false }),
        Event::new(INIT_Y, Action::Write { var: Y, val: 0, rel: false }),
        Event::new(INIT_Z, Action::Write { var: Z, val: 0, rel: false }),
        Event::new(UPD_X, Action::Update { var: X, rdval: 2, wrval: 4 }),
        Event::new(WR_Y1, Action::Write { var: Y, val: 1, rel: false }),
        Event::new(WR_X2, Action::Write { var: X, val: 2, rel: true }),
        Event::new(WR_Z3, Action::Write { var: Z, val: 3, rel: false }),
        Event::new(RD_X2, Action::Read { var: X, val: 2, acq: true }),
        Event::new(RD_Z3, Action::Read { var: Z, val: 3, acq: false }),
        Event::new(UPD_Y, Action::Update { var: Y, rdval: 0, wrval: 5 }),
    ];
    let state = C11State::from_tagged(
        events,
        &[
            (WR_X2, RD_X2),
            (WR_Z3, RD_Z3),
            (INIT_Y, UPD_Y),
            (WR_X2, UPD_X),
        ],
        &[
            (X, vec![INIT_X, WR_X2, UPD_X]),
            (Y, vec![INIT_Y, UPD_Y, WR_Y1]),
            (Z, vec![INIT_Z, WR_Z3]),
        ],
        3,
    )
    .unwrap();
    let vars = VarTable::from_names(["x".to_string(), "y".to_string(), "z".to_string()]);
    (state, vars)
}

fn tags(state: &C11State, set: &rar_core::rel::BitSet) -> Vec<Tag> {
    let mut out: Vec<Tag> = set.iter().map(|i| state.event(i as u32).tag).collect();
    out.sort();
    out
}

#[test]
fn state_shape() {
    let (state, _) = example_state();
    // 3 initialisers + 7 thread events
    assert_eq!(state.events.len(), 10);
    assert_eq!(state.thread_event_count(), 7);
    assert_eq!(state.rf.len(), 4);
}

#[test]
fn derived_relations_match_figure() {
    let (state, _) = example_state();
    let rels = Relations::of(&state);
    let idx = |t: Tag| state.index_of(t).unwrap() as usize;

    // the releasing write synchronises with the acquiring read
    assert!(rels.sw.contains(idx(WR_X2), idx(RD_X2)));
    // and with the update that reads from it
    assert!(rels.sw.contains(idx(WR_X2), idx(UPD_X)));
    // the relaxed rf on z does not synchronise
    assert!(!rels.sw.contains(idx(WR_Z3), idx(RD_Z3)));

    // the acquiring read is fixed before the update via fr
    assert!(rels.fr.contains(idx(RD_X2), idx(UPD_X)));
    // the update on y is fr-before the later write of y
    assert!(rels.fr.contains(idx(UPD_Y), idx(WR_Y1)));

    // eco closed form equals the transitive closure
    assert_eq!(rels.eco_closed_form(), rels.eco);
}

#[test]
fn encountered_writes_follow_the_formula() {
    let (state, _) = example_state();
    let a = Analysis::new(&state, &[1, 2, 3, 4]);

    // Thread 4 is aware of the z write it read and its own update.
    assert_eq!(
        tags(&state, &a.encountered_writes(4)),
        vec![INIT_X, INIT_Y, INIT_Z, WR_Z3, UPD_Y]
    );
    // Thread 2's own writes plus the y update mo-before its wr(y,1).
    assert_eq!(
        tags(&state, &a.encountered_writes(2)),
        vec![INIT_X, INIT_Y, INIT_Z, WR_Y1, WR_X2, UPD_Y]
    );
    // Thread 3 additionally picked up thread 2's history through sw.
    assert_eq!(
        tags(&state, &a.encountered_writes(3)),
        vec![INIT_X, INIT_Y, INIT_Z, WR_Y1, WR_X2, WR_Z3, UPD_Y]
    );
    // Thread 1's update reads from wr^R(x,2), whose thread had already
    // written y; the sb;sw path brings wr(y,1) (and hence the y-update)
    // into the encountered set.
    assert_eq!(
        tags(&state, &a.encountered_writes(1)),
        vec![INIT_X, INIT_Y, INIT_Z, UPD_X, WR_Y1, WR_X2, UPD_Y]
    );
}

#[test]
fn observable_writes_follow_the_formula() {
    let (state, _) = example_state();
    let a = Analysis::new(&state, &[1, 2, 3, 4]);

    assert_eq!(
        tags(&state, &a.observable_writes(3)),
        vec![UPD_X, WR_Y1, WR_X2, WR_Z3]
    );
    assert_eq!(
        tags(&state, &a.observable_writes(4)),
        vec![INIT_X, UPD_X, WR_Y1, WR_X2, WR_Z3, UPD_Y]
    );
    // Thread 2 may re-read its own releasing write: nothing it has
    // encountered succeeds wr^R(x,2) in mo.
    assert_eq!(
        tags(&state, &a.observable_writes(2)),
        vec![INIT_Z, UPD_X, WR_Y1, WR_X2, WR_Z3]
    );
    assert_eq!(
        tags(&state, &a.observable_writes(1)),
        vec![INIT_Z, UPD_X, WR_Y1, WR_Z3]
    );
}

#[test]
fn covered_writes_are_the_update_sources() {
    let (state, _) = example_state();
    let a = Analysis::new(&state, &[]);
    assert_eq!(tags(&state, a.covered_writes()), vec![INIT_Y, WR_X2]);
}

#[test]
fn last_writes_match_mo_maxima() {
    let (state, _) = example_state();
    assert_eq!(state.last_write(X).unwrap().tag, UPD_X);
    assert_eq!(state.last_write(Y).unwrap().tag, WR_Y1);
    assert_eq!(state.last_write(Z).unwrap().tag, WR_Z3);
}

#[test]
fn validity_and_weak_canonical_pass() {
    let (state, _) = example_state();
    let cand = CandidateExecution::from_state(&state);
    let validity = check_validity(&cand);
    assert!(validity.pass(), "{validity}");
    let weak = check_weak_canonical(&cand).unwrap();
    assert!(weak.pass(), "{weak}");
}

#[test]
fn y_is_not_update_only_but_z_modifications_are_writes() {
    let (state, _) = example_state();
    assert!(!update_only(&state, Y)); // wr(y,1) is a plain write
    assert!(!update_only(&state, X)); // wr^R(x,2) is a plain write
    assert!(!update_only(&state, Z));
}

#[test]
fn no_thread_holds_a_determinate_value_for_contested_variables() {
    let (state, _) = example_state();
    // x: thread 1 observes only the last write (its own update) and the
    // update is its own event, so x is determinate for thread 1
    assert_eq!(det_val(&state, 1, X), Some(4));
    // thread 3 can still observe upd(x) only — it encountered wr^R(x,2)
    // but not the update; OW(3)|x contains both wr^R and upd
    assert_eq!(det_val(&state, 3, X), None);
}
