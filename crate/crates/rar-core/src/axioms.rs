//! The validity axioms and weak canonical RAR consistency, evaluated as
//! runtime oracles over candidate executions.

use crate::analysis::Relations;
use crate::candidates::CandidateExecution;
use crate::event::Tag;
use crate::rel::Rel;
use std::fmt;

/// Evidence for a failed axiom: the offending events (a single reflexive
/// element, a pair, or a minimal cycle) plus a short description. Witnesses
/// are deterministic: cycles are minimal-length (BFS) and pairs/events are
/// the first violating ones in tag order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub events: Vec<Tag>,
    pub detail: String,
}

impl Witness {
    fn new(events: Vec<Tag>, detail: impl Into<String>) -> Self {
        Witness {
            events,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.detail)?;
        if !self.events.is_empty() {
            write!(f, " [")?;
            for (i, t) in self.events.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl AxiomCheck {
    fn ok(name: &'static str) -> Self {
        AxiomCheck {
            name,
            pass: true,
            witness: None,
        }
    }

    fn fail(name: &'static str, w: Witness) -> Self {
        AxiomCheck {
            name,
            pass: false,
            witness: Some(w),
        }
    }
}

/// Per-axiom verdicts; the report passes iff all axioms pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn axiom(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{:<12} {}", c.name, if c.pass { "pass" } else { "FAIL" })?;
            if let Some(w) = &c.witness {
                write!(f, "  ({w})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn tag(c: &CandidateExecution, i: usize) -> Tag {
    c.events[i].tag
}

fn cycle_witness(c: &CandidateExecution, rel: &Rel, what: &str) -> Witness {
    match rel.shortest_cycle() {
        Some(cycle) => {
            let tags: Vec<Tag> = cycle.iter().map(|&i| tag(c, i)).collect();
            Witness::new(tags, format!("{what} cycle"))
        }
        None => Witness::new(Vec::new(), format!("{what} cycle")),
    }
}

fn check_sb_total(c: &CandidateExecution) -> AxiomCheck {
    const NAME: &str = "SB-Total";
    let n = c.events.len();
    let mut sb = Rel::new(n);
    for &(a, b) in &c.sb {
        sb.insert(a as usize, b as usize);
    }
    // sb relates events within a thread, or from thread 0 outward
    for &(a, b) in &c.sb {
        let (ea, eb) = (&c.events[a as usize], &c.events[b as usize]);
        if !(ea.tid() == 0 || ea.tid() == eb.tid()) {
            return AxiomCheck::fail(
                NAME,
                Witness::new(vec![ea.tag, eb.tag], "sb edge crosses threads"),
            );
        }
        if a == b {
            return AxiomCheck::fail(NAME, Witness::new(vec![ea.tag], "sb is reflexive"));
        }
    }
    // initialising writes precede all non-initialising events
    for a in 0..n {
        if !c.events[a].is_initial() {
            continue;
        }
        for b in 0..n {
            if c.events[b].is_initial() {
                continue;
            }
            if !sb.contains(a, b) {
                return AxiomCheck::fail(
                    NAME,
                    Witness::new(
                        vec![tag(c, a), tag(c, b)],
                        "initialising write not sb-before event",
                    ),
                );
            }
        }
    }
    // per-thread strict total order
    for a in 0..n {
        for b in 0..n {
            let (ea, eb) = (&c.events[a], &c.events[b]);
            if ea.tid() == 0 || ea.tid() != eb.tid() || a == b {
                continue;
            }
            match (sb.contains(a, b), sb.contains(b, a)) {
                (false, false) => {
                    return AxiomCheck::fail(
                        NAME,
                        Witness::new(vec![ea.tag, eb.tag], "same-thread events unordered"),
                    )
                }
                (true, true) => {
                    return AxiomCheck::fail(
                        NAME,
                        Witness::new(vec![ea.tag, eb.tag], "sb not antisymmetric"),
                    )
                }
                _ => {}
            }
        }
    }
    // a strict order: acyclic and transitively closed
    let closed = sb.closure();
    if !closed.is_irreflexive() {
        return AxiomCheck::fail(NAME, cycle_witness(c, &sb, "sb"));
    }
    for a in 0..n {
        for b in 0..n {
            if closed.contains(a, b) && !sb.contains(a, b) {
                return AxiomCheck::fail(
                    NAME,
                    Witness::new(vec![tag(c, a), tag(c, b)], "sb not transitive"),
                );
            }
        }
    }
    AxiomCheck::ok(NAME)
}

fn check_mo_valid(c: &CandidateExecution) -> AxiomCheck {
    const NAME: &str = "MO-Valid";
    let n = c.events.len();
    let mut in_seq = vec![false; n];
    for (var, seq) in c.mo.iter().enumerate() {
        for &i in seq {
            let e = &c.events[i as usize];
            if !e.action.is_write() || e.var().0 as usize != var {
                return AxiomCheck::fail(
                    NAME,
                    Witness::new(vec![e.tag], "mo entry is not a modification of its variable"),
                );
            }
            if in_seq[i as usize] {
                return AxiomCheck::fail(
                    NAME,
                    Witness::new(vec![e.tag], "event appears twice in mo"),
                );
            }
            in_seq[i as usize] = true;
        }
        // initialising writes come first
        let mut seen_non_init = None;
        for &i in seq {
            let e = &c.events[i as usize];
            if e.is_initial() {
                if let Some(prev) = seen_non_init {
                    return AxiomCheck::fail(
                        NAME,
                        Witness::new(
                            vec![tag(c, prev), e.tag],
                            "initialising write not mo-first",
                        ),
                    );
                }
            } else {
                seen_non_init.get_or_insert(i as usize);
            }
        }
    }
    // totality: every modification is ordered
    for (i, e) in c.events.iter().enumerate() {
        if e.action.is_write() && !in_seq[i] {
            return AxiomCheck::fail(
                NAME,
                Witness::new(vec![e.tag], "modification missing from mo"),
            );
        }
    }
    AxiomCheck::ok(NAME)
}

fn check_rf_complete(c: &CandidateExecution) -> AxiomCheck {
    const NAME: &str = "RF-Complete";
    for &(w, r) in &c.rf {
        let (ew, er) = (&c.events[w as usize], &c.events[r as usize]);
        if !ew.action.is_write()
            || !er.action.is_read()
            || ew.var() != er.var()
            || ew.wrval() != er.rdval()
        {
            return AxiomCheck::fail(
                NAME,
                Witness::new(vec![ew.tag, er.tag], "rf edge does not match write to read"),
            );
        }
    }
    for (i, e) in c.events.iter().enumerate() {
        if !e.action.is_read() {
            continue;
        }
        let indegree = c.rf.iter().filter(|&&(_, r)| r as usize == i).count();
        if indegree != 1 {
            return AxiomCheck::fail(
                NAME,
                Witness::new(vec![e.tag], format!("read has {indegree} rf edges")),
            );
        }
    }
    AxiomCheck::ok(NAME)
}

/// The five validity axioms, each evaluated exactly as defined.
pub fn check_validity(c: &CandidateExecution) -> AxiomReport {
    check_validity_with(c, &c.relations())
}

/// [`check_validity`] with the derived relations already at hand.
pub fn check_validity_with(c: &CandidateExecution, rels: &Relations) -> AxiomReport {
    let sb_total = check_sb_total(c);
    let mo_valid = check_mo_valid(c);
    let rf_complete = check_rf_complete(c);

    let sb_rf = rels.sb.union(&rels.rf);
    let no_thin_air = if sb_rf.closure().is_irreflexive() {
        AxiomCheck::ok("No-Thin-Air")
    } else {
        AxiomCheck::fail("No-Thin-Air", cycle_witness(c, &sb_rf, "sb ∪ rf"))
    };

    let hb_ecoq = rels.hb.compose(&rels.eco.reflexive());
    let coherence = if let Some(i) = hb_ecoq.first_reflexive() {
        AxiomCheck::fail(
            "Coherence",
            Witness::new(vec![tag(c, i)], "hb;eco? is reflexive"),
        )
    } else if let Some(i) = rels.eco.first_reflexive() {
        AxiomCheck::fail(
            "Coherence",
            Witness::new(vec![tag(c, i)], "eco is reflexive"),
        )
    } else {
        AxiomCheck::ok("Coherence")
    };

    AxiomReport {
        checks: vec![sb_total, mo_valid, rf_complete, no_thin_air, coherence],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotACandidate {
    pub failed: AxiomCheck,
}

impl fmt::Display for NotACandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a candidate execution: {} fails", self.failed.name)?;
        if let Some(w) = &self.failed.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

impl std::error::Error for NotACandidate {}

fn irrefl_check(c: &CandidateExecution, name: &'static str, rel: &Rel, what: &str) -> AxiomCheck {
    match rel.first_reflexive() {
        None => AxiomCheck::ok(name),
        Some(i) => AxiomCheck::fail(
            name,
            Witness::new(vec![tag(c, i)], format!("{what} is reflexive")),
        ),
    }
}

/// Weak canonical RAR consistency: HB, COH, RF, RFI and UPD, all stated as
/// irreflexivity conditions. Defined only for candidate executions
/// (SB-Total, MO-Valid and RF-Complete must hold).
pub fn check_weak_canonical(c: &CandidateExecution) -> Result<AxiomReport, NotACandidate> {
    for check in [check_sb_total(c), check_mo_valid(c), check_rf_complete(c)] {
        if !check.pass {
            return Err(NotACandidate { failed: check });
        }
    }
    let rels = c.relations();
    let Relations { rf, mo, hb, .. } = &rels;
    let rf_inv_q = rf.inverse().reflexive();
    let rf_q = rf.reflexive();

    let hb_check = irrefl_check(c, "HB", hb, "hb");
    let coh = irrefl_check(
        c,
        "COH",
        &rf_inv_q.compose(mo).compose(&rf_q).compose(hb),
        "(rf⁻¹)? ; mo ; rf? ; hb",
    );
    let rf_check = irrefl_check(c, "RF", &rf.compose(hb), "rf ; hb");
    let rfi = irrefl_check(c, "RFI", rf, "rf");
    let upd = irrefl_check(
        c,
        "UPD",
        &mo.compose(mo).compose(&rf.inverse()).union(&mo.compose(rf)),
        "(mo ; mo ; rf⁻¹) ∪ (mo ; rf)",
    );

    Ok(AxiomReport {
        checks: vec![hb_check, coh, rf_check, rfi, upd],
    })
}
