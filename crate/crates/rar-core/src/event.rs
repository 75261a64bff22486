//! Events: tagged, thread-attributed memory actions.

use std::fmt;

/// Values are bounded signed integers; booleans are encoded as 0/1.
pub type Val = i64;

/// Thread identifier. Thread 0 is reserved for initialising writes.
pub type Tid = u32;

/// Index of a shared variable in the owning [`VarTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u16);

/// Variable names, in declaration order. Initialising writes are tagged
/// `(0, i)` where `i` is the declaration index of the variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    pub fn new() -> Self {
        VarTable { names: Vec::new() }
    }

    pub fn from_names<I: IntoIterator<Item = String>>(names: I) -> Self {
        VarTable {
            names: names.into_iter().collect(),
        }
    }

    pub fn intern(&mut self, name: &str) -> VarId {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            VarId(i as u16)
        } else {
            self.names.push(name.to_string());
            VarId((self.names.len() - 1) as u16)
        }
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(|i| VarId(i as u16))
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (VarId(i as u16), n.as_str()))
    }
}

/// Globally unique event identity: thread id plus the event's position in
/// that thread's sequenced-before order. Tags are interleaving-independent,
/// so configuration deduplication is purely structural.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub tid: Tid,
    pub idx: u32,
}

impl Tag {
    pub fn new(tid: Tid, idx: u32) -> Self {
        Tag { tid, idx }
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tid, self.idx)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tid, self.idx)
    }
}

/// A concrete memory action. Updates carry both the value read (`rdval`)
/// and the value written (`wrval`); the update kind is always
/// release-acquire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Read { var: VarId, val: Val, acq: bool },
    Write { var: VarId, val: Val, rel: bool },
    Update { var: VarId, rdval: Val, wrval: Val },
}

impl Action {
    pub fn var(&self) -> VarId {
        match *self {
            Action::Read { var, .. } | Action::Write { var, .. } | Action::Update { var, .. } => {
                var
            }
        }
    }

    /// Value read; defined only for reads and updates.
    pub fn rdval(&self) -> Option<Val> {
        match *self {
            Action::Read { val, .. } => Some(val),
            Action::Update { rdval, .. } => Some(rdval),
            Action::Write { .. } => None,
        }
    }

    /// Value written; defined only for writes and updates.
    pub fn wrval(&self) -> Option<Val> {
        match *self {
            Action::Write { val, .. } => Some(val),
            Action::Update { wrval, .. } => Some(wrval),
            Action::Read { .. } => None,
        }
    }

    pub fn is_read(&self) -> bool {
        matches!(self, Action::Read { .. } | Action::Update { .. })
    }

    pub fn is_write(&self) -> bool {
        matches!(self, Action::Write { .. } | Action::Update { .. })
    }

    pub fn is_update(&self) -> bool {
        matches!(self, Action::Update { .. })
    }

    /// Acquiring read: `rd^A` or an update.
    pub fn is_acquire(&self) -> bool {
        match *self {
            Action::Read { acq, .. } => acq,
            Action::Update { .. } => true,
            Action::Write { .. } => false,
        }
    }

    /// Releasing write: `wr^R` or an update.
    pub fn is_release(&self) -> bool {
        match *self {
            Action::Write { rel, .. } => rel,
            Action::Update { .. } => true,
            Action::Read { .. } => false,
        }
    }

    /// Short action-kind mnemonic, also used by the JSON format.
    pub fn kind(&self) -> &'static str {
        match *self {
            Action::Read { acq: false, .. } => "rd",
            Action::Read { acq: true, .. } => "rdA",
            Action::Write { rel: false, .. } => "wr",
            Action::Write { rel: true, .. } => "wrR",
            Action::Update { .. } => "updRA",
        }
    }
}

/// A tagged, thread-attributed memory action.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub tag: Tag,
    pub action: Action,
}

impl Event {
    pub fn new(tag: Tag, action: Action) -> Self {
        Event { tag, action }
    }

    pub fn tid(&self) -> Tid {
        self.tag.tid
    }

    pub fn var(&self) -> VarId {
        self.action.var()
    }

    pub fn rdval(&self) -> Option<Val> {
        self.action.rdval()
    }

    pub fn wrval(&self) -> Option<Val> {
        self.action.wrval()
    }

    /// Initialising writes belong to the reserved thread 0.
    pub fn is_initial(&self) -> bool {
        self.tag.tid == 0
    }

    /// Render with variable names resolved, e.g. `wrR_2(x,2)`.
    pub fn display<'a>(&'a self, vars: &'a VarTable) -> EventDisplay<'a> {
        EventDisplay { event: self, vars }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            Action::Read { var, val, .. } => {
                write!(f, "{}_{}(v{},{})", self.action.kind(), self.tag, var.0, val)
            }
            Action::Write { var, val, .. } => {
                write!(f, "{}_{}(v{},{})", self.action.kind(), self.tag, var.0, val)
            }
            Action::Update { var, rdval, wrval } => write!(
                f,
                "{}_{}(v{},{},{})",
                self.action.kind(),
                self.tag,
                var.0,
                rdval,
                wrval
            ),
        }
    }
}

pub struct EventDisplay<'a> {
    event: &'a Event,
    vars: &'a VarTable,
}

impl fmt::Display for EventDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.event;
        let name = self.vars.name(e.var());
        match e.action {
            Action::Read { val, .. } | Action::Write { val, .. } => {
                write!(f, "{}_{}({},{})", e.action.kind(), e.tag, name, val)
            }
            Action::Update { rdval, wrval, .. } => {
                write!(f, "{}_{}({},{},{})", e.action.kind(), e.tag, name, rdval, wrval)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_is_both_acquire_and_release() {
        let u = Action::Update {
            var: VarId(0),
            rdval: 1,
            wrval: 2,
        };
        assert!(u.is_acquire() && u.is_release());
        assert!(u.is_read() && u.is_write() && u.is_update());
        assert_eq!(u.rdval(), Some(1));
        assert_eq!(u.wrval(), Some(2));
    }

    #[test]
    fn relaxed_accessors() {
        let r = Action::Read {
            var: VarId(1),
            val: 7,
            acq: false,
        };
        assert!(!r.is_acquire() && !r.is_release());
        assert_eq!(r.wrval(), None);
        let w = Action::Write {
            var: VarId(1),
            val: 7,
            rel: true,
        };
        assert!(w.is_release() && !w.is_acquire());
        assert_eq!(w.rdval(), None);
    }
}
