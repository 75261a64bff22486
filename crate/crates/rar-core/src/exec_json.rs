//! JSON interchange format for executions: events as
//! `{tag: [tid, idx], kind, var, rdval?, wrval?}`, sb/rf as arrays of tag
//! pairs, mo as per-variable tag sequences. Export is deterministic, so
//! export → import → export is byte-identical.

use crate::candidates::CandidateExecution;
use crate::event::{Action, Event, Tag, Val, VarId, VarTable};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct JsonFormatError(pub String);

impl fmt::Display for JsonFormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for JsonFormatError {}

fn err(msg: impl Into<String>) -> JsonFormatError {
    JsonFormatError(msg.into())
}

#[derive(Serialize, Deserialize)]
struct JsonEvent {
    tag: [u32; 2],
    kind: String,
    var: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rdval: Option<Val>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wrval: Option<Val>,
}

#[derive(Serialize, Deserialize)]
struct JsonExecution {
    events: Vec<JsonEvent>,
    sb: Vec<[[u32; 2]; 2]>,
    rf: Vec<[[u32; 2]; 2]>,
    mo: BTreeMap<String, Vec<[u32; 2]>>,
}

/// Serialize an execution with its variable names.
pub fn to_json(c: &CandidateExecution, vars: &VarTable) -> String {
    let events = c
        .events
        .iter()
        .map(|e| {
            let (rdval, wrval) = match e.action {
                Action::Read { val, .. } => (Some(val), None),
                Action::Write { val, .. } => (None, Some(val)),
                Action::Update { rdval, wrval, .. } => (Some(rdval), Some(wrval)),
            };
            JsonEvent {
                tag: [e.tag.tid, e.tag.idx],
                kind: e.action.kind().to_string(),
                var: vars.name(e.var()).to_string(),
                rdval,
                wrval,
            }
        })
        .collect();
    let pair = |&(a, b): &(u32, u32)| {
        let (ea, eb) = (&c.events[a as usize], &c.events[b as usize]);
        [[ea.tag.tid, ea.tag.idx], [eb.tag.tid, eb.tag.idx]]
    };
    let mut mo = BTreeMap::new();
    for (x, seq) in c.mo.iter().enumerate() {
        if seq.is_empty() && x >= vars.len() {
            continue;
        }
        let name = vars.name(VarId(x as u16)).to_string();
        let tags: Vec<[u32; 2]> = seq
            .iter()
            .map(|&i| {
                let e = &c.events[i as usize];
                [e.tag.tid, e.tag.idx]
            })
            .collect();
        mo.insert(name, tags);
    }
    let doc = JsonExecution {
        events,
        sb: c.sb.iter().map(pair).collect(),
        rf: c.rf.iter().map(pair).collect(),
        mo,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

/// Parse an execution, returning it together with its variable table
/// (variables are numbered by first appearance in tag order).
pub fn from_json(text: &str) -> Result<(CandidateExecution, VarTable), JsonFormatError> {
    let doc: JsonExecution =
        serde_json::from_str(text).map_err(|e| err(format!("malformed execution JSON: {e}")))?;

    let mut parsed: Vec<(Tag, String, Action)> = Vec::with_capacity(doc.events.len());
    let mut vars = VarTable::new();
    // events sorted by tag determine variable numbering
    let mut sorted_events = doc.events;
    sorted_events.sort_by_key(|e| (e.tag[0], e.tag[1]));
    for e in &sorted_events {
        vars.intern(&e.var);
    }
    for e in &sorted_events {
        let tag = Tag::new(e.tag[0], e.tag[1]);
        let var = vars.lookup(&e.var).unwrap();
        let action = match e.kind.as_str() {
            "rd" | "rdA" => Action::Read {
                var,
                val: e
                    .rdval
                    .ok_or_else(|| err(format!("event {tag}: read without rdval")))?,
                acq: e.kind == "rdA",
            },
            "wr" | "wrR" => Action::Write {
                var,
                val: e
                    .wrval
                    .ok_or_else(|| err(format!("event {tag}: write without wrval")))?,
                rel: e.kind == "wrR",
            },
            "updRA" => Action::Update {
                var,
                rdval: e
                    .rdval
                    .ok_or_else(|| err(format!("event {tag}: update without rdval")))?,
                wrval: e
                    .wrval
                    .ok_or_else(|| err(format!("event {tag}: update without wrval")))?,
            },
            other => return Err(err(format!("event {tag}: unknown kind `{other}`"))),
        };
        parsed.push((tag, e.var.clone(), action));
    }
    for w in parsed.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(err(format!("duplicate tag {}", w[0].0)));
        }
    }
    let events: Vec<Event> = parsed
        .iter()
        .map(|(tag, _, action)| Event::new(*tag, *action))
        .collect();
    let index_of = |t: [u32; 2]| -> Result<u32, JsonFormatError> {
        let tag = Tag::new(t[0], t[1]);
        events
            .binary_search_by_key(&tag, |e| e.tag)
            .map(|i| i as u32)
            .map_err(|_| err(format!("unknown event tag {tag}")))
    };
    let mut sb = Vec::with_capacity(doc.sb.len());
    for p in &doc.sb {
        sb.push((index_of(p[0])?, index_of(p[1])?));
    }
    sb.sort_unstable();
    sb.dedup();
    let mut rf = Vec::with_capacity(doc.rf.len());
    for p in &doc.rf {
        rf.push((index_of(p[0])?, index_of(p[1])?));
    }
    rf.sort_unstable();
    rf.dedup();
    let mut mo = vec![Vec::new(); vars.len()];
    for (name, seq) in &doc.mo {
        let var = vars
            .lookup(name)
            .ok_or_else(|| err(format!("mo names unknown variable `{name}`")))?;
        let mut s = Vec::with_capacity(seq.len());
        for t in seq {
            s.push(index_of(*t)?);
        }
        mo[var.0 as usize] = s;
    }
    Ok((CandidateExecution { events, sb, rf, mo }, vars))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let text = r#"{
  "events": [
    {"tag": [0,0], "kind": "wr", "var": "x", "wrval": 0},
    {"tag": [1,0], "kind": "rdA", "var": "x", "rdval": 0},
    {"tag": [2,0], "kind": "updRA", "var": "x", "rdval": 0, "wrval": 3}
  ],
  "sb": [[[0,0],[1,0]], [[0,0],[2,0]]],
  "rf": [[[0,0],[1,0]], [[0,0],[2,0]]],
  "mo": {"x": [[0,0],[2,0]]}
}"#;
        let (c, vars) = from_json(text).unwrap();
        let out = to_json(&c, &vars);
        let (c2, vars2) = from_json(&out).unwrap();
        let out2 = to_json(&c2, &vars2);
        assert_eq!(out, out2);
        assert_eq!(c, c2);
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let text = r#"{"events": [{"tag": [0,0], "kind": "fence", "var": "x"}], "sb": [], "rf": [], "mo": {}}"#;
        assert!(from_json(text).is_err());
    }

    #[test]
    fn missing_value_is_rejected() {
        let text = r#"{"events": [{"tag": [0,0], "kind": "wr", "var": "x"}], "sb": [], "rf": [], "mo": {}}"#;
        let e = from_json(text).unwrap_err();
        assert!(e.0.contains("without wrval"));
    }
}
