use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AttrId, AttributeVocab};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionEvent {
    pub attribute: AttrId,
    /// Milliseconds, never negative.
    pub dwell: f64,
}

/// One browsing session: events `0..=N` and whether it ended in a purchase.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub id: String,
    pub events: Vec<SessionEvent>,
    pub purchased: bool,
}

impl SessionLog {
    pub fn new(id: impl Into<String>, events: Vec<SessionEvent>, purchased: bool) -> Result<Self> {
        let id = id.into();
        if events.is_empty() {
            return Err(Error::Data(format!("session {id:?} has no events")));
        }
        if let Some(bad) = events.iter().find(|e| !(e.dwell >= 0.0 && e.dwell.is_finite())) {
            return Err(Error::Data(format!(
                "session {id:?} has invalid dwell {}",
                bad.dwell
            )));
        }
        Ok(Self {
            id,
            events,
            purchased,
        })
    }

    /// Convenience constructor for tests and examples.
    pub fn from_pairs(id: impl Into<String>, pairs: &[(AttrId, f64)], purchased: bool) -> Result<Self> {
        let events = pairs
            .iter()
            .map(|&(attribute, dwell)| SessionEvent { attribute, dwell })
            .collect();
        Self::new(id, events, purchased)
    }

    /// Index of the last event, `N`.
    pub fn last_index(&self) -> usize {
        self.events.len() - 1
    }

    pub fn attributes(&self) -> impl Iterator<Item = AttrId> + '_ {
        self.events.iter().map(|e| e.attribute)
    }

    /// True when the session yields at least one transition for window `k`.
    pub fn is_usable(&self, k: usize) -> bool {
        self.events.len() > k
    }
}

#[derive(Serialize, Deserialize)]
struct SessionRecord {
    id: String,
    purchased: bool,
    events: Vec<(String, f64)>,
}

/// Reads line-delimited session records, resolving names against `vocab`.
pub fn load_sessions(path: impl AsRef<Path>, vocab: &AttributeVocab) -> Result<Vec<SessionLog>> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::io(format!("opening sessions {}", path.display()), e))?;
    parse_sessions(BufReader::new(file), vocab, path)
}

pub fn parse_sessions<R: BufRead>(
    reader: R,
    vocab: &AttributeVocab,
    label: &Path,
) -> Result<Vec<SessionLog>> {
    let mut sessions = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", label.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: label.to_path_buf(),
            line: line_no,
            message,
        };
        let record: SessionRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let mut events = Vec::with_capacity(record.events.len());
        for (name, dwell) in &record.events {
            events.push(SessionEvent {
                attribute: vocab.id(name)?,
                dwell: *dwell,
            });
        }
        let session = SessionLog::new(record.id, events, record.purchased)
            .map_err(|e| parse_err(e.to_string()))?;
        sessions.push(session);
    }
    Ok(sessions)
}

fn encode_record(session: &SessionLog, vocab: &AttributeVocab) -> Result<String> {
    let events = session
        .events
        .iter()
        .map(|e| Ok((vocab.name(e.attribute)?.to_string(), e.dwell)))
        .collect::<Result<Vec<_>>>()?;
    let record = SessionRecord {
        id: session.id.clone(),
        purchased: session.purchased,
        events,
    };
    Ok(serde_json::to_string(&record)?)
}

pub fn write_sessions(
    path: impl AsRef<Path>,
    sessions: &[SessionLog],
    vocab: &AttributeVocab,
) -> Result<()> {
    let path = path.as_ref();
    let ctx = || format!("writing sessions {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut out = BufWriter::new(file);
    for session in sessions {
        writeln!(out, "{}", encode_record(session, vocab)?).map_err(|e| Error::io(ctx(), e))?;
    }
    out.flush().map_err(|e| Error::io(ctx(), e))
}

/// SHA-256 over ids, attribute ids, dwell bits and purchase flags; identifies
/// a test set in evaluation reports.
pub fn sessions_digest(sessions: &[SessionLog]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((sessions.len() as u64).to_le_bytes());
    for session in sessions {
        hasher.update((session.id.len() as u64).to_le_bytes());
        hasher.update(session.id.as_bytes());
        hasher.update([u8::from(session.purchased)]);
        hasher.update((session.events.len() as u64).to_le_bytes());
        for e in &session.events {
            hasher.update((e.attribute as u64).to_le_bytes());
            hasher.update(e.dwell.to_bits().to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn vocab() -> AttributeVocab {
        AttributeVocab::new(["red", "green", "blue"]).unwrap()
    }

    fn parse(text: &str) -> Result<Vec<SessionLog>> {
        parse_sessions(Cursor::new(text), &vocab(), Path::new("mem"))
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn minimal_record() {
        let s = parse(r#"{"id":"s1","purchased":true,"events":[["red",1200.0]]}"#).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, "s1");
        assert_eq!(s[0].last_index(), 0);
        assert!(s[0].purchased);
        assert_eq!(s[0].events[0], SessionEvent { attribute: 0, dwell: 1200.0 });
    }

    #[test]
    fn unknown_attribute_is_named() {
        let err = parse(r#"{"id":"s1","purchased":false,"events":[["plaid",1.0]]}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownAttribute(ref n) if n == "plaid"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = concat!(
            r#"{"id":"a","purchased":false,"events":[["red",1.0]]}"#,
            "\n",
            r#"{"id":"b","purchased":false,"events":[["red",1.0]"#,
            "\n"
        );
        match parse(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let negative = r#"{"id":"c","purchased":false,"events":[["red",-3.0]]}"#;
        assert!(matches!(parse(negative).unwrap_err(), Error::Parse { line: 1, .. }));
        let empty = r#"{"id":"d","purchased":false,"events":[]}"#;
        assert!(matches!(parse(empty).unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn order_is_preserved_and_encoding_is_stable() {
        let text = concat!(
            r#"{"id":"x","purchased":false,"events":[["blue",10.5],["red",0.0],["green",3.0]]}"#,
            "\n",
            r#"{"id":"y","purchased":true,"events":[["green",0.1]]}"#,
            "\n"
        );
        let sessions = parse(text).unwrap();
        let attrs: Vec<_> = sessions[0].attributes().collect();
        assert_eq!(attrs, vec![2, 0, 1]);
        assert_eq!(sessions[1].id, "y");

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        write_sessions(&path, &sessions, &vocab()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    }
}
