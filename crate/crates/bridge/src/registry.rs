use std::collections::BTreeMap;
use std::sync::Arc;

use cube_core::query::{open_dataset, ErrorBody, ResultDocument};
use cube_core::{Cube, ErrorDocument, Operation, ParallelConfig, QueryDocument, QueryState};
use serde_json::json;

/// JSON bytes of a result (`Ok`) or an error document (`Err`).
pub type Response = Result<Vec<u8>, Vec<u8>>;

#[derive(Debug)]
struct Session {
    base: Arc<Cube>,
    state: QueryState,
    history: Vec<Operation>,
}

/// All live sessions of one module instance. Handles start at 1 and are
/// never reused.
#[derive(Debug)]
pub struct Registry {
    next: u32,
    sessions: BTreeMap<u32, Session>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::new()
    }
}

fn handle_error(id: u32) -> Vec<u8> {
    ErrorDocument {
        error: ErrorBody {
            code: "handle".into(),
            message: format!("no live session with handle {id}"),
            report: None,
        },
    }
    .to_json()
}

fn ok() -> Vec<u8> {
    json!({"ok": true}).to_string().into_bytes()
}

/// Threads are unavailable inside a plain WebAssembly instance; elsewhere
/// the host's parallelism is used. Results are identical either way.
fn session_config() -> ParallelConfig {
    if cfg!(target_arch = "wasm32") {
        ParallelConfig::sequential()
    } else {
        ParallelConfig::default()
    }
}

impl Registry {
    pub const fn new() -> Self {
        Self {
            next: 1,
            sessions: BTreeMap::new(),
        }
    }

    /// Validates and aggregates a dataset. Success payload: `{"session": id}`.
    pub fn create(&mut self, schema_json: &[u8], facts_csv: &[u8]) -> Response {
        let base = open_dataset(schema_json, facts_csv, session_config())
            .map_err(|e| ErrorDocument::from(&e).to_json())?;
        let id = self.next;
        self.next = self.next.checked_add(1).ok_or_else(|| {
            ErrorDocument {
                error: ErrorBody {
                    code: "handle".into(),
                    message: "session handles exhausted".into(),
                    report: None,
                },
            }
            .to_json()
        })?;
        self.sessions.insert(
            id,
            Session {
                state: QueryState::new(base.clone()),
                base,
                history: Vec::new(),
            },
        );
        Ok(json!({ "session": id }).to_string().into_bytes())
    }

    /// Applies a query document on top of the session's current state and
    /// renders the result. On error the session is left as it was.
    pub fn query(&mut self, id: u32, query_json: &[u8]) -> Response {
        let session = self.sessions.get_mut(&id).ok_or_else(|| handle_error(id))?;
        let run = || {
            let doc = QueryDocument::parse(query_json)?;
            let state = session.state.apply_all(&doc.operations)?;
            let result = ResultDocument::from_view(&state.view()?);
            Ok((doc, state, result))
        };
        let (doc, state, result) = run().map_err(|e: cube_core::CubeError| ErrorDocument::from(&e).to_json())?;
        session.state = state;
        session.history.extend(doc.operations);
        Ok(result.to_json())
    }

    /// Returns the session to its base cube and clears its history.
    pub fn reset(&mut self, id: u32) -> Response {
        let session = self.sessions.get_mut(&id).ok_or_else(|| handle_error(id))?;
        session.state = QueryState::new(session.base.clone());
        session.history.clear();
        Ok(ok())
    }

    pub fn free(&mut self, id: u32) -> Response {
        self.sessions.remove(&id).ok_or_else(|| handle_error(id))?;
        Ok(ok())
    }

    /// Operations applied since creation or the last reset.
    pub fn history(&self, id: u32) -> Option<&[Operation]> {
        self.sessions.get(&id).map(|s| s.history.as_slice())
    }

    /// The session's current cube.
    pub fn current(&self, id: u32) -> Option<&Arc<Cube>> {
        self.sessions.get(&id).map(|s| s.state.cube())
    }

    /// The session's base cube.
    pub fn base(&self, id: u32) -> Option<&Arc<Cube>> {
        self.sessions.get(&id).map(|s| &s.base)
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}
