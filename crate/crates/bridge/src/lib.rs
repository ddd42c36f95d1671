//! Sessions over the cube engine behind a flat interface: integer handles
//! in, length-prefixed UTF-8 JSON out.
//!
//! [`Registry`] holds the session logic and is usable natively. The `abi`
//! module exports it as C-ABI functions for a WebAssembly host:
//!
//! | export | returns |
//! |---|---|
//! | `alloc(len) -> ptr` | `len` bytes of module memory |
//! | `dealloc(ptr, len)` | |
//! | `session_create(schema_ptr, schema_len, facts_ptr, facts_len) -> ptr` | response |
//! | `session_query(id, query_ptr, query_len) -> ptr` | response |
//! | `session_reset(id) -> ptr` | response |
//! | `session_free(id) -> ptr` | response |
//!
//! A response is `[status: u32 LE][len: u32 LE][len bytes of JSON]`, status
//! 0 for success and 1 for an error document. The host releases it with
//! `dealloc(ptr, 8 + len)`.

mod abi;
mod registry;

pub use abi::{STATUS_ERROR, STATUS_OK};
pub use registry::{Registry, Response};
