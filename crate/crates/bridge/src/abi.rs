//! C-ABI exports. Pointers are offsets into the module's linear memory when
//! built for WebAssembly.

use std::alloc::{alloc as raw_alloc, dealloc as raw_dealloc, Layout};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;

use cube_core::query::ErrorBody;
use cube_core::ErrorDocument;

use crate::registry::{Registry, Response};

pub const STATUS_OK: u32 = 0;
pub const STATUS_ERROR: u32 = 1;

static REGISTRY: Mutex<Registry> = Mutex::new(Registry::new());

/// Allocates `len` bytes for the host to fill. Zero-length requests return
/// a non-null dangling pointer that must not be dereferenced.
#[no_mangle]
pub extern "C" fn alloc(len: usize) -> *mut u8 {
    if len == 0 {
        return std::ptr::NonNull::<u8>::dangling().as_ptr();
    }
    match Layout::array::<u8>(len) {
        // SAFETY: the layout has non-zero size.
        Ok(layout) => unsafe { raw_alloc(layout) },
        Err(_) => std::ptr::null_mut(),
    }
}

/// Releases memory obtained from [`alloc`] or returned by a session call.
///
/// # Safety
/// `ptr` must come from this module with exactly `len` bytes, and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dealloc(ptr: *mut u8, len: usize) {
    if len == 0 || ptr.is_null() {
        return;
    }
    if let Ok(layout) = Layout::array::<u8>(len) {
        raw_dealloc(ptr, layout);
    }
}

/// # Safety
/// `ptr` must be valid for `len` bytes, or `len` must be zero.
unsafe fn bytes<'a>(ptr: *const u8, len: usize) -> &'a [u8] {
    if len == 0 || ptr.is_null() {
        &[]
    } else {
        std::slice::from_raw_parts(ptr, len)
    }
}

fn respond(response: Response) -> *mut u8 {
    let (status, payload) = match response {
        Ok(p) => (STATUS_OK, p),
        Err(p) => (STATUS_ERROR, p),
    };
    let total = 8 + payload.len();
    let out = alloc(total);
    if out.is_null() {
        return out;
    }
    // SAFETY: `out` holds `total` freshly allocated bytes.
    unsafe {
        let buf = std::slice::from_raw_parts_mut(out, total);
        buf[..4].copy_from_slice(&status.to_le_bytes());
        buf[4..8].copy_from_slice(&(payload.len() as u32).to_le_bytes());
        buf[8..].copy_from_slice(&payload);
    }
    out
}

fn with_registry(f: impl FnOnce(&mut Registry) -> Response) -> *mut u8 {
    let response = catch_unwind(AssertUnwindSafe(|| {
        let mut registry = REGISTRY.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut registry)
    }))
    .unwrap_or_else(|_| {
        Err(ErrorDocument {
            error: ErrorBody {
                code: "internal".into(),
                message: "the engine panicked; the session may be unusable".into(),
                report: None,
            },
        }
        .to_json())
    });
    respond(response)
}

/// # Safety
/// Both buffers must be valid for their lengths.
#[no_mangle]
pub unsafe extern "C" fn session_create(
    schema_ptr: *const u8,
    schema_len: usize,
    facts_ptr: *const u8,
    facts_len: usize,
) -> *mut u8 {
    let schema = bytes(schema_ptr, schema_len);
    let facts = bytes(facts_ptr, facts_len);
    with_registry(|r| r.create(schema, facts))
}

/// # Safety
/// The query buffer must be valid for its length.
#[no_mangle]
pub unsafe extern "C" fn session_query(id: u32, query_ptr: *const u8, query_len: usize) -> *mut u8 {
    let query = bytes(query_ptr, query_len);
    with_registry(|r| r.query(id, query))
}

#[no_mangle]
pub extern "C" fn session_reset(id: u32) -> *mut u8 {
    with_registry(|r| r.reset(id))
}

#[no_mangle]
pub extern "C" fn session_free(id: u32) -> *mut u8 {
    with_registry(|r| r.free(id))
}
