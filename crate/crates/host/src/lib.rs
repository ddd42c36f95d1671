//! Runs the compiled bridge module in an interpreter, standing in for a
//! browser. Everything crosses the boundary as integer handles and byte
//! buffers in the module's linear memory.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use thiserror::Error;
use wasmi::{Engine, Instance, Linker, Memory, Module, Store, TypedFunc};

#[derive(Debug, Error)]
pub enum HostError {
    #[error("cannot build the bridge module: {0}")]
    Build(String),
    #[error("wasm: {0}")]
    Wasm(#[from] wasmi::Error),
    #[error("module memory access out of bounds: {0}")]
    Memory(String),
    #[error("malformed response: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, HostError>;

/// Environment variable naming a prebuilt module, bypassing the build.
pub const MODULE_ENV: &str = "CUBE_BRIDGE_WASM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Error,
}

/// One response from the module: a status and its JSON payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BridgeResult {
    pub status: Status,
    pub payload: Vec<u8>,
}

impl BridgeResult {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.payload).unwrap_or("<invalid utf-8>")
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Path of the bridge module, compiling it on first use (release profile,
/// separate target directory so it never contends with the caller's build).
pub fn module_path() -> Result<PathBuf> {
    static BUILT: OnceLock<std::result::Result<PathBuf, String>> = OnceLock::new();
    if let Some(p) = std::env::var_os(MODULE_ENV) {
        return Ok(PathBuf::from(p));
    }
    BUILT
        .get_or_init(|| {
            let root = workspace_root();
            let target_dir = root.join("target/wasm");
            let cargo = std::env::var_os("CARGO").unwrap_or_else(|| "cargo".into());
            let out = Command::new(cargo)
                .current_dir(&root)
                .args(["build", "-p", "cube-bridge", "--release", "--target", "wasm32-unknown-unknown"])
                .arg("--target-dir")
                .arg(&target_dir)
                .env_remove("RUSTFLAGS")
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(String::from_utf8_lossy(&out.stderr).into_owned());
            }
            Ok(target_dir.join("wasm32-unknown-unknown/release/cube_bridge.wasm"))
        })
        .clone()
        .map_err(HostError::Build)
}

/// An instantiated bridge module.
pub struct WasmBridge {
    store: Store<()>,
    memory: Memory,
    alloc: TypedFunc<u32, u32>,
    dealloc: TypedFunc<(u32, u32), ()>,
    create: TypedFunc<(u32, u32, u32, u32), u32>,
    query: TypedFunc<(u32, u32, u32), u32>,
    reset: TypedFunc<u32, u32>,
    free: TypedFunc<u32, u32>,
}

impl WasmBridge {
    /// Builds (if needed) and instantiates the workspace's bridge module.
    pub fn new() -> Result<Self> {
        let bytes = std::fs::read(module_path()?).map_err(|e| HostError::Build(e.to_string()))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(wasm: &[u8]) -> Result<Self> {
        let engine = Engine::default();
        let module = Module::new(&engine, wasm)?;
        let mut store = Store::new(&engine, ());
        let linker = Linker::<()>::new(&engine);
        let instance: Instance = linker.instantiate_and_start(&mut store, &module)?;
        let memory = instance
            .get_memory(&store, "memory")
            .ok_or_else(|| HostError::Protocol("module exports no memory".into()))?;
        Ok(Self {
            alloc: instance.get_typed_func(&store, "alloc")?,
            dealloc: instance.get_typed_func(&store, "dealloc")?,
            create: instance.get_typed_func(&store, "session_create")?,
            query: instance.get_typed_func(&store, "session_query")?,
            reset: instance.get_typed_func(&store, "session_reset")?,
            free: instance.get_typed_func(&store, "session_free")?,
            memory,
            store,
        })
    }

    fn len32(len: usize) -> Result<u32> {
        u32::try_from(len).map_err(|_| HostError::Memory(format!("{len} bytes exceed 32-bit memory")))
    }

    fn copy_in(&mut self, bytes: &[u8]) -> Result<(u32, u32)> {
        let len = Self::len32(bytes.len())?;
        let ptr = self.alloc.call(&mut self.store, len)?;
        if ptr == 0 && len != 0 {
            return Err(HostError::Memory(format!("module could not allocate {len} bytes")));
        }
        if len != 0 {
            self.memory
                .write(&mut self.store, ptr as usize, bytes)
                .map_err(|e| HostError::Memory(e.to_string()))?;
        }
        Ok((ptr, len))
    }

    fn release(&mut self, (ptr, len): (u32, u32)) -> Result<()> {
        Ok(self.dealloc.call(&mut self.store, (ptr, len))?)
    }

    fn take(&mut self, ptr: u32) -> Result<BridgeResult> {
        if ptr == 0 {
            return Err(HostError::Protocol("null response".into()));
        }
        let mut head = [0u8; 8];
        self.memory
            .read(&self.store, ptr as usize, &mut head)
            .map_err(|e| HostError::Memory(e.to_string()))?;
        let status = u32::from_le_bytes(head[..4].try_into().expect("4 bytes"));
        let len = u32::from_le_bytes(head[4..].try_into().expect("4 bytes"));
        let mut payload = vec![0; len as usize];
        self.memory
            .read(&self.store, ptr as usize + 8, &mut payload)
            .map_err(|e| HostError::Memory(e.to_string()))?;
        self.release((ptr, 8 + len))?;
        let status = match status {
            0 => Status::Ok,
            1 => Status::Error,
            s => return Err(HostError::Protocol(format!("unknown status {s}"))),
        };
        Ok(BridgeResult { status, payload })
    }

    pub fn session_create(&mut self, schema_json: &[u8], facts_csv: &[u8]) -> Result<BridgeResult> {
        let s = self.copy_in(schema_json)?;
        let f = self.copy_in(facts_csv)?;
        let out = self.create.call(&mut self.store, (s.0, s.1, f.0, f.1))?;
        self.release(s)?;
        self.release(f)?;
        self.take(out)
    }

    pub fn session_query(&mut self, id: u32, query_json: &[u8]) -> Result<BridgeResult> {
        let q = self.copy_in(query_json)?;
        let out = self.query.call(&mut self.store, (id, q.0, q.1))?;
        self.release(q)?;
        self.take(out)
    }

    pub fn session_reset(&mut self, id: u32) -> Result<BridgeResult> {
        let out = self.reset.call(&mut self.store, id)?;
        self.take(out)
    }

    pub fn session_free(&mut self, id: u32) -> Result<BridgeResult> {
        let out = self.free.call(&mut self.store, id)?;
        self.take(out)
    }

    /// Bytes of linear memory currently allocated to the instance.
    pub fn memory_size(&self) -> usize {
        self.memory.data_size(&self.store)
    }
}
