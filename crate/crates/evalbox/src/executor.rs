//! Isolated, resource-limited execution of test programs.
//!
//! Each run gets a fresh private working directory, a scrubbed
//! environment, rlimit-enforced CPU/memory/process ceilings, its own
//! process group, and (when the platform allows) an empty network
//! namespace. Working directories are removed when the run finishes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::runner::{Registry, RunnerProfile};
use crate::synthesis::TestProgram;

/// Hard ceiling on the total size of a materialized file map.
pub const MAX_PROGRAM_BYTES: usize = 8 * 1024 * 1024;

/// Grace period the watchdog allows past the wall limit before a kill is
/// considered late.
pub const WALL_GRACE_MS: u64 = 500;

const POLL_INTERVAL: Duration = Duration::from_millis(10);
const FILE_SIZE_LIMIT_BYTES: u64 = 64 * 1024 * 1024;

/// Memory floor for compile phases. Compilers are trusted tooling and
/// routinely need more address space than the user program is allowed;
/// wall, CPU, process, and output ceilings still apply to them.
const COMPILE_MEMORY_FLOOR_BYTES: u64 = 2 * 1024 * 1024 * 1024;

/// Resource ceilings for one execution. Fields omitted from a
/// serialized form fall back to the defaults below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    #[serde(default = "default_wall_ms")]
    pub wall_ms: u64,
    #[serde(default = "default_cpu_ms")]
    pub cpu_ms: u64,
    #[serde(default = "default_memory_bytes")]
    pub memory_bytes: u64,
    #[serde(default = "default_max_output_bytes")]
    pub max_output_bytes: u64,
    #[serde(default = "default_max_processes")]
    pub max_processes: u64,
}

fn default_wall_ms() -> u64 {
    10_000
}
fn default_cpu_ms() -> u64 {
    10_000
}
fn default_memory_bytes() -> u64 {
    512 * 1024 * 1024
}
fn default_max_output_bytes() -> u64 {
    1024 * 1024
}
fn default_max_processes() -> u64 {
    32
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            wall_ms: default_wall_ms(),
            cpu_ms: default_cpu_ms(),
            memory_bytes: default_memory_bytes(),
            max_output_bytes: default_max_output_bytes(),
            max_processes: default_max_processes(),
        }
    }
}

impl Limits {
    /// All fields must be positive; a wall limit below the CPU limit is
    /// legal but suspicious, so it only warns.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("wall_ms", self.wall_ms),
            ("cpu_ms", self.cpu_ms),
            ("memory_bytes", self.memory_bytes),
            ("max_output_bytes", self.max_output_bytes),
            ("max_processes", self.max_processes),
        ];
        for (name, value) in fields {
            if value == 0 {
                return Err(format!("limit {name} must be positive"));
            }
        }
        if self.wall_ms < self.cpu_ms {
            tracing::warn!(
                wall_ms = self.wall_ms,
                cpu_ms = self.cpu_ms,
                "wall limit below cpu limit"
            );
        }
        Ok(())
    }
}

/// One sandbox execution request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub program: TestProgram,
    #[serde(default)]
    pub stdin: Option<String>,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub network_enabled: bool,
}

impl RunSpec {
    pub fn new(program: TestProgram) -> RunSpec {
        RunSpec {
            program,
            stdin: None,
            limits: Limits::default(),
            network_enabled: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Finished,
    TimeLimit,
    MemoryLimit,
    OutputLimit,
    SetupError,
}

/// Compile-phase record, present exactly when the language compiles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilePhase {
    pub exit_code: i32,
    pub stderr: String,
    pub duration_ms: u64,
}

/// Captured outcome of one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub status: RunStatus,
    /// Present when status is `Finished`. Processes killed by a signal
    /// report the shell convention 128 + signal number.
    pub exit_code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub duration_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile: Option<CompilePhase>,
    /// Human-readable reason when status is `SetupError`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_message: Option<String>,
}

impl RunResult {
    pub fn setup_error(message: impl Into<String>) -> RunResult {
        RunResult {
            status: RunStatus::SetupError,
            exit_code: None,
            stdout: String::new(),
            stderr: String::new(),
            duration_ms: 0,
            compile: None,
            setup_message: Some(message.into()),
        }
    }

    /// True when the program ran to completion with exit code zero (and
    /// compiled cleanly, when a compile phase exists).
    pub fn success(&self) -> bool {
        self.status == RunStatus::Finished
            && self.compile.as_ref().is_none_or(|c| c.exit_code == 0)
            && self.exit_code == Some(0)
    }
}

/// Counting semaphore bounding actual execution parallelism.
#[derive(Debug)]
pub(crate) struct WorkerPool {
    capacity: usize,
    state: Mutex<usize>,
    available: Condvar,
}

impl WorkerPool {
    pub(crate) fn new(capacity: usize) -> WorkerPool {
        WorkerPool {
            capacity: capacity.max(1),
            state: Mutex::new(capacity.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(self: &Arc<Self>) -> WorkerPermit {
        let mut slots = self.state.lock().expect("pool lock");
        while *slots == 0 {
            slots = self.available.wait(slots).expect("pool lock");
        }
        *slots -= 1;
        WorkerPermit {
            pool: Arc::clone(self),
        }
    }

    pub(crate) fn capacity(&self) -> usize {
        self.capacity
    }
}

pub(crate) struct WorkerPermit {
    pool: Arc<WorkerPool>,
}

impl Drop for WorkerPermit {
    fn drop(&mut self) {
        let mut slots = self.pool.state.lock().expect("pool lock");
        *slots += 1;
        self.pool.available.notify_one();
    }
}

/// The execution engine. Cheap to clone; clones share the worker pool.
#[derive(Clone)]
pub struct Executor {
    registry: Arc<Registry>,
    scratch_root: PathBuf,
    pool: Arc<WorkerPool>,
}

impl Executor {
    /// Build an executor over a profile registry. The scratch root comes
    /// from `SANDBOX_TMPDIR` (default: the system temp dir) and the
    /// worker count from `SANDBOX_WORKERS` (default: available
    /// parallelism, capped at 8).
    pub fn new(registry: Registry) -> Executor {
        Executor::with_options(registry, default_scratch_root(), default_worker_count())
    }

    pub fn with_options(
        registry: Registry,
        scratch_root: impl Into<PathBuf>,
        workers: usize,
    ) -> Executor {
        Executor {
            registry: Arc::new(registry),
            scratch_root: scratch_root.into(),
            pool: Arc::new(WorkerPool::new(workers)),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn workers(&self) -> usize {
        self.pool.capacity()
    }

    pub(crate) fn scratch_root(&self) -> &Path {
        &self.scratch_root
    }

    pub(crate) fn acquire_slot(&self) -> WorkerPermit {
        self.pool.acquire()
    }

    /// Execute a test program under the request's limits.
    ///
    /// Infrastructure problems (missing toolchain, unwritable scratch
    /// space, malformed file maps) come back as `SetupError` results;
    /// this function itself never fails.
    pub fn run_code(&self, spec: &RunSpec) -> RunResult {
        if let Err(msg) = spec.limits.validate() {
            return RunResult::setup_error(msg);
        }
        if let Err(err) = spec.program.validate() {
            return RunResult::setup_error(err.to_string());
        }
        if spec.program.total_bytes() > MAX_PROGRAM_BYTES {
            return RunResult::setup_error(format!(
                "program exceeds the {MAX_PROGRAM_BYTES}-byte file cap"
            ));
        }
        let profile = match self.registry.get(&spec.program.language) {
            Some(profile) => profile,
            None => {
                return RunResult::setup_error(format!(
                    "no runner profile for language {:?}",
                    spec.program.language.name()
                ))
            }
        };
        if profile.needs_compile() != spec.program.needs_compile {
            return RunResult::setup_error(format!(
                "program compile flag disagrees with the {} profile",
                profile.language
            ));
        }

        let _slot = self.pool.acquire();

        let workdir = match tempfile::Builder::new()
            .prefix("evalbox-")
            .tempdir_in(&self.scratch_root)
        {
            Ok(dir) => dir,
            Err(e) => {
                return RunResult::setup_error(format!(
                    "cannot create working directory under {}: {e}",
                    self.scratch_root.display()
                ))
            }
        };
        if let Err(e) = materialize(workdir.path(), &spec.program.files) {
            return RunResult::setup_error(format!("cannot write program files: {e}"));
        }

        let mut compile_record = None;
        if let Some(compile_argv) = &profile.compile {
            let argv = expand_template(compile_argv, profile, &spec.program, &spec.limits);
            let phase = run_phase(
                &argv,
                workdir.path(),
                None,
                &spec.limits,
                profile,
                PhaseRole::Compile,
                false,
            );
            match phase.status {
                RunStatus::SetupError => {
                    return RunResult::setup_error(
                        phase
                            .setup_message
                            .unwrap_or_else(|| "compile setup failed".to_string()),
                    );
                }
                RunStatus::Finished => {
                    let exit = phase.exit_code.unwrap_or(-1);
                    let record = CompilePhase {
                        exit_code: exit,
                        stderr: combined_diagnostics(&phase),
                        duration_ms: phase.duration_ms,
                    };
                    if exit != 0 {
                        // short-circuit: the judge names this CompileError
                        return RunResult {
                            status: RunStatus::Finished,
                            exit_code: Some(exit),
                            stdout: String::new(),
                            stderr: String::new(),
                            duration_ms: phase.duration_ms,
                            compile: Some(record),
                            setup_message: None,
                        };
                    }
                    compile_record = Some(record);
                }
                limit_status => {
                    return RunResult {
                        status: limit_status,
                        exit_code: None,
                        stdout: String::new(),
                        stderr: String::new(),
                        duration_ms: phase.duration_ms,
                        compile: Some(CompilePhase {
                            exit_code: phase.exit_code.unwrap_or(-1),
                            stderr: combined_diagnostics(&phase),
                            duration_ms: phase.duration_ms,
                        }),
                        setup_message: None,
                    };
                }
            }
        }

        let argv = expand_template(&profile.run, profile, &spec.program, &spec.limits);
        let stdin = spec.stdin.as_deref().or(spec.program.run_stdin.as_deref());
        let phase = run_phase(
            &argv,
            workdir.path(),
            stdin,
            &spec.limits,
            profile,
            PhaseRole::Run,
            spec.network_enabled,
        );
        RunResult {
            status: phase.status,
            exit_code: phase.exit_code,
            stdout: phase.stdout,
            stderr: phase.stderr,
            duration_ms: phase.duration_ms,
            compile: compile_record,
            setup_message: phase.setup_message,
        }
    }
}

/// Worker count from `SANDBOX_WORKERS`, defaulting to the available
/// parallelism capped at 8.
pub fn default_worker_count() -> usize {
    std::env::var("SANDBOX_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get().min(8))
                .unwrap_or(4)
        })
}

/// Scratch root from `SANDBOX_TMPDIR`, defaulting to the system temp dir.
pub fn default_scratch_root() -> PathBuf {
    std::env::var_os("SANDBOX_TMPDIR")
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
}

fn materialize(root: &Path, files: &BTreeMap<String, String>) -> std::io::Result<()> {
    for (rel, content) in files {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, content)?;
    }
    Ok(())
}

fn expand_template(
    template: &[String],
    profile: &RunnerProfile,
    program: &TestProgram,
    limits: &Limits,
) -> Vec<String> {
    let sources: Vec<String> = program
        .files
        .keys()
        .filter(|p| p.ends_with(&format!(".{}", profile.extension)))
        .cloned()
        .collect();
    // {file}: the conventional name when present, else the extension
    // match, else a lone file of any name (plugin languages)
    let file = if program.files.contains_key(&profile.source_file) {
        profile.source_file.clone()
    } else if let Some(first) = sources.first() {
        first.clone()
    } else if program.files.len() == 1 {
        program.files.keys().next().expect("one file").clone()
    } else {
        profile.source_file.clone()
    };
    let entry = program.entry_hint.clone().unwrap_or_else(|| "Main".into());
    let memory_mb = (limits.memory_bytes / (1024 * 1024)).max(16).to_string();

    let mut argv = Vec::with_capacity(template.len());
    for part in template {
        if part == "{sources}" {
            argv.extend(sources.iter().cloned());
            continue;
        }
        let expanded = part
            .replace("{file}", &file)
            .replace("{out}", "prog")
            .replace("{entry}", &entry)
            .replace("{memory_mb}", &memory_mb);
        argv.push(expanded);
    }
    argv
}

struct PhaseOutcome {
    status: RunStatus,
    exit_code: Option<i32>,
    stdout: String,
    stderr: String,
    duration_ms: u64,
    setup_message: Option<String>,
}

fn combined_diagnostics(phase: &PhaseOutcome) -> String {
    // some compilers (tsc) print diagnostics on stdout
    if phase.stderr.trim().is_empty() && !phase.stdout.trim().is_empty() {
        phase.stdout.clone()
    } else {
        phase.stderr.clone()
    }
}

/// Signatures that mark memory exhaustion across common runtimes, checked
/// alongside the per-profile patterns.
const GENERIC_OOM_PATTERNS: &[&str] = &[
    "MemoryError",
    "bad_alloc",
    "OutOfMemoryError",
    "out of memory",
    "Out of memory",
    "memory allocation of",
    "allocation failed",
    "cannot allocate memory",
    "Cannot allocate memory",
];

fn looks_like_oom(stderr: &str, profile: &RunnerProfile) -> bool {
    GENERIC_OOM_PATTERNS.iter().any(|p| stderr.contains(p))
        || profile.oom_patterns.iter().any(|p| stderr.contains(p))
}

/// Reader that captures up to `cap` bytes, then keeps draining so the
/// child never blocks on a full pipe. Raises `hit_cap` on truncation.
fn spawn_capped_reader(
    mut source: impl Read + Send + 'static,
    cap: usize,
    hit_cap: Arc<AtomicBool>,
) -> std::thread::JoinHandle<Vec<u8>> {
    std::thread::spawn(move || {
        let mut captured = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match source.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if captured.len() < cap {
                        let take = n.min(cap - captured.len());
                        captured.extend_from_slice(&buf[..take]);
                        if take < n {
                            hit_cap.store(true, Ordering::SeqCst);
                        }
                    } else {
                        hit_cap.store(true, Ordering::SeqCst);
                    }
                }
            }
        }
        captured
    })
}

fn kill_process_group(child: &mut Child) {
    let pid = child.id() as i32;
    unsafe {
        // the child called setsid(), so its pid is the group id
        libc::kill(-pid, libc::SIGKILL);
        libc::kill(pid, libc::SIGKILL);
    }
}

#[derive(Clone, Copy, PartialEq)]
enum PhaseRole {
    Compile,
    Run,
}

/// Run one command under the limits, capturing capped output.
fn run_phase(
    argv: &[String],
    workdir: &Path,
    stdin: Option<&str>,
    limits: &Limits,
    profile: &RunnerProfile,
    role: PhaseRole,
    network_enabled: bool,
) -> PhaseOutcome {
    let setup = |message: String| PhaseOutcome {
        status: RunStatus::SetupError,
        exit_code: None,
        stdout: String::new(),
        stderr: String::new(),
        duration_ms: 0,
        setup_message: Some(message),
    };
    if argv.is_empty() {
        return setup("empty command template".to_string());
    }

    let mut command = Command::new(&argv[0]);
    command
        .args(&argv[1..])
        .current_dir(workdir)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    scrub_environment(&mut command, workdir, profile);
    apply_child_limits(&mut command, limits, profile, role, network_enabled);

    let start = Instant::now();
    let mut child = match command.spawn() {
        Ok(child) => child,
        Err(e) => {
            return setup(format!(
                "failed to start {:?}: {e} (missing toolchain?)",
                argv[0]
            ))
        }
    };

    // feed stdin from a thread so a non-reading child cannot block us
    let stdin_thread = stdin.map(|text| {
        let mut pipe = child.stdin.take().expect("stdin piped");
        let text = text.as_bytes().to_vec();
        std::thread::spawn(move || {
            let _ = pipe.write_all(&text);
        })
    });

    let cap = limits.max_output_bytes as usize;
    let hit_cap = Arc::new(AtomicBool::new(false));
    let stdout_thread = spawn_capped_reader(
        child.stdout.take().expect("stdout piped"),
        cap,
        Arc::clone(&hit_cap),
    );
    let stderr_thread = spawn_capped_reader(
        child.stderr.take().expect("stderr piped"),
        cap,
        Arc::clone(&hit_cap),
    );

    let deadline = start + Duration::from_millis(limits.wall_ms);
    let mut wall_exceeded = false;
    let mut output_exceeded = false;
    let exit_status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {}
            Err(_) => break None,
        }
        if hit_cap.load(Ordering::SeqCst) {
            output_exceeded = true;
            kill_process_group(&mut child);
            break child.wait().ok();
        }
        if Instant::now() >= deadline {
            wall_exceeded = true;
            kill_process_group(&mut child);
            break child.wait().ok();
        }
        std::thread::sleep(POLL_INTERVAL);
    };

    if let Some(handle) = stdin_thread {
        let _ = handle.join();
    }
    let stdout_bytes = stdout_thread.join().unwrap_or_default();
    let stderr_bytes = stderr_thread.join().unwrap_or_default();
    let duration_ms = start.elapsed().as_millis() as u64;
    let stdout = String::from_utf8_lossy(&stdout_bytes).into_owned();
    let stderr = String::from_utf8_lossy(&stderr_bytes).into_owned();
    // a fast-exiting program can overflow the cap before the watchdog
    // notices; the readers have finished now, so their verdict is final
    let output_exceeded = output_exceeded || hit_cap.load(Ordering::SeqCst);

    let (status, exit_code) = classify_exit(
        exit_status,
        wall_exceeded,
        output_exceeded,
        &stderr,
        profile,
        limits,
        duration_ms,
    );

    PhaseOutcome {
        status,
        exit_code,
        stdout,
        stderr,
        duration_ms,
        setup_message: None,
    }
}

fn classify_exit(
    exit_status: Option<std::process::ExitStatus>,
    wall_exceeded: bool,
    output_exceeded: bool,
    stderr: &str,
    profile: &RunnerProfile,
    limits: &Limits,
    duration_ms: u64,
) -> (RunStatus, Option<i32>) {
    use std::os::unix::process::ExitStatusExt;

    if output_exceeded {
        return (RunStatus::OutputLimit, None);
    }
    if wall_exceeded {
        return (RunStatus::TimeLimit, None);
    }
    let status = match exit_status {
        Some(status) => status,
        None => return (RunStatus::SetupError, None),
    };
    if let Some(signal) = status.signal() {
        if signal == libc::SIGXCPU {
            return (RunStatus::TimeLimit, None);
        }
        // the hard CPU rlimit delivers SIGKILL
        if signal == libc::SIGKILL && duration_ms >= limits.cpu_ms {
            return (RunStatus::TimeLimit, None);
        }
        if looks_like_oom(stderr, profile) {
            return (RunStatus::MemoryLimit, None);
        }
        return (RunStatus::Finished, Some(128 + signal));
    }
    let code = status.code().unwrap_or(-1);
    if code != 0 && looks_like_oom(stderr, profile) {
        return (RunStatus::MemoryLimit, None);
    }
    (RunStatus::Finished, Some(code))
}

fn scrub_environment(command: &mut Command, workdir: &Path, profile: &RunnerProfile) {
    let path = std::env::var("PATH")
        .unwrap_or_else(|_| "/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin".into());
    command
        .env_clear()
        .env("PATH", path)
        .env("HOME", workdir)
        .env("TMPDIR", workdir)
        .env("LANG", "C.UTF-8")
        .env("LC_ALL", "C.UTF-8");
    for name in &profile.env_passthrough {
        if let Ok(value) = std::env::var(name) {
            command.env(name, value);
        }
    }
}

fn apply_child_limits(
    command: &mut Command,
    limits: &Limits,
    profile: &RunnerProfile,
    role: PhaseRole,
    network_enabled: bool,
) {
    use std::os::unix::process::CommandExt;

    let cpu_secs = limits.cpu_ms.div_ceil(1000).max(1);
    let mut memory = limits.memory_bytes + profile.rlimit_as_slack_bytes;
    if role == PhaseRole::Compile {
        memory = memory.max(COMPILE_MEMORY_FLOOR_BYTES);
    }
    let processes = limits.max_processes;

    unsafe {
        command.pre_exec(move || {
            // own process group so the watchdog can kill every descendant
            if libc::setsid() == -1 {
                return Err(std::io::Error::last_os_error());
            }
            set_rlimit(libc::RLIMIT_CPU, cpu_secs, cpu_secs + 1)?;
            set_rlimit(libc::RLIMIT_AS, memory, memory)?;
            set_rlimit(libc::RLIMIT_NPROC, processes, processes)?;
            set_rlimit(libc::RLIMIT_CORE, 0, 0)?;
            set_rlimit(
                libc::RLIMIT_FSIZE,
                FILE_SIZE_LIMIT_BYTES,
                FILE_SIZE_LIMIT_BYTES,
            )?;
            if !network_enabled {
                // best effort: works when privileged, harmless otherwise
                libc::unshare(libc::CLONE_NEWNET);
            }
            Ok(())
        });
    }
}

unsafe fn set_rlimit(
    resource: libc::__rlimit_resource_t,
    soft: u64,
    hard: u64,
) -> std::io::Result<()> {
    let limit = libc::rlimit {
        rlim_cur: soft,
        rlim_max: hard,
    };
    if libc::setrlimit(resource, &limit) != 0 {
        return Err(std::io::Error::last_os_error());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Language;
    use crate::synthesis::synthesize_oj;

    fn executor() -> Executor {
        Executor::new(Registry::builtin())
    }

    fn python_spec(code: &str) -> RunSpec {
        RunSpec::new(synthesize_oj(code, &Language::Python).unwrap())
    }

    #[test]
    fn hello_world_finishes() {
        let result = executor().run_code(&python_spec("print(\"hi\")"));
        assert_eq!(result.status, RunStatus::Finished);
        assert_eq!(result.exit_code, Some(0));
        assert_eq!(result.stdout, "hi\n");
        assert!(result.compile.is_none());
    }

    #[test]
    fn stdin_is_delivered() {
        let mut spec = python_spec("print(int(input()) * 2)");
        spec.stdin = Some("21\n".to_string());
        let result = executor().run_code(&spec);
        assert_eq!(result.stdout, "42\n");
    }

    #[test]
    fn nonzero_exit_is_finished() {
        let result = executor().run_code(&python_spec("import sys; sys.exit(3)"));
        assert_eq!(result.status, RunStatus::Finished);
        assert_eq!(result.exit_code, Some(3));
    }

    #[test]
    fn wall_limit_enforced_with_grace() {
        let mut spec = python_spec("while True: pass");
        spec.limits.wall_ms = 1000;
        let start = Instant::now();
        let result = executor().run_code(&spec);
        let elapsed = start.elapsed().as_millis() as u64;
        assert_eq!(result.status, RunStatus::TimeLimit);
        assert!(
            result.duration_ms <= 1000 + WALL_GRACE_MS,
            "took {} ms",
            result.duration_ms
        );
        assert!(elapsed <= 2500, "watchdog took {elapsed} ms");
    }

    #[test]
    fn memory_limit_reported() {
        let mut spec = python_spec("b = bytearray(1024*1024*1024); print(len(b))");
        spec.limits.memory_bytes = 256 * 1024 * 1024;
        let result = executor().run_code(&spec);
        assert_eq!(result.status, RunStatus::MemoryLimit);
    }

    #[test]
    fn output_cap_truncates_and_reports() {
        let mut spec = python_spec("print(\"x\" * 100000)\n");
        spec.limits.max_output_bytes = 1024;
        let result = executor().run_code(&spec);
        assert_eq!(result.status, RunStatus::OutputLimit);
        assert!(result.stdout.len() <= 1024);
    }

    #[test]
    fn unbounded_printer_is_stopped() {
        let mut spec = python_spec("while True: print(\"y\")");
        spec.limits.max_output_bytes = 4096;
        spec.limits.wall_ms = 10_000;
        let start = Instant::now();
        let result = executor().run_code(&spec);
        assert_eq!(result.status, RunStatus::OutputLimit);
        assert!(start.elapsed() < Duration::from_secs(9));
    }

    #[test]
    fn compile_error_short_circuits() {
        let program = synthesize_oj("int main( {", &Language::Cpp).unwrap();
        let result = executor().run_code(&RunSpec::new(program));
        assert_eq!(result.status, RunStatus::Finished);
        let compile = result.compile.expect("compile phase recorded");
        assert_ne!(compile.exit_code, 0);
        assert!(!compile.stderr.is_empty());
        assert_eq!(result.stdout, "");
    }

    #[test]
    fn compiled_language_records_compile_phase() {
        let code = "#include <cstdio>\nint main(){ printf(\"ok\\n\"); return 0; }\n";
        let program = synthesize_oj(code, &Language::Cpp).unwrap();
        let result = executor().run_code(&RunSpec::new(program));
        assert_eq!(result.status, RunStatus::Finished);
        assert_eq!(result.exit_code, Some(0));
        assert_eq!(result.stdout, "ok\n");
        assert_eq!(result.compile.unwrap().exit_code, 0);
    }

    #[test]
    fn missing_toolchain_is_setup_error() {
        let mut registry = Registry::builtin();
        registry.register(crate::runner::RunnerProfile {
            language: "python".into(),
            extension: "py".into(),
            source_file: "main.py".into(),
            compile: None,
            run: vec!["definitely-not-a-real-binary".into(), "{file}".into()],
            session: None,
            oom_patterns: vec![],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        });
        let executor = Executor::with_options(registry, std::env::temp_dir(), 2);
        let result = executor.run_code(&python_spec("print(1)"));
        assert_eq!(result.status, RunStatus::SetupError);
        assert!(result.setup_message.unwrap().contains("missing toolchain"));
    }

    #[test]
    fn unknown_language_is_setup_error() {
        let program = TestProgram {
            files: [("main.xyz".to_string(), "x".to_string())]
                .into_iter()
                .collect(),
            language: Language::Plugin("xyz".to_string()),
            needs_compile: false,
            run_stdin: None,
            entry_hint: None,
        };
        let result = executor().run_code(&RunSpec::new(program));
        assert_eq!(result.status, RunStatus::SetupError);
    }

    #[test]
    fn plugin_language_runs_through_registered_profile() {
        let mut registry = Registry::builtin();
        registry.register(crate::runner::RunnerProfile {
            language: "raw".into(),
            extension: "raw".into(),
            source_file: "main.raw".into(),
            compile: None,
            run: vec!["cat".into(), "{file}".into()],
            session: None,
            oom_patterns: vec![],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        });
        let executor = Executor::with_options(registry, std::env::temp_dir(), 2);
        // the file name does not match the profile convention; the lone
        // file still resolves as {file}
        let program = TestProgram {
            files: [("payload.txt".to_string(), "plugin says hi".to_string())]
                .into_iter()
                .collect(),
            language: Language::Plugin("raw".to_string()),
            needs_compile: false,
            run_stdin: None,
            entry_hint: None,
        };
        let result = executor.run_code(&RunSpec::new(program));
        assert_eq!(result.status, RunStatus::Finished);
        assert_eq!(result.stdout, "plugin says hi");
    }

    #[test]
    fn workdir_removed_after_run() {
        let scratch = tempfile::tempdir().unwrap();
        let executor = Executor::with_options(Registry::builtin(), scratch.path().to_path_buf(), 2);
        let result = executor.run_code(&python_spec("open(\"out.txt\", \"w\").write(\"data\")"));
        assert_eq!(result.status, RunStatus::Finished);
        let leftovers: Vec<_> = std::fs::read_dir(scratch.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .collect();
        assert!(leftovers.is_empty(), "scratch not cleaned: {leftovers:?}");
    }

    #[test]
    fn environment_is_scrubbed() {
        std::env::set_var("EVALBOX_SECRET_FOR_TEST", "leaky");
        let result = executor().run_code(&python_spec(
            "import os; print(os.environ.get(\"EVALBOX_SECRET_FOR_TEST\", \"clean\"))",
        ));
        assert_eq!(result.stdout, "clean\n");
    }

    #[test]
    fn concurrent_runs_stay_isolated() {
        let executor = executor();
        let handles: Vec<_> = (0..16)
            .map(|i| {
                let executor = executor.clone();
                std::thread::spawn(move || {
                    let code = format!(
                        "with open(\"out.txt\", \"w\") as f: f.write(\"payload-{i}\")\n\
                         print(open(\"out.txt\").read())"
                    );
                    let result = executor.run_code(&python_spec(&code));
                    (i, result)
                })
            })
            .collect();
        for handle in handles {
            let (i, result) = handle.join().unwrap();
            assert_eq!(result.status, RunStatus::Finished, "run {i}");
            assert_eq!(result.stdout, format!("payload-{i}\n"), "run {i}");
        }
    }

    #[test]
    fn deterministic_program_reproduces() {
        let spec = python_spec("print(sum(range(100)))");
        let executor = executor();
        let a = executor.run_code(&spec);
        let b = executor.run_code(&spec);
        assert_eq!(
            (a.status, a.exit_code, &a.stdout),
            (b.status, b.exit_code, &b.stdout)
        );
    }

    #[test]
    fn zero_limit_rejected() {
        let mut spec = python_spec("print(1)");
        spec.limits.wall_ms = 0;
        let result = executor().run_code(&spec);
        assert_eq!(result.status, RunStatus::SetupError);
    }
}
