//! Sequential-cell execution: one persistent interpreter, shared state.
//!
//! The interpreter child runs a small driver that speaks a length-prefixed
//! protocol on its standard streams: each frame is an 8-digit lowercase
//! hex byte count followed by a UTF-8 JSON payload. The parent sends
//! `{"source": ...}` cells; the driver answers `{"exit", "stdout",
//! "stderr"}` per cell, capturing only that cell's output.
//!
//! Cells are never re-executed: state accumulates in the live interpreter,
//! so replaying earlier cells would repeat their side effects.

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::executor::{Executor, Limits, RunResult, RunStatus};
use crate::lang::Language;
use crate::runner::SessionKind;

const PYTHON_DRIVER: &str = r#"
import io
import json
import sys
import traceback

raw_in = sys.stdin.buffer
raw_out = sys.stdout.buffer
namespace = {"__name__": "__main__"}

while True:
    header = raw_in.read(8)
    if len(header) < 8:
        break
    length = int(header, 16)
    payload = raw_in.read(length)
    source = json.loads(payload)["source"]
    out = io.StringIO()
    err = io.StringIO()
    sys.stdout = out
    sys.stderr = err
    exit_code = 0
    try:
        exec(compile(source, "<cell>", "exec"), namespace)
    except SystemExit as e:
        if e.code is None:
            exit_code = 0
        elif isinstance(e.code, int):
            exit_code = e.code
        else:
            exit_code = 1
    except BaseException:
        traceback.print_exc()
        exit_code = 1
    finally:
        sys.stdout = sys.__stdout__
        sys.stderr = sys.__stderr__
    reply = json.dumps(
        {"exit": exit_code, "stdout": out.getvalue(), "stderr": err.getvalue()}
    ).encode("utf-8")
    raw_out.write(b"%08x" % len(reply))
    raw_out.write(reply)
    raw_out.flush()
"#;

const NODE_DRIVER: &str = r#"
'use strict';
let pending = Buffer.alloc(0);
const realWrite = process.stdout.write.bind(process.stdout);
const realErrWrite = process.stderr.write.bind(process.stderr);

function runCell(source) {
  let out = '';
  let err = '';
  process.stdout.write = (chunk) => { out += chunk; return true; };
  process.stderr.write = (chunk) => { err += chunk; return true; };
  let exit = 0;
  try {
    (0, eval)(source);
  } catch (e) {
    err += (e && e.stack ? e.stack : String(e)) + '\n';
    exit = 1;
  }
  process.stdout.write = realWrite;
  process.stderr.write = realErrWrite;
  const reply = Buffer.from(JSON.stringify({ exit, stdout: out, stderr: err }), 'utf8');
  realWrite(reply.length.toString(16).padStart(8, '0'));
  realWrite(reply);
}

process.stdin.on('data', (chunk) => {
  pending = Buffer.concat([pending, chunk]);
  for (;;) {
    if (pending.length < 8) return;
    const length = parseInt(pending.subarray(0, 8).toString('ascii'), 16);
    if (pending.length < 8 + length) return;
    const payload = pending.subarray(8, 8 + length).toString('utf8');
    pending = pending.subarray(8 + length);
    runCell(JSON.parse(payload).source);
  }
});
process.stdin.on('end', () => process.exit(0));
"#;

#[derive(Debug, Deserialize)]
struct CellReply {
    exit: i32,
    stdout: String,
    stderr: String,
}

/// Execute cells in order in one interpreter. Result `i` reflects only
/// cell `i`'s output. A failing cell halts the rest: their results are
/// `SetupError` with reason "prior cell failed".
pub fn run_cells(
    executor: &Executor,
    cells: &[String],
    language: &Language,
    limits: &Limits,
) -> Result<Vec<RunResult>> {
    let profile = executor
        .registry()
        .get(language)
        .ok_or_else(|| Error::UnsupportedLanguage(language.name().to_string()))?;
    let kind = profile
        .session
        .ok_or_else(|| Error::SessionUnsupported(language.name().to_string()))?;
    if let Err(msg) = limits.validate() {
        return Err(Error::Config(msg));
    }

    let (driver_file, driver_source, interpreter) = match kind {
        SessionKind::Python => ("driver.py", PYTHON_DRIVER, "python3"),
        SessionKind::Node => ("driver.js", NODE_DRIVER, "node"),
    };

    let _slot = executor.acquire_slot();
    let workdir = tempfile::Builder::new()
        .prefix("evalbox-session-")
        .tempdir_in(executor.scratch_root())
        .map_err(|e| Error::io(executor.scratch_root(), e))?;
    let driver_path = workdir.path().join(driver_file);
    std::fs::write(&driver_path, driver_source).map_err(|e| Error::io(&driver_path, e))?;

    let mut session =
        SessionChild::spawn(interpreter, driver_file, workdir.path(), limits, profile)?;

    let mut results = Vec::with_capacity(cells.len());
    let mut halted = false;
    for cell in cells {
        if halted {
            results.push(RunResult::setup_error("prior cell failed"));
            continue;
        }
        let result = session.run_cell(cell, limits);
        let failed = !result.success();
        results.push(result);
        if failed {
            halted = true;
        }
    }
    session.shutdown();
    Ok(results)
}

struct SessionChild {
    child: Child,
    stdin: std::process::ChildStdin,
    frames: mpsc::Receiver<Vec<u8>>,
}

impl SessionChild {
    fn spawn(
        interpreter: &str,
        driver_file: &str,
        workdir: &std::path::Path,
        limits: &Limits,
        profile: &crate::runner::RunnerProfile,
    ) -> Result<SessionChild> {
        use std::os::unix::process::CommandExt;

        let mut command = Command::new(interpreter);
        command
            .arg(driver_file)
            .current_dir(workdir)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null());
        let path = std::env::var("PATH").unwrap_or_else(|_| "/usr/bin:/bin".into());
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

        let cpu_secs = limits.cpu_ms.div_ceil(1000).max(1);
        let memory = limits.memory_bytes + profile.rlimit_as_slack_bytes;
        let processes = limits.max_processes;
        unsafe {
            command.pre_exec(move || {
                if libc::setsid() == -1 {
                    return Err(std::io::Error::last_os_error());
                }
                let set = |resource, value: u64| {
                    let limit = libc::rlimit {
                        rlim_cur: value,
                        rlim_max: value,
                    };
                    libc::setrlimit(resource, &limit);
                };
                set(libc::RLIMIT_CPU, cpu_secs + 1);
                set(libc::RLIMIT_AS, memory);
                set(libc::RLIMIT_NPROC, processes);
                set(libc::RLIMIT_CORE, 0);
                libc::unshare(libc::CLONE_NEWNET);
                Ok(())
            });
        }

        let mut child = command
            .spawn()
            .map_err(|e| Error::Config(format!("failed to start session interpreter: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");

        let (sender, frames) = mpsc::channel();
        std::thread::spawn(move || read_frames(stdout, sender));

        Ok(SessionChild {
            child,
            stdin,
            frames,
        })
    }

    fn run_cell(&mut self, source: &str, limits: &Limits) -> RunResult {
        let start = Instant::now();
        let payload = serde_json::json!({ "source": source }).to_string();
        let frame = format!("{:08x}{payload}", payload.len());
        if self.stdin.write_all(frame.as_bytes()).is_err() || self.stdin.flush().is_err() {
            return RunResult::setup_error("session interpreter closed its input");
        }

        match self
            .frames
            .recv_timeout(Duration::from_millis(limits.wall_ms))
        {
            Ok(bytes) => {
                let reply: CellReply = match serde_json::from_slice(&bytes) {
                    Ok(reply) => reply,
                    Err(e) => {
                        return RunResult::setup_error(format!("malformed session frame: {e}"))
                    }
                };
                let cap = limits.max_output_bytes as usize;
                let over = reply.stdout.len() > cap || reply.stderr.len() > cap;
                RunResult {
                    status: if over {
                        RunStatus::OutputLimit
                    } else {
                        RunStatus::Finished
                    },
                    exit_code: if over { None } else { Some(reply.exit) },
                    stdout: truncate_utf8(reply.stdout, cap),
                    stderr: truncate_utf8(reply.stderr, cap),
                    duration_ms: start.elapsed().as_millis() as u64,
                    compile: None,
                    setup_message: None,
                }
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                self.kill();
                RunResult {
                    status: RunStatus::TimeLimit,
                    exit_code: None,
                    stdout: String::new(),
                    stderr: String::new(),
                    duration_ms: start.elapsed().as_millis() as u64,
                    compile: None,
                    setup_message: None,
                }
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => {
                self.kill();
                RunResult::setup_error("session interpreter terminated unexpectedly")
            }
        }
    }

    fn kill(&mut self) {
        let pid = self.child.id() as i32;
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
            libc::kill(pid, libc::SIGKILL);
        }
        let _ = self.child.wait();
    }

    fn shutdown(mut self) {
        // closing stdin lets a healthy driver exit on its own
        drop(self.stdin);
        std::thread::sleep(Duration::from_millis(20));
        match self.child.try_wait() {
            Ok(Some(_)) => {}
            _ => {
                let pid = self.child.id() as i32;
                unsafe {
                    libc::kill(-pid, libc::SIGKILL);
                    libc::kill(pid, libc::SIGKILL);
                }
                let _ = self.child.wait();
            }
        }
    }
}

fn read_frames(mut stdout: impl Read, sender: mpsc::Sender<Vec<u8>>) {
    let mut header = [0u8; 8];
    loop {
        if read_exact_or_eof(&mut stdout, &mut header).is_err() {
            return;
        }
        let text = match std::str::from_utf8(&header) {
            Ok(t) => t,
            Err(_) => return,
        };
        let length = match usize::from_str_radix(text, 16) {
            Ok(n) => n,
            Err(_) => return,
        };
        let mut payload = vec![0u8; length];
        if read_exact_or_eof(&mut stdout, &mut payload).is_err() {
            return;
        }
        if sender.send(payload).is_err() {
            return;
        }
    }
}

fn read_exact_or_eof(source: &mut impl Read, buf: &mut [u8]) -> std::io::Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => return Err(std::io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => filled += n,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn truncate_utf8(mut text: String, cap: usize) -> String {
    if text.len() <= cap {
        return text;
    }
    let mut cut = cap;
    while cut > 0 && !text.is_char_boundary(cut) {
        cut -= 1;
    }
    text.truncate(cut);
    text
}
