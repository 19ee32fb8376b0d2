//! Resource-limited execution of runner processes in per-phase scratch
//! directories.
//!
//! Each run gets its own process group, rlimits (address space, CPU, process
//! count, file size), a cleared environment and a wall-clock deadline. When
//! the engine runs as root, untrusted phases additionally run under a
//! throwaway uid in a fresh network namespace. Where the kernel supports
//! Landlock, writes outside the scratch directory are denied.

#[cfg(target_os = "linux")]
mod landlock;

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read};
use std::os::unix::fs::PermissionsExt;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::runner;
use crate::taskstore::TaskPackage;

pub const ENV_SCRATCH_DIR: &str = "GRADER_SCRATCH_DIR";
pub const ENV_KEEP_SCRATCH: &str = "GRADER_KEEP_SCRATCH";

/// Files that never enter a student scratch directory.
pub const PRIVATE_FILES: &[&str] = &["solution.json", "test.json", "teacher.py", "manifest.json"];

/// Cap on any single file written by the child.
const MAX_FILE_BYTES: u64 = 64 << 20;

const SAFE_PATH: &str = "/usr/local/bin:/usr/bin:/bin";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    pub wall_time: Duration,
    pub memory: u64,
    pub output_bytes: usize,
    pub max_processes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            wall_time: Duration::from_secs(30),
            memory: 512 << 20,
            output_bytes: 16_384,
            max_processes: 16,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), SandboxError> {
        if self.wall_time.is_zero() || self.memory == 0 || self.output_bytes == 0 || self.max_processes == 0 {
            return Err(SandboxError::Setup("all limits must be strictly positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Timeout,
    Overflow,
}

#[derive(Debug, Clone)]
pub struct SandboxOutcome {
    pub status: RunStatus,
    /// Exit code when the process exited normally.
    pub exit_code: Option<i32>,
    /// Terminating signal, if any.
    pub signal: Option<i32>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub duration: Duration,
}

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("sandbox setup failed: {0}")]
    Setup(String),
    #[error("sandbox I/O error: {0}")]
    Io(#[from] io::Error),
}

fn setup(msg: impl Into<String>) -> SandboxError {
    SandboxError::Setup(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Student,
    Teacher,
}

/// Identity an untrusted child switches to before exec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunAs {
    pub uid: u32,
    pub gid: u32,
}

/// A fresh per-phase working directory, removed on drop unless kept.
#[derive(Debug)]
pub struct ScratchDir {
    path: PathBuf,
    phase: Phase,
    run_as: Option<RunAs>,
    keep: bool,
}

impl ScratchDir {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn run_as(&self) -> Option<RunAs> {
        self.run_as
    }

    /// Names of the regular files currently in the directory.
    pub fn listing(&self) -> io::Result<BTreeSet<String>> {
        list_dir(&self.path)
    }

    pub fn read(&self, name: &str) -> io::Result<Vec<u8>> {
        fs::read(self.path.join(name))
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        if !self.keep {
            let _ = fs::remove_dir_all(&self.path);
        }
    }
}

fn list_dir(dir: &Path) -> io::Result<BTreeSet<String>> {
    let mut names = BTreeSet::new();
    for entry in fs::read_dir(dir)? {
        names.insert(entry?.file_name().to_string_lossy().into_owned());
    }
    Ok(names)
}

/// A file placed in a scratch directory.
#[derive(Debug, Clone)]
pub struct ScratchFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl ScratchFile {
    pub fn new(name: impl Into<String>, contents: impl Into<Vec<u8>>) -> Self {
        ScratchFile {
            name: name.into(),
            contents: contents.into(),
        }
    }
}

#[derive(Debug)]
pub struct Sandbox {
    scratch_root: PathBuf,
    keep_scratch: bool,
    drop_privileges: bool,
    uid_base: u32,
    uid_count: u32,
    next_uid: AtomicU32,
}

impl Default for Sandbox {
    fn default() -> Self {
        Sandbox::new(std::env::temp_dir())
    }
}

impl Sandbox {
    pub fn new(scratch_root: impl Into<PathBuf>) -> Self {
        Sandbox {
            scratch_root: scratch_root.into(),
            keep_scratch: false,
            drop_privileges: unsafe { libc::geteuid() } == 0,
            uid_base: 50_000,
            uid_count: 10_000,
            next_uid: AtomicU32::new(0),
        }
    }

    /// Configure from `GRADER_SCRATCH_DIR` and `GRADER_KEEP_SCRATCH`.
    pub fn from_env() -> Self {
        let root = std::env::var_os(ENV_SCRATCH_DIR)
            .map(PathBuf::from)
            .unwrap_or_else(std::env::temp_dir);
        let mut sb = Sandbox::new(root);
        sb.keep_scratch = std::env::var(ENV_KEEP_SCRATCH).is_ok_and(|v| v == "1");
        sb
    }

    pub fn keep_scratch(mut self, keep: bool) -> Self {
        self.keep_scratch = keep;
        self
    }

    /// Whether untrusted phases switch to a throwaway uid (only possible as root).
    pub fn drops_privileges(&self) -> bool {
        self.drop_privileges
    }

    pub fn scratch_root(&self) -> &Path {
        &self.scratch_root
    }

    fn allocate_identity(&self) -> Option<RunAs> {
        if !self.drop_privileges {
            return None;
        }
        let n = self.next_uid.fetch_add(1, Ordering::Relaxed) % self.uid_count;
        let id = self.uid_base + n;
        Some(RunAs { uid: id, gid: id })
    }

    fn fresh_dir(&self, phase: Phase) -> Result<PathBuf, SandboxError> {
        fs::create_dir_all(&self.scratch_root)
            .map_err(|e| setup(format!("cannot create scratch root {}: {e}", self.scratch_root.display())))?;
        let prefix = match phase {
            Phase::Student => "student-",
            Phase::Teacher => "teacher-",
        };
        let dir = tempfile::Builder::new()
            .prefix(prefix)
            .tempdir_in(&self.scratch_root)
            .map_err(|e| setup(format!("cannot create scratch directory: {e}")))?;
        Ok(dir.keep())
    }

    /// Create a scratch directory for one phase of a grading run.
    ///
    /// Both phases receive the runner harness and the public function
    /// signature (`spec.json`); the teacher phase also receives the teacher
    /// source from the package. `inputs` supplies the rest (the filled
    /// student source, `data.csv`). Private task files are refused for the
    /// student phase.
    pub fn make_scratch(
        &self,
        task: &TaskPackage,
        phase: Phase,
        inputs: &[ScratchFile],
    ) -> Result<ScratchDir, SandboxError> {
        let lang = task.manifest.language;
        let mut files: Vec<ScratchFile> = vec![
            ScratchFile::new(runner::HARNESS_FILE, runner::harness_source(lang)),
            ScratchFile::new(runner::SPEC_FILE, task.public_spec_json()),
        ];
        if phase == Phase::Teacher {
            files.push(ScratchFile::new(lang.source_file(true), task.teacher_source.clone()));
        }
        files.extend(inputs.iter().cloned());

        let mut seen = BTreeSet::new();
        for f in &files {
            if f.name.is_empty() || f.name.contains('/') || f.name.starts_with('.') {
                return Err(setup(format!("invalid scratch file name `{}`", f.name)));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(setup(format!("duplicate scratch file `{}`", f.name)));
            }
            if phase == Phase::Student && PRIVATE_FILES.contains(&f.name.as_str()) {
                return Err(setup(format!("`{}` must not be visible to student code", f.name)));
            }
        }

        let path = self.fresh_dir(phase)?;
        let run_as = match phase {
            Phase::Student => self.allocate_identity(),
            Phase::Teacher => None,
        };
        let scratch = ScratchDir {
            path,
            phase,
            run_as,
            keep: self.keep_scratch,
        };
        for f in &files {
            let p = scratch.path.join(&f.name);
            fs::write(&p, &f.contents)?;
            fs::set_permissions(&p, fs::Permissions::from_mode(0o644))?;
        }
        if let Some(id) = run_as {
            chown(&scratch.path, id)?;
        }
        Ok(scratch)
    }

    /// Run `command` inside `scratch` under `limits`.
    ///
    /// `visible_files` must list exactly the files present in the directory
    /// before the run. A child that fails (nonzero exit, killed by a signal
    /// after exceeding memory) is a normal [`RunStatus::Completed`] outcome;
    /// only failures to set the run up are errors.
    pub fn execute(
        &self,
        command: &[String],
        scratch: &ScratchDir,
        limits: &Limits,
        visible_files: &[&str],
    ) -> Result<SandboxOutcome, SandboxError> {
        limits.validate()?;
        let program = command.first().ok_or_else(|| setup("empty command"))?;
        let present = scratch.listing()?;
        let expected: BTreeSet<String> = visible_files.iter().map(|s| s.to_string()).collect();
        if present != expected {
            return Err(setup(format!(
                "scratch directory holds {present:?}, expected exactly {expected:?}"
            )));
        }

        let mut cmd = Command::new(program);
        cmd.args(&command[1..])
            .current_dir(&scratch.path)
            .env_clear()
            .env("PATH", SAFE_PATH)
            .env("LANG", "C.UTF-8")
            .env("LC_ALL", "C.UTF-8")
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());

        #[cfg(target_os = "linux")]
        let jail = landlock::WriteJail::new(&scratch.path, &[Path::new("/dev")]);
        let child_limits = ChildLimits::from(limits);
        let run_as = scratch.run_as;
        unsafe {
            cmd.pre_exec(move || {
                child_limits.apply()?;
                if let Some(id) = run_as {
                    #[cfg(target_os = "linux")]
                    {
                        // Best effort: fails without CAP_SYS_ADMIN.
                        let _ = libc::unshare(libc::CLONE_NEWNET);
                    }
                    #[cfg(target_os = "linux")]
                    if let Some(j) = &jail {
                        j.enforce()?;
                    }
                    if libc::setgroups(0, std::ptr::null()) != 0
                        || libc::setgid(id.gid) != 0
                        || libc::setuid(id.uid) != 0
                    {
                        return Err(io::Error::last_os_error());
                    }
                } else {
                    #[cfg(target_os = "linux")]
                    if let Some(j) = &jail {
                        j.enforce()?;
                    }
                }
                Ok(())
            });
        }

        let start = Instant::now();
        let mut child = cmd
            .spawn()
            .map_err(|e| setup(format!("cannot start `{program}`: {e}")))?;
        let pgid = child.id() as libc::pid_t;

        let overflow = Arc::new(AtomicBool::new(false));
        let stdout = capture(child.stdout.take(), limits.output_bytes, overflow.clone());
        let stderr = capture(child.stderr.take(), limits.output_bytes, overflow.clone());

        let (status, exit) = loop {
            if let Some(exit) = child.try_wait()? {
                break (RunStatus::Completed, Some(exit));
            }
            if overflow.load(Ordering::Relaxed) {
                kill_group(pgid);
                break (RunStatus::Overflow, None);
            }
            if start.elapsed() >= limits.wall_time {
                kill_group(pgid);
                break (RunStatus::Timeout, None);
            }
            thread::sleep(Duration::from_millis(5));
        };
        // Stragglers forked by the child go too.
        kill_group(pgid);
        let exit = match exit {
            Some(e) => e,
            None => child.wait()?,
        };
        let duration = start.elapsed();

        let (stdout, out_over) = stdout.collect();
        let (stderr, err_over) = stderr.collect();
        let status = if status == RunStatus::Completed && (out_over || err_over) {
            RunStatus::Overflow
        } else {
            status
        };

        Ok(SandboxOutcome {
            status,
            exit_code: exit.code(),
            signal: exit.signal(),
            stdout,
            stderr,
            duration,
        })
    }
}

fn chown(path: &Path, id: RunAs) -> io::Result<()> {
    std::os::unix::fs::chown(path, Some(id.uid), Some(id.gid))?;
    for entry in fs::read_dir(path)? {
        std::os::unix::fs::chown(entry?.path(), Some(id.uid), Some(id.gid))?;
    }
    Ok(())
}

fn kill_group(pgid: libc::pid_t) {
    unsafe {
        libc::killpg(pgid, libc::SIGKILL);
    }
}

#[derive(Debug, Clone, Copy)]
struct ChildLimits {
    memory: u64,
    cpu_secs: u64,
    nproc: u64,
}

impl From<&Limits> for ChildLimits {
    fn from(l: &Limits) -> Self {
        ChildLimits {
            memory: l.memory,
            cpu_secs: l.wall_time.as_secs() + 1,
            nproc: l.max_processes,
        }
    }
}

impl ChildLimits {
    /// Runs between fork and exec: raw syscalls only.
    fn apply(&self) -> io::Result<()> {
        unsafe {
            if libc::setpgid(0, 0) != 0 {
                return Err(io::Error::last_os_error());
            }
        }
        set_rlimit(libc::RLIMIT_AS, self.memory)?;
        set_rlimit(libc::RLIMIT_CPU, self.cpu_secs)?;
        set_rlimit(libc::RLIMIT_NPROC, self.nproc)?;
        set_rlimit(libc::RLIMIT_FSIZE, MAX_FILE_BYTES)?;
        set_rlimit(libc::RLIMIT_CORE, 0)?;
        Ok(())
    }
}

#[cfg(target_os = "linux")]
type Resource = libc::__rlimit_resource_t;
#[cfg(not(target_os = "linux"))]
type Resource = libc::c_int;

fn set_rlimit(resource: Resource, value: u64) -> io::Result<()> {
    let lim = libc::rlimit {
        rlim_cur: value as libc::rlim_t,
        rlim_max: value as libc::rlim_t,
    };
    if unsafe { libc::setrlimit(resource, &lim) } != 0 {
        return Err(io::Error::last_os_error());
    }
    Ok(())
}

struct Capture {
    rx: Option<mpsc::Receiver<(Vec<u8>, bool)>>,
}

impl Capture {
    /// Captured bytes and whether the cap was exceeded. A reader stuck on a
    /// pipe held open by an escaped grandchild is abandoned after a grace period.
    fn collect(self) -> (Vec<u8>, bool) {
        self.rx
            .and_then(|rx| rx.recv_timeout(Duration::from_secs(1)).ok())
            .unwrap_or_default()
    }
}

fn capture<R: Read + Send + 'static>(pipe: Option<R>, cap: usize, overflow: Arc<AtomicBool>) -> Capture {
    let Some(mut pipe) = pipe else {
        return Capture { rx: None };
    };
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut over = false;
        let mut buf = [0u8; 8192];
        loop {
            match pipe.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap - kept.len();
                    if n > room {
                        kept.extend_from_slice(&buf[..room]);
                        over = true;
                        overflow.store(true, Ordering::Relaxed);
                        break;
                    }
                    kept.extend_from_slice(&buf[..n]);
                }
            }
        }
        let _ = tx.send((kept, over));
    });
    Capture { rx: Some(rx) }
}

/// Whether writes outside the scratch directory can be denied on this host.
pub fn write_confinement_supported() -> bool {
    #[cfg(target_os = "linux")]
    {
        landlock::supported()
    }
    #[cfg(not(target_os = "linux"))]
    {
        false
    }
}
