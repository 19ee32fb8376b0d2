//! Minimal Landlock binding: deny filesystem writes outside an allow-list.
//!
//! The ruleset is built in the parent; the child only issues `prctl` and
//! `landlock_restrict_self`, both async-signal-safe.

use std::ffi::CString;
use std::os::fd::{AsRawFd, FromRawFd, OwnedFd};
use std::os::unix::ffi::OsStrExt;
use std::path::Path;

const SYS_CREATE_RULESET: libc::c_long = 444;
const SYS_ADD_RULE: libc::c_long = 445;
const SYS_RESTRICT_SELF: libc::c_long = 446;
const CREATE_RULESET_VERSION: u32 = 1;
const RULE_PATH_BENEATH: libc::c_int = 1;

const WRITE_FILE: u64 = 1 << 1;
const REMOVE_DIR: u64 = 1 << 4;
const REMOVE_FILE: u64 = 1 << 5;
const MAKE_CHAR: u64 = 1 << 6;
const MAKE_DIR: u64 = 1 << 7;
const MAKE_REG: u64 = 1 << 8;
const MAKE_SOCK: u64 = 1 << 9;
const MAKE_FIFO: u64 = 1 << 10;
const MAKE_BLOCK: u64 = 1 << 11;
const MAKE_SYM: u64 = 1 << 12;
const REFER: u64 = 1 << 13;
const TRUNCATE: u64 = 1 << 14;

#[repr(C)]
struct RulesetAttr {
    handled_access_fs: u64,
}

#[repr(C, packed)]
struct PathBeneathAttr {
    allowed_access: u64,
    parent_fd: i32,
}

/// A prepared write-restricting ruleset.
#[derive(Debug)]
pub struct WriteJail {
    fd: OwnedFd,
}

fn abi_version() -> Option<i64> {
    let v = unsafe {
        libc::syscall(
            SYS_CREATE_RULESET,
            std::ptr::null::<RulesetAttr>(),
            0usize,
            CREATE_RULESET_VERSION,
        )
    };
    (v > 0).then_some(v)
}

fn write_rights(abi: i64) -> u64 {
    let mut rights = WRITE_FILE
        | REMOVE_DIR
        | REMOVE_FILE
        | MAKE_CHAR
        | MAKE_DIR
        | MAKE_REG
        | MAKE_SOCK
        | MAKE_FIFO
        | MAKE_BLOCK
        | MAKE_SYM;
    if abi >= 2 {
        rights |= REFER;
    }
    if abi >= 3 {
        rights |= TRUNCATE;
    }
    rights
}

impl WriteJail {
    /// Build a ruleset allowing every write right beneath `writable`, and
    /// plain file writes (e.g. `/dev/null`) beneath each of `devices`.
    /// Returns `None` when the kernel does not support Landlock.
    pub fn new(writable: &Path, devices: &[&Path]) -> Option<WriteJail> {
        let abi = abi_version()?;
        let handled = write_rights(abi);
        let attr = RulesetAttr {
            handled_access_fs: handled,
        };
        let raw = unsafe {
            libc::syscall(
                SYS_CREATE_RULESET,
                &attr as *const RulesetAttr,
                std::mem::size_of::<RulesetAttr>(),
                0u32,
            )
        };
        if raw < 0 {
            return None;
        }
        let fd = unsafe { OwnedFd::from_raw_fd(raw as i32) };
        let jail = WriteJail { fd };
        jail.allow(writable, handled)?;
        for dev in devices {
            // A missing device directory is not fatal.
            let _ = jail.allow(dev, WRITE_FILE | if abi >= 3 { TRUNCATE } else { 0 });
        }
        Some(jail)
    }

    fn allow(&self, path: &Path, rights: u64) -> Option<()> {
        let c = CString::new(path.as_os_str().as_bytes()).ok()?;
        let dir = unsafe { libc::open(c.as_ptr(), libc::O_PATH | libc::O_CLOEXEC) };
        if dir < 0 {
            return None;
        }
        let dir = unsafe { OwnedFd::from_raw_fd(dir) };
        let rule = PathBeneathAttr {
            allowed_access: rights,
            parent_fd: dir.as_raw_fd(),
        };
        let rc = unsafe {
            libc::syscall(
                SYS_ADD_RULE,
                self.fd.as_raw_fd(),
                RULE_PATH_BENEATH,
                &rule as *const PathBeneathAttr,
                0u32,
            )
        };
        (rc == 0).then_some(())
    }

    /// Apply the ruleset to the calling process. Only call between fork and exec.
    pub fn enforce(&self) -> std::io::Result<()> {
        unsafe {
            if libc::prctl(libc::PR_SET_NO_NEW_PRIVS, 1, 0, 0, 0) != 0 {
                return Err(std::io::Error::last_os_error());
            }
            if libc::syscall(SYS_RESTRICT_SELF, self.fd.as_raw_fd(), 0u32) != 0 {
                return Err(std::io::Error::last_os_error());
            }
        }
        Ok(())
    }
}

pub fn supported() -> bool {
    abi_version().is_some()
}
