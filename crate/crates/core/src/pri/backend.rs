//! Refinement backend selection and the external-process file protocol.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

use super::format::{read_gfb, write_cdm};
use super::{refine_classical, CoarseDepthMap, Gfb};

/// How coarse depth maps become frame buffers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinerBackend {
    Classical,
    /// Runs `exe <coarse.cdm1> <out.gfb1>` inside `workdir`.
    External { exe: PathBuf, workdir: PathBuf },
}

impl RefinerBackend {
    /// Parses `classical` or `external:<path>`; the working directory of an
    /// external backend defaults to the system temp directory.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "classical" => Ok(RefinerBackend::Classical),
            s => match s.strip_prefix("external:") {
                Some(exe) if !exe.is_empty() => Ok(RefinerBackend::External {
                    exe: PathBuf::from(exe),
                    workdir: std::env::temp_dir(),
                }),
                _ => Err(Error::Config(format!(
                    "backend must be 'classical' or 'external:<path>', got '{s}'"
                ))),
            },
        }
    }
}

impl std::fmt::Display for RefinerBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RefinerBackend::Classical => write!(f, "classical"),
            RefinerBackend::External { exe, .. } => write!(f, "external:{}", exe.display()),
        }
    }
}

/// Refines `coarse` with the chosen backend. External failures surface as
/// [`Error::Backend`]; there is no fallback to the classical path.
pub fn refine(backend: &RefinerBackend, coarse: &CoarseDepthMap) -> Result<Gfb> {
    match backend {
        RefinerBackend::Classical => Ok(refine_classical(coarse)),
        RefinerBackend::External { exe, workdir } => refine_external(exe, workdir, coarse),
    }
}

static CALL_COUNTER: AtomicU64 = AtomicU64::new(0);

struct TempFiles(Vec<PathBuf>);

impl Drop for TempFiles {
    fn drop(&mut self) {
        for p in &self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn backend_error(message: impl Into<String>, stderr: impl Into<String>) -> Error {
    Error::Backend {
        message: message.into(),
        stderr: stderr.into(),
    }
}

fn refine_external(exe: &Path, workdir: &Path, coarse: &CoarseDepthMap) -> Result<Gfb> {
    if !exe.is_file() {
        return Err(backend_error(format!("executable {} not found", exe.display()), ""));
    }
    let exe = exe.canonicalize()?;
    let tag = format!(
        "pointsbr-{}-{}",
        std::process::id(),
        CALL_COUNTER.fetch_add(1, Ordering::Relaxed)
    );
    let input = workdir.join(format!("{tag}.cdm1"));
    let output = workdir.join(format!("{tag}.gfb1"));
    let _cleanup = TempFiles(vec![input.clone(), output.clone()]);
    write_cdm(&input, coarse)?;

    let run = Command::new(&exe)
        .arg(&input)
        .arg(&output)
        .current_dir(workdir)
        .output()
        .map_err(|e| backend_error(format!("could not start {}: {e}", exe.display()), ""))?;
    let stderr = String::from_utf8_lossy(&run.stderr).into_owned();
    if !run.status.success() {
        return Err(backend_error(format!("{} exited with {}", exe.display(), run.status), stderr));
    }
    let mut g = read_gfb(&output).map_err(|e| backend_error(format!("unusable reply: {e}"), stderr.clone()))?;

    let (cf, gf) = (&coarse.frame, &g.frame);
    if gf.width != cf.width || gf.height != cf.height {
        return Err(backend_error(
            format!(
                "reply is {}x{}, request was {}x{}",
                gf.width, gf.height, cf.width, cf.height
            ),
            stderr,
        ));
    }
    let same_frame = gf.origin == cf.origin
        && *gf.u == *cf.u
        && *gf.v == *cf.v
        && *gf.w == *cf.w
        && gf.pitch == cf.pitch;
    if !same_frame {
        return Err(backend_error("reply frame differs from the request frame", stderr));
    }
    g.frame = coarse.frame;

    for m in &mut g.mask {
        *m = if m.is_nan() { 0.0 } else { m.clamp(0.0, 1.0) };
    }
    for n in &mut g.normal {
        let len = n.norm();
        if len > 0.0 && len.is_finite() && (len - 1.0).abs() > 1e-6 {
            *n = *n / len;
        }
    }
    g.validate()
        .map_err(|reason| backend_error(format!("reply violates frame buffer invariants: {reason}"), stderr))?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_backend_specs() {
        assert_eq!(RefinerBackend::parse("classical").unwrap(), RefinerBackend::Classical);
        match RefinerBackend::parse("external:/bin/true").unwrap() {
            RefinerBackend::External { exe, .. } => assert_eq!(exe, PathBuf::from("/bin/true")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(RefinerBackend::parse("neural").is_err());
        assert!(RefinerBackend::parse("external:").is_err());
    }
}
