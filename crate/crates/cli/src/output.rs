use std::io::Write;
use std::path::PathBuf;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Directory used for outputs when `--out` is not given.
pub const OUT_DIR_ENV: &str = "JPSTATE_OUT_DIR";

/// Resolved destination: `--out`, else `$JPSTATE_OUT_DIR/<stem>.<ext>`, else stdout.
pub fn destination(cfg: &RunConfig, stem: &str, format: Format) -> Option<PathBuf> {
    cfg.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{stem}.{}", format.extension())))
    })
}

pub fn emit(dest: Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn json<S: serde::Serialize + ?Sized>(value: &S) -> Result<Vec<u8>, CliError> {
    let mut s = jpstate::export::to_json(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// CSV of float rows through the shared writer.
pub fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    jpstate::export::write_csv(&mut buf, header, rows)?;
    Ok(buf)
}

/// Collects the output of one of the core `write_csv` methods.
pub fn csv_with(f: impl FnOnce(&mut Vec<u8>) -> jpstate::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}
