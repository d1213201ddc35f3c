//! Renders the attribution table of a finished run.

use std::fmt::Write as _;
use std::path::Path;

use crate::attribution::{self, AttributionReport, AttributionRow};
use crate::commands::{Manifest, MANIFEST};
use crate::error::{CliError, Result};
use crate::format::{sig, HASH_COMMENT};

fn corrupt(path: &Path, reason: impl std::fmt::Display) -> CliError {
    CliError::CorruptRun {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| corrupt(path, e))
}

/// Hash recorded in an output file, `None` for files that carry none.
fn recorded_hash(path: &Path) -> Result<Option<String>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let text = read_text(path)?;
            let first = text.lines().next().unwrap_or("");
            first
                .strip_prefix(HASH_COMMENT)
                .map(|h| Some(h.trim().to_string()))
                .ok_or_else(|| corrupt(path, "missing config hash line"))
        }
        Some("json") => {
            let value: serde_json::Value =
                serde_json::from_str(&read_text(path)?).map_err(|e| corrupt(path, e))?;
            value
                .get("config_hash")
                .and_then(|h| h.as_str())
                .map(|h| Some(h.to_string()))
                .ok_or_else(|| corrupt(path, "missing config_hash field"))
        }
        _ => Ok(None),
    }
}

fn read_csv_rows(path: &Path) -> Result<Vec<AttributionRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| corrupt(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<AttributionRow>, _>>()
        .map_err(|e| corrupt(path, e))
}

/// Loads a run directory, checking that every output comes from the same
/// config and seed.
pub fn load_run(dir: &Path) -> Result<(Manifest, Vec<AttributionRow>)> {
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.is_file() {
        return Err(CliError::MissingRun(dir.to_path_buf()));
    }
    let manifest: Manifest = serde_json::from_str(&read_text(&manifest_path)?)
        .map_err(|e| corrupt(&manifest_path, e))?;

    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| corrupt(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    for path in &entries {
        if let Some(hash) = recorded_hash(path)? {
            if hash != manifest.config_hash {
                return Err(CliError::MixedHashes {
                    dir: dir.to_path_buf(),
                    first: manifest.config_hash.clone(),
                    second: hash,
                    file: path
                        .file_name()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned(),
                });
            }
        }
    }

    let csv_path = dir.join(attribution::FILE_CSV);
    let json_path = dir.join(attribution::FILE_JSON);
    let rows = if csv_path.is_file() {
        read_csv_rows(&csv_path)?
    } else if json_path.is_file() {
        let report: AttributionReport =
            serde_json::from_str(&read_text(&json_path)?).map_err(|e| corrupt(&json_path, e))?;
        report.rows
    } else {
        return Err(corrupt(dir, "no attribution table"));
    };
    Ok((manifest, rows))
}

/// Text table sorted by `Z` ascending, followed by one sentence per event.
pub fn render(manifest: &Manifest, rows: &[AttributionRow]) -> String {
    let mut rows = rows.to_vec();
    attribution::sort_rows(&mut rows);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} run, seed {}, config {}",
        manifest.subcommand,
        manifest.seed,
        &manifest.config_hash[..manifest.config_hash.len().min(12)]
    );
    if rows.is_empty() {
        out.push_str("no scored events\n");
        return out;
    }

    let header = [
        "event",
        "horizon",
        "z_bits",
        "std_error",
        "method",
        "class",
        "description",
    ];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.event.clone(),
                r.horizon.to_string(),
                sig(r.z_bits),
                sig(r.std_error),
                r.method.to_string(),
                r.class.to_string(),
                r.description.clone(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |fields: &[&str]| {
        let padded: Vec<String> = fields
            .iter()
            .zip(&widths)
            .map(|(f, &w)| format!("{f:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(&header));
    let _ = writeln!(
        out,
        "{}",
        line(
            &widths
                .map(|w| "-".repeat(w))
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        )
    );
    for row in &cells {
        let _ = writeln!(
            out,
            "{}",
            line(&row.iter().map(String::as_str).collect::<Vec<_>>())
        );
    }
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "event {} changed uncertainty by {} bits at horizon {} \u{2014} {}",
            r.event,
            sig(r.z_bits),
            r.horizon,
            r.class
        );
    }
    out
}

pub fn report(dir: &Path) -> Result<String> {
    let (manifest, rows) = load_run(dir)?;
    Ok(render(&manifest, &rows))
}
