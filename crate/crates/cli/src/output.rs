//! CSV and JSON emission: config echo, fixed headers, atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Currency with 6 significant digits.
pub fn money(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    // scientific formatting rounds first, so a carry into a new digit is accounted for
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if exp > 5 {
        let rounded: f64 = sci.parse().unwrap_or(x);
        format!("{rounded:.0}")
    } else {
        format!("{:.*}", (5 - exp) as usize, x)
    }
}

/// Full round-trip precision, for probabilities, fractions and grid coordinates.
pub fn exact(x: f64) -> String {
    format!("{x}")
}

pub fn opt_money(x: Option<f64>) -> String {
    x.map(money).unwrap_or_default()
}

pub fn opt_exact(x: Option<f64>) -> String {
    x.map(exact).unwrap_or_default()
}

pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Comment block preceding every CSV: tool version, command, then the effective config.
pub fn echo_block(config: &RunConfig, command: &str) -> String {
    let mut out = format!("# reman {VERSION}\n# command: {command}\n");
    for line in config.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

/// Recover the config from an echo block.
pub fn parse_echo(text: &str) -> Result<RunConfig, CliError> {
    let body: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .skip(2)
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .collect::<Vec<_>>()
        .join("\n");
    RunConfig::from_toml(&body)
}

pub fn render_csv(config: &RunConfig, command: &str, table: &Table) -> Result<Vec<u8>, CliError> {
    let mut bytes = echo_block(config, command).into_bytes();
    {
        let mut writer = csv::Writer::from_writer(&mut bytes);
        writer.write_record(table.columns).map_err(io_err)?;
        for row in &table.rows {
            writer.write_record(row).map_err(io_err)?;
        }
        writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(bytes)
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}
