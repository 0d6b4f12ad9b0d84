//! `<name>.history.csv`: one row per epoch.

use std::fs;
use std::path::{Path, PathBuf};

use super::trainer::EpochRecord;
use crate::error::{Error, Result};

pub const HISTORY_HEADER: &str = "epoch,train_loss,val_loss,val_acc,lr";

pub fn history_path(dir: impl AsRef<Path>, name: &str) -> PathBuf {
    dir.as_ref().join(format!("{name}.history.csv"))
}

/// Values use Rust's shortest round-trip float formatting.
pub fn render_history(history: &[EpochRecord]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch, r.train_loss, r.val_loss, r.val_accuracy, r.lr
        ));
    }
    out
}

pub fn parse_history(text: &str) -> Result<Vec<EpochRecord>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HISTORY_HEADER) {
        return Err(Error::parse("history", format!("missing header {HISTORY_HEADER:?}")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ctx = || format!("history line {}", i + 2);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(ctx(), format!("expected 5 fields, found {}", fields.len())));
        }
        let epoch = fields[0].parse::<usize>().map_err(|e| Error::parse(ctx(), e))?;
        let mut nums = [0.0; 4];
        for (n, f) in nums.iter_mut().zip(&fields[1..]) {
            *n = f.parse::<f64>().map_err(|e| Error::parse(ctx(), e))?;
            if !n.is_finite() {
                return Err(Error::parse(ctx(), "non-finite value"));
            }
        }
        out.push(EpochRecord {
            epoch,
            train_loss: nums[0],
            val_loss: nums[1],
            val_accuracy: nums[2],
            lr: nums[3],
        });
    }
    Ok(out)
}

pub fn save_history(history: &[EpochRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_history(history)).map_err(|e| Error::io(path, e))
}

pub fn load_history(path: impl AsRef<Path>) -> Result<Vec<EpochRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_history(&text)
}
