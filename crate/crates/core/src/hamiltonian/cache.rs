use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Mutex;

use super::HomotopyHamiltonian;
use crate::error::{Error, Result};

/// Shared memo of `(emin_α, emax_α)` keyed by instance hash and `α`.
///
/// Safe to share between worker threads. Values can be persisted per instance
/// as a CSV sidecar with columns `alpha,emin,emax`.
#[derive(Debug, Default)]
pub struct EigenCache {
    entries: Mutex<HashMap<(String, u64), (f64, f64)>>,
}

impl EigenCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, instance: &str, alpha: f64) -> Option<(f64, f64)> {
        self.entries
            .lock()
            .unwrap()
            .get(&(instance.to_owned(), alpha.to_bits()))
            .copied()
    }

    pub fn insert(&self, instance: &str, alpha: f64, window: (f64, f64)) {
        self.entries
            .lock()
            .unwrap()
            .insert((instance.to_owned(), alpha.to_bits()), window);
    }

    /// Returns the cached window or computes and stores it. The lock is not held while solving.
    pub fn get_or_compute(&self, instance: &str, h: &HomotopyHamiltonian<'_>, tol: f64) -> Result<(f64, f64)> {
        if let Some(w) = self.get(instance, h.alpha()) {
            return Ok(w);
        }
        let w = h.extreme_eigenvalues(tol)?;
        self.insert(instance, h.alpha(), w);
        Ok(w)
    }

    /// Writes every cached entry of one instance, sorted by `α`.
    pub fn save_sidecar(&self, instance: &str, path: &Path) -> Result<()> {
        let mut rows: Vec<(f64, f64, f64)> = self
            .entries
            .lock()
            .unwrap()
            .iter()
            .filter(|((id, _), _)| id == instance)
            .map(|((_, a), (lo, hi))| (f64::from_bits(*a), *lo, *hi))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tmp = path.with_extension("csv.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            writeln!(f, "alpha,emin,emax")?;
            for (a, lo, hi) in rows {
                writeln!(f, "{a},{lo},{hi}")?;
            }
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load_sidecar(&self, instance: &str, path: &Path) -> Result<usize> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("alpha,emin,emax") {
            return Err(Error::Parse(format!("{}: missing header alpha,emin,emax", path.display())));
        }
        let mut count = 0;
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), i + 2)))?;
            let [a, lo, hi] = fields[..] else {
                return Err(Error::Parse(format!("{} line {}: expected 3 fields", path.display(), i + 2)));
            };
            self.insert(instance, a, (lo, hi));
            count += 1;
        }
        Ok(count)
    }
}
