//! File formats: domain data CSV, given-predicate CSV, model checkpoints
//! and portable graymap output.
//!
//! Domain data file: a header line `count,dim0,dim1,...` followed by
//! `count` lines of comma-separated values, one flattened row-major
//! element per line. Given file: lines of `element,predicate,value` where
//! `element` is an index (or `i:j` for pairs) and value is 0 or 1.

use crate::fol::ElemShape;
use crate::grounding::Domain;
use crate::models::ParamStore;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {detail}")]
    Format {
        file: String,
        line: usize,
        detail: String,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_err(path: &Path, line: usize, detail: impl Into<String>) -> DataError {
    DataError::Format {
        file: path.display().to_string(),
        line,
        detail: detail.into(),
    }
}

pub fn write_domain_csv(path: &Path, elements: &[Tensor]) -> Result<(), DataError> {
    let mut out = String::new();
    let dims: Vec<String> = elements
        .first()
        .map(|e| e.shape().iter().map(|d| d.to_string()).collect())
        .unwrap_or_default();
    out.push_str(&elements.len().to_string());
    for d in &dims {
        out.push(',');
        out.push_str(d);
    }
    out.push('\n');
    for e in elements {
        let row: Vec<String> = e.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_domain_csv(path: &Path) -> Result<Vec<Tensor>, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(path, 1, "empty domain file"))?;
    let mut parts = header.split(',');
    let count: usize = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| format_err(path, 1, "header must start with the element count"))?;
    let dims: Vec<usize> = parts
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format_err(path, 1, "bad shape in header"))?;
    let volume: usize = dims.iter().product();
    let mut elements = Vec::with_capacity(count);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format_err(path, idx + 1, "bad element value"))?;
        if values.len() != volume {
            return Err(format_err(
                path,
                idx + 1,
                format!("expected {volume} values, found {}", values.len()),
            ));
        }
        elements.push(Tensor::vector(values));
    }
    if elements.len() != count {
        return Err(format_err(
            path,
            1,
            format!(
                "header promised {count} elements, file has {}",
                elements.len()
            ),
        ));
    }
    Ok(elements)
}

pub fn load_domain(path: &Path, name: &str, shape: ElemShape) -> Result<Domain, DataError> {
    let elements = read_domain_csv(path)?;
    Domain::new(name, shape, elements)
        .map_err(|e| format_err(path, 1, format!("element shape: {e}")))
}

/// One `(element indices, predicate, truth)` row of a given file.
pub type GivenRow = (Vec<usize>, String, f64);

pub fn read_givens_csv(path: &Path) -> Result<Vec<GivenRow>, DataError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(format_err(
                path,
                idx + 1,
                "expected element,predicate,value",
            ));
        }
        let element: Vec<usize> = parts[0]
            .split(':')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| format_err(path, idx + 1, "bad element index"))?;
        let value: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|_| format_err(path, idx + 1, "bad truth value"))?;
        rows.push((element, parts[1].trim().to_string(), value));
    }
    Ok(rows)
}

pub fn write_givens_csv(path: &Path, rows: &[GivenRow]) -> Result<(), DataError> {
    let mut out = String::new();
    for (element, predicate, value) in rows {
        let idx: Vec<String> = element.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("{},{},{}\n", idx.join(":"), predicate, value));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Versioned checkpoint: every named parameter tensor with its shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub master_seed: u64,
    pub epoch: usize,
    pub params: BTreeMap<String, Tensor>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(
    path: &Path,
    store: &ParamStore,
    master_seed: u64,
    epoch: usize,
) -> Result<(), DataError> {
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        master_seed,
        epoch,
        params: store.sorted(),
    };
    let json = serde_json::to_string(&ckpt)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, DataError> {
    let text = std::fs::read_to_string(path)?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(DataError::Checkpoint(format!(
            "unsupported checkpoint version {}",
            ckpt.version
        )));
    }
    Ok(ckpt)
}

/// Restores checkpoint tensors into a parameter store built with the same
/// bindings; names and shapes must match exactly.
pub fn restore_params(store: &mut ParamStore, ckpt: &Checkpoint) -> Result<(), DataError> {
    for (name, tensor) in &ckpt.params {
        let id = store
            .id(name)
            .ok_or_else(|| DataError::Checkpoint(format!("unknown parameter '{name}'")))?;
        if store.get(id).shape() != tensor.shape() {
            return Err(DataError::Checkpoint(format!(
                "parameter '{name}' shape {:?} does not match checkpoint {:?}",
                store.get(id).shape(),
                tensor.shape()
            )));
        }
        *store.get_mut(id) = tensor.clone();
    }
    let missing: Vec<&str> = store
        .iter()
        .map(|(_, name, _)| name)
        .filter(|n| !ckpt.params.contains_key(*n))
        .collect();
    if !missing.is_empty() {
        return Err(DataError::Checkpoint(format!(
            "checkpoint is missing parameters: {missing:?}"
        )));
    }
    Ok(())
}

/// Writes a binary portable graymap (P5). Pixels are `[0,1]` grays in
/// row-major order.
pub fn write_pgm(
    path: &Path,
    width: usize,
    height: usize,
    pixels: &[f64],
) -> Result<(), DataError> {
    assert_eq!(pixels.len(), width * height);
    let mut file = std::fs::File::create(path)?;
    write!(file, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = pixels
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    file.write_all(&bytes)?;
    Ok(())
}

/// Lays out image tiles (each `h×w`, flat) into one pixmap with 1-pixel
/// mid-gray separators, rows of tiles stacked vertically.
pub fn compose_grid(tiles: &[Vec<&Tensor>], h: usize, w: usize) -> (usize, usize, Vec<f64>) {
    let rows = tiles.len();
    let cols = tiles.iter().map(|r| r.len()).max().unwrap_or(0);
    let gh = rows * h + rows.saturating_sub(1);
    let gw = cols * w + cols.saturating_sub(1);
    let mut pixels = vec![0.5; gh * gw];
    for (r, row) in tiles.iter().enumerate() {
        for (c, tile) in row.iter().enumerate() {
            let top = r * (h + 1);
            let left = c * (w + 1);
            for y in 0..h {
                for x in 0..w {
                    pixels[(top + y) * gw + left + x] = tile[y * w + x];
                }
            }
        }
    }
    (gw, gh, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("fuzzyc-data-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn domain_csv_roundtrip() {
        let elems = vec![
            Tensor::vector(vec![0.125, -3.5, 1.0]),
            Tensor::vector(vec![0.1, 0.2, 0.30000000000000004]),
        ];
        let path = tmp("domain.csv");
        write_domain_csv(&path, &elems).unwrap();
        let back = read_domain_csv(&path).unwrap();
        assert_eq!(elems, back);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn givens_csv_roundtrip() {
        let rows = vec![
            (vec![0], "isZero".to_string(), 1.0),
            (vec![3, 7], "Married".to_string(), 1.0),
        ];
        let path = tmp("givens.csv");
        write_givens_csv(&path, &rows).unwrap();
        let back = read_givens_csv(&path).unwrap();
        assert_eq!(rows, back);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn checkpoint_roundtrip_is_bit_exact() {
        let mut store = ParamStore::new();
        store.insert("a.w", Tensor::vector(vec![0.1 + 0.2, -1.0 / 3.0]));
        store.insert("a.b", Tensor::scalar(1e-300));
        let path = tmp("ckpt.json");
        save_checkpoint(&path, &store, 42, 7).unwrap();
        let ckpt = load_checkpoint(&path).unwrap();
        let mut store2 = ParamStore::new();
        store2.insert("a.w", Tensor::zeros(&[2]));
        store2.insert("a.b", Tensor::scalar(0.0));
        restore_params(&mut store2, &ckpt).unwrap();
        for (id, _, t) in store.iter() {
            let restored = store2.get(store2.id(store.name(id)).unwrap());
            for (a, b) in t.iter().zip(restored.iter()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn grid_layout() {
        let a = Tensor::filled(&[4], 0.0);
        let b = Tensor::filled(&[4], 0.5);
        let (w, h, px) = compose_grid(&[vec![&a, &b]], 2, 2);
        assert_eq!((w, h), (5, 2));
        assert_eq!(px[0], 0.0);
        assert_eq!(px[2], 0.5); // separator column
        assert_eq!(px[3], 0.5);
    }
}
