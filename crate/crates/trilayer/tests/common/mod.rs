#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use trilayer::config::ConfigFile;
use trilayer_core::model::ModelConfig;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_trilayer")
}

pub fn write_config(dir: &Path, name: &str, cfg: &ModelConfig) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, ConfigFile::from_model(cfg).unwrap().to_json()).unwrap();
    path
}

pub fn canonical_with_supply(sigma_bar: f64) -> ModelConfig {
    let mut cfg = ModelConfig::canonical();
    cfg.sigma_bar = sigma_bar;
    cfg
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("failed to spawn the binary")
}

pub fn read_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

/// A CSV cell and a JSON value carry the same datum: empty and null, equal
/// strings, or numbers that parse to the same `f64` bit pattern.
pub fn cell_matches(cell: &str, v: &Value) -> Result<(), String> {
    let ok = match v {
        Value::Null => cell.is_empty(),
        Value::String(s) => s == cell,
        Value::Number(n) => {
            let a = n.as_f64().unwrap();
            cell.parse::<f64>().map(|b| a.to_bits() == b.to_bits()).unwrap_or(false)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("csv {cell:?} vs json {v}"))
    }
}

/// Compares a CSV table against the JSON rows (or the JSON top-level object
/// for one-row tables). Returns the number of numeric cells compared.
pub fn table_parity(csv: &[u8], json: &Value, key: Option<&str>) -> Result<usize, String> {
    let (header, rows) = read_csv(csv);
    let json_rows: Vec<&Value> = match key {
        Some(k) => json[k].as_array().ok_or(format!("missing table {k}"))?.iter().collect(),
        None => vec![json],
    };
    if json_rows.len() != rows.len() {
        return Err(format!("row count {} vs {}", rows.len(), json_rows.len()));
    }
    let mut numeric = 0;
    for (row, obj) in rows.iter().zip(json_rows) {
        for (name, cell) in header.iter().zip(row) {
            let v = obj.get(name).ok_or(format!("json lacks {name}"))?;
            cell_matches(cell, v).map_err(|e| format!("{name}: {e}"))?;
            numeric += v.is_number() as usize;
        }
    }
    Ok(numeric)
}
