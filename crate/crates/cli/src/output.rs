//! Writing results: stdout or a file, JSON or CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use pointres_core::Complex64;
use serde_json::{json, Value};

use crate::Failure;

/// Round-trip-safe decimal form used in every CSV cell.
pub fn num(x: f64) -> String {
    // adding 0.0 turns −0 into +0
    format!("{:.16e}", x + 0.0)
}

pub fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut text = text.to_owned();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Parse(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Solver(format!("stdout: {e}")))
        }
    }
}

pub fn emit_json(path: Option<&Path>, value: &Value) -> Result<(), Failure> {
    emit(path, &serde_json::to_string_pretty(value).expect("JSON values serialize"))
}
