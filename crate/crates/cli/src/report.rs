//! JSON and CSV report files.

use std::fs;
use std::path::Path;

use conicscan::conventions::Conventions;
use conicscan::Error;
use serde_json::{json, Value};

use crate::{exit_code, EXIT_IO};

/// Report envelope: tool, conventions, config echo, then result or error.
pub fn envelope(command: &str, config: &Value, outcome: std::result::Result<Value, &Error>) -> Value {
    let mut v = json!({
        "tool": { "name": "conicscan", "version": env!("CARGO_PKG_VERSION") },
        "conventions": Conventions::current(),
        "command": command,
        "config": config,
    });
    match outcome {
        Ok(result) => v["result"] = result,
        Err(e) => {
            v["error"] = json!({ "message": e.to_string(), "exit_code": exit_code(e) });
        }
    }
    v
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), u8> {
    let text = serde_json::to_string_pretty(value).expect("report values are serializable");
    write_text(dir, name, &(text + "\n"))
}

pub fn write_csv(dir: &Path, name: &str, header: &str, rows: impl Iterator<Item = String>) -> Result<(), u8> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    write_text(dir, name, &text)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), u8> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, text))
        .map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_IO
        })
}
