use anyhow::Result;
use serde_json::Value;

use crate::args::Format;

/// Prints either the text report or the structured document.
pub fn emit(format: Format, text: &str, doc: Value) -> Result<()> {
    match format {
        Format::Text => print!("{text}"),
        Format::Structured => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(())
}

/// Fixed decimals without the leading zero, as in `.0672`.
pub fn dot(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

pub fn alpha_label(alpha: f64) -> String {
    if alpha == std::f64::consts::E {
        "e".to_string()
    } else {
        qsa_core::fmt::sig(alpha, 6)
    }
}

pub fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |v| v.to_string())
}
