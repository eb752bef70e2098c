//! CSV shaping with a fixed numeric format so outputs are byte-stable.
//!
//! Floats print with 12 significant digits in scientific notation; rows
//! join with LF regardless of platform.

/// Formats a float with 12 significant digits, the crate-wide CSV
/// convention.
pub fn float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Builds a CSV document: a header row plus data rows, LF-terminated.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Builds a two-column `key,value` CSV for scalar-shaped reports.
pub fn key_values(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (key, value) in pairs {
        out.push_str(key);
        out.push(',');
        out.push_str(value);
        out.push('\n');
    }
    out
}
