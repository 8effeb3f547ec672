//! Text serialization shared by the CSV and JSON writers.

/// Round-trip exact formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
