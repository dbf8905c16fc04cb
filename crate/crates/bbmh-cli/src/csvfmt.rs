//! CSV output helpers: fixed schema, header always present, floats at 9
//! significant digits so runs diff cleanly.

/// Formats a float with 9 significant digits in scientific notation;
/// undefined quantities print as `nan`.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.8e}")
    }
}

/// Joins fields into a CSV line (fields are schema-controlled and never
/// contain commas, so no quoting is needed).
pub fn line(fields: &[String]) -> String {
    fields.join(",")
}
