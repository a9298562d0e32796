//! Number formatting shared by the CSV and JSON writers.

use serde_json::Value;

/// Significant digits kept in every emitted float.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Round to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text for `v` after rounding to 12 significant digits.
pub fn fmt_f64(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 {
        return "0".into();
    }
    if r.is_finite() && (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Apply [`round_sig`] to every float in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(-0.5), "-0.5");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(0.1 + 0.2), "0.3");
        assert_eq!(fmt_f64(-1.999999999871234), "-1.99999999987");
        assert_eq!(fmt_f64(1.234e-17), "1.234e-17");
        assert_eq!(fmt_f64(std::f64::consts::PI), "3.14159265359");
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let v = round_json(json!({"n": -2, "raw": -1.999999999871234, "xs": [0.1 + 0.2]}));
        assert_eq!(v.to_string(), r#"{"n":-2,"raw":-1.99999999987,"xs":[0.3]}"#);
    }
}
