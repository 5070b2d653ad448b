//! Locale-independent number formatting shared by CSV and JSON writers.

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal form of [`round_sig`]`(x)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", round_sig(x))
}

/// JSON number rounded to 12 significant digits; non-finite values become `null`.
pub fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(round_sig(x))
        .map_or(serde_json::Value::Null, serde_json::Value::Number)
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                *value = json_num(x);
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(std::f64::consts::PI.recip()), "0.318309886184");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(-1.5e-20), "-0.000000000000000000015");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn json_rounding() {
        let mut v = serde_json::json!({"a": [0.1234567890123456, 3], "b": {"c": 2.0}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.123456789012,3],"b":{"c":2.0}}"#);
    }
}
