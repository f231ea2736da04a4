//! Canonical JSON and SHA-256 digests.
//!
//! Canonical form: object keys sorted by UTF-8 bytes, no insignificant
//! whitespace, strings escaped as JSON requires, integers in plain decimal and
//! floats in shortest round-trip form (`1.0`, `0.1`, `1e-7`). The output does
//! not depend on locale, platform or map insertion order.

use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&n.to_string()),
        Value::String(s) => write_string(s, out),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable_by(|a, b| a.as_bytes().cmp(b.as_bytes()));
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_string(key, out);
                out.push(':');
                write_value(&map[key], out);
            }
            out.push('}');
        }
    }
}

fn write_string(s: &str, out: &mut String) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

pub fn sha256(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// Digest of any serializable value through its canonical JSON.
pub fn hash_serializable<T: serde::Serialize>(value: &T) -> Result<[u8; 32], serde_json::Error> {
    let v = serde_json::to_value(value)?;
    Ok(sha256(to_canonical_json(&v).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_and_compact() {
        let v = json!({"b": 1, "a": [true, null, "x\ny"], "c": {"z": 0.5, "y": -2}});
        assert_eq!(
            to_canonical_json(&v),
            r#"{"a":[true,null,"x\ny"],"b":1,"c":{"y":-2,"z":0.5}}"#
        );
    }

    #[test]
    fn field_order_does_not_matter() {
        let a: Value = serde_json::from_str(r#"{"x":1,"y":{"p":2,"q":3}}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"y":{"q":3,"p":2},"x":1}"#).unwrap();
        assert_eq!(to_canonical_json(&a), to_canonical_json(&b));
    }

    /// Shortest round-trip float rendering corpus.
    #[test]
    fn float_rendering_corpus() {
        let cases: &[(f64, &str)] = &[
            (0.0, "0.0"),
            (-0.0, "-0.0"),
            (1.0, "1.0"),
            (0.1, "0.1"),
            (0.1 + 0.2, "0.30000000000000004"),
            (1.0 / 3.0, "0.3333333333333333"),
            (-9.81, "-9.81"),
            (1e-7, "1e-7"),
            (123456789.125, "123456789.125"),
            (1e21, "1e+21"),
            (5e-324, "5e-324"),
            (f64::MAX, "1.7976931348623157e+308"),
            (2.0f64.sqrt(), "1.4142135623730951"),
            (1.0 / 60.0, "0.016666666666666666"),
        ];
        for (x, expected) in cases {
            let rendered = to_canonical_json(&json!(x));
            assert_eq!(&rendered, expected, "rendering {x:e}");
            let back: f64 = rendered.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn unicode_strings_escape_stably() {
        let v = json!({"é": "tab\tquote\"", "a": "\u{1F600}"});
        assert_eq!(to_canonical_json(&v), "{\"a\":\"\u{1F600}\",\"é\":\"tab\\tquote\\\"\"}");
    }
}
