//! Canonical JSON: sorted keys, `%.17g` floats, no insignificant whitespace.

use serde_json::Value;

/// Formats `x` like C's `%.17g`; `-0` prints as `0` and non-finite values as `null`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_g17(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(&m[k], out);
            }
            out.push('}');
        }
    }
}

/// Canonical text of `v`, newline terminated.
pub fn to_canonical(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out.push('\n');
    out
}

/// Number value; non-finite input becomes `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(-0.0), "0");
        assert_eq!(format_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(123456.5), "123456.5");
        assert_eq!(format_g17(0.0001), "0.0001");
        assert_eq!(format_g17(1e16), "10000000000000000");
        assert_eq!(format_g17(1e17), "1e+17");
    }

    #[test]
    fn keys_sorted() {
        let v: Value = serde_json::from_str(r#"{"b":1,"a":[2.5,{"d":null,"c":true}]}"#).unwrap();
        assert_eq!(to_canonical(&v), "{\"a\":[2.5,{\"c\":true,\"d\":null}],\"b\":1}\n");
    }

    proptest! {
        #[test]
        fn float_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = format_g17(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back, x);
            let v: Value = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(to_canonical(&v), format!("{s}\n"));
        }
    }
}
