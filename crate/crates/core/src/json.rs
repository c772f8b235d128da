//! JSON emission with floats printed at 17 significant digits (`%.17g`).

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io;

/// Formats `x` like C's `%.17g`. Non-finite values are the caller's problem;
/// serde_json never hands them to the formatter (they become `null`).
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };
    if !(-4..17).contains(&exp) {
        let mut m = String::new();
        m.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            m.push('.');
            m.push_str(frac);
        }
        let es = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{es}{:02}", exp.abs())
    } else if exp >= 0 {
        let point = (exp + 1) as usize;
        let int = &digits[..point];
        let frac = digits[point..].trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        let frac = format!("{zeros}{digits}");
        format!("{sign}0.{}", frac.trim_end_matches('0'))
    }
}

struct G17<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for G17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(g17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        w.write_all(g17(value as f64).as_bytes())
    }
    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Pretty-printed JSON with `%.17g` floats and a trailing newline.
pub fn to_string_pretty<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Compact JSON with `%.17g` floats.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        G17(serde_json::ser::CompactFormatter),
    );
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(g17(2.0), "2");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(5.0 / 3.0), "1.6666666666666667");
        assert_eq!(g17(-1.5), "-1.5");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(1.5e20), "1.5e+20");
        assert_eq!(g17(0.000123), "0.00012300000000000001");
        assert_eq!(g17(0.25), "0.25");
        assert_eq!(g17(123456.0), "123456");
    }

    #[test]
    fn round_trips_bit_exactly() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 12.0] {
            let back: f64 = g17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn formatter_is_used_for_nested_floats() {
        let v = serde_json::json!({"a": [0.1, 2.0], "b": {"c": 1e-7}});
        assert_eq!(to_string(&v), r#"{"a":[0.10000000000000001,2],"b":{"c":9.9999999999999995e-08}}"#);
    }
}
