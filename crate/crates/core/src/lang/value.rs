use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A runtime value of the mini-language.
///
/// Equality and hashing are structural and bit-exact on floats, so `Float(NaN)`
/// equals itself and `Int(1)` differs from `Float(1.0)`. That is the identity used
/// for taint pruning, state comparison, and memo keys. Language-level `==`
/// lives in [`crate::lang::ops`].
#[derive(Clone, Debug)]
pub enum PlainValue {
    None,
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(Arc<str>),
    List(Arc<Vec<PlainValue>>),
}

impl PlainValue {
    pub fn str(s: impl AsRef<str>) -> Self {
        PlainValue::Str(Arc::from(s.as_ref()))
    }

    pub fn list(items: Vec<PlainValue>) -> Self {
        PlainValue::List(Arc::new(items))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            PlainValue::None => "none",
            PlainValue::Int(_) => "int",
            PlainValue::Float(_) => "float",
            PlainValue::Bool(_) => "bool",
            PlainValue::Str(_) => "str",
            PlainValue::List(_) => "list",
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PlainValue::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl PartialEq for PlainValue {
    fn eq(&self, other: &Self) -> bool {
        use PlainValue::*;
        match (self, other) {
            (None, None) => true,
            (Int(a), Int(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Bool(a), Bool(b)) => a == b,
            (Str(a), Str(b)) => a == b,
            (List(a), List(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for PlainValue {}

impl Hash for PlainValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            PlainValue::None => {}
            PlainValue::Int(i) => i.hash(state),
            PlainValue::Float(f) => f.to_bits().hash(state),
            PlainValue::Bool(b) => b.hash(state),
            PlainValue::Str(s) => s.hash(state),
            PlainValue::List(items) => items.hash(state),
        }
    }
}

impl From<i64> for PlainValue {
    fn from(v: i64) -> Self {
        PlainValue::Int(v)
    }
}

impl From<f64> for PlainValue {
    fn from(v: f64) -> Self {
        PlainValue::Float(v)
    }
}

impl From<bool> for PlainValue {
    fn from(v: bool) -> Self {
        PlainValue::Bool(v)
    }
}

impl From<&str> for PlainValue {
    fn from(v: &str) -> Self {
        PlainValue::str(v)
    }
}

pub(crate) fn write_str_literal(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

pub(crate) fn write_float(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.is_nan() {
        f.write_str("nan")
    } else if v.is_infinite() {
        f.write_str(if v > 0.0 { "inf" } else { "-inf" })
    } else {
        // `{:?}` is the shortest representation that round-trips and always
        // carries a `.` or an exponent.
        write!(f, "{v:?}")
    }
}

impl fmt::Display for PlainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlainValue::None => f.write_str("None"),
            PlainValue::Int(i) => write!(f, "{i}"),
            PlainValue::Float(v) => write_float(f, *v),
            PlainValue::Bool(true) => f.write_str("True"),
            PlainValue::Bool(false) => f.write_str("False"),
            PlainValue::Str(s) => write_str_literal(f, s),
            PlainValue::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_identity_is_bit_exact() {
        assert_eq!(PlainValue::Float(f64::NAN), PlainValue::Float(f64::NAN));
        assert_ne!(PlainValue::Float(0.0), PlainValue::Float(-0.0));
        assert_ne!(PlainValue::Int(1), PlainValue::Float(1.0));
    }

    #[test]
    fn display_forms() {
        assert_eq!(PlainValue::Float(1.0).to_string(), "1.0");
        assert_eq!(PlainValue::Int(-3).to_string(), "-3");
        assert_eq!(PlainValue::str("a\"b").to_string(), "\"a\\\"b\"");
        assert_eq!(
            PlainValue::list(vec![1.into(), true.into()]).to_string(),
            "[1, True]"
        );
    }
}
