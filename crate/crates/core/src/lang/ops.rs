//! Primitive operator semantics shared by every evaluator.
//!
//! Integers are 64-bit and overflow raises; `/` is true division, `//` and `%`
//! floor towards negative infinity; bitwise and shift operators accept only ints.

use std::sync::Arc;

use super::ast::{BinOp, UnaryOp};
use super::value::PlainValue;
use super::ErrorKind;

use PlainValue::{Bool, Float, Int, List, Str};

fn type_error() -> ErrorKind {
    ErrorKind::Type
}

fn as_f64(v: &PlainValue) -> Option<f64> {
    match v {
        Int(i) => Some(*i as f64),
        Float(f) => Some(*f),
        _ => None,
    }
}

fn numeric_pair(a: &PlainValue, b: &PlainValue) -> Option<(f64, f64)> {
    match (a, b) {
        (Int(_) | Float(_), Int(_) | Float(_)) => Some((as_f64(a)?, as_f64(b)?)),
        _ => None,
    }
}

fn float_floor_mod(a: f64, b: f64) -> f64 {
    let r = a % b;
    if r != 0.0 && ((r < 0.0) != (b < 0.0)) {
        r + b
    } else {
        r
    }
}

fn int_floor_div(a: i64, b: i64) -> Result<i64, ErrorKind> {
    if b == 0 {
        return Err(ErrorKind::ZeroDivision);
    }
    let q = a.checked_div(b).ok_or(ErrorKind::Overflow)?;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

fn int_floor_mod(a: i64, b: i64) -> Result<i64, ErrorKind> {
    if b == 0 {
        return Err(ErrorKind::ZeroDivision);
    }
    let r = a.checked_rem(b).unwrap_or(0);
    if r != 0 && ((r < 0) != (b < 0)) {
        Ok(r + b)
    } else {
        Ok(r)
    }
}

fn shift_left(a: i64, b: i64) -> Result<i64, ErrorKind> {
    if b < 0 {
        return Err(ErrorKind::Value);
    }
    if a == 0 {
        return Ok(0);
    }
    if b >= 64 {
        return Err(ErrorKind::Overflow);
    }
    let r = a << b;
    if r >> b != a {
        return Err(ErrorKind::Overflow);
    }
    Ok(r)
}

fn shift_right(a: i64, b: i64) -> Result<i64, ErrorKind> {
    if b < 0 {
        return Err(ErrorKind::Value);
    }
    Ok(if b >= 64 { if a < 0 { -1 } else { 0 } } else { a >> b })
}

/// Language-level `==`: numeric across int/float, IEEE on floats, structural elsewhere.
pub fn values_equal(a: &PlainValue, b: &PlainValue) -> bool {
    match (a, b) {
        (Int(x), Int(y)) => x == y,
        (Int(_) | Float(_), Int(_) | Float(_)) => as_f64(a) == as_f64(b),
        (Bool(x), Bool(y)) => x == y,
        (Str(x), Str(y)) => x == y,
        (List(x), List(y)) => x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| values_equal(p, q)),
        (PlainValue::None, PlainValue::None) => true,
        _ => false,
    }
}

fn compare(op: BinOp, a: &PlainValue, b: &PlainValue) -> Result<bool, ErrorKind> {
    use std::cmp::Ordering;
    match op {
        BinOp::Eq => return Ok(values_equal(a, b)),
        BinOp::Ne => return Ok(!values_equal(a, b)),
        _ => {}
    }
    let ord: Option<Ordering> = match (a, b) {
        (Int(x), Int(y)) => Some(x.cmp(y)),
        (Str(x), Str(y)) => Some(x.cmp(y)),
        _ => {
            let (x, y) = numeric_pair(a, b).ok_or_else(type_error)?;
            x.partial_cmp(&y)
        }
    };
    // NaN compares false under every ordering operator.
    let Some(ord) = ord else { return Ok(false) };
    Ok(match op {
        BinOp::Lt => ord == Ordering::Less,
        BinOp::Le => ord != Ordering::Greater,
        BinOp::Gt => ord == Ordering::Greater,
        BinOp::Ge => ord != Ordering::Less,
        _ => unreachable!("ordering operator"),
    })
}

/// Applies a binary arithmetic or comparison operator.
pub fn binary(op: BinOp, a: &PlainValue, b: &PlainValue) -> Result<PlainValue, ErrorKind> {
    use BinOp::*;
    match op {
        Eq | Ne | Lt | Le | Gt | Ge => return compare(op, a, b).map(Bool),
        _ => {}
    }
    match (op, a, b) {
        (Add, Str(x), Str(y)) => {
            let mut s = String::with_capacity(x.len() + y.len());
            s.push_str(x);
            s.push_str(y);
            return Ok(Str(Arc::from(s)));
        }
        (Add, List(x), List(y)) => {
            let mut v = Vec::with_capacity(x.len() + y.len());
            v.extend(x.iter().cloned());
            v.extend(y.iter().cloned());
            return Ok(PlainValue::list(v));
        }
        _ => {}
    }
    if let (Int(x), Int(y)) = (a, b) {
        let (x, y) = (*x, *y);
        return match op {
            Add => x.checked_add(y).map(Int).ok_or(ErrorKind::Overflow),
            Sub => x.checked_sub(y).map(Int).ok_or(ErrorKind::Overflow),
            Mul => x.checked_mul(y).map(Int).ok_or(ErrorKind::Overflow),
            Div => {
                if y == 0 {
                    Err(ErrorKind::ZeroDivision)
                } else {
                    Ok(Float(x as f64 / y as f64))
                }
            }
            FloorDiv => int_floor_div(x, y).map(Int),
            Mod => int_floor_mod(x, y).map(Int),
            Shl => shift_left(x, y).map(Int),
            Shr => shift_right(x, y).map(Int),
            BitOr => Ok(Int(x | y)),
            BitXor => Ok(Int(x ^ y)),
            BitAnd => Ok(Int(x & y)),
            Eq | Ne | Lt | Le | Gt | Ge => unreachable!("comparison handled above"),
        };
    }
    match op {
        Shl | Shr | BitOr | BitXor | BitAnd => return Err(type_error()),
        _ => {}
    }
    let (x, y) = numeric_pair(a, b).ok_or_else(type_error)?;
    match op {
        Add => Ok(Float(x + y)),
        Sub => Ok(Float(x - y)),
        Mul => Ok(Float(x * y)),
        Div => {
            if y == 0.0 {
                Err(ErrorKind::ZeroDivision)
            } else {
                Ok(Float(x / y))
            }
        }
        FloorDiv => {
            if y == 0.0 {
                Err(ErrorKind::ZeroDivision)
            } else {
                Ok(Float((x / y).floor()))
            }
        }
        Mod => {
            if y == 0.0 {
                Err(ErrorKind::ZeroDivision)
            } else {
                Ok(Float(float_floor_mod(x, y)))
            }
        }
        _ => unreachable!("int-only operators handled above"),
    }
}

pub fn unary(op: UnaryOp, a: &PlainValue) -> Result<PlainValue, ErrorKind> {
    match (op, a) {
        (UnaryOp::Neg, Int(i)) => i.checked_neg().map(Int).ok_or(ErrorKind::Overflow),
        (UnaryOp::Neg, Float(f)) => Ok(Float(-f)),
        (UnaryOp::Not, Bool(b)) => Ok(Bool(!b)),
        _ => Err(type_error()),
    }
}

pub fn index(seq: &PlainValue, idx: &PlainValue) -> Result<PlainValue, ErrorKind> {
    let Int(i) = idx else { return Err(type_error()) };
    let i = usize::try_from(*i).map_err(|_| ErrorKind::Index)?;
    match seq {
        List(items) => items.get(i).cloned().ok_or(ErrorKind::Index),
        Str(s) => s
            .chars()
            .nth(i)
            .map(|c| PlainValue::str(c.to_string()))
            .ok_or(ErrorKind::Index),
        _ => Err(type_error()),
    }
}

/// Truth value for conditions, `and`/`or` operands and asserts. Only bools qualify.
pub fn truth(v: &PlainValue) -> Result<bool, ErrorKind> {
    v.as_bool().ok_or(ErrorKind::Type)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(op: BinOp, x: PlainValue, y: PlainValue) -> Result<PlainValue, ErrorKind> {
        binary(op, &x, &y)
    }

    #[test]
    fn shifts() {
        assert_eq!(b(BinOp::Shl, Int(2), Int(1)), Ok(Int(4)));
        assert_eq!(b(BinOp::Shl, Float(2.0), Int(1)), Err(ErrorKind::Type));
        assert_eq!(b(BinOp::Shl, Int(1), Int(63)), Err(ErrorKind::Overflow));
        assert_eq!(b(BinOp::Shl, Int(1), Int(-1)), Err(ErrorKind::Value));
        assert_eq!(b(BinOp::Shr, Int(-8), Int(100)), Ok(Int(-1)));
    }

    #[test]
    fn division_family() {
        assert_eq!(b(BinOp::Div, Int(1), Int(2)), Ok(Float(0.5)));
        assert_eq!(b(BinOp::Div, Int(1), Int(0)), Err(ErrorKind::ZeroDivision));
        assert_eq!(b(BinOp::FloorDiv, Int(-7), Int(2)), Ok(Int(-4)));
        assert_eq!(b(BinOp::Mod, Int(-7), Int(2)), Ok(Int(1)));
        assert_eq!(b(BinOp::Mod, Int(7), Int(-2)), Ok(Int(-1)));
        assert_eq!(b(BinOp::Mod, Float(-7.0), Int(2)), Ok(Float(1.0)));
        assert_eq!(b(BinOp::FloorDiv, Float(7.0), Float(2.0)), Ok(Float(3.0)));
        assert_eq!(b(BinOp::FloorDiv, Int(i64::MIN), Int(-1)), Err(ErrorKind::Overflow));
        assert_eq!(b(BinOp::Mod, Int(i64::MIN), Int(-1)), Ok(Int(0)));
    }

    #[test]
    fn overflow_raises() {
        assert_eq!(b(BinOp::Add, Int(i64::MAX), Int(1)), Err(ErrorKind::Overflow));
        assert_eq!(unary(UnaryOp::Neg, &Int(i64::MIN)), Err(ErrorKind::Overflow));
    }

    #[test]
    fn comparisons() {
        assert_eq!(b(BinOp::Eq, Int(1), Float(1.0)), Ok(Bool(true)));
        assert_eq!(b(BinOp::Lt, Str("a".into()), Str("b".into())), Ok(Bool(true)));
        assert_eq!(b(BinOp::Lt, Bool(true), Int(1)), Err(ErrorKind::Type));
        assert_eq!(b(BinOp::Eq, Bool(true), Int(1)), Ok(Bool(false)));
        assert_eq!(b(BinOp::Lt, Float(f64::NAN), Int(1)), Ok(Bool(false)));
    }

    #[test]
    fn concatenation_and_index() {
        assert_eq!(b(BinOp::Add, PlainValue::str("ab"), PlainValue::str("c")), Ok(PlainValue::str("abc")));
        assert_eq!(index(&PlainValue::str("abc"), &Int(1)), Ok(PlainValue::str("b")));
        assert_eq!(index(&PlainValue::str("abc"), &Int(3)), Err(ErrorKind::Index));
        assert_eq!(index(&PlainValue::str("abc"), &Int(-1)), Err(ErrorKind::Index));
    }
}
