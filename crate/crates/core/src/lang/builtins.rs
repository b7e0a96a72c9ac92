use super::value::PlainValue;
use super::ErrorKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Len,
    Ord,
    Chr,
    Abs,
    Min,
    Max,
    Sqrt,
    Log,
    Int,
    Float,
    Print,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "len" => Builtin::Len,
            "ord" => Builtin::Ord,
            "chr" => Builtin::Chr,
            "abs" => Builtin::Abs,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            "sqrt" => Builtin::Sqrt,
            "log" => Builtin::Log,
            "int" => Builtin::Int,
            "float" => Builtin::Float,
            "print" => Builtin::Print,
            _ => return None,
        })
    }

    pub fn call(self, args: &[PlainValue]) -> Result<PlainValue, ErrorKind> {
        use PlainValue as V;
        let one = || -> Result<&PlainValue, ErrorKind> {
            match args {
                [a] => Ok(a),
                _ => Err(ErrorKind::Arity),
            }
        };
        match self {
            Builtin::Print => Ok(V::None),
            Builtin::Len => match one()? {
                V::Str(s) => Ok(V::Int(s.chars().count() as i64)),
                V::List(items) => Ok(V::Int(items.len() as i64)),
                _ => Err(ErrorKind::Type),
            },
            Builtin::Ord => match one()? {
                V::Str(s) => {
                    let mut chars = s.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => Ok(V::Int(c as i64)),
                        _ => Err(ErrorKind::Value),
                    }
                }
                _ => Err(ErrorKind::Type),
            },
            Builtin::Chr => match one()? {
                V::Int(i) => u32::try_from(*i)
                    .ok()
                    .and_then(char::from_u32)
                    .map(|c| V::str(c.to_string()))
                    .ok_or(ErrorKind::Value),
                _ => Err(ErrorKind::Type),
            },
            Builtin::Abs => match one()? {
                V::Int(i) => i.checked_abs().map(V::Int).ok_or(ErrorKind::Overflow),
                V::Float(f) => Ok(V::Float(f.abs())),
                _ => Err(ErrorKind::Type),
            },
            Builtin::Sqrt => {
                let x = to_f64(one()?)?;
                if x < 0.0 {
                    Err(ErrorKind::Value)
                } else {
                    Ok(V::Float(x.sqrt()))
                }
            }
            Builtin::Log => {
                let x = to_f64(one()?)?;
                if x <= 0.0 || x.is_nan() {
                    Err(ErrorKind::Value)
                } else {
                    Ok(V::Float(x.ln()))
                }
            }
            Builtin::Int => match one()? {
                V::Int(i) => Ok(V::Int(*i)),
                V::Bool(b) => Ok(V::Int(*b as i64)),
                V::Float(f) => {
                    let t = f.trunc();
                    if !(-9.223_372_036_854_776e18..9.223_372_036_854_776e18).contains(&t) {
                        Err(ErrorKind::Overflow)
                    } else {
                        Ok(V::Int(t as i64))
                    }
                }
                V::Str(s) => s.trim().parse().map(V::Int).map_err(|_| ErrorKind::Value),
                _ => Err(ErrorKind::Type),
            },
            Builtin::Float => match one()? {
                V::Int(i) => Ok(V::Float(*i as f64)),
                V::Float(f) => Ok(V::Float(*f)),
                V::Str(s) => s.trim().parse().map(V::Float).map_err(|_| ErrorKind::Value),
                _ => Err(ErrorKind::Type),
            },
            Builtin::Min | Builtin::Max => {
                let items: Vec<PlainValue> = match args {
                    [] => return Err(ErrorKind::Arity),
                    [V::List(items)] => items.to_vec(),
                    _ => args.to_vec(),
                };
                let mut best = items.first().cloned().ok_or(ErrorKind::Value)?;
                for item in &items[1..] {
                    // Python keeps the first of equal elements.
                    let op = if self == Builtin::Min { super::ast::BinOp::Lt } else { super::ast::BinOp::Gt };
                    if super::ops::binary(op, item, &best)? == V::Bool(true) {
                        best = item.clone();
                    }
                }
                Ok(best)
            }
        }
    }
}

fn to_f64(v: &PlainValue) -> Result<f64, ErrorKind> {
    match v {
        PlainValue::Int(i) => Ok(*i as f64),
        PlainValue::Float(f) => Ok(*f),
        _ => Err(ErrorKind::Type),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PlainValue as V;

    #[test]
    fn basic_builtins() {
        assert_eq!(Builtin::Len.call(&[V::str("héllo")]), Ok(V::Int(5)));
        assert_eq!(Builtin::Ord.call(&[V::str("a")]), Ok(V::Int(97)));
        assert_eq!(Builtin::Chr.call(&[V::Int(98)]), Ok(V::str("b")));
        assert_eq!(Builtin::Chr.call(&[V::Int(-1)]), Err(ErrorKind::Value));
        assert_eq!(Builtin::Abs.call(&[V::Int(-3)]), Ok(V::Int(3)));
        assert_eq!(Builtin::Max.call(&[V::Int(1), V::Float(2.5), V::Int(2)]), Ok(V::Float(2.5)));
        assert_eq!(Builtin::Min.call(&[V::list(vec![V::Int(4), V::Int(-2)])]), Ok(V::Int(-2)));
        assert_eq!(Builtin::Sqrt.call(&[V::Int(-1)]), Err(ErrorKind::Value));
        assert_eq!(Builtin::Int.call(&[V::Float(-2.7)]), Ok(V::Int(-2)));
        assert_eq!(Builtin::Int.call(&[V::Float(f64::NAN)]), Err(ErrorKind::Overflow));
        assert_eq!(Builtin::Print.call(&[V::Int(1), V::Int(2)]), Ok(V::None));
        assert_eq!(Builtin::Len.call(&[]), Err(ErrorKind::Arity));
    }
}
