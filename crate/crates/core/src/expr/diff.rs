use super::{BinaryOp, EvalError, Expr, UnaryOp};

use BinaryOp::{Add, Div, Mul, Sub};

/// Points sampled by [`derivative_on`] to decide the sign of kink arguments.
const SIGN_SAMPLES: usize = 1001;

/// Symbolic derivative of a smooth expression, simplified by constant
/// folding and unit rules. Fails on `abs` and `max`.
pub fn derivative(e: &Expr) -> Result<Expr, EvalError> {
    Ok(simplify(&diff(e)?))
}

/// Derivative on `[a, b]`: `abs(u)` and `max(u, v)` are accepted when
/// sampling shows that `u` (respectively `u - v`) keeps one sign on the
/// interval, in which case the active branch is differentiated.
pub fn derivative_on(e: &Expr, a: f64, b: f64) -> Result<Expr, EvalError> {
    derivative(&resolve_kinks(e, a, b)?)
}

fn resolve_kinks(e: &Expr, a: f64, b: f64) -> Result<Expr, EvalError> {
    Ok(match e {
        Expr::Const(_) | Expr::Var => e.clone(),
        Expr::Unary(UnaryOp::Abs, u) => {
            let u = resolve_kinks(u, a, b)?;
            match sign_on(&u, a, b) {
                Some(true) => u,
                Some(false) => Expr::unary(UnaryOp::Neg, u),
                None => return Err(kink_error(e, a, b)),
            }
        }
        Expr::Max(l, r) => {
            let (l, r) = (resolve_kinks(l, a, b)?, resolve_kinks(r, a, b)?);
            match sign_on(&Expr::binary(Sub, l.clone(), r.clone()), a, b) {
                Some(true) => l,
                Some(false) => r,
                None => return Err(kink_error(e, a, b)),
            }
        }
        Expr::Unary(op, u) => Expr::unary(*op, resolve_kinks(u, a, b)?),
        Expr::Binary(op, l, r) => Expr::binary(*op, resolve_kinks(l, a, b)?, resolve_kinks(r, a, b)?),
        Expr::Pow(u, p) => Expr::pow(resolve_kinks(u, a, b)?, *p),
    })
}

/// `Some(true)` if `e >= 0` at every finite sample, `Some(false)` if
/// `e <= 0` everywhere, `None` on a sign change.
fn sign_on(e: &Expr, a: f64, b: f64) -> Option<bool> {
    let (mut pos, mut neg) = (false, false);
    for i in 0..SIGN_SAMPLES {
        let t = a + (b - a) * i as f64 / (SIGN_SAMPLES - 1) as f64;
        let v = e.eval_ieee(t);
        pos |= v > 0.0;
        neg |= v < 0.0;
    }
    match (pos, neg) {
        (true, true) => None,
        (false, true) => Some(false),
        _ => Some(true),
    }
}

fn kink_error(e: &Expr, a: f64, b: f64) -> EvalError {
    EvalError::NonSmooth {
        subexpression: e.to_string(),
        where_: format!(" on [{a}, {b}]"),
    }
}

fn diff(e: &Expr) -> Result<Expr, EvalError> {
    let c = Expr::Const;
    Ok(match e {
        Expr::Const(_) => c(0.0),
        Expr::Var => c(1.0),
        Expr::Unary(op, u) => {
            let du = diff(u)?;
            let u = (**u).clone();
            match op {
                UnaryOp::Neg => Expr::unary(UnaryOp::Neg, du),
                UnaryOp::Exp => Expr::binary(Mul, Expr::unary(UnaryOp::Exp, u), du),
                UnaryOp::Log => Expr::binary(Div, du, u),
                UnaryOp::Sqrt => Expr::binary(Div, du, Expr::binary(Mul, c(2.0), Expr::unary(UnaryOp::Sqrt, u))),
                UnaryOp::Abs => {
                    return Err(EvalError::NonSmooth {
                        subexpression: e.to_string(),
                        where_: String::new(),
                    })
                }
            }
        }
        Expr::Max(..) => {
            return Err(EvalError::NonSmooth {
                subexpression: e.to_string(),
                where_: String::new(),
            })
        }
        Expr::Binary(op, l, r) => {
            let (dl, dr) = (diff(l)?, diff(r)?);
            let (l, r) = ((**l).clone(), (**r).clone());
            match op {
                Add | Sub => Expr::binary(*op, dl, dr),
                Mul => Expr::binary(Add, Expr::binary(Mul, dl, r), Expr::binary(Mul, l, dr)),
                Div => Expr::binary(
                    Div,
                    Expr::binary(Sub, Expr::binary(Mul, dl, r.clone()), Expr::binary(Mul, l, dr)),
                    Expr::pow(r, 2.0),
                ),
            }
        }
        Expr::Pow(u, p) => Expr::binary(
            Mul,
            Expr::binary(Mul, c(*p), Expr::pow((**u).clone(), p - 1.0)),
            diff(u)?,
        ),
    })
}

/// Constant folding plus the identities `0 + a`, `a - 0`, `1 * a`,
/// `0 * a`, `a / 1`, `a / a`, `a * (1 / b)`, `a^1`, `a^0`, `--a`.
pub fn simplify(e: &Expr) -> Expr {
    let folded = match e {
        Expr::Const(_) | Expr::Var => return e.clone(),
        Expr::Unary(op, u) => simplify_unary(*op, simplify(u)),
        Expr::Binary(op, l, r) => simplify_binary(*op, simplify(l), simplify(r)),
        Expr::Pow(u, p) => match (simplify(u), *p) {
            (_, 0.0) => Expr::Const(1.0),
            (u, 1.0) => u,
            (u, p) => Expr::pow(u, p),
        },
        Expr::Max(l, r) => Expr::max(simplify(l), simplify(r)),
    };
    fold(folded)
}

/// Replaces a variable-free tree by its value when that is finite.
fn fold(e: Expr) -> Expr {
    if matches!(e, Expr::Const(_)) || e.contains_var() {
        return e;
    }
    match e.eval(0.0) {
        Ok(v) => Expr::Const(v),
        Err(_) => e,
    }
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn simplify_unary(op: UnaryOp, u: Expr) -> Expr {
    match (op, u) {
        (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner)) => *inner,
        (op, u) => Expr::unary(op, u),
    }
}

fn simplify_binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
    match op {
        Add if is_const(&l, 0.0) => r,
        Add if is_const(&r, 0.0) => l,
        Add => match r {
            Expr::Unary(UnaryOp::Neg, inner) => Expr::binary(Sub, l, *inner),
            r => Expr::binary(Add, l, r),
        },
        Sub if is_const(&r, 0.0) => l,
        Sub if is_const(&l, 0.0) => simplify_unary(UnaryOp::Neg, r),
        Mul if is_const(&l, 0.0) || is_const(&r, 0.0) => Expr::Const(0.0),
        Mul if is_const(&l, 1.0) => r,
        Mul if is_const(&r, 1.0) => l,
        Mul if is_const(&l, -1.0) => simplify_unary(UnaryOp::Neg, r),
        Mul => match (l, r) {
            (a, Expr::Binary(Div, one, b)) | (Expr::Binary(Div, one, b), a) if is_const(&one, 1.0) => {
                simplify_binary(Div, a, *b)
            }
            (l, r) => Expr::binary(Mul, l, r),
        },
        Div if is_const(&r, 1.0) => l,
        Div if is_const(&l, 0.0) => Expr::Const(0.0),
        Div if l == r => Expr::Const(1.0),
        _ => Expr::binary(op, l, r),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn d(src: &str) -> Expr {
        derivative(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn structural_examples() {
        assert_eq!(d("x^2"), parse("2*x").unwrap());
        assert_eq!(d("x*log(x)"), parse("log(x) + 1").unwrap());
        assert_eq!(d("exp(x)"), parse("exp(x)").unwrap());
        assert_eq!(d("3*x + 2"), Expr::Const(3.0));
        assert_eq!(d("-x"), Expr::Const(-1.0));
    }

    #[test]
    fn xlogx_matches_difference_quotients() {
        let e = parse("x*log(x)").unwrap();
        let de = d("x*log(x)");
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let h = 1e-6;
            let fd = (e.eval(t + h).unwrap() - e.eval(t - h).unwrap()) / (2.0 * h);
            assert!((de.eval(t).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn kinks() {
        let e = parse("abs(x-0.5)").unwrap();
        assert!(matches!(derivative(&e), Err(EvalError::NonSmooth { .. })));
        assert!(matches!(derivative_on(&e, 0.0, 1.0), Err(EvalError::NonSmooth { .. })));
        assert_eq!(derivative_on(&e, 0.0, 0.5).unwrap(), Expr::Const(-1.0));
        assert_eq!(derivative_on(&e, 0.5, 1.0).unwrap(), Expr::Const(1.0));
        let m = parse("max(x, 2 - x)").unwrap();
        assert!(derivative_on(&m, 0.0, 2.0).is_err());
        assert_eq!(derivative_on(&m, 1.5, 2.0).unwrap(), Expr::Const(1.0));
    }

    #[test]
    fn folding() {
        assert_eq!(simplify(&parse("2*3 + x*0").unwrap()), Expr::Const(6.0));
        assert_eq!(simplify(&parse("x/x").unwrap()), Expr::Const(1.0));
        assert_eq!(simplify(&parse("--x").unwrap()), Expr::Var);
        assert_eq!(simplify(&parse("(x + 0)^1").unwrap()), Expr::Var);
        // 1/0 is left alone rather than folded to an error
        assert_eq!(simplify(&parse("1/0").unwrap()), parse("1/0").unwrap());
    }
}
