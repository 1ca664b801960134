use num_integer::Integer;
use num_traits::Zero;

use super::formula::Formula;
use super::term::Term;
use super::types::{is_integral, Model, Rational, Value};
use super::LogicError;

pub fn eval_term(t: &Term, m: &Model) -> Result<Rational, LogicError> {
    Ok(match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => match m.get(v) {
            Some(Value::Num(r)) => r.clone(),
            Some(Value::Bool(_)) => {
                return Err(LogicError::SortMismatch(format!("{v} is boolean in the model")))
            }
            None => return Err(LogicError::UnboundVariable(v.name().to_string())),
        },
        Term::Neg(t) => -eval_term(t, m)?,
        Term::Add(ts) => {
            let mut acc = Rational::zero();
            for t in ts {
                acc += eval_term(t, m)?;
            }
            acc
        }
        Term::Mul(k, t) => k * eval_term(t, m)?,
        Term::Ite(c, a, b) => {
            if eval(c, m)? {
                eval_term(a, m)?
            } else {
                eval_term(b, m)?
            }
        }
    })
}

/// Exact evaluation of a formula under a model covering its free variables.
pub fn eval(f: &Formula, m: &Model) -> Result<bool, LogicError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a, op, b) => {
            let x = eval_term(a, m)?;
            let y = eval_term(b, m)?;
            op.holds(&x, &y)
        }
        Formula::Divides(k, t) => {
            let v = eval_term(t, m)?;
            is_integral(&v) && v.numer().is_multiple_of(k)
        }
        Formula::BoolVar(v) => match m.get(v) {
            Some(Value::Bool(b)) => *b,
            Some(Value::Num(_)) => {
                return Err(LogicError::SortMismatch(format!("{v} is numeric in the model")))
            }
            None => return Err(LogicError::UnboundVariable(v.name().to_string())),
        },
        Formula::Not(g) => !eval(g, m)?,
        Formula::And(fs) => {
            for g in fs {
                if !eval(g, m)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval(g, m)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !eval(a, m)? || eval(b, m)?,
        Formula::Iff(a, b) => eval(a, m)? == eval(b, m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::types::{rat, ratio, Var};

    fn num(r: Rational) -> Value {
        Value::Num(r)
    }

    #[test]
    fn boundary_of_non_strict_atom() {
        let x = Var::real("x");
        let f = Formula::le(Term::var(&x), Term::int(5));
        let m = Model::new().with(&x, num(rat(5)));
        assert!(eval(&f, &m).unwrap());
    }

    #[test]
    fn initial_bucket_equation() {
        let b1 = Var::real("b1");
        let f = Formula::and([
            Formula::eq(Term::var(&b1), Term::int(0)),
            Formula::le(Term::var(&b1), Term::int(2)),
        ]);
        let m = Model::new().with(&b1, num(rat(0)));
        assert!(eval(&f, &m).unwrap());
    }

    #[test]
    fn exact_fraction_comparison() {
        let x = Var::real("x");
        let y = Var::real("y");
        let lhs = Term::sum([Term::scale(rat(2), Term::var(&x)), Term::scale(rat(3), Term::var(&y))]);
        let f = Formula::lt(lhs, Term::int(1));
        let m = Model::new().with(&x, num(ratio(1, 3))).with(&y, num(rat(0)));
        assert!(eval(&f, &m).unwrap());
    }

    #[test]
    fn unbound_and_sort_errors() {
        let x = Var::real("x");
        let b = Var::bool("b");
        let f = Formula::le(Term::var(&x), Term::int(5));
        assert!(matches!(eval(&f, &Model::new()), Err(LogicError::UnboundVariable(_))));
        let bad = Var::real("b");
        let m = Model::new().with(&b, Value::Bool(true));
        let g = Formula::le(Term::var(&bad), Term::int(0));
        // `b:real` is not bound even though `b:bool` is.
        assert!(eval(&g, &m).is_err());
    }

    #[test]
    fn divisibility() {
        let n = Var::int("n");
        let f = Formula::Divides(3.into(), Term::var(&n));
        assert!(eval(&f, &Model::new().with(&n, num(rat(-6)))).unwrap());
        assert!(!eval(&f, &Model::new().with(&n, num(rat(4)))).unwrap());
    }
}
