use std::fmt;

use crate::model::{Alphabet, EventId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl RelOp {
    pub fn eval(self, lhs: u32, rhs: u32) -> bool {
        match self {
            RelOp::Lt => lhs < rhs,
            RelOp::Le => lhs <= rhs,
            RelOp::Eq => lhs == rhs,
            RelOp::Ge => lhs >= rhs,
            RelOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Eq => "=",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
        }
    }

    pub const ALL: [RelOp; 5] = [RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ge, RelOp::Gt];
}

/// Queue temporal logic formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    /// The queue is nonempty and its head is the event.
    Head(EventId),
    /// `#e op c`: occurrences of `e` in the current suffix compared to `c`.
    Rel(EventId, RelOp, u32),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a -> b`, desugared to `!a || b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn contains_and(&self) -> bool {
        match self {
            Formula::And(..) => true,
            Formula::True | Formula::False | Formula::Head(_) | Formula::Rel(..) => false,
            Formula::Next(f) | Formula::Eventually(f) | Formula::Globally(f) | Formula::Not(f) => {
                f.contains_and()
            }
            Formula::Or(a, b) => a.contains_and() || b.contains_and(),
        }
    }

    /// Largest relational constant, 0 if none.
    pub fn max_constant(&self) -> u32 {
        match self {
            Formula::Rel(_, _, c) => *c,
            Formula::True | Formula::False | Formula::Head(_) => 0,
            Formula::Next(f) | Formula::Eventually(f) | Formula::Globally(f) | Formula::Not(f) => {
                f.max_constant()
            }
            Formula::And(a, b) | Formula::Or(a, b) => a.max_constant().max(b.max_constant()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Head(_) | Formula::Rel(..) => 0,
            Formula::Next(f) | Formula::Eventually(f) | Formula::Globally(f) | Formula::Not(f) => {
                1 + f.depth()
            }
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn events(&self, out: &mut Vec<EventId>) {
        match self {
            Formula::Head(e) | Formula::Rel(e, _, _) => {
                if !out.contains(e) {
                    out.push(*e)
                }
            }
            Formula::True | Formula::False => {}
            Formula::Next(f) | Formula::Eventually(f) | Formula::Globally(f) | Formula::Not(f) => {
                f.events(out)
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.events(out);
                b.events(out)
            }
        }
    }

    /// Renders in the `.qutl` grammar; binary operators are parenthesized so
    /// the output reparses to the same tree.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            alphabet,
        }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    alphabet: &'a Alphabet,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self.formula, self.alphabet)
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, a: &Alphabet) -> fmt::Result {
    match phi {
        Formula::True => write!(f, "true"),
        Formula::False => write!(f, "false"),
        Formula::Head(e) => write!(f, "{}", a.name(*e)),
        Formula::Rel(e, op, c) => write!(f, "#{} {} {}", a.name(*e), op.symbol(), c),
        Formula::Next(x) | Formula::Eventually(x) | Formula::Globally(x) => {
            let op = match phi {
                Formula::Next(_) => "X",
                Formula::Eventually(_) => "F",
                _ => "G",
            };
            write!(f, "{op} ")?;
            write_formula(f, x, a)
        }
        Formula::Not(x) => {
            write!(f, "!")?;
            write_formula(f, x, a)
        }
        Formula::And(x, y) | Formula::Or(x, y) => {
            let op = if matches!(phi, Formula::And(..)) { "&&" } else { "||" };
            write!(f, "(")?;
            write_formula(f, x, a)?;
            write!(f, " {op} ")?;
            write_formula(f, y, a)?;
            write!(f, ")")
        }
    }
}
