//! Formula rendering. `pretty` emits minimal parentheses and reparses to a
//! structurally identical tree; `pretty_full_parens` parenthesizes every
//! compound subformula, which the precedence tests lean on.

use super::{Connective, Formula, Term};

pub fn pretty(f: &Formula) -> String {
    let mut out = String::new();
    render(f, 0, &mut out);
    out
}

pub fn pretty_full_parens(f: &Formula) -> String {
    let mut out = String::new();
    render_full(f, &mut out);
    out
}

fn level(op: Connective) -> u8 {
    match op {
        Connective::Iff => 1,
        Connective::Implies => 2,
        Connective::Or => 3,
        Connective::And => 4,
        Connective::Not => 5,
    }
}

/// `ctx` is the minimum binding strength the surrounding position demands;
/// 0 means top level.
fn render(f: &Formula, ctx: u8, out: &mut String) {
    match f {
        Formula::Quantified {
            quantifier,
            var,
            domain,
            body,
        } => {
            // A quantifier swallows everything to its right, so anywhere
            // but the top level (or directly under another quantifier,
            // which passes ctx 0) it needs parentheses.
            let wrap = ctx > 0;
            if wrap {
                out.push('(');
            }
            out.push_str(&quantifier.to_string());
            out.push(' ');
            out.push_str(var);
            if let Some(d) = domain {
                out.push_str(" in ");
                out.push_str(d);
            }
            out.push_str(": ");
            render(body, 0, out);
            if wrap {
                out.push(')');
            }
        }
        Formula::Connective {
            op: Connective::Not,
            children,
        } => {
            out.push_str("not ");
            render(&children[0], level(Connective::Not), out);
        }
        Formula::Connective { op, children } => {
            let l = level(*op);
            let wrap = ctx > l;
            if wrap {
                out.push('(');
            }
            let right_assoc = matches!(op, Connective::Implies | Connective::Iff);
            let (lctx, rctx) = if right_assoc { (l + 1, l) } else { (l, l + 1) };
            render(&children[0], lctx, out);
            out.push(' ');
            out.push_str(op.keyword());
            out.push(' ');
            render(&children[1], rctx, out);
            if wrap {
                out.push(')');
            }
        }
        Formula::Predicate { symbol, args } => {
            out.push_str(symbol);
            render_args(args, out);
        }
        Formula::Equality { left, right } => {
            render_term(left, out);
            out.push_str(" = ");
            render_term(right, out);
        }
    }
}

fn render_full(f: &Formula, out: &mut String) {
    match f {
        Formula::Quantified {
            quantifier,
            var,
            domain,
            body,
        } => {
            out.push('(');
            out.push_str(&quantifier.to_string());
            out.push(' ');
            out.push_str(var);
            if let Some(d) = domain {
                out.push_str(" in ");
                out.push_str(d);
            }
            out.push_str(": ");
            render_full(body, out);
            out.push(')');
        }
        Formula::Connective {
            op: Connective::Not,
            children,
        } => {
            out.push_str("(not ");
            render_full(&children[0], out);
            out.push(')');
        }
        Formula::Connective { op, children } => {
            out.push('(');
            render_full(&children[0], out);
            out.push(' ');
            out.push_str(op.keyword());
            out.push(' ');
            render_full(&children[1], out);
            out.push(')');
        }
        Formula::Predicate { .. } | Formula::Equality { .. } => render(f, 6, out),
    }
}

fn render_args(args: &[Term], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        render_term(a, out);
    }
    out.push(')');
}

fn render_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::App { symbol, args } => {
            out.push_str(symbol);
            render_args(args, out);
        }
    }
}

pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    render_term(t, &mut s);
    s
}
