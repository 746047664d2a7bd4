//! Recursive-descent parser.
//!
//! Precedence, tightest first: `not`, `and`, `or`, `implies`, `iff`.
//! Implication and equivalence are right-associative, `and`/`or` fold to
//! the left. A quantifier's scope extends maximally to the right, so
//! `forall x: p(x) and q(x)` quantifies over the whole conjunction.

use super::lexer::{Token, TokenKind};
use super::{tokenize, Connective, FolError, Formula, Position, Quantifier, Term};

/// Tokenizes and parses a complete formula, rejecting trailing input.
pub fn parse_source(source: &str) -> Result<Formula, FolError> {
    parse_formula(&tokenize(source)?)
}

/// Parses a token stream into a formula, rejecting trailing input.
pub fn parse_formula(tokens: &[Token]) -> Result<Formula, FolError> {
    let mut p = Parser { tokens, pos: 0 };
    let formula = p.iff_expr()?;
    if let Some(t) = p.peek() {
        return Err(FolError::UnexpectedToken {
            expected: "end of input".into(),
            got: format!("{} '{}'", t.kind, t.lexeme),
            position: t.position,
        });
    }
    Ok(formula)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn end_position(&self) -> Position {
        self.tokens
            .last()
            .map(|t| Position {
                line: t.position.line,
                column: t.position.column + t.lexeme.chars().count(),
            })
            .unwrap_or(Position { line: 1, column: 1 })
    }

    fn unexpected(&self, expected: &str) -> FolError {
        match self.peek() {
            Some(t) => FolError::UnexpectedToken {
                expected: expected.into(),
                got: format!("{} '{}'", t.kind, t.lexeme),
                position: t.position,
            },
            None => FolError::UnexpectedToken {
                expected: expected.into(),
                got: "end of input".into(),
                position: self.end_position(),
            },
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'a Token, FolError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.bump().unwrap()),
            _ => Err(self.unexpected(&kind.to_string())),
        }
    }

    fn iff_expr(&mut self) -> Result<Formula, FolError> {
        let left = self.implies_expr()?;
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::Iff) {
            self.bump();
            let right = self.iff_expr()?;
            return Ok(Formula::binary(Connective::Iff, left, right));
        }
        Ok(left)
    }

    fn implies_expr(&mut self) -> Result<Formula, FolError> {
        let left = self.or_expr()?;
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::Implies) {
            self.bump();
            let right = self.implies_expr()?;
            return Ok(Formula::binary(Connective::Implies, left, right));
        }
        Ok(left)
    }

    fn or_expr(&mut self) -> Result<Formula, FolError> {
        let mut left = self.and_expr()?;
        while matches!(self.peek(), Some(t) if t.kind == TokenKind::Or) {
            self.bump();
            let right = self.and_expr()?;
            left = Formula::binary(Connective::Or, left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Formula, FolError> {
        let mut left = self.unary()?;
        while matches!(self.peek(), Some(t) if t.kind == TokenKind::And) {
            self.bump();
            let right = self.unary()?;
            left = Formula::binary(Connective::And, left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FolError> {
        match self.peek().map(|t| t.kind) {
            Some(TokenKind::Not) => {
                self.bump();
                let inner = self.unary()?;
                Ok(Formula::negated(inner))
            }
            Some(TokenKind::Forall) | Some(TokenKind::Exists) => self.quantified(),
            _ => self.primary(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, FolError> {
        let q_tok = self.bump().expect("caller peeked a quantifier");
        let quantifier = match q_tok.kind {
            TokenKind::Forall => Quantifier::Forall,
            TokenKind::Exists => Quantifier::Exists,
            _ => unreachable!(),
        };
        let var = self.expect(TokenKind::Identifier)?.lexeme.clone();
        // Optional `in <domain>` before the colon; `in` is contextual, not
        // a reserved word.
        let mut domain = None;
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::Identifier && t.lexeme == "in") {
            self.bump();
            domain = Some(self.expect(TokenKind::Identifier)?.lexeme.clone());
        }
        self.expect(TokenKind::Colon)?;
        if self.peek().is_none() {
            return Err(FolError::DanglingQuantifier {
                position: q_tok.position,
            });
        }
        let body = self.iff_expr()?;
        Ok(Formula::Quantified {
            quantifier,
            var,
            domain,
            body: Box::new(body),
        })
    }

    fn primary(&mut self) -> Result<Formula, FolError> {
        match self.peek().map(|t| t.kind) {
            Some(TokenKind::LParen) => {
                self.bump();
                let inner = self.iff_expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            Some(TokenKind::Identifier) => self.atom(),
            _ => Err(self.unexpected("a formula")),
        }
    }

    /// `atom := term ('=' term)?`; a plain term is only a formula when it
    /// is a predicate application.
    fn atom(&mut self) -> Result<Formula, FolError> {
        let start = self.peek().expect("caller peeked an identifier").position;
        let left = self.term()?;
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::Equals) {
            self.bump();
            let right = self.term()?;
            return Ok(Formula::Equality { left, right });
        }
        match left {
            Term::App { symbol, args } => Ok(Formula::Predicate { symbol, args }),
            Term::Var(_) => Err(FolError::TermAsFormula { position: start }),
        }
    }

    fn term(&mut self) -> Result<Term, FolError> {
        let name = self.expect(TokenKind::Identifier)?.lexeme.clone();
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::LParen) {
            self.bump();
            let mut args = vec![self.term()?];
            while matches!(self.peek(), Some(t) if t.kind == TokenKind::Comma) {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(TokenKind::RParen)?;
            return Ok(Term::App { symbol: name, args });
        }
        Ok(Term::Var(name))
    }
}
