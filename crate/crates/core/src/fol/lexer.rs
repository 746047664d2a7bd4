//! Tokenizer for the constraint language.

use super::{FolError, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Forall,
    Exists,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Equals,
    LParen,
    RParen,
    Comma,
    Colon,
}

impl std::fmt::Display for TokenKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TokenKind::Identifier => "identifier",
            TokenKind::Forall => "'forall'",
            TokenKind::Exists => "'exists'",
            TokenKind::Not => "'not'",
            TokenKind::And => "'and'",
            TokenKind::Or => "'or'",
            TokenKind::Implies => "'implies'",
            TokenKind::Iff => "'iff'",
            TokenKind::Equals => "'='",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Comma => "','",
            TokenKind::Colon => "':'",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: Position,
    /// Byte offset of the lexeme in the source, so tokens can be checked
    /// against (and re-assembled into) the original text.
    pub offset: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens.
///
/// Keywords `forall exists not and or implies iff` are reserved; the
/// symbols `=> <=> & | ~ =` alias `implies iff and or not equals`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FolError> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut column = 1;
    let mut offset = 0;

    macro_rules! push {
        ($kind:expr, $lexeme:expr, $len:expr) => {{
            tokens.push(Token {
                kind: $kind,
                lexeme: $lexeme.to_string(),
                position: Position { line, column },
                offset,
            });
            for _ in 0..$len {
                offset += bytes[i].len_utf8();
                column += 1;
                i += 1;
            }
        }};
    }

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\r' => {
                offset += c.len_utf8();
                column += 1;
                i += 1;
            }
            '\n' => {
                offset += 1;
                line += 1;
                column = 1;
                i += 1;
            }
            '(' => push!(TokenKind::LParen, "(", 1),
            ')' => push!(TokenKind::RParen, ")", 1),
            ',' => push!(TokenKind::Comma, ",", 1),
            ':' => push!(TokenKind::Colon, ":", 1),
            '~' => push!(TokenKind::Not, "~", 1),
            '&' => push!(TokenKind::And, "&", 1),
            '|' => push!(TokenKind::Or, "|", 1),
            '=' => {
                if bytes.get(i + 1) == Some(&'>') {
                    push!(TokenKind::Implies, "=>", 2);
                } else {
                    push!(TokenKind::Equals, "=", 1);
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&'=') && bytes.get(i + 2) == Some(&'>') {
                    push!(TokenKind::Iff, "<=>", 3);
                } else {
                    return Err(FolError::IllegalCharacter {
                        ch: c,
                        position: Position { line, column },
                    });
                }
            }
            c if is_ident_start(c) => {
                let start = i;
                let mut end = i;
                while end < bytes.len() && is_ident_continue(bytes[end]) {
                    end += 1;
                }
                let word: String = bytes[start..end].iter().collect();
                if word.chars().all(|c| c == '_') {
                    return Err(FolError::UnterminatedIdentifier {
                        position: Position { line, column },
                    });
                }
                let kind = match word.as_str() {
                    "forall" => TokenKind::Forall,
                    "exists" => TokenKind::Exists,
                    "not" => TokenKind::Not,
                    "and" => TokenKind::And,
                    "or" => TokenKind::Or,
                    "implies" => TokenKind::Implies,
                    "iff" => TokenKind::Iff,
                    _ => TokenKind::Identifier,
                };
                let len = end - start;
                push!(kind, word, len);
            }
            _ => {
                return Err(FolError::IllegalCharacter {
                    ch: c,
                    position: Position { line, column },
                })
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_formula() {
        let toks = tokenize("forall x: zero(x)").unwrap();
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Forall,
                TokenKind::Identifier,
                TokenKind::Colon,
                TokenKind::Identifier,
                TokenKind::LParen,
                TokenKind::Identifier,
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn nested_application_token_count() {
        let toks = tokenize("d_F(g_F(e(x)))").unwrap();
        assert_eq!(toks.len(), 10);
        assert!(toks[7..].iter().all(|t| t.kind == TokenKind::RParen));
    }

    #[test]
    fn illegal_character_is_positioned() {
        let err = tokenize("forall x: p(x) @ q(x)").unwrap_err();
        match err {
            FolError::IllegalCharacter { ch, position } => {
                assert_eq!(ch, '@');
                assert_eq!(position.line, 1);
                assert_eq!(position.column, 16);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn aliases_map_to_keywords() {
        let toks = tokenize("~p(x) & q(x) | r(x) => s(x) <=> t(x)").unwrap();
        let ops: Vec<TokenKind> = toks
            .iter()
            .filter(|t| {
                matches!(
                    t.kind,
                    TokenKind::Not
                        | TokenKind::And
                        | TokenKind::Or
                        | TokenKind::Implies
                        | TokenKind::Iff
                )
            })
            .map(|t| t.kind)
            .collect();
        assert_eq!(
            ops,
            vec![
                TokenKind::Not,
                TokenKind::And,
                TokenKind::Or,
                TokenKind::Implies,
                TokenKind::Iff,
            ]
        );
    }

    #[test]
    fn underscore_only_identifier_rejected() {
        assert!(matches!(
            tokenize("forall _: p(_)"),
            Err(FolError::UnterminatedIdentifier { .. })
        ));
    }

    #[test]
    fn lexemes_slice_the_source_in_order() {
        let src = "forall x:  Married(x, y)\n  implies q(x)";
        let toks = tokenize(src).unwrap();
        let mut last_end = 0;
        for t in &toks {
            assert!(t.offset >= last_end, "tokens must not overlap");
            assert_eq!(&src[t.offset..t.offset + t.lexeme.len()], t.lexeme);
            last_end = t.offset + t.lexeme.len();
        }
        // Positions strictly increase.
        for pair in toks.windows(2) {
            let (a, b) = (pair[0].position, pair[1].position);
            assert!(a.line < b.line || (a.line == b.line && a.column < b.column));
        }
    }
}
