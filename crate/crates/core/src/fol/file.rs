//! Constraint file reader.
//!
//! One formula per line; `#` starts a comment and blank lines are
//! skipped. A line may carry prefixes before the formula, in any order:
//!
//! ```text
//! weight=2.0 : group=discriminator [tnorm=product] forall x: S(x) implies d(x)
//! ```
//!
//! `weight=<float> :` sets the constraint's λ (default 1), `group=<name>`
//! assigns it to a training partition, and `[tnorm=<t>]` overrides the
//! global t-norm for this constraint only.

use super::{parse_source, FolError, Formula};
use crate::semantics::TNorm;

#[derive(Debug, Clone)]
pub struct ConstraintLine {
    /// 1-based line number in the file.
    pub line_no: usize,
    /// Formula text with prefixes stripped.
    pub source: String,
    pub formula: Formula,
    pub weight: f64,
    pub group: Option<String>,
    pub tnorm_override: Option<TNorm>,
}

pub fn parse_constraint_file(text: &str) -> Result<Vec<ConstraintLine>, FolError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (prefix, rest) = split_prefixes(line, line_no)?;
        let formula = parse_source(rest).map_err(|e| reposition(e, line_no))?;
        out.push(ConstraintLine {
            line_no,
            source: rest.to_string(),
            formula,
            weight: prefix.weight.unwrap_or(1.0),
            group: prefix.group,
            tnorm_override: prefix.tnorm,
        });
    }
    Ok(out)
}

#[derive(Default)]
struct Prefixes {
    weight: Option<f64>,
    group: Option<String>,
    tnorm: Option<TNorm>,
}

fn split_prefixes(line: &str, line_no: usize) -> Result<(Prefixes, &str), FolError> {
    let bad = |detail: String| FolError::BadLinePrefix {
        line: line_no,
        detail,
    };
    let mut prefixes = Prefixes::default();
    let mut rest = line;
    loop {
        rest = rest.trim_start();
        if let Some(tail) = rest.strip_prefix("[tnorm=") {
            let end = tail
                .find(']')
                .ok_or_else(|| bad("unclosed [tnorm=...] tag".into()))?;
            let name = &tail[..end];
            let t =
                TNorm::from_name(name).ok_or_else(|| bad(format!("unknown t-norm '{name}'")))?;
            if prefixes.tnorm.replace(t).is_some() {
                return Err(bad("duplicate [tnorm=...] tag".into()));
            }
            rest = &tail[end + 1..];
        } else if let Some(tail) = rest.strip_prefix("weight=") {
            let end = tail
                .find(|c: char| c.is_whitespace() || c == ':')
                .unwrap_or(tail.len());
            let value: f64 = tail[..end]
                .parse()
                .map_err(|_| bad(format!("bad weight value '{}'", &tail[..end])))?;
            if value < 0.0 {
                return Err(bad(format!("negative weight {value}")));
            }
            let after = tail[end..].trim_start();
            let after = after
                .strip_prefix(':')
                .ok_or_else(|| bad("weight= prefix must end with ':'".into()))?;
            if prefixes.weight.replace(value).is_some() {
                return Err(bad("duplicate weight= prefix".into()));
            }
            rest = after;
        } else if let Some(tail) = rest.strip_prefix("group=") {
            let end = tail
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
                .unwrap_or(tail.len());
            if end == 0 {
                return Err(bad("empty group name".into()));
            }
            let name = tail[..end].to_string();
            if prefixes.group.replace(name).is_some() {
                return Err(bad("duplicate group= tag".into()));
            }
            rest = &tail[end..];
        } else {
            break;
        }
    }
    Ok((prefixes, rest.trim_start()))
}

/// Formula errors inside a file report the file line, not line 1 of the
/// stripped text.
fn reposition(e: FolError, line_no: usize) -> FolError {
    fn fix(p: super::Position, line_no: usize) -> super::Position {
        super::Position {
            line: line_no,
            column: p.column,
        }
    }
    match e {
        FolError::IllegalCharacter { ch, position } => FolError::IllegalCharacter {
            ch,
            position: fix(position, line_no),
        },
        FolError::UnterminatedIdentifier { position } => FolError::UnterminatedIdentifier {
            position: fix(position, line_no),
        },
        FolError::UnexpectedToken {
            expected,
            got,
            position,
        } => FolError::UnexpectedToken {
            expected,
            got,
            position: fix(position, line_no),
        },
        FolError::DanglingQuantifier { position } => FolError::DanglingQuantifier {
            position: fix(position, line_no),
        },
        FolError::TermAsFormula { position } => FolError::TermAsFormula {
            position: fix(position, line_no),
        },
        other => other,
    }
}
