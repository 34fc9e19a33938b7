use super::{Operator, Output, Program, Skeleton, Slot};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown operator {name:?} at byte {pos}")]
    UnknownOperator { name: String, pos: usize },
    #[error("{op} takes {expected} argument(s), got {found} (byte {pos})")]
    Arity {
        op: &'static str,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("type mismatch at byte {pos}: {msg}")]
    Type { pos: usize, msg: String },
}

/// Untyped parse tree; slots are resolved in a second pass.
enum Raw<'a> {
    Call { name: &'a str, pos: usize, args: Vec<Raw<'a>> },
    Leaf { text: &'a str, pos: usize },
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn node(&mut self) -> Result<Raw<'a>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while !matches!(self.peek(), None | Some(b'{' | b'}' | b';')) {
            self.pos += 1;
        }
        let text = self.src[start..self.pos].trim();
        if self.peek() == Some(b'{') {
            if text.is_empty() {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: "missing operator name before '{'".into(),
                });
            }
            self.pos += 1;
            let mut args = vec![self.node()?];
            loop {
                match self.peek() {
                    Some(b';') => {
                        self.pos += 1;
                        args.push(self.node()?);
                    }
                    Some(b'}') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.syntax("expected ';' or '}'")),
                }
            }
            self.skip_ws();
            Ok(Raw::Call {
                name: text,
                pos: start,
                args,
            })
        } else if text.is_empty() {
            Err(self.syntax("empty argument"))
        } else {
            Ok(Raw::Leaf { text, pos: start })
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.syntax("trailing input")),
        }
    }
}

fn parse_raw(src: &str) -> Result<Raw<'_>, ParseError> {
    let mut lx = Lexer { src, pos: 0 };
    let root = lx.node()?;
    lx.finish()?;
    Ok(root)
}

fn accepts(slot: Slot, out: Output) -> bool {
    match slot {
        Slot::Rows => out == Output::Rows,
        Slot::Value | Slot::Number => matches!(out, Output::Number | Output::Cell),
        Slot::Bool => out == Output::Bool,
        Slot::Column | Slot::NumColumn | Slot::Literal | Slot::NumLiteral => false,
    }
}

fn build(raw: &Raw<'_>, slot: Option<Slot>) -> Result<Program, ParseError> {
    match raw {
        Raw::Call { name, pos, args } => {
            let op = Operator::from_name(name).ok_or_else(|| ParseError::UnknownOperator {
                name: name.to_string(),
                pos: *pos,
            })?;
            if args.len() != op.arity() {
                return Err(ParseError::Arity {
                    op: op.name(),
                    expected: op.arity(),
                    found: args.len(),
                    pos: *pos,
                });
            }
            if let Some(slot) = slot {
                if !accepts(slot, op.output()) {
                    return Err(ParseError::Type {
                        pos: *pos,
                        msg: format!("{} cannot fill a {slot:?} argument", op.name()),
                    });
                }
            }
            let args = args
                .iter()
                .zip(op.slots())
                .map(|(a, s)| build(a, Some(*s)))
                .collect::<Result<_, _>>()?;
            Ok(Program::Apply(op, args))
        }
        Raw::Leaf { text, pos } => match slot {
            None | Some(Slot::Rows) if *text == "all_rows" => Ok(Program::AllRows),
            Some(Slot::Column | Slot::NumColumn) => Ok(Program::Column(text.to_string())),
            Some(Slot::Literal | Slot::NumLiteral | Slot::Value | Slot::Number) => {
                Ok(Program::Literal(text.to_string()))
            }
            Some(Slot::Rows) => Err(ParseError::Type {
                pos: *pos,
                msg: format!("expected a row set, found {text:?}"),
            }),
            Some(Slot::Bool) => Err(ParseError::Type {
                pos: *pos,
                msg: format!("expected a Boolean operator, found {text:?}"),
            }),
            None => Err(ParseError::Syntax {
                pos: *pos,
                msg: format!("expected an operator, found {text:?}"),
            }),
        },
    }
}

/// Parse `name{arg;arg;...}` syntax. Whitespace around tokens is ignored;
/// leaf tokens may contain inner spaces but not `{`, `}` or `;`.
///
/// Arity and operator/slot compatibility are checked here. Column kinds need
/// a table and are checked by [`super::type_check`].
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    build(&parse_raw(src)?, None)
}

pub(super) fn parse_skeleton(src: &str) -> Result<Skeleton, ParseError> {
    fn go(raw: &Raw<'_>) -> Result<Skeleton, ParseError> {
        match raw {
            Raw::Call { name, pos, args } => {
                let op = Operator::from_name(name).ok_or_else(|| ParseError::UnknownOperator {
                    name: name.to_string(),
                    pos: *pos,
                })?;
                if args.len() != op.arity() {
                    return Err(ParseError::Arity {
                        op: op.name(),
                        expected: op.arity(),
                        found: args.len(),
                        pos: *pos,
                    });
                }
                Ok(Skeleton::Node(op, args.iter().map(go).collect::<Result<_, _>>()?))
            }
            Raw::Leaf { text: "_", .. } => Ok(Skeleton::Hole),
            Raw::Leaf { text, pos } => Err(ParseError::Syntax {
                pos: *pos,
                msg: format!("skeleton leaves must be '_', found {text:?}"),
            }),
        }
    }
    go(&parse_raw(src)?)
}
