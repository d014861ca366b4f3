use super::lexer::{tokenize, Token};
use super::{BinOp, Func, Node, NodeKind, ParseError, Span, Var};

pub(crate) struct Parser {
    tokens: Vec<(Token, Span)>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Self {
            tokens: tokenize(src)?,
            pos: 0,
        })
    }

    pub(crate) fn parse(mut self) -> Result<Node, ParseError> {
        let node = self.expr()?;
        match self.peek() {
            Token::Eof => Ok(node),
            _ => Err(self.unexpected("an operator or end of input")),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Token, Span) {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.span().start,
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Token, expected: &str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        let span = lhs.span.join(rhs.span);
        Node {
            kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            span,
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Token::Minus {
            let (_, start) = self.bump();
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(Node {
                kind: NodeKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Self::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        match self.peek().clone() {
            Token::Number(x) => {
                let (_, span) = self.bump();
                Ok(Node {
                    kind: NodeKind::Number(x),
                    span,
                })
            }
            Token::LParen => {
                let (_, open) = self.bump();
                let inner = self.expr()?;
                let close = self.expect(Token::RParen, "`)`")?;
                Ok(Node {
                    kind: inner.kind,
                    span: open.join(close),
                })
            }
            Token::Ident(name) => {
                let span = self.span();
                match name.as_str() {
                    "t" => {
                        self.bump();
                        Ok(Node {
                            kind: NodeKind::Var(Var::T),
                            span,
                        })
                    }
                    "u" => {
                        self.bump();
                        Ok(Node {
                            kind: NodeKind::Var(Var::U),
                            span,
                        })
                    }
                    _ => {
                        let func = Func::from_name(&name).ok_or_else(|| ParseError {
                            offset: span.start,
                            expected: "`t`, `u` or one of sin, cos, exp, sqrt, abs".into(),
                            found: format!("unknown identifier `{name}`"),
                        })?;
                        self.bump();
                        self.expect(Token::LParen, "`(` after function name")?;
                        let arg = self.expr()?;
                        let close = self.expect(Token::RParen, "`)`")?;
                        Ok(Node {
                            kind: NodeKind::Call(func, Box::new(arg)),
                            span: span.join(close),
                        })
                    }
                }
            }
            _ => Err(self.unexpected("a number, variable, function call or `(`")),
        }
    }
}
