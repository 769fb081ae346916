//! A small arithmetic language over the time variable `t`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' factor)?          right-associative
//! unary   := '-' unary | primary
//! primary := number | 't' | func '(' expr ')' | '(' expr ')'
//! func    := exp | sqrt | log | sin | cos  (log is natural)
//! ```
//!
//! Unary minus binds looser than `^`, so `-2^2` evaluates to −4.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Ident,
    TimeVar,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Character offset into the source.
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Exp,
    Sqrt,
    Log,
    Sin,
    Cos,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Function::Exp,
            "sqrt" => Function::Sqrt,
            "log" => Function::Log,
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Sqrt => "sqrt",
            Function::Log => "log",
            Function::Sin => "sin",
            Function::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Number(f64),
    TimeVar,
    Negate(Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Call(Function, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected character {ch:?} at offset {position}")]
    Lex { ch: char, position: usize },
    #[error("parse error at offset {position}: {message}")]
    Parse { message: String, position: usize },
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: String },
}

pub type Result<T> = std::result::Result<T, ExprError>;

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match ch {
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            '^' => Some(TokenKind::Caret),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token {
                kind,
                lexeme: ch.to_string(),
                position: start,
            });
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            i = scan_number(&chars, i);
            tokens.push(Token {
                kind: TokenKind::Number,
                lexeme: chars[start..i].iter().collect(),
                position: start,
            });
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let lexeme: String = chars[start..i].iter().collect();
            let kind = if lexeme == "t" {
                TokenKind::TimeVar
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                lexeme,
                position: start,
            });
            continue;
        }
        return Err(ExprError::Lex { ch, position: start });
    }
    Ok(tokens)
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    // exponent only if digits follow, so "2e" lexes as number then ident
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

pub fn parse(tokens: &[Token]) -> Result<Expression> {
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        let message = if tok.kind == TokenKind::RParen {
            "unbalanced ')'".to_string()
        } else {
            format!("unexpected token {:?}", tok.lexeme)
        };
        return Err(ExprError::Parse {
            message,
            position: tok.position,
        });
    }
    Ok(expr)
}

/// Tokenize and parse in one step.
pub fn parse_str(src: &str) -> Result<Expression> {
    parse(&tokenize(src)?)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn end_position(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.position + t.lexeme.chars().count())
            .unwrap_or(0)
    }

    fn error_here(&self, message: impl Into<String>) -> ExprError {
        let position = self.peek().map(|t| t.position).unwrap_or_else(|| self.end_position());
        ExprError::Parse {
            message: message.into(),
            position,
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Plus) => Some(BinaryOp::Add),
            Some(TokenKind::Minus) => Some(BinaryOp::Sub),
            _ => None,
        } {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Star) => Some(BinaryOp::Mul),
            Some(TokenKind::Slash) => Some(BinaryOp::Div),
            _ => None,
        } {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expression> {
        let base = self.unary()?;
        if self.peek_kind() == Some(TokenKind::Caret) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expression::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.peek_kind() == Some(TokenKind::Minus) {
            self.pos += 1;
            // −a^b must negate the whole power, so descend through factor
            let inner = self.unary_operand()?;
            return Ok(Expression::Negate(Box::new(inner)));
        }
        self.primary()
    }

    /// Operand of a unary minus: another unary, or a primary raised to a power.
    fn unary_operand(&mut self) -> Result<Expression> {
        if self.peek_kind() == Some(TokenKind::Minus) {
            return self.unary();
        }
        let base = self.primary()?;
        if self.peek_kind() == Some(TokenKind::Caret) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expression::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expression> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("unexpected end of input"));
        };
        match tok.kind {
            TokenKind::Number => {
                self.pos += 1;
                let value: f64 = tok.lexeme.parse().map_err(|_| ExprError::Parse {
                    message: format!("invalid number {:?}", tok.lexeme),
                    position: tok.position,
                })?;
                if !value.is_finite() {
                    return Err(ExprError::Parse {
                        message: format!("number {:?} overflows", tok.lexeme),
                        position: tok.position,
                    });
                }
                Ok(Expression::Number(value))
            }
            TokenKind::TimeVar => {
                self.pos += 1;
                Ok(Expression::TimeVar)
            }
            TokenKind::Ident => {
                let Some(func) = Function::from_name(&tok.lexeme) else {
                    let what = if self.tokens.get(self.pos + 1).map(|t| t.kind) == Some(TokenKind::LParen) {
                        "unknown function"
                    } else {
                        "unknown identifier"
                    };
                    return Err(ExprError::Parse {
                        message: format!("{what} {:?}", tok.lexeme),
                        position: tok.position,
                    });
                };
                self.pos += 1;
                if self.peek_kind() != Some(TokenKind::LParen) {
                    return Err(self.error_here(format!("expected '(' after {}", func.name())));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_rparen(tok.position)?;
                Ok(Expression::Call(func, Box::new(arg)))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen(tok.position)?;
                Ok(inner)
            }
            TokenKind::RParen => Err(self.error_here("unbalanced ')'")),
            _ => Err(self.error_here(format!("unexpected token {:?}", tok.lexeme))),
        }
    }

    fn expect_rparen(&mut self, open_position: usize) -> Result<()> {
        match self.peek_kind() {
            Some(TokenKind::RParen) => {
                self.pos += 1;
                Ok(())
            }
            None => Err(ExprError::Parse {
                message: format!("unbalanced '(' opened at offset {open_position}"),
                position: self.end_position(),
            }),
            Some(_) => Err(self.error_here("expected ')'")),
        }
    }
}

impl Expression {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let value = match self {
            Expression::Number(x) => *x,
            Expression::TimeVar => t,
            Expression::Negate(inner) => -inner.eval(t)?,
            Expression::Binary(op, lhs, rhs) => {
                let a = lhs.eval(t)?;
                let b = rhs.eval(t)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        a / b
                    }
                    BinaryOp::Pow => a.powf(b),
                }
            }
            Expression::Call(func, arg) => {
                let x = arg.eval(t)?;
                match func {
                    Function::Exp => x.exp(),
                    Function::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    Function::Log => {
                        if x <= 0.0 {
                            return Err(self.domain(format!("log of non-positive value {x}")));
                        }
                        x.ln()
                    }
                    Function::Sin => x.sin(),
                    Function::Cos => x.cos(),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain(format!("non-finite result {value}")))
        }
    }

    /// True when the expression mentions `t` anywhere.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expression::Number(_) => false,
            Expression::TimeVar => true,
            Expression::Negate(e) | Expression::Call(_, e) => e.depends_on_time(),
            Expression::Binary(_, a, b) => a.depends_on_time() || b.depends_on_time(),
        }
    }

    fn domain(&self, reason: impl Into<String>) -> ExprError {
        ExprError::Domain {
            node: self.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<f64> for Expression {
    fn from(value: f64) -> Self {
        Expression::Number(value)
    }
}

impl std::str::FromStr for Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self> {
        parse_str(s)
    }
}

/// Fully parenthesized rendering; re-parsing yields the same tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Number(x) => write!(f, "{x:?}"),
            Expression::TimeVar => write!(f, "t"),
            Expression::Negate(e) => write!(f, "(-{e})"),
            Expression::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expression::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn num(x: f64) -> Box<Expression> {
        Box::new(Expression::Number(x))
    }

    fn eval(src: &str, t: f64) -> f64 {
        parse_str(src).unwrap().eval(t).unwrap()
    }

    #[test]
    fn tokenize_examples() {
        use TokenKind::*;
        assert_eq!(
            kinds("1-exp(-t)"),
            vec![Number, Minus, Ident, LParen, Minus, TimeVar, RParen]
        );
        assert_eq!(tokenize("sqrt(1-0.5^2)").unwrap().len(), 8);
        assert_eq!(tokenize("2$t"), Err(ExprError::Lex { ch: '$', position: 1 }));
    }

    #[test]
    fn tokenize_numbers() {
        let toks = tokenize("1.5e-3 .25 2e t").unwrap();
        let lex: Vec<_> = toks.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lex, vec!["1.5e-3", ".25", "2", "e", "t"]);
        assert!(toks.windows(2).all(|w| w[0].position < w[1].position));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_str("1-exp(-t)").unwrap(),
            Expression::Binary(
                BinaryOp::Sub,
                num(1.0),
                Box::new(Expression::Call(
                    Function::Exp,
                    Box::new(Expression::Negate(Box::new(Expression::TimeVar)))
                ))
            )
        );
        assert_eq!(
            parse_str("2^3^2").unwrap(),
            Expression::Binary(
                BinaryOp::Pow,
                num(2.0),
                Box::new(Expression::Binary(BinaryOp::Pow, num(3.0), num(2.0)))
            )
        );
        match parse_str("foo(t)") {
            Err(ExprError::Parse { message, position }) => {
                assert!(message.contains("unknown function"));
                assert_eq!(position, 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1+2*3", 0.0), 7.0);
        assert_eq!(eval("(1+2)*3", 0.0), 9.0);
        assert_eq!(eval("-2^2", 0.0), -4.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("--3", 0.0), 3.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn dephasing_parameter() {
        assert_eq!(eval("1-exp(-t)", 0.0), 0.0);
        assert!((eval("1-exp(-t)", std::f64::consts::LN_2) - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_str("(1+t"), Err(ExprError::Parse { position: 4, .. })));
        assert!(matches!(parse_str("1+t)"), Err(ExprError::Parse { position: 3, .. })));
        assert!(matches!(parse_str(""), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_str("1 2"), Err(ExprError::Parse { position: 2, .. })));
        assert!(matches!(parse_str("x+1"), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_str("exp t"), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_str("1e999"), Err(ExprError::Parse { .. })));
    }

    #[test]
    fn domain_errors() {
        let e = parse_str("sqrt(-1-t)").unwrap();
        match e.eval(0.0) {
            Err(ExprError::Domain { node, .. }) => assert!(node.starts_with("sqrt")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_str("log(t)").unwrap().eval(0.0), Err(ExprError::Domain { .. })));
        assert!(matches!(parse_str("1/t").unwrap().eval(0.0), Err(ExprError::Domain { .. })));
        assert!(matches!(parse_str("exp(t)").unwrap().eval(1000.0), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn time_dependence() {
        assert!(parse_str("1+0.1*t").unwrap().depends_on_time());
        assert!(!parse_str("sqrt(2)").unwrap().depends_on_time());
    }

    #[test]
    fn dephasing_parameter_is_monotone_in_unit_interval() {
        let e = parse_str("1-exp(-t)").unwrap();
        let mut prev = -1.0;
        // beyond t ≈ 36.7 the result rounds to exactly 1
        for i in 0..=1500 {
            let v = e.eval(i as f64 * 0.02).unwrap();
            assert!((0.0..1.0).contains(&v));
            assert!(v >= prev);
            prev = v;
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expression::Number),
            Just(Expression::TimeVar),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expression::Negate(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinaryOp::Add),
                        Just(BinaryOp::Sub),
                        Just(BinaryOp::Mul),
                        Just(BinaryOp::Div),
                        Just(BinaryOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expression::Binary(op, Box::new(a), Box::new(b))),
                (
                    prop_oneof![
                        Just(Function::Exp),
                        Just(Function::Sqrt),
                        Just(Function::Log),
                        Just(Function::Sin),
                        Just(Function::Cos)
                    ],
                    inner
                )
                    .prop_map(|(f, e)| Expression::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr()) {
            let printed = e.to_string();
            prop_assert_eq!(parse_str(&printed).unwrap(), e);
        }
    }
}
