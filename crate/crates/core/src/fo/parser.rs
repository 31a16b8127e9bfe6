//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula  := iff
//! iff      := implies ("<->" implies)*
//! implies  := or ("->" implies)?
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "!" unary | quant | primary
//! quant    := ("forall" | "exists") ident ("," ident)* "." formula
//! primary  := "(" formula ")" | "true" | "false"
//!           | ident "(" term ("," term)* ")" | term ("=" | "!=") term
//! term     := ident | "'" name "'"
//! ```

use crate::error::{Error, Result};
use crate::fo::ast::{Formula, Term};
use crate::relational::{Element, Schema};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Eq,
    Neq,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn bump(i: &mut usize, column: &mut usize, n: usize) {
    *i += n;
    *column += n;
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let err = |line, column, message: String| Error::Parse { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
                continue;
            }
            c if c.is_whitespace() => {
                bump(&mut i, &mut column, 1);
                continue;
            }
            '(' => {
                bump(&mut i, &mut column, 1);
                Tok::LParen
            }
            ')' => {
                bump(&mut i, &mut column, 1);
                Tok::RParen
            }
            ',' => {
                bump(&mut i, &mut column, 1);
                Tok::Comma
            }
            '.' => {
                bump(&mut i, &mut column, 1);
                Tok::Dot
            }
            '&' => {
                bump(&mut i, &mut column, 1);
                Tok::Amp
            }
            '|' => {
                bump(&mut i, &mut column, 1);
                Tok::Pipe
            }
            '=' => {
                bump(&mut i, &mut column, 1);
                Tok::Eq
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                bump(&mut i, &mut column, 2);
                Tok::Neq
            }
            '!' => {
                bump(&mut i, &mut column, 1);
                Tok::Bang
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                bump(&mut i, &mut column, 2);
                Tok::Arrow
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                bump(&mut i, &mut column, 3);
                Tok::DoubleArrow
            }
            '\'' => {
                let mut name = String::new();
                bump(&mut i, &mut column, 1);
                loop {
                    match chars.get(i) {
                        None | Some('\n') => return Err(err(start_line, start_col, "unterminated constant".into())),
                        Some('\'') => {
                            bump(&mut i, &mut column, 1);
                            break;
                        }
                        Some('\\') if matches!(chars.get(i + 1), Some('\'') | Some('\\')) => {
                            name.push(chars[i + 1]);
                            bump(&mut i, &mut column, 2);
                        }
                        Some(&ch) => {
                            name.push(ch);
                            bump(&mut i, &mut column, 1);
                        }
                    }
                }
                Tok::Quoted(name)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&ch) = chars.get(i) {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        name.push(ch);
                        bump(&mut i, &mut column, 1);
                    } else {
                        break;
                    }
                }
                Tok::Ident(name)
            }
            other => return Err(err(line, column, format!("unexpected character {other:?}"))),
        };
        tokens.push(Token { tok, line: start_line, column: start_col });
    }
    tokens.push(Token { tok: Tok::Eof, line, column });
    Ok(tokens)
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    schema: Option<&'s Schema>,
}

impl<'s> Parser<'s> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, message: impl Into<String>) -> Error {
        Error::Parse { line: token.line, column: token.column, message: message.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(self.error_at(&t, format!("expected {what}, found {}", describe(&t.tok))))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.implies()?;
        while self.peek().tok == Tok::DoubleArrow {
            self.next();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.peek().tok == Tok::Arrow {
            self.next();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match &self.peek().tok {
            Tok::Bang => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(kw) if kw == "forall" || kw == "exists" => {
                let universal = kw == "forall";
                self.next();
                let mut vars = vec![self.variable()?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    vars.push(self.variable()?);
                }
                self.expect(Tok::Dot, "'.' after quantified variables")?;
                let body = self.formula()?;
                let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
                Ok(if universal { Formula::forall(&refs, body) } else { Formula::exists(&refs, body) })
            }
            _ => self.primary(),
        }
    }

    fn variable(&mut self) -> Result<String> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(name) if !is_keyword(name) => Ok(name.clone()),
            other => Err(self.error_at(&t, format!("expected a variable, found {}", describe(other)))),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => {
                self.next();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(kw) if kw == "true" => {
                self.next();
                Ok(Formula::True)
            }
            Tok::Ident(kw) if kw == "false" => {
                self.next();
                Ok(Formula::False)
            }
            Tok::Ident(name) if self.tokens[self.pos + 1].tok == Tok::LParen => {
                let symbol = name.clone();
                self.next();
                self.next();
                let mut terms = vec![self.term()?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    terms.push(self.term()?);
                }
                self.expect(Tok::RParen, "')' closing the atom")?;
                if let Some(schema) = self.schema {
                    match schema.arity(&symbol) {
                        None => return Err(self.error_at(&t, format!("unknown relation symbol {symbol}"))),
                        Some(a) if a != terms.len() => {
                            return Err(self.error_at(
                                &t,
                                format!("{symbol} has arity {a} but is applied to {} terms", terms.len()),
                            ))
                        }
                        Some(_) => {}
                    }
                }
                Ok(Formula::Atom { symbol, terms })
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let lhs = self.term()?;
                let op = self.next();
                match &op.tok {
                    Tok::Eq => Ok(Formula::Equals(lhs, self.term()?)),
                    Tok::Neq => Ok(Formula::NotEquals(lhs, self.term()?)),
                    other => Err(self.error_at(&op, format!("expected '=' or '!=', found {}", describe(other)))),
                }
            }
            other => Err(self.error_at(&t, format!("expected a formula, found {}", describe(other)))),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(name) if !is_keyword(name) => Ok(Term::Var(name.clone())),
            Tok::Quoted(name) => Element::parse(name).map(Term::Const).map_err(|e| self.error_at(&t, e.to_string())),
            other => Err(self.error_at(&t, format!("expected a term, found {}", describe(other)))),
        }
    }
}

fn is_keyword(name: &str) -> bool {
    matches!(name, "forall" | "exists" | "true" | "false")
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Quoted(s) => format!("constant '{s}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Bang => "'!'".into(),
        Tok::Amp => "'&'".into(),
        Tok::Pipe => "'|'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::DoubleArrow => "'<->'".into(),
        Tok::Eq => "'='".into(),
        Tok::Neq => "'!='".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn parse_inner(text: &str, schema: Option<&Schema>) -> Result<Formula> {
    let mut parser = Parser { tokens: lex(text)?, pos: 0, schema };
    let phi = parser.formula()?;
    let rest = parser.next();
    if rest.tok != Tok::Eof {
        return Err(parser.error_at(&rest, format!("unexpected {}", describe(&rest.tok))));
    }
    Ok(phi)
}

/// Parses a formula without schema checks.
pub fn parse(text: &str) -> Result<Formula> {
    parse_inner(text, None)
}

/// Parses a formula and checks every atom against `schema`.
pub fn parse_with_schema(text: &str, schema: &Schema) -> Result<Formula> {
    parse_inner(text, Some(schema))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_running_constraint() {
        let phi = parse("forall x. (P(x) -> exists y. Q(x,y))").unwrap();
        let expected = Formula::forall(
            &["x"],
            Formula::implies(
                Formula::atom_vars("P", &["x"]),
                Formula::exists(&["y"], Formula::atom_vars("Q", &["x", "y"])),
            ),
        );
        assert_eq!(phi, expected);
    }

    #[test]
    fn parses_equality_and_constants() {
        assert_eq!(parse("x = y").unwrap(), Formula::eq(Term::var("x"), Term::var("y")));
        assert_eq!(parse("!P('a')").unwrap(), Formula::not(Formula::ground("P", &["a"])));
        assert_eq!(parse("x != 'b'").unwrap(), Formula::NotEquals(Term::var("x"), Term::constant("b")));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = |s| Formula::atom_vars(s, &["x"]);
        assert_eq!(
            parse("!A(x) & B(x) | C(x) -> D(x) <-> E(x)").unwrap(),
            Formula::iff(
                Formula::implies(Formula::or(Formula::and(Formula::not(p("A")), p("B")), p("C")), p("D")),
                p("E")
            )
        );
        assert_eq!(parse("A(x) -> B(x) -> C(x)").unwrap(), Formula::implies(p("A"), Formula::implies(p("B"), p("C"))));
        assert_eq!(
            parse("A(x) & forall y. B(x) | C(x)").unwrap(),
            Formula::and(p("A"), Formula::forall(&["y"], Formula::or(p("B"), p("C"))))
        );
        assert_eq!(
            parse("forall x, y. R(x, y)").unwrap(),
            Formula::forall(&["x", "y"], Formula::atom_vars("R", &["x", "y"]))
        );
    }

    #[test]
    fn reports_positions() {
        match parse("forall x.\n  (P(x) & )") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
        match parse("P(x) Q(y)") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_checked_parsing() {
        let schema = Schema::new([("P", 1), ("Q", 2)]).unwrap();
        assert!(parse_with_schema("exists y. Q(x, y)", &schema).is_ok());
        match parse_with_schema("P(x) & R(x)", &schema) {
            Err(Error::Parse { column, message, .. }) => {
                assert_eq!(column, 8);
                assert!(message.contains("unknown relation symbol R"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_with_schema("Q(x)", &schema).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_term() -> impl Strategy<Value = Term> {
            prop_oneof![
                prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
                prop::sample::select(vec!["a", "b", "it's"]).prop_map(Term::constant),
            ]
        }

        pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
            let leaf = prop_oneof![
                Just(Formula::True),
                Just(Formula::False),
                arb_term().prop_map(|t| Formula::atom("P", vec![t])),
                (arb_term(), arb_term()).prop_map(|(a, b)| Formula::atom("Q", vec![a, b])),
                (arb_term(), arb_term()).prop_map(|(a, b)| Formula::Equals(a, b)),
                (arb_term(), arb_term()).prop_map(|(a, b)| Formula::NotEquals(a, b)),
            ];
            leaf.prop_recursive(4, 32, 2, |inner| {
                let var = prop::sample::select(vec!["x", "y", "z"]);
                prop_oneof![
                    inner.clone().prop_map(Formula::not),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
                    (var.clone(), inner.clone()).prop_map(|(v, b)| Formula::forall(&[v], b)),
                    (var, inner).prop_map(|(v, b)| Formula::exists(&[v], b)),
                ]
            })
        }

        proptest! {
            #[test]
            fn printing_round_trips(phi in arb_formula()) {
                let text = phi.to_string();
                prop_assert_eq!(parse(&text).unwrap(), phi, "{}", text);
            }
        }
    }
}
