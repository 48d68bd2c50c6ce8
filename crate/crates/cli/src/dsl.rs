//! Filter text: `clause (AND clause)*` where a clause is `dim=INT`,
//! `dim IN [LO,HI]` or `dim IN {V,...}`.

use std::fmt;

use grasshopper::{Filter, Layout};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("filter parse error at byte {at}: {message}")]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    Eq(u64),
    Range(u64, u64),
    In(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub dim: String,
    pub predicate: Predicate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Int(u64),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v = text[start..i].parse().map_err(|_| ParseError {
                at: start,
                message: format!("integer `{}` does not fit in 64 bits", &text[start..i]),
            })?;
            out.push((start, Token::Int(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(text[start..i].to_string())));
        } else if "=[]{},".contains(c) {
            out.push((i, Token::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError {
                at: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn at(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            at: self.at(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(s)) if s.eq_ignore_ascii_case(word))
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{c}`")),
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Token::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("expected an integer"),
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let dim = match self.peek() {
            Some(Token::Ident(s))
                if !s.eq_ignore_ascii_case("AND") && !s.eq_ignore_ascii_case("IN") =>
            {
                s.clone()
            }
            _ => return self.fail("expected a dimension name"),
        };
        self.pos += 1;
        if self.keyword("IN") {
            self.pos += 1;
            match self.bump() {
                Some(Token::Sym('[')) => {
                    let lo = self.int()?;
                    self.sym(',')?;
                    let hi = self.int()?;
                    self.sym(']')?;
                    Ok(Clause {
                        dim,
                        predicate: Predicate::Range(lo, hi),
                    })
                }
                Some(Token::Sym('{')) => {
                    let mut values = vec![self.int()?];
                    while matches!(self.peek(), Some(Token::Sym(','))) {
                        self.pos += 1;
                        values.push(self.int()?);
                    }
                    self.sym('}')?;
                    Ok(Clause {
                        dim,
                        predicate: Predicate::In(values),
                    })
                }
                _ => {
                    self.pos -= 1;
                    self.fail("expected `[` or `{` after IN")
                }
            }
        } else {
            self.sym('=')?;
            Ok(Clause {
                dim,
                predicate: Predicate::Eq(self.int()?),
            })
        }
    }
}

pub fn parse(text: &str) -> Result<Query, ParseError> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let mut clauses = vec![p.clause()?];
    while p.keyword("AND") {
        p.pos += 1;
        clauses.push(p.clause()?);
    }
    if p.peek().is_some() {
        return p.fail("expected AND or end of filter");
    }
    Ok(Query { clauses })
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.predicate {
            Predicate::Eq(v) => write!(f, "{}={v}", self.dim),
            Predicate::Range(lo, hi) => write!(f, "{} IN [{lo},{hi}]", self.dim),
            Predicate::In(vs) => {
                let items: Vec<String> = vs.iter().map(u64::to_string).collect();
                write!(f, "{} IN {{{}}}", self.dim, items.join(","))
            }
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(Clause::to_string).collect();
        f.write_str(&parts.join(" AND "))
    }
}

impl Query {
    /// One filter per clause, values placed on the dimension's key bits.
    pub fn to_filters(&self, layout: &Layout) -> grasshopper::Result<Vec<Filter>> {
        self.clauses
            .iter()
            .map(|c| {
                let index = layout.dim_index(&c.dim)?;
                let mask = layout.mask_of(index);
                let put = |v: u64| layout.encode_value(index, v);
                match &c.predicate {
                    Predicate::Eq(v) => Filter::point(mask, put(*v)?),
                    Predicate::Range(lo, hi) => Filter::range(mask, put(*lo)?, put(*hi)?),
                    Predicate::In(vs) => {
                        Filter::set(mask, vs.iter().map(|v| put(*v)).collect::<Result<_, _>>()?)
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use grasshopper::{build_layout, Dimension, LayoutStrategy};
    use proptest::prelude::*;

    #[test]
    fn grammar() {
        let q = parse("X=5 and Y IN [1, 3] AND z_1 in {4,2,9}").unwrap();
        assert_eq!(q.clauses.len(), 3);
        assert_eq!(q.clauses[1].predicate, Predicate::Range(1, 3));
        assert_eq!(q.to_string(), "X=5 AND Y IN [1,3] AND z_1 IN {4,2,9}");
        for bad in [
            "",
            "X",
            "X=",
            "X=5 Y=3",
            "X IN (1,2)",
            "X IN {}",
            "AND=3",
            "X=-1",
            "X=5 AND",
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        assert_eq!(parse("X=5 Y=3").unwrap_err().at, 4);
    }

    #[test]
    fn filters_follow_layout() {
        let layout = build_layout(
            vec![Dimension::new("Y", 3), Dimension::new("X", 3)],
            LayoutStrategy::Explicit(vec![vec![6, 4, 2], vec![5, 3, 1]]),
        )
        .unwrap();
        let f = parse("X=5").unwrap().to_filters(&layout).unwrap();
        assert_eq!(f[0].mask().bits(), 0b010101);
        assert!(f[0].accepts(27));
        assert!(parse("W=1").unwrap().to_filters(&layout).is_err());
        assert!(parse("X=8").unwrap().to_filters(&layout).is_err());
    }

    fn clause() -> impl Strategy<Value = Clause> {
        let name = "[a-zA-Z_][a-zA-Z0-9_]{0,6}".prop_filter("keyword", |s| {
            !s.eq_ignore_ascii_case("and") && !s.eq_ignore_ascii_case("in")
        });
        let predicate = prop_oneof![
            any::<u64>().prop_map(Predicate::Eq),
            (any::<u64>(), any::<u64>()).prop_map(|(a, b)| Predicate::Range(a, b)),
            prop::collection::vec(any::<u64>(), 1..5).prop_map(Predicate::In),
        ];
        (name, predicate).prop_map(|(dim, predicate)| Clause { dim, predicate })
    }

    proptest! {
        #[test]
        fn render_parse_fixpoint(clauses in prop::collection::vec(clause(), 1..5)) {
            let q = Query { clauses };
            let text = q.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &q);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
