//! Recursive-descent parser producing an unresolved tree. The SQL and SSQL
//! grammars differ only in FROM: SSQL has no `join`, `on` or aliases.

use super::lexer::{tokenize, Keyword, Tok};
use super::{AggFunc, ArithOp, CmpOp, SetOp, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Sql,
    Ssql,
}

#[derive(Debug, Clone)]
pub(crate) struct RawQuery {
    pub distinct: bool,
    pub select: Vec<RawExpr>,
    pub from: Vec<RawFromItem>,
    pub where_clause: Option<RawCond>,
    pub group_by: Vec<RawColumn>,
    pub having: Option<RawCond>,
    pub order_by: Vec<(RawExpr, bool)>,
    pub limit: Option<u64>,
    pub set_op: Option<(SetOp, Box<RawQuery>)>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawFromItem {
    pub source: RawSource,
    pub alias: Option<String>,
    pub on: Option<RawCond>,
    pub position: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum RawSource {
    Table(String),
    Subquery(Box<RawQuery>),
}

#[derive(Debug, Clone)]
pub(crate) struct RawColumn {
    pub qualifier: Option<String>,
    pub name: String,
    /// A lone double-quoted token, which may turn out to be a string.
    pub quoted: bool,
    pub position: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum RawExpr {
    Column(RawColumn),
    Star,
    Number(String),
    Str(String),
    Aggregate {
        func: AggFunc,
        distinct: bool,
        arg: Box<RawExpr>,
        position: usize,
    },
    Arith {
        op: ArithOp,
        left: Box<RawExpr>,
        right: Box<RawExpr>,
    },
    Subquery(Box<RawQuery>),
}

#[derive(Debug, Clone)]
pub(crate) enum RawCond {
    Predicate(RawPred),
    And(Vec<RawCond>),
    Or(Vec<RawCond>),
}

#[derive(Debug, Clone)]
pub(crate) enum RawPred {
    Compare {
        left: RawExpr,
        op: CmpOp,
        right: RawExpr,
    },
    Between {
        expr: RawExpr,
        low: RawExpr,
        high: RawExpr,
    },
}

pub(crate) fn parse(text: &str, mode: Mode) -> Result<RawQuery, SyntaxError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        mode,
    };
    let q = p.query()?;
    p.eat(&Tok::Semicolon);
    if !p.at(&Tok::Eof) {
        let mut expected = vec!["end of input"];
        if mode == Mode::Sql {
            expected.push("join");
        }
        expected.extend([",", "where", "group", "having", "order", "limit", "union"]);
        return Err(p.error(&expected));
    }
    Ok(q)
}

type PResult<T> = Result<T, SyntaxError>;

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn position(&self) -> usize {
        self.toks[self.pos].1
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.peek() == &Tok::Kw(kw)
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        self.eat(&Tok::Kw(kw))
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            position: self.position(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&[&tok.describe()]))
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<()> {
        self.expect(Tok::Kw(kw))
    }

    fn query(&mut self) -> PResult<RawQuery> {
        let mut q = self.select_core()?;
        let op = match self.peek() {
            Tok::Kw(Keyword::Union) => Some(SetOp::Union),
            Tok::Kw(Keyword::Intersect) => Some(SetOp::Intersect),
            Tok::Kw(Keyword::Except) => Some(SetOp::Except),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let rest = self.query()?;
            q.set_op = Some((op, Box::new(rest)));
        }
        Ok(q)
    }

    fn select_core(&mut self) -> PResult<RawQuery> {
        self.expect_kw(Keyword::Select)?;
        let distinct = self.eat_kw(Keyword::Distinct);
        let mut select = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            select.push(self.expr()?);
        }
        self.expect_kw(Keyword::From)?;
        let from = self.source_list()?;

        let where_clause = if self.eat_kw(Keyword::Where) {
            Some(self.condition()?)
        } else {
            None
        };
        let mut group_by = Vec::new();
        if self.eat_kw(Keyword::Group) {
            self.expect_kw(Keyword::By)?;
            group_by.push(self.column_ref()?);
            while self.eat(&Tok::Comma) {
                group_by.push(self.column_ref()?);
            }
        }
        let having = if self.eat_kw(Keyword::Having) {
            Some(self.condition()?)
        } else {
            None
        };
        let mut order_by = Vec::new();
        if self.eat_kw(Keyword::Order) {
            self.expect_kw(Keyword::By)?;
            loop {
                let e = self.expr()?;
                let desc = if self.eat_kw(Keyword::Desc) {
                    true
                } else {
                    self.eat_kw(Keyword::Asc);
                    false
                };
                order_by.push((e, desc));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let limit = if self.eat_kw(Keyword::Limit) {
            match self.peek().clone() {
                Tok::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => {
                    let parsed = n.parse().map_err(|_| self.error(&["integer"]))?;
                    self.advance();
                    Some(parsed)
                }
                _ => return Err(self.error(&["integer"])),
            }
        } else {
            None
        };
        Ok(RawQuery {
            distinct,
            select,
            from,
            where_clause,
            group_by,
            having,
            order_by,
            limit,
            set_op: None,
        })
    }

    fn source_list(&mut self) -> PResult<Vec<RawFromItem>> {
        let mut items = vec![self.source_item()?];
        loop {
            if self.eat(&Tok::Comma) {
                items.push(self.source_item()?);
            } else if self.mode == Mode::Sql && self.eat_kw(Keyword::Join) {
                let mut item = self.source_item()?;
                self.expect_kw(Keyword::On)?;
                item.on = Some(self.condition()?);
                items.push(item);
            } else {
                return Ok(items);
            }
        }
    }

    fn source_item(&mut self) -> PResult<RawFromItem> {
        let position = self.position();
        let source = match self.peek().clone() {
            Tok::LParen if self.peek_at(1) == &Tok::Kw(Keyword::Select) => {
                self.advance();
                let q = self.query()?;
                self.expect(Tok::RParen)?;
                RawSource::Subquery(Box::new(q))
            }
            Tok::Ident(name) | Tok::Quoted(name) => {
                self.advance();
                RawSource::Table(name)
            }
            _ => return Err(self.error(&["table name", "("])),
        };
        let mut alias = None;
        if self.mode == Mode::Sql {
            if self.eat_kw(Keyword::As) {
                match self.advance() {
                    Tok::Ident(a) | Tok::Quoted(a) => alias = Some(a),
                    _ => {
                        self.pos -= 1;
                        return Err(self.error(&["alias"]));
                    }
                }
            } else if let Tok::Ident(a) = self.peek().clone() {
                self.advance();
                alias = Some(a);
            }
        }
        Ok(RawFromItem {
            source,
            alias,
            on: None,
            position,
        })
    }

    fn column_ref(&mut self) -> PResult<RawColumn> {
        let position = self.position();
        let (first, quoted) = match self.peek().clone() {
            Tok::Ident(n) => (n, false),
            Tok::Quoted(n) => (n, true),
            _ => return Err(self.error(&["column name"])),
        };
        self.advance();
        if self.eat(&Tok::Dot) {
            let name = match self.peek().clone() {
                Tok::Ident(n) | Tok::Quoted(n) => n,
                _ => return Err(self.error(&["column name"])),
            };
            self.advance();
            Ok(RawColumn {
                qualifier: Some(first),
                name,
                quoted: false,
                position,
            })
        } else {
            Ok(RawColumn {
                qualifier: None,
                name: first,
                quoted,
                position,
            })
        }
    }

    fn condition(&mut self) -> PResult<RawCond> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_kw(Keyword::Or) {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RawCond::Or(parts)
        })
    }

    fn conjunction(&mut self) -> PResult<RawCond> {
        let mut parts = vec![self.cond_atom()?];
        while self.eat_kw(Keyword::And) {
            parts.push(self.cond_atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RawCond::And(parts)
        })
    }

    /// A parenthesised condition or a predicate. `(` is ambiguous here, since
    /// it may also open an arithmetic operand, so the condition reading is
    /// tried first and abandoned if a comparison follows the `)`.
    fn cond_atom(&mut self) -> PResult<RawCond> {
        if self.at(&Tok::LParen) && self.peek_at(1) != &Tok::Kw(Keyword::Select) {
            let save = self.pos;
            self.advance();
            let grouped = self.condition().and_then(|c| {
                self.expect(Tok::RParen)?;
                Ok(c)
            });
            match grouped {
                Ok(c) if !self.continues_predicate() => return Ok(c),
                Ok(_) => self.pos = save,
                Err(first) => {
                    self.pos = save;
                    return self.predicate().map_err(|second| {
                        if second.position >= first.position {
                            second
                        } else {
                            first
                        }
                    });
                }
            }
        }
        self.predicate()
    }

    fn continues_predicate(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Eq
                | Tok::Ne
                | Tok::Lt
                | Tok::Gt
                | Tok::Le
                | Tok::Ge
                | Tok::Plus
                | Tok::Minus
                | Tok::Star
                | Tok::Slash
                | Tok::Kw(Keyword::Like)
                | Tok::Kw(Keyword::In)
                | Tok::Kw(Keyword::Not)
                | Tok::Kw(Keyword::Between)
        )
    }

    fn predicate(&mut self) -> PResult<RawCond> {
        let left = self.expr()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            Tok::Kw(Keyword::Like) => CmpOp::Like,
            Tok::Kw(Keyword::In) => CmpOp::In,
            Tok::Kw(Keyword::Not) => match self.peek_at(1) {
                Tok::Kw(Keyword::Like) => {
                    self.advance();
                    CmpOp::NotLike
                }
                Tok::Kw(Keyword::In) => {
                    self.advance();
                    CmpOp::NotIn
                }
                _ => {
                    self.advance();
                    return Err(self.error(&["like", "in"]));
                }
            },
            Tok::Kw(Keyword::Between) => {
                self.advance();
                let low = self.expr()?;
                self.expect_kw(Keyword::And)?;
                let high = self.expr()?;
                return Ok(RawCond::Predicate(RawPred::Between {
                    expr: left,
                    low,
                    high,
                }));
            }
            _ => {
                return Err(self.error(&[
                    "=", "!=", "<", ">", "<=", ">=", "like", "not", "in", "between",
                ]))
            }
        };
        self.advance();
        let right = self.expr()?;
        Ok(RawCond::Predicate(RawPred::Compare { left, op, right }))
    }

    fn expr(&mut self) -> PResult<RawExpr> {
        let mut left = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.term()?;
            left = RawExpr::Arith {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
    }

    fn term(&mut self) -> PResult<RawExpr> {
        let mut left = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.factor()?;
            left = RawExpr::Arith {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
    }

    fn factor(&mut self) -> PResult<RawExpr> {
        let position = self.position();
        match self.peek().clone() {
            Tok::Star => {
                self.advance();
                Ok(RawExpr::Star)
            }
            Tok::Number(n) => {
                self.advance();
                Ok(RawExpr::Number(n))
            }
            Tok::Minus => {
                if let Tok::Number(n) = self.peek_at(1).clone() {
                    self.advance();
                    self.advance();
                    Ok(RawExpr::Number(format!("-{n}")))
                } else {
                    self.advance();
                    Err(self.error(&["number"]))
                }
            }
            Tok::Str(s) => {
                self.advance();
                Ok(RawExpr::Str(s))
            }
            Tok::LParen => {
                self.advance();
                if self.at_kw(Keyword::Select) {
                    let q = self.query()?;
                    self.expect(Tok::RParen)?;
                    Ok(RawExpr::Subquery(Box::new(q)))
                } else {
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(e)
                }
            }
            Tok::Ident(name) if self.peek_at(1) == &Tok::LParen => {
                let Some(func) = AggFunc::from_name(&name) else {
                    return Err(self.error(&["expression"]));
                };
                self.advance();
                self.advance();
                let distinct = self.eat_kw(Keyword::Distinct);
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(RawExpr::Aggregate {
                    func,
                    distinct,
                    arg: Box::new(arg),
                    position,
                })
            }
            Tok::Ident(_) | Tok::Quoted(_) => Ok(RawExpr::Column(self.column_ref()?)),
            _ => Err(self.error(&["expression"])),
        }
    }
}
