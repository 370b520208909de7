//! Recursive descent parser producing the raw document tree.
//!
//! Parsing is purely syntactic; name resolution and structural checks
//! happen in [`super::elaborate`].

use crate::contracts::{Expr, Placement};
use crate::dsl::lexer::{tokenize, Diagnostic, Pos, Tok, Token};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDocument {
    pub source: Option<String>,
    pub metamodels: Vec<RawMetamodel>,
    pub instances: Vec<RawInstance>,
    pub transforms: Vec<RawTransform>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawMetamodel {
    pub name: String,
    pub root: String,
    pub classes: Vec<RawClass>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawClass {
    pub name: String,
    pub flags: Vec<String>,
    pub rels: Vec<RawRel>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRel {
    pub name: String,
    pub target: String,
    pub many: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub name: String,
    pub metamodel: String,
    pub objects: Vec<RawObject>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawObject {
    pub class: String,
    pub id: u64,
    pub entries: Vec<RawEntry>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawEntryValue {
    Flag(bool),
    RefOne(String, u64),
    RefMany(Vec<(String, u64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawEntry {
    pub name: String,
    pub value: RawEntryValue,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTransform {
    pub name: String,
    pub src_mm: String,
    pub tgt_mm: String,
    pub rungs: Vec<RawRung>,
    pub ladder: RawLadder,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRung {
    pub name: String,
    pub src_class: String,
    pub tgt_class: String,
    pub pre: Expr,
    pub post: Expr,
    pub map: RawMap,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawMap {
    pub assignments: Vec<(String, Expr, Pos)>,
    pub emits: Vec<RawEmit>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawEmit {
    pub placement: Placement,
    pub relationship: String,
    pub map: RawMap,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawLadder {
    Base {
        rung: String,
        src_rel: String,
        tgt_rel: String,
        pos: Pos,
    },
    Step {
        rung: String,
        src_rel: String,
        tgt_rel: String,
        rest: Box<RawLadder>,
        pos: Pos,
    },
    Join {
        left: Box<RawLadder>,
        right: Box<RawLadder>,
        pos: Pos,
    },
}

impl RawLadder {
    pub fn pos(&self) -> Pos {
        match self {
            RawLadder::Base { pos, .. }
            | RawLadder::Step { pos, .. }
            | RawLadder::Join { pos, .. } => *pos,
        }
    }
}

/// Parses one document. The first syntax error aborts the parse.
pub fn parse_document(text: &str) -> Result<RawDocument, Diagnostic> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        position: 0,
    };
    parser.document()
}

struct Parser<'t> {
    tokens: &'t [Token],
    position: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.position].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.position].pos
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.position];
        if self.position + 1 < self.tokens.len() {
            self.position += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, Diagnostic> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            Err(Diagnostic::at(
                self.pos(),
                format!("expected {tok}, found {}", self.peek()),
            ))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), Diagnostic> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, pos))
            }
            other => Err(Diagnostic::at(
                pos,
                format!("expected identifier, found {other}"),
            )),
        }
    }

    fn nat(&mut self) -> Result<u64, Diagnostic> {
        match *self.peek() {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            ref other => Err(Diagnostic::at(
                self.pos(),
                format!("expected number, found {other}"),
            )),
        }
    }

    fn document(&mut self) -> Result<RawDocument, Diagnostic> {
        let mut doc = RawDocument::default();
        loop {
            match self.peek() {
                Tok::Eof => return Ok(doc),
                Tok::Metamodel => doc.metamodels.push(self.metamodel()?),
                Tok::Instance => doc.instances.push(self.instance()?),
                Tok::Transform => doc.transforms.push(self.transform()?),
                other => {
                    return Err(Diagnostic::at(
                        self.pos(),
                        format!("expected metamodel, instance, or transform, found {other}"),
                    ))
                }
            }
        }
    }

    fn metamodel(&mut self) -> Result<RawMetamodel, Diagnostic> {
        let pos = self.expect(Tok::Metamodel)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Root)?;
        let (root, _) = self.ident()?;
        self.expect(Tok::Semi)?;
        let mut classes = Vec::new();
        while *self.peek() == Tok::Class {
            classes.push(self.class_decl()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(RawMetamodel {
            name,
            root,
            classes,
            pos,
        })
    }

    fn class_decl(&mut self) -> Result<RawClass, Diagnostic> {
        let pos = self.expect(Tok::Class)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut flags = Vec::new();
        let mut rels = Vec::new();
        loop {
            match self.peek() {
                Tok::Flag => {
                    self.bump();
                    let (flag, _) = self.ident()?;
                    self.expect(Tok::Semi)?;
                    flags.push(flag);
                }
                Tok::Rel => {
                    let rel_pos = self.bump().pos;
                    let (rel_name, _) = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let (target, _) = self.ident()?;
                    let many = match self.peek() {
                        Tok::One => {
                            self.bump();
                            false
                        }
                        Tok::Many => {
                            self.bump();
                            true
                        }
                        other => {
                            return Err(Diagnostic::at(
                                self.pos(),
                                format!("expected one or many, found {other}"),
                            ))
                        }
                    };
                    self.expect(Tok::Semi)?;
                    rels.push(RawRel {
                        name: rel_name,
                        target,
                        many,
                        pos: rel_pos,
                    });
                }
                _ => break,
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(RawClass {
            name,
            flags,
            rels,
            pos,
        })
    }

    fn instance(&mut self) -> Result<RawInstance, Diagnostic> {
        let pos = self.expect(Tok::Instance)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let (metamodel, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut objects = Vec::new();
        while matches!(self.peek(), Tok::Ident(_)) {
            objects.push(self.object()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(RawInstance {
            name,
            metamodel,
            objects,
            pos,
        })
    }

    fn object(&mut self) -> Result<RawObject, Diagnostic> {
        let (class, pos) = self.ident()?;
        self.expect(Tok::Hash)?;
        let id = self.nat()?;
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                entries.push(self.entry()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(RawObject {
            class,
            id,
            entries,
            pos,
        })
    }

    fn entry(&mut self) -> Result<RawEntry, Diagnostic> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::Equals)?;
        let value = match self.peek().clone() {
            Tok::True => {
                self.bump();
                RawEntryValue::Flag(true)
            }
            Tok::False => {
                self.bump();
                RawEntryValue::Flag(false)
            }
            Tok::LBracket => {
                self.bump();
                let mut refs = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        let (class, _) = self.ident()?;
                        self.expect(Tok::Hash)?;
                        let id = self.nat()?;
                        refs.push((class, id));
                        if !self.eat(Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket)?;
                RawEntryValue::RefMany(refs)
            }
            Tok::Ident(_) => {
                let (class, _) = self.ident()?;
                self.expect(Tok::Hash)?;
                let id = self.nat()?;
                RawEntryValue::RefOne(class, id)
            }
            other => {
                return Err(Diagnostic::at(
                    self.pos(),
                    format!("expected true, false, an object reference, or a list, found {other}"),
                ))
            }
        };
        Ok(RawEntry { name, value, pos })
    }

    fn transform(&mut self) -> Result<RawTransform, Diagnostic> {
        let pos = self.expect(Tok::Transform)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let (src_mm, _) = self.ident()?;
        self.expect(Tok::Arrow)?;
        let (tgt_mm, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut rungs = Vec::new();
        while *self.peek() == Tok::Rung {
            rungs.push(self.rung()?);
        }
        self.expect(Tok::Ladder)?;
        self.expect(Tok::Colon)?;
        let ladder = self.ladder_expr()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        Ok(RawTransform {
            name,
            src_mm,
            tgt_mm,
            rungs,
            ladder,
            pos,
        })
    }

    fn rung(&mut self) -> Result<RawRung, Diagnostic> {
        let pos = self.expect(Tok::Rung)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let (src_class, _) = self.ident()?;
        self.expect(Tok::Arrow)?;
        let (tgt_class, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Pre)?;
        self.expect(Tok::Colon)?;
        let pre = self.expr()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::Post)?;
        self.expect(Tok::Colon)?;
        let post = self.expr()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::Map)?;
        let map = self.map_block()?;
        self.expect(Tok::RBrace)?;
        Ok(RawRung {
            name,
            src_class,
            tgt_class,
            pre,
            post,
            map,
            pos,
        })
    }

    fn map_block(&mut self) -> Result<RawMap, Diagnostic> {
        let pos = self.expect(Tok::LBrace)?;
        let mut assignments = Vec::new();
        let mut emits = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Emit => {
                    let emit_pos = self.bump().pos;
                    let placement = match self.peek() {
                        Tok::First => {
                            self.bump();
                            Placement::First
                        }
                        Tok::Last => {
                            self.bump();
                            Placement::Last
                        }
                        other => {
                            return Err(Diagnostic::at(
                                self.pos(),
                                format!("expected first or last, found {other}"),
                            ))
                        }
                    };
                    let (relationship, _) = self.ident()?;
                    let map = self.map_block()?;
                    self.eat(Tok::Semi);
                    emits.push(RawEmit {
                        placement,
                        relationship,
                        map,
                        pos: emit_pos,
                    });
                }
                Tok::Ident(attr) => {
                    let attr_pos = self.bump().pos;
                    self.expect(Tok::AssignArrow)?;
                    let value = self.expr()?;
                    self.expect(Tok::Semi)?;
                    assignments.push((attr, value, attr_pos));
                }
                _ => break,
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(RawMap {
            assignments,
            emits,
            pos,
        })
    }

    fn ladder_expr(&mut self) -> Result<RawLadder, Diagnostic> {
        let pos = self.pos();
        match self.peek() {
            Tok::Base => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (rung, src_rel, tgt_rel) = self.rung_via()?;
                self.expect(Tok::RParen)?;
                Ok(RawLadder::Base {
                    rung,
                    src_rel,
                    tgt_rel,
                    pos,
                })
            }
            Tok::Step => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (rung, src_rel, tgt_rel) = self.rung_via()?;
                self.expect(Tok::Comma)?;
                let rest = self.ladder_expr()?;
                self.expect(Tok::RParen)?;
                Ok(RawLadder::Step {
                    rung,
                    src_rel,
                    tgt_rel,
                    rest: Box::new(rest),
                    pos,
                })
            }
            Tok::Join => {
                self.bump();
                self.expect(Tok::LParen)?;
                let left = self.ladder_expr()?;
                self.expect(Tok::Comma)?;
                let right = self.ladder_expr()?;
                self.expect(Tok::RParen)?;
                Ok(RawLadder::Join {
                    left: Box::new(left),
                    right: Box::new(right),
                    pos,
                })
            }
            other => Err(Diagnostic::at(
                pos,
                format!("expected base, step, or join, found {other}"),
            )),
        }
    }

    fn rung_via(&mut self) -> Result<(String, String, String), Diagnostic> {
        let (rung, _) = self.ident()?;
        self.expect(Tok::Via)?;
        let (src_rel, _) = self.ident()?;
        self.expect(Tok::Slash)?;
        let (tgt_rel, _) = self.ident()?;
        Ok((rung, src_rel, tgt_rel))
    }

    // Expressions. Precedence, loosest first: -> (right), \/, /\, =, then
    // not/succ/atoms.
    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Expr, Diagnostic> {
        let lhs = self.or()?;
        if self.eat(Tok::Arrow) {
            let rhs = self.implies()?;
            Ok(Expr::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.and()?;
        while self.eat(Tok::OrOp) {
            let rhs = self.and()?;
            lhs = Expr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.equality()?;
        while self.eat(Tok::AndOp) {
            let rhs = self.equality()?;
            lhs = Expr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn equality(&mut self) -> Result<Expr, Diagnostic> {
        let lhs = self.unary()?;
        if self.eat(Tok::Equals) {
            let rhs = self.unary()?;
            Ok(Expr::eq(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        if self.eat(Tok::Not) {
            Ok(Expr::not(self.unary()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Nat(n) => {
                self.bump();
                Ok(Expr::Nat(n))
            }
            Tok::Succ => {
                self.bump();
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::succ(inner))
            }
            Tok::Src => {
                self.bump();
                self.expect(Tok::Dot)?;
                self.attribute(true)
            }
            Tok::Tgt => {
                self.bump();
                self.expect(Tok::Dot)?;
                self.attribute(false)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(Diagnostic::at(
                pos,
                format!("expected an expression, found {other}"),
            )),
        }
    }

    fn attribute(&mut self, is_src: bool) -> Result<Expr, Diagnostic> {
        let (name, _) = self.ident()?;
        Ok(match (is_src, name.as_str()) {
            (true, crate::metamodel::BASE_ATTR) => Expr::SrcId,
            (false, crate::metamodel::BASE_ATTR) => Expr::TgtId,
            (true, _) => Expr::SrcFlag(name),
            (false, _) => Expr::TgtFlag(name),
        })
    }
}
