//! Line-oriented net files.
//!
//! ```text
//! # comment
//! net <name>
//! place <id> [init <k>]
//! trans <id> : <in> [<in> ...] -> <out> [<out> ...]
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::error::Error;
use crate::net::{Marking, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: transition `{transition}` references undeclared place `{place}`")]
    UndeclaredPlace {
        line: usize,
        transition: String,
        place: String,
    },
    #[error("line {line}: duplicate identifier `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// The parsed contents of a net file, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetDocument {
    pub name: String,
    pub places: Vec<PlaceDecl>,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceDecl {
    pub id: String,
    pub init: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDecl {
    pub id: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &code[s..i],
                    column: code[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &code[s..],
            column: code[..s].chars().count() + 1,
        });
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn identifier<'a>(line: usize, tok: &Token<'a>) -> Result<&'a str, ParseError> {
    let t = tok.text;
    if t.contains('*') || t.contains('^') || t.parse::<u64>().is_ok() {
        return Err(syntax(
            line,
            tok.column,
            format!("arc weights are not supported (`{t}`)"),
        ));
    }
    if t == ":" || t == "->" || t.contains(':') || t.contains("->") || t.contains('"') {
        return Err(syntax(line, tok.column, format!("invalid identifier `{t}`")));
    }
    Ok(t)
}

pub fn parse_document(text: &str) -> Result<NetDocument, ParseError> {
    let mut name: Option<String> = None;
    let mut places: Vec<PlaceDecl> = Vec::new();
    let mut transitions: Vec<TransitionDecl> = Vec::new();
    let mut ids: BTreeSet<String> = BTreeSet::new();
    let mut transition_lines: Vec<usize> = Vec::new();
    let mut last_line = 0;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        last_line = line;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        match head.text {
            "net" => {
                if name.is_some() {
                    return Err(syntax(line, head.column, "repeated `net` header"));
                }
                if !places.is_empty() || !transitions.is_empty() {
                    return Err(syntax(line, head.column, "`net` header must come first"));
                }
                match toks.as_slice() {
                    [_, n] => name = Some(identifier(line, n)?.to_string()),
                    [_] => return Err(syntax(line, head.column + 3, "expected a net name")),
                    [_, _, extra, ..] => return Err(syntax(line, extra.column, "unexpected token")),
                    [] => unreachable!(),
                }
            }
            "place" | "trans" if name.is_none() => {
                return Err(syntax(line, head.column, "expected `net <name>` before declarations"));
            }
            "place" => {
                let (id, init) = match toks.as_slice() {
                    [_, id] => (identifier(line, id)?, 0),
                    [_, id, kw, k] if kw.text == "init" => {
                        let k_val = k
                            .text
                            .parse::<u32>()
                            .map_err(|_| syntax(line, k.column, format!("invalid token count `{}`", k.text)))?;
                        (identifier(line, id)?, k_val)
                    }
                    [_] => return Err(syntax(line, head.column + 5, "expected a place identifier")),
                    [_, _, kw] if kw.text == "init" => {
                        return Err(syntax(line, kw.column + 4, "expected a token count"))
                    }
                    [_, _, extra, ..] => return Err(syntax(line, extra.column, "unexpected token")),
                    [] => unreachable!(),
                };
                if !ids.insert(id.to_string()) {
                    return Err(ParseError::DuplicateId {
                        line,
                        id: id.to_string(),
                    });
                }
                places.push(PlaceDecl {
                    id: id.to_string(),
                    init,
                });
            }
            "trans" => {
                let Some(id_tok) = toks.get(1) else {
                    return Err(syntax(line, head.column + 5, "expected a transition identifier"));
                };
                let id = identifier(line, id_tok)?;
                match toks.get(2) {
                    Some(c) if c.text == ":" => {}
                    Some(c) => return Err(syntax(line, c.column, "expected `:`")),
                    None => return Err(syntax(line, id_tok.column + id.chars().count(), "expected `:`")),
                }
                let rest = &toks[3..];
                let Some(arrow) = rest.iter().position(|t| t.text == "->") else {
                    let column = rest.last().map_or(id_tok.column, |t| t.column + t.text.chars().count());
                    return Err(syntax(line, column, "expected `->`"));
                };
                let mut inputs = Vec::new();
                for tok in &rest[..arrow] {
                    let p = identifier(line, tok)?;
                    if inputs.iter().any(|q| q == p) {
                        return Err(syntax(line, tok.column, format!("duplicate arc {p} -> {id}")));
                    }
                    inputs.push(p.to_string());
                }
                let mut outputs = Vec::new();
                for tok in &rest[arrow + 1..] {
                    if tok.text == "->" {
                        return Err(syntax(line, tok.column, "unexpected `->`"));
                    }
                    let p = identifier(line, tok)?;
                    if outputs.iter().any(|q| q == p) {
                        return Err(syntax(line, tok.column, format!("duplicate arc {id} -> {p}")));
                    }
                    outputs.push(p.to_string());
                }
                if !ids.insert(id.to_string()) {
                    return Err(ParseError::DuplicateId {
                        line,
                        id: id.to_string(),
                    });
                }
                transitions.push(TransitionDecl {
                    id: id.to_string(),
                    inputs,
                    outputs,
                });
                transition_lines.push(line);
            }
            other => {
                return Err(syntax(line, head.column, format!("unknown keyword `{other}`")));
            }
        }
    }

    let Some(name) = name else {
        return Err(syntax(last_line.max(1), 1, "missing `net <name>` header"));
    };
    let declared: BTreeSet<&str> = places.iter().map(|p| p.id.as_str()).collect();
    for (t, &line) in transitions.iter().zip(&transition_lines) {
        if let Some(p) = t
            .inputs
            .iter()
            .chain(&t.outputs)
            .find(|p| !declared.contains(p.as_str()))
        {
            return Err(ParseError::UndeclaredPlace {
                line,
                transition: t.id.clone(),
                place: p.clone(),
            });
        }
    }
    Ok(NetDocument {
        name,
        places,
        transitions,
    })
}

impl NetDocument {
    /// Builds and validates the net and its initial marking.
    pub fn to_net(&self) -> Result<(PetriNet, Marking), ParseError> {
        let mut b = PetriNet::builder(self.name.clone());
        for p in &self.places {
            b.add_place(&p.id);
        }
        for t in &self.transitions {
            b.add_transition_with(&t.id, &t.inputs, &t.outputs)?;
        }
        let net = b.build()?;
        let mut pairs = Vec::new();
        for p in &self.places {
            pairs.push((net.place_id(&p.id)?, p.init));
        }
        Ok((net, Marking::from_counts(pairs)))
    }

    /// The document of a marked net, declarations in identifier order.
    pub fn from_net(net: &PetriNet, m: &Marking) -> Self {
        NetDocument {
            name: net.name().to_string(),
            places: net
                .places()
                .map(|p| PlaceDecl {
                    id: net.place_name(p).to_string(),
                    init: m.get(p),
                })
                .collect(),
            transitions: net
                .transitions()
                .map(|t| TransitionDecl {
                    id: net.transition_name(t).to_string(),
                    inputs: net.preset(t).iter().map(|&p| net.place_name(p).to_string()).collect(),
                    outputs: net.postset(t).iter().map(|&p| net.place_name(p).to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "net {}", self.name).unwrap();
        for p in &self.places {
            if p.init > 0 {
                writeln!(out, "place {} init {}", p.id, p.init).unwrap();
            } else {
                writeln!(out, "place {}", p.id).unwrap();
            }
        }
        for t in &self.transitions {
            let mut line = format!("trans {} :", t.id);
            for p in &t.inputs {
                line.push(' ');
                line.push_str(p);
            }
            line.push_str(" ->");
            for p in &t.outputs {
                line.push(' ');
                line.push_str(p);
            }
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

pub fn parse_net(text: &str) -> Result<(PetriNet, Marking), ParseError> {
    parse_document(text)?.to_net()
}

pub fn serialize_net(net: &PetriNet, m: &Marking) -> String {
    NetDocument::from_net(net, m).serialize()
}
