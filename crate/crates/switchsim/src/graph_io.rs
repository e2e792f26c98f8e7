//! Circuit graphs on disk.
//!
//! JSON: `{"nodes": ["a", "b"], "edges": [["a", "b"]]}`. Node ids may also be
//! bare integers. Nodes that only appear in edges are added implicitly.
//!
//! DOT subset: a single `digraph` (optionally named) whose statements are
//! node ids or edge chains `a -> b -> c`, separated by `;` or newlines.
//! Ids are bare words or double-quoted strings. Attribute lists `[...]`
//! and comments are skipped.

use serde::Deserialize;
use serde_json::{json, Value};
use switchsim_core::immersion::CausalGraph;

use crate::CliError;

#[derive(Deserialize)]
#[serde(untagged)]
enum NodeId {
    Name(String),
    Number(u64),
}

impl NodeId {
    fn into_string(self) -> String {
        match self {
            Self::Name(s) => s,
            Self::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    #[serde(default)]
    nodes: Vec<NodeId>,
    #[serde(default)]
    edges: Vec<(NodeId, NodeId)>,
}

fn build(mut nodes: Vec<String>, edges: Vec<(String, String)>) -> Result<CausalGraph, CliError> {
    for (a, b) in &edges {
        for n in [a, b] {
            if !nodes.contains(n) {
                nodes.push(n.clone());
            }
        }
    }
    Ok(CausalGraph::new(&nodes, &edges)?)
}

pub fn parse_json_graph(text: &str) -> Result<CausalGraph, CliError> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("graph: {e}")))?;
    let nodes = file.nodes.into_iter().map(NodeId::into_string).collect();
    let edges = file.edges.into_iter().map(|(a, b)| (a.into_string(), b.into_string())).collect();
    build(nodes, edges)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Id(String),
    Arrow,
    Open,
    Close,
    Sep,
}

fn dot_error(msg: impl Into<String>) -> CliError {
    CliError::Parse(format!("dot: {}", msg.into()))
}

fn tokenize(text: &str) -> Result<Vec<Token>, CliError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' | ';' | ',' => {
                out.push(Token::Sep);
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '{' => {
                out.push(Token::Open);
                i += 1;
            }
            '}' => {
                out.push(Token::Close);
                i += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                let rest: String = chars[i + 2..].iter().collect();
                let end = rest.find("*/").ok_or_else(|| dot_error("unterminated comment"))?;
                i += 2 + rest[..end].chars().count() + 2;
            }
            '[' => {
                let close = chars[i..].iter().position(|&c| c == ']').ok_or_else(|| dot_error("unterminated `[`"))?;
                i += close + 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Token::Arrow);
                i += 2;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(dot_error("unterminated string")),
                        Some('"') => break,
                        Some('\\') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some(&c) => {
                            s.push(c);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Token::Id(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '.')) {
                    i += 1;
                }
                out.push(Token::Id(chars[start..i].iter().collect()));
            }
            other => return Err(dot_error(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

pub fn parse_dot_graph(text: &str) -> Result<CausalGraph, CliError> {
    let tokens = tokenize(text)?;
    let mut it = tokens.into_iter().skip_while(|t| *t == Token::Sep);
    match it.next() {
        Some(Token::Id(kw)) if kw.eq_ignore_ascii_case("digraph") => {}
        _ => return Err(dot_error("expected `digraph`")),
    }
    let mut it = it.skip_while(|t| *t == Token::Sep).peekable();
    if let Some(Token::Id(_)) = it.peek() {
        it.next();
    }
    if it.next() != Some(Token::Open) {
        return Err(dot_error("expected `{`"));
    }
    let body = it;
    let mut nodes: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut chain: Vec<String> = Vec::new();
    let mut pending_arrow = false;
    let mut closed = false;
    let flush = |chain: &mut Vec<String>, nodes: &mut Vec<String>, edges: &mut Vec<(String, String)>| {
        for n in chain.iter() {
            if !nodes.contains(n) {
                nodes.push(n.clone());
            }
        }
        edges.extend(chain.windows(2).map(|w| (w[0].clone(), w[1].clone())));
        chain.clear();
    };
    for tok in body {
        if closed {
            if tok != Token::Sep {
                return Err(dot_error("content after closing `}`"));
            }
            continue;
        }
        match tok {
            Token::Id(id) => {
                if !chain.is_empty() && !pending_arrow {
                    flush(&mut chain, &mut nodes, &mut edges);
                }
                if matches!(id.as_str(), "node" | "edge" | "graph") && chain.is_empty() {
                    continue;
                }
                chain.push(id);
                pending_arrow = false;
            }
            Token::Arrow => {
                if chain.is_empty() || pending_arrow {
                    return Err(dot_error("`->` without a source node"));
                }
                pending_arrow = true;
            }
            Token::Sep if pending_arrow => {}
            Token::Sep | Token::Close => {
                if pending_arrow {
                    return Err(dot_error("`->` without a target node"));
                }
                flush(&mut chain, &mut nodes, &mut edges);
                closed = tok == Token::Close;
            }
            Token::Open => return Err(dot_error("subgraphs are not supported")),
        }
    }
    if !closed {
        return Err(dot_error("missing closing `}`"));
    }
    build(nodes, edges)
}

/// JSON when the text starts with `{`, DOT otherwise.
pub fn parse_graph(text: &str) -> Result<CausalGraph, CliError> {
    if text.trim_start().starts_with('{') {
        parse_json_graph(text)
    } else {
        parse_dot_graph(text)
    }
}

pub fn load_graph(path: &str) -> Result<CausalGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_graph(&text)
}

pub fn graph_to_json(g: &CausalGraph) -> Value {
    json!({
        "nodes": g.nodes(),
        "edges": g.edges().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
    })
}
