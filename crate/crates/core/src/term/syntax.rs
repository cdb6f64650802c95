//! Text syntax for terms.
//!
//! `\` or `λ` opens an abstraction whose body extends as far right as
//! possible, juxtaposition is left-associative application and
//! parentheses group. A variable is either a decimal index `>= 1` or a
//! successor string `S...S0`, where a bare `0` is index 1.

use thiserror::Error;

use super::{Node, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderStyle {
    /// Decimal indices, minimal parentheses: `λλ2 1`.
    #[default]
    Integers,
    /// Successor strings, every application parenthesized: `λλ((S0) 0)`.
    Successors,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: &'static str },
    #[error("index at position {pos} is too large")]
    IndexOverflow { pos: usize },
}

fn syntax(pos: usize, msg: &'static str) -> ParseError {
    ParseError::Syntax { pos, msg }
}

enum PNode {
    Var(u64),
    Abs(usize),
    App(usize, usize),
}

enum FrameKind {
    Top,
    Paren(usize),
    Lambda(usize),
}

struct Frame {
    kind: FrameKind,
    acc: Option<usize>,
}

struct Builder {
    arena: Vec<PNode>,
}

impl Builder {
    fn push(&mut self, n: PNode) -> usize {
        self.arena.push(n);
        self.arena.len() - 1
    }

    fn add_atom(&mut self, frame: &mut Frame, atom: usize) {
        frame.acc = Some(match frame.acc {
            None => atom,
            Some(left) => self.push(PNode::App(left, atom)),
        });
    }

    fn finish(self, root: usize) -> Term {
        let mut nodes = Vec::with_capacity(self.arena.len());
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            match self.arena[i] {
                PNode::Var(s) => nodes.push(Node::Var(s)),
                PNode::Abs(body) => {
                    nodes.push(Node::Abs);
                    stack.push(body);
                }
                PNode::App(l, r) => {
                    nodes.push(Node::App);
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        Term::from_nodes_unchecked(nodes)
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut b = Builder { arena: Vec::new() };
    let mut frames = vec![Frame { kind: FrameKind::Top, acc: None }];
    let mut i = 0;

    // Closes lambda frames on top of the stack, folding each into its parent.
    fn close_lambdas(b: &mut Builder, frames: &mut Vec<Frame>, pos: usize) -> Result<(), ParseError> {
        while let Some(Frame { kind: FrameKind::Lambda(_), .. }) = frames.last() {
            let f = frames.pop().unwrap();
            let body = f.acc.ok_or_else(|| syntax(pos, "abstraction without a body"))?;
            let abs = b.push(PNode::Abs(body));
            let parent = frames.last_mut().expect("top frame");
            b.add_atom(parent, abs);
        }
        Ok(())
    }

    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '\\' | 'λ' => {
                frames.push(Frame { kind: FrameKind::Lambda(i), acc: None });
                i += 1;
            }
            '(' => {
                frames.push(Frame { kind: FrameKind::Paren(i), acc: None });
                i += 1;
            }
            ')' => {
                close_lambdas(&mut b, &mut frames, i)?;
                let f = frames.pop().unwrap();
                if !matches!(f.kind, FrameKind::Paren(_)) {
                    return Err(syntax(i, "unbalanced `)`"));
                }
                let inner = f.acc.ok_or_else(|| syntax(i, "empty parentheses"))?;
                let parent = frames.last_mut().expect("top frame");
                b.add_atom(parent, inner);
                i += 1;
            }
            '0' => {
                let v = b.push(PNode::Var(0));
                b.add_atom(frames.last_mut().unwrap(), v);
                i += 1;
            }
            'S' => {
                let start = i;
                let mut s = 0u64;
                while i < chars.len() && chars[i] == 'S' {
                    s = s.checked_add(1).ok_or(ParseError::IndexOverflow { pos: start })?;
                    i += 1;
                }
                if i >= chars.len() || chars[i] != '0' {
                    return Err(syntax(i, "successor string must end in `0`"));
                }
                i += 1;
                let v = b.push(PNode::Var(s));
                b.add_atom(frames.last_mut().unwrap(), v);
            }
            '1'..='9' => {
                let start = i;
                let mut index = 0u64;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    let digit = chars[i].to_digit(10).unwrap() as u64;
                    index = index
                        .checked_mul(10)
                        .and_then(|x| x.checked_add(digit))
                        .ok_or(ParseError::IndexOverflow { pos: start })?;
                    i += 1;
                }
                let v = b.push(PNode::Var(index - 1));
                b.add_atom(frames.last_mut().unwrap(), v);
            }
            _ => return Err(syntax(i, "unexpected character")),
        }
    }

    close_lambdas(&mut b, &mut frames, chars.len())?;
    let top = frames.pop().unwrap();
    match top.kind {
        FrameKind::Top => {}
        FrameKind::Paren(pos) => return Err(syntax(pos, "unclosed `(`")),
        FrameKind::Lambda(pos) => return Err(syntax(pos, "abstraction without a body")),
    }
    let root = top.acc.ok_or_else(|| syntax(chars.len(), "empty term"))?;
    Ok(b.finish(root))
}

/// End (exclusive) of the subterm starting at each position.
pub(crate) fn subterm_ends(nodes: &[Node]) -> Vec<usize> {
    let mut ends = vec![0usize; nodes.len()];
    let mut stack: Vec<usize> = Vec::new();
    for i in (0..nodes.len()).rev() {
        ends[i] = match nodes[i] {
            Node::Var(_) => i + 1,
            Node::Abs => ends[stack.pop().expect("well-formed term")],
            Node::App => {
                let _left = stack.pop().expect("well-formed term");
                ends[stack.pop().expect("well-formed term")]
            }
        };
        stack.push(i);
    }
    ends
}

enum Work {
    Text(&'static str),
    Sub { at: usize, followed: bool, right_operand: bool },
}

pub fn render_term(t: &Term, style: RenderStyle) -> String {
    let nodes = t.nodes();
    let ends = subterm_ends(nodes);
    let mut out = String::with_capacity(nodes.len() * 2);
    let mut work = vec![Work::Sub { at: 0, followed: false, right_operand: false }];
    while let Some(item) = work.pop() {
        let (at, followed, right_operand) = match item {
            Work::Text(s) => {
                out.push_str(s);
                continue;
            }
            Work::Sub { at, followed, right_operand } => (at, followed, right_operand),
        };
        match nodes[at] {
            Node::Var(s) => match style {
                RenderStyle::Integers => out.push_str(&(s as u128 + 1).to_string()),
                RenderStyle::Successors => {
                    if s > 0 {
                        out.push('(');
                    }
                    out.extend(std::iter::repeat_n('S', s as usize));
                    out.push('0');
                    if s > 0 {
                        out.push(')');
                    }
                }
            },
            Node::Abs => {
                if followed {
                    work.push(Work::Text(")"));
                    work.push(Work::Sub { at: at + 1, followed: false, right_operand: false });
                    work.push(Work::Text("(λ"));
                } else {
                    work.push(Work::Sub { at: at + 1, followed: false, right_operand: false });
                    work.push(Work::Text("λ"));
                }
            }
            Node::App => {
                let left = at + 1;
                let right = ends[left];
                let wrap = match style {
                    RenderStyle::Integers => right_operand,
                    RenderStyle::Successors => true,
                };
                let inner_followed = followed && !wrap;
                if wrap {
                    work.push(Work::Text(")"));
                }
                work.push(Work::Sub { at: right, followed: inner_followed, right_operand: true });
                work.push(Work::Text(" "));
                work.push(Work::Sub { at: left, followed: true, right_operand: false });
                if wrap {
                    work.push(Work::Text("("));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_reference_examples() {
        let k = Term::abs(Term::abs(Term::app(Term::var(1), Term::var(0))));
        assert_eq!(parse_term("\\\\2 1").unwrap(), k);
        assert_eq!(parse_term("\\\\((S0) 0)").unwrap(), k);
        assert_eq!(parse_term("λλ((S0)0)").unwrap(), k);
        assert_eq!(parse_term("1").unwrap(), Term::var(0));
        assert_eq!(parse_term("00").unwrap(), Term::app(Term::var(0), Term::var(0)));
        assert_eq!(parse_term("10").unwrap(), Term::var(9));
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("1 2 3").unwrap();
        let expected = Term::app(Term::app(Term::var(0), Term::var(1)), Term::var(2));
        assert_eq!(t, expected);
        let t = parse_term("1 (2 3)").unwrap();
        assert_eq!(t, Term::app(Term::var(0), Term::app(Term::var(1), Term::var(2))));
    }

    #[test]
    fn abstraction_extends_right() {
        let t = parse_term("\\1 1").unwrap();
        assert_eq!(t, Term::abs(Term::app(Term::var(0), Term::var(0))));
        let t = parse_term("(\\1) 1").unwrap();
        assert_eq!(t, Term::app(Term::abs(Term::var(0)), Term::var(0)));
        let t = parse_term("1 \\1").unwrap();
        assert_eq!(t, Term::app(Term::var(0), Term::abs(Term::var(0))));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_term(""), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_term("\\"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_term("(1"), Err(ParseError::Syntax { pos: 0, .. })));
        assert!(matches!(parse_term("1)"), Err(ParseError::Syntax { pos: 1, .. })));
        assert!(matches!(parse_term("()"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_term("SS"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_term("x"), Err(ParseError::Syntax { pos: 0, .. })));
        assert!(matches!(
            parse_term("99999999999999999999999"),
            Err(ParseError::IndexOverflow { pos: 0 })
        ));
    }

    #[test]
    fn renders_examples() {
        assert_eq!(render_term(&Term::abs(Term::var(0)), RenderStyle::Integers), "λ1");
        let k = Term::abs(Term::abs(Term::app(Term::var(1), Term::var(0))));
        assert_eq!(render_term(&k, RenderStyle::Successors), "λλ((S0) 0)");
        assert_eq!(render_term(&k, RenderStyle::Integers), "λλ2 1");
        let aa = Term::app(Term::var(0), Term::var(0));
        assert_eq!(render_term(&aa, RenderStyle::Integers), "1 1");
        let redex = Term::abs(Term::app(Term::abs(Term::var(0)), Term::var(0)));
        assert_eq!(render_term(&redex, RenderStyle::Successors), "λ((λ0) 0)");
        assert_eq!(render_term(&redex, RenderStyle::Integers), "λ(λ1) 1");
    }

    #[test]
    fn renders_abstraction_in_middle_of_spine() {
        // (1 λ1) 1: the abstraction is followed by another operand
        let t = Term::app(Term::app(Term::var(0), Term::abs(Term::var(0))), Term::var(0));
        let s = render_term(&t, RenderStyle::Integers);
        assert_eq!(s, "1 (λ1) 1");
        assert_eq!(parse_term(&s).unwrap(), t);
    }

    #[test]
    fn subterm_ends_match_structure() {
        let t = parse_term("(\\1 2) (3 4)").unwrap();
        let ends = subterm_ends(t.nodes());
        assert_eq!(ends[0], t.nodes().len());
        assert_eq!(ends[1], 5);
    }
}
