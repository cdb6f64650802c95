//! Graphviz rendering of the term tree.

use std::fmt::Write;

use super::{Node, Term};

/// `digraph` with one vertex per constructor; variables are labelled by
/// their De Bruijn index.
pub fn render_dot(t: &Term) -> String {
    let nodes = t.nodes();
    let mut out = String::from("digraph term {\n  node [shape=plaintext];\n");
    // parents of pending operands, in prefix order
    let mut parents: Vec<usize> = Vec::new();
    for (i, node) in nodes.iter().enumerate() {
        let label = match *node {
            Node::Var(s) => (s as u128 + 1).to_string(),
            Node::Abs => "λ".to_string(),
            Node::App => "@".to_string(),
        };
        writeln!(out, "  n{i} [label=\"{label}\"];").unwrap();
        if let Some(p) = parents.pop() {
            writeln!(out, "  n{p} -> n{i};").unwrap();
        }
        match node {
            Node::Var(_) => {}
            Node::Abs => parents.push(i),
            Node::App => {
                parents.push(i);
                parents.push(i);
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_tree() {
        let t: Term = "\\1 1".parse().unwrap();
        let dot = render_dot(&t);
        assert!(dot.starts_with("digraph term {"));
        assert!(dot.contains("n0 [label=\"λ\"]"));
        assert!(dot.contains("n1 -> n2;"));
        assert!(dot.contains("n1 -> n3;"));
        assert_eq!(dot.matches("->").count(), 3);
    }
}
