//! Edge-list text format.
//!
//! ```text
//! n m k
//! p_0 p_1 ... p_{n-1}     (only when k > 0; labels 1..k)
//! u v                     (m lines; signings append a third column ±1)
//! ```

use super::{Edge, Graph, GraphError, Signing};

pub fn write_edge_list(g: &Graph) -> String {
    write_impl(g, None)
}

pub fn write_signing(s: &Signing) -> String {
    write_impl(s.base(), Some(s.signs()))
}

fn write_impl(g: &Graph, signs: Option<&[i8]>) -> String {
    let mut out = format!("{} {} {}\n", g.n(), g.m(), g.num_parts());
    if let Some(p) = g.parts() {
        let line: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        match signs {
            Some(s) => out.push_str(&format!("{u} {v} {}\n", s[i])),
            None => out.push_str(&format!("{u} {v}\n")),
        }
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let (g, _) = parse_impl(text, false)?;
    Ok(g)
}

/// Parses a signing file. Signs are reordered along with the edges when the
/// file lists edges out of canonical order.
pub fn parse_signing(text: &str) -> Result<Signing, GraphError> {
    let (g, signs) = parse_impl(text, true)?;
    Signing::new(g, signs)
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_impl(text: &str, signed: bool) -> Result<(Graph, Vec<i8>), GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let head = numbers::<usize>(ln, header)?;
    let [n, m, k] = head[..] else {
        return Err(parse_err(ln, "header must be `n m k`"));
    };
    let parts = if k > 0 {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing part line"))?;
        let labels = numbers::<usize>(ln, line)?;
        if labels.len() != n {
            return Err(parse_err(ln, format!("expected {n} part labels")));
        }
        if labels.iter().any(|&p| p == 0 || p > k) {
            return Err(parse_err(ln, format!("part labels must lie in 1..={k}")));
        }
        Some(labels.into_iter().map(|p| p - 1).collect::<Vec<_>>())
    } else {
        None
    };
    let mut edges: Vec<(Edge, i8)> = Vec::with_capacity(m);
    for (ln, line) in lines {
        let nums = numbers::<i64>(ln, line)?;
        let want = if signed { 3 } else { 2 };
        if nums.len() != want {
            return Err(parse_err(ln, format!("expected {want} columns")));
        }
        if nums[0] < 0 || nums[1] < 0 {
            return Err(parse_err(ln, "negative vertex index"));
        }
        let sign = if signed {
            match nums[2] {
                1 => 1,
                -1 => -1,
                s => return Err(GraphError::InvalidSign(s)),
            }
        } else {
            1
        };
        edges.push(((nums[0] as usize, nums[1] as usize), sign));
    }
    if edges.len() != m {
        return Err(parse_err(0, format!("header declares {m} edges, found {}", edges.len())));
    }
    let plain: Vec<Edge> = edges.iter().map(|&(e, _)| e).collect();
    let g = Graph::new(n, &plain, parts)?;
    if g.num_parts() != k {
        return Err(parse_err(0, "part count does not match header"));
    }
    let mut signs = vec![1i8; m];
    for ((u, v), s) in edges {
        signs[g.edge_index(u, v).expect("edge present")] = s;
    }
    Ok((g, signs))
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>, GraphError> {
    text.split_whitespace()
        .map(|tok| tok.parse::<T>().map_err(|_| parse_err(line, format!("bad number `{tok}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::{complete_bipartite, cycle};

    #[test]
    fn writes_expected_text() {
        let text = write_edge_list(&complete_bipartite(1, 2));
        assert_eq!(text, "3 2 2\n1 2 2\n0 1\n0 2\n");
        assert_eq!(write_edge_list(&cycle(3)), "3 3 0\n0 1\n0 2\n1 2\n");
    }

    #[test]
    fn parses_unordered_signing() {
        let s = parse_signing("3 2 0\n2 0 -1\n1 0 1\n").unwrap();
        assert_eq!(s.base().edges(), &[(0, 1), (0, 2)]);
        assert_eq!(s.signs(), &[1, -1]);
        assert_eq!(write_signing(&s), "3 2 0\n0 1 1\n0 2 -1\n");
    }

    #[test]
    fn reports_bad_input() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("2 1 0\n0 1 1\n").is_err());
        assert!(parse_edge_list("2 2 0\n0 1\n").is_err());
        assert!(matches!(parse_edge_list("2 2 0\n0 1\n1 0\n"), Err(GraphError::DuplicateEdge(0, 1))));
        assert!(parse_signing("2 1 0\n0 1 2\n").is_err());
        assert!(parse_edge_list("2 1 2\n1 3\n0 1\n").is_err());
    }
}
