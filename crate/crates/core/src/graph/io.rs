//! Plain-text edge lists: a `nodes=<n>` header, then `u v kind` lines with
//! kind `L` (local) or `T` (translocal).

use std::fmt::Write as _;

use super::{EdgeKind, Graph, GraphError};

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("nodes={}\n", g.node_count());
    for (u, v, kind) in g.edges() {
        let _ = writeln!(out, "{u} {v} {}", kind.code());
    }
    out
}

pub fn read_edge_list(text: &str) -> Result<Graph, GraphError> {
    let err = |line: usize, msg: &str| GraphError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let n: usize = header
        .trim()
        .strip_prefix("nodes=")
        .ok_or_else(|| err(1, "expected `nodes=<n>`"))?
        .parse()
        .map_err(|_| err(1, "bad node count"))?;
    let mut g = Graph::new(n);
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v, kind] = fields[..] else {
            return Err(err(line_no, "expected `u v kind`"));
        };
        let u: usize = u.parse().map_err(|_| err(line_no, "bad node id"))?;
        let v: usize = v.parse().map_err(|_| err(line_no, "bad node id"))?;
        let kind = match kind {
            "L" => EdgeKind::Local,
            "T" => EdgeKind::Translocal,
            _ => return Err(err(line_no, "kind must be L or T")),
        };
        if !g.add_edge(u, v, kind).map_err(|e| err(line_no, &e.to_string()))? {
            return Err(err(line_no, "duplicate edge"));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_errors() {
        assert!(read_edge_list("").is_err());
        assert!(read_edge_list("n=3\n").is_err());
        assert!(read_edge_list("nodes=3\n0 1 X\n").is_err());
        assert!(read_edge_list("nodes=3\n0 3 L\n").is_err());
        assert!(read_edge_list("nodes=3\n0 1 L\n1 0 T\n").is_err());
        assert!(read_edge_list("nodes=3\n0 0 L\n").is_err());
    }

    #[test]
    fn known_text() {
        let g = read_edge_list("nodes=4\n0 1 L\n2 0 T\n").unwrap();
        assert_eq!(write_edge_list(&g), "nodes=4\n0 1 L\n0 2 T\n");
    }

    proptest! {
        #[test]
        fn text_round_trips(seed in 0u64..200, p in 0.0f64..0.5) {
            let g = crate::graph::Graph::lattice_with_shortcuts(5, 2, p, seed).unwrap();
            let text = write_edge_list(&g);
            let back = read_edge_list(&text).unwrap();
            prop_assert_eq!(write_edge_list(&back), text);
            prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        }
    }
}
