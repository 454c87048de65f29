use crate::{Graph, GraphError};

/// Parse the plain edge-list format: one `u v` or `u v w` per line, `#`
/// starts a comment, blank lines ignored. The vertex count is the maximum
/// id seen plus one.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    struct Parsed {
        line: usize,
        u: usize,
        v: usize,
        w: Option<f64>,
    }

    let mut rows = Vec::new();
    let mut max_id = None::<usize>;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let u = parse_field(fields.next(), line, "vertex id")?;
        let v = parse_field(fields.next(), line, "vertex id")?;
        let w = match fields.next() {
            Some(tok) => Some(tok.parse::<f64>().map_err(|_| GraphError::Parse {
                line,
                msg: format!("bad weight {:?}", tok),
            })?),
            None => None,
        };
        if let Some(extra) = fields.next() {
            return Err(GraphError::Parse {
                line,
                msg: format!("unexpected trailing field {:?}", extra),
            });
        }
        max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        rows.push(Parsed { line, u, v, w });
    }

    let n = max_id.map_or(0, |m| m + 1);
    let mut g = Graph::new(n);
    for row in rows {
        let res = match row.w {
            Some(w) => g.add_weighted_edge(row.u, row.v, w),
            None => g.add_edge(row.u, row.v),
        };
        res.map_err(|e| GraphError::Parse {
            line: row.line,
            msg: e.to_string(),
        })?;
    }
    Ok(g)
}

fn parse_field(tok: Option<&str>, line: usize, what: &str) -> Result<usize, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Parse {
        line,
        msg: format!("missing {}", what),
    })?;
    tok.parse::<usize>().map_err(|_| GraphError::Parse {
        line,
        msg: format!("bad {} {:?}", what, tok),
    })
}

/// Canonical edge-list text: edges sorted with `u < v`, weights printed only
/// for weighted graphs. Parsing the output reproduces the graph exactly.
pub fn serialize_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for &(u, v, w) in g.edges() {
        if g.is_weighted() {
            out.push_str(&format!("{} {} {}\n", u, v, w));
        } else {
            out.push_str(&format!("{} {}\n", u, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let g = parse_edge_list("# header\n0 1\n\n1 2 # tail comment\n").unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 2);
        assert!(!g.is_weighted());
    }

    #[test]
    fn vertex_count_is_max_id_plus_one() {
        let g = parse_edge_list("0 9\n").unwrap();
        assert_eq!(g.num_vertices(), 10);
        assert_eq!(g.degree(5), 0);
    }

    #[test]
    fn weighted_parse() {
        let g = parse_edge_list("0 1 0.5\n1 2 2\n").unwrap();
        assert!(g.is_weighted());
        assert_eq!(g.edge_weight(0, 1), Some(0.5));
        assert_eq!(g.edge_weight(2, 1), Some(2.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_edge_list("0 1\nx 2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
        let err = parse_edge_list("0 1\n1 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err}");
        let err = parse_edge_list("0 1 1.0 extra\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }), "{err}");
        let err = parse_edge_list("0 1 -2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_input_is_empty_graph() {
        let g = parse_edge_list("# nothing\n").unwrap();
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(serialize_edge_list(&g), "");
    }

    #[test]
    fn round_trip() {
        let text = "0 2\n1 2\n2 3\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(serialize_edge_list(&g), text);
        let mut w = Graph::new(3);
        w.add_weighted_edge(0, 1, 0.125).unwrap();
        w.add_weighted_edge(1, 2, 3.0).unwrap();
        let text = serialize_edge_list(&w);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(serialize_edge_list(&back), text);
        assert_eq!(back.edge_weight(0, 1), Some(0.125));
    }
}
