use gfcn_graph::Graph;

use crate::SpreadError;

/// Per-vertex scores for the distance-based source estimate: the
/// negated infection eccentricity, so that higher means more central.
/// Vertices that cannot reach every infected vertex score negative
/// infinity.
pub fn jordan_scores(graph: &Graph, infected: &[usize]) -> Result<Vec<f64>, SpreadError> {
    let n = graph.num_vertices();
    if infected.is_empty() {
        return Err(SpreadError::EmptyInfected);
    }
    for &u in infected {
        if u >= n {
            return Err(SpreadError::BadVertex {
                vertex: u,
                num_vertices: n,
            });
        }
    }

    let mut ecc = vec![0usize; n];
    let mut reachable = vec![true; n];
    for &u in infected {
        let dist = graph.bfs_distances(u)?;
        for v in 0..n {
            match dist[v] {
                Some(d) => ecc[v] = ecc[v].max(d),
                None => reachable[v] = false,
            }
        }
    }
    Ok((0..n)
        .map(|v| {
            if reachable[v] {
                -(ecc[v] as f64)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect())
}

/// All vertices minimizing the maximum distance to the infected set,
/// ascending.
pub fn jordan_centers(graph: &Graph, infected: &[usize]) -> Result<Vec<usize>, SpreadError> {
    let scores = jordan_scores(graph, infected)?;
    let best = scores
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((0..scores.len()).filter(|&v| scores[v] == best).collect())
}

/// The single canonical center: lowest id among the minimizers.
pub fn jordan_center(graph: &Graph, infected: &[usize]) -> Result<usize, SpreadError> {
    Ok(jordan_centers(graph, infected)?[0])
}

/// Indices of the `k` highest scores, ties resolved toward lower
/// indices. `k` is clamped to the number of scores.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k.min(scores.len()));
    order
}

/// Whether `source` ranks within the top `percent` of vertices by
/// score. The cutoff count is `ceil(percent/100 * n)`.
pub fn topx_hit(scores: &[f64], source: usize, percent: f64) -> Result<bool, SpreadError> {
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(SpreadError::BadParams(format!(
            "percent must lie in (0, 100], got {percent}"
        )));
    }
    let n = scores.len();
    if source >= n {
        return Err(SpreadError::BadVertex {
            vertex: source,
            num_vertices: n,
        });
    }
    let k = ((percent / 100.0) * n as f64).ceil() as usize;
    Ok(top_k(scores, k).contains(&source))
}
