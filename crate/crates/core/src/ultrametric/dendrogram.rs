//! Tree recovery from an ultrametric matrix.
//!
//! Single linkage is exact on ultrametrics: the minimum spanning tree's edges,
//! merged in height order, reproduce every entry as the height at which its
//! two leaves first share a cluster.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::strong::check_strong_triangle;
use crate::metric::DistanceMatrix;
use crate::{Error, Result};

/// One agglomeration step. Leaves are clusters `0..n`; merge `i` creates
/// cluster `n + i`. `left < right` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Distinct merge heights with their multiplicities, ascending.
    pub fn height_counts(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for m in &self.merges {
            match out.last_mut() {
                Some((h, c)) if (m.height - *h).abs() <= tol => *c += 1,
                _ => out.push((m.height, 1)),
            }
        }
        out
    }

    /// Indented text view, root first, children listed smaller id first.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if self.leaves == 0 {
            return out;
        }
        let root = self.leaves + self.merges.len() - 1;
        let mut stack = vec![(root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let pad = "  ".repeat(depth);
            if id < self.leaves {
                let _ = writeln!(out, "{pad}leaf {id}");
            } else {
                let m = &self.merges[id - self.leaves];
                let _ = writeln!(out, "{pad}[{:.6}] {} leaves", m.height, m.size);
                stack.push((m.right, depth + 1));
                stack.push((m.left, depth + 1));
            }
        }
        out
    }
}

/// Recovers the merge hierarchy of an ultrametric matrix.
///
/// Equal-height merges are taken in ascending order of their smaller leaf id.
pub fn recover_dendrogram(m: &DistanceMatrix, tol: f64) -> Result<Dendrogram> {
    let report = check_strong_triangle(m, tol)?;
    if let Some(worst) = report.worst {
        return Err(Error::NotUltrametric(worst));
    }
    let n = m.size();
    if n == 0 {
        return Ok(Dendrogram {
            leaves: 0,
            merges: Vec::new(),
        });
    }

    // Prim's minimum spanning tree on the dense matrix, O(n²).
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut link = vec![0usize; n];
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    for v in 1..n {
        best[v] = m.get(0, v);
    }
    for _ in 1..n {
        let next = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&x, &y| best[x].total_cmp(&best[y]).then(x.cmp(&y)))
            .expect("vertices remain");
        in_tree[next] = true;
        let (a, b) = (link[next].min(next), link[next].max(next));
        edges.push((best[next], a, b));
        for v in 0..n {
            if !in_tree[v] {
                let d = m.get(next, v);
                if d < best[v] || (d == best[v] && next < link[v]) {
                    best[v] = d;
                    link[v] = next;
                }
            }
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut parent: Vec<usize> = (0..n).collect();
    let mut cluster: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::with_capacity(n - 1);
    for (height, a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let (ca, cb) = (cluster[ra], cluster[rb]);
        let merged = size[ra] + size[rb];
        parent[rb] = ra;
        size[ra] = merged;
        cluster[ra] = n + merges.len();
        merges.push(Merge {
            left: ca.min(cb),
            right: ca.max(cb),
            height,
            size: merged,
        });
    }
    Ok(Dendrogram { leaves: n, merges })
}

/// Matrix of merge heights at which each leaf pair first joins.
pub fn cophenetic_matrix(d: &Dendrogram) -> DistanceMatrix {
    let n = d.leaves;
    let mut entries = vec![0.0; n * n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in &d.merges {
        let left = std::mem::take(&mut members[m.left]);
        let right = std::mem::take(&mut members[m.right]);
        for &a in &left {
            for &b in &right {
                entries[a * n + b] = m.height;
                entries[b * n + a] = m.height;
            }
        }
        let mut joined = left;
        joined.extend(right);
        members.push(joined);
    }
    DistanceMatrix::from_entries(n, entries).expect("square by construction")
}
