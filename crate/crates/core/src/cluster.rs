//! Complete-linkage agglomerative clustering, threshold cuts and medoids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;

/// One agglomeration step. Leaves have ids `0..n`, merge `k` creates id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Root node id (a leaf when `n_leaves == 1`).
    pub fn root(&self) -> usize {
        if self.merges.is_empty() {
            0
        } else {
            self.n_leaves + self.merges.len() - 1
        }
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n_leaves
    }

    /// The merge that created `node`, if it is internal.
    pub fn merge_of(&self, node: usize) -> Option<&Merge> {
        node.checked_sub(self.n_leaves).and_then(|k| self.merges.get(k))
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        self.merge_of(node).map(|m| (m.a, m.b))
    }

    pub fn height(&self, node: usize) -> f64 {
        self.merge_of(node).map_or(0.0, |m| m.height)
    }

    /// Leaves below `node`, ascending.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => out.push(x),
            }
        }
        out.sort_unstable();
        out
    }

    /// Topmost nodes whose height does not exceed `threshold`, ordered by
    /// their smallest leaf.
    pub fn cut_nodes(&self, threshold: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(x) = stack.pop() {
            match self.merge_of(x) {
                Some(m) if m.height > threshold => {
                    stack.push(m.a);
                    stack.push(m.b);
                }
                _ => out.push(x),
            }
        }
        out.sort_by_key(|&x| self.members(x)[0]);
        out
    }
}

/// Labels per system after a cut; cluster indices follow the smallest
/// member index of each cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub cut_height: f64,
}

impl ClusterAssignment {
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Naive complete linkage; ties go to the lexicographically smallest pair of
/// cluster ids.
pub fn complete_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    let n = d.len();
    if n < 1 {
        return Err(Error::InvalidArgument("clustering needs at least one system".into()));
    }
    // active clusters: (id, members); distances between active clusters
    let mut ids: Vec<usize> = (0..n).collect();
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut next = n;
    while ids.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for p in 0..ids.len() {
            for q in (p + 1)..ids.len() {
                let (a, b) = (ids[p].min(ids[q]), ids[p].max(ids[q]));
                let h = dist[p][q];
                let better = match best {
                    None => true,
                    Some((bh, ba, bb, _, _)) => h < bh || (h == bh && (a, b) < (ba, bb)),
                };
                if better {
                    best = Some((h, a, b, p, q));
                }
            }
        }
        let (h, a, b, p, q) = best.expect("at least one pair");
        merges.push(Merge { a, b, height: h, id: next });
        // row q is removed, row p becomes the merged cluster
        let merged: Vec<f64> = dist[p].iter().zip(&dist[q]).map(|(x, y)| x.max(*y)).collect();
        for (r, v) in merged.into_iter().enumerate() {
            dist[p][r] = v;
            dist[r][p] = v;
        }
        dist[p][p] = 0.0;
        dist.remove(q);
        for row in dist.iter_mut() {
            row.remove(q);
        }
        ids[p] = next;
        ids.remove(q);
        next += 1;
    }
    Ok(Dendrogram { n_leaves: n, merges })
}

/// Discards merges higher than `threshold`; equality keeps the merge.
pub fn cut(dend: &Dendrogram, threshold: f64) -> ClusterAssignment {
    let nodes = dend.cut_nodes(threshold);
    let mut labels = vec![0; dend.n_leaves];
    for (k, &node) in nodes.iter().enumerate() {
        for i in dend.members(node) {
            labels[i] = k;
        }
    }
    ClusterAssignment {
        labels,
        k: nodes.len(),
        cut_height: threshold,
    }
}

/// Member with the smallest maximal distance to the others; ties by index.
pub fn medoid(members: &[usize], d: &DistanceMatrix) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &i in members {
        let worst = members.iter().map(|&j| d.get(i, j)).fold(0.0, f64::max);
        match best {
            Some((w, k)) if w < worst || (w == worst && k < i) => {}
            _ => best = Some((worst, i)),
        }
    }
    best.map(|(_, i)| i)
        .ok_or_else(|| Error::InvalidArgument("medoid of an empty set".into()))
}

/// Largest pairwise distance within `members`.
pub fn diameter(members: &[usize], d: &DistanceMatrix) -> f64 {
    let mut m: f64 = 0.0;
    for (k, &i) in members.iter().enumerate() {
        for &j in &members[k + 1..] {
            m = m.max(d.get(i, j));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> DistanceMatrix {
        DistanceMatrix::from_rows(
            vec!["1".into(), "2".into(), "3".into()],
            &[vec![0.0, 0.1, 0.5], vec![0.1, 0.0, 0.6], vec![0.5, 0.6, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn three_system_trace() {
        let dend = complete_linkage(&three()).unwrap();
        assert_eq!(dend.merges.len(), 2);
        assert_eq!(dend.merges[0], Merge { a: 0, b: 1, height: 0.1, id: 3 });
        assert_eq!(dend.merges[1], Merge { a: 2, b: 3, height: 0.6, id: 4 });
        let c = cut(&dend, 0.3);
        assert_eq!(c.labels, vec![0, 0, 1]);
        assert_eq!(c.k, 2);
        assert_eq!(cut(&dend, 0.6).k, 1);
        assert_eq!(cut(&dend, 0.05).k, 3);
    }

    #[test]
    fn all_zero_matrix() {
        let d = DistanceMatrix::from_fn((0..4).map(|i| i.to_string()).collect(), |_, _| 0.0);
        let dend = complete_linkage(&d).unwrap();
        assert!(dend.merges.iter().all(|m| m.height == 0.0));
        assert_eq!(cut(&dend, 0.0).k, 1);
    }

    #[test]
    fn medoid_examples() {
        let d = three();
        assert_eq!(medoid(&[2], &d).unwrap(), 2);
        assert_eq!(medoid(&[0, 1, 2], &d).unwrap(), 0);
        assert_eq!(medoid(&[1, 0], &d).unwrap(), 0);
        assert!(medoid(&[], &d).is_err());
    }

    #[test]
    fn members_and_children() {
        let dend = complete_linkage(&three()).unwrap();
        assert_eq!(dend.root(), 4);
        assert_eq!(dend.members(4), vec![0, 1, 2]);
        assert_eq!(dend.children(3), Some((0, 1)));
        assert_eq!(dend.children(1), None);
    }

    #[test]
    fn single_leaf() {
        let d = DistanceMatrix::from_fn(vec!["x".into()], |_, _| 0.0);
        let dend = complete_linkage(&d).unwrap();
        assert_eq!(dend.root(), 0);
        assert_eq!(cut(&dend, 0.6).labels, vec![0]);
    }
}
