//! Connected-component clustering of shell points at a distance threshold
//! `c·λ^{2/(d+1)!}`.

use serde::Serialize;

use super::exact::{affine_dimension, circumsphere, Circumsphere};
use super::{dist_sq, enumerate_shell, LatticeShell};
use crate::{Error, Freq, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClusterOptions {
    /// Multiplicative constant in front of `λ^exponent`.
    pub c: f64,
    /// Separation exponent; `None` means `2/(d+1)!`.
    pub exponent: Option<f64>,
    /// Compute affine dimension and circumsphere per cluster.
    pub geometry: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            c: 1.0,
            exponent: None,
            geometry: true,
        }
    }
}

/// `2/(d+1)!`
pub fn default_exponent(d: usize) -> f64 {
    let fact: f64 = (1..=d + 1).map(|i| i as f64).product();
    2.0 / fact
}

#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    /// Indices into the shell's point list.
    pub indices: Vec<usize>,
    pub diameter: f64,
    pub affine_dimension: Option<usize>,
    pub circumsphere: Option<Circumsphere>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterDecomposition {
    pub shell: LatticeShell,
    pub threshold: f64,
    pub exponent: f64,
    pub clusters: Vec<Cluster>,
    /// `+∞` when there is a single cluster.
    pub min_intercluster_distance: f64,
}

impl ClusterDecomposition {
    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(|c| c.indices.len()).max().unwrap_or(0)
    }

    pub fn cluster_points(&self, i: usize) -> Vec<Freq> {
        self.clusters[i]
            .indices
            .iter()
            .map(|&j| self.shell.points[j].clone())
            .collect()
    }

    /// Cluster label of every shell point.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.shell.len()];
        for (ci, c) in self.clusters.iter().enumerate() {
            for &j in &c.indices {
                labels[j] = ci;
            }
        }
        labels
    }
}

pub fn cluster_decompose(shell: &LatticeShell, c: f64) -> Result<ClusterDecomposition> {
    cluster_decompose_with(
        shell,
        ClusterOptions {
            c,
            ..Default::default()
        },
    )
}

/// Partitions the shell into connected components of the graph joining
/// points at distance at most `c·λ^exponent`.
pub fn cluster_decompose_with(shell: &LatticeShell, opts: ClusterOptions) -> Result<ClusterDecomposition> {
    if shell.is_empty() {
        return Err(Error::Empty("cluster_decompose on an empty shell".into()));
    }
    if !(opts.c > 0.0) {
        return Err(Error::invalid(format!(
            "cluster constant must be > 0, got {}",
            opts.c
        )));
    }
    // canonical order so the partition does not depend on input order
    let mut canon = shell.clone();
    canon.points.sort();
    canon.points.dedup();
    let pts = &canon.points;
    let exponent = opts.exponent.unwrap_or_else(|| default_exponent(shell.d));
    let threshold = opts.c * canon.lambda().powf(exponent);
    let t2 = threshold * threshold;

    let n = pts.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if (dist_sq(&pts[i], &pts[j]) as f64) <= t2 {
                uf.union(i, j);
            }
        }
    }
    let mut root_to_cluster = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        if root_to_cluster[r] == usize::MAX {
            root_to_cluster[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_to_cluster[r]].push(i);
    }

    let mut min_cross = i64::MAX;
    for i in 0..n {
        for j in i + 1..n {
            if uf.find(i) != uf.find(j) {
                min_cross = min_cross.min(dist_sq(&pts[i], &pts[j]));
            }
        }
    }
    let min_intercluster_distance = if min_cross == i64::MAX {
        f64::INFINITY
    } else {
        (min_cross as f64).sqrt()
    };

    let clusters = groups
        .into_iter()
        .map(|indices| {
            let members: Vec<Freq> = indices.iter().map(|&j| pts[j].clone()).collect();
            let mut diam2 = 0;
            for a in 0..members.len() {
                for b in a + 1..members.len() {
                    diam2 = diam2.max(dist_sq(&members[a], &members[b]));
                }
            }
            let (affine_dimension, circumsphere) = if opts.geometry {
                let dim = affine_dimension(&members)?;
                let sphere = if members.len() >= 2 {
                    Some(circumsphere(&members)?)
                } else {
                    None
                };
                (Some(dim), sphere)
            } else {
                (None, None)
            };
            Ok(Cluster {
                indices,
                diameter: (diam2 as f64).sqrt(),
                affine_dimension,
                circumsphere,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ClusterDecomposition {
        shell: canon,
        threshold,
        exponent,
        clusters,
        min_intercluster_distance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct JarnikReport {
    pub n_max: u64,
    pub c: f64,
    pub shells_checked: usize,
    pub max_cluster_size: usize,
    /// Largest `diam Ω / λ^{1/3}` over all clusters and shells.
    pub max_diameter_ratio: f64,
    /// Values of `n` with a cluster of more than two points.
    pub offending: Vec<u64>,
    pub pass: bool,
}

/// Checks that in `d = 2` every cluster at threshold `c·λ^{1/3}` has at
/// most two points, for every non-empty shell with `1 ≤ n ≤ n_max`.
pub fn jarnik_audit(n_max: u64, c: f64) -> Result<JarnikReport> {
    if n_max < 2 {
        return Err(Error::invalid(format!("n_max must be >= 2, got {n_max}")));
    }
    let opts = ClusterOptions {
        c,
        exponent: Some(1.0 / 3.0),
        geometry: false,
    };
    let mut report = JarnikReport {
        n_max,
        c,
        shells_checked: 0,
        max_cluster_size: 0,
        max_diameter_ratio: 0.0,
        offending: Vec::new(),
        pass: true,
    };
    for n in 1..=n_max {
        let shell = enumerate_shell(2, n as i64)?;
        if shell.is_empty() {
            continue;
        }
        let dec = cluster_decompose_with(&shell, opts)?;
        report.shells_checked += 1;
        let size = dec.max_cluster_size();
        report.max_cluster_size = report.max_cluster_size.max(size);
        let scale = shell.lambda().powf(1.0 / 3.0);
        for cl in &dec.clusters {
            report.max_diameter_ratio = report.max_diameter_ratio.max(cl.diameter / scale);
        }
        if size > 2 {
            report.offending.push(n);
        }
    }
    report.pass = report.offending.is_empty();
    Ok(report)
}
