//! Nonnegativity of partition sums over perfect matchings.
//!
//! For a double partition `P` of `[2r]`, the blocks become vertices of a
//! multigraph with one edge per factor `B(v_{2j-1}, v_{2j})`. Every vertex has
//! degree two, so the graph is a disjoint union of cycles and the partition
//! sum factors into cyclic sums `Σ B(v_{l_1},v_{l_2})⋯B(v_{l_m},v_{l_1})`.
//! Each cyclic sum is evaluated by folding the cycle across an axis of
//! symmetry, which exhibits it as a sum of squares.

use serde_json::{json, Value};

use crate::bilinear::{FunctionFamily, PositiveForm, Vector};
use crate::error::{invalid, Error, Result};
use crate::partition::SetPartition;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingGraph {
    /// Vertex `i` is block `i` of the partition (zero-based elements).
    pub vertices: Vec<Vec<usize>>,
    /// Edge `j` joins the blocks of slots `2j` and `2j+1`.
    pub edges: Vec<(usize, usize)>,
}

impl PairingGraph {
    /// Arbitrary multigraph on `count` unlabeled vertices.
    pub fn from_edges(count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a >= count || *b >= count) {
            return Err(Error::MalformedGraph(format!("edge ({a},{b}) leaves {count} vertices")));
        }
        Ok(PairingGraph { vertices: (0..count).map(|v| vec![v]).collect(), edges })
    }

    /// Loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    /// Vertices in traversal order, starting from the lowest.
    pub vertices: Vec<usize>,
    /// Edge ids in traversal order.
    pub edges: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleDecomposition {
    pub cycles: Vec<Cycle>,
}

impl CircleDecomposition {
    /// Cycle lengths in canonical order.
    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Cycle::len).collect()
    }
}

pub fn build_pairing_graph(p: &SetPartition, r: usize) -> Result<PairingGraph> {
    if p.n() != 2 * r {
        return Err(invalid(format!("partition of [{}] but r = {r}", p.n())));
    }
    if !p.is_double() {
        return Err(invalid(format!("{p} is not a perfect matching")));
    }
    let edges = (0..r).map(|j| (p.block_of(2 * j), p.block_of(2 * j + 1))).collect();
    Ok(PairingGraph { vertices: p.blocks().to_vec(), edges })
}

/// Splits a 2-regular multigraph into its cycles.
///
/// Traversal starts at the lowest unvisited vertex and always leaves by the
/// lowest unused edge, so the output is canonical.
pub fn decompose_circles(g: &PairingGraph) -> Result<CircleDecomposition> {
    let count = g.vertices.len();
    for v in 0..count {
        let d = g.degree(v);
        if d != 2 {
            return Err(Error::MalformedGraph(format!("vertex {v} has degree {d}")));
        }
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        incident[a].push(e);
        if b != a {
            incident[b].push(e);
        }
    }
    let mut edge_used = vec![false; g.edges.len()];
    let mut covered = vec![false; count];
    let mut cycles = Vec::new();
    for start in 0..count {
        if covered[start] {
            continue;
        }
        let mut vertices = vec![start];
        let mut edges = Vec::new();
        covered[start] = true;
        let mut current = start;
        loop {
            let Some(&e) = incident[current].iter().find(|&&e| !edge_used[e]) else {
                return Err(Error::MalformedGraph(format!("walk stuck at vertex {current}")));
            };
            edge_used[e] = true;
            edges.push(e);
            let (a, b) = g.edges[e];
            let next = if a == current { b } else { a };
            if next == start {
                break;
            }
            covered[next] = true;
            vertices.push(next);
            current = next;
        }
        cycles.push(Cycle { vertices, edges });
    }
    Ok(CircleDecomposition { cycles })
}

fn gram<S: Scalar>(form: &PositiveForm<S>, vectors: &[&[S]]) -> Result<Vec<Vec<S>>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| form.form().eval(a, b)).collect())
        .collect()
}

fn mat_mul<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = S::zero();
                    for k in 0..n {
                        let mut t = a[i][k].clone();
                        t *= &b[k][j];
                        acc += &t;
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `Σ_{l_1..l_m} B(v_{l_1},v_{l_2}) ⋯ B(v_{l_m},v_{l_1})` by folding.
///
/// Odd `m = 2k-1`: fold the chain `l_1 → … → l_k` into
/// `w_{l_1} = Σ B(v_{l_1},v_{l_2})⋯B(v_{l_{k-1}},v_{l_k}) v_{l_k}` and return
/// `Σ_{l_1} B(w_{l_1}, w_{l_1})`. Even `m = 2k`: the half-chain scalars from
/// `l_1` to `l_{k+1}` are squared and summed.
pub fn circle_sum<S: Scalar>(form: &PositiveForm<S>, vectors: &[&[S]], m: usize) -> Result<S> {
    if m == 0 {
        return Err(invalid("cycle length must be at least 1"));
    }
    let g = gram(form, vectors)?;
    if m % 2 == 1 {
        let k = m.div_ceil(2);
        let mut w: Vec<Vector<S>> = vectors.iter().map(|v| v.to_vec()).collect();
        for _ in 1..k {
            w = g
                .iter()
                .map(|row| {
                    let mut acc = vec![S::zero(); form.form().dim()];
                    for (coef, u) in row.iter().zip(&w) {
                        for (a, x) in acc.iter_mut().zip(u) {
                            let mut t = coef.clone();
                            t *= x;
                            *a += &t;
                        }
                    }
                    acc
                })
                .collect();
        }
        let mut total = S::zero();
        for wl in &w {
            total += &form.form().quadratic(wl)?;
        }
        Ok(total)
    } else {
        let k = m / 2;
        let mut h = g.clone();
        for _ in 1..k {
            h = mat_mul(&h, &g);
        }
        let mut total = S::zero();
        for x in h.iter().flatten() {
            let mut sq = x.clone();
            sq *= x;
            total += &sq;
        }
        Ok(total)
    }
}

/// Partition sum of `Λ` over a perfect matching `p` of `[2r]` at atom `x`,
/// as the product of the folded cyclic sums.
pub fn double_partition_sum<S: Scalar>(
    form: &PositiveForm<S>,
    family: &FunctionFamily<S>,
    x: usize,
    p: &SetPartition,
    r: usize,
) -> Result<S> {
    let decomposition = decompose_circles(&build_pairing_graph(p, r)?)?;
    cycle_product(form, family, x, &decomposition)
}

fn cycle_product<S: Scalar>(
    form: &PositiveForm<S>,
    family: &FunctionFamily<S>,
    x: usize,
    decomposition: &CircleDecomposition,
) -> Result<S> {
    family.check_form(form.form())?;
    let vectors = family.at_atom(x);
    let mut acc = S::one();
    for cycle in &decomposition.cycles {
        acc *= &circle_sum(form, &vectors, cycle.len())?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport<S> {
    pub partition: SetPartition,
    pub decomposition: CircleDecomposition,
    pub per_atom: Vec<S>,
    /// `Σ_x μ_x value(x)`.
    pub integrated: S,
    pub nonnegative: bool,
}

impl<S: Scalar> PositivityReport<S> {
    pub fn to_json(&self) -> Value {
        let cycles: Vec<Value> = self
            .decomposition
            .cycles
            .iter()
            .map(|c| {
                json!({
                    "length": c.len(),
                    "blocks": c.vertices.iter().map(|&v| {
                        self.partition.blocks()[v].iter().map(|j| j + 1).collect::<Vec<_>>()
                    }).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "partition": self.partition.to_string(),
            "cycles": cycles,
            "value": self.integrated.to_json(),
            "per_atom": self.per_atom.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "nonnegative": self.nonnegative,
        })
    }
}

/// Folded evaluation of `p` at every atom of the family.
pub fn positivity_report<S: Scalar>(
    form: &PositiveForm<S>,
    family: &FunctionFamily<S>,
    p: &SetPartition,
    r: usize,
) -> Result<PositivityReport<S>> {
    let decomposition = decompose_circles(&build_pairing_graph(p, r)?)?;
    let per_atom = (0..family.atoms())
        .map(|x| cycle_product(form, family, x, &decomposition))
        .collect::<Result<Vec<S>>>()?;
    let integrated = family.space().integrate(&per_atom);
    let nonnegative = per_atom.iter().all(|v| !v.is_negative());
    Ok(PositivityReport { partition: p.clone(), decomposition, per_atom, integrated, nonnegative })
}
