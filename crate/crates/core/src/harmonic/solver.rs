//! Dirichlet problems `π_x f(x) = Σ_y c(xy) f(y)` off the boundary.
//!
//! Two solvers share one assembly: Jacobi-preconditioned conjugate gradients
//! for floats, and sparse Gaussian elimination with a greedy minimum-degree
//! pivot order, which is exact over rationals and serves as the oracle.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use super::HarmonicError;
use crate::graph::{edge_of, PlanarGraph, VertexId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    /// Elimination for exact scalars, conjugate gradients otherwise.
    Auto,
    Iterative,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Relative residual `|r| / |b|` required of the iterative solver.
    pub tolerance: f64,
    /// Iteration cap as a multiple of the vertex count.
    pub max_iter_factor: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            tolerance: 1e-10,
            max_iter_factor: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirichletSolution<S> {
    pub values: Vec<S>,
    /// Achieved relative residual; zero for elimination.
    pub residual: f64,
    pub iterations: usize,
}

/// Symmetric system over the unknown vertices.
struct System<S> {
    unknowns: Vec<VertexId>,
    diag: Vec<S>,
    /// Strictly off-diagonal couplings `-c(xy)`, per row, sorted by column.
    off: Vec<Vec<(usize, S)>>,
    rhs: Vec<S>,
}

fn assemble<S: Scalar>(g: &PlanarGraph<S>, boundary: &[Option<S>]) -> System<S> {
    let n = g.num_vertices();
    let mut index = vec![usize::MAX; n];
    let unknowns: Vec<VertexId> = (0..n).filter(|&v| boundary[v].is_none()).collect();
    for (i, &v) in unknowns.iter().enumerate() {
        index[v] = i;
    }
    let mut diag = Vec::with_capacity(unknowns.len());
    let mut off = Vec::with_capacity(unknowns.len());
    let mut rhs = Vec::with_capacity(unknowns.len());
    for &x in &unknowns {
        let mut d = S::zero();
        let mut row: BTreeMap<usize, S> = BTreeMap::new();
        let mut b = S::zero();
        for &dart in g.rotation(x) {
            let c = g.conductance(edge_of(dart)).clone();
            let y = g.head(dart);
            d = d + c.clone();
            match &boundary[y] {
                Some(value) => b = b + c * value.clone(),
                None => {
                    let entry = row.entry(index[y]).or_insert_with(S::zero);
                    *entry = entry.clone() - c;
                }
            }
        }
        diag.push(d);
        off.push(row.into_iter().collect());
        rhs.push(b);
    }
    System {
        unknowns,
        diag,
        off,
        rhs,
    }
}

/// Solves for `f` harmonic off the boundary with `f = boundary[v]` wherever
/// `boundary[v]` is set.
pub fn solve_dirichlet<S: Scalar>(
    g: &PlanarGraph<S>,
    boundary: &[Option<S>],
    opts: &SolverOptions,
) -> Result<DirichletSolution<S>, HarmonicError> {
    if boundary.len() != g.num_vertices() {
        return Err(HarmonicError::BoundaryLength {
            expected: g.num_vertices(),
            got: boundary.len(),
        });
    }
    if boundary.iter().all(Option::is_none) {
        return Err(HarmonicError::EmptyBoundary);
    }
    check_reaches_boundary(g, boundary)?;
    let system = assemble(g, boundary);
    let exact = match opts.method {
        SolverMethod::Auto => S::EXACT,
        SolverMethod::Iterative => false,
        SolverMethod::Exact => true,
    };
    let (x, residual, iterations) = if exact {
        (eliminate(&system), 0.0, 0)
    } else {
        conjugate_gradient(&system, opts)?
    };
    let mut values: Vec<S> = boundary
        .iter()
        .map(|b| b.clone().unwrap_or_else(S::zero))
        .collect();
    for (i, &v) in system.unknowns.iter().enumerate() {
        values[v] = x[i].clone();
    }
    Ok(DirichletSolution {
        values,
        residual,
        iterations,
    })
}

fn check_reaches_boundary<S: Scalar>(
    g: &PlanarGraph<S>,
    boundary: &[Option<S>],
) -> Result<(), HarmonicError> {
    let mut seen: Vec<bool> = boundary.iter().map(Option::is_some).collect();
    let mut queue: VecDeque<VertexId> = (0..g.num_vertices()).filter(|&v| seen[v]).collect();
    while let Some(x) = queue.pop_front() {
        for (_, y) in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(HarmonicError::SingularSystem {
            vertex: g.label(v).to_string(),
        }),
        None => Ok(()),
    }
}

fn mat_vec<S: Scalar>(sys: &System<S>, x: &[S], out: &mut [S]) {
    for i in 0..x.len() {
        let mut acc = sys.diag[i].clone() * x[i].clone();
        for (j, a) in &sys.off[i] {
            acc = acc + a.clone() * x[*j].clone();
        }
        out[i] = acc;
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn conjugate_gradient<S: Scalar>(
    sys: &System<S>,
    opts: &SolverOptions,
) -> Result<(Vec<S>, f64, usize), HarmonicError> {
    let n = sys.unknowns.len();
    let b_norm2 = dot(&sys.rhs, &sys.rhs).to_f64();
    if n == 0 || b_norm2 == 0.0 {
        return Ok((vec![S::zero(); n], 0.0, 0));
    }
    let tol2 = opts.tolerance * opts.tolerance * b_norm2;
    let max_iter = opts.max_iter_factor * n;
    // Warm start from the Jacobi solution.
    let mut x: Vec<S> = (0..n)
        .map(|i| sys.rhs[i].clone() / sys.diag[i].clone())
        .collect();
    let mut ax = vec![S::zero(); n];
    mat_vec(sys, &x, &mut ax);
    let mut r: Vec<S> = (0..n).map(|i| sys.rhs[i].clone() - ax[i].clone()).collect();
    let mut z: Vec<S> = (0..n).map(|i| r[i].clone() / sys.diag[i].clone()).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![S::zero(); n];
    let mut r2 = dot(&r, &r).to_f64();
    let mut it = 0;
    while r2 > tol2 {
        if it >= max_iter {
            return Err(HarmonicError::NotConverged {
                iterations: it,
                residual: (r2 / b_norm2).sqrt(),
            });
        }
        it += 1;
        mat_vec(sys, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= S::zero() {
            break;
        }
        let alpha = rz.clone() / pap;
        for i in 0..n {
            x[i] = x[i].clone() + alpha.clone() * p[i].clone();
            r[i] = r[i].clone() - alpha.clone() * ap[i].clone();
            z[i] = r[i].clone() / sys.diag[i].clone();
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new.clone() / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i].clone() + beta.clone() * p[i].clone();
        }
        r2 = dot(&r, &r).to_f64();
    }
    // Report the true residual rather than the recursively updated one.
    mat_vec(sys, &x, &mut ax);
    let true_r2: f64 = (0..n)
        .map(|i| (sys.rhs[i].clone() - ax[i].clone()).to_f64().powi(2))
        .sum();
    Ok((x, (true_r2 / b_norm2).sqrt(), it))
}

/// Gaussian elimination on the symmetric sparse system, pivoting on the
/// remaining row of smallest degree.
fn eliminate<S: Scalar>(sys: &System<S>) -> Vec<S> {
    let n = sys.unknowns.len();
    let mut rows: Vec<BTreeMap<usize, S>> = (0..n)
        .map(|i| {
            let mut row: BTreeMap<usize, S> = sys.off[i].iter().cloned().collect();
            row.insert(i, sys.diag[i].clone());
            row
        })
        .collect();
    let mut rhs = sys.rhs.clone();
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((rows[i].len(), i))).collect();
    let mut order = Vec::with_capacity(n);
    let mut pivots: Vec<BTreeMap<usize, S>> = vec![BTreeMap::new(); n];
    while let Some(Reverse((deg, p))) = heap.pop() {
        if done[p] || deg != rows[p].len() {
            continue;
        }
        done[p] = true;
        order.push(p);
        let row_p = std::mem::take(&mut rows[p]);
        let a_pp = row_p[&p].clone();
        for (&i, a_ip) in row_p.iter() {
            if i == p {
                continue;
            }
            let factor = a_ip.clone() / a_pp.clone();
            let row_i = &mut rows[i];
            row_i.remove(&p);
            for (&j, a_pj) in row_p.iter() {
                if j == p {
                    continue;
                }
                let entry = row_i.entry(j).or_insert_with(S::zero);
                *entry = entry.clone() - factor.clone() * a_pj.clone();
            }
            rhs[i] = rhs[i].clone() - factor * rhs[p].clone();
            heap.push(Reverse((row_i.len(), i)));
        }
        pivots[p] = row_p;
    }
    let mut x = vec![S::zero(); n];
    for &p in order.iter().rev() {
        let row = &pivots[p];
        let mut acc = rhs[p].clone();
        for (&j, a) in row.iter() {
            if j != p {
                acc = acc - a.clone() * x[j].clone();
            }
        }
        x[p] = acc / row[&p].clone();
    }
    x
}
