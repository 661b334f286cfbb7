//! Block-structured semidefinite programming with primal/dual certificates.
//!
//! Problems are stated over named complex Hermitian blocks: minimise a
//! real-linear functional subject to real-linear equality constraints, with
//! a chosen subset of blocks confined to the PSD cone. Internally every
//! complex Hermitian block of dimension `d` is embedded as a real symmetric
//! `2d x 2d` block via `H = A + iB ↦ [[A, -B], [B, A]]` (halving the
//! coefficient operators keeps objective and constraint values unchanged),
//! free blocks are split into differences of PSD pairs, and dependent
//! equality rows are eliminated up front. The embedded cone program is
//! solved by the homogeneous self-dual interior-point method in
//! [`solver`]; callers only ever see complex blocks.
//!
//! A problem can be dumped to a sparse triplet text format for
//! cross-checking against external tools; see [`SdpProblem::write_triplet_dump`].

mod solver;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{cpx, CMatrix, HermitianOperator};

pub use solver::{svec, unsvec};

/// One Hermitian variable block.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub name: String,
    pub dim: usize,
    /// Whether the block is confined to the PSD cone; otherwise it is a
    /// free Hermitian variable.
    pub psd: bool,
}

/// A real-linear equality `Σ_k tr(C_k X_{b_k}) = rhs`.
#[derive(Debug, Clone)]
pub struct Equality {
    pub terms: Vec<(usize, HermitianOperator)>,
    pub rhs: f64,
}

/// A block-structured SDP instance.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    blocks: Vec<BlockSpec>,
    objective: Vec<Option<HermitianOperator>>,
    equalities: Vec<Equality>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

/// A certified dual improving ray: `Σ_k y_k A_{k,b} ⪯ 0` for every PSD
/// block (zero on free blocks) with `Σ_k y_k rhs_k = objective > 0`, which
/// is impossible for a feasible problem.
#[derive(Debug, Clone)]
pub struct DualRay {
    pub multipliers: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal_blocks: Vec<HermitianOperator>,
    pub dual_multipliers: Vec<f64>,
    /// Dual slacks `S_b = C_b - Σ_k y_k A_{k,b}`, recomputed in complex
    /// space from the reported multipliers.
    pub dual_slacks: Vec<HermitianOperator>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub min_block_eigenvalue: f64,
    pub iterations: usize,
    pub infeasibility_ray: Option<DualRay>,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-7, feas_tol: 1e-8, max_iters: 200 }
    }
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a block and returns its index.
    pub fn add_block(&mut self, name: impl Into<String>, dim: usize, psd: bool) -> usize {
        self.blocks.push(BlockSpec { name: name.into(), dim, psd });
        self.objective.push(None);
        self.blocks.len() - 1
    }

    /// Sets the objective coefficient `C_b` (the objective is
    /// `Σ_b tr(C_b X_b)`, minimised).
    pub fn set_objective(&mut self, block: usize, coeff: HermitianOperator) {
        self.objective[block] = Some(coeff);
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, HermitianOperator)>, rhs: f64) {
        self.equalities.push(Equality { terms, rhs });
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn n_equalities(&self) -> usize {
        self.equalities.len()
    }

    fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::IllFormedProblem { context: "no variable blocks".into() });
        }
        for (b, spec) in self.blocks.iter().enumerate() {
            if spec.dim == 0 {
                return Err(Error::IllFormedProblem {
                    context: format!("block {b} ({}) has dimension 0", spec.name),
                });
            }
            if let Some(c) = &self.objective[b] {
                if c.dim() != spec.dim {
                    return Err(Error::IllFormedProblem {
                        context: format!("objective coefficient dim mismatch on block {b}"),
                    });
                }
            }
        }
        for (k, eq) in self.equalities.iter().enumerate() {
            if !eq.rhs.is_finite() {
                return Err(Error::IllFormedProblem {
                    context: format!("equality {k} has non-finite rhs"),
                });
            }
            for (b, c) in &eq.terms {
                let spec = self.blocks.get(*b).ok_or_else(|| Error::IllFormedProblem {
                    context: format!("equality {k} references unknown block {b}"),
                })?;
                if c.dim() != spec.dim {
                    return Err(Error::IllFormedProblem {
                        context: format!("equality {k} coefficient dim mismatch on block {b}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Sparse triplet dump for cross-checking against external tools.
    ///
    /// Everything is 0-based. Lines: `block <idx> <name> <dim> <psd|free>`,
    /// then `obj <block> <row> <col> <re> <im>` for nonzero objective
    /// entries (lower triangle), then per equality `eq <k> <rhs>` followed
    /// by `coef <k> <block> <row> <col> <re> <im>` triplets.
    pub fn write_triplet_dump(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "sdp-triplets v1")?;
        writeln!(w, "blocks {}", self.blocks.len())?;
        for (i, b) in self.blocks.iter().enumerate() {
            writeln!(w, "block {} {} {} {}", i, b.name, b.dim, if b.psd { "psd" } else { "free" })?;
        }
        fn dump_op(
            w: &mut dyn std::io::Write,
            tag: &str,
            prefix: &str,
            op: &HermitianOperator,
        ) -> std::io::Result<()> {
            let m = op.matrix();
            for j in 0..op.dim() {
                for i in j..op.dim() {
                    let z = m[(i, j)];
                    if z.norm() > 0.0 {
                        writeln!(w, "{tag} {prefix} {i} {j} {:.17e} {:.17e}", z.re, z.im)?;
                    }
                }
            }
            Ok(())
        }
        for (b, c) in self.objective.iter().enumerate() {
            if let Some(c) = c {
                dump_op(w, "obj", &format!("{b}"), c)?;
            }
        }
        writeln!(w, "equalities {}", self.equalities.len())?;
        for (k, eq) in self.equalities.iter().enumerate() {
            writeln!(w, "eq {} {:.17e}", k, eq.rhs)?;
            for (b, c) in &eq.terms {
                dump_op(w, "coef", &format!("{k} {b}"), c)?;
            }
        }
        Ok(())
    }
}

/// `H = A + iB ↦ [[A, -B], [B, A]] / scale`.
fn realify(h: &HermitianOperator, scale: f64) -> DMatrix<f64> {
    let d = h.dim();
    let m = h.matrix();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)] / scale;
            out[(i, j)] = z.re;
            out[(i + d, j + d)] = z.re;
            out[(i, j + d)] = -z.im;
            out[(i + d, j)] = z.im;
        }
    }
    out
}

/// Reads a complex Hermitian matrix back out of a real embedding,
/// J-symmetrising along the way.
fn derealify(m: &DMatrix<f64>, d: usize) -> HermitianOperator {
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re = 0.5 * (m[(i, j)] + m[(i + d, j + d)]);
            let im = 0.5 * (m[(i + d, j)] - m[(i, j + d)]);
            out[(i, j)] = cpx(re, im);
        }
    }
    HermitianOperator::symmetrize(out)
}

/// Coordinate layout of the internal real program: PSD blocks become real
/// symmetric cone blocks (svec of the 2d embedding), free Hermitian blocks
/// become coefficient vectors over the Hermitian basis and are eliminated
/// against the equalities before the cone solver runs.
struct Embedding {
    /// (original block, real dim, svec offset) per cone block.
    cone: Vec<(usize, usize, usize)>,
    n: usize,
    /// (original block, basis, coord offset) per free block.
    free: Vec<(usize, Vec<HermitianOperator>, usize)>,
    p: usize,
}

fn embed_blocks(blocks: &[BlockSpec]) -> Embedding {
    let mut cone = Vec::new();
    let mut n = 0;
    let mut free = Vec::new();
    let mut p = 0;
    for (b, spec) in blocks.iter().enumerate() {
        if spec.psd {
            let d_real = 2 * spec.dim;
            cone.push((b, d_real, n));
            n += d_real * (d_real + 1) / 2;
        } else {
            let basis = crate::linalg::hermitian_basis(spec.dim);
            let len = basis.len();
            free.push((b, basis, p));
            p += len;
        }
    }
    Embedding { cone, n, free, p }
}

impl Embedding {
    /// Scatters a coefficient operator into cone svec coordinates and free
    /// basis coordinates.
    fn scatter(
        &self,
        cone_out: &mut DVector<f64>,
        free_out: &mut DVector<f64>,
        block: usize,
        op: &HermitianOperator,
    ) {
        for (b, d_real, offset) in &self.cone {
            if *b == block {
                let half = realify(op, 2.0);
                let v = svec(&half);
                let len = d_real * (d_real + 1) / 2;
                let mut seg = cone_out.rows_mut(*offset, len);
                seg += &v;
            }
        }
        for (b, basis, offset) in &self.free {
            if *b == block {
                for (j, f) in basis.iter().enumerate() {
                    free_out[offset + j] += f.inner(op);
                }
            }
        }
    }
}

/// Result of the equality-row presolve.
enum Presolve {
    Reduced { keep: Vec<usize> },
    Inconsistent { ray: DualRay },
}

/// Drops linearly dependent equality rows. A dependent row whose rhs
/// disagrees with the implied combination yields an exact Farkas ray.
fn presolve_rows(a: &DMatrix<f64>, b: &DVector<f64>) -> Presolve {
    let m = a.nrows();
    let mut keep: Vec<usize> = Vec::new();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for k in 0..m {
        let row = a.row(k).transpose();
        let scale = row.norm().max(1.0);
        let mut resid = row.clone();
        for q in &basis {
            let c = q.dot(&resid);
            resid -= q * c;
        }
        // Second orthogonalisation pass for numerical safety.
        for q in &basis {
            let c = q.dot(&resid);
            resid -= q * c;
        }
        if resid.norm() > 1e-11 * scale {
            let nq = resid.norm();
            basis.push(resid / nq);
            keep.push(k);
        } else {
            // row_k = Σ_j z_j row_{keep_j}: recover z by least squares and
            // check rhs consistency.
            let t = keep.len();
            let mut akt = DMatrix::zeros(row.len(), t);
            for (col, &ki) in keep.iter().enumerate() {
                akt.set_column(col, &a.row(ki).transpose());
            }
            let svd = akt.svd(true, true);
            let z = svd.solve(&row, 1e-12).expect("least squares");
            let implied: f64 = keep.iter().zip(z.iter()).map(|(&ki, zi)| b[ki] * zi).sum();
            let gap = b[k] - implied;
            if gap.abs() > 1e-9 * b[k].abs().max(1.0) {
                // y supported on {kept rows, row k}: Aᵀy = 0, bᵀy = 1.
                let mut y = vec![0.0; m];
                y[k] = 1.0;
                for (&ki, zi) in keep.iter().zip(z.iter()) {
                    y[ki] = -zi;
                }
                let mut obj = gap;
                if obj < 0.0 {
                    for v in &mut y {
                        *v = -*v;
                    }
                    obj = -obj;
                }
                for v in &mut y {
                    *v /= obj;
                }
                return Presolve::Inconsistent {
                    ray: DualRay { multipliers: y, objective: 1.0 },
                };
            }
        }
    }
    Presolve::Reduced { keep }
}

/// Solves the SDP. Deterministic for identical inputs and options.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let embedding = embed_blocks(&problem.blocks);
    let n = embedding.n;
    let p = embedding.p;
    let m_orig = problem.equalities.len();

    let mut c = DVector::zeros(n);
    let mut c_free = DVector::zeros(p);
    for (b, coeff) in problem.objective.iter().enumerate() {
        if let Some(coeff) = coeff {
            embedding.scatter(&mut c, &mut c_free, b, coeff);
        }
    }
    let mut a = DMatrix::zeros(m_orig, n);
    let mut a_free = DMatrix::zeros(m_orig, p);
    let mut rhs = DVector::zeros(m_orig);
    for (k, eq) in problem.equalities.iter().enumerate() {
        let mut row = DVector::zeros(n);
        let mut row_free = DVector::zeros(p);
        for (b, coeff) in &eq.terms {
            embedding.scatter(&mut row, &mut row_free, *b, coeff);
        }
        a.row_mut(k).copy_from(&row.transpose());
        a_free.row_mut(k).copy_from(&row_free.transpose());
        rhs[k] = eq.rhs;
    }

    let a_orig = a.clone();
    let rhs_orig = rhs.clone();

    // Eliminate free blocks: with w solving A_freeᵀ w = c_free, the
    // objective becomes (c - Aᵀw)ᵀx + bᵀw on the projected constraint set
    // P⊥(A x - b) = 0, where P⊥ annihilates ran(A_free). If c_free has a
    // component outside ran(A_freeᵀ), the objective is unbounded along a
    // feasible free direction.
    let mut objective_offset = 0.0;
    let mut w_free = DVector::zeros(m_orig);
    let mut q1_basis: Vec<DVector<f64>> = Vec::new();
    if p > 0 {
        let svd_t = a_free.transpose().svd(true, true);
        let w = match svd_t.solve(&c_free, 1e-12) {
            Ok(w) => w,
            Err(e) => {
                return Err(Error::SolverFailure { context: format!("free elimination: {e}") })
            }
        };
        let resid = a_free.transpose() * &w - &c_free;
        if resid.norm() > 1e-9 * c_free.norm().max(1.0) {
            return Ok(unbounded_solution(problem, &embedding, m_orig));
        }
        objective_offset = rhs.dot(&w);
        c -= a.transpose() * &w;
        // Project rows onto the orthocomplement of ran(A_free) using an
        // orthonormal basis of that range.
        let q1 = range_basis(&a_free);
        for q in &q1 {
            let coeffs = a.transpose() * q; // n-vector: qᵀA
            for k in 0..m_orig {
                let qk = q[k];
                if qk != 0.0 {
                    for j in 0..n {
                        a[(k, j)] -= qk * coeffs[j];
                    }
                }
            }
            let br = rhs.dot(q);
            for k in 0..m_orig {
                rhs[k] -= q[k] * br;
            }
        }
        w_free = w;
        q1_basis = q1;
    }

    let _ = objective_offset;
    let keep = match presolve_rows(&a, &rhs) {
        Presolve::Reduced { keep } => keep,
        Presolve::Inconsistent { ray } => {
            let dual_slacks = dual_slacks_from(problem, &ray.multipliers, true);
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                primal_blocks: problem
                    .blocks
                    .iter()
                    .map(|b| HermitianOperator::zeros(b.dim))
                    .collect(),
                dual_multipliers: ray.multipliers.clone(),
                dual_slacks,
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                gap: f64::NAN,
                primal_residual: f64::NAN,
                min_block_eigenvalue: f64::NAN,
                iterations: 0,
                infeasibility_ray: Some(ray),
            });
        }
    };

    let m = keep.len();
    let mut a_red = DMatrix::zeros(m, n);
    let mut b_red = DVector::zeros(m);
    for (i, &k) in keep.iter().enumerate() {
        a_red.row_mut(i).copy_from(&a.row(k));
        b_red[i] = rhs[k];
    }

    let cone = solver::ConeProblem {
        block_dims: embedding.cone.iter().map(|(_, d, _)| *d).collect(),
        a: a_red,
        b: b_red,
        c,
    };
    let copts = solver::ConeOptions {
        gap_tol: opts.gap_tol,
        feas_tol: opts.feas_tol,
        max_iters: opts.max_iters,
    };
    let sol = solver::solve_cone(&cone, &copts);

    // Lift kept-row multipliers, re-project onto the complement of
    // ran(A_free), and add the elimination shift w: the combination
    // satisfies both the free-block dual equalities and Aᵀy + s = c.
    let mut y_lift = DVector::zeros(m_orig);
    for (i, &k) in keep.iter().enumerate() {
        y_lift[k] = sol.y[i];
    }
    for q in &q1_basis {
        let c = q.dot(&y_lift);
        y_lift -= q * c;
    }
    y_lift += &w_free;
    let dual_multipliers: Vec<f64> = y_lift.iter().cloned().collect();

    match sol.status {
        solver::ConeStatus::Optimal | solver::ConeStatus::MaxIterations => {
            let free_coords = recover_free(&embedding, &a_orig, &a_free, &rhs_orig, &sol.x);
            let primal_blocks = extract_primal(problem, &embedding, &sol.x, &free_coords);
            let dual_slacks = dual_slacks_from(problem, &dual_multipliers, false);
            let primal_objective: f64 = primal_blocks
                .iter()
                .zip(&problem.objective)
                .map(|(x, c)| c.as_ref().map(|c| c.inner(x)).unwrap_or(0.0))
                .sum();
            let dual_objective: f64 =
                problem.equalities.iter().zip(&dual_multipliers).map(|(e, y)| e.rhs * y).sum();
            let primal_residual = primal_equality_residual(problem, &primal_blocks);
            let min_eig = primal_blocks
                .iter()
                .zip(&problem.blocks)
                .filter(|(_, spec)| spec.psd)
                .map(|(x, _)| x.min_eigenvalue())
                .fold(f64::INFINITY, f64::min);
            let status = match sol.status {
                solver::ConeStatus::Optimal => SdpStatus::Optimal,
                _ => SdpStatus::MaxIterations,
            };
            Ok(SdpSolution {
                status,
                primal_blocks,
                dual_multipliers,
                dual_slacks,
                primal_objective,
                dual_objective,
                gap: primal_objective - dual_objective,
                primal_residual,
                min_block_eigenvalue: min_eig,
                iterations: sol.iterations,
                infeasibility_ray: None,
            })
        }
        solver::ConeStatus::PrimalInfeasible => {
            let objective: f64 =
                problem.equalities.iter().zip(&dual_multipliers).map(|(e, y)| e.rhs * y).sum();
            let dual_slacks = dual_slacks_from(problem, &dual_multipliers, true);
            Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                primal_blocks: problem
                    .blocks
                    .iter()
                    .map(|b| HermitianOperator::zeros(b.dim))
                    .collect(),
                dual_multipliers: dual_multipliers.clone(),
                dual_slacks,
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                gap: f64::NAN,
                primal_residual: f64::NAN,
                min_block_eigenvalue: f64::NAN,
                iterations: sol.iterations,
                infeasibility_ray: Some(DualRay { multipliers: dual_multipliers, objective }),
            })
        }
        solver::ConeStatus::DualInfeasible => Ok(SdpSolution {
            status: SdpStatus::Unbounded,
            primal_blocks: extract_primal(problem, &embedding, &sol.x, &DVector::zeros(p)),
            dual_multipliers,
            dual_slacks: Vec::new(),
            primal_objective: f64::NEG_INFINITY,
            dual_objective: f64::NAN,
            gap: f64::NAN,
            primal_residual: f64::NAN,
            min_block_eigenvalue: f64::NAN,
            iterations: sol.iterations,
            infeasibility_ray: None,
        }),
    }
}

fn extract_primal(
    problem: &SdpProblem,
    embedding: &Embedding,
    x: &DVector<f64>,
    free_coords: &DVector<f64>,
) -> Vec<HermitianOperator> {
    let mut out: Vec<HermitianOperator> =
        problem.blocks.iter().map(|b| HermitianOperator::zeros(b.dim)).collect();
    for (b, d_real, offset) in &embedding.cone {
        let len = d_real * (d_real + 1) / 2;
        let seg = &x.as_slice()[*offset..*offset + len];
        let mat = unsvec(seg, *d_real);
        out[*b] = derealify(&mat, problem.blocks[*b].dim);
    }
    for (b, basis, offset) in &embedding.free {
        let mut h = HermitianOperator::zeros(problem.blocks[*b].dim);
        for (j, f) in basis.iter().enumerate() {
            h = h.add(&f.scale(free_coords[offset + j]));
        }
        out[*b] = h;
    }
    out
}

/// Least-norm free coordinates solving `A_free f = b - A_cone x`.
fn recover_free(
    embedding: &Embedding,
    a_orig: &DMatrix<f64>,
    a_free: &DMatrix<f64>,
    rhs_orig: &DVector<f64>,
    x: &DVector<f64>,
) -> DVector<f64> {
    if embedding.p == 0 {
        return DVector::zeros(0);
    }
    let target = rhs_orig - a_orig * x;
    let svd = a_free.clone().svd(true, true);
    svd.solve(&target, 1e-12).unwrap_or_else(|_| DVector::zeros(embedding.p))
}

/// Orthonormal basis of the column space of `m`.
fn range_basis(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-12 * smax.max(1.0) {
            out.push(u.column(i).into_owned());
        }
    }
    out
}

fn unbounded_solution(problem: &SdpProblem, _embedding: &Embedding, m_orig: usize) -> SdpSolution {
    SdpSolution {
        status: SdpStatus::Unbounded,
        primal_blocks: problem.blocks.iter().map(|b| HermitianOperator::zeros(b.dim)).collect(),
        dual_multipliers: vec![0.0; m_orig],
        dual_slacks: Vec::new(),
        primal_objective: f64::NEG_INFINITY,
        dual_objective: f64::NAN,
        gap: f64::NAN,
        primal_residual: f64::NAN,
        min_block_eigenvalue: f64::NAN,
        iterations: 0,
        infeasibility_ray: None,
    }
}

fn dual_slacks_from(
    problem: &SdpProblem,
    multipliers: &[f64],
    ray: bool,
) -> Vec<HermitianOperator> {
    let mut out: Vec<HermitianOperator> = problem
        .blocks
        .iter()
        .enumerate()
        .map(|(b, spec)| {
            if ray {
                HermitianOperator::zeros(spec.dim)
            } else {
                problem.objective[b]
                    .clone()
                    .unwrap_or_else(|| HermitianOperator::zeros(spec.dim))
            }
        })
        .collect();
    for (eq, &y) in problem.equalities.iter().zip(multipliers) {
        if y == 0.0 {
            continue;
        }
        for (b, coeff) in &eq.terms {
            out[*b] = out[*b].sub(&coeff.scale(y));
        }
    }
    out
}

fn primal_equality_residual(problem: &SdpProblem, blocks: &[HermitianOperator]) -> f64 {
    let mut worst = 0.0f64;
    for eq in &problem.equalities {
        let val: f64 = eq.terms.iter().map(|(b, c)| c.inner(&blocks[*b])).sum();
        worst = worst.max((val - eq.rhs).abs());
    }
    worst
}

/// Named scalar summary used in report documents.
pub fn solution_summary(sol: &SdpSolution) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    out.insert("primal_objective".into(), sol.primal_objective);
    out.insert("dual_objective".into(), sol.dual_objective);
    out.insert("gap".into(), sol.gap);
    out.insert("primal_residual".into(), sol.primal_residual);
    out.insert("min_block_eigenvalue".into(), sol.min_block_eigenvalue);
    out.insert("iterations".into(), sol.iterations as f64);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_basis;
    use crate::maxrelent::{dmax, ExtendedReal};
    use crate::random::{random_density, rng_for};

    fn tight() -> SdpOptions {
        SdpOptions { gap_tol: 1e-8, feas_tol: 1e-8, max_iters: 200 }
    }

    #[test]
    fn scalar_trace_minimisation() {
        // minimize tr(X) over X ⪰ 0 with X_00 fixed; 1-dim complex block.
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 1, true);
        p.set_objective(x, HermitianOperator::identity(1));
        p.add_equality(vec![(x, HermitianOperator::identity(1))], 1.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_by_two_pinned_corner() {
        // minimize tr(X), X ⪰ 0 complex 2x2, X_00 = 1 → optimum 1.
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, true);
        p.set_objective(x, HermitianOperator::identity(2));
        p.add_equality(vec![(x, HermitianOperator::from_real_diagonal(&[1.0, 0.0]))], 1.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
        assert!(sol.gap.abs() < 1e-7);
        assert!(sol.primal_residual < 1e-8);
    }

    #[test]
    fn infeasible_with_certificate() {
        // X ⪰ 0 scalar with tr X = 1 and tr X = -1 (inconsistent rows).
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 1, true);
        p.add_equality(vec![(x, HermitianOperator::identity(1))], 1.0);
        p.add_equality(vec![(x, HermitianOperator::identity(1))], -1.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        let ray = sol.infeasibility_ray.as_ref().unwrap();
        assert!(ray.objective > 0.5);
        let val: f64 = ray.multipliers.iter().zip([1.0, -1.0]).map(|(y, r)| y * r).sum();
        assert!(val > 0.5);
        let comb = ray.multipliers[0] + ray.multipliers[1]; // coefficient of the identity
        assert!(comb.abs() <= 1e-9);
    }

    #[test]
    fn infeasible_inside_the_cone() {
        // tr(X) = 1, X ⪰ 0 (2x2), but a diagonal pin forces X_00 = -1.
        // The rows are independent, so the cone solver itself must produce
        // the Farkas ray.
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, true);
        p.add_equality(vec![(x, HermitianOperator::identity(2))], 1.0);
        p.add_equality(vec![(x, HermitianOperator::from_real_diagonal(&[1.0, 0.0]))], -1.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        let ray = sol.infeasibility_ray.as_ref().unwrap();
        assert!(ray.objective > 1e-3);
        // -Σ y_k A_k must be PSD on the cone block.
        let slack = &sol.dual_slacks[0];
        assert!(slack.min_eigenvalue() > -1e-8, "slack eig {}", slack.min_eigenvalue());
    }

    #[test]
    fn free_block_reproduces_dmax() {
        // minimize λ s.t. λρ - η ⪰ 0 with λ a free scalar block and the
        // slack Z = λρ - η imposed entrywise over a Hermitian basis.
        let mut rng = rng_for(17, "sdp-dmax", 0);
        for trial in 0..10 {
            let d = 2usize;
            let eta = random_density(&mut rng, d);
            let rho = random_density(&mut rng, d);
            let expected = match dmax(&eta, &rho).unwrap() {
                ExtendedReal::Finite(v) => 2f64.powf(v),
                ExtendedReal::Infinite => continue,
            };
            let mut p = SdpProblem::new();
            let lam = p.add_block("lambda", 1, false);
            let z = p.add_block("z", d, true);
            p.set_objective(lam, HermitianOperator::identity(1));
            for f in hermitian_basis(d) {
                let rhs = f.inner(&eta);
                let rho_coeff = f.inner(&rho);
                // tr(F Z) - λ tr(F ρ) = -tr(F η)
                p.add_equality(
                    vec![(z, f.clone()), (lam, HermitianOperator::identity(1).scale(-rho_coeff))],
                    -rhs,
                );
            }
            let sol = solve(&p, &tight()).unwrap();
            assert_eq!(sol.status, SdpStatus::Optimal, "trial {trial}");
            assert!(
                (sol.primal_objective - expected).abs() < 1e-6 * expected.max(1.0),
                "trial {trial}: sdp {} vs dmax {}",
                sol.primal_objective,
                expected
            );
        }
    }

    #[test]
    fn dependent_rows_are_dropped() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, true);
        p.set_objective(x, HermitianOperator::identity(2));
        p.add_equality(vec![(x, HermitianOperator::identity(2))], 1.0);
        p.add_equality(vec![(x, HermitianOperator::identity(2))], 1.0);
        p.add_equality(vec![(x, HermitianOperator::identity(2).scale(2.0))], 2.0);
        let sol = solve(&p, &tight()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
        assert_eq!(sol.dual_multipliers.len(), 3);
    }

    #[test]
    fn weak_duality_and_certificate_replay_on_random_instances() {
        let mut rng = rng_for(23, "sdp-random", 0);
        for trial in 0..8 {
            let d = 2usize;
            let mut p = SdpProblem::new();
            let x = p.add_block("x", d, true);
            let yb = p.add_block("y", d, true);
            let c1 = random_density(&mut rng, d);
            let c2 = random_density(&mut rng, d);
            p.set_objective(x, c1.clone());
            p.set_objective(yb, c2.clone());
            // Couple the blocks: tr(X) + tr(Y) = 1, tr(P X) = 0.3.
            p.add_equality(
                vec![(x, HermitianOperator::identity(d)), (yb, HermitianOperator::identity(d))],
                1.0,
            );
            p.add_equality(vec![(x, HermitianOperator::from_real_diagonal(&[1.0, 0.0]))], 0.3);
            let sol = solve(&p, &tight()).unwrap();
            assert_eq!(sol.status, SdpStatus::Optimal, "trial {trial}");
            assert!(sol.dual_objective <= sol.primal_objective + 1e-9, "trial {trial}");
            assert!(sol.primal_residual < 1e-8);
            for s in &sol.dual_slacks {
                assert!(s.min_eigenvalue() > -1e-7, "trial {trial}");
            }
            let pobj = c1.inner(&sol.primal_blocks[0]) + c2.inner(&sol.primal_blocks[1]);
            assert!((pobj - sol.primal_objective).abs() < 1e-10);
        }
    }

    #[test]
    fn triplet_dump_is_stable() {
        let mut p = SdpProblem::new();
        let x = p.add_block("x", 2, true);
        p.set_objective(x, HermitianOperator::identity(2));
        p.add_equality(vec![(x, HermitianOperator::from_real_diagonal(&[1.0, 0.0]))], 1.0);
        let mut buf = Vec::new();
        p.write_triplet_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sdp-triplets v1"));
        assert!(text.contains("block 0 x 2 psd"));
        assert!(text.contains("eq 0"));
    }
}
