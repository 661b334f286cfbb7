//! Homogeneous self-dual interior-point method for dense block-diagonal
//! SDPs over real symmetric PSD cones.
//!
//! Standard form: minimise `cᵀx` subject to `A x = b`, `x ∈ K`, where `K`
//! is a product of PSD cones in svec coordinates. The homogeneous embedding
//! carries the extra scalars `(τ, κ)`; `τ → const > 0` yields an optimal
//! pair, `κ` dominating certifies primal or dual infeasibility. Directions
//! use Nesterov-Todd scaling with a Mehrotra predictor-corrector; the
//! Newton system is reduced to the Schur complement `A W A^T`, assembled in
//! Gram form and solved by Cholesky. Everything is deterministic.

use nalgebra::{Cholesky, DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct ConeSolution {
    pub status: ConeStatus,
    /// Unscaled primal point `x/τ` (or the unbounded ray for DualInfeasible).
    pub x: DVector<f64>,
    /// Unscaled dual point `y/τ` (or the infeasibility ray for PrimalInfeasible).
    pub y: DVector<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub s: DVector<f64>,
    pub iterations: usize,
}

pub struct ConeOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
}

/// Dense block-cone problem in svec coordinates.
pub struct ConeProblem {
    pub block_dims: Vec<usize>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

struct BlockLayout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    n: usize,
}

impl BlockLayout {
    fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut n = 0;
        for &d in dims {
            offsets.push(n);
            n += d * (d + 1) / 2;
        }
        Self { dims: dims.to_vec(), offsets, n }
    }
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// svec of the lower triangle, column-major, off-diagonals scaled by √2, so
/// that `svec(X)ᵀ svec(Y) = tr(XY)`.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    let mut out = DVector::zeros(d * (d + 1) / 2);
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            out[k] = if i == j { m[(i, j)] } else { SQRT2 * m[(i, j)] };
            k += 1;
        }
    }
    out
}

pub fn unsvec(v: &[f64], d: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            if i == j {
                out[(i, j)] = v[k];
            } else {
                out[(i, j)] = v[k] / SQRT2;
                out[(j, i)] = v[k] / SQRT2;
            }
            k += 1;
        }
    }
    out
}

fn block_slices<'a>(layout: &BlockLayout, v: &'a DVector<f64>) -> Vec<&'a [f64]> {
    let mut out = Vec::with_capacity(layout.dims.len());
    for (k, &d) in layout.dims.iter().enumerate() {
        let len = d * (d + 1) / 2;
        out.push(&v.as_slice()[layout.offsets[k]..layout.offsets[k] + len]);
    }
    out
}

/// Symmetric eigenvalues of a (small) dense matrix.
fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    (eig.eigenvalues, eig.eigenvectors)
}

/// Factor `X = F Fᵀ` with Cholesky, falling back to the spectral square
/// root when the iterate has drifted to the cone boundary.
fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return ch.l();
    }
    let (vals, vecs) = sym_eigen(m);
    let d = m.nrows();
    let mut f = DMatrix::zeros(d, d);
    for j in 0..d {
        let s = vals[j].max(1e-300).sqrt();
        for i in 0..d {
            f[(i, j)] = vecs[(i, j)] * s;
        }
    }
    f
}

struct NtScaling {
    /// Per block: `R`, `R⁻¹`, and the scaled-point spectrum `λ`.
    r: Vec<DMatrix<f64>>,
    r_inv: Vec<DMatrix<f64>>,
    lambda: Vec<DVector<f64>>,
}

fn nt_scaling(layout: &BlockLayout, x: &DVector<f64>, s: &DVector<f64>) -> NtScaling {
    let xs = block_slices(layout, x);
    let ss = block_slices(layout, s);
    let mut r = Vec::new();
    let mut r_inv = Vec::new();
    let mut lambda = Vec::new();
    for (k, &d) in layout.dims.iter().enumerate() {
        let xm = unsvec(xs[k], d);
        let sm = unsvec(ss[k], d);
        let lx = psd_factor(&xm);
        let ls = psd_factor(&sm);
        let m = ls.transpose() * &lx;
        let svd = m.svd(true, true);
        let u = svd.u.as_ref().expect("svd u");
        let vt = svd.v_t.as_ref().expect("svd vt");
        let sing = &svd.singular_values;
        let mut sqrt_inv = DMatrix::zeros(d, d);
        for i in 0..d {
            sqrt_inv[(i, i)] = 1.0 / sing[i].max(1e-150).sqrt();
        }
        // R = L_x V Σ^{-1/2}; R⁻¹ = Σ^{-1/2} Uᵀ L_sᵀ.
        let rk = &lx * vt.transpose() * &sqrt_inv;
        let rk_inv = &sqrt_inv * u.transpose() * ls.transpose();
        r.push(rk);
        r_inv.push(rk_inv);
        lambda.push(sing.clone());
    }
    NtScaling { r, r_inv, lambda }
}

impl NtScaling {
    /// `W(z) = svec_blocks( (R Rᵀ) Z (R Rᵀ) )`, the inverse of the NT
    /// quadratic representation used in the reduced Newton system.
    fn apply_w(&self, layout: &BlockLayout, z: &DVector<f64>) -> DVector<f64> {
        let zs = block_slices(layout, z);
        let mut out = DVector::zeros(layout.n);
        for (k, &d) in layout.dims.iter().enumerate() {
            let q = &self.r[k] * self.r[k].transpose();
            let zm = unsvec(zs[k], d);
            let res = &q * zm * &q;
            out.rows_mut(layout.offsets[k], d * (d + 1) / 2)
                .copy_from(&svec(&res));
        }
        out
    }

    /// Rows scaled as `Rᵀ A_k R` for the Gram assembly of `A W Aᵀ`.
    fn scale_row(&self, layout: &BlockLayout, row: &DVector<f64>) -> DVector<f64> {
        let rs = block_slices(layout, row);
        let mut out = DVector::zeros(layout.n);
        for (k, &d) in layout.dims.iter().enumerate() {
            let rm = unsvec(rs[k], d);
            let res = self.r[k].transpose() * rm * &self.r[k];
            out.rows_mut(layout.offsets[k], d * (d + 1) / 2)
                .copy_from(&svec(&res));
        }
        out
    }
}

fn max_step_block(xm: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
    let f = psd_factor(xm);
    let fi = f
        .clone()
        .try_inverse()
        .unwrap_or_else(|| f.clone().pseudo_inverse(1e-12).expect("pinv"));
    let w = &fi * dm * fi.transpose();
    let sym = (&w + w.transpose()).scale(0.5);
    let (vals, _) = sym_eigen(&sym);
    let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if vmin >= -1e-14 {
        f64::INFINITY
    } else {
        -1.0 / vmin
    }
}

fn max_step(layout: &BlockLayout, v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let vs = block_slices(layout, v);
    let ds = block_slices(layout, dv);
    let mut alpha = f64::INFINITY;
    for (k, &d) in layout.dims.iter().enumerate() {
        alpha = alpha.min(max_step_block(&unsvec(vs[k], d), &unsvec(ds[k], d)));
    }
    alpha
}

#[allow(clippy::too_many_arguments)]
struct NewtonContext<'a> {
    layout: &'a BlockLayout,
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
    c: &'a DVector<f64>,
    scaling: &'a NtScaling,
    chol: &'a Cholesky<f64, nalgebra::Dyn>,
    gram: &'a DMatrix<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Solves the reduced HSDE Newton system for given right-hand sides.
/// `d_comp` is the per-block complementarity target in scaled-space matrix
/// form, `d_gap` the target for the (τ, κ) pair.
fn newton_solve(
    ctx: &NewtonContext<'_>,
    rp_t: &DVector<f64>,
    rd_t: &DVector<f64>,
    rg_t: f64,
    d_comp: &[DMatrix<f64>],
    d_gap: f64,
) -> Direction {
    let layout = ctx.layout;
    let scaling = ctx.scaling;
    // e_D = svec(R⁻ᵀ (Λ ∘⁻¹ D) R⁻¹) per block.
    let mut e_d = DVector::zeros(layout.n);
    for (k, &d) in layout.dims.iter().enumerate() {
        let lam = &scaling.lambda[k];
        let mut t = d_comp[k].clone();
        for i in 0..d {
            for j in 0..d {
                t[(i, j)] *= 2.0 / (lam[i] + lam[j]);
            }
        }
        let res = scaling.r_inv[k].transpose() * t * &scaling.r_inv[k];
        e_d.rows_mut(layout.offsets[k], d * (d + 1) / 2).copy_from(&svec(&res));
    }

    let w0 = scaling.apply_w(layout, &(&e_d - rd_t));
    let wc = scaling.apply_w(layout, ctx.c);
    let rhs_u = rp_t - ctx.a * &w0;
    let rhs_v = ctx.a * &wc + ctx.b;
    let u = refined_solve(ctx.chol, ctx.gram, &rhs_u);
    let v = refined_solve(ctx.chol, ctx.gram, &rhs_v);

    let dx_u = &w0 + scaling.apply_w(layout, &(ctx.a.transpose() * &u));
    let dx_v = scaling.apply_w(layout, &(ctx.a.transpose() * &v)) - &wc;

    let den = ctx.c.dot(&dx_v) - ctx.b.dot(&v) - ctx.kappa / ctx.tau;
    let num = rg_t - ctx.c.dot(&dx_u) + ctx.b.dot(&u) - d_gap / ctx.tau;
    let dtau = if den.abs() > 1e-300 { num / den } else { 0.0 };

    let dy = &u + &v * dtau;
    let dx = &dx_u + &dx_v * dtau;
    // Recover ds from dual feasibility rather than from the complementarity
    // equation: solve error then perturbs only the centering, and the dual
    // residual keeps contracting at high accuracy.
    let ds = rd_t - ctx.a.transpose() * &dy + ctx.c * dtau;
    let dkappa = (d_gap - ctx.kappa * dtau) / ctx.tau;
    Direction { dx, dy, ds, dtau, dkappa }
}

/// Cholesky solve with iterative refinement against the unfactored matrix.
fn refined_solve(
    chol: &Cholesky<f64, nalgebra::Dyn>,
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> DVector<f64> {
    let mut sol = chol.solve(rhs);
    for _ in 0..2 {
        let resid = rhs - m * &sol;
        if resid.norm() <= 1e-16 * rhs.norm().max(1.0) {
            break;
        }
        sol += chol.solve(&resid);
    }
    sol
}

pub fn solve_cone(problem: &ConeProblem, opts: &ConeOptions) -> ConeSolution {
    let layout = BlockLayout::new(&problem.block_dims);
    let n = layout.n;
    let m = problem.b.len();
    assert_eq!(problem.a.nrows(), m);
    assert_eq!(problem.a.ncols(), n);
    assert_eq!(problem.c.len(), n);

    let nu: f64 = layout.dims.iter().map(|&d| d as f64).sum();

    // Identity start in every cone.
    let mut x = DVector::zeros(n);
    for (k, &d) in layout.dims.iter().enumerate() {
        x.rows_mut(layout.offsets[k], d * (d + 1) / 2)
            .copy_from(&svec(&DMatrix::identity(d, d)));
    }
    let mut s = x.clone();
    let mut y = DVector::zeros(m);
    let mut tau = 1.0f64;
    let mut kappa = 1.0f64;

    let norm_b = problem.b.norm().max(1.0);
    let norm_c = problem.c.norm().max(1.0);

    let mut iterations = 0;
    let mut stalls = 0;
    let mut best: Option<(f64, DVector<f64>, DVector<f64>, DVector<f64>)> = None;
    for iter in 0..opts.max_iters {
        iterations = iter;
        // Residuals of the homogeneous model.
        let rp = &problem.a * &x - &problem.b * tau;
        let rd = problem.a.transpose() * &y + &s - &problem.c * tau;
        let rg = problem.c.dot(&x) - problem.b.dot(&y) + kappa;

        // Termination on the unscaled candidate.
        let pres = (&problem.a * &x / tau - &problem.b).norm() / norm_b;
        let dres = (problem.a.transpose() * &y / tau + &s / tau - &problem.c).norm() / norm_c;
        let pobj = problem.c.dot(&x) / tau;
        let dobj = problem.b.dot(&y) / tau;
        let compl = x.dot(&s) / (tau * tau);
        let scale = pobj.abs().max(dobj.abs()).max(1.0);
        if std::env::var_os("STEERDIST_SDP_TRACE").is_some() {
            eprintln!(
                "iter {iter}: pres {pres:.2e} dres {dres:.2e} compl {compl:.2e} tau {tau:.2e} kappa {kappa:.2e} pobj {pobj:.6} dobj {dobj:.6}"
            );
        }
        // Feasibility is judged relative to the solution magnitude, like
        // the gap: large optimal values legitimately carry proportionally
        // larger floating-point residual floors. Either gap measure
        // (complementarity or objective difference) may certify optimality
        // once both residuals hold.
        let gap_meas = compl.min((pobj - dobj).abs());
        let score = (pres / scale).max(dres / scale).max(gap_meas / scale);
        if best.as_ref().map(|(bs, ..)| score < *bs).unwrap_or(true) {
            best = Some((score, &x / tau, &y / tau, &s / tau));
        }
        if pres <= opts.feas_tol * scale
            && dres <= opts.feas_tol * scale
            && gap_meas <= opts.gap_tol * scale
        {
            return ConeSolution {
                status: ConeStatus::Optimal,
                x: &x / tau,
                y: &y / tau,
                s: &s / tau,
                iterations,
            };
        }

        // Infeasibility certificates.
        let by = problem.b.dot(&y);
        if by > 1e-12 {
            let dual_res = (problem.a.transpose() * &y + &s).norm();
            if dual_res / by <= opts.feas_tol * norm_c {
                return ConeSolution {
                    status: ConeStatus::PrimalInfeasible,
                    x: &x / tau.max(1e-300),
                    y: &y / by,
                    s: &s / by,
                    iterations,
                };
            }
        }
        let cx = problem.c.dot(&x);
        if cx < -1e-12 {
            let primal_res = (&problem.a * &x).norm();
            if primal_res / (-cx) <= opts.feas_tol * norm_b {
                return ConeSolution {
                    status: ConeStatus::DualInfeasible,
                    x: &x / (-cx),
                    y: &y / tau.max(1e-300),
                    s: &s / tau.max(1e-300),
                    iterations,
                };
            }
        }

        let mu = (x.dot(&s) + tau * kappa) / (nu + 1.0);
        if mu < 1e-300 {
            break;
        }

        let scaling = nt_scaling(&layout, &x, &s);
        // Schur complement in Gram form: rows Rᵀ A_k R stay symmetric, so
        // M = Ã Ãᵀ is positive semidefinite by construction.
        let mut scaled_rows = DMatrix::zeros(m, n);
        for k in 0..m {
            let row = DVector::from_column_slice(problem.a.row(k).transpose().as_slice());
            scaled_rows.row_mut(k).copy_from(&scaling.scale_row(&layout, &row).transpose());
        }
        let gram_exact = &scaled_rows * scaled_rows.transpose();
        let mut gram = gram_exact.clone();
        let jitter_base = gram.trace().max(1e-10) / m.max(1) as f64;
        let mut chol = Cholesky::new(gram.clone());
        let mut jitter = 1e-14 * jitter_base;
        while chol.is_none() && jitter < 1e-4 * jitter_base {
            for i in 0..m {
                gram[(i, i)] += jitter;
            }
            chol = Cholesky::new(gram.clone());
            jitter *= 100.0;
        }
        let chol = match chol {
            Some(c) => c,
            None => break,
        };

        let ctx = NewtonContext {
            layout: &layout,
            a: &problem.a,
            b: &problem.b,
            c: &problem.c,
            scaling: &scaling,
            chol: &chol,
            gram: &gram_exact,
            tau,
            kappa,
        };

        // Predictor: full residual reduction, no centering.
        let d_aff: Vec<DMatrix<f64>> = layout
            .dims
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let mut t = DMatrix::zeros(d, d);
                for i in 0..d {
                    t[(i, i)] = -scaling.lambda[k][i] * scaling.lambda[k][i];
                }
                t
            })
            .collect();
        let aff = newton_solve(&ctx, &(-&rp), &(-&rd), -rg, &d_aff, -tau * kappa);

        let mut alpha_aff = max_step(&layout, &x, &aff.dx).min(max_step(&layout, &s, &aff.ds));
        if aff.dtau < 0.0 {
            alpha_aff = alpha_aff.min(-tau / aff.dtau);
        }
        if aff.dkappa < 0.0 {
            alpha_aff = alpha_aff.min(-kappa / aff.dkappa);
        }
        alpha_aff = alpha_aff.min(1.0);

        let gap_now = x.dot(&s) + tau * kappa;
        let gap_aff = (&x + &aff.dx * alpha_aff).dot(&(&s + &aff.ds * alpha_aff))
            + (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa);
        let sigma = (gap_aff / gap_now).clamp(0.0, 1.0).powi(3);

        // Corrector with Mehrotra second-order terms in scaled space.
        let eta = 1.0 - sigma;
        let d_comb: Vec<DMatrix<f64>> = layout
            .dims
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let off = layout.offsets[k];
                let len = d * (d + 1) / 2;
                let dxm = unsvec(&aff.dx.as_slice()[off..off + len], d);
                let dsm = unsvec(&aff.ds.as_slice()[off..off + len], d);
                let dx_bar = &scaling.r_inv[k] * dxm * scaling.r_inv[k].transpose();
                let ds_bar = scaling.r[k].transpose() * dsm * &scaling.r[k];
                let corr = (&dx_bar * &ds_bar + &ds_bar * &dx_bar).scale(0.5);
                let mut t = DMatrix::zeros(d, d);
                for i in 0..d {
                    t[(i, i)] = sigma * mu - scaling.lambda[k][i] * scaling.lambda[k][i];
                }
                t - corr
            })
            .collect();
        let d_gap = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
        let dir = newton_solve(
            &ctx,
            &(-&rp * eta),
            &(-&rd * eta),
            -rg * eta,
            &d_comb,
            d_gap,
        );

        let mut alpha = max_step(&layout, &x, &dir.dx).min(max_step(&layout, &s, &dir.ds));
        if dir.dtau < 0.0 {
            alpha = alpha.min(-tau / dir.dtau);
        }
        if dir.dkappa < 0.0 {
            alpha = alpha.min(-kappa / dir.dkappa);
        }
        alpha = (0.99 * alpha).min(1.0);
        if alpha < 1e-9 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }

        x += &dir.dx * alpha;
        y += &dir.dy * alpha;
        s += &dir.ds * alpha;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }

    // Ran out of iterations or stalled: fall back to the best iterate seen
    // and re-test it against the tolerances.
    let (score, bx, by, bs) = best.unwrap_or((
        f64::INFINITY,
        &x / tau.max(1e-300),
        &y / tau.max(1e-300),
        &s / tau.max(1e-300),
    ));
    let status = if score
        <= opts
            .feas_tol
            .max(opts.gap_tol)
    {
        ConeStatus::Optimal
    } else {
        ConeStatus::MaxIterations
    };
    ConeSolution { status, x: bx, y: by, s: bs, iterations }
}
