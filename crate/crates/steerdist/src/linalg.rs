//! Dense complex Hermitian linear algebra primitives.
//!
//! Everything here works on unstructured `DMatrix<Complex<f64>>` at desk
//! scale (dimensions up to a few tens). Operators that are Hermitian by
//! contract are wrapped in [`HermitianOperator`], which validates and then
//! symmetrises its entries once at construction so downstream spectral code
//! can rely on exact symmetry.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Cpx = Complex<f64>;
pub type CMatrix = DMatrix<Cpx>;
pub type CVector = DVector<Cpx>;

/// Max allowed deviation from Hermiticity, `max |H[i,j] - conj(H[j,i])|`.
pub const TOL_HERM: f64 = 1e-10;

/// Relative eigenvalue cutoff for support/rank decisions.
pub const SUPPORT_REL_TOL: f64 = 1e-10;

/// Relative floor below which a "PSD" input is rejected as negative.
pub const PSD_FLOOR: f64 = 1e-9;

pub fn cpx(re: f64, im: f64) -> Cpx {
    Complex::new(re, im)
}

/// A validated complex Hermitian matrix.
///
/// Construction checks `H = H†` within [`TOL_HERM`] and stores the
/// symmetrised part `(H + H†)/2`, so stored entries are exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        let mut deviation = 0.0f64;
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                let d = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > TOL_HERM {
            return Err(Error::NonHermitianInput { deviation, tol: TOL_HERM });
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: sym })
    }

    /// Symmetrises without a tolerance check. For internal use where
    /// Hermiticity holds by construction (sums/conjugations of Hermitian
    /// operators) and rounding is the only source of asymmetry.
    pub fn symmetrize(mat: CMatrix) -> Self {
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Self { mat: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = cpx(v, 0.0);
        }
        Self { mat: m }
    }

    /// Rank-one projector `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn projector_onto(psi: &CVector) -> Self {
        let n2 = psi.norm_squared();
        Self::symmetrize((psi * psi.adjoint()).scale(1.0 / n2))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Real trace. The imaginary part is exactly zero after symmetrisation.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: self.mat.scale(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: &self.mat - &other.mat }
    }

    /// Real Hilbert-Schmidt inner product `tr(A B)`.
    pub fn inner(&self, other: &Self) -> f64 {
        (&self.mat * &other.mat).trace().re
    }

    /// `M H M†` for an arbitrary matrix `M`, re-symmetrised.
    pub fn conjugate_by(&self, m: &CMatrix) -> Self {
        Self::symmetrize(m * &self.mat * m.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        spectral_decompose(self)
            .map(|pairs| pairs.last().map(|p| p.0).unwrap_or(0.0))
            .unwrap_or(f64::NAN)
    }
}

/// An unconstrained complex matrix (filters, witness unitaries, Kraus ops).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralOperator {
    mat: CMatrix,
}

impl GeneralOperator {
    pub fn new(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim) }
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    /// `‖U†U - I‖_F`, the distance from being an isometry.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.cols();
        (self.mat.adjoint() * &self.mat - CMatrix::identity(d, d)).norm()
    }
}

/// Eigen-decomposition of a Hermitian operator, sorted by descending
/// eigenvalue. Eigenvectors are orthonormal columns.
pub fn spectral_decompose(h: &HermitianOperator) -> Result<Vec<(f64, CVector)>> {
    let eig = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let mut pairs: Vec<(f64, CVector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("real eigenvalues"));
    Ok(pairs)
}

fn psd_eigenpairs(h: &HermitianOperator) -> Result<Vec<(f64, CVector)>> {
    let pairs = spectral_decompose(h)?;
    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let scale = lambda_max.max(0.0).max(1e-300);
    let floor = -PSD_FLOOR * scale;
    if let Some(min) = pairs.last() {
        if min.0 < floor {
            return Err(Error::NegativeOperator { min_eigenvalue: min.0, floor });
        }
    }
    Ok(pairs)
}

fn rebuild(dim: usize, pairs: impl IntoIterator<Item = (f64, CVector)>) -> HermitianOperator {
    let mut m = CMatrix::zeros(dim, dim);
    for (val, vec) in pairs {
        m += (&vec * vec.adjoint()).scale(val);
    }
    HermitianOperator::symmetrize(m)
}

/// Projector onto the eigenspaces of `h` with eigenvalue above
/// `rel_tol * λ_max`. Rejects inputs with eigenvalues below the PSD floor.
pub fn support_projector(h: &HermitianOperator, rel_tol: f64) -> Result<HermitianOperator> {
    let pairs = psd_eigenpairs(h)?;
    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let cut = rel_tol * lambda_max.max(0.0);
    let kept = pairs.into_iter().filter(|p| p.0 > cut).map(|(_, v)| (1.0, v));
    Ok(rebuild(h.dim(), kept))
}

/// `rank` under the default support cutoff.
pub fn support_rank(h: &HermitianOperator) -> Result<usize> {
    let pairs = psd_eigenpairs(h)?;
    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let cut = SUPPORT_REL_TOL * lambda_max.max(0.0);
    Ok(pairs.iter().filter(|p| p.0 > cut).count())
}

/// `√H⁻¹` on the support of `H`, zero on the orthocomplement.
pub fn sqrt_pinv(h: &HermitianOperator) -> Result<HermitianOperator> {
    let pairs = psd_eigenpairs(h)?;
    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let cut = SUPPORT_REL_TOL * lambda_max.max(0.0);
    let mapped = pairs
        .into_iter()
        .map(|(v, vec)| (if v > cut { 1.0 / v.sqrt() } else { 0.0 }, vec));
    Ok(rebuild(h.dim(), mapped))
}

/// PSD square root `√H`.
pub fn matrix_sqrt(h: &HermitianOperator) -> Result<HermitianOperator> {
    let pairs = psd_eigenpairs(h)?;
    let mapped = pairs.into_iter().map(|(v, vec)| (v.max(0.0).sqrt(), vec));
    Ok(rebuild(h.dim(), mapped))
}

/// Polar decomposition `A = U P` with `P = √(A†A)` PSD and `U` unitary.
///
/// On the kernel of `P`, `U` is completed deterministically: the kernel
/// eigenvectors of `A†A` are paired, in order, with a Gram-Schmidt
/// completion of the range of `A` built from standard basis vectors.
pub fn polar_decompose(a: &GeneralOperator) -> Result<(GeneralOperator, HermitianOperator)> {
    if a.rows() != a.cols() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let d = a.rows();
    let gram = HermitianOperator::symmetrize(a.matrix().adjoint() * a.matrix());
    let pairs = spectral_decompose(&gram)?;
    let lambda_max = pairs.first().map(|p| p.0).unwrap_or(0.0);
    let cut = SUPPORT_REL_TOL * lambda_max.max(0.0);

    let p = rebuild(d, pairs.iter().map(|(v, vec)| (v.max(0.0).sqrt(), vec.clone())));

    // Columns of A on the support map to an orthonormal family spanning ran(A).
    let mut range_basis: Vec<CVector> = Vec::new();
    let mut kernel_basis: Vec<CVector> = Vec::new();
    for (val, vec) in &pairs {
        if *val > cut {
            let s = val.max(0.0).sqrt();
            range_basis.push((a.matrix() * vec).scale(1.0 / s));
        } else {
            kernel_basis.push(vec.clone());
        }
    }
    let mut u = CMatrix::zeros(d, d);
    for (uvec, vvec) in range_basis.iter().zip(pairs.iter().filter(|p| p.0 > cut)) {
        u += uvec * vvec.1.adjoint();
    }
    if !kernel_basis.is_empty() {
        let completion = orthonormal_completion(&range_basis, d);
        assert_eq!(completion.len(), kernel_basis.len());
        for (w, k) in completion.iter().zip(kernel_basis.iter()) {
            u += w * k.adjoint();
        }
    }
    Ok((GeneralOperator::new(u), p))
}

/// Extends an orthonormal family to a full basis by Gram-Schmidt over the
/// standard basis, taken in index order. Returns only the added vectors.
fn orthonormal_completion(family: &[CVector], dim: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = family.to_vec();
    let mut added = Vec::new();
    for j in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = CVector::zeros(dim);
        v[j] = cpx(1.0, 0.0);
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b.scale_complex(overlap);
        }
        let n = v.norm();
        if n > 1e-8 {
            let v = v.scale(1.0 / n);
            basis.push(v.clone());
            added.push(v);
        }
    }
    added
}

trait ScaleComplex {
    fn scale_complex(&self, s: Cpx) -> Self;
}

impl ScaleComplex for CVector {
    fn scale_complex(&self, s: Cpx) -> Self {
        self.map(|x| x * s)
    }
}

/// Orthonormal basis (under `tr(AB)`) of the Hermitian matrices commuting
/// with every operator in `ops`. Always contains the identity direction.
///
/// Built by vectorising `M ↦ i[M, B]` over the Hermitian basis and taking
/// the SVD nullspace of the stacked constraint matrix.
pub fn commutant_basis(ops: &[&HermitianOperator], dim: usize) -> Vec<HermitianOperator> {
    let basis = hermitian_basis(dim);
    let n = basis.len();
    let mut rows: Vec<f64> = Vec::with_capacity(ops.len() * n * n);
    let m_rows = ops.len() * n;
    for b in ops {
        for f_row in &basis {
            for f_j in &basis {
                let comm = f_j.matrix() * b.matrix() - b.matrix() * f_j.matrix();
                let herm_comm = HermitianOperator::symmetrize(comm.map(|z| z * cpx(0.0, 1.0)));
                rows.push(f_row.inner(&herm_comm));
            }
        }
    }
    if ops.is_empty() {
        return basis;
    }
    let k = DMatrix::from_row_slice(m_rows, n, &rows);
    let svd = k.svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let v_t = svd.v_t.expect("right singular vectors");
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= 1e-10 * smax.max(1.0) {
            let coeffs = v_t.row(i);
            let mut m = CMatrix::zeros(dim, dim);
            for (j, f) in basis.iter().enumerate() {
                m += f.matrix().scale(coeffs[j]);
            }
            out.push(HermitianOperator::symmetrize(m));
        }
    }
    out
}

/// Orthonormal real basis of Hermitian `dim x dim` matrices: diagonal
/// units, symmetric pairs, and antisymmetric (imaginary) pairs.
pub fn hermitian_basis(dim: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(dim * dim);
    let s = 1.0 / 2f64.sqrt();
    for j in 0..dim {
        let mut m = CMatrix::zeros(dim, dim);
        m[(j, j)] = cpx(1.0, 0.0);
        out.push(HermitianOperator::symmetrize(m));
    }
    for j in 0..dim {
        for i in (j + 1)..dim {
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = cpx(s, 0.0);
            m[(j, i)] = cpx(s, 0.0);
            out.push(HermitianOperator::symmetrize(m));
            let mut m = CMatrix::zeros(dim, dim);
            m[(i, j)] = cpx(0.0, s);
            m[(j, i)] = cpx(0.0, -s);
            out.push(HermitianOperator::symmetrize(m));
        }
    }
    out
}

/// `exp(iH)` for Hermitian `H`.
pub fn unitary_from_hermitian_exponent(h: &HermitianOperator) -> CMatrix {
    let pairs = spectral_decompose(h).expect("hermitian exponent");
    let d = h.dim();
    let mut out = CMatrix::zeros(d, d);
    for (lam, v) in pairs {
        let phase = cpx(0.0, lam).exp();
        out += (&v * v.adjoint()).map(|z| z * phase);
    }
    out
}

/// Isometry onto the support of a projector: a `d x r` matrix whose columns
/// span `ran(Π)` orthonormally. Compress with `V† X V`, lift with `V X V†`.
pub fn support_isometry(projector: &HermitianOperator) -> Result<CMatrix> {
    let pairs = spectral_decompose(projector)?;
    let cols: Vec<CVector> =
        pairs.into_iter().filter(|p| p.0 > 0.5).map(|(_, v)| v).collect();
    let d = projector.dim();
    let r = cols.len();
    let mut v = CMatrix::zeros(d, r);
    for (j, c) in cols.iter().enumerate() {
        v.set_column(j, c);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
        let m = CMatrix::from_fn(d, d, |_, _| cpx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        HermitianOperator::symmetrize(m)
    }

    fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
        let g = CMatrix::from_fn(d, d, |_, _| cpx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        HermitianOperator::symmetrize(&g * g.adjoint())
    }

    #[test]
    fn spectral_identity_and_diag() {
        let id = HermitianOperator::identity(2);
        let pairs = spectral_decompose(&id).unwrap();
        assert!((pairs[0].0 - 1.0).abs() < 1e-12 && (pairs[1].0 - 1.0).abs() < 1e-12);

        let d = HermitianOperator::from_real_diagonal(&[3.0, 1.0]);
        let pairs = spectral_decompose(&d).unwrap();
        assert!((pairs[0].0 - 3.0).abs() < 1e-12);
        assert!((pairs[1].0 - 1.0).abs() < 1e-12);
        assert!((pairs[0].1[0].norm() - 1.0).abs() < 1e-9);
        assert!((pairs[1].1[1].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2usize, 3, 5, 8] {
            let h = random_hermitian(&mut rng, d);
            let pairs = spectral_decompose(&h).unwrap();
            let rebuilt = rebuild(d, pairs.clone());
            let resid = (h.matrix() - rebuilt.matrix()).norm();
            assert!(resid <= 1e-9 * h.frobenius_norm().max(1.0), "residual {resid}");
            for i in 0..d {
                for j in 0..d {
                    let dot = pairs[i].1.dotc(&pairs[j].1);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot.norm() - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = cpx(1.0, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn support_projector_basic() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let p = support_projector(&h, SUPPORT_REL_TOL).unwrap();
        assert!((p.matrix() - h.matrix()).norm() < 1e-12);

        let h = HermitianOperator::from_real_diagonal(&[1.0, 1e-15]);
        let p = support_projector(&h, 1e-12).unwrap();
        let expect = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        assert!((p.matrix() - expect.matrix()).norm() < 1e-12);
    }

    #[test]
    fn support_projector_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 4] {
            let psi = CVector::from_fn(d, |_, _| cpx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let proj = HermitianOperator::projector_onto(&psi);
            let scaled = proj.scale(0.37);
            let p = support_projector(&scaled, SUPPORT_REL_TOL).unwrap();
            assert!((p.matrix() - proj.matrix()).norm() < 1e-9);
            assert_eq!(support_rank(&scaled).unwrap(), 1);
        }
    }

    #[test]
    fn support_projector_negative_rejected() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(support_projector(&h, 1e-10), Err(Error::NegativeOperator { .. })));
    }

    #[test]
    fn sqrt_pinv_cases() {
        let id = HermitianOperator::identity(3);
        assert!((sqrt_pinv(&id).unwrap().matrix() - id.matrix()).norm() < 1e-12);

        let h = HermitianOperator::from_real_diagonal(&[4.0, 0.0]);
        let expect = HermitianOperator::from_real_diagonal(&[0.5, 0.0]);
        assert!((sqrt_pinv(&h).unwrap().matrix() - expect.matrix()).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3, 6] {
            let rho = random_psd(&mut rng, d);
            let s = sqrt_pinv(&rho).unwrap();
            let pi = support_projector(&rho, SUPPORT_REL_TOL).unwrap();
            let lhs = s.matrix() * rho.matrix() * s.matrix();
            assert!((lhs - pi.matrix()).norm() <= 1e-8);
        }
    }

    #[test]
    fn matrix_sqrt_cases() {
        let h = HermitianOperator::from_real_diagonal(&[4.0, 9.0]);
        let expect = HermitianOperator::from_real_diagonal(&[2.0, 3.0]);
        assert!((matrix_sqrt(&h).unwrap().matrix() - expect.matrix()).norm() < 1e-12);

        let half = HermitianOperator::identity(4).scale(0.5);
        let s = matrix_sqrt(&half).unwrap();
        let expect = HermitianOperator::identity(4).scale(1.0 / 2.0f64.sqrt());
        assert!((s.matrix() - expect.matrix()).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2usize, 5] {
            let h = random_psd(&mut rng, d);
            let s = matrix_sqrt(&h).unwrap();
            let resid = (s.matrix() * s.matrix() - h.matrix()).norm();
            assert!(resid <= 1e-9 * h.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn polar_cases() {
        // A unitary decomposes as (A, I).
        let theta = 0.7f64;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                cpx(theta.cos(), 0.0),
                cpx(-theta.sin(), 0.0),
                cpx(theta.sin(), 0.0),
                cpx(theta.cos(), 0.0),
            ],
        );
        let (uu, pp) = polar_decompose(&GeneralOperator::new(u.clone())).unwrap();
        assert!((uu.matrix() - &u).norm() < 1e-9);
        assert!((pp.matrix() - CMatrix::identity(2, 2)).norm() < 1e-9);

        let a = GeneralOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[cpx(2.0, 0.0), cpx(0.0, 0.0), cpx(0.0, 0.0), cpx(3.0, 0.0)],
        ));
        let (uu, pp) = polar_decompose(&a).unwrap();
        assert!((uu.matrix() - CMatrix::identity(2, 2)).norm() < 1e-9);
        assert!((pp.matrix() - a.matrix()).norm() < 1e-9);
    }

    #[test]
    fn polar_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2usize, 3, 5] {
            for _ in 0..5 {
                let a = CMatrix::from_fn(d, d, |_, _| {
                    cpx(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                let a = GeneralOperator::new(a);
                let (u, p) = polar_decompose(&a).unwrap();
                assert!(u.unitarity_defect() < 1e-9);
                let resid = (u.matrix() * p.matrix() - a.matrix()).norm();
                assert!(resid <= 1e-9 * a.matrix().norm().max(1.0));
                assert!(p.min_eigenvalue() > -1e-9 * p.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn polar_singular_is_deterministic_and_valid() {
        // Rank-deficient input: kernel completion must still give a unitary.
        let a = GeneralOperator::new(CMatrix::from_row_slice(
            3,
            3,
            &[
                cpx(1.0, 0.0),
                cpx(0.0, 0.0),
                cpx(0.0, 0.0),
                cpx(0.0, 0.0),
                cpx(0.0, 0.5),
                cpx(0.0, 0.0),
                cpx(0.0, 0.0),
                cpx(0.0, 0.0),
                cpx(0.0, 0.0),
            ],
        ));
        let (u1, p1) = polar_decompose(&a).unwrap();
        let (u2, _) = polar_decompose(&a).unwrap();
        assert!((u1.matrix() - u2.matrix()).norm() == 0.0);
        assert!(u1.unitarity_defect() < 1e-9);
        assert!((u1.matrix() * p1.matrix() - a.matrix()).norm() < 1e-9);
    }

    #[test]
    fn sqrt_pinv_times_sqrt_is_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2usize, 4] {
            let h = random_psd(&mut rng, d);
            let lhs = sqrt_pinv(&h).unwrap().matrix() * matrix_sqrt(&h).unwrap().matrix();
            let pi = support_projector(&h, SUPPORT_REL_TOL).unwrap();
            assert!((lhs - pi.matrix()).norm() < 1e-8);
        }
    }

    #[test]
    fn support_isometry_roundtrip() {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 2.0, 1.0]);
        let pi = support_projector(&h, SUPPORT_REL_TOL).unwrap();
        let v = support_isometry(&pi).unwrap();
        assert_eq!(v.ncols(), 2);
        assert!((v.adjoint() * &v - CMatrix::identity(2, 2)).norm() < 1e-10);
        assert!((&v * v.adjoint() - pi.matrix()).norm() < 1e-9);
    }
}
