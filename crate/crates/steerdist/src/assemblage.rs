//! State and measurement assemblages, their validation, generation from
//! bipartite states, and the steering-equivalent observable (SEO).
//!
//! Indexing convention throughout: elements are stored `[x][a]`, zero-based.
//! Families with input-dependent outcome counts are padded with zero
//! operators up to a rectangular `n_inputs x n_outputs` table.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    cpx, matrix_sqrt, spectral_decompose, sqrt_pinv, support_projector, support_rank, CMatrix,
    GeneralOperator, HermitianOperator, SUPPORT_REL_TOL,
};

/// Entrywise tolerance for assemblage invariants (PSD floor, no-signalling,
/// normalisation).
pub const TOL_ASSEMBLAGE: f64 = 1e-9;

/// Hard cap on x-dependence of the reduced state in [`reduced_state`].
pub const TOL_NO_SIGNALLING: f64 = 1e-7;

/// A family of unnormalised positive operators `σ_{a|x}` with an
/// x-independent sum `ρ_σ` of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StateAssemblage {
    dim: usize,
    n_inputs: usize,
    n_outputs: usize,
    elements: Vec<Vec<HermitianOperator>>,
}

/// A family of POVMs, one per input, summing to a common carrier projector.
///
/// For steering-equivalent observables the carrier is `supp(ρ_σ)`, which is
/// generally a proper subspace; the carrier is stored explicitly so that
/// rank decisions are made once.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAssemblage {
    dim: usize,
    n_inputs: usize,
    n_outputs: usize,
    elements: Vec<Vec<HermitianOperator>>,
    carrier: HermitianOperator,
}

/// A bipartite density operator on `A ⊗ B` (A indexed first).
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    mat: HermitianOperator,
}

/// One invariant violation found by a validation pass.
#[derive(Debug, Clone)]
pub struct Violation {
    pub what: String,
    pub magnitude: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (deviation {:.3e})", self.what, self.magnitude)
    }
}

impl StateAssemblage {
    /// Builds and validates. `elements[x][a]` must be PSD within the floor,
    /// sums over `a` must agree across `x`, and the reduced state must have
    /// unit trace.
    pub fn new(elements: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let asm = Self::new_unchecked(elements)?;
        let report = asm.validate();
        if let Some(v) = report.first() {
            return Err(Error::Document {
                context: format!("invalid state assemblage: {v}"),
            });
        }
        Ok(asm)
    }

    /// Builds after shape checks only. Used by validation-reporting paths
    /// and by tests that construct deliberately broken assemblages.
    pub fn new_unchecked(elements: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let n_inputs = elements.len();
        if n_inputs == 0 {
            return Err(Error::DimensionMismatch { context: "assemblage has no inputs".into() });
        }
        let n_outputs = elements[0].len();
        if n_outputs == 0 {
            return Err(Error::DimensionMismatch { context: "assemblage has no outcomes".into() });
        }
        let dim = elements[0][0].dim();
        for (x, row) in elements.iter().enumerate() {
            if row.len() != n_outputs {
                return Err(Error::DimensionMismatch {
                    context: format!("input {x} has {} outcomes, expected {n_outputs}", row.len()),
                });
            }
            for (a, e) in row.iter().enumerate() {
                if e.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        context: format!("element ({a}|{x}) has dim {}, expected {dim}", e.dim()),
                    });
                }
            }
        }
        Ok(Self { dim, n_inputs, n_outputs, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn element(&self, x: usize, a: usize) -> &HermitianOperator {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &Vec<Vec<HermitianOperator>> {
        &self.elements
    }

    /// Lists every invariant violation with its index and magnitude. Empty
    /// iff the assemblage is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        for (x, row) in self.elements.iter().enumerate() {
            for (a, e) in row.iter().enumerate() {
                let min = e.min_eigenvalue();
                let scale = e.frobenius_norm().max(1.0);
                if min < -TOL_ASSEMBLAGE * scale {
                    report.push(Violation {
                        what: format!("element ({a}|{x}) is not positive semidefinite"),
                        magnitude: -min,
                    });
                }
            }
        }
        let sums: Vec<HermitianOperator> = (0..self.n_inputs)
            .map(|x| {
                let mut s = HermitianOperator::zeros(self.dim);
                for a in 0..self.n_outputs {
                    s = s.add(&self.elements[x][a]);
                }
                s
            })
            .collect();
        for x in 1..self.n_inputs {
            let dev = (sums[x].matrix() - sums[0].matrix()).norm();
            if dev > TOL_ASSEMBLAGE {
                report.push(Violation {
                    what: format!("no-signalling: Σ_a σ(a|{x}) differs from Σ_a σ(a|0)"),
                    magnitude: dev,
                });
            }
        }
        let tr = sums[0].trace();
        if (tr - 1.0).abs() > TOL_ASSEMBLAGE {
            report.push(Violation {
                what: "reduced state trace differs from 1".into(),
                magnitude: (tr - 1.0).abs(),
            });
        }
        report
    }

    /// `ρ_σ`, averaged over inputs to suppress rounding noise. Errors if the
    /// x-dependence exceeds [`TOL_NO_SIGNALLING`].
    pub fn reduced_state(&self) -> Result<HermitianOperator> {
        let sums: Vec<HermitianOperator> = (0..self.n_inputs)
            .map(|x| {
                let mut s = HermitianOperator::zeros(self.dim);
                for a in 0..self.n_outputs {
                    s = s.add(&self.elements[x][a]);
                }
                s
            })
            .collect();
        let mut worst = 0.0f64;
        for x in 1..self.n_inputs {
            worst = worst.max((sums[x].matrix() - sums[0].matrix()).norm());
        }
        if worst > TOL_NO_SIGNALLING {
            return Err(Error::NoSignallingViolation { deviation: worst });
        }
        let mut avg = HermitianOperator::zeros(self.dim);
        for s in &sums {
            avg = avg.add(s);
        }
        Ok(avg.scale(1.0 / self.n_inputs as f64))
    }
}

impl MeasurementAssemblage {
    /// Builds with an explicit carrier and validates effect positivity and
    /// per-input completeness against the carrier.
    pub fn new(elements: Vec<Vec<HermitianOperator>>, carrier: HermitianOperator) -> Result<Self> {
        let asm = Self::new_unchecked(elements, carrier)?;
        let report = asm.validate();
        if let Some(v) = report.first() {
            return Err(Error::Document {
                context: format!("invalid measurement assemblage: {v}"),
            });
        }
        Ok(asm)
    }

    /// Builds with carrier = identity.
    pub fn full_space(elements: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let dim = elements
            .first()
            .and_then(|r| r.first())
            .map(|e| e.dim())
            .ok_or_else(|| Error::DimensionMismatch { context: "empty assemblage".into() })?;
        Self::new(elements, HermitianOperator::identity(dim))
    }

    pub fn new_unchecked(
        elements: Vec<Vec<HermitianOperator>>,
        carrier: HermitianOperator,
    ) -> Result<Self> {
        let state_like = StateAssemblage::new_unchecked(elements)?;
        if carrier.dim() != state_like.dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "carrier dim {} does not match element dim {}",
                    carrier.dim(),
                    state_like.dim
                ),
            });
        }
        Ok(Self {
            dim: state_like.dim,
            n_inputs: state_like.n_inputs,
            n_outputs: state_like.n_outputs,
            elements: state_like.elements,
            carrier,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn element(&self, x: usize, a: usize) -> &HermitianOperator {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &Vec<Vec<HermitianOperator>> {
        &self.elements
    }

    pub fn carrier(&self) -> &HermitianOperator {
        &self.carrier
    }

    pub fn carrier_rank(&self) -> Result<usize> {
        support_rank(&self.carrier)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        for (x, row) in self.elements.iter().enumerate() {
            let mut sum = HermitianOperator::zeros(self.dim);
            for (a, e) in row.iter().enumerate() {
                let min = e.min_eigenvalue();
                let scale = e.frobenius_norm().max(1.0);
                if min < -TOL_ASSEMBLAGE * scale {
                    report.push(Violation {
                        what: format!("effect ({a}|{x}) is not positive semidefinite"),
                        magnitude: -min,
                    });
                }
                sum = sum.add(e);
            }
            let dev = (sum.matrix() - self.carrier.matrix()).norm();
            if dev > TOL_ASSEMBLAGE {
                report.push(Violation {
                    what: format!("effects for input {x} do not sum to the carrier"),
                    magnitude: dev,
                });
            }
        }
        report
    }
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, mat: HermitianOperator) -> Result<Self> {
        if mat.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                context: format!("state dim {} != {dim_a} * {dim_b}", mat.dim()),
            });
        }
        let min = mat.min_eigenvalue();
        if min < -TOL_ASSEMBLAGE {
            return Err(Error::NegativeOperator { min_eigenvalue: min, floor: -TOL_ASSEMBLAGE });
        }
        let tr = mat.trace();
        if (tr - 1.0).abs() > TOL_ASSEMBLAGE {
            return Err(Error::NonUnitTrace { trace: tr });
        }
        Ok(Self { dim_a, dim_b, mat })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        self.mat.matrix()
    }

    /// Partial trace over A.
    pub fn reduced_b(&self) -> HermitianOperator {
        let mut out = CMatrix::zeros(self.dim_b, self.dim_b);
        let m = self.mat.matrix();
        for i in 0..self.dim_b {
            for j in 0..self.dim_b {
                let mut s = cpx(0.0, 0.0);
                for k in 0..self.dim_a {
                    s += m[(k * self.dim_b + i, k * self.dim_b + j)];
                }
                out[(i, j)] = s;
            }
        }
        HermitianOperator::symmetrize(out)
    }
}

/// Validation entry point mirroring the other `validate_*` free functions.
pub fn validate_state_assemblage(sigma: &StateAssemblage) -> Vec<Violation> {
    sigma.validate()
}

/// `ρ_σ = Σ_a σ_{a|x}`, averaged over `x`.
pub fn reduced_state(sigma: &StateAssemblage) -> Result<HermitianOperator> {
    sigma.reduced_state()
}

/// Remote state preparation: `σ_{a|x} = tr_A[(E_{a|x} ⊗ I_B) ρ_AB]`.
pub fn steer_from_state(
    rho_ab: &BipartiteState,
    measurements: &MeasurementAssemblage,
) -> Result<StateAssemblage> {
    if measurements.dim() != rho_ab.dim_a() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "measurements act on dim {}, state has dim_A {}",
                measurements.dim(),
                rho_ab.dim_a()
            ),
        });
    }
    let da = rho_ab.dim_a();
    let db = rho_ab.dim_b();
    let rho = rho_ab.matrix();
    let mut elements = Vec::with_capacity(measurements.n_inputs());
    for x in 0..measurements.n_inputs() {
        let mut row = Vec::with_capacity(measurements.n_outputs());
        for a in 0..measurements.n_outputs() {
            let e = measurements.element(x, a).matrix();
            let mut out = CMatrix::zeros(db, db);
            // tr_A[(E ⊗ I) ρ]_{ij} = Σ_{k,l} E[k,l] ρ[(l,i),(k,j)]
            for i in 0..db {
                for j in 0..db {
                    let mut s = cpx(0.0, 0.0);
                    for k in 0..da {
                        for l in 0..da {
                            s += e[(k, l)] * rho[(l * db + i, k * db + j)];
                        }
                    }
                    out[(i, j)] = s;
                }
            }
            row.push(HermitianOperator::symmetrize(out));
        }
        elements.push(row);
    }
    StateAssemblage::new(elements)
}

/// The steering-equivalent observable `B_{a|x} = √ρ_σ⁻¹ σ_{a|x} √ρ_σ⁻¹`,
/// a measurement assemblage on the carrier `supp(ρ_σ)`.
pub fn compute_seo(sigma: &StateAssemblage) -> Result<MeasurementAssemblage> {
    let rho = sigma.reduced_state()?;
    let s_inv = sqrt_pinv(&rho)?;
    let carrier = support_projector(&rho, SUPPORT_REL_TOL)?;
    let elements = sigma
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.conjugate_by(s_inv.matrix())).collect())
        .collect();
    MeasurementAssemblage::new(elements, carrier)
}

/// Induces the state assemblage `τ_{a|x} = √ρ U E_{a|x} U† √ρ` from a
/// measurement assemblage, a target reduced state, and a unitary.
///
/// Requires `supp(ρ) ⊆ supp(U · carrier(E) · U†)`.
pub fn assemblage_from_seo(
    seo: &MeasurementAssemblage,
    rho: &HermitianOperator,
    unitary: &GeneralOperator,
) -> Result<StateAssemblage> {
    if rho.dim() != seo.dim() || unitary.rows() != seo.dim() || unitary.cols() != seo.dim() {
        return Err(Error::DimensionMismatch {
            context: "assemblage_from_seo: operator dimensions disagree".into(),
        });
    }
    let rotated_carrier = seo.carrier().conjugate_by(unitary.matrix());
    check_support_inclusion(rho, &rotated_carrier, "supp(ρ) ⊄ supp(U carrier U†)")?;
    let sq = matrix_sqrt(rho)?;
    let map = sq.matrix() * unitary.matrix();
    let elements = seo
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.conjugate_by(&map)).collect())
        .collect();
    StateAssemblage::new(elements)
}

/// Errors with `SupportViolation` unless `supp(inner) ⊆ supp(outer)` under
/// the projector test `‖(I - Π_outer) Π_inner‖_F ≤ 1e-8`.
pub fn check_support_inclusion(
    inner: &HermitianOperator,
    outer: &HermitianOperator,
    context: &str,
) -> Result<()> {
    let leak = support_inclusion_defect(inner, outer)?;
    if leak > 1e-8 {
        return Err(Error::SupportViolation {
            context: format!("{context}: projector leakage {leak:.3e}"),
        });
    }
    Ok(())
}

/// `‖(I - Π_outer) Π_inner‖_F`.
pub fn support_inclusion_defect(
    inner: &HermitianOperator,
    outer: &HermitianOperator,
) -> Result<f64> {
    let pi_in = support_projector(inner, SUPPORT_REL_TOL)?;
    let pi_out = support_projector(outer, SUPPORT_REL_TOL)?;
    let d = inner.dim();
    let complement = DMatrix::identity(d, d) - pi_out.matrix();
    Ok((complement * pi_in.matrix()).norm())
}

/// Embeds a measurement assemblage on `span{e_0..e_{d-1}}` of a larger
/// space, padding effects with zeros. The carrier becomes the corresponding
/// coordinate projector.
pub fn embed_measurements(
    small: &MeasurementAssemblage,
    dim: usize,
) -> Result<MeasurementAssemblage> {
    if dim < small.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("cannot embed dim {} into dim {dim}", small.dim()),
        });
    }
    let pad = |h: &HermitianOperator| {
        let mut m = CMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (small.dim(), small.dim())).copy_from(h.matrix());
        HermitianOperator::symmetrize(m)
    };
    let elements = small.elements().iter().map(|row| row.iter().map(pad).collect()).collect();
    let carrier = pad(small.carrier());
    MeasurementAssemblage::new(elements, carrier)
}

/// Compresses every element by the isometry `V` (`d x r`): `E ↦ V† E V`.
pub fn compress_measurements(
    asm: &MeasurementAssemblage,
    isometry: &CMatrix,
) -> Result<MeasurementAssemblage> {
    let vt = isometry.adjoint();
    let elements = asm
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.conjugate_by(&vt)).collect())
        .collect();
    let carrier = asm.carrier().conjugate_by(&vt);
    MeasurementAssemblage::new(elements, carrier)
}

/// Compresses a state assemblage by the isometry `V`: `σ ↦ V† σ V`.
pub fn compress_states(asm: &StateAssemblage, isometry: &CMatrix) -> Result<StateAssemblage> {
    let vt = isometry.adjoint();
    let elements = asm
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.conjugate_by(&vt)).collect())
        .collect();
    StateAssemblage::new(elements)
}

/// Bundle of `(ρ_σ, √ρ_σ, √ρ_σ⁻¹, Π_σ, rank)` shared by the filter and
/// ordering modules.
pub struct ReducedStateSplit {
    pub rho: HermitianOperator,
    pub sqrt: HermitianOperator,
    pub sqrt_pinv: HermitianOperator,
    pub projector: HermitianOperator,
    pub rank: usize,
}

pub fn split_reduced_state(sigma: &StateAssemblage) -> Result<ReducedStateSplit> {
    let rho = sigma.reduced_state()?;
    let sqrt = matrix_sqrt(&rho)?;
    let pinv = sqrt_pinv(&rho)?;
    let projector = support_projector(&rho, SUPPORT_REL_TOL)?;
    let rank = support_rank(&rho)?;
    Ok(ReducedStateSplit { rho, sqrt, sqrt_pinv: pinv, projector, rank })
}

/// Unitary whose columns are the eigenvectors of `h` in descending
/// eigenvalue order.
pub(crate) fn eig_basis_descending(h: &HermitianOperator) -> Result<CMatrix> {
    let pairs = spectral_decompose(h)?;
    let d = h.dim();
    let mut m = CMatrix::zeros(d, d);
    for (j, (_, v)) in pairs.iter().enumerate() {
        m.set_column(j, v);
    }
    Ok(m)
}
