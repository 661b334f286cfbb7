//! LHS/JM membership and robustness-type measures: generalised steering
//! robustness, its consistent variant, incompatibility robustness, generic
//! noise models, the steering-induced incompatibility measure, and the free
//! operations of the two resource theories.
//!
//! Both the LHS and JM sets are convex hulls of deterministic response
//! strategies at the finite input/output sizes targeted here, so every
//! membership or robustness question is a single SDP over the strategy
//! decomposition; there is no hierarchy or relaxation anywhere. All SDPs
//! are built on the carrier subspace (the support of the reduced state, or
//! the stored carrier projector) so that the programs keep strictly
//! feasible interiors.

use crate::assemblage::{
    compress_measurements, compress_states, MeasurementAssemblage, StateAssemblage,
};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_basis, matrix_sqrt, support_isometry, CMatrix, GeneralOperator, HermitianOperator,
};
use crate::optim::nelder_mead;
use crate::random::{ginibre, rng_for};
use crate::sdp::{solve, SdpOptions, SdpProblem, SdpSolution, SdpStatus};

/// Guard for the deterministic-strategy enumeration.
pub const MAX_STRATEGIES: usize = 1_000_000;

/// Robustness values at or below this are treated as membership.
pub const TOL_MEMBER: f64 = 1e-7;

fn sdp_options() -> SdpOptions {
    SdpOptions { gap_tol: 1e-8, feas_tol: 1e-8, max_iters: 200 }
}

/// The deterministic response functions `x ↦ a`, enumerated
/// lexicographically: strategy `λ` outputs digit `x` of `λ` written in base
/// `n_outputs` with `x = 0` as the most significant digit.
#[derive(Debug, Clone)]
pub struct DeterministicStrategySet {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub n_strategies: usize,
}

impl DeterministicStrategySet {
    pub fn output_for(&self, x: usize, lambda: usize) -> usize {
        let place = self.n_inputs - 1 - x;
        (lambda / self.n_outputs.pow(place as u32)) % self.n_outputs
    }

    /// `D(a|x,λ)`.
    pub fn responds(&self, a: usize, x: usize, lambda: usize) -> bool {
        self.output_for(x, lambda) == a
    }
}

pub fn enumerate_deterministic_strategies(
    n_inputs: usize,
    n_outputs: usize,
) -> Result<DeterministicStrategySet> {
    let n = (n_outputs as f64).powi(n_inputs as i32);
    if !(n.is_finite() && n <= MAX_STRATEGIES as f64) {
        return Err(Error::TooManyStrategies { n_inputs, n_outputs, guard: MAX_STRATEGIES });
    }
    Ok(DeterministicStrategySet {
        n_inputs,
        n_outputs,
        n_strategies: n_outputs.pow(n_inputs as u32),
    })
}

/// Noise ensembles for the robustness measures.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    /// All state assemblages (the generalised steering robustness).
    GeneralState,
    /// State assemblages sharing the input's reduced state.
    ConsistentState,
    /// All measurement assemblages (the generalised incompatibility
    /// robustness).
    GeneralMeasurement,
    Custom(CustomNoiseModel),
}

/// SDP-representable custom noise sets. Only linear structure is accepted;
/// anything else must be rejected rather than silently relaxed.
#[derive(Debug, Clone)]
pub enum CustomNoiseModel {
    /// The singleton `ω = F` for a fixed valid assemblage direction; the
    /// noise variable is substituted away entirely.
    FixedDirection { elements: Vec<Vec<HermitianOperator>> },
    /// Affine operator equalities `Σ_k c_k ω_{a_k|x_k} = rhs` on the noise.
    Linear { equalities: Vec<NoiseEquality> },
}

#[derive(Debug, Clone)]
pub struct NoiseEquality {
    /// `(x, a, coefficient)` triples.
    pub terms: Vec<(usize, usize, f64)>,
    pub rhs: HermitianOperator,
}

/// Which assemblage flavour a robustness result talks about.
#[derive(Debug, Clone)]
pub enum NoiseAssemblage {
    State(StateAssemblage),
    Measurement(MeasurementAssemblage),
}

#[derive(Debug, Clone)]
pub struct RobustnessResult {
    pub value: f64,
    /// A noise assemblage achieving the optimum (the input itself when the
    /// optimal mixing weight vanishes).
    pub optimal_noise: NoiseAssemblage,
    /// LHS/JM components of the mixture, indexed by strategy.
    pub decomposition: Vec<HermitianOperator>,
    pub certificate: SdpSolution,
}

/// Outcome of an exact membership test.
#[derive(Debug, Clone)]
pub enum Membership {
    Member {
        /// `σ_λ` (or `G_λ`) reproducing the input within `reproduction_error`.
        decomposition: Vec<HermitianOperator>,
        reproduction_error: f64,
    },
    Infeasible {
        witness: FarkasWitness,
    },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Separating functional certifying non-membership: `F_{a|x} ⪰ 0` with
/// `Σ_{a,x} D(a|x,λ) F_{a|x} ⪯ I` for every strategy, yet
/// `Σ_{a,x} tr(F_{a|x} input_{a|x}) = value > 1`.
#[derive(Debug, Clone)]
pub struct FarkasWitness {
    pub operators: Vec<Vec<HermitianOperator>>,
    pub value: f64,
}

struct Carrier {
    isometry: CMatrix,
    rank: usize,
}

fn state_carrier(sigma: &StateAssemblage) -> Result<Carrier> {
    let split = crate::assemblage::split_reduced_state(sigma)?;
    let isometry = support_isometry(&split.projector)?;
    Ok(Carrier { isometry, rank: split.rank })
}

fn measurement_carrier(meas: &MeasurementAssemblage) -> Result<Carrier> {
    let isometry = support_isometry(&crate::linalg::support_projector(
        meas.carrier(),
        crate::linalg::SUPPORT_REL_TOL,
    )?)?;
    let rank = meas.carrier_rank()?;
    Ok(Carrier { isometry, rank })
}

fn lift(carrier: &Carrier, h: &HermitianOperator) -> HermitianOperator {
    h.conjugate_by(&carrier.isometry)
}

/// Σ_a over one input must reproduce; shared helper for building the
/// linking equalities `Σ_λ D(a|x,λ) ⟨F_j, main_λ⟩ - ⟨F_j, slack_ax⟩ = ⟨F_j, target_ax⟩`.
struct LinkBuilder<'a> {
    problem: &'a mut SdpProblem,
    strategies: &'a DeterministicStrategySet,
    basis: Vec<HermitianOperator>,
}

impl<'a> LinkBuilder<'a> {
    fn new(
        problem: &'a mut SdpProblem,
        strategies: &'a DeterministicStrategySet,
        dim: usize,
    ) -> Self {
        Self { problem, strategies, basis: hermitian_basis(dim) }
    }

    fn link(
        &mut self,
        main_blocks: &[usize],
        slack_block: Option<usize>,
        x: usize,
        a: usize,
        target: &HermitianOperator,
        slack_sign: f64,
    ) {
        for f in &self.basis {
            let mut terms: Vec<(usize, HermitianOperator)> = Vec::new();
            for (lambda, &blk) in main_blocks.iter().enumerate() {
                if self.strategies.responds(a, x, lambda) {
                    terms.push((blk, f.clone()));
                }
            }
            if let Some(s) = slack_block {
                terms.push((s, f.scale(slack_sign)));
            }
            self.problem.add_equality(terms, f.inner(target));
        }
    }
}

/// Accepts an optimal solve, or an iteration-capped one whose replayed
/// certificates still meet the accuracy this module needs (values are only
/// ever consumed at the 1e-5/1e-6 level).
fn check_optimal(sol: &SdpSolution, what: &str) -> Result<()> {
    match sol.status {
        SdpStatus::Optimal => Ok(()),
        SdpStatus::MaxIterations => {
            let scale = sol.primal_objective.abs().max(sol.dual_objective.abs()).max(1.0);
            let good = sol.gap.abs() <= 1e-7 * scale
                && sol.primal_residual <= 1e-7
                && sol.min_block_eigenvalue >= -1e-7;
            if good {
                Ok(())
            } else {
                Err(Error::SolverFailure {
                    context: format!(
                        "{what}: iteration limit with gap {:.3e}, residual {:.3e}",
                        sol.gap, sol.primal_residual
                    ),
                })
            }
        }
        other => Err(Error::SolverFailure {
            context: format!("{what}: solver returned {other:?} (gap {:.3e})", sol.gap),
        }),
    }
}

/// Generalised steering robustness: the least `t` such that mixing with
/// some state assemblage at weight `t/(1+t)` becomes LHS. The linearised
/// program minimises `Σ_λ tr σ̃_λ - 1` with
/// `Σ_λ D(a|x,λ) σ̃_λ ⪰ σ_{a|x}`.
pub fn steering_robustness(sigma: &StateAssemblage) -> Result<RobustnessResult> {
    let carrier = state_carrier(sigma)?;
    let compressed = compress_states(sigma, &carrier.isometry)?;
    let strategies =
        enumerate_deterministic_strategies(sigma.n_inputs(), sigma.n_outputs())?;
    let r = carrier.rank;

    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("sigma_{l}"), r, true))
        .collect();
    let slack: Vec<Vec<usize>> = (0..sigma.n_inputs())
        .map(|x| {
            (0..sigma.n_outputs())
                .map(|a| p.add_block(format!("noise_{a}_{x}"), r, true))
                .collect()
        })
        .collect();
    for &b in &main {
        p.set_objective(b, HermitianOperator::identity(r));
    }
    {
        let mut lb = LinkBuilder::new(&mut p, &strategies, r);
        for x in 0..sigma.n_inputs() {
            for a in 0..sigma.n_outputs() {
                lb.link(&main, Some(slack[x][a]), x, a, compressed.element(x, a), -1.0);
            }
        }
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "steering robustness")?;
    let value = (sol.primal_objective - 1.0).max(0.0);
    finish_state_result(sigma, &carrier, &strategies, sol, value, &main, &slack)
}

/// Consistent generalised steering robustness: noise restricted to share
/// the reduced state of the input.
pub fn consistent_steering_robustness(sigma: &StateAssemblage) -> Result<RobustnessResult> {
    let carrier = state_carrier(sigma)?;
    let compressed = compress_states(sigma, &carrier.isometry)?;
    let rho = compressed.reduced_state()?;
    let strategies =
        enumerate_deterministic_strategies(sigma.n_inputs(), sigma.n_outputs())?;
    let r = carrier.rank;

    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("sigma_{l}"), r, true))
        .collect();
    let slack: Vec<Vec<usize>> = (0..sigma.n_inputs())
        .map(|x| {
            (0..sigma.n_outputs())
                .map(|a| p.add_block(format!("noise_{a}_{x}"), r, true))
                .collect()
        })
        .collect();
    for &b in &main {
        p.set_objective(b, HermitianOperator::identity(r));
    }
    {
        let mut lb = LinkBuilder::new(&mut p, &strategies, r);
        for x in 0..sigma.n_inputs() {
            for a in 0..sigma.n_outputs() {
                lb.link(&main, Some(slack[x][a]), x, a, compressed.element(x, a), -1.0);
            }
        }
    }
    // Consistency: Σ_λ σ̃_λ = (Σ_λ tr σ̃_λ) ρ_σ. The trace component of this
    // family is identically zero and is dropped by the presolve.
    for f in hermitian_basis(r) {
        let rho_coeff = f.inner(&rho);
        let mut terms: Vec<(usize, HermitianOperator)> = Vec::new();
        for &b in &main {
            let coeff = f.sub(&HermitianOperator::identity(r).scale(rho_coeff));
            terms.push((b, coeff));
        }
        p.add_equality(terms, 0.0);
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "consistent steering robustness")?;
    let value = (sol.primal_objective - 1.0).max(0.0);
    finish_state_result(sigma, &carrier, &strategies, sol, value, &main, &slack)
}

#[allow(clippy::too_many_arguments)]
fn finish_state_result(
    sigma: &StateAssemblage,
    carrier: &Carrier,
    strategies: &DeterministicStrategySet,
    sol: SdpSolution,
    value: f64,
    main: &[usize],
    slack: &[Vec<usize>],
) -> Result<RobustnessResult> {
    let scale = 1.0 / (1.0 + value);
    let decomposition: Vec<HermitianOperator> = main
        .iter()
        .map(|&b| lift(carrier, &sol.primal_blocks[b]).scale(scale))
        .collect();
    let optimal_noise = if value > 1e-9 {
        let elements: Vec<Vec<HermitianOperator>> = slack
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&b| lift(carrier, &sol.primal_blocks[b]).scale(1.0 / value))
                    .collect()
            })
            .collect();
        StateAssemblage::new_unchecked(elements)?
    } else {
        sigma.clone()
    };
    let _ = strategies;
    Ok(RobustnessResult {
        value,
        optimal_noise: NoiseAssemblage::State(optimal_noise),
        decomposition,
        certificate: sol,
    })
}

/// Generalised incompatibility robustness on the assemblage's carrier:
/// minimise `c - 1` with `Σ_λ G̃_λ = c·I` and `Σ_λ D(a|x,λ) G̃_λ ⪰ E_{a|x}`.
/// The scalar `c` is eliminated as `tr(Σ_λ G̃_λ)/r`.
pub fn incompatibility_robustness(meas: &MeasurementAssemblage) -> Result<RobustnessResult> {
    let carrier = measurement_carrier(meas)?;
    let compressed = compress_measurements(meas, &carrier.isometry)?;
    let strategies = enumerate_deterministic_strategies(meas.n_inputs(), meas.n_outputs())?;
    let r = carrier.rank;

    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("parent_{l}"), r, true))
        .collect();
    let slack: Vec<Vec<usize>> = (0..meas.n_inputs())
        .map(|x| {
            (0..meas.n_outputs())
                .map(|a| p.add_block(format!("noise_{a}_{x}"), r, true))
                .collect()
        })
        .collect();
    for &b in &main {
        p.set_objective(b, HermitianOperator::identity(r).scale(1.0 / r as f64));
    }
    {
        let mut lb = LinkBuilder::new(&mut p, &strategies, r);
        for x in 0..meas.n_inputs() {
            for a in 0..meas.n_outputs() {
                lb.link(&main, Some(slack[x][a]), x, a, compressed.element(x, a), -1.0);
            }
        }
    }
    // Σ_λ G̃_λ = (tr Σ_λ G̃_λ / r) · I.
    for f in hermitian_basis(r) {
        let trace_coeff = f.trace() / r as f64;
        let mut terms: Vec<(usize, HermitianOperator)> = Vec::new();
        for &b in &main {
            let coeff = f.sub(&HermitianOperator::identity(r).scale(trace_coeff));
            terms.push((b, coeff));
        }
        p.add_equality(terms, 0.0);
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "incompatibility robustness")?;
    let value = (sol.primal_objective - 1.0).max(0.0);
    finish_measurement_result(meas, &carrier, sol, value, &main, &slack)
}

fn finish_measurement_result(
    meas: &MeasurementAssemblage,
    carrier: &Carrier,
    sol: SdpSolution,
    value: f64,
    main: &[usize],
    slack: &[Vec<usize>],
) -> Result<RobustnessResult> {
    let scale = 1.0 / (1.0 + value);
    let decomposition: Vec<HermitianOperator> = main
        .iter()
        .map(|&b| lift(carrier, &sol.primal_blocks[b]).scale(scale))
        .collect();
    let optimal_noise = if value > 1e-9 {
        let elements: Vec<Vec<HermitianOperator>> = slack
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&b| lift(carrier, &sol.primal_blocks[b]).scale(1.0 / value))
                    .collect()
            })
            .collect();
        MeasurementAssemblage::new_unchecked(elements, meas.carrier().clone())?
    } else {
        meas.clone()
    };
    Ok(RobustnessResult {
        value,
        optimal_noise: NoiseAssemblage::Measurement(optimal_noise),
        decomposition,
        certificate: sol,
    })
}

/// Exact LHS membership via a Chebyshev-style feasibility program:
/// minimise `t` with `-tI ⪯ Σ_λ D σ_λ - σ_{a|x} ⪯ tI`; the optimum is zero
/// exactly on members, and the minimiser is the decomposition. On
/// non-members the steering-robustness dual supplies the certificate.
pub fn lhs_membership(sigma: &StateAssemblage) -> Result<Membership> {
    let sr = steering_robustness(sigma)?;
    if sr.value > TOL_MEMBER {
        let witness = state_witness_from(sigma, &sr)?;
        return Ok(Membership::Infeasible { witness });
    }
    let carrier = state_carrier(sigma)?;
    let compressed = compress_states(sigma, &carrier.isometry)?;
    let strategies =
        enumerate_deterministic_strategies(sigma.n_inputs(), sigma.n_outputs())?;
    let (decomposition, err) =
        chebyshev_decomposition(&compressed, &strategies, None, &carrier)?;
    Ok(Membership::Member { decomposition, reproduction_error: err })
}

/// Exact joint-measurability membership; `Σ_λ G_λ = carrier` is imposed
/// exactly while the reproduction constraint carries the Chebyshev slack.
pub fn jm_membership(meas: &MeasurementAssemblage) -> Result<Membership> {
    let ir = incompatibility_robustness(meas)?;
    if ir.value > TOL_MEMBER {
        let witness = measurement_witness_from(meas, &ir)?;
        return Ok(Membership::Infeasible { witness });
    }
    let carrier = measurement_carrier(meas)?;
    let compressed = compress_measurements(meas, &carrier.isometry)?;
    let strategies = enumerate_deterministic_strategies(meas.n_inputs(), meas.n_outputs())?;
    let state_like = StateAssemblage::new_unchecked(compressed.elements().clone())?;
    let (decomposition, err) =
        chebyshev_decomposition(&state_like, &strategies, Some(carrier.rank), &carrier)?;
    Ok(Membership::Member { decomposition, reproduction_error: err })
}

/// Shared Chebyshev feasibility solve. `normalised_to` adds the exact
/// completeness constraint `Σ_λ X_λ = I_r` used for POVM parents.
fn chebyshev_decomposition(
    target: &StateAssemblage,
    strategies: &DeterministicStrategySet,
    normalised_to: Option<usize>,
    carrier: &Carrier,
) -> Result<(Vec<HermitianOperator>, f64)> {
    let r = target.dim();
    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("comp_{l}"), r, true))
        .collect();
    let t = p.add_block("t", 1, true);
    p.set_objective(t, HermitianOperator::identity(1));
    let basis = hermitian_basis(r);
    for x in 0..target.n_inputs() {
        for a in 0..target.n_outputs() {
            let plus = p.add_block(format!("plus_{a}_{x}"), r, true);
            let minus = p.add_block(format!("minus_{a}_{x}"), r, true);
            // plus = tI - (ΣDσ_λ - σ), minus = tI + (ΣDσ_λ - σ)
            for f in &basis {
                let tr_f = f.trace();
                let mut terms: Vec<(usize, HermitianOperator)> = vec![
                    (plus, f.clone()),
                    (t, HermitianOperator::identity(1).scale(-tr_f)),
                ];
                for (lambda, &blk) in main.iter().enumerate() {
                    if strategies.responds(a, x, lambda) {
                        terms.push((blk, f.clone()));
                    }
                }
                p.add_equality(terms, f.inner(target.element(x, a)));
                let mut terms: Vec<(usize, HermitianOperator)> = vec![
                    (minus, f.clone()),
                    (t, HermitianOperator::identity(1).scale(-tr_f)),
                ];
                for (lambda, &blk) in main.iter().enumerate() {
                    if strategies.responds(a, x, lambda) {
                        terms.push((blk, f.scale(-1.0)));
                    }
                }
                p.add_equality(terms, -f.inner(target.element(x, a)));
            }
        }
    }
    if let Some(rank) = normalised_to {
        for f in &basis {
            let terms: Vec<(usize, HermitianOperator)> =
                main.iter().map(|&b| (b, f.clone())).collect();
            p.add_equality(terms, f.inner(&HermitianOperator::identity(rank)));
        }
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "membership decomposition")?;
    let err = sol.primal_objective.max(0.0);
    let decomposition =
        main.iter().map(|&b| lift(carrier, &sol.primal_blocks[b])).collect();
    Ok((decomposition, err))
}

/// Extracts and verifies the steering witness from the SR dual solution.
fn state_witness_from(sigma: &StateAssemblage, sr: &RobustnessResult) -> Result<FarkasWitness> {
    let carrier = state_carrier(sigma)?;
    let slack_offset = enumerate_deterministic_strategies(sigma.n_inputs(), sigma.n_outputs())?
        .n_strategies;
    let mut operators = Vec::new();
    let mut k = slack_offset;
    for _x in 0..sigma.n_inputs() {
        let mut row = Vec::new();
        for _a in 0..sigma.n_outputs() {
            row.push(lift(&carrier, &sr.certificate.dual_slacks[k]));
            k += 1;
        }
        operators.push(row);
    }
    verify_witness(&operators, sigma.n_inputs(), sigma.n_outputs(), |x, a| {
        sigma.element(x, a).clone()
    })
}

fn measurement_witness_from(
    meas: &MeasurementAssemblage,
    ir: &RobustnessResult,
) -> Result<FarkasWitness> {
    let carrier = measurement_carrier(meas)?;
    let slack_offset = enumerate_deterministic_strategies(meas.n_inputs(), meas.n_outputs())?
        .n_strategies;
    let mut operators = Vec::new();
    let mut k = slack_offset;
    for _x in 0..meas.n_inputs() {
        let mut row = Vec::new();
        for _a in 0..meas.n_outputs() {
            row.push(lift(&carrier, &ir.certificate.dual_slacks[k]));
            k += 1;
        }
        operators.push(row);
    }
    verify_witness(&operators, meas.n_inputs(), meas.n_outputs(), |x, a| {
        meas.element(x, a).clone()
    })
}

fn verify_witness(
    operators: &[Vec<HermitianOperator>],
    n_inputs: usize,
    n_outputs: usize,
    element: impl Fn(usize, usize) -> HermitianOperator,
) -> Result<FarkasWitness> {
    let strategies = enumerate_deterministic_strategies(n_inputs, n_outputs)?;
    let d = operators[0][0].dim();
    let mut value = 0.0;
    for (x, row) in operators.iter().enumerate() {
        for (a, f) in row.iter().enumerate() {
            if f.min_eigenvalue() < -1e-7 {
                return Err(Error::SolverFailure {
                    context: "witness operator not PSD".into(),
                });
            }
            value += f.inner(&element(x, a));
        }
    }
    for lambda in 0..strategies.n_strategies {
        let mut comb = HermitianOperator::zeros(d);
        for x in 0..n_inputs {
            comb = comb.add(&operators[x][strategies.output_for(x, lambda)]);
        }
        let excess = comb.sub(&HermitianOperator::identity(d)).min_eigenvalue();
        let top = -excess;
        if top < -1e-7 {
            return Err(Error::SolverFailure {
                context: format!("witness violates normalisation by {:.3e}", -top),
            });
        }
    }
    if value <= 1.0 + 1e-9 {
        return Err(Error::SolverFailure {
            context: format!("witness value {value} does not exceed 1"),
        });
    }
    Ok(FarkasWitness { operators: operators.to_vec(), value })
}

/// Which object a generic robustness computation acts on.
#[derive(Debug, Clone)]
pub enum RobustnessInput {
    State(StateAssemblage),
    Measurement(MeasurementAssemblage),
}

/// Robustness subject to an explicit noise model. The built-in models
/// reduce exactly to the dedicated routines (numerically: this path keeps
/// explicit noise-variable blocks, so agreement with those routines is a
/// genuine cross-check rather than a tautology).
pub fn robustness_with_noise_model(
    input: &RobustnessInput,
    model: &NoiseModel,
) -> Result<RobustnessResult> {
    match (input, model) {
        (RobustnessInput::State(sigma), NoiseModel::GeneralState) => {
            explicit_noise_state(sigma, None, &[])
        }
        (RobustnessInput::State(sigma), NoiseModel::ConsistentState) => {
            let rho = sigma.reduced_state()?;
            explicit_noise_state(sigma, Some(rho), &[])
        }
        (RobustnessInput::Measurement(meas), NoiseModel::GeneralMeasurement) => {
            explicit_noise_measurement(meas)
        }
        (RobustnessInput::State(sigma), NoiseModel::Custom(custom)) => match custom {
            CustomNoiseModel::FixedDirection { elements } => {
                fixed_direction_state(sigma, elements)
            }
            CustomNoiseModel::Linear { equalities } => {
                explicit_noise_state(sigma, None, equalities)
            }
        },
        (RobustnessInput::Measurement(_), NoiseModel::GeneralState | NoiseModel::ConsistentState) => {
            Err(Error::UnrepresentableNoiseModel {
                context: "state noise model applied to a measurement assemblage".into(),
            })
        }
        (RobustnessInput::State(_), NoiseModel::GeneralMeasurement) => {
            Err(Error::UnrepresentableNoiseModel {
                context: "measurement noise model applied to a state assemblage".into(),
            })
        }
        (RobustnessInput::Measurement(_), NoiseModel::Custom(_)) => {
            Err(Error::UnrepresentableNoiseModel {
                context: "custom noise models are implemented for state assemblages".into(),
            })
        }
    }
}

/// SR-style program with explicit noise blocks `ω̃_{a|x} = t ω_{a|x}`:
/// `Σ_λ D σ̃_λ - ω̃_{a|x} = σ_{a|x}`, optional consistency against a fixed
/// reduced state, and optional linear custom equalities on the noise.
fn explicit_noise_state(
    sigma: &StateAssemblage,
    consistent_with: Option<HermitianOperator>,
    custom: &[NoiseEquality],
) -> Result<RobustnessResult> {
    // Custom models may reference directions outside supp(ρ_σ), so only the
    // built-in models are compressed.
    let (carrier, work) = if custom.is_empty() {
        let carrier = state_carrier(sigma)?;
        let compressed = compress_states(sigma, &carrier.isometry)?;
        (carrier, compressed)
    } else {
        let d = sigma.dim();
        (Carrier { isometry: CMatrix::identity(d, d), rank: d }, sigma.clone())
    };
    let consistent_with = match consistent_with {
        Some(rho) => Some(rho.conjugate_by(&carrier.isometry.adjoint())),
        None => None,
    };
    let strategies =
        enumerate_deterministic_strategies(sigma.n_inputs(), sigma.n_outputs())?;
    let r = work.dim();

    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("sigma_{l}"), r, true))
        .collect();
    let noise: Vec<Vec<usize>> = (0..sigma.n_inputs())
        .map(|x| {
            (0..sigma.n_outputs())
                .map(|a| p.add_block(format!("omega_{a}_{x}"), r, true))
                .collect()
        })
        .collect();
    for &b in &main {
        p.set_objective(b, HermitianOperator::identity(r));
    }
    let basis = hermitian_basis(r);
    {
        let mut lb = LinkBuilder::new(&mut p, &strategies, r);
        for x in 0..sigma.n_inputs() {
            for a in 0..sigma.n_outputs() {
                lb.link(&main, Some(noise[x][a]), x, a, work.element(x, a), -1.0);
            }
        }
    }
    if let Some(rho) = &consistent_with {
        // Σ_a ω̃_{a|x} = (Σ_λ tr σ̃_λ - 1) ρ for every input.
        for x in 0..sigma.n_inputs() {
            for f in &basis {
                let rho_coeff = f.inner(rho);
                let mut terms: Vec<(usize, HermitianOperator)> = noise[x]
                    .iter()
                    .map(|&b| (b, f.clone()))
                    .collect();
                for &b in &main {
                    terms.push((b, HermitianOperator::identity(r).scale(-rho_coeff)));
                }
                p.add_equality(terms, -rho_coeff);
            }
        }
    }
    for (k, eq) in custom.iter().enumerate() {
        if eq.rhs.dim() != r {
            return Err(Error::UnrepresentableNoiseModel {
                context: format!("custom equality {k}: rhs dimension mismatch"),
            });
        }
        for (x, a, _) in &eq.terms {
            if *x >= sigma.n_inputs() || *a >= sigma.n_outputs() {
                return Err(Error::UnrepresentableNoiseModel {
                    context: format!("custom equality {k}: index ({a}|{x}) out of range"),
                });
            }
        }
        for f in &basis {
            let rhs_coeff = f.inner(&eq.rhs);
            let mut terms: Vec<(usize, HermitianOperator)> = eq
                .terms
                .iter()
                .map(|(x, a, c)| (noise[*x][*a], f.scale(*c)))
                .collect();
            for &b in &main {
                terms.push((b, HermitianOperator::identity(r).scale(-rhs_coeff)));
            }
            p.add_equality(terms, -rhs_coeff);
        }
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "robustness with noise model")?;
    let value = (sol.primal_objective - 1.0).max(0.0);
    finish_state_result(sigma, &carrier, &strategies, sol, value, &main, &noise)
}

/// Fixed-direction noise: `ω = F` substituted away, leaving
/// `Σ_λ D σ̃_λ - (Σ_λ tr σ̃_λ - 1) F_{a|x} = σ_{a|x}`.
fn fixed_direction_state(
    sigma: &StateAssemblage,
    direction: &[Vec<HermitianOperator>],
) -> Result<RobustnessResult> {
    let fixed = StateAssemblage::new(direction.to_vec()).map_err(|e| {
        Error::UnrepresentableNoiseModel {
            context: format!("fixed noise direction is not a valid assemblage: {e}"),
        }
    })?;
    if fixed.dim() != sigma.dim()
        || fixed.n_inputs() != sigma.n_inputs()
        || fixed.n_outputs() != sigma.n_outputs()
    {
        return Err(Error::UnrepresentableNoiseModel {
            context: "fixed noise direction shape mismatch".into(),
        });
    }
    let d = sigma.dim();
    let strategies =
        enumerate_deterministic_strategies(sigma.n_inputs(), sigma.n_outputs())?;
    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("sigma_{l}"), d, true))
        .collect();
    for &b in &main {
        p.set_objective(b, HermitianOperator::identity(d));
    }
    let basis = hermitian_basis(d);
    for x in 0..sigma.n_inputs() {
        for a in 0..sigma.n_outputs() {
            let f_dir = fixed.element(x, a);
            for f in &basis {
                let dir_coeff = f.inner(f_dir);
                let mut terms: Vec<(usize, HermitianOperator)> = Vec::new();
                for (lambda, &blk) in main.iter().enumerate() {
                    let mut coeff = HermitianOperator::identity(d).scale(-dir_coeff);
                    if strategies.responds(a, x, lambda) {
                        coeff = coeff.add(f);
                    }
                    terms.push((blk, coeff));
                }
                p.add_equality(terms, f.inner(sigma.element(x, a)) - dir_coeff);
            }
        }
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "fixed-direction robustness")?;
    let value = (sol.primal_objective - 1.0).max(0.0);
    let scale = 1.0 / (1.0 + value);
    let decomposition: Vec<HermitianOperator> =
        main.iter().map(|&b| sol.primal_blocks[b].scale(scale)).collect();
    Ok(RobustnessResult {
        value,
        optimal_noise: NoiseAssemblage::State(fixed),
        decomposition,
        certificate: sol,
    })
}

/// IR with explicit noise blocks, used as the generic-measurement route.
fn explicit_noise_measurement(meas: &MeasurementAssemblage) -> Result<RobustnessResult> {
    let carrier = measurement_carrier(meas)?;
    let compressed = compress_measurements(meas, &carrier.isometry)?;
    let strategies = enumerate_deterministic_strategies(meas.n_inputs(), meas.n_outputs())?;
    let r = carrier.rank;

    let mut p = SdpProblem::new();
    let main: Vec<usize> = (0..strategies.n_strategies)
        .map(|l| p.add_block(format!("parent_{l}"), r, true))
        .collect();
    let noise: Vec<Vec<usize>> = (0..meas.n_inputs())
        .map(|x| {
            (0..meas.n_outputs())
                .map(|a| p.add_block(format!("m_{a}_{x}"), r, true))
                .collect()
        })
        .collect();
    for &b in &main {
        p.set_objective(b, HermitianOperator::identity(r).scale(1.0 / r as f64));
    }
    let basis = hermitian_basis(r);
    {
        let mut lb = LinkBuilder::new(&mut p, &strategies, r);
        for x in 0..meas.n_inputs() {
            for a in 0..meas.n_outputs() {
                lb.link(&main, Some(noise[x][a]), x, a, compressed.element(x, a), -1.0);
            }
        }
    }
    for f in &basis {
        let trace_coeff = f.trace() / r as f64;
        let terms: Vec<(usize, HermitianOperator)> = main
            .iter()
            .map(|&b| (b, f.sub(&HermitianOperator::identity(r).scale(trace_coeff))))
            .collect();
        p.add_equality(terms, 0.0);
    }
    let sol = solve(&p, &sdp_options())?;
    check_optimal(&sol, "incompatibility robustness with explicit noise")?;
    let value = (sol.primal_objective - 1.0).max(0.0);
    finish_measurement_result(meas, &carrier, sol, value, &main, &noise)
}

/// Which steering measure the induced incompatibility search maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InducedMeasure {
    SteeringRobustness,
    ConsistentSteeringRobustness,
}

#[derive(Debug, Clone)]
pub struct InducedSearchConfig {
    pub n_restarts: usize,
    pub max_evals_per_restart: usize,
    pub seed: u64,
}

impl Default for InducedSearchConfig {
    fn default() -> Self {
        Self { n_restarts: 12, max_evals_per_restart: 160, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct InducedResult {
    /// Certified lower bound on the steering-induced incompatibility.
    pub lower_bound: f64,
    /// Density achieving the bound (supported on the carrier).
    pub achieving_state: HermitianOperator,
    /// Witness unitary of the achieving assemblage.
    pub achieving_unitary: GeneralOperator,
}

/// Steering-induced incompatibility: the best steerability reachable by
/// inducing assemblages `√η U E U† √η` from the measurement assemblage.
///
/// Unitary degrees of freedom are absorbed into the density search — for
/// any unitarily invariant steering measure,
/// `S(√η U E U† √η) = S(√η' E √η')` with `η' = U†ηU` — so the optimisation
/// runs over densities on the carrier only, through the PSD factor
/// parametrisation `η = AA†/tr(AA†)`. Restart 0 always starts from the
/// maximally mixed state. The result is a certified lower bound; exactness
/// is never claimed from optimiser convergence.
pub fn steering_induced_incompatibility(
    meas: &MeasurementAssemblage,
    measure: InducedMeasure,
    config: &InducedSearchConfig,
) -> Result<InducedResult> {
    let carrier = measurement_carrier(meas)?;
    let compressed = compress_measurements(meas, &carrier.isometry)?;
    let r = carrier.rank;

    let evaluate = |eta: &HermitianOperator| -> f64 {
        let sqrt = match matrix_sqrt(eta) {
            Ok(s) => s,
            Err(_) => return 0.0,
        };
        let elements: Vec<Vec<HermitianOperator>> = compressed
            .elements()
            .iter()
            .map(|row| row.iter().map(|e| e.conjugate_by(sqrt.matrix())).collect())
            .collect();
        let asm = match StateAssemblage::new_unchecked(elements) {
            Ok(a) => a,
            Err(_) => return 0.0,
        };
        let result = match measure {
            InducedMeasure::SteeringRobustness => steering_robustness(&asm),
            InducedMeasure::ConsistentSteeringRobustness => {
                consistent_steering_robustness(&asm)
            }
        };
        result.map(|r| r.value).unwrap_or(0.0)
    };

    let eta_from = |params: &[f64]| -> HermitianOperator {
        let mut a = CMatrix::zeros(r, r);
        let mut k = 0;
        for i in 0..r {
            for j in 0..r {
                a[(i, j)] = crate::linalg::cpx(params[k], params[k + 1]);
                k += 2;
            }
        }
        let gram = HermitianOperator::symmetrize(&a * a.adjoint());
        let tr = gram.trace();
        if tr <= 1e-12 {
            HermitianOperator::identity(r).scale(1.0 / r as f64)
        } else {
            gram.scale(1.0 / tr)
        }
    };

    let n_params = 2 * r * r;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_eta = HermitianOperator::identity(r).scale(1.0 / r as f64);
    for restart in 0..config.n_restarts.max(1) {
        let x0: Vec<f64> = if restart == 0 {
            // Maximally mixed seed: A = I.
            let mut v = vec![0.0; n_params];
            for i in 0..r {
                v[2 * (i * r + i)] = 1.0;
            }
            v
        } else {
            let mut rng = rng_for(config.seed, "induced-incompatibility", restart as u64);
            let g = ginibre(&mut rng, r);
            let mut v = Vec::with_capacity(n_params);
            for i in 0..r {
                for j in 0..r {
                    v.push(g[(i, j)].re * 0.5);
                    v.push(g[(i, j)].im * 0.5);
                }
            }
            v
        };
        let mut objective = |params: &[f64]| -> f64 { -evaluate(&eta_from(params)) };
        let (x, neg) = nelder_mead(
            &mut objective,
            &x0,
            0.35,
            config.max_evals_per_restart.max(n_params + 2),
        );
        let value = -neg;
        if value > best_value {
            best_value = value;
            best_eta = eta_from(&x);
        }
    }

    Ok(InducedResult {
        lower_bound: best_value.max(0.0),
        achieving_state: lift(&carrier, &best_eta),
        achieving_unitary: GeneralOperator::identity(meas.dim()),
    })
}

/// Classical pre/post-processing with shared randomness, the free
/// operations of measurement incompatibility, plus the optional instrument
/// that upgrades them to steering free operations.
#[derive(Debug, Clone)]
pub struct FreeOpSpec {
    /// `p(ω)`.
    pub prior: Vec<f64>,
    /// `p(x|x', ω)`, indexed `[ω][x'][x]`.
    pub input_post: Vec<Vec<Vec<f64>>>,
    /// `p(a'|a, x, x', ω)`, indexed `[ω][x][x'][a][a']`. The incompatibility
    /// map requires this table to be independent of `x`.
    pub outcome_post: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    /// Kraus collections `{E_ω}` forming a quantum instrument; when absent,
    /// the steering map uses `E_ω = p(ω)·id`, the classical special case.
    pub instrument: Option<Vec<Vec<GeneralOperator>>>,
}

impl FreeOpSpec {
    pub fn n_omega(&self) -> usize {
        self.prior.len()
    }

    pub fn n_new_inputs(&self) -> usize {
        self.input_post.first().map(|t| t.len()).unwrap_or(0)
    }

    pub fn n_new_outputs(&self) -> usize {
        self.outcome_post
            .first()
            .and_then(|t| t.first())
            .and_then(|t| t.first())
            .and_then(|t| t.first())
            .map(|t| t.len())
            .unwrap_or(0)
    }

    fn validate(&self, n_inputs: usize, n_outputs: usize, dim: usize) -> Result<()> {
        let n_omega = self.prior.len();
        if n_omega == 0 {
            return Err(Error::MalformedDistribution { context: "empty prior".into() });
        }
        let sum: f64 = self.prior.iter().sum();
        if self.prior.iter().any(|p| *p < -1e-12) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::MalformedDistribution {
                context: format!("prior sums to {sum}"),
            });
        }
        if self.input_post.len() != n_omega || self.outcome_post.len() != n_omega {
            return Err(Error::MalformedDistribution {
                context: "tables disagree on the number of ω values".into(),
            });
        }
        let n_new_inputs = self.n_new_inputs();
        let n_new_outputs = self.n_new_outputs();
        if n_new_inputs == 0 || n_new_outputs == 0 {
            return Err(Error::MalformedDistribution {
                context: "empty input or outcome table".into(),
            });
        }
        for (w, table) in self.input_post.iter().enumerate() {
            if table.len() != n_new_inputs {
                return Err(Error::MalformedDistribution {
                    context: format!("input table for ω={w} has inconsistent shape"),
                });
            }
            for (xp, dist) in table.iter().enumerate() {
                if dist.len() != n_inputs {
                    return Err(Error::MalformedDistribution {
                        context: format!("p(x|x'={xp},ω={w}) has wrong length"),
                    });
                }
                let s: f64 = dist.iter().sum();
                if dist.iter().any(|p| *p < -1e-12) || (s - 1.0).abs() > 1e-10 {
                    return Err(Error::MalformedDistribution {
                        context: format!("p(x|x'={xp},ω={w}) sums to {s}"),
                    });
                }
            }
        }
        for (w, table) in self.outcome_post.iter().enumerate() {
            if table.len() != n_inputs {
                return Err(Error::MalformedDistribution {
                    context: format!("outcome table for ω={w} has wrong x range"),
                });
            }
            for per_x in table {
                if per_x.len() != n_new_inputs {
                    return Err(Error::MalformedDistribution {
                        context: format!("outcome table for ω={w} has wrong x' range"),
                    });
                }
                for per_xp in per_x {
                    if per_xp.len() != n_outputs {
                        return Err(Error::MalformedDistribution {
                            context: format!("outcome table for ω={w} has wrong a range"),
                        });
                    }
                    for dist in per_xp {
                        if dist.len() != n_new_outputs {
                            return Err(Error::MalformedDistribution {
                                context: format!("outcome table for ω={w} has wrong a' range"),
                            });
                        }
                        let s: f64 = dist.iter().sum();
                        if dist.iter().any(|p| *p < -1e-12) || (s - 1.0).abs() > 1e-10 {
                            return Err(Error::MalformedDistribution {
                                context: format!("p(a'|a,x,x',ω={w}) sums to {s}"),
                            });
                        }
                    }
                }
            }
        }
        if let Some(instrument) = &self.instrument {
            if instrument.len() != n_omega {
                return Err(Error::MalformedInstrument {
                    context: "instrument branch count differs from the prior".into(),
                });
            }
            let mut total = CMatrix::zeros(dim, dim);
            for branch in instrument {
                for k in branch {
                    if k.rows() != dim || k.cols() != dim {
                        return Err(Error::MalformedInstrument {
                            context: "Kraus operator dimension mismatch".into(),
                        });
                    }
                    total += k.matrix().adjoint() * k.matrix();
                }
            }
            let defect = (&total - CMatrix::identity(dim, dim)).norm();
            if defect > 1e-9 {
                return Err(Error::MalformedInstrument {
                    context: format!("Σ_ω E_ω is not trace preserving: defect {defect:.3e}"),
                });
            }
        }
        Ok(())
    }

    fn outcome_post_is_x_independent(&self) -> bool {
        for table in &self.outcome_post {
            for per_x in table.iter().skip(1) {
                for (xp, per_xp) in per_x.iter().enumerate() {
                    for (a, dist) in per_xp.iter().enumerate() {
                        for (ap, v) in dist.iter().enumerate() {
                            if (v - table[0][xp][a][ap]).abs() > 1e-12 {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// `E'_{a'|x'} = Σ_{a,x,ω} p(ω) p(x|x',ω) p(a'|a,x',ω) E_{a|x}`.
pub fn apply_incompatibility_free_op(
    meas: &MeasurementAssemblage,
    op: &FreeOpSpec,
) -> Result<MeasurementAssemblage> {
    op.validate(meas.n_inputs(), meas.n_outputs(), meas.dim())?;
    if !op.outcome_post_is_x_independent() {
        return Err(Error::MalformedDistribution {
            context: "incompatibility free operations cannot condition the outcome map on x"
                .into(),
        });
    }
    if op.instrument.is_some() {
        return Err(Error::MalformedInstrument {
            context: "incompatibility free operations are classical; no instrument allowed"
                .into(),
        });
    }
    let dim = meas.dim();
    let mut elements =
        vec![vec![HermitianOperator::zeros(dim); op.n_new_outputs()]; op.n_new_inputs()];
    for (w, &pw) in op.prior.iter().enumerate() {
        for xp in 0..op.n_new_inputs() {
            for x in 0..meas.n_inputs() {
                let px = op.input_post[w][xp][x];
                if px == 0.0 {
                    continue;
                }
                for a in 0..meas.n_outputs() {
                    for ap in 0..op.n_new_outputs() {
                        let pa = op.outcome_post[w][0][xp][a][ap];
                        let weight = pw * px * pa;
                        if weight != 0.0 {
                            elements[xp][ap] =
                                elements[xp][ap].add(&meas.element(x, a).scale(weight));
                        }
                    }
                }
            }
        }
    }
    MeasurementAssemblage::new(elements, meas.carrier().clone())
}

/// `σ'_{a'|x'} = Σ_{a,x,ω} p(x|x',ω) p(a'|a,x,x',ω) E_ω(σ_{a|x})`.
pub fn apply_steering_free_op(
    sigma: &StateAssemblage,
    op: &FreeOpSpec,
) -> Result<StateAssemblage> {
    op.validate(sigma.n_inputs(), sigma.n_outputs(), sigma.dim())?;
    let dim = sigma.dim();
    let mut elements =
        vec![vec![HermitianOperator::zeros(dim); op.n_new_outputs()]; op.n_new_inputs()];
    for w in 0..op.n_omega() {
        for xp in 0..op.n_new_inputs() {
            for x in 0..sigma.n_inputs() {
                let px = op.input_post[w][xp][x];
                if px == 0.0 {
                    continue;
                }
                for a in 0..sigma.n_outputs() {
                    let mapped = match &op.instrument {
                        Some(instrument) => {
                            let mut out = HermitianOperator::zeros(dim);
                            for k in &instrument[w] {
                                out = out.add(&sigma.element(x, a).conjugate_by(k.matrix()));
                            }
                            out
                        }
                        None => sigma.element(x, a).scale(op.prior[w]),
                    };
                    for ap in 0..op.n_new_outputs() {
                        let pa = op.outcome_post[w][x][xp][a][ap];
                        let weight = px * pa;
                        if weight != 0.0 {
                            elements[xp][ap] = elements[xp][ap].add(&mapped.scale(weight));
                        }
                    }
                }
            }
        }
    }
    StateAssemblage::new(elements)
}

/// Random free operation (classical part only), for monotonicity
/// experiments. Output ranges match the input ranges.
pub fn random_free_op(
    rng: &mut impl rand::Rng,
    n_inputs: usize,
    n_outputs: usize,
    n_omega: usize,
) -> FreeOpSpec {
    fn dist(rng: &mut impl rand::Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }
    let prior = dist(rng, n_omega);
    let input_post = (0..n_omega)
        .map(|_| (0..n_inputs).map(|_| dist(rng, n_inputs)).collect())
        .collect();
    // x-independent outcome table, as Eq.-B1-style operations require.
    let shared: Vec<Vec<Vec<Vec<f64>>>> = (0..n_omega)
        .map(|_| {
            (0..n_inputs)
                .map(|_| (0..n_outputs).map(|_| dist(rng, n_outputs)).collect())
                .collect()
        })
        .collect();
    let outcome_post = shared
        .iter()
        .map(|per_omega| (0..n_inputs).map(|_| per_omega.clone()).collect())
        .collect();
    FreeOpSpec { prior, input_post, outcome_post, instrument: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::compute_seo;
    use crate::filter::apply_filter;
    use crate::linalg::cpx;
    use crate::presets;
    use crate::random::{
        random_density, random_measurement_assemblage, random_state_assemblage, rng_for,
    };

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn strategy_enumeration_counts_and_order() {
        let s = enumerate_deterministic_strategies(2, 2).unwrap();
        assert_eq!(s.n_strategies, 4);
        // Lexicographic: λ = a0*2 + a1.
        assert_eq!(s.output_for(0, 2), 1);
        assert_eq!(s.output_for(1, 2), 0);
        let s = enumerate_deterministic_strategies(3, 2).unwrap();
        assert_eq!(s.n_strategies, 8);
        let s = enumerate_deterministic_strategies(2, 3).unwrap();
        assert_eq!(s.n_strategies, 9);
        assert!(matches!(
            enumerate_deterministic_strategies(30, 3),
            Err(Error::TooManyStrategies { .. })
        ));
    }

    /// Implementer-constructed primal/dual feasible points bracketing the
    /// Pauli-pair robustness at 3 - 2√2, checked by eigenvalue arithmetic
    /// with no solver involvement.
    #[test]
    fn pauli_bracket_certificates() {
        let meas = presets::pauli_pair().unwrap();
        let sigma = presets::pauli_halved_assemblage().unwrap();
        let strategies = enumerate_deterministic_strategies(2, 2).unwrap();
        let c = 4.0 - 2.0 * SQRT2;
        let value = c - 1.0; // 3 - 2√2

        // Primal for IR: G̃_λ = (c/4)(I + ĝ_λ·σ⃗).
        let pauli_z = HermitianOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[cpx(1.0, 0.0), cpx(0.0, 0.0), cpx(0.0, 0.0), cpx(-1.0, 0.0)],
        ))
        .unwrap();
        let pauli_x = HermitianOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[cpx(0.0, 0.0), cpx(1.0, 0.0), cpx(1.0, 0.0), cpx(0.0, 0.0)],
        ))
        .unwrap();
        let parents: Vec<HermitianOperator> = (0..4)
            .map(|l| {
                let sz = if strategies.output_for(0, l) == 0 { 1.0 } else { -1.0 };
                let sx = if strategies.output_for(1, l) == 0 { 1.0 } else { -1.0 };
                HermitianOperator::identity(2)
                    .add(&pauli_z.scale(sz / SQRT2))
                    .add(&pauli_x.scale(sx / SQRT2))
                    .scale(c / 4.0)
            })
            .collect();
        // PSD and completeness.
        let mut total = HermitianOperator::zeros(2);
        for g in &parents {
            assert!(g.min_eigenvalue() > -1e-12);
            total = total.add(g);
        }
        assert!((total.matrix() - HermitianOperator::identity(2).scale(c).matrix()).norm() < 1e-12);
        // Dominance Σ_λ D(a|x,λ) G̃_λ ⪰ E_{a|x}.
        for x in 0..2 {
            for a in 0..2 {
                let mut comb = HermitianOperator::zeros(2);
                for (l, g) in parents.iter().enumerate() {
                    if strategies.responds(a, x, l) {
                        comb = comb.add(g);
                    }
                }
                let slack = comb.sub(meas.element(x, a));
                assert!(slack.min_eigenvalue() > -1e-12, "IR primal fails at ({a}|{x})");
            }
        }
        // The same parents halved dominate σ = E/2, giving the SR primal.
        for x in 0..2 {
            for a in 0..2 {
                let mut comb = HermitianOperator::zeros(2);
                for (l, g) in parents.iter().enumerate() {
                    if strategies.responds(a, x, l) {
                        comb = comb.add(&g.scale(0.5));
                    }
                }
                let slack = comb.sub(sigma.element(x, a));
                assert!(slack.min_eigenvalue() > -1e-12, "SR primal fails at ({a}|{x})");
            }
        }

        // Dual for SR: F = (2-√2)·E has Σ_x F_{λ(x)|x} ⪯ I and value 1 + (3-2√2).
        let beta = 2.0 - SQRT2;
        let mut dual_value = 0.0;
        for x in 0..2 {
            for a in 0..2 {
                dual_value += meas.element(x, a).scale(beta).inner(sigma.element(x, a));
            }
        }
        assert!((dual_value - (1.0 + value)).abs() < 1e-12);
        for l in 0..4 {
            let mut comb = HermitianOperator::zeros(2);
            for x in 0..2 {
                comb = comb.add(&meas.element(x, strategies.output_for(x, l)).scale(beta));
            }
            let top = comb.sub(&HermitianOperator::identity(2));
            assert!(top.min_eigenvalue() < 1e-12);
            let gap = -top.min_eigenvalue();
            let _ = gap;
            let max_eig = crate::linalg::spectral_decompose(&comb).unwrap()[0].0;
            assert!(max_eig <= 1.0 + 1e-12, "SR dual violates normalisation: {max_eig}");
        }

        // Dual for IR: Y = E/(2+√2) with W = I/2.
        let gamma = 1.0 / (2.0 + SQRT2);
        let mut ir_dual = 0.0;
        for x in 0..2 {
            for a in 0..2 {
                ir_dual += meas.element(x, a).scale(gamma).inner(meas.element(x, a));
            }
        }
        assert!((ir_dual - (1.0 + value)).abs() < 1e-12);
        for l in 0..4 {
            let mut comb = HermitianOperator::zeros(2);
            for x in 0..2 {
                comb = comb.add(&meas.element(x, strategies.output_for(x, l)).scale(gamma));
            }
            let max_eig = crate::linalg::spectral_decompose(&comb).unwrap()[0].0;
            assert!(max_eig <= 0.5 + 1e-12, "IR dual violates tr W = 1 cap: {max_eig}");
        }
    }

    #[test]
    fn pauli_robustness_matches_the_bracket() {
        let value = 3.0 - 2.0 * SQRT2;
        let sigma = presets::pauli_halved_assemblage().unwrap();
        let sr = steering_robustness(&sigma).unwrap();
        assert!((sr.value - value).abs() < 1e-6, "SR = {}, bracket = {}", sr.value, value);
        let meas = presets::pauli_pair().unwrap();
        let ir = incompatibility_robustness(&meas).unwrap();
        assert!((ir.value - value).abs() < 1e-6, "IR = {}, bracket = {}", ir.value, value);
        let src = consistent_steering_robustness(&sigma).unwrap();
        assert!((src.value - value).abs() < 1e-6, "SRc = {}", src.value);
    }

    #[test]
    fn lhs_members_have_zero_robustness_and_decompositions() {
        // σ_{a|x} = p(a|x) ρ: a single hidden state.
        let rho = HermitianOperator::from_real_diagonal(&[0.6, 0.4]);
        let p = [[0.3, 0.7], [0.5, 0.5]];
        let elements = (0..2)
            .map(|x| (0..2).map(|a| rho.scale(p[x][a])).collect())
            .collect();
        let sigma = StateAssemblage::new(elements).unwrap();
        let sr = steering_robustness(&sigma).unwrap();
        assert!(sr.value <= 1e-7, "SR = {}", sr.value);
        match lhs_membership(&sigma).unwrap() {
            Membership::Member { decomposition, reproduction_error } => {
                assert!(reproduction_error <= 1e-7);
                // Replay the decomposition.
                let strategies = enumerate_deterministic_strategies(2, 2).unwrap();
                for x in 0..2 {
                    for a in 0..2 {
                        let mut rebuilt = HermitianOperator::zeros(2);
                        for (l, comp) in decomposition.iter().enumerate() {
                            if strategies.responds(a, x, l) {
                                rebuilt = rebuilt.add(comp);
                            }
                        }
                        let err = (rebuilt.matrix() - sigma.element(x, a).matrix()).norm();
                        assert!(err < 1e-6, "({a}|{x}): {err}");
                    }
                }
            }
            other => panic!("expected membership, got {other:?}"),
        }
    }

    #[test]
    fn steerable_assemblage_yields_witness() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        match lhs_membership(&sigma).unwrap() {
            Membership::Infeasible { witness } => {
                assert!(witness.value > 1.0 + 1e-6);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn product_states_are_unsteerable() {
        let mut rng = rng_for(61, "product-lhs", 0);
        for _ in 0..3 {
            let sigma = random_state_assemblage(&mut rng, 2, 2, 2, false).unwrap();
            let sr = steering_robustness(&sigma).unwrap();
            assert!(sr.value <= 1e-7, "SR = {}", sr.value);
            assert!(lhs_membership(&sigma).unwrap().is_member());
        }
    }

    #[test]
    fn jm_membership_cases() {
        // Commuting projective pair.
        let z0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let z1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let meas = MeasurementAssemblage::full_space(vec![
            vec![z0.clone(), z1.clone()],
            vec![z0.clone(), z1.clone()],
        ])
        .unwrap();
        assert!(jm_membership(&meas).unwrap().is_member());

        // Sharp X/Z: incompatible.
        let pauli = presets::pauli_pair().unwrap();
        match jm_membership(&pauli).unwrap() {
            Membership::Infeasible { witness } => assert!(witness.value > 1.0),
            other => panic!("expected incompatibility, got {other:?}"),
        }

        // Single input: always compatible.
        let single = MeasurementAssemblage::full_space(vec![vec![z0, z1]]).unwrap();
        assert!(jm_membership(&single).unwrap().is_member());
    }

    #[test]
    fn observation1_identity_on_paper_family() {
        // SR^c(σ^(v)) equals IR of the SEO, for every v, including the
        // rank-3 carrier cases.
        let meas = presets::pauli_pair().unwrap();
        let ir_pauli = incompatibility_robustness(&meas).unwrap().value;
        for v in [0.1, 0.5, 1.0] {
            let sigma = presets::paper_assemblage(v).unwrap();
            let src = consistent_steering_robustness(&sigma).unwrap().value;
            assert!(
                (src - ir_pauli).abs() < 1e-5,
                "v={v}: SRc {src} vs IR {ir_pauli}"
            );
            let seo = compute_seo(&sigma).unwrap();
            let ir_seo = incompatibility_robustness(&seo).unwrap().value;
            assert!((src - ir_seo).abs() < 1e-5, "v={v}: SRc {src} vs IR(SEO) {ir_seo}");
        }
    }

    #[test]
    fn sr_never_exceeds_src() {
        let mut rng = rng_for(62, "sr-vs-src", 0);
        for _ in 0..4 {
            let sigma = random_state_assemblage(&mut rng, 2, 2, 2, true).unwrap();
            let sr = steering_robustness(&sigma).unwrap().value;
            let src = consistent_steering_robustness(&sigma).unwrap().value;
            assert!(sr <= src + 1e-7, "SR {sr} > SRc {src}");
        }
    }

    #[test]
    fn noise_model_reductions_agree() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        let sr = steering_robustness(&sigma).unwrap().value;
        let via_model = robustness_with_noise_model(
            &RobustnessInput::State(sigma.clone()),
            &NoiseModel::GeneralState,
        )
        .unwrap()
        .value;
        assert!((sr - via_model).abs() < 1e-8, "{sr} vs {via_model}");

        let src = consistent_steering_robustness(&sigma).unwrap().value;
        let via_model = robustness_with_noise_model(
            &RobustnessInput::State(sigma.clone()),
            &NoiseModel::ConsistentState,
        )
        .unwrap()
        .value;
        assert!((src - via_model).abs() < 1e-8, "{src} vs {via_model}");

        let meas = presets::pauli_pair().unwrap();
        let ir = incompatibility_robustness(&meas).unwrap().value;
        let via_model = robustness_with_noise_model(
            &RobustnessInput::Measurement(meas),
            &NoiseModel::GeneralMeasurement,
        )
        .unwrap()
        .value;
        assert!((ir - via_model).abs() < 1e-8, "{ir} vs {via_model}");
    }

    #[test]
    fn fixed_direction_noise_dominates_general() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        let sr = steering_robustness(&sigma).unwrap().value;
        // ω_{a|x} = δ_{a,0} ρ_fixed.
        let rho_fixed = HermitianOperator::identity(2).scale(0.5);
        let zero = HermitianOperator::zeros(2);
        let elements = vec![
            vec![rho_fixed.clone(), zero.clone()],
            vec![rho_fixed.clone(), zero.clone()],
        ];
        let custom = NoiseModel::Custom(CustomNoiseModel::FixedDirection { elements });
        let constrained =
            robustness_with_noise_model(&RobustnessInput::State(sigma), &custom)
                .unwrap()
                .value;
        assert!(constrained >= sr - 1e-7, "constrained {constrained} < SR {sr}");
    }

    #[test]
    fn mixing_invariant_replays() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        let sr = steering_robustness(&sigma).unwrap();
        let t = sr.value;
        let noise = match &sr.optimal_noise {
            NoiseAssemblage::State(w) => w,
            _ => unreachable!(),
        };
        let strategies = enumerate_deterministic_strategies(2, 2).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                let mix = sigma
                    .element(x, a)
                    .add(&noise.element(x, a).scale(t))
                    .scale(1.0 / (1.0 + t));
                let mut rebuilt = HermitianOperator::zeros(2);
                for (l, comp) in sr.decomposition.iter().enumerate() {
                    if strategies.responds(a, x, l) {
                        rebuilt = rebuilt.add(comp);
                    }
                }
                let err = (mix.matrix() - rebuilt.matrix()).norm();
                assert!(err < 1e-7, "replay error {err} at ({a}|{x})");
            }
        }
    }

    #[test]
    fn theorem3_on_random_instances() {
        let mut rng = rng_for(63, "thm3-unit", 0);
        for trial in 0..3 {
            let sigma = random_state_assemblage(&mut rng, 2, 2, 2, true).unwrap();
            let seo = compute_seo(&sigma).unwrap();
            let ir = incompatibility_robustness(&seo).unwrap().value;
            for _ in 0..2 {
                let k = crate::random::random_contraction(&mut rng, 2, 0.05);
                let tau = apply_filter(&sigma, &k).unwrap().output;
                let sr = steering_robustness(&tau).unwrap().value;
                assert!(sr <= ir + 1e-6, "trial {trial}: SR {sr} > IR {ir}");
            }
        }
    }

    #[test]
    fn induced_measure_mandatory_seed_lower_bound() {
        let meas = presets::pauli_pair().unwrap();
        // With zero extra restarts, the maximally mixed seed already gives
        // at least SR(E/2).
        let config = InducedSearchConfig { n_restarts: 1, max_evals_per_restart: 60, seed: 0 };
        let result = steering_induced_incompatibility(
            &meas,
            InducedMeasure::SteeringRobustness,
            &config,
        )
        .unwrap();
        let sr = steering_robustness(&presets::pauli_halved_assemblage().unwrap())
            .unwrap()
            .value;
        assert!(result.lower_bound >= sr - 1e-7);
    }

    #[test]
    fn induced_measure_vanishes_on_compatible_input() {
        let z0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let z1 = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let meas = MeasurementAssemblage::full_space(vec![
            vec![z0.clone(), z1.clone()],
            vec![z0, z1],
        ])
        .unwrap();
        let config = InducedSearchConfig { n_restarts: 3, max_evals_per_restart: 60, seed: 1 };
        let result = steering_induced_incompatibility(
            &meas,
            InducedMeasure::SteeringRobustness,
            &config,
        )
        .unwrap();
        assert!(result.lower_bound < 1e-6, "bound {}", result.lower_bound);
    }

    #[test]
    fn free_op_identity_and_coarse_graining() {
        let meas = presets::pauli_pair().unwrap();
        // Identity post-processing; outcome table indexed [ω][x][x'][a][a'].
        let identity_op = FreeOpSpec {
            prior: vec![1.0],
            input_post: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
            outcome_post: vec![vec![vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2]; 2]],
            instrument: None,
        };
        let out = apply_incompatibility_free_op(&meas, &identity_op).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                let d = (out.element(x, a).matrix() - meas.element(x, a).matrix()).norm();
                assert!(d < 1e-12);
            }
        }

        // Full coarse graining: always output 0 → jointly measurable.
        let coarse = FreeOpSpec {
            prior: vec![1.0],
            input_post: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
            outcome_post: vec![vec![
                vec![vec![vec![1.0, 0.0], vec![1.0, 0.0]]; 2]; 2
            ]],
            instrument: None,
        };
        let out = apply_incompatibility_free_op(&meas, &coarse).unwrap();
        assert!(jm_membership(&out).unwrap().is_member());
    }

    #[test]
    fn free_ops_are_monotone() {
        let mut rng = rng_for(64, "monotone-unit", 0);
        for _ in 0..3 {
            let meas = random_measurement_assemblage(&mut rng, 2, 2, true).unwrap();
            let ir_before = incompatibility_robustness(&meas).unwrap().value;
            let op = random_free_op(&mut rng, 2, 2, 2);
            let mapped = apply_incompatibility_free_op(&meas, &op).unwrap();
            let ir_after = incompatibility_robustness(&mapped).unwrap().value;
            assert!(ir_after <= ir_before + 1e-6, "{ir_after} > {ir_before}");
        }
        for _ in 0..3 {
            let sigma = random_state_assemblage(&mut rng, 2, 2, 2, true).unwrap();
            let sr_before = steering_robustness(&sigma).unwrap().value;
            let op = random_free_op(&mut rng, 2, 2, 2);
            let mapped = apply_steering_free_op(&sigma, &op).unwrap();
            let sr_after = steering_robustness(&mapped).unwrap().value;
            assert!(sr_after <= sr_before + 1e-6, "{sr_after} > {sr_before}");
        }
    }

    #[test]
    fn steering_free_op_special_cases() {
        let sigma = presets::pauli_halved_assemblage().unwrap();
        // Single ω, identity map and relabelings.
        let op = FreeOpSpec {
            prior: vec![1.0],
            input_post: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
            outcome_post: vec![vec![
                vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2]; 2
            ]],
            instrument: Some(vec![vec![GeneralOperator::identity(2)]]),
        };
        let out = apply_steering_free_op(&sigma, &op).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                let d = (out.element(x, a).matrix() - sigma.element(x, a).matrix()).norm();
                assert!(d < 1e-12);
            }
        }
    }

    #[test]
    fn incompatibility_convexity_spot_check() {
        let mut rng = rng_for(65, "convexity", 0);
        for _ in 0..2 {
            let e1 = random_measurement_assemblage(&mut rng, 2, 2, true).unwrap();
            let e2 = random_measurement_assemblage(&mut rng, 2, 2, true).unwrap();
            let p = 0.37;
            let mixed_elements: Vec<Vec<HermitianOperator>> = (0..2)
                .map(|x| {
                    (0..2)
                        .map(|a| {
                            e1.element(x, a).scale(p).add(&e2.element(x, a).scale(1.0 - p))
                        })
                        .collect()
                })
                .collect();
            let mixed = MeasurementAssemblage::full_space(mixed_elements).unwrap();
            let ir_mix = incompatibility_robustness(&mixed).unwrap().value;
            let ir1 = incompatibility_robustness(&e1).unwrap().value;
            let ir2 = incompatibility_robustness(&e2).unwrap().value;
            assert!(ir_mix <= p * ir1 + (1.0 - p) * ir2 + 1e-6);
        }
    }

    #[test]
    fn identical_povms_are_compatible() {
        let mut rng = rng_for(66, "identical", 0);
        let single = random_measurement_assemblage(&mut rng, 2, 1, true).unwrap();
        let doubled = MeasurementAssemblage::full_space(vec![
            single.elements()[0].clone(),
            single.elements()[0].clone(),
        ])
        .unwrap();
        let ir = incompatibility_robustness(&doubled).unwrap().value;
        assert!(ir <= 1e-7);
    }

    #[test]
    fn random_densities_give_valid_induced_assemblages() {
        let mut rng = rng_for(67, "induced-valid", 0);
        let meas = presets::pauli_pair().unwrap();
        for _ in 0..3 {
            let eta = random_density(&mut rng, 2);
            let sqrt = matrix_sqrt(&eta).unwrap();
            let elements: Vec<Vec<HermitianOperator>> = meas
                .elements()
                .iter()
                .map(|row| row.iter().map(|e| e.conjugate_by(sqrt.matrix())).collect())
                .collect();
            let asm = StateAssemblage::new(elements).unwrap();
            assert!(asm.validate().is_empty());
        }
    }
}
