//! Reproducible random instances: Ginibre matrices, Haar unitaries, random
//! densities, POVMs, assemblages, bipartite states and filter contractions.
//!
//! All randomness flows from a caller-supplied seed through [`rng_for`],
//! which derives an independent ChaCha stream per (seed, label, index).
//! Nothing here reads ambient entropy.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assemblage::{steer_from_state, BipartiteState, MeasurementAssemblage, StateAssemblage};
use crate::error::Result;
use crate::filter::FilterKraus;
use crate::linalg::{cpx, CMatrix, CVector, GeneralOperator, HermitianOperator};

/// Derives a deterministic RNG stream for a named purpose. Streams for
/// different labels or indices are independent, so batch work can fan out
/// without coordinating on a shared generator.
pub fn rng_for(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    // FNV-1a over the label, mixed with seed and index via splitmix rounds.
    let mut h = 0xcbf29ce484222325u64;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut z = seed ^ h.rotate_left(17) ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    let mut next = || {
        z = z.wrapping_add(0x9e3779b97f4a7c15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^ (x >> 31)
    };
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&next().to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; consumes two uniforms per call.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Square complex Ginibre matrix with unit-variance entries.
pub fn ginibre(rng: &mut impl Rng, dim: usize) -> CMatrix {
    DMatrix::from_fn(dim, dim, |_, _| {
        Complex::new(standard_normal(rng), standard_normal(rng))
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase
/// convention that makes the R diagonal positive.
pub fn haar_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let g = ginibre(rng, dim);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cpx(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random density matrix from the Hilbert-Schmidt (Ginibre) ensemble.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim);
    let p = HermitianOperator::symmetrize(&g * g.adjoint());
    p.scale(1.0 / p.trace())
}

/// Random pure state vector.
pub fn random_pure(rng: &mut impl Rng, dim: usize) -> CVector {
    let v = DVector::from_fn(dim, |_, _| Complex::new(standard_normal(rng), standard_normal(rng)));
    let n = v.norm();
    v.scale(1.0 / n)
}

/// Random two-outcome projective measurement pair: a Haar basis split into
/// a rank-`k` projector and its complement.
fn random_projective_pair(rng: &mut impl Rng, dim: usize) -> (HermitianOperator, HermitianOperator) {
    let u = haar_unitary(rng, dim);
    let k = 1 + rng.gen_range(0..dim - 1);
    let mut p = CMatrix::zeros(dim, dim);
    for j in 0..k {
        let col = u.column(j).into_owned();
        p += &col * col.adjoint();
    }
    let p = HermitianOperator::symmetrize(p);
    let q = HermitianOperator::symmetrize(CMatrix::identity(dim, dim) - p.matrix());
    (p, q)
}

/// Random measurement assemblage with two outcomes per input: sharp
/// projective pairs, optionally smeared towards the trivial POVM.
pub fn random_measurement_assemblage(
    rng: &mut impl Rng,
    dim: usize,
    n_inputs: usize,
    sharp: bool,
) -> Result<MeasurementAssemblage> {
    let mut elements = Vec::with_capacity(n_inputs);
    for _ in 0..n_inputs {
        let (p, q) = random_projective_pair(rng, dim);
        let (p, q) = if sharp {
            (p, q)
        } else {
            let visibility = 0.5 + 0.5 * rng.gen::<f64>();
            let iden = HermitianOperator::identity(dim).scale((1.0 - visibility) / 2.0);
            (p.scale(visibility).add(&iden), q.scale(visibility).add(&iden))
        };
        elements.push(vec![p, q]);
    }
    MeasurementAssemblage::full_space(elements)
}

/// Random bipartite state: a Haar-random pure state (generically
/// entangled), or a product of Ginibre densities.
pub fn random_bipartite_state(
    rng: &mut impl Rng,
    dim_a: usize,
    dim_b: usize,
    entangled: bool,
) -> Result<BipartiteState> {
    let mat = if entangled {
        let psi = random_pure(rng, dim_a * dim_b);
        HermitianOperator::projector_onto(&psi)
    } else {
        let a = random_density(rng, dim_a);
        let b = random_density(rng, dim_b);
        HermitianOperator::symmetrize(a.matrix().kronecker(b.matrix()))
    };
    BipartiteState::new(dim_a, dim_b, mat)
}

/// Random state assemblage obtained by steering: a random bipartite state
/// measured with random sharp two-outcome POVMs on a same-dimensional A.
pub fn random_state_assemblage(
    rng: &mut impl Rng,
    dim: usize,
    n_inputs: usize,
    n_outputs: usize,
    entangled: bool,
) -> Result<StateAssemblage> {
    assert_eq!(n_outputs, 2, "random instances use two-outcome measurements");
    let state = random_bipartite_state(rng, dim, dim, entangled)?;
    let meas = random_measurement_assemblage(rng, dim, n_inputs, true)?;
    steer_from_state(&state, &meas)
}

/// Random single-Kraus contraction, rejection-sampled until the success
/// probability on the maximally mixed state exceeds `min_p`.
pub fn random_contraction(rng: &mut impl Rng, dim: usize, min_p: f64) -> FilterKraus {
    loop {
        let g = ginibre(rng, dim);
        let top = HermitianOperator::symmetrize(g.adjoint() * &g);
        let s_max = crate::linalg::spectral_decompose(&top)
            .expect("gram spectral")
            .first()
            .map(|p| p.0.max(1e-30).sqrt())
            .unwrap();
        let shrink = 0.3 + 0.7 * rng.gen::<f64>();
        let k = g.scale(shrink / s_max);
        let p_mixed = (&k * k.adjoint()).trace().re / dim as f64;
        if p_mixed > min_p {
            return FilterKraus::new(GeneralOperator::new(k)).expect("contraction by construction");
        }
    }
}

/// Random invertible contraction with a bounded condition number, for
/// full-rank filter-invariance experiments.
pub fn random_full_rank_contraction(rng: &mut impl Rng, dim: usize) -> FilterKraus {
    loop {
        let g = ginibre(rng, dim);
        let gram = HermitianOperator::symmetrize(g.adjoint() * &g);
        let pairs = crate::linalg::spectral_decompose(&gram).expect("gram spectral");
        let smax = pairs.first().map(|p| p.0.max(1e-30).sqrt()).unwrap();
        let smin = pairs.last().map(|p| p.0.max(0.0).sqrt()).unwrap();
        if smin / smax < 0.2 {
            continue;
        }
        let k = g.scale((0.4 + 0.5 * rng.gen::<f64>()) / smax);
        return FilterKraus::new(GeneralOperator::new(k)).expect("contraction by construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rng_streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = {
            let mut r = rng_for(7, "x", 0);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<u64> = {
            let mut r = rng_for(7, "x", 0);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut r = rng_for(7, "x", 1);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(a, c);
        let d: Vec<u64> = {
            let mut r = rng_for(7, "y", 0);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(1, "haar", 0);
        for d in [2usize, 3, 5] {
            let u = haar_unitary(&mut rng, d);
            let defect = (u.adjoint() * &u - CMatrix::identity(d, d)).norm();
            assert!(defect < 1e-10, "defect {defect}");
        }
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = rng_for(2, "dens", 0);
        for d in [2usize, 3] {
            let rho = random_density(&mut rng, d);
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(rho.min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn random_assemblages_validate() {
        let mut rng = rng_for(3, "asm", 0);
        for d in [2usize, 3] {
            let asm = random_state_assemblage(&mut rng, d, 2, 2, true).unwrap();
            assert!(asm.validate().is_empty());
            let meas = random_measurement_assemblage(&mut rng, d, 2, false).unwrap();
            assert!(meas.validate().is_empty());
        }
    }

    #[test]
    fn contraction_respects_bound() {
        let mut rng = rng_for(4, "contr", 0);
        for _ in 0..10 {
            let k = random_contraction(&mut rng, 3, 0.05);
            assert!(k.contraction_slack() >= -1e-12);
        }
    }
}
