//! Seeded random instances for the equivalence harnesses and property tests.
//!
//! Spectra are controlled: every nonzero singular value lies in `[0.5, 2]`
//! and every other one is exactly zero, so rank decisions are never close
//! calls at the certifiers' tolerances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::frame::VectorFamily;
use crate::linalg::LinearMap;
use crate::spaces::MeasureSpace;
use crate::{CMatrix, C64};

/// Largest Hilbert-space dimension drawn by the instance generators.
pub const MAX_DIM: usize = 8;
/// Largest number of sample points drawn by the instance generators.
pub const MAX_POINTS: usize = 32;

pub fn rng_for(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(index))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = random_matrix(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// `n x k` matrix with orthonormal columns.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> CMatrix {
    random_unitary(rng, n).columns(0, k).into_owned()
}

fn controlled_spectrum<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.5..2.0)).collect()
}

/// `left * diag(s) * right^*` with `s` drawn in `[0.5, 2]`.
fn compose_spectrum<R: Rng + ?Sized>(rng: &mut R, left: &CMatrix, right: &CMatrix) -> CMatrix {
    let s = controlled_spectrum(rng, left.ncols());
    let mut scaled = left.clone();
    for (k, sk) in s.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*sk);
    }
    scaled * right.adjoint()
}

/// Quadrature weights in `(0.5, 2)`.
pub fn random_space<R: Rng + ?Sized>(rng: &mut R, m: usize) -> MeasureSpace {
    let w = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
    MeasureSpace::new(w).expect("weights drawn positive")
}

/// Family on `m` points in `C^d` whose analysis operator has rank `r` and
/// whose right singular space is spanned by the columns of `range`
/// (`d x r`, orthonormal).
pub fn family_with_range<R: Rng + ?Sized>(rng: &mut R, m: usize, range: &CMatrix) -> VectorFamily {
    let r = range.ncols();
    let space = random_space(rng, m);
    let left = random_isometry(rng, m, r);
    let c = compose_spectrum(rng, &left, range);
    VectorFamily::from_analysis(space, &c).expect("consistent shapes")
}

/// How an operator was drawn relative to the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    /// Range drawn inside the synthesis range, so the inclusion holds.
    Included,
    /// Range drawn independently of the family.
    Generic,
}

/// One harness instance: family `psi` in `C^d_h` and an operator into `C^d_h`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub psi: VectorFamily,
    pub operator: LinearMap,
    pub mode: InstanceMode,
    pub family_rank: usize,
    pub operator_rank: usize,
}

/// Random K-frame candidate `(psi, K)` with `K: C^d_j -> C^d_h`.
pub fn random_k_instance(base_seed: u64, index: u64) -> Instance {
    let mut rng = rng_for(base_seed, index);
    let d_h = rng.random_range(1..=MAX_DIM);
    let d_j = rng.random_range(1..=MAX_DIM);
    random_instance(&mut rng, d_h, d_j)
}

/// Random square candidate `(psi, A)` on `C^d`.
pub fn random_square_instance(base_seed: u64, index: u64) -> Instance {
    let mut rng = rng_for(base_seed, index);
    let d = rng.random_range(1..=MAX_DIM);
    random_instance(&mut rng, d, d)
}

fn random_instance(rng: &mut ChaCha8Rng, d_h: usize, d_j: usize) -> Instance {
    let m = rng.random_range(1..=MAX_POINTS);
    let family_rank = rng.random_range(1..=d_h.min(m));
    let basis = random_unitary(rng, d_h);
    let range = basis.columns(0, family_rank).into_owned();
    let psi = family_with_range(rng, m, &range);
    let mode = if rng.random_bool(0.5) {
        InstanceMode::Included
    } else {
        InstanceMode::Generic
    };
    let (left, operator_rank) = match mode {
        InstanceMode::Included => {
            let k = rng.random_range(1..=family_rank.min(d_j));
            (&range * random_isometry(rng, family_rank, k), k)
        }
        InstanceMode::Generic => {
            let k = rng.random_range(1..=d_h.min(d_j));
            (random_isometry(rng, d_h, k), k)
        }
    };
    let right = random_isometry(rng, d_j, operator_rank);
    let operator =
        LinearMap::new(compose_spectrum(rng, &left, &right)).expect("finite entries");
    Instance {
        psi,
        operator,
        mode,
        family_rank,
        operator_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{op_norm, rank};

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_for(11, 0);
        for n in 1..6 {
            let u = random_unitary(&mut rng, n);
            let err = (u.adjoint() * &u - CMatrix::identity(n, n)).norm();
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn instances_are_reproducible_and_controlled() {
        for i in 0..20 {
            let a = random_k_instance(7, i);
            let b = random_k_instance(7, i);
            assert_eq!(a.psi.vectors(), b.psi.vectors());
            assert_eq!(a.operator, b.operator);
            assert_eq!(rank(&a.operator, 1e-9), a.operator_rank);
            let c = crate::frame::analysis_operator(&a.psi);
            assert_eq!(rank(c.matrix(), 1e-9), a.family_rank);
            assert!(op_norm(&a.operator) <= 2.0 + 1e-12);
        }
    }
}
