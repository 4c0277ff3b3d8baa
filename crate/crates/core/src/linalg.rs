//! Dense kernels: Hermitian eigendecomposition, SVD, pseudo-inverse, PSD
//! square root and the range-inclusion (Douglas) factorization.

use std::hash::{Hash, Hasher};
use std::ops::Deref;

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::spaces::HVector;
use crate::{CMatrix, C64};

/// Relative asymmetry accepted by the Hermitian kernels.
pub const HERMITIAN_RTOL: f64 = 1e-10;
/// Eigenvalues below `-PSD_CLIP_RTOL * lambda_max` make a matrix indefinite.
pub const PSD_CLIP_RTOL: f64 = 1e-10;

/// Dense complex matrix viewed as a map between finite-dimensional Hilbert
/// spaces: `ncols` is the domain dimension, `nrows` the codomain dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap(CMatrix);

impl LinearMap {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidParameter(format!(
                "linear map needs positive dimensions, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("linear map has non-finite entries".into()));
        }
        Ok(Self(matrix))
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(CMatrix::identity(d, d))
    }

    pub fn zeros(codomain_dim: usize, domain_dim: usize) -> Result<Self> {
        Self::new(CMatrix::zeros(codomain_dim, domain_dim))
    }

    pub fn from_real(rows: usize, cols: usize, row_major: &[f64]) -> Result<Self> {
        check_dim("real matrix entries", rows * cols, row_major.len())?;
        Self::new(CMatrix::from_row_iterator(
            rows,
            cols,
            row_major.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn domain_dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> LinearMap {
        LinearMap(self.0.adjoint())
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &LinearMap) -> Result<LinearMap> {
        check_dim("composition", self.domain_dim(), other.codomain_dim())?;
        Ok(LinearMap(&self.0 * &other.0))
    }

    pub fn apply(&self, v: &HVector) -> Result<HVector> {
        check_dim("linear map application", self.domain_dim(), v.dim())?;
        HVector::from_vector(&self.0 * v.coords())
    }

    /// Spectral norm.
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

impl Deref for LinearMap {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigendecomposition `M = V diag(lambda) V^*` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactor {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
    /// Hash of the bit patterns of the decomposed matrix.
    pub source: u64,
}

impl SpectralFactor {
    pub fn reconstruct(&self) -> CMatrix {
        let lam = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| C64::new(l, 0.0)),
        );
        let v = &self.eigenvectors;
        v * CMatrix::from_diagonal(&lam) * v.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn matrix_hash(m: &CMatrix) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (m.nrows(), m.ncols()).hash(&mut h);
    for z in m.iter() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Frobenius-relative distance of a square matrix from Hermitian.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        0.0
    } else {
        (m - m.adjoint()).norm() / scale
    }
}

/// Ascending eigenpairs of the Hermitian part of `m`, without input checks.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(m: &LinearMap) -> Result<SpectralFactor> {
    check_dim("hermitian_eig (square matrix)", m.nrows(), m.ncols())?;
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    let (eigenvalues, eigenvectors) = eigh(m);
    Ok(SpectralFactor {
        eigenvalues,
        eigenvectors,
        source: matrix_hash(m),
    })
}

/// Thin singular value decomposition `A = U diag(s) V^*`, `s` descending.
#[derive(Debug, Clone)]
pub(crate) struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

fn to_faer(a: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn diag_values(s: faer::diag::DiagRef<'_, C64>) -> Vec<f64> {
    s.column_vector().iter().map(|z| z.re).collect()
}

pub(crate) fn svd(a: &CMatrix) -> Svd {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return Svd {
            u: CMatrix::zeros(a.nrows(), 0),
            s: Vec::new(),
            v: CMatrix::zeros(a.ncols(), 0),
        };
    }
    let dec = to_faer(a).thin_svd().expect("SVD converges on finite input");
    Svd {
        u: from_faer(dec.U()),
        s: diag_values(dec.S()),
        v: from_faer(dec.V()),
    }
}

/// Singular values (descending) and a full unitary set of right singular
/// vectors of `a`, padding with zero singular values when `a` is wide.
pub(crate) fn right_svd(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return (vec![0.0; n], CMatrix::identity(n, n));
    }
    let dec = to_faer(a).svd().expect("SVD converges on finite input");
    let mut s = diag_values(dec.S());
    s.resize(n, 0.0);
    (s, from_faer(dec.V()))
}

pub(crate) fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    to_faer(a)
        .singular_values()
        .expect("SVD converges on finite input")
}

/// Spectral norm, from the largest eigenvalue of the smaller Gram matrix.
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.adjoint()
    } else {
        a.adjoint() * a
    };
    let (values, _) = eigh(&gram);
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Numerical rank: singular values above `rtol * sigma_max`.
pub fn rank(a: &CMatrix, rtol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rtol * smax).count()
}

/// Orthonormal basis of the column space of `a` at relative cutoff `rtol`.
pub fn range_basis(a: &CMatrix, rtol: f64) -> CMatrix {
    if a.is_empty() {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let dec = svd(a);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let r = if smax == 0.0 {
        0
    } else {
        dec.s.iter().filter(|&&x| x > rtol * smax).count()
    };
    dec.u.columns(0, r).into_owned()
}

fn check_rtol(rtol: f64) -> Result<()> {
    if rtol > 0.0 && rtol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rtol must lie in (0, 1), got {rtol}")))
    }
}

pub(crate) fn pinv_matrix(w: &CMatrix, rtol: f64) -> CMatrix {
    let (r, c) = w.shape();
    if w.is_empty() {
        return CMatrix::zeros(c, r);
    }
    let dec = svd(w);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(c, r);
    if smax == 0.0 {
        return out;
    }
    for (k, &sk) in dec.s.iter().enumerate() {
        if sk > rtol * smax {
            let vk = dec.v.column(k);
            let uk = dec.u.column(k);
            out += (vk * uk.adjoint()).unscale(sk);
        }
    }
    out
}

/// Moore-Penrose pseudo-inverse keeping singular values above `rtol * sigma_max`.
/// The zero matrix maps to the zero matrix.
pub fn pinv(w: &LinearMap, rtol: f64) -> Result<LinearMap> {
    check_rtol(rtol)?;
    Ok(LinearMap(pinv_matrix(w, rtol)))
}

pub(crate) fn douglas_matrix(t1: &CMatrix, t2star: &CMatrix, rtol: f64) -> (CMatrix, f64) {
    let m = pinv_matrix(t2star, rtol) * t1;
    let scale = op_norm(t1).max(f64::MIN_POSITIVE);
    let residual = op_norm(&(t1 - t2star * &m)) / scale;
    (m, residual)
}

/// Minimal-norm solution `M = pinv(T2star) T1` of `T1 = T2star M` and the
/// relative residual `||T1 - T2star M|| / ||T1||`. A residual at or below
/// [`crate::FACTORIZATION_THRESHOLD`] certifies `R(T1)` inside `R(T2star)`.
pub fn douglas_factor(t1: &LinearMap, t2star: &LinearMap, rtol: f64) -> Result<(LinearMap, f64)> {
    check_rtol(rtol)?;
    check_dim("douglas_factor (shared codomain)", t2star.nrows(), t1.nrows())?;
    let (m, residual) = douglas_matrix(t1, t2star, rtol);
    Ok((LinearMap(m), residual))
}

pub(crate) fn sqrt_psd_matrix(m: &CMatrix) -> Result<CMatrix> {
    let (values, v) = eigh(m);
    let lmax = values.last().copied().unwrap_or(0.0);
    let lmin = values.first().copied().unwrap_or(0.0);
    if lmin < -PSD_CLIP_RTOL * lmax.max(0.0) || (lmax <= 0.0 && lmin < 0.0) {
        return Err(Error::Indefinite { min: lmin, max: lmax });
    }
    let floor = PSD_CLIP_RTOL * lmax;
    let roots = DVector::from_iterator(
        values.len(),
        values
            .iter()
            .map(|&l| C64::new(if l > floor { l.sqrt() } else { 0.0 }, 0.0)),
    );
    Ok(&v * CMatrix::from_diagonal(&roots) * v.adjoint())
}

/// Hermitian PSD square root. Eigenvalues at or below `1e-10 * lambda_max`
/// are treated as zero; anything more negative is an error.
pub fn sqrt_psd(m: &LinearMap) -> Result<LinearMap> {
    check_dim("sqrt_psd (square matrix)", m.nrows(), m.ncols())?;
    let asymmetry = hermitian_asymmetry(m);
    if asymmetry > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(LinearMap(sqrt_psd_matrix(m)?))
}

/// `||P^2 - P|| + ||P - P^*||` relative to `max(||P||, 1)`, spectral norms.
pub fn projector_residual(p: &CMatrix) -> f64 {
    if p.nrows() != p.ncols() {
        return f64::INFINITY;
    }
    let scale = op_norm(p).max(1.0);
    (op_norm(&(p * p - p)) + op_norm(&(p - p.adjoint()))) / scale
}

/// Best lower bound `inf <Gh, h> / ||T^* h||^2` over `T^* h != 0`, where
/// `G = C^* C` for an `m x d` matrix `C` and `T` is `d x j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    /// 0 when `R(T)` is not inside `R(C^*)`, `+inf` when `T = 0`.
    pub alpha: f64,
    /// `||T^* V_0|| / ||T||` for an orthonormal basis `V_0` of `N(C)`.
    pub inclusion_residual: f64,
    /// Numerical rank of `C`.
    pub rank: usize,
}

/// Relative leak of `R(T)` outside `R(C^*)` above which the bound is 0.
pub const INCLUSION_THRESHOLD: f64 = 1e-9;

/// Computes [`LowerBound`] from singular vectors of `C`, never forming `C^* C`,
/// so that null directions are resolved at full working precision.
pub(crate) fn optimal_lower_bound(c: &CMatrix, t: &CMatrix, rtol: f64) -> LowerBound {
    let d = c.ncols();
    debug_assert_eq!(t.nrows(), d);
    let tnorm = op_norm(t);
    let (s, v) = right_svd(c);
    let smax = s.first().copied().unwrap_or(0.0);
    let r = if smax == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > rtol * smax).count()
    };
    if tnorm == 0.0 {
        return LowerBound {
            alpha: f64::INFINITY,
            inclusion_residual: 0.0,
            rank: r,
        };
    }
    let tadj = t.adjoint();
    let inclusion_residual = if r < d {
        op_norm(&(&tadj * v.columns(r, d - r))) / tnorm
    } else {
        0.0
    };
    if inclusion_residual > INCLUSION_THRESHOLD || r == 0 {
        return LowerBound {
            alpha: 0.0,
            inclusion_residual,
            rank: r,
        };
    }
    // alpha = 1 / sigma_max(Sigma_r^{-1} V_r^* T)^2
    let mut z = v.columns(0, r).adjoint() * t;
    for k in 0..r {
        z.row_mut(k).unscale_mut(s[k]);
    }
    let g = op_norm(&z);
    LowerBound {
        alpha: 1.0 / (g * g),
        inclusion_residual,
        rank: r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let a = random_matrix(&mut rng(seed), n, n);
        (&a + a.adjoint()).scale(0.5)
    }

    #[test]
    fn eig_identity_and_ordering() {
        let f = hermitian_eig(&LinearMap::identity(3).unwrap()).unwrap();
        assert_eq!(f.eigenvalues, vec![1.0, 1.0, 1.0]);
        let d = LinearMap::diagonal(&[re(3.0), re(1.0), re(2.0)]).unwrap();
        let f = hermitian_eig(&d).unwrap();
        for (got, want) in f.eigenvalues.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let m = random_hermitian(6, 1);
        let f = hermitian_eig(&LinearMap::new(m.clone()).unwrap()).unwrap();
        assert!(rel(&f.reconstruct(), &m) <= 1e-10);
        assert!(f.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &f.eigenvectors;
        assert!(rel(&(v.adjoint() * v), &CMatrix::identity(6, 6)) < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = LinearMap::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn pinv_examples() {
        let i4 = LinearMap::identity(4).unwrap();
        assert!(rel(&pinv(&i4, 1e-12).unwrap(), &i4) < 1e-15);
        let d = LinearMap::diagonal(&[re(2.0), re(0.0)]).unwrap();
        let expect = CMatrix::from_diagonal(&DVector::from_vec(vec![re(0.5), re(0.0)]));
        assert!(rel(&pinv(&d, 1e-12).unwrap(), &expect) < 1e-15);
        let w = LinearMap::new(random_matrix(&mut rng(2), 5, 3)).unwrap();
        let wp = pinv(&w, 1e-12).unwrap();
        assert!(op_norm(&(&*wp * &*w - CMatrix::identity(3, 3))) <= 1e-9);
    }

    #[test]
    fn pinv_zero_and_bad_rtol() {
        let z = LinearMap::zeros(2, 3).unwrap();
        let zp = pinv(&z, 1e-12).unwrap();
        assert_eq!(zp.shape(), (3, 2));
        assert!(zp.is_zero());
        assert!(pinv(&z, 0.0).is_err());
        assert!(pinv(&z, 1.0).is_err());
    }

    #[test]
    fn pinv_moore_penrose_rank_deficient() {
        let mut r = rng(3);
        let w = random_matrix(&mut r, 6, 2) * random_matrix(&mut r, 2, 4);
        let wp = pinv_matrix(&w, 1e-12);
        let scale = op_norm(&w);
        assert!(op_norm(&(&w * &wp * &w - &w)) <= 1e-9 * scale);
        assert!(op_norm(&(&wp * &w * &wp - &wp)) <= 1e-9 * op_norm(&wp));
        let p = &w * &wp;
        let q = &wp * &w;
        assert!(op_norm(&(&p - p.adjoint())) <= 1e-9);
        assert!(op_norm(&(&q - q.adjoint())) <= 1e-9);
        // W W^+ f = f on R(W); W^+ kills R(W)^perp.
        let f = &w * random_matrix(&mut r, 4, 1);
        assert!((&p * &f - &f).norm() <= 1e-9 * f.norm());
        let g = random_matrix(&mut r, 6, 1);
        let g_perp = &g - &p * &g;
        assert!((&wp * &g_perp).norm() <= 1e-9 * g.norm());
    }

    #[test]
    fn douglas_examples() {
        let mut r = rng(4);
        let t2 = LinearMap::new(random_matrix(&mut r, 3, 5)).unwrap();
        let (m, res) = douglas_factor(&t2, &t2, 1e-12).unwrap();
        assert!(res <= 1e-12);
        assert!(projector_residual(&m) < 1e-10);
        assert_eq!(rank(&m, 1e-10), 3);

        let t1 = LinearMap::new(random_matrix(&mut r, 4, 2)).unwrap();
        let (m, res) = douglas_factor(&t1, &LinearMap::identity(4).unwrap(), 1e-12).unwrap();
        assert!(res == 0.0 || res < 1e-15);
        assert!(rel(&m, &t1) < 1e-14);
    }

    #[test]
    fn douglas_detects_outward_column() {
        // T2star has range span{e1, e2} in C^3; T1 adds a rank-1 term along e3.
        let mut r = rng(5);
        let mut t2 = random_matrix(&mut r, 3, 4);
        t2.row_mut(2).fill(re(0.0));
        let m0 = random_matrix(&mut r, 4, 2);
        let mut t1 = &t2 * &m0;
        let bump = op_norm(&t1);
        t1[(2, 0)] += re(bump);
        let (_, res) = douglas_factor(
            &LinearMap::new(t1).unwrap(),
            &LinearMap::new(t2).unwrap(),
            1e-12,
        )
        .unwrap();
        assert!(res >= 0.1, "residual {res}");
    }

    #[test]
    fn douglas_dimension_error() {
        let a = LinearMap::zeros(3, 2).unwrap();
        let b = LinearMap::zeros(4, 2).unwrap();
        assert!(matches!(
            douglas_factor(&a, &b, 1e-12),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sqrt_examples() {
        let i = LinearMap::identity(3).unwrap();
        assert!(rel(&sqrt_psd(&i).unwrap(), &i) < 1e-14);
        let d = LinearMap::diagonal(&[re(4.0), re(9.0)]).unwrap();
        let expect = CMatrix::from_diagonal(&DVector::from_vec(vec![re(2.0), re(3.0)]));
        assert!(rel(&sqrt_psd(&d).unwrap(), &expect) < 1e-14);
        let b = random_matrix(&mut rng(6), 5, 5);
        let m = &b * b.adjoint();
        let s = sqrt_psd(&LinearMap::new(m.clone()).unwrap()).unwrap();
        assert!(rel(&(&*s * &*s), &m) <= 1e-9);
        assert!(hermitian_asymmetry(&s) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let d = LinearMap::diagonal(&[re(1.0), re(-0.5)]).unwrap();
        assert!(matches!(sqrt_psd(&d), Err(Error::Indefinite { .. })));
        let tiny = LinearMap::diagonal(&[re(1.0), re(-1e-13)]).unwrap();
        assert!(sqrt_psd(&tiny).is_ok());
    }

    #[test]
    fn lower_bound_of_rank_one_overlap() {
        // C^*C = [[1,1],[1,1]], T = e1: e2 - e1 is null for C but T^* leaks.
        let c = CMatrix::from_row_slice(1, 2, &[re(1.0), re(1.0)]);
        let t = CMatrix::from_row_slice(2, 1, &[re(1.0), re(0.0)]);
        let lb = optimal_lower_bound(&c, &t, 1e-12);
        assert_eq!(lb.alpha, 0.0);
        assert!(lb.inclusion_residual > 0.5);
        // T = e1 + e2 lies in R(C^*): <Gh,h> = |h1+h2|^2 = ||T^*h||^2.
        let t = CMatrix::from_row_slice(2, 1, &[re(1.0), re(1.0)]);
        let lb = optimal_lower_bound(&c, &t, 1e-12);
        assert!((lb.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_matches_min_eigenvalue_for_identity() {
        let c = random_matrix(&mut rng(7), 7, 4);
        let lb = optimal_lower_bound(&c, &CMatrix::identity(4, 4), 1e-12);
        let (values, _) = eigh(&(c.adjoint() * &c));
        assert!((lb.alpha - values[0]).abs() <= 1e-10 * values[3]);
        let zero = optimal_lower_bound(&c, &CMatrix::zeros(4, 2), 1e-12);
        assert!(zero.alpha.is_infinite());
    }

    #[test]
    fn op_norm_matches_svd() {
        let a = random_matrix(&mut rng(8), 4, 9);
        let s = singular_values(&a);
        assert!((op_norm(&a) - s[0]).abs() < 1e-12 * s[0]);
        let (sv, v) = right_svd(&a);
        assert_eq!(sv.len(), 9);
        assert!(rel(&(v.adjoint() * &v), &CMatrix::identity(9, 9)) < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unitary(n: usize, seed: u64) -> CMatrix {
            crate::instances::random_unitary(&mut rng(seed), n)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn pinv_fixes_projectors(n in 1usize..7, k in 0usize..7, seed in any::<u64>()) {
                let k = k.min(n);
                let q = unitary(n, seed).columns(0, k).into_owned();
                let p = &q * q.adjoint();
                let pp = pinv_matrix(&p, 1e-12);
                prop_assert!((&pp - &p).norm() <= 1e-10 * (1.0 + p.norm()));
            }

            #[test]
            fn douglas_solution_is_minimal_norm(rows in 1usize..6, inner in 1usize..7,
                                                cols in 1usize..4, seed in any::<u64>()) {
                let mut r = rng(seed);
                let t2 = random_matrix(&mut r, rows, inner);
                let t1 = &t2 * random_matrix(&mut r, inner, cols);
                let (m, _) = douglas_matrix(&t1, &t2, 1e-12);
                // Kernel perturbation: N = (I - pinv(T2) T2) X.
                let proj = CMatrix::identity(inner, inner) - pinv_matrix(&t2, 1e-12) * &t2;
                let n = proj * random_matrix(&mut r, inner, cols);
                prop_assert!((&t2 * &n).norm() <= 1e-9 * (1.0 + t2.norm() * n.norm()));
                prop_assert!(m.norm() <= (&m + &n).norm() + 1e-12);
            }

            #[test]
            fn sqrt_commutes_with_unitary_conjugation(n in 1usize..7, seed in any::<u64>()) {
                let mut r = rng(seed);
                let b = random_matrix(&mut r, n, n);
                let m = &b * b.adjoint();
                let u = crate::instances::random_unitary(&mut r, n);
                let lhs = sqrt_psd_matrix(&(&u * &m * u.adjoint())).unwrap();
                let rhs = &u * sqrt_psd_matrix(&m).unwrap() * u.adjoint();
                prop_assert!((&lhs - &rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
            }
        }
    }
}
