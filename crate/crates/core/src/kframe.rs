//! K-frames and atomic systems for a bounded `K: J -> H`.
//!
//! A family `psi` in `H` is a K-frame when
//! `alpha ||K^* h||^2 <= sum_i w_i |<h, psi_i>|^2 <= beta ||h||^2`, and an
//! atomic system for `K` when `K = C^* M` for a coefficient map `M`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::frame::{
    analysis_operator, certify_bessel, frame_operator, residual_map, CertKind, FrameCertificate,
    VectorFamily,
};
use crate::linalg::{
    douglas_matrix, eigh, op_norm, optimal_lower_bound, pinv_matrix, projector_residual,
    singular_values, sqrt_psd_matrix, svd, LinearMap, INCLUSION_THRESHOLD,
};
use crate::spaces::MeasureSpace;
use crate::{CMatrix, CVector, C64, DEFAULT_FRAME_RTOL, DEFAULT_RANK_RTOL, FACTORIZATION_THRESHOLD};

/// Coefficient map `M: J -> L^2(X, mu)` in the `sqrt(w)`-embedded convention:
/// `(Mf)_i = sqrt(w_i) a_f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    matrix: CMatrix,
    gamma: f64,
}

impl CoefficientMap {
    pub fn new(matrix: CMatrix) -> Self {
        let gamma = op_norm(&matrix);
        Self { matrix, gamma }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Tight bound `||a_f||_2 <= gamma ||f||`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Unweighted coefficients `a_f(x_i)`.
    pub fn coefficients(&self, f: &CVector, sp: &MeasureSpace) -> Result<CVector> {
        check_dim("coefficient map input", self.matrix.ncols(), f.len())?;
        check_dim("coefficient map rows", sp.len(), self.matrix.nrows())?;
        let mut a = &self.matrix * f;
        for (ai, s) in a.iter_mut().zip(sp.sqrt_weights()) {
            *ai /= s;
        }
        Ok(a)
    }
}

/// `sum_i w_i psi_i phi_i^*`: the operator `T` for which
/// `<T f, h> = sum_i w_i <f, phi_i> <psi_i, h>`.
pub fn expansion_operator(phi: &VectorFamily, psi: &VectorFamily) -> Result<CMatrix> {
    check_dim("paired families (sample points)", phi.len(), psi.len())?;
    let mut weighted = phi.vectors().conjugate();
    for (i, w) in psi.space().weights().iter().enumerate() {
        weighted.row_mut(i).scale_mut(*w);
    }
    Ok(psi.vectors().transpose() * weighted)
}

/// Largest deviation, over pairs of basis vectors `e_j` of the domain and
/// `e_k` of the codomain, of `sum_i w_i <e_j, phi_i> <psi_i, e_k>` from
/// `<T e_j, e_k>`, relative to `||T||`. The sums are evaluated term by term.
pub fn weak_expansion_residual(
    phi: &VectorFamily,
    psi: &VectorFamily,
    target: &CMatrix,
) -> Result<f64> {
    check_dim("paired families (sample points)", phi.len(), psi.len())?;
    check_dim("expansion target rows", psi.dim(), target.nrows())?;
    check_dim("expansion target columns", phi.dim(), target.ncols())?;
    let w = psi.space().weights();
    let (pv, qv) = (phi.vectors(), psi.vectors());
    let mut worst = 0.0f64;
    for j in 0..phi.dim() {
        for k in 0..psi.dim() {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..psi.len() {
                acc += pv[(i, j)].conj() * qv[(i, k)] * w[i];
            }
            worst = worst.max((acc - target[(k, j)]).norm());
        }
    }
    Ok(worst / op_norm(target).max(f64::MIN_POSITIVE))
}

/// Lower-bound certificate for `alpha ||T^* h||^2 <= ||C h||^2` with pass
/// floor `alpha ||T||^2 > rtol * beta`.
pub(crate) fn operator_bound_certificate(
    kind: CertKind,
    c: &CMatrix,
    t: &CMatrix,
    rtol: f64,
) -> FrameCertificate {
    let s = c.adjoint() * c;
    let (values, _) = eigh(&s);
    let beta = values.last().copied().unwrap_or(0.0).max(0.0);
    let lb = optimal_lower_bound(c, t, DEFAULT_RANK_RTOL);
    let tnorm = op_norm(t);
    let floor = if tnorm > 0.0 {
        rtol * beta / (tnorm * tnorm)
    } else {
        0.0
    };
    let mut notes = Vec::new();
    if tnorm == 0.0 {
        notes.push("operator is zero: the lower inequality holds for every alpha".to_string());
    }
    let residuals = residual_map([(
        "range_inclusion",
        lb.inclusion_residual,
        INCLUSION_THRESHOLD,
    )]);
    let mut cert =
        FrameCertificate::assemble(kind, lb.alpha, floor, beta, rtol, residuals, notes);
    cert.diagnostics.insert("family_rank".into(), lb.rank as f64);
    cert.diagnostics.insert("operator_norm".into(), tnorm);
    cert.diagnostics.insert("rank_rtol".into(), DEFAULT_RANK_RTOL);
    cert
}

/// Optimal K-frame bounds: `beta = lambda_max(S)` and
/// `alpha = inf <S h, h> / ||K^* h||^2` over `K^* h != 0`.
///
/// `alpha` is 0 unless `R(K)` lies in the synthesis range, in which case it is
/// `1 / ||pinv(C^*) K||^2`. Passes iff `alpha ||K||^2 > 1e-10 beta`.
pub fn certify_k_frame(psi: &VectorFamily, k: &LinearMap) -> Result<FrameCertificate> {
    certify_k_frame_with(psi, k, DEFAULT_FRAME_RTOL)
}

pub fn certify_k_frame_with(psi: &VectorFamily, k: &LinearMap, rtol: f64) -> Result<FrameCertificate> {
    check_dim("K codomain against family dimension", psi.dim(), k.codomain_dim())?;
    if k.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let c = analysis_operator(psi).into_inner();
    let mut cert = operator_bound_certificate(CertKind::KFrame, &c, k, rtol);
    cert.diagnostics
        .insert("span_lambda_min".into(), span_lambda_min(&c));
    Ok(cert)
}

/// Smallest nonzero eigenvalue of `S` on the closed span of the family.
fn span_lambda_min(c: &CMatrix) -> f64 {
    let s = singular_values(c);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter()
        .copied()
        .filter(|&x| x > DEFAULT_RANK_RTOL * smax)
        .last()
        .map_or(0.0, |x| x * x)
}

/// Outcome of factoring `K = C^* M`.
#[derive(Debug, Clone)]
pub struct KFrameReport {
    pub certificate: FrameCertificate,
    pub coefficients: Option<CoefficientMap>,
    pub dual: Option<VectorFamily>,
    pub factorization_residual: f64,
}

/// Minimal-norm Douglas factor `K = C^* M` and the certificate that `psi` is
/// an atomic system for `K` with `gamma = ||M||`.
///
/// On success the weak identity `<Kf, h> = sum_i w_i a_f(x_i) <psi_i, h>` is
/// evaluated over basis pairs and the Riesz dual is attached.
pub fn atomic_system_factor(psi: &VectorFamily, k: &LinearMap) -> Result<KFrameReport> {
    check_dim("K codomain against family dimension", psi.dim(), k.codomain_dim())?;
    let c = analysis_operator(psi).into_inner();
    let (m, residual) = douglas_matrix(k, &c.adjoint(), DEFAULT_RANK_RTOL);
    let beta = certify_bessel(psi).beta;
    let coefficients = CoefficientMap::new(m);
    let ok = residual <= FACTORIZATION_THRESHOLD;
    let (identity, dual) = if ok {
        let dual = k_dual_from_m(&coefficients, psi.space())?;
        (weak_expansion_residual(&dual, psi, k)?, Some(dual))
    } else {
        (f64::NAN, None)
    };
    let gamma = coefficients.gamma();
    let alpha = if gamma > 0.0 { 1.0 / (gamma * gamma) } else { f64::INFINITY };
    let residuals = residual_map([
        ("factorization", residual, FACTORIZATION_THRESHOLD),
        ("weak_identity", identity, FACTORIZATION_THRESHOLD),
    ]);
    let mut certificate = FrameCertificate::assemble(
        CertKind::AtomicSystem,
        if ok { alpha } else { 0.0 },
        0.0,
        beta,
        DEFAULT_RANK_RTOL,
        residuals,
        Vec::new(),
    );
    certificate.diagnostics.insert("gamma".into(), gamma);
    Ok(KFrameReport {
        certificate,
        coefficients: ok.then_some(coefficients),
        dual,
        factorization_residual: residual,
    })
}

/// Riesz representers `phi_i = conj(M[i, .])^T / sqrt(w_i)`, so that
/// `<f, phi_i> = a_f(x_i)` and the analysis operator of `phi` is `M`.
pub fn k_dual_from_m(m: &CoefficientMap, sp: &MeasureSpace) -> Result<VectorFamily> {
    VectorFamily::from_analysis(sp.clone(), m.matrix())
}

/// Certifies that a K-dual `phi` of `psi` is an atomic system for `K^*`:
/// `<K^* h, f> = sum_i w_i <h, psi_i> <phi_i, f>` over basis pairs, and `phi`
/// is Bessel. The coefficients `<h, psi_i>` give `alpha = 1 / beta_psi`.
pub fn dual_is_atomic_for_adjoint(
    psi: &VectorFamily,
    phi: &VectorFamily,
    k: &LinearMap,
) -> Result<FrameCertificate> {
    check_dim("dual dimension against K domain", k.domain_dim(), phi.dim())?;
    check_dim("family dimension against K codomain", k.codomain_dim(), psi.dim())?;
    let identity = weak_expansion_residual(psi, phi, &k.adjoint())?;
    let bessel = certify_bessel(phi);
    let beta_psi = certify_bessel(psi).beta;
    let alpha = if beta_psi > 0.0 { 1.0 / beta_psi } else { f64::INFINITY };
    let residuals = residual_map([("weak_identity", identity, FACTORIZATION_THRESHOLD)]);
    Ok(FrameCertificate::assemble(
        CertKind::AtomicSystem,
        alpha,
        0.0,
        bessel.beta,
        DEFAULT_RANK_RTOL,
        residuals,
        Vec::new(),
    ))
}

/// Relative singular-value gap below which the range of `K` is ambiguous.
pub const RANGE_GAP: f64 = 10.0;

/// Numerical rank of `a`, failing when the cut is not separated by
/// [`RANGE_GAP`].
pub(crate) fn separated_rank(a: &CMatrix, rtol: f64) -> Result<usize> {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(0);
    }
    let r = s.iter().filter(|&&x| x > rtol * smax).count();
    if r < s.len() && s[r] > 0.0 {
        let ratio = s[r - 1] / s[r];
        if ratio < RANGE_GAP {
            return Err(Error::IllPosedRange { ratio });
        }
    }
    Ok(r)
}

/// `theta_i = (K^+)^* phi_i` for a K-dual `phi` of `psi`; `theta` is
/// interchangeable with `psi` on `R(K)`.
pub fn interchange_dual(
    psi: &VectorFamily,
    phi: &VectorFamily,
    k: &LinearMap,
    rtol: f64,
) -> Result<VectorFamily> {
    check_dim("family dimension against K codomain", k.codomain_dim(), psi.dim())?;
    check_dim("dual dimension against K domain", k.domain_dim(), phi.dim())?;
    check_dim("paired families (sample points)", psi.len(), phi.len())?;
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::InvalidParameter(format!("rtol must lie in (0, 1), got {rtol}")));
    }
    if separated_rank(k, rtol)? == 0 {
        return Err(Error::ZeroOperator);
    }
    phi.transformed(&pinv_matrix(k, rtol).adjoint())
}

/// Residuals of the interchange identities, each relative and taken over
/// an orthonormal basis of `R(K)` against the standard basis of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterchangeResiduals {
    /// `<h, f> = sum w <h, theta> <psi, f>`.
    pub theta_psi: f64,
    /// `<h, f> = sum w <h, psi> <theta, f>`.
    pub psi_theta: f64,
    /// `K^* theta` is a K-dual of `psi`.
    pub k_theta_dual: f64,
    /// `K^* psi` is a K-dual of `theta`.
    pub k_psi_dual: f64,
    pub beta_theta: f64,
}

impl InterchangeResiduals {
    pub fn max(&self) -> f64 {
        self.theta_psi
            .max(self.psi_theta)
            .max(self.k_theta_dual)
            .max(self.k_psi_dual)
    }
}

pub fn interchange_residuals(
    psi: &VectorFamily,
    theta: &VectorFamily,
    k: &LinearMap,
    rtol: f64,
) -> Result<InterchangeResiduals> {
    let r = separated_rank(k, rtol)?;
    let q = svd(k).u.columns(0, r).into_owned();
    // Restrict the first slot to R(K): pair against the family q^* theta.
    let restricted = |fam: &VectorFamily| fam.transformed(&q.adjoint());
    let theta_psi = weak_expansion_residual(&restricted(theta)?, psi, &q)?;
    let psi_theta = weak_expansion_residual(&restricted(psi)?, theta, &q)?;
    let kadj = k.adjoint();
    let k_theta_dual = weak_expansion_residual(&theta.transformed(&kadj)?, psi, k)?;
    let k_psi_dual = weak_expansion_residual(&psi.transformed(&kadj)?, theta, k)?;
    Ok(InterchangeResiduals {
        theta_psi,
        psi_theta,
        k_theta_dual,
        k_psi_dual,
        beta_theta: certify_bessel(theta).beta,
    })
}

/// Named boolean predicates that a theorem asserts to be equivalent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceTable {
    pub predicates: Vec<(String, bool)>,
    pub agreement: bool,
    pub diagnostics: std::collections::BTreeMap<String, f64>,
}

impl EquivalenceTable {
    pub(crate) fn new(predicates: Vec<(&str, bool)>, diagnostics: Vec<(&str, f64)>) -> Self {
        let agreement = predicates.windows(2).all(|w| w[0].1 == w[1].1);
        Self {
            predicates: predicates
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            agreement,
            diagnostics: diagnostics
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.predicates.iter().find(|(k, _)| k == name).map(|p| p.1)
    }

    /// Common value when the predicates agree.
    pub fn verdict(&self) -> Option<bool> {
        self.agreement.then(|| self.predicates.first().map_or(true, |p| p.1))
    }
}

/// Relative cutoff for the rank comparison of the range-inclusion test.
pub const RANK_TEST_RTOL: f64 = 1e-9;

/// `R(T) inside R(C^*)` decided by comparing `rank [C^* | T]` with
/// `rank C^*`, after scaling `T` to the norm of `C^*`.
pub(crate) fn rank_inclusion(cstar: &CMatrix, t: &CMatrix) -> bool {
    let cn = op_norm(cstar);
    let tn = op_norm(t);
    if tn == 0.0 {
        return true;
    }
    if cn == 0.0 {
        return false;
    }
    let mut joined = CMatrix::zeros(cstar.nrows(), cstar.ncols() + t.ncols());
    joined.columns_mut(0, cstar.ncols()).copy_from(cstar);
    joined
        .columns_mut(cstar.ncols(), t.ncols())
        .copy_from(&t.scale(cn / tn));
    let cutoff = RANK_TEST_RTOL * cn;
    let count = |a: &CMatrix| singular_values(a).iter().filter(|&&s| s > cutoff).count();
    count(&joined) == count(cstar)
}

/// `alpha` from the Schur complement of `S` in the eigenbasis of `Q`:
/// with `Q = W_r Lambda W_r^*`, `S >= alpha Q` reduces to
/// `S11 - S12 S22^+ S21 >= alpha Lambda`. The complement is formed as `X^* X`
/// with `X` the part of `C W_r` orthogonal to `R(C W_n)`.
/// Returns `(alpha, predicate)`; the predicate also requires
/// `S - alpha Q / 2` to be numerically PSD.
pub(crate) fn schur_route(c: &CMatrix, q: &CMatrix, rtol: f64) -> (f64, bool) {
    let d = q.nrows();
    let (lam, w) = eigh(q);
    let lmax = lam.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return (f64::INFINITY, true);
    }
    let cut = 1e-9 * lmax;
    let range: Vec<usize> = (0..d).filter(|&k| lam[k] > cut).collect();
    let null: Vec<usize> = (0..d).filter(|&k| lam[k] <= cut).collect();
    let wr = w.select_columns(&range);
    let wn = w.select_columns(&null);
    let cwr = c * &wr;
    let x = if null.is_empty() {
        cwr
    } else {
        // Basis of R(C W_n) cut relative to ||C||, not to ||C W_n||, which
        // is pure roundoff when R(Q) already holds the range of C.
        let cwn = c * &wn;
        let cut_c = RANK_TEST_RTOL * op_norm(c);
        let dec = svd(&cwn);
        let keep = dec.s.iter().filter(|&&s| s > cut_c).count();
        let u = dec.u.columns(0, keep);
        &cwr - &u * (u.adjoint() * &cwr)
    };
    let mut y = x;
    for (col, &k) in range.iter().enumerate() {
        y.column_mut(col).unscale_mut(lam[k].sqrt());
    }
    let s = singular_values(&y);
    let smin = if y.nrows() < y.ncols() {
        0.0
    } else {
        s.last().copied().unwrap_or(0.0)
    };
    let alpha = smin * smin;
    let sfull = c.adjoint() * c;
    let (sv, _) = eigh(&sfull);
    let smax_s = sv.last().copied().unwrap_or(0.0);
    let positive = alpha * lmax > rtol * smax_s;
    let loewner = if positive {
        let (dv, _) = eigh(&(&sfull - q.scale(0.5 * alpha)));
        dv[0] >= -1e-9 * smax_s.max(alpha * lmax)
    } else {
        false
    };
    (alpha, positive && loewner)
}

/// Evaluates the five equivalent characterizations of a K-frame
/// independently:
///
/// 1. `k_frame`: [`certify_k_frame`] passes;
/// 2. `range_inclusion`: rank test for `R(K)` inside `R(C^*)`;
/// 3. `factorization`: `K = C^* M` with relative residual at most `1e-9`;
/// 4. `loewner`: `S >= alpha K K^*` for some `alpha > 0` (Schur route);
/// 5. `sqrt_factorization`: `K = S^{1/2} U` with residual at most `1e-9`.
pub fn equivalence_harness(psi: &VectorFamily, k: &LinearMap) -> Result<EquivalenceTable> {
    check_dim("K codomain against family dimension", psi.dim(), k.codomain_dim())?;
    let c = analysis_operator(psi).into_inner();
    let cstar = c.adjoint();
    let (p1, alpha_i) = if k.is_zero() {
        (true, f64::INFINITY)
    } else {
        let cert = certify_k_frame(psi, k)?;
        (cert.verdict, cert.alpha_raw)
    };
    let p2 = rank_inclusion(&cstar, k);
    let (_, r3) = douglas_matrix(k, &cstar, DEFAULT_RANK_RTOL);
    let (alpha_iv, p4) = schur_route(&c, &(k.matrix() * k.matrix().adjoint()), DEFAULT_FRAME_RTOL);
    let root = sqrt_psd_matrix(frame_operator(psi).matrix())?;
    let (_, r5) = douglas_matrix(k, &root, DEFAULT_RANK_RTOL);
    Ok(EquivalenceTable::new(
        vec![
            ("k_frame", p1),
            ("range_inclusion", p2),
            ("factorization", r3 <= FACTORIZATION_THRESHOLD),
            ("loewner", p4),
            ("sqrt_factorization", r5 <= FACTORIZATION_THRESHOLD),
        ],
        vec![
            ("alpha_k_frame", alpha_i),
            ("alpha_loewner", alpha_iv),
            ("factorization_residual", r3),
            ("sqrt_factorization_residual", r5),
        ],
    ))
}

/// Projector tolerance accepted by [`local_atoms_check`].
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Local atoms for the subspace `R(P)`: the K-frame certificate for `K = P`
/// and, when it passes, the coefficient functionals `c_x(f) = a_f(x)`.
#[derive(Debug, Clone)]
pub struct LocalAtoms {
    pub certificate: FrameCertificate,
    pub coefficients: Option<CoefficientMap>,
}

pub fn local_atoms_check(psi: &VectorFamily, p: &LinearMap) -> Result<LocalAtoms> {
    let residual = projector_residual(p);
    if residual > PROJECTOR_TOL {
        return Err(Error::NotProjector { residual });
    }
    let mut certificate = certify_k_frame(psi, p)?;
    let coefficients = if certificate.verdict {
        let report = atomic_system_factor(psi, p)?;
        if let Some(m) = &report.coefficients {
            certificate
                .diagnostics
                .insert("gamma_sq".into(), m.gamma() * m.gamma());
        }
        report.coefficients
    } else {
        None
    };
    Ok(LocalAtoms {
        certificate,
        coefficients,
    })
}

/// Certificates for `E psi` as an `EK`-frame and for `psi` as a `KG`-frame.
#[derive(Debug, Clone)]
pub struct TransformReport {
    pub base: FrameCertificate,
    pub ek: FrameCertificate,
    pub kg: FrameCertificate,
    /// `alpha / ||G^*||^2`, guaranteed for `KG`.
    pub kg_bound: f64,
    /// `alpha_KG >= kg_bound` and `alpha_EK >= alpha` up to `1e-10` relative.
    pub bounds_hold: bool,
}

/// `E: H -> F`, `G: H -> J`.
pub fn transform_frames(
    psi: &VectorFamily,
    k: &LinearMap,
    e: &LinearMap,
    g: &LinearMap,
) -> Result<TransformReport> {
    check_dim("E domain against H", psi.dim(), e.domain_dim())?;
    check_dim("G codomain against K domain", k.domain_dim(), g.codomain_dim())?;
    let base = certify_k_frame(psi, k)?;
    let ek = certify_k_frame(&psi.transformed(e)?, &e.compose(k)?)?;
    let kg = certify_k_frame(psi, &k.compose(g)?)?;
    let gn = g.op_norm();
    let kg_bound = base.alpha / (gn * gn);
    let tol = |x: f64| 1e-10 * x.abs().max(1.0);
    let bounds_hold =
        kg.alpha_raw >= kg_bound - tol(kg_bound) && ek.alpha_raw >= base.alpha - tol(base.alpha);
    Ok(TransformReport {
        base,
        ek,
        kg,
        kg_bound,
        bounds_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_isometry, random_k_instance, random_matrix, random_unitary, rng_for};
    use crate::spaces::MeasureSpace;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn lm(m: CMatrix) -> LinearMap {
        LinearMap::new(m).unwrap()
    }

    /// Parseval frame for `C^d` on `m >= d` points with the given weights.
    fn parseval(seed: u64, m: usize, d: usize) -> VectorFamily {
        let mut rng = rng_for(seed, 0);
        let sp = crate::instances::random_space(&mut rng, m);
        let c = random_isometry(&mut rng, m, d);
        VectorFamily::from_analysis(sp, &c).unwrap()
    }

    #[test]
    fn identity_on_onb() {
        let psi = VectorFamily::orthonormal_basis(4).unwrap();
        let cert = certify_k_frame(&psi, &LinearMap::identity(4).unwrap()).unwrap();
        assert!((cert.alpha - 1.0).abs() < 1e-12 && (cert.beta - 1.0).abs() < 1e-12);
        assert!(cert.verdict);
    }

    #[test]
    fn pushed_parseval_frame_has_alpha_one() {
        // psi = K xi with xi Parseval for J: sum |<h, K xi>|^2 = ||K^* h||^2.
        let xi = parseval(1, 9, 3);
        let k = random_matrix(&mut rng_for(2, 0), 5, 3);
        let psi = xi.transformed(&k).unwrap();
        let cert = certify_k_frame(&psi, &lm(k.clone())).unwrap();
        assert!((cert.alpha - 1.0).abs() < 1e-10, "alpha {}", cert.alpha);
        let h = random_matrix(&mut rng_for(3, 0), 5, 1).column(0).into_owned();
        let lhs = analysis_operator(&psi).matrix().clone() * &h;
        assert!((lhs.norm_squared() - (k.adjoint() * &h).norm_squared()).abs() < 1e-10);
    }

    #[test]
    fn subspace_family_misses_range() {
        let psi = VectorFamily::new(
            MeasureSpace::counting(2).unwrap(),
            CMatrix::from_row_slice(2, 3, &[re(1.0), re(0.0), re(0.0), re(0.0), re(1.0), re(0.0)]),
        )
        .unwrap();
        let k = LinearMap::identity(3).unwrap();
        let cert = certify_k_frame(&psi, &k).unwrap();
        assert_eq!(cert.alpha, 0.0);
        assert!(!cert.verdict);
    }

    #[test]
    fn zero_k_is_rejected() {
        let psi = VectorFamily::orthonormal_basis(2).unwrap();
        assert!(matches!(
            certify_k_frame(&psi, &LinearMap::zeros(2, 3).unwrap()),
            Err(Error::ZeroOperator)
        ));
        assert!(certify_k_frame(&psi, &LinearMap::identity(3).unwrap()).is_err());
    }

    #[test]
    fn frame_factor_admits_dual_frame_coefficients() {
        let mut rng = rng_for(4, 0);
        let sp = crate::instances::random_space(&mut rng, 7);
        let psi = VectorFamily::new(sp, random_matrix(&mut rng, 7, 3)).unwrap();
        let k = lm(random_matrix(&mut rng, 3, 2));
        let report = atomic_system_factor(&psi, &k).unwrap();
        assert!(report.certificate.verdict);
        assert!(report.factorization_residual <= 1e-9);
        // Canonical dual coefficients a_f(x) = <Kf, S^{-1} psi_x>.
        let s_inv = frame_operator(&psi).matrix().clone().try_inverse().unwrap();
        let canonical = psi.transformed(&s_inv).unwrap();
        let k_dual = VectorFamily::from_analysis(
            psi.space().clone(),
            &(analysis_operator(&canonical).into_inner() * k.matrix()),
        )
        .unwrap();
        assert!(weak_expansion_residual(&k_dual, &psi, &k).unwrap() <= 1e-9);
        let minimal = report.coefficients.unwrap();
        let canonical_gamma = op_norm(analysis_operator(&k_dual).matrix());
        assert!(minimal.gamma() <= canonical_gamma + 1e-12);
    }

    #[test]
    fn zero_k_factor_is_trivial() {
        let psi = VectorFamily::orthonormal_basis(3).unwrap();
        let report = atomic_system_factor(&psi, &LinearMap::zeros(3, 2).unwrap()).unwrap();
        assert_eq!(report.factorization_residual, 0.0);
        assert!(report.coefficients.unwrap().matrix().iter().all(|z| z.norm() == 0.0));
        assert!(report.certificate.verdict);
    }

    #[test]
    fn factor_fails_outside_range() {
        let mut c = random_matrix(&mut rng_for(5, 0), 6, 4);
        c.column_mut(3).fill(re(0.0));
        let psi = VectorFamily::from_analysis(MeasureSpace::counting(6).unwrap(), &c).unwrap();
        let mut k = random_matrix(&mut rng_for(6, 0), 4, 2);
        k[(3, 0)] = re(3.0);
        let report = atomic_system_factor(&psi, &lm(k)).unwrap();
        assert!(report.factorization_residual > 1e-9);
        assert!(!report.certificate.verdict);
        assert!(report.dual.is_none());
    }

    #[test]
    fn k_dual_examples() {
        let psi = VectorFamily::orthonormal_basis(3).unwrap();
        let report = atomic_system_factor(&psi, &LinearMap::identity(3).unwrap()).unwrap();
        let phi = report.dual.unwrap();
        assert!((phi.vectors() - psi.vectors()).norm() < 1e-14);

        // psi = K zeta with zeta a frame for J: any dual of zeta is a K-dual.
        let mut rng = rng_for(7, 0);
        let sp = crate::instances::random_space(&mut rng, 10);
        let zeta = VectorFamily::new(sp, random_matrix(&mut rng, 10, 3)).unwrap();
        let k = lm(random_matrix(&mut rng, 4, 3));
        let psi = zeta.transformed(&k).unwrap();
        let s_inv = frame_operator(&zeta).matrix().clone().try_inverse().unwrap();
        let zeta_dual = zeta.transformed(&s_inv).unwrap();
        assert!(weak_expansion_residual(&zeta_dual, &psi, &k).unwrap() <= 1e-9);
        let report = atomic_system_factor(&psi, &k).unwrap();
        let phi = report.dual.unwrap();
        assert!(weak_expansion_residual(&phi, &psi, &k).unwrap() <= 1e-9);
        // Round trip: the analysis operator of phi reproduces M.
        let m = report.coefficients.unwrap();
        assert!((analysis_operator(&phi).into_inner() - m.matrix()).norm() <= 1e-10 * m.matrix().norm());
        assert!(certify_bessel(&phi).beta <= m.gamma().powi(2) * (1.0 + 1e-10));
    }

    #[test]
    fn dual_is_atomic_for_adjoint_examples() {
        let onb = VectorFamily::orthonormal_basis(3).unwrap();
        let id = LinearMap::identity(3).unwrap();
        let cert = dual_is_atomic_for_adjoint(&onb, &onb, &id).unwrap();
        assert!(cert.verdict);

        let mut found = 0;
        for i in 0..200 {
            let inst = random_k_instance(31, i);
            let (psi, k) = (&inst.psi, &inst.operator);
            let report = atomic_system_factor(psi, k).unwrap();
            if let Some(phi) = report.dual {
                let cert = dual_is_atomic_for_adjoint(psi, &phi, k).unwrap();
                assert!(cert.residual("weak_identity").unwrap() <= 1e-9);
                assert!(cert.verdict);
                found += 1;
            }
        }
        assert!(found > 20);

        let q = random_isometry(&mut rng_for(8, 0), 4, 2);
        let p = lm(&q * q.adjoint());
        let psi = VectorFamily::new(
            MeasureSpace::counting(6).unwrap(),
            random_matrix(&mut rng_for(9, 0), 6, 4),
        )
        .unwrap();
        let phi = atomic_system_factor(&psi, &p).unwrap().dual.unwrap();
        assert!(dual_is_atomic_for_adjoint(&psi, &phi, &p).unwrap().verdict);
    }

    #[test]
    fn interchange_identity_case() {
        let psi = VectorFamily::orthonormal_basis(3).unwrap();
        let k = LinearMap::identity(3).unwrap();
        let theta = interchange_dual(&psi, &psi, &k, 1e-12).unwrap();
        assert!((theta.vectors() - psi.vectors()).norm() < 1e-14);
        let res = interchange_residuals(&psi, &theta, &k, 1e-12).unwrap();
        assert!(res.max() < 1e-14);
    }

    #[test]
    fn interchange_with_diagonal_k() {
        let mut rng = rng_for(10, 0);
        let sp = crate::instances::random_space(&mut rng, 5);
        let psi = VectorFamily::new(sp, random_matrix(&mut rng, 5, 2)).unwrap();
        let k = LinearMap::diagonal(&[re(1.0), re(2.0)]).unwrap();
        let phi = atomic_system_factor(&psi, &k).unwrap().dual.unwrap();
        let theta = interchange_dual(&psi, &phi, &k, 1e-12).unwrap();
        let res = interchange_residuals(&psi, &theta, &k, 1e-12).unwrap();
        assert!(res.max() <= 1e-8, "{res:?}");
    }

    #[test]
    fn interchange_on_projection_and_gap_error() {
        let u = random_unitary(&mut rng_for(11, 0), 4);
        let q = u.columns(0, 2).into_owned();
        let p = lm(&q * q.adjoint());
        let psi = VectorFamily::new(
            MeasureSpace::counting(8).unwrap(),
            random_matrix(&mut rng_for(12, 0), 8, 4),
        )
        .unwrap();
        let phi = atomic_system_factor(&psi, &p).unwrap().dual.unwrap();
        let theta = interchange_dual(&psi, &phi, &p, 1e-12).unwrap();
        assert!(interchange_residuals(&psi, &theta, &p, 1e-12).unwrap().max() <= 1e-8);
        // Outside R(K) the identity is not part of the contract.
        let h = u.column(3).into_owned();
        let t = expansion_operator(&theta, &psi).unwrap();
        let off = (t.adjoint() * &h - &h).norm();
        assert!(off.is_finite());

        let bad = LinearMap::diagonal(&[re(1.0), re(2e-12), re(5e-13)]).unwrap();
        let psi3 = VectorFamily::orthonormal_basis(3).unwrap();
        assert!(matches!(
            interchange_dual(&psi3, &psi3, &bad, 1e-12),
            Err(Error::IllPosedRange { .. })
        ));
    }

    #[test]
    fn harness_trivial_cases() {
        let onb = VectorFamily::orthonormal_basis(3).unwrap();
        let t = equivalence_harness(&onb, &LinearMap::identity(3).unwrap()).unwrap();
        assert_eq!(t.verdict(), Some(true));
        let missing = VectorFamily::new(
            MeasureSpace::counting(2).unwrap(),
            CMatrix::identity(3, 3).rows(0, 2).into_owned(),
        )
        .unwrap();
        let t = equivalence_harness(&missing, &LinearMap::identity(3).unwrap()).unwrap();
        assert_eq!(t.verdict(), Some(false), "{t:?}");
    }

    #[test]
    fn harness_agrees_on_seeded_instances() {
        let mut seen = [0usize; 2];
        for i in 0..200 {
            let inst = random_k_instance(2024, i);
            let t = equivalence_harness(&inst.psi, &inst.operator).unwrap();
            assert!(t.agreement, "instance {i}: {t:?}");
            seen[t.verdict().unwrap() as usize] += 1;
        }
        assert!(seen[0] > 20 && seen[1] > 20, "{seen:?}");
    }

    #[test]
    fn local_atoms_examples() {
        let mut rng = rng_for(13, 0);
        let psi = VectorFamily::new(
            crate::instances::random_space(&mut rng, 6),
            random_matrix(&mut rng, 6, 3),
        )
        .unwrap();
        let la = local_atoms_check(&psi, &LinearMap::identity(3).unwrap()).unwrap();
        let (values, _) = eigh(frame_operator(&psi).matrix());
        assert!((la.certificate.alpha - values[0]).abs() <= 1e-10 * values[2]);
        assert!(la.coefficients.is_some());

        let e1 = VectorFamily::new(
            MeasureSpace::counting(1).unwrap(),
            CMatrix::from_row_slice(1, 2, &[re(1.0), re(0.0)]),
        )
        .unwrap();
        let p1 = LinearMap::diagonal(&[re(1.0), re(0.0)]).unwrap();
        let la = local_atoms_check(&e1, &p1).unwrap();
        assert!((la.certificate.alpha - 1.0).abs() < 1e-12);

        let p2 = LinearMap::diagonal(&[re(0.0), re(1.0)]).unwrap();
        assert!(!local_atoms_check(&e1, &p2).unwrap().certificate.verdict);
        let not_proj = LinearMap::diagonal(&[re(2.0), re(0.0)]).unwrap();
        assert!(matches!(
            local_atoms_check(&e1, &not_proj),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn transform_examples() {
        let mut rng = rng_for(14, 0);
        let psi = VectorFamily::new(
            crate::instances::random_space(&mut rng, 9),
            random_matrix(&mut rng, 9, 3),
        )
        .unwrap();
        let k = lm(random_matrix(&mut rng, 3, 3));
        let id = LinearMap::identity(3).unwrap();
        let r = transform_frames(&psi, &k, &id, &id).unwrap();
        assert!((r.ek.alpha - r.base.alpha).abs() <= 1e-10 * r.base.alpha);
        assert!((r.kg.alpha - r.base.alpha).abs() <= 1e-10 * r.base.alpha);
        assert!(r.bounds_hold);

        // E = G = K: psi and K psi are K^2-frames.
        let r = transform_frames(&psi, &k, &k, &k).unwrap();
        assert!(r.kg.verdict && r.ek.verdict && r.bounds_hold);

        let e = lm(random_matrix(&mut rng, 5, 3));
        let g = lm(random_matrix(&mut rng, 3, 4));
        let r = transform_frames(&psi, &k, &e, &g).unwrap();
        assert!(r.bounds_hold, "{} vs {}", r.kg.alpha_raw, r.kg_bound);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn alpha_gamma_identity(seed in 0u64..1_000_000) {
                let inst = random_k_instance(seed, 0);
                let cert = certify_k_frame(&inst.psi, &inst.operator).unwrap();
                let report = atomic_system_factor(&inst.psi, &inst.operator).unwrap();
                prop_assert_eq!(cert.verdict, report.certificate.verdict);
                if cert.verdict {
                    let g = report.coefficients.unwrap().gamma();
                    prop_assert!((cert.alpha * g * g - 1.0).abs() <= 1e-8);
                    prop_assert!(cert.alpha * inst.operator.op_norm().powi(2) <= cert.beta * (1.0 + 1e-10));
                }
            }

            #[test]
            fn appending_vectors_never_lowers_alpha(seed in 0u64..1_000_000, extra in 1usize..6) {
                let inst = random_k_instance(seed, 1);
                let mut rng = rng_for(seed, 2);
                let more = VectorFamily::new(
                    crate::instances::random_space(&mut rng, extra),
                    random_matrix(&mut rng, extra, inst.psi.dim()),
                ).unwrap();
                let a0 = certify_k_frame(&inst.psi, &inst.operator).unwrap().alpha;
                let a1 = certify_k_frame(&inst.psi.append(&more).unwrap(), &inst.operator).unwrap().alpha;
                prop_assert!(a1 >= a0 * (1.0 - 1e-9));
            }

            #[test]
            fn weak_identity_is_bilinear(seed in 0u64..1_000_000) {
                let inst = random_k_instance(seed, 3);
                let report = atomic_system_factor(&inst.psi, &inst.operator).unwrap();
                if let Some(phi) = report.dual {
                    // Random (f, h) residual is bounded by the basis-pair residual.
                    let mut rng = rng_for(seed, 4);
                    let f = random_matrix(&mut rng, inst.operator.domain_dim(), 1);
                    let h = random_matrix(&mut rng, inst.psi.dim(), 1);
                    let t = expansion_operator(&phi, &inst.psi).unwrap();
                    let lhs = (h.adjoint() * inst.operator.matrix() * &f)[(0, 0)];
                    let rhs = (h.adjoint() * t * &f)[(0, 0)];
                    let basis = weak_expansion_residual(&phi, &inst.psi, &inst.operator).unwrap();
                    let scale = inst.operator.op_norm() * f.norm() * h.norm();
                    let d = (f.len() * h.len()) as f64;
                    prop_assert!((lhs - rhs).norm() <= (basis * d + 1e-12) * scale.max(1.0));
                }
            }

            #[test]
            fn restricted_frame_operator_is_invertible(seed in 0u64..1_000_000) {
                let inst = random_k_instance(seed, 5);
                let cert = certify_k_frame(&inst.psi, &inst.operator).unwrap();
                if cert.verdict {
                    let q = crate::linalg::range_basis(inst.operator.matrix(), 1e-9);
                    let s = frame_operator(&inst.psi).into_inner();
                    let (restricted, _) = eigh(&(q.adjoint() * &s * &q));
                    let kk = inst.operator.matrix() * inst.operator.matrix().adjoint();
                    let (kk_r, _) = eigh(&(q.adjoint() * kk * &q));
                    prop_assert!(restricted[0] >= cert.alpha * kk_r[0] * (1.0 - 1e-8));
                    prop_assert!(restricted[0] > 0.0);
                }
            }
        }
    }
}
