//! Growth of the partial sums `s_k = sum_{j<=k} <f, psi_j> psi_j` for the
//! two-term family `psi_{2n-1} = n^b e_n`, `psi_{2n} = (n+1)^a (e_{n+1} - e_n)`
//! and `<f, e_n> = n^{-p}`.
//!
//! The even partial sums have the closed form
//! `s_{2m} = A e_1 + sum_{n=2}^{m} b_n e_n + d_{m+1} e_{m+1}`, so `||s_{2m}||`
//! is computed from scalar coefficients without materializing any vector.

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters `(p, alpha, beta)` of the divergence family, validated against
/// the admissibility inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceParams {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl DivergenceParams {
    pub fn new(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        let params = Self { p, alpha, beta };
        let violated = params.violations();
        if violated.is_empty() {
            Ok(params)
        } else {
            Err(Error::PreconditionViolated { violated })
        }
    }

    /// Every admissibility inequality that fails, by name.
    pub fn violations(&self) -> Vec<String> {
        let Self { p, alpha: a, beta: b } = *self;
        let growth = 2.0 * a - 1.0 - p;
        let checks = [
            (p.is_finite() && a.is_finite() && b.is_finite(), "parameters finite"),
            (a > 1.0, "alpha > 1"),
            (b > 0.0, "beta > 0"),
            (p > b + 0.5, "p > beta + 1/2"),
            (p > a - 0.5, "p > alpha - 1/2"),
            (p > 2.0 * b + 0.5, "p > 2 beta + 1/2"),
            (p > 2.0 * a - 1.5, "p > 2 alpha - 3/2"),
            (p >= 2.0 * a - b - 1.0, "p >= 2 alpha - beta - 1"),
            (growth > 0.0, "2 alpha - 1 - p > 0"),
            (growth < b, "2 alpha - 1 - p < beta"),
        ];
        checks
            .iter()
            .filter(|(ok, _)| !ok)
            .map(|(_, name)| name.to_string())
            .collect()
    }

    /// Predicted growth exponent `2 alpha - 1 - p` of `||s_{2m}||`.
    pub fn expected_exponent(&self) -> f64 {
        2.0 * self.alpha - 1.0 - self.p
    }

    /// Coefficient of `e_1` in every even partial sum.
    pub fn a(&self) -> f64 {
        1.0 + 2f64.powf(2.0 * self.alpha) * (1.0 - 2f64.powf(-self.p))
    }

    /// Coefficient of `e_n`, `n >= 2`, once both neighbours have entered.
    pub fn b(&self, n: usize) -> f64 {
        let Self { p, alpha, beta } = *self;
        let n = n as f64;
        let (nm, np) = (n - 1.0, n + 1.0);
        n.powf(2.0 * beta - p)
            + n.powf(2.0 * alpha) * (nm.powf(p) - n.powf(p)) / (n.powf(p) * nm.powf(p))
            - np.powf(2.0 * alpha) * (n.powf(p) - np.powf(p)) / (n.powf(p) * np.powf(p))
    }

    /// Trailing coefficient `d_{m+1}` of `s_{2m}`.
    pub fn d_next(&self, m: usize) -> f64 {
        let Self { p, alpha, .. } = *self;
        let (m, mp) = (m as f64, m as f64 + 1.0);
        mp.powf(2.0 * alpha) * (m.powf(p) - mp.powf(p)) / (m.powf(p) * mp.powf(p))
    }
}

/// `||s_{2m}||^2` for `m = 1..=max_m`, index `m - 1`.
pub fn even_partial_sum_norms_sq(params: &DivergenceParams, max_m: usize) -> Vec<f64> {
    let a2 = params.a().powi(2);
    let mut acc = 0.0;
    (1..=max_m)
        .map(|m| {
            if m >= 2 {
                acc += params.b(m).powi(2);
            }
            a2 + acc + params.d_next(m).powi(2)
        })
        .collect()
}

/// Result of [`probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub params: DivergenceParams,
    pub m_grid: Vec<usize>,
    /// `||s_{2m}||` on the grid.
    pub norms: Vec<f64>,
    /// Least-squares slope of `log ||s_{2m}||` against `log m` from the
    /// doubling increments (see [`probe`]).
    pub slope: f64,
    /// Least-squares slope of `log ||s_{2m}||` against `log m` itself.
    pub literal_slope: f64,
    pub expected: f64,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Default grid: 41 geometrically spaced integers in `[100, 10000]`.
pub fn default_m_grid() -> Vec<usize> {
    let mut grid: Vec<usize> = (0..=40)
        .map(|k| 10f64.powf(2.0 + k as f64 / 20.0).round() as usize)
        .collect();
    grid.dedup();
    grid
}

/// Growth exponent of `||s_{2m}||` over `m_grid`.
///
/// The bounded `e_1` and `l^2` parts of `s_{2m}` shift `log ||s_{2m}||` by an
/// amount that decays only like a power of `m`, so a direct log-log fit on
/// `[1e2, 1e4]` is biased. The estimator instead fits the doubling increment
/// `||s_{4m}||^2 - ||s_{2m}||^2`, in which the constant part cancels, and
/// halves its slope. The direct fit is reported as `literal_slope`.
pub fn probe(params: &DivergenceParams, m_grid: &[usize]) -> Result<DivergenceReport> {
    if m_grid.len() < 2 || m_grid.contains(&0) {
        return Err(Error::InvalidParameter(
            "m_grid needs at least two positive entries".into(),
        ));
    }
    let mut grid = m_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("m_grid needs two distinct entries".into()));
    }
    let max_m = 2 * grid[grid.len() - 1];
    let sq = even_partial_sum_norms_sq(params, max_m);
    let logm: Vec<f64> = grid.iter().map(|&m| (m as f64).ln()).collect();
    let norms: Vec<f64> = grid.iter().map(|&m| sq[m - 1].sqrt()).collect();
    let log_norm: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let increments: Vec<f64> = grid.iter().map(|&m| (sq[2 * m - 1] - sq[m - 1]).ln()).collect();
    Ok(DivergenceReport {
        params: *params,
        slope: 0.5 * ls_slope(&logm, &increments),
        literal_slope: ls_slope(&logm, &log_norm),
        expected: params.expected_exponent(),
        m_grid: grid,
        norms,
    })
}

/// Validates `(p, alpha, beta)` and returns the growth exponent from [`probe`].
pub fn domain_divergence_probe(p: f64, alpha: f64, beta: f64, m_grid: &[usize]) -> Result<f64> {
    let params = DivergenceParams::new(p, alpha, beta)?;
    Ok(probe(&params, m_grid)?.slope)
}

/// Partial sums and analytic tail bounds of the two series that control
/// membership of `f` in the form domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub n: usize,
    pub first_partial: f64,
    pub second_partial: f64,
    /// Upper bound on `sum_{k>n}` of the first series.
    pub first_tail_bound: f64,
    /// Upper bound on `sum_{k>n}` of the second series.
    pub second_tail_bound: f64,
}

impl TailReport {
    pub fn tail_bound(&self) -> f64 {
        self.first_tail_bound + self.second_tail_bound
    }
}

/// Sums `sum n^{2b}/n^{2p}` and `sum (n+1)^{2a} |n^p - (n+1)^p|^2 / (n^{2p} (n+1)^{2p})`
/// up to `n` and bounds their tails by integral comparison.
///
/// The first term is `k^{-q1}`, `q1 = 2p - 2b`. By the mean value theorem the
/// second term is at most `p^2 2^{max(2a-2, 0)} k^{-q2}`, `q2 = 2p + 2 - 2a`.
/// For `q > 1` the tail of `c k^{-q}` beyond `n` is at most `c n^{1-q}/(q-1)`.
pub fn cauchy_tail(params: &DivergenceParams, n: usize) -> Result<TailReport> {
    let DivergenceParams { p, alpha, beta } = *params;
    let q1 = 2.0 * p - 2.0 * beta;
    let q2 = 2.0 * p + 2.0 - 2.0 * alpha;
    if !(q1 > 1.0 && q2 > 1.0) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "series exponents must exceed 1 and n must be positive (q1 = {q1}, q2 = {q2}, n = {n})"
        )));
    }
    let mut first = 0.0;
    let mut second = 0.0;
    for k in (1..=n).rev() {
        let kf = k as f64;
        let k1 = kf + 1.0;
        first += kf.powf(-q1);
        let diff = kf.powf(p) - k1.powf(p);
        second += k1.powf(2.0 * alpha) * diff * diff / (kf.powf(2.0 * p) * k1.powf(2.0 * p));
    }
    let nf = n as f64;
    let c2 = p * p * 2f64.powf((2.0 * alpha - 2.0).max(0.0));
    Ok(TailReport {
        n,
        first_partial: first,
        second_partial: second,
        first_tail_bound: nf.powf(1.0 - q1) / (q1 - 1.0),
        second_tail_bound: c2 * nf.powf(1.0 - q2) / (q2 - 1.0),
    })
}
