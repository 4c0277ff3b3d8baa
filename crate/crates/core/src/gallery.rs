//! Generators for the standard example families, realized in truncated
//! Fourier-mode coordinates or on the cyclic group `Z_n`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::divergence::DivergenceParams;
use crate::frame::VectorFamily;
use crate::linalg::LinearMap;
use crate::spaces::MeasureSpace;
use crate::weak::{fourier_derivative_matrix, onb_atomic_system, OperatorLadder};
use crate::{CMatrix, CVector, C64};

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `<e^{2 pi i t .}, e^{2 pi i k .}>` in `L^2(0, 1)`.
pub fn exponential_coefficient(t: f64, k: usize) -> C64 {
    let u = t - k as f64;
    C64::from_polar(sinc(u), PI * u)
}

fn check_grid(t_max: f64, n_t: usize, d: usize) -> Result<()> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_max}")));
    }
    if n_t < 2 {
        return Err(Error::InvalidParameter(format!("n_t must be at least 2, got {n_t}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    Ok(())
}

/// Exponentials `theta_t = e^{2 pi i t .}` on `(0, 1)` in the first `d`
/// Fourier modes, `t` trapezoid-sampled on `[-T, T]`.
#[derive(Debug, Clone)]
pub struct ExponentialFamily {
    pub theta: VectorFamily,
    /// `2 pi diag(0, ..., d-1)`, the derivative `-i d/dx` on the modes.
    pub a_n: CMatrix,
    /// `A_n theta`.
    pub psi: VectorFamily,
    pub nodes: Vec<f64>,
}

pub fn gen_exponential_family(t_max: f64, n_t: usize, d: usize) -> Result<ExponentialFamily> {
    check_grid(t_max, n_t, d)?;
    let (space, nodes) = MeasureSpace::trapezoid(-t_max, t_max, n_t)?;
    let rows = CMatrix::from_fn(n_t, d, |i, k| exponential_coefficient(nodes[i], k));
    let theta = VectorFamily::new(space, rows)?;
    let a_n = CMatrix::from_fn(d, d, |i, j| {
        C64::new(if i == j { 2.0 * PI * i as f64 } else { 0.0 }, 0.0)
    });
    let psi = theta.transformed(&a_n)?;
    Ok(ExponentialFamily {
        theta,
        a_n,
        psi,
        nodes,
    })
}

/// Sampled STFT window on `Z_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    /// Periodized Gaussian of width `sigma` centered at 0.
    Gaussian { sigma: f64 },
    /// `delta_0`.
    Delta,
    /// Hann window of length `n`.
    Hann,
    Custom(Vec<C64>),
}

impl Window {
    pub fn by_name(name: &str, sigma: Option<f64>) -> Result<Self> {
        match name {
            "gaussian" => Ok(Window::Gaussian {
                sigma: sigma.unwrap_or(4.0),
            }),
            "delta" => Ok(Window::Delta),
            "hann" => Ok(Window::Hann),
            other => Err(Error::InvalidParameter(format!("unknown window `{other}`"))),
        }
    }

    /// Samples normalized to unit `l^2` norm.
    pub fn samples(&self, n: usize) -> Result<CVector> {
        let g = match self {
            Window::Gaussian { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
                }
                CVector::from_fn(n, |x, _| {
                    let dx = (x.min(n - x)) as f64;
                    C64::new((-0.5 * (dx / sigma).powi(2)).exp(), 0.0)
                })
            }
            Window::Delta => CVector::from_fn(n, |x, _| C64::new(if x == 0 { 1.0 } else { 0.0 }, 0.0)),
            Window::Hann => CVector::from_fn(n, |x, _| {
                C64::new((PI * x as f64 / n as f64).sin().powi(2), 0.0)
            }),
            Window::Custom(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        context: "custom window length",
                        expected: n,
                        found: v.len(),
                    });
                }
                CVector::from_column_slice(v)
            }
        };
        let norm = g.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter("window must be nonzero".into()));
        }
        Ok(g.unscale(norm))
    }
}

/// Discrete STFT family on `Z_n`.
#[derive(Debug, Clone)]
pub struct StftFamily {
    /// `theta_{s,t}[x] = e^{2 pi i t x / n} g[x - s]`, point index `s n + t`,
    /// weights `1/n`.
    pub theta: VectorFamily,
    /// Spectral derivative on `Z_n`.
    pub a_n: CMatrix,
    pub psi: VectorFamily,
    pub window: CVector,
}

pub fn gen_stft_weak_frame(n: usize, window: &Window) -> Result<StftFamily> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("n must be a power of two, got {n}")));
    }
    let g = window.samples(n)?;
    let space = MeasureSpace::new(vec![1.0 / n as f64; n * n])?;
    let rows = CMatrix::from_fn(n * n, n, |i, x| {
        let (s, t) = (i / n, i % n);
        let phase = 2.0 * PI * ((t * x) % n) as f64 / n as f64;
        C64::from_polar(1.0, phase) * g[(x + n - s) % n]
    });
    let theta = VectorFamily::new(space, rows)?;
    let a_n = fourier_derivative_matrix(n);
    let psi = theta.transformed(&a_n)?;
    Ok(StftFamily {
        theta,
        a_n,
        psi,
        window: g,
    })
}

/// Multiplier `g` sampled on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Multiplier {
    One,
    /// `e^{2 pi i x}`.
    Exp1,
    Zero,
    Samples(Vec<C64>),
}

impl Multiplier {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(Multiplier::One),
            "exp1" => Ok(Multiplier::Exp1),
            "zero" => Ok(Multiplier::Zero),
            other => Err(Error::InvalidParameter(format!("unknown multiplier `{other}`"))),
        }
    }

    /// Samples at `x_l = l / n_g`.
    pub fn samples(&self, n_g: usize) -> Vec<C64> {
        match self {
            Multiplier::One => vec![C64::new(1.0, 0.0); n_g],
            Multiplier::Exp1 => (0..n_g)
                .map(|l| C64::from_polar(1.0, 2.0 * PI * l as f64 / n_g as f64))
                .collect(),
            Multiplier::Zero => vec![C64::new(0.0, 0.0); n_g],
            Multiplier::Samples(v) => v.clone(),
        }
    }
}

/// `<g e_l, e_k> = ghat(k - l)` with `ghat` the DFT of the samples, exact for
/// trigonometric polynomials of degree below half the sample count.
pub fn multiplication_operator(g_samples: &[C64], d: usize) -> Result<CMatrix> {
    let n_g = g_samples.len();
    if n_g == 0 || d == 0 {
        return Err(Error::InvalidParameter("multiplier samples and d must be nonempty".into()));
    }
    if g_samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidParameter("multiplier samples must be finite".into()));
    }
    let ghat = |j: i64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (l, g) in g_samples.iter().enumerate() {
            let phase = -2.0 * PI * (j * l as i64).rem_euclid(n_g as i64) as f64 / n_g as f64;
            acc += g * C64::from_polar(1.0, phase);
        }
        acc / n_g as f64
    };
    Ok(CMatrix::from_fn(d, d, |k, l| ghat(k as i64 - l as i64)))
}

/// `psi_t = g theta_t` with the multiplication operator `M_g`.
#[derive(Debug, Clone)]
pub struct MultiplicationFrame {
    pub theta: VectorFamily,
    pub mg: LinearMap,
    pub psi: VectorFamily,
}

pub fn gen_multiplication_frame(g_samples: &[C64], t_max: f64, n_t: usize, d: usize) -> Result<MultiplicationFrame> {
    check_grid(t_max, n_t, d)?;
    let mg = multiplication_operator(g_samples, d)?;
    let theta = gen_exponential_family(t_max, n_t, d)?.theta;
    let psi = theta.transformed(&mg)?;
    Ok(MultiplicationFrame {
        theta,
        mg: LinearMap::new(mg)?,
        psi,
    })
}

/// Validated parameters of the divergence family.
pub fn gen_divergence_example(p: f64, alpha: f64, beta: f64) -> Result<ExampleSpec> {
    let params = DivergenceParams::new(p, alpha, beta)?;
    Ok(ExampleSpec::new(
        ExampleName::DivergenceFamily,
        [("p", params.p), ("alpha", params.alpha), ("beta", params.beta)],
    ))
}

/// Names of the example generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleName {
    DivergenceFamily,
    StftWeakFrame,
    ExponentialParseval,
    MultiplicationFrame,
    OnbConstruction,
}

impl ExampleName {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "divergence_family" => Self::DivergenceFamily,
            "stft_weak_frame" => Self::StftWeakFrame,
            "exponential_parseval" => Self::ExponentialParseval,
            "multiplication_frame" => Self::MultiplicationFrame,
            "onb_construction" => Self::OnbConstruction,
            other => return Err(Error::InvalidParameter(format!("unknown example `{other}`"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DivergenceFamily => "divergence_family",
            Self::StftWeakFrame => "stft_weak_frame",
            Self::ExponentialParseval => "exponential_parseval",
            Self::MultiplicationFrame => "multiplication_frame",
            Self::OnbConstruction => "onb_construction",
        }
    }

    /// Numeric parameters and their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::DivergenceFamily => &[("p", 3.0), ("alpha", 2.125), ("beta", 1.0 / 3.0)],
            Self::StftWeakFrame => &[("n", 64.0), ("sigma", 4.0)],
            Self::ExponentialParseval => &[("T", 50.0), ("n_t", 4000.0), ("d", 4.0)],
            Self::MultiplicationFrame => &[("T", 50.0), ("n_t", 4000.0), ("d", 4.0), ("n_g", 64.0)],
            Self::OnbConstruction => &[("n", 8.0), ("points_per_block", 2.0)],
        }
    }
}

/// A named example with its numeric parameters and optional string choice
/// (window for STFT, multiplier for the multiplication frame, ladder for the
/// ONB construction).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleSpec {
    pub name: ExampleName,
    pub params: BTreeMap<String, f64>,
    pub choice: Option<String>,
}

impl ExampleSpec {
    pub fn new<const N: usize>(name: ExampleName, params: [(&str, f64); N]) -> Self {
        Self {
            name,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            choice: None,
        }
    }

    /// Spec filled with defaults, then overridden by `overrides`.
    pub fn with_overrides(name: ExampleName, overrides: &BTreeMap<String, f64>, choice: Option<String>) -> Result<Self> {
        let mut params: BTreeMap<String, f64> = name
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(Error::InvalidParameter(format!(
                    "example `{}` has no parameter `{k}`",
                    name.as_str()
                )));
            }
            params.insert(k.clone(), *v);
        }
        Ok(Self { name, params, choice })
    }

    pub fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter `{key}`")))
    }

    fn count(&self, key: &str) -> Result<usize> {
        let v = self.param(key)?;
        if v.fract() != 0.0 || v < 0.0 || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("`{key}` must be a nonnegative integer, got {v}")));
        }
        Ok(v as usize)
    }
}

/// Output of [`generate`].
#[derive(Debug, Clone)]
pub enum Generated {
    Divergence(DivergenceParams),
    /// Family, operator, and the family the operator acts on when different.
    Family {
        psi: VectorFamily,
        operator: CMatrix,
        base: Option<VectorFamily>,
    },
}

pub fn generate(spec: &ExampleSpec) -> Result<Generated> {
    Ok(match spec.name {
        ExampleName::DivergenceFamily => Generated::Divergence(DivergenceParams::new(
            spec.param("p")?,
            spec.param("alpha")?,
            spec.param("beta")?,
        )?),
        ExampleName::ExponentialParseval => {
            let e = gen_exponential_family(spec.param("T")?, spec.count("n_t")?, spec.count("d")?)?;
            Generated::Family {
                psi: e.psi,
                operator: e.a_n,
                base: Some(e.theta),
            }
        }
        ExampleName::StftWeakFrame => {
            let window = Window::by_name(spec.choice.as_deref().unwrap_or("gaussian"), spec.params.get("sigma").copied())?;
            let s = gen_stft_weak_frame(spec.count("n")?, &window)?;
            Generated::Family {
                psi: s.psi,
                operator: s.a_n,
                base: Some(s.theta),
            }
        }
        ExampleName::MultiplicationFrame => {
            let g = Multiplier::by_name(spec.choice.as_deref().unwrap_or("exp1"))?;
            let m = gen_multiplication_frame(
                &g.samples(spec.count("n_g")?),
                spec.param("T")?,
                spec.count("n_t")?,
                spec.count("d")?,
            )?;
            Generated::Family {
                psi: m.psi,
                operator: m.mg.into_inner(),
                base: Some(m.theta),
            }
        }
        ExampleName::OnbConstruction => {
            let n = spec.count("n")?;
            let per = spec.count("points_per_block")?;
            let ladder = OperatorLadder::by_name(spec.choice.as_deref().unwrap_or("diagonal"), vec![n])?;
            let sp = MeasureSpace::blocks_of(&vec![1.0; n], per)?;
            Generated::Family {
                psi: onb_atomic_system(&ladder, n, &sp)?,
                operator: ladder.matrix(n)?,
                base: None,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{analysis_operator, certify_bessel};
    use crate::instances::{random_matrix, rng_for};
    use crate::kframe::certify_k_frame;
    use crate::weak::certify_weak_at;

    /// Tail mass `2 int_T^inf sinc^2` bound for the discretized window.
    fn tail_bound(t: f64, d: usize) -> f64 {
        2.0 / (PI * PI * (t - d as f64))
    }

    #[test]
    fn exponential_coefficients_match_quadrature() {
        // Direct midpoint quadrature of int_0^1 e^{2 pi i (t - k) x} dx.
        for &(t, k) in &[(0.3, 0usize), (2.5, 1), (-1.7, 3), (2.0, 2)] {
            let n = 20000;
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let x = (j as f64 + 0.5) / n as f64;
                acc += C64::from_polar(1.0, 2.0 * PI * (t - k as f64) * x);
            }
            acc /= n as f64;
            assert!((acc - exponential_coefficient(t, k)).norm() < 1e-8);
        }
    }

    #[test]
    fn exponential_beta_near_one() {
        let e = gen_exponential_family(50.0, 4000, 4).unwrap();
        let cert = certify_bessel(&e.theta);
        assert!((cert.beta - 1.0).abs() <= 5e-3);
        assert!((cert.beta - 1.0).abs() <= tail_bound(50.0, 4));
        let w = certify_weak_at(&e.psi, &e.a_n).unwrap();
        assert!(w.verdict && (w.alpha - 1.0).abs() <= 5e-2, "{w:?}");
    }

    #[test]
    fn exponential_errors_and_degenerate_mode() {
        assert!(gen_exponential_family(0.0, 10, 2).is_err());
        assert!(gen_exponential_family(1.0, 1, 2).is_err());
        assert!(gen_exponential_family(1.0, 10, 0).is_err());
        let e = gen_exponential_family(10.0, 200, 1).unwrap();
        assert!(e.psi.vectors().iter().all(|z| z.norm() == 0.0));
        let w = certify_weak_at(&e.psi, &e.a_n).unwrap();
        assert!(w.verdict && w.alpha.is_infinite());
    }

    #[test]
    fn exponential_refinement_is_at_least_second_order() {
        let beta = |n_t| certify_bessel(&gen_exponential_family(10.0, n_t, 3).unwrap().theta).beta;
        let (b1, b2, b4) = (beta(201), beta(401), beta(801));
        let r = (b1 - b2).abs() / (b2 - b4).abs();
        // O(h^2) predicts a ratio of at least 4; endpoint smoothness gives more.
        assert!(r > 3.5, "ratio {r}");
    }

    #[test]
    fn stft_discrete_parseval() {
        for window in [Window::Gaussian { sigma: 4.0 }, Window::Delta, Window::Hann] {
            let s = gen_stft_weak_frame(16, &window).unwrap();
            let mut rng = rng_for(21, 0);
            for _ in 0..5 {
                let f = random_matrix(&mut rng, 16, 1).column(0).into_owned();
                // Direct double sum over (s, t).
                let mut total = 0.0;
                for i in 0..s.theta.len() {
                    let th = s.theta.vector(i);
                    total += f.dotc(&th).norm_sqr() / 16.0;
                }
                assert!((total - f.norm_squared()).abs() <= 1e-12 * f.norm_squared().max(1.0) * 10.0);
            }
            let w = certify_weak_at(&s.psi, &s.a_n).unwrap();
            assert!(w.verdict && w.alpha >= 1.0 - 1e-8, "{w:?}");
        }
    }

    #[test]
    fn stft_errors() {
        assert!(gen_stft_weak_frame(12, &Window::Delta).is_err());
        assert!(gen_stft_weak_frame(8, &Window::Custom(vec![C64::new(0.0, 0.0); 8])).is_err());
        assert!(gen_stft_weak_frame(8, &Window::Custom(vec![C64::new(1.0, 0.0); 4])).is_err());
    }

    #[test]
    fn stft_delta_is_scaled_dft_family() {
        let s = gen_stft_weak_frame(8, &Window::Delta).unwrap();
        let c = analysis_operator(&s.theta).into_inner();
        let gram = c.adjoint() * c;
        assert!((gram - CMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn multiplication_presets() {
        let one = gen_multiplication_frame(&Multiplier::One.samples(16), 20.0, 1000, 4).unwrap();
        assert!((one.mg.matrix() - CMatrix::identity(4, 4)).norm() < 1e-12);
        assert!((one.psi.vectors() - one.theta.vectors()).norm() < 1e-12);

        let shift = gen_multiplication_frame(&Multiplier::Exp1.samples(16), 50.0, 4000, 4).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                let expect = if k == l + 1 { 1.0 } else { 0.0 };
                assert!((shift.mg.matrix()[(k, l)] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        let cert = certify_k_frame(&shift.psi, &shift.mg).unwrap();
        assert!(cert.verdict && (cert.alpha - 1.0).abs() < 5e-2, "{cert:?}");

        let zero = gen_multiplication_frame(&Multiplier::Zero.samples(16), 10.0, 100, 3).unwrap();
        assert!(matches!(certify_k_frame(&zero.psi, &zero.mg), Err(Error::ZeroOperator)));
    }

    #[test]
    fn divergence_specs() {
        assert!(gen_divergence_example(3.0, 17.0 / 8.0, 1.0 / 3.0).is_ok());
        assert!(gen_divergence_example(2.0, 8.0 / 5.0, 0.5).is_ok());
        assert!(matches!(
            gen_divergence_example(2.0, 2.0, 1.0),
            Err(Error::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn generate_dispatch() {
        let spec = ExampleSpec::with_overrides(ExampleName::OnbConstruction, &BTreeMap::new(), None).unwrap();
        match generate(&spec).unwrap() {
            Generated::Family { psi, operator, .. } => {
                let w = certify_weak_at(&psi, &operator).unwrap();
                assert!((w.alpha - 1.0).abs() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
        let bad = BTreeMap::from([("bogus".to_string(), 1.0)]);
        assert!(ExampleSpec::with_overrides(ExampleName::StftWeakFrame, &bad, None).is_err());
        for name in ["divergence_family", "stft_weak_frame", "exponential_parseval", "multiplication_frame", "onb_construction"] {
            assert_eq!(ExampleName::parse(name).unwrap().as_str(), name);
        }
    }
}
