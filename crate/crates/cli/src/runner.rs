//! Executes one scenario into a list of report records.

use cframe::frame::divergence::{cauchy_tail, default_m_grid, probe, DivergenceParams};
use cframe::frame::{certify_bessel, certify_frame_with, Residual};
use cframe::gallery::{generate, ExampleName, ExampleSpec, Generated};
use cframe::instances::{random_k_instance, random_square_instance};
use cframe::io::{load_family, load_matrix};
use cframe::kframe::{atomic_system_factor, certify_k_frame_with, equivalence_harness};
use cframe::report::Record;
use cframe::weak::{
    certify_graph_a_frame_with, certify_weak_a_frame_with, certify_weak_at_with,
    corollary_equivalences, onb_atomic_system, OperatorLadder,
};
use cframe::{CMatrix, LinearMap, MeasureSpace, VectorFamily, DEFAULT_FRAME_RTOL};

use crate::error::CliError;
use crate::scenario::{Harness, Kind, LadderFamily, LadderSpec, Scenario};

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub rtol: Option<f64>,
}

/// Default number of harness instances.
pub const DEFAULT_INSTANCES: u64 = 200;
/// Default accepted distance of the fitted growth exponent.
pub const DEFAULT_SLOPE_WINDOW: f64 = 0.05;
/// Default largest tail bound of the square-summable series.
pub const DEFAULT_TAIL_MAX: f64 = 1e-6;
/// Default truncation index of the tail estimate.
pub const DEFAULT_TAIL_N: f64 = 1e6;
/// Largest accepted `|beta - 1|` of the discretized exponential family.
pub const PARSEVAL_BETA_TOL: f64 = 5e-3;
/// Largest accepted deviation of the discrete STFT frame bounds from 1.
pub const STFT_PARSEVAL_TOL: f64 = 1e-12;
/// Largest accepted `1 - alpha` of the STFT weak frame.
pub const STFT_ALPHA_TOL: f64 = 1e-8;

struct Ctx<'a> {
    scn: &'a Scenario,
    rtol: f64,
    seed: Option<u64>,
}

pub fn run_scenario(scn: &Scenario, opts: &RunOptions) -> Result<Vec<Record>, CliError> {
    let rtol = opts
        .rtol
        .or(scn.tolerances.rtol)
        .unwrap_or(DEFAULT_FRAME_RTOL);
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(CliError::Config {
            path: scn.base_dir.clone(),
            message: format!("rtol must lie in (0, 1), got {rtol}"),
        });
    }
    let ctx = Ctx {
        scn,
        rtol,
        seed: opts.seed.or(scn.seed),
    };
    match scn.kind {
        Kind::FrameCheck => frame_check(&ctx),
        Kind::KFrameCheck => k_frame_check(&ctx),
        Kind::WeakACheck => weak_check(&ctx),
        Kind::GraphCheck => graph_check(&ctx),
        Kind::EquivalenceHarness => harness(&ctx),
        Kind::DivergenceProbe => divergence(&ctx),
        Kind::Gallery => gallery(&ctx),
    }
}

/// Whether every record passes.
pub fn all_pass(records: &[Record]) -> bool {
    records.iter().all(|r| r.verdict)
}

fn load_checked<T>(
    scn: &Scenario,
    p: &std::path::Path,
    load: fn(&std::path::Path) -> cframe::Result<T>,
) -> Result<T, CliError> {
    let path = scn.resolve(p);
    if !path.exists() {
        return Err(CliError::MissingFixture(path));
    }
    Ok(load(&path)?)
}

fn example_spec(scn: &Scenario) -> Result<ExampleSpec, CliError> {
    let name = scn.inputs.example.as_deref().unwrap_or_default();
    let name = ExampleName::parse(name)?;
    Ok(ExampleSpec::with_overrides(
        name,
        &scn.inputs.params,
        scn.inputs.choice.clone(),
    )?)
}

/// Family, operator, and the underlying family for generated examples.
struct Inputs {
    psi: VectorFamily,
    operator: Option<CMatrix>,
    base: Option<VectorFamily>,
}

fn inputs(scn: &Scenario) -> Result<Inputs, CliError> {
    if let Some(f) = &scn.inputs.family {
        let psi = load_checked(scn, f, load_family)?;
        let operator = match &scn.inputs.operator {
            Some(o) => Some(load_checked(scn, o, load_matrix)?),
            None => None,
        };
        return Ok(Inputs {
            psi,
            operator,
            base: None,
        });
    }
    match generate(&example_spec(scn)?)? {
        Generated::Family {
            psi,
            operator,
            base,
        } => Ok(Inputs {
            psi,
            operator: Some(operator),
            base,
        }),
        Generated::Divergence(_) => Err(CliError::Config {
            path: scn.base_dir.clone(),
            message: "the divergence example has no vector family".into(),
        }),
    }
}

fn operator_of(scn: &Scenario, i: &Inputs) -> Result<CMatrix, CliError> {
    i.operator.clone().ok_or_else(|| CliError::Config {
        path: scn.base_dir.clone(),
        message: format!("kind `{}` needs an operator", scn.kind.as_str()),
    })
}

fn frame_check(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    let i = inputs(ctx.scn)?;
    let fam = i.base.as_ref().unwrap_or(&i.psi);
    let cert = certify_frame_with(fam, ctx.rtol);
    Ok(vec![Record::from_certificate(&ctx.scn.id, "frame", &cert)])
}

fn k_frame_check(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    let i = inputs(ctx.scn)?;
    let k = LinearMap::new(operator_of(ctx.scn, &i)?)?;
    let cert = certify_k_frame_with(&i.psi, &k, ctx.rtol)?;
    let atomic = atomic_system_factor(&i.psi, &k)?;
    let mut rec = Record::from_certificate(&ctx.scn.id, "atomic_system", &atomic.certificate);
    rec.extra("factorization_residual", atomic.factorization_residual);
    Ok(vec![Record::from_certificate(&ctx.scn.id, "k_frame", &cert), rec])
}

fn ladder_record(ctx: &Ctx, spec: &LadderSpec) -> Result<Record, CliError> {
    let ladder = OperatorLadder::by_name(&spec.name, spec.dims.clone())?;
    let per = spec.points_per_block.unwrap_or(1);
    let cert = match spec.family {
        LadderFamily::OnbConstruction => certify_weak_a_frame_with(
            |n| onb_atomic_system(&ladder, n, &MeasureSpace::blocks_of(&vec![1.0; n], per)?),
            &ladder,
            ctx.rtol,
        )?,
        LadderFamily::FixedBasis => {
            certify_weak_a_frame_with(VectorFamily::orthonormal_basis, &ladder, ctx.rtol)?
        }
    };
    let mut rec = Record::from_ladder(&ctx.scn.id, "weak_a_ladder", &cert);
    // A ladder certifies the operator only when alpha is uniform.
    rec.verdict = cert.verdict() && cert.stable;
    rec.extra(
        "family",
        match spec.family {
            LadderFamily::OnbConstruction => "onb_construction",
            LadderFamily::FixedBasis => "fixed_basis",
        },
    );
    Ok(rec)
}

fn weak_check(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    if let Some(spec) = &ctx.scn.ladder {
        return Ok(vec![ladder_record(ctx, spec)?]);
    }
    let i = inputs(ctx.scn)?;
    let a = operator_of(ctx.scn, &i)?;
    let cert = certify_weak_at_with(&i.psi, &a, ctx.rtol)?;
    Ok(vec![Record::from_certificate(&ctx.scn.id, "weak_a_frame", &cert)])
}

fn graph_check(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    let i = inputs(ctx.scn)?;
    let a = operator_of(ctx.scn, &i)?;
    let cert = certify_graph_a_frame_with(&i.psi, &a, ctx.rtol)?;
    Ok(vec![Record::from_certificate(&ctx.scn.id, "graph_a_frame", &cert)])
}

fn harness(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    let seed = ctx.seed.ok_or_else(|| CliError::Config {
        path: ctx.scn.base_dir.clone(),
        message: "`seed` is required for equivalence_harness".into(),
    })?;
    let n = ctx.scn.inputs.instances.unwrap_or(DEFAULT_INSTANCES);
    let kind = ctx.scn.inputs.harness.unwrap_or_default();
    let mut records = Vec::with_capacity(n as usize + 1);
    let mut counts = [0u64; 2];
    let mut agreeing = 0u64;
    for idx in 0..n {
        let (table, inst, label) = match kind {
            Harness::KFrame => {
                let inst = random_k_instance(seed, idx);
                (equivalence_harness(&inst.psi, &inst.operator)?, inst, "k_frame_equivalence")
            }
            Harness::Graph => {
                let inst = random_square_instance(seed, idx);
                (corollary_equivalences(&inst.psi, &inst.operator)?, inst, "graph_equivalence")
            }
        };
        if let Some(v) = table.verdict() {
            counts[v as usize] += 1;
        }
        agreeing += table.agreement as u64;
        let mut rec = Record::from_table(&ctx.scn.id, "equivalence", label, &table, ctx.rtol)
            .with_instance(idx);
        rec.extra("mode", inst.mode);
        rec.extra("dim", inst.psi.dim());
        rec.extra("points", inst.psi.len());
        rec.extra("family_rank", inst.family_rank);
        rec.extra("operator_rank", inst.operator_rank);
        records.push(rec);
    }
    let mut summary = Record::new(&ctx.scn.id, "summary", "equivalence_summary", ctx.rtol, agreeing == n);
    summary.extra("agreement", agreeing == n);
    summary.extra("instances", n);
    summary.extra("agreeing", agreeing);
    summary.extra("holds", counts[1]);
    summary.extra("fails", counts[0]);
    summary.extra("seed", seed);
    records.push(summary);
    Ok(records)
}

fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (0..points)
        .map(|k| {
            let t = if points > 1 { k as f64 / (points - 1) as f64 } else { 0.0 };
            (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as usize
        })
        .collect();
    grid.dedup();
    grid
}

fn divergence_record(ctx: &Ctx, params: &DivergenceParams) -> Result<Record, CliError> {
    let p = &ctx.scn.inputs.params;
    let grid = match (p.get("m_min"), p.get("m_max"), p.get("points")) {
        (None, None, None) => default_m_grid(),
        (lo, hi, pts) => geometric_grid(
            lo.copied().unwrap_or(1e2),
            hi.copied().unwrap_or(1e4),
            pts.copied().unwrap_or(41.0) as usize,
        ),
    };
    let tail_n = p.get("tail_n").copied().unwrap_or(DEFAULT_TAIL_N) as usize;
    let report = probe(params, &grid)?;
    let tail = cauchy_tail(params, tail_n)?;
    let window = ctx.scn.tolerances.slope_window.unwrap_or(DEFAULT_SLOPE_WINDOW);
    let tail_max = ctx.scn.tolerances.tail_max.unwrap_or(DEFAULT_TAIL_MAX);
    let mut rec = Record::new(&ctx.scn.id, "divergence", "divergence_probe", ctx.rtol, false);
    rec.residuals.insert(
        "slope_error".into(),
        Residual {
            value: (report.slope - report.expected).abs(),
            threshold: window,
        },
    );
    rec.residuals.insert(
        "tail_bound".into(),
        Residual {
            value: tail.tail_bound(),
            threshold: tail_max,
        },
    );
    rec.verdict = rec.residuals.values().all(Residual::passes);
    rec.extra("slope", report.slope);
    rec.extra("literal_slope", report.literal_slope);
    rec.extra("expected", report.expected);
    rec.extra("params", params);
    rec.extra("m_min", report.m_grid.first());
    rec.extra("m_max", report.m_grid.last());
    rec.extra("grid_points", report.m_grid.len());
    rec.extra("tail", &tail);
    Ok(rec)
}

fn divergence(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    let p = &ctx.scn.inputs.params;
    let params = DivergenceParams::new(p["p"], p["alpha"], p["beta"])?;
    Ok(vec![divergence_record(ctx, &params)?])
}

fn with_residual(mut rec: Record, name: &str, value: f64, threshold: f64) -> Record {
    let r = Residual { value, threshold };
    rec.verdict &= r.passes();
    rec.residuals.insert(name.into(), r);
    rec
}

fn gallery(ctx: &Ctx) -> Result<Vec<Record>, CliError> {
    let spec = example_spec(ctx.scn)?;
    let id = &ctx.scn.id;
    let generated = generate(&spec)?;
    let (psi, operator, base) = match generated {
        Generated::Divergence(params) => return Ok(vec![divergence_record(ctx, &params)?]),
        Generated::Family {
            psi,
            operator,
            base,
        } => (psi, operator, base),
    };
    let mut records = Vec::new();
    match spec.name {
        ExampleName::ExponentialParseval => {
            let theta = base.expect("exponential example carries theta");
            let b = certify_bessel(&theta);
            let defect = (b.beta - 1.0).abs();
            let mut rec = with_residual(
                Record::from_certificate(id, "parseval_bessel", &b),
                "beta_defect",
                defect,
                PARSEVAL_BETA_TOL,
            );
            rec.extra("params", &spec.params);
            records.push(rec);
            let w = certify_weak_at_with(&psi, &operator, ctx.rtol)?;
            records.push(Record::from_certificate(id, "weak_a_frame", &w));
        }
        ExampleName::StftWeakFrame => {
            let theta = base.expect("stft example carries theta");
            let f = certify_frame_with(&theta, ctx.rtol);
            let defect = (f.alpha - 1.0).abs().max((f.beta - 1.0).abs());
            let mut rec = with_residual(
                Record::from_certificate(id, "stft_parseval", &f),
                "parseval_defect",
                defect,
                STFT_PARSEVAL_TOL,
            );
            rec.extra("params", &spec.params);
            records.push(rec);
            let w = certify_weak_at_with(&psi, &operator, ctx.rtol)?;
            let short = (1.0 - w.alpha).max(0.0);
            records.push(with_residual(
                Record::from_certificate(id, "weak_a_frame", &w),
                "alpha_defect",
                short,
                STFT_ALPHA_TOL,
            ));
        }
        ExampleName::MultiplicationFrame => {
            let k = LinearMap::new(operator)?;
            let cert = certify_k_frame_with(&psi, &k, ctx.rtol)?;
            let mut rec = Record::from_certificate(id, "k_frame", &cert);
            rec.extra("params", &spec.params);
            records.push(rec);
        }
        ExampleName::OnbConstruction => {
            let w = certify_weak_at_with(&psi, &operator, ctx.rtol)?;
            let mut rec = Record::from_certificate(id, "weak_a_frame", &w);
            rec.extra("params", &spec.params);
            records.push(rec);
        }
        ExampleName::DivergenceFamily => unreachable!("handled above"),
    }
    Ok(records)
}
