//! Table, component-trace and convergence runs behind the `apost` binary.
//!
//! Every command returns its CSV as a `String`; the binary only decides where
//! it goes.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;

use apost_core::estimators::{
    asymptotic_euler_bounds, component_trace, estimate_backward_euler,
    estimate_backward_euler_all, estimate_bdf2, estimate_crank_nicolson_all, estimate_dg1,
    estimate_extrapolated,
};
use apost_core::steppers::{
    final_error, run_backward_euler, run_bdf2, run_crank_nicolson, run_dg1,
    run_extrapolated_euler, run_reference,
};
use apost_core::{
    BackwardEulerVariant, CrankNicolsonVariant, Discretisation, EstimatorContext,
    EstimatorOptions, FhatVariant, GreenFunctionBounds, ParabolicProblem, QuadRule, TimeMesh,
    Trajectory,
};

/// Errors below this are round-off; no convergence order is printed for them.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Euler,
    Cn,
    Extrap,
    Dg1,
    Bdf2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MeshArg {
    Uniform,
    Pairdouble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ProblemArg {
    /// `f = e^{−4t} + cos(π(x+t)³)`, weights with `γ = 1/√2`: the published tables.
    #[default]
    Tabulated,
    /// `f = e^{−4t} − cos(π(x+t)³)`, `γ = 1/2`.
    Stated,
    /// `f = Lu⁰` with `u⁰ = sin(π(1+x)/2)`: the exact solution does not move.
    Steady,
}

impl ProblemArg {
    pub fn build(self) -> ParabolicProblem {
        match self {
            ProblemArg::Tabulated => ParabolicProblem::tabulated_test_problem(),
            ProblemArg::Stated => ParabolicProblem::test_problem(),
            ProblemArg::Steady => steady_problem(*ParabolicProblem::tabulated_test_problem().green()),
        }
    }
}

fn steady_problem(green: GreenFunctionBounds) -> ParabolicProblem {
    use std::f64::consts::PI;
    ParabolicProblem::new(
        |x| 5.0 * x + 6.0,
        |x, _| ((PI / 2.0).powi(2) + 5.0 * x + 6.0) * (PI * (1.0 + x) / 2.0).sin(),
        |x| (PI * (1.0 + x) / 2.0).sin(),
        1.0,
        green,
    )
    .expect("steady problem is well posed")
}

/// A requested bound. `BoundV`/`BoundW` are the asymptotic bounds for the two
/// Euler runs inside extrapolation and are compared with those runs' errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorTag {
    Dlm,
    Kl1,
    Dlmkl,
    Lr,
    Combined,
    Kl2,
    Cn1,
    Cn2,
    CnComb,
    CnKl2,
    Extrap,
    BoundV,
    BoundW,
    Dg1,
    Bdf2,
}

impl EstimatorTag {
    pub fn method(self) -> MethodArg {
        use EstimatorTag::*;
        match self {
            Dlm | Kl1 | Dlmkl | Lr | Combined | Kl2 => MethodArg::Euler,
            Cn1 | Cn2 | CnComb | CnKl2 => MethodArg::Cn,
            Extrap | BoundV | BoundW => MethodArg::Extrap,
            Dg1 => MethodArg::Dg1,
            Bdf2 => MethodArg::Bdf2,
        }
    }

    pub fn defaults(method: MethodArg) -> Vec<EstimatorTag> {
        use EstimatorTag::*;
        match method {
            MethodArg::Euler => vec![Dlm, Kl1, Dlmkl],
            MethodArg::Cn => vec![Cn1, Cn2, CnComb],
            MethodArg::Extrap => vec![Extrap],
            MethodArg::Dg1 => vec![Dg1],
            MethodArg::Bdf2 => vec![Bdf2],
        }
    }

    fn backward_euler(self, j: usize) -> Option<BackwardEulerVariant> {
        use BackwardEulerVariant as V;
        Some(match self {
            EstimatorTag::Dlm => V::Dlm,
            EstimatorTag::Kl1 => V::Kl1,
            EstimatorTag::Dlmkl => V::Dlmkl,
            EstimatorTag::Lr => V::Lr,
            EstimatorTag::Combined => V::Combined,
            EstimatorTag::Kl2 => V::Kl2 { j },
            _ => return None,
        })
    }

    fn crank_nicolson(self, j: usize) -> Option<CrankNicolsonVariant> {
        use CrankNicolsonVariant as V;
        Some(match self {
            EstimatorTag::Cn1 => V::Cn1,
            EstimatorTag::Cn2 => V::Cn2,
            EstimatorTag::CnComb => V::CnComb,
            EstimatorTag::CnKl2 => V::CnKl2 { j },
            _ => return None,
        })
    }
}

impl fmt::Display for EstimatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use EstimatorTag::*;
        f.write_str(match self {
            Dlm => "DLM",
            Kl1 => "KL1",
            Dlmkl => "DLMKL",
            Lr => "LR",
            Combined => "COMBINED",
            Kl2 => "KL2",
            Cn1 => "CN1",
            Cn2 => "CN2",
            CnComb => "CNCOMB",
            CnKl2 => "CNKL2",
            Extrap => "EXTRAP",
            BoundV => "BOUND_V",
            BoundW => "BOUND_W",
            Dg1 => "DG1",
            Bdf2 => "BDF2",
        })
    }
}

impl FromStr for EstimatorTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        use EstimatorTag::*;
        Ok(match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "DLM" => Dlm,
            "KL1" => Kl1,
            "DLMKL" => Dlmkl,
            "LR" => Lr,
            "COMBINED" => Combined,
            "KL2" => Kl2,
            "CN1" => Cn1,
            "CN2" => Cn2,
            "CNCOMB" => CnComb,
            "CNKL2" => CnKl2,
            "EXTRAP" => Extrap,
            "BOUND_V" => BoundV,
            "BOUND_W" => BoundW,
            "DG1" => Dg1,
            "BDF2" => Bdf2,
            _ => return Err(format!("unknown estimator {s:?}")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: MethodArg,
    /// Empty means the method's default set.
    pub estimators: Vec<EstimatorTag>,
    pub mesh: MeshArg,
    pub steps: Vec<usize>,
    pub degree: usize,
    pub sampling: usize,
    pub quad: QuadRule,
    pub fhat_variant: FhatVariant,
    /// `J` of the KL2-type bounds.
    pub j: usize,
    pub problem: ProblemArg,
    /// The reference runs on a mesh with this many times as many steps.
    pub reference_refinement: usize,
    /// Adds `η_f̂` to the component trace.
    pub with_fhat: bool,
}

impl RunConfig {
    pub fn new(method: MethodArg, mesh: MeshArg, steps: Vec<usize>) -> Self {
        Self {
            method,
            estimators: Vec::new(),
            mesh,
            steps,
            degree: 31,
            sampling: 1001,
            quad: QuadRule::Simpson,
            fhat_variant: FhatVariant::Paper,
            j: 1,
            problem: ProblemArg::Tabulated,
            reference_refinement: 1,
            with_fhat: false,
        }
    }

    pub fn tags(&self) -> Vec<EstimatorTag> {
        if self.estimators.is_empty() {
            EstimatorTag::defaults(self.method)
        } else {
            self.estimators.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for tag in self.tags() {
            ensure!(
                tag.method() == self.method,
                "estimator {tag} does not apply to method {:?}",
                self.method
            );
        }
        ensure!(self.sampling >= 2, "--sampling must be at least 2");
        ensure!(self.reference_refinement >= 1, "reference refinement must be positive");
        for &m in &self.steps {
            ensure!(m > 0, "step counts must be positive");
            if self.mesh == MeshArg::Pairdouble {
                ensure!(m % 2 == 0, "pair-doubling mesh needs an even step count, got M={m}");
            }
            let kl2 = self
                .tags()
                .iter()
                .any(|t| matches!(t, EstimatorTag::Kl2 | EstimatorTag::CnKl2));
            if kl2 {
                ensure!((1..=m).contains(&self.j), "J={} is outside [1, {m}]", self.j);
            }
            if self.method == MethodArg::Bdf2 {
                ensure!(m >= 3, "the BDF-2 bound needs M >= 3, got M={m}");
            }
        }
        Ok(())
    }

    fn mesh(&self, m: usize, horizon: f64) -> Result<TimeMesh> {
        Ok(match self.mesh {
            MeshArg::Uniform => TimeMesh::uniform(m, horizon)?,
            MeshArg::Pairdouble => TimeMesh::pair_doubling(m, horizon)?,
        })
    }

    fn options(&self) -> EstimatorOptions {
        EstimatorOptions {
            rule: self.quad,
            sampling: self.sampling,
            fhat_variant: self.fhat_variant,
        }
    }
}

/// One estimator total together with the error it bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub tag: EstimatorTag,
    pub est: f64,
    pub err: f64,
}

/// Everything computed for one step count.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub m: usize,
    /// `‖u(T) − U^M‖_∞` for the method's main approximation.
    pub err: f64,
    /// Extrapolation only: `(err_V, err_W, ‖W^M − V^M‖)`.
    pub euler_pair: Option<(f64, f64, f64)>,
    pub estimates: Vec<Estimate>,
}

struct Setup {
    problem: ParabolicProblem,
    disc: Discretisation,
}

impl Setup {
    fn new(config: &RunConfig) -> Result<Self> {
        let problem = config.problem.build();
        let disc = Discretisation::new(&problem, config.degree)?;
        Ok(Self { problem, disc })
    }
}

/// Runs the configured method on `M` steps and evaluates the requested bounds.
pub fn evaluate(config: &RunConfig, m: usize) -> Result<Evaluation> {
    config.validate()?;
    let setup = Setup::new(config)?;
    evaluate_with(config, &setup, m)
}

fn evaluate_with(config: &RunConfig, setup: &Setup, m: usize) -> Result<Evaluation> {
    let (p, disc) = (&setup.problem, &setup.disc);
    let mesh = config.mesh(m, p.horizon())?;
    let ref_mesh = config.mesh(m * config.reference_refinement, p.horizon())?;
    let reference = run_reference(p, &ref_mesh, disc)?;
    let ctx = EstimatorContext::new(p, disc, config.options());
    let err = |u: &Trajectory| final_error(u, &reference, &disc.grid, config.sampling);
    let tags = config.tags();
    let with_err = |err: f64, totals: Vec<f64>| -> Vec<Estimate> {
        tags.iter()
            .zip(totals)
            .map(|(&tag, est)| Estimate { tag, est, err })
            .collect()
    };

    let evaluation = match config.method {
        MethodArg::Euler => {
            let u = run_backward_euler(p, &mesh, disc)?;
            let variants: Vec<_> = tags.iter().filter_map(|t| t.backward_euler(config.j)).collect();
            let totals = estimate_backward_euler_all(&u, &variants, &ctx)?
                .into_iter()
                .map(|r| r.total)
                .collect();
            let e = err(&u)?;
            Evaluation { m, err: e, euler_pair: None, estimates: with_err(e, totals) }
        }
        MethodArg::Cn => {
            let u = run_crank_nicolson(p, &mesh, disc)?;
            let variants: Vec<_> = tags.iter().filter_map(|t| t.crank_nicolson(config.j)).collect();
            let totals = estimate_crank_nicolson_all(&u, &variants, &ctx)?
                .into_iter()
                .map(|r| r.total)
                .collect();
            let e = err(&u)?;
            Evaluation { m, err: e, euler_pair: None, estimates: with_err(e, totals) }
        }
        MethodArg::Extrap => {
            let run = run_extrapolated_euler(p, &mesh, disc)?;
            let report = estimate_extrapolated(&run, &ctx)?;
            let bounds = asymptotic_euler_bounds(&run, &report, &ctx)?;
            let (e_u, e_v, e_w) = (err(&run.extrapolated)?, err(&run.coarse)?, err(&run.fine)?);
            let estimates = tags
                .iter()
                .map(|&tag| match tag {
                    EstimatorTag::BoundV => Estimate { tag, est: bounds.bound_for_v, err: e_v },
                    EstimatorTag::BoundW => Estimate { tag, est: bounds.bound_for_w, err: e_w },
                    _ => Estimate { tag, est: report.total, err: e_u },
                })
                .collect();
            Evaluation { m, err: e_u, euler_pair: Some((e_v, e_w, bounds.wv_gap)), estimates }
        }
        MethodArg::Dg1 => {
            let u = run_dg1(p, &mesh, disc)?;
            let e = err(&u)?;
            let total = estimate_dg1(&u, &ctx)?.total;
            Evaluation { m, err: e, euler_pair: None, estimates: with_err(e, vec![total]) }
        }
        MethodArg::Bdf2 => {
            let u = run_bdf2(p, &mesh, disc)?;
            let e = err(&u)?;
            let total = estimate_bdf2(&u, &ctx)?.total;
            Evaluation { m, err: e, euler_pair: None, estimates: with_err(e, vec![total]) }
        }
    };
    Ok(evaluation)
}

/// Evaluates every requested `M` in parallel; results keep the order of `config.steps`.
pub fn evaluate_all(config: &RunConfig) -> Result<Vec<Evaluation>> {
    config.validate()?;
    let setup = Setup::new(config)?;
    config
        .steps
        .par_iter()
        .map(|&m| {
            evaluate_with(config, &setup, m)
                .with_context(|| format!("method {:?} failed at M={m}", config.method))
        })
        .collect()
}

/// Four significant digits with a two-digit exponent, e.g. `1.045e-04`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Efficiency `err/est` and its `1/n` form with `n = round(est/err)`.
pub fn efficiency(err: f64, est: f64) -> (String, String) {
    let ratio = if est > 0.0 { sci(err / est) } else { String::new() };
    let inverse = if err > 0.0 && est > 0.0 {
        format!("1/{}", (est / err).round())
    } else {
        String::new()
    };
    (ratio, inverse)
}

fn to_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Column order: `M, err`, then `err_V, err_W, wv_gap` for extrapolation
/// runs, then `<EST>, <EST>_eff, <EST>_eff_inv` for each requested bound
/// (`_eff = err/est`, `_eff_inv = 1/round(est/err)`).
pub fn table_header(config: &RunConfig) -> Vec<String> {
    let mut header = vec!["M".to_string(), "err".to_string()];
    if config.method == MethodArg::Extrap {
        header.extend(["err_V", "err_W", "wv_gap"].map(String::from));
    }
    for tag in config.tags() {
        header.push(tag.to_string());
        header.push(format!("{tag}_eff"));
        header.push(format!("{tag}_eff_inv"));
    }
    header
}

pub fn table(config: &RunConfig) -> Result<String> {
    let header = table_header(config);
    let rows = evaluate_all(config)?
        .into_iter()
        .map(|ev| {
            let mut row = vec![ev.m.to_string(), sci(ev.err)];
            if let Some((v, w, gap)) = ev.euler_pair {
                row.extend([sci(v), sci(w), sci(gap)]);
            }
            for e in &ev.estimates {
                let (ratio, inverse) = efficiency(e.err, e.est);
                row.extend([sci(e.est), ratio, inverse]);
            }
            row
        })
        .collect();
    to_csv(header, rows)
}

/// Components of the Figure-1 style trace, in output order.
pub fn trace_components(with_fhat: bool) -> Vec<&'static str> {
    let mut names = vec!["eta_f_bar", "eta_delta_LU", "eta_delta_U", "eta_delta2_U"];
    if with_fhat {
        names.push("eta_f_hat");
    }
    names
}

/// Long-format `t, component, value` rows of the unweighted backward Euler
/// components for a single `M`.
pub fn components(config: &RunConfig) -> Result<String> {
    if config.method != MethodArg::Euler {
        bail!("components are only available for --method euler");
    }
    let [m] = config.steps[..] else {
        bail!("components needs exactly one --M, got {}", config.steps.len());
    };
    config.validate()?;
    let setup = Setup::new(config)?;
    let mesh = config.mesh(m, setup.problem.horizon())?;
    let u = run_backward_euler(&setup.problem, &mesh, &setup.disc)?;
    let ctx = EstimatorContext::new(&setup.problem, &setup.disc, config.options());
    let report = estimate_backward_euler(&u, BackwardEulerVariant::Combined, &ctx)?;
    let wanted = trace_components(config.with_fhat);
    let mut rows: Vec<(usize, usize, Vec<String>)> = component_trace(&report)
        .into_iter()
        .filter_map(|r| {
            let k = wanted.iter().position(|&w| w == r.component)?;
            Some((r.j, k, vec![r.t.to_string(), r.component.to_string(), sci(r.value)]))
        })
        .collect();
    rows.sort_by_key(|(j, k, _)| (*j, *k));
    let header = ["t", "component", "value"].map(String::from).to_vec();
    to_csv(header, rows.into_iter().map(|(_, _, r)| r).collect())
}

/// `log₂(a/b)`, or `None` when either value is at round-off level.
pub fn order(previous: f64, current: f64) -> Option<f64> {
    (previous > NOISE_FLOOR && current > NOISE_FLOOR).then(|| (previous / current).log2())
}

/// Rows `M, err, err_order, <EST>, <EST>_order, …` over a doubling sequence of `M`.
pub fn convergence(config: &RunConfig) -> Result<String> {
    ensure!(config.steps.len() >= 2, "convergence needs at least two --M values");
    for w in config.steps.windows(2) {
        ensure!(w[1] == 2 * w[0], "--M values must double: {} then {}", w[0], w[1]);
    }
    let mut header = vec!["M".to_string(), "err".to_string(), "err_order".to_string()];
    for tag in config.tags() {
        header.push(tag.to_string());
        header.push(format!("{tag}_order"));
    }
    let evals = evaluate_all(config)?;
    let fmt_order = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_default();
    let rows = evals
        .iter()
        .enumerate()
        .map(|(i, ev)| {
            let prev = i.checked_sub(1).map(|k| &evals[k]);
            let mut row = vec![
                ev.m.to_string(),
                sci(ev.err),
                fmt_order(prev.and_then(|p| order(p.err, ev.err))),
            ];
            for (k, e) in ev.estimates.iter().enumerate() {
                row.push(sci(e.est));
                row.push(fmt_order(prev.and_then(|p| order(p.estimates[k].est, e.est))));
            }
            row
        })
        .collect();
    to_csv(header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format() {
        assert_eq!(sci(1.045e-4), "1.045e-04");
        assert_eq!(sci(7.3333e-2), "7.333e-02");
        assert_eq!(sci(0.0), "0.000e+00");
        assert_eq!(sci(123456.0), "1.235e+05");
    }

    #[test]
    fn efficiency_forms() {
        assert_eq!(efficiency(1.045e-4, 3.596e-2), ("2.906e-03".into(), "1/344".into()));
        assert_eq!(efficiency(0.0, 1.0).1, "");
        assert_eq!(efficiency(1.0, 0.0), (String::new(), String::new()));
    }

    #[test]
    fn tags_round_trip() {
        for method in [MethodArg::Euler, MethodArg::Cn, MethodArg::Extrap, MethodArg::Dg1, MethodArg::Bdf2] {
            for tag in EstimatorTag::defaults(method) {
                assert_eq!(tag.to_string().parse::<EstimatorTag>().unwrap(), tag);
                assert_eq!(tag.method(), method);
            }
        }
        assert_eq!("bound-w".parse::<EstimatorTag>().unwrap(), EstimatorTag::BoundW);
        assert!("KL3".parse::<EstimatorTag>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(MethodArg::Euler, MeshArg::Pairdouble, vec![255]);
        assert!(c.validate().is_err());
        c.steps = vec![256];
        c.estimators = vec![EstimatorTag::Cn1];
        assert!(c.validate().is_err());
        c.estimators = vec![EstimatorTag::Kl2];
        c.j = 257;
        assert!(c.validate().is_err());
        c.j = 256;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn empty_step_list_gives_header_only() {
        let c = RunConfig::new(MethodArg::Euler, MeshArg::Pairdouble, vec![]);
        assert_eq!(
            table(&c).unwrap(),
            "M,err,DLM,DLM_eff,DLM_eff_inv,KL1,KL1_eff,KL1_eff_inv,DLMKL,DLMKL_eff,DLMKL_eff_inv\n"
        );
    }

    #[test]
    fn orders_skip_round_off() {
        assert_eq!(order(1e-15, 1e-16), None);
        assert!((order(4e-6, 1e-6).unwrap() - 2.0).abs() < 1e-15);
    }
}
