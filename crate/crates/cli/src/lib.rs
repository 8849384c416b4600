//! Command-line front end: argument parsing, JSON reports and SVG output.

pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use lenscs_core::cs_exact::summed_sectors;
use lenscs_core::mirror::symbolic_moduli;
use lenscs_core::*;

use report::{Failure, ReportEnvelope, Timings};

#[derive(Parser, Debug)]
#[command(name = "lenscs", version, about = "Toric, exact and large-N Chern-Simons data for lens spaces L(p,q)")]
pub struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings in the report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fan, triangulation, Betti numbers and web of the resolved X_{p,q}.
    Fan(FanArgs),
    /// Newton polynomial of the mirror curve and its invariants.
    Mirror(MirrorArgs),
    /// Exact partition function of one flat-connection sector, or the sum over sectors.
    #[command(name = "exact-z")]
    ExactZ(ExactArgs),
    /// Eigenvalue integral by tensor quadrature or Monte Carlo.
    #[command(name = "matrix-z")]
    MatrixZ(MatrixArgs),
    /// Finite-N saddle point of the multi-cut model.
    Saddle(SaddleArgs),
    /// Spectral curve of the q = 1 model matched to given fillings.
    #[command(name = "curve-q1")]
    CurveQ1(CurveArgs),
    /// Whether the mirror of L(p,q) can host the constrained large-N curve.
    Claim1(PqArgs),
    /// Render the (p,q)-web as SVG.
    #[command(name = "web-svg")]
    WebSvg(WebSvgArgs),
    /// Solve the saddle point and render the cuts and densities as SVG.
    #[command(name = "density-svg")]
    DensitySvg(DensitySvgArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct PqArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub q: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct FanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pq: PqArgs,
    /// Also draw the fan and triangulation.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct MirrorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pq: PqArgs,
    /// Numeric moduli d_1..d_p; symbolic when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub d: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupArg {
    Su,
    U,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingArg {
    Representatives,
    Orbit,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftArg {
    Reduced,
    Traceless,
}

#[derive(Args, Debug, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pq: PqArgs,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    /// Level; the coupling is g_s^2 = 4 pi i / (k + N).
    #[arg(long, allow_negative_numbers = true)]
    pub k: i64,
    /// Flat connection, comma separated; zeros when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub m: Option<Vec<i64>>,
    /// Sum over flat connections instead of a single sector.
    #[arg(long)]
    pub sum_flat: bool,
    #[arg(long, value_enum, default_value = "su")]
    pub group: GroupArg,
    #[arg(long, value_enum, default_value = "representatives")]
    pub weighting: WeightingArg,
    #[arg(long, value_enum, default_value = "reduced")]
    pub lift: LiftArg,
    /// Largest N accepted; the sum has (N!)^2 terms.
    #[arg(long, default_value_t = 7)]
    pub max_n: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepArg {
    Mmcs,
    Mmcs2,
    Mmcs1a,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Quad,
    Mc,
}

#[derive(Args, Debug, Serialize)]
pub struct MatrixArgs {
    #[arg(long, value_enum)]
    pub rep: RepArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub pq: PqArgs,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    /// Real coupling.
    #[arg(long)]
    pub gs: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub m: Option<Vec<i64>>,
    #[arg(long, value_enum, default_value = "quad")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Largest N accepted by the tensor quadrature.
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct FillingArgs {
    #[arg(long)]
    pub t: f64,
    /// Filling of the trivial sector; the others share the rest equally.
    /// Defaults to t/p.
    #[arg(long = "S0")]
    #[serde(rename = "S0")]
    pub s0: Option<f64>,
    /// Explicit fillings S_0..S_{p-1}, overriding --S0.
    #[arg(long, value_delimiter = ',')]
    pub fillings: Option<Vec<f64>>,
}

impl FillingArgs {
    fn data(&self, p: u32) -> Result<TooftData> {
        match (&self.fillings, self.s0) {
            (Some(f), _) => TooftData::new(self.t, f.clone()),
            (None, Some(s0)) => TooftData::symmetric(p, self.t, s0),
            (None, None) => TooftData::symmetric(p, self.t, self.t / p.max(1) as f64),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SaddleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pq: PqArgs,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub fill: FillingArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub p: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub fill: FillingArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct WebSvgArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pq: PqArgs,
    #[arg(long)]
    pub svg: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct DensitySvgArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub saddle: SaddleArgs,
    #[arg(long)]
    pub svg: PathBuf,
}

/// What the binary prints and returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn lens(pq: &PqArgs) -> Result<LensSpace> {
    LensSpace::new(pq.p, pq.q)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn write_svg(path: &PathBuf, scene: &svg::SvgScene) -> std::result::Result<Value, Failure> {
    if !scene.all_finite() {
        return Err(Failure::Numeric("non-finite coordinate in SVG scene".into()));
    }
    std::fs::write(path, scene.to_svg()).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(json!({ "path": path.display().to_string(), "elements": scene.elements.len(), "view_box": scene.view_box() }))
}

fn fan_report(a: &FanArgs) -> std::result::Result<Value, Failure> {
    let ls = lens(&a.pq)?;
    let fan = build_fan(ls);
    let tri = triangulate(&fan)?;
    let mut out = json!({
        "fan": to_value(&fan),
        "interior_points": to_value(&interior_points(&fan)),
        "triangulation": to_value(&tri),
        "topology": to_value(&topology(&fan, &tri)),
        "web": to_value(&pq_web(&fan, &tri)),
        "lattice_width": lattice_width(&fan.points),
    });
    if let Some(path) = &a.svg {
        out["svg"] = write_svg(path, &svg::render_fan(&fan, &tri))?;
    }
    Ok(out)
}

fn mirror_report(a: &MirrorArgs) -> std::result::Result<Value, Failure> {
    let ls = lens(&a.pq)?;
    let coeffs = match &a.d {
        None => symbolic_moduli(ls.p()),
        Some(d) if d.len() == ls.p() as usize => {
            d.iter().enumerate().map(|(j, x)| (j as u32 + 1, Coefficient::real(*x))).collect()
        }
        Some(d) => return Err(Failure::Invalid(format!("--d needs p = {} values, got {}", ls.p(), d.len()))),
    };
    let np = newton_polynomial(ls, &coeffs)?;
    Ok(json!({
        "polynomial": to_value(&np),
        "display": np.to_string(),
        "invariants": to_value(&curve_invariants(&np)),
        "lattice_width": lattice_width(&np.support()),
        "map_to_fan": to_value(&np.map_to_fan(ls)),
    }))
}

fn exact_report(a: &ExactArgs) -> std::result::Result<Value, Failure> {
    let ls = lens(&a.pq)?;
    let exact = ExactOptions { max_n: a.max_n };
    let group = match a.group {
        GroupArg::Su => GaugeGroup::SpecialUnitary,
        GroupArg::U => GaugeGroup::Unitary,
    };
    if a.sum_flat {
        let weighting = match a.weighting {
            WeightingArg::Representatives => Weighting::Representatives,
            WeightingArg::Orbit => Weighting::OrbitSize,
        };
        let v = z_full(ls, a.n, a.k, &FullSumOptions { group, weighting, exact })?;
        let sectors = summed_sectors(ls.p(), a.n, group).len();
        return Ok(json!({
            "p": ls.p(), "q": ls.q(), "N": a.n, "k": a.k, "m": Value::Null,
            "re": v.value.re, "im": v.value.im, "abs": v.value.norm(),
            "convention": { "normalization": v.convention.normalization, "lift": to_value(&v.convention.lift),
                            "group": to_value(&a.group), "weighting": to_value(&a.weighting), "sectors": sectors },
        }));
    }
    let m = a.m.clone().unwrap_or_else(|| vec![0; a.n]);
    let lift = match a.lift {
        LiftArg::Reduced => Lift::Reduced,
        LiftArg::Traceless => Lift::Traceless,
    };
    let input = ExactCSInput::new(ls, a.n, Coupling::from_level(a.k, a.n)?, m.clone()).with_lift(lift);
    let v = z_exact_with(&input, &exact)?;
    Ok(json!({
        "p": ls.p(), "q": ls.q(), "N": a.n, "k": a.k, "m": m,
        "re": v.value.re, "im": v.value.im, "abs": v.value.norm(),
        "convention": to_value(&v.convention),
    }))
}

fn matrix_report(a: &MatrixArgs) -> std::result::Result<Value, Failure> {
    let ls = lens(&a.pq)?;
    let representation = match a.rep {
        RepArg::Mmcs => Representation::Mmcs,
        RepArg::Mmcs2 => Representation::Mmcs2,
        RepArg::Mmcs1a => Representation::Mmcs1a,
    };
    let m = a.m.clone().unwrap_or_else(|| vec![0; a.n]);
    let spec = MatrixModelSpec::new(ls, a.n, a.gs, m, representation);
    let r = match a.method {
        MethodArg::Quad => {
            z_quadrature_with(&spec, &QuadOptions { rel_tol: a.rel_tol, max_n: a.max_n, ..Default::default() })?
        }
        MethodArg::Mc => z_monte_carlo(&spec, a.samples, a.seed)?,
    };
    Ok(json!({
        "value_re": r.value.re,
        "value_im": r.value.im,
        "err": r.abs_error_estimate,
        "evals": r.evaluations,
        "converged": r.converged,
        "sector_prefactor": to_value(&r)["sector_prefactor"],
        "sector_value": { "re": r.sector_value().re, "im": r.sector_value().im },
        "contour_shift": spec.contour_shift(),
    }))
}

fn solve(a: &SaddleArgs) -> std::result::Result<(EquilibriumConfig, Vec<Density>), Failure> {
    let data = a.fill.data(a.pq.p)?;
    let problem = SaddleProblem { tol: a.tol, max_iter: a.max_iter, ..SaddleProblem::new(a.pq.p, a.pq.q, a.n, data) };
    let cfg = saddle_solve(&problem)?;
    let densities = (0..cfg.groups.len())
        .filter(|&i| cfg.groups[i].len() >= 2)
        .map(|i| empirical_density(&cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok((cfg, densities))
}

fn saddle_report(a: &SaddleArgs) -> std::result::Result<Value, Failure> {
    let (cfg, densities) = solve(a)?;
    Ok(json!({
        "config": to_value(&cfg),
        "parity_defect": cfg.parity_defect(),
        "densities": to_value(&densities),
    }))
}

fn curve_report(a: &CurveArgs) -> std::result::Result<Value, Failure> {
    let data = a.fill.data(a.p)?;
    if data.p() != a.p as usize {
        return Err(Failure::Invalid(format!("expected {} fillings, got {}", a.p, data.p())));
    }
    let curve = build_curve_q1_fillings(&data)?;
    let sheet = curve.sheet()?;
    let densities = (0..a.p as usize).map(|i| density_from_curve(&curve, i)).collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "curve": to_value(&curve),
        "mirror_coefficients": curve.mirror_coefficients(),
        "mirror_polynomial": curve.mirror_polynomial()?.to_string(),
        "cuts": to_value(&sheet.cuts),
        "a_periods": curve.a_periods()?,
        "densities": to_value(&densities),
    }))
}

fn claim1(a: &PqArgs) -> std::result::Result<Value, Failure> {
    Ok(to_value(&claim1_report(a.p, a.q)?))
}

fn web_svg(a: &WebSvgArgs) -> std::result::Result<Value, Failure> {
    let fan = build_fan(lens(&a.pq)?);
    let web = pq_web(&fan, &triangulate(&fan)?);
    Ok(json!({ "web": to_value(&web), "svg": write_svg(&a.svg, &svg::render_web(&web))? }))
}

fn density_svg(a: &DensitySvgArgs) -> std::result::Result<Value, Failure> {
    let (cfg, densities) = solve(&a.saddle)?;
    let scene = svg::render_density(&densities, cfg.p as usize);
    let cuts: Vec<Value> = densities
        .iter()
        .map(|d| json!({ "group": d.group, "support": [d.support.0, d.support.1], "height": 2.0 * std::f64::consts::PI * d.group as f64 / cfg.p as f64 }))
        .collect();
    Ok(json!({ "cuts": cuts, "residual": cfg.residual, "svg": write_svg(&a.svg, &scene)? }))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fan(_) => "fan",
        Command::Mirror(_) => "mirror",
        Command::ExactZ(_) => "exact-z",
        Command::MatrixZ(_) => "matrix-z",
        Command::Saddle(_) => "saddle",
        Command::CurveQ1(_) => "curve-q1",
        Command::Claim1(_) => "claim1",
        Command::WebSvg(_) => "web-svg",
        Command::DensitySvg(_) => "density-svg",
    }
}

fn dispatch(c: &Command) -> (Value, std::result::Result<Value, Failure>) {
    match c {
        Command::Fan(a) => (to_value(a), fan_report(a)),
        Command::Mirror(a) => (to_value(a), mirror_report(a)),
        Command::ExactZ(a) => (to_value(a), exact_report(a)),
        Command::MatrixZ(a) => (to_value(a), matrix_report(a)),
        Command::Saddle(a) => (to_value(a), saddle_report(a)),
        Command::CurveQ1(a) => (to_value(a), curve_report(a)),
        Command::Claim1(a) => (to_value(a), claim1(a)),
        Command::WebSvg(a) => (to_value(a), web_svg(a)),
        Command::DensitySvg(a) => (to_value(a), density_svg(a)),
    }
}

fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(raw) = std::env::var("LENSCS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("LENSCS_THREADS must be a positive integer, got {raw:?}")))?;
    // A pool may already exist when run() is called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                return Outcome { code: 2, stdout: String::new(), stderr: e.to_string() };
            }
            return Failure::Usage(e.render().to_string().trim().to_string()).outcome("");
        }
    };
    let name = command_name(&cli.command);
    if let Err(f) = configure_threads() {
        return f.outcome(name);
    }
    let start = Instant::now();
    let (inputs, result) = dispatch(&cli.command);
    let outputs = match result {
        Ok(v) => v,
        Err(f) => return f.outcome(name),
    };
    let envelope = ReportEnvelope {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: name.to_string(),
        inputs,
        outputs,
        timings: cli.timings.then(|| Timings { total_ms: start.elapsed().as_secs_f64() * 1e3 }),
    };
    let text = envelope.to_json();
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code: 0, stdout: String::new(), stderr: String::new() },
            Err(e) => Failure::Io(format!("{}: {e}", path.display())).outcome(name),
        },
        None => Outcome { code: 0, stdout: text, stderr: String::new() },
    }
}
