//! Command-line suites and report serialization.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dsl::run_diagram;
use crate::error::{Error, Result};
use crate::fields::{
    dec, enc, factor_through_theta, factorization_residual, random_product_inputs, theta,
    FieldSpace, DEFAULT_SIZE_BUDGET,
};
use crate::frobenius::{check_frobenius_laws, check_strong_complementarity};
use crate::groups::LatticePoint;
use crate::hilb::{dimension_scalar, snake_residuals, TruncatedSpace};
use crate::qho::{oscillator_check, Oscillator, OscillatorField, SpectrumRow};
use crate::report::CheckReport;
use crate::sparse::C64;
use crate::systems::{make_lattice_system, make_real_system, make_torus_system, QuantumSystem};

/// Overrides the default size budget for field constructions.
pub const SIZE_BUDGET_ENV: &str = "STARHILB_SIZE_BUDGET";

/// Smallest copy residual required of off-mesh classicality probes.
pub const OFF_MESH_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Laws,
    Classicality,
    StrongComp,
    Ccr,
    FieldsUniversal,
    Qho,
    FieldSpectra,
    Diagram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Torus,
    Lattice,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    StructuredText,
    Tabular,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "starhilb", version, about = "Verification suites for truncated Hilbert space models")]
pub struct Args {
    /// Suite to run.
    #[arg(value_enum)]
    pub suite: Suite,
    /// Diagram file (diagram suite only).
    pub file: Option<PathBuf>,
    /// System flavor; defaults to real when --omega-uv or --omega-ir is given, torus otherwise.
    #[arg(long, value_enum)]
    pub flavor: Option<FlavorArg>,
    #[arg(long, default_value_t = 1)]
    pub omega: u32,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub omega_uv: Option<u32>,
    #[arg(long)]
    pub omega_ir: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    /// Site dimension for fields-universal.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Number of sites for fields-universal.
    #[arg(long, default_value_t = 2)]
    pub mu: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Position, as comma-separated fractions, e.g. 1/5 or 1/3,-2/3.
    #[arg(long)]
    pub x: Option<String>,
    /// Momentum, same syntax as --x.
    #[arg(long)]
    pub p: Option<String>,
    /// Semicolon-separated momenta for field-spectra, e.g. "0;1/3".
    #[arg(long)]
    pub momenta: Option<String>,
    #[arg(long, default_value_t = crate::hilb::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::StructuredText)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn config_error(msg: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

/// Parses arguments (including the program name) and runs the suite.
pub fn run_cli<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return Outcome {
                code,
                stdout: if code == 0 { text.clone() } else { String::new() },
                stderr: if code == 0 { String::new() } else { text },
            };
        }
    };
    let budget = match std::env::var(SIZE_BUDGET_ENV) {
        Ok(v) => match v.trim().parse::<u128>() {
            Ok(b) => b,
            Err(_) => return Outcome::config_error(format!("{SIZE_BUDGET_ENV}={v} is not a count")),
        },
        Err(_) => DEFAULT_SIZE_BUDGET,
    };
    let output = match run_suite(&args, budget) {
        Ok(o) => o,
        Err(e) => return Outcome::config_error(e),
    };
    let text = match (&output, args.format) {
        (SuiteOutput::Spectrum { rows, .. }, Format::Tabular) => emit_spectrum_table(rows),
        (o, format) => emit_report(o.reports(), format),
    };
    let code = if output.reports().iter().all(|r| r.passed) { 0 } else { 1 };
    match &args.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome::config_error(format!("cannot write {}: {e}", path.display())),
        },
        None => Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

/// Reports of a suite, plus the spectrum table for field-spectra.
#[derive(Debug, Clone)]
pub enum SuiteOutput {
    Checks(Vec<CheckReport>),
    Spectrum {
        reports: Vec<CheckReport>,
        rows: Vec<SpectrumRow>,
    },
}

impl SuiteOutput {
    pub fn reports(&self) -> &[CheckReport] {
        match self {
            SuiteOutput::Checks(r) => r,
            SuiteOutput::Spectrum { reports, .. } => reports,
        }
    }
}

fn parse_point(s: &str, n: usize) -> Result<LatticePoint> {
    let p: LatticePoint = s
        .parse()
        .map_err(|_| Error::OutOfRange(format!("cannot parse point {s:?}")))?;
    if p.n() != n {
        return Err(Error::ParameterMismatch(format!(
            "point {s} has dimension {}, expected {n}",
            p.n()
        )));
    }
    Ok(p)
}

fn build_system(args: &Args) -> Result<QuantumSystem> {
    let flavor = args.flavor.unwrap_or(if args.omega_uv.is_some() || args.omega_ir.is_some() {
        FlavorArg::Real
    } else {
        FlavorArg::Torus
    });
    match flavor {
        FlavorArg::Torus => make_torus_system(args.omega, args.n),
        FlavorArg::Lattice => make_lattice_system(args.omega, args.n),
        FlavorArg::Real => make_real_system(
            args.omega_uv.unwrap_or(3),
            args.omega_ir.unwrap_or(3),
            args.n,
        ),
    }
}

fn rename(mut r: CheckReport, name: String) -> CheckReport {
    r.name = name;
    r
}

/// Runs the configured suite.
pub fn run_suite(args: &Args, budget: u128) -> Result<SuiteOutput> {
    let tol = args.tol;
    let reports = match args.suite {
        Suite::Laws => {
            let sys = build_system(args)?;
            laws_suite(&sys, tol)
        }
        Suite::Classicality => {
            let sys = build_system(args)?;
            vec![sys.classicality_check(OFF_MESH_THRESHOLD, tol)?]
        }
        Suite::StrongComp => {
            let sys = build_system(args)?;
            let r = check_strong_complementarity(sys.x_alg(), sys.z_alg(), tol)?;
            vec![rename(r, format!("strong complementarity on {}", sys.space().describe()))]
        }
        Suite::Ccr => {
            let sys = build_system(args)?;
            ccr_suite(&sys, args, tol)?
        }
        Suite::FieldsUniversal => fields_suite(args.d, args.mu, budget, tol)?,
        Suite::Qho => (1..=args.tau)
            .map(|t| Oscillator::new(t).map(|o| oscillator_check(&o, tol)))
            .collect::<Result<_>>()?,
        Suite::FieldSpectra => {
            let field = build_field(args, args.tau, budget)?;
            let mut reports = vec![field.spectrum_check(tol)?];
            if let Ok(higher) = build_field(args, args.tau + 1, budget) {
                reports.push(cutoff_stability(&field, &higher, tol)?);
            }
            let rows = field.spectrum_table()?;
            return Ok(SuiteOutput::Spectrum { reports, rows });
        }
        Suite::Diagram => {
            let path = args
                .file
                .as_ref()
                .ok_or_else(|| Error::OutOfRange("diagram suite needs a file".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::OutOfRange(format!("cannot read {}: {e}", path.display())))?;
            run_diagram(&text, tol)?
        }
    };
    Ok(SuiteOutput::Checks(reports))
}

/// Frame, compact-structure and Frobenius checks for a system.
pub fn laws_suite(sys: &QuantumSystem, tol: f64) -> Vec<CheckReport> {
    let h = sys.space();
    let fr = h.frame_residuals();
    let (snake_h, snake_dual) = snake_residuals(h);
    let dim_err = (dimension_scalar(h) - C64::new(h.dim() as f64, 0.0)).norm();
    let name = h.describe();
    vec![
        CheckReport::group(
            format!("frame on {name}"),
            vec![
                CheckReport::leaf("gram", fr.gram, tol),
                CheckReport::leaf("idempotence", fr.idempotence, tol),
                CheckReport::leaf("self_adjointness", fr.self_adjointness, tol),
            ],
            tol,
        ),
        CheckReport::group(
            format!("compact structure on {name}"),
            vec![
                CheckReport::leaf("snake", snake_h, tol),
                CheckReport::leaf("snake_dual", snake_dual, tol),
                CheckReport::leaf("dimension", dim_err, tol).with_scalar(dimension_scalar(h)),
            ],
            tol,
        ),
        rename(check_frobenius_laws(sys.z_alg(), tol), format!("frobenius Z on {name}")),
        rename(check_frobenius_laws(sys.x_alg(), tol), format!("frobenius X on {name}")),
    ]
}

fn ccr_suite(sys: &QuantumSystem, args: &Args, tol: f64) -> Result<Vec<CheckReport>> {
    let lattice = sys.flavor() == crate::systems::Flavor::Lattice;
    let (xs, ps) = if lattice {
        (sys.basis_points(), sys.dual_points())
    } else {
        (sys.dual_points(), sys.basis_points())
    };
    let xs = match &args.x {
        Some(s) => vec![parse_point(s, sys.n())?],
        None => xs,
    };
    let ps = match &args.p {
        Some(s) => vec![parse_point(s, sys.n())?],
        None => ps,
    };
    let mut out = Vec::new();
    for x in &xs {
        for p in &ps {
            out.push(sys.weyl_ccr_check(x, p, tol)?);
        }
    }
    Ok(out)
}

/// Exhaustive `enc`/`dec` roundtrip and the universal property of `θ`.
pub fn fields_suite(d: u32, mu: usize, budget: u128, tol: f64) -> Result<Vec<CheckReport>> {
    let site = TruncatedSpace::standard(format!("S{d}"), d as usize);
    let sites = (0..mu as i64)
        .map(|k| LatticePoint::from_fractions(&[(k, 1)]))
        .collect();
    let fs = FieldSpace::over_sites(&site, sites, budget)?;
    let mut failures = 0usize;
    for i in 1..=fs.dim() as u128 {
        let s = dec(d, mu, i)?;
        if enc(d, mu, &s)? != i {
            failures += 1;
        }
    }
    let inputs = random_product_inputs(&fs, 100, 7);

    let th = |v: &[DVector<C64>]| theta(&fs, v).expect("site vectors match the field");
    let f_theta = factor_through_theta(&fs, &th, fs.space())?;
    let res_theta = factorization_residual(&fs, &f_theta, &th, &inputs)?;

    let target = TruncatedSpace::standard("T", 2);
    let mut rng = StdRng::seed_from_u64(11);
    let mut coeff = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let rank = 2;
    let functionals: Vec<Vec<DVector<C64>>> = (0..rank)
        .map(|_| (0..mu).map(|_| DVector::from_fn(d as usize, |_, _| coeff())).collect())
        .collect();
    let outputs: Vec<DVector<C64>> = (0..rank).map(|_| DVector::from_fn(2, |_, _| coeff())).collect();
    let product_map = |v: &[DVector<C64>]| {
        let mut acc = DVector::zeros(2);
        for (ws, u) in functionals.iter().zip(&outputs) {
            let weight: C64 = ws
                .iter()
                .zip(v)
                .map(|(w, x)| w.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<C64>())
                .product();
            acc += u * weight;
        }
        acc
    };
    let f_prod = factor_through_theta(&fs, &product_map, &target)?;
    let res_prod = factorization_residual(&fs, &f_prod, &product_map, &inputs)?;

    Ok(vec![
        CheckReport::leaf(format!("enc/dec roundtrip D={d} mu={mu}"), failures as f64, 0.5),
        CheckReport::group(
            format!("universal property D={d} mu={mu}"),
            vec![
                CheckReport::leaf("theta", res_theta, tol),
                CheckReport::leaf("product_functional", res_prod, tol),
            ],
            tol,
        ),
    ])
}

fn build_field(args: &Args, tau: usize, budget: u128) -> Result<OscillatorField> {
    match &args.momenta {
        Some(list) => {
            let momenta = list
                .split(';')
                .map(|s| parse_point(s.trim(), args.n))
                .collect::<Result<Vec<_>>>()?;
            OscillatorField::new(
                tau,
                momenta,
                args.omega_uv.unwrap_or(3),
                args.n,
                args.mass,
                args.hbar,
                budget,
            )
        }
        None => OscillatorField::on_uv_lattice_with_budget(
            tau,
            args.omega_uv.unwrap_or(3),
            args.omega_ir.unwrap_or(1),
            args.n,
            args.mass,
            args.hbar,
            budget,
        ),
    }
}

/// Energies of occupations with every `n(p) < τ` agree between cutoffs `τ` and `τ+1`.
pub fn cutoff_stability(low: &OscillatorField, high: &OscillatorField, tol: f64) -> Result<CheckReport> {
    let tau = low.oscillator().tau() as u32;
    let (_, h_low) = low.number_and_hamiltonian()?;
    let (_, h_high) = high.number_and_hamiltonian()?;
    let mut worst: f64 = 0.0;
    for i in 0..low.space().dim() {
        let occ = low.occupation(i)?;
        if occ.iter().all(|&n| n < tau) {
            let j = high.occupation_index(&occ)?;
            worst = worst.max((h_low.matrix().get(i, i) - h_high.matrix().get(j, j)).norm());
        }
    }
    Ok(CheckReport::leaf(format!("cutoff stability t={tau}->{}", tau + 1), worst, tol))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("\"{x}\"")
    }
}

fn write_record(out: &mut String, r: &CheckReport, indent: usize) {
    let pad = "  ".repeat(indent);
    let inner = "  ".repeat(indent + 1);
    let _ = writeln!(out, "{pad}{{");
    let _ = writeln!(out, "{inner}\"name\": \"{}\",", escape(&r.name));
    let _ = writeln!(out, "{inner}\"passed\": {},", r.passed);
    let _ = writeln!(out, "{inner}\"residual\": {},", num(r.residual));
    let _ = writeln!(out, "{inner}\"tolerance\": {},", num(r.tolerance));
    match r.fitted_scalar {
        Some(c) => {
            let _ = writeln!(out, "{inner}\"fitted_scalar\": {{\"re\": {}, \"im\": {}}},", num(c.re), num(c.im));
        }
        None => {
            let _ = writeln!(out, "{inner}\"fitted_scalar\": null,");
        }
    }
    if r.details.is_empty() {
        let _ = writeln!(out, "{inner}\"details\": []");
    } else {
        let _ = writeln!(out, "{inner}\"details\": [");
        for (i, d) in r.details.iter().enumerate() {
            write_record(out, d, indent + 2);
            if i + 1 < r.details.len() {
                out.pop();
                out.push_str(",\n");
            }
        }
        let _ = writeln!(out, "{inner}]");
    }
    let _ = writeln!(out, "{pad}}}");
}

fn flatten<'a>(r: &'a CheckReport, prefix: &str, out: &mut Vec<(String, &'a CheckReport)>) {
    let path = if prefix.is_empty() {
        r.name.clone()
    } else {
        format!("{prefix}/{}", r.name)
    };
    out.push((path.clone(), r));
    for d in &r.details {
        flatten(d, &path, out);
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Serializes reports, sorted by name.
///
/// Structured text is a JSON array of records with fields in the order
/// `name, passed, residual, tolerance, fitted_scalar, details`. Tabular output
/// is CSV with one row per check, nested names joined by `/`.
pub fn emit_report(reports: &[CheckReport], format: Format) -> String {
    let mut sorted: Vec<&CheckReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = String::new();
    match format {
        Format::StructuredText => {
            if sorted.is_empty() {
                out.push_str("[]\n");
                return out;
            }
            out.push_str("[\n");
            for (i, r) in sorted.iter().enumerate() {
                write_record(&mut out, r, 1);
                if i + 1 < sorted.len() {
                    out.pop();
                    out.push_str(",\n");
                }
            }
            out.push_str("]\n");
        }
        Format::Tabular => {
            out.push_str("name,passed,residual,tolerance,fitted_re,fitted_im\n");
            for r in sorted {
                let mut rows = Vec::new();
                flatten(r, "", &mut rows);
                for (path, c) in rows {
                    let (re, im) = c
                        .fitted_scalar
                        .map(|z| (num(z.re), num(z.im)))
                        .unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{re},{im}",
                        csv_field(&path),
                        c.passed,
                        num(c.residual),
                        num(c.tolerance)
                    );
                }
            }
        }
    }
    out
}

/// CSV with columns `occupation,N,H`, in number-basis order.
pub fn emit_spectrum_table(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("occupation,N,H\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.occupation_string(), num(r.number), num(r.energy));
    }
    out
}
