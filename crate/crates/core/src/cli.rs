//! `q3inv` command-line frontend.
//!
//! State files are JSON objects `{"name": "...", "amplitudes": [[re, im], ...]}`
//! with eight amplitudes in lexicographic `(i, j, k)` order, `i` slowest.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 state not normalized, 4 degenerate marginal spectrum.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::entanglement::{
    canonical_coordinates, canonical_i5_check, ceqn_residuals, make_family, schmidt, tangles,
    Family, TangleReport, NORMALIZATION_TOL,
};
use crate::error::Error;
use crate::invariants::{compute_invariants, general_p, reduction, InvariantRecord, Permutation};
use crate::tensor_core::{normalize, split_index, Party, StateTensor};
use crate::verify::{identity_suite, independence_report, invariance_suite, TrialReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_NORMALIZED: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

/// Samples drawn by `verify --full` for the identity suite.
pub const FULL_IDENTITY_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(name: Option<String>, t: &StateTensor) -> Self {
        StateFile { name, amplitudes: t.amplitudes().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_state(&self) -> Result<StateTensor, CliError> {
        if self.amplitudes.len() != 8 {
            return Err(CliError::Usage(format!(
                "expected 8 amplitudes, found {}",
                self.amplitudes.len()
            )));
        }
        let amp: [C64; 8] = std::array::from_fn(|n| {
            let [re, im] = self.amplitudes[n];
            C64::new(re, im)
        });
        StateTensor::new(amp).map_err(CliError::from)
    }
}

pub fn parse_state_file(text: &str) -> Result<StateFile, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Usage(format!("line {}, column {}: {e}", e.line(), e.column()))
    })
}

pub fn read_state(path: &Path) -> Result<(StateFile, StateTensor), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let file = parse_state_file(&text)
        .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))?;
    let t = file
        .to_state()
        .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))?;
    Ok((file, t))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) => match e {
                Error::NotNormalized { .. } => EXIT_NOT_NORMALIZED,
                Error::DegenerateSpectrum(_) => EXIT_DEGENERATE,
                Error::BadParams(_)
                | Error::BadPermutation(_)
                | Error::RankMismatch(..)
                | Error::RankTooLarge(_)
                | Error::NonFinite { .. }
                | Error::ZeroState => EXIT_USAGE,
                _ => EXIT_VERIFY,
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(Error::NotNormalized { norm_sqr }) => format!(
                "state is not normalized (<psi|psi> = {norm_sqr}); pass --normalize or --no-tangles"
            ),
            CliError::Lib(Error::DegenerateSpectrum(p)) => format!(
                "rho_{p} has a degenerate spectrum, so its eigenbasis and the canonical \
                 coordinates are not unique"
            ),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "q3inv", version, about = "Local-unitary invariants of three-qubit pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Factorised,
    Ghz,
    W,
    RandomReal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariants, tangles and Schmidt coefficients of state files.
    Invariants {
        /// State files or directories of `*.json` state files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Normalize each state first and report the applied scale.
        #[arg(long)]
        normalize: bool,
        /// Skip tangles and Schmidt data (allows unnormalized input).
        #[arg(long)]
        no_tangles: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Evaluate P_{sigma,tau} for one-line permutation words.
    Pstau {
        path: PathBuf,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        tau: String,
    },
    /// Canonical coordinates in the phase-fixed Schmidt bases.
    Canonical { path: PathBuf },
    /// Orbit-invariance Monte Carlo over Haar-random local unitaries.
    Verify {
        #[arg(required_unless_present = "family", conflicts_with = "family")]
        path: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<FamilyName>,
        #[arg(long, num_args = 0.., allow_negative_numbers = true)]
        params: Vec<f64>,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also run the identity suite and the independence ranks.
        #[arg(long)]
        full: bool,
    },
    /// Write a state file for a named family.
    Sample {
        #[arg(long, value_enum)]
        family: FamilyName,
        /// Amplitudes for factorised and ghz, squared weights for w.
        #[arg(long, num_args = 0.., allow_negative_numbers = true)]
        params: Vec<f64>,
        /// Seed for random_real.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the invariants of two states.
    Compare {
        path1: PathBuf,
        path2: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Builds a family from CLI parameters. The `w` family takes squared
/// weights `p^2 q^2 r^2`; `factorised` and `ghz` take amplitudes.
pub fn family_from_params(name: FamilyName, params: &[f64], seed: u64) -> Result<Family, Error> {
    let want = match name {
        FamilyName::Factorised | FamilyName::Ghz => 2,
        FamilyName::W => 3,
        FamilyName::RandomReal => 0,
    };
    if params.len() != want {
        return Err(Error::BadParams(format!(
            "family expects {want} parameters, got {}",
            params.len()
        )));
    }
    let root = |w: f64| {
        if w < 0.0 || !w.is_finite() {
            Err(Error::BadParams(format!("weight {w} must be finite and non-negative")))
        } else {
            Ok(w.sqrt())
        }
    };
    Ok(match name {
        FamilyName::Factorised => Family::Factorised { a: params[0], b: params[1] },
        FamilyName::Ghz => Family::Ghz { p: params[0], q: params[1] },
        FamilyName::W => Family::W { p: root(params[0])?, q: root(params[1])?, r: root(params[2])? },
        FamilyName::RandomReal => Family::RandomReal { seed },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Num(f64),
    Text(String),
}

/// Ordered key/value report, rendered as a table, CSV or JSON object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<(String, Field)>,
}

impl Report {
    fn num(&mut self, key: impl Into<String>, v: f64) {
        self.rows.push((key.into(), Field::Num(v)));
    }

    fn text(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.rows.push((key.into(), Field::Text(v.into())));
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => {
                let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut s = String::new();
                for (k, v) in &self.rows {
                    let _ = writeln!(s, "{k:<width$}  {}", field_text(v));
                }
                s
            }
            Format::Csv => {
                let mut s = String::from("key,value\n");
                for (k, v) in &self.rows {
                    let _ = writeln!(s, "{},{}", csv_escape(k), csv_escape(&field_text(v)));
                }
                s
            }
            Format::Json => {
                let mut s = serde_json::to_string(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.rows.len()))?;
        for (k, v) in &self.rows {
            match v {
                Field::Num(x) => map.serialize_entry(k, x)?,
                Field::Text(t) => map.serialize_entry(k, t)?,
            }
        }
        map.end()
    }
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn field_text(v: &Field) -> String {
    match v {
        Field::Num(x) => fmt_num(*x),
        Field::Text(t) => t.clone(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn push_record(r: &mut Report, prefix: &str, rec: &InvariantRecord) {
    for (n, v) in rec.values().iter().enumerate() {
        r.num(format!("{prefix}I{}", n + 1), *v);
    }
    r.num(format!("{prefix}f_re"), rec.f.re);
    r.num(format!("{prefix}f_im"), rec.f.im);
}

pub fn invariants_report(
    file: &StateFile,
    t: &StateTensor,
    normalize_first: bool,
    with_tangles: bool,
) -> Result<Report, CliError> {
    let mut r = Report::default();
    if let Some(name) = &file.name {
        r.text("name", name.clone());
    }
    let t = if normalize_first {
        let scale = 1.0 / t.norm_sqr().sqrt();
        r.num("scale", scale);
        normalize(t)?
    } else {
        *t
    };
    push_record(&mut r, "", &compute_invariants(&t)?);
    if with_tangles {
        let report = tangles(&t)?;
        for (k, v) in TangleReport::FIELD_NAMES.iter().zip(report.values()) {
            r.num(*k, v);
        }
        let sd = schmidt(&t)?;
        for p in Party::ALL {
            for (n, v) in sd.coefficients(p).iter().enumerate() {
                r.num(format!("schmidt_{p}_{n}"), *v);
            }
        }
    }
    Ok(r)
}

pub fn pstau_report(t: &StateTensor, sigma: &str, tau: &str) -> Result<Report, CliError> {
    let s = Permutation::parse(sigma)?;
    let u = Permutation::parse(tau)?;
    let p = general_p(t, &s, &u)?;
    let mut r = Report::default();
    r.text("sigma", s.to_string());
    r.text("tau", u.to_string());
    r.num("P_re", p.re);
    r.num("P_im", p.im);
    if let Some((party, v)) = reduction(t, &s, &u) {
        let lengths = if s.is_identity() { u.cycle_lengths() } else { s.cycle_lengths() };
        let factors: Vec<String> =
            lengths.iter().map(|l| format!("tr rho_{party}^{l}")).collect();
        r.text("reduces_to", factors.join(" * "));
        r.num("power_trace_product", v);
    }
    Ok(r)
}

pub fn canonical_report(t: &StateTensor) -> Result<Report, CliError> {
    let cd = canonical_coordinates(t)?;
    let mut r = Report::default();
    for (x, z) in cd.c.iter().enumerate() {
        let (i, j, k) = split_index(x);
        r.num(format!("c{i}{j}{k}_re"), z.re);
        r.num(format!("c{i}{j}{k}_im"), z.im);
    }
    for (label, p) in [("alpha", Party::A), ("beta", Party::B), ("gamma", Party::C)] {
        for (n, v) in cd.schmidt.coefficients(p).iter().enumerate() {
            r.num(format!("{label}_{n}"), *v);
        }
    }
    for (p, res) in Party::ALL.iter().zip(ceqn_residuals(&cd)) {
        r.num(format!("gram_residual_{p}"), res);
    }
    let i5 = compute_invariants(t)?.i5;
    r.num("I5_from_coordinates", canonical_i5_check(&cd));
    r.num("I5_residual", (canonical_i5_check(&cd) - i5).abs());
    for i in 0..2 {
        for j in 0..2 {
            r.num(format!("R{i}{j}_re"), cd.r_matrix[(i, j)].re);
            r.num(format!("R{i}{j}_im"), cd.r_matrix[(i, j)].im);
        }
    }
    r.num("det_R", cd.det_r);
    for (n, fix) in cd.phase_log.iter().enumerate() {
        r.text(format!("phase_{n}"), fix.to_string());
    }
    Ok(r)
}

pub fn trial_report(rep: &TrialReport, tol: f64) -> Report {
    let mut r = Report::default();
    r.text("trials", rep.trials.to_string());
    r.text("seed", rep.seed.to_string());
    r.num("tol", tol);
    for (n, q) in rep.quantities.iter().enumerate() {
        r.num(format!("max_abs_dev[{q}]"), rep.max_abs_dev[n]);
        r.num(format!("max_rel_dev[{q}]"), rep.max_rel_dev[n]);
    }
    r.text("failures", rep.failures.len().to_string());
    if let Some((q, d)) = rep.worst() {
        r.text("worst", format!("{q} {}", fmt_num(d)));
    }
    r
}

fn collect_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn run_command(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let emit = |out: &mut dyn Write, s: &str| {
        out.write_all(s.as_bytes())
            .map_err(|e| CliError::Usage(format!("write failed: {e}")))
    };
    match command {
        Command::Invariants { paths, normalize, no_tangles, format } => {
            let files = collect_paths(&paths)?;
            let results: Vec<Result<Report, CliError>> = files
                .par_iter()
                .map(|p| {
                    let (file, t) = read_state(p)?;
                    invariants_report(&file, &t, normalize, !no_tangles)
                })
                .collect();
            let mut code = EXIT_OK;
            let multi = files.len() > 1;
            for (n, (path, res)) in files.iter().zip(results).enumerate() {
                match res {
                    Ok(mut rep) => {
                        if multi {
                            rep.rows.insert(0, ("file".into(), Field::Text(path.display().to_string())));
                        }
                        let mut text = rep.render(format);
                        if format == Format::Table && multi && n > 0 {
                            text.insert(0, '\n');
                        }
                        if format == Format::Csv && n > 0 {
                            text = text.split_once('\n').map(|x| x.1.to_string()).unwrap_or_default();
                        }
                        emit(out, &text)?;
                    }
                    Err(e) => {
                        let _ = writeln!(err, "error: {}: {}", path.display(), e.message());
                        if code == EXIT_OK {
                            code = e.exit_code();
                        }
                    }
                }
            }
            Ok(code)
        }
        Command::Pstau { path, sigma, tau } => {
            let (_, t) = read_state(&path)?;
            emit(out, &pstau_report(&t, &sigma, &tau)?.render(Format::Table))?;
            Ok(EXIT_OK)
        }
        Command::Canonical { path } => {
            let (_, t) = read_state(&path)?;
            emit(out, &canonical_report(&t)?.render(Format::Table))?;
            Ok(EXIT_OK)
        }
        Command::Verify { path, family, params, trials, seed, tol, full } => {
            let t = match (path, family) {
                (Some(p), _) => read_state(&p)?.1,
                (None, Some(f)) => make_family(&family_from_params(f, &params, seed)?)?,
                (None, None) => return Err(CliError::Usage("a state file or --family is required".into())),
            };
            let rep = invariance_suite(&t, trials as usize, seed, tol)?;
            let mut summary = trial_report(&rep, tol);
            let mut ok = rep.passed();
            if full {
                let ids = identity_suite(seed, FULL_IDENTITY_SAMPLES)?;
                for (n, q) in ids.quantities.iter().enumerate() {
                    summary.num(format!("identity_residual[{q}]"), ids.max_abs_dev[n]);
                }
                summary.text("identity_failures", ids.failures.len().to_string());
                ok &= ids.passed();
                let ind = independence_report(seed)?;
                summary.text("rank6", ind.rank6.to_string());
                summary.text("rank_deg6", ind.rank_deg6.to_string());
            }
            summary.text("verdict", if ok { "pass" } else { "fail" });
            emit(out, &summary.render(Format::Table))?;
            if !ok {
                if let Some(f) = rep.failures.first() {
                    let _ = writeln!(
                        err,
                        "verification failed: {} failures; first at trial {} ({} deviation {})",
                        rep.failures.len(),
                        f.trial,
                        f.quantity,
                        fmt_num(f.deviation)
                    );
                }
                if let Some((q, d)) = rep.worst() {
                    let _ = writeln!(err, "worst offender: {q} {}", fmt_num(d));
                }
                return Ok(EXIT_VERIFY);
            }
            Ok(EXIT_OK)
        }
        Command::Sample { family, params, seed, name, out: path } => {
            let fam = family_from_params(family, &params, seed)?;
            let t = make_family(&fam)?;
            let file = StateFile::from_state(Some(name.unwrap_or_else(|| fam.to_string())), &t);
            let mut text = serde_json::to_string_pretty(&file).expect("state file serializes");
            text.push('\n');
            std::fs::write(&path, text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok(EXIT_OK)
        }
        Command::Compare { path1, path2, tol } => {
            let (_, s) = read_state(&path1)?;
            let (_, t) = read_state(&path2)?;
            for x in [&s, &t] {
                let n = x.norm_sqr();
                if (n - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::NotNormalized { norm_sqr: n }.into());
                }
            }
            let (a, b) = (compute_invariants(&s)?, compute_invariants(&t)?);
            let mut r = Report::default();
            push_record(&mut r, "first.", &a);
            push_record(&mut r, "second.", &b);
            let mut differing = Vec::new();
            for (n, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
                if (x - y).abs() > tol {
                    differing.push(format!("I{}", n + 1));
                }
            }
            if differing.is_empty() {
                r.text("verdict", "not distinguished by these invariants");
            } else {
                r.text("verdict", "inequivalent");
                r.text("differing", differing.join(" "));
            }
            emit(out, &r.render(Format::Table))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run_command(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}
