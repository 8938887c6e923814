//! The `ddvol` command line: surface files in, reports and CSV out.
//!
//! Exit codes: 0 when every check passes, 1 when a theorem-backed check
//! fails, 2 on input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::checks::{self, Check};
use crate::cohomology;
use crate::cover_charts::{self, ChartConfig};
use crate::cyclic_cover::{build_cover, CoverError, TranslationCover};
use crate::ddiff_surface::{DDiffSurface, GeomConfig};
use crate::delaunay::{self, DelaunayConfig};
use crate::fixtures;
use crate::format::{self, FormatError};
use crate::generate;
use crate::scalar::{ExactField, Field, FloatField, DEFAULT_EPS_LIN};
use crate::volume::{self, Choices, VolumeError};

#[derive(Parser, Debug)]
#[command(name = "ddvol", version, about = "Cyclic covers, period charts and volume forms of d-differentials")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Long-cylinder constant.
    #[arg(long, global = true, default_value_t = delaunay::alpha())]
    pub alpha: f64,
    /// Relative geometric tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub eps_geom: f64,
    /// Relative tolerance for floating point comparisons of volumes.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rel_tol: f64,
    /// Tolerance of floating point elimination.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_LIN)]
    pub eps_lin: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a surface and print κ, genus, area and primitivity.
    Check { file: PathBuf },
    /// Build the canonical cyclic cover.
    Cover {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        zeta: i64,
        /// Write the cover as a translation surface file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Dimensions of V and H, kernel of p and intersection signatures.
    Dim {
        file: PathBuf,
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 1)]
        zeta: i64,
    },
    /// Density of the canonical volume form.
    Volform {
        file: PathBuf,
        #[arg(long)]
        exact: bool,
        /// Emit the Masur–Veech ratio as CSV (exact arithmetic).
        #[arg(long)]
        ratio: bool,
        #[arg(long, default_value_t = 1)]
        zeta: i64,
        /// Random changes of paths and marking to compare against.
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Invariant Delaunay triangulation, written as a surface file.
    Delaunay {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Long cylinders of the cover, as CSV.
    Cylinders { file: PathBuf },
    /// A chart U¹ containing the normalized cover.
    Witness { file: PathBuf },
    /// Monte Carlo volume of the witness chart.
    Mc {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the battery of checks on every surface file in a directory plus
    /// generated instances.
    Suite {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generated combinatorial instances.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Generated random flat surfaces.
        #[arg(long, default_value_t = 5)]
        geometric: usize,
    },
    /// cover, dim, volform, delaunay, cylinders and witness in sequence.
    Pipeline {
        file: PathBuf,
        #[arg(long)]
        exact: bool,
        /// Stages to leave out.
        #[arg(long, value_delimiter = ',')]
        skip: Vec<Stage>,
    },
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Cover,
    Dim,
    Volform,
    Delaunay,
    Cylinders,
    Witness,
}

/// Input errors (exit code 2).
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

/// How a reported value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Exact,
    Float,
}

/// Output of one command.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: String,
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
    pub config: Vec<(String, String)>,
    pub values: Vec<(String, Tag, String)>,
    /// Raw lines: CSV tables and arrays.
    pub body: Vec<String>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl RunReport {
    fn new(command: &str, opts: &GlobalOpts) -> Self {
        Self {
            command: command.into(),
            config: vec![
                ("alpha".into(), format!("{:?}", opts.alpha)),
                ("eps_geom".into(), format!("{:e}", opts.eps_geom)),
                ("eps_lin".into(), format!("{:e}", opts.eps_lin)),
                ("rel_tol".into(), format!("{:e}", opts.rel_tol)),
            ],
            ..Default::default()
        }
    }
    fn exact(&mut self, key: &str, v: impl ToString) {
        self.values.push((key.into(), Tag::Exact, v.to_string()));
    }
    fn float(&mut self, key: &str, v: f64) {
        self.values.push((key.into(), Tag::Float, format!("{v:.12e}")));
    }
    fn merge(&mut self, other: RunReport) {
        self.values.extend(other.values);
        self.body.extend(other.body);
        self.notes.extend(other.notes);
        self.checks.extend(other.checks);
    }
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# ddvol {}", self.command);
        if let Some(d) = &self.input_digest {
            let _ = writeln!(s, "# input sha256 {d}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed {seed}");
        }
        let cfg: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "# config {}", cfg.join(" "));
        let w = self.values.iter().map(|v| v.0.len()).max().unwrap_or(0);
        for (k, tag, v) in &self.values {
            let t = if *tag == Tag::Exact { "exact" } else { "float" };
            let _ = writeln!(s, "{k:<w$}  {t}  {v}");
        }
        for line in &self.body {
            let _ = writeln!(s, "{line}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "# note: {n}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "# check {} {} ({})", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s, "# summary {passed}/{} checks passed", self.checks.len());
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        if !failed.is_empty() {
            let _ = writeln!(s, "# failed {}", failed.join(" "));
        }
        s
    }
}

fn csv_lines(rows: &[Vec<String>]) -> Vec<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory write");
    String::from_utf8(bytes).expect("utf-8").lines().map(str::to_string).collect()
}

fn kappa_text(k: &[i64]) -> String {
    let parts: Vec<String> = k.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

impl GlobalOpts {
    fn geom(&self) -> GeomConfig {
        GeomConfig { eps_rel: self.eps_geom, ..GeomConfig::default() }
    }
    fn delaunay(&self) -> DelaunayConfig {
        DelaunayConfig { alpha: self.alpha, ..DelaunayConfig::default() }
    }
    fn chart(&self) -> ChartConfig {
        ChartConfig { alpha: self.alpha, delaunay: self.delaunay(), ..ChartConfig::default() }
    }
}

struct Input {
    surface: DDiffSurface,
    digest: String,
}

fn load(path: &Path, opts: &GlobalOpts, check_kappa: bool) -> Result<(Input, Option<Vec<i64>>), InputError> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| InputError::Io { path: shown.clone(), source })?;
    let digest = format!("{:x}", Sha256::digest(&bytes));
    let text = String::from_utf8_lossy(&bytes);
    let mut file = format::SurfaceFile::parse(&text).map_err(|source| InputError::Format { path: shown.clone(), source })?;
    let expected = if check_kappa { None } else { file.kappa_expected.take() };
    let surface = file.to_surface(&opts.geom()).map_err(|source| InputError::Format { path: shown, source })?;
    Ok((Input { surface, digest }, expected))
}

fn load_checked(path: &Path, opts: &GlobalOpts) -> Result<Input, InputError> {
    Ok(load(path, opts, true)?.0)
}

// ---------------------------------------------------------------------------
// Stages

fn stage_check(s: &DDiffSurface, expected: Option<Vec<i64>>, opts: &GlobalOpts) -> RunReport {
    let mut r = RunReport::new("check", opts);
    let g = s.genus() as i64;
    let d = s.d() as i64;
    r.exact("d", d);
    r.exact("genus", g);
    r.exact("n", s.kappa().len());
    r.exact("kappa", kappa_text(s.kappa()));
    let area_tag = if s.exact_sides().is_some() { "exact sides" } else { "float sides" };
    r.float("area", s.area());
    let hol = s.primitivity();
    r.exact("holonomy_image_order", hol.image_order());
    r.exact("primitive", hol.surjective());
    r.notes.push(format!("area from {area_tag}"));
    let sum: i64 = s.kappa().iter().sum();
    r.checks.push(Check::new("order_sum", sum == d * (2 * g - 2), format!("sum {sum}, d(2g-2) = {}", d * (2 * g - 2))));
    if let Some(k) = expected {
        r.checks.push(Check::new(
            "kappa_expected",
            k.as_slice() == s.kappa(),
            format!("computed {}, file {}", kappa_text(s.kappa()), kappa_text(&k)),
        ));
    }
    r
}

fn stage_cover(c: &TranslationCover, opts: &GlobalOpts) -> RunReport {
    let mut r = RunReport::new("cover", opts);
    r.exact("zeta_index", c.zeta_index());
    r.exact("cover_genus", c.genus());
    r.exact("cover_vertices", c.num_vertices());
    let mut kh = c.cover_kappa();
    kh.sort_unstable();
    r.exact("cover_kappa", kappa_text(&kh));
    r.exact("r", c.r());
    let mut rows = vec![vec!["base_vertex".into(), "k".into(), "order_mod_d".into(), "preimages".into(), "k_hat".into()]];
    for (i, p) in c.profile().iter().enumerate() {
        rows.push(vec![i.to_string(), p.k.to_string(), p.d_i.to_string(), p.n_i.to_string(), p.k_hat.to_string()]);
    }
    r.body = csv_lines(&rows);
    r.checks = checks::cover_checks(c);
    r
}

fn dim_values<F: Field>(f: &F, c: &TranslationCover, r: &mut RunReport) -> Result<(), cohomology::CohomologyError> {
    let v = cohomology::eigenspace_v(f, c)?;
    let b = cohomology::symplectic_basis(c)?;
    let p = cohomology::project_p(f, &b, &v);
    let inter = cohomology::intersection_report(f, c, &b, &v, 1e-9);
    r.exact("dim_V", v.dim());
    r.exact("dim_H", p.rank);
    r.exact("dim_ker_p", p.kernel_dim);
    r.exact("r", c.r());
    r.values.push(("signature_full".into(), Tag::Float, format!("{:?}", inter.full)));
    r.values.push(("signature_H".into(), Tag::Float, format!("{:?}", inter.h_signature)));
    r.values.push(("det_omega_H".into(), if f.is_exact() { Tag::Exact } else { Tag::Float }, f.render(&inter.h_det)));
    r.checks.extend(checks::dim_checks(f, c)?);
    Ok(())
}

fn stage_dim(c: &TranslationCover, exact: bool, opts: &GlobalOpts) -> RunReport {
    let mut r = RunReport::new("dim", opts);
    let res = match exact.then(|| ExactField::new(c.d())).flatten() {
        Some(f) => dim_values(&f, c, &mut r),
        None => {
            if exact {
                r.notes.push(format!("no exact arithmetic for d = {}; using floating point", c.d()));
            }
            dim_values(&FloatField::new(c.d(), opts.eps_lin), c, &mut r)
        }
    };
    if let Err(e) = res {
        r.checks.push(Check::new("cohomology", false, e.to_string()));
    }
    r
}

fn volform_values<F: Field>(
    f: &F,
    c: &TranslationCover,
    trials: usize,
    seed: u64,
    opts: &GlobalOpts,
    r: &mut RunReport,
) -> Result<(), VolumeError> {
    let v = cohomology::eigenspace_v(f, c)?;
    let ch = Choices::of_cover(c)?;
    let dens = volume::theta_density(f, c, &v, &ch)?;
    r.exact("N", dens.n);
    r.exact("r", dens.r);
    r.exact("K", dens.k);
    r.values.push(("det_theta".into(), if f.is_exact() { Tag::Exact } else { Tag::Float }, dens.det_theta_text.clone()));
    r.float("density", dens.value);
    if let Some(q) = &dens.value_sq {
        r.exact("density_sq", q);
    }
    let tol = if f.is_exact() { 0.0 } else { opts.rel_tol };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    r.checks.push(checks::theta_choice_check(f, &mut rng, c, trials, tol)?);
    if matches!(c.d(), 3 | 4 | 6) {
        r.checks.push(checks::zeta_check(f, c, tol)?);
    }
    Ok(())
}

fn stage_volform(c: &TranslationCover, exact: bool, trials: usize, seed: u64, opts: &GlobalOpts) -> RunReport {
    let mut r = RunReport::new("volform", opts);
    r.seed = Some(seed);
    let res = match exact.then(|| ExactField::new(c.d())).flatten() {
        Some(f) => volform_values(&f, c, trials, seed, opts, &mut r),
        None => {
            if exact {
                r.notes.push(format!("no exact arithmetic for d = {}; using floating point", c.d()));
            }
            volform_values(&FloatField::new(c.d(), opts.eps_lin), c, trials, seed, opts, &mut r)
        }
    };
    if let Err(e) = res {
        r.checks.push(Check::new("volume_form", false, e.to_string()));
    }
    r
}

pub const RATIO_COLUMNS: [&str; 10] = ["d", "g", "kappa", "N", "r", "K", "det_theta", "ell", "lambda", "classification"];

fn stage_ratio(c: &TranslationCover, kappa: &[i64], opts: &GlobalOpts) -> Result<RunReport, VolumeError> {
    let mut r = RunReport::new("volform --ratio", opts);
    let (check, mv) = checks::masur_veech_check(c)?;
    let row = vec![
        mv.d.to_string(),
        mv.base_genus.to_string(),
        kappa_text(kappa),
        mv.n.to_string(),
        mv.r.to_string(),
        mv.k.to_string(),
        mv.det_theta.clone(),
        mv.ell.to_string(),
        mv.render_lambda(),
        format!("{:?}", mv.classification),
    ];
    r.body = csv_lines(&[RATIO_COLUMNS.iter().map(|s| s.to_string()).collect(), row]);
    r.checks.push(check);
    Ok(r)
}

fn stage_delaunay(c: &TranslationCover, opts: &GlobalOpts) -> (RunReport, Option<(TranslationCover, delaunay::FlipRun)>) {
    let mut r = RunReport::new("delaunay", opts);
    match checks::delaunay_checks(c, &opts.delaunay()) {
        Ok((o, run, cs)) => {
            r.exact("flips", run.flips.len());
            r.exact("cover_faces", o.map().num_faces());
            r.checks.extend(cs);
            (r, Some((o, run)))
        }
        Err(e) => {
            r.checks.push(Check::new("delaunay_certified", false, e.to_string()));
            (r, None)
        }
    }
}

pub const CYLINDER_COLUMNS: [&str; 5] = ["direction", "circumference", "height", "area", "dual_cycle_length"];

fn stage_cylinders(c: &TranslationCover, opts: &GlobalOpts) -> RunReport {
    let (mut r, out) = stage_delaunay(c, opts);
    r.command = "cylinders".into();
    let Some((o, run)) = out else { return r };
    let fm = &run.surface;
    let cyls = delaunay::detect_cylinders(fm, &opts.delaunay());
    let mut rows = vec![CYLINDER_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for cy in &cyls {
        let dir = cy.direction().arg().to_degrees().rem_euclid(180.0);
        rows.push(vec![
            format!("{dir:.9}"),
            format!("{:.12e}", cy.circumference),
            format!("{:.12e}", cy.height),
            format!("{:.12e}", cy.height * cy.circumference),
            cy.crossed.len().to_string(),
        ]);
    }
    r.body = csv_lines(&rows);
    let (cs, a) = checks::cylinder_checks(fm, &opts.delaunay());
    r.float("area", fm.area());
    r.exact("long_edges", a.long_edges);
    r.exact("long_cylinders", a.cylinders);
    r.exact("long_edges_without_unique_cylinder", a.unmatched_long_edges.len());
    r.checks.extend(cs);
    r.checks.push(Check::new("deck_permutes_cylinders", delaunay::deck_permutes_freely(&o, &cyls), ""));
    r
}

fn stage_witness(c: &TranslationCover, opts: &GlobalOpts) -> (RunReport, Option<cover_charts::Witness>) {
    let mut r = RunReport::new("witness", opts);
    let (check, w) = checks::witness_check(c, &opts.chart());
    if let Some(w) = &w {
        let m = w.o.map();
        let arr = |v: &[usize]| serde_json::to_string(v).expect("serializes");
        r.float("scale", w.scale);
        r.float("area", w.u1.area);
        r.exact("k", w.family.k());
        r.exact("N", w.family.n());
        r.body.push(format!("sigma0 = {}", arr(m.sigma0())));
        r.body.push(format!("sigma1 = {}", arr(m.sigma1())));
        r.body.push(format!("deck = {}", arr(w.o.deck().perm())));
        for (i, orb) in w.family.cycles.iter().enumerate() {
            for (j, cyc) in orb.iter().enumerate() {
                r.body.push(format!("gamma[{i}][{j}] = {}", arr(cyc)));
            }
        }
        r.body.push(format!("crossing = {}", arr(&w.family.crossing)));
        r.body.push(format!("completion = {}", arr(&w.family.completion)));
        let u = &w.u1;
        r.checks.push(Check::new("area_at_most_one", u.area_ok, format!("{:.12}", u.area)));
        r.checks.push(Check::new(
            "free_edges_short",
            u.long_free_edges.is_empty(),
            format!("edges longer than sqrt2*alpha outside the family: {:?}", u.long_free_edges),
        ));
        for i in 0..u.ell.len() {
            r.checks.push(Check::new("x_bound", u.x_ok[i], format!("orbit {i}: |x| = {:.6e}, l = {:.6e}", u.x[i].abs(), u.ell[i])));
            r.checks.push(Check::new("y_bound", u.y_ok[i], format!("orbit {i}: |y| = {:.6e}, 2/l = {:.6e}", u.y[i].abs(), 2.0 / u.ell[i])));
        }
        r.checks.push(Check::new("in_stratum", w.membership.inside, format!("{:?}", w.membership.nonpositive_faces)));
    }
    r.checks.insert(0, check);
    (r, w)
}

fn stage_mc(c: &TranslationCover, samples: u64, seed: u64, opts: &GlobalOpts) -> RunReport {
    let (mut r, w) = stage_witness(c, opts);
    r.command = "mc".into();
    r.seed = Some(seed);
    let Some(w) = w else { return r };
    r.body.clear();
    match cover_charts::mc_estimate(&w.o, &w.family, samples, seed, &opts.chart()) {
        Ok(est) => {
            let b = cover_charts::bounding_volume(w.family.k(), w.family.n(), opts.alpha);
            r.float("estimate", est.estimate);
            r.float("stderr", est.stderr);
            r.float("bound", est.bound);
            if let Some(x) = &b.exact {
                r.exact("bound", x);
            }
            r.exact("accepted", format!("{}/{}", est.accepted, est.samples));
            r.checks.push(Check::new("estimate_below_bound", est.estimate <= est.bound, ""));
            let (k, n) = (w.family.k() as i32, w.family.n() as i32);
            let formula = 8f64.powi(k) * (2.0 * std::f64::consts::PI * opts.alpha * opts.alpha).powi(n - k);
            let mut ok = (formula - b.value).abs() <= 1e-12 * formula;
            if let Some(x) = &b.exact {
                ok &= *x == num_bigint::BigInt::from(2).pow((4 * n - k) as u32);
            }
            r.checks.push(Check::new("bound_formula", ok, format!("8^{k}*(2*pi*alpha^2)^{}", n - k)));
        }
        Err(e) => r.checks.push(Check::new("mc_estimate", false, e.to_string())),
    }
    r
}

// ---------------------------------------------------------------------------
// Suite

/// One instance of the battery.
struct SuiteItem {
    source: String,
    cover: Result<TranslationCover, String>,
    geometric: bool,
    pre: Vec<Check>,
}

pub const SUITE_COLUMNS: [&str; 9] = ["instance", "source", "d", "g", "n", "kappa", "check", "pass", "detail"];

fn battery(item: &SuiteItem, seed: u64, index: u64, opts: &GlobalOpts) -> Vec<Check> {
    let mut out = item.pre.clone();
    let c = match &item.cover {
        Ok(c) => c,
        Err(e) => {
            out.push(Check::new("cover", false, e.clone()));
            return out;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    out.extend(checks::cover_checks(c));
    let tol = opts.rel_tol;
    let push = |out: &mut Vec<Check>, name: &'static str, r: Result<Check, VolumeError>| match r {
        Ok(c) => out.push(c),
        Err(e) => out.push(Check::new(name, false, e.to_string())),
    };
    match ExactField::new(c.d()) {
        Some(f) => {
            match checks::dim_checks(&f, c) {
                Ok(cs) => out.extend(cs),
                Err(e) => out.push(Check::new("cohomology", false, e.to_string())),
            }
            push(&mut out, "theta_choice_independence", checks::theta_choice_check(&f, &mut rng, c, 3, 0.0));
            if matches!(c.d(), 3 | 4 | 6) {
                push(&mut out, "zeta_independence", checks::zeta_check(&f, c, 0.0));
            }
            push(&mut out, "masur_veech_ratio", checks::masur_veech_check(c).map(|x| x.0));
        }
        None => {
            let f = FloatField::new(c.d(), opts.eps_lin);
            match checks::dim_checks(&f, c) {
                Ok(cs) => out.extend(cs),
                Err(e) => out.push(Check::new("cohomology", false, e.to_string())),
            }
            push(&mut out, "theta_choice_independence", checks::theta_choice_check(&f, &mut rng, c, 3, tol));
            push(&mut out, "zeta_independence", checks::zeta_check(&f, c, tol));
        }
    }
    if item.geometric {
        match checks::delaunay_checks(c, &opts.delaunay()) {
            Ok((_, run, cs)) => {
                out.extend(cs);
                out.extend(checks::cylinder_checks(&run.surface, &opts.delaunay()).0);
            }
            Err(e) => out.push(Check::new("delaunay_certified", false, e.to_string())),
        }
        out.push(checks::witness_check(c, &opts.chart()).0);
    }
    out
}

fn suite_items(dir: &Path, seed: u64, count: usize, geometric: usize, opts: &GlobalOpts) -> Result<Vec<SuiteItem>, InputError> {
    let shown = dir.display().to_string();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| InputError::Io { path: shown.clone(), source })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut items = Vec::new();
    for p in files {
        let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut pre = Vec::new();
        let cover = load(&p, opts, false).map_err(|e| e.to_string()).and_then(|(i, expected)| {
            if let Some(k) = expected {
                let ok = k.as_slice() == i.surface.kappa();
                pre.push(Check::new("kappa_expected", ok, format!("computed {}, file {}", kappa_text(i.surface.kappa()), kappa_text(&k))));
            }
            build_cover(&i.surface, 1).map_err(|e| e.to_string())
        });
        items.push(SuiteItem { source: name, cover, geometric: true, pre });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = [1usize, 2, 3, 4, 6];
    for i in 0..count {
        let d = ds[i % ds.len()];
        let g = if d == 1 { 1 + (i / ds.len()) % 2 } else { (i / ds.len()) % 3 };
        let n = if g == 0 { 3 + i % 2 } else { 1 + i % 2 };
        let cover = generate::random_instance(&mut rng, d, g, n, 500)
            .map(|inst| inst.cover(1))
            .ok_or_else(|| format!("no primitive instance of type d={d} g={g} n={n}"));
        items.push(SuiteItem { source: format!("generated:d{d}g{g}n{n}"), cover, geometric: false, pre: Vec::new() });
    }
    let seeds = fixtures::geometric_seeds();
    for i in 0..geometric {
        let s = &seeds[i % seeds.len()];
        let cover = build_cover(s, 1)
            .map_err(|e| e.to_string())
            .and_then(|c| cover_charts::random_walk(&mut rng, &c, 4, &opts.chart()).map_err(|e| e.to_string()));
        items.push(SuiteItem { source: format!("random-walk:seed{}", i % seeds.len()), cover, geometric: true, pre: Vec::new() });
    }
    Ok(items)
}

fn stage_suite(dir: &Path, seed: u64, count: usize, geometric: usize, opts: &GlobalOpts) -> Result<RunReport, InputError> {
    let items = suite_items(dir, seed, count, geometric, opts)?;
    let results: Vec<Vec<Check>> = cover_charts::thread_pool()
        .install(|| items.par_iter().enumerate().map(|(i, it)| battery(it, seed, i as u64, opts)).collect());
    let mut r = RunReport::new("suite", opts);
    r.seed = Some(seed);
    let mut rows = vec![SUITE_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (i, (it, cs)) in items.iter().zip(&results).enumerate() {
        let (d, g, n, k) = match &it.cover {
            Ok(c) => (c.d().to_string(), c.base_genus().to_string(), c.base_orders().len().to_string(), kappa_text(c.base_orders())),
            Err(_) => Default::default(),
        };
        for c in cs {
            rows.push(vec![
                i.to_string(),
                it.source.clone(),
                d.clone(),
                g.clone(),
                n.clone(),
                k.clone(),
                c.name.to_string(),
                c.pass.to_string(),
                c.detail.clone(),
            ]);
        }
    }
    r.body = csv_lines(&rows);
    r.exact("instances", items.len());
    for (it, cs) in items.iter().zip(results) {
        for c in cs.into_iter().filter(|c| !c.pass) {
            r.checks.push(Check { detail: format!("{}: {}", it.source, c.detail), ..c });
        }
    }
    let total: usize = rows.len() - 1;
    r.checks.push(Check::new("suite", r.checks.is_empty(), format!("{total} checks run")));
    Ok(r)
}

// ---------------------------------------------------------------------------
// Entry point

fn run_command(cli: &Cli) -> Result<(RunReport, Option<String>), InputError> {
    let opts = &cli.opts;
    let with_digest = |mut r: RunReport, d: &str| {
        r.input_digest = Some(d.to_string());
        r
    };
    Ok(match &cli.command {
        Command::Check { file } => {
            let (inp, expected) = load(file, opts, false)?;
            (with_digest(stage_check(&inp.surface, expected, opts), &inp.digest), None)
        }
        Command::Cover { file, zeta, dump } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, *zeta)?;
            let mut r = with_digest(stage_cover(&c, opts), &inp.digest);
            if let Some(p) = dump {
                let t = c.translation_surface(&opts.geom()).map_err(|e| InputError::Format { path: p.display().to_string(), source: e.into() })?;
                std::fs::write(p, format::write_surface(&t)).map_err(|source| InputError::Io { path: p.display().to_string(), source })?;
                r.notes.push(format!("cover written to {}", p.display()));
            }
            (r, None)
        }
        Command::Dim { file, exact, zeta } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, *zeta)?;
            (with_digest(stage_dim(&c, *exact, opts), &inp.digest), None)
        }
        Command::Volform { file, exact, ratio, zeta, trials, seed } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, *zeta)?;
            let r = if *ratio { stage_ratio(&c, inp.surface.kappa(), opts)? } else { stage_volform(&c, *exact, *trials, *seed, opts) };
            (with_digest(r, &inp.digest), None)
        }
        Command::Delaunay { file, output } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, 1)?;
            let (mut r, out) = stage_delaunay(&c, opts);
            r = with_digest(r, &inp.digest);
            let mut text = None;
            if let Some((o, _)) = out {
                match o.quotient(&opts.geom()) {
                    Ok(q) => {
                        let q = if inp.surface.exact_sides().is_some() { fixtures::exactify(q) } else { q };
                        r.checks.push(Check::new("quotient_orders", sorted(q.kappa()) == sorted(inp.surface.kappa()), kappa_text(q.kappa())));
                        let t = format::write_surface(&q);
                        match output {
                            Some(p) => {
                                std::fs::write(p, &t).map_err(|source| InputError::Io { path: p.display().to_string(), source })?;
                                r.notes.push(format!("surface written to {}", p.display()));
                            }
                            None => text = Some(t),
                        }
                    }
                    Err(e) => r.checks.push(Check::new("quotient_orders", false, e.to_string())),
                }
            }
            (r, text)
        }
        Command::Cylinders { file } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, 1)?;
            (with_digest(stage_cylinders(&c, opts), &inp.digest), None)
        }
        Command::Witness { file } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, 1)?;
            (with_digest(stage_witness(&c, opts).0, &inp.digest), None)
        }
        Command::Mc { file, samples, seed } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, 1)?;
            (with_digest(stage_mc(&c, *samples, *seed, opts), &inp.digest), None)
        }
        Command::Suite { dir, seed, count, geometric } => (stage_suite(dir, *seed, *count, *geometric, opts)?, None),
        Command::Pipeline { file, exact, skip } => {
            let inp = load_checked(file, opts)?;
            let c = build_cover(&inp.surface, 1)?;
            let mut r = with_digest(RunReport::new("pipeline", opts), &inp.digest);
            let on = |s: Stage| !skip.contains(&s);
            let mut section = |name: &str, sub: RunReport| {
                r.body.push(format!("# stage {name}"));
                let mut sub = sub;
                for (k, t, v) in sub.values.drain(..) {
                    let tag = if t == Tag::Exact { "exact" } else { "float" };
                    r.body.push(format!("{name}.{k}  {tag}  {v}"));
                }
                r.merge(sub);
            };
            if on(Stage::Cover) {
                section("cover", stage_cover(&c, opts));
            }
            if on(Stage::Dim) {
                section("dim", stage_dim(&c, *exact, opts));
            }
            if on(Stage::Volform) {
                section("volform", stage_volform(&c, *exact, 3, 0, opts));
                match stage_ratio(&c, inp.surface.kappa(), opts) {
                    Ok(sub) => section("ratio", sub),
                    Err(VolumeError::UnsupportedD(d)) => {
                        let mut sub = RunReport::new("ratio", opts);
                        sub.notes.push(format!("ratio skipped: no lattice normalization for d = {d}"));
                        section("ratio", sub);
                    }
                    Err(e) => {
                        let mut sub = RunReport::new("ratio", opts);
                        sub.checks.push(Check::new("masur_veech_ratio", false, e.to_string()));
                        section("ratio", sub);
                    }
                }
            }
            if on(Stage::Delaunay) {
                section("delaunay", stage_delaunay(&c, opts).0);
            }
            if on(Stage::Cylinders) {
                let mut sub = stage_cylinders(&c, opts);
                sub.checks.retain(|x| !x.name.starts_with("delaunay"));
                section("cylinders", sub);
            }
            if on(Stage::Witness) {
                section("witness", stage_witness(&c, opts).0);
            }
            (r, None)
        }
    })
}

fn sorted(k: &[i64]) -> Vec<i64> {
    let mut v = k.to_vec();
    v.sort_unstable();
    v
}

/// Runs the command line on `args`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match run_command(&cli) {
        Ok((report, file)) => {
            match file {
                Some(text) => {
                    let _ = out.write_all(text.as_bytes());
                    let _ = err.write_all(report.render().as_bytes());
                }
                None => {
                    let _ = out.write_all(report.render().as_bytes());
                }
            }
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
