//! Command-line front end. Every subcommand prints deterministic text:
//! floats in shortest round-trip form, randomized drivers seeded
//! explicitly, so identical invocations are byte-identical.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    cd_conj, cd_exp, cd_inverse, cd_ln, cd_mul, k_defect, parse_cd, re_im_split, CdNumber,
    ImaginaryCd,
};
use crate::bar::{self, parse_word, BarWord, Side};
use crate::cochain::{cohomology_dims, exp_kernel_check, parse_complex};
use crate::config::Config;
use crate::connection::{
    curvature_estimate, curvature_extrapolated, curvature_form, defect_forms, holonomy,
    parse_bundle, parse_loop, DiscreteLoop,
};
use crate::error::{Error, Result};
use crate::exact::{component_by_formula, real_part_by_formula};
use crate::forms::{check_compatibility, CanonicalFamily};
use crate::twisted::{component_assemble, component_decompose, verify_twisted_axioms, PureState};

#[derive(Parser)]
#[command(
    name = "cayley-wrap",
    version,
    disable_help_subcommand = true,
    about = "Cayley-Dickson arithmetic, bar words, simplicial forms, holonomy, curvature and cochain complexes"
)]
struct Cli {
    /// Tolerance/branch/grid settings as a TOML file; falls back to
    /// the CAYLEY_WRAP_CONFIG env var, then defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cayley-Dickson arithmetic on `level:r; c0,c1,...` literals.
    Algebra {
        #[command(subcommand)]
        op: AlgebraOp,
    },
    /// Bar-construction words `A|B ; level ; [times] ; head ; letters`.
    Bar {
        #[command(subcommand)]
        op: BarOp,
    },
    /// Simplicial compatibility of the canonical form family.
    Forms(FormsArgs),
    /// Holonomy of a discrete loop in a bundle file.
    Holonomy(HolonomyArgs),
    /// Plaquette curvature estimates.
    Curvature(CurvatureArgs),
    /// Cohomology dimensions of a finite complex description.
    Cohomology {
        /// Complex description file.
        #[arg(long, value_name = "FILE")]
        complex: PathBuf,
    },
    /// Randomized property suites with a PASS/FAIL report.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum AlgebraOp {
    /// Product of two literals.
    Mul { x: String, y: String },
    /// Multiplicative inverse.
    Inv { x: String },
    /// Exponential.
    Exp { x: String },
    /// Principal logarithm.
    Ln { x: String },
    /// Conjugate.
    Conj { x: String },
    /// Real/imaginary split by the generator-sum formula.
    Split { x: String },
    /// Logarithm defect K(M, N) of two imaginary literals.
    Kdefect { m: String, n: String },
}

#[derive(Subcommand)]
enum BarOp {
    /// Product of two word literals.
    Mul { x: String, y: String },
    /// Group inverse.
    Inverse { x: String },
    /// Canonical normal form.
    Normalize { x: String },
    /// Word conjugate.
    Conj { x: String },
    /// Projection of an A-side word to the B side.
    Project { x: String },
}

#[derive(Args)]
struct FormsArgs {
    /// Side of the construction, `a` or `b`.
    #[arg(long)]
    side: String,
    /// Algebra level 0..=3.
    #[arg(long)]
    level: usize,
    /// Largest simplicial degree checked.
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// Random tuples per identity.
    #[arg(long, default_value_t = 4)]
    samples: usize,
    /// Seed for the tuple sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct HolonomyArgs {
    /// Bundle description file.
    #[arg(long, value_name = "FILE")]
    bundle: PathBuf,
    /// Loop file `chart; coords` rows; omit to only report defects.
    #[arg(long = "loop", value_name = "FILE")]
    loop_file: Option<PathBuf>,
    /// Refine the loop to at least this many segments.
    #[arg(long)]
    samples: Option<usize>,
    /// Also print the transition defect forms.
    #[arg(long, default_value_t = false)]
    defects: bool,
}

#[derive(Args)]
struct CurvatureArgs {
    /// Bundle description file.
    #[arg(long, value_name = "FILE")]
    bundle: PathBuf,
    /// Base point, comma-separated coordinates.
    #[arg(long)]
    point: String,
    /// Axis pair `j,k`; omit for all components.
    #[arg(long)]
    axes: Option<String>,
    /// Plaquette side length.
    #[arg(long, default_value_t = 0.01)]
    scale: f64,
    /// Richardson-extrapolate the estimate.
    #[arg(long, default_value_t = false)]
    richardson: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of moufang, expln, kdefect, decompose, bar, simplicial,
    /// twisted.
    #[arg(long)]
    suite: String,
    /// Seed for the sample generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random samples.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

/// Runs the CLI; returns the process exit code.
pub fn run<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return 1;
        }
    };
    let cfg = match Config::resolve(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    match dispatch(cli.cmd, &cfg, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read_file(p: &PathBuf) -> Result<String> {
    Ok(std::fs::read_to_string(p)?)
}

fn dispatch<W: Write>(cmd: Cmd, cfg: &Config, out: &mut W) -> Result<i32> {
    match cmd {
        Cmd::Algebra { op } => run_algebra(op, cfg, out),
        Cmd::Bar { op } => run_bar(op, cfg, out),
        Cmd::Forms(a) => run_forms(a, cfg, out),
        Cmd::Holonomy(a) => run_holonomy(a, cfg, out),
        Cmd::Curvature(a) => run_curvature(a, cfg, out),
        Cmd::Cohomology { complex } => run_cohomology(&complex, cfg, out),
        Cmd::Verify(a) => run_verify(a, cfg, out),
    }
}

fn run_algebra<W: Write>(op: AlgebraOp, cfg: &Config, out: &mut W) -> Result<i32> {
    match op {
        AlgebraOp::Mul { x, y } => {
            let r = cd_mul(&parse_cd(&x)?, &parse_cd(&y)?)?;
            writeln!(out, "{r}")?;
        }
        AlgebraOp::Inv { x } => {
            let r = cd_inverse(&parse_cd(&x)?, cfg)?;
            writeln!(out, "{r}")?;
        }
        AlgebraOp::Exp { x } => {
            let r = cd_exp(&parse_cd(&x)?, cfg);
            writeln!(out, "{r}")?;
        }
        AlgebraOp::Ln { x } => {
            let r = cd_ln(&parse_cd(&x)?, cfg)?;
            writeln!(out, "{r}")?;
        }
        AlgebraOp::Conj { x } => {
            let r = cd_conj(&parse_cd(&x)?);
            writeln!(out, "{r}")?;
        }
        AlgebraOp::Split { x } => {
            let (re, im) = re_im_split(&parse_cd(&x)?);
            writeln!(out, "re: {re}")?;
            writeln!(out, "im: {}", im.as_cd())?;
        }
        AlgebraOp::Kdefect { m, n } => {
            let m = ImaginaryCd::new(parse_cd(&m)?)?;
            let n = ImaginaryCd::new(parse_cd(&n)?)?;
            let k = k_defect(&m, &n, cfg)?;
            writeln!(out, "{}", k.as_cd())?;
        }
    }
    Ok(0)
}

fn run_bar<W: Write>(op: BarOp, cfg: &Config, out: &mut W) -> Result<i32> {
    let r = match op {
        BarOp::Mul { x, y } => bar::mul(&parse_word(&x, cfg)?, &parse_word(&y, cfg)?, cfg)?,
        BarOp::Inverse { x } => bar::inverse(&parse_word(&x, cfg)?, cfg)?,
        BarOp::Normalize { x } => parse_word(&x, cfg)?,
        BarOp::Conj { x } => bar::bar_conj(&parse_word(&x, cfg)?, cfg)?,
        BarOp::Project { x } => bar::project_a_to_b(&parse_word(&x, cfg)?, cfg)?,
    };
    writeln!(out, "{r}")?;
    Ok(0)
}

fn parse_side(s: &str) -> Result<Side> {
    match s {
        "a" | "A" => Ok(Side::A),
        "b" | "B" => Ok(Side::B),
        _ => Err(Error::parse(format!("side must be a or b, got `{s}`"))),
    }
}

fn run_forms<W: Write>(a: FormsArgs, cfg: &Config, out: &mut W) -> Result<i32> {
    let family = CanonicalFamily {
        side: parse_side(&a.side)?,
        level: a.level,
    };
    let report = check_compatibility(&family, a.max_degree, a.samples, a.seed, cfg)?;
    write!(out, "{report}")?;
    writeln!(out, "max residual: {:e}", report.max_residual())?;
    writeln!(
        out,
        "result: {}",
        if report.all_pass() { "PASS" } else { "FAIL" }
    )?;
    Ok(if report.all_pass() { 0 } else { 3 })
}

/// Linearly subdivides each segment so the loop has at least `target`
/// segments, preserving chart assignments.
fn refine_loop(lp: &DiscreteLoop, target: usize) -> Result<DiscreteLoop> {
    let per = target.div_ceil(lp.segments()).max(1);
    if per == 1 {
        return DiscreteLoop::new(lp.points.clone(), lp.charts.clone());
    }
    let mut points = Vec::with_capacity(lp.segments() * per + 1);
    let mut charts = Vec::with_capacity(lp.segments() * per);
    for s in 0..lp.segments() {
        let p = &lp.points[s];
        let q = &lp.points[s + 1];
        for i in 0..per {
            let t = i as f64 / per as f64;
            points.push(p.iter().zip(q).map(|(a, b)| a + (b - a) * t).collect());
            charts.push(lp.charts[s]);
        }
    }
    points.push(lp.points.last().unwrap().clone());
    DiscreteLoop::new(points, charts)
}

fn run_holonomy<W: Write>(a: HolonomyArgs, cfg: &Config, out: &mut W) -> Result<i32> {
    let bundle = parse_bundle(&read_file(&a.bundle)?, cfg)?;
    if a.defects {
        let d = defect_forms(&bundle, cfg)?;
        writeln!(out, "max |nu|: {:e}", d.max_nu())?;
        writeln!(out, "max |eta|: {:e}", d.max_eta())?;
    }
    if let Some(loop_file) = &a.loop_file {
        let mut lp = parse_loop(&read_file(loop_file)?, &bundle)?;
        if let Some(n) = a.samples {
            lp = refine_loop(&lp, n)?;
        }
        let h = holonomy(&lp, &bundle, cfg)?;
        writeln!(out, "segments: {}", lp.segments())?;
        writeln!(out, "holonomy: {h}")?;
    } else if !a.defects {
        return Err(Error::contract("nothing to do: pass --loop or --defects"));
    }
    Ok(0)
}

fn parse_axes(s: &str) -> Result<(usize, usize)> {
    let (j, k) = s
        .split_once(',')
        .ok_or_else(|| Error::parse("axes are `j,k`"))?;
    let j = j.trim().parse().map_err(|_| Error::parse("bad axis index"))?;
    let k = k.trim().parse().map_err(|_| Error::parse("bad axis index"))?;
    Ok((j, k))
}

fn run_curvature<W: Write>(a: CurvatureArgs, cfg: &Config, out: &mut W) -> Result<i32> {
    let bundle = parse_bundle(&read_file(&a.bundle)?, cfg)?;
    let point: Vec<f64> = a
        .point
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(format!("bad coordinate `{t}`")))
        })
        .collect::<Result<_>>()?;
    match a.axes.as_deref() {
        Some(axes) => {
            let (j, k) = parse_axes(axes)?;
            let e = if a.richardson {
                curvature_extrapolated(&bundle, &point, j, k, a.scale, cfg)?
            } else {
                curvature_estimate(&bundle, &point, j, k, a.scale, cfg)?
            };
            writeln!(out, "K_{{{j},{k}}}: {e}")?;
        }
        None => {
            let form = curvature_form(&bundle, &point, a.scale, cfg)?;
            for ((j, k), v) in form.components() {
                writeln!(out, "K_{{{j},{k}}}: {v}")?;
            }
        }
    }
    Ok(0)
}

fn run_cohomology<W: Write>(path: &PathBuf, cfg: &Config, out: &mut W) -> Result<i32> {
    let spec = parse_complex(&read_file(path)?)?;
    writeln!(
        out,
        "points: {}, level: {}",
        spec.points.len(),
        spec.level
    )?;
    let dims = cohomology_dims(spec.points.len(), spec.level, spec.degree_cap, cfg)?;
    for (m, d) in dims.iter().enumerate() {
        writeln!(out, "H^{m}: {d}")?;
    }
    Ok(0)
}

struct SuiteOutcome {
    lines: Vec<String>,
    max_residual: f64,
    pass: bool,
}

fn run_verify<W: Write>(a: VerifyArgs, cfg: &Config, out: &mut W) -> Result<i32> {
    let outcome = match a.suite.as_str() {
        "moufang" => suite_moufang(a.seed, a.samples, cfg)?,
        "expln" => suite_expln(a.seed, a.samples, cfg)?,
        "kdefect" => suite_kdefect(a.seed, a.samples, cfg)?,
        "decompose" => suite_decompose(a.seed, a.samples)?,
        "bar" => suite_bar(a.seed, a.samples, cfg)?,
        "simplicial" => suite_simplicial(a.seed, a.samples, cfg)?,
        "twisted" => suite_twisted(a.seed, a.samples, cfg)?,
        other => return Err(Error::parse(format!("unknown suite `{other}`"))),
    };
    writeln!(out, "suite: {}", a.suite)?;
    writeln!(out, "seed: {}", a.seed)?;
    writeln!(out, "samples: {}", a.samples)?;
    for line in &outcome.lines {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "max residual: {:e}", outcome.max_residual)?;
    writeln!(out, "result: {}", if outcome.pass { "PASS" } else { "FAIL" })?;
    Ok(if outcome.pass { 0 } else { 3 })
}

fn rel_dist(a: &CdNumber, b: &CdNumber) -> f64 {
    a.dist(b) / (1.0 + a.norm().max(b.norm()))
}

fn suite_moufang(seed: u64, samples: usize, _cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alt: f64 = 0.0;
    let mut moufang: f64 = 0.0;
    let mut conj_r: f64 = 0.0;
    for _ in 0..samples {
        let x = CdNumber::random(3, &mut rng);
        let y = CdNumber::random(3, &mut rng);
        let z = CdNumber::random(3, &mut rng);
        let xx = cd_mul(&x, &x)?;
        alt = alt
            .max(rel_dist(&cd_mul(&x, &cd_mul(&x, &y)?)?, &cd_mul(&xx, &y)?))
            .max(rel_dist(&cd_mul(&cd_mul(&y, &x)?, &x)?, &cd_mul(&y, &xx)?));
        let m1l = cd_mul(&cd_mul(&cd_mul(&x, &y)?, &x)?, &z)?;
        let m1r = cd_mul(&x, &cd_mul(&y, &cd_mul(&x, &z)?)?)?;
        let m2l = cd_mul(&z, &cd_mul(&x, &cd_mul(&y, &x)?)?)?;
        let m2r = cd_mul(&cd_mul(&cd_mul(&z, &x)?, &y)?, &x)?;
        let m3l = cd_mul(&cd_mul(&x, &y)?, &cd_mul(&z, &x)?)?;
        let m3r = cd_mul(&x, &cd_mul(&cd_mul(&y, &z)?, &x)?)?;
        moufang = moufang
            .max(rel_dist(&m1l, &m1r))
            .max(rel_dist(&m2l, &m2r))
            .max(rel_dist(&m3l, &m3r));
        conj_r = conj_r.max(rel_dist(
            &cd_conj(&cd_mul(&x, &y)?),
            &cd_mul(&cd_conj(&y), &cd_conj(&x))?,
        ));
    }
    Ok(SuiteOutcome {
        lines: vec![
            format!("alternativity: {alt:e}"),
            format!("moufang identities: {moufang:e}"),
            format!("conjugation anti-homomorphism: {conj_r:e}"),
        ],
        max_residual: alt.max(moufang).max(conj_r),
        pass: alt < 1e-11 && moufang < 1e-11 && conj_r < 1e-12,
    })
}

fn suite_expln(seed: u64, samples: usize, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roundtrip: f64 = 0.0;
    let mut kernel: f64 = 0.0;
    for i in 0..samples {
        let level = 1 + i % 3;
        let mut x = CdNumber::random(level, &mut rng).scale(2.0);
        let im = ImaginaryCd::from_im_part(&x);
        if im.norm() >= 3.0 {
            x = x.scale(2.9 / im.norm());
        }
        let y = cd_ln(&cd_exp(&x, cfg), cfg)?;
        roundtrip = roundtrip.max(y.dist(&x));
        let m = ImaginaryCd::from_im_part(&CdNumber::random(level, &mut rng));
        if m.norm() > 0.05 {
            for k in -3..=3 {
                kernel = kernel.max(exp_kernel_check(&m, k, cfg)?);
            }
        }
    }
    Ok(SuiteOutcome {
        lines: vec![
            format!("roundtrip Ln(exp(x)) = x: {roundtrip:e}"),
            format!("kernel periodicity: {kernel:e}"),
        ],
        max_residual: roundtrip.max(kernel),
        pass: roundtrip < 1e-9 && kernel < 1e-9,
    })
}

fn random_imaginary(level: usize, max_norm: f64, rng: &mut ChaCha8Rng) -> ImaginaryCd {
    let m = ImaginaryCd::from_im_part(&CdNumber::random(level, rng));
    let n = m.norm();
    if n > max_norm {
        ImaginaryCd::from_im_part(&m.as_cd().scale(max_norm * 0.99 / n))
    } else {
        m
    }
}

fn suite_kdefect(seed: u64, samples: usize, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identities: f64 = 0.0;
    let mut commuting: f64 = 0.0;
    for _ in 0..samples {
        let m = random_imaginary(3, 1.0, &mut rng);
        let n = random_imaginary(3, 1.0, &mut rng);
        let k = k_defect(&m, &n, cfg)?;
        let neg_n = ImaginaryCd::from_im_part(&n.as_cd().neg());
        let neg_m = ImaginaryCd::from_im_part(&m.as_cd().neg());
        let id1 = k_defect(&k, &neg_n, cfg)?;
        let id2 = k_defect(&neg_m, &k, cfg)?;
        let id3 = k_defect(&neg_n, &neg_m, cfg)?;
        identities = identities
            .max(id1.as_cd().dist(m.as_cd()))
            .max(id2.as_cd().dist(n.as_cd()))
            .max(k.as_cd().dist(&id3.as_cd().neg()));
        let u = {
            let v = random_imaginary(3, 1.0, &mut rng);
            let nv = v.norm();
            if nv < 1e-3 {
                continue;
            }
            v.as_cd().scale(1.0 / nv)
        };
        let alpha: f64 = rng.gen_range(-1.4..1.4);
        let beta: f64 = rng.gen_range(-1.4..1.4);
        if (alpha + beta).abs() >= 3.0 {
            continue;
        }
        let ku = k_defect(
            &ImaginaryCd::from_im_part(&u.scale(alpha)),
            &ImaginaryCd::from_im_part(&u.scale(beta)),
            cfg,
        )?;
        commuting = commuting.max(ku.as_cd().dist(&u.scale(alpha + beta)));
    }
    Ok(SuiteOutcome {
        lines: vec![
            format!("inversion identities: {identities:e}"),
            format!("commuting case: {commuting:e}"),
        ],
        max_residual: identities.max(commuting),
        pass: identities < 1e-9 && commuting < 1e-10,
    })
}

fn suite_decompose(seed: u64, samples: usize) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual: f64 = 0.0;
    for i in 0..samples {
        let level = 2 + i % 2;
        let z = CdNumber::random(level, &mut rng).scale(10.0);
        let (re, im) = re_im_split(&z);
        if re != z.coeff(0) || im.as_cd().coeff(0) != 0.0 {
            residual = residual.max(1.0);
        }
        for s in 1..(1usize << level) {
            if im.as_cd().coeff(s) != z.coeff(s) {
                residual = residual.max(1.0);
            }
        }
        if real_part_by_formula(&z) != z.coeff(0) {
            residual = residual.max(1.0);
        }
        for j in 1..(1usize << level) {
            if component_by_formula(&z, j) != z.coeff(j) {
                residual = residual.max(1.0);
            }
        }
        let blocks = component_decompose(&z)?;
        if component_assemble(&blocks)? != z {
            residual = residual.max(1.0);
        }
    }
    Ok(SuiteOutcome {
        lines: vec![format!("bit-exact mismatches: {}", residual as u64)],
        max_residual: residual,
        pass: residual == 0.0,
    })
}

fn random_bar_times(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut ticks: Vec<u32> = Vec::new();
    while ticks.len() < n {
        let t = rng.gen_range(1..1024u32);
        if !ticks.contains(&t) {
            ticks.push(t);
        }
    }
    ticks.sort_unstable();
    ticks.iter().map(|&t| t as f64 / 1024.0).collect()
}

fn random_bar_word(
    side: Side,
    level: usize,
    max_letters: usize,
    rng: &mut ChaCha8Rng,
    cfg: &Config,
) -> Result<BarWord> {
    let n = rng.gen_range(0..=max_letters);
    let times = random_bar_times(n, rng);
    let letter = |rng: &mut ChaCha8Rng| -> Result<PureState> {
        let g = rng.gen_range(0..1usize << level);
        let e: i32 = rng.gen_range(-2..=2);
        let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        PureState::new(level, g, s * 2f64.powi(e))
    };
    let head = match side {
        Side::A => Some(letter(rng)?),
        Side::B => None,
    };
    let letters = (0..n).map(|_| letter(rng)).collect::<Result<_>>()?;
    BarWord::raw(side, level, times, head, letters)?.normalize(cfg)
}

fn suite_bar(seed: u64, samples: usize, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut group: f64 = 0.0;
    let mut assoc: f64 = 0.0;
    let mut alt: f64 = 0.0;
    let mut hom: f64 = 0.0;
    for i in 0..samples {
        let level = i % 4;
        let side = if i % 2 == 0 { Side::A } else { Side::B };
        let x = random_bar_word(side, level, 4, &mut rng, cfg)?;
        let y = random_bar_word(side, level, 4, &mut rng, cfg)?;
        let unit = match side {
            Side::A => BarWord::unit_a(level),
            Side::B => BarWord::unit_b(level),
        };
        group = group
            .max(bar::mul(&x, &unit, cfg)?.dist(&x))
            .max(bar::mul(&unit, &x, cfg)?.dist(&x))
            .max(bar::mul(&x, &bar::inverse(&x, cfg)?, cfg)?.dist(&unit));
        if level <= 2 {
            let z = random_bar_word(side, level, 4, &mut rng, cfg)?;
            assoc = assoc.max(
                bar::mul(&bar::mul(&x, &y, cfg)?, &z, cfg)?
                    .dist(&bar::mul(&x, &bar::mul(&y, &z, cfg)?, cfg)?),
            );
        } else {
            alt = alt
                .max(
                    bar::mul(&x, &bar::mul(&x, &y, cfg)?, cfg)?
                        .dist(&bar::mul(&bar::mul(&x, &x, cfg)?, &y, cfg)?),
                )
                .max(
                    bar::mul(&bar::mul(&y, &x, cfg)?, &x, cfg)?
                        .dist(&bar::mul(&y, &bar::mul(&x, &x, cfg)?, cfg)?),
                );
        }
        if side == Side::A {
            let p = bar::project_a_to_b(&bar::mul(&x, &y, cfg)?, cfg)?;
            let q = bar::mul(
                &bar::project_a_to_b(&x, cfg)?,
                &bar::project_a_to_b(&y, cfg)?,
                cfg,
            )?;
            hom = hom.max(p.dist(&q));
        }
    }
    Ok(SuiteOutcome {
        lines: vec![
            format!("unit and inverse laws: {group:e}"),
            format!("associativity (levels 0-2): {assoc:e}"),
            format!("alternative laws (level 3): {alt:e}"),
            format!("projection homomorphism: {hom:e}"),
        ],
        max_residual: group.max(assoc).max(alt).max(hom),
        pass: group < 1e-11 && assoc == 0.0 && alt < 1e-11 && hom < 1e-11,
    })
}

fn suite_simplicial(seed: u64, samples: usize, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word_ids: f64 = 0.0;
    for i in 0..samples {
        let level = [1, 2][i % 2];
        let side = if i % 3 == 0 { Side::A } else { Side::B };
        let w = random_bar_word(side, level, 5, &mut rng, cfg)?;
        let n = w.letters().len();
        if n < 2 {
            continue;
        }
        for j in 1..=n {
            for k in 0..j {
                let lhs = bar::face(k, &bar::face(j, &w)?)?;
                let rhs = bar::face(j - 1, &bar::face(k, &w)?)?;
                word_ids = word_ids.max(lhs.dist(&rhs));
            }
        }
        for j in 0..=n {
            let s = bar::degeneracy(j, &w)?;
            word_ids = word_ids
                .max(bar::face(j, &s)?.dist(&w))
                .max(bar::face(j + 1, &s)?.dist(&w));
        }
        for j in 0..=n {
            for k in 0..=j {
                let lhs = bar::degeneracy(k, &bar::degeneracy(j, &w)?)?;
                let rhs = bar::degeneracy(j + 1, &bar::degeneracy(k, &w)?)?;
                word_ids = word_ids.max(lhs.normalize(cfg)?.dist(&rhs.normalize(cfg)?));
            }
        }
    }
    let mut compat: f64 = 0.0;
    let mut compat_pass = true;
    let mut lines = vec![format!("word face/degeneracy identities: {word_ids:e}")];
    for level in 2..=3 {
        for side in [Side::A, Side::B] {
            let family = CanonicalFamily { side, level };
            let report = check_compatibility(&family, 5, 3, seed, cfg)?;
            compat = compat.max(report.max_residual());
            compat_pass &= report.all_pass();
            lines.push(format!(
                "canonical compatibility side {} level {level}: {:e}",
                match side {
                    Side::A => "a",
                    Side::B => "b",
                },
                report.max_residual()
            ));
        }
    }
    Ok(SuiteOutcome {
        lines,
        max_residual: word_ids.max(compat),
        pass: word_ids == 0.0 && compat_pass,
    })
}

fn suite_twisted(seed: u64, samples: usize, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::with_capacity(samples);
    for _ in 0..samples.max(1) {
        let state = |rng: &mut ChaCha8Rng| -> Result<PureState> {
            let g = rng.gen_range(0..8usize);
            let mut v: f64 = rng.gen_range(-2.0..2.0);
            if v.abs() < 0.1 {
                v = 0.7;
            }
            PureState::new(3, g, v)
        };
        triples.push((state(&mut rng)?, state(&mut rng)?, state(&mut rng)?));
    }
    let product = |a: &CdNumber, b: &CdNumber| cd_mul(a, b).expect("level mismatch");
    let report = verify_twisted_axioms(&triples, &product, cfg)?;
    let max = report
        .axioms
        .iter()
        .fold(0.0f64, |m, a| m.max(a.max_residual));
    Ok(SuiteOutcome {
        lines: report
            .axioms
            .iter()
            .map(|a| {
                format!(
                    "{}: {} (max residual {:e})",
                    a.name,
                    if a.pass { "PASS" } else { "FAIL" },
                    a.max_residual
                )
            })
            .collect(),
        max_residual: max,
        pass: report.all_pass(),
    })
}
