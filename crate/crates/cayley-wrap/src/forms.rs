//! Canonical connection 1-forms on time-indexed words and the
//! simplicial compatibility conditions for families of forms.
//!
//! A degree-n 1-form eats a base tuple of invertible algebra elements
//! (head plus letters on the A side, letters only on the B side) with
//! one tangent vector per slot and simplex time coordinates, and
//! returns a vector-space word. A family is compatible when pulling
//! back along a simplex coface matches applying the corresponding face
//! to the base tuple, and likewise for degeneracies; geometric
//! realization glues along exactly these pairs.
//!
//! Tangents transform in left-trivialized coordinates: a slot merge
//! adds the logarithmic derivatives, so the merged velocity is
//! `(z_j z_{j+1}) (z_j^{-1} v_j + z_{j+1}^{-1} v_{j+1})`. This is the
//! transport under which left translation acts trivially on form
//! values at every level, including the non-associative one.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{cd_inverse, cd_mul, CdNumber};
use crate::bar::{Side, VectorWord};
use crate::config::Config;
use crate::error::{Error, Result};

/// A point of the tangent bundle over a word: base slots with one
/// tangent vector per slot; time velocities are taken zero.
#[derive(Clone, Debug)]
pub struct TangentWord {
    side: Side,
    level: usize,
    /// One time per letter slot; the A-side head carries no time.
    times: Vec<f64>,
    base: Vec<CdNumber>,
    velocity: Vec<CdNumber>,
}

impl TangentWord {
    pub fn new(
        side: Side,
        level: usize,
        times: Vec<f64>,
        base: Vec<CdNumber>,
        velocity: Vec<CdNumber>,
    ) -> Result<TangentWord> {
        let want = match side {
            Side::A => times.len() + 1,
            Side::B => times.len(),
        };
        if base.len() != want {
            return Err(Error::contract(format!(
                "expected {want} base slots, got {}",
                base.len()
            )));
        }
        if velocity.len() != base.len() {
            return Err(Error::contract("one tangent vector per base slot"));
        }
        if base.iter().chain(&velocity).any(|z| z.level() != level) {
            return Err(Error::contract("slot level mismatch"));
        }
        Ok(TangentWord {
            side,
            level,
            times,
            base,
            velocity,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn base(&self) -> &[CdNumber] {
        &self.base
    }

    pub fn velocity(&self) -> &[CdNumber] {
        &self.velocity
    }

    fn letter_count(&self) -> usize {
        self.times.len()
    }
}

/// The canonical A-side connection 1-form:
/// `|t; z_0^{-1}v_0 [z_1^{-1}v_1 | ... | z_n^{-1}v_n]|`.
pub fn eval_canonical_a(x: &TangentWord, cfg: &Config) -> Result<VectorWord> {
    if x.side != Side::A {
        return Err(Error::contract("A-side evaluator on a B-side word"));
    }
    let vals = canonical_values(x, cfg)?;
    VectorWord::raw(
        Side::A,
        x.level,
        x.times.clone(),
        Some(vals[0].clone()),
        vals[1..].to_vec(),
    )?
    .normalize(cfg)
}

/// The canonical B-side connection 1-form:
/// `|t; [z_1^{-1}v_1 | ... | z_n^{-1}v_n]|`.
pub fn eval_canonical_b(x: &TangentWord, cfg: &Config) -> Result<VectorWord> {
    if x.side != Side::B {
        return Err(Error::contract("B-side evaluator on an A-side word"));
    }
    let vals = canonical_values(x, cfg)?;
    VectorWord::raw(Side::B, x.level, x.times.clone(), None, vals)?.normalize(cfg)
}

fn canonical_values(x: &TangentWord, cfg: &Config) -> Result<Vec<CdNumber>> {
    x.base
        .iter()
        .zip(&x.velocity)
        .map(|(z, v)| cd_mul(&cd_inverse(z, cfg)?, v))
        .collect()
}

/// A family of 1-forms, one per simplicial degree up to a cap, given
/// as pure black-box evaluators.
pub trait FormFamily {
    fn side(&self) -> Side;
    fn level(&self) -> usize;
    fn eval(&self, x: &TangentWord, cfg: &Config) -> Result<VectorWord>;
}

/// The canonical `z^{-1} dz` family, defined at every degree.
pub struct CanonicalFamily {
    pub side: Side,
    pub level: usize,
}

impl FormFamily for CanonicalFamily {
    fn side(&self) -> Side {
        self.side
    }

    fn level(&self) -> usize {
        self.level
    }

    fn eval(&self, x: &TangentWord, cfg: &Config) -> Result<VectorWord> {
        match self.side {
            Side::A => eval_canonical_a(x, cfg),
            Side::B => eval_canonical_b(x, cfg),
        }
    }
}

/// Negative control: the canonical family with its output scaled at a
/// single degree, which breaks compatibility exactly at the junctions
/// touching that degree.
pub struct PerturbedFamily {
    pub inner: CanonicalFamily,
    pub bad_degree: usize,
    pub factor: f64,
}

impl FormFamily for PerturbedFamily {
    fn side(&self) -> Side {
        self.inner.side
    }

    fn level(&self) -> usize {
        self.inner.level
    }

    fn eval(&self, x: &TangentWord, cfg: &Config) -> Result<VectorWord> {
        let w = self.inner.eval(x, cfg)?;
        if x.letter_count() == self.bad_degree {
            let head = w.head().map(|h| h.scale(self.factor));
            VectorWord::raw(
                w.side(),
                self.level(),
                w.times().to_vec(),
                head,
                w.letters().iter().map(|l| l.scale(self.factor)).collect(),
            )?
            .normalize(cfg)
        } else {
            Ok(w)
        }
    }
}

/// Coface on time coordinates, mapping an (n-1)-simplex point into the
/// n-simplex: duplicates t_j, with t_0 = 0 and t_{n+1} = 1.
fn coface_times(u: &[f64], j: usize) -> Vec<f64> {
    let n = u.len() + 1;
    let mut out = u.to_vec();
    if j == 0 {
        out.insert(0, 0.0);
    } else if j < n {
        out.insert(j - 1, u[j - 1]);
    } else {
        out.push(1.0);
    }
    out
}

/// Face on a base tuple with left-trivialized tangent transport: the
/// merged slot's velocity is `m (z_j^{-1}v_j + z_{j+1}^{-1}v_{j+1})`
/// with `m = z_j z_{j+1}`, so logarithmic derivatives add.
fn face_tuple(
    side: Side,
    base: &[CdNumber],
    vel: &[CdNumber],
    j: usize,
    letters: usize,
    cfg: &Config,
) -> Result<(Vec<CdNumber>, Vec<CdNumber>)> {
    if letters == 0 || j > letters {
        return Err(Error::contract("face index out of range"));
    }
    let mut base = base.to_vec();
    let mut vel = vel.to_vec();
    let merge = |base: &mut Vec<CdNumber>, vel: &mut Vec<CdNumber>, a: usize| -> Result<()> {
        let m = cd_mul(&base[a], &base[a + 1])?;
        let xi = cd_mul(&cd_inverse(&base[a], cfg)?, &vel[a])?
            .add(&cd_mul(&cd_inverse(&base[a + 1], cfg)?, &vel[a + 1])?)?;
        vel[a] = cd_mul(&m, &xi)?;
        base[a] = m;
        base.remove(a + 1);
        vel.remove(a + 1);
        Ok(())
    };
    // slot index of 1-based letter k is k on the A side (head at 0)
    // and k-1 on the B side
    match (side, j) {
        (Side::B, 0) => {
            base.remove(0);
            vel.remove(0);
        }
        (Side::A, j) if j < letters => {
            // j = 0 merges the head with letter 1
            merge(&mut base, &mut vel, j)?;
        }
        (Side::B, j) if j < letters => {
            merge(&mut base, &mut vel, j - 1)?;
        }
        _ => {
            base.pop();
            vel.pop();
        }
    }
    Ok((base, vel))
}

/// Degeneracy on a base tuple: inserts the identity with zero tangent
/// after letter position j.
fn degeneracy_tuple(
    side: Side,
    level: usize,
    base: &[CdNumber],
    vel: &[CdNumber],
    j: usize,
) -> (Vec<CdNumber>, Vec<CdNumber>) {
    let mut base = base.to_vec();
    let mut vel = vel.to_vec();
    let off = match side {
        Side::A => 1,
        Side::B => 0,
    };
    base.insert(j + off, CdNumber::one(level));
    vel.insert(j + off, CdNumber::zero(level));
    (base, vel)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompatKind {
    Face,
    Degeneracy,
}

#[derive(Clone, Debug)]
pub struct CompatRow {
    pub kind: CompatKind,
    pub degree: usize,
    pub j: usize,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct CompatReport {
    pub rows: Vec<CompatRow>,
}

impl CompatReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failing(&self) -> Vec<&CompatRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |acc, r| acc.max(r.max_residual))
    }
}

impl std::fmt::Display for CompatReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in &self.rows {
            writeln!(
                f,
                "{} n={} j={}: {} (max residual {:e})",
                match r.kind {
                    CompatKind::Face => "face",
                    CompatKind::Degeneracy => "degeneracy",
                },
                r.degree,
                r.j,
                if r.pass { "PASS" } else { "FAIL" },
                r.max_residual
            )?;
        }
        Ok(())
    }
}

fn random_increasing_times(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut ticks: Vec<u32> = Vec::new();
    while ticks.len() < n {
        let t = rng.gen_range(1u32..(1 << 20) - 1);
        if !ticks.contains(&t) {
            ticks.push(t);
        }
    }
    ticks.sort_unstable();
    ticks
        .iter()
        .map(|t| *t as f64 / (1u32 << 20) as f64)
        .collect()
}

fn random_invertible(level: usize, rng: &mut ChaCha8Rng) -> CdNumber {
    loop {
        let z = CdNumber::random(level, rng);
        let n = z.norm();
        if n > 0.3 {
            return z.scale(1.0 / n);
        }
    }
}

fn random_tuple(
    side: Side,
    level: usize,
    letters: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<CdNumber>, Vec<CdNumber>) {
    let slots = match side {
        Side::A => letters + 1,
        Side::B => letters,
    };
    let base = (0..slots).map(|_| random_invertible(level, rng)).collect();
    let vel = (0..slots).map(|_| CdNumber::random(level, rng)).collect();
    (base, vel)
}

/// Samples random base points and tangents, pulls back along coface x
/// id versus id x face (and the codegeneracy pair), and reports the
/// max residual per (degree, j). Pass threshold 1e-10.
pub fn check_compatibility(
    family: &dyn FormFamily,
    max_degree: usize,
    samples: usize,
    seed: u64,
    cfg: &Config,
) -> Result<CompatReport> {
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = family.side();
    let level = family.level();
    let mut rows = Vec::new();
    // face compatibility: degree n pulled to the (n-1)-simplex versus
    // degree n-1 at the faced tuple
    for n in 1..=max_degree {
        for j in 0..=n {
            let mut worst: f64 = 0.0;
            for _ in 0..samples {
                let u = random_increasing_times(n - 1, &mut rng);
                let (base, vel) = random_tuple(side, level, n, &mut rng);
                let lhs_arg =
                    TangentWord::new(side, level, coface_times(&u, j), base.clone(), vel.clone())?;
                let lhs = family.eval(&lhs_arg, cfg)?;
                let (fb, fv) = face_tuple(side, &base, &vel, j, n, cfg)?;
                let rhs_arg = TangentWord::new(side, level, u, fb, fv)?;
                let rhs = family.eval(&rhs_arg, cfg)?;
                worst = worst.max(lhs.dist(&rhs, cfg)?);
            }
            rows.push(CompatRow {
                kind: CompatKind::Face,
                degree: n,
                j,
                max_residual: worst,
                pass: worst <= tol,
            });
        }
    }
    // degeneracy compatibility: degree n at collapsed times versus
    // degree n+1 at the degenerate tuple
    for n in 0..max_degree {
        for j in 0..=n {
            let mut worst: f64 = 0.0;
            for _ in 0..samples {
                let full = random_increasing_times(n + 1, &mut rng);
                let mut collapsed = full.clone();
                collapsed.remove(j);
                let (base, vel) = random_tuple(side, level, n, &mut rng);
                let lhs_arg =
                    TangentWord::new(side, level, collapsed, base.clone(), vel.clone())?;
                let lhs = family.eval(&lhs_arg, cfg)?;
                let (db, dv) = degeneracy_tuple(side, level, &base, &vel, j);
                let rhs_arg = TangentWord::new(side, level, full, db, dv)?;
                let rhs = family.eval(&rhs_arg, cfg)?;
                worst = worst.max(lhs.dist(&rhs, cfg)?);
            }
            rows.push(CompatRow {
                kind: CompatKind::Degeneracy,
                degree: n,
                j,
                max_residual: worst,
                pass: worst <= tol,
            });
        }
    }
    Ok(CompatReport { rows })
}
