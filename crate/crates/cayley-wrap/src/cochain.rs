//! Finite Alexander-Spanier cochain complexes with Cayley-Dickson
//! coefficients: the coboundary operator, cohomology dimensions by
//! real rank-nullity, exactness checks for sequences of linear maps,
//! and the exponential periodicity kernel test.
//!
//! On a finite discrete space every cochain is locally determined, so
//! the germ-trivial subgroup is zero and no quotient is taken.
//! Coefficients sit in the additive group; multiplicative data enters
//! through the principal logarithm upstream.

use crate::algebra::{cd_exp, CdNumber, ImaginaryCd};
use crate::config::Config;
use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 12;
pub const MAX_DEGREE: usize = 4;

/// A total function on (m+1)-tuples of a finite base set, stored
/// densely in row-major tuple order.
#[derive(Clone, Debug)]
pub struct Cochain {
    pub level: usize,
    pub degree: usize,
    pub points: usize,
    values: Vec<CdNumber>,
}

fn tuple_count(points: usize, degree: usize) -> usize {
    points.pow(degree as u32 + 1)
}

impl Cochain {
    pub fn zero(level: usize, degree: usize, points: usize, cfg: &Config) -> Result<Cochain> {
        if degree > MAX_DEGREE {
            return Err(Error::contract(format!("degree above {MAX_DEGREE}")));
        }
        Cochain::zero_uncapped(level, degree, points, cfg)
    }

    // the coboundary may carry a capped cochain one degree higher, so
    // only the base set and table size are enforced here
    fn zero_uncapped(level: usize, degree: usize, points: usize, cfg: &Config) -> Result<Cochain> {
        if points > MAX_POINTS {
            return Err(Error::contract(format!("base set larger than {MAX_POINTS}")));
        }
        let n = tuple_count(points, degree);
        if n > cfg.max_matrix_entries {
            return Err(Error::contract("cochain table exceeds the size cap"));
        }
        Ok(Cochain {
            level,
            degree,
            points,
            values: vec![CdNumber::zero(level); n],
        })
    }

    pub fn from_fn(
        level: usize,
        degree: usize,
        points: usize,
        cfg: &Config,
        mut f: impl FnMut(&[usize]) -> CdNumber,
    ) -> Result<Cochain> {
        let mut c = Cochain::zero(level, degree, points, cfg)?;
        let mut tuple = vec![0usize; degree + 1];
        for idx in 0..c.values.len() {
            c.decode(idx, &mut tuple);
            let v = f(&tuple);
            if v.level() != level {
                return Err(Error::contract("cochain value level mismatch"));
            }
            c.values[idx] = v;
        }
        Ok(c)
    }

    fn encode(&self, tuple: &[usize]) -> usize {
        let mut idx = 0;
        for &x in tuple {
            debug_assert!(x < self.points);
            idx = idx * self.points + x;
        }
        idx
    }

    fn decode(&self, mut idx: usize, tuple: &mut [usize]) {
        for slot in tuple.iter_mut().rev() {
            *slot = idx % self.points;
            idx /= self.points;
        }
    }

    pub fn get(&self, tuple: &[usize]) -> Result<&CdNumber> {
        if tuple.len() != self.degree + 1 || tuple.iter().any(|&x| x >= self.points) {
            return Err(Error::contract("tuple outside the base set"));
        }
        Ok(&self.values[self.encode(tuple)])
    }

    pub fn set(&mut self, tuple: &[usize], v: CdNumber) -> Result<()> {
        if tuple.len() != self.degree + 1 || tuple.iter().any(|&x| x >= self.points) {
            return Err(Error::contract("tuple outside the base set"));
        }
        if v.level() != self.level {
            return Err(Error::contract("cochain value level mismatch"));
        }
        let idx = self.encode(tuple);
        self.values[idx] = v;
        Ok(())
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.norm()))
    }

    pub fn dist(&self, other: &Cochain) -> Result<f64> {
        if self.level != other.level
            || self.degree != other.degree
            || self.points != other.points
        {
            return Err(Error::contract("cochain shape mismatch"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max(a.dist(b))))
    }

    /// The real cochain of one coefficient component, at level 0.
    pub fn component(&self, j: usize) -> Result<Cochain> {
        if j >= 1 << self.level {
            return Err(Error::contract("component out of range"));
        }
        Ok(Cochain {
            level: 0,
            degree: self.degree,
            points: self.points,
            values: self
                .values
                .iter()
                .map(|v| CdNumber::real(0, v.coeff(j)))
                .collect(),
        })
    }

    /// Reassembles a cochain from its 2^r real components.
    pub fn assemble(level: usize, comps: &[Cochain], cfg: &Config) -> Result<Cochain> {
        if comps.len() != 1 << level {
            return Err(Error::contract("need one component per generator"));
        }
        let first = &comps[0];
        let mut c = Cochain::zero(level, first.degree, first.points, cfg)?;
        for comp in comps {
            if comp.degree != first.degree || comp.points != first.points || comp.level != 0 {
                return Err(Error::contract("component shape mismatch"));
            }
        }
        for idx in 0..c.values.len() {
            let coeffs: Vec<f64> = comps.iter().map(|comp| comp.values[idx].coeff(0)).collect();
            c.values[idx] = CdNumber::new(level, coeffs)?;
        }
        Ok(c)
    }
}

/// The alternating-sum coboundary; acts on each coefficient component
/// identically.
pub fn coboundary(f: &Cochain, cfg: &Config) -> Result<Cochain> {
    let degree = f.degree + 1;
    let mut out = Cochain::zero_uncapped(f.level, degree, f.points, cfg)?;
    let mut tuple = vec![0usize; degree + 1];
    let mut sub = vec![0usize; degree];
    for idx in 0..out.values.len() {
        out.decode(idx, &mut tuple);
        let mut acc = CdNumber::zero(f.level);
        for j in 0..=degree {
            let mut w = 0;
            for (i, &x) in tuple.iter().enumerate() {
                if i != j {
                    sub[w] = x;
                    w += 1;
                }
            }
            let term = f.values[f.encode(&sub)].clone();
            acc = if j % 2 == 0 {
                acc.add(&term)?
            } else {
                acc.sub(&term)?
            };
        }
        out.values[idx] = acc;
    }
    Ok(out)
}

/// A dense real matrix with rank by Gaussian elimination.
#[derive(Clone, Debug)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::contract("ragged matrix rows"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// Numerical rank: row reduction with partial pivoting, treating
    /// pivots below `tol` times the largest entry as zero.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let cutoff = tol * scale;
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let mut pivot = rank;
            for r in rank + 1..rows {
                if a[r * cols + col].abs() > a[pivot * cols + col].abs() {
                    pivot = r;
                }
            }
            if a[pivot * cols + col].abs() <= cutoff {
                continue;
            }
            if pivot != rank {
                for c in 0..cols {
                    a.swap(rank * cols + c, pivot * cols + c);
                }
            }
            let lead = a[rank * cols + col];
            for r in rank + 1..rows {
                let factor = a[r * cols + col] / lead;
                if factor != 0.0 {
                    for c in col..cols {
                        a[r * cols + c] -= factor * a[rank * cols + c];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// The scalar coboundary matrix from degree m to m+1 on an n-point
/// base, acting on real-valued cochains.
pub fn coboundary_matrix(points: usize, degree: usize, cfg: &Config) -> Result<Matrix> {
    let src = tuple_count(points, degree);
    let dst = tuple_count(points, degree + 1);
    if src.saturating_mul(dst) > cfg.max_matrix_entries {
        return Err(Error::contract("coboundary matrix exceeds the size cap"));
    }
    let mut m = Matrix::zero(dst, src);
    let mut tuple = vec![0usize; degree + 2];
    for row in 0..dst {
        let mut idx = row;
        for slot in tuple.iter_mut().rev() {
            *slot = idx % points;
            idx /= points;
        }
        for j in 0..=degree + 1 {
            let mut col = 0;
            for (i, &x) in tuple.iter().enumerate() {
                if i != j {
                    col = col * points + x;
                }
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            m.set(row, col, m.get(row, col) + sign);
        }
    }
    Ok(m)
}

/// Cohomology dimensions of the full finite complex up to
/// `max_degree`, on the 2^r-component real representation.
pub fn cohomology_dims(
    points: usize,
    level: usize,
    max_degree: usize,
    cfg: &Config,
) -> Result<Vec<usize>> {
    if points > MAX_POINTS {
        return Err(Error::contract(format!("base set larger than {MAX_POINTS}")));
    }
    if max_degree > MAX_DEGREE {
        return Err(Error::contract(format!("degree above {MAX_DEGREE}")));
    }
    let scalar_copies = 1usize << level;
    if points == 0 {
        return Ok(vec![0; max_degree + 1]);
    }
    let mut ranks = Vec::with_capacity(max_degree + 1);
    for m in 0..=max_degree {
        ranks.push(coboundary_matrix(points, m, cfg)?.rank(cfg.rank_tol));
    }
    let mut dims = Vec::with_capacity(max_degree + 1);
    for m in 0..=max_degree {
        let dim_src = tuple_count(points, m);
        let kernel = dim_src - ranks[m];
        let image_prev = if m == 0 { 0 } else { ranks[m - 1] };
        dims.push((kernel - image_prev) * scalar_copies);
    }
    Ok(dims)
}

/// A chain of real linear maps V_0 -> V_1 -> ... -> V_k.
pub struct LinearSequence {
    maps: Vec<Matrix>,
}

impl LinearSequence {
    pub fn new(maps: Vec<Matrix>) -> Result<LinearSequence> {
        for pair in maps.windows(2) {
            if pair[0].rows != pair[1].cols {
                return Err(Error::contract(
                    "map target dimension must match the next map's source",
                ));
            }
        }
        Ok(LinearSequence { maps })
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }
}

#[derive(Clone, Debug)]
pub struct ExactnessRow {
    pub junction: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub defect: i64,
}

#[derive(Clone, Debug)]
pub struct ExactnessReport {
    pub rows: Vec<ExactnessRow>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|r| r.defect == 0)
    }
}

impl std::fmt::Display for ExactnessReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in &self.rows {
            writeln!(
                f,
                "junction {}: ker = {}, im = {}, defect = {} ({})",
                r.junction,
                r.kernel_dim,
                r.image_dim,
                r.defect,
                if r.defect == 0 { "exact" } else { "inexact" }
            )?;
        }
        Ok(())
    }
}

/// Reports `dim ker(next) - rank(prev)` at each interior junction;
/// zero everywhere means the sequence is exact.
pub fn check_exactness(s: &LinearSequence, cfg: &Config) -> ExactnessReport {
    let mut rows = Vec::new();
    for i in 0..s.maps.len().saturating_sub(1) {
        let prev = &s.maps[i];
        let next = &s.maps[i + 1];
        let image = prev.rank(cfg.rank_tol);
        let kernel = next.cols - next.rank(cfg.rank_tol);
        rows.push(ExactnessRow {
            junction: i + 1,
            kernel_dim: kernel,
            image_dim: image,
            defect: kernel as i64 - image as i64,
        });
    }
    ExactnessReport { rows }
}

/// Residual of the exponential periodicity `exp(M + 2 pi k M/|M|) =
/// exp(M)` for nonzero imaginary M.
pub fn exp_kernel_check(m: &ImaginaryCd, k: i64, cfg: &Config) -> Result<f64> {
    let n = m.norm();
    if n == 0.0 {
        return Err(Error::contract("kernel check needs a nonzero direction"));
    }
    let shift = m
        .as_cd()
        .scale(2.0 * std::f64::consts::PI * k as f64 / n)
        .add(m.as_cd())?;
    Ok(cd_exp(&shift, cfg).dist(&cd_exp(m.as_cd(), cfg)))
}

/// A complex description: named points, a degree cap, and a
/// coefficient level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexSpec {
    pub points: Vec<String>,
    pub degree_cap: usize,
    pub level: usize,
}

/// File format: `points: [a, b, c]`, `degree_cap: n`, optional
/// `level: r` (default 0).
pub fn parse_complex(text: &str) -> Result<ComplexSpec> {
    let mut points: Option<Vec<String>> = None;
    let mut degree_cap: Option<usize> = None;
    let mut level = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let lno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("points:") {
            let rest = rest.trim();
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| Error::parse(format!("line {lno}: points need [..]")))?;
            let names: Vec<String> = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|t| t.trim().to_string()).collect()
            };
            if names.iter().any(|n| n.is_empty()) {
                return Err(Error::parse(format!("line {lno}: empty point name")));
            }
            let mut seen = names.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != names.len() {
                return Err(Error::parse(format!("line {lno}: duplicate point name")));
            }
            points = Some(names);
        } else if let Some(rest) = line.strip_prefix("degree_cap:") {
            degree_cap = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("line {lno}: bad degree_cap")))?,
            );
        } else if let Some(rest) = line.strip_prefix("level:") {
            level = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("line {lno}: bad level")))?;
        } else {
            return Err(Error::parse(format!("line {lno}: unknown directive")));
        }
    }
    let points = points.ok_or_else(|| Error::parse("missing points"))?;
    let degree_cap = degree_cap.ok_or_else(|| Error::parse("missing degree_cap"))?;
    if points.len() > MAX_POINTS {
        return Err(Error::parse(format!("more than {MAX_POINTS} points")));
    }
    if degree_cap > MAX_DEGREE {
        return Err(Error::parse(format!("degree_cap above {MAX_DEGREE}")));
    }
    if level > 3 {
        return Err(Error::parse("level above 3"));
    }
    Ok(ComplexSpec {
        points,
        degree_cap,
        level,
    })
}
