//! Cayley-Dickson arithmetic for the four algebras R, C, H, O.
//!
//! The generator basis is fixed once and for all by iterated doubling:
//! the level r+1 algebra is `A_r + A_r*l` with `l = i_{2^r}` and
//! `i_{2^r+s} = i_s * l`. The product is the doubling formula
//! `(a+bl)(c+vl) = (ac - v*b) + (va + bc*)l`, applied recursively, so a
//! single formula determines every structure constant.

use rand::Rng;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact;

pub const MAX_LEVEL: usize = 3;

/// An element of the Cayley-Dickson algebra `A_r`, `r = 0..3`, stored as
/// `2^r` real coefficients over the fixed generator basis; `coeffs[s]`
/// multiplies the generator `i_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CdNumber {
    level: usize,
    coeffs: Vec<f64>,
}

impl CdNumber {
    pub fn new(level: usize, coeffs: Vec<f64>) -> Result<CdNumber> {
        if level > MAX_LEVEL {
            return Err(Error::contract(format!(
                "level {level} out of range 0..={MAX_LEVEL}"
            )));
        }
        if coeffs.len() != 1 << level {
            return Err(Error::contract(format!(
                "level {level} needs {} coefficients, got {}",
                1 << level,
                coeffs.len()
            )));
        }
        Ok(CdNumber { level, coeffs })
    }

    pub fn zero(level: usize) -> CdNumber {
        CdNumber {
            level,
            coeffs: vec![0.0; 1 << level],
        }
    }

    pub fn one(level: usize) -> CdNumber {
        CdNumber::real(level, 1.0)
    }

    pub fn real(level: usize, a: f64) -> CdNumber {
        let mut c = vec![0.0; 1 << level];
        c[0] = a;
        CdNumber { level, coeffs: c }
    }

    /// The basis generator `i_s` at the given level.
    pub fn generator(level: usize, s: usize) -> CdNumber {
        assert!(s < (1 << level), "generator index out of range");
        let mut c = vec![0.0; 1 << level];
        c[s] = 1.0;
        CdNumber { level, coeffs: c }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, s: usize) -> f64 {
        self.coeffs[s]
    }

    pub fn re(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Norm of the imaginary part.
    pub fn im_norm(&self) -> f64 {
        self.coeffs[1..].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn neg(&self) -> CdNumber {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> CdNumber {
        CdNumber {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &CdNumber) -> Result<CdNumber> {
        self.check_level(other)?;
        Ok(CdNumber {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CdNumber) -> Result<CdNumber> {
        self.check_level(other)?;
        Ok(CdNumber {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_level(&self, other: &CdNumber) -> Result<()> {
        if self.level != other.level {
            return Err(Error::contract(format!(
                "level mismatch: {} vs {}",
                self.level, other.level
            )));
        }
        Ok(())
    }

    /// Maximum absolute coefficient difference; levels must match.
    pub fn dist(&self, other: &CdNumber) -> f64 {
        assert_eq!(self.level, other.level);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CdNumber, eps: f64) -> bool {
        self.level == other.level && self.dist(other) <= eps
    }

    /// Uniform coefficients in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(level: usize, rng: &mut R) -> CdNumber {
        CdNumber {
            level,
            coeffs: (0..1usize << level).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    /// A random unit-norm element.
    pub fn random_unit<R: Rng + ?Sized>(level: usize, rng: &mut R) -> CdNumber {
        loop {
            let x = CdNumber::random(level, rng);
            let n = x.norm();
            if n > 1e-3 {
                return x.scale(1.0 / n);
            }
        }
    }
}

fn conj_slice(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for c in out.iter_mut().skip(1) {
        *c = -*c;
    }
    out
}

fn mul_slices(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, v) = y.split_at(h);
    // (a+bl)(c+vl) = (ac - v*b) + (va + bc*)l
    let ac = mul_slices(a, c);
    let vcb = mul_slices(&conj_slice(v), b);
    let va = mul_slices(v, a);
    let bcc = mul_slices(b, &conj_slice(c));
    let mut out = Vec::with_capacity(n);
    for i in 0..h {
        out.push(ac[i] - vcb[i]);
    }
    for i in 0..h {
        out.push(va[i] + bcc[i]);
    }
    out
}

/// Cayley-Dickson product via recursive doubling.
pub fn cd_mul(x: &CdNumber, y: &CdNumber) -> Result<CdNumber> {
    x.check_level(y)?;
    Ok(CdNumber {
        level: x.level,
        coeffs: mul_slices(&x.coeffs, &y.coeffs),
    })
}

/// Conjugation: negates every imaginary coefficient.
pub fn cd_conj(x: &CdNumber) -> CdNumber {
    CdNumber {
        level: x.level,
        coeffs: conj_slice(&x.coeffs),
    }
}

/// Inverse by `x^{-1} = conj(x) (x conj(x))^{-1}`; `x conj(x)` is the
/// real number `|x|^2`.
pub fn cd_inverse(x: &CdNumber, cfg: &Config) -> Result<CdNumber> {
    let n2 = x.norm_sq();
    if !(n2 > cfg.inverse_eps) {
        return Err(Error::numeric("inverse of zero or near-zero element"));
    }
    Ok(cd_conj(x).scale(1.0 / n2))
}

fn sinc(m: f64, cfg: &Config) -> f64 {
    if m.abs() < cfg.small_angle {
        let m2 = m * m;
        1.0 - m2 / 6.0 + m2 * m2 / 120.0
    } else {
        m.sin() / m
    }
}

/// exp(a + M) = e^a (cos|M| i_0 + sin|M| M/|M|), with the M = 0 limit
/// handled by a series for sin|M|/|M|.
pub fn cd_exp(x: &CdNumber, cfg: &Config) -> CdNumber {
    let a = x.coeffs[0];
    let m = x.im_norm();
    let ea = a.exp();
    let mut out = x.scale(ea * sinc(m, cfg));
    out.coeffs[0] = ea * m.cos();
    out
}

/// Principal branch of the logarithm: `Ln(x) = ln|x| i_0 + theta u`
/// with `x = |x|(cos theta + u sin theta)`, `theta` in `[0, pi]`.
///
/// On the negative real axis the imaginary direction is ambiguous; the
/// configured branch generator is used (an error at level 0, where no
/// imaginary generator exists).
pub fn cd_ln(x: &CdNumber, cfg: &Config) -> Result<CdNumber> {
    let n = x.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::numeric("Ln of zero or non-finite element"));
    }
    let a = x.coeffs[0];
    let m = x.im_norm();
    if m == 0.0 {
        if a > 0.0 {
            return Ok(CdNumber::real(x.level, a.ln()));
        }
        // Negative real axis: pick the configured branch direction.
        if x.level == 0 {
            return Err(Error::branch("Ln of a negative real at level 0"));
        }
        if cfg.ln_branch_gen == 0 || cfg.ln_branch_gen >= (1 << x.level) {
            return Err(Error::contract(format!(
                "ln_branch_gen {} invalid at level {}",
                cfg.ln_branch_gen, x.level
            )));
        }
        let mut out = CdNumber::generator(x.level, cfg.ln_branch_gen)
            .scale(std::f64::consts::PI);
        out.coeffs[0] = (-a).ln();
        return Ok(out);
    }
    let theta = m.atan2(a);
    let mut out = x.scale(theta / m);
    out.coeffs[0] = n.ln();
    Ok(out)
}

/// A Cayley-Dickson number with zero real part.
#[derive(Clone, Debug, PartialEq)]
pub struct ImaginaryCd(CdNumber);

impl ImaginaryCd {
    pub fn new(x: CdNumber) -> Result<ImaginaryCd> {
        if x.coeffs[0] != 0.0 {
            return Err(Error::contract("real part must be exactly zero"));
        }
        Ok(ImaginaryCd(x))
    }

    /// Zeroes the real part.
    pub fn from_im_part(x: &CdNumber) -> ImaginaryCd {
        let mut c = x.clone();
        c.coeffs[0] = 0.0;
        ImaginaryCd(c)
    }

    pub fn as_cd(&self) -> &CdNumber {
        &self.0
    }

    pub fn into_cd(self) -> CdNumber {
        self.0
    }

    pub fn level(&self) -> usize {
        self.0.level
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// The logarithm defect `K(M, N) = Im Ln(e^M e^N)`, computed through
/// exp, the product and the principal Ln.
pub fn k_defect(m: &ImaginaryCd, n: &ImaginaryCd, cfg: &Config) -> Result<ImaginaryCd> {
    let z = cd_mul(&cd_exp(m.as_cd(), cfg), &cd_exp(n.as_cd(), cfg))?;
    let w = cd_ln(&z, cfg)?;
    Ok(ImaginaryCd::from_im_part(&w))
}

/// `P(M, N) = K(M, N) - M - N`, the deviation from additivity.
pub fn p_defect(m: &ImaginaryCd, n: &ImaginaryCd, cfg: &Config) -> Result<ImaginaryCd> {
    let k = k_defect(m, n, cfg)?;
    let d = k.as_cd().sub(m.as_cd())?.sub(n.as_cd())?;
    ImaginaryCd::new(d)
}

/// Splits `z` into real and imaginary parts by the generator-sum
/// formulas `Re(z) = (z + (2^r-2)^{-1}{-z + sum_s i_s (z i_s^*)})/2`
/// and `Im(z) = z - Re(z)`, evaluated exactly over rationals so the
/// result agrees with direct coefficient reads bit for bit. Levels 0
/// and 1 fall back to coefficient reads (the formula divides by
/// `2^r - 2`).
pub fn re_im_split(z: &CdNumber) -> (f64, ImaginaryCd) {
    if z.level < 2 {
        return (z.coeffs[0], ImaginaryCd::from_im_part(z));
    }
    let re = exact::real_part_by_formula(z);
    let mut im = z.clone();
    im.coeffs[0] = z.coeffs[0] - re;
    (re, ImaginaryCd(im))
}

/// The level-raising doubling map: `smash(a, b) = a + b l` with
/// `l = i_{2^r}` at level `r + 1`. Sedenions are out of range, so level
/// 3 inputs are rejected.
pub fn smash(a: &CdNumber, b: &CdNumber) -> Result<CdNumber> {
    a.check_level(b)?;
    if a.level >= MAX_LEVEL {
        return Err(Error::contract(
            "smash of level 3 elements would leave the supported algebras",
        ));
    }
    let mut coeffs = a.coeffs.clone();
    coeffs.extend_from_slice(&b.coeffs);
    Ok(CdNumber {
        level: a.level + 1,
        coeffs,
    })
}

/// Canonical text form `level:r; c0,c1,...`; floats print in shortest
/// round-trip form so parse(print(x)) is bit-exact.
impl std::fmt::Display for CdNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "level:{}; ", self.level)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses the `level:r; c0,c1,...` literal. Non-finite coefficients are
/// rejected; the coefficient count must match the level exactly.
pub fn parse_cd(text: &str) -> Result<CdNumber> {
    let s = text.trim();
    let (head, tail) = s
        .split_once(';')
        .ok_or_else(|| Error::parse("expected `level:r; c0,c1,...`"))?;
    let head = head.trim();
    let level: usize = head
        .strip_prefix("level:")
        .ok_or_else(|| Error::parse("literal must start with `level:`"))?
        .trim()
        .parse()
        .map_err(|_| Error::parse("bad level"))?;
    if level > MAX_LEVEL {
        return Err(Error::parse(format!("level {level} out of range")));
    }
    let coeffs: Vec<f64> = tail
        .split(',')
        .map(|p| {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad coefficient `{}`", p.trim())))?;
            if !v.is_finite() {
                return Err(Error::parse("non-finite coefficient"));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    if coeffs.len() != 1 << level {
        return Err(Error::parse(format!(
            "level {level} needs {} coefficients, got {}",
            1 << level,
            coeffs.len()
        )));
    }
    CdNumber::new(level, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> Config {
        Config::default()
    }

    /// Brute-force structure constant table built from the doubling
    /// recursion one level at a time, independent of `mul_slices`.
    fn table(level: usize) -> Vec<Vec<(usize, f64)>> {
        // table[a][b] = (index, sign) with i_a i_b = sign * i_index
        if level == 0 {
            return vec![vec![(0, 1.0)]];
        }
        let prev = table(level - 1);
        let h = 1 << (level - 1);
        let n = 1 << level;
        let mut t = vec![vec![(0usize, 0.0); n]; n];
        for a in 0..n {
            for b in 0..n {
                // write i_a = p + q l, i_b = u + v l with one of each pair zero
                // and apply (p+ql)(u+vl) = (pu - v*q) + (vp + qu*)l.
                let (lo_a, hi_a) = (a < h, a >= h);
                let (lo_b, hi_b) = (b < h, b >= h);
                let (idx, sgn): (usize, f64) = match (lo_a, hi_a, lo_b, hi_b) {
                    (true, _, true, _) => prev[a][b],
                    (true, _, _, true) => {
                        // p * vl -> (v p) l
                        let (i, s) = prev[b - h][a];
                        (i + h, s)
                    }
                    (_, true, true, _) => {
                        // ql * u -> (q u*) l ; u* = conj(i_{b}) = sign flip unless b==0
                        let cs = if b == 0 { 1.0 } else { -1.0 };
                        let (i, s) = prev[a - h][b];
                        (i + h, s * cs)
                    }
                    _ => {
                        // ql * vl -> -(v* q)
                        let cs = if b - h == 0 { 1.0 } else { -1.0 };
                        let (i, s) = prev[b - h][a - h];
                        (i, -s * cs)
                    }
                };
                t[a][b] = (idx, sgn);
            }
        }
        t
    }

    #[test]
    fn identity_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for level in 0..=3 {
            let x = CdNumber::random(level, &mut rng);
            let e = CdNumber::one(level);
            assert_eq!(cd_mul(&e, &x).unwrap(), x);
            assert_eq!(cd_mul(&x, &e).unwrap(), x);
        }
    }

    #[test]
    fn i1_squares_to_minus_one() {
        let i1 = CdNumber::generator(1, 1);
        let p = cd_mul(&i1, &i1).unwrap();
        assert_eq!(p, CdNumber::real(1, -1.0));
    }

    #[test]
    fn level2_generator_products() {
        // Hand expansion of the doubling formula: i1 i2 = i3, i2 i1 = -i3.
        let i1 = CdNumber::generator(2, 1);
        let i2 = CdNumber::generator(2, 2);
        assert_eq!(cd_mul(&i1, &i2).unwrap(), CdNumber::generator(2, 3));
        assert_eq!(cd_mul(&i2, &i1).unwrap(), CdNumber::generator(2, 3).neg());
    }

    #[test]
    fn products_match_recursive_structure_table() {
        for level in 0..=3 {
            let t = table(level);
            let n = 1 << level;
            for a in 0..n {
                for b in 0..n {
                    let p = cd_mul(
                        &CdNumber::generator(level, a),
                        &CdNumber::generator(level, b),
                    )
                    .unwrap();
                    let (idx, sgn) = t[a][b];
                    assert_eq!(
                        p,
                        CdNumber::generator(level, idx).scale(sgn),
                        "level {level}: i_{a} i_{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn level_mismatch_is_contract_violation() {
        let x = CdNumber::one(1);
        let y = CdNumber::one(2);
        assert!(matches!(cd_mul(&x, &y), Err(Error::Contract(_))));
    }

    #[test]
    fn conj_basics() {
        assert_eq!(cd_conj(&CdNumber::one(2)), CdNumber::one(2));
        let i1 = CdNumber::generator(3, 1);
        assert_eq!(cd_conj(&i1), i1.neg());
    }

    #[test]
    fn conj_antihomomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = CdNumber::random(3, &mut rng);
            let y = CdNumber::random(3, &mut rng);
            let lhs = cd_conj(&cd_mul(&x, &y).unwrap());
            let rhs = cd_mul(&cd_conj(&y), &cd_conj(&x)).unwrap();
            assert!(lhs.dist(&rhs) <= 1e-12);
        }
    }

    #[test]
    fn inverse_examples() {
        let c = cfg();
        let two = CdNumber::real(2, 2.0);
        assert_eq!(cd_inverse(&two, &c).unwrap(), CdNumber::real(2, 0.5));
        // Eq (7) by hand: i1 conj(i1) = 1, so i1^{-1} = conj(i1) = -i1.
        let i1 = CdNumber::generator(2, 1);
        assert_eq!(cd_inverse(&i1, &c).unwrap(), i1.neg());
        assert!(cd_inverse(&CdNumber::zero(3), &c).is_err());
    }

    #[test]
    fn inverse_of_random_octonions() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = CdNumber::random(3, &mut rng);
            if x.norm() < 1e-2 {
                continue;
            }
            let inv = cd_inverse(&x, &c).unwrap();
            let p = cd_mul(&inv, &x).unwrap();
            assert!(p.dist(&CdNumber::one(3)) < 1e-12);
            let q = cd_mul(&x, &inv).unwrap();
            assert!(q.dist(&CdNumber::one(3)) < 1e-12);
        }
    }

    #[test]
    fn exp_basics() {
        let c = cfg();
        assert_eq!(cd_exp(&CdNumber::zero(3), &c), CdNumber::one(3));
        let t = CdNumber::real(2, 0.7);
        assert!(cd_exp(&t, &c).dist(&CdNumber::real(2, 0.7f64.exp())) < 1e-15);
    }

    #[test]
    fn exp_of_pi_times_unit_imaginary_is_minus_one() {
        // Oracle: the complex subfield R + uR and Euler's formula.
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let mut u = CdNumber::random_unit(3, &mut rng);
            u.coeffs[0] = 0.0;
            let n = u.norm();
            if n < 1e-3 {
                continue;
            }
            let u = u.scale(1.0 / n);
            let e = cd_exp(&u.scale(std::f64::consts::PI), &c);
            assert!(e.dist(&CdNumber::one(3).neg()) < 1e-14);
        }
    }

    #[test]
    fn ln_basics() {
        let c = cfg();
        assert_eq!(
            cd_ln(&CdNumber::one(3), &c).unwrap(),
            CdNumber::zero(3)
        );
        let e = CdNumber::real(2, std::f64::consts::E);
        assert!(cd_ln(&e, &c).unwrap().dist(&CdNumber::one(2)) < 1e-15);
        // Complex-subfield oracle: Ln(i1) = (pi/2) i1.
        let i1 = CdNumber::generator(2, 1);
        let l = cd_ln(&i1, &c).unwrap();
        assert!(l.dist(&i1.scale(std::f64::consts::FRAC_PI_2)) < 1e-15);
        assert!(cd_ln(&CdNumber::zero(2), &c).is_err());
    }

    #[test]
    fn ln_negative_real_uses_branch_generator() {
        let c = cfg();
        let l = cd_ln(&CdNumber::real(2, -1.0), &c).unwrap();
        let expect = CdNumber::generator(2, 1).scale(std::f64::consts::PI);
        assert!(l.dist(&expect) < 1e-15);
        assert!(matches!(
            cd_ln(&CdNumber::real(0, -1.0), &c),
            Err(Error::Branch(_))
        ));
    }

    #[test]
    fn exp_ln_roundtrip() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let mut x = CdNumber::random(3, &mut rng).scale(2.0);
            if x.im_norm() >= 3.0 {
                continue;
            }
            let y = cd_ln(&cd_exp(&x, &c), &c).unwrap();
            if x.im_norm() < std::f64::consts::PI {
                assert!(y.dist(&x) < 1e-9, "x = {x}");
            }
            let _ = y;
            x.coeffs[0] = 0.0;
        }
    }

    #[test]
    fn k_defect_zero_arguments() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let m = ImaginaryCd::from_im_part(&CdNumber::random(3, &mut rng));
            let z = ImaginaryCd::new(CdNumber::zero(3)).unwrap();
            let k1 = k_defect(&m, &z, &c).unwrap();
            let k2 = k_defect(&z, &m, &c).unwrap();
            assert!(k1.as_cd().dist(m.as_cd()) < 1e-12);
            assert!(k2.as_cd().dist(m.as_cd()) < 1e-12);
        }
    }

    #[test]
    fn k_defect_commuting_case() {
        // Shared-direction arguments live in one complex subfield, where
        // Ln(e^a e^b) = a + b as long as |a + b| < pi.
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut u = CdNumber::random(3, &mut rng);
            u.coeffs[0] = 0.0;
            let n = u.norm();
            if n < 1e-3 {
                continue;
            }
            let u = u.scale(1.0 / n);
            let a: f64 = rand::Rng::gen_range(&mut rng, -1.4..1.4);
            let b: f64 = rand::Rng::gen_range(&mut rng, -1.4..1.4);
            if (a + b).abs() > 3.0 {
                continue;
            }
            let m = ImaginaryCd::new(u.scale(a)).unwrap();
            let nn = ImaginaryCd::new(u.scale(b)).unwrap();
            let k = k_defect(&m, &nn, &c).unwrap();
            assert!(k.as_cd().dist(&u.scale(a + b)) < 1e-10);
        }
    }

    #[test]
    fn re_im_split_matches_coefficient_reads() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for level in 2..=3 {
            for _ in 0..200 {
                let z = CdNumber::random(level, &mut rng).scale(10.0);
                let (re, im) = re_im_split(&z);
                assert_eq!(re, z.coeff(0), "level {level}");
                assert_eq!(im.as_cd().coeff(0), 0.0);
                for s in 1..(1usize << level) {
                    assert_eq!(im.as_cd().coeff(s), z.coeff(s));
                }
            }
        }
        // Pure real and pure imaginary corner cases.
        let (re, im) = re_im_split(&CdNumber::real(3, 4.0));
        assert_eq!(re, 4.0);
        assert!(im.as_cd().is_zero());
        let z = CdNumber::generator(3, 5).scale(2.5);
        let (re, im) = re_im_split(&z);
        assert_eq!(re, 0.0);
        assert_eq!(im.as_cd(), &z);
    }

    #[test]
    fn smash_examples() {
        let one = CdNumber::one(1);
        let zero = CdNumber::zero(1);
        assert_eq!(smash(&one, &zero).unwrap(), CdNumber::one(2));
        assert_eq!(smash(&zero, &one).unwrap(), CdNumber::generator(2, 2));
        let i1 = CdNumber::generator(1, 1);
        let s = smash(&i1, &i1).unwrap();
        let expect = CdNumber::generator(2, 1)
            .add(&CdNumber::generator(2, 3))
            .unwrap();
        assert_eq!(s, expect);
        assert!(smash(&CdNumber::one(3), &CdNumber::one(3)).is_err());
    }

    #[test]
    fn smash_agrees_with_doubling_product() {
        // cd_mul at level r+1 on smashed pairs is literally the doubling
        // formula.
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for level in 0..=2 {
            for _ in 0..100 {
                let a = CdNumber::random(level, &mut rng);
                let b = CdNumber::random(level, &mut rng);
                let u = CdNumber::random(level, &mut rng);
                let v = CdNumber::random(level, &mut rng);
                let lhs = cd_mul(&smash(&a, &b).unwrap(), &smash(&u, &v).unwrap()).unwrap();
                let lo = cd_mul(&a, &u)
                    .unwrap()
                    .sub(&cd_mul(&cd_conj(&v), &b).unwrap())
                    .unwrap();
                let hi = cd_mul(&v, &a)
                    .unwrap()
                    .add(&cd_mul(&b, &cd_conj(&u)).unwrap())
                    .unwrap();
                assert!(lhs.dist(&smash(&lo, &hi).unwrap()) == 0.0);
                let _ = &c;
            }
        }
    }

    proptest! {
        #[test]
        fn literal_round_trip(level in 0usize..=3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = CdNumber::random(level, &mut rng).scale(1e3);
            let back = parse_cd(&x.to_string()).unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn norm_is_multiplicative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for level in 0usize..=3 {
                let x = CdNumber::random(level, &mut rng);
                let y = CdNumber::random(level, &mut rng);
                let p = cd_mul(&x, &y).unwrap();
                prop_assert!((p.norm() - x.norm() * y.norm()).abs() < 1e-12);
            }
        }

        #[test]
        fn conj_is_involutive(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = CdNumber::random(3, &mut rng);
            prop_assert_eq!(cd_conj(&cd_conj(&x)), x);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_cd("").is_err());
        assert!(parse_cd("level:4; 0").is_err());
        assert!(parse_cd("level:1; 1").is_err());
        assert!(parse_cd("level:1; 1,2,3").is_err());
        assert!(parse_cd("level:1; 1,inf").is_err());
        assert!(parse_cd("level:1; 1,nan").is_err());
        assert!(parse_cd("1,2").is_err());
    }
}
