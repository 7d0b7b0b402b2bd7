//! Twisted-group structure on the graded components of `A_r*`, the
//! truncated additive group on unit imaginary directions, and the
//! graded-component decomposition.

use crate::algebra::{cd_conj, cd_inverse, cd_mul, parse_cd, CdNumber};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exact;

/// An element of one graded block: `value * i_gen` with a nonzero real
/// value. Pure states are closed under multiplication up to sign, which
/// is what makes bar words over them tractable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState {
    level: usize,
    gen: usize,
    value: f64,
}

impl PureState {
    pub fn new(level: usize, gen: usize, value: f64) -> Result<PureState> {
        if gen >= (1 << level) {
            return Err(Error::contract(format!(
                "generator {gen} out of range at level {level}"
            )));
        }
        if value == 0.0 || !value.is_finite() {
            return Err(Error::contract("pure-state value must be nonzero and finite"));
        }
        Ok(PureState { level, gen, value })
    }

    pub fn identity(level: usize) -> PureState {
        PureState {
            level,
            gen: 0,
            value: 1.0,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn gen_index(&self) -> usize {
        self.gen
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_identity(&self) -> bool {
        self.gen == 0 && self.value == 1.0
    }

    pub fn embed(&self) -> CdNumber {
        CdNumber::generator(self.level, self.gen).scale(self.value)
    }

    /// Extracts a pure state from an element supported on exactly one
    /// generator.
    pub fn from_cd(x: &CdNumber) -> Result<PureState> {
        let mut found = None;
        for (s, c) in x.coeffs().iter().enumerate() {
            if *c != 0.0 {
                if found.is_some() {
                    return Err(Error::contract("element is not a pure state"));
                }
                found = Some((s, *c));
            }
        }
        match found {
            Some((gen, value)) => PureState::new(x.level(), gen, value),
            None => Err(Error::contract("zero element is not a pure state")),
        }
    }

    /// The product lands in a single block with generator determined by
    /// `i_gen i_gen'`; exact because structure constants are `+-1`.
    pub fn mul(&self, other: &PureState) -> Result<PureState> {
        let p = cd_mul(&self.embed(), &other.embed())?;
        PureState::from_cd(&p)
    }

    pub fn inverse(&self) -> PureState {
        // (y i_j)^{-1} = conj(y i_j) / y^2.
        let s = if self.gen == 0 { 1.0 } else { -1.0 };
        PureState {
            level: self.level,
            gen: self.gen,
            value: s / self.value,
        }
    }

    pub fn conj(&self) -> PureState {
        let s = if self.gen == 0 { 1.0 } else { -1.0 };
        PureState {
            level: self.level,
            gen: self.gen,
            value: s * self.value,
        }
    }
}

/// A `C* `-valued component instance: `(a, b)` stands for `a + b i_1`
/// inside the complex subfield, so pure states can carry complex values
/// where the grading is over the quaternion/octonion block structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexValue(pub f64, pub f64);

impl ComplexValue {
    pub fn one() -> ComplexValue {
        ComplexValue(1.0, 0.0)
    }

    pub fn mul(&self, o: &ComplexValue) -> ComplexValue {
        ComplexValue(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }

    pub fn conj(&self) -> ComplexValue {
        ComplexValue(self.0, -self.1)
    }

    pub fn inverse(&self) -> Result<ComplexValue> {
        let n = self.0 * self.0 + self.1 * self.1;
        if n == 0.0 {
            return Err(Error::numeric("inverse of zero complex value"));
        }
        Ok(ComplexValue(self.0 / n, -self.1 / n))
    }
}

/// Graded-component decomposition by the generator-sum formulas,
/// evaluated exactly over rationals; the blocks are returned as real
/// elements `g_j i_0` with `g = sum_j g_j i_j`.
pub fn component_decompose(g: &CdNumber) -> Result<Vec<CdNumber>> {
    if g.level() < 2 {
        return Err(Error::contract("component decomposition needs level >= 2"));
    }
    let n = 1usize << g.level();
    let mut out = Vec::with_capacity(n);
    out.push(CdNumber::real(g.level(), exact::real_part_by_formula(g)));
    for j in 1..n {
        out.push(CdNumber::real(g.level(), exact::component_by_formula(g, j)));
    }
    Ok(out)
}

/// Reassembles `sum_j g_j i_j` from real blocks.
pub fn component_assemble(blocks: &[CdNumber]) -> Result<CdNumber> {
    if blocks.is_empty() {
        return Err(Error::contract("no blocks"));
    }
    let level = blocks[0].level();
    if blocks.len() != 1 << level {
        return Err(Error::contract("block count must be 2^level"));
    }
    let coeffs = blocks.iter().map(|b| b.coeff(0)).collect();
    CdNumber::new(level, coeffs)
}

/// Result of checking one twisted-group axiom over a sample list.
#[derive(Clone, Debug)]
pub struct AxiomResult {
    pub name: &'static str,
    pub pass: bool,
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub struct TwistedReport {
    pub axioms: Vec<AxiomResult>,
}

impl TwistedReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }
}

impl std::fmt::Display for TwistedReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for a in &self.axioms {
            writeln!(
                f,
                "{}: {} (max residual {:e})",
                a.name,
                if a.pass { "PASS" } else { "FAIL" },
                a.max_residual
            )?;
        }
        Ok(())
    }
}

/// Checks the twisted-group axioms on pure-state sample triples using a
/// pluggable product, so corrupted tables can be fed in as negative
/// controls: alternativity `g^{-1}(g f) = f`, grading closure (a block
/// times a block lands in one block), the conjugation anti-homomorphism
/// and `conj(e) = e`.
pub fn verify_twisted_axioms(
    samples: &[(PureState, PureState, PureState)],
    product: &dyn Fn(&CdNumber, &CdNumber) -> CdNumber,
    cfg: &Config,
) -> Result<TwistedReport> {
    if samples.is_empty() {
        return Err(Error::contract("empty sample list"));
    }
    let level = samples[0].0.level();
    let tol = 1e-11;

    let mut r_alt: f64 = 0.0;
    let mut r_grade: f64 = 0.0;
    let mut r_conj: f64 = 0.0;
    for (g, f, _h) in samples {
        let ge = g.embed();
        let fe = f.embed();
        let gi = cd_inverse(&ge, cfg)?;
        // g^{-1}(g f) = f and (f g) g^{-1} = f.
        let lhs = product(&gi, &product(&ge, &fe));
        let rhs = product(&product(&fe, &ge), &gi);
        let scale = fe.norm().max(1.0);
        r_alt = r_alt.max(lhs.dist(&fe) / scale).max(rhs.dist(&fe) / scale);

        // Grading closure: the product must be supported on one generator.
        let p = product(&ge, &fe);
        let mut mags: Vec<f64> = p.coeffs().iter().map(|c| c.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let off_block: f64 = mags[1..].iter().sum();
        r_grade = r_grade.max(off_block / p.norm().max(1e-30));

        // conj(g f) = conj(f) conj(g).
        let lhs = cd_conj(&product(&ge, &fe));
        let rhs = product(&cd_conj(&fe), &cd_conj(&ge));
        r_conj = r_conj.max(lhs.dist(&rhs) / scale.max(ge.norm()));
    }
    let e = CdNumber::one(level);
    let r_e = cd_conj(&e).dist(&e);

    Ok(TwistedReport {
        axioms: vec![
            AxiomResult {
                name: "alternativity",
                pass: r_alt < tol,
                max_residual: r_alt,
            },
            AxiomResult {
                name: "grading closure",
                pass: r_grade < tol,
                max_residual: r_grade,
            },
            AxiomResult {
                name: "conj anti-homomorphism",
                pass: r_conj < tol,
                max_residual: r_conj,
            },
            AxiomResult {
                name: "conj(e) = e",
                pass: r_e == 0.0,
                max_residual: r_e,
            },
        ],
    })
}

/// An element of the additive group on a fixed finite set of unit
/// imaginary directions, with `u` and `-u` identified: a coefficient on
/// `-u` is stored negated on the canonical representative of `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZCrElement {
    entries: Vec<(CdNumber, i64)>,
}

fn canonical_dir(u: &CdNumber) -> Result<CdNumber> {
    if u.coeff(0) != 0.0 {
        return Err(Error::contract("direction must be purely imaginary"));
    }
    let n = u.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::contract("direction must have unit norm"));
    }
    let first = u
        .coeffs()
        .iter()
        .find(|c| **c != 0.0)
        .copied()
        .unwrap_or(0.0);
    if first == 0.0 {
        return Err(Error::contract("zero direction"));
    }
    Ok(if first < 0.0 { u.neg() } else { u.clone() })
}

fn dir_order(a: &CdNumber, b: &CdNumber) -> std::cmp::Ordering {
    a.level()
        .cmp(&b.level())
        .then_with(|| a.coeffs().partial_cmp(b.coeffs()).unwrap())
}

impl ZCrElement {
    /// Builds an element from `(direction, coefficient)` pairs;
    /// directions are canonicalized (sign, order) and duplicates summed.
    pub fn new(pairs: Vec<(CdNumber, i64)>) -> Result<ZCrElement> {
        let mut entries: Vec<(CdNumber, i64)> = Vec::new();
        for (u, k) in pairs {
            let first = u
                .coeffs()
                .iter()
                .find(|c| **c != 0.0)
                .copied()
                .unwrap_or(0.0);
            let cu = canonical_dir(&u)?;
            let ck = if first < 0.0 { -k } else { k };
            match entries.iter_mut().find(|(d, _)| *d == cu) {
                Some((_, kk)) => *kk += ck,
                None => entries.push((cu, ck)),
            }
        }
        entries.sort_by(|(a, _), (b, _)| dir_order(a, b));
        Ok(ZCrElement { entries })
    }

    pub fn entries(&self) -> &[(CdNumber, i64)] {
        &self.entries
    }

    /// The zero element on the same sample set.
    pub fn zero_like(&self) -> ZCrElement {
        ZCrElement {
            entries: self.entries.iter().map(|(u, _)| (u.clone(), 0)).collect(),
        }
    }

    pub fn neg(&self) -> ZCrElement {
        ZCrElement {
            entries: self.entries.iter().map(|(u, k)| (u.clone(), -k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, k)| *k == 0)
    }
}

/// Pointwise addition over one fixed sample set.
pub fn zcr_add(a: &ZCrElement, b: &ZCrElement) -> Result<ZCrElement> {
    if a.entries.len() != b.entries.len()
        || a.entries
            .iter()
            .zip(&b.entries)
            .any(|((u, _), (v, _))| u != v)
    {
        return Err(Error::contract("mismatched direction sample sets"));
    }
    Ok(ZCrElement {
        entries: a
            .entries
            .iter()
            .zip(&b.entries)
            .map(|((u, k), (_, l))| (u.clone(), k + l))
            .collect(),
    })
}

impl std::fmt::Display for ZCrElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, (u, k)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{k}*{u}")?;
        }
        write!(f, "]")
    }
}

/// Parses `[k1*u1; k2*u2; ...]` with each `u` a CdNumber literal.
pub fn parse_zcr(text: &str) -> Result<ZCrElement> {
    let s = text.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::parse("expected `[k1*u1; k2*u2; ...]`"))?;
    // Each CdNumber literal itself contains one `;`, so entries occupy
    // two `;`-chunks: `k*level:r` then the coefficient list.
    let chunks: Vec<&str> = inner.split(';').map(str::trim).collect();
    if chunks.len() == 1 && chunks[0].is_empty() {
        return Err(Error::parse("empty direction set"));
    }
    if chunks.len() % 2 != 0 {
        return Err(Error::parse("expected `k*u` entries with CdNumber literals"));
    }
    let mut pairs = Vec::new();
    for pair in chunks.chunks(2) {
        let (k, head) = pair[0]
            .split_once('*')
            .ok_or_else(|| Error::parse("expected `k*u` entry"))?;
        let k: i64 = k
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad integer coefficient `{}`", k.trim())))?;
        pairs.push((parse_cd(&format!("{head}; {}", pair[1]))?, k));
    }
    ZCrElement::new(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pure(level: usize, rng: &mut ChaCha8Rng) -> PureState {
        let gen = rng.gen_range(0..1usize << level);
        let mut v: f64 = rng.gen_range(-2.0..2.0);
        if v.abs() < 0.1 {
            v = 0.5;
        }
        PureState::new(level, gen, v).unwrap()
    }

    #[test]
    fn pure_state_products_stay_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for level in 1..=3 {
            for _ in 0..200 {
                let a = random_pure(level, &mut rng);
                let b = random_pure(level, &mut rng);
                let p = a.mul(&b).unwrap();
                assert!(p.embed().dist(&cd_mul(&a.embed(), &b.embed()).unwrap()) == 0.0);
            }
        }
    }

    #[test]
    fn pure_state_inverse_and_conj() {
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let a = random_pure(3, &mut rng);
            let inv = a.inverse();
            assert!(
                inv.embed()
                    .dist(&cd_inverse(&a.embed(), &cfg).unwrap())
                    < 1e-15
            );
            assert_eq!(a.conj().embed(), cd_conj(&a.embed()));
        }
    }

    #[test]
    fn decompose_examples() {
        let g = CdNumber::new(2, vec![2.0, 3.0, 0.0, 0.0]).unwrap();
        let blocks = component_decompose(&g).unwrap();
        let got: Vec<f64> = blocks.iter().map(|b| b.coeff(0)).collect();
        assert_eq!(got, vec![2.0, 3.0, 0.0, 0.0]);

        let g = CdNumber::generator(3, 5);
        let blocks = component_decompose(&g).unwrap();
        for (j, b) in blocks.iter().enumerate() {
            assert_eq!(b.coeff(0), if j == 5 { 1.0 } else { 0.0 });
        }

        let z = CdNumber::zero(2);
        assert!(component_decompose(&z)
            .unwrap()
            .iter()
            .all(|b| b.is_zero()));
    }

    #[test]
    fn decompose_assemble_roundtrip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for level in 2..=3 {
            for _ in 0..200 {
                let g = CdNumber::random(level, &mut rng).scale(7.0);
                let back = component_assemble(&component_decompose(&g).unwrap()).unwrap();
                assert_eq!(back, g);
            }
        }
    }

    #[test]
    fn axioms_pass_on_octonion_samples() {
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let samples: Vec<_> = (0..300)
            .map(|_| {
                (
                    random_pure(3, &mut rng),
                    random_pure(3, &mut rng),
                    random_pure(3, &mut rng),
                )
            })
            .collect();
        let prod = |x: &CdNumber, y: &CdNumber| cd_mul(x, y).unwrap();
        let report = verify_twisted_axioms(&samples, &prod, &cfg).unwrap();
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn identity_only_sample_passes() {
        let cfg = Config::default();
        let e = PureState::identity(2);
        let prod = |x: &CdNumber, y: &CdNumber| cd_mul(x, y).unwrap();
        let report = verify_twisted_axioms(&[(e, e, e)], &prod, &cfg).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn corrupted_product_fails_grading() {
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let samples: Vec<_> = (0..50)
            .map(|_| {
                (
                    random_pure(2, &mut rng),
                    random_pure(2, &mut rng),
                    random_pure(2, &mut rng),
                )
            })
            .collect();
        let bad = |x: &CdNumber, y: &CdNumber| {
            let mut p = cd_mul(x, y).unwrap();
            p = p
                .add(&CdNumber::generator(2, 1).scale(0.25))
                .unwrap()
                .add(&CdNumber::generator(2, 2).scale(0.25))
                .unwrap();
            p
        };
        let report = verify_twisted_axioms(&samples, &bad, &cfg).unwrap();
        let grading = report
            .axioms
            .iter()
            .find(|a| a.name == "grading closure")
            .unwrap();
        assert!(!grading.pass);
    }

    fn unit_dir(level: usize, s: usize) -> CdNumber {
        CdNumber::generator(level, s)
    }

    #[test]
    fn zcr_add_examples() {
        let u = unit_dir(2, 1);
        let a = ZCrElement::new(vec![(u.clone(), 2)]).unwrap();
        let z = a.zero_like();
        assert_eq!(zcr_add(&a, &z).unwrap(), a);
        // 2u + 1(-u) = 1u: the negative direction canonicalizes.
        let b = ZCrElement::new(vec![(u.neg(), 1)]).unwrap();
        let sum = zcr_add(&a, &b).unwrap();
        assert_eq!(sum, ZCrElement::new(vec![(u.clone(), 1)]).unwrap());
        // a + (-a) = 0.
        assert!(zcr_add(&a, &a.neg()).unwrap().is_zero());
    }

    #[test]
    fn zcr_group_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let dirs: Vec<CdNumber> = (1..8).map(|s| unit_dir(3, s)).collect();
        for _ in 0..50 {
            let coeffs = |rng: &mut ChaCha8Rng| {
                dirs.iter()
                    .map(|u| (u.clone(), rng.gen_range(-5i64..=5)))
                    .collect::<Vec<_>>()
            };
            let a = ZCrElement::new(coeffs(&mut rng)).unwrap();
            let b = ZCrElement::new(coeffs(&mut rng)).unwrap();
            let c = ZCrElement::new(coeffs(&mut rng)).unwrap();
            let ab_c = zcr_add(&zcr_add(&a, &b).unwrap(), &c).unwrap();
            let a_bc = zcr_add(&a, &zcr_add(&b, &c).unwrap()).unwrap();
            assert_eq!(ab_c, a_bc);
            assert_eq!(zcr_add(&a, &b).unwrap(), zcr_add(&b, &a).unwrap());
        }
    }

    #[test]
    fn zcr_mismatched_sets_rejected() {
        let a = ZCrElement::new(vec![(unit_dir(2, 1), 1)]).unwrap();
        let b = ZCrElement::new(vec![(unit_dir(2, 2), 1)]).unwrap();
        assert!(matches!(zcr_add(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn zcr_literal_roundtrip() {
        let a = ZCrElement::new(vec![
            (unit_dir(3, 1), 2),
            (unit_dir(3, 5), -3),
        ])
        .unwrap();
        let back = parse_zcr(&a.to_string()).unwrap();
        assert_eq!(back, a);
        assert!(parse_zcr("nope").is_err());
        assert!(parse_zcr("[1*level:2; 1,0,0,0]").is_err());
        assert!(parse_zcr("[x*level:2; 0,1,0,0]").is_err());
    }

    #[test]
    fn complex_value_instance() {
        let a = ComplexValue(1.0, 2.0);
        let b = ComplexValue(0.5, -1.0);
        let p = a.mul(&b);
        assert_eq!(p, ComplexValue(2.5, 0.0));
        let inv = a.inverse().unwrap();
        let e = a.mul(&inv);
        assert!((e.0 - 1.0).abs() < 1e-15 && e.1.abs() < 1e-15);
        assert_eq!(a.conj().mul(&a).1, 0.0);
    }
}
