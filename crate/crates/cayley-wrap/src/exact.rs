//! Exact rational Cayley-Dickson arithmetic.
//!
//! Floating point inputs are dyadic rationals, so the generator-sum
//! identities that recover components of an element can be evaluated
//! without rounding: every intermediate is a `BigRational`, and the
//! final values are mathematically equal to single stored coefficients,
//! hence dyadic and convertible back to `f64` exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::algebra::CdNumber;

/// A Cayley-Dickson element with exact rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCd {
    pub level: usize,
    pub coeffs: Vec<BigRational>,
}

impl ExactCd {
    pub fn from_cd(x: &CdNumber) -> ExactCd {
        ExactCd {
            level: x.level(),
            coeffs: x
                .coeffs()
                .iter()
                .map(|c| BigRational::from_f64(*c).expect("finite coefficient"))
                .collect(),
        }
    }

    pub fn zero(level: usize) -> ExactCd {
        ExactCd {
            level,
            coeffs: vec![BigRational::zero(); 1 << level],
        }
    }

    pub fn generator(level: usize, s: usize) -> ExactCd {
        let mut out = ExactCd::zero(level);
        out.coeffs[s] = BigRational::from_integer(BigInt::from(1));
        out
    }

    pub fn conj(&self) -> ExactCd {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut().skip(1) {
            *c = -c.clone();
        }
        out
    }

    pub fn neg(&self) -> ExactCd {
        ExactCd {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &ExactCd) -> ExactCd {
        assert_eq!(self.level, other.level);
        ExactCd {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ExactCd) -> ExactCd {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &BigRational) -> ExactCd {
        ExactCd {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &ExactCd) -> ExactCd {
        assert_eq!(self.level, other.level);
        ExactCd {
            level: self.level,
            coeffs: mul_slices(&self.coeffs, &other.coeffs),
        }
    }

    /// Converts back to floats; each coefficient must be exactly
    /// representable (dyadic and within range) or this panics, which
    /// would indicate the identity being evaluated is wrong.
    pub fn to_cd_exact(&self) -> CdNumber {
        let coeffs: Vec<f64> = self.coeffs.iter().map(rat_to_f64_exact).collect();
        CdNumber::new(self.level, coeffs).expect("coefficient count fixed by level")
    }
}

fn rat_to_f64_exact(r: &BigRational) -> f64 {
    let f = r.to_f64().expect("rational in f64 range");
    let back = BigRational::from_f64(f).expect("finite");
    assert!(
        &back == r,
        "rational {} is not exactly representable as f64",
        r
    );
    f
}

fn conj_slice(x: &[BigRational]) -> Vec<BigRational> {
    let mut out = x.to_vec();
    for c in out.iter_mut().skip(1) {
        *c = -c.clone();
    }
    out
}

fn mul_slices(x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
    let n = x.len();
    if n == 1 {
        return vec![&x[0] * &y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, v) = y.split_at(h);
    let ac = mul_slices(a, c);
    let vcb = mul_slices(&conj_slice(v), b);
    let va = mul_slices(v, a);
    let bcc = mul_slices(b, &conj_slice(c));
    let mut out = Vec::with_capacity(n);
    for i in 0..h {
        out.push(&ac[i] - &vcb[i]);
    }
    for i in 0..h {
        out.push(&va[i] + &bcc[i]);
    }
    out
}

/// The inner generator sum `(2^r - 2)^{-1} { -z + sum_{s=1}^{2^r - 1}
/// i_s (z i_s^*) }`, the common building block of the component
/// formulas; equals `conj(z)` identically.
pub fn generator_sum(z: &ExactCd) -> ExactCd {
    let n = 1usize << z.level;
    assert!(n > 2, "generator sum needs level >= 2");
    let mut acc = z.neg();
    for s in 1..n {
        let is = ExactCd::generator(z.level, s);
        acc = acc.add(&is.mul(&z.mul(&is.conj())));
    }
    let inv = BigRational::new(BigInt::from(1), BigInt::from(n as i64 - 2));
    acc.scale(&inv)
}

/// Real part by the identity `Re(z) = (z + generator_sum(z)) / 2`,
/// evaluated exactly.
pub fn real_part_by_formula(z: &CdNumber) -> f64 {
    let ze = ExactCd::from_cd(z);
    let gs = generator_sum(&ze);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let re = ze.add(&gs).scale(&half);
    for (s, c) in re.coeffs.iter().enumerate().skip(1) {
        assert!(c.is_zero(), "imaginary residue at i_{s} in real-part formula");
    }
    rat_to_f64_exact(&re.coeffs[0])
}

/// Coefficient of `i_j` (j >= 1) by the identity
/// `g_j = (i_j generator_sum(g) - g i_j) / 2`, evaluated exactly.
pub fn component_by_formula(g: &CdNumber, j: usize) -> f64 {
    assert!(j >= 1 && j < (1 << g.level()));
    let ge = ExactCd::from_cd(g);
    let gs = generator_sum(&ge);
    let ij = ExactCd::generator(g.level(), j);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let num = ij.mul(&gs).sub(&ge.mul(&ij)).scale(&half);
    // The result is a real multiple of i_0.
    for (s, c) in num.coeffs.iter().enumerate().skip(1) {
        assert!(
            c.is_zero(),
            "residue at i_{s} in component formula for j = {j}"
        );
    }
    let v = &num.coeffs[0];
    assert!(v.is_positive() || v.is_negative() || v.is_zero());
    rat_to_f64_exact(v)
}
