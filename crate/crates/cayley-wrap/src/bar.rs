//! The non-associative bar construction: normalized time-indexed words
//! over pure states with the twisted shuffle multiplication, additive
//! combination, inverses, conjugation, the head-dropping projection,
//! simplicial face/degeneracy maps, vector-space words with scalar
//! action, formal sums, and depth-iterated words.

use crate::algebra::{cd_mul, CdNumber};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::twisted::PureState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A time-indexed word: times in [0,1] with a pure-state letter each,
/// plus a head letter on the A side. Group operations keep words in
/// normal form (strictly increasing times in (0,1), no identity
/// letters); face and degeneracy maps work on raw words and the
/// simplicial identities are stated on raw words.
#[derive(Clone, Debug, PartialEq)]
pub struct BarWord {
    side: Side,
    level: usize,
    times: Vec<f64>,
    head: Option<PureState>,
    letters: Vec<PureState>,
}

impl BarWord {
    /// Builds a word without normalizing; validates shape only.
    pub fn raw(
        side: Side,
        level: usize,
        times: Vec<f64>,
        head: Option<PureState>,
        letters: Vec<PureState>,
    ) -> Result<BarWord> {
        if times.len() != letters.len() {
            return Err(Error::contract("one time per letter"));
        }
        match (side, &head) {
            (Side::A, None) => return Err(Error::contract("A-side words carry a head")),
            (Side::B, Some(_)) => return Err(Error::contract("B-side words carry no head")),
            _ => {}
        }
        for t in &times {
            if !(*t >= 0.0 && *t <= 1.0) {
                return Err(Error::contract(format!("time {t} outside [0,1]")));
            }
        }
        if let Some(h) = &head {
            if h.level() != level {
                return Err(Error::contract("head level mismatch"));
            }
        }
        for l in &letters {
            if l.level() != level {
                return Err(Error::contract("letter level mismatch"));
            }
        }
        Ok(BarWord {
            side,
            level,
            times,
            head,
            letters,
        })
    }

    pub fn unit_a(level: usize) -> BarWord {
        BarWord {
            side: Side::A,
            level,
            times: vec![],
            head: Some(PureState::identity(level)),
            letters: vec![],
        }
    }

    pub fn unit_b(level: usize) -> BarWord {
        BarWord {
            side: Side::B,
            level,
            times: vec![],
            head: None,
            letters: vec![],
        }
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

    pub fn head(&self) -> Option<&PureState> {
        self.head.as_ref()
    }

    pub fn letters(&self) -> &[PureState] {
        &self.letters
    }

    pub fn is_unit(&self) -> bool {
        self.letters.is_empty()
            && match &self.head {
                Some(h) => h.is_identity(),
                None => true,
            }
    }

    /// Max difference of letter/head values when shapes (times and
    /// generator indices) match exactly; infinity otherwise.
    pub fn dist(&self, other: &BarWord) -> f64 {
        if self.side != other.side
            || self.level != other.level
            || self.times != other.times
            || self.letters.len() != other.letters.len()
        {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        match (&self.head, &other.head) {
            (Some(a), Some(b)) => {
                if a.gen_index() != b.gen_index() {
                    return f64::INFINITY;
                }
                d = d.max((a.value() - b.value()).abs());
            }
            (None, None) => {}
            _ => return f64::INFINITY,
        }
        for (a, b) in self.letters.iter().zip(&other.letters) {
            if a.gen_index() != b.gen_index() {
                return f64::INFINITY;
            }
            d = d.max((a.value() - b.value()).abs());
        }
        d
    }

    /// Rewrites to the unique normal form: times snapped and sorted
    /// (stable), letters at time 0 absorbed into the head (A) or
    /// dropped (B), equal-time letters merged left-to-right, letters at
    /// time 1 and identity letters dropped.
    ///
    /// Central signs are then placed canonically. A sign is a real
    /// scalar and scalars move freely across slots (the ring structure
    /// is multilinear in the slots), so on the A side all letter signs
    /// accumulate into the head; on the B side the head that would
    /// absorb them is quotiented away, so letter values are made
    /// positive outright.
    pub fn normalize(&self, cfg: &Config) -> Result<BarWord> {
        let mut pairs: Vec<(f64, PureState)> = self
            .times
            .iter()
            .map(|t| cfg.snap_time(*t))
            .zip(self.letters.iter().copied())
            .collect();
        for (t, _) in &pairs {
            if !(*t >= 0.0 && *t <= 1.0) {
                return Err(Error::contract(format!("time {t} outside [0,1]")));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut head = self.head;
        loop {
            let mut changed = false;
            let mut next: Vec<(f64, PureState)> = Vec::with_capacity(pairs.len());
            for (t, h) in pairs.drain(..) {
                if h.is_identity() {
                    changed = true;
                    continue;
                }
                if t == 0.0 {
                    match head.as_mut() {
                        Some(h0) => *h0 = h0.mul(&h)?,
                        None => {}
                    }
                    changed = true;
                    continue;
                }
                if t == 1.0 {
                    changed = true;
                    continue;
                }
                match next.last_mut() {
                    Some((tp, hp)) if *tp == t => {
                        *hp = hp.mul(&h)?;
                        changed = true;
                    }
                    _ => next.push((t, h)),
                }
            }
            // canonical sign placement
            for (_, h) in next.iter_mut() {
                if h.value() < 0.0 {
                    *h = PureState::new(h.level(), h.gen_index(), -h.value())?;
                    if let Some(h0) = head.as_mut() {
                        *h0 = PureState::new(h0.level(), h0.gen_index(), -h0.value())?;
                    }
                    changed = true;
                }
            }
            pairs = next;
            if !changed {
                break;
            }
        }
        let (times, letters) = pairs.into_iter().unzip();
        Ok(BarWord {
            side: self.side,
            level: self.level,
            times,
            head,
            letters,
        })
    }
}

/// Left-nested generator product: `((i_{g0} i_{g1}) i_{g2}) ...`; each
/// partial product is a signed generator because structure constants
/// are +-1.
fn nested_product(level: usize, gens: &[usize]) -> CdNumber {
    let mut p = CdNumber::one(level);
    for g in gens {
        p = cd_mul(&p, &CdNumber::generator(level, *g)).expect("one level");
    }
    p
}

/// Sign relating the nested generator product in original order
/// (`left_gens` then `right_gens`) to the product in permuted order;
/// `sigma[k]` indexes into the concatenated list. Both products land on
/// the same generator (the index is an xor invariant), differing at
/// most by sign.
pub fn shuffle_sign(
    level: usize,
    left_gens: &[usize],
    right_gens: &[usize],
    sigma: &[usize],
) -> Result<i32> {
    let original: Vec<usize> = left_gens.iter().chain(right_gens).copied().collect();
    if sigma.len() != original.len() {
        return Err(Error::contract("permutation length mismatch"));
    }
    let permuted: Vec<usize> = sigma.iter().map(|k| original[*k]).collect();
    let p = nested_product(level, &original);
    let q = nested_product(level, &permuted);
    if p == q {
        Ok(1)
    } else if p == q.neg() {
        Ok(-1)
    } else {
        Err(Error::numeric(
            "nested generator products disagree beyond sign",
        ))
    }
}

fn check_compatible(x: &BarWord, y: &BarWord) -> Result<()> {
    if x.side != y.side {
        return Err(Error::contract("side mismatch"));
    }
    if x.level != y.level {
        return Err(Error::contract("level mismatch"));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
enum TieBreak {
    LeftFirst,
    RightFirst,
}

/// Merges the time lists, permutes letters accordingly and returns the
/// interleaved letters plus the shuffle sign.
fn merge_letters(
    x: &BarWord,
    y: &BarWord,
    tie: TieBreak,
) -> Result<(Vec<f64>, Vec<PureState>, i32)> {
    let mut entries: Vec<(f64, usize, PureState, usize)> = Vec::new();
    for (i, (t, h)) in x.times.iter().zip(&x.letters).enumerate() {
        entries.push((*t, 0, *h, i));
    }
    for (i, (t, h)) in y.times.iter().zip(&y.letters).enumerate() {
        entries.push((*t, 1, *h, x.letters.len() + i));
    }
    entries.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap().then_with(|| match tie {
            TieBreak::LeftFirst => a.1.cmp(&b.1),
            TieBreak::RightFirst => b.1.cmp(&a.1),
        })
    });
    let sigma: Vec<usize> = entries.iter().map(|e| e.3).collect();
    let xg: Vec<usize> = x.letters.iter().map(|h| h.gen_index()).collect();
    let yg: Vec<usize> = y.letters.iter().map(|h| h.gen_index()).collect();
    let sign = shuffle_sign(x.level, &xg, &yg, &sigma)?;
    let times = entries.iter().map(|e| e.0).collect();
    let letters = entries.iter().map(|e| e.2).collect();
    Ok((times, letters, sign))
}

fn apply_leading_sign(
    sign: i32,
    head: &mut Option<PureState>,
    letters: &mut [PureState],
) -> Result<()> {
    if sign == 1 {
        return Ok(());
    }
    if let Some(first) = letters.first_mut() {
        *first = PureState::new(first.level(), first.gen_index(), -first.value())?;
    } else if let Some(h) = head.as_mut() {
        *h = PureState::new(h.level(), h.gen_index(), -h.value())?;
    }
    Ok(())
}

fn mul_with_tie(x: &BarWord, y: &BarWord, tie: TieBreak, cfg: &Config) -> Result<BarWord> {
    check_compatible(x, y)?;
    let (times, mut letters, sign) = merge_letters(x, y, tie)?;
    let mut head = match (&x.head, &y.head) {
        (Some(a), Some(b)) => Some(a.mul(b)?),
        _ => None,
    };
    apply_leading_sign(sign, &mut head, &mut letters)?;
    BarWord {
        side: x.side,
        level: x.level,
        times,
        head,
        letters,
    }
    .normalize(cfg)
}

/// Twisted shuffle product: time lists merged by a stable sort (ties
/// left argument first), heads multiplied on the A side, the shuffle
/// sign folded into the leading letter (the head when no letters
/// remain).
pub fn mul(x: &BarWord, y: &BarWord, cfg: &Config) -> Result<BarWord> {
    mul_with_tie(x, y, TieBreak::LeftFirst, cfg)
}

/// Additive combination: the same shuffle as `mul` but heads are added
/// on the A side, which requires both heads to sit in one graded block.
pub fn add(x: &BarWord, y: &BarWord, cfg: &Config) -> Result<BarWord> {
    check_compatible(x, y)?;
    let (times, mut letters, sign) = merge_letters(x, y, TieBreak::LeftFirst)?;
    let mut head = match (&x.head, &y.head) {
        (Some(a), Some(b)) => {
            if a.gen_index() != b.gen_index() {
                return Err(Error::contract(
                    "additive heads must share one generator index",
                ));
            }
            let v = a.value() + b.value();
            if v == 0.0 {
                return Err(Error::numeric("head sum is zero, leaving the group"));
            }
            Some(PureState::new(a.level(), a.gen_index(), v)?)
        }
        _ => None,
    };
    apply_leading_sign(sign, &mut head, &mut letters)?;
    BarWord {
        side: x.side,
        level: x.level,
        times,
        head,
        letters,
    }
    .normalize(cfg)
}

/// Letterwise inverse with a central sign correction: the candidate
/// `h_0^{-1}[h_1^{-1}|...]` can differ from the true inverse by the
/// shuffle sign of the pairing permutation, which is read off from
/// `mul(x, candidate)` and folded back in.
pub fn inverse(x: &BarWord, cfg: &Config) -> Result<BarWord> {
    let x = x.normalize(cfg)?;
    let mut cand = BarWord {
        side: x.side,
        level: x.level,
        times: x.times.clone(),
        head: x.head.as_ref().map(|h| h.inverse()),
        letters: x.letters.iter().map(|h| h.inverse()).collect(),
    };
    let probe = mul(&x, &cand, cfg)?;
    // The residual must be central: everything left over sits in the
    // i_0 block with value near +-1 (letters that cancel exactly are
    // already gone; float rounding can leave near-identity letters).
    let mut residual_sign = 1;
    let mut central = |h: &PureState| -> Result<()> {
        if h.gen_index() != 0 || (h.value().abs() - 1.0).abs() > 1e-9 {
            return Err(Error::numeric("letterwise inverse did not cancel"));
        }
        if h.value() < 0.0 {
            residual_sign = -residual_sign;
        }
        Ok(())
    };
    for l in &probe.letters {
        central(l)?;
    }
    if let Some(h) = &probe.head {
        central(h)?;
    }
    apply_leading_sign(residual_sign, &mut cand.head, &mut cand.letters)?;
    cand.normalize(cfg)
}

/// Conjugates the head and every letter.
pub fn bar_conj(x: &BarWord, cfg: &Config) -> Result<BarWord> {
    BarWord {
        side: x.side,
        level: x.level,
        times: x.times.clone(),
        head: x.head.as_ref().map(|h| h.conj()),
        letters: x.letters.iter().map(|h| h.conj()).collect(),
    }
    .normalize(cfg)
}

/// Drops the head and renormalizes; a surjective homomorphism onto the
/// B side whose kernel is the head action.
pub fn project_a_to_b(x: &BarWord, cfg: &Config) -> Result<BarWord> {
    if x.side != Side::A {
        return Err(Error::contract("projection applies to A-side words"));
    }
    BarWord {
        side: Side::B,
        level: x.level,
        times: x.times.clone(),
        head: None,
        letters: x.letters.clone(),
    }
    .normalize(cfg)
}

/// Face map on raw words: face 0 absorbs the first letter into the head
/// (A) or drops it (B) along with its time; inner face j merges letters
/// j, j+1 and deletes time j; the last face drops the final letter.
/// One-based letter positions.
pub fn face(j: usize, x: &BarWord) -> Result<BarWord> {
    let n = x.letters.len();
    if n == 0 || j > n {
        return Err(Error::contract(format!("face index {j} out of range 0..={n}")));
    }
    let mut times = x.times.clone();
    let mut letters = x.letters.clone();
    let mut head = x.head;
    if j == 0 {
        if let Some(h0) = head.as_mut() {
            *h0 = h0.mul(&letters[0])?;
        }
        times.remove(0);
        letters.remove(0);
    } else if j < n {
        letters[j - 1] = letters[j - 1].mul(&letters[j])?;
        letters.remove(j);
        times.remove(j - 1);
    } else {
        letters.pop();
        times.pop();
    }
    Ok(BarWord {
        side: x.side,
        level: x.level,
        times,
        head,
        letters,
    })
}

/// Degeneracy on raw words: inserts an identity letter after position j
/// with the duplicated time t_j (t_0 taken as 0).
pub fn degeneracy(j: usize, x: &BarWord) -> Result<BarWord> {
    let n = x.letters.len();
    if j > n {
        return Err(Error::contract(format!(
            "degeneracy index {j} out of range 0..={n}"
        )));
    }
    let mut times = x.times.clone();
    let mut letters = x.letters.clone();
    let t = if j == 0 { 0.0 } else { x.times[j - 1] };
    times.insert(j, t);
    letters.insert(j, PureState::identity(x.level));
    Ok(BarWord {
        side: x.side,
        level: x.level,
        times,
        head: x.head,
        letters,
    })
}

impl std::fmt::Display for BarWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.side {
            Side::A => "A",
            Side::B => "B",
        };
        write!(f, "{side} ; {} ; [", self.level)?;
        for (i, t) in self.times.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "] ; ")?;
        if let Some(h) = &self.head {
            write!(f, "({}:{})", h.gen_index(), h.value())?;
        }
        write!(f, " ; ")?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({}:{})", l.gen_index(), l.value())?;
        }
        Ok(())
    }
}

fn parse_letter(level: usize, s: &str) -> Result<PureState> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::parse("expected `(gen:value)`"))?;
    let (g, v) = inner
        .split_once(':')
        .ok_or_else(|| Error::parse("expected `gen:value`"))?;
    let g: usize = g
        .trim()
        .parse()
        .map_err(|_| Error::parse("bad generator index"))?;
    let v: f64 = v.trim().parse().map_err(|_| Error::parse("bad value"))?;
    if !v.is_finite() {
        return Err(Error::parse("non-finite value"));
    }
    if g >= (1 << level) {
        return Err(Error::parse("generator index out of range"));
    }
    PureState::new(level, g, v).map_err(|e| Error::parse(e.to_string()))
}

/// Parses `A|B ; level ; [t1,...,tn] ; head? ; (gen:value),...` and
/// normalizes; the head segment must be empty on the B side.
pub fn parse_word(text: &str, cfg: &Config) -> Result<BarWord> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != 5 {
        return Err(Error::parse(
            "expected `A|B ; level ; [t1,...,tn] ; head? ; letters`",
        ));
    }
    let side = match parts[0].trim() {
        "A" => Side::A,
        "B" => Side::B,
        s => return Err(Error::parse(format!("bad side `{s}`"))),
    };
    let level: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::parse("bad level"))?;
    if level > crate::algebra::MAX_LEVEL {
        return Err(Error::parse("level out of range"));
    }
    let tl = parts[2].trim();
    let tl = tl
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::parse("expected `[t1,...,tn]`"))?;
    let times: Vec<f64> = if tl.trim().is_empty() {
        vec![]
    } else {
        tl.split(',')
            .map(|p| {
                let t: f64 = p.trim().parse().map_err(|_| Error::parse("bad time"))?;
                if !t.is_finite() {
                    return Err(Error::parse("non-finite time"));
                }
                Ok(t)
            })
            .collect::<Result<_>>()?
    };
    let head = match (side, parts[3].trim()) {
        (Side::A, "") => return Err(Error::parse("A-side words need a head")),
        (Side::A, h) => Some(parse_letter(level, h)?),
        (Side::B, "") => None,
        (Side::B, _) => return Err(Error::parse("B-side words carry no head")),
    };
    let ls = parts[4].trim();
    let letters: Vec<PureState> = if ls.is_empty() {
        vec![]
    } else {
        ls.split(',')
            .map(|p| parse_letter(level, p))
            .collect::<Result<_>>()?
    };
    BarWord::raw(side, level, times, head, letters)
        .map_err(|e| Error::parse(e.to_string()))?
        .normalize(cfg)
}

/// A time-indexed word over the vector space `A_r`: the additive
/// analog, with letters that combine by addition and a zero identity.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorWord {
    side: Side,
    level: usize,
    times: Vec<f64>,
    head: Option<CdNumber>,
    letters: Vec<CdNumber>,
}

impl VectorWord {
    pub fn raw(
        side: Side,
        level: usize,
        times: Vec<f64>,
        head: Option<CdNumber>,
        letters: Vec<CdNumber>,
    ) -> Result<VectorWord> {
        if times.len() != letters.len() {
            return Err(Error::contract("one time per letter"));
        }
        match (side, &head) {
            (Side::A, None) => return Err(Error::contract("A-side words carry a head")),
            (Side::B, Some(_)) => return Err(Error::contract("B-side words carry no head")),
            _ => {}
        }
        Ok(VectorWord {
            side,
            level,
            times,
            head,
            letters,
        })
    }

    pub fn zero(side: Side, level: usize) -> VectorWord {
        VectorWord {
            side,
            level,
            times: vec![],
            head: match side {
                Side::A => Some(CdNumber::zero(level)),
                Side::B => None,
            },
            letters: vec![],
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn head(&self) -> Option<&CdNumber> {
        self.head.as_ref()
    }

    pub fn letters(&self) -> &[CdNumber] {
        &self.letters
    }

    pub fn is_zero(&self) -> bool {
        self.letters.iter().all(|v| v.is_zero())
            && self.head.as_ref().map_or(true, |h| h.is_zero())
    }

    /// Additive normal form: sort times, absorb time-0 letters into the
    /// head (A) or drop them (B), add equal-time letters, drop time-1
    /// and zero letters.
    pub fn normalize(&self, cfg: &Config) -> Result<VectorWord> {
        let mut pairs: Vec<(f64, CdNumber)> = self
            .times
            .iter()
            .map(|t| cfg.snap_time(*t))
            .zip(self.letters.iter().cloned())
            .collect();
        for (t, _) in &pairs {
            if !(*t >= 0.0 && *t <= 1.0) {
                return Err(Error::contract(format!("time {t} outside [0,1]")));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut head = self.head.clone();
        let mut out: Vec<(f64, CdNumber)> = Vec::new();
        for (t, v) in pairs {
            if t == 0.0 {
                if let Some(h) = head.as_mut() {
                    *h = h.add(&v)?;
                }
                continue;
            }
            if t == 1.0 {
                continue;
            }
            match out.last_mut() {
                Some((tp, vp)) if *tp == t => *vp = vp.add(&v)?,
                _ => out.push((t, v)),
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        let (times, letters) = out.into_iter().unzip();
        Ok(VectorWord {
            side: self.side,
            level: self.level,
            times,
            head,
            letters,
        })
    }

    pub fn add(&self, other: &VectorWord, cfg: &Config) -> Result<VectorWord> {
        if self.side != other.side || self.level != other.level {
            return Err(Error::contract("side/level mismatch"));
        }
        let mut times = self.times.clone();
        let mut letters = self.letters.clone();
        times.extend_from_slice(&other.times);
        letters.extend_from_slice(&other.letters);
        let head = match (&self.head, &other.head) {
            (Some(a), Some(b)) => Some(a.add(b)?),
            _ => None,
        };
        VectorWord {
            side: self.side,
            level: self.level,
            times,
            head,
            letters,
        }
        .normalize(cfg)
    }

    pub fn neg(&self) -> VectorWord {
        VectorWord {
            side: self.side,
            level: self.level,
            times: self.times.clone(),
            head: self.head.as_ref().map(|h| h.neg()),
            letters: self.letters.iter().map(|v| v.neg()).collect(),
        }
    }

    /// Max coefficient distance after normalization, aligned slot by
    /// slot; words with different normalized time lists are infinitely
    /// far apart.
    pub fn dist(&self, other: &VectorWord, cfg: &Config) -> Result<f64> {
        let a = self.normalize(cfg)?;
        let b = other.normalize(cfg)?;
        if a.side != b.side || a.level != b.level || a.times != b.times {
            return Ok(f64::INFINITY);
        }
        let mut d: f64 = 0.0;
        if let (Some(x), Some(y)) = (&a.head, &b.head) {
            d = d.max(x.dist(y));
        }
        for (x, y) in a.letters.iter().zip(&b.letters) {
            d = d.max(x.dist(y));
        }
        Ok(d)
    }
}

/// Scalar action on vector words, multiplying every slot from the given
/// side; real scalars act the same from either side.
pub fn scalar_mul(s: &CdNumber, x: &VectorWord, from_left: bool, cfg: &Config) -> Result<VectorWord> {
    let act = |v: &CdNumber| -> Result<CdNumber> {
        if from_left {
            cd_mul(s, v)
        } else {
            cd_mul(v, s)
        }
    };
    VectorWord {
        side: x.side,
        level: x.level,
        times: x.times.clone(),
        head: match &x.head {
            Some(h) => Some(act(h)?),
            None => None,
        },
        letters: x.letters.iter().map(&act).collect::<Result<_>>()?,
    }
    .normalize(cfg)
}

/// A finite formal sum of words with real coefficients; only addition
/// and the scalar action are defined.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSum {
    terms: Vec<(f64, BarWord)>,
}

impl FormalSum {
    pub fn zero() -> FormalSum {
        FormalSum { terms: vec![] }
    }

    pub fn from_word(x: BarWord) -> FormalSum {
        FormalSum {
            terms: vec![(1.0, x)],
        }
    }

    pub fn terms(&self) -> &[(f64, BarWord)] {
        &self.terms
    }

    pub fn add(&self, other: &FormalSum) -> FormalSum {
        let mut terms = self.terms.clone();
        for (c, w) in &other.terms {
            match terms.iter_mut().find(|(_, v)| v == w) {
                Some((cc, _)) => *cc += c,
                None => terms.push((*c, w.clone())),
            }
        }
        terms.retain(|(c, _)| *c != 0.0);
        FormalSum { terms }
    }

    pub fn scale(&self, s: f64) -> FormalSum {
        let mut terms: Vec<(f64, BarWord)> = self
            .terms
            .iter()
            .map(|(c, w)| (c * s, w.clone()))
            .collect();
        terms.retain(|(c, _)| *c != 0.0);
        FormalSum { terms }
    }
}

/// A letter of a depth-iterated word: either a pure state (depth 1) or
/// a word one level down.
#[derive(Clone, Debug, PartialEq)]
pub enum DeepLetter {
    Base(PureState),
    Word(Box<DeepWord>),
}

impl DeepLetter {
    fn is_identity(&self) -> bool {
        match self {
            DeepLetter::Base(h) => h.is_identity(),
            DeepLetter::Word(w) => w.letters.is_empty(),
        }
    }

    fn mul(&self, other: &DeepLetter, cfg: &Config) -> Result<DeepLetter> {
        match (self, other) {
            (DeepLetter::Base(a), DeepLetter::Base(b)) => Ok(DeepLetter::Base(a.mul(b)?)),
            (DeepLetter::Word(a), DeepLetter::Word(b)) => {
                Ok(DeepLetter::Word(Box::new(deep_mul(a, b, cfg)?)))
            }
            _ => Err(Error::contract("depth mismatch among letters")),
        }
    }
}

/// An element of the depth-iterated construction: a B-side word whose
/// letters are depth-(a-1) words (depth 1 letters are pure states).
#[derive(Clone, Debug, PartialEq)]
pub struct DeepWord {
    level: usize,
    depth: usize,
    times: Vec<f64>,
    letters: Vec<DeepLetter>,
}

impl DeepWord {
    pub fn unit(level: usize, depth: usize) -> DeepWord {
        DeepWord {
            level,
            depth,
            times: vec![],
            letters: vec![],
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn letters(&self) -> &[DeepLetter] {
        &self.letters
    }

    pub fn is_unit(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn from_bar(x: &BarWord) -> Result<DeepWord> {
        if x.side() != Side::B {
            return Err(Error::contract("depth-1 words are B-side"));
        }
        Ok(DeepWord {
            level: x.level,
            depth: 1,
            times: x.times.clone(),
            letters: x.letters.iter().map(|h| DeepLetter::Base(*h)).collect(),
        })
    }

    /// Builds a depth-(d+1) word over depth-d letters.
    pub fn build(times: Vec<f64>, letters: Vec<DeepWord>, cfg: &Config) -> Result<DeepWord> {
        if times.len() != letters.len() {
            return Err(Error::contract("one time per letter"));
        }
        if letters.is_empty() {
            return Err(Error::contract("use DeepWord::unit for the empty word"));
        }
        let level = letters[0].level;
        let d = letters[0].depth;
        if letters.iter().any(|l| l.depth != d || l.level != level) {
            return Err(Error::contract("depth mismatch among letters"));
        }
        if d + 1 > cfg.depth_cap {
            return Err(Error::contract(format!(
                "depth {} exceeds the cap {}",
                d + 1,
                cfg.depth_cap
            )));
        }
        DeepWord {
            level,
            depth: d + 1,
            times,
            letters: letters
                .into_iter()
                .map(|w| DeepLetter::Word(Box::new(w)))
                .collect(),
        }
        .normalize(cfg)
    }

    /// Recursive normal form: letters normalized first, then the same
    /// rewrites as flat words at every depth.
    pub fn normalize(&self, cfg: &Config) -> Result<DeepWord> {
        let mut pairs: Vec<(f64, DeepLetter)> = Vec::with_capacity(self.letters.len());
        for (t, l) in self.times.iter().zip(&self.letters) {
            let t = cfg.snap_time(*t);
            if !(t >= 0.0 && t <= 1.0) {
                return Err(Error::contract(format!("time {t} outside [0,1]")));
            }
            let l = match l {
                // B-side words shed central signs, so base letters are
                // kept positive.
                DeepLetter::Base(h) => DeepLetter::Base(PureState::new(
                    h.level(),
                    h.gen_index(),
                    h.value().abs(),
                )?),
                DeepLetter::Word(w) => DeepLetter::Word(Box::new(w.normalize(cfg)?)),
            };
            pairs.push((t, l));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        loop {
            let mut changed = false;
            let mut next: Vec<(f64, DeepLetter)> = Vec::with_capacity(pairs.len());
            for (t, l) in pairs.drain(..) {
                if l.is_identity() || t == 0.0 || t == 1.0 {
                    changed = true;
                    continue;
                }
                match next.last_mut() {
                    Some((tp, lp)) if *tp == t => {
                        *lp = lp.mul(&l, cfg)?;
                        changed = true;
                    }
                    _ => next.push((t, l)),
                }
            }
            pairs = next;
            if !changed {
                break;
            }
        }
        let (times, letters) = pairs.into_iter().unzip();
        Ok(DeepWord {
            level: self.level,
            depth: self.depth,
            times,
            letters,
        })
    }
}

/// Product of depth-iterated words: time merge (stable, left first)
/// with equal-time letters combined recursively. These are B-side
/// words, so the central shuffle sign is shed by normalization and is
/// not computed.
pub fn deep_mul(x: &DeepWord, y: &DeepWord, cfg: &Config) -> Result<DeepWord> {
    if x.level != y.level || x.depth != y.depth {
        return Err(Error::contract("level/depth mismatch"));
    }
    let mut entries: Vec<(f64, usize, DeepLetter)> = Vec::new();
    for (t, l) in x.times.iter().zip(&x.letters) {
        entries.push((*t, 0, l.clone()));
    }
    for (t, l) in y.times.iter().zip(&y.letters) {
        entries.push((*t, 1, l.clone()));
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    DeepWord {
        level: x.level,
        depth: x.depth,
        times: entries.iter().map(|e| e.0).collect(),
        letters: entries.into_iter().map(|e| e.2).collect(),
    }
    .normalize(cfg)
}
