//! Discrete principal bundles over a real base: transition data with
//! logarithm-defect forms, parallel transport and loop holonomy, gauge
//! transformations, and curvature estimated from shrinking plaquette
//! loops.
//!
//! Fibers are the invertible Cayley-Dickson numbers. Holonomy over a
//! noncommutative fiber composes edge transports by ordered products
//! along the loop orientation (new factors multiply from the left);
//! the abelian integral formula is the commutative special case.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{cd_exp, cd_inverse, cd_ln, cd_mul, parse_cd, CdNumber};
use crate::config::Config;
use crate::error::{Error, Result};

pub type ScalarField = Box<dyn Fn(&[f64]) -> Result<CdNumber> + Send + Sync>;
pub type CovectorField = Box<dyn Fn(&[f64]) -> Result<Vec<CdNumber>> + Send + Sync>;
pub type DomainFn = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A gauge function per chart, optionally with its analytic
/// logarithmic derivative. Without the derivative the edge increments
/// use principal logs of value ratios, which telescope exactly around
/// closed loops; supplying `dlnf` integrates the continuous branch
/// instead, which is what exposes non-integer winding.
pub struct GaugeField {
    pub f: ScalarField,
    pub dlnf: Option<CovectorField>,
}

pub struct Chart {
    pub id: String,
    domain: Option<DomainFn>,
    pub samples: Vec<Vec<f64>>,
}

impl Chart {
    pub fn contains(&self, p: &[f64]) -> bool {
        match &self.domain {
            Some(d) => d(p),
            None => true,
        }
    }
}

/// Transition data plus a sampled connection 1-form per chart. The
/// connection and transitions are stored as evaluators; file-based
/// bundles use nearest-sample lookup, built-in ones are analytic.
pub struct DiscreteBundle {
    pub level: usize,
    pub dim: usize,
    charts: Vec<Chart>,
    transitions: BTreeMap<(usize, usize), ScalarField>,
    overlap_samples: BTreeMap<(usize, usize), Vec<Vec<f64>>>,
    connection: Vec<Option<CovectorField>>,
    potentials: Vec<Option<ScalarField>>,
    gauge: Option<Arc<Vec<GaugeField>>>,
}

/// Transition invariant summary: max pointwise residual of
/// `g_{j,k} g_{k,j} = 1` and of the cocycle rule on triple overlaps.
/// The cocycle rule is enforced only at associative levels; at the
/// octonion level the defect is recorded.
#[derive(Clone, Debug)]
pub struct BundleReport {
    pub inverse_residual: f64,
    pub cocycle_residual: f64,
    pub cocycle_enforced: bool,
}

impl DiscreteBundle {
    pub fn new(level: usize, dim: usize) -> DiscreteBundle {
        DiscreteBundle {
            level,
            dim,
            charts: Vec::new(),
            transitions: BTreeMap::new(),
            overlap_samples: BTreeMap::new(),
            connection: Vec::new(),
            potentials: Vec::new(),
            gauge: None,
        }
    }

    pub fn add_chart(
        &mut self,
        id: &str,
        domain: Option<DomainFn>,
        samples: Vec<Vec<f64>>,
    ) -> usize {
        self.charts.push(Chart {
            id: id.to_string(),
            domain,
            samples,
        });
        self.connection.push(None);
        self.potentials.push(None);
        self.charts.len() - 1
    }

    pub fn chart_index(&self, id: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.id == id)
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn set_connection(&mut self, chart: usize, w: CovectorField) {
        self.connection[chart] = Some(w);
    }

    pub fn set_potential(&mut self, chart: usize, w: ScalarField) {
        self.potentials[chart] = Some(w);
    }

    pub fn add_transition(
        &mut self,
        k: usize,
        j: usize,
        g: ScalarField,
        samples: Vec<Vec<f64>>,
    ) {
        self.overlap_samples.insert((k, j), samples);
        self.transitions.insert((k, j), g);
    }

    /// Evaluates g_{k,j} at p, falling back to the inverse of the
    /// stored opposite direction so `g_{j,k} = g_{k,j}^{-1}` holds by
    /// construction when only one direction is given.
    pub fn transition(&self, k: usize, j: usize, p: &[f64], cfg: &Config) -> Result<CdNumber> {
        let base = if let Some(g) = self.transitions.get(&(k, j)) {
            g(p)?
        } else if let Some(g) = self.transitions.get(&(j, k)) {
            cd_inverse(&g(p)?, cfg)?
        } else {
            return Err(Error::contract(format!(
                "no transition between charts {} and {}",
                self.charts[k].id, self.charts[j].id
            )));
        };
        match &self.gauge {
            None => Ok(base),
            Some(f) => {
                // conjugated transition f_k g f_j^{-1}, left-to-right
                let fk = (f[k].f)(p)?;
                let fj_inv = cd_inverse(&(f[j].f)(p)?, cfg)?;
                cd_mul(&cd_mul(&fk, &base)?, &fj_inv)
            }
        }
    }

    pub fn connection_at(&self, chart: usize, p: &[f64]) -> Result<Vec<CdNumber>> {
        match &self.connection[chart] {
            Some(w) => {
                let v = w(p)?;
                if v.len() != self.dim {
                    return Err(Error::contract("covector dimension mismatch"));
                }
                Ok(v)
            }
            None => Ok(vec![CdNumber::zero(self.level); self.dim]),
        }
    }

    pub fn overlap_pairs(&self) -> Vec<(usize, usize)> {
        self.overlap_samples.keys().cloned().collect()
    }

    pub fn overlap_samples(&self, k: usize, j: usize) -> &[Vec<f64>] {
        self.overlap_samples
            .get(&(k, j))
            .or_else(|| self.overlap_samples.get(&(j, k)))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Checks the transition invariants on the overlap sample points.
    pub fn validate(&self, cfg: &Config) -> Result<BundleReport> {
        let mut inverse_residual: f64 = 0.0;
        for (&(k, j), pts) in &self.overlap_samples {
            for p in pts {
                let fwd = self.transition(k, j, p, cfg)?;
                let bwd = self.transition(j, k, p, cfg)?;
                inverse_residual = inverse_residual
                    .max(cd_mul(&fwd, &bwd)?.dist(&CdNumber::one(self.level)));
            }
        }
        let mut cocycle_residual: f64 = 0.0;
        let n = self.charts.len();
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    if k == j || j == l || k == l {
                        continue;
                    }
                    if !self.has_transition(k, j)
                        || !self.has_transition(j, l)
                        || !self.has_transition(k, l)
                    {
                        continue;
                    }
                    for p in self.overlap_samples(k, l) {
                        let lhs = cd_mul(
                            &self.transition(k, j, p, cfg)?,
                            &self.transition(j, l, p, cfg)?,
                        )?;
                        let rhs = self.transition(k, l, p, cfg)?;
                        cocycle_residual = cocycle_residual.max(lhs.dist(&rhs));
                    }
                }
            }
        }
        let cocycle_enforced = self.level <= 2;
        if inverse_residual > 1e-9 {
            return Err(Error::contract(format!(
                "transition inverse invariant violated: residual {inverse_residual:e}"
            )));
        }
        if cocycle_enforced && cocycle_residual > 1e-9 {
            return Err(Error::contract(format!(
                "transition cocycle violated at associative level: residual {cocycle_residual:e}"
            )));
        }
        Ok(BundleReport {
            inverse_residual,
            cocycle_residual,
            cocycle_enforced,
        })
    }

    fn has_transition(&self, k: usize, j: usize) -> bool {
        self.transitions.contains_key(&(k, j)) || self.transitions.contains_key(&(j, k))
    }
}

/// A closed piecewise-linear loop: points p_0, ..., p_N = p_0 with a
/// chart index per segment.
#[derive(Clone, Debug)]
pub struct DiscreteLoop {
    pub points: Vec<Vec<f64>>,
    pub charts: Vec<usize>,
}

impl DiscreteLoop {
    pub fn new(points: Vec<Vec<f64>>, charts: Vec<usize>) -> Result<DiscreteLoop> {
        if points.len() < 4 {
            return Err(Error::contract("loop needs at least 3 segments"));
        }
        if points.first() != points.last() {
            return Err(Error::contract("loop is not closed"));
        }
        if charts.len() != points.len() - 1 {
            return Err(Error::contract("one chart per segment"));
        }
        Ok(DiscreteLoop { points, charts })
    }

    pub fn segments(&self) -> usize {
        self.charts.len()
    }

    pub fn reversed(&self) -> DiscreteLoop {
        let mut points = self.points.clone();
        points.reverse();
        let mut charts = self.charts.clone();
        charts.reverse();
        DiscreteLoop { points, charts }
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Logarithm-defect data on overlap samples: `nu_{k,j} = Ln g_{k,j} -
/// (w~_k - w~_j)` against the chart log potentials (zero when absent)
/// and `eta_{k,j,l} = Ln g_{k,l} - Ln g_{k,j} - Ln g_{j,l}` on triple
/// overlaps, with the identity `eta = nu_{k,l} - nu_{k,j} - nu_{j,l}`
/// verified pointwise.
pub struct DefectForms {
    pub nu: BTreeMap<(usize, usize), Vec<(Vec<f64>, CdNumber)>>,
    pub eta: BTreeMap<(usize, usize, usize), Vec<(Vec<f64>, CdNumber)>>,
    pub identity_residual: f64,
}

impl DefectForms {
    pub fn max_nu(&self) -> f64 {
        self.nu
            .values()
            .flatten()
            .fold(0.0, |acc, (_, v)| acc.max(v.norm()))
    }

    pub fn max_eta(&self) -> f64 {
        self.eta
            .values()
            .flatten()
            .fold(0.0, |acc, (_, v)| acc.max(v.norm()))
    }
}

pub fn defect_forms(b: &DiscreteBundle, cfg: &Config) -> Result<DefectForms> {
    let located_ln = |x: &CdNumber, p: &[f64]| -> Result<CdNumber> {
        cd_ln(x, cfg).map_err(|e| match e {
            Error::Branch(msg) => Error::Branch(format!("{msg} at point {p:?}")),
            other => other,
        })
    };
    let potential = |chart: usize, p: &[f64]| -> Result<CdNumber> {
        match &b.potentials[chart] {
            Some(w) => w(p),
            None => Ok(CdNumber::zero(b.level)),
        }
    };
    let mut nu: BTreeMap<(usize, usize), Vec<(Vec<f64>, CdNumber)>> = BTreeMap::new();
    for (k, j) in b.overlap_pairs() {
        let mut vals = Vec::new();
        for p in b.overlap_samples(k, j) {
            let ln_g = located_ln(&b.transition(k, j, p, cfg)?, p)?;
            let v = ln_g
                .sub(&potential(k, p)?)?
                .add(&potential(j, p)?)?;
            vals.push((p.clone(), v));
        }
        nu.insert((k, j), vals);
    }
    let nu_at = |k: usize, j: usize, p: &[f64], cfg: &Config| -> Result<CdNumber> {
        let ln_g = located_ln(&b.transition(k, j, p, cfg)?, p)?;
        ln_g.sub(&potential(k, p)?)?.add(&potential(j, p)?)
    };
    let mut eta = BTreeMap::new();
    let mut identity_residual: f64 = 0.0;
    let n = b.charts.len();
    for k in 0..n {
        for j in 0..n {
            for l in 0..n {
                if k == j || j == l || k == l {
                    continue;
                }
                if !b.has_transition(k, j) || !b.has_transition(j, l) || !b.has_transition(k, l)
                {
                    continue;
                }
                let mut vals = Vec::new();
                for p in b.overlap_samples(k, l) {
                    let e = located_ln(&b.transition(k, l, p, cfg)?, p)?
                        .sub(&located_ln(&b.transition(k, j, p, cfg)?, p)?)?
                        .sub(&located_ln(&b.transition(j, l, p, cfg)?, p)?)?;
                    let via_nu = nu_at(k, l, p, cfg)?
                        .sub(&nu_at(k, j, p, cfg)?)?
                        .sub(&nu_at(j, l, p, cfg)?)?;
                    identity_residual = identity_residual.max(e.dist(&via_nu));
                    vals.push((p.clone(), e));
                }
                eta.insert((k, j, l), vals);
            }
        }
    }
    Ok(DefectForms {
        nu,
        eta,
        identity_residual,
    })
}

/// Loop holonomy: trapezoidal quadrature of the connection along each
/// segment, exponentiated edge by edge and composed by ordered
/// products; transition factors are applied at chart changes. The
/// gauge field, when present, contributes the principal logarithm of
/// the edge ratio `f(p_{i+1}) f(p_i)^{-1}`.
pub fn holonomy(lp: &DiscreteLoop, b: &DiscreteBundle, cfg: &Config) -> Result<CdNumber> {
    let mut transport = CdNumber::one(b.level);
    let n = lp.segments();
    for i in 0..n {
        let chart = lp.charts[i];
        if chart >= b.charts.len() {
            return Err(Error::contract("loop references unknown chart"));
        }
        let p = &lp.points[i];
        let q = &lp.points[i + 1];
        if i > 0 && lp.charts[i - 1] != chart {
            let g = b.transition(chart, lp.charts[i - 1], p, cfg)?;
            transport = cd_mul(&g, &transport)?;
        }
        if !b.charts[chart].contains(p) || !b.charts[chart].contains(q) {
            return Err(Error::contract(format!(
                "loop leaves the cover: segment {i} not inside chart {}",
                b.charts[chart].id
            )));
        }
        let step = sub(q, p);
        if norm(&step) > cfg.h_max {
            return Err(Error::contract(format!(
                "segment {i} longer than h_max = {}",
                cfg.h_max
            )));
        }
        let wp = b.connection_at(chart, p)?;
        let wq = b.connection_at(chart, q)?;
        let mut omega = CdNumber::zero(b.level);
        for (d, dx) in step.iter().enumerate() {
            omega = omega.add(&wp[d].add(&wq[d])?.scale(0.5 * dx))?;
        }
        if let Some(f) = &b.gauge {
            let gf = &f[chart];
            match &gf.dlnf {
                Some(d) => {
                    let dp = d(p)?;
                    let dq = d(q)?;
                    for (dim, dx) in step.iter().enumerate() {
                        omega = omega.add(&dp[dim].add(&dq[dim])?.scale(0.5 * dx))?;
                    }
                }
                None => {
                    let ratio =
                        cd_mul(&(gf.f)(q)?, &cd_inverse(&(gf.f)(p)?, cfg)?)?;
                    omega = omega.add(&cd_ln(&ratio, cfg)?)?;
                }
            }
        }
        transport = cd_mul(&cd_exp(&omega.neg(), cfg), &transport)?;
    }
    if lp.charts[0] != lp.charts[n - 1] {
        let g = b.transition(lp.charts[0], lp.charts[n - 1], &lp.points[0], cfg)?;
        transport = cd_mul(&g, &transport)?;
    }
    Ok(transport)
}

/// Replaces the connection by `w + dLn f` (discrete edge differences
/// of the principal logarithm) and conjugates the transitions.
pub fn gauge_transform(
    mut b: DiscreteBundle,
    f: Vec<GaugeField>,
    cfg: &Config,
) -> Result<DiscreteBundle> {
    if f.len() != b.charts.len() {
        return Err(Error::contract("one gauge function per chart"));
    }
    for (chart, fk) in b.charts.iter().zip(&f) {
        for p in &chart.samples {
            let v = (fk.f)(p)?;
            if v.norm() <= cfg.inverse_eps {
                return Err(Error::contract(format!(
                    "zero gauge sample in chart {} at {p:?}",
                    chart.id
                )));
            }
        }
    }
    b.gauge = match b.gauge.take() {
        None => Some(Arc::new(f)),
        Some(old) => {
            let mut merged: Vec<GaugeField> = Vec::new();
            for (idx, gf) in f.into_iter().enumerate() {
                let GaugeField { f: fk, dlnf } = gf;
                let old_f = Arc::clone(&old);
                let merged_f: ScalarField = Box::new(move |p: &[f64]| {
                    cd_mul(&fk(p)?, &(old_f[idx].f)(p)?)
                });
                let old_d = Arc::clone(&old);
                let merged_d: Option<CovectorField> = match dlnf {
                    Some(d) if old[idx].dlnf.is_some() => {
                        Some(Box::new(move |p: &[f64]| {
                            let a = d(p)?;
                            let b = old_d[idx].dlnf.as_ref().expect("checked")(p)?;
                            a.iter()
                                .zip(&b)
                                .map(|(x, y)| x.add(y))
                                .collect()
                        }))
                    }
                    _ => None,
                };
                merged.push(GaugeField {
                    f: merged_f,
                    dlnf: merged_d,
                });
            }
            Some(Arc::new(merged))
        }
    };
    Ok(b)
}

/// One corner-to-corner parametrization step of the parallelogram
/// loop: 0 -> v -> v+w -> w -> 0 as u runs over [0, 1].
pub fn gamma_point(v: &[f64], w: &[f64], u: f64) -> Vec<f64> {
    let lin = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    let zero = vec![0.0; v.len()];
    let vw: Vec<f64> = v.iter().zip(w).map(|(x, y)| x + y).collect();
    if u <= 0.25 {
        lin(&zero, v, 4.0 * u)
    } else if u <= 0.5 {
        lin(v, &vw, 4.0 * (u - 0.25))
    } else if u <= 0.75 {
        lin(&vw, w, 4.0 * (u - 0.5))
    } else {
        lin(w, &zero, 4.0 * (u - 0.75))
    }
}

/// Nested parametrization `gamma_{w_0,...,w_q}(u_1,...,u_q)` for
/// q <= 2: each step feeds the previous point in as the first edge
/// vector of another parallelogram.
pub fn gamma_nested(ws: &[Vec<f64>], us: &[f64]) -> Result<Vec<f64>> {
    if ws.len() < 2 || ws.len() > 3 || us.len() + 1 != ws.len() {
        return Err(Error::contract(
            "nested parametrization supports 2 or 3 vectors with one parameter per step",
        ));
    }
    let mut p = gamma_point(&ws[0], &ws[1], us[0]);
    if ws.len() == 3 {
        p = gamma_point(&p, &ws[2], us[1]);
    }
    Ok(p)
}

fn independent(v: &[f64], w: &[f64]) -> bool {
    // Gram determinant
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let vw: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
    vv * ww - vw * vw > 1e-24
}

/// The piecewise-linear parallelogram loop through `base` spanned by
/// `s v` and `s w`, sampled at `n` points per edge; the four corners
/// are sample points.
pub fn loop_family(
    v: &[f64],
    w: &[f64],
    s: f64,
    n: usize,
    base: &[f64],
    chart: usize,
) -> Result<DiscreteLoop> {
    if v.len() != w.len() || v.len() != base.len() {
        return Err(Error::contract("dimension mismatch"));
    }
    if !independent(v, w) {
        return Err(Error::contract("degenerate loop vectors"));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::contract("scale must be in (0, 1]"));
    }
    if n == 0 {
        return Err(Error::contract("need at least one sample per edge"));
    }
    let sv: Vec<f64> = v.iter().map(|x| s * x).collect();
    let sw: Vec<f64> = w.iter().map(|x| s * x).collect();
    let corner = |a: f64, b: f64| -> Vec<f64> {
        base.iter()
            .enumerate()
            .map(|(d, x)| x + a * sv[d] + b * sw[d])
            .collect()
    };
    let corners = [
        corner(0.0, 0.0),
        corner(1.0, 0.0),
        corner(1.0, 1.0),
        corner(0.0, 1.0),
    ];
    let mut points = Vec::with_capacity(4 * n + 1);
    for e in 0..4 {
        let a = &corners[e];
        let b = &corners[(e + 1) % 4];
        for i in 0..n {
            let t = i as f64 / n as f64;
            points.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
        }
    }
    points.push(corners[0].clone());
    let charts = vec![chart; 4 * n];
    DiscreteLoop::new(points, charts)
}

fn find_chart(b: &DiscreteBundle, p: &[f64]) -> Result<usize> {
    b.charts
        .iter()
        .position(|c| c.contains(p))
        .ok_or_else(|| Error::contract("point not covered by any chart"))
}

fn plaquette_holonomy_ln(
    b: &DiscreteBundle,
    y: &[f64],
    j: usize,
    k: usize,
    s: f64,
    cfg: &Config,
) -> Result<CdNumber> {
    let dim = b.dim;
    if j >= dim || k >= dim || j == k {
        return Err(Error::contract("axes out of range"));
    }
    let mut ej = vec![0.0; dim];
    ej[j] = 1.0;
    let mut ek = vec![0.0; dim];
    ek[k] = 1.0;
    let chart = find_chart(b, y)?;
    let n = cfg.plaquette_samples.max(1);
    let lp = loop_family(&ej, &ek, s, n, y, chart)?;
    let h = holonomy(&lp, b, cfg)?;
    cd_ln(&h, cfg)
}

/// Plaquette curvature component: `-Ln h(gamma^s_{e_j,e_k}) / s^2`
/// (the exponent is configurable). Holonomies landing near the
/// logarithm branch cut trigger a retry at smaller s.
pub fn curvature_estimate(
    b: &DiscreteBundle,
    y: &[f64],
    j: usize,
    k: usize,
    s: f64,
    cfg: &Config,
) -> Result<CdNumber> {
    let mut scale = s;
    let mut last_err = None;
    for _ in 0..4 {
        match plaquette_holonomy_ln(b, y, j, k, scale, cfg) {
            Ok(ln_h) => {
                // retry when the holonomy sits near the branch cut
                if ln_h.im_norm() < std::f64::consts::PI - 0.05 {
                    return Ok(ln_h.neg().scale(scale.powf(-cfg.curvature_exponent)));
                }
                last_err = Some(Error::branch("holonomy near the logarithm branch cut"));
            }
            Err(e @ Error::Branch(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        scale /= 2.0;
    }
    Err(last_err.unwrap_or_else(|| Error::numeric("curvature estimate did not converge")))
}

/// Two-point Richardson extrapolation `2 E(s/2) - E(s)`, cancelling
/// the O(s) error term of the plaquette estimate.
pub fn curvature_extrapolated(
    b: &DiscreteBundle,
    y: &[f64],
    j: usize,
    k: usize,
    s: f64,
    cfg: &Config,
) -> Result<CdNumber> {
    let coarse = curvature_estimate(b, y, j, k, s, cfg)?;
    let fine = curvature_estimate(b, y, j, k, s / 2.0, cfg)?;
    fine.scale(2.0).sub(&coarse)
}

/// The assembled 2-form at a point: components for j < k, with
/// antisymmetry structural in the accessor.
pub struct CurvatureForm {
    pub dim: usize,
    comps: BTreeMap<(usize, usize), CdNumber>,
    level: usize,
}

impl CurvatureForm {
    pub fn component(&self, j: usize, k: usize) -> CdNumber {
        if j == k {
            return CdNumber::zero(self.level);
        }
        if j < k {
            self.comps[&(j, k)].clone()
        } else {
            self.comps[&(k, j)].neg()
        }
    }

    pub fn components(&self) -> &BTreeMap<(usize, usize), CdNumber> {
        &self.comps
    }
}

pub fn curvature_form(
    b: &DiscreteBundle,
    y: &[f64],
    s: f64,
    cfg: &Config,
) -> Result<CurvatureForm> {
    let mut comps = BTreeMap::new();
    for j in 0..b.dim {
        for k in j + 1..b.dim {
            comps.insert((j, k), curvature_estimate(b, y, j, k, s, cfg)?);
        }
    }
    Ok(CurvatureForm {
        dim: b.dim,
        comps,
        level: b.level,
    })
}

/// Analytic connection evaluators usable in bundle files and tests:
/// `zero`, `xdy` (w = x dy), `sinxdy` (w = sin x dy), `dxy` (the exact
/// form d(xy), flat), and `dtheta` with a Cayley-Dickson coefficient
/// (w = c dtheta on the punctured plane).
pub fn builtin_connection(
    name: &str,
    param: Option<CdNumber>,
    level: usize,
    dim: usize,
) -> Result<CovectorField> {
    let planar = |name: &str| -> Result<()> {
        if dim != 2 {
            return Err(Error::contract(format!("{name} needs a 2-dimensional base")));
        }
        Ok(())
    };
    match name {
        "zero" => Ok(Box::new(move |_p: &[f64]| {
            Ok(vec![CdNumber::zero(level); dim])
        })),
        "xdy" => {
            planar("xdy")?;
            Ok(Box::new(move |p: &[f64]| {
                Ok(vec![CdNumber::zero(level), CdNumber::real(level, p[0])])
            }))
        }
        "sinxdy" => {
            planar("sinxdy")?;
            Ok(Box::new(move |p: &[f64]| {
                Ok(vec![
                    CdNumber::zero(level),
                    CdNumber::real(level, p[0].sin()),
                ])
            }))
        }
        "dxy" => {
            planar("dxy")?;
            Ok(Box::new(move |p: &[f64]| {
                Ok(vec![
                    CdNumber::real(level, p[1]),
                    CdNumber::real(level, p[0]),
                ])
            }))
        }
        "dtheta" => {
            planar("dtheta")?;
            let c = param.ok_or_else(|| Error::contract("dtheta needs a coefficient"))?;
            if c.level() != level {
                return Err(Error::contract("coefficient level mismatch"));
            }
            Ok(Box::new(move |p: &[f64]| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                if r2 < 1e-12 {
                    return Err(Error::numeric("dtheta evaluated at the origin"));
                }
                Ok(vec![c.scale(-p[1] / r2), c.scale(p[0] / r2)])
            }))
        }
        other => Err(Error::contract(format!("unknown builtin connection {other}"))),
    }
}

/// Single-chart bundle on the punctured plane with `w = c dtheta`;
/// loops around the origin have holonomy `exp(-2 pi c)`.
pub fn circle_bundle(c: &CdNumber) -> Result<DiscreteBundle> {
    let level = c.level();
    let mut b = DiscreteBundle::new(level, 2);
    let chart = b.add_chart(
        "main",
        Some(Box::new(|p: &[f64]| p[0] * p[0] + p[1] * p[1] > 1e-4)),
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]],
    );
    b.set_connection(chart, builtin_connection("dtheta", Some(c.clone()), level, 2)?);
    Ok(b)
}

/// The unit circle sampled at n points, all in chart 0.
pub fn circle_loop(n: usize) -> Result<DiscreteLoop> {
    let mut points = Vec::with_capacity(n + 1);
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        points.push(vec![t.cos(), t.sin()]);
    }
    points.push(points[0].clone());
    DiscreteLoop::new(points, vec![0; n])
}

fn nearest<'a>(samples: &'a [(Vec<f64>, Vec<CdNumber>)], p: &[f64]) -> &'a [CdNumber] {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, (q, _)) in samples.iter().enumerate() {
        let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    &samples[best].1
}

fn parse_floats(text: &str, line: usize) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(format!("line {line}: bad coordinate `{t}`")))
        })
        .collect()
}

/// Parses the trailing `;`-chunks of a row as CdNumber literals; each
/// literal itself spans two chunks because it contains a `;`.
fn parse_value_chunks(chunks: &[&str], line: usize) -> Result<Vec<CdNumber>> {
    if chunks.len() % 2 != 0 || chunks.is_empty() {
        return Err(Error::parse(format!(
            "line {line}: expected CdNumber literals after the coordinates"
        )));
    }
    chunks
        .chunks(2)
        .map(|pair| {
            parse_cd(&format!("{};{}", pair[0], pair[1]))
                .map_err(|e| Error::parse(format!("line {line}: {e}")))
        })
        .collect()
}

/// Bundle file: `level:` and `dim:` headers, then `[cover]`,
/// `[transitions]`, `[connection]` sections with rows
/// `chart(s); point coords; value`. Connection rows may instead read
/// `chart; analytic; name[; coefficient]`.
pub fn parse_bundle(text: &str, cfg: &Config) -> Result<DiscreteBundle> {
    let mut level: Option<usize> = None;
    let mut dim: Option<usize> = None;
    let mut section = String::new();
    struct Raw {
        cover: Vec<(String, Vec<f64>)>,
        transitions: Vec<(String, String, Vec<f64>, CdNumber)>,
        conn_samples: BTreeMap<String, Vec<(Vec<f64>, Vec<CdNumber>)>>,
        conn_analytic: BTreeMap<String, (String, Option<CdNumber>)>,
    }
    let mut raw = Raw {
        cover: Vec::new(),
        transitions: Vec::new(),
        conn_samples: BTreeMap::new(),
        conn_analytic: BTreeMap::new(),
    };
    for (idx, line) in text.lines().enumerate() {
        let lno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("level:") {
            level = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("line {lno}: bad level")))?,
            );
            continue;
        }
        if let Some(rest) = line.strip_prefix("dim:") {
            dim = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("line {lno}: bad dim")))?,
            );
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].to_string();
            if !matches!(section.as_str(), "cover" | "transitions" | "connection") {
                return Err(Error::parse(format!("line {lno}: unknown section {section}")));
            }
            continue;
        }
        let chunks: Vec<&str> = line.split(';').map(|c| c.trim()).collect();
        match section.as_str() {
            "cover" => {
                if chunks.len() != 2 {
                    return Err(Error::parse(format!("line {lno}: cover row is `chart; coords`")));
                }
                raw.cover
                    .push((chunks[0].to_string(), parse_floats(chunks[1], lno)?));
            }
            "transitions" => {
                if chunks.len() < 4 {
                    return Err(Error::parse(format!(
                        "line {lno}: transition row is `k,j; coords; value`"
                    )));
                }
                let ids: Vec<&str> = chunks[0].split(',').map(|t| t.trim()).collect();
                if ids.len() != 2 {
                    return Err(Error::parse(format!("line {lno}: need two chart ids")));
                }
                let pt = parse_floats(chunks[1], lno)?;
                let vals = parse_value_chunks(&chunks[2..], lno)?;
                if vals.len() != 1 {
                    return Err(Error::parse(format!(
                        "line {lno}: transition value is one CdNumber"
                    )));
                }
                raw.transitions.push((
                    ids[0].to_string(),
                    ids[1].to_string(),
                    pt,
                    vals[0].clone(),
                ));
            }
            "connection" => {
                if chunks.len() >= 3 && chunks[1] == "analytic" {
                    let param = if chunks.len() > 3 {
                        Some(
                            parse_value_chunks(&chunks[3..], lno)?
                                .pop()
                                .expect("nonempty"),
                        )
                    } else {
                        None
                    };
                    raw.conn_analytic
                        .insert(chunks[0].to_string(), (chunks[2].to_string(), param));
                } else {
                    if chunks.len() < 4 {
                        return Err(Error::parse(format!(
                            "line {lno}: connection row is `chart; coords; components`"
                        )));
                    }
                    let pt = parse_floats(chunks[1], lno)?;
                    let vals = parse_value_chunks(&chunks[2..], lno)?;
                    raw.conn_samples
                        .entry(chunks[0].to_string())
                        .or_default()
                        .push((pt, vals));
                }
            }
            _ => return Err(Error::parse(format!("line {lno}: row outside any section"))),
        }
    }
    let level = level.ok_or_else(|| Error::parse("missing level header"))?;
    let dim = dim.ok_or_else(|| Error::parse("missing dim header"))?;
    if level > 3 {
        return Err(Error::parse("level above 3"));
    }
    let mut b = DiscreteBundle::new(level, dim);
    for (id, pt) in &raw.cover {
        if pt.len() != dim {
            return Err(Error::parse(format!("cover point of wrong dimension in {id}")));
        }
        match b.chart_index(id) {
            Some(c) => b.charts[c].samples.push(pt.clone()),
            None => {
                b.add_chart(id, None, vec![pt.clone()]);
            }
        }
    }
    if b.charts.is_empty() {
        return Err(Error::parse("empty cover"));
    }
    let mut trans: BTreeMap<(usize, usize), Vec<(Vec<f64>, Vec<CdNumber>)>> = BTreeMap::new();
    for (k_id, j_id, pt, val) in raw.transitions {
        let k = b
            .chart_index(&k_id)
            .ok_or_else(|| Error::parse(format!("unknown chart {k_id}")))?;
        let j = b
            .chart_index(&j_id)
            .ok_or_else(|| Error::parse(format!("unknown chart {j_id}")))?;
        if pt.len() != dim {
            return Err(Error::parse("transition point of wrong dimension"));
        }
        if val.level() != level {
            return Err(Error::parse("transition value level mismatch"));
        }
        trans.entry((k, j)).or_default().push((pt, vec![val]));
    }
    for ((k, j), samples) in trans {
        let pts = samples.iter().map(|(p, _)| p.clone()).collect();
        b.add_transition(
            k,
            j,
            Box::new(move |p: &[f64]| Ok(nearest(&samples, p)[0].clone())),
            pts,
        );
    }
    for (id, (name, param)) in raw.conn_analytic {
        let c = b
            .chart_index(&id)
            .ok_or_else(|| Error::parse(format!("unknown chart {id}")))?;
        b.set_connection(c, builtin_connection(&name, param, level, dim)?);
    }
    for (id, samples) in raw.conn_samples {
        let c = b
            .chart_index(&id)
            .ok_or_else(|| Error::parse(format!("unknown chart {id}")))?;
        for (p, vals) in &samples {
            if p.len() != dim || vals.len() != dim {
                return Err(Error::parse("connection sample of wrong dimension"));
            }
            if vals.iter().any(|v| v.level() != level) {
                return Err(Error::parse("connection value level mismatch"));
            }
        }
        b.set_connection(
            c,
            Box::new(move |p: &[f64]| Ok(nearest(&samples, p).to_vec())),
        );
    }
    b.validate(cfg)?;
    Ok(b)
}

/// Loop file: ordered rows `chart; coords`; the last point must close
/// the loop.
pub fn parse_loop(text: &str, b: &DiscreteBundle) -> Result<DiscreteLoop> {
    let mut points = Vec::new();
    let mut charts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let chunks: Vec<&str> = line.split(';').map(|c| c.trim()).collect();
        if chunks.len() != 2 {
            return Err(Error::parse(format!("line {lno}: loop row is `chart; coords`")));
        }
        let chart = b
            .chart_index(chunks[0])
            .ok_or_else(|| Error::parse(format!("line {lno}: unknown chart {}", chunks[0])))?;
        let pt = parse_floats(chunks[1], lno)?;
        if pt.len() != b.dim {
            return Err(Error::parse(format!("line {lno}: point of wrong dimension")));
        }
        points.push(pt);
        charts.push(chart);
    }
    charts.pop();
    DiscreteLoop::new(points, charts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> Config {
        Config::default()
    }

    fn xdy_bundle(level: usize) -> DiscreteBundle {
        let mut b = DiscreteBundle::new(level, 2);
        let c = b.add_chart("main", None, vec![vec![0.0, 0.0]]);
        b.set_connection(c, builtin_connection("xdy", None, level, 2).unwrap());
        b
    }

    #[test]
    fn zero_connection_gives_unit_holonomy() {
        let cfg = cfg();
        let mut b = DiscreteBundle::new(2, 2);
        let c = b.add_chart("main", None, vec![vec![0.0, 0.0]]);
        b.set_connection(c, builtin_connection("zero", None, 2, 2).unwrap());
        let lp = loop_family(&[1.0, 0.0], &[0.0, 1.0], 0.5, 16, &[0.0, 0.0], 0).unwrap();
        let h = holonomy(&lp, &b, &cfg).unwrap();
        assert!(h.dist(&CdNumber::one(2)) < 1e-15);
    }

    #[test]
    fn circle_dtheta_matches_closed_form() {
        let cfg = cfg();
        let cases = [
            CdNumber::real(2, 0.1),
            CdNumber::real(2, 1.0),
            CdNumber::generator(2, 1).scale(0.3),
        ];
        let lp = circle_loop(10_000).unwrap();
        for c in &cases {
            let b = circle_bundle(c).unwrap();
            let h = holonomy(&lp, &b, &cfg).unwrap();
            let expected = cd_exp(&c.scale(-2.0 * PI), &cfg);
            assert!(
                h.dist(&expected) < 1e-6 * expected.norm(),
                "c = {c:?}: {h:?} vs {expected:?}"
            );
        }
    }

    #[test]
    fn spliced_out_and_back_path_cancels() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.2);
        let b = circle_bundle(&c).unwrap();
        let plain = circle_loop(2000).unwrap();
        let h0 = holonomy(&plain, &b, &cfg).unwrap();
        // splice p -> 1.5p -> p into the loop at index 100
        let mut points = plain.points.clone();
        let anchor = points[100].clone();
        let mut splice = Vec::new();
        for i in 1..=10 {
            let t = 1.0 + 0.05 * i as f64;
            splice.push(vec![anchor[0] * t, anchor[1] * t]);
        }
        let mut inserted: Vec<Vec<f64>> = splice.clone();
        inserted.extend(splice.iter().rev().skip(1).cloned());
        inserted.push(anchor.clone());
        for (off, p) in inserted.into_iter().enumerate() {
            points.insert(101 + off, p);
        }
        let n = points.len() - 1;
        let spliced = DiscreteLoop::new(points, vec![0; n]).unwrap();
        let h1 = holonomy(&spliced, &b, &cfg).unwrap();
        assert!(h0.dist(&h1) < 1e-9);
    }

    #[test]
    fn loop_reversal_inverts_holonomy() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.2);
        let b = circle_bundle(&c).unwrap();
        let lp = circle_loop(4000).unwrap();
        let h = holonomy(&lp, &b, &cfg).unwrap();
        let hr = holonomy(&lp.reversed(), &b, &cfg).unwrap();
        assert!(cd_mul(&h, &hr).unwrap().dist(&CdNumber::one(2)) < 1e-9);
    }

    fn overlap_pts() -> Vec<Vec<f64>> {
        vec![vec![0.1, 0.2], vec![-0.3, 0.4], vec![0.5, -0.1]]
    }

    fn const_field(v: CdNumber) -> ScalarField {
        Box::new(move |_p: &[f64]| Ok(v.clone()))
    }

    #[test]
    fn trivial_bundle_has_zero_defects() {
        let cfg = cfg();
        let mut b = DiscreteBundle::new(2, 2);
        b.add_chart("a", None, vec![]);
        b.add_chart("b", None, vec![]);
        b.add_chart("c", None, vec![]);
        for (k, j) in [(0, 1), (1, 2), (0, 2)] {
            b.add_transition(k, j, const_field(CdNumber::one(2)), overlap_pts());
        }
        b.validate(&cfg).unwrap();
        let d = defect_forms(&b, &cfg).unwrap();
        assert_eq!(d.max_nu(), 0.0);
        assert_eq!(d.max_eta(), 0.0);
    }

    #[test]
    fn commutative_transitions_have_no_eta() {
        let cfg = cfg();
        // all values in the complex subfield of i_1
        let g01 = cd_exp(&CdNumber::generator(2, 1).scale(0.4), &cfg);
        let g12 = cd_exp(&CdNumber::generator(2, 1).scale(-0.7), &cfg);
        let g02 = cd_mul(&g01, &g12).unwrap();
        let mut b = DiscreteBundle::new(2, 2);
        b.add_chart("a", None, vec![]);
        b.add_chart("b", None, vec![]);
        b.add_chart("c", None, vec![]);
        b.add_transition(0, 1, const_field(g01), overlap_pts());
        b.add_transition(1, 2, const_field(g12), overlap_pts());
        b.add_transition(0, 2, const_field(g02), overlap_pts());
        b.validate(&cfg).unwrap();
        let d = defect_forms(&b, &cfg).unwrap();
        assert!(d.max_eta() < 1e-12, "eta = {:e}", d.max_eta());
    }

    #[test]
    fn quaternion_transitions_have_eta_with_exact_identity() {
        let cfg = cfg();
        let g01 = cd_exp(&CdNumber::generator(2, 1).scale(0.8), &cfg);
        let g12 = cd_exp(&CdNumber::generator(2, 2).scale(0.6), &cfg);
        let g02 = cd_mul(&g01, &g12).unwrap();
        let mut b = DiscreteBundle::new(2, 2);
        b.add_chart("a", None, vec![]);
        b.add_chart("b", None, vec![]);
        b.add_chart("c", None, vec![]);
        b.add_transition(0, 1, const_field(g01), overlap_pts());
        b.add_transition(1, 2, const_field(g12), overlap_pts());
        b.add_transition(0, 2, const_field(g02), overlap_pts());
        b.validate(&cfg).unwrap();
        let d = defect_forms(&b, &cfg).unwrap();
        assert!(d.max_eta() > 1e-3, "expected nonzero eta");
        assert!(d.identity_residual < 1e-12);
    }

    #[test]
    fn identity_gauge_leaves_bundle_unchanged() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.3);
        let b = circle_bundle(&c).unwrap();
        let lp = circle_loop(2000).unwrap();
        let h0 = holonomy(&lp, &b, &cfg).unwrap();
        let b = gauge_transform(
            b,
            vec![GaugeField {
                f: const_field(CdNumber::one(2)),
                dlnf: None,
            }],
            &cfg,
        )
        .unwrap();
        let h1 = holonomy(&lp, &b, &cfg).unwrap();
        assert_eq!(h0.dist(&h1), 0.0);
    }

    fn winding_gauge(m: CdNumber) -> GaugeField {
        let mc = m.clone();
        GaugeField {
            f: Box::new(move |p: &[f64]| {
                Ok(cd_exp(&m.scale(p[1].atan2(p[0])), &Config::default()))
            }),
            dlnf: Some(Box::new(move |p: &[f64]| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                if r2 < 1e-12 {
                    return Err(Error::numeric("winding gauge at origin"));
                }
                Ok(vec![mc.scale(-p[1] / r2), mc.scale(p[0] / r2)])
            })),
        }
    }

    #[test]
    fn integer_winding_gauge_preserves_holonomy() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.1);
        let b = circle_bundle(&c).unwrap();
        // quadrature error of the winding integral is O(N^-2); the
        // 1e-8 budget needs the denser loop
        let lp = circle_loop(100_000).unwrap();
        let h0 = holonomy(&lp, &b, &cfg).unwrap();
        let b = gauge_transform(b, vec![winding_gauge(CdNumber::generator(2, 1))], &cfg).unwrap();
        let h1 = holonomy(&lp, &b, &cfg).unwrap();
        assert!(h0.dist(&h1) < 1e-8 * h0.norm(), "drift {:e}", h0.dist(&h1));
    }

    #[test]
    fn non_integer_winding_detected() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.1);
        let m = CdNumber::generator(2, 1).scale(0.3);
        let b = circle_bundle(&c).unwrap();
        let lp = circle_loop(10_000).unwrap();
        let h0 = holonomy(&lp, &b, &cfg).unwrap();
        let b = gauge_transform(b, vec![winding_gauge(m.clone())], &cfg).unwrap();
        let h1 = holonomy(&lp, &b, &cfg).unwrap();
        assert!(h0.dist(&h1) > 1e-3, "winding went unnoticed");
        let expected = cd_mul(&h0, &cd_exp(&m.scale(-2.0 * PI), &cfg)).unwrap();
        assert!(h1.dist(&expected) < 1e-5 * expected.norm());
    }

    #[test]
    fn parallelogram_corners_are_exact() {
        let v = [1.0, 0.0];
        let w = [0.0, 1.0];
        let lp = loop_family(&v, &w, 1.0, 10, &[0.0, 0.0], 0).unwrap();
        assert_eq!(lp.points[0], vec![0.0, 0.0]);
        assert_eq!(lp.points[10], vec![1.0, 0.0]);
        assert_eq!(lp.points[20], vec![1.0, 1.0]);
        assert_eq!(lp.points[30], vec![0.0, 1.0]);
        assert_eq!(lp.points[40], vec![0.0, 0.0]);
        // halving the scale halves every point
        let half = loop_family(&v, &w, 0.5, 10, &[0.0, 0.0], 0).unwrap();
        for (a, b) in lp.points.iter().zip(&half.points) {
            assert_eq!(a.iter().map(|x| x * 0.5).collect::<Vec<_>>(), *b);
        }
        // swapping the spanning vectors reverses the orientation
        let rev = loop_family(&w, &v, 1.0, 10, &[0.0, 0.0], 0).unwrap();
        assert_eq!(rev.points[10], vec![0.0, 1.0]);
        assert_eq!(rev.points[30], vec![1.0, 0.0]);
        assert!(loop_family(&v, &[2.0, 0.0], 1.0, 10, &[0.0, 0.0], 0).is_err());
    }

    #[test]
    fn nested_parametrization_extends_the_planar_one() {
        let v = vec![1.0, 0.0, 0.0];
        let w = vec![0.0, 1.0, 0.0];
        let z = vec![0.0, 0.0, 1.0];
        assert_eq!(
            gamma_nested(&[v.clone(), w.clone()], &[0.375]).unwrap(),
            gamma_point(&v, &w, 0.375)
        );
        let p = gamma_nested(&[v.clone(), w, z.clone()], &[0.25, 0.25]).unwrap();
        // inner corner v, then one quarter along the outer square
        assert_eq!(p, v);
        assert!(gamma_nested(&[v, z], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn xdy_plaquette_curvature_is_one() {
        let cfg = cfg();
        let b = xdy_bundle(2);
        let k = curvature_estimate(&b, &[0.3, 0.4], 0, 1, 0.01, &cfg).unwrap();
        assert!(k.dist(&CdNumber::one(2)) < 0.02, "k = {k:?}");
        let swapped = curvature_estimate(&b, &[0.3, 0.4], 1, 0, 0.01, &cfg).unwrap();
        assert!(swapped.dist(&k.neg()) < 0.02);
        let form = curvature_form(&b, &[0.3, 0.4], 0.01, &cfg).unwrap();
        assert_eq!(form.component(1, 0).dist(&form.component(0, 1).neg()), 0.0);
    }

    #[test]
    fn exact_form_is_flat() {
        let cfg = cfg();
        let mut b = DiscreteBundle::new(2, 2);
        let c = b.add_chart("main", None, vec![vec![0.0, 0.0]]);
        b.set_connection(c, builtin_connection("dxy", None, 2, 2).unwrap());
        let k = curvature_estimate(&b, &[0.7, -0.2], 0, 1, 0.05, &cfg).unwrap();
        assert!(k.norm() < 1e-8, "k = {k:?}");
    }

    #[test]
    fn richardson_extrapolation_gains_order() {
        let cfg = cfg();
        let mut b = DiscreteBundle::new(2, 2);
        let c = b.add_chart("main", None, vec![vec![0.0, 0.0]]);
        b.set_connection(c, builtin_connection("sinxdy", None, 2, 2).unwrap());
        let y = [0.3f64, 0.2];
        let exact = CdNumber::real(2, y[0].cos());
        let e1 = curvature_extrapolated(&b, &y, 0, 1, 0.2, &cfg).unwrap();
        let e2 = curvature_extrapolated(&b, &y, 0, 1, 0.1, &cfg).unwrap();
        let err1 = e1.dist(&exact);
        let err2 = e2.dist(&exact);
        let order = (err1 / err2).log2();
        assert!(order >= 1.8, "order {order}, errs {err1:e} {err2:e}");
    }

    #[test]
    fn chart_changes_apply_transitions() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.25);
        let single = circle_bundle(&c).unwrap();
        let mut split = DiscreteBundle::new(2, 2);
        let upper = split.add_chart(
            "upper",
            Some(Box::new(|p: &[f64]| p[1] > -0.5)),
            vec![vec![0.0, 1.0]],
        );
        let lower = split.add_chart(
            "lower",
            Some(Box::new(|p: &[f64]| p[1] < 0.5)),
            vec![vec![0.0, -1.0]],
        );
        for ch in [upper, lower] {
            split.set_connection(
                ch,
                builtin_connection("dtheta", Some(c.clone()), 2, 2).unwrap(),
            );
        }
        split.add_transition(
            upper,
            lower,
            const_field(CdNumber::one(2)),
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
        );
        let n = 2000;
        let base = circle_loop(n).unwrap();
        let charts: Vec<usize> = base
            .points
            .iter()
            .take(n)
            .map(|p| if p[1] >= 0.0 { upper } else { lower })
            .collect();
        let lp = DiscreteLoop::new(base.points.clone(), charts).unwrap();
        let h_split = holonomy(&lp, &split, &cfg).unwrap();
        let h_single = holonomy(&base, &single, &cfg).unwrap();
        assert!(h_split.dist(&h_single) < 1e-12);
    }

    #[test]
    fn coverage_and_density_violations_are_contract_errors() {
        let cfg = cfg();
        let c = CdNumber::real(2, 0.1);
        let b = circle_bundle(&c).unwrap();
        // a segment through the puncture leaves the chart domain
        let lp = DiscreteLoop::new(
            vec![
                vec![0.005, 0.0],
                vec![0.0, 0.005],
                vec![-0.005, 0.0],
                vec![0.005, 0.0],
            ],
            vec![0; 3],
        )
        .unwrap();
        assert!(matches!(holonomy(&lp, &b, &cfg), Err(Error::Contract(_))));
        // oversized segments violate h_max
        let coarse = circle_loop(10).unwrap();
        assert!(matches!(
            holonomy(&coarse, &b, &cfg),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn bundle_and_loop_files_parse() {
        let cfg = cfg();
        let bundle_text = "\
level: 2
dim: 2
[cover]
main; 1,0
main; 0,1
[connection]
main; analytic; dtheta; level:2; 0.1,0,0,0
";
        let b = parse_bundle(bundle_text, &cfg).unwrap();
        let mut loop_text = String::new();
        let n = 200;
        for i in 0..=n {
            let t = 2.0 * PI * (i % n) as f64 / n as f64;
            loop_text.push_str(&format!("main; {},{}\n", t.cos(), t.sin()));
        }
        let lp = parse_loop(&loop_text, &b).unwrap();
        let h = holonomy(&lp, &b, &cfg).unwrap();
        let expected = cd_exp(&CdNumber::real(2, -0.2 * PI), &cfg);
        assert!(h.dist(&expected) < 1e-3 * expected.norm());
    }

    #[test]
    fn sampled_connection_uses_nearest_sample() {
        let cfg = cfg();
        let bundle_text = "\
level: 2
dim: 2
[cover]
main; 0,0
[connection]
main; 0,0; level:2; 0,0,0,0; level:2; 0.5,0,0,0
";
        let b = parse_bundle(bundle_text, &cfg).unwrap();
        // constant covector integrates to zero around a closed loop
        let lp = loop_family(&[1.0, 0.0], &[0.0, 1.0], 0.5, 16, &[0.0, 0.0], 0).unwrap();
        let h = holonomy(&lp, &b, &cfg).unwrap();
        assert!(h.dist(&CdNumber::one(2)) < 1e-12);
    }

    #[test]
    fn malformed_bundle_files_are_rejected() {
        let cfg = cfg();
        for text in [
            "dim: 2\n[cover]\nmain; 0,0\n",
            "level: 2\ndim: 2\n[cover]\nmain; 0,0\n[connection]\nghost; analytic; zero\n",
            "level: 2\ndim: 2\n[junk]\n",
            "level: 9\ndim: 2\n[cover]\nmain; 0,0\n",
            "level: 2\ndim: 2\nmain; 0,0\n",
        ] {
            assert!(
                matches!(parse_bundle(text, &cfg), Err(Error::Parse(_))),
                "accepted: {text}"
            );
        }
    }
}
