//! Extremality certificates, Newton refinement of extremal points, sampled
//! Pareto frontiers, and first-order perturbation of zeros.
//!
//! A resonance `k` of minimal decay at fixed frequency satisfies a ray
//! condition: all first minors `∂_{β_j} D_a(b; k)` lie on one closed ray from
//! the origin. [`certify`] checks this; [`refine_extremal`] solves for points
//! where it holds; [`sample_frontier`] produces upper bounds for the frontier
//! by sampling strength tuples and recording the least-decaying resonance
//! per frequency bin.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{first_minor_scale, first_minors_at, gamma_matrix, BetaChart};
use crate::geometry::{reduce, CenterConfiguration, ExtendedComplex, FeasibleClass, StrengthTuple};
use crate::linalg::solve_real;
use crate::rootfinder::{multiplicity_at, resonances_target, AnalyticTarget, DetTarget, Rect, SearchWindow};

const I: Complex64 = Complex64::new(0.0, 1.0);
const FOUR_PI: f64 = 4.0 * PI;

/// `|det Γ(k)|` relative to its Hadamard bound below which `k` is a root.
pub const ROOT_TOL: f64 = 1e-8;
/// A minor vanishes when `|m_j| ≤ VANISH_TOL · (Hadamard bound of its matrix)`.
pub const VANISH_TOL: f64 = 1e-10;
/// Default alignment tolerance for refined points.
pub const CERT_TOL: f64 = 1e-8;

const MAX_NEWTON: usize = 50;
const XI_SCAN: usize = 720;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertMode {
    /// minors on one closed ray `e^{iξ}[0, ∞)`
    Ray,
    /// minors on one line through the origin
    Line,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalityCertificate {
    pub k: Complex64,
    pub minors: Vec<Complex64>,
    pub vanishing: Vec<bool>,
    pub xi: f64,
    /// `max_j |Im(e^{−iξ} m_j)| / max_j |m_j|` over non-vanishing minors
    pub residual: f64,
    /// `Re(e^{−iξ} m_j) ≥ −tol` per minor
    pub sign_ok: Vec<bool>,
    /// `|det Γ(k)|` over its Hadamard bound
    pub det_residual: f64,
    pub mode: CertMode,
    pub passed: bool,
}

fn reduced_det_residual(alpha: &StrengthTuple, config: &CenterConfiguration, k: Complex64) -> Result<f64> {
    let (a, y) = reduce(alpha, config)?;
    let vals = a.finite_values()?;
    if vals.is_empty() {
        return Ok(1.0);
    }
    let g = gamma_matrix(&vals, &y, k);
    let h = g.hadamard_bound();
    Ok(if h > 0.0 { g.det().norm() / h } else { 0.0 })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Best angle `ξ` for the given (normalized) minors.
fn fit_xi(w: &[Complex64], mode: CertMode) -> f64 {
    let objective = |xi: f64| {
        let rot = Complex64::from_polar(1.0, -xi);
        w.iter()
            .map(|&m| {
                let v = rot * m;
                match mode {
                    CertMode::Line => v.im.abs(),
                    CertMode::Ray if v.re >= 0.0 => v.im.abs(),
                    CertMode::Ray => v.norm(),
                }
            })
            .fold(0.0, f64::max)
    };
    let (lo, span) = match mode {
        CertMode::Ray => (-PI, 2.0 * PI),
        CertMode::Line => (-PI / 2.0, PI),
    };
    let step = span / XI_SCAN as f64;
    let best = (0..XI_SCAN)
        .map(|i| lo + i as f64 * step)
        .min_by(|&a, &b| objective(a).total_cmp(&objective(b)))
        .unwrap_or(0.0);
    golden_min(objective, best - step, best + step)
}

/// Checks the ray (or line) condition on the first minors at a root `k`.
pub fn certify(
    alpha: &StrengthTuple,
    config: &CenterConfiguration,
    k: Complex64,
    mode: CertMode,
    tol: f64,
) -> Result<OptimalityCertificate> {
    let det_residual = reduced_det_residual(alpha, config, k)?;
    if det_residual > ROOT_TOL {
        return Err(Error::NotARoot(k, det_residual));
    }
    let chart = BetaChart::new(alpha.clone());
    let minors = first_minors_at(alpha, config, k)?;
    let vanishing = (0..minors.len())
        .map(|j| Ok(minors[j].norm() <= VANISH_TOL * first_minor_scale(&chart, config, k, j)?))
        .collect::<Result<Vec<bool>>>()?;
    let live: Vec<Complex64> = minors.iter().zip(&vanishing).filter(|(_, &v)| !v).map(|(&m, _)| m).collect();
    let scale = live.iter().map(|m| m.norm()).fold(0.0, f64::max);
    let (xi, residual, sign_ok) = if live.is_empty() {
        (0.0, 0.0, vec![true; minors.len()])
    } else {
        let w: Vec<Complex64> = live.iter().map(|m| m / scale).collect();
        let xi = fit_xi(&w, mode);
        let rot = Complex64::from_polar(1.0, -xi);
        let residual = w.iter().map(|&m| (rot * m).im.abs()).fold(0.0, f64::max);
        let sign_ok = minors
            .iter()
            .zip(&vanishing)
            .map(|(&m, &v)| v || (rot * m).re / scale >= -tol)
            .collect();
        (xi, residual, sign_ok)
    };
    let passed = residual <= tol && (mode == CertMode::Line || sign_ok.iter().all(|&s| s));
    Ok(OptimalityCertificate {
        k,
        minors,
        vanishing,
        xi,
        residual,
        sign_ok,
        det_residual,
        mode,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PersistenceResult {
    pub index: usize,
    /// worst `|det Γ(k)|`/Hadamard over the trial values
    pub max_residual: f64,
    pub passed: bool,
}

/// For each vanishing minor, replaces that strength by random values
/// (including ∞) and checks that `k` stays a root.
pub fn persistence_check(
    alpha: &StrengthTuple,
    config: &CenterConfiguration,
    cert: &OptimalityCertificate,
    trials: usize,
    seed: u64,
) -> Result<Vec<PersistenceResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = Cauchy::new(0.0, 1.0 / (FOUR_PI * config.diameter().max(1e-3))).expect("positive scale");
    let mut out = Vec::new();
    for (j, _) in cert.vanishing.iter().enumerate().filter(|(_, &v)| v) {
        let mut worst: f64 = 0.0;
        for t in 0..trials.max(1) {
            let value = if t == 0 && !alpha.get(j).is_infinite() {
                ExtendedComplex::Infinity
            } else {
                ExtendedComplex::real(spread.sample(&mut rng))
            };
            let trial = alpha.with_entry(j, value);
            worst = worst.max(reduced_det_residual(&trial, config, cert.k)?);
        }
        out.push(PersistenceResult {
            index: j,
            max_residual: worst,
            passed: worst <= ROOT_TOL,
        });
    }
    Ok(out)
}

/// `m`-th `z`-derivative of `det Γ_{α̃,Ỹ}` at `k`.
fn z_derivative(alpha: &StrengthTuple, config: &CenterConfiguration, k: Complex64, m: usize) -> Result<Complex64> {
    let target = DetTarget::new(alpha, config)?;
    if let Some(d) = target.derivatives(k, m) {
        return Ok(d[m]);
    }
    // Cauchy's formula on a small circle; the trapezoid rule is spectrally
    // accurate for periodic integrands.
    let rho = 1e-2 * k.norm().max(1.0) / config.diameter().max(1.0);
    let pts = 64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..pts {
        let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / pts as f64);
        acc += target.value(k + rho * w) / w.powu(m as u32);
    }
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    Ok(acc * fact / (pts as f64 * rho.powi(m as i32)))
}

/// Leading coefficient `C` of the perturbation law: the zeros of
/// `D_a(b + ζv; ·)` near a zero `k` of multiplicity `m` behave like
/// `k + (Cζ)^{1/m}`, with `C = −m! Σ_j v_j ∂_{β_j}D_a / ∂_z^m D_a`.
pub fn perturb_first_order(
    alpha: &StrengthTuple,
    config: &CenterConfiguration,
    k: Complex64,
    m: usize,
    v: &[Complex64],
) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::InvalidArgument("multiplicity must be positive".into()));
    }
    if v.len() != alpha.len() {
        return Err(Error::LengthMismatch {
            alpha: v.len(),
            centers: alpha.len(),
        });
    }
    let minors = first_minors_at(alpha, config, k)?;
    let dm = z_derivative(alpha, config, k, m)?;
    if dm.norm() == 0.0 {
        return Err(Error::DegenerateDerivative { order: m });
    }
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    let lin: Complex64 = v.iter().zip(&minors).map(|(a, b)| a * b).sum();
    Ok(-fact * lin / dm)
}

/// The `m` predicted displacements `(Cζ)^{1/m}·e^{2πij/m}`.
pub fn puiseux_offsets(c: Complex64, zeta: f64, m: usize) -> Vec<Complex64> {
    let base = (c * zeta).powf(1.0 / m as f64);
    (0..m)
        .map(|j| base * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

/// The curve along which decay is minimized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// `k = f − is`
    Frequency(f64),
    /// `k² = E − 2i·s·√(E+s²)`, i.e. `Re k² = E`
    Energy(f64),
}

impl Constraint {
    fn k(self, s: f64) -> Complex64 {
        match self {
            Constraint::Frequency(f) => Complex64::new(f, -s),
            Constraint::Energy(e) => Complex64::new((e + s * s).max(0.0).sqrt(), -s),
        }
    }

    fn at_origin(self) -> bool {
        matches!(self, Constraint::Frequency(x) | Constraint::Energy(x) if x == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    Sampled,
    Refined,
    Oracle,
}

/// How a sampled tuple was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFamily {
    Random,
    AllEqual,
    Pair(usize, usize),
    /// all equal except slot `i` at ∞
    AllButOne(usize),
    Single(usize),
    /// one center with `α = if/(4π)`, `f < 0`: a real resonance at `f`
    RealResonance,
}

/// An achieved (frequency, decay) pair with the tuple achieving it.
#[derive(Clone, Debug, Serialize)]
pub struct ParetoPoint {
    pub f: f64,
    pub r: f64,
    pub alpha: StrengthTuple,
    pub k: Complex64,
    pub multiplicity: usize,
    pub source: PointSource,
    pub family: SampleFamily,
}

#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    pub point: ParetoPoint,
    pub certificate: OptimalityCertificate,
    pub iterations: usize,
}

fn finite_reals(alpha: &StrengthTuple) -> Result<Vec<f64>> {
    alpha
        .finite_values()?
        .into_iter()
        .map(|z| {
            if z.im == 0.0 {
                Ok(z.re)
            } else {
                Err(Error::InvalidArgument("refinement needs a real seed tuple".into()))
            }
        })
        .collect()
}

fn reinsert(seed: &StrengthTuple, values: &[f64]) -> StrengthTuple {
    let mut it = values.iter();
    StrengthTuple::new(
        seed.entries()
            .iter()
            .map(|e| match e {
                ExtendedComplex::Infinity => ExtendedComplex::Infinity,
                ExtendedComplex::Finite(_) => ExtendedComplex::real(*it.next().expect("one value per finite slot")),
            })
            .collect(),
    )
}

fn minors_of(alpha: &[Complex64], config: &CenterConfiguration, k: Complex64) -> (Complex64, Vec<Complex64>, f64) {
    let g = gamma_matrix(alpha, config, k);
    let minors = (0..alpha.len()).map(|p| g.principal_submatrix(p).det()).collect();
    (g.det(), minors, g.hadamard_bound())
}

/// Common shift `t` with `det(Γ_α(0) + t) = 0`, nearest to 0 by Newton.
fn shift_to_zero(a: &[f64], config: &CenterConfiguration) -> Result<(f64, usize)> {
    let mut t = 0.0;
    for it in 0..MAX_NEWTON {
        let vals: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x + t, 0.0)).collect();
        let lu = gamma_matrix(&vals, config, Complex64::new(0.0, 0.0)).lu();
        let Some(inv) = lu.inverse() else {
            return Ok((t, it));
        };
        // Newton on det/det' = 1/tr M⁻¹: quadratic even at the repeated
        // eigenvalues of symmetric configurations
        let n = vals.len();
        let g: f64 = (0..n).map(|i| inv[(i, i)].re).sum();
        let h: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (inv[(i, j)] * inv[(j, i)]).re).sum();
        if h == 0.0 {
            return Err(Error::NonConvergence(it));
        }
        let step = g / h;
        t -= step;
        if step.abs() <= 1e-15 * (1.0 + t.abs()) {
            return Ok((t, it + 1));
        }
    }
    Err(Error::NonConvergence(MAX_NEWTON))
}

/// Solves for a real tuple and a decay `s` along `constraint` at which the
/// determinant vanishes and the principal minors are real multiples of one
/// another, by damped Gauss–Newton from a seed. Entries at ∞ in the seed
/// stay at ∞.
pub fn refine_on(
    config: &CenterConfiguration,
    constraint: Constraint,
    seed: &StrengthTuple,
    seed_s: f64,
) -> Result<Refinement> {
    let (red, sub) = reduce(seed, config)?;
    let a0 = finite_reals(&red)?;
    let n = a0.len();
    if n == 0 {
        return Err(Error::InvalidArgument("seed has no finite strength".into()));
    }
    if let Constraint::Energy(e) = constraint {
        if e < 0.0 {
            return Err(Error::InvalidArgument(format!("energy must be nonnegative, got {e}")));
        }
    }

    let (values, s, iterations) = if constraint.at_origin() {
        let (t, it) = shift_to_zero(&a0, &sub)?;
        (a0.iter().map(|x| x + t).collect::<Vec<f64>>(), 0.0, it)
    } else {
        gauss_newton(&sub, constraint, &a0, seed_s)?
    };

    let k = constraint.k(s);
    let alpha = reinsert(seed, &values);
    // the sign test skips vanishing minors, whose phase is noise
    let certificate = certify(&alpha, config, k, CertMode::Ray, CERT_TOL)?;
    if certificate.sign_ok.iter().any(|&ok| !ok) {
        return Err(Error::NotRayAligned);
    }
    let target = DetTarget::new(&alpha, config)?;
    let multiplicity = multiplicity_at(&target, k, 1e-2).unwrap_or(1);
    Ok(Refinement {
        point: ParetoPoint {
            f: k.re,
            r: -k.im,
            alpha,
            k,
            multiplicity,
            source: PointSource::Refined,
            family: SampleFamily::Random,
        },
        certificate,
        iterations,
    })
}

/// Refinement at fixed frequency `f`.
pub fn refine_extremal(
    config: &CenterConfiguration,
    f: f64,
    seed: &StrengthTuple,
    seed_r: f64,
) -> Result<Refinement> {
    refine_on(config, Constraint::Frequency(f), seed, seed_r)
}

fn gauss_newton(
    config: &CenterConfiguration,
    constraint: Constraint,
    a0: &[f64],
    s0: f64,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = a0.len();
    let to_c = |x: &[f64]| -> Vec<Complex64> { x[..n].iter().map(|&v| Complex64::new(v, 0.0)).collect() };
    let mut x: Vec<f64> = a0.iter().copied().chain([s0]).collect();

    let (_, m0, h0) = minors_of(&to_c(&x), config, constraint.k(s0));
    let jref = (0..n).max_by(|&a, &b| m0[a].norm().total_cmp(&m0[b].norm())).unwrap_or(0);
    let sd = if h0 > 0.0 { h0 } else { 1.0 };
    let sm = if m0[jref].norm() > 0.0 { m0[jref].norm_sqr() } else { 1.0 };

    let residual = |x: &[f64]| -> Vec<f64> {
        let (d, m, _) = minors_of(&to_c(x), config, constraint.k(x[n]));
        let mut out = vec![d.re / sd, d.im / sd];
        out.extend((0..n).filter(|&j| j != jref).map(|j| (m[j] * m[jref].conj()).im / sm));
        out
    };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut fx = residual(&x);
    let mut lambda = 1e-6;
    let mut iterations = 0;
    while iterations < MAX_NEWTON && norm(&fx) > 1e-15 {
        iterations += 1;
        let jac: Vec<Vec<f64>> = (0..=n)
            .map(|c| {
                let h = 1e-7 * x[c].abs().max(1e-2);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                let (fp, fm) = (residual(&xp), residual(&xm));
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect();
        // jac[c][r] = ∂F_r/∂x_c
        let normal: Vec<Vec<f64>> = (0..=n)
            .map(|i| (0..=n).map(|j| (0..=n).map(|r| jac[i][r] * jac[j][r]).sum()).collect())
            .collect();
        let grad: Vec<f64> = (0..=n).map(|i| -(0..=n).map(|r| jac[i][r] * fx[r]).sum::<f64>()).collect();
        let mut accepted = None;
        for _ in 0..16 {
            let mut a = normal.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * normal[i][i].max(1e-12);
            }
            if let Some(step) = solve_real(&a, &grad) {
                let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                let fnew = residual(&xn);
                if norm(&fnew) < norm(&fx) {
                    accepted = Some((xn, fnew, norm(&step)));
                    lambda = (lambda / 10.0).max(1e-15);
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((xn, fnew, step)) = accepted else { break };
        x = xn;
        fx = fnew;
        if step <= 1e-15 * (1.0 + norm(&x)) {
            break;
        }
    }
    if norm(&fx) > 1e-10 || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence(iterations));
    }
    let mut s = x[n];
    if s < 0.0 {
        if s < -1e-9 {
            return Err(Error::NonConvergence(iterations));
        }
        s = 0.0;
    }
    x.truncate(n);
    Ok((x, s, iterations))
}

/// Equal-width bins `[e_b, e_{b+1})` over a closed range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    edges: Vec<f64>,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi || count == 0 {
            return Err(Error::InvalidArgument(format!("bad bin range ({lo}, {hi}) × {count}")));
        }
        Ok(Self {
            edges: (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().expect("nonempty")
    }

    pub fn bounds(&self, b: usize) -> (f64, f64) {
        (self.edges[b], self.edges[b + 1])
    }

    pub fn center(&self, b: usize) -> f64 {
        0.5 * (self.edges[b] + self.edges[b + 1])
    }

    /// Bin containing `x`; the last bin is closed on the right.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let b = self.edges.partition_point(|&e| e <= x).saturating_sub(1);
        Some(b.min(self.len() - 1))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub budget: usize,
    pub seed: u64,
    /// deepest decay searched
    pub r_cap: f64,
    pub structured_fraction: f64,
    /// probability that a random entry is ∞
    pub infinity_probability: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            budget: 10_000,
            seed: 0,
            r_cap: 3.0,
            structured_fraction: 0.1,
            infinity_probability: 0.1,
        }
    }
}

/// Best point of a bin plus the best point of each sampling family, which
/// serve as alternative seeds for refinement.
#[derive(Clone, Debug, Serialize)]
pub struct FrontierBin {
    pub lo: f64,
    pub hi: f64,
    pub best: Option<ParetoPoint>,
    pub candidates: Vec<ParetoPoint>,
}

struct Sampler<'a> {
    config: &'a CenterConfiguration,
    class: FeasibleClass,
    opts: &'a SamplingOptions,
    /// structured families; members of a group share one quantile grid
    groups: Vec<Vec<SampleFamily>>,
    n_random: usize,
    n_structured: usize,
    scale: f64,
    /// `[lo, hi)` of the negative frequencies to cover by real resonances
    negative: Option<(f64, f64)>,
}

impl<'a> Sampler<'a> {
    fn new(
        config: &'a CenterConfiguration,
        class: FeasibleClass,
        opts: &'a SamplingOptions,
        negative: Option<(f64, f64)>,
    ) -> Self {
        let n = config.len();
        let mut groups = vec![(0..n).map(SampleFamily::Single).collect::<Vec<_>>()];
        if n >= 2 {
            groups.push(vec![SampleFamily::AllEqual]);
        }
        if n >= 3 {
            groups.push((0..n).flat_map(|i| (i + 1..n).map(move |j| SampleFamily::Pair(i, j))).collect());
        }
        if n >= 4 {
            groups.push((0..n).map(SampleFamily::AllButOne).collect());
        }
        if class != FeasibleClass::Real && negative.is_some() {
            groups.push(vec![SampleFamily::RealResonance]);
        }
        let n_structured = ((opts.budget as f64 * opts.structured_fraction).ceil() as usize).min(opts.budget);
        Self {
            config,
            class,
            opts,
            groups,
            n_random: opts.budget - n_structured,
            n_structured,
            scale: 1.0 / (FOUR_PI * config.diameter().max(if n > 1 { 0.0 } else { 1.0 })),
            negative,
        }
    }

    /// Two interleaved stratified Cauchy grids, at scale `s` and `8s`; the
    /// wide one resolves band edges, where the optimal strength diverges.
    /// The first quantile is 0.
    fn quantile(&self, q: usize, count: usize) -> f64 {
        if q == 0 || count <= 2 {
            return 0.0;
        }
        let (half, scale) = if q % 2 == 1 { (1, self.scale) } else { (2, 8.0 * self.scale) };
        let m = if half == 1 { count / 2 } else { (count - 1) / 2 };
        let i = (q - half) / 2;
        let u = (i as f64 + 0.5) / m.max(1) as f64;
        scale * (PI * (u - 0.5)).tan()
    }

    fn tuple(&self, index: usize) -> (StrengthTuple, SampleFamily) {
        let n = self.config.len();
        if index < self.n_random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
            rng.set_stream(index as u64);
            let cauchy = Cauchy::new(0.0, self.scale).expect("positive scale");
            let entries = (0..n)
                .map(|_| {
                    if rng.random::<f64>() < self.opts.infinity_probability {
                        return ExtendedComplex::Infinity;
                    }
                    let re = cauchy.sample(&mut rng);
                    let im = match self.class {
                        FeasibleClass::Real => 0.0,
                        _ if rng.random::<bool>() => 0.0,
                        FeasibleClass::Dissipative => -cauchy.sample(&mut rng).abs(),
                        FeasibleClass::General => cauchy.sample(&mut rng),
                    };
                    ExtendedComplex::new(re, im)
                })
                .collect();
            return (StrengthTuple::new(entries), SampleFamily::Random);
        }
        let t = index - self.n_random;
        let ng = self.groups.len();
        let group = &self.groups[t % ng];
        let q = t / ng;
        let count = (self.n_structured + ng - 1 - t % ng) / ng;
        let family = group[q % group.len()];
        let a = ExtendedComplex::real(self.quantile(q, count));
        let inf = ExtendedComplex::Infinity;
        let entries: Vec<ExtendedComplex> = match family {
            SampleFamily::AllEqual => vec![a; n],
            SampleFamily::Pair(i, j) => (0..n).map(|l| if l == i || l == j { a } else { inf }).collect(),
            SampleFamily::AllButOne(i) => (0..n).map(|l| if l == i { inf } else { a }).collect(),
            SampleFamily::Single(i) => (0..n).map(|l| if l == i { a } else { inf }).collect(),
            SampleFamily::RealResonance => {
                let (lo, hi) = self.negative.expect("family only present with negative bins");
                let f = lo + (hi - lo) * (q as f64 + 0.5) / count.max(1) as f64;
                (0..n)
                    .map(|l| if l == 0 { ExtendedComplex::new(0.0, f / FOUR_PI) } else { inf })
                    .collect()
            }
            SampleFamily::Random => unreachable!("random samples come first"),
        };
        (StrengthTuple::new(entries), family)
    }

    fn points(&self, index: usize, rect: &Rect) -> Vec<ParetoPoint> {
        let (alpha, family) = self.tuple(index);
        let roots = DetTarget::new(&alpha, self.config).and_then(|t| {
            let window = SearchWindow::new(*rect);
            resonances_target(&t, &window)
        });
        let set = match roots {
            Ok(set) => set,
            Err(e) => {
                log::debug!("sample {index} skipped: {e}");
                return Vec::new();
            }
        };
        if !set.unresolved.is_empty() {
            log::debug!("sample {index}: {} unresolved boxes", set.unresolved.len());
        }
        let mut out = Vec::new();
        for root in set.roots {
            let point = ParetoPoint {
                f: root.k.re,
                r: -root.k.im,
                alpha: alpha.clone(),
                k: root.k,
                multiplicity: root.multiplicity,
                source: PointSource::Sampled,
                family,
            };
            if self.class == FeasibleClass::Real {
                // the spectrum of a real tuple is symmetric under k ↦ −k̄
                let mirror = ParetoPoint {
                    f: -point.f,
                    k: -point.k.conj(),
                    ..point.clone()
                };
                out.push(mirror);
            }
            out.push(point);
        }
        out
    }

    fn run(&self, rect: &Rect) -> Vec<Vec<ParetoPoint>> {
        (0..self.opts.budget).into_par_iter().map(|i| self.points(i, rect)).collect()
    }
}

/// Keeps, per bin, the point of least objective (ties: first sample wins).
fn merge(
    bins: &Bins,
    samples: Vec<Vec<ParetoPoint>>,
    key: impl Fn(&ParetoPoint) -> (f64, f64),
) -> Vec<FrontierBin> {
    let mut best: Vec<BTreeMap<SampleFamily, (f64, ParetoPoint)>> = vec![BTreeMap::new(); bins.len()];
    for p in samples.into_iter().flatten() {
        let (x, obj) = key(&p);
        let Some(b) = bins.bin_of(x) else { continue };
        let fam = match p.family {
            SampleFamily::Pair(..) => SampleFamily::Pair(0, 0),
            SampleFamily::AllButOne(_) => SampleFamily::AllButOne(0),
            SampleFamily::Single(_) => SampleFamily::Single(0),
            other => other,
        };
        let slot = best[b].entry(fam).or_insert_with(|| (f64::INFINITY, p.clone()));
        if obj < slot.0 {
            *slot = (obj, p);
        }
    }
    best.into_iter()
        .enumerate()
        .map(|(b, per)| {
            let mut candidates: Vec<(f64, ParetoPoint)> = per.into_values().collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (lo, hi) = bins.bounds(b);
            FrontierBin {
                lo,
                hi,
                best: candidates.first().map(|c| c.1.clone()),
                candidates: candidates.into_iter().map(|c| c.1).collect(),
            }
        })
        .collect()
}

fn sampling_class(class: FeasibleClass) -> Result<FeasibleClass> {
    match class {
        FeasibleClass::General => Err(Error::InvalidArgument(
            "frontiers are defined for the real and dissipative classes".into(),
        )),
        c => Ok(c),
    }
}

/// Upper bounds for the decay frontier: per frequency bin, the least-decaying
/// resonance over `opts.budget` sampled tuples of the given class.
pub fn sample_frontier(
    config: &CenterConfiguration,
    class: FeasibleClass,
    bins: &Bins,
    opts: &SamplingOptions,
) -> Result<Vec<FrontierBin>> {
    let class = sampling_class(class)?;
    let fmax = bins.lo().abs().max(bins.hi().abs());
    let delta = 1e-3 * fmax.max(1.0);
    let (re_min, negative) = match class {
        FeasibleClass::Real => (-delta, None),
        _ => (
            bins.lo().min(0.0) - delta,
            (bins.lo() < 0.0).then(|| (bins.lo(), bins.hi().min(0.0))),
        ),
    };
    let re_max = if class == FeasibleClass::Real { fmax } else { bins.hi() } + delta;
    let rect = Rect::new(re_min, re_max.max(re_min + delta), -opts.r_cap, 0.0)?;
    let sampler = Sampler::new(config, class, opts, negative);
    Ok(merge(bins, sampler.run(&rect), |p| (p.f, p.r)))
}

fn refine_from(
    config: &CenterConfiguration,
    c: Constraint,
    seeds: &[ParetoPoint],
) -> Option<Refinement> {
    let mut fallback = None;
    for seed in seeds {
        match refine_on(config, c, &seed.alpha, -seed.k.im) {
            Ok(mut r) if r.certificate.passed => {
                r.point.family = seed.family;
                if r.point.multiplicity == 1 {
                    return Some(r);
                }
                fallback.get_or_insert(r);
            }
            Ok(_) => log::debug!("refinement from {:?} not certified", seed.family),
            Err(e) => log::debug!("refinement from {:?} failed: {e}", seed.family),
        }
    }
    fallback
}

/// Continuation from a refined point to `target` in shrinking substeps.
fn march(
    config: &CenterConfiguration,
    constraint: &impl Fn(f64) -> Constraint,
    from: &ParetoPoint,
    target: f64,
) -> Option<Refinement> {
    let start = match from.source {
        PointSource::Refined => from.f,
        _ => return None,
    };
    let start = match constraint(start) {
        Constraint::Frequency(_) => start,
        Constraint::Energy(_) => energy_width(from.k).0,
    };
    for steps in [4usize, 16, 64] {
        let mut cur = from.clone();
        let mut ok = true;
        for i in 1..=steps {
            let x = start + (target - start) * i as f64 / steps as f64;
            match refine_on(config, constraint(x), &cur.alpha, -cur.k.im) {
                Ok(r) if r.certificate.passed => cur = r.point,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return refine_from(config, constraint(target), &[cur]);
        }
    }
    None
}

/// Refines each bin at its center, trying the bin's candidates as seeds in
/// order of increasing decay. A simple root is preferred: at a multiple root
/// the determinant is flat and the solve is correspondingly less accurate.
/// Bins where every candidate fails are retried by continuation from
/// refined neighbours.
pub fn refine_bins(
    config: &CenterConfiguration,
    bins: &[FrontierBin],
    constraint: impl Fn(f64) -> Constraint + Sync,
) -> Vec<Option<Refinement>> {
    let center = |b: &FrontierBin| 0.5 * (b.lo + b.hi);
    let mut out: Vec<Option<Refinement>> = bins
        .par_iter()
        .map(|bin| refine_from(config, constraint(center(bin)), &bin.candidates))
        .collect();
    loop {
        let mut progress = false;
        for b in 0..bins.len() {
            if out[b].is_some() {
                continue;
            }
            let neighbours: Vec<ParetoPoint> = [b.checked_sub(1), Some(b + 1)]
                .into_iter()
                .flatten()
                .filter_map(|j| out.get(j).and_then(|r| r.as_ref()).map(|r| r.point.clone()))
                .collect();
            let target = center(&bins[b]);
            let found = refine_from(config, constraint(target), &neighbours)
                .or_else(|| neighbours.iter().find_map(|p| march(config, &constraint, p, target)));
            if let Some(r) = found {
                out[b] = Some(r);
                progress = true;
            }
        }
        if !progress {
            return out;
        }
    }
}

/// Energy `Re k²` and width `2|Im k²|` of a resonance.
pub fn energy_width(k: Complex64) -> (f64, f64) {
    let k2 = k * k;
    (k2.re, 2.0 * k2.im.abs())
}

/// Sampled width frontier: per energy bin, the resonance of least width.
pub fn width_frontier(
    config: &CenterConfiguration,
    class: FeasibleClass,
    bins: &Bins,
    opts: &SamplingOptions,
) -> Result<Vec<FrontierBin>> {
    let class = sampling_class(class)?;
    if bins.lo() < 0.0 {
        return Err(Error::InvalidArgument("energy range must be nonnegative".into()));
    }
    let fmax = (bins.hi() + opts.r_cap * opts.r_cap).sqrt();
    let delta = 1e-3 * fmax.max(1.0);
    let re_min = if class == FeasibleClass::Real { -delta } else { -fmax - delta };
    let rect = Rect::new(re_min, fmax + delta, -opts.r_cap, 0.0)?;
    let sampler = Sampler::new(config, class, opts, None);
    Ok(merge(bins, sampler.run(&rect), |p| energy_width(p.k)))
}

/// A frontier row: a bin center and what was found there.
#[derive(Clone, Debug)]
pub enum RowStatus {
    Point {
        point: Box<ParetoPoint>,
        certificate: Option<Box<OptimalityCertificate>>,
    },
    Empty,
    Unachievable,
}

#[derive(Clone, Debug)]
pub struct FrontierRow {
    pub f: f64,
    pub status: RowStatus,
    pub oracle: Option<f64>,
}

fn num(x: f64) -> String {
    // adding 0.0 turns −0 into +0
    format!("{:.16e}", x + 0.0)
}

fn alpha_cell(e: ExtendedComplex) -> String {
    match e {
        ExtendedComplex::Infinity => String::new(),
        ExtendedComplex::Finite(z) if z.im == 0.0 => num(z.re),
        ExtendedComplex::Finite(z) => format!("{}{}{}i", num(z.re), if z.im < 0.0 { "" } else { "+" }, num(z.im)),
    }
}

/// CSV with 17 significant digits; ∞ strengths are blank. `with_oracle` adds
/// an `r_oracle` column.
pub fn frontier_csv(rows: &[FrontierRow], n: usize, with_oracle: bool) -> String {
    let mut out = String::from("f,r");
    for j in 1..=n {
        let _ = write!(out, ",alpha_{j}");
    }
    out.push_str(",k_re,k_im,mult,cert_residual,cert_xi");
    if with_oracle {
        out.push_str(",r_oracle");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&num(row.f));
        match &row.status {
            RowStatus::Point { point, certificate } => {
                let _ = write!(out, ",{}", num(point.r));
                for e in point.alpha.entries() {
                    let _ = write!(out, ",{}", alpha_cell(*e));
                }
                let _ = write!(out, ",{},{},{}", num(point.k.re), num(point.k.im), point.multiplicity);
                match certificate {
                    Some(c) => {
                        let _ = write!(out, ",{},{}", num(c.residual), num(c.xi));
                    }
                    None => out.push_str(",,"),
                }
            }
            other => {
                let tag = if matches!(other, RowStatus::Empty) { "empty" } else { "unachievable" };
                let _ = write!(out, ",{tag}{}", ",".repeat(n + 5));
            }
        }
        if with_oracle {
            match row.oracle {
                Some(r) => {
                    let _ = write!(out, ",{}", num(r));
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Sampled bins, their refinements, and the resulting rows.
#[derive(Clone, Debug)]
pub struct FrontierTable {
    pub bins: Vec<FrontierBin>,
    pub refined: Vec<Option<Refinement>>,
    pub rows: Vec<FrontierRow>,
}

/// Samples, refines each bin at its center, and assembles one row per bin:
/// the refined point when refinement succeeds and does not lose to the
/// sample, the sampled point otherwise.
pub fn frontier_table(
    config: &CenterConfiguration,
    class: FeasibleClass,
    bins: &Bins,
    opts: &SamplingOptions,
) -> Result<FrontierTable> {
    let sampled = sample_frontier(config, class, bins, opts)?;
    let refined = refine_bins(config, &sampled, Constraint::Frequency);
    let rows = sampled
        .iter()
        .zip(&refined)
        .enumerate()
        .map(|(b, (bin, refinement))| {
            let center = bins.center(b);
            let status = match (refinement, &bin.best) {
                (Some(r), _) => RowStatus::Point {
                    point: Box::new(r.point.clone()),
                    certificate: Some(Box::new(r.certificate.clone())),
                },
                (None, Some(p)) => RowStatus::Point {
                    point: Box::new(p.clone()),
                    certificate: certify(&p.alpha, config, p.k, CertMode::Ray, CERT_TOL).ok().map(Box::new),
                },
                (None, None) => RowStatus::Empty,
            };
            let f = match &status {
                RowStatus::Point { point, .. } => point.f,
                _ => center,
            };
            FrontierRow { f, status, oracle: None }
        })
        .collect();
    Ok(FrontierTable {
        bins: sampled,
        refined,
        rows,
    })
}

/// Decay of one center with strength `a`: `k = −4πi·a`.
pub fn one_center_resonance(a: Complex64) -> Complex64 {
    -I * FOUR_PI * a
}
