//! Zeros of analytic functions in a rectangle: argument principle by phase
//! continuation, quadrisection until boxes isolate a single (possibly
//! multiple) zero, Newton polishing, and multiplicity re-verification.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{expand_values, ExponentialPolynomial, MAX_EXPAND};
use crate::gamma::{exppoly_scale, GammaEvaluator};
use crate::geometry::{reduce, CenterConfiguration, StrengthTuple};
use crate::linalg::cdiv;

const EPS: f64 = f64::EPSILON;

/// `f(z)`, `f'(z)` and an estimate of the rounding error in `f(z)`.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub value: Complex64,
    pub derivative: Complex64,
    pub noise: f64,
}

/// Something the root finder can evaluate.
pub trait AnalyticTarget: Sync {
    fn sample(&self, z: Complex64) -> Sample;

    /// `[f, f', …, f^{(m)}]` when available in closed form.
    fn derivatives(&self, _z: Complex64, _m: usize) -> Option<Vec<Complex64>> {
        None
    }
}

/// Closure-backed target with a relative noise model.
pub struct FnTarget<F, G> {
    f: F,
    df: G,
}

impl<F, G> FnTarget<F, G>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    G: Fn(Complex64) -> Complex64 + Sync,
{
    pub fn new(f: F, df: G) -> Self {
        Self { f, df }
    }
}

impl<F, G> AnalyticTarget for FnTarget<F, G>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    G: Fn(Complex64) -> Complex64 + Sync,
{
    fn sample(&self, z: Complex64) -> Sample {
        let value = (self.f)(z);
        Sample {
            value,
            derivative: (self.df)(z),
            noise: 1e-15 * (1.0 + z.norm()),
        }
    }
}

/// `det Γ_{α̃,Ỹ}(z)`, evaluated through the exponential polynomial when it is
/// available and through LU otherwise.
#[derive(Clone, Debug)]
pub struct DetTarget {
    repr: DetRepr,
    scale: Complex64,
}

#[derive(Clone, Debug)]
enum DetRepr {
    Constant,
    Exp(ExponentialPolynomial),
    Lu(GammaEvaluator),
}

impl DetTarget {
    pub fn new(alpha: &StrengthTuple, config: &CenterConfiguration) -> Result<Self> {
        let (a, y) = reduce(alpha, config)?;
        let vals = a.finite_values()?;
        Ok(Self::from_values(vals, y))
    }

    pub fn from_values(vals: Vec<Complex64>, config: CenterConfiguration) -> Self {
        let n = vals.len();
        let repr = if n == 0 {
            DetRepr::Constant
        } else if n <= MAX_EXPAND {
            DetRepr::Exp(expand_values(&vals, &config).expect("size checked"))
        } else {
            DetRepr::Lu(GammaEvaluator::from_parts(vals, config))
        };
        Self {
            repr,
            scale: Complex64::new(1.0, 0.0) / exppoly_scale(n),
        }
    }

    /// Forces the LU path, e.g. to cross-check the expansion.
    pub fn lu_only(alpha: &StrengthTuple, config: &CenterConfiguration) -> Result<Self> {
        let ev = GammaEvaluator::new(alpha, config)?;
        let scale = Complex64::new(1.0, 0.0) / exppoly_scale(ev.dim());
        Ok(Self {
            repr: if ev.dim() == 0 { DetRepr::Constant } else { DetRepr::Lu(ev) },
            scale,
        })
    }

    pub fn exppoly(&self) -> Option<&ExponentialPolynomial> {
        match &self.repr {
            DetRepr::Exp(ep) => Some(ep),
            _ => None,
        }
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        self.sample(z).value
    }
}

impl AnalyticTarget for DetTarget {
    fn sample(&self, z: Complex64) -> Sample {
        match &self.repr {
            DetRepr::Constant => Sample {
                value: Complex64::new(1.0, 0.0),
                derivative: Complex64::new(0.0, 0.0),
                noise: EPS,
            },
            DetRepr::Exp(ep) => {
                let (v, d, scale) = ep.value_derivative_scale(z);
                let s = self.scale.norm();
                Sample {
                    value: v * self.scale,
                    derivative: d * self.scale,
                    noise: 8.0 * EPS * (ep.n() as f64 + 1.0) * scale * s,
                }
            }
            DetRepr::Lu(ev) => {
                let s = ev.sample(z);
                Sample {
                    value: s.value,
                    derivative: s.derivative,
                    noise: 4.0 * EPS * ev.dim() as f64 * s.hadamard,
                }
            }
        }
    }

    fn derivatives(&self, z: Complex64, m: usize) -> Option<Vec<Complex64>> {
        match &self.repr {
            DetRepr::Exp(ep) => Some(ep.derivatives(z, m).into_iter().map(|d| d * self.scale).collect()),
            DetRepr::Constant => {
                let mut v = vec![Complex64::new(0.0, 0.0); m + 1];
                v[0] = Complex64::new(1.0, 0.0);
                Some(v)
            }
            DetRepr::Lu(_) => None,
        }
    }
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidWindow(format!("[{re_min}, {re_max}] × [{im_min}, {im_max}]")));
        }
        Ok(r)
    }

    /// Square of half-width `h` centered at `c`.
    pub fn around(c: Complex64, h: f64) -> Self {
        Self {
            re_min: c.re - h,
            re_max: c.re + h,
            im_min: c.im - h,
            im_max: c.im + h,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn grown(&self, factor: f64) -> Self {
        let (dw, dh) = (factor * self.width(), factor * self.height());
        Self {
            re_min: self.re_min - dw,
            re_max: self.re_max + dw,
            im_min: self.im_min - dh,
            im_max: self.im_max + dh,
        }
    }

    /// Counter-clockwise corners starting at the lower-left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// Search rectangle and solver controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub rect: Rect,
    pub max_depth: usize,
    /// Initial corner/split jitter as a fraction of the box size.
    pub jitter: f64,
    pub winding_tol: f64,
    pub m_max: usize,
    /// Boxes carrying several zeros are polished as one multiple zero once
    /// their diameter falls below this.
    pub coarse_tol: f64,
    /// Relative step tolerance of Newton polishing.
    pub polish_tol: f64,
}

impl SearchWindow {
    pub fn new(rect: Rect) -> Self {
        Self {
            rect,
            max_depth: 40,
            jitter: 1e-7,
            winding_tol: 1e-3,
            m_max: 4,
            coarse_tol: 1e-3 * rect.diameter(),
            polish_tol: 1e-10,
        }
    }

    pub fn from_bounds(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        Ok(Self::new(Rect::new(re_min, re_max, im_min, im_max)?))
    }
}

/// A located zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub k: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
    pub isolating_box: Rect,
}

/// Output of [`find_zeros`]: polished zeros plus boxes that could not be
/// resolved within the subdivision depth.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroSet {
    pub roots: Vec<RootRecord>,
    pub unresolved: Vec<(Rect, usize)>,
    /// Winding of the (possibly jittered) outer boundary.
    pub total_winding: usize,
}

impl ZeroSet {
    pub fn multiplicity_sum(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// Errors with [`Error::Unresolved`] when some box was not resolved.
    pub fn into_complete(self) -> Result<Vec<RootRecord>> {
        if self.unresolved.is_empty() {
            Ok(self.roots)
        } else {
            Err(Error::Unresolved(self.unresolved.len()))
        }
    }
}

#[derive(Serialize)]
struct RootJson {
    re: f64,
    im: f64,
    mult: usize,
    residual: f64,
}

/// `[{"re":..,"im":..,"mult":m,"residual":r},...]`.
pub fn roots_to_json(roots: &[RootRecord]) -> serde_json::Value {
    let rows: Vec<RootJson> = roots
        .iter()
        .map(|r| RootJson {
            re: r.k.re,
            im: r.k.im,
            mult: r.multiplicity,
            residual: r.residual,
        })
        .collect();
    serde_json::to_value(rows).expect("plain data")
}

#[derive(Clone, Copy, Debug)]
struct EdgePhase {
    phase: f64,
    /// min |f|/noise along the edge.
    min_snr: f64,
    max_abs: f64,
}

impl EdgePhase {
    fn combine(parts: &[(EdgePhase, f64)]) -> EdgePhase {
        EdgePhase {
            phase: parts.iter().map(|(e, s)| s * e.phase).sum(),
            min_snr: parts.iter().map(|(e, _)| e.min_snr).fold(f64::INFINITY, f64::min),
            max_abs: parts.iter().map(|(e, _)| e.max_abs).fold(0.0, f64::max),
        }
    }
}

const ZERO_SNR: f64 = 1e3;
/// Contour |f|/noise required before a verification winding is trusted.
const VERIFY_SNR: f64 = 1e5;

/// Continuation of `arg f` along the segment `a → b`.
fn edge_phase(target: &dyn AnalyticTarget, a: Complex64, b: Complex64) -> Result<EdgePhase> {
    let dz_total = b - a;
    let len = dz_total.norm();
    let mut s0 = target.sample(a);
    let snr = |s: &Sample| s.value.norm() / s.noise.max(f64::MIN_POSITIVE);
    if snr(&s0) <= ZERO_SNR {
        return Err(Error::ZeroOnBoundary(a));
    }
    let mut out = EdgePhase {
        phase: 0.0,
        min_snr: snr(&s0),
        max_abs: s0.value.norm(),
    };
    let mut t = 0.0;
    let mut h: f64 = 0.125;
    let h_min = 1e-13 * (1.0 + a.norm()) / len.max(f64::MIN_POSITIVE);
    while t < 1.0 {
        h = h.min(1.0 - t);
        let t1 = if t + h >= 1.0 { 1.0 } else { t + h };
        let z1 = if t1 == 1.0 { b } else { a + dz_total * t1 };
        let s1 = target.sample(z1);
        if snr(&s1) <= ZERO_SNR {
            return Err(Error::ZeroOnBoundary(z1));
        }
        let dz = z1 - (a + dz_total * t);
        let l0 = cdiv(s0.derivative, s0.value);
        let l1 = cdiv(s1.derivative, s1.value);
        let darg = cdiv(s1.value, s0.value).arg();
        let predicted = (0.5 * dz * (l0 + l1)).im;
        let ok = darg.abs() < PI / 2.0
            && (dz * l0).norm() <= 1.5
            && (dz * l1).norm() <= 1.5
            && (predicted - darg).abs() <= 0.25;
        if ok {
            out.phase += darg;
            out.min_snr = out.min_snr.min(snr(&s1));
            out.max_abs = out.max_abs.max(s1.value.norm());
            t = t1;
            s0 = s1;
            h *= 2.0;
        } else {
            h *= 0.5;
            if h < h_min {
                return Err(Error::ZeroOnBoundary(z1));
            }
        }
    }
    Ok(out)
}

fn contour_phase(target: &dyn AnalyticTarget, rect: &Rect) -> Result<EdgePhase> {
    let c = rect.corners();
    let mut parts = Vec::with_capacity(4);
    for i in 0..4 {
        parts.push((edge_phase(target, c[i], c[(i + 1) % 4])?, 1.0));
    }
    Ok(EdgePhase::combine(&parts))
}

fn phase_to_winding(phase: f64, tol: f64) -> Result<i64> {
    let w = phase / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > tol {
        return Err(Error::NonIntegerWinding(w));
    }
    Ok(r as i64)
}

/// Number of zeros (with multiplicity) of `target` inside `rect`.
pub fn winding_count(target: &dyn AnalyticTarget, rect: &Rect) -> Result<i64> {
    phase_to_winding(contour_phase(target, rect)?.phase, 1e-3)
}

/// Winding of `f = f_fn` with derivative `df` around `rect`.
pub fn winding_count_fn<F, G>(f: F, df: G, rect: &Rect) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    G: Fn(Complex64) -> Complex64 + Sync,
{
    winding_count(&FnTarget::new(f, df), rect)
}

/// `winding_count` that jitters the box outward on boundary zeros.
pub fn winding_count_jittered(target: &dyn AnalyticTarget, rect: &Rect, jitter: f64) -> Result<(i64, Rect)> {
    let mut eps = jitter;
    let mut last = Error::ZeroOnBoundary(rect.center());
    for _ in 0..8 {
        let r = jitter_rect(rect, eps);
        match contour_phase(target, &r).and_then(|p| phase_to_winding(p.phase, 1e-3)) {
            Ok(w) => return Ok((w, r)),
            Err(e @ (Error::ZeroOnBoundary(_) | Error::NonIntegerWinding(_))) => last = e,
            Err(e) => return Err(e),
        }
        eps *= 2.0;
    }
    Err(last)
}

fn jitter_rect(rect: &Rect, eps: f64) -> Rect {
    // corners move by (1+i)·ε·size; the first attempt is the box itself
    if eps == 0.0 {
        return *rect;
    }
    let s = rect.width().max(rect.height());
    Rect {
        re_min: rect.re_min - eps * s,
        re_max: rect.re_max + 0.7 * eps * s,
        im_min: rect.im_min - 0.6 * eps * s,
        im_max: rect.im_max + eps * s,
    }
}

#[derive(Clone, Copy, Debug)]
struct PendingBox {
    rect: Rect,
    winding: usize,
    max_abs: f64,
    depth: usize,
}

enum BoxOutcome {
    Root(RootRecord),
    Split(Vec<PendingBox>),
    Unresolved(Rect, usize),
}

/// All zeros in the window.
pub fn find_zeros_target(target: &dyn AnalyticTarget, window: &SearchWindow) -> Result<ZeroSet> {
    let mut attempt_jitter = 0.0;
    let mut outer = None;
    let mut last_err = None;
    for _ in 0..9 {
        let rect = jitter_rect(&window.rect, attempt_jitter);
        match contour_phase(target, &rect).and_then(|p| phase_to_winding(p.phase, window.winding_tol).map(|w| (w, p))) {
            Ok((w, p)) => {
                outer = Some((rect, w, p));
                break;
            }
            Err(e @ (Error::ZeroOnBoundary(_) | Error::NonIntegerWinding(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        attempt_jitter = if attempt_jitter == 0.0 { window.jitter } else { 2.0 * attempt_jitter };
    }
    let Some((rect, w, p)) = outer else {
        return Err(last_err.unwrap_or(Error::ZeroOnBoundary(window.rect.center())));
    };
    if w < 0 {
        return Err(Error::NonIntegerWinding(w as f64));
    }
    let mut out = ZeroSet {
        total_winding: w as usize,
        ..Default::default()
    };
    let mut level = vec![PendingBox {
        rect,
        winding: w as usize,
        max_abs: p.max_abs,
        depth: 0,
    }];
    while !level.is_empty() {
        let outcomes: Vec<BoxOutcome> = level.par_iter().map(|b| process_box(target, window, b)).collect();
        let mut next = Vec::new();
        for o in outcomes {
            match o {
                BoxOutcome::Root(r) => out.roots.push(r),
                BoxOutcome::Split(children) => next.extend(children),
                BoxOutcome::Unresolved(r, w) => out.unresolved.push((r, w)),
            }
        }
        level = next;
    }
    out.roots.sort_by(|a, b| a.k.re.total_cmp(&b.k.re).then(a.k.im.total_cmp(&b.k.im)));
    Ok(out)
}

fn process_box(target: &dyn AnalyticTarget, window: &SearchWindow, b: &PendingBox) -> BoxOutcome {
    let diam = b.rect.diameter();
    let tried = b.winding == 1 || (b.winding <= window.m_max && diam <= window.coarse_tol);
    if tried {
        if let Some(root) = polish(target, window, b) {
            return BoxOutcome::Root(root);
        }
    }
    if b.depth < window.max_depth {
        if let Some(children) = subdivide(target, window, b) {
            return BoxOutcome::Split(children.into_iter().filter(|c| c.winding > 0).collect());
        }
    }
    // cut lines cannot avoid the noise disc of a multiple zero: polish as one
    if !tried && b.winding <= window.m_max {
        if let Some(root) = polish(target, window, b) {
            return BoxOutcome::Root(root);
        }
    }
    BoxOutcome::Unresolved(b.rect, b.winding)
}

/// Split fractions tried in order; off-center so that symmetric zero sets do
/// not sit on the cut lines.
const SPLITS: [(f64, f64); 9] = [
    (0.5123, 0.5087),
    (0.3719, 0.6231),
    (0.6347, 0.3853),
    (0.2903, 0.2771),
    (0.7129, 0.7307),
    (0.4411, 0.3307),
    (0.5813, 0.6689),
    (0.2207, 0.5531),
    (0.7793, 0.4469),
];

fn subdivide(target: &dyn AnalyticTarget, window: &SearchWindow, b: &PendingBox) -> Option<Vec<PendingBox>> {
    let r = &b.rect;
    SPLITS.iter().find_map(|&(fx, fy)| {
        let xm = r.re_min + fx * r.width();
        let ym = r.im_min + fy * r.height();
        split_at(target, window, b, xm, ym).ok()
    })
}

#[allow(clippy::needless_range_loop)] // grid indices address both the point lattice and the edge arrays
fn split_at(target: &dyn AnalyticTarget, window: &SearchWindow, b: &PendingBox, xm: f64, ym: f64) -> Result<Vec<PendingBox>> {
    let r = &b.rect;
    let xs = [r.re_min, xm, r.re_max];
    let ys = [r.im_min, ym, r.im_max];
    let p = |i: usize, j: usize| Complex64::new(xs[i], ys[j]);
    let mut horiz = [[None; 3]; 2];
    let mut vert = [[None; 2]; 3];
    for i in 0..2 {
        for j in 0..3 {
            horiz[i][j] = Some(edge_phase(target, p(i, j), p(i + 1, j))?);
        }
    }
    for i in 0..3 {
        for j in 0..2 {
            vert[i][j] = Some(edge_phase(target, p(i, j), p(i, j + 1))?);
        }
    }
    let mut children = Vec::with_capacity(4);
    let mut total = 0i64;
    for i in 0..2 {
        for j in 0..2 {
            let ph = EdgePhase::combine(&[
                (horiz[i][j].unwrap(), 1.0),
                (vert[i + 1][j].unwrap(), 1.0),
                (horiz[i][j + 1].unwrap(), -1.0),
                (vert[i][j].unwrap(), -1.0),
            ]);
            let w = phase_to_winding(ph.phase, window.winding_tol)?;
            if w < 0 {
                return Err(Error::NonIntegerWinding(w as f64));
            }
            total += w;
            children.push(PendingBox {
                rect: Rect {
                    re_min: xs[i],
                    re_max: xs[i + 1],
                    im_min: ys[j],
                    im_max: ys[j + 1],
                },
                winding: w as usize,
                max_abs: ph.max_abs,
                depth: b.depth + 1,
            });
        }
    }
    if total != b.winding as i64 {
        return Err(Error::NonIntegerWinding(total as f64));
    }
    Ok(children)
}

fn polish(target: &dyn AnalyticTarget, window: &SearchWindow, b: &PendingBox) -> Option<RootRecord> {
    let m = b.winding;
    let k = if m == 1 {
        newton(target, b.rect.center(), &b.rect, window.polish_tol)?
    } else {
        newton_multiple(target, b.rect.center(), &b.rect, m, window.polish_tol)?
    };
    if !b.rect.contains(k) {
        return None;
    }
    let s = target.sample(k);
    let residual = s.value.norm();
    if residual > (1e-9 * b.max_abs).max(ZERO_SNR * s.noise) {
        return None;
    }
    // A winding-1 box already certifies one simple zero; the contour check is
    // what separates a true multiple zero from a tight cluster, and it may be
    // noise-limited near close neighbours.
    match verify_multiplicity(target, k, (4.0 * b.rect.diameter()).max(window.coarse_tol), window.polish_tol) {
        Some(v) if v == m => {}
        None if m == 1 => {}
        _ => return None,
    }
    Some(RootRecord {
        k,
        multiplicity: m,
        residual,
        isolating_box: b.rect,
    })
}

/// Newton-type iteration `z ← z − m·g/g'` from `start`. Stops at the noise
/// floor of `g`, on a tiny step, or when steps start growing (the iterate is
/// wandering inside the noise disc); fails if it leaves the fenced box.
fn newton_iterate(
    eval: impl Fn(Complex64) -> Option<(Complex64, Complex64, f64)>,
    start: Complex64,
    fence: &Rect,
    m: f64,
    tol: f64,
) -> Option<Complex64> {
    let mut z = start;
    let mut prev = f64::INFINITY;
    for _ in 0..60 {
        let (g, dg, noise) = eval(z)?;
        if g.norm() <= noise {
            return Some(z);
        }
        if dg.norm() == 0.0 {
            return None;
        }
        let step = m * cdiv(g, dg);
        if step.norm() > 2.0 * prev {
            return Some(z);
        }
        let next = z - step;
        if !fence.contains(next) || !next.re.is_finite() || !next.im.is_finite() {
            return None;
        }
        z = next;
        prev = step.norm();
        if prev <= tol * 1e-3 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    Some(z)
}

fn newton(target: &dyn AnalyticTarget, start: Complex64, rect: &Rect, tol: f64) -> Option<Complex64> {
    newton_iterate(
        |z| {
            let s = target.sample(z);
            Some((s.value, s.derivative, s.noise))
        },
        start,
        &rect.grown(0.5),
        1.0,
        tol,
    )
}

/// Modified Newton `z − m f/f'` to reach the cluster, then Newton on
/// `f^{(m−1)}` when derivatives are available.
fn newton_multiple(target: &dyn AnalyticTarget, start: Complex64, rect: &Rect, m: usize, tol: f64) -> Option<Complex64> {
    let fence = rect.grown(0.5);
    let z = newton_iterate(
        |z| {
            let s = target.sample(z);
            Some((s.value, s.derivative, ZERO_SNR * s.noise))
        },
        start,
        &fence,
        m as f64,
        tol,
    )?;
    if target.derivatives(z, m).is_none() {
        return Some(z);
    }
    newton_iterate(
        |z| target.derivatives(z, m).map(|d| (d[m - 1], d[m], 0.0)),
        z,
        &fence,
        1.0,
        tol,
    )
}

/// Winding on a square around `k`, grown from `10·tol·max(1,|k|)` until `|f|`
/// on the contour is well above its noise floor.
pub(crate) fn verify_multiplicity(target: &dyn AnalyticTarget, k: Complex64, max_radius: f64, tol: f64) -> Option<usize> {
    let mut rho = 10.0 * tol * k.norm().max(1.0);
    while rho <= max_radius.max(20.0 * tol) {
        if let Ok(ph) = contour_phase(target, &Rect::around(k, rho)) {
            if ph.min_snr >= VERIFY_SNR {
                return phase_to_winding(ph.phase, 1e-3).ok().and_then(|w| usize::try_from(w).ok());
            }
        }
        rho *= 2.0;
    }
    None
}

/// Multiplicity of a known zero, by the same adaptive contour.
pub fn multiplicity_at(target: &dyn AnalyticTarget, k: Complex64, max_radius: f64) -> Result<usize> {
    verify_multiplicity(target, k, max_radius, 1e-10).ok_or(Error::ZeroOnBoundary(k))
}

/// All zeros of `det Γ_{α̃,Ỹ}` in the window.
pub fn find_zeros(alpha: &StrengthTuple, config: &CenterConfiguration, window: &SearchWindow) -> Result<ZeroSet> {
    let target = DetTarget::new(alpha, config)?;
    find_zeros_target(&target, window)
}

/// Zeros in the closed lower half of the window. The search box is extended
/// slightly above `Im = 0` so that real zeros are interior; roots with
/// `|Im k|` at the polish tolerance are reported as real.
pub fn resonances(alpha: &StrengthTuple, config: &CenterConfiguration, window: &SearchWindow) -> Result<ZeroSet> {
    let target = DetTarget::new(alpha, config)?;
    resonances_target(&target, window)
}

pub fn resonances_target(target: &dyn AnalyticTarget, window: &SearchWindow) -> Result<ZeroSet> {
    let r = window.rect;
    if r.im_min >= 0.0 {
        return Err(Error::InvalidWindow("window does not reach the lower half-plane".into()));
    }
    let margin = 1e-3 * r.diameter();
    let top = if r.im_max.abs() <= margin { margin } else { r.im_max };
    let mut w = *window;
    w.rect = Rect { im_max: top, ..r };
    let mut set = find_zeros_target(target, &w)?;
    let real_tol = window.polish_tol.max(1e-9);
    set.roots.retain_mut(|root| {
        if root.k.im.abs() <= real_tol * root.k.norm().max(1.0) {
            root.k.im = 0.0;
        }
        root.k.im <= 0.0 && r.contains(root.k)
    });
    Ok(set)
}
