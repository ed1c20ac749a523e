//! Exponential-polynomial form of the determinant,
//! `D(z) = (−4π)^N det Γ(z) = Σ_l p_l(z) e^{izq_l}`, and logarithmic strips
//! that confine its zeros.
//!
//! `D` is the determinant of the matrix with diagonal `iz − 4πα_j` and
//! off-diagonal `e^{iz|y_j − y_j'|}/|y_j − y_j'|`. Each permutation in the
//! Leibniz sum contributes an exponential whose delay is the total distance
//! moved and a polynomial made of the fixed diagonal factors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{CenterConfiguration, StrengthTuple};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `N` accepted by [`expand`].
pub const MAX_EXPAND: usize = 8;

/// One `p_l(z) e^{izq_l}` term; coefficients in ascending powers of `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub q: f64,
    pub coeffs: Vec<Complex64>,
}

impl Term {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialPolynomial {
    terms: Vec<Term>,
    n: usize,
    diameter: f64,
    min_distance: f64,
    alpha: Vec<Complex64>,
}

/// Ascending-coefficient polynomial helpers.
fn poly_eval_derivatives(coeffs: &[Complex64], z: Complex64, m: usize) -> Vec<Complex64> {
    // out[s] = p^{(s)}(z), s = 0..=m, by repeated synthetic division
    let mut out = vec![ZERO; m + 1];
    let mut work: Vec<Complex64> = coeffs.to_vec();
    let mut fact = 1.0;
    for (s, slot) in out.iter_mut().enumerate() {
        if work.is_empty() {
            break;
        }
        if s > 0 {
            fact *= s as f64;
        }
        let deg = work.len() - 1;
        let mut acc = work[deg];
        let mut quotient = vec![ZERO; deg];
        for k in (0..deg).rev() {
            quotient[k] = acc;
            acc = acc * z + work[k];
        }
        *slot = acc * fact;
        work = quotient;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl ExponentialPolynomial {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Number of nonzero delays.
    pub fn nu(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    pub fn max_delay(&self) -> f64 {
        self.terms.last().map_or(0.0, |t| t.q)
    }

    /// `q_{ν−1}`, or `None` when ν = 0.
    pub fn second_delay(&self) -> Option<f64> {
        (self.terms.len() >= 2).then(|| self.terms[self.terms.len() - 2].q)
    }

    /// `D(z)` for `order = 0`, `D'(z)` for `order = 1`, and higher orders in
    /// general.
    pub fn eval(&self, z: Complex64, order: usize) -> Complex64 {
        self.derivatives(z, order)[order]
    }

    /// `[D(z), D'(z), …, D^{(m)}(z)]`.
    pub fn derivatives(&self, z: Complex64, m: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; m + 1];
        for t in &self.terms {
            let e = (I * z * t.q).exp();
            let p = poly_eval_derivatives(&t.coeffs, z, m);
            let iq = I * t.q;
            for (order, slot) in out.iter_mut().enumerate() {
                // Leibniz rule on p(z)·e^{iqz}
                let mut acc = ZERO;
                let mut iq_pow = Complex64::new(1.0, 0.0);
                for s in (0..=order).rev() {
                    acc += binomial(order, s) * p[s] * iq_pow;
                    iq_pow *= iq;
                }
                *slot += acc * e;
            }
        }
        out
    }

    /// `D` and `D'` together, plus the sum of term moduli as a scale.
    pub fn value_derivative_scale(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let mut v = ZERO;
        let mut d = ZERO;
        let mut scale = 0.0;
        for t in &self.terms {
            let e = (I * z * t.q).exp();
            let deg = t.coeffs.len() - 1;
            let mut p = t.coeffs[deg];
            let mut dp = ZERO;
            let mut abs_p = t.coeffs[deg].norm();
            let zn = z.norm();
            for k in (0..deg).rev() {
                dp = dp * z + p;
                p = p * z + t.coeffs[k];
                abs_p = abs_p * zn + t.coeffs[k].norm();
            }
            v += p * e;
            d += (dp + I * t.q * p) * e;
            scale += abs_p * e.norm();
        }
        (v, d, scale)
    }

    /// `D(z) / (−4π)^N`, comparable to `det Γ(z)`.
    pub fn eval_det(&self, z: Complex64) -> Complex64 {
        self.eval(z, 0) / crate::gamma::exppoly_scale(self.n)
    }

    /// Explicit constants of the two-sided logarithmic strip.
    pub fn strip_bounds(&self) -> Result<StripBounds> {
        if self.nu() == 0 {
            return Err(Error::NoDelays);
        }
        let n = self.n;
        let q_nu = self.max_delay();
        let q_prev = self.second_delay().unwrap_or(0.0);
        let two_n = 2f64.powi(n as i32);

        // upper strip: p_0 dominates above the curve
        let c11 = 2.0 / q_nu;
        let c_p: f64 = self.terms[1..].iter().map(Term::abs_sum).sum();
        let rho = self.alpha.iter().map(|a| 4.0 * PI * a.norm()).fold(0.0, f64::max);
        let r_big = 1f64.max(2.0 * rho).max((two_n * c_p).sqrt());
        let c12 = ((4.0 * two_n * c_p).ln() / q_nu).max(r_big + c11 * (r_big + 1.0).ln()).max(f64::MIN_POSITIVE);

        // lower strip: p_ν e^{izq_ν} dominates below the curve
        let dq = q_nu - q_prev;
        let c21 = n as f64 / dq;
        let c0: f64 = self.terms[..self.terms.len() - 1].iter().map(Term::abs_sum).sum();
        let top = trim(&self.terms[self.terms.len() - 1].coeffs);
        let d = top.len() - 1;
        let lead = top[d].norm();
        let cauchy = if d == 0 {
            0.0
        } else {
            1.0 + top[..d].iter().map(|c| c.norm() / lead).fold(0.0, f64::max)
        };
        let r_nu = 1f64.max(2.0 * cauchy);
        let b = c0 * 2f64.powi(d as i32) / lead;
        let a = n as f64 / (std::f64::consts::E * dq);
        let h = |s: f64| dq * s - n as f64 * (1.0 + a + s).ln() - b.ln();
        let s_star = largest_root(h, n as f64 / dq - 1.0 - a);
        let c22 = s_star.max(r_nu).max(f64::MIN_POSITIVE);

        let diam = self.diameter;
        Ok(StripBounds {
            c11,
            c12,
            c21,
            c22,
            uniform_slope: uniform_slope(n, diam),
            uniform_c1: uniform_c1_from_parts(n, diam, self.min_distance),
            max_delay: q_nu,
        })
    }
}

/// Largest root of `h(s) = Δq·s − N·ln(1+a+s) − ln B` on `[0, ∞)`, or 0 when
/// `h` is positive there. `h` is convex with its minimum at `N/Δq − 1 − a`.
fn largest_root(h: impl Fn(f64) -> f64, s_min: f64) -> f64 {
    let lo = s_min.max(0.0);
    if h(lo) >= 0.0 {
        return 0.0;
    }
    let mut hi = lo.max(1.0);
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    bisect(&h, lo, hi)
}

fn bisect(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // invariant h(lo) < 0 ≤ h(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn trim(coeffs: &[Complex64]) -> &[Complex64] {
    let mut d = coeffs.len();
    while d > 1 && coeffs[d - 1] == ZERO {
        d -= 1;
    }
    &coeffs[..d]
}

/// Constants of the logarithmic strips. Zeros `k` with `|Re k| = x` satisfy
/// `−c21·ln(x+1) − c22 ≤ Im k ≤ −c11·ln(x+1) + c12`; resonances of any tuple in
/// `(C₋ ∪ R ∪ {∞})^N` with `Re k > 0` satisfy
/// `−Im k ≥ uniform_slope·ln(Re k + 1) − uniform_c1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StripBounds {
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
    pub uniform_slope: f64,
    pub uniform_c1: f64,
    /// largest delay `q_ν`; `|D(z)|` grows like `e^{−q_ν Im z}` below the axis
    pub max_delay: f64,
}

impl StripBounds {
    pub fn upper(&self, re: f64) -> f64 {
        -self.c11 * (re.abs() + 1.0).ln() + self.c12
    }

    pub fn lower(&self, re: f64) -> f64 {
        -self.c21 * (re.abs() + 1.0).ln() - self.c22
    }
}

/// Y-only offset of the uniform envelope.
///
/// For `Re k = x > 0`, `Im k = −r ≤ 0` and `Im α_j ≤ 0`, the diagonal
/// `ik − 4πα_j` has modulus at least `x`, while each off-diagonal row sum is
/// at most `(N−1)e^{r·diam}/d_min`; diagonal dominance then forces
/// `r ≥ ln(x·d_min/(N−1))/diam`, which dominates the envelope with this offset.
/// Removing centers only shrinks `diam` and `N` and grows `d_min`, so the same
/// constant covers tuples with infinite entries.
pub fn uniform_c1(config: &CenterConfiguration) -> Result<f64> {
    let n = config.len();
    if n < 2 {
        return Err(Error::InvalidArgument("uniform envelope needs at least two centers".into()));
    }
    Ok(uniform_c1_from_parts(n, config.diameter(), config.min_distance()))
}

fn uniform_c1_from_parts(n: usize, diam: f64, d_min: f64) -> f64 {
    2.0 / (n as f64 * diam) * (1.0 + (n as f64 - 1.0) / d_min).ln()
}

/// `(2/(N·diam))·ln(|f|+1) − c1`, a lower bound on the decay of every
/// resonance with `Re k = f > 0` over tuples in `(C₋ ∪ R ∪ {∞})^N`.
pub fn uniform_envelope(config: &CenterConfiguration, f: f64) -> Result<f64> {
    let c1 = uniform_c1(config)?;
    Ok(uniform_slope(config.len(), config.diameter()) * (f.abs() + 1.0).ln() - c1)
}

pub fn uniform_slope(n: usize, diameter: f64) -> f64 {
    2.0 / (n as f64 * diameter)
}

/// Visits every permutation of `0..n` (Heap's algorithm) with its sign.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize], f64)) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    visit(&p, sign);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            sign = -sign;
            visit(&p, sign);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Permutation expansion of `D(z) = (−4π)^N det Γ(z)` for an all-finite tuple.
pub fn expand(alpha: &StrengthTuple, config: &CenterConfiguration) -> Result<ExponentialPolynomial> {
    let n = alpha.len();
    if n != config.len() {
        return Err(Error::LengthMismatch { alpha: n, centers: config.len() });
    }
    if n > MAX_EXPAND {
        return Err(Error::TooManyCenters { got: n, max: MAX_EXPAND });
    }
    let a = alpha.finite_values()?;
    expand_values(&a, config)
}

pub(crate) fn expand_values(a: &[Complex64], config: &CenterConfiguration) -> Result<ExponentialPolynomial> {
    let n = a.len();
    if n > MAX_EXPAND {
        return Err(Error::TooManyCenters { got: n, max: MAX_EXPAND });
    }
    // polynomial Π_{j ∈ mask} (iz − 4πα_j) for every subset
    let mut fixed_poly: Vec<Vec<Complex64>> = Vec::with_capacity(1 << n);
    fixed_poly.push(vec![Complex64::new(1.0, 0.0)]);
    for mask in 1usize..(1 << n) {
        let j = mask.trailing_zeros() as usize;
        let prev = &fixed_poly[mask & (mask - 1)];
        let root = -4.0 * PI * a[j];
        let mut next = vec![ZERO; prev.len() + 1];
        for (k, &c) in prev.iter().enumerate() {
            next[k] += c * root;
            next[k + 1] += c * I;
        }
        fixed_poly.push(next);
    }

    let mut entries: Vec<(f64, usize, f64)> = Vec::new();
    for_each_permutation(n, |p, sign| {
        let mut delay = 0.0;
        let mut weight = sign;
        let mut mask = 0usize;
        for (j, &pj) in p.iter().enumerate() {
            if pj == j {
                mask |= 1 << j;
            } else {
                let d = config.distance(j, pj);
                delay += d;
                weight /= d;
            }
        }
        entries.push((delay, mask, weight));
    });
    // deterministic order: by delay, then by enumeration rank
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));

    let tol = 1e-12 * n as f64 * config.diameter().max(1.0);
    let mut terms: Vec<Term> = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && entries[end].0 - entries[end - 1].0 <= tol {
            end += 1;
        }
        let group = &entries[start..end];
        let q = group.iter().map(|e| e.0).sum::<f64>() / group.len() as f64;
        let deg = group.iter().map(|e| fixed_poly[e.1].len()).max().unwrap_or(1);
        let mut coeffs = vec![ZERO; deg];
        let mut magnitude = vec![0.0; deg];
        for &(_, mask, w) in group {
            for (k, c) in fixed_poly[mask].iter().enumerate() {
                coeffs[k] += c * w;
                magnitude[k] += c.norm() * w.abs();
            }
        }
        for (c, m) in coeffs.iter_mut().zip(&magnitude) {
            if c.norm() <= 1e-13 * m {
                *c = ZERO;
            }
        }
        let coeffs = trim(&coeffs).to_vec();
        let cancelled = coeffs.iter().all(|c| *c == ZERO);
        if !cancelled || start == 0 {
            terms.push(Term {
                q: if start == 0 { 0.0 } else { q },
                coeffs,
            });
        }
        start = end;
    }
    Ok(ExponentialPolynomial {
        terms,
        n,
        diameter: config.diameter(),
        alpha: a.to_vec(),
        min_distance: config.min_distance(),
    })
}

impl Serialize for ExponentialPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a [Complex64]);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for c in self.0 {
                    seq.serialize_element(&[c.re, c.im])?;
                }
                seq.end()
            }
        }
        struct TermOut<'a>(&'a Term);
        impl Serialize for TermOut<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut st = s.serialize_struct("Term", 2)?;
                st.serialize_field("q", &self.0.q)?;
                st.serialize_field("coeffs", &Coeffs(&self.0.coeffs))?;
                st.end()
            }
        }
        struct Terms<'a>(&'a [Term]);
        impl Serialize for Terms<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_seq(self.0.iter().map(TermOut))
            }
        }
        let mut st = serializer.serialize_struct("ExponentialPolynomial", 1)?;
        st.serialize_field("terms", &Terms(&self.terms))?;
        st.end()
    }
}
