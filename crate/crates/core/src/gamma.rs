//! The matrix Γ_{α,Y}(z), its determinant, the regularized determinant in
//! β-coordinates, and first minors.
//!
//! # Normalization
//!
//! Determinants returned here are plain `det Γ` with no prefactor. The
//! exponential-polynomial form stores `D(z) = (−4π)^n det Γ(z)`, see
//! [`exppoly_scale`]. `D_a(b; z)` in the β-chart equals `det Γ_{α̃,Ỹ}(z)`
//! exactly at the base point, and `∂_{β_i} D_a(b; k)` equals the principal
//! minor `det Γ^{[i]}(k)` for finite `a_i`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{reduce, CenterConfiguration, ExtendedComplex, Point3, StrengthTuple};
use crate::linalg::CMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);
const FOUR_PI: f64 = 4.0 * PI;

/// Factor relating `det Γ` (n×n) to the exponential polynomial `D`.
pub fn exppoly_scale(n: usize) -> Complex64 {
    Complex64::new((-FOUR_PI).powi(n as i32), 0.0)
}

/// `G_z(x) = e^{iz|x|} / (4π|x|)`.
pub fn green_kernel(z: Complex64, x: Point3) -> Result<Complex64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(green_at(z, r))
}

#[inline]
pub(crate) fn green_at(z: Complex64, r: f64) -> Complex64 {
    (I * z * r).exp() / (FOUR_PI * r)
}

#[inline]
fn diag_entry(alpha: Complex64, z: Complex64) -> Complex64 {
    alpha - I * z / FOUR_PI
}

/// Γ_{α,Y}(z) for an all-finite tuple.
#[derive(Clone, Debug)]
pub struct GammaMatrix {
    alpha: Vec<Complex64>,
    config: CenterConfiguration,
    z: Complex64,
    matrix: CMatrix,
}

impl GammaMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn config(&self) -> &CenterConfiguration {
        &self.config
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn det(&self) -> Complex64 {
        self.matrix.det()
    }

    /// Principal minor with row/column `i` deleted.
    pub fn principal_minor(&self, i: usize) -> Result<Complex64> {
        let n = self.dim();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        Ok(self.matrix.principal_submatrix(i).det())
    }
}

/// Assembles Γ for a reduced (all finite) tuple.
pub fn build_gamma(alpha: &StrengthTuple, config: &CenterConfiguration, z: Complex64) -> Result<GammaMatrix> {
    if alpha.len() != config.len() {
        return Err(Error::LengthMismatch {
            alpha: alpha.len(),
            centers: config.len(),
        });
    }
    let alpha = alpha.finite_values()?;
    let matrix = gamma_matrix(&alpha, config, z);
    Ok(GammaMatrix {
        alpha,
        config: config.clone(),
        z,
        matrix,
    })
}

pub(crate) fn gamma_matrix(alpha: &[Complex64], config: &CenterConfiguration, z: Complex64) -> CMatrix {
    let n = alpha.len();
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = diag_entry(alpha[i], z);
        for j in i + 1..n {
            let g = -green_at(z, config.distance(i, j));
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
    }
    m
}

/// `∂_z Γ`: diagonal `−i/(4π)`, off-diagonal `−i e^{iz|y−y'|}/(4π)`.
pub(crate) fn gamma_z_derivative(n: usize, config: &CenterConfiguration, z: Complex64) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = -I / FOUR_PI;
        for j in i + 1..n {
            let r = config.distance(i, j);
            let g = -I * r * green_at(z, r);
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
    }
    m
}

/// `det Γ_{α̃,Ỹ}(z)`; infinite entries are removed first, and the empty
/// determinant is 1.
pub fn det_gamma(alpha: &StrengthTuple, config: &CenterConfiguration, z: Complex64) -> Result<Complex64> {
    let (a, y) = reduce(alpha, config)?;
    let vals = a.finite_values()?;
    Ok(gamma_matrix(&vals, &y, z).det())
}

/// Logarithmic derivative `det'/det = tr(Γ⁻¹ ∂_zΓ)`.
pub fn dz_log_det(alpha: &StrengthTuple, config: &CenterConfiguration, z: Complex64) -> Result<Complex64> {
    let (a, y) = reduce(alpha, config)?;
    let vals = a.finite_values()?;
    let n = vals.len();
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = gamma_matrix(&vals, &y, z);
    let lu = m.lu();
    let inv = lu.inverse().ok_or(Error::Singular(z))?;
    let cond = m.norm_one() * inv.norm_one();
    if cond > 1e12 {
        log::warn!("Γ(z) ill-conditioned at z = {z}: cond ≈ {cond:e}");
    }
    let dm = gamma_z_derivative(n, &y, z);
    Ok(trace_product(&inv, &dm))
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.dim();
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// Reusable evaluator of `det Γ` and its z-derivative along a contour.
#[derive(Clone, Debug)]
pub struct GammaEvaluator {
    alpha: Vec<Complex64>,
    config: CenterConfiguration,
}

/// `det Γ(z)`, `∂_z det Γ(z)`, and Hadamard's bound at one point.
#[derive(Clone, Copy, Debug)]
pub struct DetSample {
    pub value: Complex64,
    pub derivative: Complex64,
    pub hadamard: f64,
}

impl GammaEvaluator {
    pub fn new(alpha: &StrengthTuple, config: &CenterConfiguration) -> Result<Self> {
        let (a, y) = reduce(alpha, config)?;
        Ok(Self {
            alpha: a.finite_values()?,
            config: y,
        })
    }

    pub fn from_parts(alpha: Vec<Complex64>, config: CenterConfiguration) -> Self {
        debug_assert_eq!(alpha.len(), config.len());
        Self { alpha, config }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn config(&self) -> &CenterConfiguration {
        &self.config
    }

    pub fn matrix(&self, z: Complex64) -> CMatrix {
        gamma_matrix(&self.alpha, &self.config, z)
    }

    pub fn det(&self, z: Complex64) -> Complex64 {
        self.matrix(z).det()
    }

    pub fn sample(&self, z: Complex64) -> DetSample {
        let n = self.dim();
        if n == 0 {
            return DetSample {
                value: Complex64::new(1.0, 0.0),
                derivative: Complex64::new(0.0, 0.0),
                hadamard: 1.0,
            };
        }
        let m = self.matrix(z);
        let hadamard = m.hadamard_bound();
        let lu = m.lu();
        let value = lu.det();
        let derivative = match lu.inverse() {
            Some(inv) => value * trace_product(&inv, &gamma_z_derivative(n, &self.config, z)),
            None => adjugate_derivative(&m, &gamma_z_derivative(n, &self.config, z)),
        };
        DetSample {
            value,
            derivative,
            hadamard,
        }
    }
}

/// Jacobi's formula through cofactors, valid at singular points.
fn adjugate_derivative(m: &CMatrix, dm: &CMatrix) -> Complex64 {
    // d det = Σ_i det(m with row i replaced by dm row i)
    let n = m.dim();
    (0..n)
        .map(|i| CMatrix::from_fn(n, |r, c| if r == i { dm[(r, c)] } else { m[(r, c)] }).det())
        .sum()
}

/// β-coordinates around a base tuple `a`: `β_j = α_j` where `a_j` is finite,
/// `β_j = −1/α_j` where `a_j = ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaChart {
    base: StrengthTuple,
    finite: Vec<usize>,
    infinite: Vec<usize>,
}

impl BetaChart {
    pub fn new(base: StrengthTuple) -> Self {
        let finite = (0..base.len()).filter(|&j| !base.get(j).is_infinite()).collect();
        let infinite = base.infinity_pattern();
        Self { base, finite, infinite }
    }

    pub fn base(&self) -> &StrengthTuple {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// n(a): number of finite base entries.
    pub fn n_finite(&self) -> usize {
        self.finite.len()
    }

    pub fn is_infinite_slot(&self, j: usize) -> bool {
        self.base.get(j).is_infinite()
    }

    /// Base point `b`: `a_j` on finite slots, 0 on infinite ones.
    pub fn base_point(&self) -> Vec<Complex64> {
        self.base.entries().iter().map(|e| e.finite().unwrap_or_default()).collect()
    }

    pub fn beta_of(&self, alpha: &StrengthTuple) -> Result<Vec<Complex64>> {
        if alpha.len() != self.len() {
            return Err(Error::LengthMismatch {
                alpha: alpha.len(),
                centers: self.len(),
            });
        }
        (0..self.len())
            .map(|j| match (self.is_infinite_slot(j), alpha.get(j)) {
                (false, ExtendedComplex::Finite(z)) => Ok(z),
                (false, ExtendedComplex::Infinity) => Err(Error::OutsideChart(j)),
                (true, ExtendedComplex::Infinity) => Ok(Complex64::new(0.0, 0.0)),
                (true, ExtendedComplex::Finite(z)) if z == Complex64::new(0.0, 0.0) => Err(Error::OutsideChart(j)),
                (true, ExtendedComplex::Finite(z)) => Ok(-1.0 / z),
            })
            .collect()
    }

    pub fn alpha_of(&self, beta: &[Complex64]) -> StrengthTuple {
        StrengthTuple::new(
            (0..self.len())
                .map(|j| {
                    if !self.is_infinite_slot(j) {
                        ExtendedComplex::Finite(beta[j])
                    } else if beta[j] == Complex64::new(0.0, 0.0) {
                        ExtendedComplex::Infinity
                    } else {
                        ExtendedComplex::Finite(-1.0 / beta[j])
                    }
                })
                .collect(),
        )
    }

    /// Finite slots first, then infinite ones; determinants are invariant
    /// under this simultaneous row/column permutation.
    fn order(&self) -> Vec<usize> {
        self.finite.iter().chain(&self.infinite).copied().collect()
    }

    fn check(&self, beta: &[Complex64], config: &CenterConfiguration) -> Result<()> {
        if config.len() != self.len() || beta.len() != self.len() {
            return Err(Error::LengthMismatch {
                alpha: beta.len(),
                centers: config.len(),
            });
        }
        Ok(())
    }

    /// The block matrix whose determinant times (−1)^n is `D_a(β; z)`.
    fn block_matrix(&self, beta: &[Complex64], config: &CenterConfiguration, z: Complex64) -> CMatrix {
        let order = self.order();
        let n = self.n_finite();
        CMatrix::from_fn(order.len(), |r, c| {
            let (i, j) = (order[r], order[c]);
            if r < n {
                if r == c {
                    I * z / FOUR_PI - beta[i]
                } else {
                    green_at(z, config.distance(i, j))
                }
            } else if r == c {
                I * z * beta[i] / FOUR_PI + 1.0
            } else {
                beta[i] * green_at(z, config.distance(i, j))
            }
        })
    }

    fn sign(&self) -> f64 {
        if self.n_finite().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// `D_a(β; z)` from the β-chart block determinant.
pub fn regularized_det(
    chart: &BetaChart,
    beta: &[Complex64],
    config: &CenterConfiguration,
    z: Complex64,
) -> Result<Complex64> {
    chart.check(beta, config)?;
    Ok(chart.block_matrix(beta, config, z).det() * chart.sign())
}

/// `∂_{β_i} D_a(β; z)`.
///
/// For a finite slot this is minus the diagonal cofactor of the block matrix;
/// for an infinite slot, `D_a` is affine in row `i` and the derivative is the
/// determinant with that row replaced by its `β_i`-coefficient. At the base
/// point these are the principal minor `det Γ^{[i]}` and the bordered
/// determinant with corner `ik/(4π)`, respectively.
pub fn first_minor(
    chart: &BetaChart,
    beta: &[Complex64],
    config: &CenterConfiguration,
    z: Complex64,
    i: usize,
) -> Result<Complex64> {
    chart.check(beta, config)?;
    if i >= chart.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: chart.len(),
        });
    }
    let m = chart.block_matrix(beta, config, z);
    let order = chart.order();
    let pos = order.iter().position(|&j| j == i).expect("index in chart");
    let value = if pos < chart.n_finite() {
        -m.principal_submatrix(pos).det()
    } else {
        let n = m.dim();
        let replaced = CMatrix::from_fn(n, |r, c| {
            if r != pos {
                m[(r, c)]
            } else if c == pos {
                I * z / FOUR_PI
            } else {
                green_at(z, config.distance(i, order[c]))
            }
        });
        replaced.det()
    };
    Ok(value * chart.sign())
}

/// Bordered determinant for an infinite slot `i` at the base point, with an
/// arbitrary corner `c`; independent of `c` whenever `z` is a root.
pub fn bordered_minor(
    chart: &BetaChart,
    config: &CenterConfiguration,
    z: Complex64,
    i: usize,
    corner: Complex64,
) -> Result<Complex64> {
    if i >= chart.len() || !chart.is_infinite_slot(i) {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: chart.len(),
        });
    }
    let b = chart.base_point();
    let mut idx = chart.finite.clone();
    idx.push(i);
    let n = chart.n_finite();
    let m = CMatrix::from_fn(n + 1, |r, c| {
        let (p, q) = (idx[r], idx[c]);
        match (r == c, r == n) {
            (true, true) => corner,
            (true, false) => I * z / FOUR_PI - b[p],
            (false, _) => green_at(z, config.distance(p, q)),
        }
    });
    Ok(m.det() * chart.sign())
}

/// Hadamard bound of the matrix whose determinant is the `i`-th first minor
/// at the base point; the natural scale for deciding that a minor vanishes.
pub fn first_minor_scale(chart: &BetaChart, config: &CenterConfiguration, z: Complex64, i: usize) -> Result<f64> {
    if i >= chart.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: chart.len(),
        });
    }
    let b = chart.base_point();
    let mut idx: Vec<usize> = chart.finite.iter().copied().filter(|&j| j != i).collect();
    if chart.is_infinite_slot(i) {
        idx.push(i);
    }
    let m = CMatrix::from_fn(idx.len(), |r, c| {
        let (p, q) = (idx[r], idx[c]);
        if r == c {
            I * z / FOUR_PI - b[p]
        } else {
            green_at(z, config.distance(p, q))
        }
    });
    Ok(if m.dim() == 0 { 1.0 } else { m.hadamard_bound() })
}

/// All `N` first minors at the base point of the chart generated by `alpha`.
pub fn first_minors_at(alpha: &StrengthTuple, config: &CenterConfiguration, k: Complex64) -> Result<Vec<Complex64>> {
    let chart = BetaChart::new(alpha.clone());
    let b = chart.base_point();
    (0..alpha.len()).map(|i| first_minor(&chart, &b, config, k, i)).collect()
}
