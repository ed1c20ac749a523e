//! Small dense complex matrices and LU factorization with partial pivoting.
//!
//! Dimensions here are tiny (a handful of scattering centers), so everything
//! is stored row-major in a flat `Vec` and factored eagerly.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Matrix with row and column `k` removed.
    pub fn principal_submatrix(&self, k: usize) -> Self {
        let n = self.n;
        let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
        Self::from_fn(n - 1, |i, j| self[(keep[i], keep[j])])
    }

    /// Matrix restricted to the given (ordered) index set.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    /// Hadamard's bound: product of Euclidean row norms, an upper bound on |det|.
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
            .product()
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self.clone())
    }

    pub fn det(&self) -> Complex64 {
        match self.n {
            0 => ONE,
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => self.lu().det(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Packed LU factors `P A = L U` (unit lower `L`).
#[derive(Clone, Debug)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
    parity: f64,
    singular: bool,
}

impl Lu {
    pub fn factor(mut a: CMatrix) -> Self {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / pivot;
                a[(i, k)] = l;
                if l != ZERO {
                    for j in k + 1..n {
                        let u = a[(k, j)];
                        a[(i, j)] -= l * u;
                    }
                }
            }
        }
        Self {
            factors: a,
            perm,
            parity,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        if self.singular {
            return ZERO;
        }
        let n = self.factors.n;
        (0..n).fold(Complex64::new(self.parity, 0.0), |acc, i| acc * self.factors[(i, i)])
    }

    /// Solves `A x = b`; `None` when a zero pivot was met.
    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        if self.singular {
            return None;
        }
        let n = self.factors.n;
        let lu = &self.factors;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = lu[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = lu[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] /= lu[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let n = self.factors.n;
        let mut inv = CMatrix::zeros(n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = ZERO);
            e[j] = ONE;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Solves a small real square system by embedding it in the complex LU.
/// `a / b` without forming `|b|²`, which overflows for `|b| > 1e154`.
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if s == 0.0 || !s.is_finite() {
        return a / b;
    }
    (a / s) / (b / s)
}

pub fn solve_real(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = CMatrix::from_fn(n, |i, j| Complex64::new(a[i][j], 0.0));
    let rhs: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let lu = m.lu();
    let x = lu.solve(&rhs)?;
    if x.iter().any(|v| !v.re.is_finite()) {
        return None;
    }
    Some(x.into_iter().map(|v| v.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_of_permuted_triangular() {
        // rows of an upper triangular matrix swapped once
        let m = CMatrix::from_fn(3, |i, j| {
            let (i, j) = (if i == 0 { 1 } else if i == 1 { 0 } else { 2 }, j);
            if j >= i {
                c((i + j + 1) as f64, 0.5)
            } else {
                ZERO
            }
        });
        let expected = -(c(1.0, 0.5) * c(3.0, 0.5) * c(5.0, 0.5));
        assert!((m.det() - expected).norm() < 1e-12);
    }

    #[test]
    fn solve_and_inverse() {
        let m = CMatrix::from_fn(4, |i, j| {
            c(1.0 / (1.0 + i as f64 + j as f64), (i as f64 - j as f64) * 0.3) + if i == j { c(2.0, 0.0) } else { ZERO }
        });
        let inv = m.lu().inverse().unwrap();
        let id = m.mul(&inv);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { ONE } else { ZERO };
                assert!((id[(i, j)] - e).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let m = CMatrix::from_fn(3, |i, _| c(i as f64, 0.0));
        assert_eq!(m.det(), ZERO);
        assert!(m.lu().solve(&[ONE, ONE, ONE]).is_none());
    }

    #[test]
    fn empty_det_is_one() {
        assert_eq!(CMatrix::zeros(0).det(), ONE);
    }

    #[test]
    fn real_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_real(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }
}
