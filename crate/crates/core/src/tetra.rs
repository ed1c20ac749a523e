//! Closed forms for four centers at the vertices of a regular tetrahedron.
//!
//! In the scaled variables `A_j = 4πL·a_j`, `κ = Lz` and `X_j = iκ − A_j − e^{iκ}`,
//! `(−4πL)^4 det Γ = Π X_j + e^{iκ} Σ_j Π_{j'≠j} X_{j'}`. With all `A_j` equal
//! this is `X³(X + 4e^{iκ})`; the factor `X` carries the two-center optimum and
//! `X + 4e^{iκ}` the four-center one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::det_gamma;
use crate::geometry::{CenterConfiguration, ExtendedComplex, StrengthTuple};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance for recognizing `f = ±lπ/L`.
const BAND_EDGE_TOL: f64 = 1e-12;

/// Absolute tolerance for an entry to count as equal to `a⋆`.
pub const ASTAR_TOL: f64 = 1e-10;

pub fn tetra_vertices(l: f64) -> Result<CenterConfiguration> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("edge length must be positive, got {l}")));
    }
    let s = l / (2.0 * 2f64.sqrt());
    CenterConfiguration::new(vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]])
}

/// Number of centers needed at the optimum: 1 at `f = 0`, 2 or 4 on
/// alternating bands between multiples of `π/L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Nmin1,
    Nmin2,
    Nmin4,
}

impl Branch {
    pub fn centers(self) -> usize {
        match self {
            Branch::Nmin1 => 1,
            Branch::Nmin2 => 2,
            Branch::Nmin4 => 4,
        }
    }
}

/// Band of `f`, or `Unachievable` at nonzero multiples of `π/L`.
pub fn branch(f: f64, l: f64) -> Result<Branch> {
    if f == 0.0 {
        return Ok(Branch::Nmin1);
    }
    let x = l * f.abs() / PI;
    let nearest = x.round();
    if nearest >= 1.0 && (x - nearest).abs() <= BAND_EDGE_TOL * nearest {
        return Err(Error::Unachievable(f));
    }
    Ok(if (x.floor() as u64).is_multiple_of(2) {
        Branch::Nmin2
    } else {
        Branch::Nmin4
    })
}

pub fn nmin_classify(f: f64, l: f64) -> Result<usize> {
    branch(f, l).map(Branch::centers)
}

/// Minimal decay `r_min(f)` over real (extended) tuples.
pub fn rmin_oracle(f: f64, l: f64) -> Result<f64> {
    let lf = l * f;
    Ok(match branch(f, l)? {
        Branch::Nmin1 => 0.0,
        Branch::Nmin2 => (lf / lf.sin()).ln() / l,
        Branch::Nmin4 => (-lf / (3.0 * lf.sin())).ln() / l,
    })
}

/// The optimal strength: shared by all four centers on the four-center band,
/// required on two centers (the others free in `R̄`) on the two-center band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalAlpha {
    pub branch: Branch,
    pub value: f64,
}

pub fn optimal_alpha_oracle(f: f64, l: f64) -> Result<OptimalAlpha> {
    let b = branch(f, l)?;
    if b == Branch::Nmin1 {
        return Err(Error::InvalidArgument(
            "f = 0: the optimum k = 0 is attained by a single center with α = 0".into(),
        ));
    }
    let r = rmin_oracle(f, l)?;
    let lf = l * f;
    let value = r / (4.0 * PI) - f / lf.tan() / (4.0 * PI);
    Ok(OptimalAlpha { branch: b, value })
}

/// The extremal resonance `f − i·r_min(f)`.
pub fn optimal_k(f: f64, l: f64) -> Result<Complex64> {
    Ok(Complex64::new(f, -rmin_oracle(f, l)?))
}

/// `((−4πL)^4 det Γ_{a,Y}(κ/L), Π X_j + e^{iκ} Σ Π_{j'≠j} X_{j'})` on the unit
/// tetrahedron (both sides are independent of `L`).
pub fn det_identity(a_scaled: [f64; 4], kappa: Complex64) -> Result<(Complex64, Complex64)> {
    let l = 1.0;
    let cfg = tetra_vertices(l)?;
    let alpha: Vec<f64> = a_scaled.iter().map(|a| a / (4.0 * PI * l)).collect();
    let lhs = (-4.0 * PI * l).powi(4) * det_gamma(&StrengthTuple::from_real(&alpha), &cfg, kappa / l)?;
    let e = (I * kappa).exp();
    let x: Vec<Complex64> = a_scaled.iter().map(|&a| I * kappa - a - e).collect();
    let prod: Complex64 = x.iter().product();
    let sum: Complex64 = (0..4)
        .map(|j| (0..4).filter(|&i| i != j).map(|i| x[i]).product::<Complex64>())
        .sum();
    Ok((lhs, prod + e * sum))
}

/// Two active centers with equal scaled strength:
/// `((−4πL)^2 det Γ, (iκ − A − e^{iκ})(iκ − A + e^{iκ}))`.
pub fn det_identity_two(a_scaled: f64, kappa: Complex64) -> Result<(Complex64, Complex64)> {
    let cfg = CenterConfiguration::new(vec![[0.0; 3], [1.0, 0.0, 0.0]])?;
    let a = a_scaled / (4.0 * PI);
    let lhs = (4.0 * PI).powi(2) * det_gamma(&StrengthTuple::from_real(&[a, a]), &cfg, kappa)?;
    let e = (I * kappa).exp();
    Ok((lhs, (I * kappa - a_scaled - e) * (I * kappa - a_scaled + e)))
}

/// Multiplicity of the optimal resonance for an optimizer on the two-center
/// band: entries equal to `a⋆` number 2, 3 or 4, giving multiplicity 1, 2, 3.
pub fn optimum_multiplicity(alpha: &StrengthTuple, f: f64, l: f64) -> Result<usize> {
    if alpha.len() != 4 {
        return Err(Error::LengthMismatch {
            alpha: alpha.len(),
            centers: 4,
        });
    }
    let opt = optimal_alpha_oracle(f, l)?;
    if opt.branch != Branch::Nmin2 {
        return Err(Error::InvalidArgument(format!("f = {f} is not on a two-center band")));
    }
    let hits = alpha
        .entries()
        .iter()
        .filter(|e| match e {
            ExtendedComplex::Finite(z) => (z.re - opt.value).abs() <= ASTAR_TOL && z.im.abs() <= ASTAR_TOL,
            ExtendedComplex::Infinity => false,
        })
        .count();
    match hits {
        0 | 1 => Err(Error::InvalidArgument("tuple is not an optimizer: fewer than two entries equal a⋆".into())),
        h => Ok(h - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::expand;
    use crate::rootfinder::{find_zeros, multiplicity_at, DetTarget, SearchWindow};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R_HALF: f64 = 0.143_743_2;

    #[test]
    fn vertices() {
        let cfg = tetra_vertices(PI).unwrap();
        assert!((cfg.diameter() - PI).abs() < 1e-13 * PI);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((cfg.distance(i, j) - PI).abs() <= 1e-13 * PI);
                }
            }
        }
        assert!(tetra_vertices(0.0).is_err());
        let ep = expand(&StrengthTuple::from_real(&[0.0; 4]), &cfg).unwrap();
        let q: Vec<f64> = ep.terms().iter().map(|t| t.q / PI).collect();
        assert_eq!(q.len(), 4);
        for (got, want) in q.iter().zip([0.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn decay_oracle_values() {
        assert!((rmin_oracle(0.5, PI).unwrap() - R_HALF).abs() < 1e-7);
        assert!((rmin_oracle(0.5, PI).unwrap() - (PI / 2.0).ln() / PI).abs() < 1e-15);
        assert!((rmin_oracle(1.5, PI).unwrap() - (PI / 2.0).ln() / PI).abs() < 1e-14);
        assert_eq!(rmin_oracle(0.0, PI).unwrap(), 0.0);
        assert!(matches!(rmin_oracle(1.0, PI), Err(Error::Unachievable(_))));
        assert!(matches!(rmin_oracle(-2.0, PI), Err(Error::Unachievable(_))));
        assert_eq!(rmin_oracle(-0.7, PI).unwrap(), rmin_oracle(0.7, PI).unwrap());
    }

    #[test]
    fn classification() {
        assert_eq!(nmin_classify(0.0, PI).unwrap(), 1);
        assert_eq!(nmin_classify(0.5, PI).unwrap(), 2);
        assert_eq!(nmin_classify(1.5, PI).unwrap(), 4);
        assert_eq!(nmin_classify(2.5, PI).unwrap(), 2);
        assert_eq!(nmin_classify(-1.5, PI).unwrap(), 4);
        assert!(nmin_classify(1.0, PI).is_err());
    }

    #[test]
    fn alpha_oracle_values() {
        let a = optimal_alpha_oracle(1.5, PI).unwrap();
        assert_eq!(a.branch, Branch::Nmin4);
        assert!((a.value - (PI / 2.0).ln() / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((a.value - 0.011_438_7).abs() < 1e-7);
        let b = optimal_alpha_oracle(0.5, PI).unwrap();
        assert_eq!(b.branch, Branch::Nmin2);
        assert!((b.value - 0.011_438_7).abs() < 1e-7);
        assert!(optimal_alpha_oracle(0.0, PI).is_err());
        assert!(optimal_alpha_oracle(2.0, PI).is_err());
    }

    #[test]
    fn optimum_satisfies_branch_equations() {
        // four-center branch: A = iκ + 3e^{iκ}
        let k = optimal_k(1.5, PI).unwrap();
        let kappa = PI * k;
        let a = 4.0 * PI * PI * optimal_alpha_oracle(1.5, PI).unwrap().value;
        assert!((a - 0.451_582_7).abs() < 1e-7);
        assert!((I * kappa + 3.0 * (I * kappa).exp() - a).norm() < 1e-12);
        let (lhs, rhs) = det_identity([a; 4], kappa).unwrap();
        assert!(rhs.norm() < 1e-12 && lhs.norm() < 1e-10);

        // two-center branch: iκ − A − e^{iκ} = 0
        let kappa = Complex64::new(0.5 * PI, -0.451_582_7);
        let x = I * kappa - 0.451_582_7 - (I * kappa).exp();
        assert!(x.norm() < 1e-6);
    }

    #[test]
    fn identity_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let a = [(); 4].map(|_| rng.random_range(-3.0..3.0));
            let kappa = Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(-2.0..1.0));
            let (lhs, rhs) = det_identity(a, kappa).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
            let (l2, r2) = det_identity_two(a[0], kappa).unwrap();
            assert!((l2 - r2).norm() <= 1e-10 * (1.0 + l2.norm()));
        }
    }

    #[test]
    fn multiplicity_ladder_by_count() {
        let s = optimal_alpha_oracle(0.5, PI).unwrap().value;
        let m = |v: [f64; 4]| optimum_multiplicity(&StrengthTuple::from_real(&v), 0.5, PI);
        assert_eq!(m([s, s, 0.3, -0.7]).unwrap(), 1);
        assert_eq!(m([s, s, s, 0.3]).unwrap(), 2);
        assert_eq!(m([s, s, s, s]).unwrap(), 3);
        assert!(m([s, 0.1, 0.2, 0.3]).is_err());
        assert!(optimum_multiplicity(&StrengthTuple::from_real(&[s; 4]), 1.5, PI).is_err());
    }

    #[test]
    fn multiplicity_ladder_by_winding() {
        let cfg = tetra_vertices(PI).unwrap();
        let s = optimal_alpha_oracle(0.5, PI).unwrap().value;
        let k = optimal_k(0.5, PI).unwrap();
        for (v, want) in [([s, s, 0.3, -0.7], 1), ([s, s, s, 0.3], 2), ([s, s, s, s], 3)] {
            let alpha = StrengthTuple::from_real(&v);
            let t = DetTarget::new(&alpha, &cfg).unwrap();
            assert_eq!(multiplicity_at(&t, k, 0.05).unwrap(), want);
            let w = SearchWindow::from_bounds(k.re - 0.05, k.re + 0.05, k.im - 0.05, k.im + 0.05).unwrap();
            let set = find_zeros(&alpha, &cfg, &w).unwrap();
            assert_eq!(set.roots.len(), 1);
            assert_eq!(set.roots[0].multiplicity, want);
            assert!((set.roots[0].k - k).norm() < 1e-6);
        }
    }

    #[test]
    fn infinite_optimizer_family() {
        let cfg = tetra_vertices(PI).unwrap();
        let s = optimal_alpha_oracle(0.5, PI).unwrap().value;
        let k = optimal_k(0.5, PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let mut e: Vec<ExtendedComplex> = (0..2)
                .map(|_| {
                    if rng.random_bool(0.25) {
                        ExtendedComplex::Infinity
                    } else {
                        ExtendedComplex::real(rng.random_range(-1.0..1.0))
                    }
                })
                .collect();
            e.splice(0..0, [ExtendedComplex::real(s), ExtendedComplex::real(s)]);
            let d = det_gamma(&StrengthTuple::new(e), &cfg, k).unwrap();
            assert!(d.norm() <= 1e-9);
        }
    }
}
