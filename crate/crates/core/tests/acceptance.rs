//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p pointres-core --test acceptance`. The process fails
//! if any criterion that is expected to hold fails; criteria marked
//! `known red` are reported but do not fail the run.

use std::f64::consts::PI;
use std::time::Instant;

use pointres_core::bounds::{strip_window, strip_window_is_full};
use pointres_core::optimize::puiseux_offsets;
use pointres_core::rootfinder::{multiplicity_at, winding_count_jittered};
use pointres_core::tetra::optimal_k;
use pointres_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
    known_red: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            known_red: false,
        }
    }
}

fn random_config(rng: &mut ChaCha8Rng, n: usize) -> CenterConfiguration {
    loop {
        let pts = (0..n)
            .map(|_| [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)])
            .collect();
        if let Ok(cfg) = CenterConfiguration::new(pts) {
            if n < 2 || cfg.min_distance() > 0.3 {
                return cfg;
            }
        }
    }
}

/// Newton on an analytic target to machine precision.
fn newton(target: &DetTarget, mut z: Complex64) -> Complex64 {
    for _ in 0..60 {
        let s = target.sample(z);
        if s.derivative.norm() == 0.0 {
            break;
        }
        let step = s.value / s.derivative;
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

fn one_center() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = CenterConfiguration::new(vec![[0.3, -0.2, 0.1]]).unwrap();
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..20 {
        let a = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let expected = -4.0 * PI * I * a;
        let h = expected.norm() + 1.0;
        let w = SearchWindow::from_bounds(-h, h, -h, h).unwrap();
        let set = find_zeros(&StrengthTuple::from_complex(&[a]), &cfg, &w).unwrap();
        ok &= set.is_complete() && set.roots.len() == 1 && set.roots[0].multiplicity == 1;
        if let Some(r) = set.roots.first() {
            worst = worst.max((r.k - expected).norm());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome::new(
        ok && worst <= 1e-10 && secs < 1.0,
        format!("20 tuples, max |k − (−4πiα)| = {worst:.1e}, {secs:.3} s"),
    )
}

fn tetra_frontier(table: &FrontierTable, secs: f64) -> Outcome {
    let l = PI;
    // sampled upper bounds, compared at each point's own frequency
    let (mut gap_max, mut gap_min) = (0.0f64, 0.0f64);
    let mut empty = 0;
    for bin in &table.bins {
        match &bin.best {
            None => empty += 1,
            Some(p) => {
                if let Ok(o) = rmin_oracle(p.f, l) {
                    gap_max = gap_max.max(p.r - o);
                    gap_min = gap_min.min(p.r - o);
                }
            }
        }
    }
    // refined values at the 50 bin centers of each band
    let (mut r_err, mut a_err, mut cert_worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut missing = 0;
    for (bin, res) in table.bins.iter().zip(&table.refined) {
        let f = 0.5 * (bin.lo + bin.hi);
        let Some(res) = res else {
            missing += 1;
            continue;
        };
        r_err = r_err.max((res.point.r - rmin_oracle(f, l).unwrap()).abs());
        cert_worst = cert_worst.max(if res.certificate.passed { res.certificate.residual } else { f64::INFINITY });
        let opt = optimal_alpha_oracle(f, l).unwrap();
        let mut dist: Vec<f64> = res
            .point
            .alpha
            .entries()
            .iter()
            .map(|e| e.finite().map_or(f64::INFINITY, |z| (z - opt.value).norm()))
            .collect();
        dist.sort_by(f64::total_cmp);
        // all four entries on the four-center band, the two designated ones otherwise
        let designated = if opt.branch == Branch::Nmin4 { 4 } else { 2 };
        a_err = a_err.max(dist[designated - 1]);
    }
    let pass = empty == 0
        && gap_min >= -1e-9
        && gap_max <= 5e-3
        && missing == 0
        && r_err <= 1e-8
        && a_err <= 1e-8
        && cert_worst <= 1e-8
        && secs < 120.0;
    Outcome::new(
        pass,
        format!(
            "sampled gap ∈ [{gap_min:.1e}, {gap_max:.2e}], {empty} empty bins; refined |r − r_min| ≤ {r_err:.1e}, \
             designated |α − a⋆| ≤ {a_err:.1e}, cert ≤ {cert_worst:.1e}, {missing} unrefined; {secs:.1} s"
        ),
    )
}

fn multiplicity_ladder() -> Outcome {
    let l = PI;
    let f = 0.5;
    let cfg = tetra_vertices(l).unwrap();
    let a = ExtendedComplex::real(optimal_alpha_oracle(f, l).unwrap().value);
    let inf = ExtendedComplex::Infinity;
    let k = optimal_k(f, l).unwrap();
    let mut found = Vec::new();
    let mut ok = true;
    let mut slowest: f64 = 0.0;
    for (tuple, want) in [(vec![a, a, inf, inf], 1), (vec![a, a, a, inf], 2), (vec![a, a, a, a], 3)] {
        let t = Instant::now();
        let alpha = StrengthTuple::new(tuple);
        let target = DetTarget::new(&alpha, &cfg).unwrap();
        let m = multiplicity_at(&target, k, 1e-2).unwrap_or(0);
        let set = find_zeros(&alpha, &cfg, &SearchWindow::new(Rect::around(k, 0.05))).unwrap();
        let near: Vec<_> = set.roots.iter().filter(|r| (r.k - k).norm() < 1e-4).collect();
        let via_search = near.first().map_or(0, |r| r.multiplicity);
        slowest = slowest.max(t.elapsed().as_secs_f64());
        ok &= m == want && via_search == want && near.len() == 1;
        found.push(format!("{m}/{via_search}"));
    }
    Outcome::new(
        ok && slowest < 5.0,
        format!("contour/search multiplicities {} (want 1/2/3), slowest {slowest:.2} s", found.join(", ")),
    )
}

fn infinite_family() -> Outcome {
    let l = PI;
    let f = 0.5;
    let cfg = tetra_vertices(l).unwrap();
    let a = optimal_alpha_oracle(f, l).unwrap().value;
    let k = optimal_k(f, l).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut persist_ok, mut flagged) = (0.0f64, true, true);
    for trial in 0..20 {
        let mut slots = [0usize, 1, 2, 3];
        for i in (1..4).rev() {
            slots.swap(i, rng.random_range(0..=i));
        }
        let mut entries = vec![ExtendedComplex::real(a); 4];
        for &j in &slots[2..] {
            entries[j] = if rng.random::<f64>() < 0.3 {
                ExtendedComplex::Infinity
            } else {
                ExtendedComplex::real(rng.random_range(-2.0..2.0))
            };
        }
        let alpha = StrengthTuple::new(entries);
        worst = worst.max(det_gamma(&alpha, &cfg, k).unwrap().norm());
        let cert = certify(&alpha, &cfg, k, CertMode::Ray, 1e-8).unwrap();
        flagged &= slots[2..].iter().all(|&j| cert.vanishing[j]);
        let checks = persistence_check(&alpha, &cfg, &cert, 10, trial).unwrap();
        persist_ok &= checks.iter().all(|c| c.passed);
    }
    Outcome::new(
        worst <= 1e-9 && persist_ok && flagged,
        format!("20 tuples, max |det Γ(k)| = {worst:.1e}; arbitrary slots flagged vanishing: {flagged}; persistence: {persist_ok}"),
    )
}

/// Closed forms evaluated directly here, independent of the library's helpers.
fn closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut four, mut two) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let l = rng.random_range(0.5..3.0);
        let cfg = tetra_vertices(l).unwrap();
        let kappa = c(rng.random_range(-6.0..6.0), rng.random_range(-3.0..1.0));
        let big_a: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let alpha = StrengthTuple::from_real(&big_a.iter().map(|x| x / (4.0 * PI * l)).collect::<Vec<_>>());
        let lhs = (-4.0 * PI * l).powi(4) * det_gamma(&alpha, &cfg, kappa / l).unwrap();
        let e = (I * kappa).exp();
        let x: Vec<Complex64> = big_a.iter().map(|&a| I * kappa - a - e).collect();
        let rhs = x[0] * x[1] * x[2] * x[3]
            + e * (x[1] * x[2] * x[3] + x[0] * x[2] * x[3] + x[0] * x[1] * x[3] + x[0] * x[1] * x[2]);
        four = four.max((lhs - rhs).norm() / rhs.norm());

        let a2 = big_a[0];
        let pair = StrengthTuple::new(vec![
            ExtendedComplex::real(a2 / (4.0 * PI * l)),
            ExtendedComplex::Infinity,
            ExtendedComplex::real(a2 / (4.0 * PI * l)),
            ExtendedComplex::Infinity,
        ]);
        let lhs2 = (4.0 * PI * l).powi(2) * det_gamma(&pair, &cfg, kappa / l).unwrap();
        let rhs2 = (I * kappa - a2 - e) * (I * kappa - a2 + e);
        two = two.max((lhs2 - rhs2).norm() / rhs2.norm());
    }
    Outcome::new(
        four <= 1e-10 && two <= 1e-10,
        format!("1000 inputs each: four-center identity {four:.1e}, two-center factorization {two:.1e}"),
    )
}

fn faithfulness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let n = 2 + i % 4;
        let cfg = random_config(&mut rng, n);
        let vals: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let alpha = StrengthTuple::from_complex(&vals);
        let z = c(rng.random_range(-10.0..10.0), rng.random_range(-3.0..3.0));
        let ep = expand(&alpha, &cfg).unwrap();
        let lu = det_gamma(&alpha, &cfg, z).unwrap();
        worst = worst.max((ep.eval_det(z) - lu).norm() / lu.norm());
    }
    Outcome::new(worst <= 1e-9, format!("1000 (α, z), N ∈ 2..5: max relative deviation {worst:.1e}"))
}

fn random_box(rng: &mut ChaCha8Rng, upper: bool, left: bool) -> Rect {
    let x0 = rng.random_range(0.01..8.0);
    let w = rng.random_range(0.1..4.0);
    let y0 = if upper { rng.random_range(0.01..4.0) } else { -rng.random_range(0.5..4.0) };
    let h = if upper { rng.random_range(0.1..4.0) } else { rng.random_range(0.1..-y0) };
    let (a, b) = if left { (-x0 - w, -x0) } else { (x0, x0 + w) };
    Rect::new(a, b, y0, y0 + h).unwrap()
}

fn random_tuple(rng: &mut ChaCha8Rng, n: usize, dissipative: bool) -> StrengthTuple {
    StrengthTuple::new(
        (0..n)
            .map(|_| {
                if rng.random::<f64>() < 0.1 {
                    ExtendedComplex::Infinity
                } else {
                    let im = if dissipative && rng.random::<bool>() { -rng.random_range(0.0..0.5) } else { 0.0 };
                    ExtendedComplex::new(rng.random_range(-0.5..0.5), im)
                }
            })
            .collect(),
    )
}

fn no_zero_regions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut nonzero, mut mirror_bad, mut errors) = (0, 0, 0);
    for t in 0..200 {
        let dissipative = t < 100;
        let n = 1 + t % 5;
        let cfg = random_config(&mut rng, n);
        let alpha = random_tuple(&mut rng, n, dissipative);
        let target = DetTarget::new(&alpha, &cfg).unwrap();
        for b in 0..10 {
            let left = !dissipative && b % 2 == 1;
            let rect = random_box(&mut rng, true, left);
            match winding_count_jittered(&target, &rect, 1e-7) {
                Ok((0, _)) => {}
                Ok(_) => nonzero += 1,
                Err(_) => errors += 1,
            }
        }
        if !dissipative {
            for _ in 0..10 {
                let rect = random_box(&mut rng, false, false);
                let mirror = Rect::new(-rect.re_max, -rect.re_min, rect.im_min, rect.im_max).unwrap();
                match (winding_count(&target, &rect), winding_count(&target, &mirror)) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Ok(_), Ok(_)) => mirror_bad += 1,
                    _ => errors += 1,
                }
            }
        }
    }
    Outcome::new(
        nonzero == 0 && mirror_bad == 0 && errors == 0,
        format!(
            "1000 quadrant-I boxes (dissipative) + 1000 quadrant-I∪II boxes (real): {nonzero} nonzero windings; \
             1000 mirrored pairs: {mirror_bad} mismatches; {errors} contour errors"
        ),
    )
}

fn envelopes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut roots, mut violations, mut unresolved, mut tuples, mut clipped) = (0, 0, 0, 0, 0);
    for t in 0..200 {
        let n = 2 + t % 4;
        let cfg = random_config(&mut rng, n);
        let alpha = random_tuple(&mut rng, n, t % 2 == 0);
        let (red, sub) = reduce(&alpha, &cfg).unwrap();
        let Ok(bounds) = expand(&red, &sub).and_then(|ep| ep.strip_bounds()) else {
            continue;
        };
        tuples += 1;
        clipped += usize::from(!strip_window_is_full(&bounds, 50.0));
        let w = strip_window(&bounds, 50.0).unwrap();
        let rep = check_envelope(&alpha, &cfg, &w).unwrap();
        roots += rep.entries.len();
        violations += rep.violations.len();
        unresolved += rep.unresolved;
    }
    // the uniform envelope never exceeds the tetra frontier
    let cfg = tetra_vertices(PI).unwrap();
    let mut frontier_bad = 0;
    for i in 1..400 {
        let f = i as f64 * 0.005;
        if let Ok(r) = rmin_oracle(f, PI) {
            if uniform_envelope(&cfg, f).unwrap() > r {
                frontier_bad += 1;
            }
        }
    }
    Outcome::new(
        violations == 0 && unresolved == 0 && frontier_bad == 0,
        format!(
            "{tuples} tuples ({clipped} windows clipped at the overflow floor), {roots} zeros with |Re k| ≤ 50: \
             {violations} violations, {unresolved} unresolved; \
             tetra frontier below uniform envelope at {frontier_bad} of 399 frequencies"
        ),
    )
}

fn perturbation_simple() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let zeta = 1e-6;
    let (mut worst, mut tested) = (0.0f64, 0);
    while tested < 20 {
        let n = 1 + tested % 4;
        let cfg = random_config(&mut rng, n);
        let entries: Vec<ExtendedComplex> = (0..n)
            .map(|j| {
                if j > 0 && rng.random::<f64>() < 0.25 {
                    ExtendedComplex::Infinity
                } else {
                    ExtendedComplex::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.1))
                }
            })
            .collect();
        let alpha = StrengthTuple::new(entries);
        let w = SearchWindow::from_bounds(-4.0, 4.0, -4.0, 1.0).unwrap();
        let Ok(set) = find_zeros(&alpha, &cfg, &w) else { continue };
        let Some(root) = set.roots.iter().find(|r| r.multiplicity == 1) else { continue };
        let target = DetTarget::new(&alpha, &cfg).unwrap();
        let k = newton(&target, root.k);
        let v: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let cc = perturb_first_order(&alpha, &cfg, k, 1, &v).unwrap();
        // move along β: α_j + ζv_j on finite slots, −1/(ζv_j) on infinite ones
        let moved = StrengthTuple::new(
            alpha
                .entries()
                .iter()
                .zip(&v)
                .map(|(e, vj)| match e {
                    ExtendedComplex::Finite(a) => ExtendedComplex::Finite(a + zeta * vj),
                    ExtendedComplex::Infinity => ExtendedComplex::Finite(-1.0 / (zeta * vj)),
                })
                .collect(),
        );
        let kappa = newton(&DetTarget::new(&moved, &cfg).unwrap(), k + cc * zeta);
        worst = worst.max(((kappa - k) / zeta - cc).norm());
        tested += 1;
    }
    Outcome::new(worst <= 1e-3, format!("20 simple roots, max |(κ(ζ)−k)/ζ − C| = {worst:.1e} at ζ = 1e-6"))
}

fn perturbation_triple() -> Outcome {
    let l = PI;
    let f = 0.5;
    let zeta = 1e-6;
    let cfg = tetra_vertices(l).unwrap();
    let a = optimal_alpha_oracle(f, l).unwrap().value;
    let k = optimal_k(f, l).unwrap();
    let alpha = StrengthTuple::from_real(&[a; 4]);
    let v = [c(0.3, 0.7), c(-0.5, 0.2), c(0.9, -0.4), c(0.1, 0.6)];
    let cc = perturb_first_order(&alpha, &cfg, k, 3, &v).unwrap();
    let predicted = puiseux_offsets(cc, zeta, 3);
    let moved: Vec<Complex64> = v.iter().map(|vj| a + zeta * vj).collect();
    let found = find_zeros(
        &StrengthTuple::from_complex(&moved),
        &cfg,
        &SearchWindow::new(Rect::around(k, 1e-2)),
    );
    let roots: Vec<Complex64> = match &found {
        Ok(set) => set.roots.iter().filter(|r| (r.k - k).norm() < 1e-3).map(|r| r.k).collect(),
        Err(_) => Vec::new(),
    };
    let spread = roots.iter().map(|r| (r - k).norm()).fold(0.0, f64::max);
    let rel = predicted
        .iter()
        .map(|p| {
            let nearest = roots.iter().map(|r| (r - k - p).norm()).fold(f64::INFINITY, f64::min);
            nearest / p.norm()
        })
        .fold(0.0, f64::max);
    let mut out = Outcome::new(
        rel <= 1e-2,
        format!(
            "|C| = {:.1e} (all first minors vanish); branch relative error {rel:.1e}; {} zeros within {spread:.1e} \
             of k = {:.1}·ζ, against ζ^(1/3) = {:.1e}{}",
            cc.norm(),
            roots.len(),
            spread / zeta,
            zeta.powf(1.0 / 3.0),
            found.err().map_or(String::new(), |e| format!("; search: {e}"))
        ),
    );
    out.known_red = true;
    out
}

fn main() {
    let l = PI;
    let cfg = tetra_vertices(l).unwrap();
    let bins = Bins::new(0.0, 2.0, 100).unwrap();
    let opts = SamplingOptions {
        budget: 10_000,
        seed: 2024,
        ..Default::default()
    };

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 one-center exactness", one_center()));

    let t = Instant::now();
    let table = frontier_table(&cfg, FeasibleClass::Real, &bins, &opts).unwrap();
    let secs = t.elapsed().as_secs_f64();
    results.push(("2 tetrahedron frontier", tetra_frontier(&table, secs)));
    results.push(("3 multiplicity ladder", multiplicity_ladder()));
    results.push(("4 infinite optimizer family", infinite_family()));
    results.push(("5 closed-form identities", closed_forms()));
    results.push(("6 representation faithfulness", faithfulness()));
    results.push(("7 structural no-zero regions", no_zero_regions()));
    results.push(("8 envelope soundness", envelopes()));
    results.push(("9a perturbation law, simple roots", perturbation_simple()));
    results.push(("9b perturbation law, triple point", perturbation_triple()));

    let again = frontier_table(&cfg, FeasibleClass::Real, &bins, &opts).unwrap();
    let csv_a = frontier_csv(&table.rows, 4, false);
    let csv_b = frontier_csv(&again.rows, 4, false);
    results.push((
        "10 determinism",
        Outcome::new(
            csv_a == csv_b,
            format!("two seeded frontier runs, {} CSV bytes, identical: {}", csv_a.len(), csv_a == csv_b),
        ),
    ));

    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let red = if o.known_red && !o.pass { " (known red)" } else { "" };
        println!("{tag}  {name}: {}{red}", o.detail);
        if !o.pass && !o.known_red {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
