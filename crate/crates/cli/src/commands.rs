use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;

use pointres_core::bounds::strip_window;
use pointres_core::exppoly::StripBounds;
use pointres_core::{
    certify, check_envelope, energy_width, expand, find_zeros, frontier_csv, frontier_table, optimal_alpha_oracle, reduce,
    refine_on, resonances, rmin_oracle, roots_to_json, tetra_vertices, Bins, CenterConfiguration, CertMode, Complex64,
    Constraint, Error, FeasibleClass, FrontierRow, OptimalAlpha, OptimalityCertificate, ParetoPoint, Problem, Rect,
    RootRecord, RowStatus, SamplingOptions, SearchWindow, StrengthTuple, ZeroSet,
};
use serde_json::{json, Value};

use crate::output::{complex, emit, emit_json, num};
use crate::{Class, Command, Common, Failure, Format, Mode};

pub fn run(common: &Common, command: &Command) -> Result<(), Failure> {
    match command {
        Command::Solve => solve(common),
        Command::Frontier { f_range, class, r_cap } => frontier(common, *f_range, *class, *r_cap),
        Command::Certify { k, hint, mode } => certify_cmd(common, *k, *hint, *mode),
        Command::Refine { f, energy, r0 } => refine(common, *f, *energy, *r0),
        Command::TetraCheck { l, bands } => tetra_check(common, *l, *bands),
        Command::Bounds { half_width } => bounds(common, *half_width),
        Command::Expand => expand_cmd(common),
    }
}

fn load(common: &Common) -> Result<Problem, Failure> {
    let path = common
        .input
        .as_ref()
        .ok_or_else(|| Failure::Parse("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Problem::from_json(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn window_of(common: &Common) -> Result<Option<SearchWindow>, Failure> {
    let Some([a, b, c, d]) = common.window else {
        return Ok(None);
    };
    let mut w = SearchWindow::from_bounds(a, b, c, d).map_err(|e| Failure::Parse(e.to_string()))?;
    if let Some(tol) = common.tol {
        w.polish_tol = tol;
    }
    Ok(Some(w))
}

/// Strip window over `|Re k| ≤ 10` when the determinant has delays; a box
/// around the single zero otherwise.
fn default_window(p: &Problem) -> Result<Option<SearchWindow>, Failure> {
    let (red, sub) = reduce(&p.alpha, &p.config)?;
    if red.is_empty() {
        return Ok(None);
    }
    let ep = expand(&red, &sub).map_err(|e| Failure::Solver(format!("{e}; pass --window")))?;
    match ep.strip_bounds() {
        Ok(b) => Ok(Some(strip_window(&b, 10.0)?)),
        Err(Error::NoDelays) => {
            let a = red.finite_values()?[0];
            let h = (4.0 * PI * a).norm() + 1.0;
            Ok(Some(SearchWindow::from_bounds(-h, h, -h, h)?))
        }
        Err(e) => Err(e.into()),
    }
}

fn roots_csv(roots: &[RootRecord]) -> String {
    let mut out = String::from("re,im,mult,residual\n");
    for r in roots {
        let _ = writeln!(out, "{},{},{},{}", num(r.k.re), num(r.k.im), r.multiplicity, num(r.residual));
    }
    out
}

fn solve(common: &Common) -> Result<(), Failure> {
    let p = load(common)?;
    let window = match window_of(common)? {
        Some(w) => Some(w),
        None => default_window(&p)?,
    };
    let set = match window {
        Some(w) => resonances(&p.alpha, &p.config, &w)?,
        None => ZeroSet::default(),
    };
    match common.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(common.output.as_deref(), &roots_to_json(&set.roots))?,
        Format::Csv => emit(common.output.as_deref(), &roots_csv(&set.roots))?,
    }
    if set.unresolved.is_empty() {
        Ok(())
    } else {
        Err(Failure::Solver(format!("{} box(es) unresolved", set.unresolved.len())))
    }
}

/// Edge length when the centers form a regular tetrahedron.
fn tetra_edge(config: &CenterConfiguration) -> Option<f64> {
    (config.len() == 4 && config.is_equidistant(1e-12)).then(|| config.distance(0, 1))
}

fn frontier(common: &Common, (lo, hi): (f64, f64), class: Class, r_cap: f64) -> Result<(), Failure> {
    let p = load(common)?;
    let bins = Bins::new(lo, hi, common.grid.unwrap_or(100)).map_err(|e| Failure::Parse(e.to_string()))?;
    let opts = SamplingOptions {
        budget: common.budget,
        seed: common.seed,
        r_cap,
        ..Default::default()
    };
    let class = match class {
        Class::Real => FeasibleClass::Real,
        Class::Dissipative => FeasibleClass::Dissipative,
    };
    let table = frontier_table(&p.config, class, &bins, &opts)?;
    let mut rows = table.rows;
    let edge = tetra_edge(&p.config).filter(|_| class == FeasibleClass::Real);
    let mut deviation: Option<f64> = None;
    if let Some(l) = edge {
        for (b, row) in rows.iter_mut().enumerate() {
            let (blo, bhi) = bins.bounds(b);
            // nonzero multiples of π/L are never attained
            let first = (blo * l / PI).ceil().max(1.0);
            let last_bin = b + 1 == bins.len();
            let wall = first * PI / l;
            if wall >= blo && (wall < bhi || (last_bin && wall <= bhi)) {
                row.f = wall;
                row.status = RowStatus::Unachievable;
                continue;
            }
            if let RowStatus::Point { point, .. } = &row.status {
                let oracle = rmin_oracle(row.f, l)?;
                row.oracle = Some(oracle);
                let dev = (point.r - oracle).abs();
                deviation = Some(deviation.map_or(dev, |d: f64| d.max(dev)));
            }
        }
    }
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut text = frontier_csv(&rows, p.config.len(), edge.is_some());
            if edge.is_some() {
                let points = rows.iter().filter(|r| r.oracle.is_some()).count();
                let _ = writeln!(
                    text,
                    "# max |r - r_oracle| = {} over {points} bins",
                    deviation.map_or_else(|| "nan".to_owned(), num)
                );
            }
            emit(common.output.as_deref(), &text)
        }
        Format::Json => {
            let body: Vec<Value> = rows.iter().map(row_json).collect();
            emit_json(
                common.output.as_deref(),
                &json!({"rows": body, "max_oracle_deviation": deviation}),
            )
        }
    }
}

fn point_json(point: &ParetoPoint) -> Value {
    json!({
        "f": point.f,
        "r": point.r,
        "alpha": point.alpha,
        "k": complex(point.k),
        "mult": point.multiplicity,
        "source": point.source,
        "family": point.family,
    })
}

fn row_json(row: &FrontierRow) -> Value {
    match &row.status {
        RowStatus::Point { point, certificate } => json!({
            "f": row.f,
            "status": "point",
            "point": point_json(point),
            "certificate": certificate.as_deref().map(certificate_json),
            "r_oracle": row.oracle,
        }),
        RowStatus::Empty => json!({"f": row.f, "status": "empty"}),
        RowStatus::Unachievable => json!({"f": row.f, "status": "unachievable"}),
    }
}

fn certificate_json(c: &OptimalityCertificate) -> Value {
    let minors: Vec<Value> = c
        .minors
        .iter()
        .zip(&c.vanishing)
        .zip(&c.sign_ok)
        .map(|((m, v), s)| json!({"re": m.re, "im": m.im, "vanishing": v, "sign_ok": s}))
        .collect();
    json!({
        "k": complex(c.k),
        "mode": c.mode,
        "xi": c.xi,
        "residual": c.residual,
        "det_residual": c.det_residual,
        "minors": minors,
        "passed": c.passed,
    })
}

/// Nearest located resonance to `hint`, searching outward.
fn nearest_root(p: &Problem, hint: Complex64) -> Result<Complex64, Failure> {
    for h in [0.1, 0.5, 2.0] {
        let w = SearchWindow::new(Rect::around(hint, h));
        let Ok(set) = find_zeros(&p.alpha, &p.config, &w) else { continue };
        if let Some(r) = set.roots.iter().min_by(|a, b| (a.k - hint).norm().total_cmp(&(b.k - hint).norm())) {
            return Ok(r.k);
        }
    }
    Err(Failure::Solver(format!("no resonance found near {hint}")))
}

fn certify_cmd(common: &Common, k: Option<Complex64>, hint: Option<Complex64>, mode: Mode) -> Result<(), Failure> {
    let p = load(common)?;
    let k = match (k, hint) {
        (Some(k), _) => k,
        (None, Some(h)) => nearest_root(&p, h)?,
        (None, None) => return Err(Failure::Solver("no resonance given: pass --k or --hint".into())),
    };
    let mode = match mode {
        Mode::Ray => CertMode::Ray,
        Mode::Line => CertMode::Line,
    };
    let cert = certify(&p.alpha, &p.config, k, mode, common.tol.unwrap_or(1e-8))?;
    emit_json(common.output.as_deref(), &certificate_json(&cert))?;
    if cert.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("certificate failed: residual {:e}", cert.residual)))
    }
}

/// Decay of the input tuple's resonance closest to frequency `f`.
fn seed_decay(p: &Problem, f: f64) -> f64 {
    let Ok(w) = SearchWindow::from_bounds(f - 1.0, f + 1.0, -3.0, 0.0) else {
        return 0.5;
    };
    resonances(&p.alpha, &p.config, &w)
        .ok()
        .and_then(|set| {
            set.roots
                .iter()
                .min_by(|a, b| (a.k.re - f).abs().total_cmp(&(b.k.re - f).abs()))
                .map(|r| -r.k.im)
        })
        .unwrap_or(0.5)
}

fn refine(common: &Common, f: Option<f64>, energy: Option<f64>, r0: Option<f64>) -> Result<(), Failure> {
    let p = load(common)?;
    let (constraint, f_seed) = match (f, energy) {
        (Some(f), _) => (Constraint::Frequency(f), f),
        (None, Some(e)) => (Constraint::Energy(e), e.max(0.0).sqrt()),
        (None, None) => return Err(Failure::Parse("pass --f or --energy".into())),
    };
    let r0 = r0.unwrap_or_else(|| seed_decay(&p, f_seed));
    let res = refine_on(&p.config, constraint, &p.alpha, r0)?;
    let (energy, width) = energy_width(res.point.k);
    let mut body = point_json(&res.point);
    body["energy"] = json!(energy);
    body["width"] = json!(width);
    body["iterations"] = json!(res.iterations);
    body["certificate"] = certificate_json(&res.certificate);
    emit_json(common.output.as_deref(), &body)?;
    if res.certificate.passed {
        Ok(())
    } else {
        Err(Failure::Check("refined point fails its certificate".into()))
    }
}

struct CheckRow {
    f: f64,
    oracle: f64,
    solver: Option<f64>,
    dalpha: Option<f64>,
    cert: Option<f64>,
}

/// Largest distance to `a⋆` over the entries the optimum prescribes: all four
/// on the four-center band, the two closest on the two-center band.
fn designated_deviation(alpha: &StrengthTuple, opt: OptimalAlpha) -> f64 {
    let mut d: Vec<f64> = alpha
        .entries()
        .iter()
        .map(|e| e.finite().map_or(f64::INFINITY, |z| (z - opt.value).norm()))
        .collect();
    d.sort_by(f64::total_cmp);
    d[opt.branch.centers() - 1]
}

fn tetra_check(common: &Common, l: Option<f64>, bands: usize) -> Result<(), Failure> {
    let l = match (&common.input, l) {
        (Some(_), _) => {
            let p = load(common)?;
            tetra_edge(&p.config).ok_or_else(|| Failure::Parse("input centers are not a regular tetrahedron".into()))?
        }
        (None, Some(l)) if l > 0.0 => l,
        (None, Some(l)) => return Err(Failure::Parse(format!("edge length {l} is not positive"))),
        (None, None) => PI,
    };
    let config = tetra_vertices(l)?;
    let per_band = common.grid.unwrap_or(50);
    let tol = common.tol.unwrap_or(1e-8);
    let opts = SamplingOptions {
        budget: common.budget,
        seed: common.seed,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for band in 0..bands {
        let bins = Bins::new(band as f64 * PI / l, (band + 1) as f64 * PI / l, per_band)
            .map_err(|e| Failure::Parse(e.to_string()))?;
        let table = frontier_table(&config, FeasibleClass::Real, &bins, &opts)?;
        for (b, refined) in table.refined.iter().enumerate() {
            let f = bins.center(b);
            let opt = optimal_alpha_oracle(f, l)?;
            rows.push(CheckRow {
                f,
                oracle: rmin_oracle(f, l)?,
                solver: refined.as_ref().map(|r| r.point.r),
                dalpha: refined.as_ref().map(|r| designated_deviation(&r.point.alpha, opt)),
                cert: refined.as_ref().map(|r| r.certificate.residual),
            });
        }
    }
    let cell = |x: Option<f64>| x.map(num).unwrap_or_default();
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut text = String::from("f,r_oracle,r_solver,max_dalpha,cert_residual\n");
            for r in &rows {
                let _ = writeln!(text, "{},{},{},{},{}", num(r.f), num(r.oracle), cell(r.solver), cell(r.dalpha), cell(r.cert));
            }
            emit(common.output.as_deref(), &text)?;
        }
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|r| json!({"f": r.f, "r_oracle": r.oracle, "r_solver": r.solver, "max_dalpha": r.dalpha, "cert_residual": r.cert}))
                .collect();
            emit_json(common.output.as_deref(), &Value::Array(body))?;
        }
    }
    let missing = rows.iter().filter(|r| r.solver.is_none()).count();
    if missing > 0 {
        return Err(Failure::Solver(format!("{missing} frequencies could not be refined")));
    }
    let bad = rows
        .iter()
        .filter(|r| {
            let dr = (r.solver.unwrap_or(f64::INFINITY) - r.oracle).abs();
            !(dr <= tol && r.dalpha.unwrap_or(f64::INFINITY) <= tol)
        })
        .count();
    if bad > 0 {
        return Err(Failure::Check(format!("{bad} frequencies deviate from the closed form by more than {tol:e}")));
    }
    Ok(())
}

fn constants_json(b: &StripBounds) -> Value {
    json!({
        "c11": b.c11, "c12": b.c12, "c21": b.c21, "c22": b.c22,
        "uniform_slope": b.uniform_slope, "uniform_c1": b.uniform_c1,
    })
}

fn bounds(common: &Common, half_width: f64) -> Result<(), Failure> {
    let p = load(common)?;
    let (red, sub) = reduce(&p.alpha, &p.config)?;
    let window = match window_of(common)? {
        Some(w) => w,
        None => match expand(&red, &sub)?.strip_bounds() {
            Ok(b) => strip_window(&b, half_width)?,
            Err(Error::NoDelays) => default_window(&p)?
                .ok_or_else(|| Failure::Solver("every strength is infinite: no zeros to check".into()))?,
            Err(e) => return Err(e.into()),
        },
    };
    let report = check_envelope(&p.alpha, &p.config, &window)?;
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "k": complex(e.k),
                "mult": e.multiplicity,
                "upper_margin": e.upper_margin,
                "lower_margin": e.lower_margin,
                "uniform_margin": e.uniform_margin,
            })
        })
        .collect();
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| json!({"k": complex(v.k), "kind": v.kind, "margin": v.margin}))
        .collect();
    let r = window.rect;
    let body = json!({
        "digest": report.digest,
        "window": [r.re_min, r.re_max, r.im_min, r.im_max],
        "constants": report.constants.as_ref().map(constants_json),
        "entries": entries,
        "violations": violations,
        "unresolved": report.unresolved,
        "notes": report.notes,
        "passed": report.passed(),
    });
    emit_json(common.output.as_deref(), &body)?;
    if !report.passed() {
        return Err(Failure::Check(format!("{} envelope violation(s)", report.violations.len())));
    }
    if report.unresolved > 0 {
        return Err(Failure::Solver(format!("{} box(es) unresolved", report.unresolved)));
    }
    Ok(())
}

fn expand_cmd(common: &Common) -> Result<(), Failure> {
    let p = load(common)?;
    let (red, sub) = reduce(&p.alpha, &p.config)?;
    let ep = expand(&red, &sub)?;
    let strips = ep.strip_bounds().ok();
    match common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let terms: Vec<Value> = ep
                .terms()
                .iter()
                .map(|t| json!({"q": t.q, "coeffs": t.coeffs.iter().map(|&c| complex(c)).collect::<Vec<_>>()}))
                .collect();
            emit_json(
                common.output.as_deref(),
                &json!({"n": ep.n(), "terms": terms, "strip": strips.as_ref().map(constants_json)}),
            )
        }
        Format::Csv => {
            let mut text = String::from("q,power,re,im\n");
            for t in ep.terms() {
                for (j, c) in t.coeffs.iter().enumerate() {
                    let _ = writeln!(text, "{},{j},{},{}", num(t.q), num(c.re), num(c.im));
                }
            }
            emit(common.output.as_deref(), &text)
        }
    }
}
