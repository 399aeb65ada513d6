//! Dispatch from the parsed configuration to library operations.

use std::fs;
use std::path::PathBuf;

use bbl_core::bbl::{
    admissible_h, analyze, deficit, deficit_lower_bound, discretization_error, distorted_bm, dubuc_fit,
    equality_diagnostics, quantitative_bm, quantitative_bm_from_measures, GridDensity,
};
use bbl_core::finsler::{
    backward_ball, forward_ball, homothety_test, minkowski_bm_deficit, polygon_minkowski_interpolation, svg_document,
    MinkowskiNorm, Polygon,
};
use bbl_core::fixtures::gap_samples;
use bbl_core::gap::{gap, quantitative_holder_check, GapInput};
use bbl_core::grid::Grid;
use bbl_core::ot::{marginal_violation, solve_entropic, solve_exact, wasserstein_bounds_check, TransportPlan, WeightedCloud, EXACT_PAIR_CAP};
use bbl_core::report::{fmt_f64, to_json, SCHEMA};
use bbl_core::sets::{convex_hull, measure};
use bbl_core::{Error, Exponent};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::inputs::{density, rasterize, shared_grid};
use crate::literal::{SetLiteral, Shape, SpaceSpec};
use crate::{
    BallsArgs, BblCommand, BmArgs, Command, DensityArgs, DistortedArgs, FinslerCommand, GapCommand, NormKind, OtArgs,
    OtCommand, OtMethod, Outcome, RunConfig, SweepArgs,
};

type Result<T> = std::result::Result<T, Error>;

pub fn run(config: &RunConfig) -> Result<Outcome> {
    match &config.command {
        Command::Bbl(BblCommand::Deficit(a)) => bbl_deficit(a),
        Command::Bbl(BblCommand::Bound(a)) => bbl_bound(a),
        Command::Bbl(BblCommand::Diagnose(a)) => bbl_diagnose(a),
        Command::Bbl(BblCommand::DubucFit(a)) => bbl_dubuc_fit(a),
        Command::Bbl(BblCommand::Bm(a)) => bbl_bm(a),
        Command::Bbl(BblCommand::DistortedBm(a)) => bbl_distorted(a),
        Command::Ot(OtCommand::Solve(a)) => ot_solve(a),
        Command::Finsler(FinslerCommand::Balls(a)) => finsler_balls(a),
        Command::Gap(GapCommand::Sweep(a)) => gap_sweep(a),
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `{schema, command}` followed by the fields of `body`.
fn report(command: &str, body: impl Serialize) -> Result<Map<String, Value>> {
    let mut m = match serde_json::to_value(body)? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    Ok(m)
}

fn emit_json(m: Map<String, Value>, out: &Option<PathBuf>) -> Result<()> {
    emit(&to_json(&Value::Object(m))?, out)
}

fn sets_only(lits: &[&SetLiteral]) -> Result<()> {
    if lits.iter().any(|l| l.scale != 1.0) {
        return Err(Error::Domain("the *scale suffix applies to densities, not sets".into()));
    }
    Ok(())
}

struct Triple {
    f: GridDensity,
    g: GridDensity,
    h: Option<GridDensity>,
}

fn load_triple(a: &DensityArgs) -> Result<Triple> {
    let mut lits = vec![&a.f, &a.g];
    lits.extend(a.h.as_ref());
    let grid: Grid = shared_grid(&lits, &SpaceSpec::euclidean(), a.grid.grid_h, &a.grid.origin)?;
    let o = &a.grid.origin;
    Ok(Triple {
        f: density(&a.f, &grid, o)?,
        g: density(&a.g, &grid, o)?,
        h: a.h.as_ref().map(|h| density(h, &grid, o)).transpose()?,
    })
}

fn h_or_admissible(t: &Triple, s: f64, p: Exponent) -> Result<GridDensity> {
    match &t.h {
        Some(h) => Ok(h.clone()),
        None => admissible_h(&t.f, &t.g, s, p),
    }
}

fn transport(mu: &WeightedCloud, nu: &WeightedCloud, method: OtMethod, epsilon: f64, max_iter: usize) -> Result<(TransportPlan, Value)> {
    let exact = match method {
        OtMethod::Exact => true,
        OtMethod::Entropic => false,
        OtMethod::Auto => mu.len() * nu.len() <= EXACT_PAIR_CAP,
    };
    let (plan, mut info) = if exact {
        (solve_exact(mu, nu)?, json!({"method": "exact"}))
    } else {
        let (plan, rep) = solve_entropic(mu, nu, epsilon, max_iter, 1e-10)?;
        (plan, json!({"method": "entropic", "sinkhorn": rep}))
    };
    info["cost"] = json!(plan.cost);
    info["marginal_violation"] = json!(marginal_violation(&plan));
    info["split_mass_fraction"] = json!(plan.split_mass_fraction());
    Ok((plan, info))
}

fn bbl_deficit(a: &DensityArgs) -> Result<Outcome> {
    let t = load_triple(a)?;
    let h = h_or_admissible(&t, a.s, a.p)?;
    let (plan, info) = transport(&t.f.cloud()?, &t.g.cloud()?, a.ot, a.epsilon, 10_000)?;
    let mut rep = analyze(&t.f, &t.g, &h, a.s, a.p, &plan)?;
    if let Some(tol) = a.tol {
        rep.accepted = rep.margin >= -tol;
    }
    let accepted = rep.accepted;
    let mut m = report("bbl deficit", &rep)?;
    m.insert("transport".into(), info);
    m.insert("h_source".into(), json!(if t.h.is_some() { "input" } else { "admissible" }));
    m.insert("tolerance".into(), json!(a.tol.unwrap_or(rep.discretization_error)));
    emit_json(m, &a.grid.out)?;
    Ok(if accepted { Outcome::Ok } else { Outcome::Violation })
}

fn bbl_bound(a: &DensityArgs) -> Result<Outcome> {
    let t = load_triple(a)?;
    let (plan, info) = transport(&t.f.cloud()?, &t.g.cloud()?, a.ot, a.epsilon, 10_000)?;
    let lb = deficit_lower_bound(&t.f, &t.g, a.s, a.p, &plan)?;
    let m = report(
        "bbl bound",
        json!({"s": a.s, "p": a.p.to_string(), "lower_bound": lb, "transport": info}),
    )?;
    emit_json(m, &a.grid.out)?;
    Ok(Outcome::Ok)
}

fn bbl_diagnose(a: &DensityArgs) -> Result<Outcome> {
    let t = load_triple(a)?;
    let h = h_or_admissible(&t, a.s, a.p)?;
    let (plan, info) = transport(&t.f.cloud()?, &t.g.cloud()?, a.ot, a.epsilon, 10_000)?;
    let diag = equality_diagnostics(&t.f, &t.g, &h, a.s, a.p, &plan)?;
    let err = a.tol.unwrap_or_else(|| discretization_error(&t.f, &t.g, &h));
    let m = report(
        "bbl diagnose",
        json!({
            "s": a.s,
            "p": a.p.to_string(),
            "deficit": deficit(&t.f, &t.g, &h, a.s, a.p)?,
            "diagnostics": diag,
            "max_residual": diag.max_residual(),
            "tolerance": err,
            "equality": diag.within(err),
            "transport": info,
        }),
    )?;
    emit_json(m, &a.grid.out)?;
    Ok(Outcome::Ok)
}

fn bbl_dubuc_fit(a: &DensityArgs) -> Result<Outcome> {
    let t = load_triple(a)?;
    let h = h_or_admissible(&t, a.s, a.p)?;
    let fit = dubuc_fit(&t.f, &t.g, &h, a.s, a.p)?;
    let mut m = report("bbl dubuc-fit", &fit)?;
    m.insert("s".into(), json!(a.s));
    m.insert("p".into(), json!(a.p.to_string()));
    emit_json(m, &a.grid.out)?;
    Ok(Outcome::Ok)
}

/// Exact Lebesgue measures of `A`, `B` and `(1−s)A + sB` when both are
/// boxes of one dimension or convex polygons.
fn exact_measures(a: &SetLiteral, b: &SetLiteral, s: f64) -> Result<Option<(f64, f64, f64, u32)>> {
    fn polygon(l: &SetLiteral) -> Result<Option<Polygon>> {
        match &l.shape {
            Shape::Box { lo, hi } if lo.len() == 2 => Ok(Some(Polygon::new(vec![
                [lo[0], lo[1]],
                [hi[0], lo[1]],
                [hi[0], hi[1]],
                [lo[0], hi[1]],
            ])?)),
            Shape::Poly(v) => {
                let hull = convex_hull(v.clone());
                if hull.len() != v.len() {
                    return Err(Error::Domain("poly vertices must be in strictly convex position".into()));
                }
                Ok(Some(Polygon::new(hull)?))
            }
            _ => Ok(None),
        }
    }
    if let (Shape::Box { lo: la, hi: ha }, Shape::Box { lo: lb, hi: hb }) = (&a.shape, &b.shape) {
        if la.len() == lb.len() {
            let side = |lo: &[f64], hi: &[f64]| lo.iter().zip(hi).map(|(x, y)| y - x).collect::<Vec<_>>();
            let (sa, sb) = (side(la, ha), side(lb, hb));
            let mz = sa.iter().zip(&sb).map(|(x, y)| (1.0 - s) * x + s * y).product();
            return Ok(Some((sa.iter().product(), sb.iter().product(), mz, la.len() as u32)));
        }
    }
    match (polygon(a)?, polygon(b)?) {
        (Some(pa), Some(pb)) => {
            let z = polygon_minkowski_interpolation(&pa, &pb, s)?;
            Ok(Some((pa.area(), pb.area(), z.area(), 2)))
        }
        _ => Ok(None),
    }
}

fn bbl_bm(a: &BmArgs) -> Result<Outcome> {
    sets_only(&[&a.a, &a.b])?;
    let exact = if a.grid_only { None } else { exact_measures(&a.a, &a.b, a.s)? };
    let (mut q, path, (ma, mb, mz, n)) = match exact {
        Some((ma, mb, mz, n)) => (quantitative_bm_from_measures(ma, mb, mz, a.s, a.p, n)?, "exact", (ma, mb, mz, n)),
        None => {
            let grid = shared_grid(&[&a.a, &a.b], &SpaceSpec::euclidean(), a.grid.grid_h, &a.grid.origin)?;
            let sa = rasterize(&a.a, &grid, &a.grid.origin)?;
            let sb = rasterize(&a.b, &grid, &a.grid.origin)?;
            let z = bbl_core::sets::interpolation_set(&sa, &sb, a.s)?;
            let ms = (measure(&sa)?.value, measure(&sb)?.value, measure(&z)?.value, grid.space.n as u32);
            (quantitative_bm(&sa, &sb, a.s, a.p)?, "grid", ms)
        }
    };
    if let Some(tol) = a.tol {
        q.pass = q.deficit >= q.bound - tol;
    }
    let pass = q.pass;
    let mut m = report("bbl bm", q)?;
    for (k, v) in [
        ("path", json!(path)),
        ("s", json!(a.s)),
        ("p", json!(a.p.to_string())),
        ("n", json!(n)),
        ("measure_a", json!(ma)),
        ("measure_b", json!(mb)),
        ("measure_z", json!(mz)),
    ] {
        m.insert(k.into(), v);
    }
    emit_json(m, &a.grid.out)?;
    Ok(if pass { Outcome::Ok } else { Outcome::Violation })
}

fn bbl_distorted(a: &DistortedArgs) -> Result<Outcome> {
    sets_only(&[&a.a, &a.b])?;
    let grid = shared_grid(&[&a.a, &a.b], &a.space, a.grid.grid_h, &a.grid.origin)?;
    let sa = rasterize(&a.a, &grid, &a.grid.origin)?;
    let sb = rasterize(&a.b, &grid, &a.grid.origin)?;
    let mut d = distorted_bm(&sa, &sb, a.s)?;
    if let (Some(tol), false) = (a.tol, d.void) {
        d.pass = d.deficit >= -tol;
    }
    let pass = d.pass;
    let mut m = report("bbl distorted-bm", d)?;
    m.insert("space".into(), json!(grid.space));
    m.insert("s".into(), json!(a.s));
    m.insert("cells".into(), json!(grid.len()));
    emit_json(m, &a.grid.out)?;
    Ok(if pass { Outcome::Ok } else { Outcome::Violation })
}

fn ot_solve(a: &OtArgs) -> Result<Outcome> {
    sets_only(&[&a.a, &a.b])?;
    let grid = shared_grid(&[&a.a, &a.b], &a.space, a.grid.grid_h, &a.grid.origin)?;
    let sa = rasterize(&a.a, &grid, &a.grid.origin)?;
    let sb = rasterize(&a.b, &grid, &a.grid.origin)?;
    let method = match (a.exact, a.entropic) {
        (true, _) => OtMethod::Exact,
        (_, true) => OtMethod::Entropic,
        _ => OtMethod::Auto,
    };
    let (plan, info) = transport(
        &WeightedCloud::uniform_on(&sa)?,
        &WeightedCloud::uniform_on(&sb)?,
        method,
        a.epsilon,
        a.max_iter,
    )?;
    let w = wasserstein_bounds_check(&plan, &sa, &sb, grid.space.k)?;
    let feasible = marginal_violation(&plan) <= 1e-9;
    let mut m = match plan.to_json() {
        Value::Object(m) => m,
        _ => unreachable!("plans serialize to objects"),
    };
    m.insert("command".into(), json!("ot solve"));
    m.insert("transport".into(), info);
    m.insert("wasserstein".into(), serde_json::to_value(w)?);
    emit_json(m, &a.grid.out)?;
    Ok(if feasible && w.pass { Outcome::Ok } else { Outcome::Violation })
}

fn norm(a: &BallsArgs) -> Result<MinkowskiNorm> {
    match a.norm {
        NormKind::Randers => MinkowskiNorm::randers(a.q.0, a.b.0),
        NormKind::Matsumoto => MinkowskiNorm::matsumoto(a.alpha.0, a.v, a.gravity),
        NormKind::Euclidean => MinkowskiNorm::euclidean_scaled(a.v),
    }
}

fn finsler_balls(a: &BallsArgs) -> Result<Outcome> {
    let f = norm(a)?;
    let fwd = forward_ball(&f, a.x.0, a.r, a.m)?;
    let bwd = backward_ball(&f, a.y.0, a.big_r, a.m)?;
    let mut ht = homothety_test(&f, a.x.0, a.r, a.y.0, a.big_r, a.m)?;
    if let Some(tol) = a.tol {
        ht.homothetic = ht.residual <= tol;
    }
    let bm = minkowski_bm_deficit(&f, a.x.0, a.r, a.y.0, a.big_r, a.s, a.m)?;
    if let Some(path) = &a.svg {
        let title = format!(
            "{:?} norm: forward ball B+(x, {}) and backward ball B-(y, {})",
            a.norm, a.r, a.big_r
        );
        let doc = svg_document(&[(&fwd, "#1f5fa8"), (&bwd, "#c0392b")], &title);
        fs::write(path, doc).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let m = report(
        "finsler balls",
        json!({
            "norm": f,
            "reversible": f.is_reversible(),
            "m": a.m,
            "s": a.s,
            "forward_area": fwd.area(),
            "backward_area": bwd.area(),
            "homothety": ht,
            "brunn_minkowski": bm,
            "equality": bm.deficit.abs() <= bm.tolerance,
            "strict": bm.deficit > 3.0 * bm.tolerance,
        }),
    )?;
    emit_json(m, &a.out)?;
    Ok(if bm.deficit >= -bm.tolerance { Outcome::Ok } else { Outcome::Violation })
}

fn regime_name(g: &GapInput) -> Result<String> {
    Ok(serde_json::to_value(g.regime()?)?.as_str().unwrap_or("?").to_string())
}

fn sweep_row(k: usize, g: &GapInput) -> Result<(String, bool)> {
    let c = quantitative_holder_check(g)?;
    let row = [
        k.to_string(),
        fmt_f64(g.s),
        g.p.to_string(),
        g.n.to_string(),
        fmt_f64(g.a),
        fmt_f64(g.b),
        fmt_f64(g.c),
        fmt_f64(g.d),
        regime_name(g)?,
        fmt_f64(gap(g)?),
        fmt_f64(c.lhs),
        fmt_f64(c.rhs),
        fmt_f64(c.slack),
        c.pass.to_string(),
    ]
    .join(",");
    Ok((row, c.pass))
}

fn gap_sweep(a: &SweepArgs) -> Result<Outcome> {
    let inputs = gap_samples(a.seed, a.samples);
    let threads = match a.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    };
    let chunk = inputs.len().div_ceil(threads).max(1);
    // workers own contiguous index ranges; joining in spawn order keeps rows in sample order
    let parts: Vec<Result<Vec<(String, bool)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                scope.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(j, g)| sweep_row(ci * chunk + j, g))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut out = String::from("index,s,p,n,a,b,c,d,regime,gap,lhs,rhs,slack,pass\n");
    let mut violations = 0usize;
    for part in parts {
        for (row, pass) in part? {
            violations += usize::from(!pass);
            out.push_str(&row);
            out.push('\n');
        }
    }
    emit(&out, &a.out)?;
    eprintln!("samples {} violations {violations}", inputs.len());
    Ok(if violations == 0 { Outcome::Ok } else { Outcome::Violation })
}
