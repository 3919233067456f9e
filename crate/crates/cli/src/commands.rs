use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use burgers_lab::catalog::{self, FamilyInstance, FamilySpec};
use burgers_lab::evolve::{cross_validate, IbvpSetup};
use burgers_lab::fields::{write_csv, Grid};
use burgers_lab::lie_algebra::{self, apply_to_field, basis, combination, commutation_table, format_coords, Generator};
use burgers_lab::reduce::{consistency_check, AnsatzId, ReducedSolution};
use burgers_lab::sym_group::{act_field, preservation_check, random_element, GroupElement};
use burgers_lab::verify::{residual_report, System, CONSTRAINT_NAMES};
use burgers_lab::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

pub const SCHEMA: &str = "1";

/// Tolerance for the differential constraints a family is flagged with.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Tolerance for the characteristic of a declared invariance generator.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Group images are held to this multiple of the family tolerance.
pub const GROUP_FACTOR: f64 = 10.0;
/// Observed order required of smooth solutions under evolution.
pub const MIN_ORDER: f64 = 1.5;

pub enum Body {
    Json(Value),
    Text(String),
}

pub struct Outcome {
    pub body: Body,
    pub pass: bool,
}

fn report(mut v: Value, pass: bool) -> Outcome {
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), Value::from(SCHEMA));
    }
    Outcome { body: Body::Json(v), pass }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

/// JSON given inline or as `@path`.
pub fn read_json(arg: &str) -> Result<Value> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{path}: {e}")))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("invalid JSON: {e}")))
}

pub fn build(spec: &FamilySpec, params: Option<&Value>) -> Result<FamilyInstance> {
    match params {
        Some(p) => spec.build(p),
        None => spec.build(&spec.default_params()[0]),
    }
}

fn instance(family: &str, params: Option<&str>) -> Result<FamilyInstance> {
    let spec = catalog::family(family)?;
    let params = params.map(read_json).transpose()?;
    build(spec, params.as_ref())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn algebra_table(as_json: bool) -> Result<Outcome> {
    if !as_json {
        return Ok(Outcome { body: Body::Text(lie_algebra::render_table()), pass: true });
    }
    let t = commutation_table();
    let rows: Vec<Vec<String>> = t
        .iter()
        .map(|row| row.iter().map(|c| format_coords(&c.map(|r| *r.numer() as f64 / *r.denom() as f64))).collect())
        .collect();
    let names: Vec<&str> = Generator::ALL.iter().map(|g| g.name()).collect();
    Ok(report(json!({"basis": names, "table": rows}), true))
}

pub fn subalgebras(dim: usize) -> Result<Outcome> {
    let list: Vec<Value> = lie_algebra::subalgebras(dim)?.iter().map(|s| s.to_json()).collect();
    Ok(report(json!({"dim": dim, "subalgebras": list}), true))
}

pub fn family_list() -> Result<Outcome> {
    let list: Vec<Value> = catalog::families()
        .iter()
        .map(|f| json!({"id": f.id, "summary": f.summary, "test_box": f.test_box, "default_params": f.default_params()}))
        .collect();
    Ok(report(json!({"families": list}), true))
}

fn grid_or_default(grid: Option<&str>, inst: &FamilyInstance) -> Result<Grid> {
    match grid {
        Some(g) => Grid::parse(g),
        None => Ok(inst.test_box.default_grid()),
    }
}

pub fn family_eval(id: &str, params: Option<&str>, grid: Option<&str>, out: Option<&Path>, residuals: bool) -> Result<Outcome> {
    let inst = instance(id, params)?;
    let grid = grid_or_default(grid, &inst)?;
    match out {
        Some(path) => {
            let rows = write_csv(inst.field.as_ref(), &grid, residuals, &mut create(path)?)?;
            Ok(report(json!({"family": id, "params": inst.params, "rows": rows, "out": path}), true))
        }
        None => {
            let mut buf = Vec::new();
            write_csv(inst.field.as_ref(), &grid, residuals, &mut buf)?;
            Ok(Outcome { body: Body::Text(String::from_utf8(buf).expect("csv is utf-8")), pass: true })
        }
    }
}

pub fn verify(family: &str, params: Option<&str>, grid: Option<&str>, system: &str, tol: Option<f64>) -> Result<Outcome> {
    let system: System = system.parse()?;
    let inst = instance(family, params)?;
    let grid = grid_or_default(grid, &inst)?;
    let rep = residual_report(inst.field.as_ref(), &grid, system, tol.unwrap_or(inst.tolerance))?;
    let pass = rep.pass;
    let mut v = to_value(&rep);
    v["family"] = json!(family);
    v["params"] = inst.params.clone();
    Ok(report(v, pass))
}

pub fn reduce_check(ansatz: &str, solution: &str) -> Result<Outcome> {
    let id: AnsatzId = ansatz.parse()?;
    let rs = ReducedSolution::from_json(id, &read_json(solution)?)?;
    let rep = consistency_check(&rs);
    let pass = rep.consistent;
    Ok(report(to_value(&rep), pass))
}

pub fn group_apply(family: &str, params: Option<&str>, element: &str, grid: Option<&str>, out: Option<&Path>) -> Result<Outcome> {
    let inst = instance(family, params)?;
    let g = GroupElement::from_json(&read_json(element)?)?;
    let points = inst.test_box.default_grid().points();
    let rep = preservation_check(&g, inst.field.clone(), &points, GROUP_FACTOR * inst.tolerance)?;
    let mut v = json!({"family": family, "params": inst.params, "element": g, "check": rep});
    if let Some(path) = out {
        let image = act_field(&g, inst.field.clone())?;
        let grid = grid_or_default(grid, &inst)?;
        let rows = write_csv(image.as_ref(), &grid, true, &mut create(path)?)?;
        v["rows"] = json!(rows);
        v["out"] = json!(path);
    }
    Ok(report(v, rep.pass))
}

pub fn group_sweep(seed: u64, count: usize, families: &[String], explicit: &[String], identity_only: bool) -> Result<Outcome> {
    let specs = select(families)?;
    let mut elements = Vec::new();
    if identity_only {
        elements.push(GroupElement::identity());
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        elements.extend((0..count).map(|_| random_element(&mut rng)));
    }
    for e in explicit {
        elements.push(GroupElement::from_json(&read_json(e)?)?);
    }
    let per_family = specs
        .par_iter()
        .map(|spec| -> Result<Vec<Value>> {
            let inst = build(spec, None)?;
            let points = inst.test_box.default_grid().points();
            elements
                .iter()
                .enumerate()
                .map(|(k, g)| {
                    let r = preservation_check(g, inst.field.clone(), &points, GROUP_FACTOR * inst.tolerance)?;
                    Ok(json!({"family": spec.id, "element": k, "check": r}))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Value> = per_family.into_iter().flatten().collect();
    let pass = rows.iter().all(|r| r["check"]["pass"] == json!(true));
    let masked: u64 = rows.iter().map(|r| r["check"]["masked"].as_u64().unwrap_or(0)).sum();
    Ok(report(json!({"seed": seed, "elements": elements, "rows": rows, "masked_points": masked, "pass": pass}), pass))
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidInput(format!("range must be lo:hi, got {s}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// `x0:x1,y0:y1,t0:t1`.
pub fn parse_box(s: &str) -> Result<[(f64, f64); 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!("box spec needs x, y and t ranges: {s}")));
    }
    Ok([parse_range(parts[0])?, parse_range(parts[1])?, parse_range(parts[2])?])
}

pub fn evolve(
    family: &str,
    params: Option<&str>,
    region: Option<&str>,
    levels: u32,
    nodes: usize,
    dt_fraction: Option<f64>,
    snapshot: Option<&Path>,
) -> Result<Outcome> {
    let inst = instance(family, params)?;
    let tb = inst.test_box;
    let [x, y, t] = match region {
        Some(s) => parse_box(s)?,
        None => [tb.x, tb.y, (tb.t.0, tb.t.0 + 0.1)],
    };
    let mut setup = IbvpSetup::new(x, y, [nodes, nodes], t)?;
    if let Some(f) = dt_fraction {
        setup.dt = f * setup.stability_bound();
        setup.validate()?;
    }
    let rep = cross_validate(inst.field.as_ref(), &setup, levels)?;
    let pass = rep.exact || rep.order() >= MIN_ORDER;
    let mut v = json!({"family": family, "params": inst.params, "setup": setup, "report": rep, "order": if rep.exact { Value::from("exact") } else { json!(rep.order()) }});
    if let Some(path) = snapshot {
        let finest = setup.refined(levels - 1);
        let state = finest.evolve(inst.field.as_ref())?;
        finest.write_csv(&state, &mut create(path)?)?;
        v["snapshot"] = json!(path);
    }
    Ok(report(v, pass))
}

fn select(ids: &[String]) -> Result<Vec<&'static FamilySpec>> {
    if ids.is_empty() {
        return Ok(catalog::families().iter().collect());
    }
    ids.iter().map(|id| catalog::family(id)).collect()
}

fn verify_instance(inst: &FamilyInstance, tol: f64) -> Result<Value> {
    let grid = inst.test_box.default_grid();
    let rep = residual_report(inst.field.as_ref(), &grid, System::Burgers, tol)?;
    let fl = inst.constraints;
    let mut constraints = serde_json::Map::new();
    let mut ok = rep.pass;
    for (flag, name) in [(fl.curl_free, 0), (fl.ux_eq_vy, 1), (fl.div_free, 2), (fl.v_zero, 3)] {
        if flag {
            let m = rep.constraints[name].max;
            let holds = m <= CONSTRAINT_TOL;
            ok &= holds;
            constraints.insert(CONSTRAINT_NAMES[name].into(), json!({"max": m, "holds": holds}));
        }
    }
    let invariance = match &inst.invariance {
        None => Value::Null,
        Some(inv) => {
            let b = basis().map(|f| f.to_f64());
            let mut worst = 0.0f64;
            for g in &inv.generators {
                let vf = combination(g, &b);
                for p in grid.points() {
                    let (q1, q2) = apply_to_field(&vf, inst.field.as_ref(), &p)?;
                    worst = worst.max(q1.abs()).max(q2.abs());
                }
            }
            let holds = worst <= INVARIANCE_TOL;
            ok &= holds;
            json!({"label": inv.label, "max_characteristic": worst, "holds": holds})
        }
    };
    Ok(json!({
        "params": inst.params,
        "max_residual": rep.max_residual(),
        "tolerance": tol,
        "constraints": constraints,
        "invariance": invariance,
        "pass": ok,
    }))
}

pub fn catalog_verify_all(families: &[String], tol: Option<f64>) -> Result<Outcome> {
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be non-negative, got {t}")));
        }
    }
    let specs = select(families)?;
    let summaries: Vec<Value> = specs
        .par_iter()
        .map(|spec| {
            let sets: Vec<Value> = spec
                .default_params()
                .iter()
                .map(|params| {
                    let run = || -> Result<Value> {
                        let inst = spec.build(params)?;
                        verify_instance(&inst, tol.unwrap_or(inst.tolerance))
                    };
                    run().unwrap_or_else(|e| json!({"params": params, "error": e.to_string(), "pass": false}))
                })
                .collect();
            let max = sets.iter().filter_map(|s| s["max_residual"].as_f64()).fold(0.0f64, f64::max);
            let pass = sets.iter().all(|s| s["pass"] == json!(true));
            json!({"family": spec.id, "sets": sets, "max_residual": max, "pass": pass})
        })
        .collect();
    let pass = summaries.iter().all(|s| s["pass"] == json!(true));
    let failed: Vec<&Value> = summaries.iter().filter(|s| s["pass"] != json!(true)).map(|s| &s["family"]).collect();
    Ok(report(json!({"families": summaries, "failed": failed, "pass": pass}), pass))
}
