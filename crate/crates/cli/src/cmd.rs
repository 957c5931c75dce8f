use std::fs;
use std::io::Write;
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use qlrc::bounds::*;
use qlrc::classical::{min_weight_excluding, rs_code, LinearCode};
use qlrc::css::{css_distance_witness, local_recovery_sets, local_syndromes, recover_pauli, PauliError};
use qlrc::ensembles::{expander_sample, gv_estimate, trial_rng};
use qlrc::qtb::{fqtb_from, fqtb_recover_block, from_descriptor, qtb_dim, qtb_new, FqtbCode, QtbDescriptor};
use qlrc::qtbdec::quantum_decode;
use qlrc::{FieldCtx, FieldDescriptor};

use crate::{CodeOpts, EnsembleKind, EnsembleOpts, Failure, Family, Format, Model, OutOpts, SimOpts, TableOpts};

type Res<T> = Result<T, Failure>;

struct Spec {
    family: Family,
    q: u64,
    r: usize,
    ell: usize,
    s: usize,
    desc: Option<QtbDescriptor>,
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Res<T> {
    v.ok_or_else(|| Failure::validation(format!("--{flag} is required")))
}

fn resolve(c: &CodeOpts) -> Res<Spec> {
    if let Some(path) = &c.descriptor {
        let mut raw: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
        // `construct --generator` wraps the descriptor next to the matrix
        if let Some(inner) = raw.get_mut("descriptor") {
            raw = inner.take();
        }
        let d: QtbDescriptor = serde_json::from_value(raw)?;
        FieldCtx::from_descriptor(&FieldDescriptor { p: d.p, m: d.m, modulus: d.modulus.clone(), omega: d.omega })?;
        let family = match d.family.as_str() {
            "qtb" => Family::Qtb,
            "fqtb" => Family::Fqtb,
            other => return Err(Failure::validation(format!("unknown family {other:?} in descriptor"))),
        };
        let q = (d.p as u64).pow(d.m);
        return Ok(Spec { family, q, r: d.r, ell: d.ell, s: d.s.max(1), desc: Some(d) });
    }
    let q = need(c.q, "q")?;
    let ell = need(c.ell, "ell")?;
    let s = c.s.unwrap_or(1);
    let family = c.family.unwrap_or(if s > 1 { Family::Fqtb } else { Family::Qtb });
    let r = match family {
        Family::Rs => c.r.unwrap_or(1),
        _ => need(c.r, "r")?,
    };
    match family {
        Family::Qtb if s != 1 => return Err(Failure::validation("qtb is unfolded; use --family fqtb for s > 1")),
        Family::Fqtb if c.s.is_none() => return Err(Failure::validation("--s is required for fqtb")),
        Family::Rs if s != 1 => return Err(Failure::validation("rs does not take --s")),
        _ => {}
    }
    Ok(Spec { family, q, r, ell, s, desc: None })
}

fn name(f: Family) -> &'static str {
    match f {
        Family::Qtb => "qtb",
        Family::Fqtb => "fqtb",
        Family::Rs => "rs",
    }
}

fn build(spec: &Spec) -> Res<FqtbCode> {
    if spec.family == Family::Rs {
        return Err(Failure::validation("rs is supported by `distance` only"));
    }
    match &spec.desc {
        Some(d) => {
            let code = from_descriptor(d)?;
            let got = code.descriptor();
            if got.n != d.n || got.k != d.k {
                return Err(Failure::validation(format!("descriptor says n={}, k={} but the code has n={}, k={}", d.n, d.k, got.n, got.k)));
            }
            Ok(code)
        }
        None => Ok(fqtb_from(qtb_new(spec.q, spec.r, spec.ell)?, spec.s)?),
    }
}

fn emit(o: &OutOpts, body: &[u8]) -> Res<()> {
    match &o.out {
        Some(p) => fs::write(p, body)?,
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(o: &OutOpts, v: &T) -> Res<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(o, s.as_bytes())
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Res<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Failure::validation(e.to_string()))
}

fn json_only(o: &OutOpts, cmd: &str) -> Res<()> {
    if o.format == Some(Format::Csv) {
        return Err(Failure::validation(format!("{cmd} emits JSON only")));
    }
    Ok(())
}

fn timed<T>(o: &OutOpts, label: &str, f: impl FnOnce() -> Res<T>) -> Res<T> {
    let t0 = Instant::now();
    let v = f();
    if o.timing {
        eprintln!("{label}: {:.3} s", t0.elapsed().as_secs_f64());
    }
    v
}

fn rational_f64(x: &num_rational::BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn params_value(spec: &Spec) -> Res<Value> {
    let (q, r, ell, s) = (spec.q, spec.r, spec.ell, spec.s);
    if spec.family == Family::Rs {
        return Err(Failure::validation("params covers qtb and fqtb"));
    }
    let k = qtb_dim(q, r, ell)?;
    let n = q as usize - 1;
    let lower = qtb_distance_lower(q, r, ell).ok();
    let mut v = json!({
        "family": name(spec.family),
        "q": q, "r": r, "ell": ell, "s": s,
        "n": n, "k": k, "blocks": n / s, "locality": r,
        "d_lower": lower.as_ref().map(|x| x.to_f64()),
        "d_lower_ceil": lower.as_ref().and_then(|x| x.ceil().to_i64()),
        "d_upper": rational_f64(&qtb_distance_upper(q, r, ell)?),
        "e": decode_radius_qtb(q, r, ell).ok().map(|e| e.max(0)),
        "singleton_partition_cap_d": singleton_partition_cap(n, k, r),
    });
    if spec.family == Family::Fqtb {
        let (eps, m) = fqtb_eps(q, r, ell, s)?;
        let unc = uncertainty_holds(q, r).ok();
        let extra = json!({
            "eps": rational_f64(&eps),
            "eps_m": m,
            "uncertainty": unc,
            "fqtb_d_lower": fqtb_distance_lower(q, r, ell, s).ok().map(|x| rational_f64(&x)),
            "fqtb_d_simple": fqtb_distance_simple(q, r, ell, s).ok().map(|x| x.to_f64()),
            "e_prime": frs_e_prime(q, r, ell, s).ok(),
            "e_fqtb": decode_radius_fqtb(q, r, ell, s).ok().map(|e| e.max(0)),
        });
        v.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
    }
    v["bounds"] = serde_json::to_value(bound_reports(q, r, ell, s))?;
    Ok(v)
}

pub fn params(c: &CodeOpts) -> Res<()> {
    json_only(&c.out, "params")?;
    let spec = resolve(c)?;
    let v = timed(&c.out, "params", || params_value(&spec))?;
    emit_json(&c.out, &v)
}

pub fn construct(c: &CodeOpts, generator: bool) -> Res<()> {
    let spec = resolve(c)?;
    let code = timed(&c.out, "construct", || build(&spec))?;
    let g = code.base().classical().basis().to_rows();
    if c.out.format == Some(Format::Csv) {
        let header: Vec<String> = (0..code.base().n()).map(|i| format!("x{i}")).collect();
        let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let rows: Vec<Vec<String>> = g.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        return emit(&c.out, &csv_bytes(&h, &rows)?);
    }
    if generator {
        return emit_json(&c.out, &json!({ "descriptor": code.descriptor(), "generator": g }));
    }
    emit_json(&c.out, &code.descriptor())
}

pub fn distance(c: &CodeOpts, cap: u128) -> Res<()> {
    let spec = resolve(c)?;
    let v = timed(&c.out, "distance", || {
        if spec.family == Family::Rs {
            let ctx = FieldCtx::from_order(spec.q)?;
            let code = rs_code(&ctx, spec.ell)?;
            let m = min_weight_excluding(&code, &LinearCode::zero(&ctx, code.n()), cap)?;
            return Ok(json!({
                "family": "rs", "q": spec.q, "ell": spec.ell, "n": code.n(), "k": code.k(),
                "distance": m.as_ref().map(|m| m.weight),
                "witness": m.map(|m| json!({ "word": m.witness })),
                "cap": cap.to_string(),
            }));
        }
        let code = build(&spec)?;
        let css = code.css();
        let f = css.ctx();
        let wit = css_distance_witness(css, cap)?;
        let unit = if code.s() > 1 { "blocks" } else { "symbols" };
        let certificate = wit.as_ref().map(|m| {
            let w = &m.witness;
            // w is a logical; a row of the opposite code pairing nontrivially with it shows w is not a stabilizer
            let (inside, outside, pair_code) = if css.cz().contains(w) && !css.cx_dual().contains(w) {
                ("C_Z", "C_X^perp", css.cx())
            } else {
                ("C_X", "C_Z^perp", css.cz())
            };
            let check = pair_code.basis().row_iter().find(|row| f.dot(row, w) != 0).map(|r| r.to_vec());
            let pairing = check.as_ref().map(|row| f.dot(row, w));
            json!({ "weight": m.weight, "word": w, "member_of": inside, "not_in": outside, "check": check, "pairing": pairing })
        });
        Ok(json!({
            "family": name(spec.family), "q": spec.q, "r": spec.r, "ell": spec.ell, "s": code.s(),
            "n": code.base().n(), "k": code.k(),
            "distance": wit.as_ref().map_or(code.base().n() / code.s() + 1, |m| m.weight),
            "unit": unit,
            "witness": certificate,
            "cap": cap.to_string(),
        }))
    })?;
    if c.out.format == Some(Format::Csv) {
        let cols = ["family", "q", "r", "ell", "s", "n", "k", "distance"];
        let row = cols.iter().map(|k| v.get(*k).map_or(String::new(), cell)).collect();
        return emit(&c.out, &csv_bytes(&cols, &[row])?);
    }
    emit_json(&c.out, &v)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Serialize)]
struct Trial {
    trial: u64,
    seed: u64,
    weight: usize,
    success: bool,
    #[serde(skip)]
    ms: f64,
}

fn radius(spec: &Spec, model: Model) -> Res<usize> {
    if model == Model::Erasure {
        return Ok(1);
    }
    let e = if spec.s > 1 { decode_radius_fqtb(spec.q, spec.r, spec.ell, spec.s)? } else { decode_radius_qtb(spec.q, spec.r, spec.ell)? };
    Ok(e.max(0) as usize)
}

pub fn simulate(o: &SimOpts) -> Res<()> {
    let spec = resolve(&o.code)?;
    let out = &o.code.out;
    let code = build(&spec)?;
    let e = radius(&spec, o.model)?;
    let weight = o.weight.unwrap_or(e);
    let s = code.s();
    let blocks = code.base().n() / s;
    if weight > blocks {
        return Err(Failure::validation(format!("weight {weight} exceeds the {blocks} available positions")));
    }
    if weight > e && !o.allow_overload {
        return Err(Failure::validation(format!("weight {weight} exceeds the radius {e}; pass --allow-overload to run anyway")));
    }
    let f = code.css().ctx().clone();
    let n = code.base().n();
    let recs = if o.model == Model::Erasure && s == 1 { Some(local_recovery_sets(code.css(), spec.r)?) } else { None };
    let run = |t: u64| -> Trial {
        let t0 = Instant::now();
        let mut rng = trial_rng(o.seed, t);
        let hit = rand::seq::index::sample(&mut rng, blocks, weight).into_vec();
        let pos: Vec<usize> = hit.iter().flat_map(|&b| b * s..(b + 1) * s).collect();
        let success = match o.model {
            Model::Erasure => match &recs {
                Some(recs) => {
                    let err = PauliError::random_on(&f, n, &pos, &mut rng);
                    pos.iter().all(|&i| {
                        let (sx, sz) = local_syndromes(&f, &recs[i], &err);
                        let fix = recover_pauli(code.css(), &recs[i], sx, sz);
                        fix.bx[i] == err.bx[i] && fix.bz[i] == err.bz[i]
                    })
                }
                None => {
                    let c = code.base().classical().random_codeword(&mut rng);
                    let mut w = c.clone();
                    for &i in &pos {
                        w[i] = 0;
                    }
                    hit.iter().all(|&b| fqtb_recover_block(&code, &w, b, &hit).is_ok_and(|v| v == c[b * s..(b + 1) * s]))
                }
            },
            model => {
                let mut err = PauliError::random_on(&f, n, &pos, &mut rng);
                match model {
                    Model::X => nonzero_side(&f, &mut err.bx, &mut err.bz, &pos, &mut rng),
                    Model::Z => nonzero_side(&f, &mut err.bz, &mut err.bx, &pos, &mut rng),
                    _ => {}
                }
                quantum_decode(&code, &err, e).is_ok_and(|out| out.logical_identity)
            }
        };
        Trial { trial: t, seed: o.seed, weight, success, ms: t0.elapsed().as_secs_f64() * 1e3 }
    };
    let trials: Vec<Trial> = (0..o.trials).into_par_iter().map(run).collect();
    let successes = trials.iter().filter(|t| t.success).count();
    let mean_ms = (o.trials > 0).then(|| trials.iter().map(|t| t.ms).sum::<f64>() / o.trials as f64);
    let mean_cell = if out.timing { mean_ms.map_or(String::new(), |m| format!("{m:.3}")) } else { String::new() };
    let fam = name(spec.family);
    if out.format == Some(Format::Json) {
        let mut v = json!({
            "family": fam, "q": spec.q, "r": spec.r, "ell": spec.ell, "s": s, "e": e,
            "model": format!("{:?}", o.model).to_lowercase(), "weight": weight,
            "seed": o.seed, "trials": o.trials, "successes": successes,
            "rng": "ChaCha8, key = seed, stream = trial index",
            "mean_ms": if out.timing { mean_ms } else { None },
        });
        if o.per_trial {
            v["trial_log"] = serde_json::to_value(&trials)?;
        }
        emit_json(out, &v)?;
    } else if o.per_trial {
        let rows: Vec<Vec<String>> =
            trials.iter().map(|t| vec![t.trial.to_string(), t.seed.to_string(), t.weight.to_string(), t.success.to_string()]).collect();
        emit(out, &csv_bytes(&["trial", "seed", "weight", "success"], &rows)?)?;
    } else {
        let row = vec![
            fam.to_string(),
            spec.q.to_string(),
            spec.r.to_string(),
            spec.ell.to_string(),
            s.to_string(),
            e.to_string(),
            o.seed.to_string(),
            o.trials.to_string(),
            successes.to_string(),
            mean_cell,
        ];
        let header = ["family", "q", "r", "ell", "s", "e", "seed", "trials", "successes", "mean_ms"];
        emit(out, &csv_bytes(&header, &[row])?)?;
    }
    if weight <= e && successes < trials.len() {
        return Err(Failure { code: 4, message: format!("{} of {} trials failed within the radius {e}", trials.len() - successes, trials.len()) });
    }
    Ok(())
}

/// Clears `other` and redraws zero entries of `side` so each hit position stays nonidentity.
fn nonzero_side(f: &FieldCtx, side: &mut [u32], other: &mut [u32], pos: &[usize], rng: &mut impl rand::Rng) {
    for &i in pos {
        other[i] = 0;
        while side[i] == 0 {
            side[i] = rng.gen_range(1..f.q());
        }
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn fmt_f(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.6}"))
}

fn table_row(q: u64, r: usize, ell: usize, s: usize) -> Res<Vec<String>> {
    let k = qtb_dim(q, r, ell)?;
    let n = q as usize - 1;
    let (lower, e) = if s == 1 {
        (qtb_distance_lower(q, r, ell).ok().map(|x| (x.to_f64(), x.ceil().to_i64().unwrap())), decode_radius_qtb(q, r, ell).ok())
    } else {
        fqtb_eps(q, r, ell, s)?;
        let d = fqtb_distance_lower(q, r, ell, s).ok();
        (d.map(|x| (rational_f64(&x), x.ceil().to_integer().to_i64().unwrap())), decode_radius_fqtb(q, r, ell, s).ok())
    };
    let upper = rational_f64(&qtb_distance_upper(q, r, ell)?);
    let gap = lower.map(|(_, c)| singleton_partition_cap(n, k, r) as i64 - c);
    Ok(vec![
        if s == 1 { "qtb" } else { "fqtb" }.to_string(),
        q.to_string(),
        r.to_string(),
        ell.to_string(),
        s.to_string(),
        k.to_string(),
        fmt_f(lower.map(|l| l.0)),
        fmt_f(Some(upper)),
        e.map_or(String::new(), |e| e.max(0).to_string()),
        gap.map_or(String::new(), |g| g.to_string()),
    ])
}

pub const TABLE_COLUMNS: [&str; 10] = ["family", "q", "r", "ell", "s", "k", "d_lower", "d_upper", "e_decode", "singleton_gap"];

pub fn bounds_table(o: &TableOpts) -> Res<()> {
    let mut grid = Vec::new();
    for &q in &o.q {
        for &r in &o.r {
            if r == 0 || q < 3 || (q - 1) % r as u64 != 0 {
                return Err(Failure::validation(format!("r = {r} does not divide q - 1 = {}", q.saturating_sub(1))));
            }
            let ells: Vec<usize> = if o.ell.is_empty() { ((q as usize).div_ceil(2)..q as usize).collect() } else { o.ell.clone() };
            let ss = if o.s.is_empty() { divisors((q as usize - 1) / r) } else { o.s.clone() };
            for &ell in &ells {
                for &s in &ss {
                    grid.push((q, r, ell, s));
                }
            }
        }
    }
    let rows = timed(&o.out, "bounds-table", || grid.iter().map(|&(q, r, ell, s)| table_row(q, r, ell, s)).collect::<Res<Vec<_>>>())?;
    if o.out.format == Some(Format::Json) {
        let objs: Vec<Value> = rows
            .iter()
            .map(|row| Value::Object(TABLE_COLUMNS.iter().zip(row).map(|(k, v)| (k.to_string(), json_cell(v))).collect()))
            .collect();
        return emit_json(&o.out, &objs);
    }
    emit(&o.out, &csv_bytes(&TABLE_COLUMNS, &rows)?)
}

fn json_cell(v: &str) -> Value {
    if v.is_empty() {
        Value::Null
    } else if let Ok(i) = v.parse::<i64>() {
        json!(i)
    } else if let Ok(x) = v.parse::<f64>() {
        json!(x)
    } else {
        json!(v)
    }
}

pub fn ensemble(o: &EnsembleOpts) -> Res<()> {
    match o.kind {
        EnsembleKind::Gv => {
            let (r, ell, q) = (need(o.r, "r")?, need(o.ell, "ell")?, need(o.q, "q")?);
            let delta = o.dmin as f64 / o.n as f64;
            let g = timed(&o.out, "ensemble", || Ok(gv_estimate(o.n, r, ell, q, delta, o.trials, o.seed)?))?;
            let row = vec![
                o.n.to_string(),
                r.to_string(),
                ell.to_string(),
                q.to_string(),
                o.dmin.to_string(),
                o.trials.to_string(),
                o.seed.to_string(),
                g.successes.to_string(),
                format!("{:.6}", g.frequency),
                format!("{:.6}", g.wilson_low),
                format!("{:.6}", g.wilson_high),
                format!("{:.6}", g.bound),
            ];
            if o.out.format == Some(Format::Csv) {
                let header = ["n", "r", "ell", "q", "dmin", "trials", "seed", "successes", "frequency", "wilson_low", "wilson_high", "bound"];
                return emit(&o.out, &csv_bytes(&header, &[row])?);
            }
            emit_json(&o.out, &json!({ "n": o.n, "r": r, "ell": ell, "q": q, "dmin": o.dmin, "delta": delta, "seed": o.seed, "estimate": g }))
        }
        EnsembleKind::Graph => {
            let degree = need(o.degree, "degree")?;
            let g = timed(&o.out, "ensemble", || Ok(expander_sample(o.n, degree, o.seed)?))?;
            let edges: Vec<[usize; 3]> = g.edges().into_iter().map(|(u, j, v, _)| [u, j, v]).collect();
            if o.out.format == Some(Format::Csv) {
                let rows: Vec<Vec<String>> = edges.iter().map(|e| e.iter().map(|x| x.to_string()).collect()).collect();
                eprintln!("lambda = {:.6}", g.lambda);
                return emit(&o.out, &csv_bytes(&["u", "j", "v"], &rows)?);
            }
            emit_json(&o.out, &json!({ "n": g.n, "degree": g.delta, "seed": o.seed, "lambda": g.lambda, "edges": edges }))
        }
    }
}
