use std::fs;
use std::path::Path;

use poisson_groupoid::dressing::{self, FlowConfig, Termination};
use poisson_groupoid::groups::{FactorOrder, Mat2};
use poisson_groupoid::models::{build, Model};
use poisson_groupoid::reduction::{self, REDUCED_COMPOSE_TOL};
use poisson_groupoid::verify::{self, Suite};
use poisson_groupoid::{sampling, DoublePoint, DualGroupPoint, Error, GroupPoint, PoissonDouble, Reduced, ReductionModel, Su11Model, C64};
use serde_json::{json, Value};

use crate::parse::{complex, floats, floats_n};
use crate::{FactorizeArgs, Failure, OrbitArgs, ReduceArgs};

const FACTORIZE_TOL: f64 = 1e-10;
const RK_AGREEMENT_TOL: f64 = 1e-6;

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    emit(out, &text)
}

fn model(name: &str) -> Result<Model, Failure> {
    Ok(build(name)?)
}

pub fn verify(name: &str, suite: Suite, seed: u64, samples: usize, out: Option<&Path>) -> Result<(), Failure> {
    let report = verify::run(&model(name)?, suite, seed, samples);
    emit_json(out, &serde_json::to_value(&report).expect("reports serialize"))?;
    let failed: Vec<&str> = report.failures().map(|c| c.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

pub fn orbit(a: &OrbitArgs) -> Result<(), Failure> {
    let cfg = FlowConfig { dt: a.dt, max_steps: a.max_steps, ..FlowConfig::default() };
    let xi = floats("xi", &a.xi)?;
    match model(&a.model)? {
        Model::Su11(m) => {
            if a.g.is_some() {
                return Err(Failure::Usage("--g is for trivial models; use --alpha/--beta".into()));
            }
            let beta = complex("beta", &a.beta)?;
            let alpha = match &a.alpha {
                Some(s) => complex("alpha", s)?,
                None => C64::new((1.0 + beta.norm_sqr()).sqrt(), 0.0),
            };
            run_orbit(&m, &GroupPoint::new(alpha, beta)?, &xi, a, &cfg)
        }
        Model::Trivial(m) => {
            if a.alpha.is_some() {
                return Err(Failure::Usage("--alpha/--beta are for su11; use --g".into()));
            }
            let g = match &a.g {
                Some(s) => floats_n("g", s, m.n())?,
                None => vec![0.0; m.n()],
            };
            run_orbit(&m, &g, &xi, a, &cfg)
        }
    }
}

fn run_orbit<M: PoissonDouble>(m: &M, start: &M::G, xi: &[f64], a: &OrbitArgs, cfg: &FlowConfig) -> Result<(), Failure> {
    let trace = dressing::flow(m, start, xi, a.t_end, cfg)?;
    emit(a.out.as_deref(), &trace.to_csv(m))?;
    let t_last = trace.times.last().copied().unwrap_or(0.0);
    let summary = format!(
        "termination={} samples={} t_last={t_last:.9} rk_deviation={:.3e}",
        trace.termination,
        trace.times.len(),
        trace.rk_deviation
    );
    // keep stdout clean CSV when no file was given
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if let Termination::Escaped { t_escape } = trace.termination {
        let line = format!("escaped at t = {t_escape:.10}");
        if a.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    if trace.rk_deviation > RK_AGREEMENT_TOL {
        return Err(Failure::Check(format!("RKMK4 and exact curve differ by {:.3e}", trace.rk_deviation)));
    }
    Ok(())
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn order_name(o: FactorOrder) -> &'static str {
    match o {
        FactorOrder::GGstar => "g_gstar",
        FactorOrder::GstarG => "gstar_g",
    }
}

pub fn factorize(a: &FactorizeArgs) -> Result<(), Failure> {
    let m = match model(&a.model)? {
        Model::Su11(m) => m,
        Model::Trivial(_) => return Err(Failure::Usage("factorize needs a matrix double; only su11 has one".into())),
    };
    let d = match (&a.matrix, &a.g, &a.gamma) {
        (Some(s), _, _) => {
            let v = floats_n("matrix", s, 8)?;
            DoublePoint::new(Mat2::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])))?
        }
        (None, Some(g), Some(s)) => {
            let g = floats_n("g", g, 4)?;
            let s = floats_n("gamma", s, 3)?;
            let g = GroupPoint::new(c(g[0], g[1]), c(g[2], g[3]))?;
            let s = DualGroupPoint::new(s[0], c(s[1], s[2]))?;
            m.d_mul(&m.embed_g(&g), &m.embed_gstar(&s))
        }
        _ => return Err(Failure::Usage("give either --matrix or both --g and --gamma".into())),
    };
    let (results, pass) = factorizations(&m, &d);
    let entries: Vec<Value> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| pair(d.m.at(i, j))).collect();
    emit_json(a.out.as_deref(), &json!({ "schema": 1, "model": "su11", "d": entries, "factorizations": results, "pass": pass }))?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("factorization residual above {FACTORIZE_TOL:e}")))
    }
}

fn factorizations(m: &Su11Model, d: &DoublePoint) -> (Vec<Value>, bool) {
    let mut pass = true;
    let mut out = Vec::new();
    for order in [FactorOrder::GGstar, FactorOrder::GstarG] {
        let name = order_name(order);
        match dressing::factorize(m, d, order) {
            Ok(f) => {
                let (g, s) = (m.embed_g(&f.g), m.embed_gstar(&f.gamma));
                let back = match order {
                    FactorOrder::GGstar => m.d_mul(&g, &s),
                    FactorOrder::GstarG => m.d_mul(&s, &g),
                };
                let residual = m.d_distance(&back, d);
                pass &= residual <= FACTORIZE_TOL;
                out.push(json!({
                    "order": name,
                    "status": "ok",
                    "margin": f.margin,
                    "g": { "alpha": pair(f.g.alpha), "beta": pair(f.g.beta) },
                    "gamma": { "A": f.gamma.a, "N": pair(f.gamma.n) },
                    "residual": residual,
                }));
            }
            Err(Error::NotFactorizable { margin }) => {
                out.push(json!({ "order": name, "status": "not_factorizable", "margin": margin }));
            }
            Err(e) => {
                pass = false;
                out.push(json!({ "order": name, "status": "error", "message": e.to_string() }));
            }
        }
    }
    (out, pass)
}

pub fn reduce_demo(a: &ReduceArgs) -> Result<(), Failure> {
    match model(&a.model)? {
        Model::Su11(m) => run_reduce(&m, a),
        Model::Trivial(m) => run_reduce(&m, a),
    }
}

/// Collects the steps of the transcript and their residuals.
struct Transcript<'a, M: ReductionModel> {
    m: &'a M,
    steps: Vec<Value>,
    residuals: serde_json::Map<String, Value>,
    pass: bool,
}

impl<M: ReductionModel> Transcript<'_, M> {
    /// Records `result`, compared against `expected` when one is given.
    fn step(&mut self, name: &str, result: poisson_groupoid::Result<Reduced<M>>, expected: Option<&Reduced<M>>) -> Option<Reduced<M>> {
        match result {
            Ok(r) => {
                let mut v = json!({ "name": name, "status": "ok", "result": reduction::reduced_to_json(self.m, &r) });
                if let Some(e) = expected {
                    let d = reduction::reduced_distance(self.m, &r, e);
                    v["residual"] = json!(d);
                    self.residuals.insert(name.to_string(), json!(d));
                    self.pass &= d <= REDUCED_COMPOSE_TOL;
                }
                self.steps.push(v);
                Some(r)
            }
            Err(Error::NotComposable { residual }) => {
                self.steps.push(json!({ "name": name, "status": "not_composable", "residual": residual }));
                None
            }
            Err(e) => {
                self.pass = false;
                self.steps.push(json!({ "name": name, "status": "error", "message": e.to_string() }));
                None
            }
        }
    }
}

fn run_reduce<M: ReductionModel>(m: &M, a: &ReduceArgs) -> Result<(), Failure> {
    let q = m.quotient_dim();
    let z1 = floats_n("z1", &a.z1, q)?;
    let gamma_coords = floats_n("gamma", &a.gamma, m.dim())?;
    let lambda = m.gstar_exp(&gamma_coords)?;
    let off = m
        .coset_label(&lambda)
        .iter()
        .zip(m.unit_coset_label())
        .fold(0.0f64, |acc, (p, u)| acc.max((p - u).abs()));
    if off > reduction::LEVEL_TOL {
        return Err(Failure::Usage(format!("gamma is not in H^perp (coset label off by {off:.3e})")));
    }
    let element = |z: &[f64]| -> Result<Reduced<M>, Failure> {
        Ok(reduction::canonicalize(m, &reduction::level_point(m, &m.section(z)?, &lambda)?)?)
    };
    let ea = element(&z1)?;
    let z2 = match &a.z2 {
        Some(s) => floats_n("z2", s, q)?,
        None => reduction::reduced_target(m, &ea),
    };
    let eb = element(&z2)?;
    let inv = reduction::reduced_inverse(m, &ea)?;
    let unit = reduction::reduced_unit(m, &z1)?;

    let mut t = Transcript { m, steps: Vec::new(), residuals: serde_json::Map::new(), pass: true };
    for (name, e) in [("a", &ea), ("b", &eb), ("inverse_a", &inv)] {
        let omega = poisson_groupoid::groupoid::omega_residual(m, &e.rep);
        let level = reduction::level_residual(m, &e.rep);
        t.residuals.insert(format!("{name}.omega"), json!(omega));
        t.residuals.insert(format!("{name}.level"), json!(level));
        t.pass &= omega <= poisson_groupoid::groupoid::OMEGA_TOL && level <= reduction::LEVEL_TOL;
    }
    let ab = t.step("a*b", reduction::reduced_mult(m, &ea, &eb), None);
    t.step("unit(z1)*a", reduction::reduced_mult(m, &unit, &ea), Some(&ea));
    t.step("a*inverse(a)", reduction::reduced_mult(m, &ea, &inv), Some(&unit));
    if let Some(ab) = ab {
        let mut rng = sampling::rng(a.seed);
        let (h1, h2) = (m.h_sample(&mut rng), m.h_sample(&mut rng));
        let replay = reduction::h_act(m, &h1, &ea.rep)
            .and_then(|x| Ok((x, reduction::h_act(m, &h2, &eb.rep)?)))
            .and_then(|(x, y)| reduction::reduced_mult_reps(m, &x, &y));
        t.step("a*b replayed with shifted representatives", replay, Some(&ab));
    }

    let transcript = json!({
        "schema": 1,
        "model": m.name(),
        "inputs": { "z1": z1, "z2": z2, "gamma": gamma_coords, "seed": a.seed },
        "elements": {
            "a": reduction::reduced_to_json(m, &ea),
            "b": reduction::reduced_to_json(m, &eb),
            "inverse_a": reduction::reduced_to_json(m, &inv),
        },
        "steps": t.steps,
        "residuals": t.residuals,
        "tolerance": REDUCED_COMPOSE_TOL,
        "pass": t.pass,
    });
    emit_json(a.out.as_deref(), &transcript)?;
    if t.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("a residual exceeds {REDUCED_COMPOSE_TOL:e}")))
    }
}
