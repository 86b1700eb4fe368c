//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines are always printed; exits non-zero when any criterion fails that is
//! not listed in `KNOWN_UNATTAINABLE`.

use std::time::{Duration, Instant};

use poisson_groupoid::dressing::{self, FlowConfig, Termination};
use poisson_groupoid::fd::FD_STEP;
use poisson_groupoid::groupoid::{self, Element};
use poisson_groupoid::groups::FactorOrder;
use poisson_groupoid::reduction;
use poisson_groupoid::sampling::{self, stream};
use poisson_groupoid::verify::{self, Suite};
use poisson_groupoid::*;
use rand::Rng;

type R<T> = std::result::Result<T, String>;

type Criterion<'a> = Box<dyn Fn() -> R<Outcome> + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> R<Outcome> {
    Ok(Outcome { pass, detail })
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (p, q)| acc.max((p - q).abs()))
}

fn dist<M: PoissonDouble>(m: &M, a: &Element<M>, b: &Element<M>) -> f64 {
    groupoid::element_distance(m, a, b)
}

fn c1_bialgebra(m: &Su11Model) -> R<Outcome> {
    let start = Instant::now();
    let r = verify::run(&Model::Su11(m.clone()), Suite::Algebra, 0, 100);
    let took = start.elapsed();
    let ids = ["algebra.jacobi_g", "algebra.jacobi_gstar", "algebra.cocycle", "algebra.pairing_invariance", "algebra.double_jacobi"];
    let mut worst = 0.0f64;
    for id in ids {
        worst = worst.max(r.check(id).ok_or(format!("missing {id}"))?.max_defect);
    }
    outcome(worst <= 1e-12 && r.pass && took < Duration::from_secs(1), format!("max defect {worst:.2e}, {:.3} s", secs(took)))
}

/// Margins read directly off the matrix entries.
fn closed_margin(d: &DoublePoint, order: FactorOrder) -> f64 {
    let (d21, d11, d22) = (d.m.at(1, 0), d.m.at(0, 0), d.m.at(1, 1));
    match order {
        FactorOrder::GGstar => d11.norm_sqr() - d21.norm_sqr(),
        FactorOrder::GstarG => d22.norm_sqr() - d21.norm_sqr(),
    }
}

fn c2_factorization(m: &Su11Model) -> R<Outcome> {
    let start = Instant::now();
    let mut rng = stream(0, "acceptance.factorization");
    let (mut roundtrips, mut worst, mut mismatches, mut refused) = (0usize, 0.0f64, 0usize, 0usize);
    while roundtrips < 1000 {
        let u: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let d = m.d_exp(&DoubleVector::from_coords(&u));
        for order in [FactorOrder::GGstar, FactorOrder::GstarG] {
            let margin = closed_margin(&d, order);
            match m.factorize(&d, order) {
                Ok(f) => {
                    if margin <= 0.0 {
                        mismatches += 1;
                    }
                    if margin > 1e-3 && roundtrips < 1000 {
                        let (g, s) = (m.embed_g(&f.g), m.embed_gstar(&f.gamma));
                        let back = if order == FactorOrder::GGstar { m.d_mul(&g, &s) } else { m.d_mul(&s, &g) };
                        worst = worst.max(m.d_distance(&back, &d));
                        roundtrips += 1;
                    }
                }
                Err(Error::NotFactorizable { .. }) => {
                    refused += 1;
                    if margin > 0.0 {
                        mismatches += 1;
                    }
                }
                Err(err) => return Err(e(err)),
            }
        }
    }
    let took = start.elapsed();
    outcome(
        worst <= 1e-10 && mismatches == 0 && refused > 0 && took < Duration::from_secs(1),
        format!("{roundtrips} round trips, max residual {worst:.2e}; {refused} refusals, {mismatches} margin mismatches; {:.3} s", secs(took)),
    )
}

fn c3_dressing(m: &Su11Model) -> R<Outcome> {
    let mut rng = stream(0, "acceptance.dressing");
    let (mut right, mut left, mut n) = (0.0f64, 0.0f64, 0usize);
    while n < 500 {
        let (g1, s) = sampling::factorizable_pair(m, &mut rng, 1e-2).map_err(e)?;
        let (g2, s2) = (m.g_sample(&mut rng), m.gstar_sample(&mut rng));
        let attempt = || -> Result<(f64, f64)> {
            let (ds, g2s) = dressing::dress(m, &g2, &s)?;
            let (_, lhs) = dressing::dress(m, &m.g_mul(&g1, &g2), &s)?;
            let (_, g1s) = dressing::dress(m, &g1, &ds)?;
            let a = m.g_distance(&lhs, &m.g_mul(&g1s, &g2s));
            let (gs1, gg) = dressing::dress(m, &g1, &s)?;
            let (lhs, _) = dressing::dress(m, &g1, &m.gstar_mul(&s, &s2))?;
            let (gs2, _) = dressing::dress(m, &gg, &s2)?;
            Ok((a, m.gstar_distance(&lhs, &m.gstar_mul(&gs1, &gs2))))
        };
        if let Ok((a, b)) = attempt() {
            right = right.max(a);
            left = left.max(b);
            n += 1;
        }
    }
    let mut sharp = 0.0f64;
    for _ in 0..300 {
        let s = m.gstar_sample(&mut rng);
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        sharp = sharp.max(dressing::sharp_form_check(m, &x, &s).map_err(e)?);
    }
    let mut field = 0.0f64;
    for _ in 0..100 {
        let (g, s) = (m.g_sample(&mut rng), m.gstar_sample(&mut rng));
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = dressing::dressing_field_on_gstar(m, &x, &s).map_err(e)?;
        let b = dressing::dressing_field_on_gstar_fd(m, &x, &s, FD_STEP).map_err(e)?;
        field = field.max(max_diff(&a.coords, &b.coords));
        let a = dressing::dressing_field_on_g(m, &x, &g).map_err(e)?;
        let b = dressing::dressing_field_on_g_fd(m, &x, &g, FD_STEP).map_err(e)?;
        field = field.max(max_diff(&a.coords, &b.coords));
    }
    outcome(
        right <= 1e-9 && left <= 1e-9 && sharp <= 1e-9 && field <= 1e-5,
        format!("compatibility {right:.2e} / {left:.2e} on {n}; sharp form {sharp:.2e} on 300; fields vs FD {field:.2e}"),
    )
}

fn c4_witness(m: &Su11Model) -> R<Outcome> {
    let start = Instant::now();
    let (g0, xi) = verify::escape_witness();
    let escape = |dt: f64| -> R<(f64, f64)> {
        let t = dressing::flow(m, &g0, &xi, -1.0, &FlowConfig { dt, ..FlowConfig::default() }).map_err(e)?;
        match t.termination {
            Termination::Escaped { t_escape } => Ok((t_escape, t.rk_deviation)),
            other => Err(format!("witness flow ended with {other}")),
        }
    };
    let (t1, rk1) = escape(1e-3)?;
    let (t2, rk2) = escape(5e-4)?;
    let err = (t1 - (1.0 - 2f64.sqrt())).abs();
    let h = GroupPoint::rotation(0.7);
    let restricted = dressing::flow(m, &h, &[0.0, 1.0, -2.0], 10.0, &FlowConfig::default()).map_err(e)?;
    let drift = restricted.points.iter().map(|p| m.g_distance(p, &h)).fold(0.0, f64::max);
    let complete = restricted.termination == Termination::Completed;
    let took = start.elapsed();
    outcome(
        err <= 1e-6 && (t1 - t2).abs() <= 1e-6 && complete && drift <= 1e-12 && rk1.max(rk2) <= 1e-6 && took < Duration::from_secs(5),
        format!(
            "t_escape {t1:.10} (error {err:.1e}, dt-halving gap {:.1e}, RK gap {:.1e}); H-restricted {} with drift {drift:.1e}; {:.3} s",
            (t1 - t2).abs(),
            rk1.max(rk2),
            restricted.termination,
            secs(took)
        ),
    )
}

fn c5_tensors(m: &Su11Model) -> R<Outcome> {
    let at_id = tensors::pi_g(m, &m.g_identity()).map_err(e)?.max_abs().max(tensors::pi_gstar(m, &m.gstar_identity()).map_err(e)?.max_abs());
    let mut rng = stream(0, "acceptance.tensors");
    let (mut agree, mut min_det, mut mult) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..500 {
        let (g, s) = (m.g_sample(&mut rng), m.gstar_sample(&mut rng));
        agree = agree.max(tensors::pi_plus_expansions(m, &g, &s).map_err(e)?.agreement_defect());
        min_det = min_det.min(tensors::pi_plus(m, &g, &s).map_err(e)?.determinant().abs());
        let (h, t) = (m.g_sample(&mut rng), m.gstar_sample(&mut rng));
        mult = mult.max(tensors::multiplicativity_defect_g(m, &g, &h).map_err(e)?);
        mult = mult.max(tensors::multiplicativity_defect_gstar(m, &s, &t).map_err(e)?);
    }
    let (n_root, det_root) = gstar_g_boundary_det(m).map_err(e)?;
    outcome(
        at_id <= 1e-14 && agree <= 1e-10 && min_det >= 1e-6 && mult <= 1e-9,
        format!(
            "identity {at_id:.1e}; expansions {agree:.2e}; min |det| {min_det:.3e}; multiplicativity {mult:.2e}; \
             |det| {det_root:.1e} at g = (sqrt 2, 1), gamma = (1, {n_root:.6}) where g gamma leaves G* G"
        ),
    )
}

/// Bisects `N` along `gamma = (1, N)`, `N` real in [-2, 2], for the zero of the
/// `G* G` margin of `g gamma` with `g = (sqrt 2, 1)`, and returns `|det pi_+|` there.
fn gstar_g_boundary_det(m: &Su11Model) -> Result<(f64, f64)> {
    let g = GroupPoint::new(C64::new(2f64.sqrt(), 0.0), C64::new(1.0, 0.0))?;
    let at = |n: f64| -> Result<(f64, DualGroupPoint)> {
        let s = DualGroupPoint::new(1.0, C64::new(n, 0.0))?;
        Ok((closed_margin(&m.d_mul(&m.embed_g(&g), &m.embed_gstar(&s)), FactorOrder::GstarG), s))
    };
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    let sign = at(lo)?.0.signum();
    if sign == at(hi)?.0.signum() {
        return Err(Error::Domain("margin does not change sign on the segment".into()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid)?.0.signum() == sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = at(lo)?.1;
    Ok((lo, tensors::pi_plus(m, &g, &s)?.determinant().abs()))
}

fn c6_groupoid(m: &Su11Model) -> R<Outcome> {
    let mut rng = stream(0, "acceptance.groupoid");
    let (mut axioms, mut action, mut anchor_gap, mut poisson) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let c = sampling::composable_g(m, &mut rng, 3, 1e-2).map_err(e)?;
        let mult = |a: &Element<Su11Model>, b: &Element<Su11Model>| groupoid::mult_g(m, a, b).map_err(e);
        let x = &c[0];
        axioms = axioms.max(dist(m, &mult(&groupoid::unit_g(m, &x.g1), x)?, x));
        axioms = axioms.max(dist(m, &mult(x, &groupoid::unit_g(m, &x.g2))?, x));
        axioms = axioms.max(dist(m, &mult(x, &groupoid::inverse_g(m, x))?, &groupoid::unit_g(m, &x.g1)));
        axioms = axioms.max(dist(m, &mult(&mult(&c[0], &c[1])?, &c[2])?, &mult(&c[0], &mult(&c[1], &c[2])?)?));
        let p = mult(&c[0], &c[1])?;
        anchor_gap = anchor_gap.max(m.gstar_distance(&groupoid::anchor(m, &p), &m.gstar_mul(&c[0].gamma2, &c[1].gamma2)));

        let c = sampling::composable_gstar(m, &mut rng, 3, 1e-2).map_err(e)?;
        let mult = |a: &Element<Su11Model>, b: &Element<Su11Model>| groupoid::mult_gstar(m, a, b).map_err(e);
        let x = &c[0];
        axioms = axioms.max(dist(m, &mult(&groupoid::unit_gstar(m, &x.gamma2), x)?, x));
        axioms = axioms.max(dist(m, &mult(x, &groupoid::unit_gstar(m, &x.gamma1))?, x));
        axioms = axioms.max(dist(m, &mult(x, &groupoid::inverse_gstar(m, x))?, &groupoid::unit_gstar(m, &x.gamma2)));
        axioms = axioms.max(dist(m, &mult(&mult(&c[0], &c[1])?, &c[2])?, &mult(&c[0], &mult(&c[1], &c[2])?)?));

        // x1, x2 over G* acting on y with J(y) = beta_G*(x2)
        let y = loop {
            if let Ok(y) = groupoid::make_from_right(m, &c[1].gamma1, &m.g_sample(&mut rng)) {
                break y;
            }
        };
        let act = |a: &Element<Su11Model>, b: &Element<Su11Model>| groupoid::act(m, a, b).map_err(e);
        action = action.max(dist(m, &act(&mult(&c[0], &c[1])?, &y)?, &act(&c[0], &act(&c[1], &y)?)?));
        action = action.max(dist(m, &act(&groupoid::unit_gstar(m, &y.gamma2), &y)?, &y));
        action = action.max(m.gstar_distance(&groupoid::anchor(m, &act(&c[1], &y)?), &c[1].gamma2));
    }
    for _ in 0..100 {
        let x = sampling::omega_point(m, &mut rng, 1e-2).map_err(e)?;
        poisson = poisson.max(groupoid::source_poisson_defect(m, &x, FD_STEP).map_err(e)?);
        poisson = poisson.max(groupoid::target_anti_poisson_defect(m, &x, FD_STEP).map_err(e)?);
    }
    outcome(
        axioms <= 1e-9 && action <= 1e-10 && anchor_gap == 0.0 && poisson <= 1e-5,
        format!("axioms {axioms:.2e} on 500+500 tuples; action {action:.2e}; J gap {anchor_gap:e}; source/target Poisson {poisson:.2e}"),
    )
}

fn c7_momentum(m: &Su11Model) -> R<Outcome> {
    let mut rng = stream(0, "acceptance.momentum");
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = sampling::omega_point(m, &mut rng, 1e-2).map_err(e)?;
        let xv: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(groupoid::momentum_identity_defect(m, &x, &xv, FD_STEP).map_err(e)?);
    }
    outcome(worst <= 1e-4, format!("max defect {worst:.2e} on 100 points"))
}

fn c8_reduction(m: &Su11Model) -> R<Outcome> {
    let mut rng = stream(0, "acceptance.reduction");
    let (mut closure, mut cois, mut axioms, mut indep) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let c = sampling::level_chain(m, &mut rng, 3, 1e-2).map_err(e)?;
        closure = closure.max(reduction::level_residual(m, &groupoid::mult_g(m, &c[0], &c[1]).map_err(e)?));
        cois = cois.max(reduction::coisotropy_defect(m, &c[0], FD_STEP).map_err(e)?);
        let r: Vec<_> = c.iter().map(|x| reduction::canonicalize(m, x)).collect::<Result<_>>().map_err(e)?;
        let mult = |a: &reduction::Reduced<Su11Model>, b: &reduction::Reduced<Su11Model>| reduction::reduced_mult(m, a, b).map_err(e);
        let l = mult(&mult(&r[0], &r[1])?, &r[2])?;
        let rr = mult(&r[0], &mult(&r[1], &r[2])?)?;
        axioms = axioms.max(reduction::reduced_distance(m, &l, &rr));
        let unit_s = reduction::reduced_unit(m, &r[0].disc_point).map_err(e)?;
        let unit_t = reduction::reduced_unit(m, &reduction::reduced_target(m, &r[0])).map_err(e)?;
        axioms = axioms.max(reduction::reduced_distance(m, &mult(&unit_s, &r[0])?, &r[0]));
        axioms = axioms.max(reduction::reduced_distance(m, &mult(&r[0], &unit_t)?, &r[0]));
        axioms = axioms.max(reduction::reduced_distance(m, &mult(&r[0], &reduction::reduced_inverse(m, &r[0]).map_err(e)?)?, &unit_s));
        let a = reduction::h_act(m, &m.h_sample(&mut rng), &c[0]).map_err(e)?;
        let b = reduction::h_act(m, &m.h_sample(&mut rng), &c[1]).map_err(e)?;
        let p = reduction::reduced_mult_reps(m, &c[0], &c[1]).map_err(e)?;
        indep = indep.max(reduction::reduced_distance(m, &p, &reduction::reduced_mult_reps(m, &a, &b).map_err(e)?));
    }
    let off = groupoid::make_from_right(m, &DualGroupPoint::new(2.0, C64::new(0.0, 0.0)).map_err(e)?, &m.g_sample(&mut rng)).map_err(e)?;
    let control = reduction::coisotropy_defect(m, &off, FD_STEP).map_err(e)?;
    let at_zero = reduction::disc_bivector(m, &[0.0, 0.0], FD_STEP).map_err(e)?.max_abs();
    let (mut orbit, mut section) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let z = m.quotient_sample(&mut rng);
        let base = reduction::disc_bivector(m, &z, FD_STEP).map_err(e)?;
        let g = m.g_mul(&m.h_sample(&mut rng), &m.section(&z).map_err(e)?);
        orbit = orbit.max((&reduction::coinduced_bivector_at(m, &g, FD_STEP).map_err(e)?.mat - &base.mat).amax());
        let x = sampling::level_point(m, &mut rng, 1e-2).map_err(e)?;
        let a = reduction::canonicalize(m, &x).map_err(e)?;
        let c1 = reduction::cotangent_chart(m, &a, FD_STEP).map_err(e)?;
        let c2 = reduction::cotangent_chart_with_section(m, &a, FD_STEP, |z| {
            Ok(m.g_mul(&GroupPoint::rotation(0.9 * z[0] + 0.5 * z[1] * z[1]), &m.section(z)?))
        })
        .map_err(e)?;
        section = section.max(max_diff(&c1.coords, &c2.coords));
    }
    outcome(
        closure <= 1e-9 && cois <= 1e-4 && control > 1e-2 && axioms <= 1e-8 && indep <= 1e-8 && at_zero <= 1e-10 && orbit <= 1e-8 && section <= 1e-8,
        format!(
            "closure {closure:.1e}; coisotropy {cois:.2e} (control {control:.2}); axioms {axioms:.1e}; representatives {indep:.1e}; \
             bivector at 0 {at_zero:.1e}, orbit {orbit:.1e}; sections {section:.1e}"
        ),
    )
}

fn c9_null_control() -> R<Outcome> {
    let model = poisson_groupoid::models::build("trivial").map_err(e)?;
    let r = verify::run(&model, Suite::All, 0, 100);
    let worst = r.checks.iter().map(|c| c.max_defect).fold(0.0, f64::max);
    let Model::Trivial(m) = &model else { return Err("trivial model expected".into()) };
    let mut rng = stream(0, "acceptance.null");
    let mut bivector = 0.0f64;
    for _ in 0..100 {
        let z = m.quotient_sample(&mut rng);
        bivector = bivector.max(reduction::disc_bivector(m, &z, FD_STEP).map_err(e)?.max_abs());
    }
    outcome(
        r.pass && worst <= 1e-14 && bivector == 0.0,
        format!("{} checks, max defect {worst:.1e}; reduced bivector max {bivector:e}", r.checks.len()),
    )
}

fn c10_full_verify(m: &Su11Model) -> R<Outcome> {
    let model = Model::Su11(m.clone());
    let start = Instant::now();
    let a = verify::run(&model, Suite::All, 0, verify::DEFAULT_SAMPLES);
    let took = start.elapsed();
    let b = verify::run(&model, Suite::All, 0, verify::DEFAULT_SAMPLES);
    let same = serde_json::to_string(&a).map_err(e)? == serde_json::to_string(&b).map_err(e)?;
    let failed: Vec<&str> = a.failures().map(|c| c.id.as_str()).collect();
    outcome(
        a.pass && same && took < Duration::from_secs(60),
        format!("{} checks, failures {failed:?}, {:.2} s, identical rerun: {same}", a.checks.len(), secs(took)),
    )
}

/// Criteria that cannot hold as stated. They still print FAIL but do not
/// set the exit status.
const KNOWN_UNATTAINABLE: &[(usize, &str)] = &[(
    5,
    "det pi_+(g, gamma) vanishes wherever g gamma leaves G* G, and that locus crosses the \
     |beta| <= 2, A in [1/2, 2], |N| <= 2 box, so no positive lower bound holds there",
)];

fn main() {
    let m = build_su11().expect("su11 registers");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("bialgebra", Box::new(|| c1_bialgebra(&m))),
        ("factorization", Box::new(|| c2_factorization(&m))),
        ("dressing laws", Box::new(|| c3_dressing(&m))),
        ("incompleteness witness", Box::new(|| c4_witness(&m))),
        ("tensors", Box::new(|| c5_tensors(&m))),
        ("groupoid axioms", Box::new(|| c6_groupoid(&m))),
        ("momentum identity", Box::new(|| c7_momentum(&m))),
        ("reduction", Box::new(|| c8_reduction(&m))),
        ("null control", Box::new(c9_null_control)),
        ("full verify", Box::new(|| c10_full_verify(&m))),
    ];
    let (mut failed, mut unexpected) = (0, 0);
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run().unwrap_or_else(|err| Outcome { pass: false, detail: format!("error: {err}") });
        if !o.pass {
            failed += 1;
            if !KNOWN_UNATTAINABLE.iter().any(|(k, _)| *k == i + 1) {
                unexpected += 1;
            }
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    for (k, why) in KNOWN_UNATTAINABLE {
        println!("known unattainable {k}: {why}");
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
