use poisson_groupoid::dressing::{self, FlowConfig, Termination};
use poisson_groupoid::fd::FD_STEP;
use poisson_groupoid::*;

fn su11() -> Su11Model {
    build_su11().unwrap()
}

fn witness() -> GroupPoint {
    GroupPoint::new(C64::new(2f64.sqrt(), 0.0), C64::new(1.0, 0.0)).unwrap()
}

#[test]
fn identity_dresses_trivially() {
    let m = su11();
    let mut rng = sampling::rng(1);
    for _ in 0..20 {
        let s = m.gstar_sample(&mut rng);
        let g = m.g_sample(&mut rng);
        assert!(m.gstar_distance(&dressing::dress_left(&m, &m.g_identity(), &s).unwrap(), &s) < 1e-14);
        assert!(m.g_distance(&dressing::dress_right(&m, &g, &m.gstar_identity()).unwrap(), &g) < 1e-14);
    }
}

#[test]
fn diagonal_h_rotates_n() {
    let m = su11();
    let theta = 0.4;
    let h = GroupPoint::rotation(theta);
    let s = DualGroupPoint::new(1.0, C64::new(0.7, -1.2)).unwrap();
    let (hs, hg) = dressing::dress(&m, &h, &s).unwrap();
    assert!((hs.a - 1.0).abs() < 1e-14);
    assert!((hs.n - C64::from_polar(1.0, 2.0 * theta) * s.n).norm() < 1e-14);
    assert!(m.g_distance(&hg, &h) < 1e-14);
}

#[test]
fn dressing_reconstructs_the_product() {
    let m = su11();
    let mut rng = sampling::rng(2);
    for _ in 0..200 {
        let (g, s) = sampling::factorizable_pair(&m, &mut rng, 1e-3).unwrap();
        let (ls, rg) = dressing::dress(&m, &g, &s).unwrap();
        let lhs = m.d_mul(&m.embed_gstar(&ls), &m.embed_g(&rg));
        let rhs = m.d_mul(&m.embed_g(&g), &m.embed_gstar(&s));
        assert!(m.d_distance(&lhs, &rhs) <= 1e-10 * (1.0 + rhs.m.max_abs()));
    }
}

#[test]
fn compatibility_identities() {
    let m = su11();
    let mut rng = sampling::rng(3);
    let mut checked = 0;
    for _ in 0..300 {
        let (g1, g2, s) = (m.g_sample(&mut rng), m.g_sample(&mut rng), m.gstar_sample(&mut rng));
        let (Ok((s2, g2s)), Ok((_, lhs))) = (dressing::dress(&m, &g2, &s), dressing::dress(&m, &m.g_mul(&g1, &g2), &s)) else {
            continue;
        };
        let Ok((_, g1s)) = dressing::dress(&m, &g1, &s2) else { continue };
        let rhs = m.g_mul(&g1s, &g2s);
        assert!(m.g_distance(&lhs, &rhs) <= 1e-10 * (1.0 + lhs.alpha.norm()));
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn field_on_gstar_examples() {
    let m = su11();
    let v = dressing::dressing_field_on_gstar(&m, &[0.3, -1.0, 0.5], &m.gstar_identity()).unwrap();
    assert!(v.coords.iter().all(|c| *c == 0.0));
    let s = DualGroupPoint::new(1.0, C64::new(0.5, 0.25)).unwrap();
    let e0 = [1.0, 0.0, 0.0];
    let a = dressing::dressing_field_on_gstar(&m, &e0, &s).unwrap();
    let b = dressing::dressing_field_on_gstar_fd(&m, &e0, &s, FD_STEP).unwrap();
    for (p, q) in a.coords.iter().zip(&b.coords) {
        assert!((p - q).abs() <= 1e-5);
    }
    // the A-direction is f^0: H keeps H^perp invariant
    assert!(a.coords[0].abs() < 1e-14);
}

#[test]
fn field_on_g_examples() {
    let m = su11();
    let v = dressing::dressing_field_on_g(&m, &[0.3, -1.0, 0.5], &m.g_identity()).unwrap();
    assert!(v.coords.iter().all(|c| c.abs() < 1e-15));
    let h = GroupPoint::rotation(0.9);
    let v = dressing::dressing_field_on_g(&m, &[0.0, 1.0, -0.5], &h).unwrap();
    assert!(v.coords.iter().all(|c| c.abs() < 1e-15), "H^perp acts trivially on H");
    let mut rng = sampling::rng(4);
    for _ in 0..50 {
        let g = m.g_sample(&mut rng);
        let xi = [0.25, -0.5, 1.0];
        let a = dressing::dressing_field_on_g(&m, &xi, &g).unwrap();
        let b = dressing::dressing_field_on_g_fd(&m, &xi, &g, FD_STEP).unwrap();
        assert!(a.coords.iter().zip(&b.coords).all(|(p, q)| (p - q).abs() <= 1e-5));
    }
}

#[test]
fn sharp_form_holds_and_catches_a_sign_flip() {
    let m = su11();
    assert!(dressing::sharp_form_check(&m, &[1.0, 2.0, 3.0], &m.gstar_identity()).unwrap() == 0.0);
    let mut rng = sampling::rng(5);
    let mut worst_mutant = f64::INFINITY;
    for _ in 0..300 {
        let s = m.gstar_sample(&mut rng);
        let x = [0.5, -1.5, 1.0];
        assert!(dressing::sharp_form_check(&m, &x, &s).unwrap() <= 1e-9);
        let pi = tensors::pi_gstar(&m, &s).unwrap();
        let flipped = BivectorMatrix::new(-pi.mat.clone(), pi.frame, "mutant").unwrap();
        if pi.max_abs() > 0.5 {
            worst_mutant = worst_mutant.min(dressing::sharp_form_residual(&m, &x, &s, &flipped).unwrap());
        }
    }
    assert!(worst_mutant > 1e-3, "{worst_mutant}");
}

#[test]
fn zero_direction_flow_is_constant() {
    let m = su11();
    let g = m.g_sample(&mut sampling::rng(6));
    let t = dressing::flow(&m, &g, &[0.0; 3], 1.0, &FlowConfig { dt: 1e-2, ..Default::default() }).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert_eq!(t.times.len(), 101);
    assert!(t.points.iter().all(|p| m.g_distance(p, &g) < 1e-14));
}

#[test]
fn nilpotent_flow_escapes_at_the_margin_root() {
    let m = su11();
    let target = 1.0 - 2f64.sqrt();
    let mut times = vec![];
    for dt in [1e-3, 5e-4] {
        let t = dressing::flow(&m, &witness(), &[0.0, 0.0, -1.0], -1.0, &FlowConfig { dt, ..Default::default() }).unwrap();
        let Termination::Escaped { t_escape } = t.termination else { panic!("{}", t.termination) };
        assert!((t_escape - target).abs() <= 1e-6, "{t_escape}");
        assert!(t.rk_deviation <= 1e-6);
        assert!(t.times.iter().all(|s| *s <= 0.0 && *s > target));
        times.push(t_escape);
    }
    assert!((times[0] - times[1]).abs() <= 1e-6);
    // the same direction forward never reaches the boundary
    let t = dressing::flow(&m, &witness(), &[0.0, 0.0, -1.0], 1.0, &FlowConfig::default()).unwrap();
    assert_eq!(t.termination, Termination::Completed);
}

#[test]
fn h_restricted_flow_is_complete() {
    let m = su11();
    let h = GroupPoint::rotation(-1.1);
    for t_end in [-10.0, 25.0] {
        let t = dressing::flow(&m, &h, &[0.0, 2.0, -3.0], t_end, &FlowConfig { dt: 1e-1, ..Default::default() }).unwrap();
        assert_eq!(t.termination, Termination::Completed);
        assert!(t.points.iter().all(|p| m.g_distance(p, &h) < 1e-14));
    }
}

#[test]
fn flow_options_are_validated() {
    let m = su11();
    let g = m.g_identity();
    assert!(dressing::flow(&m, &g, &[0.0; 2], 1.0, &FlowConfig::default()).is_err());
    assert!(dressing::flow(&m, &g, &[0.0; 3], 1.0, &FlowConfig { dt: 0.0, ..Default::default() }).is_err());
    assert!(dressing::flow(&m, &g, &[0.0; 3], f64::NAN, &FlowConfig::default()).is_err());
    let t = dressing::flow(&m, &g, &[1.0, 0.0, 0.0], 1.0, &FlowConfig { dt: 1e-3, max_steps: 10, ..Default::default() }).unwrap();
    assert_eq!(t.termination, Termination::StepLimit);
}

#[test]
fn csv_layout() {
    let m = su11();
    let t = dressing::flow(&m, &witness(), &[0.0, 0.0, -1.0], -1.0, &FlowConfig { dt: 1e-2, ..Default::default() }).unwrap();
    let csv = t.to_csv(&m);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,re_alpha,im_alpha,re_beta,im_beta,margin");
    assert_eq!(lines.len(), t.times.len() + 2);
    assert!(lines.last().unwrap().starts_with("# termination=escaped(t=-0.41421"));
    assert_eq!(lines[1].split(',').count(), 6);
}

#[test]
fn trivial_flows_are_complete() {
    let m = build_trivial(3, 1).unwrap();
    let mut rng = sampling::rng(7);
    let g = m.g_sample(&mut rng);
    let t = dressing::flow(&m, &g, &[1.0, -2.0, 0.5], -3.0, &FlowConfig { dt: 1e-2, ..Default::default() }).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert!(t.points.iter().all(|p| p == &g));
}
