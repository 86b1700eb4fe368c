use poisson_groupoid::algebra::SubspaceData;
use poisson_groupoid::fd::FD_STEP;
use poisson_groupoid::groupoid::{self, make, make_from_right, unit_g};
use poisson_groupoid::reduction::*;
use poisson_groupoid::*;

fn su11() -> Su11Model {
    build_su11().unwrap()
}

fn perp(n: C64) -> DualGroupPoint {
    DualGroupPoint::new(1.0, n).unwrap()
}

fn level(m: &Su11Model, g1: GroupPoint, n: C64) -> Element<Su11Model> {
    level_point(m, &g1, &perp(n)).unwrap()
}

#[test]
fn level_set_membership() {
    let m = su11();
    let g = m.g_sample(&mut sampling::rng(1));
    assert!(level_set_contains(&m, &unit_g(&m, &g)));
    assert!(level_set_contains(&m, &make_from_right(&m, &perp(C64::new(3.0, 1.0)), &g).unwrap()));
    let off = make_from_right(&m, &DualGroupPoint::new(2.0, C64::new(0.0, 0.0)).unwrap(), &m.g_identity()).unwrap();
    assert_eq!(j_h(&m, &off), vec![2.0]);
    assert!(!level_set_contains(&m, &off));
    let h = GroupPoint::rotation(0.8);
    assert!(level_set_contains(&m, &make(&m, &h, &perp(C64::new(-0.5, 1.5))).unwrap()));
}

#[test]
fn h_action_examples() {
    let m = su11();
    let mut rng = sampling::rng(2);
    let x = sampling::level_point(&m, &mut rng, 1e-2).unwrap();
    assert!(groupoid::element_distance(&m, &h_act(&m, &m.g_identity(), &x).unwrap(), &x) < 1e-15);
    let h = GroupPoint::new(C64::new(0.0, 1.0), C64::new(0.0, 0.0)).unwrap();
    let y = h_act(&m, &h, &x).unwrap();
    assert!((y.gamma2.n + x.gamma2.n).norm() < 1e-14);
    assert!((y.g1.alpha - C64::new(0.0, 1.0) * x.g1.alpha).norm() < 1e-14);
    assert!(m.gstar_distance(&y.gamma1, &x.gamma1) == 0.0);
    for _ in 0..50 {
        let x = sampling::level_point(&m, &mut rng, 1e-2).unwrap();
        let (h1, h2) = (m.h_sample(&mut rng), m.h_sample(&mut rng));
        let l = h_act(&m, &m.g_mul(&h1, &h2), &x).unwrap();
        let r = h_act(&m, &h1, &h_act(&m, &h2, &x).unwrap()).unwrap();
        assert!(groupoid::element_distance(&m, &l, &r) <= 1e-10 * (1.0 + x.g2.alpha.norm()));
    }
    assert!(matches!(h_act(&m, &m.g_sample(&mut rng), &x), Err(Error::Membership { .. })));
}

#[test]
fn canonical_representatives() {
    let m = su11();
    let mut rng = sampling::rng(3);
    for _ in 0..100 {
        let x = sampling::level_point(&m, &mut rng, 1e-2).unwrap();
        let a = canonicalize(&m, &x).unwrap();
        assert!(a.rep.g1.alpha.im.abs() < 1e-15 && a.rep.g1.alpha.re > 0.0);
        let b = canonicalize(&m, &h_act(&m, &m.h_sample(&mut rng), &x).unwrap()).unwrap();
        assert!(reduced_distance(&m, &a, &b) <= 1e-9);
        assert!(reduced_distance(&m, &canonicalize(&m, &a.rep).unwrap(), &a) < 1e-15);
        let z = x.g1.beta / x.g1.alpha;
        assert!((a.disc_point[0] - z.re).abs() < 1e-14 && (a.disc_point[1] - z.im).abs() < 1e-14);
    }
}

#[test]
fn reduced_units_and_laws() {
    let m = su11();
    let z = [0.3, -0.4];
    let u = reduced_unit(&m, &z).unwrap();
    assert_eq!(reduced_source(&m, &u), z.to_vec());
    assert!(reduced_target(&m, &u).iter().zip(&z).all(|(a, b)| (a - b).abs() < 1e-15));
    let s = (1.0f64 - 0.25).sqrt().recip();
    assert!((u.rep.g1.alpha - C64::new(s, 0.0)).norm() < 1e-15);
    assert!((u.rep.g1.beta - C64::new(0.3 * s, -0.4 * s)).norm() < 1e-15);
    let uu = reduced_mult(&m, &u, &u).unwrap();
    assert!(reduced_distance(&m, &uu, &u) <= 1e-12);

    let mut rng = sampling::rng(4);
    for _ in 0..100 {
        let c = sampling::level_chain(&m, &mut rng, 3, 1e-2).unwrap();
        let r: Vec<_> = c.iter().map(|x| canonicalize(&m, x).unwrap()).collect();
        let l = reduced_mult(&m, &reduced_mult(&m, &r[0], &r[1]).unwrap(), &r[2]).unwrap();
        let rr = reduced_mult(&m, &r[0], &reduced_mult(&m, &r[1], &r[2]).unwrap()).unwrap();
        assert!(reduced_distance(&m, &l, &rr) <= 1e-8);
        let inv = reduced_inverse(&m, &r[0]).unwrap();
        let unit = reduced_unit(&m, &reduced_source(&m, &r[0])).unwrap();
        assert!(reduced_distance(&m, &reduced_mult(&m, &r[0], &inv).unwrap(), &unit) <= 1e-8);
        // representatives shifted by H give the same class
        let a = h_act(&m, &m.h_sample(&mut rng), &c[0]).unwrap();
        let b = h_act(&m, &m.h_sample(&mut rng), &c[1]).unwrap();
        let p = reduced_mult_reps(&m, &c[0], &c[1]).unwrap();
        assert!(reduced_distance(&m, &p, &reduced_mult_reps(&m, &a, &b).unwrap()) <= 1e-8);
        // the target class ignores the shift
        assert!(reduced_target(&m, &canonicalize(&m, &b).unwrap()).iter().zip(&reduced_target(&m, &r[1])).all(|(p, q)| (p - q).abs() <= 1e-9));
    }
}

#[test]
fn non_composable_classes_are_rejected() {
    let m = su11();
    let a = reduced_unit(&m, &[0.1, 0.0]).unwrap();
    let b = reduced_unit(&m, &[0.5, 0.0]).unwrap();
    assert!(matches!(reduced_mult(&m, &a, &b), Err(Error::NotComposable { .. })));
}

#[test]
fn coisotropy_with_negative_control() {
    let m = su11();
    let mut rng = sampling::rng(5);
    for _ in 0..10 {
        let g = m.g_sample(&mut rng);
        assert!(coisotropy_defect(&m, &unit_g(&m, &g), FD_STEP).unwrap() <= 1e-5);
    }
    for _ in 0..30 {
        let x = sampling::level_point(&m, &mut rng, 1e-2).unwrap();
        assert!(coisotropy_defect(&m, &x, FD_STEP).unwrap() <= 1e-4);
    }
    let off = make_from_right(&m, &DualGroupPoint::new(2.0, C64::new(0.5, 0.0)).unwrap(), &m.g_sample(&mut rng)).unwrap();
    assert!(coisotropy_defect(&m, &off, FD_STEP).unwrap() > 1e-2);
}

#[test]
fn coinduced_disc_bivector() {
    let m = su11();
    assert!(disc_bivector(&m, &[0.0, 0.0], FD_STEP).unwrap().max_abs() <= 1e-10);
    let mut rng = sampling::rng(6);
    for _ in 0..10 {
        let z = m.quotient_sample(&mut rng);
        let g = m.section(&z).unwrap();
        let base = disc_bivector(&m, &z, FD_STEP).unwrap();
        assert!(base.max_abs() > 0.0 || z == vec![0.0, 0.0]);
        for _ in 0..5 {
            let p = coinduced_bivector_at(&m, &m.g_mul(&m.h_sample(&mut rng), &g), FD_STEP).unwrap();
            assert!((&p.mat - &base.mat).amax() <= 1e-8);
        }
    }
    for _ in 0..20 {
        let x = sampling::level_point(&m, &mut rng, 1e-2).unwrap();
        assert!(reduced_poisson_defect(&m, &x, FD_STEP).unwrap() <= 1e-4);
    }
}

#[test]
fn cotangent_chart_examples() {
    let m = su11();
    let c = cotangent_chart(&m, &reduced_unit(&m, &[0.2, 0.6]).unwrap(), FD_STEP).unwrap();
    assert!(c.covector.iter().all(|v| v.abs() < 1e-14));
    let xi = [0.0, 0.7, -0.3];
    let s = m.gstar_exp(&xi).unwrap();
    let x = make(&m, &m.g_identity(), &s).unwrap();
    let c = cotangent_chart(&m, &canonicalize(&m, &x).unwrap(), FD_STEP).unwrap();
    assert_eq!(c.z, vec![0.0, 0.0]);
    assert!(c.covector.iter().zip(&xi).all(|(a, b)| (a - b).abs() < 1e-14));
    let mut rng = sampling::rng(7);
    for _ in 0..50 {
        let a = canonicalize(&m, &sampling::level_point(&m, &mut rng, 1e-2).unwrap()).unwrap();
        let c1 = cotangent_chart(&m, &a, FD_STEP).unwrap();
        let c2 = cotangent_chart_with_section(&m, &a, FD_STEP, |z| {
            Ok(m.g_mul(&GroupPoint::rotation(1.3 * z[0] - 0.4 * z[1] * z[1]), &m.section(z)?))
        })
        .unwrap();
        let scale = 1.0 + c1.coords.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(c1.coords.iter().zip(&c2.coords).all(|(p, q)| (p - q).abs() <= 1e-8 * scale));
        let h = m.h_sample(&mut rng);
        assert!(intertwining_defect(&m, &h, &[0.0, 0.4, 1.1]).unwrap() <= 1e-9);
    }
}

#[test]
fn json_transcript() {
    let m = su11();
    let a = canonicalize(&m, &level(&m, m.section(&[0.1, 0.2]).unwrap(), C64::new(0.5, -1.0))).unwrap();
    let v = reduced_to_json(&m, &a);
    assert_eq!(v["z"].as_array().unwrap().len(), 2);
    assert_eq!(v["gamma2"]["N"].as_array().unwrap().len(), 2);
    assert!(v["gamma1"]["A"].is_number());
    assert!(v["residuals"]["level"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn subgroup_data_validation() {
    let m = su11();
    let b = m.bialgebra();
    let sub = m.subgroup();
    assert!(sub.is_poisson_subgroup && sub.perp_simply_connected && sub.relatively_complete());
    assert!(CoisotropicSubgroupData::new(b, SubspaceData::coordinate(3, &[0, 1]).unwrap(), true).is_err());
    let boost = CoisotropicSubgroupData::new(b, SubspaceData::coordinate(3, &[1]).unwrap(), true).unwrap();
    assert!(!boost.is_poisson_subgroup);
    assert!(!boost.relatively_complete());
}

#[test]
fn trivial_reduction_is_marsden_weinstein() {
    let m = build_trivial(4, 2).unwrap();
    let mut rng = sampling::rng(8);
    for _ in 0..30 {
        let z = m.quotient_sample(&mut rng);
        assert_eq!(disc_bivector(&m, &z, FD_STEP).unwrap().max_abs(), 0.0);
        let c = sampling::level_chain(&m, &mut rng, 2, 1e-2).unwrap();
        let (a, b) = (canonicalize(&m, &c[0]).unwrap(), canonicalize(&m, &c[1]).unwrap());
        let p = reduced_mult(&m, &a, &b).unwrap();
        // base R^{n-k}: the class of (g1, gamma1) is (g1[k..], gamma1 restricted to h^perp)
        assert_eq!(p.disc_point, c[0].g1[2..].to_vec());
        assert_eq!(reduced_target(&m, &p), c[1].g2[2..].to_vec());
        assert_eq!(coisotropy_defect(&m, &c[0], FD_STEP).unwrap(), 0.0);
        let ch = cotangent_chart(&m, &a, FD_STEP).unwrap();
        assert_eq!(ch.coords, c[0].gamma1[2..].to_vec());
    }
}
