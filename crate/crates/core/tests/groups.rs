use poisson_groupoid::algebra::{is_subalgebra, SubspaceData};
use poisson_groupoid::groups::{coords_of, expand, project, realize, sb2_basis, su11_basis, Part};
use poisson_groupoid::models::su11_duality_defect;
use poisson_groupoid::*;
use proptest::prelude::*;

fn close(a: C64, b: C64, tol: f64) {
    assert!((a - b).norm() <= tol, "{a} vs {b}");
}

#[test]
fn su11_bialgebra_defects_vanish() {
    let m = build_su11().unwrap();
    let b = m.bialgebra();
    assert!(b.g.jacobi_defect() <= 1e-12);
    assert!(b.g_star.jacobi_defect() <= 1e-12);
    assert!(b.cocycle_defect() <= 1e-12);
    assert!(b.pairing_invariance_defect() <= 1e-12);
    assert!(b.double_jacobi_defect() <= 1e-12);
    assert!(su11_duality_defect() <= 1e-15);
}

#[test]
fn double_bracket_matches_matrix_commutator() {
    let m = build_su11().unwrap();
    let b = m.bialgebra();
    let mut rng = sampling::rng(3);
    for _ in 0..50 {
        use rand::Rng;
        let u = DoubleVector::from_coords(&(0..6).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let v = DoubleVector::from_coords(&(0..6).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let lhs = b.double_bracket(&u, &v).unwrap();
        let rhs = coords_of(&realize(&u).commutator(&realize(&v)));
        assert!(lhs.sub(&rhs).max_abs() < 1e-13);
    }
}

#[test]
fn dual_pairing_and_bases() {
    let (e, f) = (su11_basis(), sb2_basis());
    assert!((e[0].im_trace_pairing(&f[0]) - 1.0).abs() < 1e-15);
    assert!(e[0].im_trace_pairing(&f[1]).abs() < 1e-15);
    for i in 0..3 {
        for j in 0..3 {
            assert!(e[i].im_trace_pairing(&e[j]).abs() < 1e-15, "g isotropic");
            assert!(f[i].im_trace_pairing(&f[j]).abs() < 1e-15, "g* isotropic");
        }
    }
}

#[test]
fn exponential_examples() {
    let m = build_su11().unwrap();
    assert_eq!(m.g_exp(&[0.0; 3]).unwrap(), m.g_identity());
    let t = 0.7;
    let s = m.gstar_exp(&[0.0, t, 0.0]).unwrap();
    assert!((s.a - 1.0).abs() < 1e-15);
    close(s.n, C64::new(0.0, t), 1e-15);
    let theta = 1.3;
    let g = m.g_exp(&[theta, 0.0, 0.0]).unwrap();
    close(g.alpha, C64::from_polar(1.0, theta), 1e-14);
    close(g.beta, C64::new(0.0, 0.0), 1e-15);
}

#[test]
fn adjoint_examples() {
    let m = build_su11().unwrap();
    let u = DoubleVector::new(vec![0.3, -0.2, 1.1], vec![0.5, 0.0, -0.4]);
    let id = m.embed_g(&m.g_identity());
    assert!(m.ad(&id, &u).unwrap().sub(&u).max_abs() < 1e-15);
    let mut rng = sampling::rng(5);
    for _ in 0..20 {
        let g = m.g_sample(&mut rng);
        let v = m.ad(&m.embed_g(&g), &DoubleVector::from_g(&u.x)).unwrap();
        assert!(v.xi.iter().all(|c| c.abs() < 1e-12), "Ad_G preserves g");
        let d = m.d_mul(&m.embed_g(&g), &m.embed_gstar(&m.gstar_sample(&mut rng)));
        let w = m.ad(&d, &u).unwrap();
        let direct = d.m * realize(&u) * d.m.sl_inverse();
        let (_, residual) = expand(&direct);
        assert!(residual < 1e-12);
        assert!(w.sub(&coords_of(&direct)).max_abs() < 1e-12);
    }
}

#[test]
fn projections() {
    let u = DoubleVector::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]);
    assert_eq!(project(&u, Part::G), DoubleVector::from_g(&[1.0, 2.0, 3.0]));
    assert_eq!(project(&u, Part::GStar), DoubleVector::from_gstar(&[4.0, 5.0, 6.0]));
    // p_g Ad_{gamma^-1} X is generically nonzero off the identity
    let m = build_su11().unwrap();
    let s = DualGroupPoint::new(1.5, C64::new(0.3, -0.8)).unwrap();
    let x = DoubleVector::from_g(&[0.0, 1.0, 0.0]);
    let v = m.ad(&m.d_inv(&m.embed_gstar(&s)), &x).unwrap();
    let direct = coords_of(&(s.matrix().sl_inverse() * realize(&x) * s.matrix()));
    assert!(v.sub(&direct).max_abs() < 1e-13);
    assert!(project(&v, Part::GStar).max_abs() > 1e-3);
}

#[test]
fn factorization_examples() {
    let m = build_su11().unwrap();
    let id = m.embed_g(&m.g_identity());
    for order in [FactorOrder::GGstar, FactorOrder::GstarG] {
        let f = m.factorize(&id, order).unwrap();
        assert_eq!((f.g, f.gamma), (m.g_identity(), m.gstar_identity()));
    }
    let g = GroupPoint::new(C64::new(2f64.sqrt(), 0.0), C64::new(1.0, 0.0)).unwrap();
    let f = m.factorize(&g.embed(), FactorOrder::GGstar).unwrap();
    assert!((f.margin - 1.0).abs() < 1e-14);
    assert!(m.g_distance(&f.g, &g) < 1e-14);
    assert!(m.gstar_distance(&f.gamma, &m.gstar_identity()) < 1e-14);
    let d = DoublePoint::new(Mat2::new(C64::new(2f64.sqrt(), 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))).unwrap();
    match m.factorize(&d, FactorOrder::GstarG) {
        Err(Error::NotFactorizable { margin }) => assert!((margin + 1.0).abs() < 1e-14),
        other => panic!("expected NotFactorizable, got {other:?}"),
    }
}

#[test]
fn h_perp_is_strictly_upper_triangular() {
    let m = build_su11().unwrap();
    let sub = m.subgroup();
    assert!(sub.h.same_span(&SubspaceData::coordinate(3, &[0]).unwrap()));
    assert!(sub.h_perp.same_span(&SubspaceData::coordinate(3, &[1, 2]).unwrap()));
    assert!(is_subalgebra(&m.bialgebra().g_star, &sub.h_perp, 1e-12).unwrap().0);
    let mut rng = sampling::rng(11);
    for _ in 0..20 {
        let s = m.perp_sample(&mut rng);
        assert!((s.a - 1.0).abs() < 1e-15);
    }
}

#[test]
fn trivial_model_is_an_exact_abelian_double() {
    let m = build_trivial(4, 2).unwrap();
    assert_eq!(m.dim(), 4);
    assert_eq!(m.quotient_dim(), 2);
    let b = m.bialgebra();
    assert_eq!(b.double_jacobi_defect(), 0.0);
    assert_eq!(b.cocycle_defect(), 0.0);
    assert!(build_trivial(2, 3).is_err());
}

fn arb_point() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, -3.2..3.2f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws_hold((br, bi, phase, _u) in arb_point(), (cr, ci, psi, _v) in arb_point()) {
        let m = build_su11().unwrap();
        let beta = C64::new(br, bi);
        let g = GroupPoint { alpha: C64::from_polar((1.0 + beta.norm_sqr()).sqrt(), phase), beta };
        let gamma = C64::new(cr, ci);
        let h = GroupPoint { alpha: C64::from_polar((1.0 + gamma.norm_sqr()).sqrt(), psi), beta: gamma };
        let gh = m.g_mul(&g, &h);
        prop_assert!(gh.membership_residual() < 1e-12);
        prop_assert!(m.g_distance(&m.g_mul(&gh, &m.g_inv(&h)), &g) < 1e-12);
        let direct = GroupPoint::from_matrix(&(g.matrix() * h.matrix())).unwrap();
        prop_assert!(m.g_distance(&gh, &direct) < 1e-12);
    }

    #[test]
    fn factorization_roundtrip(coords in proptest::collection::vec(-1.5..1.5f64, 6)) {
        let m = build_su11().unwrap();
        let d = m.d_exp(&DoubleVector::from_coords(&coords));
        for order in [FactorOrder::GGstar, FactorOrder::GstarG] {
            let margin = m.margin(&d, order);
            match m.factorize(&d, order) {
                Ok(f) => {
                    prop_assert!(margin > 0.0);
                    let (g, s) = (m.embed_g(&f.g), m.embed_gstar(&f.gamma));
                    let back = match order { FactorOrder::GGstar => m.d_mul(&g, &s), FactorOrder::GstarG => m.d_mul(&s, &g) };
                    prop_assert!(m.d_distance(&back, &d) <= 1e-10 * (1.0 + d.m.max_abs()));
                }
                Err(Error::NotFactorizable { .. }) => prop_assert!(margin <= 0.0),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }

    #[test]
    fn annihilator_is_an_involution(vs in proptest::collection::vec(proptest::collection::vec(-1.0..1.0f64, 5), 0..5)) {
        let Ok(s) = SubspaceData::new(5, vs) else { return Ok(()) };
        let ann = s.annihilator();
        prop_assert_eq!(s.dim() + ann.dim(), 5);
        for v in s.basis_vectors() {
            for w in ann.basis_vectors() {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < 1e-10);
            }
        }
        prop_assert!(ann.annihilator().same_span(&s));
    }
}
