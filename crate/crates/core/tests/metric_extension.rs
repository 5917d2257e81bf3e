use eppa::freegroup::{QuotientGroup, SeparationBudget};
use eppa::metric::{
    amalgamate, check_independence, extend_isometries, validate_space, verify_extension, FiniteMetricSpace,
    PartialIsometry,
};
use eppa::{ExactField, Rational, Scalar};

fn space<T: ExactField>(labels: &[&str], d: &[&[&str]]) -> FiniteMetricSpace<T> {
    validate_space(
        labels.iter().map(|s| s.to_string()).collect(),
        d.iter()
            .map(|row| row.iter().map(|s| T::parse_scalar(s).unwrap()).collect())
            .collect(),
    )
    .unwrap()
}

fn int(n: i64) -> Rational {
    <Rational as ExactField>::from_integer(n)
}

fn e1() -> (FiniteMetricSpace<Rational>, Vec<PartialIsometry>) {
    let s = space(&["x", "y"], &[&["0", "1"], &["1", "0"]]);
    let phi = PartialIsometry::new(&s, [(0, 1)]).unwrap();
    (s, vec![phi])
}

#[test]
fn e1_gives_an_equilateral_triangle() {
    let (s, isos) = e1();
    let r = extend_isometries(&s, &isos, SeparationBudget::default()).unwrap();
    assert_eq!(r.quotient.degrees(), &[3]);
    assert_eq!(r.group.order(), 3);
    // element k is a1^k
    assert_eq!(r.group.left_slot(0, 0), 1);
    assert_eq!(r.classes, vec![(0, 0), (0, 1), (0, 2)]);
    assert_eq!(r.class_of(1, 2), r.class_of(0, 0));
    assert_eq!(r.class_of(1, 0), r.class_of(0, 1));
    assert_eq!(r.class_of(1, 1), r.class_of(0, 2));
    let one = int(1);
    for c in 0..3 {
        for d in 0..3 {
            let v = r.distance(c, d);
            assert_eq!(v, if c == d { int(0) } else { one.clone() });
        }
    }
    assert_eq!(r.generator_perms, vec![vec![1, 2, 0]]);
    assert_eq!(r.embedding, vec![0, 1]);
    assert!(r.certificate.joint);
    assert_eq!(r.certificate.chain_bound, 2);
}

#[test]
fn e1_chain_oracle_agrees() {
    let (s, isos) = e1();
    let r = extend_isometries(&s, &isos, SeparationBudget::default()).unwrap();
    let rep = verify_extension(&s, &isos, &r, 8);
    assert!(rep.is_ok(), "{rep:?}");
    assert_eq!(rep.triples_checked, 2 * 2 * 3);
    let a = r.group.left_slot(0, QuotientGroup::IDENTITY);
    let a_inv = r.group.inv(a);
    let x_e = r.class_of(0, 0);
    assert_eq!(r.distance(x_e, r.class_of(1, 0)), int(1));
    assert_eq!(r.distance(x_e, r.class_of(1, a_inv)), int(0));
    assert_eq!(r.distance(x_e, r.class_of(1, a)), int(1));
    assert_eq!(r.distance(x_e, r.class_of(0, 0)), int(0));
}

#[test]
fn no_isometries_leaves_the_space_alone() {
    let s: FiniteMetricSpace<Rational> = space(
        &["a", "b", "c"],
        &[&["0", "1", "2"], &["1", "0", "3/2"], &["2", "3/2", "0"]],
    );
    let r = extend_isometries(&s, &[], SeparationBudget::default()).unwrap();
    assert_eq!(r.n_classes(), 3);
    assert_eq!(r.embedding, vec![0, 1, 2]);
    assert_eq!(r.distance_matrix(), s.matrix());
}

#[test]
fn identity_on_a_point() {
    let s: FiniteMetricSpace<Rational> = space(&["p"], &[&["0"]]);
    let phi = PartialIsometry::identity_on(&s, &[0]).unwrap();
    let r = extend_isometries(&s, &[phi.clone()], SeparationBudget::default()).unwrap();
    // a1 fixes p, and the loop (p,p) is separated by Z/2
    assert_eq!(r.n_classes(), 1);
    assert_eq!(r.generator_perms, vec![vec![0]]);
    assert!(verify_extension(&s, &[phi], &r, 6).is_ok());
}

#[test]
fn quadratic_square() {
    let s: FiniteMetricSpace<Scalar> = space(
        &["a", "b", "c", "d"],
        &[
            &["0", "1", "sqrt(2)", "1"],
            &["1", "0", "1", "sqrt(2)"],
            &["sqrt(2)", "1", "0", "1"],
            &["1", "sqrt(2)", "1", "0"],
        ],
    );
    // rotation on three corners, partial
    let phi = PartialIsometry::new(&s, [(0, 1), (1, 2)]).unwrap();
    let r = extend_isometries(&s, &[phi.clone()], SeparationBudget::default()).unwrap();
    let rep = verify_extension(&s, &[phi], &r, 6);
    assert!(rep.is_ok(), "{rep:?}");
}

#[test]
fn amalgam_is_independent() {
    let b: FiniteMetricSpace<Rational> = space(&["a", "b"], &[&["0", "1"], &["1", "0"]]);
    let c: FiniteMetricSpace<Rational> = space(&["a", "c"], &[&["0", "3"], &["3", "0"]]);
    let am = amalgamate(&b, &c, &["a".into()]).unwrap();
    assert_eq!(am.space.dist(1, 2), &int(4));
    assert!(check_independence(&am.space, &am.b_points, &am.c_points, &am.a_points).unwrap().independent);
}
