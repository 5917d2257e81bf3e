use std::cmp::Ordering;

use eppa::{BigRational, ExactField, Quadratic};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn ratio() -> impl Strategy<Value = BigRational> {
    (-2000i64..2000, 1i64..120).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn disc() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 6, 7, 10, 11, 13])
}

fn triple() -> impl Strategy<Value = (Quadratic, Quadratic, Quadratic)> {
    (disc(), ratio(), ratio(), ratio(), ratio(), ratio(), ratio()).prop_map(|(d, a, b, c, e, f, g)| {
        (
            Quadratic::new(a, b, d),
            Quadratic::new(c, e, d),
            Quadratic::new(f, g, d),
        )
    })
}

/// Sign of `p + q·√d` from a 128-bit dyadic enclosure of `√d`; `None` when
/// the enclosure straddles zero.
fn interval_sign(p: &BigRational, q: &BigRational, d: u64) -> Option<Ordering> {
    if q.is_zero() {
        return Some(p.cmp(&BigRational::zero()));
    }
    let bits = 128u32;
    let scale = BigInt::from(1u8) << bits;
    let s = (BigInt::from(d) * &scale * &scale).sqrt();
    let lo = BigRational::new(s.clone(), scale.clone());
    let hi = BigRational::new(s + 1, scale);
    let (a, b) = (p + q * &lo, p + q * &hi);
    let (min, max) = if a <= b { (a, b) } else { (b, a) };
    if min.is_positive() {
        Some(Ordering::Greater)
    } else if max.is_negative() {
        Some(Ordering::Less)
    } else {
        None
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compare_matches_interval_oracle((a, b, _) in triple()) {
        let d = a.discriminant().or(b.discriminant()).unwrap_or(2);
        let p = a.rational_part() - b.rational_part();
        let q = a.radical_part() - b.radical_part();
        if let Some(expected) = interval_sign(&p, &q, d) {
            prop_assert_eq!(a.cmp(&b), expected);
        }
    }

    #[test]
    fn order_is_total_and_transitive((a, b, c) in triple()) {
        let ab = a.cmp(&b);
        prop_assert_eq!(ab.reverse(), b.cmp(&a));
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
        if a < b && b < c {
            prop_assert!(a < c);
        }
    }

    #[test]
    fn field_axioms((a, b, c) in triple()) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
        prop_assert_eq!(a.clone() - a.clone(), Quadratic::zero());
        if !b.is_zero() {
            prop_assert_eq!((a.clone() / b.clone()) * b.clone(), a.clone());
        }
    }

    #[test]
    fn text_round_trip((a, _, _) in triple()) {
        let s = a.to_string();
        prop_assert_eq!(Quadratic::parse_scalar(&s).unwrap(), a);
    }

    #[test]
    fn sqrt_of_squares((a, _, _) in triple()) {
        let sq = a.clone() * a.clone();
        let r = sq.sqrt_exact().unwrap();
        prop_assert_eq!(r.clone() * r.clone(), sq);
        prop_assert!(r >= Quadratic::zero());
    }
}

#[test]
fn one_is_below_root_two() {
    let one = Quadratic::from_integer(1);
    assert_eq!(one.cmp(&Quadratic::sqrt(2)), Ordering::Less);
    assert_eq!(
        interval_sign(&BigRational::from_integer(1.into()), &BigRational::from_integer((-1).into()), 2),
        Some(Ordering::Less)
    );
}

#[test]
fn mixed_contexts_are_errors() {
    let a = Quadratic::sqrt(2);
    let b = Quadratic::sqrt(3);
    assert!(a.checked_cmp(&b).is_err());
    assert!(a.checked_add(&b).is_err());
}
