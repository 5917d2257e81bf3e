use std::time::Instant;

use eppa::freegroup::SeparationBudget;
use eppa::metric::{extend_isometries, validate_space, verify_extension, PartialIsometry};
use eppa::{ExactField, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vals = ["1", "3/2", "2"];
    for inst in 0..60 {
        let n = rng.gen_range(2..=4);
        let mut d = vec![vec![<Rational as ExactField>::from_integer(0); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = Rational::parse_scalar(vals[rng.gen_range(0..3)]).unwrap();
                d[i][j] = v.clone();
                d[j][i] = v;
            }
        }
        let s = validate_space((0..n).map(|i| format!("p{i}")).collect(), d).unwrap();
        let k = rng.gen_range(0..=2);
        let mut isos = Vec::new();
        while isos.len() < k {
            let dom = rng.gen_range(1..=2.min(n));
            let mut pts: Vec<usize> = (0..n).collect();
            let mut src = Vec::new();
            let mut dst = Vec::new();
            for _ in 0..dom {
                src.push(pts.swap_remove(rng.gen_range(0..pts.len())));
            }
            let mut all: Vec<usize> = (0..n).collect();
            for _ in 0..dom {
                dst.push(all.swap_remove(rng.gen_range(0..all.len())));
            }
            if let Ok(p) = PartialIsometry::new(&s, src.into_iter().zip(dst)) {
                isos.push(p);
            }
        }
        let t = Instant::now();
        let r = extend_isometries(&s, &isos, SeparationBudget::default());
        let el = t.elapsed();
        match r {
            Ok(r) => {
                let t2 = Instant::now();
                let rep = verify_extension(&s, &isos, &r, 8);
                println!(
                    "{inst}: n={n} k={k} M={} sigs={} |Q|={} classes={} joint={} factors={} {:?} verify {} {:?}",
                    s.chain_bound(),
                    r.certificate.signatures.len(),
                    r.group.order(),
                    r.n_classes(),
                    r.certificate.joint,
                    r.certificate.factors.len(),
                    el,
                    rep.is_ok(),
                    t2.elapsed()
                );
            }
            Err(e) => println!("{inst}: n={n} k={k} ERR {e} {el:?}"),
        }
    }
}
