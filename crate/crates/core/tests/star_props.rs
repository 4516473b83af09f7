use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlab::exact::{cq, rat};
use qlab::star::{adjoint, grade_of, random_homogeneous, random_symbol, star, star_equiv_check, FormalSymbol, Grade};

fn binom(n: u32, k: i64) -> i64 {
    if k < 0 || k > n as i64 {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n as i64 - i) / (i + 1))
}

fn fact(j: u32) -> i64 {
    (1..=j as i64).product()
}

/// Closed form of z^a1 z̄^b1 ⋆ z^a2 z̄^b2 in one variable, as (ℏ power, z power, z̄ power, coefficient).
fn monomial_product(a1: u32, b1: u32, a2: u32, b2: u32) -> Vec<(i32, u32, u32, i64)> {
    let mut out = Vec::new();
    for j in 0..=(a1 + a2).min(b1 + b2) {
        let cu = binom(a2, j as i64 - a1 as i64);
        let cv = binom(b1, j as i64 - b2 as i64);
        if cu == 0 || cv == 0 {
            continue;
        }
        let sign = if (a1 + b2).is_multiple_of(2) { 1 } else { -1 };
        out.push((j as i32, a1 + a2 - j, b1 + b2 - j, sign * cu * cv * fact(j)));
    }
    out
}

fn mono(h: i32, a: u32, b: u32, c: Rational64) -> FormalSymbol {
    let c = cq(rat(*c.numer(), *c.denom()), rat(0, 1));
    FormalSymbol::scalar_term(1, 1, h, vec![a], vec![b], c)
}

#[test]
fn witnesses_match_closed_form() {
    let one = FormalSymbol::one(1, 1);
    let z = FormalSymbol::z(1, 1, 0);
    let zb = FormalSymbol::zbar(1, 1, 0);
    let h = FormalSymbol::hbar(1, 1);
    let zzb = mono(0, 1, 1, Rational64::from_integer(1));
    assert_eq!(star(&z, &zb).unwrap(), h);
    assert_eq!(star(&zb, &z).unwrap(), zzb.add(&h).unwrap());
    assert_eq!(star(&one, &zzb).unwrap(), h.neg());
    let hz = mono(1, 1, 0, Rational64::from_integer(1));
    assert_eq!(star(&star(&z, &zb).unwrap(), &z).unwrap(), hz);
    assert_eq!(star(&z, &star(&zb, &z).unwrap()).unwrap(), hz);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monomials_agree_with_closed_form(a1 in 0u32..4, b1 in 0u32..4, a2 in 0u32..4, b2 in 0u32..4, p in -5i64..5, q in 1i64..4) {
        let c = Rational64::new(p, q);
        let f = mono(0, a1, b1, c);
        let g = mono(1, a2, b2, Rational64::from_integer(1));
        let mut want = FormalSymbol::zero(1, 1);
        for (j, a, b, k) in monomial_product(a1, b1, a2, b2) {
            want = want.add(&mono(j + 1, a, b, c * k)).unwrap();
        }
        prop_assert_eq!(star(&f, &g).unwrap(), want);
    }

    #[test]
    fn algebra_laws(seed in any::<u64>(), n in 1usize..=2, r in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_symbol(&mut rng, n, r, 3, 3);
        let g = random_symbol(&mut rng, n, r, 3, 3);
        let h = random_symbol(&mut rng, n, r, 3, 3);
        let fg = star(&f, &g).unwrap();
        prop_assert_eq!(star(&fg, &h).unwrap(), star(&f, &star(&g, &h).unwrap()).unwrap());
        prop_assert_eq!(adjoint(&fg), star(&adjoint(&g), &adjoint(&f)).unwrap());
        prop_assert_eq!(adjoint(&adjoint(&f)), f.clone());
        prop_assert!(star_equiv_check(&f, &g).unwrap().agree);
    }

    #[test]
    fn grades_add(seed in any::<u64>(), a in 0u32..=3, b in 0u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_homogeneous(&mut rng, 1, 2, a, 3);
        let g = random_homogeneous(&mut rng, 1, 2, b, 3);
        match grade_of(&star(f.symbol(), g.symbol()).unwrap()) {
            Grade::Zero => {}
            Grade::Homogeneous(m) => prop_assert_eq!(m, a + b),
            Grade::Mixed => prop_assert!(false, "mixed grade"),
        }
    }
}
