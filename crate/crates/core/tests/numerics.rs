use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use qlab::exact::{cq, rat, Poly};
use qlab::geometry::{sphere_for, torus_for, Point, Section};
use qlab::laplace::{default_radius, default_resolution, gaussian_expand, gaussian_integral_numeric};
use qlab::projector::{projector_on, Projector};
use qlab::toeplitz::toeplitz_fn;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn torus8() -> &'static Arc<Projector> {
    static P: OnceLock<Arc<Projector>> = OnceLock::new();
    P.get_or_init(|| {
        let m = Arc::new(torus_for(8).unwrap());
        Arc::new(projector_on(m, &Section::TorusCubic { c: 0.35 }, 8).unwrap().1)
    })
}

#[test]
fn ranks_match_dimensions() {
    let pi = torus8();
    assert_eq!(pi.rank(), 8);
    assert!(pi.idempotency_defect().unwrap() < 1e-9);
    let s = Arc::new(sphere_for(8).unwrap());
    let (_, ps) = projector_on(s, &Section::Sphere, 8).unwrap();
    assert_eq!(ps.rank(), 9);
    assert!(ps.hermitian_defect() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // ∫ w^a w̄^b e^{-τ|w|²} 2 dx dy = δ_ab 2π a! / τ^{a+1}
    #[test]
    fn gaussian_moments(a in 0u32..4, b in 0u32..4, tau in 2.0f64..40.0) {
        let mut g = Poly::zero(2);
        g.add_term(vec![a, b], cq(rat(1, 1), rat(0, 1)));
        let want = if a == b { 2.0 * PI * factorial(a) / tau.powi(a as i32 + 1) } else { 0.0 };
        let series = gaussian_expand(&g, (a + b) as usize).evaluate(tau, (a + b) as usize);
        prop_assert!((series.re - want).abs() < 1e-12 * want.abs().max(1e-3) && series.im.abs() < 1e-14);
        let r = default_radius(tau);
        let q = gaussian_integral_numeric(&g, tau, r, default_resolution(tau, r), 1e-10).unwrap();
        prop_assert!((q.value.re - want).abs() < 1e-8);
    }

    #[test]
    fn toeplitz_positivity_and_bounds(c in prop::collection::vec(-1.0f64..1.0, 4)) {
        let pi = torus8();
        let f = move |p: Point| {
            c[0] + c[1] * (2.0 * PI * p[0]).cos() + c[2] * (2.0 * PI * p[1]).sin() + c[3] * (2.0 * PI * (p[0] + p[1])).cos()
        };
        let sup = 4.0;
        let t = toeplitz_fn(pi, &f).unwrap();
        prop_assert!(t.hermitian_defect() < 1e-12);
        prop_assert!(t.norm().unwrap() <= sup);
        let sq = move |p: Point| f(p) * f(p);
        let ev = toeplitz_fn(pi, &sq).unwrap().eigenvalues().unwrap();
        prop_assert!(ev.iter().all(|&l| l > -1e-10));
    }
}
