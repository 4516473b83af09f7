use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exact::{cq, rat, Cq, Poly};
use crate::harness::config::RunConfig;
use crate::harness::report::{num, Assertion, ReportTable, SuiteReport};
use crate::laplace::{default_radius, default_resolution, gaussian_expand, gaussian_integral_numeric, loglog_slope};
use crate::star::{
    adjoint, format_inline, grade_of, is_toeplitz_symbol, random_homogeneous, random_symbol, scalar, star,
    star_equiv_check, FormalSymbol, Grade,
};

fn yes(b: bool) -> String {
    if b { "true" } else { "false" }.into()
}

/// A symbol that depends on ℏ only.
fn random_constant<R: Rng>(rng: &mut R, n: usize, r: usize) -> FormalSymbol {
    let mut s = FormalSymbol::zero(n, r);
    for _ in 0..rng.gen_range(1..=2) {
        let l = rng.gen_range(-1..=2);
        let c = cq(rat(rng.gen_range(-3..=3), rng.gen_range(1..=3)), rat(rng.gen_range(-2..=2), 2));
        let t = FormalSymbol::scalar_term(n, r, l, vec![0; n], vec![0; n], c);
        s = s.add(&t).expect("shapes agree");
    }
    s
}

pub fn star_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let algebra = ["associativity", "grading", "adjoint", "two-routes", "unit-law"].iter().any(|c| cfg.selected(c));
    if algebra {
        let mut t = ReportTable::new(
            "star",
            &["sample", "n", "r", "terms", "associativity", "grading", "adjoint", "two_routes", "unit_law"],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut fails = [0usize; 5];
        for i in 0..cfg.params.samples {
            let n = rng.gen_range(1..=2);
            let r = rng.gen_range(1..=2);
            let f = random_symbol(&mut rng, n, r, 3, 3);
            let g = random_symbol(&mut rng, n, r, 3, 3);
            let h = random_symbol(&mut rng, n, r, 3, 3);
            let assoc = star(&star(&f, &g)?, &h)? == star(&f, &star(&g, &h)?)?;
            let (a, b) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
            let fa = random_homogeneous(&mut rng, n, r, a, 3);
            let gb = random_homogeneous(&mut rng, n, r, b, 3);
            let graded = match grade_of(&star(fa.symbol(), gb.symbol())?) {
                Grade::Zero => true,
                Grade::Homogeneous(m) => m == a + b,
                Grade::Mixed => false,
            };
            let adj = adjoint(&star(&f, &g)?) == star(&adjoint(&g), &adjoint(&f))?;
            let routes = star_equiv_check(&f, &g)?.agree;
            let u = if i % 2 == 0 { random_constant(&mut rng, n, r) } else { f.clone() };
            let unit = is_toeplitz_symbol(&u) == u.is_constant_in_z();
            for (slot, ok) in [assoc, graded, adj, routes, unit].iter().enumerate() {
                if !ok {
                    fails[slot] += 1;
                }
            }
            t.push(vec![
                i.to_string(),
                n.to_string(),
                r.to_string(),
                (f.len() + g.len() + h.len()).to_string(),
                yes(assoc),
                yes(graded),
                yes(adj),
                yes(routes),
                yes(unit),
            ]);
        }
        let total = cfg.params.samples;
        let anchors = [
            ("associativity", "(f ⋆ g) ⋆ h = f ⋆ (g ⋆ h) exactly"),
            ("grading", "W_a ⋆ W_b ⊂ W_{a+b}"),
            ("adjoint", "(f ⋆ g)* = g* ⋆ f*"),
            ("two-routes", "direct contraction formula equals the exp(ℏ□) tensor route"),
            ("unit-law", "f ⋆ 1 = f = 1 ⋆ f iff f does not depend on z, z̄"),
        ];
        for (slot, (id, anchor)) in anchors.iter().enumerate() {
            if cfg.selected(id) {
                checks.push(
                    Assertion::new(
                        id,
                        anchor,
                        Some(fails[slot] as f64),
                        format!("0 failures of {total}"),
                        fails[slot] == 0,
                    )
                    .with_note(format!("{total} seeded samples, n <= 2, r <= 2, grade <= 3")),
                );
            }
        }
        checks.push(Assertion::holds("sample-count", "at least 100 random symbols", total >= 100, "samples >= 100"));
        tables.push(t);
    }
    if cfg.selected("witnesses") {
        let mut t = ReportTable::new("star-witness", &["expression", "value", "expected", "equal"]);
        let one = FormalSymbol::one(1, 1);
        let z = FormalSymbol::z(1, 1, 0);
        let zb = FormalSymbol::zbar(1, 1, 0);
        let h = FormalSymbol::hbar(1, 1);
        let zzb = FormalSymbol::scalar_term(1, 1, 0, vec![1], vec![1], scalar(1));
        let hz = FormalSymbol::scalar_term(1, 1, 1, vec![1], vec![0], scalar(1));
        let cases = [
            ("z * zb", star(&z, &zb)?, h.clone()),
            ("zb * z", star(&zb, &z)?, zzb.add(&h)?),
            ("1 * (z zb)", star(&one, &zzb)?, h.neg()),
            ("(z * zb) * z", star(&star(&z, &zb)?, &z)?, hz.clone()),
            ("z * (zb * z)", star(&z, &star(&zb, &z)?)?, hz),
        ];
        let mut bad = 0;
        for (name, got, want) in cases {
            let ok = got == want;
            bad += usize::from(!ok);
            t.push(vec![name.into(), format_inline(&got), format_inline(&want), yes(ok)]);
        }
        checks.push(Assertion::new(
            "witnesses",
            "z⋆z̄ = ℏ, z̄⋆z = z z̄ + ℏ, 1⋆(z z̄) = −ℏ, (z⋆z̄)⋆z = z⋆(z̄⋆z) = ℏz",
            Some(bad as f64),
            "0 mismatches",
            bad == 0,
        ));
        tables.push(t);
    }
    Ok(SuiteReport::new("star", tables, checks))
}

fn random_poly<R: Rng>(rng: &mut R, n: usize, degree: u32) -> Poly<Cq> {
    let mut p = Poly::zero(2 * n);
    for _ in 0..rng.gen_range(2..=6) {
        let mut e = vec![0u32; 2 * n];
        let d = rng.gen_range(0..=degree);
        for _ in 0..d {
            e[rng.gen_range(0..2 * n)] += 1;
        }
        let c = cq(rat(rng.gen_range(-4..=4), rng.gen_range(1..=4)), rat(rng.gen_range(-2..=2), rng.gen_range(1..=3)));
        p.add_term(e, c);
    }
    p
}

/// Adds a term with equal w and w̄ exponents so that the top Gaussian moment is present.
fn with_diagonal_term<R: Rng>(rng: &mut R, mut p: Poly<Cq>, n: usize, half: u32) -> Poly<Cq> {
    let mut e = vec![0u32; 2 * n];
    for _ in 0..half {
        let j = rng.gen_range(0..n);
        e[j] += 1;
        e[n + j] += 1;
    }
    p.add_term(e, cq(rat(rng.gen_range(1..=4), rng.gen_range(1..=3)), rat(0, 1)));
    p
}

pub fn laplace_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let tol = &cfg.tolerances;
    let taus = cfg.ladder();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let samples = cfg.params.samples.min(40);
    if cfg.selected("expansion") {
        let mut t = ReportTable::new(
            "laplace",
            &["sample", "n", "degree", "tau", "symbolic_re", "symbolic_im", "numeric_re", "numeric_im", "difference"],
        );
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let n = 1 + i % 2;
            let p = random_poly(&mut rng, n, 6);
            let exp = gaussian_expand(&p, 3);
            for &tau in &taus {
                let tau = tau as f64;
                let r = default_radius(tau);
                let q = gaussian_integral_numeric(&p, tau, r, default_resolution(tau, r), 0.1 * tol.quadrature)?;
                let s = exp.evaluate(tau, exp.order());
                let d = (s - q.value).norm();
                worst = worst.max(d);
                t.push(vec![
                    i.to_string(),
                    n.to_string(),
                    p.degree().to_string(),
                    num(tau),
                    num(s.re),
                    num(s.im),
                    num(q.value.re),
                    num(q.value.im),
                    num(d),
                ]);
            }
        }
        checks.push(
            Assertion::at_most(
                "expansion",
                "(2π/τ)^n Σ τ^{−ℓ} Δ^ℓ g(0)/ℓ! equals the Gaussian integral of a polynomial",
                worst,
                tol.quadrature,
            )
            .with_note(format!("{samples} random polynomials of degree <= 6, n in {{1, 2}}")),
        );
        tables.push(t);
    }
    if cfg.selected("remainder") {
        let mut t = ReportTable::new(
            "laplace-remainder",
            &["sample", "n", "truncation", "expected_slope", "fitted_slope", "deviation"],
        );
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let n = 1 + i % 2;
            let top = rng.gen_range(1..=3u32);
            let base = random_poly(&mut rng, n, 2 * top);
            let p = with_diagonal_term(&mut rng, base, n, top);
            let exp = gaussian_expand(&p, top as usize);
            for trunc in 0..top as usize {
                if exp.coefficients[trunc + 1] == Cq::new(rat(0, 1), rat(0, 1)) {
                    continue;
                }
                let mut pts = Vec::new();
                for &tau in &cfg.params.slope_taus {
                    let tau = tau as f64;
                    let r = default_radius(tau);
                    let q = gaussian_integral_numeric(&p, tau, r, default_resolution(tau, r), 1e-14)?;
                    pts.push((tau, (q.value - exp.evaluate(tau, trunc)).norm()));
                }
                let slope = loglog_slope(&pts)?.slope;
                let want = -((n + trunc + 1) as f64);
                worst = worst.max((slope - want).abs());
                t.push(vec![i.to_string(), n.to_string(), trunc.to_string(), num(want), num(slope), num(slope - want)]);
            }
        }
        checks.push(Assertion::at_most(
            "remainder",
            "truncating after N terms leaves O(τ^{−n−N−1})",
            worst,
            tol.expansion_slope,
        ));
        tables.push(t);
    }
    Ok(SuiteReport::new("laplace", tables, checks))
}
