use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{poisson_at, Point, Section, C64};
use crate::harness::config::{Model, RunConfig};
use crate::harness::report::{num, opt, Assertion, ReportTable, SuiteReport};
use crate::harness::suites::{decay_order, probes};
use crate::harness::Harness;
use crate::laplace::{asymptotic_fit, loglog_slope};
use crate::linalg;
use crate::projector::Projector;
use crate::toeplitz::{
    contravariant_recover, covariant_symbol, norm_law_check, normalized_toeplitz, support_check, toeplitz, toeplitz_fn,
    torus_bump, ToeplitzOperator,
};

fn cos_x(p: Point) -> f64 {
    (2.0 * PI * p[0]).cos()
}

fn cos_y(p: Point) -> f64 {
    (2.0 * PI * p[1]).cos()
}

fn sin_sin(p: Point) -> f64 {
    2.0 * PI * (2.0 * PI * p[0]).sin() * (2.0 * PI * p[1]).sin()
}

fn projectors(h: &Harness, cfg: &RunConfig, model: Model, section: &Section) -> Result<Vec<Arc<Projector>>> {
    Ok(h.levels(cfg, model, section, &cfg.ladder())?.iter().map(|l| l.projector.clone()).collect())
}

fn torus_only(cfg: &RunConfig, suite: &str) -> Result<()> {
    match cfg.models().as_slice() {
        [Model::Torus] => Ok(()),
        other => Err(Error::Config(format!("suite {suite} runs on the torus only, got {other:?}"))),
    }
}

type Statistic = fn(&CommutatorSample) -> f64;

pub fn norm_law_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    let tol = &cfg.tolerances;
    let mut t = ReportTable::new(
        "norm-law",
        &["model", "section", "k", "norm", "closed_form", "relative_error", "scaled_defect"],
    );
    let mut checks = Vec::new();
    for model in cfg.models() {
        for section in h.sections(cfg, model) {
            let tag = format!("{}:{}", model.name(), section.name());
            let ladder = projectors(h, cfg, model, &section)?;
            match model {
                Model::Sphere => {
                    let rep = norm_law_check(&ladder, &|p: Point| p[0].cos(), 1.0)?;
                    let mut worst: f64 = 0.0;
                    for r in &rep.rows {
                        let k = r.k as f64;
                        let exact = k / (k + 2.0);
                        let rel = (r.norm - exact).abs() / exact;
                        if r.k >= 16 {
                            worst = worst.max(rel);
                        }
                        t.push(vec![
                            model.name().into(),
                            section.name(),
                            r.k.to_string(),
                            num(r.norm),
                            num(exact),
                            num(rel),
                            num(r.scaled_defect),
                        ]);
                    }
                    checks.push(
                        Assertion::at_most(
                            &format!("norm-closed-form:{tag}"),
                            "‖T_k(cos θ)‖ = k/(k + 2) on the sphere",
                            worst,
                            tol.norm_relative,
                        )
                        .with_note("relative error, k >= 16"),
                    );
                }
                Model::Torus => {
                    let rep = norm_law_check(&ladder, &cos_x, 1.0)?;
                    for r in &rep.rows {
                        t.push(vec![
                            model.name().into(),
                            section.name(),
                            r.k.to_string(),
                            num(r.norm),
                            String::new(),
                            String::new(),
                            num(r.scaled_defect),
                        ]);
                    }
                    let s: Vec<(f64, f64)> = rep.rows.iter().map(|r| (r.k as f64, r.scaled_defect)).collect();
                    let slope = loglog_slope(&s)?.slope;
                    let positive = rep.rows.iter().all(|r| r.scaled_defect > 0.0);
                    checks.push(Assertion::new(
                        &format!("norm-defect-bounded:{tag}"),
                        "‖T_k(f)‖ = sup|f| + O(1/k)",
                        Some(slope),
                        format!("(1 - |T|)k positive with log-log slope in [-{0}, {0}]", tol.norm_growth),
                        positive && slope.abs() <= tol.norm_growth,
                    ));
                }
                Model::Patch => return Err(Error::Config("norm-law needs a compact model".into())),
            }
        }
    }
    Ok(SuiteReport::new("norm-law", vec![t], checks))
}

struct CommutatorSample {
    k: u32,
    norm_f: f64,
    commutator: f64,
    target: f64,
    defect: f64,
    diagonal: f64,
    poisson_defect: f64,
}

fn commutator_sample(pi: &Arc<Projector>, sign: f64, pts: &[Point]) -> Result<CommutatorSample> {
    let tf = toeplitz_fn(pi, &cos_x)?;
    let tg = toeplitz_fn(pi, &cos_y)?;
    let target = toeplitz_fn(pi, &|p| sign * sin_sin(p))?;
    let m = pi.manifold.clone();
    let step = m.fd_step();
    let poisson = toeplitz_fn(pi, &|p| poisson_at(&m, &cos_x, &cos_y, p, step))?;
    let c = tf.ik_commutator(&tg)?;
    let mut diagonal: f64 = 0.0;
    for &x in pts {
        diagonal = diagonal.max(((c.diagonal_at(x) - target.diagonal_at(x)) / pi.diagonal_at(x)).norm());
    }
    Ok(CommutatorSample {
        k: pi.k,
        norm_f: tf.norm()?,
        commutator: c.norm()?,
        target: target.norm()?,
        defect: c.sub(&target)?.norm()?,
        diagonal,
        poisson_defect: c.sub(&poisson)?.norm()?,
    })
}

fn commutator_samples(h: &Harness, cfg: &RunConfig, section: &Section) -> Result<Vec<CommutatorSample>> {
    let pts = probes(Model::Torus, cfg.params.probes, cfg.seed);
    let ladder = projectors(h, cfg, Model::Torus, section)?;
    h.par_map(cfg, &ladder, |pi| commutator_sample(pi, cfg.params.bracket_sign, &pts))
}

fn target_name(sign: f64) -> String {
    format!("{sign}*2pi sin(2pi x) sin(2pi y)")
}

pub fn commutator_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    torus_only(cfg, "commutator")?;
    let tol = &cfg.tolerances;
    let mut t = ReportTable::new(
        "commutator",
        &[
            "section",
            "k",
            "commutator_norm",
            "target_norm",
            "defect",
            "diagonal_defect",
            "poisson_defect",
            "fit_order",
            "poisson_fit_order",
        ],
    );
    let mut checks = Vec::new();
    for section in h.sections(cfg, Model::Torus) {
        let tag = section.name();
        let rows = commutator_samples(h, cfg, &section)?;
        let order = decay_order(&rows.iter().map(|r| (r.k as f64, r.defect)).collect::<Vec<_>>(), tol.floor)?;
        let porder = decay_order(&rows.iter().map(|r| (r.k as f64, r.poisson_defect)).collect::<Vec<_>>(), tol.floor)?;
        for r in &rows {
            t.push(vec![
                tag.clone(),
                r.k.to_string(),
                num(r.commutator),
                num(r.target),
                num(r.defect),
                num(r.diagonal),
                num(r.poisson_defect),
                opt(order.slope),
                opt(porder.slope),
            ]);
        }
        let sign = cfg.params.bracket_sign;
        checks.push(
            Assertion::new(
                &format!("commutator-order:{tag}"),
                "ik[T_f, T_g] = T_b + O(k^{-1/2}), f = cos 2πx, g = cos 2πy, b the stated bracket",
                order.slope,
                format!("order <= -{}", tol.commutator_order),
                order.at_most(-tol.commutator_order),
            )
            .with_note(format!("target b = {}", target_name(sign))),
        );
        checks.push(
            Assertion::new(
                &format!("commutator-poisson-order:{tag}"),
                "ik[T_f, T_g] = T_{f,g} + O(k^{-1/2}) with {f, g} = ω(X_f, X_g), ι_X ω = df",
                porder.slope,
                format!("order <= -{}", tol.commutator_order),
                porder.at_most(-tol.commutator_order),
            )
            .with_note("bracket computed by finite differences from ω"),
        );
    }
    Ok(SuiteReport::new("commutator", vec![t], checks))
}

pub fn support_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    torus_only(cfg, "support")?;
    let tol = &cfg.tolerances;
    let r = cfg.params.bump_radius;
    let f = torus_bump([0.25, 0.5], r);
    let g = torus_bump([0.75, 0.5], r);
    let mut t = ReportTable::new("support", &["section", "k", "product_norm", "outside_mass"]);
    let mut checks = Vec::new();
    for section in h.sections(cfg, Model::Torus) {
        let tag = section.name();
        let ladder = projectors(h, cfg, Model::Torus, &section)?;
        if cfg.selected("disjoint") || cfg.selected("mass") {
            let rep = support_check(&ladder, &f, &g, cfg.params.support_delta)?;
            for row in &rep.rows {
                t.push(vec![tag.clone(), row.k.to_string(), num(row.product_norm), num(row.outside_mass)]);
            }
            let po = decay_order(&rep.rows.iter().map(|x| (x.k as f64, x.product_norm)).collect::<Vec<_>>(), 0.0)?;
            let mo = decay_order(&rep.rows.iter().map(|x| (x.k as f64, x.outside_mass)).collect::<Vec<_>>(), 0.0)?;
            if cfg.selected("disjoint") {
                checks.push(
                    Assertion::new(
                        &format!("disjoint-product:{tag}"),
                        "T_f T_g = O(k^{-∞}) for disjointly supported f, g",
                        po.slope,
                        format!("slope < -{}", tol.support_order),
                        po.slope.is_some_and(|s| s < -tol.support_order),
                    )
                    .with_note(format!("bumps of radius {r} at (0.25, 0.5) and (0.75, 0.5)")),
                );
            }
            if cfg.selected("mass") {
                checks.push(
                    Assertion::new(
                        &format!("off-support-mass:{tag}"),
                        "the kernel of T_f is O(k^{-∞}) away from the diagonal over supp f",
                        mo.slope,
                        format!("slope < -{}", tol.support_order),
                        mo.slope.is_some_and(|s| s < -tol.support_order),
                    )
                    .with_note(format!("delta = {} in metric units", cfg.params.support_delta)),
                );
            }
        }
        if cfg.selected("vacuous") {
            let one = |_: Point| 1.0;
            let rep = support_check(&ladder[..1], &one, &one, cfg.params.support_delta)?;
            checks.push(Assertion::holds(
                &format!("vacuous:{tag}"),
                "f = 1 has no off-support region",
                rep.vacuous,
                "vacuous",
            ));
        }
        if cfg.selected("overlap") {
            let pi = ladder.last().expect("non-empty ladder");
            let a = toeplitz_fn(pi, &f)?;
            let norm = a.mul(&a)?.norm()?;
            checks.push(Assertion::new(
                &format!("overlap:{tag}"),
                "for f = g the product keeps the mass of f g on the common support",
                Some(norm),
                ">= 0.5 sup|f g|",
                norm >= 0.5,
            ));
        }
    }
    Ok(SuiteReport::new("support", vec![t], checks))
}

/// Reference fit s0 + s1/k; the subleading term at k is |s1|/k.
fn subleading(samples: &[(f64, f64)]) -> Result<f64> {
    let fit = asymptotic_fit(samples, &[0.0, -1.0])?;
    Ok(fit.coefficients[1].abs())
}

pub fn toeplitz_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    torus_only(cfg, "toeplitz")?;
    let tol = &cfg.tolerances;
    let sections = h.sections(cfg, Model::Torus);
    let pts = probes(Model::Torus, cfg.params.probes, cfg.seed);
    let mut tables = Vec::new();
    let mut checks = Vec::new();
    let per_k =
        ["closure", "adjoint", "positivity", "symbol", "normalized", "contravariant"].iter().any(|c| cfg.selected(c));
    for section in sections.iter().filter(|_| per_k) {
        let tag = section.name();
        let ladder = projectors(h, cfg, Model::Torus, section)?;
        let mut t = ReportTable::new(
            &format!("toeplitz-{}", tag.replace(['(', ')'], "")),
            &["k", "closure", "adjoint", "min_eigenvalue", "normalized_difference", "normalized_commutator"],
        );
        let bump = torus_bump([0.4, 0.6], 0.2);
        let m0 = ladder[0].manifold.clone();
        let step = m0.fd_step();
        let rows = h.par_map(cfg, &ladder, |pi| -> Result<[f64; 5]> {
            let tf = toeplitz_fn(pi, &cos_x)?;
            let tg = toeplitz_fn(pi, &cos_y)?;
            let prod = tf.mul(&tg)?;
            let g = linalg::gram(&pi.basis);
            let closure = linalg::max_abs(&(g.dot(&prod.compressed).dot(&g) - &prod.compressed));
            let e: Vec<C64> = pi.manifold.nodes.iter().map(|p| C64::from_polar(1.0, 2.0 * PI * p[0])).collect();
            let ec: Vec<C64> = e.iter().map(|z| z.conj()).collect();
            let adj = toeplitz(pi, &e)?.adjoint().sub(&toeplitz(pi, &ec)?)?.norm()?;
            let min_eig = toeplitz_fn(pi, &bump)?.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
            let (nd, nc) = if cfg.selected("normalized") {
                let m = pi.manifold.clone();
                let tn = normalized_toeplitz(pi, &cos_x)?;
                let b = toeplitz_fn(pi, &|p| poisson_at(&m, &cos_x, &cos_y, p, step))?;
                (tn.sub(&tf)?.norm()?, tn.ik_commutator(&tg)?.sub(&b)?.norm()?)
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok([closure, adj, min_eig, nd, nc])
        })?;
        for (pi, r) in ladder.iter().zip(&rows) {
            t.push(vec![pi.k.to_string(), num(r[0]), num(r[1]), num(r[2]), num(r[3]), num(r[4])]);
        }
        let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
        let max = |v: Vec<f64>| v.into_iter().fold(0.0f64, f64::max);
        if cfg.selected("closure") {
            checks.push(Assertion::at_most(
                &format!("closure:{tag}"),
                "Π T_f T_g Π = T_f T_g",
                max(col(0)),
                tol.closure,
            ));
        }
        if cfg.selected("adjoint") {
            checks.push(Assertion::at_most(&format!("adjoint:{tag}"), "T_f* = T_{f̄}", max(col(1)), tol.hermitian));
        }
        if cfg.selected("positivity") {
            let worst = col(2).into_iter().fold(f64::INFINITY, f64::min);
            checks.push(Assertion::new(
                &format!("positivity:{tag}"),
                "f >= 0 gives T_f >= 0",
                Some(worst),
                format!(">= -{:e}", tol.positivity),
                worst >= -tol.positivity,
            ));
        }
        if cfg.selected("normalized") {
            let ks: Vec<f64> = ladder.iter().map(|p| p.k as f64).collect();
            let d: Vec<(f64, f64)> = ks.iter().copied().zip(col(3)).collect();
            let c: Vec<(f64, f64)> = ks.iter().copied().zip(col(4)).collect();
            let od = decay_order(&d, tol.floor)?;
            let oc = decay_order(&c, tol.floor)?;
            checks.push(Assertion::new(
                &format!("normalized-difference:{tag}"),
                "Π (f + (i/k) ∇_X) Π − T_f = O(1/k)",
                od.slope,
                format!("order <= -{}", 1.0 - tol.norm_growth),
                od.at_most(-(1.0 - tol.norm_growth)),
            ));
            checks.push(Assertion::new(
                &format!("normalized-commutator:{tag}"),
                "ik[T'_f, T_g] has principal symbol {f, g}",
                oc.slope,
                format!("order <= -{}", tol.normalized_order),
                oc.at_most(-tol.normalized_order),
            ));
        }
        tables.push(t);
        if cfg.selected("symbol") {
            let mut ts = ReportTable::new(
                &format!("toeplitz-symbol-{}", tag.replace(['(', ')'], "")),
                &["probe", "x0", "x1", "sigma0_f", "f", "sigma0_fg", "fg", "residual"],
            );
            let fs: Vec<ToeplitzOperator> = ladder.iter().map(|pi| toeplitz_fn(pi, &cos_x)).collect::<Result<_>>()?;
            let fgs: Vec<ToeplitzOperator> = ladder
                .iter()
                .map(|pi| toeplitz_fn(pi, &cos_x)?.mul(&toeplitz_fn(pi, &cos_y)?))
                .collect::<Result<_>>()?;
            let order = (ladder.len() / 2).saturating_sub(1).clamp(1, 2);
            let sf = covariant_symbol(&fs, &pts, order)?;
            let sfg = covariant_symbol(&fgs, &pts, order)?;
            let mut worst: f64 = 0.0;
            for (j, &x) in pts.iter().enumerate() {
                let (a, b) = (sf.coefficients[0][j], sfg.coefficients[0][j]);
                let (fa, fb) = (cos_x(x), cos_x(x) * cos_y(x));
                worst = worst.max((a - fa).abs()).max((b - fb).abs());
                ts.push(vec![
                    j.to_string(),
                    num(x[0]),
                    num(x[1]),
                    num(a),
                    num(fa),
                    num(b),
                    num(fb),
                    num(sf.residuals[j].max(sfg.residuals[j])),
                ]);
            }
            checks.push(Assertion::at_most(
                &format!("principal-symbol:{tag}"),
                "σ_0(T_f) = f and σ_0(T_f T_g) = f g",
                worst,
                tol.symbol_fit,
            ));
            tables.push(ts);
        }
        if cfg.selected("contravariant") {
            let pi = &ladder[0];
            let target = pi.manifold.sample(cos_x);
            let rec = contravariant_recover(pi, &target, 1e-8);
            let (ok, note) = match &rec {
                Ok(r) => (
                    r.contraction < 1.0,
                    format!("k = {}, {} iterations, contraction {:.3e}", r.k, r.iterations, r.contraction),
                ),
                Err(e) => (false, e.to_string()),
            };
            checks.push(
                Assertion::holds(
                    &format!("contravariant:{tag}"),
                    "every covariant symbol is reached by a Toeplitz multiplier",
                    ok,
                    "residual <= 1e-8 with contraction < 1",
                )
                .with_note(note),
            );
        }
    }
    if cfg.selected("robustness") && sections.len() >= 2 {
        let mut t = ReportTable::new(
            "toeplitz-robustness",
            &["statistic", "k", "reference", "alternative", "difference", "subleading"],
        );
        let reference = commutator_samples(h, cfg, &sections[0])?;
        for alt in &sections[1..] {
            let other = commutator_samples(h, cfg, alt)?;
            let stats: [(&str, Statistic); 3] = [
                ("norm-defect", |s| (1.0 - s.norm_f) * s.k as f64),
                ("commutator-defect", |s| s.defect),
                ("commutator-poisson-defect", |s| s.poisson_defect),
            ];
            for (name, stat) in stats {
                let a: Vec<(f64, f64)> = reference.iter().map(|s| (s.k as f64, stat(s))).collect();
                let b: Vec<(f64, f64)> = other.iter().map(|s| (s.k as f64, stat(s))).collect();
                let sub = subleading(&a)?.min(subleading(&b)?);
                let mut ok = true;
                let mut worst: f64 = 0.0;
                for (x, y) in a.iter().zip(&b) {
                    let bound = sub / x.0;
                    let d = (x.1 - y.1).abs();
                    ok &= d < bound;
                    worst = worst.max(d / bound);
                    t.push(vec![name.into(), num(x.0), num(x.1), num(y.1), num(d), num(bound)]);
                }
                checks.push(
                    Assertion::new(
                        &format!("robustness-{name}:{}-vs-{}", sections[0].name(), alt.name()),
                        "statistics do not depend on E beyond O(3) along the diagonal",
                        Some(worst),
                        "|difference| / (|s1|/k) < 1 at every k",
                        ok,
                    )
                    .with_note(format!("fit s0 + s1/k on each realization, s1 = min of the two: {sub:.4e}")),
                );
            }
        }
        tables.push(t);
    }
    Ok(SuiteReport::new("toeplitz", tables, checks))
}
