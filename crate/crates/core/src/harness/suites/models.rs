use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{check_e_conditions, hamiltonian_field, section_e, Point};
use crate::harness::config::{Model, RunConfig};
use crate::harness::report::{num, opt, Assertion, ReportTable, SuiteReport};
use crate::harness::suites::{decay_order, probes, spread};
use crate::harness::Harness;
use crate::laplace::asymptotic_fit;
use crate::projector::chi_series_defect;

fn test_function(model: Model) -> fn(Point) -> f64 {
    match model {
        Model::Torus => |p| (2.0 * PI * p[0]).cos(),
        Model::Sphere => |p| p[0].cos(),
        Model::Patch => |p| p[0] * p[0] + p[1] * p[1],
    }
}

pub fn geometry_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    let tol = &cfg.tolerances;
    let mut t = ReportTable::new(
        "geometry-check",
        &[
            "model",
            "section",
            "k",
            "nodes",
            "volume_error",
            "diagonal",
            "hermitian",
            "max_offdiagonal",
            "hessian",
            "divergence",
            "contraction",
        ],
    );
    let mut checks = Vec::new();
    for model in cfg.models() {
        for section in h.sections(cfg, model) {
            let (mut e_ok, mut vol, mut div, mut con) = (true, 0.0f64, 0.0f64, 0.0f64);
            let mut notes = Vec::new();
            for &k in &cfg.ladder() {
                let m = h.manifold(cfg, model, k)?;
                let e = section_e(m.clone(), section.clone())?;
                let r = check_e_conditions(&e, None, tol.e_conditions);
                if !r.passed() {
                    e_ok = false;
                    notes.push(format!("k={k}: {}", r.violations.join("; ")));
                }
                let field = hamiltonian_field(&m, &test_function(model));
                let ve = (m.volume() - m.exact_volume()).abs() / m.exact_volume();
                vol = vol.max(ve);
                div = div.max(field.max_divergence);
                con = con.max(field.max_contraction_defect);
                t.push(vec![
                    model.name().into(),
                    section.name(),
                    k.to_string(),
                    m.len().to_string(),
                    num(ve),
                    num(r.diagonal_defect),
                    num(r.hermitian_defect),
                    num(r.max_offdiagonal_modulus),
                    num(r.hessian_defect),
                    num(field.max_divergence),
                    num(field.max_contraction_defect),
                ]);
            }
            let tag = format!("{}:{}", model.name(), section.name());
            checks.push(
                Assertion::holds(
                    &format!("e-conditions:{tag}"),
                    "E(x,x) = 1, E(y,x) = conj E(x,y), |E| < 1 off the diagonal, normal Hessian of −2 ln|E| equals 2g",
                    e_ok,
                    "no violations",
                )
                .with_note(notes.join(" | ")),
            );
            checks.push(Assertion::at_most(&format!("volume:{tag}"), "quadrature reproduces vol(M)", vol, 1e-12));
            checks.push(Assertion::at_most(
                &format!("divergence:{tag}"),
                "Hamiltonian fields preserve ω",
                div,
                tol.e_conditions,
            ));
            checks.push(Assertion::at_most(&format!("contraction:{tag}"), "ι_X ω = df", con, tol.e_conditions));
        }
    }
    Ok(SuiteReport::new("geometry-check", vec![t], checks))
}

pub fn projector_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    let tol = &cfg.tolerances;
    let ladder = cfg.ladder();
    let chi_orders = &cfg.params.chi_orders;
    let mut cols: Vec<String> = [
        "model",
        "section",
        "k",
        "nodes",
        "blocks",
        "rank",
        "expected_rank",
        "trace",
        "gap",
        "gap_sqrt_k",
        "q_norm",
        "q_sqrt_k",
        "idempotency",
        "hermitian",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(chi_orders.iter().map(|m| format!("chi{m}")));
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut t = ReportTable::new("projector", &col_refs);
    let mut td = ReportTable::new("projector-diagonal", &["model", "section", "k", "probe", "x0", "x1", "defect"]);
    let mut checks = Vec::new();
    for model in cfg.models() {
        let expected = |k: u32| -> usize {
            match model {
                Model::Sphere => k as usize + 1,
                _ => k as usize,
            }
        };
        let pts = probes(model, cfg.params.probes, cfg.seed);
        for section in h.sections(cfg, model) {
            let tag = format!("{}:{}", model.name(), section.name());
            let levels = h.levels(cfg, model, &section, &ladder)?;
            let mut rank_bad = 0usize;
            let (mut idem, mut herm) = (0.0f64, 0.0f64);
            let (mut gaps, mut qs) = (Vec::new(), Vec::new());
            let mut chi = vec![Vec::new(); chi_orders.len()];
            let mut chi_monotone = true;
            let mut diag = vec![Vec::new(); pts.len()];
            for lv in &levels {
                let (s, pi) = (&lv.spectral, &lv.projector);
                let k = s.k;
                let sk = (k as f64).sqrt();
                rank_bad += usize::from(pi.rank() != expected(k));
                let mut row = vec![
                    model.name().to_string(),
                    section.name(),
                    k.to_string(),
                    pi.manifold.len().to_string(),
                    s.blocks.to_string(),
                    pi.rank().to_string(),
                    expected(k).to_string(),
                    num(pi.trace()),
                    num(s.gap),
                    num(s.gap * sk),
                    num(s.q_norm),
                    num(s.q_norm * sk),
                ];
                gaps.push(s.gap * sk);
                qs.push(s.q_norm * sk);
                let wants_laws = cfg.selected("idempotency") || cfg.selected("hermitian");
                let (id, he) = if wants_laws {
                    (Some(pi.idempotency_defect()?), Some(pi.hermitian_defect()))
                } else {
                    (None, None)
                };
                idem = idem.max(id.unwrap_or(0.0));
                herm = herm.max(he.unwrap_or(0.0));
                row.push(opt(id));
                row.push(opt(he));
                let mut prev = s.gap;
                for (j, &m) in chi_orders.iter().enumerate() {
                    let d = chi_series_defect(s, m).ok();
                    if let Some(d) = d {
                        chi[j].push((k as f64, d));
                        chi_monotone &= d <= prev;
                        prev = d;
                    }
                    row.push(opt(d));
                }
                t.push(row);
                if cfg.selected("covariant") {
                    for (j, &x) in pts.iter().enumerate() {
                        let d = 2.0 * PI / k as f64 * pi.diagonal_at(x) - 1.0;
                        diag[j].push((k as f64, d));
                        td.push(vec![
                            model.name().into(),
                            section.name(),
                            k.to_string(),
                            j.to_string(),
                            num(x[0]),
                            num(x[1]),
                            num(d),
                        ]);
                    }
                }
            }
            if cfg.selected("rank") {
                checks.push(Assertion::new(
                    &format!("rank:{tag}"),
                    "rank Π_k equals the dimension of holomorphic sections: k on the torus, k + 1 on the sphere",
                    Some(rank_bad as f64),
                    "0 mismatches",
                    rank_bad == 0,
                ));
            }
            if cfg.selected("gap") && model == Model::Torus {
                let g = spread(&gaps);
                checks.push(Assertion::new(
                    &format!("gap:{tag}"),
                    "dist(spec P_k, {0, 1}) = O(k^{-1/2})",
                    Some(g),
                    format!("max/min of gap*sqrt(k) < {}", tol.gap_ratio),
                    g < tol.gap_ratio,
                ));
                let q = spread(&qs);
                checks.push(Assertion::new(
                    &format!("q-norm:{tag}"),
                    "‖P_k² − P_k‖ = O(k^{-1/2})",
                    Some(q),
                    format!("max/min of |P^2-P|*sqrt(k) < {}", tol.gap_ratio),
                    q < tol.gap_ratio,
                ));
            }
            if cfg.selected("idempotency") {
                checks.push(Assertion::at_most(&format!("idempotency:{tag}"), "Π² = Π", idem, tol.idempotency));
            }
            if cfg.selected("hermitian") {
                checks.push(Assertion::at_most(&format!("hermitian:{tag}"), "Π* = Π", herm, tol.hermitian));
            }
            if cfg.selected("chi") {
                checks.push(Assertion::holds(
                    &format!("chi-monotone:{tag}"),
                    "‖χ_m(P) − Π‖ decreases with m",
                    chi_monotone,
                    "non-increasing in m at every k",
                ));
                for (j, &m) in chi_orders.iter().enumerate() {
                    let want = -((m + 1) as f64) / 2.0;
                    let o = decay_order(&chi[j], tol.floor)?;
                    // The sphere E is exact and P_k is a multiple of a projector: the defect
                    // decays at the squared rate, so only the bound is asserted there.
                    let (ok, requirement) = if model == Model::Torus {
                        (
                            o.slope.is_some_and(|s| (s - want).abs() <= tol.chi_order),
                            format!("within {} of {want}", tol.chi_order),
                        )
                    } else {
                        (o.at_most(want + tol.chi_order), format!("<= {want} + {}", tol.chi_order))
                    };
                    checks.push(
                        Assertion::new(
                            &format!("chi{m}-order:{tag}"),
                            "‖χ_m(P_k) − Π_k‖ = O(k^{−(m+1)/2})",
                            o.slope,
                            requirement,
                            ok,
                        )
                        .with_note(o.describe()),
                    );
                }
            }
            if cfg.selected("covariant") {
                let mut worst: f64 = 0.0;
                let mut ok = true;
                let mut notes = Vec::new();
                for (j, samples) in diag.iter().enumerate() {
                    // constant term of a0 + a1/k must vanish
                    let a0 = asymptotic_fit(samples, &[0.0, -1.0])?.coefficients[0];
                    let o = decay_order(samples, tol.floor)?;
                    ok &= a0.abs() <= tol.order_fit || o.at_most(-tol.covariant_order + tol.order_fit);
                    worst = worst.max(a0.abs());
                    notes.push(format!("probe {j}: a0 = {a0:.3e}, {}", o.describe()));
                }
                checks.push(
                    Assertion::new(
                        &format!("covariant-diagonal:{tag}"),
                        "(2π/k) Π_k(x, x) = 1 + O(k^{-1})",
                        Some(worst),
                        format!(
                            "fitted constant term <= {:e} or decay order <= -{} at every probe",
                            tol.order_fit, tol.covariant_order
                        ),
                        ok,
                    )
                    .with_note(notes.join("; ")),
                );
            }
        }
    }
    Ok(SuiteReport::new("projector", vec![t, td], checks))
}
