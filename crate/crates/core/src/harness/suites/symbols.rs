use crate::error::Result;
use crate::harness::config::RunConfig;
use crate::harness::report::{num, opt, Assertion, ReportTable, SuiteReport};
use crate::harness::Harness;
use crate::kernel::verify_symbol_product;
use crate::star::{scalar, FormalSymbol, GradedSymbol};

/// ℏ^ℓ z^a z̄^b with 2ℓ + a + b ≤ `max_grade`.
pub fn monomials(max_grade: u32) -> Vec<GradedSymbol> {
    let mut out = Vec::new();
    for l in 0..=max_grade / 2 {
        for a in 0..=max_grade {
            for b in 0..=max_grade {
                let g = 2 * l + a + b;
                if g <= max_grade {
                    let s = FormalSymbol::scalar_term(1, 1, l as i32, vec![a], vec![b], scalar(1));
                    out.push(GradedSymbol::new(s, g).expect("monomial has its grade"));
                }
            }
        }
    }
    out
}

pub fn symbol_product_suite(h: &Harness, cfg: &RunConfig) -> Result<SuiteReport> {
    let tol = &cfg.tolerances;
    let ladder = cfg.ladder();
    let ms = monomials(cfg.params.max_grade);
    let pairs: Vec<(GradedSymbol, GradedSymbol)> = ms
        .iter()
        .flat_map(|p| ms.iter().map(move |q| (p.clone(), q.clone())))
        .filter(|(p, q)| p.grade() + q.grade() <= cfg.params.max_grade)
        .collect();
    let grid = &cfg.grid;
    let reports =
        h.par_map(cfg, &pairs, |(p, q)| verify_symbol_product(p, q, &ladder, grid.patch_radius, grid.patch_inner))?;
    let mut t = ReportTable::new(
        "verify-symbol-product",
        &[
            "left",
            "right",
            "product",
            "grade",
            "k",
            "diagonal_re",
            "diagonal_im",
            "prediction_re",
            "prediction_im",
            "defect",
            "fit_order",
        ],
    );
    let (mut failed, mut at_floor) = (Vec::new(), 0usize);
    let mut worst: Option<f64> = None;
    for r in &reports {
        for row in &r.rows {
            t.push(vec![
                r.left.clone(),
                r.right.clone(),
                r.product.clone(),
                r.grade.to_string(),
                row.k.to_string(),
                num(row.diagonal.re),
                num(row.diagonal.im),
                num(row.prediction.re),
                num(row.prediction.im),
                num(row.defect),
                opt(r.fitted_order),
            ]);
        }
        if r.fitted_order.is_none() && r.rows.iter().all(|x| x.defect <= r.floor) {
            at_floor += 1;
        }
        if let Some(s) = r.fitted_order {
            worst = Some(worst.map_or(s, |w: f64| w.max(s)));
        }
        if !r.passed(-tol.symbol_order) {
            failed.push(format!("{} * {}", r.left, r.right));
        }
    }
    let mut note = format!(
        "{} pairs, {at_floor} with every defect below the floor {:e}",
        reports.len(),
        crate::kernel::SYMBOL_FLOOR
    );
    if !failed.is_empty() {
        note.push_str(&format!("; failing: {}", failed.join(", ")));
    }
    let check = Assertion::new(
        "symbol-product",
        "the composed kernel of two symbols realizes their star product up to terms of lower order",
        worst,
        format!("relative defect order <= -{} or at the floor for every pair", tol.symbol_order),
        failed.is_empty(),
    )
    .with_note(note);
    Ok(SuiteReport::new("verify-symbol-product", vec![t], vec![check]))
}
