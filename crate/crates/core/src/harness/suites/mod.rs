pub mod algebra;
pub mod models;
pub mod operators;
pub mod symbols;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::Point;
use crate::harness::config::Model;
use crate::laplace::loglog_slope;

/// Deterministic probe points away from coordinate singularities.
pub fn probes(model: Model, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..count)
        .map(|_| match model {
            Model::Torus => [rng.gen::<f64>(), rng.gen::<f64>()],
            Model::Sphere => [rng.gen_range(0.4..PI - 0.4), rng.gen_range(0.0..2.0 * PI)],
            Model::Patch => [rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)],
        })
        .collect()
}

/// Decay order of |value| in k, fitted on the samples above `floor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Order {
    pub slope: Option<f64>,
    pub above_floor: usize,
    pub total: usize,
}

impl Order {
    /// True when the fitted order is at most `limit`, or when the samples are at the floor
    /// from some k on and decrease before it.
    pub fn at_most(&self, limit: f64) -> bool {
        match self.slope {
            Some(s) => s <= limit,
            None => self.above_floor <= 1,
        }
    }

    pub fn describe(&self) -> String {
        match self.slope {
            Some(s) => format!("order {s:.4} from {} of {} samples above floor", self.above_floor, self.total),
            None => format!("{} of {} samples above floor", self.above_floor, self.total),
        }
    }
}

pub fn decay_order(samples: &[(f64, f64)], floor: f64) -> Result<Order> {
    let above: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1.abs() > floor).collect();
    let slope = match above.len() {
        0 => None,
        1 if samples.first().is_some_and(|s| s.1.abs() > floor) => None,
        1 => Some(f64::INFINITY),
        2 | 3 => {
            let (a, b) = (above[0], above[above.len() - 1]);
            Some((b.1.abs().ln() - a.1.abs().ln()) / (b.0.ln() - a.0.ln()))
        }
        _ => Some(loglog_slope(&above)?.slope),
    };
    Ok(Order { slope, above_floor: above.len(), total: samples.len() })
}

/// max/min of the positive samples.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        let s: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|k: &f64| (*k, 1.0 / k)).collect();
        let o = decay_order(&s, 1e-12).unwrap();
        assert!((o.slope.unwrap() + 1.0).abs() < 1e-12);
        assert!(o.at_most(-1.0 + 1e-9) && !o.at_most(-1.5));
        let floor = vec![(8.0, 1e-6), (16.0, 1e-14), (32.0, 1e-15), (64.0, 0.0)];
        let o = decay_order(&floor, 1e-10).unwrap();
        assert_eq!(o.slope, None);
        assert!(o.at_most(-1.0));
        let two = vec![(8.0, 1e-3), (16.0, 1e-5), (32.0, 1e-15)];
        assert!((decay_order(&two, 1e-10).unwrap().slope.unwrap() + 2.0 * 10f64.ln() / 2f64.ln()).abs() < 1e-12);
        assert_eq!(spread(&[1.0, 2.0, 3.0]), 3.0);
    }
}
