//! Shared fixtures for the benchmark suite.

use repulsion_core::lattice::{LatticeField, QPolynomial, TorusGrid};
use repulsion_core::rng::stream;
use rand::Rng;

pub fn random_field(grid: TorusGrid, seed: u64) -> LatticeField {
    let mut rng = stream(seed, "bench-field", 0);
    let values = (0..grid.site_count())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    LatticeField::from_values(grid, values).unwrap()
}

pub fn models() -> Vec<(&'static str, QPolynomial)> {
    vec![
        ("free", QPolynomial::free_field()),
        ("membrane", QPolynomial::membrane()),
        ("mixed", QPolynomial::mixed()),
    ]
}
