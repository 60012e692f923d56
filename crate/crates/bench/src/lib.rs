//! Shared fixtures for the benchmarks.

use cpsurf::{Complex64, Poly, RationalFunction};

/// `F = ξ²(ξ² - 1)`: three finite poles of `F'/F` and two zeros.
pub fn meron_f() -> RationalFunction {
    let c = |re: f64| Complex64::new(re, 0.0);
    RationalFunction::new(Poly::new(vec![c(0.0), c(0.0), c(-1.0), c(0.0), c(1.0)]), Poly::new(vec![c(1.0)]))
        .expect("nonzero denominator")
}

pub fn base() -> Complex64 {
    Complex64::new(0.37, -0.21)
}
