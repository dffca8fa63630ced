//! Fixture maps shared by the benchmarks.

use markoff_core::MuMarkoffMap;
use num_complex::Complex64;

fn map(x: Complex64, y: Complex64, z: Complex64) -> MuMarkoffMap {
    MuMarkoffMap::from_triple(x, y, z).expect("fixture seeds are irreducible")
}

/// The `(3,3,3)` map, all of whose values are real and at least 3.
pub fn classical() -> MuMarkoffMap {
    let c = Complex64::new(3.0, 0.0);
    map(c, c, c)
}

/// A map with value 2 on `0/1`, whose fan there grows linearly.
pub fn maskit() -> MuMarkoffMap {
    map(
        Complex64::new(2.0, 0.0),
        Complex64::new(2.0, -1.0),
        Complex64::new(2.0, -3.0),
    )
}

/// The `(−2,−2,−2)` map with `μ = 20`.
pub fn generalized() -> MuMarkoffMap {
    let c = Complex64::new(-2.0, 0.0);
    map(c, c, c)
}
