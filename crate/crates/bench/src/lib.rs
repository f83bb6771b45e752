//! Fixtures shared by the benchmarks.

use viscospec::data::admissible_pair;
use viscospec::{DataSpec, Grid, State};

/// Admissible small-data state on an `n`-point-per-axis grid.
pub fn sample_state(dim: usize, n: usize) -> State {
    let grid = Grid::new(dim, n).expect("grid");
    let spec = DataSpec::default();
    let (v, e) = admissible_pair(&grid, &spec).expect("data");
    State::new(v, e, 0.0).expect("state")
}
