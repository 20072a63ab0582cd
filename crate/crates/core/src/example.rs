//! The six-site worked example used throughout the test suites.

use crate::instance::Instance;

pub const EXAMPLE1_COST: [[f64; 6]; 6] = [
    [0.0, 14.0, 15.0, 16.0, 15.0, 9.0],
    [5.0, 0.0, 7.0, 2.0, 19.0, 16.0],
    [16.0, 5.0, 0.0, 7.0, 1.0, 19.0],
    [12.0, 1.0, 10.0, 0.0, 13.0, 1.0],
    [1.0, 9.0, 9.0, 15.0, 0.0, 2.0],
    [8.0, 10.0, 16.0, 8.0, 4.0, 0.0],
];

pub const EXAMPLE1_FLOW: [[f64; 6]; 6] = [
    [0.0, 15.0, 2.0, 8.0, 11.0, 2.0],
    [19.0, 0.0, 1.0, 16.0, 20.0, 7.0],
    [3.0, 9.0, 0.0, 3.0, 11.0, 16.0],
    [7.0, 2.0, 5.0, 0.0, 14.0, 5.0],
    [15.0, 4.0, 20.0, 4.0, 0.0, 1.0],
    [12.0, 4.0, 7.0, 11.0, 18.0, 0.0],
];

pub const EXAMPLE1_CAPACITY: [f64; 6] = [119.0, 119.0, 113.0, 145.0, 149.0, 140.0];

pub const EXAMPLE1_LAMBDA: [f64; 6] = [0.0, 1.0, 0.0, 0.0, 1.0, 1.0];

/// `p = 2`, `μ = 0.7`, `δ = 0.9`.
pub fn example1() -> Instance {
    Instance::new(
        EXAMPLE1_COST.iter().map(|r| r.to_vec()).collect(),
        EXAMPLE1_FLOW.iter().map(|r| r.to_vec()).collect(),
        EXAMPLE1_CAPACITY.to_vec(),
        2,
        0.7,
        0.9,
    )
    .expect("example data is valid")
}
