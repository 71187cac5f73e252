//! Shared fixtures for the benchmarks.

use conelab_core::builders;
use conelab_core::System;

/// Named systems benchmarked by every group.
pub fn fixtures() -> Vec<(&'static str, System)> {
    vec![
        ("shift", builders::shift_power(1).unwrap()),
        ("rule-90", builders::elementary(90).unwrap()),
        ("rule-30", builders::elementary(30).unwrap()),
        ("cone-product", builders::perm_product(-1, 2, 1, 3).unwrap()),
        ("golden-shift", builders::golden_mean(1).unwrap()),
    ]
}
