use rand::RngExt;

use crate::rng;

/// `round(num / den)` with halves rounded up, for nonnegative operands.
pub fn round_half_up_div(num: u32, den: u32) -> u32 {
    (2 * num + den) / (2 * den)
}

/// Draws `(capacity, initial_occupancy)` per lot.
///
/// With `q = floor(drivers / lots)`, capacity is uniform on `{q+1, q+2}` and
/// the initial occupancy uniform on `[round(cap/4), round(3 cap/4)]`.
pub fn gen_capacities(n_drivers: usize, n_lots: usize, seed: u64) -> Vec<(u32, u32)> {
    if n_lots == 0 {
        return Vec::new();
    }
    let base = (n_drivers / n_lots) as u32;
    let mut rng = rng::seeded(seed);
    (0..n_lots)
        .map(|_| {
            let capacity = rng.random_range(base + 1..=base + 2);
            let lo = round_half_up_div(capacity, 4);
            let hi = round_half_up_div(3 * capacity, 4);
            (capacity, rng.random_range(lo..=hi))
        })
        .collect()
}
