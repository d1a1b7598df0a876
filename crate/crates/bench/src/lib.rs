//! Fixtures shared by the benchmarks.

use beamsched::rng::seeded;
use beamsched::GameInstance;
use rand::Rng;

/// Game with `m` players at realistic magnitudes: direct gains near 1e-10,
/// cross gains up to `cross` times smaller, noise 2.26e-12 W.
pub fn random_game(m: usize, cross: f64, seed: u64) -> GameInstance {
    let mut rng = seeded(seed);
    let gains = (0..m)
        .map(|i| {
            (0..m)
                .map(|l| {
                    let g = rng.random_range(1e-11..1e-10);
                    if i == l { g } else { g * cross * rng.random::<f64>() }
                })
                .collect()
        })
        .collect();
    GameInstance::new(
        (0..m).map(|_| rng.random_range(50.0..500.0)).collect(),
        (0..m).map(|_| rng.random_range(5.0..60.0)).collect(),
        vec![7.94; m],
        1.0,
        gains,
        2.26e-12,
    )
    .expect("valid fixture")
}

/// Uniform feasible starting point.
pub fn random_start(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed ^ 0x5eed);
    (0..m).map(|_| rng.random_range(0.0..7.94)).collect()
}
