//! Non-cooperative power-allocation game played by the BSs in every block.
//!
//! Player `i` picks the power `p_i` towards its selected UE and earns
//! `alpha_i W log(1 + g_i p_i) - lambda_i p_i`, where the equivalent gain `g_i`
//! depends on everybody else's power through interference. Best responses are
//! clamped water-filling levels, equilibria are fixed points of the joint
//! best-response map, and a positive-principal-minor test on the coupling
//! matrix certifies uniqueness.

use crate::error::{invalid, Error, Result};

/// One block's game. `gains[i][l]` is the composite gain from BS `l` to the UE
/// selected by BS `i`, so the diagonal holds the direct links.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    pub p_max: Vec<f64>,
    pub bandwidth: f64,
    pub gains: Vec<Vec<f64>>,
    pub sigma2: f64,
}

impl GameInstance {
    pub fn new(
        alpha: Vec<f64>,
        lambda: Vec<f64>,
        p_max: Vec<f64>,
        bandwidth: f64,
        gains: Vec<Vec<f64>>,
        sigma2: f64,
    ) -> Result<Self> {
        let m = alpha.len();
        if m == 0 {
            return Err(invalid("players", "a game needs at least one BS"));
        }
        if lambda.len() != m || p_max.len() != m || gains.len() != m {
            return Err(invalid("players", "pricing, power limits and gains disagree on M"));
        }
        if alpha.iter().chain(&lambda).any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(invalid("pricing", "alpha and lambda must be finite and nonnegative"));
        }
        if p_max.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(invalid("p_max", "peak powers must be positive"));
        }
        if !(bandwidth > 0.0) || !(sigma2 > 0.0) {
            return Err(invalid("bandwidth", "bandwidth and noise must be positive"));
        }
        for (i, row) in gains.iter().enumerate() {
            if row.len() != m {
                return Err(invalid("gains", "gain matrix must be M x M"));
            }
            if row.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                return Err(invalid("gains", "gains must be finite and nonnegative"));
            }
            if !(row[i] > 0.0) {
                return Err(invalid("gains", format!("direct gain of BS {i} is zero")));
            }
        }
        Ok(Self {
            alpha,
            lambda,
            p_max,
            bandwidth,
            gains,
            sigma2,
        })
    }

    pub fn num_players(&self) -> usize {
        self.alpha.len()
    }

    /// Interference plus noise at BS `i`'s UE.
    pub fn interference(&self, i: usize, powers: &[f64]) -> f64 {
        self.gains[i]
            .iter()
            .zip(powers)
            .enumerate()
            .filter(|&(l, _)| l != i)
            .map(|(_, (g, p))| g * p)
            .sum::<f64>()
            + self.sigma2
    }

    pub fn equivalent_gain(&self, i: usize, powers: &[f64]) -> f64 {
        self.gains[i][i] / self.interference(i, powers)
    }

    pub fn sinr(&self, i: usize, powers: &[f64]) -> f64 {
        self.equivalent_gain(i, powers) * powers[i]
    }

    /// `alpha_i W log(1 + g_i p_i) - lambda_i p_i`.
    pub fn payoff(&self, i: usize, powers: &[f64]) -> f64 {
        payoff_at(
            self.alpha[i],
            self.lambda[i],
            self.bandwidth,
            self.equivalent_gain(i, powers),
            powers[i],
        )
    }

    /// Best response of BS `i` to the other entries of `powers`.
    pub fn best_response(&self, i: usize, powers: &[f64]) -> Result<f64> {
        best_response(
            self.alpha[i],
            self.lambda[i],
            self.bandwidth,
            self.equivalent_gain(i, powers),
            self.p_max[i],
        )
    }

    /// Simultaneous best responses of every BS to `powers`.
    pub fn best_response_map(&self, powers: &[f64]) -> Vec<f64> {
        (0..self.num_players())
            .map(|i| {
                // Direct gains are positive by construction, so g > 0.
                self.best_response(i, powers).unwrap_or(0.0)
            })
            .collect()
    }

    /// Largest unilateral improvement available, measured in power:
    /// `max_i |p_i - BR_i(p_-i)|`.
    pub fn verify_ne(&self, powers: &[f64]) -> f64 {
        self.best_response_map(powers)
            .iter()
            .zip(powers)
            .map(|(br, p)| (br - p).abs())
            .fold(0.0, f64::max)
    }

    /// Coupling matrix whose P-matrix property guarantees a unique
    /// equilibrium:
    /// `Q_pp = alpha_p W`,
    /// `Q_pq = -alpha_p W (hbar2[p][q] / hbar2[q][q]) (1 + sum_i hbar2[q][i] pmax_i / sigma2)`.
    pub fn q_matrix(&self) -> Result<QMatrix> {
        let m = self.num_players();
        let mut q = vec![vec![0.0; m]; m];
        for col in 0..m {
            let direct = self.gains[col][col];
            if !(direct > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "gains",
                    reason: format!("direct gain of BS {col} is zero"),
                });
            }
            let load = 1.0
                + self.gains[col]
                    .iter()
                    .zip(&self.p_max)
                    .map(|(g, p)| g * p)
                    .sum::<f64>()
                    / self.sigma2;
            for (row, q_row) in q.iter_mut().enumerate() {
                let aw = self.alpha[row] * self.bandwidth;
                q_row[col] = if row == col {
                    aw
                } else {
                    -aw * (self.gains[row][col] / direct) * load
                };
            }
        }
        Ok(QMatrix(q))
    }
}

pub fn payoff_at(alpha: f64, lambda: f64, bandwidth: f64, g: f64, p: f64) -> f64 {
    alpha * bandwidth * (g * p).ln_1p() - lambda * p
}

/// Clamped water-filling `[alpha W / lambda - 1/g]_0^{p_max}`.
///
/// Corners: `lambda = 0` with `alpha > 0` leaves the payoff increasing, so
/// the peak power is optimal; `alpha = 0` makes power pure cost, so zero.
pub fn best_response(alpha: f64, lambda: f64, bandwidth: f64, g: f64, p_max: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(invalid("equivalent_gain", format!("{g} must be positive")));
    }
    if alpha <= 0.0 {
        return Ok(0.0);
    }
    if lambda <= 0.0 {
        return Ok(p_max);
    }
    Ok((alpha * bandwidth / lambda - 1.0 / g).clamp(0.0, p_max))
}

/// Result of the parallel best-response iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NeResult {
    pub powers: Vec<f64>,
    /// Best-response rounds performed.
    pub iterations: usize,
    pub converged: bool,
    /// Squared Euclidean step of the last round.
    pub residual: f64,
}

/// Round-by-round driver for the synchronous update. Each call to
/// [`ParallelUpdate::step`] is one slot: every BS reads the previous iterate's
/// interference and moves to its best response at once. Once the step falls
/// below `epsilon` the iterate is frozen.
#[derive(Debug, Clone)]
pub struct ParallelUpdate<'a> {
    game: &'a GameInstance,
    powers: Vec<f64>,
    epsilon: f64,
    iterations: usize,
    converged: bool,
    residual: f64,
}

impl<'a> ParallelUpdate<'a> {
    pub fn new(game: &'a GameInstance, initial: Vec<f64>, epsilon: f64) -> Self {
        debug_assert_eq!(initial.len(), game.num_players());
        let powers = initial
            .into_iter()
            .zip(&game.p_max)
            .map(|(p, &cap)| p.clamp(0.0, cap))
            .collect();
        Self {
            game,
            powers,
            epsilon,
            iterations: 0,
            converged: false,
            residual: f64::INFINITY,
        }
    }

    /// Performs one round unless already converged and returns the iterate.
    pub fn step(&mut self) -> &[f64] {
        if !self.converged {
            let next = self.game.best_response_map(&self.powers);
            self.residual = next
                .iter()
                .zip(&self.powers)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            self.powers = next;
            self.iterations += 1;
            self.converged = self.residual <= self.epsilon;
        }
        &self.powers
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn finish(self) -> NeResult {
        NeResult {
            powers: self.powers,
            iterations: self.iterations,
            converged: self.converged,
            residual: self.residual,
        }
    }
}

/// Runs the synchronous best-response iteration from `initial` until the
/// squared step is at most `epsilon` or `max_iters` rounds have run.
pub fn parallel_update(
    game: &GameInstance,
    initial: Vec<f64>,
    epsilon: f64,
    max_iters: usize,
) -> NeResult {
    let mut run = ParallelUpdate::new(game, initial, epsilon);
    while run.iterations < max_iters && !run.converged {
        run.step();
    }
    run.finish()
}

/// Square matrix from the uniqueness condition, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix(pub Vec<Vec<f64>>);

impl QMatrix {
    pub fn is_p_matrix(&self) -> Result<bool> {
        is_p_matrix(&self.0)
    }
}

/// Largest order accepted by [`is_p_matrix`]; `2^n - 1` minors are formed.
pub const MAX_P_MATRIX_ORDER: usize = 20;

/// True iff every principal minor is positive. Exhaustive over all
/// `2^n - 1` index subsets.
pub fn is_p_matrix(a: &[Vec<f64>]) -> Result<bool> {
    let n = a.len();
    if n > MAX_P_MATRIX_ORDER {
        return Err(Error::MatrixTooLarge(n));
    }
    if a.iter().any(|row| row.len() != n) {
        return Err(invalid("matrix", "matrix must be square"));
    }
    let mut scratch = Vec::with_capacity(n * n);
    let mut idx = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        idx.clear();
        idx.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        scratch.clear();
        for &r in &idx {
            scratch.extend(idx.iter().map(|&c| a[r][c]));
        }
        if !(determinant_in_place(&mut scratch, idx.len()) > 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Gaussian elimination with partial pivoting on a row-major `k x k` buffer.
fn determinant_in_place(m: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| m[x * k + col].abs().total_cmp(&m[y * k + col].abs()))
            .unwrap_or(col);
        let pv = m[pivot * k + col];
        if pv == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..k {
                m.swap(pivot * k + c, col * k + c);
            }
            det = -det;
        }
        det *= pv;
        for r in (col + 1)..k {
            let f = m[r * k + col] / pv;
            if f != 0.0 {
                for c in col..k {
                    m[r * k + c] -= f * m[col * k + c];
                }
            }
        }
    }
    det
}
