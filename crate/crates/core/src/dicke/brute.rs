use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest particle count accepted by [`brute_force_hamiltonian`]
/// (`2^12 x 2^12` doubles is already 128 MiB).
pub const BRUTE_FORCE_MAX_SPINS: usize = 12;

/// Full `2^N`-dimensional pairwise Hamiltonian
///
/// ```text
/// H = -(lambda / N) sum_{i<j} (sx_i sx_j + gamma sy_i sy_j) + h sum_i sz_i
/// ```
///
/// in the computational basis (bit `i` set means spin `i` up). Unlike
/// [`super::build_lmg_hamiltonian`] it keeps the identity shift, so its
/// symmetric-sector levels equal the Dicke levels plus
/// [`super::constant_shift`].
///
/// `sy_i sy_j` is real: flipping two equal bits picks up `-1`, two opposite
/// bits `+1`.
pub fn brute_force_hamiltonian(n: usize, lambda: f64, gamma: f64, h: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::param("n", "particle count must be at least 1"));
    }
    if n > BRUTE_FORCE_MAX_SPINS {
        return Err(Error::param(
            "n",
            format!("brute-force construction limited to N <= {BRUTE_FORCE_MAX_SPINS}, got {n}"),
        ));
    }
    let dim = 1usize << n;
    let coupling = -lambda / n as f64;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        let ups = state.count_ones() as f64;
        a[(state, state)] += h * (2.0 * ups - n as f64);
        for i in 0..n {
            for j in (i + 1)..n {
                let bi = (state >> i) & 1;
                let bj = (state >> j) & 1;
                let flipped = state ^ (1 << i) ^ (1 << j);
                let yy = if bi == bj { -1.0 } else { 1.0 };
                a[(flipped, state)] += coupling * (1.0 + gamma * yy);
            }
        }
    }
    Ok(a)
}
