//! Closed-form spectrum of the isotropic (`gamma = 1`, `lambda = 1`) model.
//!
//! For `gamma = 1` the Hamiltonian is diagonal,
//! `E(m) = (2/N)(m + Nh/2)^2 - (N h^2/2 + N/2 + 1)`, and the levels are
//! labelled by energy order `l = 0, 1, ...`.
//!
//! * `h > 1`: the minimum sits beyond the edge of the `m` range, so level `l`
//!   is `m = -N/2 + l` and
//!   `eps_l = (2/N)(N/2 - l - Nh/2)^2 - (N h^2/2 + N/2 + 1)`.
//! * `0 <= h < 1`: the minimum sits at `m0 = -[Nh/2]` and levels alternate
//!   to either side of it. With `d = Nh/2 - [Nh/2]`, even levels are
//!   `eps_l = (2/N)([Nh/2] - l/2 - Nh/2)^2 - (...)` (for `d >= 0`), odd levels
//!   sit `1 - 2|d|` closer. Once one side of the `m` range is exhausted the
//!   remaining levels continue on the other side.
//!
//! `[x]` rounds half away from zero. Half-integer `Nh/2` only occurs where
//! the two lowest levels are degenerate, so either rounding gives the same
//! spectrum.

use crate::error::{Error, Result};

fn round_half_away(x: f64) -> f64 {
    x.round()
}

fn validate(n: usize, h: f64, l: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "particle count must be at least 1"));
    }
    if l > n {
        return Err(Error::param("l", format!("level {l} exceeds N = {n}")));
    }
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::param("h", format!("must be finite and >= 0, got {h}")));
    }
    if h == 1.0 {
        return Err(Error::CriticalField);
    }
    Ok(())
}

/// Distance `|m + Nh/2|` of level `l` from the continuous minimum.
fn offset(n: usize, h: f64, l: usize) -> f64 {
    let nf = n as f64;
    let x = nf * h / 2.0;
    if h > 1.0 {
        return (nf / 2.0 - l as f64 - x).abs();
    }
    // k = m + N/2 in 0..=N; values k + y with y = x - N/2.
    let y = x - nf / 2.0;
    let k0 = if n.is_multiple_of(2) {
        nf / 2.0 - round_half_away(x)
    } else {
        round_half_away(-y)
    }
    .clamp(0.0, nf);
    let delta = k0 + y;
    if l == 0 {
        return delta.abs();
    }
    let below = k0 as usize;
    let above = n - below;
    // Side whose first step lands closer to the minimum.
    let (cap_near, cap_far) = if delta >= 0.0 { (below, above) } else { (above, below) };
    let d = delta.abs();
    let paired = cap_near.min(cap_far);
    if l <= 2 * paired {
        let t = l.div_ceil(2) as f64;
        if l % 2 == 1 {
            t - d
        } else {
            t + d
        }
    } else {
        let t = (paired + (l - 2 * paired)) as f64;
        if cap_near > cap_far {
            t - d
        } else {
            t + d
        }
    }
}

/// Energy `eps_l` of the `l`-th isotropic level (energy order, `l = 0` the
/// ground state), without the identity shift.
pub fn isotropic_energy(n: usize, h: f64, l: usize) -> Result<f64> {
    validate(n, h, l)?;
    let nf = n as f64;
    let s = offset(n, h, l);
    Ok(2.0 / nf * s * s - (nf * h * h / 2.0 + nf / 2.0 + 1.0))
}

/// Excitation gap `eps_l - eps_0`.
///
/// For `h > 1` this is `2l(h - 1) + 2l^2/N`; for `h < 1` the first gap
/// `(2/N)(1 - 2|d|)` closes whenever `Nh/2` is half-integer, i.e. at
/// `h = (2p + 1)/N`.
pub fn isotropic_gap(n: usize, h: f64, l: usize) -> Result<f64> {
    Ok(isotropic_energy(n, h, l)? - isotropic_energy(n, h, 0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::{build_lmg_hamiltonian, LmgParams};

    /// Oracle: sort the exact diagonal of the gamma = 1 Hamiltonian.
    fn sorted_diagonal(n: usize, h: f64) -> Vec<f64> {
        let p = LmgParams::new(n, 1.0, 1.0, h).unwrap();
        let m = build_lmg_hamiltonian(&p).unwrap();
        let mut d: Vec<f64> = (0..=n).map(|i| m.get(i, i).re).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn matches_sorted_diagonal_everywhere() {
        for n in [1, 2, 3, 7, 10, 11, 50, 100] {
            for h in [0.0, 0.013, 0.1, 0.37, 0.5, 0.77, 0.99, 1.01, 1.5, 3.0] {
                let exact = sorted_diagonal(n, h);
                for (l, e) in exact.iter().enumerate() {
                    let got = isotropic_energy(n, h, l).unwrap();
                    assert!((got - e).abs() < 1e-10, "n={n} h={h} l={l}: {got} vs {e}");
                }
            }
        }
    }

    #[test]
    fn even_levels_follow_rounded_closed_form() {
        let n = 100;
        let nf = n as f64;
        for h in [0.1, 0.234, 0.5, 0.81] {
            let x = nf * h / 2.0;
            let r = x.round();
            if x - r < 0.0 {
                continue;
            }
            for l in (0..20).step_by(2) {
                let lf = l as f64;
                let closed = 2.0 / nf * (r - lf / 2.0 - x).powi(2) - (nf * h * h / 2.0 + nf / 2.0 + 1.0);
                assert!((isotropic_energy(n, h, l).unwrap() - closed).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gap_examples() {
        for h in [0.2, 0.6, 1.5] {
            assert_eq!(isotropic_gap(100, h, 0).unwrap(), 0.0);
        }
        // 2l(h-1) + 2l^2/N at N=100, l=1, h=1.5
        assert!((isotropic_gap(100, 1.5, 1).unwrap() - 1.02).abs() < 1e-12);
        for l in 1..6 {
            let lf = l as f64;
            let expect = 2.0 * lf * 0.7 + 2.0 * lf * lf / 100.0;
            assert!((isotropic_gap(100, 1.7, l).unwrap() - expect).abs() < 1e-10);
        }
        // first gap closes at h = (2p + 1)/N
        for p in 0..5 {
            let h = (2 * p + 1) as f64 / 100.0;
            assert!(isotropic_gap(100, h, 1).unwrap().abs() < 1e-12, "p={p}");
        }
        assert!(isotropic_gap(100, 0.02, 1).unwrap() > 0.01);
    }

    #[test]
    fn rejects_critical_field_and_bad_level() {
        assert_eq!(isotropic_energy(10, 1.0, 0), Err(Error::CriticalField));
        assert!(isotropic_energy(10, 0.5, 11).is_err());
        assert!(isotropic_energy(10, -0.5, 0).is_err());
    }
}
