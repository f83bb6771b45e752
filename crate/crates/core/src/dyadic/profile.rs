//! The ring profile behind the dyadic blocks.
//!
//! `chi` is a smooth radial cutoff equal to 1 on `[0, 3/4]` and 0 on
//! `[4/3, ∞)`; the ring function is `phi(r) = chi(r/2) - chi(r)`, which is
//! supported in `[3/4, 8/3]` and telescopes to a partition of unity.

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

fn bump_tail(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step rising from 0 at `t <= 0` to 1 at `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_tail(t);
    let b = bump_tail(1.0 - t);
    a / (a + b)
}

/// Low-pass cutoff `chi(r)`.
pub fn chi(r: f64) -> f64 {
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        1.0 - smooth_step((r - INNER) / (OUTER - INNER))
    }
}

/// Ring function `phi(r)`, zero outside `[3/4, 8/3]`.
pub fn phi(r: f64) -> f64 {
    if r <= INNER || r >= 2.0 * OUTER {
        0.0
    } else {
        chi(0.5 * r) - chi(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_and_range() {
        for i in 0..4000 {
            let r = i as f64 * 1e-3;
            let p = phi(r);
            assert!((0.0..=1.0).contains(&p));
            if r <= 0.75 || r >= 8.0 / 3.0 {
                assert_eq!(p, 0.0);
            }
        }
        assert_eq!(phi(1.4), 1.0);
        assert_eq!(phi(1.5), 1.0);
        assert!(phi(1.0) > 0.0 && phi(1.0) < 1.0);
    }

    #[test]
    fn telescoping_partition() {
        for i in 1..2000 {
            let r = 0.05 * i as f64;
            let s: f64 = (-10..12).map(|q| phi(r * 2f64.powi(-q))).sum();
            assert!((s - 1.0).abs() < 1e-14, "r={r} sum={s}");
        }
    }
}
