//! Bernoulli Kullback-Leibler divergence and its lower bounds.

/// `D(p || q) = p ln(p/q) + (1-p) ln((1-p)/(1-q))` between Bernoulli
/// distributions, with the `0 ln 0 = 0` convention.
///
/// Degenerate reference: `q` in `{0, 1}` with `p != q` returns the
/// `+infinity` sentinel (so `exp(-D)` correctly evaluates to 0 in bounds).
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    if q <= 0.0 || q >= 1.0 {
        return f64::INFINITY;
    }
    let left = if p > 0.0 { p * (p / q).ln() } else { 0.0 };
    let right = if p < 1.0 {
        (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()
    } else {
        0.0
    };
    left + right
}

/// First-order lower bound: `D(p || q) >= p ln(p/q) + q - p`.
pub fn kl_lower_bound_ratio(p: f64, q: f64) -> f64 {
    let left = if p > 0.0 { p * (p / q).ln() } else { 0.0 };
    left + q - p
}

/// Boundedness lower bound for `p` in `[gamma, 1 - gamma]`:
/// `D(p || q) >= -ln(2 (q (1-q))^gamma)`.
pub fn kl_lower_bound_gamma(q: f64, gamma: f64) -> f64 {
    -(2.0 * (q * (1.0 - q)).powf(gamma)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::RngCore;

    fn uniform01(rng: &mut crate::rng::TaskRng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    #[test]
    fn identical_distributions_have_zero_divergence() {
        assert_eq!(kl_bernoulli(0.3, 0.3), 0.0);
        assert_eq!(kl_bernoulli(0.0, 0.0), 0.0);
        assert_eq!(kl_bernoulli(1.0, 1.0), 0.0);
    }

    /// Hand evaluation of the closed formula:
    /// `D(0.5 || 0.25) = 0.5 ln 2 + 0.5 ln(2/3)`.
    #[test]
    fn matches_the_hand_computed_value() {
        let expected = 0.14384103622589046;
        assert!((kl_bernoulli(0.5, 0.25) - expected).abs() < 1e-15);
    }

    #[test]
    fn degenerate_reference_gives_the_infinity_sentinel() {
        assert_eq!(kl_bernoulli(0.5, 0.0), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.5, 1.0), f64::INFINITY);
        assert_eq!((-kl_bernoulli(0.3, 1.0)).exp(), 0.0);
    }

    #[test]
    fn nonnegative_and_zero_only_at_equality() {
        let mut rng = crate::rng::RngStream::from_seed(14).rng();
        for _ in 0..300 {
            let p = uniform01(&mut rng);
            let q = 0.999 * uniform01(&mut rng) + 0.0005;
            let d = kl_bernoulli(p, q);
            assert!(d >= 0.0);
            if (p - q).abs() > 1e-9 {
                assert!(d > 0.0, "D({p}||{q}) = {d}");
            }
        }
    }

    #[test]
    fn ratio_lower_bound_holds_on_random_pairs() {
        let mut rng = crate::rng::RngStream::from_seed(15).rng();
        for _ in 0..100 {
            let p = uniform01(&mut rng);
            let q = 0.998 * uniform01(&mut rng) + 0.001;
            assert!(kl_bernoulli(p, q) >= kl_lower_bound_ratio(p, q) - 1e-12);
        }
    }

    #[test]
    fn gamma_lower_bound_holds_inside_the_band() {
        let mut rng = crate::rng::RngStream::from_seed(16).rng();
        for _ in 0..200 {
            let gamma = 0.5 * uniform01(&mut rng).max(1e-3);
            let p = gamma + (1.0 - 2.0 * gamma) * uniform01(&mut rng);
            let q = 0.998 * uniform01(&mut rng) + 0.001;
            assert!(
                kl_bernoulli(p, q) >= kl_lower_bound_gamma(q, gamma) - 1e-12,
                "p={p} q={q} gamma={gamma}"
            );
        }
    }
}
