/// Hinge loss on a class-1 probability: `max(0, 1 - z * p)` with `z = -1`
/// for target 0 and `z = +1` for target 1.
///
/// For target 0 the loss never drops below 1, but it still decreases as the
/// probability falls, which is all the search needs. Validity is judged by
/// the 0.5 threshold, never by the loss reaching zero.
pub fn hinge_loss(probability: f64, target_class: u8) -> f64 {
    let z = if target_class == 0 { -1.0 } else { 1.0 };
    (1.0 - z * probability).max(0.0)
}

/// Derivative of [`hinge_loss`] with respect to the probability.
pub(crate) fn hinge_slope(probability: f64, target_class: u8) -> f64 {
    let z = if target_class == 0 { -1.0 } else { 1.0 };
    if 1.0 - z * probability > 0.0 {
        -z
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn substitution_examples() {
        assert!((hinge_loss(0.8, 1) - 0.2).abs() < 1e-15);
        assert!((hinge_loss(0.8, 0) - 1.8).abs() < 1e-15);
        assert_eq!(hinge_loss(1.0, 1), 0.0);
    }

    proptest! {
        #[test]
        fn monotone_in_the_right_direction(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(hinge_loss(hi, 0) >= hinge_loss(lo, 0));
            prop_assert!(hinge_loss(hi, 1) <= hinge_loss(lo, 1));
        }
    }
}
