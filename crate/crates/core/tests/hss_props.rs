#[path = "support/hss_props.rs"]
mod support;

use proptest::prelude::*;
use support::Case;

fn case() -> impl Strategy<Value = Case> {
    (2usize..=192, 4usize..=32, any::<u64>()).prop_map(|(n, leaf_max, seed)| Case { n, leaf_max, seed })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip(c in case()) {
        support::round_trip(c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn inversion_residual(c in case()) {
        support::inversion_residual(c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn update_consistency(c in case()) {
        support::update_consistency(c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn embed_and_scale_keep_ranks(c in case()) {
        support::embed_scale_ranks(c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn stencil_addition(c in case()) {
        support::stencil_addition(c).map_err(TestCaseError::fail)?;
    }
}
