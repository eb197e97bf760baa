#![no_main]

use libfuzzer_sys::fuzz_target;
use nitsche_core::experiment::parse_lambda_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lambdas) = parse_lambda_list(text) {
        assert!(!lambdas.is_empty());
        assert!(lambdas.iter().all(|&l| l > 0.0 && l.is_finite()));
    }
});
