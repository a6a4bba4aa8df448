#![no_main]

use fpp_cli::parse_alpha;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(z) = parse_alpha(s) {
            assert!(z.iter().all(|x| x.is_finite()));
            assert!(z != [0.0, 0.0]);
        }
    }
});
