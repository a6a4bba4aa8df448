#![no_main]

use fpp_core::matrix_core::Tolerances;
use fpp_core::pointwise::PointwiseElement;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(e) = serde_json::from_slice::<PointwiseElement>(data) {
        assert!(e.m() >= 1);
        let tol = Tolerances::default();
        if let Ok(inv) = e.inverse(&tol) {
            assert_eq!(inv.m(), e.m());
        }
        let text = serde_json::to_string(&e).unwrap();
        let back: PointwiseElement = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }
});
