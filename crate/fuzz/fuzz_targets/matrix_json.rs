#![no_main]

use fpp_core::matrix_core::CMatrix;
use libfuzzer_sys::fuzz_target;

// Accepted matrices are finite, correctly shaped and survive a round trip.
fuzz_target!(|data: &[u8]| {
    if let Ok(m) = serde_json::from_slice::<CMatrix>(data) {
        assert!(m.data().iter().all(|z| z.is_finite()));
        assert_eq!(m.data().len(), m.rows() * m.cols());
        let text = serde_json::to_string(&m).unwrap();
        let back: CMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
});
