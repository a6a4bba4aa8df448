#![no_main]

use fpp_core::matrix_core::CMatrix;
use fpp_core::preserver::SuperOp;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(phi) = serde_json::from_slice::<SuperOp>(data) {
        let n = phi.n();
        let image = phi.apply(&CMatrix::identity(n)).unwrap();
        assert_eq!((image.rows(), image.cols()), (n, n));
        let text = serde_json::to_string(&phi).unwrap();
        let back: SuperOp = serde_json::from_str(&text).unwrap();
        assert_eq!(back, phi);
    }
});
