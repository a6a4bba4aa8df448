#![no_main]

use fpp_core::rank_one::RankFactorization;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = serde_json::from_slice::<RankFactorization>(data) {
        assert_eq!(f.vs().len(), f.k());
        assert_eq!(f.fs().len(), f.k());
        let c = f.matrix();
        assert_eq!((c.rows(), c.cols()), (f.left().rows(), f.right().cols()));
        let text = serde_json::to_string(&f).unwrap();
        let back: RankFactorization = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }
});
