#![no_main]

use fpp_core::matrix_core::Tolerances;
use fpp_core::zp_factory::FactorizationCertificate;
use libfuzzer_sys::fuzz_target;

// Auditing arbitrary certificates must report defects, never panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(cert) = serde_json::from_slice::<FactorizationCertificate>(data) {
        let _ = cert.audit(&Tolerances::default());
    }
});
