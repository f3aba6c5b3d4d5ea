use fqc_core::geometry::BoxRegion;
use fqc_core::structure::{
    random_comb_representation, recover_comb, synthetic_box, RecoveryOptions, RecoveryVerdict, SyntheticCombOptions,
};

#[test]
fn random_combs_round_trip_on_evaluated_weights() {
    let opts = SyntheticCombOptions::default();
    let mut exact = 0;
    for seed in 0..100u64 {
        let rep = random_comb_representation(seed, &opts).unwrap();
        let mu = rep.to_measure(&synthetic_box(&rep, 50.0)).unwrap();
        let cell = 1.0 / rep.lattice.det();
        let spec = rep.spectrum(&BoxRegion::cube(1, cell)).unwrap();
        let out = recover_comb(&mu, &spec, &RecoveryOptions::default()).unwrap();
        let err = out.representation.as_ref().map(|r| r.evaluated_error(&mu).unwrap());
        match out.verdict {
            RecoveryVerdict::Representable => {
                let err = err.unwrap();
                assert!(err < 1e-8, "seed {seed}: representable but error {err:e}");
                exact += 1;
            }
            RecoveryVerdict::NonRepresentable => eprintln!("seed {seed}: flagged {:?}", out.reason),
        }
    }
    assert!(exact >= 99, "{exact}/100");
}
