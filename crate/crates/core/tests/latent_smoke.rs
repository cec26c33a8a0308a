//! Scaled-down latent class runs that check invariants only.

use gmtrj_core::latent::{run_latent, LcAlgorithm, LcConfig, LcModel};

#[test]
fn fifty_thousand_sweeps_keep_invariants() {
    let model = LcModel::bundled();
    for alg in [LcAlgorithm::Rj, LcAlgorithm::GmtrjManII] {
        let mut cfg = LcConfig::new(alg, 10);
        cfg.sweeps = 50_000;
        cfg.burn_in = 10_000;
        cfg.seed = 3;
        let out = run_latent(&model, &cfg, "smoke").unwrap();
        out.final_state.validate(model.n(), model.c_max).unwrap();

        let s = &out.summary;
        assert_eq!(s.iterations, 40_000);
        assert_eq!(out.trace.records.len(), 40_000);
        let p = s.probabilities();
        assert_eq!(p.len(), model.c_max);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // One class fits these data badly; two and three dominate.
        assert!(p[0] < 0.01, "{alg}: P(C=1) = {}", p[0]);
        assert!(p[1] + p[2] > 0.25, "{alg}: {p:?}");

        let mut proposed = 0;
        for mv in ["split", "combine", "birth", "death"] {
            let c = s.acceptance[mv];
            assert_eq!(c.proposed, c.accepted + c.rejected + c.degenerate);
            assert!(c.accepted > 0, "{alg}: no accepted {mv}");
            proposed += c.proposed;
        }
        assert_eq!(proposed, 40_000);
        // Split and combine acceptances balance up to the drift of C.
        let (sa, ca) = (
            s.acceptance["split"].accepted as i64,
            s.acceptance["combine"].accepted as i64,
        );
        let (ba, da) = (
            s.acceptance["birth"].accepted as i64,
            s.acceptance["death"].accepted as i64,
        );
        assert!((sa - ca + ba - da).unsigned_abs() < model.c_max as u64);
    }
}
