use gmres_forge_core::analysis::{extract_link, lookahead_bounds, verify_instance, verify_weight_characterization};
use gmres_forge_core::curves::{curve_deviation, g_to_curve, norms_to_g, ResidualDecreaseVector};
use gmres_forge_core::forge::{gps_system, weight_for_curve, Construction, ForgedInstance};
use gmres_forge_core::krylov::{mgmres, GmresOptions, WeightMatrix};
use gmres_forge_core::numkernel::{c, C64};

fn spectrum(n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0 + k as f64 / n as f64, k as f64)).collect()
}

#[test]
fn prescribe_weight_then_analyse() {
    let n = 10;
    let g = norms_to_g(&[1.0, 0.9, 0.8, 0.5, 0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0]).unwrap();
    let g_tilde = ResidualDecreaseVector::new(vec![0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.6]).unwrap();
    let inst = gps_system(&g, &spectrum(n), None, 11).unwrap();
    let wc = weight_for_curve(&inst.a, &inst.b, &g_tilde).unwrap();

    let opts = GmresOptions::full();
    let ti = mgmres(&inst.a, &inst.b, &WeightMatrix::identity(n), &opts).unwrap();
    let tm = mgmres(&inst.a, &inst.b, &wc.weight, &opts).unwrap();
    assert!(curve_deviation(&tm.residual_norms, g_to_curve(&g_tilde).unwrap().values()) < 1e-8);

    let link = extract_link(&ti, &tm).unwrap();
    assert!(lookahead_bounds(&link, &ti, &tm).unwrap().all_satisfied());
    assert!(verify_weight_characterization(&inst.a, &inst.b, &wc.weight, &g_tilde).unwrap().holds);
}

#[test]
fn bundle_survives_json() {
    let g = ResidualDecreaseVector::new(vec![0.3, 0.0, 0.5, 0.2]).unwrap();
    let inst = gps_system(&g, &[c(1.0), c(-2.0), C64::new(0.5, 1.0), C64::new(0.5, -1.0)], None, 3).unwrap();
    let text = serde_json::to_string(&inst).unwrap();
    let back: ForgedInstance = serde_json::from_str(&text).unwrap();
    assert_eq!(back.construction, Construction::GpsSystem);
    let report = verify_instance(&back).unwrap();
    assert!(report.passed, "{report:?}");
}
