use std::collections::BTreeMap;

use jacobi_isp::experiments::{
    column_ratios, criterion_names, lemma_samples, run_criterion, run_roundtrip_suite, run_stability_table,
    write_stability_csv, SuiteConfig, DEFAULT_EPSILONS,
};
use jacobi_isp::solvers::GridConfig;

/// ∫ λ⁴ e^{−λ²/2}/(1 − e^{−λ²})² dλ / ∫ λ⁴ e^{−λ²/2} dλ, mpmath at 30 digits
const R_F_CLOSED_FORM: f64 = 1.396_552_379_893_499_4;

#[test]
fn stability_table_values() {
    let rows = run_stability_table(&DEFAULT_EPSILONS).unwrap();
    assert_eq!(rows.len(), 3);
    let r = &rows[0];
    // ‖ψ‖²_𝓗 = 4/√(2π) ∫ λ⁴ e^{−λ²/2}/8 dλ = 3/4
    assert!((r.norm_psi_diff_sq - 0.75).abs() < 1e-12);
    // sup over t of ‖u(t)‖²_𝓗 is attained at t = T, where u = ψ
    assert!((r.norm_u_diff_sq - r.norm_psi_diff_sq).abs() < 1e-14);
    assert!((r.norm_f_diff_sq / r.norm_psi_diff_sq - R_F_CLOSED_FORM).abs() < 1e-9);
    assert!((r.norm_psi_appendix - 30.0).abs() < 1e-9);
    assert!((r.norm_u_appendix - 0.75).abs() < 1e-12);
    assert!((r.norm_f_appendix - r.norm_f_diff_sq).abs() < 1e-12);
    for (row, want) in rows[1..].iter().zip([0.04, 0.0004]) {
        for ratio in column_ratios(row, r) {
            assert!((ratio / want - 1.0).abs() <= 1e-9);
        }
    }
    for row in &rows {
        assert!(row.bounds.strict);
        assert!(row.report.r_u <= 1.0 + 1e-9);
        // the measured stability constant for f exceeds 1 by the closed form
        assert!((row.report.r_f - R_F_CLOSED_FORM).abs() < 1e-9);
    }
}

#[test]
fn stability_csv_has_header_and_rows() {
    let rows = run_stability_table(&[1.0, 0.5]).unwrap();
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("t.csv");
    write_stability_csv(&p, &rows).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("epsilon,norm_psi_diff_sq,norm_u_diff_sq,norm_f_diff_sq"));
    assert!(run_stability_table(&[0.0]).is_err());
}

#[test]
fn halved_grids_stay_under_loose_tolerance() {
    let halved = GridConfig { n_x: 256, n_lambda: 256, ..GridConfig::default() };
    let names = ["plancherel", "steady_state", "table_ratios"];
    let mut tolerances = BTreeMap::new();
    tolerances.insert("plancherel".to_string(), 1e-3);
    tolerances.insert("steady_state".to_string(), 1e-10);
    tolerances.insert("table_ratios".to_string(), 1e-2);
    let cfg = SuiteConfig {
        grids: halved,
        tolerances,
        criteria: Some(names.iter().map(|s| s.to_string()).collect()),
        enforce_runtime: false,
        ..SuiteConfig::default()
    };
    let report = run_roundtrip_suite(&cfg).unwrap();
    assert_eq!(report.criteria.len(), 3);
    assert!(report.all_passed, "{}", report.to_json());
    let full = run_criterion("plancherel", &SuiteConfig::default()).unwrap();
    assert!(report.criteria[0].measured >= 0.5 * full.measured);
}

#[test]
fn suite_selection_by_number_and_report_json() {
    let cfg = SuiteConfig { criteria: Some(vec!["2".into(), "cosine".into()]), ..SuiteConfig::default() };
    let report = run_roundtrip_suite(&cfg).unwrap();
    let ids: Vec<u32> = report.criteria.iter().map(|c| c.id).collect();
    assert_eq!(ids, vec![1, 2]);
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["criteria"][1]["name"], "c_function");
    assert!(json["grids"]["n_x"].as_u64().unwrap() == 512);
    assert_eq!(criterion_names().len(), 11);
}

#[test]
fn lemma_samples_are_reproducible() {
    let a = lemma_samples(50, 7);
    assert_eq!(a, lemma_samples(50, 7));
    assert_ne!(a, lemma_samples(50, 8));
    for (g, lb, t, t_final) in a {
        assert!(g > 0.0 && g <= 1.0 && lb > 0.0 && t > 0.0 && t < t_final);
    }
}
