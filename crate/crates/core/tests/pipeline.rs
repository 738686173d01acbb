use std::sync::OnceLock;

use attractor_mfpt::analysis::{
    fit_all, reproduce_table1, write_records_csv, RegressionResult, SweepSpec, Table1,
};

fn table() -> &'static Table1 {
    static CELL: OnceLock<Table1> = OnceLock::new();
    CELL.get_or_init(|| reproduce_table1(&SweepSpec::default()).unwrap())
}

fn fit(tau12: f64) -> RegressionResult {
    table().rows.iter().find(|r| r.tau12 == tau12).unwrap().fit
}

#[test]
fn default_sweep_gives_one_usable_record_per_point() {
    let spec = SweepSpec::default();
    let t = table();
    assert_eq!(
        t.records.len(),
        spec.tau12_list.len() * spec.ratio_list.len()
    );
    assert!(t.records.iter().all(|r| r.usable() && r.censored == 0));
    assert!(t
        .rows
        .iter()
        .all(|r| r.fit.points_used == spec.ratio_list.len()));
}

#[test]
fn unit_ratio_slope_matches_reference_simulation() {
    // reference simulation 0.64 +- 0.03, theory 0.66
    let f = fit(1.0);
    assert!((f.slope - 0.66).abs() <= 3.0 * f.slope_stderr, "{f:?}");
    assert!(f.r_squared > 0.95);
}

#[test]
fn slope_at_0_9_is_compatible_with_reference_value() {
    let f = fit(0.9);
    let sigma = f.slope_stderr.hypot(0.03);
    assert!((f.slope - 0.45).abs() <= 3.0 * sigma, "{f:?}");
}

#[test]
fn slopes_increase_with_tau12() {
    let slopes: Vec<f64> = table().rows.iter().map(|r| r.fit.slope).collect();
    assert!(slopes.windows(2).all(|w| w[1] > w[0]), "{slopes:?}");
}

#[test]
fn mean_ln_t_increases_with_tau_over_epsilon() {
    let t = table();
    for r in &SweepSpec::default().tau12_list {
        let series: Vec<f64> = t
            .records
            .iter()
            .filter(|x| x.tau12 == *r)
            .map(|x| x.mean_ln_t)
            .collect();
        assert!(series.windows(2).all(|w| w[1] > w[0]), "{r}: {series:?}");
    }
}

#[test]
fn refit_of_records_reproduces_table_fits() {
    let t = table();
    let fits = fit_all(&t.records, false).unwrap();
    for (a, b) in fits.iter().zip(&t.rows) {
        assert_eq!(*a, b.fit);
    }
    let mut buf = Vec::new();
    write_records_csv(&t.records, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap().lines().count(),
        t.records.len() + 1
    );
}
