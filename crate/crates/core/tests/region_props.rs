use cocycle_lab::lyapunov::exact_exponent_base;
use cocycle_lab::regions::{classify, sweep, ParameterPoint, RegionLabel, CSV_HEADER};
use proptest::prelude::*;

fn any_point() -> impl Strategy<Value = ParameterPoint> {
    (1.01..6.0f64, 1.01..6.0f64, 0.05..3.0f64, 0.01..0.99f64)
        .prop_map(|(sigma, eta, alpha, p)| ParameterPoint::new(sigma, eta, alpha, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn labels_are_nonempty_sorted_and_consistent(pt in any_point()) {
        let report = classify(&pt);
        prop_assert!(!report.labels.is_empty());
        let mut sorted = report.labels.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(&sorted, &report.labels);
        // UNRESOLVED stands alone
        if report.has(RegionLabel::Unresolved) {
            prop_assert_eq!(report.labels.len(), 1);
        }
    }

    #[test]
    fn bunched_excludes_discontinuity(pt in any_point()) {
        let report = classify(&pt);
        if report.has(RegionLabel::FiberBunchedContinuity) {
            prop_assert!(report.labels.iter().all(|l| !l.is_discontinuity()));
        }
    }

    #[test]
    fn strict_regime_implies_weak_inequality(pt in any_point()) {
        let report = classify(&pt);
        if report.has(RegionLabel::TheoremADiscontinuity) {
            prop_assert!(report.witnesses.eta2 >= report.witnesses.pow_3a);
            prop_assert!(pt.eta() <= pt.sigma());
        }
        if report.has(RegionLabel::BockerVianaDiscontinuity) {
            // eta^2 > 2^(4a) > 2^(3a) > 2^(2a)
            prop_assert!(report.witnesses.eta2 >= report.witnesses.pow_3a);
            prop_assert!(report.witnesses.eta2 >= report.witnesses.pow_2a);
        }
    }

    #[test]
    fn swapped_orientation_is_remark1_or_locus_only(pt in any_point()) {
        let report = classify(&pt);
        if pt.sigma() < pt.eta() {
            for label in &report.labels {
                prop_assert!(matches!(
                    label,
                    RegionLabel::Remark1Discontinuity
                        | RegionLabel::ZeroExponentLocus
                        | RegionLabel::Unresolved
                ));
            }
        }
    }

    #[test]
    fn locus_label_means_vanishing_exponent(pt in any_point()) {
        let report = classify(&pt);
        if report.has(RegionLabel::ZeroExponentLocus) {
            let lambda = exact_exponent_base(pt.sigma(), pt.eta(), pt.p()).unwrap();
            prop_assert!(lambda <= 1e-9, "exponent {lambda} on locus");
        }
    }

    #[test]
    fn classify_is_deterministic(pt in any_point()) {
        let a = classify(&pt);
        let b = classify(&pt);
        prop_assert_eq!(a.csv_row(), b.csv_row());
        prop_assert_eq!(a.labels, b.labels);
    }
}

#[test]
fn csv_rows_match_header_shape() {
    let rows = sweep(0.5, 0.8, (1.5, 5.0), (1.2, 4.0), 8).unwrap();
    let columns = CSV_HEADER.split(',').count();
    assert_eq!(columns, 11);
    for report in &rows {
        let row = report.csv_row();
        assert_eq!(row.split(',').count(), columns, "row: {row}");
        assert!(!row.contains(' '));
    }
}

#[test]
fn sweep_covers_all_three_zones_along_eta() {
    // fixed sigma = 4, alpha = 0.5, p = 0.8: as eta grows the rows pass
    // from the unresolved segment through the Butler regime (eta^2 >= 2)
    // into the strict regime (eta^2 > 2^1.5), with the eta^2 > 2^2 overlay
    let rows = sweep(0.5, 0.8, (4.0, 4.0), (1.01, 3.99), 60).unwrap();
    assert_eq!(rows.len(), 60);
    for report in &rows {
        let eta2 = report.point.eta() * report.point.eta();
        let butler = eta2 >= 2.0;
        let bn = eta2 >= 2.0f64.powf(1.5);
        let strict = eta2 > 2.0f64.powf(1.5);
        let bv = eta2 > 4.0;
        assert_eq!(report.has(RegionLabel::ButlerDiscontinuity), butler);
        assert_eq!(report.has(RegionLabel::BnDiscontinuity), bn);
        assert_eq!(report.has(RegionLabel::TheoremADiscontinuity), strict);
        assert_eq!(report.has(RegionLabel::BockerVianaDiscontinuity), bv);
        assert_eq!(report.has(RegionLabel::Unresolved), !butler);
    }
    assert!(rows.first().unwrap().has(RegionLabel::Unresolved));
    assert!(rows.last().unwrap().has(RegionLabel::TheoremADiscontinuity));
}
