use std::time::Instant;

use qidlab::channels::LinearMap;
use qidlab::lemmas::{lemma_battery, LemmaConfig};
use qidlab::metrics::cb_ratio_check;

#[test]
fn full_battery_has_no_failures() {
    let start = Instant::now();
    let report = lemma_battery(&LemmaConfig::default()).unwrap();
    for s in &report.lemmas {
        assert!(s.trials >= 1000);
        assert_eq!(s.failures, 0, "{s:?}");
        assert_eq!(s.skipped, 0, "{s:?}");
    }
    assert!(report.all_pass);
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn battery_is_reproducible() {
    let cfg = LemmaConfig { trials: 100, ..Default::default() };
    let a = qidlab::report::to_string(&lemma_battery(&cfg).unwrap()).unwrap();
    let b = qidlab::report::to_string(&lemma_battery(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn transposition_ratio_is_two() {
    let r = cb_ratio_check(&LinearMap::transpose(2), 2, 16, 3).unwrap();
    let ratio = r.ratio.unwrap();
    assert!((1.9..=2.0 + 1e-3).contains(&ratio), "{r:?}");
    assert!((r.norm_1 - 1.0).abs() < 1e-3 && (r.norm_t - 2.0).abs() < 1e-3);
    let zero = cb_ratio_check(&LinearMap::zero(2, 2), 2, 4, 3).unwrap();
    assert_eq!((zero.norm_t, zero.norm_1), (0.0, 0.0));
}
