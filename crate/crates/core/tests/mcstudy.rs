use ctspec_core::mcstudy::{ks_pvalue, ks_statistic, summarize, ReplicateStats, Statistic};
use ctspec_core::FrequencyGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn ks_pvalues_are_uniform_under_the_null() {
    // Exact N(0,1) statistics at 301 frequencies: about 95% should pass.
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let grid = FrequencyGrid::zero_to_three_pi(301).unwrap();
    let replicates: Vec<ReplicateStats> = (0..200)
        .map(|_| {
            (0..grid.len())
                .map(|_| {
                    let mut row = [None; 4];
                    for slot in &mut row {
                        *slot = Some(Distribution::<f64>::sample(&StandardNormal, &mut rng));
                    }
                    row
                })
                .collect()
        })
        .collect();
    let report = summarize(&grid, &replicates, 0.95).unwrap();
    for stat in Statistic::ALL {
        let pct = report.pct_p_above(stat, 0.05);
        assert!((90.0..=99.0).contains(&pct), "{}: {pct}", stat.label());
        let cov = report.median_coverage(stat, 0.0, f64::INFINITY).unwrap();
        assert!(
            (cov - 0.95).abs() < 0.03,
            "{}: coverage {cov}",
            stat.label()
        );
    }
}

#[test]
fn shifted_sample_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..500)
        .map(|_| 0.5 + Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    let d = ks_statistic(&x).unwrap();
    assert!(ks_pvalue(d, x.len()) < 1e-6);
}

#[test]
fn invalid_statistics_are_counted() {
    let grid = FrequencyGrid::new(vec![0.0, 1.0]).unwrap();
    let replicates: Vec<ReplicateStats> = (0..10)
        .map(|i| vec![[Some(i as f64 * 0.1 - 0.5), None, None, None]; 2])
        .collect();
    let report = summarize(&grid, &replicates, 0.95).unwrap();
    let s = report.frequencies[0].stats;
    assert_eq!((s[0].valid_count, s[0].invalid_count), (10, 0));
    assert_eq!((s[3].valid_count, s[3].invalid_count), (0, 10));
    assert_eq!(s[3].p_value, None);
    assert_eq!(s[0].coverage, Some(1.0));
}
