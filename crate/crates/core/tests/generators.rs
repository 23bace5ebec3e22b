use qap_lon::generate::{generate, GeneratorConfig};
use qap_lon::ClassTag;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn upper_entries(m: &qap_lon::qap::Matrix, n: usize, out: &mut Vec<i64>) {
    for i in 0..n {
        for j in i + 1..n {
            out.push(m.get(i, j));
        }
    }
}

#[test]
fn uniform_entries_pass_chi_square() {
    let n = 50;
    let mut values = Vec::new();
    let mut seed = 0;
    while values.len() < 100_000 {
        let inst = generate(&GeneratorConfig::new(ClassTag::Uniform, n, seed)).unwrap();
        upper_entries(&inst.a, n, &mut values);
        upper_entries(&inst.b, n, &mut values);
        seed += 1;
    }
    values.truncate(100_000);
    let mut hist = [0u64; 100];
    for v in &values {
        assert!((1..=100).contains(v));
        hist[(*v - 1) as usize] += 1;
    }
    let expected = values.len() as f64 / 100.0;
    let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new(99.0).unwrap().inverse_cdf(0.999);
    assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
}

fn real_like_flows(count: usize) -> Vec<i64> {
    let n = 40;
    let mut flows = Vec::new();
    let mut seed = 0;
    while flows.len() < count {
        let inst = generate(&GeneratorConfig::new(ClassTag::RealLike, n, seed)).unwrap();
        upper_entries(&inst.b, n, &mut flows);
        seed += 1;
    }
    flows.truncate(count);
    flows
}

#[test]
fn real_like_flows_are_log_uniform() {
    let flows = real_like_flows(100_000);
    let frac = |t: i64| flows.iter().filter(|&&f| f <= t).count() as f64 / flows.len() as f64;
    // round(10^(2r)) <= t  <=>  r < log10(t + 0.5) / 2
    let p10 = frac(10);
    assert!((p10 - 0.51).abs() <= 0.01, "P(b <= 10) = {p10}");
    for t in [1, 2, 5, 20, 50, 99] {
        let want = ((t as f64 + 0.5).log10() / 2.0).min(1.0);
        assert!((frac(t) - want).abs() < 0.01, "t = {t}: {} vs {want}", frac(t));
    }
    assert!(flows.iter().all(|&f| (1..=100).contains(&f)));
}

#[test]
fn real_like_distances_are_symmetric_with_zero_diagonal() {
    let inst = generate(&GeneratorConfig::new(ClassTag::RealLike, 12, 3)).unwrap();
    assert!(inst.a.is_symmetric() && inst.b.is_symmetric());
    assert!(inst.a.has_zero_diagonal() && inst.b.has_zero_diagonal());
    // triangle inequality holds up to rounding of each side
    for i in 0..12 {
        for j in 0..12 {
            for k in 0..12 {
                assert!(inst.a.get(i, k) <= inst.a.get(i, j) + inst.a.get(j, k) + 1);
            }
        }
    }
}
