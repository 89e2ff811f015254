use sfp::rng::{replicate_seed, uniform_for_edge, weight_for_vertex, ReplicateStream};
use sfp::stats::hill_estimator;

/// Kolmogorov-Smirnov distance of a sample from U(0, 1).
fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn edge_uniforms_pass_ks() {
    let mut u = Vec::new();
    for x in 0..400i64 {
        for y in x + 1..x + 251 {
            u.push(uniform_for_edge(7, &[x], &[y]).unwrap());
        }
    }
    let n = u.len() as f64;
    // 1% critical value
    assert!(ks_uniform(u) < 1.63 / n.sqrt());
}

#[test]
fn edge_uniforms_are_symmetric_and_open() {
    for (x, y) in [([0i64, 0], [3i64, -1]), ([5, 5], [5, 6])] {
        let a = uniform_for_edge(1, &x, &y).unwrap();
        assert_eq!(a, uniform_for_edge(1, &y, &x).unwrap());
        assert!(a > 0.0 && a < 1.0);
        assert_ne!(a, uniform_for_edge(2, &x, &y).unwrap());
    }
}

#[test]
fn stream_uniforms_pass_ks() {
    let u: Vec<f64> = (0..20_000u64)
        .flat_map(|i| {
            let mut s = ReplicateStream::new(replicate_seed(3, i));
            [s.next_unit(), s.next_unit(), s.next_unit()]
        })
        .collect();
    let n = u.len() as f64;
    assert!(ks_uniform(u) < 1.63 / n.sqrt());
}

#[test]
fn pareto_weights_have_the_right_tail() {
    let tau = 2.5;
    let n = 1_000_000i64;
    let w: Vec<f64> = (0..n).map(|x| weight_for_vertex(11, &[x], tau).unwrap()).collect();
    assert!(w.iter().all(|&v| v >= 1.0));
    for t in [2.0f64, 10.0, 50.0] {
        let p = t.powf(-(tau - 1.0));
        let got = w.iter().filter(|&&v| v > t).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - p).abs() < 4.0 * se, "t={t}: {got} vs {p}");
    }
    let h = hill_estimator(&w, 10_000).unwrap();
    assert!(h.within(tau - 1.0, 4.0), "{h:?}");
}
