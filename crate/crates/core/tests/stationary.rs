use msnet_core::bounds::sandwich_check;
use msnet_core::dist::{ArrivalSpec, HeavyTailDist};
use msnet_core::estimation::{estimate_tail, stabilize, stationary_dater_sample, HorizonPolicy};
use msnet_core::kernel::{BackwardPath, NetworkKernel};
use msnet_core::models::single::lindley_path;
use msnet_core::models::{Coupling, SingleServer, Tandem};
use msnet_core::rng::RngStream;

fn mm1() -> SingleServer {
    SingleServer::new(HeavyTailDist::exponential(2.0).unwrap(), ArrivalSpec::exponential(1.0).unwrap()).unwrap()
}

#[test]
fn stabilized_value_matches_a_much_longer_window() {
    let k = mm1();
    let policy = HorizonPolicy::default();
    for i in 0..2000 {
        let stream = RngStream::new(17, i);
        let s = stationary_dater_sample(&k, &policy, stream).unwrap();
        assert!(!s.censored);
        let mut path = BackwardPath::new(&k, stream);
        let long = k.maximal_dater(&path.window(8 * s.horizon).unwrap()).unwrap();
        assert_eq!(s.z.to_bits(), long.to_bits(), "replication {i}");
    }
}

#[test]
fn single_server_dater_is_lindley_plus_service() {
    let k = mm1();
    for i in 0..500 {
        let mut path = BackwardPath::new(&k, RngStream::new(3, i));
        let w = path.window(40).unwrap();
        let sigma = w.driving().to_vec();
        let mut tau = w.gaps().to_vec();
        tau.push(0.0);
        let lind = lindley_path(&sigma, &tau).unwrap();
        let z = k.maximal_dater(&w).unwrap();
        let want = lind[sigma.len() - 1] + sigma[sigma.len() - 1];
        assert!((z - want).abs() <= 1e-12 * want.max(1.0), "{z} vs {want}");
    }
}

#[test]
fn mm1_response_tail_matches_closed_form() {
    // M/M/1 with rates 1 and 2: P(Z > x) = exp(-x).
    let est = estimate_tail(&mm1(), &[0.5, 1.0, 2.0, 3.0], 100_000, &HorizonPolicy::default(), 5, None).unwrap();
    assert!(!est.tainted);
    for l in &est.levels {
        let exact = (-l.x).exp();
        let slack = 4.0 * (exact * (1.0 - exact) / 1e5).sqrt();
        assert!((l.p_hat - exact).abs() <= slack, "x={} p={} exact={exact}", l.x, l.p_hat);
    }
}

#[test]
fn sandwich_holds_on_stationary_windows() {
    let k = Tandem::new(
        HeavyTailDist::pareto(2.5, 0.3).unwrap(),
        HeavyTailDist::exponential(3.0).unwrap(),
        Coupling::Independent,
        ArrivalSpec::exponential(1.0).unwrap(),
    )
    .unwrap();
    let policy = HorizonPolicy::default();
    for i in 0..300 {
        let mut path = BackwardPath::new(&k, RngStream::new(11, i));
        let s = stabilize(&mut path, &policy, |w| k.maximal_dater(w)).unwrap();
        // Window [-n, 0] has n + 1 customers; use a block length dividing it.
        let w = path.window(s.horizon - 1).unwrap();
        for l in [1, 4, 16] {
            let r = sandwich_check(&k, &w, l).unwrap();
            assert!(r.passed(), "replication {i}, l={l}: {r:?}");
        }
    }
}

#[test]
fn deterministic_service_never_waits_under_light_load() {
    let k = SingleServer::new(HeavyTailDist::deterministic(0.7).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
        .unwrap();
    let est = estimate_tail(&k, &[0.69, 0.7, 0.71], 1000, &HorizonPolicy::default(), 1, None).unwrap();
    let p: Vec<f64> = est.levels.iter().map(|l| l.p_hat).collect();
    assert_eq!(p, vec![1.0, 0.0, 0.0]);
}
