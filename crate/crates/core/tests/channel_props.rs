use std::f64::consts::PI;

use chansim::channel::{
    assign_cluster_powers, generate_realization, generate_seeded, generate_spatial_lobes, generate_time_clusters,
    path_loss_ci, ClusterSkeleton, Condition, SimulationConfig,
};
use chansim::rng::RandomStream;
use chansim::stats::{ks_two_sample, SampleSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> SimulationConfig {
    SimulationConfig::preset(16.95, Condition::Los).unwrap()
}

/// Independent uniform reference sample for K-S checks.
fn uniform_reference(n: usize, hi: f64, seed: u64) -> SampleSet {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    SampleSet::new("reference", (0..n).map(|_| r.random::<f64>() * hi).collect()).unwrap()
}

#[test]
fn inter_cluster_gap_mean_over_1e5_realizations() {
    let c = cfg();
    let mut gaps = Vec::new();
    for seed in 0..100_000u32 {
        let s = generate_time_clusters(&c, &mut RandomStream::seeded(seed)).unwrap();
        gaps.extend(s.gaps_ns);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((29.7..=30.3).contains(&mean), "mean gap {mean} over {} gaps", gaps.len());
}

#[test]
fn inter_cluster_gap_mean_over_1e6_gaps() {
    let mut rng = RandomStream::seeded(11);
    let mut c = cfg();
    c.max_subpaths = 1;
    let mut gaps = Vec::with_capacity(1_000_000);
    while gaps.len() < 1_000_000 {
        gaps.extend(generate_time_clusters(&c, &mut rng).unwrap().gaps_ns);
    }
    gaps.truncate(1_000_000);
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!((mean - 30.0).abs() <= 0.3, "{mean}");
}

#[test]
fn power_fractions_sum_to_one_over_1e4_skeletons() {
    let c = cfg();
    for seed in 0..10_000u32 {
        let mut rng = RandomStream::seeded(seed);
        let s = generate_time_clusters(&c, &mut rng).unwrap();
        let p = assign_cluster_powers(&s, &c, &mut rng).unwrap();
        assert!((p.total() - 1.0).abs() < 1e-9);
        assert!((p.cluster_fractions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn realization_invariants_over_1e4_seeds() {
    for (f, cond) in [(16.95, Condition::Los), (6.75, Condition::Nlos)] {
        let c = SimulationConfig::preset(f, cond).unwrap();
        for seed in 0..5_000u32 {
            let r = generate_seeded(&c, seed).unwrap();
            assert!(r.n_time_clusters >= 1 && r.n_time_clusters <= c.n_clusters_max);
            assert!((r.total_power() - 1.0).abs() < 1e-9);
            assert_eq!(r.lobes_per_cluster.iter().sum::<usize>(), r.components.len());
            assert_eq!(r.cluster_delays_ns[0], 0.0);
            assert!(r.cluster_delays_ns.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(r.seed, seed);
            for comp in &r.components {
                assert!(comp.cluster_index < r.n_time_clusters);
                assert!(comp.lobe_index < r.lobes.len());
                assert!(comp.delay_ns >= 0.0 && comp.amplitude > 0.0);
                assert!((0.0..2.0 * PI).contains(&comp.phase_rad));
                assert!((0.0..360.0).contains(&comp.aod_deg) && (0.0..360.0).contains(&comp.aoa_deg));
                assert!((0.0..=180.0).contains(&comp.zod_deg) && (0.0..=180.0).contains(&comp.zoa_deg));
            }
            let mut k = 0;
            for (n, m) in r.lobes_per_cluster.iter().enumerate() {
                let d: Vec<f64> = r.components[k..k + m].iter().map(|x| x.delay_ns).collect();
                assert!(d.windows(2).all(|w| w[1] >= w[0]), "cluster {n}");
                k += m;
            }
        }
    }
}

#[test]
fn lobe_center_azimuths_are_uniform() {
    let c = cfg();
    let mut az = Vec::with_capacity(100_000);
    let skeleton = ClusterSkeleton {
        gaps_ns: vec![],
        cluster_delays_ns: vec![0.0],
        subpath_delays_ns: vec![vec![0.0]],
    };
    let mut rng = RandomStream::seeded(5);
    while az.len() < 100_000 {
        for l in generate_spatial_lobes(&skeleton, &c, &mut rng).unwrap().lobes {
            az.push(l.tx_azimuth_deg);
        }
    }
    az.truncate(100_000);
    let r = ks_two_sample(&SampleSet::new("az", az).unwrap(), &uniform_reference(100_000, 360.0, 1)).unwrap();
    assert!(!r.rejects(0.01), "{r:?}");
}

#[test]
fn phases_are_uniform() {
    let c = cfg();
    let mut phases = Vec::with_capacity(100_000);
    let mut seed = 0;
    while phases.len() < 100_000 {
        phases.extend(generate_seeded(&c, seed).unwrap().components.iter().map(|x| x.phase_rad));
        seed += 1;
    }
    phases.truncate(100_000);
    let r = ks_two_sample(&SampleSet::new("phase", phases).unwrap(), &uniform_reference(100_000, 2.0 * PI, 2)).unwrap();
    assert!(!r.rejects(0.01), "{r:?}");
}

#[test]
fn shadow_fading_std() {
    let mut rng = RandomStream::seeded(17);
    let base = path_loss_ci(16.95, 100.0, 3.0, 0.0, &mut rng).unwrap();
    let v: Vec<f64> = (0..100_000)
        .map(|_| path_loss_ci(16.95, 100.0, 3.0, 8.0, &mut rng).unwrap() - base)
        .collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
    assert!((7.9..=8.1).contains(&sd), "{sd}");
}

#[test]
fn generation_consumes_the_callers_stream() {
    let c = cfg();
    let mut a = RandomStream::seeded(3);
    let mut b = RandomStream::seeded(3);
    let r1 = generate_realization(&c, 3, &mut a).unwrap();
    let r2 = generate_realization(&c, 3, &mut b).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(a.words_drawn(), b.words_drawn());
    assert_eq!(a.uniform(), b.uniform());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fractions_normalized_for_random_settings(
        seed in any::<u32>(),
        nc in 1usize..8,
        mu in 1.0f64..100.0,
        decay in 5.0f64..400.0,
        shadow in 0.0f64..10.0,
    ) {
        let mut c = cfg();
        c.n_clusters_max = nc;
        c.mu_s_ns = mu;
        c.cluster_decay_ns = decay;
        c.cluster_shadow_db = shadow;
        let r = generate_seeded(&c, seed).unwrap();
        prop_assert!((r.total_power() - 1.0).abs() < 1e-9);
        prop_assert!(r.n_time_clusters <= nc);
    }
}
