use std::f64::consts::PI;

use tpm_core::montecarlo::{reported_quantities, run_replication};
use tpm_core::{
    joint_distribution, replicate, BlochVector, ProtocolConfig, PulseSpec, Quantity, Replication, ShotPlan,
};

fn fig2_cell(k: u32) -> ProtocolConfig {
    ProtocolConfig::pure(
        (2.0f64 / 3.0).sqrt(),
        BlochVector::Z,
        BlochVector::Y,
        PulseSpec::new(f64::from(k) * PI / 5.0, 0.0),
    )
}

fn plan(seed: u64, shots: u64, reps: u32) -> ShotPlan {
    ShotPlan {
        shots_per_setting: shots,
        replications: reps,
        ..ShotPlan::new(seed)
    }
}

fn run_with_threads(threads: usize, cfg: &ProtocolConfig, plan: &ShotPlan) -> Replication {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| replicate(cfg, plan).unwrap())
}

#[test]
fn replication_is_independent_of_thread_count() {
    let cfg = fig2_cell(2);
    let p = plan(99, 40_000, 64);
    let one = run_with_threads(1, &cfg, &p);
    let four = run_with_threads(4, &cfg, &p);
    assert_eq!(one, four);
    assert_eq!(one, replicate(&cfg, &p).unwrap());
}

#[test]
fn different_seeds_and_substreams_differ() {
    let cfg = fig2_cell(1);
    let base = plan(5, 1_000, 4);
    let a = run_replication(&cfg, &base, None, 0).unwrap().0;
    let b = run_replication(&cfg, &ShotPlan { seed: 6, ..base }, None, 0).unwrap().0;
    let c = run_replication(&cfg, &ShotPlan { substream: 1, ..base }, None, 0)
        .unwrap()
        .0;
    let d = run_replication(&cfg, &base, None, 1).unwrap().0;
    assert_ne!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
}

#[test]
fn frequencies_are_unbiased_over_1000_replications() {
    let cfg = fig2_cell(3);
    let exact = joint_distribution(&cfg).unwrap();
    let shots = 40_000u64;
    let p = plan(2024, shots, 1000);
    let estimates: Vec<_> = (0..p.replications)
        .map(|r| run_replication(&cfg, &p, None, r).unwrap().1)
        .collect();
    for q in Quantity::probabilities() {
        let truth = q.of_distribution(&exact).unwrap();
        // conditionals are estimated from the n-row of process (III) only
        let effective = match q {
            Quantity::Conditional { n, .. } => shots as f64 * exact.p_n[n.index()],
            _ => shots as f64,
        };
        let sigma = (truth * (1.0 - truth) / effective / f64::from(p.replications)).sqrt();
        let mean = estimates.iter().map(|e| e.value(q).unwrap()).sum::<f64>() / f64::from(p.replications);
        assert!(
            (mean - truth).abs() < 4.0 * sigma,
            "{}: mean {mean} vs {truth} (4σ = {})",
            q.name(),
            4.0 * sigma
        );
    }
}

#[test]
fn probability_rms_is_within_two_percent_at_40000_shots() {
    for k in 1..=4 {
        let rep = replicate(&fig2_cell(k), &plan(7, 40_000, 100)).unwrap();
        for q in Quantity::probabilities() {
            let r = rep.report(q).unwrap();
            assert!(r.rms_error <= 0.02, "t={k}τ {}: rms {}", q.name(), r.rms_error);
            assert!(r.rms_error >= 0.0);
        }
    }
}

#[test]
fn doubling_shots_shrinks_rms_by_root_two() {
    let cfg = fig2_cell(1);
    let exact = joint_distribution(&cfg).unwrap();
    let small = replicate(&cfg, &plan(11, 20_000, 400)).unwrap();
    let large = replicate(&cfg, &plan(12, 40_000, 400)).unwrap();
    for q in Quantity::probabilities() {
        let truth = q.of_distribution(&exact).unwrap();
        if truth.min(1.0 - truth) < 0.05 {
            continue;
        }
        let ratio = large.report(q).unwrap().rms_error / small.report(q).unwrap().rms_error;
        let expected = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ratio / expected - 1.0).abs() <= 0.2, "{}: ratio {ratio}", q.name());
    }
}

#[test]
fn near_degenerate_cells_show_negative_pointwise_information() {
    let cfg = ProtocolConfig::pure(1.0, BlochVector::Z, BlochVector::Y, PulseSpec::new(PI / 5.0, 0.0));
    let rep = replicate(&cfg, &plan(3, 40_000, 100)).unwrap();
    assert!(rep.replications_with_negative_info > 0);
    let total = rep.report(Quantity::TotalInfo).unwrap();
    assert!(total.point_estimate >= -2.0 * total.rms_error);
}

#[test]
fn gibbs_reports_include_thermodynamic_quantities() {
    let q = BlochVector::X;
    let cfg = ProtocolConfig::gibbs(0.5, BlochVector::Z, q, PulseSpec::new(PI / 2.0, (-q.y).atan2(q.x)));
    let names: Vec<String> = reported_quantities(&cfg).iter().map(Quantity::name).collect();
    assert!(names.contains(&"jarzynski".to_string()));
    let rep = replicate(&cfg, &plan(8, 40_000, 100)).unwrap();
    let j = rep.report(Quantity::Jarzynski).unwrap();
    assert!((j.point_estimate - 1.0).abs() < 0.03);
    assert!(j.rms_error <= 0.03);
    let d = rep.report(Quantity::Dissipation).unwrap();
    assert!((d.point_estimate - 0.5 * 0.5f64.tanh()).abs() < 4.0 * d.sem.max(1e-3));
}

#[test]
fn replicate_rejects_a_single_replication() {
    assert!(replicate(&fig2_cell(1), &plan(1, 100, 1)).is_err());
}
