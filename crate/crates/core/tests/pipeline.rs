use num_complex::Complex64;
use proptest::prelude::*;

use rankone::io::{read_trajectory_csv, write_trajectory_csv};
use rankone::resolvent::ResolventInput;
use rankone::rmt::{Instance, LightInstance, RunConfig};
use rankone::trajectory::{
    integrate_ode, limit_points, match_unordered, oracle_eigen, trace_trajectories, TimeGrid, TrackOptions,
};

#[test]
fn light_and_full_instances_agree() {
    let config = RunConfig::gue(30, 17).unwrap();
    let full = Instance::sample(&config).unwrap();
    let light = LightInstance::sample(&config).unwrap();
    let rin = full.spectral.resolvent_input();
    for (a, b) in rin.mus.iter().zip(&light.input.mus) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in rin.weights.iter().zip(&light.input.weights) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn continuation_matches_ode_and_oracle() {
    let inst = LightInstance::sample(&RunConfig::gue(12, 5).unwrap()).unwrap();
    let grid = TimeGrid::uniform(2.5, 50).unwrap();
    let cont = trace_trajectories(&inst.input, &grid, &TrackOptions::default()).unwrap();
    let ode = integrate_ode(&inst.input, &grid, 1e-3).unwrap();
    for (a, b) in cont.lambdas.iter().zip(&ode.lambdas) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() < 1e-6, "{x} vs {y}");
        }
    }
    let exact = oracle_eigen(&inst.input.mus, &inst.input.weights, 2.5).unwrap();
    assert!(match_unordered(cont.last(), &exact).max_deviation < 1e-9);
}

#[test]
fn bulk_settles_on_limit_points() {
    let inst = Instance::sample(&RunConfig::gue(10, 2).unwrap()).unwrap();
    let rin = inst.spectral.resolvent_input();
    let grid = TimeGrid::uniform_then_geometric(0.01, 3.0, 1.05, 1e3).unwrap();
    let b = trace_trajectories(&rin, &grid, &TrackOptions::default()).unwrap();
    let (outlier, _) = b.outlier_label();
    let mut bulk: Vec<f64> = b
        .last()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != outlier)
        .map(|(_, z)| z.re)
        .collect();
    bulk.sort_by(f64::total_cmp);
    let limits = limit_points(&inst.h, &inst.v).unwrap();
    for (x, l) in bulk.iter().zip(&limits.values) {
        assert!((x - l).abs() < 5e-3, "{x} vs {l}");
    }
    assert!((b.last()[outlier].im - 1e3).abs() < 1.0);
}

#[test]
fn csv_round_trip_is_exact() {
    let inst = LightInstance::sample(&RunConfig::gue(7, 8).unwrap()).unwrap();
    let grid = TimeGrid::uniform(1.0, 20).unwrap();
    let b = trace_trajectories(&inst.input, &grid, &TrackOptions::default()).unwrap();
    let mut buf = vec![];
    write_trajectory_csv(&mut buf, &b).unwrap();
    let back = read_trajectory_csv(buf.as_slice()).unwrap();
    assert_eq!(back.lambdas, b.lambdas);
    assert_eq!(back.grid.points(), grid.points());
}

fn spectrum(n: usize) -> impl Strategy<Value = ResolventInput> {
    (
        prop::collection::vec(0.05f64..1.0, n),
        prop::collection::vec(0.01f64..1.0, n),
    )
        .prop_map(|(gaps, w)| {
            let mut mus = Vec::with_capacity(gaps.len());
            let mut x = -1.0;
            for g in gaps {
                x += g;
                mus.push(x);
            }
            let s: f64 = w.iter().sum();
            ResolventInput::new(mus, w.iter().map(|c| c / s).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_keeps_trace_and_upper_half_plane(rin in (2usize..9).prop_flat_map(spectrum), t_max in 0.5f64..4.0) {
        let grid = TimeGrid::uniform(t_max, 40).unwrap();
        let b = trace_trajectories(&rin, &grid, &TrackOptions::default()).unwrap();
        prop_assert!(b.trace_defect() < 1e-9);
        for (t, row) in grid.points().iter().zip(&b.lambdas) {
            let im: f64 = row.iter().map(|z| z.im).sum();
            prop_assert!((im - t).abs() < 1e-9);
            for z in row {
                prop_assert!(z.im >= -1e-12 && z.im <= t + 1e-12);
            }
        }
        let first: Vec<Complex64> = rin.mus.iter().map(|&m| Complex64::new(m, 0.0)).collect();
        prop_assert_eq!(&b.lambdas[0], &first);
    }
}
