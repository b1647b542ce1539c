mod common;

use common::{grid_log_el, origin_interior};
use splitel_core::datagen::RngStream;
use splitel_core::dist::{sample_normal, sample_unit};
use splitel_core::meantest::nelm_test;
use splitel_core::{owen_log_el, solve_el, split_pairs, DataMatrix, ElStatus};

#[test]
fn fixed_four_point_instance() {
    let rows = vec![
        vec![1.0, 0.5],
        vec![-0.5, 1.0],
        vec![2.0, -1.0],
        vec![-1.0, -0.5],
    ];
    assert!(origin_interior(&rows));
    let oracle = grid_log_el(&rows);
    let fit = solve_el(&rows).unwrap();
    assert_eq!(fit.status, ElStatus::Converged);
    assert!(
        (fit.log_el - oracle).abs() < 1e-6,
        "{} vs {oracle}",
        fit.log_el
    );
}

#[test]
fn two_point_oracle_agrees_with_closed_form() {
    let rows = vec![vec![-1.0], vec![3.0]];
    let want = -2.0 * 0.75f64.ln();
    assert!((grid_log_el(&rows) - want).abs() < 1e-9);
    assert!((solve_el(&rows).unwrap().log_el - want).abs() < 1e-12);
}

#[test]
fn owen_three_points_in_the_plane() {
    let data = DataMatrix::from_rows(&[[1.0, 0.2], [-0.7, 0.9], [0.1, -1.3]]).unwrap();
    let rows: Vec<Vec<f64>> = data.rows().map(|r| r.to_vec()).collect();
    assert!(origin_interior(&rows));
    let fit = owen_log_el(&data, &[0.0, 0.0]).unwrap();
    assert!(fit.is_finite());
    assert!((fit.log_el - grid_log_el(&rows)).abs() < 1e-6);
}

#[test]
fn nelm_six_by_two_end_to_end() {
    let data = DataMatrix::from_rows(&[
        [1.0, 0.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [2.0, -1.0],
        [0.0, 0.0],
        [-2.0, 1.0],
    ])
    .unwrap();
    let scores = split_pairs(&data, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let rows: Vec<Vec<f64>> = scores.rows().iter().map(|r| r.to_vec()).collect();
    let out = nelm_test(&data, &[0.0, 0.0], 0.05, &[1.0, 1.0]).unwrap();
    if origin_interior(&rows) {
        assert!((out.statistic - grid_log_el(&rows)).abs() < 1e-6);
    } else {
        assert_eq!(out.statistic, f64::INFINITY);
        assert!(out.reject);
    }
}

#[test]
fn random_instances_match_grid_oracle() {
    let mut rng = RngStream::new(20240611, 0);
    let mut checked = 0;
    while checked < 100 {
        let q = 1 + (sample_unit(&mut rng) * 2.0) as usize;
        let m = q + 2 + (sample_unit(&mut rng) * (19 - q) as f64) as usize;
        let shift: Vec<f64> = (0..q).map(|_| 0.6 * sample_normal(&mut rng)).collect();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..q).map(|k| sample_normal(&mut rng) + shift[k]).collect())
            .collect();
        if !origin_interior(&rows) {
            continue;
        }
        let fit = solve_el(&rows).unwrap();
        assert_eq!(fit.status, ElStatus::Converged);
        let oracle = grid_log_el(&rows);
        assert!(
            (fit.log_el - oracle).abs() < 1e-6,
            "instance {checked}: {} vs {oracle} (m={m}, q={q})",
            fit.log_el
        );
        checked += 1;
    }
}

#[test]
fn converged_solutions_satisfy_constraints() {
    let mut rng = RngStream::new(77, 1);
    for _ in 0..200 {
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|_| {
                vec![
                    sample_normal(&mut rng) + 0.3,
                    5.0 * sample_normal(&mut rng) - 1.0,
                ]
            })
            .collect();
        let fit = solve_el(&rows).unwrap();
        if fit.status != ElStatus::Converged {
            assert!(
                !origin_interior(&rows),
                "{:?} {:?} {:?}",
                fit.status,
                fit.beta,
                rows
            );
            continue;
        }
        let max_norm = rows.iter().map(|y| y[0].hypot(y[1])).fold(0.0, f64::max);
        assert!(fit.weights.iter().all(|&p| p > 0.0));
        assert!((fit.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let c0: f64 = fit.weights.iter().zip(&rows).map(|(p, y)| p * y[0]).sum();
        let c1: f64 = fit.weights.iter().zip(&rows).map(|(p, y)| p * y[1]).sum();
        assert!(c0.hypot(c1) <= 1e-8 * (1.0 + max_norm));
        for (p, y) in fit.weights.iter().zip(&rows) {
            let w = 1.0 + fit.beta[0] * y[0] + fit.beta[1] * y[1];
            assert!((p - 1.0 / (15.0 * w)).abs() < 1e-15);
        }
        // gradient and negative-definite Hessian at the optimum
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for y in &rows {
            let w = 1.0 + fit.beta[0] * y[0] + fit.beta[1] * y[1];
            g0 += y[0] / w;
            g1 += y[1] / w;
            h00 += y[0] * y[0] / (w * w);
            h01 += y[0] * y[1] / (w * w);
            h11 += y[1] * y[1] / (w * w);
        }
        assert!(g0.abs().max(g1.abs()) <= 1e-8 * 15.0 * (1.0 + max_norm));
        // Cholesky of the negated Hessian
        assert!(h00 > 0.0 && h11 - h01 * h01 / h00 > 0.0);
    }
}
