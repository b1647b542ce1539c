mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use splitel_core::meantest::{bs_statistics, bs_test, hotelling_test, nelm_test, oelm_test};
use splitel_core::{
    cov_summary, sample_covariance, solve_el, split_pairs, DataMatrix, ElStatus, OelmCalibration,
};

fn data_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = DataMatrix> {
    (2..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
        prop::collection::vec(-10.0f64..10.0, n * d)
            .prop_map(move |v| DataMatrix::new(n, d, v).unwrap())
    })
}

fn rows_strategy(m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    m.prop_flat_map(|m| prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), m))
}

fn permute<T: Clone>(v: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&i| v[i].clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_pairs_is_reproducible(data in data_strategy(12, 5), c in prop::collection::vec(0.1f64..2.0, 5)) {
        let d = data.d();
        let mu0 = vec![0.5; d];
        let dir = &c[..d];
        let s = split_pairs(&data, &mu0, dir).unwrap();
        prop_assert_eq!(s.m(), data.n() / 2);
        for (i, r) in s.rows().iter().enumerate() {
            let (a, b) = (data.row(i), data.row(i + s.m()));
            let u: f64 = (0..d).map(|k| (a[k] - mu0[k]) * (b[k] - mu0[k])).sum();
            let v: f64 = (0..d).map(|k| dir[k] * (a[k] + b[k] - 2.0 * mu0[k])).sum();
            let scale_u: f64 = (0..d).map(|k| ((a[k] - mu0[k]) * (b[k] - mu0[k])).abs()).sum();
            let scale_v: f64 = (0..d).map(|k| dir[k] * (a[k].abs() + b[k].abs() + 2.0 * mu0[k].abs())).sum();
            prop_assert!((r[0] - u).abs() <= 1e-13 * (1.0 + scale_u));
            prop_assert!((r[1] - v).abs() <= 1e-13 * (1.0 + scale_v));
        }
        prop_assert_eq!(split_pairs(&data, &mu0, dir).unwrap(), s);
    }

    #[test]
    fn cov_summary_eigen_identities(d in 1usize..8, entries in prop::collection::vec(-2.0f64..2.0, 64)) {
        let a = DMatrix::from_fn(d, d, |i, j| entries[i * 8 + j]);
        let sigma = &a * a.transpose();
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        let s = cov_summary(&sigma).unwrap().with_eigenvalues();
        let ev = s.eigenvalues.clone().unwrap();
        let sq: f64 = ev.iter().map(|l| l * l).sum();
        prop_assert!((s.pi11 - sq).abs() <= 1e-8 * s.pi11.max(1e-300));
        let lo = ev[0] - 1e-9 * ev[d - 1].abs();
        let hi = ev[d - 1] + 1e-9 * ev[d - 1].abs();
        let avg = s.pi22 / (2.0 * d as f64);
        prop_assert!(avg >= lo && avg <= hi);
        // independent eigen route
        let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| sigma[(i, j)]).collect()).collect();
        let jac = common::jacobi_eigenvalues(&rows);
        for (x, y) in jac.iter().zip(&ev) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + ev[d - 1].abs()));
        }
    }

    #[test]
    fn sample_covariance_row_permutation(data in data_strategy(15, 4), seed in any::<u64>()) {
        let n = data.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let rows: Vec<Vec<f64>> = data.rows().map(|r| r.to_vec()).collect();
        let shuffled = DataMatrix::from_rows(&permute(&rows, &perm)).unwrap();
        let a = sample_covariance(&data).unwrap();
        let b = sample_covariance(&shuffled).unwrap();
        prop_assert!((a - b).amax() <= 1e-10);
    }

    #[test]
    fn el_affine_and_permutation_invariance(
        rows in rows_strategy(4..=20),
        a in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let det = a[0] * a[3] - a[1] * a[2];
        prop_assume!(det.abs() > 0.2);
        let base = solve_el(&rows).unwrap();
        let mapped: Vec<Vec<f64>> = rows
            .iter()
            .map(|y| vec![a[0] * y[0] + a[1] * y[1], a[2] * y[0] + a[3] * y[1]])
            .collect();
        let other = solve_el(&mapped).unwrap();
        if base.is_finite() {
            prop_assert!(other.is_finite());
            prop_assert!((base.log_el - other.log_el).abs() <= 1e-8 * (1.0 + base.log_el));
        } else {
            prop_assert!(!other.is_finite());
        }
        let mut reversed = rows.clone();
        reversed.reverse();
        let rev = solve_el(&reversed).unwrap();
        prop_assert_eq!(rev.status == ElStatus::Converged, base.status == ElStatus::Converged);
        if base.is_finite() {
            prop_assert!((rev.log_el - base.log_el).abs() <= 1e-9 * (1.0 + base.log_el));
        }
    }

    #[test]
    fn el_monotone_hull_repair(rows in rows_strategy(3..=12)) {
        let fit = solve_el(&rows).unwrap();
        prop_assert!(fit.log_el >= 0.0);
        if fit.status == ElStatus::HullExterior {
            let s0: f64 = rows.iter().map(|y| y[0]).sum();
            let s1: f64 = rows.iter().map(|y| y[1]).sum();
            let mut fixed = rows.clone();
            fixed.push(vec![-s0, -s1]);
            let repaired = solve_el(&fixed).unwrap();
            prop_assert!(repaired.is_finite());
        }
    }

    #[test]
    fn bs_identity(data in data_strategy(30, 10), mu in -3.0f64..3.0) {
        let mu0 = vec![mu; data.d()];
        let (m, f) = bs_statistics(&data, &mu0).unwrap();
        prop_assert!((m - f).abs() <= 1e-9 * (1.0 + m.abs()));
    }

    #[test]
    fn nelm_scale_and_pair_permutation(data in data_strategy(24, 4), s in 0.01f64..100.0, rot in 0usize..12) {
        prop_assume!(data.n() >= 6);
        let d = data.d();
        let mu0 = vec![0.25; d];
        let ones = vec![1.0; d];
        let base = nelm_test(&data, &mu0, 0.05, &ones).unwrap();

        let scaled_rows: Vec<Vec<f64>> = data.rows().map(|r| r.iter().map(|x| x * s).collect()).collect();
        let scaled = DataMatrix::from_rows(&scaled_rows).unwrap();
        let mu_s: Vec<f64> = mu0.iter().map(|x| x * s).collect();
        let out = nelm_test(&scaled, &mu_s, 0.05, &ones).unwrap();
        if base.statistic.is_finite() {
            prop_assert!((out.statistic - base.statistic).abs() <= 1e-8 * (1.0 + base.statistic));
        } else {
            prop_assert!(out.statistic.is_infinite());
        }

        // rotate the pair index jointly in both halves
        let m = data.n() / 2;
        let rows: Vec<Vec<f64>> = data.rows().map(|r| r.to_vec()).collect();
        let mut moved = rows.clone();
        for i in 0..m {
            let j = (i + rot) % m;
            moved[i] = rows[j].clone();
            moved[i + m] = rows[j + m].clone();
        }
        let permuted = nelm_test(&DataMatrix::from_rows(&moved).unwrap(), &mu0, 0.05, &ones).unwrap();
        prop_assert_eq!(permuted.reject, base.reject);
    }

    #[test]
    fn hotelling_affine_invariance(
        data in data_strategy(20, 3),
        a in prop::collection::vec(-2.0f64..2.0, 9),
        b in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let d = data.d();
        prop_assume!(data.n() > d + 1);
        let am = DMatrix::from_fn(d, d, |i, j| a[i * 3 + j] + if i == j { 3.0 } else { 0.0 });
        prop_assume!(am.determinant().abs() > 0.5);
        let mu0 = vec![0.3; d];
        let base = match hotelling_test(&data, &mu0, 0.05) {
            Ok(t) => t,
            Err(_) => return Ok(()),
        };
        let map = |x: &[f64]| -> Vec<f64> {
            (0..d).map(|i| (0..d).map(|j| am[(i, j)] * x[j]).sum::<f64>() + b[i]).collect()
        };
        let rows: Vec<Vec<f64>> = data.rows().map(map).collect();
        let moved = hotelling_test(&DataMatrix::from_rows(&rows).unwrap(), &map(&mu0), 0.05).unwrap();
        prop_assert!((moved.statistic - base.statistic).abs() <= 1e-8 * (1.0 + base.statistic));
    }

    #[test]
    fn p_values_bounded_and_reject_monotone(data in data_strategy(30, 3), shift in -1.0f64..1.0) {
        prop_assume!(data.n() >= 6);
        let d = data.d();
        let mu0 = vec![shift; d];
        let mut outcomes = Vec::new();
        for &level in &[0.01, 0.05, 0.1, 0.5] {
            let mut row = Vec::new();
            row.push(nelm_test(&data, &mu0, level, &vec![1.0; d]).ok());
            row.push(oelm_test(&data, &mu0, level, OelmCalibration::Auto).ok());
            row.push(hotelling_test(&data, &mu0, level).ok());
            row.push(bs_test(&data, &mu0, level).ok());
            outcomes.push(row);
        }
        for k in 0..4 {
            let mut prev = false;
            for row in &outcomes {
                if let Some(t) = &row[k] {
                    prop_assert!(t.p_value >= 0.0 && t.p_value <= 1.0);
                    prop_assert_eq!(t.reject, t.p_value <= t.level);
                    prop_assert!(t.reject || !prev);
                    prev = t.reject;
                }
            }
        }
    }
}
