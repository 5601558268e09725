use dce_radiomics::lda::lda_fit;
use dce_radiomics::selection::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Design with `XᵀX / n = I` plus a noisy response.
fn orthonormal_problem(seed: u64, n: usize, p: usize) -> (Design, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let q = a.qr().q();
    let scale = (n as f64).sqrt();
    let columns = (0..p).map(|j| q.column(j).iter().map(|v| v * scale).collect()).collect();
    let y = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    (Design::from_columns(columns).unwrap(), y)
}

fn random_problem(seed: u64, n: usize, p: usize) -> (Design, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let beta: Vec<f64> = (0..p).map(|j| if j % 3 == 0 { rng.random_range(-2.0..2.0) } else { 0.0 }).collect();
    let y = (0..n)
        .map(|i| (0..p).map(|j| columns[j][i] * beta[j]).sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
        .collect();
    (Design::from_columns(columns).unwrap(), y)
}

fn xty_over_n(x: &Design, y: &[f64], j: usize) -> f64 {
    x.columns[j].iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.n_rows as f64
}

#[test]
fn orthonormal_design_matches_soft_threshold() {
    for seed in 0..50 {
        let (x, y) = orthonormal_problem(seed, 40, 8);
        let lmax = lambda_max(&x, &y);
        for frac in [0.05, 0.3, 0.7] {
            let lambda = frac * lmax;
            let b = lasso_fit(&x, &y, lambda).unwrap();
            for (j, bj) in b.iter().enumerate() {
                let want = soft_threshold(xty_over_n(&x, &y, j), lambda);
                assert!((bj - want).abs() < 1e-6, "seed {seed} j {j}: {bj} vs {want}");
            }
        }
    }
}

#[test]
fn zero_solution_at_and_above_lambda_max() {
    for seed in 0..20 {
        let (x, y) = random_problem(seed, 30, 12);
        let lmax = lambda_max(&x, &y);
        for l in [lmax, 1.5 * lmax] {
            assert!(lasso_fit(&x, &y, l).unwrap().iter().all(|b| *b == 0.0), "seed {seed}");
        }
        assert!(lasso_fit(&x, &y, 0.9 * lmax).unwrap().iter().any(|b| *b != 0.0));
    }
}

#[test]
fn objective_never_increases_between_sweeps() {
    for seed in 0..20 {
        let (x, y) = random_problem(seed, 50, 15);
        let lambda = 0.05 * lambda_max(&x, &y);
        let mut values = vec![lasso_objective(&x, &y, &vec![0.0; 15], lambda)];
        lasso_coordinate_descent(&x, &y, lambda, &vec![0.0; 15], |b| values.push(lasso_objective(&x, &y, b, lambda)))
            .unwrap();
        for w in values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "seed {seed}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn path_sparsity_is_monotone_on_orthonormal_designs() {
    for seed in 0..20 {
        let (x, y) = orthonormal_problem(seed, 30, 10);
        let grid = lambda_grid(lambda_max(&x, &y), 30);
        let path = lasso_path(&x, &y, &grid).unwrap();
        assert_eq!(path.capped, 0);
        let nnz: Vec<usize> = path.coefficients.iter().map(|b| b.iter().filter(|v| **v != 0.0).count()).collect();
        assert!(nnz.windows(2).all(|w| w[0] <= w[1]), "seed {seed}: {nnz:?}");
    }
}

#[test]
fn path_matches_independent_fits() {
    let (x, y) = random_problem(7, 40, 10);
    let grid = lambda_grid(lambda_max(&x, &y), 12);
    let path = lasso_path(&x, &y, &grid).unwrap();
    for (l, b) in grid.iter().zip(&path.coefficients) {
        let cold = lasso_fit(&x, &y, *l).unwrap();
        let gap = lasso_objective(&x, &y, b, *l) - lasso_objective(&x, &y, &cold, *l);
        assert!(gap.abs() < 1e-9);
    }
}

#[test]
fn lda_one_dimensional_closed_form() {
    let x = vec![vec![0.0], vec![1.0], vec![4.0], vec![5.0]];
    let m = lda_fit(&x, &[0, 0, 1, 1], 0.0).unwrap();
    assert!((m.weights[0] - 8.0).abs() < 1e-9);
    assert!((m.bias + 20.0).abs() < 1e-9);
    assert!(m.score(&[2.5]).unwrap().abs() < 1e-9);
    assert_eq!(m.predict(&[2.5]).unwrap(), 0);
    assert_eq!(m.predict(&[2.6]).unwrap(), 1);
}

#[test]
fn lda_separates_separable_clusters() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for label in [0u8, 1] {
            let c = if label == 0 { [-3.0, 1.0] } else { [3.0, -1.0] };
            for _ in 0..40 {
                x.push(vec![c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]);
                y.push(label);
            }
        }
        let m = lda_fit(&x, &y, 1e-6).unwrap();
        assert!(x.iter().zip(&y).all(|(r, l)| m.predict(r).unwrap() == *l), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kkt_conditions_hold(seed in any::<u64>(), frac in 0.02f64..0.9) {
        let (x, y) = random_problem(seed, 35, 9);
        let lambda = frac * lambda_max(&x, &y);
        let b = lasso_fit(&x, &y, lambda).unwrap();
        let n = x.n_rows as f64;
        for j in 0..x.n_cols() {
            let r: Vec<f64> = (0..x.n_rows).map(|i| y[i] - x.predict_row(i, &b)).collect();
            let g = x.columns[j].iter().zip(&r).map(|(a, r)| a * r).sum::<f64>() / n;
            if b[j] == 0.0 {
                prop_assert!(g.abs() <= lambda + 1e-5);
            } else {
                prop_assert!((g - lambda * b[j].signum()).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn soft_threshold_is_shrinkage(z in -10.0f64..10.0, l in 0.0f64..5.0) {
        let s = soft_threshold(z, l);
        prop_assert!(s.abs() <= z.abs());
        prop_assert!(s == 0.0 || s.signum() == z.signum());
        prop_assert!(((z - s).abs() - l.min(z.abs())).abs() < 1e-12);
    }
}
