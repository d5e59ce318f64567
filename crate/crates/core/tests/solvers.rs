use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrclass::data::Dataset;
use rrclass::losses::BentLoss;
use rrclass::optim::{
    linear_objective, train_kernel, train_linear_dual_cd, train_linear_primal, Classifier,
    KernelSpec, Penalty, SolverOptions,
};

/// Gaussian classes with shifted means.
fn instance(rng: &mut ChaCha8Rng, n: usize, p: usize, k: usize) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % k + 1;
        rows.push(
            (0..p)
                .map(|j| rng.gen_range(-1.0..1.0) + if j % k == label - 1 { 0.8 } else { 0.0 })
                .collect(),
        );
        y.push(label);
    }
    Dataset::from_rows(&rows, y, k).unwrap()
}

#[test]
fn dual_and_primal_agree_on_20_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = SolverOptions::tight();
    for t in 0..20 {
        let n = rng.gen_range(10..=60);
        let p = rng.gen_range(1..=10);
        let k = rng.gen_range(2..=4);
        let a = rng.gen_range(1.1..4.0);
        let lambda = 10f64.powf(rng.gen_range(-2.5..0.0));
        let data = instance(&mut rng, n, p, k);
        let loss = BentLoss::hinge(a).unwrap();
        let dual = train_linear_dual_cd(&data, &loss, lambda, &opts).unwrap();
        let primal = train_linear_primal(&data, &loss, Penalty::L2, lambda, &opts).unwrap();
        let od = linear_objective(&dual, &data).unwrap();
        let op = linear_objective(&primal, &data).unwrap();
        let rel = (od - op).abs() / op.abs().max(1e-12);
        assert!(
            rel <= 1e-6,
            "instance {t} (n={n} p={p} k={k} a={a:.3} lambda={lambda:.3e}): dual {od} primal {op}"
        );
    }
}

/// Relabelling the classes permutes the margins and leaves the L2
/// objective unchanged, since the penalty is invariant under the simplex
/// symmetries.
#[test]
fn label_permutation_permutes_margins() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = SolverOptions::tight();
    for (k, perm) in [
        (3, vec![2, 3, 1]),
        (4, vec![4, 1, 3, 2]),
        (4, vec![2, 1, 4, 3]),
    ] {
        let data = instance(&mut rng, 40, 3, k);
        let permuted = data.permute_labels(&perm).unwrap();
        let loss = BentLoss::hinge(1.7).unwrap();
        let m0 = train_linear_dual_cd(&data, &loss, 0.05, &opts).unwrap();
        let m1 = train_linear_dual_cd(&permuted, &loss, 0.05, &opts).unwrap();
        let o0 = linear_objective(&m0, &data).unwrap();
        let o1 = linear_objective(&m1, &permuted).unwrap();
        assert!((o0 - o1).abs() <= 1e-8 * o0.abs(), "{o0} vs {o1}");
        for i in 0..data.n() {
            let a = m0.margins(data.row(i));
            let b = m1.margins(data.row(i));
            for j in 0..k {
                let diff = (a.0[j] - b.0[perm[j] - 1]).abs();
                assert!(diff < 1e-5, "row {i} class {}: {diff}", j + 1);
            }
        }
    }
}

#[test]
fn l1_path_gets_sparser_with_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = instance(&mut rng, 60, 8, 3);
    let loss = BentLoss::dwd(2.0).unwrap();
    let nonzero = |lambda: f64| {
        let m = train_linear_primal(&data, &loss, Penalty::L1, lambda, &SolverOptions::default())
            .unwrap();
        (1..=data.p())
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .filter(|&(r, c)| m.coef(r, c) != 0.0)
            .count()
    };
    let counts: Vec<usize> = [1e-3, 1e-2, 1e-1, 1.0]
        .iter()
        .map(|&l| nonzero(l))
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert_eq!(*counts.last().unwrap(), 0);
}

#[test]
fn linear_kernel_reproduces_linear_l2_margins() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let data = instance(&mut rng, 30, 4, 3);
    let loss = BentLoss::hinge(1.5).unwrap();
    let opts = SolverOptions {
        penalize_kernel_intercept: true,
        ..SolverOptions::tight()
    };
    let lin = train_linear_primal(&data, &loss, Penalty::L2, 0.1, &opts).unwrap();
    let ker = train_kernel(&data, &loss, &KernelSpec::linear(), 0.1, &opts).unwrap();
    for i in 0..data.n() {
        let a = lin.margins(data.row(i));
        let b = ker.margins(data.row(i));
        for j in 0..3 {
            assert!(
                (a.0[j] - b.0[j]).abs() <= 1e-4,
                "row {i}: {:?} vs {:?}",
                a.0,
                b.0
            );
        }
    }
}
