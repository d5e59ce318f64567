use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rrclass::coding::CodingSimplex;
use rrclass::losses::BentLoss;
use rrclass::predict::RejectCost;
use rrclass::theory::{
    export_region_map, fstar_region, population_minimizer, verify_region_sandwich, ProbVector,
    RegionLabel, SandwichConfig,
};
use rrclass::tune::a_bounds;

/// `sum_j P_j sum_{i != j} loss(<Y_i, f>)`, written out directly.
fn risk(p: &[f64], loss: &BentLoss, s: &CodingSimplex, f: &[f64]) -> f64 {
    let m: Vec<f64> = s
        .vertices()
        .map(|y| y.iter().zip(f).map(|(a, b)| a * b).sum())
        .collect();
    (0..p.len())
        .map(|j| {
            p[j] * (0..p.len())
                .filter(|&i| i != j)
                .map(|i| loss.value(m[i]))
                .sum::<f64>()
        })
        .sum()
}

/// Grid search over `[-5, 5]^2`, then repeated zooming around the best point.
fn brute_force(p: &[f64], loss: &BentLoss, s: &CodingSimplex) -> f64 {
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    let mut centre = [0.0, 0.0];
    let mut half = 5.0;
    for _ in 0..12 {
        let steps = 80;
        for i in 0..=steps {
            for j in 0..=steps {
                let f = [
                    centre[0] - half + 2.0 * half * i as f64 / steps as f64,
                    centre[1] - half + 2.0 * half * j as f64 / steps as f64,
                ];
                let r = risk(p, loss, s, &f);
                if r < best.0 {
                    best = (r, f);
                }
            }
        }
        centre = best.1;
        half *= 0.2;
    }
    best.0
}

#[test]
fn three_class_minimizer_beats_brute_force() {
    let s = CodingSimplex::new(3).unwrap();
    let probs = [
        vec![0.6, 0.3, 0.1],
        vec![0.45, 0.45, 0.1],
        vec![0.34, 0.33, 0.33],
        vec![0.8, 0.15, 0.05],
        vec![0.5, 0.3, 0.2],
        vec![0.2, 0.1, 0.7],
    ];
    for a in [1.2, 1.5, 2.0, 3.0] {
        for loss in [BentLoss::hinge(a).unwrap(), BentLoss::dwd(a).unwrap()] {
            for p in &probs {
                let pv = ProbVector::new(p.clone()).unwrap();
                let min = population_minimizer(&pv, &loss, &s).unwrap();
                let r_min = risk(p, &loss, &s, &min.f);
                let r_bf = brute_force(p, &loss, &s);
                assert!(
                    r_min <= r_bf + 1e-9,
                    "{:?} a={a} P={p:?}: minimizer risk {r_min} > grid risk {r_bf}",
                    loss.kind()
                );
                assert!(
                    r_bf - r_min < 1e-4,
                    "grid search did not converge: {r_bf} vs {r_min}"
                );
            }
        }
    }
}

#[test]
fn region_map_is_nested() {
    let mut buf = Vec::new();
    let res = 40;
    let rows = export_region_map(&mut buf, 0.5, res).unwrap();
    let (a1, a2) = a_bounds(3, 0.5).unwrap();
    assert_eq!(rows, (res + 1) * (res + 2) / 2);
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let mut count = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let p: Vec<f64> = (0..3).map(|i| rec[i].parse().unwrap()).collect();
        let (bayes, inner, outer) = (&rec[3], &rec[4], &rec[5]);
        let pmax = p.iter().cloned().fold(0.0, f64::max);
        assert_eq!(bayes == "reject", pmax <= 0.5 + 1e-12, "p = {p:?}");
        // skip lattice points on a region boundary, where closed and open
        // region definitions differ
        let q: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        let (qmin, qmax) = (
            q.iter().cloned().fold(1.0, f64::min),
            q.iter().cloned().fold(0.0, f64::max),
        );
        let on_edge =
            (pmax - 0.5).abs() < 1e-12 || [a1, a2].iter().any(|a| (qmax - a * qmin).abs() < 1e-12);
        if on_edge {
            count += 1;
            continue;
        }
        if inner == "reject" {
            assert_eq!(bayes, "reject", "p = {p:?}");
        }
        if bayes == "reject" {
            assert_eq!(outer, "reject", "p = {p:?}");
        }
        count += 1;
    }
    assert_eq!(count, rows);
}

#[test]
fn region_map_refines_near_two_class_edge() {
    // P = (0.45, 0.45, 0.1) at a1 = 1.5: Q = (0.55, 0.55, 0.9), ratio 1.636 > a1
    let (a1, _) = a_bounds(3, 0.5).unwrap();
    let p = ProbVector::new(vec![0.45, 0.45, 0.1]).unwrap();
    assert_eq!(
        fstar_region(&p, a1).unwrap(),
        RegionLabel::FstarRefine(vec![1, 2])
    );
}

#[test]
fn no_tightness_witness_for_a_between_2_and_3_at_k4_d05() {
    for a in [2.05, 2.5, 2.95] {
        let mut cfg = SandwichConfig::new(4, 0.5, 100_000, 17);
        cfg.a_interior = Some(a);
        let r = verify_region_sandwich(&cfg).unwrap();
        assert!(r.inclusions_hold());
        assert!(
            r.witness_bayes_not_fstar.is_none(),
            "a={a}: witness {:?}",
            r.witness_bayes_not_fstar
        );
    }
}

#[test]
fn binary_regions_coincide() {
    for d in [0.1, 0.3, 0.45] {
        let (a1, a2) = a_bounds(2, d).unwrap();
        assert!((a1 - a2).abs() < 1e-12);
        let r = verify_region_sandwich(&SandwichConfig::new(2, d, 50_000, 3)).unwrap();
        assert_eq!(r.symmetric_difference, 0, "d = {d}");
    }
}

#[test]
fn bayes_reject_region_matches_definition() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 2..7 {
        let cost = RejectCost::new(0.5 * (k as f64 - 1.0) / k as f64, k).unwrap();
        for _ in 0..500 {
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let p = ProbVector::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let top = p.p().iter().cloned().fold(0.0, f64::max);
            let rejects = rrclass::theory::bayes_region(&p, cost).is_reject();
            assert_eq!(rejects, top <= 1.0 - cost.d());
        }
    }
}
