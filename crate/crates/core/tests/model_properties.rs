mod common;

use common::{l2, random_instance, random_param, random_path, random_training, rng};
use rand::Rng;
use riskrule::bounds::constant_pattern_condition;
use riskrule::rules::{amdr, candidate_decisions, in_margin_set, mdr};
use riskrule::train::training_objective;
use riskrule::{
    decompose, AffineRule, ConstantRule, MarginSpec, Parameterization, ProblemKind, RiskSpec, SearchPath,
    TrainingConfig,
};

#[test]
fn qvec_is_a_probability_vector() {
    let mut r = rng(41);
    for trial in 0..200 {
        let mode = if trial % 2 == 0 { Parameterization::A } else { Parameterization::B };
        let inst = random_instance(&mut r, 9, 5, 20, mode, 1);
        let q = inst.qvec(&random_param(&mut r, &inst)).unwrap();
        assert!(q.iter().all(|v| *v >= 0.0));
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q0 = inst.qvec(&vec![0.0; inst.param_dim()]).unwrap();
        let u = 1.0 / inst.scenario_count() as f64;
        assert!(q0.iter().all(|v| (v - u).abs() < 1e-15));
    }
}

#[test]
fn searching_more_never_raises_nondetection() {
    let mut r = rng(42);
    for _ in 0..300 {
        let mode = if r.gen_bool(0.5) { Parameterization::A } else { Parameterization::B };
        let inst = random_instance(&mut r, 9, 6, 15, mode, 1);
        let xi = random_param(&mut r, &inst);
        let mut y: Vec<bool> = (0..inst.decision_dim()).map(|_| r.gen_bool(0.2)).collect();
        let before = inst.nondetect_prob_raw(&xi, &y, 0).unwrap();
        let k = r.gen_range(0..y.len());
        y[k] = true;
        let after = inst.nondetect_prob_raw(&xi, &y, 0).unwrap();
        assert!(after <= before, "{after} > {before}");
    }
}

#[test]
fn lipschitz_in_mode_b_for_walks() {
    let mut r = rng(43);
    for _ in 0..50 {
        let inst = random_instance(&mut r, 9, 6, 25, Parameterization::B, 1);
        let kappa = (inst.scenario_count() as f64).sqrt();
        for _ in 0..40 {
            let (a, b) = (random_param(&mut r, &inst), random_param(&mut r, &inst));
            let p = random_path(&mut r, &inst);
            let d = inst.nondetect_prob(&a, &p, 0).unwrap() - inst.nondetect_prob(&b, &p, 0).unwrap();
            assert!(d.abs() <= kappa * l2(&a, &b));
        }
    }
}

#[test]
fn mdr_and_amdr_prescribe_paths() {
    let mut r = rng(44);
    for trial in 0..12 {
        let mode = if trial % 2 == 0 { Parameterization::B } else { Parameterization::A };
        let inst = random_instance(&mut r, 6, 4, 8, mode, 2).with_tau(1.0).unwrap();
        let training = random_training(&mut r, &inst, 2, 5);
        let d = decompose(&inst, &training, &TrainingConfig::default(), ProblemKind::Sp2).unwrap();
        let cells = inst.grid().cell_count();
        let obj = |xi: &[f64], y: &[bool]| inst.objective_if_feasible(xi, y, ProblemKind::Sp2).unwrap();
        let (_, m) = mdr(&d.rule, &training, obj).unwrap();
        let mp = SearchPath::from_binary(&m, cells, inst.horizon()).expect("one cell per period");
        assert!(inst.is_path(&mp));
        let cands = candidate_decisions(&d.rule, &training).unwrap();
        for _ in 0..10 {
            let xi = random_param(&mut r, &inst);
            let (_, a) = amdr(&d.rule, &training, &xi, obj).unwrap();
            let ap = SearchPath::from_binary(&a, cells, inst.horizon()).expect("one cell per period");
            assert!(inst.is_path(&ap));
            let best = cands.iter().filter_map(|y| obj(&xi, y)).fold(f64::INFINITY, f64::min);
            assert_eq!(obj(&xi, &a), Some(best));
        }
    }
}

#[test]
fn pattern_is_constant_under_the_diameter_condition() {
    let mut r = rng(45);
    let margin = MarginSpec::new(0.05, 1.0).unwrap();
    let mut tested = 0;
    while tested < 100 {
        let (m, dim) = (6, 4);
        let coef: Vec<f64> = (0..m * dim).map(|_| r.gen_range(-0.5..0.5)).collect();
        let offset: Vec<f64> = (0..m).map(|_| if r.gen_bool(0.5) { 0.3 } else { -0.3 }).collect();
        let rule = AffineRule::new(m, dim, coef, offset, margin).unwrap();
        let center: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let spread = r.gen_range(0.01..0.3);
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|_| center.iter().map(|c| c + r.gen_range(-spread..spread) / 2.0).collect())
            .collect();
        let diam = riskrule::bounds::diameter(&pts).unwrap();
        let inside = pts.iter().all(|p| in_margin_set(&rule.values(p).unwrap(), &margin));
        if !(inside && constant_pattern_condition(&rule, diam, margin.epsilon())) {
            continue;
        }
        tested += 1;
        let cands = candidate_decisions(&rule, &pts).unwrap();
        assert!(cands.windows(2).all(|w| w[0] == w[1]));
        // and on convex combinations of the points
        for _ in 0..20 {
            let w: Vec<f64> = (0..pts.len()).map(|_| r.gen::<f64>()).collect();
            let s: f64 = w.iter().sum();
            let xi: Vec<f64> =
                (0..dim).map(|j| pts.iter().zip(&w).map(|(p, a)| p[j] * a / s).sum()).collect();
            assert_eq!(rule.apply(&xi).unwrap().1, cands[0]);
        }
    }
}

#[test]
fn lower_bound_never_exceeds_a_constant_rule() {
    let mut r = rng(46);
    for trial in 0..20 {
        let inst = random_instance(&mut r, 6, 4, 8, Parameterization::B, 1);
        let training = random_training(&mut r, &inst, 1, 5);
        let risk0 = [RiskSpec::Expectation, RiskSpec::WorstCase, RiskSpec::superquantile(0.8).unwrap()][trial % 3];
        let cfg = TrainingConfig { risk0, ..Default::default() };
        let d = decompose(&inst, &training, &cfg, ProblemKind::Sp1).unwrap();
        let cells = inst.grid().cell_count();
        for _ in 0..30 {
            let p = random_path(&mut r, &inst);
            let rule = ConstantRule::encoding(&p.to_binary(cells), cfg.margin.epsilon());
            let e = training_objective(&rule, &training, &inst, &cfg, ProblemKind::Sp1).unwrap();
            assert!(e.feasible);
            assert!(d.lower <= e.value, "L = {} above {}", d.lower, e.value);
        }
    }
}

#[test]
fn upper_bound_follows_risk_ordering() {
    let mut r = rng(47);
    for _ in 0..10 {
        let inst = random_instance(&mut r, 6, 4, 8, Parameterization::A, 1);
        let training = random_training(&mut r, &inst, 2, 6);
        let upper = |risk0| {
            let cfg = TrainingConfig { risk0, ..Default::default() };
            decompose(&inst, &training, &cfg, ProblemKind::Sp1).unwrap().upper
        };
        let e = upper(RiskSpec::Expectation);
        let s = upper(RiskSpec::superquantile(0.6).unwrap());
        let w = upper(RiskSpec::WorstCase);
        assert!(e <= s + 1e-12 && s <= w + 1e-12, "{e} {s} {w}");
    }
}
