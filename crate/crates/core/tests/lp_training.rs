mod common;

use common::{random_instance, random_training, rng};
use riskrule::lpformat::{decomposition_assignment, emit_training_milp, parse_lp};
use riskrule::{decompose, Parameterization, ProblemKind, RiskSpec, TrainingConfig};

#[test]
fn training_problem_round_trips_at_the_decomposition() {
    let mut r = rng(61);
    let mut checked = 0;
    for trial in 0..12 {
        let mode = if trial % 2 == 0 { Parameterization::B } else { Parameterization::A };
        let targets = 1 + (trial / 2) % 2;
        let kind = if targets == 2 { ProblemKind::Sp2 } else { ProblemKind::Sp1 };
        let inst = random_instance(&mut r, 6, 4, 6, mode, targets).with_tau(1.0).unwrap();
        let training = random_training(&mut r, &inst, 1, 4);
        for risk0 in [RiskSpec::Expectation, RiskSpec::WorstCase, RiskSpec::superquantile(0.75).unwrap()] {
            for theta in [0.0, 0.01] {
                let cfg = TrainingConfig { risk0, theta, ..Default::default() };
                let d = decompose(&inst, &training, &cfg, kind).unwrap();
                let model = parse_lp(&emit_training_milp(&inst, &training, &cfg, kind).unwrap()).unwrap();
                let x = decomposition_assignment(&inst, &d, &cfg).unwrap();
                let vars = model.variables();
                let missing: Vec<&&str> = vars.iter().filter(|v| !x.contains_key(**v)).collect();
                assert!(missing.is_empty(), "unassigned: {missing:?}");
                let tag = format!("trial {trial} {} theta {theta}", risk0.label());
                assert!(model.max_violation(&x) <= 1e-9, "{tag}: violation {}", model.max_violation(&x));
                let obj = model.objective_value(&x);
                assert!((obj - d.upper).abs() <= 1e-9, "{tag}: objective {obj} vs U {}", d.upper);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 72);
}

#[test]
fn training_problem_size() {
    let mut r = rng(62);
    for _ in 0..10 {
        let inst = random_instance(&mut r, 6, 4, 6, Parameterization::B, 1);
        let training = random_training(&mut r, &inst, 1, 4);
        let n = training.len();
        let (c, t, i, dim) = (inst.grid().cell_count(), inst.horizon(), inst.scenario_count(), inst.param_dim());
        for (risk0, extra_vars, extra_rows) in [
            (RiskSpec::Expectation, 0, 0),
            (RiskSpec::WorstCase, 1, n),
            (RiskSpec::superquantile(0.5).unwrap(), 1 + n, n),
        ] {
            for theta in [0.0, 0.1] {
                let cfg = TrainingConfig { risk0, theta, ..Default::default() };
                let model = parse_lp(&emit_training_milp(&inst, &training, &cfg, ProblemKind::Sp1).unwrap()).unwrap();
                let per_copy_vars = c * t + i * (t + 1);
                let per_copy_rows = t + c * (t - 1) + 2 * i + 2 * c * t;
                let coef_vars = c * t * dim * if theta > 0.0 { 2 } else { 1 } + c * t;
                assert_eq!(model.variables().len(), n * per_copy_vars + coef_vars + extra_vars);
                assert_eq!(model.rows.len(), n * per_copy_rows + extra_rows);
            }
        }
    }
}

#[test]
fn quantile_training_problem_is_refused() {
    let mut r = rng(63);
    let inst = random_instance(&mut r, 4, 3, 4, Parameterization::B, 1);
    let training = random_training(&mut r, &inst, 1, 2);
    let cfg = TrainingConfig { risk0: RiskSpec::quantile(0.5).unwrap(), ..Default::default() };
    assert!(emit_training_milp(&inst, &training, &cfg, ProblemKind::Sp1).is_err());
}
