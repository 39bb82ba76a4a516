use isrp_core::data::TrajectoryMatrix;
use isrp_core::fit::{bootstrap_select, nls_fit, Candidate, Curve, FitProblem};
use isrp_core::isrp::{isrp_profile, Baseline, ProfileOptions, Target};
use isrp_core::models::{self, ModelId, Parent, Variation};
use isrp_core::select::{detect_variation, select_model, DetectOptions, RateForm, SelectOptions};
use isrp_core::sim::{mean_profile, replicate_isrp, simulate, KoopmanCov, SimulationPlan};
use isrp_core::{Execution, Param, ParameterSet, TimeGrid};

fn zero_residual(model: ModelId, truth: ParameterSet, factor: f64) {
    let t: Vec<f64> = (0..15).map(|i| i as f64).collect();
    let y: Vec<f64> = t.iter().map(|&s| models::size(model, &truth, s).unwrap()).collect();
    let mut init = truth;
    let hump = model.variation == Variation::HumpRate;
    for &p in model.params().unwrap() {
        if !(hump && p == Param::C) {
            init.set(p, truth.get(p) * factor);
        }
    }
    let mut problem = FitProblem::new(Curve::Size(model), t, y, init).unwrap();
    if hump {
        problem = problem.fixing(Param::C);
    }
    let fit = nls_fit(&problem).unwrap();
    for &p in &fit.free {
        let (est, tru) = (fit.estimates.get(p), truth.get(p));
        assert!((est - tru).abs() <= 1e-6 * tru.abs(), "{model} {p}: {est} vs {tru} (init x{factor})");
    }
    assert!(fit.rss < 1e-12, "{model}: rss {}", fit.rss);
}

#[test]
fn zero_residual_fits_recover_case_study_models() {
    let cases = [
        (ModelId::constant(Parent::Exponential), ParameterSet { r0: 0.2, x0: 10.0, ..Default::default() }),
        (
            ModelId::new(Parent::Exponential, Variation::ExpDecayRate),
            ParameterSet { r0: 0.6, c: 0.3, x0: 10.0, ..Default::default() },
        ),
        (
            ModelId::new(Parent::Exponential, Variation::HumpRate),
            ParameterSet { r0: 0.11, b: 0.44, c: 1.0, x0: 230.0, ..Default::default() },
        ),
        (ModelId::constant(Parent::Logistic), ParameterSet::logistic(0.3, 100.0, 10.0)),
        (
            ModelId::new(Parent::Logistic, Variation::HyperbolicRate),
            ParameterSet { c: 0.2, ..ParameterSet::logistic(0.6, 100.0, 5.0) },
        ),
    ];
    for (model, truth) in cases {
        for factor in [0.5, 1.5] {
            zero_residual(model, truth, factor);
        }
    }
}

#[test]
fn simulated_file_round_trips_and_profiles() {
    let mut plan = SimulationPlan::logistic_reference(42);
    plan.n = 200;
    let data = simulate(&plan).unwrap();
    assert_eq!((data.n(), data.q()), (200, 20));
    let mut csv = Vec::new();
    data.write_wide_csv(&mut csv).unwrap();
    let again = {
        let mut v = Vec::new();
        simulate(&plan).unwrap().write_wide_csv(&mut v).unwrap();
        v
    };
    assert_eq!(csv, again);
    let back = TrajectoryMatrix::read_wide_csv(csv.as_slice()).unwrap();
    let opts = ProfileOptions::new(Parent::Logistic, Target::R);
    let series = isrp_profile(&back, &opts).unwrap();
    assert_eq!(series.points.len(), 18);
    let first = series.estimates().next().unwrap();
    assert!((first.value - 0.3).abs() < 0.01);
    let (lo, hi) = (first.ci_lo.unwrap(), first.ci_hi.unwrap());
    assert!(lo < 0.3 && 0.3 < hi);
}

#[test]
fn replication_summary_is_schedule_independent() {
    let mut plan = SimulationPlan::logistic_reference(9);
    plan.n = 50;
    plan.replications = 40;
    let mut opts = ProfileOptions::new(Parent::Logistic, Target::K);
    opts.baseline = Baseline::Known { value: 10.0, time: 0.0 };
    let a = replicate_isrp(&plan, &opts, Execution::Parallel).unwrap();
    let b = replicate_isrp(&plan, &opts, Execution::Sequential).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.intervals.len(), 18);
}

#[test]
fn noiseless_plan_reproduces_closed_form_means() {
    let mut plan = SimulationPlan::logistic_reference(1);
    plan.n = 1;
    plan.cov = KoopmanCov { sigma2: 1e-30, rho: 0.1 };
    let data = simulate(&plan).unwrap();
    let mean = mean_profile(plan.model, &plan.params, &plan.grid).unwrap();
    for (x, m) in data.row(0).iter().zip(&mean) {
        assert!((x - m).abs() <= 1e-12 * m);
    }
}

fn panel(seed: u64) -> TrajectoryMatrix {
    let plan = SimulationPlan {
        model: ModelId::constant(Parent::Logistic),
        params: ParameterSet::logistic(0.3, 100.0, 10.0),
        grid: TimeGrid::new(0.0, 1.0, 11).unwrap(),
        n: 30,
        cov: KoopmanCov { sigma2: 1.0, rho: 0.1 },
        replications: 1,
        seed,
    };
    simulate(&plan).unwrap()
}

fn logistic_candidate(data: &TrajectoryMatrix) -> Candidate {
    let problem = FitProblem::new(
        Curve::Size(ModelId::constant(Parent::Logistic)),
        data.times(),
        data.column_means(),
        ParameterSet::logistic(0.3, 110.0, 10.0),
    )
    .unwrap();
    Candidate { name: "logistic".into(), problem }
}

#[test]
fn bootstrap_single_candidate_wins_every_replicate() {
    let data = panel(3);
    let report = bootstrap_select(&data, &[logistic_candidate(&data)], 25, 8, Execution::default()).unwrap();
    assert_eq!(report.wins, vec![25]);
    assert_eq!(report.failed, 0);
    assert_eq!(report.aic[0].len(), 25);
}

#[test]
fn bootstrap_is_deterministic_and_counts_sum_to_b() {
    let data = panel(4);
    let exp = FitProblem::new(
        Curve::Size(ModelId::constant(Parent::Exponential)),
        data.times(),
        data.column_means(),
        ParameterSet { r0: 0.1, x0: 10.0, ..Default::default() },
    )
    .unwrap();
    let cands = [logistic_candidate(&data), Candidate { name: "exponential".into(), problem: exp }];
    let a = bootstrap_select(&data, &cands, 30, 99, Execution::Parallel).unwrap();
    let b = bootstrap_select(&data, &cands, 30, 99, Execution::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.wins.iter().sum::<usize>() + a.failed, 30);
    assert_eq!(a.wins[0], 30);
    let c = bootstrap_select(&data, &cands, 30, 100, Execution::Parallel).unwrap();
    assert_ne!(a.aic, c.aic);
}

#[test]
fn linear_rate_outranks_constant() {
    let plan = SimulationPlan {
        model: ModelId::new(Parent::Logistic, Variation::LinearIncreasingRate),
        params: ParameterSet { c: 0.5, ..ParameterSet::logistic(0.3, 100.0, 10.0) },
        grid: TimeGrid::new(1.0, 1.0, 20).unwrap(),
        n: 1000,
        cov: KoopmanCov { sigma2: 0.001, rho: 0.1 },
        replications: 1,
        seed: 5,
    };
    let data = simulate(&plan).unwrap();
    let mut opts = DetectOptions::new(Parent::Logistic);
    opts.early_only = true;
    let stage = detect_variation(&data, &opts).unwrap();
    let linear = stage.aic_of(RateForm::Linear).unwrap();
    let constant = stage.aic_of(RateForm::Constant).unwrap();
    assert!(linear + 2.0 < constant, "linear {linear} vs constant {constant}");
    assert!(!stage.no_variation);
    let report = select_model(&data, &stage, &SelectOptions::default()).unwrap();
    assert_eq!(report.chosen, plan.model);
    assert!(report.model_stage.iter().any(|m| m.model == ModelId::constant(Parent::Logistic)));
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("linear_increasing_rate"));
}

#[test]
fn detection_needs_four_intervals() {
    let grid = TimeGrid::new(0.0, 1.0, 5).unwrap();
    let m = ModelId::constant(Parent::Logistic);
    let y = models::size_on_grid(m, &ParameterSet::logistic(0.3, 100.0, 10.0), &grid).unwrap();
    let data = TrajectoryMatrix::single(grid, &y).unwrap();
    let err = detect_variation(&data, &DetectOptions::new(Parent::Logistic)).unwrap_err();
    assert_eq!(err.kind(), isrp_core::ErrorKind::InvalidInput);
}
