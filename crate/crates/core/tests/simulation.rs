use std::sync::Arc;

use pcmas::experiment::{self, mean_sd, run_experiment, write_csv, ExperimentId, ExperimentSpec, SweepSetup};
use pcmas::fixtures;
use pcmas::learner::{Learner, LearnerConfig, TemperatureSchedule};
use pcmas::population::{run_population, MaliciousPolicy, PopulationConfig};
use pcmas::punishment::expected_malicious_payoff;
use pcmas::teaching::{run_session, run_session_with_student, Session, TeacherStrategy};
use pcmas::tmdp::{track_student, Policy, QGrid};
use pcmas::JointAction;

fn population(punishers: usize, malicious: usize, policy: MaliciousPolicy, seed: u64) -> PopulationConfig {
    PopulationConfig {
        n: 16,
        punishers,
        conformers: 16 - punishers - malicious,
        malicious,
        game: fixtures::prisoners_dilemma(),
        law: JointAction::new(0, 0),
        malicious_policy: policy,
        mal_vs_mal_payoff: 0.0,
        iterations: 100_000,
        seed,
    }
}

#[test]
fn law_abiding_population_earns_the_law_payoff() {
    let stats = run_population(&population(5, 0, MaliciousPolicy::Exploit, 1)).unwrap();
    for s in [&stats.punisher, &stats.conformer] {
        assert!((s.mean - 2.0).abs() <= 3.0 * s.standard_error().max(1e-12));
    }
    assert_eq!(stats.deviations, 0);
    assert_eq!(stats.punishments, 0);
}

#[test]
fn lone_exploiter_without_punishers_earns_ten() {
    let stats = run_population(&population(0, 1, MaliciousPolicy::Exploit, 2)).unwrap();
    let m = &stats.malicious;
    assert!((m.mean - 10.0).abs() <= 3.0 * m.standard_error().max(1e-12));
}

#[test]
fn nine_punishers_hold_the_exploiter_below_the_law() {
    let stats = run_population(&population(9, 1, MaliciousPolicy::Exploit, 3)).unwrap();
    let expected = expected_malicious_payoff(&fixtures::prisoners_dilemma(), JointAction::new(0, 0), 16, 9).unwrap();
    let m = &stats.malicious;
    assert!(m.mean < 2.0);
    assert!((m.mean - expected).abs() <= 3.0 * m.standard_error());
}

#[test]
fn matching_is_uniform() {
    let stats = run_population(&population(4, 2, MaliciousPolicy::Exploit, 4)).unwrap();
    let iters = 100_000.0f64;
    // each agent is in a given pair with probability 2/n
    let p = 2.0 / 16.0;
    let sd = (iters * p * (1.0 - p)).sqrt();
    for &c in &stats.participations {
        assert!((c as f64 - iters * p).abs() <= 4.0 * sd);
    }
    assert_eq!(stats.participations.iter().sum::<u64>(), 200_000);
}

#[test]
fn populations_are_deterministic() {
    let c = population(3, 2, MaliciousPolicy::Exploit, 5);
    assert_eq!(run_population(&c).unwrap(), run_population(&c).unwrap());
}

#[test]
fn tft_teaches_a_warm_q_learner() {
    let pd = fixtures::teaching_pd();
    let setup = SweepSetup {
        game: &pd,
        student: LearnerConfig::q(1, 0.1, 0.9),
        teacher: &TeacherStrategy::Tft,
        trials: 100,
        seed: 8,
    };
    let rows = experiment::temperature_sweep(&setup, "tft", 3.0, &[10_000]).unwrap();
    assert!(rows[0].mean > 0.9, "{}", rows[0].mean);
}

#[test]
fn teacher_tracking_matches_the_student_exactly() {
    let pd = fixtures::teaching_pd();
    let grid = QGrid::new(-13.0, 13.0, 40).unwrap();
    let policy = Arc::new(Policy::solve(&pd, grid, 1.0, 0.1, 0.95, 1e-6).unwrap());
    let teacher = TeacherStrategy::Policy(policy);
    let session = Session {
        game: &pd,
        student: LearnerConfig::blind(0.1),
        teacher: &teacher,
        iterations: 3000,
        schedule: TemperatureSchedule::fixed(1.0),
    };
    let (log, student) = run_session_with_student(&session, 21).unwrap();
    let tracked = track_student([0.0, 0.0], 0.1, log.steps.iter().map(|s| (s.student, s.reward)));
    let Learner::Blind(state) = student else { panic!("blind student expected") };
    assert_eq!(tracked, state.q);
}

#[test]
fn experiments_write_identical_bytes() {
    let mut spec = ExperimentSpec::preset(ExperimentId::Fig3TwoTft).unwrap();
    spec.trials = 6;
    spec.iterations = vec![200, 500];
    let csv = |spec: &ExperimentSpec| {
        let mut buf = Vec::new();
        write_csv(&run_experiment(spec).unwrap(), &mut buf).unwrap();
        buf
    };
    let a = csv(&spec);
    assert_eq!(a, csv(&spec));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 20 * 2);
}

#[test]
fn spread_of_the_mean_shrinks_with_trials() {
    let pd = fixtures::teaching_pd();
    let teacher = TeacherStrategy::Learner(None);
    let session = Session {
        game: &pd,
        student: LearnerConfig::blind(0.1),
        teacher: &teacher,
        iterations: 1000,
        schedule: TemperatureSchedule::fixed(1.25),
    };
    // spread of batch means for batches of 25 and of 100 trials
    let batch_means = |size: u64| -> Vec<f64> {
        (0..8u64)
            .map(|b| {
                let rates: Vec<f64> = (0..size)
                    .map(|t| run_session(&session, pcmas::rng::trial_seed(b, 1.25, t)).unwrap().coop_rate())
                    .collect();
                mean_sd(&rates).0
            })
            .collect()
    };
    let sd25 = mean_sd(&batch_means(25)).1;
    let sd100 = mean_sd(&batch_means(100)).1;
    let ratio = sd25 / sd100;
    // 1/sqrt(trials) predicts a ratio of 2
    assert!((1.0..4.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn custom_specs_load_from_json() {
    let mut spec = ExperimentSpec::preset(ExperimentId::Fig6QlDecay).unwrap();
    spec.id = ExperimentId::Custom;
    spec.trials = 2;
    spec.iterations = vec![500];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let loaded = ExperimentSpec::from_json_file(&path).unwrap();
    let rows = run_experiment(&loaded).unwrap();
    assert_eq!(rows.len(), 2 * 2);
    assert!(rows.iter().all(|r| r.experiment.starts_with("custom/")));
}
