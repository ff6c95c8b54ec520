use proptest::prelude::*;

use pcmas::fixtures;
use pcmas::game::{MatrixGame, ZeroSumGame};
use pcmas::learner::{boltzmann, BqlState, QlState, TemperatureSchedule};
use pcmas::punishment::deterrence_report;
use pcmas::rng::rng_from_seed;
use pcmas::teaching::{run_session, Session, TeacherStrategy, TeachingGame};
use pcmas::tmdp::{build_tmdp, QGrid};
use pcmas::zero_sum::{col_ceiling, row_guarantee, solve_zero_sum};
use pcmas::{JointAction, LearnerConfig};

fn payoff() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(f64::from)
}

fn matrix_game() -> impl Strategy<Value = MatrixGame> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        prop::collection::vec((payoff(), payoff()), r * c).prop_map(move |p| MatrixGame::new(r, c, p).unwrap())
    })
}

fn zero_sum_game() -> impl Strategy<Value = ZeroSumGame> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
        prop::collection::vec(-50.0f64..50.0, r * c).prop_map(move |p| ZeroSumGame::new(r, c, p).unwrap())
    })
}

proptest! {
    #[test]
    fn minimax_strategies_certify_the_value(g in zero_sum_game()) {
        let s = solve_zero_sum(&g);
        let lower = row_guarantee(&g, s.row_strategy.probs());
        let upper = col_ceiling(&g, s.col_strategy.probs());
        prop_assert!((upper - lower).abs() < 1e-7, "gap {} .. {}", lower, upper);
        prop_assert!((s.value - lower).abs() < 1e-12);
        let sum: f64 = s.row_strategy.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_pure_row_beats_the_column_strategy(g in zero_sum_game()) {
        let s = solve_zero_sum(&g);
        for i in 0..g.rows() {
            let row: f64 = (0..g.cols()).map(|j| g.get(i, j) * s.col_strategy.probs()[j]).sum();
            prop_assert!(row <= s.value + 1e-7);
        }
    }

    #[test]
    fn projection_and_transposition(g in matrix_game()) {
        let p = g.project();
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                prop_assert_eq!(p.get(i, j), -g.cell(i, j).1);
            }
        }
        prop_assert_eq!(g.transpose().transpose(), g.clone());
        let t = g.transpose();
        for a in g.joint_actions() {
            let (x, y) = g.payoff(a).unwrap();
            prop_assert_eq!(t.payoff(a.swapped()).unwrap(), (y, x));
        }
    }

    #[test]
    fn efficient_solutions_maximize_the_sum(g in matrix_game()) {
        let eff = g.efficient_solutions();
        prop_assert!(!eff.is_empty());
        let best = g.joint_actions().map(|a| { let (x, y) = g.payoff(a).unwrap(); x + y }).fold(f64::NEG_INFINITY, f64::max);
        for a in &eff {
            let (x, y) = g.payoff(*a).unwrap();
            prop_assert_eq!(x + y, best);
        }
    }

    #[test]
    fn punishment_holds_deviators_to_the_negated_value(g in matrix_game()) {
        let plan = pcmas::punishment_plan(&g);
        // deviator in the player-2 seat against the player-1 punishing strategy
        for j in 0..g.cols() {
            let pay: f64 = (0..g.rows()).map(|i| plan.punish_as_p1.probs()[i] * g.cell(i, j).1).sum();
            prop_assert!(pay <= -plan.v + 1e-7);
        }
        for i in 0..g.rows() {
            let pay: f64 = (0..g.cols()).map(|j| plan.punish_as_p2.probs()[j] * g.cell(i, j).0).sum();
            prop_assert!(pay <= -plan.v_prime + 1e-7);
        }
    }

    #[test]
    fn deterrence_is_monotone_and_p_min_is_least(g in matrix_game(), n in 2usize..40) {
        let law = g.efficient_solutions()[0];
        let r = deterrence_report(&g, law, n).unwrap();
        if r.has_incentive() {
            let deters: Vec<bool> = (0..n).map(|p| r.deters(p)).collect();
            for w in deters.windows(2) {
                prop_assert!(!w[0] || w[1], "deterrence lost when adding a punisher");
            }
            prop_assert_eq!(r.p_min, deters.iter().position(|&d| d));
        } else {
            prop_assert_eq!(r.p_min, Some(0));
        }
    }

    #[test]
    fn boltzmann_is_normalized(q in prop::collection::vec(-1e3f64..1e3, 1..6), t in 1e-3f64..1e6) {
        let p = boltzmann(&q, t).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    #[test]
    fn bql_stays_in_the_reward_hull(updates in prop::collection::vec((0usize..2, 0usize..4), 1..2000), alpha in 0.0f64..=1.0) {
        let pd = fixtures::teaching_pd();
        let mut s = BqlState::new(alpha);
        for (a, k) in updates {
            s.update(a, pd.student_payoff(k / 2, k % 2));
            prop_assert!(s.q.iter().all(|q| (-13.0..=13.0).contains(q)));
        }
    }

    #[test]
    fn ql_update_touches_one_cell(memory in 1usize..=3, s0 in 0usize..64, a in 0usize..2, r in -20.0f64..20.0, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let mut q = QlState::new(memory, 0.1, 0.9, &mut rng).unwrap();
        let n = q.num_states();
        for (k, cell) in q.q.iter_mut().enumerate() {
            *cell = [k as f64, -(k as f64)];
        }
        let s0 = s0 % n;
        let before = q.q.clone();
        q.update(s0, a, r, (s0 + 1) % n);
        let changed = (0..n).flat_map(|s| (0..2).map(move |b| (s, b))).filter(|&(s, b)| q.q[s][b] != before[s][b]).count();
        prop_assert!(changed <= 1);
        for (s, b) in (0..n).flat_map(|s| (0..2).map(move |b| (s, b))) {
            if (s, b) != (s0, a) {
                prop_assert_eq!(q.q[s][b], before[s][b]);
            }
        }
    }

    #[test]
    fn classification_ignores_a_common_shift(a in payoff(), b in payoff(), c in payoff(), d in payoff(), k in payoff()) {
        let g = TeachingGame::symmetric(a, b, c, d);
        let h = TeachingGame::symmetric(a + k, b + k, c + k, d + k);
        prop_assert_eq!(g.classify(), h.classify());
    }

    #[test]
    fn tft_mirrors_and_2tft_is_never_harsher(seed: u64, t in 0.3f64..5.0) {
        let pd = fixtures::teaching_pd();
        let run = |teacher: &TeacherStrategy| run_session(&Session {
            game: &pd,
            student: LearnerConfig::blind(0.1),
            teacher,
            iterations: 300,
            schedule: TemperatureSchedule::fixed(t),
        }, seed).unwrap();
        let tft = run(&TeacherStrategy::Tft);
        for w in tft.steps.windows(2) {
            prop_assert_eq!(w[1].teacher, w[0].student);
        }
        let two = run(&TeacherStrategy::TwoTft);
        for (n, step) in two.steps.iter().enumerate() {
            if step.teacher == 1 {
                // what TFT would have played against this same history
                prop_assert!(n >= 1 && two.steps[n - 1].student == 1);
            }
        }
        let coop = two.steps.iter().filter(|s| s.student == 0).count();
        prop_assert_eq!(two.coop_rate(), coop as f64 / 300.0);
    }

    #[test]
    fn model_rows_are_distributions(cells in 2usize..30, t in 0.05f64..80.0, alpha in 0.0f64..=1.0) {
        let pd = fixtures::teaching_pd();
        let model = build_tmdp(&pd, QGrid::new(-13.0, 13.0, cells).unwrap(), t, alpha).unwrap();
        for tr in &model.transitions {
            let succ: Vec<_> = tr.successors().collect();
            prop_assert!(succ.len() <= 2);
            prop_assert!((succ.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert!(model.reward.iter().all(|u| (0.0..=1.0).contains(u)));
    }

    #[test]
    fn snapping_is_idempotent_and_clamped(cells in 2usize..300, q1 in -30.0f64..30.0, q2 in -30.0f64..30.0) {
        let g = QGrid::new(-13.0, 13.0, cells).unwrap();
        let s = g.snap([q1, q2]);
        prop_assert!(s < g.num_states());
        prop_assert_eq!(g.snap(g.state_q(s)), s);
        prop_assert_eq!(s, g.snap([q1.clamp(-13.0, 13.0), q2.clamp(-13.0, 13.0)]));
    }

    #[test]
    fn joint_actions_round_trip_as_text(i in 1usize..50, j in 1usize..50) {
        let a = JointAction::from_one_based(i, j).unwrap();
        prop_assert_eq!(a.to_string().parse::<JointAction>().unwrap(), a);
    }
}

#[test]
fn boltzmann_limits() {
    let cold = boltzmann(&[1.0, 0.0], 1e-3).unwrap();
    assert!(cold[0] > 1.0 - 1e-12);
    let hot = boltzmann(&[13.0, -13.0], 1e6).unwrap();
    assert!((hot[0] - 0.5).abs() < 1e-4);
}

#[test]
fn bql_hull_over_a_million_updates() {
    use rand::Rng;
    let pd = fixtures::teaching_pd();
    let mut rng = rng_from_seed(11);
    let mut s = BqlState::new(0.1);
    for _ in 0..1_000_000 {
        let (a, t) = (rng.gen_range(0..2), rng.gen_range(0..2));
        s.update(a, pd.student_payoff(a, t));
        assert!(s.q.iter().all(|q| (-13.0..=13.0).contains(q)));
    }
}
