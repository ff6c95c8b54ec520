//! Acceptance criteria. Prints one line per criterion and exits non-zero if
//! any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use pcmas::experiment::{self, blockpush, dif_sweep, horizon_for_bias, mc_value, BlockPushConfig, SweepSetup};
use pcmas::fixtures;
use pcmas::learner::{boltzmann, BqlState, LearnerConfig, TemperatureSchedule};
use pcmas::population::{run_population, MaliciousPolicy, PopulationConfig};
use pcmas::punishment::{deterrence_report, incentive, punishment_plan};
use pcmas::rng::rng_from_seed;
use pcmas::teaching::{run_session, Session, TeacherStrategy};
use pcmas::tmdp::{build_tmdp, evaluate_mixed, evaluate_policy, value_iteration, Policy, QGrid};
use pcmas::zero_sum::solve_zero_sum;
use pcmas::JointAction;

const SEED: u64 = 1996;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn c1() -> Outcome {
    let g = fixtures::prisoners_dilemma();
    let start = Instant::now();
    let plan = punishment_plan(&g);
    let value = solve_zero_sum(&g.project()).value;
    let elapsed = start.elapsed();
    let pure_second = |p: &[f64]| close(p[0], 0.0, 1e-9) && close(p[1], 1.0, 1e-9);
    let pass = pure_second(plan.punish_as_p1.probs())
        && pure_second(plan.punish_as_p2.probs())
        && close(plan.v, 5.0, 1e-6)
        && close(plan.v_prime, 5.0, 1e-6)
        && close(value, 5.0, 1e-6)
        && elapsed < Duration::from_millis(1);
    outcome(pass, format!("v={} v'={} value(g_p)={value} in {:?}", plan.v, plan.v_prime, elapsed))
}

fn c2() -> Outcome {
    let start = Instant::now();
    let r = deterrence_report(&fixtures::prisoners_dilemma(), JointAction::new(0, 0), 16).unwrap();
    let g2 = fixtures::three_efficient_dilemma();
    let totals: Vec<f64> = [(0, 0), (0, 1), (1, 0)]
        .iter()
        .map(|&(i, j)| incentive(&g2, JointAction::new(i, j)).unwrap().total())
        .collect();
    let elapsed = start.elapsed();
    // least p with p/(n-1) > 8/15
    let by_ratio = (0..16usize).find(|&p| 15 * p > 8 * (16 - 1));
    let pass = r.p_min == Some(9)
        && r.p_min == by_ratio
        && close(totals[0], 20.0, 1e-9)
        && close(totals[1], 5.0, 1e-9)
        && close(totals[2], 5.0, 1e-9)
        && elapsed < Duration::from_millis(1);
    outcome(pass, format!("p_min={:?} incentives={totals:?} in {:?}", r.p_min, elapsed))
}

fn population(punishers: usize, policy: MaliciousPolicy, seed: u64) -> PopulationConfig {
    PopulationConfig {
        n: 16,
        punishers,
        conformers: 15 - punishers,
        malicious: 1,
        game: fixtures::prisoners_dilemma(),
        law: JointAction::new(0, 0),
        malicious_policy: policy,
        mal_vs_mal_payoff: 0.0,
        iterations: 100_000,
        seed,
    }
}

fn c3() -> Outcome {
    let start = Instant::now();
    let free = run_population(&population(0, MaliciousPolicy::Exploit, SEED)).unwrap().malicious;
    let held = run_population(&population(9, MaliciousPolicy::Exploit, SEED + 1)).unwrap().malicious;
    let rational = run_population(&population(9, MaliciousPolicy::Rational, SEED + 2)).unwrap();
    let elapsed = start.elapsed();
    let within = |mean: f64, se: f64, expected: f64| (mean - expected).abs() <= 3.0 * se.max(1e-12);
    let pass = within(free.mean, free.standard_error(), 10.0)
        && within(held.mean, held.standard_error(), 1.0)
        && rational.deviations == 0
        && rational.punishments == 0
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "p=0 mean {:.4} (se {:.4}); p=9 mean {:.4} (se {:.4}); rational deviations {} punishments {}; {}",
            free.mean,
            free.standard_error(),
            held.mean,
            held.standard_error(),
            rational.deviations,
            rational.punishments,
            secs(elapsed)
        ),
    )
}

fn c4() -> Outcome {
    let mut rng = rng_from_seed(SEED);
    let mut worst_norm = 0.0f64;
    for _ in 0..10_000 {
        let q: Vec<f64> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let t = 10f64.powf(rng.gen_range(-3.0..6.0));
        let p = boltzmann(&q, t).unwrap();
        worst_norm = worst_norm.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    let decay = TemperatureSchedule::standard_decay();
    let t200 = decay.temperature_at(200);

    let pd = fixtures::teaching_pd();
    let mut bql = BqlState::new(0.1);
    let mut confined = true;
    for _ in 0..1_000_000 {
        let (a, b) = (rng.gen_range(0..2), rng.gen_range(0..2));
        bql.update(a, pd.student_payoff(a, b));
        confined &= bql.q.iter().all(|q| (-13.0..=13.0).contains(q));
    }

    let session = Session {
        game: &pd,
        student: LearnerConfig::q(1, 0.1, 0.9),
        teacher: &TeacherStrategy::Learner(None),
        iterations: 5000,
        schedule: decay,
    };
    let reproducible = run_session(&session, 77).unwrap() == run_session(&session, 77).unwrap();

    let pass = worst_norm <= 1e-12 && close(t200, 0.5, 1e-6) && confined && reproducible;
    outcome(
        pass,
        format!("norm error {worst_norm:.1e}; T(200)={t200:.9}; hull {confined}; reproducible {reproducible}"),
    )
}

fn c5() -> Outcome {
    let pd = fixtures::teaching_pd();
    let (gamma0, tol) = (0.99, 1e-6);
    let start = Instant::now();
    let model = build_tmdp(&pd, QGrid::for_game(&pd, 200).unwrap(), 1.0, 0.1).unwrap();
    let sol = value_iteration(&model, gamma0, tol).unwrap();
    let elapsed = start.elapsed();

    let r = &sol.residuals;
    let monotone = r.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let envelope = r.iter().enumerate().all(|(k, x)| *x <= r[0] * gamma0.powi(k as i32) + 1e-12);

    let n = model.num_states();
    let others = [
        evaluate_policy(&model, &vec![0; n], gamma0, tol).unwrap(),
        evaluate_policy(&model, &vec![1; n], gamma0, tol).unwrap(),
        evaluate_mixed(&model, |_| [0.5, 0.5], gamma0, tol).unwrap(),
    ];
    let worst = others
        .iter()
        .flat_map(|o| o.iter().zip(&sol.values).map(|(x, v)| x - v))
        .fold(f64::NEG_INFINITY, f64::max);

    let pass = monotone && envelope && worst <= 2.0 * tol && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "{} sweeps; monotone {monotone}; envelope {envelope}; max(other - V) {worst:.2e}; build+solve {}",
            r.len(),
            secs(elapsed)
        ),
    )
}

fn c6() -> Outcome {
    let pd = fixtures::teaching_pd();
    let (gamma0, t) = (0.99, 1.0);
    let horizon = horizon_for_bias(gamma0, 1e-3);
    let mut bands = Vec::new();
    let mut detail = Vec::new();
    for cells in [100, 200, 400] {
        let policy = Arc::new(Policy::solve(&pd, QGrid::for_game(&pd, cells).unwrap(), t, 0.1, gamma0, 1e-6).unwrap());
        let v0 = policy.value_at([0.0, 0.0]);
        let (mc, _) = mc_value(
            &TeacherStrategy::Policy(policy),
            LearnerConfig::blind(0.1),
            &pd,
            TemperatureSchedule::fixed(t),
            gamma0,
            horizon,
            10_000,
            SEED,
        )
        .unwrap();
        bands.push((v0 - mc).abs());
        detail.push(format!("{cells}: V={v0:.3} MC={mc:.3}"));
    }
    let pass = bands[2] <= bands[0];
    outcome(pass, format!("{}; bands {bands:.3?}", detail.join(", ")))
}

fn c7_c10() -> (Outcome, Outcome) {
    let start = Instant::now();
    let pd = fixtures::teaching_pd();
    let temps = experiment::default_temperatures();
    let sweep = |student: LearnerConfig, teacher: &TeacherStrategy, t: f64| {
        let setup = SweepSetup { game: &pd, student, teacher, trials: 100, seed: SEED };
        experiment::temperature_sweep(&setup, "acceptance", t, &[10_000]).unwrap()[0].mean
    };
    let bql = LearnerConfig::blind(0.1);
    let two_bql: Vec<f64> = temps.iter().map(|&t| sweep(bql, &TeacherStrategy::Learner(None), t)).collect();
    let argmin = (0..temps.len()).min_by(|&a, &b| two_bql[a].total_cmp(&two_bql[b])).unwrap();
    let drop_at = temps[argmin];
    let low_best = temps
        .iter()
        .zip(&two_bql)
        .filter(|(t, _)| **t <= 1.0)
        .map(|(_, r)| *r)
        .fold(f64::NEG_INFINITY, f64::max);

    let ql1 = LearnerConfig::q(1, 0.1, 0.9);
    let high: Vec<(f64, f64)> =
        temps.iter().filter(|&&t| t >= 3.0).map(|&t| (t, sweep(ql1, &TeacherStrategy::Tft, t))).collect();
    let high_min = high.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();

    let c7 = outcome(
        (2.0..=3.0).contains(&drop_at) && low_best >= 0.7 && high_min >= 0.9 && elapsed < Duration::from_secs(1800),
        format!(
            "two-BQL minimum {:.3} at T={drop_at}; best at T<=1 {low_best:.3}; TFT vs QL(1) min over T>=3 {high_min:.3}; {}",
            two_bql[argmin],
            secs(elapsed)
        ),
    );

    let m1 = high.iter().find(|p| p.0 == 3.0).expect("grid has T=3").1;
    let m2 = sweep(LearnerConfig::q(2, 0.1, 0.9), &TeacherStrategy::Tft, 3.0);
    let c10 = outcome(m2 < m1, format!("T=3: memory 1 {m1:.3}, memory 2 {m2:.3}"));
    (c7, c10)
}

fn c8() -> Outcome {
    let matrices = fixtures::dif_matrices();
    let points = dif_sweep(
        &matrices,
        &fixtures::DIF_GAMMAS,
        LearnerConfig::q(1, 0.1, 0.9),
        &TeacherStrategy::Tft,
        TemperatureSchedule::standard_decay(),
        10_000,
        100,
        SEED,
    )
    .unwrap();
    let mut low = (0, 0);
    let mut high = (0, 0);
    for p in &points {
        let [a, b, c, d] = p.entries;
        let g = p.gamma;
        let dif = a + b + g * (a + c) - (c + d + g * (b + d));
        if dif < 0.0 {
            low.1 += 1;
            low.0 += usize::from(p.mean < 0.2);
        } else if dif > 8.0 {
            high.1 += 1;
            high.0 += usize::from(p.mean > 0.65);
        }
    }
    let frac = |(k, n): (usize, usize)| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let pass = matrices.len() >= 20 && frac(low) >= 0.8 && frac(high) >= 0.7;
    outcome(
        pass,
        format!(
            "{} matrices; DIF<0: {}/{} below 0.20 ({:.0}%); DIF>8: {}/{} above 0.65 ({:.0}%)",
            matrices.len(),
            low.0,
            low.1,
            100.0 * frac(low),
            high.0,
            high.1,
            100.0 * frac(high)
        ),
    )
}

fn c9() -> Outcome {
    let start = Instant::now();
    let config = BlockPushConfig::default();
    let ks: Vec<usize> = (0..=40).map(|k| k * 250).collect();
    let result = blockpush(&fixtures::block_pushing(), &config, &ks).unwrap();
    let elapsed = start.elapsed();
    let curve: Vec<f64> = result.curve.iter().map(|p| p.hard_mean).collect();
    let (first, last) = (curve[0], *curve.last().unwrap());
    let peak = (0..curve.len()).max_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap();
    let base = result.baseline.hard_mean;
    let interior = peak > 0 && peak + 1 < curve.len() && curve[peak] > first && curve[peak] > last;
    let pass = (6900.0..=8300.0).contains(&base)
        && interior
        && result.best().hard_mean > base
        && elapsed < Duration::from_secs(900);
    outcome(
        pass,
        format!(
            "baseline {base:.0}; K=0 {first:.0}; peak {:.0} at K={}; K={} {last:.0}; {}",
            curve[peak],
            ks[peak],
            ks[ks.len() - 1],
            secs(elapsed)
        ),
    )
}

fn main() {
    // libtest-style flags such as --nocapture are accepted and ignored
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    experiment::configure_threads();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("C1", c1()),
        ("C2", c2()),
        ("C3", c3()),
        ("C4", c4()),
        ("C5", c5()),
        ("C6", c6()),
    ];
    let (c7, c10) = c7_c10();
    results.push(("C7", c7));
    results.push(("C8", c8()));
    results.push(("C9", c9()));
    results.push(("C10", c10));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{name} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
