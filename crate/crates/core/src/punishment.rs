//! Punishing strategies, deterrence thresholds and social-law selection for
//! iterated two-person games.
//!
//! A punisher that meets a deviator as player 1 plays player 1's optimal
//! strategy in the projected game `g_p`; as player 2 it plays player 1's
//! optimal strategy in `(g^T)_p`. Either way the deviator's expected payoff
//! is held to the negated projected value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{JointAction, MatrixGame};
use crate::zero_sum::{solve_zero_sum, MixedStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PunishmentPlan {
    /// Strategy over player-1 actions, used when the punisher is player 1.
    pub punish_as_p1: MixedStrategy,
    /// Strategy over player-2 actions, used when the punisher is player 2.
    pub punish_as_p2: MixedStrategy,
    /// Value of `g_p`; a deviator in the player-2 seat gets at most `-v`.
    pub v: f64,
    /// Value of `(g^T)_p`; a deviator in the player-1 seat gets at most `-v'`.
    pub v_prime: f64,
}

impl PunishmentPlan {
    /// Expected payoff ceiling of a deviator facing a punisher, averaged
    /// over a fair role assignment.
    pub fn minimized_malicious_payoff(&self) -> f64 {
        -(self.v + self.v_prime) / 2.0
    }
}

pub fn punishment_plan(game: &MatrixGame) -> PunishmentPlan {
    let as_p1 = solve_zero_sum(&game.project());
    let as_p2 = solve_zero_sum(&game.transpose().project());
    PunishmentPlan {
        punish_as_p1: as_p1.row_strategy,
        punish_as_p2: as_p2.row_strategy,
        v: as_p1.value,
        v_prime: as_p2.value,
    }
}

/// Best payoffs a deviator can get against a law-abiding opponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incentive {
    /// Best player-1 payoff when player 2 plays `law.col`.
    pub b: f64,
    /// Best player-2 payoff when player 1 plays `law.row`.
    pub b_prime: f64,
}

impl Incentive {
    pub fn total(&self) -> f64 {
        self.b + self.b_prime
    }
}

fn check_law(game: &MatrixGame, law: JointAction) -> Result<()> {
    game.payoff(law).map(|_| ())
}

pub fn incentive(game: &MatrixGame, law: JointAction) -> Result<Incentive> {
    check_law(game, law)?;
    let b = (0..game.rows())
        .map(|i| game.cell(i, law.col).0)
        .fold(f64::NEG_INFINITY, f64::max);
    let b_prime = (0..game.cols())
        .map(|j| game.cell(law.row, j).1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Incentive { b, b_prime })
}

/// The efficient solution with the smallest `b + b'`; ties go to the
/// lexicographically first joint action.
pub fn best_social_law(game: &MatrixGame) -> JointAction {
    let mut best: Option<(JointAction, f64)> = None;
    for law in game.efficient_solutions() {
        let total = incentive(game, law)
            .expect("efficient solutions are in bounds")
            .total();
        if best.is_none_or(|(_, t)| total < t) {
            best = Some((law, total));
        }
    }
    best.expect("a game always has an efficient solution").0
}

/// Everything needed to size a punishing population for one social law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterrenceReport {
    pub law: JointAction,
    pub b: f64,
    pub b_prime: f64,
    pub e: f64,
    pub e_prime: f64,
    pub v: f64,
    pub v_prime: f64,
    pub n: usize,
    /// Fewest punishers that make deviation unprofitable; `None` when even
    /// `n - 1` punishers are not enough. Serialized as `"impossible"`.
    #[serde(with = "punisher_count")]
    pub p_min: Option<usize>,
    pub plan: PunishmentPlan,
}

mod punisher_count {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Count(usize),
        Word(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(p) => Repr::Count(*p).serialize(s),
            None => Repr::Word("impossible".into()).serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Count(p) => Ok(Some(p)),
            Repr::Word(w) if w == "impossible" => Ok(None),
            Repr::Word(w) => Err(serde::de::Error::custom(format!("bad p_min `{w}`"))),
        }
    }
}

impl DeterrenceReport {
    /// True when some deviation beats the law against a law-abiding opponent.
    pub fn has_incentive(&self) -> bool {
        self.b + self.b_prime > self.e + self.e_prime
    }

    /// Expected per-encounter payoff of a lone deviator when `p` of the other
    /// `n - 1` agents punish and the rest obey the law.
    pub fn expected_malicious_payoff(&self, p: usize) -> f64 {
        let others = (self.n - 1) as f64;
        let p = p as f64;
        (others - p) / (2.0 * others) * (self.b + self.b_prime)
            - p / (2.0 * others) * (self.v + self.v_prime)
    }

    /// The deterrence inequality for `p` punishers, evaluated after
    /// multiplying through by `n - 1` so integer payoffs compare exactly:
    /// `(n-1-p)(b+b') - p(v+v') < (n-1)(e+e')`.
    pub fn deters(&self, p: usize) -> bool {
        let others = (self.n - 1) as f64;
        let p = p as f64;
        (others - p) * (self.b + self.b_prime) - p * (self.v + self.v_prime)
            < others * (self.e + self.e_prime)
    }
}

/// Sizes the punishing population for `law` among `n` agents.
///
/// When no deviation pays (`b + b' <= e + e'`) no punishers are needed and
/// `p_min` is 0. Otherwise it is the least `p` in `0..n` satisfying the
/// strict deterrence inequality.
pub fn deterrence_report(game: &MatrixGame, law: JointAction, n: usize) -> Result<DeterrenceReport> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least two agents, got {n}")));
    }
    let inc = incentive(game, law)?;
    let (e, e_prime) = game.payoff(law)?;
    let plan = punishment_plan(game);
    let mut report = DeterrenceReport {
        law,
        b: inc.b,
        b_prime: inc.b_prime,
        e,
        e_prime,
        v: plan.v,
        v_prime: plan.v_prime,
        n,
        p_min: None,
        plan,
    };
    report.p_min = if report.has_incentive() {
        (0..n).find(|&p| report.deters(p))
    } else {
        Some(0)
    };
    Ok(report)
}

pub fn expected_malicious_payoff(game: &MatrixGame, law: JointAction, n: usize, p: usize) -> Result<f64> {
    if p > n.saturating_sub(1) {
        return Err(Error::Domain(format!("{p} punishers among {n} agents")));
    }
    Ok(deterrence_report(game, law, n)?.expected_malicious_payoff(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const LAW_11: JointAction = JointAction::new(0, 0);

    #[test]
    fn dilemma_plan_is_pure_defection() {
        let plan = punishment_plan(&fixtures::prisoners_dilemma());
        assert_eq!(plan.punish_as_p1.as_pure(), Some(1));
        assert_eq!(plan.punish_as_p2.as_pure(), Some(1));
        assert_eq!((plan.v, plan.v_prime), (5.0, 5.0));
        assert_eq!(plan.minimized_malicious_payoff(), -5.0);
    }

    #[test]
    fn incentives_of_the_second_example() {
        let g = fixtures::three_efficient_dilemma();
        assert_eq!(incentive(&g, LAW_11).unwrap().total(), 20.0);
        let i21 = incentive(&g, JointAction::new(1, 0)).unwrap();
        assert_eq!((i21.b, i21.b_prime), (10.0, -5.0));
        assert_eq!(incentive(&g, JointAction::new(0, 1)).unwrap().total(), 5.0);
        assert!(incentive(&g, JointAction::new(2, 0)).is_err());
    }

    #[test]
    fn social_law_choice() {
        assert_eq!(
            best_social_law(&fixtures::three_efficient_dilemma()),
            JointAction::new(0, 1)
        );
        assert_eq!(best_social_law(&fixtures::prisoners_dilemma()), LAW_11);
        let constant = MatrixGame::new(3, 2, vec![(4.0, 4.0); 6]).unwrap();
        assert_eq!(best_social_law(&constant), LAW_11);
        let inc = incentive(&constant, LAW_11).unwrap();
        assert_eq!((inc.b, inc.b_prime), (4.0, 4.0));
    }

    #[test]
    fn deterrence_threshold_for_sixteen_agents() {
        let r = deterrence_report(&fixtures::prisoners_dilemma(), LAW_11, 16).unwrap();
        assert_eq!(r.p_min, Some(9));
        // p = 8 puts the deviator exactly at the law payoff
        assert!((r.expected_malicious_payoff(8) - 2.0).abs() < 1e-12);
        assert!(!r.deters(8));
        assert!(r.deters(9));
    }

    #[test]
    fn two_agents_need_one_punisher() {
        let r = deterrence_report(&fixtures::prisoners_dilemma(), LAW_11, 2).unwrap();
        assert_eq!(r.p_min, Some(1));
    }

    #[test]
    fn no_incentive_needs_no_punishers() {
        let g = MatrixGame::from_rows(&[[(3.0, 3.0), (0.0, 1.0)], [(1.0, 0.0), (0.0, 0.0)]]).unwrap();
        let r = deterrence_report(&g, LAW_11, 10).unwrap();
        assert!(!r.has_incentive());
        assert_eq!(r.p_min, Some(0));
    }

    #[test]
    fn impossible_deterrence() {
        // punishers can hold a deviator to 3 at best, above the law payoff 0
        let g = MatrixGame::from_rows(&[[(0.0, 0.0), (-1.0, 5.0)], [(5.0, -1.0), (3.0, 3.0)]]).unwrap();
        let r = deterrence_report(&g, LAW_11, 8).unwrap();
        assert!(r.has_incentive());
        assert_eq!(r.p_min, None);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["p_min"], "impossible");
    }

    #[test]
    fn domain_errors() {
        let g = fixtures::prisoners_dilemma();
        assert!(matches!(deterrence_report(&g, LAW_11, 1), Err(Error::Domain(_))));
        assert!(expected_malicious_payoff(&g, LAW_11, 16, 16).is_err());
    }

    #[test]
    fn expected_payoff_examples() {
        let g = fixtures::prisoners_dilemma();
        let at = |p| expected_malicious_payoff(&g, LAW_11, 16, p).unwrap();
        // (6/30)*20 - (9/30)*10
        assert!((at(9) - 1.0).abs() < 1e-12);
        assert_eq!(at(0), 10.0);
        assert_eq!(at(15), -5.0);
    }
}
