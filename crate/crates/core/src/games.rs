//! Evaluators for the Bell-plus-consistency inequality on tripartite
//! behaviors.
//!
//! The scored quantity is I_Bell^{C1=1} + 4*I_same, where I_Bell is the
//! CHSH combination between parties A and B conditioned on party C
//! outputting +1 on input 1, and I_same = <A0 B2> + <B2 C0> rewards all
//! parties agreeing on the consistency inputs. Under any model built from
//! bipartite resources plus shared randomness (and <C1> = 0) the combined
//! score is at most 10; the GHZ state reaches 2*sqrt(2) + 8 and general
//! nonsignalling boxes reach the algebraic maximum 12.

use serde::Serialize;

use crate::behavior::Behavior;
use crate::error::{Error, Result};

/// Combined-score bound for bipartite-resource-plus-shared-randomness
/// models under the <C1> = 0 assumption.
pub const BIPARTITE_CAUSAL_BOUND: f64 = 10.0;
/// Algebraic maximum of the combined score.
pub const ALGEBRAIC_MAX: f64 = 12.0;
/// Default tolerance on the |<C1>| <= tol assumption flag.
pub const DEFAULT_C1_TOL: f64 = 1e-6;

/// Combined score of the GHZ quantum strategy, 2*sqrt(2) + 8.
pub fn quantum_ghz_value() -> f64 {
    8.0 + 2.0 * std::f64::consts::SQRT_2
}

/// Noise threshold where the combined GHZ score crosses the bound:
/// 10 / (8 + 2*sqrt(2)).
pub fn inequality_noise_threshold() -> f64 {
    BIPARTITE_CAUSAL_BOUND / quantum_ghz_value()
}

/// Both game values, the conditioning marginal, and their combination.
#[derive(Clone, Debug, Serialize)]
pub struct Ghz3Score {
    /// CHSH between A and B conditioned on C outputting +1 on input 1.
    pub bell_conditional: f64,
    /// <A0 B2> + <B2 C0>.
    pub same: f64,
    /// <C1>.
    pub c1_marginal: f64,
    /// bell_conditional + 4 * same.
    pub combined: f64,
    /// Whether |<C1>| is within tolerance; the bound 10 applies only then.
    pub assumption_satisfied: bool,
}

const PARTY_A: usize = 0;
const PARTY_B: usize = 1;
const PARTY_C: usize = 2;

fn check_shape(behavior: &Behavior, need_b3: bool) -> Result<()> {
    let parties = behavior.parties();
    if parties.len() != 3 {
        return Err(Error::Dimension(format!(
            "tripartite behavior required, got {} parties",
            parties.len()
        )));
    }
    let min_b = if need_b3 { 3 } else { 2 };
    if parties[PARTY_A].n_inputs < 2 || parties[PARTY_B].n_inputs < min_b
        || parties[PARTY_C].n_inputs < 2
    {
        return Err(Error::InvalidArgument(format!(
            "input cardinalities (A:{}, B:{}, C:{}) too small for the game",
            parties[PARTY_A].n_inputs, parties[PARTY_B].n_inputs, parties[PARTY_C].n_inputs
        )));
    }
    Ok(())
}

/// <A0B0> + <A0B1> + <A1B0> - <A1B1>, all conditioned on party C giving +1
/// on input 1.
pub fn chsh_conditional(behavior: &Behavior) -> Result<f64> {
    check_shape(behavior, false)?;
    let conditioned = behavior.condition(PARTY_C, 1, 1)?;
    let e = |x: usize, y: usize| conditioned.correlator(&[(0, x), (1, y)]);
    Ok(e(0, 0)? + e(0, 1)? + e(1, 0)? - e(1, 1)?)
}

/// <A0 B2> + <B2 C0>.
pub fn i_same(behavior: &Behavior) -> Result<f64> {
    check_shape(behavior, true)?;
    let ab = behavior.correlator(&[(PARTY_A, 0), (PARTY_B, 2)])?;
    let bc = behavior.correlator(&[(PARTY_B, 2), (PARTY_C, 0)])?;
    Ok(ab + bc)
}

/// Assembles both game values, <C1>, and the combined score.
pub fn ghz3_score(behavior: &Behavior, c1_tol: f64) -> Result<Ghz3Score> {
    let bell_conditional = chsh_conditional(behavior)?;
    let same = i_same(behavior)?;
    let c1_marginal = behavior.correlator(&[(PARTY_C, 1)])?;
    Ok(Ghz3Score {
        bell_conditional,
        same,
        c1_marginal,
        combined: bell_conditional + 4.0 * same,
        assumption_satisfied: c1_marginal.abs() <= c1_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::Party;

    fn parties() -> Vec<Party> {
        vec![
            Party { name: "A".into(), n_inputs: 2 },
            Party { name: "B".into(), n_inputs: 3 },
            Party { name: "C".into(), n_inputs: 2 },
        ]
    }

    fn deterministic(outputs: [i8; 3]) -> Behavior {
        let mut pattern = 0usize;
        for o in outputs {
            pattern = (pattern << 1) | usize::from(o <= 0);
        }
        let mut table = vec![0.0; 12 * 8];
        for ctx in 0..12 {
            table[ctx * 8 + pattern] = 1.0;
        }
        Behavior::new(parties(), table).unwrap()
    }

    #[test]
    fn deterministic_all_plus_scores() {
        let b = deterministic([1, 1, 1]);
        assert!((chsh_conditional(&b).unwrap() - 2.0).abs() < 1e-12);
        assert!((i_same(&b).unwrap() - 2.0).abs() < 1e-12);
        let score = ghz3_score(&b, DEFAULT_C1_TOL).unwrap();
        assert!((score.combined - 10.0).abs() < 1e-12);
        assert!((score.c1_marginal - 1.0).abs() < 1e-12);
        assert!(!score.assumption_satisfied);
    }

    #[test]
    fn anticorrelated_same_game() {
        let b = deterministic([1, -1, 1]);
        assert!((i_same(&b).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_behavior_scores_zero() {
        let b = Behavior::uniform(parties()).unwrap();
        assert!(i_same(&b).unwrap().abs() < 1e-12);
        let score = ghz3_score(&b, DEFAULT_C1_TOL).unwrap();
        assert!(score.combined.abs() < 1e-12);
        assert!(score.assumption_satisfied);
    }

    #[test]
    fn missing_inputs_rejected() {
        let small = vec![
            Party { name: "A".into(), n_inputs: 2 },
            Party { name: "B".into(), n_inputs: 2 },
            Party { name: "C".into(), n_inputs: 2 },
        ];
        let b = Behavior::uniform(small).unwrap();
        assert!(i_same(&b).is_err());
        assert!(chsh_conditional(&b).is_ok());
    }

    #[test]
    fn combined_is_exact_combination() {
        let b = Behavior::uniform(parties()).unwrap();
        let s = ghz3_score(&b, 1e-6).unwrap();
        assert_eq!(s.combined, s.bell_conditional + 4.0 * s.same);
    }
}
