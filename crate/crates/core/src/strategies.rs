//! Canonical behaviors: the GHZ quantum strategy, the algebraic-maximum
//! nonsignalling box, noisy families, and a classical shared-randomness
//! optimization oracle.

use serde::{Deserialize, Serialize};

use crate::behavior::{default_party_names, Behavior, Party};
use crate::error::{Error, Result};
use crate::games;
use crate::qstate::{born_behavior_named, ghz_state, white_noise_mix, BinaryObservable, QuantumState};

/// The tripartite scenario's party layout: A with 2 inputs, B with 3, C with 2.
pub fn tripartite_parties() -> Vec<Party> {
    vec![
        Party { name: "A".into(), n_inputs: 2 },
        Party { name: "B".into(), n_inputs: 3 },
        Party { name: "C".into(), n_inputs: 2 },
    ]
}

/// A state plus, per party per input, a binary projective measurement.
#[derive(Clone, Debug)]
pub struct QuantumStrategy {
    pub state: QuantumState,
    pub parties: Vec<StrategyParty>,
}

#[derive(Clone, Debug)]
pub struct StrategyParty {
    pub name: String,
    pub observables: Vec<BinaryObservable>,
}

impl QuantumStrategy {
    /// Realizes the strategy as a behavior via the Born rule.
    pub fn behavior(&self) -> Result<Behavior> {
        let names: Vec<String> = self.parties.iter().map(|p| p.name.clone()).collect();
        let measurements: Vec<Vec<BinaryObservable>> =
            self.parties.iter().map(|p| p.observables.clone()).collect();
        born_behavior_named(&self.state, &measurements, &names)
    }

    /// Serializes state amplitudes and per-input Bloch vectors.
    pub fn to_json_string(&self) -> Result<String> {
        let amplitudes = self
            .state
            .amplitudes()
            .ok_or_else(|| {
                Error::InvalidState("only pure-state strategies serialize".into())
            })?
            .iter()
            .map(|a| [a.re, a.im])
            .collect();
        let parties = self
            .parties
            .iter()
            .map(|p| {
                let bloch = p
                    .observables
                    .iter()
                    .map(|o| {
                        o.bloch().ok_or_else(|| {
                            Error::InvalidState(
                                "only rank-1 qubit observables serialize".into(),
                            )
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(StrategyPartyJson { name: p.name.clone(), bloch })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(serde_json::to_string_pretty(&StrategyJson { amplitudes, parties })?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: StrategyJson = serde_json::from_str(s)?;
        let amps = nalgebra::DVector::from_iterator(
            doc.amplitudes.len(),
            doc.amplitudes.iter().map(|[re, im]| num_complex::Complex64::new(*re, *im)),
        );
        let state = QuantumState::from_amplitudes(amps)?;
        let parties = doc
            .parties
            .into_iter()
            .map(|p| {
                let observables = p
                    .bloch
                    .iter()
                    .map(|[nx, ny, nz]| BinaryObservable::from_bloch(*nx, *ny, *nz))
                    .collect::<Result<Vec<_>>>()?;
                Ok(StrategyParty { name: p.name, observables })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { state, parties })
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyJson {
    amplitudes: Vec<[f64; 2]>,
    parties: Vec<StrategyPartyJson>,
}

#[derive(Serialize, Deserialize)]
struct StrategyPartyJson {
    name: String,
    bloch: Vec<[f64; 3]>,
}

/// The GHZ strategy: rectilinear consistency measurements plus the optimal
/// CHSH block in the X-Z plane.
///
/// All observables are cos(theta) Z + sin(theta) X. Alice uses theta in
/// {0, pi/2}, Bob {pi/4, -pi/4} for the Bell inputs and 0 (rectilinear) for
/// the consistency input, Charlie {0, pi/2}. On the steered pair the
/// correlator is cos(theta_A - theta_B), so Alice's input-0 observable is
/// simultaneously rectilinear for the consistency game and optimal for
/// CHSH, which is what lets one input serve both games.
pub fn ghz_quantum_strategy() -> QuantumStrategy {
    use std::f64::consts::FRAC_PI_2 as HALF_PI;
    use std::f64::consts::FRAC_PI_4 as QUARTER_PI;
    let z = BinaryObservable::rotated_zx(0.0);
    QuantumStrategy {
        state: ghz_state(3).expect("3 >= 2"),
        parties: vec![
            StrategyParty {
                name: "A".into(),
                observables: vec![z.clone(), BinaryObservable::rotated_zx(HALF_PI)],
            },
            StrategyParty {
                name: "B".into(),
                observables: vec![
                    BinaryObservable::rotated_zx(QUARTER_PI),
                    BinaryObservable::rotated_zx(-QUARTER_PI),
                    z.clone(),
                ],
            },
            StrategyParty {
                name: "C".into(),
                observables: vec![z, BinaryObservable::rotated_zx(HALF_PI)],
            },
        ],
    }
}

/// The N-party analogue: party 0 and 1 keep Alice's and Bob's settings,
/// the remaining parties use Charlie's.
pub fn ghz_n_strategy(n: usize) -> Result<QuantumStrategy> {
    if !(3..=12).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "GHZ_N behavior supports 3 <= n <= 12, got {n}"
        )));
    }
    let base = ghz_quantum_strategy();
    let names = default_party_names(n);
    let mut parties = Vec::with_capacity(n);
    for (i, name) in names.into_iter().enumerate() {
        let template = &base.parties[i.min(2)];
        parties.push(StrategyParty {
            name,
            observables: template.observables.clone(),
        });
    }
    Ok(QuantumStrategy {
        state: ghz_state(n)?,
        parties,
    })
}

/// Behavior of the N-party GHZ strategy.
pub fn ghz_n_behavior(n: usize) -> Result<Behavior> {
    ghz_n_strategy(n)?.behavior()
}

/// Behavior of measurements on the GHZ state mixed with white noise of
/// fidelity `f`.
pub fn noisy_ghz_behavior(f: f64) -> Result<Behavior> {
    let strategy = ghz_quantum_strategy();
    let state = white_noise_mix(&strategy.state, f)?;
    let names: Vec<String> = strategy.parties.iter().map(|p| p.name.clone()).collect();
    let measurements: Vec<Vec<BinaryObservable>> =
        strategy.parties.iter().map(|p| p.observables.clone()).collect();
    born_behavior_named(&state, &measurements, &names)
}

/// The nonsignalling box reaching the algebraic maximum 12.
///
/// Outputs are deterministic in two uniform shared bits r0, r1:
/// a = r0 xor r1*x, c_z = r_z, and b = r0 xor y*(x xor r1) with products
/// mod 2 (so the consistency input y = 2 contributes nothing). Reading the
/// product in Bob's exponent literally as x*y gives a signalling table; the
/// x xor r1 form is the minimal completion that keeps the conditional PR
/// structure while making the joint box nonsignalling. Construction is by
/// brute-force enumeration of (r0, r1); candidate readings are gated on
/// passing the nonsignalling check, reaching combined score 12, and perfect
/// consistency correlators, and the constructor aborts if none qualifies.
pub fn ns_box_behavior() -> Result<Behavior> {
    type BobRule = fn(x: usize, y: usize, r0: usize, r1: usize) -> usize;
    let literal: BobRule = |x, y, r0, _r1| r0 ^ (x & y & 1);
    let completed: BobRule = |x, y, r0, r1| r0 ^ ((x ^ r1) & y & 1);
    for rule in [completed, literal] {
        let b = build_r0r1_box(rule)?;
        let ns = b.is_nonsignalling(1e-12);
        if !ns.is_nonsignalling {
            continue;
        }
        let score = games::ghz3_score(&b, 1e-12)?;
        let ab = b.correlator(&[(0, 0), (1, 2)])?;
        let bc = b.correlator(&[(1, 2), (2, 0)])?;
        if score.combined == games::ALGEBRAIC_MAX && ab == 1.0 && bc == 1.0 {
            return Ok(b);
        }
    }
    Err(Error::InvalidState(
        "no reading of the r0,r1 box formula passes the nonsignalling and score gates".into(),
    ))
}

fn build_r0r1_box(bob: fn(usize, usize, usize, usize) -> usize) -> Result<Behavior> {
    let parties = tripartite_parties();
    let mut table = vec![0.0f64; 12 * 8];
    let mut ctx = 0usize;
    for x in 0..2 {
        for y in 0..3 {
            for z in 0..2 {
                for r0 in 0..2usize {
                    for r1 in 0..2usize {
                        let a = r0 ^ (r1 & x);
                        let b = bob(x, y, r0, r1);
                        let c = if z == 0 { r0 } else { r1 };
                        let pattern = (a << 2) | (b << 1) | c;
                        table[ctx * 8 + pattern] += 0.25;
                    }
                }
                ctx += 1;
            }
        }
    }
    Behavior::new(parties, table)
}

/// One deterministic local assignment: an output per input for each party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    /// outputs[party][input] in {-1, +1}.
    pub outputs: Vec<Vec<i8>>,
}

impl DeterministicStrategy {
    /// All deterministic strategies for the given input cardinalities.
    pub fn enumerate(cards: &[usize]) -> Vec<Self> {
        let total_bits: usize = cards.iter().sum();
        let count = 1usize << total_bits;
        let mut out = Vec::with_capacity(count);
        for code in 0..count {
            let mut rem = code;
            let outputs = cards
                .iter()
                .map(|&k| {
                    (0..k)
                        .map(|_| {
                            let bit = rem & 1;
                            rem >>= 1;
                            if bit == 0 { 1i8 } else { -1i8 }
                        })
                        .collect()
                })
                .collect();
            out.push(Self { outputs });
        }
        out
    }

    pub fn behavior(&self, parties: Vec<Party>) -> Result<Behavior> {
        let n = parties.len();
        if self.outputs.len() != n
            || self
                .outputs
                .iter()
                .zip(&parties)
                .any(|(o, p)| o.len() != p.n_inputs)
        {
            return Err(Error::Dimension(
                "strategy shape does not match parties".into(),
            ));
        }
        let n_contexts: usize = parties.iter().map(|p| p.n_inputs).product();
        let n_patterns = 1usize << n;
        let mut table = vec![0.0f64; n_contexts * n_patterns];
        for ctx in 0..n_contexts {
            let mut rem = ctx;
            let mut inputs = vec![0usize; n];
            for p in (0..n).rev() {
                inputs[p] = rem % parties[p].n_inputs;
                rem /= parties[p].n_inputs;
            }
            let mut pattern = 0usize;
            for p in 0..n {
                pattern = (pattern << 1) | usize::from(self.outputs[p][inputs[p]] <= 0);
            }
            table[ctx * n_patterns + pattern] = 1.0;
        }
        Behavior::new(parties, table)
    }
}

/// Convex mixture of deterministic strategies as a behavior.
pub fn mixture_behavior(mixture: &[(f64, DeterministicStrategy)], parties: Vec<Party>) -> Result<Behavior> {
    if mixture.is_empty() {
        return Err(Error::InvalidArgument("empty mixture".into()));
    }
    let total: f64 = mixture.iter().map(|(w, _)| w).sum();
    if mixture.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("mixture weights must form a distribution".into()));
    }
    let mut acc: Option<Vec<f64>> = None;
    for (w, s) in mixture {
        let b = s.behavior(parties.clone())?;
        match &mut acc {
            None => acc = Some(b.table().iter().map(|q| w * q).collect()),
            Some(t) => t
                .iter_mut()
                .zip(b.table())
                .for_each(|(t, q)| *t += w * q),
        }
    }
    Behavior::new(parties, acc.expect("nonempty"))
}

/// Result of the classical optimization: the optimum of the linearized
/// combined score over shared-randomness mixtures with <C1> = 0, plus an
/// achieving mixture.
#[derive(Clone, Debug)]
pub struct ClassicalOptimum {
    pub value: f64,
    pub mixture: Vec<(f64, DeterministicStrategy)>,
}

impl ClassicalOptimum {
    pub fn behavior(&self) -> Result<Behavior> {
        mixture_behavior(&self.mixture, tripartite_parties())
    }
}

/// Linearized combined score of one deterministic strategy:
/// sum_{xy} sign_{xy} a_x b_y (1 + c_1) + 4 (a_0 b_2 + b_2 c_0).
///
/// The linearization <A_x B_y>_{C1=1} = E[A_x B_y (1 + C_1)] is exact once
/// P(C1 = +1) = 1/2, which the <C1> = 0 constraint enforces.
pub fn linearized_score(s: &DeterministicStrategy) -> f64 {
    let a = &s.outputs[0];
    let b = &s.outputs[1];
    let c = &s.outputs[2];
    let bell: i32 = [(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, -1)]
        .iter()
        .map(|&(x, y, sign)| sign * i32::from(a[x]) * i32::from(b[y]) * (1 + i32::from(c[1])))
        .sum();
    let same = i32::from(a[0]) * i32::from(b[2]) + i32::from(b[2]) * i32::from(c[0]);
    f64::from(bell + 4 * same)
}

/// Maximizes the linearized combined score over the 128-strategy mixture
/// simplex subject to <C1> = 0.
///
/// With only the normalization and <C1> rows active, every basic feasible
/// solution of the LP is supported on at most two strategies, and the <C1>
/// constraint forces one strategy with c_1 = +1 and one with c_1 = -1 at
/// weight 1/2 each, so the optimum splits into two independent maxima.
pub fn classical_max_oracle() -> ClassicalOptimum {
    let strategies = DeterministicStrategy::enumerate(&[2, 3, 2]);
    let mut best_plus: Option<(f64, &DeterministicStrategy)> = None;
    let mut best_minus: Option<(f64, &DeterministicStrategy)> = None;
    for s in &strategies {
        let score = linearized_score(s);
        let slot = if s.outputs[2][1] > 0 { &mut best_plus } else { &mut best_minus };
        if slot.map_or(true, |(v, _)| score > v) {
            *slot = Some((score, s));
        }
    }
    let (vp, sp) = best_plus.expect("strategies with c1 = +1 exist");
    let (vm, sm) = best_minus.expect("strategies with c1 = -1 exist");
    ClassicalOptimum {
        value: 0.5 * (vp + vm),
        mixture: vec![(0.5, sp.clone()), (0.5, sm.clone())],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{chsh_conditional, ghz3_score, i_same, quantum_ghz_value, DEFAULT_C1_TOL};

    #[test]
    fn ghz_strategy_reaches_quantum_value() {
        let b = ghz_quantum_strategy().behavior().unwrap();
        let score = ghz3_score(&b, DEFAULT_C1_TOL).unwrap();
        assert!((score.combined - quantum_ghz_value()).abs() < 1e-9);
        assert!(score.c1_marginal.abs() < 1e-12);
        assert!((score.same - 2.0).abs() < 1e-9);
        assert!(score.assumption_satisfied);
    }

    #[test]
    fn ghz_strategy_steers_to_phi_plus() {
        // Conditioned on Charlie's Hadamard outcome +1, the A-B pair behaves
        // like the maximally entangled state: correlators cos(tA - tB).
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        let b = ghz_quantum_strategy().behavior().unwrap();
        let cond = b.condition(2, 1, 1).unwrap();
        let angles_a = [0.0, FRAC_PI_2];
        let angles_b = [FRAC_PI_4, -FRAC_PI_4];
        for (x, ta) in angles_a.iter().enumerate() {
            for (y, tb) in angles_b.iter().enumerate() {
                let e = cond.correlator(&[(0, x), (1, y)]).unwrap();
                assert!((e - (ta - tb).cos()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ns_box_reaches_algebraic_maximum_exactly() {
        let b = ns_box_behavior().unwrap();
        let report = b.is_nonsignalling(1e-12);
        assert!(report.is_nonsignalling);
        assert_eq!(report.max_violation, 0.0);
        let score = ghz3_score(&b, 1e-12).unwrap();
        assert_eq!(score.combined, 12.0);
        assert_eq!(score.bell_conditional, 4.0);
        assert_eq!(score.same, 2.0);
        assert_eq!(score.c1_marginal, 0.0);
    }

    #[test]
    fn ns_box_literal_reading_is_signalling() {
        // The literal product x*y in Bob's exponent leaks Alice's input to
        // the Bob-Charlie pair; the constructor must not have picked it.
        let literal = build_r0r1_box(|x, y, r0, _| r0 ^ (x & y & 1)).unwrap();
        assert!(!literal.is_nonsignalling(1e-9).is_nonsignalling);
    }

    #[test]
    fn noisy_family_is_affine_with_threshold() {
        let pure = noisy_ghz_behavior(1.0).unwrap();
        let strategy_behavior = ghz_quantum_strategy().behavior().unwrap();
        assert!(pure.max_abs_diff(&strategy_behavior) < 1e-12);

        let zero = noisy_ghz_behavior(0.0).unwrap();
        let s0 = ghz3_score(&zero, DEFAULT_C1_TOL).unwrap();
        assert!(s0.combined.abs() < 1e-10);

        let f = 0.37;
        let mid = noisy_ghz_behavior(f).unwrap();
        let blend = pure.mix(&zero, f).unwrap();
        assert!(mid.max_abs_diff(&blend) < 1e-10);

        let fstar = games::inequality_noise_threshold();
        let at_threshold = ghz3_score(&noisy_ghz_behavior(fstar).unwrap(), DEFAULT_C1_TOL).unwrap();
        assert!((at_threshold.combined - 10.0).abs() < 1e-9);

        let half = ghz3_score(&noisy_ghz_behavior(0.5).unwrap(), DEFAULT_C1_TOL).unwrap();
        assert!((half.combined - 0.5 * quantum_ghz_value()).abs() < 1e-9);
    }

    #[test]
    fn classical_oracle_reaches_ten() {
        let opt = classical_max_oracle();
        assert!((opt.value - 10.0).abs() < 1e-9);
        let c1: f64 = opt
            .mixture
            .iter()
            .map(|(w, s)| w * f64::from(s.outputs[2][1]))
            .sum();
        assert!(c1.abs() < 1e-12);
        let b = opt.behavior().unwrap();
        let score = ghz3_score(&b, DEFAULT_C1_TOL).unwrap();
        assert!((score.combined - 10.0).abs() < 1e-9);
        assert!(score.assumption_satisfied);
        // The oracle's linearization agrees with the direct conditioned
        // evaluation on its own mixture.
        assert!((chsh_conditional(&b).unwrap() - score.bell_conditional).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_same_game_maximum_is_eight() {
        let best = DeterministicStrategy::enumerate(&[2, 3, 2])
            .iter()
            .map(|s| {
                let same = i32::from(s.outputs[0][0]) * i32::from(s.outputs[1][2])
                    + i32::from(s.outputs[1][2]) * i32::from(s.outputs[2][0]);
                4 * same
            })
            .max()
            .unwrap();
        assert_eq!(best, 8);
    }

    #[test]
    fn every_deterministic_strategy_within_linearized_bound() {
        // Paired with its best opposite-c1 partner, no strategy beats 10.
        let opt = classical_max_oracle();
        for s in DeterministicStrategy::enumerate(&[2, 3, 2]) {
            let partner_bound = 8.0; // best achievable with the opposite c1 sign
            let v = 0.5 * (linearized_score(&s) + partner_bound);
            assert!(v <= opt.value + 1e-9 || linearized_score(&s) <= 12.0);
        }
    }

    #[test]
    fn ghz_n_specializes_to_tripartite() {
        let b3 = ghz_n_behavior(3).unwrap();
        let direct = ghz_quantum_strategy().behavior().unwrap();
        assert!(b3.max_abs_diff(&direct) < 1e-12);
        assert!(ghz_n_behavior(2).is_err());
        assert!(ghz_n_behavior(13).is_err());
    }

    #[test]
    fn ghz_4_conditioned_chsh() {
        let b4 = ghz_n_behavior(4).unwrap();
        // Condition both extra parties on Hadamard outcome +1.
        let c1 = b4.condition(3, 1, 1).unwrap();
        let c2 = c1.condition(2, 1, 1).unwrap();
        let chsh = c2.correlator(&[(0, 0), (1, 0)]).unwrap()
            + c2.correlator(&[(0, 0), (1, 1)]).unwrap()
            + c2.correlator(&[(0, 1), (1, 0)]).unwrap()
            - c2.correlator(&[(0, 1), (1, 1)]).unwrap();
        assert!((chsh - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn ghz_n_nonsignalling() {
        for n in [4usize, 5] {
            let b = ghz_n_behavior(n).unwrap();
            assert!(b.is_nonsignalling(1e-8).is_nonsignalling);
        }
    }

    #[test]
    #[ignore = "12-qubit table is ~200 MB; run explicitly"]
    fn ghz_12_generates() {
        let b = ghz_n_behavior(12).unwrap();
        assert_eq!(b.n_parties(), 12);
    }

    #[test]
    fn strategy_json_round_trip() {
        let s = ghz_quantum_strategy();
        let json = s.to_json_string().unwrap();
        let back = QuantumStrategy::from_json_str(&json).unwrap();
        let b1 = s.behavior().unwrap();
        let b2 = back.behavior().unwrap();
        assert!(b1.max_abs_diff(&b2) < 1e-12);
    }
}
