//! The conditional-distribution data model: marginals, conditioning,
//! correlators, nonsignalling verification, and serialization.
//!
//! A [`Behavior`] stores one probability distribution over joint +/-1
//! outputs per joint input context. The table is dense; at the paper-scale
//! cardinalities this is negligible and inflated scenarios reuse the same
//! type at larger cardinalities.
//!
//! Output patterns are indexed lexicographically with +1 before -1: bit 0
//! of a pattern stands for outcome +1, party 0 occupies the most
//! significant bit. Contexts are indexed row-major with party 0 slowest.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on conditional distributions summing to one.
pub const DIST_SUM_TOL: f64 = 1e-9;
/// Default nonsignalling tolerance; callers may tighten for exact-rational behaviors.
pub const DEFAULT_NS_TOL: f64 = 1e-8;

/// One party of a behavior: a name and an input alphabet size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub name: String,
    pub n_inputs: usize,
}

/// A family of conditional distributions P(outputs | inputs) with binary
/// +/-1 outputs per party.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    parties: Vec<Party>,
    table: Vec<f64>,
}

/// Outcome of a nonsignalling check.
#[derive(Clone, Debug, Serialize)]
pub struct NonsignallingReport {
    pub is_nonsignalling: bool,
    pub max_violation: f64,
    pub tol: f64,
    /// Party and context realizing the largest marginal discrepancy.
    pub worst: Option<SignallingWitness>,
}

/// Where the worst marginal discrepancy was found: the offending party, the
/// pair of its inputs, and the other parties' inputs (in party order).
#[derive(Clone, Debug, Serialize)]
pub struct SignallingWitness {
    pub party: String,
    pub inputs: (usize, usize),
    pub others_context: Vec<usize>,
}

/// Default party names: A, B, C for three parties, A, B, C01.. beyond.
pub fn default_party_names(n: usize) -> Vec<String> {
    if n <= 3 {
        ["A", "B", "C"].iter().take(n).map(|s| s.to_string()).collect()
    } else {
        let mut names = vec!["A".to_string(), "B".to_string()];
        for i in 1..=(n - 2) {
            names.push(format!("C{i:02}"));
        }
        names
    }
}

impl Behavior {
    /// Validates and wraps a dense table (contexts row-major over party
    /// inputs, party 0 slowest; within a context, output patterns with +1
    /// encoded as bit 0 and party 0 as the most significant bit).
    pub fn new(parties: Vec<Party>, table: Vec<f64>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidArgument("behavior needs parties".into()));
        }
        if parties.iter().any(|p| p.n_inputs == 0) {
            return Err(Error::InvalidArgument(
                "every party needs at least one input".into(),
            ));
        }
        let n_contexts: usize = parties.iter().map(|p| p.n_inputs).product();
        let n_patterns = 1usize << parties.len();
        if table.len() != n_contexts * n_patterns {
            return Err(Error::Dimension(format!(
                "table has {} entries, expected {}",
                table.len(),
                n_contexts * n_patterns
            )));
        }
        for (ctx, chunk) in table.chunks(n_patterns).enumerate() {
            let mut sum = 0.0;
            for &q in chunk {
                if q < 0.0 {
                    return Err(Error::InvalidState(format!(
                        "negative probability {q} in context {ctx}"
                    )));
                }
                sum += q;
            }
            if (sum - 1.0).abs() > DIST_SUM_TOL {
                return Err(Error::InvalidState(format!(
                    "context {ctx} sums to {sum}"
                )));
            }
        }
        Ok(Self { parties, table })
    }

    /// Uniform independent behavior over the given parties.
    pub fn uniform(parties: Vec<Party>) -> Result<Self> {
        let n_contexts: usize = parties.iter().map(|p| p.n_inputs).product();
        let n_patterns = 1usize << parties.len();
        let table = vec![1.0 / n_patterns as f64; n_contexts * n_patterns];
        Self::new(parties, table)
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.parties.iter().map(|p| p.n_inputs).product()
    }

    pub fn n_patterns(&self) -> usize {
        1usize << self.parties.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn check_inputs(&self, inputs: &[usize]) -> Result<()> {
        if inputs.len() != self.parties.len() {
            return Err(Error::Dimension(format!(
                "{} inputs for {} parties",
                inputs.len(),
                self.parties.len()
            )));
        }
        for (p, (&x, party)) in inputs.iter().zip(&self.parties).enumerate() {
            if x >= party.n_inputs {
                return Err(Error::InvalidArgument(format!(
                    "input {x} out of range for party {p} ({} inputs)",
                    party.n_inputs
                )));
            }
        }
        Ok(())
    }

    /// Flat index of an input context.
    pub fn context_index(&self, inputs: &[usize]) -> Result<usize> {
        self.check_inputs(inputs)?;
        let mut idx = 0;
        for (party, &x) in self.parties.iter().zip(inputs) {
            idx = idx * party.n_inputs + x;
        }
        Ok(idx)
    }

    /// Decodes a flat context index into per-party inputs.
    pub fn decode_context(&self, mut ctx: usize) -> Vec<usize> {
        let mut inputs = vec![0usize; self.parties.len()];
        for p in (0..self.parties.len()).rev() {
            inputs[p] = ctx % self.parties[p].n_inputs;
            ctx /= self.parties[p].n_inputs;
        }
        inputs
    }

    /// The distribution over output patterns at one input context.
    pub fn context_dist(&self, inputs: &[usize]) -> Result<&[f64]> {
        let idx = self.context_index(inputs)?;
        let n = self.n_patterns();
        Ok(&self.table[idx * n..(idx + 1) * n])
    }

    /// Probability of a specific joint output at a context.
    pub fn prob(&self, inputs: &[usize], outputs: &[i8]) -> Result<f64> {
        if outputs.len() != self.parties.len() {
            return Err(Error::Dimension("one output per party required".into()));
        }
        let dist = self.context_dist(inputs)?;
        let mut pattern = 0usize;
        for &o in outputs {
            pattern = (pattern << 1) | usize::from(o <= 0);
        }
        Ok(dist[pattern])
    }

    /// Marginal behavior over the `keep` parties (strictly increasing
    /// indices), summing out the rest.
    ///
    /// Discarded inputs are fixed to 0; the result is then re-derived at
    /// every alternative input of each discarded party and must agree within
    /// the nonsignalling tolerance, otherwise the marginal is ambiguous and
    /// an error is returned instead of silently averaging.
    pub fn marginal(&self, keep: &[usize]) -> Result<Behavior> {
        self.marginal_with_tol(keep, DEFAULT_NS_TOL)
    }

    pub fn marginal_with_tol(&self, keep: &[usize], tol: f64) -> Result<Behavior> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("marginal needs parties".into()));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep[keep.len() - 1] >= self.parties.len() {
            return Err(Error::InvalidArgument(
                "marginal party indices must be strictly increasing and in range".into(),
            ));
        }
        let discarded: Vec<usize> =
            (0..self.parties.len()).filter(|p| !keep.contains(p)).collect();
        let base_inputs = vec![0usize; self.parties.len()];
        let reference = self.marginal_at(keep, &base_inputs);
        for &q in &discarded {
            for x in 1..self.parties[q].n_inputs {
                let mut inputs = base_inputs.clone();
                inputs[q] = x;
                let alt = self.marginal_at(keep, &inputs);
                let dev = reference
                    .iter()
                    .zip(&alt)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if dev > tol {
                    return Err(Error::Signalling(format!(
                        "marginal over {:?} shifts by {dev:e} when party {} switches input 0 -> {x}",
                        keep, self.parties[q].name
                    )));
                }
            }
        }
        let parties: Vec<Party> = keep.iter().map(|&p| self.parties[p].clone()).collect();
        Behavior::new(parties, reference)
    }

    /// Raw marginal table over `keep` with discarded inputs pinned by `fixed`.
    fn marginal_at(&self, keep: &[usize], fixed: &[usize]) -> Vec<f64> {
        let n = self.parties.len();
        let kept_contexts: usize = keep.iter().map(|&p| self.parties[p].n_inputs).product();
        let kept_patterns = 1usize << keep.len();
        let mut out = vec![0.0f64; kept_contexts * kept_patterns];
        let mut inputs = fixed.to_vec();
        for kctx in 0..kept_contexts {
            let mut rem = kctx;
            for &p in keep.iter().rev() {
                inputs[p] = rem % self.parties[p].n_inputs;
                rem /= self.parties[p].n_inputs;
            }
            let ctx = self.context_index(&inputs).expect("validated inputs");
            let dist = &self.table[ctx * self.n_patterns()..(ctx + 1) * self.n_patterns()];
            for (pattern, &q) in dist.iter().enumerate() {
                let mut kpat = 0usize;
                for &p in keep {
                    kpat = (kpat << 1) | ((pattern >> (n - 1 - p)) & 1);
                }
                out[kctx * kept_patterns + kpat] += q;
            }
        }
        out
    }

    /// Bayes-conditions on `party` producing `output` on `input`, returning
    /// the behavior of the remaining parties with that input clamped.
    pub fn condition(&self, party: usize, input: usize, output: i8) -> Result<Behavior> {
        if party >= self.parties.len() {
            return Err(Error::InvalidArgument(format!(
                "party {party} out of range"
            )));
        }
        if self.parties.len() < 2 {
            return Err(Error::InvalidArgument(
                "conditioning needs at least two parties".into(),
            ));
        }
        if input >= self.parties[party].n_inputs {
            return Err(Error::InvalidArgument(format!(
                "input {input} out of range for party {party}"
            )));
        }
        let n = self.parties.len();
        let rest: Vec<usize> = (0..n).filter(|&p| p != party).collect();
        let rest_contexts: usize = rest.iter().map(|&p| self.parties[p].n_inputs).product();
        let rest_patterns = 1usize << rest.len();
        let want_bit = usize::from(output <= 0);
        let mut out = vec![0.0f64; rest_contexts * rest_patterns];
        let mut inputs = vec![0usize; n];
        inputs[party] = input;
        for rctx in 0..rest_contexts {
            let mut rem = rctx;
            for &p in rest.iter().rev() {
                inputs[p] = rem % self.parties[p].n_inputs;
                rem /= self.parties[p].n_inputs;
            }
            let ctx = self.context_index(&inputs)?;
            let dist = &self.table[ctx * self.n_patterns()..(ctx + 1) * self.n_patterns()];
            let mut event = 0.0f64;
            for (pattern, &q) in dist.iter().enumerate() {
                if (pattern >> (n - 1 - party)) & 1 == want_bit {
                    event += q;
                    let mut rpat = 0usize;
                    for &p in &rest {
                        rpat = (rpat << 1) | ((pattern >> (n - 1 - p)) & 1);
                    }
                    out[rctx * rest_patterns + rpat] += q;
                }
            }
            if event <= DIST_SUM_TOL {
                return Err(Error::DegenerateConditioning(format!(
                    "party {} input {input} output {output:+} has probability {event:e} at remaining context {:?}",
                    self.parties[party].name,
                    self.decode_context(ctx)
                )));
            }
            for q in &mut out[rctx * rest_patterns..(rctx + 1) * rest_patterns] {
                *q /= event;
            }
        }
        let parties: Vec<Party> = rest.iter().map(|&p| self.parties[p].clone()).collect();
        Behavior::new(parties, out)
    }

    /// Probability that `party` outputs `output` on `input`, marginalizing
    /// everyone else (requires nonsignalling for unambiguity).
    pub fn event_probability(&self, party: usize, input: usize, output: i8) -> Result<f64> {
        let marg = self.marginal(&[party])?;
        marg.prob(&[input], &[output])
    }

    /// Expectation of the product of the listed parties' +/-1 outputs at the
    /// given inputs, marginalizing unlisted parties.
    pub fn correlator(&self, at: &[(usize, usize)]) -> Result<f64> {
        if at.is_empty() {
            return Err(Error::InvalidArgument("correlator needs parties".into()));
        }
        let mut sorted = at.to_vec();
        sorted.sort_by_key(|&(p, _)| p);
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(
                "correlator parties must be distinct".into(),
            ));
        }
        let keep: Vec<usize> = sorted.iter().map(|&(p, _)| p).collect();
        let marg = self.marginal(&keep)?;
        let inputs: Vec<usize> = sorted.iter().map(|&(_, x)| x).collect();
        let dist = marg.context_dist(&inputs)?;
        let k = keep.len();
        let mut acc = 0.0f64;
        for (pattern, &q) in dist.iter().enumerate() {
            let minus_count = (pattern & ((1 << k) - 1)).count_ones();
            acc += if minus_count % 2 == 0 { q } else { -q };
        }
        Ok(acc)
    }

    /// Checks that each party's joint marginal over the others is
    /// independent of that party's input.
    pub fn is_nonsignalling(&self, tol: f64) -> NonsignallingReport {
        let n = self.parties.len();
        let n_patterns = self.n_patterns();
        let mut max_violation = 0.0f64;
        let mut worst = None;
        for p in 0..n {
            let k = self.parties[p].n_inputs;
            if k < 2 || n < 2 {
                continue;
            }
            let others: Vec<usize> = (0..n).filter(|&q| q != p).collect();
            let others_contexts: usize =
                others.iter().map(|&q| self.parties[q].n_inputs).product();
            let others_patterns = 1usize << (n - 1);
            // reduced[(octx * k + x) * others_patterns + opat]
            let mut reduced = vec![0.0f64; others_contexts * k * others_patterns];
            for ctx in 0..self.n_contexts() {
                let inputs = self.decode_context(ctx);
                let x = inputs[p];
                let mut octx = 0usize;
                for &q in &others {
                    octx = octx * self.parties[q].n_inputs + inputs[q];
                }
                let dist = &self.table[ctx * n_patterns..(ctx + 1) * n_patterns];
                let slot = (octx * k + x) * others_patterns;
                for (pattern, &qv) in dist.iter().enumerate() {
                    let mut opat = 0usize;
                    for &q in &others {
                        opat = (opat << 1) | ((pattern >> (n - 1 - q)) & 1);
                    }
                    reduced[slot + opat] += qv;
                }
            }
            for octx in 0..others_contexts {
                for x1 in 1..k {
                    for x0 in 0..x1 {
                        let a = (octx * k + x0) * others_patterns;
                        let b = (octx * k + x1) * others_patterns;
                        for opat in 0..others_patterns {
                            let dev = (reduced[a + opat] - reduced[b + opat]).abs();
                            if dev > max_violation {
                                max_violation = dev;
                                let mut octx_rem = octx;
                                let mut others_context = vec![0usize; others.len()];
                                for (i, &q) in others.iter().enumerate().rev() {
                                    others_context[i] = octx_rem % self.parties[q].n_inputs;
                                    octx_rem /= self.parties[q].n_inputs;
                                }
                                worst = Some(SignallingWitness {
                                    party: self.parties[p].name.clone(),
                                    inputs: (x0, x1),
                                    others_context,
                                });
                            }
                        }
                    }
                }
            }
        }
        NonsignallingReport {
            is_nonsignalling: max_violation <= tol,
            max_violation,
            tol,
            worst,
        }
    }

    /// Entrywise convex combination lambda*self + (1-lambda)*other.
    pub fn mix(&self, other: &Behavior, lambda: f64) -> Result<Behavior> {
        if self.parties != other.parties {
            return Err(Error::Dimension(
                "mixing behaviors with different party structure".into(),
            ));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight {lambda} outside [0, 1]"
            )));
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Behavior::new(self.parties.clone(), table)
    }

    /// Largest entrywise difference against a behavior of identical shape.
    pub fn max_abs_diff(&self, other: &Behavior) -> f64 {
        assert_eq!(self.parties, other.parties, "shape mismatch");
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Reorders parties to the given permutation (new[i] = old[perm[i]]).
    pub fn reordered(&self, perm: &[usize]) -> Result<Behavior> {
        let n = self.parties.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument("invalid party permutation".into()));
        }
        let parties: Vec<Party> = perm.iter().map(|&p| self.parties[p].clone()).collect();
        let n_patterns = self.n_patterns();
        let new_contexts: usize = parties.iter().map(|p| p.n_inputs).product();
        let mut table = vec![0.0f64; new_contexts * n_patterns];
        let mut old_inputs = vec![0usize; n];
        for new_ctx in 0..new_contexts {
            let mut rem = new_ctx;
            for i in (0..n).rev() {
                let x = rem % parties[i].n_inputs;
                rem /= parties[i].n_inputs;
                old_inputs[perm[i]] = x;
            }
            let old_ctx = self.context_index(&old_inputs)?;
            let src = &self.table[old_ctx * n_patterns..(old_ctx + 1) * n_patterns];
            let dst = &mut table[new_ctx * n_patterns..(new_ctx + 1) * n_patterns];
            for (old_pat, &q) in src.iter().enumerate() {
                let mut new_pat = 0usize;
                for &old_p in perm {
                    new_pat = (new_pat << 1) | ((old_pat >> (n - 1 - old_p)) & 1);
                }
                dst[new_pat] += q;
            }
        }
        Behavior::new(parties, table)
    }

    /// Serializes to the JSON interchange format, normalizing party order
    /// alphabetically so file diffs are stable.
    pub fn to_json_string(&self) -> Result<String> {
        let mut order: Vec<usize> = (0..self.parties.len()).collect();
        order.sort_by(|&a, &b| self.parties[a].name.cmp(&self.parties[b].name));
        let sorted = self.reordered(&order)?;
        let mut table = BTreeMap::new();
        for ctx in 0..sorted.n_contexts() {
            let inputs = sorted.decode_context(ctx);
            let mut key = String::new();
            for (i, x) in inputs.iter().enumerate() {
                if i > 0 {
                    key.push(',');
                }
                write!(key, "{x}").unwrap();
            }
            let probs: Vec<String> = sorted.table
                [ctx * sorted.n_patterns()..(ctx + 1) * sorted.n_patterns()]
                .iter()
                .map(|q| format!("{q:.16e}"))
                .collect();
            table.insert(key, probs);
        }
        let doc = BehaviorJson {
            parties: sorted.parties.clone(),
            outputs: vec![-1, 1],
            table,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses the JSON interchange format.
    pub fn from_json_str(s: &str) -> Result<Behavior> {
        let doc: BehaviorJson = serde_json::from_str(s)?;
        if doc.outputs != vec![-1, 1] {
            return Err(Error::Format(format!(
                "unsupported outputs {:?}, expected [-1, 1]",
                doc.outputs
            )));
        }
        let parties = doc.parties;
        if parties.is_empty() {
            return Err(Error::Format("no parties".into()));
        }
        let n_contexts: usize = parties.iter().map(|p| p.n_inputs).product();
        let n_patterns = 1usize << parties.len();
        if doc.table.len() != n_contexts {
            return Err(Error::Format(format!(
                "table has {} contexts, expected {n_contexts}",
                doc.table.len()
            )));
        }
        let mut table = vec![0.0f64; n_contexts * n_patterns];
        for (key, probs) in &doc.table {
            let inputs: Vec<usize> = key
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Format(format!("bad context key {key:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if inputs.len() != parties.len() {
                return Err(Error::Format(format!(
                    "context key {key:?} has {} inputs for {} parties",
                    inputs.len(),
                    parties.len()
                )));
            }
            let mut idx = 0usize;
            for (party, &x) in parties.iter().zip(&inputs) {
                if x >= party.n_inputs {
                    return Err(Error::Format(format!(
                        "context key {key:?} input {x} out of range"
                    )));
                }
                idx = idx * party.n_inputs + x;
            }
            if probs.len() != n_patterns {
                return Err(Error::Format(format!(
                    "context {key:?} lists {} probabilities, expected {n_patterns}",
                    probs.len()
                )));
            }
            for (pattern, txt) in probs.iter().enumerate() {
                table[idx * n_patterns + pattern] = txt
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad probability {txt:?}: {e}")))?;
            }
        }
        Behavior::new(parties, table)
    }
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    parties: Vec<Party>,
    outputs: Vec<i8>,
    table: BTreeMap<String, Vec<String>>,
}
