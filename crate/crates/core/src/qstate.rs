//! Dense complex linear algebra for n-qubit states, binary projective
//! measurements, and Born-rule behavior generation.
//!
//! Tolerances form a fixed hierarchy: construction checks at 1e-12,
//! projector idempotence at 1e-10, and distribution sums at 1e-9, so that
//! error accumulated over contractions of desk-scale dimensions stays
//! below downstream test thresholds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::behavior::{default_party_names, Behavior, Party};
use crate::error::{Error, Result};

/// Construction tolerance for norms, Hermiticity and traces.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Idempotence tolerance for projectors.
pub const IDEMPOTENCE_TOL: f64 = 1e-10;
/// Minimum eigenvalue allowed for a density operator.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance on each conditional distribution summing to one.
pub const DIST_SUM_TOL: f64 = 1e-9;

const PSD_EIGEN_DIM_LIMIT: usize = 512;

/// A pure state vector or density operator on n qubits.
#[derive(Clone, Debug)]
pub struct QuantumState {
    repr: Repr,
    n_qubits: usize,
}

#[derive(Clone, Debug)]
enum Repr {
    Pure(DVector<Complex64>),
    Density(DMatrix<Complex64>),
}

fn qubit_count(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "state dimension {dim} is not a power of two >= 2"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

impl QuantumState {
    /// Builds a pure state from an amplitude vector (unit norm within 1e-12).
    pub fn from_amplitudes(amplitudes: DVector<Complex64>) -> Result<Self> {
        let n_qubits = qubit_count(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "amplitude vector norm {norm} deviates from 1 by more than {CONSTRUCTION_TOL:e}"
            )));
        }
        Ok(Self {
            repr: Repr::Pure(amplitudes),
            n_qubits,
        })
    }

    /// Builds a mixed state from a density operator.
    ///
    /// Checks Hermiticity and unit trace at 1e-12 and, for dimensions up to
    /// 512, positive semidefiniteness (minimum eigenvalue >= -1e-10) via a
    /// full Hermitian eigendecomposition.
    pub fn from_density(rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::Dimension(format!(
                "density operator is {}x{}, not square",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let n_qubits = qubit_count(rho.nrows())?;
        let mut herm_dev: f64 = 0.0;
        for i in 0..rho.nrows() {
            for j in i..rho.ncols() {
                herm_dev = herm_dev.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        if herm_dev > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "density operator deviates from Hermitian by {herm_dev:e}"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > CONSTRUCTION_TOL || trace.im.abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "density operator trace {trace} deviates from 1"
            )));
        }
        if rho.nrows() <= PSD_EIGEN_DIM_LIMIT {
            let min_eig = nalgebra::SymmetricEigen::new(rho.clone())
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, &e| m.min(e));
            if min_eig < -PSD_TOL {
                return Err(Error::InvalidState(format!(
                    "density operator has eigenvalue {min_eig:e} below -{PSD_TOL:e}"
                )));
            }
        }
        Ok(Self {
            repr: Repr::Density(rho),
            n_qubits,
        })
    }

    pub fn dimension(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    /// Amplitude vector, if this state is stored as a pure vector.
    pub fn amplitudes(&self) -> Option<&DVector<Complex64>> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            Repr::Density(_) => None,
        }
    }

    /// Materializes the density operator of this state.
    pub fn density(&self) -> DMatrix<Complex64> {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Density(m) => m.clone(),
        }
    }
}

/// The N-qubit GHZ state (|0..0> + |1..1>)/sqrt(2).
pub fn ghz_state(n: usize) -> Result<QuantumState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "GHZ state needs at least 2 qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut v = DVector::from_element(dim, Complex64::default());
    v[0] = amp;
    v[dim - 1] = amp;
    QuantumState::from_amplitudes(v)
}

/// The three-qubit W state (|001> + |010> + |100>)/sqrt(3).
pub fn w_state() -> QuantumState {
    let amp = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut v = DVector::from_element(8, Complex64::default());
    v[1] = amp;
    v[2] = amp;
    v[4] = amp;
    QuantumState::from_amplitudes(v).expect("W state is normalized")
}

/// Mixes a state with white noise: f*rho + (1-f)*I/d.
pub fn white_noise_mix(state: &QuantumState, f: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!(
            "noise fidelity {f} outside [0, 1]"
        )));
    }
    let d = state.dimension();
    let mut rho = state.density() * Complex64::new(f, 0.0);
    let diag = Complex64::new((1.0 - f) / d as f64, 0.0);
    for i in 0..d {
        rho[(i, i)] += diag;
    }
    QuantumState::from_density(rho)
}

/// A +/-1-valued projective observable, stored as its +1 projector.
#[derive(Clone, Debug)]
pub struct BinaryObservable {
    dim: usize,
    projector_plus: DMatrix<Complex64>,
}

impl BinaryObservable {
    /// Builds an observable from its +1 projector (idempotent within 1e-10,
    /// Hermitian within 1e-12).
    pub fn from_projector(projector_plus: DMatrix<Complex64>) -> Result<Self> {
        let dim = projector_plus.nrows();
        if projector_plus.ncols() != dim || dim == 0 {
            return Err(Error::Dimension(format!(
                "projector is {}x{}",
                projector_plus.nrows(),
                projector_plus.ncols()
            )));
        }
        let mut herm_dev: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                herm_dev =
                    herm_dev.max((projector_plus[(i, j)] - projector_plus[(j, i)].conj()).norm());
            }
        }
        if herm_dev > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "projector deviates from Hermitian by {herm_dev:e}"
            )));
        }
        let idem_dev = (&projector_plus * &projector_plus - &projector_plus).norm();
        if idem_dev > IDEMPOTENCE_TOL {
            return Err(Error::InvalidState(format!(
                "projector deviates from idempotent by {idem_dev:e}"
            )));
        }
        Ok(Self {
            dim,
            projector_plus,
        })
    }

    /// Qubit observable n.sigma from a Bloch vector (normalized internally).
    pub fn from_bloch(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let norm = (nx * nx + ny * ny + nz * nz).sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument(
                "Bloch vector must be nonzero".into(),
            ));
        }
        let (nx, ny, nz) = (nx / norm, ny / norm, nz / norm);
        // (I + n.sigma)/2
        let p = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new((1.0 + nz) / 2.0, 0.0),
                Complex64::new(nx / 2.0, -ny / 2.0),
                Complex64::new(nx / 2.0, ny / 2.0),
                Complex64::new((1.0 - nz) / 2.0, 0.0),
            ],
        );
        Self::from_projector(p)
    }

    /// Rectilinear (Pauli-Z) observable.
    pub fn pauli_z() -> Self {
        Self::from_bloch(0.0, 0.0, 1.0).expect("valid Bloch vector")
    }

    /// Hadamard-basis (Pauli-X) observable.
    pub fn pauli_x() -> Self {
        Self::from_bloch(1.0, 0.0, 0.0).expect("valid Bloch vector")
    }

    /// Observable cos(theta) Z + sin(theta) X in the X-Z plane.
    pub fn rotated_zx(theta: f64) -> Self {
        Self::from_bloch(theta.sin(), 0.0, theta.cos()).expect("valid Bloch vector")
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn projector_plus(&self) -> &DMatrix<Complex64> {
        &self.projector_plus
    }

    /// Projector onto the given outcome (+1 or -1).
    pub fn projector(&self, outcome: i8) -> DMatrix<Complex64> {
        if outcome > 0 {
            self.projector_plus.clone()
        } else {
            DMatrix::identity(self.dim, self.dim) - &self.projector_plus
        }
    }

    /// Bloch vector of a qubit observable, when rank-1 on a 2-dimensional space.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        if self.dim != 2 {
            return None;
        }
        let m = &self.projector_plus * Complex64::new(2.0, 0.0)
            - DMatrix::<Complex64>::identity(2, 2);
        let nx = (m[(0, 1)] + m[(1, 0)]).re / 2.0;
        let ny = (m[(1, 0)] - m[(0, 1)]).im / 2.0;
        let nz = (m[(0, 0)] - m[(1, 1)]).re / 2.0;
        Some([nx, ny, nz])
    }

    fn is_rank_one_qubit(&self) -> bool {
        self.dim == 2 && (self.projector_plus.trace().re - 1.0).abs() < 1e-9
    }

    /// 2x2 unitary sending the +1 eigenvector to |0> and the -1 eigenvector to |1>.
    fn qubit_rotation(&self) -> DMatrix<Complex64> {
        debug_assert!(self.is_rank_one_qubit());
        let p = &self.projector_plus;
        // The +1 eigenvector is the dominant column of the rank-1 projector.
        let c0 = (p[(0, 0)].norm_sqr() + p[(1, 0)].norm_sqr()).sqrt();
        let c1 = (p[(0, 1)].norm_sqr() + p[(1, 1)].norm_sqr()).sqrt();
        let (u0, u1) = if c0 >= c1 {
            (p[(0, 0)] / c0, p[(1, 0)] / c0)
        } else {
            (p[(0, 1)] / c1, p[(1, 1)] / c1)
        };
        // Rows: <u| and its orthogonal complement.
        DMatrix::from_row_slice(2, 2, &[u0.conj(), u1.conj(), -u1, u0])
    }
}

/// Applies a 2x2 gate to qubit `q` (0 = most significant) of a state vector.
fn apply_qubit_gate(v: &mut DVector<Complex64>, n_qubits: usize, q: usize, g: &DMatrix<Complex64>) {
    let stride = 1usize << (n_qubits - 1 - q);
    let dim = v.len();
    let mut base = 0;
    while base < dim {
        for offset in 0..stride {
            let i0 = base + offset;
            let i1 = i0 + stride;
            let a = v[i0];
            let b = v[i1];
            v[i0] = g[(0, 0)] * a + g[(0, 1)] * b;
            v[i1] = g[(1, 0)] * a + g[(1, 1)] * b;
        }
        base += stride << 1;
    }
}

/// Applies a d_i x d_i operator to tensor factor `party` of a state vector.
fn apply_factor_operator(
    v: &DVector<Complex64>,
    dims: &[usize],
    party: usize,
    op: &DMatrix<Complex64>,
) -> DVector<Complex64> {
    let d: usize = dims.iter().product();
    let di = dims[party];
    let right: usize = dims[party + 1..].iter().product();
    let mut out = DVector::from_element(d, Complex64::default());
    let block = di * right;
    let mut base = 0;
    while base < d {
        for r in 0..right {
            for a in 0..di {
                let mut acc = Complex64::default();
                for b in 0..di {
                    acc += op[(a, b)] * v[base + b * right + r];
                }
                out[base + a * right + r] = acc;
            }
        }
        base += block;
    }
    out
}

/// Evaluates a strategy's conditional distribution via the Born rule.
///
/// `measurements[p]` lists one observable per input of party `p`; the party
/// dimensions (taken from the observables) must multiply to the state
/// dimension. Entries are clamped to [0, 1] after an admissibility check and
/// each context is renormalized when its sum strays from 1 by at most 1e-9.
pub fn born_behavior(
    state: &QuantumState,
    measurements: &[Vec<BinaryObservable>],
) -> Result<Behavior> {
    born_behavior_named(state, measurements, &default_party_names(measurements.len()))
}

/// Same as [`born_behavior`] with explicit party names.
pub fn born_behavior_named(
    state: &QuantumState,
    measurements: &[Vec<BinaryObservable>],
    names: &[String],
) -> Result<Behavior> {
    let n_parties = measurements.len();
    if n_parties == 0 || names.len() != n_parties {
        return Err(Error::InvalidArgument(
            "need at least one party and one name per party".into(),
        ));
    }
    let mut dims = Vec::with_capacity(n_parties);
    for (p, obs) in measurements.iter().enumerate() {
        if obs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "party {p} has no measurement inputs"
            )));
        }
        let d = obs[0].dimension();
        if obs.iter().any(|o| o.dimension() != d) {
            return Err(Error::Dimension(format!(
                "party {p} mixes observable dimensions"
            )));
        }
        dims.push(d);
    }
    let prod: usize = dims.iter().product();
    if prod != state.dimension() {
        return Err(Error::Dimension(format!(
            "party dimensions multiply to {prod}, state dimension is {}",
            state.dimension()
        )));
    }

    let parties: Vec<Party> = names
        .iter()
        .zip(measurements)
        .map(|(name, obs)| Party {
            name: name.clone(),
            n_inputs: obs.len(),
        })
        .collect();
    let n_contexts: usize = parties.iter().map(|p| p.n_inputs).product();
    let n_patterns = 1usize << n_parties;

    let fast = state.is_pure()
        && dims.iter().all(|&d| d == 2)
        && measurements
            .iter()
            .all(|obs| obs.iter().all(|o| o.is_rank_one_qubit()));

    let mut table = vec![0.0f64; n_contexts * n_patterns];
    let mut ctx_inputs = vec![0usize; n_parties];
    for ctx in 0..n_contexts {
        // Decode the context index, party 0 slowest.
        let mut rem = ctx;
        for p in (0..n_parties).rev() {
            ctx_inputs[p] = rem % parties[p].n_inputs;
            rem /= parties[p].n_inputs;
        }
        let row = &mut table[ctx * n_patterns..(ctx + 1) * n_patterns];
        if fast {
            let mut psi = state.amplitudes().expect("pure").clone();
            for (p, &x) in ctx_inputs.iter().enumerate() {
                let rot = measurements[p][x].qubit_rotation();
                apply_qubit_gate(&mut psi, n_parties, p, &rot);
            }
            for (pattern, amp) in psi.iter().enumerate() {
                row[pattern] = amp.norm_sqr();
            }
        } else {
            born_context_general(state, measurements, &dims, &ctx_inputs, row);
        }
        // Admissibility, clamping and renormalization.
        let mut sum = 0.0;
        for q in row.iter_mut() {
            if *q < -1e-10 || *q > 1.0 + 1e-10 {
                return Err(Error::InvalidState(format!(
                    "Born probability {q} outside [-1e-10, 1+1e-10]; projectors are not a valid measurement"
                )));
            }
            *q = q.clamp(0.0, 1.0);
            sum += *q;
        }
        if (sum - 1.0).abs() > DIST_SUM_TOL {
            return Err(Error::InvalidState(format!(
                "context distribution sums to {sum}, off from 1 by more than {DIST_SUM_TOL:e}"
            )));
        }
        for q in row.iter_mut() {
            *q /= sum;
        }
    }

    Behavior::new(parties, table)
}

/// Slow Born-rule path for mixed states or non-qubit parties.
fn born_context_general(
    state: &QuantumState,
    measurements: &[Vec<BinaryObservable>],
    dims: &[usize],
    ctx_inputs: &[usize],
    row: &mut [f64],
) {
    let n_parties = dims.len();
    match (&state.repr, state.amplitudes()) {
        (Repr::Pure(_), Some(psi)) => {
            for (pattern, slot) in row.iter_mut().enumerate() {
                let mut v = psi.clone();
                for p in 0..n_parties {
                    let outcome = if (pattern >> (n_parties - 1 - p)) & 1 == 0 {
                        1
                    } else {
                        -1
                    };
                    let proj = measurements[p][ctx_inputs[p]].projector(outcome);
                    v = apply_factor_operator(&v, dims, p, &proj);
                }
                *slot = psi.dotc(&v).re;
            }
        }
        _ => {
            let rho = state.density();
            for (pattern, slot) in row.iter_mut().enumerate() {
                let mut proj = DMatrix::<Complex64>::identity(1, 1);
                for p in 0..n_parties {
                    let outcome = if (pattern >> (n_parties - 1 - p)) & 1 == 0 {
                        1
                    } else {
                        -1
                    };
                    proj = proj.kronecker(&measurements[p][ctx_inputs[p]].projector(outcome));
                }
                let mut tr = Complex64::default();
                for i in 0..rho.nrows() {
                    for j in 0..rho.ncols() {
                        tr += rho[(i, j)] * proj[(j, i)];
                    }
                }
                *slot = tr.re;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ghz3_amplitudes() {
        let s = ghz_state(3).unwrap();
        let v = s.amplitudes().unwrap();
        let amp = 1.0 / 2f64.sqrt();
        assert!((v[0].re - amp).abs() < 1e-15);
        assert!((v[7].re - amp).abs() < 1e-15);
        for i in 1..7 {
            assert_eq!(v[i], Complex64::default());
        }
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz2_is_phi_plus() {
        let s = ghz_state(2).unwrap();
        let v = s.amplitudes().unwrap();
        let amp = 1.0 / 2f64.sqrt();
        assert!((v[0].re - amp).abs() < 1e-15);
        assert!((v[3].re - amp).abs() < 1e-15);
        assert_eq!(v[1], Complex64::default());
        assert_eq!(v[2], Complex64::default());
    }

    #[test]
    fn ghz_rejects_small_n() {
        assert!(ghz_state(1).is_err());
        assert!(ghz_state(0).is_err());
    }

    #[test]
    fn ghz_normalized_for_various_n() {
        for n in 2..=10 {
            let s = ghz_state(n).unwrap();
            assert!((s.amplitudes().unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn w_state_amplitudes() {
        let s = w_state();
        let v = s.amplitudes().unwrap();
        let amp = 1.0 / 3f64.sqrt();
        for idx in [1usize, 2, 4] {
            assert!((v[idx].re - amp).abs() < 1e-15);
        }
        for idx in [0usize, 3, 5, 6, 7] {
            assert_eq!(v[idx], Complex64::default());
        }
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_state_single_qubit_marginal() {
        // Direct summation oracle: group |amp|^2 by the first qubit.
        let s = w_state();
        let v = s.amplitudes().unwrap();
        let mut p0 = 0.0;
        let mut p1 = 0.0;
        for idx in 0..8 {
            let w = v[idx].norm_sqr();
            if idx & 0b100 == 0 {
                p0 += w;
            } else {
                p1 += w;
            }
        }
        assert!((p0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((p1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn white_noise_identity_and_boundary() {
        let ghz = ghz_state(3).unwrap();
        let full = white_noise_mix(&ghz, 1.0).unwrap();
        let diff = (full.density() - ghz.density()).norm();
        assert!(diff < 1e-12);

        let mixed = white_noise_mix(&ghz, 0.0).unwrap();
        let rho = mixed.density();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 0.125 } else { 0.0 };
                assert!((rho[(i, j)] - c(expect)).norm() < 1e-12);
            }
        }

        let half = white_noise_mix(&ghz, 0.5).unwrap();
        let rho = half.density();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);

        assert!(white_noise_mix(&ghz, -0.1).is_err());
        assert!(white_noise_mix(&ghz, 1.1).is_err());
    }

    #[test]
    fn observable_construction_validates() {
        // Not idempotent.
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.6)]);
        assert!(BinaryObservable::from_projector(m).is_err());
        // Valid Z projector.
        let z = BinaryObservable::pauli_z();
        assert_eq!(z.bloch().map(|b| b[2] as i64), Some(1));
    }

    #[test]
    fn born_ghz_rectilinear_is_half_half() {
        // Oracle: direct Born-rule summation over the 8 amplitudes using the
        // generic density path, cross-checked against the fast pure path.
        let ghz = ghz_state(3).unwrap();
        let z = BinaryObservable::pauli_z;
        let meas = vec![vec![z()], vec![z()], vec![z()]];
        let b = born_behavior(&ghz, &meas).unwrap();
        let dist = b.context_dist(&[0, 0, 0]).unwrap();
        assert!((dist[0] - 0.5).abs() < 1e-12); // +++
        assert!((dist[7] - 0.5).abs() < 1e-12); // ---
        for i in 1..7 {
            assert!(dist[i].abs() < 1e-12);
        }

        let mixed_form = QuantumState::from_density(ghz.density()).unwrap();
        let b2 = born_behavior(&mixed_form, &meas).unwrap();
        let d2 = b2.context_dist(&[0, 0, 0]).unwrap();
        for i in 0..8 {
            assert!((dist[i] - d2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn born_product_state_deterministic() {
        let mut v = DVector::from_element(8, Complex64::default());
        v[0] = c(1.0);
        let s = QuantumState::from_amplitudes(v).unwrap();
        let z = BinaryObservable::pauli_z;
        let b = born_behavior(&s, &[vec![z()], vec![z()], vec![z()]]).unwrap();
        let dist = b.context_dist(&[0, 0, 0]).unwrap();
        assert!((dist[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn born_ghz_hadamard_marginal_unbiased() {
        let ghz = ghz_state(3).unwrap();
        let meas = vec![
            vec![BinaryObservable::pauli_z()],
            vec![BinaryObservable::pauli_z()],
            vec![BinaryObservable::pauli_x()],
        ];
        let b = born_behavior(&ghz, &meas).unwrap();
        let c_mean = b.correlator(&[(2, 0)]).unwrap();
        assert!(c_mean.abs() < 1e-12);
    }

    #[test]
    fn born_linearity_in_white_noise() {
        let ghz = ghz_state(3).unwrap();
        let meas = vec![
            vec![BinaryObservable::rotated_zx(0.3)],
            vec![BinaryObservable::rotated_zx(-0.7)],
            vec![BinaryObservable::pauli_x()],
        ];
        let f = 0.37;
        let noisy = born_behavior(&white_noise_mix(&ghz, f).unwrap(), &meas).unwrap();
        let pure = born_behavior(&ghz, &meas).unwrap();
        let mixed = born_behavior(&white_noise_mix(&ghz, 0.0).unwrap(), &meas).unwrap();
        let blend = pure.mix(&mixed, f).unwrap();
        assert!(noisy.max_abs_diff(&blend) < 1e-10);
    }

    #[test]
    fn born_product_state_factorizes() {
        // |0> x |+> x |0| with assorted observables.
        let mut v = DVector::from_element(8, Complex64::default());
        let h = 1.0 / 2f64.sqrt();
        v[0] = c(h);
        v[2] = c(h);
        let s = QuantumState::from_amplitudes(v).unwrap();
        let meas = vec![
            vec![BinaryObservable::pauli_z(), BinaryObservable::pauli_x()],
            vec![BinaryObservable::rotated_zx(0.9)],
            vec![BinaryObservable::rotated_zx(2.1)],
        ];
        let b = born_behavior(&s, &meas).unwrap();
        let ma = b.marginal(&[0]).unwrap();
        let mb = b.marginal(&[1]).unwrap();
        let mc = b.marginal(&[2]).unwrap();
        for x in 0..2 {
            for (pattern, _) in [(0, 0); 8].iter().enumerate() {
                let a = (pattern >> 2) & 1;
                let bo = (pattern >> 1) & 1;
                let co = pattern & 1;
                let joint = b.context_dist(&[x, 0, 0]).unwrap()[pattern];
                let product = ma.context_dist(&[x]).unwrap()[a]
                    * mb.context_dist(&[0]).unwrap()[bo]
                    * mc.context_dist(&[0]).unwrap()[co];
                assert!((joint - product).abs() < 1e-10);
            }
        }
    }
}
