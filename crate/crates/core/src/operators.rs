//! Finite-dimensional realization of the non-commuting Hamiltonian pair.
//!
//! The pair is built from a canonical X, P pair on a truncated harmonic
//! oscillator ladder:
//!
//! ```text
//! H_F = β(X + P),   H_B = β(X − P),   β = √(|λ|/2)
//! ```
//!
//! so that `[H_B, H_F] = iλ` away from the truncation edge and `H_B` is the
//! time-reversed `H_F` under complex conjugation in the Fock (= position)
//! basis. Truncation makes `[X, P] = i` fail only in the last basis state, so
//! identities are asserted on the interior block `d/4..3d/4` and on states
//! whose support stays clear of the edge.
//!
//! Propagators `exp(−iHt)` come from one Hermitian eigendecomposition per
//! operator and are cached per `t`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::Range;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::amplitude::InterferenceScan;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::peaks::analytic_peaks;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const MIN_DIM: usize = 16;

/// Fraction of the path drift used to place |φ⟩ in
/// [`OperatorRealization::centered_for_paths`].
const CENTERING: f64 = 0.8;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug)]
struct Eigensystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

/// A Hermitian operator with a lazily computed eigensystem and a propagator cache.
///
/// The eigensystem is computed once on first use; propagators are inserted
/// under a write lock and shared read-only afterwards.
#[derive(Debug)]
pub struct Hamiltonian {
    matrix: CMatrix,
    eigen: OnceLock<Eigensystem>,
    propagators: RwLock<HashMap<u64, Arc<CMatrix>>>,
}

impl Hamiltonian {
    pub fn new(matrix: CMatrix) -> Self {
        assert!(matrix.is_square(), "Hamiltonian must be square");
        Hamiltonian {
            matrix,
            eigen: OnceLock::new(),
            propagators: RwLock::new(HashMap::new()),
        }
    }

    /// Diagonal operator; the eigensystem is known without a decomposition.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let matrix =
            CMatrix::from_diagonal(&CVector::from_iterator(d, values.iter().map(|&v| cr(v))));
        let h = Hamiltonian::new(matrix);
        let _ = h.eigen.set(Eigensystem {
            values: values.to_vec(),
            vectors: CMatrix::identity(d, d),
        });
        h
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn eigensystem(&self) -> &Eigensystem {
        self.eigen.get_or_init(|| {
            let eig = SymmetricEigen::new(self.matrix.clone());
            Eigensystem {
                values: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors,
            }
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigensystem().values
    }

    /// `exp(−iHt)`. Negative `t` gives the backward propagator `exp(+iH|t|)`.
    pub fn propagator(&self, t: f64) -> Arc<CMatrix> {
        let key = t.to_bits();
        if let Some(u) = self
            .propagators
            .read()
            .expect("propagator cache poisoned")
            .get(&key)
        {
            return Arc::clone(u);
        }
        let d = self.dim();
        let u = if t == 0.0 {
            CMatrix::identity(d, d)
        } else {
            let eig = self.eigensystem();
            let mut scaled = eig.vectors.clone();
            for (j, &e) in eig.values.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -e * t);
                for c in scaled.column_mut(j).iter_mut() {
                    *c *= phase;
                }
            }
            scaled * eig.vectors.adjoint()
        };
        let u = Arc::new(u);
        self.propagators
            .write()
            .expect("propagator cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&u))
            .clone()
    }

    /// `exp(−iHt)|v⟩`.
    pub fn evolve(&self, v: &CVector, t: f64) -> CVector {
        &*self.propagator(t) * v
    }

    pub fn expectation(&self, v: &CVector) -> Complex64 {
        v.dotc(&(&self.matrix * v))
    }
}

/// Creation/annihilation-based canonical pair on a `dim`-level ladder.
fn canonical_pair(dim: usize) -> (CMatrix, CMatrix) {
    let mut x = CMatrix::zeros(dim, dim);
    let mut p = CMatrix::zeros(dim, dim);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..dim {
        let s = (k as f64).sqrt() * inv_sqrt2;
        x[(k - 1, k)] = cr(s);
        x[(k, k - 1)] = cr(s);
        p[(k - 1, k)] = Complex64::new(0.0, -s);
        p[(k, k - 1)] = Complex64::new(0.0, s);
    }
    (x, p)
}

/// Antiunitary time reversal `T = U·K`, with `K` complex conjugation in the
/// working basis.
#[derive(Debug, Clone)]
pub struct TimeReversal {
    unitary: CMatrix,
}

impl TimeReversal {
    /// Plain conjugation in the Fock basis, where X is real and P imaginary.
    pub fn conjugation(dim: usize) -> Self {
        TimeReversal {
            unitary: CMatrix::identity(dim, dim),
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.unitary * v.conjugate()
    }

    /// `T⁻¹ M T = conj(U† M U)`.
    pub fn conjugate_operator(&self, m: &CMatrix) -> CMatrix {
        (self.unitary.adjoint() * m * &self.unitary).conjugate()
    }
}

/// Gaussian wavepacket ψ(x) ∝ exp[−(x − x0)²/2w² + i p0 x].
///
/// `width = 1` is the oscillator ground state; `width < 1` squeezes it in
/// position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavepacket {
    pub x0: f64,
    pub p0: f64,
    pub width: f64,
}

impl Wavepacket {
    /// Oscillator ground state, the default |φ⟩. Real in the Fock basis, so
    /// invariant under time reversal.
    pub const GROUND: Wavepacket = Wavepacket {
        x0: 0.0,
        p0: 0.0,
        width: 1.0,
    };

    /// Fock-basis coefficients, obtained by projecting onto Hermite functions
    /// with trapezoidal quadrature and renormalizing after truncation.
    pub fn to_state(&self, dim: usize) -> CVector {
        let reach = (2.0 * dim as f64).sqrt() + 10.0;
        let lo = (self.x0 - 14.0 * self.width).min(-reach);
        let hi = (self.x0 + 14.0 * self.width).max(reach);
        let dx = (self.width / 40.0).min(0.01);
        let points = ((hi - lo) / dx).ceil() as usize + 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        let mut hermite = vec![0.0; dim];
        let norm0 = PI.powf(-0.25);
        for i in 0..points {
            let x = lo + i as f64 * dx;
            let u = (x - self.x0) / self.width;
            let psi = Complex64::from_polar((-0.5 * u * u).exp(), self.p0 * x);
            if psi.norm() < 1e-300 {
                continue;
            }
            // Normalized Hermite functions by the stable three-term recurrence.
            hermite[0] = norm0 * (-0.5 * x * x).exp();
            if dim > 1 {
                hermite[1] = std::f64::consts::SQRT_2 * x * hermite[0];
            }
            for k in 1..dim - 1 {
                let kf = k as f64;
                hermite[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * hermite[k]
                    - (kf / (kf + 1.0)).sqrt() * hermite[k - 1];
            }
            for (c, &h) in coeffs.iter_mut().zip(&hermite) {
                *c += psi * h;
            }
        }
        let v = CVector::from_vec(coeffs);
        let n = v.norm();
        v / cr(n)
    }
}

/// Uniform superposition of all Fock states.
pub fn uniform_superposition(dim: usize) -> CVector {
    CVector::from_element(dim, cr(1.0 / (dim as f64).sqrt()))
}

/// Basis vector |k⟩.
pub fn basis_state(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = cr(1.0);
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pair {
    /// H_F = aX + bP, H_B = aX − bP with 2ab = λ.
    Canonical { a: f64, b: f64 },
    /// H_F = H_B = ω·(number operator).
    Symmetric { omega: f64 },
}

/// The Hamiltonian pair, symmetry maps and reference state on a truncated ladder.
#[derive(Debug, Clone)]
pub struct OperatorRealization {
    dim: usize,
    lambda: f64,
    pair: Pair,
    h_f: Arc<Hamiltonian>,
    h_b: Arc<Hamiltonian>,
    x: CMatrix,
    p: Arc<Hamiltonian>,
    parity: CMatrix,
    time_reversal: TimeReversal,
    phi: CVector,
}

/// Build the realization for a commutator `[H_B, H_F] = iλ`.
///
/// λ = 0 yields the time-symmetric pair `H_F = H_B = n̂` with |φ⟩ the uniform
/// superposition of its eigenstates.
pub fn build_realization(dim: usize, lambda: f64) -> Result<OperatorRealization> {
    if lambda == 0.0 {
        OperatorRealization::time_symmetric(dim, 1.0)
    } else {
        OperatorRealization::canonical(dim, lambda)
    }
}

impl OperatorRealization {
    /// T-violating pair `H_F = β(X + P)`, `H_B = β(X − P)` (roles of ±P swapped
    /// for λ < 0), with the oscillator ground state as |φ⟩.
    pub fn canonical(dim: usize, lambda: f64) -> Result<Self> {
        if dim < MIN_DIM {
            return Err(Error::DimTooSmall { dim });
        }
        if !(lambda.is_finite() && lambda != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "canonical pair needs a finite non-zero λ, got {lambda}"
            )));
        }
        let beta = (lambda.abs() / 2.0).sqrt();
        let a = beta;
        let b = beta * lambda.signum();
        let (x, p) = canonical_pair(dim);
        let h_f = &x * cr(a) + &p * cr(b);
        let h_b = &x * cr(a) - &p * cr(b);
        Ok(Self::assemble(
            dim,
            lambda,
            Pair::Canonical { a, b },
            h_f,
            h_b,
            x,
            p,
            basis_state(dim, 0),
        ))
    }

    /// T-invariant pair `H_F = H_B = ω n̂` with equally spaced spectrum.
    pub fn time_symmetric(dim: usize, omega: f64) -> Result<Self> {
        if dim < MIN_DIM {
            return Err(Error::DimTooSmall { dim });
        }
        let (x, p) = canonical_pair(dim);
        let levels: Vec<f64> = (0..dim).map(|k| omega * k as f64).collect();
        let h = Arc::new(Hamiltonian::diagonal(&levels));
        let mut r = Self::assemble(
            dim,
            0.0,
            Pair::Symmetric { omega },
            CMatrix::zeros(0, 0),
            CMatrix::zeros(0, 0),
            x,
            p,
            uniform_superposition(dim),
        );
        r.h_f = Arc::clone(&h);
        r.h_b = h;
        Ok(r)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dim: usize,
        lambda: f64,
        pair: Pair,
        h_f: CMatrix,
        h_b: CMatrix,
        x: CMatrix,
        p: CMatrix,
        phi: CVector,
    ) -> Self {
        let parity = CMatrix::from_diagonal(&CVector::from_iterator(
            dim,
            (0..dim).map(|k| cr(if k % 2 == 0 { 1.0 } else { -1.0 })),
        ));
        OperatorRealization {
            dim,
            lambda,
            pair,
            h_f: Arc::new(Hamiltonian::new(h_f)),
            h_b: Arc::new(Hamiltonian::new(h_b)),
            x,
            p: Arc::new(Hamiltonian::new(p)),
            parity,
            time_reversal: TimeReversal::conjugation(dim),
            phi,
        }
    }

    /// Replace |φ⟩ (normalized on entry).
    pub fn with_reference_state(mut self, phi: CVector) -> Result<Self> {
        if phi.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "reference state has length {}, realization has dimension {}",
                phi.len(),
                self.dim
            )));
        }
        let n = phi.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(
                "reference state must be non-zero".into(),
            ));
        }
        self.phi = phi / cr(n);
        Ok(self)
    }

    /// Shift |φ⟩ so that every virtual path of total duration `total_time`
    /// stays as close to the phase-space origin as possible.
    ///
    /// A forward step `exp(−iH_F t)` displaces (⟨X⟩, ⟨P⟩) by `(b, −a)t` and a
    /// backward step `exp(iH_B t)` by `(b, a)t`, so every path drifts along X
    /// by `b·total_time` while spreading in P. The packet starts at
    /// `x0 = −CENTERING·b·total_time`; the fraction below one trades a little
    /// room at the starting apex for room at the far edge, where the heavy
    /// paths end. No-op for the symmetric pair.
    pub fn centered_for_paths(&self, total_time: f64) -> Self {
        match self.pair {
            Pair::Canonical { b, .. } => {
                let packet = Wavepacket {
                    x0: -CENTERING * b * total_time,
                    ..Wavepacket::GROUND
                };
                let mut r = self.clone();
                r.phi = packet.to_state(self.dim);
                r
            }
            Pair::Symmetric { .. } => self.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h_forward(&self) -> &Hamiltonian {
        &self.h_f
    }

    pub fn h_backward(&self) -> &Hamiltonian {
        &self.h_b
    }

    pub fn position(&self) -> &CMatrix {
        &self.x
    }

    pub fn momentum(&self) -> &Hamiltonian {
        &self.p
    }

    /// Reflection X → −X.
    pub fn parity(&self) -> &CMatrix {
        &self.parity
    }

    pub fn time_reversal(&self) -> &TimeReversal {
        &self.time_reversal
    }

    pub fn phi(&self) -> &CVector {
        &self.phi
    }

    /// Central block `d/4..3d/4` where the canonical commutator is trusted.
    pub fn interior(&self) -> Range<usize> {
        self.dim / 4..3 * self.dim / 4
    }

    /// ModelParams consistent with this realization's λ: σ_t = √(θ/λ).
    pub fn model_params(&self, theta: f64, n_steps: u64) -> Result<ModelParams> {
        if self.lambda == 0.0 || theta / self.lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "θ = {theta} is incompatible with λ = {}",
                self.lambda
            )));
        }
        ModelParams::new((theta / self.lambda).sqrt(), theta, n_steps)
    }

    fn check_lambda(&self, params: &ModelParams) -> Result<()> {
        let expect = params.lambda();
        if (expect - self.lambda).abs() > 1e-10 * self.lambda.abs().max(expect.abs()) {
            return Err(Error::LambdaMismatch {
                realization: self.lambda,
                params: expect,
            });
        }
        Ok(())
    }

    /// Largest |entry| of `[H_B, H_F] − iλ` over the interior block.
    pub fn commutator_defect(&self) -> f64 {
        let hf = self.h_f.matrix();
        let hb = self.h_b.matrix();
        let comm = hb * hf - hf * hb;
        interior_block_defect(&comm, I * self.lambda, self.interior())
    }

    /// Same as [`commutator_defect`](Self::commutator_defect) but over the
    /// full matrix, exposing the truncation edge.
    pub fn commutator_edge_defect(&self) -> f64 {
        let hf = self.h_f.matrix();
        let hb = self.h_b.matrix();
        let comm = hb * hf - hf * hb;
        interior_block_defect(&comm, I * self.lambda, 0..self.dim)
    }

    /// Largest |entry| of `T⁻¹H_F T − H_B` over the interior block.
    pub fn time_reversal_defect(&self) -> f64 {
        let mapped = self.time_reversal.conjugate_operator(self.h_f.matrix());
        let diff = mapped - self.h_b.matrix();
        interior_block_defect(&diff, Complex64::new(0.0, 0.0), self.interior())
    }

    /// Mass of `v` in the last quarter of the ladder.
    pub fn edge_weight(&self, v: &CVector) -> f64 {
        let start = 3 * self.dim / 4;
        v.iter().skip(start).map(|c| c.norm_sqr()).sum::<f64>() / v.norm_squared()
    }

    /// Moments of H_F and H_B in state `v`.
    pub fn energy_statistics(&self, v: &CVector) -> EnergyStatistics {
        let v = v / cr(v.norm());
        let hf = self.h_f.matrix();
        let hb = self.h_b.matrix();
        let hf_v = hf * &v;
        let hb_v = hb * &v;
        let mean_f = v.dotc(&hf_v).re;
        let mean_b = v.dotc(&hb_v).re;
        let var_f = hf_v.norm_squared() - mean_f * mean_f;
        let var_b = hb_v.norm_squared() - mean_b * mean_b;
        // ⟨{H_F, H_B}⟩ = 2 Re⟨H_F v | H_B v⟩.
        let anti = 2.0 * hf_v.dotc(&hb_v).re;
        let commutator = hb_v.dotc(&hf_v) - hf_v.dotc(&hb_v);
        EnergyStatistics {
            var_forward: var_f,
            var_backward: var_b,
            covariance: 0.5 * anti - mean_f * mean_b,
            commutator,
        }
    }
}

/// Variances, symmetrized covariance and `⟨[H_B, H_F]⟩` of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStatistics {
    pub var_forward: f64,
    pub var_backward: f64,
    pub covariance: f64,
    pub commutator: Complex64,
}

impl EnergyStatistics {
    /// ΔH_F·ΔH_B.
    pub fn uncertainty_product(&self) -> f64 {
        (self.var_forward * self.var_backward).sqrt()
    }
}

fn interior_block_defect(m: &CMatrix, diagonal: Complex64, block: Range<usize>) -> f64 {
    let mut worst = 0.0f64;
    for i in block.clone() {
        for j in block.clone() {
            let target = if i == j {
                diagonal
            } else {
                Complex64::new(0.0, 0.0)
            };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    let overlap = a.dotc(b).norm_sqr();
    (overlap / (a.norm_squared() * b.norm_squared())).clamp(0.0, 1.0)
}

/// `[exp(iH_B δt) + exp(−iH_F δt)]^N |φ⟩`, applied level by level.
pub fn path_sum_direct(real: &OperatorRealization, n_steps: u64, delta_t: f64) -> CVector {
    let back = real.h_b.propagator(-delta_t);
    let fwd = real.h_f.propagator(delta_t);
    let mut v = real.phi.clone();
    for _ in 0..n_steps {
        v = &*back * &v + &*fwd * &v;
    }
    v
}

/// `Σ_n I_{N−n,n}(δt²λ) exp[iH_B(N−n)δt] exp[−iH_F nδt] |φ⟩`.
pub fn path_sum_closed(real: &OperatorRealization, n_steps: u64, delta_t: f64) -> Result<CVector> {
    let sigma_t = delta_t * (n_steps as f64).sqrt();
    let params = ModelParams::from_lambda(sigma_t, real.lambda, n_steps)?;
    let weights = InterferenceScan::new(&params)
        .map(|amp| amp.and_then(|a| a.to_complex()))
        .collect::<Result<Vec<_>>>()?;

    let back = real.h_b.propagator(-delta_t);
    let fwd = real.h_f.propagator(delta_t);
    // Horner form: term n picks up N − n backward steps.
    let mut forward_state = real.phi.clone();
    let mut acc = CVector::zeros(real.dim);
    for (n, w) in weights.iter().enumerate() {
        if n > 0 {
            forward_state = &*fwd * &forward_state;
            acc = &*back * &acc;
        }
        acc += &forward_state * *w;
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct PathExpansionResult {
    pub state_direct: CVector,
    pub state_closed: CVector,
    pub fidelity: f64,
}

/// Compare the iterated product with the interference-weighted closed form.
pub fn compare_path_sums(
    real: &OperatorRealization,
    n_steps: u64,
    delta_t: f64,
) -> Result<PathExpansionResult> {
    let state_direct = path_sum_direct(real, n_steps, delta_t);
    let state_closed = path_sum_closed(real, n_steps, delta_t)?;
    let fidelity = fidelity(&state_direct, &state_closed);
    Ok(PathExpansionResult {
        state_direct,
        state_closed,
        fidelity,
    })
}

/// Overlaps of a state with the time-translated references
/// `exp[−iH(2n−N)δt]|φ⟩`, n = 0..=N, using H_F as the generator.
pub fn clock_profile(
    real: &OperatorRealization,
    state: &CVector,
    n_steps: u64,
    delta_t: f64,
) -> Vec<Complex64> {
    (0..=n_steps)
        .map(|n| {
            let shift = (2.0 * n as f64 - n_steps as f64) * delta_t;
            let reference = real.h_f.evolve(&real.phi, shift);
            reference.dotc(state)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BchCheck {
    /// `‖e^{−iH_F t1}e^{iH_B t2}φ − e^{−iλt1t2}·e^{iH_B t2}e^{−iH_F t1}φ‖`.
    pub discrepancy: f64,
    /// Measured φ with `lhs = e^{−iφ}·rhs`, wrapped to (−π, π].
    pub phase: f64,
}

/// Reordering `e^{−iH_F t1} e^{iH_B t2} = e^{−iλ t1 t2} e^{iH_B t2} e^{−iH_F t1}` on |φ⟩.
pub fn bch_reorder_check(real: &OperatorRealization, t1: f64, t2: f64) -> BchCheck {
    let phi = &real.phi;
    let lhs = real.h_f.evolve(&real.h_b.evolve(phi, -t2), t1);
    let rhs = real.h_b.evolve(&real.h_f.evolve(phi, t1), -t2);
    let predicted = Complex64::from_polar(1.0, -real.lambda * t1 * t2);
    let discrepancy = (&lhs - &rhs * predicted).norm();
    let phase = -rhs.dotc(&lhs).arg();
    BchCheck { discrepancy, phase }
}

/// H_phen = a_+ H_F − a_− H_B.
fn phenomenological_matrix(real: &OperatorRealization, params: &ModelParams) -> Result<CMatrix> {
    let peaks = analytic_peaks(params)?;
    Ok(real.h_f.matrix() * cr(peaks.a_plus) - real.h_b.matrix() * cr(peaks.a_minus))
}

/// Coarse-grained generator H_phen = a_+ H_F − a_− H_B for these parameters.
pub fn phenomenological_hamiltonian(
    real: &OperatorRealization,
    params: &ModelParams,
) -> Result<Hamiltonian> {
    real.check_lambda(params)?;
    Ok(Hamiltonian::new(phenomenological_matrix(real, params)?))
}

/// Unit-norm `exp[−i(H_F a_+ − H_B a_−)t_c]|φ⟩` at the given clock time.
pub fn coarse_grained_state_at(
    real: &OperatorRealization,
    params: &ModelParams,
    t_c: f64,
) -> Result<CVector> {
    let h = phenomenological_hamiltonian(real, params)?;
    let v = h.evolve(&real.phi, t_c);
    let n = v.norm();
    Ok(v / cr(n))
}

/// Coarse-grained state at the representative clock time t_c^(peak).
pub fn coarse_grain_state(real: &OperatorRealization, params: &ModelParams) -> Result<CVector> {
    let peaks = analytic_peaks(params)?;
    coarse_grained_state_at(real, params, peaks.t_c_peak)
}

/// The dominant single path `exp[iH_B(N − n_+)δt] exp[−iH_F n_+ δt]|φ⟩`,
/// with n_+ kept real.
pub fn peak_path_state(real: &OperatorRealization, params: &ModelParams) -> Result<CVector> {
    real.check_lambda(params)?;
    let peaks = analytic_peaks(params)?;
    let dt = params.delta_t();
    let n_total = params.n_steps() as f64;
    let v = real.h_f.evolve(&real.phi, peaks.n_plus * dt);
    Ok(real.h_b.evolve(&v, -(n_total - peaks.n_plus) * dt))
}

/// Central-difference residual of the coarse-grained Schrödinger equation,
/// `‖(Υ(t+h) − Υ(t−h))/2h + iH_phen Υ(t)‖` with `Υ(t) = e^{−iH_phen t}|φ⟩`.
pub fn schrodinger_residual(
    real: &OperatorRealization,
    params: &ModelParams,
    t_c: f64,
    h: f64,
) -> Result<f64> {
    let ham = phenomenological_hamiltonian(real, params)?;
    Ok(residual_with(&ham, &real.phi, t_c, h))
}

fn residual_with(ham: &Hamiltonian, phi: &CVector, t_c: f64, h: f64) -> f64 {
    let now = ham.evolve(phi, t_c);
    let ahead = ham.evolve(phi, t_c + h);
    let behind = ham.evolve(phi, t_c - h);
    let derivative = (ahead - behind) / cr(2.0 * h);
    (derivative + (ham.matrix() * now) * I).norm()
}

/// Residuals for a sequence of step sizes, sharing one eigendecomposition.
pub fn schrodinger_sweep(
    real: &OperatorRealization,
    params: &ModelParams,
    t_c: f64,
    steps: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let ham = phenomenological_hamiltonian(real, params)?;
    Ok(steps
        .iter()
        .map(|&h| (h, residual_with(&ham, &real.phi, t_c, h)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhenomenologicalCommutator {
    /// Mean diagonal of `[H_phen, T⁻¹H_phen T]` over the interior block.
    pub scalar: Complex64,
    /// `−i(θ/2π)λ`.
    pub target: Complex64,
    /// `(a_+² − a_−²)·(−iλ)` from the coarse-graining weights alone.
    pub from_weights: Complex64,
    /// Largest deviation of the interior block from `scalar·Id`.
    pub interior_defect: f64,
}

impl PhenomenologicalCommutator {
    pub fn relative_error(&self) -> f64 {
        (self.scalar - self.target).norm() / self.target.norm()
    }
}

/// Commutator of the coarse-grained generator with its time-reversed form.
pub fn phenomenological_commutator(
    real: &OperatorRealization,
    params: &ModelParams,
) -> Result<PhenomenologicalCommutator> {
    real.check_lambda(params)?;
    let peaks = analytic_peaks(params)?;
    let h = phenomenological_matrix(real, params)?;
    let reversed = real.time_reversal.conjugate_operator(&h);
    let comm = &h * &reversed - &reversed * &h;
    let block = real.interior();
    let count = block.len() as f64;
    let scalar = block.clone().map(|k| comm[(k, k)]).sum::<Complex64>() / count;
    let interior_defect = interior_block_defect(&comm, scalar, block);
    let lambda = real.lambda;
    Ok(PhenomenologicalCommutator {
        scalar,
        target: -I * (params.theta() / (2.0 * PI)) * lambda,
        from_weights: -I * lambda * (peaks.a_plus.powi(2) - peaks.a_minus.powi(2)),
        interior_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityCheck {
    /// Largest column norm of `Π⁻¹e^{−iP̂x'}Π − e^{iP̂x'}` over interior columns.
    pub translation_defect: f64,
    /// Largest |entry| of `Π⁻¹P̂Π + P̂` over the interior block.
    pub momentum_defect: f64,
}

/// Parity turns a translation by x' into a translation by −x'.
pub fn parity_translation_check(real: &OperatorRealization, x_shift: f64) -> ParityCheck {
    let parity = &real.parity;
    let forward = real.p.propagator(x_shift);
    let backward = real.p.propagator(-x_shift);
    // Π is its own inverse.
    let diff = parity * &*forward * parity - &*backward;
    let translation_defect = real
        .interior()
        .map(|j| diff.column(j).norm())
        .fold(0.0, f64::max);
    let flipped = parity * real.p.matrix() * parity + real.p.matrix();
    ParityCheck {
        translation_defect,
        momentum_defect: interior_block_defect(&flipped, Complex64::new(0.0, 0.0), real.interior()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_dimension() {
        assert_eq!(
            build_realization(8, 1.0).unwrap_err(),
            Error::DimTooSmall { dim: 8 }
        );
        assert_eq!(
            build_realization(15, 0.0).unwrap_err(),
            Error::DimTooSmall { dim: 15 }
        );
    }

    #[test]
    fn hermitian_pair() {
        let r = build_realization(32, 0.7).unwrap();
        for h in [r.h_forward(), r.h_backward()] {
            let m = h.matrix();
            let asym = (m - m.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(asym <= 1e-12);
        }
    }

    #[test]
    fn edge_defect_is_visible() {
        let r = build_realization(32, 1.0).unwrap();
        assert!(r.commutator_defect() < 1e-12);
        // The last ladder state carries the full truncation error −iλ·d.
        assert!(r.commutator_edge_defect() > 10.0);
    }

    #[test]
    fn negative_lambda_swaps_roles() {
        let r = build_realization(64, -0.5).unwrap();
        assert!(r.commutator_defect() < 1e-12);
        assert!(r.time_reversal_defect() == 0.0);
    }

    #[test]
    fn parity_is_an_involution() {
        let r = build_realization(64, 1.0).unwrap();
        let sq = r.parity() * r.parity();
        assert_eq!(sq, CMatrix::identity(64, 64));
    }

    #[test]
    fn reversal_twice_is_identity() {
        let r = build_realization(32, 1.0).unwrap();
        let v = Wavepacket {
            x0: 0.3,
            p0: -0.7,
            width: 0.8,
        }
        .to_state(32);
        let back = r.time_reversal().apply(&r.time_reversal().apply(&v));
        assert_eq!(back, v);
    }

    #[test]
    fn propagator_is_cached_and_unitary() {
        let r = build_realization(64, 1.0).unwrap();
        let u1 = r.h_forward().propagator(0.37);
        let u2 = r.h_forward().propagator(0.37);
        assert!(Arc::ptr_eq(&u1, &u2));
        let v = r.phi();
        assert!(((&*u1 * v).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packet_moments() {
        let w = Wavepacket {
            x0: 1.5,
            p0: -0.5,
            width: 0.5,
        };
        let dim = 96;
        let v = w.to_state(dim);
        let (x, p) = canonical_pair(dim);
        let mx = v.dotc(&(&x * &v)).re;
        let mp = v.dotc(&(&p * &v)).re;
        let vx = v.dotc(&(&x * &x * &v)).re - mx * mx;
        assert!((mx - 1.5).abs() < 1e-10, "⟨x⟩ = {mx}");
        assert!((mp + 0.5).abs() < 1e-10, "⟨p⟩ = {mp}");
        assert!((vx - 0.125).abs() < 1e-10, "var x = {vx}");
    }

    #[test]
    fn path_sums_at_n1() {
        let r = build_realization(64, 1.0).unwrap();
        let dt = 0.4;
        let direct = path_sum_direct(&r, 1, dt);
        let expect = r.h_backward().evolve(r.phi(), -dt) + r.h_forward().evolve(r.phi(), dt);
        assert!((&direct - &expect).norm() < 1e-14);
    }

    #[test]
    fn lambda_mismatch_is_reported() {
        let r = build_realization(32, 1.0).unwrap();
        let p = ModelParams::new(1.0, 2.5 * PI, 10).unwrap();
        assert!(matches!(
            phenomenological_commutator(&r, &p),
            Err(Error::LambdaMismatch { .. })
        ));
    }
}
