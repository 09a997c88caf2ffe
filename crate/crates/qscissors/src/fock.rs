//! Multi-mode Fock basis enumeration, ladder operators, and dense
//! Hamiltonian assembly for pumped Kerr nonlinear couplers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("mode count must be at least 1")]
    ZeroModes,
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("basis dimension (cutoff+1)^modes overflows usize")]
    DimensionOverflow,
    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("spec has {spec_modes} modes but basis has {basis_modes}")]
    ModeMismatch {
        spec_modes: usize,
        basis_modes: usize,
    },
    #[error("chi has {chi} entries and pumps has {pumps}, expected {modes}")]
    SpecLengthMismatch {
        modes: usize,
        chi: usize,
        pumps: usize,
    },
    #[error("Kerr constant chi[{0}] is negative")]
    NegativeChi(usize),
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("amplitude vector has {got} entries, basis dimension is {dim}")]
    AmplitudeLength { got: usize, dim: usize },
}

/// Enumerated occupation basis for `modes` bosonic modes, each truncated at
/// `cutoff` photons. States are ordered lexicographically with mode 1 most
/// significant, so for two modes with cutoff 1 the order is
/// `(0,0), (0,1), (1,0), (1,1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
    cutoff: usize,
    dim: usize,
}

impl FockBasis {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self, FockError> {
        if modes == 0 {
            return Err(FockError::ZeroModes);
        }
        if cutoff == 0 {
            return Err(FockError::ZeroCutoff);
        }
        let levels = cutoff + 1;
        let mut dim: usize = 1;
        for _ in 0..modes {
            dim = dim
                .checked_mul(levels)
                .ok_or(FockError::DimensionOverflow)?;
        }
        Ok(Self { modes, cutoff, dim })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of an occupation tuple, or `None` if any occupation exceeds the
    /// cutoff or the length does not match the mode count.
    pub fn index(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.modes {
            return None;
        }
        let levels = self.cutoff + 1;
        let mut idx = 0usize;
        for &n in occupation {
            if n > self.cutoff {
                return None;
            }
            idx = idx * levels + n;
        }
        Some(idx)
    }

    /// Occupation tuple of a basis index. Panics if `index >= dim()`.
    pub fn occupation(&self, index: usize) -> Vec<usize> {
        assert!(index < self.dim, "basis index {index} out of range");
        let levels = self.cutoff + 1;
        let mut occ = vec![0usize; self.modes];
        let mut rest = index;
        for p in (0..self.modes).rev() {
            occ[p] = rest % levels;
            rest /= levels;
        }
        occ
    }

    pub fn occupations(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.dim).map(|i| self.occupation(i))
    }

    fn check_mode(&self, mode: usize) -> Result<(), FockError> {
        if mode >= self.modes {
            Err(FockError::ModeOutOfRange {
                mode,
                modes: self.modes,
            })
        } else {
            Ok(())
        }
    }
}

/// Couplings of the pumped Kerr coupler: Kerr constants `chi`, a single
/// inter-mode coupling `epsilon` applied to every mode pair, and one pump
/// amplitude per mode. All rates are angular frequencies in s^-1 with
/// hbar = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub modes: usize,
    pub chi: Vec<f64>,
    pub epsilon: Complex64,
    pub pumps: Vec<Complex64>,
}

impl SystemSpec {
    pub fn new(
        chi: Vec<f64>,
        epsilon: Complex64,
        pumps: Vec<Complex64>,
    ) -> Result<Self, FockError> {
        let modes = chi.len();
        let spec = Self {
            modes,
            chi,
            epsilon,
            pumps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FockError> {
        if self.modes == 0 {
            return Err(FockError::ZeroModes);
        }
        if self.chi.len() != self.modes || self.pumps.len() != self.modes {
            return Err(FockError::SpecLengthMismatch {
                modes: self.modes,
                chi: self.chi.len(),
                pumps: self.pumps.len(),
            });
        }
        if let Some(p) = self.chi.iter().position(|&c| c < 0.0) {
            return Err(FockError::NegativeChi(p));
        }
        Ok(())
    }

    /// Ratio chi_min / max(|epsilon|, |alpha_p|). The weak-coupling regime
    /// the truncation relies on corresponds to a large value; this is
    /// advisory and never enforced.
    pub fn weak_coupling_ratio(&self) -> f64 {
        let chi_min = self.chi.iter().cloned().fold(f64::INFINITY, f64::min);
        let coupling = self
            .pumps
            .iter()
            .map(|a| a.norm())
            .fold(self.epsilon.norm(), f64::max);
        if coupling == 0.0 {
            f64::INFINITY
        } else {
            chi_min / coupling
        }
    }
}

/// Normalized complex amplitude vector over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: FockBasis,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Norm must equal 1 within `1e-12`.
    pub fn new(basis: FockBasis, amplitudes: DVector<Complex64>) -> Result<Self, FockError> {
        Self::with_tolerance(basis, amplitudes, 1e-12)
    }

    /// Looser norm check for states produced by approximate integrators.
    pub fn with_tolerance(
        basis: FockBasis,
        amplitudes: DVector<Complex64>,
        tol: f64,
    ) -> Result<Self, FockError> {
        if amplitudes.len() != basis.dim() {
            return Err(FockError::AmplitudeLength {
                got: amplitudes.len(),
                dim: basis.dim(),
            });
        }
        let dev = (amplitudes.norm() - 1.0).abs();
        if dev > tol {
            return Err(FockError::NotNormalized(dev));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn vacuum(basis: FockBasis) -> Self {
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { basis, amplitudes }
    }

    /// The basis state |occupation>.
    pub fn fock_state(basis: FockBasis, occupation: &[usize]) -> Result<Self, FockError> {
        let idx = basis.index(occupation).ok_or(FockError::ModeOutOfRange {
            mode: occupation.len(),
            modes: basis.modes(),
        })?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Re-express the state on a basis with a larger cutoff; added
    /// occupation levels carry zero amplitude.
    pub fn embed(&self, cutoff: usize) -> Result<Self, FockError> {
        if cutoff < self.basis.cutoff() {
            return Err(FockError::ZeroCutoff);
        }
        let target = FockBasis::new(self.basis.modes(), cutoff)?;
        let mut amplitudes = DVector::zeros(target.dim());
        for (i, occ) in self.basis.occupations().enumerate() {
            let j = target.index(&occ).expect("embedding preserves occupations");
            amplitudes[j] = self.amplitudes[i];
        }
        Ok(Self {
            basis: target,
            amplitudes,
        })
    }
}

/// Dense Hermitian matrix over a [`FockBasis`], in s^-1 with hbar = 1.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    basis: FockBasis,
    matrix: DMatrix<Complex64>,
}

impl Hamiltonian {
    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Largest entrywise deviation |H - H^dagger|.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Annihilation operator a_p on the chosen mode (identity on the rest):
/// <n-1| a |n> = sqrt(n). Occupations above the cutoff have no image, so
/// the operator truncates at the top level.
pub fn annihilation(basis: &FockBasis, mode: usize) -> Result<DMatrix<Complex64>, FockError> {
    basis.check_mode(mode)?;
    let dim = basis.dim();
    let mut a = DMatrix::zeros(dim, dim);
    for (i, occ) in basis.occupations().enumerate() {
        let n = occ[mode];
        if n >= 1 {
            let mut lower = occ.clone();
            lower[mode] = n - 1;
            let j = basis.index(&lower).expect("lowered occupation is in range");
            a[(j, i)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    Ok(a)
}

/// H = sum_p (chi_p/2) a_p^dag^2 a_p^2
///   + sum_{p<q} (eps a_p^dag a_q + eps* a_p a_q^dag)
///   + sum_p (alpha_p a_p^dag + alpha_p* a_p).
pub fn build_hamiltonian(spec: &SystemSpec, basis: &FockBasis) -> Result<Hamiltonian, FockError> {
    spec.validate()?;
    if spec.modes != basis.modes() {
        return Err(FockError::ModeMismatch {
            spec_modes: spec.modes,
            basis_modes: basis.modes(),
        });
    }
    let dim = basis.dim();
    let cutoff = basis.cutoff();
    let mut h: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
    for (i, occ) in basis.occupations().enumerate() {
        // Kerr terms are diagonal: (chi_p/2) n_p (n_p - 1).
        let mut diag = 0.0;
        for p in 0..spec.modes {
            let n = occ[p] as f64;
            diag += 0.5 * spec.chi[p] * n * (n - 1.0);
        }
        h[(i, i)] += Complex64::new(diag, 0.0);
        for p in 0..spec.modes {
            // Pump: alpha_p a_p^dag raises mode p.
            if occ[p] + 1 <= cutoff {
                let mut raised = occ.clone();
                raised[p] += 1;
                let j = basis.index(&raised).expect("raised occupation in range");
                let elem = spec.pumps[p] * ((occ[p] + 1) as f64).sqrt();
                h[(j, i)] += elem;
                h[(i, j)] += elem.conj();
            }
            // Coupling: eps a_p^dag a_q moves one photon from q to p.
            for q in (p + 1)..spec.modes {
                if occ[q] >= 1 && occ[p] + 1 <= cutoff {
                    let mut moved = occ.clone();
                    moved[p] += 1;
                    moved[q] -= 1;
                    let j = basis.index(&moved).expect("moved occupation in range");
                    let elem =
                        spec.epsilon * (((occ[p] + 1) * occ[q]) as f64).sqrt();
                    h[(j, i)] += elem;
                    h[(i, j)] += elem.conj();
                }
            }
        }
    }
    Ok(Hamiltonian {
        basis: basis.clone(),
        matrix: h,
    })
}

/// Amplitudes of the occupations-<=-1 subspace (indexed lexicographically
/// over {0,1}^modes, unrenormalized) and the probability weight outside it.
pub fn project_qubit(state: &StateVector) -> (Vec<Complex64>, f64) {
    let basis = state.basis();
    let modes = basis.modes();
    let qubit_dim = 1usize << modes;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); qubit_dim];
    let mut retained = 0.0;
    for q in 0..qubit_dim {
        let occ: Vec<usize> = (0..modes).map(|p| (q >> (modes - 1 - p)) & 1).collect();
        if let Some(i) = basis.index(&occ) {
            let c = state.amplitudes()[i];
            amplitudes[q] = c;
            retained += c.norm_sqr();
        }
    }
    let leakage = (1.0 - retained).clamp(0.0, 1.0);
    (amplitudes, leakage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn smallest_qubit_basis() {
        let b = FockBasis::new(2, 1).unwrap();
        assert_eq!(b.dim(), 4);
        let states: Vec<_> = b.occupations().collect();
        assert_eq!(
            states,
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn three_mode_qubit_dimension() {
        assert_eq!(FockBasis::new(3, 1).unwrap().dim(), 8);
    }

    #[test]
    fn lexicographic_index() {
        let b = FockBasis::new(2, 5).unwrap();
        assert_eq!(b.dim(), 36);
        assert_eq!(b.index(&[2, 3]), Some(15));
    }

    #[test]
    fn index_occupation_bijection() {
        let b = FockBasis::new(3, 2).unwrap();
        for i in 0..b.dim() {
            assert_eq!(b.index(&b.occupation(i)), Some(i));
        }
    }

    #[test]
    fn rejects_zero_modes_and_overflow() {
        assert!(matches!(FockBasis::new(0, 1), Err(FockError::ZeroModes)));
        assert!(matches!(
            FockBasis::new(64, usize::MAX / 2),
            Err(FockError::DimensionOverflow)
        ));
    }

    #[test]
    fn annihilation_ladder_elements() {
        let b = FockBasis::new(1, 1).unwrap();
        let a = annihilation(&b, 0).unwrap();
        // a|1> = |0>, a|0> = 0
        assert_abs_diff_eq!(a[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert_eq!(a.column(0).iter().map(|z| z.norm()).sum::<f64>(), 0.0);

        let b2 = FockBasis::new(1, 2).unwrap();
        let a2 = annihilation(&b2, 0).unwrap();
        assert_abs_diff_eq!(a2[(1, 2)].re, 2.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn number_operator_diagonal() {
        let b = FockBasis::new(2, 3).unwrap();
        for mode in 0..2 {
            let a = annihilation(&b, mode).unwrap();
            let n = a.adjoint() * &a;
            for (i, occ) in b.occupations().enumerate() {
                assert_abs_diff_eq!(n[(i, i)].re, occ[mode] as f64, epsilon = 1e-12);
                assert_abs_diff_eq!(n[(i, i)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn annihilation_rejects_bad_mode() {
        let b = FockBasis::new(2, 1).unwrap();
        assert!(annihilation(&b, 2).is_err());
    }

    #[test]
    fn commutator_on_interior_block() {
        let b = FockBasis::new(2, 3).unwrap();
        let a = annihilation(&b, 0).unwrap();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for (i, occ) in b.occupations().enumerate() {
            if occ[0] <= b.cutoff() - 1 {
                assert_abs_diff_eq!(comm[(i, i)].re, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn distinct_mode_operators_commute() {
        let b = FockBasis::new(2, 2).unwrap();
        let a0 = annihilation(&b, 0).unwrap();
        let a1 = annihilation(&b, 1).unwrap();
        let d = &a0 * &a1 - &a1 * &a0;
        assert_eq!(d.iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
    }

    #[test]
    fn zero_couplings_give_zero_matrix() {
        let spec = SystemSpec::new(vec![0.0, 0.0], c(0.0, 0.0), vec![c(0.0, 0.0); 2]).unwrap();
        let b = FockBasis::new(2, 2).unwrap();
        let h = build_hamiltonian(&spec, &b).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_matrix_elements_by_hand() {
        let chi1 = 3.0e7;
        let eps = c(4.0e5, 0.0);
        let alpha1 = c(2.0e5, 0.0);
        let spec = SystemSpec::new(vec![chi1, 5.0e7], eps, vec![alpha1, c(0.0, 0.0)]).unwrap();
        let b = FockBasis::new(2, 2).unwrap();
        let h = build_hamiltonian(&spec, &b).unwrap();
        let idx = |o: &[usize]| b.index(o).unwrap();
        // <(2,0)| H_non |(2,0)> = chi1 (from (chi1/2) * 2 * 1)
        assert_abs_diff_eq!(h.matrix()[(idx(&[2, 0]), idx(&[2, 0]))].re, chi1, epsilon = 1.0);
        // <(1,1)| H_int |(0,2)> = eps * sqrt(1) * sqrt(2)
        assert_abs_diff_eq!(
            h.matrix()[(idx(&[1, 1]), idx(&[0, 2]))].re,
            eps.re * 2.0f64.sqrt(),
            epsilon = 1e-6
        );
        // <(1,0)| H_ext |(0,0)> = alpha1
        assert_abs_diff_eq!(
            h.matrix()[(idx(&[1, 0]), idx(&[0, 0]))].re,
            alpha1.re,
            epsilon = 1e-9
        );
    }

    #[test]
    fn single_pump_is_two_pump_with_zero_alpha2() {
        let eps = c(5e5, 0.0);
        let one = SystemSpec::new(vec![1e8, 1e8], eps, vec![c(5e5, 0.0), c(0.0, 0.0)]).unwrap();
        let two = SystemSpec {
            pumps: vec![c(5e5, 0.0), c(0.0, 0.0)],
            ..one.clone()
        };
        let b = FockBasis::new(2, 2).unwrap();
        let h1 = build_hamiltonian(&one, &b).unwrap();
        let h2 = build_hamiltonian(&two, &b).unwrap();
        assert_eq!(h1.matrix(), h2.matrix());
    }

    #[test]
    fn spec_rejects_mismatched_basis() {
        let spec = SystemSpec::new(vec![1e8; 3], c(5e5, 0.0), vec![c(0.0, 0.0); 3]).unwrap();
        let b = FockBasis::new(2, 1).unwrap();
        assert!(build_hamiltonian(&spec, &b).is_err());
    }

    #[test]
    fn project_qubit_supported_state() {
        let b = FockBasis::new(2, 2).unwrap();
        let s = StateVector::fock_state(b, &[1, 0]).unwrap();
        let (amps, leak) = project_qubit(&s);
        assert_eq!(amps.len(), 4);
        assert_abs_diff_eq!(amps[2].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(leak, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn project_qubit_pure_leakage() {
        let b = FockBasis::new(2, 2).unwrap();
        let s = StateVector::fock_state(b, &[2, 0]).unwrap();
        let (amps, leak) = project_qubit(&s);
        assert!(amps.iter().all(|a| a.norm() == 0.0));
        assert_abs_diff_eq!(leak, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn state_rejects_bad_norm() {
        let b = FockBasis::new(2, 1).unwrap();
        let v = DVector::from_element(4, c(0.5001, 0.0));
        assert!(StateVector::new(b, v).is_err());
    }

    proptest! {
        #[test]
        fn hamiltonian_is_hermitian(
            chi in prop::collection::vec(0.0f64..1e8, 2..=3),
            eps_re in -1e6f64..1e6,
            eps_im in -1e6f64..1e6,
            pump_re in prop::collection::vec(-1e6f64..1e6, 3),
            pump_im in prop::collection::vec(-1e6f64..1e6, 3),
        ) {
            let modes = chi.len();
            let pumps: Vec<Complex64> = (0..modes)
                .map(|p| c(pump_re[p], pump_im[p]))
                .collect();
            let spec = SystemSpec::new(chi, c(eps_re, eps_im), pumps).unwrap();
            let basis = FockBasis::new(modes, 2).unwrap();
            let h = build_hamiltonian(&spec, &basis).unwrap();
            let bound = 1e-12 * h.max_abs().max(1.0);
            prop_assert!(h.hermiticity_defect() <= bound);
        }

        #[test]
        fn basis_roundtrip(modes in 1usize..=3, cutoff in 1usize..=4, seed in 0usize..10_000) {
            let b = FockBasis::new(modes, cutoff).unwrap();
            let i = seed % b.dim();
            prop_assert_eq!(b.index(&b.occupation(i)), Some(i));
        }
    }
}
