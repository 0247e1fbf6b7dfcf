//! Gaussian states, their ladder-basis moments and symplectic maps.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::real::{lit, scaled_cosh_sinh, to_f64};
use crate::{Complex, Error, Real, Result};

/// Standard symplectic form `⊕ [[0, 1], [-1, 0]]` on `n_modes` modes.
pub fn symplectic_form<T: Real>(n_modes: usize) -> DMatrix<T> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = T::one();
        omega[(2 * k + 1, 2 * k)] = -T::one();
    }
    omega
}

/// Parameters `(α, ξ = r e^{iθ}, n̄)` of the displaced squeezed thermal state
/// `D(α) S(ξ) ρ_n̄ S(ξ)† D(α)†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwSignalParams<T: Real> {
    pub alpha: Complex<T>,
    pub r: T,
    pub theta: T,
    pub nbar: T,
}

impl<T: Real> GwSignalParams<T> {
    pub fn new(alpha: Complex<T>, r: T, theta: T, nbar: T) -> Result<Self> {
        if !(r >= T::zero()) {
            return Err(Error::param("r", "squeezing magnitude must be non-negative"));
        }
        if !(nbar >= T::zero()) {
            return Err(Error::param("nbar", "thermal occupation must be non-negative"));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() || !theta.is_finite() {
            return Err(Error::param("alpha", "displacement and angle must be finite"));
        }
        Ok(Self { alpha, r, theta, nbar })
    }

    pub fn vacuum() -> Self {
        Self::coherent(Complex::new(T::zero(), T::zero()))
    }

    pub fn coherent(alpha: Complex<T>) -> Self {
        Self {
            alpha,
            r: T::zero(),
            theta: T::zero(),
            nbar: T::zero(),
        }
    }

    pub fn thermal(nbar: T) -> Self {
        Self { nbar, ..Self::vacuum() }
    }

    pub fn squeezed_vacuum(r: T, theta: T) -> Self {
        Self {
            r,
            theta,
            ..Self::vacuum()
        }
    }

    /// `n̄ + ½`, the thermal symplectic eigenvalue.
    pub fn thermal_scale(&self) -> T {
        self.nbar + lit(0.5)
    }

    /// Mean number of squeezed and thermal quanta, `(n̄+½)cosh 2r − ½`.
    pub fn n_q(&self) -> T {
        // n̄ + 2(n̄+½) sinh² r avoids cancellation at small r
        let sh = self.r.sinh();
        self.nbar + lit::<T>(2.0) * self.thermal_scale() * sh * sh
    }

    /// Total mean quanta `|α|² + n_q`.
    pub fn n_grav(&self) -> T {
        self.alpha.norm_sqr() + self.n_q()
    }

    /// Normal-ordered fluctuation moments `(N, M) = (<δa†δa>, <δa δa>)`.
    pub fn fluctuation_moments(&self) -> (T, Complex<T>) {
        let k = self.thermal_scale();
        let sh2 = (lit::<T>(2.0) * self.r).sinh();
        let m = Complex::new(self.theta.cos(), self.theta.sin()) * (-k * sh2);
        (self.n_q(), m)
    }
}

/// Diagnostic returned by [`GaussianState::check_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalityReport<T: Real> {
    /// Symplectic eigenvalues in ascending order; empty when the covariance
    /// matrix is not positive definite.
    pub symplectic_eigenvalues: Vec<T>,
    pub positive_definite: bool,
    pub physical: bool,
    pub tolerance: T,
}

impl<T: Real> PhysicalityReport<T> {
    pub fn min_symplectic_eigenvalue(&self) -> Option<T> {
        self.symplectic_eigenvalues.first().copied()
    }
}

/// N-mode Gaussian state as quadrature covariance matrix plus displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T: Real> {
    cov: DMatrix<T>,
    disp: DVector<T>,
}

impl<T: Real> GaussianState<T> {
    /// Validated constructor: symmetric to 1e-12 and physical to 1e-10.
    pub fn new(cov: DMatrix<T>, disp: DVector<T>) -> Result<Self> {
        let state = Self::new_unchecked(cov, disp)?;
        let report = state.check_physical();
        if !report.physical {
            let min = report
                .min_symplectic_eigenvalue()
                .map(to_f64)
                .unwrap_or(f64::NEG_INFINITY);
            return Err(Error::Unphysical(min));
        }
        Ok(state)
    }

    /// Checks shape and symmetry only; use [`check_physical`](Self::check_physical) to diagnose.
    pub fn new_unchecked(cov: DMatrix<T>, disp: DVector<T>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || cov.ncols() != dim {
            return Err(Error::param(
                "cov",
                format!("{}x{} is not 2N x 2N", cov.nrows(), cov.ncols()),
            ));
        }
        if disp.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: disp.len(),
            });
        }
        let asym = max_abs(&(&cov - cov.transpose()));
        if asym > T::tol(1e-12) * (T::one() + max_abs(&cov)) {
            return Err(Error::NotSymmetric(to_f64(asym)));
        }
        // store the exactly symmetric part
        let cov = (&cov + cov.transpose()) * lit::<T>(0.5);
        Ok(Self { cov, disp })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes >= 1, "at least one mode");
        Self {
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * lit::<T>(0.5),
            disp: DVector::zeros(2 * n_modes),
        }
    }

    /// Thermal state with occupation `nbar` on every mode.
    pub fn thermal(n_modes: usize, nbar: T) -> Result<Self> {
        if !(nbar >= T::zero()) {
            return Err(Error::param("nbar", "must be non-negative"));
        }
        let mut s = Self::vacuum(n_modes);
        s.cov = DMatrix::identity(2 * n_modes, 2 * n_modes) * (nbar + lit(0.5));
        Ok(s)
    }

    /// Single-mode state `F_ξ σ_n̄ F_ξᵀ`, `√2 (Re α, Im α)`, with
    /// `F_ξ = cosh r·I − sinh r·[[cos θ, sin θ], [sin θ, −cos θ]]`.
    pub fn from_gw(p: &GwSignalParams<T>) -> Result<Self> {
        let p = GwSignalParams::new(p.alpha, p.r, p.theta, p.nbar)?;
        let (ch, sh) = scaled_cosh_sinh(p.r, p.thermal_scale().ln());
        let (s, c) = p.theta.sin_cos();
        // F σ_n̄ Fᵀ written out with cosh 2r, sinh 2r
        let cov = DMatrix::from_row_slice(2, 2, &[ch - c * sh, -s * sh, -s * sh, ch + c * sh]);
        let sqrt2 = lit::<T>(2.0).sqrt();
        let disp = DVector::from_vec(vec![sqrt2 * p.alpha.re, sqrt2 * p.alpha.im]);
        Ok(Self { cov, disp })
    }

    pub fn num_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn cov(&self) -> &DMatrix<T> {
        &self.cov
    }

    pub fn disp(&self) -> &DVector<T> {
        &self.disp
    }

    /// Product state `self ⊗ other` with `self`'s modes first.
    pub fn tensor(&self, other: &Self) -> Self {
        let (a, b) = (self.cov.nrows(), other.cov.nrows());
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.cov);
        cov.view_mut((a, a), (b, b)).copy_from(&other.cov);
        let mut disp = DVector::zeros(a + b);
        disp.rows_mut(0, a).copy_from(&self.disp);
        disp.rows_mut(a, b).copy_from(&other.disp);
        Self { cov, disp }
    }

    /// `σ' = S σ Sᵀ`, `r' = S r + d`.
    pub fn apply_symplectic(&self, map: &SymplecticMap<T>) -> Result<Self> {
        if map.matrix.nrows() != self.cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.cov.nrows(),
                got: map.matrix.nrows(),
            });
        }
        let s = &map.matrix;
        let cov = s * &self.cov * s.transpose();
        let cov = (&cov + cov.transpose()) * lit::<T>(0.5);
        let disp = s * &self.disp + &map.displacement;
        Ok(Self { cov, disp })
    }

    /// Marginal on the listed modes, in the listed order.
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::param("keep", "no modes selected"));
        }
        let n = self.num_modes();
        if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
            return Err(Error::param("keep", format!("mode {bad} out of range for {n} modes")));
        }
        let idx: Vec<usize> = keep.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cov[(idx[i], idx[j])]);
        let disp = DVector::from_fn(idx.len(), |i, _| self.disp[idx[i]]);
        Ok(Self { cov, disp })
    }

    /// Symplectic eigenvalues, ascending. `None` if `cov` is not positive definite.
    pub fn symplectic_eigenvalues(&self) -> Option<Vec<T>> {
        let eig = self.cov.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&v| v <= T::zero()) {
            return None;
        }
        let sqrt_vals = eig.eigenvalues.map(|v| v.sqrt());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        // root·Ω·root is antisymmetric with eigenvalues ±iν
        let k = &root * symplectic_form::<T>(self.num_modes()) * &root;
        let sym = -(&k * &k);
        let sym = (&sym + sym.transpose()) * lit::<T>(0.5);
        let mut nu2: Vec<T> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
        nu2.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Some(nu2.chunks(2).map(|pair| pair[1].max(T::zero()).sqrt()).collect())
    }

    pub fn check_physical(&self) -> PhysicalityReport<T> {
        let tolerance = T::tol(1e-10);
        match self.symplectic_eigenvalues() {
            Some(nu) => {
                let physical = nu.iter().all(|&v| v >= lit::<T>(0.5) - tolerance);
                PhysicalityReport {
                    symplectic_eigenvalues: nu,
                    positive_definite: true,
                    physical,
                    tolerance,
                }
            }
            None => PhysicalityReport {
                symplectic_eigenvalues: Vec::new(),
                positive_definite: false,
                physical: false,
                tolerance,
            },
        }
    }

    /// Mean excitation number of one mode, `(σ_xx + σ_pp + x̄² + p̄² − 1)/2`.
    pub fn mean_number(&self, mode: usize) -> T {
        let (i, j) = (2 * mode, 2 * mode + 1);
        let half = lit::<T>(0.5);
        half * (self.cov[(i, i)] + self.cov[(j, j)] + self.disp[i] * self.disp[i] + self.disp[j] * self.disp[j]) - half
    }

    pub fn to_ladder(&self) -> LadderMoments<T> {
        LadderMoments::from_state(self)
    }
}

/// Ladder-basis moments `Σ = M σ M†`, `ā = M r̄` with `M = ⊕ (1/√2)[[1, i], [1, −i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMoments<T: Real> {
    sigma: DMatrix<Complex<T>>,
    abar: DVector<Complex<T>>,
    /// Single-mode `N` when known without the `Σ₁₁ − ½` cancellation.
    excess: Option<T>,
}

fn quadrature_to_ladder<T: Real>(n_modes: usize) -> DMatrix<Complex<T>> {
    let h = lit::<T>(0.5).sqrt();
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        let (i, j) = (2 * k, 2 * k + 1);
        m[(i, i)] = Complex::new(h, T::zero());
        m[(i, j)] = Complex::new(T::zero(), h);
        m[(j, i)] = Complex::new(h, T::zero());
        m[(j, j)] = Complex::new(T::zero(), -h);
    }
    m
}

fn complexify<T: Real>(m: &DMatrix<T>) -> DMatrix<Complex<T>> {
    m.map(|v| Complex::new(v, T::zero()))
}

impl<T: Real> LadderMoments<T> {
    pub fn from_state(s: &GaussianState<T>) -> Self {
        let m = quadrature_to_ladder::<T>(s.num_modes());
        let sigma = &m * complexify(&s.cov) * m.adjoint();
        let abar = &m * s.disp.map(|v| Complex::new(v, T::zero()));
        Self {
            sigma,
            abar,
            excess: None,
        }
    }

    /// Builds from raw ladder moments; checks shape and Hermiticity.
    pub fn new(sigma: DMatrix<Complex<T>>, abar: DVector<Complex<T>>) -> Result<Self> {
        let dim = sigma.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || sigma.ncols() != dim {
            return Err(Error::param("sigma", "must be 2N x 2N"));
        }
        if abar.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: abar.len(),
            });
        }
        let herm = (&sigma - sigma.adjoint())
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.modulus()));
        if herm > T::tol(1e-12) * (T::one() + sigma.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))) {
            return Err(Error::NotSymmetric(to_f64(herm)));
        }
        Ok(Self {
            sigma,
            abar,
            excess: None,
        })
    }

    /// Single mode from `N = <δa†δa>`, `M = <δa δa>` and `<a>`.
    pub fn single_mode(n: T, m: Complex<T>, mean: Complex<T>) -> Self {
        let half = lit::<T>(0.5);
        let d = Complex::new(n + half, T::zero());
        Self {
            sigma: DMatrix::from_row_slice(2, 2, &[d, m, m.conjugate(), d]),
            abar: DVector::from_vec(vec![mean, mean.conjugate()]),
            excess: Some(n),
        }
    }

    /// Moments of the GW state itself, built from `(N, M, α)` without going
    /// through the quadrature covariance.
    pub fn from_gw(p: &GwSignalParams<T>) -> Self {
        let (n, m) = p.fluctuation_moments();
        Self::single_mode(n, m, p.alpha)
    }

    /// Detector moments at `γt` for a GW state `p` and a vacuum detector, in
    /// the phase convention where `ā_bar = sin γt · ā_grav`.
    ///
    /// Products such as `sin²γt · cosh 2r` are formed in the log domain so that
    /// astrophysical `(r, γt)` pairs do not overflow.
    pub fn detector_after_swap(p: &GwSignalParams<T>, gamma_t: T) -> Self {
        let (s, c) = gamma_t.sin_cos();
        let half = lit::<T>(0.5);
        let zero = T::zero();
        let abs_s = s.abs();
        let (sig11, off) = if abs_s == zero {
            (half, Complex::new(zero, zero))
        } else {
            let log_scale = lit::<T>(2.0) * abs_s.ln() + p.thermal_scale().ln();
            let (ch, sh) = scaled_cosh_sinh(p.r, log_scale);
            (half * c * c + ch, Complex::new(p.theta.cos(), p.theta.sin()) * (-sh))
        };
        let re = Complex::new(sig11, zero);
        let sigma = DMatrix::from_row_slice(2, 2, &[re, off, off.conj(), re]);
        let a = p.alpha * s;
        let abar = DVector::from_vec(vec![a, a.conj()]);
        Self {
            sigma,
            abar,
            excess: Some(s * s * p.n_q()),
        }
    }

    pub fn num_modes(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn sigma(&self) -> &DMatrix<Complex<T>> {
        &self.sigma
    }

    pub fn abar(&self) -> &DVector<Complex<T>> {
        &self.abar
    }

    /// Inverse transform back to quadratures.
    pub fn to_state(&self) -> Result<GaussianState<T>> {
        let m = quadrature_to_ladder::<T>(self.num_modes());
        let cov = m.adjoint() * &self.sigma * &m;
        let disp = m.adjoint() * &self.abar;
        GaussianState::new_unchecked(cov.map(|z| z.re), disp.map(|z| z.re))
    }

    /// `Σ_Q = Σ + ½ I`, the Husimi covariance.
    pub fn sigma_q(&self) -> DMatrix<Complex<T>> {
        let n = self.sigma.nrows();
        &self.sigma + DMatrix::identity(n, n) * Complex::new(lit::<T>(0.5), T::zero())
    }

    /// Single-mode fluctuation moments `(N, M) = (<δa†δa>, <δa δa>)` and `<a>`.
    pub(crate) fn single_mode_parts(&self) -> Result<(T, Complex<T>, Complex<T>)> {
        if self.num_modes() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.sigma.nrows(),
            });
        }
        let n = self.excess.unwrap_or_else(|| self.sigma[(0, 0)].re - lit(0.5));
        Ok((n, self.sigma[(0, 1)], self.abar[0]))
    }
}

/// Real `2N×2N` symplectic matrix with an optional displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap<T: Real> {
    matrix: DMatrix<T>,
    displacement: DVector<T>,
}

impl<T: Real> SymplecticMap<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        Self::with_displacement(matrix, DVector::zeros(n))
    }

    pub fn with_displacement(matrix: DMatrix<T>, displacement: DVector<T>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || matrix.ncols() != dim {
            return Err(Error::param("matrix", "must be 2N x 2N"));
        }
        if displacement.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: displacement.len(),
            });
        }
        let res = symplectic_residual(&matrix);
        if res >= T::tol(1e-11) * (T::one() + max_abs(&matrix).powi(2)) {
            return Err(Error::NotSymplectic(to_f64(res)));
        }
        Ok(Self { matrix, displacement })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: DVector::zeros(2 * n_modes),
        }
    }

    /// Single-mode rotation `[[cos φ, −sin φ], [sin φ, cos φ]]`.
    pub fn rotation(phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        Self {
            matrix: DMatrix::from_row_slice(2, 2, &[c, -s, s, c]),
            displacement: DVector::zeros(2),
        }
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.matrix.nrows(), other.matrix.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.matrix);
        m.view_mut((a, a), (b, b)).copy_from(&other.matrix);
        let mut d = DVector::zeros(a + b);
        d.rows_mut(0, a).copy_from(&self.displacement);
        d.rows_mut(a, b).copy_from(&other.displacement);
        Self {
            matrix: m,
            displacement: d,
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<T> {
        &self.displacement
    }

    pub fn residual(&self) -> T {
        symplectic_residual(&self.matrix)
    }
}

/// `‖S Ω Sᵀ − Ω‖_∞` (max-abs entry).
pub fn symplectic_residual<T: Real>(s: &DMatrix<T>) -> T {
    let omega = symplectic_form::<T>(s.nrows() / 2);
    max_abs(&(s * &omega * s.transpose() - omega))
}

pub(crate) fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
}
