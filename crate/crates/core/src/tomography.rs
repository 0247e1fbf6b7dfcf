//! Homodyne intensity-correlation tomography with a coherent detector reference.
//!
//! The detector starts in `|β⟩`; the GW quadrature `h_φ = (e^{−iφ}a + e^{iφ}a†)/√2`
//! enters the zero-delay intensity correlation at orders `|β|⁰…|β|⁴`.
//! Signals are taken stationary, so the third-order term vanishes.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::gaussian::GwSignalParams;
use crate::real::{lit, to_f64};
use crate::{Complex, Error, Real, Result};

/// Relative LO amplitude-noise variance above which the small-noise
/// expansion is no longer trusted.
pub const EPSILON_WARN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOscillator<T: Real> {
    pub beta_mag: T,
    pub phi: T,
    /// `(δβ)²/|β|²`.
    pub epsilon: T,
    /// Decay rate of the amplitude fluctuations (1/s).
    pub kappa_fluct: T,
}

impl<T: Real> LocalOscillator<T> {
    pub fn new(beta_mag: T, phi: T, epsilon: T, kappa_fluct: T) -> Result<Self> {
        if !(beta_mag >= T::zero()) || !beta_mag.is_finite() {
            return Err(Error::param("beta_mag", "must be finite and non-negative"));
        }
        if !(epsilon >= T::zero()) || !epsilon.is_finite() {
            return Err(Error::param("epsilon", "must be finite and non-negative"));
        }
        if !(kappa_fluct >= T::zero()) || !phi.is_finite() {
            return Err(Error::param("kappa_fluct", "must be non-negative"));
        }
        Ok(Self {
            beta_mag,
            phi,
            epsilon,
            kappa_fluct,
        })
    }

    pub fn noiseless(beta_mag: T, phi: T) -> Result<Self> {
        Self::new(beta_mag, phi, T::zero(), T::zero())
    }

    /// True when `ε` is outside the small-noise regime.
    pub fn epsilon_warning(&self) -> bool {
        self.epsilon >= lit(EPSILON_WARN)
    }
}

/// Per-order contributions to `ΔG²` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyTerms<T: Real> {
    pub dg0: T,
    pub dg1: T,
    pub dg2: T,
    pub dg3: T,
    pub dg4_noise: T,
    pub total: T,
}

/// `<:(Δh_φ)²:> = N + Re(e^{−2iφ} M) = (n̄+½)[cosh 2r − sinh 2r cos(θ − 2φ)] − ½`.
pub fn quadrature_variance_normal<T: Real>(p: &GwSignalParams<T>, phi: T) -> T {
    let two = lit::<T>(2.0);
    let k = p.thermal_scale();
    let sh = (two * p.r).sinh();
    p.n_q() - k * sh * (p.theta - two * phi).cos()
}

/// `<:Δh_φ Δn:> = √2 Re[e^{−iφ}(α N + α* M)]`.
pub fn quadrature_number_correlation<T: Real>(p: &GwSignalParams<T>, phi: T) -> T {
    let (n, m) = p.fluctuation_moments();
    let x = p.alpha * n + p.alpha.conjugate() * m;
    lit::<T>(2.0).sqrt() * (Complex::new(phi.cos(), -phi.sin()) * x).re
}

/// `<:(Δn)²:> = 2|α|²N + 2Re(α*² M) + N² + |M|²`.
pub fn number_fluctuation_normal<T: Real>(p: &GwSignalParams<T>) -> T {
    let (n, m) = p.fluctuation_moments();
    let a = p.alpha;
    lit::<T>(2.0) * (a.norm_sqr() * n + (a.conjugate() * a.conjugate() * m).re) + n * n + m.norm_sqr()
}

/// `4 cos⁴γt |β|² (δβ)²` with `(δβ)² = ε|β|²`.
pub fn classical_lo_noise<T: Real>(lo: &LocalOscillator<T>, gamma_t: T) -> T {
    let c2 = gamma_t.cos().powi(2);
    let b2 = lo.beta_mag * lo.beta_mag;
    lit::<T>(4.0) * c2 * c2 * b2 * (lo.epsilon * b2)
}

pub fn delta_g2_terms<T: Real>(p: &GwSignalParams<T>, lo: &LocalOscillator<T>, gamma_t: T) -> TomographyTerms<T> {
    let (s, c) = gamma_t.sin_cos();
    let b = lo.beta_mag;
    let s2 = s * s;
    let dg0 = s2 * s2 * number_fluctuation_normal(p);
    let dg1 = s2 * s * c * b * quadrature_number_correlation(p, lo.phi);
    let dg2 = s2 * c * c * b * b * quadrature_variance_normal(p, lo.phi);
    let dg3 = T::zero();
    let dg4_noise = classical_lo_noise(lo, gamma_t);
    TomographyTerms {
        dg0,
        dg1,
        dg2,
        dg3,
        dg4_noise,
        total: dg0 + dg1 + dg2 + dg3 + dg4_noise,
    }
}

/// Zeroth-order term without stationarity: `sin⁴γt [<:n²:> − <n(t)><n(∞)>]`.
pub fn delta_g0_non_stationary<T: Real>(p: &GwSignalParams<T>, gamma_t: T, n_late: T) -> T {
    let s2 = gamma_t.sin().powi(2);
    let n = p.n_grav();
    s2 * s2 * (number_fluctuation_normal(p) + n * n - n * n_late)
}

/// `sin²γt <:(Δh_φ)²:> / (4ε|β|²)`; `None` when `ε = 0` leaves it unbounded.
pub fn snr_quadrature<T: Real>(p: &GwSignalParams<T>, lo: &LocalOscillator<T>, gamma_t: T) -> Result<Option<T>> {
    if !(lo.beta_mag > T::zero()) {
        return Err(Error::param("beta_mag", "SNR needs a non-zero reference"));
    }
    if lo.epsilon == T::zero() {
        return Ok(None);
    }
    let signal = gamma_t.sin().powi(2) * quadrature_variance_normal(p, lo.phi);
    Ok(Some(signal / (lit::<T>(4.0) * lo.epsilon * lo.beta_mag * lo.beta_mag)))
}

/// Ordinary least squares through a thin QR factorization; errors if the
/// design has numerically dependent columns.
fn least_squares<T: Real>(design: DMatrix<T>, rhs: &DVector<T>, what: &str) -> Result<(DVector<T>, T)> {
    let cols = design.ncols();
    if design.nrows() < cols {
        return Err(Error::DegenerateFit(format!(
            "{what}: {} rows for {cols} unknowns",
            design.nrows()
        )));
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = (0..cols).fold(T::zero(), |acc, i| acc.max(r[(i, i)].abs()));
    let diag_min = (0..cols).fold(diag_max, |acc, i| acc.min(r[(i, i)].abs()));
    if !(diag_min > T::tol(1e-10) * diag_max) {
        return Err(Error::DegenerateFit(format!("{what}: design matrix is rank deficient")));
    }
    let qtb = qr.q().transpose() * rhs;
    let x = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::DegenerateFit(format!("{what}: triangular solve failed")))?;
    let resid = (design * &x - rhs).norm();
    Ok((x, resid))
}

/// Fits `ΔG²(|β|) = Σₖ cₖ|β|ᵏ`, `k = 0..4`.
pub fn separate_terms_by_beta<T: Real>(sweep: &[(T, T)]) -> Result<[T; 5]> {
    let mut betas: Vec<T> = sweep.iter().map(|&(b, _)| b).collect();
    betas.sort_by(|a, b| a.partial_cmp(b).expect("finite beta"));
    betas.dedup();
    if betas.len() < 5 {
        return Err(Error::DegenerateFit(format!(
            "{} distinct |beta| values, need 5",
            betas.len()
        )));
    }
    let scale = betas.iter().fold(T::zero(), |acc, &b| acc.max(b.abs()));
    // fit in β/β_max for conditioning
    let design = DMatrix::from_fn(sweep.len(), 5, |i, k| (sweep[i].0 / scale).powi(k as i32));
    let rhs = DVector::from_fn(sweep.len(), |i, _| sweep[i].1);
    let (x, _) = least_squares(design, &rhs, "beta polynomial")?;
    let mut out = [T::zero(); 5];
    for (k, c) in out.iter_mut().enumerate() {
        *c = x[k] / scale.powi(k as i32);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult<T: Real> {
    /// `None` when `N² = |M|²` (e.g. a coherent state) hides the displacement.
    pub alpha: Option<Complex<T>>,
    pub alpha_mag: Option<T>,
    pub r: T,
    /// `None` when `r ≈ 0` leaves the squeezing angle unidentifiable.
    pub theta: Option<T>,
    pub nbar: T,
    /// Fitted `(N, M)`.
    pub n_fluct: T,
    pub m_fluct: Complex<T>,
    /// Root sum of squared residuals of the `dG1` and `dG2` fits and the `dG0` check.
    pub residual: T,
    pub phase_grid_size: usize,
}

/// Recovers `(α, r, θ, n̄)` from a phase sweep of `(φ, dG1, dG2)` taken at
/// one `|β|`, with `dG0` as a consistency check.
pub fn reconstruct_gaussian<T: Real>(
    sweep: &[(T, T, T)],
    gamma_t: T,
    beta_mag: T,
    dg0: T,
) -> Result<ReconstructionResult<T>> {
    if sweep.len() < 8 {
        return Err(Error::DegenerateFit(format!("{} phases, need at least 8", sweep.len())));
    }
    let (s, c) = gamma_t.sin_cos();
    let scale2 = s * s * c * c * beta_mag * beta_mag;
    let scale1 = s * s * s * c * beta_mag;
    if !(scale2 > T::zero()) {
        return Err(Error::DegenerateFit("sin γt cos γt |β| vanishes".into()));
    }
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let len = sweep.len();

    let d2 = DMatrix::from_fn(len, 3, |i, k| match k {
        0 => T::one(),
        1 => (two * sweep[i].0).cos(),
        _ => (two * sweep[i].0).sin(),
    });
    let y2 = DVector::from_fn(len, |i, _| sweep[i].2 / scale2);
    let (x2, res2) = least_squares(d2, &y2, "dG2 phase fit")?;
    let n = x2[0];
    let m = Complex::new(x2[1], x2[2]);

    let d1 = DMatrix::from_fn(len, 2, |i, k| if k == 0 { sweep[i].0.cos() } else { sweep[i].0.sin() });
    let y1 = DVector::from_fn(len, |i, _| sweep[i].1 / (scale1 * two.sqrt()));
    let (x1, res1) = least_squares(d1, &y1, "dG1 phase fit")?;

    let tol = T::tol(1e-9);
    let d = n + half;
    let m_abs = m.modulus();
    let k2 = (d - m_abs) * (d + m_abs);
    if !(k2 > T::zero()) {
        return Err(Error::DegenerateFit(format!(
            "fitted moments violate (N+1/2)^2 > |M|^2 by {}",
            to_f64(k2)
        )));
    }
    let k = k2.sqrt();
    let nbar = (k - half).max(T::zero());
    let r = half * (m_abs / d).atanh();
    let theta = (m_abs > tol * (T::one() + d)).then(|| {
        let t = (-m).argument();
        if t < T::zero() {
            t + T::two_pi()
        } else {
            t
        }
    });

    // X = αN + α*M, linear in (Re α, Im α)
    let det = n * n - m_abs * m_abs;
    let alpha = (det.abs() > tol * (T::one() + n * n)).then(|| {
        let (xr, xi) = (x1[0], x1[1]);
        let u = (xr * (n - m.re) - xi * m.im) / det;
        let v = (xi * (n + m.re) - xr * m.im) / det;
        Complex::new(u, v)
    });

    let mut residual2 = (res2 * scale2).powi(2) + (res1 * scale1 * two.sqrt()).powi(2);
    if let Some(a) = alpha {
        let pred =
            s.powi(4) * (two * (a.norm_sqr() * n + (a.conjugate() * a.conjugate() * m).re) + n * n + m.norm_sqr());
        residual2 += (pred - dg0).powi(2);
    }
    Ok(ReconstructionResult {
        alpha,
        alpha_mag: alpha.map(|a| a.modulus()),
        r,
        theta,
        nbar,
        n_fluct: n,
        m_fluct: m,
        residual: residual2.sqrt(),
        phase_grid_size: len,
    })
}

/// Noiseless `(φ, dG1, dG2)` sweep on `n_phases` equally spaced phases.
pub fn synthetic_phase_sweep<T: Real>(
    p: &GwSignalParams<T>,
    gamma_t: T,
    beta_mag: T,
    n_phases: usize,
) -> Vec<(T, T, T)> {
    (0..n_phases)
        .map(|i| {
            let phi = T::two_pi() * T::from_usize(i).expect("index") / T::from_usize(n_phases).expect("count");
            let lo = LocalOscillator::noiseless(beta_mag, phi).expect("valid oscillator");
            let t = delta_g2_terms(p, &lo, gamma_t);
            (phi, t.dg1, t.dg2)
        })
        .collect()
}
