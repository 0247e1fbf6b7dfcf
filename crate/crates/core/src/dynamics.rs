//! Evolution of the GW mode (index 0) and the detector mode (index 1).

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::gaussian::{symplectic_form, GaussianState, SymplecticMap};
use crate::real::{lit, to_f64};
use crate::{Complex, Error, Real, Result};

/// Coupling `γ_g`, detector frequency `ω_ℓ`, GW frequency `ν` (rad/s) and time `t` (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingContext<T: Real> {
    pub gamma_g: T,
    pub omega_ell: T,
    pub nu: T,
    pub t: T,
}

impl<T: Real> CouplingContext<T> {
    pub fn new(gamma_g: T, omega_ell: T, nu: T, t: T) -> Result<Self> {
        if !(gamma_g >= T::zero()) || !gamma_g.is_finite() {
            return Err(Error::param("gamma_g", "coupling must be finite and non-negative"));
        }
        if !omega_ell.is_finite() || !nu.is_finite() || !t.is_finite() {
            return Err(Error::param("t", "frequencies and time must be finite"));
        }
        Ok(Self {
            gamma_g,
            omega_ell,
            nu,
            t,
        })
    }

    pub fn resonant(gamma_g: T, omega: T, t: T) -> Result<Self> {
        Self::new(gamma_g, omega, omega, t)
    }

    /// `Δ = ω_ℓ − ν`.
    pub fn detuning(&self) -> T {
        self.omega_ell - self.nu
    }

    pub fn gamma_t(&self) -> T {
        self.gamma_g * self.t
    }
}

/// Markovian damping rate `κ` and bath occupation `N̄`, shared by both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenChannelParams<T: Real> {
    pub kappa: T,
    pub nbar_env: T,
}

impl<T: Real> OpenChannelParams<T> {
    pub fn new(kappa: T, nbar_env: T) -> Result<Self> {
        if !(kappa >= T::zero()) || !kappa.is_finite() {
            return Err(Error::param("kappa", "must be finite and non-negative"));
        }
        if !(nbar_env >= T::zero()) || !nbar_env.is_finite() {
            return Err(Error::param("nbar_env", "must be finite and non-negative"));
        }
        Ok(Self { kappa, nbar_env })
    }
}

/// Resonant RWA beamsplitter on `(x_gw, p_gw, x_bar, p_bar)`.
pub fn beamsplitter_map<T: Real>(gamma_t: T) -> SymplecticMap<T> {
    let (s, c) = gamma_t.sin_cos();
    let z = T::zero();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        c, z, z, s,
        z, c, -s, z,
        z, s, c, z,
        -s, z, z, c,
    ]);
    SymplecticMap::new(m).expect("beamsplitter is symplectic")
}

/// Local rotation of the GW quadratures that makes the detector marginal read
/// `cos²γt σ_bar + sin²γt σ_gw` and `cos γt r_bar + sin γt r_gw`.
fn gw_phase_convention<T: Real>() -> SymplecticMap<T> {
    SymplecticMap::rotation(T::frac_pi_2()).direct_sum(&SymplecticMap::identity(1))
}

fn check_single(s: &GaussianState<impl Real>) -> Result<()> {
    if s.num_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: s.cov().nrows(),
        });
    }
    Ok(())
}

/// Joint state after the resonant beamsplitter, with the GW mode expressed in
/// the rotated frame described at [`bar_marginal`].
pub fn evolve_closed<T: Real>(gw: &GaussianState<T>, bar: &GaussianState<T>, gamma_t: T) -> Result<GaussianState<T>> {
    check_single(gw)?;
    check_single(bar)?;
    gw.tensor(bar)
        .apply_symplectic(&gw_phase_convention())?
        .apply_symplectic(&beamsplitter_map(gamma_t))
}

/// Detector marginal `cos²γt σ_bar + sin²γt σ_gw`. The raw beamsplitter gives
/// this up to a π/2 rotation of the GW quadratures, which is applied to the
/// GW input so any detector state keeps its own frame.
pub fn bar_marginal<T: Real>(gw: &GaussianState<T>, bar: &GaussianState<T>, gamma_t: T) -> Result<GaussianState<T>> {
    evolve_closed(gw, bar, gamma_t)?.reduce(&[1])
}

/// Detuned RWA mode map `a(t) = g₊ a + f b`, `b(t) = f a + g₋ b`, up to the
/// common phase `e^{−i(ω_ℓ+ν)t/2}` returned as the fourth element.
pub fn detuned_coefficients<T: Real>(ctx: &CouplingContext<T>) -> (Complex<T>, Complex<T>, Complex<T>, Complex<T>) {
    let two = lit::<T>(2.0);
    let half_t = ctx.t / two;
    let delta = ctx.detuning();
    let lambda = (two * ctx.gamma_g).hypot(delta);
    let half_arg = lambda * half_t;
    let cos = half_arg.cos();
    // sin(λt/2)/λ, continued to t/2 at λ = 0
    let sinc = if lambda == T::zero() || half_arg.abs() < lit(1e-8) {
        half_t * (T::one() - half_arg * half_arg / lit(6.0))
    } else {
        half_arg.sin() / lambda
    };
    let f = Complex::new(T::zero(), -two * ctx.gamma_g * sinc);
    let g_plus = Complex::new(cos, delta * sinc);
    let g_minus = Complex::new(cos, -delta * sinc);
    let ph = -(ctx.omega_ell + ctx.nu) * half_t;
    (f, g_plus, g_minus, Complex::new(ph.cos(), ph.sin()))
}

/// Exact resonant solution without the rotating-wave approximation, in the
/// lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeyondRwa<T: Real> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub d: Complex<T>,
    pub e: Complex<T>,
    pub omega_plus: T,
    pub omega_minus: T,
    pub omega_g: T,
    pub t: T,
}

pub fn beyond_rwa_coefficients<T: Real>(ctx: &CouplingContext<T>) -> Result<BeyondRwa<T>> {
    let omega = ctx.omega_ell;
    if !(omega > T::zero()) {
        return Err(Error::param("omega_ell", "must be positive"));
    }
    if ctx.detuning().abs() > T::tol(1e-12) * omega {
        return Err(Error::Regime("beyond-RWA solution requires zero detuning".into()));
    }
    let delta = lit::<T>(2.0) * ctx.gamma_g / omega;
    if delta >= T::one() {
        return Err(Error::Regime(format!(
            "2 gamma_g / omega = {} >= 1 lies in the ultrastrong regime",
            to_f64(delta)
        )));
    }
    let op = omega * (T::one() + delta).sqrt();
    let om = omega * (T::one() - delta).sqrt();
    let wg = omega * (T::one() - delta * delta).sqrt();
    let (sp, sm) = ((op * ctx.t).sin(), (om * ctx.t).sin());
    let g = ctx.gamma_g;
    let i = |v: T| Complex::new(T::zero(), v);
    Ok(BeyondRwa {
        a: i(g / wg * (op / omega * sm - om / omega * sp)),
        b: i(-(op * sm + om * sp) / wg),
        d: i(-g / wg * (op / omega * sm + om / omega * sp)),
        e: i((op * sm - om * sp) / wg),
        omega_plus: op,
        omega_minus: om,
        omega_g: wg,
        t: ctx.t,
    })
}

impl<T: Real> BeyondRwa<T> {
    /// Heisenberg map on `(a, a†, b, b†)`; row `i` expresses operator `i` at `t`
    /// in terms of the operators at zero.
    pub fn ladder_map(&self) -> DMatrix<Complex<T>> {
        let half = lit::<T>(0.5);
        let cp = Complex::new((self.omega_plus * self.t).cos(), T::zero());
        let cm = Complex::new((self.omega_minus * self.t).cos(), T::zero());
        let same = (cp + cm + self.a + self.b) * half;
        let cross = (cp - cm + self.d + self.e) * half;
        let (sa, sd) = (self.a * half, self.d * half);
        let row_a = [same, sa, cross, sd];
        let row_b = [cross, sd, same, sa];
        let mut m = DMatrix::zeros(4, 4);
        for j in 0..4 {
            m[(0, j)] = row_a[j];
            m[(2, j)] = row_b[j];
        }
        // a†, b† rows are conjugates with a ↔ a† swapped
        for (dst, src) in [(1, 0), (3, 2)] {
            for j in 0..4 {
                m[(dst, j ^ 1)] = m[(src, j)].conjugate();
            }
        }
        m
    }

    /// The same map on quadratures.
    pub fn symplectic(&self) -> Result<SymplecticMap<T>> {
        let l = self.ladder_map();
        let h = lit::<T>(0.5).sqrt();
        let zero = T::zero();
        let mut u = DMatrix::zeros(4, 4);
        for k in 0..2 {
            let (i, j) = (2 * k, 2 * k + 1);
            u[(i, i)] = Complex::new(h, zero);
            u[(i, j)] = Complex::new(zero, h);
            u[(j, i)] = Complex::new(h, zero);
            u[(j, j)] = Complex::new(zero, -h);
        }
        let s = u.adjoint() * l * u;
        SymplecticMap::new(s.map(|z| z.re))
    }
}

/// Detector marginal under uniform damping of both modes into a bath with
/// occupation `N̄`, for a detector starting in vacuum.
pub fn evolve_open<T: Real>(
    gw: &GaussianState<T>,
    bar: &GaussianState<T>,
    gamma_t: T,
    ch: &OpenChannelParams<T>,
    t: T,
) -> Result<GaussianState<T>> {
    check_single(gw)?;
    check_single(bar)?;
    let vac = GaussianState::vacuum(1);
    let off = (bar.cov() - vac.cov()).abs().max().max(bar.disp().abs().max());
    if off > T::tol(1e-12) {
        return Err(Error::param("bar", "open evolution is defined for a vacuum detector"));
    }
    if !(t >= T::zero()) {
        return Err(Error::param("t", "must be non-negative"));
    }
    let closed = bar_marginal(gw, bar, gamma_t)?;
    let decay = (-ch.kappa * t).exp();
    let bath = (T::one() - decay) * (ch.nbar_env + lit(0.5));
    let cov = closed.cov() * decay + DMatrix::identity(2, 2) * bath;
    let disp = closed.disp() * (decay.sqrt());
    GaussianState::new(cov, disp)
}

/// RK4 integration of `dσ/dt = Aσ + σAᵀ + D`, `dr/dt = A r` for the joint
/// state, `A = Ω H − κ/2`, `H = γ [[0, I], [I, 0]]`, `D = κ(N̄+½) I`.
pub fn integrate_lyapunov<T: Real>(
    joint: &GaussianState<T>,
    gamma_g: T,
    ch: &OpenChannelParams<T>,
    t: T,
    steps: usize,
) -> Result<GaussianState<T>> {
    if joint.num_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: joint.cov().nrows(),
        });
    }
    if steps == 0 {
        return Err(Error::param("steps", "must be positive"));
    }
    let mut h = DMatrix::zeros(4, 4);
    for k in 0..2 {
        h[(k, k + 2)] = gamma_g;
        h[(k + 2, k)] = gamma_g;
    }
    let half_kappa = ch.kappa * lit(0.5);
    let a = symplectic_form::<T>(2) * h - DMatrix::identity(4, 4) * half_kappa;
    let d = DMatrix::identity(4, 4) * (ch.kappa * (ch.nbar_env + lit(0.5)));
    let at = a.transpose();
    let f_cov = |s: &DMatrix<T>| &a * s + s * &at + &d;
    let f_disp = |r: &DVector<T>| &a * r;

    let dt = t / T::from_usize(steps).expect("step count representable");
    let (two, six) = (lit::<T>(2.0), lit::<T>(6.0));
    let mut cov = joint.cov().clone();
    let mut disp = joint.disp().clone();
    for _ in 0..steps {
        let k1 = f_cov(&cov);
        let k2 = f_cov(&(&cov + &k1 * (dt / two)));
        let k3 = f_cov(&(&cov + &k2 * (dt / two)));
        let k4 = f_cov(&(&cov + &k3 * dt));
        cov += (k1 + k2 * two + k3 * two + k4) * (dt / six);
        let j1 = f_disp(&disp);
        let j2 = f_disp(&(&disp + &j1 * (dt / two)));
        let j3 = f_disp(&(&disp + &j2 * (dt / two)));
        let j4 = f_disp(&(&disp + &j3 * dt));
        disp += (j1 + j2 * two + j3 * two + j4) * (dt / six);
    }
    let cov = (&cov + cov.transpose()) * lit::<T>(0.5);
    GaussianState::new_unchecked(cov, disp)
}

/// Extremal variances of `x cos ϑ + p sin ϑ` for a single-mode covariance,
/// returned as `(min, max, ϑ_min)` with `ϑ_min ∈ [0, π)`.
pub fn quadrature_extremes<T: Real>(cov: &DMatrix<T>) -> (T, T, T) {
    let half = lit::<T>(0.5);
    let (xx, pp, xp) = (cov[(0, 0)], cov[(1, 1)], cov[(0, 1)]);
    let mean = (xx + pp) * half;
    let radius = ((xx - pp) * half).hypot(xp);
    let mut theta = (lit::<T>(2.0) * xp).atan2(xx - pp) * half + T::frac_pi_2();
    if theta >= T::pi() {
        theta -= T::pi();
    }
    (mean - radius, mean + radius, theta)
}

/// Detector quadrature extremes after a squeezed-vacuum GW (angle 0) acts on
/// a vacuum detector.
pub fn squeezing_transfer_variance<T: Real>(r: T, gamma_t: T) -> (T, T, T) {
    let half = lit::<T>(0.5);
    let s2 = gamma_t.sin().powi(2);
    let two_r = lit::<T>(2.0) * r;
    let min = half * (T::one() + s2 * ((-two_r).exp() - T::one()));
    let max = half * (T::one() + s2 * (two_r.exp() - T::one()));
    let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![min, max]));
    let (_, _, theta) = quadrature_extremes(&cov);
    (min, max, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_residual, GwSignalParams};
    use approx::assert_abs_diff_eq;

    fn gw(alpha: (f64, f64), r: f64, theta: f64, nbar: f64) -> GaussianState<f64> {
        GaussianState::from_gw(&GwSignalParams::new(Complex::new(alpha.0, alpha.1), r, theta, nbar).unwrap()).unwrap()
    }

    #[test]
    fn beamsplitter_examples() {
        assert_eq!(beamsplitter_map(0.0_f64).matrix(), &DMatrix::identity(4, 4));
        let m = beamsplitter_map(std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(m.matrix()[(0, 3)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.matrix()[(2, 1)], 1.0, epsilon = 1e-15);
        assert!(beamsplitter_map(0.3_f64).residual() < 1e-15);
    }

    #[test]
    fn swap_moves_gw_to_bar() {
        let g = gw((0.4, -0.2), 0.3, 0.5, 0.7);
        let v = GaussianState::vacuum(1);
        let joint = evolve_closed(&g, &v, std::f64::consts::FRAC_PI_2).unwrap();
        let bar = joint.reduce(&[1]).unwrap();
        assert!((bar.cov() - g.cov()).abs().max() < 1e-14);
        assert!((bar.disp() - g.disp()).abs().max() < 1e-14);
        let gw_after = joint.reduce(&[0]).unwrap();
        assert!((gw_after.cov() - v.cov()).abs().max() < 1e-14);
    }

    #[test]
    fn thermal_marginal_and_mean_number() {
        let nbar = 1.3;
        let gt = 0.8_f64;
        let g = gw((0.0, 0.0), 0.0, 0.0, nbar);
        let bar = bar_marginal(&g, &GaussianState::vacuum(1), gt).unwrap();
        let (s, c) = gt.sin_cos();
        let expect = c * c * 0.5 + s * s * (0.5 + nbar);
        assert_abs_diff_eq!(bar.cov()[(0, 0)], expect, epsilon = 1e-14);
        assert_abs_diff_eq!(bar.cov()[(1, 1)], expect, epsilon = 1e-14);
        assert_abs_diff_eq!(bar.cov()[(0, 1)], 0.0, epsilon = 1e-14);

        let g = gw((1.1, 0.3), 0.4, 1.0, 0.2);
        let bar = bar_marginal(&g, &GaussianState::vacuum(1), gt).unwrap();
        assert_abs_diff_eq!(bar.mean_number(0), s * s * g.mean_number(0), epsilon = 1e-13);
    }

    #[test]
    fn marginal_holds_for_non_vacuum_detector() {
        let g = gw((0.3, 0.9), 0.6, 2.1, 0.4);
        let b = gw((-0.5, 0.2), 0.2, -0.7, 0.1);
        let gt = 1.234_f64;
        let (s, c) = gt.sin_cos();
        let bar = bar_marginal(&g, &b, gt).unwrap();
        let cov = b.cov() * (c * c) + g.cov() * (s * s);
        let disp = b.disp() * c + g.disp() * s;
        assert!((bar.cov() - cov).abs().max() < 1e-13);
        assert!((bar.disp() - disp).abs().max() < 1e-13);
    }

    #[test]
    fn detuned_resonant_limit() {
        let ctx = CouplingContext::resonant(0.5, 10.0, 0.8).unwrap();
        let (f, gp, gm, _) = detuned_coefficients(&ctx);
        let gt = 0.4_f64;
        assert_abs_diff_eq!(f.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.im, -gt.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(gp.re, gt.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(gm.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn detuned_unitarity_grid() {
        let gamma = 0.7_f64;
        for ratio in [0.0, 0.5, 2.0, 10.0] {
            for k in 1..=20 {
                let gt = std::f64::consts::PI * f64::from(k) / 20.0;
                let ctx = CouplingContext::new(gamma, 5.0 + ratio * gamma, 5.0, gt / gamma).unwrap();
                let (f, gp, gm, ph) = detuned_coefficients(&ctx);
                assert_abs_diff_eq!(f.norm_sqr() + gm.norm_sqr(), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(f.norm_sqr() + gp.norm_sqr(), 1.0, epsilon = 1e-12);
                assert!((gp * f.conj() + f * gm.conj()).norm() < 1e-12);
                assert_abs_diff_eq!(ph.norm(), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn detuned_weak_coupling_limit() {
        let ctx = CouplingContext::new(1e-12, 3.0, 1.0, 0.9).unwrap();
        let (f, gp, gm, _) = detuned_coefficients(&ctx);
        assert!(f.norm() < 1e-11);
        let phase = 2.0 * 0.9 / 2.0;
        assert!((gp - Complex::new(phase.cos(), phase.sin())).norm() < 1e-11);
        assert!((gm - Complex::new(phase.cos(), -phase.sin())).norm() < 1e-11);
        // λ = 0 exactly
        let ctx = CouplingContext::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let (f, gp, _, _) = detuned_coefficients(&ctx);
        assert_eq!(f.norm(), 0.0);
        assert_abs_diff_eq!(gp.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn beyond_rwa_regimes() {
        assert!(matches!(
            beyond_rwa_coefficients(&CouplingContext::resonant(0.6, 1.0, 1.0).unwrap()),
            Err(Error::Regime(_))
        ));
        assert!(beyond_rwa_coefficients(&CouplingContext::new(0.01, 1.0, 1.1, 1.0).unwrap()).is_err());
        let free = beyond_rwa_coefficients(&CouplingContext::resonant(0.0, 2.0, 1.3).unwrap()).unwrap();
        assert_eq!(free.a.norm(), 0.0);
        assert_eq!(free.d.norm(), 0.0);
        let l = free.ladder_map();
        let ph = Complex::new((2.6_f64).cos(), -(2.6_f64).sin());
        assert!((l[(0, 0)] - ph).norm() < 1e-14);
        assert!(l[(0, 2)].norm() < 1e-14);
    }

    #[test]
    fn beyond_rwa_is_symplectic() {
        let ctx = CouplingContext::resonant(0.05, 1.0, 5.0).unwrap();
        let map = beyond_rwa_coefficients(&ctx).unwrap().symplectic().unwrap();
        assert!(symplectic_residual(map.matrix()) < 1e-9);
    }

    #[test]
    fn open_reduces_to_closed_and_thermalizes() {
        let g = gw((0.5, 0.1), 0.3, 0.2, 0.6);
        let v = GaussianState::vacuum(1);
        let ch = OpenChannelParams::new(0.0, 0.4).unwrap();
        let open = evolve_open(&g, &v, 0.7, &ch, 3.0).unwrap();
        let closed = bar_marginal(&g, &v, 0.7).unwrap();
        assert!((open.cov() - closed.cov()).abs().max() < 1e-12);

        let ch = OpenChannelParams::new(1.0, 0.25).unwrap();
        let late = evolve_open(&g, &v, 0.7, &ch, 50.0).unwrap();
        assert_abs_diff_eq!(late.mean_number(0), 0.25, epsilon = 1e-12);
        assert!(evolve_open(&g, &g, 0.7, &ch, 1.0).is_err());
    }

    #[test]
    fn open_matches_lyapunov_integration() {
        let g = gw((0.0, 0.0), 0.0, 0.0, 3.0);
        let v = GaussianState::vacuum(1);
        let gt = 0.1_f64.sqrt().asin();
        let ch = OpenChannelParams::new(1.0, 0.2).unwrap();
        let (t, gamma) = (1.0, gt);
        let closed = evolve_open(&g, &v, gt, &ch, t).unwrap();
        let joint = g.tensor(&v).apply_symplectic(&gw_phase_convention()).unwrap();
        let ode = integrate_lyapunov(&joint, gamma, &ch, t, 2000)
            .unwrap()
            .reduce(&[1])
            .unwrap();
        assert!((closed.cov() - ode.cov()).abs().max() < 1e-10);
        let expect = (-1.0_f64).exp() * (0.9 * 0.5 + 0.1 * 3.5) + (1.0 - (-1.0_f64).exp()) * 0.7;
        assert_abs_diff_eq!(closed.cov()[(0, 0)], expect, epsilon = 1e-13);

        let g = gw((0.8, -0.3), 0.5, 0.9, 0.1);
        let joint = g.tensor(&v).apply_symplectic(&gw_phase_convention()).unwrap();
        let ode = integrate_lyapunov(&joint, 0.6, &ch, 1.5, 3000)
            .unwrap()
            .reduce(&[1])
            .unwrap();
        let closed = evolve_open(&g, &v, 0.9, &ch, 1.5).unwrap();
        assert!((closed.cov() - ode.cov()).abs().max() < 1e-10);
        assert!((closed.disp() - ode.disp()).abs().max() < 1e-10);
    }

    #[test]
    fn squeezing_transfer_examples() {
        let (min, max, th) = squeezing_transfer_variance(0.7_f64, std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(min, (-1.4_f64).exp() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(max, (1.4_f64).exp() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(th, 0.0, epsilon = 1e-15);
        let (min, max, _) = squeezing_transfer_variance(0.0_f64, 0.4);
        assert_abs_diff_eq!(min, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(max, 0.5, epsilon = 1e-15);

        let (min, max, _) = squeezing_transfer_variance(1.0_f64, 0.3);
        let g = gw((0.0, 0.0), 1.0, 0.0, 0.0);
        let bar = bar_marginal(&g, &GaussianState::vacuum(1), 0.3).unwrap();
        let (emin, emax, _) = quadrature_extremes(bar.cov());
        assert_abs_diff_eq!(min, emin, epsilon = 1e-14);
        assert_abs_diff_eq!(max, emax, epsilon = 1e-14);
        assert!(min * max >= 0.25 - 1e-15);
    }
}
