//! s-ordered moments, zero-delay second-order coherence and Mandel Q.

use nalgebra::ComplexField;

use crate::dynamics::OpenChannelParams;
use crate::gaussian::{GwSignalParams, LadderMoments};
use crate::real::lit;
use crate::{Complex, Error, Real, Result};

/// Highest total order `n_dagger + n_plain` served by [`s_ordered_moment`].
pub const MAX_MOMENT_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `s = +1`
    Normal,
    /// `s = 0`
    Symmetric,
    /// `s = −1`
    Antinormal,
}

impl Ordering {
    pub fn s<T: Real>(self) -> T {
        match self {
            Ordering::Normal => T::one(),
            Ordering::Symmetric => T::zero(),
            Ordering::Antinormal => -T::one(),
        }
    }
}

/// `<a†ⁿ aᵐ>_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentRequest {
    pub n_dagger: usize,
    pub n_plain: usize,
    pub ordering: Ordering,
}

impl MomentRequest {
    pub fn new(n_dagger: usize, n_plain: usize, ordering: Ordering) -> Result<Self> {
        if n_dagger + n_plain > MAX_MOMENT_ORDER {
            return Err(Error::UnsupportedOrder(n_dagger + n_plain));
        }
        Ok(Self {
            n_dagger,
            n_plain,
            ordering,
        })
    }

    pub fn normal(n_dagger: usize, n_plain: usize) -> Result<Self> {
        Self::new(n_dagger, n_plain, Ordering::Normal)
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(k−1)!!` for even `k`, the number of perfect matchings of `k` items.
fn matchings(k: usize) -> f64 {
    (1..k).step_by(2).map(|v| v as f64).product()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Wick expansion of `<a†ⁿ aᵐ>_s` with `a = <a> + δa`: the `δa†`/`δa`
/// contractions give `N + (1−s)/2`, the `δa δa` ones `M`, the `δa† δa†` ones `M*`.
pub fn s_ordered_moment<T: Real>(m: &LadderMoments<T>, req: &MomentRequest) -> Result<Complex<T>> {
    let req = MomentRequest::new(req.n_dagger, req.n_plain, req.ordering)?;
    let (n_fluct, m_fluct, mean) = m.single_mode_parts()?;
    let n_s = Complex::new(n_fluct + (T::one() - req.ordering.s::<T>()) * lit(0.5), T::zero());
    let mean_c = mean.conjugate();
    let m_c = m_fluct.conjugate();
    let lc = |x: f64| Complex::new(lit::<T>(x), T::zero());
    let cpow = |z: Complex<T>, k: usize| (0..k).fold(Complex::new(T::one(), T::zero()), |acc, _| acc * z);

    // W(k, l): fully contracted <δa†ᵏ δaˡ>_s
    let wick = |k: usize, l: usize| {
        let mut total = Complex::new(T::zero(), T::zero());
        for j in 0..=k.min(l) {
            let (rk, rl) = (k - j, l - j);
            if rk % 2 != 0 || rl % 2 != 0 {
                continue;
            }
            let count = binom(k, j) * binom(l, j) * factorial(j) * matchings(rk) * matchings(rl);
            total += lc(count) * cpow(n_s, j) * cpow(m_c, rk / 2) * cpow(m_fluct, rl / 2);
        }
        total
    };

    let (n, mm) = (req.n_dagger, req.n_plain);
    let mut total = Complex::new(T::zero(), T::zero());
    for k in 0..=n {
        for l in 0..=mm {
            let w = wick(k, l);
            if w == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            total += lc(binom(n, k) * binom(mm, l)) * cpow(mean_c, n - k) * cpow(mean, mm - l) * w;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G2Variant {
    Ideal,
    ThermalDetector,
    Open,
}

/// `g²(0)` with the moments it came from. `g2` is `None` where `<n> = 0`
/// leaves the ratio undefined; `note` then says why.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Report<T: Real> {
    pub g2: Option<T>,
    /// `g² − 1`, formed without cancellation where the variant allows it.
    pub g2_minus_one: Option<T>,
    pub mean_n: T,
    /// `<n²>`.
    pub mean_n2: T,
    pub variant: G2Variant,
    pub params: GwSignalParams<T>,
    pub note: Option<&'static str>,
}

impl<T: Real> G2Report<T> {
    pub fn value(&self) -> Result<T> {
        self.g2
            .ok_or(Error::G2Undefined(self.note.unwrap_or("zero mean occupation")))
    }
}

/// `(g², g² − 1)` when defined, then `<n>` and `<n²>`.
type G2Parts<T> = (Option<(T, T)>, T, T);

fn g2_parts<T: Real>(m: &LadderMoments<T>) -> Result<G2Parts<T>> {
    let (n_f, m_f, a) = m.single_mode_parts()?;
    let a2 = a.norm_sqr();
    let mean_n = a2 + n_f;
    let excess = lit::<T>(2.0) * (a2 * n_f + (a.conjugate() * a.conjugate() * m_f).re) + n_f * n_f + m_f.norm_sqr();
    let fact2 = s_ordered_moment(m, &MomentRequest::normal(2, 2)?)?.re;
    let mean_n2 = fact2 + mean_n;
    if !(mean_n > T::zero()) {
        return Ok((None, mean_n, mean_n2));
    }
    let gm1 = excess / (mean_n * mean_n);
    Ok((Some((fact2 / (mean_n * mean_n), gm1)), mean_n, mean_n2))
}

/// `g²` of any single-mode Gaussian state from its moments.
pub fn g2_from_moments<T: Real>(m: &LadderMoments<T>) -> Result<Option<T>> {
    Ok(g2_parts(m)?.0.map(|(g, _)| g))
}

/// `g²` of the GW state, which a vacuum detector inherits for any `γt` with `sin γt ≠ 0`.
pub fn g2_ideal<T: Real>(p: &GwSignalParams<T>) -> Result<G2Report<T>> {
    let (parts, mean_n, mean_n2) = g2_parts(&LadderMoments::from_gw(p))?;
    let (g2, gm1) = parts.ok_or(Error::G2Undefined("vacuum input has <n> = 0"))?;
    Ok(G2Report {
        g2: Some(g2),
        g2_minus_one: Some(gm1),
        mean_n,
        mean_n2,
        variant: G2Variant::Ideal,
        params: *p,
        note: None,
    })
}

/// Closed form with the cross term written as `sinh 2r · sin 2θ`, for `α`
/// real. Kept only to quantify how far it sits from [`g2_ideal`].
pub fn g2_sin2theta_form<T: Real>(p: &GwSignalParams<T>) -> T {
    g2_real_alpha_form(p, (lit::<T>(2.0) * p.theta).sin())
}

/// The same closed form with `cos θ`, which agrees with [`g2_ideal`] for real `α`.
pub fn g2_cos_theta_form<T: Real>(p: &GwSignalParams<T>) -> T {
    g2_real_alpha_form(p, p.theta.cos())
}

fn g2_real_alpha_form<T: Real>(p: &GwSignalParams<T>, cross: T) -> T {
    let (two, four, half) = (lit::<T>(2.0), lit::<T>(4.0), lit::<T>(0.5));
    let k = p.thermal_scale();
    let a2 = p.alpha.norm_sqr();
    let (ch2, sh2, ch4) = ((two * p.r).cosh(), (two * p.r).sinh(), (four * p.r).cosh());
    let num = two * (two * a2 - T::one()) * k * ch2 - four * a2 * k * sh2 * cross - two * a2 + two * k * k * ch4 + half;
    let den = two * a2 + two * k * ch2 - T::one();
    T::one() + two * num / (den * den)
}

/// `2ℙ₀ℙ₂/ℙ₁²`.
pub fn g2_ratio_estimator<T: Real>(p0: T, p1: T, p2: T) -> Result<T> {
    if !(p1 > T::zero()) {
        return Err(Error::G2Undefined("ratio estimator needs P1 > 0"));
    }
    Ok(lit::<T>(2.0) * p0 * p2 / (p1 * p1))
}

/// `Q = sin²γt <n_grav> (g² − 1)`; zero for the vacuum, where `<n>(g² − 1)`
/// has the limit 0 along every Gaussian family.
pub fn mandel_q<T: Real>(p: &GwSignalParams<T>, gamma_t: T) -> Result<T> {
    let s2 = gamma_t.sin().powi(2);
    match g2_ideal(p) {
        Ok(rep) => Ok(s2 * rep.mean_n * rep.g2_minus_one.expect("defined g2")),
        Err(Error::G2Undefined(_)) => Ok(T::zero()),
        Err(e) => Err(e),
    }
}

/// Detector prepared thermal with `n_th`, then driven by the GW for `γt`.
pub fn g2_thermal_detector<T: Real>(p: &GwSignalParams<T>, n_th: T, gamma_t: T) -> Result<G2Report<T>> {
    if !(n_th >= T::zero()) {
        return Err(Error::param("n_th", "must be non-negative"));
    }
    let p = GwSignalParams::new(p.alpha, p.r, p.theta, p.nbar)?;
    let (one, two, three, four, eight) = (T::one(), lit::<T>(2.0), lit::<T>(3.0), lit::<T>(4.0), lit::<T>(8.0));
    let (s, c) = gamma_t.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let n2 = two * p.nbar + one;
    let nt2 = two * n_th + one;
    let a2 = p.alpha.norm_sqr();
    let cross = (p.alpha.conjugate() * p.alpha.conjugate() * Complex::new(p.theta.cos(), p.theta.sin())).re;
    let (ch2, sh2, ch4) = ((two * p.r).cosh(), (two * p.r).sinh(), (four * p.r).cosh());
    let i1 = four * n2 * ch2 * s2 * (two * a2 + (nt2 - two * a2) * (two * gamma_t).cos() + two * n_th - one);
    let i2 = s2 * s2 * (eight * a2 * a2 - eight * n2 * sh2 * cross + three * n2 * n2 * ch4 + n2 * n2);
    let i3 = four * (nt2 * c2 - one) * (nt2 * c2 + four * a2 * s2 - one);
    let mean_n = n_th + s2 * (p.n_grav() - n_th);
    let fact2 = (i1 + i2 + i3) / eight;
    let mean_n2 = fact2 + mean_n;
    if !(mean_n > T::zero()) {
        return Ok(G2Report {
            g2: None,
            g2_minus_one: None,
            mean_n,
            mean_n2,
            variant: G2Variant::ThermalDetector,
            params: p,
            note: Some("vacuum detector at t = 0: the limit depends on how the vacuum is approached"),
        });
    }
    let g2 = fact2 / (mean_n * mean_n);
    Ok(G2Report {
        g2: Some(g2),
        g2_minus_one: Some(g2 - one),
        mean_n,
        mean_n2,
        variant: G2Variant::ThermalDetector,
        params: p,
        note: None,
    })
}

/// Vacuum detector driven for `γt` while both modes damp at `κ` into `N̄` for time `t`.
pub fn g2_open<T: Real>(p: &GwSignalParams<T>, ch: &OpenChannelParams<T>, gamma_t: T, t: T) -> Result<G2Report<T>> {
    let p = GwSignalParams::new(p.alpha, p.r, p.theta, p.nbar)?;
    let (two, four) = (lit::<T>(2.0), lit::<T>(4.0));
    let s2 = gamma_t.sin().powi(2);
    let n2 = two * p.nbar + T::one();
    let sh2 = (two * p.r).sinh();
    let a2 = p.alpha.norm_sqr();
    let cross = (p.alpha.conjugate() * p.alpha.conjugate() * Complex::new(p.theta.cos(), p.theta.sin())).re;
    let kt = ch.kappa * t;
    // <n>·e^{κt}
    let scaled_n = ch.nbar_env * kt.exp_m1() + p.n_grav() * s2;
    let decay = (-kt).exp();
    let mean_n = scaled_n * decay;
    if !(scaled_n > T::zero()) {
        return Ok(G2Report {
            g2: None,
            g2_minus_one: None,
            mean_n,
            mean_n2: T::zero(),
            variant: G2Variant::Open,
            params: p,
            note: Some("detector still in vacuum"),
        });
    }
    let num = s2 * s2 * (n2 * sh2 * (n2 * sh2 - four * cross) - four * a2 * a2);
    let g2 = two + num / (four * scaled_n * scaled_n);
    let mean_n2 = g2 * mean_n * mean_n + mean_n;
    Ok(G2Report {
        g2: Some(g2),
        g2_minus_one: Some(g2 - T::one()),
        mean_n,
        mean_n2,
        variant: G2Variant::Open,
        params: p,
        note: None,
    })
}

/// The open-system closed form with `2[…]²` in place of `4[…]²` below the
/// fraction, evaluated only for comparison.
pub fn g2_open_alt_denominator<T: Real>(
    p: &GwSignalParams<T>,
    ch: &OpenChannelParams<T>,
    gamma_t: T,
    t: T,
) -> Option<T> {
    let rep = g2_open(p, ch, gamma_t, t).ok()?;
    rep.g2.map(|g| lit::<T>(2.0) * g - lit::<T>(2.0))
}

/// Heating budget: `Γ_th = κN̄` against the signal `n_grav(γt)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingReport<T: Real> {
    pub gamma_th: T,
    pub bath_phonons: T,
    pub signal_phonons: T,
    pub detectable: bool,
}

pub fn heating_check<T: Real>(ch: &OpenChannelParams<T>, t: T, n_grav: T, gamma_t: T) -> HeatingReport<T> {
    let gamma_th = ch.kappa * ch.nbar_env;
    let bath_phonons = gamma_th * t;
    let signal_phonons = n_grav * gamma_t * gamma_t;
    HeatingReport {
        gamma_th,
        bath_phonons,
        signal_phonons,
        detectable: bath_phonons < signal_phonons,
    }
}
