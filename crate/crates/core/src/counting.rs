//! Detector excitation probabilities for single-mode Gaussian states.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::gaussian::{GwSignalParams, LadderMoments};
use crate::real::{lit, scaled_cosh_sinh, to_f64};
use crate::{Complex, Error, Real, Result};

/// Largest `k` accepted by [`loop_hafnian`] (matrices up to 16×16).
pub const MAX_HAFNIAN_K: usize = 8;

/// Poisson probability `e^{−μ} μⁿ / n!`, evaluated in the log domain.
pub fn poisson_pn<T: Real>(mean: T, n: usize) -> Result<T> {
    if !(mean >= T::zero()) {
        return Err(Error::param("mean", "must be non-negative"));
    }
    if mean == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    let nf = T::from_usize(n).expect("n representable");
    Ok((nf * mean.ln() - mean - ln_factorial::<T>(n)).exp())
}

fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::zero(), |acc, k| {
        acc + T::from_usize(k).expect("k representable").ln()
    })
}

/// `Σ_Q = Σ + ½I`, `A = X(I − Σ_Q⁻¹)`, `F = ā†Σ_Q⁻¹` and `ℙ₀` for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingMatrices<T: Real> {
    pub sigma_q: DMatrix<Complex<T>>,
    pub a_mat: DMatrix<Complex<T>>,
    pub f_vec: DVector<Complex<T>>,
    /// `det Σ_Q`, real and ≥ 1 for physical states.
    pub det_q: T,
    /// `e^{−½ā†Σ_Q⁻¹ā} / √det Σ_Q`, which is also `ℙ₀`.
    pub prefactor: T,
}

pub fn counting_matrices<T: Real>(bar: &LadderMoments<T>) -> Result<CountingMatrices<T>> {
    let (n, m, a) = bar.single_mode_parts()?;
    let half = lit::<T>(0.5);
    let d = n + T::one();
    let m_abs = m.modulus();
    // factored to avoid d² − |m|² cancellation when both are large
    let det_q = (d - m_abs) * (d + m_abs);
    if !(det_q > T::zero()) || !det_q.is_finite() {
        return Err(Error::Singular("sigma_q"));
    }
    let inv_det = T::one() / det_q;
    let ac = a.conjugate();
    let quad = lit::<T>(2.0) * inv_det * (d * a.norm_sqr() - (m * ac * ac).re);
    let prefactor = (-half * quad).exp() / det_q.sqrt();
    let one_minus = (det_q - d) * inv_det;
    let c = |v: T| Complex::new(v, T::zero());
    let a_mat = DMatrix::from_row_slice(
        2,
        2,
        &[m.conjugate() * inv_det, c(one_minus), c(one_minus), m * inv_det],
    );
    let f1 = (ac * d - a * m.conjugate()) * inv_det;
    let f_vec = DVector::from_vec(vec![f1, f1.conjugate()]);
    Ok(CountingMatrices {
        sigma_q: bar.sigma_q(),
        a_mat,
        f_vec,
        det_q,
        prefactor,
    })
}

/// Loop hafnian: sum over partitions of the indices into singletons (weight
/// `B_ii`) and pairs (weight `B_ij`, `i < j`). Exact enumeration, memoized on
/// the set of indices still to be covered.
pub fn loop_hafnian<T: Real>(b: &DMatrix<Complex<T>>) -> Result<Complex<T>> {
    let dim = b.nrows();
    if b.ncols() != dim {
        return Err(Error::Hafnian(format!("{}x{} is not square", b.nrows(), b.ncols())));
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::Hafnian(format!("odd dimension {dim}")));
    }
    if dim / 2 > MAX_HAFNIAN_K {
        return Err(Error::Hafnian(format!(
            "k = {} exceeds the enumeration bound {MAX_HAFNIAN_K}",
            dim / 2
        )));
    }
    let full = (1usize << dim) - 1;
    // memo[mask] = loop hafnian of the indices not in mask
    let mut memo: Vec<Option<Complex<T>>> = vec![None; full + 1];
    memo[full] = Some(Complex::new(T::one(), T::zero()));
    Ok(lhaf_rec(b, 0, &mut memo))
}

fn lhaf_rec<T: Real>(b: &DMatrix<Complex<T>>, mask: usize, memo: &mut [Option<Complex<T>>]) -> Complex<T> {
    if let Some(v) = memo[mask] {
        return v;
    }
    let i = (!mask).trailing_zeros() as usize;
    let with_i = mask | (1 << i);
    let mut total = b[(i, i)] * lhaf_rec(b, with_i, memo);
    for j in (i + 1)..b.nrows() {
        if with_i & (1 << j) == 0 {
            total += b[(i, j)] * lhaf_rec(b, with_i | (1 << j), memo);
        }
    }
    memo[mask] = Some(total);
    total
}

/// `𝒜⁽ⁿ⁾`: the `2n×2n` matrix `Jₙ ⊗ A` with its diagonal replaced by `F`
/// repeated `n` times.
pub fn loop_matrix<T: Real>(cm: &CountingMatrices<T>, n: usize) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i == j {
            cm.f_vec[i % 2]
        } else {
            cm.a_mat[(i % 2, j % 2)]
        }
    })
}

fn finish_probability<T: Real>(n: usize, p: Complex<T>) -> Result<T> {
    let scale = T::one().max(p.re.abs());
    if p.im.abs() > T::tol(1e-9) * scale {
        return Err(Error::Regime(format!(
            "probability {n} has imaginary part {}",
            to_f64(p.im)
        )));
    }
    clamp_probability(n, p.re)
}

fn clamp_probability<T: Real>(n: usize, p: T) -> Result<T> {
    if p >= T::zero() {
        Ok(p)
    } else if p >= -T::tol(1e-12) {
        Ok(T::zero())
    } else {
        Err(Error::NegativeProbability { n, value: to_f64(p) })
    }
}

/// `ℙₙ = ℙ₀ ℓhaf(𝒜⁽ⁿ⁾) / n!`.
pub fn prob_n_hafnian<T: Real>(bar: &LadderMoments<T>, n: usize) -> Result<T> {
    let cm = counting_matrices(bar)?;
    let lhaf = loop_hafnian(&loop_matrix(&cm, n))?;
    let p = lhaf * (cm.prefactor / ln_factorial::<T>(n).exp());
    finish_probability(n, p)
}

/// Normalized coefficients `H[i][j] = √(i! j!) [αⁱβʲ] exp(½A₁₁α² + A₁₂αβ + ½A₂₂β² + F₁α + F₂β)`,
/// for `i, j ≤ n`. Then `ℙₖ = ℙ₀ H[k][k]`.
fn generating_coefficients<T: Real>(cm: &CountingMatrices<T>, n: usize) -> Vec<Vec<Complex<T>>> {
    let (a11, a12, a22) = (cm.a_mat[(0, 0)], cm.a_mat[(0, 1)], cm.a_mat[(1, 1)]);
    let (f1, f2) = (cm.f_vec[0], cm.f_vec[1]);
    let zero = Complex::new(T::zero(), T::zero());
    let num = |k: usize| T::from_usize(k).expect("index representable");
    let mut h = vec![vec![zero; n + 1]; n + 1];
    h[0][0] = Complex::new(T::one(), T::zero());
    // first row from ∂_β E = (A₂₂β + A₁₂α + F₂)E at α = 0
    for j in 0..n {
        let jp = num(j + 1);
        let mut v = h[0][j] * (f2 / jp.sqrt());
        if j >= 1 {
            v += h[0][j - 1] * a22 * (num(j) / jp).sqrt();
        }
        h[0][j + 1] = v;
    }
    // remaining rows from ∂_α E = (A₁₁α + A₁₂β + F₁)E
    for i in 0..n {
        let ip = num(i + 1);
        for j in 0..=n {
            let mut v = h[i][j] * (f1 / ip.sqrt());
            if i >= 1 {
                v += h[i - 1][j] * a11 * (num(i) / ip).sqrt();
            }
            if j >= 1 {
                v += h[i][j - 1] * a12 * (num(j) / ip).sqrt();
            }
            h[i + 1][j] = v;
        }
    }
    h
}

/// `ℙₙ` as the `n`-th mixed derivative of the generating function.
pub fn prob_n_generating<T: Real>(bar: &LadderMoments<T>, n: usize) -> Result<T> {
    let cm = counting_matrices(bar)?;
    let h = generating_coefficients(&cm, n);
    finish_probability(n, h[n][n] * cm.prefactor)
}

/// `ℙ₀..ℙ_N` with `tail_bound = 1 − Σₙ ℙₙ` (clamped at zero), the exact
/// missing mass up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable<T: Real> {
    pub probs: Vec<(usize, T)>,
    pub truncation_n: usize,
    pub tail_bound: T,
}

/// Fills the table through the generating route, extending `N` until the tail
/// drops below `tol` or `max_n` is reached.
pub fn probability_table<T: Real>(bar: &LadderMoments<T>, tol: T, max_n: usize) -> Result<ProbabilityTable<T>> {
    let cm = counting_matrices(bar)?;
    let mut n_try = 8.min(max_n);
    loop {
        let h = generating_coefficients(&cm, n_try);
        let mut probs = Vec::with_capacity(n_try + 1);
        let mut sum = T::zero();
        for (k, row) in h.iter().enumerate() {
            let p = finish_probability(k, row[k] * cm.prefactor)?;
            sum += p;
            probs.push((k, p));
        }
        let tail_bound = (T::one() - sum).max(T::zero());
        if tail_bound < tol || n_try >= max_n {
            return Ok(ProbabilityTable {
                probs,
                truncation_n: n_try,
                tail_bound,
            });
        }
        n_try = (2 * n_try).min(max_n);
    }
}

/// Which denominator the closed forms use: `cos²γt + 1` follows from
/// `Σ_Q = Σ + ½I`; `cos²γt + 2` is kept to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormVariant {
    Consistent,
    ShiftedDenominator,
}

/// Closed-form `(ℙ₀, ℙ₁, ℙ₂)` for a vacuum detector after `γt`.
pub fn closed_form_p012<T: Real>(p: &GwSignalParams<T>, gamma_t: T) -> Result<(T, T, T)> {
    closed_form_p012_variant(p, gamma_t, ClosedFormVariant::Consistent)
}

pub fn closed_form_p012_variant<T: Real>(
    p: &GwSignalParams<T>,
    gamma_t: T,
    variant: ClosedFormVariant,
) -> Result<(T, T, T)> {
    let p = GwSignalParams::new(p.alpha, p.r, p.theta, p.nbar)?;
    let (s, c) = gamma_t.sin_cos();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    if s == T::zero() {
        return Ok((T::one(), T::zero(), T::zero()));
    }
    let (xc, xs) = scaled_cosh_sinh(p.r, two * s.abs().ln() + p.thermal_scale().ln());
    let k2s4 = (p.thermal_scale() * s * s).powi(2);
    let base = match variant {
        ClosedFormVariant::Consistent => c * c + T::one(),
        ClosedFormVariant::ShiftedDenominator => c * c + two,
    };
    let d = xc + half * base;
    let det = k2s4 + xc * base + base * base / lit(4.0);
    let a1 = T::one() - d / det;
    let e = Complex::new(p.theta.cos(), p.theta.sin());
    let a11 = e.conjugate() * (-xs / det);
    let a22 = e * (-xs / det);
    let amp = p.alpha * s;
    let f1 = (amp.conjugate() * d + amp * e.conjugate() * xs) / det;
    let f2 = (amp * d + amp.conjugate() * e * xs) / det;
    let quad = two * (d * amp.norm_sqr() + xs * (e * amp.conjugate() * amp.conjugate()).re) / det;
    let p0 = (-half * quad).exp() / det.sqrt();
    let a1c = Complex::new(a1, T::zero());
    let p1 = (a1c + f1 * f2) * p0;
    let p2 = ((a11 + f1 * f1) * (a22 + f2 * f2) + f1 * f2 * a1c * lit::<T>(4.0) + a1c * a1c * two) * (half * p0);
    Ok((p0, finish_probability(1, p1)?, finish_probability(2, p2)?))
}

/// `(ℙ₀, ℙ₁)` at `θ = 0` with `α` taken real and non-negative, in fully expanded form.
pub fn theta_zero_p01<T: Real>(p: &GwSignalParams<T>, gamma_t: T) -> (T, T) {
    let (s, c) = gamma_t.sin_cos();
    let (one, two, three, four) = (T::one(), lit::<T>(2.0), lit::<T>(3.0), lit::<T>(4.0));
    let s2 = s * s;
    let c2g = (two * gamma_t).cos();
    let n2 = two * p.nbar + one;
    let a2 = p.alpha.norm_sqr();
    let e2r = (two * p.r).exp();
    let den = two * n2 * s2 + e2r * (c2g + three);
    let root = (n2 * (two * p.r).cosh() * s2 * (c2g + three) + n2 * n2 * s2 * s2 + (c * c + one).powi(2)).sqrt();
    let p0 = two * (-four * a2 * e2r * s2 / den).exp() / root;
    let bracket = one
        - two / (two * n2 * e2r * s2 + c2g + three)
        - (four * n2 * e2r * s2 + two * e2r * e2r * ((four * a2 + one) * c2g + three - four * a2)) / (den * den);
    (p0, p0 * bracket)
}

/// How the non-coherent quanta `n_q` are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// `n̄ = n_q`, `r = 0`.
    Thermal,
    /// `sinh² r = n_q`, `n̄ = 0`.
    Squeezed,
}

/// GW parameters with `n_grav = x_total/(γt)²` and `n_q = fraction_q·n_grav`,
/// the remainder coherent with real `α` and `θ = 0`.
pub fn scaled_params<T: Real>(x_total: T, fraction_q: T, split: Split, gamma_t: T) -> Result<GwSignalParams<T>> {
    if !(x_total >= T::zero()) || !x_total.is_finite() {
        return Err(Error::param("x_total", "must be finite and non-negative"));
    }
    if !(fraction_q >= T::zero() && fraction_q <= T::one()) {
        return Err(Error::param("fraction_q", "must lie in [0, 1]"));
    }
    if !(gamma_t > T::zero()) {
        return Err(Error::param("gamma_t", "must be positive"));
    }
    let n_grav = x_total / (gamma_t * gamma_t);
    if !n_grav.is_finite() {
        return Err(Error::param("x_total", "n_grav overflows"));
    }
    let n_q = fraction_q * n_grav;
    let alpha = Complex::new((n_grav - n_q).max(T::zero()).sqrt(), T::zero());
    match split {
        Split::Thermal => GwSignalParams::new(alpha, T::zero(), T::zero(), n_q),
        Split::Squeezed => GwSignalParams::new(alpha, n_q.sqrt().asinh(), T::zero(), T::zero()),
    }
}

/// `Δℙₙ = ℙ_{n,c} − ℙₙ` against the coherent state of equal mean number,
/// with `Δℙₙ/ℙ_{n,c}` when `ℙ_{n,c} > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaP<T: Real> {
    pub p_coherent: T,
    pub p_state: T,
    pub delta: T,
    pub ratio: Option<T>,
}

pub fn coherent_partner<T: Real>(p: &GwSignalParams<T>) -> GwSignalParams<T> {
    if p.n_q() == T::zero() {
        return GwSignalParams::coherent(p.alpha);
    }
    let mag = p.n_grav().sqrt();
    let norm = p.alpha.modulus();
    let alpha = if norm > T::zero() {
        p.alpha * (mag / norm)
    } else {
        Complex::new(mag, T::zero())
    };
    GwSignalParams::coherent(alpha)
}

pub fn delta_pn<T: Real>(p: &GwSignalParams<T>, gamma_t: T, n: usize) -> Result<DeltaP<T>> {
    let state = LadderMoments::detector_after_swap(p, gamma_t);
    let coh = LadderMoments::detector_after_swap(&coherent_partner(p), gamma_t);
    let p_state = prob_n_generating(&state, n)?;
    let p_coherent = prob_n_generating(&coh, n)?;
    let delta = p_coherent - p_state;
    let ratio = (p_coherent > T::zero()).then(|| delta / p_coherent);
    Ok(DeltaP {
        p_coherent,
        p_state,
        delta,
        ratio,
    })
}

/// Lowest-order `Δℙ₁/ℙ_{1,c}` in `(γt)²` at fixed `x = n_grav(γt)²` and
/// `f = n_q/n_grav`.
pub fn delta_p1_ratio_lowest_order<T: Real>(x_total: T, fraction_q: T) -> T {
    let y = fraction_q * x_total;
    let two = lit::<T>(2.0);
    let den = (two * y + T::one()).powf(lit(1.5));
    T::one() - (two * (T::one() - fraction_q) * y + T::one()) / den * y.exp()
}
