//! Truncated Fock-space reference simulator (double precision only).
//!
//! States are built in a padded space and cut down to the requested cutoff;
//! the population left in the top retained level is reported as `tail_mass`.

use nalgebra::{DMatrix, DVector};

use crate::gaussian::GwSignalParams;
use crate::{Complex, Error, Result};

type C = Complex<f64>;

/// Validity threshold on `tail_mass`.
pub const TAIL_TOLERANCE: f64 = 1e-8;
/// Target of the adaptive cutoff search; falls back to [`TAIL_TOLERANCE`] at [`MAX_DIM`].
pub const ADAPTIVE_TARGET: f64 = 1e-13;
/// Largest per-mode cutoff tried by the adaptive constructors.
pub const MAX_DIM: usize = 60;
const PAD: usize = MAX_DIM + 40;
const MIN_DIM: usize = 8;

#[derive(Debug, Clone)]
pub struct TruncatedState {
    dim: usize,
    modes: usize,
    rho: DMatrix<C>,
    tail_mass: f64,
    leakage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn valid(&self) -> bool {
        self.trace_error < 1e-10 && self.hermiticity_error < 1e-12 && self.min_eigenvalue > -1e-10
    }
}

impl TruncatedState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn rho(&self) -> &DMatrix<C> {
        &self.rho
    }

    /// Population of the highest retained level plus the mass cut off above it.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Trace lost when cutting the padded construction down to `dim`, before renormalization.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let trace_error = (self.rho.trace() - C::new(1.0, 0.0)).norm();
        let hermiticity_error = (&self.rho - self.rho.adjoint()).camax();
        let herm = (&self.rho + self.rho.adjoint()) * C::new(0.5, 0.0);
        let min_eigenvalue = herm
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        StateDiagnostics {
            trace_error,
            hermiticity_error,
            min_eigenvalue,
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// `tr(ρ a†ᵏ aˡ)` for a single-mode state.
    pub fn normal_moment(&self, k: usize, l: usize) -> Result<C> {
        if self.modes != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.modes,
            });
        }
        let a = lowering(self.dim);
        let mut op = DMatrix::<C>::identity(self.dim, self.dim);
        for _ in 0..k {
            op *= a.adjoint();
        }
        for _ in 0..l {
            op *= &a;
        }
        Ok((&self.rho * op).trace())
    }

    /// Reduced state of one mode of a two-mode state.
    pub fn partial_trace(&self, keep: usize) -> Result<TruncatedState> {
        if self.modes != 2 || keep > 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.modes,
            });
        }
        let d = self.dim;
        let rho = DMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|k| {
                    let (r, c) = if keep == 0 {
                        (i * d + k, j * d + k)
                    } else {
                        (k * d + i, k * d + j)
                    };
                    self.rho[(r, c)]
                })
                .sum()
        });
        Ok(single_mode_state(rho, self.leakage))
    }
}

fn single_mode_state(rho: DMatrix<C>, leakage: f64) -> TruncatedState {
    let dim = rho.nrows();
    let tail_mass = rho[(dim - 1, dim - 1)].re.max(0.0) + leakage;
    TruncatedState {
        dim,
        modes: 1,
        rho,
        tail_mass,
        leakage,
    }
}

/// Annihilation operator on `dim` levels.
pub fn lowering(dim: usize) -> DMatrix<C> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C::new((j as f64).sqrt(), 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// `exp(G)` for anti-Hermitian `G`, through the eigenbasis of the Hermitian `iG`.
fn expm_antihermitian(g: &DMatrix<C>) -> DMatrix<C> {
    let h = g * C::new(0.0, 1.0);
    let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C::new(0.0, -l).exp()),
    );
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

/// `D(α) S(ξ) ρ_n̄ S(ξ)† D(α)†` on `dim` levels, with `S(ξ) = exp(½(ξ* a² − ξ a†²))`, `ξ = r e^{iθ}`.
pub fn build_gw_density(p: &GwSignalParams<f64>, dim: usize) -> Result<TruncatedState> {
    let state = build_gw_density_unchecked(p, dim)?;
    if state.tail_mass > TAIL_TOLERANCE {
        return Err(Error::Truncation {
            dim,
            tail_mass: state.tail_mass,
            tolerance: TAIL_TOLERANCE,
        });
    }
    Ok(state)
}

/// As [`build_gw_density`] without the tail check.
pub fn build_gw_density_unchecked(p: &GwSignalParams<f64>, dim: usize) -> Result<TruncatedState> {
    if dim < 2 {
        return Err(Error::param("dim", "cutoff must be at least 2"));
    }
    Ok(truncate(&padded_density(p, 2 * dim + 40), dim))
}

fn padded_density(p: &GwSignalParams<f64>, pad: usize) -> DMatrix<C> {
    let a = lowering(pad);
    let ad = a.adjoint();
    let xi = C::from_polar(p.r, p.theta);
    let sq_gen = ((&a * &a) * xi.conj() - (&ad * &ad) * xi) * C::new(0.5, 0.0);
    let disp_gen = &ad * p.alpha - &a * p.alpha.conj();
    let u = expm_antihermitian(&disp_gen) * expm_antihermitian(&sq_gen);

    let ratio = p.nbar / (1.0 + p.nbar);
    let roots = DVector::from_fn(pad, |n, _| C::new((ratio.powi(n as i32) / (1.0 + p.nbar)).sqrt(), 0.0));
    let half = u * DMatrix::from_diagonal(&roots);
    &half * half.adjoint()
}

fn truncate(full: &DMatrix<C>, dim: usize) -> TruncatedState {
    let mut rho = full.view((0, 0), (dim, dim)).into_owned();
    let tr = rho.trace().re;
    rho /= C::new(tr, 0.0);
    rho = (&rho + rho.adjoint()) * C::new(0.5, 0.0);
    single_mode_state(rho, (1.0 - tr).max(0.0))
}

/// Smallest cutoff (from 8, in steps of 4, at most [`MAX_DIM`]) whose tail mass is below `tol`.
pub fn build_gw_density_adaptive(p: &GwSignalParams<f64>, tol: f64) -> Result<TruncatedState> {
    adaptive(p, tol, tol)
}

/// As [`build_gw_density_adaptive`], but accepts the cap when its tail is below `fallback`.
fn adaptive(p: &GwSignalParams<f64>, tol: f64, fallback: f64) -> Result<TruncatedState> {
    let full = padded_density(p, PAD);
    let mut dim = MIN_DIM;
    loop {
        let s = truncate(&full, dim);
        if s.tail_mass < tol || (dim >= MAX_DIM && s.tail_mass <= fallback) {
            return Ok(s);
        }
        if dim >= MAX_DIM {
            return Err(Error::Truncation {
                dim,
                tail_mass: s.tail_mass,
                tolerance: fallback,
            });
        }
        dim = (dim + 4).min(MAX_DIM);
    }
}

/// `exp(−iγt(a b† + a† b))` on the truncated two-mode space, built block by block
/// over total excitation number. Index of `|j⟩_a|k⟩_b` is `j·dim + k`.
#[derive(Debug, Clone)]
pub struct BeamsplitterUnitary {
    dim: usize,
    /// `(total number, basis indices, block unitary)`.
    blocks: Vec<(usize, Vec<usize>, DMatrix<C>)>,
}

impl BeamsplitterUnitary {
    pub fn new(gamma_t: f64, dim: usize) -> Self {
        Self::up_to(gamma_t, dim, 2 * dim - 1)
    }

    /// Blocks with total number below `totals` only.
    fn up_to(gamma_t: f64, dim: usize, totals: usize) -> Self {
        let blocks = (0..totals)
            .map(|total| {
                let lo = total.saturating_sub(dim - 1);
                let hi = total.min(dim - 1);
                let js: Vec<usize> = (lo..=hi).collect();
                let idx: Vec<usize> = js.iter().map(|&j| j * dim + (total - j)).collect();
                // a† b |j, N−j⟩ = √((j+1)(N−j)) |j+1, N−j−1⟩
                let n = js.len();
                let mut h = DMatrix::<C>::zeros(n, n);
                for q in 0..n.saturating_sub(1) {
                    let j = js[q];
                    let amp = (((j + 1) * (total - j)) as f64).sqrt();
                    h[(q + 1, q)] = C::new(amp, 0.0);
                    h[(q, q + 1)] = C::new(amp, 0.0);
                }
                let u = expm_antihermitian(&(h * C::new(0.0, -gamma_t)));
                (total, idx, u)
            })
            .collect();
        Self { dim, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest `‖U†U − I‖` over blocks with total number below the cutoff.
    pub fn block_unitarity_error(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|(total, _, _)| *total < self.dim)
            .map(|(_, _, u)| (u.adjoint() * u - DMatrix::identity(u.nrows(), u.ncols())).camax())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let d2 = self.dim * self.dim;
        let mut out = DMatrix::zeros(d2, d2);
        for (_, idx, u) in &self.blocks {
            for (p, &i) in idx.iter().enumerate() {
                for (q, &j) in idx.iter().enumerate() {
                    out[(i, j)] = u[(p, q)];
                }
            }
        }
        out
    }

    /// `⟨j, N−j| U |N, 0⟩` for `j = 0..=N`.
    fn column_from_gw(&self, total: usize) -> Vec<C> {
        let (_, idx, u) = &self.blocks[total];
        let src = idx
            .iter()
            .position(|&i| i == total * self.dim)
            .expect("|N,0> lies in block N");
        (0..idx.len()).map(|p| u[(p, src)]).collect()
    }
}

pub fn beamsplitter_unitary(gamma_t: f64, dim: usize) -> DMatrix<C> {
    BeamsplitterUnitary::new(gamma_t, dim).to_dense()
}

/// Bar-mode state after the swap, with the bar starting in vacuum.
pub fn bar_after_swap(gw: &TruncatedState, gamma_t: f64) -> Result<TruncatedState> {
    if gw.modes != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: gw.modes,
        });
    }
    let d = gw.dim;
    let bs = BeamsplitterUnitary::up_to(gamma_t, d, d);
    // amp[m][k] = ⟨m−k, k|U|m, 0⟩
    let amp: Vec<Vec<C>> = (0..d)
        .map(|m| bs.column_from_gw(m).into_iter().rev().collect())
        .collect();
    let rho = DMatrix::from_fn(d, d, |k, l| {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..d {
            let (m, mp) = (j + k, j + l);
            if m < d && mp < d {
                acc += gw.rho[(m, mp)] * amp[m][k] * amp[mp][l].conj();
            }
        }
        acc
    });
    let rho = (&rho + rho.adjoint()) * C::new(0.5, 0.0);
    Ok(single_mode_state(rho, gw.leakage))
}

/// Full two-mode state `U (ρ_gw ⊗ ρ_bar) U†`, with a vacuum bar when `bar` is `None`.
/// Dense, so intended for small cutoffs.
pub fn joint_after_swap(gw: &TruncatedState, bar: Option<&TruncatedState>, gamma_t: f64) -> Result<TruncatedState> {
    let d = gw.dim;
    let bar_rho = match bar {
        Some(b) if b.modes == 1 && b.dim == d => b.rho.clone(),
        Some(b) => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: b.dim,
            })
        }
        None => {
            let mut vac = DMatrix::<C>::zeros(d, d);
            vac[(0, 0)] = C::new(1.0, 0.0);
            vac
        }
    };
    if gw.modes != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: gw.modes,
        });
    }
    let input = gw.rho.kronecker(&bar_rho);
    let u = beamsplitter_unitary(gamma_t, d);
    let rho = &u * input * u.adjoint();
    let tail_mass = (0..d)
        .map(|k| rho[((d - 1) * d + k, (d - 1) * d + k)].re + rho[(k * d + d - 1, k * d + d - 1)].re)
        .sum::<f64>()
        .max(0.0)
        + gw.leakage
        + bar.map_or(0.0, |b| b.leakage);
    Ok(TruncatedState {
        dim: d,
        modes: 2,
        rho,
        tail_mass,
        leakage: gw.leakage,
    })
}

/// Detector state after the swap; `None` for `dim` picks the cutoff adaptively.
pub fn oracle_bar_state(p: &GwSignalParams<f64>, gamma_t: f64, dim: Option<usize>) -> Result<TruncatedState> {
    let gw = match dim {
        Some(d) => build_gw_density(p, d)?,
        None => adaptive(p, ADAPTIVE_TARGET, TAIL_TOLERANCE)?,
    };
    bar_after_swap(&gw, gamma_t)
}

/// `tr[ρ_bar(t) |n⟩⟨n|]`; `None` for `dim` picks the cutoff adaptively.
pub fn oracle_pn(p: &GwSignalParams<f64>, gamma_t: f64, n: usize, dim: Option<usize>) -> Result<f64> {
    let bar = oracle_bar_state(p, gamma_t, dim)?;
    Ok(bar.populations().get(n).copied().unwrap_or(0.0))
}

/// `ℙ₀ … ℙ_{n_max}` from one evolved state.
pub fn oracle_probabilities(
    p: &GwSignalParams<f64>,
    gamma_t: f64,
    n_max: usize,
    dim: Option<usize>,
) -> Result<Vec<f64>> {
    let pops = oracle_bar_state(p, gamma_t, dim)?.populations();
    Ok((0..=n_max).map(|n| pops.get(n).copied().unwrap_or(0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoments {
    pub mean_n: f64,
    pub mean_n2: f64,
    pub g2: f64,
}

/// Moments of a single-mode state; errors when `⟨n⟩` vanishes.
pub fn moments_and_g2(state: &TruncatedState) -> Result<OracleMoments> {
    let pops = state.populations();
    let mean_n: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let mean_n2: f64 = pops.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
    if mean_n < 1e-14 {
        return Err(Error::G2Undefined("mean detector occupation is zero"));
    }
    Ok(OracleMoments {
        mean_n,
        mean_n2,
        g2: (mean_n2 - mean_n) / (mean_n * mean_n),
    })
}

pub fn oracle_moments_and_g2(p: &GwSignalParams<f64>, gamma_t: f64, dim: Option<usize>) -> Result<OracleMoments> {
    moments_and_g2(&oracle_bar_state(p, gamma_t, dim)?)
}

/// Minimum and maximum of `⟨(Δx_φ)²⟩` over `φ`, with `x_φ = (e^{−iφ}a + e^{iφ}a†)/√2`.
/// An `n_grid` scan brackets each extremum, then golden-section search refines it.
pub fn quadrature_variance_extremes(state: &TruncatedState, n_grid: usize) -> Result<(f64, f64)> {
    if n_grid < 3 {
        return Err(Error::param("n_grid", "need at least 3 grid points"));
    }
    let a1 = state.normal_moment(0, 1)?;
    let a2 = state.normal_moment(0, 2)?;
    let n = state.normal_moment(1, 1)?.re;
    let var = |phi: f64| {
        let e = C::from_polar(1.0, -phi);
        let mean = (e * a1).re * 2f64.sqrt();
        (e * e * a2).re + n + 0.5 - 0.5 * mean * mean
    };
    let step = std::f64::consts::PI / n_grid as f64;
    let grid: Vec<f64> = (0..n_grid).map(|i| var(step * i as f64)).collect();
    let arg = |better: fn(f64, f64) -> bool| {
        (1..n_grid).fold(0, |best, i| if better(grid[i], grid[best]) { i } else { best })
    };
    let lo = golden(var, step * arg(|a, b| a < b) as f64, step);
    let hi = -golden(|x| -var(x), step * arg(|a, b| a > b) as f64, step);
    Ok((lo, hi))
}

/// Minimum of a unimodal `f` on `[c − w, c + w]`.
fn golden(f: impl Fn(f64) -> f64, c: f64, w: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (c - w, c + w);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gw(alpha: (f64, f64), r: f64, theta: f64, nbar: f64) -> GwSignalParams<f64> {
        GwSignalParams::new(C::new(alpha.0, alpha.1), r, theta, nbar).unwrap()
    }

    #[test]
    fn vacuum_and_thermal_densities() {
        let v = build_gw_density(&GwSignalParams::vacuum(), 10).unwrap();
        assert_abs_diff_eq!(v.rho()[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert!(v.rho().iter().skip(1).all(|z| z.norm() < 1e-14));
        let t = build_gw_density_unchecked(&GwSignalParams::thermal(1.0), 40).unwrap();
        for (n, p) in t.populations().iter().take(20).enumerate() {
            assert_abs_diff_eq!(*p, 0.5f64.powi(n as i32 + 1), epsilon = 1e-11);
        }
    }

    #[test]
    fn displaced_squeezed_is_pure() {
        let s = build_gw_density_adaptive(&gw((1.0, 0.0), 0.3, 0.0, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-8);
        assert!(s.diagnostics().valid());
    }

    #[test]
    fn density_matches_gaussian_moments() {
        let p = gw((0.6, -0.4), 0.5, 0.9, 0.3);
        let s = build_gw_density_adaptive(&p, 1e-11).unwrap();
        let (n, m) = p.fluctuation_moments();
        assert_abs_diff_eq!((s.normal_moment(0, 1).unwrap() - p.alpha).norm(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            s.normal_moment(1, 1).unwrap().re,
            n + p.alpha.norm_sqr(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            (s.normal_moment(0, 2).unwrap() - (m + p.alpha * p.alpha)).norm(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn beamsplitter_identity_and_unitarity() {
        let u = beamsplitter_unitary(0.0, 6);
        assert!((u - DMatrix::<C>::identity(36, 36)).camax() < 1e-14);
        assert!(BeamsplitterUnitary::new(0.83, 12).block_unitarity_error() < 1e-11);
    }

    #[test]
    fn swap_amplitudes_match_binomial() {
        let gt = 0.7f64;
        let bs = BeamsplitterUnitary::new(gt, 9);
        let (s, c) = gt.sin_cos();
        for m in 0..9usize {
            let col = bs.column_from_gw(m);
            for (j, amp) in col.iter().enumerate() {
                let k = m - j;
                let binom = (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64);
                let expect = C::new(0.0, -1.0).powi(k as i32) * binom.sqrt() * c.powi(j as i32) * s.powi(k as i32);
                assert_abs_diff_eq!((amp - expect).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn coherent_input_gives_rotated_coherent_bar() {
        let alpha = C::new(1.1, 0.3);
        let gt = 0.6f64;
        let g = build_gw_density_adaptive(&GwSignalParams::coherent(alpha), 1e-12).unwrap();
        let bar = bar_after_swap(&g, gt).unwrap();
        let expect = C::new(0.0, -1.0) * alpha * gt.sin();
        assert_abs_diff_eq!((bar.normal_moment(0, 1).unwrap() - expect).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(bar.purity(), 1.0, epsilon = 1e-10);
        let mu = expect.norm_sqr();
        let pops = bar.populations();
        for (n, p) in pops.iter().take(6).enumerate() {
            assert_abs_diff_eq!(*p, crate::counting::poisson_pn(mu, n).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn squeezed_vacuum_has_no_odd_counts() {
        let probs = oracle_probabilities(
            &GwSignalParams::squeezed_vacuum(0.7, 0.4),
            std::f64::consts::FRAC_PI_2,
            7,
            None,
        )
        .unwrap();
        for n in (1..8).step_by(2) {
            assert!(probs[n].abs() < 1e-12);
        }
    }

    #[test]
    fn joint_state_is_valid_and_reduces_to_bar() {
        let p = gw((0.5, 0.2), 0.3, 0.4, 0.1);
        let g = build_gw_density_unchecked(&p, 12).unwrap();
        let joint = joint_after_swap(&g, None, 0.5).unwrap();
        assert!(joint.diagnostics().valid());
        let via_joint = joint.partial_trace(1).unwrap();
        let direct = bar_after_swap(&g, 0.5).unwrap();
        assert!((via_joint.rho() - direct.rho()).camax() < 1e-13);
    }

    #[test]
    fn g2_reference_values() {
        assert_abs_diff_eq!(
            oracle_moments_and_g2(&GwSignalParams::thermal(0.8), 0.4, None)
                .unwrap()
                .g2,
            2.0,
            epsilon = 1e-9
        );
        let coh = GwSignalParams::coherent(C::new(1.3, 0.0));
        assert_abs_diff_eq!(oracle_moments_and_g2(&coh, 0.4, None).unwrap().g2, 1.0, epsilon = 1e-10);
        assert!(oracle_moments_and_g2(&GwSignalParams::vacuum(), 0.4, None).is_err());
    }

    #[test]
    fn g2_transfer_law() {
        let p = gw((0.7, 0.1), 0.4, 0.3, 0.2);
        let g: Vec<f64> = [0.1, 0.5, 1.0]
            .iter()
            .map(|&gt| oracle_moments_and_g2(&p, gt, None).unwrap().g2)
            .collect();
        assert_abs_diff_eq!(g[0], g[1], epsilon = 1e-8);
        assert_abs_diff_eq!(g[0], g[2], epsilon = 1e-8);
    }

    #[test]
    fn truncation_is_rejected_and_converges() {
        assert!(matches!(
            build_gw_density(&GwSignalParams::thermal(3.0), 10),
            Err(Error::Truncation { .. })
        ));
        let p = gw((0.5, 0.0), 0.2, 0.0, 0.05);
        let a = build_gw_density_adaptive(&p, 1e-10).unwrap();
        let b = build_gw_density_unchecked(&p, 2 * a.dim()).unwrap();
        let ma = moments_and_g2(&bar_after_swap(&a, 0.4).unwrap()).unwrap();
        let mb = moments_and_g2(&bar_after_swap(&b, 0.4).unwrap()).unwrap();
        assert!((ma.mean_n - mb.mean_n).abs() < 1e-9);
        assert!((ma.g2 - mb.g2).abs() < 1e-9);
    }
}
