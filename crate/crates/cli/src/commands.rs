use std::f64::consts::PI;

use gravstat::correlations::{
    g2_cos_theta_form, g2_ideal, g2_open, g2_sin2theta_form, g2_thermal_detector, s_ordered_moment,
};
use gravstat::counting::{closed_form_p012_variant, delta_pn, prob_n_generating, prob_n_hafnian, ClosedFormVariant};
use gravstat::fock::{oracle_bar_state, oracle_moments_and_g2, TAIL_TOLERANCE};
use gravstat::physical::{coupling_gamma, graviton_flux, noise_thresholds, PhysicalConstants};
use gravstat::tomography::{
    delta_g2_terms, quadrature_variance_normal, reconstruct_gaussian, separate_terms_by_beta, snr_quadrature,
};
use gravstat::{
    Complex64, Error, G2Report64, GwSignalParams64, LadderMoments64, LocalOscillator64, MomentRequest,
    OpenChannelParams64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ScenarioConfig, TomoSpec};
use crate::error::CliError;
use crate::output::{Cell, Output, Table};

fn columns(axes: &[String], rest: &[&str]) -> Vec<String> {
    axes.iter().cloned().chain(rest.iter().map(|s| s.to_string())).collect()
}

fn axis_cells(vals: &[f64]) -> Vec<Cell> {
    vals.iter().map(|v| Cell::Num(*v)).collect()
}

/// Rows `(n, ℙₙ, ℙₙ of the coherent partner, Δℙₙ/ℙₙᶜ)` at every sweep point.
pub fn probs(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let points = cfg.grid()?;
    let mut table = Table::new(columns(
        &cfg.axis_names(),
        &["gamma_t", "n", "p_n", "p_n_coherent", "delta_over_coherent"],
    ));
    let blocks = points
        .par_iter()
        .map(|(vals, c)| -> Result<Vec<Vec<Cell>>, CliError> {
            let gt = c.gamma_t()?;
            let p = c.gw_params(gt)?;
            (0..=c.n_max)
                .map(|n| {
                    let d = delta_pn(&p, gt, n)?;
                    let mut row = axis_cells(vals);
                    row.extend([
                        gt.into(),
                        n.into(),
                        d.p_state.into(),
                        d.p_coherent.into(),
                        d.ratio.into(),
                    ]);
                    Ok(row)
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    table.rows = blocks.into_iter().flatten().collect();
    Ok(Output::table(table))
}

fn g2_point(c: &ScenarioConfig) -> Result<(f64, &'static str, Option<G2Report64>), CliError> {
    let gt = c.gamma_t()?;
    let p = c.gw_params(gt)?;
    let n = &c.noise;
    let (variant, rep) = if n.kappa > 0.0 {
        let ch = OpenChannelParams64::new(n.kappa, n.nbar_env)?;
        let t = c
            .channel_time()
            .ok_or_else(|| CliError::Config("damping needs noise.time".into()))?;
        ("open", g2_open(&p, &ch, gt, t))
    } else if n.n_th > 0.0 {
        ("thermal_detector", g2_thermal_detector(&p, n.n_th, gt))
    } else {
        ("ideal", g2_ideal(&p))
    };
    match rep {
        Ok(r) => Ok((gt, variant, Some(r))),
        Err(Error::G2Undefined(_)) => Ok((gt, variant, None)),
        Err(e) => Err(e.into()),
    }
}

/// `g² − 1` over the sweep grid, with the `g² = 2` crossing flagged.
pub fn g2(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let points = cfg.grid()?;
    let mut table = Table::new(columns(
        &cfg.axis_names(),
        &[
            "gamma_t",
            "variant",
            "g2",
            "g2_minus_one",
            "mean_n",
            "above_thermal",
            "thermal_locus",
        ],
    ));
    let results = points
        .par_iter()
        .map(|(_, c)| g2_point(c))
        .collect::<Result<Vec<_>, _>>()?;

    let excess: Vec<Option<f64>> = results
        .iter()
        .map(|(_, _, r)| r.as_ref().and_then(|r| r.g2_minus_one).map(|v| v - 1.0))
        .collect();
    let inner = if cfg.sweep.len() == 2 {
        cfg.sweep[1].steps
    } else {
        excess.len().max(1)
    };
    let outer_len = excess.len() / inner.max(1);
    let crosses = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(x), Some(y)) if (x > 0.0) != (y > 0.0));
    let locus: Vec<bool> = (0..excess.len())
        .map(|k| {
            let (i, j) = (k / inner, k % inner);
            let here = excess[k];
            here == Some(0.0)
                || (j + 1 < inner && crosses(here, excess[k + 1]))
                || (cfg.sweep.len() == 2 && i + 1 < outer_len && crosses(here, excess[k + inner]))
        })
        .collect();

    for (((vals, _), (gt, variant, rep)), on_locus) in points.iter().zip(&results).zip(locus) {
        let mut row = axis_cells(vals);
        let g = rep.as_ref().and_then(|r| r.g2);
        row.extend([
            Cell::Num(*gt),
            (*variant).into(),
            g.into(),
            rep.as_ref().and_then(|r| r.g2_minus_one).into(),
            rep.as_ref().map(|r| r.mean_n).into(),
            g.map_or(Cell::Missing, |g| Cell::Flag(g > 2.0)),
            on_locus.into(),
        ]);
        table.rows.push(row);
    }
    Ok(Output::table(table))
}

fn wrap_angle(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

fn relative(truth: f64, got: f64) -> f64 {
    let d = (got - truth).abs();
    if truth.abs() > 1e-12 {
        d / truth.abs()
    } else {
        d
    }
}

/// Simulated phase/β sweep with seeded LO amplitude jitter, followed by
/// reconstruction of `(α, r, θ, n̄)`.
pub fn tomo(cfg: &ScenarioConfig, seed: u64) -> Result<Output, CliError> {
    if !cfg.sweep.is_empty() {
        return Err(CliError::Config("tomo takes a single scenario, remove `sweep`".into()));
    }
    let settings = cfg.tomo.clone().unwrap_or_default();
    let TomoSpec {
        phases,
        beta,
        betas,
        measurement_noise,
    } = settings;
    let gt = cfg.gamma_t()?;
    let p = cfg.gw_params(gt)?;
    let eps = cfg.noise.epsilon;
    let jitter = Normal::new(0.0, measurement_noise).map_err(|e| CliError::Config(e.to_string()))?;

    let per_phase = (0..phases)
        .into_par_iter()
        .map(|k| -> Result<(f64, [f64; 5]), CliError> {
            let phi = 2.0 * PI * k as f64 / phases as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let sweep = betas
                .iter()
                .map(|&b| {
                    let lo = LocalOscillator64::new(b, phi, eps, 0.0)?;
                    let exact = delta_g2_terms(&p, &lo, gt).total;
                    Ok((b, exact * (1.0 + jitter.sample(&mut rng))))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok((phi, separate_terms_by_beta(&sweep)?))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let dg0 = per_phase.iter().map(|(_, c)| c[0]).sum::<f64>() / phases as f64;
    let sweep: Vec<(f64, f64, f64)> = per_phase
        .iter()
        .map(|(phi, c)| (*phi, c[1] * beta, c[2] * beta * beta))
        .collect();
    let rec = reconstruct_gaussian(&sweep, gt, beta, dg0)?;

    let phi_max = 0.5 * (p.theta + PI);
    let var_max = quadrature_variance_normal(&p, phi_max);
    let s2 = gt.sin().powi(2);
    let snr_at = |b: f64| -> Result<Value, CliError> {
        let lo = LocalOscillator64::new(b, phi_max, eps, 0.0)?;
        Ok(snr_quadrature(&p, &lo, gt)?.map_or(Value::Null, |v| json!(v)))
    };
    let matched_beta = (var_max > 0.0).then(|| (s2 * var_max).sqrt());
    let matched_snr = match matched_beta {
        Some(b) => snr_at(b)?,
        None => Value::Null,
    };

    let truth_theta = wrap_angle(p.theta);
    let rec_theta = rec.theta.map(wrap_angle);
    let theta_err = rec_theta.map(|t| {
        let d = (t - truth_theta).abs();
        relative(truth_theta, truth_theta + d.min(2.0 * PI - d))
    });
    let alpha_err = rec.alpha_mag.map(|a| relative(p.alpha.norm(), a));
    let report = json!({
        "gamma_t": gt,
        "epsilon": eps,
        "seed": seed,
        "phases": phases,
        "beta": beta,
        "betas": betas,
        "measurement_noise": measurement_noise,
        "true": {
            "alpha_re": p.alpha.re,
            "alpha_im": p.alpha.im,
            "alpha_mag": p.alpha.norm(),
            "r": p.r,
            "theta": truth_theta,
            "nbar": p.nbar,
        },
        "recovered": {
            "alpha_re": rec.alpha.map(|a| a.re),
            "alpha_im": rec.alpha.map(|a| a.im),
            "alpha_mag": rec.alpha_mag,
            "r": rec.r,
            "theta": rec_theta,
            "nbar": rec.nbar,
            "theta_identifiable": rec.theta.is_some(),
        },
        "relative_error": {
            "alpha_mag": alpha_err,
            "r": relative(p.r, rec.r),
            "theta": theta_err,
            "nbar": relative(p.nbar, rec.nbar),
        },
        "residual": rec.residual,
        "snr": {
            "phi": phi_max,
            "at_beta": snr_at(beta)?,
            "matched_beta": matched_beta,
            "matched": matched_snr,
            "one_over_four_epsilon": if eps > 0.0 { json!(1.0 / (4.0 * eps)) } else { Value::Null },
        },
    });

    let mut table = Table::new(vec!["quantity".into(), "value".into()]);
    flatten(&report, String::new(), &mut table);
    Ok(Output {
        table,
        report: Some(report),
        failures: 0,
    })
}

fn flatten(v: &Value, prefix: String, out: &mut Table) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(x, key, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(x, format!("{prefix}[{i}]"), out);
            }
        }
        Value::Number(n) => out.rows.push(vec![prefix.as_str().into(), n.as_f64().into()]),
        Value::Bool(b) => out.rows.push(vec![prefix.as_str().into(), (*b).into()]),
        Value::String(s) => out.rows.push(vec![prefix.as_str().into(), s.as_str().into()]),
        Value::Null => out.rows.push(vec![prefix.as_str().into(), Cell::Missing]),
    }
}

/// Coupling, graviton number and noise margins in SI units.
pub fn physical(cfg: &ScenarioConfig) -> Result<Output, CliError> {
    let k = PhysicalConstants::si();
    let points = cfg.grid()?;
    let mut table = Table::new(columns(
        &cfg.axis_names(),
        &[
            "gamma_g",
            "gamma_t",
            "n_grav",
            "signal_phonons",
            "gamma_th",
            "n_th",
            "heating_margin",
            "occupation_margin",
            "heating_ok",
            "occupation_ok",
        ],
    ));
    let rows = points
        .par_iter()
        .map(|(vals, c)| -> Result<Vec<Cell>, CliError> {
            let d = c
                .detector
                .ok_or_else(|| CliError::Config("physical needs a detector section".into()))?;
            let h = c
                .h_strain
                .ok_or_else(|| CliError::Config("physical needs h_strain".into()))?;
            let det = d.detector();
            let gamma_g = coupling_gamma(&k, &det, d.nu)?;
            let gt = gamma_g * d.t;
            let n_grav = graviton_flux(&k, h, d.nu)?;
            let th = noise_thresholds(&k, &det, d.nu, gt, n_grav)?;
            let mut row = axis_cells(vals);
            row.extend([
                gamma_g.into(),
                gt.into(),
                n_grav.into(),
                th.signal_phonons.into(),
                th.gamma_th.into(),
                th.n_th.into(),
                th.heating_margin.into(),
                th.occupation_margin.into(),
                th.heating_ok.into(),
                th.occupation_ok.into(),
            ]);
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    table.rows = rows;
    Ok(Output::table(table))
}

struct CheckRow {
    check: &'static str,
    case: String,
    diff: f64,
    tolerance: Option<f64>,
}

fn default_cases() -> Vec<(String, GwSignalParams64, f64)> {
    let mk = |a: Complex64, r, th, nb| GwSignalParams64::new(a, r, th, nb).expect("valid built-in case");
    vec![
        ("coherent".into(), mk(Complex64::new(1.1, 0.3), 0.0, 0.0, 0.0), 0.6),
        ("thermal".into(), mk(Complex64::new(0.0, 0.0), 0.0, 0.0, 0.8), 0.4),
        (
            "squeezed_vacuum".into(),
            mk(Complex64::new(0.0, 0.0), 0.6, 0.4, 0.0),
            0.9,
        ),
        (
            "displaced_squeezed_thermal".into(),
            mk(Complex64::new(0.8, -0.3), 0.4, 1.1, 0.3),
            0.7,
        ),
        (
            "real_alpha_squeezed_thermal".into(),
            mk(Complex64::new(1.2, 0.0), 0.5, 0.6, 0.3),
            0.8,
        ),
    ]
}

/// Flips the sign of `M` when the named check is the fault target.
fn pipeline_params(p: &GwSignalParams64, check: &str, fault: Option<&str>) -> GwSignalParams64 {
    if fault == Some(check) {
        GwSignalParams64 {
            theta: p.theta + PI,
            ..*p
        }
    } else {
        *p
    }
}

fn run_checks(label: &str, p: &GwSignalParams64, gt: f64, fault: Option<&str>) -> Result<Vec<CheckRow>, CliError> {
    let mut rows = Vec::new();
    let mut push = |check, diff: f64, tolerance| {
        rows.push(CheckRow {
            check,
            case: label.to_string(),
            diff,
            tolerance,
        })
    };

    let bar_state = oracle_bar_state(p, gt, None)?;
    if bar_state.tail_mass() > TAIL_TOLERANCE {
        return Err(CliError::Numerical(format!(
            "oracle truncation invalid for case {label}"
        )));
    }
    let oracle_p = bar_state.populations();

    let q = pipeline_params(p, "hafnian_vs_generating", fault);
    let bar_h = LadderMoments64::detector_after_swap(&q, gt);
    let bar_g = LadderMoments64::detector_after_swap(p, gt);
    let mut d = 0.0f64;
    for n in 0..=5 {
        d = d.max((prob_n_hafnian(&bar_h, n)? - prob_n_generating(&bar_g, n)?).abs());
    }
    push("hafnian_vs_generating", d, Some(1e-10));

    let q = pipeline_params(p, "generating_vs_oracle", fault);
    let bar = LadderMoments64::detector_after_swap(&q, gt);
    let mut d = 0.0f64;
    for (n, o) in oracle_p.iter().take(6).enumerate() {
        d = d.max((prob_n_generating(&bar, n)? - o).abs());
    }
    push("generating_vs_oracle", d, Some(1e-8));

    let q = pipeline_params(p, "closed_form_p012_vs_oracle", fault);
    let (p0, p1, p2) = closed_form_p012_variant(&q, gt, ClosedFormVariant::Consistent)?;
    let d = (p0 - oracle_p[0])
        .abs()
        .max((p1 - oracle_p[1]).abs())
        .max((p2 - oracle_p[2]).abs());
    push("closed_form_p012_vs_oracle", d, Some(1e-9));
    let (p0, p1, p2) = closed_form_p012_variant(p, gt, ClosedFormVariant::ShiftedDenominator)?;
    let d = (p0 - oracle_p[0])
        .abs()
        .max((p1 - oracle_p[1]).abs())
        .max((p2 - oracle_p[2]).abs());
    push("shifted_denominator_p012_vs_oracle", d, None);

    if p.n_grav() > 0.0 {
        let oracle_g2 = oracle_moments_and_g2(p, gt, None)?.g2;
        let q = pipeline_params(p, "g2_ideal_vs_oracle", fault);
        let g = g2_ideal(&q)?.g2.unwrap_or(f64::NAN);
        push("g2_ideal_vs_oracle", (g - oracle_g2).abs(), Some(1e-9));
        if p.alpha.im == 0.0 {
            let q = pipeline_params(p, "cos_theta_g2_vs_oracle", fault);
            push(
                "cos_theta_g2_vs_oracle",
                (g2_cos_theta_form(&q) - oracle_g2).abs(),
                Some(1e-9),
            );
            push("sin2theta_g2_vs_oracle", (g2_sin2theta_form(p) - oracle_g2).abs(), None);
        }
    }

    // oracle beamsplitter frame: ā_bar = −i sinγt ā_gw
    let q = pipeline_params(p, "normal_moments_vs_oracle", fault);
    let s = gt.sin();
    let (nf, mf) = q.fluctuation_moments();
    let lm = LadderMoments64::single_mode(s * s * nf, -mf * (s * s), Complex64::new(0.0, -s) * q.alpha);
    let mut d = 0.0f64;
    for k in 0..=4usize {
        for l in 0..=(4 - k) {
            let exact = bar_state.normal_moment(k, l)?;
            let scale = 1.0 + bar_state.normal_moment(k, k)?.re.abs() + bar_state.normal_moment(l, l)?.re.abs();
            d = d.max((s_ordered_moment(&lm, &MomentRequest::normal(k, l)?)? - exact).norm() / scale);
        }
    }
    push("normal_moments_vs_oracle", d, Some(1e-8));
    Ok(rows)
}

/// Cross-checks every analytic route against the Fock oracle.
pub fn oracle_check(cfg: Option<&ScenarioConfig>) -> Result<Output, CliError> {
    let mut cases = default_cases();
    let fault = cfg.and_then(|c| c.inject_fault.clone());
    if let Some(c) = cfg.filter(|c| c.gw.is_some()) {
        for (i, (_, pc)) in c.grid()?.into_iter().enumerate() {
            let gt = pc.gamma_t()?;
            cases.push((format!("config[{i}]"), pc.gw_params(gt)?, gt));
        }
    }
    let results = cases
        .par_iter()
        .map(|(label, p, gt)| run_checks(label, p, *gt, fault.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(
        ["check", "case", "max_diff", "tolerance", "status"]
            .map(String::from)
            .to_vec(),
    );
    let mut failures = 0;
    for row in results.into_iter().flatten() {
        let status = match row.tolerance {
            None => "info",
            Some(tol) if row.diff <= tol => "pass",
            Some(_) => {
                failures += 1;
                "fail"
            }
        };
        table.rows.push(vec![
            row.check.into(),
            row.case.as_str().into(),
            row.diff.into(),
            row.tolerance.into(),
            status.into(),
        ]);
    }
    Ok(Output {
        table,
        report: None,
        failures,
    })
}
