//! Sweeps behind the CLI subcommands. Points run in parallel; rows are
//! collected in sweep order so output never depends on scheduling.

use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{Config, HarnessResult};
use super::report::{RunReport, Table};
use crate::bench::{
    apply_sagnac_cnot, filters_for_ratio, misalign_lower, prepare_beam, project_pbs3, recombine_bs2,
    tilt_to_phase, BenchConfig, FilterSetting, PayloadSpec, RecombinationJitter, DARK_FLOOR,
};
use crate::cebit::{
    correction_for, fidelity, prepare_input, project_ca, teleport_transform, BellOutcome, PayloadCoeffs,
};
use crate::error::{Error, Result};
use crate::field::{overlap, GridSpec, ModeBasis, ScalarField};
use crate::measure::{
    correlate_2f, decompose_frames, design_cgh, measure_angle_frames, render_ccd, Hologram, MeasurementResult,
    NoiseModel,
};
use crate::rng::{stream_rng, Stream};
use crate::scalar::wrap_phase;

type FrameFn = Box<dyn Fn(u64) -> Result<ScalarField<f64>> + Sync>;

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// File-name friendly number: `2.5 -> 2p5`, `47 -> 47`.
fn tag(v: f64) -> String {
    num(v).replace('.', "p").replace('-', "m")
}

fn status<T>(r: &Result<T>) -> (String, String) {
    match r {
        Ok(_) => ("ok".into(), String::new()),
        Err(e) => ("error".into(), e.to_string()),
    }
}

/// Projected mode for each frame. Without jitter the mode is computed once;
/// with jitter every frame redraws the lower-arm misalignment from the
/// `(seed, frame)` stream, so all sweep points share the same draws.
pub fn frame_source(bench: &BenchConfig<f64>, jitter: RecombinationJitter, seed: u64) -> Result<FrameFn> {
    let outcome = bench.outcome;
    let pre = apply_sagnac_cnot(&prepare_beam(bench)?);
    let waist = bench.grid.waist();
    let project = move |beam| {
        let p = project_pbs3(&beam, outcome);
        if p.is_dark() {
            Err(Error::DarkBeam)
        } else {
            Ok(p.field)
        }
    };
    if jitter.is_off() {
        let m = project(recombine_bs2(&pre))?;
        return Ok(Box::new(move |_| Ok(m.clone())));
    }
    Ok(Box::new(move |frame| {
        let mis = jitter.sample(waist, seed, frame);
        project(recombine_bs2(&misalign_lower(&pre, &mis)))
    }))
}

fn outcome_or_default(cfg: &Config) -> BellOutcome {
    cfg.outcome.unwrap_or_default()
}

fn ratio_bench(cfg: &Config, grid: GridSpec<f64>, ratio: f64) -> Result<BenchConfig<f64>> {
    let (alpha, beta) = filters_for_ratio(ratio)?;
    let mut b = BenchConfig::new(PayloadSpec::Filters { alpha, beta }, grid).with_outcome(outcome_or_default(cfg));
    b.wavelength = cfg.wavelength;
    Ok(b)
}

/// Payload described by the `payload.*` keys.
pub fn config_payload(cfg: &Config) -> Result<PayloadSpec<f64>> {
    let filter = |t: f64, phase: f64, tilt: Option<f64>| match tilt {
        Some(tilt) => FilterSetting::tilted(t, tilt, cfg.plate()),
        None => FilterSetting::direct(t, phase),
    };
    Ok(PayloadSpec::Filters {
        alpha: filter(cfg.t_alpha, cfg.phase_alpha, cfg.tilt_alpha_deg)?,
        beta: filter(cfg.t_beta, cfg.phase_beta, cfg.tilt_beta_deg)?,
    })
}

fn config_bench(cfg: &Config, outcome: BellOutcome) -> HarnessResult<BenchConfig<f64>> {
    let mut b = BenchConfig::new(config_payload(cfg)?, cfg.grid()?).with_outcome(outcome);
    b.wavelength = cfg.wavelength;
    Ok(b)
}

// ---------------------------------------------------------------- fig. 2

#[derive(Debug, Clone)]
pub struct Fig2Point {
    pub theta_target: f64,
    /// One of the four display angles (as opposed to the dense sweep).
    pub anchor: bool,
    pub result: Result<MeasurementResult<f64>>,
}

impl Fig2Point {
    pub fn ratio_target(&self) -> f64 {
        1.0 / self.theta_target.to_radians().tan()
    }
}

pub fn fig2_points(cfg: &Config) -> HarnessResult<Vec<Fig2Point>> {
    let grid = cfg.grid()?;
    let noise = cfg.noise();
    let opts = cfg.angle_options();
    Ok(cfg
        .fig2_targets()
        .into_par_iter()
        .map(|(theta, anchor)| {
            let result = (|| {
                let ratio = 1.0 / theta.to_radians().tan();
                let frames = frame_source(&ratio_bench(cfg, grid, ratio)?, cfg.jitter(), cfg.seed)?;
                measure_angle_frames(frames, &noise, cfg.frames, &opts)
            })();
            Fig2Point {
                theta_target: theta,
                anchor,
                result,
            }
        })
        .collect())
}

pub fn reproduce_fig2(cfg: &Config) -> HarnessResult<RunReport> {
    let points = fig2_points(cfg)?;
    let mut table = Table::new(
        "fig2",
        &[
            "theta_target",
            "anchor",
            "theta_mean",
            "theta_std",
            "ratio_target",
            "ratio_retrieved",
            "ratio_std",
            "status",
            "error",
        ],
    );
    let mut report = RunReport::default();
    let (mut abs_err, mut n_ok, mut max_anchor, mut max_ratio) = (0.0, 0usize, 0.0f64, 0.0f64);
    for p in &points {
        let (st, err) = status(&p.result);
        let rt = p.ratio_target();
        let (tm, ts, rr, rs) = match &p.result {
            Ok(r) => {
                let th = r.theta_deg.expect("angle pipeline sets theta");
                let e = (th.mean - p.theta_target).abs();
                abs_err += e;
                n_ok += 1;
                if p.anchor {
                    max_anchor = max_anchor.max(e);
                }
                max_ratio = max_ratio.max((r.ratio.mean - rt).abs() / rt);
                (Some(th.mean), Some(th.std), Some(r.ratio.mean), Some(r.ratio.std))
            }
            Err(_) => {
                report.failures += 1;
                (None, None, None, None)
            }
        };
        table.rows.push(vec![
            num(p.theta_target),
            p.anchor.to_string(),
            opt(tm),
            opt(ts),
            num(rt),
            opt(rr),
            opt(rs),
            st.clone(),
            err.clone(),
        ]);
        report.lines.push(match (tm, ts) {
            (Some(m), Some(s)) => format!(
                "fig2 theta*={:.2} theta={m:.3}+-{s:.3} ratio*={rt:.4} ratio={:.4}",
                p.theta_target,
                rr.unwrap_or(f64::NAN)
            ),
            _ => format!("fig2 theta*={:.2} error: {err}", p.theta_target),
        });
    }
    // Inset-style images: frame 0 of each display angle as the camera sees it.
    let grid = cfg.grid()?;
    for p in points.iter().filter(|p| p.anchor) {
        let frames = frame_source(&ratio_bench(cfg, grid, p.ratio_target())?, cfg.jitter(), cfg.seed)?;
        if let Ok(m) = frames(0) {
            let img = render_ccd(&m, &cfg.noise(), 0);
            report.images.push((format!("fig2_theta_{}", tag(p.theta_target)), img.pixels().clone()));
        }
    }
    report.tables.push(table);
    report.summary.push((
        "fig2.mean_abs_angle_error_deg".into(),
        num(if n_ok > 0 { abs_err / n_ok as f64 } else { f64::NAN }),
    ));
    report.summary.push(("fig2.max_anchor_angle_error_deg".into(), num(max_anchor)));
    report.summary.push(("fig2.max_ratio_rel_error".into(), num(max_ratio)));
    Ok(report)
}

// ---------------------------------------------------------------- fig. 3

#[derive(Debug, Clone)]
pub struct Fig3aPoint {
    pub ratio_target: f64,
    pub result: Result<MeasurementResult<f64>>,
}

impl Fig3aPoint {
    /// RMS over frames of the relative ratio error.
    pub fn rel_error(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|r| r.ratio_rms_relative_error(self.ratio_target))
    }
}

#[derive(Debug, Clone)]
pub struct Fig3bPoint {
    pub tilt_deg: f64,
    /// Plate phase before wrapping.
    pub plate_phase: f64,
    /// `arg(beta) - arg(alpha)` written by the filters.
    pub encoded_dphi: f64,
    pub result: Result<MeasurementResult<f64>>,
}

impl Fig3bPoint {
    pub fn retrieved_dphi(&self) -> Option<f64> {
        self.result.as_ref().ok().and_then(|r| r.delta_phi).map(|s| s.mean)
    }

    /// Wrapped retrieval error in degrees.
    pub fn error_deg(&self) -> Option<f64> {
        self.retrieved_dphi().map(|p| wrap_phase(p - self.encoded_dphi).to_degrees())
    }
}

fn fig3a_noise(cfg: &Config) -> (NoiseModel, RecombinationJitter) {
    let mut noise = cfg.noise();
    if let Some(s) = cfg.fig3_sigma {
        noise.gaussian_sigma = s;
    }
    let mut jitter = cfg.jitter();
    if let Some(j) = cfg.fig3_jitter_deg {
        jitter.rotation_rms = j.to_radians();
    }
    (noise, jitter)
}

pub fn fig3a_points(cfg: &Config) -> HarnessResult<Vec<Fig3aPoint>> {
    let grid = cfg.grid()?;
    let h = design_cgh(&grid, true)?;
    let (noise, jitter) = fig3a_noise(cfg);
    Ok(cfg
        .fig3_ratios
        .par_iter()
        .map(|&ratio| Fig3aPoint {
            ratio_target: ratio,
            result: frame_source(&ratio_bench(cfg, grid, ratio).unwrap_or_else(|_| unreachable!()), jitter, cfg.seed)
                .and_then(|frames| decompose_frames(frames, &h, &noise, cfg.frames)),
        })
        .collect())
}

fn tilt_bench(cfg: &Config, grid: GridSpec<f64>, tilt: f64) -> Result<BenchConfig<f64>> {
    let alpha = FilterSetting::tilted(cfg.t_alpha, tilt, cfg.plate())?;
    let beta = FilterSetting::direct(cfg.t_beta, 0.0)?;
    let mut b = BenchConfig::new(PayloadSpec::Filters { alpha, beta }, grid).with_outcome(outcome_or_default(cfg));
    b.wavelength = cfg.wavelength;
    Ok(b)
}

pub fn fig3b_points(cfg: &Config) -> HarnessResult<Vec<Fig3bPoint>> {
    let grid = cfg.grid()?;
    let h = design_cgh(&grid, true)?;
    let noise = cfg.noise();
    Ok(cfg
        .fig3_tilts
        .par_iter()
        .map(|&tilt| {
            let plate_phase =
                tilt_to_phase(tilt, cfg.plate_thickness, cfg.plate_index, cfg.wavelength).unwrap_or(f64::NAN);
            let bench = tilt_bench(cfg, grid, tilt);
            let encoded_dphi = bench
                .as_ref()
                .ok()
                .and_then(|b| b.payload.payload(cfg.wavelength).ok())
                .map(|p| p.delta_phi())
                .unwrap_or(f64::NAN);
            let result = bench
                .and_then(|b| frame_source(&b, cfg.jitter(), cfg.seed))
                .and_then(|frames| decompose_frames(frames, &h, &noise, cfg.frames));
            Fig3bPoint {
                tilt_deg: tilt,
                plate_phase,
                encoded_dphi,
                result,
            }
        })
        .collect())
}

pub fn reproduce_fig3(cfg: &Config) -> HarnessResult<RunReport> {
    let mut report = RunReport::default();

    let a = fig3a_points(cfg)?;
    let mut ta = Table::new(
        "fig3a",
        &[
            "ratio_target",
            "ratio_mean",
            "ratio_std",
            "rel_error_rms",
            "rel_error_of_mean",
            "abs_alpha",
            "abs_beta",
            "status",
            "error",
        ],
    );
    let mut max_rel = 0.0f64;
    let mut errs = Vec::new();
    for p in &a {
        let (st, err) = status(&p.result);
        let r = p.result.as_ref().ok();
        let rel = p.rel_error();
        if let Some(e) = rel {
            max_rel = max_rel.max(e);
            errs.push(e);
        } else {
            report.failures += 1;
        }
        ta.rows.push(vec![
            num(p.ratio_target),
            opt(r.map(|r| r.ratio.mean)),
            opt(r.map(|r| r.ratio.std)),
            opt(rel),
            opt(r.map(|r| (r.ratio.mean - p.ratio_target).abs() / p.ratio_target)),
            opt(r.map(|r| r.abs_alpha.mean)),
            opt(r.map(|r| r.abs_beta.mean)),
            st,
            err.clone(),
        ]);
        report.lines.push(match r {
            Some(r) => format!(
                "fig3a ratio*={} ratio={:.5}+-{:.5} rel_err={:.3e}",
                p.ratio_target,
                r.ratio.mean,
                r.ratio.std,
                rel.unwrap_or(f64::NAN)
            ),
            None => format!("fig3a ratio*={} error: {err}", p.ratio_target),
        });
    }
    report.tables.push(ta);
    let mut sorted: Vec<(f64, Option<f64>)> = a.iter().map(|p| (p.ratio_target, p.rel_error())).collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let monotone = sorted.iter().all(|p| p.1.is_some()) && sorted.windows(2).all(|w| w[1].1 >= w[0].1);
    report.summary.push(("fig3a.max_ratio_rel_error".into(), num(max_rel)));
    report.summary.push(("fig3a.error_nondecreasing".into(), monotone.to_string()));

    let b = fig3b_points(cfg)?;
    let mut tb = Table::new(
        "fig3b",
        &[
            "tilt_deg",
            "plate_phase_rad",
            "encoded_dphi_rad",
            "retrieved_dphi_rad",
            "dphi_std_rad",
            "error_deg",
            "status",
            "error",
        ],
    );
    let mut max_phase = 0.0f64;
    let grid = cfg.grid()?;
    for p in &b {
        let (st, mut err) = status(&p.result);
        let e = p.error_deg();
        match e {
            Some(e) => max_phase = max_phase.max(e.abs()),
            None => {
                report.failures += 1;
                if err.is_empty() {
                    err = Error::PhaseUndefined.to_string();
                }
            }
        }
        let std = p.result.as_ref().ok().and_then(|r| r.delta_phi).map(|s| s.std);
        tb.rows.push(vec![
            num(p.tilt_deg),
            num(p.plate_phase),
            num(p.encoded_dphi),
            opt(p.retrieved_dphi()),
            opt(std),
            opt(e),
            if e.is_some() { st } else { "error".into() },
            err.clone(),
        ]);
        report.lines.push(match e {
            Some(e) => format!(
                "fig3b tilt={} dphi*={:.5} dphi={:.5} err={e:.3}deg",
                p.tilt_deg,
                p.encoded_dphi,
                p.retrieved_dphi().unwrap_or(f64::NAN)
            ),
            None => format!("fig3b tilt={} error: {err}", p.tilt_deg),
        });
        if let Ok(frames) = tilt_bench(cfg, grid, p.tilt_deg).and_then(|bc| frame_source(&bc, cfg.jitter(), cfg.seed)) {
            if let Ok(m) = frames(0) {
                let img = render_ccd(&m, &cfg.noise(), 0);
                report.images.push((format!("fig3b_tilt_{}", tag(p.tilt_deg)), img.pixels().clone()));
            }
        }
    }
    report.tables.push(tb);
    report.summary.push(("fig3b.max_phase_error_deg".into(), num(max_phase)));
    Ok(report)
}

// ---------------------------------------------------------------- suite

/// Haar-random payload `index` of the stream for `seed`.
pub fn random_payload(seed: u64, index: u64) -> PayloadCoeffs<f64> {
    let mut rng = stream_rng(seed, Stream::Payloads, index);
    loop {
        let mut d = || -> f64 { StandardNormal.sample(&mut rng) };
        let (a, b) = (Complex::new(d(), d()), Complex::new(d(), d()));
        if let Ok(p) = PayloadCoeffs::new(a, b) {
            return p;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbstractRun {
    pub probability: f64,
    pub fidelity: f64,
}

/// Gate-level protocol for one payload and outcome, correction included.
pub fn abstract_run(p: &PayloadCoeffs<f64>, o: BellOutcome) -> Result<AbstractRun> {
    let proj = project_ca(&teleport_transform(&prepare_input(p)), o);
    let b = proj.b_state.ok_or(Error::DarkBeam)?;
    Ok(AbstractRun {
        probability: proj.probability,
        fidelity: fidelity(&correction_for(o).apply(b), p)?,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub index: u64,
    pub outcome: BellOutcome,
    pub payload: PayloadCoeffs<f64>,
    pub abstract_run: Result<AbstractRun>,
    pub optical: Result<AbstractRun>,
    /// `1 - fidelity` of the payload rebuilt from the CFM readings.
    pub cfm_infidelity: Result<f64>,
}

/// Bench, decode by overlap with the mode pair, then correct.
pub fn optical_run(
    p: &PayloadCoeffs<f64>,
    o: BellOutcome,
    grid: GridSpec<f64>,
    basis: &ModeBasis<f64>,
) -> Result<(AbstractRun, ScalarField<f64>)> {
    let bench = BenchConfig::new(PayloadSpec::Coeffs(*p), grid).with_outcome(o);
    let pre = apply_sagnac_cnot(&prepare_beam(&bench)?);
    let proj = project_pbs3(&recombine_bs2(&pre), o);
    if proj.power < DARK_FLOOR {
        return Err(Error::DarkBeam);
    }
    let b = [overlap(basis.mode(0), &proj.field)?, overlap(basis.mode(1), &proj.field)?];
    let run = AbstractRun {
        probability: proj.power,
        fidelity: fidelity(&correction_for(o).apply(b), p)?,
    };
    Ok((run, proj.field))
}

fn cfm_infidelity(
    m: &ScalarField<f64>,
    p: &PayloadCoeffs<f64>,
    o: BellOutcome,
    h: &Hologram<f64>,
    noise: &NoiseModel,
) -> Result<f64> {
    let r = decompose_frames(|_| Ok(m.clone()), h, noise, 1)?;
    let dphi = r.delta_phi.map(|s| s.mean).unwrap_or(0.0);
    let v = [
        Complex::new(r.abs_alpha.mean, 0.0),
        Complex::from_polar(r.abs_beta.mean, dphi),
    ];
    Ok(1.0 - fidelity(&correction_for(o).apply(v), p)?)
}

pub fn suite_rows(cfg: &Config) -> HarnessResult<Vec<SuiteRow>> {
    let grid = cfg.grid()?;
    let basis = ModeBasis::new(&grid)?;
    let h = design_cgh(&grid, true)?;
    let outcomes: Vec<BellOutcome> = match cfg.outcome {
        Some(o) => vec![o],
        None => BellOutcome::ALL.to_vec(),
    };
    let jobs: Vec<(u64, BellOutcome)> = (0..cfg.suite_n as u64)
        .flat_map(|i| outcomes.iter().map(move |&o| (i, o)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(index, outcome)| {
            let payload = random_payload(cfg.seed, index);
            let optical = optical_run(&payload, outcome, grid, &basis);
            let noise = NoiseModel {
                seed: cfg.seed.wrapping_add(4 * index + outcome.c() as u64 * 2 + outcome.a() as u64),
                ..cfg.noise()
            };
            let cfm = match &optical {
                Ok((_, m)) => cfm_infidelity(m, &payload, outcome, &h, &noise),
                Err(e) => Err(e.clone()),
            };
            SuiteRow {
                index,
                outcome,
                payload,
                abstract_run: abstract_run(&payload, outcome),
                optical: optical.map(|(r, _)| r),
                cfm_infidelity: cfm,
            }
        })
        .collect())
}

pub fn run_random_suite(cfg: &Config) -> HarnessResult<RunReport> {
    let rows = suite_rows(cfg)?;
    let mut t = Table::new(
        "random_suite",
        &[
            "index",
            "outcome",
            "correction",
            "alpha_re",
            "alpha_im",
            "beta_re",
            "beta_im",
            "probability_abstract",
            "probability_optical",
            "fidelity_abstract",
            "fidelity_optical",
            "cfm_infidelity",
            "status",
            "error",
        ],
    );
    let mut report = RunReport::default();
    let (mut min_fa, mut min_fo, mut max_cfm, mut sum_cfm, mut n_cfm, mut max_dp) =
        (f64::INFINITY, f64::INFINITY, 0.0f64, 0.0, 0usize, 0.0f64);
    for r in &rows {
        let a = r.abstract_run.as_ref().ok();
        let o = r.optical.as_ref().ok();
        let c = r.cfm_infidelity.as_ref().ok().copied();
        if let Some(a) = a {
            min_fa = min_fa.min(a.fidelity);
            max_dp = max_dp.max((a.probability - 0.25).abs());
        }
        if let Some(o) = o {
            min_fo = min_fo.min(o.fidelity);
        }
        if let Some(c) = c {
            max_cfm = max_cfm.max(c);
            sum_cfm += c;
            n_cfm += 1;
        }
        let first_err = [
            r.abstract_run.as_ref().err(),
            r.optical.as_ref().err(),
            r.cfm_infidelity.as_ref().err(),
        ]
        .into_iter()
        .flatten()
        .next();
        if first_err.is_some() {
            report.failures += 1;
        }
        t.rows.push(vec![
            r.index.to_string(),
            r.outcome.to_string(),
            correction_for::<f64>(r.outcome).label.to_string(),
            num(r.payload.alpha().re),
            num(r.payload.alpha().im),
            num(r.payload.beta().re),
            num(r.payload.beta().im),
            opt(a.map(|a| a.probability)),
            opt(o.map(|o| o.probability)),
            opt(a.map(|a| a.fidelity)),
            opt(o.map(|o| o.fidelity)),
            opt(c),
            if first_err.is_some() { "error".into() } else { "ok".into() },
            first_err.map(|e| e.to_string()).unwrap_or_default(),
        ]);
    }
    report.lines.push(format!(
        "random-suite n={} rows={} min_fidelity_abstract={min_fa:.15} min_fidelity_optical={min_fo:.12} max_cfm_infidelity={max_cfm:.3e}",
        cfg.suite_n,
        rows.len()
    ));
    report.tables.push(t);
    report.summary.extend([
        ("suite.min_fidelity_abstract".to_string(), num(min_fa)),
        ("suite.min_fidelity_optical".to_string(), num(min_fo)),
        ("suite.max_probability_deviation".to_string(), num(max_dp)),
        ("suite.max_cfm_infidelity".to_string(), num(max_cfm)),
        (
            "suite.mean_cfm_infidelity".to_string(),
            num(if n_cfm > 0 { sum_cfm / n_cfm as f64 } else { f64::NAN }),
        ),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------- singles

pub fn run_teleport(cfg: &Config) -> HarnessResult<RunReport> {
    let outcomes: Vec<BellOutcome> = match cfg.outcome {
        Some(o) => vec![o],
        None => BellOutcome::ALL.to_vec(),
    };
    let payload = config_payload(cfg)?.payload(cfg.wavelength)?;
    let grid = cfg.grid()?;
    let basis = ModeBasis::new(&grid)?;
    let mut t = Table::new(
        "teleport",
        &[
            "outcome",
            "correction",
            "ratio_encoded",
            "dphi_encoded_rad",
            "probability_abstract",
            "probability_optical",
            "fidelity_abstract",
            "fidelity_optical",
            "status",
            "error",
        ],
    );
    let mut report = RunReport::default();
    let mut min_f = f64::INFINITY;
    for o in outcomes {
        let a = abstract_run(&payload, o);
        let opt_run = optical_run(&payload, o, grid, &basis);
        let err = a.as_ref().err().or(opt_run.as_ref().err()).map(|e| e.to_string());
        if err.is_some() {
            report.failures += 1;
        }
        let a = a.ok();
        if let Some(a) = a {
            min_f = min_f.min(a.fidelity);
        }
        let (o_run, m) = match opt_run {
            Ok((r, m)) => (Some(r), Some(m)),
            Err(_) => (None, None),
        };
        if let Some(r) = o_run {
            min_f = min_f.min(r.fidelity);
        }
        if let Some(m) = m {
            report.images.push((format!("teleport_mode_{o}"), m.intensity()));
        }
        report.lines.push(format!(
            "teleport outcome={o} correction={} fidelity_abstract={} fidelity_optical={}",
            correction_for::<f64>(o).label,
            opt(a.map(|a| a.fidelity)),
            opt(o_run.map(|r| r.fidelity))
        ));
        t.rows.push(vec![
            o.to_string(),
            correction_for::<f64>(o).label.to_string(),
            num(payload.ratio()),
            num(payload.delta_phi()),
            opt(a.map(|a| a.probability)),
            opt(o_run.map(|r| r.probability)),
            opt(a.map(|a| a.fidelity)),
            opt(o_run.map(|r| r.fidelity)),
            if err.is_some() { "error".into() } else { "ok".into() },
            err.unwrap_or_default(),
        ]);
    }
    report.tables.push(t);
    report.summary.push(("teleport.min_fidelity".into(), num(min_f)));
    Ok(report)
}

fn measurement_table(name: &str, lead: &[&str]) -> Table {
    let mut header: Vec<&str> = lead.to_vec();
    header.extend(MeasurementResult::<f64>::CSV_HEADER);
    header.extend(["status", "error"]);
    Table::new(name, &header)
}

fn measurement_row(lead: Vec<String>, r: &Result<MeasurementResult<f64>>) -> Vec<String> {
    let mut row = lead;
    match r {
        Ok(m) => {
            row.extend(m.csv_record());
            row.extend(["ok".to_string(), String::new()]);
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), MeasurementResult::<f64>::CSV_HEADER.len()));
            row.extend(["error".to_string(), e.to_string()]);
        }
    }
    row
}

pub fn run_angle(cfg: &Config) -> HarnessResult<RunReport> {
    let o = outcome_or_default(cfg);
    let bench = config_bench(cfg, o)?;
    let payload = bench.payload.payload(cfg.wavelength)?;
    let frames = frame_source(&bench, cfg.jitter(), cfg.seed)?;
    let first = frames(0);
    let result = measure_angle_frames(frames, &cfg.noise(), cfg.frames, &cfg.angle_options());
    let theta_expected = payload.alpha().norm().atan2(payload.beta().norm()).to_degrees();
    let mut t = measurement_table("angle", &["outcome", "ratio_encoded", "theta_expected_deg"]);
    t.rows.push(measurement_row(
        vec![o.to_string(), num(payload.ratio()), num(theta_expected)],
        &result,
    ));
    let mut report = RunReport::default();
    report.lines.push(match &result {
        Ok(r) => {
            let th = r.theta_deg.expect("angle pipeline sets theta");
            format!(
                "angle outcome={o} theta*={theta_expected:.3} theta={:.3}+-{:.3} ratio={:.5}",
                th.mean, th.std, r.ratio.mean
            )
        }
        Err(e) => {
            report.failures += 1;
            format!("angle outcome={o} error: {e}")
        }
    });
    if let Ok(m) = first {
        report.images.push(("angle_camera".into(), render_ccd(&m, &cfg.noise(), 0).pixels().clone()));
    }
    report.tables.push(t);
    Ok(report)
}

pub fn run_decompose(cfg: &Config) -> HarnessResult<RunReport> {
    let o = outcome_or_default(cfg);
    let bench = config_bench(cfg, o)?;
    let payload = bench.payload.payload(cfg.wavelength)?;
    let h = design_cgh(&bench.grid, true)?;
    let frames = frame_source(&bench, cfg.jitter(), cfg.seed)?;
    let first = frames(0);
    let result = decompose_frames(frames, &h, &cfg.noise(), cfg.frames);
    let payload_fidelity = result.as_ref().ok().and_then(|r| {
        let v = [
            Complex::new(r.abs_alpha.mean, 0.0),
            Complex::from_polar(r.abs_beta.mean, r.delta_phi.map(|s| s.mean).unwrap_or(0.0)),
        ];
        fidelity(&correction_for(o).apply(v), &payload).ok()
    });
    let mut t = measurement_table(
        "decompose",
        &["outcome", "ratio_encoded", "dphi_encoded_rad", "payload_fidelity"],
    );
    t.rows.push(measurement_row(
        vec![
            o.to_string(),
            num(payload.ratio()),
            num(payload.delta_phi()),
            opt(payload_fidelity),
        ],
        &result,
    ));
    let mut report = RunReport::default();
    report.lines.push(match &result {
        Ok(r) => format!(
            "decompose outcome={o} |alpha|={:.5} |beta|={:.5} dphi={} payload_fidelity={}",
            r.abs_alpha.mean,
            r.abs_beta.mean,
            opt(r.delta_phi.map(|s| s.mean)),
            opt(payload_fidelity)
        ),
        Err(e) => {
            report.failures += 1;
            format!("decompose outcome={o} error: {e}")
        }
    });
    if let Ok(m) = first {
        report.images.push(("decompose_mode".into(), m.intensity()));
        if let Ok(c) = correlate_2f(&m, &h) {
            report.images.push(("decompose_focal".into(), c.focal_image().pixels().clone()));
        }
    }
    report.tables.push(t);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Config {
        Config {
            grid_n: 128,
            frames: 3,
            ..Config::default()
        }
    }

    #[test]
    fn abstract_suite_is_exact() {
        for i in 0..50 {
            let p = random_payload(7, i);
            for o in BellOutcome::ALL {
                let r = abstract_run(&p, o).unwrap();
                assert!((r.probability - 0.25).abs() < 1e-12);
                assert!(r.fidelity > 1.0 - 1e-12);
            }
        }
        assert_eq!(random_payload(7, 3), random_payload(7, 3));
        assert_ne!(random_payload(7, 3), random_payload(8, 3));
    }

    #[test]
    fn suite_report_shape() {
        let cfg = Config {
            suite_n: 3,
            noise_sigma: 0.0,
            ..small()
        };
        let r = run_random_suite(&cfg).unwrap();
        let t = r.table("random_suite").unwrap();
        assert_eq!(t.rows.len(), 12);
        assert_eq!(r.failures, 0);
        let fo: f64 = r.summary_value("suite.min_fidelity_optical").unwrap().parse().unwrap();
        assert!(fo > 1.0 - 1e-9);
        let cfm: f64 = r.summary_value("suite.max_cfm_infidelity").unwrap().parse().unwrap();
        assert!(cfm < 1e-6);
    }

    #[test]
    fn fig2_records_failures_without_dropping_points() {
        let cfg = Config {
            fig2_angles: vec![45.0],
            fig2_dense: (30.0, 60.0, 15.0),
            angle_threshold: 0.999,
            noise_sigma: 0.0,
            ..small()
        };
        let r = reproduce_fig2(&cfg).unwrap();
        let t = r.table("fig2").unwrap();
        assert_eq!(t.rows.len(), 3);
        let st = t.column("status").unwrap();
        assert_eq!(r.failures, t.rows.iter().filter(|row| row[st] == "error").count());
    }

    #[test]
    fn singles_run() {
        let cfg = Config {
            t_beta: 0.5,
            phase_beta: 0.7,
            noise_sigma: 0.0,
            ..small()
        };
        let t = run_teleport(&cfg).unwrap();
        assert_eq!(t.table("teleport").unwrap().rows.len(), 4);
        let d = run_decompose(&cfg).unwrap();
        let row = &d.table("decompose").unwrap().rows[0];
        let f: f64 = row[3].parse().unwrap();
        assert!(f > 1.0 - 1e-9, "{row:?}");
        let a = run_angle(&cfg).unwrap();
        assert_eq!(a.failures, 0);
    }
}
