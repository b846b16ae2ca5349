//! Subcommand orchestration: wires the simulator, detector, fits, and
//! resonance numerics into deterministic file-producing runs.

use crate::analysis::{
    compare_counting_to_born, detect_dark_periods, fit_lifetime, lifetime_width_report,
    survival_curve, AnalysisError, DwellEnsemble, FitResult, SurvivalCurve,
};
use crate::config::{ConfigError, Mode, RunConfig};
use crate::csvio::{self, CsvError, PairingRow};
use crate::grid::{EnergyGrid, GridError, SampledWaveFunction};
use crate::hardy::{
    fourier_support_profile, hardy_classify, semigroup_multiplier, Guard, HardyClass, HardyError,
};
use crate::jump::{simulate_trajectory, SimError};
use crate::rational::{RationalError, RationalTestFunction};
use crate::resonance::{cauchy_pairing, evolved_pairing, gamow_density, ResonanceError};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: CsvError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for validation problems, 2 for runtime or numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::MissingInput(_) => 1,
            _ => 2,
        }
    }
}

/// Artifacts written by a run plus any advisory warnings.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn write_artifact(
    out: &mut RunOutcome,
    dir: &Path,
    name: &str,
    content: &str,
) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    out.artifacts.push(path);
    Ok(())
}

fn read_input(path: &Path) -> Result<String, RunError> {
    if !path.exists() {
        return Err(RunError::MissingInput(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl FnOnce(CsvError) -> RunError + '_ {
    move |source| RunError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Execute one pipeline stage, writing its artifacts under `out_dir`.
/// Output is a pure function of the configuration: identical configs give
/// byte-identical files.
pub fn run_subcommand(mode: Mode, cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    cfg.validated_for(mode)?;
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut out = RunOutcome::default();
    match mode {
        Mode::Simulate => run_simulate(cfg, out_dir, &mut out)?,
        Mode::Detect => run_detect(cfg, out_dir, &mut out)?,
        Mode::Survival => run_survival(cfg, out_dir, &mut out)?,
        Mode::Fit => run_fit(cfg, out_dir, &mut out)?,
        Mode::Gamow => run_gamow(cfg, out_dir, &mut out)?,
        Mode::Hardy => run_hardy(cfg, out_dir, &mut out)?,
        Mode::Report => run_report(cfg, out_dir, &mut out)?,
    }
    Ok(out)
}

fn run_simulate(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let scheme = cfg.level_scheme()?;
    let traj = cfg.trajectory_config()?;
    out.warnings.extend(traj.warnings(&scheme));
    let (trace, records) = simulate_trajectory(&scheme, &traj)?;
    write_artifact(out, dir, "trace.csv", &csvio::write_trace(&trace))?;
    write_artifact(out, dir, "jumps.csv", &csvio::write_jumps(&records))?;
    Ok(())
}

fn run_detect(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let path = cfg.io_trace.as_ref().expect("validated");
    let trace = csvio::read_trace(&read_input(path)?).map_err(csv_err(path))?;
    let periods = detect_dark_periods(&trace, cfg.threshold_frac, cfg.min_dark_bins)?;
    write_artifact(out, dir, "dark.csv", &csvio::write_dark(&periods))?;
    Ok(())
}

/// Default curve span: multiples of the bin while the counting function
/// stays at or above max(3, 2% of M). The near-empty tail, where N(t) sits
/// flat at a few counts for many bins, would otherwise drag a weighted
/// log-linear fit toward zero slope. `survival.t_max` overrides.
fn curve_t_max(cfg: &RunConfig, ens: &DwellEnsemble) -> f64 {
    if let Some(t) = cfg.survival_t_max {
        return t;
    }
    let floor = (0.02 * ens.m() as f64).ceil().max(3.0) as usize;
    let mut t_max = cfg.survival_bin;
    let mut k = 1u64;
    loop {
        let t = k as f64 * cfg.survival_bin;
        let n = ens.dwells_s().iter().filter(|&&d| d > t).count();
        if n < floor {
            break;
        }
        t_max = t;
        k += 1;
    }
    t_max
}

fn curve_and_fit(
    cfg: &RunConfig,
    ens: &DwellEnsemble,
) -> Result<(SurvivalCurve, FitResult), RunError> {
    let curve = survival_curve(ens, cfg.survival_bin, curve_t_max(cfg, ens))?;
    let fit = fit_lifetime(&curve)?;
    Ok((curve, fit))
}

fn run_survival(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let path = cfg.io_dark.as_ref().expect("validated");
    let periods = csvio::read_dark(&read_input(path)?).map_err(csv_err(path))?;
    let ens = DwellEnsemble::from_periods(&periods)?;
    let (curve, fit) = curve_and_fit(cfg, &ens)?;
    let tau = cfg.survival_tau.unwrap_or(fit.tau_s);
    write_artifact(out, dir, "survival.csv", &csvio::write_survival(&curve, tau))?;
    Ok(())
}

fn fit_report_text(fit: &FitResult) -> String {
    let mut s = String::from("lifetime fit\n");
    let _ = writeln!(s, "tau_s = {}", fit.tau_s);
    let _ = writeln!(s, "tau_stderr_s = {}", fit.tau_stderr_s);
    let _ = writeln!(s, "log_intercept = {}", fit.log_intercept);
    let _ = writeln!(s, "points_used = {}", fit.points_used);
    s
}

fn run_fit(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let path = cfg.io_survival.as_ref().expect("validated");
    let curve = csvio::read_survival(&read_input(path)?).map_err(csv_err(path))?;
    let fit = fit_lifetime(&curve)?;
    write_artifact(out, dir, "fit.txt", &fit_report_text(&fit))?;
    Ok(())
}

fn run_gamow(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let pole = cfg.pole()?;
    let hbar = cfg.hbar;
    let test_pole = cfg
        .test_pole
        .unwrap_or_else(|| Complex64::new(pole.e_r(), pole.gamma()));
    let test = RationalTestFunction::double_pole(test_pole)?;

    let base = cauchy_pairing(&test, &pole, cfg.quad)?;
    let t_max = cfg.gamow_t_max.unwrap_or(10.0 * hbar / pole.gamma());
    let steps = cfg.gamow_steps;
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = if steps == 1 {
            cfg.gamow_t_min
        } else {
            cfg.gamow_t_min + (t_max - cfg.gamow_t_min) * k as f64 / (steps - 1) as f64
        };
        let evolved = evolved_pairing(&test, &pole, t, hbar, cfg.quad)?;
        let ratio = evolved / base;
        rows.push(PairingRow {
            t,
            abs_ratio: ratio.norm(),
            phase: ratio.arg(),
            expected_abs: (-pole.gamma() * t / (2.0 * hbar)).exp(),
        });
    }
    write_artifact(out, dir, "pairing.csv", &csvio::write_pairing(&rows))?;
    Ok(())
}

fn class_name(c: HardyClass) -> &'static str {
    match c {
        HardyClass::Lower => "Lower",
        HardyClass::Upper => "Upper",
        HardyClass::Neither => "Neither",
    }
}

fn run_hardy(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let wave = match &cfg.io_wavefunction {
        Some(path) => csvio::read_wavefunction(&read_input(path)?).map_err(csv_err(path))?,
        None => {
            let pole = cfg.pole()?;
            let center = cfg.grid_center.unwrap_or(pole.e_r());
            let half_span = cfg.grid_half_span.unwrap_or(200.0 * pole.gamma());
            let grid =
                EnergyGrid::uniform(center - half_span, center + half_span, cfg.grid_points)?;
            let wave = SampledWaveFunction::from_fn(grid, |e| gamow_density(e, &pole))?;
            write_artifact(out, dir, "wavefunction.csv", &csvio::write_wavefunction(&wave))?;
            wave
        }
    };

    let profile = fourier_support_profile(&wave)?;
    let class = hardy_classify(&wave, cfg.hardy_tol)?;
    let mut text = String::from("hardy classification\n");
    let _ = writeln!(text, "class = {}", class_name(class.class));
    let _ = writeln!(text, "leakage = {}", class.leakage);
    let _ = writeln!(text, "mass_negative = {}", profile.mass_negative);
    let _ = writeln!(text, "mass_nonnegative = {}", profile.mass_nonnegative);
    let _ = writeln!(text, "total = {}", profile.total);

    if let Some(t) = cfg.hardy_evolve_t {
        let forward = semigroup_multiplier(&wave, t, cfg.hbar, Guard::Enforce)?;
        let fwd_class = hardy_classify(&forward.wave, cfg.hardy_tol)?;
        let probe = semigroup_multiplier(&wave, -t, cfg.hbar, Guard::Probe)?;
        let _ = writeln!(text, "evolve_t = {t}");
        let _ = writeln!(text, "forward_class = {}", class_name(fwd_class.class));
        let _ = writeln!(text, "forward_leakage = {}", forward.leakage);
        let _ = writeln!(text, "probe_t = {}", -t);
        let _ = writeln!(text, "probe_leakage = {}", probe.leakage);
    }
    write_artifact(out, dir, "hardy.txt", &text)?;
    Ok(())
}

fn run_report(cfg: &RunConfig, dir: &Path, out: &mut RunOutcome) -> Result<(), RunError> {
    let scheme = cfg.level_scheme()?;
    let traj = cfg.trajectory_config()?;
    out.warnings.extend(traj.warnings(&scheme));

    let (trace, records) = simulate_trajectory(&scheme, &traj)?;
    write_artifact(out, dir, "trace.csv", &csvio::write_trace(&trace))?;
    write_artifact(out, dir, "jumps.csv", &csvio::write_jumps(&records))?;

    let periods = detect_dark_periods(&trace, cfg.threshold_frac, cfg.min_dark_bins)?;
    write_artifact(out, dir, "dark.csv", &csvio::write_dark(&periods))?;

    let ens = DwellEnsemble::from_periods(&periods)?;
    let (curve, fit) = curve_and_fit(cfg, &ens)?;

    // Reference lifetime from the width: Γ = ħ·unshelve_rate, so ħ/Γ is the
    // inverse unshelve rate independent of the unit convention.
    let unshelve = cfg.unshelve_rate.expect("validated");
    let gamma_energy = cfg.hbar * unshelve;
    let tau_ref = 1.0 / unshelve;

    write_artifact(
        out,
        dir,
        "survival.csv",
        &csvio::write_survival(&curve, fit.tau_s),
    )?;
    write_artifact(out, dir, "fit.txt", &fit_report_text(&fit))?;

    let comparison = compare_counting_to_born(&curve, tau_ref, Some(&ens))?;
    let width = lifetime_width_report(gamma_energy, &fit, cfg.hbar, None);

    let ground_truth = records.iter().filter(|r| !r.censored).count();
    let envelope = 3.0 * tau_ref / (ens.m() as f64).sqrt();
    let tau_ok = (fit.tau_s - tau_ref).abs() < envelope;

    let mut text = String::from("shelving run report\n");
    let _ = writeln!(text, "seed = {}", traj.seed);
    let _ = writeln!(text, "bin_width_s = {}", traj.bin_width_s);
    let _ = writeln!(text, "unshelve_rate = {unshelve}");
    let _ = writeln!(text, "ground_truth_dark_periods = {ground_truth}");
    let _ = writeln!(text, "detected_dark_periods = {}", ens.m());
    let _ = writeln!(text, "fitted_tau_s = {}", fit.tau_s);
    let _ = writeln!(text, "fitted_tau_stderr_s = {}", fit.tau_stderr_s);
    let _ = writeln!(text, "expected_tau_s = {tau_ref}");
    let _ = writeln!(text, "tau_envelope_3sigma_s = {envelope}");
    let _ = writeln!(text, "tau_within_envelope = {}", pass_fail(tau_ok));
    let ks = comparison.ks_statistic.expect("ensemble supplied");
    let _ = writeln!(text, "ks_statistic = {ks}");
    let _ = writeln!(text, "ks_critical_0p05 = {}", comparison.ks_critical);
    let _ = writeln!(
        text,
        "ks_pass = {}",
        pass_fail(comparison.ks_pass.unwrap_or(false))
    );
    let _ = writeln!(
        text,
        "sup_deviation_counting_vs_born = {}",
        comparison.sup_deviation
    );
    let _ = writeln!(text, "lifetime_width_block:");
    let _ = writeln!(text, "  gamma_energy = {gamma_energy}");
    let _ = writeln!(text, "  tau_from_width_s = {}", width.tau_from_width_s);
    let _ = writeln!(text, "  tau_fitted_s = {}", width.tau_fitted_s);
    let _ = writeln!(text, "  pull = {}", width.pull);
    let _ = writeln!(text, "  consistent = {}", pass_fail(width.consistent));
    write_artifact(out, dir, "report.txt", &text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn fixture_config() -> RunConfig {
        parse_config(
            "seed = 4242\n\
             scheme.bright_rate = 1000\n\
             scheme.shelve_rate = 0.016666666666666666\n\
             scheme.unshelve_rate = 0.03333333333333333\n\
             run.bin_width = 0.1\n\
             run.target_dark_periods = 203\n",
        )
        .unwrap()
    }

    #[test]
    fn simulate_writes_trace_and_jumps() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_subcommand(Mode::Simulate, &fixture_config(), dir.path()).unwrap();
        let names: Vec<_> = out
            .artifacts
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["trace.csv", "jumps.csv"]);
        for p in &out.artifacts {
            assert!(p.exists());
        }
    }

    #[test]
    fn detect_requires_existing_input() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = fixture_config();
        cfg.io_trace = Some(dir.path().join("missing.csv"));
        let err = run_subcommand(Mode::Detect, &cfg, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn report_chain_produces_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_subcommand(Mode::Report, &fixture_config(), dir.path()).unwrap();
        let names: Vec<_> = out
            .artifacts
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(
            names,
            [
                "trace.csv",
                "jumps.csv",
                "dark.csv",
                "survival.csv",
                "fit.txt",
                "report.txt"
            ]
        );
        let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("tau_within_envelope = PASS"), "{report}");
        assert!(report.contains("ks_pass = PASS"), "{report}");
        assert!(report.contains("consistent = PASS"), "{report}");
    }

    #[test]
    fn report_is_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run_subcommand(Mode::Report, &fixture_config(), d1.path()).unwrap();
        run_subcommand(Mode::Report, &fixture_config(), d2.path()).unwrap();
        for name in [
            "trace.csv",
            "jumps.csv",
            "dark.csv",
            "survival.csv",
            "fit.txt",
            "report.txt",
        ] {
            let a = fs::read(d1.path().join(name)).unwrap();
            let b = fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn gamow_rows_match_exponential_law() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(
            "pole.e_r = 10\npole.gamma = 1\ntest.pole_re = 10\ntest.pole_im = 1\n\
             gamow.t_max = 10\ngamow.steps = 20\n",
        )
        .unwrap();
        run_subcommand(Mode::Gamow, &cfg, dir.path()).unwrap();
        let rows =
            csvio::read_pairing(&fs::read_to_string(dir.path().join("pairing.csv")).unwrap())
                .unwrap();
        assert_eq!(rows.len(), 20);
        for r in rows.iter().filter(|r| r.t >= 0.0) {
            assert!(
                (r.abs_ratio - r.expected_abs).abs() < 1e-6,
                "t={}: |ratio| {} vs expected {}",
                r.t,
                r.abs_ratio,
                r.expected_abs
            );
        }
    }

    #[test]
    fn hardy_report_classifies_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config("pole.e_r = 10\npole.gamma = 1\nhardy.evolve_t = 5\n").unwrap();
        run_subcommand(Mode::Hardy, &cfg, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("hardy.txt")).unwrap();
        assert!(text.contains("class = Lower"), "{text}");
        assert!(text.contains("forward_class = Lower"), "{text}");
        assert!(dir.path().join("wavefunction.csv").exists());
    }

    #[test]
    fn pipeline_stages_compose_via_files() {
        let dir = tempfile::tempdir().unwrap();
        run_subcommand(Mode::Simulate, &fixture_config(), dir.path()).unwrap();

        let mut cfg = fixture_config();
        cfg.io_trace = Some(dir.path().join("trace.csv"));
        run_subcommand(Mode::Detect, &cfg, dir.path()).unwrap();

        cfg.io_dark = Some(dir.path().join("dark.csv"));
        run_subcommand(Mode::Survival, &cfg, dir.path()).unwrap();

        cfg.io_survival = Some(dir.path().join("survival.csv"));
        run_subcommand(Mode::Fit, &cfg, dir.path()).unwrap();

        let fit = fs::read_to_string(dir.path().join("fit.txt")).unwrap();
        let tau: f64 = fit
            .lines()
            .find_map(|l| l.strip_prefix("tau_s = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((tau - 30.0).abs() < 6.4, "piped fit tau {tau}");
    }
}
