use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use qjump_core::estimate::{fit_fringe, fit_populations, FringeFitResult, FringeHint, PeakFitResult};
use qjump_core::experiment::{render_repetition, simulate_sample, RepetitionFrames};
use qjump_core::optics::pgm::{sidecar, write_pgm};
use qjump_core::optics::DetectorFrame;
use qjump_core::{run_sweep, DecayType, JumpProbabilities, PAIRS};

use crate::config::{SaveFrames, Scenario, ScenarioConfig};
use crate::csvio::{fmt_num, read_profile, read_table, write_atomic, write_table, Row};
use crate::error::{io_err, CliError, CliResult};
use crate::plot::{infer_decay_type, render, Panel};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "QJUMP_OUT_DIR";

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalOpts {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub noiseless: bool,
}

/// Files written and per-sample failures of one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub written: Vec<PathBuf>,
    pub failures: usize,
    pub summary: String,
}

impl Report {
    pub fn success(&self) -> bool {
        self.failures == 0
    }
}

impl GlobalOpts {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn scenario(&self) -> CliResult<Scenario> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.noiseless {
            cfg.noiseless = true;
        }
        cfg.validate()
    }

    /// `--out`, then the environment, then the config, then `out`.
    pub fn output_dir(&self, from_config: Option<&Path>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| from_config.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn theory_rows(scenario: &Scenario) -> CliResult<Vec<Row>> {
    Ok(run_sweep(&scenario.sweep, &scenario.state)?.iter().map(Row::theory).collect())
}

pub fn cmd_evolve(opts: &GlobalOpts) -> CliResult<Report> {
    let scenario = opts.scenario()?;
    let out = opts.output_dir(scenario.output_dir.as_deref());
    let rows = theory_rows(&scenario)?;
    let path = out.join("theory.csv");
    write_table(&path, &rows, false)?;
    Ok(Report {
        summary: format!("{} theory rows written to {}\n", rows.len(), path.display()),
        written: vec![path],
        failures: 0,
    })
}

const EXPOSURE_NAMES: [&str; 4] = ["image", "pair12", "pair13", "pair23"];

fn frame_files(frame: &DetectorFrame, stem: &Path) -> CliResult<()> {
    let mut pgm = Vec::new();
    let clamped = write_pgm(frame, &mut pgm).map_err(io_err(stem))?;
    let pgm_path = stem.with_extension("pgm");
    std::fs::write(&pgm_path, pgm).map_err(io_err(&pgm_path))?;
    let txt_path = stem.with_extension("txt");
    std::fs::write(&txt_path, sidecar(frame.spec(), clamped)).map_err(io_err(&txt_path))
}

/// Writes the frames of one sample into a staging directory and renames it into place.
fn commit_frames(root: &Path, sample: usize, reps: &[(usize, RepetitionFrames)]) -> CliResult<PathBuf> {
    std::fs::create_dir_all(root).map_err(io_err(root))?;
    let final_dir = root.join(format!("sample_{sample:03}"));
    let staging = root.join(format!(".sample_{sample:03}.tmp"));
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
    }
    std::fs::create_dir_all(&staging).map_err(io_err(&staging))?;
    for (r, frames) in reps {
        let exposures = std::iter::once(Some(&frames.image)).chain(frames.fringes.iter().map(Option::as_ref));
        for (name, frame) in EXPOSURE_NAMES.iter().zip(exposures) {
            if let Some(frame) = frame {
                frame_files(frame, &staging.join(format!("rep_{r:03}_{name}")))?;
            }
        }
    }
    if final_dir.exists() {
        std::fs::remove_dir_all(&final_dir).map_err(io_err(&final_dir))?;
    }
    std::fs::rename(&staging, &final_dir).map_err(io_err(&final_dir))?;
    Ok(final_dir)
}

pub fn cmd_simulate_experiment(opts: &GlobalOpts) -> CliResult<Report> {
    let scenario = opts.scenario()?;
    let out = opts.output_dir(scenario.output_dir.as_deref());
    let t = scenario.sweep.decay_type();
    let probs = scenario.sweep.probabilities()?;
    let theory = theory_rows(&scenario)?;

    let mut estimates = Vec::with_capacity(probs.len());
    let mut errors: Vec<(usize, JumpProbabilities, String)> = Vec::new();
    let mut failed_samples = 0;
    let mut written = Vec::new();
    for (k, p) in probs.iter().enumerate() {
        match simulate_sample(t, *p, &scenario.state, &scenario.setup, k) {
            Ok(outcome) => {
                if !outcome.succeeded() {
                    failed_samples += 1;
                }
                errors.extend(outcome.failures.iter().map(|m| (k, *p, m.clone())));
                estimates.push(Row::estimate(p, &outcome.estimate));
                let reps: Vec<(usize, RepetitionFrames)> = match scenario.save_frames {
                    SaveFrames::None => vec![],
                    SaveFrames::First => outcome.first_frames.into_iter().map(|f| (0, f)).collect(),
                    SaveFrames::All => (0..scenario.setup.repetitions)
                        .into_par_iter()
                        .filter_map(|r| {
                            render_repetition(t, *p, &scenario.state, &scenario.setup, k, r).ok().map(|f| (r, f))
                        })
                        .collect(),
                };
                if !reps.is_empty() {
                    written.push(commit_frames(&out.join("frames"), k, &reps)?);
                }
            }
            Err(e) => {
                failed_samples += 1;
                errors.push((k, *p, e.to_string()));
                estimates.push(Row { probs: p.as_array(), values: [f64::NAN; 6], errors: Some([f64::NAN; 6]) });
            }
        }
    }

    let theory_path = out.join("theory.csv");
    write_table(&theory_path, &theory, false)?;
    let est_path = out.join("estimates.csv");
    write_table(&est_path, &estimates, true)?;
    let err_path = out.join("errors.csv");
    write_errors(&err_path, &errors)?;
    written.splice(0..0, [theory_path, est_path.clone(), err_path]);

    let summary = format!(
        "{} samples of {} repetitions; {} with failures ({} failed repetitions); estimates in {}\n",
        probs.len(),
        scenario.setup.repetitions,
        failed_samples,
        errors.len(),
        est_path.display()
    );
    Ok(Report { written, failures: failed_samples, summary })
}

fn write_errors(path: &Path, errors: &[(usize, JumpProbabilities, String)]) -> CliResult<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let res: csv::Result<()> = (|| {
            w.write_record(["sample", "p21", "p31", "p32", "message"])?;
            for (k, p, m) in errors {
                w.write_record([k.to_string(), fmt_num(p.p21), fmt_num(p.p31), fmt_num(p.p32), m.clone()])?;
            }
            w.flush()?;
            Ok(())
        })();
        res.map_err(|e| CliError::Ingest { path: path.to_owned(), message: e.to_string() })?;
    }
    write_atomic(path, &buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    Image,
    Fringe,
}

pub fn cmd_fit(opts: &GlobalOpts, profile_path: &Path, mode: FitMode, pair: (usize, usize)) -> CliResult<Report> {
    let profile = read_profile(profile_path)?;
    let (geometry, cfg_out) = match &opts.config {
        Some(_) => {
            let s = opts.scenario()?;
            (Some(s.setup.geometry), s.output_dir)
        }
        None => (None, None),
    };
    let out = opts.output_dir(cfg_out.as_deref());
    let (path, csv_text, summary) = match mode {
        FitMode::Image => {
            let fit = fit_populations(&profile, geometry.as_ref())?;
            let (csv_text, summary) = image_report(&fit);
            (out.join("fit_image.csv"), csv_text, summary)
        }
        FitMode::Fringe => {
            if !PAIRS.contains(&pair) {
                return Err(CliError::Field { field: "pair", message: format!("{pair:?} is not one of 12, 13, 23") });
            }
            let hint = geometry.map(|g| FringeHint::new(&g, pair));
            let fit = fit_fringe(&profile, hint.as_ref())?;
            let (csv_text, summary) = fringe_report(&fit);
            (out.join("fit_fringe.csv"), csv_text, summary)
        }
    };
    write_atomic(&path, csv_text.as_bytes())?;
    Ok(Report { written: vec![path], failures: 0, summary })
}

fn image_report(fit: &PeakFitResult) -> (String, String) {
    let mut header = vec!["rho11".to_owned(), "rho22".into(), "rho33".into()];
    let mut values: Vec<String> = fit.populations.iter().map(|&x| fmt_num(x)).collect();
    for (name, get) in [
        ("center", (|m: &qjump_core::estimate::GaussianPeak| m.center) as fn(&_) -> f64),
        ("width", |m| m.width),
        ("area", |m| m.area),
    ] {
        for (i, m) in fit.modes.iter().enumerate() {
            header.push(format!("{name}{}", i + 1));
            values.push(fmt_num(get(m)));
        }
    }
    header.extend(["offset".into(), "residual_rms".into()]);
    values.extend([fmt_num(fit.offset), fmt_num(fit.residual_rms)]);
    let mut summary = String::new();
    for (i, (p, m)) in fit.populations.iter().zip(&fit.modes).enumerate() {
        let _ = writeln!(summary, "rho{n}{n} = {p:.6}  (centre {:.6}, width {:.6})", m.center, m.width, n = i + 1);
    }
    let _ = writeln!(summary, "residual rms = {:.3e}", fit.residual_rms);
    (format!("{}\n{}\n", header.join(","), values.join(",")), summary)
}

fn fringe_report(fit: &FringeFitResult) -> (String, String) {
    let header = "visibility,abs_sigma,fringe_period,envelope_center,envelope_width,amplitude,phase,offset,residual_rms,no_fringe,clamped";
    let values = [
        fit.visibility,
        fit.visibility / 2.0,
        fit.fringe_period,
        fit.envelope_center,
        fit.envelope_width,
        fit.amplitude,
        fit.phase,
        fit.offset,
        fit.residual_rms,
    ]
    .map(fmt_num)
    .join(",");
    let mut summary = format!(
        "visibility = {:.6}  |sigma| = {:.6}\nfringe period = {:.6}  envelope width = {:.6}\n",
        fit.visibility,
        fit.visibility / 2.0,
        fit.fringe_period,
        fit.envelope_width
    );
    if fit.flags.no_fringe {
        summary.push_str("no dominant fringe frequency: visibility is a V = 0 candidate\n");
    }
    if fit.flags.clamped {
        summary.push_str("fitted visibility exceeded 1 and was clamped\n");
    }
    (format!("{header}\n{values},{},{}\n", fit.flags.no_fringe, fit.flags.clamped), summary)
}

pub fn cmd_plot(
    opts: &GlobalOpts,
    theory: &[PathBuf],
    estimates: &[PathBuf],
    decay_type: Option<DecayType>,
) -> CliResult<Report> {
    let mut groups: Vec<(DecayType, Vec<Row>, Vec<Row>)> =
        DecayType::ALL.iter().map(|&t| (t, vec![], vec![])).collect();
    for (paths, is_theory) in [(theory, true), (estimates, false)] {
        for path in paths {
            let rows = read_table(path)?;
            let t = match decay_type.or_else(|| infer_decay_type(&rows)) {
                Some(t) => t,
                None => {
                    return Err(CliError::Ingest {
                        path: path.clone(),
                        message: "cannot infer the decay type from the p columns; pass --decay-type".into(),
                    })
                }
            };
            let g = groups.iter_mut().find(|g| g.0 == t).expect("all types present");
            if is_theory { &mut g.1 } else { &mut g.2 }.extend(rows);
        }
    }
    let out = opts.output_dir(None);
    let mut written = Vec::new();
    for (t, th, est) in groups.iter().filter(|g| !g.1.is_empty() || !g.2.is_empty()) {
        for panel in Panel::ALL {
            let path = out.join(format!("{}_{}.svg", t.name(), panel.file_stem()));
            write_atomic(&path, render(*t, panel, th, est).as_bytes())?;
            written.push(path);
        }
    }
    let summary = written.iter().map(|p| format!("wrote {}\n", p.display())).collect();
    Ok(Report { written, failures: 0, summary })
}
