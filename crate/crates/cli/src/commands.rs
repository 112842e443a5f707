use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use pdcsim_core::dispersion::{
    load_crystal_database, parse_crystal_database_unchecked, DEFAULT_DATABASE,
    DEFAULT_DATABASE_PATH, PRINCIPAL_CUT_DEG,
};
use pdcsim_core::ensemble::{run_scenario, satellite_ratio, EnsembleError, RatioEstimate};
use pdcsim_core::phasematch::{puc_match, rainbow_sweep, signal_angle, GapReason, RainbowEntry};
use pdcsim_core::precision::{angle, round_angle, round_sig6, round_wavelength, sig6, wavelength};
use pdcsim_core::threewave::DEFAULT_STEP;
use pdcsim_core::{
    CrystalDispersion, DispersionError, EnsembleReport, ModeSpec, PhaseMatchError, Polarization,
    Scenario, ScenarioConfig,
};
use serde::Serialize;
use serde_json::json;

use crate::manifest::{emit, RunManifest};
use crate::settings::Settings;
use crate::{
    Cli, Command, Common, CrystalsArgs, Format, PucArgs, RainbowArgs, ReplayArgs, ScenarioArg,
    SimulateArgs,
};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub fn config_err(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    run_with_out(command, None)
}

/// Runs a command; `out_override` replaces the output path (used by replay).
fn run_with_out(command: Command, out_override: Option<PathBuf>) -> Result<(), CliError> {
    match command {
        Command::Rainbow(mut a) => {
            a.common.out = out_override.or(a.common.out);
            rainbow(&a)
        }
        Command::Puc(mut a) => {
            a.common.out = out_override.or(a.common.out);
            puc(&a)
        }
        Command::Simulate(mut a) => {
            a.common.out = out_override.or(a.common.out);
            simulate(&a)
        }
        Command::Crystals(a) => crystals(&a),
        Command::Replay(a) => replay(&a),
    }
}

fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let argv = std::iter::once("pdcsim".to_string()).chain(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| config_err(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(config_err("a manifest cannot replay another replay"));
    }
    run_with_out(cli.command, args.out.clone())
}

/// Resolved crystal plus the arguments that pin it down.
struct CrystalChoice {
    crystal: CrystalDispersion,
    db: Option<PathBuf>,
    db_label: String,
}

impl CrystalChoice {
    fn args(&self) -> Vec<String> {
        let mut v = vec!["--crystal".into(), self.crystal.name().to_string()];
        if let Some(db) = &self.db {
            v.push("--db".into());
            v.push(db.display().to_string());
        }
        v.push("--cut-angle-deg".into());
        v.push(format!("{}", self.crystal.optic_axis_cut_deg()));
        v
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "crystal": self.crystal.name(),
            "database": self.db_label,
            "cut_angle_deg": self.crystal.optic_axis_cut_deg(),
        })
    }
}

fn db_label(db: Option<&Path>) -> String {
    match db {
        Some(p) => p.display().to_string(),
        None => format!("built-in database ({DEFAULT_DATABASE_PATH})"),
    }
}

fn load_db(db: Option<&Path>) -> Result<Vec<CrystalDispersion>, CliError> {
    let loaded = match db {
        Some(p) => load_crystal_database(p),
        None => pdcsim_core::dispersion::parse_crystal_database(DEFAULT_DATABASE),
    };
    loaded.map_err(|e| config_err(format!("{}: {e}", db_label(db))))
}

fn parse_cut(text: &str) -> Result<f64, CliError> {
    if text.eq_ignore_ascii_case("principal") {
        return Ok(PRINCIPAL_CUT_DEG);
    }
    text.parse::<f64>()
        .map_err(|_| config_err(format!("--cut-angle-deg: `{text}` is not a number")))
}

fn choose_crystal(common: &Common, settings: &Settings) -> Result<CrystalChoice, CliError> {
    let db = match &common.db {
        Some(p) => Some(p.clone()),
        None => settings.string("db")?.map(PathBuf::from),
    };
    let name = match &common.crystal {
        Some(n) => n.clone(),
        None => settings.string("crystal")?.unwrap_or_else(|| "KDP".into()),
    };
    let label = db_label(db.as_deref());
    let crystal = load_db(db.as_deref())?
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| config_err(format!("crystal `{name}` not found in {label}")))?;
    let cut = match &common.cut_angle_deg {
        Some(c) => Some(parse_cut(c)?),
        None => match settings.string("cut_angle_deg")? {
            Some(c) => Some(parse_cut(&c)?),
            None => None,
        },
    };
    let crystal = match cut {
        Some(cut) => crystal
            .with_cut(cut)
            .map_err(|e| config_err(format!("--cut-angle-deg: {e}")))?,
        None => crystal,
    };
    Ok(CrystalChoice {
        crystal,
        db,
        db_label: label,
    })
}

fn format_of(common: &Common, settings: &Settings) -> Result<Format, CliError> {
    if let Some(f) = common.format {
        return Ok(f);
    }
    match settings.string("format")?.as_deref() {
        None | Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(config_err(format!("unknown format `{other}`"))),
    }
}

fn format_arg(format: Format) -> [String; 2] {
    let f = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    ["--format".into(), f.into()]
}

/// Parses the `300e` / `450o` mode notation.
fn parse_mode(text: &str) -> Result<(f64, Polarization), CliError> {
    let bad = || config_err(format!("mode `{text}` must look like `300e` or `450o`"));
    let t = text.trim();
    let (num, pol) = match t.chars().last() {
        Some('e') | Some('E') => (&t[..t.len() - 1], Polarization::Extraordinary),
        Some('o') | Some('O') => (&t[..t.len() - 1], Polarization::Ordinary),
        _ => return Err(bad()),
    };
    let wl: f64 = num.parse().map_err(|_| bad())?;
    if !(wl > 0.0 && wl.is_finite()) {
        return Err(bad());
    }
    Ok((wl, pol))
}

fn mode_text(wl: f64, pol: Polarization) -> String {
    format!("{wl}{}", pol.suffix())
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| config_err(format!("{flag}: `{s}` is not a number")))
        })
        .collect()
}

fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || config_err(format!("--range `{text}` must be `start:end:count`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let end: f64 = end.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    Ok(match count {
        0 => vec![],
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    })
}

fn join_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

fn check_in_band(crystal: &CrystalDispersion, what: &str, wl: f64) -> Result<(), CliError> {
    let r = crystal.valid_range();
    if r.contains(wl) {
        Ok(())
    } else {
        Err(config_err(format!(
            "{what} {wl} nm is outside the {} dispersion range {}-{} nm",
            crystal.name(),
            r.min_nm,
            r.max_nm
        )))
    }
}

fn gap_fields(reason: &GapReason) -> (Option<f64>, &'static str) {
    match reason {
        GapReason::NoSolution { sin2_theta1 } => (Some(*sin2_theta1), "no-solution"),
        GapReason::IdlerBeyondExit { .. } => (None, "idler-beyond-exit"),
        GapReason::OutOfRange { .. } => (None, "out-of-range"),
        GapReason::Invalid { .. } => (None, "invalid"),
    }
}

#[derive(Serialize)]
struct RainbowRow {
    wavelength_nm: f64,
    signal_angle_deg: Option<f64>,
    idler_wavelength_nm: Option<f64>,
    idler_angle_deg: Option<f64>,
    gap: bool,
    sin2_theta1: Option<f64>,
    gap_reason: Option<&'static str>,
}

fn rainbow(a: &RainbowArgs) -> Result<(), CliError> {
    let settings = Settings::load(a.common.config.as_deref())?;
    let choice = choose_crystal(&a.common, &settings)?;
    let format = format_of(&a.common, &settings)?;
    let pump_text = match &a.pump {
        Some(p) => p.clone(),
        None => settings.string("pump")?.unwrap_or_else(|| "300e".into()),
    };
    let (pump_nm, pump_pol) = parse_mode(&pump_text)?;
    let grid = match (&a.grid, &a.range) {
        (Some(g), _) => parse_list("--grid", g)?,
        (None, Some(r)) => parse_range(r)?,
        (None, None) => match (settings.string("grid")?, settings.string("range")?) {
            (Some(g), _) => parse_list("grid", &g)?,
            (None, Some(r)) => parse_range(&r)?,
            (None, None) => parse_range("400:900:51")?,
        },
    };
    let crystal = &choice.crystal;
    check_in_band(crystal, "pump", pump_nm)?;
    for &wl in &grid {
        check_in_band(crystal, "grid wavelength", wl)?;
        if wl <= pump_nm {
            return Err(config_err(format!(
                "grid wavelength {wl} nm must exceed the pump wavelength {pump_nm} nm"
            )));
        }
    }
    let pump = ModeSpec::on_axis(pump_nm, pump_pol).map_err(|e| config_err(e.to_string()))?;
    let entries = rainbow_sweep(crystal, &pump, &grid);
    let rows: Vec<RainbowRow> = entries
        .iter()
        .map(|e| match e {
            RainbowEntry::Point(p) => {
                let sin2 = p.signal_angle_deg.to_radians().sin().powi(2);
                RainbowRow {
                    wavelength_nm: p.signal_wavelength_nm,
                    signal_angle_deg: Some(p.signal_angle_deg),
                    idler_wavelength_nm: Some(p.idler_wavelength_nm),
                    idler_angle_deg: Some(p.idler_angle_deg),
                    gap: false,
                    sin2_theta1: Some(sin2),
                    gap_reason: None,
                }
            }
            RainbowEntry::Gap {
                signal_wavelength_nm,
                reason,
            } => {
                let (sin2, why) = gap_fields(reason);
                RainbowRow {
                    wavelength_nm: *signal_wavelength_nm,
                    signal_angle_deg: None,
                    idler_wavelength_nm: None,
                    idler_angle_deg: None,
                    gap: true,
                    sin2_theta1: sin2,
                    gap_reason: Some(why),
                }
            }
        })
        .collect();

    let body = match format {
        Format::Csv => {
            let mut s = String::from(
                "wavelength_nm,signal_angle_deg,idler_wavelength_nm,idler_angle_deg,gap_flag,sin2_theta1,gap_reason\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    wavelength(r.wavelength_nm),
                    r.signal_angle_deg.map(angle).unwrap_or_default(),
                    r.idler_wavelength_nm.map(wavelength).unwrap_or_default(),
                    r.idler_angle_deg.map(angle).unwrap_or_default(),
                    u8::from(r.gap),
                    r.sin2_theta1.map(sig6).unwrap_or_default(),
                    r.gap_reason.unwrap_or_default(),
                );
            }
            s
        }
        Format::Json => {
            let rounded: Vec<RainbowRow> = rows
                .into_iter()
                .map(|r| RainbowRow {
                    wavelength_nm: round_wavelength(r.wavelength_nm),
                    signal_angle_deg: r.signal_angle_deg.map(round_angle),
                    idler_wavelength_nm: r.idler_wavelength_nm.map(round_wavelength),
                    idler_angle_deg: r.idler_angle_deg.map(round_angle),
                    sin2_theta1: r.sin2_theta1.map(round_sig6),
                    ..r
                })
                .collect();
            let doc = json!({
                "command": "rainbow",
                "crystal": crystal.name(),
                "cut_angle_deg": crystal.optic_axis_cut_deg(),
                "pump": mode_text(pump_nm, pump_pol),
                "rows": rounded,
            });
            serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
        }
    };

    let mut args = vec!["rainbow".to_string()];
    args.extend(choice.args());
    args.extend(["--pump".into(), mode_text(pump_nm, pump_pol)]);
    args.extend(["--grid".into(), join_list(&grid)]);
    args.extend(format_arg(format));
    let config = json!({
        "crystal": choice.json(),
        "pump": mode_text(pump_nm, pump_pol),
        "grid_nm": grid,
    });
    emit(
        a.common.out.as_deref(),
        &body,
        &RunManifest::new("rainbow", args, config),
    )
}

#[derive(Serialize)]
struct PucRow {
    pump_nm: f64,
    partner_nm: f64,
    output_nm: Option<f64>,
    vacuum_angle_deg: Option<f64>,
    output_angle_deg: Option<f64>,
    gap: bool,
    sin2_theta1: Option<f64>,
    gap_reason: Option<&'static str>,
}

fn puc(a: &PucArgs) -> Result<(), CliError> {
    let settings = Settings::load(a.common.config.as_deref())?;
    let choice = choose_crystal(&a.common, &settings)?;
    let format = format_of(&a.common, &settings)?;
    let pump_text = match &a.pump {
        Some(p) => p.clone(),
        None => settings.string("pump")?.unwrap_or_else(|| "600o".into()),
    };
    let (pump_nm, pump_pol) = parse_mode(&pump_text)?;
    if pump_pol != Polarization::Ordinary {
        return Err(config_err("the up-conversion laser must be ordinary (`<nm>o`)"));
    }
    let partners = match &a.partner {
        Some(p) => parse_list("--partner", p)?,
        None => parse_list("partner", &settings.string("partner")?.unwrap_or_else(|| "300".into()))?,
    };
    let crystal = &choice.crystal;
    check_in_band(crystal, "pump", pump_nm)?;
    for &p in &partners {
        check_in_band(crystal, "partner", p)?;
        if p >= pump_nm {
            return Err(config_err(format!(
                "partner {p} nm must be shorter than the laser {pump_nm} nm"
            )));
        }
    }
    let pump = ModeSpec::on_axis(pump_nm, pump_pol).map_err(|e| config_err(e.to_string()))?;
    let mut sorted = partners.clone();
    sorted.sort_by(f64::total_cmp);
    let rows: Vec<PucRow> = sorted
        .iter()
        .map(|&partner| match puc_match(crystal, &pump, partner) {
            Ok(g) => PucRow {
                pump_nm,
                partner_nm: partner,
                output_nm: Some(g.output.wavelength_nm),
                vacuum_angle_deg: Some(g.vacuum_partner.external_angle_deg),
                output_angle_deg: Some(g.output.external_angle_deg),
                gap: false,
                sin2_theta1: Some(g.triple.sin2_theta1),
                gap_reason: None,
            },
            Err(e) => {
                let (sin2, why) = gap_fields(&GapReason::from(e));
                PucRow {
                    pump_nm,
                    partner_nm: partner,
                    output_nm: None,
                    vacuum_angle_deg: None,
                    output_angle_deg: None,
                    gap: true,
                    sin2_theta1: sin2,
                    gap_reason: Some(why),
                }
            }
        })
        .collect();

    let body = match format {
        Format::Csv => {
            let mut s = String::from(
                "pump_nm,partner_nm,output_nm,vacuum_angle_deg,output_angle_deg,gap_flag,sin2_theta1,gap_reason\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    wavelength(r.pump_nm),
                    wavelength(r.partner_nm),
                    r.output_nm.map(wavelength).unwrap_or_default(),
                    r.vacuum_angle_deg.map(angle).unwrap_or_default(),
                    r.output_angle_deg.map(angle).unwrap_or_default(),
                    u8::from(r.gap),
                    r.sin2_theta1.map(sig6).unwrap_or_default(),
                    r.gap_reason.unwrap_or_default(),
                );
            }
            s
        }
        Format::Json => {
            let rounded: Vec<PucRow> = rows
                .into_iter()
                .map(|r| PucRow {
                    pump_nm: round_wavelength(r.pump_nm),
                    partner_nm: round_wavelength(r.partner_nm),
                    output_nm: r.output_nm.map(round_wavelength),
                    vacuum_angle_deg: r.vacuum_angle_deg.map(round_angle),
                    output_angle_deg: r.output_angle_deg.map(round_angle),
                    sin2_theta1: r.sin2_theta1.map(round_sig6),
                    ..r
                })
                .collect();
            let doc = json!({
                "command": "puc",
                "crystal": crystal.name(),
                "cut_angle_deg": crystal.optic_axis_cut_deg(),
                "pump": mode_text(pump_nm, pump_pol),
                "rows": rounded,
            });
            serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
        }
    };

    let mut args = vec!["puc".to_string()];
    args.extend(choice.args());
    args.extend(["--pump".into(), mode_text(pump_nm, pump_pol)]);
    args.extend(["--partner".into(), join_list(&partners)]);
    args.extend(format_arg(format));
    let config = json!({
        "crystal": choice.json(),
        "pump": mode_text(pump_nm, pump_pol),
        "partner_nm": partners,
    });
    emit(a.common.out.as_deref(), &body, &RunManifest::new("puc", args, config))
}

/// Ensemble defaults: a weak laser (4 zeropoint units of intensity) and
/// κ·|a|·depth = 0.8, where the up-conversion shift is resolvable with 10⁴
/// trials.
mod defaults {
    pub const AMPLITUDE: f64 = 2.0;
    pub const KAPPA: f64 = 0.4;
    pub const DEPTH: f64 = 1.0;
    pub const TRIALS: u64 = 10_000;
    pub const SEED: u64 = 42;
    pub const THRESHOLD: f64 = 1.0;
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let settings = Settings::load(a.common.config.as_deref())?;
    let choice = choose_crystal(&a.common, &settings)?;
    let format = format_of(&a.common, &settings)?;
    let crystal = &choice.crystal;

    let scenario = match a.scenario {
        Some(s) => s,
        None => match settings.string("scenario")?.as_deref() {
            None | Some("pdc") => ScenarioArg::Pdc,
            Some("puc") => ScenarioArg::Puc,
            Some("both") => ScenarioArg::Both,
            Some(other) => return Err(config_err(format!("unknown scenario `{other}`"))),
        },
    };
    let amplitude = pick(a.amplitude, settings.float("amplitude")?, defaults::AMPLITUDE);
    let kappa = pick(a.kappa, settings.float("kappa")?, defaults::KAPPA);
    let depth = pick(a.depth, settings.float("depth")?, defaults::DEPTH);
    let step = pick(a.step, settings.float("step")?, DEFAULT_STEP);
    let trials = pick(a.trials, settings.integer("trials")?, defaults::TRIALS);
    let seed = pick(a.seed, settings.integer("seed")?, defaults::SEED);
    let threshold = pick(a.threshold, settings.float("threshold")?, defaults::THRESHOLD);

    let wants_pdc = matches!(scenario, ScenarioArg::Pdc | ScenarioArg::Both);
    let wants_puc = matches!(scenario, ScenarioArg::Puc | ScenarioArg::Both);

    let pdc_pump = match &a.pump {
        Some(p) if wants_pdc => p.clone(),
        _ => settings.string("pump")?.unwrap_or_else(|| "300e".into()),
    };
    let signal_nm = pick(a.signal, settings.float("signal")?, 450.0);
    // in a pure puc run `--pump` names the ordinary laser
    let laser = match (&a.laser, &a.pump) {
        (Some(l), _) => l.clone(),
        (None, Some(p)) if scenario == ScenarioArg::Puc => p.clone(),
        _ => settings.string("laser")?.unwrap_or_else(|| "450o".into()),
    };
    let partner_nm = pick(a.partner, settings.float("partner")?, 300.0);

    let mut triples = Vec::new();
    let mut args = vec!["simulate".to_string()];
    args.extend(choice.args());
    let scenario_name = match scenario {
        ScenarioArg::Pdc => "pdc",
        ScenarioArg::Puc => "puc",
        ScenarioArg::Both => "both",
    };
    args.extend(["--scenario".into(), scenario_name.into()]);

    let phase_err = |e: PhaseMatchError| match e {
        PhaseMatchError::Dispersion(DispersionError::OutOfRange { .. }) => config_err(e.to_string()),
        other => config_err(format!("triple has no phase-matched geometry: {other}")),
    };
    if wants_pdc {
        let (wl, pol) = parse_mode(&pdc_pump)?;
        if pol != Polarization::Extraordinary {
            return Err(config_err("the down-conversion pump must be extraordinary (`<nm>e`)"));
        }
        let pump = ModeSpec::on_axis(wl, pol).map_err(|e| config_err(e.to_string()))?;
        let triple = signal_angle(crystal, &pump, signal_nm).map_err(phase_err)?;
        triples.push((Scenario::Pdc, triple));
        args.extend(["--pump".into(), mode_text(wl, pol)]);
        args.extend(["--signal".into(), format!("{signal_nm}")]);
    }
    if wants_puc {
        let (wl, pol) = parse_mode(&laser)?;
        if pol != Polarization::Ordinary {
            return Err(config_err("the up-conversion laser must be ordinary (`<nm>o`)"));
        }
        let pump = ModeSpec::on_axis(wl, pol).map_err(|e| config_err(e.to_string()))?;
        let geometry = puc_match(crystal, &pump, partner_nm).map_err(phase_err)?;
        triples.push((Scenario::Puc, geometry.triple));
        args.extend(["--laser".into(), mode_text(wl, pol)]);
        args.extend(["--partner".into(), format!("{partner_nm}")]);
    }
    for (flag, value) in [
        ("--amplitude", format!("{amplitude}")),
        ("--kappa", format!("{kappa}")),
        ("--depth", format!("{depth}")),
        ("--step", format!("{step}")),
        ("--trials", format!("{trials}")),
        ("--seed", format!("{seed}")),
        ("--threshold", format!("{threshold}")),
    ] {
        args.extend([flag.to_string(), value]);
    }
    args.extend(format_arg(format));

    let mut reports = Vec::new();
    for (scenario, triple) in triples {
        let config = ScenarioConfig {
            scenario,
            pump_amplitude: amplitude,
            triple,
            kappa,
            depth,
            step_size: step,
            trials,
            seed,
            detection_threshold: threshold,
        };
        let report = run_scenario(&config).map_err(|e| match e {
            EnsembleError::Propagation { .. } => CliError {
                code: 3,
                message: e.to_string(),
            },
            other => config_err(other.to_string()),
        })?;
        reports.push(report);
    }
    let ratio = match reports.as_slice() {
        [pdc, puc] => Some(satellite_ratio(pdc, puc).map_err(|e| config_err(e.to_string()))?),
        _ => None,
    };

    let body = match format {
        Format::Csv => {
            let mut s = String::from("key,value\n");
            let _ = writeln!(s, "crystal,{}", crystal.name());
            let _ = writeln!(s, "cut_angle_deg,{}", angle(crystal.optic_axis_cut_deg()));
            for r in &reports {
                let prefix = if reports.len() > 1 {
                    format!("{}.", r.scenario.name())
                } else {
                    String::new()
                };
                report_kv(&mut s, &prefix, r);
            }
            if let Some(RatioEstimate { ratio, std_error }) = ratio {
                let _ = writeln!(s, "satellite_ratio,{}", sig6(ratio));
                let _ = writeln!(s, "satellite_ratio_std_error,{}", sig6(std_error));
            }
            s
        }
        Format::Json => {
            let views: Vec<_> = reports.iter().map(report_json).collect();
            let doc = json!({
                "command": "simulate",
                "crystal": crystal.name(),
                "cut_angle_deg": crystal.optic_axis_cut_deg(),
                "reports": views,
                "satellite_ratio": ratio.map(|r| json!({
                    "ratio": round_sig6(r.ratio),
                    "std_error": round_sig6(r.std_error),
                })),
            });
            serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
        }
    };
    let config = json!({
        "crystal": choice.json(),
        "scenario": scenario_name,
        "amplitude": amplitude,
        "kappa": kappa,
        "depth": depth,
        "step": step,
        "trials": trials,
        "seed": seed,
        "threshold": threshold,
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    emit(
        a.common.out.as_deref(),
        &body,
        &RunManifest::new("simulate", args, config),
    )
}

fn report_kv(s: &mut String, prefix: &str, r: &EnsembleReport) {
    let c = &r.config;
    let _ = writeln!(s, "{prefix}scenario,{}", r.scenario.name());
    let _ = writeln!(s, "{prefix}seed,{}", r.seed);
    let _ = writeln!(s, "{prefix}trials,{}", r.trials);
    let _ = writeln!(s, "{prefix}pump_amplitude,{}", sig6(c.pump_amplitude));
    let _ = writeln!(s, "{prefix}kappa,{}", sig6(c.kappa));
    let _ = writeln!(s, "{prefix}depth,{}", sig6(c.depth));
    let _ = writeln!(s, "{prefix}step,{}", sig6(c.step_size));
    let _ = writeln!(s, "{prefix}detection_threshold,{}", sig6(c.detection_threshold));
    for (i, m) in r.modes.iter().enumerate() {
        let role = match m.role {
            pdcsim_core::ensemble::ModeRole::Laser => "laser",
            pdcsim_core::ensemble::ModeRole::Vacuum => "vacuum",
        };
        let _ = writeln!(s, "{prefix}mode{i}.label,{}", m.label);
        let _ = writeln!(s, "{prefix}mode{i}.role,{role}");
        let _ = writeln!(s, "{prefix}mode{i}.mean_delta,{}", sig6(m.mean_delta));
        let _ = writeln!(s, "{prefix}mode{i}.std_error,{}", sig6(m.std_error));
        let _ = writeln!(s, "{prefix}mode{i}.z_score,{}", sig6(m.z_score()));
        let _ = writeln!(s, "{prefix}mode{i}.detection_rate,{}", sig6(m.detection_rate));
        let _ = writeln!(s, "{prefix}mode{i}.dark_rate,{}", sig6(m.dark_rate));
    }
}

fn report_json(r: &EnsembleReport) -> serde_json::Value {
    let c = &r.config;
    json!({
        "scenario": r.scenario,
        "seed": r.seed,
        "trials": r.trials,
        "config": {
            "pump_amplitude": c.pump_amplitude,
            "kappa": c.kappa,
            "depth": c.depth,
            "step": c.step_size,
            "detection_threshold": c.detection_threshold,
            "triple": [c.triple.pump.label(), c.triple.signal.label(), c.triple.idler.label()],
        },
        "modes": r.modes.iter().map(|m| json!({
            "label": m.label,
            "role": m.role,
            "mean_delta": round_sig6(m.mean_delta),
            "std_error": round_sig6(m.std_error),
            "z_score": round_sig6(m.z_score()),
            "detection_rate": round_sig6(m.detection_rate),
            "dark_rate": round_sig6(m.dark_rate),
        })).collect::<Vec<_>>(),
    })
}

fn crystals(a: &CrystalsArgs) -> Result<(), CliError> {
    let label = db_label(a.db.as_deref());
    let text = match &a.db {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| config_err(format!("cannot read {label}: {e}")))?,
        None => DEFAULT_DATABASE.to_string(),
    };
    let entries =
        parse_crystal_database_unchecked(&text).map_err(|e| config_err(format!("{label}: {e}")))?;

    if a.validate {
        let failures: Vec<String> = entries
            .iter()
            .filter_map(|c| c.validate().err())
            .map(|e| e.to_string())
            .collect();
        if !failures.is_empty() {
            return Err(CliError {
                code: 1,
                message: format!("{label}: {}", failures.join("; ")),
            });
        }
    }

    match a.format {
        Format::Csv => {
            println!("name,form,valid_min_nm,valid_max_nm,optic_axis_cut_deg");
            for c in &entries {
                let r = c.valid_range();
                println!(
                    "{},{},{},{},{}",
                    c.name(),
                    c.ordinary().form(),
                    wavelength(r.min_nm),
                    wavelength(r.max_nm),
                    angle(c.optic_axis_cut_deg())
                );
            }
        }
        Format::Json => {
            let list: Vec<_> = entries
                .iter()
                .map(|c| {
                    let r = c.valid_range();
                    json!({
                        "name": c.name(),
                        "form": c.ordinary().form().id(),
                        "valid_range_nm": [r.min_nm, r.max_nm],
                        "optic_axis_cut_deg": c.optic_axis_cut_deg(),
                        "ordinary": c.ordinary().coefficients(),
                        "extraordinary": c.extraordinary().coefficients(),
                    })
                })
                .collect();
            let doc = json!({ "database": label, "crystals": list });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
        }
    }
    if a.validate {
        eprintln!("{label}: {} crystal(s) valid", entries.len());
    }
    Ok(())
}
