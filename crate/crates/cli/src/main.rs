use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polarvi::harness::{
    bench, load_or_make_reference, make_reference, reference_path, run_energy_drift,
    run_order_study, simulate, write_csv, ReferenceKey, Scenario, SystemKind, LONG_STEPS,
};
use polarvi::tableau::Method;

#[derive(Parser)]
#[command(name = "polarvi", version, about = "Variational polar-decomposition integrators on SO(3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write the trajectory with state columns.
    Simulate(Common),
    /// Long run recording energy and orthogonality errors.
    EnergyDrift {
        #[command(flatten)]
        common: Common,
        /// Run 10⁵ steps unless --steps is given.
        #[arg(long)]
        long: bool,
    },
    /// Errors at time T against a cached high-accuracy reference.
    OrderStudy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reference: RefArgs,
        /// Comma-separated step sizes; fractions such as 1/14 are accepted.
        #[arg(long, default_value = "1/10,1/14,1/20,1/28", value_parser = parse_h_list)]
        h_list: HList,
        /// Inclusive `min,max` step-size range used for the fitted slope.
        #[arg(long, value_parser = parse_window)]
        slope_window: Option<(f64, f64)>,
    },
    /// Wall-clock timing of whole integrations.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Integrate and store a reference end state.
    MakeReference {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reference: RefArgs,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML file with the same keys as these flags; flags win.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_parser = parse_system)]
    system: Option<SystemKind>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long, value_parser = parse_fraction)]
    h: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Fixed-point tolerance [default: 1e-15].
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed-point iteration cap [default: 100].
    #[arg(long)]
    max_iter: Option<usize>,
    /// Use the reduced Lie–Poisson step (rigid-body only).
    #[arg(long)]
    reduced: bool,
    #[arg(long)]
    record_every: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference solution file.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args)]
struct RefArgs {
    #[arg(long, default_value_t = 0.5)]
    horizon: f64,
    #[arg(long, default_value = "gl3", value_parser = parse_method)]
    ref_method: Method,
    #[arg(long, default_value = "0.001", value_parser = parse_fraction)]
    ref_h: f64,
    /// Directory for cached references when --reference is not given.
    #[arg(long, default_value = ".polarvi-cache")]
    cache_dir: PathBuf,
}

impl Common {
    fn scenario(&self) -> polarvi::Result<Scenario> {
        let mut sc = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        if let Some(v) = self.system {
            sc.system = v;
        }
        if let Some(v) = self.method {
            sc.method = v;
            sc.tableau_a = None;
            sc.tableau_b = None;
            sc.tableau_c = None;
        }
        if let Some(v) = self.h {
            sc.h = v;
        }
        if let Some(v) = self.steps {
            sc.steps = v;
        }
        if let Some(v) = self.tol {
            sc.tol = v;
        }
        if let Some(v) = self.max_iter {
            sc.max_iter = v;
        }
        if self.reduced {
            sc.reduced = true;
        }
        if let Some(v) = self.record_every {
            sc.record_every = v;
        }
        if let Some(v) = &self.out {
            sc.out = Some(v.clone());
        }
        if let Some(v) = &self.reference {
            sc.reference = Some(v.clone());
        }
        sc.validate()?;
        Ok(sc)
    }
}

impl RefArgs {
    fn key(&self, sc: &Scenario) -> ReferenceKey {
        ReferenceKey {
            system: sc.system,
            horizon: self.horizon,
            method: self.ref_method,
            h: self.ref_h,
        }
    }

    fn path(&self, sc: &Scenario) -> PathBuf {
        sc.reference
            .clone()
            .unwrap_or_else(|| reference_path(&self.cache_dir, &self.key(sc)))
    }
}

fn parse_system(s: &str) -> Result<SystemKind, String> {
    s.parse().map_err(|e: polarvi::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: polarvi::Error| e.to_string())
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            num / den
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

#[derive(Clone)]
struct HList(Vec<f64>);

fn parse_h_list(s: &str) -> Result<HList, String> {
    s.split(',').map(parse_fraction).collect::<Result<_, _>>().map(HList)
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `min,max`")?;
    let (lo, hi) = (parse_fraction(lo)?, parse_fraction(hi)?);
    if lo > hi {
        return Err(format!("empty window {lo} > {hi}"));
    }
    Ok((lo, hi))
}

fn print_json<T: serde::Serialize>(value: &T) -> polarvi::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn create(path: &Path) -> polarvi::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> polarvi::Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let sc = common.scenario()?;
            let (report, _) = simulate(&sc, true)?;
            if let Some(path) = &sc.out {
                write_csv(create(path)?, &report.records)?;
            }
            print_json(&report.summary)
        }
        Command::EnergyDrift { common, long } => {
            let mut sc = common.scenario()?;
            if long && common.steps.is_none() {
                sc.steps = LONG_STEPS;
            }
            let report = run_energy_drift(&sc)?;
            if let Some(path) = &sc.out {
                write_csv(create(path)?, &report.records)?;
            }
            print_json(&report.summary)
        }
        Command::OrderStudy {
            common,
            reference,
            h_list,
            slope_window,
        } => {
            let sc = common.scenario()?;
            let path = reference.path(&sc);
            let (refsol, generated) = load_or_make_reference(&path, &sc, reference.key(&sc))?;
            if generated {
                eprintln!("polarvi: wrote reference {}", path.display());
            }
            let study = run_order_study(&sc, &refsol, &h_list.0, slope_window)?;
            if let Some(out) = &sc.out {
                study.write_csv(create(out)?)?;
            }
            print_json(&study)
        }
        Command::Bench { common, repeats } => {
            let sc = common.scenario()?;
            print_json(&bench(&sc, repeats)?)
        }
        Command::MakeReference { common, reference } => {
            let sc = common.scenario()?;
            let path = reference.path(&sc);
            let refsol = make_reference(&sc, reference.key(&sc))?;
            refsol.save(&path)?;
            eprintln!("polarvi: wrote reference {}", path.display());
            print_json(&refsol.header)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polarvi: error: {e}");
            ExitCode::FAILURE
        }
    }
}
