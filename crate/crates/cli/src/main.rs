use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use ucasimir::curved::{
    f_pfa, f_ssa, phi_exact, phi_pfa, phi_ssa, sphere_universal_energy,
};
use ucasimir::planar::{total_planar_energy, universal_energy_per_area, DEFAULT_AREA};
use ucasimir::scenario::{
    crossover_finder, list_and_validate_materials, run_scenario_to, CrossoverFamily,
    ElectrolyteSpec, Scenario,
};
use ucasimir::units::Length;
use ucasimir::{
    CasimirError, CylinderPair, Electrolyte, MaterialModel, PlanarGeometry, Result, SpherePair,
    ThermalContext, TruncationConfig,
};

/// Thermal fluctuation-induced free energies between bodies in an electrolyte.
#[derive(Parser, Debug)]
#[command(name = "ucasimir", version)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Temperature in kelvin [default: 293, or the scenario value]
    #[arg(long, global = true)]
    temperature: Option<f64>,

    /// Monovalent salt concentration in mmol/L
    #[arg(long = "salt-mM", global = true, conflicts_with = "debye")]
    salt_mm: Option<f64>,

    /// Debye length, e.g. "0.8 nm"
    #[arg(long, global = true)]
    debye: Option<Length>,

    /// Relative tolerance for quadratures, Matsubara sums and multipole growth
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output directory for scenario runs
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two half-spaces or two slabs
    Planar {
        #[arg(long, allow_hyphen_values = true)]
        gap: Length,
        /// Slab width; half-spaces when omitted
        #[arg(long, allow_hyphen_values = true)]
        width: Option<Length>,
        #[command(flatten)]
        materials: MaterialArgs,
    },
    /// Universal term between two spheres
    Spheres {
        #[arg(long, allow_hyphen_values = true)]
        r1: Length,
        #[arg(long, allow_hyphen_values = true)]
        r2: Length,
        #[arg(long, allow_hyphen_values = true)]
        gap: Length,
    },
    /// Universal term between two parallel cylinders
    Cylinders {
        #[arg(long, allow_hyphen_values = true)]
        r1: Length,
        #[arg(long, allow_hyphen_values = true)]
        r2: Length,
        #[arg(long, allow_hyphen_values = true)]
        gap: Length,
        #[arg(long, allow_hyphen_values = true)]
        length: Length,
    },
    /// Scenario files
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Material files
    Materials {
        #[command(subcommand)]
        action: MaterialsAction,
    },
    /// Gap at which the universal energy equals a multiple of kBT
    Crossover {
        #[command(subcommand)]
        family: CrossoverArgs,
    },
}

#[derive(Args, Debug)]
struct MaterialArgs {
    /// Solvent model (JSON); with --bodies adds the electrolyte and nonuniversal terms
    #[arg(long, requires = "bodies")]
    medium: Option<PathBuf>,
    /// Body model (JSON)
    #[arg(long, requires = "medium")]
    bodies: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    /// Run a scenario and write <name>.csv and <name>.meta.toml
    Run { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum MaterialsAction {
    /// Load every *.json file and report eps(0), eps(i xi_1) and the mismatch vs water
    Validate { dir: PathBuf },
}

#[derive(Subcommand, Debug)]
enum CrossoverArgs {
    Spheres {
        #[arg(long, allow_hyphen_values = true)]
        r1: Length,
        #[arg(long, allow_hyphen_values = true)]
        r2: Length,
        /// Energy in units of kBT
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
    },
    /// Cylinders whose length scales with the gap
    Cylinders {
        #[arg(long, allow_hyphen_values = true)]
        r1: Length,
        #[arg(long, allow_hyphen_values = true)]
        r2: Length,
        #[arg(long)]
        length_over_gap: f64,
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
    },
}

impl Global {
    fn context(&self) -> Result<ThermalContext> {
        ThermalContext::new(self.temperature.unwrap_or(ucasimir::constants::ROOM_TEMPERATURE))
    }

    fn truncation(&self, base: TruncationConfig) -> Result<TruncationConfig> {
        let t = match self.tol {
            Some(tol) => base.with_tolerance(tol),
            None => base,
        };
        t.validate()?;
        Ok(t)
    }

    fn electrolyte(&self, solvent: MaterialModel) -> Result<Electrolyte> {
        match (self.salt_mm, self.debye) {
            (Some(c), _) => Electrolyte::monovalent_salt(solvent, c),
            (None, Some(l)) => Electrolyte::with_debye_length(solvent, l.meters()),
            (None, None) => Err(CasimirError::Config {
                field: "--salt-mM".into(),
                reason: "give --salt-mM or --debye together with material files".into(),
            }),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let CasimirError::NonConvergence { estimate, report, .. } = &e {
                eprintln!("last estimate {estimate:e}; {}", report.flags.join("; "));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    let started = Instant::now();
    g.truncation(TruncationConfig::default())?;
    let code = match &cli.command {
        Command::Planar {
            gap,
            width,
            materials,
        } => planar(g, *gap, *width, materials)?,
        Command::Spheres { r1, r2, gap } => {
            let ctx = g.context()?;
            let trunc = g.truncation(TruncationConfig::default())?;
            let pair = SpherePair::new(r1.meters(), r2.meters(), gap.meters())?;
            let (energy, r) = sphere_universal_energy(&pair, &ctx, &trunc.channel)?;
            println!("x = {:e}", pair.x());
            println!("f = {:e}", r.value);
            println!("f_pfa = {:e}", f_pfa(&pair));
            println!("f_ssa = {:e}", f_ssa(&pair));
            println!("energy = {:e} kBT = {energy:e} J", -r.value);
            println!("angular order = {}, achieved rel err = {:.2e}", r.angular_order, r.report.achieved_rel_err);
            0
        }
        Command::Cylinders { r1, r2, gap, length } => {
            let ctx = g.context()?;
            let trunc = g.truncation(TruncationConfig::default())?;
            let pair = CylinderPair::new(r1.meters(), r2.meters(), gap.meters(), length.meters())?;
            if let Some(w) = pair.length_warning() {
                log::warn!("{w}");
            }
            let r = phi_exact(&pair, &trunc.channel)?;
            let kbt = -pair.length / pair.gap * r.value;
            println!("x = {:e}", pair.x());
            println!("phi = {:e}", r.value);
            println!("phi_pfa = {:e}", phi_pfa(&pair));
            println!("phi_ssa = {:e}", phi_ssa(&pair));
            println!("energy = {kbt:e} kBT = {:e} J", kbt * ctx.thermal_energy());
            println!("angular order = {}, achieved rel err = {:.2e}", r.angular_order, r.report.achieved_rel_err);
            0
        }
        Command::Scenario {
            action: ScenarioAction::Run { file },
        } => scenario(g, file)?,
        Command::Materials {
            action: MaterialsAction::Validate { dir },
        } => {
            let report = list_and_validate_materials(dir, &g.context()?)?;
            print!("{report}");
            0
        }
        Command::Crossover { family } => {
            let trunc = g.truncation(TruncationConfig::default())?;
            let (family, threshold) = match *family {
                CrossoverArgs::Spheres { r1, r2, threshold } => (
                    CrossoverFamily::Spheres {
                        radius_1: r1.meters(),
                        radius_2: r2.meters(),
                    },
                    threshold,
                ),
                CrossoverArgs::Cylinders {
                    r1,
                    r2,
                    length_over_gap,
                    threshold,
                } => (
                    CrossoverFamily::Cylinders {
                        radius_1: r1.meters(),
                        radius_2: r2.meters(),
                        length_over_gap,
                    },
                    threshold,
                ),
            };
            let c = crossover_finder(family, threshold, &trunc.channel)?;
            println!("gap = {}", Length(c.gap));
            println!("x = {:.4}", c.x);
            println!("scattering = {:e}", c.scattering);
            println!("energy = {:e} kBT", c.energy_kbt);
            0
        }
    };
    info!("finished in {:.2?}", started.elapsed());
    Ok(code)
}

fn planar(g: &Global, gap: Length, width: Option<Length>, m: &MaterialArgs) -> Result<u8> {
    let ctx = g.context()?;
    let geom = match width {
        Some(w) => PlanarGeometry::slabs(gap.meters(), w.meters())?,
        None => PlanarGeometry::half_spaces(gap.meters())?,
    };
    // per µm², in kBT
    let per_um2 = |e: f64| e / geom.area * 1e-12 / ctx.thermal_energy();
    let (Some(medium), Some(bodies)) = (&m.medium, &m.bodies) else {
        let u = universal_energy_per_area(geom.gap, &ctx)? * DEFAULT_AREA;
        println!("universal = {:e} kBT/um^2 = {u:e} J/um^2", per_um2(u));
        return Ok(0);
    };
    let trunc = g.truncation(TruncationConfig::default())?;
    let medium = MaterialModel::load(medium)?;
    let bodies = MaterialModel::load(bodies)?;
    let electrolyte = g.electrolyte(medium.clone())?;
    let b = total_planar_energy(&geom, &medium, &electrolyte, &bodies, &ctx, &trunc)?;
    println!("debye length = {}", Length(electrolyte.debye_length(&ctx)));
    for (name, e) in [
        ("universal", b.universal),
        ("longitudinal", b.longitudinal),
        ("nonuniversal", b.nonuniversal_total),
        ("total", b.total),
    ] {
        println!("{name} = {:e} kBT/um^2 = {e:e} J/um^2", per_um2(e));
    }
    println!("universal/nonuniversal = {:e}", b.universal / b.nonuniversal_total);
    println!("matsubara terms = {}", b.convergence.matsubara_cutoff);
    for f in &b.convergence.flags {
        println!("flag: {f}");
    }
    let converged = b.convergence.matsubara_cutoff < trunc.matsubara_max_terms;
    Ok(if converged { 0 } else { 3 })
}

fn scenario(g: &Global, file: &Path) -> Result<u8> {
    let mut s = Scenario::load(file)?;
    if let Some(t) = g.temperature {
        s.temperature = t;
    }
    if let Some(c) = g.salt_mm {
        s.electrolyte = ElectrolyteSpec {
            salt_mm: Some(c),
            ..Default::default()
        };
    } else if let Some(l) = g.debye {
        s.electrolyte = ElectrolyteSpec {
            debye_length: Some(l),
            ..Default::default()
        };
    }
    s.truncation = g.truncation(s.truncation)?;
    s.validate()?;
    let csv = g.out.join(format!("{}.csv", s.name));
    let out = run_scenario_to(s, csv)?;
    println!("{}", out.csv.display());
    println!("{}", out.metadata.display());
    let bad = out.result.unconverged();
    if !bad.is_empty() {
        eprintln!("{} row(s) did not converge: {bad:?}", bad.len());
    }
    Ok(out.exit_code() as u8)
}
