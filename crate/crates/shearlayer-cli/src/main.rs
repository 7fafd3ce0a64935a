//! Command-line front end: single-point diagnostics, mode finding, and the
//! figure-reproduction sweeps. All numeric work lives in the library; this
//! binary parses flags, builds material parameters, and formats output.

use clap::{Args, Parser, Subcommand, ValueEnum};
use shearlayer::asymptotic::{v_family, case_a_speed, case_b_speed, Family, ModeSpeed};
use shearlayer::dispersion::{determinant, find_modes_with_tol, LayerGeometry};
use shearlayer::material::{case_a_params, case_b_params, MaterialParams, ShearState};
use shearlayer::quartic::{coeffs_compact, solve_quartic};
use shearlayer::sweep::{compare_report, emit, run_sweep, EmitFormat, FamilyChoice, SweepSpec};
use shearlayer::{Error, Result};
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "shearlayer",
    about = "Dispersion of small-amplitude waves in a sheared incompressible elastic layer",
    long_about = "Evaluates the traction-free-layer dispersion equation, its decay-exponent \
                  quartic, and the high-speed asymptotic mode families, for materials in the \
                  ideal classes A and B or with raw moduli.\n\n\
                  Reporting conventions: exact roots are matched to asymptotic predictions \
                  within a 25% window, and asymptotic speeds with kh*v*sqrt(a) below 3*pi are \
                  flagged low-confidence.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roots of the decay-exponent quartic at one dimensionless speed
    Roots {
        #[command(flatten)]
        material: MaterialArgs,
        /// Dimensionless wave speed v (zeta = v^2)
        #[arg(long)]
        v: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dispersion determinant residual over a speed range
    Residual {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Lower end of the speed range
        #[arg(long, default_value_t = 0.0)]
        v_min: f64,
        /// Upper end of the speed range
        #[arg(long, default_value_t = 10.0)]
        v_max: f64,
        /// Number of evaluation points
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact dispersion modes in a speed window
    Modes {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Lower end of the search window
        #[arg(long, default_value_t = 1e-3)]
        v_min: f64,
        /// Upper end of the search window
        #[arg(long, default_value_t = 10.0)]
        v_max: f64,
        /// Number of scan points
        #[arg(long, default_value_t = 20001)]
        grid: usize,
        /// Bracket width at which refinement stops
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Asymptotic mode speeds from the closed-form families
    Asymptotic {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Mode index n
        #[arg(long)]
        n: u32,
        /// Mode family: 1, 2, or both
        #[arg(long, default_value = "both")]
        family: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact roots against asymptotic predictions at one kh
    Compare {
        #[command(flatten)]
        material: MaterialArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Largest mode index to report
        #[arg(long)]
        n: u32,
        /// Mode family: 1, 2, or both
        #[arg(long, default_value = "both")]
        family: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parameter sweep from a JSON configuration file
    Sweep {
        /// Path to a JSON file mirroring the sweep configuration fields
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct MaterialArgs {
    /// Material class: A, B, or raw
    #[arg(long, default_value = "A")]
    case: String,
    /// Amount of shear (alternative to --lambda)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Principal stretch (alternative to --epsilon)
    #[arg(long)]
    lambda: Option<f64>,
    /// First modulus, case raw only
    #[arg(long)]
    alpha: Option<f64>,
    /// Second modulus, case raw only
    #[arg(long)]
    beta: Option<f64>,
    /// Third modulus, case raw only
    #[arg(long)]
    gamma: Option<f64>,
    /// Normalized normal stress entering the boundary conditions
    #[arg(long, default_value_t = 0.0)]
    pbar: f64,
}

#[derive(Args)]
struct GeometryArgs {
    /// Wavenumber-thickness product
    #[arg(long, default_value_t = 1.0)]
    kh: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl MaterialArgs {
    fn build(&self) -> Result<MaterialParams> {
        let stretch = |field: &str| -> Result<f64> {
            match (self.epsilon, self.lambda) {
                (Some(_), Some(_)) => Err(Error::config(
                    "epsilon",
                    "give either --epsilon or --lambda, not both",
                )),
                (Some(e), None) => Ok(ShearState::from_amount(e)?.lambda),
                (None, Some(l)) => Ok(l),
                (None, None) => {
                    if field.is_empty() {
                        Ok(1.0)
                    } else {
                        Err(Error::config(field, "required: give --epsilon or --lambda"))
                    }
                }
            }
        };
        match self.case.as_str() {
            "A" | "a" => {
                self.reject_moduli()?;
                case_a_params(stretch("")?)?.with_p_bar(self.pbar)
            }
            "B" | "b" => {
                self.reject_moduli()?;
                case_b_params(stretch("epsilon")?)?.with_p_bar(self.pbar)
            }
            "raw" => {
                if self.epsilon.is_some() || self.lambda.is_some() {
                    return Err(Error::config(
                        "epsilon",
                        "not allowed with --case raw; the stretch follows from the moduli",
                    ));
                }
                let need = |name: &str, x: Option<f64>| {
                    x.ok_or_else(|| Error::config(name, "required for --case raw"))
                };
                MaterialParams::from_moduli(
                    need("alpha", self.alpha)?,
                    need("beta", self.beta)?,
                    need("gamma", self.gamma)?,
                )?
                .with_p_bar(self.pbar)
            }
            other => Err(Error::config(
                "case",
                format!("must be A, B, or raw, got {other:?}"),
            )),
        }
    }

    fn reject_moduli(&self) -> Result<()> {
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if x.is_some() {
                return Err(Error::config(name, "only allowed with --case raw"));
            }
        }
        Ok(())
    }
}

fn parse_family(text: &str) -> Result<FamilyChoice> {
    match text {
        "1" => Ok(FamilyChoice::One),
        "2" => Ok(FamilyChoice::Two),
        "both" => Ok(FamilyChoice::Both),
        other => Err(Error::config(
            "family",
            format!("must be 1, 2, or both, got {other:?}"),
        )),
    }
}

impl OutputArgs {
    fn write_with(&self, body: impl FnOnce(&mut dyn Write, Format) -> Result<()>) -> Result<()> {
        match &self.out {
            Some(path) => {
                let mut file = File::create(path)?;
                body(&mut file, self.format)?;
                file.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                body(&mut lock, self.format)?;
                lock.flush()?;
            }
        }
        Ok(())
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn json_out(dest: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *dest, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(dest)?;
    Ok(())
}

fn cmd_roots(material: &MaterialArgs, v: f64, output: &OutputArgs) -> Result<()> {
    let params = material.build()?;
    let coeffs = coeffs_compact(params.delta, params.shear.epsilon, v * v)?;
    let quartet = solve_quartic(&coeffs)?;
    let labels = ["s1", "s1_bar", "s2", "s2_bar"];
    output.write_with(|dest, format| match format {
        Format::Csv => {
            writeln!(dest, "root,re,im")?;
            for (label, root) in labels.iter().zip(quartet.roots()) {
                writeln!(dest, "{label},{},{}", root.re, root.im)?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<_> = labels
                .iter()
                .zip(quartet.roots())
                .map(|(label, root)| {
                    serde_json::json!({"root": label, "re": root.re, "im": root.im})
                })
                .collect();
            json_out(dest, &serde_json::Value::Array(rows))
        }
    })
}

fn cmd_residual(
    material: &MaterialArgs,
    geometry: &GeometryArgs,
    v_min: f64,
    v_max: f64,
    grid: usize,
    output: &OutputArgs,
) -> Result<()> {
    let params = material.build()?;
    let geometry = LayerGeometry::new(geometry.kh)?;
    if !(v_min.is_finite() && v_max.is_finite()) || v_min < 0.0 || v_max <= v_min {
        return Err(Error::config("v_min", "need 0 <= v_min < v_max, both finite"));
    }
    if grid < 2 {
        return Err(Error::config("grid", "need at least 2 points"));
    }
    let step = (v_max - v_min) / (grid - 1) as f64;
    let mut samples = Vec::with_capacity(grid);
    for i in 0..grid {
        let v = v_min + step * i as f64;
        samples.push((v, determinant(v * v, &geometry, &params)?));
    }
    output.write_with(|dest, format| match format {
        Format::Csv => {
            writeln!(dest, "v,residual,imag_leak,perturbed")?;
            for (v, s) in &samples {
                writeln!(dest, "{v},{},{},{}", s.residual, s.imag_leak, s.perturbed)?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<_> = samples
                .iter()
                .map(|(v, s)| {
                    serde_json::json!({
                        "v": v,
                        "residual": s.residual,
                        "imag_leak": s.imag_leak,
                        "perturbed": s.perturbed,
                    })
                })
                .collect();
            json_out(dest, &serde_json::Value::Array(rows))
        }
    })
}

fn cmd_modes(
    material: &MaterialArgs,
    geometry: &GeometryArgs,
    v_min: f64,
    v_max: f64,
    grid: usize,
    tol: f64,
    output: &OutputArgs,
) -> Result<()> {
    let params = material.build()?;
    let geometry = LayerGeometry::new(geometry.kh)?;
    let scan = find_modes_with_tol(&geometry, &params, v_min, v_max, grid, tol)?;
    let rows = |kind: &'static str, ms: &[ModeSpeed]| -> Vec<(String, f64)> {
        ms.iter().map(|m| (kind.to_string(), m.v)).collect::<Vec<_>>()
    };
    let mut all = rows("mode", &scan.modes);
    all.extend(rows("tangential-candidate", &scan.candidates));
    output.write_with(|dest, format| match format {
        Format::Csv => {
            writeln!(dest, "kind,v")?;
            for (kind, v) in &all {
                writeln!(dest, "{kind},{v}")?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<_> = all
                .iter()
                .map(|(kind, v)| serde_json::json!({"kind": kind, "v": v}))
                .collect();
            json_out(dest, &serde_json::Value::Array(rows))
        }
    })
}

fn asymptotic_rows(
    material: &MaterialArgs,
    kh: f64,
    n: u32,
    family: FamilyChoice,
) -> Result<Vec<ModeSpeed>> {
    let params = material.build()?;
    let epsilon = params.shear.epsilon;
    let a = 1.0 + params.delta;
    let mut rows = Vec::new();
    for fam in family.families() {
        let speed = match material.case.as_str() {
            "A" | "a" => case_a_speed(n, kh, fam)?,
            "B" | "b" => case_b_speed(n, kh, epsilon, fam)?,
            _ => v_family(n, kh, a, fam)?,
        };
        rows.push(speed);
    }
    Ok(rows)
}

fn cmd_asymptotic(
    material: &MaterialArgs,
    geometry: &GeometryArgs,
    n: u32,
    family: &str,
    output: &OutputArgs,
) -> Result<()> {
    let rows = asymptotic_rows(material, geometry.kh, n, parse_family(family)?)?;
    output.write_with(|dest, format| match format {
        Format::Csv => {
            writeln!(dest, "family,n,v,provenance,flags")?;
            for m in &rows {
                let flags = if m.low_confidence { "low-confidence" } else { "" };
                writeln!(
                    dest,
                    "{},{},{},asymptotic,{flags}",
                    m.family.map(Family::index).unwrap_or(0),
                    m.n.unwrap_or(0),
                    m.v
                )?;
            }
            Ok(())
        }
        Format::Json => {
            let value = serde_json::to_value(&rows).map_err(|e| Error::Io(e.to_string()))?;
            json_out(dest, &value)
        }
    })
}

fn cmd_compare(
    material: &MaterialArgs,
    geometry: &GeometryArgs,
    n: u32,
    family: &str,
    output: &OutputArgs,
) -> Result<()> {
    let params = material.build()?;
    let report = compare_report(geometry.kh, &params, n, parse_family(family)?)?;
    output.write_with(|dest, format| match format {
        Format::Csv => {
            // leftover roots appear last with empty family/n/v_asym fields
            writeln!(dest, "family,n,v_asym,v_exact,rel_err,flags")?;
            for r in &report.rows {
                let flags = if r.low_confidence { "low-confidence" } else { "" };
                writeln!(
                    dest,
                    "{},{},{},{},{},{flags}",
                    r.family,
                    r.n,
                    r.v_asym,
                    fmt_opt(r.v_exact),
                    fmt_opt(r.rel_err)
                )?;
            }
            for v in &report.leftover_exact {
                writeln!(dest, ",,,{v},,")?;
            }
            Ok(())
        }
        Format::Json => {
            let value = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
            json_out(dest, &value)
        }
    })
}

fn cmd_sweep(config: &PathBuf, output: &OutputArgs) -> Result<()> {
    let text = std::fs::read_to_string(config)?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| Error::config("config", format!("{}: {e}", config.display())))?;
    let rows = run_sweep(&spec)?;
    output.write_with(|dest, format| {
        let format = match format {
            Format::Csv => EmitFormat::Csv,
            Format::Json => EmitFormat::Json,
        };
        emit(&rows, format, dest)
    })
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Roots { material, v, output } => cmd_roots(material, *v, output),
        Command::Residual {
            material,
            geometry,
            v_min,
            v_max,
            grid,
            output,
        } => cmd_residual(material, geometry, *v_min, *v_max, *grid, output),
        Command::Modes {
            material,
            geometry,
            v_min,
            v_max,
            grid,
            tol,
            output,
        } => cmd_modes(material, geometry, *v_min, *v_max, *grid, *tol, output),
        Command::Asymptotic {
            material,
            geometry,
            n,
            family,
            output,
        } => cmd_asymptotic(material, geometry, *n, family, output),
        Command::Compare {
            material,
            geometry,
            n,
            family,
            output,
        } => cmd_compare(material, geometry, *n, family, output),
        Command::Sweep { config, output } => cmd_sweep(config, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
