use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use opspline::geometry::{detect_cusps, Side};
use opspline::op_spline::{build_constraints, feasibility_residual, solve_op_spline};
use opspline::output::{export_report, fmt_real, render_svg, write_curves_csv, write_report_csv};
use opspline::pipeline::{
    cell_label, offset_spec, prepare, run_pipeline, Count, ExperimentReport, ModelKind, PipelineConfig,
    Prepared, Series, CUSP_GRID,
};
use opspline::Error;

#[derive(Parser, Debug)]
#[command(name = "opspline", version, about = "Regularized offsets and bi-offset reconstruction of planar curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select regularization weights by GCV and fit the generator models.
    Fit(Common),
    /// Fit the generators and build offset splines for every (tau, side).
    Offset(Common),
    /// Reconstruct the generator from its offsets (penalized model only unless --model is given).
    Bioffset(Common),
    /// Run the full experiment and write report.csv, metrics.csv, curves.csv and figure.svg.
    Pipeline(Common),
    /// Run the full experiment and print the MSE table of every model.
    Compare(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Builtin test function (p1, p2, line) or path to an x,y CSV file.
    #[arg(long, short = 'i')]
    input: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Offset distance; repeat for a sweep.
    #[arg(long = "tau", short = 't')]
    taus: Vec<f64>,
    /// interior or exterior; repeat for both.
    #[arg(long = "side")]
    sides: Vec<Side>,
    /// Generator models to fit: tp, pspline, spline; repeatable.
    #[arg(long = "model")]
    models: Vec<ModelKind>,
    /// Basis dimension or `auto`.
    #[arg(long)]
    n: Option<Count>,
    /// Sample count for builtin test functions.
    #[arg(long, short = 'm')]
    samples: Option<usize>,
    /// Standard deviation of the noise added to the ordinates.
    #[arg(long)]
    sigma: Option<f64>,
    /// Output directory.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> opspline::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if !self.taus.is_empty() {
            cfg.taus = self.taus.clone();
        }
        if !self.sides.is_empty() {
            cfg.sides = self.sides.clone();
        }
        if !self.models.is_empty() {
            cfg.models = self.models.clone();
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = Count::Fixed(v);
        }
        if let Some(v) = self.sigma {
            cfg.noise_sigma = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Fit(c) => fit(&c.config()?),
        Command::Offset(c) => offset(&c.config()?),
        Command::Bioffset(c) => {
            let mut cfg = c.config()?;
            if c.models.is_empty() {
                cfg.models = vec![ModelKind::Tp];
            }
            full(&cfg, false)
        }
        Command::Pipeline(c) => full(&c.config()?, false),
        Command::Compare(c) => full(&c.config()?, true),
    }
}

fn print_models(p: &Prepared) {
    println!("samples {} basis {}", p.dataset.len(), p.knots.dim());
    for m in &p.models {
        match m.selection {
            Some((params, score)) => println!(
                "{:<8} mu {:.6e} lambda {:.6e} gcv {:.6e}",
                m.kind.name(),
                params.mu,
                params.lambda,
                score
            ),
            None => println!("{:<8} interpolant", m.kind.name()),
        }
    }
}

fn write_plot(dir: &Path, curves: &[Series], p: &Prepared) -> Result<(), Failure> {
    write_curves_csv(&dir.join("curves.csv"), curves)?;
    let points: Vec<(f64, f64)> = p
        .dataset
        .xs()
        .iter()
        .copied()
        .zip(p.dataset.ys().iter().copied())
        .collect();
    render_svg(curves, &points, &dir.join("figure.svg"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn fit(cfg: &PipelineConfig) -> Result<(), Failure> {
    let p = prepare(cfg)?;
    print_models(&p);
    let curves = p
        .models
        .iter()
        .map(|m| Series::sample(m.kind.name(), &m.generator))
        .collect::<opspline::Result<Vec<_>>>()?;
    write_plot(&cfg.output_dir, &curves, &p)
}

fn offset(cfg: &PipelineConfig) -> Result<(), Failure> {
    let p = prepare(cfg)?;
    print_models(&p);
    let mut curves = Vec::new();
    let mut failed = None;
    for m in &p.models {
        curves.push(Series::sample(m.kind.name(), &m.generator)?);
    }
    println!("tau,side,model,cusps,offset_cusps,feasibility");
    for &tau in &cfg.taus {
        for &side in &cfg.sides {
            for m in &p.models {
                let outcome = offset_spec(cfg, &p.knots, tau, side).and_then(|spec| {
                    let cusps = detect_cusps(&m.generator, spec.signed_tau(), CUSP_GRID)?;
                    let system = build_constraints(&m.generator, &spec, &p.knots)?;
                    let f = solve_op_spline(&system, &p.knots)?;
                    let back = detect_cusps(&f, -spec.signed_tau(), CUSP_GRID)?;
                    Ok((cusps.len(), back.len(), feasibility_residual(&system, &f), f))
                });
                match outcome {
                    Ok((cusps, back, resid, f)) => {
                        println!("{tau},{side},{},{cusps},{back},{resid:.3e}", m.kind);
                        curves.push(Series::theoretical_offset(
                            cell_label(m.kind, "theoretical", side, tau),
                            &m.generator,
                            side.signed(tau),
                        )?);
                        curves.push(Series::sample(cell_label(m.kind, "offset", side, tau), &f)?);
                    }
                    Err(e) => {
                        println!("{tau},{side},{},error: {e}", m.kind);
                        if e.is_numerical() {
                            failed.get_or_insert(e);
                        }
                    }
                }
            }
        }
    }
    write_plot(&cfg.output_dir, &curves, &p)?;
    match failed {
        Some(e) => Err(Failure::Numerical(format!("some cells failed, first: {e}"))),
        None => Ok(()),
    }
}

fn print_table(report: &ExperimentReport) {
    let models: Vec<ModelKind> = report.prepared.models.iter().map(|m| m.kind).collect();
    print!("{:>6} {:>9}", "tau", "side");
    for m in &models {
        print!(" {:>14}", m.name());
    }
    println!();
    for cell in &report.cells {
        print!("{:>6} {:>9}", cell.tau, cell.side.name());
        for mc in &cell.models {
            match &mc.outcome {
                Ok(m) => print!(" {:>14.4e}", m.refined_error.mse_model),
                Err(_) => print!(" {:>14}", "failed"),
            }
        }
        println!();
    }
}

fn full(cfg: &PipelineConfig, compare: bool) -> Result<(), Failure> {
    let report = run_pipeline(cfg)?;
    print_models(&report.prepared);
    if compare {
        print_table(&report);
        write_report_csv(&cfg.output_dir.join("report.csv"), &report)?;
        println!("wrote {}", cfg.output_dir.join("report.csv").display());
    } else {
        let art = export_report(&report, &cfg.output_dir)?;
        for cell in &report.cells {
            for mc in &cell.models {
                if let Ok(m) = &mc.outcome {
                    println!(
                        "{},{},{},mse {},cusps {}",
                        cell.tau,
                        cell.side,
                        mc.model,
                        fmt_real(m.refined_error.mse_model),
                        m.cusps.len()
                    );
                }
            }
        }
        println!("wrote {}", art.report.parent().unwrap_or(Path::new(".")).display());
    }
    let failures = report.failures();
    for (tau, side, model, e) in &failures {
        eprintln!("cell tau={tau} side={side} model={model} failed: {e}");
    }
    match failures.iter().find(|f| f.3.is_numerical()) {
        Some(f) => Err(Failure::Numerical(format!("{} cell(s) failed, first: {}", failures.len(), f.3))),
        None if !failures.is_empty() => Err(Failure::Usage(failures[0].3.to_string())),
        None => Ok(()),
    }
}
