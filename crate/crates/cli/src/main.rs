//! Batch front end: builds a model, runs one task, writes one output
//! file. Thread count is inherited from RAYON_NUM_THREADS.

mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use krein_core::{
    calibrate_rank_one_theta, calibrate_theta_for_coupling, density_scan, eigen_solve,
    krein_resolvent, recover_operator, verify, ExtensionSpec, KreinField, Model,
};

use config::{from_core, CliError, CommonArgs, RunConfig, EXIT_INVARIANT};
use output::{col, Cell, ColKind, Meta, Table};

#[derive(Parser)]
#[command(name = "krein", version, about = "Singular-perturbation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the Weyl function on a segment of complex points.
    WeylGrid(WeylArgs),
    /// Locate eigenvalues of the perturbed operator on a real interval.
    Spectrum(SpectrumArgs),
    /// Evaluate the perturbed resolvent at one complex point.
    Resolvent(ResolventArgs),
    /// Run the seeded invariant suite and report residuals.
    Verify(VerifyArgs),
    /// Scan the boundary spectral density on a real interval.
    Density(DensityArgs),
    /// Calibrate the scalar boundary parameter to a coupling strength.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct WeylArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Real parts of the segment endpoints (one value is held constant).
    #[arg(long, num_args = 1..=2, value_delimiter = ',', allow_negative_numbers = true)]
    zre: Option<Vec<f64>>,
    /// Imaginary parts of the segment endpoints.
    #[arg(long, num_args = 1..=2, value_delimiter = ',', allow_negative_numbers = true)]
    zim: Option<Vec<f64>>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Real scan interval, two endpoints inside the base resolvent set.
    #[arg(long, num_args = 1..=2, value_delimiter = ',', allow_negative_numbers = true)]
    interval: Option<Vec<f64>>,
    /// Number of scan grid points.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct ResolventArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Real part of the evaluation point.
    #[arg(long, allow_negative_numbers = true)]
    zre: Option<f64>,
    /// Imaginary part of the evaluation point.
    #[arg(long, allow_negative_numbers = true)]
    zim: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Real scan interval.
    #[arg(long, num_args = 1..=2, value_delimiter = ',', allow_negative_numbers = true)]
    interval: Option<Vec<f64>>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Distance to the real axis for the Stieltjes boundary values.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Target coupling calibrated into Theta before the scan (lattice models).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lattice delta strength; the coupling is -alpha / spacing.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Direct rank-one coupling for non-lattice models.
    #[arg(long, allow_negative_numbers = true)]
    coupling: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::WeylGrid(a) => cmd_weyl_grid(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::Resolvent(a) => cmd_resolvent(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Density(a) => cmd_density(a),
        Cmd::Calibrate(a) => cmd_calibrate(a),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn build_field(model: Model) -> Result<(KreinField, Option<krein_core::LatticeInfo>), CliError> {
    let lattice = model.lattice.clone();
    let field = KreinField::build(model.operator, model.trace).map_err(from_core)?;
    Ok((field, lattice))
}

fn interval_from(task: &config::TaskSection) -> Result<(f64, f64), CliError> {
    let iv = task
        .interval
        .as_ref()
        .ok_or_else(|| CliError::config("missing --interval a b"))?;
    if iv.len() != 2 || !(iv[0] < iv[1]) {
        return Err(CliError::config(format!("bad interval {iv:?}")));
    }
    Ok((iv[0], iv[1]))
}

fn cmd_weyl_grid(args: WeylArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    {
        let t = cfg.task_mut();
        if let Some(v) = &args.zre {
            t.zre = Some(v.clone());
        }
        if let Some(v) = &args.zim {
            t.zim = Some(v.clone());
        }
        if let Some(v) = args.grid {
            t.grid = Some(v);
        }
    }
    let model = cfg.build_model()?;
    let (field, _) = build_field(model)?;

    let task = cfg.task();
    let endpoints = |v: &Option<Vec<f64>>, what: &str| -> Result<(f64, f64), CliError> {
        match v.as_deref() {
            Some([a]) => Ok((*a, *a)),
            Some([a, b]) => Ok((*a, *b)),
            _ => Err(CliError::config(format!("missing --{what} (1 or 2 values)"))),
        }
    };
    let (re0, re1) = endpoints(&task.zre, "zre")?;
    let (im0, im1) = endpoints(&task.zim, "zim")?;
    let n = task.grid.unwrap_or(0);
    if n == 0 {
        return Err(CliError::config("empty grid: --grid must be >= 1"));
    }

    let k = field.aux_dim();
    let mut columns = vec![col("z", ColKind::Complex)];
    for i in 0..k {
        for j in 0..k {
            columns.push(col(format!("gamma_{i}_{j}"), ColKind::Complex));
        }
    }
    columns.push(col("min_eig_im_gamma", ColKind::Real));
    let mut table = Table::new(columns);

    for idx in 0..n {
        let t = if n == 1 { 0.0 } else { idx as f64 / (n - 1) as f64 };
        let z = Complex64::new(re0 + t * (re1 - re0), im0 + t * (im1 - im0));
        let sample = field.weyl(z).map_err(from_core)?;
        let mut row = vec![Cell::C(z)];
        for i in 0..k {
            for j in 0..k {
                row.push(Cell::C(sample.gamma()[(i, j)]));
            }
        }
        row.push(Cell::F(sample.min_eig_im()));
        table.push(row);
    }

    let meta = Meta {
        seed: cfg.seed(),
        config_toml: cfg.effective_toml(),
    };
    output::write_table(&cfg.out_path("weyl-grid")?, cfg.format()?, &meta, &table)
}

fn vectors_path(main_out: &PathBuf) -> PathBuf {
    let stem = main_out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let ext = main_out
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    main_out.with_file_name(format!("{stem}.vectors.{ext}"))
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    {
        let t = cfg.task_mut();
        if let Some(v) = &args.interval {
            t.interval = Some(v.clone());
        }
        if let Some(v) = args.grid {
            t.grid = Some(v);
        }
    }
    let model = cfg.build_model()?;
    let spec = cfg.extension(&model)?;
    let (field, _) = build_field(model)?;

    let interval = interval_from(cfg.task())?;
    let grid = cfg.task().grid.unwrap_or(200);
    let results = eigen_solve(&field, &spec, interval, grid).map_err(from_core)?;

    // Dense oracle: spectrum of the recovered operator, when affordable.
    let oracle_evs: Option<Vec<f64>> = if field.dim() <= cfg.oracle_cap() {
        let hat = recover_operator(&field, &spec, Complex64::new(0.0, 1.0)).map_err(from_core)?;
        Some(hat.eigenvalues().to_vec())
    } else {
        None
    };

    let out = cfg.out_path("spectrum")?;
    let vec_out = vectors_path(&out);

    let mut table = Table::new(vec![
        col("lambda", ColKind::Real),
        col("multiplicity", ColKind::Int),
        col("bc_residual", ColKind::Real),
        col("smallest_singular", ColKind::Real),
        col("oracle_match", ColKind::Str),
        col("vectors_file", ColKind::Str),
    ]);
    let mut vectors = Table::new(vec![
        col("eigen_index", ColKind::Int),
        col("lambda", ColKind::Real),
        col("component", ColKind::Int),
        col("value", ColKind::Complex),
    ]);

    for (idx, r) in results.iter().enumerate() {
        // Boundary-condition residual of each kernel column.
        let mut bc = 0.0f64;
        if let Some(theta) = spec.theta() {
            let gamma = field
                .weyl(Complex64::new(r.lambda, 0.0))
                .map_err(from_core)?;
            let m = theta + gamma.gamma();
            for j in 0..r.kernel_basis.ncols() {
                bc = bc.max((&m * r.kernel_basis.column(j)).norm());
            }
        }
        let oracle = match &oracle_evs {
            None => "skipped".to_string(),
            Some(evs) => {
                let tol = 1e-8 * r.lambda.abs().max(1.0);
                evs.iter().any(|&e| (e - r.lambda).abs() <= tol).to_string()
            }
        };
        table.push(vec![
            Cell::F(r.lambda),
            Cell::I(r.multiplicity as i64),
            Cell::F(bc),
            Cell::F(r.smallest_singular),
            Cell::S(oracle),
            Cell::S(vec_out.display().to_string()),
        ]);
        for c in 0..r.eigenvectors.ncols() {
            for i in 0..r.eigenvectors.nrows() {
                vectors.push(vec![
                    Cell::I(idx as i64),
                    Cell::F(r.lambda),
                    Cell::I(i as i64),
                    Cell::C(r.eigenvectors[(i, c)]),
                ]);
            }
        }
    }

    let meta = Meta {
        seed: cfg.seed(),
        config_toml: cfg.effective_toml(),
    };
    output::write_table(&out, cfg.format()?, &meta, &table)?;
    output::write_table(&vec_out, cfg.format()?, &meta, &vectors)
}

fn cmd_resolvent(args: ResolventArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    {
        let t = cfg.task_mut();
        if let Some(v) = args.zre {
            t.zre = Some(vec![v]);
        }
        if let Some(v) = args.zim {
            t.zim = Some(vec![v]);
        }
    }
    let model = cfg.build_model()?;
    let spec = cfg.extension(&model)?;
    let (field, _) = build_field(model)?;

    let task = cfg.task();
    let single = |v: &Option<Vec<f64>>, what: &str| -> Result<f64, CliError> {
        match v.as_deref() {
            Some([x]) => Ok(*x),
            _ => Err(CliError::config(format!("missing --{what} (single value)"))),
        }
    };
    let z = Complex64::new(single(&task.zre, "zre")?, single(&task.zim, "zim")?);
    let r = krein_resolvent(&field, &spec, z).map_err(from_core)?;

    let mut table = Table::new(vec![
        col("row", ColKind::Int),
        col("colidx", ColKind::Int),
        col("value", ColKind::Complex),
    ]);
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            table.push(vec![
                Cell::I(i as i64),
                Cell::I(j as i64),
                Cell::C(r[(i, j)]),
            ]);
        }
    }
    let meta = Meta {
        seed: cfg.seed(),
        config_toml: cfg.effective_toml(),
    };
    output::write_table(&cfg.out_path("resolvent")?, cfg.format()?, &meta, &table)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&args.common)?;
    let model = cfg.build_model()?;
    // The extension parameter is optional here; without one the suite
    // checks the field and boundary-triple identities only.
    let spec: Option<ExtensionSpec> = match cfg.extension(&model) {
        Ok(s) => Some(s),
        Err(_) => None,
    };
    let (field, _) = build_field(model)?;

    let report =
        verify::run_suite(&field, spec.as_ref(), cfg.seed(), cfg.oracle_cap()).map_err(from_core)?;

    let mut table = Table::new(vec![
        col("check", ColKind::Str),
        col("max_residual", ColKind::Real),
        col("tolerance", ColKind::Real),
        col("pass", ColKind::Bool),
    ]);
    for c in &report.checks {
        println!(
            "{}: max residual {:.3e} (tolerance {:.3e}) -> {}",
            c.name,
            c.max_residual,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        );
        table.push(vec![
            Cell::S(c.name.clone()),
            Cell::F(c.max_residual),
            Cell::F(c.tolerance),
            Cell::B(c.pass),
        ]);
    }
    let meta = Meta {
        seed: cfg.seed(),
        config_toml: cfg.effective_toml(),
    };
    output::write_table(&cfg.out_path("verify")?, cfg.format()?, &meta, &table)?;
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(CliError {
            code: EXIT_INVARIANT,
            message: format!("invariant failed: {}", c.name),
        }),
    }
}

fn cmd_density(args: DensityArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    {
        let t = cfg.task_mut();
        if let Some(v) = &args.interval {
            t.interval = Some(v.clone());
        }
        if let Some(v) = args.grid {
            t.grid = Some(v);
        }
        if let Some(v) = args.epsilon {
            t.epsilon = Some(v);
        }
        if let Some(v) = args.alpha {
            t.alpha = Some(v);
        }
    }
    let model = cfg.build_model()?;
    let alpha = cfg.task().alpha;
    let spec = match alpha {
        // Calibrated lattice run: Theta comes from the coupling.
        Some(_) => None,
        None => Some(cfg.extension(&model)?),
    };
    let (field, lattice) = build_field(model)?;
    let spec = match (spec, alpha) {
        (Some(s), _) => s,
        (None, Some(a)) => {
            let lattice = lattice
                .ok_or_else(|| CliError::config("--alpha calibration needs a lattice model"))?;
            calibrate_theta_for_coupling(&field, &lattice, a).map_err(from_core)?
        }
        (None, None) => unreachable!(),
    };

    let interval = interval_from(cfg.task())?;
    let grid = cfg.task().grid.unwrap_or(201);
    let epsilon = cfg
        .task()
        .epsilon
        .ok_or_else(|| CliError::config("missing --epsilon"))?;
    if !(epsilon > 0.0) {
        return Err(CliError::config(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }

    let scan = density_scan(&field, &spec, interval, grid, epsilon).map_err(from_core)?;

    let k = field.aux_dim();
    let mut columns = vec![
        col("lambda", ColKind::Real),
        col("epsilon", ColKind::Real),
        col("trace_density", ColKind::Real),
        col("states_density", ColKind::Real),
    ];
    for i in 0..k {
        for j in 0..k {
            columns.push(col(format!("density_{i}_{j}"), ColKind::Complex));
        }
    }
    columns.push(col("status", ColKind::Str));
    let mut table = Table::new(columns);

    for (lambda, sample) in &scan {
        let mut row = vec![Cell::F(*lambda), Cell::F(epsilon)];
        match sample {
            Ok(s) => {
                row.push(Cell::F(s.trace_density));
                row.push(Cell::F(s.states_density));
                for i in 0..k {
                    for j in 0..k {
                        row.push(Cell::C(s.density[(i, j)]));
                    }
                }
                row.push(Cell::S("ok".into()));
            }
            Err(e) => {
                row.push(Cell::F(0.0));
                row.push(Cell::F(0.0));
                for _ in 0..k * k {
                    row.push(Cell::C(Complex64::new(0.0, 0.0)));
                }
                row.push(Cell::S(e.to_string()));
            }
        }
        table.push(row);
    }

    let meta = Meta {
        seed: cfg.seed(),
        config_toml: cfg.effective_toml(),
    };
    output::write_table(&cfg.out_path("density")?, cfg.format()?, &meta, &table)
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::resolve(&args.common)?;
    {
        let t = cfg.task_mut();
        if let Some(v) = args.alpha {
            t.alpha = Some(v);
        }
        if let Some(v) = args.coupling {
            t.coupling = Some(v);
        }
    }
    let model = cfg.build_model()?;
    let (field, lattice) = build_field(model)?;

    let task = cfg.task();
    let (spec, coupling) = match (task.alpha, task.coupling) {
        (Some(a), None) => {
            let lattice = lattice
                .ok_or_else(|| CliError::config("--alpha calibration needs a lattice model"))?;
            let spec = calibrate_theta_for_coupling(&field, &lattice, a).map_err(from_core)?;
            (spec, -a / lattice.spacing)
        }
        (None, Some(c)) => (
            calibrate_rank_one_theta(&field, c).map_err(from_core)?,
            c,
        ),
        (None, None) => return Err(CliError::config("missing --alpha or --coupling")),
        (Some(_), Some(_)) => {
            return Err(CliError::config("--alpha and --coupling are exclusive"))
        }
    };
    let theta = spec.theta().expect("calibration yields an operator")[(0, 0)].re;

    let mut table = Table::new(vec![
        col("theta", ColKind::Real),
        col("coupling", ColKind::Real),
    ]);
    table.push(vec![Cell::F(theta), Cell::F(coupling)]);
    println!("theta = {theta:.12e} (coupling {coupling:.12e})");

    let meta = Meta {
        seed: cfg.seed(),
        config_toml: cfg.effective_toml(),
    };
    output::write_table(&cfg.out_path("calibrate")?, cfg.format()?, &meta, &table)
}
