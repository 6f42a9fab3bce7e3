use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use dmsoliton::dispersion::{density_psi, DispersionProfile, QuadMeasure};
use dmsoliton::dynamics::{averaged_evolve, breather_error, split_step, Trajectory};
use dmsoliton::field::{ChirpedGaussian, Field, LatticeField, WaveField};
use dmsoliton::functional::Functional;
use dmsoliton::io::{format_check, format_field, format_measure, format_report, read_field, write_field, AnyField};
use dmsoliton::solver::{
    initial_continuous, initial_discrete, maximize_continuous, maximize_discrete, minimize_energy, SolveReport,
};
use dmsoliton::verify::run_suite_seeded;

use crate::config::{Case, RunConfig};
use crate::{CliError, SimulateArgs};

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("out: cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn solve_field(cfg: &RunConfig) -> Result<(AnyField, SolveReport), CliError> {
    let lambda = cfg.lambda()?;
    let d_av = cfg.d_av()?;
    let opts = cfg.solver_options()?;
    let measure = cfg.measure()?;
    Ok(match cfg.case() {
        Case::Continuous => {
            let grid = cfg.grid()?;
            let (f, r) = if d_av > 0.0 {
                minimize_energy(
                    initial_continuous(grid, lambda, opts.seed)?,
                    lambda,
                    d_av,
                    &measure,
                    &opts,
                )?
            } else {
                maximize_continuous(lambda, &measure, grid, &opts)?
            };
            (AnyField::Grid(f), r)
        }
        Case::Discrete => {
            let lattice = cfg.lattice()?;
            let (f, r) = if d_av > 0.0 {
                minimize_energy(
                    initial_discrete(lattice, lambda, opts.seed)?,
                    lambda,
                    d_av,
                    &measure,
                    &opts,
                )?
            } else {
                maximize_discrete(lambda, &measure, lattice, &opts)?
            };
            (AnyField::Lattice(f), r)
        }
    })
}

pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let (field, report) = solve_field(cfg)?;
    let dir = prepare_out(cfg)?;
    write_field(&dir.join("field.txt"), &field)?;
    fs::write(dir.join("report.txt"), format_report(&report) + "\n")?;
    println!(
        "lambda={} omega={:.12} P={:.12} residual={:.3e} iterations={} converged={}",
        report.lambda, report.omega, report.p_value, report.residual, report.iterations, report.converged
    );
    if let Some(h) = report.energy {
        println!("energy={h:.12} threshold_suspected={}", report.threshold_suspected);
    }
    if report.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "residual {:.3e} after {} iterations; report written to {}",
            report.residual,
            report.iterations,
            dir.display()
        )))
    }
}

pub fn map(cfg: &RunConfig) -> Result<(), CliError> {
    let profile = cfg
        .profile()?
        .ok_or_else(|| CliError::Usage("profile: map needs --profile".into()))?;
    let measure = cfg.measure()?;
    let dir = prepare_out(cfg)?;
    fs::write(dir.join("measure.txt"), format_measure(&measure))?;

    // Density table over the range of D, skipping its critical values.
    let samples: Vec<f64> = (0..=2000)
        .map(|j| profile.cumulative_periodic(-1.0 + j as f64 / 1000.0))
        .collect();
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut table = String::from("# tau psi\n");
    let rows = 200;
    for j in 0..rows {
        let tau = lo + (hi - lo) * (j as f64 + 0.5) / rows as f64;
        if let Ok(psi) = density_psi(&profile, tau) {
            let _ = writeln!(table, "{tau:.12e} {psi:.12e}");
        }
    }
    fs::write(dir.join("density.txt"), table)?;
    println!(
        "nodes={} mass={:.12} support=[{:.6}, {:.6}]",
        measure.len(),
        measure.mass(),
        lo,
        hi
    );
    Ok(())
}

pub fn verify(cfg: &RunConfig, names: &[String]) -> Result<(), CliError> {
    let results = run_suite_seeded(names, cfg.seed)?;
    let mut text = String::new();
    for r in &results {
        let line = format_check(r);
        println!("{line}");
        text.push_str(&line);
        text.push('\n');
    }
    if cfg.output.dir.is_some() {
        let dir = prepare_out(cfg)?;
        fs::write(dir.join("checks.txt"), text)?;
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

fn write_trajectory<F: Field>(dir: &Path, traj: &Trajectory<F>, wrap: impl Fn(&F) -> AnyField) -> Result<(), CliError> {
    let mut index = String::from("# time path\n");
    for (i, (t, f)) in traj.times.iter().zip(&traj.fields).enumerate() {
        let name = format!("snapshot_{i:05}.txt");
        fs::write(dir.join(&name), format_field(&wrap(f)))?;
        let _ = writeln!(index, "{t:.12e} {name}");
    }
    fs::write(dir.join("trajectory.txt"), index)?;
    println!("snapshots={} norm_drift={:.3e}", traj.fields.len(), traj.norm_drift);
    Ok(())
}

fn initial_field(cfg: &RunConfig, path: Option<&Path>) -> Result<AnyField, CliError> {
    if let Some(p) = path {
        if !p.exists() {
            return Err(CliError::Usage(format!("field: {} does not exist", p.display())));
        }
        return read_field(p).map_err(|e| CliError::Usage(format!("field: {e}")));
    }
    let lambda = cfg.lambda()?;
    Ok(match cfg.case() {
        Case::Continuous => {
            let g = ChirpedGaussian::normalized(Complex64::new(1.0, 0.0))?.sample(cfg.grid()?);
            AnyField::Grid(g.normalized(lambda)?)
        }
        Case::Discrete => {
            let lattice = cfg.lattice()?;
            AnyField::Lattice(
                LatticeField::from_fn(lattice, |x| Complex64::new((-(x * x) as f64 / 9.0).exp(), 0.0))
                    .normalized(lambda)?,
            )
        }
    })
}

fn require_profile(cfg: &RunConfig) -> Result<DispersionProfile, CliError> {
    cfg.profile()?
        .ok_or_else(|| CliError::Usage("profile: this mode needs --profile".into()))
}

pub fn simulate(cfg: &RunConfig, args: &SimulateArgs) -> Result<(), CliError> {
    let dy = &cfg.dynamics;
    let mode = args.mode.clone().or(dy.mode.clone()).unwrap_or_else(|| "split".into());
    let field_path = args.field.clone().or(dy.field.clone());
    let eps_list = args.eps.clone().or(dy.eps.clone());
    let t_end = args.t_end.or(dy.t_end).unwrap_or(1.0);
    let snapshots = args.snapshots.or(dy.snapshots).unwrap_or(10);
    let dt = args.dt.or(dy.dt);
    match mode.as_str() {
        "split" => {
            let mut profile = require_profile(cfg)?;
            if let Some(eps) = eps_list.as_ref().and_then(|e| e.first()) {
                profile = profile
                    .with_eps(*eps)
                    .map_err(|e| CliError::Usage(format!("eps: {e}")))?;
            }
            let dt = dt.unwrap_or(profile.eps() / 50.0);
            let u0 = initial_field(cfg, field_path.as_deref())?;
            let dir = prepare_out(cfg)?;
            match u0 {
                AnyField::Grid(f) => {
                    let traj = split_step(&f, &profile, t_end, dt, snapshots)?;
                    write_trajectory(&dir, &traj, |f: &WaveField| AnyField::Grid(f.clone()))
                }
                AnyField::Lattice(f) => {
                    let traj = split_step(&f, &profile, t_end, dt, snapshots)?;
                    write_trajectory(&dir, &traj, |f: &LatticeField| AnyField::Lattice(f.clone()))
                }
            }
        }
        "averaged" => {
            let measure = cfg.measure()?;
            let d_av = cfg.d_av()?;
            let dt = dt.unwrap_or(0.01);
            let v0 = initial_field(cfg, field_path.as_deref())?;
            let dir = prepare_out(cfg)?;
            match v0 {
                AnyField::Grid(f) => {
                    let traj = averaged_evolve(&f, d_av, &measure, t_end, dt, snapshots)?;
                    write_trajectory(&dir, &traj, |f: &WaveField| AnyField::Grid(f.clone()))
                }
                AnyField::Lattice(f) => {
                    let traj = averaged_evolve(&f, d_av, &measure, t_end, dt, snapshots)?;
                    write_trajectory(&dir, &traj, |f: &LatticeField| AnyField::Lattice(f.clone()))
                }
            }
        }
        "breather" => breather_study(
            cfg,
            field_path.as_deref(),
            eps_list,
            t_end,
            args.steps_per_eps.or(dy.steps_per_eps),
        ),
        other => Err(CliError::Usage(format!(
            "mode: unknown mode `{other}` (use split, averaged or breather)"
        ))),
    }
}

fn omega_of<F: Field>(f: &F, measure: &QuadMeasure, d_av: f64) -> Result<f64, CliError> {
    let fun = Functional::for_field(f, measure);
    let lambda = f.norm_sqr();
    if lambda == 0.0 {
        return Err(CliError::Usage("field: breather study needs a nonzero field".into()));
    }
    Ok((fun.phi(f)? - d_av * fun.stiffness(f)?) / lambda)
}

fn breather_study(
    cfg: &RunConfig,
    field_path: Option<&Path>,
    eps_list: Option<Vec<f64>>,
    t_end: f64,
    steps_per_eps: Option<usize>,
) -> Result<(), CliError> {
    let profile = require_profile(cfg)?;
    let measure = cfg.measure()?;
    let eps_list = eps_list.unwrap_or_else(|| vec![0.1, 0.05]);
    let steps = steps_per_eps.unwrap_or(50);
    if steps == 0 {
        return Err(CliError::Usage("steps_per_eps: must be at least 1".into()));
    }
    let f = match field_path {
        Some(_) => initial_field(cfg, field_path)?,
        None => solve_field(cfg)?.0,
    };
    let d_av = profile.d_av();
    let mut table = String::from("# eps error\n");
    let mut errors = Vec::new();
    for &eps in &eps_list {
        let p = profile
            .with_eps(eps)
            .map_err(|e| CliError::Usage(format!("eps: {e}")))?;
        let dt = eps / steps as f64;
        let e = match &f {
            AnyField::Grid(f) => breather_error(f, omega_of(f, &measure, d_av)?, &p, t_end, dt)?,
            AnyField::Lattice(f) => breather_error(f, omega_of(f, &measure, d_av)?, &p, t_end, dt)?,
        };
        let _ = writeln!(table, "{eps:e} {e:.12e}");
        println!("eps={eps} error={e:.6e}");
        errors.push(e);
    }
    for w in errors.windows(2) {
        println!("ratio={:.4}", w[1] / w[0]);
    }
    let dir = prepare_out(cfg)?;
    fs::write(dir.join("breather.txt"), table)?;
    Ok(())
}

pub fn eval(cfg: &RunConfig, path: &Path) -> Result<(), CliError> {
    let field = initial_field(cfg, Some(path))?;
    let measure = cfg.measure()?;
    let d_av = cfg.d_av()?;
    fn report<F: Field>(f: &F, measure: &QuadMeasure, d_av: f64) -> Result<(), CliError> {
        let fun = Functional::for_field(f, measure);
        let lambda = f.norm_sqr();
        let p = fun.phi(f)?;
        let h = fun.energy(f, d_av)?;
        print!("lambda={lambda:.15e} Q={p:.15e} energy={h:.15e}");
        if lambda > 0.0 {
            let omega = (p - d_av * fun.stiffness(f)?) / lambda;
            let res = fun.gt_residual(f, omega, d_av)?;
            print!(" omega={omega:.15e} residual={res:.3e}");
        }
        println!();
        Ok(())
    }
    match &field {
        AnyField::Grid(f) => report(f, &measure, d_av),
        AnyField::Lattice(f) => report(f, &measure, d_av),
    }
}
