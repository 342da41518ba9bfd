//! Executes a [`RunConfig`] into result tables.
//!
//! Parameter points run in parallel; rows are always emitted in parameter
//! order (outer `h_i`, inner `h_c` or `g`), never completion order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ConfigError, Format, OmegaSetting, Protocol, RunConfig};
use super::table::{Column, Metadata, ResultTable};
use crate::bath::{BathCharger, BathSpec};
use crate::dicke::{build_lmg_hamiltonian, isotropic_energy, LmgParams};
use crate::ergotropy::subsystem_report;
use crate::error::Error;
use crate::quench::{uniform_time_grid, Quench, QuenchSpec};
use crate::spectral::diagonalize;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid parameter: {0}")]
    Parameter(Error),
    #[error("numeric invariant violated: {0}")]
    Numeric(Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::CriticalField => RunError::Parameter(e),
            _ => RunError::Numeric(e),
        }
    }
}

impl RunError {
    /// Process exit status: 2 for config problems, 3 for numeric
    /// failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Parameter(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

type RunResult<T> = Result<T, RunError>;

/// Tolerance for the closed-form versus numerical isotropic spectrum.
const ISOTROPIC_TOL: f64 = 1e-9;

fn params(config: &RunConfig, h: f64) -> RunResult<LmgParams> {
    let m = &config.model;
    Ok(LmgParams::new(m.n, m.lambda, m.gamma, h)?)
}

fn h_values(config: &RunConfig) -> Vec<f64> {
    config.model.h_i.expand()
}

/// Cartesian product, outer index first.
fn pairs(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer.iter().flat_map(|&a| inner.iter().map(move |&b| (a, b))).collect()
}

fn quench_pairs(config: &RunConfig) -> Vec<(f64, f64)> {
    let q = config.quench.as_ref().expect("validated");
    pairs(&h_values(config), &q.h_c.expand())
}

fn grid(config: &RunConfig) -> RunResult<Vec<f64>> {
    Ok(uniform_time_grid(config.time.t_max, config.time.points)?)
}

pub fn run(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    config.validate().map_err(|(key, message)| ConfigError {
        message,
        key: Some(key),
        line: None,
    })?;
    let tables = match config.protocol {
        Protocol::Spectrum => spectrum(config),
        Protocol::Wpd => wpd(config),
        Protocol::Quench => quench(config),
        Protocol::QuenchSweep => quench_sweep(config),
        Protocol::Bath => bath(config),
        Protocol::BathSweep => bath_sweep(config),
        Protocol::IsotropicCheck => isotropic_check(config),
    }?;
    check_finite(&tables)?;
    Ok(tables)
}

/// No table leaves the runner with a NaN or infinite cell.
fn check_finite(tables: &[ResultTable]) -> RunResult<()> {
    for table in tables {
        for row in &table.rows {
            if let Some((col, x)) = table
                .columns
                .iter()
                .zip(row)
                .find(|(_, x)| x.is_some_and(|v| !v.is_finite()))
            {
                return Err(RunError::Numeric(Error::Invariant(format!(
                    "column `{}` holds non-finite value {}",
                    col.name,
                    x.unwrap()
                ))));
            }
        }
    }
    Ok(())
}

fn spectrum(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let levels = config.spectrum.levels;
    let hs = h_values(config);
    let spectra: Vec<Vec<f64>> = hs
        .par_iter()
        .map(|&h| {
            Ok(diagonalize(&build_lmg_hamiltonian(&params(config, h)?)?)?
                .eigenvalues()
                .to_vec())
        })
        .collect::<RunResult<_>>()?;

    let mut columns = vec![Column::new("h", "energy")];
    columns.extend((1..=levels).map(|l| Column::new(format!("gap_{l}"), "energy")));
    let mut main = ResultTable::new("", columns);
    for (h, e) in hs.iter().zip(&spectra) {
        let mut row = vec![*h];
        row.extend(e.iter().skip(1).take(levels).map(|x| x - e[0]));
        main.push_values(&row);
    }
    let mut tables = vec![main];

    if config.spectrum.boundary {
        // Doublet (2p, 2p+1) is degenerate when its splitting is below
        // threshold * bandwidth; its critical field is the largest grid h at
        // which that still holds.
        let mut boundary = ResultTable::new(
            "boundary",
            vec![
                Column::new("level", ""),
                Column::new("h_critical", "energy"),
                Column::new("excitation_per_spin", "energy"),
            ],
        );
        let n = config.model.n;
        for p in 0..n.div_ceil(2) {
            let mut critical = None;
            for (h, e) in hs.iter().zip(&spectra) {
                let bandwidth = e[n] - e[0];
                if e[2 * p + 1] - e[2 * p] < config.spectrum.threshold * bandwidth {
                    let better = critical.is_none_or(|(hc, _)| *h > hc);
                    if better {
                        critical = Some((*h, (e[2 * p] - e[0]) / n as f64));
                    }
                }
            }
            boundary.push(vec![Some((2 * p) as f64), critical.map(|c| c.0), critical.map(|c| c.1)]);
        }
        tables.push(boundary);
    }
    Ok(tables)
}

fn check_normalization(total: f64) -> RunResult<()> {
    if (total - 1.0).abs() > 1e-10 {
        return Err(RunError::Numeric(Error::Invariant(format!(
            "work distribution sums to {total}, not 1"
        ))));
    }
    Ok(())
}

fn wpd(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let binned = config.wpd.bin_width;
    let dists: Vec<_> = quench_pairs(config)
        .into_par_iter()
        .map(|(hi, hc)| {
            let q = Quench::prepare(QuenchSpec::new(params(config, hi)?, hc, vec![0.0])?)?;
            let d = q.work_distribution();
            check_normalization(d.total_probability())?;
            Ok((hi, hc, d))
        })
        .collect::<RunResult<_>>()?;
    let mut t = ResultTable::new(
        "",
        vec![
            Column::new("h_i", "energy"),
            Column::new("h_c", "energy"),
            Column::new("W", "energy"),
            Column::new("probability", ""),
        ],
    );
    for (hi, hc, d) in dists {
        match binned {
            Some(w) => {
                for (centre, p) in d.histogram(w)? {
                    t.push_values(&[hi, hc, centre, p]);
                }
            }
            None => {
                for (w, p) in d.work_values.iter().zip(&d.probabilities) {
                    t.push_values(&[hi, hc, *w, *p]);
                }
            }
        }
    }
    Ok(vec![t])
}

fn subsystem_columns(columns: &mut Vec<Column>, sizes: &[usize], names: [(&str, &str); 3]) {
    for m in sizes {
        for (name, unit) in names {
            columns.push(Column::new(format!("{name}_M{m}"), unit));
        }
    }
}

fn quench(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let q = config.quench.as_ref().expect("validated");
    let times = grid(config)?;
    let runs: Vec<_> = quench_pairs(config)
        .into_par_iter()
        .map(|(hi, hc)| {
            let quench = Quench::prepare(QuenchSpec::new(params(config, hi)?, hc, times.clone())?)?;
            let result = quench.run(q.t_opt);
            let reports = q
                .subsystems
                .iter()
                .map(|&m| subsystem_report(&quench, m, q.normalization))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok((hi, hc, result, reports))
        })
        .collect::<RunResult<_>>()?;

    let mut columns = vec![
        Column::new("h_i", "energy"),
        Column::new("h_c", "energy"),
        Column::new("t", "time"),
        Column::new("W", "energy"),
        Column::new("P", "energy/time"),
        Column::new("S", "nats"),
    ];
    subsystem_columns(
        &mut columns,
        &q.subsystems,
        [("E", "energy"), ("W", "energy"), ("ratio", "")],
    );
    let mut t = ResultTable::new("", columns);
    for (hi, hc, r, reports) in runs {
        for i in 0..r.times.len() {
            let mut row = vec![
                Some(hi),
                Some(hc),
                Some(r.times[i]),
                Some(r.work_series[i]),
                r.power_series[i],
                Some(r.entropy_series[i]),
            ];
            for rep in &reports {
                row.push(Some(rep.ergotropy_series[i]));
                row.push(Some(rep.subsystem_work_series[i]));
                row.push(Some(rep.ratio_series[i]));
            }
            t.push(row);
        }
    }
    Ok(vec![t])
}

fn quench_sweep(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let q = config.quench.as_ref().expect("validated");
    let times = grid(config)?;
    let rows: Vec<Vec<Option<f64>>> = quench_pairs(config)
        .into_par_iter()
        .map(|(hi, hc)| {
            let quench = Quench::prepare(QuenchSpec::new(params(config, hi)?, hc, times.clone())?)?;
            let s = quench.run(q.t_opt).summary;
            let mut row = vec![
                Some(hi),
                Some(hc),
                Some(s.w_max),
                Some(s.t_w_max),
                Some(s.mean_work),
                Some(s.work_variance.sqrt()),
                Some(s.p_max),
                s.t_opt,
            ];
            for &m in &q.subsystems {
                let rep = subsystem_report(&quench, m, q.normalization)?;
                row.extend([Some(rep.e_max), Some(rep.t_e_max), Some(rep.ratio_at_e_max)]);
            }
            Ok(row)
        })
        .collect::<RunResult<_>>()?;

    let mut columns = vec![
        Column::new("h_i", "energy"),
        Column::new("h_c", "energy"),
        Column::new("W_max", "energy"),
        Column::new("t_W_max", "time"),
        Column::new("W_mean", "energy"),
        Column::new("W_std", "energy"),
        Column::new("P_max", "energy/time"),
        Column::new("t_opt", "time"),
    ];
    subsystem_columns(
        &mut columns,
        &q.subsystems,
        [("E_max", "energy"), ("t_E_max", "time"), ("ratio", "")],
    );
    let mut t = ResultTable::new("", columns);
    for row in rows {
        t.push(row);
    }
    Ok(vec![t])
}

fn bath_spec(config: &RunConfig, p: &LmgParams, g: f64) -> BathSpec {
    let b = config.bath.as_ref().expect("validated");
    let omega = match b.omega {
        OmegaSetting::Value(w) => w,
        OmegaSetting::Rule(rule) => rule.omega(p),
    };
    BathSpec::new(omega, g, b.n_init, b.n_max)
}

fn bath_pairs(config: &RunConfig) -> Vec<(f64, f64)> {
    let b = config.bath.as_ref().expect("validated");
    pairs(&h_values(config), &b.g.expand())
}

fn bath(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let times = grid(config)?;
    let runs: Vec<_> = bath_pairs(config)
        .into_par_iter()
        .map(|(h, g)| {
            let p = params(config, h)?;
            let charger = BathCharger::prepare(p, bath_spec(config, &p, g))?;
            let run = charger.run(&times)?;
            Ok((h, g, run, charger.battery_spectrum().eigenvalues().to_vec()))
        })
        .collect::<RunResult<_>>()?;

    let mut series = ResultTable::new(
        "",
        vec![
            Column::new("h", "energy"),
            Column::new("g", "energy"),
            Column::new("t", "time"),
            Column::new("W", "energy"),
            Column::new("n", ""),
            Column::new("E", "energy"),
            Column::new("ratio", ""),
            Column::new("S", "nats"),
            Column::new("H_C", "energy"),
        ],
    );
    let mut occupations = ResultTable::new(
        "occupations",
        vec![
            Column::new("h", "energy"),
            Column::new("g", "energy"),
            Column::new("t_W_max", "time"),
            Column::new("level", ""),
            Column::new("epsilon", "energy"),
            Column::new("P", ""),
        ],
    );
    for (h, g, r, levels) in runs {
        for i in 0..r.times.len() {
            series.push_values(&[
                h,
                g,
                r.times[i],
                r.work_series[i],
                r.photon_series[i],
                r.ergotropy_series[i],
                r.ratio_series[i],
                r.entropy_series[i],
                r.total_energy_series[i],
            ]);
        }
        for (j, (e, p)) in levels.iter().zip(&r.occupations_at_w_max).enumerate() {
            occupations.push_values(&[h, g, r.t_w_max, j as f64, *e, *p]);
        }
    }
    Ok(vec![series, occupations])
}

fn bath_sweep(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let times = grid(config)?;
    let rows: Vec<[f64; 6]> = bath_pairs(config)
        .into_par_iter()
        .map(|(h, g)| {
            let p = params(config, h)?;
            let run = BathCharger::prepare(p, bath_spec(config, &p, g))?.run(&times)?;
            let ratio = crate::ergotropy::efficiency_ratio(run.ergotropy_at_w_max, run.w_max);
            Ok([h, g, run.w_max, run.t_w_max, run.ergotropy_at_w_max, ratio])
        })
        .collect::<RunResult<_>>()?;
    let mut t = ResultTable::new(
        "",
        vec![
            Column::new("h", "energy"),
            Column::new("g", "energy"),
            Column::new("W_max", "energy"),
            Column::new("t_W_max", "time"),
            Column::new("E_at_W_max", "energy"),
            Column::new("ratio", ""),
        ],
    );
    for row in rows {
        t.push_values(&row);
    }
    Ok(vec![t])
}

fn isotropic_check(config: &RunConfig) -> RunResult<Vec<ResultTable>> {
    let n = config.model.n;
    let levels = config.spectrum.levels;
    let hs = h_values(config);
    let blocks: Vec<Vec<[f64; 6]>> = hs
        .par_iter()
        .map(|&h| {
            let e = diagonalize(&build_lmg_hamiltonian(&params(config, h)?)?)?;
            let e0 = isotropic_energy(n, h, 0)?;
            (0..=levels)
                .map(|l| {
                    let analytic = isotropic_energy(n, h, l)?;
                    let numeric = e.eigenvalue(l);
                    let diff = (analytic - numeric).abs();
                    if diff > ISOTROPIC_TOL * numeric.abs().max(1.0) {
                        return Err(RunError::Numeric(Error::Invariant(format!(
                            "isotropic level {l} at h = {h}: closed form {analytic} vs numerical {numeric}"
                        ))));
                    }
                    Ok([h, l as f64, analytic, numeric, analytic - e0, diff])
                })
                .collect()
        })
        .collect::<RunResult<_>>()?;
    let mut levels_table = ResultTable::new(
        "",
        vec![
            Column::new("h", "energy"),
            Column::new("level", ""),
            Column::new("epsilon_closed_form", "energy"),
            Column::new("epsilon_numerical", "energy"),
            Column::new("gap_closed_form", "energy"),
            Column::new("abs_diff", "energy"),
        ],
    );
    for row in blocks.into_iter().flatten() {
        levels_table.push_values(&row);
    }
    let mut tables = vec![levels_table];

    if config.quench.is_some() {
        let times = grid(config)?;
        let rows: Vec<[f64; 4]> = quench_pairs(config)
            .into_par_iter()
            .map(|(hi, hc)| {
                let q = Quench::prepare(QuenchSpec::new(params(config, hi)?, hc, times.clone())?)?;
                let max_w = q.stored_work_series().iter().fold(0.0_f64, |a, w| a.max(w.abs()));
                let (_, p0) = q.work_distribution().dominant();
                Ok([hi, hc, max_w, p0])
            })
            .collect::<RunResult<_>>()?;
        let mut work = ResultTable::new(
            "work",
            vec![
                Column::new("h_i", "energy"),
                Column::new("h_c", "energy"),
                Column::new("max_abs_W", "energy"),
                Column::new("dominant_probability", ""),
            ],
        );
        for row in rows {
            work.push_values(&row);
        }
        tables.push(work);
    }
    Ok(tables)
}

/// Writes every table to `dir`, returning the paths in table order.
pub fn write_tables(config: &RunConfig, tables: &[ResultTable], dir: &Path, format: Format) -> RunResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let stem = config.output_name();
    let resolved = config.to_toml();
    let timestamp = Metadata::timestamp_now();
    let mut paths = Vec::with_capacity(tables.len());
    for table in tables {
        let meta = Metadata {
            generator: "lmg-battery sim".into(),
            version: crate::VERSION.into(),
            timestamp,
            protocol: config.protocol.name().into(),
            table: table.name.clone(),
            config: resolved.clone(),
        };
        let path = dir.join(table.file_name(&stem, format));
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        table.write(&meta, format, file)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn spectrum_rows_follow_grid_order() {
        let c = cfg("protocol = \"spectrum\"\n[model]\nn = 20\nh_i = [1.5, 0.2, 0.9]\n[spectrum]\nlevels = 3\nboundary = true\n");
        let tables = run(&c).unwrap();
        assert_eq!(tables[0].column("h").unwrap(), vec![Some(1.5), Some(0.2), Some(0.9)]);
        assert_eq!(tables[0].columns.len(), 4);
        let boundary = &tables[1];
        assert_eq!(boundary.rows.len(), 10);
        // ground doublet is degenerate at h = 0.2 only
        assert_eq!(boundary.rows[0][1], Some(0.2));
    }

    #[test]
    fn quench_table_marks_power_absent_at_zero() {
        let c = cfg("protocol = \"quench\"\n[model]\nn = 10\nh_i = 0.5\n[quench]\nh_c = 2.0\nsubsystems = [5, 10]\n[time]\nt_max = 5.0\npoints = 11\n");
        let t = &run(&c).unwrap()[0];
        assert_eq!(t.rows.len(), 11);
        assert_eq!(t.columns.len(), 12);
        assert_eq!(t.rows[0][4], None);
        assert!(t.rows[1][4].is_some());
        // M = N ergotropy equals W
        for r in &t.rows {
            assert!((r[9].unwrap() - r[3].unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn isotropic_wpd_is_a_single_point() {
        let c = cfg("protocol = \"isotropic-check\"\n[model]\nn = 12\ngamma = 1.0\nh_i = [0.5, 1.5]\n[quench]\nh_c = [0.2, 1.2]\n[time]\nt_max = 5.0\npoints = 20\n");
        let tables = run(&c).unwrap();
        let work = &tables[1];
        for r in &work.rows {
            assert!(r[2].unwrap() < 1e-10);
            assert!((r[3].unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn overflowing_field_is_a_numeric_failure() {
        let c = cfg("protocol = \"wpd\"\n[model]\nn = 100\nh_i = 1.7e308\n[quench]\nh_c = 0.5\n");
        let err = run(&c).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("non-finite"));
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(RunError::from(Error::param("x", "bad")).exit_code(), 2);
        assert_eq!(RunError::from(Error::Invariant("x".into())).exit_code(), 3);
        assert_eq!(
            RunError::from(Error::NonHermitian {
                deviation: 1.0,
                tolerance: 0.0
            })
            .exit_code(),
            3
        );
        assert_eq!(RunError::from(std::io::Error::other("x")).exit_code(), 1);
    }
}
