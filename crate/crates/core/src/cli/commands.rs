use std::path::Path;

use serde_json::json;

use super::config::{parse_config, Model};
use super::io::{format_float, read_points, sha256_hex, Run};
use super::{CliError, ExitStatus, Mode};
use crate::kernel::{Mat, PointSet};
use crate::simulation::{empirical_pcv, sample_gaussian, Realization, SimulationError};
use crate::validation::{check_cnd, check_pd, check_pseudo_variogram, schoenberg_roundtrip, DomainBox, ValidationConfig, Verdict};

fn load_model(run: &mut Run, path: &Path) -> Result<Model, CliError> {
    let text = run.read(path)?;
    run.config_hash = Some(sha256_hex(text.as_bytes()));
    parse_config(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn csv_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Input(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn entry_labels(prefix: &str, m: usize) -> impl Iterator<Item = String> + '_ {
    (0..m).flat_map(move |p| (0..m).map(move |q| format!("{prefix}_{p}_{q}")))
}

/// Rows `i, j, C_pq(x_i, x_j)` for every ordered pair, `(p, q)` row-major.
pub fn cmd_eval(model: &Path, points: &Path, out: &Path) -> Result<ExitStatus, CliError> {
    let mut run = Run::new("eval", json!({}));
    let model = load_model(&mut run, model)?;
    run.record(points)?;
    let pts = read_points(points, model.config.dim_space, model.config.dim_time)?;
    let m = model.spec.m();
    let mut w = csv_writer();
    let header: Vec<String> = ["i".to_string(), "j".to_string()].into_iter().chain(entry_labels("c", m)).collect();
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let c = model.spec.evaluate(pts.point(i), pts.point(j)).map_err(|e| CliError::Eval(format!("at points ({i}, {j}): {e}")))?;
            let row = [i.to_string(), j.to_string()]
                .into_iter()
                .chain((0..m).flat_map(|p| (0..m).map(move |q| (p, q))).map(|(p, q)| format_float(c[(p, q)])));
            w.write_record(row).map_err(csv_err)?;
        }
    }
    run.finish(out, &csv_bytes(w)?)?;
    Ok(ExitStatus::Pass)
}

/// Writes the validation report as JSON; exit status follows the verdict.
#[allow(clippy::too_many_arguments)]
pub fn cmd_validate(
    model: &Path,
    mode: Mode,
    configs: usize,
    points_max: usize,
    tol: f64,
    seed: u64,
    t_grid: &[f64],
    bounds: (f64, f64),
    out: &Path,
) -> Result<ExitStatus, CliError> {
    let mode_name = format!("{mode:?}").to_lowercase();
    let mut run = Run::new(
        "validate",
        json!({"mode": mode_name, "configs": configs, "points_max": points_max, "tol": tol, "t_grid": t_grid, "bounds": [bounds.0, bounds.1]}),
    );
    run.seed = Some(seed);
    let model = load_model(&mut run, model)?;
    let spec = &model.spec;
    let domain = DomainBox::cube(spec.dim(), bounds.0, bounds.1).with_time(model.config.dim_time);
    let cfg = ValidationConfig { n_configs: configs, n_points_max: points_max, tol_rel: tol, rng_seed: seed, domain_box: domain };
    cfg.validate(spec.dim()).map_err(|e| CliError::Input(e.to_string()))?;
    let report = match mode {
        Mode::Pd => check_pd(spec, &cfg),
        Mode::Cnd => check_cnd(spec, &cfg),
        Mode::Pcv => check_pseudo_variogram(spec, &cfg),
        Mode::Roundtrip => {
            if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0)) {
                return Err(CliError::Input("t grid must be non-empty and positive".into()));
            }
            schoenberg_roundtrip(spec, t_grid, &cfg)
        }
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Eval(e.to_string()))?;
    json.push('\n');
    run.finish(out, json.as_bytes())?;
    Ok(match report.verdict {
        Verdict::Pass => ExitStatus::Pass,
        Verdict::Fail => ExitStatus::Fail,
        Verdict::Inconclusive => ExitStatus::Inconclusive,
    })
}

/// Rows `realization, location, variable, value`.
pub fn cmd_sample(model: &Path, points: &Path, reals: usize, seed: u64, force: bool, out: &Path) -> Result<ExitStatus, CliError> {
    let mut run = Run::new("sample", json!({"reals": reals, "force": force}));
    run.seed = Some(seed);
    let model = load_model(&mut run, model)?;
    run.record(points)?;
    let pts = read_points(points, model.config.dim_space, model.config.dim_time)?;
    let draws = sample_gaussian(&model.spec, &pts, reals, seed, force).map_err(|e| match e {
        SimulationError::NotPsd { .. } | SimulationError::Factorization(_) => CliError::Fail(e.to_string()),
        other => CliError::Eval(other.to_string()),
    })?;
    let mut w = csv_writer();
    w.write_record(["realization", "location", "variable", "value"]).map_err(csv_err)?;
    for r in &draws {
        for i in 0..r.values.nrows() {
            for p in 0..r.values.ncols() {
                w.write_record([r.index.to_string(), i.to_string(), p.to_string(), format_float(r.values[(i, p)])]).map_err(csv_err)?;
            }
        }
    }
    if let Some(r) = draws.first() {
        run.parameters["jitter_applied"] = json!(r.jitter_applied);
    }
    run.finish(out, &csv_bytes(w)?)?;
    Ok(ExitStatus::Pass)
}

fn read_realizations(path: &Path, run: &mut Run) -> Result<(usize, usize, usize, Vec<f64>), CliError> {
    let text = run.read(path)?;
    let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| input(e.to_string()))?.iter().map(str::to_string).collect();
    if header != ["realization", "location", "variable", "value"] {
        return Err(input(format!("header {header:?}, expected realization,location,variable,value")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let idx = |k: usize| rec[k].parse::<usize>().map_err(|_| input(format!("line {line}: bad index {:?}", &rec[k])));
        let v: f64 = rec[3].parse().map_err(|_| input(format!("line {line}: bad value {:?}", &rec[3])))?;
        rows.push((idx(0)?, idx(1)?, idx(2)?, v));
    }
    if rows.is_empty() {
        return Err(input("no realizations".into()));
    }
    let n_real = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
    let n = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
    let m = rows.iter().map(|r| r.2).max().unwrap_or(0) + 1;
    let mut values = vec![f64::NAN; n_real * n * m];
    let mut seen = vec![false; values.len()];
    for (r, i, p, v) in rows {
        let k = (r * n + i) * m + p;
        if std::mem::replace(&mut seen[k], true) {
            return Err(input(format!("duplicate entry for realization {r}, location {i}, variable {p}")));
        }
        values[k] = v;
    }
    if seen.iter().any(|s| !s) {
        return Err(input("incomplete table: every (realization, location, variable) needs a value".into()));
    }
    Ok((n_real, n, m, values))
}

fn read_lags(path: &Path, run: &mut Run, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = run.read(path)?;
    let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| input(e.to_string()))?.iter().map(str::to_string).collect();
    let want: Vec<String> = (1..=dim).map(|i| format!("h{i}")).collect();
    if header != want {
        return Err(input(format!("header {header:?}, expected {want:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| input(e.to_string()))?;
            rec.iter().map(|f| f.parse::<f64>().map_err(|_| input(format!("not a number: {f:?}")))).collect()
        })
        .collect()
}

fn point_dims(path: &Path) -> Result<(usize, usize), CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let h = rdr.headers().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let ds = h.iter().filter(|c| c.trim().starts_with('x')).count();
    let dt = h.iter().filter(|c| c.trim().starts_with('t')).count();
    Ok((ds, dt))
}

/// Rows `h1..hd, pairs, g_p_q..., se_p_q...`; empty bins keep their row with blank estimates.
pub fn cmd_estimate(input: &Path, grid_spacing: f64, lags: &Path, points: Option<&Path>, batches: usize, out: &Path) -> Result<ExitStatus, CliError> {
    if !(grid_spacing > 0.0) || !grid_spacing.is_finite() {
        return Err(CliError::Input(format!("grid spacing must be positive, got {grid_spacing}")));
    }
    let mut run = Run::new("estimate", json!({"grid_spacing": grid_spacing, "batches": batches}));
    let (n_real, n, m, values) = read_realizations(input, &mut run)?;
    let pts = match points {
        Some(p) => {
            run.record(p)?;
            let (ds, dt) = point_dims(p)?;
            read_points(p, ds, dt)?
        }
        None => PointSet::new(1, 0, (0..n).map(|k| k as f64 * grid_spacing).collect()).map_err(|e| CliError::Input(e.to_string()))?,
    };
    if pts.len() != n {
        return Err(CliError::Input(format!("{} locations in the samples, {} points given", n, pts.len())));
    }
    let lag_list = read_lags(lags, &mut run, pts.dim())?;
    let reals: Vec<Realization> = (0..n_real)
        .map(|r| Realization {
            pts: pts.clone(),
            values: Mat::from_fn(n, m, |i, p| values[(r * n + i) * m + p]),
            seed: 0,
            index: r,
            jitter_applied: 0.0,
        })
        .collect();
    let radius = 1e-9 * grid_spacing.max(1.0);
    let est = empirical_pcv(&reals, &lag_list, radius, batches).map_err(|e| CliError::Input(e.to_string()))?;
    let mut w = csv_writer();
    let header: Vec<String> = (1..=pts.dim())
        .map(|k| format!("h{k}"))
        .chain(std::iter::once("pairs".to_string()))
        .chain(entry_labels("g", m))
        .chain(entry_labels("se", m))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    let cells = |mat: Option<&Mat>| -> Vec<String> {
        (0..m).flat_map(|p| (0..m).map(move |q| (p, q))).map(|(p, q)| mat.map_or(String::new(), |a| format_float(a[(p, q)]))).collect()
    };
    for b in &est.bins {
        let row: Vec<String> = b
            .lag
            .iter()
            .map(|h| format_float(*h))
            .chain(std::iter::once(b.pairs.to_string()))
            .chain(cells(b.estimate.as_ref()))
            .chain(cells(b.std_error.as_ref()))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    run.finish(out, &csv_bytes(w)?)?;
    Ok(ExitStatus::Pass)
}
