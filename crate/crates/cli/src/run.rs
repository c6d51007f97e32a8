use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use pacs_core::entanglement::ep_sweep;
use pacs_core::negativity::{damped_pacs, pnw_sweep, vanishing_threshold_in, GridPolicy, DEFAULT_BRACKET};
use pacs_core::report::{ep_rows, pnw_rows, write_csv, write_json};
use pacs_core::wigner::{
    closed_form_field, propagate_onto, wigner_from_density, ParityEvaluator, MIN_QUADRATURE_POINTS,
};
use pacs_core::{PacsSpec, PhaseSpaceGrid, WignerField, WignerSource, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    Command, CutArgs, EpArgs, Format, GridArgs, Method, PnwArgs, StateArgs, ThresholdArgs, TimeArgs, WignerArgs,
};
use crate::error::CliError;
use crate::figure;

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Wigner(a) => wigner(a, cmd),
        Command::Cut(a) => cut(a, cmd),
        Command::Pnw(a) => pnw(a, cmd),
        Command::Ep(a) => ep(a, cmd),
        Command::Threshold(a) => threshold(a, cmd),
        Command::Figure(a) => figure::run(a),
    }
}

pub fn spec_from(state: &StateArgs) -> Result<PacsSpec, CliError> {
    let alpha = C64::new(state.alpha, state.alpha_im);
    let spec = match state.dim {
        Some(d) => PacsSpec::with_dim(alpha, state.m, d),
        None => PacsSpec::new(alpha, state.m),
    };
    spec.map_err(CliError::validation)
}

fn check_gamma_t(gt: f64) -> Result<f64, CliError> {
    if gt.is_finite() && gt >= 0.0 {
        Ok(gt)
    } else {
        Err(CliError::Validation(format!(
            "gamma_t must be finite and >= 0, got {gt}"
        )))
    }
}

/// Rounded to twelve decimals so ranges print without accumulated float noise.
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start) {
        return Err(CliError::Validation(format!("invalid range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn times_from(t: &TimeArgs) -> Result<Vec<f64>, CliError> {
    let times = match &t.gamma_range {
        Some(r) => {
            let parts: Vec<f64> = r
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Validation(format!("gamma range `{r}` is not START:STOP:STEP")))?;
            let [start, stop, step] = parts[..] else {
                return Err(CliError::Validation(format!(
                    "gamma range `{r}` is not START:STOP:STEP"
                )));
            };
            range(start, stop, step)?
        }
        None if t.gamma_t.is_empty() => vec![0.0],
        None => t.gamma_t.clone(),
    };
    for &gt in &times {
        check_gamma_t(gt)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Validation("decay times must be sorted ascending".into()));
    }
    Ok(times)
}

fn grid_around(center: C64, grid: &GridArgs) -> Result<PhaseSpaceGrid, CliError> {
    if grid.points < MIN_QUADRATURE_POINTS {
        return Err(CliError::Validation(format!(
            "surfaces need at least {MIN_QUADRATURE_POINTS} points per axis, got {}",
            grid.points
        )));
    }
    PhaseSpaceGrid::centered(center, grid.half_width, grid.points).map_err(CliError::validation)
}

fn damped_center(spec: &PacsSpec, gt: f64) -> C64 {
    spec.alpha() * (-gt / 2.0).exp()
}

fn require_format(format: Format, allowed: &[Format], what: &str) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "format {} is not available for {what}",
            format_name(format)
        )))
    }
}

pub fn format_name(format: Format) -> String {
    use clap::ValueEnum;
    format
        .to_possible_value()
        .map(|v| v.get_name().to_owned())
        .unwrap_or_default()
}

/// Destination for a single output; `None` is stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_rows<R: Serialize>(rows: &[R], format: Format, out: impl Write) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(rows, out)?,
        Format::Json => write_json(rows, out)?,
        Format::GnuplotMatrix => {
            return Err(CliError::Validation(
                "gnuplot-matrix only applies to Wigner surfaces".into(),
            ))
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FieldJson<'a> {
    grid: PhaseSpaceGrid,
    source: WignerSource,
    integral: f64,
    min: f64,
    values: &'a [f64],
}

pub fn write_field(field: &WignerField, format: Format, mut out: impl Write) -> Result<(), CliError> {
    match format {
        Format::Csv => field.write_csv(out)?,
        Format::GnuplotMatrix => field.write_gnuplot_matrix(out)?,
        Format::Json => {
            let body = FieldJson {
                grid: *field.grid(),
                source: field.source(),
                integral: field.integral(),
                min: field.min().0,
                values: field.values(),
            };
            serde_json::to_writer(&mut out, &body).map_err(pacs_core::Error::from)?;
            out.write_all(b"\n").map_err(pacs_core::Error::from)?;
        }
    }
    Ok(())
}

/// Common settings recorded in every manifest.
pub fn settings(dim: Option<usize>) -> Value {
    json!({
        "truncation": {
            "dim": dim,
            "tail_bound": pacs_core::fock::TAIL_BOUND,
            "min_dim": pacs_core::fock::MIN_DIM,
        },
        "channel": {
            "kraus_terms": "all retained levels",
            "trace_loss_bound": pacs_core::loss::TRACE_LOSS_BOUND,
        },
        "negativity_policy": GridPolicy::default(),
        "noise_floor": pacs_core::negativity::NOISE_FLOOR,
        "entanglement_truncation_bound": pacs_core::entanglement::TRUNCATION_BOUND,
    })
}

pub fn write_manifest(path: &Path, manifest: &Value) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
    serde_json::to_writer_pretty(&mut out, manifest).map_err(pacs_core::Error::from)?;
    out.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the result and, for file output, a provenance manifest beside it.
fn emit(
    output: Option<&Path>,
    cmd: &Command,
    dim: Option<usize>,
    extra: Value,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut out = open_output(output)?;
    write(&mut out)?;
    out.flush()
        .map_err(|e| CliError::io(output.unwrap_or(Path::new("<stdout>")), e))?;
    if let Some(path) = output {
        let manifest = json!({
            "version": pacs_core::VERSION,
            "config": cmd,
            "settings": settings(dim),
            "result": extra,
            "files": [path.file_name().map(|n| n.to_string_lossy().into_owned())],
        });
        write_manifest(&sidecar(path), &manifest)?;
    }
    Ok(())
}

/// Closed-form initial field fine enough for the propagation kernel at `gamma_t`.
pub fn propagation_source(spec: &PacsSpec, gamma_t: f64, target_half_width: f64) -> Result<WignerField, CliError> {
    let half = target_half_width.max(6.0);
    let s = -(-gamma_t).exp_m1();
    let c = (-gamma_t / 2.0).exp();
    let sigma = (s / 4.0).sqrt();
    let needed = (2.0 * half * c / sigma).ceil() as usize + 1;
    let points = needed.clamp(481, 4001);
    let grid = PhaseSpaceGrid::centered(spec.alpha(), half, points).map_err(CliError::validation)?;
    Ok(closed_form_field(spec.alpha(), spec.m(), &grid)?)
}

fn wigner(a: &WignerArgs, cmd: &Command) -> Result<(), CliError> {
    let spec = spec_from(&a.state)?;
    let gt = check_gamma_t(a.gamma_t)?;
    let grid = grid_around(damped_center(&spec, gt), &a.grid)?;
    let field = match a.method {
        Method::Parity => wigner_from_density(&damped_pacs(&spec, gt)?, &grid)?,
        Method::Propagated => {
            if gt == 0.0 {
                closed_form_field(spec.alpha(), spec.m(), &grid)?
            } else {
                let source = propagation_source(&spec, gt, a.grid.half_width)?;
                let values = propagate_onto(&source, gt, &grid.qs(), &grid.ps())?;
                WignerField::new(grid, values, WignerSource::Propagated)?
            }
        }
    };
    let (min, at) = field.min();
    let extra = json!({ "integral": field.integral(), "min": min, "min_location": at });
    emit(a.output.output.as_deref(), cmd, Some(spec.dim()), extra, |out| {
        write_field(&field, a.output.format, out)
    })
}

#[derive(Serialize)]
struct CutRow {
    q: f64,
    w: f64,
}

pub fn cut_values(spec: &PacsSpec, gt: f64, p: f64, grid: &GridArgs) -> Result<Vec<(f64, f64)>, CliError> {
    if !(grid.half_width > 0.0 && grid.half_width.is_finite() && grid.points >= 2) {
        return Err(CliError::Validation(
            "cut needs a positive half width and at least two points".into(),
        ));
    }
    let lo = damped_center(spec, gt).re - grid.half_width;
    let h = 2.0 * grid.half_width / (grid.points - 1) as f64;
    let qs: Vec<f64> = (0..grid.points).map(|i| lo + i as f64 * h).collect();
    let w = ParityEvaluator::new(&damped_pacs(spec, gt)?).values_on(&qs, &[p]);
    Ok(qs.into_iter().zip(w).collect())
}

fn cut(a: &CutArgs, cmd: &Command) -> Result<(), CliError> {
    let spec = spec_from(&a.state)?;
    let gt = check_gamma_t(a.gamma_t)?;
    if !a.p.is_finite() {
        return Err(CliError::Validation("p must be finite".into()));
    }
    require_format(a.output.format, &[Format::Csv, Format::Json], "cut")?;
    let rows: Vec<CutRow> = cut_values(&spec, gt, a.p, &a.grid)?
        .into_iter()
        .map(|(q, w)| CutRow { q, w })
        .collect();
    emit(a.output.output.as_deref(), cmd, Some(spec.dim()), Value::Null, |out| {
        write_rows(&rows, a.output.format, out)
    })
}

fn pnw(a: &PnwArgs, cmd: &Command) -> Result<(), CliError> {
    let spec = spec_from(&a.state)?;
    let times = times_from(&a.times)?;
    require_format(a.output.format, &[Format::Csv, Format::Json], "pnw")?;
    let sweep = pnw_sweep(&spec, &times, &GridPolicy::default())?;
    let converged = sweep.iter().all(|s| s.1.converged);
    if !converged {
        eprintln!("warning: negative probability not converged at some decay times (see `converged` column)");
    }
    let rows = pnw_rows(&sweep);
    let details: Vec<_> = sweep
        .iter()
        .map(|(g, r)| json!({ "gamma_t": g, "detail": r }))
        .collect();
    emit(
        a.output.output.as_deref(),
        cmd,
        Some(spec.dim()),
        Value::from(details),
        |out| write_rows(&rows, a.output.format, out),
    )
}

fn ep(a: &EpArgs, cmd: &Command) -> Result<(), CliError> {
    let spec = spec_from(&a.state)?;
    let times = times_from(&a.times)?;
    require_format(a.output.format, &[Format::Csv, Format::Json], "ep")?;
    let rows = ep_rows(&ep_sweep(&spec, &times)?);
    emit(a.output.output.as_deref(), cmd, Some(spec.dim()), Value::Null, |out| {
        write_rows(&rows, a.output.format, out)
    })
}

#[derive(Serialize)]
struct ThresholdRow {
    alpha: f64,
    alpha_im: f64,
    m: usize,
    epsilon: f64,
    threshold: f64,
}

fn threshold(a: &ThresholdArgs, cmd: &Command) -> Result<(), CliError> {
    let spec = spec_from(&a.state)?;
    if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
        return Err(CliError::Validation(format!(
            "epsilon must be positive, got {}",
            a.epsilon
        )));
    }
    if !(a.upper > DEFAULT_BRACKET.0 && a.upper.is_finite()) {
        return Err(CliError::Validation(format!("upper must be positive, got {}", a.upper)));
    }
    require_format(a.output.format, &[Format::Csv, Format::Json], "threshold")?;
    let t = vanishing_threshold_in(&spec, a.epsilon, (DEFAULT_BRACKET.0, a.upper), &GridPolicy::default())?;
    let rows = [ThresholdRow {
        alpha: a.state.alpha,
        alpha_im: a.state.alpha_im,
        m: a.state.m,
        epsilon: a.epsilon,
        threshold: t,
    }];
    let extra = json!({ "bisection_width": pacs_core::negativity::THRESHOLD_WIDTH });
    emit(a.output.output.as_deref(), cmd, Some(spec.dim()), extra, |out| {
        write_rows(&rows, a.output.format, out)
    })
}
