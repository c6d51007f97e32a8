use std::fs;
use std::io::Write;
use std::path::Path;

use pacs_core::entanglement::ep_sweep;
use pacs_core::negativity::damped_pacs;
use pacs_core::negativity::{pnw_sweep, pnw_vs_alpha, GridPolicy};
use pacs_core::wigner::{wigner_from_density, DEFAULT_HALF_WIDTH, DEFAULT_POINTS};
use pacs_core::{PacsSpec, PhaseSpaceGrid, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{FigureArgs, FigureId, Format, GridArgs};
use crate::error::CliError;
use crate::run::{cut_values, range, settings, write_field, write_manifest, write_rows};

/// Amplitudes of the cut and sweep panels.
pub const PANEL_ALPHAS: [f64; 4] = [0.1, 0.5, 1.0, 1.5];
/// Decay times of the three surface snapshots.
pub const SURFACE_TIMES: [f64; 3] = [0.0, 0.4, 1.0];
pub const SURFACE_ALPHA: f64 = 0.5;
pub const CUT_HALF_WIDTH: f64 = 4.0;
pub const CUT_POINTS: usize = 401;

fn cut_times() -> Vec<f64> {
    range(0.0, 1.2, 0.2).expect("fixed range")
}

fn sweep_times() -> Vec<f64> {
    range(0.0, 1.2, 0.1).expect("fixed range")
}

fn alpha_axis() -> Vec<f64> {
    range(0.0, 2.0, 0.25).expect("fixed range")
}

struct Emitted {
    file: String,
    parameters: Value,
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::GnuplotMatrix => "dat",
    }
}

fn create(dir: &Path, name: &str) -> Result<fs::File, CliError> {
    let path = dir.join(name);
    fs::File::create(&path).map_err(|e| CliError::io(&path, e))
}

fn finish(mut w: impl Write, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn spec(alpha: f64, m: usize) -> Result<PacsSpec, CliError> {
    PacsSpec::new(C64::new(alpha, 0.0), m).map_err(CliError::validation)
}

pub fn run(args: &FigureArgs) -> Result<(), CliError> {
    let surfaces = matches!(args.id, FigureId::F1 | FigureId::F3);
    if args.format == Format::GnuplotMatrix && !surfaces {
        return Err(CliError::Validation(format!(
            "gnuplot-matrix only applies to the surface figures 1 and 3, not {}",
            args.id.label()
        )));
    }
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tag = format!("fig{}", args.id.label());
    let emitted = match args.id {
        FigureId::F1 => surface_panel(dir, &tag, 1, args.format)?,
        FigureId::F3 => surface_panel(dir, &tag, 2, args.format)?,
        FigureId::F2 => cut_panel(dir, &tag, 1, args.format)?,
        FigureId::F4 => cut_panel(dir, &tag, 2, args.format)?,
        FigureId::F5a => pnw_panel(dir, &tag, 1, args.format)?,
        FigureId::F5c => pnw_panel(dir, &tag, 2, args.format)?,
        FigureId::F5b => ep_panel(dir, &tag, args.format)?,
        FigureId::F5d => alpha_panel(dir, &tag, args.format)?,
    };
    let manifest = json!({
        "version": pacs_core::VERSION,
        "figure": args.id.label(),
        "format": args.format,
        "settings": settings(None),
        "files": emitted
            .iter()
            .map(|e| json!({ "path": e.file, "parameters": e.parameters }))
            .collect::<Vec<_>>(),
    });
    write_manifest(&dir.join(format!("{tag}_manifest.json")), &manifest)
}

fn surface_panel(dir: &Path, tag: &str, m: usize, format: Format) -> Result<Vec<Emitted>, CliError> {
    let sp = spec(SURFACE_ALPHA, m)?;
    let mut out = Vec::new();
    for gt in SURFACE_TIMES {
        let center = sp.alpha() * (-gt / 2.0f64).exp();
        let grid = PhaseSpaceGrid::centered(center, DEFAULT_HALF_WIDTH, DEFAULT_POINTS)?;
        let field = wigner_from_density(&damped_pacs(&sp, gt)?, &grid)?;
        let file = format!("{tag}_gt{gt:.1}.{}", extension(format));
        let path = dir.join(&file);
        let mut f = std::io::BufWriter::new(create(dir, &file)?);
        write_field(&field, format, &mut f)?;
        finish(f, &path)?;
        out.push(Emitted {
            file,
            parameters: json!({
                "alpha": SURFACE_ALPHA, "m": m, "gamma_t": gt, "dim": sp.dim(),
                "grid": grid, "integral": field.integral(), "min": field.min().0,
            }),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct CutRow {
    gamma_t: f64,
    q: f64,
    w: f64,
}

fn cut_panel(dir: &Path, tag: &str, m: usize, format: Format) -> Result<Vec<Emitted>, CliError> {
    let grid = GridArgs {
        half_width: CUT_HALF_WIDTH,
        points: CUT_POINTS,
    };
    let mut out = Vec::new();
    for a in PANEL_ALPHAS {
        let sp = spec(a, m)?;
        let mut rows = Vec::new();
        for gt in cut_times() {
            for (q, w) in cut_values(&sp, gt, 0.0, &grid)? {
                rows.push(CutRow { gamma_t: gt, q, w });
            }
        }
        let file = format!("{tag}_alpha{a:.1}.{}", extension(format));
        let path = dir.join(&file);
        let mut f = std::io::BufWriter::new(create(dir, &file)?);
        write_rows(&rows, format, &mut f)?;
        finish(f, &path)?;
        out.push(Emitted {
            file,
            parameters: json!({
                "alpha": a, "m": m, "p": 0.0, "gamma_t": cut_times(), "dim": sp.dim(),
                "q_half_width": CUT_HALF_WIDTH, "q_points": CUT_POINTS,
                "q_center": "Re(alpha) exp(-gamma_t / 2)",
            }),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct PnwPanelRow {
    alpha: f64,
    gamma_t: f64,
    p_nw: f64,
    min_w: f64,
    converged: bool,
}

fn pnw_panel(dir: &Path, tag: &str, m: usize, format: Format) -> Result<Vec<Emitted>, CliError> {
    let policy = GridPolicy::default();
    let mut rows = Vec::new();
    let mut dims = Vec::new();
    for a in PANEL_ALPHAS {
        let sp = spec(a, m)?;
        dims.push(sp.dim());
        for (gt, r) in pnw_sweep(&sp, &sweep_times(), &policy)? {
            rows.push(PnwPanelRow {
                alpha: a,
                gamma_t: gt,
                p_nw: r.p_nw,
                min_w: r.min_value,
                converged: r.converged,
            });
        }
    }
    let file = format!("{tag}.{}", extension(format));
    let path = dir.join(&file);
    let mut f = std::io::BufWriter::new(create(dir, &file)?);
    write_rows(&rows, format, &mut f)?;
    finish(f, &path)?;
    Ok(vec![Emitted {
        file,
        parameters: json!({ "alpha": PANEL_ALPHAS, "m": m, "gamma_t": sweep_times(), "dim": dims, "policy": policy }),
    }])
}

#[derive(Serialize)]
struct EpPanelRow {
    alpha: f64,
    gamma_t: f64,
    log_negativity: f64,
    trace_norm: f64,
    truncation_error: f64,
}

fn ep_panel(dir: &Path, tag: &str, format: Format) -> Result<Vec<Emitted>, CliError> {
    let mut rows = Vec::new();
    let mut dims = Vec::new();
    for a in PANEL_ALPHAS {
        let sp = spec(a, 1)?;
        dims.push(sp.dim());
        for (gt, r) in ep_sweep(&sp, &sweep_times())? {
            rows.push(EpPanelRow {
                alpha: a,
                gamma_t: gt,
                log_negativity: r.log_negativity,
                trace_norm: r.trace_norm,
                truncation_error: r.truncation_error,
            });
        }
    }
    let file = format!("{tag}.{}", extension(format));
    let path = dir.join(&file);
    let mut f = std::io::BufWriter::new(create(dir, &file)?);
    write_rows(&rows, format, &mut f)?;
    finish(f, &path)?;
    Ok(vec![Emitted {
        file,
        parameters: json!({ "alpha": PANEL_ALPHAS, "m": 1, "gamma_t": sweep_times(), "dim": dims }),
    }])
}

#[derive(Serialize)]
struct AlphaRow {
    alpha: f64,
    p_nw_m1: f64,
    p_nw_m2: f64,
}

fn alpha_panel(dir: &Path, tag: &str, format: Format) -> Result<Vec<Emitted>, CliError> {
    let policy = GridPolicy::default();
    let alphas = alpha_axis();
    let one = pnw_vs_alpha(1, &alphas, &policy)?;
    let two = pnw_vs_alpha(2, &alphas, &policy)?;
    let rows: Vec<AlphaRow> = one
        .iter()
        .zip(&two)
        .map(|((a, r1), (_, r2))| AlphaRow {
            alpha: *a,
            p_nw_m1: r1.p_nw,
            p_nw_m2: r2.p_nw,
        })
        .collect();
    let file = format!("{tag}.{}", extension(format));
    let path = dir.join(&file);
    let mut f = std::io::BufWriter::new(create(dir, &file)?);
    write_rows(&rows, format, &mut f)?;
    finish(f, &path)?;
    Ok(vec![Emitted {
        file,
        parameters: json!({ "alpha": alphas, "m": [1, 2], "gamma_t": 0.0, "policy": policy }),
    }])
}
