//! Command-line front end.
//!
//! Five subcommands expose the library: `iou` (one-shot pair report),
//! `sweep` (scale or angle sensitivity tables), `surface` (loss over an
//! aspect-ratio/angle grid), `fit` (single optimization run with trace
//! export), and `batch` (per-record metrics over a box-pair file).
//!
//! Conventions at this boundary: angles are degrees in box literals, flag
//! values, and summaries (fit trace files keep radians, matching the
//! library); box literals are five comma-separated numbers
//! `cx,cy,w,h,theta_deg`. Exit codes are 0 success, 1 usage, 2 data or
//! I/O, 3 numerical failure or divergence.

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::analysis::{
    alpha_column_name, consistency_metric, surface, sweep_angle, sweep_wh, SurfaceLoss, SweepTable,
};
use crate::error::{Error, Result};
use crate::fitting::{fit, random_init, FitSpec, FitTrace};
use crate::gaussian::{kfiou, mkiou, ModulationParams};
use crate::geometry::{skew_iou, OrientedBox};
use crate::losses::{ga_loss, reg_loss, LossConfig, LossVariant};

/// One parsed input pair: an identifier plus prediction and target boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxPairRecord {
    pub id: String,
    pub pred: OrientedBox,
    pub target: OrientedBox,
}

#[derive(Parser)]
#[command(
    name = "mkiou",
    version,
    about = "Oriented-box overlap measures, losses, and fitting experiments",
    long_about = "Evaluates exact and Gaussian-approximate overlap of rotated rectangles, \
                  generates sensitivity tables, and runs gradient-descent box fits.\n\
                  Box literals everywhere are \"cx,cy,w,h,theta_deg\" (angle in degrees)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report every overlap measure and loss for one box pair
    Iou(IouArgs),
    /// Write a scale or angle sensitivity table and its consistency metrics
    Sweep(SweepArgs),
    /// Write a loss surface over aspect ratio and angle deviation
    Surface(SurfaceArgs),
    /// Run one gradient-descent fit and write its trace
    Fit(FitArgs),
    /// Evaluate every record of a box-pair file (JSONL or CSV)
    Batch(BatchArgs),
}

#[derive(Args)]
struct IouArgs {
    /// Predicted box "cx,cy,w,h,theta_deg"
    #[arg(allow_hyphen_values = true)]
    pred: String,
    /// Target box "cx,cy,w,h,theta_deg"
    #[arg(allow_hyphen_values = true)]
    target: String,
    /// Modulation factor; repeat for several columns (default 3)
    #[arg(long = "alpha", value_name = "ALPHA")]
    alphas: Vec<f64>,
    /// Angle-term weight
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    /// Angle-term aspect-ratio gate sharpness
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    /// Smooth-L1 transition for the center terms
    #[arg(long, default_value_t = 1.0)]
    sl1_delta: f64,
    /// Variant whose loss breakdown is reported
    #[arg(long, default_value = "mk_ga")]
    variant: String,
    /// Also print the report as a single JSON object
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// What to sweep: "wh" (scale) or "angle"
    kind: String,
    /// Base box (default: 0,0,4,2,0 for wh; 0,0,4,1,0 for angle)
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// Range start (scale ratio, or degrees for angle; default 0.5 / -90)
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    /// Range end (default 2.0 / 90)
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    /// Grid size, at least 2 (default 151 / 181)
    #[arg(long)]
    steps: Option<usize>,
    /// Modulation factor; repeat for several columns (default 3)
    #[arg(long = "alpha", value_name = "ALPHA")]
    alphas: Vec<f64>,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path (default: table to stdout, metrics to stderr)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Which loss: "mk" or "ga"
    loss: String,
    #[arg(long, default_value_t = 1.0)]
    ar_lo: f64,
    #[arg(long, default_value_t = 8.0)]
    ar_hi: f64,
    #[arg(long, default_value_t = 29)]
    ar_steps: usize,
    /// Angle-deviation range start, degrees
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    dtheta_lo: f64,
    /// Angle-deviation range end, degrees
    #[arg(long, default_value_t = 180.0, allow_negative_numbers = true)]
    dtheta_hi: f64,
    #[arg(long, default_value_t = 37)]
    dtheta_steps: usize,
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Target box "cx,cy,w,h,theta_deg"
    #[arg(long, allow_hyphen_values = true)]
    target: String,
    /// Initial box; omitted, one is drawn around the target from --seed
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    #[arg(long, default_value = "mk_ga")]
    variant: String,
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    sl1_delta: f64,
    #[arg(long, default_value_t = 2000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    /// Exact-IoU early-stop threshold
    #[arg(long, default_value_t = 0.99)]
    stop_iou: f64,
    /// Seed for drawing the init when --init is omitted
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace format: csv or json (JSON lines)
    #[arg(long, default_value = "csv")]
    format: String,
    /// Trace output path (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// Input file of box pairs, .jsonl or .csv
    input: PathBuf,
    /// Modulation factor; repeat for several columns (default 3)
    #[arg(long = "alpha", value_name = "ALPHA")]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    sl1_delta: f64,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path (default: table to stdout, summary to stderr)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq)]
enum OutFormat {
    Csv,
    Json,
}

fn parse_format(s: &str) -> Result<OutFormat> {
    match s {
        "csv" => Ok(OutFormat::Csv),
        "json" => Ok(OutFormat::Json),
        other => Err(Error::InvalidArgument(format!(
            "unknown format '{other}' (expected csv, json)"
        ))),
    }
}

/// Parses "cx,cy,w,h,theta_deg". Grammar violations are usage errors;
/// well-formed but invalid boxes (bad extents, non-finite values) are data
/// errors, so the two get distinct exit codes.
fn parse_box(s: &str) -> Result<OrientedBox> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 5 {
        return Err(Error::InvalidArgument(format!(
            "box literal must be 'cx,cy,w,h,theta_deg', got '{s}'"
        )));
    }
    let mut v = [0.0f64; 5];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("bad number '{part}' in box literal '{s}'"))
        })?;
    }
    OrientedBox::new(v[0], v[1], v[2], v[3], v[4].to_radians())
}

fn effective_alphas(alphas: &[f64]) -> Result<Vec<f64>> {
    let list = if alphas.is_empty() {
        vec![3.0]
    } else {
        alphas.to_vec()
    };
    for &a in &list {
        ModulationParams::new(a)?;
    }
    Ok(list)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Summary lines go to stdout normally, but to stderr when the table itself
/// is already using stdout, so piped output stays machine-readable.
fn summarize(table_went_to_file: bool, lines: &str) {
    if table_went_to_file {
        print!("{lines}");
    } else {
        eprint!("{lines}");
    }
}

/// The full metric set for one pair, in stable column order.
fn pair_metrics(
    pred: &OrientedBox,
    target: &OrientedBox,
    alphas: &[f64],
    base_cfg: &LossConfig,
) -> Result<Vec<(String, f64)>> {
    let kf = kfiou(pred, target)?;
    let mut out = vec![
        ("skew_iou".to_string(), skew_iou(pred, target)?),
        ("kfiou".to_string(), kf),
        ("kfiou3".to_string(), 3.0 * kf),
    ];
    for &a in alphas {
        out.push((
            alpha_column_name(a),
            mkiou(pred, target, ModulationParams { alpha: a })?,
        ));
    }
    out.push(("ga_loss".to_string(), ga_loss(pred, target, base_cfg)?));
    for v in LossVariant::ALL {
        let cfg = LossConfig {
            variant: v,
            ..*base_cfg
        };
        out.push((format!("loss_{v}"), reg_loss(pred, target, &cfg)?.total));
    }
    Ok(out)
}

fn cmd_iou(args: &IouArgs) -> Result<()> {
    let pred = parse_box(&args.pred)?;
    let target = parse_box(&args.target)?;
    let alphas = effective_alphas(&args.alphas)?;
    let variant: LossVariant = args.variant.parse()?;
    let cfg = LossConfig {
        alpha: alphas[0],
        beta: args.beta,
        lambda: args.lambda,
        sl1_delta: args.sl1_delta,
        variant,
    };
    cfg.validate()?;

    let mut metrics = pair_metrics(&pred, &target, &alphas, &cfg)?;
    let breakdown = reg_loss(&pred, &target, &cfg)?;
    metrics.push(("reg_center".to_string(), breakdown.center_term));
    metrics.push(("reg_iou".to_string(), breakdown.iou_term));
    metrics.push(("reg_angle".to_string(), breakdown.angle_term));
    metrics.push(("reg_total".to_string(), breakdown.total));

    if args.json {
        let mut obj = serde_json::Map::new();
        for (k, v) in &metrics {
            obj.insert(k.clone(), json!(v));
        }
        println!("{}", serde_json::Value::Object(obj));
    } else {
        let width = metrics.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &metrics {
            println!("{k:<width$}  {v:.6}");
        }
    }
    Ok(())
}

fn render_sweep(table: &SweepTable, format: OutFormat) -> String {
    match format {
        OutFormat::Csv => table.to_csv(),
        OutFormat::Json => format!("{}\n", table.to_json()),
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let alphas = effective_alphas(&args.alphas)?;
    let format = parse_format(&args.format)?;
    let table = match args.kind.as_str() {
        "wh" => {
            let base = parse_box(args.base.as_deref().unwrap_or("0,0,4,2,0"))?;
            let lo = args.lo.unwrap_or(0.5);
            let hi = args.hi.unwrap_or(2.0);
            sweep_wh(&base, (lo, hi), args.steps.unwrap_or(151), &alphas)?
        }
        "angle" => {
            let base = parse_box(args.base.as_deref().unwrap_or("0,0,4,1,0"))?;
            let lo = args.lo.unwrap_or(-90.0).to_radians();
            let hi = args.hi.unwrap_or(90.0).to_radians();
            sweep_angle(&base, (lo, hi), args.steps.unwrap_or(181), &alphas)?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown sweep kind '{other}' (expected wh, angle)"
            )))
        }
    };
    write_or_print(&args.out, &render_sweep(&table, format))?;

    let mut lines = format!("rows {}\n", table.rows.len());
    for col in table.columns.iter().filter(|c| c.as_str() != "skew_iou") {
        lines.push_str(&format!(
            "consistency {col} {:.6}\n",
            consistency_metric(&table, col)?
        ));
    }
    summarize(args.out.is_some(), &lines);
    Ok(())
}

fn cmd_surface(args: &SurfaceArgs) -> Result<()> {
    let loss: SurfaceLoss = args.loss.parse()?;
    let format = parse_format(&args.format)?;
    let cfg = LossConfig {
        alpha: args.alpha,
        beta: args.beta,
        lambda: args.lambda,
        ..LossConfig::default()
    };
    let table = surface(
        loss,
        (args.ar_lo, args.ar_hi),
        (args.dtheta_lo.to_radians(), args.dtheta_hi.to_radians()),
        (args.ar_steps, args.dtheta_steps),
        &cfg,
    )?;
    let rendered = match format {
        OutFormat::Csv => table.to_csv(),
        OutFormat::Json => format!("{}\n", table.to_json()),
    };
    write_or_print(&args.out, &rendered)?;
    summarize(
        args.out.is_some(),
        &format!("cells {}\n", table.cells.len()),
    );
    Ok(())
}

fn fit_summary(trace: &FitTrace) -> String {
    let mut out = format!(
        "converged {}\nsteps_used {}\nfinal_iou {:.6}\nfinal_angle_residual_deg {:.6}\n",
        trace.converged,
        trace.steps.last().map_or(0, |s| s.step),
        trace.final_iou,
        trace.final_angle_residual.to_degrees(),
    );
    if let Some(s) = trace.steps.last() {
        let b = s.state;
        out.push_str(&format!(
            "final_box {},{},{},{},{}\n",
            b.cx,
            b.cy,
            b.w,
            b.h,
            b.theta.to_degrees()
        ));
    }
    out
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let target = parse_box(&args.target)?;
    let init = match &args.init {
        Some(s) => parse_box(s)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            random_init(&target, &mut rng)
        }
    };
    let variant: LossVariant = args.variant.parse()?;
    let cfg = LossConfig {
        alpha: args.alpha,
        beta: args.beta,
        lambda: args.lambda,
        sl1_delta: args.sl1_delta,
        variant,
    };
    let format = parse_format(&args.format)?;
    let mut spec = FitSpec::new(target, init, cfg);
    spec.max_steps = args.max_steps;
    spec.learning_rate = args.lr;
    spec.momentum = args.momentum;
    spec.stop_iou = args.stop_iou;
    spec.seed = args.seed;

    let render = |t: &FitTrace| match format {
        OutFormat::Csv => t.to_csv(),
        OutFormat::Json => t.to_jsonl(),
    };
    match fit(&spec) {
        Ok(trace) => {
            write_or_print(&args.out, &render(&trace))?;
            summarize(args.out.is_some(), &fit_summary(&trace));
            Ok(())
        }
        Err(Error::Diverged { step, trace }) => {
            // The partial trace is still written before the failure exit.
            write_or_print(&args.out, &render(&trace))?;
            summarize(args.out.is_some(), &format!("diverged_at_step {step}\n"));
            Err(Error::Diverged { step, trace })
        }
        Err(e) => Err(e),
    }
}

#[derive(Deserialize)]
struct JsonBoxDeg {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta_deg: f64,
}

impl JsonBoxDeg {
    fn into_box(self) -> Result<OrientedBox> {
        OrientedBox::new(
            self.cx,
            self.cy,
            self.w,
            self.h,
            self.theta_deg.to_radians(),
        )
    }
}

#[derive(Deserialize)]
struct JsonPair {
    id: String,
    pred: JsonBoxDeg,
    target: JsonBoxDeg,
}

const BATCH_CSV_HEADER: &str = "id,pred_cx,pred_cy,pred_w,pred_h,pred_theta_deg,\
                                target_cx,target_cy,target_w,target_h,target_theta_deg";

fn batch_csv_header() -> String {
    BATCH_CSV_HEADER.replace(' ', "")
}

fn parse_csv_record(line: &str) -> Result<BoxPairRecord> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 11 {
        return Err(Error::InvalidArgument(format!(
            "expected 11 comma-separated fields, got {}",
            fields.len()
        )));
    }
    let mut nums = [0.0f64; 10];
    for (slot, field) in nums.iter_mut().zip(&fields[1..]) {
        *slot = field
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad number '{field}'")))?;
    }
    Ok(BoxPairRecord {
        id: fields[0].trim().to_string(),
        pred: OrientedBox::new(nums[0], nums[1], nums[2], nums[3], nums[4].to_radians())?,
        target: OrientedBox::new(nums[5], nums[6], nums[7], nums[8], nums[9].to_radians())?,
    })
}

/// Reads a pair file, returning good records and per-line error messages.
fn read_pairs(path: &PathBuf) -> Result<(Vec<BoxPairRecord>, Vec<String>)> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let jsonl = match ext.as_str() {
        "jsonl" | "json" => true,
        "csv" => false,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unsupported input extension '.{other}' (expected .jsonl, .json, .csv)"
            )))
        }
    };
    let content = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut saw_header = false;
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !jsonl && !saw_header {
            saw_header = true;
            if line != batch_csv_header() {
                return Err(Error::InvalidBox(format!(
                    "line 1: csv header must be '{}'",
                    batch_csv_header()
                )));
            }
            continue;
        }
        let parsed: Result<BoxPairRecord> = if jsonl {
            serde_json::from_str::<JsonPair>(line)
                .map_err(|e| Error::InvalidArgument(e.to_string()))
                .and_then(|p| {
                    Ok(BoxPairRecord {
                        id: p.id,
                        pred: p.pred.into_box()?,
                        target: p.target.into_box()?,
                    })
                })
        } else {
            parse_csv_record(line)
        };
        match parsed {
            Ok(rec) => {
                if !seen_ids.insert(rec.id.clone()) {
                    errors.push(format!("line {line_no}: duplicate id '{}'", rec.id));
                } else {
                    records.push(rec);
                }
            }
            Err(e) => errors.push(format!("line {line_no}: {e}")),
        }
    }
    Ok((records, errors))
}

fn cmd_batch(args: &BatchArgs) -> Result<()> {
    let alphas = effective_alphas(&args.alphas)?;
    let format = parse_format(&args.format)?;
    let cfg = LossConfig {
        alpha: alphas[0],
        beta: args.beta,
        lambda: args.lambda,
        sl1_delta: args.sl1_delta,
        variant: LossVariant::MkGa,
    };
    cfg.validate()?;

    let (records, errors) = read_pairs(&args.input)?;
    for e in &errors {
        eprintln!("warning: {e}");
    }
    let total = records.len() + errors.len();
    if total == 0 {
        return Err(Error::InvalidArgument(format!(
            "no records in {}",
            args.input.display()
        )));
    }
    if errors.len() * 2 > total {
        return Err(Error::InvalidBox(format!(
            "{} of {} records are invalid",
            errors.len(),
            total
        )));
    }

    let mut columns: Vec<String> = Vec::new();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::with_capacity(records.len());
    for rec in &records {
        let metrics = pair_metrics(&rec.pred, &rec.target, &alphas, &cfg)?;
        if columns.is_empty() {
            columns = metrics.iter().map(|(k, _)| k.clone()).collect();
        }
        rows.push((
            rec.id.clone(),
            metrics.into_iter().map(|(_, v)| v).collect(),
        ));
    }

    let rendered = match format {
        OutFormat::Csv => {
            let mut out = String::from("id");
            for c in &columns {
                out.push(',');
                out.push_str(c);
            }
            out.push('\n');
            for (id, vals) in &rows {
                out.push_str(id);
                for v in vals {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
            out
        }
        OutFormat::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|(id, vals)| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("id".to_string(), json!(id));
                    for (c, v) in columns.iter().zip(vals) {
                        obj.insert(c.clone(), json!(v));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            format!("{}\n", serde_json::Value::Array(arr))
        }
    };
    write_or_print(&args.out, &rendered)?;

    // File-level consistency: how far each approximation sits from the
    // exact overlap, averaged over records.
    let mut lines = format!("records {}\nskipped {}\n", rows.len(), errors.len());
    let exact_idx = 0; // skew_iou is always the first metric column
    for (i, col) in columns.iter().enumerate() {
        if col == "skew_iou" || !(col == "kfiou3" || col.starts_with("mkiou_a")) {
            continue;
        }
        let mad: f64 = rows
            .iter()
            .map(|(_, v)| (v[i] - v[exact_idx]).abs())
            .sum::<f64>()
            / rows.len() as f64;
        lines.push_str(&format!("consistency {col} {mad:.6}\n"));
    }
    summarize(args.out.is_some(), &lines);
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Iou(a) => cmd_iou(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Surface(a) => cmd_surface(a),
        Cmd::Fit(a) => cmd_fit(a),
        Cmd::Batch(a) => cmd_batch(a),
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::UnknownColumn(_) => 1,
        Error::InvalidBox(_) | Error::Io(_) => 2,
        Error::DegenerateCovariance(_) | Error::NumericalFailure(_) | Error::Diverged { .. } => 3,
    }
}

/// Parses the process arguments and runs the selected command, translating
/// errors into the documented exit codes.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_literal_grammar() {
        let b = parse_box("1,2,4,2,90").unwrap();
        assert_eq!((b.cx, b.cy, b.w, b.h), (1.0, 2.0, 4.0, 2.0));
        assert!((b.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        let b = parse_box(" 0.5 , -1.5 , 2 , 1 , -45 ").unwrap();
        assert!((b.theta + std::f64::consts::FRAC_PI_4).abs() < 1e-12);

        // Too few fields and non-numbers are usage errors.
        assert!(matches!(parse_box("0,0,4"), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            parse_box("0,0,4,2,x"),
            Err(Error::InvalidArgument(_))
        ));
        // A parseable but impossible box is a data error.
        assert!(matches!(parse_box("0,0,0,2,0"), Err(Error::InvalidBox(_))));
        assert!(matches!(parse_box("0,0,-1,2,0"), Err(Error::InvalidBox(_))));
    }

    #[test]
    fn alpha_defaults_and_validation() {
        assert_eq!(effective_alphas(&[]).unwrap(), vec![3.0]);
        assert_eq!(effective_alphas(&[1.0, 2.5]).unwrap(), vec![1.0, 2.5]);
        assert!(effective_alphas(&[4.0]).is_err());
    }

    #[test]
    fn csv_records_round_trip() {
        let rec = parse_csv_record("a1,0,0,4,2,0,0,0,2,4,0").unwrap();
        assert_eq!(rec.id, "a1");
        assert_eq!(rec.pred.w, 4.0);
        assert_eq!(rec.target.h, 4.0);
        assert!(parse_csv_record("a1,0,0,4,2,0").is_err());
        assert!(matches!(
            parse_csv_record("a1,0,0,0,2,0,0,0,2,4,0"),
            Err(Error::InvalidBox(_))
        ));
    }

    #[test]
    fn metric_columns_are_stable() {
        let p = parse_box("0,0,4,2,0").unwrap();
        let t = parse_box("0,0,2,4,0").unwrap();
        let cfg = LossConfig::default();
        let m = pair_metrics(&p, &t, &[3.0], &cfg).unwrap();
        let names: Vec<&str> = m.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "skew_iou",
                "kfiou",
                "kfiou3",
                "mkiou_a3",
                "ga_loss",
                "loss_kf_linear",
                "loss_kf_exp",
                "loss_kf_neglog",
                "loss_mk",
                "loss_mk_ga"
            ]
        );
        // Known pair: exact 1/3, raw 1/4, modulated 1/2.
        assert!((m[0].1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((m[1].1 - 0.25).abs() < 1e-12);
        assert!((m[3].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(exit_code_for(&Error::InvalidArgument("x".into())), 1);
        assert_eq!(exit_code_for(&Error::UnknownColumn("x".into())), 1);
        assert_eq!(exit_code_for(&Error::InvalidBox("x".into())), 2);
        assert_eq!(exit_code_for(&Error::Io(std::io::Error::other("x"))), 2);
        assert_eq!(exit_code_for(&Error::DegenerateCovariance("x".into())), 3);
        assert_eq!(exit_code_for(&Error::NumericalFailure("x".into())), 3);
        assert_eq!(
            exit_code_for(&Error::Diverged {
                step: 0,
                trace: Box::default()
            }),
            3
        );
    }
}
