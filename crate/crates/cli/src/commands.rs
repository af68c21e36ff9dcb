use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mmsl_core::dataset::{scan_dir, synth_extreme as synth_gallery, Split};
use mmsl_core::eval::{evaluate, load_embeddings, pairwise_distances};
use mmsl_core::ops::OpRecord;
use mmsl_core::pipeline::{default_cell_count, transform_keyed};
use mmsl_core::{load_image, save_image, Branch, MmslConfig, OpLogEntry, PatchCount};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::preview::render_panel;
use crate::{
    data_err, same_dir, usage_err, AugmentArgs, CliError, EvalArgs, PipelineFlags, PreviewArgs,
    SynthArgs,
};

/// The effective pipeline settings, as echoed in run summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub p_g: f64,
    pub p_t: f64,
    pub rows: u32,
    pub cols: u32,
    pub n: usize,
    pub mode: String,
    pub seed: u64,
}

impl From<&MmslConfig> for ConfigEcho {
    fn from(cfg: &MmslConfig) -> Self {
        let mode = match cfg.patch_count {
            PatchCount::Fixed { .. } => "fixed",
            PatchCount::UniformUpTo { .. } => "uniform_up_to",
        };
        ConfigEcho {
            p_g: cfg.p_g,
            p_t: cfg.p_t,
            rows: cfg.rows,
            cols: cfg.cols,
            n: cfg.patch_count.max(),
            mode: mode.to_string(),
            seed: cfg.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCounts {
    pub global: usize,
    pub local: usize,
    pub identity: usize,
}

/// JSON summary printed by `augment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub images: usize,
    pub written: usize,
    pub skipped: usize,
    pub branches: BranchCounts,
    pub config: ConfigEcho,
}

fn resolve_config(flags: &PipelineFlags) -> Result<MmslConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<MmslConfig>(&text)
                .map_err(|e| usage_err(format!("{}: {e}", path.display())))?
        }
        None => MmslConfig::default(),
    };
    let grid = (cfg.rows, cfg.cols);
    cfg.rows = flags.rows.unwrap_or(cfg.rows);
    cfg.cols = flags.cols.unwrap_or(cfg.cols);
    let n = match flags.cells {
        Some(n) => Some(n),
        // keep the default one-third ratio when only the grid changes
        None if (cfg.rows, cfg.cols) != grid => Some(default_cell_count(cfg.rows, cfg.cols)),
        None => None,
    };
    if let Some(n) = n {
        cfg.patch_count = match cfg.patch_count {
            PatchCount::Fixed { .. } => PatchCount::Fixed { n },
            PatchCount::UniformUpTo { .. } => PatchCount::UniformUpTo { n },
        };
    }
    cfg.p_g = flags.pg.unwrap_or(cfg.p_g);
    cfg.p_t = flags.pt.unwrap_or(cfg.p_t);
    cfg.seed = flags.seed.unwrap_or(cfg.seed);
    cfg.validate().map_err(usage_err)?;
    Ok(cfg)
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

/// PNG and JPEG files directly inside `dir`, sorted by file name.
pub fn image_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| data_err(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(data_err)?.path();
        if path.is_file() && is_image(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn log_json(log: &[OpLogEntry]) -> String {
    let mut text = serde_json::to_string_pretty(log).expect("log serialises");
    text.push('\n');
    text
}

/// Reads a `.ops.json` log written by `augment` or `preview` and binds it to
/// an image of the given size.
pub fn read_ops_log(path: &Path, width: u32, height: u32) -> Result<Vec<OpLogEntry>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    let records: Vec<OpRecord> =
        serde_json::from_str(&text).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    records
        .iter()
        .map(|r| r.bind(width, height).map_err(data_err))
        .collect()
}

enum Outcome {
    Done(Branch),
    Skipped(String),
}

pub(crate) fn augment(
    args: &AugmentArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = resolve_config(&args.pipeline)?;
    if same_dir(&args.input, &args.out) {
        return Err(usage_err("--out must not be the input directory"));
    }
    if !args.input.is_dir() {
        return Err(data_err(format!(
            "input directory {} does not exist",
            args.input.display()
        )));
    }
    let files = image_files(&args.input)?;
    if files.is_empty() {
        return Err(data_err(format!(
            "no PNG or JPEG images in {}",
            args.input.display()
        )));
    }
    let mut stems = HashSet::new();
    for f in &files {
        if !stems.insert(stem(f)) {
            return Err(data_err(format!(
                "two inputs share the output name {}.png",
                stem(f)
            )));
        }
    }
    fs::create_dir_all(&args.out).map_err(|e| data_err(format!("{}: {e}", args.out.display())))?;

    let outcomes = files
        .par_iter()
        .enumerate()
        .map(|(i, path)| -> Result<Outcome, CliError> {
            let img = match load_image(path) {
                Ok(img) => img,
                Err(e) => return Ok(Outcome::Skipped(e.to_string())),
            };
            let sample = match transform_keyed(&img, (), &cfg, i as u64) {
                Ok(s) => s,
                Err(e) => return Ok(Outcome::Skipped(format!("{}: {e}", path.display()))),
            };
            let name = stem(path);
            save_image(&sample.image, args.out.join(format!("{name}.png"))).map_err(data_err)?;
            write_file(
                &args.out.join(format!("{name}.ops.json")),
                &log_json(&sample.log),
            )?;
            Ok(Outcome::Done(sample.branch))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut counts = BranchCounts::default();
    let mut skipped = 0;
    for o in &outcomes {
        match o {
            Outcome::Done(Branch::Global) => counts.global += 1,
            Outcome::Done(Branch::Local) => counts.local += 1,
            Outcome::Done(Branch::Identity) => counts.identity += 1,
            Outcome::Skipped(why) => {
                skipped += 1;
                let _ = writeln!(err, "warning: skipped {why}");
            }
        }
    }
    if skipped == files.len() {
        return Err(data_err("no image could be processed"));
    }
    let summary = AugmentSummary {
        images: files.len(),
        written: files.len() - skipped,
        skipped,
        branches: counts,
        config: ConfigEcho::from(&cfg),
    };
    if args.pretty {
        let c = &summary.config;
        writeln!(
            out,
            "{} of {} images written to {} ({} skipped)\n\
             branches: global {}, local {}, identity {}\n\
             config: p_g={} p_t={} grid={}x{} cells={} ({}) seed={}",
            summary.written,
            summary.images,
            args.out.display(),
            summary.skipped,
            summary.branches.global,
            summary.branches.local,
            summary.branches.identity,
            c.p_g,
            c.p_t,
            c.rows,
            c.cols,
            c.n,
            c.mode,
            c.seed,
        )
        .map_err(data_err)?;
    } else {
        writeln!(
            out,
            "{}",
            serde_json::to_string(&summary).expect("summary serialises")
        )
        .map_err(data_err)?;
    }
    Ok(())
}

pub(crate) fn synth_extreme(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if same_dir(&args.input, &args.out) {
        return Err(usage_err("--out must not be the gallery directory"));
    }
    if !args.input.is_dir() {
        return Err(data_err(format!(
            "gallery directory {} does not exist",
            args.input.display()
        )));
    }
    let gallery = scan_dir(&args.input, Split::Gallery).map_err(data_err)?;
    if gallery.is_empty() {
        return Err(data_err(format!(
            "no gallery images in {}",
            args.input.display()
        )));
    }
    let manifest = synth_gallery(&gallery, &args.out, args.seed).map_err(data_err)?;
    let manifest_path = args.out.join("manifest.json");
    if args.pretty {
        writeln!(
            out,
            "{} images written to {}, manifest at {}",
            manifest.len(),
            args.out.display(),
            manifest_path.display()
        )
    } else {
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "images": manifest.len(),
                "seed": args.seed,
                "manifest": manifest_path.display().to_string(),
            })
        )
    }
    .map_err(data_err)
}

pub(crate) fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.ranks.is_empty() || args.ranks.contains(&0) {
        return Err(usage_err(
            "--ranks must be a comma-separated list of positive integers",
        ));
    }
    let max_rank = *args.ranks.iter().max().expect("non-empty");
    let query = load_embeddings(&args.query, &args.query_labels).map_err(data_err)?;
    let gallery = load_embeddings(&args.gallery, &args.gallery_labels).map_err(data_err)?;
    let dist = pairwise_distances(&query, &gallery, args.metric.into()).map_err(data_err)?;
    let result = evaluate(&dist, query.meta(), gallery.meta(), max_rank).map_err(data_err)?;
    let report = result.report(&args.ranks).map_err(data_err)?;
    if args.pretty {
        for (k, c) in report.ranks.iter().zip(&report.cmc) {
            writeln!(out, "rank-{k:<3} {:6.2}%", c * 100.0).map_err(data_err)?;
        }
        writeln!(
            out,
            "mAP      {:6.2}%  ({} of {} queries valid)",
            report.map * 100.0,
            result.valid_queries,
            query.len()
        )
        .map_err(data_err)
    } else {
        writeln!(
            out,
            "{}",
            serde_json::to_string(&report).expect("report serialises")
        )
        .map_err(data_err)
    }
}

/// `<dir>/<stem>.panel.png` next to the transformed image.
pub(crate) fn panel_path(image_out: &Path) -> PathBuf {
    image_out.with_file_name(format!("{}.panel.png", stem(image_out)))
}

pub(crate) fn preview(args: &PreviewArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&args.pipeline)?;
    let img = load_image(&args.input).map_err(data_err)?;
    let sample = transform_keyed(&img, (), &cfg, 0).map_err(data_err)?;
    let panel = render_panel(&img, &sample, &cfg).map_err(data_err)?;
    let panel_out = panel_path(&args.out);
    save_image(&sample.image, &args.out).map_err(data_err)?;
    save_image(&panel.image, &panel_out).map_err(data_err)?;

    if args.pretty {
        writeln!(out, "branch: {:?}", sample.branch).map_err(data_err)?;
        for (i, e) in sample.log.iter().enumerate() {
            let r = e.region.rect();
            let region = if e.region.is_global() {
                "global".to_string()
            } else {
                format!("cell x={} y={} w={} h={}", r.x, r.y, r.w, r.h)
            };
            writeln!(out, "{:>3}. {} on {region}", i + 1, e.op).map_err(data_err)?;
        }
        writeln!(out, "panel: {}", panel_out.display()).map_err(data_err)
    } else {
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "branch": sample.branch,
                "log": sample.log,
                "image": args.out.display().to_string(),
                "panel": panel_out.display().to_string(),
            })
        )
        .map_err(data_err)
    }
}
