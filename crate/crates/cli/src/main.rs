//! `nugap`: batch front end for ν-gap clustering, prototype construction and
//! controller synthesis.
//!
//! Exit codes: 0 on success, 2 when some cluster or system failed but the
//! report was written, 1 on fatal input errors.

// NaN must fail the argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nugap::cluster::{complete_linkage, cut};
use nugap::controller::{closed_loop, ncf_controller, verify_cluster, FeedbackConvention, MemberReport};
use nugap::dataset::{generate_dataset, DatasetConfig};
use nugap::io::{csv_table, write_file, write_json, SystemRecord, SystemSet};
use nugap::metric::{distance_matrix, DistanceMatrix};
use nugap::pipeline::{emit_plots, process_cluster, run_pipeline, PipelineConfig};
use nugap::prototype::{PrototypeConfig, PrototypeResult};
use nugap::ss::realize;
use nugap::tsne::{tsne, TsneConfig};
use nugap::{plots, Error, FrequencyGrid, RationalTF, Result};

#[derive(Parser)]
#[command(name = "nugap", version, about = "Cluster SISO systems by nu-gap and synthesize one robust controller per cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic system set as systems.json
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 80)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise nu-gap distances as distances.csv
    Distances {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Complete-linkage dendrogram and cut from distances.csv
    Cluster {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        cut: f64,
    },
    /// One prototype per cluster of the dendrogram cut
    Prototype {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        cut: f64,
        /// Precomputed distances.csv; computed when absent
        #[arg(long)]
        distances: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        proto: ProtoArgs,
    },
    /// Normalized coprime factor controller for each input system
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.05)]
        gamma_rel: f64,
        #[arg(long, default_value_t = FeedbackConvention::Positive)]
        convention: FeedbackConvention,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Check every input system against one synthesized controller
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// controllers.json written by `synthesize`
        #[arg(long)]
        controller: PathBuf,
        /// Entry of the controller file to use; the first one by default
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Two-dimensional t-SNE embedding of distances.csv
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
    },
    /// Open-loop step responses, and closed-loop ones with a controller
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        controller: Option<PathBuf>,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Full run with every artifact; generates a set when no input is given
    Pipeline {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        cut: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Size of the generated set when no input is given
        #[arg(long, default_value_t = 80)]
        n: usize,
        #[arg(long, default_value_t = 1.05)]
        gamma_rel: f64,
        #[arg(long, default_value_t = FeedbackConvention::Positive)]
        convention: FeedbackConvention,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long)]
        no_embed: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        proto: ProtoArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 1e-4)]
    grid_min: f64,
    #[arg(long, default_value_t = 1e4)]
    grid_max: f64,
    #[arg(long, default_value_t = 600)]
    grid_points: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::log_spaced(self.grid_min, self.grid_max, self.grid_points)
    }
}

#[derive(Args, Clone, Copy)]
struct ProtoArgs {
    #[arg(long, default_value_t = 20)]
    kmax: usize,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
}

impl ProtoArgs {
    fn config(&self) -> PrototypeConfig {
        PrototypeConfig {
            k_max: self.kmax,
            max_outer: self.max_outer,
            ..PrototypeConfig::default()
        }
    }
}

/// One entry of controllers.json.
#[derive(Debug, Serialize, Deserialize)]
struct ControllerRecord {
    id: String,
    plant: RationalTF,
    controller: Option<RationalTF>,
    b_achieved: Option<f64>,
    b_max: Option<f64>,
    gamma: Option<f64>,
    gamma_rel: f64,
    convention: FeedbackConvention,
    error: Option<String>,
}

#[derive(Serialize)]
struct PrototypeEntry {
    cluster: usize,
    members: Vec<String>,
    result: Option<PrototypeResult>,
    errors: Vec<String>,
}

#[derive(Serialize)]
struct Verification<'a> {
    controller_id: &'a str,
    b_achieved: f64,
    convention: FeedbackConvention,
    all_margin_ok: bool,
    defects: usize,
    members: Vec<MemberReport>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_systems(path: &Path) -> Result<SystemSet> {
    let set = SystemSet::load(path)?;
    if set.is_empty() {
        return Err(Error::Parse(format!("{}: no systems", path.display())));
    }
    Ok(set)
}

fn load_distances(path: &Path) -> Result<DistanceMatrix> {
    DistanceMatrix::from_csv(&read_text(path)?)
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn status(failed: bool) -> u8 {
    if failed {
        2
    } else {
        0
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Generate { seed, n, out } => {
            create_dir(&out)?;
            let (set, _) = generate_dataset(seed, n, &DatasetConfig::default())?;
            write_file(&out.join("systems.json"), &set.to_json())?;
            Ok(0)
        }
        Command::Distances { input, out, grid } => {
            let set = load_systems(&input)?;
            let grid = grid.grid()?;
            create_dir(&out)?;
            let d = distance_matrix(&set.ids, &set.systems, &grid);
            warn_all(&d.warnings);
            write_file(&out.join("distances.csv"), &d.to_csv())?;
            Ok(0)
        }
        Command::Cluster { input, out, cut: h } => {
            if !(h > 0.0 && h <= 1.0) {
                return Err(Error::InvalidArgument("cut height must lie in (0, 1]".into()));
            }
            let d = load_distances(&input)?;
            create_dir(&out)?;
            let dend = complete_linkage(&d)?;
            write_json(&out.join("dendrogram.json"), &dend)?;
            write_json(&out.join("assignment.json"), &cut(&dend, h))?;
            write_file(&out.join("dendrogram.svg"), &plots::dendrogram_svg(&dend, &d.labels, h))?;
            Ok(0)
        }
        Command::Prototype {
            input,
            out,
            cut: h,
            distances,
            grid,
            proto,
        } => {
            let set = load_systems(&input)?;
            let cfg = PipelineConfig {
                cut_height: h,
                grid_min: grid.grid_min,
                grid_max: grid.grid_max,
                grid_points: grid.grid_points,
                prototype: proto.config(),
                ..PipelineConfig::default()
            };
            cfg.validate()?;
            let grid = cfg.grid()?;
            let d = match distances {
                Some(p) => {
                    let d = load_distances(&p)?;
                    if d.labels != set.ids {
                        return Err(Error::Parse("distance labels do not match the system ids".into()));
                    }
                    d
                }
                None => distance_matrix(&set.ids, &set.systems, &grid),
            };
            create_dir(&out)?;
            let dend = complete_linkage(&d)?;
            let assignment = cut(&dend, h);
            let mut entries = Vec::new();
            let mut records = Vec::new();
            for (k, members) in assignment.clusters().into_iter().enumerate() {
                let (result, _, errors) = process_cluster(&set, &d, &members, &cfg, &grid);
                if let Some(r) = &result {
                    records.push(SystemRecord::from_tf(format!("P{k}"), &r.prototype));
                }
                entries.push(PrototypeEntry {
                    cluster: k,
                    members: members.iter().map(|&i| set.ids[i].clone()).collect(),
                    result,
                    errors: errors.into_iter().filter(|e| e.starts_with("prototype")).collect(),
                });
            }
            write_json(&out.join("prototypes.json"), &entries)?;
            write_json(&out.join("prototype_systems.json"), &records)?;
            let failed = entries.iter().any(|e| !e.result.as_ref().is_some_and(|r| r.certified));
            Ok(status(failed))
        }
        Command::Synthesize {
            input,
            out,
            gamma_rel,
            convention,
            grid,
        } => {
            let set = load_systems(&input)?;
            let grid = grid.grid()?;
            if !(gamma_rel > 1.0) {
                return Err(Error::InvalidArgument("gamma_rel must exceed 1".into()));
            }
            create_dir(&out)?;
            let records: Vec<ControllerRecord> = set
                .ids
                .iter()
                .zip(&set.systems)
                .map(|(id, g)| match ncf_controller(g, gamma_rel, convention, &grid) {
                    Ok(s) => ControllerRecord {
                        id: id.clone(),
                        plant: g.clone(),
                        controller: Some(s.controller),
                        b_achieved: Some(s.b_achieved),
                        b_max: Some(s.b_max),
                        gamma: Some(s.gamma),
                        gamma_rel,
                        convention,
                        error: None,
                    },
                    Err(e) => ControllerRecord {
                        id: id.clone(),
                        plant: g.clone(),
                        controller: None,
                        b_achieved: None,
                        b_max: None,
                        gamma: None,
                        gamma_rel,
                        convention,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            write_json(&out.join("controllers.json"), &records)?;
            Ok(status(records.iter().any(|r| r.error.is_some())))
        }
        Command::Verify {
            input,
            controller,
            id,
            out,
            grid,
        } => {
            let set = load_systems(&input)?;
            let grid = grid.grid()?;
            let rec = select_controller(&controller, id.as_deref())?;
            let (Some(k), Some(b)) = (&rec.controller, rec.b_achieved) else {
                return Err(Error::Parse(format!("controller entry {} has no controller", rec.id)));
            };
            let named: Vec<(String, RationalTF)> = set.ids.iter().cloned().zip(set.systems.iter().cloned()).collect();
            let members = verify_cluster(k, b, &rec.plant, &named, rec.convention, &grid)?;
            let v = Verification {
                controller_id: &rec.id,
                b_achieved: b,
                convention: rec.convention,
                all_margin_ok: members.iter().all(|m| m.margin_ok),
                defects: members.iter().filter(|m| m.defect).count(),
                members,
            };
            create_dir(&out)?;
            write_json(&out.join("verification.json"), &v)?;
            Ok(status(!v.all_margin_ok || v.defects > 0))
        }
        Command::Embed {
            input,
            out,
            seed,
            iterations,
        } => {
            let d = load_distances(&input)?;
            let cfg = TsneConfig {
                seed,
                iterations,
                ..TsneConfig::default()
            };
            let e = tsne(&d, &cfg)?;
            create_dir(&out)?;
            write_file(&out.join("tsne.csv"), &e.to_csv(&d.labels, &[]))?;
            write_file(&out.join("tsne_kl.csv"), &e.kl_csv())?;
            let points: Vec<(f64, f64, usize, String)> =
                e.coords.iter().zip(&d.labels).map(|(c, l)| (c[0], c[1], 0, l.clone())).collect();
            write_file(&out.join("tsne.svg"), &plots::scatter_plot("t-SNE embedding", &points, &[]))?;
            Ok(0)
        }
        Command::Simulate {
            input,
            out,
            controller,
            id,
            t_end,
            dt,
        } => {
            if !(t_end > 0.0) || !(dt > 0.0) || dt > t_end {
                return Err(Error::InvalidArgument("need 0 < dt <= t_end".into()));
            }
            let set = load_systems(&input)?;
            let rec = controller.map(|p| select_controller(&p, id.as_deref())).transpose()?;
            let mut columns = vec!["t".to_string()];
            let mut data = Vec::new();
            let mut failed = false;
            let n_t = (t_end / dt).round() as usize + 1;
            let mut add = |name: String, g: Result<RationalTF>| {
                columns.push(name.clone());
                match g.and_then(|g| realize(&g)?.step_response(t_end, dt)) {
                    Ok(ts) => data.push(ts.y),
                    Err(e) => {
                        eprintln!("warning: {name}: {e}");
                        failed = true;
                        data.push(vec![f64::NAN; n_t]);
                    }
                }
            };
            for (sid, g) in set.ids.iter().zip(&set.systems) {
                add(format!("{sid}_open"), Ok(g.clone()));
            }
            if let Some(rec) = &rec {
                if let Some(k) = &rec.controller {
                    for (sid, g) in set.ids.iter().zip(&set.systems) {
                        add(format!("{sid}_closed"), closed_loop(g, k, rec.convention));
                    }
                }
            }
            let rows = (0..n_t).map(|i| {
                let mut row = vec![i as f64 * dt];
                row.extend(data.iter().map(|y| y.get(i).copied().unwrap_or(f64::NAN)));
                row
            });
            create_dir(&out)?;
            let csv = csv_table(&columns, rows.collect::<Vec<_>>());
            let series: Vec<(String, Vec<(f64, f64)>)> = columns[1..]
                .iter()
                .zip(&data)
                .map(|(c, y)| (c.clone(), y.iter().enumerate().map(|(i, v)| (i as f64 * dt, *v)).collect()))
                .collect();
            write_file(&out.join("steps.csv"), &csv)?;
            write_file(
                &out.join("steps.svg"),
                &plots::line_plot("step responses", "t [s]", "y", &series, false),
            )?;
            Ok(status(failed))
        }
        Command::Pipeline {
            input,
            out,
            cut: h,
            seed,
            n,
            gamma_rel,
            convention,
            t_end,
            dt,
            no_embed,
            grid,
            proto,
        } => {
            let set = match input {
                Some(p) => load_systems(&p)?,
                None => generate_dataset(seed, n, &DatasetConfig::default())?.0,
            };
            let cfg = PipelineConfig {
                cut_height: h,
                grid_min: grid.grid_min,
                grid_max: grid.grid_max,
                grid_points: grid.grid_points,
                gamma_rel,
                prototype: proto.config(),
                seed,
                t_end,
                dt,
                convention,
                embed: !no_embed,
                tsne: TsneConfig::default(),
            };
            let result = run_pipeline(&set, &cfg)?;
            emit_plots(&result, &out)?;
            for (stage, secs) in &result.timings.stages {
                eprintln!("{stage}: {secs:.3} s");
            }
            let r = &result.report;
            warn_all(&r.warnings);
            eprintln!(
                "{} systems, {} initial clusters, {} final clusters, {} re-splits, {} failed, {} defects",
                r.n_systems, r.initial_clusters, r.final_clusters, r.resplits, r.failed_clusters, r.defects
            );
            Ok(status(r.failed_clusters > 0 || r.defects > 0))
        }
    }
}

fn select_controller(path: &Path, id: Option<&str>) -> Result<ControllerRecord> {
    let records: Vec<ControllerRecord> =
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let found = match id {
        Some(id) => records.into_iter().find(|r| r.id == id),
        None => records.into_iter().next(),
    };
    found.ok_or_else(|| Error::Parse(format!("{}: no matching controller entry", path.display())))
}
