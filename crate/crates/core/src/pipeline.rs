//! End-to-end run: distances, clustering, per-cluster prototype and
//! controller, verification, simulation and embedding, plus artifact output.
//!
//! Clusters come from a dendrogram cut. A cluster whose prototype is not
//! certified, whose controller cannot be synthesized, or which has a member
//! outside the achieved margin is replaced by its two dendrogram children.
//! Singletons are final whatever their outcome.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::{complete_linkage, cut, diameter, ClusterAssignment, Dendrogram};
use crate::controller::{closed_loop, ncf_controller, verify_cluster, ControllerResult, FeedbackConvention};
use crate::error::{Error, Result};
use crate::freq::FrequencyGrid;
use crate::io::{csv_table, write_file, write_json, SystemSet};
use crate::metric::{distance_matrix, extend_distances, kappa_jw, DistanceMatrix};
use crate::plots;
use crate::prototype::{prototype, PrototypeConfig, PrototypeResult};
use crate::ss::realize;
use crate::tf::RationalTF;
use crate::tsne::{tsne, EmbeddingResult, TsneConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub cut_height: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub gamma_rel: f64,
    pub prototype: PrototypeConfig,
    pub seed: u64,
    pub t_end: f64,
    pub dt: f64,
    pub convention: FeedbackConvention,
    /// Skip the embedding stage when false.
    pub embed: bool,
    pub tsne: TsneConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            cut_height: 0.6,
            grid_min: 1e-4,
            grid_max: 1e4,
            grid_points: 600,
            gamma_rel: 1.05,
            prototype: PrototypeConfig::default(),
            seed: 1,
            t_end: 20.0,
            dt: 0.01,
            convention: FeedbackConvention::Positive,
            embed: true,
            tsne: TsneConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.cut_height > 0.0 && self.cut_height <= 1.0) {
            return bad("cut height must lie in (0, 1]");
        }
        if !(self.gamma_rel > 1.0) || !self.gamma_rel.is_finite() {
            return bad("gamma_rel must exceed 1");
        }
        if !(self.t_end > 0.0) || !(self.dt > 0.0) || self.dt > self.t_end {
            return bad("need 0 < dt <= t_end");
        }
        if self.prototype.k_max == 0 {
            return bad("kmax must be positive");
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::log_spaced(self.grid_min, self.grid_max, self.grid_points)
    }
}

/// Final state of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub cluster: usize,
    /// Dendrogram node the cluster corresponds to.
    pub node: usize,
    pub members: Vec<String>,
    pub member_indices: Vec<usize>,
    pub diameter: f64,
    pub certified: bool,
    pub synthesized: bool,
    /// Certified, synthesized and every member inside the achieved margin.
    pub ok: bool,
    pub prototype: Option<PrototypeResult>,
    pub controller: Option<ControllerResult>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub n_systems: usize,
    pub cut_height: f64,
    pub initial_clusters: usize,
    pub final_clusters: usize,
    /// Number of clusters replaced by their dendrogram children.
    pub resplits: usize,
    pub all_certified: bool,
    pub all_synthesized: bool,
    pub failed_clusters: usize,
    /// Members judged safe by the margin but not internally stable.
    pub defects: usize,
    /// Final cluster index per system.
    pub labels: Vec<usize>,
    pub clusters: Vec<ClusterReport>,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
}

/// Sampled curves for one cluster; `columns[0]` names the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub cluster: usize,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn to_csv(&self) -> String {
        csv_table(&self.columns, self.rows.iter().cloned())
    }

    fn series(&self) -> Vec<(String, Vec<(f64, f64)>)> {
        (1..self.columns.len())
            .map(|c| (self.columns[c].clone(), self.rows.iter().map(|r| (r[0], r[c])).collect()))
            .collect()
    }
}

/// Wall-clock stage durations; reported on stderr, never written to
/// artifacts, so reruns stay byte-identical.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    fn record(&mut self, name: &str, start: Instant) {
        self.stages.push((name.to_string(), start.elapsed().as_secs_f64()));
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub systems: SystemSet,
    pub distances: DistanceMatrix,
    pub dendrogram: Dendrogram,
    pub initial_assignment: ClusterAssignment,
    pub report: RunReport,
    pub steps: Vec<CurveTable>,
    pub kappa: Vec<CurveTable>,
    pub embedding: Option<EmbeddingResult>,
    /// Systems followed by prototypes, matching the embedding rows.
    pub embedding_ids: Vec<String>,
    pub embedding_labels: Vec<String>,
    pub timings: Timings,
}

struct Outcome {
    prototype: Option<PrototypeResult>,
    controller: Option<ControllerResult>,
    errors: Vec<String>,
}

impl Outcome {
    fn certified(&self) -> bool {
        self.prototype.as_ref().is_some_and(|p| p.certified)
    }

    fn ok(&self) -> bool {
        self.certified() && self.controller.as_ref().is_some_and(|c| c.all_margin_ok())
    }
}

/// Prototype, controller and member verification for one cluster.
pub fn process_cluster(
    set: &SystemSet,
    d: &DistanceMatrix,
    members: &[usize],
    cfg: &PipelineConfig,
    grid: &FrequencyGrid,
) -> (Option<PrototypeResult>, Option<ControllerResult>, Vec<String>) {
    let o = process(set, d, members, cfg, grid);
    (o.prototype, o.controller, o.errors)
}

fn process(set: &SystemSet, d: &DistanceMatrix, members: &[usize], cfg: &PipelineConfig, grid: &FrequencyGrid) -> Outcome {
    let systems: Vec<RationalTF> = members.iter().map(|&i| set.systems[i].clone()).collect();
    let mut errors = Vec::new();
    let proto = match prototype(&systems, &d.subset(members), &cfg.prototype, grid) {
        Ok(p) => p,
        Err(e) => {
            errors.push(format!("prototype: {e}"));
            return Outcome {
                prototype: None,
                controller: None,
                errors,
            };
        }
    };
    let controller = match ncf_controller(&proto.prototype, cfg.gamma_rel, cfg.convention, grid) {
        Ok(syn) => {
            let named: Vec<(String, RationalTF)> =
                members.iter().map(|&i| (set.ids[i].clone(), set.systems[i].clone())).collect();
            match verify_cluster(&syn.controller, syn.b_achieved, &proto.prototype, &named, cfg.convention, grid) {
                Ok(reports) => Some(ControllerResult {
                    controller: syn.controller,
                    b_achieved: syn.b_achieved,
                    b_max_plant: syn.b_max,
                    gamma_rel: syn.gamma_rel,
                    convention: syn.convention,
                    member_reports: reports,
                }),
                Err(e) => {
                    errors.push(format!("verification: {e}"));
                    None
                }
            }
        }
        Err(e) => {
            errors.push(format!("synthesis: {e}"));
            None
        }
    };
    if !proto.certified {
        errors.push(format!(
            "prototype not certified: max distance {:.6} vs b_max {:.6}",
            proto.max_distance, proto.b_max
        ));
    }
    Outcome {
        prototype: Some(proto),
        controller,
        errors,
    }
}

pub fn run_pipeline(set: &SystemSet, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    if set.len() < 2 {
        return Err(Error::InvalidArgument("the pipeline needs at least two systems".into()));
    }
    let grid = cfg.grid()?;
    let mut timings = Timings::default();

    let t = Instant::now();
    let d = distance_matrix(&set.ids, &set.systems, &grid);
    timings.record("distances", t);

    let t = Instant::now();
    let dend = complete_linkage(&d)?;
    let initial = cut(&dend, cfg.cut_height);
    let mut queue = dend.cut_nodes(cfg.cut_height);
    let initial_clusters = queue.len();
    let mut finals: Vec<(usize, Vec<usize>, Outcome)> = Vec::new();
    let mut resplits = 0;
    while !queue.is_empty() {
        let batch: Vec<(usize, Vec<usize>, Outcome)> = queue
            .par_iter()
            .map(|&node| {
                let members = dend.members(node);
                let o = process(set, &d, &members, cfg, &grid);
                (node, members, o)
            })
            .collect();
        queue = Vec::new();
        for (node, members, o) in batch {
            match dend.children(node) {
                Some((a, b)) if !o.ok() => {
                    log::info!("re-splitting node {node} ({} members)", members.len());
                    resplits += 1;
                    queue.push(a);
                    queue.push(b);
                }
                _ => finals.push((node, members, o)),
            }
        }
    }
    finals.sort_by_key(|(_, m, _)| m[0]);
    timings.record("clusters", t);

    let mut labels = vec![0; set.len()];
    let mut clusters = Vec::with_capacity(finals.len());
    for (k, (node, members, o)) in finals.into_iter().enumerate() {
        for &i in &members {
            labels[i] = k;
        }
        let certified = o.certified();
        let ok = o.ok();
        clusters.push(ClusterReport {
            cluster: k,
            node,
            members: members.iter().map(|&i| set.ids[i].clone()).collect(),
            diameter: diameter(&members, &d),
            member_indices: members,
            certified,
            synthesized: o.controller.is_some(),
            ok,
            prototype: o.prototype,
            controller: o.controller,
            errors: o.errors,
        });
    }

    let t = Instant::now();
    let mut warnings = d.warnings.clone();
    let steps: Vec<CurveTable> = clusters
        .par_iter()
        .map(|c| step_table(set, c, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(table, w)| {
            warnings.extend(w);
            table
        })
        .collect();
    timings.record("simulation", t);

    let kappa: Vec<CurveTable> = clusters.par_iter().map(|c| kappa_table(set, c, &grid)).collect();

    let t = Instant::now();
    let mut embedding_ids = set.ids.clone();
    let mut embedding_labels: Vec<String> = labels.iter().map(|k| k.to_string()).collect();
    let mut embedding = None;
    if cfg.embed {
        let mut extra_ids = Vec::new();
        let mut extra = Vec::new();
        for c in &clusters {
            if let Some(p) = &c.prototype {
                extra_ids.push(format!("P{}", c.cluster));
                extra.push(p.prototype.clone());
                embedding_labels.push(c.cluster.to_string());
            }
        }
        embedding_ids.extend(extra_ids.iter().cloned());
        let full = extend_distances(&d, &set.systems, &extra_ids, &extra, &grid);
        if full.len() >= 2 {
            let tcfg = TsneConfig { seed: cfg.seed, ..cfg.tsne };
            embedding = Some(tsne(&full, &tcfg)?);
        }
    }
    timings.record("embedding", t);

    let defects = clusters
        .iter()
        .filter_map(|c| c.controller.as_ref())
        .map(|c| c.defects())
        .sum();
    for c in &clusters {
        for e in &c.errors {
            warnings.push(format!("cluster {}: {e}", c.cluster));
        }
    }
    let report = RunReport {
        n_systems: set.len(),
        cut_height: cfg.cut_height,
        initial_clusters,
        final_clusters: clusters.len(),
        resplits,
        all_certified: clusters.iter().all(|c| c.certified),
        all_synthesized: clusters.iter().all(|c| c.synthesized),
        failed_clusters: clusters.iter().filter(|c| !c.ok).count(),
        defects,
        labels,
        clusters,
        warnings,
        config: cfg.clone(),
    };
    Ok(PipelineOutput {
        systems: set.clone(),
        distances: d,
        dendrogram: dend,
        initial_assignment: initial,
        report,
        steps,
        kappa,
        embedding,
        embedding_ids,
        embedding_labels,
        timings,
    })
}

fn step_of(g: &RationalTF, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    Ok(realize(g)?.step_response(cfg.t_end, cfg.dt)?.y)
}

/// Open-loop steps of the prototype and members, then the closed-loop
/// `G/(1 ∓ G·Gc)` responses with the cluster controller.
fn step_table(set: &SystemSet, c: &ClusterReport, cfg: &PipelineConfig) -> (CurveTable, Vec<String>) {
    let n_t = (cfg.t_end / cfg.dt).round() as usize + 1;
    let mut columns = vec!["t".to_string()];
    let mut data: Vec<Vec<f64>> = Vec::new();
    let mut warnings = Vec::new();
    let mut push = |name: String, r: Result<Vec<f64>>, warnings: &mut Vec<String>| {
        columns.push(name.clone());
        match r {
            Ok(y) => data.push(y),
            Err(e) => {
                warnings.push(format!("cluster {} simulation of {name}: {e}", c.cluster));
                data.push(vec![f64::NAN; n_t]);
            }
        }
    };
    if let Some(p) = &c.prototype {
        push("prototype_open".into(), step_of(&p.prototype, cfg), &mut warnings);
    }
    for &i in &c.member_indices {
        push(format!("{}_open", set.ids[i]), step_of(&set.systems[i], cfg), &mut warnings);
    }
    if let (Some(p), Some(k)) = (&c.prototype, &c.controller) {
        let r = closed_loop(&p.prototype, &k.controller, cfg.convention).and_then(|g| step_of(&g, cfg));
        push("prototype_closed".into(), r, &mut warnings);
        for &i in &c.member_indices {
            let r = closed_loop(&set.systems[i], &k.controller, cfg.convention).and_then(|g| step_of(&g, cfg));
            push(format!("{}_closed", set.ids[i]), r, &mut warnings);
        }
    }
    let rows = (0..n_t)
        .map(|k| {
            let mut row = vec![k as f64 * cfg.dt];
            row.extend(data.iter().map(|y| y.get(k).copied().unwrap_or(f64::NAN)));
            row
        })
        .collect();
    (
        CurveTable {
            cluster: c.cluster,
            columns,
            rows,
        },
        warnings,
    )
}

/// Pointwise chordal distance of each member to the starting and final
/// prototypes over the grid.
fn kappa_table(set: &SystemSet, c: &ClusterReport, grid: &FrequencyGrid) -> CurveTable {
    let mut columns = vec!["omega".to_string()];
    let mut pairs: Vec<(&RationalTF, &RationalTF)> = Vec::new();
    if let Some(p) = &c.prototype {
        for &i in &c.member_indices {
            columns.push(format!("{}_initial", set.ids[i]));
            pairs.push((&p.initial, &set.systems[i]));
        }
        for &i in &c.member_indices {
            columns.push(format!("{}_final", set.ids[i]));
            pairs.push((&p.prototype, &set.systems[i]));
        }
    }
    let rows = grid
        .omegas()
        .iter()
        .map(|&w| {
            let mut row = vec![w];
            row.extend(pairs.iter().map(|(a, b)| kappa_jw(a, b, w)));
            row
        })
        .collect();
    CurveTable {
        cluster: c.cluster,
        columns,
        rows,
    }
}

#[derive(Serialize)]
struct DendrogramFile<'a> {
    labels: &'a [String],
    n_leaves: usize,
    merges: &'a [crate::cluster::Merge],
}

#[derive(Serialize)]
struct PrototypeEntry<'a> {
    cluster: usize,
    members: &'a [String],
    result: &'a Option<PrototypeResult>,
}

#[derive(Serialize)]
struct ControllerEntry<'a> {
    cluster: usize,
    members: &'a [String],
    result: &'a Option<ControllerResult>,
}

/// Writes every artifact of a run into `outdir`. Output depends only on the
/// run result, never on timing or scheduling.
pub fn emit_plots(out: &PipelineOutput, outdir: &Path) -> Result<()> {
    std::fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let r = &out.report;
    write_file(&outdir.join("systems.json"), &out.systems.to_json())?;
    write_file(&outdir.join("distances.csv"), &out.distances.to_csv())?;
    write_json(
        &outdir.join("dendrogram.json"),
        &DendrogramFile {
            labels: &out.systems.ids,
            n_leaves: out.dendrogram.n_leaves,
            merges: &out.dendrogram.merges,
        },
    )?;
    write_file(
        &outdir.join("dendrogram.svg"),
        &plots::dendrogram_svg(&out.dendrogram, &out.systems.ids, r.cut_height),
    )?;
    write_json(&outdir.join("assignment.json"), &out.initial_assignment)?;
    let protos: Vec<PrototypeEntry> = r
        .clusters
        .iter()
        .map(|c| PrototypeEntry {
            cluster: c.cluster,
            members: &c.members,
            result: &c.prototype,
        })
        .collect();
    write_json(&outdir.join("prototypes.json"), &protos)?;
    let ctrls: Vec<ControllerEntry> = r
        .clusters
        .iter()
        .map(|c| ControllerEntry {
            cluster: c.cluster,
            members: &c.members,
            result: &c.controller,
        })
        .collect();
    write_json(&outdir.join("controllers.json"), &ctrls)?;
    write_json(&outdir.join("report.json"), r)?;
    write_file(&outdir.join("clusters.csv"), &cluster_summary_csv(r))?;

    for table in &out.kappa {
        let k = table.cluster;
        write_file(&outdir.join(format!("kappa_cluster_{k}.csv")), &table.to_csv())?;
        let svg = plots::line_plot(
            &format!("cluster {k}: chordal distance to members"),
            "omega [rad/s]",
            "kappa",
            &table.series(),
            true,
        );
        write_file(&outdir.join(format!("kappa_cluster_{k}.svg")), &svg)?;
    }
    for table in &out.steps {
        let k = table.cluster;
        write_file(&outdir.join(format!("step_cluster_{k}.csv")), &table.to_csv())?;
        let svg = plots::line_plot(&format!("cluster {k}: step responses"), "t [s]", "y", &table.series(), false);
        write_file(&outdir.join(format!("step_cluster_{k}.svg")), &svg)?;
    }
    if let Some(e) = &out.embedding {
        write_file(&outdir.join("tsne.csv"), &e.to_csv(&out.embedding_ids, &out.embedding_labels))?;
        write_file(&outdir.join("tsne_kl.csv"), &e.kl_csv())?;
        let n_sys = out.systems.len();
        let points: Vec<(f64, f64, usize, String)> = e
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let group = out.embedding_labels[i].parse().unwrap_or(0);
                let kind = if i < n_sys { "system" } else { "prototype" };
                (c[0], c[1], group, format!("{} ({kind})", out.embedding_ids[i]))
            })
            .collect();
        let names: Vec<String> = r.clusters.iter().map(|c| format!("cluster {}", c.cluster)).collect();
        write_file(&outdir.join("tsne.svg"), &plots::scatter_plot("t-SNE embedding", &points, &names))?;
    }
    Ok(())
}

/// One row per cluster member: distance to the prototype and verification
/// outcome.
pub fn cluster_summary_csv(r: &RunReport) -> String {
    let mut s = String::from("cluster,id,nu_gap,b_achieved,margin_ok,internally_stable,member_margin\n");
    for c in &r.clusters {
        let b = c.controller.as_ref().map(|k| k.b_achieved);
        for (i, id) in c.members.iter().enumerate() {
            let m = c.controller.as_ref().map(|k| &k.member_reports[i]);
            let gap = c.prototype.as_ref().map(|p| p.distances[i]);
            let f = |x: Option<f64>| x.map(crate::io::fmt_sig).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.cluster,
                id,
                f(m.map(|m| m.nu_gap).or(gap)),
                f(b),
                m.map(|m| m.margin_ok.to_string()).unwrap_or_default(),
                m.map(|m| m.internally_stable.to_string()).unwrap_or_default(),
                f(m.map(|m| m.member_margin)),
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_dataset, DatasetConfig};

    fn quick() -> PipelineConfig {
        PipelineConfig {
            grid_points: 200,
            t_end: 2.0,
            dt: 0.05,
            tsne: TsneConfig {
                iterations: 50,
                ..TsneConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn small_run_is_consistent() {
        let (set, _) = generate_dataset(3, 12, &DatasetConfig::default()).unwrap();
        let out = run_pipeline(&set, &quick()).unwrap();
        let r = &out.report;
        assert_eq!(r.labels.len(), 12);
        let total: usize = r.clusters.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, 12);
        assert_eq!(r.defects, 0);
        for c in &r.clusters {
            if c.members.len() > 1 {
                assert!(c.ok, "non-singleton cluster kept while failing: {:?}", c.errors);
            }
        }
        let e = out.embedding.as_ref().unwrap();
        assert_eq!(e.coords.len(), out.embedding_ids.len());
        assert_eq!(out.steps.len(), r.clusters.len());
    }

    #[test]
    fn artifacts_written() {
        let (set, _) = generate_dataset(5, 6, &DatasetConfig::default()).unwrap();
        let out = run_pipeline(&set, &quick()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_plots(&out, dir.path()).unwrap();
        for f in ["systems.json", "distances.csv", "report.json", "tsne.csv", "dendrogram.svg", "clusters.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert!(dir.path().join("step_cluster_0.csv").exists());
    }

    #[test]
    fn identical_pair_shares_prototype() {
        let g = RationalTF::new(&[1.0], &[1.0, 1.0]).unwrap();
        let set = SystemSet {
            ids: vec!["a".into(), "b".into()],
            systems: vec![g.clone(), g.clone()],
        };
        let out = run_pipeline(&set, &quick()).unwrap();
        let r = &out.report;
        assert_eq!(r.final_clusters, 1);
        let c = &r.clusters[0];
        assert_eq!(c.prototype.as_ref().unwrap().prototype, g);
        let k = c.controller.as_ref().unwrap();
        assert!(k.member_reports.iter().all(|m| m.margin_ok && m.internally_stable));
    }

    #[test]
    fn empty_cluster_list_gives_header_only_files() {
        let (set, _) = generate_dataset(5, 4, &DatasetConfig::default()).unwrap();
        let mut out = run_pipeline(&set, &quick()).unwrap();
        out.report.clusters.clear();
        out.steps.clear();
        out.kappa.clear();
        out.embedding = None;
        let dir = tempfile::tempdir().unwrap();
        emit_plots(&out, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("clusters.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1);
        let protos = std::fs::read_to_string(dir.path().join("prototypes.json")).unwrap();
        assert_eq!(protos.trim(), "[]");
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = PipelineConfig {
            gamma_rel: 1.0,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
