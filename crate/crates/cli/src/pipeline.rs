//! Stage orchestration with file-based artifacts.
//!
//! Every stage reads its inputs from the artifact directory and writes its
//! outputs there, so stages can be rerun individually with identical
//! results. `run` simply executes the stages in order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use conecert::cones::{certify_rates, verify_cone_conditions, ConeReport, QuadraticForm};
use conecert::cover::{self, GridSpec};
use conecert::digraph::{self, DiGraph};
use conecert::enclose::{
    enclose_attractor, enclose_invariant_outer, find_seed, full_cover, EnclosureResult,
};
use conecert::frames::{self, seed_frames, spread_frames, FrameAssignment};
use conecert::periodic::{
    group_into_orbits, prove_fixed_point, prove_period_two, refine_cycle_sets, PeriodicCandidate,
    PeriodicReport, ProofRecord,
};

use crate::config::{PipelineConfig, StrategyConfig};

pub const BOXES_FILE: &str = "boxes.csv";
pub const VERTICES_FILE: &str = "vertices.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const CYCLES_FILE: &str = "cycles.json";
pub const CANDIDATES_FILE: &str = "candidates.json";
pub const FRAMES_FILE: &str = "frames.csv";
pub const CONE_REPORT_FILE: &str = "cone_report.json";

/// One row of the summary table.
pub struct StageRow {
    pub name: &'static str,
    pub seconds: f64,
    pub comment: String,
}

pub fn print_summary(rows: &[StageRow]) {
    let name_w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(9);
    println!("{:<name_w$}  {:>10}  comments", "algorithm", "wall time");
    println!("{}", "-".repeat(name_w + 24));
    for r in rows {
        println!("{:<name_w$}  {:>9.2}s  {}", r.name, r.seconds, r.comment);
    }
}

#[derive(Serialize, Deserialize)]
struct CycleSetsFile {
    max_period: usize,
    sets: Vec<Vec<u32>>,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file =
        File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    let path = dir.join(name);
    let file = File::open(&path).with_context(|| {
        format!(
            "opening {} (run the earlier stages first, or pass --from)",
            path.display()
        )
    })?;
    Ok(BufReader::new(file))
}

pub fn load_graph(dir: &Path) -> Result<(GridSpec, DiGraph)> {
    let mut v = open(dir, VERTICES_FILE)?;
    let mut e = open(dir, EDGES_FILE)?;
    digraph::read_graph(&mut v, &mut e).map_err(Into::into)
}

fn write_graph_artifacts(dir: &Path, grid: &GridSpec, graph: &DiGraph) -> Result<()> {
    let mut w = create(dir, BOXES_FILE)?;
    cover::write_box_list(&mut w, grid, graph.cubes())?;
    w.flush()?;
    let mut w = create(dir, VERTICES_FILE)?;
    digraph::write_vertex_table(&mut w, grid, graph)?;
    w.flush()?;
    let mut w = create(dir, EDGES_FILE)?;
    digraph::write_edge_list(&mut w, graph)?;
    w.flush()?;
    Ok(())
}

fn load_candidates(dir: &Path, max_period: usize) -> Result<(PeriodicReport, Vec<Vec<PeriodicCandidate>>)> {
    let r = open(dir, CANDIDATES_FILE)?;
    let report: PeriodicReport = serde_json::from_reader(r).context("parsing candidates.json")?;
    let sets = report
        .candidate_sets(max_period)
        .context("candidates.json contains malformed points or periods")?;
    Ok((report, sets))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub struct StageOutcome {
    pub row: StageRow,
    /// Set by the verify stage: whether every edge was verified.
    pub all_verified: Option<bool>,
}

fn row(name: &'static str, started: Instant, comment: String) -> StageRow {
    StageRow {
        name,
        seconds: started.elapsed().as_secs_f64(),
        comment,
    }
}

pub fn stage_enclose(config: &PipelineConfig, out: &Path, deterministic: bool) -> Result<StageOutcome> {
    let started = Instant::now();
    let system = config.system.build();
    let grid = config.build_grid()?;
    let mode = config.effective_mode(deterministic);
    let result: EnclosureResult = match config.strategy {
        StrategyConfig::Attractor => {
            let seed_cfg = config.seed.as_ref().expect("validated");
            let seed = find_seed(&grid, system.as_ref(), &seed_cfg.start, seed_cfg.transient)?;
            enclose_attractor(seed, &grid, system.as_ref(), mode)?
        }
        StrategyConfig::Outer => {
            let outer = config.outer.as_ref().expect("validated");
            enclose_invariant_outer(
                &grid,
                system.as_ref(),
                full_cover(&grid),
                outer.max_refine,
                mode,
            )?
        }
    };
    write_graph_artifacts(out, &result.grid, &result.graph)?;
    let comment = format!(
        "{} boxes, {} edges at resolution k={}",
        result.graph.vertex_count(),
        result.graph.edge_count(),
        result.grid.k()
    );
    Ok(StageOutcome {
        row: row("enclosure of invariant set", started, comment),
        all_verified: None,
    })
}

pub fn stage_cycles(config: &PipelineConfig, from: &Path, out: &Path) -> Result<StageOutcome> {
    let started = Instant::now();
    let (_, graph) = load_graph(from)?;
    let sets = graph.cycle_vertex_sets(config.max_period);
    let total: usize = sets.iter().map(|s| s.len()).sum();
    write_json(
        out,
        CYCLES_FILE,
        &CycleSetsFile {
            max_period: config.max_period,
            sets,
        },
    )?;
    let comment = format!("{total} cycle vertices up to period {}", config.max_period);
    Ok(StageOutcome {
        row: row("finding cycles in graph", started, comment),
        all_verified: None,
    })
}

pub fn stage_refine(
    config: &PipelineConfig,
    from: &Path,
    out: &Path,
    deterministic: bool,
) -> Result<StageOutcome> {
    let started = Instant::now();
    let system = config.system.build();
    let (grid, graph) = load_graph(from)?;
    let cycles: CycleSetsFile =
        serde_json::from_reader(open(from, CYCLES_FILE)?).context("parsing cycles.json")?;
    if cycles.max_period != config.max_period {
        bail!(
            "cycles.json was computed with max_period {} but config says {}",
            cycles.max_period,
            config.max_period
        );
    }
    let mode = config.effective_mode(deterministic);
    let sets = refine_cycle_sets(
        &graph,
        &grid,
        system.as_ref(),
        &cycles.sets,
        &config.tolerances.newton_params(),
        mode,
    );
    let report = PeriodicReport::from_candidates(&sets);
    write_json(out, CANDIDATES_FILE, &report)?;
    let points: usize = sets.iter().map(|s| s.len()).sum();
    let orbits: usize = sets
        .iter()
        .map(|s| group_into_orbits(s, system.as_ref(), &grid.periods(), 1e-6).len())
        .sum();
    let comment = format!("{points} periodic points in {orbits} orbits");
    Ok(StageOutcome {
        row: row("finding periodic points", started, comment),
        all_verified: None,
    })
}

pub fn stage_frames(
    config: &PipelineConfig,
    from: &Path,
    out: &Path,
    deterministic: bool,
) -> Result<StageOutcome> {
    let started = Instant::now();
    let system = config.system.build();
    let (grid, graph) = load_graph(from)?;
    let (_, sets) = load_candidates(from, config.max_period)?;
    let mode = config.effective_mode(deterministic);
    let mut assignment = FrameAssignment::new(graph.vertex_count());
    let seeded = seed_frames(&mut assignment, &sets, &grid, system.as_ref())?;
    let stats = spread_frames(
        &graph,
        &grid,
        system.as_ref(),
        &mut assignment,
        config.spread_k,
        mode,
    )?;
    let mut w = create(out, FRAMES_FILE)?;
    frames::write_frames(&mut w, &assignment, grid.dim())?;
    w.flush()?;
    let comment = format!(
        "{} frames ({} seeded, spread_k={}, {} passes)",
        assignment.assigned_count(),
        seeded.len(),
        config.spread_k,
        stats.passes
    );
    Ok(StageOutcome {
        row: row("computing coordinate systems", started, comment),
        all_verified: None,
    })
}

pub fn stage_verify(
    config: &PipelineConfig,
    from: &Path,
    out: &Path,
    deterministic: bool,
) -> Result<StageOutcome> {
    let started = Instant::now();
    let system = config.system.build();
    let (grid, graph) = load_graph(from)?;
    let assignment = frames::read_frames(&mut open(from, FRAMES_FILE)?, graph.vertex_count())?;
    let q = QuadraticForm::new(config.signature.u, config.signature.s);
    let mode = config.effective_mode(deterministic);
    let report = verify_cone_conditions(&graph, &grid, &assignment, &q, system.as_ref(), mode)?;
    let all = report.all_verified();
    let comment = if all {
        format!(
            "empty unverified set over {} edges (min margin {:.3e})",
            report.edges,
            report.min_margin.unwrap_or(f64::NAN)
        )
    } else {
        format!(
            "{} unverified vertices of {}",
            report.unverified.len(),
            report.vertices
        )
    };
    write_json(out, CONE_REPORT_FILE, &report)?;
    Ok(StageOutcome {
        row: row("verification of cone condition", started, comment),
        all_verified: Some(all),
    })
}

pub fn stage_prove(
    config: &PipelineConfig,
    from: &Path,
    out: &Path,
) -> Result<StageOutcome> {
    let started = Instant::now();
    let system = config.system.build();
    let (grid, _) = load_graph(from)?;
    let (mut report, sets) = load_candidates(from, config.max_period)?;
    let periods = grid.periods();
    let r = config.tolerances.proof_radius;
    let mut proofs = Vec::new();
    if let Some(fixed) = sets.first() {
        for cand in fixed {
            let proof = prove_fixed_point(system.as_ref(), &periods, &cand.point, r)?;
            proofs.push(ProofRecord::new("fixed-point", &proof));
        }
    }
    if let Some(period2) = sets.get(1) {
        for orbit in group_into_orbits(period2, system.as_ref(), &periods, 1e-6) {
            if orbit.len() != 2 {
                continue;
            }
            let (a, b) = (&period2[orbit[0]], &period2[orbit[1]]);
            let proof = prove_period_two(system.as_ref(), &periods, &a.point, &b.point, r)?;
            proofs.push(ProofRecord::new("period-two", &proof));
        }
    }
    let verified = proofs.iter().filter(|p| p.verified).count();
    let total = proofs.len();
    report.proofs = proofs;
    write_json(out, CANDIDATES_FILE, &report)?;
    let comment = format!("{verified}/{total} orbit proofs verified (radius {r:e})");
    Ok(StageOutcome {
        row: row("rigorous periodic-orbit proofs", started, comment),
        all_verified: None,
    })
}

pub fn stage_rates(
    config: &PipelineConfig,
    from: &Path,
    out: &Path,
    deterministic: bool,
) -> Result<StageOutcome> {
    let started = Instant::now();
    let system = config.system.build();
    let (grid, graph) = load_graph(from)?;
    let assignment = frames::read_frames(&mut open(from, FRAMES_FILE)?, graph.vertex_count())?;
    let mut report: ConeReport =
        serde_json::from_reader(open(from, CONE_REPORT_FILE)?).context("parsing cone report")?;
    if !report.all_verified() {
        bail!("cone report has unverified vertices; rates are only defined after a clean verify");
    }
    let q = QuadraticForm::new(config.signature.u, config.signature.s);
    let mode = config.effective_mode(deterministic);
    let rates = certify_rates(
        &graph,
        &grid,
        &assignment,
        &q,
        system.as_ref(),
        config.tolerances.bisect_tol,
        config.tolerances.lambda_max,
        mode,
    )?;
    report.rates = Some(rates);
    write_json(out, CONE_REPORT_FILE, &report)?;
    let comment = format!(
        "lambda_bar={:.4}, lambda={:.4}, c={:.3e}",
        rates.lambda_bar, rates.lambda, rates.c
    );
    Ok(StageOutcome {
        row: row("certified expansion rates", started, comment),
        all_verified: None,
    })
}

/// Full pipeline; returns false when verification left unverified vertices.
pub fn run_all(config: &PipelineConfig, out: &Path, deterministic: bool) -> Result<bool> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output dir {}", out.display()))?;
    let mut rows = Vec::new();
    rows.push(stage_enclose(config, out, deterministic).context("stage 'enclose' failed")?.row);
    rows.push(stage_cycles(config, out, out).context("stage 'cycles' failed")?.row);
    rows.push(
        stage_refine(config, out, out, deterministic)
            .context("stage 'refine' failed")?
            .row,
    );
    rows.push(
        stage_frames(config, out, out, deterministic)
            .context("stage 'frames' failed")?
            .row,
    );
    let verify = stage_verify(config, out, out, deterministic).context("stage 'verify' failed")?;
    let all_verified = verify.all_verified.unwrap_or(false);
    rows.push(verify.row);
    rows.push(stage_prove(config, out, out).context("stage 'prove' failed")?.row);
    if all_verified {
        rows.push(
            stage_rates(config, out, out, deterministic)
                .context("stage 'rates' failed")?
                .row,
        );
    }
    print_summary(&rows);
    Ok(all_verified)
}

/// Resolve the artifact directory for a stage command.
pub fn artifact_dirs(config: &PipelineConfig, from: Option<PathBuf>) -> (PathBuf, PathBuf) {
    let out = config.output_dir.clone();
    let from = from.unwrap_or_else(|| out.clone());
    (from, out)
}
