//! Rigorous enclosures of invariant sets.
//!
//! Two strategies: the attractor ("inner") strategy propagates rigorous
//! image covers from a seed cube until the frontier closes, producing a
//! positively invariant support; the "outer" strategy starts from a cover
//! of a candidate region and iteratively prunes cubes that cannot lie on
//! bi-infinite orbits, optionally bisecting the survivors and repeating.

use thiserror::Error;

use crate::cover::{Cube, CoverError, GridSpec};
use crate::digraph::DiGraph;
use crate::dynsys::MapSystem;
use crate::{par_map, ExecMode};

#[derive(Debug, Error)]
pub enum EncloseError {
    #[error("seed escaped domain at iterate {step}; choose different start or domain")]
    SeedEscaped { step: usize },
    #[error("image of cube {coords:?} escapes the cover support (dimension {dim})")]
    ImageEscaped { coords: Vec<i64>, dim: usize },
    #[error("no invariant set detected in domain")]
    EmptyInvariantSet,
    #[error("cover error: {0}")]
    Cover(#[from] CoverError),
}

/// Which enclosure strategy produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Attractor,
    Outer,
}

/// A combinatorial representation of the map on the support of the
/// computed cube set.
#[derive(Debug)]
pub struct EnclosureResult {
    pub grid: GridSpec,
    pub graph: DiGraph,
    pub strategy: Strategy,
    /// Outer strategy only: whether any image box exceeded the domain
    /// during construction (harmless there; impossible for attractors).
    pub escaped: bool,
}

/// Iterate the map in floats and return the cube holding the last point.
///
/// Periodic coordinates are wrapped into the fundamental domain after
/// every step; leaving a bounded dimension is an error.
pub fn find_seed(
    grid: &GridSpec,
    map: &dyn MapSystem,
    start: &[f64],
    transient: usize,
) -> Result<Cube, EncloseError> {
    let mut x = start.to_vec();
    grid.wrap_point(&mut x);
    if grid.locate(&x).is_none() {
        return Err(EncloseError::SeedEscaped { step: 0 });
    }
    for step in 1..=transient {
        x = map.eval(&x);
        grid.wrap_point(&mut x);
        if grid.locate(&x).is_none() {
            return Err(EncloseError::SeedEscaped { step });
        }
    }
    Ok(grid.locate(&x).expect("checked above"))
}

/// Enclose the forward trajectory of a seed cube (attractor strategy).
///
/// Frontier propagation: each unexplored vertex gets its rigorous image
/// cover computed and edges added to every covering cube; newly seen cubes
/// form the next frontier. Stops when no new cubes appear. The result
/// graph is a combinatorial representation of the map restricted to the
/// support, and that support is positively invariant.
pub fn enclose_attractor(
    seed: Cube,
    grid: &GridSpec,
    map: &dyn MapSystem,
    mode: ExecMode,
) -> Result<EnclosureResult, EncloseError> {
    let mut graph = DiGraph::new();
    let seed_id = graph.add_vertex(seed);
    let mut frontier: Vec<u32> = vec![seed_id];

    while !frontier.is_empty() {
        let frontier_cubes: Vec<Cube> = frontier
            .iter()
            .map(|&id| graph.cube_of(id).clone())
            .collect();
        let covers = par_map(&frontier_cubes, mode, |cube| {
            grid.min_cover(&map.eval_i(&grid.realize(cube)))
        });
        let mut next = Vec::new();
        for (&src, cover) in frontier.iter().zip(covers) {
            let cover = cover.map_err(|e| match e {
                CoverError::Escape { dim } => EncloseError::ImageEscaped {
                    coords: graph.cube_of(src).coords().to_vec(),
                    dim,
                },
                other => EncloseError::Cover(other),
            })?;
            for cube in cover {
                let before = graph.vertex_count();
                let dst = graph.add_vertex(cube);
                if graph.vertex_count() > before {
                    next.push(dst);
                }
                graph.add_edge(src, dst);
            }
        }
        frontier = next;
    }

    Ok(EnclosureResult {
        grid: grid.clone(),
        graph,
        strategy: Strategy::Attractor,
        escaped: false,
    })
}

/// Build the combinatorial map on a fixed cube set: edges go to covering
/// cubes that are themselves members of the set. Returns the graph plus a
/// flag for image boxes that exceeded the domain.
fn build_restricted_graph(
    grid: &GridSpec,
    map: &dyn MapSystem,
    cubes: &[Cube],
    mode: ExecMode,
) -> Result<(DiGraph, bool), EncloseError> {
    let mut graph = DiGraph::new();
    for c in cubes {
        graph.add_vertex(c.clone());
    }
    let covers = par_map(cubes, mode, |cube| {
        grid.min_cover_clipped(&map.eval_i(&grid.realize(cube)))
    });
    let mut escaped = false;
    for (src, cover) in covers.into_iter().enumerate() {
        let (cover, esc) = cover?;
        escaped |= esc;
        for cube in cover {
            if let Some(dst) = graph.id_of(&cube) {
                graph.add_edge(src as u32, dst);
            }
        }
    }
    Ok((graph, escaped))
}

/// Iteratively delete vertices with no successor or no predecessor inside
/// the set, until stable: the surviving vertices are exactly those that
/// admit bi-infinite walks. Returns the surviving cube set.
fn prune_to_invariant_core(graph: &DiGraph) -> Vec<Cube> {
    let n = graph.vertex_count();
    let mut out_deg: Vec<u32> = (0..n).map(|v| graph.out_ids(v as u32).len() as u32).collect();
    let mut in_deg = graph.in_degrees();
    let mut alive = vec![true; n];
    let transpose = graph.transpose();
    let mut queue: Vec<u32> = (0..n as u32)
        .filter(|&v| out_deg[v as usize] == 0 || in_deg[v as usize] == 0)
        .collect();
    while let Some(v) = queue.pop() {
        let vu = v as usize;
        if !alive[vu] {
            continue;
        }
        alive[vu] = false;
        for &w in graph.out_ids(v) {
            let wu = w as usize;
            if alive[wu] {
                in_deg[wu] -= 1;
                if in_deg[wu] == 0 {
                    queue.push(w);
                }
            }
        }
        for &u in transpose.out_ids(v) {
            let uu = u as usize;
            if alive[uu] {
                out_deg[uu] -= 1;
                if out_deg[uu] == 0 {
                    queue.push(u);
                }
            }
        }
    }
    (0..n)
        .filter(|&v| alive[v])
        .map(|v| graph.cube_of(v as u32).clone())
        .collect()
}

/// Outer enclosure of the maximal invariant set inside `initial`.
///
/// Builds the combinatorial map on the current cube set, prunes it to the
/// bi-infinite-walk core, then bisects every survivor and repeats, up to
/// `max_refine` refinements. The result over-approximates
/// `Inv(f, supp initial)`.
pub fn enclose_invariant_outer(
    grid: &GridSpec,
    map: &dyn MapSystem,
    initial: Vec<Cube>,
    max_refine: u32,
    mode: ExecMode,
) -> Result<EnclosureResult, EncloseError> {
    let mut grid = grid.clone();
    let mut cubes = initial;
    let mut escaped_any = false;
    for level in 0..=max_refine {
        if cubes.is_empty() {
            return Err(EncloseError::EmptyInvariantSet);
        }
        let (graph, escaped) = build_restricted_graph(&grid, map, &cubes, mode)?;
        escaped_any |= escaped;
        cubes = prune_to_invariant_core(&graph);
        if cubes.is_empty() {
            return Err(EncloseError::EmptyInvariantSet);
        }
        if level < max_refine {
            let refined = grid.refined()?;
            cubes = cubes.iter().flat_map(|c| grid.children(c)).collect();
            grid = refined;
        }
    }
    // Final graph over the stable core at the last resolution.
    let (graph, escaped) = build_restricted_graph(&grid, map, &cubes, mode)?;
    escaped_any |= escaped;
    Ok(EnclosureResult {
        grid,
        graph,
        strategy: Strategy::Outer,
        escaped: escaped_any,
    })
}

/// All cubes of the grid (bounded dims only in practice for the outer
/// strategy's starting cover; periodic dims enumerate the full circle).
pub fn full_cover(grid: &GridSpec) -> Vec<Cube> {
    grid.min_cover(&grid.support())
        .expect("support covers itself")
}

/// Re-check positive invariance of an attractor enclosure: every vertex's
/// rigorous image cover must be a subset of the vertex set.
pub fn audit_invariance(result: &EnclosureResult, map: &dyn MapSystem) -> Result<bool, EncloseError> {
    let g = &result.graph;
    for v in 0..g.vertex_count() as u32 {
        let cover = result
            .grid
            .min_cover(&map.eval_i(&result.grid.realize(g.cube_of(v))))?;
        for cube in cover {
            if g.id_of(&cube).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
