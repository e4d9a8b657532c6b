//! Directed graphs over cubes encoding combinatorial maps.
//!
//! Vertices are interned to dense integer ids so edges are integer pairs;
//! the graphs stay queryable read-only after construction.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::cover::{self, Cube, GridSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex")]
    UnknownVertex,
    #[error("malformed graph file: {0}")]
    Format(String),
}

/// A directed graph whose vertices are cubes of a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiGraph {
    cubes: Vec<Cube>,
    index: HashMap<Cube, u32>,
    out_adj: Vec<Vec<u32>>,
}

impl DiGraph {
    pub fn new() -> Self {
        DiGraph {
            cubes: Vec::new(),
            index: HashMap::new(),
            out_adj: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.cubes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(|o| o.len()).sum()
    }

    /// Intern a cube, returning its id (existing id if already present).
    pub fn add_vertex(&mut self, cube: Cube) -> u32 {
        if let Some(&id) = self.index.get(&cube) {
            return id;
        }
        let id = self.cubes.len() as u32;
        self.index.insert(cube.clone(), id);
        self.cubes.push(cube);
        self.out_adj.push(Vec::new());
        id
    }

    pub fn add_edge(&mut self, src: u32, dst: u32) {
        debug_assert!((src as usize) < self.cubes.len() && (dst as usize) < self.cubes.len());
        self.out_adj[src as usize].push(dst);
    }

    pub fn id_of(&self, cube: &Cube) -> Option<u32> {
        self.index.get(cube).copied()
    }

    pub fn cube_of(&self, id: u32) -> &Cube {
        &self.cubes[id as usize]
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn out_ids(&self, id: u32) -> &[u32] {
        &self.out_adj[id as usize]
    }

    /// Out-set of a vertex as cubes.
    pub fn out(&self, v: &Cube) -> Result<Vec<Cube>, GraphError> {
        let id = self.id_of(v).ok_or(GraphError::UnknownVertex)?;
        Ok(self
            .out_ids(id)
            .iter()
            .map(|&d| self.cubes[d as usize].clone())
            .collect())
    }

    /// Edge-reversed graph over the same vertex set (ids preserved).
    pub fn transpose(&self) -> DiGraph {
        let mut in_adj: Vec<Vec<u32>> = vec![Vec::new(); self.cubes.len()];
        for (src, outs) in self.out_adj.iter().enumerate() {
            for &dst in outs {
                in_adj[dst as usize].push(src as u32);
            }
        }
        DiGraph {
            cubes: self.cubes.clone(),
            index: self.index.clone(),
            out_adj: in_adj,
        }
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.cubes.len()];
        for outs in &self.out_adj {
            for &dst in outs {
                deg[dst as usize] += 1;
            }
        }
        deg
    }

    /// Strongly connected components (iterative Tarjan). Components are
    /// emitted in reverse topological order; ids within a component follow
    /// stack order.
    pub fn scc(&self) -> Vec<Vec<u32>> {
        let n = self.cubes.len();
        let mut indices: Vec<Option<u32>> = vec![None; n];
        let mut lowlink = vec![0u32; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        let mut sccs: Vec<Vec<u32>> = Vec::new();
        let mut counter: u32 = 0;

        // explicit DFS frames: (vertex, next out-edge position)
        let mut call: Vec<(u32, usize)> = Vec::new();
        for start in 0..n as u32 {
            if indices[start as usize].is_some() {
                continue;
            }
            call.push((start, 0));
            indices[start as usize] = Some(counter);
            lowlink[start as usize] = counter;
            counter += 1;
            stack.push(start);
            on_stack[start as usize] = true;

            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                let vu = v as usize;
                if *pos < self.out_adj[vu].len() {
                    let w = self.out_adj[vu][*pos];
                    *pos += 1;
                    let wu = w as usize;
                    if indices[wu].is_none() {
                        indices[wu] = Some(counter);
                        lowlink[wu] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[wu] = true;
                        call.push((w, 0));
                    } else if on_stack[wu] {
                        lowlink[vu] = lowlink[vu].min(indices[wu].unwrap());
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        let pu = parent as usize;
                        lowlink[pu] = lowlink[pu].min(lowlink[vu]);
                    }
                    if lowlink[vu] == indices[vu].unwrap() {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w as usize] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        sccs.push(comp);
                    }
                }
            }
        }
        sccs
    }

    pub fn is_single_scc(&self) -> bool {
        !self.cubes.is_empty() && self.scc().len() == 1
    }

    /// Vertices on closed walks of length exactly `i`, for `i = 1..=n`,
    /// with each vertex reported only at its smallest such length.
    ///
    /// Closed walks (not simple cycles): a vertex belongs to level `i` when
    /// the `i`-step image of `{v}` contains `v` again, matching the diagonal
    /// of the boolean adjacency power.
    pub fn cycle_vertex_sets(&self, n: usize) -> Vec<Vec<u32>> {
        assert!(n >= 1);
        let nv = self.cubes.len();
        let mut result: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut cur = vec![false; nv];
        let mut next = vec![false; nv];
        let mut cur_list: Vec<u32> = Vec::new();
        let mut next_list: Vec<u32> = Vec::new();

        for v in 0..nv as u32 {
            cur_list.clear();
            cur_list.push(v);
            cur[v as usize] = true;
            let mut found: Option<usize> = None;
            for step in 1..=n {
                next_list.clear();
                for &u in &cur_list {
                    for &w in &self.out_adj[u as usize] {
                        if !next[w as usize] {
                            next[w as usize] = true;
                            next_list.push(w);
                        }
                    }
                }
                for &u in &cur_list {
                    cur[u as usize] = false;
                }
                std::mem::swap(&mut cur, &mut next);
                std::mem::swap(&mut cur_list, &mut next_list);
                if cur[v as usize] {
                    found = Some(step);
                    break;
                }
            }
            for &u in &cur_list {
                cur[u as usize] = false;
            }
            if let Some(step) = found {
                result[step - 1].push(v);
            }
        }
        result
    }
}

impl Default for DiGraph {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Edge-list persistence: `src_id,dst_id` CSV plus a sidecar vertex table
// mapping id -> cube coords in the box-list format with an id column.
// ---------------------------------------------------------------------------

pub fn write_vertex_table<W: Write>(w: &mut W, grid: &GridSpec, g: &DiGraph) -> std::io::Result<()> {
    writeln!(w, "{}", cover::grid_header(grid))?;
    for (id, cube) in g.cubes.iter().enumerate() {
        let coords = cube
            .coords()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{id},{coords}")?;
    }
    Ok(())
}

pub fn write_edge_list<W: Write>(w: &mut W, g: &DiGraph) -> std::io::Result<()> {
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(g.edge_count());
    for (src, outs) in g.out_adj.iter().enumerate() {
        for &dst in outs {
            edges.push((src as u32, dst));
        }
    }
    edges.sort_unstable();
    for (s, d) in edges {
        writeln!(w, "{s},{d}")?;
    }
    Ok(())
}

pub fn read_graph<RV: BufRead, RE: BufRead>(
    vertices: &mut RV,
    edges: &mut RE,
) -> Result<(GridSpec, DiGraph), GraphError> {
    let mut lines = vertices.lines();
    let header = lines
        .next()
        .ok_or_else(|| GraphError::Format("empty vertex table".into()))?
        .map_err(|e| GraphError::Format(e.to_string()))?;
    let grid = cover::parse_grid_header(&header).map_err(|e| GraphError::Format(e.to_string()))?;
    let mut g = DiGraph::new();
    for line in lines {
        let line = line.map_err(|e| GraphError::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let id: u32 = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| GraphError::Format(line.into()))?;
        let coords = parts
            .map(|t| t.trim().parse::<i64>().map_err(|_| GraphError::Format(line.into())))
            .collect::<Result<Vec<i64>, _>>()?;
        let cube = grid
            .cube(coords)
            .map_err(|e| GraphError::Format(e.to_string()))?;
        let got = g.add_vertex(cube);
        if got != id {
            return Err(GraphError::Format(format!(
                "vertex ids must be dense and ordered: expected {got}, found {id}"
            )));
        }
    }
    for line in edges.lines() {
        let line = line.map_err(|e| GraphError::Format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let (s, d): (u32, u32) = match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => (
                a.trim().parse().map_err(|_| GraphError::Format(line.into()))?,
                b.trim().parse().map_err(|_| GraphError::Format(line.into()))?,
            ),
            _ => return Err(GraphError::Format(line.into())),
        };
        if (s as usize) >= g.vertex_count() || (d as usize) >= g.vertex_count() {
            return Err(GraphError::Format(format!("edge ({s},{d}) out of range")));
        }
        g.add_edge(s, d);
    }
    Ok((grid, g))
}
