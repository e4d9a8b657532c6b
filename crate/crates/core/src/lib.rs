//! Rigorous certification of uniform hyperbolicity for explicitly given
//! smooth maps.
//!
//! The pipeline builds a combinatorial box-cover representation of the
//! dynamics on a dyadic grid, locates approximate periodic orbits, attaches
//! eigen-adapted coordinate frames to every cover element, and then verifies
//! cone conditions edge by edge with outward-rounded interval arithmetic.
//! Everything downstream of the heuristic stages (Newton refinement, frame
//! propagation) is checked rigorously: a successful run is a proof that the
//! map is uniformly hyperbolic on the maximal invariant set inside the
//! computed cover.

pub mod cones;
pub mod cover;
pub mod digraph;
pub mod dynsys;
pub mod enclose;
pub mod frames;
pub mod hexfloat;
pub mod interval;
pub mod periodic;

/// Execution mode for the data-parallel stages.
///
/// `Deterministic` forces single-threaded processing in a fixed order and is
/// what reproducible runs should use. `Parallel` fans work out over the rayon
/// pool when the `parallel` feature is enabled (and silently degrades to the
/// sequential path otherwise). All merge steps are order-preserving, so both
/// modes produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    #[default]
    Deterministic,
    Parallel,
}

/// Order-preserving map over a slice, parallel when requested and available.
pub(crate) fn par_map<T, U, F>(items: &[T], mode: ExecMode, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    #[cfg(feature = "parallel")]
    if mode == ExecMode::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(&f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}
