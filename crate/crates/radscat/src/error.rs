use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// A per-panel or merged linear system was numerically singular. This is
    /// the discrete analogue of an interior resonance and should not occur for
    /// the built-in potentials at real wavenumbers.
    #[error("singular linear system while {context} (m = {m}, k = {k})")]
    SingularSystem { context: &'static str, m: u32, k: f64 },

    /// The adaptive panel subdivision could not resolve the integrand down to
    /// the minimum admissible panel length.
    #[error("panel refinement stalled near r = {r:.6e} for mode {m} (panel length {len:.3e} below the floor); the potential is rougher than the solver tolerates")]
    RefinementStalled { m: u32, r: f64, len: f64 },

    /// Ring sampling could not find a band limit below the requested
    /// tolerance even after the permitted number of sample doublings.
    #[error("incident field not band-limited on the sampling ring: no mode tail below tolerance with {max_samples} samples")]
    RingNotResolved { max_samples: usize },

    /// A point source must sit strictly outside the potential's support.
    #[error("point source at distance {dist:.6} lies inside the potential support (radius {support:.6})")]
    SourceInsideSupport { dist: f64, support: f64 },

    /// A frequency-sweep node failed to solve; the index refers to the
    /// sorted positive-frequency node list.
    #[error("frequency sweep failed at node {index} (k = {k:.6e}): {source}")]
    SweepNodeFailed { index: usize, k: f64, source: Box<Error> },

    /// Invalid run configuration (bad ranges, missing files, unknown names).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
