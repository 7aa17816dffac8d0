//! C ABI for the markov-infogeo library.
//!
//! Objects cross the boundary as opaque handles created from JSON documents
//! and freed by the matching `_free` functions. Every fallible call returns
//! a [`MigStatus`]; on failure `mig_last_error_message` describes what went
//! wrong for the calling thread. Numeric buffers are caller-allocated with
//! lengths obtained from the accessor functions.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::sync::Arc;

use markov_infogeo::dual_geometry::{
    expectation_param, fisher_direct, fisher_hessian, theta_from_eta,
};
use markov_infogeo::exp_family::{ExpectationParam, NaturalParam};
use markov_infogeo::geodesy::{
    divergence, e_geodesic_point, empirical_edge_measure, fit_mle, kl_joint, m_geodesic_point,
};
use markov_infogeo::graph::{Distribution, EdgeMeasure};
use markov_infogeo::io;
use markov_infogeo::{
    delta_map, gamma_normalize, EdgeFunction, Error, ExponentialFamily, KernelGraph, MarkovKernel,
};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MigStatus {
    MigOk = 0,
    MigNullArgument = 1,
    MigInvalidUtf8 = 2,
    MigParseError = 3,
    MigGraphError = 4,
    MigDomainError = 5,
    MigConvergenceError = 6,
    MigBufferTooSmall = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(err: &Error) -> MigStatus {
    match err {
        Error::Json(_) | Error::Io(_) => MigStatus::MigParseError,
        Error::TooFewStates(_)
        | Error::DuplicateState(_)
        | Error::DuplicateEdge(_, _)
        | Error::UnknownState(_)
        | Error::NotStronglyConnected
        | Error::GraphMismatch => MigStatus::MigGraphError,
        Error::ConvergenceFailure { .. } | Error::NoConvergence { .. } => {
            MigStatus::MigConvergenceError
        }
        _ => MigStatus::MigDomainError,
    }
}

fn fail(err: Error) -> MigStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mig_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn mig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Frees a string returned by one of the `_to_json` functions.
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn mig_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, MigStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(MigStatus::MigNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid utf-8");
        MigStatus::MigInvalidUtf8
    })
}

unsafe fn write_out<T>(out: *mut T, value: T) -> MigStatus {
    if out.is_null() {
        set_error("null output pointer");
        return MigStatus::MigNullArgument;
    }
    out.write(value);
    MigStatus::MigOk
}

fn to_c_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

macro_rules! deref_or_null {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null handle");
                return MigStatus::MigNullArgument;
            }
        }
    };
}

// ---------------------------------------------------------------------------
// graphs
// ---------------------------------------------------------------------------

/// Opaque strongly connected digraph.
pub struct MigGraph(Arc<KernelGraph>);

/// Parses {"states": [...], "edges": [{"from","to"}, ...]} into a graph.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_graph_from_json(
    json: *const c_char,
    out: *mut *mut MigGraph,
) -> MigStatus {
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Doc {
        states: Vec<String>,
        edges: Vec<Edge>,
    }
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Edge {
        from: String,
        to: String,
    }
    let doc: Doc = match serde_json::from_str(text) {
        Ok(d) => d,
        Err(e) => {
            set_error(&e.to_string());
            return MigStatus::MigParseError;
        }
    };
    match KernelGraph::new(
        doc.states,
        doc.edges.into_iter().map(|e| (e.from, e.to)).collect(),
    ) {
        Ok(g) => write_out(out, Box::into_raw(Box::new(MigGraph(Arc::new(g))))),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn mig_graph_free(g: *mut MigGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub extern "C" fn mig_graph_num_states(g: *const MigGraph) -> usize {
    unsafe { g.as_ref() }.map_or(0, |g| g.0.num_states())
}

#[no_mangle]
pub extern "C" fn mig_graph_num_edges(g: *const MigGraph) -> usize {
    unsafe { g.as_ref() }.map_or(0, |g| g.0.num_edges())
}

/// Complete graph (self-loops included) on n states named "0".."n-1".
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_graph_complete(n: usize, out: *mut *mut MigGraph) -> MigStatus {
    match KernelGraph::complete(n) {
        Ok(g) => write_out(out, Box::into_raw(Box::new(MigGraph(Arc::new(g))))),
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

/// Opaque Markov kernel.
pub struct MigKernel(MarkovKernel);

/// Parses a kernel document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_from_json(
    json: *const c_char,
    out: *mut *mut MigKernel,
) -> MigStatus {
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match io::parse_kernel(text) {
        Ok(w) => write_out(out, Box::into_raw(Box::new(MigKernel(w)))),
        Err(e) => fail(e),
    }
}

/// Serializes a kernel; free the result with `mig_string_free`.
///
/// # Safety
/// `w` must be a live kernel handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_to_json(
    w: *const MigKernel,
    out: *mut *mut c_char,
) -> MigStatus {
    let w = deref_or_null!(w);
    match io::kernel_json(&w.0) {
        Ok(text) => write_out(out, to_c_string(text)),
        Err(e) => fail(e),
    }
}

/// # Safety
/// `w` must be a live kernel handle or null.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_free(w: *mut MigKernel) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

#[no_mangle]
pub extern "C" fn mig_kernel_num_states(w: *const MigKernel) -> usize {
    unsafe { w.as_ref() }.map_or(0, |w| w.0.graph().num_states())
}

#[no_mangle]
pub extern "C" fn mig_kernel_num_edges(w: *const MigKernel) -> usize {
    unsafe { w.as_ref() }.map_or(0, |w| w.0.graph().num_edges())
}

/// Clones the kernel's graph into a standalone handle.
///
/// # Safety
/// `w` must be a live kernel handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_graph(
    w: *const MigKernel,
    out: *mut *mut MigGraph,
) -> MigStatus {
    let w = deref_or_null!(w);
    write_out(out, Box::into_raw(Box::new(MigGraph(w.0.graph().clone()))))
}

/// Transition probabilities in canonical edge order; `probs` must hold
/// `mig_kernel_num_edges` doubles.
///
/// # Safety
/// `w` must be a live kernel handle; `probs` a buffer of length `len`.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_probs(
    w: *const MigKernel,
    probs: *mut c_double,
    len: usize,
) -> MigStatus {
    let w = deref_or_null!(w);
    let need = w.0.graph().num_edges();
    if probs.is_null() {
        set_error("null output buffer");
        return MigStatus::MigNullArgument;
    }
    if len < need {
        set_error("probs buffer too small");
        return MigStatus::MigBufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(w.0.probs().as_ptr(), probs, need);
    MigStatus::MigOk
}

/// Stationary distribution; `probs` must hold `mig_kernel_num_states`
/// doubles.
///
/// # Safety
/// `w` must be a live kernel handle; `probs` a buffer of length `len`.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_stationary(
    w: *const MigKernel,
    probs: *mut c_double,
    len: usize,
) -> MigStatus {
    let w = deref_or_null!(w);
    let need = w.0.graph().num_states();
    if probs.is_null() {
        set_error("null output buffer");
        return MigStatus::MigNullArgument;
    }
    if len < need {
        set_error("probs buffer too small");
        return MigStatus::MigBufferTooSmall;
    }
    match w.0.stationary_distribution() {
        Ok(p) => {
            std::ptr::copy_nonoverlapping(p.probs().as_ptr(), probs, need);
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}

/// Edge measure in canonical edge order; `probs` must hold
/// `mig_kernel_num_edges` doubles.
///
/// # Safety
/// `w` must be a live kernel handle; `probs` a buffer of length `len`.
#[no_mangle]
pub unsafe extern "C" fn mig_kernel_edge_measure(
    w: *const MigKernel,
    probs: *mut c_double,
    len: usize,
) -> MigStatus {
    let w = deref_or_null!(w);
    let need = w.0.graph().num_edges();
    if probs.is_null() {
        set_error("null output buffer");
        return MigStatus::MigNullArgument;
    }
    if len < need {
        set_error("probs buffer too small");
        return MigStatus::MigBufferTooSmall;
    }
    match w.0.edge_measure() {
        Ok(m) => {
            std::ptr::copy_nonoverlapping(m.probs().as_ptr(), probs, need);
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

/// Normalizes per-edge values `f` (length = graph edges) into a kernel.
/// With `exponentiate` false the values must be strictly positive; with it
/// true they are arbitrary reals and exp(f) is normalized. Outputs the
/// kernel handle, the log Perron root, and (optionally) the log
/// eigenvector per state.
///
/// # Safety
/// `g` must be a live graph handle; `f` length `f_len`; `out_kernel` valid;
/// `out_potential` either null or of length `mig_graph_num_states(g)`.
#[no_mangle]
pub unsafe extern "C" fn mig_normalize(
    g: *const MigGraph,
    f: *const c_double,
    f_len: usize,
    exponentiate: c_int,
    out_kernel: *mut *mut MigKernel,
    out_log_perron: *mut c_double,
    out_potential: *mut c_double,
) -> MigStatus {
    let g = deref_or_null!(g);
    if f.is_null() {
        set_error("null values pointer");
        return MigStatus::MigNullArgument;
    }
    if f_len != g.0.num_edges() {
        set_error("values length does not match the edge count");
        return MigStatus::MigDomainError;
    }
    let values = std::slice::from_raw_parts(f, f_len).to_vec();
    let func = match EdgeFunction::new(g.0.clone(), values) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let result = if exponentiate != 0 {
        delta_map(&func)
    } else {
        gamma_normalize(&func)
    };
    match result {
        Ok(r) => {
            if !out_log_perron.is_null() {
                out_log_perron.write(r.log_perron);
            }
            if !out_potential.is_null() {
                std::ptr::copy_nonoverlapping(
                    r.potential.values().as_ptr(),
                    out_potential,
                    g.0.num_states(),
                );
            }
            write_out(out_kernel, Box::into_raw(Box::new(MigKernel(r.kernel))))
        }
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------------------
// geodesics, divergence, joint KL
// ---------------------------------------------------------------------------

/// Geodesic kind selector for `mig_geodesic_point`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MigGeodesic {
    MigGeodesicE = 0,
    MigGeodesicM = 1,
}

/// Point of the e- or m-geodesic between two kernels on the same graph.
///
/// # Safety
/// `w0`, `w1` must be live kernel handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_geodesic_point(
    w0: *const MigKernel,
    w1: *const MigKernel,
    kind: MigGeodesic,
    t: c_double,
    out: *mut *mut MigKernel,
) -> MigStatus {
    let w0 = deref_or_null!(w0);
    let w1 = deref_or_null!(w1);
    let point = match kind {
        MigGeodesic::MigGeodesicE => e_geodesic_point(&w0.0, &w1.0, t),
        MigGeodesic::MigGeodesicM => m_geodesic_point(&w0.0, &w1.0, t),
    };
    match point {
        Ok(w) => write_out(out, Box::into_raw(Box::new(MigKernel(w)))),
        Err(e) => fail(e),
    }
}

/// KL divergence rate D(w1 | w2), in nats.
///
/// # Safety
/// `w1`, `w2` must be live kernel handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_divergence(
    w1: *const MigKernel,
    w2: *const MigKernel,
    out: *mut c_double,
) -> MigStatus {
    let w1 = deref_or_null!(w1);
    let w2 = deref_or_null!(w2);
    match divergence(&w1.0, &w2.0) {
        Ok(r) => write_out(out, r.value),
        Err(e) => fail(e),
    }
}

/// Exact KL between the n-step joint laws. `q1`/`q2` may be null to use the
/// stationary distribution of the corresponding kernel; otherwise they are
/// state-length probability vectors.
///
/// # Safety
/// Kernel handles must be live; non-null `q1`/`q2` must hold
/// `mig_kernel_num_states` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mig_kl_joint(
    w1: *const MigKernel,
    w2: *const MigKernel,
    q1: *const c_double,
    q2: *const c_double,
    n: usize,
    out: *mut c_double,
) -> MigStatus {
    let w1 = deref_or_null!(w1);
    let w2 = deref_or_null!(w2);
    let nstates = w1.0.graph().num_states();
    let dist_from = |ptr: *const c_double, kernel: &MarkovKernel| -> Result<Distribution, Error> {
        if ptr.is_null() {
            kernel.stationary_distribution()
        } else {
            Distribution::new(std::slice::from_raw_parts(ptr, nstates).to_vec())
        }
    };
    let qa = match dist_from(q1, &w1.0) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let qb = match dist_from(q2, &w2.0) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    match kl_joint(&w1.0, &w2.0, &qa, &qb, n) {
        Ok(v) => write_out(out, v),
        Err(e) => fail(e),
    }
}

// ---------------------------------------------------------------------------
// families
// ---------------------------------------------------------------------------

/// Opaque exponential family of kernels.
pub struct MigFamily(ExponentialFamily);

/// Parses a family document {"graph", "carrier", "basis"}.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_family_from_json(
    json: *const c_char,
    out: *mut *mut MigFamily,
) -> MigStatus {
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match io::parse_family(text) {
        Ok(f) => write_out(out, Box::into_raw(Box::new(MigFamily(f)))),
        Err(e) => fail(e),
    }
}

/// Serializes a family; free the result with `mig_string_free`.
///
/// # Safety
/// `f` must be a live family handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_family_to_json(
    f: *const MigFamily,
    out: *mut *mut c_char,
) -> MigStatus {
    let f = deref_or_null!(f);
    match io::family_json(&f.0) {
        Ok(text) => write_out(out, to_c_string(text)),
        Err(e) => fail(e),
    }
}

/// The family covering every kernel on the graph (dimension |E| - |X|).
///
/// # Safety
/// `g` must be a live graph handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mig_family_full(
    g: *const MigGraph,
    out: *mut *mut MigFamily,
) -> MigStatus {
    let g = deref_or_null!(g);
    write_out(
        out,
        Box::into_raw(Box::new(MigFamily(ExponentialFamily::full(g.0.clone())))),
    )
}

/// # Safety
/// `f` must be a live family handle or null.
#[no_mangle]
pub unsafe extern "C" fn mig_family_free(f: *mut MigFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

#[no_mangle]
pub extern "C" fn mig_family_dim(f: *const MigFamily) -> usize {
    unsafe { f.as_ref() }.map_or(0, |f| f.0.dim())
}

#[no_mangle]
pub extern "C" fn mig_family_effective_dim(f: *const MigFamily) -> usize {
    unsafe { f.as_ref() }.map_or(0, |f| f.0.effective_dimension())
}

/// Kernel of the family at theta (length = family dimension); also writes
/// the log partition when `out_psi` is non-null.
///
/// # Safety
/// `f` must be a live family handle; `theta` length `d`; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mig_family_kernel_at(
    f: *const MigFamily,
    theta: *const c_double,
    d: usize,
    out: *mut *mut MigKernel,
    out_psi: *mut c_double,
) -> MigStatus {
    let f = deref_or_null!(f);
    if theta.is_null() {
        set_error("null theta pointer");
        return MigStatus::MigNullArgument;
    }
    let t = NaturalParam(std::slice::from_raw_parts(theta, d).to_vec());
    match f.0.kernel_at(&t) {
        Ok(point) => {
            if !out_psi.is_null() {
                out_psi.write(point.psi);
            }
            write_out(out, Box::into_raw(Box::new(MigKernel(point.kernel))))
        }
        Err(e) => fail(e),
    }
}

/// Expectation parameter at theta; `out_eta` must hold `d` doubles.
///
/// # Safety
/// `f` live handle; `theta` and `out_eta` buffers of length `d`.
#[no_mangle]
pub unsafe extern "C" fn mig_family_expectation(
    f: *const MigFamily,
    theta: *const c_double,
    d: usize,
    out_eta: *mut c_double,
) -> MigStatus {
    let f = deref_or_null!(f);
    if theta.is_null() || out_eta.is_null() {
        set_error("null parameter pointer");
        return MigStatus::MigNullArgument;
    }
    let t = NaturalParam(std::slice::from_raw_parts(theta, d).to_vec());
    match expectation_param(&f.0, &t) {
        Ok(eta) => {
            std::ptr::copy_nonoverlapping(eta.as_slice().as_ptr(), out_eta, eta.len());
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}

/// Fisher matrix routes for `mig_family_fisher`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MigFisher {
    /// Edge-measure second moment of the score.
    MigFisherDirect = 0,
    /// Hessian of the log partition.
    MigFisherHessian = 1,
}

/// Fisher matrix at theta, written row-major into `out_g` (d*d doubles).
///
/// # Safety
/// `f` live handle; `theta` length `d`; `out_g` length `d*d`.
#[no_mangle]
pub unsafe extern "C" fn mig_family_fisher(
    f: *const MigFamily,
    theta: *const c_double,
    d: usize,
    method: MigFisher,
    out_g: *mut c_double,
) -> MigStatus {
    let f = deref_or_null!(f);
    if theta.is_null() || out_g.is_null() {
        set_error("null parameter pointer");
        return MigStatus::MigNullArgument;
    }
    let t = NaturalParam(std::slice::from_raw_parts(theta, d).to_vec());
    let g = match method {
        MigFisher::MigFisherDirect => fisher_direct(&f.0, &t),
        MigFisher::MigFisherHessian => fisher_hessian(&f.0, &t),
    };
    match g {
        Ok(g) => {
            for i in 0..g.dim() {
                for j in 0..g.dim() {
                    out_g.add(i * g.dim() + j).write(g.entry(i, j));
                }
            }
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}

/// Inverts the expectation map: writes the theta with eta(theta) = eta.
/// `theta0` may be null for a zero initial guess.
///
/// # Safety
/// `f` live handle; `eta`, `out_theta` (and `theta0` when non-null) length `d`.
#[no_mangle]
pub unsafe extern "C" fn mig_family_theta_from_eta(
    f: *const MigFamily,
    eta: *const c_double,
    d: usize,
    theta0: *const c_double,
    out_theta: *mut c_double,
) -> MigStatus {
    let f = deref_or_null!(f);
    if eta.is_null() || out_theta.is_null() {
        set_error("null parameter pointer");
        return MigStatus::MigNullArgument;
    }
    let eta = ExpectationParam(std::slice::from_raw_parts(eta, d).to_vec());
    let guess = if theta0.is_null() {
        None
    } else {
        Some(NaturalParam(std::slice::from_raw_parts(theta0, d).to_vec()))
    };
    match theta_from_eta(&f.0, &eta, guess.as_ref()) {
        Ok(solve) => {
            std::ptr::copy_nonoverlapping(solve.theta.0.as_ptr(), out_theta, d);
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}

/// Maximum likelihood fit of the family to an edge measure (length =
/// graph edges, strictly positive, shift-invariant).
///
/// # Safety
/// `f` live handle; `target` length `target_len`; `out_theta` length =
/// family dimension.
#[no_mangle]
pub unsafe extern "C" fn mig_family_fit(
    f: *const MigFamily,
    target: *const c_double,
    target_len: usize,
    out_theta: *mut c_double,
) -> MigStatus {
    let f = deref_or_null!(f);
    if target.is_null() || out_theta.is_null() {
        set_error("null parameter pointer");
        return MigStatus::MigNullArgument;
    }
    let values = std::slice::from_raw_parts(target, target_len).to_vec();
    let measure = match EdgeMeasure::new(f.0.graph().clone(), values) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    match fit_mle(&f.0, &measure) {
        Ok(solve) => {
            std::ptr::copy_nonoverlapping(solve.theta.0.as_ptr(), out_theta, f.0.dim());
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}

/// Normalized, shift-invariance-projected transition counts of a state
/// trajectory given by graph state indices.
///
/// # Safety
/// `g` live graph handle; `trajectory` length `len`; `out_measure` must
/// hold `mig_graph_num_edges(g)` doubles.
#[no_mangle]
pub unsafe extern "C" fn mig_empirical_edge_measure(
    g: *const MigGraph,
    trajectory: *const usize,
    len: usize,
    out_measure: *mut c_double,
) -> MigStatus {
    let g = deref_or_null!(g);
    if trajectory.is_null() || out_measure.is_null() {
        set_error("null parameter pointer");
        return MigStatus::MigNullArgument;
    }
    let traj = std::slice::from_raw_parts(trajectory, len);
    if traj.iter().any(|&x| x >= g.0.num_states()) {
        set_error("trajectory state index out of range");
        return MigStatus::MigDomainError;
    }
    match empirical_edge_measure(&g.0, traj) {
        Ok(m) => {
            std::ptr::copy_nonoverlapping(m.probs().as_ptr(), out_measure, m.probs().len());
            MigStatus::MigOk
        }
        Err(e) => fail(e),
    }
}
