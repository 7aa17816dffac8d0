//! JSON documents for kernels, edge functions, families, and distributions,
//! plus trajectory files.
//!
//! Serialization is deterministic: object keys are sorted and every float
//! is printed with 17 significant digits (g-style), enough to round-trip
//! f64 exactly. Parsing rejects unknown fields.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exp_family::ExponentialFamily;
use crate::function_space::EdgeFunction;
use crate::graph::{Distribution, EdgeMeasure, KernelGraph, MarkovKernel};

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Formats a float with 17 significant digits, fixed or scientific
/// whichever is shorter, like printf %.17g. Round-trips any finite f64.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        // JSON has no inf/nan; the library never emits them
        return if v.is_nan() {
            "null".into()
        } else if v > 0.0 {
            "1e999".into()
        } else {
            "-1e999".into()
        };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..17).contains(&exp) {
        let prec = (16 - exp).max(0) as usize;
        trim(&format!("{:.*}", prec, v))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

/// serde_json formatter that prints floats via [`format_g17`].
struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(format_g17(value as f64).as_bytes())
    }
}

/// Serializes any value to deterministic JSON: sorted keys (via the
/// BTreeMap-backed `serde_json::Value`), g17 floats, no extra whitespace.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter);
    tree.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serializer emits utf-8"))
}

/// Pretty-printed variant for files meant to be read by people.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    // the pretty formatter wraps the g17 one
    struct Pretty<'a> {
        inner: serde_json::ser::PrettyFormatter<'a>,
    }
    impl serde_json::ser::Formatter for Pretty<'_> {
        fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            writer.write_all(format_g17(value).as_bytes())
        }
        fn begin_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.begin_array(writer)
        }
        fn end_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.end_array(writer)
        }
        fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.begin_array_value(writer, first)
        }
        fn end_array_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.end_array_value(writer)
        }
        fn begin_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.begin_object(writer)
        }
        fn end_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.end_object(writer)
        }
        fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.begin_object_key(writer, first)
        }
        fn end_object_key<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.end_object_key(writer)
        }
        fn begin_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.begin_object_value(writer)
        }
        fn end_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
        where
            W: ?Sized + std::io::Write,
        {
            self.inner.end_object_value(writer)
        }
    }
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        Pretty {
            inner: serde_json::ser::PrettyFormatter::new(),
        },
    );
    tree.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serializer emits utf-8"))
}

// ---------------------------------------------------------------------------
// document schemas
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelEdgeDoc {
    from: String,
    to: String,
    p: f64,
}

/// Kernel document: {"states": [...], "edges": [{"from","to","p"}, ...]}.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    states: Vec<String>,
    edges: Vec<KernelEdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueEdgeDoc {
    from: String,
    to: String,
    v: f64,
}

/// Edge-function document: like the kernel document with "v" for "p" and
/// no positivity requirement.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFunctionDoc {
    states: Vec<String>,
    edges: Vec<ValueEdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BareEdgeDoc {
    from: String,
    to: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    states: Vec<String>,
    edges: Vec<BareEdgeDoc>,
}

/// Family document: a graph plus per-edge carrier values and basis rows,
/// all aligned with the graph's edge list as written.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    graph: GraphDoc,
    carrier: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

/// Distribution payload: {"states": [...], "p": [...]}.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDoc {
    pub states: Vec<String>,
    pub p: Vec<f64>,
}

fn graph_from_parts(
    states: Vec<String>,
    named_edges: Vec<(String, String)>,
) -> Result<(Arc<KernelGraph>, Vec<usize>)> {
    let graph = Arc::new(KernelGraph::new(states, named_edges.clone())?);
    // permutation from document edge order to canonical order
    let mut perm = Vec::with_capacity(named_edges.len());
    for (from, to) in &named_edges {
        let a = graph.state_index(from).expect("validated");
        let b = graph.state_index(to).expect("validated");
        perm.push(graph.edge_index(a, b).expect("validated"));
    }
    Ok((graph, perm))
}

pub fn kernel_to_doc(w: &MarkovKernel) -> KernelDoc {
    let g = w.graph();
    KernelDoc {
        states: g.states().to_vec(),
        edges: g
            .edges()
            .iter()
            .zip(w.probs())
            .map(|(&(a, b), &p)| KernelEdgeDoc {
                from: g.state_name(a).to_string(),
                to: g.state_name(b).to_string(),
                p,
            })
            .collect(),
    }
}

pub fn kernel_from_doc(doc: KernelDoc) -> Result<MarkovKernel> {
    let named: Vec<(String, String)> = doc
        .edges
        .iter()
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let (graph, perm) = graph_from_parts(doc.states, named)?;
    let mut probs = vec![0.0; graph.num_edges()];
    for (e, &k) in doc.edges.iter().zip(&perm) {
        probs[k] = e.p;
    }
    MarkovKernel::new(graph, probs)
}

pub fn edge_function_to_doc(f: &EdgeFunction) -> EdgeFunctionDoc {
    let g = f.graph();
    EdgeFunctionDoc {
        states: g.states().to_vec(),
        edges: g
            .edges()
            .iter()
            .zip(f.values())
            .map(|(&(a, b), &v)| ValueEdgeDoc {
                from: g.state_name(a).to_string(),
                to: g.state_name(b).to_string(),
                v,
            })
            .collect(),
    }
}

pub fn edge_function_from_doc(doc: EdgeFunctionDoc) -> Result<EdgeFunction> {
    let named: Vec<(String, String)> = doc
        .edges
        .iter()
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let (graph, perm) = graph_from_parts(doc.states, named)?;
    let mut values = vec![0.0; graph.num_edges()];
    for (e, &k) in doc.edges.iter().zip(&perm) {
        values[k] = e.v;
    }
    EdgeFunction::new(graph, values)
}

/// Edge-measure documents reuse the kernel schema; entries are the measure
/// of each edge instead of conditional probabilities.
pub fn edge_measure_to_doc(m: &EdgeMeasure) -> KernelDoc {
    let g = m.graph();
    KernelDoc {
        states: g.states().to_vec(),
        edges: g
            .edges()
            .iter()
            .zip(m.probs())
            .map(|(&(a, b), &p)| KernelEdgeDoc {
                from: g.state_name(a).to_string(),
                to: g.state_name(b).to_string(),
                p,
            })
            .collect(),
    }
}

pub fn edge_measure_from_doc(doc: KernelDoc) -> Result<EdgeMeasure> {
    let named: Vec<(String, String)> = doc
        .edges
        .iter()
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let (graph, perm) = graph_from_parts(doc.states, named)?;
    let mut probs = vec![0.0; graph.num_edges()];
    for (e, &k) in doc.edges.iter().zip(&perm) {
        probs[k] = e.p;
    }
    EdgeMeasure::new(graph, probs)
}

pub fn family_to_doc(f: &ExponentialFamily) -> FamilyDoc {
    let g = f.graph();
    FamilyDoc {
        graph: GraphDoc {
            states: g.states().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|&(a, b)| BareEdgeDoc {
                    from: g.state_name(a).to_string(),
                    to: g.state_name(b).to_string(),
                })
                .collect(),
        },
        carrier: f.carrier().values().to_vec(),
        basis: f.basis().iter().map(|b| b.values().to_vec()).collect(),
    }
}

pub fn family_from_doc(doc: FamilyDoc) -> Result<ExponentialFamily> {
    let named: Vec<(String, String)> = doc
        .graph
        .edges
        .iter()
        .map(|e| (e.from.clone(), e.to.clone()))
        .collect();
    let (graph, perm) = graph_from_parts(doc.graph.states, named)?;
    let ne = graph.num_edges();
    let place = |vals: &[f64]| -> Result<EdgeFunction> {
        if vals.len() != ne {
            return Err(Error::LengthMismatch {
                expected: ne,
                got: vals.len(),
            });
        }
        let mut out = vec![0.0; ne];
        for (v, &k) in vals.iter().zip(&perm) {
            out[k] = *v;
        }
        EdgeFunction::new(graph.clone(), out)
    };
    let carrier = place(&doc.carrier)?;
    let basis = doc
        .basis
        .iter()
        .map(|row| place(row))
        .collect::<Result<Vec<_>>>()?;
    ExponentialFamily::new(carrier, basis)
}

pub fn distribution_to_doc(graph: &KernelGraph, d: &Distribution) -> DistributionDoc {
    DistributionDoc {
        states: graph.states().to_vec(),
        p: d.probs().to_vec(),
    }
}

/// Reads a distribution document and aligns it with an expected graph.
pub fn distribution_from_doc(doc: DistributionDoc, graph: &KernelGraph) -> Result<Distribution> {
    if doc.states != graph.states() {
        return Err(Error::GraphMismatch);
    }
    Distribution::new(doc.p)
}

// ---------------------------------------------------------------------------
// parse entry points
// ---------------------------------------------------------------------------

pub fn parse_kernel(json: &str) -> Result<MarkovKernel> {
    kernel_from_doc(serde_json::from_str(json)?)
}

pub fn parse_edge_function(json: &str) -> Result<EdgeFunction> {
    edge_function_from_doc(serde_json::from_str(json)?)
}

pub fn parse_edge_measure(json: &str) -> Result<EdgeMeasure> {
    edge_measure_from_doc(serde_json::from_str(json)?)
}

pub fn parse_family(json: &str) -> Result<ExponentialFamily> {
    family_from_doc(serde_json::from_str(json)?)
}

pub fn kernel_json(w: &MarkovKernel) -> Result<String> {
    to_json(&kernel_to_doc(w))
}

pub fn edge_function_json(f: &EdgeFunction) -> Result<String> {
    to_json(&edge_function_to_doc(f))
}

pub fn edge_measure_json(m: &EdgeMeasure) -> Result<String> {
    to_json(&edge_measure_to_doc(m))
}

pub fn family_json(f: &ExponentialFamily) -> Result<String> {
    to_json(&family_to_doc(f))
}

/// Parses a trajectory file: one state name per line, blanks skipped.
pub fn parse_trajectory(text: &str, graph: &KernelGraph) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        let idx = graph
            .state_index(name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))?;
        out.push(idx);
    }
    Ok(out)
}

pub fn trajectory_text(graph: &KernelGraph, trajectory: &[usize]) -> String {
    let mut s = String::new();
    for &x in trajectory {
        s.push_str(graph.state_name(x));
        s.push('\n');
    }
    s
}
