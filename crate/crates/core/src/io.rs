//! On-disk formats: model JSON, CSV tables, binary PGM images.
//!
//! Every real number is written as `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Deserialize;

use crate::activation::{Activation, AdaptiveActivation, FixedActivation};
use crate::analysis::{ActivationCurve, GridMap};
use crate::dct::{BasisConfig, DctCoefficients};
use crate::error::{EnnError, Result};
use crate::network::{BenchmarkKind, BenchmarkModel, EnnModel, Network};
use crate::tasks::{Problem, Sample};
use crate::training::TrainReport;

/// Canonical text form of a real number.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| fmt_real(*v)).collect();
    format!("[{}]", items.join(", "))
}

/// A model file: either a fully adaptive ENN or a frozen-activation benchmark.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Enn(EnnModel),
    Benchmark(BenchmarkModel),
}

impl SavedModel {
    /// The model with activations widened to [`Activation`].
    pub fn into_network(self) -> Network<Activation> {
        match self {
            SavedModel::Enn(m) => m.map_activations(Activation::Adaptive),
            SavedModel::Benchmark(b) => b.network,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedModel::Enn(_) => "enn",
            SavedModel::Benchmark(b) => b.kind.name(),
        }
    }
}

fn activation_tag(a: &Activation) -> &'static str {
    match a {
        Activation::Adaptive(_) => "dct",
        Activation::Fixed(FixedActivation::Relu) => "relu",
        Activation::Fixed(FixedActivation::Sigmoid) => "sigmoid",
        Activation::Fixed(FixedActivation::Identity) => "identity",
    }
}

fn activation_coeffs(a: &Activation) -> &[f64] {
    match a {
        Activation::Adaptive(a) => a.coeffs().values(),
        Activation::Fixed(_) => &[],
    }
}

fn header_fields<A>(out: &mut String, m: &Network<A>) {
    let b = m.basis();
    let _ = writeln!(out, "  \"m0\": {},", m.m0());
    let _ = writeln!(out, "  \"m1\": {},", m.m1());
    let _ = writeln!(out, "  \"n\": {},", b.grid_len());
    let _ = writeln!(out, "  \"q\": {},", b.budget());
    let _ = writeln!(
        out,
        "  \"hidden_weights\": {},",
        json_array(m.hidden_weights())
    );
    let _ = writeln!(
        out,
        "  \"output_weights\": {},",
        json_array(m.output_weights())
    );
}

fn coeff_block<'a>(out: &mut String, hidden: impl Iterator<Item = &'a [f64]>, output: &[f64]) {
    let rows: Vec<String> = hidden.map(|c| format!("    {}", json_array(c))).collect();
    if rows.is_empty() {
        out.push_str("  \"hidden_coeffs\": [],\n");
    } else {
        let _ = writeln!(out, "  \"hidden_coeffs\": [\n{}\n  ],", rows.join(",\n"));
    }
    let _ = write!(out, "  \"output_coeffs\": {}", json_array(output));
}

/// JSON document for an ENN.
pub fn enn_to_json(model: &EnnModel) -> String {
    let mut out = String::from("{\n");
    header_fields(&mut out, model);
    coeff_block(
        &mut out,
        model
            .hidden_activations()
            .iter()
            .map(|a| a.coeffs().values()),
        model.output_activation().coeffs().values(),
    );
    out.push_str("\n}\n");
    out
}

/// JSON document for a benchmark model: the ENN fields plus activation tags.
pub fn benchmark_to_json(model: &BenchmarkModel) -> String {
    let net = &model.network;
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"kind\": \"{}\",", model.kind.name());
    let _ = writeln!(
        out,
        "  \"hidden_activation\": \"{}\",",
        activation_tag(&net.hidden_activations()[0])
    );
    let _ = writeln!(
        out,
        "  \"output_activation\": \"{}\",",
        activation_tag(net.output_activation())
    );
    header_fields(&mut out, net);
    let adaptive_hidden = matches!(net.hidden_activations()[0], Activation::Adaptive(_));
    let hidden: Vec<&[f64]> = if adaptive_hidden {
        net.hidden_activations()
            .iter()
            .map(activation_coeffs)
            .collect()
    } else {
        Vec::new()
    };
    coeff_block(
        &mut out,
        hidden.into_iter(),
        activation_coeffs(net.output_activation()),
    );
    out.push_str("\n}\n");
    out
}

impl SavedModel {
    pub fn to_json(&self) -> String {
        match self {
            SavedModel::Enn(m) => enn_to_json(m),
            SavedModel::Benchmark(b) => benchmark_to_json(b),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        doc.into_model()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    hidden_activation: Option<String>,
    #[serde(default)]
    output_activation: Option<String>,
    m0: usize,
    m1: usize,
    n: usize,
    q: usize,
    hidden_weights: Vec<f64>,
    output_weights: Vec<f64>,
    hidden_coeffs: Vec<Vec<f64>>,
    output_coeffs: Vec<f64>,
}

fn parse_tag(tag: &str, coeffs: Option<&[f64]>, basis: BasisConfig) -> Result<Activation> {
    Ok(match tag {
        "relu" => Activation::Fixed(FixedActivation::Relu),
        "sigmoid" => Activation::Fixed(FixedActivation::Sigmoid),
        "identity" => Activation::Fixed(FixedActivation::Identity),
        "dct" => {
            let c = coeffs
                .ok_or_else(|| EnnError::Parse("dct activation without coefficients".into()))?;
            Activation::Adaptive(AdaptiveActivation::new(DctCoefficients::new(
                c.to_vec(),
                basis,
            )?))
        }
        other => return Err(EnnError::Parse(format!("unknown activation `{other}`"))),
    })
}

impl ModelDoc {
    fn into_model(self) -> Result<SavedModel> {
        let basis = BasisConfig::new(self.n, self.q)?;
        let kind = self.kind.as_deref().unwrap_or("enn");
        if kind == "enn" {
            if self.hidden_coeffs.len() != self.m1 {
                return Err(EnnError::DimensionMismatch {
                    expected: self.m1,
                    got: self.hidden_coeffs.len(),
                });
            }
            let hidden = self
                .hidden_coeffs
                .into_iter()
                .map(|c| DctCoefficients::new(c, basis).map(AdaptiveActivation::new))
                .collect::<Result<Vec<_>>>()?;
            let output = AdaptiveActivation::new(DctCoefficients::new(self.output_coeffs, basis)?);
            return Network::from_parts(
                self.m0,
                self.m1,
                basis,
                self.hidden_weights,
                hidden,
                self.output_weights,
                output,
            )
            .map(SavedModel::Enn);
        }
        let kind = match kind {
            "relu" => BenchmarkKind::Relu,
            "sigm" => BenchmarkKind::Sigm,
            "fdct" => BenchmarkKind::Fdct,
            other => return Err(EnnError::Parse(format!("unknown model kind `{other}`"))),
        };
        let hidden_tag = self
            .hidden_activation
            .ok_or_else(|| EnnError::Parse("missing hidden_activation".into()))?;
        let output_tag = self
            .output_activation
            .ok_or_else(|| EnnError::Parse("missing output_activation".into()))?;
        let hidden = (0..self.m1)
            .map(|k| {
                parse_tag(
                    &hidden_tag,
                    self.hidden_coeffs.get(k).map(Vec::as_slice),
                    basis,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let output = parse_tag(&output_tag, Some(&self.output_coeffs), basis)?;
        let network = Network::from_parts(
            self.m0,
            self.m1,
            basis,
            self.hidden_weights,
            hidden,
            self.output_weights,
            output,
        )?;
        Ok(SavedModel::Benchmark(BenchmarkModel { kind, network }))
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Writes `header` then one row per item of `rows`.
pub fn write_csv<W, I, R>(w: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut wr = csv_writer(w);
    wr.write_record(header)?;
    for row in rows {
        wr.write_record(row)?;
    }
    wr.flush()?;
    Ok(())
}

/// `x1,x2,value` rows in storage order.
pub fn write_grid_csv<W: Write>(w: W, map: &GridMap) -> Result<()> {
    write_csv(
        w,
        &["x1", "x2", "value"],
        map.points()
            .map(|(a, b, v)| [fmt_real(a), fmt_real(b), fmt_real(v)]),
    )
}

/// Binary PGM: one byte per grid value in storage order (image row `i` is
/// `x1 = coord(i)`), affinely mapped from `[min, max]` to `[0, 255]`.
pub fn grid_to_pgm(map: &GridMap) -> Vec<u8> {
    let (lo, hi) = map.min_max();
    let r = map.resolution();
    let mut out = format!(
        "P5\n# min={} max={}\n{r} {r}\n255\n",
        fmt_real(lo),
        fmt_real(hi)
    )
    .into_bytes();
    let span = hi - lo;
    out.extend(map.values().iter().map(|&v| {
        if span > 0.0 {
            (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

/// Parsed PGM header and pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub min: f64,
    pub max: f64,
    pub pixels: Vec<u8>,
}

/// Reads the files written by [`grid_to_pgm`].
pub fn parse_pgm(bytes: &[u8]) -> Result<Pgm> {
    let bad = |m: &str| EnnError::Parse(format!("pgm: {m}"));
    let mut lines = 0;
    let mut pos = 0;
    let mut header = Vec::new();
    while lines < 4 {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        header.push(
            std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("header not utf-8"))?,
        );
        pos += end + 1;
        lines += 1;
    }
    if header[0] != "P5" || header[3] != "255" {
        return Err(bad("unsupported magic or depth"));
    }
    let comment = header[1]
        .strip_prefix("# ")
        .ok_or_else(|| bad("missing range comment"))?;
    let mut min = None;
    let mut max = None;
    for part in comment.split_whitespace() {
        if let Some(v) = part.strip_prefix("min=") {
            min = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("max=") {
            max = v.parse().ok();
        }
    }
    let dims: Vec<usize> = header[2]
        .split_whitespace()
        .filter_map(|v| v.parse().ok())
        .collect();
    if dims.len() != 2 {
        return Err(bad("bad dimensions"));
    }
    let pixels = bytes[pos..].to_vec();
    if pixels.len() != dims[0] * dims[1] {
        return Err(bad("pixel count"));
    }
    Ok(Pgm {
        width: dims[0],
        height: dims[1],
        min: min.ok_or_else(|| bad("min"))?,
        max: max.ok_or_else(|| bad("max"))?,
        pixels,
    })
}

/// `epoch,running_mse`, epochs counted from 1.
pub fn write_train_report<W: Write>(w: W, report: &TrainReport) -> Result<()> {
    write_csv(
        w,
        &["epoch", "running_mse"],
        report
            .epoch_mse
            .iter()
            .enumerate()
            .map(|(i, m)| [(i + 1).to_string(), fmt_real(*m)]),
    )
}

/// `z,value` pairs of one curve.
pub fn write_curve<W: Write>(w: W, curve: &ActivationCurve) -> Result<()> {
    write_csv(
        w,
        &["z", "value"],
        curve
            .points
            .iter()
            .map(|(z, v)| [fmt_real(*z), fmt_real(*v)]),
    )
}

/// `harmonic,value` rows; the comment line notes the gain convention.
pub fn write_coefficients<W: Write>(mut w: W, coeffs: &DctCoefficients) -> Result<()> {
    writeln!(
        w,
        "# N={} Q={}; orthonormal DCT-II gains folded into the values",
        coeffs.config().grid_len(),
        coeffs.config().budget()
    )?;
    write_csv(
        w,
        &["harmonic", "value"],
        coeffs
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| [(2 * i + 1).to_string(), fmt_real(*v)]),
    )
}

/// Reads `harmonic,value` rows (comment lines skipped) as `(harmonic, value)`.
pub fn read_coefficients<R: Read>(r: R) -> Result<Vec<(usize, f64)>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let h = rec.get(0).and_then(|v| v.trim().parse().ok());
        let v = rec.get(1).and_then(|v| v.trim().parse().ok());
        match (h, v) {
            (Some(h), Some(v)) => out.push((h, v)),
            _ => return Err(EnnError::Parse(format!("bad coefficient row {rec:?}"))),
        }
    }
    Ok(out)
}

/// `x1,x2,y` rows.
pub fn write_dataset<W: Write>(w: W, data: &[Sample]) -> Result<()> {
    write_csv(
        w,
        &["x1", "x2", "y"],
        data.iter()
            .map(|s| [fmt_real(s.x[0]), fmt_real(s.x[1]), fmt_real(s.y)]),
    )
}

pub fn read_dataset<R: Read>(r: R) -> Result<Vec<Sample>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["x1", "x2", "y"] {
        return Err(EnnError::Parse(format!(
            "expected header x1,x2,y, got {headers:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| EnnError::Parse(format!("dataset value: {e}")))?;
        if vals.len() != 3 {
            return Err(EnnError::Parse(format!(
                "expected 3 columns, got {}",
                vals.len()
            )));
        }
        out.push(Sample {
            x: vec![vals[0], vals[1]],
            y: vals[2],
        });
    }
    Ok(out)
}

/// Sidecar describing how a dataset file was generated.
pub fn dataset_manifest(problem: Problem, n: usize, seed: u64) -> String {
    let kind = match problem.kind() {
        crate::tasks::TaskKind::Classification => "classification",
        crate::tasks::TaskKind::Regression => "regression",
    };
    format!(
        "{{\n  \"schema\": 1,\n  \"problem\": \"{}\",\n  \"kind\": \"{kind}\",\n  \"n\": {n},\n  \"seed\": {seed}\n}}\n",
        problem.name()
    )
}
