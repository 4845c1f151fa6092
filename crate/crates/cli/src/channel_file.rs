//! JSON ingestion for channels, input states, ensembles and stochastic matrices.
//!
//! Complex entries are `[re, im]` pairs; matrices are arrays of rows.

use std::path::Path;

use qconv_core::linalg::{ComplexMatrix, HermitianOperator, C64};
use qconv_core::quantum::{DensityMatrix, QuantumChannel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Trace-preservation, positivity and Hermiticity tolerance for user data.
pub const INPUT_TOL: f64 = 1e-8;

type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Kraus,
    Choi,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ChannelSpecFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub representation: Representation,
    /// A list of `dimOut x dimIn` Kraus matrices, or one Choi matrix on `Abar (x) B`.
    pub data: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleEntry {
    p: f64,
    state: JsonMatrix,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))
}

fn matrix(m: &JsonMatrix, rows: usize, cols: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(schema(format!("{what} must be {rows}x{cols}")));
    }
    let entries = m.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(ComplexMatrix::from_row_major(rows, cols, entries)?)
}

fn hermitian(m: &JsonMatrix, d: usize, what: &str) -> Result<HermitianOperator, CliError> {
    let m = matrix(m, d, d, what)?;
    let deviation = m.hermiticity_defect();
    if deviation > INPUT_TOL {
        return Err(schema(format!("{what} is not Hermitian (max deviation {deviation:.3e})")));
    }
    Ok(HermitianOperator::hermitian_part(&m))
}

/// Parses a channel spec and checks it is CPTP within [`INPUT_TOL`].
///
/// Choi input is converted to Kraus operators through its eigendecomposition.
pub fn parse_channel(contents: &str) -> Result<QuantumChannel, CliError> {
    let spec: ChannelSpecFile = serde_json::from_str(contents).map_err(|e| schema(format!("channel spec: {e}")))?;
    let (din, dout) = (spec.dim_in, spec.dim_out);
    if din == 0 || dout == 0 {
        return Err(schema("channel spec: dimIn and dimOut must be positive"));
    }
    let channel = match spec.representation {
        Representation::Kraus => {
            let data: Vec<JsonMatrix> =
                serde_json::from_value(spec.data).map_err(|e| schema(format!("channel spec: kraus data: {e}")))?;
            let kraus = data
                .iter()
                .enumerate()
                .map(|(k, m)| matrix(m, dout, din, &format!("Kraus operator {k}")))
                .collect::<Result<Vec<_>, _>>()?;
            QuantumChannel::from_kraus_with_tol(din, dout, kraus, INPUT_TOL)?
        }
        Representation::Choi => {
            let data: JsonMatrix =
                serde_json::from_value(spec.data).map_err(|e| schema(format!("channel spec: choi data: {e}")))?;
            let choi = hermitian(&data, din * dout, "Choi operator")?;
            QuantumChannel::from_choi_with_tol(din, dout, choi, INPUT_TOL)?
        }
    };
    Ok(channel)
}

pub fn load_channel(path: &Path) -> Result<QuantumChannel, CliError> {
    parse_channel(&read(path)?)
}

fn to_json_matrix(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect()).collect()
}

/// Serializes a channel in either representation; [`parse_channel`] reads it back.
pub fn channel_to_json(channel: &QuantumChannel, representation: Representation) -> String {
    let data = match representation {
        Representation::Kraus => serde_json::to_value(channel.kraus().iter().map(to_json_matrix).collect::<Vec<_>>()),
        Representation::Choi => serde_json::to_value(to_json_matrix(&channel.choi().to_matrix())),
    }
    .expect("finite matrices serialize");
    let spec = ChannelSpecFile { dim_in: channel.dim_in(), dim_out: channel.dim_out(), representation, data };
    serde_json::to_string_pretty(&spec).expect("channel spec serializes")
}

/// A density matrix given as a bare `d x d` matrix.
pub fn parse_density(contents: &str) -> Result<DensityMatrix, CliError> {
    let data: JsonMatrix = serde_json::from_str(contents).map_err(|e| schema(format!("state: {e}")))?;
    let op = hermitian(&data, data.len(), "state")?;
    Ok(DensityMatrix::with_tolerance(op, INPUT_TOL)?)
}

/// `[{"p": .., "state": [[..]]}, ..]`.
pub fn parse_ensemble(contents: &str) -> Result<Vec<(f64, DensityMatrix)>, CliError> {
    let data: Vec<EnsembleEntry> = serde_json::from_str(contents).map_err(|e| schema(format!("ensemble: {e}")))?;
    data.iter()
        .enumerate()
        .map(|(x, e)| {
            let op = hermitian(&e.state, e.state.len(), &format!("ensemble state {x}"))?;
            Ok((e.p, DensityMatrix::with_tolerance(op, INPUT_TOL)?))
        })
        .collect()
}

/// A column-stochastic matrix as rows `w[y][x]`.
pub fn parse_stochastic(contents: &str) -> Result<Vec<Vec<f64>>, CliError> {
    serde_json::from_str(contents).map_err(|e| schema(format!("stochastic matrix: {e}")))
}
