//! JSON file formats.
//!
//! Instances serialize as a flat object: the `kind` tag, the problem
//! parameters (`problem`, `n`, `k`, ...), the hypothesis, the observation
//! (hex adjacency rows or row-major entries) and the latent fields. Floats
//! are written in shortest round-trip form, so a write/read cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use planted_core::instances::{PlantedGraphInstance, PlantedMatrixInstance, SpcaInstance};
use planted_core::reductions::{Observation, ReductionOutput};
use planted_core::{Hypothesis, ProblemParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Any generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    /// Graph problem.
    Graph(PlantedGraphInstance),
    /// Square matrix problem.
    Matrix(PlantedMatrixInstance),
    /// Sparse PCA samples.
    Spca(SpcaInstance),
}

impl Instance {
    /// Generating parameters.
    pub fn params(&self) -> &ProblemParams {
        match self {
            Instance::Graph(g) => &g.params,
            Instance::Matrix(m) => &m.params,
            Instance::Spca(s) => &s.params,
        }
    }

    /// Hypothesis the instance was drawn under.
    pub fn hypothesis(&self) -> Hypothesis {
        match self {
            Instance::Graph(g) => g.hypothesis,
            Instance::Matrix(m) => m.hypothesis,
            Instance::Spca(s) => s.hypothesis,
        }
    }

    /// The observed data, without latent fields.
    pub fn observation(&self) -> Observation {
        match self {
            Instance::Graph(g) => Observation::Graph(g.graph.clone()),
            Instance::Matrix(m) => Observation::Matrix(m.matrix.clone()),
            Instance::Spca(s) => Observation::Samples(s.samples.clone()),
        }
    }
}

/// Input accepted by `solve`: an instance or a reduction output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolverInput {
    /// Generated instance.
    Instance(Instance),
    /// Output of `reduce`.
    Reduction(ReductionOutput),
}

impl SolverInput {
    /// Observation and the parameters it is claimed to follow.
    pub fn parts(&self) -> (Observation, &ProblemParams) {
        match self {
            SolverInput::Instance(i) => (i.observation(), i.params()),
            SolverInput::Reduction(r) => (r.observation.clone(), &r.target),
        }
    }
}

/// Pretty JSON text.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Parse JSON text.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Read a JSON file.
pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path.as_ref())?;
    from_json(&text)
}

/// Write a JSON file with a trailing newline.
pub fn save<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = to_json(value)?;
    text.push('\n');
    fs::write(path.as_ref(), text).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use planted_core::instances::{gen_graph, gen_matrix};
    use planted_core::{Problem, RandomStream};

    #[test]
    fn flat_layout() {
        let mut rng = RandomStream::new(1).rng();
        let g = gen_graph(&ProblemParams::pc(10, 3, 0.5), Hypothesis::H1, &mut rng).unwrap();
        let v: serde_json::Value = serde_json::to_value(Instance::Graph(g)).unwrap();
        assert_eq!(v["kind"], "graph");
        assert_eq!(v["problem"], "PC");
        assert_eq!(v["n"], 10);
        assert_eq!(v["hypothesis"], "H1");
    }

    #[test]
    fn matrix_round_trip() {
        let mut rng = RandomStream::new(2).rng();
        let m = gen_matrix(&ProblemParams::matrix(Problem::ROS, 12, 3, 2.5), Hypothesis::H1, &mut rng).unwrap();
        let inst = Instance::Matrix(m);
        let back: Instance = from_json(&to_json(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
        let Instance::Matrix(b) = back else { panic!() };
        let Instance::Matrix(a) = inst else { panic!() };
        for (x, y) in a.matrix.as_slice().iter().zip(b.matrix.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
