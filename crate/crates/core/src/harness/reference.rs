//! Hardware reference numbers, kept for side-by-side reporting only.

use serde::{Deserialize, Serialize};

/// Measured on hardware for one circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareReference {
    pub label: &'static str,
    pub tvd: Option<f64>,
    /// Probability that the 110/011 imbalance is real.
    pub bias_significance: f64,
    pub incorrect_component: f64,
}

pub const HARDWARE: [HardwareReference; 7] = [
    HardwareReference {
        label: "direct",
        tvd: Some(0.0125),
        bias_significance: 0.99999,
        incorrect_component: 0.0091,
    },
    HardwareReference {
        label: "S1",
        tvd: None,
        bias_significance: 0.9580,
        incorrect_component: 0.0065,
    },
    HardwareReference {
        label: "S2",
        tvd: None,
        bias_significance: 0.9785,
        incorrect_component: 0.0064,
    },
    HardwareReference {
        label: "S3",
        tvd: None,
        bias_significance: 0.9959,
        incorrect_component: 0.0066,
    },
    HardwareReference {
        label: "S4",
        tvd: None,
        bias_significance: 0.8665,
        incorrect_component: 0.0070,
    },
    HardwareReference {
        label: "S5",
        tvd: None,
        bias_significance: 0.3381,
        incorrect_component: 0.0067,
    },
    HardwareReference {
        label: "S6",
        tvd: Some(0.0059),
        bias_significance: 0.2530,
        incorrect_component: 0.0053,
    },
];

/// Compiled width and counts reported alongside the hardware runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReference {
    pub label: &'static str,
    pub qubits: usize,
    pub zz: usize,
    pub gates: usize,
}

const fn rr(label: &'static str, qubits: usize, zz: usize, gates: usize) -> ResourceReference {
    ResourceReference {
        label,
        qubits,
        zz,
        gates,
    }
}

pub const RESOURCES: [ResourceReference; 8] = [
    rr("direct", 6, 16, 173),
    rr("naive", 26, 58, 580),
    rr("S1", 26, 52, 475),
    rr("S2", 25, 50, 439),
    rr("S3", 25, 50, 439),
    rr("S4", 26, 52, 483),
    rr("S5", 26, 58, 559),
    rr("S6", 25, 54, 479),
];

pub fn hardware(label: &str) -> Option<&'static HardwareReference> {
    HARDWARE.iter().find(|h| h.label == label)
}

pub fn resources(label: &str) -> Option<&'static ResourceReference> {
    RESOURCES.iter().find(|h| h.label == label)
}

/// Rows of the full-scale dataset: 58 graphs of 992 pairs.
pub const FULL_SCALE_ROWS: usize = 58 * 992;
