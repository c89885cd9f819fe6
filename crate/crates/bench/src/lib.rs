//! Shared inputs for the criterion benchmarks.

use netmod_core::dyadreg::{build_design, fit_quasipoisson, DyadDesign};
use netmod_core::synthetic::{noordin_style, NoordinStyle, COMMUNICATION};
use netmod_core::{MetricSpec, WeightedNetwork};

pub fn noordin(n: usize) -> NoordinStyle {
    noordin_style(n, 2024).expect("synthetic data")
}

pub fn collaboration_design(data: &NoordinStyle) -> DyadDesign {
    let layers: Vec<(String, &WeightedNetwork)> = [COMMUNICATION, "education", "organization"]
        .iter()
        .map(|p| (p.to_string(), data.state.layer(p).expect("layer")))
        .collect();
    build_design(&data.collaboration, &layers).expect("design")
}

pub fn dyadic_metric(data: &NoordinStyle) -> MetricSpec {
    MetricSpec::ExpectedDyadSum {
        model: fit_quasipoisson(&collaboration_design(data)).expect("fit"),
    }
}
