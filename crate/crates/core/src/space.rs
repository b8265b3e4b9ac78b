//! GNN architecture search space: component domains, the gene encoding of an
//! architecture, uniform sampling and exhaustive enumeration.
//!
//! A layer is described by five components in a fixed order: attention,
//! aggregation, activation, head count and hidden dimension. An architecture
//! of `l` layers is a vector of `5 * l` indices, one per component.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::Stream;

/// Components per layer.
pub const COMPONENTS_PER_LAYER: usize = 5;

/// Default enumeration cap.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

pub const ATTENTION: &[&str] = &[
    "gat",
    "gcn",
    "cos",
    "const",
    "sym-gat",
    "linear",
    "gene-linear",
];
pub const AGGREGATION: &[&str] = &["mean", "max", "sum"];
pub const ACTIVATION: &[&str] = &[
    "tanh",
    "sigmoid",
    "relu",
    "linear",
    "softplus",
    "leaky_relu",
    "relu6",
    "elu",
];
pub const HEADS: &[&str] = &["1", "2", "4", "6", "8"];
pub const HIDDEN_DIMS: &[&str] = &["8", "16", "32", "64", "128", "256", "512"];

/// Per-layer component kinds, in encoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Attention,
    Aggregation,
    Activation,
    Heads,
    HiddenDim,
}

impl ComponentKind {
    pub const ORDER: [ComponentKind; COMPONENTS_PER_LAYER] = [
        ComponentKind::Attention,
        ComponentKind::Aggregation,
        ComponentKind::Activation,
        ComponentKind::Heads,
        ComponentKind::HiddenDim,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ComponentKind::Attention => "att",
            ComponentKind::Aggregation => "agg",
            ComponentKind::Activation => "act",
            ComponentKind::Heads => "head",
            ComponentKind::HiddenDim => "dim",
        }
    }

    fn default_values(self) -> &'static [&'static str] {
        match self {
            ComponentKind::Attention => ATTENTION,
            ComponentKind::Aggregation => AGGREGATION,
            ComponentKind::Activation => ACTIVATION,
            ComponentKind::Heads => HEADS,
            ComponentKind::HiddenDim => HIDDEN_DIMS,
        }
    }
}

/// One component slot and its ordered value domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSpec {
    name: String,
    values: Vec<String>,
}

impl ComponentSpec {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(invalid(format!("component `{name}` has an empty domain")));
        }
        let mut seen = HashSet::with_capacity(values.len());
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(invalid(format!(
                    "component `{name}` lists value `{v}` more than once"
                )));
            }
            if v.is_empty() || v.contains([',', ';']) {
                return Err(invalid(format!(
                    "component `{name}` value `{v}` is empty or contains a separator"
                )));
            }
        }
        Ok(Self { name, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// An ordered list of `5 * layers` component specs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchSpace {
    layers: usize,
    components: Vec<ComponentSpec>,
}

impl SearchSpace {
    pub fn new(layers: usize, components: Vec<ComponentSpec>) -> Result<Self> {
        if layers == 0 {
            return Err(invalid("a search space needs at least one layer"));
        }
        if components.len() != COMPONENTS_PER_LAYER * layers {
            return Err(invalid(format!(
                "{layers} layer(s) need {} components, got {}",
                COMPONENTS_PER_LAYER * layers,
                components.len()
            )));
        }
        Ok(Self { layers, components })
    }

    /// The GNN space with the standard domains, `layers` deep.
    pub fn default_space(layers: usize) -> Result<Self> {
        if layers == 0 {
            return Err(invalid("layers must be at least 1"));
        }
        let mut components = Vec::with_capacity(COMPONENTS_PER_LAYER * layers);
        for layer in 1..=layers {
            for kind in ComponentKind::ORDER {
                components.push(ComponentSpec::new(
                    format!("{}_{layer}", kind.symbol()),
                    kind.default_values()
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                )?);
            }
        }
        Self::new(layers, components)
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    /// Number of gene positions, `5 * layers`.
    pub fn positions(&self) -> usize {
        self.components.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.components.iter().map(ComponentSpec::len).collect()
    }

    /// Exact number of architectures in the space.
    pub fn size(&self) -> BigUint {
        self.components
            .iter()
            .fold(BigUint::from(1u32), |acc, c| acc * BigUint::from(c.len()))
    }

    /// Size as a `u64` when it fits.
    pub fn size_u64(&self) -> Option<u64> {
        self.components
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
    }

    pub fn contains(&self, arch: &Architecture) -> bool {
        arch.genes.len() == self.components.len()
            && arch
                .genes
                .iter()
                .zip(&self.components)
                .all(|(&g, c)| g < c.len())
    }

    pub fn check(&self, arch: &Architecture) -> Result<()> {
        if self.contains(arch) {
            Ok(())
        } else {
            Err(invalid(format!(
                "architecture {:?} is not in a space with domains {:?}",
                arch.genes,
                self.domain_sizes()
            )))
        }
    }

    /// Draw each gene independently and uniformly.
    pub fn sample_uniform(&self, rng: &mut Stream) -> Architecture {
        Architecture {
            genes: self
                .components
                .iter()
                .map(|c| rng.below_usize(c.len()))
                .collect(),
        }
    }

    /// Canonical text form: labels joined by `,` within a layer, layers
    /// joined by `;`.
    pub fn encode(&self, arch: &Architecture) -> String {
        debug_assert!(self.contains(arch));
        let mut out = String::with_capacity(8 * arch.genes.len());
        for (i, (&g, c)) in arch.genes.iter().zip(&self.components).enumerate() {
            if i > 0 {
                out.push(if i % COMPONENTS_PER_LAYER == 0 {
                    ';'
                } else {
                    ','
                });
            }
            out.push_str(&c.values[g]);
        }
        out
    }

    pub fn decode(&self, text: &str) -> Result<Architecture> {
        let layers: Vec<&str> = text.trim().split(';').collect();
        if layers.len() != self.layers {
            return Err(Error::Parse {
                position: "architecture".into(),
                message: format!("expected {} layer(s), found {}", self.layers, layers.len()),
            });
        }
        let mut genes = Vec::with_capacity(self.positions());
        for (layer, fields) in layers.iter().enumerate() {
            let labels: Vec<&str> = fields.split(',').collect();
            if labels.len() != COMPONENTS_PER_LAYER {
                return Err(Error::Parse {
                    position: format!("layer {}", layer + 1),
                    message: format!(
                        "expected {COMPONENTS_PER_LAYER} fields, found {}",
                        labels.len()
                    ),
                });
            }
            for (slot, label) in labels.iter().enumerate() {
                let spec = &self.components[layer * COMPONENTS_PER_LAYER + slot];
                let label = label.trim();
                let idx = spec.index_of(label).ok_or_else(|| Error::Parse {
                    position: format!("layer {} field {} ({})", layer + 1, slot + 1, spec.name),
                    message: format!("unknown value `{label}`"),
                })?;
                genes.push(idx);
            }
        }
        Ok(Architecture { genes })
    }

    /// Every architecture in lexicographic gene order (last gene fastest).
    /// Refused when the space holds more than `cap` architectures.
    pub fn enumerate(&self, cap: u64) -> Result<Enumerate<'_>> {
        match self.size_u64() {
            Some(n) if n <= cap => Ok(Enumerate {
                space: self,
                next: Some(vec![0; self.positions()]),
            }),
            _ => Err(Error::SpaceTooLarge {
                size: self.size().to_string(),
                cap,
            }),
        }
    }
}

/// Iterator returned by [`SearchSpace::enumerate`].
pub struct Enumerate<'a> {
    space: &'a SearchSpace,
    next: Option<Vec<usize>>,
}

impl Iterator for Enumerate<'_> {
    type Item = Architecture;

    fn next(&mut self) -> Option<Architecture> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.space.components[pos].len() {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(Architecture { genes: current })
    }
}

/// A point in the search space: one value index per component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Architecture {
    genes: Vec<usize>,
}

impl Architecture {
    pub fn new(genes: Vec<usize>) -> Self {
        Self { genes }
    }

    pub fn genes(&self) -> &[usize] {
        &self.genes
    }

    pub(crate) fn genes_mut(&mut self) -> &mut [usize] {
        &mut self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Positions at which `self` and `other` hold different values.
    pub fn differing_positions(&self, other: &Architecture) -> Vec<usize> {
        self.genes
            .iter()
            .zip(&other.genes)
            .enumerate()
            .filter_map(|(i, (a, b))| (a != b).then_some(i))
            .collect()
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.genes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn default_space_domains() {
        let s = SearchSpace::default_space(1).unwrap();
        assert_eq!(s.domain_sizes(), vec![7, 3, 8, 5, 7]);
        assert_eq!(s.components()[0].name(), "att_1");
        assert_eq!(s.components()[4].values()[6], "512");
        let s2 = SearchSpace::default_space(2).unwrap();
        assert_eq!(s2.positions(), 10);
        assert_eq!(s2.components()[5].name(), "att_2");
    }

    #[test]
    fn zero_layers_rejected() {
        assert!(matches!(
            SearchSpace::default_space(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sizes() {
        assert_eq!(
            SearchSpace::default_space(1).unwrap().size(),
            BigUint::from(5_880u32)
        );
        assert_eq!(
            SearchSpace::default_space(2).unwrap().size(),
            BigUint::from(34_574_400u64)
        );
        let ones: Vec<_> = (0..5)
            .map(|i| ComponentSpec::new(format!("c{i}"), labels(&["only"])).unwrap())
            .collect();
        assert_eq!(
            SearchSpace::new(1, ones).unwrap().size(),
            BigUint::from(1u32)
        );
        // 5880^20 overflows u64 but not BigUint
        let deep = SearchSpace::default_space(20).unwrap();
        assert_eq!(deep.size_u64(), None);
        assert_eq!(deep.size(), BigUint::from(5_880u32).pow(20));
    }

    #[test]
    fn component_validation() {
        assert!(ComponentSpec::new("x", vec![]).is_err());
        assert!(ComponentSpec::new("x", labels(&["a", "a"])).is_err());
        assert!(ComponentSpec::new("x", labels(&["a,b"])).is_err());
        let s = SearchSpace::default_space(1).unwrap();
        assert!(SearchSpace::new(2, s.components().to_vec()).is_err());
    }

    #[test]
    fn encode_known_architecture() {
        let s = SearchSpace::default_space(2).unwrap();
        // gat,sum,tanh,4,64 ; gcn,mean,elu,2,16
        let arch = Architecture::new(vec![0, 2, 0, 2, 3, 1, 0, 7, 1, 1]);
        let text = s.encode(&arch);
        assert_eq!(text, "gat,sum,tanh,4,64;gcn,mean,elu,2,16");
        assert_eq!(s.decode(&text).unwrap(), arch);
    }

    #[test]
    fn decode_errors_name_position() {
        let s = SearchSpace::default_space(2).unwrap();
        match s.decode("gat,sum,tanh,4;gcn,mean,elu,2,16") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, "layer 1"),
            other => panic!("unexpected {other:?}"),
        }
        match s.decode("gat,sum,tanh,4,64;gcn,median,elu,2,16") {
            Err(Error::Parse { position, message }) => {
                assert!(position.starts_with("layer 2 field 2"), "{position}");
                assert!(message.contains("median"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.decode("gat,sum,tanh,4,64").is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let s = SearchSpace::default_space(1).unwrap();
        let all: Vec<_> = s.enumerate(DEFAULT_ENUMERATION_CAP).unwrap().collect();
        assert_eq!(all.len(), 5_880);
        assert!(all[0].genes().iter().all(|&g| g == 0));
        assert_eq!(all[1].genes(), &[0, 0, 0, 0, 1]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all.last().unwrap().genes(), &[6, 2, 7, 4, 6]);
    }

    #[test]
    fn enumeration_refuses_large_space() {
        let s = SearchSpace::default_space(2).unwrap();
        match s.enumerate(DEFAULT_ENUMERATION_CAP) {
            Err(e @ Error::SpaceTooLarge { .. }) => assert!(e.to_string().contains("34574400")),
            Err(e) => panic!("unexpected {e}"),
            Ok(_) => panic!("enumeration should be refused"),
        }
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let s = SearchSpace::default_space(2).unwrap();
        let mut a = Stream::new(11);
        let mut b = Stream::new(11);
        for _ in 0..100 {
            let x = s.sample_uniform(&mut a);
            assert!(s.contains(&x));
            assert_eq!(x, s.sample_uniform(&mut b));
        }
    }
}
