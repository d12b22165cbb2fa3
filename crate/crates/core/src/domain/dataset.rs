use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense label id in `0..alphabet_size`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl Label {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        Label(u32::try_from(i).expect("label index fits in u32"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An instance is either an opaque key or a numeric feature vector.
///
/// Equality, hashing and ordering on points use the bit patterns of the
/// coordinates; non-finite coordinates are rejected on ingestion.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instance {
    Key(String),
    Point(Vec<f64>),
}

impl Instance {
    pub fn key(k: impl Into<String>) -> Self {
        Instance::Key(k.into())
    }

    pub fn features(&self) -> Option<&[f64]> {
        match self {
            Instance::Point(v) => Some(v),
            Instance::Key(_) => None,
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Key(k) => write!(f, "{k}"),
            Instance::Point(v) => write!(f, "{v:?}"),
        }
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Instance {}

impl Hash for Instance {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Instance::Key(k) => {
                0u8.hash(state);
                k.hash(state);
            }
            Instance::Point(v) => {
                1u8.hash(state);
                v.len().hash(state);
                for x in v {
                    x.to_bits().hash(state);
                }
            }
        }
    }
}

impl PartialOrd for Instance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Instance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Instance::Key(a), Instance::Key(b)) => a.cmp(b),
            (Instance::Key(_), Instance::Point(_)) => Ordering::Less,
            (Instance::Point(_), Instance::Key(_)) => Ordering::Greater,
            (Instance::Point(a), Instance::Point(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledExample {
    pub instance: Instance,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(instance: Instance, label: Label) -> Self {
        LabeledExample { instance, label }
    }
}

/// Ordered label alphabet; dense id `i` stands for external value `external[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    external: Vec<i64>,
}

impl Alphabet {
    pub fn dense(size: usize) -> Self {
        Alphabet {
            external: (0..size as i64).collect(),
        }
    }

    pub fn from_external(values: impl IntoIterator<Item = i64>) -> Result<Self> {
        let set: BTreeSet<i64> = values.into_iter().collect();
        Ok(Alphabet {
            external: set.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn external(&self, label: Label) -> i64 {
        self.external[label.index()]
    }

    pub fn dense_of(&self, value: i64) -> Option<Label> {
        self.external.binary_search(&value).ok().map(Label::from_index)
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.len()).map(Label::from_index)
    }
}

/// Training sample `S` with a finite label alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    alphabet: Alphabet,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>, alphabet_size: usize) -> Result<Self> {
        Self::with_alphabet(examples, Alphabet::dense(alphabet_size))
    }

    pub fn with_alphabet(examples: Vec<LabeledExample>, alphabet: Alphabet) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::InvalidDataset("dataset must hold at least one example".into()));
        }
        if alphabet.len() < 2 {
            return Err(Error::InvalidDataset("alphabet needs at least two labels".into()));
        }
        for ex in &examples {
            if ex.label.index() >= alphabet.len() {
                return Err(Error::LabelOutOfRange(ex.label));
            }
            if let Instance::Point(v) = &ex.instance {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidDataset(format!("non-finite feature in {:?}", v)));
                }
            }
        }
        Ok(Dataset { examples, alphabet })
    }

    /// Builds a dataset from external integer labels, remapping them densely.
    /// Without an override the alphabet is the sorted set of observed labels.
    pub fn from_external(records: Vec<(Instance, i64)>, alphabet_override: Option<Vec<i64>>) -> Result<Self> {
        let alphabet = match alphabet_override {
            Some(values) => Alphabet::from_external(values)?,
            None => Alphabet::from_external(records.iter().map(|(_, y)| *y))?,
        };
        let mut examples = Vec::with_capacity(records.len());
        for (x, y) in records {
            let label = alphabet
                .dense_of(y)
                .ok_or_else(|| Error::InvalidDataset(format!("label {y} not in alphabet")))?;
            examples.push(LabeledExample::new(x, label));
        }
        Self::with_alphabet(examples, alphabet)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn example(&self, i: usize) -> &LabeledExample {
        &self.examples[i]
    }

    pub fn instance(&self, i: usize) -> &Instance {
        &self.examples[i].instance
    }

    pub fn label(&self, i: usize) -> Label {
        self.examples[i].label
    }

    pub fn gather(&self, indices: &[usize]) -> Vec<LabeledExample> {
        indices.iter().map(|&i| self.examples[i].clone()).collect()
    }

    /// Sub-dataset over the given indices, keeping the alphabet.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::with_alphabet(self.gather(indices), self.alphabet.clone())
    }

    /// Same examples with `extra` never-used labels appended to the alphabet.
    pub fn with_extra_labels(&self, extra: usize) -> Self {
        let mut external = self.alphabet.external.clone();
        let next = external.last().copied().unwrap_or(-1) + 1;
        external.extend(next..next + extra as i64);
        Dataset {
            examples: self.examples.clone(),
            alphabet: Alphabet { external },
        }
    }

    /// Same instances with labels replaced; the new alphabet is dense `0..size`.
    pub fn relabeled(&self, labels: &[Label], size: usize) -> Result<Self> {
        let examples = self
            .examples
            .iter()
            .zip(labels)
            .map(|(ex, &l)| LabeledExample::new(ex.instance.clone(), l))
            .collect();
        Self::new(examples, size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn external_labels_are_remapped_densely() {
        let ds = Dataset::from_external(
            vec![
                (Instance::key("a"), 7),
                (Instance::key("b"), -3),
                (Instance::key("c"), 7),
            ],
            None,
        )
        .unwrap();
        assert_eq!(ds.alphabet_size(), 2);
        assert_eq!(ds.label(0), Label(1));
        assert_eq!(ds.label(1), Label(0));
        assert_eq!(ds.alphabet().external(Label(1)), 7);
    }

    #[test]
    fn override_can_widen_alphabet() {
        let ds = Dataset::from_external(
            vec![(Instance::key("a"), 1), (Instance::key("b"), 1)],
            Some(vec![1, 2, 3]),
        )
        .unwrap();
        assert_eq!(ds.alphabet_size(), 3);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(Dataset::new(vec![], 3).is_err());
        let one = vec![LabeledExample::new(Instance::key("a"), Label(0))];
        assert!(Dataset::new(one.clone(), 1).is_err());
        let bad = vec![LabeledExample::new(Instance::key("a"), Label(5))];
        assert_eq!(Dataset::new(bad, 3), Err(Error::LabelOutOfRange(Label(5))));
        let nan = vec![LabeledExample::new(Instance::Point(vec![f64::NAN]), Label(0))];
        assert!(Dataset::new(nan, 2).is_err());
        assert!(Dataset::new(one, 2).is_ok());
    }

    #[test]
    fn extra_labels_extend_alphabet_only() {
        let ds = Dataset::from_external(vec![(Instance::key("a"), 4), (Instance::key("b"), 9)], None).unwrap();
        let wide = ds.with_extra_labels(2);
        assert_eq!(wide.alphabet_size(), 4);
        assert_eq!(wide.examples(), ds.examples());
        assert_eq!(wide.alphabet().external(Label(3)), 11);
    }

    #[test]
    fn point_instances_hash_by_bits() {
        use std::collections::HashSet;
        let mut set = HashSet::new();
        set.insert(Instance::Point(vec![0.5, 1.0]));
        assert!(set.contains(&Instance::Point(vec![0.5, 1.0])));
        assert!(!set.contains(&Instance::Point(vec![0.5])));
        assert!(Instance::key("z") < Instance::Point(vec![-1.0]));
    }
}
