use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    sample_iid, Alphabet, Dataset, ExampleDistribution, Instance, Label, LabeledExample, RandomStream,
};
use crate::error::{Error, Result};
use crate::oig::FiniteClass;

/// A random finite class over a finite universe, with one member planted as
/// the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedParams {
    pub m: usize,
    pub labels: usize,
    /// Instances in the universe.
    pub universe: usize,
    pub class_size: usize,
    /// Dimension of numeric instances; keys `u0, u1, …` when absent.
    pub features: Option<usize>,
    /// Size of an extra sample drawn from the same distribution.
    pub heldout: usize,
    /// Coordinates changed when deriving a member from the base function.
    pub mutations: usize,
    /// Uniform weights over the universe when false.
    pub skewed: bool,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            m: 100,
            labels: 4,
            universe: 30,
            class_size: 32,
            features: None,
            heldout: 0,
            mutations: 2,
            skewed: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenSpec {
    Planted(PlantedParams),
    /// The three-point sample `(a,1), (b,2), (c,3)` with multiplicities.
    Counterexample {
        #[serde(default = "ones")]
        multiplicities: [usize; 3],
    },
    /// A planted sample with labels changed at the given rate.
    Noisy {
        #[serde(flatten)]
        planted: PlantedParams,
        rate: f64,
    },
}

fn ones() -> [usize; 3] {
    [1, 1, 1]
}

/// Generated data and, for planted kinds, the ground truth.
#[derive(Clone, Debug)]
pub struct Generated {
    pub train: Dataset,
    pub heldout: Option<Dataset>,
    pub class: Option<FiniteClass>,
    pub target_row: Option<usize>,
    /// Sampling weights of the class columns.
    pub universe_weights: Option<Vec<f64>>,
}

impl Generated {
    /// `Pr_{x∼D}[pred(x) ≠ h*(x)]`, exactly.
    pub fn true_error(&self, pred: &dyn Fn(&Instance) -> Label) -> Option<f64> {
        let (class, row, w) = (self.class.as_ref()?, self.target_row?, self.universe_weights.as_ref()?);
        Some(
            class
                .columns()
                .iter()
                .enumerate()
                .filter(|(c, x)| pred(x) != class.value(row, *c))
                .fold(0.0, |acc, (c, _)| acc + w[c]),
        )
    }

    /// `Pr_{x∼D}[h*(x) ∉ μ(x)]`, exactly.
    pub fn true_list_error(&self, list: &dyn Fn(&Instance) -> Vec<Label>) -> Option<f64> {
        let (class, row, w) = (self.class.as_ref()?, self.target_row?, self.universe_weights.as_ref()?);
        Some(
            class
                .columns()
                .iter()
                .enumerate()
                .filter(|(c, x)| !list(x).contains(&class.value(row, *c)))
                .fold(0.0, |acc, (c, _)| acc + w[c]),
        )
    }

    /// The planted target as a classifier.
    pub fn target(&self) -> Option<crate::weak_learn::MemberClassifier> {
        let class = std::sync::Arc::new(self.class.clone()?);
        crate::weak_learn::Erm::new(class).ok()?.member(self.target_row?)
    }
}

fn universe(p: &PlantedParams, rng: &mut RandomStream) -> Vec<Instance> {
    match p.features {
        None => (0..p.universe).map(|i| Instance::key(format!("u{i}"))).collect(),
        Some(dim) => (0..p.universe)
            .map(|_| Instance::Point((0..dim).map(|_| (rng.gen::<f64>() * 1000.0).round() / 1000.0).collect()))
            .collect(),
    }
}

fn planted(p: &PlantedParams, rng: &RandomStream) -> Result<Generated> {
    if p.m == 0 || p.labels < 2 || p.universe == 0 || p.class_size == 0 {
        return Err(Error::InvalidParams(
            "planted data needs m, universe, class size ≥ 1 and ≥ 2 labels".into(),
        ));
    }
    let mut r = rng.child("class");
    let mut columns = universe(p, &mut r);
    columns.sort();
    columns.dedup();
    let n = columns.len();
    let base: Vec<Label> = (0..n).map(|_| Label::from_index(r.gen_range(0..p.labels))).collect();
    let mut rows = vec![base.clone()];
    let mut attempts = 0;
    while rows.len() < p.class_size && attempts < 50 * p.class_size {
        attempts += 1;
        let mut row = base.clone();
        for _ in 0..p.mutations.max(1) {
            let c = r.gen_range(0..n);
            row[c] = Label::from_index(r.gen_range(0..p.labels));
        }
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    let class = FiniteClass::new(columns, rows, p.labels)?;
    let target_row = r.gen_range(0..class.len());
    let raw: Vec<f64> = if p.skewed {
        (0..n).map(|_| r.gen_range(0.1..1.0)).collect()
    } else {
        vec![1.0; n]
    };
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let dist = ExampleDistribution::<f64>::normalize(&weights)?;
    let draw = |count: usize, tag: &str| -> Result<Dataset> {
        let idx = sample_iid(&dist, count, &mut rng.child(tag))?;
        let ex = idx
            .into_iter()
            .map(|c| LabeledExample::new(class.columns()[c].clone(), class.value(target_row, c)))
            .collect();
        Dataset::new(ex, p.labels)
    };
    let train = draw(p.m, "train")?;
    let heldout = if p.heldout > 0 {
        Some(draw(p.heldout, "heldout")?)
    } else {
        None
    };
    Ok(Generated {
        train,
        heldout,
        class: Some(class),
        target_row: Some(target_row),
        universe_weights: Some(weights),
    })
}

/// The three-point counterexample sample over keys `a, b, c` with external
/// labels 1, 2, 3.
pub fn counterexample(multiplicities: [usize; 3]) -> Result<Dataset> {
    let mut records = Vec::new();
    for ((k, y), &n) in [("a", 1i64), ("b", 2), ("c", 3)].iter().zip(&multiplicities) {
        for _ in 0..n {
            records.push((Instance::key(*k), *y));
        }
    }
    Dataset::from_external(records, Some(vec![1, 2, 3]))
}

fn add_noise(ds: &Dataset, rate: f64, rng: &mut RandomStream) -> Result<Dataset> {
    let k = ds.alphabet_size();
    let labels: Vec<Label> = ds
        .examples()
        .iter()
        .map(|e| {
            if rng.gen::<f64>() < rate {
                let others: Vec<Label> = (0..k).map(Label::from_index).filter(|&l| l != e.label).collect();
                *others.choose(rng).expect("at least two labels")
            } else {
                e.label
            }
        })
        .collect();
    let ex = ds
        .examples()
        .iter()
        .zip(labels)
        .map(|(e, l)| LabeledExample::new(e.instance.clone(), l))
        .collect();
    Dataset::with_alphabet(ex, ds.alphabet().clone())
}

/// Generates data from `spec`; planted kinds draw from stream children
/// `class`, `train` and `heldout`, noise from `noise`.
pub fn gen_data(spec: &GenSpec, rng: &RandomStream) -> Result<Generated> {
    match spec {
        GenSpec::Planted(p) => planted(p, rng),
        GenSpec::Counterexample { multiplicities } => {
            if multiplicities.iter().all(|&n| n == 0) {
                return Err(Error::InvalidParams("all multiplicities are zero".into()));
            }
            Ok(Generated {
                train: counterexample(*multiplicities)?,
                heldout: None,
                class: None,
                target_row: None,
                universe_weights: None,
            })
        }
        GenSpec::Noisy { planted: p, rate } => {
            if !(0.0..=1.0).contains(rate) {
                return Err(Error::InvalidParams(format!(
                    "noise rate must lie in [0, 1], got {rate}"
                )));
            }
            let mut g = planted(p, rng)?;
            let mut noise = rng.child("noise");
            g.train = add_noise(&g.train, *rate, &mut noise)?;
            if let Some(h) = &g.heldout {
                g.heldout = Some(add_noise(h, *rate, &mut noise)?);
            }
            Ok(g)
        }
    }
}

/// The alphabet the counterexample uses.
pub fn counterexample_alphabet() -> Alphabet {
    Alphabet::from_external([1, 2, 3]).expect("static alphabet")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weak_learn::Classifier;

    #[test]
    fn counterexample_once() {
        let ds = counterexample([1, 1, 1]).unwrap();
        let pairs: Vec<(String, i64)> = ds
            .examples()
            .iter()
            .map(|e| (e.instance.to_string(), ds.alphabet().external(e.label)))
            .collect();
        assert_eq!(pairs, vec![("a".into(), 1), ("b".into(), 2), ("c".into(), 3)]);
    }

    #[test]
    fn planted_is_realizable() {
        let spec = GenSpec::Planted(PlantedParams {
            m: 100,
            labels: 8,
            ..Default::default()
        });
        let g = gen_data(&spec, &RandomStream::new(5)).unwrap();
        let class = g.class.as_ref().unwrap();
        let rows = class.consistent_rows(&g.train).unwrap();
        assert!(rows.contains(&g.target_row.unwrap()));
        let target = g.target().unwrap();
        assert_eq!(g.true_error(&|x| target.predict(x)), Some(0.0));
    }

    #[test]
    fn zero_noise_changes_nothing() {
        let p = PlantedParams::default();
        let a = gen_data(&GenSpec::Planted(p.clone()), &RandomStream::new(9)).unwrap();
        let b = gen_data(&GenSpec::Noisy { planted: p, rate: 0.0 }, &RandomStream::new(9)).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.class, b.class);
    }

    #[test]
    fn numeric_universe() {
        let spec = GenSpec::Planted(PlantedParams {
            features: Some(2),
            ..Default::default()
        });
        let g = gen_data(&spec, &RandomStream::new(1)).unwrap();
        assert!(g.train.examples().iter().all(|e| e.instance.features().is_some()));
    }
}
