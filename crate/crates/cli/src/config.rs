//! Experiment configuration: JSON schema, flag overrides and validation.

use std::path::PathBuf;

use localtest_core::io::{parse_family_json, LoadedFamily};
use localtest_core::{Algo, LocalProperty};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::generators::GeneratorSpec;

/// Which property to test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PropertySpec {
    Monotone,
    Lipschitz { c: i64 },
    Convex1d,
    SeparatelyConvex,
    Submodular,
    /// An inline integer family; `d` comes from the experiment.
    Explicit { k: usize, alphabet: Vec<i64>, forbidden: Vec<Vec<i64>> },
    /// A family JSON file (integer or token alphabet).
    FamilyFile { path: PathBuf },
}

impl PropertySpec {
    /// Parse the compact flag form: `monotone`, `lipschitz:2`, `convex_1d`,
    /// `separately_convex`, `submodular` or `family:<path>`.
    pub fn parse_flag(text: &str) -> Result<Self, HarnessError> {
        let (head, arg) = text.split_once(':').map_or((text, None), |(h, a)| (h, Some(a)));
        match (head, arg) {
            ("monotone", None) => Ok(PropertySpec::Monotone),
            ("lipschitz", a) => {
                let c = a.unwrap_or("1").parse().map_err(|_| HarnessError::Config(format!("bad Lipschitz constant in {text:?}")))?;
                Ok(PropertySpec::Lipschitz { c })
            }
            ("convex_1d", None) => Ok(PropertySpec::Convex1d),
            ("separately_convex", None) => Ok(PropertySpec::SeparatelyConvex),
            ("submodular", None) => Ok(PropertySpec::Submodular),
            ("family", Some(p)) => Ok(PropertySpec::FamilyFile { path: p.into() }),
            _ => Err(HarnessError::Config(format!("unknown property {text:?}"))),
        }
    }

    /// Locality of the property.
    pub fn k(&self) -> Result<usize, HarnessError> {
        Ok(match self {
            PropertySpec::Monotone | PropertySpec::Lipschitz { .. } | PropertySpec::Submodular => 2,
            PropertySpec::Convex1d | PropertySpec::SeparatelyConvex => 3,
            PropertySpec::Explicit { k, .. } => *k,
            PropertySpec::FamilyFile { .. } => match self.load_family()? {
                LoadedFamily::Int(p) => p.k(),
                LoadedFamily::Tokens { property, .. } => property.k(),
            },
        })
    }

    pub fn load_family(&self) -> Result<LoadedFamily, HarnessError> {
        let PropertySpec::FamilyFile { path } = self else {
            return Err(HarnessError::Config("not a family file".into()));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_family_json(&text).map_err(HarnessError::from_core)
    }

    /// The integer-alphabet property for dimension `d`.
    pub fn build_int(&self, d: usize) -> Result<LocalProperty<i64>, HarnessError> {
        let p = match self {
            PropertySpec::Monotone => LocalProperty::monotone(d),
            PropertySpec::Lipschitz { c } => LocalProperty::lipschitz(*c, d).map_err(HarnessError::from_core)?,
            PropertySpec::Convex1d if d == 1 => LocalProperty::convex_1d(),
            PropertySpec::Convex1d => return Err(HarnessError::Config("convex_1d needs d = 1".into())),
            PropertySpec::SeparatelyConvex => LocalProperty::separately_convex(d),
            PropertySpec::Submodular if d >= 2 => LocalProperty::submodular(d),
            PropertySpec::Submodular => return Err(HarnessError::Config("submodular needs d >= 2".into())),
            PropertySpec::Explicit { k, alphabet, forbidden } => {
                let family = localtest_core::ExplicitFamily::new(*k, d, forbidden.clone()).map_err(HarnessError::from_core)?;
                LocalProperty::from_explicit(family, alphabet.clone()).map_err(HarnessError::from_core)?
            }
            PropertySpec::FamilyFile { .. } => match self.load_family()? {
                LoadedFamily::Int(p) => p,
                LoadedFamily::Tokens { .. } => {
                    return Err(HarnessError::Config("token families need a token array file as input".into()))
                }
            },
        };
        if p.d() != d {
            return Err(HarnessError::Config(format!("property has d={} but the experiment has d={d}", p.d())));
        }
        Ok(p)
    }
}

/// The array widths to run: one value, a list, or a geometric range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    One(usize),
    List(Vec<usize>),
    Range {
        from: usize,
        to: usize,
        #[serde(default = "two")]
        factor: usize,
    },
}

fn two() -> usize {
    2
}

impl NSpec {
    pub fn values(&self) -> Result<Vec<usize>, HarnessError> {
        let v = match self {
            NSpec::One(n) => vec![*n],
            NSpec::List(v) => v.clone(),
            NSpec::Range { from, to, factor } => {
                if *factor < 2 || *from == 0 || from > to {
                    return Err(HarnessError::Config(format!("bad n range {from}..{to} x{factor}")));
                }
                std::iter::successors(Some(*from), |&n| n.checked_mul(*factor)).take_while(|n| n <= to).collect()
            }
        };
        if v.is_empty() {
            return Err(HarnessError::Config("no n values".into()));
        }
        Ok(v)
    }
}

/// Where the input arrays come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    File { file: PathBuf },
    Generator(GeneratorSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub property: PropertySpec,
    pub algo: Algo,
    pub n: NSpec,
    #[serde(default = "one")]
    pub d: usize,
    /// Defaults to the property's locality; must match it when given.
    #[serde(default)]
    pub k: Option<usize>,
    pub epsilon: f64,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub input: InputSpec,
    /// Draw a new input for every trial instead of one per `n`.
    #[serde(default)]
    pub fresh_input: bool,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Record wall-clock times; off by default so reports are reproducible.
    #[serde(default)]
    pub timing: bool,
    /// Worker threads; `LOCALTEST_THREADS` caps it.
    #[serde(default)]
    pub threads: Option<usize>,
    /// CSV path; the JSON summary goes next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn default_budget() -> u64 {
    localtest_core::inference::DEFAULT_BUDGET
}

/// Command-line values that replace config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub property: Option<String>,
    pub algo: Option<Algo>,
    pub n: Option<Vec<usize>>,
    pub d: Option<usize>,
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    pub input_file: Option<PathBuf>,
    pub fresh_input: bool,
    pub budget: Option<u64>,
    pub timing: bool,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Build a config from flags alone; every required field must be given.
    pub fn from_overrides(o: &Overrides) -> Result<Self, HarnessError> {
        let need = |what: &str| HarnessError::Config(format!("missing --{what} (or use --config)"));
        let mut cfg = ExperimentConfig {
            property: PropertySpec::parse_flag(o.property.as_deref().ok_or_else(|| need("property"))?)?,
            algo: o.algo.ok_or_else(|| need("algo"))?,
            n: NSpec::List(o.n.clone().ok_or_else(|| need("n"))?),
            d: 1,
            k: None,
            epsilon: o.epsilon.ok_or_else(|| need("epsilon"))?,
            trials: o.trials.ok_or_else(|| need("trials"))?,
            seed: 0,
            input: InputSpec::Generator(GeneratorSpec::Constant { value: 0 }),
            fresh_input: false,
            budget: default_budget(),
            timing: false,
            threads: None,
            output: None,
        };
        if o.generator.is_none() && o.input_file.is_none() {
            return Err(need("generator"));
        }
        cfg.apply(o)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), HarnessError> {
        if let Some(p) = &o.property {
            self.property = PropertySpec::parse_flag(p)?;
        }
        if let Some(a) = o.algo {
            self.algo = a;
        }
        if let Some(n) = &o.n {
            self.n = NSpec::List(n.clone());
        }
        self.d = o.d.unwrap_or(self.d);
        self.k = o.k.or(self.k);
        self.epsilon = o.epsilon.unwrap_or(self.epsilon);
        self.trials = o.trials.unwrap_or(self.trials);
        self.seed = o.seed.unwrap_or(self.seed);
        if let Some(g) = &o.generator {
            self.input = InputSpec::Generator(GeneratorSpec::parse_flag(g)?);
        }
        if let Some(f) = &o.input_file {
            self.input = InputSpec::File { file: f.clone() };
        }
        self.fresh_input |= o.fresh_input;
        self.budget = o.budget.unwrap_or(self.budget);
        self.timing |= o.timing;
        self.threads = o.threads.or(self.threads);
        self.output = o.output.clone().or(self.output.take());
        Ok(())
    }

    /// Check every field; returns the locality to use.
    pub fn validate(&self) -> Result<usize, HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        let k = self.property.k()?;
        if let Some(given) = self.k {
            if given != k {
                return bad(format!("k={given} but the property has locality {k}"));
            }
        }
        let ns = self.n.values()?;
        for &n in &ns {
            if n < k {
                return bad(format!("n={n} is smaller than k={k}"));
            }
            if localtest_core::Shape::new(n, self.d).is_err() || n.checked_pow(self.d as u32).is_none_or(|c| c > 1 << 32) {
                return bad(format!("n={n}, d={} is too large", self.d));
            }
        }
        match &self.input {
            InputSpec::File { file } => {
                if ns.len() != 1 {
                    return bad("a file input needs exactly one n".into());
                }
                if !file.exists() {
                    return bad(format!("input file {} does not exist", file.display()));
                }
            }
            InputSpec::Generator(g) => g.validate(&self.property, self.d)?,
        }
        if !matches!(self.property, PropertySpec::FamilyFile { .. }) || matches!(self.input, InputSpec::Generator(_)) {
            self.property.build_int(self.d)?;
        }
        Ok(k)
    }
}
