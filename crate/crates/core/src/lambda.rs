//! Ordered-median weight vectors and their block decomposition.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The weight families used in experiments, plus arbitrary weights.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    Median,
    Center,
    /// `k` trailing ones; `None` means `⌈0.2 n⌉`.
    KCentrum(Option<usize>),
    /// Zeros in the first `k1` and last `k2` positions.
    Trimmed(Option<(usize, usize)>),
    /// Ones in the first `k1` and last `k2` positions.
    AntiTrimmed(Option<(usize, usize)>),
    /// Alternating zero/one runs with the given lengths, starting with zeros.
    Blocks(Option<Vec<usize>>),
    Custom(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LambdaKind {
    Median,
    AntiTrimmed,
    Trimmed,
    Center,
    KCentrum,
    Blocks,
    Custom,
}

impl fmt::Display for LambdaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LambdaKind::Median => "median",
            LambdaKind::AntiTrimmed => "antitrimmed",
            LambdaKind::Trimmed => "trimmed",
            LambdaKind::Center => "center",
            LambdaKind::KCentrum => "kcentrum",
            LambdaKind::Blocks => "blocks",
            LambdaKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaVector {
    pub values: Vec<f64>,
    pub kind: LambdaKind,
}

impl LambdaVector {
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Lambda("weights must be finite and nonnegative".into()));
        }
        Ok(LambdaVector {
            values,
            kind: LambdaKind::Custom,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `⌈0.2 n⌉`, the default trimming parameter.
pub fn default_trim(n: usize) -> usize {
    (n * 2).div_ceil(10)
}

/// Six near-equal runs covering `n`, the longer runs first.
pub fn default_block_pattern(n: usize) -> Vec<usize> {
    (0..6).map(|r| n / 6 + usize::from(r < n % 6)).collect()
}

impl LambdaSpec {
    pub fn kind(&self) -> LambdaKind {
        match self {
            LambdaSpec::Median => LambdaKind::Median,
            LambdaSpec::Center => LambdaKind::Center,
            LambdaSpec::KCentrum(_) => LambdaKind::KCentrum,
            LambdaSpec::Trimmed(_) => LambdaKind::Trimmed,
            LambdaSpec::AntiTrimmed(_) => LambdaKind::AntiTrimmed,
            LambdaSpec::Blocks(_) => LambdaKind::Blocks,
            LambdaSpec::Custom(_) => LambdaKind::Custom,
        }
    }

    /// Builds the length-`n` vector.
    pub fn instantiate(&self, n: usize) -> Result<LambdaVector> {
        if n == 0 {
            return Err(Error::Lambda("n must be positive".into()));
        }
        let check = |k: usize| -> Result<usize> {
            if k > n {
                Err(Error::Lambda(format!("parameter {k} outside [0, {n}]")))
            } else {
                Ok(k)
            }
        };
        let values = match self {
            LambdaSpec::Median => vec![1.0; n],
            LambdaSpec::Center => {
                let mut v = vec![0.0; n];
                v[n - 1] = 1.0;
                v
            }
            LambdaSpec::KCentrum(k) => {
                let k = check(k.unwrap_or_else(|| default_trim(n)))?;
                (0..n).map(|i| if i >= n - k { 1.0 } else { 0.0 }).collect()
            }
            LambdaSpec::Trimmed(ks) | LambdaSpec::AntiTrimmed(ks) => {
                let (k1, k2) = ks.unwrap_or_else(|| (default_trim(n), default_trim(n)));
                check(k1)?;
                check(k2)?;
                if k1 + k2 > n {
                    return Err(Error::Lambda(format!("k1 + k2 = {} exceeds n = {n}", k1 + k2)));
                }
                let outer = matches!(self, LambdaSpec::AntiTrimmed(_));
                (0..n)
                    .map(|i| {
                        let edge = i < k1 || i >= n - k2;
                        if edge == outer {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            LambdaSpec::Blocks(pattern) => {
                let pattern = pattern.clone().unwrap_or_else(|| default_block_pattern(n));
                if pattern.iter().sum::<usize>() != n {
                    return Err(Error::Lambda(format!(
                        "block lengths sum to {}, expected {n}",
                        pattern.iter().sum::<usize>()
                    )));
                }
                pattern
                    .iter()
                    .enumerate()
                    .flat_map(|(r, &len)| std::iter::repeat_n(if r % 2 == 0 { 0.0 } else { 1.0 }, len))
                    .collect()
            }
            LambdaSpec::Custom(v) => {
                if v.len() != n {
                    return Err(Error::Lambda(format!("custom vector has {} entries, expected {n}", v.len())));
                }
                return LambdaVector::custom(v.clone());
            }
        };
        Ok(LambdaVector {
            values,
            kind: self.kind(),
        })
    }
}

/// `make_lambda(kind, n, param)`; see [`LambdaSpec`].
pub fn make_lambda(spec: &LambdaSpec, n: usize) -> Result<LambdaVector> {
    spec.instantiate(n)
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::Lambda(format!("cannot parse `{t}`")))
        })
        .collect()
}

impl FromStr for LambdaSpec {
    type Err = Error;

    /// `median | center | kcentrum[:k] | trimmed[:k1,k2] | anti[:k1,k2] |
    /// blocks[:a,b,...] | custom:v1,...,vn`
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let pair = |arg: &str| -> Result<(usize, usize)> {
            match parse_list::<usize>(arg)?.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err(Error::Lambda(format!("expected `k1,k2`, got `{arg}`"))),
            }
        };
        match (name, arg) {
            ("median", None) => Ok(LambdaSpec::Median),
            ("center", None) => Ok(LambdaSpec::Center),
            ("kcentrum", a) => Ok(LambdaSpec::KCentrum(
                a.map(|a| a.parse().map_err(|_| Error::Lambda(format!("bad k `{a}`"))))
                    .transpose()?,
            )),
            ("trimmed", a) => Ok(LambdaSpec::Trimmed(a.map(pair).transpose()?)),
            ("anti" | "antitrimmed", a) => Ok(LambdaSpec::AntiTrimmed(a.map(pair).transpose()?)),
            ("blocks", a) => Ok(LambdaSpec::Blocks(a.map(parse_list::<usize>).transpose()?)),
            ("custom", Some(a)) => Ok(LambdaSpec::Custom(parse_list::<f64>(a)?)),
            _ => Err(Error::Lambda(format!("unrecognized lambda spec `{s}`"))),
        }
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            LambdaSpec::Median => write!(f, "median"),
            LambdaSpec::Center => write!(f, "center"),
            LambdaSpec::KCentrum(None) => write!(f, "kcentrum"),
            LambdaSpec::KCentrum(Some(k)) => write!(f, "kcentrum:{k}"),
            LambdaSpec::Trimmed(None) => write!(f, "trimmed"),
            LambdaSpec::Trimmed(Some((a, b))) => write!(f, "trimmed:{a},{b}"),
            LambdaSpec::AntiTrimmed(None) => write!(f, "anti"),
            LambdaSpec::AntiTrimmed(Some((a, b))) => write!(f, "anti:{a},{b}"),
            LambdaSpec::Blocks(None) => write!(f, "blocks"),
            LambdaSpec::Blocks(Some(v)) => write!(f, "blocks:{}", list(v)),
            LambdaSpec::Custom(v) => write!(
                f,
                "custom:{}",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// Run structure of `λ̃ = (λ_{p+1}, ..., λ_n)`.
///
/// Block `i` (1-based) is preceded by `alpha[i-1]` zeros and consists of
/// `beta[i-1]` copies of `gamma[i-1] > 0`; `alpha[I]` counts trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub p: usize,
    pub lambda_tilde: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    /// `alpha_bar[i] = α_1 + ... + α_i` for `i = 0..=I+1`.
    pub alpha_bar: Vec<usize>,
    /// `beta_bar[i] = β_1 + ... + β_i` for `i = 0..=I`.
    pub beta_bar: Vec<usize>,
}

impl BlockDecomposition {
    /// Number of nonzero blocks `I`.
    pub fn blocks(&self) -> usize {
        self.beta.len()
    }

    /// True when `λ̃` is identically zero and the ordered part vanishes.
    pub fn ordered_part_vanishes(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.gamma[i - 1]
    }

    /// `α_i` for `i = 0..=I+1` (`α_0 = 0`).
    pub fn alpha(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.alpha[i - 1]
        }
    }

    /// `β_i` for `i = 0..=I+1` (`β_0 = β_{I+1} = 0`).
    pub fn beta(&self, i: usize) -> usize {
        if i == 0 || i > self.beta.len() {
            0
        } else {
            self.beta[i - 1]
        }
    }

    pub fn alpha_bar(&self, i: usize) -> usize {
        self.alpha_bar[i]
    }

    pub fn beta_bar(&self, i: usize) -> usize {
        self.beta_bar[i.min(self.beta.len())]
    }

    /// Sorted position (1-based, counting the `p` hub slots) of the first
    /// element of block `i`: `p + ᾱ_i + β̄_{i-1} + 1`.
    pub fn first_position(&self, i: usize) -> usize {
        self.p + self.alpha_bar(i) + self.beta_bar(i - 1) + 1
    }

    /// Sorted position of the last element of block `i`: `p + ᾱ_i + β̄_i`.
    pub fn last_position(&self, i: usize) -> usize {
        self.p + self.alpha_bar(i) + self.beta_bar(i)
    }

    /// Where offset `k` (1-based, relative to the `p` hub slots) falls:
    /// in the zero run before block `i` or on the first element of block
    /// `i` gives `Run(i)`; strictly inside block `i` gives `Block(i)`;
    /// trailing zeros give `None`.
    pub fn locate(&self, k: usize) -> Option<Slot> {
        (1..=self.blocks()).find_map(|i| {
            let before = self.alpha_bar(i - 1) + self.beta_bar(i - 1);
            let head = self.alpha_bar(i) + self.beta_bar(i - 1) + 1;
            let end = self.alpha_bar(i) + self.beta_bar(i);
            if before < k && k <= head {
                Some(Slot::Run(i))
            } else if head < k && k <= end {
                Some(Slot::Block(i))
            } else {
                None
            }
        })
    }

    /// Expands the runs back into `λ̃`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.lambda_tilde.len());
        for i in 1..=self.blocks() {
            out.extend(std::iter::repeat_n(0.0, self.alpha(i)));
            out.extend(std::iter::repeat_n(self.gamma(i), self.beta(i)));
        }
        out.extend(std::iter::repeat_n(0.0, self.alpha(self.blocks() + 1)));
        out
    }
}

/// Position class returned by [`BlockDecomposition::locate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Run(usize),
    Block(usize),
}

pub fn block_decompose(lambda: &LambdaVector, p: usize) -> Result<BlockDecomposition> {
    let n = lambda.len();
    if p > n {
        return Err(Error::Lambda(format!("p = {p} exceeds n = {n}")));
    }
    let tilde = lambda.values[p..].to_vec();
    let mut gamma = Vec::new();
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut zeros = 0;
    let mut i = 0;
    while i < tilde.len() {
        let v = tilde[i];
        if v == 0.0 {
            zeros += 1;
            i += 1;
            continue;
        }
        let start = i;
        while i < tilde.len() && tilde[i] == v {
            i += 1;
        }
        alpha.push(zeros);
        beta.push(i - start);
        gamma.push(v);
        zeros = 0;
    }
    alpha.push(zeros);

    let mut alpha_bar = vec![0];
    for a in &alpha {
        alpha_bar.push(alpha_bar.last().unwrap() + a);
    }
    let mut beta_bar = vec![0];
    for b in &beta {
        beta_bar.push(beta_bar.last().unwrap() + b);
    }
    Ok(BlockDecomposition {
        p,
        lambda_tilde: tilde,
        gamma,
        alpha,
        beta,
        alpha_bar,
        beta_bar,
    })
}

/// Covering variables saved by the block formulation: `(n - 2I) G`.
pub fn covering_var_savings(decomp: &BlockDecomposition, n: usize, g: usize) -> i64 {
    (n as i64 - 2 * decomp.blocks() as i64) * g as i64
}
