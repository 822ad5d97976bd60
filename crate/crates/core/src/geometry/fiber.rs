use serde::Serialize;

use crate::error::{Error, Result};

/// A canonical divisor given by labels and multiplicities, e.g.
/// `p + p' + r + r' + 2W1`.
///
/// A label ending in `'` names the hyperelliptic conjugate of the unprimed
/// label; a label starting with `W` names a Weierstrass point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledCanonical {
    pub genus: usize,
    pub labels: Vec<String>,
    pub mults: Vec<usize>,
}

impl LabeledCanonical {
    pub fn new(genus: usize, labels: Vec<String>, mults: Vec<usize>) -> Result<Self> {
        if genus == 0 || labels.len() != mults.len() || mults.iter().any(|&m| m == 0) {
            return Err(Error::InvalidInput("labels and positive multiplicities must match".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidInput(format!("label {l} repeated")));
            }
        }
        let k = Self { genus, labels, mults };
        if k.degree() != 2 * genus - 2 {
            return Err(Error::InvalidInput(format!(
                "canonical divisor must have degree {}, got {}",
                2 * genus - 2,
                k.degree()
            )));
        }
        Ok(k)
    }

    /// Parse `term (+ term)*` with `term = [multiplicity] label`.
    pub fn parse(text: &str, genus: usize) -> Result<Self> {
        let mut labels = Vec::new();
        let mut mults = Vec::new();
        for raw in text.split('+') {
            let term = raw.trim();
            let digits = term.chars().take_while(|c| c.is_ascii_digit()).count();
            let (num, label) = term.split_at(digits);
            let valid = !label.is_empty()
                && label.chars().next().is_some_and(|c| c.is_alphabetic())
                && label.trim_end_matches('\'').chars().all(|c| c.is_alphanumeric() || c == '_')
                && label.matches('\'').count() <= 1;
            if !valid {
                return Err(Error::InvalidInput(format!("cannot parse divisor term {term:?}")));
            }
            let m: usize = if num.is_empty() { 1 } else { num.parse().map_err(|_| Error::InvalidInput(format!("bad multiplicity in {term:?}")))? };
            if let Some(i) = labels.iter().position(|l| l == label) {
                mults[i] += m;
            } else {
                labels.push(label.to_string());
                mults.push(m);
            }
        }
        Self::new(genus, labels, mults)
    }

    pub fn degree(&self) -> usize {
        self.mults.iter().sum()
    }

    fn conjugate_of(&self, i: usize) -> Option<usize> {
        let l = &self.labels[i];
        let partner = match l.strip_suffix('\'') {
            Some(base) => base.to_string(),
            None => format!("{l}'"),
        };
        self.labels.iter().position(|o| *o == partner)
    }

    fn is_weierstrass(&self, i: usize) -> bool {
        self.labels[i].starts_with('W')
    }

    /// Hyperelliptic pair count: the number of `g¹₂` fibres contained in the
    /// subdivisor with multiplicities `l`. On a hyperelliptic curve
    /// `l(D) = 1 + pairs` for effective `D` of degree at most `g − 1`.
    pub fn pair_count(&self, l: &[usize]) -> usize {
        let mut pairs = 0;
        for i in 0..l.len() {
            if self.is_weierstrass(i) {
                pairs += l[i] / 2;
            } else if let Some(j) = self.conjugate_of(i) {
                if i < j {
                    pairs += l[i].min(l[j]);
                }
            }
        }
        pairs
    }

    pub fn format_sub(&self, l: &[usize]) -> String {
        let parts: Vec<String> = l
            .iter()
            .zip(&self.labels)
            .filter(|(&k, _)| k > 0)
            .map(|(&k, name)| if k == 1 { name.clone() } else { format!("{k}{name}") })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussFiberEntry {
    /// Multiplicity of each label of `K₀` in the subdivisor `D`.
    pub counts: Vec<usize>,
    pub subdivisor: String,
    pub multiplicity: u64,
    /// `l(D) ≥ 2`.
    pub special: bool,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// All `D ≤ K₀` of degree `g − 1`, each with multiplicity `Π C(n_i, l_i)` in
/// the Gauss fibre over `K₀`. Specialness is decided by the pair count.
pub fn gauss_fiber_enumerate(k0: &LabeledCanonical) -> Result<Vec<GaussFiberEntry>> {
    let target = k0.genus - 1;
    if k0.degree() != 2 * k0.genus - 2 {
        return Err(Error::InvalidInput("K₀ has the wrong degree".into()));
    }
    let mut out = Vec::new();
    let mut l = vec![0usize; k0.mults.len()];
    fn recurse(k0: &LabeledCanonical, i: usize, left: usize, l: &mut Vec<usize>, out: &mut Vec<GaussFiberEntry>) {
        if i == l.len() {
            if left == 0 {
                let multiplicity = l.iter().zip(&k0.mults).map(|(&li, &ni)| binomial(ni, li)).product();
                out.push(GaussFiberEntry {
                    counts: l.clone(),
                    subdivisor: k0.format_sub(l),
                    multiplicity,
                    special: k0.pair_count(l) > 0,
                });
            }
            return;
        }
        for k in (0..=k0.mults[i].min(left)).rev() {
            l[i] = k;
            recurse(k0, i + 1, left - k, l, out);
        }
        l[i] = 0;
    }
    recurse(k0, 0, target, &mut l, &mut out);
    Ok(out)
}
