//! Shapley contributions: exact over all subcoalitions, exact over all
//! orderings (small games only), and the sampled estimate over random orderings.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coalition::{enumerate_subcoalitions, Coalition};
use crate::error::{Error, Result};

/// Largest coalition [`shapley_by_permutations`] enumerates.
pub const MAX_PERMUTATION_ORGS: usize = 8;

/// A characteristic function. The empty coalition is worth 0.
pub trait Game {
    fn value(&self, c: Coalition) -> Result<i64>;
}

/// Characteristic function given as an explicit table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableGame {
    values: HashMap<Coalition, i64>,
}

impl TableGame {
    pub fn new() -> Self {
        TableGame::default()
    }

    /// Tabulates `f` on every subset of `{0..k}`.
    pub fn from_fn(k: usize, f: impl Fn(Coalition) -> i64) -> Result<Self> {
        let mut g = TableGame::new();
        for c in enumerate_subcoalitions(Coalition::grand(k)?)? {
            g.set(c, f(c));
        }
        Ok(g)
    }

    pub fn set(&mut self, c: Coalition, v: i64) -> &mut Self {
        self.values.insert(c, v);
        self
    }
}

impl FromIterator<(Coalition, i64)> for TableGame {
    fn from_iter<I: IntoIterator<Item = (Coalition, i64)>>(iter: I) -> Self {
        TableGame {
            values: iter.into_iter().collect(),
        }
    }
}

impl Game for TableGame {
    fn value(&self, c: Coalition) -> Result<i64> {
        if c.is_empty() {
            return Ok(0);
        }
        self.values
            .get(&c)
            .copied()
            .ok_or_else(|| Error::contract(format!("no value for coalition {c}")))
    }
}

/// Exact contributions of the members of a coalition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContributionVector {
    coalition: Coalition,
    values: Vec<BigRational>,
}

impl ContributionVector {
    pub fn coalition(&self) -> Coalition {
        self.coalition
    }

    /// Contributions in ascending member order.
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn get(&self, org: usize) -> Option<&BigRational> {
        self.coalition.rank_of(org).map(|r| &self.values[r])
    }

    pub fn sum(&self) -> BigRational {
        self.values.iter().fold(BigRational::zero(), |acc, v| acc + v)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = vec![BigInt::from(1)];
    for i in 1..=n {
        let next = &f[i - 1] * BigInt::from(i);
        f.push(next);
    }
    f
}

/// Contribution of every member of `c`, summing weighted marginal
/// contributions over all subcoalitions.
pub fn exact_shapley(v: &dyn Game, c: Coalition) -> Result<ContributionVector> {
    let n = c.len();
    let values: HashMap<Coalition, i64> = enumerate_subcoalitions(c)?
        .map(|s| v.value(s).map(|x| (s, x)))
        .collect::<Result<_>>()?;
    let fact = factorials(n);
    let mut out = Vec::with_capacity(n);
    for u in c.members() {
        let rest = c.without(u);
        // marginal contributions summed per size of the subcoalition not containing u
        let mut by_size = vec![0i128; n];
        for s in rest.submasks() {
            by_size[s.len()] += (values[&s.with(u)] - values[&s]) as i128;
        }
        let mut num = BigInt::zero();
        for (size, total) in by_size.into_iter().enumerate() {
            num += BigInt::from(total) * &fact[size] * &fact[n - size - 1];
        }
        out.push(BigRational::new(num, fact[n].clone()));
    }
    Ok(ContributionVector {
        coalition: c,
        values: out,
    })
}

/// Contribution of every member of `c` as the average marginal contribution
/// over all orderings of `c`.
pub fn shapley_by_permutations(v: &dyn Game, c: Coalition) -> Result<ContributionVector> {
    let n = c.len();
    if n > MAX_PERMUTATION_ORGS {
        return Err(Error::Capacity {
            size: n,
            limit: MAX_PERMUTATION_ORGS,
        });
    }
    let members: Vec<usize> = c.members().collect();
    let mut cache: HashMap<Coalition, i64> = HashMap::new();
    let mut value = |s: Coalition| -> Result<i64> {
        if let Some(&x) = cache.get(&s) {
            return Ok(x);
        }
        let x = v.value(s)?;
        cache.insert(s, x);
        Ok(x)
    };
    let mut totals = vec![0i128; n];
    for order in members.iter().copied().permutations(n) {
        let mut prefix = Coalition::EMPTY;
        let mut before = 0;
        for u in order {
            let with = prefix.with(u);
            let after = value(with)?;
            totals[c.rank_of(u).expect("member")] += (after - before) as i128;
            prefix = with;
            before = after;
        }
    }
    let count = factorials(n).pop().expect("n! exists");
    Ok(ContributionVector {
        coalition: c,
        values: totals
            .into_iter()
            .map(|t| BigRational::new(BigInt::from(t), count.clone()))
            .collect(),
    })
}

/// Number of sampled orderings `max(1, ⌈k²/ε² · ln(k/(1−λ))⌉)` giving
/// contributions within `ε·v` of the exact ones with probability `λ`.
pub fn sample_size(k: usize, epsilon: f64, lambda: f64) -> Result<usize> {
    if k == 0 {
        return Err(Error::config("sample size needs at least one organization"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::config(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    let k = k as f64;
    let n = (k * k / (epsilon * epsilon) * (k / (1.0 - lambda)).ln()).ceil();
    if !(n < usize::MAX as f64) {
        return Err(Error::config("sample size does not fit in memory"));
    }
    Ok((n as usize).max(1))
}

/// Orderings of all organizations with the prefixes they induce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixSample {
    k: usize,
    orderings: Vec<Vec<usize>>,
}

/// `N` orderings of `{0..k}` drawn independently and uniformly, with replacement.
pub fn sample_prefixes(k: usize, n: usize, seed: u64) -> Result<PrefixSample> {
    if n == 0 {
        return Err(Error::config("at least one ordering must be sampled"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orderings = (0..n)
        .map(|_| {
            let mut o: Vec<usize> = (0..k).collect();
            o.shuffle(&mut rng);
            o
        })
        .collect();
    Ok(PrefixSample { k, orderings })
}

impl PrefixSample {
    /// Every ordering of `{0..k}` exactly once.
    pub fn all_orderings(k: usize) -> Result<Self> {
        if k > MAX_PERMUTATION_ORGS {
            return Err(Error::Capacity {
                size: k,
                limit: MAX_PERMUTATION_ORGS,
            });
        }
        Ok(PrefixSample {
            k,
            orderings: (0..k).permutations(k).collect(),
        })
    }

    /// Explicit orderings; each must be a permutation of `{0..k}`.
    pub fn from_orderings(k: usize, orderings: Vec<Vec<usize>>) -> Result<Self> {
        if orderings.is_empty() {
            return Err(Error::config("at least one ordering is needed"));
        }
        for o in &orderings {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != (0..k).collect::<Vec<_>>() {
                return Err(Error::config(format!("{o:?} is not an ordering of {k} organizations")));
            }
        }
        Ok(PrefixSample { k, orderings })
    }

    pub fn orgs(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.orderings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orderings.is_empty()
    }

    pub fn orderings(&self) -> &[Vec<usize>] {
        &self.orderings
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, Coalition)> + '_ {
        self.orderings.iter().flat_map(|o| {
            o.iter().scan(Coalition::EMPTY, |prefix, &u| {
                let before = *prefix;
                *prefix = prefix.with(u);
                Some((u, before))
            })
        })
    }

    /// Prefixes preceding each organization in each ordering.
    pub fn subs(&self) -> BTreeSet<Coalition> {
        self.pairs().map(|(_, p)| p).collect()
    }

    /// Each prefix extended by the organization that follows it.
    pub fn subs_extended(&self) -> BTreeSet<Coalition> {
        self.pairs().map(|(u, p)| p.with(u)).collect()
    }

    /// Every coalition whose value the estimate needs.
    pub fn coalitions(&self) -> BTreeSet<Coalition> {
        let mut all = self.subs();
        all.extend(self.subs_extended());
        all
    }

    /// Per organization: distinct prefixes it followed, with multiplicities.
    pub fn marginals(&self) -> Vec<Vec<(Coalition, u64)>> {
        let mut counts: Vec<BTreeMap<Coalition, u64>> = vec![BTreeMap::new(); self.k];
        for (u, p) in self.pairs() {
            *counts[u].entry(p).or_insert(0) += 1;
        }
        counts.into_iter().map(|m| m.into_iter().collect()).collect()
    }
}

/// `N · φ̂` per organization: the marginal contributions summed over all
/// sampled orderings, exactly.
pub fn marginal_sums<F>(sample: &PrefixSample, value: F) -> Result<Vec<i128>>
where
    F: Fn(Coalition) -> Option<i64>,
{
    let lookup = |c: Coalition| {
        if c.is_empty() {
            return Ok(0);
        }
        value(c).ok_or_else(|| Error::contract(format!("no value for sampled coalition {c}")))
    };
    sample
        .marginals()
        .into_iter()
        .enumerate()
        .map(|(u, list)| {
            list.into_iter().try_fold(0i128, |acc, (p, mult)| {
                Ok(acc + mult as i128 * (lookup(p.with(u))? - lookup(p)?) as i128)
            })
        })
        .collect()
}

/// Estimated contribution of every organization: its marginal contribution
/// averaged over the sampled orderings.
pub fn estimate_contributions<F>(sample: &PrefixSample, value: F) -> Result<Vec<f64>>
where
    F: Fn(Coalition) -> Option<i64>,
{
    let n = sample.len() as f64;
    Ok(marginal_sums(sample, value)?
        .into_iter()
        .map(|s| s as f64 / n)
        .collect())
}
