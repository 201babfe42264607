//! Network model: sources, multicast groups, path-loss gains and SINR.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters for drawing a random [`NetworkInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub num_sources: usize,
    /// Destinations per multicast group.
    pub group_size: usize,
    pub path_loss_exponent: f64,
    /// Receiver noise power in mW.
    pub noise_power: f64,
    /// Closed interval the source-destination distances are drawn from.
    pub distance_range: (f64, f64),
    pub seed: u64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self {
            num_sources: 2,
            group_size: 2,
            path_loss_exponent: 3.0,
            noise_power: 0.1,
            distance_range: (0.05, 1.0),
            seed: 1,
        }
    }
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_sources < 1 {
            return Err(Error::Config("num_sources must be >= 1".into()));
        }
        if self.group_size < 1 {
            return Err(Error::Config("group_size must be >= 1".into()));
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::Config(format!(
                "path_loss_exponent must be > 0, got {}",
                self.path_loss_exponent
            )));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Config(format!(
                "noise_power must be > 0, got {}",
                self.noise_power
            )));
        }
        let (lo, hi) = self.distance_range;
        if !(lo > 0.0 && lo.is_finite()) {
            return Err(Error::Config(format!(
                "distance_range lower bound must be > 0, got {lo}"
            )));
        }
        if !(hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!(
                "distance_range upper bound must be finite and >= {lo}, got {hi}"
            )));
        }
        Ok(())
    }
}

/// A one-hop multicast network.
///
/// Destination ids are global: group `i` owns the ids in `groups[i]`, and
/// `distances[i][d]` is the distance from source `i` to destination `d` for
/// every destination in the network, not just the source's own group.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    sources: Vec<usize>,
    groups: Vec<Vec<usize>>,
    distances: Vec<Vec<f64>>,
    path_loss_exponent: f64,
    noise_power: f64,
}

impl NetworkInstance {
    /// Builds an instance from per-source group sizes and a full
    /// source-by-destination distance matrix.
    ///
    /// Destinations are numbered consecutively group by group.
    pub fn new(
        group_sizes: &[usize],
        distances: Vec<Vec<f64>>,
        path_loss_exponent: f64,
        noise_power: f64,
    ) -> Result<Self> {
        if group_sizes.is_empty() {
            return Err(Error::Config("instance needs at least one source".into()));
        }
        if group_sizes.contains(&0) {
            return Err(Error::Config("every group needs at least one destination".into()));
        }
        if !(path_loss_exponent > 0.0 && path_loss_exponent.is_finite()) {
            return Err(Error::Config(format!(
                "path_loss_exponent must be > 0, got {path_loss_exponent}"
            )));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::Config(format!("noise_power must be > 0, got {noise_power}")));
        }
        let num_dest: usize = group_sizes.iter().sum();
        if distances.len() != group_sizes.len() {
            return Err(Error::Config(format!(
                "distance matrix has {} rows, expected {}",
                distances.len(),
                group_sizes.len()
            )));
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != num_dest {
                return Err(Error::Config(format!(
                    "distance row {i} has {} entries, expected {num_dest}",
                    row.len()
                )));
            }
            if let Some((d, v)) = row.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!(
                    "distance ({i}, {d}) must be positive and finite, got {v}"
                )));
            }
        }
        let mut next = 0;
        let groups = group_sizes
            .iter()
            .map(|&size| {
                let g: Vec<usize> = (next..next + size).collect();
                next += size;
                g
            })
            .collect();
        Ok(Self {
            sources: (0..group_sizes.len()).collect(),
            groups,
            distances,
            path_loss_exponent,
            noise_power,
        })
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn num_destinations(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Destination ids of source `i`'s multicast group.
    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn group_size(&self, i: usize) -> usize {
        self.groups[i].len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Total number of point-to-point links, `sum_i D_i`.
    pub fn num_links(&self) -> usize {
        self.num_destinations()
    }

    fn check_ids(&self, i: usize, d: usize) -> Result<()> {
        if i >= self.num_sources() {
            return Err(Error::Lookup { kind: "source", id: i });
        }
        if d >= self.num_destinations() {
            return Err(Error::Lookup { kind: "destination", id: d });
        }
        Ok(())
    }

    /// Path gain `d^-a` from source `i` to destination `d`.
    pub fn gain(&self, i: usize, d: usize) -> Result<f64> {
        self.check_ids(i, d)?;
        Ok(self.gain_unchecked(i, d))
    }

    pub(crate) fn gain_unchecked(&self, i: usize, d: usize) -> f64 {
        self.distances[i][d].powf(-self.path_loss_exponent)
    }

    /// Largest gain from source `k` to any destination in the network.
    pub fn max_gain_from(&self, k: usize) -> f64 {
        (0..self.num_destinations())
            .map(|d| self.gain_unchecked(k, d))
            .fold(0.0, f64::max)
    }

    /// Largest gain anywhere in the instance.
    pub fn max_gain(&self) -> f64 {
        (0..self.num_sources())
            .map(|k| self.max_gain_from(k))
            .fold(0.0, f64::max)
    }

    /// SINR at destination `d` for the transmission of source `i`, given the
    /// per-source transmit powers (mW) of one slot.
    pub fn sinr(&self, powers: &[f64], i: usize, d: usize) -> Result<f64> {
        self.check_ids(i, d)?;
        if powers.len() != self.num_sources() {
            return Err(Error::Input(format!(
                "power vector has {} entries, expected {}",
                powers.len(),
                self.num_sources()
            )));
        }
        if let Some((k, p)) = powers.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::Domain(format!("power of source {k} must be >= 0, got {p}")));
        }
        Ok(self.sinr_unchecked(powers, i, d))
    }

    pub(crate) fn sinr_unchecked(&self, powers: &[f64], i: usize, d: usize) -> f64 {
        let interference: f64 = powers
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(k, p)| p * self.gain_unchecked(k, d))
            .sum();
        powers[i] * self.gain_unchecked(i, d) / (self.noise_power + interference)
    }
}

/// Draws a random instance. Distances are i.i.d. uniform over the configured
/// range and cover every (source, destination) pair.
pub fn generate_instance(config: &InstanceConfig) -> Result<NetworkInstance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let num_dest = config.num_sources * config.group_size;
    let (lo, hi) = config.distance_range;
    let distances = (0..config.num_sources)
        .map(|_| (0..num_dest).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    NetworkInstance::new(
        &vec![config.group_size; config.num_sources],
        distances,
        config.path_loss_exponent,
        config.noise_power,
    )
}

/// A point-to-point link: source and position within that source's group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub source: usize,
    pub member: usize,
}

/// Pairwise conflicts between point-to-point links at a reference power.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    links: Vec<Link>,
    adjacency: Vec<Vec<bool>>,
}

impl ConflictGraph {
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn num_vertices(&self) -> usize {
        self.links.len()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[a]
            .iter()
            .enumerate()
            .filter_map(|(b, &on)| on.then_some(b))
    }

    /// Unordered edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.links.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.adjacency[a][b])
            .collect()
    }
}

/// Links `(i, j)` and `(k, l)` with `i != k` conflict when switching on both
/// transmitters at `reference_power` pushes the SINR at `j` or at `l` below
/// `beta`. Links of the same source share a transmitter and never conflict.
pub fn build_conflict_graph(
    instance: &NetworkInstance,
    reference_power: f64,
    beta: f64,
) -> Result<ConflictGraph> {
    if !(reference_power > 0.0 && reference_power.is_finite()) {
        return Err(Error::Domain(format!(
            "reference_power must be > 0, got {reference_power}"
        )));
    }
    let links: Vec<Link> = (0..instance.num_sources())
        .flat_map(|source| (0..instance.group_size(source)).map(move |member| Link { source, member }))
        .collect();
    let n = links.len();
    let mut adjacency = vec![vec![false; n]; n];
    let mut powers = vec![0.0; instance.num_sources()];
    for a in 0..n {
        for b in a + 1..n {
            let (la, lb) = (links[a], links[b]);
            if la.source == lb.source {
                continue;
            }
            powers[la.source] = reference_power;
            powers[lb.source] = reference_power;
            let da = instance.group(la.source)[la.member];
            let db = instance.group(lb.source)[lb.member];
            let conflict = instance.sinr_unchecked(&powers, la.source, da) < beta
                || instance.sinr_unchecked(&powers, lb.source, db) < beta;
            powers[la.source] = 0.0;
            powers[lb.source] = 0.0;
            adjacency[a][b] = conflict;
            adjacency[b][a] = conflict;
        }
    }
    Ok(ConflictGraph { links, adjacency })
}

/// Converts decibels to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
