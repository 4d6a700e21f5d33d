//! The discrete configuration space searched by every strategy.
//!
//! A [`ParameterSpace`] holds five ordered value lists. Its configurations are
//! the full cross product, addressed by a mixed-radix index in which the host
//! thread list is the most significant digit and the fraction list the least.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbolic thread-placement policy such as `scatter` or `compact`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Affinity(Arc<str>);

impl Affinity {
    pub fn new(label: &str) -> Self {
        Affinity(Arc::from(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Affinity {
    fn from(label: &str) -> Self {
        Affinity::new(label)
    }
}

impl fmt::Debug for Affinity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl fmt::Display for Affinity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One point of the space. The device receives `100 - host_fraction` percent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub host_threads: u32,
    pub host_affinity: Affinity,
    pub device_threads: u32,
    pub device_affinity: Affinity,
    pub host_fraction: u32,
}

impl Configuration {
    pub fn device_fraction(&self) -> u32 {
        100 - self.host_fraction
    }

    /// Number of fields in which `self` and `other` differ.
    pub fn hamming_distance(&self, other: &Configuration) -> usize {
        [
            self.host_threads != other.host_threads,
            self.host_affinity != other.host_affinity,
            self.device_threads != other.device_threads,
            self.device_affinity != other.device_affinity,
            self.host_fraction != other.host_fraction,
        ]
        .iter()
        .filter(|&&d| d)
        .count()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "host {}x{} / device {}x{} / host fraction {}%",
            self.host_threads, self.host_affinity, self.device_threads, self.device_affinity, self.host_fraction
        )
    }
}

/// Field positions used by the mixed-radix index and by neighbor moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    HostThreads,
    HostAffinity,
    DeviceThreads,
    DeviceAffinity,
    HostFraction,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::HostThreads,
        Field::HostAffinity,
        Field::DeviceThreads,
        Field::DeviceAffinity,
        Field::HostFraction,
    ];
}

#[derive(Debug, Deserialize)]
struct RawSpace {
    host_threads: Vec<u32>,
    host_affinities: Vec<Affinity>,
    device_threads: Vec<u32>,
    device_affinities: Vec<Affinity>,
    fractions: Vec<u32>,
}

/// Named discrete parameters with their candidate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct ParameterSpace {
    host_threads: Vec<u32>,
    host_affinities: Vec<Affinity>,
    device_threads: Vec<u32>,
    device_affinities: Vec<Affinity>,
    fractions: Vec<u32>,
}

impl TryFrom<RawSpace> for ParameterSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        ParameterSpace::new(
            raw.host_threads,
            raw.host_affinities,
            raw.device_threads,
            raw.device_affinities,
            raw.fractions,
        )
    }
}

fn check_list<T: PartialEq + fmt::Debug>(name: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidSpace(format!("`{name}` is empty")));
    }
    for (i, v) in values.iter().enumerate() {
        if values[..i].contains(v) {
            return Err(Error::InvalidSpace(format!("`{name}` contains duplicate value {v:?}")));
        }
    }
    Ok(())
}

impl ParameterSpace {
    pub fn new(
        host_threads: Vec<u32>,
        host_affinities: Vec<Affinity>,
        device_threads: Vec<u32>,
        device_affinities: Vec<Affinity>,
        fractions: Vec<u32>,
    ) -> Result<Self> {
        check_list("host_threads", &host_threads)?;
        check_list("host_affinities", &host_affinities)?;
        check_list("device_threads", &device_threads)?;
        check_list("device_affinities", &device_affinities)?;
        check_list("fractions", &fractions)?;
        if host_threads.iter().chain(&device_threads).any(|&t| t == 0) {
            return Err(Error::InvalidSpace("thread counts must be positive".into()));
        }
        if let Some(f) = fractions.iter().find(|&&f| f > 100) {
            return Err(Error::InvalidSpace(format!("fraction {f} is outside [0, 100]")));
        }
        Ok(ParameterSpace {
            host_threads,
            host_affinities,
            device_threads,
            device_affinities,
            fractions,
        })
    }

    /// The canonical space: seven host and nine device thread counts, three
    /// affinities per side, and host fractions `0..=100`.
    pub fn default_space() -> Self {
        ParameterSpace::new(
            vec![2, 4, 6, 12, 24, 36, 48],
            labels(&["none", "scatter", "compact"]),
            vec![2, 4, 8, 16, 30, 60, 120, 180, 240],
            labels(&["balanced", "scatter", "compact"]),
            (0..=100).collect(),
        )
        .expect("default space is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space serializes")
    }

    pub fn host_threads(&self) -> &[u32] {
        &self.host_threads
    }

    pub fn host_affinities(&self) -> &[Affinity] {
        &self.host_affinities
    }

    pub fn device_threads(&self) -> &[u32] {
        &self.device_threads
    }

    pub fn device_affinities(&self) -> &[Affinity] {
        &self.device_affinities
    }

    pub fn fractions(&self) -> &[u32] {
        &self.fractions
    }

    /// Length of the value list behind `field`.
    pub fn field_len(&self, field: Field) -> usize {
        match field {
            Field::HostThreads => self.host_threads.len(),
            Field::HostAffinity => self.host_affinities.len(),
            Field::DeviceThreads => self.device_threads.len(),
            Field::DeviceAffinity => self.device_affinities.len(),
            Field::HostFraction => self.fractions.len(),
        }
    }

    fn radices(&self) -> [usize; 5] {
        Field::ALL.map(|f| self.field_len(f))
    }

    /// Number of configurations: the product of the five list lengths.
    pub fn cardinality(&self) -> u64 {
        self.radices().iter().map(|&n| n as u64).product()
    }

    /// Decodes a mixed-radix index in `[0, cardinality)`.
    pub fn config_at(&self, index: u64) -> Option<Configuration> {
        if index >= self.cardinality() {
            return None;
        }
        let mut digits = [0usize; 5];
        let mut rest = index;
        for (digit, &radix) in digits.iter_mut().zip(&self.radices()).rev() {
            *digit = (rest % radix as u64) as usize;
            rest /= radix as u64;
        }
        Some(self.at_positions(digits))
    }

    /// Inverse of [`config_at`](Self::config_at).
    pub fn index_of(&self, config: &Configuration) -> Result<u64> {
        let positions = self.positions(config)?;
        Ok(positions
            .iter()
            .zip(&self.radices())
            .fold(0u64, |acc, (&p, &r)| acc * r as u64 + p as u64))
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.positions(config).is_ok()
    }

    fn positions(&self, c: &Configuration) -> Result<[usize; 5]> {
        fn find<T: PartialEq>(list: &[T], v: &T, c: &Configuration) -> Result<usize> {
            list.iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::NotInSpace(c.to_string()))
        }
        Ok([
            find(&self.host_threads, &c.host_threads, c)?,
            find(&self.host_affinities, &c.host_affinity, c)?,
            find(&self.device_threads, &c.device_threads, c)?,
            find(&self.device_affinities, &c.device_affinity, c)?,
            find(&self.fractions, &c.host_fraction, c)?,
        ])
    }

    fn at_positions(&self, p: [usize; 5]) -> Configuration {
        Configuration {
            host_threads: self.host_threads[p[0]],
            host_affinity: self.host_affinities[p[1]].clone(),
            device_threads: self.device_threads[p[2]],
            device_affinity: self.device_affinities[p[3]].clone(),
            host_fraction: self.fractions[p[4]],
        }
    }

    /// Every configuration once, in lexicographic order of list positions.
    pub fn enumerate(&self) -> Enumerate<'_> {
        Enumerate {
            space: self,
            next: 0,
            end: self.cardinality(),
        }
    }

    /// Draws each field independently and uniformly.
    pub fn random_configuration<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let mut p = [0usize; 5];
        for (slot, radix) in p.iter_mut().zip(self.radices()) {
            *slot = rng.random_range(0..radix);
        }
        self.at_positions(p)
    }

    /// Reassigns exactly one field to a different value.
    ///
    /// The field is uniform over fields with more than one value, the new
    /// value uniform over that field's other values. Returns `current`
    /// unchanged when every list is a singleton.
    pub fn neighbor<R: Rng + ?Sized>(&self, current: &Configuration, rng: &mut R) -> Result<Configuration> {
        let mut p = self.positions(current)?;
        let radices = self.radices();
        let movable: Vec<usize> = (0..5).filter(|&i| radices[i] > 1).collect();
        if movable.is_empty() {
            return Ok(current.clone());
        }
        let field = movable[rng.random_range(0..movable.len())];
        let mut pos = rng.random_range(0..radices[field] - 1);
        if pos >= p[field] {
            pos += 1;
        }
        p[field] = pos;
        Ok(self.at_positions(p))
    }
}

fn labels(names: &[&str]) -> Vec<Affinity> {
    names.iter().map(|n| Affinity::new(n)).collect()
}

/// Iterator returned by [`ParameterSpace::enumerate`].
pub struct Enumerate<'a> {
    space: &'a ParameterSpace,
    next: u64,
    end: u64,
}

impl Iterator for Enumerate<'_> {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.next >= self.end {
            return None;
        }
        let c = self.space.config_at(self.next);
        self.next += 1;
        c
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Enumerate<'_> {}
