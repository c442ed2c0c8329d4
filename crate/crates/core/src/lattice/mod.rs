//! D-dimensional qubit lattices and data/ancilla placements.
//!
//! Sites sit on an integer grid with unit spacing and are numbered in
//! row-major order (the last axis varies fastest). Distances are Euclidean.

pub(crate) mod edt;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};

/// Default upper bound on the number of sites in a layout.
pub const DEFAULT_SITE_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeLayout {
    extents: Vec<usize>,
    strides: Vec<usize>,
    coords: Vec<[i64; 3]>,
}

impl LatticeLayout {
    /// Builds a layout with the default site cap.
    pub fn new(extents: &[usize]) -> Result<Self> {
        Self::with_cap(extents, DEFAULT_SITE_CAP)
    }

    pub fn with_cap(extents: &[usize], site_cap: usize) -> Result<Self> {
        let dim = extents.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGeometry(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if let Some(pos) = extents.iter().position(|&e| e == 0) {
            return Err(Error::InvalidGeometry(format!("extent {pos} is zero")));
        }
        let total = extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .filter(|&t| t <= site_cap)
            .ok_or_else(|| {
                Error::Capacity(format!("{extents:?} exceeds the cap of {site_cap} sites"))
            })?;

        let mut strides = vec![1; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * extents[a + 1];
        }
        let coords = (0..total)
            .map(|i| {
                let mut c = [0i64; 3];
                for a in 0..dim {
                    c[a] = ((i / strides[a]) % extents[a]) as i64;
                }
                c
            })
            .collect();
        Ok(LatticeLayout {
            extents: extents.to_vec(),
            strides,
            coords,
        })
    }

    /// A chain of `len` sites.
    pub fn chain(len: usize) -> Result<Self> {
        Self::new(&[len])
    }

    /// Smallest hypercube of side `ceil(n^(1/D))` holding `n` sites.
    pub fn for_qubits(dimension: usize, n: usize) -> Result<Self> {
        let side = cube_side(dimension, n);
        Self::new(&vec![side; dimension])
    }

    /// Box holding `n` data qubits, each with an ancilla directly after it
    /// along the first axis. For `D > 1` the data rows along the first axis
    /// are half as many as along the others, so the ancilla sublattice
    /// (spacing 2 along that axis) spans a near-cubic region.
    pub fn for_fanout(dimension: usize, n: usize) -> Result<Self> {
        match dimension {
            0 => return Self::new(&[]),
            1 => return Self::new(&[2 * n.max(1)]),
            _ => {}
        }
        let cross = |side: usize| side.pow(dimension as u32 - 1);
        let mut side = 1usize;
        while side.div_ceil(2) * cross(side) < n {
            side += 1;
        }
        let mut extents = vec![side; dimension];
        extents[0] = 2 * n.div_ceil(cross(side)).max(1);
        Self::new(&extents)
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, site: usize) -> Result<&[i64]> {
        check_index(site, self.len())?;
        Ok(&self.coords[site][..self.dimension()])
    }

    pub(crate) fn raw_coord(&self, site: usize) -> [i64; 3] {
        self.coords[site]
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Site index of an integer coordinate, if it lies inside the grid.
    pub fn site_at(&self, coord: &[i64]) -> Option<usize> {
        if coord.len() != self.dimension() {
            return None;
        }
        let mut idx = 0;
        for (a, &c) in coord.iter().enumerate() {
            if c < 0 || c as usize >= self.extents[a] {
                return None;
            }
            idx += c as usize * self.strides[a];
        }
        Some(idx)
    }

    /// Squared distance, exact in integers.
    pub fn distance_sq(&self, i: usize, j: usize) -> Result<u64> {
        check_index(i, self.len())?;
        check_index(j, self.len())?;
        Ok(self.distance_sq_unchecked(i, j))
    }

    pub(crate) fn distance_sq_unchecked(&self, i: usize, j: usize) -> u64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        (0..3).map(|k| ((a[k] - b[k]) * (a[k] - b[k])) as u64).sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        Ok((self.distance_sq(i, j)? as f64).sqrt())
    }

    /// Largest distance between two sites (opposite corners).
    pub fn diameter(&self) -> f64 {
        let d2: usize = self.extents.iter().map(|e| (e - 1) * (e - 1)).sum();
        (d2 as f64).sqrt()
    }

    /// Short human-readable identifier, e.g. `2d:8x4`.
    pub fn id(&self) -> String {
        let ext: Vec<String> = self.extents.iter().map(|e| e.to_string()).collect();
        format!("{}d:{}", self.dimension(), ext.join("x"))
    }
}

fn cube_side(dimension: usize, n: usize) -> usize {
    let mut side = (n as f64).powf(1.0 / dimension.max(1) as f64).round().max(1.0) as usize;
    while side.pow(dimension as u32) < n {
        side += 1;
    }
    while side > 1 && (side - 1).pow(dimension as u32) >= n {
        side -= 1;
    }
    side
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Canonical,
    Interleaved,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Canonical => f.write_str("canonical"),
            Placement::Interleaved => f.write_str("interleaved"),
        }
    }
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Placement::Canonical),
            "interleaved" => Ok(Placement::Interleaved),
            other => Err(Error::UnsupportedStrategy(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Data(usize),
    Ancilla(usize),
    Unused,
}

/// Mapping of logical qubits (and optionally their ancillae) onto sites.
#[derive(Debug, Clone)]
pub struct QubitAssignment {
    layout: LatticeLayout,
    roles: Vec<Role>,
    data: Vec<usize>,
    ancillae: Vec<usize>,
    placement: Placement,
}

impl QubitAssignment {
    /// Data-only placement of `n` logical qubits.
    ///
    /// Canonical puts logical qubit k on the k-th site in row-major order.
    /// Interleaved (chains only) alternates the first half with the second
    /// half in reverse: positions hold q1, qn, q2, q(n-1), ...
    pub fn new(layout: &LatticeLayout, n: usize, placement: Placement) -> Result<Self> {
        if n > layout.len() {
            return Err(Error::Capacity(format!(
                "{n} qubits do not fit in {} sites",
                layout.len()
            )));
        }
        let data: Vec<usize> = match placement {
            Placement::Canonical => (0..n).collect(),
            Placement::Interleaved => {
                if layout.dimension() != 1 {
                    return Err(Error::UnsupportedStrategy(format!(
                        "interleaved placement needs a chain, layout is {}-dimensional",
                        layout.dimension()
                    )));
                }
                let order = interleaved_order(n);
                let mut data = vec![0; n];
                for (pos, &q) in order.iter().enumerate() {
                    data[q] = pos;
                }
                data
            }
        };
        let mut roles = vec![Role::Unused; layout.len()];
        for (q, &s) in data.iter().enumerate() {
            roles[s] = Role::Data(q);
        }
        Ok(QubitAssignment {
            layout: layout.clone(),
            roles,
            data,
            ancillae: Vec::new(),
            placement,
        })
    }

    /// Canonical fanout placement: data qubits on sites whose first
    /// coordinate is even, each with its ancilla one step further along the
    /// first axis. Data qubits are numbered in row-major order.
    pub fn fanout(layout: &LatticeLayout, n: usize) -> Result<Self> {
        let stride0 = layout.strides()[0];
        let e0 = layout.extents()[0] as i64;
        let mut data = Vec::with_capacity(n);
        let mut ancillae = Vec::with_capacity(n);
        for site in 0..layout.len() {
            if data.len() == n {
                break;
            }
            let c0 = layout.raw_coord(site)[0];
            if c0 % 2 == 0 && c0 + 1 < e0 {
                data.push(site);
                ancillae.push(site + stride0);
            }
        }
        if data.len() < n {
            return Err(Error::Capacity(format!(
                "layout {} holds only {} data/ancilla pairs, need {n}",
                layout.id(),
                data.len()
            )));
        }
        let mut roles = vec![Role::Unused; layout.len()];
        for (q, (&d, &a)) in data.iter().zip(&ancillae).enumerate() {
            roles[d] = Role::Data(q);
            roles[a] = Role::Ancilla(q);
        }
        Ok(QubitAssignment {
            layout: layout.clone(),
            roles,
            data,
            ancillae,
            placement: Placement::Canonical,
        })
    }

    pub fn layout(&self) -> &LatticeLayout {
        &self.layout
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn role(&self, site: usize) -> Result<Role> {
        check_index(site, self.roles.len())?;
        Ok(self.roles[site])
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Site of logical data qubit `q` (0-based).
    pub fn data_site(&self, q: usize) -> Result<usize> {
        check_index(q, self.data.len())?;
        Ok(self.data[q])
    }

    pub fn data_sites(&self) -> &[usize] {
        &self.data
    }

    pub fn ancilla_sites(&self) -> &[usize] {
        &self.ancillae
    }

    pub fn has_ancillae(&self) -> bool {
        !self.ancillae.is_empty()
    }
}

/// Logical qubit (0-based) held at each chain position under interleaving.
pub fn interleaved_order(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        order.push(lo);
        lo += 1;
        if lo < hi {
            hi -= 1;
            order.push(hi);
        }
    }
    order
}
