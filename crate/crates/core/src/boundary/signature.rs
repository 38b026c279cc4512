//! Boundary bookkeeping: orientations, open connected components and
//! linear orderings of boundary components.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type BoundaryId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// ε = +1
    Outbound,
    /// ε = −1
    Inbound,
}

impl Orientation {
    pub fn epsilon(self) -> f64 {
        match self {
            Orientation::Outbound => 1.0,
            Orientation::Inbound => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub id: BoundaryId,
    pub orientation: Orientation,
}

impl Boundary {
    pub fn outbound(id: BoundaryId) -> Self {
        Self { id, orientation: Orientation::Outbound }
    }

    pub fn inbound(id: BoundaryId) -> Self {
        Self { id, orientation: Orientation::Inbound }
    }

    pub fn epsilon(&self) -> f64 {
        self.orientation.epsilon()
    }
}

/// One open connected component: its boundary components, kept sorted by id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSignature {
    pub id: u32,
    pub boundaries: Vec<Boundary>,
}

impl ComponentSignature {
    pub fn new(id: u32, mut boundaries: Vec<Boundary>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::SignatureMismatch(format!(
                "component {id} has no boundary components"
            )));
        }
        boundaries.sort_by_key(|b| b.id);
        if boundaries.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::SignatureMismatch(format!(
                "component {id} repeats a boundary id"
            )));
        }
        Ok(Self { id, boundaries })
    }

    pub fn min_id(&self) -> BoundaryId {
        self.boundaries[0].id
    }
}

/// The set of open connected components, in canonical order (components
/// sorted by smallest boundary id and numbered in that order, boundaries
/// sorted by id).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    components: Vec<ComponentSignature>,
}

impl Signature {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut components: Vec<ComponentSignature>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for comp in &components {
            for b in &comp.boundaries {
                if !seen.insert(b.id) {
                    return Err(Error::IdCollision(b.id));
                }
            }
        }
        components.sort_by_key(|c| c.min_id());
        for (k, c) in components.iter_mut().enumerate() {
            c.id = k as u32;
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[ComponentSignature] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Boundaries in canonical (layout) order.
    pub fn boundaries(&self) -> impl Iterator<Item = &Boundary> {
        self.components.iter().flat_map(|c| c.boundaries.iter())
    }

    pub fn boundary_count(&self) -> usize {
        self.components.iter().map(|c| c.boundaries.len()).sum()
    }

    pub fn ids(&self) -> BTreeSet<BoundaryId> {
        self.boundaries().map(|b| b.id).collect()
    }

    pub fn boundary(&self, id: BoundaryId) -> Option<&Boundary> {
        self.boundaries().find(|b| b.id == id)
    }

    /// Index of the component containing boundary `id`.
    pub fn component_of(&self, id: BoundaryId) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.boundaries.iter().any(|b| b.id == id))
    }

    /// Position of boundary `id` in canonical order.
    pub fn position(&self, id: BoundaryId) -> Option<usize> {
        self.boundaries().position(|b| b.id == id)
    }

    /// Default ordering: canonical order.
    pub fn canonical_ordering(&self) -> Ordering {
        Ordering::new(self.boundaries().map(|b| b.id).collect()).expect("ids are unique")
    }

    /// Relabels boundary ids through `map` (ids absent from `map` kept).
    pub fn relabel(&self, map: &BTreeMap<BoundaryId, BoundaryId>) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .map(|c| {
                ComponentSignature::new(
                    c.id,
                    c.boundaries
                        .iter()
                        .map(|b| Boundary {
                            id: *map.get(&b.id).unwrap_or(&b.id),
                            orientation: b.orientation,
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }
}

/// A linear order on a set of boundary ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    ids: Vec<BoundaryId>,
}

impl Ordering {
    pub fn new(ids: Vec<BoundaryId>) -> Result<Self> {
        let set: BTreeSet<_> = ids.iter().collect();
        if set.len() != ids.len() {
            return Err(Error::OrderingMismatch("repeated id in ordering".into()));
        }
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[BoundaryId] {
        &self.ids
    }

    pub fn id_set(&self) -> BTreeSet<BoundaryId> {
        self.ids.iter().copied().collect()
    }

    /// Rank of each id in this order.
    pub fn ranks(&self) -> BTreeMap<BoundaryId, usize> {
        self.ids.iter().enumerate().map(|(r, &id)| (id, r)).collect()
    }

    pub fn less(&self, a: BoundaryId, b: BoundaryId) -> bool {
        let pa = self.ids.iter().position(|&x| x == a);
        let pb = self.ids.iter().position(|&x| x == b);
        matches!((pa, pb), (Some(x), Some(y)) if x < y)
    }

    /// Moves the least element to the greatest position.
    pub fn rotated(&self) -> Self {
        let mut ids = self.ids.clone();
        if !ids.is_empty() {
            ids.rotate_left(1);
        }
        Self { ids }
    }

    /// Exchanges two ids.
    pub fn swapped(&self, a: BoundaryId, b: BoundaryId) -> Result<Self> {
        let pa = self.ids.iter().position(|&x| x == a).ok_or(Error::UnknownBoundary(a))?;
        let pb = self.ids.iter().position(|&x| x == b).ok_or(Error::UnknownBoundary(b))?;
        let mut ids = self.ids.clone();
        ids.swap(pa, pb);
        Ok(Self { ids })
    }

    /// Removes `j` and reinserts it immediately after `i`.
    pub fn with_following(&self, i: BoundaryId, j: BoundaryId) -> Result<Self> {
        if !self.ids.contains(&j) {
            return Err(Error::UnknownBoundary(j));
        }
        let mut ids: Vec<_> = self.ids.iter().copied().filter(|&x| x != j).collect();
        let pi = ids.iter().position(|&x| x == i).ok_or(Error::UnknownBoundary(i))?;
        ids.insert(pi + 1, j);
        Ok(Self { ids })
    }

    /// The order with the listed ids removed.
    pub fn without(&self, drop: &BTreeSet<BoundaryId>) -> Self {
        Self {
            ids: self.ids.iter().copied().filter(|x| !drop.contains(x)).collect(),
        }
    }

    pub fn concat(&self, other: &Ordering) -> Result<Self> {
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        Self::new(ids)
    }

    pub fn relabel(&self, map: &BTreeMap<BoundaryId, BoundaryId>) -> Result<Self> {
        Self::new(self.ids.iter().map(|id| *map.get(id).unwrap_or(id)).collect())
    }

    pub(crate) fn check_covers(&self, ids: &BTreeSet<BoundaryId>) -> Result<()> {
        if &self.id_set() != ids {
            return Err(Error::OrderingMismatch(format!(
                "ordering {:?} does not match boundary ids {:?}",
                self.ids, ids
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_sorted_canonically() {
        let a = ComponentSignature::new(7, vec![Boundary::inbound(5), Boundary::outbound(3)]).unwrap();
        let b = ComponentSignature::new(1, vec![Boundary::outbound(1)]).unwrap();
        let s = Signature::new(vec![a, b]).unwrap();
        let ids: Vec<_> = s.boundaries().map(|b| b.id).collect();
        assert_eq!(ids, vec![1, 3, 5]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = ComponentSignature::new(0, vec![Boundary::outbound(1)]).unwrap();
        let b = ComponentSignature::new(1, vec![Boundary::inbound(1)]).unwrap();
        assert!(matches!(Signature::new(vec![a, b]), Err(Error::IdCollision(1))));
        assert!(ComponentSignature::new(0, vec![]).is_err());
    }

    #[test]
    fn following_moves_second_id() {
        let o = Ordering::new(vec![4, 1, 2, 3]).unwrap();
        assert_eq!(o.with_following(1, 4).unwrap().ids(), &[1, 4, 2, 3]);
        assert_eq!(o.rotated().ids(), &[1, 2, 3, 4]);
    }
}
