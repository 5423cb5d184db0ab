//! Ordered observation batches.

use crate::error::{Result, VoteError};

/// An ordered, non-empty collection of observations for one problem family.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<Z> {
    items: Vec<Z>,
}

impl<Z> SampleBatch<Z> {
    pub fn new(items: Vec<Z>) -> Result<Self> {
        if items.is_empty() {
            return Err(VoteError::InvalidArgument(
                "sample batch must contain at least one observation".into(),
            ));
        }
        Ok(Self { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Z] {
        &self.items
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Z> {
        self.items.iter()
    }

    /// First-half length used by the split variants: `floor(n / 2)`.
    pub fn split_point(&self) -> usize {
        self.items.len() / 2
    }

    /// Data visible to Phase I (and to epsilon selection): everything, or
    /// the first half under data splitting.
    pub fn phase1_items(&self, split: bool) -> &[Z] {
        if split {
            &self.items[..self.split_point()]
        } else {
            &self.items
        }
    }

    /// Data visible to Phase II voting: everything, or the second half
    /// under data splitting.
    pub fn phase2_items(&self, split: bool) -> &[Z] {
        if split {
            &self.items[self.split_point()..]
        } else {
            &self.items
        }
    }
}

impl<Z> std::ops::Index<usize> for SampleBatch<Z> {
    type Output = Z;

    fn index(&self, index: usize) -> &Z {
        &self.items[index]
    }
}
