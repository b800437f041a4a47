//! A release triple that records which release was read, in order.

use std::cell::RefCell;

use timelime_core::{AlignedTriple, ReleaseDataset, ReleaseTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Release {
    X,
    Y,
    Z,
}

pub struct TrackingTriple<'a> {
    inner: &'a AlignedTriple,
    log: RefCell<Vec<Release>>,
}

impl<'a> TrackingTriple<'a> {
    pub fn new(inner: &'a AlignedTriple) -> Self {
        TrackingTriple { inner, log: RefCell::new(Vec::new()) }
    }

    pub fn accesses(&self) -> Vec<Release> {
        self.log.borrow().clone()
    }

    /// `z` was read, and never before the last read of `x`.
    pub fn z_read_last(&self) -> bool {
        let log = self.log.borrow();
        match log.iter().position(|r| *r == Release::Z) {
            None => false,
            Some(first) => !log[first..].contains(&Release::X),
        }
    }

    fn note(&self, r: Release) {
        self.log.borrow_mut().push(r);
    }
}

impl ReleaseTriple for TrackingTriple<'_> {
    fn project_name(&self) -> &str {
        self.inner.project_name()
    }
    fn x(&self) -> &ReleaseDataset {
        self.note(Release::X);
        self.inner.x()
    }
    fn y(&self) -> &ReleaseDataset {
        self.note(Release::Y);
        self.inner.y()
    }
    fn z(&self) -> &ReleaseDataset {
        self.note(Release::Z);
        self.inner.z()
    }
}
