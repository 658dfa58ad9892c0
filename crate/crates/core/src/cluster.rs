//! Multivariate clusters from per-coordinate fusion patterns.
//!
//! Each data coordinate is clustered on its own; observations whose group
//! labels agree in every coordinate share a merged cluster. An observation
//! that sits alone in its merged cluster although each of its univariate
//! groups has other members is flagged as a split: the coordinates disagree
//! about where it belongs.

use std::collections::HashMap;

use thiserror::Error;

use crate::continuation::canonical_labels;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("no coordinate patterns supplied")]
    NoCoordinates,
    #[error("coordinate {coordinate} labels {got} observations, expected {expected}")]
    LengthMismatch {
        coordinate: usize,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    /// `per_coordinate_labels[i][d]`: group of observation `i` in coordinate `d`.
    pub per_coordinate_labels: Vec<Vec<usize>>,
    /// Merged labels, numbered from 1 by first appearance.
    pub merged_labels: Vec<usize>,
    pub split_flags: Vec<bool>,
}

impl ClusterAssignment {
    pub fn n(&self) -> usize {
        self.merged_labels.len()
    }

    pub fn group_count(&self) -> usize {
        self.merged_labels.iter().copied().max().unwrap_or(0)
    }

    /// Merged group sizes, indexed by label − 1.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count()];
        for &l in &self.merged_labels {
            sizes[l - 1] += 1;
        }
        sizes
    }
}

/// Merges one label vector per coordinate (each of length `n`).
pub fn extract_clusters(coordinate_labels: &[Vec<usize>]) -> Result<ClusterAssignment, ClusterError> {
    let first = coordinate_labels.first().ok_or(ClusterError::NoCoordinates)?;
    let n = first.len();
    for (d, labels) in coordinate_labels.iter().enumerate() {
        if labels.len() != n {
            return Err(ClusterError::LengthMismatch {
                coordinate: d,
                expected: n,
                got: labels.len(),
            });
        }
    }
    let per_coordinate: Vec<Vec<usize>> = (0..n)
        .map(|i| coordinate_labels.iter().map(|c| c[i]).collect())
        .collect();

    let mut tuple_ids: HashMap<&[usize], usize> = HashMap::new();
    let raw: Vec<usize> = per_coordinate
        .iter()
        .map(|t| {
            let next = tuple_ids.len();
            *tuple_ids.entry(t.as_slice()).or_insert(next)
        })
        .collect();
    let merged_labels = canonical_labels(&raw);

    let mut merged_sizes: HashMap<usize, usize> = HashMap::new();
    for &l in &merged_labels {
        *merged_sizes.entry(l).or_default() += 1;
    }
    let univariate_sizes: Vec<HashMap<usize, usize>> = coordinate_labels
        .iter()
        .map(|labels| {
            let mut m = HashMap::new();
            for &l in labels {
                *m.entry(l).or_default() += 1;
            }
            m
        })
        .collect();
    let split_flags = (0..n)
        .map(|i| {
            merged_sizes[&merged_labels[i]] == 1
                && coordinate_labels
                    .iter()
                    .zip(&univariate_sizes)
                    .all(|(labels, sizes)| sizes[&labels[i]] >= 2)
        })
        .collect();

    Ok(ClusterAssignment {
        per_coordinate_labels: per_coordinate,
        merged_labels,
        split_flags,
    })
}
