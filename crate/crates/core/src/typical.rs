//! The multiset `T` used to reach high-degree vertices: uniform draws
//! retried until the incident-edge total passes the `m(T)` test.

use rand::Rng;
use thiserror::Error;

use crate::graph::{Probe, VertexId};
use crate::params::Params;
use crate::sampler::{EdgeSampler, VertexMultiset};

#[derive(Debug, Error, PartialEq)]
#[error("no candidate multiset passed the m(T) bound in {attempts} attempts")]
pub struct TypicalSetFailure {
    pub attempts: usize,
}

#[derive(Clone, Debug)]
pub struct TypicalSet {
    sampler: EdgeSampler,
    /// `T = V`, taken deterministically because `t ≥ n`.
    whole: bool,
    attempts: usize,
}

impl TypicalSet {
    pub fn sampler(&self) -> &EdgeSampler {
        &self.sampler
    }

    pub fn multiset(&self) -> &VertexMultiset {
        self.sampler.multiset()
    }

    /// `t`, the size of the multiset.
    pub fn size(&self) -> usize {
        self.sampler.multiset().len()
    }

    pub fn m_of(&self) -> u64 {
        self.sampler.m_of()
    }

    pub fn is_whole_vertex_set(&self) -> bool {
        self.whole
    }

    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Builds a typical set from an explicit multiset, bypassing the
    /// acceptance test. Meant for experiments that pin `T`.
    pub fn from_multiset(multiset: VertexMultiset, n: usize) -> Self {
        let whole = multiset.len() == n
            && multiset
                .members()
                .iter()
                .enumerate()
                .all(|(i, &v)| v as usize == i);
        Self {
            sampler: EdgeSampler::new(multiset),
            whole,
            attempts: 0,
        }
    }
}

/// Draws up to `params.typical_attempts` uniform multisets of size
/// `params.t` and keeps the first with `m(T_i) ≤ (t/n)·4m̄`. When `t ≥ n`
/// the whole vertex set is used instead.
pub fn sample_degrees_typical<P: Probe, R: Rng + ?Sized>(
    probe: &P,
    params: &Params,
    rng: &mut R,
) -> Result<TypicalSet, TypicalSetFailure> {
    let n = probe.n();
    if params.t >= n {
        let multiset = VertexMultiset::all(probe);
        if multiset.m_of() as f64 > params.typical_edge_bound(n) {
            return Err(TypicalSetFailure { attempts: 1 });
        }
        return Ok(TypicalSet {
            sampler: EdgeSampler::new(multiset),
            whole: true,
            attempts: 1,
        });
    }

    let bound = params.typical_edge_bound(params.t);
    for attempt in 1..=params.typical_attempts {
        let members: Vec<VertexId> = (0..params.t).map(|_| probe.uniform_vertex(rng)).collect();
        let multiset = VertexMultiset::with_degrees(probe, members);
        if multiset.m_of() as f64 <= bound {
            return Ok(TypicalSet {
                sampler: EdgeSampler::new(multiset),
                whole: false,
                attempts: attempt,
            });
        }
    }
    Err(TypicalSetFailure {
        attempts: params.typical_attempts,
    })
}
