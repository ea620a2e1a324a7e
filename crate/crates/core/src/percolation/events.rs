//! Crossing events. The probe site is a marked hole: its own color is
//! never consulted.

use alloc::vec;
use alloc::vec::Vec;

use super::{CrossingSpec, PercolationError, Prepared};
use crate::domain_approx::ArcLabel;
use crate::lattice::{Color, Coloring, NONE};

/// Reusable buffers for event evaluation on one domain.
#[derive(Debug, Clone, Default)]
pub struct EventScratch {
    dual: Vec<u32>,
    seen: Vec<u32>,
    stamp: u32,
    queue: Vec<u32>,
}

impl EventScratch {
    fn reset(&mut self, n: usize) -> u32 {
        if self.dual.len() != n || self.stamp == u32::MAX {
            self.dual = vec![0; n];
            self.seen = vec![0; n];
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }
}

/// Whether a path of `spec.color` joins the two other arcs and separates
/// the probe from the excluded arc.
///
/// Evaluated through the dual: collect the sites of the opposite color
/// connected to the excluded arc; the event holds iff the probe is not
/// next to the excluded arc or to that set, and the probe's component in
/// the rest of the domain reaches both other arcs.
pub fn crossing_event(
    prep: &Prepared,
    col: &Coloring,
    spec: &CrossingSpec,
    scratch: &mut EventScratch,
) -> Result<bool, PercolationError> {
    let probe = prep.index_of(spec.probe).ok_or(PercolationError::ProbeOutside(spec.probe))?;
    let (x, others) = spec.function.arcs();
    Ok(holds(prep, col, x, others, spec.color, probe, scratch))
}

pub(crate) fn holds(
    prep: &Prepared,
    col: &Coloring,
    x: ArcLabel,
    others: [ArcLabel; 2],
    color: Color,
    probe: usize,
    scratch: &mut EventScratch,
) -> bool {
    if prep.touches(probe, x) {
        return false;
    }
    let n = prep.len();
    let r = prep.region();
    let stamp = scratch.reset(n);
    let dual = color.flip();
    let EventScratch { dual: mark, seen, queue, .. } = scratch;

    queue.clear();
    for i in 0..n {
        if i != probe && col.colors[i] == dual && prep.touches(i, x) {
            mark[i] = stamp;
            queue.push(i as u32);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let i = queue[head] as usize;
        head += 1;
        for &j in &r.adjacency()[i] {
            if j == NONE {
                continue;
            }
            let j = j as usize;
            if j != probe && mark[j] != stamp && col.colors[j] == dual {
                mark[j] = stamp;
                queue.push(j as u32);
            }
        }
    }
    if r.adjacency()[probe].iter().any(|&j| j != NONE && mark[j as usize] == stamp) {
        return false;
    }

    let need = (1u8 << others[0] as u8) | (1u8 << others[1] as u8);
    let mut got = 0u8;
    queue.clear();
    queue.push(probe as u32);
    seen[probe] = stamp;
    let mut head = 0;
    while head < queue.len() {
        let i = queue[head] as usize;
        head += 1;
        for l in others {
            if prep.touches(i, l) {
                got |= 1 << l as u8;
            }
        }
        if got == need {
            return true;
        }
        for &j in &r.adjacency()[i] {
            if j == NONE {
                continue;
            }
            let j = j as usize;
            if seen[j] != stamp && mark[j] != stamp {
                seen[j] = stamp;
                queue.push(j as u32);
            }
        }
    }
    false
}

/// Reference evaluation by brute force over clusters: the event holds iff
/// some cluster of `spec.color` (not containing the probe) meets both
/// other arcs and its removal cuts the probe off from every site next to
/// the excluded arc.
pub fn crossing_event_direct(prep: &Prepared, col: &Coloring, spec: &CrossingSpec) -> Result<bool, PercolationError> {
    let probe = prep.index_of(spec.probe).ok_or(PercolationError::ProbeOutside(spec.probe))?;
    let (x, others) = spec.function.arcs();
    if prep.touches(probe, x) {
        return Ok(false);
    }
    let r = prep.region();
    let n = prep.len();
    let mut cluster = vec![NONE; n];
    let mut next = 0u32;
    for s in 0..n {
        if s == probe || cluster[s] != NONE || col.colors[s] != spec.color {
            continue;
        }
        let mut members = vec![s];
        cluster[s] = next;
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            k += 1;
            for &j in &r.adjacency()[i] {
                let j = j as usize;
                if j != NONE as usize && j != probe && cluster[j] == NONE && col.colors[j] == spec.color {
                    cluster[j] = next;
                    members.push(j);
                }
            }
        }
        let joins = others.iter().all(|&l| members.iter().any(|&i| prep.touches(i, l)));
        if joins && cut_off(prep, probe, x, |i| cluster[i] == next) {
            return Ok(true);
        }
        next += 1;
    }
    Ok(false)
}

fn cut_off(prep: &Prepared, probe: usize, x: ArcLabel, removed: impl Fn(usize) -> bool) -> bool {
    let r = prep.region();
    let mut seen = vec![false; prep.len()];
    let mut stack = vec![probe];
    seen[probe] = true;
    while let Some(i) = stack.pop() {
        if prep.touches(i, x) {
            return false;
        }
        for &j in &r.adjacency()[i] {
            if j != NONE && !seen[j as usize] && !removed(j as usize) {
                seen[j as usize] = true;
                stack.push(j as usize);
            }
        }
    }
    true
}
