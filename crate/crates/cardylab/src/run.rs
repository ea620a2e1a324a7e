//! Experiment orchestration.

use std::collections::BTreeSet;
use std::time::Instant;

use cardylab_core::cardy_oracle::{build_triangle_map, equicontinuity_sweep, perturb_slit, TriangleMap};
use cardylab_core::domain_approx::checks::probe_grid;
use cardylab_core::domain_approx::{
    canonical_approximation, check_homotopical_consistency, check_interior_conditions, check_kernel_convergence,
    check_well_organized, minkowski_dimension, ApproxError, BoundaryEdge, CheckError, ContinuousDomain, CurveTrace, DiscreteDomain,
    MarkName, WellOrganizedReport,
};
use cardylab_core::exec::Executor;
use cardylab_core::geometry::{Point, Polyline};
use cardylab_core::lattice::{Color, LatticeScale};
use cardylab_core::percolation::{
    boundary_decay_profile, estimate_cardy, explore, harris_ring_probability, AnnulusFamily, CrossingEstimate,
    ExploreStop,
};

use crate::config::{derive_seed, ExperimentConfig, ExperimentKind};
use crate::domain_file::{DomainFile, MarkSpec};
use crate::error::HarnessError;
use crate::report::{AuditRecord, EnvelopeRow, Row, SweepReport, Timings, TraceRecord, Verdict, VERSION};

/// Multiple of the combined half-width used for "beyond noise" checks.
pub const NOISE_K: f64 = 3.0;

struct Clock {
    start: Instant,
    stages: Vec<(String, f64)>,
}

impl Clock {
    fn new() -> Self {
        Clock { start: Instant::now(), stages: Vec::new() }
    }

    fn lap(&mut self, name: impl Into<String>) {
        let now = Instant::now();
        self.stages.push((name.into(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

fn xy(p: Point) -> [f64; 2] {
    [p.x, p.y]
}

fn scale(eps: f64) -> Result<LatticeScale, HarnessError> {
    LatticeScale::new(eps).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Point of arc C halfway (by length) between a and b.
pub fn arc_c_midpoint(dom: &ContinuousDomain) -> (f64, Point) {
    let (ta, tb) = (dom.mark_param(MarkName::A), dom.mark_param(MarkName::B));
    let t = ta + (tb - ta).rem_euclid(dom.perimeter()) / 2.0;
    (t, dom.point_at(t))
}

/// Unit normal pointing into the domain at boundary parameter `t`.
fn inward_normal(dom: &ContinuousDomain, t: f64) -> Point {
    let h = 1e-6 * dom.perimeter();
    let d = dom.point_at(t + h) - dom.point_at(t - h);
    let n = Point::new(-d.y, d.x);
    n * (1.0 / n.norm())
}

/// Runs the experiment and returns its report with 12-digit values, plus
/// stage timings.
pub fn run<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<(SweepReport, Timings), HarnessError> {
    cfg.validate()?;
    let rec = &cfg.record;
    let mut clock = Clock::new();
    let dom = rec.domain.build()?;
    clock.lap("domain");
    let mut report = SweepReport::empty(rec.clone());
    match rec.kind {
        ExperimentKind::CardySweep => cardy_sweep(cfg, &dom, exec, &mut report, &mut clock)?,
        ExperimentKind::BoundaryDecay => boundary_decay(cfg, &dom, exec, &mut report, &mut clock)?,
        ExperimentKind::HarrisRings => harris_rings(cfg, &dom, exec, &mut report, &mut clock)?,
        ExperimentKind::Exploration => exploration(cfg, &dom, &mut report, &mut clock)?,
        ExperimentKind::Equicontinuity => equicontinuity(cfg, exec, &mut report, &mut clock)?,
        ExperimentKind::ApproxAudit => approx_audit(cfg, &dom, &mut report, &mut clock)?,
    }
    let report = crate::num::rounded(&report);
    let timings = Timings {
        config_hash: report.config_hash.clone(),
        seed: report.seed,
        version: VERSION.to_string(),
        threads: 0,
        stages: clock.stages,
    };
    Ok((report, timings))
}

/// `|C_eps - C0|` may not rise by more than `NOISE_K` combined
/// half-widths from one scale to the next.
pub fn envelope_nonincreasing(rows: &[Row]) -> bool {
    rows.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        match (a.abs_err, b.abs_err) {
            (Some(ea), Some(eb)) => eb <= ea + NOISE_K * a.estimate.half_width.hypot(b.estimate.half_width),
            _ => true,
        }
    })
}

fn audit(dd: &DiscreteDomain, dom: &ContinuousDomain) -> Result<AuditRecord, HarnessError> {
    let interior = check_interior_conditions(dd, dom);
    let homotopy = homotopy_probe(dom)
        .filter(|&(_, _, star)| dd.scale().eps() <= star)
        .map(|(q, big, star)| check_homotopical_consistency(dd, dom, q, big, star))
        .transpose()?;
    let passed = interior.passed() && homotopy.as_ref().is_none_or(|h| h.consistent);
    Ok(AuditRecord { eps: dd.scale().eps(), sites: dd.principal_len(), interior, homotopy, passed })
}

/// Point inside the middle of arc C, with the disk radius around a and b
/// and the clearance used by the homotopy surrogate. The surrogate only
/// resolves the clearance once eps is below it, so coarser scales skip it.
fn homotopy_probe(dom: &ContinuousDomain) -> Option<(Point, f64, f64)> {
    let (t, m) = arc_c_midpoint(dom);
    let (a, b) = (dom.mark_point(MarkName::A)?, dom.mark_point(MarkName::B)?);
    let big = 0.9 * m.dist(a).min(m.dist(b));
    let star = big / 10.0;
    let q = m + inward_normal(dom, t) * (0.5 * star);
    (star > 0.0 && q.dist(a).min(q.dist(b)) > big).then_some((q, big, star))
}

fn cardy_sweep<E: Executor>(
    cfg: &ExperimentConfig,
    dom: &ContinuousDomain,
    exec: &E,
    report: &mut SweepReport,
    clock: &mut Clock,
) -> Result<(), HarnessError> {
    let rec = &cfg.record;
    let d = dom.mark_point(MarkName::D).ok_or(HarnessError::Config("cardy sweep needs mark d".into()))?;
    let map = build_triangle_map(dom, rec.params.oracle_tol)?;
    let c0 = map.probe_value()?;
    report.oracle = Some(c0);
    clock.lap("oracle");
    for (k, &eps) in rec.scales.iter().enumerate() {
        let dd = canonical_approximation(dom, scale(eps)?)?;
        report.audits.push(audit(&dd, dom)?);
        let est = estimate_cardy(&dd, rec.samples, derive_seed(rec.seed, k as u64), exec)?;
        report.rows.push(Row::new(eps, 0, xy(d), 0.0, est, Some(c0.value)));
        clock.lap(format!("scale {eps}"));
    }
    let last = report.rows.last().and_then(|r| r.abs_err).unwrap_or(0.0);
    report.verdict = Some(Verdict::Envelope { nonincreasing: envelope_nonincreasing(&report.rows), final_abs_err: last });
    Ok(())
}

/// Probe points on the decay ray, from near its start to near its end,
/// kept `1.5 eps` away from both ends.
pub fn decay_probes(from: Point, to: Point, count: usize, eps: f64) -> Vec<(f64, Point)> {
    let len = from.dist(to);
    let margin = (1.5 * eps / len).min(0.25);
    (0..count)
        .map(|i| {
            let t = if count == 1 { 0.5 } else { margin + (1.0 - 2.0 * margin) * i as f64 / (count - 1) as f64 };
            (t, from.lerp(to, t))
        })
        .collect()
}

fn boundary_decay<E: Executor>(
    cfg: &ExperimentConfig,
    dom: &ContinuousDomain,
    exec: &E,
    report: &mut SweepReport,
    clock: &mut Clock,
) -> Result<(), HarnessError> {
    let rec = &cfg.record;
    let (from, to) = match rec.params.ray {
        Some([p, q]) => (Point::new(p[0], p[1]), Point::new(q[0], q[1])),
        None => (dom.mark_point(MarkName::C).expect("c is marked"), arc_c_midpoint(dom).1),
    };
    let finest = *rec.scales.last().expect("validated");
    let probes = decay_probes(from, to, rec.params.probes, finest);
    let map = build_triangle_map(dom, rec.params.oracle_tol).ok();
    let c0: Vec<Option<f64>> =
        probes.iter().map(|(_, p)| map.as_ref().and_then(|m| u_at(m, dom, *p))).collect();
    clock.lap("oracle");
    let points: Vec<Point> = probes.iter().map(|p| p.1).collect();
    for (k, &eps) in rec.scales.iter().enumerate() {
        let dd = canonical_approximation(dom, scale(eps)?)?;
        let ests = boundary_decay_profile(&dd, &points, rec.samples, derive_seed(rec.seed, k as u64), exec)?;
        for (i, est) in ests.into_iter().enumerate() {
            report.rows.push(Row::new(eps, i, xy(probes[i].1), probes[i].0, est, c0[i]));
        }
        clock.lap(format!("scale {eps}"));
    }
    Ok(())
}

/// Continuum `u`, clamped to `[0, 1]`; `None` off the domain.
fn u_at(map: &TriangleMap, dom: &ContinuousDomain, p: Point) -> Option<f64> {
    if dom.distance_to_boundary(p) <= dom.tolerance() {
        return None;
    }
    map.u(p).ok().map(|u| u.clamp(0.0, 1.0))
}

fn harris_rings<E: Executor>(
    cfg: &ExperimentConfig,
    dom: &ContinuousDomain,
    exec: &E,
    report: &mut SweepReport,
    clock: &mut Clock,
) -> Result<(), HarnessError> {
    let rec = &cfg.record;
    let p = &rec.params;
    let center = p.ring_center.map_or_else(|| arc_c_midpoint(dom).1, |c| Point::new(c[0], c[1]));
    let (lo, hi) = dom.outer().bbox();
    let side = p.ring_side.unwrap_or(0.9 * (hi.x - lo.x).min(hi.y - lo.y));
    let fam = AnnulusFamily::with_ratio(center, side, 2, p.ring_ratio)?;
    let near = dom.nearest(center);
    let assist = (near.dist <= dom.tolerance()).then(|| dom.label_at(near.param));
    let color = if assist == Some(cardylab_core::domain_approx::ArcLabel::B) { Color::Blue } else { Color::Yellow };
    for (k, &eps) in rec.scales.iter().enumerate() {
        let dd = canonical_approximation(dom, scale(eps)?)?;
        let est = harris_ring_probability(&dd, &fam, 0, color, assist, rec.samples, derive_seed(rec.seed, k as u64), exec)?;
        report.rows.push(Row::new(eps, 0, xy(center), p.ring_ratio, est, None));
        clock.lap(format!("scale {eps}"));
    }
    let ests: Vec<&CrossingEstimate> = report.rows.iter().map(|r| &r.estimate).collect();
    let consistent = ests.iter().enumerate().all(|(i, a)| ests[i + 1..].iter().all(|b| a.agrees_with(b, NOISE_K)));
    let min_value = ests.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    report.verdict = Some(Verdict::Plateau { consistent, min_value });
    Ok(())
}

/// Positions on the principal cycle of the faces the slit left on one
/// side.
fn face_positions(dd: &DiscreteDomain, trace: &CurveTrace, left: bool) -> Vec<usize> {
    let faces: BTreeSet<BoundaryEdge> = trace
        .edges
        .iter()
        .filter_map(|e| {
            let k = e.dir()?;
            Some(if left {
                BoundaryEdge { site: e.left, dir: k as u8 }
            } else {
                BoundaryEdge { site: e.right, dir: ((k + 3) % 6) as u8 }
            })
        })
        .collect();
    let cyc = dd.boundary_cycle();
    (0..cyc.len()).filter(|&i| faces.contains(&cyc[i])).collect()
}

/// `pos` (positions on a cycle of length `n`) in walking order, starting
/// after the largest gap between consecutive positions.
fn in_run_order(pos: &[usize], n: usize) -> Vec<usize> {
    let m = pos.len();
    if m < 2 {
        return pos.to_vec();
    }
    let gap = |i: usize| (pos[(i + 1) % m] + n - pos[i]) % n;
    let widest = (0..m).max_by_key(|&i| (gap(i), usize::MAX - i)).expect("nonempty");
    (1..=m).map(|k| pos[(widest + k) % m]).collect()
}

/// Longest prefix of `trace` that leaves b and c on the principal
/// component. Cutting off b or c is monotone in the prefix length.
fn slit_prefix(dd: &DiscreteDomain, trace: &CurveTrace) -> Result<(DiscreteDomain, CurveTrace), HarnessError> {
    let prefix = |k: usize| CurveTrace { edges: trace.edges[..k].to_vec() };
    match dd.with_slit(trace) {
        Ok(s) => return Ok((s, trace.clone())),
        Err(ApproxError::MarkSwallowed(_)) => {}
        Err(e) => return Err(e.into()),
    }
    let (mut good, mut bad) = (0, trace.edges.len());
    while bad - good > 1 {
        let mid = (good + bad) / 2;
        match dd.with_slit(&prefix(mid)) {
            Ok(_) => good = mid,
            Err(ApproxError::MarkSwallowed(_)) => bad = mid,
            Err(e) => return Err(e.into()),
        }
    }
    let t = prefix(good);
    Ok((dd.with_slit(&t)?, t))
}

/// Face edges skipped at each end of a side before choosing p and p'.
const TRIM: usize = 2;

/// Well-organized report for one side of the slit. p and p' are the
/// outermost pair of its face edges on the principal cycle, after trimming,
/// that the check accepts; `None` if no pair qualifies.
fn check_side(
    dd: &DiscreteDomain,
    trace: &CurveTrace,
    left: bool,
    delta: f64,
) -> Result<Option<WellOrganizedReport>, HarnessError> {
    let run = in_run_order(&face_positions(dd, trace, left), dd.boundary_cycle().len());
    for k in TRIM..run.len() / 2 {
        match check_well_organized(dd, run[k], run[run.len() - 1 - k], delta) {
            Ok(r) => return Ok(Some(r)),
            Err(CheckError::InvalidParameters(_) | CheckError::NoConnector) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

/// Explores from a, slits the domain along the trace and checks both sides
/// of the slit with the well-organized test.
///
/// Stretches of the trace that touch the boundary cut pockets off the
/// principal component, taking face edges with them. The check runs on the
/// longest prefix whose two sides both stay checkable; a trace with no such
/// prefix fails.
pub fn check_trace(
    dd: &DiscreteDomain,
    seed: u64,
    stop: ExploreStop,
    index: usize,
) -> Result<TraceRecord, HarnessError> {
    let ex = explore(dd, seed, stop)?;
    let (_, full) = slit_prefix(dd, &ex.trace)?;
    let delta = 2.0 * dd.scale().eps();
    let step = (full.len() / 40).max(1);
    let (mut sides, mut kept) = (vec![None, None], 0);
    let mut k = full.len();
    while k > 0 {
        let t = CurveTrace { edges: full.edges[..k].to_vec() };
        let sd = match dd.with_slit(&t) {
            Ok(sd) => sd,
            Err(ApproxError::MarkSwallowed(_)) => {
                k = k.saturating_sub(step);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(l) = check_side(&sd, &t, true, delta)? {
            if let Some(r) = check_side(&sd, &t, false, delta)? {
                (sides, kept) = (vec![Some(l), Some(r)], k);
                break;
            }
        }
        k = k.saturating_sub(step);
    }
    let passed = sides.iter().all(|s| s.as_ref().is_some_and(|r| r.monochrome));
    Ok(TraceRecord { eps: dd.scale().eps(), index, seed, steps: ex.trace.len(), kept, stop: ex.stop, sides, passed })
}

fn exploration(
    cfg: &ExperimentConfig,
    dom: &ContinuousDomain,
    report: &mut SweepReport,
    clock: &mut Clock,
) -> Result<(), HarnessError> {
    let rec = &cfg.record;
    let p = &rec.params;
    let radius = p.target_radius.unwrap_or(dom.diameter() / 10.0);
    let stop = ExploreStop { max_steps: p.max_steps, target_radius: Some(radius) };
    for (k, &eps) in rec.scales.iter().enumerate() {
        let dd = canonical_approximation(dom, scale(eps)?)?;
        let base = derive_seed(rec.seed, k as u64);
        for i in 0..p.traces {
            report.traces.push(check_trace(&dd, derive_seed(base, i as u64), stop, i)?);
        }
        clock.lap(format!("scale {eps}"));
    }
    let failures = report.traces.iter().filter(|t| !t.passed).count();
    report.verdict = Some(Verdict::AllPassed { passed: failures == 0, failures });
    Ok(())
}

/// Base domain and slit of an equicontinuity run: the file's only slit,
/// which must start at mark a.
/// Base domain (slit removed, a moved to the slit's root) and the slit.
/// The file describes the slit domain itself, so a sits at the slit tip.
fn slit_setup(file: &DomainFile) -> Result<(ContinuousDomain, Polyline), HarnessError> {
    let [slit] = file.slits.as_slice() else {
        return Err(HarnessError::Config("equicontinuity needs exactly one slit, ending at mark a".into()));
    };
    let (root, tip) = (slit.points[0], *slit.points.last().expect("parsed slit"));
    if Point::new(tip[0], tip[1]).dist(Point::new(file.marks.a.point[0], file.marks.a.point[1])) > 1e-9 {
        return Err(HarnessError::Config("mark a must sit at the tip of the slit".into()));
    }
    let mut base = file.without_slits();
    base.marks.a = MarkSpec { point: root, side: None };
    let path = file.build()?.slits()[0].path.clone();
    Ok((base.build()?, path))
}

fn equicontinuity<E: Executor>(
    cfg: &ExperimentConfig,
    exec: &E,
    report: &mut SweepReport,
    clock: &mut Clock,
) -> Result<(), HarnessError> {
    let rec = &cfg.record;
    let p = &rec.params;
    let (base, gamma) = slit_setup(&rec.domain)?;
    let mut nonincreasing = true;
    let mut consistent = true;
    for (k, &eps) in rec.scales.iter().enumerate() {
        let seed = derive_seed(rec.seed, k as u64);
        let deltas = [eps, eps / 2.0, eps / 4.0];
        let mut families = Vec::new();
        for (j, &delta) in deltas.iter().enumerate() {
            let paths = (0..p.perturbations)
                .map(|i| perturb_slit(&base, &gamma, delta, derive_seed(seed ^ 0x5eed, (j * p.perturbations + i) as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            families.push((delta, paths));
        }
        let cont = equicontinuity_sweep(&base, &gamma, &families, p.oracle_tol)?;
        clock.lap(format!("continuum {eps}"));
        // Same seed on every slit: colorings agree site by site.
        let estimate = |path: &Polyline| -> Result<CrossingEstimate, HarnessError> {
            let dd = canonical_approximation(&base.slit_from_a(path.clone())?, scale(eps)?)?;
            Ok(estimate_cardy(&dd, rec.samples, seed, exec)?)
        };
        let base_est = estimate(&gamma)?;
        let at = xy(gamma.end());
        report.rows.push(Row::new(eps, 0, at, 0.0, base_est, Some(cont[0].base_value)));
        let mut prev: Option<(f64, f64)> = None;
        for ((delta, paths), row) in families.iter().zip(&cont) {
            let (mut worst, mut worst_hw) = (0.0f64, 0.0);
            for (i, path) in paths.iter().enumerate() {
                let est = estimate(path)?;
                                report.rows.push(Row::new(eps, i + 1, xy(path.end()), *delta, est, Some(row.values[i])));
                let diff = (est.value - base_est.value).abs();
                let hw = est.half_width.hypot(base_est.half_width);
                if diff > worst || (diff == worst && hw > worst_hw) {
                    worst = diff;
                    worst_hw = hw;
                }
            }
            let ok = (worst - row.max_diff).abs() <= NOISE_K * worst_hw.max(f64::MIN_POSITIVE);
            if let Some((prev_worst, prev_hw)) = prev {
                nonincreasing &= worst <= prev_worst + NOISE_K * prev_hw.hypot(worst_hw);
            }
            prev = Some((worst, worst_hw));
            consistent &= ok;
            report.envelopes.push(EnvelopeRow {
                eps,
                delta: *delta,
                perturbations: paths.len(),
                mc_max_diff: worst,
                mc_half_width: worst_hw,
                continuum_max_diff: row.max_diff,
                consistent: ok,
            });
        }
        clock.lap(format!("scale {eps}"));
    }
    report.verdict = Some(Verdict::Equicontinuity { nonincreasing, consistent });
    Ok(())
}

fn approx_audit(
    cfg: &ExperimentConfig,
    dom: &ContinuousDomain,
    report: &mut SweepReport,
    clock: &mut Clock,
) -> Result<(), HarnessError> {
    let rec = &cfg.record;
    let mut seq = Vec::new();
    for &eps in &rec.scales {
        let dd = canonical_approximation(dom, scale(eps)?)?;
        report.audits.push(audit(&dd, dom)?);
        seq.push(dd);
        clock.lap(format!("scale {eps}"));
    }
    if seq.len() >= 3 {
        report.kernel = Some(check_kernel_convergence(&seq, dom, &probe_grid(dom, 24))?);
    }
    let mut boundary = vec![dom.outer().boundary()];
    boundary.extend(dom.slits().iter().map(|s| s.path.clone()));
    let d = dom.diameter();
    let box_scales: Vec<f64> = (2..=9).map(|k| d / f64::from(1u32 << k)).collect();
    report.minkowski = minkowski_dimension(&boundary, &box_scales).ok();
    clock.lap("kernel");
    let failures = report.audits.iter().filter(|a| !a.passed).count()
        + usize::from(report.kernel.as_ref().is_some_and(|k| !k.passed()));
    report.verdict = Some(Verdict::AllPassed { passed: failures == 0, failures });
    Ok(())
}
