//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --release --test acceptance -- 3 4`.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use cardylab::domain_file::MarkSpec;
use cardylab::{run, DomainFile, ExperimentConfig, ExperimentKind, Parallel, SweepReport, Verdict};
use cardylab_core::cardy_oracle::{build_triangle_map, cardy_rectangle, cardy_value_fem, triangle_vertices};
use cardylab_core::domain_approx::checks::Witness;
use cardylab_core::domain_approx::{
    canonical_approximation, check_interior_conditions, check_well_organized, ArcLabel, BoundaryEdge, BoundaryMark,
    ContinuousDomain, CurveTrace, DiscreteDomain, MarkName, Marks, TraceEdge,
};
use cardylab_core::geometry::{Point, Polygon};
use cardylab_core::lattice::{Color, Coloring, LatticeScale, SiteCoord, VertexId};
use cardylab_core::percolation::{
    crossing_event, crossing_event_direct, CrossingFunction, CrossingSpec, EventScratch, Prepared,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn domain(name: &str) -> DomainFile {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("domains").join(format!("{name}.json"))).unwrap()
}

fn config(kind: ExperimentKind, file: DomainFile, scales: &[f64], samples: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(kind, file, scales.to_vec(), samples, seed)
}

fn go(cfg: &ExperimentConfig) -> SweepReport {
    run(cfg, &Parallel::from_env()).unwrap().0
}

fn poly_domain(pts: &[(f64, f64)], a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> ContinuousDomain {
    let p = |q: (f64, f64)| Point::new(q.0, q.1);
    let n = pts.len() as f64;
    let z0 = Point::new(pts.iter().map(|q| q.0).sum::<f64>() / n, pts.iter().map(|q| q.1).sum::<f64>() / n);
    let marks =
        Marks { a: BoundaryMark::at(p(a)), b: BoundaryMark::at(p(b)), c: BoundaryMark::at(p(c)), d: Some(BoundaryMark::at(p(d))) };
    ContinuousDomain::new(Polygon::new(pts.iter().map(|&q| p(q)).collect()).unwrap(), vec![], marks, z0).unwrap()
}

fn square_crossing() -> Outcome {
    let r = go(&config(ExperimentKind::CardySweep, domain("square"), &[1.0 / 64.0], 100_000, 1));
    let row = &r.rows[0];
    let err = (row.estimate.value - 0.5).abs();
    outcome(
        err <= 0.01,
        format!("eps 1/64 n 1e5: C_eps {:.4} +/- {:.4}, |C_eps - 1/2| {:.4} <= 0.01", row.estimate.value, row.estimate.half_width, err),
    )
}

fn triangle_linearity() -> Outcome {
    let [_, b, c] = triangle_vertices();
    let mut pass = true;
    let mut parts = Vec::new();
    for t in [0.25, 0.5, 0.75] {
        let z = b + (c - b) * t;
        let mut file = domain("triangle");
        file.marks.d = Some(MarkSpec::at(Point::new(z.re, z.im)));
        let r = go(&config(ExperimentKind::CardySweep, file, &[1.0 / 64.0], 100_000, 2));
        let oracle = r.oracle.as_ref().unwrap().value;
        let est = r.rows[0].estimate.value;
        let ok = (est - t).abs() <= 0.02 && (oracle - t).abs() < 1e-6;
        pass &= ok;
        parts.push(format!("d at {t}: C_eps {est:.4} (C0 {oracle:.6})"));
    }
    outcome(pass, format!("eps 1/64 n 1e5, tolerance 0.02: {}", parts.join("; ")))
}

fn oracle_cross_validation() -> Outcome {
    let mut worst_rect = 0.0f64;
    for r in [0.5, 1.0, 2.0, 4.0] {
        let dom = poly_domain(&[(0.0, 0.0), (r, 0.0), (r, 1.0), (0.0, 1.0)], (0.0, 0.0), (r, 0.0), (0.0, 1.0), (r, 1.0));
        let sc = build_triangle_map(&dom, 1e-8).unwrap().probe_value().unwrap().value;
        worst_rect = worst_rect.max((sc - cardy_rectangle(r).value).abs());
    }
    let convex = [
        poly_domain(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], (0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)),
        poly_domain(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)], (0.0, 0.0), (2.0, 0.0), (0.0, 1.0), (2.0, 1.0)),
        poly_domain(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], (0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (1.0, 0.3)),
        poly_domain(
            &[(0.0, 0.0), (1.0, 0.0), (1.3, 0.8), (0.5, 1.4), (-0.3, 0.8)],
            (0.0, 0.0),
            (1.0, 0.0),
            (0.5, 1.4),
            (1.3, 0.8),
        ),
    ];
    let mut worst_fem = 0.0f64;
    for dom in &convex {
        let sc = build_triangle_map(dom, 1e-8).unwrap().probe_value().unwrap().value;
        worst_fem = worst_fem.max((sc - cardy_value_fem(dom, 16).unwrap().value).abs());
    }
    outcome(
        worst_rect <= 1e-4 && worst_fem <= 1e-3,
        format!("closed form vs conformal map max {worst_rect:.2e} <= 1e-4; finite elements vs conformal map max {worst_fem:.2e} <= 1e-3"),
    )
}

fn parallelogram(w: i32, h: i32) -> DiscreteDomain {
    let sites: Vec<_> = (0..h).flat_map(|v| (0..w).map(move |u| SiteCoord::new(u, v))).collect();
    let marks = [
        VertexId::corner(SiteCoord::new(0, 0), 4),
        VertexId::corner(SiteCoord::new(w - 1, 0), 4),
        VertexId::corner(SiteCoord::new(w - 1, h - 1), 1),
    ];
    DiscreteDomain::from_sites(sites, LatticeScale::new(1.0).unwrap(), marks, None).unwrap()
}

fn duality_exhaustive() -> Outcome {
    let dd = parallelogram(6, 3);
    let prep = Prepared::new(&dd).unwrap();
    let k = prep.len();
    let mut scratch = EventScratch::default();
    let probes = [SiteCoord::new(2, 1), SiteCoord::new(5, 1), SiteCoord::new(0, 2)];
    let (mut checked, mut bad) = (0u64, 0u64);
    for mask in 0u64..(1 << k) {
        let col = Coloring::from_mask(k, mask);
        for function in [CrossingFunction::U, CrossingFunction::V, CrossingFunction::W] {
            for color in [Color::Blue, Color::Yellow] {
                for &probe in &probes {
                    let s = CrossingSpec { function, color, probe };
                    checked += 1;
                    if crossing_event(&prep, &col, &s, &mut scratch).unwrap() != crossing_event_direct(&prep, &col, &s).unwrap() {
                        bad += 1;
                    }
                }
            }
        }
    }
    outcome(bad == 0 && k <= 18, format!("{k} sites, 2^{k} colorings, {checked} events, {bad} discrepancies"))
}

fn l_shape_config() -> ExperimentConfig {
    config(ExperimentKind::CardySweep, domain("l_shape"), &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], 20_000, 5)
}

fn l_shape_trend() -> Outcome {
    let r = go(&l_shape_config());
    let Some(Verdict::Envelope { nonincreasing, final_abs_err }) = r.verdict else { unreachable!() };
    let errs: Vec<String> = r.rows.iter().map(|row| format!("{:.4}", row.abs_err.unwrap())).collect();
    outcome(
        nonincreasing && final_abs_err <= 0.03,
        format!(
            "C0 {:.5}; |C_eps - C0| at 1/8..1/64: {} (nonincreasing within 3 half-widths: {nonincreasing}; final <= 0.03)",
            r.oracle.as_ref().unwrap().value,
            errs.join(", ")
        ),
    )
}

fn decay_config() -> ExperimentConfig {
    config(ExperimentKind::BoundaryDecay, domain("slit_square"), &[1.0 / 64.0], 10_000, 6)
}

fn boundary_values() -> Outcome {
    let r = go(&decay_config());
    let near_c = r.rows.first().unwrap().estimate.value;
    let near_arc = r.rows.last().unwrap().estimate.value;
    outcome(
        near_arc < 0.1 && near_c > 0.9,
        format!("{} probes, eps 1/64 n 1e4: u near c {near_c:.4} > 0.9, u at closest probe {near_arc:.4} < 0.1", r.rows.len()),
    )
}

fn harris_plateau() -> Outcome {
    let r = go(&config(ExperimentKind::HarrisRings, domain("square"), &[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0], 4000, 7));
    let Some(Verdict::Plateau { consistent, min_value }) = r.verdict else { unreachable!() };
    let vals: Vec<String> = r.rows.iter().map(|row| format!("{:.4}", row.estimate.value)).collect();
    outcome(
        consistent && min_value >= 0.05,
        format!("ratio-4 annulus on arc C at eps 1/32, 1/64, 1/128: {} (within 3 half-widths: {consistent}; min >= 0.05)", vals.join(", ")),
    )
}

/// Zigzag slit into the square from mark a, with the domain it cuts.
fn zigzag_slit(dd: &DiscreteDomain) -> (DiscreteDomain, CurveTrace) {
    let cyc = dd.boundary_cycle();
    let ia = dd.mark_position(MarkName::A).unwrap();
    let (e_in, e_out) = (cyc[ia], cyc[(ia + 1) % cyc.len()]);
    let mut l = e_in.across();
    let mut k = l.direction_to(e_out.across()).unwrap();
    let mut edges = vec![TraceEdge { left: l, right: l.neighbor(k) }];
    for step in 0..30 {
        if step % 2 == 1 {
            l = l.neighbor(k + 1);
            k = (k + 5) % 6;
        } else {
            k = (k + 1) % 6;
        }
        edges.push(TraceEdge { left: l, right: l.neighbor(k) });
    }
    let trace = CurveTrace { edges };
    (dd.with_slit(&trace).unwrap(), trace)
}

fn face_positions(dd: &DiscreteDomain, trace: &CurveTrace, left: bool) -> Vec<usize> {
    let faces: BTreeSet<BoundaryEdge> = trace
        .edges
        .iter()
        .map(|e| {
            let k = e.dir().unwrap();
            if left {
                BoundaryEdge { site: e.left, dir: k as u8 }
            } else {
                BoundaryEdge { site: e.right, dir: ((k + 3) % 6) as u8 }
            }
        })
        .collect();
    let cyc = dd.boundary_cycle();
    (0..cyc.len()).filter(|&i| faces.contains(&cyc[i])).collect()
}

fn approximation_audits() -> Outcome {
    let scales = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["square", "triangle", "l_shape", "slit_square", "pentagon"] {
        let r = go(&config(ExperimentKind::ApproxAudit, domain(name), &scales, 100, 8));
        let kernel = r.kernel.as_ref().is_some_and(|k| k.passed());
        let interior = r.audits.iter().all(|a| a.interior.passed());
        let homotopy = r.audits.iter().filter_map(|a| a.homotopy.as_ref()).collect::<Vec<_>>();
        let ok = r.passed() && kernel && interior && !homotopy.is_empty() && homotopy.iter().all(|h| h.consistent);
        pass &= ok;
        parts.push(format!("{name} {}", if ok { "ok" } else { "FAILED" }));
    }

    // bad1: arc C's label leaks past b.
    let sq = domain("square").build().unwrap();
    let mut dd = canonical_approximation(&sq, LatticeScale::new(1.0 / 32.0).unwrap()).unwrap();
    let cyc = dd.boundary_cycle().to_vec();
    let ib = dd.mark_position(MarkName::B).unwrap();
    dd.set_edge_label(cyc[(ib + 20) % cyc.len()], Some(ArcLabel::C));
    let arcs = check_interior_conditions(&dd, &sq).arcs;
    let bad1 = !arcs.pass && arcs.witness.is_some();
    parts.push(format!("bad1 caught: {bad1} ({:?})", arcs.witness));

    // bad2: the two sides of a slit crisscross.
    let dd = canonical_approximation(&sq, LatticeScale::new(1.0 / 32.0).unwrap()).unwrap();
    let (mut sd, trace) = zigzag_slit(&dd);
    let (left, right) = (face_positions(&sd, &trace, true), face_positions(&sd, &trace, false));
    let cyc = sd.boundary_cycle().to_vec();
    let mid = |v: &[usize]| v[v.len() / 3..2 * v.len() / 3].to_vec();
    for i in mid(&left) {
        sd.set_edge_label(cyc[i], Some(ArcLabel::C));
    }
    for i in mid(&right) {
        sd.set_edge_label(cyc[i], Some(ArcLabel::B));
    }
    let w = check_well_organized(&sd, left[2], left[left.len() - 3], 2.0 / 32.0).unwrap();
    let bad2 = !w.monochrome && matches!(w.witness, Some(Witness::EdgePair(_, _)));
    parts.push(format!("bad2 caught: {bad2} ({:?})", w.witness));

    outcome(pass && bad1 && bad2, format!("eps 1/32, 1/64, 1/128: {}", parts.join("; ")))
}

fn well_organized_traces() -> Outcome {
    let mut cfg = config(ExperimentKind::Exploration, domain("square"), &[1.0 / 64.0], 100, 9);
    cfg.record.params.traces = 100;
    let r = go(&cfg);
    let failed: Vec<usize> = r.traces.iter().filter(|t| !t.passed).map(|t| t.index).collect();
    let kept: usize = r.traces.iter().map(|t| t.kept).sum();
    let steps: usize = r.traces.iter().map(|t| t.steps).sum();
    outcome(
        r.traces.len() == 100 && failed.is_empty(),
        format!("{} traces at eps 1/64, both sides checked on {kept} of {steps} steps; failing traces {failed:?}", r.traces.len()),
    )
}

fn equicontinuity() -> Outcome {
    let r = go(&config(ExperimentKind::Equicontinuity, domain("slit_from_a"), &[1.0 / 64.0], 20_000, 10));
    let Some(Verdict::Equicontinuity { nonincreasing, consistent }) = r.verdict else { unreachable!() };
    let env: Vec<String> = r
        .envelopes
        .iter()
        .map(|e| format!("delta {}: MC {:.4} +/- {:.4} vs continuum {:.4}", e.delta, e.mc_max_diff, e.mc_half_width, e.continuum_max_diff))
        .collect();
    outcome(
        nonincreasing && consistent,
        format!("eps 1/64, 20 perturbations: {} (nonincreasing: {nonincreasing}; consistent: {consistent})", env.join("; ")),
    )
}

fn reproducibility() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, cfg) in [("l_shape sweep", l_shape_config()), ("slit decay", decay_config())] {
        let (one, _) = run(&cfg, &Parallel::new(1)).unwrap();
        let (eight, _) = run(&cfg, &Parallel::new(8)).unwrap();
        let (again, _) = run(&cfg, &Parallel::new(1)).unwrap();
        let same = one.to_json() == eight.to_json()
            && one.to_csv() == eight.to_csv()
            && one.to_plotdata() == eight.to_plotdata()
            && one.to_json() == again.to_json();
        pass &= same;
        parts.push(format!("{name} {}", if same { "identical" } else { "DIFFERS" }));
    }
    outcome(pass, format!("1 vs 8 workers and repeated run, JSON/CSV/plotdata bytes: {}", parts.join("; ")))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "square crossing", square_crossing),
        (2, "triangle linearity", triangle_linearity),
        (3, "oracle cross-validation", oracle_cross_validation),
        (4, "duality equivalence", duality_exhaustive),
        (5, "convergence trend", l_shape_trend),
        (6, "boundary values", boundary_values),
        (7, "Harris-ring plateau", harris_plateau),
        (8, "approximation audits", approximation_audits),
        (9, "well-organized traces", well_organized_traces),
        (10, "equicontinuity", equicontinuity),
        (11, "reproducibility", reproducibility),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (n, name, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
