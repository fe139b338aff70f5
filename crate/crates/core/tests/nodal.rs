use slidenodal_core::eig::*;
use slidenodal_core::fem::*;
use slidenodal_core::geometry::*;
use slidenodal_core::mesh::*;
use slidenodal_core::nodal::*;

fn mesh(b: &DomainBoundary, base: f64) -> Mesh {
    generate(b, &SizingSpec { base_edge: base, ..SizingSpec::default() }).unwrap()
}

fn eigenfunctions(m: &Mesh) -> (Vec<f64>, Vec<f64>) {
    let (k, mm, d) = assemble(m).unwrap();
    let r = solve_symmetric(&k, &mm, &d.mirror(m), 3, &SolverOptions::default()).unwrap();
    (d.scatter(&r.pairs[0].coeffs), d.scatter(&r.pairs[1].coeffs))
}

/// Connected sign regions of `f` on a raster of the box, 4-connectivity,
/// restricted to points where `inside` holds and `|f|` is not tiny.
fn raster_components(f: impl Fn(f64, f64) -> f64, inside: impl Fn(f64, f64) -> bool, lo: Point, hi: Point, n: usize) -> usize {
    let at = |i: usize, j: usize| {
        let x = lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / n as f64;
        let y = lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / n as f64;
        (x, y)
    };
    let mut label = vec![0i32; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = at(i, j);
            if inside(x, y) {
                label[i * n + j] = if f(x, y) > 0.0 { 1 } else { -1 };
            }
        }
    }
    let mut seen = vec![false; n * n];
    let mut count = 0;
    for s in 0..n * n {
        if label[s] == 0 || seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(c) = stack.pop() {
            let (i, j) = (c / n, c % n);
            let mut nb = Vec::new();
            if i > 0 {
                nb.push(c - n);
            }
            if i + 1 < n {
                nb.push(c + n);
            }
            if j > 0 {
                nb.push(c - 1);
            }
            if j + 1 < n {
                nb.push(c + 1);
            }
            for d in nb {
                if !seen[d] && label[d] == label[c] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
    }
    count
}

#[test]
fn single_triangle_segment() {
    // the triangle and its mirror image, so that the mesh is symmetric
    let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, -1.0)];
    let m = Mesh::from_parts(v, vec![[0, 1, 2], [0, 3, 1]], vec![], vec![]).unwrap();
    let s = extract(&m, &[-1.0, 1.0, 1.0, 1.0], EPS_ZERO);
    assert_eq!(s.chains.len(), 1);
    let p = &s.chains[0].points;
    let k = p.iter().position(|&q| q == Point::new(0.5, 0.0)).unwrap();
    assert!(p.contains(&Point::new(0.0, 0.5)));
    assert!(p[k.saturating_sub(1)] == Point::new(0.0, 0.5) || p[k + 1] == Point::new(0.0, 0.5));
}

#[test]
fn rectangle_second_mode_nodal_line() {
    let m = mesh(&DomainBoundary::rectangle(1.0, 0.5), 0.04);
    let (u1, u2) = eigenfunctions(&m);
    let s = extract(&m, &u2, EPS_ZERO);
    assert_eq!(s.chains.len(), 1);
    let c = &s.chains[0];
    assert_eq!(c.kind, ChainKind::BoundaryArc);
    assert_eq!(c.end_tags, Some([LoopTag::Single, LoopTag::Single]));
    for p in &c.points {
        assert!(p.x.abs() < 2.0 * 0.04, "nodal point {p:?} off the y-axis");
    }
    let mut ends = c.impact_points.clone();
    ends.sort_by(|a, b| a.y.total_cmp(&b.y));
    assert!(ends[0].dist(Point::new(0.0, -0.5)) < 0.04);
    assert!(ends[1].dist(Point::new(0.0, 0.5)) < 0.04);
    assert!(ends[0].dist(ends[1].mirror()) < 1e-12);
    assert!(check_simple(&s).simple);
    assert!(mirror_asymmetry(&s) < 1e-9);
    assert_eq!(count_nodal_domains(&m, &u2, EPS_ZERO), 2);
    assert_eq!(count_nodal_domains(&m, &u1, EPS_ZERO), 1);
    let w = Point::new(-1.0, 0.0);
    let e = Point::new(1.0, 0.0);
    assert_eq!(sign_changes_on_sigma(&m, &u2, w, e, 1024, EPS_ZERO).unwrap(), 1);
    assert_eq!(sign_changes_on_sigma(&m, &u1, w, e, 1024, EPS_ZERO).unwrap(), 0);
    assert!(matches!(sign_changes_on_sigma(&m, &u2, w, e, 10, EPS_ZERO), Err(NodalError::TooFewSamples { .. })));
    assert!(matches!(
        sign_changes_on_sigma(&m, &u2, w, Point::new(3.0, 0.0), 1024, EPS_ZERO),
        Err(NodalError::SampleOutsideDomain { .. })
    ));
}

#[test]
fn sine_along_sigma() {
    let m = mesh(&DomainBoundary::rectangle(1.0, 0.5), 0.05);
    let u: Vec<f64> = m.vertices.iter().map(|p| (std::f64::consts::PI * p.x).sin()).collect();
    assert_eq!(sign_changes_on_sigma(&m, &u, Point::new(-1.0, 0.0), Point::new(1.0, 0.0), 512, EPS_ZERO).unwrap(), 1);
    let one = vec![1.0; m.n_vertices()];
    assert_eq!(sign_changes_on_sigma(&m, &one, Point::new(-1.0, 0.0), Point::new(1.0, 0.0), 512, EPS_ZERO).unwrap(), 0);
}

#[test]
fn three_sign_regions_on_a_strip() {
    let b = DomainBoundary::rectangle(1.0, 0.25);
    let m = mesh(&b, 0.04);
    let f = |x: f64, y: f64| (1.5 * std::f64::consts::PI * (x + 1.0)).sin() * (0.3 - y * y);
    let u: Vec<f64> = m.vertices.iter().map(|p| f(p.x, p.y)).collect();
    let oracle = raster_components(f, |x, y| x.abs() < 1.0 && y.abs() < 0.25, Point::new(-1.0, -0.25), Point::new(1.0, 0.25), 400);
    assert_eq!(oracle, 3);
    assert_eq!(count_nodal_domains(&m, &u, EPS_ZERO), oracle);
    let s = extract(&m, &u, EPS_ZERO);
    assert_eq!(s.chains.len(), 2);
    assert!(check_simple(&s).simple);
}

#[test]
fn touch_labels_on_an_annulus() {
    let b = DomainBoundary::annulus(0.0, 1.0, 2.0);
    let m = mesh(&b, 0.05);
    // closed circle of radius 1.5
    let closed: Vec<f64> = m.vertices.iter().map(|p| p.norm() - 1.5).collect();
    let s = extract(&m, &closed, EPS_ZERO);
    assert_eq!(s.chains.len(), 1);
    assert_eq!(s.chains[0].kind, ChainKind::ClosedLoop);
    let r = classify_touch(&s, &m, TouchThreshold::default()).unwrap();
    assert_eq!(r.label, TouchLabel::Closed);
    // closed-form ring geometry: the chain sits half a ring width from both
    assert!((r.dist_left - 0.5).abs() < 0.01 && (r.dist_right - 0.5).abs() < 0.01);
    let (w, res) = winding_number(&s.chains[0].points, Point::new(0.0, 0.0)).unwrap();
    assert_eq!(w.abs(), 1);
    assert!(res < 1e-9);
    // a chain hugging the outer (Left) loop: zero set at radius 1.98
    let hug: Vec<f64> = m.vertices.iter().map(|p| p.x + 1.9).collect();
    let s = extract(&m, &hug, EPS_ZERO);
    let r = classify_touch(&s, &m, TouchThreshold::default()).unwrap();
    assert_eq!(r.label, TouchLabel::LeftOnly);
    assert!(r.dist_left < 1e-12 && r.dist_right > 0.4);
}

#[test]
fn touch_needs_two_loops() {
    let m = mesh(&DomainBoundary::rectangle(1.0, 0.5), 0.2);
    let u: Vec<f64> = m.vertices.iter().map(|p| p.x).collect();
    let s = extract(&m, &u, EPS_ZERO);
    assert!(matches!(classify_touch(&s, &m, TouchThreshold::default()), Err(NodalError::NotTwoLoops { found: 1 })));
}

#[test]
fn anchors_on_the_handle_family() {
    for (t, want) in [(1.6, TouchLabel::RightOnly), (2.3, TouchLabel::LeftOnly)] {
        let p = DomainParams::default().with_t(t);
        let m = mesh(&build_boundary(&p).unwrap(), 0.04);
        let (_, u2) = eigenfunctions(&m);
        let s = extract(&m, &u2, EPS_ZERO);
        let r = classify_touch(&s, &m, TouchThreshold::default()).unwrap();
        assert_eq!(r.label, want, "t = {t}: {r:?}");
        assert!(check_simple(&s).simple);
        assert!(mirror_asymmetry(&s) < 1e-9);
        for c in &s.chains {
            if c.kind == ChainKind::BoundaryArc {
                let tags = c.end_tags.unwrap();
                assert_eq!(tags[0], tags[1]);
                assert_eq!(c.impact_points.len(), 2);
                assert!(c.impact_points[0].dist(c.impact_points[1].mirror()) < 1e-9);
            }
        }
        assert_eq!(count_nodal_domains(&m, &u2, EPS_ZERO), 2);
        let probes = ProbeSet::new(&p);
        let n = sign_changes_on_sigma(&m, &u2, probes.w, probes.e, 1024, EPS_ZERO).unwrap();
        assert_eq!(n % 2, 1);
    }
}
