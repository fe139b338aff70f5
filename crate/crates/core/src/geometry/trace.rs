//! Marching-squares tracing of the implicit membership field.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;


use super::domain::{contains, DomainParams};
use super::point::Point;

/// Closed polylines approximating the boundary components of the domain,
/// traced on a grid of spacing `d` that is symmetric about the x-axis.
/// Membership is evaluated on the rows with `y >= 0` and mirrored.
pub(crate) fn trace_loops(p: &DomainParams, d: f64) -> Vec<Vec<Point>> {
    let reach = if p.h > 0.0 { p.r + p.h } else { 0.0 };
    let x0 = (-1.0f64).min(p.t - reach) - 2.0 * d;
    let x1 = 1.0f64.max(p.t + reach) + 2.0 * d;
    let ymax = p.l.max(reach) + 2.0 * d;
    let nx = ((x1 - x0) / d).ceil() as usize;
    let half = (ymax / d).ceil() as usize;
    let ny = 2 * half;
    let node = |i: usize, j: usize| Point::new(x0 + i as f64 * d, (j as f64 - half as f64) * d);

    let w = nx + 1;
    let mut state = vec![false; w * (ny + 1)];
    for j in half..=ny {
        for i in 0..=nx {
            let v = contains(p, node(i, j));
            state[j * w + i] = v;
            state[(ny - j) * w + i] = v;
        }
    }
    let st = |i: usize, j: usize| state[j * w + i];

    // edge ids: horizontal (i,j)-(i+1,j) even, vertical (i,j)-(i,j+1) odd
    let hid = |i: usize, j: usize| 2 * (j * w + i) as u64;
    let vid = |i: usize, j: usize| 2 * (j * w + i) as u64 + 1;

    let mut links: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let link = |a: u64, b: u64, links: &mut BTreeMap<u64, Vec<u64>>| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for j in 0..ny {
        for i in 0..nx {
            let c = [st(i, j), st(i + 1, j), st(i + 1, j + 1), st(i, j + 1)];
            let e = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let mixed: Vec<usize> = (0..4).filter(|&k| c[k] != c[(k + 1) % 4]).collect();
            match mixed.len() {
                0 => {}
                2 => link(e[mixed[0]], e[mixed[1]], &mut links),
                4 => {
                    let centre = contains(p, Point::new(x0 + (i as f64 + 0.5) * d, (j as f64 + 0.5 - half as f64) * d));
                    for k in 0..4 {
                        if c[k] != centre {
                            link(e[(k + 3) % 4], e[k], &mut links);
                        }
                    }
                }
                _ => unreachable!("odd number of sign changes around a cell"),
            }
        }
    }

    let crossing = |id: u64| -> Point {
        let k = (id / 2) as usize;
        let (i, j) = (k % w, k / w);
        let a = node(i, j);
        let b = if id % 2 == 0 { node(i + 1, j) } else { node(i, j + 1) };
        let (mut pin, mut pout) = if contains(p, a) { (a, b) } else { (b, a) };
        for _ in 0..60 {
            let m = pin.midpoint(pout);
            if contains(p, m) {
                pin = m;
            } else {
                pout = m;
            }
        }
        pin.midpoint(pout)
    };

    let mut visited: BTreeMap<u64, bool> = links.keys().map(|&k| (k, false)).collect();
    let mut loops = Vec::new();
    let keys: Vec<u64> = links.keys().copied().collect();
    for start in keys {
        if visited[&start] {
            continue;
        }
        let mut pts = Vec::new();
        let mut prev = u64::MAX;
        let mut cur = start;
        loop {
            visited.insert(cur, true);
            pts.push(crossing(cur));
            let nb = &links[&cur];
            let next = if nb[0] != prev { nb[0] } else { nb[1] };
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
        loops.push(pts);
    }
    loops
}
