//! Direct phase-domain (abc) fault solution.
//!
//! Every branch is cut into segments at its coupling-span limits and at the
//! fault point. Each segment is a 3-conductor series element; zero-sequence
//! mutuals become uniform `z0m/3` blocks spread over the coupled run. The
//! whole network is solved by modified nodal analysis with the fault
//! constraint appended.

use std::collections::HashMap;

use mcstudy_core::network::{BranchStatus, Network, Terminal};
use mcstudy_core::{Complex64, FaultKind, FaultLocation, FaultSpec};
use nalgebra::{DMatrix, DVector};

type C = Complex64;

fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn alpha() -> C {
    C::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// Balanced 3×3 phase matrix from zero and positive sequence values.
fn phase_block(z0: C, z1: C) -> DMatrix<C> {
    let s = (z0 + z1 * 2.0) / 3.0;
    let m = (z0 - z1) / 3.0;
    DMatrix::from_fn(3, 3, |i, k| if i == k { s } else { m })
}

pub struct PhaseSolution {
    pub bus_voltage: HashMap<String, [C; 3]>,
    /// Phase currents from the bus into the line, before CT orientation.
    pub terminal_current: HashMap<(String, Terminal), [C; 3]>,
    pub fault_current: [C; 3],
}

struct Segment {
    branch: usize,
    lo: f64,
    hi: f64,
    /// node-set indices at each end; `None` is ground
    ends: (Option<usize>, Option<usize>),
}

pub fn solve(n: &Network, f: &FaultSpec) -> PhaseSolution {
    // breakpoints per branch
    let mut cuts: Vec<Vec<f64>> = n.branches.iter().map(|_| vec![0.0, 1.0]).collect();
    if f.mutual_coupling {
        for c in &n.couplings {
            let a = n.branch_index(&c.branch_a).unwrap();
            let b = n.branch_index(&c.branch_b).unwrap();
            cuts[a].extend([c.span_a.from, c.span_a.to]);
            cuts[b].extend([c.span_b.from, c.span_b.to]);
        }
    }
    let mut fault_at: Option<(usize, f64)> = None;
    if let FaultLocation::Branch { branch, fraction } = &f.location {
        let b = n.branch_index(branch).unwrap();
        cuts[b].push(*fraction);
        fault_at = Some((b, *fraction));
    }
    for v in &mut cuts {
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        v.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    }

    // node sets: buses first, then internal points
    let nbus = n.buses.len();
    let mut nsets = nbus;
    let mut point_node: HashMap<(usize, usize), usize> = HashMap::new();
    let mut segments = Vec::new();
    for (bi, br) in n.branches.iter().enumerate() {
        let from = n.bus_index(&br.from_bus).unwrap();
        let to = n.bus_index(&br.to_bus).unwrap();
        let pts = &cuts[bi];
        let mut node_of = |k: usize| -> Option<usize> {
            let last = pts.len() - 1;
            let grounded = br.status == BranchStatus::OutOfServiceGrounded;
            if k == 0 {
                if grounded {
                    return None;
                }
                if br.status == BranchStatus::OpenAtFrom {
                    let id = nsets;
                    nsets += 1;
                    return Some(id);
                }
                return Some(from);
            }
            if k == last {
                if grounded {
                    return None;
                }
                if br.status == BranchStatus::OpenAtTo {
                    let id = nsets;
                    nsets += 1;
                    return Some(id);
                }
                return Some(to);
            }
            Some(*point_node.entry((bi, k)).or_insert_with(|| {
                nsets += 1;
                nsets - 1
            }))
        };
        let nodes: Vec<Option<usize>> = (0..pts.len()).map(&mut node_of).collect();
        for k in 0..pts.len() - 1 {
            segments.push(Segment {
                branch: bi,
                lo: pts[k],
                hi: pts[k + 1],
                ends: (nodes[k], nodes[k + 1]),
            });
        }
    }

    let fault_set = match &f.location {
        FaultLocation::Bus(b) => n.bus_index(b).unwrap(),
        FaultLocation::Branch { fraction, .. } => {
            let (b, m) = fault_at.unwrap();
            let br = &n.branches[b];
            if *fraction == 0.0 {
                n.bus_index(&br.from_bus).unwrap()
            } else if *fraction == 1.0 {
                n.bus_index(&br.to_bus).unwrap()
            } else {
                let k = cuts[b].iter().position(|x| (*x - m).abs() < 1e-15).unwrap();
                point_node[&(b, k)]
            }
        }
    };

    // primitive impedance of all segments
    let ns = segments.len();
    let mut zp = DMatrix::<C>::zeros(3 * ns, 3 * ns);
    for (s, seg) in segments.iter().enumerate() {
        let br = &n.branches[seg.branch];
        let blk = phase_block(br.z0, br.z1) * cx(seg.hi - seg.lo, 0.0);
        zp.view_mut((3 * s, 3 * s), (3, 3)).copy_from(&blk);
    }
    if f.mutual_coupling {
        for c in &n.couplings {
            let a = n.branch_index(&c.branch_a).unwrap();
            let b = n.branch_index(&c.branch_b).unwrap();
            // run parameter u in [0,1] over the coupled stretch
            let u_of = |x: f64, sp: mcstudy_core::network::Span| (x - sp.from) / (sp.to - sp.from);
            for (sa, ga) in segments.iter().enumerate().filter(|(_, g)| g.branch == a) {
                for (sb, gb) in segments.iter().enumerate().filter(|(_, g)| g.branch == b) {
                    let ua = (u_of(ga.lo, c.span_a).max(0.0), u_of(ga.hi, c.span_a).min(1.0));
                    let ub = (u_of(gb.lo, c.span_b).max(0.0), u_of(gb.hi, c.span_b).min(1.0));
                    let w = (ua.1.min(ub.1) - ua.0.max(ub.0)).max(0.0);
                    if w <= 0.0 {
                        continue;
                    }
                    let m = c.z0m * (w / 3.0);
                    for i in 0..3 {
                        for k in 0..3 {
                            zp[(3 * sa + i, 3 * sb + k)] += m;
                            zp[(3 * sb + k, 3 * sa + i)] += m;
                        }
                    }
                }
            }
        }
    }

    // elements touching an open/grounded-only structure still need a path;
    // find node sets with a conductive path to ground
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nsets];
    let mut grounded = vec![false; nsets];
    for s in &n.sources {
        grounded[n.bus_index(&s.bus).unwrap()] = true;
    }
    for seg in &segments {
        match seg.ends {
            (Some(p), Some(q)) => {
                adj[p].push(q);
                adj[q].push(p);
            }
            (Some(p), None) | (None, Some(p)) => grounded[p] = true,
            (None, None) => {}
        }
    }
    let mut live = grounded.clone();
    let mut stack: Vec<usize> = (0..nsets).filter(|&i| live[i]).collect();
    while let Some(p) = stack.pop() {
        for &q in &adj[p] {
            if !live[q] {
                live[q] = true;
                stack.push(q);
            }
        }
    }
    // node sets without a ground path carry no current; pin them to zero
    let mut index = vec![usize::MAX; nsets];
    let mut nn = 0;
    for i in 0..nsets {
        if live[i] {
            index[i] = nn;
            nn += 1;
        }
    }
    let node = |set: Option<usize>, ph: usize| set.filter(|&s| live[s]).map(|s| 3 * index[s] + ph);

    let yp = zp.clone().try_inverse().expect("primitive impedance invertible");
    let nf = match f.kind {
        FaultKind::Slg => 1,
        FaultKind::Ll => 1,
        FaultKind::Llg => 2,
        FaultKind::ThreePhase => 3,
    };
    let dim = 3 * nn + nf;
    let mut m = DMatrix::<C>::zeros(dim, dim);
    let mut rhs = DVector::<C>::zeros(dim);

    // incidence: column j of segment conductor, +1 at from node, -1 at to node
    let inc = |s: usize, ph: usize| -> [(Option<usize>, f64); 2] {
        let seg = &segments[s];
        [(node(seg.ends.0, ph), 1.0), (node(seg.ends.1, ph), -1.0)]
    };
    for j in 0..3 * ns {
        for k in 0..3 * ns {
            let y = yp[(j, k)];
            if y == C::new(0.0, 0.0) {
                continue;
            }
            for (p, sp) in inc(j / 3, j % 3) {
                for (q, sq) in inc(k / 3, k % 3) {
                    if let (Some(p), Some(q)) = (p, q) {
                        m[(p, q)] += y * (sp * sq);
                    }
                }
            }
        }
    }
    let a = alpha();
    for s in &n.sources {
        let bi = n.bus_index(&s.bus).unwrap();
        let ys = phase_block(s.z0, s.z1).try_inverse().unwrap();
        let e = DVector::from_vec(vec![s.emf, s.emf * a * a, s.emf * a]);
        let j = &ys * e;
        for p in 0..3 {
            rhs[3 * index[bi] + p] += j[p];
            for q in 0..3 {
                m[(3 * index[bi] + p, 3 * index[bi] + q)] += ys[(p, q)];
            }
        }
    }

    let fnode = |ph: usize| 3 * index[fault_set] + ph;
    let rf = cx(f.fault_resistance, 0.0);
    let base = 3 * nn;
    match f.kind {
        FaultKind::Slg => {
            m[(fnode(0), base)] += 1.0;
            m[(base, fnode(0))] = cx(1.0, 0.0);
            m[(base, base)] = -rf;
        }
        FaultKind::Llg => {
            for (u, ph) in [(0, 1), (1, 2)] {
                m[(fnode(ph), base + u)] += 1.0;
                m[(base + u, fnode(ph))] = cx(1.0, 0.0);
                m[(base + u, base)] = -rf;
                m[(base + u, base + 1)] = -rf;
            }
        }
        FaultKind::Ll => {
            m[(fnode(1), base)] += 1.0;
            m[(fnode(2), base)] -= 1.0;
            m[(base, fnode(1))] = cx(1.0, 0.0);
            m[(base, fnode(2))] = cx(-1.0, 0.0);
            m[(base, base)] = -rf;
        }
        FaultKind::ThreePhase => {
            for ph in 0..3 {
                m[(fnode(ph), base + ph)] += 1.0;
                m[(base + ph, fnode(ph))] = cx(1.0, 0.0);
                m[(base + ph, base + ph)] = -rf;
            }
        }
    }

    let x = m.lu().solve(&rhs).expect("phase-domain system solvable");
    let volt = |set: Option<usize>, ph: usize| node(set, ph).map_or(cx(0.0, 0.0), |k| x[k]);
    let fault_current = match f.kind {
        FaultKind::Slg => [x[base], cx(0.0, 0.0), cx(0.0, 0.0)],
        FaultKind::Llg => [cx(0.0, 0.0), x[base], x[base + 1]],
        FaultKind::Ll => [cx(0.0, 0.0), x[base], -x[base]],
        FaultKind::ThreePhase => [x[base], x[base + 1], x[base + 2]],
    };

    // segment currents from node voltages
    let mut drops = DVector::<C>::zeros(3 * ns);
    for (s, seg) in segments.iter().enumerate() {
        for ph in 0..3 {
            drops[3 * s + ph] = volt(seg.ends.0, ph) - volt(seg.ends.1, ph);
        }
    }
    let cur = &yp * drops;

    let mut bus_voltage = HashMap::new();
    for (i, b) in n.buses.iter().enumerate() {
        bus_voltage.insert(b.id.clone(), [0, 1, 2].map(|ph| volt(Some(i), ph)));
    }
    let mut terminal_current = HashMap::new();
    for (bi, br) in n.branches.iter().enumerate() {
        let segs: Vec<usize> = (0..ns).filter(|&s| segments[s].branch == bi).collect();
        let first = segs[0];
        let last = *segs.last().unwrap();
        let connected = |t: Terminal| match (br.status, t) {
            (BranchStatus::InService | BranchStatus::OutOfServiceGrounded, _) => true,
            (BranchStatus::OpenAtFrom, Terminal::To) => true,
            (BranchStatus::OpenAtTo, Terminal::From) => true,
            _ => false,
        };
        let from_i = if connected(Terminal::From) {
            [0, 1, 2].map(|ph| cur[3 * first + ph])
        } else {
            [cx(0.0, 0.0); 3]
        };
        let to_i = if connected(Terminal::To) {
            [0, 1, 2].map(|ph| -cur[3 * last + ph])
        } else {
            [cx(0.0, 0.0); 3]
        };
        terminal_current.insert((br.id.clone(), Terminal::From), from_i);
        terminal_current.insert((br.id.clone(), Terminal::To), to_i);
    }
    PhaseSolution {
        bus_voltage,
        terminal_current,
        fault_current,
    }
}
