use nalgebra::linalg::LU;
use nalgebra::Dyn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{invert, CMatrix, ZERO};
use crate::network::{BranchStatus, Network};

/// Branches whose zero-sequence currents are tied through coupling records,
/// or a single uncoupled branch.
#[derive(Debug, Clone)]
pub struct BranchGroup {
    /// Indices into `Network::branches`.
    pub branches: Vec<usize>,
    /// Bus indices at each end; `None` is the reference node.
    pub ends: Vec<(Option<usize>, Option<usize>)>,
    pub zprim: CMatrix,
    pub yprim: CMatrix,
}

impl BranchGroup {
    /// Branch currents (from to to) for the given bus voltages.
    pub fn currents(&self, v: &[Complex64]) -> Vec<Complex64> {
        let drops = self.drops(v);
        (&self.yprim * nalgebra::DVector::from_vec(drops))
            .iter()
            .copied()
            .collect()
    }

    pub fn drops(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.ends
            .iter()
            .map(|&(f, t)| f.map_or(ZERO, |i| v[i]) - t.map_or(ZERO, |i| v[i]))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SequenceNetwork {
    pub ybus: CMatrix,
    /// Norton source injections.
    pub injection: Vec<Complex64>,
    pub groups: Vec<BranchGroup>,
}

/// LU of the active part of a sequence admittance matrix.
pub struct Factored {
    lu: LU<Complex64, Dyn, Dyn>,
    /// Position of each bus in the reduced system.
    map: Vec<Option<usize>>,
}

impl Factored {
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let reduced: Vec<Complex64> = rhs
            .iter()
            .zip(&self.map)
            .filter_map(|(x, m)| m.map(|_| *x))
            .collect();
        let x = self
            .lu
            .solve(&nalgebra::DVector::from_vec(reduced))
            .ok_or_else(|| Error::Singular("sequence admittance matrix".into()))?;
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Singular("sequence admittance matrix".into()));
        }
        Ok(self.map.iter().map(|m| m.map_or(ZERO, |k| x[k])).collect())
    }
}

impl SequenceNetwork {
    pub fn factor(&self, active: &[bool]) -> Result<Factored> {
        let mut map = vec![None; active.len()];
        let mut k = 0;
        for (i, &a) in active.iter().enumerate() {
            if a {
                map[i] = Some(k);
                k += 1;
            }
        }
        let idx: Vec<usize> = (0..active.len()).filter(|&i| active[i]).collect();
        let sub = CMatrix::from_fn(k, k, |r, c| self.ybus[(idx[r], idx[c])]);
        Ok(Factored { lu: sub.lu(), map })
    }

    /// Current in every branch of the network (zero where not conducting).
    pub fn branch_currents(&self, v: &[Complex64], n_branches: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; n_branches];
        for g in &self.groups {
            for (b, i) in g.branches.iter().zip(g.currents(v)) {
                out[*b] = i;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SequenceSystems {
    pub buses: Vec<String>,
    /// Zero, positive and negative sequence.
    pub sequences: [SequenceNetwork; 3],
    /// Buses with a positive-sequence path to a source.
    pub active: Vec<bool>,
    pub mutual_coupling: bool,
}

fn conducts(status: BranchStatus, zero_sequence: bool) -> bool {
    match status {
        BranchStatus::InService => true,
        BranchStatus::OutOfServiceGrounded => zero_sequence,
        BranchStatus::OpenAtFrom | BranchStatus::OpenAtTo => false,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Nodal admittance systems for the three sequences. With `mc_enabled` the
/// zero-sequence system stamps each coupled group through the inverse of its
/// primitive impedance matrix.
pub fn build_sequence_systems(n: &Network, mc_enabled: bool) -> Result<SequenceSystems> {
    let nb = n.buses.len();
    let bus = |id: &str| {
        n.bus_index(id).ok_or_else(|| Error::DanglingReference {
            kind: "bus",
            id: id.to_string(),
        })
    };
    let mut ends = Vec::with_capacity(n.branches.len());
    for b in &n.branches {
        ends.push((bus(&b.from_bus)?, bus(&b.to_bus)?));
    }

    // coupled zero-sequence groups
    let nbr = n.branches.len();
    let mut parent: Vec<usize> = (0..nbr).collect();
    let mut mutuals: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut record_names: Vec<String> = Vec::new();
    if mc_enabled {
        for c in &n.couplings {
            let ia = branch_idx(n, &c.branch_a)?;
            let ib = branch_idx(n, &c.branch_b)?;
            if !conducts(n.branches[ia].status, true)
                || !conducts(n.branches[ib].status, true)
                || c.z0m == ZERO
            {
                continue;
            }
            let za = n.branches[ia].z0;
            let zb = n.branches[ib].z0;
            if c.z0m.norm_sqr() >= (za * zb).norm() {
                return Err(Error::InfeasibleCoupling {
                    record: c.name(),
                    detail: format!(
                        "|z0m|² = {:.6} not below |z0a·z0b| = {:.6}",
                        c.z0m.norm_sqr(),
                        (za * zb).norm()
                    ),
                });
            }
            let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
            parent[ra] = rb;
            mutuals.push((ia, ib, c.z0m));
            record_names.push(c.name());
        }
        for g in group_members(&mut parent, n, true) {
            if g.len() > 1 && invert(&group_zprim(n, &g, &mutuals), "").is_err() {
                let names: Vec<&str> = mutuals
                    .iter()
                    .zip(&record_names)
                    .filter(|(m, _)| g.contains(&m.0))
                    .map(|(_, name)| name.as_str())
                    .collect();
                return Err(Error::InfeasibleCoupling {
                    record: names.join(","),
                    detail: "coupled group primitive impedance matrix is singular".into(),
                });
            }
        }
    }

    let mut sequences = Vec::with_capacity(3);
    for s in 0..3 {
        let zero = s == 0;
        let groups_idx = if zero {
            group_members(&mut parent, n, true)
        } else {
            (0..nbr)
                .filter(|&i| conducts(n.branches[i].status, false))
                .map(|i| vec![i])
                .collect()
        };
        let mut ybus = CMatrix::zeros(nb, nb);
        let mut groups = Vec::with_capacity(groups_idx.len());
        for g in groups_idx {
            let zprim = if zero {
                group_zprim(n, &g, &mutuals)
            } else {
                CMatrix::from_fn(g.len(), g.len(), |r, c| {
                    if r == c {
                        n.branches[g[r]].z1
                    } else {
                        ZERO
                    }
                })
            };
            let yprim = invert(&zprim, "branch primitive impedance")?;
            let g_ends: Vec<(Option<usize>, Option<usize>)> = g
                .iter()
                .map(|&i| match n.branches[i].status {
                    BranchStatus::OutOfServiceGrounded => (None, None),
                    _ => (Some(ends[i].0), Some(ends[i].1)),
                })
                .collect();
            for (j, &(fj, tj)) in g_ends.iter().enumerate() {
                for (k, &(fk, tk)) in g_ends.iter().enumerate() {
                    let y = yprim[(j, k)];
                    for (p, sp) in [(fj, 1.0), (tj, -1.0)] {
                        for (q, sq) in [(fk, 1.0), (tk, -1.0)] {
                            if let (Some(p), Some(q)) = (p, q) {
                                ybus[(p, q)] += y * (sp * sq);
                            }
                        }
                    }
                }
            }
            groups.push(BranchGroup {
                branches: g,
                ends: g_ends,
                zprim,
                yprim,
            });
        }
        let mut injection = vec![ZERO; nb];
        for src in &n.sources {
            let i = bus(&src.bus)?;
            let z = if zero { src.z0 } else { src.z1 };
            ybus[(i, i)] += Complex64::new(1.0, 0.0) / z;
            if s == 1 {
                injection[i] += src.emf / z;
            }
        }
        sequences.push(SequenceNetwork {
            ybus,
            injection,
            groups,
        });
    }

    let active = energized(n, &ends)?;
    let sequences: [SequenceNetwork; 3] = sequences.try_into().expect("three sequences");
    Ok(SequenceSystems {
        buses: n.buses.iter().map(|b| b.id.clone()).collect(),
        sequences,
        active,
        mutual_coupling: mc_enabled,
    })
}

fn branch_idx(n: &Network, id: &str) -> Result<usize> {
    n.branch_index(id).ok_or_else(|| Error::DanglingReference {
        kind: "branch",
        id: id.to_string(),
    })
}

fn group_members(parent: &mut [usize], n: &Network, zero: bool) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; parent.len()];
    for i in 0..parent.len() {
        if !conducts(n.branches[i].status, zero) {
            continue;
        }
        let r = find(parent, i);
        match root_slot[r] {
            Some(k) => groups[k].push(i),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn group_zprim(n: &Network, g: &[usize], mutuals: &[(usize, usize, Complex64)]) -> CMatrix {
    let mut z = CMatrix::from_fn(g.len(), g.len(), |r, c| {
        if r == c {
            n.branches[g[r]].z0
        } else {
            ZERO
        }
    });
    for &(a, b, zm) in mutuals {
        if let (Some(j), Some(k)) = (g.iter().position(|&x| x == a), g.iter().position(|&x| x == b)) {
            z[(j, k)] += zm;
            z[(k, j)] += zm;
        }
    }
    z
}

/// Buses connected to a source through in-service branches.
fn energized(n: &Network, ends: &[(usize, usize)]) -> Result<Vec<bool>> {
    let nb = n.buses.len();
    let mut on = vec![false; nb];
    let mut stack = Vec::new();
    for s in &n.sources {
        let i = n.bus_index(&s.bus).ok_or_else(|| Error::DanglingReference {
            kind: "bus",
            id: s.bus.clone(),
        })?;
        if !on[i] {
            on[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        for (b, &(f, t)) in n.branches.iter().zip(ends) {
            if b.status != BranchStatus::InService {
                continue;
            }
            let other = if f == i {
                t
            } else if t == i {
                f
            } else {
                continue;
            };
            if !on[other] {
                on[other] = true;
                stack.push(other);
            }
        }
    }
    Ok(on)
}
