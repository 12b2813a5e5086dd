use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::geometry::{EarthModel, TowerGeometry};
use super::{EARTH_RESISTANCE_PER_HZ, REACTANCE_PER_HZ};
use crate::error::{Error, Result};
use crate::linalg::{invert, CMatrix};

/// Square phase-domain impedance matrix, Ω/km.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseImpedanceMatrix {
    entries: CMatrix,
}

impl PhaseImpedanceMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Shape(format!(
                "impedance matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Parameter("impedance matrix has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.entries[(i, k)]
    }

    pub(crate) fn permuted(&self, order: &[usize]) -> Self {
        let n = order.len();
        Self {
            entries: CMatrix::from_fn(n, n, |i, k| self.entries[(order[i], order[k])]),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (0..i).all(|k| self.entries[(i, k)] == self.entries[(k, i)]))
    }
}

impl Serialize for PhaseImpedanceMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Complex64>> = self
            .entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        rows.serialize(s)
    }
}

/// `ln(De)`, the earth-return term added to `ln(1/D)`.
pub fn earth_constant(earth: &EarthModel) -> f64 {
    earth.return_depth().ln()
}

/// Self/mutual impedance of a conductor pair with common earth return, Ω/km.
/// `r` is the conductor resistance (zero for mutual terms) and `d` the GMR or
/// center distance in meters.
fn carson_term(r: f64, d: f64, earth: &EarthModel, k_earth: f64) -> Complex64 {
    let f = earth.frequency;
    Complex64::new(
        r + EARTH_RESISTANCE_PER_HZ * f,
        REACTANCE_PER_HZ * f * ((1.0 / d).ln() + k_earth),
    )
}

/// Carson matrix over every conductor of `geometry`, in geometry order.
/// Bundles are collapsed to their equivalent conductor first.
pub fn carson_matrix(geometry: &TowerGeometry, earth: &EarthModel) -> Result<PhaseImpedanceMatrix> {
    earth.validate()?;
    geometry.validate()?;
    let k_earth = earth_constant(earth);
    let conductors = &geometry.conductors;
    let n = conductors.len();
    let mut z = CMatrix::zeros(n, n);
    for i in 0..n {
        let ci = &conductors[i];
        z[(i, i)] = carson_term(
            ci.spec.equivalent_resistance(),
            ci.spec.equivalent_gmr(),
            earth,
            k_earth,
        );
        for k in 0..i {
            let ck = &conductors[k];
            let d = (ci.x - ck.x).hypot(ci.y - ck.y);
            if d == 0.0 {
                return Err(Error::Geometry(format!(
                    "conductors `{}` and `{}` are coincident",
                    ci.label, ck.label
                )));
            }
            let zik = carson_term(0.0, d, earth, k_earth);
            z[(i, k)] = zik;
            z[(k, i)] = zik;
        }
    }
    PhaseImpedanceMatrix::new(z)
}

/// Schur complement `Zpp − Zpg·Zgg⁻¹·Zgp`, eliminating the `eliminate` rows
/// and columns (grounded conductors). Remaining order is preserved.
pub fn kron_reduce(z: &PhaseImpedanceMatrix, eliminate: &[usize]) -> Result<PhaseImpedanceMatrix> {
    let n = z.order();
    if let Some(&bad) = eliminate.iter().find(|&&i| i >= n) {
        return Err(Error::Shape(format!(
            "cannot eliminate conductor {bad} from order-{n} matrix"
        )));
    }
    if eliminate.is_empty() {
        return Ok(z.clone());
    }
    let mut g: Vec<usize> = eliminate.to_vec();
    g.sort_unstable();
    g.dedup();
    let p: Vec<usize> = (0..n).filter(|i| !g.contains(i)).collect();

    let m = &z.entries;
    let zpp = CMatrix::from_fn(p.len(), p.len(), |i, k| m[(p[i], p[k])]);
    let zpg = CMatrix::from_fn(p.len(), g.len(), |i, k| m[(p[i], g[k])]);
    let zgp = CMatrix::from_fn(g.len(), p.len(), |i, k| m[(g[i], p[k])]);
    let zgg = CMatrix::from_fn(g.len(), g.len(), |i, k| m[(g[i], g[k])]);
    let zgg_inv = invert(&zgg, "ground-wire block").map_err(|_| Error::SingularReduction {
        conductors: g.clone(),
    })?;

    let mut reduced = zpp - zpg * zgg_inv * zgp;
    // The product is symmetric only up to rounding; mirror the lower triangle.
    for i in 0..reduced.nrows() {
        for k in 0..i {
            let avg = (reduced[(i, k)] + reduced[(k, i)]) * 0.5;
            reduced[(i, k)] = avg;
            reduced[(k, i)] = avg;
        }
    }
    PhaseImpedanceMatrix::new(reduced)
}

/// Ideal transposition: average over the three cyclic phase rotations,
/// applied to every circuit at once.
pub fn transpose_average(z: &PhaseImpedanceMatrix) -> Result<PhaseImpedanceMatrix> {
    let n = z.order();
    if n % 3 != 0 {
        return Err(Error::Shape(format!(
            "transposition needs an order divisible by 3, got {n}"
        )));
    }
    let rotate = |shift: usize| -> Vec<usize> {
        (0..n).map(|i| i - i % 3 + (i % 3 + shift) % 3).collect()
    };
    let mut acc = CMatrix::zeros(n, n);
    for shift in 0..3 {
        acc += z.permuted(&rotate(shift)).entries;
    }
    PhaseImpedanceMatrix::new(acc / Complex64::new(3.0, 0.0))
}
