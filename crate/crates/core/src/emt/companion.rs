use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};

use super::model::{RlNetwork, NODE_LEAKAGE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Trapezoidal,
    /// Used for the single step after a switching event, where the
    /// trapezoidal average of a discontinuous voltage would ring.
    BackwardEuler,
}

/// Discretized network: every element becomes `i_{n+1} = G·u_{n+1} + h_n`,
/// with `h_n = G·(α·u_n + K·i_n)`.
#[derive(Debug, Clone)]
pub struct Companion {
    pub rule: Rule,
    pub dt: f64,
    pub g: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub alpha: f64,
    /// Incidence padded to the nodal size.
    pub a: DMatrix<f64>,
    pub nodal: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

pub fn build_companion(
    net: &RlNetwork,
    dt: f64,
    rule: Rule,
    fault: Option<&DMatrix<f64>>,
) -> Result<Companion> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step {dt} must be positive")));
    }
    let (g, k, alpha) = match rule {
        Rule::Trapezoidal => {
            let two_l = &net.l * (2.0 / dt);
            let g = invert(&(&net.r + &two_l))?;
            (g, two_l - &net.r, 1.0)
        }
        Rule::BackwardEuler => {
            let l_dt = &net.l / dt;
            let g = invert(&(&net.r + &l_dt))?;
            (g, l_dt, 0.0)
        }
    };
    let nn = net.node_names.len();
    let size = fault.map_or(nn, |f| f.nrows().max(nn));
    let base = net.incidence();
    let mut a = DMatrix::zeros(base.nrows(), size);
    a.view_mut((0, 0), (base.nrows(), nn)).copy_from(&base);
    let mut nodal = a.transpose() * &g * &a;
    for i in 0..size {
        nodal[(i, i)] += NODE_LEAKAGE;
    }
    if let Some(f) = fault {
        let m = f.nrows();
        let mut view = nodal.view_mut((0, 0), (m, m));
        view += f;
    }
    let lu = nodal.clone().lu();
    Ok(Companion {
        rule,
        dt,
        g,
        k,
        alpha,
        a,
        nodal,
        lu,
    })
}

fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("companion conductance".into()))
}

impl Companion {
    pub fn nodes(&self) -> usize {
        self.a.ncols()
    }

    pub fn history(&self, u_n: &DVector<f64>, i_n: &DVector<f64>) -> DVector<f64> {
        &self.g * (u_n * self.alpha + &self.k * i_n)
    }

    /// One step: returns node voltages and element currents at `n+1` plus
    /// the KCL residual of the nodal solve.
    pub fn advance(
        &self,
        i_n: &DVector<f64>,
        u_n: &DVector<f64>,
        e_next: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>, f64)> {
        let h = self.history(u_n, i_n);
        let rhs = -(self.a.transpose() * (&self.g * e_next + &h));
        let v = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("EMT nodal matrix".into()))?;
        let i = &self.g * (&self.a * &v + e_next) + h;
        let residual = (&self.nodal * &v - &rhs).amax();
        Ok((v, i, residual))
    }
}
