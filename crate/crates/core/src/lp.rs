//! Unit balls of the l_p norms, including the polyhedral endpoints p = 1
//! and p = infinity where the norming functional can be non-unique.

use nalgebra::DVector;

use crate::error::{Error, Result};

const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone)]
pub struct LpBody {
    pub m: usize,
    pub p: Exponent,
}

impl LpBody {
    pub fn new(m: usize, p: Exponent) -> Result<LpBody> {
        if m == 0 {
            return Err(Error::InvalidInput("l_p body needs m >= 1".into()));
        }
        if let Exponent::Finite(q) = p {
            if !(q >= 1.0) || !q.is_finite() {
                return Err(Error::InvalidInput(format!("exponent p = {} outside [1, inf)", q)));
            }
        }
        Ok(LpBody { m, p })
    }

    pub fn name(&self) -> String {
        match self.p {
            Exponent::Finite(q) => format!("l_{}^{}", q, self.m),
            Exponent::Infinity => format!("l_inf^{}", self.m),
        }
    }

    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        match self.p {
            Exponent::Finite(q) if q == 1.0 => x.iter().map(|v| v.abs()).sum(),
            Exponent::Finite(q) if q == 2.0 => x.norm(),
            Exponent::Finite(q) => x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q),
            Exponent::Infinity => x.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
        }
    }

    /// Norm of the dual space (the l_q norm with 1/p + 1/q = 1).
    pub fn dual_norm(&self, f: &DVector<f64>) -> f64 {
        let dual = match self.p {
            Exponent::Finite(q) if q == 1.0 => Exponent::Infinity,
            Exponent::Finite(q) => Exponent::Finite(q / (q - 1.0)),
            Exponent::Infinity => Exponent::Finite(1.0),
        };
        LpBody { m: self.m, p: dual }.gauge(f)
    }

    /// Norming functional at a boundary point (gauge(x) = 1): the unique
    /// supporting functional where the norm is smooth, a canonical choice
    /// plus valid = false where it is not (l_1 with a zero coordinate,
    /// l_inf with a tied maximum).
    pub fn norming(&self, x: &DVector<f64>) -> (DVector<f64>, bool) {
        match self.p {
            Exponent::Finite(q) if q == 1.0 => {
                let mut valid = true;
                let star = x.map(|v| {
                    if v.abs() <= TIE_TOL {
                        valid = false;
                        0.0
                    } else {
                        v.signum()
                    }
                });
                (star, valid)
            }
            Exponent::Finite(q) => {
                (x.map(|v| v.signum() * v.abs().powf(q - 1.0)), true)
            }
            Exponent::Infinity => {
                let top = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let hits: Vec<usize> = (0..self.m).filter(|&i| x[i].abs() >= top - TIE_TOL).collect();
                let mut star = DVector::zeros(self.m);
                for &i in &hits {
                    star[i] = x[i].signum() / hits.len() as f64;
                }
                (star, hits.len() == 1)
            }
        }
    }

    /// Exact volume for p in {1, 2, inf}; other exponents have no
    /// closed form free of the gamma function and return None.
    pub fn volume(&self) -> Option<f64> {
        let m = self.m;
        match self.p {
            Exponent::Finite(q) if q == 1.0 => {
                Some(2.0_f64.powi(m as i32) / (1..=m).product::<usize>() as f64)
            }
            Exponent::Finite(q) if q == 2.0 => Some(euclidean_ball_volume(m)),
            Exponent::Infinity => Some(2.0_f64.powi(m as i32)),
            _ => None,
        }
    }
}

/// Volume of the unit Euclidean ball via vol_m = vol_{m-2} * 2 pi / m.
pub fn euclidean_ball_volume(m: usize) -> f64 {
    let mut vols = vec![1.0, 2.0];
    for d in 2..=m.max(1) {
        let v = vols[d - 2] * 2.0 * std::f64::consts::PI / d as f64;
        vols.push(v);
    }
    vols[m]
}
