//! Gaussian (Markowitz) markets: canonical form, isomorphism test and the
//! two-fund solver.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMarket {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    cost: DVector<f64>,
}

impl GaussianMarket {
    pub fn new(mean: Vec<f64>, covariance: Vec<Vec<f64>>, cost: Vec<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(invalid("gaussian market needs at least one asset"));
        }
        if cost.len() != n || covariance.len() != n || covariance.iter().any(|r| r.len() != n) {
            return Err(invalid(format!("mean, covariance and cost must all have dimension {n}")));
        }
        let flat: Vec<f64> = covariance.into_iter().flatten().collect();
        Self::from_parts(
            DVector::from_vec(mean),
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_vec(cost),
        )
    }

    pub fn from_parts(mean: DVector<f64>, covariance: DMatrix<f64>, cost: DVector<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.shape() != (n, n) || cost.len() != n {
            return Err(invalid("inconsistent gaussian market dimensions"));
        }
        if mean.iter().chain(cost.iter()).chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("gaussian market data must be finite"));
        }
        let scale = covariance.amax().max(1.0);
        if (&covariance - covariance.transpose()).amax() > tol::DERIVED * scale {
            return Err(invalid("covariance is not symmetric"));
        }
        let eig = covariance.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        if !(hi > 0.0) || lo <= tol::DERIVED * hi {
            return Err(Error::IllConditioned {
                ratio: if hi > 0.0 { lo / hi } else { 0.0 },
            });
        }
        Ok(Self {
            mean,
            covariance,
            cost,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn cost(&self) -> &DVector<f64> {
        &self.cost
    }

    /// Coordinates `Y = Bᵀ X`: mean `Bᵀμ`, covariance `BᵀΣB`, cost `Bᵀc`.
    pub fn change_basis(&self, b: &DMatrix<f64>) -> Result<Self> {
        let bt = b.transpose();
        Self::from_parts(&bt * &self.mean, &bt * &self.covariance * b, &bt * &self.cost)
    }

    fn cholesky_l(&self) -> DMatrix<f64> {
        // validated positive definite
        self.covariance
            .clone()
            .cholesky()
            .expect("covariance validated positive definite")
            .l()
    }

    fn sigma_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        self.covariance
            .clone()
            .cholesky()
            .expect("covariance validated positive definite")
            .solve(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalGaussForm {
    pub dimension: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(skip)]
    pub canonicalizer: DMatrix<f64>,
}

impl CanonicalGaussForm {
    pub fn tuple(&self) -> (f64, f64, f64) {
        (self.alpha, self.beta, self.gamma)
    }
}

/// Extends the orthonormal `frame` to a basis of `ℝⁿ`, rows of the result.
fn complete_rows(frame: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = frame.to_vec();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for b in &basis {
                v -= b * b.dot(&v);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    DMatrix::from_fn(n, n, |r, c| basis[r][c])
}

pub fn canonical_gauss(market: &GaussianMarket) -> CanonicalGaussForm {
    let n = market.dim();
    let l = market.cholesky_l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("cholesky factor is invertible");
    let a = &l_inv * market.mean();
    let b = &l_inv * market.cost();
    let alpha = a.norm();
    let b_norm = b.norm();
    let small = tol::CONSTRUCTION;

    let mut frame: Vec<DVector<f64>> = Vec::new();
    let (beta, gamma);
    if alpha > small {
        let e1 = &a / alpha;
        beta = e1.dot(&b);
        let r = &b - &e1 * beta;
        gamma = r.norm();
        frame.push(e1);
        if gamma > small * b_norm.max(1.0) && n > 1 {
            frame.push(r / gamma);
        }
    } else {
        beta = b_norm;
        gamma = 0.0;
        if b_norm > small {
            frame.push(&b / b_norm);
        }
    }
    let rotation = complete_rows(&frame, n);
    CanonicalGaussForm {
        dimension: n,
        alpha,
        beta,
        gamma: if frame.len() > 1 { gamma } else { 0.0 },
        canonicalizer: rotation * l_inv,
    }
}

/// Tuple equality of the normal forms, within 1e-8.
pub fn gauss_isomorphic(m1: &GaussianMarket, m2: &GaussianMarket) -> bool {
    if m1.dim() != m2.dim() {
        return false;
    }
    let (a, b) = (canonical_gauss(m1), canonical_gauss(m2));
    tol::close(a.alpha, b.alpha, tol::GAUSS)
        && tol::close(a.beta, b.beta, tol::GAUSS)
        && tol::close(a.gamma, b.gamma, tol::GAUSS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFundBasis {
    pub x1: DVector<f64>,
    pub x2: DVector<f64>,
    /// Mean and cost are parallel; one fund suffices.
    pub degenerate: bool,
}

fn parallel(u: &DVector<f64>, v: &DVector<f64>) -> bool {
    let (nu, nv) = (u.norm(), v.norm());
    if nu <= tol::CONSTRUCTION || nv <= tol::CONSTRUCTION {
        return true;
    }
    (u.dot(v).abs() / (nu * nv) - 1.0).abs() <= tol::DERIVED
}

pub fn two_fund_basis(market: &GaussianMarket) -> TwoFundBasis {
    TwoFundBasis {
        x1: market.sigma_inv(market.mean()),
        x2: market.sigma_inv(market.cost()),
        degenerate: parallel(market.mean(), market.cost()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinVariance {
    pub portfolio: DVector<f64>,
    pub variance: f64,
    pub degenerate: bool,
}

/// `min xᵀΣx` subject to `μᵀx = c1`, `cᵀx = c2`.
pub fn min_variance_solve(market: &GaussianMarket, c1: f64, c2: f64) -> Result<MinVariance> {
    let funds = two_fund_basis(market);
    let (mu, cost) = (market.mean(), market.cost());
    let portfolio = if !funds.degenerate {
        let g = nalgebra::Matrix2::new(
            mu.dot(&funds.x1),
            mu.dot(&funds.x2),
            cost.dot(&funds.x1),
            cost.dot(&funds.x2),
        );
        let lambda = g
            .lu()
            .solve(&nalgebra::Vector2::new(c1, c2))
            .ok_or(Error::InconsistentTargets)?;
        &funds.x1 * lambda[0] + &funds.x2 * lambda[1]
    } else {
        // μ = a·v and c = b·v for a unit direction v; only vᵀx is constrained
        let v = if mu.norm() >= cost.norm() { mu } else { cost };
        let v_norm = v.norm();
        if v_norm <= tol::CONSTRUCTION {
            if c1.abs() > tol::DERIVED || c2.abs() > tol::DERIVED {
                return Err(Error::InconsistentTargets);
            }
            DVector::zeros(market.dim())
        } else {
            let v = v / v_norm;
            let (a, b) = (mu.dot(&v), cost.dot(&v));
            let scale = c1.abs().max(c2.abs()).max(1.0);
            if (a * c2 - b * c1).abs() > tol::DERIVED * scale * a.abs().max(b.abs()) {
                return Err(Error::InconsistentTargets);
            }
            let t = (a * c1 + b * c2) / (a * a + b * b);
            let w = market.sigma_inv(&v);
            &w * (t / v.dot(&w))
        }
    };
    let variance = portfolio.dot(&(market.covariance() * &portfolio));
    Ok(MinVariance {
        portfolio,
        variance,
        degenerate: funds.degenerate,
    })
}
